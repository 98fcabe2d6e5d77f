//! Exact truncated power series and Euler's product factorization.
//!
//! A [`TruncatedSeries`] of order `N` stores the coefficients of
//! `q^0 ..= q^N`; everything above `q^N` is unknown. Binary operations on
//! series of different orders truncate to the smaller order.
//!
//! [`euler_factorize`] turns a series `1 + b_1 q + b_2 q^2 + ...` into the
//! exponents `a_m` of `prod_{m >= 1} (1 - q^m)^(-a_m)`, and
//! [`expand_product`] goes the other way.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("constant term must be 1, found {0}")]
    NonUnitConstant(BigInt),
    #[error("series order must be at least {min}, got {got}")]
    OrderTooSmall { min: usize, got: usize },
    #[error("order {requested} exceeds the {available} available coefficients")]
    NotEnoughCoefficients { requested: usize, available: usize },
    #[error("non-integral exponent at m = {index}: {numerator} is not divisible by {index}")]
    NonIntegral { index: usize, numerator: BigInt },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Coefficients `c_0 ..= c_N` of a power series known modulo `q^(N+1)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    coeffs: Vec<BigInt>,
}

impl TruncatedSeries {
    /// Builds a series from its coefficients; the order is `coeffs.len() - 1`.
    ///
    /// # Panics
    /// If `coeffs` is empty.
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least c_0");
        Self { coeffs }
    }

    /// Builds a series of the given order, padding with zeros or dropping
    /// coefficients above `q^order`.
    pub fn from_coeffs<I, T>(coeffs: I, order: usize) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut v: Vec<BigInt> = coeffs.into_iter().take(order + 1).map(Into::into).collect();
        v.resize(order + 1, BigInt::zero());
        Self { coeffs: v }
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![BigInt::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(0, order)
    }

    /// `q^k` truncated at `q^order` (the zero series when `k > order`).
    pub fn monomial(k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = BigInt::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<&BigInt> {
        self.coeffs.get(k)
    }

    /// Restricts to a lower order. Orders above the current one are clamped.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        Self {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    /// Multiplies by `q^k`: coefficients move up `k` places, the top `k` fall off.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.order();
        let mut out = Self::zero(n);
        if k <= n {
            out.coeffs[k..].clone_from_slice(&self.coeffs[..=n - k]);
        }
        out
    }

    /// In-place `self += (+/-) q^k * other`; the result has the smaller order.
    pub fn add_shifted(&mut self, other: &TruncatedSeries, k: usize, negate: bool) {
        let n = self.order().min(other.order());
        self.coeffs.truncate(n + 1);
        if k > n {
            return;
        }
        for (dst, src) in self.coeffs[k..=n].iter_mut().zip(&other.coeffs) {
            if negate {
                *dst -= src;
            } else {
                *dst += src;
            }
        }
    }

    /// Truncated product; the result has the smaller of the two orders.
    pub fn mul(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(other.order());
        let mut out = Self::zero(n);
        for (i, a) in self.coeffs[..=n].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        out
    }

    /// True when every coefficient of `self` is `<=` the matching one of `other`
    /// over the common order.
    pub fn dominated_by(&self, other: &TruncatedSeries) -> bool {
        self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a <= b)
    }

    /// Parses a polynomial written like `1+q+2q^3-q^7` (also accepts `2*q^3`).
    /// Terms above `q^order` are dropped.
    pub fn parse_polynomial(text: &str, order: usize) -> Result<Self, SeriesError> {
        let err = |message: String| SeriesError::Parse { line: 1, message };
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(err("empty polynomial".into()));
        }
        let mut out = Self::zero(order);
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in cleaned.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(&cleaned[start..i]);
                start = i;
            }
        }
        terms.push(&cleaned[start..]);
        for term in terms {
            let (negative, body) = match term.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, term.strip_prefix('+').unwrap_or(term)),
            };
            let (coef_text, power) = match body.find('q') {
                None => (body, 0usize),
                Some(pos) => {
                    let exp_text = &body[pos + 1..];
                    let power = if exp_text.is_empty() {
                        1
                    } else {
                        exp_text
                            .strip_prefix('^')
                            .and_then(|e| e.trim_matches(|c| c == '{' || c == '}').parse().ok())
                            .ok_or_else(|| err(format!("bad exponent in term `{term}`")))?
                    };
                    (body[..pos].trim_end_matches('*'), power)
                }
            };
            let mut coef: BigInt = if coef_text.is_empty() {
                BigInt::one()
            } else {
                coef_text
                    .parse()
                    .map_err(|_| err(format!("bad coefficient in term `{term}`")))?
            };
            if negative {
                coef = -coef;
            }
            if power <= order {
                out.coeffs[power] += coef;
            }
        }
        Ok(out)
    }

    /// Index of the first differing coefficient over the common order.
    pub fn first_difference(&self, other: &TruncatedSeries) -> Option<usize> {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .position(|(a, b)| a != b)
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} + O(q^{})", self.order() + 1)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, "{sign}")?;
            }
            first = false;
            let mag = c.abs();
            match (k, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => f.write_str("q")?,
                (1, false) => write!(f, "{mag}q")?,
                (_, true) => write!(f, "q^{k}")?,
                (_, false) => write!(f, "{mag}q^{k}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: self.coeffs[..=n]
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: self.coeffs[..=n]
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// Truncated product of two series (see [`TruncatedSeries::mul`]).
pub fn series_mul(f: &TruncatedSeries, g: &TruncatedSeries) -> TruncatedSeries {
    f.mul(g)
}

/// Exponents `a_1 ..= a_N` of `prod_m (1 - q^m)^(-a_m)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExponentSequence {
    exps: Vec<BigInt>,
}

impl ExponentSequence {
    /// `exps[0]` is `a_1`.
    ///
    /// # Panics
    /// If `exps` is empty.
    pub fn new(exps: Vec<BigInt>) -> Self {
        assert!(!exps.is_empty(), "an exponent sequence needs at least a_1");
        Self { exps }
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(exps: I) -> Self {
        Self::new(exps.into_iter().map(BigInt::from).collect())
    }

    /// Exponent sequence of order `order` with `a_m = profile[(m - 1) % p]`.
    pub fn periodic(profile: &[i64], order: usize) -> Self {
        assert!(!profile.is_empty() && order >= 1);
        Self::from_ints((0..order).map(|i| profile[i % profile.len()]))
    }

    pub fn order(&self) -> usize {
        self.exps.len()
    }

    pub fn as_slice(&self) -> &[BigInt] {
        &self.exps
    }

    /// `a_m` for `1 <= m <= order`.
    pub fn get(&self, m: usize) -> Option<&BigInt> {
        m.checked_sub(1).and_then(|i| self.exps.get(i))
    }

    pub fn prefix(&self, k: usize) -> Self {
        Self::new(self.exps[..k.min(self.exps.len())].to_vec())
    }
}

impl fmt::Debug for ExponentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.exps.iter().map(|e| e.to_string()))
            .finish()
    }
}

/// Factors `b = 1 + b_1 q + ... + b_N q^N` as `prod_{m=1}^N (1 - q^m)^(-a_m)`.
///
/// Uses the logarithmic-derivative recurrence
/// `n b_n = sum_{j=1}^n s(j) b_{n-j}` where `s(j) = sum_{d | j} d a_d`.
/// `s(n)` is recovered from the already known `s(1..n)`, then
/// `n a_n = s(n) - sum_{d | n, d < n} d a_d`. The proper-divisor sums are
/// accumulated as each `a_d` is produced, so the whole run costs `O(N^2)`
/// big-integer operations.
pub fn euler_factorize(b: &TruncatedSeries) -> Result<ExponentSequence, SeriesError> {
    let n_max = b.order();
    if n_max < 1 {
        return Err(SeriesError::OrderTooSmall { min: 1, got: n_max });
    }
    if !b.coeffs[0].is_one() {
        return Err(SeriesError::NonUnitConstant(b.coeffs[0].clone()));
    }
    let bc = &b.coeffs;
    // sigma[j] = sum_{d | j} d a_d; proper[j] accumulates the d < j part.
    let mut sigma = vec![BigInt::zero(); n_max + 1];
    let mut proper = vec![BigInt::zero(); n_max + 1];
    let mut exps = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut s = &bc[n] * BigInt::from(n);
        for j in 1..n {
            if !bc[n - j].is_zero() && !sigma[j].is_zero() {
                s -= &sigma[j] * &bc[n - j];
            }
        }
        let numerator = &s - &proper[n];
        let (a_n, rem) = numerator.div_rem(&BigInt::from(n));
        if !rem.is_zero() {
            return Err(SeriesError::NonIntegral {
                index: n,
                numerator,
            });
        }
        if !a_n.is_zero() {
            let weighted = &a_n * BigInt::from(n);
            for multiple in (2 * n..=n_max).step_by(n) {
                proper[multiple] += &weighted;
            }
        }
        sigma[n] = s;
        exps.push(a_n);
    }
    Ok(ExponentSequence { exps })
}

/// Expands `prod_{m=1}^N (1 - q^m)^(-a_m)` modulo `q^(N+1)`.
pub fn expand_product(a: &ExponentSequence) -> TruncatedSeries {
    let n = a.order();
    let mut c = TruncatedSeries::one(n).coeffs;
    for (idx, exp) in a.exps.iter().enumerate() {
        let m = idx + 1;
        match exp.to_i64() {
            Some(0) => {}
            Some(1) => {
                // divide by (1 - q^m)
                for k in m..=n {
                    let prev = c[k - m].clone();
                    c[k] += prev;
                }
            }
            Some(-1) => {
                for k in (m..=n).rev() {
                    let prev = c[k - m].clone();
                    c[k] -= prev;
                }
            }
            _ => mul_binomial_in_place(&mut c, m, exp),
        }
    }
    TruncatedSeries { coeffs: c }
}

/// Multiplies `c` by `(1 - q^m)^(-e) = sum_i binom(e + i - 1, i) q^(m i)`.
fn mul_binomial_in_place(c: &mut [BigInt], m: usize, e: &BigInt) {
    let n = c.len() - 1;
    let terms = n / m;
    let mut binom = Vec::with_capacity(terms + 1);
    binom.push(BigInt::one());
    for i in 1..=terms {
        let next = &binom[i - 1] * (e + BigInt::from(i - 1)) / BigInt::from(i);
        binom.push(next);
    }
    for k in (m..=n).rev() {
        let mut acc = c[k].clone();
        for (i, t) in binom.iter().enumerate().take(k / m + 1).skip(1) {
            if !t.is_zero() {
                acc += t * &c[k - i * m];
            }
        }
        c[k] = acc;
    }
}

/// Checks that factoring the `k`-prefix of `b` reproduces the first `k`
/// exponents of the full factorization.
pub fn prefix_stability_check(b: &TruncatedSeries, k: usize) -> Result<bool, SeriesError> {
    if k < 1 || k > b.order() {
        return Err(SeriesError::OrderTooSmall {
            min: k.max(1),
            got: b.order(),
        });
    }
    let full = euler_factorize(b)?;
    let prefix = euler_factorize(&b.truncate(k))?;
    Ok(prefix.exps[..] == full.exps[..k])
}

/// Reads a coefficient list: either a JSON array (of decimal strings or
/// integers) or one decimal integer per line, `c_0` first.
pub fn parse_coefficients(text: &str) -> Result<Vec<BigInt>, SeriesError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let values: Vec<serde_json::Value> =
            serde_json::from_str(text).map_err(|e| SeriesError::Parse {
                line: e.line(),
                message: e.to_string(),
            })?;
        return values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let raw = match v {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
                    other => {
                        return Err(SeriesError::Parse {
                            line: 1,
                            message: format!("entry {i} is not an integer: {other}"),
                        })
                    }
                };
                raw.trim().parse().map_err(|_| SeriesError::Parse {
                    line: 1,
                    message: format!("entry {i} is not a decimal integer: {raw:?}"),
                })
            })
            .collect();
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| SeriesError::Parse {
                line: i + 1,
                message: format!("not a decimal integer: {:?}", l.trim()),
            })
        })
        .collect()
}
