//! Linear recursions for capped sum-side polynomials.
//!
//! A recursion family describes how the polynomial for cap `k` is built from
//! polynomials with smaller caps. Each family has one or two registers per
//! cap (`P_k` and `Q_k` have one, `R_{n,1}`, `R_{n,2}` and `S_{n,a}` have two)
//! and one or more cases selected by the residue of the cap, e.g. `3n`,
//! `3n+1` and `3n+2`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::series::TruncatedSeries;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecursionError {
    #[error("cannot parse linear form {0:?}")]
    LinearForm(String),
    #[error("{family}: factors {factors:?} multiply to q^({product}) but the simplified exponent is {stated}")]
    ExponentMismatch {
        family: Family,
        factors: Vec<String>,
        product: String,
        stated: String,
    },
    #[error("{family}: register {register} out of range (family has {available})")]
    RegisterOutOfRange {
        family: Family,
        register: usize,
        available: usize,
    },
    #[error("{family}: no case produces index {index}")]
    NoCase { family: Family, index: usize },
    #[error("{family}: stepping to {index} needs register {register} at index {needed}, which is not available")]
    MissingRegister {
        family: Family,
        index: usize,
        needed: i64,
        register: usize,
    },
    #[error("{family}: negative exponent {exponent} when stepping to {index}")]
    NegativeExponent {
        family: Family,
        index: usize,
        exponent: i64,
    },
    #[error("{family}: no initial conditions given")]
    NoInitialConditions { family: Family },
    #[error("{family}: initial conditions at index {index} are incomplete")]
    IncompleteInitial { family: Family, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    P,
    Q,
    R,
    S,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::P => "P",
            Family::Q => "Q",
            Family::R => "R",
            Family::S => "S",
        };
        f.write_str(name)
    }
}

/// `coef * n + constant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Linear {
    pub coef: i64,
    pub constant: i64,
}

impl Linear {
    pub fn eval(self, n: i64) -> i64 {
        self.coef * n + self.constant
    }

    /// The `n` with `self.eval(n) == value`, if there is an integral one.
    fn solve(self, value: i64) -> Option<i64> {
        if self.coef == 0 {
            return (self.constant == value).then_some(0);
        }
        let diff = value - self.constant;
        (diff % self.coef == 0).then(|| diff / self.coef)
    }
}

impl std::ops::Add for Linear {
    type Output = Linear;

    fn add(self, rhs: Linear) -> Linear {
        Linear {
            coef: self.coef + rhs.coef,
            constant: self.constant + rhs.constant,
        }
    }
}

impl fmt::Display for Linear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.coef, self.constant) {
            (0, c) => write!(f, "{c}"),
            (a, c) => {
                match a {
                    1 => f.write_str("n")?,
                    -1 => f.write_str("-n")?,
                    _ => write!(f, "{a}n")?,
                }
                match c {
                    0 => Ok(()),
                    c if c > 0 => write!(f, "+{c}"),
                    c => write!(f, "{c}"),
                }
            }
        }
    }
}

impl FromStr for Linear {
    type Err = RecursionError;

    /// Accepts forms like `3n`, `3n-1`, `n+2`, `-n`, `4`.
    fn from_str(s: &str) -> Result<Self, RecursionError> {
        let bad = || RecursionError::LinearForm(s.to_string());
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(bad());
        }
        let mut out = Linear::default();
        let mut start = 0;
        let mut pieces = Vec::new();
        for (i, ch) in text.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 {
                pieces.push(&text[start..i]);
                start = i;
            }
        }
        pieces.push(&text[start..]);
        for piece in pieces {
            let (sign, body) = match piece.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, piece.strip_prefix('+').unwrap_or(piece)),
            };
            if let Some(c) = body.strip_suffix('n') {
                let c = c.trim_end_matches('*');
                let coef: i64 = if c.is_empty() {
                    1
                } else {
                    c.parse().map_err(|_| bad())?
                };
                out.coef += sign * coef;
            } else {
                let c: i64 = body.parse().map_err(|_| bad())?;
                out.constant += sign * c;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFixture {
    #[serde(default)]
    sign: Option<String>,
    factors: Vec<String>,
    exponent: String,
    source: String,
    #[serde(default = "default_register")]
    register: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFixture {
    index: String,
    register: usize,
    terms: Vec<TermFixture>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RecursionFixture {
    registers: usize,
    cases: Vec<CaseFixture>,
}

fn default_register() -> usize {
    1
}

/// One summand `(+/-) q^exponent * X_{source, register}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub negate: bool,
    pub exponent: Linear,
    pub source: Linear,
    pub register: usize,
}

/// The rule for `X_{index, register}` when the cap has the form `index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub index: Linear,
    pub register: usize,
    pub terms: Vec<Term>,
}

/// A compiled recursion family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recursion {
    family: Family,
    registers: usize,
    cases: Vec<Case>,
    /// Largest constant distance between a target and a source index, or
    /// `None` when some distance grows with `n` (every register is kept).
    lookback: Option<usize>,
}

impl Recursion {
    /// Compiles fixture data, checking every factored exponent against its
    /// simplified form.
    pub(crate) fn from_fixture(
        family: Family,
        fixture: &RecursionFixture,
    ) -> Result<Self, RecursionError> {
        let mut cases = Vec::new();
        for case in &fixture.cases {
            let index: Linear = case.index.parse()?;
            check_register(family, case.register, fixture.registers)?;
            let mut terms = Vec::new();
            for t in &case.terms {
                let factors = t
                    .factors
                    .iter()
                    .map(|f| f.parse::<Linear>())
                    .collect::<Result<Vec<_>, _>>()?;
                let stated: Linear = t.exponent.parse()?;
                let product = factors.iter().fold(Linear::default(), |acc, &f| acc + f);
                if product != stated {
                    return Err(RecursionError::ExponentMismatch {
                        family,
                        factors: t.factors.clone(),
                        product: product.to_string(),
                        stated: stated.to_string(),
                    });
                }
                check_register(family, t.register, fixture.registers)?;
                terms.push(Term {
                    negate: t.sign.as_deref() == Some("-"),
                    exponent: stated,
                    source: t.source.parse()?,
                    register: t.register,
                });
            }
            cases.push(Case {
                index,
                register: case.register,
                terms,
            });
        }
        Ok(Self::new(family, fixture.registers, cases))
    }

    pub fn new(family: Family, registers: usize, cases: Vec<Case>) -> Self {
        let mut lookback = Some(0usize);
        for case in &cases {
            for t in &case.terms {
                if t.source.coef != case.index.coef {
                    lookback = None;
                } else if let Some(lb) = lookback.as_mut() {
                    let dist = (case.index.constant - t.source.constant).max(0) as usize;
                    *lb = (*lb).max(dist);
                }
            }
        }
        Self {
            family,
            registers,
            cases,
            lookback,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    /// Number of earlier caps a step reads; bounds the live register window.
    pub fn lookback(&self) -> Option<usize> {
        self.lookback
    }
}

fn check_register(family: Family, register: usize, available: usize) -> Result<(), RecursionError> {
    if register == 0 || register > available {
        return Err(RecursionError::RegisterOutOfRange {
            family,
            register,
            available,
        });
    }
    Ok(())
}

/// A recursion in progress: the current cap and the registers still needed.
#[derive(Debug, Clone)]
pub struct RecursionState {
    recursion: Recursion,
    index: usize,
    order: usize,
    registers: BTreeMap<usize, Vec<TruncatedSeries>>,
}

impl RecursionState {
    /// Starts from initial conditions given as `(index, register, polynomial)`.
    /// Every index must carry all registers; polynomials are truncated to `order`.
    pub fn new(
        recursion: Recursion,
        initial: &[(usize, usize, TruncatedSeries)],
        order: usize,
    ) -> Result<Self, RecursionError> {
        let family = recursion.family;
        let width = recursion.registers;
        let mut slots: BTreeMap<usize, Vec<Option<TruncatedSeries>>> = BTreeMap::new();
        for (index, register, poly) in initial {
            check_register(family, *register, width)?;
            let poly = TruncatedSeries::from_coeffs(poly.coeffs().iter().cloned(), order);
            slots.entry(*index).or_insert_with(|| vec![None; width])[register - 1] = Some(poly);
        }
        let mut registers = BTreeMap::new();
        for (index, regs) in slots {
            let regs = regs
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or(RecursionError::IncompleteInitial { family, index })?;
            registers.insert(index, regs);
        }
        let index = *registers
            .keys()
            .next_back()
            .ok_or(RecursionError::NoInitialConditions { family })?;
        Ok(Self {
            recursion,
            index,
            order,
            registers,
        })
    }

    pub fn family(&self) -> Family {
        self.recursion.family
    }

    /// Current (largest computed) cap.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Register `register` (1-based) at cap `index`, if still held.
    pub fn register(&self, index: usize, register: usize) -> Option<&TruncatedSeries> {
        self.registers
            .get(&index)
            .and_then(|regs| regs.get(register.checked_sub(1)?))
    }

    /// The full capped sum side at the current cap: the last register.
    pub fn current(&self) -> &TruncatedSeries {
        self.registers[&self.index]
            .last()
            .expect("register sets are never empty")
    }

    pub fn live_indices(&self) -> Vec<usize> {
        self.registers.keys().copied().collect()
    }

    /// Advances the cap by one. All arithmetic is modulo `q^(order+1)`.
    pub fn step(&mut self) -> Result<(), RecursionError> {
        let family = self.recursion.family;
        let target = self.index + 1;
        let mut produced: Vec<Option<TruncatedSeries>> = vec![None; self.recursion.registers];
        let mut matched = false;
        for case in &self.recursion.cases {
            let Some(n) = case.index.solve(target as i64) else {
                continue;
            };
            matched = true;
            let mut acc = TruncatedSeries::zero(self.order);
            for term in &case.terms {
                let source = term.source.eval(n);
                let exponent = term.exponent.eval(n);
                if exponent < 0 {
                    return Err(RecursionError::NegativeExponent {
                        family,
                        index: target,
                        exponent,
                    });
                }
                let missing = RecursionError::MissingRegister {
                    family,
                    index: target,
                    needed: source,
                    register: term.register,
                };
                let operand = if source == target as i64 {
                    produced[term.register - 1].as_ref()
                } else if source >= 0 {
                    self.register(source as usize, term.register)
                } else {
                    None
                }
                .ok_or(missing)?;
                acc.add_shifted(operand, exponent as usize, term.negate);
            }
            produced[case.register - 1] = Some(acc);
        }
        if !matched {
            return Err(RecursionError::NoCase {
                family,
                index: target,
            });
        }
        let regs = produced.into_iter().collect::<Option<Vec<_>>>().ok_or(
            RecursionError::IncompleteInitial {
                family,
                index: target,
            },
        )?;
        self.registers.insert(target, regs);
        self.index = target;
        if let Some(lookback) = self.recursion.lookback {
            let keep_from = target.saturating_sub(lookback);
            self.registers.retain(|&k, _| k >= keep_from);
        }
        Ok(())
    }

    /// Steps until the current cap is at least `cap`.
    pub fn advance_to(&mut self, cap: usize) -> Result<(), RecursionError> {
        while self.index < cap {
            self.step()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(s: &str) -> Linear {
        s.parse().unwrap()
    }

    #[test]
    fn linear_forms() {
        assert_eq!(
            lin("3n-1"),
            Linear {
                coef: 3,
                constant: -1
            }
        );
        assert_eq!(
            lin("n"),
            Linear {
                coef: 1,
                constant: 0
            }
        );
        assert_eq!(
            lin("-n+3"),
            Linear {
                coef: -1,
                constant: 3
            }
        );
        assert_eq!(lin("0"), Linear::default());
        assert_eq!(lin("4n - 5").to_string(), "4n-5");
        assert!("3m".parse::<Linear>().is_err());
        assert_eq!(lin("3n+2").solve(8), Some(2));
        assert_eq!(lin("3n+2").solve(7), None);
    }

    fn toy() -> Recursion {
        // X_n = X_{n-1} + q^n X_{n-1}: X_n = prod_{i<=n} (1 + q^i)
        Recursion::new(
            Family::P,
            1,
            vec![Case {
                index: lin("n"),
                register: 1,
                terms: vec![
                    Term {
                        negate: false,
                        exponent: lin("0"),
                        source: lin("n-1"),
                        register: 1,
                    },
                    Term {
                        negate: false,
                        exponent: lin("n"),
                        source: lin("n-1"),
                        register: 1,
                    },
                ],
            }],
        )
    }

    #[test]
    fn distinct_parts_toy_recursion() {
        let mut st = RecursionState::new(toy(), &[(0, 1, TruncatedSeries::one(10))], 10).unwrap();
        st.advance_to(10).unwrap();
        let expected = TruncatedSeries::from_coeffs([1, 1, 1, 2, 2, 3, 4, 5, 6, 8, 10], 10);
        assert_eq!(st.current(), &expected);
        assert_eq!(st.live_indices(), vec![9, 10]);
    }

    #[test]
    fn missing_back_reference_is_rejected() {
        let rec = toy();
        let mut st = RecursionState {
            recursion: rec,
            index: 0,
            order: 5,
            registers: BTreeMap::new(),
        };
        assert!(matches!(
            st.step(),
            Err(RecursionError::MissingRegister { needed: 0, .. })
        ));
        assert!(matches!(
            RecursionState::new(toy(), &[], 5),
            Err(RecursionError::NoInitialConditions { .. })
        ));
    }
}
