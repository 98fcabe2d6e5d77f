//! Periodic structure in Euler exponent sequences.

use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::series::ExponentSequence;

pub const DEFAULT_P_MAX: usize = 64;
pub const DEFAULT_MIN_REPEATS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShapeError {
    #[error("window of {order} exponents cannot show {min_repeats} repetitions of any period")]
    WindowTooShort { order: usize, min_repeats: usize },
    #[error("min_repeats and p_max must be at least 1")]
    BadThreshold,
    #[error("exponent a_{index} does not fit in 64 bits")]
    ExponentTooLarge { index: usize },
    #[error("symmetry is only defined for 0/1 exponent profiles")]
    NotBinary,
}

/// A period `p` with the exponent assigned to each residue class.
///
/// `profile[i]` is the exponent of `(1 - q^m)^(-1)` for `m = i + 1 (mod p)`,
/// so the last entry belongs to the class `0 (mod p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductShape {
    period: usize,
    profile: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Asymmetric,
}

impl ProductShape {
    /// # Panics
    /// If `profile` is empty.
    pub fn new(profile: Vec<i64>) -> Self {
        assert!(
            !profile.is_empty(),
            "a product shape needs at least one residue class"
        );
        Self {
            period: profile.len(),
            profile,
        }
    }

    /// Binary shape of period `modulus` allowing parts in `residues`
    /// (taken mod `modulus`, so `modulus` itself means the class 0).
    pub fn from_residues(modulus: usize, residues: &[usize]) -> Self {
        let mut profile = vec![0; modulus];
        for &r in residues {
            let class = (r + modulus - 1) % modulus;
            profile[class] = 1;
        }
        Self::new(profile)
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn profile(&self) -> &[i64] {
        &self.profile
    }

    pub fn is_binary(&self) -> bool {
        self.profile.iter().all(|&e| e == 0 || e == 1)
    }

    /// Residues `r` in `1..=p` with exponent 1, in increasing order.
    pub fn residues(&self) -> Vec<usize> {
        self.profile
            .iter()
            .enumerate()
            .filter(|(_, &e)| e == 1)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// The exponent sequence `a_1..a_order` this shape generates.
    pub fn exponents(&self, order: usize) -> ExponentSequence {
        ExponentSequence::periodic(&self.profile, order)
    }
}

impl fmt::Display for ProductShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&describe(self))
    }
}

/// Smallest `p <= p_max` such that `a_m = a_{m+p}` across the whole window.
///
/// Periods are only considered when the window holds at least `min_repeats`
/// full periods, so the effective bound is `min(p_max, order / min_repeats)`.
pub fn detect_period(
    a: &ExponentSequence,
    p_max: usize,
    min_repeats: usize,
) -> Result<Option<ProductShape>, ShapeError> {
    if p_max == 0 || min_repeats == 0 {
        return Err(ShapeError::BadThreshold);
    }
    let order = a.order();
    let limit = p_max.min(order / min_repeats);
    if limit == 0 {
        return Err(ShapeError::WindowTooShort { order, min_repeats });
    }
    let exps = a
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            e.to_i64()
                .ok_or(ShapeError::ExponentTooLarge { index: i + 1 })
        })
        .collect::<Result<Vec<i64>, _>>()?;
    let shape = (1..=limit)
        .find(|&p| exps.iter().zip(&exps[p..]).all(|(x, y)| x == y))
        .map(|p| ProductShape::new(exps[..p].to_vec()));
    Ok(shape)
}

/// Human-readable congruence statement for a shape.
pub fn describe(shape: &ProductShape) -> String {
    let p = shape.period;
    if shape.is_binary() {
        let residues = shape.residues();
        if residues.len() == p {
            return "all parts allowed".into();
        }
        if residues.is_empty() {
            return "no parts allowed (product is 1)".into();
        }
        let listed: Vec<String> = residues.iter().map(|r| (r % p).to_string()).collect();
        return format!("parts \u{2261} {} (mod {p})", listed.join(", "));
    }
    let listed: Vec<String> = shape
        .profile
        .iter()
        .enumerate()
        .map(|(i, e)| format!("{}:{e}", (i + 1) % p))
        .collect();
    format!(
        "non-partition-style product, period {p}, exponents by residue [{}]",
        listed.join(", ")
    )
}

/// Whether the allowed residue set is closed under `r -> p - r (mod p)`.
pub fn symmetry_classify(shape: &ProductShape) -> Result<Symmetry, ShapeError> {
    if !shape.is_binary() {
        return Err(ShapeError::NotBinary);
    }
    let p = shape.period;
    let allowed = |r: usize| shape.profile[(r + p - 1) % p] == 1;
    let closed = shape
        .residues()
        .into_iter()
        .all(|r| allowed((p - r % p) % p));
    Ok(if closed {
        Symmetry::Symmetric
    } else {
        Symmetry::Asymmetric
    })
}
