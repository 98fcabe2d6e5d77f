//! High-order verification of sum-side = product-side identities.
//!
//! The sum side is produced either by direct counting
//! ([`crate::partition::count_sum_side`]) or by stepping a capped-polynomial
//! recursion until the cap reaches the verification order. The product side
//! is expanded directly from the claimed residue classes.

pub mod recursion;

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::partition::{count_sum_side, ConditionError, ConditionSet, MAX_COUNT_ORDER};
use crate::product::ProductShape;
use crate::series::{euler_factorize, expand_product, SeriesError, TruncatedSeries};

pub use recursion::{Family, Linear, Recursion, RecursionError, RecursionState};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

const BUILTIN_FIXTURES: &str = include_str!("../../fixtures/identities.json");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("fixture file: line {line}, column {column}: {message}")]
    FixtureJson {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("fixture file has unsupported schema_version {0}")]
    SchemaVersion(u32),
    #[error("identity {name}: {source}")]
    Conditions {
        name: String,
        source: ConditionError,
    },
    #[error("identity {name}: residue {residue} outside 1..={modulus}")]
    Residue {
        name: String,
        residue: usize,
        modulus: usize,
    },
    #[error("identity {name}: recursion family {family} has no definition")]
    UnknownFamily { name: String, family: Family },
    #[error("identity {name}: initial condition: {source}")]
    InitialCondition { name: String, source: SeriesError },
    #[error(transparent)]
    Recursion(#[from] RecursionError),
    #[error("identity {0} has no recursion family")]
    NoRecursion(String),
    #[error("unknown identity {0:?}")]
    UnknownIdentity(String),
    #[error("enumeration is limited to order {max}, requested {requested}")]
    OrderTooLarge { requested: usize, max: usize },
    #[error("verification order must be at least 1")]
    ZeroOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Recursion,
    Enumeration,
    Both,
}

/// Initial condition for one register of a recursion family.
///
/// `printed` keeps the originally published form when it differs from the
/// enumerated polynomial (a known erratum); `poly` is always the checked value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub index: usize,
    pub register: usize,
    pub poly: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecursionSeed {
    pub family: Family,
    pub initial: Vec<InitialCondition>,
}

/// A claimed identity: partitions obeying `conditions` are equinumerous
/// with partitions into parts whose residue mod `modulus` lies in `residues`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySpec {
    pub name: String,
    pub conditions: ConditionSet,
    pub modulus: usize,
    pub residues: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recursion: Option<RecursionSeed>,
}

impl IdentitySpec {
    pub fn recursion_family(&self) -> Option<Family> {
        self.recursion.as_ref().map(|r| r.family)
    }

    pub fn shape(&self) -> ProductShape {
        ProductShape::from_residues(self.modulus, &self.residues)
    }

    fn validate(&self) -> Result<(), VerifyError> {
        self.conditions
            .validate()
            .map_err(|source| VerifyError::Conditions {
                name: self.name.clone(),
                source,
            })?;
        if let Some(&residue) = self.residues.iter().find(|&&r| r == 0 || r > self.modulus) {
            return Err(VerifyError::Residue {
                name: self.name.clone(),
                residue,
                modulus: self.modulus,
            });
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    schema_version: u32,
    recursions: BTreeMap<Family, recursion::RecursionFixture>,
    identities: Vec<IdentitySpec>,
}

/// Recursion definitions plus the identities that use them.
#[derive(Debug, Clone)]
pub struct FixtureSet {
    recursions: BTreeMap<Family, Recursion>,
    identities: Vec<IdentitySpec>,
}

impl FixtureSet {
    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        let file: FixtureFile =
            serde_json::from_str(text).map_err(|e| VerifyError::FixtureJson {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        if file.schema_version != 1 {
            return Err(VerifyError::SchemaVersion(file.schema_version));
        }
        let recursions = file
            .recursions
            .iter()
            .map(|(&family, fx)| Ok((family, Recursion::from_fixture(family, fx)?)))
            .collect::<Result<BTreeMap<_, _>, VerifyError>>()?;
        let set = FixtureSet {
            recursions,
            identities: file.identities,
        };
        for spec in &set.identities {
            spec.validate()?;
            if spec.recursion.is_some() {
                set.initial_state(spec, 1)?;
            }
        }
        Ok(set)
    }

    /// The six identities shipped with the crate.
    pub fn builtin() -> &'static FixtureSet {
        static SET: OnceLock<FixtureSet> = OnceLock::new();
        SET.get_or_init(|| {
            FixtureSet::from_json(BUILTIN_FIXTURES).expect("built-in fixture file is valid")
        })
    }

    pub fn identities(&self) -> &[IdentitySpec] {
        &self.identities
    }

    pub fn identity(&self, name: &str) -> Result<&IdentitySpec, VerifyError> {
        self.identities
            .iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| VerifyError::UnknownIdentity(name.to_string()))
    }

    pub fn recursion(&self, family: Family) -> Option<&Recursion> {
        self.recursions.get(&family)
    }

    /// Recursion state loaded with `spec`'s initial conditions, truncated at `order`.
    pub fn initial_state(
        &self,
        spec: &IdentitySpec,
        order: usize,
    ) -> Result<RecursionState, VerifyError> {
        let seed = spec
            .recursion
            .as_ref()
            .ok_or_else(|| VerifyError::NoRecursion(spec.name.clone()))?;
        let rec = self
            .recursions
            .get(&seed.family)
            .ok_or_else(|| VerifyError::UnknownFamily {
                name: spec.name.clone(),
                family: seed.family,
            })?;
        let initial = seed
            .initial
            .iter()
            .map(|ic| {
                TruncatedSeries::parse_polynomial(&ic.poly, order)
                    .map(|p| (ic.index, ic.register, p))
                    .map_err(|source| VerifyError::InitialCondition {
                        name: spec.name.clone(),
                        source,
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RecursionState::new(rec.clone(), &initial, order)?)
    }

    /// Sum side through `q^order` from the recursion: the capped polynomial
    /// at cap `order` agrees with the uncapped sum side up to `q^order`.
    pub fn recursion_sum_side(
        &self,
        spec: &IdentitySpec,
        order: usize,
    ) -> Result<TruncatedSeries, VerifyError> {
        let mut state = self.initial_state(spec, order)?;
        state.advance_to(order)?;
        Ok(state.current().clone())
    }
}

/// `prod_{m mod modulus in residues} (1 - q^m)^(-1)` through `q^order`.
pub fn product_side(spec: &IdentitySpec, order: usize) -> TruncatedSeries {
    if order == 0 {
        return TruncatedSeries::one(0);
    }
    expand_product(&spec.shape().exponents(order))
}

/// Compares Euler exponents of `sum_side` with the claimed residue classes;
/// returns the first `m` where they differ.
pub fn first_exponent_mismatch(
    spec: &IdentitySpec,
    sum_side: &TruncatedSeries,
) -> Result<Option<usize>, SeriesError> {
    let exps = euler_factorize(sum_side)?;
    let claimed = spec.shape().exponents(exps.order());
    Ok(exps
        .as_slice()
        .iter()
        .zip(claimed.as_slice())
        .position(|(a, b)| a != b)
        .map(|i| i + 1))
}

/// Stable SHA-256 of a coefficient vector (decimal, comma separated).
pub fn digest(series: &TruncatedSeries) -> String {
    let text = series
        .coeffs()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub identity: String,
    pub order: usize,
    pub method: Method,
    #[serde(rename = "match")]
    pub matched: bool,
    pub first_mismatch: Option<usize>,
    pub sum_digest: String,
    pub product_digest: String,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Checks `spec` through `q^order`. A mismatch is reported, not an error.
///
/// Without a recursion family, [`Method::Recursion`] falls back to
/// enumeration and records a warning.
pub fn verify_identity(
    fixtures: &FixtureSet,
    spec: &IdentitySpec,
    order: usize,
    method: Method,
) -> Result<VerificationReport, VerifyError> {
    if order == 0 {
        return Err(VerifyError::ZeroOrder);
    }
    let start = Instant::now();
    let mut warnings = Vec::new();
    let mut method = method;
    if spec.recursion.is_none() && method != Method::Enumeration {
        warnings.push(format!(
            "{} has no recursion family; using enumeration",
            spec.name
        ));
        method = Method::Enumeration;
    }
    let enumerated = match method {
        Method::Enumeration | Method::Both => {
            if order > MAX_COUNT_ORDER {
                return Err(VerifyError::OrderTooLarge {
                    requested: order,
                    max: MAX_COUNT_ORDER,
                });
            }
            Some(count_sum_side(&spec.conditions, order))
        }
        Method::Recursion => None,
    };
    let recursed = match method {
        Method::Recursion | Method::Both => Some(fixtures.recursion_sum_side(spec, order)?),
        Method::Enumeration => None,
    };
    let product = product_side(spec, order);
    let first_mismatch = [recursed.as_ref(), enumerated.as_ref()]
        .into_iter()
        .flatten()
        .filter_map(|s| s.first_difference(&product))
        .min();
    let sum = recursed
        .or(enumerated)
        .expect("at least one sum side is computed");
    Ok(VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        identity: spec.name.clone(),
        order,
        method,
        matched: first_mismatch.is_none(),
        first_mismatch,
        sum_digest: digest(&sum),
        product_digest: digest(&product),
        elapsed_ms: start.elapsed().as_millis().to_u64().unwrap_or(u64::MAX),
        warnings,
    })
}

/// Verifies several identities in parallel; reports come back in input order.
pub fn verify_many(
    fixtures: &FixtureSet,
    specs: &[IdentitySpec],
    order: usize,
    method: Method,
) -> Result<Vec<VerificationReport>, VerifyError> {
    specs
        .par_iter()
        .map(|s| verify_identity(fixtures, s, order, method))
        .collect()
}
