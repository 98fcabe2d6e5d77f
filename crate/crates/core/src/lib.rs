//! Search and verification engine for partition identities of
//! Rogers-Ramanujan type.
//!
//! The pipeline is: count partitions under a [`ConditionSet`] to get a
//! truncated sum side, factor it into `prod (1 - q^m)^(-a_m)` with
//! [`euler_factorize`], and look for a short period in the exponents with
//! [`detect_period`]. Promising candidates are then checked to high order
//! with the capped-polynomial recursions in [`verifier`].

pub mod partition;
pub mod product;
pub mod search;
pub mod series;
pub mod verifier;

pub use partition::{
    count_sum_side, count_with_cap, count_with_top_mult, enumerate_sum_side, satisfies,
    ConditionSet, CongruenceRule, DiffDistRule, Multiplicity, Partition, SmallestPartRule,
};
pub use product::{describe, detect_period, symmetry_classify, ProductShape, Symmetry};
pub use series::{
    euler_factorize, expand_product, prefix_stability_check, series_mul, ExponentSequence,
    TruncatedSeries,
};
pub use verifier::{product_side, verify_identity, FixtureSet, IdentitySpec, Method};
