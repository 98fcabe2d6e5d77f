//! Grid-driven candidate search.
//!
//! A grid config lists blocks of smallest-part options, difference-rule
//! combinations and congruence-rule combinations. Every block contributes
//! its cartesian product of condition sets; duplicates (by canonical form)
//! are dropped before anything runs. Each remaining cell goes through
//! count -> factor -> period detection, and periodic cells are reported in
//! grid order regardless of how many workers ran them.

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::partition::{
    count_sum_side, ConditionError, ConditionSet, CongruenceRule, DiffDistRule, Multiplicity,
    SmallestPartRule, MAX_COUNT_ORDER,
};
use crate::product::{
    describe, detect_period, symmetry_classify, ProductShape, Symmetry, DEFAULT_MIN_REPEATS,
    DEFAULT_P_MAX,
};
use crate::series::euler_factorize;

pub const GRID_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_ORDER: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version {0} (expected {GRID_SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("grid is empty")]
    EmptyGrid,
    #[error("order must be between 1 and {MAX_COUNT_ORDER}, got {0}")]
    Order(usize),
    #[error("refine order {refine} must exceed the search order {order}")]
    RefineOrder { refine: usize, order: usize },
    #[error("grid block {block}: {source}")]
    Condition {
        block: usize,
        source: ConditionError,
    },
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

/// One entry of a block's `smallest` list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SmallestOption {
    None(()),
    Rule(SmallestPartRule),
    Sweep(SmallestSweep),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallestSweep {
    pub min_part: Vec<u32>,
    #[serde(default = "unbounded_only")]
    pub max_mult: Vec<Multiplicity>,
}

fn unbounded_only() -> Vec<Multiplicity> {
    vec![Multiplicity::Unbounded]
}

/// One entry of a block's `diffs` list: an explicit combination of rules, or
/// a sweep producing one single-rule combination per parameter pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiffOption {
    Combination(Vec<DiffDistRule>),
    Sweep(DiffSweep),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffSweep {
    pub distance: Vec<u32>,
    pub min_diff: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CongruenceOption {
    Combination(Vec<CongruenceRule>),
    Sweep(CongruenceSweep),
}

/// Omitting `residue` sweeps every residue below each modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongruenceSweep {
    pub span: Vec<u32>,
    pub gap: Vec<i64>,
    #[serde(default)]
    pub residue: Option<Vec<u32>>,
    pub modulus: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default)]
    pub smallest: Vec<SmallestOption>,
    #[serde(default)]
    pub diffs: Vec<DiffOption>,
    #[serde(default)]
    pub congruences: Vec<CongruenceOption>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchGrid {
    pub schema_version: u32,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    #[serde(default = "default_min_repeats")]
    pub min_repeats: usize,
    /// Re-run hits at this higher order and keep only those still periodic.
    #[serde(default)]
    pub refine: Option<usize>,
    pub grids: Vec<GridBlock>,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_p_max() -> usize {
    DEFAULT_P_MAX
}

fn default_min_repeats() -> usize {
    DEFAULT_MIN_REPEATS
}

impl SearchGrid {
    pub fn from_json(text: &str) -> Result<Self, SearchError> {
        let grid: SearchGrid = serde_json::from_str(text).map_err(|e| SearchError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.schema_version != GRID_SCHEMA_VERSION {
            return Err(SearchError::SchemaVersion(self.schema_version));
        }
        if self.order == 0 || self.order > MAX_COUNT_ORDER {
            return Err(SearchError::Order(self.order));
        }
        if let Some(refine) = self.refine {
            if refine <= self.order || refine > MAX_COUNT_ORDER {
                return Err(SearchError::RefineOrder {
                    refine,
                    order: self.order,
                });
            }
        }
        self.cells()?;
        Ok(())
    }

    /// Size of the raw cartesian product, before deduplication.
    pub fn raw_size(&self) -> usize {
        self.grids
            .iter()
            .map(|b| {
                let s = expand_smallest(&b.smallest).len();
                let d = expand_diffs(&b.diffs).len();
                let c = expand_congruences(&b.congruences).len();
                s * d * c
            })
            .sum()
    }

    /// Distinct condition sets in grid order (first occurrence wins).
    pub fn cells(&self) -> Result<Vec<ConditionSet>, SearchError> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (block_idx, block) in self.grids.iter().enumerate() {
            let smallest = expand_smallest(&block.smallest);
            let diffs = expand_diffs(&block.diffs);
            let congruences = expand_congruences(&block.congruences);
            for s in &smallest {
                for d in &diffs {
                    for c in &congruences {
                        let set = ConditionSet {
                            smallest: *s,
                            diffs: d.clone(),
                            congruences: c.clone(),
                        };
                        set.validate().map_err(|source| SearchError::Condition {
                            block: block_idx,
                            source,
                        })?;
                        if seen.insert(set.canonical_key()) {
                            out.push(set);
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(SearchError::EmptyGrid);
        }
        Ok(out)
    }
}

fn expand_smallest(options: &[SmallestOption]) -> Vec<Option<SmallestPartRule>> {
    if options.is_empty() {
        return vec![None];
    }
    let mut out = Vec::new();
    for opt in options {
        match opt {
            SmallestOption::None(()) => out.push(None),
            SmallestOption::Rule(r) => out.push(Some(*r)),
            SmallestOption::Sweep(sw) => {
                for &min_part in &sw.min_part {
                    for &max_mult in &sw.max_mult {
                        out.push(Some(SmallestPartRule { min_part, max_mult }));
                    }
                }
            }
        }
    }
    out
}

fn expand_diffs(options: &[DiffOption]) -> Vec<Vec<DiffDistRule>> {
    if options.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for opt in options {
        match opt {
            DiffOption::Combination(rules) => out.push(rules.clone()),
            DiffOption::Sweep(sw) => {
                for &distance in &sw.distance {
                    for &min_diff in &sw.min_diff {
                        out.push(vec![DiffDistRule { distance, min_diff }]);
                    }
                }
            }
        }
    }
    out
}

fn expand_congruences(options: &[CongruenceOption]) -> Vec<Vec<CongruenceRule>> {
    if options.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for opt in options {
        match opt {
            CongruenceOption::Combination(rules) => out.push(rules.clone()),
            CongruenceOption::Sweep(sw) => {
                for &span in &sw.span {
                    for &gap in &sw.gap {
                        for &modulus in &sw.modulus {
                            let residues: Vec<u32> = match &sw.residue {
                                Some(r) => r.iter().copied().filter(|&r| r < modulus).collect(),
                                None => (0..modulus).collect(),
                            };
                            for residue in residues {
                                out.push(vec![CongruenceRule {
                                    span,
                                    gap,
                                    residue,
                                    modulus,
                                }]);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// One report entry: a condition set whose exponents are periodic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateHit {
    pub conditions: ConditionSet,
    pub period: usize,
    pub residues: Vec<usize>,
    pub profile: Vec<i64>,
    pub symmetric: Option<bool>,
    pub order_checked: usize,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFailure {
    pub conditions: ConditionSet,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub schema_version: u32,
    pub order: usize,
    pub p_max: usize,
    pub min_repeats: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_order: Option<usize>,
    pub grid_size: usize,
    pub cells: usize,
    /// Exponent sequences are only tested for pure periodicity (no preperiod).
    pub periodicity: String,
    pub hits: Vec<CandidateHit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refine_rejected: Vec<ConditionSet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<CellFailure>,
    /// Only filled in on request, so reports stay byte-identical across runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

enum CellOutcome {
    Hit(CandidateHit),
    RefineRejected(ConditionSet),
    Miss,
    Failed(CellFailure),
}

/// Factors the sum side of `conditions` at `order` and looks for a period.
pub fn analyze_cell(
    conditions: &ConditionSet,
    order: usize,
    p_max: usize,
    min_repeats: usize,
) -> Result<Option<ProductShape>, String> {
    let sum = count_sum_side(conditions, order);
    let exps = euler_factorize(&sum).map_err(|e| e.to_string())?;
    detect_period(&exps, p_max, min_repeats).map_err(|e| e.to_string())
}

fn hit(conditions: &ConditionSet, shape: ProductShape, order: usize) -> CandidateHit {
    let symmetric = symmetry_classify(&shape)
        .ok()
        .map(|s| s == Symmetry::Symmetric);
    CandidateHit {
        conditions: conditions.clone(),
        period: shape.period(),
        residues: if shape.is_binary() {
            shape.residues()
        } else {
            Vec::new()
        },
        profile: shape.profile().to_vec(),
        symmetric,
        order_checked: order,
        description: describe(&shape),
    }
}

fn run_cell(grid: &SearchGrid, conditions: &ConditionSet) -> CellOutcome {
    let fail = |error: String| {
        CellOutcome::Failed(CellFailure {
            conditions: conditions.clone(),
            error,
        })
    };
    match analyze_cell(conditions, grid.order, grid.p_max, grid.min_repeats) {
        Err(e) => fail(e),
        Ok(None) => CellOutcome::Miss,
        Ok(Some(shape)) => match grid.refine {
            None => CellOutcome::Hit(hit(conditions, shape, grid.order)),
            Some(refine) => match analyze_cell(conditions, refine, grid.p_max, grid.min_repeats) {
                Err(e) => fail(e),
                Ok(None) => CellOutcome::RefineRejected(conditions.clone()),
                Ok(Some(shape)) => CellOutcome::Hit(hit(conditions, shape, refine)),
            },
        },
    }
}

/// Runs every cell of `grid` on `jobs` workers (0 = rayon default).
pub fn run_search(
    grid: &SearchGrid,
    jobs: usize,
    record_time: bool,
) -> Result<CandidateReport, SearchError> {
    let start = Instant::now();
    grid.validate()?;
    let cells = grid.cells()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SearchError::Pool(e.to_string()))?;
    let outcomes: Vec<CellOutcome> =
        pool.install(|| cells.par_iter().map(|c| run_cell(grid, c)).collect());
    let mut report = CandidateReport {
        schema_version: REPORT_SCHEMA_VERSION,
        order: grid.order,
        p_max: grid.p_max,
        min_repeats: grid.min_repeats,
        refine_order: grid.refine,
        grid_size: grid.raw_size(),
        cells: cells.len(),
        periodicity: "pure".into(),
        hits: Vec::new(),
        refine_rejected: Vec::new(),
        failures: Vec::new(),
        wall_ms: None,
    };
    for outcome in outcomes {
        match outcome {
            CellOutcome::Hit(h) => report.hits.push(h),
            CellOutcome::RefineRejected(c) => report.refine_rejected.push(c),
            CellOutcome::Failed(f) => report.failures.push(f),
            CellOutcome::Miss => {}
        }
    }
    if record_time {
        report.wall_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}
