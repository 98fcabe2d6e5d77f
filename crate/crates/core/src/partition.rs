//! Partitions under configurable sum-side conditions.
//!
//! A [`ConditionSet`] bundles three kinds of local rules:
//!
//! - a smallest allowed part together with the maximum multiplicity of that
//!   part,
//! - difference-at-a-distance rules `lambda_j - lambda_{j+k} >= d`,
//! - `(A, B, C, D)` congruence rules: `lambda_j <= lambda_{j+A} + B` is only
//!   allowed when `lambda_j + ... + lambda_{j+A} = C (mod D)`.
//!
//! Every rule only looks at a bounded window of consecutive parts, so the
//! counter in this module memoizes on the last few generated parts and the
//! remaining sum instead of materializing partitions.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::series::TruncatedSeries;

/// Largest order accepted by the counting functions. Every count is bounded
/// by the unrestricted partition number `p(n)`, and `p(1000) < 2^105`, so the
/// `u128` accumulators cannot overflow below this order.
pub const MAX_COUNT_ORDER: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConditionError {
    #[error("smallest part must be at least 1")]
    ZeroMinPart,
    #[error("maximum multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("difference rule distance must be at least 1")]
    ZeroDistance,
    #[error("congruence rule span must be at least 1")]
    ZeroSpan,
    #[error("congruence modulus must be at least 2, got {0}")]
    SmallModulus(u32),
    #[error("congruence residue {residue} is not below modulus {modulus}")]
    ResidueOutOfRange { residue: u32, modulus: u32 },
    #[error("partition parts must be positive and non-increasing: {0:?}")]
    InvalidPartition(Vec<u32>),
    #[error("unsupported schema_version {0}")]
    SchemaVersion(u32),
    #[error("line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
}

impl From<serde_json::Error> for ConditionError {
    fn from(e: serde_json::Error) -> Self {
        ConditionError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// A non-increasing list of positive parts. The empty list is the null
/// partition of 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self, ConditionError> {
        let ordered = parts.windows(2).all(|w| w[0] >= w[1]);
        if !ordered || parts.contains(&0) {
            return Err(ConditionError::InvalidPartition(parts));
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn sum(&self) -> u64 {
        self.parts.iter().map(|&p| u64::from(p)).sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("()");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Maximum multiplicity of the smallest allowed part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "MultiplicityRepr", into = "MultiplicityRepr")]
pub enum Multiplicity {
    Bounded(u32),
    Unbounded,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MultiplicityRepr {
    Count(u32),
    Word(String),
}

impl TryFrom<MultiplicityRepr> for Multiplicity {
    type Error = String;

    fn try_from(r: MultiplicityRepr) -> Result<Self, String> {
        match r {
            MultiplicityRepr::Count(n) => Ok(Multiplicity::Bounded(n)),
            MultiplicityRepr::Word(w) if w == "unbounded" => Ok(Multiplicity::Unbounded),
            MultiplicityRepr::Word(w) => Err(format!(
                "max_mult must be an integer or \"unbounded\", got {w:?}"
            )),
        }
    }
}

impl From<Multiplicity> for MultiplicityRepr {
    fn from(m: Multiplicity) -> Self {
        match m {
            Multiplicity::Bounded(n) => MultiplicityRepr::Count(n),
            Multiplicity::Unbounded => MultiplicityRepr::Word("unbounded".into()),
        }
    }
}

impl Multiplicity {
    fn allows(self, count: u32) -> bool {
        match self {
            Multiplicity::Bounded(max) => count <= max,
            Multiplicity::Unbounded => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallestPartRule {
    pub min_part: u32,
    pub max_mult: Multiplicity,
}

impl SmallestPartRule {
    pub fn at_least(min_part: u32) -> Self {
        Self {
            min_part,
            max_mult: Multiplicity::Unbounded,
        }
    }

    pub fn with_max_mult(min_part: u32, max_mult: u32) -> Self {
        Self {
            min_part,
            max_mult: Multiplicity::Bounded(max_mult),
        }
    }

    /// `Smallest(1, unbounded)` restricts nothing.
    pub fn is_vacuous(&self) -> bool {
        self.min_part <= 1 && self.max_mult == Multiplicity::Unbounded
    }
}

/// `lambda_j - lambda_{j+distance} >= min_diff` for every valid `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffDistRule {
    pub distance: u32,
    pub min_diff: u32,
}

impl DiffDistRule {
    pub fn new(distance: u32, min_diff: u32) -> Self {
        Self { distance, min_diff }
    }
}

/// `lambda_j <= lambda_{j+span} + gap` only if
/// `lambda_j + ... + lambda_{j+span} = residue (mod modulus)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongruenceRule {
    pub span: u32,
    pub gap: i64,
    pub residue: u32,
    pub modulus: u32,
}

impl CongruenceRule {
    pub fn new(span: u32, gap: i64, residue: u32, modulus: u32) -> Self {
        Self {
            span,
            gap,
            residue,
            modulus,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smallest: Option<SmallestPartRule>,
    #[serde(default)]
    pub diffs: Vec<DiffDistRule>,
    #[serde(default)]
    pub congruences: Vec<CongruenceRule>,
}

/// On-disk form of a condition set, optionally tagged with a schema version.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionFile {
    #[serde(default)]
    schema_version: Option<u32>,
    #[serde(default)]
    smallest: Option<SmallestPartRule>,
    #[serde(default)]
    diffs: Vec<DiffDistRule>,
    #[serde(default)]
    congruences: Vec<CongruenceRule>,
}

impl ConditionSet {
    /// Unrestricted partitions.
    pub fn unrestricted() -> Self {
        Self::default()
    }

    pub fn with_smallest(mut self, rule: SmallestPartRule) -> Self {
        self.smallest = Some(rule);
        self
    }

    pub fn with_diff(mut self, rule: DiffDistRule) -> Self {
        self.diffs.push(rule);
        self
    }

    pub fn with_congruence(mut self, rule: CongruenceRule) -> Self {
        self.congruences.push(rule);
        self
    }

    pub fn validate(&self) -> Result<(), ConditionError> {
        if let Some(s) = &self.smallest {
            if s.min_part == 0 {
                return Err(ConditionError::ZeroMinPart);
            }
            if s.max_mult == Multiplicity::Bounded(0) {
                return Err(ConditionError::ZeroMultiplicity);
            }
        }
        if self.diffs.iter().any(|d| d.distance == 0) {
            return Err(ConditionError::ZeroDistance);
        }
        for c in &self.congruences {
            if c.span == 0 {
                return Err(ConditionError::ZeroSpan);
            }
            if c.modulus < 2 {
                return Err(ConditionError::SmallModulus(c.modulus));
            }
            if c.residue >= c.modulus {
                return Err(ConditionError::ResidueOutOfRange {
                    residue: c.residue,
                    modulus: c.modulus,
                });
            }
        }
        Ok(())
    }

    /// Reads and validates a condition set from JSON.
    pub fn from_json(text: &str) -> Result<Self, ConditionError> {
        let file: ConditionFile = serde_json::from_str(text)?;
        if let Some(v) = file.schema_version {
            if v != 1 {
                return Err(ConditionError::SchemaVersion(v));
            }
        }
        let set = ConditionSet {
            smallest: file.smallest,
            diffs: file.diffs,
            congruences: file.congruences,
        };
        set.validate()?;
        Ok(set)
    }

    /// Order-insensitive normal form: rules sorted and deduplicated, a
    /// vacuous smallest-part rule dropped.
    pub fn canonical(&self) -> Self {
        let mut out = self.clone();
        if out.smallest.is_some_and(|s| s.is_vacuous()) {
            out.smallest = None;
        }
        out.diffs.sort();
        out.diffs.dedup();
        out.congruences.sort();
        out.congruences.dedup();
        out
    }

    /// Compact JSON of the canonical form; equal strings mean equal conditions.
    pub fn canonical_key(&self) -> String {
        serde_json::to_string(&self.canonical()).expect("condition sets always serialize")
    }

    fn min_part(&self) -> u32 {
        self.smallest.map_or(1, |s| s.min_part.max(1))
    }

    /// Number of trailing parts a new part has to be checked against.
    fn window(&self) -> usize {
        let diff = self.diffs.iter().map(|d| d.distance).max().unwrap_or(0);
        let cong = self.congruences.iter().map(|c| c.span).max().unwrap_or(0);
        diff.max(cong).max(1) as usize
    }

    /// Checks the difference and congruence rules that end at a new part `x`
    /// appended after `tail` (most recent part last). `tail` must hold at
    /// least the last [`Self::window`] parts of the partition so far.
    fn accepts_next(&self, tail: &[u32], x: u32) -> bool {
        let len = tail.len();
        for d in &self.diffs {
            let k = d.distance as usize;
            if len >= k && tail[len - k] < x + d.min_diff {
                return false;
            }
        }
        for c in &self.congruences {
            let a = c.span as usize;
            if len < a {
                continue;
            }
            let first = i64::from(tail[len - a]);
            if first <= i64::from(x) + c.gap {
                let sum: u64 =
                    tail[len - a..].iter().map(|&p| u64::from(p)).sum::<u64>() + u64::from(x);
                if sum % u64::from(c.modulus) != u64::from(c.residue) {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for ConditionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items = Vec::new();
        if let Some(s) = &self.smallest {
            match s.max_mult {
                Multiplicity::Unbounded => items.push(format!("Smallest({})", s.min_part)),
                Multiplicity::Bounded(m) => {
                    items.push(format!("Smallest({}, max_mult {m})", s.min_part))
                }
            }
        }
        for d in &self.diffs {
            items.push(format!("DiffDist({},{})", d.distance, d.min_diff));
        }
        for c in &self.congruences {
            items.push(format!(
                "Congruence({},{},{},{})",
                c.span, c.gap, c.residue, c.modulus
            ));
        }
        if items.is_empty() {
            f.write_str("unrestricted")
        } else {
            f.write_str(&items.join(" + "))
        }
    }
}

/// Whether `p` satisfies every rule of `c`, checked directly on the whole
/// partition.
pub fn satisfies(p: &Partition, c: &ConditionSet) -> bool {
    let parts = p.parts();
    let m = parts.len();
    if let Some(s) = &c.smallest {
        if parts.iter().any(|&x| x < s.min_part) {
            return false;
        }
        let copies = parts.iter().filter(|&&x| x == s.min_part).count();
        if !s.max_mult.allows(copies as u32) {
            return false;
        }
    }
    for d in &c.diffs {
        let k = d.distance as usize;
        if (0..m.saturating_sub(k)).any(|j| parts[j] < parts[j + k] + d.min_diff) {
            return false;
        }
    }
    for r in &c.congruences {
        let a = r.span as usize;
        for j in 0..m.saturating_sub(a) {
            if i64::from(parts[j]) <= i64::from(parts[j + a]) + r.gap {
                let sum: u64 = parts[j..=j + a].iter().map(|&x| u64::from(x)).sum();
                if sum % u64::from(r.modulus) != u64::from(r.residue) {
                    return false;
                }
            }
        }
    }
    true
}

/// `1 + sum_{n=1}^N b_n q^n` where `b_n` counts partitions of `n` satisfying `c`.
///
/// # Panics
/// If `order > MAX_COUNT_ORDER`.
pub fn count_sum_side(c: &ConditionSet, order: usize) -> TruncatedSeries {
    Counter::new(c, order, order, None).run()
}

/// Like [`count_sum_side`] with the largest part at most `cap`.
///
/// # Panics
/// If `order > MAX_COUNT_ORDER`.
pub fn count_with_cap(c: &ConditionSet, order: usize, cap: usize) -> TruncatedSeries {
    Counter::new(c, order, cap, None).run()
}

/// Like [`count_with_cap`], additionally allowing at most `max_top` parts
/// equal to `cap`.
///
/// # Panics
/// If `order > MAX_COUNT_ORDER`.
pub fn count_with_top_mult(
    c: &ConditionSet,
    order: usize,
    cap: usize,
    max_top: u32,
) -> TruncatedSeries {
    Counter::new(c, order, cap, Some(max_top)).run()
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    /// Last few parts, most recent last.
    tail: Vec<u32>,
    /// Copies of the smallest allowed part so far (only tracked once reached).
    min_copies: u32,
    /// Copies of the cap so far (only tracked while the run of caps continues).
    top_copies: u32,
}

struct Counter<'a> {
    cond: &'a ConditionSet,
    order: usize,
    cap: u32,
    max_top: Option<u32>,
    min_part: u32,
    window: usize,
    /// Per state, completion counts indexed by the exact remaining sum.
    memo: HashMap<State, Vec<Option<u128>>>,
}

impl<'a> Counter<'a> {
    fn new(cond: &'a ConditionSet, order: usize, cap: usize, max_top: Option<u32>) -> Self {
        assert!(
            order <= MAX_COUNT_ORDER,
            "counting order {order} exceeds MAX_COUNT_ORDER ({MAX_COUNT_ORDER})"
        );
        Self {
            cond,
            order,
            cap: cap.min(order) as u32,
            max_top,
            min_part: cond.min_part(),
            window: cond.window(),
            memo: HashMap::new(),
        }
    }

    fn run(mut self) -> TruncatedSeries {
        let root = State {
            tail: Vec::new(),
            min_copies: 0,
            top_copies: 0,
        };
        let counts: Vec<BigInt> = (0..=self.order)
            .map(|n| BigInt::from(self.completions(&root, n)))
            .collect();
        TruncatedSeries::new(counts)
    }

    /// Number of ways to extend a partition ending in `state` by parts
    /// summing to exactly `remaining`.
    fn completions(&mut self, state: &State, remaining: usize) -> u128 {
        if remaining == 0 {
            return 1;
        }
        if let Some(Some(v)) = self.memo.get(state).map(|row| row[remaining]) {
            return v;
        }
        let hi = state
            .tail
            .last()
            .copied()
            .unwrap_or(self.cap)
            .min(remaining as u32);
        let mut total = 0u128;
        for x in self.min_part..=hi {
            if let Some(next) = self.child(state, x) {
                total += self.completions(&next, remaining - x as usize);
            }
        }
        let order = self.order;
        self.memo
            .entry(state.clone())
            .or_insert_with(|| vec![None; order + 1])[remaining] = Some(total);
        total
    }

    fn child(&self, state: &State, x: u32) -> Option<State> {
        if !self.cond.accepts_next(&state.tail, x) {
            return None;
        }
        let min_copies = if x == self.min_part {
            let copies = state.min_copies + 1;
            if let Some(s) = &self.cond.smallest {
                if !s.max_mult.allows(copies) {
                    return None;
                }
            }
            copies
        } else {
            0
        };
        let top_copies = if x == self.cap {
            let copies = state.top_copies + 1;
            if self.max_top.is_some_and(|m| copies > m) {
                return None;
            }
            copies
        } else {
            0
        };
        let mut tail = state.tail.clone();
        tail.push(x);
        if tail.len() > self.window {
            tail.remove(0);
        }
        Some(State {
            tail,
            min_copies,
            top_copies,
        })
    }
}

/// All partitions of `n` satisfying `c`, in lexicographically decreasing order.
pub fn enumerate_sum_side(c: &ConditionSet, n: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut parts = Vec::new();
    let min_part = c.min_part();
    let window = c.window();
    descend(c, n, n, min_part, window, &mut parts, &mut out);
    out
}

fn descend(
    c: &ConditionSet,
    remaining: u32,
    max_next: u32,
    min_part: u32,
    window: usize,
    parts: &mut Vec<u32>,
    out: &mut Vec<Partition>,
) {
    if remaining == 0 {
        let p = Partition {
            parts: parts.clone(),
        };
        // the smallest-part multiplicity is only known once the list is complete
        if c.smallest.is_none_or(|s| {
            s.max_mult
                .allows(parts.iter().filter(|&&x| x == s.min_part).count() as u32)
        }) {
            out.push(p);
        }
        return;
    }
    for x in (min_part..=max_next.min(remaining)).rev() {
        let tail = &parts[parts.len().saturating_sub(window)..];
        if !c.accepts_next(tail, x) {
            continue;
        }
        parts.push(x);
        descend(c, remaining - x, x, min_part, window, parts, out);
        parts.pop();
    }
}
