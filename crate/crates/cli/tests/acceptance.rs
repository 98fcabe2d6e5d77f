//! Acceptance suite: one PASS/FAIL line per criterion, exact integer
//! comparisons throughout. Exits non-zero if any criterion fails.

#[path = "../../core/tests/support/brute.rs"]
mod brute;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rrid_core::verifier::{Family, FixtureSet, IdentitySpec, RecursionState};
use rrid_core::{
    count_sum_side, count_with_cap, count_with_top_mult, euler_factorize, expand_product,
    prefix_stability_check, product_side, verify_identity, ConditionSet, DiffDistRule,
    ExponentSequence, Method, SmallestPartRule, TruncatedSeries,
};

/// Exact equality everywhere; no coefficient may differ by any amount.
const COEFF_TOLERANCE: u32 = 0;

const RR_ORDER: usize = 100;
const RR_LIMIT: Duration = Duration::from_secs(5);
const SEARCH_ORDER: usize = 30;
const SEARCH_LIMIT: Duration = Duration::from_secs(30);
const VERIFY_ORDER: usize = 500;
const VERIFY_LIMIT: Duration = Duration::from_secs(60);
const MAX_CAP: usize = 25;
const CAP_ORDER: usize = 100;
const BRUTE_ORDER: u32 = 20;
const ROUND_TRIPS: usize = 1000;
const ROUND_TRIP_MAX_ORDER: usize = 64;
const EXP_RANGE: i64 = 3;
const PREFIX_SERIES: usize = 100;
const PREFIX_MAX_ORDER: usize = 40;
const JOBS: [&str; 3] = ["1", "2", "8"];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixtures() -> &'static FixtureSet {
    FixtureSet::builtin()
}

fn exact(a: &TruncatedSeries, b: &TruncatedSeries) -> Option<usize> {
    debug_assert_eq!(COEFF_TOLERANCE, 0);
    a.first_difference(b)
}

fn timed(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took < limit {
        Ok(format!(
            "{detail}, {:.2}s < {}s",
            took.as_secs_f64(),
            limit.as_secs()
        ))
    } else {
        Err(format!(
            "{detail}, but took {:.2}s (limit {}s)",
            took.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn rogers_ramanujan() -> Outcome {
    let start = Instant::now();
    let rr = ConditionSet::unrestricted().with_diff(DiffDistRule::new(1, 2));
    let second = rr.clone().with_smallest(SmallestPartRule::at_least(2));
    for (set, residues) in [(&rr, [1, 4]), (&second, [2, 3])] {
        let a = euler_factorize(&count_sum_side(set, RR_ORDER)).map_err(|e| e.to_string())?;
        for m in 1..=RR_ORDER {
            let want = BigInt::from(u8::from(residues.contains(&(m % 5))));
            if a.get(m) != Some(&want) {
                return Err(format!("{set}: a_{m} = {:?}, expected {want}", a.get(m)));
            }
        }
    }
    timed(
        RR_LIMIT,
        start,
        format!("a_m exact for m <= {RR_ORDER}, residues {{1,4}} and {{2,3}} mod 5"),
    )
}

fn search_scale() -> Outcome {
    let start = Instant::now();
    for spec in fixtures().identities() {
        let sum = count_sum_side(&spec.conditions, SEARCH_ORDER);
        let product = product_side(spec, SEARCH_ORDER);
        if let Some(k) = exact(&sum, &product) {
            return Err(format!("{}: sum and product differ at q^{k}", spec.name));
        }
    }
    timed(
        SEARCH_LIMIT,
        start,
        format!("I1-I6 sum = product through q^{SEARCH_ORDER}"),
    )
}

fn verification_scale() -> Outcome {
    let start = Instant::now();
    for spec in fixtures().identities() {
        let report = verify_identity(fixtures(), spec, VERIFY_ORDER, Method::Recursion)
            .map_err(|e| e.to_string())?;
        if !report.matched {
            return Err(format!(
                "{}: mismatch at q^{:?}",
                spec.name, report.first_mismatch
            ));
        }
    }
    timed(
        VERIFY_LIMIT,
        start,
        format!("I1-I6 verified by recursion through q^{VERIFY_ORDER}"),
    )
}

/// Oracle polynomial for register `register` of cap `index`.
fn capped_oracle(
    spec: &IdentitySpec,
    index: usize,
    register: usize,
    order: usize,
) -> TruncatedSeries {
    match (spec.recursion_family(), register) {
        (Some(Family::R | Family::S), 1) => count_with_top_mult(&spec.conditions, order, index, 1),
        _ => count_with_cap(&spec.conditions, order, index),
    }
}

fn printed_polynomials() -> Outcome {
    const ORDER: usize = 40;
    let mut checked = 0;
    let mut errata = Vec::new();
    for spec in fixtures().identities() {
        let seed = spec
            .recursion
            .as_ref()
            .ok_or(format!("{} has no recursion", spec.name))?;
        for ic in &seed.initial {
            let oracle = capped_oracle(spec, ic.index, ic.register, ORDER);
            let stored =
                TruncatedSeries::parse_polynomial(&ic.poly, ORDER).map_err(|e| e.to_string())?;
            if let Some(k) = exact(&stored, &oracle) {
                return Err(format!(
                    "{} index {} register {}: fixture differs at q^{k}",
                    spec.name, ic.index, ic.register
                ));
            }
            let printed_text = ic.printed.as_deref().unwrap_or(&ic.poly);
            let printed = TruncatedSeries::parse_polynomial(printed_text, ORDER)
                .map_err(|e| e.to_string())?;
            if exact(&printed, &oracle).is_some() {
                errata.push(format!(
                    "{} index {} register {}: printed {printed_text}, enumeration gives {oracle}",
                    spec.name, ic.index, ic.register
                ));
            }
            checked += 1;
        }
    }
    if errata.is_empty() {
        Ok(format!(
            "{checked} printed polynomials equal capped enumeration"
        ))
    } else {
        Err(format!(
            "{} of {checked} printed polynomials differ from capped enumeration: {}",
            errata.len(),
            errata.join("; ")
        ))
    }
}

fn oracle_equivalence() -> Outcome {
    let mut compared = 0;
    for spec in fixtures().identities() {
        let mut st: RecursionState = fixtures()
            .initial_state(spec, CAP_ORDER)
            .map_err(|e| e.to_string())?;
        let registers = match spec.recursion_family() {
            Some(Family::R | Family::S) => vec![1, 2],
            _ => vec![1],
        };
        let mut seen = std::collections::BTreeSet::new();
        loop {
            for k in st.live_indices().into_iter().filter(|&k| seen.insert(k)) {
                for &a in &registers {
                    let built = st.register(k, a).ok_or("missing register")?;
                    let oracle = capped_oracle(spec, k, a, CAP_ORDER);
                    if let Some(d) = exact(built, &oracle) {
                        return Err(format!(
                            "{} cap {k} register {a}: differs at q^{d}",
                            spec.name
                        ));
                    }
                    // small orders are also checked against exhaustive generation
                    let brute_counts = brute::counts(
                        &spec.conditions,
                        BRUTE_ORDER,
                        Some(k as u32),
                        (registers.len() == 2 && a == 1).then_some(1),
                    );
                    let head = TruncatedSeries::from_coeffs(brute_counts, BRUTE_ORDER as usize);
                    if let Some(d) = exact(&built.truncate(BRUTE_ORDER as usize), &head) {
                        return Err(format!(
                            "{} cap {k} register {a}: brute force differs at q^{d}",
                            spec.name
                        ));
                    }
                    compared += 1;
                }
            }
            if st.index() >= MAX_CAP {
                break;
            }
            st.step().map_err(|e| e.to_string())?;
        }
    }
    Ok(format!("{compared} recursion polynomials (caps <= {MAX_CAP}) equal capped enumeration through q^{CAP_ORDER}"))
}

fn round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xacce_0006);
    for trial in 0..ROUND_TRIPS {
        let order = rng.gen_range(1..=ROUND_TRIP_MAX_ORDER);
        let a =
            ExponentSequence::from_ints((0..order).map(|_| rng.gen_range(-EXP_RANGE..=EXP_RANGE)));
        let back = euler_factorize(&expand_product(&a)).map_err(|e| e.to_string())?;
        if back != a {
            return Err(format!("trial {trial}: round trip changed {a:?}"));
        }
    }
    Ok(format!("{ROUND_TRIPS} random exponent sequences (order <= {ROUND_TRIP_MAX_ORDER}, entries in [-{EXP_RANGE},{EXP_RANGE}]) round-trip"))
}

fn prefix_stability() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xacce_0007);
    let mut checks = 0;
    for trial in 0..PREFIX_SERIES {
        let order = rng.gen_range(1..=PREFIX_MAX_ORDER);
        let coeffs = std::iter::once(1i64).chain((0..order).map(|_| rng.gen_range(-1000..=1000)));
        let b = TruncatedSeries::from_coeffs(coeffs, order);
        for k in 1..=order {
            if !prefix_stability_check(&b, k).map_err(|e| e.to_string())? {
                return Err(format!("trial {trial}: prefix {k} disagrees"));
            }
            checks += 1;
        }
    }
    Ok(format!(
        "{PREFIX_SERIES} random series, {checks} prefixes stable"
    ))
}

fn determinism() -> Outcome {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/classics.json");
    let run = |jobs: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_rrid"))
            .args(["search", "--config", config, "--jobs", jobs])
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("search --jobs {jobs} exited with {}", out.status));
        }
        Ok(out.stdout)
    };
    let reference = run(JOBS[0])?;
    for jobs in JOBS.iter().chain(JOBS.iter()) {
        if run(jobs)? != reference {
            return Err(format!("report with --jobs {jobs} differs"));
        }
    }
    Ok(format!(
        "{} runs across --jobs {} byte-identical ({} bytes)",
        2 * JOBS.len() + 1,
        JOBS.join("/"),
        reference.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("Rogers-Ramanujan rediscovery", rogers_ramanujan),
        ("I1-I6 at search scale", search_scale),
        ("I1-I6 at verification scale", verification_scale),
        ("printed polynomials reproduced", printed_polynomials),
        ("recursion vs capped enumeration", oracle_equivalence),
        ("factor/expand round trip", round_trip),
        ("prefix stability", prefix_stability),
        ("search determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
