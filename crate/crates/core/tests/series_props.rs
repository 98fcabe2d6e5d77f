use num_bigint::BigInt;
use proptest::prelude::*;
use rrid_core::series::parse_coefficients;
use rrid_core::{
    euler_factorize, expand_product, prefix_stability_check, series_mul, ExponentSequence,
    TruncatedSeries,
};

fn exponents() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, 1..=64)
}

fn unit_series() -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec(-50i64..=50, 1..=40).prop_map(|tail| {
        let order = tail.len();
        TruncatedSeries::from_coeffs(std::iter::once(1).chain(tail), order)
    })
}

/// `prod (1 - q^m)^(-a_m)` by repeated multiplication with plain integer
/// arithmetic: each factor is a geometric series or a binomial.
fn naive_product(a: &[i64]) -> Vec<i64> {
    let n = a.len();
    let mut out = vec![0i64; n + 1];
    out[0] = 1;
    for (i, &e) in a.iter().enumerate() {
        let m = i + 1;
        for _ in 0..e.max(0) {
            // divide by (1 - q^m)
            for k in m..=n {
                out[k] += out[k - m];
            }
        }
        for _ in 0..(-e).max(0) {
            // multiply by (1 - q^m)
            for k in (m..=n).rev() {
                out[k] -= out[k - m];
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn factor_inverts_expand(a in exponents()) {
        let seq = ExponentSequence::from_ints(a.clone());
        let back = euler_factorize(&expand_product(&seq)).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn expand_matches_repeated_multiplication(a in prop::collection::vec(-3i64..=3, 1..=30)) {
        let got = expand_product(&ExponentSequence::from_ints(a.clone()));
        let want = TruncatedSeries::from_coeffs(naive_product(&a), a.len());
        prop_assert_eq!(got, want);
    }

    #[test]
    fn prefixes_are_stable(b in unit_series()) {
        for k in 1..=b.order() {
            prop_assert!(prefix_stability_check(&b, k).unwrap());
        }
    }

    #[test]
    fn changing_b_n_changes_only_a_n_linearly(b in unit_series(), delta in 1i64..=20) {
        let n = b.order();
        let base = euler_factorize(&b).unwrap();
        let mut bumped = b.coeffs().to_vec();
        bumped[n] += BigInt::from(delta);
        let moved = euler_factorize(&TruncatedSeries::new(bumped)).unwrap();
        prop_assert_eq!(&moved.as_slice()[..n - 1], &base.as_slice()[..n - 1]);
        prop_assert_eq!(moved.get(n).unwrap() - base.get(n).unwrap(), BigInt::from(delta));
    }

    #[test]
    fn product_factors_add_exponents(a in exponents(), b in exponents()) {
        let n = a.len().min(b.len());
        let fa = expand_product(&ExponentSequence::from_ints(a[..n].to_vec()));
        let fb = expand_product(&ExponentSequence::from_ints(b[..n].to_vec()));
        let sum: Vec<i64> = a[..n].iter().zip(&b[..n]).map(|(x, y)| x + y).collect();
        prop_assert_eq!(
            euler_factorize(&series_mul(&fa, &fb)).unwrap(),
            ExponentSequence::from_ints(sum)
        );
    }

    #[test]
    fn coefficient_files_round_trip(b in unit_series()) {
        let lines: Vec<String> = b.coeffs().iter().map(|c| c.to_string()).collect();
        let parsed = parse_coefficients(&lines.join("\n")).unwrap();
        prop_assert_eq!(parsed.as_slice(), b.coeffs());
        let json = format!("[{}]", lines.join(", "));
        let parsed = parse_coefficients(&json).unwrap();
        prop_assert_eq!(parsed.as_slice(), b.coeffs());
    }
}

#[test]
fn non_unit_constant_is_rejected() {
    let b = TruncatedSeries::from_coeffs([2, 1, 1], 2);
    assert!(euler_factorize(&b).is_err());
}

#[test]
fn display_round_trips_through_parser() {
    let s = TruncatedSeries::from_coeffs([1, -1, 0, 3, 0, -12], 5);
    let text = s.to_string();
    assert_eq!(TruncatedSeries::parse_polynomial(&text, 5).unwrap(), s);
}
