use proptest::prelude::*;
use rrid_core::product::ShapeError;
use rrid_core::{
    describe, detect_period, symmetry_classify, ExponentSequence, ProductShape, Symmetry,
};

fn profiles() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-2i64..=2, 1..=12)
}

/// Shortest p with profile[i] = profile[i mod p], found by brute force.
fn primitive_period(profile: &[i64]) -> usize {
    (1..=profile.len())
        .find(|&p| {
            profile.len().is_multiple_of(p)
                && (0..profile.len()).all(|i| profile[i] == profile[i % p])
        })
        .unwrap()
}

proptest! {
    #[test]
    fn detects_the_primitive_period(profile in profiles(), repeats in 2usize..=5) {
        let order = profile.len() * repeats;
        let seq = ExponentSequence::periodic(&profile, order);
        let shape = detect_period(&seq, 64, 2).unwrap().unwrap();
        let p = primitive_period(&profile);
        prop_assert_eq!(shape.period(), p);
        prop_assert_eq!(shape.profile(), &profile[..p]);
        // any multiple of the period is also a period of the sequence
        let doubled = ExponentSequence::periodic(shape.profile(), order);
        prop_assert_eq!(doubled, seq);
    }

    #[test]
    fn period_is_bounded_by_threshold(profile in profiles(), repeats in 2usize..=4) {
        let order = profile.len() * repeats;
        let seq = ExponentSequence::periodic(&profile, order);
        let p = primitive_period(&profile);
        let found = detect_period(&seq, p.saturating_sub(1).max(1), 2).unwrap();
        if p > 1 {
            prop_assert!(found.is_none());
        } else {
            prop_assert!(found.is_some());
        }
    }

    #[test]
    fn symmetry_matches_residue_reflection(
        residues in prop::collection::btree_set(1usize..=12, 0..=12),
    ) {
        let residues: Vec<usize> = residues.into_iter().collect();
        let shape = ProductShape::from_residues(12, &residues);
        let reflected = residues
            .iter()
            .all(|&r| residues.contains(&if r == 12 { 12 } else { 12 - r }));
        let want = if reflected { Symmetry::Symmetric } else { Symmetry::Asymmetric };
        prop_assert_eq!(symmetry_classify(&shape).unwrap(), want);
    }
}

#[test]
fn window_too_short_is_an_error() {
    let seq = ExponentSequence::from_ints([1]);
    assert!(matches!(
        detect_period(&seq, 64, 2),
        Err(ShapeError::WindowTooShort { .. })
    ));
}

#[test]
fn residues_describe_the_congruence() {
    let shape = ProductShape::from_residues(9, &[2, 3, 6, 7]);
    assert_eq!(describe(&shape), "parts ≡ 2, 3, 6, 7 (mod 9)");
    assert_eq!(shape.residues(), vec![2, 3, 6, 7]);
    let non_binary = ProductShape::new(vec![1, 0, -1]);
    assert!(symmetry_classify(&non_binary).is_err());
}
