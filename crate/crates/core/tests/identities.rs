mod common;

use common::{rng, space, space_with, RandomTriple};
use hdg_core::analysis::energy_identity_rhs;
use hdg_core::hdg::{b1_apply, b2_apply, FieldTriple, StabilizationConfig, Tau1Rule};
use hdg_core::problems::{example1, example2};
use proptest::prelude::*;

fn energy_gap(n: usize, k: usize, second_beta: bool, seed: u64) -> (f64, f64) {
    let problem = if second_beta { example2() } else { example1() };
    let space = space(n, k, &problem);
    let t = RandomTriple::new(&space, &mut rng(seed));
    let b1 = b1_apply(&space, t.as_triple(), t.as_triple()).unwrap();
    let e1 = energy_identity_rhs(&space, false, &t.flux, &t.scalar, &t.trace);
    let b2 = b2_apply(&space, t.as_triple(), t.as_triple()).unwrap();
    let e2 = energy_identity_rhs(&space, true, &t.flux, &t.scalar, &t.trace);
    ((b1 - e1).abs() / e1.abs(), (b2 - e2).abs() / e2.abs())
}

#[test]
fn energy_identity_holds_for_both_operators() {
    for k in [0, 1] {
        for second_beta in [false, true] {
            for seed in 0..5 {
                let (g1, g2) = energy_gap(4, k, second_beta, seed);
                assert!(g1 < 1e-10 && g2 < 1e-10, "k={k} seed={seed}: {g1:e} {g2:e}");
            }
        }
    }
}

#[test]
fn energy_is_positive_for_nonzero_fields() {
    let space = space(3, 1, &example2());
    let t = RandomTriple::new(&space, &mut rng(7));
    assert!(energy_identity_rhs(&space, false, &t.flux, &t.scalar, &t.trace) > 0.0);
    assert!(energy_identity_rhs(&space, true, &t.flux, &t.scalar, &t.trace) > 0.0);
}

fn adjoint_sum(stab: StabilizationConfig, k: usize, seed: u64) -> (f64, f64) {
    let problem = example2();
    let space = space_with(4, k, &problem, stab);
    let mut r = rng(seed);
    let a = RandomTriple::new(&space, &mut r);
    let b = RandomTriple::new(&space, &mut r);
    let (neg_z, neg_zh) = (b.scalar.scaled(-1.0), b.trace.scaled(-1.0));
    let neg_q = a.flux.scaled(-1.0);
    let t1 = b1_apply(
        &space,
        a.as_triple(),
        FieldTriple { flux: &b.flux, scalar: &neg_z, trace: &neg_zh },
    )
    .unwrap();
    let t2 = b2_apply(
        &space,
        b.as_triple(),
        FieldTriple { flux: &neg_q, scalar: &a.scalar, trace: &a.trace },
    )
    .unwrap();
    (t1 + t2, t1.abs().max(t2.abs()))
}

#[test]
fn state_and_adjoint_operators_are_adjoint() {
    for k in [0, 1] {
        for seed in 0..4 {
            let (sum, scale) = adjoint_sum(StabilizationConfig::default(), k, seed);
            assert!(sum.abs() <= 1e-10 * scale, "k={k}: {sum:e} vs {scale:e}");
        }
    }
}

#[test]
fn adjoint_identity_needs_matched_stabilization() {
    let stab = StabilizationConfig::constant(2.0).with_tau1_rule(Tau1Rule::EqualToTau2);
    let (sum, _) = adjoint_sum(stab, 1, 3);
    assert!(sum.abs() > 1e-4, "{sum:e}");
}

#[test]
fn operators_are_linear_in_the_trial_fields() {
    let problem = example1();
    let space = space(3, 1, &problem);
    let mut r = rng(11);
    let a = RandomTriple::new(&space, &mut r);
    let b = RandomTriple::new(&space, &mut r);
    let test = RandomTriple::new(&space, &mut r);
    let sum = RandomTriple {
        flux: hdg_core::hdg::VolumeField {
            dofs_per_element: a.flux.dofs_per_element,
            values: a.flux.values.iter().zip(&b.flux.values).map(|(x, y)| x + 2.0 * y).collect(),
        },
        scalar: hdg_core::hdg::VolumeField {
            dofs_per_element: a.scalar.dofs_per_element,
            values: a.scalar.values.iter().zip(&b.scalar.values).map(|(x, y)| x + 2.0 * y).collect(),
        },
        trace: hdg_core::hdg::FaceField {
            dofs_per_face: a.trace.dofs_per_face,
            values: a.trace.values.iter().zip(&b.trace.values).map(|(x, y)| x + 2.0 * y).collect(),
        },
    };
    for apply in [b1_apply, b2_apply] {
        let lhs = apply(&space, sum.as_triple(), test.as_triple()).unwrap();
        let rhs = apply(&space, a.as_triple(), test.as_triple()).unwrap()
            + 2.0 * apply(&space, b.as_triple(), test.as_triple()).unwrap();
        assert!((lhs - rhs).abs() < 1e-11 * rhs.abs().max(1.0));
    }
}

#[test]
fn mismatched_fields_are_rejected() {
    let problem = example1();
    let small = space(2, 0, &problem);
    let big = space(3, 0, &problem);
    let a = RandomTriple::new(&small, &mut rng(1));
    let b = RandomTriple::new(&big, &mut rng(2));
    assert!(b1_apply(&small, a.as_triple(), b.as_triple()).is_err());
    assert!(b2_apply(&big, a.as_triple(), b.as_triple()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn energy_identity_for_random_tuples(seed in any::<u64>(), k in 0usize..3, n in 1usize..4, second in any::<bool>()) {
        let (g1, g2) = energy_gap(n, k, second, seed);
        prop_assert!(g1 < 1e-10, "{}", g1);
        prop_assert!(g2 < 1e-10, "{}", g2);
    }

    #[test]
    fn adjoint_identity_for_random_tuples(seed in any::<u64>(), tau in 0.1f64..10.0) {
        let (sum, scale) = adjoint_sum(StabilizationConfig::constant(tau), 1, seed);
        prop_assert!(sum.abs() <= 1e-10 * scale);
    }
}
