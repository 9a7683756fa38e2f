mod common;

use common::{random_pure, random_state};
use proptest::prelude::*;
use qmem_core::channels::{amplifier_kraus, beamsplitter_unitary, loss_kraus, phase_shift};
use qmem_core::fock::{fidelity, max_abs, Count, DensityState, KrausSet, ModeDescriptor, HERMITICITY_TOL, PSD_TOL};

fn assert_physical(s: &DensityState) {
    assert!(
        s.hermiticity_error() < HERMITICITY_TOL,
        "hermiticity {}",
        s.hermiticity_error()
    );
    assert!(s.min_eigenvalue() > -PSD_TOL, "min eigenvalue {}", s.min_eigenvalue());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unitaries_preserve_trace_and_positivity(
        rho in random_state(vec![2, 3]),
        t in 0.0..=1.0f64,
        phi in -6.3..6.3f64,
    ) {
        let bs = beamsplitter_unitary(t, 2, 3).unwrap();
        // the clipped blocks above total 2 are not unitary; restrict to a
        // state living in the complete blocks by first padding both modes
        let padded = rho.extend_truncation("m0", 5).unwrap().extend_truncation("m1", 5).unwrap();
        let full = beamsplitter_unitary(t, 5, 5).unwrap();
        let out = padded.apply_unitary(&full.matrix, &["m0", "m1"]).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        assert_physical(&out);
        prop_assert_eq!(bs.complete_up_to, 2);

        let out = rho.apply_unitary(&phase_shift(phi, 3), &["m1"]).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        assert_physical(&out);
    }

    #[test]
    fn kraus_channels_never_raise_trace(
        rho in random_state(vec![3, 2]),
        tau in 0.0..=1.0f64,
        gain in 1.0..2.0f64,
    ) {
        let lossy = rho.apply_kraus(&KrausSet::new(loss_kraus(tau, 3).unwrap(), ["m0"]).unwrap()).unwrap();
        prop_assert!((lossy.trace() - 1.0).abs() < 1e-12);
        assert_physical(&lossy);
        let amplified = lossy.apply_kraus(&KrausSet::new(amplifier_kraus(gain, 2).unwrap(), ["m1"]).unwrap()).unwrap();
        prop_assert!(amplified.trace() <= 1.0 + 1e-9);
        assert_physical(&amplified);
    }

    #[test]
    fn tensor_then_trace_recovers_factor(a in random_state(vec![2]), b in random_state(vec![1, 1])) {
        // relabel so the factors' modes are distinct
        let b = DensityState::from_matrix(
            vec![ModeDescriptor::bare("x", 1).unwrap(), ModeDescriptor::bare("y", 1).unwrap()],
            b.into_matrix(),
        ).unwrap();
        let joint = a.tensor(&b).unwrap();
        let back = joint.partial_trace("x").unwrap().partial_trace("y").unwrap();
        prop_assert!(max_abs(&(back.matrix() - a.matrix())) < 1e-14);
        let other = joint.reduced(&["x", "y"]).unwrap();
        prop_assert!(max_abs(&(other.matrix() - b.matrix())) < 1e-14);
    }

    #[test]
    fn outcome_partition_sums_to_trace(rho in random_state(vec![2, 2]), cut in 0usize..2) {
        let mut total = 0.0;
        for k in 0..=2 {
            total += rho.outcome_probability(&[("m0", Count::Exactly(k))]).unwrap();
        }
        prop_assert!((total - rho.trace()).abs() < 1e-12);
        let split = rho.outcome_probability(&[("m1", Count::AtMost(cut))]).unwrap()
            + rho.outcome_probability(&[("m1", Count::AtLeast(cut + 1))]).unwrap();
        prop_assert!((split - rho.trace()).abs() < 1e-12);
        let dist: f64 = rho.photon_distribution("m1").unwrap().iter().sum();
        prop_assert!((dist - rho.trace()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric(rho in random_state(vec![2]), sigma in random_state(vec![2])) {
        let f = fidelity(&rho, &sigma).unwrap();
        let g = fidelity(&sigma, &rho).unwrap();
        prop_assert!((f - g).abs() < 1e-9, "{f} vs {g}");
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f));
        prop_assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_fidelity_is_squared_overlap(psi in random_pure(vec![3]), phi in random_pure(vec![3])) {
        // overlap from the rank-one matrices: |⟨ψ|φ⟩|² = tr(ρ_ψ ρ_φ)
        let overlap = (psi.matrix() * phi.matrix()).trace().re;
        prop_assert!((fidelity(&psi, &phi).unwrap() - overlap).abs() < 1e-12);
    }

    #[test]
    fn dumps_round_trip(rho in random_state(vec![1, 2])) {
        let json = serde_json::to_string(&rho.to_dump()).unwrap();
        let back = DensityState::from_dump(serde_json::from_str(&json).unwrap()).unwrap();
        prop_assert_eq!(back, rho);
    }
}
