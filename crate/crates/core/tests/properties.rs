use proptest::prelude::*;

use zipper_lab::haar::{haar_unitary, phase_sequence, SeedSpec};
use zipper_lab::linalg::{lorentz_residual, singular_values, CMat, C64};
use zipper_lab::spectral::block_ipr;
use zipper_lab::transfer::{phi_map, transfer_matrix, transfer_via_phi};
use zipper_lab::zipper::{build_scattering, make_verblunsky, VerblunskyData};

fn contraction(l: usize, entries: &[f64], norm: f64) -> VerblunskyData {
    let m = CMat::from_fn(l, l, |i, j| C64::new(entries[2 * (i * l + j)], entries[2 * (i * l + j) + 1]));
    let s = singular_values(&m)[0].max(1e-12);
    make_verblunsky(m * C64::new(norm / s, 0.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn haar_draws_are_unitary(l in 1usize..6, seed in any::<u64>()) {
        prop_assert!(haar_unitary(l, SeedSpec::new(seed)).unwrap().residual() <= 1e-12);
    }

    #[test]
    fn scattering_and_phi(
        l in 1usize..4,
        entries in prop::collection::vec(-1.0f64..1.0, 18),
        norm in 0.0f64..0.95,
        seed in any::<u64>(),
    ) {
        let vd = contraction(l, &entries, norm);
        for p in phase_sequence(l, 4, SeedSpec::new(seed)).unwrap() {
            let s = build_scattering(&vd, &p).unwrap();
            prop_assert!(s.unitarity_residual() <= 1e-12);
            let m = phi_map(&s, None).unwrap();
            prop_assert!(lorentz_residual(m.matrix()) <= 1e-10);
        }
    }

    #[test]
    fn transfer_factorizations_agree(
        l in 1usize..4,
        entries in prop::collection::vec(-1.0f64..1.0, 18),
        norm in 0.0f64..0.9,
        theta in 0.0f64..std::f64::consts::TAU,
        seed in any::<u64>(),
    ) {
        let vd = contraction(l, &entries, norm);
        let z = C64::from_polar(1.0, theta);
        let ph = phase_sequence(l, 2, SeedSpec::new(seed)).unwrap();
        let a = transfer_matrix(&vd, z, (&ph[0], &ph[1])).unwrap();
        let b = transfer_via_phi(&vd, z, (&ph[0], &ph[1])).unwrap();
        let scale = a.matrix().norm().max(1.0);
        prop_assert!((a.matrix() - b.matrix()).norm() <= 1e-11 * scale);
    }

    #[test]
    fn ipr_is_bounded(l in 1usize..4, raw in prop::collection::vec(-1.0f64..1.0, 2..64)) {
        let n = raw.len() / 2 / l * l;
        prop_assume!(n > 0);
        let v: Vec<C64> = (0..n).map(|k| C64::new(raw[2 * k], raw[2 * k + 1])).collect();
        prop_assume!(v.iter().any(|x| x.norm() > 1e-6));
        let ipr = block_ipr(&v, l);
        prop_assert!(ipr <= 1.0 + 1e-12);
        prop_assert!(ipr >= (l as f64 / n as f64) - 1e-12);
    }
}
