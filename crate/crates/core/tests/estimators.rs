use zipper_lab::exec::Execution;
use zipper_lab::haar::SeedSpec;
use zipper_lab::linalg::{CMat, C64};
use zipper_lab::lyapunov::{
    backward_spectrum, distinctness_report, lyapunov_spectrum, max_standardized_difference, roots_of_unity,
    sweep, LyapunovConfig,
};
use zipper_lab::selftest::{self, phi_sign_flip};
use zipper_lab::zipper::{diagonal_alpha, make_verblunsky, scalar_alpha};

#[test]
fn parallel_and_sequential_agree_bitwise() {
    let vd = make_verblunsky(scalar_alpha(2, 0.5)).unwrap();
    let z = C64::from_polar(1.0, 0.3);
    let seq = lyapunov_spectrum(&vd, z, &LyapunovConfig::new(3000, 6).with_execution(Execution::Sequential), SeedSpec::new(5)).unwrap();
    let par = lyapunov_spectrum(&vd, z, &LyapunovConfig::new(3000, 6).with_execution(Execution::Parallel), SeedSpec::new(5)).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn backward_matches_forward() {
    let vd = make_verblunsky(diagonal_alpha(2, &[0.6, 0.2])).unwrap();
    let cfg = LyapunovConfig::new(20_000, 8);
    let z = C64::new(0.0, 1.0);
    let f = lyapunov_spectrum(&vd, z, &cfg, SeedSpec::new(17)).unwrap();
    let b = backward_spectrum(&vd, z, &cfg, SeedSpec::new(18)).unwrap();
    let d = max_standardized_difference(&f, &b);
    assert!(d <= 4.0, "forward {:?} backward {:?}", f.gammas, b.gammas);
}

#[test]
fn estimates_stabilize_as_steps_double() {
    let vd = make_verblunsky(scalar_alpha(1, 0.5)).unwrap();
    let z = C64::new(-1.0, 0.0);
    let mut prev: Option<f64> = None;
    let mut diffs = Vec::new();
    for n in [5_000, 10_000, 20_000, 40_000] {
        let s = lyapunov_spectrum(&vd, z, &LyapunovConfig::new(n, 8), SeedSpec::new(99)).unwrap();
        if let Some(p) = prev {
            diffs.push(((s.gammas[0] - p).abs(), s.stderrs[0]));
        }
        prev = Some(s.gammas[0]);
    }
    for (d, se) in diffs {
        assert!(d <= 6.0 * se + 1e-3, "change {d} vs stderr {se}");
    }
}

#[test]
fn reorthogonalization_period_is_immaterial_at_moderate_growth() {
    let vd = make_verblunsky(scalar_alpha(2, 0.5)).unwrap();
    let z = C64::new(1.0, 0.0);
    let a = lyapunov_spectrum(&vd, z, &LyapunovConfig::new(5000, 4), SeedSpec::new(3)).unwrap();
    let b = lyapunov_spectrum(&vd, z, &LyapunovConfig::new(5000, 4).with_reorth_period(5), SeedSpec::new(3)).unwrap();
    for (x, y) in a.gammas.iter().zip(&b.gammas) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn zero_alpha_sweep_is_flat() {
    let vd = make_verblunsky(CMat::zeros(2, 2)).unwrap();
    let res = sweep(&vd, &roots_of_unity(4), &LyapunovConfig::new(10_000, 4), 1).unwrap();
    for p in res.points {
        let s = p.spectrum.unwrap();
        assert!(s.gammas.iter().all(|g| g.abs() <= 1e-3), "{:?}", s.gammas);
    }
}

#[test]
fn sweep_seeds_are_reproducible() {
    let vd = make_verblunsky(scalar_alpha(1, 0.5)).unwrap();
    let cfg = LyapunovConfig::new(2000, 4);
    let a = sweep(&vd, &roots_of_unity(3), &cfg, 8).unwrap();
    let b = sweep(&vd, &roots_of_unity(3), &cfg, 8).unwrap();
    let c = sweep(&vd, &roots_of_unity(3), &cfg, 9).unwrap();
    assert_eq!(a.points, b.points);
    assert_ne!(a.points[0].spectrum, c.points[0].spectrum);
}

#[test]
fn diagonal_l2_exponents_are_separated() {
    let vd = make_verblunsky(diagonal_alpha(2, &[0.6, 0.2])).unwrap();
    let s = lyapunov_spectrum(&vd, C64::new(1.0, 0.0), &LyapunovConfig::new(100_000, 16), SeedSpec::new(2024)).unwrap();
    assert!(s.pairing().iter().all(|p| p.ok()), "{:?}", s.pairing());
    assert!(s.smallest_positive_significant());
    assert!(distinctness_report(&s).iter().all(|g| g.significant), "{:?}", s.gammas);
}

#[test]
fn flipped_phi_fails_selftest() {
    let good = selftest::run();
    assert!(good.passed(), "{:?}", good.failed());
    let bad = selftest::run_with(phi_sign_flip);
    assert!(!bad.passed());
    assert!(!bad.get("lorentz_membership").unwrap().passed);
}
