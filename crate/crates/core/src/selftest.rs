//! Invariant suite at small sizes (L ≤ 3, ≤ 10⁴ steps).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::haar::{haar_unitary, phase_sequence, HaarPhases, PhasePair, SeedSpec};
use crate::lie::{cayley_checks, certify, lemma_bracket_checks, Verdict, BRACKET_TOL};
use crate::linalg::{block, from_blocks, frobenius, lorentz_residual, CMat, C64, I};
use crate::lyapunov::{compound_spectrum, lyapunov_spectrum, max_standardized_difference, LyapunovConfig, COMPOUND_BLOCK};
use crate::spectral::{finite_spectrum, localization_contrast, wronskian_harness, CIRCLE_TOL};
use crate::transfer::{cocycle, phi_raw, transfer_matrix, transfer_via_phi, LORENTZ_TOL};
use crate::zipper::{assemble_finite, build_scattering, diagonal_alpha, make_verblunsky, scalar_alpha, ScatteringEvent};

/// The `φ` formula under test.
pub type PhiFn = fn(&ScatteringEvent) -> Result<CMat>;

pub fn phi_reference(s: &ScatteringEvent) -> Result<CMat> {
    phi_raw(s, None)
}

/// `φ` with the sign of the lower-left block flipped.
pub fn phi_sign_flip(s: &ScatteringEvent) -> Result<CMat> {
    let m = phi_raw(s, None)?;
    let l = s.l();
    Ok(from_blocks(
        &block(&m, 0, 0, l),
        &block(&m, 0, 1, l),
        &(-block(&m, 1, 0, l)),
        &block(&m, 1, 1, l),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub checks: Vec<CheckResult>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Suite {
    checks: Vec<CheckResult>,
}

impl Suite {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

fn le(value: f64, tol: f64) -> (bool, String) {
    (value <= tol, format!("residual {value:.3e} (tol {tol:.0e})"))
}

/// Runs every invariant, with `phi` as the `φ` implementation.
pub fn run_with(phi: PhiFn) -> SelfTestReport {
    let mut s = Suite { checks: Vec::new() };
    let seed = SeedSpec::new(0x5e1f);

    s.run("haar_unitarity", || {
        let mut worst: f64 = 0.0;
        for l in 1..=3 {
            for k in 0..20 {
                worst = worst.max(haar_unitary(l, seed.derive(k)).map(|u| u.residual())?);
            }
        }
        Ok(le(worst, 1e-12))
    });

    s.run("scattering_unitarity", || {
        let vd = make_verblunsky(diagonal_alpha(3, &[0.6, 0.2, 0.1]))?;
        let mut worst: f64 = 0.0;
        for p in phase_sequence(3, 20, seed.derive(1))? {
            worst = worst.max(build_scattering(&vd, &p)?.unitarity_residual());
        }
        Ok(le(worst, 1e-12))
    });

    s.run("lorentz_membership", || {
        let mut worst: f64 = 0.0;
        for l in 1..=3 {
            let vd = make_verblunsky(scalar_alpha(l, 0.5))?;
            for p in phase_sequence(l, 10, seed.derive(2))? {
                let ev = build_scattering(&vd, &p)?;
                worst = worst.max(lorentz_residual(&phi(&ev)?));
            }
        }
        Ok(le(worst, LORENTZ_TOL))
    });

    s.run("transfer_phi_consistency", || {
        let mut worst: f64 = 0.0;
        for l in [1, 2] {
            let vd = make_verblunsky(scalar_alpha(l, 0.5))?;
            let z = C64::from_polar(1.0, 0.7);
            let ph = phase_sequence(l, 100, seed.derive(3))?;
            for w in ph.chunks(2) {
                let a = transfer_matrix(&vd, z, (&w[0], &w[1]))?;
                let b = transfer_via_phi(&vd, z, (&w[0], &w[1]))?;
                worst = worst.max(frobenius(&(a.matrix() - b.matrix())));
            }
        }
        Ok(le(worst, 1e-11))
    });

    s.run("cocycle_lorentz_n1000", || {
        let vd = make_verblunsky(scalar_alpha(2, 0.5))?;
        let src = HaarPhases::new(2, seed.derive(4))?;
        let m = cocycle(&vd, I, &src, 1000)?;
        Ok(le(m.residual(), 1e-8))
    });

    s.run("wronskian_drift", || {
        let vd = make_verblunsky(scalar_alpha(2, 0.4))?;
        let r = wronskian_harness(&vd, C64::new(0.0, 1.0), seed.derive(5), 1000, 4)?;
        Ok(le(r.max_drift, 1e-9))
    });

    s.run("zero_alpha_exponents", || {
        let vd = make_verblunsky(CMat::zeros(2, 2))?;
        let sp = lyapunov_spectrum(&vd, C64::new(1.0, 0.0), &LyapunovConfig::new(10_000, 4), seed.derive(6))?;
        let worst = sp.gammas.iter().map(|g| g.abs()).fold(0.0, f64::max);
        Ok(le(worst, 1e-3))
    });

    s.run("pairing_and_positivity", || {
        let vd = make_verblunsky(diagonal_alpha(2, &[0.6, 0.2]))?;
        let sp = lyapunov_spectrum(&vd, C64::new(0.0, 1.0), &LyapunovConfig::new(10_000, 8), seed.derive(7))?;
        let paired = sp.pairing().iter().all(|p| p.ok());
        let positive = sp.smallest_positive_significant();
        Ok((
            paired && positive,
            format!("gammas {:?}, max pairing residual {:.2e}", sp.gammas, sp.max_pairing_residual()),
        ))
    });

    s.run("estimator_agreement", || {
        let vd = make_verblunsky(scalar_alpha(1, 0.5))?;
        let cfg = LyapunovConfig::new(10_000, 8);
        let z = C64::new(0.0, 1.0);
        let a = lyapunov_spectrum(&vd, z, &cfg, seed.derive(8))?;
        let b = compound_spectrum(&vd, z, &cfg, COMPOUND_BLOCK, seed.derive(9))?;
        let d = max_standardized_difference(&a, &b);
        Ok((d <= 3.0, format!("max |diff|/stderr {d:.2}")))
    });

    s.run("lie_full_closure", || {
        let mut dims = Vec::new();
        let mut ok = true;
        for l in 1..=3 {
            let r = certify(&make_verblunsky(scalar_alpha(l, 0.5))?, C64::new(1.0, 0.0), 8)?;
            ok &= r.verdict == Verdict::Pass;
            dims.push(r.dimension);
        }
        Ok((ok, format!("dimensions {dims:?}")))
    });

    s.run("lie_degenerate_closure", || {
        let mut dims = Vec::new();
        let mut ok = true;
        for l in 1..=3 {
            let r = certify(&make_verblunsky(CMat::zeros(l, l))?, C64::new(1.0, 0.0), 8)?;
            ok &= r.verdict == Verdict::DegenerateAsPredicted;
            dims.push(r.dimension);
        }
        Ok((ok, format!("dimensions {dims:?}")))
    });

    s.run("lemma_brackets", || {
        let r = lemma_bracket_checks(&make_verblunsky(diagonal_alpha(2, &[0.3]))?, I)?;
        let (ok, detail) = le(r.max_residual(), BRACKET_TOL);
        Ok((ok && r.a2_span == r.a2_expected, detail))
    });

    s.run("cayley_symplectic", || {
        let vd = make_verblunsky(scalar_alpha(2, 0.5))?;
        let src = HaarPhases::new(2, seed.derive(10))?;
        let samples = [1, 10, 50]
            .iter()
            .map(|&n| cocycle(&vd, I, &src, n))
            .collect::<Result<Vec<_>>>()?;
        let r = cayley_checks(2, &samples)?;
        Ok((r.passed(), format!("max symplectic residual {:.2e}", r.max_symplectic())))
    });

    s.run("finite_spectrum_circle", || {
        let vd = make_verblunsky(scalar_alpha(2, 0.5))?;
        let fz = assemble_finite(&vd, &phase_sequence(2, 50, seed.derive(11))?, 50)?;
        let r = finite_spectrum(&fz)?;
        let (ok, detail) = le(r.max_circle_residual().max(r.unitarity_residual), CIRCLE_TOL);
        Ok((ok && r.eigenvalues.len() == 100, detail))
    });

    s.run("zero_alpha_extended_states", || {
        let vd0 = make_verblunsky(CMat::zeros(1, 1))?;
        let vd = make_verblunsky(scalar_alpha(1, 0.5))?;
        let r = localization_contrast(&vd0, &vd, 40, 2, seed.derive(12), Execution::Sequential)?;
        let err = (r.median_ipr_zero - 2.0 / 40.0).abs();
        Ok((err <= 1e-10, format!("median IPR at alpha=0 {:.6} (2/N = 0.05)", r.median_ipr_zero)))
    });

    s.run("identity_phase_event", || {
        let vd = make_verblunsky(CMat::zeros(2, 2))?;
        let ev = build_scattering(&vd, &PhasePair::identity(2))?;
        let swap = from_blocks(&CMat::zeros(2, 2), &CMat::identity(2, 2), &CMat::identity(2, 2), &CMat::zeros(2, 2));
        Ok(le(frobenius(&(ev.matrix() - swap)), 0.0))
    });

    SelfTestReport { checks: s.checks }
}

pub fn run() -> SelfTestReport {
    run_with(phi_reference)
}
