//! Lyapunov spectrum of the transfer cocycle.
//!
//! Two estimators are provided:
//!
//! * [`lyapunov_spectrum`]: the frame `Q` is pushed through each transfer
//!   matrix and re-orthonormalized every `reorth_period` steps; the logs of
//!   the `R` diagonal accumulate into the exponents.
//! * [`compound_spectrum`]: transfer matrices are multiplied into blocks,
//!   and for each `k` a vector in `Λᵏℂ^{2L}` is power-iterated through the
//!   `k`-th compound of the block (Cauchy–Binet), giving the growth rate of
//!   `σ₁···σ_k`. The lower half uses compounds of the inverse adjoint of the
//!   block (LU inverse, no group structure assumed). Exponents are the
//!   differences of the partial sums.
//!
//! Exponents are per cocycle step, i.e. per two scattering events.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::haar::{PhasePair, SeedSpec};
use crate::linalg::{lorentz_residual, mgs_in_place, CMat, C64};
use crate::transfer::{
    check_unit_circle, TransferKernel, DRIFT_CHECK_PERIOD, LORENTZ_TOL,
};
use crate::zipper::{AlphaFile, VerblunskyData};

pub const MIN_STEPS: usize = 1000;
/// Absolute floor of the pairing tolerance.
pub const PAIRING_FLOOR: f64 = 5e-3;
/// Default block length of the compound estimator.
pub const COMPOUND_BLOCK: usize = 8;

pub const CONVENTION_NOTE: &str = "exponents are per cocycle step (one transfer matrix = two scattering events); divide by 2 for per-event rates";

// stream tags so the two estimators never share phases
const TAG_QR: u64 = 0x51;
const TAG_COMPOUND: u64 = 0xc0;
const TAG_BACKWARD: u64 = 0xba;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    pub z_re: f64,
    pub z_im: f64,
    /// `2L` exponents, descending.
    pub gammas: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub n_steps: usize,
    pub n_realizations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingResidual {
    pub j: usize,
    pub residual: f64,
    pub tolerance: f64,
}

impl PairingResidual {
    pub fn ok(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapAssessment {
    pub j: usize,
    pub gap: f64,
    pub stderr: f64,
    pub significant: bool,
}

impl LyapunovSpectrum {
    pub fn l(&self) -> usize {
        self.gammas.len() / 2
    }

    pub fn z(&self) -> C64 {
        C64::new(self.z_re, self.z_im)
    }

    pub fn combined_stderr(&self, i: usize, j: usize) -> f64 {
        self.stderrs[i].hypot(self.stderrs[j])
    }

    /// `|γ_j + γ_{2L+1−j}|` for `j = 1..=L` with tolerance
    /// `max(5e-3, 4·combined stderr)`.
    pub fn pairing(&self) -> Vec<PairingResidual> {
        let m = self.gammas.len();
        (0..m / 2)
            .map(|i| PairingResidual {
                j: i + 1,
                residual: (self.gammas[i] + self.gammas[m - 1 - i]).abs(),
                tolerance: PAIRING_FLOOR.max(4.0 * self.combined_stderr(i, m - 1 - i)),
            })
            .collect()
    }

    pub fn max_pairing_residual(&self) -> f64 {
        self.pairing().iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// `γ_L − 3·stderr_L > 0`.
    pub fn smallest_positive_significant(&self) -> bool {
        let l = self.l();
        self.gammas[l - 1] - 3.0 * self.stderrs[l - 1] > 0.0
    }
}

/// Gaps `γ_j − γ_{j+1}` for `j = 1..L−1`, flagged when above `3·stderr`.
pub fn distinctness_report(sp: &LyapunovSpectrum) -> Vec<GapAssessment> {
    let l = sp.l();
    (0..l.saturating_sub(1))
        .map(|i| {
            let gap = sp.gammas[i] - sp.gammas[i + 1];
            let stderr = sp.combined_stderr(i, i + 1);
            GapAssessment {
                j: i + 1,
                gap,
                stderr,
                significant: gap > 3.0 * stderr,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub n_steps: usize,
    pub n_realizations: usize,
    pub reorth_period: usize,
    pub execution: Execution,
}

impl LyapunovConfig {
    pub fn new(n_steps: usize, n_realizations: usize) -> Self {
        LyapunovConfig {
            n_steps,
            n_realizations,
            reorth_period: 1,
            execution: Execution::Parallel,
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_reorth_period(mut self, period: usize) -> Self {
        self.reorth_period = period;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_steps < MIN_STEPS {
            return Err(Error::invalid(format!("n_steps must be at least {MIN_STEPS}")));
        }
        if self.n_realizations < 2 {
            return Err(Error::invalid("at least two realizations are needed for error bars"));
        }
        if self.reorth_period == 0 {
            return Err(Error::invalid("reorth_period must be at least 1"));
        }
        Ok(())
    }
}

fn sort_desc(v: &mut [f64]) {
    // stable, descending
    v.sort_by(|a, b| b.total_cmp(a));
}

fn aggregate(z: C64, runs: Vec<Vec<f64>>, n_steps: usize) -> LyapunovSpectrum {
    let r = runs.len() as f64;
    let m = runs[0].len();
    let mut gammas = vec![0.0; m];
    let mut stderrs = vec![0.0; m];
    for j in 0..m {
        let mean = runs.iter().map(|g| g[j]).sum::<f64>() / r;
        let var = runs.iter().map(|g| (g[j] - mean).powi(2)).sum::<f64>() / (r - 1.0);
        gammas[j] = mean;
        stderrs[j] = (var / r).sqrt();
    }
    LyapunovSpectrum {
        z_re: z.re,
        z_im: z.im,
        gammas,
        stderrs,
        n_steps,
        n_realizations: runs.len(),
    }
}

fn check_transfer(kernel: &TransferKernel, p0: &PhasePair, p1: &PhasePair, step: usize) -> Result<()> {
    let r = lorentz_residual(&kernel.matrix(p0, p1));
    if !(r <= LORENTZ_TOL) {
        return Err(Error::LorentzDrift { step, residual: r });
    }
    Ok(())
}

/// One trajectory of the QR estimator; returns sorted exponents.
pub fn qr_trajectory(
    kernel: &TransferKernel,
    seed: SeedSpec,
    n_steps: usize,
    reorth_period: usize,
) -> Result<Vec<f64>> {
    let l = kernel.l;
    let m = 2 * l;
    let mut rng = seed.rng();
    let mut q = CMat::identity(m, m);
    let mut scratch = CMat::zeros(m, m);
    let mut diag = vec![0.0; m];
    let mut acc = vec![0.0; m];
    for step in 1..=n_steps {
        let p0 = PhasePair::sample(l, &mut rng)?;
        let p1 = PhasePair::sample(l, &mut rng)?;
        kernel.apply(&mut q, &p0, &p1, &mut scratch);
        if step % DRIFT_CHECK_PERIOD == 0 {
            check_transfer(kernel, &p0, &p1, step)?;
        }
        if step % reorth_period == 0 || step == n_steps {
            if !mgs_in_place(&mut q, &mut diag) {
                return Err(Error::NumericFailure {
                    step,
                    what: "non-finite or vanishing R diagonal".into(),
                });
            }
            for (a, d) in acc.iter_mut().zip(&diag) {
                *a += d.ln();
            }
        }
    }
    let mut g: Vec<f64> = acc.iter().map(|a| a / n_steps as f64).collect();
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericFailure {
            step: n_steps,
            what: "non-finite exponent".into(),
        });
    }
    sort_desc(&mut g);
    Ok(g)
}

/// QR estimator averaged over independent realizations.
pub fn lyapunov_spectrum(
    vd: &VerblunskyData,
    z: C64,
    cfg: &LyapunovConfig,
    seed: SeedSpec,
) -> Result<LyapunovSpectrum> {
    cfg.validate()?;
    check_unit_circle(z)?;
    let kernel = TransferKernel::new(vd, z)?;
    let base = seed.derive(TAG_QR);
    let runs = map_indexed(cfg.execution, cfg.n_realizations, |r| {
        qr_trajectory(&kernel, base.derive(r as u64), cfg.n_steps, cfg.reorth_period)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(z, runs, cfg.n_steps))
}

/// QR estimator along `Φ(z,ω,−n)`, i.e. through `T_{−1}⁻¹, T_{−2}⁻¹, …`.
pub fn backward_spectrum(
    vd: &VerblunskyData,
    z: C64,
    cfg: &LyapunovConfig,
    seed: SeedSpec,
) -> Result<LyapunovSpectrum> {
    cfg.validate()?;
    check_unit_circle(z)?;
    let kernel = TransferKernel::new(vd, z)?;
    let base = seed.derive(TAG_BACKWARD);
    let l = vd.l();
    let m = 2 * l;
    let runs = map_indexed(cfg.execution, cfg.n_realizations, |r| -> Result<Vec<f64>> {
        let mut rng = base.derive(r as u64).rng();
        let mut q = CMat::identity(m, m);
        let mut diag = vec![0.0; m];
        let mut acc = vec![0.0; m];
        for step in 1..=cfg.n_steps {
            let p0 = PhasePair::sample(l, &mut rng)?;
            let p1 = PhasePair::sample(l, &mut rng)?;
            let t = crate::transfer::LorentzMatrix::unchecked(kernel.matrix(&p0, &p1));
            q = t.inverse().into_inner() * q;
            if !mgs_in_place(&mut q, &mut diag) {
                return Err(Error::NumericFailure {
                    step,
                    what: "non-finite or vanishing R diagonal".into(),
                });
            }
            for (a, d) in acc.iter_mut().zip(&diag) {
                *a += d.ln();
            }
        }
        let mut g: Vec<f64> = acc.iter().map(|a| a / cfg.n_steps as f64).collect();
        sort_desc(&mut g);
        Ok(g)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(z, runs, cfg.n_steps))
}

/// Lexicographic `k`-subsets of `0..n`.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Determinant of the `rows × cols` submatrix, Gaussian elimination with
/// partial pivoting for `k ≥ 4`.
fn minor(m: &CMat, rows: &[usize], cols: &[usize]) -> C64 {
    let k = rows.len();
    let e = |i: usize, j: usize| m[(rows[i], cols[j])];
    match k {
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        _ => {
            let mut a = vec![C64::new(0.0, 0.0); k * k];
            for i in 0..k {
                for j in 0..k {
                    a[i * k + j] = e(i, j);
                }
            }
            let mut det = C64::new(1.0, 0.0);
            for col in 0..k {
                let piv = (col..k)
                    .max_by(|&x, &y| a[x * k + col].norm().total_cmp(&a[y * k + col].norm()))
                    .unwrap();
                if a[piv * k + col].norm() == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                if piv != col {
                    for j in 0..k {
                        a.swap(piv * k + j, col * k + j);
                    }
                    det = -det;
                }
                let p = a[col * k + col];
                det *= p;
                for i in col + 1..k {
                    let f = a[i * k + col] / p;
                    for j in col..k {
                        let v = a[col * k + j];
                        a[i * k + j] -= f * v;
                    }
                }
            }
            det
        }
    }
}

/// `w ← Λᵏ(M)·w` for the subset basis `sets`.
fn compound_apply(m: &CMat, sets: &[Vec<usize>], w: &[C64], out: &mut [C64]) {
    for (i, rows) in sets.iter().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (j, cols) in sets.iter().enumerate() {
            if w[j] != C64::new(0.0, 0.0) {
                acc += minor(m, rows, cols) * w[j];
            }
        }
        out[i] = acc;
    }
}

struct PowerIterate {
    sets: Vec<Vec<usize>>,
    w: Vec<C64>,
    buf: Vec<C64>,
    log_growth: f64,
}

impl PowerIterate {
    fn new<R: Rng>(n: usize, k: usize, rng: &mut R) -> Self {
        let sets = subsets(n, k);
        let mut w: Vec<C64> = (0..sets.len())
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        w.iter_mut().for_each(|x| *x /= norm);
        let buf = vec![C64::new(0.0, 0.0); sets.len()];
        PowerIterate {
            sets,
            w,
            buf,
            log_growth: 0.0,
        }
    }

    fn step(&mut self, m: &CMat) -> bool {
        compound_apply(m, &self.sets, &self.w, &mut self.buf);
        let norm = self.buf.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return false;
        }
        self.log_growth += norm.ln();
        for (w, b) in self.w.iter_mut().zip(&self.buf) {
            *w = b / norm;
        }
        true
    }
}

/// One trajectory of the compound (blocked singular value) estimator.
pub fn compound_trajectory(
    kernel: &TransferKernel,
    seed: SeedSpec,
    n_steps: usize,
    block: usize,
) -> Result<Vec<f64>> {
    let l = kernel.l;
    let m = 2 * l;
    let mut rng = seed.rng();
    let mut init_rng = seed.derive(1).rng();
    let mut upper: Vec<PowerIterate> = (1..=l).map(|k| PowerIterate::new(m, k, &mut init_rng)).collect();
    let mut lower: Vec<PowerIterate> = (1..l).map(|k| PowerIterate::new(m, k, &mut init_rng)).collect();
    let mut log_det = 0.0;
    let mut p = CMat::identity(m, m);
    let mut scratch = CMat::zeros(m, m);
    let fail = |step: usize, what: &str| Error::NumericFailure {
        step,
        what: what.to_string(),
    };
    for step in 1..=n_steps {
        let p0 = PhasePair::sample(l, &mut rng)?;
        let p1 = PhasePair::sample(l, &mut rng)?;
        kernel.apply(&mut p, &p0, &p1, &mut scratch);
        if step % DRIFT_CHECK_PERIOD == 0 {
            check_transfer(kernel, &p0, &p1, step)?;
        }
        if step % block == 0 || step == n_steps {
            let lu = p.clone().lu();
            let det = lu.determinant().norm();
            if !(det.is_finite() && det > 0.0) {
                return Err(fail(step, "singular block product"));
            }
            log_det += det.ln();
            let inv_adj = lu
                .try_inverse()
                .ok_or_else(|| fail(step, "singular block product"))?
                .adjoint();
            for it in upper.iter_mut() {
                if !it.step(&p) {
                    return Err(fail(step, "compound growth overflow"));
                }
            }
            for it in lower.iter_mut() {
                if !it.step(&inv_adj) {
                    return Err(fail(step, "compound growth overflow"));
                }
            }
            p.fill_with_identity();
        }
    }
    let n = n_steps as f64;
    // partial sums S_0..S_m of the ordered log singular values
    let mut partial = vec![0.0; m + 1];
    for (k, it) in upper.iter().enumerate() {
        partial[k + 1] = it.log_growth / n;
    }
    partial[m] = log_det / n;
    for (k, it) in lower.iter().enumerate() {
        // σ₁···σ_{m−k} = |det| · (top-k product of the inverse)
        partial[m - (k + 1)] = (log_det + it.log_growth) / n;
    }
    let mut g: Vec<f64> = (1..=m).map(|j| partial[j] - partial[j - 1]).collect();
    if g.iter().any(|x| !x.is_finite()) {
        return Err(fail(n_steps, "non-finite exponent"));
    }
    sort_desc(&mut g);
    Ok(g)
}

/// Compound estimator on a stream disjoint from [`lyapunov_spectrum`]'s.
pub fn compound_spectrum(
    vd: &VerblunskyData,
    z: C64,
    cfg: &LyapunovConfig,
    block: usize,
    seed: SeedSpec,
) -> Result<LyapunovSpectrum> {
    cfg.validate()?;
    check_unit_circle(z)?;
    if block == 0 {
        return Err(Error::invalid("block length must be positive"));
    }
    let kernel = TransferKernel::new(vd, z)?;
    let base = seed.derive(TAG_COMPOUND);
    let runs = map_indexed(cfg.execution, cfg.n_realizations, |r| {
        compound_trajectory(&kernel, base.derive(r as u64), cfg.n_steps, block)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(z, runs, cfg.n_steps))
}

/// Largest `|γ_j^A − γ_j^B| / combined stderr` over `j`.
pub fn max_standardized_difference(a: &LyapunovSpectrum, b: &LyapunovSpectrum) -> f64 {
    a.gammas
        .iter()
        .zip(&b.gammas)
        .zip(a.stderrs.iter().zip(&b.stderrs))
        .map(|((x, y), (sx, sy))| {
            let s = sx.hypot(*sy);
            if s > 0.0 {
                (x - y).abs() / s
            } else if x == y {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// `N`-th roots of unity `e^{2πik/N}`.
pub fn roots_of_unity(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub z_re: f64,
    pub z_im: f64,
    pub seed: SeedSpec,
    pub spectrum: Option<LyapunovSpectrum>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub alpha: AlphaFile,
    #[serde(rename = "L")]
    pub l: usize,
    pub master_seed: u64,
    pub n_steps: usize,
    pub n_realizations: usize,
    pub reorth_period: usize,
    pub convention: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub manifest: SweepManifest,
}

/// Seed of grid point `index` under `master_seed`.
pub fn point_seed(master_seed: u64, index: usize) -> SeedSpec {
    SeedSpec::new(master_seed).derive(index as u64)
}

/// One spectrum per grid point. A failing point is recorded and the sweep
/// continues; an off-circle point fails before any work starts.
pub fn sweep(
    vd: &VerblunskyData,
    z_grid: &[C64],
    cfg: &LyapunovConfig,
    master_seed: u64,
) -> Result<SweepResult> {
    if z_grid.is_empty() {
        return Err(Error::invalid("z grid is empty"));
    }
    for &z in z_grid {
        check_unit_circle(z)?;
    }
    cfg.validate()?;
    let points = map_indexed(cfg.execution, z_grid.len(), |i| {
        let z = z_grid[i];
        let seed = point_seed(master_seed, i);
        let (spectrum, error) = match lyapunov_spectrum(vd, z, cfg, seed) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        };
        SweepPoint {
            index: i,
            z_re: z.re,
            z_im: z.im,
            seed,
            spectrum,
            error,
        }
    });
    Ok(SweepResult {
        points,
        manifest: SweepManifest {
            alpha: AlphaFile::from_matrix(vd.alpha()),
            l: vd.l(),
            master_seed,
            n_steps: cfg.n_steps,
            n_realizations: cfg.n_realizations,
            reorth_period: cfg.reorth_period,
            convention: CONVENTION_NOTE.to_string(),
        },
    })
}

pub const CSV_HEADER: &str = "z_re,z_im,j,gamma_j,stderr_j,n_steps,n_realizations";

/// Shortest round-trip representation at 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_spectrum_rows<W: Write>(out: &mut W, sp: &LyapunovSpectrum) -> std::io::Result<()> {
    for (j, (g, s)) in sp.gammas.iter().zip(&sp.stderrs).enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(sp.z_re),
            fmt_f64(sp.z_im),
            j + 1,
            fmt_f64(*g),
            fmt_f64(*s),
            sp.n_steps,
            sp.n_realizations
        )?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(out: &mut W, spectra: &[&LyapunovSpectrum]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in spectra {
        write_spectrum_rows(out, s)?;
    }
    Ok(())
}
