//! Finite-truncation diagnostics: eigenvalues of periodic truncations,
//! block inverse participation ratios, the α = 0 vs α ≠ 0 localization
//! contrast, and Wronskian conservation along solution frames.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::haar::{phase_sequence, HaarPhases, PhasePair, PhaseSource, SeedSpec};
use crate::linalg::{frobenius, to_faer, lorentz, lorentz_residual_abs, spectral_norm, CMat, CVec, C64};
use crate::lyapunov::fmt_f64;
use crate::transfer::{check_unit_circle, wronskian, TransferKernel};
use crate::zipper::{assemble_finite, FiniteZipper, VerblunskyData};

pub const CIRCLE_TOL: f64 = 1e-10;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// `‖U*U − 𝟙‖_F` via faer's matrix product.
pub fn operator_unitarity(m: &CMat) -> f64 {
    let f = to_faer(m);
    let g = f.adjoint() * &f;
    let n = m.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let d = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            acc += (g[(i, j)] - d).norm_sqr();
        }
    }
    acc.sqrt()
}

/// `Σ_n ‖v_n‖⁴ / (Σ_n ‖v_n‖²)²` over consecutive blocks of length `l`.
pub fn block_ipr(v: &[C64], l: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for b in v.chunks(l) {
        let w: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        num += w * w;
        den += w;
    }
    num / (den * den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub n_blocks: usize,
    pub alpha_descriptor: String,
    pub seed: Option<SeedSpec>,
    /// `[re, im]`, ordered by argument in `(−π, π]`.
    pub eigenvalues: Vec<[f64; 2]>,
    pub circle_residuals: Vec<f64>,
    pub ipr: Vec<f64>,
    pub unitarity_residual: f64,
}

impl SpectrumReport {
    pub fn max_circle_residual(&self) -> f64 {
        self.circle_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn eigenvalue(&self, k: usize) -> C64 {
        C64::new(self.eigenvalues[k][0], self.eigenvalues[k][1])
    }

    pub fn with_provenance(mut self, alpha_descriptor: impl Into<String>, seed: Option<SeedSpec>) -> Self {
        self.alpha_descriptor = alpha_descriptor.into();
        self.seed = seed;
        self
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "k,re,im,circle_residual,ipr")?;
        for (k, ((ev, r), p)) in self
            .eigenvalues
            .iter()
            .zip(&self.circle_residuals)
            .zip(&self.ipr)
            .enumerate()
        {
            writeln!(
                out,
                "{k},{},{},{},{}",
                fmt_f64(ev[0]),
                fmt_f64(ev[1]),
                fmt_f64(*r),
                fmt_f64(*p)
            )?;
        }
        Ok(())
    }
}

/// Full eigendecomposition of `U_op`.
pub fn finite_spectrum(fz: &FiniteZipper) -> Result<SpectrumReport> {
    let n = fz.dim();
    let evd = to_faer(&fz.u_op).eigen().map_err(|e| Error::NumericFailure {
        step: 0,
        what: format!("eigensolver: {e:?}"),
    })?;
    let s = evd.S();
    let u = evd.U();
    let mut rows: Vec<(C64, f64)> = (0..n)
        .map(|k| {
            let col: Vec<C64> = (0..n).map(|i| u[(i, k)]).collect();
            (s[k], block_ipr(&col, fz.l))
        })
        .collect();
    if rows.iter().any(|(z, p)| !(z.re.is_finite() && z.im.is_finite() && p.is_finite())) {
        return Err(Error::NumericFailure {
            step: 0,
            what: "non-finite eigenpair".into(),
        });
    }
    rows.sort_by(|a, b| a.0.arg().total_cmp(&b.0.arg()));
    Ok(SpectrumReport {
        l: fz.l,
        n_blocks: fz.n_blocks,
        alpha_descriptor: String::new(),
        seed: None,
        eigenvalues: rows.iter().map(|(z, _)| [z.re, z.im]).collect(),
        circle_residuals: rows.iter().map(|(z, _)| (z.norm() - 1.0).abs()).collect(),
        ipr: rows.iter().map(|(_, p)| *p).collect(),
        unitarity_residual: operator_unitarity(&fz.u_op),
    })
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub n_blocks: usize,
    pub n_samples: usize,
    pub seed: SeedSpec,
    pub median_ipr_zero: f64,
    pub median_ipr_pos: f64,
    pub ratio: f64,
    /// 95% percentile bootstrap interval over samples.
    pub ratio_interval: [f64; 2],
    pub max_circle_residual: f64,
    pub max_unitarity_residual: f64,
}

/// Median block IPR for `vd_pos` over that for `vd_zero`. Both sides see the
/// same phase realizations; the bootstrap resamples realizations with the
/// same indices on both sides.
pub fn localization_contrast(
    vd_zero: &VerblunskyData,
    vd_pos: &VerblunskyData,
    n_blocks: usize,
    n_samples: usize,
    seed: SeedSpec,
    exec: Execution,
) -> Result<ContrastReport> {
    let l = vd_zero.l();
    if vd_pos.l() != l {
        return Err(Error::invalid("both configurations must share L"));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be positive"));
    }
    let per_sample = map_indexed(exec, n_samples, |s| -> Result<(SpectrumReport, SpectrumReport)> {
        let phases = phase_sequence(l, n_blocks, seed.derive(s as u64))?;
        let a = finite_spectrum(&assemble_finite(vd_zero, &phases, n_blocks)?)?;
        let b = finite_spectrum(&assemble_finite(vd_pos, &phases, n_blocks)?)?;
        Ok((a, b))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let pooled = |idx: &mut dyn Iterator<Item = usize>| -> (Vec<f64>, Vec<f64>) {
        let mut z = Vec::new();
        let mut p = Vec::new();
        for i in idx {
            z.extend_from_slice(&per_sample[i].0.ipr);
            p.extend_from_slice(&per_sample[i].1.ipr);
        }
        (z, p)
    };
    let (z, p) = pooled(&mut (0..n_samples));
    let median_ipr_zero = median(&z);
    let median_ipr_pos = median(&p);
    let ratio = median_ipr_pos / median_ipr_zero;
    let mut rng = seed.derive(0xb007).rng();
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let picks: Vec<usize> = (0..n_samples).map(|_| rng.gen_range(0..n_samples)).collect();
            let (z, p) = pooled(&mut picks.into_iter());
            median(&p) / median(&z)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let all = per_sample.iter().flat_map(|(a, b)| [a, b]);
    let max_circle_residual = all.clone().map(SpectrumReport::max_circle_residual).fold(0.0, f64::max);
    let max_unitarity_residual = all.map(|r| r.unitarity_residual).fold(0.0, f64::max);
    Ok(ContrastReport {
        l,
        n_blocks,
        n_samples,
        seed,
        median_ipr_zero,
        median_ipr_pos,
        ratio,
        ratio_interval: [percentile(&boot, 0.025), percentile(&boot, 0.975)],
        max_circle_residual,
        max_unitarity_residual,
    })
}

/// A vector carried as `exp(log_scale)·unit`, so long propagations do not
/// overflow.
#[derive(Clone, Debug)]
struct Scaled {
    unit: CVec,
    log_scale: f64,
}

impl Scaled {
    fn new(v: CVec) -> Self {
        let mut s = Scaled {
            unit: v,
            log_scale: 0.0,
        };
        s.renormalize();
        s
    }

    fn renormalize(&mut self) {
        let n = self.unit.norm();
        if n > 0.0 {
            self.unit.unscale_mut(n);
            self.log_scale += n.ln();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WronskianReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub z: [f64; 2],
    pub n_max: usize,
    pub n_pairs: usize,
    /// `max_pairs |W_n − W_0| / (‖x_n‖‖y_n‖)` for `n = 0..=n_max`.
    pub drift: Vec<f64>,
    pub max_drift: f64,
    /// Smallest `s` with `drift_n ≤ s·n` for all `n ≥ 1`.
    pub slope: f64,
    /// `Φ(0)*𝓛Φ(0) − 𝓛`, Frobenius.
    pub gram_residual_at_zero: f64,
    /// Max over `n` of the normalized `‖Φ(n)*𝓛Φ(n) − 𝓛‖`.
    pub max_gram_residual: f64,
}

/// Propagates the identity frame and `n_random` random pairs of solutions
/// through `Φ(z,ω,n)`, `n ≤ n_max`, tracking the Wronskian drift.
pub fn wronskian_harness(
    vd: &VerblunskyData,
    z: C64,
    seed: SeedSpec,
    n_max: usize,
    n_random: usize,
) -> Result<WronskianReport> {
    check_unit_circle(z)?;
    let kernel = TransferKernel::new(vd, z)?;
    let l = vd.l();
    let m = 2 * l;
    let source = HaarPhases::new(l, seed)?;
    let mut init_rng = seed.derive(0x1417).rng();
    let mut gauss = || -> CVec {
        CVec::from_fn(m, |_, _| {
            C64::new(init_rng.sample(StandardNormal), init_rng.sample(StandardNormal))
        })
    };
    let mut vecs: Vec<Scaled> = (0..m).map(|k| Scaled::new(CVec::from_fn(m, |i, _| {
        if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
    }))).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..m {
        for b in a..m {
            pairs.push((a, b));
        }
    }
    for _ in 0..n_random {
        let x = vecs.len();
        vecs.push(Scaled::new(gauss()));
        vecs.push(Scaled::new(gauss()));
        pairs.push((x, x + 1));
    }
    let w0: Vec<C64> = pairs
        .iter()
        .map(|&(a, b)| {
            let s = (vecs[a].log_scale + vecs[b].log_scale).exp();
            wronskian(&vecs[a].unit, &vecs[b].unit) * s
        })
        .collect();
    let frame_of = |vecs: &[Scaled]| -> (CMat, f64) {
        // columns rescaled to a common factor
        let top = vecs[..m].iter().map(|v| v.log_scale).fold(f64::NEG_INFINITY, f64::max);
        let f = CMat::from_fn(m, m, |i, j| vecs[j].unit[i] * (vecs[j].log_scale - top).exp());
        (f, top)
    };
    let (f0, _) = frame_of(&vecs);
    let gram_residual_at_zero = lorentz_residual_abs(&f0);
    let mut drift = Vec::with_capacity(n_max + 1);
    drift.push(0.0);
    let mut max_gram: f64 = 0.0;
    for n in 0..n_max {
        let pair = |e: i64| -> Result<PhasePair> { source.pair(e) };
        let t = kernel.matrix(&pair(2 * n as i64)?, &pair(2 * n as i64 + 1)?);
        for v in vecs.iter_mut() {
            v.unit = &t * &v.unit;
            v.renormalize();
        }
        let d = pairs
            .iter()
            .zip(&w0)
            .map(|(&(a, b), w)| {
                let w_hat = wronskian(&vecs[a].unit, &vecs[b].unit);
                let w0_hat = w * (-(vecs[a].log_scale + vecs[b].log_scale)).exp();
                (w_hat - w0_hat).norm()
            })
            .fold(0.0, f64::max);
        if !d.is_finite() {
            return Err(Error::NumericFailure {
                step: n + 1,
                what: "non-finite Wronskian".into(),
            });
        }
        drift.push(d);
        let (f, top) = frame_of(&vecs);
        // F = Φ(n)·e^{−top}: ‖F*𝓛F − e^{−2·top}𝓛‖ / max(e^{−2·top}, ‖F‖₂²)
        let form = lorentz(l);
        let e2 = (-2.0 * top).exp();
        let r = frobenius(&(f.adjoint() * &form * &f - form * C64::new(e2, 0.0)));
        max_gram = max_gram.max(r / spectral_norm(&f).powi(2).max(e2));
    }
    let max_drift = drift.iter().copied().fold(0.0, f64::max);
    let slope = drift
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, d)| d / n as f64)
        .fold(0.0, f64::max);
    Ok(WronskianReport {
        l,
        z: [z.re, z.im],
        n_max,
        n_pairs: pairs.len(),
        drift,
        max_drift,
        slope,
        gram_residual_at_zero,
        max_gram_residual: max_gram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::zipper::{make_verblunsky, scalar_alpha};

    #[test]
    fn ipr_extremes() {
        let n = 10;
        let uniform = vec![C64::new(1.0, 0.0); n];
        assert!((block_ipr(&uniform, 1) - 1.0 / n as f64).abs() < 1e-15);
        let mut single = vec![C64::new(0.0, 0.0); 6];
        single[2] = c(0.3, 0.4);
        single[3] = c(-1.0, 0.0);
        assert!((block_ipr(&single, 2) - 1.0).abs() < 1e-15);
        assert!(block_ipr(&single, 1) < 1.0);
    }

    #[test]
    fn zero_alpha_identity_phases_is_permutation() {
        let vd = make_verblunsky(CMat::zeros(1, 1)).unwrap();
        let fz = assemble_finite(&vd, &vec![PhasePair::identity(1); 8], 8).unwrap();
        let rep = finite_spectrum(&fz).unwrap();
        assert_eq!(rep.eigenvalues.len(), 8);
        // odd sites move by +2, even by −2: two 4-cycles, λ⁴ = 1 twice each
        for k in 0..8 {
            let lam = rep.eigenvalue(k);
            assert!((lam.powi(4) - C64::new(1.0, 0.0)).norm() < 1e-12, "{lam}");
        }
        let mut counts = [0usize; 4];
        for k in 0..8 {
            let a = rep.eigenvalue(k).arg().rem_euclid(2.0 * std::f64::consts::PI);
            counts[((a / std::f64::consts::FRAC_PI_2).round() as usize) % 4] += 1;
        }
        assert_eq!(counts, [2, 2, 2, 2]);
        assert!(rep.max_circle_residual() <= 1e-12);
    }

    #[test]
    fn random_truncation_on_circle() {
        let vd = make_verblunsky(scalar_alpha(2, 0.5)).unwrap();
        let phases = phase_sequence(2, 20, SeedSpec::new(8)).unwrap();
        let rep = finite_spectrum(&assemble_finite(&vd, &phases, 20).unwrap()).unwrap();
        assert_eq!(rep.eigenvalues.len(), 40);
        assert!(rep.max_circle_residual() <= CIRCLE_TOL);
        assert!(rep.unitarity_residual <= 1e-10);
        assert!(rep.ipr.iter().all(|p| *p > 0.0 && *p <= 1.0 + 1e-12));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 41);
    }

    #[test]
    fn identical_inputs_give_unit_ratio() {
        let vd = make_verblunsky(scalar_alpha(1, 0.5)).unwrap();
        let r = localization_contrast(&vd, &vd, 20, 3, SeedSpec::new(1), Execution::Sequential).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.ratio_interval, [1.0, 1.0]);
    }

    #[test]
    fn zero_alpha_ipr_is_two_over_n() {
        let vd0 = make_verblunsky(CMat::zeros(1, 1)).unwrap();
        let r = localization_contrast(&vd0, &vd0, 40, 2, SeedSpec::new(4), Execution::Sequential).unwrap();
        assert!((r.median_ipr_zero - 2.0 / 40.0).abs() < 1e-10);
    }

    #[test]
    fn wronskian_zero_alpha() {
        let vd = make_verblunsky(CMat::zeros(2, 2)).unwrap();
        let r = wronskian_harness(&vd, C64::from_polar(1.0, 0.2), SeedSpec::new(3), 200, 3).unwrap();
        assert_eq!(r.gram_residual_at_zero, 0.0);
        assert!(r.max_drift <= 1e-12, "{}", r.max_drift);
        assert_eq!(r.drift.len(), 201);
    }

    #[test]
    fn wronskian_conserved() {
        let vd = make_verblunsky(scalar_alpha(2, 0.4)).unwrap();
        let r = wronskian_harness(&vd, C64::new(0.0, 1.0), SeedSpec::new(5), 1000, 4).unwrap();
        assert!(r.max_drift <= 1e-9, "{}", r.max_drift);
        assert!(r.max_gram_residual <= 1e-9, "{}", r.max_gram_residual);
    }
}
