//! Haar-distributed unitaries and the i.i.d. phase pairs `(U_n, V_n)`.
//!
//! Randomness is counter based: a [`SeedSpec`] names a ChaCha stream by
//! `(master_seed, stream_id)`, and per-site or per-task streams are obtained
//! by hashing a component index into the stream id. Any worker can therefore
//! regenerate any site without touching a shared generator.

use nalgebra::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{unitarity_residual, CMat, C64};

/// Tolerance on `‖U*U − 𝟙‖_F` for every emitted unitary.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

// SplitMix64 finalizer.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_id: 0,
        }
    }

    /// Child stream for a component (site index, task index, ...).
    pub fn derive(&self, component: u64) -> SeedSpec {
        SeedSpec {
            master_seed: self.master_seed,
            stream_id: mix(self.stream_id ^ mix(component)),
        }
    }

    /// Child stream for a signed lattice index.
    pub fn derive_site(&self, site: i64) -> SeedSpec {
        // zigzag keeps negative and positive sites distinct
        let z = ((site << 1) ^ (site >> 63)) as u64;
        self.derive(z)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// An `L × L` unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMat);

impl UnitaryMatrix {
    /// Wraps `m` after checking `‖m*m − 𝟙‖_F ≤ 1e-12`.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("unitary must be square"));
        }
        let r = unitarity_residual(&m);
        if r > UNITARY_TOL {
            return Err(Error::invalid(format!("matrix not unitary (residual {r:e})")));
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn identity(l: usize) -> Self {
        UnitaryMatrix(CMat::identity(l, l))
    }

    /// Scalar multiple of the identity, `e^{iθ}𝟙`.
    pub fn phase(l: usize, theta: f64) -> Self {
        UnitaryMatrix(CMat::identity(l, l) * C64::from_polar(1.0, theta))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn residual(&self) -> f64 {
        unitarity_residual(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePair {
    pub u: UnitaryMatrix,
    pub v: UnitaryMatrix,
}

impl PhasePair {
    pub fn identity(l: usize) -> Self {
        PhasePair {
            u: UnitaryMatrix::identity(l),
            v: UnitaryMatrix::identity(l),
        }
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn sample<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<Self> {
        let u = sample_haar(l, rng)?;
        let v = sample_haar(l, rng)?;
        Ok(PhasePair { u, v })
    }
}

/// Ginibre QR with the `R`-diagonal phase correction.
pub fn sample_haar<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if l == 0 {
        return Err(Error::invalid("unitary dimension must be positive"));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMat::from_fn(l, l, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..l {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("degenerate Ginibre draw (zero R diagonal)"));
        }
        let phase = rjj / n;
        for x in q.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    Ok(UnitaryMatrix(q))
}

/// A Haar unitary, deterministic in `seed`.
pub fn haar_unitary(l: usize, seed: SeedSpec) -> Result<UnitaryMatrix> {
    let mut rng = seed.rng();
    sample_haar(l, &mut rng)
}

/// Pairs for events `0..n_sites`; event `n` depends only on `(seed, n)`.
pub fn phase_sequence(l: usize, n_sites: usize, seed: SeedSpec) -> Result<Vec<PhasePair>> {
    if n_sites == 0 {
        return Err(Error::invalid("n_sites must be positive"));
    }
    let stream = HaarPhases::new(l, seed)?;
    (0..n_sites as i64).map(|n| stream.pair(n)).collect()
}

/// Read-only access to the phase pair of scattering event `n`.
pub trait PhaseSource {
    fn dim(&self) -> usize;
    fn pair(&self, event: i64) -> Result<PhasePair>;
}

/// Unbounded Haar phases indexed by event, counter based.
#[derive(Clone, Copy, Debug)]
pub struct HaarPhases {
    l: usize,
    seed: SeedSpec,
}

impl HaarPhases {
    pub fn new(l: usize, seed: SeedSpec) -> Result<Self> {
        if l == 0 {
            return Err(Error::invalid("L must be positive"));
        }
        Ok(HaarPhases { l, seed })
    }
}

impl PhaseSource for HaarPhases {
    fn dim(&self) -> usize {
        self.l
    }

    fn pair(&self, event: i64) -> Result<PhasePair> {
        let mut rng = self.seed.derive_site(event).rng();
        PhasePair::sample(self.l, &mut rng)
    }
}

/// A finite window of pairs covering events `first..first + len`.
#[derive(Clone, Debug)]
pub struct PhaseWindow {
    pub first: i64,
    pub pairs: Vec<PhasePair>,
}

impl PhaseSource for PhaseWindow {
    fn dim(&self) -> usize {
        self.pairs.first().map_or(0, PhasePair::dim)
    }

    fn pair(&self, event: i64) -> Result<PhasePair> {
        let idx = event - self.first;
        if idx < 0 || idx as usize >= self.pairs.len() {
            return Err(Error::invalid(format!(
                "phase stream covers events {}..{}, event {event} requested",
                self.first,
                self.first + self.pairs.len() as i64
            )));
        }
        Ok(self.pairs[idx as usize].clone())
    }
}

/// `τ^m`: event `n` of the shifted stream is event `n + 2m` of the inner one.
pub struct Shifted<'a, S: ?Sized> {
    pub inner: &'a S,
    pub steps: i64,
}

impl<S: PhaseSource + ?Sized> PhaseSource for Shifted<'_, S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn pair(&self, event: i64) -> Result<PhasePair> {
        self.inner.pair(event + 2 * self.steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_unitaries_have_unit_modulus() {
        for s in 0..50 {
            let u = haar_unitary(1, SeedSpec::new(s)).unwrap();
            assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn four_by_four_is_unitary() {
        for s in 0..20 {
            let u = haar_unitary(4, SeedSpec::new(s).derive(3)).unwrap();
            assert!(u.residual() <= 1e-12);
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            haar_unitary(0, SeedSpec::new(1)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(phase_sequence(2, 0, SeedSpec::new(1)).is_err());
    }

    #[test]
    fn determinism_and_independence() {
        let a = phase_sequence(2, 3, SeedSpec::new(11)).unwrap();
        let b = phase_sequence(2, 3, SeedSpec::new(11)).unwrap();
        assert_eq!(a, b);
        let c = phase_sequence(2, 3, SeedSpec::new(12)).unwrap();
        for (x, y) in a.iter().zip(&c) {
            for (p, q) in x.u.matrix().iter().zip(y.u.matrix().iter()) {
                assert_ne!(p, q);
            }
            for (p, q) in x.v.matrix().iter().zip(y.v.matrix().iter()) {
                assert_ne!(p, q);
            }
        }
    }

    #[test]
    fn site_depends_only_on_index() {
        let seq = phase_sequence(2, 5, SeedSpec::new(5)).unwrap();
        let stream = HaarPhases::new(2, SeedSpec::new(5)).unwrap();
        assert_eq!(stream.pair(3).unwrap(), seq[3]);
        assert_ne!(stream.pair(-3).unwrap(), seq[3]);
    }

    #[test]
    fn window_bounds() {
        let w = PhaseWindow {
            first: -2,
            pairs: vec![PhasePair::identity(1); 4],
        };
        assert!(w.pair(-2).is_ok());
        assert!(w.pair(1).is_ok());
        assert!(w.pair(2).is_err());
        assert!(w.pair(-3).is_err());
        let s = Shifted { inner: &w, steps: 1 };
        assert!(s.pair(-1).is_ok());
        assert!(s.pair(0).is_err());
    }

    #[test]
    fn sampled_matrices_are_bitwise_reproducible() {
        let s = SeedSpec::new(99).derive(7);
        assert_eq!(haar_unitary(3, s).unwrap(), haar_unitary(3, s).unwrap());
    }

    #[test]
    fn low_moments_match_haar() {
        // E|tr U|² = 1 and E|U₁₁|⁴ = 2/(L(L+1)); uncorrected QR phases break both
        let l = 3;
        let n = 20_000;
        let mut tr2 = 0.0;
        let mut m4 = 0.0;
        let mut tr = C64::new(0.0, 0.0);
        for k in 0..n {
            let u = haar_unitary(l, SeedSpec::new(5).derive(k)).unwrap();
            let t = u.matrix().trace();
            tr += t;
            tr2 += t.norm_sqr();
            m4 += u.matrix()[(0, 0)].norm_sqr().powi(2);
        }
        let n = n as f64;
        assert!((tr / n).norm() < 0.03, "{}", tr / n);
        assert!((tr2 / n - 1.0).abs() < 0.05, "{}", tr2 / n);
        assert!((m4 / n - 2.0 / 12.0).abs() < 0.01, "{}", m4 / n);
    }
}
