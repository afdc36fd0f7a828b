//! Lorentz form, the map `φ: U(2L)_inv → U(L,L)`, transfer matrices, the
//! cocycle `Φ(z,ω,n)` and the Wronskian.
//!
//! Sign convention: the constituent matrices are
//!
//! ```text
//! T̂₀(z) = [[z⁻¹ρ̃⁻¹, −ρ̃⁻¹α*], [−αρ̃⁻¹, zρ⁻¹]],   T̂₁ = T̂₀(1)
//! ```
//!
//! which is what `φ(z⁻¹S(α,U,V)) = diag(V, U*)·T̂₀(z)` gives when `φ` is
//! evaluated on the events of the operator. The form with `+α` in the
//! off-diagonal blocks is the `𝓛`-conjugate, `𝓛T̂𝓛`, and has the same
//! Lyapunov spectrum.

use crate::error::{Error, Result};
use crate::haar::{PhasePair, PhaseSource};
use crate::linalg::{
    frobenius, from_blocks, lorentz, lorentz_residual, singular_values, CMat, CVec, C64,
};
use crate::zipper::{build_scattering, ScatteringEvent, VerblunskyData, B_FLOOR};

/// Default tolerance for single Lorentz matrices.
pub const LORENTZ_TOL: f64 = 1e-10;
/// Steps between Lorentz re-verifications along a cocycle.
pub const DRIFT_CHECK_PERIOD: usize = 50;
/// Normalized residual beyond which a cocycle is abandoned.
pub const DRIFT_ABORT: f64 = 1e-6;
/// Constant `c` in the accumulated tolerance `c·|n|·ε` for products.
pub const DRIFT_CONSTANT: f64 = 64.0;

pub fn accumulated_tolerance(steps: usize) -> f64 {
    (DRIFT_CONSTANT * steps.max(1) as f64 * f64::EPSILON).max(1e-13)
}

/// The form `𝓛 = diag(𝟙_L, −𝟙_L)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LorentzForm {
    pub l: usize,
}

impl LorentzForm {
    pub fn matrix(&self) -> CMat {
        lorentz(self.l)
    }

    pub fn dim(&self) -> usize {
        2 * self.l
    }
}

/// A `2L × 2L` matrix in `U(L,L)` up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzMatrix(CMat);

impl LorentzMatrix {
    /// Checks `‖M*𝓛M − 𝓛‖ ≤ tol` (normalized, see [`lorentz_residual`]).
    pub fn new(m: CMat, tol: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() % 2 != 0 {
            return Err(Error::invalid("Lorentz matrix must be 2L x 2L"));
        }
        let r = lorentz_residual(&m);
        if !(r <= tol) {
            return Err(Error::invalid(format!("matrix not in U(L,L) (residual {r:e})")));
        }
        Ok(LorentzMatrix(m))
    }

    pub(crate) fn unchecked(m: CMat) -> Self {
        LorentzMatrix(m)
    }

    pub fn identity(l: usize) -> Self {
        LorentzMatrix(CMat::identity(2 * l, 2 * l))
    }

    pub fn l(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn residual(&self) -> f64 {
        lorentz_residual(&self.0)
    }

    /// `M⁻¹ = 𝓛M*𝓛`.
    pub fn inverse(&self) -> LorentzMatrix {
        let mut m = self.0.adjoint();
        let l = self.l();
        for i in 0..2 * l {
            for j in 0..2 * l {
                if (i < l) != (j < l) {
                    m[(i, j)] = -m[(i, j)];
                }
            }
        }
        LorentzMatrix(m)
    }

    pub fn mul(&self, rhs: &LorentzMatrix) -> LorentzMatrix {
        LorentzMatrix(&self.0 * &rhs.0)
    }
}

/// `φ(S) = [[c − d b⁻¹ a, d b⁻¹], [−b⁻¹ a, b⁻¹]]`.
pub fn phi_map(s: &ScatteringEvent, event: Option<i64>) -> Result<LorentzMatrix> {
    let m = phi_raw(s, event)?;
    LorentzMatrix::new(m, LORENTZ_TOL).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::invalid(format!("{msg} at event {event:?}")),
        other => other,
    })
}

/// The `φ` formula without the membership check.
pub fn phi_raw(s: &ScatteringEvent, event: Option<i64>) -> Result<CMat> {
    let sigma_min = singular_values(&s.b).last().copied().unwrap_or(0.0);
    if !(sigma_min > B_FLOOR) {
        return Err(Error::SingularBlock { event, sigma_min });
    }
    let b_inv = s
        .b
        .clone()
        .try_inverse()
        .ok_or(Error::SingularBlock { event, sigma_min })?;
    let d_binv = &s.d * &b_inv;
    let binv_a = &b_inv * &s.a;
    Ok(from_blocks(&(&s.c - &d_binv * &s.a), &d_binv, &(-binv_a), &b_inv))
}

pub fn check_unit_circle(z: C64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() || (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("spectral parameter {z} is not on the unit circle")));
    }
    Ok(())
}

/// `(T̂₀(z), T̂₁)`.
pub fn constituent_matrices(
    vd: &VerblunskyData,
    z: C64,
) -> Result<(LorentzMatrix, LorentzMatrix)> {
    check_unit_circle(z)?;
    let (rho_inv, rho_t_inv) = vd.inverses()?;
    let alpha = vd.alpha();
    let upper = -(rho_t_inv * alpha.adjoint());
    let lower = -(alpha * rho_t_inv);
    let t0 = from_blocks(&(rho_t_inv * z.inv()), &upper, &lower, &(rho_inv * z));
    let t1 = from_blocks(rho_t_inv, &upper, &lower, rho_inv);
    Ok((
        LorentzMatrix::new(t0, LORENTZ_TOL)?,
        LorentzMatrix::new(t1, LORENTZ_TOL)?,
    ))
}

/// Left multiplication by `diag(V, U*)` in place.
pub(crate) fn apply_phase_rows(m: &mut CMat, p: &PhasePair, scratch: &mut CMat) {
    let l = p.dim();
    let v = p.v.matrix();
    let u = p.u.matrix();
    let cols = m.ncols();
    scratch.copy_from(m);
    for j in 0..cols {
        for i in 0..l {
            let mut top = C64::new(0.0, 0.0);
            let mut bot = C64::new(0.0, 0.0);
            for k in 0..l {
                top += v[(i, k)] * scratch[(k, j)];
                // (U*)_{ik} = conj(U_{ki})
                bot += u[(k, i)].conj() * scratch[(l + k, j)];
            }
            m[(i, j)] = top;
            m[(l + i, j)] = bot;
        }
    }
}

/// Precomputed `T̂₀(z)`, `T̂₁` for repeated transfer steps at fixed `(α, z)`.
#[derive(Clone, Debug)]
pub struct TransferKernel {
    pub l: usize,
    pub z: C64,
    t0: CMat,
    t1: CMat,
}

impl TransferKernel {
    pub fn new(vd: &VerblunskyData, z: C64) -> Result<Self> {
        let (t0, t1) = constituent_matrices(vd, z)?;
        Ok(TransferKernel {
            l: vd.l(),
            z,
            t0: t0.into_inner(),
            t1: t1.into_inner(),
        })
    }

    /// `m ← T·m` with `T = diag(V₀,U₀*)·T̂₀(z)·diag(V₁,U₁*)·T̂₁`.
    pub fn apply(&self, m: &mut CMat, p0: &PhasePair, p1: &PhasePair, scratch: &mut CMat) {
        scratch.gemm(C64::new(1.0, 0.0), &self.t1, m, C64::new(0.0, 0.0));
        m.copy_from(scratch);
        apply_phase_rows(m, p1, scratch);
        scratch.gemm(C64::new(1.0, 0.0), &self.t0, m, C64::new(0.0, 0.0));
        m.copy_from(scratch);
        apply_phase_rows(m, p0, scratch);
    }

    pub fn matrix(&self, p0: &PhasePair, p1: &PhasePair) -> CMat {
        let n = 2 * self.l;
        let mut m = CMat::identity(n, n);
        let mut scratch = CMat::zeros(n, n);
        self.apply(&mut m, p0, p1, &mut scratch);
        m
    }
}

/// The four-factor transfer matrix across events `(2k, 2k+1)`.
pub fn transfer_matrix(
    vd: &VerblunskyData,
    z: C64,
    site_phases: (&PhasePair, &PhasePair),
) -> Result<LorentzMatrix> {
    let kernel = TransferKernel::new(vd, z)?;
    let (p0, p1) = site_phases;
    if p0.dim() != vd.l() || p1.dim() != vd.l() {
        return Err(Error::invalid("phase dimensions do not match L"));
    }
    LorentzMatrix::new(kernel.matrix(p0, p1), LORENTZ_TOL)
}

/// `φ(z⁻¹S₀)·φ(S₁)` with the events built from the two phase pairs.
pub fn transfer_via_phi(
    vd: &VerblunskyData,
    z: C64,
    site_phases: (&PhasePair, &PhasePair),
) -> Result<LorentzMatrix> {
    check_unit_circle(z)?;
    let s0 = build_scattering(vd, site_phases.0)?;
    let s1 = build_scattering(vd, site_phases.1)?;
    Ok(phi_map(&s0.scaled(z.inv()), Some(0))?.mul(&phi_map(&s1, Some(1))?))
}

fn site_transfer<S: PhaseSource + ?Sized>(
    kernel: &TransferKernel,
    source: &S,
    site: i64,
) -> Result<CMat> {
    if source.dim() != kernel.l {
        return Err(Error::invalid("phase stream dimension does not match L"));
    }
    let p0 = source.pair(2 * site)?;
    let p1 = source.pair(2 * site + 1)?;
    Ok(kernel.matrix(&p0, &p1))
}

/// `Φ(z,ω,n)`: `T_{n−1}···T₀` for `n > 0`, `𝟙` for `n = 0`,
/// `T_n⁻¹···T_{−1}⁻¹` for `n < 0`.
pub fn cocycle<S: PhaseSource + ?Sized>(
    vd: &VerblunskyData,
    z: C64,
    source: &S,
    n: i64,
) -> Result<LorentzMatrix> {
    let kernel = TransferKernel::new(vd, z)?;
    cocycle_with(&kernel, source, n)
}

pub fn cocycle_with<S: PhaseSource + ?Sized>(
    kernel: &TransferKernel,
    source: &S,
    n: i64,
) -> Result<LorentzMatrix> {
    let dim = 2 * kernel.l;
    let mut acc = CMat::identity(dim, dim);
    let steps = n.unsigned_abs() as usize;
    for k in 0..steps {
        if n > 0 {
            let t = site_transfer(kernel, source, k as i64)?;
            acc = t * acc;
        } else {
            let site = -(k as i64) - 1;
            let t = LorentzMatrix::unchecked(site_transfer(kernel, source, site)?);
            acc = t.inverse().0 * acc;
        }
        if (k + 1) % DRIFT_CHECK_PERIOD == 0 {
            let r = lorentz_residual(&acc);
            if !(r <= DRIFT_ABORT) {
                return Err(Error::LorentzDrift {
                    step: k + 1,
                    residual: r,
                });
            }
        }
    }
    Ok(LorentzMatrix(acc))
}

/// `W(x, y) = x*𝓛y` on stacked pairs `(φ_n, φ_{n+1})`.
pub fn wronskian(x: &CVec, y: &CVec) -> C64 {
    let l = x.len() / 2;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..x.len() {
        let s = if i < l { 1.0 } else { -1.0 };
        acc += x[i].conj() * y[i] * s;
    }
    acc
}

/// `Φ(z,·,n)·initial` for `n = 0..=n_max`.
#[derive(Clone, Debug)]
pub struct SolutionPath {
    pub states: Vec<CVec>,
}

impl SolutionPath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn propagate_solution<S: PhaseSource + ?Sized>(
    vd: &VerblunskyData,
    z: C64,
    source: &S,
    initial: &CVec,
    n_max: usize,
) -> Result<SolutionPath> {
    let kernel = TransferKernel::new(vd, z)?;
    if initial.len() != 2 * kernel.l {
        return Err(Error::invalid("initial vector must have length 2L"));
    }
    let mut states = Vec::with_capacity(n_max + 1);
    let mut x = initial.clone();
    states.push(x.clone());
    for site in 0..n_max {
        let t = site_transfer(&kernel, source, site as i64)?;
        x = t * x;
        if x.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NumericFailure {
                step: site + 1,
                what: "solution overflow".into(),
            });
        }
        states.push(x.clone());
    }
    Ok(SolutionPath { states })
}

/// Relative distance `‖a − b‖_F / max(1, ‖b‖_F)`.
pub fn relative_distance(a: &CMat, b: &CMat) -> f64 {
    frobenius(&(a - b)) / frobenius(b).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{phase_sequence, HaarPhases, PhaseWindow, SeedSpec};
    use crate::linalg::{c, identity, I};
    use crate::zipper::{make_verblunsky, scalar_alpha};

    fn vd(l: usize, a: f64) -> VerblunskyData {
        make_verblunsky(scalar_alpha(l, a)).unwrap()
    }

    #[test]
    fn phi_of_swap_is_identity() {
        let v = vd(2, 0.0);
        let s = build_scattering(&v, &PhasePair::identity(2)).unwrap();
        assert_eq!(phi_map(&s, None).unwrap().matrix(), &identity(4));
    }

    #[test]
    fn phi_scalar_example() {
        // independent scalar evaluation of c − d a / b, d / b, −a / b, 1 / b
        let (a, b, cc, d) = (0.5, 0.75f64.sqrt(), 0.75f64.sqrt(), -0.5);
        let want = [[cc - d * a / b, d / b], [-a / b, 1.0 / b]];
        assert!((want[0][0] - 1.154701).abs() < 1e-6);
        assert!((want[0][1] + 0.577350).abs() < 1e-6);
        let s = build_scattering(&vd(1, 0.5), &PhasePair::identity(1)).unwrap();
        let m = phi_map(&s, None).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.matrix()[(i, j)] - c(want[i][j], 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn phi_singular_block_reports_event() {
        let s = ScatteringEvent {
            a: identity(1),
            b: CMat::zeros(1, 1),
            c: CMat::zeros(1, 1),
            d: identity(1),
        };
        match phi_map(&s, Some(7)) {
            Err(Error::SingularBlock { event, .. }) => assert_eq!(event, Some(7)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constituents_at_zero_alpha() {
        let z = C64::from_polar(1.0, 0.3);
        let (t0, t1) = constituent_matrices(&vd(2, 0.0), z).unwrap();
        let mut want = CMat::zeros(4, 4);
        for i in 0..2 {
            want[(i, i)] = z.conj();
            want[(i + 2, i + 2)] = z;
        }
        assert!(frobenius(&(t0.matrix() - want)) < 1e-15);
        assert_eq!(t1.matrix(), &identity(4));
    }

    #[test]
    fn constituents_scalar_values() {
        let (t0, t1) = constituent_matrices(&vd(1, 0.5), c(1.0, 0.0)).unwrap();
        let k = 1.0 / 0.75f64.sqrt();
        let want = [[k, -0.5 * k], [-0.5 * k, k]];
        for m in [&t0, &t1] {
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m.matrix()[(i, j)] - c(want[i][j], 0.0)).norm() < 1e-12);
                }
            }
        }
        assert!((want[0][0] - 1.154701).abs() < 1e-6 && (want[0][1] + 0.577350).abs() < 1e-6);
    }

    #[test]
    fn off_circle_rejected() {
        assert!(constituent_matrices(&vd(1, 0.5), c(1.1, 0.0)).is_err());
        assert!(constituent_matrices(&vd(1, 0.5), c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn trivial_transfer() {
        let p = PhasePair::identity(3);
        let t = transfer_matrix(&vd(3, 0.0), c(1.0, 0.0), (&p, &p)).unwrap();
        assert_eq!(t.matrix(), &identity(6));
    }

    #[test]
    fn transfer_agrees_with_phi_route() {
        let v = vd(2, 0.4);
        let pairs = phase_sequence(2, 20, SeedSpec::new(3)).unwrap();
        for (k, w) in pairs.chunks(2).enumerate() {
            let z = C64::from_polar(1.0, 0.7 * k as f64);
            let a = transfer_matrix(&v, z, (&w[0], &w[1])).unwrap();
            let b = transfer_via_phi(&v, z, (&w[0], &w[1])).unwrap();
            assert!(frobenius(&(a.matrix() - b.matrix())) <= 1e-11);
            assert!(a.residual() <= 1e-11);
            let inv = a.inverse();
            assert!(frobenius(&(inv.matrix() * a.matrix() - identity(4))) <= 1e-11);
        }
    }

    #[test]
    fn cocycle_zero_is_identity() {
        let src = HaarPhases::new(2, SeedSpec::new(1)).unwrap();
        let m = cocycle(&vd(2, 0.3), I, &src, 0).unwrap();
        assert_eq!(m.matrix(), &identity(4));
    }

    #[test]
    fn cocycle_property() {
        use crate::haar::Shifted;
        let v = vd(2, 0.5);
        let src = HaarPhases::new(2, SeedSpec::new(17)).unwrap();
        let z = C64::from_polar(1.0, 1.1);
        for &(n, m) in &[(3i64, 5i64), (-4, 7), (6, -2), (-3, -5), (20, 20), (-20, 20), (0, -9)] {
            let shifted = Shifted { inner: &src, steps: m };
            let a = cocycle(&v, z, &shifted, n).unwrap();
            let b = cocycle(&v, z, &src, m).unwrap();
            let lhs = a.mul(&b);
            let rhs = cocycle(&v, z, &src, n + m).unwrap();
            // forward error of a product scales with the factor norms
            let scale = frobenius(a.matrix()) * frobenius(b.matrix());
            let err = frobenius(&(lhs.matrix() - rhs.matrix())) / scale;
            assert!(err <= 1e-9, "n={n} m={m} err={err}");
        }
    }

    #[test]
    fn cocycle_stays_lorentz() {
        let v = vd(2, 0.5);
        let src = HaarPhases::new(2, SeedSpec::new(2)).unwrap();
        let m = cocycle(&v, I, &src, 50).unwrap();
        assert!(m.residual() <= 1e-8);
        let m = cocycle(&v, I, &src, -50).unwrap();
        assert!(m.residual() <= 1e-8);
    }

    #[test]
    fn cocycle_needs_enough_stream() {
        let w = PhaseWindow {
            first: 0,
            pairs: vec![PhasePair::identity(1); 6],
        };
        let v = vd(1, 0.5);
        assert!(cocycle(&v, I, &w, 3).is_ok());
        assert!(matches!(cocycle(&v, I, &w, 4), Err(Error::InvalidArgument(_))));
        assert!(cocycle(&v, I, &w, -1).is_err());
    }

    #[test]
    fn wronskian_basic_properties() {
        let x = CVec::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -0.7), c(2.0, 0.0)]);
        let y = CVec::from_vec(vec![c(0.2, 0.0), c(1.0, 1.0), c(-1.0, 0.5), c(0.0, 0.4)]);
        assert_eq!(wronskian(&x, &x).im, 0.0);
        assert!((wronskian(&x, &y) - wronskian(&y, &x).conj()).norm() < 1e-15);
        let mut e1 = CVec::zeros(4);
        e1[0] = c(1.0, 0.0);
        let mut e3 = CVec::zeros(4);
        e3[2] = c(1.0, 0.0);
        assert_eq!(wronskian(&e1, &e3), c(0.0, 0.0));
    }

    #[test]
    fn zero_initial_stays_zero() {
        let src = HaarPhases::new(2, SeedSpec::new(5)).unwrap();
        let p = propagate_solution(&vd(2, 0.5), I, &src, &CVec::zeros(4), 30).unwrap();
        assert_eq!(p.len(), 31);
        assert!(p.states.iter().all(|s| s.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn unitary_cocycle_preserves_norm() {
        let src = HaarPhases::new(2, SeedSpec::new(5)).unwrap();
        let x0 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.5), c(-1.0, 0.0)]);
        let p = propagate_solution(&vd(2, 0.0), C64::from_polar(1.0, 2.0), &src, &x0, 200).unwrap();
        let n0 = x0.norm();
        for s in &p.states {
            assert!((s.norm() - n0).abs() <= 1e-10);
        }
    }
}
