//! Small dense complex linear algebra shared by every module.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `diag(𝟙_L, −𝟙_L)`.
pub fn lorentz(l: usize) -> CMat {
    CMat::from_fn(2 * l, 2 * l, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else if i < l {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    })
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Frobenius residual `‖M*M − 𝟙‖`.
pub fn unitarity_residual(m: &CMat) -> f64 {
    let n = m.ncols();
    frobenius(&(m.adjoint() * m - identity(n)))
}

/// Frobenius residual `‖M*𝓛M − 𝓛‖ / max(1, ‖M‖₂²)`.
///
/// The absolute residual of a product of Lorentz matrices scales with
/// `‖M‖₂²`, which grows exponentially along a cocycle, so the normalized
/// value is the quantity that rounding keeps small.
///
/// Evaluated on `M/‖M‖₂` so long cocycle products do not overflow.
pub fn lorentz_residual(m: &CMat) -> f64 {
    let l = m.nrows() / 2;
    let form = lorentz(l);
    let s = spectral_norm(m);
    if !(s > 1.0) {
        return frobenius(&(m.adjoint() * &form * m - &form));
    }
    let mh = m.unscale(s);
    frobenius(&(mh.adjoint() * &form * &mh - form.unscale(s * s)))
}

/// Unnormalized `‖M*𝓛M − 𝓛‖_F`.
pub fn lorentz_residual_abs(m: &CMat) -> f64 {
    let l = m.nrows() / 2;
    let form = lorentz(l);
    frobenius(&(m.adjoint() * &form * m - &form))
}

pub fn block(m: &CMat, bi: usize, bj: usize, l: usize) -> CMat {
    m.view((bi * l, bj * l), (l, l)).into_owned()
}

pub fn from_blocks(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let l = a.nrows();
    let mut m = CMat::zeros(2 * l, 2 * l);
    m.view_mut((0, 0), (l, l)).copy_from(a);
    m.view_mut((0, l), (l, l)).copy_from(b);
    m.view_mut((l, 0), (l, l)).copy_from(c);
    m.view_mut((l, l), (l, l)).copy_from(d);
    m
}

pub fn block_diag(a: &CMat, d: &CMat) -> CMat {
    let z = CMat::zeros(a.nrows(), a.nrows());
    from_blocks(a, &z, &z, d)
}

/// Hermitian square root and inverse square root of a Hermitian PSD matrix.
///
/// Eigenvalues are clamped at zero before the root. The inverse is `None`
/// when the smallest eigenvalue falls below `inv_floor`.
pub struct HermitianRoots {
    pub sqrt: CMat,
    pub inv_sqrt: Option<CMat>,
    pub min_eigenvalue: f64,
}

pub fn hermitian_roots(h: &CMat, inv_floor: f64) -> HermitianRoots {
    let n = h.nrows();
    let sym = (h + h.adjoint()).scale(0.5);
    // nalgebra's complex Hermitian solver loses digits on some dense inputs
    let evd = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigendecomposition of a finite matrix");
    let vecs = CMat::from_fn(n, n, |i, j| evd.U()[(i, j)]);
    let raw: Vec<f64> = (0..n).map(|k| evd.S()[k].re).collect();
    let vals: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
    let min_eigenvalue = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let apply = |f: &dyn Fn(f64) -> f64| -> CMat {
        let mut scaled = vecs.clone();
        for (j, &v) in vals.iter().enumerate() {
            let s = f(v);
            scaled.column_mut(j).scale_mut(s);
        }
        let m = scaled * vecs.adjoint();
        (&m + m.adjoint()).scale(0.5)
    };
    let sqrt = apply(&|v| v.sqrt());
    let inv_sqrt = (min_eigenvalue >= inv_floor).then(|| apply(&|v| 1.0 / v.sqrt()));
    HermitianRoots {
        sqrt,
        inv_sqrt,
        min_eigenvalue,
    }
}

pub(crate) fn to_faer(m: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn commutator(x: &CMat, y: &CMat) -> CMat {
    x * y - y * x
}

/// `E_{jk}` of size `n` (zero-based).
pub fn unit(n: usize, j: usize, k: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(j, k)] = C64::new(1.0, 0.0);
    m
}

/// Modified Gram–Schmidt with one reorthogonalization pass, in place.
///
/// Writes the diagonal of `R` (real, positive) into `diag` and leaves the
/// orthonormal factor in `q`. Returns `false` if a column collapses.
pub fn mgs_in_place(q: &mut CMat, diag: &mut [f64]) -> bool {
    let n = q.ncols();
    let rows = q.nrows();
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let mut r = C64::new(0.0, 0.0);
                for k in 0..rows {
                    r += q[(k, i)].conj() * q[(k, j)];
                }
                for k in 0..rows {
                    let qi = q[(k, i)];
                    q[(k, j)] -= r * qi;
                }
            }
        }
        let norm = (0..rows).map(|k| q[(k, j)].norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return false;
        }
        diag[j] = norm;
        let inv = 1.0 / norm;
        for k in 0..rows {
            q[(k, j)] *= inv;
        }
    }
    true
}
