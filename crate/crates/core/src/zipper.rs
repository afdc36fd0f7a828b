//! Verblunsky data, scattering events `S(α,U,V)` and periodic finite
//! truncations of `𝕌 = 𝕍𝕎`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::PhasePair;
use crate::linalg::{
    frobenius, from_blocks, hermitian_roots, singular_values, unitarity_residual, CMat, C64,
};

/// Floor on the smallest singular value of the `b` block.
pub const B_FLOOR: f64 = 1e-10;
/// Defect eigenvalues below this make `ρ⁻¹`, `ρ̃⁻¹` unavailable.
pub const DEFECT_FLOOR: f64 = 1e-14;
/// Largest matrix dimension assembled densely.
pub const DENSE_CAP: usize = 4096;

/// Constant Verblunsky coefficient with its defect operators
/// `ρ = (𝟙 − αα*)^½` and `ρ̃ = (𝟙 − α*α)^½`.
#[derive(Clone, Debug)]
pub struct VerblunskyData {
    alpha: CMat,
    rho: CMat,
    rho_tilde: CMat,
    inverses: Option<(CMat, CMat)>,
    min_defect: f64,
}

impl VerblunskyData {
    pub fn l(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn alpha(&self) -> &CMat {
        &self.alpha
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn rho_tilde(&self) -> &CMat {
        &self.rho_tilde
    }

    /// `(ρ⁻¹, ρ̃⁻¹)` from the same eigendecomposition as the roots.
    pub fn inverses(&self) -> Result<(&CMat, &CMat)> {
        match &self.inverses {
            Some((a, b)) => Ok((a, b)),
            None => Err(Error::DefectInversion {
                eigenvalue: self.min_defect,
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Residuals of `ρ² = 𝟙 − αα*`, `ρ̃² = 𝟙 − α*α` and `αρ̃ = ρα`.
    pub fn residuals(&self) -> [f64; 3] {
        let l = self.l();
        let id = CMat::identity(l, l);
        let a = &self.alpha;
        [
            frobenius(&(&self.rho * &self.rho - (&id - a * a.adjoint()))),
            frobenius(&(&self.rho_tilde * &self.rho_tilde - (&id - a.adjoint() * a))),
            frobenius(&(a * &self.rho_tilde - &self.rho * a)),
        ]
    }
}

pub fn make_verblunsky(alpha: CMat) -> Result<VerblunskyData> {
    if !alpha.is_square() || alpha.nrows() == 0 {
        return Err(Error::invalid("alpha must be a non-empty square matrix"));
    }
    let sigma_max = singular_values(&alpha)[0];
    if !(sigma_max < 1.0) {
        return Err(Error::ContractionViolation { sigma_max });
    }
    let l = alpha.nrows();
    let id = CMat::identity(l, l);
    let left = hermitian_roots(&(&id - &alpha * alpha.adjoint()), DEFECT_FLOOR);
    let right = hermitian_roots(&(&id - alpha.adjoint() * &alpha), DEFECT_FLOOR);
    let min_defect = left.min_eigenvalue.min(right.min_eigenvalue);
    let inverses = match (left.inv_sqrt, right.inv_sqrt) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    Ok(VerblunskyData {
        alpha,
        rho: left.sqrt,
        rho_tilde: right.sqrt,
        inverses,
        min_defect,
    })
}

/// `α = a·𝟙_L`.
pub fn scalar_alpha(l: usize, a: f64) -> CMat {
    CMat::identity(l, l) * C64::new(a, 0.0)
}

/// `α = diag(d)`, zero-padded or truncated to `L`.
pub fn diagonal_alpha(l: usize, d: &[f64]) -> CMat {
    CMat::from_fn(l, l, |i, j| {
        if i == j {
            C64::new(d.get(i).copied().unwrap_or(0.0), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// α as read from a JSON matrix file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AlphaFile {
    Scalar {
        #[serde(rename = "L")]
        l: usize,
        scalar: f64,
    },
    Dense {
        #[serde(rename = "L")]
        l: usize,
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
}

impl AlphaFile {
    pub fn l(&self) -> usize {
        match self {
            AlphaFile::Scalar { l, .. } | AlphaFile::Dense { l, .. } => *l,
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        match self {
            AlphaFile::Scalar { l, scalar } => {
                if *l == 0 {
                    return Err(Error::invalid("L must be positive"));
                }
                Ok(scalar_alpha(*l, *scalar))
            }
            AlphaFile::Dense { l, re, im } => {
                let l = *l;
                let shape_ok = |rows: &Vec<Vec<f64>>| {
                    rows.len() == l && rows.iter().all(|r| r.len() == l)
                };
                if l == 0 || !shape_ok(re) || !im.as_ref().map_or(true, shape_ok) {
                    return Err(Error::invalid(format!("alpha file must hold {l}x{l} arrays")));
                }
                Ok(CMat::from_fn(l, l, |i, j| {
                    let imag = im.as_ref().map_or(0.0, |m| m[i][j]);
                    C64::new(re[i][j], imag)
                }))
            }
        }
    }

    pub fn from_matrix(alpha: &CMat) -> Self {
        let l = alpha.nrows();
        AlphaFile::Dense {
            l,
            re: (0..l).map(|i| (0..l).map(|j| alpha[(i, j)].re).collect()).collect(),
            im: Some((0..l).map(|i| (0..l).map(|j| alpha[(i, j)].im).collect()).collect()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// One event `S = [[a, b], [c, d]] ∈ U(2L)_inv`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringEvent {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
}

impl ScatteringEvent {
    /// Splits a `2L × 2L` matrix, checking unitarity and `b`-invertibility.
    pub fn from_matrix(s: &CMat) -> Result<Self> {
        if !s.is_square() || s.nrows() % 2 != 0 || s.nrows() == 0 {
            return Err(Error::invalid("scattering matrix must be 2L x 2L"));
        }
        let l = s.nrows() / 2;
        let ev = ScatteringEvent {
            a: s.view((0, 0), (l, l)).into_owned(),
            b: s.view((0, l), (l, l)).into_owned(),
            c: s.view((l, 0), (l, l)).into_owned(),
            d: s.view((l, l), (l, l)).into_owned(),
        };
        ev.validate(None)?;
        Ok(ev)
    }

    pub fn l(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> CMat {
        from_blocks(&self.a, &self.b, &self.c, &self.d)
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix())
    }

    pub fn b_min_singular(&self) -> f64 {
        singular_values(&self.b).last().copied().unwrap_or(0.0)
    }

    pub fn validate(&self, event: Option<i64>) -> Result<()> {
        let r = self.unitarity_residual();
        if r > 1e-12 {
            return Err(Error::invalid(format!("scattering event not unitary (residual {r:e})")));
        }
        let sigma_min = self.b_min_singular();
        if sigma_min <= B_FLOOR {
            return Err(Error::SingularBlock { event, sigma_min });
        }
        Ok(())
    }

    /// `z·S`, block by block.
    pub fn scaled(&self, z: C64) -> ScatteringEvent {
        ScatteringEvent {
            a: &self.a * z,
            b: &self.b * z,
            c: &self.c * z,
            d: &self.d * z,
        }
    }
}

/// `S(α,U,V) = [[α, ρU], [Vρ̃, −Vα*U]]`.
pub fn build_scattering(vd: &VerblunskyData, phases: &PhasePair) -> Result<ScatteringEvent> {
    let l = vd.l();
    if phases.u.dim() != l || phases.v.dim() != l {
        return Err(Error::invalid(format!(
            "phase dimensions ({}, {}) do not match L = {l}",
            phases.u.dim(),
            phases.v.dim()
        )));
    }
    let u = phases.u.matrix();
    let v = phases.v.matrix();
    let ev = ScatteringEvent {
        a: vd.alpha.clone(),
        b: &vd.rho * u,
        c: v * &vd.rho_tilde,
        d: -(v * vd.alpha.adjoint() * u),
    };
    ev.validate(None)?;
    Ok(ev)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Periodic truncation on `n_blocks` sites of `ℂ^L`.
#[derive(Clone, Debug)]
pub struct FiniteZipper {
    pub l: usize,
    pub n_blocks: usize,
    pub events: Vec<ScatteringEvent>,
    pub boundary: Boundary,
    pub v_op: CMat,
    pub w_op: CMat,
    pub u_op: CMat,
}

impl FiniteZipper {
    pub fn dim(&self) -> usize {
        self.l * self.n_blocks
    }
}

// Writes `s` at block offset `offset` (in units of scalar rows), wrapping mod n.
fn place_event(target: &mut CMat, s: &CMat, offset: usize) {
    let n = target.nrows();
    let m = s.nrows();
    for i in 0..m {
        for j in 0..m {
            target[((offset + i) % n, (offset + j) % n)] = s[(i, j)];
        }
    }
}

/// Assembles `V_op`, `W_op` and `U_op = V_op·W_op`.
///
/// Event `2m` sits on the diagonal of `V_op` at rows `2mL..(2m+2)L`; event
/// `2m+1` sits in `W_op` shifted by `L`, the last one wrapping to the corner.
pub fn assemble_finite(
    vd: &VerblunskyData,
    phases: &[PhasePair],
    n_blocks: usize,
) -> Result<FiniteZipper> {
    if n_blocks % 2 != 0 {
        return Err(Error::invalid("periodic closure requires an even block count"));
    }
    if n_blocks < 4 {
        return Err(Error::invalid("n_blocks must be at least 4"));
    }
    if phases.len() != n_blocks {
        return Err(Error::invalid(format!(
            "expected {n_blocks} phase pairs, got {}",
            phases.len()
        )));
    }
    let l = vd.l();
    let dim = n_blocks * l;
    if dim > DENSE_CAP {
        return Err(Error::invalid(format!(
            "dimension {dim} exceeds the dense cap {DENSE_CAP}"
        )));
    }
    let events = phases
        .iter()
        .enumerate()
        .map(|(n, p)| {
            build_scattering(vd, p).map_err(|e| match e {
                Error::SingularBlock { sigma_min, .. } => Error::SingularBlock {
                    event: Some(n as i64),
                    sigma_min,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut v_op = CMat::zeros(dim, dim);
    let mut w_op = CMat::zeros(dim, dim);
    for (n, ev) in events.iter().enumerate() {
        let s = ev.matrix();
        if n % 2 == 0 {
            place_event(&mut v_op, &s, n * l);
        } else {
            place_event(&mut w_op, &s, n * l);
        }
    }
    let u_op = &v_op * &w_op;
    Ok(FiniteZipper {
        l,
        n_blocks,
        events,
        boundary: Boundary::Periodic,
        v_op,
        w_op,
        u_op,
    })
}
