//! Lie-algebra certification that the transfer group is all of `U(L,L)`.
//!
//! Elements of `u(L,L) = {T : T*𝓛 + 𝓛T = 0}` are handled as real vectors of
//! length `8L²` (real and imaginary parts of every entry), since the closure
//! is a real Lie algebra.
//!
//! Sign convention: with `T̂₁ = [[ρ̃⁻¹, −ρ̃⁻¹α*], [−αρ̃⁻¹, ρ⁻¹]]` the
//! off-diagonal part of `i·T̂₁⁻¹·diag(𝟙,0)·T̂₁` is `i·[[0, −X], [X*, 0]]` with
//! `X = ρ̃⁻²α*`. Every bracket identity below is stated for that element.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{
    block, block_diag, commutator, frobenius, from_blocks, lorentz, singular_values, unit,
    unitarity_residual, CMat, C64, I,
};
use crate::transfer::{check_unit_circle, constituent_matrices, LorentzMatrix};
use crate::zipper::VerblunskyData;

pub const MEMBERSHIP_TOL: f64 = 1e-11;
/// Relative rank tolerance on the real vectorization.
pub const RANK_TOL: f64 = 1e-9;
pub const BRACKET_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ROUNDS: usize = 8;
/// Pairwise relative gap for "distinct" singular values.
pub const DISTINCT_GAP: f64 = 1e-6;

/// `‖M*𝓛 + 𝓛M‖_F`.
pub fn membership_residual(m: &CMat) -> f64 {
    let f = lorentz(m.nrows() / 2);
    frobenius(&(m.adjoint() * &f + &f * m))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieElement(CMat);

impl LieElement {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() || m.nrows() % 2 != 0 {
            return Err(Error::invalid("Lie element must be 2L x 2L"));
        }
        let r = membership_residual(&m);
        if !(r <= MEMBERSHIP_TOL) {
            return Err(Error::invalid(format!("matrix not in u(L,L) (residual {r:e})")));
        }
        Ok(LieElement(m))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn residual(&self) -> f64 {
        membership_residual(&self.0)
    }
}

fn vectorize(m: &CMat) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.len());
    for z in m.iter() {
        v.push(z.re);
        v.push(z.im);
    }
    v
}

fn devectorize(v: &[f64], n: usize) -> CMat {
    CMat::from_iterator(n, n, v.chunks(2).map(|p| C64::new(p[0], p[1])))
}

/// Real rank of a list of matrices at `RANK_TOL × σ_max`.
pub fn real_rank(mats: &[CMat]) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let len = 2 * mats[0].len();
    let stack = DMatrix::<f64>::from_fn(len, mats.len(), |i, j| vectorize(&mats[j])[i]);
    let sv = stack.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

#[derive(Clone, Debug)]
pub struct LieBasis {
    pub elements: Vec<LieElement>,
    pub dimension: usize,
    pub rank_tol: f64,
}

impl LieBasis {
    pub fn matrices(&self) -> Vec<CMat> {
        self.elements.iter().map(|e| e.0.clone()).collect()
    }

    pub fn max_membership_residual(&self) -> f64 {
        self.elements.iter().map(LieElement::residual).fold(0.0, f64::max)
    }
}

fn basis_from(mats: Vec<CMat>) -> Result<LieBasis> {
    let dimension = real_rank(&mats);
    let elements = mats.into_iter().map(LieElement::new).collect::<Result<Vec<_>>>()?;
    Ok(LieBasis {
        elements,
        dimension,
        rank_tol: RANK_TOL,
    })
}

/// Real basis of `u(L)`: `iE_jj`, `E_jk − E_kj`, `i(E_jk + E_kj)`.
fn u_l_basis(l: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(l * l);
    for j in 0..l {
        out.push(unit(l, j, j) * I);
        for k in j + 1..l {
            out.push(unit(l, j, k) - unit(l, k, j));
            out.push((unit(l, j, k) + unit(l, k, j)) * I);
        }
    }
    out
}

/// Real basis of `𝔞₁ = u(L) ⊕ u(L)` (block diagonal).
pub fn a1_basis(l: usize) -> Vec<CMat> {
    let z = CMat::zeros(l, l);
    let mut out = Vec::with_capacity(2 * l * l);
    for a in u_l_basis(l) {
        out.push(block_diag(&a, &z));
    }
    for d in u_l_basis(l) {
        out.push(block_diag(&z, &d));
    }
    out
}

/// `[[0, B], [B*, 0]]`.
pub fn a2_element(b: &CMat) -> CMat {
    let z = CMat::zeros(b.nrows(), b.nrows());
    from_blocks(&z, b, &b.adjoint(), &z)
}

/// Real basis of `𝔞₂`: `B = E_jk` and `B = iE_jk`.
pub fn a2_basis(l: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(2 * l * l);
    for j in 0..l {
        for k in 0..l {
            out.push(a2_element(&unit(l, j, k)));
            out.push(a2_element(&(unit(l, j, k) * I)));
        }
    }
    out
}

/// Canonical real basis of `u(L,L)`, `4L²` elements.
pub fn ull_basis(l: usize) -> Result<LieBasis> {
    if l == 0 {
        return Err(Error::invalid("L must be positive"));
    }
    let mut mats = a1_basis(l);
    mats.extend(a2_basis(l));
    basis_from(mats)
}

/// `X = ρ̃⁻²α*`.
pub fn coupling(vd: &VerblunskyData) -> Result<CMat> {
    let (_, rt_inv) = vd.inverses()?;
    Ok(rt_inv * rt_inv * vd.alpha().adjoint())
}

/// `i·T̂₁⁻¹·diag(E_jj, 0)·T̂₁` for `j = 1..L`.
pub fn conjugated_generators(vd: &VerblunskyData) -> Result<Vec<CMat>> {
    let l = vd.l();
    let (_, t1) = constituent_matrices(vd, C64::new(1.0, 0.0))?;
    let inv = t1.inverse();
    let z = CMat::zeros(l, l);
    Ok((0..l)
        .map(|j| inv.matrix() * block_diag(&unit(l, j, j), &z) * t1.matrix() * I)
        .collect())
}

/// Off-diagonal part of `Σ_j i·T̂₁⁻¹·diag(E_jj, 0)·T̂₁`.
pub fn offdiagonal_generator(vd: &VerblunskyData) -> Result<CMat> {
    let l = vd.l();
    let sum = conjugated_generators(vd)?
        .into_iter()
        .fold(CMat::zeros(2 * l, 2 * l), |acc, g| acc + g);
    let z = CMat::zeros(l, l);
    Ok(from_blocks(&z, &block(&sum, 0, 1, l), &block(&sum, 1, 0, l), &z))
}

/// Generators from the block-phase curves (a real basis of `𝔞₁`) and the
/// conjugated curves `i·T̂₁⁻¹·diag(E_jj, 0)·T̂₁`.
pub fn tangent_generators(vd: &VerblunskyData, z: C64) -> Result<Vec<LieElement>> {
    check_unit_circle(z)?;
    let mut mats = a1_basis(vd.l());
    mats.extend(conjugated_generators(vd)?);
    mats.into_iter().map(LieElement::new).collect()
}

#[derive(Clone, Debug)]
pub struct Closure {
    pub basis: LieBasis,
    pub rounds: usize,
    /// Dimension after generator insertion and after each round.
    pub history: Vec<usize>,
}

struct Span {
    n: usize,
    q: Vec<Vec<f64>>,
    mats: Vec<CMat>,
}

impl Span {
    /// Gram–Schmidt with reorthogonalization; adjoins `m` if its residual
    /// exceeds `RANK_TOL` relative to its norm.
    fn adjoin(&mut self, m: &CMat) -> bool {
        let mut v = vectorize(m);
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for q in &self.q {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= RANK_TOL * norm0 {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        self.mats.push(devectorize(&v, self.n));
        self.q.push(v);
        true
    }
}

/// Real Lie closure of `gens` under commutators.
pub fn bracket_closure(gens: &[LieElement], max_rounds: usize) -> Result<Closure> {
    let first = gens
        .first()
        .ok_or_else(|| Error::invalid("generator list is empty"))?;
    let n = first.0.nrows();
    let l = n / 2;
    let cap = 4 * l * l;
    let mut span = Span {
        n,
        q: Vec::new(),
        mats: Vec::new(),
    };
    for g in gens {
        if g.0.nrows() != n {
            return Err(Error::invalid("generators have mixed sizes"));
        }
        span.adjoin(&g.0);
    }
    let mut history = vec![span.mats.len()];
    let mut fresh_from = 0;
    let mut rounds = 0;
    loop {
        if span.mats.len() >= cap && rounds > 0 {
            break;
        }
        rounds += 1;
        if rounds > max_rounds {
            let k = history.len();
            return Err(Error::NonConvergence {
                previous: history[k.saturating_sub(2)],
                last: history[k - 1],
            });
        }
        let before = span.mats.len();
        for i in fresh_from..before {
            for j in 0..before {
                if span.mats.len() >= cap {
                    break;
                }
                if j >= fresh_from && j <= i {
                    // [X,X] = 0 and pairs among fresh elements are symmetric
                    continue;
                }
                let c = commutator(&span.mats[i], &span.mats[j]);
                span.adjoin(&c);
            }
        }
        history.push(span.mats.len());
        if span.mats.len() == before {
            break;
        }
        fresh_from = before;
    }
    let basis = basis_from(span.mats)?;
    Ok(Closure {
        basis,
        rounds,
        history,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedResidual {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// One-based `(j₀, k₀)` with `c = X_{k₀j₀} ≠ 0`.
    pub j0: usize,
    pub k0: usize,
    pub c: [f64; 2],
    pub residuals: Vec<NamedResidual>,
    /// Real dimension spanned by the bracket-built `𝔞₂` elements.
    pub a2_span: usize,
    pub a2_expected: usize,
}

impl LemmaReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= BRACKET_TOL && self.a2_span == self.a2_expected
    }
}

/// Evaluates the bracket chain that builds `𝔞₂` from the off-diagonal
/// generator and `𝔞₁`, comparing each commutator with its closed form.
pub fn lemma_bracket_checks(vd: &VerblunskyData, z: C64) -> Result<LemmaReport> {
    check_unit_circle(z)?;
    if vd.is_zero() {
        return Err(Error::Degenerate("alpha = 0 has no nonzero coupling entry".into()));
    }
    let l = vd.l();
    let x = coupling(vd)?;
    let mut best = (0, 0, 0.0);
    for k in 0..l {
        for j in 0..l {
            let a = x[(k, j)].norm();
            if a > best.2 {
                best = (k, j, a);
            }
        }
    }
    let (k0, j0, mag) = best;
    if !(mag > 0.0) {
        return Err(Error::Degenerate("coupling matrix vanishes".into()));
    }
    let c = x[(k0, j0)];
    let zl = CMat::zeros(l, l);
    let mut residuals = Vec::new();
    let mut push = |name: &str, value: f64| {
        residuals.push(NamedResidual {
            name: name.to_string(),
            value,
        })
    };

    // generator against i·[[0, −X], [X*, 0]]
    let g = offdiagonal_generator(vd)?;
    let g_form = from_blocks(&zl, &(-&x), &x.adjoint(), &zl) * I;
    push("generator_form", frobenius(&(&g - &g_form)));
    push("generator_membership", membership_residual(&g));

    // [i·diag(0, E_j0j0), [i·diag(E_k0k0, 0), G]] = i·[[0, −cE_k0j0], [c̄E_j0k0, 0]]
    let a = block_diag(&unit(l, k0, k0), &zl) * I;
    let b = block_diag(&zl, &unit(l, j0, j0)) * I;
    let d = commutator(&b, &commutator(&a, &g));
    let w = -c * I;
    let d_form = a2_element(&(unit(l, k0, j0) * w));
    push("double_bracket", frobenius(&(&d - &d_form)));
    push("double_bracket_membership", membership_residual(&d));

    let mut built = vec![d.clone()];
    let mut worst_first = 0.0f64;
    let mut worst_second = 0.0f64;
    let ys = [w.inv(), I / w];
    for k in (0..l).filter(|&k| k != k0) {
        for y in ys {
            let gen = block_diag(&(unit(l, k, k0) * y - unit(l, k0, k) * y.conj()), &zl);
            let r = commutator(&gen, &d);
            let r_form = a2_element(&(unit(l, k, j0) * (y * w)));
            worst_first = worst_first.max(frobenius(&(&r - &r_form)));
            built.push(r);
        }
    }
    // column j0 elements, then move the column index with i·(E_jj0 + E_j0j)
    let col: Vec<(usize, CMat)> = {
        let mut v = vec![(k0, d.clone())];
        for k in (0..l).filter(|&k| k != k0) {
            for y in ys {
                let gen = block_diag(&(unit(l, k, k0) * y - unit(l, k0, k) * y.conj()), &zl);
                v.push((k, commutator(&gen, &d)));
            }
        }
        v
    };
    for (k, r) in &col {
        let coeff = r[(*k, l + j0)];
        for j in (0..l).filter(|&j| j != j0) {
            let h = block_diag(&zl, &((unit(l, j, j0) + unit(l, j0, j)) * I));
            let s = commutator(r, &h);
            let s_form = a2_element(&(unit(l, *k, j) * (coeff * I)));
            worst_second = worst_second.max(frobenius(&(&s - &s_form)));
            built.push(s);
        }
    }
    if l > 1 {
        push("first_a2_bracket", worst_first);
        push("second_a2_bracket", worst_second);
    }

    // (y − ȳ)E_k0k0 with y = i: [[0, 2iwE_k0j0], [conj(2iw)E_j0k0, 0]]
    let tau = C64::new(0.0, 2.0);
    let gen = block_diag(&(unit(l, k0, k0) * tau), &zl);
    let f = commutator(&gen, &d);
    let f_form = a2_element(&(unit(l, k0, j0) * (tau * w)));
    push("completion_bracket", frobenius(&(&f - &f_form)));
    built.push(f.clone());
    for j in (0..l).filter(|&j| j != j0) {
        let h = block_diag(&zl, &((unit(l, j, j0) + unit(l, j0, j)) * I));
        built.push(commutator(&f, &h));
    }

    let a2_span = real_rank(&built);
    Ok(LemmaReport {
        j0: j0 + 1,
        k0: k0 + 1,
        c: [c.re, c.im],
        residuals,
        a2_span,
        a2_expected: 2 * l * l,
    })
}

#[derive(Clone, Debug)]
pub struct CayleyData {
    pub c: CMat,
    pub j: CMat,
}

impl CayleyData {
    pub fn new(l: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let id = CMat::identity(l, l);
        let c = from_blocks(&id, &(&id * -I), &id, &(&id * I)) * C64::new(s, 0.0);
        let zl = CMat::zeros(l, l);
        let j = from_blocks(&zl, &(-&id), &id, &zl);
        CayleyData { c, j }
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.c)
    }

    pub fn j_square_residual(&self) -> f64 {
        let n = self.j.nrows();
        frobenius(&(&self.j * &self.j + CMat::identity(n, n)))
    }

    /// `C*MC`.
    pub fn conjugate(&self, m: &CMat) -> CMat {
        self.c.adjoint() * m * &self.c
    }
}

/// `A + iB ↦ [[A, −B], [B, A]]`.
pub fn real_split(m: &CMat) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

// Both residuals are evaluated on N/‖N‖ so long products cannot overflow.
fn symplectic_residual(n: &CMat, j: &CMat) -> f64 {
    let s = frobenius(n).max(1.0);
    let nh = n.unscale(s);
    frobenius(&(nh.adjoint() * j * &nh - j.unscale(s * s)))
}

fn real_symplectic_residual(n: &DMatrix<f64>, j: &DMatrix<f64>) -> f64 {
    let s = n.norm().max(1.0);
    let nh = n.unscale(s);
    (nh.transpose() * j * &nh - j.unscale(s * s)).norm()
}

/// Smallest relative gap between consecutive sorted singular values.
pub fn min_relative_gap(sv: &[f64]) -> f64 {
    sv.windows(2)
        .map(|w| (w[0] - w[1]) / w[0].max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CayleyReport {
    pub c_unitarity: f64,
    pub j_square: f64,
    /// Per sample, `‖N*JN − J‖ / max(1, ‖N‖²)` with `N = C*MC`.
    pub symplectic: Vec<f64>,
    /// Per sample, the same identity after the real split.
    pub real_symplectic: Vec<f64>,
    /// `‖τ̃(MN) − τ̃(M)τ̃(N)‖ / (max(1,‖τ̃(M)‖)·max(1,‖τ̃(N)‖))` over
    /// consecutive pairs.
    pub multiplicativity: Vec<f64>,
    /// Index of a sample with `2L` pairwise distinct singular values.
    pub distinct_witness: Option<usize>,
    pub min_gaps: Vec<f64>,
    pub failures: Vec<String>,
}

impl CayleyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn max_symplectic(&self) -> f64 {
        self.symplectic.iter().chain(&self.real_symplectic).copied().fold(0.0, f64::max)
    }
}

pub fn cayley_checks(l: usize, samples: &[LorentzMatrix]) -> Result<CayleyReport> {
    if samples.iter().any(|s| s.l() != l) {
        return Err(Error::invalid("sample size does not match L"));
    }
    let cd = CayleyData::new(l);
    let jt = real_split(&cd.j);
    let mut rep = CayleyReport {
        c_unitarity: cd.unitarity_residual(),
        j_square: cd.j_square_residual(),
        symplectic: Vec::new(),
        real_symplectic: Vec::new(),
        multiplicativity: Vec::new(),
        distinct_witness: None,
        min_gaps: Vec::new(),
        failures: Vec::new(),
    };
    if rep.c_unitarity > 1e-14 {
        rep.failures.push(format!("C not unitary ({:e})", rep.c_unitarity));
    }
    if rep.j_square > 0.0 {
        rep.failures.push("J^2 != -1".into());
    }
    let conj: Vec<CMat> = samples.iter().map(|s| cd.conjugate(s.matrix())).collect();
    for (i, n) in conj.iter().enumerate() {
        let r = symplectic_residual(n, &cd.j);
        let rr = real_symplectic_residual(&real_split(n), &jt);
        if r > BRACKET_TOL {
            rep.failures.push(format!("sample {i}: C*MC not J-symplectic ({r:e})"));
        }
        if rr > BRACKET_TOL {
            rep.failures.push(format!("sample {i}: real split not symplectic ({rr:e})"));
        }
        rep.symplectic.push(r);
        rep.real_symplectic.push(rr);
        let gap = min_relative_gap(&singular_values(samples[i].matrix()));
        if rep.distinct_witness.is_none() && gap > DISTINCT_GAP {
            rep.distinct_witness = Some(i);
        }
        rep.min_gaps.push(gap);
    }
    for (i, pair) in samples.windows(2).enumerate() {
        let (a, b) = (pair[0].matrix(), pair[1].matrix());
        let a = a.unscale(real_split(a).norm().max(1.0));
        let b = b.unscale(real_split(b).norm().max(1.0));
        let (ta, tb) = (real_split(&a), real_split(&b));
        let r = (real_split(&(&a * &b)) - &ta * &tb).norm();
        if r > 1e-12 {
            rep.failures.push(format!("pair {i}: real split not multiplicative ({r:e})"));
        }
        rep.multiplicativity.push(r);
    }
    if !samples.is_empty() && rep.distinct_witness.is_none() {
        rep.failures.push("no sample with 2L distinct singular values".into());
    }
    Ok(rep)
}

/// Short SHA-256 digest of the entries of `α`.
pub fn alpha_hash(alpha: &CMat) -> String {
    let mut h = Sha256::new();
    h.update((alpha.nrows() as u64).to_le_bytes());
    for z in alpha.iter() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    DegenerateAsPredicted,
    Mismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub alpha_hash: String,
    pub z: [f64; 2],
    pub dimension: usize,
    pub expected: usize,
    pub expected_full: usize,
    pub verdict: Verdict,
    pub residuals: Vec<NamedResidual>,
    pub rounds: usize,
    pub history: Vec<usize>,
    pub lemma: Option<LemmaReport>,
}

/// Closure dimension against `4L²` (`α ≠ 0`) or `2L²` (`α = 0`).
pub fn certify(vd: &VerblunskyData, z: C64, max_rounds: usize) -> Result<CertificationReport> {
    let l = vd.l();
    let gens = tangent_generators(vd, z)?;
    let closure = bracket_closure(&gens, max_rounds)?;
    let full = 4 * l * l;
    let degenerate = vd.is_zero();
    let expected = if degenerate { 2 * l * l } else { full };
    let lemma = if degenerate {
        None
    } else {
        Some(lemma_bracket_checks(vd, z)?)
    };
    let mut residuals = vec![
        NamedResidual {
            name: "generator_membership".into(),
            value: gens.iter().map(LieElement::residual).fold(0.0, f64::max),
        },
        NamedResidual {
            name: "closure_membership".into(),
            value: closure.basis.max_membership_residual(),
        },
    ];
    if let Some(lr) = &lemma {
        residuals.extend(lr.residuals.iter().cloned());
    }
    let lemma_ok = lemma.as_ref().map_or(true, LemmaReport::passed);
    let verdict = match (closure.basis.dimension == expected && lemma_ok, degenerate) {
        (true, false) => Verdict::Pass,
        (true, true) => Verdict::DegenerateAsPredicted,
        (false, _) => Verdict::Mismatch,
    };
    Ok(CertificationReport {
        l,
        alpha_hash: alpha_hash(vd.alpha()),
        z: [z.re, z.im],
        dimension: closure.basis.dimension,
        expected,
        expected_full: full,
        verdict,
        residuals,
        rounds: closure.rounds,
        history: closure.history,
        lemma,
    })
}
