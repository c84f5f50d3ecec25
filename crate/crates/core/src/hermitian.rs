//! Left-invariant Hermitian structures in a fixed orthonormal frame.
//!
//! The metric is always the canonical inner product of the frame; a
//! [`HermitianFrame`] only carries the complex structure `J`. Forms are stored
//! by their coefficients on increasing index tuples.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::LieBracket;
use crate::error::{Error, Result};
use crate::linalg::{self, RANK_RTOL};

/// Default absolute tolerance on form coefficients.
pub const FORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianFrame {
    j: DMatrix<f64>,
}

impl HermitianFrame {
    /// Frame with `J e_i = e_{N-1-i}` for `i < N/2` (0-based).
    pub fn standard(dim: usize) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::OddDimension(dim));
        }
        Ok(HermitianFrame { j: standard_j(dim) })
    }

    /// Frame with `J e_{2i} = e_{2i+1}`.
    pub fn paired(dim: usize) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::OddDimension(dim));
        }
        let mut j = DMatrix::zeros(dim, dim);
        for p in 0..dim / 2 {
            j[(2 * p + 1, 2 * p)] = 1.0;
            j[(2 * p, 2 * p + 1)] = -1.0;
        }
        Ok(HermitianFrame { j })
    }

    /// Validates `J² = −Id` and orthogonality within 1e-12.
    pub fn from_matrix(j: DMatrix<f64>) -> Result<Self> {
        validate_complex_structure(&j)?;
        Ok(HermitianFrame { j })
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    /// Fundamental form `ω(X, Y) = ⟨JX, Y⟩`.
    pub fn omega(&self) -> TwoForm {
        TwoForm::from_matrix(self.j.transpose())
    }
}

pub(crate) fn standard_j(dim: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(dim, dim);
    for i in 0..dim / 2 {
        let partner = dim - 1 - i;
        j[(partner, i)] = 1.0;
        j[(i, partner)] = -1.0;
    }
    j
}

pub(crate) fn validate_complex_structure(j: &DMatrix<f64>) -> Result<()> {
    let n = j.nrows();
    if n != j.ncols() {
        return Err(Error::InvalidComplexStructure("matrix is not square".into()));
    }
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let sq = (j * j + &id).amax();
    if sq > 1e-12 {
        return Err(Error::InvalidComplexStructure(format!("J² + Id has size {sq:e}")));
    }
    let orth = (j.transpose() * j - &id).amax();
    if orth > 1e-12 {
        return Err(Error::InvalidComplexStructure(format!("J is not orthogonal ({orth:e})")));
    }
    Ok(())
}

/// A 2-form, held as its antisymmetric coefficient matrix `α(e_i, e_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    m: DMatrix<f64>,
}

impl TwoForm {
    pub fn zero(dim: usize) -> Self {
        TwoForm { m: DMatrix::zeros(dim, dim) }
    }

    /// Antisymmetrises the input.
    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        TwoForm { m: linalg::skew_part(&m) }
    }

    /// `e^i ∧ e^j`.
    pub fn wedge_basis(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] += 1.0;
        m[(j, i)] -= 1.0;
        TwoForm { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Coefficients on `i < j`, row-major.
    pub fn coefficients(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.m[(i, j)]);
            }
        }
        out
    }

    /// Inner product summing over `i < j`.
    pub fn inner(&self, other: &TwoForm) -> f64 {
        0.5 * linalg::frobenius_inner(&self.m, &other.m)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    pub fn scaled(&self, s: f64) -> TwoForm {
        TwoForm { m: &self.m * s }
    }

    pub fn sub(&self, other: &TwoForm) -> TwoForm {
        TwoForm { m: &self.m - &other.m }
    }
}

fn combination_index(dim: usize, idx: &[usize]) -> usize {
    // rank of an increasing tuple in lexicographic order
    let p = idx.len();
    let mut rank = 0;
    let mut prev = 0;
    for (pos, &x) in idx.iter().enumerate() {
        for y in prev..x {
            rank += binomial(dim - y - 1, p - pos - 1);
        }
        prev = x + 1;
    }
    rank
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Sort indices, returning the permutation sign (0 on repeated indices).
fn sort_with_sign<const P: usize>(mut idx: [usize; P]) -> (i32, [usize; P]) {
    let mut sign = 1;
    for a in 0..P {
        for b in 0..P - 1 - a {
            if idx[b] > idx[b + 1] {
                idx.swap(b, b + 1);
                sign = -sign;
            }
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        sign = 0;
    }
    (sign, idx)
}

/// Totally antisymmetric `P`-form, stored on increasing index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<const P: usize> {
    dim: usize,
    coeffs: Vec<f64>,
}

pub type ThreeForm = Form<3>;
pub type FourForm = Form<4>;

impl<const P: usize> Form<P> {
    pub fn zero(dim: usize) -> Self {
        Form { dim, coeffs: vec![0.0; binomial(dim, P)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, idx: [usize; P]) -> f64 {
        let (sign, sorted) = sort_with_sign(idx);
        if sign == 0 {
            return 0.0;
        }
        f64::from(sign) * self.coeffs[combination_index(self.dim, &sorted)]
    }

    fn set_sorted(&mut self, idx: [usize; P], value: f64) {
        let r = combination_index(self.dim, &idx);
        self.coeffs[r] = value;
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Calls `f` on every increasing index tuple.
    fn for_each_tuple(dim: usize, mut f: impl FnMut([usize; P])) {
        if P > dim {
            return;
        }
        let mut idx = [0usize; P];
        for (p, slot) in idx.iter_mut().enumerate() {
            *slot = p;
        }
        loop {
            f(idx);
            // advance
            let mut p = P;
            loop {
                if p == 0 {
                    return;
                }
                p -= 1;
                if idx[p] < dim - P + p {
                    idx[p] += 1;
                    for q in (p + 1)..P {
                        idx[q] = idx[q - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

/// `μ(Je_a, Je_b)` as a dense tensor `[a][b][k]`.
fn j_twisted(mu: &LieBracket, j: &DMatrix<f64>) -> Vec<f64> {
    let n = mu.dim();
    let t = mu.dense();
    let mut half = vec![0.0; n * n * n]; // [p][b][k] = Σ_q J_{qb} μ_{pq}^k
    for p in 0..n {
        for q in 0..n {
            for b in 0..n {
                let jq = j[(q, b)];
                if jq == 0.0 {
                    continue;
                }
                for k in 0..n {
                    half[(p * n + b) * n + k] += jq * t[(p * n + q) * n + k];
                }
            }
        }
    }
    let mut out = vec![0.0; n * n * n];
    for p in 0..n {
        for a in 0..n {
            let jp = j[(p, a)];
            if jp == 0.0 {
                continue;
            }
            for b in 0..n {
                for k in 0..n {
                    out[(a * n + b) * n + k] += jp * half[(p * n + b) * n + k];
                }
            }
        }
    }
    out
}

/// Max over basis pairs of `‖N_J(e_i, e_j)‖`.
pub fn nijenhuis_residual(mu: &LieBracket, frame: &HermitianFrame) -> f64 {
    let n = mu.dim();
    let j = frame.j();
    let t = mu.dense();
    let tj = j_twisted(mu, j);
    let mut worst = 0.0_f64;
    for a in 0..n {
        for b in (a + 1)..n {
            // [X,Y] + J[JX,Y] + J[X,JY] − [JX,JY]
            let mut mixed = DVector::<f64>::zeros(n);
            for p in 0..n {
                let ja = j[(p, a)];
                let jb = j[(p, b)];
                for k in 0..n {
                    mixed[k] += ja * t[(p * n + b) * n + k] + jb * t[(a * n + p) * n + k];
                }
            }
            let jm = j * mixed;
            let mut sq = 0.0;
            for k in 0..n {
                let v = t[(a * n + b) * n + k] + jm[k] - tj[(a * n + b) * n + k];
                sq += v * v;
            }
            worst = worst.max(sq.sqrt());
        }
    }
    worst
}

/// Bismut torsion `c(X,Y,Z) = −⟨[JX,JY],Z⟩ − ⟨[JY,JZ],X⟩ − ⟨[JZ,JX],Y⟩`.
pub fn torsion_three_form(mu: &LieBracket, frame: &HermitianFrame) -> ThreeForm {
    let n = mu.dim();
    let nj = nijenhuis_residual(mu, frame);
    if nj > FORM_TOL {
        warn!("torsion requested for a non-integrable J (Nijenhuis residual {nj:e})");
    }
    let tj = j_twisted(mu, frame.j());
    let at = |a: usize, b: usize, k: usize| tj[(a * n + b) * n + k];
    let mut c = ThreeForm::zero(n);
    ThreeForm::for_each_tuple(n, |[x, y, z]| {
        let v = -at(x, y, z) - at(y, z, x) - at(z, x, y);
        c.set_sorted([x, y, z], v);
    });
    c
}

/// Chevalley-Eilenberg differential of a 3-form.
pub fn exterior_derivative_c(mu: &LieBracket, c: &ThreeForm) -> FourForm {
    let n = mu.dim();
    let t = mu.dense();
    // c(μ(e_a, e_b), e_x, e_y)
    let cb = |a: usize, b: usize, x: usize, y: usize| -> f64 {
        (0..n)
            .map(|m| {
                let coef = t[(a * n + b) * n + m];
                if coef == 0.0 {
                    0.0
                } else {
                    coef * c.get([m, x, y])
                }
            })
            .sum()
    };
    let mut dc = FourForm::zero(n);
    FourForm::for_each_tuple(n, |[w, x, y, z]| {
        let v = -cb(w, x, y, z) + cb(w, y, x, z) - cb(w, z, x, y) - cb(x, y, w, z) + cb(x, z, w, y)
            - cb(y, z, w, x);
        dc.set_sorted([w, x, y, z], v);
    });
    dc
}

/// SKT test: `dc = 0` up to `tol`. Returns the verdict and the largest `|dc|`
/// coefficient. A non-integrable `J` never passes.
pub fn is_skt_general(mu: &LieBracket, frame: &HermitianFrame, tol: f64) -> (bool, f64) {
    let residual = exterior_derivative_c(mu, &torsion_three_form(mu, frame)).max_abs();
    let integrable = nijenhuis_residual(mu, frame) <= tol;
    (integrable && residual < tol, residual)
}

/// `α^{1,1}(X, Y) = ½(α(X,Y) + α(JX,JY))`.
pub fn one_one_part(alpha: &TwoForm, frame: &HermitianFrame) -> TwoForm {
    let j = frame.j();
    TwoForm::from_matrix((alpha.matrix() + j.transpose() * alpha.matrix() * j) * 0.5)
}

/// The endomorphism `P` with `ω(P·,·) = ½α` for a (1,1)-form `α`.
pub fn endomorphism_from_form(alpha: &TwoForm, frame: &HermitianFrame, tol: f64) -> Result<DMatrix<f64>> {
    let anti = alpha.sub(&one_one_part(alpha, frame)).max_abs();
    if anti > tol {
        return Err(Error::NotOneOne(anti));
    }
    Ok(frame.j() * alpha.matrix() * 0.5)
}

/// Inverse of [`endomorphism_from_form`]: the 2-form `2ω(P·,·)`.
pub fn form_from_endomorphism(p: &DMatrix<f64>, frame: &HermitianFrame) -> TwoForm {
    TwoForm::from_matrix((frame.j() * p).transpose() * 2.0)
}

/// The 1-form `θ` with `ρ^B = dθ`, as its values on the basis.
fn bismut_potential(mu: &LieBracket, frame: &HermitianFrame) -> DVector<f64> {
    let n = mu.dim();
    let j = frame.j();
    let ads: Vec<DMatrix<f64>> = (0..n).map(|i| mu.ad_basis(i)).collect();
    let traces: Vec<f64> = ads.iter().map(|a| a.trace()).collect();
    // H = ½ Σ_i μ(Je_i, e_i), so that ⟨ω, dX♭⟩ = ⟨H, X⟩
    let mut h = DVector::<f64>::zeros(n);
    for i in 0..n {
        for p in 0..n {
            let jp = j[(p, i)];
            if jp == 0.0 {
                continue;
            }
            for k in 0..n {
                h[k] += 0.5 * jp * mu.get(p, i, k);
            }
        }
    }
    DVector::from_fn(n, |i, _| {
        let tr_j_ad = (j * &ads[i]).trace();
        let tr_ad_j: f64 = (0..n).map(|p| j[(p, i)] * traces[p]).sum();
        -0.5 * (tr_j_ad + tr_ad_j) - h[i]
    })
}

/// Bismut-Ricci form `ρ^B(X, Y) = −θ(μ(X, Y))`.
pub fn bismut_ricci_general(mu: &LieBracket, frame: &HermitianFrame) -> TwoForm {
    let n = mu.dim();
    let theta = bismut_potential(mu, frame);
    let m = DMatrix::from_fn(n, n, |a, b| -(0..n).map(|k| mu.get(a, b, k) * theta[k]).sum::<f64>());
    TwoForm { m }
}

/// `P_μ` from the Bismut-Ricci form: `ω(P·,·) = ½(ρ^B)^{1,1}`.
pub fn p_endomorphism(mu: &LieBracket, frame: &HermitianFrame) -> DMatrix<f64> {
    let rho11 = one_one_part(&bismut_ricci_general(mu, frame), frame);
    frame.j() * rho11.matrix() * 0.5
}

/// Returns `α` when `(ρ^B)^{1,1} = αω` up to `tol`.
pub fn is_static(mu: &LieBracket, frame: &HermitianFrame, tol: f64) -> Option<f64> {
    let rho11 = one_one_part(&bismut_ricci_general(mu, frame), frame);
    let omega = frame.omega();
    let alpha = rho11.inner(&omega) / omega.inner(&omega);
    (rho11.sub(&omega.scaled(alpha)).max_abs() < tol).then_some(alpha)
}

/// Sign of the cosmological constant, plus the flat Kähler case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolitonKind {
    #[serde(rename = "NONE")]
    NotSoliton,
    Expanding,
    Steady,
    Shrinking,
    KahlerRicciFlat,
}

impl SolitonKind {
    /// Kind from the sign of `α`, with `|α| ≤ tol` counted as steady.
    pub fn from_alpha(alpha: f64, tol: f64) -> Self {
        if alpha < -tol {
            SolitonKind::Expanding
        } else if alpha > tol {
            SolitonKind::Shrinking
        } else {
            SolitonKind::Steady
        }
    }
}

/// Result of fitting `P = α Id + ½(D + Dᵀ)` with `D ∈ Der(μ)`, `[D, J] = 0`.
#[derive(Clone, Debug)]
pub struct SolitonFit {
    pub alpha: f64,
    pub derivation: DMatrix<f64>,
    /// Frobenius norm of `P − α Id − ½(D + Dᵀ)` at the least-squares optimum.
    pub residual: f64,
}

/// Least-squares algebraic soliton fit for a given `P`.
pub fn fit_soliton(mu: &LieBracket, p: &DMatrix<f64>, frame: &HermitianFrame) -> SolitonFit {
    let n = mu.dim();
    let basis = mu.derivation_space(Some(frame.j()));
    let mut design = DMatrix::zeros(n * n, basis.len() + 1);
    let id = DMatrix::<f64>::identity(n, n);
    design.set_column(0, &DVector::from_column_slice(id.as_slice()));
    for (c, d) in basis.iter().enumerate() {
        let s = linalg::sym_part(d);
        design.set_column(c + 1, &DVector::from_column_slice(s.as_slice()));
    }
    let target = DVector::from_column_slice(p.as_slice());
    let (x, residual) = linalg::lstsq(&design, &target, RANK_RTOL);
    let mut derivation = DMatrix::zeros(n, n);
    for (c, d) in basis.iter().enumerate() {
        derivation += d * x[c + 1];
    }
    SolitonFit { alpha: x[0], derivation, residual }
}
