//! Almost-abelian Hermitian Lie algebras `μ(a, v, A)`.
//!
//! In the orthonormal basis `e_1, …, e_{2n}` (0-based indices `0..N`), the
//! abelian ideal is `n = span(e_1..e_{2n−1})`, `n₁ = span(e_2..e_{2n−1})`, and
//! `ad e_{2n}` restricted to `n` is `[[a, 0], [v, A]]`. The complex structure
//! is `J e_1 = e_{2n}` together with `J₁` on `n₁`.

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::LieBracket;
use crate::error::{Error, Result};
use crate::flow::{self, IntegratorConfig, Trajectory};
use crate::hermitian::{self, standard_j, validate_complex_structure, HermitianFrame, SolitonKind};
use crate::linalg::{self, RANK_RTOL};

/// Threshold on the relative lemma residual.
pub const LEMMA_TOL: f64 = 1e-9;
/// Threshold on the relative spectral defect.
pub const SPECTRAL_TOL: f64 = 1e-7;
/// Relative least-squares residual below which `v ∈ Im A`.
pub const IMAGE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct AlmostAbelianData {
    pub a: f64,
    pub v: DVector<f64>,
    pub a_mat: DMatrix<f64>,
    pub j1: DMatrix<f64>,
}

impl AlmostAbelianData {
    /// Validates shapes, `J₁` and `[A, J₁] = 0`.
    pub fn new(a: f64, v: DVector<f64>, a_mat: DMatrix<f64>, j1: DMatrix<f64>) -> Result<Self> {
        let m = v.len();
        if !m.is_multiple_of(2) {
            return Err(Error::OddDimension(m + 2));
        }
        if a_mat.nrows() != m || a_mat.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, got: a_mat.nrows().max(a_mat.ncols()) });
        }
        if j1.nrows() != m || j1.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, got: j1.nrows().max(j1.ncols()) });
        }
        if m > 0 {
            validate_complex_structure(&j1)?;
        }
        let comm = linalg::commutator(&a_mat, &j1).amax();
        if comm > 1e-12 * a_mat.amax().max(1.0) {
            return Err(Error::InvalidData(format!("[A, J1] = {comm:e} is not zero; J is not integrable")));
        }
        if !a.is_finite() || v.iter().chain(a_mat.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidData("non-finite entries".into()));
        }
        Ok(AlmostAbelianData { a, v, a_mat, j1 })
    }

    /// Same, with the default `J₁ e_p = e_{m−1−p}` layout.
    pub fn with_standard_j1(a: f64, v: DVector<f64>, a_mat: DMatrix<f64>) -> Result<Self> {
        let m = v.len();
        Self::new(a, v, a_mat, standard_j(m))
    }

    /// `dim n₁`.
    pub fn m(&self) -> usize {
        self.v.len()
    }

    pub fn dim(&self) -> usize {
        self.m() + 2
    }

    /// The full complex structure: `J e_1 = e_{2n}`, `J₁` on `n₁`.
    pub fn frame(&self) -> HermitianFrame {
        let m = self.m();
        let n = m + 2;
        let mut j = DMatrix::zeros(n, n);
        j[(n - 1, 0)] = 1.0;
        j[(0, n - 1)] = -1.0;
        j.view_mut((1, 1), (m, m)).copy_from(&self.j1);
        HermitianFrame::from_matrix(j).expect("validated blocks")
    }

    /// `a² + ‖A‖²`, the scale used for relative residuals.
    pub fn scale(&self) -> f64 {
        self.a * self.a + self.a_mat.norm_squared()
    }

    pub fn scaled(&self, s: f64) -> Self {
        AlmostAbelianData { a: s * self.a, v: &self.v * s, a_mat: &self.a_mat * s, j1: self.j1.clone() }
    }

    /// Flat state `(a, v, vec A)` with `A` column-major.
    pub fn to_state(&self) -> DVector<f64> {
        let m = self.m();
        let mut x = DVector::zeros(1 + m + m * m);
        x[0] = self.a;
        x.rows_mut(1, m).copy_from(&self.v);
        x.rows_mut(1 + m, m * m).copy_from_slice(self.a_mat.as_slice());
        x
    }

    pub fn from_state(x: &DVector<f64>, j1: &DMatrix<f64>) -> Self {
        let m = j1.nrows();
        AlmostAbelianData {
            a: x[0],
            v: x.rows(1, m).into_owned(),
            a_mat: DMatrix::from_column_slice(m, m, x.rows(1 + m, m * m).as_slice()),
            j1: j1.clone(),
        }
    }
}

/// `J1` on disk: a matrix or the string `"standard"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum J1Spec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

impl Default for J1Spec {
    fn default() -> Self {
        J1Spec::Named("standard".into())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlmostAbelianJson {
    pub a: f64,
    pub v: Vec<f64>,
    #[serde(rename = "A")]
    pub a_mat: Vec<Vec<f64>>,
    #[serde(rename = "J1", default)]
    pub j1: J1Spec,
}

impl AlmostAbelianJson {
    pub fn to_data(&self) -> Result<AlmostAbelianData> {
        let m = self.v.len();
        let a_mat = if m == 0 && self.a_mat.is_empty() { DMatrix::zeros(0, 0) } else { linalg::from_rows(&self.a_mat)? };
        let j1 = match &self.j1 {
            J1Spec::Named(name) if name == "standard" => standard_j(m),
            J1Spec::Named(other) => return Err(Error::InvalidData(format!("unknown J1 layout {other:?}"))),
            J1Spec::Matrix(rows) => linalg::from_rows(rows)?,
        };
        AlmostAbelianData::new(self.a, DVector::from_vec(self.v.clone()), a_mat, j1)
    }

    pub fn from_data(data: &AlmostAbelianData) -> Self {
        let j1 = if data.j1 == standard_j(data.m()) {
            J1Spec::default()
        } else {
            J1Spec::Matrix(linalg::to_rows(&data.j1))
        };
        AlmostAbelianJson { a: data.a, v: data.v.iter().copied().collect(), a_mat: linalg::to_rows(&data.a_mat), j1 }
    }
}

/// The bracket with `μ(e_{2n}, e_1) = a e_1 + v`, `μ(e_{2n}, u) = A u` on `n₁`.
pub fn build_bracket(data: &AlmostAbelianData) -> LieBracket {
    let m = data.m();
    let n = m + 2;
    let last = n - 1;
    let mut mu = LieBracket::zero(n).expect("even dimension");
    mu.set(last, 0, 0, data.a);
    for p in 0..m {
        mu.set(last, 0, 1 + p, data.v[p]);
        for q in 0..m {
            mu.set(last, 1 + q, 1 + p, data.a_mat[(p, q)]);
        }
    }
    mu
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SktVerdict {
    pub is_skt: bool,
    pub lemma_skt: bool,
    pub spectral_skt: bool,
    /// `½ rank(A + Aᵀ)`.
    pub k: usize,
    /// Half the multiplicity of `−a/2` in the spectrum of `S(A)`; only
    /// meaningful for `a ≠ 0`.
    pub k_multiplicity: f64,
    /// `‖[A, Aᵀ]‖ / (a² + ‖A‖²)`.
    pub normality_defect: f64,
    /// Eigenvalues of `A` as `[re, im]`, sorted lexicographically.
    pub spectrum: Vec<[f64; 2]>,
    /// `‖S(aA + A² + AᵀA)‖ / (a² + ‖A‖²)`.
    pub residual_lemma: f64,
    /// Largest of the normality defect, `‖[A, J₁]‖/√scale` and the distance of
    /// the real parts from `{0, −a/2}` over `√scale`.
    pub spectral_defect: f64,
}

/// Evaluates both SKT criteria. `tol` bounds the lemma residual; the spectral
/// defect is held to `100·tol`.
pub fn skt_verdict(data: &AlmostAbelianData, tol: f64) -> Result<SktVerdict> {
    let spectral_tol = 100.0 * tol;
    let a = data.a;
    let am = &data.a_mat;
    let scale = data.scale();
    let spectrum = linalg::complex_eigenvalues(am)?;
    let spectrum_pairs: Vec<[f64; 2]> = spectrum.iter().map(|z| [z.re, z.im]).collect();
    if scale == 0.0 {
        return Ok(SktVerdict {
            is_skt: true,
            lemma_skt: true,
            spectral_skt: true,
            k: 0,
            k_multiplicity: 0.0,
            normality_defect: 0.0,
            spectrum: spectrum_pairs,
            residual_lemma: 0.0,
            spectral_defect: 0.0,
        });
    }
    let root = scale.sqrt();
    let e = am * a + am * am + am.transpose() * am;
    let residual_lemma = linalg::sym_part(&e).norm() / scale;

    let normality_defect = linalg::commutator(am, &am.transpose()).norm() / scale;
    let commute = linalg::commutator(am, &data.j1).norm() / root;
    let real_parts = spectrum
        .iter()
        .map(|z| z.re.abs().min((z.re + 0.5 * a).abs()) / root)
        .fold(0.0, f64::max);
    let spectral_defect = normality_defect.max(commute).max(real_parts);

    let lemma_skt = residual_lemma < tol;
    let spectral_skt = spectral_defect < spectral_tol;
    if (lemma_skt && !spectral_skt) || (spectral_skt && residual_lemma > spectral_tol) {
        return Err(Error::CriteriaDisagree(format!(
            "lemma residual {residual_lemma:e}, spectral defect {spectral_defect:e}, a = {a}, A = {am}"
        )));
    }
    let is_skt = lemma_skt && spectral_skt;

    let eig_tol = 1e-7 * root;
    let (sym_eigs, _) = linalg::symmetric_eigen_sorted(&linalg::sym_part(am));
    let twice_k = sym_eigs.iter().filter(|x| x.abs() > eig_tol).count();
    let twice_mult = sym_eigs.iter().filter(|x| (*x + 0.5 * a).abs() <= eig_tol).count();
    if is_skt && a.abs() > eig_tol && twice_k != twice_mult {
        return Err(Error::CriteriaDisagree(format!(
            "rank(A + Aᵀ) = {twice_k} but −a/2 has multiplicity {twice_mult}"
        )));
    }
    Ok(SktVerdict {
        is_skt,
        lemma_skt,
        spectral_skt,
        k: twice_k / 2,
        k_multiplicity: twice_mult as f64 / 2.0,
        normality_defect,
        spectrum: spectrum_pairs,
        residual_lemma,
        spectral_defect,
    })
}

fn require_skt(data: &AlmostAbelianData) -> Result<SktVerdict> {
    let verdict = skt_verdict(data, LEMMA_TOL)?;
    if !verdict.is_skt {
        return Err(Error::NotSkt { lemma: verdict.residual_lemma, spectral: verdict.spectral_defect });
    }
    Ok(verdict)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PComponents {
    pub c: f64,
    pub w: Vec<f64>,
}

/// `c = (k/4 − ½)a² − ½‖v‖²`.
pub fn c_value(a: f64, v: &DVector<f64>, k: usize) -> f64 {
    (k as f64 / 4.0 - 0.5) * a * a - 0.5 * v.norm_squared()
}

/// `c` and `w = −¼ Aᵀ v`; the input must be SKT.
pub fn p_components(data: &AlmostAbelianData) -> Result<PComponents> {
    let verdict = require_skt(data)?;
    let w = data.a_mat.transpose() * &data.v * -0.25;
    Ok(PComponents { c: c_value(data.a, &data.v, verdict.k), w: w.iter().copied().collect() })
}

/// Full `P` assembled from its components.
pub fn p_matrix(data: &AlmostAbelianData, comps: &PComponents) -> DMatrix<f64> {
    let m = data.m();
    let n = m + 2;
    let w = DVector::from_column_slice(&comps.w);
    let jw = &data.j1 * &w;
    let mut p = DMatrix::zeros(n, n);
    p[(0, 0)] = comps.c;
    p[(n - 1, n - 1)] = comps.c;
    for i in 0..m {
        p[(0, 1 + i)] = w[i];
        p[(1 + i, 0)] = w[i];
        p[(1 + i, n - 1)] = jw[i];
        p[(n - 1, 1 + i)] = jw[i];
    }
    p
}

/// The gauge term `U_μ`, skew-symmetric and `J`-commuting.
pub fn gauge_u(data: &AlmostAbelianData) -> DMatrix<f64> {
    let m = data.m();
    let n = m + 2;
    let w = data.a_mat.transpose() * &data.v * -0.25;
    let jw = &data.j1 * &w;
    let mut u = DMatrix::zeros(n, n);
    for i in 0..m {
        u[(0, 1 + i)] = w[i];
        u[(1 + i, 0)] = -w[i];
        u[(1 + i, n - 1)] = -jw[i];
        u[(n - 1, 1 + i)] = jw[i];
    }
    let mid = (&data.a_mat - data.a_mat.transpose()) * (data.a / 4.0);
    u.view_mut((1, 1), (m, m)).copy_from(&mid);
    u
}

/// `S = (k/4 − ½)a² Id − ½AAᵀ + (a/4)(A + Aᵀ)`.
pub fn s_operator(a: f64, a_mat: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let m = a_mat.nrows();
    DMatrix::identity(m, m) * ((k as f64 / 4.0 - 0.5) * a * a) - a_mat * a_mat.transpose() * 0.5
        + (a_mat + a_mat.transpose()) * (a / 4.0)
}

/// A tangent vector `(a', v', A')` to the reduced state space.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedTangent {
    pub a: f64,
    pub v: DVector<f64>,
    pub a_mat: DMatrix<f64>,
}

/// `a' = ca`, `v' = cv + Sv − ½‖v‖²v`, `A' = cA`, for a frozen `k`.
pub fn reduced_vector_field(data: &AlmostAbelianData, k: usize) -> ReducedTangent {
    let c = c_value(data.a, &data.v, k);
    let s = s_operator(data.a, &data.a_mat, k);
    let v = &data.v;
    ReducedTangent {
        a: c * data.a,
        v: v * c + &s * v - v * (0.5 * v.norm_squared()),
        a_mat: &data.a_mat * c,
    }
}

/// `(0, Sv − ½‖v‖²v, 0)` with `S` evaluated at the given `(a, A)`.
pub fn normalized_vector_field(data: &AlmostAbelianData, k: usize) -> ReducedTangent {
    let s = s_operator(data.a, &data.a_mat, k);
    let v = &data.v;
    ReducedTangent {
        a: 0.0,
        v: &s * v - v * (0.5 * v.norm_squared()),
        a_mat: DMatrix::zeros(data.m(), data.m()),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenComponent {
    pub lambda: f64,
    pub multiplicity: usize,
    /// `½‖v_i‖²` for the projection `v_i` of `v` to the eigenspace.
    pub r: f64,
    /// `2λ r − ‖v‖² r`.
    pub r_dot: f64,
}

/// Decomposition of `v` over the eigenspaces of `S`; eigenvalues closer than
/// `1e-8‖S‖` are merged.
pub fn eigencomponent_dynamics(data: &AlmostAbelianData) -> Result<Vec<EigenComponent>> {
    let verdict = require_skt(data)?;
    let s = s_operator(data.a, &data.a_mat, verdict.k);
    let (vals, vecs) = linalg::symmetric_eigen_sorted(&s);
    let gap = 1e-8 * s.norm();
    let vv = data.v.norm_squared();
    let mut out: Vec<EigenComponent> = Vec::new();
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && vals[end] - vals[end - 1] <= gap {
            end += 1;
        }
        let cols = vecs.columns(start, end - start);
        let coeffs = cols.transpose() * &data.v;
        let lambda = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        let r = 0.5 * coeffs.norm_squared();
        out.push(EigenComponent { lambda, multiplicity: end - start, r, r_dot: 2.0 * lambda * r - vv * r });
        start = end;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReducedMode {
    #[default]
    Unnormalized,
    ANormFixed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AaDiagnostics {
    pub t: f64,
    pub a: f64,
    pub v_norm: f64,
    pub a_norm: f64,
    pub c: f64,
    pub skt_residual: f64,
    pub normality_defect: f64,
    /// `a²/‖A‖²`, NaN when `A = 0`.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct AaTrajectory {
    pub trajectory: Trajectory,
    pub mode: ReducedMode,
    pub k: usize,
    pub j1: DMatrix<f64>,
    pub diagnostics: Vec<AaDiagnostics>,
}

impl AaTrajectory {
    pub fn state_at(&self, idx: usize) -> AlmostAbelianData {
        AlmostAbelianData::from_state(&self.trajectory.states[idx], &self.j1)
    }

    pub fn final_data(&self) -> AlmostAbelianData {
        AlmostAbelianData::from_state(self.trajectory.final_state(), &self.j1)
    }
}

/// Integrator settings suited to the reduced system: blow-up once
/// `a² + ‖v‖² + ‖A‖² > 1e12`, with `‖state‖ ~ (T − t)^{−1/2}`.
pub fn reduced_config(horizon: f64) -> IntegratorConfig {
    IntegratorConfig { horizon, blowup_norm: 1e6, blowup_exponent: 0.5, ..Default::default() }
}

fn state_diagnostics(t: f64, d: &AlmostAbelianData, k: usize) -> AaDiagnostics {
    let scale = d.scale();
    let residual = if scale > 0.0 {
        let e = &d.a_mat * d.a + &d.a_mat * &d.a_mat + d.a_mat.transpose() * &d.a_mat;
        linalg::sym_part(&e).norm() / scale
    } else {
        0.0
    };
    let normality = if scale > 0.0 {
        linalg::commutator(&d.a_mat, &d.a_mat.transpose()).norm() / scale
    } else {
        0.0
    };
    let an = d.a_mat.norm();
    AaDiagnostics {
        t,
        a: d.a,
        v_norm: d.v.norm(),
        a_norm: an,
        c: c_value(d.a, &d.v, k),
        skt_residual: residual,
        normality_defect: normality,
        ratio: if an > 0.0 { d.a * d.a / (an * an) } else { f64::NAN },
    }
}

/// Integrate the reduced system from an SKT initial datum.
pub fn integrate_reduced_flow(
    data0: &AlmostAbelianData,
    mode: ReducedMode,
    cfg: &IntegratorConfig,
) -> Result<AaTrajectory> {
    let verdict = require_skt(data0)?;
    if data0.scale() == 0.0 && data0.v.norm() > 0.0 {
        return Err(Error::NilpotentInput);
    }
    let k = verdict.k;
    let j1 = data0.j1.clone();
    let frozen = data0.clone();
    let field = |x: &DVector<f64>| {
        let d = AlmostAbelianData::from_state(x, &j1);
        let t = match mode {
            ReducedMode::Unnormalized => reduced_vector_field(&d, k),
            ReducedMode::ANormFixed => {
                let mut f = frozen.clone();
                f.v = d.v.clone();
                normalized_vector_field(&f, k)
            }
        };
        let mut out = DVector::zeros(x.len());
        out[0] = t.a;
        let m = t.v.len();
        out.rows_mut(1, m).copy_from(&t.v);
        out.rows_mut(1 + m, m * m).copy_from_slice(t.a_mat.as_slice());
        out
    };
    let trajectory = flow::integrate(field, &data0.to_state(), cfg)?;
    debug!(
        "reduced flow: {:?} at t = {} after {} steps",
        trajectory.terminal().kind,
        trajectory.terminal().t,
        trajectory.stats.accepted
    );
    let diagnostics = trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .map(|(&t, x)| state_diagnostics(t, &AlmostAbelianData::from_state(x, &data0.j1), k))
        .collect();
    Ok(AaTrajectory { trajectory, mode, k, j1: data0.j1.clone(), diagnostics })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AaSolitonCertificate {
    pub kind: SolitonKind,
    /// Cosmological constant; equals `c`.
    pub alpha: f64,
    /// Derivation from the general least-squares fit, row-major.
    pub derivation: Vec<Vec<f64>>,
    /// `‖Sv − ½‖v‖²v‖ / scale^{3/2}`.
    pub residual: f64,
    /// `½‖v‖²` when `v ≠ 0` is an eigenvector of `S`.
    pub eigen_lambda: Option<f64>,
    /// `α` and residual of the general fit `P = α Id + ½(D + Dᵀ)`.
    pub general_alpha: f64,
    pub general_residual: f64,
}

/// Soliton test by the eigenvector criterion, cross-validated by the general
/// least-squares fit on the full bracket.
pub fn soliton_certificate(data: &AlmostAbelianData, tol: f64) -> Result<AaSolitonCertificate> {
    let verdict = require_skt(data)?;
    let k = verdict.k;
    let comps = p_components(data)?;
    let scale = data.scale() + data.v.norm_squared();
    let root = scale.sqrt();
    let big_lambda = (k as f64 / 4.0 - 0.5) * data.a * data.a;
    let vv = data.v.norm_squared();

    let (kind, residual, eigen_lambda) = if scale == 0.0 {
        (SolitonKind::KahlerRicciFlat, 0.0, None)
    } else if data.v.norm() <= tol * root {
        let kind = if data.a.abs() <= tol * root {
            SolitonKind::KahlerRicciFlat
        } else if k < 2 {
            SolitonKind::Expanding
        } else if k == 2 {
            SolitonKind::Steady
        } else {
            SolitonKind::Shrinking
        };
        (kind, 0.0, None)
    } else {
        let s = s_operator(data.a, &data.a_mat, k);
        let res = (&s * &data.v - &data.v * (0.5 * vv)).norm() / scale.powf(1.5);
        if res < tol {
            let lambda = 0.5 * vv;
            let kind = if (lambda - big_lambda).abs() <= tol * scale {
                SolitonKind::Steady
            } else if lambda < big_lambda {
                SolitonKind::Shrinking
            } else {
                SolitonKind::Expanding
            };
            (kind, res, Some(lambda))
        } else {
            (SolitonKind::NotSoliton, res, None)
        }
    };

    let mu = build_bracket(data);
    let frame = data.frame();
    let p = p_matrix(data, &comps);
    let fit = hermitian::fit_soliton(&mu, &p, &frame);
    Ok(AaSolitonCertificate {
        kind,
        alpha: comps.c,
        derivation: linalg::to_rows(&fit.derivation),
        residual,
        eigen_lambda,
        general_alpha: fit.alpha,
        general_residual: fit.residual / scale.max(f64::MIN_POSITIVE),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableCase {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Extinction {
    Finite,
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LimitKind {
    Zero,
    Nonzero,
    Blowup,
    DataDependent,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub table_case: TableCase,
    pub k: usize,
    pub unimodular: bool,
    #[serde(rename = "predicted_T")]
    pub predicted_t: Extinction,
    pub predicted_limit: LimitKind,
    pub soliton_type_at_limit: SolitonKind,
    pub v_in_image_a: bool,
    /// `‖(I − AA⁺)v‖/‖v‖`, zero for `v = 0`.
    pub image_residual: f64,
}

/// Relative distance of `v` from the image of `A`.
pub fn image_residual(a_mat: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let nv = v.norm();
    if nv == 0.0 {
        return 0.0;
    }
    let (_, res) = linalg::lstsq(a_mat, v, RANK_RTOL);
    res / nv
}

/// Classification row of an SKT datum. Nilpotent data with `v ≠ 0` belongs to the
/// nilpotent flow and is rejected.
pub fn classify(data: &AlmostAbelianData, tol: f64) -> Result<ClassificationReport> {
    let verdict = require_skt(data)?;
    let scale = data.scale();
    if scale == 0.0 && data.v.norm() > 0.0 {
        return Err(Error::NilpotentInput);
    }
    let root = scale.sqrt();
    let k = verdict.k;
    let a_zero = data.a.abs() <= tol * root.max(f64::MIN_POSITIVE);
    let img = image_residual(&data.a_mat, &data.v);
    let in_image = img < IMAGE_TOL;
    use Extinction::*;
    use LimitKind::*;
    let (table_case, predicted_t, predicted_limit, kind) = match k {
        0 if a_zero => (TableCase::I, Infinite, DataDependent, SolitonKind::KahlerRicciFlat),
        0 => (TableCase::Ii, Infinite, Zero, SolitonKind::Expanding),
        1 => (TableCase::Iii, Infinite, Zero, SolitonKind::Expanding),
        2 => (TableCase::Iv, Infinite, DataDependent, SolitonKind::Steady),
        _ if !in_image => (TableCase::V, Infinite, Nonzero, SolitonKind::Steady),
        _ => (TableCase::Vi, Finite, Blowup, SolitonKind::Shrinking),
    };
    let trace = data.a + data.a_mat.trace();
    Ok(ClassificationReport {
        table_case,
        k,
        unimodular: trace.abs() <= tol * root.max(1.0),
        predicted_t,
        predicted_limit,
        soliton_type_at_limit: kind,
        v_in_image_a: in_image,
        image_residual: img,
    })
}

/// Largest relative deviation of an unnormalized trajectory from
/// `x(t) = (1 − 2αt)^{−1/2} x₀`, with `α` from the soliton certificate.
pub fn self_similar_check(data: &AlmostAbelianData, traj: &AaTrajectory) -> Result<f64> {
    let cert = soliton_certificate(data, LEMMA_TOL)?;
    if cert.kind == SolitonKind::NotSoliton {
        return Err(Error::InvalidData("initial datum is not a soliton".into()));
    }
    let x0 = data.to_state();
    let n0 = x0.norm();
    let mut worst = 0.0_f64;
    for (t, x) in traj.trajectory.times.iter().zip(&traj.trajectory.states) {
        let s = (1.0 - 2.0 * cert.alpha * t).powf(-0.5);
        let expected = &x0 * s;
        let dev = (x - &expected).norm() / (n0 * s).max(f64::MIN_POSITIVE);
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Compatibility with a generalized Kähler structure for the pair
/// `J± = [[0, 0, −1], [0, ±J₁, 0], [1, 0, 0]]`: the lemma residual is below
/// `tol` and `v` vanishes.
pub fn generalized_kahler_check(data: &AlmostAbelianData, tol: f64) -> bool {
    let scale = data.scale();
    let residual = if scale > 0.0 {
        let e = &data.a_mat * data.a + &data.a_mat * &data.a_mat + data.a_mat.transpose() * &data.a_mat;
        linalg::sym_part(&e).norm() / scale
    } else {
        0.0
    };
    residual < tol && data.v.norm() <= tol * scale.sqrt().max(1.0)
}

/// Observed fate of the unnormalized flow. A run to `horizon` that blows up
/// gives `Blowup`; one whose norm moved by less than `1e-3` (relative) over
/// its last decade gives `Nonzero`. Otherwise the slow `t^{-1/2}` decay is
/// followed to `t = 1e16`: `Zero` below norm `1e-6`, else `DataDependent`.
pub fn observe_limit(data: &AlmostAbelianData, horizon: f64) -> Result<LimitKind> {
    let run = integrate_reduced_flow(data, ReducedMode::Unnormalized, &reduced_config(horizon))?;
    let tr = &run.trajectory;
    if tr.terminal().kind == flow::EventKind::Blowup {
        return Ok(LimitKind::Blowup);
    }
    let t_end = tr.final_time();
    let n_final = tr.final_state().norm();
    let late = tr.times.iter().position(|&t| t >= t_end / 10.0).unwrap_or(0);
    let n_late = tr.states[late].norm();
    if n_final > 0.0 && ((n_final - n_late) / n_final).abs() < 1e-3 {
        return Ok(LimitKind::Nonzero);
    }
    let cfg = IntegratorConfig { fixedpoint_norm: 0.0, ..reduced_config(1e16) };
    let long = integrate_reduced_flow(data, ReducedMode::Unnormalized, &cfg)?;
    Ok(if long.trajectory.final_state().norm() < 1e-6 { LimitKind::Zero } else { LimitKind::DataDependent })
}
