//! Pluriclosed bracket flow on 2-step nilpotent Lie algebras.
//!
//! Here `P_μ` is the (1,1)-part of the Ricci endomorphism compressed to the
//! complement `v` of the center, and the normalized flow is the negative
//! gradient flow of `F(ν) = 16‖P_ν‖²/‖ν‖⁴`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{InnerProductConvention, LieBracket};
use crate::error::{Error, Result};
use crate::flow::{self, EventKind, IntegratorConfig, Trajectory};
use crate::hermitian::{self, HermitianFrame, SolitonFit, SolitonKind};
use crate::linalg::{self, RANK_RTOL};

/// Relative tolerance on the 2-step and center-invariance checks.
pub const STRUCTURE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct NilpotentSplitting {
    pub bracket: LieBracket,
    /// Orthonormal columns spanning the center.
    pub z_basis: DMatrix<f64>,
    /// Orthonormal columns spanning the orthogonal complement of the center.
    pub v_basis: DMatrix<f64>,
}

impl NilpotentSplitting {
    pub fn new(mu: &LieBracket, frame: &HermitianFrame) -> Result<Self> {
        let n = mu.dim();
        if frame.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: frame.dim() });
        }
        let scale = mu.max_abs();
        let two_step = if scale > 0.0 { mu.two_step_residual() / (scale * scale) } else { 0.0 };
        if two_step > STRUCTURE_TOL {
            return Err(Error::NotTwoStep(two_step));
        }
        let z = mu.center();
        let jz = frame.j() * &z;
        let leak = (&jz - &z * (z.transpose() * &jz)).amax();
        if leak > STRUCTURE_TOL {
            return Err(Error::CenterNotInvariant);
        }
        let v = if z.ncols() == 0 {
            DMatrix::identity(n, n)
        } else {
            linalg::null_space(&z.transpose(), RANK_RTOL)
        };
        Ok(NilpotentSplitting { bracket: mu.clone(), z_basis: z, v_basis: v })
    }

    /// Orthogonal projector onto `v`.
    pub fn v_projector(&self) -> DMatrix<f64> {
        &self.v_basis * self.v_basis.transpose()
    }
}

/// Ricci endomorphism of the left-invariant metric,
/// `⟨Ric X, Y⟩ = −½Σ⟨μ(X,e_i),e_j⟩⟨μ(Y,e_i),e_j⟩ + ¼Σ⟨μ(e_i,e_j),X⟩⟨μ(e_i,e_j),Y⟩`.
pub fn ricci_endomorphism(mu: &LieBracket) -> DMatrix<f64> {
    let n = mu.dim();
    let t = mu.dense();
    let rows = DMatrix::from_row_slice(n, n * n, &t);
    let cols = DMatrix::from_row_slice(n * n, n, &t);
    rows.clone() * rows.transpose() * -0.5 + cols.transpose() * cols * 0.25
}

/// `(Π_v Ric Π_v)^{1,1}` for a fixed projector onto `v`.
fn p_from_projector(mu: &LieBracket, pv: &DMatrix<f64>, j: &DMatrix<f64>) -> DMatrix<f64> {
    let q = pv * ricci_endomorphism(mu) * pv;
    (&q - j * &q * j) * 0.5
}

/// `P_μ` of the bracket stored in the splitting.
pub fn p_endomorphism_nil(split: &NilpotentSplitting, frame: &HermitianFrame) -> DMatrix<f64> {
    p_from_projector(&split.bracket, &split.v_projector(), frame.j())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MomentGroup {
    GlFull,
    GlVJ,
}

/// Moment map `m(μ)`: `(4/‖μ‖²) Ric_μ` for the full group, `(4/‖μ‖²) P_μ` for
/// `GL(v, J)`. Norms use the ordered-pairs convention.
pub fn moment_map(
    mu: &LieBracket,
    group: MomentGroup,
    split: &NilpotentSplitting,
    frame: &HermitianFrame,
) -> Result<DMatrix<f64>> {
    let nn = mu.norm_sq(InnerProductConvention::OrderedPairs);
    if nn == 0.0 {
        return Err(Error::ZeroBracket);
    }
    let m = match group {
        MomentGroup::GlFull => ricci_endomorphism(mu),
        MomentGroup::GlVJ => p_from_projector(mu, &split.v_projector(), frame.j()),
    };
    Ok(m * (4.0 / nn))
}

/// `F(μ) = 16‖P_μ‖²/‖μ‖⁴`.
pub fn functional_f(mu: &LieBracket, split: &NilpotentSplitting, frame: &HermitianFrame) -> Result<f64> {
    Ok(moment_map(mu, MomentGroup::GlVJ, split, frame)?.norm_squared())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Normalization {
    #[default]
    None,
    UnitNorm,
}

/// Vector fields of the flow in flat bracket coordinates.
///
/// `P` is taken from the Bismut-Ricci form. On pluriclosed brackets this is
/// the projected Ricci endomorphism, but off that variety the Ricci version
/// does not preserve the pluriclosed condition, and roundoff near a soliton
/// limit is amplified until the trajectory leaves it.
#[derive(Clone, Debug)]
pub struct NilFlowField {
    dim: usize,
    frame: HermitianFrame,
}

impl NilFlowField {
    pub fn new(split: &NilpotentSplitting, frame: &HermitianFrame) -> Self {
        NilFlowField { dim: split.bracket.dim(), frame: frame.clone() }
    }

    pub fn bracket(&self, x: &DVector<f64>) -> LieBracket {
        LieBracket::from_flat(self.dim, x.as_slice().to_vec()).expect("flat length fixed by the field")
    }

    pub fn p(&self, mu: &LieBracket) -> DMatrix<f64> {
        hermitian::p_endomorphism(mu, &self.frame)
    }

    /// `−π(P_μ)μ`.
    pub fn unnormalized(&self, mu: &LieBracket) -> LieBracket {
        mu.pi(&self.p(mu)).scaled(-1.0)
    }

    /// `−π(P_ν + r_ν Id)ν` with `r_ν = ⟨π(P_ν)ν, ν⟩/‖ν‖²`.
    pub fn normalized(&self, mu: &LieBracket) -> LieBracket {
        let p = self.p(mu);
        let pp = mu.pi(&p);
        let nn = mu.norm_sq(InnerProductConvention::OrderedPairs);
        if nn == 0.0 {
            return pp;
        }
        let r = pp.inner(mu, InnerProductConvention::OrderedPairs) / nn;
        // π(Id)μ = −μ
        pp.add_scaled(-r, mu).scaled(-1.0)
    }

    pub fn eval(&self, x: &DVector<f64>, normalization: Normalization) -> DVector<f64> {
        let mu = self.bracket(x);
        let f = match normalization {
            Normalization::None => self.unnormalized(&mu),
            Normalization::UnitNorm => self.normalized(&mu),
        };
        DVector::from_vec(f.into_flat())
    }
}

/// Per-state diagnostics of a nilpotent trajectory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NilDiagnostics {
    pub t: f64,
    pub norm: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub tr_p: f64,
    /// Largest principal sine between the current and initial centers.
    pub center_drift: f64,
    /// Largest `|dc|` coefficient divided by `‖μ‖²`.
    pub skt_residual: f64,
}

#[derive(Clone, Debug)]
pub struct NilTrajectory {
    pub dim: usize,
    pub trajectory: Trajectory,
    pub normalization: Normalization,
    pub diagnostics: Vec<NilDiagnostics>,
    /// Newton-refined limit and its field norm, for unit-norm runs that stop
    /// at a fixed point.
    pub refined_limit: Option<(LieBracket, f64)>,
}

impl NilTrajectory {
    pub fn bracket_at(&self, idx: usize) -> LieBracket {
        let x = &self.trajectory.states[idx];
        LieBracket::from_flat(self.dim, x.as_slice().to_vec()).expect("stored states are brackets")
    }
}

/// Scale-invariant quantities for one state.
pub fn diagnostics(
    t: f64,
    mu: &LieBracket,
    split: &NilpotentSplitting,
    frame: &HermitianFrame,
) -> NilDiagnostics {
    let conv = InnerProductConvention::OrderedPairs;
    let nn = mu.norm_sq(conv);
    let p = p_from_projector(mu, &split.v_projector(), frame.j());
    let f = if nn > 0.0 { 16.0 * p.norm_squared() / (nn * nn) } else { 0.0 };
    let center_drift = linalg::max_principal_sine(&split.z_basis, &mu.center());
    let skt = hermitian::is_skt_general(mu, frame, f64::INFINITY).1;
    NilDiagnostics {
        t,
        norm: nn.sqrt(),
        f,
        tr_p: p.trace(),
        center_drift,
        skt_residual: if nn > 0.0 { skt / nn } else { 0.0 },
    }
}

/// Integrate the nilpotent bracket flow from `mu0`.
///
/// `UnitNorm` rescales `mu0` to unit norm (ordered-pairs convention) and keeps
/// it there. The fixed-point threshold of `cfg` applies to the flat field.
pub fn integrate_nil_flow(
    mu0: &LieBracket,
    frame: &HermitianFrame,
    normalization: Normalization,
    cfg: &IntegratorConfig,
) -> Result<NilTrajectory> {
    let conv = InnerProductConvention::OrderedPairs;
    let split = NilpotentSplitting::new(mu0, frame)?;
    let (skt, residual) = hermitian::is_skt_general(mu0, frame, STRUCTURE_TOL * mu0.max_abs().powi(2).max(1e-300));
    if !skt && !mu0.is_zero() {
        return Err(Error::NotPluriclosed(residual));
    }
    let field = NilFlowField::new(&split, frame);
    let mut x0 = DVector::from_column_slice(mu0.flat());
    let mut cfg = cfg.clone();
    if normalization == Normalization::UnitNorm && !mu0.is_zero() {
        // flat Euclidean norm is ‖μ‖/√2 in the ordered convention
        let target = 1.0 / conv.pair_weight().sqrt();
        x0 *= target / x0.norm();
        cfg.renormalize = Some(target);
    }
    let trajectory = flow::integrate(|x| field.eval(x, normalization), &x0, &cfg)?;

    let diagnostics = trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .map(|(&t, x)| diagnostics(t, &field.bracket(x), &split, frame))
        .collect();

    let refined_limit = (normalization == Normalization::UnitNorm
        && trajectory.terminal().kind == EventKind::FixedPoint
        && !mu0.is_zero())
    .then(|| refine_fixed_point(&field.bracket(trajectory.final_state()), &field, 8));

    Ok(NilTrajectory { dim: mu0.dim(), trajectory, normalization, diagnostics, refined_limit })
}

/// Gauss-Newton refinement of a unit-norm fixed point of the normalized flow.
/// Returns the refined bracket and the flat norm of the field there.
pub fn refine_fixed_point(nu: &LieBracket, field: &NilFlowField, iterations: usize) -> (LieBracket, f64) {
    let conv = InnerProductConvention::OrderedPairs;
    let target = nu.norm(conv);
    let eval = |x: &DVector<f64>| field.eval(x, Normalization::UnitNorm);
    let mut x = DVector::from_column_slice(nu.flat());
    let mut g = eval(&x);
    let m = x.len();
    let h = 1e-7;
    for _ in 0..iterations {
        if g.norm() < 1e-15 {
            break;
        }
        let mut jac = DMatrix::zeros(m, m);
        for c in 0..m {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            jac.set_column(c, &((eval(&xp) - eval(&xm)) / (2.0 * h)));
        }
        let (dx, _) = linalg::lstsq(&jac, &(-&g), 1e-8);
        let mut cand = &x + dx;
        let nc = cand.norm() * conv.pair_weight().sqrt();
        cand *= target / nc;
        let gc = eval(&cand);
        if gc.norm() >= g.norm() {
            break;
        }
        x = cand;
        g = gc;
    }
    (field.bracket(&x), g.norm())
}

/// Angles between the normalized field and the two versions of `−∇F`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradientCheck {
    /// Angle between the field and the closed-form `−∇F`.
    pub angle_closed_form: f64,
    /// Angle between the field and the finite-difference `−∇F`.
    pub angle_finite_difference: f64,
    /// `‖−∇F‖ / ‖field‖` for the closed form.
    pub ratio: f64,
    pub max_angle: f64,
}

fn angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 && nb == 0.0 {
        return 0.0;
    }
    if na == 0.0 || nb == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    // atan2 form is accurate for tiny angles
    let cross = (a * nb - b * na).norm();
    let dot = (a * nb + b * na).norm();
    2.0 * cross.atan2(dot)
}

/// Compare the unit-norm flow field with `−∇F`, where the gradient is taken
/// for the ordered-pairs inner product on bracket space.
pub fn gradient_equivalence_check(
    nu: &LieBracket,
    split: &NilpotentSplitting,
    frame: &HermitianFrame,
) -> Result<GradientCheck> {
    let conv = InnerProductConvention::OrderedPairs;
    let field = NilFlowField::new(split, frame);
    let x = DVector::from_column_slice(nu.flat());
    let flow_field = field.eval(&x, Normalization::UnitNorm);

    let m = moment_map(nu, MomentGroup::GlVJ, split, frame)?;
    let shift = m.norm_squared();
    let n = nu.dim();
    let closed = nu.pi(&(m + DMatrix::identity(n, n) * shift)).scaled(-4.0);
    let closed = DVector::from_vec(closed.into_flat());

    let f_at = |y: &DVector<f64>| -> Result<f64> { functional_f(&field.bracket(y), split, frame) };
    let h = 1e-6;
    let mut grad = DVector::zeros(x.len());
    for c in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[c] += h;
        xm[c] -= h;
        grad[c] = (f_at(&xp)? - f_at(&xm)?) / (2.0 * h);
    }
    // flat partials are twice the metric gradient in the ordered convention
    let fd = grad * (-1.0 / conv.pair_weight());

    let angle_closed_form = angle(&flow_field, &closed);
    let angle_finite_difference = angle(&flow_field, &fd);
    let nf = flow_field.norm();
    Ok(GradientCheck {
        angle_closed_form,
        angle_finite_difference,
        ratio: if nf > 0.0 { closed.norm() / nf } else { f64::NAN },
        max_angle: angle_closed_form.max(angle_finite_difference),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolitonCertificate {
    pub alpha: f64,
    pub derivation: Vec<Vec<f64>>,
    pub residual: f64,
    pub tr_p: f64,
    pub is_soliton: bool,
    pub kind: SolitonKind,
}

/// Algebraic soliton fit `P_ν = α Id + ½(D + Dᵀ)` for a 2-step bracket.
pub fn soliton_limit_certificate(nu: &LieBracket, frame: &HermitianFrame, tol: f64) -> Result<SolitonCertificate> {
    let split = NilpotentSplitting::new(nu, frame)?;
    let p = p_endomorphism_nil(&split, frame);
    let SolitonFit { alpha, derivation, residual } = hermitian::fit_soliton(nu, &p, frame);
    let is_soliton = residual < tol;
    Ok(SolitonCertificate {
        alpha,
        derivation: linalg::to_rows(&derivation),
        residual,
        tr_p: p.trace(),
        is_soliton,
        kind: if is_soliton { SolitonKind::from_alpha(alpha, tol) } else { SolitonKind::NotSoliton },
    })
}
