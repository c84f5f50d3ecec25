//! Eigenvalue-norm inequalities for real matrices and the normality gradient
//! flow `E' = 4[E, [E, Eᵀ]]`.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flow::{self, IntegratorConfig, Trajectory};
use crate::linalg;
use crate::random;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    /// `‖E‖²`.
    pub frobenius_sq: f64,
    /// `Σ |λ_i|²`.
    pub eigen_abs_sq_sum: f64,
    /// `‖S(E)‖²` for the symmetric part `S(E)`.
    pub sym_part_sq: f64,
    /// `Σ (Re λ_i)²`.
    pub re_sq_sum: f64,
    /// `‖[E, Eᵀ]‖`.
    pub normality_defect: f64,
}

impl NormalityReport {
    /// `‖E‖² − Σ|λ|²`.
    pub fn frobenius_gap(&self) -> f64 {
        self.frobenius_sq - self.eigen_abs_sq_sum
    }

    /// `‖S(E)‖² − Σ(Re λ)²`.
    pub fn sym_gap(&self) -> f64 {
        self.sym_part_sq - self.re_sq_sum
    }
}

pub fn normality_report(e: &DMatrix<f64>) -> Result<NormalityReport> {
    let ev = linalg::complex_eigenvalues(e)?;
    Ok(NormalityReport {
        frobenius_sq: e.norm_squared(),
        eigen_abs_sq_sum: ev.iter().map(|z| z.norm_sqr()).sum(),
        sym_part_sq: linalg::sym_part(e).norm_squared(),
        re_sq_sum: ev.iter().map(|z| z.re * z.re).sum(),
        normality_defect: linalg::commutator(e, &e.transpose()).norm(),
    })
}

/// `4[E, [E, Eᵀ]]`, a negative gradient field for `‖[E, Eᵀ]‖²`; along it
/// `d/dt ‖E‖² = −8‖[E, Eᵀ]‖²`.
pub fn normality_field(e: &DMatrix<f64>) -> DMatrix<f64> {
    let c = linalg::commutator(e, &e.transpose());
    linalg::commutator(e, &c) * 4.0
}

#[derive(Clone, Debug)]
pub struct NormalityTrajectory {
    pub n: usize,
    pub trajectory: Trajectory,
    /// `‖[E, Eᵀ]‖` at each recorded state.
    pub defects: Vec<f64>,
    /// Largest assignment distance between the initial spectrum and the
    /// spectrum of a recorded state.
    pub spectrum_drift: f64,
    /// Whether `‖[E, Eᵀ]‖` never increased while above the noise floor
    /// `100·rel_tol·‖E₀‖²`, and never rose above that floor once below it.
    pub monotone: bool,
}

impl NormalityTrajectory {
    pub fn matrix_at(&self, idx: usize) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.n, self.trajectory.states[idx].as_slice())
    }

    pub fn final_matrix(&self) -> DMatrix<f64> {
        self.matrix_at(self.trajectory.states.len() - 1)
    }
}

/// Integrates the normality flow. `horizon` overrides `cfg.horizon`.
pub fn normality_flow(e0: &DMatrix<f64>, horizon: f64, cfg: &IntegratorConfig) -> Result<NormalityTrajectory> {
    let n = e0.nrows();
    let cfg = IntegratorConfig { horizon, ..cfg.clone() };
    let field = |x: &DVector<f64>| {
        let e = DMatrix::from_column_slice(n, n, x.as_slice());
        DVector::from_column_slice(normality_field(&e).as_slice())
    };
    let x0 = DVector::from_column_slice(e0.as_slice());
    let trajectory = flow::integrate(field, &x0, &cfg)?;
    let spec0 = linalg::complex_eigenvalues(e0)?;
    let mut defects = Vec::with_capacity(trajectory.states.len());
    let mut drift = 0.0_f64;
    for x in &trajectory.states {
        let e = DMatrix::from_column_slice(n, n, x.as_slice());
        defects.push(linalg::commutator(&e, &e.transpose()).norm());
        let spec: Vec<Complex<f64>> = linalg::complex_eigenvalues(&e)?;
        drift = drift.max(linalg::assignment_distance(&spec0, &spec));
    }
    // below this level the defect is integrator noise
    let floor = 100.0 * cfg.rel_tol * e0.norm_squared();
    let monotone = defects.windows(2).all(|w| if w[0] > floor { w[1] <= w[0] } else { w[1] <= floor });
    Ok(NormalityTrajectory { n, trajectory, defects, spectrum_drift: drift, monotone })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub count: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub seed: u64,
    /// Every `normal_every`-th matrix is drawn normal; 0 draws only Gaussians.
    pub normal_every: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { count: 10_000, min_dim: 2, max_dim: 10, seed: 0, normal_every: 0 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepSummary {
    pub count: usize,
    pub normal_drawn: usize,
    pub min_frobenius_gap: f64,
    pub min_sym_gap: f64,
    /// Matrices with a gap below `−1e-10`.
    pub violations: usize,
    /// Matrices where `gap < 1e-8` and `defect < 1e-6` disagree.
    pub band_mismatches: usize,
}

/// Draws one sweep item; reproducible from `(seed, index)`.
pub fn sweep_item(cfg: &SweepConfig, index: usize) -> DMatrix<f64> {
    let mut rng = random::item_rng(cfg.seed, index as u64);
    let n = rng.random_range(cfg.min_dim..=cfg.max_dim);
    if cfg.normal_every > 0 && index.is_multiple_of(cfg.normal_every) {
        random::normal_matrix(&mut rng, n)
    } else {
        random::gaussian_matrix(&mut rng, n, n)
    }
}

/// Checks both inequalities on one matrix; returns `(violation, band_mismatch)`.
pub fn sweep_check(report: &NormalityReport) -> (bool, bool) {
    let gap = report.frobenius_gap().max(report.sym_gap());
    let violation = report.frobenius_gap() < -1e-10 || report.sym_gap() < -1e-10;
    let mismatch = (gap < 1e-8) != (report.normality_defect < 1e-6);
    (violation, mismatch)
}

/// Serial inequality sweep.
pub fn inequality_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    let mut s = SweepSummary { min_frobenius_gap: f64::INFINITY, min_sym_gap: f64::INFINITY, ..Default::default() };
    for i in 0..cfg.count {
        let e = sweep_item(cfg, i);
        let r = normality_report(&e)?;
        s.merge_one(&r, cfg.normal_every > 0 && i % cfg.normal_every == 0);
    }
    Ok(s)
}

impl SweepSummary {
    pub fn merge_one(&mut self, r: &NormalityReport, normal: bool) {
        let (violation, mismatch) = sweep_check(r);
        self.count += 1;
        self.normal_drawn += normal as usize;
        self.min_frobenius_gap = self.min_frobenius_gap.min(r.frobenius_gap());
        self.min_sym_gap = self.min_sym_gap.min(r.sym_gap());
        self.violations += violation as usize;
        self.band_mismatches += mismatch as usize;
    }
}
