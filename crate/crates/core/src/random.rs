//! Seeded generators for test and sweep inputs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::algebra::{InnerProductConvention, LieBracket};
use crate::almost_abelian::AlmostAbelianData;
use crate::hermitian::HermitianFrame;

/// Deterministic per-item generator derived from a run seed and an index.
pub fn item_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn orthogonal_matrix<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..n {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

/// Random orthogonal matrix commuting with the complex structure `j`: the
/// exponential of a random skew matrix projected onto `[K, j] = 0`.
pub fn unitary_matrix<R: Rng>(rng: &mut R, j: &DMatrix<f64>) -> DMatrix<f64> {
    let n = j.nrows();
    let g = gaussian_matrix(rng, n, n);
    let k = &g - g.transpose();
    ((&k - j * &k * j) * 0.25).exp()
}

/// ω ∧ ω on R⁴ as a multiple of e⁰¹²³; `w` holds (01, 02, 03, 12, 13, 23).
fn wedge_sq(w: &[f64; 6]) -> f64 {
    2.0 * (w[0] * w[5] - w[1] * w[4] + w[2] * w[3])
}

const PAIRS4: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Splits a 2-form on R⁴ into its J-invariant and J-anti-invariant parts for
/// `J e0 = e1, J e2 = e3`.
fn split_form(w: &[f64; 6]) -> ([f64; 6], [f64; 6]) {
    let j = HermitianFrame::paired(4).expect("4 is even");
    let mut m = DMatrix::zeros(4, 4);
    for (c, &(a, b)) in PAIRS4.iter().enumerate() {
        m[(a, b)] = w[c];
        m[(b, a)] = -w[c];
    }
    let mj = j.j().transpose() * &m * j.j();
    let mut inv = [0.0; 6];
    let mut anti = [0.0; 6];
    for (c, &(a, b)) in PAIRS4.iter().enumerate() {
        inv[c] = 0.5 * (m[(a, b)] + mj[(a, b)]);
        anti[c] = 0.5 * (m[(a, b)] - mj[(a, b)]);
    }
    (inv, anti)
}

/// `−ψ(J·,·)` for the paired structure on R⁴.
fn twist_by_j(w: &[f64; 6]) -> [f64; 6] {
    let j = HermitianFrame::paired(4).expect("4 is even");
    let mut m = DMatrix::zeros(4, 4);
    for (c, &(a, b)) in PAIRS4.iter().enumerate() {
        m[(a, b)] = w[c];
        m[(b, a)] = -w[c];
    }
    let t = -(j.j().transpose() * m);
    let mut out = [0.0; 6];
    for (c, &(a, b)) in PAIRS4.iter().enumerate() {
        out[c] = t[(a, b)];
    }
    out
}

/// Random 2-step nilpotent SKT bracket with `v = span(e0..e3)` and center
/// `z = span(e4..)`, for the paired complex structure. The bracket has
/// `μ(x, y) = Σ_r ω_r(x, y) z_r`; the pluriclosed condition
/// `Σ_r ω_r ∧ ω_r(J·,J·) = 0` is met by rescaling the anti-invariant parts.
///
/// `dim_z` must be even and positive. The result has unit norm in the given
/// convention.
pub fn random_two_step_skt<R: Rng>(rng: &mut R, dim_z: usize, conv: InnerProductConvention) -> LieBracket {
    assert!(dim_z > 0 && dim_z.is_multiple_of(2));
    let dim = 4 + dim_z;
    loop {
        // J z_{2p} = z_{2p+1}; integrability ties the anti-invariant parts of
        // each pair together via ψ_b = −ψ_a(J·,·)
        let mut forms: Vec<([f64; 6], [f64; 6])> = Vec::with_capacity(dim_z);
        for _ in 0..dim_z / 2 {
            let mut wa = [0.0; 6];
            let mut wb = [0.0; 6];
            for x in wa.iter_mut().chain(wb.iter_mut()) {
                *x = rng.sample(StandardNormal);
            }
            let (inv_a, anti_a) = split_form(&wa);
            let (inv_b, _) = split_form(&wb);
            forms.push((inv_a, anti_a));
            forms.push((inv_b, twist_by_j(&anti_a)));
        }
        let q_inv: f64 = forms.iter().map(|(i, _)| wedge_sq(i)).sum();
        let q_anti: f64 = forms.iter().map(|(_, a)| wedge_sq(a)).sum();
        // need q_inv = s² q_anti with both well away from zero
        if q_inv.abs() < 1e-2 || q_anti.abs() < 1e-2 || q_inv.signum() != q_anti.signum() {
            continue;
        }
        let s = (q_inv / q_anti).sqrt();
        if !(0.1..=10.0).contains(&s) {
            continue;
        }
        let mut mu = LieBracket::zero(dim).expect("even dimension");
        for (r, (inv, anti)) in forms.iter().enumerate() {
            for (c, &(a, b)) in PAIRS4.iter().enumerate() {
                mu.set(a, b, 4 + r, inv[c] + s * anti[c]);
            }
        }
        let norm = mu.norm(conv);
        return mu.scaled(1.0 / norm);
    }
}

/// Random normal matrix `Q D Qᵀ` with `D` block diagonal: real 1×1 blocks and
/// 2×2 rotation-scaling blocks.
pub fn normal_matrix<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && rng.random_bool(0.5) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            d[(i, i)] = re;
            d[(i + 1, i + 1)] = re;
            d[(i, i + 1)] = -im;
            d[(i + 1, i)] = im;
            i += 2;
        } else {
            d[(i, i)] = rng.sample(StandardNormal);
            i += 1;
        }
    }
    let q = orthogonal_matrix(rng, n);
    &q * d * q.transpose()
}

/// Kind of random almost-abelian datum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AaSample {
    /// Normal `A` with eigenvalue real parts in `{0, −a/2}`.
    Skt,
    /// Normal `A` with arbitrary real parts.
    NormalGeneric,
    /// Gaussian `A` projected to commute with `J₁`.
    Generic,
}

/// Random `(a, v, A, J₁)` with `[A, J₁] = 0` and `dim n₁ = m`.
pub fn almost_abelian_data<R: Rng>(rng: &mut R, m: usize, kind: AaSample) -> AlmostAbelianData {
    assert!(m > 0 && m.is_multiple_of(2));
    let j0 = HermitianFrame::paired(m).expect("even dimension").j().clone();
    let a: f64 = if rng.random_bool(0.1) { 0.0 } else { rng.sample(StandardNormal) };
    let v = DVector::from_fn(m, |_, _| rng.sample(StandardNormal));
    let o = orthogonal_matrix(rng, m);
    let a0 = match kind {
        AaSample::Skt | AaSample::NormalGeneric => {
            // J₀-commuting orthogonal U = exp(K) with K skew and J₀-commuting
            let g = gaussian_matrix(rng, m, m);
            let k = &g - g.transpose();
            let k = (&k - &j0 * &k * &j0) * 0.25;
            let u = k.exp();
            let mut d = DMatrix::zeros(m, m);
            for b in 0..m / 2 {
                let re = if kind == AaSample::Skt {
                    if rng.random_bool(0.5) { -0.5 * a } else { 0.0 }
                } else {
                    rng.sample(StandardNormal)
                };
                let im: f64 = rng.sample(StandardNormal);
                d[(2 * b, 2 * b)] = re;
                d[(2 * b + 1, 2 * b + 1)] = re;
                d[(2 * b, 2 * b + 1)] = -im;
                d[(2 * b + 1, 2 * b)] = im;
            }
            &u * d * u.transpose()
        }
        AaSample::Generic => {
            let g = gaussian_matrix(rng, m, m);
            (&g - &j0 * &g * &j0) * 0.5
        }
    };
    let a_mat = &o * a0 * o.transpose();
    let j1 = &o * j0 * o.transpose();
    // exact commutation up to the roundoff of the conjugation
    let a_mat = (&a_mat - &j1 * &a_mat * &j1) * 0.5;
    AlmostAbelianData::new(a, v, a_mat, j1).expect("constructed data is valid")
}
