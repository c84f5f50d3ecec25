//! Lie brackets as structure-constant tensors in `Λ²g* ⊗ g`.
//!
//! A [`LieBracket`] on a real vector space of even dimension `N` with its
//! canonical orthonormal basis `e_0, …, e_{N-1}` stores the coefficients
//! `μ(e_i, e_j) = Σ_k c_{ij}^k e_k` for `i < j` only; the other half is implied
//! by antisymmetry. The flat coefficient vector is also the state vector the
//! flow integrators work with.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_RTOL};

/// How the canonical inner product on `g` is extended to brackets.
///
/// `OrderedPairs` sums `⟨μ(e_i,e_j), ν(e_i,e_j)⟩` over all ordered pairs and is
/// the convention under which the moment map equals `4 Ric / ‖μ‖²`.
/// `UnorderedPairs` only sums over `i < j`, giving exactly half the value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InnerProductConvention {
    #[default]
    OrderedPairs,
    UnorderedPairs,
}

impl InnerProductConvention {
    /// Factor relating this inner product to the Euclidean product of the
    /// flat `i < j` coefficient vectors.
    pub fn pair_weight(self) -> f64 {
        match self {
            InnerProductConvention::OrderedPairs => 2.0,
            InnerProductConvention::UnorderedPairs => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieBracket {
    dim: usize,
    coeffs: Vec<f64>,
}

/// Number of unordered basis pairs `i < j` in dimension `dim`.
pub fn num_pairs(dim: usize) -> usize {
    dim * dim.saturating_sub(1) / 2
}

/// Dimension of the bracket space `Λ²g* ⊗ g` as a flat vector.
pub fn flat_len(dim: usize) -> usize {
    num_pairs(dim) * dim
}

#[inline]
fn pair_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < dim);
    i * dim - i * (i + 1) / 2 + (j - i - 1)
}

impl LieBracket {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::OddDimension(dim));
        }
        Ok(LieBracket {
            dim,
            coeffs: vec![0.0; flat_len(dim)],
        })
    }

    pub fn from_flat(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        let mut b = LieBracket::zero(dim)?;
        if coeffs.len() != b.coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: b.coeffs.len(),
                got: coeffs.len(),
            });
        }
        b.coeffs = coeffs;
        Ok(b)
    }

    /// Build from `(i, j, k, c)` entries meaning `μ(e_i, e_j)` has `e_k`
    /// component `c` (0-based, `i != j`; entries accumulate).
    pub fn from_entries(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut b = LieBracket::zero(dim)?;
        for &(i, j, k, c) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidEntry { i, j, k, reason: "index out of range" });
            }
            if i == j {
                return Err(Error::InvalidEntry { i, j, k, reason: "i == j" });
            }
            b.add(i, j, k, c);
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flat(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `e_k` in `μ(e_i, e_j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 0.0,
            Less => self.coeffs[pair_index(self.dim, i, j) * self.dim + k],
            Greater => -self.coeffs[pair_index(self.dim, j, i) * self.dim + k],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, c: f64) {
        assert_ne!(i, j, "μ(e_i, e_i) is zero by antisymmetry");
        if i < j {
            self.coeffs[pair_index(self.dim, i, j) * self.dim + k] = c;
        } else {
            self.coeffs[pair_index(self.dim, j, i) * self.dim + k] = -c;
        }
    }

    pub fn add(&mut self, i: usize, j: usize, k: usize, c: f64) {
        let cur = self.get(i, j, k);
        self.set(i, j, k, cur + c);
    }

    /// Dense `N × N × N` copy, indexed `[i][j][k]` as `i*N*N + j*N + k`.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut t = vec![0.0; n * n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let base = pair_index(n, i, j) * n;
                for k in 0..n {
                    let c = self.coeffs[base + k];
                    t[(i * n + j) * n + k] = c;
                    t[(j * n + i) * n + k] = -c;
                }
            }
        }
        t
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: len });
        }
        Ok(())
    }

    /// `μ(x, y)` for arbitrary vectors.
    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let w = x[i] * y[j] - x[j] * y[i];
                if w == 0.0 {
                    continue;
                }
                let base = pair_index(n, i, j) * n;
                for k in 0..n {
                    out[k] += w * self.coeffs[base + k];
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad_x = μ(x, ·)`.
    pub fn ad(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(x.len())?;
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    m[(k, j)] += x[i] * self.get(i, j, k);
                }
            }
        }
        Ok(m)
    }

    pub fn ad_basis(&self, i: usize) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, j| self.get(i, j, k))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        LieBracket {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn sub(&self, other: &LieBracket) -> Self {
        assert_eq!(self.dim, other.dim);
        LieBracket {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_scaled(&self, s: f64, other: &LieBracket) -> Self {
        assert_eq!(self.dim, other.dim);
        LieBracket {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect(),
        }
    }

    /// Max over basis triples of `‖μ(μ(e_i,e_j),e_k) + cyclic‖`.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let t = self.dense();
        let at = |i: usize, j: usize, k: usize| t[(i * n + j) * n + k];
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let mut sq = 0.0;
                    for m in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += at(i, j, l) * at(l, k, m)
                                + at(j, k, l) * at(l, i, m)
                                + at(k, i, l) * at(l, j, m);
                        }
                        sq += s * s;
                    }
                    worst = worst.max(sq.sqrt());
                }
            }
        }
        worst
    }

    /// Max over basis triples of `‖μ(μ(e_i,e_j),e_k)‖`; zero iff μ is at most 2-step nilpotent.
    pub fn two_step_residual(&self) -> f64 {
        let n = self.dim;
        let t = self.dense();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let mut sq = 0.0;
                    for m in 0..n {
                        let s: f64 = (0..n)
                            .map(|l| t[(i * n + j) * n + l] * t[(l * n + k) * n + m])
                            .sum();
                        sq += s * s;
                    }
                    worst = worst.max(sq.sqrt());
                }
            }
        }
        worst
    }

    /// Change-of-basis action `(h·μ)(x, y) = h μ(h⁻¹x, h⁻¹y)`.
    pub fn act(&self, h: &DMatrix<f64>) -> Result<LieBracket> {
        self.check_len(h.nrows())?;
        self.check_len(h.ncols())?;
        let hinv = h.clone().try_inverse().ok_or(Error::Singular)?;
        if !hinv.iter().all(|x| x.is_finite()) {
            return Err(Error::Singular);
        }
        let n = self.dim;
        let t = self.dense();
        // μ(h⁻¹ e_i, h⁻¹ e_j)^l = Σ_{a,b} g_{ai} g_{bj} μ_{ab}^l with g = h⁻¹
        let mut stage = vec![0.0; n * n * n]; // [a][j][l] = Σ_b g_{bj} μ_{ab}^l
        for a in 0..n {
            for b in 0..n {
                for j in 0..n {
                    let g = hinv[(b, j)];
                    if g == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        stage[(a * n + j) * n + l] += g * t[(a * n + b) * n + l];
                    }
                }
            }
        }
        let mut out = LieBracket::zero(n)?;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut y = DVector::zeros(n);
                for a in 0..n {
                    let g = hinv[(a, i)];
                    if g == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        y[l] += g * stage[(a * n + j) * n + l];
                    }
                }
                let hy = h * y;
                let base = pair_index(n, i, j) * n;
                out.coeffs[base..base + n].copy_from_slice(hy.as_slice());
            }
        }
        Ok(out)
    }

    /// Infinitesimal action `π(A)μ(x,y) = Aμ(x,y) − μ(Ax,y) − μ(x,Ay)`.
    pub fn pi(&self, a: &DMatrix<f64>) -> LieBracket {
        let n = self.dim;
        assert_eq!(a.nrows(), n);
        assert_eq!(a.ncols(), n);
        let t = self.dense();
        let at = |i: usize, j: usize, k: usize| t[(i * n + j) * n + k];
        let mut out = vec![0.0; flat_len(n)];
        for i in 0..n {
            for j in (i + 1)..n {
                let base = pair_index(n, i, j) * n;
                for k in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += a[(k, l)] * at(i, j, l) - a[(l, i)] * at(l, j, k) - a[(l, j)] * at(i, l, k);
                    }
                    out[base + k] = s;
                }
            }
        }
        LieBracket { dim: n, coeffs: out }
    }

    pub fn inner(&self, other: &LieBracket, conv: InnerProductConvention) -> f64 {
        assert_eq!(self.dim, other.dim);
        conv.pair_weight() * self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm_sq(&self, conv: InnerProductConvention) -> f64 {
        self.inner(self, conv)
    }

    pub fn norm(&self, conv: InnerProductConvention) -> f64 {
        self.norm_sq(conv).sqrt()
    }

    /// Orthonormal basis (columns) of the center `{X : μ(X, ·) = 0}`.
    pub fn center(&self) -> DMatrix<f64> {
        let n = self.dim;
        let m = DMatrix::from_fn(n * n, n, |row, i| {
            let (j, k) = (row / n, row % n);
            self.get(i, j, k)
        });
        linalg::null_space(&m, RANK_RTOL)
    }

    /// Frobenius-orthonormal basis of `{D : π(D)μ = 0}`, additionally
    /// intersected with `{D : [D, J] = 0}` when `commute_with` is given.
    pub fn derivation_space(&self, commute_with: Option<&DMatrix<f64>>) -> Vec<DMatrix<f64>> {
        let n = self.dim;
        let idx = |r: usize, c: usize| c * n + r; // column-major unknowns D_{rc}
        let der_rows = flat_len(n);
        let j_rows = if commute_with.is_some() { n * n } else { 0 };
        let mut m = DMatrix::zeros(der_rows + j_rows, n * n);
        // normalise so that rank decisions do not depend on the size of μ
        let scale = self.max_abs();
        let t: Vec<f64> = self.dense().iter().map(|x| if scale > 0.0 { x / scale } else { 0.0 }).collect();
        let at = |i: usize, j: usize, k: usize| t[(i * n + j) * n + k];
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let row = pair_index(n, i, j) * n + k;
                    for l in 0..n {
                        m[(row, idx(k, l))] += at(i, j, l);
                        m[(row, idx(l, i))] -= at(l, j, k);
                        m[(row, idx(l, j))] -= at(i, l, k);
                    }
                }
            }
        }
        if let Some(jm) = commute_with {
            for r in 0..n {
                for c in 0..n {
                    let row = der_rows + r * n + c;
                    for l in 0..n {
                        m[(row, idx(r, l))] += jm[(l, c)];
                        m[(row, idx(l, c))] -= jm[(r, l)];
                    }
                }
            }
        }
        let kernel = linalg::null_space(&m, RANK_RTOL);
        kernel
            .column_iter()
            .map(|col| DMatrix::from_column_slice(n, n, col.as_slice()))
            .collect()
    }
}

/// On-disk bracket format: 1-based indices, `i < j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketJson {
    pub dim: usize,
    pub entries: Vec<BracketEntry>,
    /// Optional complex structure; the default frame layout is used when absent.
    #[serde(default, rename = "J", skip_serializing_if = "Option::is_none")]
    pub j: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

impl BracketJson {
    pub fn to_bracket(&self) -> Result<LieBracket> {
        let mut b = LieBracket::zero(self.dim)?;
        for e in &self.entries {
            if e.i == 0 || e.j == 0 || e.k == 0 {
                return Err(Error::InvalidEntry { i: e.i, j: e.j, k: e.k, reason: "indices are 1-based" });
            }
            if e.i >= e.j {
                return Err(Error::InvalidEntry { i: e.i, j: e.j, k: e.k, reason: "entries require i < j" });
            }
            if e.j > self.dim || e.k > self.dim {
                return Err(Error::InvalidEntry { i: e.i, j: e.j, k: e.k, reason: "index out of range" });
            }
            b.add(e.i - 1, e.j - 1, e.k - 1, e.c);
        }
        Ok(b)
    }

    pub fn from_bracket(mu: &LieBracket) -> Self {
        let n = mu.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let c = mu.get(i, j, k);
                    if c != 0.0 {
                        entries.push(BracketEntry { i: i + 1, j: j + 1, k: k + 1, c });
                    }
                }
            }
        }
        BracketJson { dim: n, entries, j: None }
    }
}
