//! Small dense linear-algebra helpers shared by the geometric modules.
//!
//! Everything here works on `nalgebra::DMatrix<f64>`; dimensions of interest
//! are small (at most a few hundred rows), so no attempt is made at blocking
//! or sparsity.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Relative singular-value threshold used for every numerical rank decision.
pub const RANK_RTOL: f64 = 1e-9;

pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Symmetric part `(E + Eᵀ)/2`.
pub fn sym_part(e: &DMatrix<f64>) -> DMatrix<f64> {
    (e + e.transpose()) * 0.5
}

pub fn skew_part(e: &DMatrix<f64>) -> DMatrix<f64> {
    (e - e.transpose()) * 0.5
}

/// Row-major nested vectors, the on-disk matrix format.
pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Inverse of [`to_rows`]; fails on ragged input.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidData("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Orthonormal basis (as columns) of the numerical null space of `m`.
///
/// Singular values below `rel_tol * σ_max` count as zero. A zero matrix has
/// the whole domain as its null space.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // SVD only returns `min(rows, cols)` right singular vectors; pad with
    // zero rows so that all of them are available.
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.max();
    let threshold = rel_tol * sigma_max;
    let kernel: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| sigma_max == 0.0 || svd.singular_values[i] <= threshold)
        .collect();
    let mut basis = DMatrix::zeros(cols, kernel.len());
    for (c, &i) in kernel.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    basis
}

/// Numerical rank with the same relative threshold convention as [`null_space`].
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Minimum-norm least-squares solution of `m x = b` and the residual `‖m x − b‖`.
pub fn lstsq(m: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> (DVector<f64>, f64) {
    if m.ncols() == 0 {
        return (DVector::zeros(0), b.norm());
    }
    let svd = SVD::new(m.clone(), true, true);
    let smax = svd.singular_values.max();
    let x = if smax == 0.0 {
        DVector::zeros(m.ncols())
    } else {
        svd.solve(b, rel_tol * smax).expect("U and V were computed")
    };
    let r = (m * &x - b).norm();
    (x, r)
}

/// Eigenvalues of a general real square matrix, via a real Schur form.
pub fn complex_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::Eigensolver)?;
    let mut ev: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    sort_lex(&mut ev);
    Ok(ev)
}

/// Sort eigenvalues lexicographically by (Re, Im).
pub fn sort_lex(ev: &mut [Complex<f64>]) {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending.
pub fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(sym_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vecs)
}

/// Largest sine of the principal angles between the column spans of `u` and `w`.
///
/// Both arguments must have orthonormal columns. Subspaces of different
/// dimension are reported as maximally apart (1.0).
pub fn max_principal_sine(u: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    if u.ncols() != w.ncols() {
        return 1.0;
    }
    if u.ncols() == 0 {
        return 0.0;
    }
    // sines are the singular values of (I − U Uᵀ) W
    let resid = w - u * (u.transpose() * w);
    resid
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s.min(1.0)))
}

/// Optimal assignment distance between two eigenvalue multisets: the
/// largest pairwise gap under the matching that minimises the total gap.
pub fn assignment_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets must have equal size");
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let matching = hungarian(&cost);
    matching
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max)
}

/// Min-cost perfect matching on a square cost matrix (Kuhn-Munkres with
/// potentials). Returns `row -> column`.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}
