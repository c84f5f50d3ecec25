//! Named example algebras.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::LieBracket;
use crate::almost_abelian::{AlmostAbelianData, TableCase};
use crate::hermitian::{standard_j, HermitianFrame, SolitonKind};

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 4] = ["shrink10", "steady10", "s_ab", "kodaira"];

/// `J₁` on `R⁸ = R⁶ ⊕ R²` with pairs `(0,5), (1,4), (2,3), (6,7)`.
pub fn j1_six_plus_two() -> DMatrix<f64> {
    let mut j = DMatrix::zeros(8, 8);
    j.view_mut((0, 0), (6, 6)).copy_from(&standard_j(6));
    j.view_mut((6, 6), (2, 2)).copy_from(&standard_j(2));
    j
}

/// Ten-dimensional shrinking soliton: `a = 2`, `v = 0`, `A = diag(−1 ×6, 0, 0)`.
pub fn shrink10() -> AlmostAbelianData {
    let mut diag = vec![-1.0; 6];
    diag.extend([0.0, 0.0]);
    let a_mat = DMatrix::from_diagonal(&DVector::from_vec(diag));
    AlmostAbelianData::new(2.0, DVector::zeros(8), a_mat, j1_six_plus_two()).expect("valid example")
}

/// Ten-dimensional steady soliton: as [`shrink10`] with `v = e₇ + e₈ ∈ ker A`.
pub fn steady10() -> AlmostAbelianData {
    let mut d = shrink10();
    d.v[6] = 1.0;
    d.v[7] = 1.0;
    d
}

/// Six-dimensional expanding soliton `s_{a,b}`: `v = 0` and `A` acting as
/// `−a/2` on `span(e₂, e₅)` and as a rotation of speed `b` on `span(e₃, e₄)`.
pub fn s_ab(a: f64, b: f64) -> AlmostAbelianData {
    let mut a_mat = DMatrix::zeros(4, 4);
    a_mat[(0, 0)] = -a / 2.0;
    a_mat[(3, 3)] = -a / 2.0;
    a_mat[(1, 2)] = b;
    a_mat[(2, 1)] = -b;
    AlmostAbelianData::with_standard_j1(a, DVector::zeros(4), a_mat).expect("valid example")
}

/// The Kodaira-Thurston algebra `[e₁, e₂] = e₃` with `J e₁ = e₂`, `J e₃ = e₄`.
pub fn kodaira() -> (LieBracket, HermitianFrame) {
    let mu = LieBracket::from_entries(4, &[(0, 1, 2, 1.0)]).expect("valid entry");
    (mu, HermitianFrame::paired(4).expect("4 is even"))
}

/// A catalog entry: almost-abelian data or a nilpotent bracket with its frame.
#[derive(Clone, Debug)]
pub enum Entry {
    AlmostAbelian(AlmostAbelianData),
    Nilpotent(LieBracket, HermitianFrame),
}

/// A number or a multiple of π such as `pi/2` or `2pi`.
fn parse_param(text: &str) -> Option<f64> {
    let t = text.trim();
    let Some(pos) = t.find("pi") else {
        return t.parse().ok();
    };
    let (pre, post) = (t[..pos].trim().trim_end_matches('*'), t[pos + 2..].trim());
    let factor = if pre.is_empty() { 1.0 } else { pre.trim().parse::<f64>().ok()? };
    let divisor = match post.strip_prefix('/') {
        Some(d) => d.trim().parse::<f64>().ok()?,
        None if post.is_empty() => 1.0,
        None => return None,
    };
    Some(factor * std::f64::consts::PI / divisor)
}

/// Looks up an example. `s_ab` uses `a = 1`, `b = π/2`; `s_ab(A, B)` and
/// `s_ab:A,B` set both, and accept forms like `pi/2`.
pub fn by_name(name: &str) -> Option<Entry> {
    match name {
        "shrink10" => Some(Entry::AlmostAbelian(shrink10())),
        "steady10" => Some(Entry::AlmostAbelian(steady10())),
        "s_ab" => Some(Entry::AlmostAbelian(s_ab(1.0, std::f64::consts::FRAC_PI_2))),
        "kodaira" => {
            let (mu, frame) = kodaira();
            Some(Entry::Nilpotent(mu, frame))
        }
        other => {
            let params = match other.strip_prefix("s_ab:") {
                Some(p) => p,
                None => other.strip_prefix("s_ab(")?.strip_suffix(')')?,
            };
            let (a, b) = params.split_once(',')?;
            Some(Entry::AlmostAbelian(s_ab(parse_param(a)?, parse_param(b)?)))
        }
    }
}

/// Verdicts a catalog entry must reproduce under default tolerances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub table_case: Option<TableCase>,
    pub kind: SolitonKind,
    pub alpha: f64,
    pub unimodular: Option<bool>,
}

pub fn expected(name: &str) -> Option<Expected> {
    let e = |table_case, kind, alpha, unimodular| Expected { table_case, kind, alpha, unimodular };
    match name {
        "shrink10" => Some(e(Some(TableCase::Vi), SolitonKind::Shrinking, 1.0, Some(false))),
        "steady10" => Some(e(Some(TableCase::V), SolitonKind::Steady, 0.0, Some(false))),
        "s_ab" => Some(e(Some(TableCase::Iii), SolitonKind::Expanding, -0.25, Some(true))),
        // α = −1 at ‖μ‖² = 2 in the ordered-pairs convention
        "kodaira" => Some(e(None, SolitonKind::Expanding, -1.0, None)),
        _ => None,
    }
}

/// One SKT initial condition per classification row, in row order.
pub fn table1_representatives() -> Vec<(TableCase, AlmostAbelianData)> {
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let std1 = |a: f64, v: Vec<f64>, m: DMatrix<f64>| {
        AlmostAbelianData::with_standard_j1(a, DVector::from_vec(v), m).expect("valid representative")
    };
    let mut iii = s_ab(1.0, std::f64::consts::FRAC_PI_2);
    iii.v = DVector::from_vec(vec![0.3, -0.2, 0.1, 0.4]);
    let mut v = shrink10();
    v.v = DVector::from_vec(vec![0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.2]);
    let mut vi = shrink10();
    vi.v[0] = 0.3;
    vec![
        // a = 0, A skew
        (TableCase::I, std1(0.0, vec![1.0, 0.5], rot.clone())),
        // k = 0, a ≠ 0
        (TableCase::Ii, std1(1.0, vec![0.5, 0.0], rot)),
        // k = 1
        (TableCase::Iii, iii),
        // k = 2, A = −a/2 Id
        (TableCase::Iv, std1(1.0, vec![1.0, 0.0, 0.0, 0.0], DMatrix::identity(4, 4) * -0.5)),
        // k = 3, v ∉ Im A
        (TableCase::V, v),
        // k = 3, v ∈ Im A
        (TableCase::Vi, vi),
    ]
}
