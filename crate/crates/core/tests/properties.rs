//! Property tests for the structural identities of the library.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use pluriclosed::almost_abelian::{
    self, build_bracket, classify, eigencomponent_dynamics, gauge_u, integrate_reduced_flow, p_components,
    p_matrix, reduced_config, reduced_vector_field, s_operator, skt_verdict, AlmostAbelianData, ReducedMode,
};
use pluriclosed::hermitian::{is_skt_general, p_endomorphism};
use pluriclosed::linalg;
use pluriclosed::normality::normality_report;
use pluriclosed::random::{self, item_rng, random_two_step_skt, AaSample};
use pluriclosed::{HermitianFrame, InnerProductConvention, LieBracket};

const ORD: InnerProductConvention = InnerProductConvention::OrderedPairs;

/// Orthogonal matrix commuting with `j`: `exp` of a skew, `j`-commuting matrix.
fn skt_data(seed: u64, m: usize) -> AlmostAbelianData {
    let mut rng = item_rng(seed, 0);
    random::almost_abelian_data(&mut rng, m, AaSample::Skt)
}

fn tangent_state(t: &almost_abelian::ReducedTangent) -> DVector<f64> {
    let m = t.v.len();
    let mut x = DVector::zeros(1 + m + m * m);
    x[0] = t.a;
    x.rows_mut(1, m).copy_from(&t.v);
    x.rows_mut(1 + m, m * m).copy_from_slice(t.a_mat.as_slice());
    x
}

fn two_step(seed: u64) -> (LieBracket, HermitianFrame) {
    let mut rng = item_rng(seed, 1);
    let dim_z = if seed.is_multiple_of(2) { 2 } else { 4 };
    (random_two_step_skt(&mut rng, dim_z, ORD), HermitianFrame::paired(4 + dim_z).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>(), half in 1usize..4) {
        let n = 2 * half;
        let mut rng = item_rng(seed, 0);
        let flat = random::gaussian_matrix(&mut rng, n * (n - 1) / 2 * n, 1);
        let mu = LieBracket::from_flat(n, flat.as_slice().to_vec()).unwrap();
        let x = DVector::from_column_slice(random::gaussian_matrix(&mut rng, n, 1).as_slice());
        let y = DVector::from_column_slice(random::gaussian_matrix(&mut rng, n, 1).as_slice());
        let xy = mu.eval(&x, &y).unwrap();
        let yx = mu.eval(&y, &x).unwrap();
        prop_assert!((xy + yx).amax() < 1e-12);
    }

    #[test]
    fn action_is_a_group_action(seed in any::<u64>()) {
        let (mu, _) = two_step(seed);
        let n = mu.dim();
        let mut rng = item_rng(seed, 2);
        let g = random::gaussian_matrix(&mut rng, n, n) + DMatrix::identity(n, n) * 3.0;
        let h = random::gaussian_matrix(&mut rng, n, n) + DMatrix::identity(n, n) * 3.0;
        let lhs = mu.act(&g).unwrap().act(&h).unwrap();
        let rhs = mu.act(&(&h * &g)).unwrap();
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-9 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn orthogonal_action_preserves_norm_and_jacobi(seed in any::<u64>()) {
        let (mu, _) = two_step(seed);
        let mut rng = item_rng(seed, 3);
        let q = random::orthogonal_matrix(&mut rng, mu.dim());
        let nu = mu.act(&q).unwrap();
        prop_assert!((nu.norm(ORD) - mu.norm(ORD)).abs() < 1e-12);
        prop_assert!(nu.jacobi_residual() < 1e-12);
    }

    #[test]
    fn infinitesimal_action_is_the_derivative(seed in any::<u64>()) {
        let (mu, _) = two_step(seed);
        let n = mu.dim();
        let mut rng = item_rng(seed, 4);
        let a = random::gaussian_matrix(&mut rng, n, n);
        let t = 1e-6;
        let plus = mu.act(&(&a * t).exp()).unwrap();
        let minus = mu.act(&(&a * -t).exp()).unwrap();
        let fd = plus.sub(&minus).scaled(0.5 / t);
        prop_assert!(fd.sub(&mu.pi(&a)).max_abs() < 1e-6);
    }

    #[test]
    fn pi_transpose_is_adjoint(seed in any::<u64>()) {
        let (mu, _) = two_step(seed);
        // same parity, so the same dimension
        let (nu, _) = two_step(seed.wrapping_add(2));
        let n = mu.dim();
        let mut rng = item_rng(seed, 5);
        let a = random::gaussian_matrix(&mut rng, n, n);
        let lhs = mu.pi(&a).inner(&nu, ORD);
        let rhs = mu.inner(&nu.pi(&a.transpose()), ORD);
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn unitary_change_of_basis_keeps_skt_and_p_equivariant(seed in any::<u64>()) {
        let (mu, frame) = two_step(seed);
        let mut rng = item_rng(seed, 6);
        let u = random::unitary_matrix(&mut rng, frame.j());
        let nu = mu.act(&u).unwrap();
        prop_assert!(is_skt_general(&nu, &frame, 1e-10).0);
        let p_mu = p_endomorphism(&mu, &frame);
        let p_nu = p_endomorphism(&nu, &frame);
        prop_assert!((p_nu - &u * p_mu * u.transpose()).amax() < 1e-12);
    }

    #[test]
    fn p_block_form_matches_general_route(seed in any::<u64>(), half in 1usize..4) {
        let d = skt_data(seed, 2 * half);
        let p = p_matrix(&d, &p_components(&d).unwrap());
        let q = p_endomorphism(&build_bracket(&d), &d.frame());
        let scale = d.scale() + d.v.norm_squared();
        prop_assert!((p - q).amax() < 1e-12 * scale.max(1.0));
    }

    #[test]
    fn reduced_field_is_the_gauged_flow(seed in any::<u64>(), half in 1usize..4) {
        let d = skt_data(seed, 2 * half);
        let k = skt_verdict(&d, almost_abelian::LEMMA_TOL).unwrap().k;
        let p = p_matrix(&d, &p_components(&d).unwrap());
        let full = build_bracket(&d).pi(&(p - gauge_u(&d))).scaled(-1.0);
        let t = reduced_vector_field(&d, k);
        let expected = AlmostAbelianData { a: t.a, v: t.v, a_mat: t.a_mat, j1: d.j1.clone() };
        let scale = (d.scale() + d.v.norm_squared()).powf(1.5);
        prop_assert!(full.sub(&build_bracket(&expected)).max_abs() < 1e-12 * scale.max(1.0));
    }

    #[test]
    fn reduced_field_is_cubic(seed in any::<u64>(), s in 0.1f64..5.0) {
        let d = skt_data(seed, 4);
        let k = skt_verdict(&d, almost_abelian::LEMMA_TOL).unwrap().k;
        let f = tangent_state(&reduced_vector_field(&d, k));
        let fs = tangent_state(&reduced_vector_field(&d.scaled(s), k));
        prop_assert!((fs - &f * s.powi(3)).amax() < 1e-12 * s.powi(3) * f.amax().max(1.0));
    }

    #[test]
    fn trace_of_skt_a(seed in any::<u64>(), half in 1usize..5) {
        let d = skt_data(seed, 2 * half);
        let k = skt_verdict(&d, almost_abelian::LEMMA_TOL).unwrap().k;
        prop_assert!((d.a_mat.trace() + k as f64 * d.a).abs() < 1e-10 * d.scale().sqrt().max(1.0));
    }

    #[test]
    fn s_operator_bound(seed in any::<u64>(), half in 1usize..5) {
        let d = skt_data(seed, 2 * half);
        let k = skt_verdict(&d, almost_abelian::LEMMA_TOL).unwrap().k;
        let s = s_operator(d.a, &d.a_mat, k);
        let bound = (k as f64 / 4.0 - 0.5) * d.a * d.a;
        let (vals, vecs) = linalg::symmetric_eigen_sorted(&s);
        let tol = 1e-10 * d.scale().max(1.0);
        for (i, &lam) in vals.iter().enumerate() {
            prop_assert!(lam <= bound + tol);
            // equality exactly on ker A
            let u = vecs.column(i);
            let in_kernel = (&d.a_mat * u).norm() < 1e-6 * d.scale().sqrt().max(1e-300);
            let at_bound = (lam - bound).abs() < 1e-8 * d.scale().max(1e-300);
            prop_assert_eq!(in_kernel, at_bound);
        }
    }

    #[test]
    fn eigencomponents_sum_to_normalized_field(seed in any::<u64>()) {
        let d = skt_data(seed, 6);
        let comps = eigencomponent_dynamics(&d).unwrap();
        let total_r: f64 = comps.iter().map(|c| c.r).sum();
        prop_assert!((total_r - 0.5 * d.v.norm_squared()).abs() < 1e-12 * d.v.norm_squared().max(1.0));
        let k = skt_verdict(&d, almost_abelian::LEMMA_TOL).unwrap().k;
        let nf = almost_abelian::normalized_vector_field(&d, k);
        let total: f64 = comps.iter().map(|c| c.r_dot).sum();
        prop_assert!((total - nf.v.dot(&d.v)).abs() < 1e-10 * d.scale().max(1.0).powi(2));
        // ratio law: (log r_i − log r_s)' = 2(λ_i − λ_s)
        let vv = d.v.norm_squared();
        for c in &comps {
            if c.r > 0.0 {
                prop_assert!((c.r_dot / c.r - (2.0 * c.lambda - vv)).abs() < 1e-9 * d.scale().max(1.0));
            }
        }
    }

    #[test]
    fn classification_invariant_under_scaling_and_rotation(seed in any::<u64>(), s in 0.2f64..5.0) {
        let d = skt_data(seed, 6);
        let base = classify(&d, 1e-9).unwrap();
        let scaled = classify(&d.scaled(s), 1e-9).unwrap();
        prop_assert_eq!(base.table_case, scaled.table_case);
        let mut rng = item_rng(seed, 9);
        let u = random::unitary_matrix(&mut rng, &d.j1);
        let rotated = AlmostAbelianData::new(d.a, &u * &d.v, &u * &d.a_mat * u.transpose(), d.j1.clone()).unwrap();
        prop_assert_eq!(base.table_case, classify(&rotated, 1e-9).unwrap().table_case);
    }

    #[test]
    fn appendix_inequalities(seed in any::<u64>(), n in 2usize..11) {
        let mut rng = item_rng(seed, 10);
        let e = random::gaussian_matrix(&mut rng, n, n);
        let r = normality_report(&e).unwrap();
        prop_assert!(r.frobenius_gap() >= -1e-10);
        prop_assert!(r.sym_gap() >= -1e-10);
        let normal = random::normal_matrix(&mut rng, n);
        let r = normality_report(&normal).unwrap();
        prop_assert!(r.frobenius_gap().abs() < 1e-9 && r.sym_gap().abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flow_invariants(seed in any::<u64>()) {
        let d = skt_data(seed, 6);
        prop_assume!(d.scale() > 1e-6);
        let k = skt_verdict(&d, almost_abelian::LEMMA_TOL).unwrap().k;
        let tr = integrate_reduced_flow(&d, ReducedMode::Unnormalized, &reduced_config(20.0)).unwrap();
        let kernel = linalg::null_space(&d.a_mat, 1e-9);
        let r_m = |x: &AlmostAbelianData| 0.5 * (kernel.transpose() * &x.v).norm_squared();
        let q0 = r_m(&d) / d.a.powi(4);
        for (i, diag) in tr.diagnostics.iter().enumerate() {
            prop_assert!(diag.skt_residual < 1e-8);
            prop_assert!(diag.normality_defect < 1e-9);
            let x = tr.state_at(i);
            // A/a is constant, so k cannot change
            prop_assert_eq!(skt_verdict(&x, almost_abelian::LEMMA_TOL).unwrap().k, k);
            if d.a != 0.0 && q0 > 0.0 {
                let q = r_m(&x) / x.a.powi(4);
                prop_assert!(((q - q0) / q0).abs() < 1e-7, "r_m/a⁴ drift at t = {}", diag.t);
            }
        }
    }
}
