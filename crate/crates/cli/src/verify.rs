//! Verification suites printing one PASS/FAIL line per check.

use std::process::ExitCode;

use anyhow::Result;
use pluriclosed::algebra::InnerProductConvention;
use pluriclosed::almost_abelian::{self, LimitKind, ReducedMode};
use pluriclosed::catalog;
use pluriclosed::flow::IntegratorConfig;
use pluriclosed::hermitian::{self, HermitianFrame};
use pluriclosed::nilpotent::{self, NilpotentSplitting};
use pluriclosed::normality::{self, SweepConfig, SweepSummary};
use pluriclosed::random::{self, AaSample};
use rayon::prelude::*;

use crate::{label, Suite};

#[derive(Default)]
struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, ok: bool, name: &str, detail: String) {
        self.failed += !ok as usize;
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }

    fn exit(self) -> ExitCode {
        if self.failed == 0 {
            ExitCode::SUCCESS
        } else {
            eprintln!("{} check(s) failed", self.failed);
            ExitCode::FAILURE
        }
    }
}

pub fn run(suite: Suite, seed: u64, count: Option<usize>) -> Result<ExitCode> {
    let mut r = Report::default();
    match suite {
        Suite::Appendix => appendix(&mut r, seed, count.unwrap_or(10_000))?,
        Suite::Identities => identities(&mut r, seed, count.unwrap_or(100))?,
        Suite::Table1 => table1(&mut r)?,
    }
    Ok(r.exit())
}

fn appendix(r: &mut Report, seed: u64, count: usize) -> Result<()> {
    let cfg = SweepConfig { count, seed, normal_every: 10, ..Default::default() };
    let reports = (0..count)
        .into_par_iter()
        .map(|i| normality::normality_report(&normality::sweep_item(&cfg, i)))
        .collect::<pluriclosed::Result<Vec<_>>>()?;
    let mut s = SweepSummary { min_frobenius_gap: f64::INFINITY, min_sym_gap: f64::INFINITY, ..Default::default() };
    for (i, rep) in reports.iter().enumerate() {
        s.merge_one(rep, i % cfg.normal_every == 0);
    }
    r.line(
        s.violations == 0,
        "eigenvalue inequalities",
        format!(
            "{} matrices, {} violations, min gaps {:.3e} / {:.3e}",
            s.count, s.violations, s.min_frobenius_gap, s.min_sym_gap
        ),
    );
    r.line(
        s.band_mismatches == 0,
        "equality iff normal",
        format!("{} normal drawn, {} band mismatches", s.normal_drawn, s.band_mismatches),
    );

    let flow_cfg = IntegratorConfig { fixedpoint_norm: 0.0, ..Default::default() };
    let flows = (0..10u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = random::item_rng(seed.wrapping_add(1), i);
            let e = random::gaussian_matrix(&mut rng, 2 + (i as usize % 5), 2 + (i as usize % 5)) * 0.5;
            normality::normality_flow(&e, 50.0, &flow_cfg)
        })
        .collect::<pluriclosed::Result<Vec<_>>>()?;
    let monotone = flows.iter().filter(|f| f.monotone).count();
    let drift = flows.iter().map(|f| f.spectrum_drift).fold(0.0, f64::max);
    r.line(monotone == flows.len(), "normality flow monotone", format!("{monotone}/{} trajectories", flows.len()));
    r.line(drift < 1e-6, "normality flow isospectral", format!("largest spectrum drift {drift:.3e}"));
    Ok(())
}

fn identities(r: &mut Report, seed: u64, count: usize) -> Result<()> {
    let conv = InnerProductConvention::OrderedPairs;
    let nil = (0..count)
        .into_par_iter()
        .map(|i| -> pluriclosed::Result<[f64; 4]> {
            let mut rng = random::item_rng(seed, i as u64);
            let dim_z = if i % 2 == 0 { 2 } else { 4 };
            let mu = random::random_two_step_skt(&mut rng, dim_z, conv);
            let frame = HermitianFrame::paired(4 + dim_z)?;
            let split = NilpotentSplitting::new(&mu, &frame)?;
            let p = nilpotent::p_endomorphism_nil(&split, &frame);
            let nn = mu.norm_sq(conv);
            let trace_err = (p.trace() + 0.5 * nn).abs() / nn;
            // ⟨π(A)μ, μ⟩ = 4 tr(Ric A) for symmetric A
            let g = random::gaussian_matrix(&mut rng, mu.dim(), mu.dim());
            let a = (&g + g.transpose()) * 0.5;
            let lhs = mu.pi(&a).inner(&mu, conv);
            let rhs = 4.0 * (nilpotent::ricci_endomorphism(&mu) * &a).trace();
            let moment_err = (lhs - rhs).abs() / (nn * a.norm());
            // P_{u·μ} = u P_μ uᵀ for u ∈ U(n)
            let u = random::unitary_matrix(&mut rng, frame.j());
            let p_u = hermitian::p_endomorphism(&mu.act(&u)?, &frame);
            let equiv_err = (p_u - &u * hermitian::p_endomorphism(&mu, &frame) * u.transpose()).amax() / nn;
            let grad = nilpotent::gradient_equivalence_check(&mu, &split, &frame)?;
            Ok([trace_err, moment_err, equiv_err, grad.angle_finite_difference])
        })
        .collect::<pluriclosed::Result<Vec<_>>>()?;
    let worst = |c: usize| nil.iter().map(|x| x[c]).fold(0.0, f64::max);
    let (trace, moment, equiv, angle) = (worst(0), worst(1), worst(2), worst(3));
    r.line(moment < 1e-10, "moment-map identity", format!("{count} brackets, largest relative error {moment:.3e}"));
    r.line(trace < 1e-10, "trace identity", format!("largest relative error {trace:.3e}"));
    r.line(equiv < 1e-10, "unitary equivariance of P", format!("largest relative error {equiv:.3e}"));
    r.line(angle < 1e-4, "gradient flow equivalence", format!("largest angle {angle:.3e} rad"));

    let aa = (0..count)
        .into_par_iter()
        .map(|i| -> pluriclosed::Result<(bool, f64)> {
            let mut rng = random::item_rng(seed.wrapping_add(1), i as u64);
            let m = if i % 2 == 0 { 4 } else { 6 };
            let d = random::almost_abelian_data(&mut rng, m, AaSample::Skt);
            let v = almost_abelian::skt_verdict(&d, 1e-9)?;
            let p = almost_abelian::p_matrix(&d, &almost_abelian::p_components(&d)?);
            let q = hermitian::p_endomorphism(&almost_abelian::build_bracket(&d), &d.frame());
            Ok((v.is_skt, (p - q).amax() / d.scale().max(f64::MIN_POSITIVE)))
        })
        .collect::<pluriclosed::Result<Vec<_>>>()?;
    let skt = aa.iter().filter(|x| x.0).count();
    let p_err = aa.iter().map(|x| x.1).fold(0.0, f64::max);
    r.line(skt == count, "SKT criteria agree", format!("{skt}/{count} SKT samples accepted by both tests"));
    r.line(p_err < 1e-9, "P block form", format!("largest relative deviation {p_err:.3e}"));
    Ok(())
}

fn table1(r: &mut Report) -> Result<()> {
    let rows = catalog::table1_representatives();
    let results = rows
        .par_iter()
        .map(|(case, d)| -> pluriclosed::Result<_> {
            let rep = almost_abelian::classify(d, 1e-9)?;
            let observed = almost_abelian::observe_limit(d, 1e3)?;
            let cfg = almost_abelian::reduced_config(1e3);
            let norm = almost_abelian::integrate_reduced_flow(d, ReducedMode::ANormFixed, &cfg)?;
            let cert = almost_abelian::soliton_certificate(&norm.final_data(), 1e-6)?;
            Ok((*case, rep, observed, cert))
        })
        .collect::<pluriclosed::Result<Vec<_>>>()?;
    for (case, rep, observed, cert) in results {
        let limit_ok = match rep.predicted_limit {
            LimitKind::DataDependent => matches!(observed, LimitKind::Zero | LimitKind::Nonzero),
            p => p == observed,
        };
        let ok = rep.table_case == case && limit_ok && cert.kind == rep.soliton_type_at_limit && cert.residual < 1e-6;
        r.line(
            ok,
            &format!("row {}", label(case)),
            format!(
                "case {}, limit {} (predicted {}), normalized limit {} residual {:.1e}",
                label(rep.table_case),
                label(observed),
                label(rep.predicted_limit),
                label(cert.kind),
                cert.residual
            ),
        );
    }
    Ok(())
}
