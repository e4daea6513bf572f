//! `trace`: the μ-branch of positive solutions.

use fracperiodic::{fold_mus, solutions_at, trace_branch, Branch};
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, Format, RunConfig, Source, Violation};
use crate::output::{float, OutDir};
use crate::solve::MEAN_IDENTITY_TOL;
use crate::{echo, Check, RunError};

#[derive(Debug, Clone, Serialize)]
pub struct Probe {
    pub mu: f64,
    pub from_fold: bool,
    pub solutions: usize,
    pub sup_norms: Vec<f64>,
}

pub fn probes(branch: &Branch, extra: &[f64], cfg: &RunConfig) -> Vec<Probe> {
    let it = cfg.numerics.iteration();
    let folds = fold_mus(branch);
    folds
        .iter()
        .map(|&m| (m, true))
        .chain(extra.iter().map(|&m| (m, false)))
        .map(|(mu, from_fold)| {
            let found = solutions_at(branch, mu, &it);
            Probe {
                mu,
                from_fold,
                solutions: found.len(),
                sup_norms: found.iter().map(|u| u.sup_norm()).collect(),
            }
        })
        .collect()
}

pub fn checks(branch: &Branch, verify_tol: f64) -> Vec<Check> {
    let pts = &branch.points;
    let max = |f: &dyn Fn(&fracperiodic::BranchPoint) -> f64| pts.iter().map(f).fold(0.0, f64::max);
    let mut out = vec![
        Check::flag("nonempty", !pts.is_empty()),
        Check::at_most("mean_identity", max(&|p| p.mean_identity_residual), MEAN_IDENTITY_TOL),
        Check::at_most("verified_residual", max(&|p| p.verified_residual), verify_tol),
        Check::flag("positive", pts.iter().all(|p| p.solution.min_value() > 0.0)),
    ];
    let (inside, total) = asymptote_band(branch);
    out.push(Check::flag("mu_sup_band", total > 0 && inside == total));
    out
}

/// Points past the large-norm threshold `50 (1 + sup|e|)`, and how many of
/// them have `μ · sup u ∈ [ē/2, 2ē]`.
pub fn asymptote_band(branch: &Branch) -> (usize, usize) {
    let e = &branch.problem.e;
    let e_bar = e.mean();
    let threshold = 50.0 * (1.0 + e.sup_norm());
    let far: Vec<f64> =
        branch.points.iter().filter(|p| p.sup_norm > threshold).map(|p| p.mu * p.sup_norm).collect();
    let inside = far.iter().filter(|&&x| x >= 0.5 * e_bar && x <= 2.0 * e_bar).count();
    (inside, far.len())
}

pub fn run(cfg: &RunConfig, source: &Source, solutions: bool, out: &mut OutDir) -> Result<bool, RunError> {
    let spec = cfg.bifurcation.as_ref().ok_or_else(|| {
        ConfigError::Validation(vec![Violation {
            line: None,
            path: "trace".into(),
            message: "needs a [bifurcation] section".into(),
        }])
    })?;
    let problem = spec.build(cfg.n_modes());
    let branch = trace_branch(&problem, &cfg.numerics.iteration(), &cfg.branch.build())?;
    let probes = probes(&branch, &spec.probe_mu, cfg);
    let checks = checks(&branch, *cfg.numerics.verify_tol.get_ref());
    let band = asymptote_band(&branch);
    let all_passed = checks.iter().all(|c| c.pass);

    if cfg.output.wants(Format::Csv) {
        let rows = branch.points.iter().map(|p| {
            vec![
                float(p.arclength),
                float(p.mu),
                float(p.sup_norm),
                float(p.l2_norm),
                p.fold_flag.to_string(),
                float(p.mean_identity_residual),
            ]
        });
        out.csv(
            "branch.csv",
            &["arclength", "mu", "sup_norm", "l2_norm", "fold_flag", "mean_identity_residual"],
            rows,
        )?;
    }
    if cfg.output.wants(Format::Json) {
        out.json(
            "branch.json",
            &json!({
                "config": echo(cfg, source),
                "points": branch.points.len(),
                "termination": branch.termination,
                "folds": fold_mus(&branch),
                "asymptote_band": { "inside": band.0, "beyond_threshold": band.1 },
                "two_solution_mu_sign": branch.two_solution_mu_sign,
                "probes": probes,
                "all_passed": all_passed,
                "checks": checks,
            }),
        )?;
        if solutions {
            out.json("branch_points.json", &branch.points)?;
        }
    }
    Ok(all_passed)
}
