//! `solve`: one problem section in, solution table and report out.

use std::f64::consts::PI;

use fracperiodic::{solve_attractive, solve_lienard, solve_repulsive_with, solve_system, SolveReport};
use serde_json::json;

use crate::config::{ConfigError, Format, RunConfig, Source, Violation};
use crate::output::{float, OutDir};
use crate::{echo, Check, RunError};

/// Tolerance on the integrated equation.
pub const MEAN_IDENTITY_TOL: f64 = 1e-6;
pub const DRIFT_TOL: f64 = 1e-8;
pub const ORDERING_TOL: f64 = 1e-9;

fn problem_kind(cfg: &RunConfig) -> Result<&'static str, ConfigError> {
    let present: Vec<&'static str> = [
        ("attractive", cfg.attractive.is_some()),
        ("repulsive", cfg.repulsive.is_some()),
        ("lienard", cfg.lienard.is_some()),
        ("system", cfg.system.is_some()),
    ]
    .into_iter()
    .filter_map(|(k, on)| on.then_some(k))
    .collect();
    match present.as_slice() {
        [one] => Ok(one),
        _ => Err(ConfigError::Validation(vec![Violation {
            line: None,
            path: "solve".into(),
            message: format!(
                "needs exactly one of [attractive], [repulsive], [lienard], [system]; found {}",
                if present.is_empty() { "none".to_string() } else { present.join(", ") }
            ),
        }])),
    }
}

pub fn checks(kind: &str, report: &SolveReport, verify_tol: f64) -> Vec<Check> {
    let c = &report.checks;
    let mut out = vec![
        Check::flag("converged", report.converged),
        Check::at_most("verified_residual", report.verified_residual, verify_tol),
    ];
    if let Some(m) = c.mean_identity {
        out.push(Check::at_most("mean_identity", m, MEAN_IDENTITY_TOL));
    }
    match kind {
        "attractive" => {
            out.push(Check::flag("positive", c.min_value > 0.0));
            if let Some(x) = c.ordering_excess {
                out.push(Check::at_most("ordering_excess", x, ORDERING_TOL));
            }
        }
        "repulsive" => {
            out.push(Check::flag("positive", c.min_value > 0.0));
            if let Some(b) = &report.bounds {
                out.push(Check::flag("max_above_r0", b.max_above_r0));
                out.push(Check::flag("min_below_r1", b.min_below_r1));
                out.push(Check::flag("max_below_upper", b.max_below_upper));
                out.push(Check::flag("uprime_within_bound", b.uprime_within_bound));
                out.push(Check::flag("g_l1_within_bound", b.g_l1_within_bound));
            }
        }
        _ => {
            if let Some(d) = c.drift_neutrality {
                out.push(Check::at_most("drift_neutrality", d, DRIFT_TOL));
            }
        }
    }
    out
}

pub fn solve(cfg: &RunConfig) -> Result<(&'static str, SolveReport), RunError> {
    let kind = problem_kind(cfg)?;
    let n = cfg.n_modes();
    let it = cfg.numerics.iteration();
    let report = match kind {
        "attractive" => solve_attractive(&cfg.attractive.as_ref().expect("present").build(n)?, &it)?,
        "repulsive" => solve_repulsive_with(
            &cfg.repulsive.as_ref().expect("present").build(n),
            &it,
            &cfg.continuation.build(),
        )?,
        "lienard" => solve_lienard(&cfg.lienard.as_ref().expect("present").build(n), &it)?,
        _ => solve_system(&cfg.system.as_ref().expect("present").build(n), &it)?,
    };
    Ok((kind, report))
}

pub fn run(cfg: &RunConfig, source: &Source, out: &mut OutDir) -> Result<bool, RunError> {
    let (kind, report) = solve(cfg)?;
    let checks = checks(kind, &report, *cfg.numerics.verify_tol.get_ref());
    let all_passed = checks.iter().all(|c| c.pass);

    if cfg.output.wants(Format::Csv) {
        let m = *cfg.numerics.output_points.get_ref();
        let mut header = vec!["t".to_string()];
        if report.solution.len() == 1 {
            header.push("u".into());
        } else {
            header.extend((1..=report.solution.len()).map(|i| format!("u{i}")));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = (0..m).map(|j| {
            let t = 2.0 * PI * j as f64 / m as f64;
            std::iter::once(float(t)).chain(report.solution.iter().map(|u| float(u.eval(t)))).collect()
        });
        out.csv("solution.csv", &header, rows)?;
    }
    if cfg.output.wants(Format::Json) {
        out.json(
            "report.json",
            &json!({
                "config": echo(cfg, source),
                "kind": kind,
                "all_passed": all_passed,
                "checks": checks,
                "report": report,
            }),
        )?;
        if let Some(b) = &report.bounds {
            out.json("bounds.json", b)?;
        }
    }
    Ok(all_passed)
}
