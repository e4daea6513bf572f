//! `kernel`: tables of the periodized kernel and the normalization constant.

use std::f64::consts::PI;

use fracperiodic::{kernel_k, normalization_c1s, FracOrder, KernelValue};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Format, RunConfig, Source};
use crate::output::{float, OutDir};
use crate::{echo, RunError};

fn abscissae(cfg: &RunConfig) -> Vec<f64> {
    let z = cfg.kernel.z.get_ref();
    if !z.is_empty() {
        return z.clone();
    }
    let m = *cfg.kernel.points.get_ref();
    (1..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

pub fn table(cfg: &RunConfig) -> Result<Vec<(f64, f64, KernelValue)>, RunError> {
    let tol = *cfg.kernel.tol.get_ref();
    let zs = abscissae(cfg);
    let jobs: Vec<(f64, f64)> =
        cfg.kernel.s.get_ref().iter().flat_map(|&s| zs.iter().map(move |&z| (s, z))).collect();
    let rows = jobs
        .into_par_iter()
        .map(|(s, z)| Ok((s, z, kernel_k(z, FracOrder::new(s)?, tol)?)))
        .collect::<fracperiodic::Result<_>>()?;
    Ok(rows)
}

pub fn run(cfg: &RunConfig, source: &Source, out: &mut OutDir) -> Result<bool, RunError> {
    let rows = table(cfg)?;
    let constants = cfg
        .kernel
        .s
        .get_ref()
        .iter()
        .map(|&s| Ok(json!({ "s": s, "c1s": normalization_c1s(FracOrder::new(s)?) })))
        .collect::<fracperiodic::Result<Vec<_>>>()?;

    if !cfg.kernel.z.get_ref().is_empty() {
        for (s, z, k) in &rows {
            println!("K(z = {z}, s = {s}) = {} (tail bound {:e})", float(k.value), k.tail_bound);
        }
    }
    if cfg.output.wants(Format::Csv) {
        out.csv(
            "kernel.csv",
            &["s", "z", "K", "tail_bound", "images"],
            rows.iter().map(|(s, z, k)| {
                vec![float(*s), float(*z), float(k.value), float(k.tail_bound), k.images.to_string()]
            }),
        )?;
    }
    if cfg.output.wants(Format::Json) {
        out.json(
            "kernel.json",
            &json!({
                "config": echo(cfg, source),
                "normalization": constants,
                "points": rows.len(),
            }),
        )?;
    }
    Ok(true)
}
