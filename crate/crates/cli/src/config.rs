//! Run configuration: the TOML schema, embedded presets and validation with
//! line-numbered diagnostics.

use std::f64::consts::PI;
use std::fmt::Display;
use std::path::Path;

use fracperiodic::{
    AttractiveProblem, BifurcationProblem, BranchConfig, ContinuationConfig, FracOrder, IterationConfig,
    LienardProblem, Monomial, Nonlinearity, OperatorSign, PeriodicFunction, Polynomial, PowerTerm,
    QuadratureConfig, RepulsiveProblem, SystemProblem,
};
use serde::{Deserialize, Serialize};
use toml::Spanned;

/// Presets shipped with the binary.
pub const PRESETS: &[(&str, &str)] = &[
    ("forbat", include_str!("../presets/forbat.toml")),
    ("repulsive-quadratic", include_str!("../presets/repulsive-quadratic.toml")),
    ("lienard", include_str!("../presets/lienard.toml")),
    ("system", include_str!("../presets/system.toml")),
    ("bifurcation", include_str!("../presets/bifurcation.toml")),
    ("verify", include_str!("../presets/verify.toml")),
    ("kernel", include_str!("../presets/kernel.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

fn sp<T>(value: T) -> Spanned<T> {
    Spanned::new(0..0, value)
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    /// 1-based line in the config text; absent for defaults and flags.
    pub line: Option<usize>,
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub enum ConfigError {
    Io(String),
    UnknownPreset(String),
    Parse { line: Option<usize>, column: Option<usize>, message: String },
    Validation(Vec<Violation>),
}

impl Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "{m}"),
            ConfigError::UnknownPreset(name) => {
                let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                write!(f, "unknown preset '{name}' (known: {})", known.join(", "))
            }
            ConfigError::Parse { line, column, message } => match (line, column) {
                (Some(l), Some(c)) => write!(f, "parse error at line {l}, column {c}: {message}"),
                _ => write!(f, "parse error: {message}"),
            },
            ConfigError::Validation(list) => {
                writeln!(f, "{} invalid setting(s):", list.len())?;
                for v in list {
                    match v.line {
                        Some(l) => writeln!(f, "  line {l}: {}: {}", v.path, v.message)?,
                        None => writeln!(f, "  {}: {}", v.path, v.message)?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub n_modes: Spanned<usize>,
    pub residual_tol: Spanned<f64>,
    pub damping: Spanned<f64>,
    pub max_iterations: Spanned<usize>,
    pub newton: bool,
    pub continuation_lambda: Spanned<f64>,
    pub seed: u64,
    /// Samples per period in solution CSV files.
    pub output_points: Spanned<usize>,
    /// Bound on the independently re-verified residual.
    pub verify_tol: Spanned<f64>,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_modes: sp(32),
            residual_tol: sp(1e-10),
            damping: sp(0.5),
            max_iterations: sp(200),
            newton: true,
            continuation_lambda: sp(1.0),
            seed: 42,
            output_points: sp(256),
            verify_tol: sp(1e-8),
        }
    }
}

impl Numerics {
    pub fn iteration(&self) -> IterationConfig {
        IterationConfig {
            damping: *self.damping.get_ref(),
            residual_tol: *self.residual_tol.get_ref(),
            max_iterations: *self.max_iterations.get_ref(),
            continuation_lambda: *self.continuation_lambda.get_ref(),
            newton: self.newton,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub abs_tol: Spanned<f64>,
    pub max_refinement_depth: Spanned<usize>,
    pub tail_cutoff_periods: Spanned<usize>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        Self {
            abs_tol: sp(q.abs_tol),
            max_refinement_depth: sp(q.max_refinement_depth),
            tail_cutoff_periods: sp(q.tail_cutoff_periods),
        }
    }
}

impl QuadratureSpec {
    pub fn build(&self) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: *self.abs_tol.get_ref(),
            max_refinement_depth: *self.max_refinement_depth.get_ref(),
            tail_cutoff_periods: *self.tail_cutoff_periods.get_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coef: f64,
    pub power: f64,
}

fn nonlinearity(terms: &[TermSpec]) -> Nonlinearity {
    Nonlinearity { terms: terms.iter().map(|t| PowerTerm::new(t.coef, t.power)).collect() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub n: usize,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

/// `mean + Σ a_n cos(nt) + b_n sin(nt)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
}

impl FunctionSpec {
    pub fn build(&self, n_modes: usize) -> PeriodicFunction {
        let modes: Vec<(usize, f64, f64)> = self.modes.iter().map(|m| (m.n, m.a, m.b)).collect();
        PeriodicFunction::from_modes(n_modes, self.mean, &modes).expect("validated function spec")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttractiveSpec {
    pub s: Spanned<f64>,
    #[serde(default)]
    pub f: Vec<TermSpec>,
    pub g: Spanned<Vec<TermSpec>>,
    pub e: Spanned<FunctionSpec>,
    /// Apply the shift `u = v − C` to the equation with `g(v) = v/(v − C)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forbat_c: Option<Spanned<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepulsiveSpec {
    pub s: Spanned<f64>,
    pub c: Spanned<f64>,
    pub g: Spanned<Vec<TermSpec>>,
    pub e: Spanned<FunctionSpec>,
    pub g4_a: Spanned<f64>,
    #[serde(default = "zero")]
    pub g4_b: Spanned<f64>,
    #[serde(default = "default_g3_epsilon")]
    pub g3_epsilon: Spanned<f64>,
    #[serde(default)]
    pub operator_sign: OperatorSign,
}

fn zero() -> Spanned<f64> {
    sp(0.0)
}

fn default_g3_epsilon() -> Spanned<f64> {
    sp(0.05)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LienardSpec {
    pub s: Spanned<f64>,
    #[serde(default)]
    pub f: Vec<TermSpec>,
    pub w: Spanned<FunctionSpec>,
    #[serde(default)]
    pub mean_level: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// `(Σ x_i²)²`, the radial quartic in this many variables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quartic_radial: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub monomials: Vec<Monomial>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub s: Spanned<Vec<f64>>,
    pub potential: Spanned<PotentialSpec>,
    pub a: Spanned<Vec<Vec<f64>>>,
    pub e: Spanned<Vec<FunctionSpec>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcationSpec {
    pub s: Spanned<f64>,
    pub c: Spanned<f64>,
    #[serde(rename = "G")]
    pub big_g: Spanned<Vec<TermSpec>>,
    pub e: Spanned<FunctionSpec>,
    pub mu_range: Spanned<(f64, f64)>,
    #[serde(default)]
    pub operator_sign: OperatorSign,
    /// Extra `μ` values at which to count solutions.
    #[serde(default)]
    pub probe_mu: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationSpec {
    pub initial_step: Spanned<f64>,
    pub min_step: Spanned<f64>,
    pub max_step: Spanned<f64>,
    pub growth: Spanned<f64>,
    pub max_jump: Spanned<f64>,
    pub corrector_iterations: Spanned<usize>,
}

impl Default for ContinuationSpec {
    fn default() -> Self {
        let c = ContinuationConfig::default();
        Self {
            initial_step: sp(c.initial_step),
            min_step: sp(c.min_step),
            max_step: sp(c.max_step),
            growth: sp(c.growth),
            max_jump: sp(c.max_jump),
            corrector_iterations: sp(c.corrector_iterations),
        }
    }
}

impl ContinuationSpec {
    pub fn build(&self) -> ContinuationConfig {
        ContinuationConfig {
            initial_step: *self.initial_step.get_ref(),
            min_step: *self.min_step.get_ref(),
            max_step: *self.max_step.get_ref(),
            growth: *self.growth.get_ref(),
            max_jump: *self.max_jump.get_ref(),
            corrector_iterations: *self.corrector_iterations.get_ref(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_mu: Option<Spanned<f64>>,
    pub initial_step: Spanned<f64>,
    pub min_step: Spanned<f64>,
    pub max_step: Spanned<f64>,
    pub growth: Spanned<f64>,
    pub sup_cap: Spanned<f64>,
    pub arclength_budget: Spanned<f64>,
    pub max_points: Spanned<usize>,
    pub corrector_iterations: Spanned<usize>,
}

impl Default for BranchSpec {
    fn default() -> Self {
        let b = BranchConfig::default();
        Self {
            seed_mu: None,
            initial_step: sp(b.initial_step),
            min_step: sp(b.min_step),
            max_step: sp(b.max_step),
            growth: sp(b.growth),
            sup_cap: sp(b.sup_cap),
            arclength_budget: sp(b.arclength_budget),
            max_points: sp(b.max_points),
            corrector_iterations: sp(b.corrector_iterations),
        }
    }
}

impl BranchSpec {
    pub fn build(&self) -> BranchConfig {
        BranchConfig {
            seed_mu: self.seed_mu.as_ref().map(|v| *v.get_ref()),
            initial_step: *self.initial_step.get_ref(),
            min_step: *self.min_step.get_ref(),
            max_step: *self.max_step.get_ref(),
            growth: *self.growth.get_ref(),
            sup_cap: *self.sup_cap.get_ref(),
            arclength_budget: *self.arclength_budget.get_ref(),
            max_points: *self.max_points.get_ref(),
            corrector_iterations: *self.corrector_iterations.get_ref(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySpec {
    pub orders: Spanned<Vec<f64>>,
    pub random_functions: Spanned<usize>,
    pub max_modes: Spanned<usize>,
    pub kernel_points: Spanned<usize>,
    pub zero_mean_kernel_samples: Spanned<usize>,
    pub orthogonality_samples: Spanned<usize>,
    pub poincare_samples: Spanned<usize>,
    pub energy_s: Spanned<f64>,
    pub energy_interval: Spanned<(f64, f64)>,
    pub additivity_triples: Spanned<usize>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            orders: sp(vec![0.55, 0.75, 0.9]),
            random_functions: sp(20),
            max_modes: sp(16),
            kernel_points: sp(33),
            zero_mean_kernel_samples: sp(3),
            orthogonality_samples: sp(50),
            poincare_samples: sp(100),
            energy_s: sp(0.75),
            energy_interval: sp((PI / 4.0, PI / 2.0)),
            additivity_triples: sp(3),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSpec {
    pub s: Spanned<Vec<f64>>,
    /// Table on `z_j = 2πj/points`, `0 < j < points`; ignored when `z` is set.
    pub points: Spanned<usize>,
    pub z: Spanned<Vec<f64>>,
    pub tol: Spanned<f64>,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { s: sp(vec![0.75]), points: sp(64), z: sp(Vec::new()), tol: sp(1e-12) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { formats: vec![Format::Csv, Format::Json] }
    }
}

impl OutputSpec {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attractive: Option<AttractiveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repulsive: Option<RepulsiveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lienard: Option<LienardSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bifurcation: Option<BifurcationSpec>,
    #[serde(default)]
    pub continuation: ContinuationSpec,
    #[serde(default)]
    pub branch: BranchSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Config text and where it came from.
#[derive(Debug, Clone)]
pub struct Source {
    pub origin: String,
    pub text: String,
}

impl Source {
    pub fn resolve(config: Option<&Path>, preset_name: Option<&str>) -> Result<Source, ConfigError> {
        match (config, preset_name) {
            (Some(path), None | Some("custom")) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError::Io(format!("cannot read {}: {e}", path.display())))?;
                Ok(Source { origin: path.display().to_string(), text })
            }
            (Some(_), Some(name)) => Err(ConfigError::Validation(vec![Violation {
                line: None,
                path: "--preset".into(),
                message: format!("preset '{name}' cannot be combined with --config; use --preset custom"),
            }])),
            (None, Some("custom")) => Err(ConfigError::Validation(vec![Violation {
                line: None,
                path: "--preset".into(),
                message: "preset 'custom' needs --config".into(),
            }])),
            (None, Some(name)) => preset(name)
                .map(|text| Source { origin: format!("preset:{name}"), text: text.to_string() })
                .ok_or_else(|| ConfigError::UnknownPreset(name.to_string())),
            (None, None) => Ok(Source { origin: "defaults".into(), text: String::new() }),
        }
    }

    fn line_of(&self, span: std::ops::Range<usize>) -> Option<usize> {
        if span.end == 0 || span.start > self.text.len() {
            return None;
        }
        Some(self.text[..span.start].matches('\n').count() + 1)
    }

    pub fn parse(&self) -> Result<RunConfig, ConfigError> {
        toml::from_str(&self.text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => {
                    let before = &self.text[..span.start.min(self.text.len())];
                    let line = before.matches('\n').count() + 1;
                    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                    (Some(line), Some(column))
                }
                None => (None, None),
            };
            ConfigError::Parse { line, column, message: e.message().to_string() }
        })
    }
}

/// Collects violations with the line of the offending value.
struct Checker<'a> {
    source: &'a Source,
    found: Vec<Violation>,
}

impl Checker<'_> {
    fn require<T>(&mut self, path: &str, value: &Spanned<T>, ok: bool, message: impl Into<String>) {
        if !ok {
            self.found.push(Violation {
                line: self.source.line_of(value.span()),
                path: path.to_string(),
                message: message.into(),
            });
        }
    }

    fn positive(&mut self, path: &str, v: &Spanned<f64>) {
        let x = *v.get_ref();
        self.require(path, v, x > 0.0 && x.is_finite(), format!("must be positive and finite, got {x}"));
    }

    fn at_least(&mut self, path: &str, v: &Spanned<usize>, min: usize) {
        let x = *v.get_ref();
        self.require(path, v, x >= min, format!("must be at least {min}, got {x}"));
    }

    fn standard_order(&mut self, path: &str, v: &Spanned<f64>) {
        let x = *v.get_ref();
        self.require(
            path,
            v,
            x > 0.5 && x < 1.0,
            format!("s = {x} violates the standing assumption s ∈ (1/2, 1)"),
        );
    }

    fn terms(&mut self, path: &str, v: &Spanned<Vec<TermSpec>>, nonempty: bool) {
        let ok = v.get_ref().iter().all(|t| t.coef.is_finite() && t.power.is_finite());
        self.require(path, v, ok, "term coefficients and powers must be finite");
        if nonempty {
            self.require(path, v, !v.get_ref().is_empty(), "needs at least one term");
        }
    }

    fn function(&mut self, path: &str, v: &Spanned<FunctionSpec>, n_modes: usize) {
        let f = v.get_ref();
        self.require(path, v, f.mean.is_finite(), "mean must be finite");
        for m in &f.modes {
            self.require(
                path,
                v,
                m.n >= 1 && m.n <= n_modes,
                format!("mode n = {} outside 1..={n_modes} (numerics.n_modes)", m.n),
            );
            self.require(path, v, m.a.is_finite() && m.b.is_finite(), "mode coefficients must be finite");
        }
    }
}

impl RunConfig {
    /// Every violated invariant, with source lines where known.
    pub fn validate(&self, source: &Source) -> Result<(), ConfigError> {
        let mut c = Checker { source, found: Vec::new() };
        let n = &self.numerics;
        c.at_least("numerics.n_modes", &n.n_modes, 1);
        c.require("numerics.n_modes", &n.n_modes, *n.n_modes.get_ref() <= 1024, "at most 1024 modes");
        c.positive("numerics.residual_tol", &n.residual_tol);
        c.positive("numerics.verify_tol", &n.verify_tol);
        let d = *n.damping.get_ref();
        c.require(
            "numerics.damping",
            &n.damping,
            d > 0.0 && d <= 1.0,
            format!("must lie in (0, 1], got {d}"),
        );
        c.at_least("numerics.max_iterations", &n.max_iterations, 1);
        c.at_least("numerics.output_points", &n.output_points, 2);
        let l = *n.continuation_lambda.get_ref();
        c.require(
            "numerics.continuation_lambda",
            &n.continuation_lambda,
            l.is_finite() && l >= 0.0,
            format!("must be finite and non-negative, got {l}"),
        );
        let q = &self.quadrature;
        c.positive("quadrature.abs_tol", &q.abs_tol);
        c.at_least("quadrature.max_refinement_depth", &q.max_refinement_depth, 1);
        c.at_least("quadrature.tail_cutoff_periods", &q.tail_cutoff_periods, 1);

        let modes = *n.n_modes.get_ref();
        if let Some(p) = &self.attractive {
            c.standard_order("attractive.s", &p.s);
            c.terms("attractive.g", &p.g, true);
            c.function("attractive.e", &p.e, modes);
            if let Some(cc) = &p.forbat_c {
                c.positive("attractive.forbat_c", cc);
                let expected = [TermSpec { coef: *cc.get_ref(), power: -1.0 }];
                c.require(
                    "attractive.g",
                    &p.g,
                    p.g.get_ref().as_slice() == expected,
                    "with forbat_c = C the nonlinearity must be g = C/x, i.e. [{ coef = C, power = -1 }]",
                );
                let ok = p.f.iter().all(|t| t.power >= 0.0 && t.power.fract() == 0.0);
                c.require(
                    "attractive.f",
                    &p.s,
                    ok,
                    "the shift needs polynomial f (non-negative integer powers)",
                );
            }
        }
        if let Some(p) = &self.repulsive {
            c.standard_order("repulsive.s", &p.s);
            c.positive("repulsive.c", &p.c);
            c.terms("repulsive.g", &p.g, true);
            c.function("repulsive.e", &p.e, modes);
            c.positive("repulsive.g4_a", &p.g4_a);
            let b = *p.g4_b.get_ref();
            c.require(
                "repulsive.g4_b",
                &p.g4_b,
                b >= 0.0 && b.is_finite(),
                format!("must be non-negative, got {b}"),
            );
            c.positive("repulsive.g3_epsilon", &p.g3_epsilon);
        }
        if let Some(p) = &self.lienard {
            c.standard_order("lienard.s", &p.s);
            c.function("lienard.w", &p.w, modes);
        }
        if let Some(p) = &self.system {
            let dim = p.s.get_ref().len();
            c.require("system.s", &p.s, dim >= 1, "needs at least one component");
            for &s in p.s.get_ref() {
                c.require(
                    "system.s",
                    &p.s,
                    s > 0.5 && s < 1.0,
                    format!("s = {s} violates the standing assumption s ∈ (1/2, 1)"),
                );
            }
            let square = p.a.get_ref().len() == dim && p.a.get_ref().iter().all(|r| r.len() == dim);
            c.require("system.a", &p.a, square, format!("must be a {dim}×{dim} matrix"));
            c.require("system.e", &p.e, p.e.get_ref().len() == dim, format!("needs {dim} forcing functions"));
            for f in p.e.get_ref() {
                c.function("system.e", &Spanned::new(p.e.span(), f.clone()), modes);
            }
            let pot = p.potential.get_ref();
            c.require(
                "system.potential",
                &p.potential,
                pot.quartic_radial.is_some() != !pot.monomials.is_empty(),
                "give exactly one of quartic_radial or monomials",
            );
            if let Some(k) = pot.quartic_radial {
                c.require(
                    "system.potential",
                    &p.potential,
                    k == dim,
                    format!("quartic_radial must equal the dimension {dim}"),
                );
            }
            for m in &pot.monomials {
                c.require(
                    "system.potential",
                    &p.potential,
                    m.exponents.len() == dim,
                    format!("every monomial needs {dim} exponents"),
                );
            }
        }
        if let Some(p) = &self.bifurcation {
            c.standard_order("bifurcation.s", &p.s);
            c.positive("bifurcation.c", &p.c);
            c.terms("bifurcation.G", &p.big_g, false);
            c.function("bifurcation.e", &p.e, modes);
            let (lo, hi) = *p.mu_range.get_ref();
            c.require(
                "bifurcation.mu_range",
                &p.mu_range,
                lo.is_finite() && hi.is_finite() && lo < hi && hi > 0.0,
                format!("need finite lo < hi with hi > 0, got [{lo}, {hi}]"),
            );
        }

        let cs = &self.continuation;
        for (path, v) in [
            ("continuation.initial_step", &cs.initial_step),
            ("continuation.min_step", &cs.min_step),
            ("continuation.max_step", &cs.max_step),
            ("continuation.max_jump", &cs.max_jump),
        ] {
            c.positive(path, v);
        }
        let g = *cs.growth.get_ref();
        c.require("continuation.growth", &cs.growth, g >= 1.0, format!("must be at least 1, got {g}"));
        c.at_least("continuation.corrector_iterations", &cs.corrector_iterations, 1);

        let b = &self.branch;
        for (path, v) in [
            ("branch.initial_step", &b.initial_step),
            ("branch.min_step", &b.min_step),
            ("branch.max_step", &b.max_step),
            ("branch.sup_cap", &b.sup_cap),
            ("branch.arclength_budget", &b.arclength_budget),
        ] {
            c.positive(path, v);
        }
        if let Some(m) = &b.seed_mu {
            c.positive("branch.seed_mu", m);
        }
        let g = *b.growth.get_ref();
        c.require("branch.growth", &b.growth, g >= 1.0, format!("must be at least 1, got {g}"));
        c.at_least("branch.max_points", &b.max_points, 1);
        c.at_least("branch.corrector_iterations", &b.corrector_iterations, 1);

        let v = &self.verify;
        c.require("verify.orders", &v.orders, !v.orders.get_ref().is_empty(), "needs at least one order");
        for &s in v.orders.get_ref() {
            c.require(
                "verify.orders",
                &v.orders,
                s > 0.5 && s < 1.0,
                format!("s = {s} violates the standing assumption s ∈ (1/2, 1)"),
            );
        }
        c.at_least("verify.random_functions", &v.random_functions, 1);
        c.at_least("verify.max_modes", &v.max_modes, 1);
        c.at_least("verify.kernel_points", &v.kernel_points, 1);
        c.standard_order("verify.energy_s", &v.energy_s);
        let (a, bb) = *v.energy_interval.get_ref();
        c.require(
            "verify.energy_interval",
            &v.energy_interval,
            a > 0.0 && bb > a,
            format!("need 0 < a < b, got [{a}, {bb}]"),
        );

        let k = &self.kernel;
        for &s in k.s.get_ref() {
            c.require("kernel.s", &k.s, s > 0.0 && s < 1.0, format!("s = {s} outside (0, 1)"));
        }
        c.require("kernel.s", &k.s, !k.s.get_ref().is_empty(), "needs at least one order");
        c.at_least("kernel.points", &k.points, 2);
        for &z in k.z.get_ref() {
            c.require("kernel.z", &k.z, z > 0.0 && z < 2.0 * PI, format!("z = {z} outside (0, 2π)"));
        }
        c.positive("kernel.tol", &k.tol);

        if c.found.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Validation(c.found))
        }
    }

    pub fn n_modes(&self) -> usize {
        *self.numerics.n_modes.get_ref()
    }
}

fn order(s: &Spanned<f64>) -> FracOrder {
    FracOrder::new(*s.get_ref()).expect("validated order")
}

impl AttractiveSpec {
    pub fn build(&self, n_modes: usize) -> fracperiodic::Result<AttractiveProblem> {
        let e = self.e.get_ref().build(n_modes);
        match &self.forbat_c {
            Some(c) => AttractiveProblem::forbat(*c.get_ref(), &nonlinearity(&self.f), &e, order(&self.s)),
            None => Ok(AttractiveProblem {
                f: nonlinearity(&self.f),
                g: nonlinearity(self.g.get_ref()),
                e,
                s: order(&self.s),
            }),
        }
    }
}

impl RepulsiveSpec {
    pub fn build(&self, n_modes: usize) -> RepulsiveProblem {
        RepulsiveProblem {
            c: *self.c.get_ref(),
            g: nonlinearity(self.g.get_ref()),
            e: self.e.get_ref().build(n_modes),
            s: order(&self.s),
            g4_a: *self.g4_a.get_ref(),
            g4_b: *self.g4_b.get_ref(),
            g3_epsilon: *self.g3_epsilon.get_ref(),
            operator_sign: self.operator_sign,
        }
    }
}

impl LienardSpec {
    pub fn build(&self, n_modes: usize) -> LienardProblem {
        LienardProblem {
            f: nonlinearity(&self.f),
            w: self.w.get_ref().build(n_modes),
            s: order(&self.s),
            mean_level: self.mean_level,
        }
    }
}

impl SystemSpec {
    pub fn build(&self, n_modes: usize) -> SystemProblem {
        let pot = self.potential.get_ref();
        let potential = match pot.quartic_radial {
            Some(k) => Polynomial::quartic_radial(k),
            None => Polynomial::new(pot.monomials.clone()),
        };
        SystemProblem {
            s: self.s.get_ref().iter().map(|&s| FracOrder::new(s).expect("validated order")).collect(),
            potential,
            a: self.a.get_ref().clone(),
            e: self.e.get_ref().iter().map(|f| f.build(n_modes)).collect(),
        }
    }
}

impl BifurcationSpec {
    pub fn build(&self, n_modes: usize) -> BifurcationProblem {
        BifurcationProblem {
            c: *self.c.get_ref(),
            big_g: nonlinearity(self.big_g.get_ref()),
            e: self.e.get_ref().build(n_modes),
            s: order(&self.s),
            mu_range: *self.mu_range.get_ref(),
            operator_sign: self.operator_sign,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<RunConfig, ConfigError> {
        let src = Source { origin: "test".into(), text: text.into() };
        let cfg = src.parse()?;
        cfg.validate(&src)?;
        Ok(cfg)
    }

    #[test]
    fn every_preset_parses_and_validates() {
        for (name, text) in PRESETS {
            load(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn forbat_preset_resolves_to_inverse_power() {
        let cfg = load(preset("forbat").unwrap()).unwrap();
        let spec = cfg.attractive.unwrap();
        assert_eq!(spec.g.get_ref().as_slice(), [TermSpec { coef: 1.0, power: -1.0 }]);
        assert!(spec.f.is_empty());
        assert_eq!(spec.forbat_c.map(|c| *c.get_ref()), Some(1.0));
    }

    #[test]
    fn low_order_is_rejected_with_its_line() {
        let text = "[lienard]\ns = 0.4\nw = { modes = [{ n = 1, b = 0.3 }] }\n";
        match load(text) {
            Err(ConfigError::Validation(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].line, Some(2));
                assert!(v[0].message.contains("(1/2, 1)"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let text = "[numerics]\nresidual_tol = -1e-10\ndamping = 2.0\n\n[quadrature]\nabs_tol = 0.0\n";
        match load(text) {
            Err(ConfigError::Validation(v)) => {
                let lines: Vec<_> = v.iter().map(|x| x.line).collect();
                assert_eq!(lines, [Some(2), Some(3), Some(6)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_a_location() {
        match load("[numerics]\nn_modes = \"many\"\n") {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, Some(2)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(load("[numerics]\nbogus = 1\n"), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn preset_resolution() {
        assert!(matches!(Source::resolve(None, Some("nope")), Err(ConfigError::UnknownPreset(_))));
        assert!(Source::resolve(None, Some("custom")).is_err());
        assert_eq!(Source::resolve(None, None).unwrap().text, "");
    }
}
