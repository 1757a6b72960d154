//! Run configuration: a line-oriented `section.key = value` format with `#`
//! comments. Unknown and repeated keys are rejected; every error names the
//! line it came from.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ellvar_core::solvers::SolverOptions;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// A number or `auto` (derived from the thresholds at run time).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Amount {
    Auto,
    Value(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsPolicyName {
    Symmetric,
    Golden,
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    LambdaMuFraction,
    HFraction,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::LambdaMuFraction => "lambda_mu_fraction",
            SweepParameter::HFraction => "h_fraction",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiConfig {
    pub family: u32,
    pub a: f64,
    pub p: f64,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,

    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: Amount,
    pub mu: Amount,
    /// With automatic `λ, μ`: `λ = μ = fraction·Λ₀/2`.
    pub lambda_mu_fraction: f64,

    pub phi1: PhiConfig,
    pub phi2: PhiConfig,

    pub a: String,
    pub b: String,
    pub c: String,
    pub h1: String,
    pub h2: String,
    /// `auto` rescales each `hᵢ` to `‖hᵢ‖₂ = h_fraction·√(m_{λ,μ}/2)`.
    pub h_scale: Amount,
    pub h_fraction: f64,

    pub solver: SolverOptions,

    pub eps_policy: EpsPolicyName,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub sp_restarts: usize,
    pub sphere_samples: usize,

    pub s_max: f64,
    pub n_samples: usize,

    pub gradcheck_probes: usize,
    pub gradcheck_amplitude: f64,
    pub gradcheck_step: f64,

    pub out_dir: String,
    pub fields_csv: bool,

    pub sweep_parameter: SweepParameter,
    pub sweep_values: Vec<f64>,

    lines: BTreeMap<String, usize>,
}

const KEYS: &[&str] = &[
    "grid.dim",
    "grid.lower",
    "grid.upper",
    "grid.nodes",
    "problem.q",
    "problem.alpha",
    "problem.beta",
    "problem.lambda",
    "problem.mu",
    "problem.lambda_mu_fraction",
    "phi1.family",
    "phi1.A",
    "phi1.p",
    "phi1.r",
    "phi2.family",
    "phi2.A",
    "phi2.p",
    "phi2.r",
    "weights.a",
    "weights.b",
    "weights.c",
    "weights.h1",
    "weights.h2",
    "weights.h_scale",
    "weights.h_fraction",
    "solver.max_iters",
    "solver.step0",
    "solver.residual_tol",
    "solver.path_points",
    "solver.backtracking",
    "solver.seed",
    "thresholds.eps_policy",
    "thresholds.eps1",
    "thresholds.eps2",
    "thresholds.sp_restarts",
    "thresholds.sphere_samples",
    "certify.s_max",
    "certify.n_samples",
    "gradcheck.probes",
    "gradcheck.amplitude",
    "gradcheck.step",
    "output.dir",
    "output.fields_csv",
    "sweep.parameter",
    "sweep.values",
];

const REQUIRED: &[&str] = &[
    "grid.dim",
    "grid.lower",
    "grid.upper",
    "grid.nodes",
    "problem.q",
    "problem.alpha",
    "problem.beta",
    "problem.lambda",
    "problem.mu",
    "phi1.family",
    "phi1.A",
    "phi2.family",
    "phi2.A",
    "weights.a",
    "weights.b",
    "weights.c",
    "weights.h1",
    "weights.h2",
];

struct Raw {
    values: BTreeMap<String, (String, usize)>,
    last_line: usize,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.values.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn err<T>(&self, key: &str, message: impl Into<String>) -> Result<T> {
        let line = self.values.get(key).map_or(0, |(_, l)| *l);
        Err(ConfigError {
            line,
            message: format!("{key}: {}", message.into()),
        })
    }

    fn number(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.get(key) {
            None => default.map_or_else(|| self.err(key, "missing"), Ok),
            Some((v, _)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => self.err(key, format!("expected a finite number, found `{v}`")),
            },
        }
    }

    fn integer<T: std::str::FromStr>(&self, key: &str, default: Option<T>) -> Result<T> {
        match self.get(key) {
            None => default.map_or_else(|| self.err(key, "missing"), Ok),
            Some((v, _)) => v
                .parse::<T>()
                .or_else(|_| self.err(key, format!("expected a nonnegative integer, found `{v}`"))),
        }
    }

    fn amount(&self, key: &str, default: Option<Amount>) -> Result<Amount> {
        match self.get(key) {
            Some(("auto", _)) => Ok(Amount::Auto),
            Some(_) => Ok(Amount::Value(self.number(key, None)?)),
            None => default.map_or_else(|| self.err(key, "missing"), Ok),
        }
    }

    fn text(&self, key: &str, default: Option<&str>) -> Result<String> {
        match self.get(key) {
            Some((v, _)) => Ok(v.to_string()),
            None => default.map_or_else(|| self.err(key, "missing"), |d| Ok(d.to_string())),
        }
    }

    fn numbers(&self, key: &str, default: Option<Vec<f64>>) -> Result<Vec<f64>> {
        let Some((v, _)) = self.get(key) else {
            return default.map_or_else(|| self.err(key, "missing"), Ok);
        };
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| match s.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => self.err(
                    key,
                    format!("expected comma-separated numbers, found `{}`", s.trim()),
                ),
            })
            .collect()
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_list<T: std::fmt::Debug>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn fmt_amount(a: Amount) -> String {
    match a {
        Amount::Auto => "auto".into(),
        Amount::Value(x) => fmt_f64(x),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut values = BTreeMap::new();
        let mut last_line = 0;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            last_line = line;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError {
                    line,
                    message: format!("expected `key = value`, found `{body}`"),
                });
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            if let Some((_, first)) = values.get(key) {
                return Err(ConfigError {
                    line,
                    message: format!("`{key}` already set on line {first}"),
                });
            }
            values.insert(key.to_string(), (value.trim().to_string(), line));
        }
        let raw = Raw { values, last_line };
        for key in REQUIRED {
            if raw.get(key).is_none() {
                return Err(ConfigError {
                    line: raw.last_line,
                    message: format!("missing required key `{key}`"),
                });
            }
        }
        RunConfig::from_raw(&raw)
    }

    fn from_raw(raw: &Raw) -> Result<RunConfig> {
        let dim: usize = raw.integer("grid.dim", None)?;
        if !(1..=3).contains(&dim) {
            return raw.err("grid.dim", format!("dimension {dim} not in 1..=3"));
        }
        let lower = raw.numbers("grid.lower", None)?;
        let upper = raw.numbers("grid.upper", None)?;
        for (key, v) in [("grid.lower", &lower), ("grid.upper", &upper)] {
            if v.len() != dim {
                return raw.err(key, format!("expected {dim} values, found {}", v.len()));
            }
        }
        for k in 0..dim {
            if !(upper[k] > lower[k]) {
                return raw.err(
                    "grid.upper",
                    format!(
                        "axis {} has upper {} <= lower {}",
                        k + 1,
                        upper[k],
                        lower[k]
                    ),
                );
            }
        }
        let nodes_text = raw.text("grid.nodes", None)?;
        let mut nodes = Vec::new();
        for s in nodes_text.split(',') {
            match s.trim().parse::<usize>() {
                Ok(n) if n >= 3 => nodes.push(n),
                _ => {
                    return raw.err(
                        "grid.nodes",
                        format!("expected integers >= 3, found `{}`", s.trim()),
                    )
                }
            }
        }
        if nodes.len() == 1 {
            nodes = vec![nodes[0]; dim];
        }
        if nodes.len() != dim {
            return raw.err(
                "grid.nodes",
                format!("expected 1 or {dim} values, found {}", nodes.len()),
            );
        }

        let q = raw.number("problem.q", None)?;
        if !(q > 1.0 && q < 2.0) {
            return raw.err("problem.q", format!("q = {q} must lie in (1, 2)"));
        }
        let alpha = raw.number("problem.alpha", None)?;
        if !(alpha > 1.0) {
            return raw.err("problem.alpha", format!("alpha = {alpha} must exceed 1"));
        }
        let beta = raw.number("problem.beta", None)?;
        if !(beta > 1.0) {
            return raw.err("problem.beta", format!("beta = {beta} must exceed 1"));
        }
        if dim == 3 && alpha + beta >= 6.0 {
            return raw.err(
                "problem.alpha",
                format!(
                    "alpha + beta = {} must stay below 6 in dimension 3",
                    alpha + beta
                ),
            );
        }
        let lambda = raw.amount("problem.lambda", None)?;
        let mu = raw.amount("problem.mu", None)?;
        for (key, a) in [("problem.lambda", lambda), ("problem.mu", mu)] {
            if let Amount::Value(x) = a {
                if !(x > 0.0) {
                    return raw.err(key, format!("{x} must be positive"));
                }
            }
        }
        if (lambda == Amount::Auto) != (mu == Amount::Auto) {
            return raw.err(
                "problem.mu",
                "lambda and mu must both be `auto` or both numeric",
            );
        }
        let lambda_mu_fraction = raw.number("problem.lambda_mu_fraction", Some(0.5))?;
        if !(lambda_mu_fraction > 0.0) {
            return raw.err("problem.lambda_mu_fraction", "must be positive");
        }

        let phi = |n: u32| -> Result<PhiConfig> {
            let fam_key = format!("phi{n}.family");
            let cfg = PhiConfig {
                family: raw.integer(&fam_key, None)?,
                a: raw.number(&format!("phi{n}.A"), None)?,
                p: raw.number(&format!("phi{n}.p"), Some(0.0))?,
                r: raw.number(&format!("phi{n}.r"), Some(0.0))?,
            };
            if let Err(e) = ellvar_core::PhiSpec::new(cfg.family, cfg.a, cfg.p, cfg.r) {
                return raw.err(&fam_key, e.to_string());
            }
            Ok(cfg)
        };
        let phi1 = phi(1)?;
        let phi2 = phi(2)?;

        let expr = |key: &str| -> Result<String> {
            let text = raw.text(key, None)?;
            match text.parse::<ellvar_core::Expr>() {
                Ok(e) if e.max_var() <= dim => Ok(text),
                Ok(e) => raw.err(
                    key,
                    format!("uses x{} on a {dim}-dimensional grid", e.max_var()),
                ),
                Err(e) => raw.err(key, e.to_string()),
            }
        };
        let (a, b, c, h1, h2) = (
            expr("weights.a")?,
            expr("weights.b")?,
            expr("weights.c")?,
            expr("weights.h1")?,
            expr("weights.h2")?,
        );
        let h_scale = raw.amount("weights.h_scale", Some(Amount::Value(1.0)))?;
        if let Amount::Value(x) = h_scale {
            if !(x > 0.0) {
                return raw.err("weights.h_scale", "must be `auto` or positive");
            }
        }
        let h_fraction = raw.number("weights.h_fraction", Some(0.5))?;
        if !(h_fraction > 0.0) {
            return raw.err("weights.h_fraction", "must be positive");
        }

        let d = SolverOptions::default();
        let solver = SolverOptions {
            max_iters: raw.integer("solver.max_iters", Some(d.max_iters))?,
            step0: raw.number("solver.step0", Some(d.step0))?,
            residual_tol: raw.number("solver.residual_tol", Some(d.residual_tol))?,
            path_points: raw.integer("solver.path_points", Some(d.path_points))?,
            backtracking: raw.number("solver.backtracking", Some(d.backtracking))?,
            seed: raw.integer("solver.seed", Some(d.seed))?,
        };
        for (key, ok) in [
            ("solver.max_iters", solver.max_iters > 0),
            ("solver.step0", solver.step0 > 0.0),
            ("solver.residual_tol", solver.residual_tol > 0.0),
            ("solver.path_points", solver.path_points >= 3),
            (
                "solver.backtracking",
                solver.backtracking > 0.0 && solver.backtracking < 1.0,
            ),
        ] {
            if !ok {
                return raw.err(key, "out of range");
            }
        }

        let eps_policy = match raw
            .text("thresholds.eps_policy", Some("symmetric"))?
            .as_str()
        {
            "symmetric" => EpsPolicyName::Symmetric,
            "golden" => EpsPolicyName::Golden,
            "fixed" => EpsPolicyName::Fixed,
            other => {
                return raw.err(
                    "thresholds.eps_policy",
                    format!("expected symmetric, golden or fixed, found `{other}`"),
                )
            }
        };
        let opt = |key: &str| -> Result<Option<f64>> {
            if raw.get(key).is_some() {
                Ok(Some(raw.number(key, None)?))
            } else {
                Ok(None)
            }
        };
        let eps1 = opt("thresholds.eps1")?;
        let eps2 = opt("thresholds.eps2")?;
        if eps_policy == EpsPolicyName::Fixed && (eps1.is_none() || eps2.is_none()) {
            return raw.err(
                "thresholds.eps_policy",
                "fixed policy needs thresholds.eps1 and thresholds.eps2",
            );
        }
        let sp_restarts = raw.integer("thresholds.sp_restarts", Some(8))?;
        if sp_restarts < 8 {
            return raw.err("thresholds.sp_restarts", "at least 8 restarts are required");
        }
        let sphere_samples = raw.integer("thresholds.sphere_samples", Some(500))?;

        let s_max = raw.number("certify.s_max", Some(1e6))?;
        if !(s_max > 0.0) {
            return raw.err("certify.s_max", "must be positive");
        }
        let n_samples = raw.integer("certify.n_samples", Some(4096))?;
        if n_samples < 100 {
            return raw.err("certify.n_samples", "at least 100 samples are required");
        }

        let gradcheck_probes = raw.integer("gradcheck.probes", Some(50))?;
        let gradcheck_amplitude = raw.number("gradcheck.amplitude", Some(1.0))?;
        if gradcheck_amplitude < 0.0 {
            return raw.err("gradcheck.amplitude", "must be nonnegative");
        }
        let gradcheck_step = raw.number("gradcheck.step", Some(1e-6))?;
        if !(gradcheck_step > 0.0) {
            return raw.err("gradcheck.step", "must be positive");
        }

        let out_dir = raw.text("output.dir", Some("out"))?;
        let fields_csv = match raw.text("output.fields_csv", Some("true"))?.as_str() {
            "true" => true,
            "false" => false,
            other => {
                return raw.err(
                    "output.fields_csv",
                    format!("expected true or false, found `{other}`"),
                )
            }
        };

        let sweep_parameter = match raw
            .text("sweep.parameter", Some("lambda_mu_fraction"))?
            .as_str()
        {
            "lambda_mu_fraction" => SweepParameter::LambdaMuFraction,
            "h_fraction" => SweepParameter::HFraction,
            other => {
                return raw.err(
                    "sweep.parameter",
                    format!("expected lambda_mu_fraction or h_fraction, found `{other}`"),
                )
            }
        };
        let sweep_values = raw.numbers("sweep.values", Some(vec![0.25, 0.5, 0.75]))?;
        if sweep_values.iter().any(|&v| v <= 0.0) {
            return raw.err("sweep.values", "fractions must be positive");
        }

        Ok(RunConfig {
            dim,
            lower,
            upper,
            nodes,
            q,
            alpha,
            beta,
            lambda,
            mu,
            lambda_mu_fraction,
            phi1,
            phi2,
            a,
            b,
            c,
            h1,
            h2,
            h_scale,
            h_fraction,
            solver,
            eps_policy,
            eps1,
            eps2,
            sp_restarts,
            sphere_samples,
            s_max,
            n_samples,
            gradcheck_probes,
            gradcheck_amplitude,
            gradcheck_step,
            out_dir,
            fields_csv,
            sweep_parameter,
            sweep_values,
            lines: raw
                .values
                .iter()
                .map(|(k, (_, l))| (k.clone(), *l))
                .collect(),
        })
    }

    /// Line a key was set on, 0 when it took its default.
    pub fn line_of(&self, key: &str) -> usize {
        self.lines.get(key).copied().unwrap_or(0)
    }

    pub fn error_at(&self, key: &str, message: impl std::fmt::Display) -> ConfigError {
        ConfigError {
            line: self.line_of(key),
            message: format!("{key}: {message}"),
        }
    }

    /// Canonical text: every key in a fixed order with normalized values.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("grid.dim", self.dim.to_string());
        put("grid.lower", fmt_list(&self.lower));
        put("grid.upper", fmt_list(&self.upper));
        put("grid.nodes", fmt_list(&self.nodes));
        put("problem.q", fmt_f64(self.q));
        put("problem.alpha", fmt_f64(self.alpha));
        put("problem.beta", fmt_f64(self.beta));
        put("problem.lambda", fmt_amount(self.lambda));
        put("problem.mu", fmt_amount(self.mu));
        put(
            "problem.lambda_mu_fraction",
            fmt_f64(self.lambda_mu_fraction),
        );
        for (n, p) in [(1, &self.phi1), (2, &self.phi2)] {
            put(&format!("phi{n}.family"), p.family.to_string());
            put(&format!("phi{n}.A"), fmt_f64(p.a));
            put(&format!("phi{n}.p"), fmt_f64(p.p));
            put(&format!("phi{n}.r"), fmt_f64(p.r));
        }
        put("weights.a", self.a.clone());
        put("weights.b", self.b.clone());
        put("weights.c", self.c.clone());
        put("weights.h1", self.h1.clone());
        put("weights.h2", self.h2.clone());
        put("weights.h_scale", fmt_amount(self.h_scale));
        put("weights.h_fraction", fmt_f64(self.h_fraction));
        put("solver.max_iters", self.solver.max_iters.to_string());
        put("solver.step0", fmt_f64(self.solver.step0));
        put("solver.residual_tol", fmt_f64(self.solver.residual_tol));
        put("solver.path_points", self.solver.path_points.to_string());
        put("solver.backtracking", fmt_f64(self.solver.backtracking));
        put("solver.seed", self.solver.seed.to_string());
        put(
            "thresholds.eps_policy",
            match self.eps_policy {
                EpsPolicyName::Symmetric => "symmetric",
                EpsPolicyName::Golden => "golden",
                EpsPolicyName::Fixed => "fixed",
            }
            .into(),
        );
        if let Some(e) = self.eps1 {
            put("thresholds.eps1", fmt_f64(e));
        }
        if let Some(e) = self.eps2 {
            put("thresholds.eps2", fmt_f64(e));
        }
        put("thresholds.sp_restarts", self.sp_restarts.to_string());
        put("thresholds.sphere_samples", self.sphere_samples.to_string());
        put("certify.s_max", fmt_f64(self.s_max));
        put("certify.n_samples", self.n_samples.to_string());
        put("gradcheck.probes", self.gradcheck_probes.to_string());
        put("gradcheck.amplitude", fmt_f64(self.gradcheck_amplitude));
        put("gradcheck.step", fmt_f64(self.gradcheck_step));
        put("output.dir", self.out_dir.clone());
        put("output.fields_csv", self.fields_csv.to_string());
        put("sweep.parameter", self.sweep_parameter.name().into());
        put("sweep.values", fmt_list(&self.sweep_values));
        out
    }

    /// SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.emit().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = "\
grid.dim = 2
grid.lower = 0, 0
grid.upper = 1, 1
grid.nodes = 9
problem.q = 1.5
problem.alpha = 1.75
problem.beta = 1.75
problem.lambda = auto
problem.mu = auto
phi1.family = 1
phi1.A = 2
phi2.family = 1
phi2.A = 2
weights.a = sin(2*pi*x1)
weights.b = 1+0.5*sin(2*pi*x1)
weights.c = cos(2*pi*x2)
weights.h1 = 1
weights.h2 = 1
";

    fn with(extra: &str) -> std::result::Result<RunConfig, ConfigError> {
        RunConfig::parse(&format!("{MINIMAL}{extra}"))
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = with("").unwrap();
        assert_eq!(c.nodes, vec![9, 9]);
        assert_eq!(c.solver, SolverOptions::default());
        assert_eq!(c.sweep_values, vec![0.25, 0.5, 0.75]);
        assert_eq!(c.line_of("problem.q"), 5);
        assert_eq!(c.line_of("solver.seed"), 0);
    }

    #[test]
    fn emit_is_idempotent() {
        let c = with("# comment\nsolver.seed = 7 # trailing\nsweep.values =\n").unwrap();
        let once = c.emit();
        let again = RunConfig::parse(&once).unwrap();
        assert_eq!(again.emit(), once);
        assert_eq!(again.hash(), c.hash());
        assert!(again.sweep_values.is_empty());
    }

    #[test]
    fn rejects_unknown_and_repeated_keys() {
        let e = with("solver.speed = 3\n").unwrap_err();
        assert_eq!(e.line, 19);
        assert!(e.message.contains("unknown key"));
        let e = with("problem.q = 1.2\n").unwrap_err();
        assert_eq!(e.line, 19);
        let e = with("no equals sign\n").unwrap_err();
        assert_eq!(e.line, 19);
    }

    #[test]
    fn invariants_are_line_anchored() {
        let e =
            RunConfig::parse(&MINIMAL.replace("problem.q = 1.5", "problem.q = 2.5")).unwrap_err();
        assert_eq!(e.line, 5);
        let e = RunConfig::parse(&MINIMAL.replace("problem.beta = 1.75", "problem.beta = 1"))
            .unwrap_err();
        assert_eq!(e.line, 7);
        let e = RunConfig::parse(
            &MINIMAL.replace("weights.c = cos(2*pi*x2)", "weights.c = cos(2*pi*)"),
        )
        .unwrap_err();
        assert_eq!(e.line, 16);
        assert!(e.message.contains("byte"), "{e}");
        let e = RunConfig::parse(&MINIMAL.replace("weights.c = cos(2*pi*x2)", "weights.c = x3"))
            .unwrap_err();
        assert_eq!(e.line, 16);
        let e =
            RunConfig::parse(&MINIMAL.replace("phi1.family = 1", "phi1.family = 99")).unwrap_err();
        assert_eq!(e.line, 10);
        let e =
            RunConfig::parse(&MINIMAL.replace("problem.mu = auto", "problem.mu = 1")).unwrap_err();
        assert_eq!(e.line, 9);
        let e = RunConfig::parse(&MINIMAL.replace("grid.nodes = 9", "grid.nodes = 2")).unwrap_err();
        assert_eq!(e.line, 4);
        let e = RunConfig::parse(&MINIMAL.replace("weights.h2 = 1\n", "")).unwrap_err();
        assert!(e.message.contains("weights.h2"));
    }

    #[test]
    fn dimension_three_caps_the_exponent() {
        let text = MINIMAL
            .replace("grid.dim = 2", "grid.dim = 3")
            .replace("grid.lower = 0, 0", "grid.lower = 0, 0, 0")
            .replace("grid.upper = 1, 1", "grid.upper = 1, 1, 1")
            .replace("problem.alpha = 1.75", "problem.alpha = 3.5")
            .replace("problem.beta = 1.75", "problem.beta = 3");
        assert_eq!(RunConfig::parse(&text).unwrap_err().line, 6);
    }
}
