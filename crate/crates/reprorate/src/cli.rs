//! Command-line front end: JSON configuration ingestion with strict
//! validation, scenario execution, and CSV/report emission.
//!
//! A scenario is described by one JSON document with a versioned top-level
//! field `"schema": 1` and a `"kind"` selecting the operation:
//!
//! | kind           | operation                                              |
//! |----------------|--------------------------------------------------------|
//! | `integrate`    | `∫ h d[−g]` over the integrator's own domain           |
//! | `ibp_check`    | integration-by-parts residual of the same integral      |
//! | `prop_suite`   | the seeded randomized property suite                    |
//! | `hm_check`     | the power-mean inequality at a list of exponents        |
//! | `reproduction` | net reproduction number `R(u)` of a population model    |
//! | `equilibrium`  | stationary-state solve `R(u_B) = 1`                     |
//! | `threshold`    | threshold classification of the extinct state           |
//!
//! The generic invocation is `run <config.json>`; every kind above is also a
//! subcommand of its own, an alias of `run` that additionally insists the
//! configuration's `kind` matches the invocation.
//!
//! Validation is strict: unknown keys are rejected (with a nearest-key
//! suggestion), physically meaningful fields (functions, rates, brackets)
//! have no silent defaults, and all validation errors are collected and
//! reported together. Tolerances in the `cfg` block do have defaults, which
//! are echoed into the summary so a run is fully described by its outputs.
//!
//! Each run writes `report.csv` (header row, 17-significant-digit scientific
//! rendering, LF line endings) and `summary.json` into the output directory.
//! Exit codes: 0 success, 1 property failure, 2 configuration or numerical
//! error. Identical (config, seed) pairs produce byte-identical reports.
//!
//! The environment variable `REPRORATE_SUITE_BIAS` (a float subtracted from
//! every suite margin) deterministically forces `prop_suite` failures; it
//! exists so the failure path can be exercised end to end and is not used in
//! normal operation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::grid_fn::{BVFn, Direction, GridFn, Interval, MonotoneFn};
use crate::monotone_props::{
    power_mean_check, run_property_suite, SuiteOptions, IBP_TOL,
};
use crate::population::{Density, EquilibriumOutcome, Model, SolverConfig, VitalRates};
use crate::stieltjes::{
    improper_stieltjes, integration_by_parts_residual, stieltjes_integral, QuadratureConfig,
};

/// Test hook: a float subtracted from every property-suite margin.
pub const SUITE_BIAS_ENV: &str = "REPRORATE_SUITE_BIAS";

// ---------------------------------------------------------------------------
// Configuration model
// ---------------------------------------------------------------------------

/// The scenario selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Integrate,
    IbpCheck,
    PropSuite,
    HmCheck,
    Reproduction,
    Equilibrium,
    Threshold,
}

impl ScenarioKind {
    const NAMES: [(&'static str, ScenarioKind); 7] = [
        ("integrate", ScenarioKind::Integrate),
        ("ibp_check", ScenarioKind::IbpCheck),
        ("prop_suite", ScenarioKind::PropSuite),
        ("hm_check", ScenarioKind::HmCheck),
        ("reproduction", ScenarioKind::Reproduction),
        ("equilibrium", ScenarioKind::Equilibrium),
        ("threshold", ScenarioKind::Threshold),
    ];

    fn parse(name: &str) -> Option<ScenarioKind> {
        Self::NAMES.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
    }

    fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, k)| *k == self).unwrap().0
    }
}

/// The merged tolerance block (`"cfg"` in the JSON document): quadrature
/// knobs and solver knobs side by side, every field defaulted.
#[derive(Debug, Clone, Serialize)]
pub struct CfgBlock {
    pub panel_points: usize,
    pub tail_tol: f64,
    pub max_domain: f64,
    pub model_points: usize,
    pub efoldings: f64,
    pub tol_r: f64,
    pub tol_inner: f64,
    pub tol_fix: f64,
    pub max_inner: usize,
    pub bracket_tol: f64,
    pub damping: f64,
}

impl Default for CfgBlock {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        let s = SolverConfig::default();
        CfgBlock {
            panel_points: q.panel_points,
            tail_tol: q.tail_tol,
            max_domain: q.max_domain,
            model_points: s.model_points,
            efoldings: s.efoldings,
            tol_r: s.tol_r,
            tol_inner: s.tol_inner,
            tol_fix: s.tol_fix,
            max_inner: s.max_inner,
            bracket_tol: s.bracket_tol,
            damping: s.damping,
        }
    }
}

impl CfgBlock {
    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            panel_points: self.panel_points,
            tail_tol: self.tail_tol,
            max_domain: self.max_domain,
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            model_points: self.model_points,
            efoldings: self.efoldings,
            max_domain: self.max_domain,
            tol_r: self.tol_r,
            tol_inner: self.tol_inner,
            tol_fix: self.tol_fix,
            max_inner: self.max_inner,
            bracket_tol: self.bracket_tol,
            damping: self.damping,
        }
    }
}

/// Kind-specific inputs, already validated and typed.
#[derive(Debug, Clone)]
pub enum Payload {
    Integrate { weight: GridFn, integrator: BVFn },
    Ibp { weight: MonotoneFn, integrator: BVFn },
    PropSuite { n_instances: usize },
    Hm { weight: MonotoneFn, integrator: BVFn, exponents: Vec<f64> },
    Reproduction { rates: VitalRates, density: Density },
    Equilibrium { rates: VitalRates, bracket: (f64, f64) },
    Threshold { rates: VitalRates },
}

/// A fully validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub output_path: PathBuf,
    pub cfg: CfgBlock,
    pub payload: Payload,
}

/// All the ways a configuration can be rejected; `details` lists every
/// violation found, each prefixed with the offending field path.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub message: String,
    pub details: Vec<String>,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)?;
        for d in &self.details {
            write!(f, "\n  - {d}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Validation walker
// ---------------------------------------------------------------------------

struct Walk {
    errors: Vec<String>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn nearest<'a>(key: &str, allowed: &[&'a str]) -> Option<&'a str> {
    allowed
        .iter()
        .map(|a| (strsim::levenshtein(key, a), *a))
        .filter(|(d, a)| *d <= 2.max(a.len() / 3))
        .min_by_key(|(d, _)| *d)
        .map(|(_, a)| a)
}

impl Walk {
    fn new() -> Self {
        Walk { errors: Vec::new() }
    }

    fn err(&mut self, path: &str, msg: impl std::fmt::Display) {
        if path.is_empty() {
            self.errors.push(msg.to_string());
        } else {
            self.errors.push(format!("{path}: {msg}"));
        }
    }

    /// Checks `v` is an object, rejects unknown keys (suggesting the nearest
    /// allowed one), and reports missing required keys. Returns the map when
    /// `v` is an object at all.
    fn object<'v>(
        &mut self,
        v: &'v Value,
        path: &str,
        allowed: &[&str],
        required: &[&str],
    ) -> Option<&'v Map<String, Value>> {
        let Some(map) = v.as_object() else {
            self.err(path, "expected an object");
            return None;
        };
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                match nearest(key, allowed) {
                    Some(s) => self.err(
                        path,
                        format!("unknown key \"{key}\" (did you mean \"{s}\"?)"),
                    ),
                    None => self.err(
                        path,
                        format!("unknown key \"{key}\" (allowed: {})", allowed.join(", ")),
                    ),
                }
            }
        }
        for key in required {
            if !map.contains_key(*key) {
                self.err(path, format!("missing required key \"{key}\""));
            }
        }
        Some(map)
    }

    fn finite(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            Some(x) => {
                self.err(path, format!("must be finite, got {x}"));
                None
            }
            None => {
                self.err(path, "expected a number");
                None
            }
        }
    }

    fn uint(&mut self, v: &Value, path: &str) -> Option<u64> {
        match v.as_u64() {
            Some(n) => Some(n),
            None => {
                self.err(path, "expected a non-negative integer");
                None
            }
        }
    }

    fn string<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v str> {
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.err(path, "expected a string");
                None
            }
        }
    }

    /// Structural pass over a function record; the typed deserialization
    /// afterwards enforces the semantic invariants.
    fn grid_fn_shape(&mut self, v: &Value, path: &str) {
        let Some(map) = self.object(v, path, &["grid", "values", "tail"], &["grid", "values"])
        else {
            return;
        };
        for key in ["grid", "values"] {
            if let Some(arr) = map.get(key) {
                match arr.as_array() {
                    Some(items) => {
                        for (i, item) in items.iter().enumerate() {
                            self.finite(item, &join(path, &format!("{key}[{i}]")));
                        }
                    }
                    None => self.err(&join(path, key), "expected an array of numbers"),
                }
            }
        }
        if let Some(tail) = map.get("tail") {
            if !tail.is_null() {
                self.tail_shape(tail, &join(path, "tail"));
            }
        }
    }

    fn tail_shape(&mut self, v: &Value, path: &str) {
        let Some(map) = self.object(v, path, &["kind", "limit", "rate"], &["kind"]) else {
            return;
        };
        let Some(kind) = map.get("kind").and_then(|k| k.as_str()) else {
            self.err(&join(path, "kind"), "expected \"constant\" or \"exp_decay\"");
            return;
        };
        match kind {
            "constant" => {
                if !map.contains_key("limit") {
                    self.err(path, "a constant tail needs \"limit\"");
                }
                if map.contains_key("rate") {
                    self.err(path, "a constant tail takes no \"rate\"");
                }
                if let Some(l) = map.get("limit") {
                    self.finite(l, &join(path, "limit"));
                }
            }
            "exp_decay" => {
                if !map.contains_key("rate") {
                    self.err(path, "an exp_decay tail needs \"rate\"");
                }
                for key in ["limit", "rate"] {
                    if let Some(x) = map.get(key) {
                        self.finite(x, &join(path, key));
                    }
                }
            }
            other => {
                let s = nearest(other, &["constant", "exp_decay"])
                    .map(|s| format!(" (did you mean \"{s}\"?)"))
                    .unwrap_or_default();
                self.err(
                    &join(path, "kind"),
                    format!("unknown tail kind \"{other}\"{s}"),
                );
            }
        }
    }

    fn rate_spec_shape(&mut self, v: &Value, path: &str) {
        let Some(map) = self.object(v, path, &["base", "modulation"], &["base"]) else {
            return;
        };
        if let Some(base) = map.get("base") {
            self.grid_fn_shape(base, &join(path, "base"));
        }
        if let Some(m) = map.get("modulation") {
            self.modulation_shape(m, &join(path, "modulation"));
        }
    }

    fn modulation_shape(&mut self, v: &Value, path: &str) {
        let Some(map) = self.object(v, path, &["kind", "response", "kernel", "c"], &["kind"])
        else {
            return;
        };
        let Some(kind) = map.get("kind").and_then(|k| k.as_str()) else {
            self.err(&join(path, "kind"), "expected \"none\" or \"scale\"");
            return;
        };
        match kind {
            "none" => {
                for key in ["response", "kernel", "c"] {
                    if map.contains_key(key) {
                        self.err(path, format!("modulation \"none\" takes no \"{key}\""));
                    }
                }
            }
            "scale" => {
                for key in ["response", "kernel", "c"] {
                    if !map.contains_key(key) {
                        self.err(path, format!("modulation \"scale\" needs \"{key}\""));
                    }
                }
                if let Some(r) = map.get("response") {
                    if let Some(name) = self.string(r, &join(path, "response")) {
                        let allowed = ["exp_decay", "hill", "linear_up"];
                        if !allowed.contains(&name) {
                            let s = nearest(name, &allowed)
                                .map(|s| format!(" (did you mean \"{s}\"?)"))
                                .unwrap_or_default();
                            self.err(
                                &join(path, "response"),
                                format!("unknown response \"{name}\"{s}"),
                            );
                        }
                    }
                }
                if let Some(k) = map.get("kernel") {
                    self.kernel_shape(k, &join(path, "kernel"));
                }
                if let Some(c) = map.get("c") {
                    if let Some(x) = self.finite(c, &join(path, "c")) {
                        if x < 0.0 {
                            self.err(&join(path, "c"), format!("must be ≥ 0, got {x}"));
                        }
                    }
                }
            }
            other => {
                let s = nearest(other, &["none", "scale"])
                    .map(|s| format!(" (did you mean \"{s}\"?)"))
                    .unwrap_or_default();
                self.err(
                    &join(path, "kind"),
                    format!("unknown modulation kind \"{other}\"{s}"),
                );
            }
        }
    }

    fn kernel_shape(&mut self, v: &Value, path: &str) {
        let Some(map) = self.object(v, path, &["kind", "width", "profile"], &["kind"]) else {
            return;
        };
        let Some(kind) = map.get("kind").and_then(|k| k.as_str()) else {
            self.err(
                &join(path, "kind"),
                "expected one of total, window, above, custom",
            );
            return;
        };
        match kind {
            "total" | "above" => {
                for key in ["width", "profile"] {
                    if map.contains_key(key) {
                        self.err(path, format!("kernel \"{kind}\" takes no \"{key}\""));
                    }
                }
            }
            "window" => {
                if map.contains_key("profile") {
                    self.err(path, "kernel \"window\" takes no \"profile\"");
                }
                match map.get("width") {
                    Some(w) => {
                        if let Some(x) = self.finite(w, &join(path, "width")) {
                            if x <= 0.0 {
                                self.err(&join(path, "width"), format!("must be > 0, got {x}"));
                            }
                        }
                    }
                    None => self.err(path, "kernel \"window\" needs \"width\""),
                }
            }
            "custom" => {
                if map.contains_key("width") {
                    self.err(path, "kernel \"custom\" takes no \"width\"");
                }
                match map.get("profile") {
                    Some(p) => self.grid_fn_shape(p, &join(path, "profile")),
                    None => self.err(path, "kernel \"custom\" needs \"profile\""),
                }
            }
            other => {
                let allowed = ["total", "window", "above", "custom"];
                let s = nearest(other, &allowed)
                    .map(|s| format!(" (did you mean \"{s}\"?)"))
                    .unwrap_or_default();
                self.err(
                    &join(path, "kind"),
                    format!("unknown kernel kind \"{other}\"{s}"),
                );
            }
        }
    }

    fn rates_shape(&mut self, v: &Value, path: &str) {
        let Some(map) = self.object(
            v,
            path,
            &["beta", "mu", "growth"],
            &["beta", "mu", "growth"],
        ) else {
            return;
        };
        for key in ["beta", "mu", "growth"] {
            if let Some(r) = map.get(key) {
                self.rate_spec_shape(r, &join(path, key));
            }
        }
    }

    /// Validates the merged tolerance block and materializes it; errors carry
    /// paths like `cfg.tail_tol`.
    fn cfg_block(&mut self, v: Option<&Value>, path: &str) -> CfgBlock {
        let mut cfg = CfgBlock::default();
        let Some(v) = v else { return cfg };
        let allowed = [
            "panel_points",
            "tail_tol",
            "max_domain",
            "model_points",
            "efoldings",
            "tol_r",
            "tol_inner",
            "tol_fix",
            "max_inner",
            "bracket_tol",
            "damping",
        ];
        let Some(map) = self.object(v, path, &allowed, &[]) else {
            return cfg;
        };
        if let Some(x) = map.get("panel_points") {
            if let Some(n) = self.uint(x, &join(path, "panel_points")) {
                if n < 2 {
                    self.err(&join(path, "panel_points"), "must be at least 2");
                } else {
                    cfg.panel_points = n as usize;
                }
            }
        }
        if let Some(x) = map.get("model_points") {
            if let Some(n) = self.uint(x, &join(path, "model_points")) {
                if n < 16 {
                    self.err(&join(path, "model_points"), "must be at least 16");
                } else {
                    cfg.model_points = n as usize;
                }
            }
        }
        if let Some(x) = map.get("max_inner") {
            if let Some(n) = self.uint(x, &join(path, "max_inner")) {
                if n == 0 {
                    self.err(&join(path, "max_inner"), "must be at least 1");
                } else {
                    cfg.max_inner = n as usize;
                }
            }
        }
        let positive = |walk: &mut Walk, key: &str, slot: &mut f64| {
            if let Some(x) = map.get(key) {
                if let Some(v) = walk.finite(x, &join(path, key)) {
                    if v <= 0.0 {
                        walk.err(&join(path, key), format!("must be positive, got {v}"));
                    } else {
                        *slot = v;
                    }
                }
            }
        };
        positive(self, "tail_tol", &mut cfg.tail_tol);
        positive(self, "max_domain", &mut cfg.max_domain);
        positive(self, "efoldings", &mut cfg.efoldings);
        positive(self, "tol_r", &mut cfg.tol_r);
        positive(self, "tol_inner", &mut cfg.tol_inner);
        positive(self, "tol_fix", &mut cfg.tol_fix);
        positive(self, "bracket_tol", &mut cfg.bracket_tol);
        if let Some(x) = map.get("damping") {
            if let Some(v) = self.finite(x, &join(path, "damping")) {
                if v > 0.0 && v <= 1.0 {
                    cfg.damping = v;
                } else {
                    self.err(&join(path, "damping"), format!("must lie in (0, 1], got {v}"));
                }
            }
        }
        cfg
    }
}

// ---------------------------------------------------------------------------
// Typed extraction
// ---------------------------------------------------------------------------

fn take_grid_fn(walk: &mut Walk, v: &Value, path: &str) -> Option<GridFn> {
    let before = walk.errors.len();
    walk.grid_fn_shape(v, path);
    if walk.errors.len() > before {
        return None;
    }
    match serde_json::from_value::<GridFn>(v.clone()) {
        Ok(f) => Some(f),
        Err(e) => {
            walk.err(path, e);
            None
        }
    }
}

/// A weight must be monotone; its direction is inferred from the sampled
/// increments rather than declared.
fn take_monotone(walk: &mut Walk, v: &Value, path: &str) -> Option<MonotoneFn> {
    let f = take_grid_fn(walk, v, path)?;
    let class = f.classify_monotone(crate::grid_fn::STRICT_TOL);
    let direction = match class {
        Some(c) if c.admits(Direction::NonDecreasing) => Direction::NonDecreasing,
        Some(_) => Direction::NonIncreasing,
        None => {
            walk.err(path, "weight must be monotone (its sampled increments change sign)");
            return None;
        }
    };
    match MonotoneFn::new(f, direction) {
        Ok(m) => Some(m),
        Err(e) => {
            walk.err(path, e);
            None
        }
    }
}

fn take_rates(walk: &mut Walk, v: &Value, path: &str) -> Option<VitalRates> {
    let before = walk.errors.len();
    walk.rates_shape(v, path);
    if walk.errors.len() > before {
        return None;
    }
    match serde_json::from_value::<VitalRates>(v.clone()) {
        Ok(r) => Some(r),
        Err(e) => {
            walk.err(path, e);
            None
        }
    }
}

fn take_density(walk: &mut Walk, v: &Value, path: &str) -> Option<Density> {
    let before = walk.errors.len();
    walk.grid_fn_shape(v, path);
    if walk.errors.len() > before {
        return None;
    }
    match serde_json::from_value::<Density>(v.clone()) {
        Ok(d) => Some(d),
        Err(e) => {
            walk.err(path, e);
            None
        }
    }
}

// ---------------------------------------------------------------------------
// load_config
// ---------------------------------------------------------------------------

/// Parses and validates a configuration document, returning either a typed
/// scenario or every violation found.
pub fn load_config_str(text: &str) -> std::result::Result<Scenario, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError {
        message: format!(
            "configuration is not valid JSON (line {}, column {})",
            e.line(),
            e.column()
        ),
        details: vec![e.to_string()],
    })?;
    let mut walk = Walk::new();

    let top = value.as_object().ok_or_else(|| ConfigError {
        message: "configuration must be a JSON object".into(),
        details: vec![],
    })?;

    // Schema version and kind come first; the allowed key set depends on the
    // kind, so a bad kind short-circuits.
    match top.get("schema") {
        Some(v) if v.as_u64() == Some(1) => {}
        Some(v) => walk.err("schema", format!("unsupported version {v}; this tool reads schema 1")),
        None => walk.err("", "missing required key \"schema\" (expected 1)"),
    }
    let kind = match top.get("kind") {
        Some(Value::String(s)) => match ScenarioKind::parse(s) {
            Some(k) => Some(k),
            None => {
                let names: Vec<&str> = ScenarioKind::NAMES.iter().map(|(n, _)| *n).collect();
                let hint = nearest(s, &names)
                    .map(|n| format!(" (did you mean \"{n}\"?)"))
                    .unwrap_or_default();
                walk.err("kind", format!("unknown scenario kind \"{s}\"{hint}"));
                None
            }
        },
        Some(_) => {
            walk.err("kind", "expected a string");
            None
        }
        None => {
            walk.err("", "missing required key \"kind\"");
            None
        }
    };

    let Some(kind) = kind else {
        return Err(ConfigError {
            message: "invalid configuration".into(),
            details: walk.errors,
        });
    };

    let common = ["schema", "kind", "seed", "output_path", "cfg"];
    let (specific, required): (&[&str], &[&str]) = match kind {
        ScenarioKind::Integrate | ScenarioKind::IbpCheck => {
            (&["weight", "integrator"], &["weight", "integrator"])
        }
        ScenarioKind::PropSuite => (&["n_instances"], &["n_instances"]),
        ScenarioKind::HmCheck => (
            &["weight", "integrator", "exponents"],
            &["weight", "integrator", "exponents"],
        ),
        ScenarioKind::Reproduction => (&["rates", "density"], &["rates"]),
        ScenarioKind::Equilibrium => (&["rates", "bracket"], &["rates", "bracket"]),
        ScenarioKind::Threshold => (&["rates"], &["rates"]),
    };
    let allowed: Vec<&str> = common.iter().chain(specific.iter()).copied().collect();
    walk.object(&value, "", &allowed, required);

    let seed = match top.get("seed") {
        Some(v) => walk.uint(v, "seed").unwrap_or(0),
        None => 0,
    };
    let output_path = match top.get("output_path") {
        Some(v) => PathBuf::from(walk.string(v, "output_path").unwrap_or("out")),
        None => PathBuf::from("out"),
    };
    let cfg = walk.cfg_block(top.get("cfg"), "cfg");

    let payload = match kind {
        ScenarioKind::Integrate => {
            let weight = top.get("weight").and_then(|v| take_grid_fn(&mut walk, v, "weight"));
            let integrator = top
                .get("integrator")
                .and_then(|v| take_grid_fn(&mut walk, v, "integrator"));
            match (weight, integrator) {
                (Some(w), Some(g)) => Some(Payload::Integrate {
                    weight: w,
                    integrator: BVFn::new(g),
                }),
                _ => None,
            }
        }
        ScenarioKind::IbpCheck => {
            let weight = top.get("weight").and_then(|v| take_monotone(&mut walk, v, "weight"));
            let integrator = top
                .get("integrator")
                .and_then(|v| take_grid_fn(&mut walk, v, "integrator"));
            match (weight, integrator) {
                (Some(w), Some(g)) => Some(Payload::Ibp {
                    weight: w,
                    integrator: BVFn::new(g),
                }),
                _ => None,
            }
        }
        ScenarioKind::PropSuite => top.get("n_instances").and_then(|v| {
            let n = walk.uint(v, "n_instances")?;
            if n == 0 {
                walk.err("n_instances", "must be at least 1");
                return None;
            }
            Some(Payload::PropSuite { n_instances: n as usize })
        }),
        ScenarioKind::HmCheck => {
            let weight = top.get("weight").and_then(|v| take_monotone(&mut walk, v, "weight"));
            if let Some(w) = &weight {
                if !w.direction().is_upward() {
                    walk.err("weight", "the power-mean weight must be non-decreasing");
                }
            }
            let integrator = top
                .get("integrator")
                .and_then(|v| take_grid_fn(&mut walk, v, "integrator"));
            let exponents = top.get("exponents").and_then(|v| match v.as_array() {
                Some(items) if !items.is_empty() => {
                    let mut out = Vec::with_capacity(items.len());
                    for (i, item) in items.iter().enumerate() {
                        if let Some(p) = walk.finite(item, &format!("exponents[{i}]")) {
                            if p > 0.0 {
                                out.push(p);
                            } else {
                                walk.err(
                                    &format!("exponents[{i}]"),
                                    format!("must be positive, got {p}"),
                                );
                            }
                        }
                    }
                    (out.len() == items.len()).then_some(out)
                }
                Some(_) => {
                    walk.err("exponents", "must be a non-empty array of positive numbers");
                    None
                }
                None => {
                    walk.err("exponents", "expected an array of numbers");
                    None
                }
            });
            match (weight, integrator, exponents) {
                (Some(w), Some(g), Some(e)) if w.direction().is_upward() => Some(Payload::Hm {
                    weight: w,
                    integrator: BVFn::new(g),
                    exponents: e,
                }),
                _ => None,
            }
        }
        ScenarioKind::Reproduction => {
            let rates = top.get("rates").and_then(|v| take_rates(&mut walk, v, "rates"));
            let density = match top.get("density") {
                Some(v) => take_density(&mut walk, v, "density"),
                None => Some(Density::zero()),
            };
            match (rates, density) {
                (Some(r), Some(d)) => Some(Payload::Reproduction { rates: r, density: d }),
                _ => None,
            }
        }
        ScenarioKind::Equilibrium => {
            let rates = top.get("rates").and_then(|v| take_rates(&mut walk, v, "rates"));
            let bracket = top.get("bracket").and_then(|v| match v.as_array() {
                Some(items) if items.len() == 2 => {
                    let lo = walk.finite(&items[0], "bracket[0]")?;
                    let hi = walk.finite(&items[1], "bracket[1]")?;
                    if !(0.0 < lo && lo < hi) {
                        walk.err("bracket", format!("must satisfy 0 < low < high, got [{lo}, {hi}]"));
                        return None;
                    }
                    Some((lo, hi))
                }
                _ => {
                    walk.err("bracket", "expected an array of exactly two numbers");
                    None
                }
            });
            match (rates, bracket) {
                (Some(r), Some(b)) => Some(Payload::Equilibrium { rates: r, bracket: b }),
                _ => None,
            }
        }
        ScenarioKind::Threshold => top
            .get("rates")
            .and_then(|v| take_rates(&mut walk, v, "rates"))
            .map(|r| Payload::Threshold { rates: r }),
    };

    match payload {
        Some(payload) if walk.errors.is_empty() => Ok(Scenario {
            kind,
            seed,
            output_path,
            cfg,
            payload,
        }),
        _ => Err(ConfigError {
            message: "invalid configuration".into(),
            details: walk.errors,
        }),
    }
}

/// [`load_config_str`] applied to a file.
pub fn load_config(path: &Path) -> std::result::Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        message: format!("cannot read {}: {e}", path.display()),
        details: vec![],
    })?;
    load_config_str(&text)
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// 17-significant-digit scientific rendering — the CSV number format.
fn csv_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Outcome of a scenario run: report text, summary document, pass flag.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub summary: Value,
    pub pass: bool,
}

/// Executes a validated scenario. Numerical failures (domain violations,
/// non-convergence, unreachable truncation targets) surface as `Err`;
/// property failures are reported through `pass = false`.
pub fn execute(sc: &Scenario) -> Result<RunOutput> {
    let quad = sc.cfg.quadrature();
    let solver = sc.cfg.solver();
    let (csv, outcome, pass) = match &sc.payload {
        Payload::Integrate { weight, integrator } => {
            let iv = integrator.interval();
            let r = if iv.is_finite() {
                stieltjes_integral(weight, integrator, iv, &quad)?
            } else {
                improper_stieltjes(weight, integrator, iv.a, &quad)?
            };
            let mut csv = String::from("value,truncation_point,est_tail_error\n");
            let _ = writeln!(
                csv,
                "{},{},{}",
                csv_num(r.value),
                r.truncation_point.map(csv_num).unwrap_or_default(),
                csv_num(r.est_tail_error)
            );
            let outcome = json!({
                "value": r.value,
                "truncation_point": r.truncation_point,
                "est_tail_error": r.est_tail_error,
            });
            (csv, outcome, true)
        }
        Payload::Ibp { weight, integrator } => {
            let iv = integrator.interval();
            let r = integration_by_parts_residual(weight, integrator, iv, &quad)?;
            let allowed = if iv.is_finite() { IBP_TOL } else { 10.0 * quad.tail_tol };
            let pass = r.residual <= allowed;
            let mut csv = String::from("lhs,rhs,residual,allowed,pass\n");
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                csv_num(r.lhs),
                csv_num(r.rhs),
                csv_num(r.residual),
                csv_num(allowed),
                pass
            );
            let outcome = json!({
                "lhs": r.lhs,
                "rhs": r.rhs,
                "residual": r.residual,
                "allowed": allowed,
            });
            (csv, outcome, pass)
        }
        Payload::PropSuite { n_instances } => {
            let opts = suite_options_from_env()?;
            let report = run_property_suite(*n_instances, sc.seed, &quad, &opts)?;
            let mut csv = String::from("instance_id,property,family,margin,pass\n");
            for row in &report.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    row.index,
                    row.property,
                    row.family,
                    csv_num(row.margin),
                    row.pass
                );
            }
            let worst = report
                .rows
                .iter()
                .min_by(|a, b| a.margin.total_cmp(&b.margin))
                .map(|r| json!({ "property": r.property, "index": r.index, "margin": r.margin }));
            let outcome = json!({
                "n_instances": n_instances,
                "n_pass": report.n_pass,
                "n_fail": report.n_fail,
                "worst_margin": worst,
                "margin_bias": opts.margin_bias,
            });
            (csv, outcome, report.all_pass)
        }
        Payload::Hm { weight, integrator, exponents } => {
            let mut csv = String::from("p,lhs,inner,rhs,rhs_alt,margin,holds,reversed\n");
            let mut rows = Vec::new();
            let mut pass = true;
            for &p in exponents {
                let r = power_mean_check(weight, integrator, p, &quad)?;
                pass &= r.holds;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    csv_num(r.p),
                    csv_num(r.lhs),
                    csv_num(r.inner),
                    csv_num(r.rhs),
                    csv_num(r.rhs_alt),
                    csv_num(r.margin),
                    r.holds,
                    r.reversed
                );
                rows.push(serde_json::to_value(r).expect("report serializes"));
            }
            (csv, json!({ "reports": rows }), pass)
        }
        Payload::Reproduction { rates, density } => {
            let model = Model::new(rates.clone());
            let r = model.net_reproduction(density, &solver)?;
            let mut csv = String::from("quantity,value\n");
            let _ = writeln!(csv, "r,{}", csv_num(r));
            let _ = writeln!(csv, "density_total,{}", csv_num(density.total()));
            let outcome = json!({ "r": r, "density_total": density.total() });
            (csv, outcome, true)
        }
        Payload::Equilibrium { rates, bracket } => {
            let model = Model::new(rates.clone());
            match model.solve_equilibrium(&solver, *bracket)? {
                EquilibriumOutcome::Converged(sol) => {
                    let survival = model.survival_function(&sol.u_star, &solver)?;
                    let mut csv = String::from("x,u_star,survival\n");
                    let base = sol.u_star.base();
                    for (&x, &u) in base.grid().iter().zip(base.values()) {
                        let _ = writeln!(
                            csv,
                            "{},{},{}",
                            csv_num(x),
                            csv_num(u),
                            csv_num(survival.eval(x)?)
                        );
                    }
                    let outcome = json!({
                        "outcome": "converged",
                        "b_star": sol.b_star,
                        "r_at_star": sol.r_at_star,
                        "residual": sol.residual,
                        "outer_iterations": sol.outer_iterations,
                        "inner_iterations": sol.inner_iterations,
                        "density_total": sol.u_star.total(),
                        "converged": sol.converged,
                    });
                    (csv, outcome, sol.converged)
                }
                EquilibriumOutcome::NoCrossing { r_low, r_high } => {
                    let csv = String::from("x,u_star,survival\n");
                    let outcome = json!({
                        "outcome": "no_crossing",
                        "r_low": r_low,
                        "r_high": r_high,
                    });
                    (csv, outcome, true)
                }
            }
        }
        Payload::Threshold { rates } => {
            let model = Model::new(rates.clone());
            let rep = model.threshold_report(&solver)?;
            let mut csv = String::from("quantity,value\n");
            let _ = writeln!(csv, "r_zero,{}", csv_num(rep.r_zero));
            let conclusion = serde_json::to_value(rep.conclusion).expect("serializes");
            let _ = writeln!(csv, "conclusion,{}", conclusion.as_str().unwrap());
            let _ = writeln!(csv, "monotone_mode,{}", rep.monotone_mode);
            let outcome = serde_json::to_value(&rep).expect("report serializes");
            (csv, outcome, true)
        }
    };

    let summary = json!({
        "schema": 1,
        "kind": sc.kind.name(),
        "seed": sc.seed,
        "cfg": serde_json::to_value(&sc.cfg).expect("cfg serializes"),
        "outcome": outcome,
        "pass": pass,
    });
    Ok(RunOutput { csv, summary, pass })
}

fn suite_options_from_env() -> Result<SuiteOptions> {
    match std::env::var(SUITE_BIAS_ENV) {
        Ok(text) => {
            let bias: f64 = text.parse().map_err(|_| {
                Error::InvalidConfig(format!("{SUITE_BIAS_ENV} must be a float, got {text:?}"))
            })?;
            if !bias.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{SUITE_BIAS_ENV} must be finite, got {bias}"
                )));
            }
            Ok(SuiteOptions { margin_bias: bias })
        }
        Err(std::env::VarError::NotPresent) => Ok(SuiteOptions::default()),
        Err(e) => Err(Error::InvalidConfig(format!("{SUITE_BIAS_ENV}: {e}"))),
    }
}

/// Runs a scenario end to end: executes it and writes `report.csv` and
/// `summary.json` into the output directory.
pub fn run_to_files(
    sc: &Scenario,
    out_dir: &Path,
) -> Result<(RunOutput, PathBuf, PathBuf)> {
    let out = execute(sc)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::InvalidConfig(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join("report.csv");
    let summary_path = out_dir.join("summary.json");
    let mut summary_text =
        serde_json::to_string_pretty(&out.summary).expect("summary serializes");
    summary_text.push('\n');
    std::fs::write(&csv_path, &out.csv)
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", csv_path.display())))?;
    std::fs::write(&summary_path, summary_text)
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", summary_path.display())))?;
    Ok((out, csv_path, summary_path))
}

// ---------------------------------------------------------------------------
// Schema dump
// ---------------------------------------------------------------------------

/// A human- and machine-readable description of the configuration format.
pub fn schema_document() -> Value {
    json!({
        "schema_version": 1,
        "document": {
            "schema": "integer, required: must be 1",
            "kind": "string, required: one of integrate | ibp_check | prop_suite | hm_check | reproduction | equilibrium | threshold",
            "seed": "non-negative integer, optional (default 0): seed for randomized suites; echoed in the summary",
            "output_path": "string, optional (default \"out\"): directory receiving report.csv and summary.json; --out overrides",
            "cfg": "object, optional: tolerance block; every field defaulted and echoed in the summary"
        },
        "cfg": {
            "panel_points": "integer ≥ 2 (default 16): refinement nodes per segment for derived functions",
            "tail_tol": "positive float (default 1e-9): improper-integral truncation tolerance",
            "max_domain": "positive float (default 1e6): hard cap on truncation points and model windows",
            "model_points": "integer ≥ 16 (default 40000): nodes of the population model grid",
            "efoldings": "positive float (default 50): hazard e-foldings the model window must contain",
            "tol_r": "positive float (default 1e-6): acceptance band around 1 for the reproduction number",
            "tol_inner": "positive float (default 1e-8): L1 stopping change of the inner fixed point",
            "tol_fix": "positive float (default 1e-6): acceptance level for the stationary residual",
            "max_inner": "integer ≥ 1 (default 500): inner fixed-point iteration budget",
            "bracket_tol": "positive float (default 1e-8): outer bisection bracket width",
            "damping": "float in (0,1] (default 0.5): inner fixed-point damping factor"
        },
        "kinds": {
            "integrate": {
                "weight": "grid_fn, required: the integrand h",
                "integrator": "grid_fn, required: the integrator g; its own domain decides bounded vs improper",
                "computes": "∫ h d[−g] with truncation diagnostics"
            },
            "ibp_check": {
                "weight": "grid_fn, required: monotone weight h (direction inferred)",
                "integrator": "grid_fn, required: bounded-variation integrator g",
                "computes": "both sides of ∫ h d[−g] = h(a)g(a) − h(b)g(b) + ∫ g dh; pass = residual within tolerance"
            },
            "prop_suite": {
                "n_instances": "integer ≥ 1, required: instances per property",
                "computes": "seeded randomized property suite; pass = all instances pass"
            },
            "hm_check": {
                "weight": "grid_fn, required: non-decreasing weight h",
                "integrator": "grid_fn, required: non-negative, non-increasing integrator g vanishing at the right end",
                "exponents": "non-empty array of positive floats, required",
                "computes": "power-mean inequality at each exponent; pass = every direction-appropriate inequality holds"
            },
            "reproduction": {
                "rates": "rates, required",
                "density": "grid_fn, optional (default: the zero density): u in R(u)",
                "computes": "net reproduction number R(u)"
            },
            "equilibrium": {
                "rates": "rates, required",
                "bracket": "array [low, high] with 0 < low < high, required: newborn-flux bisection bracket",
                "computes": "stationary state with R(u_B) = 1, or a no-crossing report; CSV columns x, u_star, survival"
            },
            "threshold": {
                "rates": "rates, required",
                "computes": "R(0) and the threshold classification of the extinct state"
            }
        },
        "records": {
            "grid_fn": {
                "grid": "strictly increasing array of finite floats (≥ 2 entries)",
                "values": "array of finite floats, same length as grid",
                "tail": "null for a bounded domain, or one of the tail records for [last node, ∞)"
            },
            "tail": {
                "constant": { "kind": "\"constant\"", "limit": "float equal to the last grid value" },
                "exp_decay": { "kind": "\"exp_decay\"", "limit": "float (default 0): value at infinity", "rate": "positive float" }
            },
            "rates": {
                "beta": "rate_spec, required: birth rate (non-negative profile)",
                "mu": "rate_spec, required: loss rate (strictly positive profile)",
                "growth": "rate_spec, required: growth speed (strictly positive profile)",
                "note": "every rate profile must start at 0 and declare a tail"
            },
            "rate_spec": {
                "base": "grid_fn, required: the state profile of the rate",
                "modulation": "modulation, optional (default none)"
            },
            "modulation": {
                "none": { "kind": "\"none\"" },
                "scale": {
                    "kind": "\"scale\"",
                    "response": "\"exp_decay\" (e^{−cE}) | \"hill\" (1/(1+cE)) | \"linear_up\" (1+cE)",
                    "kernel": "kernel record",
                    "c": "float ≥ 0: sensitivity"
                }
            },
            "kernel": {
                "total": { "kind": "\"total\"" },
                "window": { "kind": "\"window\"", "width": "positive float" },
                "above": { "kind": "\"above\"" },
                "custom": { "kind": "\"custom\"", "profile": "grid_fn starting at 0, non-negative offset weight" }
            }
        },
        "outputs": {
            "report.csv": "header row; 17-significant-digit scientific floats; LF line endings; byte-identical for identical (config, seed)",
            "summary.json": "echoes schema, kind, seed, the effective cfg block, the outcome record, and the pass flag"
        },
        "exit_codes": { "0": "success", "1": "property failure", "2": "configuration or numerical error" },
        "environment": {
            "REPRORATE_SUITE_BIAS": "optional float subtracted from every prop_suite margin; a deterministic failure-path test hook"
        }
    })
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "reprorate",
    version,
    about = "Stieltjes functionals, monotonicity property suites, and structured-population reproduction numbers",
    disable_help_subcommand = true
)]
struct Cli {
    /// Print the configuration schema and exit.
    #[arg(long)]
    print_schema: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to the configuration document.
    config: PathBuf,
    /// Output directory (overrides the config's output_path).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override (overrides the config's seed).
    #[arg(long)]
    seed: Option<u64>,
}

/// `run` executes whatever the configuration describes; each scenario kind is
/// also a subcommand of its own — an alias of `run` that additionally insists
/// the configuration's `kind` matches the invocation.
#[derive(Subcommand)]
enum Command {
    /// Execute the scenario described by a JSON configuration file.
    Run(RunArgs),
    /// Print the configuration schema.
    PrintSchema,
    /// `run`, requiring an integrate configuration.
    Integrate(RunArgs),
    /// `run`, requiring an ibp_check configuration.
    #[command(name = "ibp_check")]
    IbpCheck(RunArgs),
    /// `run`, requiring a prop_suite configuration.
    #[command(name = "prop_suite")]
    PropSuite(RunArgs),
    /// `run`, requiring an hm_check configuration.
    #[command(name = "hm_check")]
    HmCheck(RunArgs),
    /// `run`, requiring a reproduction configuration.
    Reproduction(RunArgs),
    /// `run`, requiring an equilibrium configuration.
    Equilibrium(RunArgs),
    /// `run`, requiring a threshold configuration.
    Threshold(RunArgs),
}

fn error_record(kind: &str, message: String, details: Vec<String>) -> String {
    serde_json::to_string(&json!({
        "error": { "kind": kind, "message": message, "details": details }
    }))
    .expect("error record serializes")
}

/// The binary's whole behaviour; returns the process exit code.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_schema {
        println!(
            "{}",
            serde_json::to_string_pretty(&schema_document()).expect("schema serializes")
        );
        return ExitCode::SUCCESS;
    }
    let (args, expected) = match cli.command {
        None => {
            eprintln!(
                "{}",
                error_record(
                    "usage",
                    "no subcommand; use `run <config.json>`, a scenario-kind subcommand, or `print-schema`"
                        .into(),
                    vec![]
                )
            );
            return ExitCode::from(2);
        }
        Some(Command::PrintSchema) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&schema_document()).expect("schema serializes")
            );
            return ExitCode::SUCCESS;
        }
        Some(Command::Run(args)) => (args, None),
        Some(Command::Integrate(args)) => (args, Some(ScenarioKind::Integrate)),
        Some(Command::IbpCheck(args)) => (args, Some(ScenarioKind::IbpCheck)),
        Some(Command::PropSuite(args)) => (args, Some(ScenarioKind::PropSuite)),
        Some(Command::HmCheck(args)) => (args, Some(ScenarioKind::HmCheck)),
        Some(Command::Reproduction(args)) => (args, Some(ScenarioKind::Reproduction)),
        Some(Command::Equilibrium(args)) => (args, Some(ScenarioKind::Equilibrium)),
        Some(Command::Threshold(args)) => (args, Some(ScenarioKind::Threshold)),
    };
    let mut sc = match load_config(&args.config) {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("{}", error_record("config", e.message, e.details));
            return ExitCode::from(2);
        }
    };
    if let Some(expected) = expected {
        if sc.kind != expected {
            eprintln!(
                "{}",
                error_record(
                    "usage",
                    format!(
                        "subcommand \"{}\" cannot run a \"{}\" configuration; use `run` or the matching subcommand",
                        expected.name(),
                        sc.kind.name()
                    ),
                    vec![]
                )
            );
            return ExitCode::from(2);
        }
    }
    if let Some(seed) = args.seed {
        sc.seed = seed;
    }
    let out_dir = args.out.unwrap_or_else(|| sc.output_path.clone());
    match run_to_files(&sc, &out_dir) {
        Ok((run, csv_path, summary_path)) => {
            println!(
                "wrote {} and {} (pass: {})",
                csv_path.display(),
                summary_path.display(),
                run.pass
            );
            if run.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", error_record("numerical", e.to_string(), vec![]));
            ExitCode::from(2)
        }
    }
}

// `Interval` appears in doc positions only; silence the unused import lint
// without losing the explicit dependency.
#[allow(unused)]
fn _interval_witness(iv: Interval) -> f64 {
    iv.a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_json(kind: &str) -> Value {
        match kind {
            "ramp" => json!({ "grid": [0.0, 1.0], "values": [0.0, 1.0], "tail": null }),
            "decay" => json!({
                "grid": [0.0, 1.0],
                "values": [1.0, 1.0],
                "tail": { "kind": "exp_decay", "limit": 0.0, "rate": 1.0 }
            }),
            _ => unreachable!(),
        }
    }

    fn constant_rate(level: f64) -> Value {
        json!({
            "base": {
                "grid": [0.0, 1.0],
                "values": [level, level],
                "tail": { "kind": "constant", "limit": level }
            }
        })
    }

    #[test]
    fn minimal_integrate_config_parses() {
        let cfg = json!({
            "schema": 1,
            "kind": "integrate",
            "weight": grid_json("ramp"),
            "integrator": json!({ "grid": [0.0, 1.0], "values": [1.0, 0.0], "tail": null }),
        });
        let sc = load_config_str(&cfg.to_string()).unwrap();
        assert_eq!(sc.kind, ScenarioKind::Integrate);
        assert_eq!(sc.seed, 0);
        assert_eq!(sc.cfg.tail_tol, QuadratureConfig::default().tail_tol);
    }

    #[test]
    fn negative_tail_tol_is_named_in_the_error() {
        let cfg = json!({
            "schema": 1,
            "kind": "prop_suite",
            "n_instances": 5,
            "cfg": { "tail_tol": -1e-9 },
        });
        let err = load_config_str(&cfg.to_string()).unwrap_err();
        assert!(
            err.details.iter().any(|d| d.starts_with("cfg.tail_tol")),
            "details: {:?}",
            err.details
        );
    }

    #[test]
    fn unknown_key_suggests_the_nearest_field() {
        let cfg = json!({
            "schema": 1,
            "kind": "threshold",
            "rates": {
                "betta": constant_rate(2.0),
                "mu": constant_rate(1.0),
                "growth": constant_rate(1.0),
            },
        });
        let err = load_config_str(&cfg.to_string()).unwrap_err();
        let text = err.details.join("\n");
        assert!(text.contains("betta"), "details: {text}");
        assert!(text.contains("did you mean \"beta\"?"), "details: {text}");
        // And the missing required key is reported too — all errors at once.
        assert!(text.contains("missing required key \"beta\""), "details: {text}");
    }

    #[test]
    fn all_errors_are_collected_not_just_the_first() {
        let cfg = json!({
            "schema": 1,
            "kind": "equilibrium",
            "rates": {
                "beta": constant_rate(2.0),
                "mu": constant_rate(1.0),
                "growth": constant_rate(1.0),
            },
            "bracket": [2.0, 1.0],
            "cfg": { "damping": 0.0, "tol_r": -1.0 },
        });
        let err = load_config_str(&cfg.to_string()).unwrap_err();
        let text = err.details.join("\n");
        assert!(text.contains("bracket"), "details: {text}");
        assert!(text.contains("cfg.damping"), "details: {text}");
        assert!(text.contains("cfg.tol_r"), "details: {text}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = load_config_str("{ not json").unwrap_err();
        assert!(err.message.contains("line 1"), "message: {}", err.message);
    }

    #[test]
    fn unknown_kind_is_suggested() {
        let cfg = json!({ "schema": 1, "kind": "equilibrum" });
        let err = load_config_str(&cfg.to_string()).unwrap_err();
        let text = err.details.join("\n");
        assert!(text.contains("did you mean \"equilibrium\"?"), "details: {text}");
    }

    #[test]
    fn schema_version_is_enforced() {
        let cfg = json!({ "schema": 2, "kind": "threshold", "rates": {
            "beta": constant_rate(2.0), "mu": constant_rate(1.0), "growth": constant_rate(1.0) } });
        let err = load_config_str(&cfg.to_string()).unwrap_err();
        assert!(err.details.iter().any(|d| d.contains("schema")), "{:?}", err.details);
    }

    #[test]
    fn reproduction_scenario_runs_and_reports_r() {
        let cfg = json!({
            "schema": 1,
            "kind": "reproduction",
            "rates": {
                "beta": constant_rate(2.0),
                "mu": constant_rate(1.0),
                "growth": constant_rate(1.0),
            },
        });
        let sc = load_config_str(&cfg.to_string()).unwrap();
        let out = execute(&sc).unwrap();
        assert!(out.pass);
        let r = out.summary["outcome"]["r"].as_f64().unwrap();
        assert!((r - 2.0).abs() < 1e-6, "R(0) = {r}");
        assert!(out.csv.starts_with("quantity,value\n"));
        assert!(!out.csv.contains('\r'));
    }

    #[test]
    fn csv_numbers_use_seventeen_significant_digits() {
        assert_eq!(csv_num(1.0), "1.0000000000000000e0");
        assert_eq!(csv_num(-0.5), "-5.0000000000000000e-1");
    }

    #[test]
    fn schema_document_mentions_every_kind() {
        let doc = schema_document();
        let kinds = doc["kinds"].as_object().unwrap();
        for (name, _) in ScenarioKind::NAMES {
            assert!(kinds.contains_key(name), "schema misses {name}");
        }
    }
}
