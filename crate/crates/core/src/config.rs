//! Experiment configuration in a line-oriented `key = value` format.
//!
//! Keys are dotted (`mesh.cells = 512`); a `[mesh]` header prefixes the keys
//! that follow it. `#` starts a comment. Unknown or repeated keys are errors.
//!
//! ```text
//! scenario = elliptic
//! [params]
//! s = 0.25
//! lambda = 0.5*Lambda
//! [data]
//! f = powx:0.3
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::{hardy_constant, HardyParams};
use crate::data::DataSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Constants,
    HardyCheck,
    Elliptic,
    BlowupSweep,
    BoundaryRate,
    Parabolic,
    Stabilize,
    Contraction,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Constants,
        Scenario::HardyCheck,
        Scenario::Elliptic,
        Scenario::BlowupSweep,
        Scenario::BoundaryRate,
        Scenario::Parabolic,
        Scenario::Stabilize,
        Scenario::Contraction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Constants => "constants",
            Scenario::HardyCheck => "hardy-check",
            Scenario::Elliptic => "elliptic",
            Scenario::BlowupSweep => "blowup-sweep",
            Scenario::BoundaryRate => "boundary-rate",
            Scenario::Parabolic => "parabolic",
            Scenario::Stabilize => "stabilize",
            Scenario::Contraction => "contraction",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Coupling given either literally or as a multiple of the Hardy constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaSpec {
    Absolute(f64),
    Fraction(f64),
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaSpec::Absolute(v) => write!(f, "{v:?}"),
            LambdaSpec::Fraction(v) => write!(f, "{v:?}*Lambda"),
        }
    }
}

impl FromStr for LambdaSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "Lambda" {
            return Ok(LambdaSpec::Fraction(1.0));
        }
        if let Some(head) = s.strip_suffix("Lambda") {
            let head = head.trim_end();
            let head = head
                .strip_suffix('*')
                .ok_or_else(|| format!("expected `<number>*Lambda`, got `{s}`"))?;
            return parse_f64(head.trim()).map(LambdaSpec::Fraction);
        }
        parse_f64(s).map(LambdaSpec::Absolute)
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| format!("bad list item `{}`", p.trim()))
        })
        .collect()
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let v: Vec<f64> = parse_list::<f64>(s)?;
    match v.as_slice() {
        [a, b] if a.is_finite() && b.is_finite() => Ok((*a, *b)),
        _ => Err(format!("expected `lo, hi`, got `{s}`")),
    }
}

fn join<T: fmt::Debug>(v: &[T]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsConfig {
    pub dim: u32,
    pub s: f64,
    pub lambda: LambdaSpec,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub cells: usize,
    pub grading_origin: f64,
    pub grading_boundary: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    pub mu: DataSpec,
    pub f: DataSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    /// Ladder levels `2, 4, ..., 2^n_levels`.
    pub n_levels: u32,
    pub eta_t: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub ladder_tol: f64,
    /// `None` selects the default window of each fit.
    pub fit_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Multiples of the Hardy constant; empty selects the scenario default.
    pub fractions: Vec<f64>,
    /// Mesh cell counts; empty selects the scenario default.
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupConfig {
    pub k: (f64, f64),
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub params: ParamsConfig,
    pub mesh: MeshConfig,
    pub data: DataConfig,
    pub schedule: ScheduleConfig,
    pub tolerances: Tolerances,
    pub sweep: SweepConfig,
    pub blowup: BlowupConfig,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Stabilization defaults to a longer horizon, weaker coupling and no
    /// source. Blow-up sweeps default to a finer, strongly origin-graded mesh and
    /// a long truncation schedule; detecting loss of coercivity just above
    /// the threshold needs both.
    pub fn with_defaults(scenario: Scenario) -> Self {
        let blowup = scenario == Scenario::BlowupSweep;
        let stabilize = scenario == Scenario::Stabilize;
        ExperimentConfig {
            scenario,
            params: ParamsConfig {
                dim: 1,
                s: 0.25,
                lambda: LambdaSpec::Fraction(if stabilize { 0.2 } else { 0.5 }),
                gamma: if stabilize { 0.5 } else { 1.0 },
            },
            mesh: MeshConfig {
                cells: if blowup { 1024 } else { 256 },
                grading_origin: if blowup { 12.0 } else { 2.0 },
                grading_boundary: 2.0,
                radius: 1.0,
            },
            data: DataConfig {
                mu: DataSpec::Const(1.0),
                f: DataSpec::Const(if stabilize { 0.0 } else { 1.0 }),
            },
            schedule: ScheduleConfig {
                n_levels: if blowup { 62 } else { 40 },
                eta_t: if stabilize { 0.025 } else { 0.005 },
                horizon: if stabilize { 5.0 } else { 1.0 },
            },
            tolerances: Tolerances {
                newton_tol: 1e-10,
                ladder_tol: 1e-8,
                fit_window: None,
            },
            sweep: SweepConfig {
                fractions: Vec::new(),
                cells: Vec::new(),
            },
            blowup: BlowupConfig {
                k: (-0.5, 0.5),
                threshold: 1e3,
            },
            output_dir: PathBuf::from("out"),
        }
    }

    /// Parameters with `lambda` resolved against the Hardy constant.
    pub fn hardy_params(&self) -> Result<HardyParams> {
        self.hardy_params_at(self.params.lambda)
    }

    pub fn hardy_params_at(&self, lambda: LambdaSpec) -> Result<HardyParams> {
        let mut p = HardyParams {
            dim: self.params.dim,
            s: self.params.s,
            lambda: 0.0,
            gamma: self.params.gamma,
        };
        p.lambda = match lambda {
            LambdaSpec::Absolute(v) => v,
            LambdaSpec::Fraction(c) => c * hardy_constant(&p)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn schedule_levels(&self) -> Vec<u64> {
        (1..=self.schedule.n_levels).map(|k| 1u64 << k).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        let p = &self.params;
        if self.scenario == Scenario::Constants {
            HardyParams {
                dim: p.dim,
                s: p.s,
                lambda: 0.0,
                gamma: p.gamma,
            }
            .validate()
            .map_err(|e| Error::Validation(e.to_string()))?;
        } else {
            if p.dim != 1 {
                return bad("the solvers are one-dimensional; set N = 1".into());
            }
            if !(p.s > 0.0 && p.s < 0.5) {
                return bad("N>2s violated in 1-D".into());
            }
        }
        if !(p.gamma > 0.0) {
            return bad(format!("gamma = {} must be positive", p.gamma));
        }
        match p.lambda {
            LambdaSpec::Absolute(v) | LambdaSpec::Fraction(v) if v < 0.0 => {
                return bad("lambda must be nonnegative".into())
            }
            _ => {}
        }
        if self.mesh.cells < 16 || !self.mesh.cells.is_multiple_of(2) {
            return bad("mesh.cells must be even and at least 16".into());
        }
        if !(self.mesh.grading_origin >= 1.0 && self.mesh.grading_boundary >= 1.0) {
            return bad("gradings must be >= 1".into());
        }
        if !(self.mesh.radius > 0.0) {
            return bad("mesh.R must be positive".into());
        }
        if !self.data.mu.is_nonnegative() || !self.data.f.is_nonnegative() {
            return bad("mu and f must be nonnegative".into());
        }
        if !(1..=62).contains(&self.schedule.n_levels) {
            return bad("schedule.n_levels must lie in 1..=62".into());
        }
        for (name, v) in [
            ("schedule.eta_t", self.schedule.eta_t),
            ("schedule.T", self.schedule.horizon),
            ("tolerances.newton_tol", self.tolerances.newton_tol),
            ("tolerances.ladder_tol", self.tolerances.ladder_tol),
            ("blowup.threshold", self.blowup.threshold),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if let Some((lo, hi)) = self.tolerances.fit_window {
            if !(lo > 0.0 && lo < hi) {
                return bad("tolerances.fit_window needs 0 < lo < hi".into());
            }
        }
        if self.blowup.k.0 >= self.blowup.k.1
            || self.blowup.k.1.abs().max(self.blowup.k.0.abs()) >= self.mesh.radius
        {
            return bad("blowup.k must be an interval inside the domain".into());
        }
        if self.sweep.fractions.iter().any(|f| !(*f >= 0.0)) {
            return bad("sweep.fractions must be nonnegative".into());
        }
        if self.sweep.cells.iter().any(|c| *c < 16 || c % 2 != 0) {
            return bad("sweep.cells must be even and at least 16".into());
        }
        Ok(())
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "output_dir",
    "params.N",
    "params.s",
    "params.lambda",
    "params.gamma",
    "mesh.cells",
    "mesh.grading_origin",
    "mesh.grading_boundary",
    "mesh.R",
    "data.mu",
    "data.f",
    "schedule.n_levels",
    "schedule.eta_t",
    "schedule.T",
    "tolerances.newton_tol",
    "tolerances.ladder_tol",
    "tolerances.fit_window",
    "sweep.fractions",
    "sweep.cells",
    "blowup.k",
    "blowup.threshold",
];

struct Entry {
    value: String,
    line: usize,
    column: usize,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut section = String::new();
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                line,
                column: indent + trimmed.len(),
                message: "unterminated section header".into(),
            })?;
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::Parse {
                    line,
                    column: indent + 2,
                    message: format!("bad section name `{name}`"),
                });
            }
            section = name.to_string();
            continue;
        }
        let eq = content.find('=').ok_or_else(|| Error::Parse {
            line,
            column: indent + 1,
            message: "expected `key = value`".into(),
        })?;
        let key = content[..eq].trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line,
                column: indent + 1,
                message: "empty key".into(),
            });
        }
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        if !KEYS.contains(&full.as_str()) {
            return Err(Error::Parse {
                line,
                column: indent + 1,
                message: format!("unknown key `{full}`"),
            });
        }
        let after = &content[eq + 1..];
        let value_col = eq + 2 + (after.len() - after.trim_start().len());
        if entries.contains_key(&full) {
            return Err(Error::Parse {
                line,
                column: indent + 1,
                message: format!("duplicate key `{full}`"),
            });
        }
        entries.insert(
            full,
            Entry {
                value: after.trim().to_string(),
                line,
                column: value_col,
            },
        );
    }

    let scenario_entry = entries.get("scenario").ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "missing required key `scenario`".into(),
    })?;
    let scenario: Scenario = scenario_entry.value.parse().map_err(|m| Error::Parse {
        line: scenario_entry.line,
        column: scenario_entry.column,
        message: m,
    })?;
    let mut cfg = ExperimentConfig::with_defaults(scenario);

    fn get<T>(
        entries: &BTreeMap<String, Entry>,
        key: &str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        match entries.get(key) {
            None => Ok(None),
            Some(e) => parse(&e.value).map(Some).map_err(|m| Error::Parse {
                line: e.line,
                column: e.column,
                message: m,
            }),
        }
    }
    let num = |s: &str| parse_f64(s);
    let uint = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("`{s}` is not a nonnegative integer"))
    };
    let data = |s: &str| s.parse::<DataSpec>().map_err(|e| e.to_string());

    if let Some(v) = get(&entries, "output_dir", |s| Ok(PathBuf::from(s)))? {
        cfg.output_dir = v;
    }
    if let Some(v) = get(&entries, "params.N", |s| {
        s.parse::<u32>()
            .map_err(|_| format!("`{s}` is not a dimension"))
    })? {
        cfg.params.dim = v;
    }
    if let Some(v) = get(&entries, "params.s", num)? {
        cfg.params.s = v;
    }
    if let Some(v) = get(&entries, "params.lambda", |s| s.parse::<LambdaSpec>())? {
        cfg.params.lambda = v;
    }
    if let Some(v) = get(&entries, "params.gamma", num)? {
        cfg.params.gamma = v;
    }
    if let Some(v) = get(&entries, "mesh.cells", uint)? {
        cfg.mesh.cells = v;
    }
    if let Some(v) = get(&entries, "mesh.grading_origin", num)? {
        cfg.mesh.grading_origin = v;
    }
    if let Some(v) = get(&entries, "mesh.grading_boundary", num)? {
        cfg.mesh.grading_boundary = v;
    }
    if let Some(v) = get(&entries, "mesh.R", num)? {
        cfg.mesh.radius = v;
    }
    if let Some(v) = get(&entries, "data.mu", data)? {
        cfg.data.mu = v;
    }
    if let Some(v) = get(&entries, "data.f", data)? {
        cfg.data.f = v;
    }
    if let Some(v) = get(&entries, "schedule.n_levels", |s| {
        s.parse::<u32>()
            .map_err(|_| format!("`{s}` is not a level count"))
    })? {
        cfg.schedule.n_levels = v;
    }
    if let Some(v) = get(&entries, "schedule.eta_t", num)? {
        cfg.schedule.eta_t = v;
    }
    if let Some(v) = get(&entries, "schedule.T", num)? {
        cfg.schedule.horizon = v;
    }
    if let Some(v) = get(&entries, "tolerances.newton_tol", num)? {
        cfg.tolerances.newton_tol = v;
    }
    if let Some(v) = get(&entries, "tolerances.ladder_tol", num)? {
        cfg.tolerances.ladder_tol = v;
    }
    if let Some(v) = get(&entries, "tolerances.fit_window", |s| {
        if s == "auto" {
            Ok(None)
        } else {
            parse_pair(s).map(Some)
        }
    })? {
        cfg.tolerances.fit_window = v;
    }
    if let Some(v) = get(&entries, "sweep.fractions", parse_list::<f64>)? {
        cfg.sweep.fractions = v;
    }
    if let Some(v) = get(&entries, "sweep.cells", parse_list::<usize>)? {
        cfg.sweep.cells = v;
    }
    if let Some(v) = get(&entries, "blowup.k", parse_pair)? {
        cfg.blowup.k = v;
    }
    if let Some(v) = get(&entries, "blowup.threshold", num)? {
        cfg.blowup.threshold = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Renders every key; `parse_config(&render(c)) == c` for valid configs.
pub fn render(c: &ExperimentConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario = {}", c.scenario);
    let _ = writeln!(out, "output_dir = {}", c.output_dir.display());
    let _ = writeln!(out, "\n[params]");
    let _ = writeln!(out, "N = {}", c.params.dim);
    let _ = writeln!(out, "s = {:?}", c.params.s);
    let _ = writeln!(out, "lambda = {}", c.params.lambda);
    let _ = writeln!(out, "gamma = {:?}", c.params.gamma);
    let _ = writeln!(out, "\n[mesh]");
    let _ = writeln!(out, "cells = {}", c.mesh.cells);
    let _ = writeln!(out, "grading_origin = {:?}", c.mesh.grading_origin);
    let _ = writeln!(out, "grading_boundary = {:?}", c.mesh.grading_boundary);
    let _ = writeln!(out, "R = {:?}", c.mesh.radius);
    let _ = writeln!(out, "\n[data]");
    let _ = writeln!(out, "mu = {}", render_data(&c.data.mu));
    let _ = writeln!(out, "f = {}", render_data(&c.data.f));
    let _ = writeln!(out, "\n[schedule]");
    let _ = writeln!(out, "n_levels = {}", c.schedule.n_levels);
    let _ = writeln!(out, "eta_t = {:?}", c.schedule.eta_t);
    let _ = writeln!(out, "T = {:?}", c.schedule.horizon);
    let _ = writeln!(out, "\n[tolerances]");
    let _ = writeln!(out, "newton_tol = {:?}", c.tolerances.newton_tol);
    let _ = writeln!(out, "ladder_tol = {:?}", c.tolerances.ladder_tol);
    match c.tolerances.fit_window {
        None => {
            let _ = writeln!(out, "fit_window = auto");
        }
        Some((a, b)) => {
            let _ = writeln!(out, "fit_window = {a:?}, {b:?}");
        }
    }
    let _ = writeln!(out, "\n[sweep]");
    let _ = writeln!(out, "fractions = {}", join(&c.sweep.fractions));
    let _ = writeln!(out, "cells = {}", join(&c.sweep.cells));
    let _ = writeln!(out, "\n[blowup]");
    let _ = writeln!(out, "k = {:?}, {:?}", c.blowup.k.0, c.blowup.k.1);
    let _ = writeln!(out, "threshold = {:?}", c.blowup.threshold);
    out
}

fn render_data(d: &DataSpec) -> String {
    match d {
        DataSpec::Const(v) => format!("const:{v:?}"),
        DataSpec::PowX(v) => format!("powx:{v:?}"),
        DataSpec::PowDelta(v) => format!("powdelta:{v:?}"),
        DataSpec::Nodal(_) => "const:0.0".into(),
    }
}
