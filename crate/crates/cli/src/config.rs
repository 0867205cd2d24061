//! Resolved run configuration: defaults, then `--config` file, then flags.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::Args;
use serde::Serialize;

use swbench_core::presets::{default_cells, default_params, PresetParams, TestPreset};
use swbench_core::{
    FluxKind, GatePolicy, PhysConstants, SchemeConfig, SchemeId, SimSpec, SonicMode, SonicRegularization, StopRule,
};

/// Error caused by the invocation rather than by a simulation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum Until {
    /// The preset's own stop rule.
    Preset,
    Steady,
    Time(f64),
}

impl FromStr for Until {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.trim() {
            "preset" => Ok(Until::Preset),
            "steady" => Ok(Until::Steady),
            other => {
                let t = other
                    .strip_prefix("time=")
                    .ok_or_else(|| usage(format!("--until expects `time=T` or `steady`, got `{other}`")))?;
                let t: f64 = t.parse().map_err(|_| usage(format!("bad final time `{t}`")))?;
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(usage(format!("final time must be non-negative, got {t}")));
                }
                Ok(Until::Time(t))
            }
        }
    }
}

/// Options shared by every simulation subcommand. All optional so that
/// `--config` values can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// Test case 1-6
    #[arg(long)]
    pub test: Option<u8>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Width of the sonic-point regularisation
    #[arg(long)]
    pub eps: Option<f64>,
    /// Regularised inverse near sonic points: mu-scaled | mu-inverse | star
    #[arg(long)]
    pub sonic: Option<String>,
    /// Emerging-bottom energy gate: dimensional | as-printed
    #[arg(long)]
    pub gate: Option<String>,
    /// Homogeneous flux for reconstruction schemes: roe | force | gforce | lf | lw
    #[arg(long)]
    pub hr_flux: Option<String>,
    /// Preset parameter override, e.g. `--param H_r=0.45` (repeatable)
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    /// `time=T`, `steady`, or `preset`
    #[arg(long)]
    pub until: Option<String>,
    /// File of `key = value` lines; flags take precedence
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub test: u8,
    pub scheme: SchemeId,
    pub cells: usize,
    pub cfl: f64,
    pub eps: f64,
    pub sonic: SonicMode,
    pub gate: GatePolicy,
    pub hr_flux: Option<&'static str>,
    pub until: Until,
    pub params: PresetParams,
}

fn parse_kv(s: &str) -> anyhow::Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| usage(format!("expected `key=value`, got `{s}`")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| usage(format!("parameter `{}` needs a number, got `{}`", k.trim(), v.trim())))?;
    Ok((k.trim().to_string(), v))
}

fn read_config_file(path: &Path) -> anyhow::Result<SimArgs> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = SimArgs::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected `key = value`", path.display(), n + 1)))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim().to_string());
        let num = |v: &str| -> anyhow::Result<f64> {
            v.parse().map_err(|_| usage(format!("{}:{}: `{key}` needs a number", path.display(), n + 1)))
        };
        match key.as_str() {
            "test" => out.test = Some(num(&value)? as u8),
            "scheme" => out.scheme = Some(value),
            "cells" => out.cells = Some(num(&value)? as usize),
            "cfl" => out.cfl = Some(num(&value)?),
            "eps" => out.eps = Some(num(&value)?),
            "sonic" => out.sonic = Some(value),
            "gate" => out.gate = Some(value),
            "hr-flux" => out.hr_flux = Some(value),
            "until" => out.until = Some(value),
            "param" => out.params.push(value),
            _ => match key.strip_prefix("param.") {
                // parameter names are case sensitive, so take them from the raw line
                Some(_) => {
                    let name = raw.split_once('=').unwrap().0.trim().trim_start_matches("param.");
                    out.params.push(format!("{name}={value}"));
                }
                None => bail!(usage(format!("{}:{}: unknown key `{key}`", path.display(), n + 1))),
            },
        }
    }
    Ok(out)
}

fn parse_named<T: FromStr<Err = swbench_core::Error>>(what: &str, s: &str) -> anyhow::Result<T> {
    s.parse().map_err(|e: swbench_core::Error| usage(format!("{what}: {e}")))
}

impl SimArgs {
    /// Flags over config file over defaults.
    pub fn resolve(&self) -> anyhow::Result<Settings> {
        self.resolve_with(None)
    }

    /// As `resolve`, with a fallback test id when neither flag nor file sets one.
    pub fn resolve_with(&self, default_test: Option<u8>) -> anyhow::Result<Settings> {
        let file = match &self.config {
            Some(p) => read_config_file(p)?,
            None => SimArgs::default(),
        };
        let test = self.test.or(file.test).or(default_test).ok_or_else(|| usage("--test is required"))?;
        if !(1..=6).contains(&test) {
            return Err(usage(format!("--test must be 1..6, got {test}")));
        }
        let scheme_name = self.scheme.clone().or(file.scheme).unwrap_or_else(|| "hr".into());
        let scheme: SchemeId = parse_named("--scheme", &scheme_name)?;
        let defaults = SchemeConfig::new(scheme);
        let sonic = match self.sonic.clone().or(file.sonic) {
            Some(s) => parse_named("--sonic", &s)?,
            None => defaults.sonic.mode,
        };
        let gate = match self.gate.clone().or(file.gate) {
            Some(s) => parse_named("--gate", &s)?,
            None => defaults.gate,
        };
        let hr_flux = match self.hr_flux.clone().or(file.hr_flux) {
            Some(s) => Some(parse_named::<FluxKind>("--hr-flux", &s)?.name()),
            None => None,
        };
        let until = match self.until.clone().or(file.until) {
            Some(s) => s.parse()?,
            None => Until::Preset,
        };
        let mut params = default_params(test).map_err(|e| usage(e.to_string()))?;
        for kv in file.params.iter().chain(&self.params) {
            let (k, v) = parse_kv(kv)?;
            params.insert(k, v);
        }
        let settings = Settings {
            test,
            scheme,
            cells: self.cells.or(file.cells).unwrap_or_else(|| default_cells(test)),
            cfl: self.cfl.or(file.cfl).unwrap_or(defaults.cfl),
            eps: self.eps.or(file.eps).unwrap_or(defaults.sonic.eps),
            sonic,
            gate,
            hr_flux,
            until,
            params,
        };
        // surface bad parameters and scheme options as usage errors up front
        settings.preset().map_err(|e| usage(e.to_string()))?;
        if settings.scheme.is_implemented() {
            settings.scheme_config().validate().map_err(|e| usage(e.to_string()))?;
        }
        Ok(settings)
    }
}

impl Settings {
    pub fn preset(&self) -> swbench_core::Result<TestPreset> {
        TestPreset::new(self.test, &self.params, Some(self.cells))
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let mut cfg = SchemeConfig::new(self.scheme).with_cfl(self.cfl);
        cfg.sonic = SonicRegularization {
            mode: self.sonic,
            eps: self.eps,
        };
        cfg.gate = self.gate;
        cfg.hr_flux = self.hr_flux.map(|f| f.parse().expect("flux name round-trips"));
        cfg
    }

    pub fn spec(&self) -> swbench_core::Result<SimSpec> {
        let preset = self.preset()?;
        let mut spec = preset.spec()?;
        spec.stop = match (self.until, preset.default_stop()) {
            (Until::Preset, rule) => rule,
            (Until::Time(t), _) => StopRule::FinalTime(t),
            (Until::Steady, rule @ StopRule::Steady { .. }) => rule,
            (Until::Steady, StopRule::FinalTime(_)) => StopRule::steady(1000.0),
        };
        Ok(spec)
    }

    pub fn with_param(&self, key: &str, value: f64) -> Settings {
        let mut s = self.clone();
        s.params.insert(key.to_string(), value);
        s
    }

    pub fn with_scheme(&self, scheme: SchemeId) -> Settings {
        Settings { scheme, ..self.clone() }
    }
}

pub const CONSTANTS: PhysConstants = PhysConstants { g: 9.81, h_dry: 1e-8 };

/// Comma-separated numbers or `start:stop:step` (inclusive, either direction).
pub fn parse_values(s: &str) -> anyhow::Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(usage("empty value list"));
    }
    let bad = |t: &str| usage(format!("bad number `{t}` in value list"));
    if let Some((a, rest)) = s.split_once(':') {
        let (b, step) = rest.split_once(':').ok_or_else(|| usage("range must be start:stop:step"))?;
        let (a, b, step): (f64, f64, f64) = (
            a.trim().parse().map_err(|_| bad(a))?,
            b.trim().parse().map_err(|_| bad(b))?,
            step.trim().parse().map_err(|_| bad(step))?,
        );
        if !(step > 0.0) {
            return Err(usage("range step must be positive"));
        }
        let n = ((b - a).abs() / step + 1e-9).floor() as usize;
        let dir = if b >= a { 1.0 } else { -1.0 };
        // multiply rather than accumulate so values are reproducible
        return Ok((0..=n).map(|k| a + dir * step * k as f64).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad(t))).collect()
}

pub fn parse_schemes(list: &str) -> anyhow::Result<Vec<SchemeId>> {
    if list.trim() == "all" {
        return Ok(SchemeId::implemented().collect());
    }
    let ids: Vec<SchemeId> = list
        .split(',')
        .map(|s| parse_named("--schemes", s.trim()))
        .collect::<anyhow::Result<_>>()?;
    if ids.is_empty() {
        return Err(usage("empty scheme list"));
    }
    Ok(ids)
}
