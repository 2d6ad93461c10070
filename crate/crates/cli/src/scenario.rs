//! Scenario files: TOML with a `task`, a `[domain]`, a `[set]` and task `[params]`.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use strip_control::geometry::{AxisBox, SetDescription};
use strip_control::strip_model::{build_domain, Boundary, DomainConfig, StripDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Thickness,
    SpectralCheck,
    Dissipation,
    CostBound,
    Hum,
    Lr,
    Observability,
    Necessity,
    KernelCheck,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Thickness => "thickness",
            Task::SpectralCheck => "spectral-check",
            Task::Dissipation => "dissipation",
            Task::CostBound => "cost-bound",
            Task::Hum => "hum",
            Task::Lr => "lr",
            Task::Observability => "observability",
            Task::Necessity => "necessity",
            Task::KernelCheck => "kernel-check",
        }
    }

    pub fn uses_randomness(self) -> bool {
        matches!(self, Task::Dissipation | Task::Hum | Task::Lr | Task::KernelCheck)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A scalar or a list; scalars behave as one-element lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub task: Task,
    pub seed: Option<u64>,
    /// Output directory, overridden by `--out-dir`.
    pub output: Option<String>,
    pub domain: DomainSection,
    #[serde(default)]
    pub set: SetSection,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub scale: f64,
    #[serde(default = "default_boundary")]
    pub boundary: String,
    pub half_width: f64,
    #[serde(default = "default_transverse_cutoff")]
    pub transverse_cutoff: usize,
    #[serde(default = "default_longitudinal_cutoff")]
    pub longitudinal_cutoff: usize,
    pub step: f64,
}

fn default_dim() -> usize {
    2
}
fn default_boundary() -> String {
    "dirichlet".into()
}
fn default_transverse_cutoff() -> usize {
    64
}
fn default_longitudinal_cutoff() -> usize {
    4096
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    Full,
    Empty,
    Stripes,
    Boxes,
    PeriodicBoxes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSection {
    pub kind: SetKind,
    pub width: Option<f64>,
    pub period: Option<f64>,
    pub offset: Option<f64>,
    /// Each box is a list of `[lo, hi]` pairs, one per axis.
    pub boxes: Option<Vec<Vec<[f64; 2]>>>,
    pub origin: Option<Vec<f64>>,
    /// Per-axis periods; `0` marks a non-periodic axis.
    pub periods: Option<Vec<f64>>,
}

impl Default for SetSection {
    fn default() -> Self {
        SetSection {
            kind: SetKind::Full,
            width: None,
            period: None,
            offset: None,
            boxes: None,
            origin: None,
            periods: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub energy: Option<OneOrMany>,
    pub horizon: Option<OneOrMany>,
    pub times: Option<OneOrMany>,
    pub gamma: Option<f64>,
    pub a: Option<Vec<f64>>,
    pub k: Option<f64>,
    pub sides: Option<Vec<f64>>,
    pub search_step: Option<f64>,
    pub states: Option<usize>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub quadrature: Option<String>,
    pub quadrature_nodes: Option<usize>,
    pub e0: Option<f64>,
    pub k_max: Option<usize>,
    pub n_max: Option<usize>,
    pub kappa: Option<f64>,
    pub threshold: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub witness_nodes: Option<usize>,
}

/// Parses TOML syntax only; errors carry the line and column of the offending token.
pub fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse().map_err(|e: toml::de::Error| anyhow::anyhow!("{e}"))
}

/// Parses a single scenario; errors carry the line and column of the offending token.
pub fn parse(text: &str) -> Result<Scenario> {
    if parse_table(text)?.contains_key("sweep") {
        bail!("the file has a [sweep] table; use the sweep command");
    }
    toml::from_str(text).map_err(|e| anyhow::anyhow!("{e}"))
}

/// Reads a scenario from an already-parsed table.
pub fn from_table(table: toml::Table) -> Result<Scenario> {
    Ok(toml::Value::Table(table).try_into()?)
}

pub fn domain_of(s: &Scenario) -> Result<StripDomain<f64>> {
    let d = &s.domain;
    let boundary = Boundary::from_str(&d.boundary).context("domain.boundary")?;
    let domain = build_domain(&DomainConfig {
        dim: d.dim,
        scale: d.scale,
        boundary,
        half_width: d.half_width,
        transverse_cutoff: d.transverse_cutoff,
        longitudinal_cutoff: d.longitudinal_cutoff,
        step: d.step,
    })
    .context("domain")?;
    Ok(domain)
}

pub fn set_of(s: &Scenario, domain: &StripDomain<f64>) -> Result<SetDescription<f64>> {
    let set = &s.set;
    let dim = domain.dim();
    let boxes = |field: &str| -> Result<Vec<AxisBox<f64>>> {
        let raw = set.boxes.as_ref().with_context(|| format!("set.boxes is required for `{field}` sets"))?;
        if raw.is_empty() {
            bail!("set.boxes must not be empty");
        }
        raw.iter()
            .enumerate()
            .map(|(i, b)| {
                if b.len() != dim {
                    bail!("set.boxes[{i}] has {} intervals, expected {dim}", b.len());
                }
                if b.iter().any(|[lo, hi]| !(lo < hi)) {
                    bail!("set.boxes[{i}] has an interval with lo >= hi");
                }
                Ok(AxisBox::from_bounds(&b.iter().map(|[lo, hi]| (*lo, *hi)).collect::<Vec<_>>()))
            })
            .collect()
    };
    let out = match set.kind {
        SetKind::Full => SetDescription::full_strip(domain),
        SetKind::Empty => SetDescription::empty(),
        SetKind::Stripes => {
            let width = require(set.width, "set.width")?;
            let period = require(set.period, "set.period")?;
            if !(width > 0.0) || !(period >= width) {
                bail!("set.width must be positive and at most set.period");
            }
            SetDescription::stripes(domain, width, period, set.offset.unwrap_or(0.0))
        }
        SetKind::Boxes => SetDescription::BoxUnion(boxes("boxes")?),
        SetKind::PeriodicBoxes => {
            let cell = boxes("periodic-boxes")?;
            let periods = require(set.periods.clone(), "set.periods")?;
            if periods.len() != dim {
                bail!("set.periods has {} entries, expected {dim}", periods.len());
            }
            if periods.iter().any(|&p| p < 0.0) {
                bail!("set.periods must be nonnegative");
            }
            let origin = set.origin.clone().unwrap_or_else(|| vec![0.0; dim]);
            if origin.len() != dim {
                bail!("set.origin has {} entries, expected {dim}", origin.len());
            }
            let periods = periods.into_iter().map(|p| (p > 0.0).then_some(p)).collect();
            SetDescription::periodic_boxes(cell, origin, periods)
        }
    };
    out.validate(dim).context("set")?;
    Ok(out)
}

pub fn require<T>(value: Option<T>, field: &str) -> Result<T> {
    value.with_context(|| format!("{field} is required for this task"))
}

/// Checks that every parameter the task reads is present and in range.
pub fn validate(s: &Scenario) -> Result<()> {
    let p = &s.params;
    let positive = |v: Option<&OneOrMany>, field: &str| -> Result<()> {
        let v = require(v, field)?.values();
        if v.is_empty() {
            bail!("{field} must not be empty");
        }
        if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            bail!("{field} must be positive and finite");
        }
        Ok(())
    };
    if s.task.uses_randomness() && s.seed.is_none() {
        bail!("seed is required for the {} task", s.task);
    }
    match s.task {
        Task::Thickness => {}
        Task::SpectralCheck => positive(p.energy.as_ref(), "params.energy")?,
        Task::Dissipation => {
            positive(p.energy.as_ref(), "params.energy")?;
            positive(p.times.as_ref(), "params.times")?;
        }
        Task::CostBound => {
            positive(p.horizon.as_ref(), "params.horizon")?;
            let g = require(p.gamma, "params.gamma")?;
            if !(g > 0.0 && g <= 1.0) {
                bail!("params.gamma must lie in (0, 1]");
            }
            require(p.a.as_ref(), "params.a")?;
        }
        Task::Hum | Task::Observability => {
            positive(p.energy.as_ref(), "params.energy")?;
            positive(p.horizon.as_ref(), "params.horizon")?;
        }
        Task::Lr | Task::Necessity | Task::KernelCheck => {
            if s.task == Task::Lr {
                positive(p.energy.as_ref(), "params.energy")?;
            }
            if s.task == Task::KernelCheck {
                positive(p.times.as_ref(), "params.times")?;
            }
            positive(p.horizon.as_ref(), "params.horizon")?;
            if p.horizon.as_ref().map_or(0, |h| h.values().len()) != 1 {
                bail!("params.horizon must be a single value for the {} task", s.task);
            }
        }
    }
    if matches!(s.task, Task::Lr | Task::Observability | Task::Hum | Task::Dissipation)
        && p.energy.as_ref().map_or(0, |e| e.values().len()) != 1
    {
        bail!("params.energy must be a single value for the {} task", s.task);
    }
    if let Some(q) = &p.quadrature {
        if q != "exact" && q != "trapezoid" {
            bail!("params.quadrature must be `exact` or `trapezoid`, got `{q}`");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
task = "thickness"
[domain]
scale = 0.5
half_width = 4.0
step = 0.125
[set]
kind = "stripes"
width = 1.0
period = 2.0
"#;

    #[test]
    fn parses_minimal_scenario() {
        let s = parse(BASE).unwrap();
        assert_eq!(s.task, Task::Thickness);
        assert_eq!(s.domain.dim, 2);
        let d = domain_of(&s).unwrap();
        set_of(&s, &d).unwrap();
        validate(&s).unwrap();
    }

    #[test]
    fn parse_errors_report_position() {
        let err = parse("task = \"thickness\"\n[domain\nscale = 1").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = parse(&BASE.replace("step = 0.125", "step = 0.125\nstpe = 1")).unwrap_err().to_string();
        assert!(err.contains("stpe") && err.contains("line"), "{err}");
    }

    #[test]
    fn validation_names_field() {
        let s = parse(&BASE.replace("thickness", "cost-bound")).unwrap();
        let err = validate(&s).unwrap_err().to_string();
        assert!(err.contains("params.horizon"), "{err}");
        let s = parse(&BASE.replace("thickness", "hum")).unwrap();
        assert!(validate(&s).unwrap_err().to_string().contains("seed"));
    }

    #[test]
    fn scalar_and_list_parameters() {
        let text = format!("{BASE}[params]\nhorizon = [0.5, 1]\nenergy = 3\n");
        let s = parse(&text).unwrap();
        assert_eq!(s.params.horizon.unwrap().values(), vec![0.5, 1.0]);
        assert_eq!(s.params.energy.unwrap().values(), vec![3.0]);
    }
}
