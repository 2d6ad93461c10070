//! Task execution: each task turns a validated scenario into tables and plot series.

use std::f64::consts::E;
use std::sync::Arc;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strip_control::control::{
    cost_constants, empirical_observability_constant, h_conditions_check, hum_control, lr_synthesize, ControlModel,
    HumOptions, LrSchedule, TimeQuadrature,
};
use strip_control::geometry::{estimate_thickness, intersection_measure, Parallelepiped, SetDescription};
use strip_control::heat::{dissipation_check, kernel_cube_series, kernel_strip, Cube, HeatState, KernelParams};
use strip_control::necessity::{dirichlet_lower_witness, thickness_equivalence_probe, ProbeOptions};
use strip_control::spectral::{empirical_spectral_constant, theoretical_spectral_constant, SpectralConstants};
use strip_control::strip_model::{lattice_below_energy, FrequencyLattice, StripDomain};

use crate::output::{Cell, Plot, Table};
use crate::scenario::{domain_of, require, set_of, Scenario, Task};

pub struct TaskOutput {
    /// Detailed rows written by `run`.
    pub table: Table,
    /// Single-row digest used by `sweep`; absent when `table` already has one row.
    pub summary: Option<Table>,
    pub plot: Plot,
    /// Summary column plotted against the swept parameter.
    pub headline: &'static str,
}

impl TaskOutput {
    fn new(table: Table, plot: Plot, headline: &'static str) -> Self {
        TaskOutput {
            table,
            summary: None,
            plot,
            headline,
        }
    }

    /// The one-row view used for sweeps.
    pub fn digest(&self) -> Result<&Table> {
        let t = self.summary.as_ref().unwrap_or(&self.table);
        if t.rows.len() != 1 {
            bail!(
                "a sweep point produced {} rows; give list parameters a single value or sweep over them",
                t.rows.len()
            );
        }
        Ok(t)
    }
}

pub fn run_task(s: &Scenario) -> Result<TaskOutput> {
    let domain = domain_of(s)?;
    let set = set_of(s, &domain)?;
    match s.task {
        Task::Thickness => thickness(s, &domain, &set),
        Task::SpectralCheck => spectral_check(s, &domain, &set),
        Task::Dissipation => dissipation(s, &domain),
        Task::CostBound => cost_bound(s, &domain),
        Task::Hum => hum(s, &domain, &set),
        Task::Lr => lr(s, &domain, &set),
        Task::Observability => observability(s, &domain, &set),
        Task::Necessity => necessity(s, &domain, &set),
        Task::KernelCheck => kernel_check(s, &domain),
    }
}

fn default_sides(s: &Scenario, domain: &StripDomain<f64>) -> Result<Vec<f64>> {
    let sides = s.params.sides.clone().unwrap_or_else(|| {
        let mut v = vec![domain.width(); domain.dim() - 1];
        v.push(2.0);
        v
    });
    if sides.len() != domain.dim() {
        bail!("params.sides has {} entries, expected {}", sides.len(), domain.dim());
    }
    Ok(sides)
}

fn options(s: &Scenario) -> Result<HumOptions> {
    let p = &s.params;
    let mut o = HumOptions::default();
    if let Some(tol) = p.tol {
        if !(tol > 0.0) {
            bail!("params.tol must be positive");
        }
        o.tol = tol;
    }
    o.max_iter = p.max_iter;
    if p.quadrature.as_deref() == Some("trapezoid") {
        o.quadrature = TimeQuadrature::Trapezoid(p.quadrature_nodes.unwrap_or(256));
    }
    Ok(o)
}

fn lattice(s: &Scenario, domain: &StripDomain<f64>) -> Result<Arc<FrequencyLattice<f64>>> {
    let e = require(s.params.energy.as_ref(), "params.energy")?.values()[0];
    let lat = lattice_below_energy(domain, e)?;
    if lat.is_empty() {
        bail!("params.energy: no modes below {e}");
    }
    Ok(Arc::new(lat))
}

fn random_unit_state(lat: &Arc<FrequencyLattice<f64>>, rng: &mut ChaCha8Rng) -> Result<HeatState<f64>> {
    let c: Vec<f64> = (0..lat.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(HeatState::new(lat.clone(), c.into_iter().map(|v| v / n).collect())?)
}

fn rng(s: &Scenario) -> Result<ChaCha8Rng> {
    Ok(ChaCha8Rng::seed_from_u64(require(s.seed, "seed")?))
}

fn thickness(s: &Scenario, domain: &StripDomain<f64>, set: &SetDescription<f64>) -> Result<TaskOutput> {
    let sides = default_sides(s, domain)?;
    let step = s.params.search_step.unwrap_or(domain.step());
    let cert = estimate_thickness(set, &sides, domain, step)?;
    let d = domain.dim();
    let mut header: Vec<String> = vec!["gamma_est".into(), "exhaustive".into(), "step".into()];
    header.extend((0..d).map(|j| format!("side_{j}")));
    header.extend((0..d).map(|j| format!("worst_center_{j}")));
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    let mut row: Vec<Cell> = vec![cert.gamma_est.into(), cert.exhaustive.into(), cert.step.into()];
    row.extend(cert.sides.iter().map(|&v| Cell::from(v)));
    row.extend(cert.worst.center.iter().map(|&v| Cell::from(v)));
    table.push(row);

    // Ratio along a line of centers through the middle of the cross-section.
    let mut plot = Plot::default();
    let x = domain.half_width();
    let a = sides[d - 1];
    let n = ((2.0 * x - a) / step).floor().max(0.0) as usize;
    for i in 0..=n {
        let mut center: Vec<f64> = sides[..d - 1].iter().map(|&ai| ai / 2.0).collect();
        center.push(-x + a / 2.0 + i as f64 * step);
        let q = Parallelepiped::new(center.clone(), sides.clone());
        let ratio = intersection_measure(set, &q)? / q.volume();
        plot.push(center[d - 1], ratio, "ratio");
    }
    Ok(TaskOutput::new(table, plot, "gamma_est"))
}

fn spectral_check(s: &Scenario, domain: &StripDomain<f64>, set: &SetDescription<f64>) -> Result<TaskOutput> {
    let energies = require(s.params.energy.as_ref(), "params.energy")?.values();
    let k = s.params.k.unwrap_or(E);
    let sides = default_sides(s, domain)?;
    let gamma = estimate_thickness(set, &sides, domain, s.params.search_step.unwrap_or(domain.step()))?.gamma_est;
    let mut table = Table::new(&["energy", "sqrt_energy", "modes", "constant", "ln_constant", "log_bound_squared"]);
    let mut plot = Plot::default();
    for &e in &energies {
        let est = empirical_spectral_constant(domain, set, e)?;
        let bound = if gamma > 0.0 {
            theoretical_spectral_constant(&SpectralConstants::new(k, gamma, sides.clone()), e)?
        } else {
            f64::INFINITY
        };
        let ln_c = est.constant.ln();
        table.push(vec![e.into(), e.sqrt().into(), est.modes.into(), est.constant.into(), ln_c.into(), bound.into()]);
        plot.push(e.sqrt(), ln_c, "empirical");
        plot.push(e.sqrt(), bound / 2.0, "bound");
    }
    Ok(TaskOutput::new(table, plot, "ln_constant"))
}

fn dissipation(s: &Scenario, domain: &StripDomain<f64>) -> Result<TaskOutput> {
    let lat = lattice(s, domain)?;
    let times = require(s.params.times.as_ref(), "params.times")?.values();
    let states = s.params.states.unwrap_or(100);
    let e_max = lat.max_energy();
    let mut rng = rng(s)?;
    let mut worst = vec![0.0f64; times.len()];
    let mut holds = vec![true; times.len()];
    for _ in 0..states {
        let g = random_unit_state(&lat, &mut rng)?;
        let cut = rng.gen_range(0.0..=e_max);
        for (i, &t) in times.iter().enumerate() {
            let r = dissipation_check(&g, cut, t)?;
            worst[i] = worst[i].max(r.lhs / r.rhs);
            holds[i] &= r.holds;
        }
    }
    let mut table = Table::new(&["t", "states", "max_ratio", "holds"]);
    let mut plot = Plot::default();
    for (i, &t) in times.iter().enumerate() {
        table.push(vec![t.into(), states.into(), worst[i].into(), holds[i].into()]);
        plot.push(t, worst[i], "max_ratio");
    }
    let mut summary = Table::new(&["times", "states", "max_ratio", "holds"]);
    summary.push(vec![
        times.len().into(),
        states.into(),
        worst.iter().cloned().fold(0.0, f64::max).into(),
        holds.iter().all(|&h| h).into(),
    ]);
    let mut out = TaskOutput::new(table, plot, "max_ratio");
    out.summary = Some(summary);
    Ok(out)
}

fn cost_bound(s: &Scenario, domain: &StripDomain<f64>) -> Result<TaskOutput> {
    let p = &s.params;
    let gamma = require(p.gamma, "params.gamma")?;
    let a = require(p.a.clone(), "params.a")?;
    if a.len() != domain.dim() {
        bail!("params.a has {} entries, expected {}", a.len(), domain.dim());
    }
    let k = p.k.unwrap_or(E);
    let mut table = Table::new(&[
        "horizon", "c1", "tau0", "log_sqrt_c1", "c2", "log_ct_bound", "h1", "log_h2", "h_ok",
    ]);
    let mut plot = Plot::default();
    for t in require(p.horizon.as_ref(), "params.horizon")?.values() {
        let r = cost_constants(gamma, &a, k, t)?;
        let h = h_conditions_check(r.c1, r.tau0)?;
        table.push(vec![
            t.into(),
            r.c1.into(),
            r.tau0.into(),
            r.log_sqrt_c1.into(),
            r.c2.into(),
            r.log_ct_bound.into(),
            h.h1.into(),
            h.log_h2.into(),
            h.ok.into(),
        ]);
        plot.push(1.0 / t, r.log_ct_bound, "log_ct_bound");
    }
    Ok(TaskOutput::new(table, plot, "log_ct_bound"))
}

fn hum(s: &Scenario, domain: &StripDomain<f64>, set: &SetDescription<f64>) -> Result<TaskOutput> {
    let lat = lattice(s, domain)?;
    let model = ControlModel::new(domain, lat.clone(), set)?;
    let opts = options(s)?;
    let u0 = random_unit_state(&lat, &mut rng(s)?)?;
    let mut table = Table::new(&["horizon", "modes", "cost", "ln_cost", "relative_residual", "iterations", "final_norm"]);
    let mut plot = Plot::default();
    for t in require(s.params.horizon.as_ref(), "params.horizon")?.values() {
        let r = hum_control(&model, &u0, t, &opts)?;
        table.push(vec![
            t.into(),
            lat.len().into(),
            r.cost.into(),
            r.cost.ln().into(),
            r.relative_residual.into(),
            r.iterations.into(),
            r.final_state.norm().into(),
        ]);
        plot.push(1.0 / t, r.cost.ln(), "ln_cost");
    }
    Ok(TaskOutput::new(table, plot, "ln_cost"))
}

fn lr(s: &Scenario, domain: &StripDomain<f64>, set: &SetDescription<f64>) -> Result<TaskOutput> {
    let lat = lattice(s, domain)?;
    let model = ControlModel::new(domain, lat.clone(), set)?;
    let opts = options(s)?;
    let u0 = random_unit_state(&lat, &mut rng(s)?)?;
    let mut sched = LrSchedule::for_model(&model);
    if let Some(e0) = s.params.e0 {
        sched.e0 = e0;
    }
    if let Some(k) = s.params.k_max {
        sched.k_max = k;
    }
    let t = require(s.params.horizon.as_ref(), "params.horizon")?.values()[0];
    let r = lr_synthesize(&model, &u0, t, &sched, &opts)?;
    let mut table = Table::new(&[
        "stage",
        "energy",
        "start",
        "duration",
        "controlled_modes",
        "norm_before",
        "norm_after_control",
        "norm_after",
        "cost",
    ]);
    let mut plot = Plot::default();
    plot.push(0.0, u0.norm().ln(), "ln_norm");
    for st in &r.stages {
        table.push(vec![
            st.stage.into(),
            st.energy.into(),
            st.start.into(),
            st.duration.into(),
            st.controlled_modes.into(),
            st.norm_before.into(),
            st.norm_after_control.into(),
            st.norm_after.into(),
            st.cost.into(),
        ]);
        plot.push((st.stage + 1) as f64, st.norm_after.ln(), "ln_norm");
    }
    let mut summary = Table::new(&["stages", "total_cost", "ln_total_cost", "final_norm", "summable_from", "log_convex"]);
    summary.push(vec![
        r.stages.len().into(),
        r.total_cost.into(),
        r.total_cost.ln().into(),
        r.final_state.norm().into(),
        r.summability.map_or(Cell::Int(-1), |(k, _)| Cell::from(k)),
        r.log_convex.into(),
    ]);
    let mut out = TaskOutput::new(table, plot, "ln_total_cost");
    out.summary = Some(summary);
    Ok(out)
}

fn observability(s: &Scenario, domain: &StripDomain<f64>, set: &SetDescription<f64>) -> Result<TaskOutput> {
    let lat = lattice(s, domain)?;
    let model = ControlModel::new(domain, lat.clone(), set)?;
    let quad = options(s)?.quadrature;
    let mut table = Table::new(&["horizon", "modes", "constant", "ln_constant"]);
    let mut plot = Plot::default();
    for t in require(s.params.horizon.as_ref(), "params.horizon")?.values() {
        let c = empirical_observability_constant(&model, t, quad)?;
        table.push(vec![t.into(), lat.len().into(), c.into(), c.ln().into()]);
        plot.push(1.0 / t, c.ln(), "ln_constant");
    }
    Ok(TaskOutput::new(table, plot, "ln_constant"))
}

fn necessity(s: &Scenario, domain: &StripDomain<f64>, set: &SetDescription<f64>) -> Result<TaskOutput> {
    let p = &s.params;
    let t = require(p.horizon.as_ref(), "params.horizon")?.values()[0];
    let opts = ProbeOptions {
        n_max: p.n_max.unwrap_or(20),
        kappa: p.kappa.unwrap_or(2.0),
        sides: default_sides(s, domain)?,
        step: p.search_step.unwrap_or(domain.step()),
        threshold: p.threshold.unwrap_or(10.0),
    };
    let r = thickness_equivalence_probe(set, t, domain, &opts)?;
    let d = domain.dim();
    let mut header: Vec<String> = vec!["n".into(), "ratio".into(), "functional".into()];
    header.extend((0..d).map(|j| format!("center_{j}")));
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    let mut plot = Plot::default();
    for row in &r.rows {
        let mut cells: Vec<Cell> = vec![row.n.into(), row.ratio.into(), row.functional.into()];
        cells.extend(row.center.iter().map(|&v| Cell::from(v)));
        table.push(cells);
        plot.push(row.n as f64, row.functional, "functional");
        if let Some(b) = r.bound {
            plot.push(row.n as f64, b, "bound");
        }
    }
    let max_f = r.rows.iter().map(|x| x.functional).fold(f64::NEG_INFINITY, f64::max);
    let mut summary = Table::new(&["verdict", "gamma_est", "bound", "max_functional", "eventually_increasing"]);
    summary.push(vec![
        r.verdict.label().into(),
        r.gamma_est.into(),
        r.bound.unwrap_or(f64::NAN).into(),
        max_f.into(),
        r.eventually_increasing.into(),
    ]);
    let mut out = TaskOutput::new(table, plot, "max_functional");
    out.summary = Some(summary);
    Ok(out)
}

fn kernel_check(s: &Scenario, domain: &StripDomain<f64>) -> Result<TaskOutput> {
    let p = &s.params;
    let params = KernelParams::default();
    let d = domain.dim();
    let center = p.center.clone().unwrap_or_else(|| {
        let mut c = vec![domain.width() / 2.0; d - 1];
        c.push(0.0);
        c
    });
    if center.len() != d {
        bail!("params.center has {} entries, expected {d}", center.len());
    }
    let cube = Cube::in_strip(center.clone(), domain)?;
    let times = require(p.times.as_ref(), "params.times")?.values();
    let samples = p.samples.unwrap_or(100);
    let mut rng = rng(s)?;
    let half = cube.side / 2.0;
    let mut table = Table::new(&["t", "samples", "dominated", "min_gap", "min_strip", "max_cube"]);
    let mut plot = Plot::default();
    let mut all_dominated = 0;
    let mut min_gap = f64::INFINITY;
    for &t in &times {
        let (mut dominated, mut gap, mut ks_min, mut kw_max) = (0usize, f64::INFINITY, f64::INFINITY, 0.0f64);
        for _ in 0..samples {
            let x: Vec<f64> = center.iter().map(|&c| c + rng.gen_range(-half..half)).collect();
            let y: Vec<f64> = center.iter().map(|&c| c + rng.gen_range(-half..half)).collect();
            let ks = kernel_strip(t, &x, &y, domain, &params)?;
            let kw = kernel_cube_series(t, &x, &y, &cube, &params)?;
            dominated += usize::from(ks >= kw);
            gap = gap.min(ks - kw);
            ks_min = ks_min.min(ks);
            kw_max = kw_max.max(kw);
        }
        let on_diag = kernel_strip(t, &center, &center, domain, &params)?;
        plot.push(t, on_diag.ln(), "ln_strip_diagonal");
        plot.push(t, kernel_cube_series(t, &center, &center, &cube, &params)?.ln(), "ln_cube_diagonal");
        table.push(vec![t.into(), samples.into(), dominated.into(), gap.into(), ks_min.into(), kw_max.into()]);
        all_dominated += dominated;
        min_gap = min_gap.min(gap);
    }
    let horizon = require(p.horizon.as_ref(), "params.horizon")?.values()[0];
    let w = dirichlet_lower_witness(&center, horizon, domain, &params, p.witness_nodes.unwrap_or(64))?;
    let mut summary = Table::new(&["samples", "dominated", "min_gap", "witness", "witness_quadrature", "witness_holds"]);
    summary.push(vec![
        (samples * times.len()).into(),
        all_dominated.into(),
        min_gap.into(),
        w.value.into(),
        w.quadrature.into(),
        w.holds.into(),
    ]);
    let mut out = TaskOutput::new(table, plot, "min_gap");
    out.summary = Some(summary);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse;

    fn scenario(task: &str, set: &str, params: &str) -> Scenario {
        let text = format!(
            "task = \"{task}\"\nseed = 3\n[domain]\nscale = 0.5\nhalf_width = 4.0\nstep = 0.125\n\
             transverse_cutoff = 16\nlongitudinal_cutoff = 64\n[set]\n{set}\n[params]\n{params}\n"
        );
        parse(&text).unwrap()
    }

    const STRIPES: &str = "kind = \"stripes\"\nwidth = 1.0\nperiod = 2.0";

    #[test]
    fn thickness_of_stripes() {
        let out = run_task(&scenario("thickness", STRIPES, "")).unwrap();
        assert_eq!(out.table.rows[0][0], Cell::Float(0.5));
        assert!(!out.plot.points.is_empty());
    }

    #[test]
    fn cost_bound_row() {
        let out = run_task(&scenario("cost-bound", "kind = \"full\"", "gamma = 1.0\na = [1.0, 1.0]\nhorizon = 1.0")).unwrap();
        let row = &out.table.rows[0];
        let c1 = row[1].as_f64().unwrap();
        assert!((c1 - 147.278).abs() < 1e-3);
        let expected = row[3].as_f64().unwrap() + row[4].as_f64().unwrap() / 2.0;
        assert!((row[5].as_f64().unwrap() - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn multi_row_tasks_have_digests() {
        let out = run_task(&scenario("lr", STRIPES, "energy = 20.0\nhorizon = 1.0")).unwrap();
        assert_eq!(out.digest().unwrap().rows.len(), 1);
        let out = run_task(&scenario("cost-bound", "kind = \"full\"", "gamma = 1.0\na = [1.0, 1.0]\nhorizon = [1.0, 2.0]")).unwrap();
        assert!(out.digest().is_err());
    }

    #[test]
    fn numerical_errors_propagate() {
        let err = run_task(&scenario("hum", "kind = \"empty\"", "energy = 5.0\nhorizon = 1.0")).err().unwrap();
        assert!(!err.to_string().is_empty());
    }
}
