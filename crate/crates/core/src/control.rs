//! Controllability Gramian, minimal-norm (HUM) controls, observability
//! constants, staged Lebeau–Robbiano synthesis and the explicit cost bound.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{cell_weights, SetDescription};
use crate::heat::HeatState;
use crate::linalg::{conjugate_gradient, dot, DenseMatrix};
use crate::scalar::Scalar;
use crate::spectral::{largest_generalized_eigenvalue, synthesize, weighted_gram, BandLimitedField, GridField};
use crate::strip_model::{FrequencyLattice, StripDomain};

/// How the time integral in the Gramian is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeQuadrature {
    /// Closed-form `∫₀^T e^{-s(μ_i+μ_j)} ds`.
    Exact,
    /// Trapezoidal rule with the given number of nodes (at least 2).
    Trapezoid(usize),
}

impl TimeQuadrature {
    /// `∫₀^T e^{-rate·s} ds` under this rule.
    pub fn weight<T: Scalar>(self, horizon: T, rate: T) -> T {
        match self {
            TimeQuadrature::Exact => {
                let x = horizon * rate;
                if x.abs() < T::lit(1e-8) {
                    horizon * (T::one() - x / T::lit(2.0))
                } else {
                    -(-x).exp_m1() / rate
                }
            }
            TimeQuadrature::Trapezoid(n) => {
                let n = n.max(2);
                let h = horizon / T::count(n - 1);
                let mut s = T::zero();
                for k in 0..n {
                    let w = if k == 0 || k == n - 1 { h / T::lit(2.0) } else { h };
                    s += w * (-rate * h * T::count(k)).exp();
                }
                s
            }
        }
    }
}

/// Truncated control system: basis, energies and the control-set Gram matrix.
#[derive(Debug, Clone)]
pub struct ControlModel<T> {
    domain: StripDomain<T>,
    lattice: Arc<FrequencyLattice<T>>,
    energies: Vec<T>,
    gram: DenseMatrix<T>,
    weights: Vec<T>,
    control_measure: T,
}

impl<T: Scalar> ControlModel<T> {
    pub fn new(domain: &StripDomain<T>, lattice: Arc<FrequencyLattice<T>>, set: &SetDescription<T>) -> Result<Self> {
        let weights = cell_weights(set, domain)?;
        Self::from_weights(domain, lattice, weights)
    }

    pub fn from_weights(domain: &StripDomain<T>, lattice: Arc<FrequencyLattice<T>>, weights: Vec<T>) -> Result<Self> {
        if weights.len() != domain.cell_count() {
            return Err(Error::DimensionMismatch {
                expected: domain.cell_count(),
                got: weights.len(),
            });
        }
        if lattice.is_empty() {
            return Err(Error::InvalidArgument("empty frequency lattice".into()));
        }
        // Synthesis checks the grid resolves every mode.
        synthesize(&BandLimitedField::zeros(domain, lattice.clone()), domain)?;
        let gram = weighted_gram(domain, &lattice, &weights);
        let energies = lattice.energies();
        let control_measure = weights.iter().copied().sum();
        Ok(Self {
            domain: domain.clone(),
            lattice,
            energies,
            gram,
            weights,
            control_measure,
        })
    }

    pub fn domain(&self) -> &StripDomain<T> {
        &self.domain
    }
    pub fn lattice(&self) -> &Arc<FrequencyLattice<T>> {
        &self.lattice
    }
    pub fn energies(&self) -> &[T] {
        &self.energies
    }
    /// `G_ij = ⟨χ_ω φ_i, φ_j⟩`.
    pub fn gram(&self) -> &DenseMatrix<T> {
        &self.gram
    }
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    /// Measure of the control set inside the model box.
    pub fn control_measure(&self) -> T {
        self.control_measure
    }
    pub fn len(&self) -> usize {
        self.energies.len()
    }
    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Dense Gramian `Λ_ij = G_ij ∫₀^T e^{-s(μ_i+μ_j)} ds`.
    pub fn gramian(&self, horizon: T, quadrature: TimeQuadrature) -> DenseMatrix<T> {
        let n = self.len();
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let g = self.gram[(i, j)];
                        if g == T::zero() {
                            T::zero()
                        } else {
                            g * quadrature.weight(horizon, self.energies[i] + self.energies[j])
                        }
                    })
                    .collect()
            })
            .collect();
        DenseMatrix::from_fn(n, |i, j| rows[i][j])
    }

    /// `Λ_T φ` without materializing the matrix.
    pub fn gramian_apply(&self, phi: &[T], horizon: T, quadrature: TimeQuadrature) -> Result<Vec<T>> {
        if phi.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: phi.len(),
            });
        }
        if quadrature == TimeQuadrature::Trapezoid(0) || quadrature == TimeQuadrature::Trapezoid(1) {
            return Err(Error::InvalidArgument("time quadrature needs at least 2 nodes".into()));
        }
        let out = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let row = self.gram.row(i);
                let mut s = T::zero();
                for (j, (&g, &p)) in row.iter().zip(phi).enumerate() {
                    if g != T::zero() && p != T::zero() {
                        s += g * quadrature.weight(horizon, self.energies[i] + self.energies[j]) * p;
                    }
                }
                s
            })
            .collect();
        Ok(out)
    }

    fn decay(&self, t: T) -> Vec<T> {
        self.energies.iter().map(|&mu| (-t * mu).exp()).collect()
    }

    fn check_state(&self, u: &HeatState<T>) -> Result<()> {
        if u.coefficients().len() != self.len() || **u.lattice() != *self.lattice {
            return Err(Error::InvalidArgument("state lattice differs from the control model".into()));
        }
        Ok(())
    }
}

/// Piece of a control: on `[start, start+duration]` the control is
/// `χ_ω e^{(start+duration−t)Δ} φ` with `φ` supported on `indices`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSegment<T> {
    pub start: T,
    pub duration: T,
    pub indices: Vec<usize>,
    pub adjoint: Vec<T>,
}

/// Control on `[0, T]` in adjoint form, with a uniform sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlFunction<T> {
    horizon: T,
    times: Vec<T>,
    segments: Vec<ControlSegment<T>>,
    norm: T,
}

impl<T: Scalar> ControlFunction<T> {
    fn new(horizon: T, nodes: usize, segments: Vec<ControlSegment<T>>, norm: T) -> Self {
        let nodes = nodes.max(2);
        let times = (0..nodes).map(|k| horizon * T::count(k) / T::count(nodes - 1)).collect();
        Self {
            horizon,
            times,
            segments,
            norm,
        }
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }
    pub fn times(&self) -> &[T] {
        &self.times
    }
    pub fn segments(&self) -> &[ControlSegment<T>] {
        &self.segments
    }
    /// `‖v‖_{L²((0,T)×ω)}`.
    pub fn norm(&self) -> T {
        self.norm
    }

    /// Coefficients of `e^{(end−t)Δ}φ` at time `t`, or `None` where the control is off.
    pub fn adjoint_at(&self, t: T, model: &ControlModel<T>) -> Option<Vec<T>> {
        let seg = self
            .segments
            .iter()
            .find(|s| t >= s.start && t <= s.start + s.duration)?;
        let mut c = vec![T::zero(); model.len()];
        let lag = seg.start + seg.duration - t;
        for (&i, &p) in seg.indices.iter().zip(&seg.adjoint) {
            c[i] = p * (-lag * model.energies[i]).exp();
        }
        Some(c)
    }

    /// Grid samples of the control at every time node. Cells straddling the
    /// boundary of ω carry the covered fraction.
    pub fn samples(&self, model: &ControlModel<T>) -> Result<Vec<GridField<T>>> {
        let vol = model.domain.cell_volume();
        self.times
            .iter()
            .map(|&t| match self.adjoint_at(t, model) {
                None => Ok(GridField {
                    values: vec![T::zero(); model.domain.cell_count()],
                }),
                Some(c) => {
                    let f = BandLimitedField::on_lattice(&model.domain, model.lattice.clone(), c)?;
                    let mut g = synthesize(&f, &model.domain)?;
                    for (v, &w) in g.values.iter_mut().zip(&model.weights) {
                        *v *= w / vol;
                    }
                    Ok(g)
                }
            })
            .collect()
    }

    /// Recomputes the norm from the stored adjoint data.
    pub fn recompute_norm(&self, model: &ControlModel<T>) -> T {
        self.segments
            .iter()
            .map(|s| {
                let lam = model.gramian(s.duration, TimeQuadrature::Exact).submatrix(&s.indices);
                dot(&s.adjoint, &lam.mul_vec(&s.adjoint))
            })
            .sum::<T>()
            .max(T::zero())
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumOptions {
    pub tol: f64,
    /// Defaults to ten times the basis size.
    pub max_iter: Option<usize>,
    pub quadrature: TimeQuadrature,
    /// Sampling nodes stored with the control.
    pub time_nodes: usize,
}

impl Default for HumOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            quadrature: TimeQuadrature::Exact,
            time_nodes: 128,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HumResult<T> {
    pub control: ControlFunction<T>,
    pub final_state: HeatState<T>,
    pub cost: T,
    /// `‖u(T)‖ / ‖u₀‖` (zero for zero data).
    pub relative_residual: T,
    pub iterations: usize,
}

fn solve_gramian<T: Scalar>(lam: &DenseMatrix<T>, b: &[T], tol: T, max_iter: usize) -> Result<(Vec<T>, usize)> {
    let diag = lam.diagonal();
    let out = conjugate_gradient(|x, y| lam.mul_vec_into(x, y), Some(&diag), b, tol, max_iter);
    if !out.converged {
        return Err(Error::GramianIllConditioned(format!(
            "conjugate gradients stopped at relative residual {:.3e} after {} iterations",
            out.relative_residual.as_f64(),
            out.iterations
        )));
    }
    Ok((out.solution, out.iterations))
}

/// Minimal-norm null control of `u₀` in time `horizon`.
pub fn hum_control<T: Scalar>(
    model: &ControlModel<T>,
    u0: &HeatState<T>,
    horizon: T,
    options: &HumOptions,
) -> Result<HumResult<T>> {
    model.check_state(u0)?;
    if !(horizon > T::zero()) {
        return Err(Error::NonpositiveTime(horizon.as_f64()));
    }
    if !(model.control_measure > T::zero()) {
        return Err(Error::GramianIllConditioned("control set has zero measure in the model box".into()));
    }
    let n = model.len();
    let free = u0.evolve(horizon)?;
    let b: Vec<T> = free.coefficients().iter().map(|&c| -c).collect();
    let lam = model.gramian(horizon, options.quadrature);
    let max_iter = options.max_iter.unwrap_or(10 * n);
    let (phi, iterations) = solve_gramian(&lam, &b, T::lit(options.tol), max_iter)?;

    // Exact Duhamel integral of the continuous control.
    let lam_exact = match options.quadrature {
        TimeQuadrature::Exact => lam,
        _ => model.gramian(horizon, TimeQuadrature::Exact),
    };
    let push = lam_exact.mul_vec(&phi);
    let mut final_state = free;
    final_state.add_scaled(T::one(), &push);
    let cost = dot(&phi, &push).max(T::zero()).sqrt();
    let u0n = u0.norm();
    let relative_residual = if u0n > T::zero() { final_state.norm() / u0n } else { T::zero() };
    let segment = ControlSegment {
        start: T::zero(),
        duration: horizon,
        indices: (0..n).collect(),
        adjoint: phi,
    };
    Ok(HumResult {
        control: ControlFunction::new(horizon, options.time_nodes, vec![segment], cost),
        final_state,
        cost,
        relative_residual,
        iterations,
    })
}

/// Smallest `C` with `‖e^{TΔ}g‖² ≤ C ∫₀^T ‖e^{tΔ}g‖²_{L²(ω)} dt` on the model.
pub fn empirical_observability_constant<T: Scalar>(
    model: &ControlModel<T>,
    horizon: T,
    quadrature: TimeQuadrature,
) -> Result<T> {
    if !(horizon > T::zero()) {
        return Err(Error::NonpositiveTime(horizon.as_f64()));
    }
    if !(model.control_measure > T::zero()) {
        return Err(Error::GramianIllConditioned("control set has zero measure in the model box".into()));
    }
    let lam = model.gramian(horizon, quadrature);
    let decay = model.decay(horizon);
    let n = model.len();
    let d2 = DenseMatrix::from_fn(n, |i, j| if i == j { decay[i] * decay[i] } else { T::zero() });
    largest_generalized_eigenvalue(&d2, &lam, T::epsilon() * T::lit(10.0)).ok_or_else(|| {
        Error::GramianIllConditioned("Gramian is not numerically positive definite".into())
    })
}

/// Constants of the explicit control-cost bound, optionally with measured values.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport<T> {
    pub c1: T,
    pub tau0: T,
    pub log_sqrt_c1: T,
    pub c2: T,
    pub horizon: T,
    pub log_ct_bound: T,
    pub empirical: Option<EmpiricalCost<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalCost<T> {
    pub observability_constant: T,
    pub achieved_cost: T,
    pub final_residual: T,
}

/// Constants `(c₁, T₀)` of the observability hypotheses, with `c₁ ≥ 3e` enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservabilityHypotheses<T> {
    pub c1: T,
    pub eta1: T,
    pub eta2: T,
    pub m: T,
    pub c2: T,
    /// Horizon up to which the dissipation estimate is used.
    pub t0: T,
}

impl<T: Scalar> ObservabilityHypotheses<T> {
    pub fn new(c1: T, t0: T) -> Result<Self> {
        if !(c1 >= T::lit(3.0) * T::E() * (T::one() - T::tiny_rel())) {
            return Err(Error::InvalidArgument(format!("c1 = {c1} is below 3e")));
        }
        Ok(Self {
            c1,
            eta1: T::lit(0.5),
            eta2: T::one(),
            m: T::one(),
            c2: T::one(),
            t0,
        })
    }
}

fn check_cost_inputs<T: Scalar>(gamma: T, a: &[T], k: T) -> Result<()> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(Error::InvalidGamma(gamma.as_f64()));
    }
    if !(k >= T::E() * (T::one() - T::epsilon())) {
        return Err(Error::InvalidUniversalConstant(k.as_f64()));
    }
    if a.is_empty() || a.iter().any(|&x| !(x > T::zero() && x.is_finite())) {
        return Err(Error::InvalidArgument("side lengths a must be positive and finite".into()));
    }
    Ok(())
}

/// `c₁ = 4K(‖a‖₁+d)·ln((2K)^d/γ)` for the spectral inequality on the strip.
pub fn spectral_rate<T: Scalar>(gamma: T, a: &[T], k: T) -> Result<T> {
    check_cost_inputs(gamma, a, k)?;
    let d = T::count(a.len());
    let l1: T = a.iter().copied().sum();
    Ok(T::lit(4.0) * k * (l1 + d) * (d * (T::lit(2.0) * k).ln() - gamma.ln()))
}

/// Explicit control-cost constants, with `log C_T ≤ log√C₁ + C₂/(2T)`.
pub fn cost_constants<T: Scalar>(gamma: T, a: &[T], k: T, horizon: T) -> Result<CostReport<T>> {
    if !(horizon > T::zero()) {
        return Err(Error::NonpositiveTime(horizon.as_f64()));
    }
    let c1 = spectral_rate(gamma, a, k)?;
    let tau0 = T::lit(2.0).powf(T::lit(2.5)) * T::lit(3.0) * c1;
    // C₁ = exp(144 c₁²/τ₀) = exp(6√2 c₁).
    let log_sqrt_c1 = T::lit(3.0) * T::SQRT_2() * c1;
    let c2 = T::lit(144.0) * c1 * c1;
    Ok(CostReport {
        c1,
        tau0,
        log_sqrt_c1,
        c2,
        horizon,
        log_ct_bound: log_sqrt_c1 + c2 / (T::lit(2.0) * horizon),
        empirical: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HConditions<T> {
    pub h1: T,
    /// `ln h₂`, since `h₂` overflows for small `τ`.
    pub log_h2: T,
    /// `max_τ h₁ = 1/(24 c₁² e)`.
    pub h1_max: T,
    pub ok: bool,
}

/// Evaluates `h₁(τ) ≤ 1/4`, `h₂(τ) ≥ 1` and `τ ≤ τ₀`.
pub fn h_conditions_check<T: Scalar>(c1: T, tau: T) -> Result<HConditions<T>> {
    if !(tau > T::zero()) {
        return Err(Error::NonpositiveTime(tau.as_f64()));
    }
    if !(c1 > T::zero()) {
        return Err(Error::InvalidArgument(format!("c1 must be positive, got {c1}")));
    }
    let a = T::lit(24.0) * c1 * c1;
    let h1 = (-a / tau).exp() / tau;
    let log_h2 = T::lit(144.0) * c1 * c1 / tau - tau.ln();
    let tau0 = T::lit(2.0).powf(T::lit(2.5)) * T::lit(3.0) * c1;
    Ok(HConditions {
        h1,
        log_h2,
        h1_max: T::one() / (a * T::E()),
        ok: h1 <= T::lit(0.25) && log_h2 >= T::zero() && tau <= tau0 * (T::one() + T::tiny_rel()),
    })
}

/// Dyadic schedule: energies `E₀·4^k`, interval lengths `T·2^{−(k+1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule<T> {
    pub e0: T,
    pub k_max: usize,
}

impl<T: Scalar> LrSchedule<T> {
    /// Default start just above the lowest mode.
    pub fn for_model(model: &ControlModel<T>) -> Self {
        let lowest = model.energies.iter().fold(T::infinity(), |m, &e| m.min(e));
        Self {
            e0: lowest + T::one(),
            k_max: 4,
        }
    }

    pub fn energy(&self, k: usize) -> T {
        self.e0 * T::lit(4.0).powi(k as i32)
    }

    pub fn duration(&self, horizon: T, k: usize) -> T {
        horizon * T::lit(0.5).powi(k as i32 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageRecord<T> {
    pub stage: usize,
    pub energy: T,
    pub start: T,
    pub duration: T,
    pub controlled_modes: usize,
    pub norm_before: T,
    pub norm_after_control: T,
    pub norm_after: T,
    pub cost: T,
}

#[derive(Debug, Clone)]
pub struct LrResult<T> {
    pub control: ControlFunction<T>,
    pub stages: Vec<StageRecord<T>>,
    pub final_state: HeatState<T>,
    pub total_cost: T,
    /// First stage after which every cost ratio is below one, with the largest such ratio.
    pub summability: Option<(usize, T)>,
    /// Whether `ln‖u_k‖` has nonnegative second differences.
    pub log_convex: bool,
}

/// Staged control: on the first half of each interval steer the low modes to
/// zero, then let the state dissipate freely.
pub fn lr_synthesize<T: Scalar>(
    model: &ControlModel<T>,
    u0: &HeatState<T>,
    horizon: T,
    schedule: &LrSchedule<T>,
    options: &HumOptions,
) -> Result<LrResult<T>> {
    model.check_state(u0)?;
    if !(horizon > T::zero()) {
        return Err(Error::NonpositiveTime(horizon.as_f64()));
    }
    if !(schedule.e0 > T::zero()) {
        return Err(Error::InvalidArgument("schedule energy E0 must be positive".into()));
    }
    if !(model.control_measure > T::zero()) {
        return Err(Error::GramianIllConditioned("control set has zero measure in the model box".into()));
    }
    let mut u = u0.clone();
    let mut start = T::zero();
    let mut stages = Vec::with_capacity(schedule.k_max + 1);
    let mut segments = Vec::new();
    let mut cost_sq = T::zero();
    for k in 0..=schedule.k_max {
        let energy = schedule.energy(k);
        let duration = schedule.duration(horizon, k);
        let tau = duration / T::lit(2.0);
        let low: Vec<usize> = (0..model.len()).filter(|&i| model.energies[i] <= energy).collect();
        let norm_before = u.norm();
        let drifted = u.evolve(tau)?;
        let mut after_control = drifted.clone();
        let mut stage_cost = T::zero();
        if !low.is_empty() {
            let b: Vec<T> = low.iter().map(|&i| -drifted.coefficients()[i]).collect();
            if b.iter().any(|&x| x != T::zero()) {
                let lam = model.gramian(tau, options.quadrature);
                let lam_low = lam.submatrix(&low);
                let max_iter = options.max_iter.unwrap_or(10 * low.len());
                let (phi, _) = solve_gramian(&lam_low, &b, T::lit(options.tol), max_iter).map_err(|e| {
                    Error::StageFailure {
                        stage: k,
                        reason: e.to_string(),
                    }
                })?;
                let lam_exact = match options.quadrature {
                    TimeQuadrature::Exact => lam,
                    _ => model.gramian(tau, TimeQuadrature::Exact),
                };
                let mut push = vec![T::zero(); model.len()];
                for (i, p) in push.iter_mut().enumerate() {
                    *p = low.iter().zip(&phi).map(|(&j, &f)| lam_exact[(i, j)] * f).sum();
                }
                let low_push: Vec<T> = low.iter().map(|&i| push[i]).collect();
                stage_cost = dot(&phi, &low_push).max(T::zero()).sqrt();
                after_control.add_scaled(T::one(), &push);
                segments.push(ControlSegment {
                    start,
                    duration: tau,
                    indices: low.clone(),
                    adjoint: phi,
                });
            }
        }
        let norm_after_control = after_control.norm();
        u = after_control.evolve(duration - tau)?;
        let norm_after = u.norm();
        let previous = stages.last().map_or(u0.norm(), |s: &StageRecord<T>| s.norm_after);
        if norm_after >= previous && !(norm_after == T::zero() && previous == T::zero()) {
            return Err(Error::StageNormsNotDecreasing {
                stage: k,
                previous: previous.as_f64(),
                current: norm_after.as_f64(),
            });
        }
        cost_sq += stage_cost * stage_cost;
        stages.push(StageRecord {
            stage: k,
            energy,
            start,
            duration,
            controlled_modes: low.len(),
            norm_before,
            norm_after_control,
            norm_after,
            cost: stage_cost,
        });
        start += duration;
    }
    // Free evolution over the unscheduled remainder of [0, T].
    let final_state = u.evolve((horizon - start).max(T::zero()))?;
    let total_cost = cost_sq.sqrt();
    Ok(LrResult {
        control: ControlFunction::new(horizon, options.time_nodes, segments, total_cost),
        summability: summability(&stages),
        log_convex: is_log_convex(u0.norm(), &stages),
        stages,
        final_state,
        total_cost,
    })
}

fn summability<T: Scalar>(stages: &[StageRecord<T>]) -> Option<(usize, T)> {
    let ratios: Vec<T> = stages
        .windows(2)
        .map(|w| if w[0].cost > T::zero() { w[1].cost / w[0].cost } else { T::zero() })
        .collect();
    (0..=ratios.len()).find_map(|k1| {
        let tail = &ratios[k1..];
        if tail.iter().all(|&r| r < T::one()) {
            Some((k1, tail.iter().fold(T::zero(), |m, &r| m.max(r))))
        } else {
            None
        }
    })
}

fn is_log_convex<T: Scalar>(initial: T, stages: &[StageRecord<T>]) -> bool {
    let mut logs = vec![initial.ln()];
    logs.extend(stages.iter().map(|s| s.norm_after.ln()));
    if logs.iter().any(|l| !l.is_finite()) {
        return false;
    }
    logs.windows(3)
        .all(|w| w[2] - T::lit(2.0) * w[1] + w[0] >= -T::lit(1e-9) * w[1].abs().max(T::one()))
}
