//! Necessity side: thin-parallelepiped sequences, the Miller divergence
//! functional, the thickness-equivalence probe and the Dirichlet witness.

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::geometry::{estimate_thickness, model_box, search_min_ratio, Interval, Parallelepiped, SetDescription, TieBreak};
use crate::heat::{kernel_cube_series, Cube, KernelParams};
use crate::scalar::{log_add_exp, Scalar};
use crate::strip_model::StripDomain;

/// One element of the thin-parallelepiped sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct QnEntry<T> {
    pub n: usize,
    pub q: Parallelepiped<T>,
    /// `|S ∩ Q_n| / |Q_n|`.
    pub ratio: T,
    /// Whether `ratio < 1/n²`.
    pub thin: bool,
}

/// For each `n ≤ n_max`, the parallelepiped of sides `(2πL, …, 2πL, n)`
/// centered on the strip's axis that minimizes `|S ∩ Q|/|Q|`.
pub fn qn_sequence<T: Scalar>(
    set: &SetDescription<T>,
    domain: &StripDomain<T>,
    n_max: usize,
    step: T,
) -> Result<Vec<QnEntry<T>>> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let d = domain.dim();
    set.validate(d)?;
    let w = domain.width();
    let x = domain.half_width();
    if T::count(n_max) > T::lit(2.0) * x {
        return Err(Error::SearchRangeExceeded(format!(
            "n = {n_max} exceeds the longitudinal search range 2X = {}",
            T::lit(2.0) * x
        )));
    }
    (1..=n_max)
        .map(|n| {
            let len = T::count(n);
            let mut sides = vec![w; d - 1];
            sides.push(len);
            let mut ranges = vec![Interval::new(w / T::lit(2.0), w / T::lit(2.0)); d - 1];
            let half = len / T::lit(2.0);
            ranges.push(Interval::new(-x + half, x - half));
            let (ratio, q) = search_min_ratio(set, &sides, &ranges, step, TieBreak::NearestOrigin)?;
            Ok(QnEntry {
                n,
                q,
                ratio,
                thin: ratio < T::one() / T::count(n * n),
            })
        })
        .collect()
}

/// `ln erfc(x)`, accurate far into the tail.
fn log_erfc(x: f64) -> f64 {
    if x < 25.0 {
        erfc(x).ln()
    } else {
        // Asymptotic series erfc(x) ≈ e^{-x²}/(x√π) (1 − 1/(2x²) + 3/(4x⁴)).
        let x2 = x * x;
        -x2 - (x * std::f64::consts::PI.sqrt()).ln() + (1.0 - 0.5 / x2 + 0.75 / (x2 * x2)).ln()
    }
}

/// `ln ∫_lo^hi e^{-(s−y)²/(2T)} ds`, stable when the interval is far from `y`.
fn log_gauss_interval(lo: f64, hi: f64, y: f64, t: f64) -> f64 {
    if !(hi > lo) {
        return f64::NEG_INFINITY;
    }
    let s = (2.0 * t).sqrt();
    let pref = (std::f64::consts::PI * t / 2.0).ln() / 2.0;
    let (a, b) = ((lo - y) / s, (hi - y) / s);
    // ∫ = √(πT/2)·(erf(b) − erf(a)); use whichever tail form avoids cancellation.
    if a >= 0.0 {
        let (la, lb) = (log_erfc(a), log_erfc(b));
        pref + la + (-(lb - la).exp()).ln_1p()
    } else if b <= 0.0 {
        let (la, lb) = (log_erfc(-b), log_erfc(-a));
        pref + la + (-(lb - la).exp()).ln_1p()
    } else {
        pref + (2.0 - erfc(-a) - erfc(b)).ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MillerEvaluation<T> {
    pub y: Vec<T>,
    pub t: T,
    pub kappa: T,
    /// `∫_{S ∩ model box} e^{-‖x−y‖²/(2T)} dx`.
    pub integral: T,
    pub log_integral: T,
    /// Upper bound on the Gaussian mass of the strip outside the model box.
    pub tail_bound: T,
    pub d_b: T,
    /// Functional value; `+∞` when the integral vanishes.
    pub value: T,
}

/// Distance from `y` to the lateral boundary of the strip.
pub fn boundary_distance<T: Scalar>(y: &[T], domain: &StripDomain<T>) -> T {
    let w = domain.width();
    y[..domain.dim() - 1]
        .iter()
        .fold(T::infinity(), |m, &v| m.min(v).min(w - v))
}

/// `−2T ln ∫_S e^{-‖x−y‖²/(2T)} dx − κ(π²d²/4)(T/d_b)²`.
pub fn miller_functional<T: Scalar>(
    set: &SetDescription<T>,
    y: &[T],
    t: T,
    kappa: T,
    domain: &StripDomain<T>,
) -> Result<MillerEvaluation<T>> {
    let d = domain.dim();
    if y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: y.len(),
        });
    }
    if !(t > T::zero()) {
        return Err(Error::NonpositiveTime(t.as_f64()));
    }
    if !(kappa > T::one()) {
        return Err(Error::InvalidArgument(format!("kappa must exceed 1, got {kappa}")));
    }
    if !domain.contains_transverse(&y[..d - 1]) {
        return Err(Error::InvalidArgument(format!("point {y:?} lies outside the strip")));
    }
    set.validate(d)?;
    let window = model_box(domain);
    let cells = set.decompose(&window);
    let tf = t.as_f64();
    let yf: Vec<f64> = y.iter().map(|v| v.as_f64()).collect();
    let log_integral = cells
        .par_iter()
        .map(|b| {
            b.intervals
                .iter()
                .zip(&yf)
                .map(|(iv, &yc)| log_gauss_interval(iv.lo.as_f64(), iv.hi.as_f64(), yc, tf))
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, log_add_exp);

    // Mass of the strip beyond |x_d| > X, bounded by full transverse lines.
    let x = domain.half_width().as_f64();
    let s = (2.0 * tf).sqrt();
    let yd = yf[d - 1];
    let lateral = (std::f64::consts::PI * tf / 2.0).sqrt() * (erfc((x - yd) / s) + erfc((x + yd) / s));
    let tail_bound = lateral * (2.0 * std::f64::consts::PI * tf).sqrt().powi(d as i32 - 1);

    let d_b = boundary_distance(y, domain).min(t * T::PI() * T::PI() * T::count(d) / T::lit(4.0));
    let penalty = kappa * T::PI() * T::PI() * T::count(d * d) / T::lit(4.0) * (t / d_b) * (t / d_b);
    let log_i = T::lit(log_integral);
    let value = if log_integral == f64::NEG_INFINITY {
        T::infinity()
    } else {
        -T::lit(2.0) * t * log_i - penalty
    };
    Ok(MillerEvaluation {
        y: y.to_vec(),
        t,
        kappa,
        integral: T::lit(log_integral.exp()),
        log_integral: log_i,
        tail_bound: T::lit(tail_bound),
        d_b,
        value,
    })
}

/// `−2T ln(e^{−D²/(2T)} γ Π a_j)` with `D = ‖a‖₂`: the upper bound on the
/// functional's first term for a `(γ, a)`-thick set.
pub fn thick_set_bound<T: Scalar>(gamma: T, sides: &[T], t: T) -> Result<T> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(Error::InvalidGamma(gamma.as_f64()));
    }
    if !(t > T::zero()) {
        return Err(Error::NonpositiveTime(t.as_f64()));
    }
    let diag2: T = sides.iter().map(|&a| a * a).sum();
    let vol_log: T = sides.iter().map(|&a| a.ln()).sum();
    Ok(diag2 - T::lit(2.0) * t * (gamma.ln() + vol_log))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Functional stays below the explicit thick-set bound.
    BoundedConsistent,
    /// Functional grows past the threshold with no plateau.
    DivergenceConsistent,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::BoundedConsistent => "bounded-consistent (thick)",
            Verdict::DivergenceConsistent => "divergence-consistent (non-thick)",
            Verdict::Inconclusive => "inconclusive at this n_max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow<T> {
    pub n: usize,
    pub center: Vec<T>,
    pub ratio: T,
    pub functional: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport<T> {
    pub rows: Vec<ProbeRow<T>>,
    /// Thickness ratio found at the probe sides, and the resulting bound.
    pub gamma_est: T,
    pub bound: Option<T>,
    pub verdict: Verdict,
    /// Whether the functional is increasing from some `n` on.
    pub eventually_increasing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions<T> {
    pub n_max: usize,
    pub kappa: T,
    /// Parallelepiped sides used to certify thickness for the bound.
    pub sides: Vec<T>,
    /// Search step for both the thickness and the `Q_n` searches.
    pub step: T,
    /// Divergence is declared once the functional exceeds `threshold` times its `n = 1` value.
    pub threshold: T,
}

/// Runs the functional along the `Q_n` centers and classifies the behavior.
pub fn thickness_equivalence_probe<T: Scalar>(
    set: &SetDescription<T>,
    t: T,
    domain: &StripDomain<T>,
    options: &ProbeOptions<T>,
) -> Result<ProbeReport<T>> {
    let qs = qn_sequence(set, domain, options.n_max, options.step)?;
    let rows: Vec<ProbeRow<T>> = qs
        .par_iter()
        .map(|q| {
            let m = miller_functional(set, &q.q.center, t, options.kappa, domain)?;
            Ok(ProbeRow {
                n: q.n,
                center: q.q.center.clone(),
                ratio: q.ratio,
                functional: m.value,
            })
        })
        .collect::<Result<_>>()?;
    let cert = estimate_thickness(set, &options.sides, domain, options.step)?;
    let gamma_est = cert.gamma_est;
    let bound = if gamma_est > T::zero() {
        Some(thick_set_bound(gamma_est, &options.sides, t)?)
    } else {
        None
    };
    let values: Vec<T> = rows.iter().map(|r| r.functional).collect();
    let eventually_increasing = eventually_increasing(&values);
    let first = values[0];
    let last = *values.last().unwrap();
    let grew = last >= first + (options.threshold - T::one()) * first.abs().max(T::one());
    let tail = &values[values.len().saturating_sub(3)..];
    let no_plateau = tail.windows(2).all(|w| w[1] > w[0] || w[1] == T::infinity());
    let bounded = bound.is_some_and(|b| values.iter().all(|&v| v <= b));
    let verdict = if bounded {
        Verdict::BoundedConsistent
    } else if grew && no_plateau {
        Verdict::DivergenceConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(ProbeReport {
        rows,
        gamma_est,
        bound,
        verdict,
        eventually_increasing,
    })
}

fn eventually_increasing<T: Scalar>(values: &[T]) -> bool {
    if values.len() < 2 {
        return false;
    }
    // Longest strictly increasing suffix must cover at least half the sweep.
    let mut start = values.len() - 1;
    while start > 0 && values[start] > values[start - 1] {
        start -= 1;
    }
    values.len() - start >= values.len().div_ceil(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessReport<T> {
    /// `(2/(πL))^d e^{−2(1+T)d/L²}`.
    pub value: T,
    /// Midpoint quadrature of `∫_W |K_W(1+T, x, x_n)|² dx`.
    pub quadrature: T,
    pub holds: bool,
}

/// Lower bound on the squared norm of the evolved kernel data centered at `x_n`.
pub fn dirichlet_lower_witness<T: Scalar>(
    center: &[T],
    t: T,
    domain: &StripDomain<T>,
    params: &KernelParams<T>,
    nodes_per_axis: usize,
) -> Result<WitnessReport<T>> {
    if !(t >= T::zero()) {
        return Err(Error::NegativeTime(t.as_f64()));
    }
    let cube = Cube::in_strip(center.to_vec(), domain)?;
    let l = domain.scale();
    let d = domain.dim();
    let tt = T::one() + t;
    let value = (T::lit(2.0) / (T::PI() * l)).powi(d as i32) * (-T::lit(2.0) * tt * T::count(d) / (l * l)).exp();

    let m = nodes_per_axis.max(2);
    let h = cube.side / T::count(m);
    let total = m.pow(d as u32);
    let sum: T = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut x = vec![T::zero(); d];
            for j in (0..d).rev() {
                let i = flat % m;
                flat /= m;
                x[j] = center[j] - cube.side / T::lit(2.0) + (T::count(i) + T::lit(0.5)) * h;
            }
            let k = kernel_cube_series(tt, &x, center, &cube, params)?;
            Ok(k * k)
        })
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .sum();
    let quadrature = sum * h.powi(d as i32);
    Ok(WitnessReport {
        value,
        quadrature,
        holds: value <= quadrature * (T::one() + T::lit(1e-9)),
    })
}
