//! Heat semigroup in spectral form and heat kernels on the strip and on cubes.

use std::sync::Arc;

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::BandLimitedField;
use crate::strip_model::{Boundary, FrequencyLattice, StripDomain};

/// Solution of the free heat equation, stored as spectral coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatState<T> {
    lattice: Arc<FrequencyLattice<T>>,
    coefficients: Vec<T>,
    time: T,
}

impl<T: Scalar> HeatState<T> {
    pub fn new(lattice: Arc<FrequencyLattice<T>>, coefficients: Vec<T>) -> Result<Self> {
        if coefficients.len() != lattice.len() {
            return Err(Error::DimensionMismatch {
                expected: lattice.len(),
                got: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("state coefficients must be finite".into()));
        }
        Ok(Self {
            lattice,
            coefficients,
            time: T::zero(),
        })
    }

    pub fn zeros(lattice: Arc<FrequencyLattice<T>>) -> Self {
        let n = lattice.len();
        Self {
            lattice,
            coefficients: vec![T::zero(); n],
            time: T::zero(),
        }
    }

    pub fn from_field(field: &BandLimitedField<T>) -> Self {
        Self {
            lattice: field.lattice().clone(),
            coefficients: field.coefficients().to_vec(),
            time: T::zero(),
        }
    }

    pub fn to_field(&self, domain: &StripDomain<T>) -> Result<BandLimitedField<T>> {
        BandLimitedField::on_lattice(domain, self.lattice.clone(), self.coefficients.clone())
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice<T>> {
        &self.lattice
    }
    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }
    pub fn time(&self) -> T {
        self.time
    }

    pub fn norm(&self) -> T {
        self.coefficients.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    /// `e^{tΔ}` applied mode by mode.
    pub fn evolve(&self, t: T) -> Result<Self> {
        if t < T::zero() || t.is_nan() {
            return Err(Error::NegativeTime(t.as_f64()));
        }
        let coefficients = self
            .lattice
            .iter()
            .zip(&self.coefficients)
            .map(|(e, &c)| c * (-t * e.energy).exp())
            .collect();
        Ok(Self {
            lattice: self.lattice.clone(),
            coefficients,
            time: self.time + t,
        })
    }

    /// Keeps only modes with energy at most `energy` (the lattice is unchanged).
    pub fn low_pass(&self, energy: T) -> Self {
        self.filter(|e| e <= energy)
    }

    /// Keeps only modes with energy above `energy`.
    pub fn high_pass(&self, energy: T) -> Self {
        self.filter(|e| e > energy)
    }

    fn filter(&self, keep: impl Fn(T) -> bool) -> Self {
        let coefficients = self
            .lattice
            .iter()
            .zip(&self.coefficients)
            .map(|(e, &c)| if keep(e.energy) { c } else { T::zero() })
            .collect();
        Self {
            lattice: self.lattice.clone(),
            coefficients,
            time: self.time,
        }
    }

    pub fn add_scaled(&mut self, alpha: T, other: &[T]) {
        for (c, &o) in self.coefficients.iter_mut().zip(other) {
            *c += alpha * o;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Compares `‖(1−π_E)e^{tΔ}g‖` with `e^{−tE}‖g‖`.
pub fn dissipation_check<T: Scalar>(g: &HeatState<T>, energy: T, t: T) -> Result<DissipationCheck<T>> {
    if !(t > T::zero()) {
        return Err(Error::NonpositiveTime(t.as_f64()));
    }
    let lhs = g.evolve(t)?.high_pass(energy).norm();
    let rhs = (-t * energy).exp() * g.norm();
    Ok(DissipationCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (T::one() + T::lit(1e-12)),
    })
}

/// Truncation and Gaussian-bound constants for kernel evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams<T> {
    /// Reflections per side in the method of images.
    pub image_count: usize,
    /// Eigen-series terms per axis on a cube.
    pub series_count: usize,
    /// Dirichlet upper bound `c t^{-d/2} e^{-r²/6t}`.
    pub c: T,
    /// Neumann upper bound `C₁/(c(d) t^{d/2}) e^{-c₁ r²/t}`.
    pub c1: T,
    pub big_c1: T,
    /// Neumann lower bound `C₂/(c(d) t^{d/2}) e^{-c₂ r²/t}`.
    pub c2: T,
    pub big_c2: T,
}

impl<T: Scalar> Default for KernelParams<T> {
    fn default() -> Self {
        Self {
            image_count: 8,
            series_count: 64,
            c: T::one(),
            c1: T::lit(0.125),
            big_c1: T::one(),
            c2: T::lit(0.25),
            big_c2: T::lit(0.1),
        }
    }
}

impl<T: Scalar> KernelParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.image_count < 1 || self.series_count < 1 {
            return Err(Error::InvalidArgument("image_count and series_count must be at least 1".into()));
        }
        for (name, v) in [
            ("c", self.c),
            ("c1", self.c1),
            ("C1", self.big_c1),
            ("c2", self.c2),
            ("C2", self.big_c2),
        ] {
            if !(v > T::zero()) {
                return Err(Error::InvalidArgument(format!("kernel constant {name} must be positive")));
            }
        }
        Ok(())
    }

    /// Bound on the relative error from truncating the image sum on an
    /// interval of the given width.
    pub fn image_truncation_bound(&self, width: T, t: T) -> T {
        let s = width * T::count(self.image_count);
        (-(s * s) / (T::lit(4.0) * t)).exp()
    }

    /// Bound on the dropped tail of one cube eigen-series axis.
    pub fn series_tail_bound(&self, scale: T, t: T) -> T {
        let k = T::count(self.series_count + 1);
        let rate = t / (scale * scale);
        // Σ_{j>N} e^{−rate j²} ≤ e^{−rate (N+1)²} / (1 − e^{−rate (2N+3)}).
        let lead = (-rate * k * k).exp();
        lead / (T::one() - (-rate * (T::lit(2.0) * k + T::one())).exp())
    }
}

/// Free one-dimensional heat kernel.
pub fn gaussian_1d<T: Scalar>(t: T, r: T) -> T {
    (-(r * r) / (T::lit(4.0) * t)).exp() / (T::lit(4.0) * T::PI() * t).sqrt()
}

/// Heat kernel on `(0, width)` by the method of images.
pub fn interval_kernel<T: Scalar>(t: T, x: T, y: T, width: T, boundary: Boundary, images: usize) -> T {
    let images = images as i64;
    let mut sum = T::zero();
    match boundary {
        Boundary::Periodic => {
            for k in -images..=images {
                sum += gaussian_1d(t, x - y + T::lit(k as f64) * width);
            }
        }
        Boundary::Dirichlet | Boundary::Neumann => {
            let sign = if boundary == Boundary::Dirichlet { -T::one() } else { T::one() };
            let period = T::lit(2.0) * width;
            for k in -images..=images {
                let shift = T::lit(k as f64) * period;
                sum += gaussian_1d(t, x - y + shift) + sign * gaussian_1d(t, x + y + shift);
            }
        }
    }
    sum
}

/// Heat kernel of the strip: product of transverse interval kernels and the
/// free kernel along the unbounded axis.
pub fn kernel_strip<T: Scalar>(t: T, x: &[T], y: &[T], domain: &StripDomain<T>, params: &KernelParams<T>) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::NonpositiveTime(t.as_f64()));
    }
    let d = domain.dim();
    if x.len() != d || y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if x.len() != d { x.len() } else { y.len() },
        });
    }
    let w = domain.width();
    let mut k = gaussian_1d(t, x[d - 1] - y[d - 1]);
    for j in 0..d - 1 {
        k *= interval_kernel(t, x[j], y[j], w, domain.boundary(), params.image_count);
    }
    Ok(k)
}

/// Axis-aligned cube given by center and side.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube<T> {
    pub center: Vec<T>,
    pub side: T,
}

impl<T: Scalar> Cube<T> {
    /// Cube of side `πL` centered at `center`, which must fit transversally.
    pub fn in_strip(center: Vec<T>, domain: &StripDomain<T>) -> Result<Self> {
        if center.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: center.len(),
            });
        }
        let side = T::PI() * domain.scale();
        let half = side / T::lit(2.0);
        let slack = T::tiny_rel() * domain.width();
        for &c in &center[..domain.dim() - 1] {
            if c - half < -slack || c + half > domain.width() + slack {
                return Err(Error::CubeDoesNotFit(format!(
                    "side {side} at transverse center {c} leaves (0, {})",
                    domain.width()
                )));
            }
        }
        Ok(Self { center, side })
    }

    pub fn contains(&self, x: &[T]) -> bool {
        let half = self.side / T::lit(2.0);
        let slack = T::tiny_rel() * self.side;
        x.len() == self.center.len()
            && x
                .iter()
                .zip(&self.center)
                .all(|(&p, &c)| (p - c).abs() <= half + slack)
    }

    /// Dirichlet eigenvalue `‖k‖²π²/side²` of the cube.
    pub fn eigenvalue(&self, k: &[usize]) -> T {
        let s = T::PI() / self.side;
        k.iter().map(|&j| T::count(j * j)).sum::<T>() * s * s
    }

    /// Normalized Dirichlet eigenfunction.
    pub fn eigenfunction(&self, k: &[usize], x: &[T]) -> T {
        let norm = (T::lit(2.0) / self.side).sqrt();
        k.iter()
            .zip(x.iter().zip(&self.center))
            .map(|(&j, (&p, &c))| {
                let s = p - c + self.side / T::lit(2.0);
                norm * (T::count(j) * T::PI() * s / self.side).sin()
            })
            .fold(T::one(), |acc, v| acc * v)
    }
}

/// Truncated Dirichlet eigen-series of the heat kernel on a cube.
pub fn kernel_cube_series<T: Scalar>(t: T, x: &[T], y: &[T], cube: &Cube<T>, params: &KernelParams<T>) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::NonpositiveTime(t.as_f64()));
    }
    for p in [x, y] {
        if !cube.contains(p) {
            return Err(Error::PointOutsideCube(format!("{p:?}")));
        }
    }
    // The series factorizes over axes.
    let mut total = T::one();
    let a = cube.side;
    let w = T::PI() / a;
    for j in 0..cube.center.len() {
        let sx = x[j] - cube.center[j] + a / T::lit(2.0);
        let sy = y[j] - cube.center[j] + a / T::lit(2.0);
        let mut axis = T::zero();
        for k in 1..=params.series_count {
            let kk = T::count(k) * w;
            axis += (-t * kk * kk).exp() * (kk * sx).sin() * (kk * sy).sin();
        }
        total *= T::lit(2.0) / a * axis;
    }
    Ok(total)
}

/// Volume of the Euclidean unit ball in dimension `d`.
pub fn unit_ball_volume<T: Scalar>(d: usize) -> T {
    let h = d as f64 / 2.0;
    T::lit(std::f64::consts::PI.powf(h) / gamma(h + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichPoint<T> {
    /// Lower Gaussian bound, zero when none applies.
    pub lower: T,
    pub value: T,
    pub upper: T,
    pub holds: bool,
}

/// Evaluates the Gaussian bounds that apply to the domain's boundary condition.
///
/// Dirichlet: `0 ≤ K ≤ c t^{-d/2} e^{-r²/6t}`. Otherwise the two-sided
/// bound with `(c₁, C₁)` above and `(c₂, C₂)` below.
pub fn gaussian_sandwich_check<T: Scalar>(
    t: T,
    x: &[T],
    y: &[T],
    domain: &StripDomain<T>,
    params: &KernelParams<T>,
) -> Result<SandwichPoint<T>> {
    params.validate()?;
    let value = kernel_strip(t, x, y, domain, params)?;
    let d = domain.dim();
    let r2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let td = t.powf(T::count(d) / T::lit(2.0));
    let (lower, upper) = match domain.boundary() {
        Boundary::Dirichlet => (T::zero(), params.c / td * (-r2 / (T::lit(6.0) * t)).exp()),
        _ => {
            let cd = unit_ball_volume::<T>(d);
            (
                params.big_c2 / (cd * td) * (-params.c2 * r2 / t).exp(),
                params.big_c1 / (cd * td) * (-params.c1 * r2 / t).exp(),
            )
        }
    };
    Ok(SandwichPoint {
        lower,
        value,
        upper,
        holds: lower <= value && value <= upper,
    })
}

/// Sample point `(t, x, y)` for kernel sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample<T> {
    pub t: T,
    pub x: Vec<T>,
    pub y: Vec<T>,
}

/// Minimal (upper) and maximal (lower) Gaussian constants over a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFit<T> {
    /// Smallest `c` in the Dirichlet upper bound (zero for other boundaries).
    pub c: T,
    /// Smallest `C₁` for the configured `c₁` (zero for Dirichlet).
    pub big_c1: T,
    /// Largest `C₂` for the configured `c₂` (zero for Dirichlet).
    pub big_c2: T,
    /// Largest on-diagonal value of `K t^{d/2}`.
    pub diagonal_floor: T,
}

pub fn fit_gaussian_constants<T: Scalar>(
    samples: &[KernelSample<T>],
    domain: &StripDomain<T>,
    params: &KernelParams<T>,
) -> Result<GaussianFit<T>> {
    params.validate()?;
    let d = domain.dim();
    let cd = unit_ball_volume::<T>(d);
    let rows: Vec<(T, T, T, T)> = samples
        .par_iter()
        .map(|s| {
            let k = kernel_strip(s.t, &s.x, &s.y, domain, params)?;
            let r2: T = s.x.iter().zip(&s.y).map(|(&a, &b)| (a - b) * (a - b)).sum();
            let td = s.t.powf(T::count(d) / T::lit(2.0));
            let diag = if r2 == T::zero() { k * td } else { T::zero() };
            Ok(match domain.boundary() {
                Boundary::Dirichlet => (k * td * (r2 / (T::lit(6.0) * s.t)).exp(), T::zero(), T::infinity(), diag),
                _ => (
                    T::zero(),
                    k * cd * td * (params.c1 * r2 / s.t).exp(),
                    k * cd * td * (params.c2 * r2 / s.t).exp(),
                    diag,
                ),
            })
        })
        .collect::<Result<_>>()?;
    let mut fit = GaussianFit {
        c: T::zero(),
        big_c1: T::zero(),
        big_c2: T::infinity(),
        diagonal_floor: T::zero(),
    };
    for (c, c1, c2, diag) in rows {
        fit.c = fit.c.max(c);
        fit.big_c1 = fit.big_c1.max(c1);
        fit.big_c2 = fit.big_c2.min(c2);
        fit.diagonal_floor = fit.diagonal_floor.max(diag);
    }
    if domain.boundary() == Boundary::Dirichlet || samples.is_empty() {
        fit.big_c2 = T::zero();
    }
    Ok(fit)
}
