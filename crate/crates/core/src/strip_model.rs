//! Discretized strip `(0, 2πL)^{d-1} × ℝ`, its transverse eigenbasis and the
//! truncated frequency lattice shared by every other module.
//!
//! The unbounded axis is modeled as the periodic interval `[-X, X)` with
//! longitudinal frequencies `ξ_m = π m / X`. Longitudinal modes use the real
//! Fourier basis (`m > 0` cosine, `m < 0` sine, `m = 0` constant) so all
//! coefficient tables stay real.

use std::collections::HashMap;
use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Transverse boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Dirichlet,
    Neumann,
    /// Periodic cross-section: the real exponential (Fourier) basis.
    Periodic,
}

impl Boundary {
    /// Smallest admissible transverse index along one axis.
    pub fn min_index(self, cutoff: i64) -> i64 {
        match self {
            Boundary::Dirichlet => 1,
            Boundary::Neumann => 0,
            Boundary::Periodic => -cutoff,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
            Boundary::Periodic => "periodic",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(Boundary::Dirichlet),
            "neumann" | "n" => Ok(Boundary::Neumann),
            "periodic" | "p" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidDomain(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Raw domain parameters, validated by [`build_domain`].
#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig<T> {
    pub dim: usize,
    pub scale: T,
    pub boundary: Boundary,
    pub half_width: T,
    pub transverse_cutoff: usize,
    pub longitudinal_cutoff: usize,
    pub step: T,
}

/// Validated discretized strip.
#[derive(Debug, Clone, PartialEq)]
pub struct StripDomain<T> {
    dim: usize,
    scale: T,
    boundary: Boundary,
    half_width: T,
    transverse_cutoff: usize,
    longitudinal_cutoff: usize,
    step: T,
    transverse_cells: usize,
    longitudinal_cells: usize,
}

/// Validates the configuration and derives the quadrature grid.
///
/// The nominal step `h` is adjusted per axis to the nearest step that tiles
/// the axis exactly (`2πL / ⌈2πL/h⌉` transversally, `2X / ⌈2X/h⌉`
/// longitudinally).
pub fn build_domain<T: Scalar>(config: &DomainConfig<T>) -> Result<StripDomain<T>> {
    if config.dim < 2 {
        return Err(Error::InvalidDomain(format!(
            "dimension must be at least 2, got {}",
            config.dim
        )));
    }
    if !(config.half_width > T::zero()) || !config.half_width.is_finite() {
        return Err(Error::NonpositiveTruncation(config.half_width.as_f64()));
    }
    if !(config.scale > T::zero()) || !config.scale.is_finite() {
        return Err(Error::InvalidDomain(format!(
            "nonpositive scale L = {}",
            config.scale
        )));
    }
    if !(config.step > T::zero()) || !config.step.is_finite() {
        return Err(Error::InvalidDomain(format!(
            "nonpositive quadrature step h = {}",
            config.step
        )));
    }
    if config.transverse_cutoff < 1 || config.longitudinal_cutoff < 1 {
        return Err(Error::InvalidDomain(
            "mode cutoffs must be at least 1".to_string(),
        ));
    }
    let width = T::TAU() * config.scale;
    let length = T::lit(2.0) * config.half_width;
    if config.step > width || config.step > length {
        return Err(Error::InvalidDomain(format!(
            "quadrature step h = {} exceeds an axis extent",
            config.step
        )));
    }
    let cells = |extent: T| -> usize {
        let ratio = extent / config.step;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= T::lit(1e-9) * ratio {
            nearest.to_usize().unwrap_or(1)
        } else {
            ratio.ceil().to_usize().unwrap_or(1)
        }
    };
    Ok(StripDomain {
        dim: config.dim,
        scale: config.scale,
        boundary: config.boundary,
        half_width: config.half_width,
        transverse_cutoff: config.transverse_cutoff,
        longitudinal_cutoff: config.longitudinal_cutoff,
        step: config.step,
        transverse_cells: cells(width).max(1),
        longitudinal_cells: cells(length).max(2),
    })
}

impl<T: Scalar> StripDomain<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Number of transverse axes, `d - 1`.
    #[inline]
    pub fn transverse_dim(&self) -> usize {
        self.dim - 1
    }
    #[inline]
    pub fn scale(&self) -> T {
        self.scale
    }
    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    #[inline]
    pub fn half_width(&self) -> T {
        self.half_width
    }
    #[inline]
    pub fn transverse_cutoff(&self) -> usize {
        self.transverse_cutoff
    }
    #[inline]
    pub fn longitudinal_cutoff(&self) -> usize {
        self.longitudinal_cutoff
    }
    /// Nominal quadrature step.
    #[inline]
    pub fn step(&self) -> T {
        self.step
    }
    /// Cross-section side `2πL`.
    #[inline]
    pub fn width(&self) -> T {
        T::TAU() * self.scale
    }
    #[inline]
    pub fn transverse_cells(&self) -> usize {
        self.transverse_cells
    }
    #[inline]
    pub fn longitudinal_cells(&self) -> usize {
        self.longitudinal_cells
    }
    #[inline]
    pub fn transverse_step(&self) -> T {
        self.width() / T::count(self.transverse_cells)
    }
    #[inline]
    pub fn longitudinal_step(&self) -> T {
        T::lit(2.0) * self.half_width / T::count(self.longitudinal_cells)
    }

    /// Same domain with a different longitudinal half-width (step kept).
    pub fn with_half_width(&self, half_width: T) -> Result<Self> {
        let mut cfg = self.config();
        cfg.half_width = half_width;
        build_domain(&cfg)
    }

    /// Same domain with a different nominal step.
    pub fn with_step(&self, step: T) -> Result<Self> {
        let mut cfg = self.config();
        cfg.step = step;
        build_domain(&cfg)
    }

    pub fn with_cutoffs(&self, transverse: usize, longitudinal: usize) -> Result<Self> {
        let mut cfg = self.config();
        cfg.transverse_cutoff = transverse;
        cfg.longitudinal_cutoff = longitudinal;
        build_domain(&cfg)
    }

    pub fn config(&self) -> DomainConfig<T> {
        DomainConfig {
            dim: self.dim,
            scale: self.scale,
            boundary: self.boundary,
            half_width: self.half_width,
            transverse_cutoff: self.transverse_cutoff,
            longitudinal_cutoff: self.longitudinal_cutoff,
            step: self.step,
        }
    }

    /// Transverse eigenvalue `λ_n` without admissibility checks.
    pub fn transverse_eigenvalue(&self, n: &[i64]) -> T {
        let sq: i64 = n.iter().map(|k| k * k).sum();
        let denom = match self.boundary {
            Boundary::Periodic => self.scale * self.scale,
            _ => T::lit(4.0) * self.scale * self.scale,
        };
        T::lit(sq as f64) / denom
    }

    /// Transverse frequency magnitude along one axis for index `k`.
    pub fn transverse_frequency(&self, k: i64) -> T {
        let k = T::lit(k.unsigned_abs() as f64);
        match self.boundary {
            Boundary::Periodic => k / self.scale,
            _ => k / (T::lit(2.0) * self.scale),
        }
    }

    /// Longitudinal frequency `ξ_m = π|m|/X`.
    pub fn longitudinal_frequency(&self, m: i64) -> T {
        T::PI() * T::lit(m.unsigned_abs() as f64) / self.half_width
    }

    /// Checks that `n` is admissible for the boundary condition and cutoff.
    pub fn check_transverse_index(&self, n: &[i64]) -> Result<()> {
        if n.len() != self.transverse_dim() {
            return Err(Error::InadmissibleIndex {
                index: n.to_vec(),
                reason: format!("expected {} components", self.transverse_dim()),
            });
        }
        let lo = self.boundary.min_index(self.transverse_cutoff as i64);
        for &k in n {
            if k < lo {
                return Err(Error::InadmissibleIndex {
                    index: n.to_vec(),
                    reason: format!("component {k} below {lo} for {} conditions", self.boundary.name()),
                });
            }
            if k.unsigned_abs() as usize > self.transverse_cutoff {
                return Err(Error::InadmissibleIndex {
                    index: n.to_vec(),
                    reason: format!("component {k} beyond cutoff {}", self.transverse_cutoff),
                });
            }
        }
        Ok(())
    }

    /// One-dimensional transverse factor of the eigenfunction, unit L² norm on `(0, 2πL)`.
    pub fn transverse_factor(&self, k: i64, x: T) -> T {
        let l = self.scale;
        let pi_l = T::PI() * l;
        match self.boundary {
            Boundary::Dirichlet => (T::lit(k as f64) * x / (T::lit(2.0) * l)).sin() / pi_l.sqrt(),
            Boundary::Neumann => {
                if k == 0 {
                    T::one() / (T::lit(2.0) * pi_l).sqrt()
                } else {
                    (T::lit(k as f64) * x / (T::lit(2.0) * l)).cos() / pi_l.sqrt()
                }
            }
            Boundary::Periodic => {
                if k == 0 {
                    T::one() / (T::lit(2.0) * pi_l).sqrt()
                } else if k > 0 {
                    (T::lit(k as f64) * x / l).cos() / pi_l.sqrt()
                } else {
                    (T::lit((-k) as f64) * x / l).sin() / pi_l.sqrt()
                }
            }
        }
    }

    /// Longitudinal basis function on `[-X, X)`, unit L² norm.
    pub fn longitudinal_factor(&self, m: i64, x: T) -> T {
        let xw = self.half_width;
        if m == 0 {
            T::one() / (T::lit(2.0) * xw).sqrt()
        } else if m > 0 {
            (T::PI() * T::lit(m as f64) * x / xw).cos() / xw.sqrt()
        } else {
            (T::PI() * T::lit((-m) as f64) * x / xw).sin() / xw.sqrt()
        }
    }

    /// Transverse midpoint nodes along one axis.
    pub fn transverse_nodes(&self) -> Vec<T> {
        let h = self.transverse_step();
        (0..self.transverse_cells)
            .map(|i| (T::count(i) + T::lit(0.5)) * h)
            .collect()
    }

    /// Longitudinal midpoint nodes on `[-X, X)`.
    pub fn longitudinal_nodes(&self) -> Vec<T> {
        let h = self.longitudinal_step();
        (0..self.longitudinal_cells)
            .map(|i| -self.half_width + (T::count(i) + T::lit(0.5)) * h)
            .collect()
    }

    /// Number of cells in the full quadrature grid.
    pub fn cell_count(&self) -> usize {
        self.transverse_cells.pow(self.transverse_dim() as u32) * self.longitudinal_cells
    }

    /// Volume of one quadrature cell.
    pub fn cell_volume(&self) -> T {
        self.transverse_step().powi(self.transverse_dim() as i32) * self.longitudinal_step()
    }

    /// Decodes a flat transverse cell index into per-axis indices.
    pub fn transverse_cell_indices(&self, mut flat: usize) -> Vec<usize> {
        let nt = self.transverse_cells;
        let mut out = vec![0; self.transverse_dim()];
        for slot in out.iter_mut().rev() {
            *slot = flat % nt;
            flat /= nt;
        }
        out
    }

    /// Number of transverse cells in the flattened cross-section grid.
    pub fn transverse_cell_count(&self) -> usize {
        self.transverse_cells.pow(self.transverse_dim() as u32)
    }

    /// Whether `x` lies in the closed strip cross-section.
    pub fn contains_transverse(&self, x: &[T]) -> bool {
        let w = self.width();
        x.iter()
            .take(self.transverse_dim())
            .all(|&v| v >= T::zero() && v <= w)
    }
}

/// Eigenfunction of the transverse Laplacian on `(0, 2πL)^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseMode<T> {
    index: Vec<i64>,
    domain: StripDomain<T>,
}

impl<T: Scalar> TransverseMode<T> {
    pub fn index(&self) -> &[i64] {
        &self.index
    }

    /// Evaluates the eigenfunction at a transverse point.
    pub fn eval(&self, x: &[T]) -> T {
        self.index
            .iter()
            .zip(x)
            .fold(T::one(), |acc, (&k, &xj)| acc * self.domain.transverse_factor(k, xj))
    }
}

/// Eigenvalue and eigenfunction for the transverse multi-index `n`.
pub fn transverse_eigenpair<T: Scalar>(
    n: &[i64],
    domain: &StripDomain<T>,
) -> Result<(T, TransverseMode<T>)> {
    domain.check_transverse_index(n)?;
    Ok((
        domain.transverse_eigenvalue(n),
        TransverseMode {
            index: n.to_vec(),
            domain: domain.clone(),
        },
    ))
}

/// One basis mode of the truncated model.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeEntry<T> {
    /// Transverse multi-index.
    pub n: Vec<i64>,
    /// Longitudinal index.
    pub m: i64,
    /// `λ_n`.
    pub transverse_energy: T,
    /// `λ_n + ξ_m²`.
    pub energy: T,
}

/// Ordered set of basis modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyLattice<T> {
    entries: Vec<LatticeEntry<T>>,
    energy_cut: Option<T>,
    truncated: bool,
    index: HashMap<(Vec<i64>, i64), usize>,
}

impl<T: Scalar> FrequencyLattice<T> {
    fn from_entries(mut entries: Vec<LatticeEntry<T>>, energy_cut: Option<T>, truncated: bool) -> Self {
        entries.sort_by(|a, b| {
            let na: i64 = a.n.iter().map(|k| k * k).sum();
            let nb: i64 = b.n.iter().map(|k| k * k).sum();
            na.cmp(&nb).then_with(|| a.n.cmp(&b.n)).then_with(|| a.m.cmp(&b.m))
        });
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.n.clone(), e.m), i))
            .collect();
        Self {
            entries,
            energy_cut,
            truncated,
            index,
        }
    }

    /// Every mode within the domain cutoffs.
    pub fn full(domain: &StripDomain<T>) -> Self {
        Self::enumerate(domain, None)
    }

    fn enumerate(domain: &StripDomain<T>, energy: Option<T>) -> Self {
        let cutoff = domain.transverse_cutoff() as i64;
        let lo = domain.boundary().min_index(cutoff);
        let mcut = domain.longitudinal_cutoff() as i64;
        let td = domain.transverse_dim();
        let mut entries = Vec::new();
        let mut truncated = false;
        let mut n = vec![lo; td];
        loop {
            let lam = domain.transverse_eigenvalue(&n);
            if energy.map_or(true, |e| lam <= e) {
                for m in -mcut..=mcut {
                    let xi = domain.longitudinal_frequency(m);
                    let en = lam + xi * xi;
                    if energy.map_or(true, |e| en <= e) {
                        entries.push(LatticeEntry {
                            n: n.clone(),
                            m,
                            transverse_energy: lam,
                            energy: en,
                        });
                    }
                }
                if let Some(e) = energy {
                    let xi = domain.longitudinal_frequency(mcut + 1);
                    if lam + xi * xi <= e {
                        truncated = true;
                    }
                }
            }
            // Next multi-index (odometer).
            let mut axis = td;
            loop {
                if axis == 0 {
                    let lattice = Self::from_entries(entries, energy, truncated);
                    return lattice.with_transverse_truncation(domain, energy);
                }
                axis -= 1;
                if n[axis] < cutoff {
                    n[axis] += 1;
                    break;
                }
                n[axis] = lo;
            }
        }
    }

    fn with_transverse_truncation(mut self, domain: &StripDomain<T>, energy: Option<T>) -> Self {
        if let Some(e) = energy {
            let next = domain.transverse_frequency(domain.transverse_cutoff() as i64 + 1);
            let lo = domain.boundary().min_index(0).max(0);
            let base = domain.transverse_frequency(lo);
            let smallest_other = base * base * T::count(domain.transverse_dim() - 1);
            if next * next + smallest_other <= e {
                self.truncated = true;
            }
        }
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LatticeEntry<T>] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticeEntry<T>> {
        self.entries.iter()
    }

    pub fn energy_cut(&self) -> Option<T> {
        self.energy_cut
    }

    /// True when the domain cutoffs clip modes that satisfy the energy bound.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn position(&self, n: &[i64], m: i64) -> Option<usize> {
        self.index.get(&(n.to_vec(), m)).copied()
    }

    /// Whether every entry of `self` also belongs to `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.entries.iter().all(|e| other.position(&e.n, e.m).is_some())
    }

    pub fn energies(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.energy).collect()
    }

    pub fn max_energy(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |m, e| m.max(e.energy))
    }

    /// Sub-lattice of modes with energy at most `e`.
    pub fn restrict(&self, e: T) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|x| x.energy <= e)
            .cloned()
            .collect();
        Self::from_entries(entries, Some(e), self.truncated)
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}

/// Modes with `λ_n + ξ_m² ≤ E` within the domain cutoffs.
pub fn lattice_below_energy<T: Scalar>(domain: &StripDomain<T>, energy: T) -> Result<FrequencyLattice<T>> {
    if !(energy >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "energy cut must be nonnegative, got {energy}"
        )));
    }
    let lattice = FrequencyLattice::enumerate(domain, Some(energy));
    if lattice.truncated() {
        warn!(
            "energy cut {} exceeds the frequency range representable with cutoffs ({}, {})",
            energy,
            domain.transverse_cutoff(),
            domain.longitudinal_cutoff()
        );
    }
    Ok(lattice)
}

/// Basis values sampled on the quadrature grid, factored per axis.
#[derive(Debug, Clone)]
pub struct BasisTables<T> {
    /// `transverse[k_index][i]` for transverse index values `k_min..=k_max`.
    pub transverse: Vec<Vec<T>>,
    pub transverse_offset: i64,
    /// `longitudinal[m + M][i]`.
    pub longitudinal: Vec<Vec<T>>,
    pub longitudinal_offset: i64,
}

impl<T: Scalar> BasisTables<T> {
    pub fn new(domain: &StripDomain<T>, lattice: &FrequencyLattice<T>) -> Self {
        let (mut kmin, mut kmax, mut mmin, mut mmax) = (0i64, 0i64, 0i64, 0i64);
        for (i, e) in lattice.iter().enumerate() {
            let lo = *e.n.iter().min().unwrap_or(&0);
            let hi = *e.n.iter().max().unwrap_or(&0);
            if i == 0 {
                kmin = lo;
                kmax = hi;
                mmin = e.m;
                mmax = e.m;
            } else {
                kmin = kmin.min(lo);
                kmax = kmax.max(hi);
                mmin = mmin.min(e.m);
                mmax = mmax.max(e.m);
            }
        }
        let tnodes = domain.transverse_nodes();
        let lnodes = domain.longitudinal_nodes();
        let transverse = (kmin..=kmax)
            .map(|k| tnodes.iter().map(|&x| domain.transverse_factor(k, x)).collect())
            .collect();
        let longitudinal = (mmin..=mmax)
            .map(|m| lnodes.iter().map(|&x| domain.longitudinal_factor(m, x)).collect())
            .collect();
        Self {
            transverse,
            transverse_offset: kmin,
            longitudinal,
            longitudinal_offset: mmin,
        }
    }

    #[inline]
    pub fn transverse_row(&self, k: i64) -> &[T] {
        &self.transverse[(k - self.transverse_offset) as usize]
    }

    #[inline]
    pub fn longitudinal_row(&self, m: i64) -> &[T] {
        &self.longitudinal[(m - self.longitudinal_offset) as usize]
    }

    /// Transverse eigenfunction `φ_n` on the flattened transverse grid.
    pub fn transverse_profile(&self, domain: &StripDomain<T>, n: &[i64]) -> Vec<T> {
        let count = domain.transverse_cell_count();
        (0..count)
            .map(|flat| {
                domain
                    .transverse_cell_indices(flat)
                    .iter()
                    .zip(n)
                    .fold(T::one(), |acc, (&i, &k)| acc * self.transverse_row(k)[i])
            })
            .collect()
    }
}
