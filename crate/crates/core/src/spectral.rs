//! Band-limited fields on the strip, their synthesis and analysis on the
//! quadrature grid, spectral projections and spectral-inequality constants.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{cell_weights, SetDescription};
use crate::linalg::{symmetric_eigenvalues, Cholesky, DenseMatrix};
use crate::scalar::Scalar;
use crate::strip_model::{lattice_below_energy, BasisTables, Boundary, FrequencyLattice, StripDomain};

/// Which family of transverse functions the coefficients refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Real form of the exponential (Fourier) basis on a periodic cross-section.
    Exponential,
    /// Dirichlet or Neumann eigenfunctions.
    Eigenfunction(Boundary),
}

impl Basis {
    pub fn of(boundary: Boundary) -> Self {
        match boundary {
            Boundary::Periodic => Basis::Exponential,
            b => Basis::Eigenfunction(b),
        }
    }
}

/// Finite coefficient table over a frequency lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimitedField<T> {
    lattice: Arc<FrequencyLattice<T>>,
    coefficients: Vec<T>,
    /// Full widths `b_j` of the centered spectral support box.
    band: Vec<T>,
    basis: Basis,
}

/// Per-axis frequency magnitudes of a lattice entry (transverse axes first).
pub fn entry_frequencies<T: Scalar>(domain: &StripDomain<T>, n: &[i64], m: i64) -> Vec<T> {
    let mut f: Vec<T> = n.iter().map(|&k| domain.transverse_frequency(k)).collect();
    f.push(domain.longitudinal_frequency(m));
    f
}

/// Smallest centered band containing every frequency of the lattice.
pub fn lattice_band<T: Scalar>(domain: &StripDomain<T>, lattice: &FrequencyLattice<T>) -> Vec<T> {
    let mut band = vec![T::zero(); domain.dim()];
    for e in lattice.iter() {
        for (b, f) in band.iter_mut().zip(entry_frequencies(domain, &e.n, e.m)) {
            *b = b.max(T::lit(2.0) * f);
        }
    }
    band
}

impl<T: Scalar> BandLimitedField<T> {
    /// Builds a field, checking every frequency with a nonzero coefficient
    /// against the declared band.
    pub fn new(
        domain: &StripDomain<T>,
        lattice: Arc<FrequencyLattice<T>>,
        coefficients: Vec<T>,
        band: Vec<T>,
    ) -> Result<Self> {
        if coefficients.len() != lattice.len() {
            return Err(Error::DimensionMismatch {
                expected: lattice.len(),
                got: coefficients.len(),
            });
        }
        if band.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: band.len(),
            });
        }
        let slack = T::one() + T::tiny_rel();
        for (e, &c) in lattice.iter().zip(&coefficients) {
            if c == T::zero() {
                continue;
            }
            for (j, f) in entry_frequencies(domain, &e.n, e.m).into_iter().enumerate() {
                if T::lit(2.0) * f > band[j] * slack {
                    return Err(Error::InvalidArgument(format!(
                        "mode {:?}/{} has frequency {} outside band {:?} on axis {j}",
                        e.n, e.m, f, band
                    )));
                }
            }
        }
        Ok(Self {
            lattice,
            coefficients,
            band,
            basis: Basis::of(domain.boundary()),
        })
    }

    /// Field with the tightest band around its lattice.
    pub fn on_lattice(domain: &StripDomain<T>, lattice: Arc<FrequencyLattice<T>>, coefficients: Vec<T>) -> Result<Self> {
        let band = lattice_band(domain, &lattice);
        Self::new(domain, lattice, coefficients, band)
    }

    pub fn zeros(domain: &StripDomain<T>, lattice: Arc<FrequencyLattice<T>>) -> Self {
        let n = lattice.len();
        let band = lattice_band(domain, &lattice);
        Self {
            lattice,
            coefficients: vec![T::zero(); n],
            band,
            basis: Basis::of(domain.boundary()),
        }
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice<T>> {
        &self.lattice
    }
    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }
    pub fn band(&self) -> &[T] {
        &self.band
    }
    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Plancherel norm: ℓ² norm of the coefficients in the orthonormal basis.
    pub fn norm(&self) -> T {
        self.coefficients.iter().map(|&c| c * c).sum::<T>().sqrt()
    }
}

/// Samples on the quadrature grid, flattened as `[transverse cell][longitudinal cell]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    pub values: Vec<T>,
}

fn check_nyquist<T: Scalar>(domain: &StripDomain<T>, lattice: &FrequencyLattice<T>) -> Result<()> {
    let nt = domain.transverse_cells() as i64;
    let nl = domain.longitudinal_cells() as i64;
    for e in lattice.iter() {
        let t_ok = e.n.iter().all(|&k| match domain.boundary() {
            Boundary::Periodic => 2 * k.abs() < nt,
            _ => k < nt,
        });
        if !t_ok || 2 * e.m.abs() >= nl {
            return Err(Error::NyquistExceeded(format!(
                "mode {:?}/{} not resolved by a {}x{} grid",
                e.n, e.m, nt, nl
            )));
        }
    }
    Ok(())
}

/// Groups lattice entries by transverse index: `(n, [(entry, m)])`.
fn group_by_transverse<T: Scalar>(lattice: &FrequencyLattice<T>) -> Vec<(Vec<i64>, Vec<(usize, i64)>)> {
    let mut groups: Vec<(Vec<i64>, Vec<(usize, i64)>)> = Vec::new();
    let mut pos: HashMap<Vec<i64>, usize> = HashMap::new();
    for (i, e) in lattice.iter().enumerate() {
        let g = *pos.entry(e.n.clone()).or_insert_with(|| {
            groups.push((e.n.clone(), Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push((i, e.m));
    }
    groups
}

/// Pointwise evaluation of the finite sum on the quadrature grid.
pub fn synthesize<T: Scalar>(field: &BandLimitedField<T>, domain: &StripDomain<T>) -> Result<GridField<T>> {
    check_nyquist(domain, &field.lattice)?;
    let tables = BasisTables::new(domain, &field.lattice);
    let nl = domain.longitudinal_cells();
    let nt = domain.transverse_cell_count();
    let mut values = vec![T::zero(); nt * nl];
    for (n, members) in group_by_transverse(&field.lattice) {
        let mut profile = vec![T::zero(); nl];
        let mut any = false;
        for &(i, m) in &members {
            let c = field.coefficients[i];
            if c == T::zero() {
                continue;
            }
            any = true;
            for (p, &v) in profile.iter_mut().zip(tables.longitudinal_row(m)) {
                *p += c * v;
            }
        }
        if !any {
            continue;
        }
        let phi = tables.transverse_profile(domain, &n);
        for (t, &ph) in phi.iter().enumerate() {
            let row = &mut values[t * nl..(t + 1) * nl];
            for (r, &p) in row.iter_mut().zip(&profile) {
                *r += ph * p;
            }
        }
    }
    Ok(GridField { values })
}

/// Discrete inner products of grid samples against the lattice basis.
pub fn analyze<T: Scalar>(
    samples: &GridField<T>,
    domain: &StripDomain<T>,
    lattice: Arc<FrequencyLattice<T>>,
) -> Result<BandLimitedField<T>> {
    let nl = domain.longitudinal_cells();
    let nt = domain.transverse_cell_count();
    if samples.values.len() != nl * nt {
        return Err(Error::DimensionMismatch {
            expected: nl * nt,
            got: samples.values.len(),
        });
    }
    check_nyquist(domain, &lattice)?;
    let tables = BasisTables::new(domain, &lattice);
    let vol = domain.cell_volume();
    let mut coefficients = vec![T::zero(); lattice.len()];
    for (n, members) in group_by_transverse(&lattice) {
        let phi = tables.transverse_profile(domain, &n);
        // Project onto φ_n first, then onto each longitudinal mode.
        let mut profile = vec![T::zero(); nl];
        for (t, &ph) in phi.iter().enumerate() {
            let row = &samples.values[t * nl..(t + 1) * nl];
            for (p, &v) in profile.iter_mut().zip(row) {
                *p += ph * v;
            }
        }
        for &(i, m) in &members {
            let e = tables.longitudinal_row(m);
            coefficients[i] = profile.iter().zip(e).map(|(&p, &v)| p * v).sum::<T>() * vol;
        }
    }
    BandLimitedField::on_lattice(domain, lattice, coefficients)
}

/// Quadrature L² norm over a region, weighting each cell by `|cell ∩ region|`.
pub fn norm_on<T: Scalar>(samples: &GridField<T>, region: &SetDescription<T>, domain: &StripDomain<T>) -> Result<T> {
    let w = cell_weights(region, domain)?;
    Ok(weighted_norm(samples, &w))
}

/// Quadrature L² norm with precomputed cell weights.
pub fn weighted_norm<T: Scalar>(samples: &GridField<T>, weights: &[T]) -> T {
    samples
        .values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| w * v * v)
        .sum::<T>()
        .sqrt()
}

/// `‖∂^α f‖ / ‖f‖`, computed exactly in coefficient space.
///
/// Differentiation maps each basis function to ± another unit-norm basis
/// function scaled by its frequency, and distinct modes map to orthogonal
/// images, so the ratio is a weighted mean of frequency monomials.
pub fn bernstein_ratio<T: Scalar>(field: &BandLimitedField<T>, domain: &StripDomain<T>, alpha: &[u32]) -> Result<T> {
    if alpha.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: alpha.len(),
        });
    }
    let base = field.norm();
    if base == T::zero() {
        return Err(Error::ZeroField);
    }
    let mut acc = T::zero();
    for (e, &c) in field.lattice.iter().zip(&field.coefficients) {
        if c == T::zero() {
            continue;
        }
        let mono = entry_frequencies(domain, &e.n, e.m)
            .into_iter()
            .zip(alpha)
            .fold(T::one(), |p, (f, &a)| p * f.powi(a as i32));
        acc += (c * mono) * (c * mono);
    }
    Ok(acc.sqrt() / base)
}

/// Restriction of a field to the modes with energy at most `energy`.
pub fn spectral_projection<T: Scalar>(
    g: &BandLimitedField<T>,
    energy: T,
    domain: &StripDomain<T>,
) -> Result<BandLimitedField<T>> {
    if !(energy >= T::zero()) {
        return Err(Error::InvalidArgument(format!("energy must be nonnegative, got {energy}")));
    }
    let sub = Arc::new(g.lattice.restrict(energy));
    let coefficients = sub
        .iter()
        .map(|e| {
            let i = g.lattice.position(&e.n, e.m).expect("sub-lattice entry");
            g.coefficients[i]
        })
        .collect();
    let band = vec![T::lit(2.0) * energy.sqrt(); domain.dim()];
    BandLimitedField::new(domain, sub, coefficients, band)
}

/// Gram matrix `G_ij = Σ_cells w_cell φ_i φ_j` of the lattice basis.
///
/// Cells are grouped by transverse row: rows with identical longitudinal
/// weight profiles share a longitudinal Gram block, so the cost scales with
/// the number of distinct profiles instead of the number of cells.
pub fn weighted_gram<T: Scalar>(domain: &StripDomain<T>, lattice: &FrequencyLattice<T>, weights: &[T]) -> DenseMatrix<T> {
    let nl = domain.longitudinal_cells();
    let nt = domain.transverse_cell_count();
    assert_eq!(weights.len(), nl * nt, "weights must cover the grid");
    let tables = BasisTables::new(domain, lattice);

    // Distinct transverse indices and longitudinal indices used.
    let mut tindex: Vec<Vec<i64>> = Vec::new();
    let mut tpos: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut mindex: Vec<i64> = Vec::new();
    let mut mpos: HashMap<i64, usize> = HashMap::new();
    let entry_slots: Vec<(usize, usize)> = lattice
        .iter()
        .map(|e| {
            let t = *tpos.entry(e.n.clone()).or_insert_with(|| {
                tindex.push(e.n.clone());
                tindex.len() - 1
            });
            let m = *mpos.entry(e.m).or_insert_with(|| {
                mindex.push(e.m);
                mindex.len() - 1
            });
            (t, m)
        })
        .collect();
    let profiles: Vec<Vec<T>> = tindex.iter().map(|n| tables.transverse_profile(domain, n)).collect();

    // Group transverse rows by identical weight profile.
    let mut groups: Vec<(Vec<usize>, &[T])> = Vec::new();
    let mut key_pos: HashMap<Vec<u64>, usize> = HashMap::new();
    for t in 0..nt {
        let row = &weights[t * nl..(t + 1) * nl];
        if row.iter().all(|&w| w == T::zero()) {
            continue;
        }
        let key: Vec<u64> = row.iter().map(|w| w.as_f64().to_bits()).collect();
        match key_pos.get(&key) {
            Some(&g) => groups[g].0.push(t),
            None => {
                key_pos.insert(key, groups.len());
                groups.push((vec![t], row));
            }
        }
    }

    let nm = mindex.len();
    let ntr = tindex.len();
    let blocks: Vec<(DenseMatrix<T>, DenseMatrix<T>)> = groups
        .par_iter()
        .map(|(rows, w)| {
            let mut a = DenseMatrix::zeros(nm);
            for i in 0..nm {
                let ei = tables.longitudinal_row(mindex[i]);
                for j in 0..=i {
                    let ej = tables.longitudinal_row(mindex[j]);
                    let mut s = T::zero();
                    for k in 0..nl {
                        s += w[k] * ei[k] * ej[k];
                    }
                    a[(i, j)] = s;
                    a[(j, i)] = s;
                }
            }
            let mut b = DenseMatrix::zeros(ntr);
            for i in 0..ntr {
                for j in 0..=i {
                    let s: T = rows.iter().map(|&t| profiles[i][t] * profiles[j][t]).sum();
                    b[(i, j)] = s;
                    b[(j, i)] = s;
                }
            }
            (a, b)
        })
        .collect();

    let n = lattice.len();
    let mut g = DenseMatrix::zeros(n);
    for i in 0..n {
        let (ti, mi) = entry_slots[i];
        for j in 0..=i {
            let (tj, mj) = entry_slots[j];
            let s: T = blocks.iter().map(|(a, b)| b[(ti, tj)] * a[(mi, mj)]).sum();
            g[(i, j)] = s;
            g[(j, i)] = s;
        }
    }
    g
}

/// Uniform cell weights (the full model box).
pub fn full_weights<T: Scalar>(domain: &StripDomain<T>) -> Vec<T> {
    vec![domain.cell_volume(); domain.cell_count()]
}

/// Largest generalized eigenvalue `λ` of `A v = λ B v` for symmetric `A` and
/// symmetric positive definite `B`. Returns `None` when `B` is numerically
/// singular.
pub fn largest_generalized_eigenvalue<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>, rel_floor: T) -> Option<T> {
    // Diagonal scaling leaves the pencil's eigenvalues unchanged.
    let s: Vec<T> = b
        .diagonal()
        .iter()
        .map(|&d| if d > T::zero() { T::one() / d.sqrt() } else { T::one() })
        .collect();
    let bs = b.scaled_congruence(&s);
    let as_ = a.scaled_congruence(&s);
    let ch = Cholesky::new(&bs, rel_floor)?;
    let c = ch.whiten(&as_);
    symmetric_eigenvalues(&c).last().copied()
}

/// Empirical spectral-inequality constant on the truncated model.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConstantEstimate<T> {
    /// `sup ‖f‖_{L²(Ω)} / ‖f‖_{L²(S∩Ω)}` over the projected subspace.
    pub constant: T,
    pub energy: T,
    pub modes: usize,
}

/// `sup ‖f‖/‖f‖_S` over `f` in the range of the spectral projection below `energy`.
pub fn empirical_spectral_constant<T: Scalar>(
    domain: &StripDomain<T>,
    set: &SetDescription<T>,
    energy: T,
) -> Result<SpectralConstantEstimate<T>> {
    let weights = cell_weights(set, domain)?;
    empirical_spectral_constant_with_weights(domain, &weights, energy)
}

pub fn empirical_spectral_constant_with_weights<T: Scalar>(
    domain: &StripDomain<T>,
    weights: &[T],
    energy: T,
) -> Result<SpectralConstantEstimate<T>> {
    let lattice = lattice_below_energy(domain, energy)?;
    if lattice.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no modes below energy {energy}"
        )));
    }
    if weights.iter().all(|&w| w == T::zero()) {
        return Err(Error::SetTooThin);
    }
    check_nyquist(domain, &lattice)?;
    let full = weighted_gram(domain, &lattice, &full_weights(domain));
    let restricted = weighted_gram(domain, &lattice, weights);
    let lambda = largest_generalized_eigenvalue(&full, &restricted, T::epsilon() * T::lit(10.0))
        .ok_or(Error::SetTooThin)?;
    Ok(SpectralConstantEstimate {
        constant: lambda.max(T::zero()).sqrt(),
        energy,
        modes: lattice.len(),
    })
}

/// Parameters of the explicit spectral-inequality bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConstants<T> {
    /// Universal constant stand-in, at least `e`.
    pub k: T,
    pub gamma: T,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Scalar> SpectralConstants<T> {
    pub fn new(k: T, gamma: T, a: Vec<T>) -> Self {
        Self { k, gamma, a, b: Vec::new() }
    }

    pub fn with_band(mut self, b: Vec<T>) -> Self {
        self.b = b;
        self
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > T::zero() && self.gamma <= T::one()) {
            return Err(Error::InvalidGamma(self.gamma.as_f64()));
        }
        if !(self.k >= T::E() * (T::one() - T::epsilon())) {
            return Err(Error::InvalidUniversalConstant(self.k.as_f64()));
        }
        if self.a.is_empty() || self.a.iter().any(|&x| !(x > T::zero())) {
            return Err(Error::InvalidArgument("side lengths a must be positive".into()));
        }
        if self.b.iter().any(|&x| !(x > T::zero())) {
            return Err(Error::InvalidArgument("band widths b must be positive".into()));
        }
        Ok(())
    }

    fn a_l1(&self) -> T {
        self.a.iter().copied().sum()
    }
}

/// Log of the squared-norm spectral-inequality constant on the strip:
/// `8K√E(‖a‖₁+d) · ln((2K)^d/γ)`.
pub fn theoretical_spectral_constant<T: Scalar>(c: &SpectralConstants<T>, energy: T) -> Result<T> {
    c.validate()?;
    if !(energy >= T::zero()) {
        return Err(Error::InvalidArgument(format!("energy must be nonnegative, got {energy}")));
    }
    let d = T::count(c.dim());
    let base = d * (T::lit(2.0) * c.k).ln() - c.gamma.ln();
    Ok(T::lit(8.0) * c.k * energy.sqrt() * (c.a_l1() + d) * base)
}

/// Log of the uncertainty-principle constant for band `b`:
/// `(K a·b + (6d−1)/2) · ln(K^d/γ)`.
pub fn logvinenko_sereda_bound<T: Scalar>(c: &SpectralConstants<T>) -> Result<T> {
    c.validate()?;
    if c.b.len() != c.a.len() {
        return Err(Error::DimensionMismatch {
            expected: c.a.len(),
            got: c.b.len(),
        });
    }
    let d = T::count(c.dim());
    let ab: T = c.a.iter().zip(&c.b).map(|(&x, &y)| x * y).sum();
    let exponent = c.k * ab + (T::lit(6.0) * d - T::one()) / T::lit(2.0);
    Ok(exponent * (d * c.k.ln() - c.gamma.ln()))
}

/// Smallest `K ≥ e` for which `log_bound(K) ≥ target` holds for every target,
/// assuming `log_bound` is nondecreasing in `K`. Returns `None` if no `K` up to
/// `k_max` works.
pub fn calibrate_k<T: Scalar>(log_bound: impl Fn(T) -> Result<T>, targets: &[T], k_max: T) -> Result<Option<T>> {
    let need = targets.iter().fold(T::neg_infinity(), |m, &t| m.max(t));
    let ok = |k: T| -> Result<bool> { Ok(log_bound(k)? >= need) };
    let mut lo = T::E();
    if ok(lo)? {
        return Ok(Some(lo));
    }
    let mut hi = lo * T::lit(2.0);
    while !ok(hi)? {
        if hi > k_max {
            return Ok(None);
        }
        lo = hi;
        hi = hi * T::lit(2.0);
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= T::tiny_rel() * hi {
            break;
        }
    }
    Ok(Some(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AxisBox, Interval};
    use crate::strip_model::{build_domain, DomainConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dom(bc: Boundary, x: f64, h: f64) -> StripDomain<f64> {
        build_domain(&DomainConfig {
            dim: 2,
            scale: 0.5,
            boundary: bc,
            half_width: x,
            transverse_cutoff: 6,
            longitudinal_cutoff: 12,
            step: h,
        })
        .unwrap()
    }

    fn random_field(d: &StripDomain<f64>, seed: u64, terms: usize) -> BandLimitedField<f64> {
        let lat = Arc::new(FrequencyLattice::full(d));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = vec![0.0; lat.len()];
        for _ in 0..terms {
            let i = rng.gen_range(0..lat.len());
            c[i] = rng.gen_range(-1.0..1.0);
        }
        BandLimitedField::on_lattice(d, lat, c).unwrap()
    }

    #[test]
    fn single_mode_synthesizes_eigenfunction() {
        let d = dom(Boundary::Dirichlet, 4.0, 1.0 / 16.0);
        let lat = Arc::new(FrequencyLattice::full(&d));
        let i = lat.position(&[1], 0).unwrap();
        let mut c = vec![0.0; lat.len()];
        c[i] = 1.0;
        let f = BandLimitedField::on_lattice(&d, lat, c).unwrap();
        let g = synthesize(&f, &d).unwrap();
        let nl = d.longitudinal_cells();
        let tn = d.transverse_nodes();
        for (t, &x) in tn.iter().enumerate() {
            let expect = d.transverse_factor(1, x) * d.longitudinal_factor(0, 0.0);
            assert!((g.values[t * nl + 3] - expect).abs() < 1e-14);
        }
        let z = BandLimitedField::zeros(&d, f.lattice().clone());
        assert!(synthesize(&z, &d).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn analyze_inverts_synthesize() {
        for bc in [Boundary::Dirichlet, Boundary::Neumann, Boundary::Periodic] {
            let d = dom(bc, 4.0, 1.0 / 8.0);
            let f = random_field(&d, 5, 10);
            let g = synthesize(&f, &d).unwrap();
            let back = analyze(&g, &d, f.lattice().clone()).unwrap();
            let err: f64 = f
                .coefficients()
                .iter()
                .zip(back.coefficients())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-10 * f.norm(), "{bc:?}: {err}");
        }
    }

    #[test]
    fn nyquist_violation_rejected() {
        let d = dom(Boundary::Dirichlet, 1.0, 0.5);
        let f = random_field(&d, 1, 3);
        assert!(matches!(synthesize(&f, &d), Err(Error::NyquistExceeded(_))));
    }

    #[test]
    fn norms_on_regions() {
        let d = dom(Boundary::Neumann, 4.0, 1.0 / 8.0);
        let f = random_field(&d, 9, 12);
        let g = synthesize(&f, &d).unwrap();
        let full = norm_on(&g, &SetDescription::full_strip(&d), &d).unwrap();
        assert!((full - f.norm()).abs() < 10.0 * d.step() * d.step() * f.norm());
        assert_eq!(norm_on(&g, &SetDescription::empty(), &d).unwrap(), 0.0);
        // Even-in-x_d field: cosine longitudinal modes only.
        let lat = f.lattice().clone();
        let c: Vec<f64> = lat
            .iter()
            .zip(f.coefficients())
            .map(|(e, &c)| if e.m >= 0 { c } else { 0.0 })
            .collect();
        let even = BandLimitedField::on_lattice(&d, lat, c).unwrap();
        let ge = synthesize(&even, &d).unwrap();
        let half = SetDescription::BoxUnion(vec![AxisBox::new(vec![
            Interval::new(0.0, d.width()),
            Interval::new(0.0, f64::INFINITY),
        ])]);
        let hn = norm_on(&ge, &half, &d).unwrap();
        assert!((hn * hn - even.norm().powi(2) / 2.0).abs() < 1e-10);
    }

    #[test]
    fn bernstein_examples() {
        let d = dom(Boundary::Neumann, 4.0, 1.0 / 8.0);
        let lat = Arc::new(FrequencyLattice::full(&d));
        let mut c = vec![0.0; lat.len()];
        c[lat.position(&[0], 5).unwrap()] = 2.0;
        let xi = d.longitudinal_frequency(5);
        let f = BandLimitedField::new(&d, lat.clone(), c, vec![0.0, 2.0 * xi]).unwrap();
        let r = bernstein_ratio(&f, &d, &[0, 1]).unwrap();
        assert!((r - xi).abs() < 1e-14);
        assert!((r - f.band()[1] / 2.0).abs() < 1e-14);
        let mut c = vec![0.0; lat.len()];
        c[lat.position(&[0], 0).unwrap()] = 1.0;
        let k = BandLimitedField::on_lattice(&d, lat.clone(), c).unwrap();
        assert_eq!(bernstein_ratio(&k, &d, &[1, 0]).unwrap(), 0.0);
        let z = BandLimitedField::zeros(&d, lat);
        assert_eq!(bernstein_ratio(&z, &d, &[1, 0]), Err(Error::ZeroField));
    }

    #[test]
    fn bernstein_ratio_matches_finite_differences() {
        let d = dom(Boundary::Periodic, 4.0, 1.0 / 32.0);
        let lat = Arc::new(lattice_below_energy(&d, 20.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c: Vec<f64> = (0..lat.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = BandLimitedField::on_lattice(&d, lat, c).unwrap();
        // Central differences along x_d on the periodic grid.
        let g = synthesize(&f, &d).unwrap();
        let nl = d.longitudinal_cells();
        let h = d.longitudinal_step();
        let mut dsq = 0.0;
        for t in 0..d.transverse_cell_count() {
            for k in 0..nl {
                let fwd = g.values[t * nl + (k + 1) % nl];
                let bwd = g.values[t * nl + (k + nl - 1) % nl];
                let der = (fwd - bwd) / (2.0 * h);
                dsq += der * der * d.cell_volume();
            }
        }
        let fd = dsq.sqrt() / f.norm();
        let exact = bernstein_ratio(&f, &d, &[0, 1]).unwrap();
        assert!((fd - exact).abs() < 0.02 * exact, "{fd} vs {exact}");
    }

    #[test]
    fn projection_examples() {
        let d = dom(Boundary::Dirichlet, 4.0, 1.0 / 8.0);
        let f = random_field(&d, 3, 20);
        assert!(spectral_projection(&f, 0.5, &d).unwrap().lattice().is_empty());
        let all = spectral_projection(&f, 1e6, &d).unwrap();
        assert_eq!(all.coefficients(), f.coefficients());
        let p = spectral_projection(&f, 9.0, &d).unwrap();
        let pp = spectral_projection(&p, 9.0, &d).unwrap();
        assert_eq!(p, pp);
        assert_eq!(p.band(), &[6.0, 6.0]);
    }

    #[test]
    fn full_set_spectral_constant_is_one() {
        let d = dom(Boundary::Dirichlet, 4.0, 1.0 / 8.0);
        let c = empirical_spectral_constant(&d, &SetDescription::full_strip(&d), 9.0).unwrap();
        assert!((c.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_constant_grows_with_energy_and_shrinks_with_set() {
        let d = dom(Boundary::Dirichlet, 4.0, 1.0 / 8.0);
        let s = SetDescription::stripes(&d, 1.0, 2.0, 0.0);
        let c1 = empirical_spectral_constant(&d, &s, 4.0).unwrap().constant;
        let c2 = empirical_spectral_constant(&d, &s, 16.0).unwrap().constant;
        assert!(c1 >= 1.0 && c2 >= c1);
        let bigger = SetDescription::stripes(&d, 1.5, 2.0, -0.25);
        let c3 = empirical_spectral_constant(&d, &bigger, 16.0).unwrap().constant;
        assert!(c3 <= c2 + 1e-12);
        assert!(matches!(
            empirical_spectral_constant(&d, &SetDescription::empty(), 4.0),
            Err(Error::SetTooThin)
        ));
    }

    #[test]
    fn theoretical_constants_examples() {
        let e = std::f64::consts::E;
        let c = SpectralConstants::new(e, 1.0, vec![1.0, 1.0]);
        assert_eq!(theoretical_spectral_constant(&c, 0.0).unwrap(), 0.0);
        let v = theoretical_spectral_constant(&c, 1.0).unwrap();
        // 8e·4·2·ln(2e)
        let oracle = 8.0 * e * 4.0 * 2.0 * (2.0 * e).ln();
        assert!((v - oracle).abs() < 1e-12 * oracle);
        assert!((v - 294.6).abs() < 0.05);
        let half = SpectralConstants::new(e, 0.5, vec![1.0, 1.0]);
        assert!(theoretical_spectral_constant(&half, 1.0).unwrap() > v);
        assert!(matches!(
            theoretical_spectral_constant(&SpectralConstants::new(e, 0.0, vec![1.0, 1.0]), 1.0),
            Err(Error::InvalidGamma(_))
        ));

        let ls = logvinenko_sereda_bound(&c.clone().with_band(vec![1.0, 1.0])).unwrap();
        assert!((ls - (2.0 * e + 5.5) * 2.0).abs() < 1e-12);
        assert!((ls - 21.87).abs() < 0.01);
        let unit = SpectralConstants { k: e, gamma: e * e, a: vec![1.0, 1.0], b: vec![1.0, 1.0] };
        // γ = K^d is outside (0,1], so the base-1 case is evaluated through the raw formula.
        assert!(logvinenko_sereda_bound(&unit).is_err());
        let b2 = logvinenko_sereda_bound(&c.clone().with_band(vec![2.0, 2.0])).unwrap();
        let base = 2.0;
        assert!(((b2 - ls) / base - 2.0 * e).abs() < 1e-12);
    }

    #[test]
    fn calibrate_k_finds_boundary() {
        let k = calibrate_k(|k: f64| Ok(k * k), &[100.0], 1e6).unwrap().unwrap();
        assert!((k - 10.0).abs() < 1e-9);
        assert_eq!(calibrate_k(|k: f64| Ok(k), &[1.0], 1e6).unwrap(), Some(std::f64::consts::E));
        assert_eq!(calibrate_k(|_k: f64| Ok(0.0), &[1.0], 1e3).unwrap(), None);
    }
}
