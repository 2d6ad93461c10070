//! Symbolic axis-aligned control sets.
//!
//! Sets are finite descriptions built from boxes, periodic patterns, product
//! sections and set algebra. Measures are exact: within any bounded window the
//! membership function is piecewise constant on the grid spanned by the
//! breakpoints of all constituent boxes, so summing the volumes of the grid
//! cells whose midpoint belongs to the set gives the Lebesgue measure.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::strip_model::StripDomain;

/// Maximum nesting depth accepted for set descriptions.
pub const MAX_DEPTH: usize = 16;

/// Closed interval, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn unbounded() -> Self {
        Self {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    #[inline]
    pub fn len(&self) -> T {
        (self.hi - self.lo).max(T::zero())
    }

    #[inline]
    pub fn contains(&self, x: T) -> bool {
        x >= self.lo && x <= self.hi
    }

    #[inline]
    pub fn intersect(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    #[inline]
    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo.max(other.lo) < self.hi.min(other.hi)
    }
}

/// Axis-aligned box: one interval per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox<T> {
    pub intervals: Vec<Interval<T>>,
}

impl<T: Scalar> AxisBox<T> {
    pub fn new(intervals: Vec<Interval<T>>) -> Self {
        Self { intervals }
    }

    pub fn from_bounds(bounds: &[(T, T)]) -> Self {
        Self {
            intervals: bounds.iter().map(|&(a, b)| Interval::new(a, b)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn volume(&self) -> T {
        self.intervals.iter().fold(T::one(), |v, i| v * i.len())
    }

    pub fn contains(&self, p: &[T]) -> bool {
        self.intervals.iter().zip(p).all(|(i, &x)| i.contains(x))
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.intervals
            .iter()
            .zip(&other.intervals)
            .all(|(a, b)| a.overlaps(b))
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals
            .iter()
            .all(|i| i.lo.is_finite() && i.hi.is_finite())
    }

    pub fn midpoint(&self) -> Vec<T> {
        self.intervals
            .iter()
            .map(|i| (i.lo + i.hi) * T::lit(0.5))
            .collect()
    }
}

/// Axis-aligned parallelepiped given by center and side lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Parallelepiped<T> {
    pub center: Vec<T>,
    pub sides: Vec<T>,
}

impl<T: Scalar> Parallelepiped<T> {
    pub fn new(center: Vec<T>, sides: Vec<T>) -> Self {
        Self { center, sides }
    }

    pub fn to_box(&self) -> AxisBox<T> {
        AxisBox {
            intervals: self
                .center
                .iter()
                .zip(&self.sides)
                .map(|(&c, &a)| Interval::new(c - a * T::lit(0.5), c + a * T::lit(0.5)))
                .collect(),
        }
    }

    pub fn volume(&self) -> T {
        self.sides.iter().fold(T::one(), |v, &a| v * a)
    }

    /// Whether the parallelepiped lies inside the strip cross-section.
    pub fn is_interior(&self, domain: &StripDomain<T>) -> bool {
        let w = domain.width();
        let half = T::lit(0.5);
        let slack = T::tiny_rel() * w;
        (0..domain.transverse_dim()).all(|j| {
            self.center[j] - self.sides[j] * half >= -slack
                && self.center[j] + self.sides[j] * half <= w + slack
        })
    }
}

/// Symbolic measurable set in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum SetDescription<T> {
    /// Finite union of boxes (possibly overlapping, possibly unbounded).
    BoxUnion(Vec<AxisBox<T>>),
    /// `cell` repeated with the given period along each periodic axis. The
    /// cell is read inside the fundamental domain `[origin, origin + period)`.
    Periodic {
        cell: Box<SetDescription<T>>,
        origin: Vec<T>,
        periods: Vec<Option<T>>,
    },
    /// `section × ℝ`, where `section` is a union of `(d-1)`-dimensional boxes.
    ProductSection(Vec<AxisBox<T>>),
    Union(Vec<SetDescription<T>>),
    Intersection(Vec<SetDescription<T>>),
    Complement(Box<SetDescription<T>>),
    /// Mirror image `{x : x with x_axis negated ∈ inner}`.
    Reflect {
        axis: usize,
        inner: Box<SetDescription<T>>,
    },
}

/// Behaviour of a set along the unbounded axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LongitudinalStructure<T> {
    /// Membership does not depend on `x_d`.
    Invariant,
    Periodic(T),
    Aperiodic,
}

impl<T: Scalar> SetDescription<T> {
    pub fn empty() -> Self {
        SetDescription::BoxUnion(Vec::new())
    }

    /// `ℝ^d`.
    pub fn everything(dim: usize) -> Self {
        SetDescription::BoxUnion(vec![AxisBox::new(vec![Interval::unbounded(); dim])])
    }

    /// The closed strip `[0, 2πL]^{d-1} × ℝ`.
    pub fn full_strip(domain: &StripDomain<T>) -> Self {
        let w = domain.width();
        SetDescription::ProductSection(vec![AxisBox::new(vec![
            Interval::new(T::zero(), w);
            domain.transverse_dim()
        ])])
    }

    /// `{x_d ∈ ⋃_k [offset + k·period, offset + k·period + width]}` over the
    /// full cross-section.
    pub fn stripes(domain: &StripDomain<T>, width: T, period: T, offset: T) -> Self {
        let d = domain.dim();
        let w = domain.width();
        let mut iv = vec![Interval::new(T::zero(), w); d - 1];
        iv.push(Interval::new(offset, offset + width));
        let mut origin = vec![T::zero(); d];
        origin[d - 1] = offset;
        let mut periods = vec![None; d];
        periods[d - 1] = Some(period);
        SetDescription::Periodic {
            cell: Box::new(SetDescription::BoxUnion(vec![AxisBox::new(iv)])),
            origin,
            periods,
        }
    }

    /// Periodic lattice of boxes `cell_box` repeated with the given per-axis periods.
    pub fn periodic_boxes(cell: Vec<AxisBox<T>>, origin: Vec<T>, periods: Vec<Option<T>>) -> Self {
        SetDescription::Periodic {
            cell: Box::new(SetDescription::BoxUnion(cell)),
            origin,
            periods,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SetDescription::BoxUnion(_) | SetDescription::ProductSection(_) => 1,
            SetDescription::Periodic { cell, .. } => 1 + cell.depth(),
            SetDescription::Union(v) | SetDescription::Intersection(v) => {
                1 + v.iter().map(|s| s.depth()).max().unwrap_or(0)
            }
            SetDescription::Complement(s) => 1 + s.depth(),
            SetDescription::Reflect { inner, .. } => 1 + inner.depth(),
        }
    }

    /// Checks nesting depth and box/period invariants for dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let depth = self.depth();
        if depth > MAX_DEPTH {
            return Err(Error::NestingTooDeep {
                depth,
                limit: MAX_DEPTH,
            });
        }
        self.validate_inner(dim)
    }

    fn validate_inner(&self, dim: usize) -> Result<()> {
        let check_boxes = |boxes: &[AxisBox<T>], want: usize| -> Result<()> {
            for b in boxes {
                if b.dim() != want {
                    return Err(Error::InvalidSet(format!(
                        "box has {} axes, expected {want}",
                        b.dim()
                    )));
                }
                if b.intervals.iter().any(|i| i.lo.is_nan() || i.hi.is_nan() || i.hi < i.lo) {
                    return Err(Error::InvalidSet(format!(
                        "box with negative side length: {b:?}"
                    )));
                }
            }
            Ok(())
        };
        match self {
            SetDescription::BoxUnion(b) => check_boxes(b, dim),
            SetDescription::ProductSection(b) => check_boxes(b, dim - 1),
            SetDescription::Periodic {
                cell,
                origin,
                periods,
            } => {
                if origin.len() != dim || periods.len() != dim {
                    return Err(Error::InvalidSet(
                        "periodic pattern origin/periods dimension mismatch".into(),
                    ));
                }
                if periods.iter().flatten().any(|p| !(*p > T::zero()) || !p.is_finite()) {
                    return Err(Error::InvalidSet("periods must be positive".into()));
                }
                cell.validate_inner(dim)
            }
            SetDescription::Union(v) | SetDescription::Intersection(v) => {
                v.iter().try_for_each(|s| s.validate_inner(dim))
            }
            SetDescription::Complement(s) => s.validate_inner(dim),
            SetDescription::Reflect { axis, inner } => {
                if *axis >= dim {
                    return Err(Error::InvalidSet(format!("reflection axis {axis} out of range")));
                }
                inner.validate_inner(dim)
            }
        }
    }

    /// Pointwise membership.
    pub fn contains(&self, p: &[T]) -> bool {
        match self {
            SetDescription::BoxUnion(boxes) => boxes.iter().any(|b| b.contains(p)),
            SetDescription::ProductSection(boxes) => {
                let t = &p[..p.len() - 1];
                boxes.iter().any(|b| b.contains(t))
            }
            SetDescription::Periodic {
                cell,
                origin,
                periods,
            } => {
                let q: Vec<T> = p
                    .iter()
                    .zip(origin)
                    .zip(periods)
                    .map(|((&x, &o), per)| match *per {
                        Some(per) => {
                            let r = x - o;
                            o + r - per * (r / per).floor()
                        }
                        None => x,
                    })
                    .collect();
                cell.contains(&q)
            }
            SetDescription::Union(v) => v.iter().any(|s| s.contains(p)),
            SetDescription::Intersection(v) => v.iter().all(|s| s.contains(p)),
            SetDescription::Complement(s) => !s.contains(p),
            SetDescription::Reflect { axis, inner } => {
                let mut q = p.to_vec();
                q[*axis] = -q[*axis];
                inner.contains(&q)
            }
        }
    }

    /// Appends every coordinate (per axis) inside the open window where the
    /// membership function may change.
    pub fn collect_breaks(&self, window: &AxisBox<T>, out: &mut [Vec<T>]) {
        let push = |out: &mut [Vec<T>], axis: usize, x: T| {
            let iv = &window.intervals[axis];
            if x > iv.lo && x < iv.hi {
                out[axis].push(x);
            }
        };
        match self {
            SetDescription::BoxUnion(boxes) => {
                for b in boxes {
                    if !touches(b, window) {
                        continue;
                    }
                    for (axis, iv) in b.intervals.iter().enumerate() {
                        push(out, axis, iv.lo);
                        push(out, axis, iv.hi);
                    }
                }
            }
            SetDescription::ProductSection(boxes) => {
                for b in boxes {
                    for (axis, iv) in b.intervals.iter().enumerate() {
                        push(out, axis, iv.lo);
                        push(out, axis, iv.hi);
                    }
                }
            }
            SetDescription::Periodic {
                cell,
                origin,
                periods,
            } => {
                let dim = window.dim();
                // Range of period shifts per axis.
                let mut ranges = Vec::with_capacity(dim);
                for axis in 0..dim {
                    match periods[axis] {
                        Some(per) => {
                            let iv = window.intervals[axis];
                            let k0 = ((iv.lo - origin[axis]) / per).floor();
                            let k1 = ((iv.hi - origin[axis]) / per).floor();
                            let k0 = k0.to_i64().unwrap_or(0);
                            let k1 = k1.to_i64().unwrap_or(0);
                            ranges.push((k0, k1));
                            let mut k = k0;
                            while k <= k1 + 1 {
                                push(out, axis, origin[axis] + T::lit(k as f64) * per);
                                k += 1;
                            }
                        }
                        None => ranges.push((0, 0)),
                    }
                }
                let mut shift = ranges.iter().map(|r| r.0).collect::<Vec<_>>();
                let mut scratch: Vec<Vec<T>> = vec![Vec::new(); dim];
                loop {
                    let mut sub = window.clone();
                    let mut offsets = vec![T::zero(); dim];
                    for axis in 0..dim {
                        if let Some(per) = periods[axis] {
                            let off = T::lit(shift[axis] as f64) * per;
                            offsets[axis] = off;
                            let fund = Interval::new(origin[axis], origin[axis] + per);
                            let iv = window.intervals[axis];
                            sub.intervals[axis] =
                                Interval::new(iv.lo - off, iv.hi - off).intersect(&fund);
                        }
                    }
                    if sub.intervals.iter().all(|i| i.lo <= i.hi) {
                        for s in scratch.iter_mut() {
                            s.clear();
                        }
                        cell.collect_breaks(&sub, &mut scratch);
                        for axis in 0..dim {
                            for &x in &scratch[axis] {
                                push(out, axis, x + offsets[axis]);
                            }
                        }
                    }
                    // Odometer over shifts.
                    let mut axis = dim;
                    let mut done = true;
                    while axis > 0 {
                        axis -= 1;
                        if shift[axis] < ranges[axis].1 {
                            shift[axis] += 1;
                            done = false;
                            break;
                        }
                        shift[axis] = ranges[axis].0;
                    }
                    if done {
                        break;
                    }
                }
            }
            SetDescription::Union(v) | SetDescription::Intersection(v) => {
                for s in v {
                    s.collect_breaks(window, out);
                }
            }
            SetDescription::Complement(s) => s.collect_breaks(window, out),
            SetDescription::Reflect { axis, inner } => {
                let mut w = window.clone();
                let iv = window.intervals[*axis];
                w.intervals[*axis] = Interval::new(-iv.hi, -iv.lo);
                let mut tmp: Vec<Vec<T>> = vec![Vec::new(); out.len()];
                inner.collect_breaks(&w, &mut tmp);
                for (a, xs) in tmp.into_iter().enumerate() {
                    for x in xs {
                        push(out, a, if a == *axis { -x } else { x });
                    }
                }
            }
        }
    }

    /// Disjoint boxes covering `self ∩ window` exactly (bounded window).
    pub fn decompose(&self, window: &AxisBox<T>) -> Vec<AxisBox<T>> {
        let grid = breakpoint_grid(self, window);
        let mut cells = Vec::new();
        for_each_cell(&grid, |cell| {
            if cell.volume() > T::zero() && self.contains(&cell.midpoint()) {
                cells.push(cell.clone());
            }
        });
        cells
    }

    /// Structure along the last axis.
    pub fn longitudinal_structure(&self, dim: usize) -> LongitudinalStructure<T> {
        use LongitudinalStructure::*;
        let last = dim - 1;
        match self {
            SetDescription::BoxUnion(boxes) => {
                if boxes.iter().all(|b| {
                    let iv = b.intervals[last];
                    iv.lo == T::neg_infinity() && iv.hi == T::infinity()
                }) {
                    Invariant
                } else {
                    Aperiodic
                }
            }
            SetDescription::ProductSection(_) => Invariant,
            SetDescription::Periodic { cell, periods, .. } => match periods[last] {
                Some(p) => Periodic(p),
                None => cell.longitudinal_structure(dim),
            },
            SetDescription::Union(v) | SetDescription::Intersection(v) => {
                let mut acc = Invariant;
                for s in v {
                    acc = match (acc, s.longitudinal_structure(dim)) {
                        (Aperiodic, _) | (_, Aperiodic) => Aperiodic,
                        (Invariant, x) | (x, Invariant) => x,
                        (Periodic(p), Periodic(q)) => combine_periods(p, q),
                    };
                }
                acc
            }
            SetDescription::Complement(s) => s.longitudinal_structure(dim),
            SetDescription::Reflect { axis, inner } => {
                let s = inner.longitudinal_structure(dim);
                if *axis == last {
                    match s {
                        Periodic(p) => Periodic(p),
                        other => other,
                    }
                } else {
                    s
                }
            }
        }
    }
}

fn combine_periods<T: Scalar>(p: T, q: T) -> LongitudinalStructure<T> {
    let (big, small) = if p >= q { (p, q) } else { (q, p) };
    let ratio = big / small;
    let r = ratio.round();
    if (ratio - r).abs() <= T::lit(1e-9) * ratio {
        LongitudinalStructure::Periodic(big)
    } else {
        LongitudinalStructure::Aperiodic
    }
}

fn touches<T: Scalar>(b: &AxisBox<T>, window: &AxisBox<T>) -> bool {
    b.intervals
        .iter()
        .zip(&window.intervals)
        .all(|(a, w)| a.lo <= w.hi && a.hi >= w.lo)
}

/// Sorted, deduplicated per-axis breakpoints including the window ends.
fn breakpoint_grid<T: Scalar>(set: &SetDescription<T>, window: &AxisBox<T>) -> Vec<Vec<T>> {
    let dim = window.dim();
    let mut grid: Vec<Vec<T>> = vec![Vec::new(); dim];
    set.collect_breaks(window, &mut grid);
    for (axis, g) in grid.iter_mut().enumerate() {
        g.push(window.intervals[axis].lo);
        g.push(window.intervals[axis].hi);
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        g.dedup();
    }
    grid
}

fn for_each_cell<T: Scalar>(grid: &[Vec<T>], mut f: impl FnMut(&AxisBox<T>)) {
    let dim = grid.len();
    if grid.iter().any(|g| g.len() < 2) {
        return;
    }
    let mut idx = vec![0usize; dim];
    let mut cell = AxisBox::new(vec![Interval::new(T::zero(), T::zero()); dim]);
    loop {
        for axis in 0..dim {
            cell.intervals[axis] = Interval::new(grid[axis][idx[axis]], grid[axis][idx[axis] + 1]);
        }
        f(&cell);
        let mut axis = dim;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if idx[axis] + 2 < grid[axis].len() {
                idx[axis] += 1;
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Exact measure of `S ∩ B` for a bounded box `B`.
pub fn box_measure<T: Scalar>(set: &SetDescription<T>, window: &AxisBox<T>) -> T {
    let grid = breakpoint_grid(set, window);
    let mut total = T::zero();
    for_each_cell(&grid, |cell| {
        let v = cell.volume();
        if v > T::zero() && set.contains(&cell.midpoint()) {
            total += v;
        }
    });
    total
}

/// Exact Lebesgue measure of `S ∩ P`.
pub fn intersection_measure<T: Scalar>(set: &SetDescription<T>, p: &Parallelepiped<T>) -> Result<T> {
    let depth = set.depth();
    if depth > MAX_DEPTH {
        return Err(Error::NestingTooDeep {
            depth,
            limit: MAX_DEPTH,
        });
    }
    let b = p.to_box();
    if !b.is_bounded() {
        return Err(Error::InvalidArgument("parallelepiped must be bounded".into()));
    }
    Ok(box_measure(set, &b))
}

/// Result of a thickness search.
#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessCertificate<T> {
    pub gamma_est: T,
    pub sides: Vec<T>,
    pub worst: Parallelepiped<T>,
    pub step: T,
    /// True when the candidate set provably contains the infimum over every
    /// interior parallelepiped of the given sides.
    pub exhaustive: bool,
}

/// Tie-breaking rule among centers achieving the same minimal ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Lexicographically smallest center.
    Lexicographic,
    /// Longitudinal coordinate closest to zero, then lexicographic.
    NearestOrigin,
}

/// Candidate centers along one axis: range ends, a uniform grid of spacing
/// `step`, and every center at which a parallelepiped edge meets a
/// breakpoint of the set. The intersected volume is piecewise multilinear in
/// the center with kinks only at those points, so its minimum over the range
/// is attained on this candidate set.
fn axis_candidates<T: Scalar>(range: Interval<T>, side: T, step: T, breaks: &[T]) -> Vec<T> {
    let mut c = vec![range.lo, range.hi];
    if range.hi > range.lo {
        let n = ((range.hi - range.lo) / step).floor().to_usize().unwrap_or(0).min(1_000_000);
        for i in 1..=n {
            let x = range.lo + T::count(i) * step;
            if x < range.hi {
                c.push(x);
            }
        }
    }
    let half = side * T::lit(0.5);
    for &b in breaks {
        for x in [b - half, b + half] {
            if x >= range.lo && x <= range.hi {
                c.push(x);
            }
        }
    }
    c.sort_by(|a, b| a.partial_cmp(b).unwrap());
    c.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * (T::one() + a.abs()));
    c
}

/// Minimizes `|S ∩ P| / |P|` over parallelepipeds with the given sides and
/// centers in the per-axis ranges.
pub fn search_min_ratio<T: Scalar>(
    set: &SetDescription<T>,
    sides: &[T],
    ranges: &[Interval<T>],
    step: T,
    tie: TieBreak,
) -> Result<(T, Parallelepiped<T>)> {
    let dim = sides.len();
    let depth = set.depth();
    if depth > MAX_DEPTH {
        return Err(Error::NestingTooDeep {
            depth,
            limit: MAX_DEPTH,
        });
    }
    let half = T::lit(0.5);
    let window = AxisBox::new(
        ranges
            .iter()
            .zip(sides)
            .map(|(r, &a)| Interval::new(r.lo - a * half, r.hi + a * half))
            .collect(),
    );
    let mut breaks: Vec<Vec<T>> = vec![Vec::new(); dim];
    set.collect_breaks(&window, &mut breaks);
    let candidates: Vec<Vec<T>> = (0..dim)
        .map(|j| axis_candidates(ranges[j], sides[j], step, &breaks[j]))
        .collect();
    let total: usize = candidates.iter().map(|c| c.len()).product();
    if total > 50_000_000 {
        return Err(Error::SearchRangeExceeded(format!(
            "{total} candidate centers; increase the step"
        )));
    }
    let volume = sides.iter().fold(T::one(), |v, &a| v * a);
    let decode = |mut flat: usize| -> Vec<T> {
        let mut c = vec![T::zero(); dim];
        for j in (0..dim).rev() {
            let n = candidates[j].len();
            c[j] = candidates[j][flat % n];
            flat /= n;
        }
        c
    };
    let key_less = |a: &(T, Vec<T>), b: &(T, Vec<T>)| -> bool {
        if a.0 != b.0 {
            return a.0 < b.0;
        }
        let lex = |x: &[T], y: &[T]| -> std::cmp::Ordering {
            for (p, q) in x.iter().zip(y) {
                match p.partial_cmp(q).unwrap() {
                    std::cmp::Ordering::Equal => continue,
                    o => return o,
                }
            }
            std::cmp::Ordering::Equal
        };
        match tie {
            TieBreak::Lexicographic => lex(&a.1, &b.1) == std::cmp::Ordering::Less,
            TieBreak::NearestOrigin => {
                let (ad, bd) = (a.1[dim - 1].abs(), b.1[dim - 1].abs());
                if ad != bd {
                    ad < bd
                } else {
                    lex(&a.1, &b.1) == std::cmp::Ordering::Less
                }
            }
        }
    };
    let best = (0..total)
        .into_par_iter()
        .map(|flat| {
            let center = decode(flat);
            let p = Parallelepiped::new(center.clone(), sides.to_vec());
            let ratio = box_measure(set, &p.to_box()) / volume;
            (ratio, center)
        })
        .reduce_with(|a, b| if key_less(&b, &a) { b } else { a })
        .ok_or_else(|| Error::SearchRangeExceeded("empty candidate set".into()))?;
    Ok((best.0, Parallelepiped::new(best.1, sides.to_vec())))
}

/// Estimates the thickness ratio of `S` at sides `a` over interior
/// parallelepipeds of the model strip.
pub fn estimate_thickness<T: Scalar>(
    set: &SetDescription<T>,
    sides: &[T],
    domain: &StripDomain<T>,
    step: T,
) -> Result<ThicknessCertificate<T>> {
    let d = domain.dim();
    if sides.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: sides.len(),
        });
    }
    if !(step > T::zero()) {
        return Err(Error::InvalidArgument("search step must be positive".into()));
    }
    set.validate(d)?;
    let w = domain.width();
    for (j, &a) in sides.iter().enumerate() {
        if !(a > T::zero()) {
            return Err(Error::InvalidArgument(format!("side {j} must be positive")));
        }
        if j < d - 1 && a > w * (T::one() + T::tiny_rel()) {
            return Err(Error::TransverseSideTooLarge {
                axis: j,
                side: a.as_f64(),
                width: w.as_f64(),
            });
        }
    }
    let half = T::lit(0.5);
    let xw = domain.half_width();
    let ad = sides[d - 1];
    if ad > T::lit(2.0) * xw {
        return Err(Error::SearchRangeExceeded(format!(
            "longitudinal side {ad} exceeds the model length {}",
            T::lit(2.0) * xw
        )));
    }
    let mut ranges: Vec<Interval<T>> = sides[..d - 1]
        .iter()
        .map(|&a| {
            let lo = a * half;
            let hi = (w - a * half).max(lo);
            Interval::new(lo, hi)
        })
        .collect();
    let full = Interval::new(-xw + ad * half, xw - ad * half);
    let structure = set.longitudinal_structure(d);
    let (range, exhaustive) = match structure {
        LongitudinalStructure::Invariant => (Interval::new(T::zero(), T::zero()), true),
        LongitudinalStructure::Periodic(p) => {
            if p <= full.len() {
                (Interval::new(full.lo, full.lo + p), true)
            } else {
                (full, false)
            }
        }
        LongitudinalStructure::Aperiodic => (full, false),
    };
    ranges.push(range);
    let (gamma_est, worst) = search_min_ratio(set, sides, &ranges, step, TieBreak::Lexicographic)?;
    Ok(ThicknessCertificate {
        gamma_est: gamma_est.max(T::zero()).min(T::one()),
        sides: sides.to_vec(),
        worst,
        step,
        exhaustive,
    })
}

/// Mirror-and-periodize extension `S̃` of `S ∩ Ω_L`: reflect successively
/// across each transverse coordinate hyperplane `x_j = 0`, then repeat with
/// period `4πL` in every transverse direction.
pub fn reflect_extend<T: Scalar>(set: &SetDescription<T>, domain: &StripDomain<T>) -> SetDescription<T> {
    let d = domain.dim();
    let mut current = SetDescription::Intersection(vec![set.clone(), SetDescription::full_strip(domain)]);
    for axis in 0..d - 1 {
        current = SetDescription::Union(vec![
            current.clone(),
            SetDescription::Reflect {
                axis,
                inner: Box::new(current),
            },
        ]);
    }
    let w = domain.width();
    let mut origin = vec![-w; d];
    origin[d - 1] = T::zero();
    let mut periods = vec![Some(T::lit(2.0) * w); d];
    periods[d - 1] = None;
    SetDescription::Periodic {
        cell: Box::new(current),
        origin,
        periods,
    }
}

/// Restricts a set to the doubled strip `(0, 4πL)^{d-1} × ℝ`.
pub fn restrict_to_double_strip<T: Scalar>(set: &SetDescription<T>, domain: &StripDomain<T>) -> SetDescription<T> {
    let w2 = T::lit(2.0) * domain.width();
    SetDescription::Intersection(vec![
        set.clone(),
        SetDescription::ProductSection(vec![AxisBox::new(vec![
            Interval::new(T::zero(), w2);
            domain.transverse_dim()
        ])]),
    ])
}

/// Sampled thickness of a set in `ℝ^d`: the smallest ratio over random
/// parallelepipeds with the given sides and centers uniform in `window`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledThickness<T> {
    pub min_ratio: T,
    pub worst: Parallelepiped<T>,
    pub samples: usize,
}

pub fn sampled_thickness<T: Scalar, R: Rng>(
    set: &SetDescription<T>,
    sides: &[T],
    window: &AxisBox<T>,
    samples: usize,
    rng: &mut R,
) -> Result<SampledThickness<T>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample required".into()));
    }
    let centers: Vec<Vec<T>> = (0..samples)
        .map(|_| {
            window
                .intervals
                .iter()
                .map(|iv| iv.lo + T::lit(rng.gen::<f64>()) * iv.len())
                .collect()
        })
        .collect();
    let vol = sides.iter().fold(T::one(), |v, &a| v * a);
    let ratios: Vec<T> = centers
        .par_iter()
        .map(|c| box_measure(set, &Parallelepiped::new(c.clone(), sides.to_vec()).to_box()) / vol)
        .collect();
    let (i, &r) = ratios
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    Ok(SampledThickness {
        min_ratio: r,
        worst: Parallelepiped::new(centers[i].clone(), sides.to_vec()),
        samples,
    })
}

/// `S ∪ (ℝ^d ∖ Ω_L)` together with a sampled check of the halved-ratio,
/// doubled-side thickness it inherits from a certificate of `S`.
#[derive(Debug, Clone)]
pub struct EmbeddedSet<T> {
    pub set: SetDescription<T>,
    /// `γ / 2^d` from the input certificate.
    pub target_gamma: T,
    /// `2a`.
    pub sides: Vec<T>,
    pub sampled: SampledThickness<T>,
    pub meets_target: bool,
}

/// Embeds a set thick with respect to the strip into `ℝ^d`.
pub fn embed_thick<T: Scalar, R: Rng>(
    set: &SetDescription<T>,
    certificate: &ThicknessCertificate<T>,
    domain: &StripDomain<T>,
    samples: usize,
    rng: &mut R,
) -> Result<EmbeddedSet<T>> {
    let d = domain.dim();
    let strip = SetDescription::full_strip(domain);
    let embedded = SetDescription::Union(vec![
        SetDescription::Intersection(vec![set.clone(), strip.clone()]),
        SetDescription::Complement(Box::new(strip)),
    ]);
    let sides: Vec<T> = certificate.sides.iter().map(|&a| T::lit(2.0) * a).collect();
    let target = certificate.gamma_est / T::lit(2f64.powi(d as i32));
    let w = domain.width();
    let xw = domain.half_width();
    let mut iv = vec![Interval::new(-w, T::lit(2.0) * w); d - 1];
    iv.push(Interval::new(-xw, xw));
    let sampled = sampled_thickness(&embedded, &sides, &AxisBox::new(iv), samples, rng)?;
    let meets = sampled.min_ratio >= target * (T::one() - T::tiny_rel());
    Ok(EmbeddedSet {
        set: embedded,
        target_gamma: target,
        sides,
        sampled,
        meets_target: meets,
    })
}

/// Model box `[0, 2πL]^{d-1} × [-X, X]`.
pub fn model_box<T: Scalar>(domain: &StripDomain<T>) -> AxisBox<T> {
    let mut iv = vec![Interval::new(T::zero(), domain.width()); domain.transverse_dim()];
    iv.push(Interval::new(-domain.half_width(), domain.half_width()));
    AxisBox::new(iv)
}

/// Per-cell measures `|cell ∩ S|` on the quadrature grid, flattened as
/// `[transverse cell][longitudinal cell]`.
pub fn cell_weights<T: Scalar>(set: &SetDescription<T>, domain: &StripDomain<T>) -> Result<Vec<T>> {
    set.validate(domain.dim())?;
    let ht = domain.transverse_step();
    let hl = domain.longitudinal_step();
    let nl = domain.longitudinal_cells();
    let xw = domain.half_width();
    let rows: Vec<Vec<T>> = (0..domain.transverse_cell_count())
        .into_par_iter()
        .map(|flat| {
            let idx = domain.transverse_cell_indices(flat);
            let mut iv: Vec<Interval<T>> = idx
                .iter()
                .map(|&i| Interval::new(T::count(i) * ht, T::count(i + 1) * ht))
                .collect();
            iv.push(Interval::new(T::zero(), T::zero()));
            (0..nl)
                .map(|k| {
                    let mut b = AxisBox::new(iv.clone());
                    let lo = -xw + T::count(k) * hl;
                    b.intervals[domain.dim() - 1] = Interval::new(lo, lo + hl);
                    box_measure(set, &b)
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}
