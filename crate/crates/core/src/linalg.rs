//! Small dense linear algebra kernels: symmetric matrices, Cholesky,
//! symmetric eigenvalues and preconditioned conjugate gradients.
//!
//! Everything here is generic over [`Scalar`] and sized for the truncated
//! spectral models (a few thousand unknowns at most).

use crate::scalar::Scalar;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    /// Principal submatrix on the given indices.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// `D A D` for a diagonal `D = diag(s)`.
    pub fn scaled_congruence(&self, s: &[T]) -> Self {
        Self::from_fn(self.n, |i, j| s[i] * self[(i, j)] * s[j])
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: DenseMatrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factorizes a symmetric positive definite matrix. Returns `None` when a
    /// pivot falls below `rel_floor` times the largest diagonal entry.
    pub fn new(a: &DenseMatrix<T>, rel_floor: T) -> Option<Self> {
        let n = a.dim();
        let scale = a
            .diagonal()
            .into_iter()
            .fold(T::zero(), |m, v| m.max(v.abs()));
        let floor = rel_floor * scale;
        let mut l = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > floor) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(Self { l })
    }

    pub fn factor(&self) -> &DenseMatrix<T> {
        &self.l
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[T]) -> Vec<T> {
        let n = self.l.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: &[T]) -> Vec<T> {
        let n = self.l.dim();
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.backward(&self.forward(b))
    }

    /// Forms `L⁻¹ B L⁻ᵀ` for symmetric `B`.
    pub fn whiten(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        let n = b.dim();
        // Columns of L⁻¹ B, stored as rows of the transpose.
        let mut tmp = DenseMatrix::zeros(n);
        for j in 0..n {
            let col: Vec<T> = (0..n).map(|i| b[(i, j)]).collect();
            let y = self.forward(&col);
            for i in 0..n {
                tmp[(i, j)] = y[i];
            }
        }
        // (L⁻¹ (L⁻¹ B)ᵀ)ᵀ = L⁻¹ B L⁻ᵀ since B is symmetric.
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            let y = self.forward(tmp.row(i));
            for j in 0..n {
                out[(j, i)] = y[j];
            }
        }
        // Symmetrize rounding.
        for i in 0..n {
            for j in 0..i {
                let m = (out[(i, j)] + out[(j, i)]) * T::lit(0.5);
                out[(i, j)] = m;
                out[(j, i)] = m;
            }
        }
        out
    }
}

/// Eigenvalues of a symmetric matrix in ascending order (Householder
/// tridiagonalization followed by implicit QL).
pub fn symmetric_eigenvalues<T: Scalar>(a: &DenseMatrix<T>) -> Vec<T> {
    let n = a.dim();
    if n == 0 {
        return Vec::new();
    }
    let (mut d, mut e) = tridiagonalize(a);
    tridiagonal_ql(&mut d, &mut e);
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    d
}

fn tridiagonalize<T: Scalar>(a: &DenseMatrix<T>) -> (Vec<T>, Vec<T>) {
    let n = a.dim();
    let mut m = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let scale = (0..=l).fold(T::zero(), |s, k| s + m[(i, k)].abs());
            if scale == T::zero() {
                e[i] = m[(i, l)];
            } else {
                for k in 0..=l {
                    m[(i, k)] /= scale;
                    h += m[(i, k)] * m[(i, k)];
                }
                let f = m[(i, l)];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                m[(i, l)] = f - g;
                let mut f_acc = T::zero();
                for j in 0..=l {
                    let mut g = T::zero();
                    for k in 0..=j {
                        g += m[(j, k)] * m[(i, k)];
                    }
                    for k in j + 1..=l {
                        g += m[(k, j)] * m[(i, k)];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * m[(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = m[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let upd = f * e[k] + g * m[(i, k)];
                        m[(j, k)] -= upd;
                    }
                }
            }
        } else {
            e[i] = m[(i, l)];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = m[(i, i)];
    }
    // Shift off-diagonal so that e[i] couples d[i] and d[i+1].
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    (d, e)
}

fn tridiagonal_ql<T: Scalar>(d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (T::lit(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` at exit.
    pub relative_residual: T,
    pub converged: bool,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite operator given as a closure `y ← A x`.
pub fn conjugate_gradient<T, F>(
    apply: F,
    diag: Option<&[T]>,
    b: &[T],
    tol: T,
    max_iter: usize,
) -> CgOutcome<T>
where
    T: Scalar,
    F: Fn(&[T], &mut [T]),
{
    let n = b.len();
    let b_norm = norm2(b);
    let mut x = vec![T::zero(); n];
    if b_norm == T::zero() {
        return CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: T::zero(),
            converged: true,
        };
    }
    let precond = |r: &[T], z: &mut [T]| match diag {
        Some(dg) => {
            for i in 0..n {
                z[i] = if dg[i] > T::zero() { r[i] / dg[i] } else { r[i] };
            }
        }
        None => z.copy_from_slice(r),
    };
    let mut r = b.to_vec();
    let mut z = vec![T::zero(); n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let mut rel = T::one();
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return CgOutcome {
                solution: x,
                iterations: it,
                relative_residual: rel,
                converged: false,
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        // Periodically replace the recursive residual by the true one.
        if it % 50 == 0 {
            apply(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        rel = norm2(&r) / b_norm;
        if rel <= tol {
            apply(&x, &mut ap);
            let true_rel = b
                .iter()
                .zip(&ap)
                .map(|(&bi, &ai)| (bi - ai) * (bi - ai))
                .sum::<T>()
                .sqrt()
                / b_norm;
            if true_rel <= tol {
                return CgOutcome {
                    solution: x,
                    iterations: it,
                    relative_residual: true_rel,
                    converged: true,
                };
            }
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            rel = true_rel;
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome {
        solution: x,
        iterations: max_iter,
        relative_residual: rel,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DenseMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        DenseMatrix::from_fn(n, |i, j| {
            let s: f64 = (0..n).map(|k| b[(i, k)] * b[(j, k)]).sum();
            s + if i == j { 0.5 } else { 0.0 }
        })
    }

    #[test]
    fn eigenvalues_of_diagonal_matrix_are_sorted_diagonal() {
        let mut a = DenseMatrix::<f64>::zeros(4);
        for (i, v) in [3.0, -1.0, 2.0, 0.5].into_iter().enumerate() {
            a[(i, i)] = v;
        }
        assert_eq!(symmetric_eigenvalues(&a), vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn eigenvalues_of_tridiagonal_laplacian() {
        let n = 12;
        let a = DenseMatrix::from_fn(n, |i, j| {
            if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let ev = symmetric_eigenvalues(&a);
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0
                - 2.0 * ((k as f64 + 1.0) * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
        }
    }

    #[test]
    fn eigenvalue_sum_and_square_sum_match_trace() {
        let a = random_spd(20, 3);
        let ev = symmetric_eigenvalues(&a);
        let tr: f64 = a.diagonal().iter().sum();
        let fro: f64 = (0..20)
            .flat_map(|i| (0..20).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        assert!((ev.iter().sum::<f64>() - tr).abs() < 1e-10 * tr);
        assert!((ev.iter().map(|v| v * v).sum::<f64>() - fro).abs() < 1e-10 * fro);
    }

    #[test]
    fn cholesky_solves_and_whitens() {
        let a = random_spd(15, 7);
        let ch = Cholesky::new(&a, 1e-14).unwrap();
        let b: Vec<f64> = (0..15).map(|i| i as f64 - 3.0).collect();
        let x = ch.solve(&b);
        let r = a.mul_vec(&x);
        for i in 0..15 {
            assert!((r[i] - b[i]).abs() < 1e-9);
        }
        let w = ch.whiten(&a);
        for i in 0..15 {
            for j in 0..15 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((w[(i, j)] - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = DenseMatrix::from_fn(3, |_, _| 1.0);
        assert!(Cholesky::new(&a, 1e-14).is_none());
    }

    #[test]
    fn cg_matches_cholesky() {
        let a = random_spd(30, 11);
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let diag = a.diagonal();
        let out = conjugate_gradient(|x, y| a.mul_vec_into(x, y), Some(&diag), &b, 1e-12, 300);
        assert!(out.converged);
        let exact = Cholesky::new(&a, 1e-14).unwrap().solve(&b);
        for i in 0..30 {
            assert!((out.solution[i] - exact[i]).abs() < 1e-8);
        }
    }
}
