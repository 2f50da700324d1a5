//! Small dense complex matrices.
//!
//! Everything here is sized for the restricted operator spaces this crate
//! works in (a few hundred rows at most), so the decompositions use cyclic
//! Jacobi sweeps: slow asymptotically but accurate to working precision and
//! generic over the scalar type.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

const MAX_SWEEPS: usize = 100;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cr(T::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real diagonal matrix.
    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = cr(d);
        }
        m
    }

    /// `|u><v|`.
    pub fn outer(u: &[C<T>], v: &[C<T>]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Row-major reshape of a length `n*n` vector.
    pub fn from_vec(n: usize, data: Vec<C<T>>) -> Self {
        assert_eq!(data.len(), n * n, "from_vec: length is not n*n");
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major flattening, the "vec" used for superoperators.
    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C<T>> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.data[k * rhs.cols + j];
                    out.data[i * rhs.cols + j] += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "matvec: dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    fn zip(&self, rhs: &Self, f: impl Fn(C<T>, C<T>) -> C<T>) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, a| m.max(a.norm()))
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).norm()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    /// `max |A - A^dagger|`.
    pub fn hermitian_residual(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi.
    ///
    /// Only the Hermitian part `(A + A^dagger)/2` is used. Eigenvalues are
    /// ascending; column `k` of the returned matrix is the eigenvector of
    /// eigenvalue `k`.
    pub fn eigh(&self) -> Result<(Vec<T>, CMatrix<T>)> {
        self.require_square()?;
        let n = self.rows;
        let half = T::lit(0.5);
        let mut a = Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half);
        let mut v = Self::identity(n);
        let scale = a.frobenius();
        if scale == T::zero() {
            return Ok((vec![T::zero(); n], v));
        }
        let eps = T::epsilon();

        let mut converged = n < 2;
        for _ in 0..MAX_SWEEPS {
            let off: T = (0..n)
                .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .sum();
            if off.sqrt() <= eps * scale {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let mag = apq.norm();
                    if mag <= eps * eps * scale {
                        continue;
                    }
                    let (cs, sn) = jacobi_angle(a[(p, p)].re, a[(q, q)].re, mag);
                    let ph = apq / cr(mag);
                    rotate_columns(&mut a, p, q, cs, sn, ph);
                    rotate_rows(&mut a, p, q, cs, sn, ph);
                    rotate_columns(&mut v, p, q, cs, sn, ph);
                    a[(p, q)] = cr(T::zero());
                    a[(q, p)] = cr(T::zero());
                }
            }
        }
        if !converged {
            return Err(Error::Oracle("Jacobi eigensolver did not converge".into()));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = Self::from_fn(n, n, |i, k| v[(i, order[k])]);
        Ok((values, vectors))
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigvalsh(&self) -> Result<Vec<T>> {
        self.eigh().map(|(w, _)| w)
    }

    /// Singular values and the orthogonalized factors of a one-sided
    /// (Hestenes) Jacobi SVD: returns `(G, V)` with `A V = G` and the columns
    /// of `G` mutually orthogonal, so `sigma_k = |G_k|` and `u_k = G_k / sigma_k`.
    fn hestenes(&self) -> Result<(CMatrix<T>, CMatrix<T>)> {
        let (m, n) = (self.rows, self.cols);
        let mut g = self.clone();
        let mut v = Self::identity(n);
        let eps = T::epsilon();
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for i in 0..n {
                for j in i + 1..n {
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = cr(T::zero());
                    for k in 0..m {
                        let gi = g[(k, i)];
                        let gj = g[(k, j)];
                        alpha += gi.norm_sqr();
                        beta += gj.norm_sqr();
                        gamma += gi.conj() * gj;
                    }
                    let mag = gamma.norm();
                    if mag <= eps * (alpha * beta).sqrt() || mag == T::zero() {
                        continue;
                    }
                    rotated = true;
                    let (cs, sn) = jacobi_angle(alpha, beta, mag);
                    let ph = gamma / cr(mag);
                    rotate_columns(&mut g, i, j, cs, sn, ph);
                    rotate_columns(&mut v, i, j, cs, sn, ph);
                }
            }
            if !rotated {
                return Ok((g, v));
            }
        }
        Err(Error::Oracle("Jacobi SVD did not converge".into()))
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Result<Vec<T>> {
        let (g, _) = self.hestenes()?;
        let mut s: Vec<T> = (0..g.cols)
            .map(|j| (0..g.rows).map(|i| g[(i, j)].norm_sqr()).sum::<T>().sqrt())
            .collect();
        s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
        Ok(s)
    }

    /// Moore-Penrose pseudo-inverse; singular values below
    /// `rel_cutoff * sigma_max` are treated as zero.
    pub fn pinv(&self, rel_cutoff: T) -> Result<CMatrix<T>> {
        let (g, v) = self.hestenes()?;
        let (m, n) = (self.rows, self.cols);
        let sq: Vec<T> = (0..n)
            .map(|j| (0..m).map(|i| g[(i, j)].norm_sqr()).sum())
            .collect();
        let smax = sq.iter().fold(T::zero(), |a, &b| a.max(b)).sqrt();
        let mut out = Self::zeros(n, m);
        for (k, &s2) in sq.iter().enumerate() {
            if s2.sqrt() <= rel_cutoff * smax || s2 == T::zero() {
                continue;
            }
            // v_k u_k^dagger / sigma_k = v_k g_k^dagger / sigma_k^2
            let inv = T::one() / s2;
            for i in 0..n {
                let vi = v[(i, k)] * cr(inv);
                for j in 0..m {
                    out[(i, j)] += vi * g[(j, k)].conj();
                }
            }
        }
        Ok(out)
    }

    /// `exp(-i t H)` for Hermitian `H`, through its eigen-decomposition.
    pub fn expm_hermitian(&self, t: T) -> Result<CMatrix<T>> {
        let (w, v) = self.eigh()?;
        let n = self.rows;
        let phases: Vec<C<T>> = w.iter().map(|&l| C::from_polar(T::one(), -l * t)).collect();
        Ok(Self::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj()).sum()
        }))
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.rows,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Rotation `(cos, sin)` that diagonalizes `[[app, |apq|], [|apq|, aqq]]`.
fn jacobi_angle<T: Real>(app: T, aqq: T, mag: T) -> (T, T) {
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let t = if theta.abs() > T::one() / T::epsilon() {
        T::one() / (T::lit(2.0) * theta)
    } else {
        let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
        if theta < T::zero() {
            -t
        } else {
            t
        }
    };
    let cs = T::one() / (t * t + T::one()).sqrt();
    (cs, t * cs)
}

/// `M <- M V` with `V = [[c, s e^{i phi}], [-s e^{-i phi}, c]]` on columns `p, q`.
fn rotate_columns<T: Real>(m: &mut CMatrix<T>, p: usize, q: usize, cs: T, sn: T, ph: C<T>) {
    let (c, s) = (cr(cs), cr(sn));
    for k in 0..m.rows {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = mp * c - mq * s * ph.conj();
        m[(k, q)] = mp * s * ph + mq * c;
    }
}

/// `M <- V^dagger M` on rows `p, q`.
fn rotate_rows<T: Real>(m: &mut CMatrix<T>, p: usize, q: usize, cs: T, sn: T, ph: C<T>) {
    let (c, s) = (cr(cs), cr(sn));
    for k in 0..m.cols {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = mp * c - mq * s * ph;
        m[(q, k)] = mp * s * ph.conj() + mq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
        CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
        let a = random_matrix(rng, n);
        a.add(&a.adjoint()).scale(cr(0.5))
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 5, 9, 16] {
            let h = random_hermitian(&mut rng, n);
            let (w, v) = h.eigh().unwrap();
            assert!(w.windows(2).all(|p| p[0] <= p[1]));
            let unitarity = v.adjoint().matmul(&v).max_abs_diff(&CMatrix::identity(n));
            assert!(unitarity < 1e-12, "n={n}: {unitarity}");
            let back = v.matmul(&CMatrix::from_diag(&w)).matmul(&v.adjoint());
            assert!(back.max_abs_diff(&h) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn eigh_of_rank_one_projector() {
        let u = vec![c(0.6_f64, 0.0), c(0.0, 0.8)];
        let (w, _) = CMatrix::outer(&u, &u).eigh().unwrap();
        assert!((w[0]).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pinv_inverts_and_handles_rank_deficiency() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 6);
        let ai = a.pinv(1e-10).unwrap();
        assert!(a.matmul(&ai).max_abs_diff(&CMatrix::identity(6)) < 1e-10);

        let u: Vec<_> = (0..4).map(|i| c(i as f64 + 1.0, 0.5)).collect();
        let r1 = CMatrix::outer(&u, &u);
        let p = r1.pinv(1e-10).unwrap();
        // Penrose condition A A+ A = A
        assert!(r1.matmul(&p).matmul(&r1).max_abs_diff(&r1) < 1e-10);
        let s = r1.singular_values().unwrap();
        assert!(s[1] < 1e-10 * s[0]);
    }

    #[test]
    fn expm_of_pauli_x() {
        let x = CMatrix::from_fn(2, 2, |i, j| if i != j { cr(1.0) } else { cr(0.0) });
        let t = 0.3_f64;
        let u = x.expm_hermitian(t).unwrap();
        assert!((u[(0, 0)] - cr(t.cos())).norm() < 1e-14);
        assert!((u[(0, 1)] - c(0.0, -t.sin())).norm() < 1e-14);
    }

    #[test]
    fn kron_and_trace() {
        let a = CMatrix::<f64>::identity(2);
        let b = CMatrix::from_diag(&[1.0, 2.0, 3.0]);
        let k = a.kron(&b);
        assert_eq!(k.rows(), 6);
        assert_eq!(k.trace(), cr(12.0));
    }

    #[test]
    fn works_in_single_precision() {
        let h = CMatrix::<f32>::from_fn(3, 3, |i, j| if i == j { cr(i as f32) } else { cr(0.25) });
        let (w, v) = h.eigh().unwrap();
        let back = v.matmul(&CMatrix::from_diag(&w)).matmul(&v.adjoint());
        assert!(back.max_abs_diff(&h) < 1e-5);
    }
}
