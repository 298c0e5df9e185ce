//! Dense complex matrices and the handful of numerical kernels the simulator
//! needs: the unitary DFT basis, power iteration for the dominant
//! eigenvector, Frobenius normalization, a small dense solver, and a seeded
//! random source.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows of real numbers.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n_rows, n_cols, |r, c| C64::new(rows[r][c], 0.0))
    }

    /// A column vector.
    pub fn column_vector(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [C64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᴴ · rhs` without materializing the adjoint.
    pub fn adjoint_mul(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply ({}x{})ᴴ by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let rhs_row = rhs.row(k);
            for (i, &a) in self.row(k).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let a = a.conj();
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * alpha).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::InvalidDimension(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    /// Largest entrywise modulus of `self − rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.shape(), rhs.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius inner product `⟨self, rhs⟩ = Σ conj(a)·b`.
    pub fn inner(&self, rhs: &Self) -> C64 {
        assert_eq!(self.shape(), rhs.shape(), "inner product shape mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Squared ℓ₂ norm of row `r`.
    pub fn row_norm_sqr(&self, r: usize) -> f64 {
        self.row(r).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Sets every row not flagged in `keep` to zero.
    pub fn zero_rows_except(&mut self, keep: &[bool]) {
        debug_assert_eq!(keep.len(), self.rows);
        for (r, &k) in keep.iter().enumerate() {
            if !k {
                self.row_mut(r).fill(ZERO);
            }
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// The `n`-point unitary DFT matrix, `F[p][q] = exp(−j2πpq/n)/√n`.
pub fn dft_unitary(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "DFT size must be at least 1".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    // Reduce p·q mod n before forming the angle so large n keeps full precision.
    Ok(ComplexMatrix::from_fn(n, n, |p, q| {
        let k = (p * q) % n;
        C64::from_polar(scale, -2.0 * PI * k as f64 / n as f64)
    }))
}

/// Output of [`top_eigvec`].
#[derive(Debug, Clone)]
pub struct EigPair {
    pub vector: Vec<C64>,
    /// Rayleigh quotient of `vector`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const EIG_TOL: f64 = 1e-10;
pub const EIG_MAX_ITER: usize = 1000;

fn hermitian_apply(a: &ComplexMatrix, v: &[C64], out: &mut [C64]) {
    for (r, o) in out.iter_mut().enumerate() {
        *o = a.row(r).iter().zip(v).map(|(x, y)| x * y).sum();
    }
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Dominant eigenvector of a Hermitian positive semidefinite matrix by power
/// iteration from the normalized all-ones vector.
///
/// Stops once `‖Av − λv‖ ≤ tol·λ`. If `max_iter` is exhausted the last
/// iterate is returned with `converged == false`.
pub fn top_eigvec(a: &ComplexMatrix, tol: f64, max_iter: usize) -> Result<EigPair> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::InvalidDimension(format!(
            "top_eigvec needs a non-empty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let scale = a.frobenius_norm();
    let mut v = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    if scale == 0.0 {
        return Ok(EigPair {
            vector: v,
            value: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let mut av = vec![ZERO; n];
    hermitian_apply(a, &v, &mut av);
    if vec_norm(&av) <= 1e-12 * scale {
        // All-ones start lies in the null space; restart on the heaviest diagonal.
        let k = (0..n)
            .max_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(j.cmp(&i)))
            .unwrap_or(0);
        v.fill(ZERO);
        v[k] = ONE;
        hermitian_apply(a, &v, &mut av);
    }

    let mut value = 0.0;
    for it in 1..=max_iter {
        let norm = vec_norm(&av);
        if norm == 0.0 {
            return Ok(EigPair {
                vector: v,
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        for (x, y) in v.iter_mut().zip(&av) {
            *x = y / norm;
        }
        hermitian_apply(a, &v, &mut av);
        value = v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum::<C64>().re;
        let residual = v
            .iter()
            .zip(&av)
            .map(|(x, y)| (y - x * value).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= tol * value.abs().max(f64::MIN_POSITIVE) {
            return Ok(EigPair {
                vector: v,
                value,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(EigPair {
        vector: v,
        value,
        iterations: max_iter,
        converged: false,
    })
}

/// Scales `a` to unit Frobenius norm.
pub fn frobenius_normalize(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(a.scale(C64::new(1.0 / norm, 0.0)))
}

/// Solves `A·X = B` for square `A` by Gaussian elimination with partial
/// pivoting. Pivots below `1e-12·‖A‖_F` are treated as singular.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::InvalidDimension(format!(
            "solve needs square A and matching B, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let threshold = 1e-12 * a.frobenius_norm();
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = b.cols();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].norm().total_cmp(&lu[(j, col)].norm()))
            .unwrap();
        if lu[(pivot, col)].norm() <= threshold {
            return Err(Error::SingularSystem);
        }
        if pivot != col {
            for c in 0..n {
                lu.data.swap(pivot * n + c, col * n + c);
            }
            for c in 0..m {
                x.data.swap(pivot * m + c, col * m + c);
            }
        }
        let p = lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] / p;
            if factor == ZERO {
                continue;
            }
            for c in col..n {
                let v = lu[(col, c)];
                lu[(r, c)] -= factor * v;
            }
            for c in 0..m {
                let v = x[(col, c)];
                x[(r, c)] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let p = lu[(col, col)];
        for c in 0..m {
            let mut acc = x[(col, c)];
            for k in col + 1..n {
                acc -= lu[(col, k)] * x[(k, c)];
            }
            x[(col, c)] = acc / p;
        }
    }
    Ok(x)
}

/// Seeded, reproducible source of every random draw in a simulation.
///
/// A source built with [`RandomSource::zero_noise`] behaves identically
/// except that [`RandomSource::noise`] always returns zero.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha12Rng,
    noiseless: bool,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
            noiseless: false,
        }
    }

    /// Test hook: receiver noise draws are suppressed.
    pub fn zero_noise(seed: u64) -> Self {
        Self {
            noiseless: true,
            ..Self::new(seed)
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_noiseless(&self) -> bool {
        self.noiseless
    }

    /// Seed for trial `trial` of sweep point `point` under master seed `master`.
    pub fn derive_seed(master: u64, point: u64, trial: u64) -> u64 {
        let mut h = splitmix64(master);
        h = splitmix64(h ^ point.wrapping_mul(0xD1B5_4A32_D192_ED03));
        splitmix64(h ^ trial.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7))
    }

    pub fn uniform_index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }

    /// `k` distinct indices drawn uniformly from `0..n`, in draw order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.rng, n, k).into_vec()
    }

    /// Circularly symmetric CN(0, 1): independent N(0, ½) real and imaginary parts.
    pub fn complex_normal(&mut self) -> C64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Receiver noise sample; zero under the noiseless hook.
    pub fn noise(&mut self) -> C64 {
        let z = self.complex_normal();
        if self.noiseless {
            ZERO
        } else {
            z
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
