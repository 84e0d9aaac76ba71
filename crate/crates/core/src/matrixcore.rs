//! Dense complex matrices and the handful of functional-calculus maps the
//! extension lemmas are built from.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Residual allowed for constructed unitaries and square roots.
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Tolerance for audit comparisons (cocycle coherence, intertwining).
pub const AUDIT_TOL: f64 = 1e-7;

const POWER_ITERATION_MIN_DIM: usize = 32;
const SERIES_TOL: f64 = 1e-14;

/// A square complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl CMatrix {
    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        CMatrix(DMatrix::zeros(n, n))
    }

    pub fn scalar(z: Complex64) -> Self {
        CMatrix(DMatrix::from_element(1, 1, z))
    }

    pub fn from_diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        CMatrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                entries[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        CMatrix(DMatrix::from_fn(n, n, f))
    }

    /// Builds a matrix from rows. Fails when the rows do not form a square.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Format("matrix rows must form a square array".into()));
        }
        if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("matrix entries must be finite".into()));
        }
        Ok(CMatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j])))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Mismatch("matrix is not square".into()));
        }
        Ok(CMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        CMatrix(self.0.map(|z| z * s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Operator norm of `self − id`.
    pub fn distance_to_identity(&self) -> f64 {
        op_norm(&(self - &CMatrix::identity(self.dim())))
    }

    /// `‖u u* − id‖`, zero exactly when `u` is unitary.
    pub fn unitarity_residual(&self) -> f64 {
        (&(self * &self.adjoint()) - &CMatrix::identity(self.dim())).frobenius_norm()
    }

    /// `‖a + a*‖`, zero exactly when `a` is skew-Hermitian.
    pub fn skew_residual(&self) -> f64 {
        (self + &self.adjoint()).frobenius_norm()
    }

    /// `‖h − h*‖`, zero exactly when `h` is Hermitian.
    pub fn hermitian_residual(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &CMatrix) -> CMatrix {
        let (a, b) = (self.dim(), other.dim());
        CMatrix::from_fn(a + b, |i, j| {
            if i < a && j < a {
                self.get(i, j)
            } else if i >= a && j >= a {
                other.get(i - a, j - a)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Places `self` in the top-left corner of an `n × n` identity.
    pub fn pad_identity(&self, n: usize) -> Result<CMatrix> {
        let k = self.dim();
        if n < k {
            return Err(Error::Mismatch(format!("cannot embed rank {k} into rank {n}")));
        }
        Ok(CMatrix::from_fn(n, |i, j| {
            if i < k && j < k {
                self.get(i, j)
            } else if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{:?}", self.rows())
    }
}

impl CMatrix {
    fn rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect())
            .collect()
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        CMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

/// Largest singular value.
///
/// Small matrices go through a Hermitian eigensolve of `M*M`; from dimension
/// 32 on, a seeded power iteration is used, falling back to the eigensolve if
/// it fails to settle.
pub fn op_norm(m: &CMatrix) -> f64 {
    let n = m.dim();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return m.get(0, 0).norm();
    }
    let gram = m.0.adjoint() * &m.0;
    if n >= POWER_ITERATION_MIN_DIM {
        if let Some(lambda) = power_iteration(&gram) {
            return lambda.max(0.0).sqrt();
        }
    }
    largest_hermitian_eigenvalue(&gram).max(0.0).sqrt()
}

fn largest_hermitian_eigenvalue(h: &DMatrix<Complex64>) -> f64 {
    let eig = h.clone().symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn power_iteration(gram: &DMatrix<Complex64>) -> Option<f64> {
    let n = gram.nrows();
    let scale = gram.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Some(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut x = nalgebra::DVector::from_fn(n, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    x /= Complex64::new(x.norm(), 0.0);
    let mut previous = 0.0;
    let mut stable = 0;
    for _ in 0..2000 {
        let y = gram * &x;
        let lambda = x.dotc(&y).re;
        let norm = y.norm();
        if norm == 0.0 {
            return None;
        }
        x = y / Complex64::new(norm, 0.0);
        if (lambda - previous).abs() <= 1e-15 * lambda.abs() {
            stable += 1;
            if stable >= 3 {
                let residual = (gram * &x - &x * Complex64::new(lambda, 0.0)).norm();
                if residual <= 1e-6 * lambda.abs().max(f64::MIN_POSITIVE) {
                    return Some(lambda);
                }
                return None;
            }
        } else {
            stable = 0;
        }
        previous = lambda;
    }
    None
}

/// Skew-Hermitian part `½(a − a*)`.
pub fn skew_project(a: &CMatrix) -> CMatrix {
    (a - &a.adjoint()).scale(0.5)
}

fn check_skew_small(v: &CMatrix, what: &str) -> Result<f64> {
    let norm = op_norm(v);
    if v.skew_residual() > 1e-10 * norm.max(1.0) {
        return Err(Error::Precondition(format!("{what}: input is not skew-Hermitian")));
    }
    if norm >= 0.5 {
        return Err(Error::Threshold {
            what: format!("{what}: operator norm must stay below 1/2"),
            value: norm,
            limit: 0.5,
        });
    }
    Ok(norm)
}

/// `(1 + v²)^{1/2}` for skew-Hermitian `v` with `‖v‖ < 1/2`, summed from the
/// binomial series of `√(1+z)` at `z = v²`. Terms are added until one falls
/// below `tol · (1 − 4‖v‖²)`.
pub fn sqrt_one_plus_vsq(v: &CMatrix, tol: f64) -> Result<CMatrix> {
    let norm = check_skew_small(v, "sqrt_one_plus_vsq")?;
    let n = v.dim();
    let z = v * v;
    let cutoff = tol * (1.0 - 4.0 * norm * norm);
    let mut sum = CMatrix::identity(n);
    let mut power = CMatrix::identity(n);
    let mut coefficient = 1.0_f64;
    for j in 1..10_000 {
        // binom(1/2, j) = binom(1/2, j-1) * (1/2 - (j-1)) / j
        coefficient *= (0.5 - (j as f64 - 1.0)) / j as f64;
        power = &power * &z;
        let term = power.scale(coefficient);
        sum = &sum + &term;
        if term.frobenius_norm() < cutoff {
            break;
        }
    }
    Ok(sum)
}

/// Spectral evaluation of `(1 + v²)^{1/2}`; used to cross-check the series.
pub fn spectral_sqrt_one_plus_vsq(v: &CMatrix) -> Result<CMatrix> {
    check_skew_small(v, "spectral_sqrt_one_plus_vsq")?;
    let h = &CMatrix::identity(v.dim()) + &(v * v);
    hermitian_function(&h, |x| x.max(0.0).sqrt())
}

/// `g(v) = v + (1 + v²)^{1/2}`, a unitary for skew-Hermitian `v` with `‖v‖ < 1/2`.
pub fn unitarize_g(v: &CMatrix) -> Result<CMatrix> {
    let w = sqrt_one_plus_vsq(v, SERIES_TOL)?;
    Ok(v + &w)
}

/// Retraction `x ↦ (xx*)^{-1/2} x` onto the unitary group, defined when
/// `‖xx* − 1‖ < 7/9`.
pub fn polar_project(x: &CMatrix) -> Result<CMatrix> {
    let n = x.dim();
    let gram = x * &x.adjoint();
    let reach = op_norm(&(&gram - &CMatrix::identity(n)));
    if reach >= 7.0 / 9.0 {
        return Err(Error::Threshold {
            what: "polar_project: input too far from the unitary group".into(),
            value: reach,
            limit: 7.0 / 9.0,
        });
    }
    let inv_sqrt = hermitian_function(&gram, |l| 1.0 / l.sqrt())?;
    Ok(&inv_sqrt * x)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    if h.hermitian_residual() > 1e-9 * h.frobenius_norm().max(1.0) {
        return Err(Error::Precondition("matrix is not Hermitian".into()));
    }
    let hm = (&h.0 + h.0.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = hm.symmetric_eigen();
    let q = eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(f(l), 0.0)));
    Ok(CMatrix(&q * d * q.adjoint()))
}

/// `exp(i h)` for Hermitian `h`.
pub fn exp_i_hermitian(h: &CMatrix) -> Result<CMatrix> {
    if h.hermitian_residual() > 1e-9 * h.frobenius_norm().max(1.0) {
        return Err(Error::Precondition("matrix is not Hermitian".into()));
    }
    let hm = (&h.0 + h.0.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = hm.symmetric_eigen();
    let q = eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, l)));
    Ok(CMatrix(&q * d * q.adjoint()))
}

/// Eigenvalues of the real part closer than this are split using the imaginary part.
const CLUSTER_GAP: f64 = 1e-6;

/// Eigenvectors and eigenvalues of a unitary (or any normal) matrix. The
/// Hermitian real part is diagonalized first, then each cluster of close
/// eigenvalues is split by diagonalizing the imaginary part on it.
fn normal_eigen(u: &CMatrix) -> (DMatrix<Complex64>, Vec<Complex64>) {
    let n = u.dim();
    let adj = u.0.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let re = (&u.0 + &adj) * half;
    let im = (&u.0 - &adj) * Complex64::new(0.0, -0.5);
    let outer = re.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| outer.eigenvalues[a].total_cmp(&outer.eigenvalues[b]));
    let mut q = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && outer.eigenvalues[order[end]] - outer.eigenvalues[order[end - 1]] <= CLUSTER_GAP {
            end += 1;
        }
        let basis = DMatrix::from_fn(n, end - start, |r, c| outer.eigenvectors[(r, order[start + c])]);
        let local = basis.adjoint() * &im * &basis;
        let local = (&local + local.adjoint()) * half;
        let vectors = &basis * local.symmetric_eigen().eigenvectors;
        for c in 0..end - start {
            let v = vectors.column(c);
            values.push((v.adjoint() * &u.0 * v)[(0, 0)]);
            q.set_column(start + c, &v);
        }
        start = end;
    }
    (q, values)
}

/// Principal arguments of the eigenvalues of a unitary matrix, in `(−π, π]`.
pub fn unitary_eigen_angles(u: &CMatrix) -> Vec<f64> {
    normal_eigen(u).1.into_iter().map(|z| z.arg()).collect()
}

/// Principal power `u^p` of a unitary matrix whose spectrum avoids `−1`.
pub fn unitary_power(u: &CMatrix, p: f64) -> Result<CMatrix> {
    let (q, values) = normal_eigen(u);
    if values.iter().any(|z| (z.arg().abs() - std::f64::consts::PI).abs() < 1e-9) {
        return Err(Error::Precondition("principal power undefined at eigenvalue −1".into()));
    }
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|z| Complex64::from_polar(1.0, p * z.arg())),
    ));
    let r = CMatrix(&q * d * q.adjoint());
    if r.unitarity_residual() > 1e-8 {
        return Err(Error::Precondition("matrix is not normal".into()));
    }
    Ok(r)
}
