//! Small dense complex linear algebra: Hermitian matrices, Cholesky
//! factorization, Hermitian solves and the dominant eigenpair.
//!
//! Dimensions here are the number of microphones (a few dozen at most), so
//! everything is plain row-major storage and direct loops.

use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance for conjugate symmetry checks.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Iteration budget of [`dominant_eigpair`].
pub const MAX_EIG_ITERATIONS: usize = 10_000;

const RAYLEIGH_TOLERANCE: f64 = 1e-12;
const EIG_RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("eigen-iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix is not Hermitian: {0}")]
    NotHermitian(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entries")]
    NonFinite,
}

/// `aᴴ b`
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    norm_sqr(a).sqrt()
}

pub fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|x| x * s).collect()
}

pub fn is_finite(a: &[Complex64]) -> bool {
    a.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Matrix whose columns are the given vectors (all of equal length).
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self, NumericsError> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(NumericsError::DimensionMismatch {
                expected: rows,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    /// `v vᴴ`
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Aᴴ x`
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows, "matrix-vector dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for i in 0..self.rows {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * x[i];
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Sum of the columns, `A·1`.
    pub fn column_sum(&self) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn scaled(&self, s: f64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        is_finite(&self.data)
    }
}

/// A conjugate-symmetric square matrix.
///
/// Construction checks symmetry to [`HERMITIAN_TOLERANCE`] relative to the
/// Frobenius norm and then stores the exactly symmetrized matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self, NumericsError> {
        if m.rows != m.cols {
            return Err(NumericsError::DimensionMismatch {
                expected: m.rows,
                found: m.cols,
            });
        }
        if !m.is_finite() {
            return Err(NumericsError::NonFinite);
        }
        let n = m.rows;
        let tol = HERMITIAN_TOLERANCE * m.frobenius_norm().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in i..n {
                let gap = (m.get(i, j) - m.get(j, i).conj()).norm();
                if gap > tol {
                    return Err(NumericsError::NotHermitian(format!(
                        "entry ({i}, {j}) differs from its mirror by {gap:e}"
                    )));
                }
            }
        }
        let sym = CMatrix::from_fn(n, n, |i, j| {
            let v = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
            if i == j {
                Complex64::new(v.re, 0.0)
            } else {
                v
            }
        });
        Ok(Self { inner: sym })
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        Self {
            inner: CMatrix::identity(n).scaled(s),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            inner: CMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.inner.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.inner.mul_vec(x)
    }

    /// `xᴴ K x`, real for Hermitian `K`.
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        inner(x, &self.mul_vec(x)).re
    }

    /// `self + scale · v vᴴ`
    pub fn rank_one_update(&self, v: &[Complex64], scale: f64) -> Self {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let inner = CMatrix::from_fn(n, n, |i, j| {
            let u = v[i] * v[j].conj() * scale;
            let u = if i == j { Complex64::new(u.re, 0.0) } else { u };
            self.inner.get(i, j) + u
        });
        Self { inner }
    }

    /// `self + shift · I`
    pub fn shifted(&self, shift: f64) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..self.dim() {
            let v = inner.get(i, i);
            inner.set(i, i, v + shift);
        }
        Self { inner }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            inner: self.inner.scaled(s),
        }
    }

    /// Eigenvalues are all at least `-1e-10 · trace / M`.
    pub fn is_positive_semidefinite(&self) -> bool {
        let n = self.dim();
        if n == 0 {
            return true;
        }
        let slack = 1e-10 * self.trace().abs() / n as f64 + f64::MIN_POSITIVE;
        cholesky(&self.shifted(slack)).is_ok()
    }
}

/// Cholesky factor of a Hermitian positive definite `K`.
///
/// Stores the lower factor `L` with `K = L Lᴴ`; equivalently `K = Cᴴ C` with
/// the upper factor `C = Lᴴ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: CMatrix,
}

pub fn cholesky(k: &HermitianMatrix) -> Result<Cholesky, NumericsError> {
    let n = k.dim();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = k.get(j, j).re;
        for p in 0..j {
            d -= l.get(j, p).norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(NumericsError::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l.set(j, j, Complex64::new(djj, 0.0));
        for i in j + 1..n {
            let mut s = k.get(i, j);
            for p in 0..j {
                s -= l.get(i, p) * l.get(j, p).conj();
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(Cholesky { lower: l })
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.lower.rows
    }

    pub fn lower(&self) -> &CMatrix {
        &self.lower
    }

    /// `C` in `K = Cᴴ C`.
    pub fn upper(&self) -> CMatrix {
        self.lower.adjoint()
    }

    /// `L⁻¹ b`, which equals `(C⁻¹)ᴴ b`.
    pub fn solve_lower(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for p in 0..i {
                s -= self.lower.get(i, p) * x[p];
            }
            x[i] = s / self.lower.get(i, i).re;
        }
        x
    }

    /// `L⁻ᴴ b`, which equals `C⁻¹ b`.
    pub fn solve_upper(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in i + 1..n {
                s -= self.lower.get(p, i).conj() * x[p];
            }
            x[i] = s / self.lower.get(i, i).re;
        }
        x
    }

    /// `K⁻¹ b`
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `Cᴴ C`
    pub fn reconstruct(&self) -> CMatrix {
        self.lower.matmul(&self.lower.adjoint())
    }
}

pub fn hermitian_solve(k: &HermitianMatrix, b: &[Complex64]) -> Result<Vec<Complex64>, NumericsError> {
    if b.len() != k.dim() {
        return Err(NumericsError::DimensionMismatch {
            expected: k.dim(),
            found: b.len(),
        });
    }
    Ok(cholesky(k)?.solve(b))
}

/// Rotate `v` so that its largest-modulus entry is real and non-negative.
pub fn apply_phase_convention(v: &mut [Complex64]) {
    let Some((idx, _)) = v
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, x)| match best {
            Some((_, m)) if x.norm() <= m => best,
            _ => Some((i, x.norm())),
        })
    else {
        return;
    };
    let pivot = v[idx];
    let mag = pivot.norm();
    if mag == 0.0 {
        return;
    }
    let rot = pivot.conj() / mag;
    for x in v.iter_mut() {
        *x *= rot;
    }
    v[idx] = Complex64::new(v[idx].re.max(0.0), 0.0);
}

/// Largest eigenvalue of a Hermitian positive semi-definite matrix and a unit
/// eigenvector under [`apply_phase_convention`].
///
/// Power iteration from the normalized all-ones vector. The iteration first
/// runs on repeated squares of `H` (each squaring doubles the number of
/// effective power steps), then polishes with plain steps on `H` until the
/// Rayleigh quotient settles and the residual is small. Degenerate top
/// eigenvalues yield some vector of the eigenspace.
pub fn dominant_eigpair(h: &HermitianMatrix) -> Result<(f64, Vec<Complex64>), NumericsError> {
    let n = h.dim();
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let scale = h.frobenius_norm();
    let ones = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    if scale == 0.0 {
        return Ok((0.0, ones));
    }

    let mut iterations = 0;
    let mut power = h.as_matrix().scaled(1.0 / scale);
    for _ in 0..64 {
        let squared = power.matmul(&power);
        let s = squared.frobenius_norm();
        if !(s > 0.0) {
            break;
        }
        let next = squared.scaled(1.0 / s);
        iterations += 1;
        let settled = next.sub(&power).frobenius_norm() <= 1e-15;
        power = next;
        if settled {
            break;
        }
    }

    let mut v = power.mul_vec(&ones);
    if norm(&v) < 1e-8 {
        // Start vector orthogonal to the dominant eigenspace; the widest
        // column of the squared operator lies in it.
        let best = (0..n)
            .max_by(|&a, &b| norm(&power.column(a)).total_cmp(&norm(&power.column(b))))
            .unwrap_or(0);
        v = power.column(best);
    }
    let nv = norm(&v);
    if !(nv > 0.0) {
        return Err(NumericsError::NoConvergence {
            iterations,
            residual: f64::NAN,
        });
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut lambda_prev = f64::NAN;
    let mut residual = f64::INFINITY;
    while iterations < MAX_EIG_ITERATIONS {
        iterations += 1;
        let hv = h.mul_vec(&v);
        let lambda = inner(&v, &hv).re;
        residual = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let settled = (lambda - lambda_prev).abs() <= RAYLEIGH_TOLERANCE * lambda.abs();
        if settled && residual <= 1e-3 * EIG_RESIDUAL_TOLERANCE * lambda.abs().max(scale * f64::EPSILON)
        {
            apply_phase_convention(&mut v);
            return Ok((lambda, v));
        }
        lambda_prev = lambda;
        let nh = norm(&hv);
        if !(nh > 0.0) {
            // v lies in the null space; H is zero on it and λ = 0 is dominant only if H = 0.
            break;
        }
        v = hv.into_iter().map(|x| x / nh).collect();
    }
    let hv = h.mul_vec(&v);
    let lambda = inner(&v, &hv).re;
    if residual <= EIG_RESIDUAL_TOLERANCE * lambda.abs() {
        apply_phase_convention(&mut v);
        return Ok((lambda, v));
    }
    Err(NumericsError::NoConvergence {
        iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
        let b = random_matrix(rng, n, n);
        HermitianMatrix::new(b.adjoint().matmul(&b)).unwrap().shifted(1e-3)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn diag(values: &[f64]) -> HermitianMatrix {
        let n = values.len();
        HermitianMatrix::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(values[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        }))
        .unwrap()
    }

    #[test]
    fn cholesky_identity() {
        let f = cholesky(&HermitianMatrix::scaled_identity(3, 1.0)).unwrap();
        assert_eq!(f.upper(), CMatrix::identity(3));
    }

    #[test]
    fn cholesky_diagonal() {
        let f = cholesky(&diag(&[4.0, 9.0])).unwrap();
        assert_eq!(f.upper().get(0, 0), c(2.0, 0.0));
        assert_eq!(f.upper().get(1, 1), c(3.0, 0.0));
        assert_eq!(f.upper().get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn cholesky_reconstructs_random_pd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=16 {
            let k = random_pd(&mut rng, n);
            let f = cholesky(&k).unwrap();
            let upper = f.upper();
            let rebuilt = upper.adjoint().matmul(&upper);
            let err = rebuilt.sub(k.as_matrix()).frobenius_norm();
            assert!(err <= 1e-10 * k.frobenius_norm(), "n={n} err={err:e}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let err = cholesky(&diag(&[1.0, -1.0])).unwrap_err();
        assert!(matches!(err, NumericsError::NotPositiveDefinite { index: 1, .. }));
        assert!(cholesky(&diag(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn hermitian_check() {
        let m = CMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)])
            .unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(NumericsError::NotHermitian(_))));
        let m = CMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)])
            .unwrap();
        assert!(HermitianMatrix::new(m).is_ok());
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5)];
        let x = hermitian_solve(&HermitianMatrix::scaled_identity(2, 1.0), &b).unwrap();
        assert_eq!(x, b);
        let x = hermitian_solve(&diag(&[2.0, 4.0]), &[c(2.0, 0.0), c(8.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_residual_and_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=16 {
            let k = random_pd(&mut rng, n);
            let b = random_vec(&mut rng, n);
            let x = hermitian_solve(&k, &b).unwrap();
            let r: Vec<_> = k.mul_vec(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
            assert!(norm(&r) <= 1e-9 * norm(&b));

            let x0 = random_vec(&mut rng, n);
            let x1 = hermitian_solve(&k, &k.mul_vec(&x0)).unwrap();
            let d: Vec<_> = x1.iter().zip(&x0).map(|(a, b)| a - b).collect();
            assert!(norm(&d) <= 1e-8 * norm(&x0), "n={n}");
        }
    }

    #[test]
    fn solve_dimension_mismatch() {
        let err = hermitian_solve(&HermitianMatrix::scaled_identity(2, 1.0), &[c(1.0, 0.0)]);
        assert!(matches!(err, Err(NumericsError::DimensionMismatch { .. })));
    }

    #[test]
    fn eig_diagonal() {
        let (lambda, v) = dominant_eigpair(&diag(&[1.0, 2.0, 3.0])).unwrap();
        assert!((lambda - 3.0).abs() < 1e-12);
        assert!((v[2] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(v[0].norm() < 1e-10 && v[1].norm() < 1e-10);
    }

    #[test]
    fn eig_rank_one() {
        let a = vec![c(1.0, 2.0), c(-0.5, 0.3), c(0.0, -1.0)];
        let h = HermitianMatrix::new(CMatrix::outer(&a)).unwrap();
        let (lambda, v) = dominant_eigpair(&h).unwrap();
        assert!((lambda - norm_sqr(&a)).abs() < 1e-12 * lambda);
        let mut expected: Vec<_> = a.iter().map(|x| x / norm(&a)).collect();
        apply_phase_convention(&mut expected);
        for (x, y) in v.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn eig_rank_one_orthogonal_to_start() {
        // a ⟂ 1, so the all-ones start vector is annihilated.
        let a = vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)];
        let h = HermitianMatrix::new(CMatrix::outer(&a)).unwrap();
        let (lambda, v) = dominant_eigpair(&h).unwrap();
        assert!((lambda - 2.0).abs() < 1e-12);
        assert!((v[0].norm() - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn eig_degenerate_top() {
        let (lambda, v) = dominant_eigpair(&diag(&[2.0, 2.0, 1.0])).unwrap();
        assert!((lambda - 2.0).abs() < 1e-12);
        assert!(v[2].norm() < 1e-10);
        assert!((norm(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_zero_matrix() {
        let (lambda, v) = dominant_eigpair(&HermitianMatrix::zeros(3)).unwrap();
        assert_eq!(lambda, 0.0);
        assert!((norm(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_scale_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_pd(&mut rng, 8);
        let (l1, v1) = dominant_eigpair(&h).unwrap();
        for s in [0.5, 3.0, 1e4] {
            let (l2, v2) = dominant_eigpair(&h.scaled(s)).unwrap();
            assert!((l2 - s * l1).abs() <= 1e-10 * s * l1);
            for (a, b) in v1.iter().zip(&v2) {
                assert!((a - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn eig_residual_and_rayleigh_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_pd(&mut rng, 12);
        let (lambda, v) = dominant_eigpair(&h).unwrap();
        let hv = h.mul_vec(&v);
        let r: Vec<_> = hv.iter().zip(&v).map(|(a, b)| a - b * lambda).collect();
        assert!(norm(&r) <= 1e-8 * lambda);
        assert!((norm(&v) - 1.0).abs() < 1e-12);

        // Every Rayleigh quotient is a lower bound for the top eigenvalue.
        let mut best = 0.0f64;
        for _ in 0..100_000 {
            let x = random_vec(&mut rng, 12);
            best = best.max(h.quadratic_form(&x) / norm_sqr(&x));
        }
        assert!(best <= lambda * (1.0 + 1e-12));
        assert!(best >= 0.3 * lambda);
    }

    #[test]
    fn eig_matches_reference_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [2, 5, 12, 16] {
            let h = random_pd(&mut rng, n);
            let (lambda, _) = dominant_eigpair(&h).unwrap();
            let na = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                let z = h.get(i, j);
                nalgebra::Complex::new(z.re, z.im)
            });
            let reference = na
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((lambda - reference).abs() <= 1e-10 * reference, "n={n}");
        }
    }

    #[test]
    fn psd_check() {
        assert!(diag(&[1.0, 0.0]).is_positive_semidefinite());
        assert!(!diag(&[1.0, -0.1]).is_positive_semidefinite());
    }
}
