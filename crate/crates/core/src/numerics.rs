//! Small dense linear-algebra kernel: vectors, matrices, SPD solve/inverse,
//! a largest-eigenvalue routine, and positive-definiteness repair.
//!
//! Everything is sized for estimation problems with at most a few hundred
//! parameters. Plain loops over row-major storage keep results
//! bit-reproducible across runs and worker counts, which the experiment
//! harness depends on.

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry pre-check of SPD routines,
/// measured against the largest absolute entry.
pub const SYMMETRY_REL_TOL: f64 = 1e-10;

/// Dense column vector of finite f64 entries, length >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    /// Validates that `data` is nonempty and all entries are finite.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidInput("vector must have length >= 1".into()));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "vector entry {i} is not finite: {}",
                data[i]
            )));
        }
        Ok(Self { data })
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1, "vector length must be >= 1");
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn add(&self, other: &DenseVector) -> DenseVector {
        assert_eq!(self.len(), other.len(), "add: length mismatch");
        DenseVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &DenseVector) -> DenseVector {
        assert_eq!(self.len(), other.len(), "sub: length mismatch");
        DenseVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> DenseVector {
        DenseVector {
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// self += c * x
    pub fn axpy(&mut self, c: f64, x: &DenseVector) {
        assert_eq!(self.len(), x.len(), "axpy: length mismatch");
        for (s, xi) in self.data.iter_mut().zip(&x.data) {
            *s += c * xi;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// Dense matrix in row-major order, dims >= 1x1, finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Validates dimensions and entry finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(
                "matrix dimensions must be >= 1x1".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "matrix entry ({},{}) is not finite: {}",
                i / cols,
                i % cols,
                data[i]
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1x1");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c;
        }
        m
    }

    /// Stacks row vectors of equal length into a matrix.
    pub fn from_rows(rows: &[DenseVector]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("from_rows: no rows given".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "from_rows: row {i} has length {} but row 0 has {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r.as_slice());
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vector(&self, i: usize) -> DenseVector {
        DenseVector {
            data: self.row(i).to_vec(),
        }
    }

    /// A * v
    pub fn matvec(&self, v: &DenseVector) -> DenseVector {
        assert_eq!(self.cols, v.len(), "matvec: dimension mismatch");
        let mut out = DenseVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = 0.0;
            for (aij, vj) in self.row(i).iter().zip(v.iter()) {
                acc += aij * vj;
            }
            out[i] = acc;
        }
        out
    }

    /// A' * v
    pub fn matvec_transposed(&self, v: &DenseVector) -> DenseVector {
        assert_eq!(self.rows, v.len(), "matvec_transposed: dimension mismatch");
        let mut out = DenseVector::zeros(self.cols);
        for i in 0..self.rows {
            let vi = v[i];
            for (j, aij) in self.row(i).iter().enumerate() {
                out[j] += aij * vi;
            }
        }
        out
    }

    /// A * B
    pub fn mat_mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "mat_mul: dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transposed(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// A + sigma * I
    pub fn add_scaled_identity(&self, sigma: f64) -> DenseMatrix {
        assert_eq!(self.rows, self.cols, "add_scaled_identity: square only");
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] += sigma;
        }
        out
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Symmetry check relative to the largest absolute entry. A zero
    /// matrix is symmetric (0 <= 0).
    pub fn is_symmetric_within(&self, rel_tol: f64) -> bool {
        self.max_asymmetry() <= rel_tol * self.max_abs_entry()
    }

    fn max_asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

fn check_symmetric(a: &DenseMatrix) -> Result<()> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let worst = a.max_asymmetry();
    if worst > SYMMETRY_REL_TOL * a.max_abs_entry() {
        return Err(Error::NotSymmetric {
            max_asymmetry: worst,
            tolerance: SYMMETRY_REL_TOL,
        });
    }
    Ok(())
}

/// Cholesky factorization A = L * L' (L lower triangular). Fails with
/// NotPositiveDefinite on the first pivot that is not strictly positive;
/// the `!(pivot > 0)` form also rejects NaN pivots.
pub(crate) fn cholesky_lower(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s.is_nan() || s <= 0.0 {
                    return Err(Error::NotPositiveDefinite { index: i, pivot: s });
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(l)
}

fn solve_with_factor(l: &DenseMatrix, b: &DenseVector) -> DenseVector {
    let n = l.rows();
    // forward: L z = b
    let mut z = DenseVector::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    // backward: L' x = z
    let mut x = DenseVector::zeros(n);
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves A x = b for symmetric positive definite A via Cholesky.
pub fn spd_solve(a: &DenseMatrix, b: &DenseVector) -> Result<DenseVector> {
    check_symmetric(a)?;
    assert_eq!(a.rows(), b.len(), "spd_solve: dimension mismatch");
    let l = cholesky_lower(a)?;
    Ok(solve_with_factor(&l, b))
}

/// Inverse of a symmetric positive definite matrix, column by column from
/// one Cholesky factorization. The result is symmetrized to compensate
/// column-wise rounding.
pub fn spd_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    check_symmetric(a)?;
    let n = a.rows();
    let l = cholesky_lower(a)?;
    let mut inv = DenseMatrix::zeros(n, n);
    let mut e = DenseVector::zeros(n);
    for j in 0..n {
        e[j] = 1.0;
        let col = solve_with_factor(&l, &e);
        e[j] = 0.0;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = s;
            inv[(j, i)] = s;
        }
    }
    Ok(inv)
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
///
/// The start vector is deterministic: all ones, entry i perturbed by
/// +(i+1)*1e-6 to break symmetry ties, then normalized. Convergence
/// requires both a small Rayleigh-quotient change and a small residual
/// ||A v - lambda v|| relative to |lambda|, so a near-eigenvector of a
/// lower eigenvalue does not stop the iteration early.
pub fn largest_eigenvalue(a: &DenseMatrix, tol: f64) -> Result<f64> {
    assert!(tol > 0.0, "largest_eigenvalue: tol must be > 0");
    assert_eq!(a.rows(), a.cols(), "largest_eigenvalue: square only");
    let n = a.rows();
    let budget = (10 * n * (1.0 / tol).log10().ceil() as usize).max(1000);

    let mut v = DenseVector::zeros(n);
    for i in 0..n {
        v[i] = 1.0 + (i + 1) as f64 * 1e-6;
    }
    let norm = v.norm();
    v = v.scale(1.0 / norm);

    let mut lambda_prev = f64::INFINITY;
    for _ in 0..budget {
        let w = a.matvec(&v);
        let lambda = v.dot(&w); // Rayleigh quotient, v is unit
        let mut resid_sq = 0.0;
        for i in 0..n {
            let r = w[i] - lambda * v[i];
            resid_sq += r * r;
        }
        let scale = lambda.abs();
        if resid_sq.sqrt() <= tol * scale && (lambda - lambda_prev).abs() <= tol * scale {
            return Ok(lambda);
        }
        let wnorm = w.norm();
        if wnorm == 0.0 {
            // A v = 0 with a strictly positive start vector: treat as zero
            // matrix along every direction we can reach.
            return Ok(0.0);
        }
        v = w.scale(1.0 / wnorm);
        lambda_prev = lambda;
    }
    Err(Error::NoConvergence {
        budget,
        tolerance: tol,
    })
}

/// Returns C + sigma * I after checking symmetry, verifying that the
/// result actually factorizes.
pub fn ensure_positive_definite(c: &DenseMatrix, sigma: f64) -> Result<DenseMatrix> {
    assert!(sigma > 0.0, "ensure_positive_definite: sigma must be > 0");
    check_symmetric(c)?;
    let shifted = c.add_scaled_identity(sigma);
    cholesky_lower(&shifted)?;
    Ok(shifted)
}

/// Automatic repair: tries sigma = f * mean(diag(C)) for f = 1e-10, 1e-9,
/// ..., 1e0 and returns the first shift that factorizes, together with the
/// sigma used. Fails when the mean diagonal is not positive or no shift up
/// to 1x the mean diagonal works.
pub fn repair_positive_definite(c: &DenseMatrix) -> Result<(DenseMatrix, f64)> {
    check_symmetric(c)?;
    let n = c.rows();
    let mean_diag = (0..n).map(|i| c[(i, i)]).sum::<f64>() / n as f64;
    if mean_diag.is_nan() || mean_diag <= 0.0 {
        return Err(Error::RepairFailed { max_sigma: 0.0 });
    }
    for exp in -10..=0 {
        let sigma = 10f64.powi(exp) * mean_diag;
        let shifted = c.add_scaled_identity(sigma);
        if cholesky_lower(&shifted).is_ok() {
            return Ok((shifted, sigma));
        }
    }
    Err(Error::RepairFailed {
        max_sigma: mean_diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_of(xs: &[f64]) -> DenseVector {
        DenseVector::new(xs.to_vec()).unwrap()
    }

    // Tiny deterministic generator for test data; xorshift is plenty here.
    struct TestRng(u64);
    impl TestRng {
        fn next_f64(&mut self) -> f64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    fn random_spd(n: usize, rng: &mut TestRng) -> DenseMatrix {
        // G'G + I is SPD with a generic spectrum.
        let mut g = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = 2.0 * rng.next_f64() - 1.0;
            }
        }
        let mut a = g.transposed().mat_mul(&g);
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        // exact symmetry for the pre-check
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = s;
                a[(j, i)] = s;
            }
        }
        a
    }

    #[test]
    fn vector_construction_rejects_bad_input() {
        assert!(DenseVector::new(vec![]).is_err());
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(DenseVector::new(vec![0.0]).is_ok());
    }

    #[test]
    fn matrix_construction_rejects_bad_input() {
        assert!(DenseMatrix::new(0, 1, vec![]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0; 4]).is_ok());
    }

    #[test]
    fn spd_solve_identity() {
        let a = DenseMatrix::identity(3);
        let b = vec_of(&[1.0, 2.0, 3.0]);
        let x = spd_solve(&a, &b).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn spd_solve_diagonal() {
        let a = DenseMatrix::new(2, 2, vec![2.0, 0.0, 0.0, 4.0]).unwrap();
        let x = spd_solve(&a, &vec_of(&[2.0, 4.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spd_solve_two_by_two() {
        let a = DenseMatrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let x = spd_solve(&a, &vec_of(&[3.0, 3.0])).unwrap();
        assert!(
            (x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14,
            "expected (1,1), got ({}, {})",
            x[0],
            x[1]
        );
    }

    #[test]
    fn spd_solve_rejects_asymmetric() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        match spd_solve(&a, &vec_of(&[1.0, 1.0])) {
            Err(Error::NotSymmetric { .. }) => {}
            other => panic!("expected NotSymmetric, got {other:?}"),
        }
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        // eigenvalues 3 and -1
        let a = DenseMatrix::new(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        match spd_solve(&a, &vec_of(&[1.0, 1.0])) {
            Err(Error::NotPositiveDefinite { .. }) => {}
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn spd_solve_residual_on_random_spd() {
        let mut rng = TestRng(0x1234_5678);
        for _ in 0..100 {
            let n = 1 + (rng.next_f64() * 8.0) as usize;
            let a = random_spd(n, &mut rng);
            let mut b = DenseVector::zeros(n);
            for i in 0..n {
                b[i] = 2.0 * rng.next_f64() - 1.0;
            }
            let x = spd_solve(&a, &b).unwrap();
            let r = a.matvec(&x).sub(&b).norm();
            let bound = 1e-8 * (a.frobenius_norm() * x.norm() + b.norm());
            assert!(r <= bound, "residual {r:e} exceeds bound {bound:e} at n={n}");
        }
    }

    #[test]
    fn spd_inverse_identity_and_diagonal() {
        let inv = spd_inverse(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(inv, DenseMatrix::identity(2));

        let d = DenseMatrix::new(2, 2, vec![2.0, 0.0, 0.0, 5.0]).unwrap();
        let inv = spd_inverse(&d).unwrap();
        assert!((inv[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((inv[(1, 1)] - 0.2).abs() < 1e-14);
        assert_eq!(inv[(0, 1)], 0.0);
    }

    #[test]
    fn spd_inverse_scaled_identity() {
        let c = DenseMatrix::scaled_identity(5, 0.1);
        let inv = spd_inverse(&c).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 10.0 } else { 0.0 };
                assert!(
                    (inv[(i, j)] - expect).abs() < 1e-12,
                    "entry ({i},{j}) = {} but expected {expect}",
                    inv[(i, j)]
                );
            }
        }
    }

    #[test]
    fn spd_inverse_multiply_back() {
        let mut rng = TestRng(0xfeed);
        for _ in 0..50 {
            let n = 1 + (rng.next_f64() * 7.0) as usize;
            let a = random_spd(n, &mut rng);
            let inv = spd_inverse(&a).unwrap();
            let prod = a.mat_mul(&inv);
            let mut err = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    err += (prod[(i, j)] - expect).powi(2);
                }
            }
            assert!(
                err.sqrt() <= 1e-8 * n as f64,
                "||A A^-1 - I||_F = {:e} at n={n}",
                err.sqrt()
            );
        }
    }

    #[test]
    fn largest_eigenvalue_identity() {
        for p in [1, 2, 7] {
            let l = largest_eigenvalue(&DenseMatrix::identity(p), 1e-10).unwrap();
            assert!((l - 1.0).abs() <= 1e-9, "identity eigenvalue {l} at p={p}");
        }
    }

    #[test]
    fn largest_eigenvalue_diagonal() {
        let d = DenseMatrix::new(3, 3, vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]).unwrap();
        let l = largest_eigenvalue(&d, 1e-10).unwrap();
        assert!((l - 3.0).abs() <= 3e-9, "diag eigenvalue {l}");
    }

    #[test]
    fn largest_eigenvalue_two_by_two() {
        // characteristic roots {1, 3}
        let a = DenseMatrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let l = largest_eigenvalue(&a, 1e-10).unwrap();
        assert!((l - 3.0).abs() <= 3e-9, "eigenvalue {l}");
    }

    #[test]
    fn largest_eigenvalue_zero_matrix() {
        let z = DenseMatrix::zeros(3, 3);
        assert_eq!(largest_eigenvalue(&z, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn largest_eigenvalue_reports_no_convergence() {
        // Top eigenvalues 1 and 1 - 1e-7: the gap is far above tol but the
        // convergence rate (1 - 1e-7)^k exhausts any reasonable budget.
        let a = DenseMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0 - 1e-7]).unwrap();
        match largest_eigenvalue(&a, 1e-12) {
            Err(Error::NoConvergence { .. }) => {}
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn largest_eigenvalue_dominates_rayleigh_quotients() {
        let mut rng = TestRng(0xabcdef);
        let a = random_spd(6, &mut rng);
        let tol = 1e-10;
        let lambda = largest_eigenvalue(&a, tol).unwrap();
        for _ in 0..100 {
            let mut x = DenseVector::zeros(6);
            for i in 0..6 {
                x[i] = 2.0 * rng.next_f64() - 1.0;
            }
            let rq = x.dot(&a.matvec(&x)) / x.squared_norm();
            assert!(
                lambda >= rq - tol * lambda.abs(),
                "Rayleigh quotient {rq} above reported max {lambda}"
            );
        }
    }

    #[test]
    fn largest_eigenvalue_subadditive() {
        let mut rng = TestRng(0x5eed);
        let tol = 1e-9;
        for _ in 0..50 {
            let n = 2 + (rng.next_f64() * 5.0) as usize;
            let a = random_spd(n, &mut rng);
            let b = random_spd(n, &mut rng);
            let mut sum = a.clone();
            for i in 0..n {
                for j in 0..n {
                    sum[(i, j)] += b[(i, j)];
                }
            }
            let la = largest_eigenvalue(&a, tol).unwrap();
            let lb = largest_eigenvalue(&b, tol).unwrap();
            let ls = largest_eigenvalue(&sum, tol).unwrap();
            assert!(
                ls <= la + lb + 2.0 * tol * (la + lb),
                "subadditivity violated: {ls} > {la} + {lb}"
            );
        }
    }

    #[test]
    fn ensure_positive_definite_shifts() {
        let shifted = ensure_positive_definite(&DenseMatrix::identity(2), 0.5).unwrap();
        assert_eq!(shifted, DenseMatrix::scaled_identity(2, 1.5));

        let d = DenseMatrix::new(2, 2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let shifted = ensure_positive_definite(&d, 0.1).unwrap();
        assert!((shifted[(0, 0)] - 0.1).abs() < 1e-15);
        assert!((shifted[(1, 1)] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn ensure_positive_definite_rank_one() {
        // [[1,1],[1,1]] + 0.01 I has eigenvalues {2.01, 0.01}
        let c = DenseMatrix::new(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let shifted = ensure_positive_definite(&c, 0.01).unwrap();
        assert!((shifted[(0, 0)] - 1.01).abs() < 1e-15);
        assert!((shifted[(0, 1)] - 1.0).abs() < 1e-15);
        let top = largest_eigenvalue(&shifted, 1e-10).unwrap();
        assert!((top - 2.01).abs() < 1e-8, "top eigenvalue {top}");
    }

    #[test]
    fn repair_finds_small_shift() {
        let c = DenseMatrix::new(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let (repaired, sigma) = repair_positive_definite(&c).unwrap();
        assert!(sigma > 0.0 && sigma <= 1.0);
        assert!(cholesky_lower(&repaired).is_ok());
        // smallest power-of-ten multiple of mean diagonal = 1e-10 * 1
        assert!(
            (sigma - 1e-10).abs() < 1e-25,
            "expected first candidate 1e-10, got {sigma:e}"
        );
    }

    #[test]
    fn repair_fails_on_hopeless_input() {
        let c = DenseMatrix::scaled_identity(2, -1.0);
        match repair_positive_definite(&c) {
            Err(Error::RepairFailed { .. }) => {}
            other => panic!("expected RepairFailed, got {other:?}"),
        }
        // zero diagonal gives no positive shift candidates
        let z = DenseMatrix::zeros(2, 2);
        assert!(matches!(
            repair_positive_definite(&z),
            Err(Error::RepairFailed { .. })
        ));
    }

    #[test]
    fn repaired_output_always_factorizes() {
        let mut rng = TestRng(0xc0ffee);
        for _ in 0..50 {
            let n = 2 + (rng.next_f64() * 5.0) as usize;
            // rank-1 outer product: PSD but singular
            let mut u = DenseVector::zeros(n);
            for i in 0..n {
                u[i] = rng.next_f64() + 0.1;
            }
            let mut c = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    c[(i, j)] = u[i] * u[j];
                }
            }
            let (repaired, _) = repair_positive_definite(&c).unwrap();
            assert!(cholesky_lower(&repaired).is_ok());
        }
    }
}
