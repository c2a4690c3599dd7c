//! Dense complex matrix kernel: products, Kronecker products, Hermitian
//! eigendecomposition and PSD square roots for the simulator and the
//! state-comparison metrics.
//!
//! Everything operates on [`CMat`], a row-major `Complex<f64>` matrix. All
//! operations are pure; values are freely shareable across threads.

use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_CLAMP_TOL, 0)` are treated as zero by `sqrt_psd`.
pub const PSD_CLAMP_TOL: f64 = 1e-10;
/// Jacobi sweeps stop once the off-diagonal Frobenius mass drops below
/// `EIG_CONVERGENCE_TOL * ||A||_F`.
pub const EIG_CONVERGENCE_TOL: f64 = 1e-12;

const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("data length {got} does not match {rows}x{cols}")]
    BadDataLength { rows: usize, cols: usize, got: usize },
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
}

/// Dense row-major complex matrix in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from row-major data; rejects length mismatches and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::BadDataLength {
                rows,
                cols,
                got: data.len(),
            });
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Build from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, reals: &[f64]) -> Result<Self, LinalgError> {
        Self::from_vec(
            rows,
            cols,
            reals.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        )
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
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

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    fn check_finite(&self) -> Result<(), LinalgError> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self.get(i, j);
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(LinalgError::NonFinite(i, j));
                }
            }
        }
        Ok(())
    }

    /// Complex matrix product.
    pub fn matmul(&self, other: &CMat) -> Result<CMat, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                let row_b = &other.data[k * other.cols..(k + 1) * other.cols];
                let row_o = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in row_o.iter_mut().zip(row_b) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product; output dims are element-wise products of the inputs'.
    pub fn kron(&self, other: &CMat) -> CMat {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = CMat::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let aij = self.get(i, j);
                if aij.re == 0.0 && aij.im == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, aij * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> Result<CMat, LinalgError> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &CMat) -> Result<CMat, LinalgError> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, factor: Complex64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Hermitian part `(A + A†) / 2`.
    pub fn hermitize(&self) -> CMat {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let h = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                out.set(i, j, h);
            }
        }
        out
    }

    /// Relative deviation from Hermitian symmetry, `||A - A†||_F / ||A||_F`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        debug_assert!(self.is_square());
        let norm = self.frob_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut asym_sq = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                asym_sq += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        asym_sq.sqrt() / norm
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermitian_asymmetry() <= rel_tol
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &CMat) -> Result<(), LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(())
    }
}

/// Element-wise complex inner product `<A, B> = sum conj(A_ij) B_ij`.
pub fn frob_inner(a: &CMat, b: &CMat) -> Result<Complex64, LinalgError> {
    a.check_same_shape(b)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Frobenius norm `sqrt(<A, A>)`.
pub fn frob_norm(a: &CMat) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl CMat {
    pub fn frob_norm(&self) -> f64 {
        frob_norm(self)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns eigenvalues in ascending order and the unitary `V`
    /// with eigenvectors as columns, so `A = V diag(w) V†`.
    pub fn hermitian_eig(&self) -> Result<(Vec<f64>, CMat), LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare(self.rows, self.cols));
        }
        let asym = self.hermitian_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(LinalgError::NotHermitian(asym));
        }
        let n = self.rows;
        // Work on the exactly-symmetrized copy so round-off in the input
        // cannot leak into the rotations.
        let mut a = self.hermitize();
        let mut v = CMat::identity(n);
        let norm = a.frob_norm();
        if norm == 0.0 {
            return Ok((vec![0.0; n], v));
        }
        let target = EIG_CONVERGENCE_TOL * norm;
        // Rotating pivots below this threshold cannot help convergence.
        let skip = target / (n as f64) * 0.1;

        let mut converged = false;
        for _ in 0..MAX_JACOBI_SWEEPS {
            let mut off_sq = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off_sq += a.get(i, j).norm_sqr();
                    }
                }
            }
            if off_sq.sqrt() <= target {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    let abs = apq.norm();
                    if abs <= skip {
                        continue;
                    }
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    let tau = (aqq - app) / (2.0 * abs);
                    let t = if tau == 0.0 {
                        1.0
                    } else {
                        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let phase = apq / abs;
                    let s_phase = phase * s;
                    let s_phase_conj = phase.conj() * s;

                    // A <- A·J, columns p and q.
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, akp * c - akq * s_phase_conj);
                        a.set(k, q, akp * s_phase + akq * c);
                    }
                    // A <- J†·A, rows p and q.
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, apk * c - aqk * s_phase);
                        a.set(q, k, apk * s_phase_conj + aqk * c);
                    }
                    // V <- V·J.
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, vkp * c - vkq * s_phase_conj);
                        v.set(k, q, vkp * s_phase + vkq * c);
                    }
                }
            }
        }
        if !converged {
            return Err(LinalgError::NoConvergence(MAX_JACOBI_SWEEPS));
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
        let mut vectors = CMat::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                vectors.set(k, new_col, v.get(k, old_col));
            }
        }
        Ok((eigenvalues, vectors))
    }

    /// Principal square root of a Hermitian PSD matrix. Eigenvalues in
    /// `[-PSD_CLAMP_TOL, 0)` are clamped to zero; anything lower is rejected.
    pub fn sqrt_psd(&self) -> Result<CMat, LinalgError> {
        let (eigenvalues, v) = self.hermitian_eig()?;
        let min = eigenvalues.first().copied().unwrap_or(0.0);
        if min < -PSD_CLAMP_TOL {
            return Err(LinalgError::NotPsd(min));
        }
        let roots: Vec<Complex64> = eigenvalues
            .iter()
            .map(|&w| Complex64::new(w.max(0.0).sqrt(), 0.0))
            .collect();
        reassemble(&v, &roots)
    }
}

/// Rebuild `V diag(d) V†` from an eigenbasis.
pub(crate) fn reassemble(v: &CMat, diag: &[Complex64]) -> Result<CMat, LinalgError> {
    let scaled = v.matmul(&CMat::from_diag(diag))?;
    scaled.matmul(&v.dagger())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn pauli_x() -> CMat {
        CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn pauli_z() -> CMat {
        CMat::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    fn hadamard() -> CMat {
        let s = 1.0 / 2.0_f64.sqrt();
        CMat::from_real(2, 2, &[s, s, s, -s]).unwrap()
    }

    fn random_cmat(rng: &mut StdRng, rows: usize, cols: usize) -> CMat {
        let data = (0..rows * cols)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        CMat::from_vec(rows, cols, data).unwrap()
    }

    fn random_hermitian(rng: &mut StdRng, n: usize) -> CMat {
        let g = random_cmat(rng, n, n);
        g.add(&g.dagger()).unwrap().scale(c(0.5, 0.0))
    }

    fn random_psd(rng: &mut StdRng, n: usize) -> CMat {
        let g = random_cmat(rng, n, n);
        g.matmul(&g.dagger()).unwrap()
    }

    fn max_entry_diff(a: &CMat, b: &CMat) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn matmul_identity_is_noop() {
        let mut rng = StdRng::seed_from_u64(1);
        let a = random_cmat(&mut rng, 2, 2);
        let out = CMat::identity(2).matmul(&a).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn matmul_pauli_x_squares_to_identity() {
        let x2 = pauli_x().matmul(&pauli_x()).unwrap();
        assert_eq!(x2, CMat::identity(2));
    }

    #[test]
    fn matmul_hadamard_squares_to_identity() {
        // By hand: (1/sqrt(2))^2 [[1+1, 1-1], [1-1, 1+1]] = I.
        let h2 = hadamard().matmul(&hadamard()).unwrap();
        assert!(max_entry_diff(&h2, &CMat::identity(2)) < 1e-15);
    }

    #[test]
    fn matmul_rejects_dimension_mismatch() {
        let a = CMat::zeros(2, 3);
        let b = CMat::zeros(2, 3);
        assert!(matches!(
            a.matmul(&b),
            Err(LinalgError::DimMismatch { .. })
        ));
    }

    #[test]
    fn kron_identities() {
        let i4 = CMat::identity(2).kron(&CMat::identity(2));
        assert_eq!(i4, CMat::identity(4));

        let p = CMat::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let pp = p.kron(&p);
        let expected = CMat::from_diag(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(pp, expected);
    }

    #[test]
    fn kron_x_with_identity_permutes_basis() {
        // Enumerating the 4x4 entries: (X ⊗ I) e0 = e2.
        let xi = pauli_x().kron(&CMat::identity(2));
        let e0 = CMat::from_real(4, 1, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = xi.matmul(&e0).unwrap();
        let e2 = CMat::from_real(4, 1, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(out, e2);
    }

    #[test]
    fn eig_sorts_diagonal_matrix() {
        let a = CMat::from_diag(&[c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let (w, _) = a.hermitian_eig().unwrap();
        assert_eq!(w, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eig_pauli_x_spectrum() {
        let (w, _) = pauli_x().hermitian_eig().unwrap();
        assert!((w[0] + 1.0).abs() < 1e-12);
        assert!((w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let a = random_hermitian(&mut rng, 8);
            let (w, v) = a.hermitian_eig().unwrap();
            let diag: Vec<Complex64> = w.iter().map(|&x| c(x, 0.0)).collect();
            let rebuilt = reassemble(&v, &diag).unwrap();
            let residual = frob_norm(&rebuilt.sub(&a).unwrap());
            assert!(residual <= 1e-10 * a.frob_norm().max(1.0), "residual {residual}");

            // V must be unitary.
            let vv = v.dagger().matmul(&v).unwrap();
            assert!(max_entry_diff(&vv, &CMat::identity(8)) < 1e-10);
            // Eigenvalues sorted ascending.
            for pair in w.windows(2) {
                assert!(pair[0] <= pair[1]);
            }
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = CMat::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(a.hermitian_eig(), Err(LinalgError::NotHermitian(_))));
    }

    #[test]
    fn sqrt_psd_identity_and_diag() {
        let s = CMat::identity(3).sqrt_psd().unwrap();
        assert!(max_entry_diff(&s, &CMat::identity(3)) < 1e-12);

        let a = CMat::from_diag(&[c(4.0, 0.0), c(9.0, 0.0)]);
        let s = a.sqrt_psd().unwrap();
        let expected = CMat::from_diag(&[c(2.0, 0.0), c(3.0, 0.0)]);
        assert!(max_entry_diff(&s, &expected) < 1e-12);
    }

    #[test]
    fn sqrt_psd_squaring_oracle() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..5 {
            let a = random_psd(&mut rng, 8);
            let b = a.sqrt_psd().unwrap();
            let bb = b.matmul(&b).unwrap();
            let residual = frob_norm(&bb.sub(&a).unwrap());
            assert!(residual <= 1e-8 * a.frob_norm().max(1.0), "residual {residual}");
        }
    }

    #[test]
    fn sqrt_psd_clamps_tiny_negative_and_rejects_real_negative() {
        let tiny = CMat::from_diag(&[c(1.0, 0.0), c(-5e-11, 0.0)]);
        let s = tiny.sqrt_psd().unwrap();
        assert_eq!(s.get(1, 1), c(0.0, 0.0));

        let bad = CMat::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(bad.sqrt_psd(), Err(LinalgError::NotPsd(_))));
    }

    #[test]
    fn frob_inner_basics() {
        let i2 = CMat::identity(2);
        assert_eq!(frob_inner(&i2, &i2).unwrap(), c(2.0, 0.0));
        assert!((frob_norm(&i2) - 2.0_f64.sqrt()).abs() < 1e-15);
        // Orthogonal Paulis.
        assert_eq!(frob_inner(&pauli_x(), &pauli_z()).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn frob_inner_matches_norm_squared() {
        let mut rng = StdRng::seed_from_u64(3);
        let a = random_cmat(&mut rng, 6, 6);
        let inner = frob_inner(&a, &a).unwrap();
        let norm_sq = frob_norm(&a).powi(2);
        assert!((inner.re - norm_sq).abs() < 1e-12 * norm_sq.max(1.0));
        assert!(inner.im.abs() < 1e-12);
    }

    #[test]
    fn frob_inner_rejects_shape_mismatch() {
        let a = CMat::zeros(2, 2);
        let b = CMat::zeros(3, 3);
        assert!(frob_inner(&a, &b).is_err());
    }

    #[test]
    fn matmul_associativity_property() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..10 {
            let a = random_cmat(&mut rng, 5, 5);
            let b = random_cmat(&mut rng, 5, 5);
            let d = random_cmat(&mut rng, 5, 5);
            let left = a.matmul(&b).unwrap().matmul(&d).unwrap();
            let right = a.matmul(&b.matmul(&d).unwrap()).unwrap();
            let rel = frob_norm(&left.sub(&right).unwrap()) / frob_norm(&left).max(1e-30);
            assert!(rel < 1e-10, "relative error {rel}");
        }
    }

    #[test]
    fn kron_mixed_product_property() {
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..10 {
            let a = random_cmat(&mut rng, 3, 3);
            let b = random_cmat(&mut rng, 2, 2);
            let cm = random_cmat(&mut rng, 3, 3);
            let d = random_cmat(&mut rng, 2, 2);
            let lhs = a.kron(&b).matmul(&cm.kron(&d)).unwrap();
            let rhs = a.matmul(&cm).unwrap().kron(&b.matmul(&d).unwrap());
            let rel = frob_norm(&lhs.sub(&rhs).unwrap()) / frob_norm(&lhs).max(1e-30);
            assert!(rel < 1e-10, "relative error {rel}");
        }
    }

    #[test]
    fn frob_inner_conjugate_symmetry() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..10 {
            let a = random_cmat(&mut rng, 4, 4);
            let b = random_cmat(&mut rng, 4, 4);
            let ab = frob_inner(&a, &b).unwrap();
            let ba = frob_inner(&b, &a).unwrap();
            assert!((ab - ba.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        let err = CMat::from_vec(1, 2, vec![c(1.0, 0.0), c(f64::NAN, 0.0)]);
        assert!(matches!(err, Err(LinalgError::NonFinite(0, 1))));
    }
}
