//! Dense finite-dimensional complex operator algebra.
//!
//! Everything in the crate that needs a Hilbert space (qubit pairs, lattice
//! translations, truncated Fock spaces in tests) goes through [`Operator`] and
//! [`State`]. Storage is always dense; dimensions stay small.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Absolute tolerance used for Hermiticity and normalization checks.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HilbertError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),
}

/// A square complex matrix acting on `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<Complex64>,
}

impl Operator {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self, HilbertError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(HilbertError::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        if matrix.nrows() == 0 {
            return Err(HilbertError::ZeroDimension);
        }
        Ok(Self { matrix })
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self, HilbertError> {
        if dim == 0 {
            return Err(HilbertError::ZeroDimension);
        }
        if entries.len() != dim * dim {
            return Err(HilbertError::DimensionMismatch { left: dim * dim, right: entries.len() });
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self, HilbertError> {
        let entries: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(dim, &entries)
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "identity of dimension zero");
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "zero operator of dimension zero");
        Self { matrix: DMatrix::zeros(dim, dim) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "diagonal operator needs at least one entry");
        let diag = DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        Self { matrix: DMatrix::from_diagonal(&diag) }
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        Self::from_rows(2, &[z, -i, i, z]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { matrix: &self.matrix * factor }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut result = Self::identity(self.dim());
        for _ in 0..exponent {
            result = &result * self;
        }
        result
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= TOLERANCE
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Eigen-decomposition of a Hermitian operator: eigenvalues (ascending)
    /// and the unitary whose columns are the matching eigenvectors.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, Operator) {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, Operator { matrix: vectors })
    }

    /// Spectral norm, the largest singular value.
    ///
    /// Computed as the square root of the top eigenvalue of the Hermitian
    /// matrix `M†M`.
    pub fn spectral_norm(&self) -> f64 {
        let gram = Self { matrix: self.matrix.adjoint() * &self.matrix };
        let top = gram.hermitian_eigenvalues().last().copied().unwrap_or(0.0);
        top.max(0.0).sqrt()
    }

    pub fn apply(&self, state: &DVector<Complex64>) -> Result<DVector<Complex64>, HilbertError> {
        check_dims(self.dim(), state.len())?;
        Ok(&self.matrix * state)
    }

    pub fn checked_mul(&self, rhs: &Operator) -> Result<Operator, HilbertError> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(Operator { matrix: &self.matrix * &rhs.matrix })
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;

    /// Panics on dimension mismatch; use [`Operator::checked_mul`] otherwise.
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.checked_mul(rhs).expect("operator dimensions must agree")
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions must agree");
        Operator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions must agree");
        Operator { matrix: &self.matrix - &rhs.matrix }
    }
}

/// A unit vector in `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    amplitudes: DVector<Complex64>,
}

impl State {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, HilbertError> {
        if amplitudes.is_empty() {
            return Err(HilbertError::ZeroDimension);
        }
        let amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(HilbertError::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes the given amplitudes; fails only for the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self, HilbertError> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if v.is_empty() || norm == 0.0 {
            return Err(HilbertError::NotNormalized(norm));
        }
        Ok(Self { amplitudes: v / Complex64::new(norm, 0.0) })
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut v = DVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

fn check_dims(left: usize, right: usize) -> Result<(), HilbertError> {
    if left != right {
        Err(HilbertError::DimensionMismatch { left, right })
    } else {
        Ok(())
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator { matrix: a.matrix.kronecker(&b.matrix) }
}

/// `⟨s|m|s⟩`.
pub fn expectation(s: &State, m: &Operator) -> Result<Complex64, HilbertError> {
    let image = m.apply(&s.amplitudes)?;
    Ok(s.amplitudes.dotc(&image))
}

/// Spectral norm of `ab - ba`.
pub fn commutator_norm(a: &Operator, b: &Operator) -> Result<f64, HilbertError> {
    check_dims(a.dim(), b.dim())?;
    let commutator = &(a * b) - &(b * a);
    Ok(commutator.spectral_norm())
}
