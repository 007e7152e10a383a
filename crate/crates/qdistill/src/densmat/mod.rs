//! Validated quantum-state types for small bipartite systems, plus the
//! operations that everything else is built on: partial trace, Schmidt
//! decomposition, matrix norms and the (m-)singlet fraction.
//!
//! Conventions. Bipartite basis states |i>_A |j>_B map to the flat index
//! `i * d_B + j`. A state's eigenvalue spectrum is computed once at
//! validation time and stored in descending order.

mod matrix;
mod solver;

pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use solver::{hermitian_eig, svd, HermitianEig, Svd};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hermiticity, trace and positivity checks accept deviations up to this.
pub const VALIDATION_TOL: f64 = 1e-9;
/// Eigenvalues / singular values above this count toward a rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DensmatError {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },
    #[error("trace is {trace}, expected 1")]
    NonUnitTrace { trace: f64 },
    #[error("negative eigenvalue {value:.3e} below tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("expected a {expected}x{expected} matrix for dims {dim_a}x{dim_b}, got {got} rows")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        dim_a: usize,
        dim_b: usize,
    },
    #[error("state vector norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("matrix entries must form a nonempty rectangle")]
    MalformedMatrix,
    #[error("matrix contains a non-finite entry")]
    NonFiniteEntry,
}

/// Which subsystem an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// A validated bipartite mixed state: Hermitian, unit trace, positive
/// semidefinite within [`VALIDATION_TOL`], with recorded local dimensions
/// and eigenvalue spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixJson", into = "DensityMatrixJson")]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    mat: ComplexMatrix,
    spectrum: Vec<f64>,
}

impl DensityMatrix {
    /// Validate and construct; see [`validate_density`].
    pub fn new(mat: ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<Self, DensmatError> {
        validate_density(mat, dim_a, dim_b)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Total Hilbert-space dimension `d_A * d_B`.
    pub fn total_dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// The smaller local dimension, `d = min(d_A, d_B)`.
    pub fn min_dim(&self) -> usize {
        self.dim_a.min(self.dim_b)
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Eigenvalues in descending order, recorded at validation time.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Count of eigenvalues above [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.spectrum.iter().filter(|&&x| x > RANK_TOL).count()
    }

    pub fn is_pure(&self) -> bool {
        self.spectrum[0] > 1.0 - VALIDATION_TOL
    }

    /// Largest eigenvalue and its eigenvector.
    pub fn dominant_eigenvector(&self) -> (f64, Vec<Complex64>) {
        let eig = hermitian_eig(&self.mat);
        let n = self.total_dim();
        let last = n - 1;
        let vec = (0..n).map(|i| eig.vectors.get(i, last)).collect();
        (eig.values[last], vec)
    }

    /// Plain singlet fraction, `m = min(d_A, d_B)`.
    pub fn fidelity(&self) -> f64 {
        singlet_fraction(self, self.min_dim())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityMatrixJson {
    dim_a: usize,
    dim_b: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<DensityMatrix> for DensityMatrixJson {
    fn from(s: DensityMatrix) -> Self {
        let parts = matrix::MatrixParts::from(&s.mat);
        DensityMatrixJson {
            dim_a: s.dim_a,
            dim_b: s.dim_b,
            re: parts.re,
            im: parts.im,
        }
    }
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = DensmatError;

    fn try_from(j: DensityMatrixJson) -> Result<Self, DensmatError> {
        let mat = ComplexMatrix::try_from(matrix::MatrixParts { re: j.re, im: j.im })?;
        DensityMatrix::new(mat, j.dim_a, j.dim_b)
    }
}

pub(crate) fn matrix_parts(m: &ComplexMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let p = matrix::MatrixParts::from(m);
    (p.re, p.im)
}

pub(crate) fn matrix_from_parts(
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
) -> Result<ComplexMatrix, DensmatError> {
    ComplexMatrix::try_from(matrix::MatrixParts { re, im })
}

/// Check Hermiticity, unit trace and positive semidefiniteness, recording the
/// spectrum. The stored matrix is the symmetrized `(M + M^dagger)/2`, which is
/// exact for Hermitian input.
pub fn validate_density(
    m: ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
) -> Result<DensityMatrix, DensmatError> {
    let n = dim_a * dim_b;
    if !m.is_square() || m.rows() != n || n == 0 {
        return Err(DensmatError::DimensionMismatch {
            expected: n,
            got: m.rows(),
            dim_a,
            dim_b,
        });
    }
    if !m.all_finite() {
        return Err(DensmatError::NonFiniteEntry);
    }
    let deviation = m.hermitian_deviation();
    if deviation > VALIDATION_TOL {
        return Err(DensmatError::NonHermitian { deviation });
    }
    let mat = m.hermitized();
    let trace = mat.trace().re;
    if (trace - 1.0).abs() > VALIDATION_TOL {
        return Err(DensmatError::NonUnitTrace { trace });
    }
    let eig = hermitian_eig(&mat);
    if let Some(&min) = eig.values.first() {
        if min < -VALIDATION_TOL {
            return Err(DensmatError::NegativeEigenvalue { value: min });
        }
    }
    let mut spectrum = eig.values;
    spectrum.reverse();
    Ok(DensityMatrix {
        dim_a,
        dim_b,
        mat,
        spectrum,
    })
}

/// A bipartite pure state as a unit-norm amplitude vector.
#[derive(Debug, Clone)]
pub struct PureState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, DensmatError> {
        if amplitudes.len() != dim_a * dim_b || dim_a == 0 || dim_b == 0 {
            return Err(DensmatError::DimensionMismatch {
                expected: dim_a * dim_b,
                got: amplitudes.len(),
                dim_a,
                dim_b,
            });
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(DensmatError::NonFiniteEntry);
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > VALIDATION_TOL {
            return Err(DensmatError::NotNormalized { norm });
        }
        Ok(Self {
            dim_a,
            dim_b,
            amplitudes,
        })
    }

    /// Computational basis state |i>_A |j>_B.
    pub fn basis(dim_a: usize, dim_b: usize, i: usize, j: usize) -> Self {
        assert!(i < dim_a && j < dim_b, "basis index out of range");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim_a * dim_b];
        amplitudes[i * dim_b + j] = Complex64::new(1.0, 0.0);
        Self {
            dim_a,
            dim_b,
            amplitudes,
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// The d_A x d_B matrix C with |psi> = sum_ij C[i][j] |i>|j>.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim_a, self.dim_b, |i, j| {
            self.amplitudes[i * self.dim_b + j]
        })
    }

    /// Projector |psi><psi| as a validated density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let n = self.amplitudes.len();
        let mat = ComplexMatrix::from_fn(n, n, |i, j| {
            self.amplitudes[i] * self.amplitudes[j].conj()
        });
        DensityMatrix::new(mat, self.dim_a, self.dim_b).expect("projector of a unit vector")
    }
}

/// Schmidt form of a pure state: nonincreasing coefficients plus matched
/// orthonormal vectors on each side, `min(d_A, d_B)` of each.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    dim_a: usize,
    dim_b: usize,
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<Vec<Complex64>>,
    pub right_vectors: Vec<Vec<Complex64>>,
}

impl SchmidtDecomposition {
    /// Count of coefficients above [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|&&c| c > RANK_TOL).count()
    }

    /// Rebuild sum_k c_k |u_k>|v_k>; used to verify the decomposition.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim_a * self.dim_b];
        for ((c, u), v) in self
            .coefficients
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
        {
            for i in 0..self.dim_a {
                for j in 0..self.dim_b {
                    amps[i * self.dim_b + j] += u[i] * v[j] * c;
                }
            }
        }
        amps
    }
}

/// Schmidt decomposition via SVD of the coefficient matrix.
pub fn schmidt(v: &PureState) -> SchmidtDecomposition {
    let c = v.coefficient_matrix();
    let f = svd(&c);
    let k = v.dim_a.min(v.dim_b);
    let left_vectors: Vec<Vec<Complex64>> = (0..k)
        .map(|col| (0..v.dim_a).map(|i| f.u.get(i, col)).collect())
        .collect();
    // C = U S V^dagger means the B-side vectors are the conjugated columns of V.
    let right_vectors: Vec<Vec<Complex64>> = (0..k)
        .map(|col| (0..v.dim_b).map(|j| f.v.get(j, col).conj()).collect())
        .collect();
    SchmidtDecomposition {
        dim_a: v.dim_a,
        dim_b: v.dim_b,
        coefficients: f.singular_values,
        left_vectors,
        right_vectors,
    }
}

/// Schmidt rank of a raw amplitude vector (not necessarily normalized).
pub fn schmidt_rank_of_vector(amps: &[Complex64], dim_a: usize, dim_b: usize) -> usize {
    assert_eq!(amps.len(), dim_a * dim_b);
    let c = ComplexMatrix::from_fn(dim_a, dim_b, |i, j| amps[i * dim_b + j]);
    let norm = c.hs_norm();
    if norm <= RANK_TOL {
        return 0;
    }
    svd(&c)
        .singular_values
        .iter()
        .filter(|&&s| s / norm > RANK_TOL)
        .count()
}

/// Reduced matrix of the kept side; the other subsystem is traced out.
pub fn partial_trace(s: &DensityMatrix, keep: Side) -> ComplexMatrix {
    let (da, db) = (s.dim_a, s.dim_b);
    let m = s.mat();
    match keep {
        Side::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m.get(i * db + k, j * db + k)).sum()
        }),
        Side::B => ComplexMatrix::from_fn(db, db, |k, l| {
            (0..da).map(|i| m.get(i * db + k, i * db + l)).sum()
        }),
    }
}

/// Hilbert-Schmidt norm and trace norm (sum of singular values) of a matrix.
pub fn norms(m: &ComplexMatrix) -> (f64, f64) {
    let hs = m.hs_norm();
    let tracenorm = svd(m).singular_values.iter().sum();
    (hs, tracenorm)
}

/// Trace norm alone.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    norms(m).1
}

/// m-singlet fraction <Psi_+^m| rho |Psi_+^m> with
/// |Psi_+^m> = (1/sqrt(m)) sum_{i<m} |ii>. Requires m <= min(d_A, d_B);
/// m = min(d_A, d_B) recovers the plain singlet fraction.
pub fn singlet_fraction(s: &DensityMatrix, m: usize) -> f64 {
    assert!(m >= 1 && m <= s.min_dim(), "singlet_fraction: m out of range");
    let db = s.dim_b;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            acc += s.mat.get(i * db + i, j * db + j);
        }
    }
    (acc.re / m as f64).clamp(0.0, 1.0)
}
