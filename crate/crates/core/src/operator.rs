//! Finite selfadjoint operators and their spectral data.

use std::sync::OnceLock;

use crate::eigen::{self, DEFAULT_MAX_SWEEPS};
use crate::error::{Result, SpecFlowError};
use crate::linalg::{ComplexMatrix, C64};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Relative tolerance for accepting a matrix as unitary, per dimension.
pub const UNITARITY_TOL: f64 = 1e-12;

/// A Hermitian matrix: the finite realization of a selfadjoint operator.
///
/// Construction symmetrizes `(M + M*) / 2` when the input is within
/// [`HERMITICITY_TOL`] of Hermitian and rejects it otherwise, so the stored
/// matrix is exactly Hermitian.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    eigenvalues: OnceLock<Vec<f64>>,
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(SpecFlowError::InvalidInput(format!(
                "operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let scale = matrix.max_abs().max(1.0);
        let deviation = matrix.hermiticity_defect();
        let tolerance = HERMITICITY_TOL * scale;
        if deviation > tolerance {
            return Err(SpecFlowError::NotHermitian { deviation, tolerance });
        }
        Ok(Self::from_matrix_symmetrized(&matrix))
    }

    /// Symmetrizes without a tolerance check. For matrices that are
    /// Hermitian by construction up to rounding.
    pub(crate) fn from_matrix_symmetrized(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        let mut out = m.clone();
        for i in 0..n {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in i + 1..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        Self { matrix: out, eigenvalues: OnceLock::new() }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self { matrix: ComplexMatrix::from_diag(diag), eigenvalues: OnceLock::new() }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_diag(&vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Cyclic Jacobi eigendecomposition.
    pub fn eigh(&self) -> Result<EigenDecomposition> {
        let (eigenvalues, eigenvectors) = eigen::jacobi_eigh(&self.matrix, DEFAULT_MAX_SWEEPS)?;
        Ok(EigenDecomposition { eigenvalues, eigenvectors })
    }

    /// Ascending eigenvalues through the tridiagonal route, cached.
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.get_or_init(|| eigen::eigvalsh_unchecked(&self.matrix))
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_sorted(self.eigenvalues())
    }

    /// Operator norm, the spectral radius for a Hermitian matrix.
    pub fn norm(&self) -> f64 {
        let ev = self.eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
            _ => 0.0,
        }
    }

    /// `max(1, ||T||)`, the scale used by every relative tolerance.
    pub fn scale(&self) -> f64 {
        self.norm().max(1.0)
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues().iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Number of eigenvalues strictly below `-eps`.
    pub fn negative_count(&self, eps: f64) -> usize {
        self.eigenvalues().iter().filter(|&&x| x < -eps).count()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_matrix_symmetrized(&(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_matrix_symmetrized(&(&self.matrix - &other.matrix))
    }

    pub fn scale_by(&self, s: f64) -> Self {
        Self::from_matrix_symmetrized(&self.matrix.scale_real(s))
    }

    /// `self + s I`.
    pub fn shift(&self, s: f64) -> Self {
        Self::from_matrix_symmetrized(&self.matrix.shift_diagonal(C64::new(s, 0.0)))
    }

    /// `(1 - w) self + w other`.
    pub fn lerp(&self, other: &Self, w: f64) -> Self {
        let mut m = self.matrix.scale_real(1.0 - w);
        m.axpy(C64::new(w, 0.0), &other.matrix);
        Self::from_matrix_symmetrized(&m)
    }

    /// `U* self U` for a unitary `U`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::from_matrix_symmetrized(&(&(&u.adjoint() * &self.matrix) * u))
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(SpecFlowError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(SpecFlowError::InvalidInput("unitary matrix must be square".into()));
        }
        let n = matrix.rows();
        let defect = unitarity_defect(&matrix);
        let tol = UNITARITY_TOL * (n.max(1) as f64) * 10.0;
        if defect > tol {
            return Err(SpecFlowError::InvalidInput(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// `max |U U* - I|`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (u * &u.adjoint()).max_abs_diff(&ComplexMatrix::identity(u.rows()))
}

/// Ascending eigenvalues with orthonormal eigenvectors; column `j` of
/// `eigenvectors` belongs to `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `max |T V - V diag(mu)|`.
    pub fn residual(&self, t: &HermitianOperator) -> f64 {
        let tv = t.matrix() * &self.eigenvectors;
        let vd = &self.eigenvectors * &ComplexMatrix::from_diag(&self.eigenvalues);
        tv.max_abs_diff(&vd)
    }

    /// `max |V* V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.eigenvectors.cols();
        (&self.eigenvectors.adjoint() * &self.eigenvectors).max_abs_diff(&ComplexMatrix::identity(n))
    }

    /// `V f(diag(mu)) V*` for a real function `f`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        &(&self.eigenvectors * &ComplexMatrix::from_diag(&vals)) * &self.eigenvectors.adjoint()
    }

    /// `V g(diag(mu)) V*` for a complex-valued `g`.
    pub fn apply_complex(&self, g: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.eigenvectors.rows();
        let mut d = ComplexMatrix::zeros(n, n);
        for (i, &x) in self.eigenvalues.iter().enumerate() {
            d[(i, i)] = g(x);
        }
        &(&self.eigenvectors * &d) * &self.eigenvectors.adjoint()
    }
}

/// Eigenvalue multiset, as `(value, multiplicity)` groups in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn from_sorted(values: &[f64]) -> Self {
        Self { eigenvalues: values.to_vec() }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Groups eigenvalues closer than `tol` into one value with multiplicity.
    pub fn grouped(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &x in &self.eigenvalues {
            match out.last_mut() {
                Some((v, m)) if (x - *v).abs() <= tol => *m += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    /// Always empty in finite dimension.
    pub fn essential(&self) -> Vec<f64> {
        Vec::new()
    }

    pub fn distance_to(&self, z: C64) -> (f64, f64) {
        self.eigenvalues
            .iter()
            .map(|&mu| (mu, (C64::new(mu, 0.0) - z).norm()))
            .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }
}
