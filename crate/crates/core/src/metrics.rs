//! Resolvents, the Cayley transform and the metrics built on it.
//!
//! Sign convention: [`resolvent`] returns `(T - z)^{-1}`. The other common
//! convention `R(z, T) = (z - T)^{-1}` is its negative.

use crate::error::{Result, SpecFlowError};
use crate::linalg::{ComplexMatrix, C64, I};
use crate::operator::{HermitianOperator, UnitaryMatrix};

/// Relative distance to the spectrum below which `z` counts as a spectral point.
pub const SINGULARITY_TOL: f64 = 1e-12;
/// Smallest admissible singular value of `I - U` in [`inverse_cayley`].
pub const CAYLEY_RANGE_TOL: f64 = 1e-10;

/// `(T - z)^{-1}`.
pub fn resolvent(t: &HermitianOperator, z: C64) -> Result<ComplexMatrix> {
    let (nearest, distance) = t.spectrum().distance_to(z);
    if distance <= SINGULARITY_TOL * t.scale() {
        return Err(SpecFlowError::SpectralPoint { nearest, distance });
    }
    t.matrix().shift_diagonal(-z).inverse()
}

/// Truncated Neumann expansion of the resolvent around `z0`:
/// `sum_{k < terms} (z - z0)^k (T - z0)^{-(k+1)}`.
///
/// Requires `|z - z0| < 1 / ||(T - z0)^{-1}||`.
pub fn resolvent_series(t: &HermitianOperator, z0: C64, z: C64, terms: usize) -> Result<ComplexMatrix> {
    let r0 = resolvent(t, z0)?;
    let radius = 1.0 / r0.norm2();
    let increment = (z - z0).norm();
    if increment >= radius {
        return Err(SpecFlowError::RadiusExceeded { increment, radius });
    }
    let n = t.dim();
    let mut sum = ComplexMatrix::zeros(n, n);
    let mut power = r0.clone();
    for k in 0..terms {
        if k > 0 {
            power = (&power * &r0).scale(z - z0);
        }
        sum.axpy(C64::new(1.0, 0.0), &power);
    }
    Ok(sum)
}

/// Cayley transform `(T - i)(T + i)^{-1}`, evaluated as `I - 2i (T + i)^{-1}`.
pub fn cayley(t: &HermitianOperator) -> UnitaryMatrix {
    let inv = shifted_inverse(t);
    let mut k = ComplexMatrix::identity(t.dim());
    k.axpy(C64::new(0.0, -2.0), &inv);
    UnitaryMatrix::new_unchecked(k)
}

/// The product form `(T - i)(T + i)^{-1}`, kept as a second route for checks.
pub fn cayley_product_form(t: &HermitianOperator) -> ComplexMatrix {
    let minus = t.matrix().shift_diagonal(-I);
    &minus * &shifted_inverse(t)
}

/// `(T + i)^{-1}`; `-i` is never in the spectrum of a Hermitian matrix.
fn shifted_inverse(t: &HermitianOperator) -> ComplexMatrix {
    t.matrix()
        .shift_diagonal(I)
        .inverse()
        .expect("T + i is invertible for Hermitian T")
}

/// Inverse Cayley transform `i (I + U)(I - U)^{-1}`.
pub fn inverse_cayley(u: &UnitaryMatrix) -> Result<HermitianOperator> {
    let n = u.dim();
    let id = ComplexMatrix::identity(n);
    let one_minus = &id - u.matrix();
    let smallest_singular = one_minus.min_singular();
    if smallest_singular <= CAYLEY_RANGE_TOL {
        return Err(SpecFlowError::NotInCayleyRange { smallest_singular });
    }
    let one_plus = &id + u.matrix();
    let t = (&one_plus * &one_minus.inverse()?).scale(I);
    let scale = t.max_abs().max(1.0);
    let deviation = t.hermiticity_defect();
    // I - U can be ill-conditioned; allow the rounding that brings.
    let tolerance = 1e-8 * scale;
    if deviation > tolerance {
        return Err(SpecFlowError::NotHermitian { deviation, tolerance });
    }
    Ok(HermitianOperator::from_matrix_symmetrized(&t))
}

/// Gap metric `||kappa(T1) - kappa(T2)||`.
pub fn gap_distance(t1: &HermitianOperator, t2: &HermitianOperator) -> Result<f64> {
    t1.check_same_dim(t2)?;
    Ok((cayley(t1).matrix() - cayley(t2).matrix()).norm2())
}

/// `||(T1 + i)^{-1} - (T2 + i)^{-1}||`, half the gap metric.
pub fn delta_distance(t1: &HermitianOperator, t2: &HermitianOperator) -> Result<f64> {
    t1.check_same_dim(t2)?;
    Ok((&shifted_inverse(t1) - &shifted_inverse(t2)).norm2())
}

/// `F(T) = T (I + T^2)^{-1/2}`, spectrum in (-1, 1).
pub fn riesz_map(t: &HermitianOperator) -> Result<HermitianOperator> {
    let eig = t.eigh()?;
    let f = eig.apply(|mu| mu / (1.0 + mu * mu).sqrt());
    Ok(HermitianOperator::from_matrix_symmetrized(&f))
}

/// Riesz metric `||F(T1) - F(T2)||`.
pub fn riesz_distance(t1: &HermitianOperator, t2: &HermitianOperator) -> Result<f64> {
    t1.check_same_dim(t2)?;
    Ok(riesz_map(t1)?.sub(&riesz_map(t2)?).norm())
}

/// Operator-norm distance `||T1 - T2||`.
pub fn norm_distance(t1: &HermitianOperator, t2: &HermitianOperator) -> Result<f64> {
    t1.check_same_dim(t2)?;
    Ok(t1.sub(t2).norm())
}

/// Scalar Cayley map `(x - i) / (x + i)`.
pub fn cayley_scalar(x: f64) -> C64 {
    (C64::new(x, 0.0) - I) / (C64::new(x, 0.0) + I)
}
