//! Spectral projections `chi_[a,b](T)`, computed two independent ways.
//!
//! [`eigen_projection`] sums eigenprojections from the Jacobi
//! decomposition. [`contour_projection`] evaluates the Riesz integral
//! `(1/2 pi i) \oint (z - T)^{-1} dz` over a circle with the trapezoidal
//! rule, doubling the node count until successive iterates agree. The
//! contour route never touches an eigendecomposition except to check that
//! the circle stays clear of the spectrum.

use std::f64::consts::PI;

use crate::error::{Result, SpecFlowError};
use crate::linalg::{ComplexMatrix, C64};
use crate::operator::HermitianOperator;

/// Eigenvalues within this multiple of `max(1, ||T||)` of a window endpoint
/// are refused.
pub const ENDPOINT_TOL: f64 = 1e-9;
/// Minimum relative distance between the spectrum and a contour.
pub const CONTOUR_SAFETY: f64 = 1e-6;
pub const MAX_NODES: usize = 1 << 14;
const MIN_NODES: usize = 8;
const QUADRATURE_TOL: f64 = 1e-11;
const TRACE_TOL: f64 = 1e-8;

/// Circle `|z - center| = radius` with an initial trapezoidal node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourDescriptor {
    center: C64,
    radius: f64,
    nodes: usize,
}

impl ContourDescriptor {
    pub fn new(center: C64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(SpecFlowError::InvalidInput(format!("contour radius must be positive, got {radius}")));
        }
        if nodes < MIN_NODES {
            return Err(SpecFlowError::InvalidInput(format!("contour needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        Ok(Self { center, radius, nodes })
    }

    /// The circle over the real window `[a, b]`: center `(a+b)/2`, radius `(b-a)/2`.
    pub fn for_window(a: f64, b: f64) -> Result<Self> {
        Self::new(C64::new(0.5 * (a + b), 0.0), 0.5 * (b - a), 32)
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }

    /// Real interval enclosed when the center is real.
    pub fn real_window(&self) -> (f64, f64) {
        (self.center.re - self.radius, self.center.re + self.radius)
    }

    fn node(&self, j: usize, n: usize) -> (C64, C64) {
        let theta = 2.0 * PI * j as f64 / n as f64;
        let e = C64::from_polar(self.radius, theta);
        (self.center + e, e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Interval { a: f64, b: f64 },
    Circle(ContourDescriptor),
}

#[derive(Debug, Clone)]
pub struct SpectralProjection {
    matrix: ComplexMatrix,
    rank: usize,
    window: Window,
    /// Quadrature nodes actually used (contour route only).
    nodes_used: Option<usize>,
}

impl SpectralProjection {
    fn new(matrix: ComplexMatrix, window: Window, nodes_used: Option<usize>) -> Result<Self> {
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > TRACE_TOL || rank < 0.0 {
            return Err(SpecFlowError::InvalidInput(format!("projection trace {trace} is not an integer")));
        }
        Ok(Self { matrix, rank: rank as usize, window, nodes_used })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn nodes_used(&self) -> Option<usize> {
        self.nodes_used
    }

    /// `max |P^2 - P|`.
    pub fn idempotence_defect(&self) -> f64 {
        (&self.matrix * &self.matrix).max_abs_diff(&self.matrix)
    }

    /// `max |P - P*|`.
    pub fn selfadjointness_defect(&self) -> f64 {
        self.matrix.hermiticity_defect()
    }
}

/// `sum v_j v_j*` over eigenvalues in the closed window `[a, b]`.
pub fn eigen_projection(t: &HermitianOperator, a: f64, b: f64) -> Result<SpectralProjection> {
    if !(a < b) {
        return Err(SpecFlowError::InvalidInput(format!("empty window [{a}, {b}]")));
    }
    let eig = t.eigh()?;
    let tolerance = ENDPOINT_TOL * t.scale();
    let mut inside = Vec::new();
    for (j, &mu) in eig.eigenvalues.iter().enumerate() {
        for endpoint in [a, b] {
            if (mu - endpoint).abs() <= tolerance {
                return Err(SpecFlowError::EndpointInSpectrum { eigenvalue: mu, endpoint, tolerance });
            }
        }
        if a <= mu && mu <= b {
            inside.push(j);
        }
    }
    let v = eig.eigenvectors.select_columns(&inside);
    let p = &v * &v.adjoint();
    SpectralProjection::new(p, Window::Interval { a, b }, None)
}

fn check_contour_clearance(t: &HermitianOperator, c: &ContourDescriptor) -> Result<f64> {
    let required = CONTOUR_SAFETY * t.scale();
    let mut closest = f64::INFINITY;
    for &mu in t.eigenvalues() {
        let distance = ((C64::new(mu, 0.0) - c.center).norm() - c.radius).abs();
        if distance < required {
            return Err(SpecFlowError::ContourNearSpectrum { eigenvalue: mu, distance, required });
        }
        closest = closest.min(distance);
    }
    Ok(closest)
}

/// `r e^{i theta} (z - T)^{-1}` at one node.
fn node_term(t: &HermitianOperator, c: &ContourDescriptor, j: usize, n: usize) -> Result<ComplexMatrix> {
    let (z, e) = c.node(j, n);
    let shifted = t.matrix().scale_real(-1.0).shift_diagonal(z);
    Ok(shifted.inverse()?.scale(e))
}

/// Trapezoidal sum over `n` equispaced nodes, without normalization.
fn node_sum(t: &HermitianOperator, c: &ContourDescriptor, n: usize, stride: usize, offset: usize) -> Result<ComplexMatrix> {
    let dim = t.dim();
    let mut sum = ComplexMatrix::zeros(dim, dim);
    let mut j = offset;
    while j < n {
        sum.axpy(C64::new(1.0, 0.0), &node_term(t, c, j, n)?);
        j += stride;
    }
    Ok(sum)
}

/// Riesz projection for the spectrum enclosed by the circle `c`.
pub fn contour_projection(t: &HermitianOperator, c: &ContourDescriptor) -> Result<SpectralProjection> {
    let clearance = check_contour_clearance(t, c)?;
    // Rounding in the node sum grows with the resolvent size on the contour.
    let tol = QUADRATURE_TOL * (1.0 + c.radius / clearance.max(f64::MIN_POSITIVE)).min(1e4);

    let mut n = c.nodes;
    let mut sum = node_sum(t, c, n, 1, 0)?;
    let mut current = sum.scale_real(1.0 / n as f64);
    let mut distance = f64::INFINITY;
    while distance > tol {
        if 2 * n > MAX_NODES {
            return Err(SpecFlowError::QuadratureStagnation { nodes: n, distance });
        }
        let odd = node_sum(t, c, 2 * n, 2, 1)?;
        sum.axpy(C64::new(1.0, 0.0), &odd);
        n *= 2;
        let next = sum.scale_real(1.0 / n as f64);
        distance = next.max_abs_diff(&current);
        current = next;
    }
    SpectralProjection::new(current, Window::Circle(*c), Some(n))
}

/// Contour projection at a fixed node count, without refinement.
pub fn contour_projection_fixed(t: &HermitianOperator, c: &ContourDescriptor, nodes: usize) -> Result<ComplexMatrix> {
    check_contour_clearance(t, c)?;
    Ok(node_sum(t, c, nodes, 1, 0)?.scale_real(1.0 / nodes as f64))
}

/// Outcome of comparing two projections: `||P - Q|| < 1` forces equal ranks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankStability {
    pub distance: f64,
    pub rank_p: usize,
    pub rank_q: usize,
    /// False only if the norm is below one and the ranks still differ.
    pub implication_holds: bool,
}

pub fn projection_rank_stability(p: &SpectralProjection, q: &SpectralProjection) -> Result<RankStability> {
    if p.dim() != q.dim() {
        return Err(SpecFlowError::DimensionMismatch { expected: p.dim(), found: q.dim() });
    }
    let distance = (p.matrix() - q.matrix()).norm2();
    let close = distance < 1.0 - 1e-10;
    Ok(RankStability {
        distance,
        rank_p: p.rank(),
        rank_q: q.rank(),
        implication_holds: !close || p.rank() == q.rank(),
    })
}

/// Both sides of `||P(T) - P(S)|| <= (|Gamma| / 2 pi) max ||(z-T)^{-1} - (z-S)^{-1}||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub nodes: usize,
    pub holds: bool,
}

/// Slack for rounding in the quadrature sums.
const CONTINUITY_SLACK: f64 = 1e-9;

/// Evaluates the projection continuity estimate on the quadrature nodes.
/// Both projections use the same node set, so the inequality holds for the
/// discrete sums up to rounding.
pub fn projection_continuity_bound(t: &HermitianOperator, s: &HermitianOperator, c: &ContourDescriptor) -> Result<ContinuityReport> {
    t.check_same_dim(s)?;
    let pt = contour_projection(t, c)?;
    let ps = contour_projection(s, c)?;
    let nodes = pt.nodes_used().unwrap_or(c.nodes).max(ps.nodes_used().unwrap_or(c.nodes));
    let dim = t.dim();
    let mut sum = ComplexMatrix::zeros(dim, dim);
    let mut worst: f64 = 0.0;
    for j in 0..nodes {
        let diff = &node_term(t, c, j, nodes)? - &node_term(s, c, j, nodes)?;
        // node_term carries |r e^{i theta}| = r
        worst = worst.max(diff.norm2() / c.radius);
        sum.axpy(C64::new(1.0, 0.0), &diff);
    }
    let lhs = sum.scale_real(1.0 / nodes as f64).norm2();
    let rhs = c.length() / (2.0 * PI) * worst;
    Ok(ContinuityReport { lhs, rhs, nodes, holds: lhs <= rhs + CONTINUITY_SLACK })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(i, i)] = C64::new(1.0, 0.0);
        m
    }

    #[test]
    fn diagonal_window() {
        let t = HermitianOperator::from_diag(&[-1.0, 0.5, 2.0]);
        let p = eigen_projection(&t, 0.0, 1.0).unwrap();
        assert_eq!(p.rank(), 1);
        assert!(p.matrix().max_abs_diff(&e(1, 3)) < 1e-15);
        let full = eigen_projection(&t, -10.0, 10.0).unwrap();
        assert_eq!(full.rank(), 3);
        assert!(full.matrix().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn endpoint_on_eigenvalue_is_an_error() {
        let t = HermitianOperator::from_diag(&[-1.0, 0.5, 2.0]);
        match eigen_projection(&t, 0.5, 1.0) {
            Err(SpecFlowError::EndpointInSpectrum { eigenvalue, .. }) => assert_eq!(eigenvalue, 0.5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(eigen_projection(&t, 1.0, 1.0).is_err());
    }

    #[test]
    fn contour_matches_diagonal_oracle() {
        let t = HermitianOperator::from_diag(&[-1.0, 0.5, 2.0]);
        let c = ContourDescriptor::new(C64::new(0.5, 0.0), 0.6, 8).unwrap();
        let p = contour_projection(&t, &c).unwrap();
        let q = eigen_projection(&t, -0.1, 1.1).unwrap();
        assert_eq!(p.rank(), 1);
        assert!(p.matrix().max_abs_diff(q.matrix()) < 1e-8);
    }

    #[test]
    fn empty_enclosure_is_zero() {
        let t = HermitianOperator::from_diag(&[-1.0, 0.5, 2.0]);
        let c = ContourDescriptor::new(C64::new(10.0, 0.0), 1.0, 8).unwrap();
        let p = contour_projection(&t, &c).unwrap();
        assert_eq!(p.rank(), 0);
        assert!(p.matrix().max_abs() < 1e-10);
    }

    #[test]
    fn contour_touching_spectrum_is_refused() {
        let t = HermitianOperator::from_diag(&[-1.0, 0.5, 2.0]);
        let c = ContourDescriptor::new(C64::new(0.0, 0.0), 0.5, 8).unwrap();
        assert!(matches!(contour_projection(&t, &c), Err(SpecFlowError::ContourNearSpectrum { .. })));
    }

    #[test]
    fn near_contour_eigenvalue_hits_node_cap() {
        // Eigenvalue 1e-5 inside the circle edge: admissible, but the
        // trapezoidal rule needs far more than 2^14 nodes to resolve it.
        let t = HermitianOperator::from_diag(&[1.0 - 1e-5]);
        let c = ContourDescriptor::new(C64::new(0.0, 0.0), 1.0, 8).unwrap();
        assert!(matches!(contour_projection(&t, &c), Err(SpecFlowError::QuadratureStagnation { .. })));
    }

    #[test]
    fn descriptor_validation() {
        assert!(ContourDescriptor::new(C64::new(0.0, 0.0), 0.0, 8).is_err());
        assert!(ContourDescriptor::new(C64::new(0.0, 0.0), 1.0, 4).is_err());
    }

    #[test]
    fn orthogonal_rank_one_projections() {
        let p = eigen_projection(&HermitianOperator::from_diag(&[1.0, 0.0]), 0.5, 1.5).unwrap();
        let q = eigen_projection(&HermitianOperator::from_diag(&[0.0, 1.0]), 0.5, 1.5).unwrap();
        let v = projection_rank_stability(&p, &q).unwrap();
        assert!((v.distance - 1.0).abs() < 1e-14);
        assert!(v.implication_holds);
        let same = projection_rank_stability(&p, &p).unwrap();
        assert_eq!(same.distance, 0.0);
        assert_eq!(same.rank_p, same.rank_q);
    }

    #[test]
    fn continuity_bound_trivial_and_perturbed() {
        let t = HermitianOperator::from_diag(&[-1.0, 1.0]);
        let c = ContourDescriptor::new(C64::new(1.0, 0.0), 0.5, 16).unwrap();
        let same = projection_continuity_bound(&t, &t, &c).unwrap();
        assert_eq!(same.lhs, 0.0);
        assert_eq!(same.rhs, 0.0);
        let s = HermitianOperator::from_diag(&[-1.0, 1.01]);
        let r = projection_continuity_bound(&t, &s, &c).unwrap();
        assert!(r.holds, "{r:?}");
    }
}
