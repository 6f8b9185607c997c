//! Crossing forms and spectral flow as a sum of their signatures.
//!
//! At a crossing `t*` (where `A(t*)` has a kernel) the crossing form is the
//! compression `Gamma = V* A'(t*) V` of the derivative to an orthonormal
//! kernel basis `V`. The crossing is regular when `Gamma` is nondegenerate.
//! For a path with only regular crossings
//!
//! `sfl = -m^-(Gamma(t0)) + sum_{interior} sgn Gamma(t) + m^+(Gamma(t1))`
//!
//! where the endpoint terms are present only if the endpoints have kernel.

use serde::Serialize;

use crate::error::{Result, SpecFlowError};
use crate::linalg::ComplexMatrix;
use crate::operator::HermitianOperator;
use crate::path::OperatorPath;
use crate::specflow::{uniform, Certificate, Diagnostics, Method, SflResult, SpectrumCache};

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingOptions {
    /// Uniform detection grid size.
    pub samples: usize,
    /// Crossings closer than this (relative to the interval length) merge.
    pub param_tol: f64,
    /// Crossings separated by less than this, but not merged, are refused.
    pub cluster_tol: f64,
    /// Relative threshold for an eigenvalue to count as kernel.
    pub kernel_tol: f64,
    /// Relative threshold below which an eigenvalue of `Gamma` counts as zero.
    pub degeneracy_tol: f64,
    /// Relative zero-classification tolerance at the endpoints.
    pub eps0: f64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self { samples: 128, param_tol: 1e-10, cluster_tol: 1e-6, kernel_tol: 1e-8, degeneracy_tol: 1e-8, eps0: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingLocation {
    Start,
    Interior,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub t: f64,
    pub location: CrossingLocation,
    pub kernel_dim: usize,
    /// Ascending eigenvalues of the crossing form.
    pub form_eigenvalues: Vec<f64>,
    pub positive: usize,
    pub negative: usize,
    pub regular: bool,
}

impl Crossing {
    pub fn signature(&self) -> i64 {
        self.positive as i64 - self.negative as i64
    }

    pub fn nullity(&self) -> usize {
        self.kernel_dim - self.positive - self.negative
    }

    /// Contribution to the spectral flow.
    pub fn contribution(&self) -> i64 {
        match self.location {
            CrossingLocation::Start => -(self.negative as i64),
            CrossingLocation::Interior => self.signature(),
            CrossingLocation::End => self.positive as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub crossings: Vec<Crossing>,
    pub all_regular: bool,
    pub endpoints_invertible: bool,
}

/// `V* A' V` for a kernel basis `V` (columns).
pub fn crossing_form(derivative: &HermitianOperator, kernel: &ComplexMatrix) -> Result<HermitianOperator> {
    if kernel.rows() != derivative.dim() {
        return Err(SpecFlowError::DimensionMismatch { expected: derivative.dim(), found: kernel.rows() });
    }
    let g = &(&kernel.adjoint() * derivative.matrix()) * kernel;
    Ok(HermitianOperator::from_matrix_symmetrized(&g))
}

fn min_abs(mu: &[f64]) -> f64 {
    mu.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
}

/// Root of the `k`-th sorted eigenvalue on `[a, b]`, given a sign change.
fn bisect_root(cache: &mut SpectrumCache<'_>, k: usize, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let fa_neg = cache.get(a)[k] < 0.0;
    while b - a > tol {
        let m = 0.5 * (a + b);
        if (cache.get(m)[k] < 0.0) == fa_neg {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Minimizer of `min |mu|` on `[a, b]` by golden-section search.
fn golden_min(cache: &mut SpectrumCache<'_>, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = min_abs(&cache.get(c));
    let mut fd = min_abs(&cache.get(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = min_abs(&cache.get(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = min_abs(&cache.get(d));
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Locates the crossings of a path and evaluates their crossing forms.
///
/// Candidates come from sign changes of the sorted eigenvalue curves, local
/// minima of `min |mu|` on the detection grid and kernels at the endpoints.
/// Each candidate is refined to the parameter tolerance and kept if
/// `A(t*)` has an eigenvalue within the kernel tolerance.
pub fn find_crossings(path: &OperatorPath, opts: &CrossingOptions) -> Result<Vec<Crossing>> {
    let (t0, t1, len) = (path.t0(), path.t1(), path.len());
    let refine_tol = 1e-2 * opts.param_tol * len;
    let mut cache = SpectrumCache::new(path, opts.eps0);
    let grid = uniform(t0, t1, opts.samples + 1);
    let spectra = cache.get_many(&grid);
    let dim = path.dim();

    let mut candidates = Vec::new();
    for j in 0..grid.len() - 1 {
        let (lo, hi) = (&spectra[j], &spectra[j + 1]);
        let tol = opts.eps0 * lo.iter().chain(hi.iter()).fold(1.0_f64, |s, x| s.max(x.abs()));
        for k in 0..dim {
            if (lo[k] < -tol && hi[k] > tol) || (lo[k] > tol && hi[k] < -tol) {
                candidates.push(bisect_root(&mut cache, k, grid[j], grid[j + 1], refine_tol));
            }
        }
    }
    let profile: Vec<f64> = spectra.iter().map(|mu| min_abs(mu)).collect();
    for j in 1..grid.len() - 1 {
        if profile[j] <= profile[j - 1] && profile[j] <= profile[j + 1] {
            candidates.push(golden_min(&mut cache, grid[j - 1], grid[j + 1], refine_tol));
            candidates.push(grid[j]);
        }
    }
    // A minimum against an endpoint.
    for (lo, hi) in [(0, 1), (grid.len() - 1, grid.len() - 2)] {
        if profile[lo] <= profile[hi] {
            let (a, b) = if lo < hi { (grid[lo], grid[hi]) } else { (grid[hi], grid[lo]) };
            candidates.push(golden_min(&mut cache, a, b, refine_tol));
            candidates.push(grid[lo]);
        }
    }

    let endpoint_tol = 1e-9 * len;
    let mut kept: Vec<f64> = Vec::new();
    for t in candidates {
        let t = if t - t0 <= endpoint_tol {
            t0
        } else if t1 - t <= endpoint_tol {
            t1
        } else {
            t
        };
        let mu = cache.get(t);
        if min_abs(&mu) <= kernel_threshold(path, t, &mu, opts)? {
            kept.push(t);
        }
    }
    kept.sort_by(f64::total_cmp);
    kept.dedup();

    // Merge within the parameter tolerance; refuse near-coincident crossings.
    let merge = opts.param_tol * len;
    let mut merged: Vec<f64> = Vec::new();
    for t in kept {
        match merged.last_mut() {
            Some(last) if t - *last <= merge => {
                // Prefer an exact endpoint.
                if t == t1 {
                    *last = t1;
                }
            }
            Some(last) if t - *last < opts.cluster_tol * len => {
                return Err(SpecFlowError::CrossingCluster { t: *last, separation: t - *last });
            }
            _ => merged.push(t),
        }
    }

    merged.into_iter().map(|t| classify(path, t, opts)).collect()
}

/// `max(kernel_tol * scale, 10 ||A'|| * param_tol * len)`: the eigenvalue
/// size left over from locating the root only to the parameter tolerance.
fn kernel_threshold(path: &OperatorPath, t: f64, mu: &[f64], opts: &CrossingOptions) -> Result<f64> {
    let scale = mu.iter().fold(1.0_f64, |s, x| s.max(x.abs()));
    let base = opts.kernel_tol * scale;
    if min_abs(mu) > 1e3 * base.max(opts.param_tol * path.len() * scale) {
        return Ok(base);
    }
    let slope = path.derivative_at(t, true)?.norm();
    Ok(base.max(10.0 * slope * opts.param_tol * path.len()))
}

fn classify(path: &OperatorPath, t: f64, opts: &CrossingOptions) -> Result<Crossing> {
    let op = path.at(t);
    let eig = op.eigh()?;
    let threshold = kernel_threshold(path, t, &eig.eigenvalues, opts)?;
    let cols: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&j| eig.eigenvalues[j].abs() <= threshold).collect();
    let kernel = eig.eigenvectors.select_columns(&cols);
    let derivative = path.derivative_at(t, true)?;
    let gamma = crossing_form(&derivative, &kernel)?;
    let form_eigenvalues = gamma.eigenvalues().to_vec();
    let zero = opts.degeneracy_tol * derivative.norm().max(1.0);
    let positive = form_eigenvalues.iter().filter(|&&g| g > zero).count();
    let negative = form_eigenvalues.iter().filter(|&&g| g < -zero).count();
    let location = if t == path.t0() {
        CrossingLocation::Start
    } else if t == path.t1() {
        CrossingLocation::End
    } else {
        CrossingLocation::Interior
    };
    Ok(Crossing {
        t,
        location,
        kernel_dim: cols.len(),
        regular: positive + negative == cols.len(),
        form_eigenvalues,
        positive,
        negative,
    })
}

/// Spectral flow as the signed count of crossing-form signatures. Every
/// crossing must be regular.
pub fn sfl_crossings(path: &OperatorPath, opts: &CrossingOptions) -> Result<SflResult> {
    let crossings = find_crossings(path, opts)?;
    if let Some(c) = crossings.iter().find(|c| !c.regular) {
        return Err(SpecFlowError::IrregularCrossing { t: c.t, null: c.nullity() });
    }
    let value = crossings.iter().map(Crossing::contribution).sum();
    let mut notes = Vec::new();
    if !path.has_derivative() {
        notes.push("derivative by finite differences".to_string());
    }
    Ok(SflResult {
        value,
        method: Method::Crossing,
        diagnostics: Diagnostics { eps0: opts.eps0, evaluations: opts.samples + 1, notes },
        certificate: Certificate::Crossings(crossings),
    })
}

pub fn regularity_report(path: &OperatorPath, opts: &CrossingOptions) -> Result<RegularityReport> {
    let crossings = find_crossings(path, opts)?;
    let all_regular = crossings.iter().all(|c| c.regular);
    let endpoints_invertible = crossings.iter().all(|c| c.location == CrossingLocation::Interior);
    Ok(RegularityReport { crossings, all_regular, endpoints_invertible })
}

#[derive(Debug, Clone)]
pub struct Regularized {
    pub path: OperatorPath,
    pub delta: f64,
    pub report: RegularityReport,
}

/// Finds a shift `delta` such that `A(t) + delta I` has invertible endpoints
/// and only regular crossings, without changing the spectral flow.
///
/// `delta = 0` is tried first, then positive shifts `j eps / (scan + 1)`,
/// then (only if both endpoints are invertible) the negative ones. With
/// invertible endpoints `eps` is half the smallest endpoint `|mu|`; with a
/// kernel at an endpoint only positive shifts below the next endpoint
/// eigenvalue keep the count.
pub fn regularize(path: &OperatorPath, scan: usize, opts: &CrossingOptions) -> Result<Regularized> {
    let (a, b) = (path.start(), path.end());
    let tol = |op: &HermitianOperator| opts.eps0 * op.scale();
    let degenerate = a.min_abs_eigenvalue() <= tol(&a) || b.min_abs_eigenvalue() <= tol(&b);
    let epsilon = if degenerate {
        let next = [&a, &b]
            .iter()
            .flat_map(|op| {
                let t = tol(op);
                op.eigenvalues().iter().map(|x| x.abs()).filter(move |&x| x > t).collect::<Vec<_>>()
            })
            .fold(f64::INFINITY, f64::min);
        (1e-4 * a.scale().max(b.scale())).min(0.5 * next)
    } else {
        0.5 * a.min_abs_eigenvalue().min(b.min_abs_eigenvalue())
    };

    let mut shifts = vec![0.0];
    let step = epsilon / (scan + 1) as f64;
    shifts.extend((1..=scan).map(|j| j as f64 * step));
    if !degenerate {
        shifts.extend((1..=scan).map(|j| -(j as f64) * step));
    }
    for &delta in &shifts {
        let shifted = if delta == 0.0 { path.clone() } else { path.shifted(delta) };
        let report = match regularity_report(&shifted, opts) {
            Ok(r) => r,
            Err(SpecFlowError::CrossingCluster { .. }) => continue,
            Err(e) => return Err(e),
        };
        if report.all_regular && report.endpoints_invertible {
            return Ok(Regularized { path: shifted, delta, report });
        }
    }
    Err(SpecFlowError::RegularizationFailed { tried: shifts.len(), epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_path(f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static, g: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> OperatorPath {
        OperatorPath::new(0.0, 1.0, move |t| HermitianOperator::from_diag(&f(t)))
            .unwrap()
            .with_derivative(move |t| HermitianOperator::from_diag(&g(t)))
    }

    #[test]
    fn single_regular_crossing() {
        let p = diag_path(|t| vec![t - 0.5], |_| vec![1.0]);
        let c = find_crossings(&p, &CrossingOptions::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].t - 0.5).abs() < 1e-10);
        assert_eq!(c[0].form_eigenvalues, vec![1.0]);
        assert_eq!(sfl_crossings(&p, &CrossingOptions::default()).unwrap().value, 1);
    }

    #[test]
    fn touching_crossing_is_irregular() {
        let p = diag_path(|t| vec![(t - 0.5).powi(2)], |t| vec![2.0 * (t - 0.5)]);
        let c = find_crossings(&p, &CrossingOptions::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert!(!c[0].regular);
        assert!(matches!(sfl_crossings(&p, &CrossingOptions::default()), Err(SpecFlowError::IrregularCrossing { .. })));
        let r = regularize(&p, 8, &CrossingOptions::default()).unwrap();
        assert!(r.delta != 0.0);
        assert_eq!(sfl_crossings(&r.path, &CrossingOptions::default()).unwrap().value, 0);
    }

    #[test]
    fn endpoint_conventions() {
        let opts = CrossingOptions::default();
        let up = diag_path(|t| vec![t], |_| vec![1.0]);
        let down = diag_path(|t| vec![-t], |_| vec![-1.0]);
        let end = diag_path(|t| vec![t - 1.0], |_| vec![1.0]);
        assert_eq!(sfl_crossings(&up, &opts).unwrap().value, 0);
        assert_eq!(sfl_crossings(&down, &opts).unwrap().value, -1);
        assert_eq!(sfl_crossings(&end, &opts).unwrap().value, 1);
        let c = find_crossings(&up, &opts).unwrap();
        assert_eq!(c[0].location, CrossingLocation::Start);
    }

    #[test]
    fn opposite_crossings_at_one_instant() {
        let p = diag_path(|t| vec![t - 0.5, 0.5 - t, 3.0], |_| vec![1.0, -1.0, 0.0]);
        let c = find_crossings(&p, &CrossingOptions::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].kernel_dim, 2);
        assert_eq!(c[0].signature(), 0);
        assert!(c[0].regular);
    }

    #[test]
    fn near_coincident_crossings_are_refused() {
        let p = diag_path(|t| vec![t - 0.5, t - 0.5 - 1e-8], |_| vec![1.0, 1.0]);
        let r = find_crossings(&p, &CrossingOptions::default());
        assert!(matches!(r, Err(SpecFlowError::CrossingCluster { .. })), "{r:?}");
    }

    #[test]
    fn finite_difference_derivative() {
        let p = OperatorPath::new(0.0, 1.0, |t| HermitianOperator::from_diag(&[t - 0.3, 0.8 - t])).unwrap();
        let res = sfl_crossings(&p, &CrossingOptions::default()).unwrap();
        assert_eq!(res.value, 0);
        let Certificate::Crossings(c) = res.certificate else { panic!() };
        assert_eq!(c.len(), 2);
        assert!((c[0].form_eigenvalues[0] - 1.0).abs() < 1e-6);
    }
}
