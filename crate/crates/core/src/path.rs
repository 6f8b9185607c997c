//! Paths `t -> A(t)` of Hermitian operators on a compact parameter interval.

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SpecFlowError};
use crate::linalg::C64;
use crate::operator::HermitianOperator;

pub type Evaluator = Arc<dyn Fn(f64) -> HermitianOperator + Send + Sync>;

/// Relative step of the central-difference derivative fallback.
pub const FD_STEP: f64 = 1e-5;
/// Joint tolerance for [`concatenate`].
pub const JOINT_TOL: f64 = 1e-10;

/// A continuous path of fixed-dimension Hermitian operators on `[t0, t1]`.
///
/// The evaluator must be a pure function of `t`; it is called concurrently
/// by the spectral-flow methods. Parameters outside `[t0, t1]` are clamped.
#[derive(Clone)]
pub struct OperatorPath {
    t0: f64,
    t1: f64,
    dim: usize,
    eval: Evaluator,
    derivative: Option<Evaluator>,
    samples: Option<Arc<Vec<(f64, HermitianOperator)>>>,
}

impl fmt::Debug for OperatorPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorPath")
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .field("dim", &self.dim)
            .field("derivative", &self.derivative.is_some())
            .field("samples", &self.samples.as_ref().map(|s| s.len()))
            .finish()
    }
}

impl OperatorPath {
    pub fn new<F>(t0: f64, t1: f64, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> HermitianOperator + Send + Sync + 'static,
    {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(SpecFlowError::InvalidInput(format!("parameter interval [{t0}, {t1}] is empty")));
        }
        let dim = eval(t0).dim();
        let at_end = eval(t1).dim();
        if at_end != dim {
            return Err(SpecFlowError::DimensionMismatch { expected: dim, found: at_end });
        }
        Ok(Self { t0, t1, dim, eval: Arc::new(eval), derivative: None, samples: None })
    }

    /// Attaches an analytic derivative `t -> A'(t)`.
    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> HermitianOperator + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn constant(op: HermitianOperator, t0: f64, t1: f64) -> Result<Self> {
        let dim = op.dim();
        let zero = HermitianOperator::zeros(dim);
        Ok(Self::new(t0, t1, move |_| op.clone())?.with_derivative(move |_| zero.clone()))
    }

    /// Piecewise-linear interpolation through `(t, A)` samples, strictly
    /// increasing in `t`. The derivative is the slope of the segment to the
    /// right of `t` (left at the final sample).
    pub fn from_samples(samples: Vec<(f64, HermitianOperator)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(SpecFlowError::InvalidInput("a sampled path needs at least two samples".into()));
        }
        let dim = samples[0].1.dim();
        for w in samples.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(SpecFlowError::InvalidInput(format!("sample parameters not increasing at t = {}", w[1].0)));
            }
        }
        if let Some((_, op)) = samples.iter().find(|(_, op)| op.dim() != dim) {
            return Err(SpecFlowError::DimensionMismatch { expected: dim, found: op.dim() });
        }
        let t0 = samples[0].0;
        let t1 = samples[samples.len() - 1].0;
        let shared = Arc::new(samples);
        let for_eval = Arc::clone(&shared);
        let for_deriv = Arc::clone(&shared);
        let mut path = Self::new(t0, t1, move |t| {
            let (j, w) = locate(&for_eval, t);
            for_eval[j].1.lerp(&for_eval[j + 1].1, w)
        })?
        .with_derivative(move |t| {
            let (j, _) = locate(&for_deriv, t);
            let (ta, a) = (&for_deriv[j].0, &for_deriv[j].1);
            let (tb, b) = (&for_deriv[j + 1].0, &for_deriv[j + 1].1);
            b.sub(a).scale_by(1.0 / (tb - ta))
        });
        path.samples = Some(shared);
        Ok(path)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn len(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> Option<&[(f64, HermitianOperator)]> {
        self.samples.as_deref().map(|v| v.as_slice())
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn at(&self, t: f64) -> HermitianOperator {
        (self.eval)(t.clamp(self.t0, self.t1))
    }

    pub fn start(&self) -> HermitianOperator {
        self.at(self.t0)
    }

    pub fn end(&self) -> HermitianOperator {
        self.at(self.t1)
    }

    /// Analytic derivative, if the path carries one.
    pub fn analytic_derivative(&self, t: f64) -> Option<HermitianOperator> {
        self.derivative.as_ref().map(|d| d(t.clamp(self.t0, self.t1)))
    }

    /// Central difference with step `FD_STEP * len`; at the ends of the
    /// interval a second-order one-sided stencil when `one_sided` is set.
    pub fn finite_difference(&self, t: f64, one_sided: bool) -> Result<HermitianOperator> {
        let h = FD_STEP * self.len();
        let raw = |t: f64| (self.eval)(t);
        if t - h >= self.t0 && t + h <= self.t1 {
            return Ok(raw(t + h).sub(&raw(t - h)).scale_by(0.5 / h));
        }
        if !one_sided {
            return Err(SpecFlowError::DerivativeUnavailable { t });
        }
        let (a, b, c, sign) = if t - h < self.t0 {
            (raw(t), raw(t + h), raw(t + 2.0 * h), 1.0)
        } else {
            (raw(t), raw(t - h), raw(t - 2.0 * h), -1.0)
        };
        // (-3 A(t) + 4 A(t +- h) - A(t +- 2h)) / (+-2h)
        let m = b.scale_by(4.0).sub(&a.scale_by(3.0)).sub(&c);
        Ok(m.scale_by(sign * 0.5 / h))
    }

    /// Analytic derivative when present, finite differences otherwise.
    pub fn derivative_at(&self, t: f64, one_sided: bool) -> Result<HermitianOperator> {
        match self.analytic_derivative(t) {
            Some(d) => Ok(d),
            None => self.finite_difference(t, one_sided),
        }
    }

    /// `max_t |(A(t+h) - A(t-h)) / 2h - A'(t)|` over the given interior points.
    pub fn derivative_defect(&self, points: &[f64], h: f64) -> Option<f64> {
        let d = self.derivative.as_ref()?;
        Some(
            points
                .iter()
                .map(|&t| {
                    let fd = (self.eval)(t + h).sub(&(self.eval)(t - h)).scale_by(0.5 / h);
                    fd.matrix().max_abs_diff(d(t).matrix())
                })
                .fold(0.0, f64::max),
        )
    }

    /// The same path on a sub-interval `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        if !(self.t0 <= a && a < b && b <= self.t1) {
            return Err(SpecFlowError::InvalidInput(format!("[{a}, {b}] is not inside [{}, {}]", self.t0, self.t1)));
        }
        Ok(Self { t0: a, t1: b, dim: self.dim, eval: Arc::clone(&self.eval), derivative: self.derivative.clone(), samples: None })
    }

    /// `t -> A(t0 + t1 - t)`.
    pub fn reverse(&self) -> Self {
        let (t0, t1) = (self.t0, self.t1);
        let eval = Arc::clone(&self.eval);
        let derivative = self.derivative.clone().map(|d| -> Evaluator { Arc::new(move |t: f64| d(t0 + t1 - t).scale_by(-1.0)) });
        Self { t0, t1, dim: self.dim, eval: Arc::new(move |t| eval(t0 + t1 - t)), derivative, samples: None }
    }

    /// `t -> A(t) + delta I`.
    pub fn shifted(&self, delta: f64) -> Self {
        let eval = Arc::clone(&self.eval);
        Self {
            t0: self.t0,
            t1: self.t1,
            dim: self.dim,
            eval: Arc::new(move |t| eval(t).shift(delta)),
            derivative: self.derivative.clone(),
            samples: None,
        }
    }
}

fn locate(samples: &[(f64, HermitianOperator)], t: f64) -> (usize, f64) {
    let last = samples.len() - 2;
    let j = match samples.binary_search_by(|(s, _)| s.total_cmp(&t)) {
        Ok(j) => j.min(last),
        Err(j) => j.saturating_sub(1).min(last),
    };
    let (ta, tb) = (samples[j].0, samples[j + 1].0);
    (j, ((t - ta) / (tb - ta)).clamp(0.0, 1.0))
}

/// `p1 * p2`: traverses `p1`, then `p2` shifted to start where `p1` ends.
/// The end of `p1` must match the start of `p2` to [`JOINT_TOL`].
pub fn concatenate(p1: &OperatorPath, p2: &OperatorPath) -> Result<OperatorPath> {
    if p1.dim != p2.dim {
        return Err(SpecFlowError::DimensionMismatch { expected: p1.dim, found: p2.dim });
    }
    let deviation = p1.end().matrix().max_abs_diff(p2.start().matrix());
    if deviation > JOINT_TOL {
        return Err(SpecFlowError::EndpointMismatch { deviation });
    }
    let joint = p1.t1;
    let offset = p2.t0 - joint;
    let (e1, e2) = (Arc::clone(&p1.eval), Arc::clone(&p2.eval));
    let eval: Evaluator = Arc::new(move |t| if t <= joint { e1(t) } else { e2(t + offset) });
    let derivative = match (&p1.derivative, &p2.derivative) {
        (Some(d1), Some(d2)) => {
            let (d1, d2) = (Arc::clone(d1), Arc::clone(d2));
            Some(Arc::new(move |t: f64| if t < joint { d1(t) } else { d2(t + offset) }) as Evaluator)
        }
        _ => None,
    };
    Ok(OperatorPath { t0: p1.t0, t1: joint + p2.len(), dim: p1.dim, eval, derivative, samples: None })
}

/// Unitary `exp(i s H)` from a Hermitian generator.
pub fn unitary_exp(h: &HermitianOperator, s: f64) -> Result<crate::linalg::ComplexMatrix> {
    let eig = h.eigh()?;
    Ok(eig.apply_complex(|mu| C64::from_polar(1.0, s * mu)))
}
