//! Named operator families with known spectral flow, and seeded random
//! paths for property tests.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpecFlowError};
use crate::linalg::{ComplexMatrix, C64, I};
use crate::operator::HermitianOperator;
use crate::path::{unitary_exp, OperatorPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TwistedFourier,
    TwistedFd,
    Normalization,
    LinearPencil,
    RandomSmooth,
    Constant,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::TwistedFourier,
        Family::TwistedFd,
        Family::Normalization,
        Family::LinearPencil,
        Family::RandomSmooth,
        Family::Constant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::TwistedFourier => "twisted_fourier",
            Family::TwistedFd => "twisted_fd",
            Family::Normalization => "normalization",
            Family::LinearPencil => "linear_pencil",
            Family::RandomSmooth => "random_smooth",
            Family::Constant => "constant",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = SpecFlowError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| SpecFlowError::InvalidInput(format!("unknown family '{s}'")))
    }
}

/// A family name with numeric parameters.
///
/// | family            | parameters (defaults)                         | natural interval |
/// |-------------------|-----------------------------------------------|------------------|
/// | `twisted_fourier` | `K` (5)                                       | `[-pi, pi]`      |
/// | `twisted_fd`      | `n` (200)                                     | `[-pi, pi]`      |
/// | `normalization`   | `n_side` (1)                                  | `[-1, 1]`        |
/// | `linear_pencil`   | `dim` (1), `a0` (-1), `a1` (1), or `seed`     | `[0, 1]`         |
/// | `random_smooth`   | `dim` (4), `seed` (0), `knots` (4)            | `[0, 1]`         |
/// | `constant`        | `dim` (1), `value` (1)                        | any              |
///
/// `linear_pencil` interpolates `a0 I -> a1 I`, or two random endpoints
/// when `seed` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub family: Family,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl FamilyDescriptor {
    pub fn new(family: Family) -> Self {
        Self { family, params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn real(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.params.get(key).copied().unwrap_or(default);
        if !v.is_finite() {
            return Err(SpecFlowError::InvalidInput(format!("parameter {key} must be finite")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(&v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(v as usize),
            Some(v) => Err(SpecFlowError::InvalidInput(format!("parameter {key} must be a nonnegative integer, got {v}"))),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(SpecFlowError::InvalidInput(format!("unknown parameter '{k}' for {}", self.family))),
            None => Ok(()),
        }
    }

    pub fn default_interval(&self) -> (f64, f64) {
        match self.family {
            Family::TwistedFourier | Family::TwistedFd => (-PI, PI),
            Family::Normalization => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }

    /// Operator dimension.
    pub fn dim(&self) -> Result<usize> {
        Ok(match self.family {
            Family::TwistedFourier => 2 * self.count("K", 5)? + 1,
            Family::TwistedFd => self.count("n", 200)?,
            Family::Normalization => 2 * self.count("n_side", 1)? + 1,
            Family::LinearPencil | Family::Constant => self.count("dim", 1)?,
            Family::RandomSmooth => self.count("dim", 4)?,
        })
    }

    pub fn path(&self, t0: f64, t1: f64) -> Result<OperatorPath> {
        let path = match self.family {
            Family::TwistedFourier => {
                self.check_keys(&["K"])?;
                twisted_fourier_path(self.count("K", 5)?, t0, t1)?
            }
            Family::TwistedFd => {
                self.check_keys(&["n"])?;
                twisted_fd_path(self.count("n", 200)?, t0, t1)?
            }
            Family::Normalization => {
                self.check_keys(&["n_side"])?;
                normalization_path(self.count("n_side", 1)?, t0, t1)?
            }
            Family::LinearPencil => {
                self.check_keys(&["dim", "a0", "a1", "seed"])?;
                let dim = self.count("dim", 1)?;
                let (a0, a1) = match self.params.get("seed") {
                    Some(_) => {
                        let mut rng = ChaCha8Rng::seed_from_u64(self.count("seed", 0)? as u64);
                        (random_hermitian(dim, &mut rng), random_hermitian(dim, &mut rng))
                    }
                    None => (
                        scalar_operator(dim, self.real("a0", -1.0)?)?,
                        scalar_operator(dim, self.real("a1", 1.0)?)?,
                    ),
                };
                linear_pencil_on(&a0, &a1, t0, t1)?
            }
            Family::RandomSmooth => {
                self.check_keys(&["dim", "seed", "knots"])?;
                let path = random_smooth(self.count("dim", 4)?, self.count("seed", 0)? as u64, self.count("knots", 4)?)?;
                if (t0, t1) == (0.0, 1.0) {
                    path
                } else {
                    reparameterize(&path, t0, t1)?
                }
            }
            Family::Constant => {
                self.check_keys(&["dim", "value"])?;
                OperatorPath::constant(scalar_operator(self.count("dim", 1)?, self.real("value", 1.0)?)?, t0, t1)?
            }
        };
        Ok(path)
    }
}

fn scalar_operator(dim: usize, value: f64) -> Result<HermitianOperator> {
    if dim == 0 {
        return Err(SpecFlowError::InvalidInput("dim must be at least 1".into()));
    }
    Ok(HermitianOperator::from_diag(&vec![value; dim]))
}

/// `diag(2 pi k + lambda)`, `k = -K..=K`.
pub fn twisted_fourier(k: usize, lambda: f64) -> Result<HermitianOperator> {
    if k < 1 {
        return Err(SpecFlowError::InvalidInput("twisted_fourier needs K >= 1".into()));
    }
    let kk = k as i64;
    let diag: Vec<f64> = (-kk..=kk).map(|j| 2.0 * PI * j as f64 + lambda).collect();
    Ok(HermitianOperator::from_diag(&diag))
}

pub fn twisted_fourier_path(k: usize, t0: f64, t1: f64) -> Result<OperatorPath> {
    let dim = 2 * k + 1;
    twisted_fourier(k, t0)?;
    let id = HermitianOperator::from_diag(&vec![1.0; dim]);
    Ok(OperatorPath::new(t0, t1, move |l| twisted_fourier(k, l).expect("K checked"))?.with_derivative(move |_| id.clone()))
}

/// Central-difference realization of `u -> i u'` on `n` points of `[0, 1)`
/// with `u(0) = e^{i lambda} u(1)`: `(i / 2h)(S+ - S-)`, `h = 1/n`, where the
/// wrap entry of the cyclic forward shift `S+` carries `e^{-i lambda}`.
pub fn twisted_fd(n: usize, lambda: f64) -> Result<HermitianOperator> {
    check_fd(n)?;
    Ok(HermitianOperator::from_matrix_symmetrized(&fd_matrix(n, lambda, false)))
}

/// `d/d lambda` of [`twisted_fd`]; only the two wrap entries depend on `lambda`.
pub fn twisted_fd_derivative(n: usize, lambda: f64) -> Result<HermitianOperator> {
    check_fd(n)?;
    Ok(HermitianOperator::from_matrix_symmetrized(&fd_matrix(n, lambda, true)))
}

fn check_fd(n: usize) -> Result<()> {
    if n < 8 {
        return Err(SpecFlowError::InvalidInput("twisted_fd needs n >= 8".into()));
    }
    Ok(())
}

fn fd_matrix(n: usize, lambda: f64, derivative: bool) -> ComplexMatrix {
    let c = 0.5 * n as f64; // 1 / 2h
    let mut m = ComplexMatrix::zeros(n, n);
    if !derivative {
        for j in 0..n - 1 {
            m[(j, j + 1)] = I * c;
            m[(j + 1, j)] = -I * c;
        }
    }
    let twist = C64::from_polar(1.0, -lambda);
    // (i c) e^{-i lambda} and its adjoint; d/d lambda multiplies by -i.
    let (lower, upper) = if derivative {
        (twist * c, twist.conj() * c)
    } else {
        (I * c * twist, -I * c * twist.conj())
    };
    m[(n - 1, 0)] = lower;
    m[(0, n - 1)] = upper;
    m
}

pub fn twisted_fd_path(n: usize, t0: f64, t1: f64) -> Result<OperatorPath> {
    check_fd(n)?;
    Ok(OperatorPath::new(t0, t1, move |l| twisted_fd(n, l).expect("n checked"))?
        .with_derivative(move |l| twisted_fd_derivative(n, l).expect("n checked")))
}

/// `lambda P0 + P+ - P-` with `rank P+ = rank P- = n_side`, `rank P0 = 1`:
/// `diag(1, .., 1, lambda, -1, .., -1)`.
pub fn normalization(n_side: usize, lambda: f64) -> Result<HermitianOperator> {
    if n_side < 1 {
        return Err(SpecFlowError::InvalidInput("normalization needs n_side >= 1".into()));
    }
    let mut diag = vec![1.0; n_side];
    diag.push(lambda);
    diag.extend(std::iter::repeat_n(-1.0, n_side));
    Ok(HermitianOperator::from_diag(&diag))
}

pub fn normalization_path(n_side: usize, t0: f64, t1: f64) -> Result<OperatorPath> {
    normalization(n_side, t0)?;
    let mut d = vec![0.0; 2 * n_side + 1];
    d[n_side] = 1.0;
    let deriv = HermitianOperator::from_diag(&d);
    Ok(OperatorPath::new(t0, t1, move |l| normalization(n_side, l).expect("n_side checked"))?
        .with_derivative(move |_| deriv.clone()))
}

/// `t -> (1 - t) A0 + t A1` on `[0, 1]`.
pub fn linear_pencil(a0: &HermitianOperator, a1: &HermitianOperator) -> Result<OperatorPath> {
    linear_pencil_on(a0, a1, 0.0, 1.0)
}

fn linear_pencil_on(a0: &HermitianOperator, a1: &HermitianOperator, t0: f64, t1: f64) -> Result<OperatorPath> {
    a0.check_same_dim(a1)?;
    let (a, b) = (a0.clone(), a1.clone());
    let len = t1 - t0;
    let slope = a1.sub(a0).scale_by(1.0 / len);
    Ok(OperatorPath::new(t0, t1, move |t| a.lerp(&b, (t - t0) / len))?.with_derivative(move |_| slope.clone()))
}

/// Random Hermitian matrix with real and imaginary parts uniform in `[-1, 1]`.
pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = C64::new(rng.random_range(-1.0..=1.0), 0.0);
        for j in i + 1..dim {
            let z = C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::from_matrix_symmetrized(&m)
}

/// `A(t) = C_0 + sum_{k=1}^{knots-1} (C_k cos(pi k t) + S_k sin(pi k t)) / k`
/// on `[0, 1]` with random Hermitian `C_k`, `S_k` drawn from ChaCha8 seeded
/// by `seed`. Half-period frequencies keep the path non-periodic.
pub fn random_smooth(dim: usize, seed: u64, knots: usize) -> Result<OperatorPath> {
    if dim < 1 || knots < 2 {
        return Err(SpecFlowError::InvalidInput("random_smooth needs dim >= 1 and knots >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c0 = random_hermitian(dim, &mut rng);
    let terms: Vec<(f64, ComplexMatrix, ComplexMatrix)> = (1..knots)
        .map(|k| {
            let c = random_hermitian(dim, &mut rng).matrix().scale_real(1.0 / k as f64);
            let s = random_hermitian(dim, &mut rng).matrix().scale_real(1.0 / k as f64);
            (PI * k as f64, c, s)
        })
        .collect();
    let terms = std::sync::Arc::new(terms);
    let dterms = std::sync::Arc::clone(&terms);
    let eval = move |t: f64| {
        let mut m = c0.matrix().clone();
        for (w, c, s) in terms.iter() {
            m.axpy(C64::new((w * t).cos(), 0.0), c);
            m.axpy(C64::new((w * t).sin(), 0.0), s);
        }
        HermitianOperator::from_matrix_symmetrized(&m)
    };
    let derivative = move |t: f64| {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (w, c, s) in dterms.iter() {
            m.axpy(C64::new(-w * (w * t).sin(), 0.0), c);
            m.axpy(C64::new(w * (w * t).cos(), 0.0), s);
        }
        HermitianOperator::from_matrix_symmetrized(&m)
    };
    Ok(OperatorPath::new(0.0, 1.0, eval)?.with_derivative(derivative))
}

/// The same path traversed affinely over `[t0, t1]`.
pub fn reparameterize(path: &OperatorPath, t0: f64, t1: f64) -> Result<OperatorPath> {
    let (s0, len) = (path.t0(), path.len());
    let ratio = len / (t1 - t0);
    let (p, q) = (path.clone(), path.clone());
    let map = move |t: f64| s0 + (t - t0) * ratio;
    let out = OperatorPath::new(t0, t1, move |t| p.at(map(t)))?;
    Ok(if path.has_derivative() {
        out.with_derivative(move |t| q.analytic_derivative(map(t)).expect("derivative present").scale_by(ratio))
    } else {
        out
    })
}

/// Two-parameter families `h(s, t)` built on a base path, for homotopy
/// invariance checks with `s` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomotopyFamily {
    /// `h(s, t) = A(t)`.
    Constant,
    /// `h(s, t) = A(t) + s eps sin(pi (t - t0) / len) B` with a random `B`;
    /// the perturbation vanishes at both ends.
    Perturbed,
    /// `h(s, t) = U(s)* A(t) U(s)`, `U(s) = exp(i s H)` with a random `H`.
    Conjugation,
}

impl HomotopyFamily {
    pub const ALL: [HomotopyFamily; 3] = [HomotopyFamily::Constant, HomotopyFamily::Perturbed, HomotopyFamily::Conjugation];
}

pub type Homotopy = std::sync::Arc<dyn Fn(f64, f64) -> HermitianOperator + Send + Sync>;

pub fn homotopy(family: HomotopyFamily, base: &OperatorPath, seed: u64, eps: f64) -> Result<Homotopy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = base.clone();
    let (t0, len) = (base.t0(), base.len());
    Ok(match family {
        HomotopyFamily::Constant => std::sync::Arc::new(move |_, t| p.at(t)),
        HomotopyFamily::Perturbed => {
            let b = random_hermitian(base.dim(), &mut rng);
            std::sync::Arc::new(move |s, t| {
                let w = s * eps * (PI * (t - t0) / len).sin();
                p.at(t).add(&b.scale_by(w))
            })
        }
        HomotopyFamily::Conjugation => {
            let h = random_hermitian(base.dim(), &mut rng);
            h.eigh()?;
            std::sync::Arc::new(move |s, t| {
                let u = unitary_exp(&h, s).expect("eigendecomposition succeeded above");
                p.at(t).conjugate_by(&u)
            })
        }
    })
}
