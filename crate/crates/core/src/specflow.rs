//! Spectral flow of a path of Hermitian operators.
//!
//! Three independent evaluations live here:
//!
//! * [`sfl_partition`] builds instants `t_0 <= ... <= t_n` and window radii
//!   `a_i` such that `chi_[-a_i, a_i](A_t)` has constant rank on each
//!   `[t_{i-1}, t_i]`, then telescopes
//!   `sum_i dim E_[0, a_i](A_{t_i}) - dim E_[0, a_i](A_{t_{i-1}})`.
//!   The result carries a [`PartitionCertificate`] that can be re-checked
//!   on a finer grid.
//! * [`sfl_tracking`] follows the sorted eigenvalue curves on an adaptive
//!   grid and counts signed zero crossings.
//! * [`sfl_morse_oracle`] uses the finite-dimensional identity
//!   `sfl = m^-(A(t0)) - m^-(A(t1))` for invertible endpoints.
//!
//! All three classify an eigenvalue `mu` as "at or above zero" iff
//! `mu >= -eps0`, with `eps0 = eps0_rel * max(1, ||A_t||)`. A kernel vector
//! at the start therefore counts inside `E_[0, a]`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::crossing::Crossing;
use crate::error::{Result, SpecFlowError};
use crate::linalg::ComplexMatrix;
use crate::metrics;
use crate::operator::HermitianOperator;
use crate::path::OperatorPath;

#[derive(Debug, Clone, PartialEq)]
pub struct SflOptions {
    /// Initial uniform grid size.
    pub samples: usize,
    /// Relative zero-classification tolerance.
    pub eps0: f64,
    /// Largest admissible gap distance between adjacent grid samples.
    pub continuity_budget: f64,
    pub check_continuity: bool,
    /// Maximum bisection depth for partition and tracking refinement.
    pub max_depth: usize,
    /// Below this depth the partition bisects rather than use a window
    /// that swallows the whole sampled spectrum.
    pub local_depth: usize,
    /// Probe points per candidate subinterval.
    pub probe_points: usize,
    /// Certificate verification grid refinement factor.
    pub verify_factor: usize,
    /// Randomizes grid size and split points of the partition.
    pub seed: Option<u64>,
}

impl Default for SflOptions {
    fn default() -> Self {
        Self {
            samples: 64,
            eps0: 1e-9,
            continuity_budget: 0.5,
            check_continuity: true,
            max_depth: 20,
            local_depth: 6,
            probe_points: 9,
            verify_factor: 4,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Partition,
    Tracking,
    Morse,
    Crossing,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Partition => "partition",
            Method::Tracking => "tracking",
            Method::Morse => "morse",
            Method::Crossing => "crossing",
        }
    }
}

/// One subinterval of a partition certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionPiece {
    pub t_start: f64,
    pub t_end: f64,
    pub radius: f64,
    /// Rank of `chi_[-a, a]` on the whole piece.
    pub window_rank: usize,
    /// `dim E_[0, a]` at the start and end of the piece.
    pub count_start: usize,
    pub count_end: usize,
    /// Number of construction probes; verification uses a finer grid.
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionCertificate {
    pub pieces: Vec<PartitionPiece>,
    /// Smallest observed distance from `+-a_i` to any sampled eigenvalue.
    pub margin: f64,
    pub eps0: f64,
}

impl PartitionCertificate {
    pub fn instants(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pieces.iter().map(|p| p.t_start).collect();
        v.extend(self.pieces.last().map(|p| p.t_end));
        v
    }

    pub fn radii(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.radius).collect()
    }

    pub fn window_ranks(&self) -> Vec<usize> {
        self.pieces.iter().map(|p| p.window_rank).collect()
    }

    pub fn value(&self) -> i64 {
        self.pieces.iter().map(|p| p.count_end as i64 - p.count_start as i64).sum()
    }

    /// Re-checks every piece on a grid `factor` times finer than the one it
    /// was built on: no eigenvalue on `+-a_i`, constant window rank, and the
    /// recorded endpoint counts. Returns the observed margin.
    pub fn verify(&self, path: &OperatorPath, factor: usize) -> Result<f64> {
        let mut cache = SpectrumCache::new(path, self.eps0);
        self.verify_with(&mut cache, factor)
    }

    fn verify_with(&self, cache: &mut SpectrumCache<'_>, factor: usize) -> Result<f64> {
        let path = cache.path;
        let instants = self.instants();
        if (instants[0] - path.t0()).abs() > 0.0 || (instants[instants.len() - 1] - path.t1()).abs() > 0.0 {
            return Err(SpecFlowError::CertificateInvalid("instants do not span the parameter interval".into()));
        }
        if instants.windows(2).any(|w| w[1] < w[0]) {
            return Err(SpecFlowError::CertificateInvalid("instants are not ordered".into()));
        }
        let mut margin = f64::INFINITY;
        for piece in &self.pieces {
            let n = factor.max(1) * piece.probes.saturating_sub(1).max(1) + 1;
            let ts = uniform(piece.t_start, piece.t_end, n);
            let spectra = cache.get_many(&ts);
            for (t, mu) in ts.iter().zip(&spectra) {
                let sep = window_separation(mu, piece.radius);
                margin = margin.min(sep);
                if sep <= separation_floor(mu) {
                    return Err(SpecFlowError::CertificateInvalid(format!(
                        "eigenvalue on window edge +-{} at t = {t}",
                        piece.radius
                    )));
                }
                if window_rank(mu, piece.radius) != piece.window_rank {
                    return Err(SpecFlowError::CertificateInvalid(format!("window rank changes at t = {t}")));
                }
            }
            let ends = cache.get_many(&[piece.t_start, piece.t_end]);
            let (cs, ce) = (
                nonneg_in_window(&ends[0], piece.radius, self.eps0),
                nonneg_in_window(&ends[1], piece.radius, self.eps0),
            );
            if (cs, ce) != (piece.count_start, piece.count_end) {
                return Err(SpecFlowError::CertificateInvalid(format!(
                    "endpoint counts on [{}, {}] are ({cs}, {ce}), certificate says ({}, {})",
                    piece.t_start, piece.t_end, piece.count_start, piece.count_end
                )));
            }
        }
        Ok(margin)
    }
}

/// A step of the tracking grid on which some sorted eigenvalue changed sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackingEvent {
    pub t_lo: f64,
    pub t_hi: f64,
    pub up: usize,
    pub down: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackingCertificate {
    pub steps: usize,
    pub events: Vec<TrackingEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseCertificate {
    pub negative_start: usize,
    pub negative_end: usize,
    pub min_abs_start: f64,
    pub min_abs_end: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Certificate {
    Partition(PartitionCertificate),
    Tracking(TrackingCertificate),
    Morse(MorseCertificate),
    Crossings(Vec<Crossing>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub eps0: f64,
    pub evaluations: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SflResult {
    pub value: i64,
    pub method: Method,
    pub certificate: Certificate,
    pub diagnostics: Diagnostics,
}

/// Memoized eigenvalues along a path, keyed by the bits of `t`.
pub(crate) struct SpectrumCache<'a> {
    pub(crate) path: &'a OperatorPath,
    eps0_rel: f64,
    map: HashMap<u64, Arc<Vec<f64>>>,
}

impl<'a> SpectrumCache<'a> {
    pub(crate) fn new(path: &'a OperatorPath, eps0_rel: f64) -> Self {
        Self { path, eps0_rel, map: HashMap::new() }
    }

    pub(crate) fn get_many(&mut self, ts: &[f64]) -> Vec<Arc<Vec<f64>>> {
        let mut missing: Vec<f64> = ts.iter().copied().filter(|t| !self.map.contains_key(&t.to_bits())).collect();
        missing.sort_by(f64::total_cmp);
        missing.dedup_by(|a, b| a.to_bits() == b.to_bits());
        let path = self.path;
        let computed: Vec<(u64, Arc<Vec<f64>>)> =
            missing.par_iter().map(|&t| (t.to_bits(), Arc::new(path.at(t).eigenvalues().to_vec()))).collect();
        self.map.extend(computed);
        ts.iter().map(|t| Arc::clone(&self.map[&t.to_bits()])).collect()
    }

    pub(crate) fn get(&mut self, t: f64) -> Arc<Vec<f64>> {
        self.get_many(&[t]).pop().expect("one spectrum")
    }

    pub(crate) fn eps(&self, mu: &[f64]) -> f64 {
        self.eps0_rel * spectral_scale(mu)
    }

    pub(crate) fn evaluations(&self) -> usize {
        self.map.len()
    }
}

fn spectral_scale(mu: &[f64]) -> f64 {
    mu.iter().fold(1.0_f64, |s, x| s.max(x.abs()))
}

fn separation_floor(mu: &[f64]) -> f64 {
    1e-9 * spectral_scale(mu)
}

pub(crate) fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|j| if j == n - 1 { b } else { a + (b - a) * j as f64 / (n - 1) as f64 })
        .collect()
}

/// `dim E_[0, a]` with the signed zero tolerance.
fn nonneg_in_window(mu: &[f64], a: f64, eps: f64) -> usize {
    let eps = eps * spectral_scale(mu);
    mu.iter().filter(|&&x| x >= -eps && x <= a).count()
}

/// `rank chi_[-a, a]`.
fn window_rank(mu: &[f64], a: f64) -> usize {
    mu.iter().filter(|&&x| x.abs() <= a).count()
}

/// Distance from `+-a` to the nearest eigenvalue.
fn window_separation(mu: &[f64], a: f64) -> f64 {
    mu.iter().map(|&x| (x.abs() - a).abs()).fold(f64::INFINITY, f64::min)
}

/// Largest movement of any sorted eigenvalue between adjacent samples.
fn max_movement(spectra: &[Arc<Vec<f64>>]) -> f64 {
    spectra
        .windows(2)
        .map(|w| w[0].iter().zip(w[1].iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// Picks the window radius for a candidate subinterval. Finite gaps in the
/// sampled `|mu|` set (with 0 as a floor) are preferred, widest first; the
/// gap above the whole sampled spectrum is used only when `allow_top`.
fn choose_radius(spectra: &[Arc<Vec<f64>>], margin: f64, allow_top: bool) -> Option<f64> {
    let mut values: Vec<f64> = spectra.iter().flat_map(|mu| mu.iter().map(|x| x.abs())).collect();
    values.push(0.0);
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut best: Option<(f64, f64)> = None;
    for w in values.windows(2) {
        let width = w[1] - w[0];
        if width > 2.0 * margin && best.is_none_or(|(bw, _)| width > bw) {
            best = Some((width, 0.5 * (w[0] + w[1])));
        }
    }
    if let Some((_, a)) = best {
        return Some(a);
    }
    if allow_top {
        let top = *values.last().unwrap_or(&0.0);
        return Some(top + 2.0 * margin.max(1e-3 * top.max(1.0)));
    }
    None
}

/// Inserts midpoints until adjacent samples are within the gap-distance
/// budget.
fn continuity_grid(path: &OperatorPath, grid: Vec<f64>, opts: &SflOptions) -> Result<Vec<f64>> {
    let mut kappas: HashMap<u64, Arc<ComplexMatrix>> = HashMap::new();
    let mut pts = grid;
    for round in 0..=opts.max_depth {
        let missing: Vec<f64> = pts.iter().copied().filter(|t| !kappas.contains_key(&t.to_bits())).collect();
        let computed: Vec<(u64, Arc<ComplexMatrix>)> = missing
            .par_iter()
            .map(|&t| (t.to_bits(), Arc::new(metrics::cayley(&path.at(t)).matrix().clone())))
            .collect();
        kappas.extend(computed);
        let budget = opts.continuity_budget;
        let failing: Vec<(usize, f64)> = pts
            .par_windows(2)
            .enumerate()
            .filter_map(|(j, w)| {
                let diff = &*kappas[&w[0].to_bits()] - &*kappas[&w[1].to_bits()];
                // Frobenius bounds the 2-norm from above.
                if diff.frobenius() <= budget {
                    return None;
                }
                let gap = diff.norm2();
                (gap > budget).then_some((j, gap))
            })
            .collect();
        if failing.is_empty() {
            return Ok(pts);
        }
        if round == opts.max_depth {
            let (j, gap) = failing[0];
            return Err(SpecFlowError::NotContinuous { t_lo: pts[j], t_hi: pts[j + 1], gap, budget });
        }
        let mut refined = Vec::with_capacity(pts.len() + failing.len());
        let mut f = failing.iter().peekable();
        for j in 0..pts.len() {
            refined.push(pts[j]);
            if f.peek().is_some_and(|(k, _)| *k == j) {
                refined.push(0.5 * (pts[j] + pts[j + 1]));
                f.next();
            }
        }
        pts = refined;
    }
    unreachable!("loop returns at max depth")
}

struct PartitionBuilder<'p, 'o> {
    cache: SpectrumCache<'p>,
    opts: &'o SflOptions,
    grid: Vec<f64>,
    rng: Option<ChaCha8Rng>,
    pieces: Vec<PartitionPiece>,
    margin: f64,
}

impl PartitionBuilder<'_, '_> {
    fn build(&mut self, l: f64, r: f64, depth: usize) -> Result<()> {
        if let Some(piece) = self.try_piece(l, r, depth)? {
            self.pieces.push(piece);
            return Ok(());
        }
        if depth >= self.opts.max_depth {
            return Err(SpecFlowError::PartitionFailure { t_lo: l, t_hi: r });
        }
        let jitter = self.rng.as_mut().map_or(0.0, |rng| rng.random_range(-0.1..0.1));
        let mid = l + (r - l) * (0.5 + jitter);
        self.build(l, mid, depth + 1)?;
        self.build(mid, r, depth + 1)
    }

    fn try_piece(&mut self, l: f64, r: f64, depth: usize) -> Result<Option<PartitionPiece>> {
        let mut probes = uniform(l, r, self.opts.probe_points);
        probes.extend(self.grid.iter().copied().filter(|&t| l < t && t < r));
        probes.sort_by(f64::total_cmp);
        probes.dedup();
        let spectra = self.cache.get_many(&probes);

        let floor = spectra.iter().map(|mu| separation_floor(mu)).fold(0.0, f64::max);
        let margin = max_movement(&spectra).max(floor);
        let allow_top = depth >= self.opts.local_depth;
        let Some(a) = choose_radius(&spectra, margin, allow_top) else {
            return Ok(None);
        };
        let rank = window_rank(&spectra[0], a);
        let mut observed = f64::INFINITY;
        for mu in &spectra {
            let sep = window_separation(mu, a);
            if sep <= margin || window_rank(mu, a) != rank {
                return Ok(None);
            }
            observed = observed.min(sep);
        }

        // Verification grid, finer than the construction probes.
        let n = self.opts.verify_factor * (probes.len() - 1) + 1;
        let fine = uniform(l, r, n);
        for mu in self.cache.get_many(&fine) {
            let sep = window_separation(&mu, a);
            if sep <= separation_floor(&mu) || window_rank(&mu, a) != rank {
                return Ok(None);
            }
            observed = observed.min(sep);
        }
        self.margin = self.margin.min(observed);

        let eps = self.opts.eps0;
        let (start, end) = (&spectra[0], &spectra[spectra.len() - 1]);
        Ok(Some(PartitionPiece {
            t_start: l,
            t_end: r,
            radius: a,
            window_rank: rank,
            count_start: nonneg_in_window(start, a, eps),
            count_end: nonneg_in_window(end, a, eps),
            probes: probes.len(),
        }))
    }
}

/// Spectral flow from an explicitly constructed partition of the parameter
/// interval.
pub fn sfl_partition(path: &OperatorPath, opts: &SflOptions) -> Result<SflResult> {
    let mut rng = opts.seed.map(ChaCha8Rng::seed_from_u64);
    let extra = rng.as_mut().map_or(0, |r| r.random_range(0..8));
    let mut grid = uniform(path.t0(), path.t1(), opts.samples + 1 + extra);
    let mut notes = Vec::new();
    if opts.check_continuity {
        let before = grid.len();
        grid = continuity_grid(path, grid, opts)?;
        if grid.len() > before {
            notes.push(format!("continuity refinement added {} samples", grid.len() - before));
        }
    }
    let mut builder = PartitionBuilder {
        cache: SpectrumCache::new(path, opts.eps0),
        opts,
        grid,
        rng,
        pieces: Vec::new(),
        margin: f64::INFINITY,
    };
    builder.cache.get_many(&builder.grid.clone());
    builder.build(path.t0(), path.t1(), 0)?;

    let certificate = PartitionCertificate { pieces: builder.pieces, margin: builder.margin, eps0: opts.eps0 };
    let observed = certificate.verify_with(&mut builder.cache, opts.verify_factor)?;
    let certificate = PartitionCertificate { margin: certificate.margin.min(observed), ..certificate };
    let value = certificate.value();
    Ok(SflResult {
        value,
        method: Method::Partition,
        diagnostics: Diagnostics { eps0: opts.eps0, evaluations: builder.cache.evaluations(), notes },
        certificate: Certificate::Partition(certificate),
    })
}

fn nonneg_count(mu: &[f64], eps: f64) -> usize {
    mu.iter().filter(|&&x| x >= -eps).count()
}

struct Tracker<'p, 'o> {
    cache: SpectrumCache<'p>,
    opts: &'o SflOptions,
    min_step: f64,
    events: Vec<TrackingEvent>,
    steps: usize,
}

impl Tracker<'_, '_> {
    fn step(&mut self, a: f64, b: f64, depth: usize) -> Result<i64> {
        let (mu_a, mu_b) = (self.cache.get(a), self.cache.get(b));
        let (eps_a, eps_b) = (self.cache.eps(&mu_a), self.cache.eps(&mu_b));
        let changed: Vec<usize> = (0..mu_a.len()).filter(|&k| (mu_a[k] >= -eps_a) != (mu_b[k] >= -eps_b)).collect();
        if changed.is_empty() {
            self.steps += 1;
            return Ok(0);
        }
        let movement = changed.iter().map(|&k| (mu_b[k] - mu_a[k]).abs()).fold(0.0, f64::max);
        let mut gap = f64::INFINITY;
        for &k in &changed {
            for j in (0..mu_a.len()).filter(|j| !changed.contains(j)) {
                gap = gap.min((mu_a[k] - mu_a[j]).abs()).min((mu_b[k] - mu_b[j]).abs());
            }
        }
        if movement <= 0.5 * gap {
            self.steps += 1;
            let up = changed.iter().filter(|&&k| mu_b[k] >= -eps_b).count();
            let down = changed.len() - up;
            self.events.push(TrackingEvent { t_lo: a, t_hi: b, up, down });
            return Ok(nonneg_count(&mu_b, eps_b) as i64 - nonneg_count(&mu_a, eps_a) as i64);
        }
        if depth >= self.opts.max_depth || b - a <= self.min_step {
            return Err(SpecFlowError::TrackingAmbiguity { t_lo: a, t_hi: b });
        }
        let mid = 0.5 * (a + b);
        Ok(self.step(a, mid, depth + 1)? + self.step(mid, b, depth + 1)?)
    }
}

/// Spectral flow by counting signed zero crossings of the sorted eigenvalue
/// curves. Steps on which an eigenvalue changes sign are refined until its
/// movement is at most half its distance to the eigenvalues that keep
/// their sign.
pub fn sfl_tracking(path: &OperatorPath, opts: &SflOptions) -> Result<SflResult> {
    let grid = uniform(path.t0(), path.t1(), opts.samples + 1);
    let mut tracker = Tracker {
        cache: SpectrumCache::new(path, opts.eps0),
        opts,
        min_step: path.len() * 2f64.powi(-(opts.max_depth as i32 + 6)),
        events: Vec::new(),
        steps: 0,
    };
    tracker.cache.get_many(&grid);
    let mut value = 0;
    for w in grid.windows(2) {
        value += tracker.step(w[0], w[1], 0)?;
    }
    Ok(SflResult {
        value,
        method: Method::Tracking,
        diagnostics: Diagnostics { eps0: opts.eps0, evaluations: tracker.cache.evaluations(), notes: Vec::new() },
        certificate: Certificate::Tracking(TrackingCertificate { steps: tracker.steps, events: tracker.events }),
    })
}

/// `m^-(A(t0)) - m^-(A(t1))`; both endpoints must be invertible.
pub fn sfl_morse_oracle(path: &OperatorPath, opts: &SflOptions) -> Result<SflResult> {
    let mut inertia = Vec::with_capacity(2);
    for (t, op) in [(path.t0(), path.start()), (path.t1(), path.end())] {
        let tolerance = opts.eps0 * op.scale();
        let min_abs = op.min_abs_eigenvalue();
        if min_abs <= tolerance {
            return Err(SpecFlowError::DegenerateEndpoint { t, min_abs, tolerance });
        }
        inertia.push((op.negative_count(tolerance), min_abs));
    }
    let cert = MorseCertificate {
        negative_start: inertia[0].0,
        negative_end: inertia[1].0,
        min_abs_start: inertia[0].1,
        min_abs_end: inertia[1].1,
    };
    Ok(SflResult {
        value: cert.negative_start as i64 - cert.negative_end as i64,
        method: Method::Morse,
        diagnostics: Diagnostics { eps0: opts.eps0, evaluations: 2, notes: Vec::new() },
        certificate: Certificate::Morse(cert),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyVerdict {
    pub s_values: Vec<f64>,
    pub sfl_values: Vec<i64>,
    pub pass: bool,
}

/// Evaluates `sfl(h(s, .))` on a uniform `s` grid over `s_range` and
/// passes iff all values agree. `h(s, t0)` and `h(s, t1)` must be
/// invertible for every sampled `s`.
pub fn homotopy_invariance_check<F>(
    h: F,
    s_range: (f64, f64),
    s_count: usize,
    t_range: (f64, f64),
    opts: &SflOptions,
) -> Result<HomotopyVerdict>
where
    F: Fn(f64, f64) -> HermitianOperator + Send + Sync + Clone + 'static,
{
    let s_values = uniform(s_range.0, s_range.1, s_count.max(2));
    let mut sfl_values = Vec::with_capacity(s_values.len());
    for &s in &s_values {
        for t in [t_range.0, t_range.1] {
            let op = h(s, t);
            if op.min_abs_eigenvalue() <= opts.eps0 * op.scale() {
                return Err(SpecFlowError::BoundaryDegenerate { s, t });
            }
        }
        let hs = h.clone();
        let path = OperatorPath::new(t_range.0, t_range.1, move |t| hs(s, t))?;
        sfl_values.push(sfl_partition(&path, opts)?.value);
    }
    let pass = sfl_values.windows(2).all(|w| w[0] == w[1]);
    Ok(HomotopyVerdict { s_values, sfl_values, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(f: fn(f64) -> f64) -> OperatorPath {
        OperatorPath::new(0.0, 1.0, move |t| HermitianOperator::from_diag(&[f(t)])).unwrap()
    }

    #[test]
    fn one_by_one_paths() {
        let opts = SflOptions::default();
        for (f, expected) in [(|t| t - 0.5, 1), (|t| t, 0), (|t: f64| -t, -1)] as [(fn(f64) -> f64, i64); 3] {
            let p = scalar(f);
            assert_eq!(sfl_partition(&p, &opts).unwrap().value, expected);
            assert_eq!(sfl_tracking(&p, &opts).unwrap().value, expected);
        }
    }

    #[test]
    fn constant_invertible_path() {
        let p = OperatorPath::constant(HermitianOperator::from_diag(&[-2.0, 1.0, 3.0]), 0.0, 1.0).unwrap();
        let opts = SflOptions::default();
        assert_eq!(sfl_partition(&p, &opts).unwrap().value, 0);
        assert_eq!(sfl_tracking(&p, &opts).unwrap().value, 0);
        assert_eq!(sfl_morse_oracle(&p, &opts).unwrap().value, 0);
    }

    #[test]
    fn morse_rejects_kernel_at_endpoint() {
        let p = scalar(|t| t);
        assert!(matches!(sfl_morse_oracle(&p, &SflOptions::default()), Err(SpecFlowError::DegenerateEndpoint { .. })));
        let q = scalar(|t| 2.0 * t - 1.0);
        assert_eq!(sfl_morse_oracle(&q, &SflOptions::default()).unwrap().value, 1);
    }

    #[test]
    fn certificate_reverifies_and_detects_tampering() {
        let p = scalar(|t| t - 0.5);
        let res = sfl_partition(&p, &SflOptions::default()).unwrap();
        let Certificate::Partition(cert) = res.certificate else { panic!("wrong certificate") };
        assert!(cert.verify(&p, 4).unwrap() > 0.0);
        assert_eq!(cert.instants().first(), Some(&0.0));
        assert_eq!(cert.instants().last(), Some(&1.0));

        let mut bad = cert.clone();
        let i = bad.pieces.iter().position(|pc| pc.t_start <= 0.5 && 0.5 <= pc.t_end).unwrap();
        // A window edge through the crossing eigenvalue's range.
        bad.pieces[i].radius = 1e-4;
        assert!(matches!(bad.verify(&p, 4), Err(SpecFlowError::CertificateInvalid(_))));
    }

    #[test]
    fn discontinuous_path_is_refused() {
        let p = OperatorPath::new(0.0, 1.0, |t| HermitianOperator::from_diag(&[if t < 0.5 { -1.0 } else { 1.0 }])).unwrap();
        assert!(matches!(sfl_partition(&p, &SflOptions::default()), Err(SpecFlowError::NotContinuous { .. })));
    }

    #[test]
    fn homotopy_boundary_must_be_invertible() {
        let h = |s: f64, t: f64| HermitianOperator::from_diag(&[t - s]);
        let err = homotopy_invariance_check(h, (0.0, 1.0), 3, (0.0, 1.0), &SflOptions::default()).unwrap_err();
        assert!(matches!(err, SpecFlowError::BoundaryDegenerate { .. }));
    }
}
