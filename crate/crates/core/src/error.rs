use thiserror::Error;

pub type Result<T> = std::result::Result<T, SpecFlowError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFlowError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e}, tolerance {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("singular matrix in linear solve (pivot {pivot:e})")]
    Singular { pivot: f64 },

    #[error("spectral point: z is within {distance:e} of eigenvalue {nearest}")]
    SpectralPoint { nearest: f64, distance: f64 },

    #[error("radius exceeded: |z - z0| = {increment} but convergence radius is {radius}")]
    RadiusExceeded { increment: f64, radius: f64 },

    #[error("not in Cayley range: I - U has smallest singular value {smallest_singular:e}")]
    NotInCayleyRange { smallest_singular: f64 },

    #[error("endpoint in spectrum: eigenvalue {eigenvalue} lies within {tolerance:e} of window endpoint {endpoint}")]
    EndpointInSpectrum { eigenvalue: f64, endpoint: f64, tolerance: f64 },

    #[error("contour near spectrum: eigenvalue {eigenvalue} is {distance:e} from the contour (required {required:e})")]
    ContourNearSpectrum { eigenvalue: f64, distance: f64, required: f64 },

    #[error("quadrature stagnation at {nodes} nodes: last two iterates differ by {distance:e}")]
    QuadratureStagnation { nodes: usize, distance: f64 },

    #[error("path is not demonstrably continuous on [{t_lo}, {t_hi}]: gap distance {gap} exceeds budget {budget}")]
    NotContinuous { t_lo: f64, t_hi: f64, gap: f64, budget: f64 },

    #[error("partition failure: no admissible window on [{t_lo}, {t_hi}] at maximum depth")]
    PartitionFailure { t_lo: f64, t_hi: f64 },

    #[error("certificate invalid: {0}")]
    CertificateInvalid(String),

    #[error("degenerate endpoint at t = {t}: smallest |eigenvalue| {min_abs:e} <= {tolerance:e}")]
    DegenerateEndpoint { t: f64, min_abs: f64, tolerance: f64 },

    #[error("tracking ambiguity on [{t_lo}, {t_hi}]: step control cannot be satisfied")]
    TrackingAmbiguity { t_lo: f64, t_hi: f64 },

    #[error("endpoint mismatch when concatenating paths (max deviation {deviation:e})")]
    EndpointMismatch { deviation: f64 },

    #[error("boundary degenerate: homotopy at s = {s}, t = {t} is not invertible")]
    BoundaryDegenerate { s: f64, t: f64 },

    #[error("crossing cluster near t = {t}: crossings {separation:e} apart cannot be resolved; perturb the path")]
    CrossingCluster { t: f64, separation: f64 },

    #[error("derivative unavailable at t = {t}")]
    DerivativeUnavailable { t: f64 },

    #[error("irregular crossing at t = {t}: crossing form has {null} null direction(s); regularize the path")]
    IrregularCrossing { t: f64, null: usize },

    #[error("regularization failed: no admissible shift among {tried} candidates in (-{epsilon}, {epsilon})")]
    RegularizationFailed { tried: usize, epsilon: f64 },

    #[error("descriptor error: {0}")]
    Descriptor(String),
}
