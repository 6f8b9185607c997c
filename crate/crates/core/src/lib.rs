//! Spectral flow of paths of Hermitian matrices.
//!
//! The crate computes the spectral flow of a continuous path `t -> A(t)` of
//! Hermitian matrices four ways (an explicit partition of the parameter
//! interval, sorted-eigenvalue tracking, crossing forms, and endpoint Morse
//! indices) together with the operator machinery they rest on: Cayley
//! transforms and the gap metric, resolvents, and contour-integral spectral
//! projections.
//!
//! ```
//! use specflow_core::{gallery, sfl_partition, SflOptions};
//! use std::f64::consts::PI;
//!
//! let path = gallery::twisted_fourier_path(3, -PI, PI).unwrap();
//! assert_eq!(sfl_partition(&path, &SflOptions::default()).unwrap().value, 1);
//! ```

pub mod crossing;
pub mod descriptor;
pub mod eigen;
pub mod error;
pub mod gallery;
pub mod linalg;
pub mod metrics;
pub mod operator;
pub mod path;
pub mod projection;
pub mod specflow;

pub use crossing::{
    crossing_form, find_crossings, regularity_report, regularize, sfl_crossings, Crossing, CrossingLocation,
    CrossingOptions, Regularized, RegularityReport,
};
pub use descriptor::{to_json_string, MatrixLiteral, PathDescriptor};
pub use error::{Result, SpecFlowError};
pub use gallery::{Family, FamilyDescriptor, HomotopyFamily};
pub use linalg::{ComplexMatrix, C64};
pub use metrics::{cayley, delta_distance, gap_distance, inverse_cayley, norm_distance, resolvent, riesz_distance};
pub use operator::{EigenDecomposition, HermitianOperator, Spectrum, UnitaryMatrix};
pub use path::{concatenate, OperatorPath};
pub use projection::{contour_projection, eigen_projection, ContourDescriptor, SpectralProjection};
pub use specflow::{
    homotopy_invariance_check, sfl_morse_oracle, sfl_partition, sfl_tracking, Certificate, Diagnostics,
    HomotopyVerdict, Method, PartitionCertificate, SflOptions, SflResult,
};
