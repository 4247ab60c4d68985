//! Scale-linear theory: sc-operators assembled along a truncation ladder,
//! level-norm certificates, sc-projections, quotients and sc-Fredholm
//! certificates.

mod fredholm;
mod operator;
mod projection;
mod quotient;
mod sc_check;
pub mod templates;

pub use fredholm::{
    fredholm_certificate, perturbation_stability, FredholmCertificate, FredholmConfig, LevelKernel,
    RegularitySample, StabilityReport, StabilityTrial,
};
pub use operator::{Assembled, Assembler, BlockDiagonal, RankDecomposition, ScOperator};
pub use projection::{build_sc_projection, verify_projection, ProjectionReport, ScSubspace};
pub use quotient::{quotient_distance, quotient_inclusion_singular_values};
pub use sc_check::{
    check_sc, check_sc_plus_compactness, CompactnessReport, LevelNormRow, ScCheckReport,
    DEFAULT_STABILITY_TOL,
};
