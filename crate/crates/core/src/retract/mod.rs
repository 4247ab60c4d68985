//! Retractions `r = r∘r`, their tangent maps and fixed sets, Cartan's
//! linearizing chart and splicings.

mod cartan;
mod retraction;
mod splicing;

pub use cartan::{cartan_chart, CartanChart, CartanConfig};
pub(crate) use retraction::jacobian;
pub use retraction::{
    check_retract_map, check_retraction, tangent_retraction, tangent_space, RetractMapReport,
    RetractModel, TangentRetraction, TangentSpace, EIGEN_GAP, EIGEN_TOL,
};
pub use splicing::{
    build_pi_t, idempotency_residual, splicing_core_scan, t_min, JumpingSplicing, SplicingFamily,
    SplicingProjection, SplicingRetraction, SplicingScanRow,
};
