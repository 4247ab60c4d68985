//! Partial quadrants, degeneracy index, tameness and atlases.
//!
//! A point of `C = [0,∞)^n ⊕ W` is a plain coordinate vector whose first
//! `n` entries are the corner coordinates.

mod charts;
mod quadrant;
mod tame;

pub use charts::{
    chart_degeneracy, check_atlas, half_line_chart, la_chart, min_degeneracy, AtlasPair,
    AtlasReport, Chart,
};
pub use quadrant::{
    degeneracy_index, verify_diffeo_invariance, InvarianceReport, InvarianceRow, PartialQuadrant,
    ZERO_TOL,
};
pub use tame::{
    check_tame, displacement, StratumViolation, TameReport, TransversalityEntry, TRANSVERSALITY_TOL,
};
