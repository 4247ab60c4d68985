//! Scale calculus on finite, weighted coefficient spaces.
//!
//! `sclab-core` realizes sc-Banach spaces as weighted truncated coefficient
//! spaces and turns the scale axioms, sc-smoothness, sc-Fredholm theory and
//! the retract geometry built on top of them into finite numerical
//! certificates. Every infinite family of conditions is checked on a ladder
//! of truncations and a finite set of samples; reports carry the envelope
//! that was actually checked.
//!
//! The crate is `#![no_std]` and only needs `alloc`. File formats, the
//! experiment driver and the command line live in the `sclab` crate.
//!
//! # Layout
//!
//! * [`scale`] weight sequences, truncated scales, regularity estimation and
//!   the weighted grid scale on a line.
//! * [`linear`] sc-operators, projections, quotients and Fredholm
//!   certificates.
//! * [`diff`] nonlinear maps between scales and their sc⁰/sc¹/sc²
//!   certificates, tangent maps, the chain rule and the shift map.
//! * [`retract`] retractions, tangent retractions, Cartan charts and
//!   splicings.
//! * [`polyfold`] partial quadrants, degeneracy indices, charts and tameness.
//! * [`bundle`] double scales and strong bundle retractions.

#![no_std]
// `num_traits::Float` supplies float math on toolchains whose `core` lacks it;
// newer toolchains (and test builds, which link std) make it redundant
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bundle;
pub mod circle;
pub mod diff;
mod error;
pub mod linalg;
pub mod linear;
pub mod polyfold;
pub mod retract;
pub mod rng;
pub mod scale;
#[cfg(feature = "serde")]
mod serde_ext;

pub use error::{Result, ScError};
pub use scale::{GridLineScale, ScalePoint, TruncatedScale, WeightSequence};
