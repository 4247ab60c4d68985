use alloc::vec::Vec;

use crate::diff::ScMap;
use crate::linalg::{euclidean_norm, sub};
use crate::{Result, ScError};

/// Default tolerance below which a corner coordinate counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// `C = [0,∞)^n ⊕ W` in coordinates: the first `n` entries of a point are
/// corner coordinates, the rest lie in `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartialQuadrant {
    pub corners: usize,
    pub zero_tol: f64,
}

impl PartialQuadrant {
    pub fn new(corners: usize) -> Self {
        Self {
            corners,
            zero_tol: ZERO_TOL,
        }
    }

    pub fn with_zero_tol(mut self, zero_tol: f64) -> Self {
        self.zero_tol = zero_tol;
        self
    }

    /// Membership up to `zero_tol`.
    pub fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() < self.corners {
            return Err(ScError::Shape {
                expected: self.corners,
                found: p.len(),
            });
        }
        match p[..self.corners]
            .iter()
            .position(|&a| a < -self.zero_tol || a.is_nan())
        {
            Some(i) => Err(ScError::NotInQuadrant {
                coordinate: i,
                value: p[i],
            }),
            None => Ok(()),
        }
    }

    /// Corner coordinates that vanish at `p`.
    pub fn active_corners(&self, p: &[f64]) -> Result<Vec<usize>> {
        self.check(p)?;
        Ok((0..self.corners)
            .filter(|&i| p[i] < self.zero_tol)
            .collect())
    }

    /// `d_C(p)`: the number of vanishing corner coordinates.
    pub fn degeneracy_index(&self, p: &[f64]) -> Result<usize> {
        Ok(self.active_corners(p)?.len())
    }
}

/// `d_C(p)` for `C = [0,∞)^n ⊕ W`.
pub fn degeneracy_index(quadrant: &PartialQuadrant, p: &[f64]) -> Result<usize> {
    quadrant.degeneracy_index(p)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InvarianceRow {
    pub sample: usize,
    pub index: usize,
    pub image_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InvarianceReport {
    pub rows: Vec<InvarianceRow>,
    pub max_inverse_residual: f64,
    pub invariant: bool,
}

/// Checks `d_C(x) = d_D(f(x))` for a diffeomorphism `f` of quadrants given
/// with its inverse. An inverse residual `|f⁻¹(f(x)) − x|` above `tol`
/// raises [`ScError::NotADiffeo`].
pub fn verify_diffeo_invariance(
    f: &dyn ScMap,
    f_inv: &dyn ScMap,
    source: &PartialQuadrant,
    target: &PartialQuadrant,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<InvarianceReport> {
    let mut rows = Vec::with_capacity(samples.len());
    let mut max_inverse_residual = 0.0f64;
    for (i, x) in samples.iter().enumerate() {
        let y = f.eval(x)?;
        let back = f_inv.eval(&y)?;
        let residual = euclidean_norm(&sub(&back, x));
        if residual > tol || residual.is_nan() {
            return Err(ScError::NotADiffeo {
                residual,
                sample: i,
            });
        }
        max_inverse_residual = max_inverse_residual.max(residual);
        rows.push(InvarianceRow {
            sample: i,
            index: source.degeneracy_index(x)?,
            image_index: target.degeneracy_index(&y)?,
        });
    }
    let invariant = rows.iter().all(|r| r.index == r.image_index);
    Ok(InvarianceReport {
        rows,
        max_inverse_residual,
        invariant,
    })
}
