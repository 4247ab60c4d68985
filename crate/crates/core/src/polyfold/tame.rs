use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::quadrant::PartialQuadrant;
use crate::linalg::{self, sub, RankPolicy};
use crate::retract::{jacobian, RetractModel};
use crate::Result;

/// Default tolerance on complement components along active corners.
pub const TRANSVERSALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StratumViolation {
    pub sample: usize,
    pub point: Vec<f64>,
    pub image: Vec<f64>,
    pub index: usize,
    pub image_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TransversalityEntry {
    pub sample: usize,
    /// The fixed point `r(x)` the complement was taken at.
    pub point: Vec<f64>,
    pub active: Vec<usize>,
    pub complement_dimension: usize,
    /// Largest component of the complement basis along an active corner.
    pub residual: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TameReport {
    pub samples: usize,
    pub violations: Vec<StratumViolation>,
    pub transversality: Vec<TransversalityEntry>,
    pub tame: bool,
}

impl TameReport {
    pub fn first_violation(&self) -> Option<&StratumViolation> {
        self.violations.first()
    }
}

/// Sampled tameness of a retraction of `C = [0,∞)^n ⊕ W`:
///
/// (a) `d_C(r(x)) = d_C(x)` at every sample, and
/// (b) at `y = r(x)` the complement `(1 − dr(y))E` of `T_yO` lies in
///     `E_y = {e : e_i = 0 for every active corner i}`.
pub fn check_tame(
    model: &RetractModel,
    quadrant: &PartialQuadrant,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<TameReport> {
    let r = model.retraction();
    let mut violations = Vec::new();
    let mut transversality = Vec::new();
    for (i, x) in samples.iter().enumerate() {
        let y = r.eval(x)?;
        let (d, dy) = (
            quadrant.degeneracy_index(x)?,
            quadrant.degeneracy_index(&y)?,
        );
        if d != dy {
            violations.push(StratumViolation {
                sample: i,
                point: x.clone(),
                image: y.clone(),
                index: d,
                image_index: dy,
            });
        }
        let active = quadrant.active_corners(&y)?;
        if active.is_empty() {
            continue;
        }
        let jm = jacobian(&**r, &y)?;
        let n = y.len();
        let complement =
            linalg::column_space(&(DMatrix::identity(n, n) - jm), &RankPolicy::default())?;
        let residual = active
            .iter()
            .flat_map(|&a| {
                complement
                    .row(a)
                    .iter()
                    .map(|v| v.abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        transversality.push(TransversalityEntry {
            sample: i,
            point: y,
            active,
            complement_dimension: complement.ncols(),
            residual,
            ok: residual <= tol,
        });
    }
    let tame = violations.is_empty() && transversality.iter().all(|t| t.ok);
    Ok(TameReport {
        samples: samples.len(),
        violations,
        transversality,
        tame,
    })
}

/// `|r(x) − x|` at each sample, for locating fixed points in reports.
pub fn displacement(model: &RetractModel, samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|x| {
            Ok(linalg::euclidean_norm(&sub(
                &model.retraction().eval(x)?,
                x,
            )))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{OperatorMap, ScMap};
    use crate::linear::templates;
    use crate::retract::check_retraction;
    use crate::TruncatedScale;
    use alloc::sync::Arc;
    use alloc::vec;

    fn linear(m: &[f64]) -> RetractModel {
        let s = TruncatedScale::constant(2, 3);
        let r: Arc<dyn ScMap> = Arc::new(OperatorMap::new(
            templates::matrix(&s, &s, DMatrix::from_row_slice(2, 2, m)).unwrap(),
        ));
        check_retraction(r, &[vec![1.0, 0.0], vec![0.3, 2.0]], 1e-12).unwrap()
    }

    fn grid() -> Vec<Vec<f64>> {
        let vals = [0.0, 0.5, 1.0, 2.0];
        vals.iter()
            .flat_map(|&a| vals.iter().map(move |&b| vec![a, b]))
            .collect()
    }

    #[test]
    fn identity_is_tame() {
        let rep = check_tame(
            &linear(&[1.0, 0.0, 0.0, 1.0]),
            &PartialQuadrant::new(2),
            &grid(),
            TRANSVERSALITY_TOL,
        )
        .unwrap();
        assert!(rep.tame);
        assert!(rep
            .transversality
            .iter()
            .all(|t| t.complement_dimension == 0));
    }

    #[test]
    fn diagonal_projector_is_not_tame() {
        let rep = check_tame(
            &linear(&[0.5, 0.5, 0.5, 0.5]),
            &PartialQuadrant::new(2),
            &[vec![1.0, 0.0]],
            TRANSVERSALITY_TOL,
        )
        .unwrap();
        assert!(!rep.tame);
        let v = rep.first_violation().unwrap();
        assert_eq!((v.index, v.image_index), (1, 0));
        assert_eq!(v.point, vec![1.0, 0.0]);
    }

    #[test]
    fn axis_projector_depends_on_the_corner_structure() {
        let p = linear(&[1.0, 0.0, 0.0, 0.0]);
        let axis: Vec<Vec<f64>> = [0.0, 0.5, 2.0].iter().map(|&a| vec![a, 0.0]).collect();
        // on [0,∞) × ℝ the second coordinate carries no corner
        let half_plane =
            check_tame(&p, &PartialQuadrant::new(1), &grid(), TRANSVERSALITY_TOL).unwrap();
        assert!(half_plane.tame, "{half_plane:?}");
        // on [0,∞)² the complement e₂ points along the active corner y = 0
        let quadrant = check_tame(&p, &PartialQuadrant::new(2), &axis, TRANSVERSALITY_TOL).unwrap();
        assert!(quadrant.violations.is_empty());
        assert!(!quadrant.tame);
        assert!(quadrant
            .transversality
            .iter()
            .all(|t| t.active.contains(&1) && !t.ok));
    }
}
