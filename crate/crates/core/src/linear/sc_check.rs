use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::operator::ScOperator;
use crate::{Result, ScError};

/// Largest allowed ratio between the level norms at the two largest
/// truncations for a norm to count as stabilized.
pub const DEFAULT_STABILITY_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LevelNormRow {
    pub from_level: usize,
    pub to_level: usize,
    /// `(N, ‖T‖_{m→m'})` along the ladder.
    pub norms: Vec<(usize, f64)>,
    pub ratio: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScCheckReport {
    pub operator: String,
    pub declared_shift: usize,
    pub rows: Vec<LevelNormRow>,
    pub accepted: bool,
}

fn ladder_for(op: &ScOperator) -> Vec<usize> {
    if op.domain().has_truncated() {
        op.domain().ladder().to_vec()
    } else {
        op.target().ladder().to_vec()
    }
}

/// Checks that every level operator `m → m + shift` is bounded uniformly
/// along the ladder.
pub fn check_sc(op: &ScOperator, tol: f64) -> Result<ScCheckReport> {
    let ladder = ladder_for(op);
    let truncated = op.domain().has_truncated() || op.target().has_truncated();
    if truncated && ladder.len() < 3 {
        return Err(ScError::Precondition(format!(
            "ladder of length {} < 3",
            ladder.len()
        )));
    }
    let shift = op.declared_shift();
    let top = op
        .domain()
        .max_level()
        .min(op.target().max_level().saturating_sub(shift));
    if op.target().max_level() < shift {
        return Err(ScError::Precondition(
            "target has no level to shift into".into(),
        ));
    }
    let mut rows = Vec::with_capacity(top + 1);
    for m in 0..=top {
        let mut norms = Vec::with_capacity(ladder.len());
        for &n in &ladder {
            norms.push((n, op.level_operator_norm(m, m + shift, n)?));
        }
        let ratio = match norms.as_slice() {
            [.., (_, a), (_, b)] if *a > 0.0 => b / a,
            [.., (_, a), (_, b)] if *a == 0.0 && *b == 0.0 => 1.0,
            [_] => 1.0,
            _ => f64::INFINITY,
        };
        let stable =
            ratio.is_finite() && ratio <= 1.0 + tol && norms.iter().all(|(_, v)| v.is_finite());
        rows.push(LevelNormRow {
            from_level: m,
            to_level: m + shift,
            norms,
            ratio,
            stable,
        });
    }
    let accepted = rows.iter().all(|r| r.stable);
    Ok(ScCheckReport {
        operator: op.name().into(),
        declared_shift: shift,
        rows,
        accepted,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CompactnessReport {
    pub level: usize,
    pub truncation: usize,
    /// Singular values of the level-`m` operator, decreasing.
    pub singular_values: Vec<f64>,
    /// `‖S‖_{m→m+1}` at this truncation.
    pub plus_norm: f64,
    /// Largest `σ_k / (s_k · ‖S‖_{m→m+1})` with `s_k` the singular values
    /// of the target inclusion.
    pub worst_ratio: f64,
    pub bound_holds: bool,
}

/// Singular values of the level-`m` operator of an sc⁺ candidate, checked
/// against `σ_k ≤ s_k ‖S‖_{m→m+1}` where `s_k` are the singular values of
/// the inclusion `F_{m+1} → F_m`.
pub fn check_sc_plus_compactness(op: &ScOperator, m: usize, n: usize) -> Result<CompactnessReport> {
    let sv = op.weighted(m, m, n)?.singular_values();
    let plus_norm = op.level_operator_norm(m, m + 1, n)?;
    let inclusion = if op.target().has_truncated() {
        op.target().inclusion_singular_values(m, n)?
    } else {
        alloc::vec![1.0; op.target().dim(n)]
    };
    let mut worst: f64 = 0.0;
    for (s, i) in sv.iter().zip(&inclusion) {
        let bound = i * plus_norm;
        if *s > 0.0 {
            worst = worst.max(if bound > 0.0 {
                s / bound
            } else {
                f64::INFINITY
            });
        }
    }
    Ok(CompactnessReport {
        level: m,
        truncation: n,
        singular_values: sv,
        plus_norm,
        worst_ratio: worst,
        bound_holds: worst <= 1.0 + 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::templates;
    use crate::{TruncatedScale, WeightSequence};
    use alloc::vec;

    fn circle() -> TruncatedScale {
        TruncatedScale::new(WeightSequence::sobolev_circle(), vec![64, 128, 256], 3).unwrap()
    }

    #[test]
    fn shift_multiplier_is_sc() {
        let r = check_sc(
            &templates::shift_multiplier(&circle(), 0.137).unwrap(),
            DEFAULT_STABILITY_TOL,
        )
        .unwrap();
        assert!(r.accepted);
        for row in &r.rows {
            for (_, v) in &row.norms {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weight_multiplier_is_rejected() {
        let r = check_sc(
            &templates::weight_power(&circle(), 1, 0),
            DEFAULT_STABILITY_TOL,
        )
        .unwrap();
        assert!(!r.accepted);
        assert!(r.rows.iter().all(|row| row.ratio > 1.9));
    }

    #[test]
    fn inverse_weight_is_sc_plus() {
        let r = check_sc(
            &templates::weight_power(&circle(), -1, 1),
            DEFAULT_STABILITY_TOL,
        )
        .unwrap();
        assert!(r.accepted);
        assert_eq!(r.rows.len(), 3);
    }

    #[test]
    fn short_ladder_is_a_precondition_error() {
        let s = TruncatedScale::new(WeightSequence::sobolev_circle(), vec![16, 32], 2).unwrap();
        assert!(matches!(
            check_sc(&templates::identity(&s), 0.05),
            Err(ScError::Precondition(_))
        ));
    }

    #[test]
    fn inverse_weight_compactness() {
        let s = circle();
        let r = check_sc_plus_compactness(&templates::weight_power(&s, -1, 1), 1, 64).unwrap();
        let mut w: Vec<f64> = (0..64)
            .map(|n| 1.0 / s.components()[0].weights.weight(n))
            .collect();
        w.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in r.singular_values.iter().zip(&w) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(r.bound_holds);
    }
}
