use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use super::maps::ShiftMap;
use super::ScMap;
use crate::circle;
use crate::linalg::sub;
use crate::linear::templates::fourier_block_diagonal;
use crate::linear::{Assembled, ScOperator};
use crate::scale::Extent;
use crate::{Result, ScError, TruncatedScale};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ShiftDichotomyRow {
    pub tau: f64,
    /// Coefficient count used for the horizontal gap.
    pub truncation: usize,
    /// `|DΨ(τ,v)ξ − DΨ(0,v)ξ|_m` for the fixed `ξ`.
    pub compact_open: f64,
    /// `‖τ_* − 1‖_{m→m}` at the truncation of this row.
    pub horizontal_gap: f64,
    /// `‖τ_* − 1‖_{m+1→m}` at the largest truncation.
    pub diagonal_gap: f64,
    /// `2πτ`.
    pub diagonal_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ShiftDichotomyReport {
    pub level: usize,
    pub max_truncation: usize,
    pub rows: Vec<ShiftDichotomyRow>,
    /// Residuals are nonincreasing and the last one is at most twice the
    /// first scaled by `τ_last/τ_first`.
    pub compact_open_converges: bool,
    pub min_horizontal_gap: f64,
    /// Every diagonal gap is at most `(1 + slack)·2πτ`, `slack = 0.01`.
    pub diagonal_bounded: bool,
}

/// Number of coefficients needed to resolve frequency `⌈1/(2τ)⌉`.
pub fn resolving_truncation(tau: f64) -> usize {
    2 * (1.0 / (2.0 * tau)).ceil() as usize + 1
}

fn shift_difference(scale: &TruncatedScale, tau: f64) -> ScOperator {
    ScOperator::from_fn(
        format!("shift({tau}) − 1"),
        scale.clone(),
        scale.clone(),
        0,
        move |n| {
            Ok(Assembled::Blocks(fourier_block_diagonal(n, 0.0, |k| {
                let [[a, b], [c, d]] = circle::shift_block(k, tau);
                [[a - 1.0, b], [c, d - 1.0]]
            })))
        },
    )
}

/// Continuity of the derivative of the shift map `Ψ(τ, v) = v(· + τ)` in
/// the compact-open topology, its failure in the norm topology and norm
/// continuity of the diagonal map, along `τ_ν → 0`.
///
/// `v` and `ξ = (T, V)` are fixed points of `E` and `ℝ ⊕ E` at the same
/// truncation; the horizontal gap of row `ν` is measured at
/// [`resolving_truncation`]`(τ_ν)`, which must not exceed `max_truncation`.
pub fn shift_map_dichotomy(
    scale: &TruncatedScale,
    v: &[f64],
    xi: &[f64],
    m: usize,
    taus: &[f64],
    max_truncation: usize,
) -> Result<ShiftDichotomyReport> {
    let psi = ShiftMap::new(scale)?;
    if !matches!(scale.components(), [c] if c.extent == Extent::Truncated) {
        return Err(ScError::Precondition(
            "shift dichotomy needs a circle scale".into(),
        ));
    }
    scale.check_level(m + 1)?;
    let n = scale.truncation_of(v.len())?;
    if psi.domain().truncation_of(xi.len())? != n {
        return Err(ScError::Shape {
            expected: n + 1,
            found: xi.len(),
        });
    }
    let mut base = Vec::with_capacity(n + 1);
    base.push(0.0);
    base.extend_from_slice(v);
    let at_zero = psi.derivative(&base, xi).expect("analytic derivative")?;
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(ScError::Configuration(format!(
                "shift {tau} must be finite and nonnegative"
            )));
        }
        let truncation = if tau == 0.0 {
            1
        } else {
            resolving_truncation(tau)
        };
        if truncation > max_truncation {
            return Err(ScError::Configuration(format!(
                "τ = {tau} needs {truncation} coefficients, above the limit {max_truncation}"
            )));
        }
        base[0] = tau;
        let moved = psi.derivative(&base, xi).expect("analytic derivative")?;
        let compact_open = scale.level_norm(&sub(&moved, &at_zero), m)?;
        let diff = shift_difference(scale, tau);
        let horizontal_gap = diff.weighted(m, m, truncation)?.spectral_norm();
        let diagonal_gap = diff.weighted(m + 1, m, max_truncation)?.spectral_norm();
        rows.push(ShiftDichotomyRow {
            tau,
            truncation,
            compact_open,
            horizontal_gap,
            diagonal_gap,
            diagonal_bound: 2.0 * core::f64::consts::PI * tau,
        });
    }
    let positive: Vec<&ShiftDichotomyRow> = rows.iter().filter(|r| r.tau > 0.0).collect();
    let compact_open_converges = match (positive.first(), positive.last()) {
        (Some(first), Some(last)) => {
            positive
                .windows(2)
                .all(|w| w[1].compact_open <= w[0].compact_open)
                && last.compact_open <= 2.0 * first.compact_open * last.tau / first.tau
        }
        _ => true,
    };
    let min_horizontal_gap = positive
        .iter()
        .map(|r| r.horizontal_gap)
        .fold(f64::INFINITY, f64::min);
    let diagonal_bounded = rows
        .iter()
        .all(|r| r.diagonal_gap <= 1.01 * r.diagonal_bound);
    Ok(ShiftDichotomyReport {
        level: m,
        max_truncation,
        rows,
        compact_open_converges,
        min_horizontal_gap,
        diagonal_bounded,
    })
}
