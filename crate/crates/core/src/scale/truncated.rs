use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::regularity::{self, RegularityConfig, RegularityEstimate};
use super::weights::WeightSequence;
use crate::{Result, ScError};

/// Length of a scale component: a fixed finite-dimensional block or a block
/// cut at the current ladder truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Extent {
    Fixed(usize),
    Truncated,
}

/// One summand of a (direct sum) scale. `shift = k` realizes the shifted
/// scale `E^k` with levels `E^k_m = E_{m+k}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Component {
    pub weights: WeightSequence,
    pub shift: usize,
    pub extent: Extent,
}

impl Component {
    fn len(&self, n: usize) -> usize {
        match self.extent {
            Extent::Fixed(d) => d,
            Extent::Truncated => n,
        }
    }
}

/// A Banach scale realized on truncated coefficient vectors.
///
/// Coefficient vectors are the concatenation of the components; truncated
/// components all have length `N`, the current rung of the ladder. The
/// level-`m` norm is `(Σ w_n^{2(m+shift)} x_n²)^{1/2}` summed over
/// components.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TruncatedScale {
    components: Vec<Component>,
    ladder: Vec<usize>,
    max_level: usize,
}

fn validate_ladder(ladder: &[usize]) -> Result<()> {
    if ladder.is_empty() {
        return Err(ScError::InvalidScale("empty truncation ladder".into()));
    }
    if ladder[0] == 0 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScError::InvalidScale(format!(
            "ladder must be strictly increasing positive integers, got {ladder:?}"
        )));
    }
    Ok(())
}

impl TruncatedScale {
    pub fn new(weights: WeightSequence, ladder: Vec<usize>, max_level: usize) -> Result<Self> {
        validate_ladder(&ladder)?;
        Ok(Self {
            components: vec![Component {
                weights,
                shift: 0,
                extent: Extent::Truncated,
            }],
            ladder,
            max_level,
        })
    }

    /// Constant scale on `ℝ^dim`: every level is `ℝ^dim` with the Euclidean
    /// norm.
    pub fn constant(dim: usize, max_level: usize) -> Self {
        Self {
            components: vec![Component {
                weights: WeightSequence::constant(),
                shift: 0,
                extent: Extent::Fixed(dim),
            }],
            ladder: vec![dim.max(1)],
            max_level,
        }
    }

    /// Builds a scale from explicit components.
    pub fn from_components(
        components: Vec<Component>,
        ladder: Vec<usize>,
        max_level: usize,
    ) -> Result<Self> {
        validate_ladder(&ladder)?;
        if components.is_empty() {
            return Err(ScError::InvalidScale("scale without components".into()));
        }
        Ok(Self {
            components,
            ladder,
            max_level,
        })
    }

    /// `ℝ^d ⊕ E`.
    pub fn with_prefix(&self, d: usize) -> Self {
        let mut components = vec![Component {
            weights: WeightSequence::constant(),
            shift: 0,
            extent: Extent::Fixed(d),
        }];
        components.extend(self.components.iter().cloned());
        Self {
            components,
            ladder: self.ladder.clone(),
            max_level: self.max_level,
        }
    }

    /// `E ⊕ F`, keeping the ladder of whichever summand is truncated.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        let ladder = if self.has_truncated() || !other.has_truncated() {
            self.ladder.clone()
        } else {
            other.ladder.clone()
        };
        Self {
            components,
            ladder,
            max_level: self.max_level.min(other.max_level),
        }
    }

    /// The shifted scale `E^k`. Its top level is `max_level − k`.
    pub fn shifted(&self, k: usize) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            c.shift += k;
        }
        out.max_level = self.max_level.saturating_sub(k);
        out
    }

    pub fn with_max_level(mut self, max_level: usize) -> Self {
        self.max_level = max_level;
        self
    }

    pub fn with_ladder(mut self, ladder: Vec<usize>) -> Result<Self> {
        validate_ladder(&ladder)?;
        self.ladder = ladder;
        Ok(self)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn ladder(&self) -> &[usize] {
        &self.ladder
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn largest_truncation(&self) -> usize {
        *self.ladder.last().expect("ladder is nonempty")
    }

    pub fn has_truncated(&self) -> bool {
        self.components
            .iter()
            .any(|c| c.extent == Extent::Truncated)
    }

    pub fn check_on_ladder(&self, n: usize) -> Result<()> {
        if !self.has_truncated() || self.ladder.contains(&n) {
            Ok(())
        } else {
            Err(ScError::NotOnLadder(n))
        }
    }

    pub fn check_level(&self, m: usize) -> Result<()> {
        if m > self.max_level {
            Err(ScError::LevelOutOfRange {
                level: m,
                max: self.max_level,
            })
        } else {
            Ok(())
        }
    }

    /// Total coefficient count at truncation `n`.
    pub fn dim(&self, n: usize) -> usize {
        self.components.iter().map(|c| c.len(n)).sum()
    }

    /// Recovers the truncation `N` from a coefficient vector length.
    pub fn truncation_of(&self, len: usize) -> Result<usize> {
        let fixed: usize = self
            .components
            .iter()
            .map(|c| match c.extent {
                Extent::Fixed(d) => d,
                Extent::Truncated => 0,
            })
            .sum();
        let count = self
            .components
            .iter()
            .filter(|c| c.extent == Extent::Truncated)
            .count();
        if count == 0 {
            return if len == fixed {
                Ok(0)
            } else {
                Err(ScError::Shape {
                    expected: fixed,
                    found: len,
                })
            };
        }
        if len < fixed || (len - fixed) % count != 0 {
            return Err(ScError::Shape {
                expected: fixed + count * self.largest_truncation(),
                found: len,
            });
        }
        Ok((len - fixed) / count)
    }

    /// Splits a coefficient vector into component slices.
    pub fn split<'a>(&self, x: &'a [f64]) -> Result<Vec<&'a [f64]>> {
        let n = self.truncation_of(x.len())?;
        let mut out = Vec::with_capacity(self.components.len());
        let mut start = 0;
        for c in &self.components {
            let len = c.len(n);
            out.push(&x[start..start + len]);
            start += len;
        }
        Ok(out)
    }

    /// Diagonal of the level-`m` norm: `w_n^{m+shift}` per coefficient.
    pub fn level_weights(&self, m: i32, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim(n));
        for c in &self.components {
            let power = m + c.shift as i32;
            for i in 0..c.len(n) {
                out.push(c.weights.weight(i).powi(power));
            }
        }
        out
    }

    /// `w_n^{-(m+shift)}`, the inverse of [`Self::level_weights`].
    pub fn inverse_level_weights(&self, m: usize, n: usize) -> Vec<f64> {
        self.level_weights(m as i32, n)
            .iter()
            .map(|w| 1.0 / w)
            .collect()
    }

    /// Unshifted weight `w_n` of every coefficient (1 on constant blocks).
    pub fn weights_vector(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim(n));
        for c in &self.components {
            out.extend((0..c.len(n)).map(|i| c.weights.weight(i)));
        }
        out
    }

    /// `|x|_m`.
    pub fn level_norm(&self, x: &[f64], m: usize) -> Result<f64> {
        self.check_level(m)?;
        let n = self.truncation_of(x.len())?;
        Ok(self.level_norm_unchecked(x, m as i32, n))
    }

    pub(crate) fn level_norm_unchecked(&self, x: &[f64], m: i32, n: usize) -> f64 {
        let w = self.level_weights(m, n);
        x.iter()
            .zip(&w)
            .map(|(v, w)| (v * w) * (v * w))
            .sum::<f64>()
            .sqrt()
    }

    /// Singular values of the inclusion `E_{m+1} → E_m` at truncation `n`,
    /// sorted decreasingly; they are the inverse weights.
    pub fn inclusion_singular_values(&self, m: usize, n: usize) -> Result<Vec<f64>> {
        self.check_level(m + 1)?;
        self.check_on_ladder(n)?;
        let mut sv = Vec::with_capacity(self.dim(n));
        for c in &self.components {
            for i in 0..c.len(n) {
                sv.push(1.0 / c.weights.weight(i));
            }
        }
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    /// `|x − P_K x|_m` where `P_K` keeps the first `k` coefficients of every
    /// truncated component.
    pub fn density_residual(&self, x: &[f64], m: usize, k: usize) -> Result<f64> {
        self.check_level(m)?;
        let n = self.truncation_of(x.len())?;
        if k > n {
            return Err(ScError::Precondition(format!(
                "cutoff {k} exceeds truncation {n}"
            )));
        }
        let mut sum = 0.0;
        for (c, part) in self.components.iter().zip(self.split(x)?) {
            if c.extent == Extent::Truncated {
                let power = m as i32 + c.shift as i32;
                for (i, v) in part.iter().enumerate().skip(k) {
                    let w = c.weights.weight(i).powi(power);
                    sum += (v * w) * (v * w);
                }
            }
        }
        Ok(sum.sqrt())
    }

    /// Re-truncates `x` to `n`: truncated components are cut or zero-padded.
    pub fn restrict(&self, x: &[f64], n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dim(n));
        for (c, part) in self.components.iter().zip(self.split(x)?) {
            match c.extent {
                Extent::Fixed(_) => out.extend_from_slice(part),
                Extent::Truncated => {
                    let keep = n.min(part.len());
                    out.extend_from_slice(&part[..keep]);
                    out.extend(core::iter::repeat(0.0).take(n - keep));
                }
            }
        }
        Ok(out)
    }

    /// Estimated regularity level `m̂` of `x` relative to this scale: the
    /// minimum over truncated components, `+∞` for smooth points.
    pub fn estimate_regularity(
        &self,
        x: &[f64],
        config: &RegularityConfig,
    ) -> Result<RegularityEstimate> {
        let mut best = RegularityEstimate::smooth(false);
        let mut all_degenerate = true;
        let mut any_truncated = false;
        for (c, part) in self.components.iter().zip(self.split(x)?) {
            if c.extent != Extent::Truncated {
                continue;
            }
            any_truncated = true;
            let est = regularity::estimate_component(part, &c.weights, config)?;
            all_degenerate &= est.degenerate;
            let level = est.level - c.shift as f64;
            if level < best.level {
                best = RegularityEstimate { level, ..est };
            }
        }
        if any_truncated && all_degenerate {
            best.degenerate = true;
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::weights::circle_frequency;

    fn circle(ladder: Vec<usize>) -> TruncatedScale {
        TruncatedScale::new(WeightSequence::sobolev_circle(), ladder, 4).unwrap()
    }

    #[test]
    fn unit_vector_has_unit_norm_at_every_level() {
        let s = circle(vec![8, 16]);
        let mut x = vec![0.0; 16];
        x[0] = 1.0;
        for m in 0..=4 {
            assert_eq!(s.level_norm(&x, m).unwrap(), 1.0);
        }
        assert_eq!(s.level_norm(&[0.0; 16], 3).unwrap(), 0.0);
    }

    #[test]
    fn level_norm_matches_direct_sum() {
        let s = circle(vec![64]);
        let w: Vec<f64> = (0..64)
            .map(|n| (1.0 + (circle_frequency(n) as f64).powi(2)).sqrt())
            .collect();
        let x: Vec<f64> = w.iter().map(|w| w.powi(-2)).collect();
        // oracle: Σ w^2 w^-4 = Σ w^-2
        let mut oracle = 0.0;
        for wn in &w {
            oracle += 1.0 / (wn * wn);
        }
        let got = s.level_norm(&x, 1).unwrap();
        assert!((got - oracle.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn level_out_of_range() {
        let s = circle(vec![8]);
        assert_eq!(
            s.level_norm(&[0.0; 8], 5),
            Err(ScError::LevelOutOfRange { level: 5, max: 4 })
        );
    }

    #[test]
    fn inclusion_singular_values_small_circle() {
        let s = circle(vec![4]);
        let sv = s.inclusion_singular_values(0, 4).unwrap();
        let expected = [1.0, 0.5f64.sqrt(), 0.5f64.sqrt(), 0.2f64.sqrt()];
        for (a, b) in sv.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(
            s.inclusion_singular_values(0, 5),
            Err(ScError::NotOnLadder(5))
        );
    }

    #[test]
    fn fractal_inclusion_singular_values() {
        let s = TruncatedScale::new(WeightSequence::fractal(2.0).unwrap(), vec![10], 2).unwrap();
        let sv = s.inclusion_singular_values(1, 10).unwrap();
        for (i, v) in sv.iter().enumerate() {
            let nu = (i + 1) as f64;
            assert!((v - 1.0 / (nu * nu)).abs() < 1e-15);
        }
    }

    #[test]
    fn density_residual_tail_sum() {
        let s = circle(vec![32]);
        let m = 1;
        let x: Vec<f64> = (0..32)
            .map(|n| s.components()[0].weights.weight(n).powi(-(m + 1)))
            .collect();
        for k in [0, 5, 17, 31, 32] {
            let mut tail = 0.0;
            for n in k..32 {
                tail += s.components()[0].weights.weight(n).powi(-2);
            }
            let got = s.density_residual(&x, m as usize, k).unwrap();
            assert!((got - tail.sqrt()).abs() < 1e-14, "k={k}");
        }
        let mut head = vec![0.0; 32];
        head[..4].copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.density_residual(&head, 2, 4).unwrap(), 0.0);
    }

    #[test]
    fn prefix_and_shift_bookkeeping() {
        let s = circle(vec![8, 16]).with_prefix(1);
        assert_eq!(s.dim(8), 9);
        assert_eq!(s.truncation_of(17).unwrap(), 16);
        let tu = circle(vec![8]).shifted(1).direct_sum(&circle(vec![8]));
        assert_eq!(tu.dim(8), 16);
        let w = tu.level_weights(0, 8);
        assert_eq!(w[3], 5.0f64.sqrt());
        assert_eq!(w[8 + 3], 1.0);
    }

    #[test]
    fn restrict_pads_and_cuts() {
        let s = circle(vec![4, 8]).with_prefix(1);
        let x = [9.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(s.restrict(&x, 2).unwrap(), vec![9.0, 1.0, 2.0]);
        assert_eq!(
            s.restrict(&x, 6).unwrap(),
            vec![9.0, 1.0, 2.0, 3.0, 4.0, 0.0, 0.0]
        );
    }
}
