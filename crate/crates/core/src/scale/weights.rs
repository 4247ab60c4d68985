use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::{Result, ScError};

/// Family of a weight sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WeightKind {
    /// `w_n = (1 + freq(n)²)^{1/2}` in the real Fourier basis of the circle.
    SobolevCircle,
    /// `w_n = ν^p` with `ν = n + 1`; parameter `[p]`.
    Fractal,
    /// `w_n = e^{κ n}`; parameter `[κ]`.
    GridExponential,
    /// `w_n = 1`: the constant scale on a finite-dimensional space.
    Constant,
}

/// Real Fourier frequency of basis index `n`: 0 for the constant mode,
/// `k` for the cosine at `2k−1` and the sine at `2k`.
pub fn circle_frequency(n: usize) -> usize {
    n.div_ceil(2)
}

/// Monotone weight sequence `n ↦ w_n ≥ 1`. The level-`m` norm of a
/// coefficient vector is `(Σ w_n^{2m} x_n²)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightSequence {
    kind: WeightKind,
    params: Vec<f64>,
}

impl WeightSequence {
    pub fn new(kind: WeightKind, params: Vec<f64>) -> Result<Self> {
        match kind {
            WeightKind::SobolevCircle | WeightKind::Constant => {}
            WeightKind::Fractal => match params.as_slice() {
                [p] if *p > 0.0 && p.is_finite() => {}
                _ => {
                    return Err(ScError::InvalidScale(format!(
                        "fractal weights need one positive exponent, got {params:?}"
                    )))
                }
            },
            WeightKind::GridExponential => match params.as_slice() {
                [k] if *k > 0.0 && k.is_finite() => {}
                _ => {
                    return Err(ScError::InvalidScale(format!(
                        "exponential weights need one positive rate, got {params:?}"
                    )))
                }
            },
        }
        Ok(Self { kind, params })
    }

    pub fn sobolev_circle() -> Self {
        Self {
            kind: WeightKind::SobolevCircle,
            params: Vec::new(),
        }
    }

    pub fn fractal(exponent: f64) -> Result<Self> {
        Self::new(WeightKind::Fractal, vec![exponent])
    }

    pub fn grid_exponential(rate: f64) -> Result<Self> {
        Self::new(WeightKind::GridExponential, vec![rate])
    }

    pub fn constant() -> Self {
        Self {
            kind: WeightKind::Constant,
            params: Vec::new(),
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn weight(&self, n: usize) -> f64 {
        match self.kind {
            WeightKind::SobolevCircle => {
                let k = circle_frequency(n) as f64;
                (1.0 + k * k).sqrt()
            }
            WeightKind::Fractal => ((n + 1) as f64).powf(self.params[0]),
            WeightKind::GridExponential => (self.params[0] * n as f64).exp(),
            WeightKind::Constant => 1.0,
        }
    }

    /// Polynomial growth order `p` with `w_n ≍ n^p`; `None` for constant and
    /// super-polynomial weights.
    pub fn growth_exponent(&self) -> Option<f64> {
        match self.kind {
            WeightKind::SobolevCircle => Some(1.0),
            WeightKind::Fractal => Some(self.params[0]),
            WeightKind::GridExponential | WeightKind::Constant => None,
        }
    }

    /// Offset between the decay exponent `s` of `|x_n| ≍ w_n^{-s}` and the
    /// largest level at which such a vector is summable.
    pub(crate) fn summability_offset(&self) -> f64 {
        match self.growth_exponent() {
            Some(p) => 0.5 / p,
            None => 0.0,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.kind == WeightKind::Constant
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_frequencies_follow_real_basis() {
        let f: Vec<usize> = (0..7).map(circle_frequency).collect();
        assert_eq!(f, [0, 1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn weights_are_monotone_and_at_least_one() {
        let seqs = [
            WeightSequence::sobolev_circle(),
            WeightSequence::fractal(2.0).unwrap(),
            WeightSequence::grid_exponential(0.1).unwrap(),
            WeightSequence::constant(),
        ];
        for w in &seqs {
            let mut prev = 1.0;
            for n in 0..200 {
                let v = w.weight(n);
                assert!(v >= 1.0 && v >= prev, "{:?} at {n}", w.kind());
                prev = v;
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WeightSequence::fractal(0.0).is_err());
        assert!(WeightSequence::new(WeightKind::Fractal, vec![]).is_err());
        assert!(WeightSequence::grid_exponential(-1.0).is_err());
    }
}
