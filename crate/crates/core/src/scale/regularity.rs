//! Regularity estimation from coefficient decay, plus generators of
//! synthetic points with prescribed regularity.
//!
//! A vector with `|x_n| ≍ w_n^{-s}` lies in level `m` iff
//! `Σ w_n^{2m−2s}` converges. For weights growing like `n^p` that happens
//! for `m < s − 1/(2p)`, so the estimator reports `m̂ = s − 1/(2p)`
//! (`s − 1/2` on the circle). The exponent `s` is a least-squares slope of
//! `log|x_n|` against `log w_n` over the tail window.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;

use super::truncated::{Extent, TruncatedScale};
use super::weights::WeightSequence;
use crate::rng;
use crate::{Result, ScError};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularityConfig {
    /// Fraction of the highest indices used for the fit.
    pub window: f64,
    /// Decay exponents above this count as super-polynomial.
    pub slope_cap: f64,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        Self {
            window: 0.5,
            slope_cap: 50.0,
        }
    }
}

/// Smallest truncation the estimator accepts.
pub const MIN_TRUNCATION: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularityEstimate {
    /// `m̂`, possibly `+∞`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::extended_real"))]
    pub level: f64,
    /// Fitted decay exponent `s`, possibly `+∞`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::extended_real"))]
    pub decay: f64,
    /// Set when the tail carried too little data for a fit.
    pub degenerate: bool,
}

impl RegularityEstimate {
    pub(crate) fn smooth(degenerate: bool) -> Self {
        Self {
            level: f64::INFINITY,
            decay: f64::INFINITY,
            degenerate,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.level.is_infinite()
    }
}

struct LineFit {
    slope: f64,
    rms: f64,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 1e-300 {
        return None;
    }
    let slope = sxy / sxx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - my - slope * (x - mx);
            r * r
        })
        .sum();
    Some(LineFit {
        slope,
        rms: (rss / n).sqrt(),
    })
}

pub(crate) fn estimate_component(
    x: &[f64],
    weights: &WeightSequence,
    config: &RegularityConfig,
) -> Result<RegularityEstimate> {
    let n = x.len();
    if n < MIN_TRUNCATION {
        return Err(ScError::Precondition(format!(
            "regularity estimation needs truncation ≥ {MIN_TRUNCATION}, got {n}"
        )));
    }
    if !(config.window > 0.0 && config.window < 1.0) {
        return Err(ScError::Precondition(format!(
            "tail window {} not in (0,1)",
            config.window
        )));
    }
    if weights.is_constant() {
        // every vector of a constant scale is smooth
        return Ok(RegularityEstimate::smooth(false));
    }
    let start = ((n as f64) * (1.0 - config.window)).floor() as usize;
    let mut log_w = Vec::new();
    let mut log_x = Vec::new();
    let mut index = Vec::new();
    for (i, v) in x.iter().enumerate().skip(start) {
        let a = v.abs();
        if a > 0.0 && a.is_finite() {
            log_w.push(weights.weight(i).ln());
            log_x.push(a.ln());
            index.push(i as f64);
        }
    }
    if log_x.len() < 2 {
        return Ok(RegularityEstimate::smooth(true));
    }
    let Some(power) = fit_line(&log_w, &log_x) else {
        return Ok(RegularityEstimate::smooth(true));
    };
    let decay = -power.slope;
    if decay > config.slope_cap {
        return Ok(RegularityEstimate::smooth(false));
    }
    // geometric decay against polynomial weights: the tail is straight in
    // the index, not in log w
    if weights.growth_exponent().is_some() {
        if let Some(geometric) = fit_line(&index, &log_x) {
            if geometric.slope < 0.0 && power.rms > 1e-8 && geometric.rms < 0.25 * power.rms {
                return Ok(RegularityEstimate::smooth(false));
            }
        }
    }
    Ok(RegularityEstimate {
        level: decay - weights.summability_offset(),
        decay,
        degenerate: false,
    })
}

/// Random-sign vector with `|x_n| = w_n^{-(level + shift + offset)}` on the
/// truncated components, so that its estimated regularity is `level`.
/// Fixed components are filled uniformly from `[-1, 1)`.
pub fn point_of_regularity<R: Rng + ?Sized>(
    scale: &TruncatedScale,
    level: f64,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(scale.dim(n));
    for c in scale.components() {
        match c.extent {
            Extent::Fixed(d) => out.extend((0..d).map(|_| rng::symmetric(rng))),
            Extent::Truncated => {
                let s = level + c.shift as f64 + c.weights.summability_offset();
                out.extend((0..n).map(|i| rng::sign(rng) * c.weights.weight(i).powf(-s)));
            }
        }
    }
    out
}

/// Smooth random vector: coefficients `e^{-rate·n}·U(-1,1)`.
pub fn smooth_point<R: Rng + ?Sized>(
    scale: &TruncatedScale,
    n: usize,
    rate: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(scale.dim(n));
    for c in scale.components() {
        match c.extent {
            Extent::Fixed(d) => out.extend((0..d).map(|_| rng::symmetric(rng))),
            Extent::Truncated => {
                out.extend((0..n).map(|i| (-rate * i as f64).exp() * rng::symmetric(rng)))
            }
        }
    }
    out
}
