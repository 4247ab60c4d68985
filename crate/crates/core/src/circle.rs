//! Real Fourier coefficients on the circle `ℝ/ℤ`.
//!
//! Index 0 is the constant mode; indices `2k−1` and `2k` hold the
//! coefficients of `cos(2πkt)` and `sin(2πkt)`. With an even number of
//! coefficients the last one is a cosine whose sine partner lies beyond the
//! truncation.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::scale::circle_frequency;

const TAU: f64 = core::f64::consts::TAU;

/// Sample grid with `2N + 1` points for `N` coefficients. Products of up to
/// three truncated series are resolved without aliasing.
#[derive(Debug, Clone)]
pub struct CircleGrid {
    coeffs: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl CircleGrid {
    pub fn new(coeffs: usize) -> Self {
        let m = 2 * coeffs + 1;
        let cos = (0..m).map(|j| (TAU * j as f64 / m as f64).cos()).collect();
        let sin = (0..m).map(|j| (TAU * j as f64 / m as f64).sin()).collect();
        Self { coeffs, cos, sin }
    }

    pub fn sample_count(&self) -> usize {
        self.cos.len()
    }

    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        debug_assert_eq!(c.len(), self.coeffs);
        let m = self.sample_count();
        (0..m)
            .map(|j| {
                let mut v = c.first().copied().unwrap_or(0.0);
                for (n, &a) in c.iter().enumerate().skip(1) {
                    let k = circle_frequency(n);
                    let idx = (k * j) % m;
                    v += if n % 2 == 1 {
                        a * self.cos[idx]
                    } else {
                        a * self.sin[idx]
                    };
                }
                v
            })
            .collect()
    }

    pub fn analyze(&self, v: &[f64]) -> Vec<f64> {
        let m = self.sample_count();
        debug_assert_eq!(v.len(), m);
        let mut c = vec![0.0; self.coeffs];
        let scale = 2.0 / m as f64;
        for (n, slot) in c.iter_mut().enumerate() {
            if n == 0 {
                *slot = v.iter().sum::<f64>() / m as f64;
                continue;
            }
            let k = circle_frequency(n);
            let table = if n % 2 == 1 { &self.cos } else { &self.sin };
            let mut acc = 0.0;
            for (j, x) in v.iter().enumerate() {
                acc += x * table[(k * j) % m];
            }
            *slot = scale * acc;
        }
        c
    }

    /// Coefficients of `t ↦ f(v(t))`, projected back to `N` coefficients.
    pub fn pointwise(&self, c: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let samples: Vec<f64> = self.synthesize(c).into_iter().map(f).collect();
        self.analyze(&samples)
    }

    /// Coefficients of the pointwise product `u·v`.
    pub fn product(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let su = self.synthesize(u);
        let sv = self.synthesize(v);
        let prod: Vec<f64> = su.iter().zip(&sv).map(|(a, b)| a * b).collect();
        self.analyze(&prod)
    }
}

/// Applies the real 2×2 block `[[a, b], [c, d]]` of every frequency `k ≥ 1`
/// to the (cos, sin) pair and `zero` to the constant mode. A dangling last
/// cosine is multiplied by `a` alone.
pub fn apply_blocks(c: &[f64], zero: f64, block: impl Fn(usize) -> [[f64; 2]; 2]) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    out[0] = zero * c[0];
    let mut i = 1;
    while i < n {
        let k = circle_frequency(i);
        let [[a, b], [cc, d]] = block(k);
        if i + 1 < n {
            out[i] = a * c[i] + b * c[i + 1];
            out[i + 1] = cc * c[i] + d * c[i + 1];
        } else {
            out[i] = a * c[i];
        }
        i += 2;
    }
    out
}

/// `d/dt`: `(a_k, b_k) ↦ (2πk b_k, −2πk a_k)`.
pub fn derivative_block(k: usize) -> [[f64; 2]; 2] {
    let w = TAU * k as f64;
    [[0.0, w], [-w, 0.0]]
}

/// Translation `v ↦ v(· + τ)`.
pub fn shift_block(k: usize, tau: f64) -> [[f64; 2]; 2] {
    let (s, c) = (TAU * k as f64 * tau).sin_cos();
    [[c, s], [-s, c]]
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    apply_blocks(c, 0.0, derivative_block)
}

pub fn shift(c: &[f64], tau: f64) -> Vec<f64> {
    apply_blocks(c, 1.0, |k| shift_block(k, tau))
}
