use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use crate::{Result, ScError};

/// Weighted Sobolev scale on a uniform grid over `[-L, L]`.
///
/// Level `m` measures `Σ_{i≤m} ‖γ_{δ_m} D^i f‖_{L^p}` with the weight
/// `γ_δ(s) = e^{δ s β(s)}`, central finite differences for `D^i` (zero
/// extension past the window) and trapezoidal quadrature.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridLineScale {
    half_width: f64,
    grid_size: usize,
    deltas: Vec<f64>,
    p: f64,
}

/// Smooth odd cutoff with `β(s) = -1` for `s ≤ -1` and `β(s) = 1` for
/// `s ≥ 1`.
pub fn cutoff(s: f64) -> f64 {
    fn phi(u: f64) -> f64 {
        if u > 0.0 {
            (-1.0 / u).exp()
        } else {
            0.0
        }
    }
    if s <= -1.0 {
        return -1.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let u = 0.5 * (s + 1.0);
    let a = phi(u);
    2.0 * a / (a + phi(1.0 - u)) - 1.0
}

/// `γ_δ(s) = e^{δ s β(s)}`.
pub fn gamma(delta: f64, s: f64) -> f64 {
    (delta * s * cutoff(s)).exp()
}

/// Cosine-squared bump on `[-1, 1]` with unit `L²` norm:
/// `∫ (4/3) cos⁴(πs/2) ds = 1`.
pub fn cosine_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let c = (core::f64::consts::FRAC_PI_2 * s).cos();
    (4.0f64 / 3.0).sqrt() * c * c
}

impl GridLineScale {
    pub fn new(half_width: f64, grid_size: usize, deltas: Vec<f64>, p: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(ScError::InvalidScale(format!(
                "half width {half_width} must be positive"
            )));
        }
        if grid_size < 3 {
            return Err(ScError::InvalidScale(format!(
                "grid size {grid_size} too small"
            )));
        }
        if deltas.first() != Some(&0.0) || deltas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScError::InvalidScale(format!(
                "weights must start at 0 and increase strictly, got {deltas:?}"
            )));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(ScError::InvalidScale(format!(
                "exponent p = {p} not in (1, ∞)"
            )));
        }
        Ok(Self {
            half_width,
            grid_size,
            deltas,
            p,
        })
    }

    /// `L²` scale with `δ_m = m·δ` for `m ≤ max_level`.
    pub fn hilbert(
        half_width: f64,
        grid_size: usize,
        delta: f64,
        max_level: usize,
    ) -> Result<Self> {
        let deltas = (0..=max_level).map(|m| m as f64 * delta).collect();
        Self::new(half_width, grid_size, deltas, 2.0)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn max_level(&self) -> usize {
        self.deltas.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.grid_size - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.grid_size).map(|j| self.node(j)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.grid_size).map(|j| f(self.node(j))).collect()
    }

    /// Trapezoid quadrature weights.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = alloc::vec![h; self.grid_size];
        w[0] = 0.5 * h;
        w[self.grid_size - 1] = 0.5 * h;
        w
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.grid_size {
            return Err(ScError::Shape {
                expected: self.grid_size,
                found: f.len(),
            });
        }
        Ok(())
    }

    /// Trapezoidal `L²([-L, L])` inner product.
    pub fn inner_product(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        self.check_len(g)?;
        Ok(self
            .quadrature_weights()
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum())
    }

    /// `order`-fold central difference.
    pub fn derivative(&self, f: &[f64], order: usize) -> Vec<f64> {
        let h = self.spacing();
        let mut cur = f.to_vec();
        for _ in 0..order {
            let n = cur.len();
            let at = |j: isize| {
                if j < 0 || j as usize >= n {
                    0.0
                } else {
                    cur[j as usize]
                }
            };
            cur = (0..n as isize)
                .map(|j| (at(j + 1) - at(j - 1)) / (2.0 * h))
                .collect();
        }
        cur
    }

    pub fn level_norm(&self, f: &[f64], m: usize) -> Result<f64> {
        self.check_len(f)?;
        if m > self.max_level() {
            return Err(ScError::LevelOutOfRange {
                level: m,
                max: self.max_level(),
            });
        }
        let delta = self.deltas[m];
        let weights = self.quadrature_weights();
        let gammas: Vec<f64> = self.nodes().iter().map(|&s| gamma(delta, s)).collect();
        let mut total = 0.0;
        for i in 0..=m {
            let d = self.derivative(f, i);
            let integral: f64 = d
                .iter()
                .zip(&gammas)
                .zip(&weights)
                .map(|((v, g), w)| w * (g * v).abs().powf(self.p))
                .sum();
            total += integral.powf(1.0 / self.p);
        }
        Ok(total)
    }
}
