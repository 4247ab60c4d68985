use alloc::vec::Vec;

use super::regularity::RegularityConfig;
use super::truncated::TruncatedScale;
use crate::{Result, ScError};

/// Coefficient vector with an optional declared regularity level.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalePoint {
    pub coeffs: Vec<f64>,
    pub level_tag: Option<usize>,
}

impl ScalePoint {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self {
            coeffs,
            level_tag: None,
        }
    }

    pub fn with_level_tag(mut self, m: usize) -> Self {
        self.level_tag = Some(m);
        self
    }

    /// Checks the declared level against the estimator.
    pub fn verify_tag(&self, scale: &TruncatedScale, config: &RegularityConfig) -> Result<()> {
        let Some(m) = self.level_tag else {
            return Ok(());
        };
        let est = scale.estimate_regularity(&self.coeffs, config)?;
        if est.level + 1e-9 < m as f64 {
            return Err(ScError::Level {
                required: m as f64,
                estimated: est.level,
            });
        }
        Ok(())
    }
}

impl AsRef<[f64]> for ScalePoint {
    fn as_ref(&self) -> &[f64] {
        &self.coeffs
    }
}

impl From<Vec<f64>> for ScalePoint {
    fn from(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs)
    }
}
