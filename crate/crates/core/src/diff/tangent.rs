use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::certify::regularity_of;
use super::fd::derivative_or_fd;
use super::ScMap;
use crate::scale::RegularityConfig;
use crate::{Result, ScError, TruncatedScale};

/// `Tf(x, ξ) = (f(x), Df(x)ξ)` on `TU = U¹ ⊕ E⁰`.
///
/// Base points must lie in level 1; the estimated regularity may fall short
/// of 1 by `level_slack`.
#[derive(Clone)]
pub struct TangentMap {
    name: String,
    f: Arc<dyn ScMap>,
    domain: TruncatedScale,
    target: TruncatedScale,
    pub level_slack: f64,
    pub regularity: RegularityConfig,
}

impl TangentMap {
    pub fn new(f: Arc<dyn ScMap>) -> Self {
        let domain = f.domain().shifted(1).direct_sum(f.domain());
        let target = f.target().shifted(1).direct_sum(f.target());
        Self {
            name: format!("T({})", f.name()),
            f,
            domain,
            target,
            level_slack: 0.25,
            regularity: RegularityConfig::default(),
        }
    }

    pub fn base(&self) -> &Arc<dyn ScMap> {
        &self.f
    }

    /// Splits a tangent vector into its base point and fiber part.
    pub fn split<'a>(&self, x: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        let n = self.domain.truncation_of(x.len())?;
        Ok(x.split_at(self.f.domain().dim(n)))
    }

    /// Concatenates a base point and a fiber vector.
    pub fn join(base: &[f64], fiber: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(base.len() + fiber.len());
        out.extend_from_slice(base);
        out.extend_from_slice(fiber);
        out
    }

    fn check_base(&self, x: &[f64]) -> Result<()> {
        let est = match regularity_of(self.f.domain(), x, &self.regularity) {
            Ok(est) => est,
            // too short for an estimate: nothing to check
            Err(ScError::Precondition(_)) => return Ok(()),
            Err(e) => return Err(e),
        };
        if est < 1.0 - self.level_slack {
            return Err(ScError::Level {
                required: 1.0,
                estimated: est,
            });
        }
        Ok(())
    }
}

impl ScMap for TangentMap {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> &TruncatedScale {
        &self.domain
    }
    fn target(&self) -> &TruncatedScale {
        &self.target
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (base, fiber) = self.split(x)?;
        self.check_base(base)?;
        let fx = self.f.eval(base)?;
        let dfx = derivative_or_fd(&*self.f, base, fiber)?;
        Ok(Self::join(&fx, &dfx))
    }
    fn derivative(&self, x: &[f64], v: &[f64]) -> Option<Result<Vec<f64>>> {
        let (base, fiber) = match self.split(x) {
            Ok(p) => p,
            Err(e) => return Some(Err(e)),
        };
        let (a, b) = match self.split(v) {
            Ok(p) => p,
            Err(e) => return Some(Err(e)),
        };
        let da = self.f.derivative(base, a)?;
        let db = self.f.derivative(base, b)?;
        let d2 = self.f.second_derivative(base, fiber, a)?;
        Some((|| {
            let (da, db, d2) = (da?, db?, d2?);
            let second: Vec<f64> = d2.iter().zip(&db).map(|(p, q)| p + q).collect();
            Ok(Self::join(&da, &second))
        })())
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.split(x)
            .map(|(base, _)| self.f.contains(base))
            .unwrap_or(false)
    }
}
