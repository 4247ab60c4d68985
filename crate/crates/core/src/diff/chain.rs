use alloc::vec::Vec;

use super::certify::{regularity_of, unit_direction};
use super::fd::derivative_or_fd;
use super::ScMap;
use crate::linalg::{axpy, sub};
use crate::rng;
use crate::scale::RegularityConfig;
use crate::{Result, ScError};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChainRuleRow {
    pub sample: usize,
    pub level: usize,
    /// `|D(g∘f)(x)ξ − Dg(f(x))Df(x)ξ|_m / |ξ|_m`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChainRuleReport {
    pub f: alloc::string::String,
    pub g: alloc::string::String,
    pub step: f64,
    pub rows: Vec<ChainRuleRow>,
    /// Samples skipped at a level for lack of regularity.
    pub skipped: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Step of the five-point stencil for the composite; its truncation error
/// is `O(h⁴)`.
pub const CHAIN_STEP: f64 = 1e-3;

/// Compares a five-point difference quotient of `g ∘ f` with
/// `Dg(f(x))Df(x)ξ` for one random direction `ξ ∈ E_m` per sample and level
/// `m ≤ m_max`. Samples of estimated regularity below `m + 1` are skipped.
pub fn verify_chain_rule(
    f: &dyn ScMap,
    g: &dyn ScMap,
    samples: &[Vec<f64>],
    m_max: usize,
    tol: f64,
    seed: u64,
) -> Result<ChainRuleReport> {
    if f.target().components() != g.domain().components() {
        return Err(ScError::Precondition(
            "target of f differs from the domain of g".into(),
        ));
    }
    let config = RegularityConfig::default();
    let mut rng = rng::seeded(seed);
    let mut rows = Vec::new();
    let mut skipped = 0;
    let top = m_max
        .min(f.domain().max_level())
        .min(g.target().max_level());
    let gf = |y: &[f64]| -> Result<Vec<f64>> { g.eval(&f.eval(y)?) };
    for (i, x) in samples.iter().enumerate() {
        let n = f.domain().truncation_of(x.len())?;
        let rx = regularity_of(f.domain(), x, &config)?;
        for m in 0..=top {
            if (m + 1) as f64 > rx + 0.25 {
                skipped += 1;
                continue;
            }
            let xi = unit_direction(f.domain(), n, m, &mut rng)?;
            let mut h = CHAIN_STEP;
            while !(f.contains(&axpy(2.0 * h, &xi, x)) && f.contains(&axpy(-2.0 * h, &xi, x))) {
                h *= 0.5;
                if h < 1e-12 {
                    return Err(ScError::Evaluation("stencil leaves the domain of f".into()));
                }
            }
            let p2 = gf(&axpy(2.0 * h, &xi, x))?;
            let p1 = gf(&axpy(h, &xi, x))?;
            let m1 = gf(&axpy(-h, &xi, x))?;
            let m2 = gf(&axpy(-2.0 * h, &xi, x))?;
            let lhs: Vec<f64> = (0..p1.len())
                .map(|k| (-p2[k] + 8.0 * p1[k] - 8.0 * m1[k] + m2[k]) / (12.0 * h))
                .collect();
            let dfx = derivative_or_fd(f, x, &xi)?;
            let rhs = derivative_or_fd(g, &f.eval(x)?, &dfx)?;
            let residual =
                g.target().level_norm(&sub(&lhs, &rhs), m)? / f.domain().level_norm(&xi, m)?;
            rows.push(ChainRuleRow {
                sample: i,
                level: m,
                residual,
            });
        }
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(ChainRuleReport {
        f: f.name().into(),
        g: g.name().into(),
        step: CHAIN_STEP,
        passed: !rows.is_empty() && max_residual <= tol,
        rows,
        skipped,
        max_residual,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{OperatorMap, PolynomialMap};
    use crate::linear::templates;
    use crate::scale::smooth_point;
    use crate::{TruncatedScale, WeightSequence};
    use alloc::vec;

    fn circle() -> TruncatedScale {
        TruncatedScale::new(WeightSequence::sobolev_circle(), vec![64], 3).unwrap()
    }

    fn samples(s: &TruncatedScale, count: usize) -> Vec<Vec<f64>> {
        let mut r = rng::seeded(4);
        (0..count)
            .map(|_| smooth_point(s, 64, 0.4, &mut r))
            .collect()
    }

    #[test]
    fn identity_pair_has_zero_residual() {
        let s = circle();
        let id = OperatorMap::new(templates::identity(&s));
        let rep = verify_chain_rule(&id, &id, &samples(&s, 3), 1, 1e-12, 0).unwrap();
        assert!(rep.passed);
        assert!(rep.max_residual < 1e-12);
    }

    #[test]
    fn shift_then_square() {
        let s = circle();
        let f = OperatorMap::new(templates::shift_multiplier(&s, 0.2).unwrap());
        let g = PolynomialMap::new(&s, vec![0.0, 0.0, 1.0]).unwrap();
        let rep = verify_chain_rule(&f, &g, &samples(&s, 3), 1, 1e-6, 1).unwrap();
        assert!(rep.passed, "{}", rep.max_residual);
    }
}
