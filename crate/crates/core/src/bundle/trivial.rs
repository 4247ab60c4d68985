use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linear::{Assembled, ScOperator};
use crate::{Result, ScError, TruncatedScale};

/// `U ▷ F` over a base scale `E ⊃ U` with fiber scale `F`.
#[derive(Debug, Clone)]
pub struct TrivialStrongBundle {
    base: TruncatedScale,
    fiber: TruncatedScale,
}

impl TrivialStrongBundle {
    pub fn new(base: TruncatedScale, fiber: TruncatedScale) -> Result<Self> {
        if base.has_truncated() && fiber.has_truncated() && base.ladder() != fiber.ladder() {
            return Err(ScError::InvalidScale(
                "base and fiber must share a ladder".into(),
            ));
        }
        Ok(Self { base, fiber })
    }

    pub fn base(&self) -> &TruncatedScale {
        &self.base
    }

    pub fn fiber(&self) -> &TruncatedScale {
        &self.fiber
    }

    /// The extracted scale `(U ▷ F)^{[i]}` with levels `U_m ⊕ F_{m+i}`.
    pub fn extract(&self, i: usize) -> Result<ExtractedBundle> {
        if i > 1 {
            return Err(ScError::Precondition(format!(
                "extracted scales exist for i ∈ {{0,1}}, got {i}"
            )));
        }
        let scale = self.base.direct_sum(&self.fiber.shifted(i));
        let (s, b) = (scale.clone(), self.base.clone());
        let projection = ScOperator::from_fn(
            format!("p^[{i}]"),
            scale.clone(),
            self.base.clone(),
            0,
            move |n| {
                let (rows, cols) = (b.dim(n), s.dim(n));
                Ok(Assembled::Dense(DMatrix::from_fn(rows, cols, |r, c| {
                    if r == c {
                        1.0
                    } else {
                        0.0
                    }
                })))
            },
        );
        Ok(ExtractedBundle {
            shift: i,
            base: self.base.clone(),
            scale,
            projection,
        })
    }
}

/// `(U ▷ F)^{[i]}` with its projection `p^{[i]}` onto the base.
#[derive(Debug, Clone)]
pub struct ExtractedBundle {
    pub shift: usize,
    pub base: TruncatedScale,
    pub scale: TruncatedScale,
    pub projection: ScOperator,
}

impl ExtractedBundle {
    /// Splits `(u, ξ)` at the base dimension of its truncation.
    pub fn split<'a>(&self, x: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        let n = self.scale.truncation_of(x.len())?;
        Ok(x.split_at(self.base.dim(n)))
    }

    pub fn join(u: &[f64], xi: &[f64]) -> Vec<f64> {
        let mut out = u.to_vec();
        out.extend_from_slice(xi);
        out
    }
}

/// [`TrivialStrongBundle::extract`] as a free function.
pub fn extract_shifted_bundle(bundle: &TrivialStrongBundle, i: usize) -> Result<ExtractedBundle> {
    bundle.extract(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{certify_sc1, CertifyConfig, OperatorMap};
    use crate::rng;
    use crate::scale::{point_of_regularity, smooth_point};
    use crate::WeightSequence;
    use alloc::vec;
    use num_traits::Float;

    fn circle() -> TruncatedScale {
        TruncatedScale::new(WeightSequence::sobolev_circle(), vec![64], 4).unwrap()
    }

    #[test]
    fn extracted_levels() {
        let e = circle();
        let b = TrivialStrongBundle::new(e.clone(), e.clone()).unwrap();
        let mut r = rng::seeded(3);
        let u = smooth_point(&e, 64, 0.2, &mut r);
        let xi = smooth_point(&e, 64, 0.2, &mut r);
        let z = ExtractedBundle::join(&u, &xi);
        for i in 0..2 {
            let x = b.extract(i).unwrap();
            assert_eq!(x.scale.max_level(), 4 - i);
            for m in 0..=x.scale.max_level() {
                let expect = e
                    .level_norm(&u, m)
                    .unwrap()
                    .hypot(e.level_norm(&xi, m + i).unwrap());
                assert!((x.scale.level_norm(&z, m).unwrap() - expect).abs() <= 1e-12 * expect);
            }
        }
        assert!(matches!(b.extract(2), Err(ScError::Precondition(_))));
    }

    #[test]
    fn projection_is_exact_and_certified() {
        let e = circle();
        let b = TrivialStrongBundle::new(e.clone(), e.clone()).unwrap();
        let mut r = rng::seeded(5);
        for i in 0..2 {
            let x = b.extract(i).unwrap();
            let samples: Vec<Vec<f64>> = (0..3)
                .map(|_| {
                    let u = point_of_regularity(&e, 2.5, 64, &mut r);
                    let xi = smooth_point(&e, 64, 0.3, &mut r);
                    ExtractedBundle::join(&u, &xi)
                })
                .collect();
            for z in &samples {
                assert_eq!(
                    x.projection.apply(z).unwrap(),
                    x.split(z).unwrap().0.to_vec()
                );
            }
            let rep = certify_sc1(
                &OperatorMap::new(x.projection.clone()),
                &samples,
                1,
                &CertifyConfig::default(),
            )
            .unwrap();
            assert!(rep.accepted, "{:?}", rep.failures().collect::<Vec<_>>());
        }
    }
}
