use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::projection::ScSubspace;
use crate::linalg;
use crate::{Result, ScError};

/// `inf_{a ∈ A} |x − a|_m`: the level-`m` least-squares residual of `x`
/// against the basis of `A`.
pub fn quotient_distance(x: &[f64], a: &ScSubspace, m: usize) -> Result<f64> {
    let scale = a.ambient();
    scale.check_level(m)?;
    let n = scale.truncation_of(x.len())?;
    let w = scale.level_weights(m as i32, n);
    let wx = DVector::from_iterator(x.len(), x.iter().zip(&w).map(|(v, w)| v * w));
    if a.dim() == 0 {
        return Ok(wx.norm());
    }
    let q = a.level_orthonormal_basis(m, n)?;
    let residual = &wx - &q * (q.transpose() * &wx);
    Ok(residual.norm())
}

/// Singular values of the induced inclusion `E_{m+1}/A → E_m/A` at
/// truncation `n`. Each quotient level is realized as the orthogonal
/// complement of `A` in that level's inner product.
pub fn quotient_inclusion_singular_values(a: &ScSubspace, m: usize, n: usize) -> Result<Vec<f64>> {
    let scale = a.ambient();
    scale.check_level(m + 1)?;
    scale.check_on_ladder(n)?;
    let dim = scale.dim(n);
    let complement = |level: usize| -> Result<DMatrix<f64>> {
        let q = a.level_orthonormal_basis(level, n)?;
        Ok(DMatrix::identity(dim, dim) - &q * q.transpose())
    };
    let lower = complement(m)?;
    let upper = complement(m + 1)?;
    // level-(m+1) coordinates y = W^{m+1} x map to level-m coordinates W^{-1} y
    let inv: Vec<f64> = scale.weights_vector(n).iter().map(|w| 1.0 / w).collect();
    let map = DMatrix::from_fn(dim, dim, |i, j| lower[(i, j)] * inv[j]) * upper;
    let mut sv = linalg::singular_values(&map);
    let r = a.dim();
    if sv.len() < r {
        return Err(ScError::DegenerateBasis {
            rank: sv.len(),
            expected: r,
        });
    }
    sv.truncate(sv.len() - r);
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rng, TruncatedScale, WeightSequence};
    use alloc::vec;

    fn circle() -> TruncatedScale {
        TruncatedScale::new(WeightSequence::sobolev_circle(), vec![32, 64], 3).unwrap()
    }

    #[test]
    fn distance_to_an_axis() {
        let plane = TruncatedScale::constant(2, 2);
        let a = ScSubspace::new(plane, vec![vec![1.0, 0.0]]).unwrap();
        assert!((quotient_distance(&[3.0, 4.0], &a, 0).unwrap() - 4.0).abs() < 1e-15);
        assert!(quotient_distance(&[3.0, 0.0], &a, 0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn distance_matches_grid_search() {
        let s = circle();
        let mut r = rng::seeded(11);
        let basis: Vec<Vec<f64>> = (0..2)
            .map(|_| crate::scale::smooth_point(&s, 32, 0.3, &mut r))
            .collect();
        let a = ScSubspace::new(s.clone(), basis.clone()).unwrap();
        let x: Vec<f64> = (0..32).map(|_| rng::symmetric(&mut r)).collect();
        let m = 1;
        let got = quotient_distance(&x, &a, m).unwrap();
        // coarse-to-fine grid search over the two coefficients
        let dist = |c0: f64, c1: f64| {
            let y: Vec<f64> = (0..32)
                .map(|i| x[i] - c0 * basis[0][i] - c1 * basis[1][i])
                .collect();
            s.level_norm(&y, m).unwrap()
        };
        let (mut c0, mut c1, mut h) = (0.0, 0.0, 4.0);
        let mut best = dist(c0, c1);
        for _ in 0..60 {
            let mut improved = (c0, c1);
            for i in -10..=10 {
                for j in -10..=10 {
                    let (u, v) = (c0 + h * i as f64 / 10.0, c1 + h * j as f64 / 10.0);
                    let d = dist(u, v);
                    if d < best {
                        best = d;
                        improved = (u, v);
                    }
                }
            }
            (c0, c1) = improved;
            h *= 0.3;
        }
        assert!((got - best).abs() < 1e-6, "{got} vs {best}");
    }

    #[test]
    fn trivial_subspace_gives_inclusion() {
        let s = circle();
        let a = ScSubspace::trivial(s.clone());
        let q = quotient_inclusion_singular_values(&a, 1, 32).unwrap();
        assert_eq!(q.len(), 32);
        for (x, y) in q.iter().zip(s.inclusion_singular_values(1, 32).unwrap()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn coordinate_subspace_drops_first_weight() {
        let s = circle();
        let mut e0 = vec![0.0; 32];
        e0[0] = 1.0;
        let a = ScSubspace::new(s.clone(), vec![e0]).unwrap();
        let q = quotient_inclusion_singular_values(&a, 0, 32).unwrap();
        let mut expected: Vec<f64> = (1..32)
            .map(|n| 1.0 / s.components()[0].weights.weight(n))
            .collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(q.len(), 31);
        for (x, y) in q.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
