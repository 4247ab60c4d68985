//! Named operator families used throughout the library and by the
//! experiment driver.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;
use rand::Rng;

use super::operator::{Assembled, BlockDiagonal, ScOperator};
use crate::circle;
use crate::scale::{smooth_point, Extent, TruncatedScale};
use crate::{Result, ScError};

/// Block-diagonal matrix on `n` real Fourier coefficients: `zero` on the
/// constant mode and `block(k)` on every (cos, sin) pair. A trailing cosine
/// without its sine partner gets the 1×1 block `block(k)[0][0]`.
pub fn fourier_block_diagonal(
    n: usize,
    zero: f64,
    block: impl Fn(usize) -> [[f64; 2]; 2],
) -> BlockDiagonal {
    let mut blocks = Vec::with_capacity(n / 2 + 1);
    if n > 0 {
        blocks.push(DMatrix::from_element(1, 1, zero));
    }
    let mut i = 1;
    while i < n {
        let b = block(crate::scale::circle_frequency(i));
        if i + 1 < n {
            blocks.push(DMatrix::from_row_slice(
                2,
                2,
                &[b[0][0], b[0][1], b[1][0], b[1][1]],
            ));
        } else {
            blocks.push(DMatrix::from_element(1, 1, b[0][0]));
        }
        i += 2;
    }
    BlockDiagonal::new(blocks)
}

fn require_single_truncated(scale: &TruncatedScale, what: &str) -> Result<()> {
    match scale.components() {
        [c] if c.extent == Extent::Truncated => Ok(()),
        _ => Err(ScError::Precondition(format!(
            "{what} needs a single truncated component"
        ))),
    }
}

pub fn identity(scale: &TruncatedScale) -> ScOperator {
    let s = scale.clone();
    ScOperator::from_fn("identity", scale.clone(), scale.clone(), 0, move |n| {
        Ok(Assembled::diagonal(&vec![1.0; s.dim(n)]))
    })
}

pub fn zero(domain: &TruncatedScale, target: &TruncatedScale, declared_shift: usize) -> ScOperator {
    let (d, t) = (domain.clone(), target.clone());
    ScOperator::from_fn(
        "zero",
        domain.clone(),
        target.clone(),
        declared_shift,
        move |n| Ok(Assembled::Dense(DMatrix::zeros(t.dim(n), d.dim(n)))),
    )
}

/// Coefficientwise multiplication by `entry(n)` on one scale.
pub fn diagonal(
    name: &str,
    scale: &TruncatedScale,
    declared_shift: usize,
    entry: impl Fn(usize) -> f64 + Send + Sync + 'static,
) -> ScOperator {
    let s = scale.clone();
    ScOperator::from_fn(
        name,
        scale.clone(),
        scale.clone(),
        declared_shift,
        move |n| {
            let d: Vec<f64> = (0..s.dim(n)).map(&entry).collect();
            Ok(Assembled::diagonal(&d))
        },
    )
}

/// `diag(w_n^power)`.
pub fn weight_power(scale: &TruncatedScale, power: i32, declared_shift: usize) -> ScOperator {
    let s = scale.clone();
    ScOperator::from_fn(
        format!("diag(w^{power})"),
        scale.clone(),
        scale.clone(),
        declared_shift,
        move |n| {
            let d: Vec<f64> = s.weights_vector(n).iter().map(|w| w.powi(power)).collect();
            Ok(Assembled::diagonal(&d))
        },
    )
}

/// The inclusion `E¹ → E`, an sc⁺-operator.
pub fn inclusion(scale: &TruncatedScale) -> ScOperator {
    let s = scale.clone();
    ScOperator::from_fn("inclusion", scale.shifted(1), scale.clone(), 1, move |n| {
        Ok(Assembled::diagonal(&vec![1.0; s.dim(n)]))
    })
}

/// Translation `v ↦ v(· + τ)` on the circle scale.
pub fn shift_multiplier(scale: &TruncatedScale, tau: f64) -> Result<ScOperator> {
    require_single_truncated(scale, "shift multiplier")?;
    Ok(ScOperator::from_fn(
        format!("shift(τ={tau})"),
        scale.clone(),
        scale.clone(),
        0,
        move |n| {
            Ok(Assembled::Blocks(fourier_block_diagonal(n, 1.0, |k| {
                circle::shift_block(k, tau)
            })))
        },
    ))
}

/// `d/dt + c` from `E¹` to `E` on the circle scale.
pub fn derivative_plus(scale: &TruncatedScale, c: f64) -> Result<ScOperator> {
    require_single_truncated(scale, "derivative")?;
    let name = if c == 0.0 {
        "d/dt".into()
    } else {
        format!("d/dt + {c}")
    };
    Ok(ScOperator::from_fn(
        name,
        scale.shifted(1),
        scale.clone(),
        0,
        move |n| {
            Ok(Assembled::Blocks(fourier_block_diagonal(n, c, |k| {
                let [[a, b], [cc, d]] = circle::derivative_block(k);
                [[a + c, b], [cc, d + c]]
            })))
        },
    ))
}

/// `x ↦ Σ ⟨u_i, x⟩ v_i` with `u_i` in the domain and `v_i` in the target,
/// given at any truncation and re-truncated on demand. For smooth `u_i, v_i`
/// this is an sc⁺-operator.
pub fn smoothing(
    domain: &TruncatedScale,
    target: &TruncatedScale,
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
) -> Result<ScOperator> {
    for (u, v) in &pairs {
        domain.truncation_of(u.len())?;
        target.truncation_of(v.len())?;
    }
    let (d, t) = (domain.clone(), target.clone());
    let rank = pairs.len();
    Ok(ScOperator::from_fn(
        format!("smoothing(rank {rank})"),
        domain.clone(),
        target.clone(),
        1,
        move |n| {
            let mut left = DMatrix::zeros(t.dim(n), rank);
            let mut right = DMatrix::zeros(d.dim(n), rank);
            for (i, (u, v)) in pairs.iter().enumerate() {
                right.set_column(i, &nalgebra::DVector::from_vec(d.restrict(u, n)?));
                left.set_column(i, &nalgebra::DVector::from_vec(t.restrict(v, n)?));
            }
            Ok(Assembled::low_rank(left, right))
        },
    ))
}

/// Random smoothing of the given rank: `u_i, v_i` have coefficients
/// `e^{-rate·n}·U(-1,1)` and the operator is scaled by `amplitude`.
pub fn random_smoothing<R: Rng + ?Sized>(
    domain: &TruncatedScale,
    target: &TruncatedScale,
    rank: usize,
    amplitude: f64,
    rate: f64,
    rng: &mut R,
) -> Result<ScOperator> {
    let nd = domain.largest_truncation();
    let nt = target.largest_truncation();
    let pairs = (0..rank)
        .map(|_| {
            let u = smooth_point(domain, nd, rate, rng);
            let v: Vec<f64> = smooth_point(target, nt, rate, rng)
                .iter()
                .map(|x| amplitude * x)
                .collect();
            (u, v)
        })
        .collect();
    smoothing(domain, target, pairs)
}

/// A fixed matrix between two constant scales.
pub fn matrix(
    domain: &TruncatedScale,
    target: &TruncatedScale,
    m: DMatrix<f64>,
) -> Result<ScOperator> {
    if domain.has_truncated() || target.has_truncated() {
        return Err(ScError::Precondition(
            "matrix template needs constant scales".into(),
        ));
    }
    if m.shape() != (target.dim(0), domain.dim(0)) {
        return Err(ScError::Shape {
            expected: target.dim(0) * domain.dim(0),
            found: m.nrows() * m.ncols(),
        });
    }
    Ok(ScOperator::from_fn(
        "matrix",
        domain.clone(),
        target.clone(),
        0,
        move |_| Ok(Assembled::Dense(m.clone())),
    ))
}

/// `E → ℝ ⊕ E`, `x ↦ (0, x)`: injective with a one-dimensional cokernel.
pub fn prefix_embedding(scale: &TruncatedScale) -> ScOperator {
    let s = scale.clone();
    ScOperator::from_fn(
        "prefix embedding",
        scale.clone(),
        scale.with_prefix(1),
        0,
        move |n| {
            let d = s.dim(n);
            Ok(Assembled::Dense(DMatrix::from_fn(d + 1, d, |i, j| {
                if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            })))
        },
    )
}

/// `ℝ ⊕ E → E`, `(a, x) ↦ x`: surjective with a one-dimensional kernel.
pub fn prefix_projection(scale: &TruncatedScale) -> ScOperator {
    let s = scale.clone();
    ScOperator::from_fn(
        "prefix projection",
        scale.with_prefix(1),
        scale.clone(),
        0,
        move |n| {
            let d = s.dim(n);
            Ok(Assembled::Dense(DMatrix::from_fn(d, d + 1, |i, j| {
                if j == i + 1 {
                    1.0
                } else {
                    0.0
                }
            })))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::WeightSequence;

    fn circle() -> TruncatedScale {
        TruncatedScale::new(WeightSequence::sobolev_circle(), vec![32, 64, 128], 4).unwrap()
    }

    #[test]
    fn identity_is_an_isometry_of_every_level() {
        let id = identity(&circle());
        for m in 0..=4 {
            assert_eq!(id.level_operator_norm(m, m, 64).unwrap(), 1.0);
        }
    }

    #[test]
    fn inclusion_norms() {
        let i = inclusion(&circle());
        for m in 0..3 {
            assert!((i.level_operator_norm(m, m, 128).unwrap() - 1.0).abs() < 1e-15);
            assert!((i.level_operator_norm(m, m + 1, 128).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn weight_multiplier_norm_is_the_largest_weight() {
        let s = circle();
        let t = weight_power(&s, 1, 0);
        let w = s.components()[0].weights.weight(127);
        assert!((t.level_operator_norm(1, 1, 128).unwrap() - w).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_circle_helper() {
        let s = circle();
        let d = derivative_plus(&s, 0.0).unwrap();
        let x: Vec<f64> = (0..33).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let s33 = TruncatedScale::new(WeightSequence::sobolev_circle(), vec![33], 2).unwrap();
        let d33 = derivative_plus(&s33, 0.0).unwrap();
        assert_eq!(d33.apply(&x).unwrap(), circle::derivative(&x));
        assert!(d.assemble(32).is_ok());
    }

    #[test]
    fn prefix_maps_have_the_right_shapes() {
        let s = circle();
        assert_eq!(prefix_embedding(&s).assemble(32).unwrap().shape(), (33, 32));
        assert_eq!(
            prefix_projection(&s).assemble(32).unwrap().shape(),
            (32, 33)
        );
    }
}
