use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::operator::{Assembled, ScOperator};
use crate::linalg::{self, RankPolicy};
use crate::rng::{self, SeededRng};
use crate::scale::{point_of_regularity, RegularityConfig};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FredholmConfig {
    pub policy: RankPolicy,
    /// Tolerance on the sine of the largest principal angle between kernels
    /// of different levels.
    pub kernel_angle_tol: f64,
    /// Highest level examined; defaults to the highest level both scales have.
    pub max_level: Option<usize>,
    /// Truncation to certify at; defaults to the largest on the ladder.
    pub truncation: Option<usize>,
    /// Target regularities of the synthetic right-hand sides.
    pub regularity_levels: Vec<f64>,
    pub regularity_samples: usize,
    /// Allowed shortfall of the estimated regularity of a solution.
    pub regularity_margin: f64,
    pub regularity: RegularityConfig,
    pub seed: u64,
}

impl Default for FredholmConfig {
    fn default() -> Self {
        Self {
            policy: RankPolicy::default(),
            kernel_angle_tol: 1e-6,
            max_level: None,
            truncation: None,
            regularity_levels: vec![0.0, 1.0, 2.0],
            regularity_samples: 2,
            regularity_margin: 0.25,
            regularity: RegularityConfig::default(),
            seed: 0,
        }
    }
}

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct LevelKernel {
    pub level: usize,
    pub kernel_dim: usize,
    pub rank: usize,
    /// Smallest singular value counted in the rank, relative to the largest.
    pub smallest_retained: f64,
    /// Sine of the largest principal angle to the level-0 kernel.
    pub angle_to_level0: f64,
}

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct RegularitySample {
    pub target_level: f64,
    /// Estimated level of the solution relative to the domain scale.
    pub solution_level: f64,
    pub ok: bool,
}

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct FredholmCertificate {
    pub operator: String,
    pub truncation: usize,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    /// `kernel_dim − cokernel_dim`, present when the kernels of all levels
    /// agree.
    pub index: Option<i64>,
    pub per_level: Vec<LevelKernel>,
    pub kernels_agree: bool,
    pub level_regularity_ok: bool,
    pub regularity: Vec<RegularitySample>,
    pub svd_threshold: f64,
    pub accepted: bool,
}

impl FredholmCertificate {
    pub fn per_level_kernel_dims(&self) -> Vec<usize> {
        self.per_level.iter().map(|l| l.kernel_dim).collect()
    }
}

/// Solver for `A x = y` at level 0, reused over all sampled targets.
enum Solver {
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Pseudo(DMatrix<f64>, RankPolicy),
}

impl Solver {
    fn new(a: &Assembled, square_invertible: bool, policy: RankPolicy) -> Self {
        let dense = a.to_dense();
        if square_invertible {
            Self::Lu(dense.lu())
        } else {
            Self::Pseudo(dense, policy)
        }
    }

    fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        let y = DVector::from_column_slice(y);
        let x = match self {
            Self::Lu(lu) => lu
                .solve(&y)
                .ok_or_else(|| crate::ScError::Evaluation("singular level-0 matrix".to_string()))?,
            Self::Pseudo(a, policy) => linalg::least_squares(a, &y, policy)?,
        };
        Ok(x.as_slice().to_vec())
    }
}

/// Kernel and cokernel dimensions of every level operator, cross-level
/// kernel agreement, and the level regularity test on synthetic targets.
///
/// Ambiguous singular value clusters raise
/// [`ScError::AmbiguousRank`](crate::ScError::AmbiguousRank).
pub fn fredholm_certificate(
    op: &ScOperator,
    config: &FredholmConfig,
) -> Result<FredholmCertificate> {
    let n = config.truncation.unwrap_or_else(|| {
        if op.domain().has_truncated() {
            op.domain().largest_truncation()
        } else {
            op.target().largest_truncation()
        }
    });
    let top = config
        .max_level
        .unwrap_or(usize::MAX)
        .min(op.domain().max_level())
        .min(op.target().max_level());
    let mut per_level = Vec::with_capacity(top + 1);
    let mut level0_kernel: Option<DMatrix<f64>> = None;
    let mut rank0 = 0;
    let mut kernel_dims_agree = true;
    let domain_dim = op.domain().dim(n);
    let target_dim = op.target().dim(n);
    for m in 0..=top {
        let a = op.weighted(m, m, n)?;
        let probe = a.rank_decomposition(&config.policy, false)?;
        let kernel_dim = domain_dim - probe.rank;
        let kernel = if kernel_dim > 0 {
            let rd = a.rank_decomposition(&config.policy, true)?;
            let z = rd.kernel.expect("requested kernel");
            // back to unweighted coefficients
            let w = op.domain().inverse_level_weights(m, n);
            let raw = DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| w[i] * z[(i, j)]);
            linalg::orthonormalize(&raw)
        } else {
            DMatrix::zeros(domain_dim, 0)
        };
        let angle = match &level0_kernel {
            None => 0.0,
            Some(k0) => linalg::subspace_distance(k0, &kernel),
        };
        if angle > config.kernel_angle_tol {
            kernel_dims_agree = false;
        }
        let largest = probe.singular_values.first().copied().unwrap_or(0.0);
        let smallest_retained = if probe.rank == 0 || largest == 0.0 {
            0.0
        } else {
            probe.singular_values[probe.rank - 1] / largest
        };
        per_level.push(LevelKernel {
            level: m,
            kernel_dim,
            rank: probe.rank,
            smallest_retained,
            angle_to_level0: angle,
        });
        if m == 0 {
            level0_kernel = Some(kernel);
            rank0 = probe.rank;
        }
    }
    let kernel_dim = per_level[0].kernel_dim;
    let cokernel_dim = target_dim - rank0;
    let kernels_agree = kernel_dims_agree && per_level.iter().all(|l| l.kernel_dim == kernel_dim);

    let mut regularity = Vec::new();
    let truncated = op.domain().has_truncated() && op.target().has_truncated();
    if truncated && n >= crate::scale::regularity::MIN_TRUNCATION {
        let square_invertible = domain_dim == target_dim && kernel_dim == 0;
        // the solver works on the unweighted level-0 matrix
        let raw = op.assemble(n)?;
        let solver = Solver::new(&raw, square_invertible, config.policy);
        let mut rng: SeededRng = rng::seeded(config.seed);
        for &s in &config.regularity_levels {
            if s > top as f64 {
                continue;
            }
            for _ in 0..config.regularity_samples {
                let y = point_of_regularity(op.target(), s, n, &mut rng);
                let x = solver.solve(&y)?;
                let est = op.domain().estimate_regularity(&x, &config.regularity)?;
                regularity.push(RegularitySample {
                    target_level: s,
                    solution_level: est.level,
                    ok: est.level >= s - config.regularity_margin,
                });
            }
        }
    }
    let level_regularity_ok = regularity.iter().all(|r| r.ok);
    let index = kernels_agree.then(|| kernel_dim as i64 - cokernel_dim as i64);
    Ok(FredholmCertificate {
        operator: op.name().to_string(),
        truncation: n,
        kernel_dim,
        cokernel_dim,
        index,
        per_level,
        kernels_agree,
        level_regularity_ok,
        regularity,
        svd_threshold: config.policy.relative_threshold,
        accepted: kernels_agree && level_regularity_ok,
    })
}

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityTrial {
    pub trial: usize,
    pub index: Option<i64>,
    pub kernel_dims: Vec<usize>,
    pub cokernel_dim: Option<usize>,
    pub accepted: bool,
    pub same_index: bool,
    pub error: Option<String>,
}

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub base: FredholmCertificate,
    pub seed: u64,
    pub trials: Vec<StabilityTrial>,
    pub all_passed: bool,
}

/// Recomputes the certificate of `T + S` for `trials` perturbations `S`
/// drawn from `family` with one seeded generator. Failing trials are
/// recorded, not raised.
pub fn perturbation_stability(
    op: &ScOperator,
    family: &dyn Fn(&mut SeededRng) -> Result<ScOperator>,
    trials: usize,
    seed: u64,
    config: &FredholmConfig,
) -> Result<StabilityReport> {
    let base = fredholm_certificate(op, config)?;
    let mut rng = rng::seeded(seed);
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let outcome = family(&mut rng)
            .and_then(|s| op.plus(&s))
            .and_then(|sum| fredholm_certificate(&sum, config));
        rows.push(match outcome {
            Ok(cert) => StabilityTrial {
                trial,
                index: cert.index,
                kernel_dims: cert.per_level_kernel_dims(),
                cokernel_dim: Some(cert.cokernel_dim),
                accepted: cert.accepted,
                same_index: cert.index.is_some() && cert.index == base.index,
                error: None,
            },
            Err(e) => StabilityTrial {
                trial,
                index: None,
                kernel_dims: Vec::new(),
                cokernel_dim: None,
                accepted: false,
                same_index: false,
                error: Some(format!("{e}")),
            },
        });
    }
    let all_passed = base.accepted && rows.iter().all(|r| r.accepted && r.same_index);
    Ok(StabilityReport {
        base,
        seed,
        trials: rows,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::templates;
    use crate::{ScError, TruncatedScale, WeightSequence};

    fn circle() -> TruncatedScale {
        TruncatedScale::new(WeightSequence::sobolev_circle(), vec![63, 127, 255], 4).unwrap()
    }

    #[test]
    fn identity_has_index_zero() {
        let c = fredholm_certificate(&templates::identity(&circle()), &FredholmConfig::default())
            .unwrap();
        assert_eq!((c.kernel_dim, c.cokernel_dim, c.index), (0, 0, Some(0)));
        assert!(c.accepted);
    }

    #[test]
    fn derivative_plus_one_is_invertible_and_regularizing() {
        let op = templates::derivative_plus(&circle(), 1.0).unwrap();
        let c = fredholm_certificate(&op, &FredholmConfig::default()).unwrap();
        assert_eq!(c.per_level_kernel_dims(), vec![0, 0, 0, 0]);
        assert_eq!(c.index, Some(0));
        assert!(c.level_regularity_ok, "{:?}", c.regularity);
    }

    #[test]
    fn derivative_has_constant_kernel_and_cokernel() {
        let op = templates::derivative_plus(&circle(), 0.0).unwrap();
        let c = fredholm_certificate(&op, &FredholmConfig::default()).unwrap();
        assert_eq!((c.kernel_dim, c.cokernel_dim, c.index), (1, 1, Some(0)));
        assert!(c.kernels_agree);
        assert!(c.accepted, "{c:?}");
    }

    #[test]
    fn ambiguous_cluster_is_an_error() {
        let s = circle();
        let op = templates::diagonal("near-singular", &s, 0, |n| if n == 5 { 3e-8 } else { 1.0 });
        let r = fredholm_certificate(&op, &FredholmConfig::default());
        assert!(matches!(r, Err(ScError::AmbiguousRank { .. })));
    }

    #[test]
    fn zero_perturbation_keeps_the_certificate() {
        let op = templates::derivative_plus(&circle(), 1.0).unwrap();
        let zero = templates::zero(op.domain(), op.target(), 1);
        let rep =
            perturbation_stability(&op, &|_| Ok(zero.clone()), 2, 1, &FredholmConfig::default())
                .unwrap();
        assert!(rep.all_passed);
        assert!(rep
            .trials
            .iter()
            .all(|t| t.kernel_dims == rep.base.per_level_kernel_dims()));
    }

    #[test]
    fn killing_the_cokernel_keeps_index_zero() {
        let s = circle();
        let op = templates::derivative_plus(&s, 0.0).unwrap();
        let mut e0 = vec![0.0; 255];
        e0[0] = 1.0;
        let v: Vec<f64> = e0.iter().map(|x| 0.1 * x).collect();
        let kill = templates::smoothing(op.domain(), op.target(), vec![(e0, v)]).unwrap();
        let rep =
            perturbation_stability(&op, &|_| Ok(kill.clone()), 1, 0, &FredholmConfig::default())
                .unwrap();
        let t = &rep.trials[0];
        assert_eq!(t.index, Some(0));
        assert_eq!(t.kernel_dims, vec![0, 0, 0, 0]);
        assert_eq!(t.cokernel_dim, Some(0));
    }
}
