use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::operator::{Assembled, ScOperator};
use crate::linalg::{self, RankPolicy};
use crate::scale::{RegularityConfig, TruncatedScale};
use crate::{rng, Result, ScError};

/// Finite-dimensional subspace of a truncated scale spanned by coefficient
/// vectors. The vectors may be given at any truncation; they are cut or
/// zero-padded to the truncation at hand.
#[derive(Debug, Clone, PartialEq)]
pub struct ScSubspace {
    ambient: TruncatedScale,
    basis: Vec<Vec<f64>>,
}

impl ScSubspace {
    /// Checks linear independence at the given length.
    pub fn new(ambient: TruncatedScale, basis: Vec<Vec<f64>>) -> Result<Self> {
        for b in &basis {
            ambient.truncation_of(b.len())?;
        }
        let out = Self { ambient, basis };
        if let Some(first) = out.basis.first() {
            let n = out.ambient.truncation_of(first.len())?;
            out.basis_matrix(n)?;
        }
        Ok(out)
    }

    /// The zero subspace.
    pub fn trivial(ambient: TruncatedScale) -> Self {
        Self {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn ambient(&self) -> &TruncatedScale {
        &self.ambient
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis vectors as columns at truncation `n`; errors if they are not
    /// independent there.
    pub fn basis_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        let rows = self.ambient.dim(n);
        if self.basis.is_empty() {
            return Ok(DMatrix::zeros(rows, 0));
        }
        let cols = self
            .basis
            .iter()
            .map(|b| self.ambient.restrict(b, n).map(DVector::from_vec))
            .collect::<Result<Vec<_>>>()?;
        let m = DMatrix::from_columns(&cols);
        let rank = RankPolicy::default()
            .rank(&linalg::singular_values(&m))
            .unwrap_or(0);
        if rank < self.basis.len() {
            return Err(ScError::DegenerateBasis {
                rank,
                expected: self.basis.len(),
            });
        }
        Ok(m)
    }

    /// Orthonormal basis of `W^m K` at truncation `n`, i.e. of `K` in the
    /// level-`m` inner product expressed in Euclidean coordinates.
    pub fn level_orthonormal_basis(&self, m: usize, n: usize) -> Result<DMatrix<f64>> {
        let b = self.basis_matrix(n)?;
        if b.ncols() == 0 {
            return Ok(b);
        }
        let w = self.ambient.level_weights(m as i32, n);
        let wb = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| w[i] * b[(i, j)]);
        Ok(linalg::orthonormalize(&wb))
    }

    /// Every basis vector estimated smooth, or regular more than one level
    /// beyond the top level of the ambient scale. A short tail cannot tell
    /// fast geometric decay from a steep power law, so the latter counts as
    /// smooth for every modeled level.
    pub fn is_smooth(&self, config: &RegularityConfig) -> Result<bool> {
        let bound = self.ambient.max_level() as f64 + 1.0;
        for b in &self.basis {
            if self.ambient.estimate_regularity(b, config)?.level <= bound {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Projection `P = Q Qᵀ` onto a finite-dimensional subspace of smooth
/// vectors, `Q` an orthonormal basis in the level-0 inner product. Its
/// kernel is the level-0 orthogonal complement `G`, and `E_m = K ⊕ G_m` on
/// every level.
pub fn build_sc_projection(k: &ScSubspace, config: &RegularityConfig) -> Result<ScOperator> {
    if !k.is_smooth(config)? {
        return Err(ScError::Precondition(
            "projection basis contains a non-smooth vector".into(),
        ));
    }
    let sub = k.clone();
    let dim = k.dim();
    Ok(ScOperator::from_fn(
        format!("projection(rank {dim})"),
        k.ambient().clone(),
        k.ambient().clone(),
        0,
        move |n| {
            let q = sub.level_orthonormal_basis(0, n)?;
            Ok(Assembled::low_rank(q.clone(), q))
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProjectionReport {
    pub truncation: usize,
    /// `‖P² − P‖₂`.
    pub idempotency: f64,
    pub rank: usize,
    pub complement_rank: usize,
    /// Largest `|x − Px − (1−P)x|` over the samples.
    pub splitting_residual: f64,
    /// Largest distance of `Px` from span K over the samples.
    pub image_residual: f64,
}

/// Idempotency, rank counts and the splitting `x = Px + (1−P)x` of sampled
/// vectors at truncation `n`.
pub fn verify_projection<R: Rng + ?Sized>(
    p: &ScOperator,
    k: &ScSubspace,
    n: usize,
    samples: usize,
    rng: &mut R,
) -> Result<ProjectionReport> {
    let a = p.assemble(n)?;
    let dense = a.to_dense();
    let idempotency = linalg::spectral_norm(&(&dense * &dense - &dense));
    let policy = RankPolicy::default();
    let rank = a.rank_decomposition(&policy, false)?.rank;
    let dim = dense.nrows();
    let complement = DMatrix::identity(dim, dim) - &dense;
    let complement_rank = policy.rank(&linalg::singular_values(&complement))?;
    let q = k.level_orthonormal_basis(0, n)?;
    let mut splitting_residual: f64 = 0.0;
    let mut image_residual: f64 = 0.0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..dim).map(|_| rng::symmetric(rng)).collect();
        let px = a.apply(&x);
        let qx: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
        let res = x
            .iter()
            .zip(&px)
            .zip(&qx)
            .map(|((a, b), c)| (a - b - c).abs())
            .fold(0.0, f64::max);
        splitting_residual = splitting_residual.max(res);
        let pv = DVector::from_vec(px);
        let off = &pv - &q * (q.transpose() * &pv);
        image_residual = image_residual.max(off.norm());
    }
    Ok(ProjectionReport {
        truncation: n,
        idempotency,
        rank,
        complement_rank,
        splitting_residual,
        image_residual,
    })
}
