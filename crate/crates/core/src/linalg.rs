//! Dense linear algebra helpers on top of nalgebra: singular values,
//! numerically unambiguous ranks, null spaces and principal angles.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SVD};
use num_traits::Float;

use crate::{Result, ScError};

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Rank decision parameters: singular values below `relative_threshold`
/// times the largest one count as zero; any ratio within half a decade of
/// the threshold on either side is ambiguous.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankPolicy {
    pub relative_threshold: f64,
    pub band_decades: f64,
    /// Below this largest singular value the matrix counts as zero.
    pub absolute_floor: f64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        Self {
            relative_threshold: 1e-8,
            band_decades: 1.0,
            absolute_floor: 1e-13,
        }
    }
}

impl RankPolicy {
    pub fn with_threshold(relative_threshold: f64) -> Self {
        Self {
            relative_threshold,
            ..Self::default()
        }
    }

    fn band(&self) -> (f64, f64) {
        let half = 10.0f64.powf(self.band_decades / 2.0);
        (
            self.relative_threshold / half,
            self.relative_threshold * half,
        )
    }

    /// Numerical rank of a decreasing list of singular values.
    pub fn rank(&self, sv: &[f64]) -> Result<usize> {
        let Some(&largest) = sv.first() else {
            return Ok(0);
        };
        if largest <= self.absolute_floor {
            return Ok(0);
        }
        let (lower, upper) = self.band();
        let mut rank = 0;
        for &s in sv {
            let ratio = s / largest;
            if ratio > lower && ratio < upper {
                return Err(ScError::AmbiguousRank {
                    ratio,
                    lower,
                    upper,
                });
            }
            if ratio >= upper {
                rank += 1;
            }
        }
        Ok(rank)
    }
}

/// Orthonormal basis (columns) of the null space of `m`.
pub fn null_space(m: &DMatrix<f64>, policy: &RankPolicy) -> Result<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    // pad to at least square so that V is complete
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let mut pairs: Vec<(f64, usize)> = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sv: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rank = policy.rank(&sv)?;
    let kernel: Vec<DVector<f64>> = pairs[rank..]
        .iter()
        .map(|&(_, i)| v_t.row(i).transpose())
        .collect();
    Ok(columns(cols, &kernel))
}

/// Orthonormal basis of the column space of `m` at the given policy.
pub fn column_space(m: &DMatrix<f64>, policy: &RankPolicy) -> Result<DMatrix<f64>> {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Ok(DMatrix::zeros(rows, 0));
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.as_ref().expect("requested U");
    let mut pairs: Vec<(f64, usize)> = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sv: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rank = policy.rank(&sv)?;
    let image: Vec<DVector<f64>> = pairs[..rank]
        .iter()
        .map(|&(_, i)| u.column(i).into_owned())
        .collect();
    Ok(columns(rows, &image))
}

fn columns(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    if cols.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(cols)
    }
}

/// Thin orthonormal basis of the span of the columns (assumed independent).
pub fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return m.clone();
    }
    m.clone().qr().q()
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal column bases. Subspaces of different dimension are at
/// distance one.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let residual = b - a * (a.transpose() * b);
    spectral_norm(&residual).min(1.0)
}

/// Minimum-norm least-squares solution of `m x = y`.
pub fn least_squares(
    m: &DMatrix<f64>,
    y: &DVector<f64>,
    policy: &RankPolicy,
) -> Result<DVector<f64>> {
    let svd = SVD::new(m.clone(), true, true);
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (largest * policy.relative_threshold).max(policy.absolute_floor);
    svd.solve(y, eps)
        .map_err(|e| ScError::Evaluation(alloc::string::ToString::to_string(e)))
}

/// `diag(left) * m * diag(right)`.
pub fn scale_rows_cols(m: &DMatrix<f64>, left: &[f64], right: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| left[i] * m[(i, j)] * right[j])
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| alpha * a + b).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
