use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SVD};

use crate::linalg::{self, RankPolicy};
use crate::scale::TruncatedScale;
use crate::{Result, ScError};

/// Square block-diagonal matrix with consecutive diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    blocks: Vec<DMatrix<f64>>,
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<DMatrix<f64>>) -> Self {
        debug_assert!(blocks.iter().all(|b| b.is_square()));
        Self { blocks }
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    fn same_partition(&self, other: &Self) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.nrows() == b.nrows())
    }
}

/// Matrix of an operator at one truncation. Block-diagonal and low-rank
/// structure is kept through weighting so that large models stay cheap.
#[derive(Debug, Clone, PartialEq)]
pub enum Assembled {
    Blocks(BlockDiagonal),
    Dense(DMatrix<f64>),
    /// `left · rightᵀ`.
    LowRank {
        left: DMatrix<f64>,
        right: DMatrix<f64>,
    },
}

/// Singular values together with the numerical rank and, on request, an
/// orthonormal kernel basis.
#[derive(Debug, Clone)]
pub struct RankDecomposition {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub kernel: Option<DMatrix<f64>>,
}

impl Assembled {
    pub fn diagonal(d: &[f64]) -> Self {
        Self::Blocks(BlockDiagonal::new(
            d.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect(),
        ))
    }

    pub fn low_rank(left: DMatrix<f64>, right: DMatrix<f64>) -> Self {
        debug_assert_eq!(left.ncols(), right.ncols());
        Self::LowRank { left, right }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::Blocks(b) => (b.dim(), b.dim()),
            Self::Dense(m) => m.shape(),
            Self::LowRank { left, right } => (left.nrows(), right.nrows()),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Blocks(b) => {
                let n = b.dim();
                let mut out = DMatrix::zeros(n, n);
                let mut at = 0;
                for blk in &b.blocks {
                    let k = blk.nrows();
                    out.view_mut((at, at), (k, k)).copy_from(blk);
                    at += k;
                }
                out
            }
            Self::LowRank { left, right } => left * right.transpose(),
        }
    }

    /// `diag(left) · A · diag(right)`.
    pub fn scaled(&self, left: &[f64], right: &[f64]) -> Self {
        match self {
            Self::Dense(m) => Self::Dense(linalg::scale_rows_cols(m, left, right)),
            Self::Blocks(b) => {
                let mut at = 0;
                let blocks = b
                    .blocks
                    .iter()
                    .map(|blk| {
                        let k = blk.nrows();
                        let out =
                            linalg::scale_rows_cols(blk, &left[at..at + k], &right[at..at + k]);
                        at += k;
                        out
                    })
                    .collect();
                Self::Blocks(BlockDiagonal::new(blocks))
            }
            Self::LowRank { left: l, right: r } => Self::LowRank {
                left: DMatrix::from_fn(l.nrows(), l.ncols(), |i, j| left[i] * l[(i, j)]),
                right: DMatrix::from_fn(r.nrows(), r.ncols(), |i, j| right[i] * r[(i, j)]),
            },
        }
    }

    /// All singular values, decreasing.
    pub fn singular_values(&self) -> Vec<f64> {
        match self {
            Self::Dense(m) => linalg::singular_values(m),
            Self::Blocks(b) => {
                let mut sv: Vec<f64> = b.blocks.iter().flat_map(block_singular_values).collect();
                sv.sort_by(|x, y| y.total_cmp(x));
                sv
            }
            Self::LowRank { left, right } => {
                let (rows, cols) = self.shape();
                let full = rows.min(cols);
                if left.ncols() >= full {
                    return linalg::singular_values(&self.to_dense());
                }
                let mut sv = linalg::singular_values(&low_rank_core(left, right));
                sv.resize(full, 0.0);
                sv
            }
        }
    }

    pub fn spectral_norm(&self) -> f64 {
        match self {
            Self::Dense(m) => linalg::spectral_norm(m),
            Self::Blocks(b) => b
                .blocks
                .iter()
                .map(|blk| block_singular_values(blk)[0])
                .fold(0.0, f64::max),
            Self::LowRank { .. } => self.singular_values().first().copied().unwrap_or(0.0),
        }
    }

    /// Numerical rank under `policy`; the kernel basis is computed only when
    /// `with_kernel` is set since it needs right singular vectors.
    pub fn rank_decomposition(
        &self,
        policy: &RankPolicy,
        with_kernel: bool,
    ) -> Result<RankDecomposition> {
        let cols = self.shape().1;
        if let Self::Blocks(b) = self {
            // per-block SVD with one global threshold
            let mut entries: Vec<(f64, usize, DVector<f64>)> = Vec::with_capacity(cols);
            let mut at = 0;
            for blk in &b.blocks {
                let k = blk.nrows();
                if k == 1 {
                    entries.push((blk[(0, 0)].abs(), at, DVector::from_element(1, 1.0)));
                } else {
                    let svd = SVD::new(blk.clone(), false, true);
                    let v_t = svd.v_t.as_ref().expect("requested V");
                    for (i, s) in svd.singular_values.iter().enumerate() {
                        entries.push((*s, at, v_t.row(i).transpose()));
                    }
                }
                at += k;
            }
            entries.sort_by(|x, y| y.0.total_cmp(&x.0));
            let sv: Vec<f64> = entries.iter().map(|e| e.0).collect();
            let rank = policy.rank(&sv)?;
            let kernel = with_kernel.then(|| {
                let cols_vec: Vec<DVector<f64>> = entries[rank..]
                    .iter()
                    .map(|(_, offset, v)| {
                        let mut full = DVector::zeros(cols);
                        full.rows_mut(*offset, v.len()).copy_from(v);
                        full
                    })
                    .collect();
                if cols_vec.is_empty() {
                    DMatrix::zeros(cols, 0)
                } else {
                    DMatrix::from_columns(&cols_vec)
                }
            });
            return Ok(RankDecomposition {
                singular_values: sv,
                rank,
                kernel,
            });
        }
        let sv = self.singular_values();
        let rank = policy.rank(&sv)?;
        let kernel = if with_kernel {
            if rank == cols {
                Some(DMatrix::zeros(cols, 0))
            } else {
                Some(linalg::null_space(&self.to_dense(), policy)?)
            }
        } else {
            None
        };
        Ok(RankDecomposition {
            singular_values: sv,
            rank,
            kernel,
        })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Dense(m) => (m * nalgebra::DVector::from_column_slice(x))
                .as_slice()
                .to_vec(),
            Self::Blocks(b) => {
                let mut out = Vec::with_capacity(x.len());
                let mut at = 0;
                for blk in &b.blocks {
                    let k = blk.nrows();
                    for i in 0..k {
                        out.push((0..k).map(|j| blk[(i, j)] * x[at + j]).sum());
                    }
                    at += k;
                }
                out
            }
            Self::LowRank { left, right } => {
                let coeffs = right.transpose() * DVector::from_column_slice(x);
                (left * coeffs).as_slice().to_vec()
            }
        }
    }

    /// `A · M` for a matrix `M` with as many rows as `A` has columns.
    pub fn apply_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Self::Dense(a) => a * m,
            Self::LowRank { left, right } => left * (right.transpose() * m),
            Self::Blocks(_) => {
                let cols: Vec<DVector<f64>> = m
                    .column_iter()
                    .map(|c| DVector::from_vec(self.apply(c.as_slice())))
                    .collect();
                DMatrix::from_columns(&cols)
            }
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            Self::Dense(a) => Self::Dense(a.transpose()),
            Self::LowRank { left, right } => Self::LowRank {
                left: right.clone(),
                right: left.clone(),
            },
            Self::Blocks(b) => Self::Blocks(BlockDiagonal::new(
                b.blocks.iter().map(|x| x.transpose()).collect(),
            )),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(ScError::Shape {
                expected: self.shape().0,
                found: other.shape().0,
            });
        }
        Ok(match (self, other) {
            (Self::Blocks(a), Self::Blocks(b)) if a.same_partition(b) => Self::Blocks(
                BlockDiagonal::new(a.blocks.iter().zip(&b.blocks).map(|(x, y)| x + y).collect()),
            ),
            (
                Self::LowRank {
                    left: l1,
                    right: r1,
                },
                Self::LowRank {
                    left: l2,
                    right: r2,
                },
            ) => Self::LowRank {
                left: hstack(l1, l2),
                right: hstack(r1, r2),
            },
            _ => Self::Dense(self.to_dense() + other.to_dense()),
        })
    }

    pub fn scale(&self, alpha: f64) -> Self {
        match self {
            Self::Dense(m) => Self::Dense(m * alpha),
            Self::Blocks(b) => Self::Blocks(BlockDiagonal::new(
                b.blocks.iter().map(|x| x * alpha).collect(),
            )),
            Self::LowRank { left, right } => Self::LowRank {
                left: left * alpha,
                right: right.clone(),
            },
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.shape().1 != inner.shape().0 {
            return Err(ScError::Shape {
                expected: self.shape().1,
                found: inner.shape().0,
            });
        }
        Ok(match (self, inner) {
            (Self::Blocks(a), Self::Blocks(b)) if a.same_partition(b) => Self::Blocks(
                BlockDiagonal::new(a.blocks.iter().zip(&b.blocks).map(|(x, y)| x * y).collect()),
            ),
            (Self::LowRank { left, right }, _) => Self::LowRank {
                left: left.clone(),
                right: inner.transpose().apply_matrix(right),
            },
            (_, Self::LowRank { left, right }) => Self::LowRank {
                left: self.apply_matrix(left),
                right: right.clone(),
            },
            _ => Self::Dense(self.to_dense() * inner.to_dense()),
        })
    }
}

fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `R_l R_rᵀ` from thin QR factors; it has the nonzero singular values of
/// `left · rightᵀ`.
fn low_rank_core(left: &DMatrix<f64>, right: &DMatrix<f64>) -> DMatrix<f64> {
    let rl = left.clone().qr().r();
    let rr = right.clone().qr().r();
    rl * rr.transpose()
}

fn block_singular_values(b: &DMatrix<f64>) -> Vec<f64> {
    if b.nrows() == 1 {
        return alloc::vec![b[(0, 0)].abs()];
    }
    linalg::singular_values(b)
}

/// Rule producing the matrix of an operator at truncation `N`.
pub type Assembler = Arc<dyn Fn(usize) -> Result<Assembled> + Send + Sync>;

/// Linear operator between two truncated scales.
///
/// `declared_shift` is 0 for sc-operator candidates and 1 for sc⁺
/// candidates, which should map level `m` boundedly into target level
/// `m + 1`.
#[derive(Clone)]
pub struct ScOperator {
    name: String,
    domain: TruncatedScale,
    target: TruncatedScale,
    declared_shift: usize,
    assembler: Assembler,
}

impl core::fmt::Debug for ScOperator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ScOperator")
            .field("name", &self.name)
            .field("declared_shift", &self.declared_shift)
            .finish_non_exhaustive()
    }
}

impl ScOperator {
    pub fn new(
        name: impl Into<String>,
        domain: TruncatedScale,
        target: TruncatedScale,
        declared_shift: usize,
        assembler: Assembler,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            target,
            declared_shift,
            assembler,
        }
    }

    pub fn from_fn(
        name: impl Into<String>,
        domain: TruncatedScale,
        target: TruncatedScale,
        declared_shift: usize,
        f: impl Fn(usize) -> Result<Assembled> + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, domain, target, declared_shift, Arc::new(f))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &TruncatedScale {
        &self.domain
    }

    pub fn target(&self) -> &TruncatedScale {
        &self.target
    }

    pub fn declared_shift(&self) -> usize {
        self.declared_shift
    }

    pub fn with_declared_shift(mut self, shift: usize) -> Self {
        self.declared_shift = shift;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Matrix at truncation `n`, shape-checked against both scales.
    pub fn assemble(&self, n: usize) -> Result<Assembled> {
        let a = (self.assembler)(n)?;
        let expected = (self.target.dim(n), self.domain.dim(n));
        if a.shape() != expected {
            return Err(ScError::Shape {
                expected: expected.0 * expected.1,
                found: a.shape().0 * a.shape().1,
            });
        }
        Ok(a)
    }

    /// `W_target^{m_to} · A_N · W_domain^{-m_from}`: the level
    /// `(m_from → m_to)` operator in Euclidean coordinates.
    pub fn weighted(&self, m_from: usize, m_to: usize, n: usize) -> Result<Assembled> {
        self.domain.check_level(m_from)?;
        self.target.check_level(m_to)?;
        let a = self.assemble(n)?;
        let left = self.target.level_weights(m_to as i32, n);
        let right = self.domain.inverse_level_weights(m_from, n);
        Ok(a.scaled(&left, &right))
    }

    /// Spectral norm of the level `(m_from → m_to)` operator at truncation
    /// `n`.
    pub fn level_operator_norm(&self, m_from: usize, m_to: usize, n: usize) -> Result<f64> {
        self.domain.check_on_ladder(n)?;
        self.target.check_on_ladder(n)?;
        Ok(self.weighted(m_from, m_to, n)?.spectral_norm())
    }

    pub fn apply(&self, x: &[f64]) -> Result<alloc::vec::Vec<f64>> {
        let n = self.domain.truncation_of(x.len())?;
        Ok(self.assemble(n)?.apply(x))
    }

    /// `self + other` on identical scales; sc⁺ only if both summands are.
    pub fn plus(&self, other: &ScOperator) -> Result<ScOperator> {
        if self.domain != other.domain || self.target != other.target {
            return Err(ScError::Precondition(format!(
                "cannot add `{}` and `{}`: scales differ",
                self.name, other.name
            )));
        }
        let (a, b) = (self.assembler.clone(), other.assembler.clone());
        Ok(ScOperator::from_fn(
            format!("{} + {}", self.name, other.name),
            self.domain.clone(),
            self.target.clone(),
            self.declared_shift.min(other.declared_shift),
            move |n| a(n)?.add(&b(n)?),
        ))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ScOperator) -> ScOperator {
        let (a, b) = (self.assembler.clone(), inner.assembler.clone());
        ScOperator::from_fn(
            format!("{} ∘ {}", self.name, inner.name),
            inner.domain.clone(),
            self.target.clone(),
            self.declared_shift.max(inner.declared_shift),
            move |n| a(n)?.compose(&b(n)?),
        )
    }

    pub fn scaled(&self, alpha: f64) -> ScOperator {
        let a = self.assembler.clone();
        ScOperator::from_fn(
            format!("{alpha}·{}", self.name),
            self.domain.clone(),
            self.target.clone(),
            self.declared_shift,
            move |n| Ok(a(n)?.scale(alpha)),
        )
    }
}
