//! Named operators, maps and retractions that configurations refer to.

use std::sync::Arc;

use anyhow::{bail, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use sclab_core::diff::{Coefficientwise, FnMap, Nonlinearity, OperatorMap, PolynomialMap, ScMap};
use sclab_core::linear::{templates, ScOperator};
use sclab_core::retract::{JumpingSplicing, SplicingRetraction};
use sclab_core::TruncatedScale;

use crate::formats::GridSpec;

/// Linear operators on a single truncated scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "kebab-case")]
pub enum OperatorTemplate {
    Identity,
    Zero,
    /// `E¹ → E`.
    Inclusion,
    /// `diag(w^power)`.
    WeightPower {
        power: i32,
    },
    /// `d/dt + c` from `E¹` to `E`.
    DerivativePlus {
        c: f64,
    },
    ShiftMultiplier {
        tau: f64,
    },
}

impl OperatorTemplate {
    pub fn build(&self, scale: &TruncatedScale) -> Result<ScOperator> {
        Ok(match self {
            Self::Identity => templates::identity(scale),
            Self::Zero => templates::zero(scale, scale, 0),
            Self::Inclusion => templates::inclusion(scale),
            Self::WeightPower { power } => templates::weight_power(scale, *power, 0),
            Self::DerivativePlus { c } => templates::derivative_plus(scale, *c)?,
            Self::ShiftMultiplier { tau } => templates::shift_multiplier(scale, *tau)?,
        })
    }
}

/// Nonlinear maps of a circle scale into itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "kebab-case")]
pub enum MapTemplate {
    /// `v ↦ Σ coeffs[k] v^k`, pointwise on the circle.
    Polynomial {
        coeffs: Vec<f64>,
    },
    Coefficientwise {
        nonlinearity: Nonlinearity,
    },
    Operator {
        operator: OperatorTemplate,
    },
}

impl MapTemplate {
    pub fn build(&self, scale: &TruncatedScale) -> Result<Arc<dyn ScMap>> {
        Ok(match self {
            Self::Polynomial { coeffs } => Arc::new(PolynomialMap::new(scale, coeffs.clone())?),
            Self::Coefficientwise { nonlinearity } => {
                Arc::new(Coefficientwise::new(*nonlinearity, scale))
            }
            Self::Operator { operator } => Arc::new(OperatorMap::new(operator.build(scale)?)),
        })
    }
}

/// Retractions of finite-dimensional model spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "kebab-case")]
pub enum RetractionTemplate {
    /// Orthogonal projection of `ℝ²` onto the line `L_a = ℝ(1, a)`.
    LaProjector {
        a: f64,
    },
    /// `(x, y) ↦ (x, x²)`.
    GraphSquare,
    /// Keeps the listed coordinates of `ℝ^dim` and zeroes the rest.
    CoordinateProjector {
        dim: usize,
        keep: Vec<usize>,
    },
    Identity {
        dim: usize,
    },
    /// `r_π(t, f) = (t, π_t f)` for the jumping splicing on a line grid.
    SplicingJump {
        grid: GridSpec,
    },
}

/// Levels modeled on constant scales; every level agrees there.
const CONSTANT_LEVELS: usize = 3;

impl RetractionTemplate {
    pub fn dim(&self) -> usize {
        match self {
            Self::LaProjector { .. } | Self::GraphSquare => 2,
            Self::CoordinateProjector { dim, .. } | Self::Identity { dim } => *dim,
            Self::SplicingJump { grid } => 1 + grid.grid_size,
        }
    }

    pub fn build(&self) -> Result<Arc<dyn ScMap>> {
        let s = TruncatedScale::constant(self.dim(), CONSTANT_LEVELS);
        Ok(match self {
            Self::LaProjector { a } => {
                if !a.is_finite() {
                    bail!("slope {a} must be finite");
                }
                let c = 1.0 / (1.0 + a * a);
                let m = DMatrix::from_row_slice(2, 2, &[c, a * c, a * c, a * a * c]);
                Arc::new(OperatorMap::new(
                    templates::matrix(&s, &s, m)?.renamed(format!("r_{a}")),
                ))
            }
            Self::GraphSquare => Arc::new(
                FnMap::new("graph of x²", s.clone(), s, |z| {
                    Ok(vec![z[0], z[0] * z[0]])
                })
                .with_derivative(|z, xi| Ok(vec![xi[0], 2.0 * z[0] * xi[0]]))
                .with_second_derivative(|_, xi, eta| Ok(vec![0.0, 2.0 * xi[0] * eta[0]])),
            ),
            Self::CoordinateProjector { dim, keep } => {
                if let Some(i) = keep.iter().find(|&&i| i >= *dim) {
                    bail!("coordinate {i} out of range for dimension {dim}");
                }
                let d: Vec<f64> = (0..*dim)
                    .map(|i| if keep.contains(&i) { 1.0 } else { 0.0 })
                    .collect();
                let op = templates::matrix(
                    &s,
                    &s,
                    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)),
                )?;
                Arc::new(OperatorMap::new(
                    op.renamed(format!("projector onto {keep:?}")),
                ))
            }
            Self::Identity { .. } => Arc::new(OperatorMap::new(templates::identity(&s))),
            Self::SplicingJump { grid } => {
                let family = Arc::new(JumpingSplicing::new(grid.build()?)?);
                Arc::new(SplicingRetraction::new(family, CONSTANT_LEVELS))
            }
        })
    }
}

pub struct TemplateInfo {
    pub kind: &'static str,
    pub name: &'static str,
    pub params: &'static str,
    pub description: &'static str,
}

pub const REGISTRY: &[TemplateInfo] = &[
    TemplateInfo {
        kind: "operator",
        name: "identity",
        params: "",
        description: "identity of the scale",
    },
    TemplateInfo {
        kind: "operator",
        name: "zero",
        params: "",
        description: "zero operator",
    },
    TemplateInfo {
        kind: "operator",
        name: "inclusion",
        params: "",
        description: "inclusion E^1 -> E",
    },
    TemplateInfo {
        kind: "operator",
        name: "weight-power",
        params: "power: i32",
        description: "diag(w_n^power)",
    },
    TemplateInfo {
        kind: "operator",
        name: "derivative-plus",
        params: "c: f64",
        description: "d/dt + c from E^1 to E on the circle",
    },
    TemplateInfo {
        kind: "operator",
        name: "shift-multiplier",
        params: "tau: f64",
        description: "translation v -> v(. + tau) on the circle",
    },
    TemplateInfo {
        kind: "map",
        name: "polynomial",
        params: "coeffs: [f64]",
        description: "pointwise polynomial sum coeffs[k] v^k on the circle",
    },
    TemplateInfo {
        kind: "map",
        name: "coefficientwise",
        params: "nonlinearity: sign | signed_square | abs",
        description: "coefficientwise scalar nonlinearity",
    },
    TemplateInfo {
        kind: "map",
        name: "operator",
        params: "operator: <operator template>",
        description: "linear operator viewed as a map",
    },
    TemplateInfo {
        kind: "retraction",
        name: "la-projector",
        params: "a: f64",
        description: "orthogonal projection of R^2 onto the line R(1, a)",
    },
    TemplateInfo {
        kind: "retraction",
        name: "graph-square",
        params: "",
        description: "(x, y) -> (x, x^2) on R^2",
    },
    TemplateInfo {
        kind: "retraction",
        name: "coordinate-projector",
        params: "dim: usize, keep: [usize]",
        description: "keeps the listed coordinates of R^dim",
    },
    TemplateInfo {
        kind: "retraction",
        name: "identity",
        params: "dim: usize",
        description: "identity of R^dim",
    },
    TemplateInfo {
        kind: "retraction",
        name: "splicing-jump",
        params: "grid: {half_width, grid_size, delta?, max_level?}",
        description:
            "(t, f) -> (t, pi_t f) for the jumping splicing, rank 0 for t <= 0 and 1 for t > 0",
    },
    TemplateInfo {
        kind: "chart",
        name: "la-chart",
        params: "slope a >= 0 (degeneracy.chart_slopes)",
        description: "x -> (x, a x) from [0, inf) into [0, inf)^2",
    },
    TemplateInfo {
        kind: "chart",
        name: "identity-chart",
        params: "degeneracy.identity_chart = true",
        description: "identity chart of [0, inf)",
    },
];
