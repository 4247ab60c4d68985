use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::quadrant::PartialQuadrant;
use crate::diff::{CertifyConfig, Compose, OperatorMap, ScMap};
use crate::linear::templates;
use crate::retract::{check_retract_map, check_retraction, RetractModel};
use crate::{Result, ScError, TruncatedScale};

/// A chart `φ: X ⊃ V → O ⊂ C` of a space with local coordinates on `X`,
/// together with the retraction onto `O` and a left inverse `ψ` on `O`.
#[derive(Clone)]
pub struct Chart {
    pub label: String,
    pub quadrant: PartialQuadrant,
    pub retraction: RetractModel,
    pub phi: Arc<dyn ScMap>,
    pub psi: Arc<dyn ScMap>,
}

impl core::fmt::Debug for Chart {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Chart")
            .field("label", &self.label)
            .field("quadrant", &self.quadrant)
            .finish()
    }
}

impl Chart {
    fn chart_error(&self, reason: impl ToString) -> ScError {
        ScError::Chart {
            label: self.label.clone(),
            reason: reason.to_string(),
        }
    }

    /// `φ(x)`, with failures reported against the chart label.
    pub fn image(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.phi.eval(x).map_err(|e| self.chart_error(e))
    }
}

/// `d_C(φ(x))` for one chart.
pub fn chart_degeneracy(x: &[f64], chart: &Chart) -> Result<usize> {
    let y = chart.image(x)?;
    chart
        .quadrant
        .degeneracy_index(&y)
        .map_err(|e| chart.chart_error(e))
}

/// `min_φ d_C(φ(x))` over the supplied charts.
pub fn min_degeneracy(x: &[f64], charts: &[Chart]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for c in charts {
        let d = chart_degeneracy(x, c)?;
        best = Some(best.map_or(d, |b| b.min(d)));
    }
    best.ok_or_else(|| ScError::Precondition("no charts supplied".into()))
}

fn matrix_map(name: &str, rows: usize, cols: usize, entries: &[f64]) -> Result<Arc<dyn ScMap>> {
    let m = DMatrix::from_row_slice(rows, cols, entries);
    let op = templates::matrix(
        &TruncatedScale::constant(cols, 3),
        &TruncatedScale::constant(rows, 3),
        m,
    )?;
    Ok(Arc::new(OperatorMap::new(op.renamed(name))))
}

/// The chart `φ_a(x) = (x, a x)` of `[0,∞)` onto the line `L_a ⊂ [0,∞)²`
/// with the orthogonal retraction `r_a(x, y) = ((x + a y)/(1 + a²))(1, a)`.
pub fn la_chart(a: f64) -> Result<Chart> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(ScError::Domain(format!(
            "slope {a} must be finite and nonnegative"
        )));
    }
    let c = 1.0 / (1.0 + a * a);
    let r = matrix_map(&format!("r_{a}"), 2, 2, &[c, a * c, a * c, a * a * c])?;
    let retraction = check_retraction(r, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.3, 2.0]], 1e-12)?;
    Ok(Chart {
        label: format!("φ_{a}"),
        quadrant: PartialQuadrant::new(2),
        retraction,
        phi: matrix_map(&format!("φ_{a}"), 2, 1, &[1.0, a])?,
        psi: matrix_map(&format!("ψ_{a}"), 1, 2, &[c, a * c])?,
    })
}

/// The identity chart of `[0,∞)`.
pub fn half_line_chart() -> Result<Chart> {
    let id = matrix_map("id", 1, 1, &[1.0])?;
    Ok(Chart {
        label: "id".into(),
        quadrant: PartialQuadrant::new(1),
        retraction: check_retraction(id.clone(), &[vec![1.0]], 0.0)?,
        phi: id.clone(),
        psi: id,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AtlasPair {
    pub from: String,
    pub to: String,
    pub samples: usize,
    pub max_containment: f64,
    pub certified: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AtlasReport {
    pub charts: Vec<String>,
    pub pairs: Vec<AtlasPair>,
    pub seed: u64,
    pub compatible: bool,
}

/// Sampled compatibility of every ordered pair of charts: the transition
/// `φ_j∘ψ_i` must map `O_i` into `O_j` and certify sc¹ through its
/// decompression by `r_i`. `samples` are points of `X` in every chart
/// domain.
pub fn check_atlas(
    charts: &[Chart],
    samples: &[Vec<f64>],
    m_max: usize,
    config: &CertifyConfig,
) -> Result<AtlasReport> {
    if samples.is_empty() && charts.len() > 1 {
        return Err(ScError::Precondition(
            "atlas check needs overlap samples".into(),
        ));
    }
    let mut pairs = Vec::new();
    for (i, ci) in charts.iter().enumerate() {
        for (j, cj) in charts.iter().enumerate() {
            if i == j {
                continue;
            }
            let transition: Arc<dyn ScMap> = Arc::new(Compose::new(ci.psi.clone(), cj.phi.clone()));
            let outcome = samples
                .iter()
                .map(|x| ci.image(x))
                .collect::<Result<Vec<_>>>()
                .and_then(|pts| {
                    check_retract_map(
                        transition,
                        &ci.retraction,
                        &cj.retraction,
                        &pts,
                        m_max,
                        config,
                        None,
                    )
                });
            pairs.push(match outcome {
                Ok(rep) => AtlasPair {
                    from: ci.label.clone(),
                    to: cj.label.clone(),
                    samples: samples.len(),
                    max_containment: rep.containment.iter().copied().fold(0.0, f64::max),
                    certified: rep.accepted,
                    failure: (!rep.accepted).then(|| "transition not certified sc¹".to_string()),
                },
                Err(e) => AtlasPair {
                    from: ci.label.clone(),
                    to: cj.label.clone(),
                    samples: samples.len(),
                    max_containment: f64::NAN,
                    certified: false,
                    failure: Some(e.to_string()),
                },
            });
        }
    }
    let compatible = pairs.iter().all(|p| p.certified);
    Ok(AtlasReport {
        charts: charts.iter().map(|c| c.label.clone()).collect(),
        pairs,
        seed: config.seed,
        compatible,
    })
}
