use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::retraction::jacobian;
use crate::diff::{fd_jacobian, FnMap, ScMap};
use crate::linalg::{self, sub, RankPolicy};
use crate::rng;
use crate::{Result, ScError};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CartanConfig {
    pub radius: f64,
    pub samples: usize,
    /// Tolerance on `|α(r(z)) − R α(z)|`.
    pub conjugation_tol: f64,
    /// Tolerance on `|dα(x) − 1|` measured by finite differences.
    pub derivative_tol: f64,
    /// Tolerance on `|R² − R|`.
    pub idempotency_tol: f64,
    /// Radius halvings before the chart is reported as failed.
    pub retries: usize,
    pub seed: u64,
}

impl Default for CartanConfig {
    fn default() -> Self {
        Self {
            radius: 0.1,
            samples: 200,
            conjugation_tol: 1e-8,
            derivative_tol: 1e-6,
            idempotency_tol: 1e-8,
            retries: 4,
            seed: 0,
        }
    }
}

/// Linearizing chart of a retraction near a fixed point: with `R = dr(x)`,
/// `α = β + R∘r`, `β = (1 − R)∘(1 − r)` (in coordinates centered at `x`)
/// conjugates `r` to `R`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CartanChart {
    pub base: Vec<f64>,
    /// `R = dr(x)`, row-major.
    #[cfg_attr(
        feature = "serde",
        serde(serialize_with = "crate::serde_ext::matrix_rows")
    )]
    pub r_matrix: DMatrix<f64>,
    pub idempotency_residual: f64,
    /// Orthonormal basis of `Fix R = im R` as columns.
    #[cfg_attr(
        feature = "serde",
        serde(serialize_with = "crate::serde_ext::matrix_rows")
    )]
    pub fix_basis: DMatrix<f64>,
    pub local_dimension: usize,
    /// Radius of the ball the residuals were sampled on.
    pub radius: f64,
    /// `sup |α(r(z)) − R α(z)|` over the sampled ball.
    pub conjugation_residual: f64,
    /// `max |dα(x) − 1|` entrywise, by central differences.
    pub derivative_residual: f64,
    /// `max |α(w) − w|` over the ball; zero for linear projectors.
    pub identity_residual: f64,
    /// Chart statement on samples: `sup |Rα(y) − α(y)|` for `y ∈ O` and
    /// `sup |r(z) − z|` for `z` with `α(z) ∈ Fix R`.
    pub chart_residual: f64,
    pub accepted: bool,
}

/// `α(z) = z + (2R − 1)(r(z) − R z)` in coordinates centered at `x`. With
/// `R² = R` this is `β + R∘r`; written through the remainder `r − R` it is
/// the identity, bit for bit, wherever `r` agrees with `R` exactly, as for
/// a linear projector at the origin.
fn alpha(r: &dyn ScMap, rm: &DMatrix<f64>, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let zc = DVector::from_vec(sub(z, x));
    let rzc = DVector::from_vec(sub(&r.eval(z)?, x));
    let d = &rzc - rm * &zc;
    let out = &zc + (rm * &d * 2.0 - &d);
    Ok(out.iter().zip(x).map(|(a, b)| a + b).collect())
}

fn apply(m: &DMatrix<f64>, x: &[f64], z: &[f64]) -> Vec<f64> {
    let c = m * DVector::from_vec(sub(z, x));
    c.iter().zip(x).map(|(a, b)| a + b).collect()
}

fn ball_point(x: &[f64], radius: f64, rng: &mut rng::SeededRng) -> Vec<f64> {
    let dir: Vec<f64> = x.iter().map(|_| rng::symmetric(rng)).collect();
    let norm = linalg::euclidean_norm(&dir).max(f64::MIN_POSITIVE);
    let scale = radius * rng::symmetric(rng).abs() / norm;
    x.iter().zip(&dir).map(|(a, d)| a + scale * d).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

/// Builds the Cartan chart of `r` at the fixed point `x` and measures the
/// conjugation on a ball, retrying on smaller balls when it fails.
///
/// An `R` that is not idempotent raises [`ScError::NotARetraction`].
pub fn cartan_chart(r: Arc<dyn ScMap>, x: &[f64], config: &CartanConfig) -> Result<CartanChart> {
    let fixed = max_abs(&sub(&r.eval(x)?, x));
    if fixed > config.idempotency_tol {
        return Err(ScError::Precondition(
            "base point is not fixed by the retraction".into(),
        ));
    }
    let rm = jacobian(&*r, x)?;
    let idempotency_residual = (&rm * &rm - &rm).abs().max();
    if idempotency_residual > config.idempotency_tol {
        return Err(ScError::NotARetraction {
            residual: idempotency_residual,
            sample: 0,
        });
    }
    let fix_basis = linalg::column_space(&rm, &RankPolicy::default())?;
    let local_dimension = fix_basis.ncols();

    let base = x.to_vec();
    let (r2, rm2, base2) = (r.clone(), rm.clone(), base.clone());
    let alpha_map = FnMap::new("α", r.domain().clone(), r.domain().clone(), move |z| {
        alpha(&*r2, &rm2, &base2, z)
    });
    let dalpha = fd_jacobian(&alpha_map, x, None)?;
    let n = x.len();
    let derivative_residual = (dalpha - DMatrix::<f64>::identity(n, n)).abs().max();

    let mut radius = config.radius;
    let mut attempt = 0;
    loop {
        let mut rng = rng::seeded(config.seed);
        let (mut conj, mut ident, mut chart) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..config.samples {
            let z = ball_point(x, radius, &mut rng);
            let a_z = alpha(&*r, &rm, x, &z)?;
            let a_rz = alpha(&*r, &rm, x, &r.eval(&z)?)?;
            conj = conj.max(max_abs(&sub(&a_rz, &apply(&rm, x, &a_z))));
            ident = ident.max(max_abs(&sub(&a_z, &z)));
            // α(O) ⊂ Fix R
            chart = chart.max(max_abs(&sub(&apply(&rm, x, &a_rz), &a_rz)));
            // α^{-1}(Fix R) ⊂ O: solve α(w) = R(z) by fixed-point iteration
            // (dα(x) = 1 makes it contract near x)
            let target = apply(&rm, x, &z);
            let mut w = target.clone();
            for _ in 0..50 {
                let step = sub(&alpha(&*r, &rm, x, &w)?, &target);
                w = sub(&w, &step);
                if max_abs(&step) < 1e-15 {
                    break;
                }
            }
            chart = chart.max(max_abs(&sub(&r.eval(&w)?, &w)));
        }
        let accepted = conj <= config.conjugation_tol
            && derivative_residual <= config.derivative_tol
            && chart <= config.conjugation_tol;
        if accepted || attempt >= config.retries {
            return Ok(CartanChart {
                base,
                r_matrix: rm,
                idempotency_residual,
                fix_basis,
                local_dimension,
                radius,
                conjugation_residual: conj,
                derivative_residual,
                identity_residual: ident,
                chart_residual: chart,
                accepted,
            });
        }
        radius *= 0.5;
        attempt += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::OperatorMap;
    use crate::linear::templates;
    use crate::TruncatedScale;
    use alloc::vec;

    fn r_a(a: f64) -> Arc<dyn ScMap> {
        let s = TruncatedScale::constant(2, 3);
        let c = 1.0 / (1.0 + a * a);
        let m = DMatrix::from_row_slice(2, 2, &[c, a * c, a * c, a * a * c]);
        Arc::new(OperatorMap::new(templates::matrix(&s, &s, m).unwrap()))
    }

    #[test]
    fn linear_projector_gives_the_identity_chart() {
        let chart = cartan_chart(r_a(1.0), &[0.0, 0.0], &CartanConfig::default()).unwrap();
        assert!(chart.accepted);
        assert_eq!(chart.identity_residual, 0.0);
        assert_eq!(chart.conjugation_residual, 0.0);
        assert_eq!(chart.local_dimension, 1);
        let b = chart.fix_basis.column(0);
        assert!((b[0] - b[1]).abs() < 1e-15);
    }

    #[test]
    fn non_dyadic_projectors_are_exact_too() {
        for a in [0.5, 2.0, 3.0] {
            let chart = cartan_chart(r_a(a), &[0.0, 0.0], &CartanConfig::default()).unwrap();
            assert_eq!(chart.identity_residual, 0.0, "a = {a}");
            assert!(chart.conjugation_residual <= 1e-15);
        }
    }

    #[test]
    fn graph_retraction_at_the_origin() {
        let s = TruncatedScale::constant(2, 3);
        let r: Arc<dyn ScMap> = Arc::new(FnMap::new("graph of x²", s.clone(), s, |z| {
            Ok(vec![z[0], z[0] * z[0]])
        }));
        let chart = cartan_chart(r, &[0.0, 0.0], &CartanConfig::default()).unwrap();
        assert!(chart.accepted, "{chart:?}");
        assert_eq!(chart.local_dimension, 1);
        assert!(
            (chart.r_matrix.clone() - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]))
                .abs()
                .max()
                < 1e-12
        );
        assert!(chart.conjugation_residual <= 1e-8);
        // α(x, y) = (x, y − x²) moves points off the diagonal of the chart
        assert!(chart.identity_residual > 1e-4);
    }

    #[test]
    fn non_idempotent_derivative_is_rejected() {
        let s = TruncatedScale::constant(1, 3);
        let r: Arc<dyn ScMap> =
            Arc::new(FnMap::new("half", s.clone(), s, |z| Ok(vec![0.5 * z[0]])));
        let err = cartan_chart(r, &[0.0], &CartanConfig::default()).unwrap_err();
        assert!(matches!(err, ScError::NotARetraction { .. }));
    }
}
