//! Finite-difference derivatives of black-box maps.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::ScMap;
use crate::linalg::{axpy, euclidean_norm};
use crate::{Result, ScError};

/// Default first-derivative step `1e-5·(|x|₁ + 1)`.
pub fn default_step(x: &[f64]) -> f64 {
    1e-5 * (x.iter().map(|v| v.abs()).sum::<f64>() + 1.0)
}

/// Default step for second derivatives.
pub const SECOND_STEP: f64 = 1e-3;

/// Halves `h` until the stencil points `x + k h ξ`, `|k| ≤ reach`, lie in the
/// open set of `f`.
fn fit_step(f: &dyn ScMap, x: &[f64], xi: &[f64], mut h: f64, reach: f64) -> Result<f64> {
    for _ in 0..30 {
        if f.contains(&axpy(reach * h, xi, x)) && f.contains(&axpy(-reach * h, xi, x)) {
            return Ok(h);
        }
        h *= 0.5;
    }
    Err(ScError::Evaluation(format!(
        "stencil around the sample leaves the domain of `{}`",
        f.name()
    )))
}

fn eval(f: &dyn ScMap, x: &[f64]) -> Result<Vec<f64>> {
    f.eval(x).map_err(|e| match e {
        ScError::Evaluation(m) => ScError::Evaluation(m),
        other => ScError::Evaluation(format!("{} inside stencil: {other}", f.name())),
    })
}

/// Central-difference Jacobian, one column per coefficient.
pub fn fd_jacobian(f: &dyn ScMap, x: &[f64], step: Option<f64>) -> Result<DMatrix<f64>> {
    let h0 = step.unwrap_or_else(|| default_step(x));
    if h0 <= 0.0 || !h0.is_finite() {
        return Err(ScError::Precondition(format!(
            "finite-difference step {h0} must be positive"
        )));
    }
    let mut cols = Vec::with_capacity(x.len());
    let mut e = alloc::vec![0.0; x.len()];
    for j in 0..x.len() {
        e[j] = 1.0;
        let h = fit_step(f, x, &e, h0, 1.0)?;
        let plus = eval(f, &axpy(h, &e, x))?;
        let minus = eval(f, &axpy(-h, &e, x))?;
        cols.push(DVector::from_iterator(
            plus.len(),
            plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)),
        ));
        e[j] = 0.0;
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Second-order central difference of `f` along `ξ` with step `h`.
pub fn central(f: &dyn ScMap, x: &[f64], xi: &[f64], h: f64) -> Result<Vec<f64>> {
    let h = fit_step(f, x, xi, h, 1.0)?;
    let plus = eval(f, &axpy(h, xi, x))?;
    let minus = eval(f, &axpy(-h, xi, x))?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect())
}

/// One-sided differences `(f(x+hξ) − f(x))/h` and `(f(x) − f(x−hξ))/h`.
pub fn one_sided(f: &dyn ScMap, x: &[f64], xi: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = fit_step(f, x, xi, h, 1.0)?;
    let fx = eval(f, x)?;
    let plus = eval(f, &axpy(h, xi, x))?;
    let minus = eval(f, &axpy(-h, xi, x))?;
    let fwd = plus.iter().zip(&fx).map(|(a, b)| (a - b) / h).collect();
    let bwd = fx.iter().zip(&minus).map(|(a, b)| (a - b) / h).collect();
    Ok((fwd, bwd))
}

/// Fourth-order five-point directional derivative.
pub fn directional(f: &dyn ScMap, x: &[f64], xi: &[f64], h: f64) -> Result<Vec<f64>> {
    let h = fit_step(f, x, xi, h, 2.0)?;
    let p2 = eval(f, &axpy(2.0 * h, xi, x))?;
    let p1 = eval(f, &axpy(h, xi, x))?;
    let m1 = eval(f, &axpy(-h, xi, x))?;
    let m2 = eval(f, &axpy(-2.0 * h, xi, x))?;
    Ok((0..p1.len())
        .map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h))
        .collect())
}

/// `Df(x)ξ`: analytic when available, otherwise the five-point stencil along
/// the unit direction `ξ/|ξ|`.
pub fn derivative_or_fd(f: &dyn ScMap, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    if let Some(d) = f.derivative(x, xi) {
        return d;
    }
    let norm = euclidean_norm(xi);
    if norm == 0.0 {
        let n = f.domain().truncation_of(x.len())?;
        return Ok(alloc::vec![0.0; f.target().dim(n)]);
    }
    let unit: Vec<f64> = xi.iter().map(|v| v / norm).collect();
    let d = directional(f, x, &unit, default_step(x))?;
    Ok(d.into_iter().map(|v| v * norm).collect())
}

/// `D²f(x)(ξ, η)` as the central difference of `y ↦ Df(y)ξ` along `η`.
pub fn second_fd(f: &dyn ScMap, x: &[f64], xi: &[f64], eta: &[f64], h: f64) -> Result<Vec<f64>> {
    let h = fit_step(f, x, eta, h, 1.0)?;
    let plus = derivative_or_fd(f, &axpy(h, eta, x), xi)?;
    let minus = derivative_or_fd(f, &axpy(-h, eta, x), xi)?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{FnMap, OperatorMap, PolynomialMap};
    use crate::linear::templates;
    use crate::{TruncatedScale, WeightSequence};
    use alloc::vec;

    #[test]
    fn jacobian_of_a_matrix() {
        let s = TruncatedScale::constant(3, 2);
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.0, 0.0, 7.0]);
        let f = OperatorMap::new(templates::matrix(&s, &s, m.clone()).unwrap());
        let j = fd_jacobian(&f, &[0.3, -0.2, 1.0], None).unwrap();
        assert!((j - m).abs().max() < 1e-9);
    }

    #[test]
    fn quadratic_at_zero_and_at_a_cosine() {
        let s = TruncatedScale::new(WeightSequence::sobolev_circle(), vec![9], 2).unwrap();
        let f = PolynomialMap::new(&s, vec![0.0, 1.0, 1.0]).unwrap();
        let j = fd_jacobian(&f, &[0.0; 9], None).unwrap();
        assert!((j - DMatrix::identity(9, 9)).abs().max() < 1e-9);
        // at x = cos, D = 1 + 2·(multiplication by cos); oracle built from
        // cos·cos(k·) = (cos((k−1)·) + cos((k+1)·))/2 and likewise for sines
        let mut x = vec![0.0; 9];
        x[1] = 1.0;
        let j = fd_jacobian(&f, &x, None).unwrap();
        let mut mult = DMatrix::zeros(9, 9);
        mult[(1, 0)] = 1.0;
        for k in 1..=4usize {
            let (c, sn) = (2 * k - 1, 2 * k);
            if k == 1 {
                mult[(0, c)] += 0.5;
            } else {
                mult[(2 * k - 3, c)] += 0.5;
                mult[(2 * k - 2, sn)] += 0.5;
            }
            if k < 4 {
                mult[(2 * k + 1, c)] += 0.5;
                mult[(2 * k + 2, sn)] += 0.5;
            }
        }
        let oracle: DMatrix<f64> = DMatrix::identity(9, 9) + mult * 2.0;
        assert!((j - oracle).abs().max() < 1e-8);
    }

    #[test]
    fn stencils_shrink_into_the_open_set() {
        let s = TruncatedScale::constant(1, 1);
        let f = FnMap::new("log", s.clone(), s, |x| {
            if x[0] > 0.0 {
                Ok(vec![num_traits::Float::ln(x[0])])
            } else {
                Err(ScError::Evaluation("log of a nonpositive number".into()))
            }
        })
        .with_open_set(|x| x[0] > 0.0);
        // a unit step would leave (0, ∞); the shrunken stencil is 4% off
        let d = directional(&f, &[1e-2], &[1.0], 1.0).unwrap();
        assert!((d[0] - 100.0).abs() < 5.0, "{d:?}");
    }

    #[test]
    fn evaluation_failures_are_reported() {
        let s = TruncatedScale::constant(1, 1);
        let f = FnMap::new("bad", s.clone(), s, |x| {
            if x[0] > 0.0 {
                Err(ScError::Precondition("positive".into()))
            } else {
                Ok(vec![0.0])
            }
        });
        assert!(matches!(
            fd_jacobian(&f, &[0.0], None),
            Err(ScError::Evaluation(_))
        ));
    }
}
