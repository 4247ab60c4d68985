use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::ScMap;
use crate::circle::{self, CircleGrid};
use crate::linear::ScOperator;
use crate::scale::{Extent, TruncatedScale};
use crate::{Result, ScError};

pub type EvalFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;
pub type DerivativeFn = Arc<dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync>;
pub type SecondDerivativeFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync>;
pub type DomainFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Map given by closures.
#[derive(Clone)]
pub struct FnMap {
    name: String,
    domain: TruncatedScale,
    target: TruncatedScale,
    eval: EvalFn,
    derivative: Option<DerivativeFn>,
    second: Option<SecondDerivativeFn>,
    open_set: Option<DomainFn>,
}

impl FnMap {
    pub fn new(
        name: impl Into<String>,
        domain: TruncatedScale,
        target: TruncatedScale,
        eval: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            target,
            eval: Arc::new(eval),
            derivative: None,
            second: None,
            open_set: None,
        }
    }

    pub fn with_derivative(
        mut self,
        df: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(df));
        self
    }

    pub fn with_second_derivative(
        mut self,
        d2f: impl Fn(&[f64], &[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.second = Some(Arc::new(d2f));
        self
    }

    /// Restricts the map to the open set `{x : inside(x)}`.
    pub fn with_open_set(
        mut self,
        inside: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.open_set = Some(Arc::new(inside));
        self
    }

    /// Same rules viewed between other scales, e.g. shifted ones.
    pub fn rescaled(&self, domain: TruncatedScale, target: TruncatedScale) -> Self {
        Self {
            domain,
            target,
            ..self.clone()
        }
    }
}

impl ScMap for FnMap {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> &TruncatedScale {
        &self.domain
    }
    fn target(&self) -> &TruncatedScale {
        &self.target
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        (self.eval)(x)
    }
    fn derivative(&self, x: &[f64], xi: &[f64]) -> Option<Result<Vec<f64>>> {
        self.derivative.as_ref().map(|d| d(x, xi))
    }
    fn second_derivative(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> Option<Result<Vec<f64>>> {
        self.second.as_ref().map(|d| d(x, xi, eta))
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.open_set.as_ref().map_or(true, |f| f(x))
    }
}

/// A linear sc-operator viewed as a map.
#[derive(Clone, Debug)]
pub struct OperatorMap {
    op: ScOperator,
}

impl OperatorMap {
    pub fn new(op: ScOperator) -> Self {
        Self { op }
    }

    pub fn operator(&self) -> &ScOperator {
        &self.op
    }
}

impl ScMap for OperatorMap {
    fn name(&self) -> &str {
        self.op.name()
    }
    fn domain(&self) -> &TruncatedScale {
        self.op.domain()
    }
    fn target(&self) -> &TruncatedScale {
        self.op.target()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.op.apply(x)
    }
    fn derivative(&self, _x: &[f64], xi: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(self.op.apply(xi))
    }
    fn second_derivative(&self, _x: &[f64], xi: &[f64], _eta: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(
            self.op
                .domain()
                .truncation_of(xi.len())
                .map(|n| vec![0.0; self.op.target().dim(n)]),
        )
    }
}

fn single_circle(scale: &TruncatedScale, what: &str) -> Result<()> {
    match scale.components() {
        [c] if c.extent == Extent::Truncated => Ok(()),
        _ => Err(ScError::Precondition(format!(
            "{what} needs a single truncated circle component"
        ))),
    }
}

/// Pointwise polynomial `v ↦ Σ c_k v^k` on circle coefficients, evaluated on
/// a `2N+1` point grid so that cubic products are alias-free.
#[derive(Clone, Debug)]
pub struct PolynomialMap {
    name: String,
    scale: TruncatedScale,
    coeffs: Vec<f64>,
}

fn horner(c: &[f64], v: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * v + a)
}

fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| k as f64 * a)
        .collect()
}

impl PolynomialMap {
    /// `coeffs[k]` multiplies `v^k`.
    pub fn new(scale: &TruncatedScale, coeffs: Vec<f64>) -> Result<Self> {
        single_circle(scale, "polynomial map")?;
        let name = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 if *c == 1.0 => "v".into(),
                1 => format!("{c}·v"),
                _ if *c == 1.0 => format!("v^{k}"),
                _ => format!("{c}·v^{k}"),
            })
            .collect::<Vec<_>>()
            .join(" + ");
        Ok(Self {
            name,
            scale: scale.clone(),
            coeffs,
        })
    }

    pub fn on_scale(&self, scale: &TruncatedScale) -> Result<Self> {
        single_circle(scale, "polynomial map")?;
        Ok(Self {
            scale: scale.clone(),
            ..self.clone()
        })
    }

    fn grid(&self, x: &[f64]) -> Result<CircleGrid> {
        self.scale.truncation_of(x.len())?;
        Ok(CircleGrid::new(x.len()))
    }
}

impl ScMap for PolynomialMap {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> &TruncatedScale {
        &self.scale
    }
    fn target(&self) -> &TruncatedScale {
        &self.scale
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.grid(x)?;
        Ok(g.pointwise(x, |v| horner(&self.coeffs, v)))
    }
    fn derivative(&self, x: &[f64], xi: &[f64]) -> Option<Result<Vec<f64>>> {
        Some((|| {
            let g = self.grid(x)?;
            let d = derivative_coeffs(&self.coeffs);
            let sx = g.synthesize(x);
            let sxi = g.synthesize(xi);
            let prod: Vec<f64> = sx
                .iter()
                .zip(&sxi)
                .map(|(v, h)| horner(&d, *v) * h)
                .collect();
            Ok(g.analyze(&prod))
        })())
    }
    fn second_derivative(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> Option<Result<Vec<f64>>> {
        Some((|| {
            let g = self.grid(x)?;
            let d2 = derivative_coeffs(&derivative_coeffs(&self.coeffs));
            let sx = g.synthesize(x);
            let a = g.synthesize(xi);
            let b = g.synthesize(eta);
            let prod: Vec<f64> = sx
                .iter()
                .zip(a.iter().zip(&b))
                .map(|(v, (p, q))| horner(&d2, *v) * p * q)
                .collect();
            Ok(g.analyze(&prod))
        })())
    }
}

/// The shift map `Ψ(τ, v) = v(· + τ)` from `ℝ ⊕ E` to `E` on the circle
/// scale, with `DΨ(τ,v)(T,V) = T·τ_*v̇ + τ_*V`.
#[derive(Clone, Debug)]
pub struct ShiftMap {
    domain: TruncatedScale,
    target: TruncatedScale,
}

impl ShiftMap {
    pub fn new(scale: &TruncatedScale) -> Result<Self> {
        single_circle(scale, "shift map")?;
        Ok(Self {
            domain: scale.with_prefix(1),
            target: scale.clone(),
        })
    }

    fn split<'a>(&self, x: &'a [f64]) -> Result<(f64, &'a [f64])> {
        self.domain.truncation_of(x.len())?;
        Ok((x[0], &x[1..]))
    }

    /// `V ↦ τ_*V`, the fiber part of the derivative.
    pub fn translate(v: &[f64], tau: f64) -> Vec<f64> {
        circle::shift(v, tau)
    }
}

impl ScMap for ShiftMap {
    fn name(&self) -> &str {
        "shift map"
    }
    fn domain(&self) -> &TruncatedScale {
        &self.domain
    }
    fn target(&self) -> &TruncatedScale {
        &self.target
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (tau, v) = self.split(x)?;
        Ok(circle::shift(v, tau))
    }
    fn derivative(&self, x: &[f64], xi: &[f64]) -> Option<Result<Vec<f64>>> {
        Some((|| {
            let (tau, v) = self.split(x)?;
            let (t, dv) = self.split(xi)?;
            let a = circle::shift(&circle::derivative(v), tau);
            let b = circle::shift(dv, tau);
            Ok(a.iter().zip(&b).map(|(p, q)| t * p + q).collect())
        })())
    }
    fn second_derivative(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> Option<Result<Vec<f64>>> {
        Some((|| {
            let (tau, v) = self.split(x)?;
            let (t1, v1) = self.split(xi)?;
            let (t2, v2) = self.split(eta)?;
            let vdd = circle::shift(&circle::derivative(&circle::derivative(v)), tau);
            let d1 = circle::shift(&circle::derivative(v1), tau);
            let d2 = circle::shift(&circle::derivative(v2), tau);
            Ok((0..vdd.len())
                .map(|i| t1 * t2 * vdd[i] + t1 * d2[i] + t2 * d1[i])
                .collect())
        })())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Nonlinearity {
    Sign,
    /// `v ↦ v|v|`, of class C¹ but not C².
    SignedSquare,
    Abs,
}

/// Coefficientwise scalar nonlinearity.
#[derive(Clone, Debug)]
pub struct Coefficientwise {
    kind: Nonlinearity,
    scale: TruncatedScale,
}

impl Coefficientwise {
    pub fn new(kind: Nonlinearity, scale: &TruncatedScale) -> Self {
        Self {
            kind,
            scale: scale.clone(),
        }
    }
}

impl ScMap for Coefficientwise {
    fn name(&self) -> &str {
        match self.kind {
            Nonlinearity::Sign => "sign",
            Nonlinearity::SignedSquare => "v|v|",
            Nonlinearity::Abs => "|v|",
        }
    }
    fn domain(&self) -> &TruncatedScale {
        &self.scale
    }
    fn target(&self) -> &TruncatedScale {
        &self.scale
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.scale.truncation_of(x.len())?;
        Ok(x.iter()
            .map(|&v| match self.kind {
                Nonlinearity::Sign => {
                    if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
                Nonlinearity::SignedSquare => v * v.abs(),
                Nonlinearity::Abs => v.abs(),
            })
            .collect())
    }
    fn derivative(&self, x: &[f64], xi: &[f64]) -> Option<Result<Vec<f64>>> {
        match self.kind {
            Nonlinearity::SignedSquare => Some(Ok(x
                .iter()
                .zip(xi)
                .map(|(v, h)| 2.0 * v.abs() * h)
                .collect())),
            _ => None,
        }
    }
}

/// `outer ∘ inner`, with the chain-rule derivative when both parts have an
/// analytic one.
#[derive(Clone)]
pub struct Compose {
    name: String,
    inner: Arc<dyn ScMap>,
    outer: Arc<dyn ScMap>,
}

impl Compose {
    pub fn new(inner: Arc<dyn ScMap>, outer: Arc<dyn ScMap>) -> Self {
        let name = format!("({}) ∘ ({})", outer.name(), inner.name());
        Self { name, inner, outer }
    }
}

impl ScMap for Compose {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> &TruncatedScale {
        self.inner.domain()
    }
    fn target(&self) -> &TruncatedScale {
        self.outer.target()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.outer.eval(&self.inner.eval(x)?)
    }
    fn derivative(&self, x: &[f64], xi: &[f64]) -> Option<Result<Vec<f64>>> {
        let fx = match self.inner.eval(x) {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        let dxi = match self.inner.derivative(x, xi)? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        self.outer.derivative(&fx, &dxi)
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.inner.contains(x)
            && self
                .inner
                .eval(x)
                .map(|y| self.outer.contains(&y))
                .unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::WeightSequence;

    fn circle(n: usize) -> TruncatedScale {
        TruncatedScale::new(WeightSequence::sobolev_circle(), vec![n], 3).unwrap()
    }

    #[test]
    fn polynomial_of_a_cosine() {
        // v = cos: v + v² = 1/2 + cos + cos(2·)/2
        let s = circle(5);
        let f = PolynomialMap::new(&s, vec![0.0, 1.0, 1.0]).unwrap();
        assert_eq!(f.name(), "v + v^2");
        let y = f.eval(&[0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        for (a, b) in y.iter().zip([0.5, 1.0, 0.0, 0.5, 0.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_map_derivative_in_tau() {
        let s = circle(9);
        let psi = ShiftMap::new(&s).unwrap();
        let x: Vec<f64> = (0..10)
            .map(|i| if i == 0 { 0.3 } else { 1.0 / (i * i) as f64 })
            .collect();
        let mut dir = vec![0.0; 10];
        dir[0] = 1.0;
        let d = psi.derivative(&x, &dir).unwrap().unwrap();
        let h = 1e-6;
        let mut xp = x.clone();
        xp[0] += h;
        let mut xm = x.clone();
        xm[0] -= h;
        let fd: Vec<f64> = psi
            .eval(&xp)
            .unwrap()
            .iter()
            .zip(psi.eval(&xm).unwrap())
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        for (a, b) in d.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn signed_square_derivative() {
        let s = TruncatedScale::constant(3, 2);
        let f = Coefficientwise::new(Nonlinearity::SignedSquare, &s);
        assert_eq!(f.eval(&[-2.0, 0.0, 3.0]).unwrap(), vec![-4.0, 0.0, 9.0]);
        assert_eq!(
            f.derivative(&[-2.0, 0.0, 3.0], &[1.0, 1.0, 1.0])
                .unwrap()
                .unwrap(),
            vec![4.0, 0.0, 6.0]
        );
        assert!(Coefficientwise::new(Nonlinearity::Abs, &s)
            .derivative(&[0.0; 3], &[1.0; 3])
            .is_none());
    }
}
