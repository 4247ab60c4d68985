//! Nonlinear maps between scales and numerical sc-differentiability.
//!
//! A map is a black box [`ScMap`] that may carry analytic first and second
//! derivatives. Certificates ([`certify_sc0`], [`certify_sc1`],
//! [`certify_sc2`]) sample the defining conditions on a finite set of points
//! and levels and report every check they ran.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::{Result, TruncatedScale};

mod certify;
mod chain;
pub mod fd;
mod maps;
mod shift;
mod tangent;

pub(crate) use certify::regularity_of;
pub use certify::{
    certify_sc0, certify_sc1, certify_sc2, CertificateReport, CertifyConfig, CheckEntry,
    CheckStatus, ScDerivativeSample,
};
pub use chain::{verify_chain_rule, ChainRuleReport, ChainRuleRow};
pub use fd::fd_jacobian;
pub use maps::{
    Coefficientwise, Compose, DerivativeFn, DomainFn, EvalFn, FnMap, Nonlinearity, OperatorMap,
    PolynomialMap, SecondDerivativeFn, ShiftMap,
};
pub use shift::{shift_map_dichotomy, ShiftDichotomyReport, ShiftDichotomyRow};
pub use tangent::TangentMap;

/// A map between two scales, given on coefficient vectors.
///
/// `eval` must accept any truncation on the domain ladder and return the
/// image at the same truncation.
pub trait ScMap: Send + Sync {
    fn name(&self) -> &str;
    fn domain(&self) -> &TruncatedScale;
    fn target(&self) -> &TruncatedScale;
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Analytic `Df(x)ξ`, if known.
    fn derivative(&self, _x: &[f64], _xi: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    /// Analytic `D²f(x)(ξ, η)`, if known.
    fn second_derivative(&self, _x: &[f64], _xi: &[f64], _eta: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    /// Membership in the open set the map is defined on.
    fn contains(&self, _x: &[f64]) -> bool {
        true
    }
}

impl<T: ScMap + ?Sized> ScMap for Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn domain(&self) -> &TruncatedScale {
        (**self).domain()
    }
    fn target(&self) -> &TruncatedScale {
        (**self).target()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).eval(x)
    }
    fn derivative(&self, x: &[f64], xi: &[f64]) -> Option<Result<Vec<f64>>> {
        (**self).derivative(x, xi)
    }
    fn second_derivative(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> Option<Result<Vec<f64>>> {
        (**self).second_derivative(x, xi, eta)
    }
    fn contains(&self, x: &[f64]) -> bool {
        (**self).contains(x)
    }
}
