use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::trivial::{ExtractedBundle, TrivialStrongBundle};
use crate::diff::{regularity_of, ScMap};
use crate::linalg::{sub, RankPolicy};
use crate::linear::Assembled;
use crate::retract::{
    check_retraction, JumpingSplicing, RetractModel, SplicingFamily, SplicingRetraction,
};
use crate::scale::RegularityConfig;
use crate::{Result, ScError, TruncatedScale};

/// `u ↦ ρ_u`, a linear map of the fiber for every base point.
pub type FiberFamily = Arc<dyn Fn(&[f64]) -> Result<Assembled> + Send + Sync>;

/// `R(u, ξ) = (r(u), ρ_u ξ)` on `U ▷ F`.
#[derive(Clone)]
pub struct StrongBundleRetraction {
    name: String,
    base: RetractModel,
    bundle: TrivialStrongBundle,
    rho: FiberFamily,
    /// Relative tolerance on `|R∘R − R|` and `|ρ_x² − ρ_x|`.
    pub idempotency_tol: f64,
    /// Allowed loss of estimated fiber regularity under `ρ_u`.
    pub level_slack: f64,
    pub regularity: RegularityConfig,
    pub rank_policy: RankPolicy,
}

impl core::fmt::Debug for StrongBundleRetraction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("StrongBundleRetraction")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl StrongBundleRetraction {
    pub fn new(
        name: impl Into<String>,
        base: RetractModel,
        fiber: TruncatedScale,
        rho: impl Fn(&[f64]) -> Result<Assembled> + Send + Sync + 'static,
    ) -> Result<Self> {
        let bundle = TrivialStrongBundle::new(base.retraction().domain().clone(), fiber)?;
        Ok(Self {
            name: name.into(),
            base,
            bundle,
            rho: Arc::new(rho),
            idempotency_tol: 1e-10,
            level_slack: 0.25,
            regularity: RegularityConfig::default(),
            rank_policy: RankPolicy::default(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &RetractModel {
        &self.base
    }

    pub fn bundle(&self) -> &TrivialStrongBundle {
        &self.bundle
    }

    pub fn rho(&self, u: &[f64]) -> Result<Assembled> {
        (self.rho)(u)
    }

    /// `(r(u), ρ_u ξ)`. Points of `K = Fix R` are exactly the images.
    pub fn apply(&self, u: &[f64], xi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let rho = self.rho(u)?;
        if rho.shape() != (xi.len(), xi.len()) {
            return Err(ScError::Shape {
                expected: xi.len(),
                found: rho.shape().1,
            });
        }
        Ok((self.base.retraction().eval(u)?, rho.apply(xi)))
    }

    /// `rank ρ_x`, the fiber dimension of `K` over `x ∈ O`.
    pub fn fiber_dimension(&self, x: &[f64]) -> Result<usize> {
        self.rank_policy.rank(&self.rho(x)?.singular_values())
    }

    /// `R^{[i]}` on the extracted scale `(U ▷ F)^{[i]}`.
    pub fn extracted(&self, i: usize) -> Result<ExtractedRetraction> {
        Ok(ExtractedRetraction {
            name: format!("{}^[{i}]", self.name),
            bundle: self.bundle.extract(i)?,
            retraction: self.clone(),
        })
    }
}

/// `R^{[i]}` as a map of single scales.
#[derive(Clone)]
pub struct ExtractedRetraction {
    name: String,
    bundle: ExtractedBundle,
    retraction: StrongBundleRetraction,
}

impl ExtractedRetraction {
    pub fn bundle(&self) -> &ExtractedBundle {
        &self.bundle
    }
}

impl ScMap for ExtractedRetraction {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> &TruncatedScale {
        &self.bundle.scale
    }
    fn target(&self) -> &TruncatedScale {
        &self.bundle.scale
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (u, xi) = self.bundle.split(x)?;
        let (ru, rxi) = self.retraction.apply(u, xi)?;
        Ok(ExtractedBundle::join(&ru, &rxi))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StrongSampleRow {
    pub sample: usize,
    /// `|R∘R(z) − R(z)|_0 / max(1, |z|_0)` in the scales `[0]` and `[1]`.
    pub idempotency: [f64; 2],
    /// `|ρ_x² − ρ_x|` at `x = r(u)`.
    pub rho_idempotency: f64,
    pub fiber_dimension: usize,
    #[cfg_attr(
        feature = "serde",
        serde(serialize_with = "crate::serde_ext::extended_real::serialize")
    )]
    pub regularity_in: f64,
    #[cfg_attr(
        feature = "serde",
        serde(serialize_with = "crate::serde_ext::extended_real::serialize")
    )]
    pub regularity_out: f64,
    pub preserved: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StrongRetractionReport {
    pub name: String,
    pub rows: Vec<StrongSampleRow>,
    /// `R^{[0]}` and `R^{[1]}` returned identical vectors on every sample.
    pub extracted_agree: bool,
    pub failures: Vec<usize>,
    pub accepted: bool,
}

impl StrongRetractionReport {
    pub fn fiber_dimensions(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.fiber_dimension).collect()
    }
}

/// Samples the strong-retraction conditions at points `(u, ξ)`:
/// `R∘R = R` in both extracted scales, `ρ_x² = ρ_x` at `x = r(u) ∈ O`, and
/// preservation of the fiber regularity under `ρ_u`. Failures are listed
/// per sample.
pub fn check_strong_retraction(
    retraction: &StrongBundleRetraction,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<StrongRetractionReport> {
    let fiber = retraction.bundle.fiber();
    let cap = fiber.max_level() as f64;
    let extracted = [retraction.extracted(0)?, retraction.extracted(1)?];
    let mut rows = Vec::with_capacity(samples.len());
    let mut extracted_agree = true;
    for (i, (u, xi)) in samples.iter().enumerate() {
        let z = ExtractedBundle::join(u, xi);
        let mut idempotency = [0.0; 2];
        let mut images: Vec<Vec<f64>> = Vec::with_capacity(2);
        for (slot, map) in extracted.iter().enumerate() {
            let rz = map.eval(&z)?;
            let rrz = map.eval(&rz)?;
            let scale = map.domain();
            idempotency[slot] =
                scale.level_norm(&sub(&rrz, &rz), 0)? / scale.level_norm(&z, 0)?.max(1.0);
            images.push(rz);
        }
        extracted_agree &= images[0] == images[1];
        let x = retraction.base.retraction().eval(u)?;
        let rho_x = retraction.rho(&x)?;
        let rho_idempotency = crate::retract::idempotency_residual(&rho_x);
        let fiber_dimension = retraction.rank_policy.rank(&rho_x.singular_values())?;
        let regularity_in = regularity_of(fiber, xi, &retraction.regularity)?;
        let (_, rxi) = retraction.apply(u, xi)?;
        let regularity_out = regularity_of(fiber, &rxi, &retraction.regularity)?;
        let preserved = regularity_out >= regularity_in.min(cap) - retraction.level_slack;
        let ok = idempotency.iter().all(|&r| r <= retraction.idempotency_tol)
            && rho_idempotency <= retraction.idempotency_tol * rho_x.spectral_norm().max(1.0)
            && preserved;
        rows.push(StrongSampleRow {
            sample: i,
            idempotency,
            rho_idempotency,
            fiber_dimension,
            regularity_in,
            regularity_out,
            preserved,
            ok,
        });
    }
    let failures: Vec<usize> = rows.iter().filter(|r| !r.ok).map(|r| r.sample).collect();
    let accepted = failures.is_empty() && extracted_agree;
    Ok(StrongRetractionReport {
        name: retraction.name.clone(),
        rows,
        extracted_agree,
        failures,
        accepted,
    })
}

/// `R((t, f), ξ) = ((t, π_t f), π_t ξ)` over the splicing core of `family`.
pub fn splicing_strong_retraction(
    family: Arc<JumpingSplicing>,
    max_level: usize,
) -> Result<StrongBundleRetraction> {
    let j = family.fiber_dim();
    let r: Arc<dyn ScMap> = Arc::new(SplicingRetraction::new(family.clone(), max_level));
    let probes: Vec<Vec<f64>> = [-1.0, 1.0]
        .iter()
        .map(|&t| {
            let mut v = vec![t];
            v.extend(family.grid().sample(|s| (-s * s).exp()));
            v
        })
        .collect();
    let base = check_retraction(r, &probes, 1e-10)?;
    StrongBundleRetraction::new(
        format!("R over r_π ({})", family.name()),
        base,
        TruncatedScale::constant(j, max_level),
        move |u| family.projection(&u[..1]),
    )
}
