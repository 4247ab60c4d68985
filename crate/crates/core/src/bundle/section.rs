use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::diff::{certify_sc1, regularity_of, CertificateReport, CertifyConfig, Compose, ScMap};
use crate::retract::RetractModel;
use crate::{Result, ScError, TruncatedScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SectionClass {
    Sc,
    ScPlus,
    Rejected,
}

impl SectionClass {
    pub fn label(self) -> &'static str {
        match self {
            Self::Sc => "sc",
            Self::ScPlus => "sc+",
            Self::Rejected => "rejected",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SectionConfig {
    pub certify: CertifyConfig,
    /// Estimated gain that counts as one full level.
    pub gain_margin: f64,
    pub m_max: usize,
}

impl Default for SectionConfig {
    fn default() -> Self {
        Self {
            certify: CertifyConfig::default(),
            gain_margin: 0.75,
            m_max: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GainRow {
    pub sample: usize,
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
    pub gains: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SectionReport {
    pub section: String,
    pub class: SectionClass,
    /// sc¹ certificate of the decompressed principal part into `F`.
    pub certificate: CertificateReport,
    pub gains: Vec<GainRow>,
    /// sc¹ certificate into `F¹`, run only when every sample gains a level.
    pub plus_certificate: Option<CertificateReport>,
}

/// The same map with its target replaced by another scale on the same
/// coefficient space.
struct Retargeted {
    name: String,
    inner: Arc<dyn ScMap>,
    target: TruncatedScale,
}

impl ScMap for Retargeted {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> &TruncatedScale {
        self.inner.domain()
    }
    fn target(&self) -> &TruncatedScale {
        &self.target
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner.eval(x)
    }
    fn derivative(&self, x: &[f64], xi: &[f64]) -> Option<Result<Vec<f64>>> {
        self.inner.derivative(x, xi)
    }
    fn second_derivative(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> Option<Result<Vec<f64>>> {
        self.inner.second_derivative(x, xi, eta)
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.inner.contains(x)
    }
}

/// Classifies the section `x ↦ (x, s(x))` of `O ▷ F` by its principal part
/// `s`, decompressed to `s∘r`: "sc" if it certifies sc¹ into `F`, "sc+" if in
/// addition every sample gains a level of estimated regularity (capped at the
/// top level of `F`) and it certifies into `F¹`.
pub fn classify_section(
    s: Arc<dyn ScMap>,
    model: &RetractModel,
    samples: &[Vec<f64>],
    config: &SectionConfig,
) -> Result<SectionReport> {
    let r = model.retraction();
    if s.domain().components() != r.domain().components() {
        return Err(ScError::Precondition(
            "section must be defined on the retract's ambient scale".into(),
        ));
    }
    let fiber = s.target().clone();
    let decompressed: Arc<dyn ScMap> = Arc::new(Compose::new(r.clone(), s.clone()));
    let m_max = config.m_max.min(fiber.max_level());
    let certificate = certify_sc1(&*decompressed, samples, m_max, &config.certify)?;
    let section = String::from(s.name());
    if !certificate.accepted {
        return Ok(SectionReport {
            section,
            class: SectionClass::Rejected,
            certificate,
            gains: Vec::new(),
            plus_certificate: None,
        });
    }

    let cap = fiber.max_level() as f64;
    let mut gains = Vec::with_capacity(samples.len());
    for (i, x) in samples.iter().enumerate() {
        let regularity_in = regularity_of(r.domain(), x, &config.certify.regularity)?;
        let regularity_out =
            regularity_of(&fiber, &decompressed.eval(x)?, &config.certify.regularity)?;
        let required = (regularity_in + config.gain_margin).min(cap);
        gains.push(GainRow {
            sample: i,
            regularity_in,
            regularity_out,
            gains: regularity_out >= required,
        });
    }
    let plus_certificate = if gains.iter().all(|g| g.gains) && fiber.max_level() >= 1 {
        let lifted = Retargeted {
            name: alloc::format!("{} into F¹", decompressed.name()),
            inner: decompressed,
            target: fiber.shifted(1),
        };
        Some(certify_sc1(
            &lifted,
            samples,
            m_max.min(fiber.max_level() - 1),
            &config.certify,
        )?)
    } else {
        None
    };
    let class = match &plus_certificate {
        Some(c) if c.accepted => SectionClass::ScPlus,
        _ => SectionClass::Sc,
    };
    Ok(SectionReport {
        section,
        class,
        certificate,
        gains,
        plus_certificate,
    })
}
