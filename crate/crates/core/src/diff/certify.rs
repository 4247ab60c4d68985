use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_traits::Float;

use nalgebra::DMatrix;
use rand::Rng;

use super::fd::{self, default_step, SECOND_STEP};
use super::ScMap;
use crate::linalg::{self, axpy, sub};
use crate::rng::{self, SeededRng};
use crate::scale::{smooth_point, RegularityConfig, TruncatedScale};
use crate::{Result, ScError};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertifyConfig {
    /// First-derivative step; `None` uses `1e-5·(|x|₁ + 1)`.
    pub fd_step: Option<f64>,
    pub second_step: f64,
    /// Number of step halvings in derivative consistency checks.
    pub halvings: usize,
    /// Number of halvings of the perturbation in continuity checks.
    pub continuity_halvings: usize,
    pub continuity_radius: f64,
    /// Relative residual below which finite differences count as converged.
    pub fd_floor: f64,
    /// Smallest accepted decrease factor of a residual per halving.
    pub decrease_factor: f64,
    pub stability_tol: f64,
    /// Hessian symmetry tolerance relative to `|ξ|₀|η|₀`.
    pub symmetry_tol: f64,
    /// Tolerance when an analytic second derivative is compared.
    pub analytic_tol: f64,
    /// Allowed shortfall of estimated regularity.
    pub level_slack: f64,
    /// Random directions per sample and level.
    pub directions: usize,
    pub regularity: RegularityConfig,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            fd_step: None,
            second_step: SECOND_STEP,
            halvings: 4,
            continuity_halvings: 10,
            continuity_radius: 1e-2,
            fd_floor: 1e-7,
            decrease_factor: 1.5,
            stability_tol: 0.05,
            symmetry_tol: 1e-8,
            analytic_tol: 1e-4,
            level_slack: 0.25,
            directions: 2,
            regularity: RegularityConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CheckEntry {
    pub name: String,
    pub sample: Option<usize>,
    pub level: Option<usize>,
    pub status: CheckStatus,
    pub residuals: Vec<f64>,
    pub note: Option<String>,
}

impl CheckEntry {
    fn new(
        name: &str,
        sample: usize,
        level: Option<usize>,
        status: CheckStatus,
        residuals: Vec<f64>,
    ) -> Self {
        Self {
            name: name.to_string(),
            sample: Some(sample),
            level,
            status,
            residuals,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Finite-difference Jacobian at one sample with its consistency data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScDerivativeSample {
    pub sample: usize,
    pub truncation: usize,
    pub fd_step: f64,
    pub levels_checked: Vec<usize>,
    /// `(m, last step-halving residual)` of the diagonal map `E_{m+1} → F_m`.
    pub consistency: Vec<(usize, f64)>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub jacobian: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CertificateReport {
    pub map: String,
    pub order: usize,
    pub samples: usize,
    pub levels: Vec<usize>,
    pub checks: Vec<CheckEntry>,
    pub derivative_samples: Vec<ScDerivativeSample>,
    pub accepted: bool,
}

impl CertificateReport {
    fn finish(mut self) -> Self {
        self.accepted = self.checks.iter().all(|c| c.status != CheckStatus::Fail);
        self
    }

    /// Checks with the given name.
    pub fn named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a CheckEntry> + 'a {
        self.checks.iter().filter(move |c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

/// Estimated regularity, `+∞` on scales without truncated components.
pub(crate) fn regularity_of(
    scale: &TruncatedScale,
    x: &[f64],
    config: &RegularityConfig,
) -> Result<f64> {
    if !scale.has_truncated() {
        scale.truncation_of(x.len())?;
        return Ok(f64::INFINITY);
    }
    Ok(scale.estimate_regularity(x, config)?.level)
}

/// Smooth random direction with `|ξ|_m = 1`.
pub(crate) fn unit_direction<R: Rng + ?Sized>(
    scale: &TruncatedScale,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let v = smooth_point(scale, n, 0.3, rng);
    let norm = scale.level_norm(&v, m)?;
    if norm == 0.0 {
        return Err(ScError::Precondition("zero-dimensional scale".into()));
    }
    Ok(v.into_iter().map(|x| x / norm).collect())
}

/// A residual sequence along halvings converges if it ends below `floor` or
/// decreases by at least `factor` at every step.
fn converges(residuals: &[f64], floor: f64, factor: f64) -> bool {
    let Some(&last) = residuals.last() else {
        return true;
    };
    if last <= floor {
        return true;
    }
    residuals.windows(2).all(|w| w[1] * factor <= w[0])
}

/// Level-preservation and continuity along a halving sequence.
fn continuity_residuals(
    f: &dyn ScMap,
    x: &[f64],
    delta: &[f64],
    m: usize,
    config: &CertifyConfig,
    eval: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let base = eval(x)?;
    let mut radius = config.continuity_radius;
    while !f.contains(&axpy(radius, delta, x)) {
        radius *= 0.5;
        if radius < 1e-12 {
            return Err(ScError::Evaluation(
                "no admissible perturbation inside the domain".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(config.continuity_halvings + 1);
    for j in 0..=config.continuity_halvings {
        let eps = radius * 0.5f64.powi(j as i32);
        let y = eval(&axpy(eps, delta, x))?;
        out.push(f.target().level_norm(&sub(&y, &base), m)?);
    }
    Ok(out)
}

fn continuity_ok(residuals: &[f64], floor: f64, config: &CertifyConfig) -> bool {
    let first = residuals.first().copied().unwrap_or(0.0);
    let last = residuals.last().copied().unwrap_or(0.0);
    last <= floor || last <= first * 0.5f64.powf(config.continuity_halvings as f64 / 2.0)
}

fn top_level(f: &dyn ScMap, m_max: usize) -> usize {
    m_max
        .min(f.domain().max_level())
        .min(f.target().max_level())
}

fn sc0_checks(
    f: &dyn ScMap,
    samples: &[Vec<f64>],
    m_max: usize,
    config: &CertifyConfig,
    rng: &mut SeededRng,
    checks: &mut Vec<CheckEntry>,
) -> Result<()> {
    let top = top_level(f, m_max);
    for (i, x) in samples.iter().enumerate() {
        let n = f.domain().truncation_of(x.len())?;
        let fx = f.eval(x)?;
        let rx = regularity_of(f.domain(), x, &config.regularity)?;
        let rfx = regularity_of(f.target(), &fx, &config.regularity)?;
        let needed = rx.min(m_max as f64) - config.level_slack;
        let status = if rfx >= needed {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        checks.push(CheckEntry::new(
            "level_preservation",
            i,
            None,
            status,
            alloc::vec![rx, rfx],
        ));
        for m in 0..=top {
            if (m as f64) > rx + config.level_slack {
                checks.push(
                    CheckEntry::new("continuity", i, Some(m), CheckStatus::Skipped, Vec::new())
                        .with_note("sample below this level"),
                );
                continue;
            }
            let delta = unit_direction(f.domain(), n, m, rng)?;
            let res = continuity_residuals(f, x, &delta, m, config, &|y| f.eval(y))?;
            let scale = f.target().level_norm(&fx, m)?;
            let status = if continuity_ok(&res, 1e-12 * scale.max(1.0), config) {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            checks.push(CheckEntry::new("continuity", i, Some(m), status, res));
        }
    }
    Ok(())
}

fn empty_report(f: &dyn ScMap, order: usize, samples: usize, m_max: usize) -> CertificateReport {
    CertificateReport {
        map: f.name().to_string(),
        order,
        samples,
        levels: (0..=top_level(f, m_max)).collect(),
        checks: Vec::new(),
        derivative_samples: Vec::new(),
        accepted: false,
    }
}

/// sc⁰ certificate: level preservation of every sample and continuity of
/// every level map `f_m`, sampled along halving perturbations.
pub fn certify_sc0(
    f: &dyn ScMap,
    samples: &[Vec<f64>],
    m_max: usize,
    config: &CertifyConfig,
) -> Result<CertificateReport> {
    if samples.is_empty() {
        return Err(ScError::Precondition("no samples".into()));
    }
    let mut rng = rng::seeded(config.seed);
    let mut report = empty_report(f, 0, samples.len(), m_max);
    sc0_checks(f, samples, m_max, config, &mut rng, &mut report.checks)?;
    Ok(report.finish())
}

/// Residual table of the diagonal derivative `E_{m+1} → F_m` along `ξ`.
struct Consistency {
    central: Vec<f64>,
    one_sided: Vec<f64>,
    scale: f64,
}

fn consistency(
    f: &dyn ScMap,
    x: &[f64],
    xi: &[f64],
    m: usize,
    config: &CertifyConfig,
) -> Result<Consistency> {
    let h0 = config.fd_step.unwrap_or_else(|| default_step(x));
    let mut derivs = Vec::with_capacity(config.halvings + 1);
    let mut one_sided = Vec::with_capacity(config.halvings + 1);
    for k in 0..=config.halvings {
        let h = h0 * 0.5f64.powi(k as i32);
        derivs.push(fd::central(f, x, xi, h)?);
        let (fwd, bwd) = fd::one_sided(f, x, xi, h)?;
        one_sided.push(f.target().level_norm(&sub(&fwd, &bwd), m)?);
    }
    let scale = f.target().level_norm(&derivs[0], m)?.max(1.0);
    let central = derivs
        .windows(2)
        .map(|w| f.target().level_norm(&sub(&w[0], &w[1]), m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Consistency {
        central,
        one_sided,
        scale,
    })
}

fn ladder_jacobians(
    f: &dyn ScMap,
    x: &[f64],
    config: &CertifyConfig,
) -> Result<Vec<(usize, DMatrix<f64>)>> {
    let n = f.domain().truncation_of(x.len())?;
    let mut rungs: Vec<usize> = f
        .domain()
        .ladder()
        .iter()
        .copied()
        .filter(|&r| r <= n)
        .collect();
    if !f.domain().has_truncated() || rungs.is_empty() {
        rungs = alloc::vec![n];
    }
    rungs
        .into_iter()
        .map(|r| {
            let xr = f.domain().restrict(x, r)?;
            Ok((r, fd::fd_jacobian(f, &xr, config.fd_step)?))
        })
        .collect()
}

fn weighted_norm(f: &dyn ScMap, j: &DMatrix<f64>, from: usize, to: usize, n: usize) -> f64 {
    let left = f.target().level_weights(to as i32, n);
    let right = f.domain().inverse_level_weights(from, n);
    linalg::spectral_norm(&linalg::scale_rows_cols(j, &left, &right))
}

fn stabilized(norms: &[(usize, f64)], tol: f64) -> (f64, bool) {
    let finite = norms.iter().all(|(_, v)| v.is_finite());
    let ratio = match norms {
        [.., (_, a), (_, b)] if *a > 0.0 => b / a,
        [.., (_, a), (_, b)] if *a == 0.0 && *b == 0.0 => 1.0,
        [_] => 1.0,
        _ => f64::INFINITY,
    };
    (ratio, finite && ratio <= 1.0 + tol)
}

fn sc1_checks(
    f: &dyn ScMap,
    samples: &[Vec<f64>],
    m_max: usize,
    config: &CertifyConfig,
    rng: &mut SeededRng,
    report: &mut CertificateReport,
) -> Result<()> {
    let top = top_level(f, m_max);
    for (i, x) in samples.iter().enumerate() {
        let n = f.domain().truncation_of(x.len())?;
        let rx = regularity_of(f.domain(), x, &config.regularity)?;
        let jacobians = ladder_jacobians(f, x, config)?;
        let mut levels_checked = Vec::new();
        let mut consistency_rows = Vec::new();
        for m in 0..=top {
            if m + 1 > f.domain().max_level() || (m + 1) as f64 > rx + config.level_slack {
                for name in ["diagonal_c1", "extension", "joint_continuity"] {
                    report.checks.push(
                        CheckEntry::new(name, i, Some(m), CheckStatus::Skipped, Vec::new())
                            .with_note("sample or scale below level m+1"),
                    );
                }
                continue;
            }
            levels_checked.push(m);
            // (i) the diagonal map E_{m+1} → F_m is C¹
            let mut worst_central: Vec<f64> = Vec::new();
            let mut status = CheckStatus::Pass;
            let mut note = None;
            for _ in 0..config.directions {
                let xi = unit_direction(f.domain(), n, m + 1, rng)?;
                let c = consistency(f, x, &xi, m, config)?;
                let floor = config.fd_floor * c.scale;
                let tail_converged = c.central.last().map_or(true, |&r| r <= floor);
                let monotone = c
                    .central
                    .windows(2)
                    .all(|w| w[1] <= w[0] * (1.0 + 1e-6) || w[1] <= floor);
                if !tail_converged && !monotone {
                    return Err(ScError::FdInstability {
                        residuals: c.central,
                    });
                }
                if !converges(&c.central, floor, config.decrease_factor) {
                    status = CheckStatus::Fail;
                    note = Some("central differences do not converge".to_string());
                }
                if !converges(&c.one_sided, floor, config.decrease_factor) {
                    status = CheckStatus::Fail;
                    note = Some("one-sided derivatives disagree".to_string());
                }
                if worst_central.last().copied().unwrap_or(0.0)
                    <= c.central.last().copied().unwrap_or(0.0)
                {
                    worst_central = c.central.iter().chain(&c.one_sided).copied().collect();
                }
            }
            consistency_rows.push((
                m,
                worst_central
                    .get(config.halvings.saturating_sub(1))
                    .copied()
                    .unwrap_or(0.0),
            ));
            let mut entry = CheckEntry::new("diagonal_c1", i, Some(m), status, worst_central);
            entry.note = note;
            report.checks.push(entry);

            // (ii) Df(x) extends to a bounded operator E_m → F_m
            let norms: Vec<(usize, f64)> = jacobians
                .iter()
                .map(|(r, j)| (*r, weighted_norm(f, j, m, m, *r)))
                .collect();
            let (ratio, ok) = stabilized(&norms, config.stability_tol);
            let mut residuals: Vec<f64> = norms.iter().map(|p| p.1).collect();
            residuals.push(ratio);
            report.checks.push(CheckEntry::new(
                "extension",
                i,
                Some(m),
                if ok {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
                residuals,
            ));

            // (iii) (x, ξ) ↦ Df(x)ξ is continuous on U_{m+1} ⊕ E_m
            let xi = unit_direction(f.domain(), n, m, rng)?;
            let delta = unit_direction(f.domain(), n, m + 1, rng)?;
            let res = continuity_residuals(f, x, &delta, m, config, &|y| {
                fd::derivative_or_fd(f, y, &xi)
            })?;
            let base = fd::derivative_or_fd(f, x, &xi)?;
            let scale = f.target().level_norm(&base, m)?;
            // finite-difference derivatives carry their own noise floor
            let ok = continuity_ok(&res, config.fd_floor * scale.max(1.0), config);
            report.checks.push(CheckEntry::new(
                "joint_continuity",
                i,
                Some(m),
                if ok {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
                res,
            ));
        }
        let (truncation, jacobian) = jacobians.last().cloned().expect("at least one rung");
        let _ = truncation;
        report.derivative_samples.push(ScDerivativeSample {
            sample: i,
            truncation: n,
            fd_step: config.fd_step.unwrap_or_else(|| default_step(x)),
            levels_checked,
            consistency: consistency_rows,
            jacobian,
        });
    }
    Ok(())
}

/// sc¹ certificate: the sc⁰ checks, then for every sample of regularity at
/// least `m+1` (i) step-halving consistency of the diagonal derivative
/// `E_{m+1} → F_m`, (ii) a ladder-stable bound of the derivative as an
/// operator `E_m → F_m` and (iii) joint continuity of `(x, ξ) ↦ Df(x)ξ`.
///
/// Residuals that grow under step halving above the floor raise
/// [`ScError::FdInstability`].
pub fn certify_sc1(
    f: &dyn ScMap,
    samples: &[Vec<f64>],
    m_max: usize,
    config: &CertifyConfig,
) -> Result<CertificateReport> {
    if samples.is_empty() {
        return Err(ScError::Precondition("no samples".into()));
    }
    let mut rng = rng::seeded(config.seed);
    let mut report = empty_report(f, 1, samples.len(), m_max);
    sc0_checks(f, samples, m_max, config, &mut rng, &mut report.checks)?;
    if report.checks.iter().any(|c| c.status == CheckStatus::Fail) {
        return Ok(report.finish());
    }
    sc1_checks(f, samples, m_max, config, &mut rng, &mut report)?;
    Ok(report.finish())
}

fn second_checks(
    f: &dyn ScMap,
    samples: &[Vec<f64>],
    m_max: usize,
    config: &CertifyConfig,
    rng: &mut SeededRng,
    report: &mut CertificateReport,
) -> Result<()> {
    let top = top_level(f, m_max);
    for (i, x) in samples.iter().enumerate() {
        let n = f.domain().truncation_of(x.len())?;
        let rx = regularity_of(f.domain(), x, &config.regularity)?;
        for m in 0..=top {
            if m + 2 > f.domain().max_level() || (m + 2) as f64 > rx + config.level_slack {
                for name in ["second_consistency", "hessian_symmetry", "second_extension"] {
                    report.checks.push(
                        CheckEntry::new(name, i, Some(m), CheckStatus::Skipped, Vec::new())
                            .with_note("sample or scale below level m+2"),
                    );
                }
                continue;
            }
            let xi = unit_direction(f.domain(), n, m + 2, rng)?;
            let eta = unit_direction(f.domain(), n, m + 2, rng)?;
            let mut forms = Vec::with_capacity(3);
            for k in 0..3 {
                let h = config.second_step * 0.5f64.powi(k);
                forms.push(fd::second_fd(f, x, &xi, &eta, h)?);
            }
            let scale = f.target().level_norm(&forms[0], m)?.max(1.0);
            let mut residuals = forms
                .windows(2)
                .map(|w| f.target().level_norm(&sub(&w[0], &w[1]), m))
                .collect::<Result<Vec<_>>>()?;
            let floor = 1e-6 * scale;
            let mut ok = converges(&residuals, floor, config.decrease_factor);
            let mut note = None;
            if let Some(analytic) = f.second_derivative(x, &xi, &eta) {
                let analytic = analytic?;
                let gap = f.target().level_norm(&sub(&forms[2], &analytic), m)? / scale;
                residuals.push(gap);
                if gap > config.analytic_tol {
                    ok = false;
                    note = Some(
                        "finite differences disagree with the analytic second derivative"
                            .to_string(),
                    );
                }
            }
            let mut entry = CheckEntry::new(
                "second_consistency",
                i,
                Some(m),
                if ok {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
                residuals,
            );
            entry.note = note;
            report.checks.push(entry);

            let b_xe = &forms[2];
            let b_ex = fd::second_fd(f, x, &eta, &xi, config.second_step * 0.25)?;
            let norm0 = |v: &[f64]| f.domain().level_norm(v, 0);
            let bound = config.symmetry_tol * norm0(&xi)? * norm0(&eta)?;
            let asym = f.target().level_norm(&sub(b_xe, &b_ex), 0)?;
            report.checks.push(CheckEntry::new(
                "hessian_symmetry",
                i,
                Some(m),
                if asym <= bound.max(1e-13) {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
                alloc::vec![asym, bound],
            ));

            // bounded extension to E_{m+1} ⊕ E_{m+1} → F_m along the ladder
            let mut rungs: Vec<usize> = f
                .domain()
                .ladder()
                .iter()
                .copied()
                .filter(|&r| r <= n)
                .collect();
            if rungs.is_empty() {
                rungs.push(n);
            }
            let p = unit_direction(f.domain(), n, m + 1, rng)?;
            let q = unit_direction(f.domain(), n, m + 1, rng)?;
            let mut norms = Vec::with_capacity(rungs.len());
            for r in rungs {
                let (xr, pr, qr) = (
                    f.domain().restrict(x, r)?,
                    f.domain().restrict(&p, r)?,
                    f.domain().restrict(&q, r)?,
                );
                let b = match f.second_derivative(&xr, &pr, &qr) {
                    Some(b) => b?,
                    None => fd::second_fd(f, &xr, &pr, &qr, config.second_step * 0.25)?,
                };
                let denom =
                    f.domain().level_norm(&pr, m + 1)? * f.domain().level_norm(&qr, m + 1)?;
                norms.push((
                    r,
                    f.target().level_norm(&b, m)? / denom.max(f64::MIN_POSITIVE),
                ));
            }
            let (ratio, ok) = stabilized(&norms, config.stability_tol);
            let mut residuals: Vec<f64> = norms.iter().map(|p| p.1).collect();
            residuals.push(ratio);
            report.checks.push(CheckEntry::new(
                "second_extension",
                i,
                Some(m),
                if ok {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
                residuals,
            ));
        }
    }
    Ok(())
}

/// sc² certificate: the sc¹ checks, then for samples of regularity at least
/// `m+2` consistency of the finite-difference second derivative, Hessian
/// symmetry and a ladder-stable bound on `E_{m+1} ⊕ E_{m+1} → F_m`.
pub fn certify_sc2(
    f: &dyn ScMap,
    samples: &[Vec<f64>],
    m_max: usize,
    config: &CertifyConfig,
) -> Result<CertificateReport> {
    let mut report = certify_sc1(f, samples, m_max, config)?;
    report.order = 2;
    if !report.accepted {
        return Ok(report);
    }
    let mut rng = rng::seeded(config.seed ^ 0x5c2);
    second_checks(f, samples, m_max, config, &mut rng, &mut report)?;
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{Coefficientwise, Nonlinearity, OperatorMap, PolynomialMap, ShiftMap};
    use crate::linear::templates;
    use crate::{TruncatedScale, WeightSequence};
    use alloc::vec;

    fn circle() -> TruncatedScale {
        TruncatedScale::new(WeightSequence::sobolev_circle(), vec![32, 64], 3).unwrap()
    }

    fn smooth_samples(s: &TruncatedScale, n: usize, count: usize) -> Vec<Vec<f64>> {
        let mut r = rng::seeded(9);
        (0..count)
            .map(|_| smooth_point(s, n, 0.4, &mut r))
            .collect()
    }

    #[test]
    fn identity_is_sc1() {
        let s = circle();
        let f = OperatorMap::new(templates::identity(&s));
        let rep =
            certify_sc1(&f, &smooth_samples(&s, 64, 2), 2, &CertifyConfig::default()).unwrap();
        assert!(rep.accepted, "{:?}", rep.failures().collect::<Vec<_>>());
        assert!(rep
            .named("diagonal_c1")
            .any(|c| c.status == CheckStatus::Pass));
    }

    #[test]
    fn sign_is_not_continuous() {
        let s = TruncatedScale::constant(3, 1);
        let f = Coefficientwise::new(Nonlinearity::Sign, &s);
        let rep = certify_sc0(&f, &[vec![0.0, 1.0, -1.0]], 1, &CertifyConfig::default()).unwrap();
        assert!(!rep.accepted);
        assert!(rep
            .named("continuity")
            .all(|c| c.status == CheckStatus::Fail));
    }

    #[test]
    fn signed_square_is_c1_but_abs_is_not() {
        let s = TruncatedScale::constant(2, 1);
        let samples = vec![vec![0.0, 0.0], vec![0.5, -1.0]];
        let ok = certify_sc1(
            &Coefficientwise::new(Nonlinearity::SignedSquare, &s),
            &samples,
            1,
            &CertifyConfig::default(),
        )
        .unwrap();
        assert!(ok.accepted, "{:?}", ok.failures().collect::<Vec<_>>());
        let abs = certify_sc1(
            &Coefficientwise::new(Nonlinearity::Abs, &s),
            &samples,
            1,
            &CertifyConfig::default(),
        )
        .unwrap();
        assert!(!abs.accepted);
        let fails: Vec<_> = abs.failures().collect();
        assert!(fails.iter().all(|c| c.sample == Some(0)), "{fails:?}");
        assert!(fails.iter().any(|c| c.name == "diagonal_c1"));
    }

    #[test]
    fn shift_map_is_sc1() {
        let s = circle();
        let psi = ShiftMap::new(&s).unwrap();
        let mut samples = smooth_samples(&s.with_prefix(1), 64, 2);
        samples[0][0] = 0.2;
        let rep = certify_sc1(&psi, &samples, 1, &CertifyConfig::default()).unwrap();
        assert!(rep.accepted, "{:?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn quadratic_is_sc2() {
        let s = circle();
        let f = PolynomialMap::new(&s, vec![0.0, 1.0, 1.0]).unwrap();
        let rep =
            certify_sc2(&f, &smooth_samples(&s, 64, 1), 1, &CertifyConfig::default()).unwrap();
        assert!(rep.accepted, "{:?}", rep.failures().collect::<Vec<_>>());
        assert!(rep
            .named("hessian_symmetry")
            .any(|c| c.status == CheckStatus::Pass));
    }
}
