use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::diff::{
    certify_sc1, fd_jacobian, CertificateReport, CertifyConfig, Compose, ScMap, TangentMap,
};
use crate::linalg::sub;
use crate::scale::{smooth_point, RegularityConfig};
use crate::{Result, ScError};

/// A retraction `r = r∘r` together with the sampled evidence for it.
#[derive(Clone)]
pub struct RetractModel {
    r: Arc<dyn ScMap>,
    pub idempotency_tol: f64,
    /// `|r(r(x)) − r(x)|₀` per sample.
    pub residuals: Vec<f64>,
}

impl core::fmt::Debug for RetractModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RetractModel")
            .field("r", &self.r.name())
            .field("idempotency_tol", &self.idempotency_tol)
            .field("residuals", &self.residuals)
            .finish()
    }
}

impl RetractModel {
    pub fn retraction(&self) -> &Arc<dyn ScMap> {
        &self.r
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `|r(x) − x|₀`.
    pub fn fixed_residual(&self, x: &[f64]) -> Result<f64> {
        self.r.domain().level_norm(&sub(&self.r.eval(x)?, x), 0)
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.fixed_residual(x)? <= self.idempotency_tol)
    }

    /// A point of `O = r(U)`: the image of a smooth random point.
    pub fn sample_fixed<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        for _ in 0..100 {
            let x = smooth_point(self.r.domain(), n, 0.3, rng);
            if self.r.contains(&x) {
                return self.r.eval(&x);
            }
        }
        Err(ScError::Evaluation(format!(
            "no sample inside the domain of `{}`",
            self.r.name()
        )))
    }

    /// sc¹ certificate of `r`.
    pub fn certify(
        &self,
        samples: &[Vec<f64>],
        m_max: usize,
        config: &CertifyConfig,
    ) -> Result<CertificateReport> {
        certify_sc1(&*self.r, samples, m_max, config)
    }
}

fn same_scale(a: &dyn ScMap) -> bool {
    a.domain().components() == a.target().components()
}

/// Checks `r∘r = r` on the samples.
///
/// Fails with [`ScError::NotARetraction`] naming the worst sample when a
/// residual exceeds `tol`.
pub fn check_retraction(r: Arc<dyn ScMap>, samples: &[Vec<f64>], tol: f64) -> Result<RetractModel> {
    if !same_scale(&*r) {
        return Err(ScError::Precondition(format!(
            "`{}` does not map a scale to itself",
            r.name()
        )));
    }
    let mut residuals = Vec::with_capacity(samples.len());
    for x in samples {
        let y = r.eval(x)?;
        let z = r.eval(&y)?;
        residuals.push(r.domain().level_norm(&sub(&z, &y), 0)?);
    }
    if let Some((sample, &residual)) = residuals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
    {
        if residual > tol || residual.is_nan() {
            return Err(ScError::NotARetraction { residual, sample });
        }
    }
    Ok(RetractModel {
        r,
        idempotency_tol: tol,
        residuals,
    })
}

/// `Tr(x, ξ) = (r(x), Dr(x)ξ)` with its sampled idempotency.
#[derive(Clone)]
pub struct TangentRetraction {
    pub map: TangentMap,
    /// `|Tr(Tr(p)) − Tr(p)|₀` per sample.
    pub residuals: Vec<f64>,
    /// `|Dr(r(x))Dr(x)ξ − Dr(x)ξ|₀` per sample.
    pub chain_residuals: Vec<f64>,
}

impl TangentRetraction {
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .chain(&self.chain_residuals)
            .copied()
            .fold(0.0, f64::max)
    }

    /// A point of `TO = Fix Tr`.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.map.eval(p)
    }
}

/// Builds `Tr` and measures `Tr∘Tr = Tr` and `Dr(r(x))Dr(x) = Dr(x)` on
/// sampled `(x, ξ)`.
pub fn tangent_retraction(
    model: &RetractModel,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<TangentRetraction> {
    let r = model.retraction().clone();
    let map = TangentMap::new(r.clone());
    let mut residuals = Vec::with_capacity(samples.len());
    let mut chain_residuals = Vec::with_capacity(samples.len());
    for (x, xi) in samples {
        let p = TangentMap::join(x, xi);
        let tp = map.eval(&p)?;
        let ttp = map.eval(&tp)?;
        residuals.push(map.target().level_norm(&sub(&ttp, &tp), 0)?);
        let (rx, drxi) = tp.split_at(x.len());
        let again = crate::diff::fd::derivative_or_fd(&*r, rx, drxi)?;
        chain_residuals.push(r.domain().level_norm(&sub(&again, drxi), 0)?);
    }
    Ok(TangentRetraction {
        map,
        residuals,
        chain_residuals,
    })
}

/// Jacobian from the analytic derivative when present, else by central
/// differences.
pub(crate) fn jacobian(f: &dyn ScMap, x: &[f64]) -> Result<DMatrix<f64>> {
    let mut e = alloc::vec![0.0; x.len()];
    let mut cols = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        e[j] = 1.0;
        match f.derivative(x, &e) {
            Some(col) => cols.push(DVector::from_vec(col?)),
            None => return fd_jacobian(f, x, None),
        }
        e[j] = 0.0;
    }
    Ok(DMatrix::from_columns(&cols))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TangentSpace {
    /// Orthonormal basis of `Fix Dr(x)` as columns.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub basis: DMatrix<f64>,
    pub dimension: usize,
    /// Singular values of `Dr(x) − 1`, decreasing.
    pub singular_values: Vec<f64>,
}

/// Gap below which a singular value of `Dr(x) − 1` counts as zero,
/// relative to `max(1, ‖Dr(x)‖)`.
pub const EIGEN_TOL: f64 = 1e-6;
/// Singular values between [`EIGEN_TOL`] and this are ambiguous.
pub const EIGEN_GAP: f64 = 1e-3;

/// `T_xO = Fix Dr(x)`, the null space of `Dr(x) − 1`.
///
/// `Dr(x)` is idempotent up to differencing error, so the singular values of
/// `Dr(x) − 1` are either tiny or at least one; values in between raise
/// [`ScError::AmbiguousRank`].
pub fn tangent_space(model: &RetractModel, x: &[f64]) -> Result<TangentSpace> {
    let r = model.retraction();
    let residual = model.fixed_residual(x)?;
    if residual > model.idempotency_tol {
        return Err(ScError::Precondition(format!(
            "point is not fixed: |r(x) − x|₀ = {residual:e}"
        )));
    }
    if r.domain().has_truncated() {
        let est = r
            .domain()
            .estimate_regularity(x, &RegularityConfig::default())?
            .level;
        if est < 0.75 {
            return Err(ScError::Level {
                required: 1.0,
                estimated: est,
            });
        }
    }
    let j = jacobian(&**r, x)?;
    let n = j.nrows();
    let scale = crate::linalg::spectral_norm(&j).max(1.0);
    let a = &j - DMatrix::<f64>::identity(n, n);
    let svd = a.svd(false, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| svd.singular_values[q].total_cmp(&svd.singular_values[p]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let (lo, hi) = (EIGEN_TOL * scale, EIGEN_GAP * scale);
    if let Some(&s) = sv.iter().find(|&&s| s > lo && s < hi) {
        return Err(ScError::AmbiguousRank {
            ratio: s / scale,
            lower: EIGEN_TOL,
            upper: EIGEN_GAP,
        });
    }
    let v_t = svd.v_t.expect("requested");
    let kernel: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| svd.singular_values[i] <= lo)
        .collect();
    let basis = DMatrix::from_fn(n, kernel.len(), |row, c| v_t[(kernel[c], row)]);
    Ok(TangentSpace {
        dimension: kernel.len(),
        basis,
        singular_values: sv,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RetractMapReport {
    pub map: String,
    /// `|r'(f(x)) − f(x)|₀` per sample.
    pub containment: Vec<f64>,
    /// Certificate of `f∘r`.
    pub certificate: CertificateReport,
    /// Certificate of `f∘r̃` for the alternative retraction, if given.
    pub alternative: Option<CertificateReport>,
    /// Both decompressions reach the same verdict.
    pub decompression_agrees: Option<bool>,
    pub accepted: bool,
}

/// Certifies a map `f: O → O'` between retracts through its decompression
/// `f∘r`.
///
/// Samples must lie in `O`. A sample whose image leaves `O'` raises
/// [`ScError::Containment`]. With `alternative`, a second retraction onto
/// the same `O`, both decompressions are certified and compared.
pub fn check_retract_map(
    f: Arc<dyn ScMap>,
    model: &RetractModel,
    target_model: &RetractModel,
    samples: &[Vec<f64>],
    m_max: usize,
    config: &CertifyConfig,
    alternative: Option<&RetractModel>,
) -> Result<RetractMapReport> {
    if f.domain().components() != model.retraction().domain().components()
        || f.target().components() != target_model.retraction().domain().components()
    {
        return Err(ScError::Precondition(
            "map does not connect the two retracts".into(),
        ));
    }
    let mut containment = Vec::with_capacity(samples.len());
    for (i, x) in samples.iter().enumerate() {
        let res = model.fixed_residual(x)?;
        if res > model.idempotency_tol {
            return Err(ScError::Precondition(format!(
                "sample {i} is not in the source retract ({res:e})"
            )));
        }
        let residual = target_model.fixed_residual(&f.eval(x)?)?;
        if residual > target_model.idempotency_tol {
            return Err(ScError::Containment {
                residual,
                sample: i,
            });
        }
        containment.push(residual);
    }
    let decompressed = Compose::new(model.retraction().clone(), f.clone());
    let certificate = certify_sc1(&decompressed, samples, m_max, config)?;
    let alternative = alternative
        .map(|alt| {
            certify_sc1(
                &Compose::new(alt.retraction().clone(), f.clone()),
                samples,
                m_max,
                config,
            )
        })
        .transpose()?;
    let decompression_agrees = alternative
        .as_ref()
        .map(|a| a.accepted == certificate.accepted);
    Ok(RetractMapReport {
        map: f.name().into(),
        containment,
        accepted: certificate.accepted && decompression_agrees.unwrap_or(true),
        certificate,
        alternative,
        decompression_agrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{FnMap, OperatorMap};
    use crate::linear::templates;
    use crate::rng;
    use crate::TruncatedScale;
    use alloc::vec;

    pub(crate) fn graph_retraction() -> Arc<dyn ScMap> {
        let s = TruncatedScale::constant(2, 3);
        Arc::new(FnMap::new("graph of x²", s.clone(), s, |z| {
            Ok(vec![z[0], z[0] * z[0]])
        }))
    }

    fn plane_samples() -> Vec<Vec<f64>> {
        let mut r = rng::seeded(11);
        (0..10)
            .map(|_| vec![rng::symmetric(&mut r), rng::symmetric(&mut r)])
            .collect()
    }

    fn projector() -> Arc<dyn ScMap> {
        let s = TruncatedScale::constant(3, 3);
        let p = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        Arc::new(OperatorMap::new(templates::matrix(&s, &s, p).unwrap()))
    }

    #[test]
    fn identity_and_projector_are_retractions() {
        let s = TruncatedScale::constant(3, 3);
        let id: Arc<dyn ScMap> = Arc::new(OperatorMap::new(templates::identity(&s)));
        let samples = vec![vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 0.0]];
        let m = check_retraction(id, &samples, 1e-12).unwrap();
        assert!(m.contains(&[4.0, 5.0, 6.0]).unwrap());
        let p = check_retraction(projector(), &samples, 1e-12).unwrap();
        assert!(!p.contains(&[0.0, 0.0, 1.0]).unwrap());
        assert_eq!(tangent_space(&p, &[1.0, 2.0, 0.0]).unwrap().dimension, 2);
    }

    #[test]
    fn graph_retraction_and_its_tangent() {
        let m = check_retraction(graph_retraction(), &plane_samples(), 1e-14).unwrap();
        assert_eq!(m.max_residual(), 0.0);
        let tr = tangent_retraction(
            &m,
            &[
                (vec![1.0, 1.0], vec![0.3, -2.0]),
                (vec![0.2, 5.0], vec![1.0, 1.0]),
            ],
        )
        .unwrap();
        assert!(tr.max_residual() < 1e-8, "{:?}", tr.residuals);
        // Dr(1, 1) = [[1, 0], [2, 0]]
        let j = jacobian(&**m.retraction(), &[1.0, 1.0]).unwrap();
        let oracle = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        assert!((j - oracle).abs().max() < 1e-8);
        let ts = tangent_space(&m, &[1.0, 1.0]).unwrap();
        assert_eq!(ts.dimension, 1);
        let b = ts.basis.column(0);
        assert!((b[1] / b[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn non_idempotent_maps_are_rejected() {
        let s = TruncatedScale::constant(2, 3);
        let half: Arc<dyn ScMap> = Arc::new(FnMap::new("half", s.clone(), s, |z| {
            Ok(vec![0.5 * z[0], z[1]])
        }));
        let err = check_retraction(half, &[vec![0.0, 1.0], vec![2.0, 0.0]], 1e-10).unwrap_err();
        assert_eq!(
            err,
            ScError::NotARetraction {
                residual: 0.5,
                sample: 1
            }
        );
    }

    #[test]
    fn retract_maps_and_containment() {
        let p = check_retraction(projector(), &[vec![1.0, 1.0, 1.0]], 1e-12).unwrap();
        let s = TruncatedScale::constant(3, 3);
        // A preserves the plane z = 0
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 0.0, 1.0]);
        let f: Arc<dyn ScMap> = Arc::new(OperatorMap::new(templates::matrix(&s, &s, a).unwrap()));
        let samples = vec![vec![1.0, -1.0, 0.0], vec![0.5, 2.0, 0.0]];
        let rep =
            check_retract_map(f, &p, &p, &samples, 1, &CertifyConfig::default(), Some(&p)).unwrap();
        assert!(rep.accepted);
        assert!(rep.containment.iter().all(|&c| c == 0.0));
        // B sends the plane out of itself
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let g: Arc<dyn ScMap> = Arc::new(OperatorMap::new(templates::matrix(&s, &s, b).unwrap()));
        let err =
            check_retract_map(g, &p, &p, &samples, 1, &CertifyConfig::default(), None).unwrap_err();
        assert!(matches!(err, ScError::Containment { sample: 0, .. }));
    }

    #[test]
    fn inclusion_reproduces_the_certificate_of_r() {
        let m = check_retraction(graph_retraction(), &plane_samples(), 1e-14).unwrap();
        let s = TruncatedScale::constant(2, 3);
        let id: Arc<dyn ScMap> = Arc::new(OperatorMap::new(templates::identity(&s)));
        let samples: Vec<Vec<f64>> = plane_samples()
            .iter()
            .map(|x| m.retraction().eval(x).unwrap())
            .collect();
        let rep =
            check_retract_map(id, &m, &m, &samples, 1, &CertifyConfig::default(), None).unwrap();
        let direct = m.certify(&samples, 1, &CertifyConfig::default()).unwrap();
        assert_eq!(rep.certificate.accepted, direct.accepted);
        assert_eq!(rep.certificate.checks.len(), direct.checks.len());
    }
}
