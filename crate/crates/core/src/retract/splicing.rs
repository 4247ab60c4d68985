use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;

use crate::diff::ScMap;
use crate::linalg::RankPolicy;
use crate::linear::Assembled;
use crate::scale::cosine_bump;
use crate::{GridLineScale, Result, ScError, TruncatedScale};

/// A parameter family `v ↦ π_v` of projections on a fixed fiber.
pub trait SplicingFamily: Send + Sync {
    fn name(&self) -> &str;
    fn parameter_dim(&self) -> usize;
    /// Coordinates of the parameter that must stay nonnegative.
    fn corner_mask(&self) -> Vec<bool> {
        alloc::vec![false; self.parameter_dim()]
    }
    fn fiber_dim(&self) -> usize;
    /// Errors for parameters outside the admissible set.
    fn check_parameter(&self, v: &[f64]) -> Result<()>;
    fn projection(&self, v: &[f64]) -> Result<Assembled>;
    /// Norm used for fiber residuals; Euclidean unless overridden.
    fn fiber_norm(&self, f: &[f64]) -> f64 {
        crate::linalg::euclidean_norm(f)
    }
}

fn check_corners(mask: &[bool], v: &[f64]) -> Result<()> {
    if v.len() != mask.len() {
        return Err(ScError::Shape {
            expected: mask.len(),
            found: v.len(),
        });
    }
    for (i, (&corner, &x)) in mask.iter().zip(v).enumerate() {
        if corner && x < 0.0 {
            return Err(ScError::NotInQuadrant {
                coordinate: i,
                value: x,
            });
        }
    }
    Ok(())
}

/// Spectral norm of `π² − π`.
pub fn idempotency_residual(p: &Assembled) -> f64 {
    match p {
        Assembled::LowRank { left, right } => {
            let k = left.ncols();
            let core = right.transpose() * left - DMatrix::<f64>::identity(k, k);
            Assembled::low_rank(left * core, right.clone()).spectral_norm()
        }
        other => {
            let d = other.to_dense();
            crate::linalg::spectral_norm(&(&d * &d - &d))
        }
    }
}

/// `f ↦ ⟨f, β_t⟩ β_t` on a grid, zero for `t ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplicingProjection {
    pub t: f64,
    /// `β_t` on the grid, normalized so that `⟨β_t, β_t⟩ = 1` under the
    /// grid quadrature; `None` for the zero projection.
    pub beta: Option<Vec<f64>>,
    weights: Vec<f64>,
}

impl SplicingProjection {
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        match &self.beta {
            None => alloc::vec![0.0; f.len()],
            Some(b) => {
                let c: f64 = f
                    .iter()
                    .zip(b)
                    .zip(&self.weights)
                    .map(|((x, y), w)| w * x * y)
                    .sum();
                b.iter().map(|y| c * y).collect()
            }
        }
    }

    /// `π_t = β_t (Wβ_t)ᵀ` with the quadrature weights `W`.
    pub fn assembled(&self) -> Assembled {
        let n = self.weights.len();
        match &self.beta {
            None => Assembled::low_rank(DMatrix::zeros(n, 1), DMatrix::zeros(n, 1)),
            Some(b) => Assembled::low_rank(
                DMatrix::from_column_slice(n, 1, b),
                DMatrix::from_iterator(n, 1, b.iter().zip(&self.weights).map(|(y, w)| y * w)),
            ),
        }
    }

    pub fn rank(&self, policy: &RankPolicy) -> Result<usize> {
        policy.rank(&self.assembled().singular_values())
    }

    pub fn idempotency_residual(&self) -> f64 {
        idempotency_residual(&self.assembled())
    }
}

/// Smallest positive `t` whose bump `β(· + e^{1/t})` fits in `[-L, L]`:
/// `t_min = 1/ln(L − 1)`.
pub fn t_min(half_width: f64) -> Result<f64> {
    if half_width <= 2.0 {
        return Err(ScError::Domain(format!(
            "window half-width {half_width} leaves no room for the bump"
        )));
    }
    Ok(1.0 / (half_width - 1.0).ln())
}

/// The projection `π_t` of the jumping-dimension splicing on the grid.
///
/// Parameters in `(0, t_min)` would push the support of `β_t` out of the
/// window and raise [`ScError::Domain`].
pub fn build_pi_t(t: f64, grid: &GridLineScale) -> Result<SplicingProjection> {
    let weights = grid.quadrature_weights();
    if !t.is_finite() {
        return Err(ScError::Domain(format!("parameter {t} is not finite")));
    }
    if t <= 0.0 {
        return Ok(SplicingProjection {
            t,
            beta: None,
            weights,
        });
    }
    let lower = t_min(grid.half_width())?;
    if t < lower {
        return Err(ScError::Domain(format!(
            "t = {t} below t_min = {lower:.4}: the translated bump leaves [-{}, {}]",
            grid.half_width(),
            grid.half_width()
        )));
    }
    let shift = (1.0 / t).exp();
    let raw = grid.sample(|s| cosine_bump(s + shift));
    let norm = grid.inner_product(&raw, &raw)?.sqrt();
    if norm == 0.0 {
        return Err(ScError::Domain(format!(
            "bump at t = {t} falls between grid nodes"
        )));
    }
    Ok(SplicingProjection {
        t,
        beta: Some(raw.iter().map(|v| v / norm).collect()),
        weights,
    })
}

/// `π_t f = ⟨f, β_t⟩ β_t` for `t > 0` and `0` for `t ≤ 0` on `L²` of a grid
/// window: the splicing whose core has dimension 1 over `t > 0` and 0 over
/// `t ≤ 0`.
#[derive(Debug, Clone)]
pub struct JumpingSplicing {
    grid: GridLineScale,
    t_min: f64,
}

impl JumpingSplicing {
    pub fn new(grid: GridLineScale) -> Result<Self> {
        let t_min = t_min(grid.half_width())?;
        Ok(Self { grid, t_min })
    }

    pub fn grid(&self) -> &GridLineScale {
        &self.grid
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn pi(&self, t: f64) -> Result<SplicingProjection> {
        build_pi_t(t, &self.grid)
    }
}

impl SplicingFamily for JumpingSplicing {
    fn name(&self) -> &str {
        "jumping splicing"
    }
    fn parameter_dim(&self) -> usize {
        1
    }
    fn fiber_dim(&self) -> usize {
        self.grid.grid_size()
    }
    fn check_parameter(&self, v: &[f64]) -> Result<()> {
        check_corners(&self.corner_mask(), v)?;
        if v[0] > 0.0 && v[0] < self.t_min {
            return Err(ScError::Domain(format!(
                "t = {} below t_min = {:.4}",
                v[0], self.t_min
            )));
        }
        Ok(())
    }
    fn projection(&self, v: &[f64]) -> Result<Assembled> {
        self.check_parameter(v)?;
        Ok(self.pi(v[0])?.assembled())
    }
    fn fiber_norm(&self, f: &[f64]) -> f64 {
        self.grid
            .inner_product(f, f)
            .map(|v| v.max(0.0).sqrt())
            .unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SplicingScanRow {
    pub parameters: Vec<f64>,
    pub rank: usize,
    pub idempotency_residual: f64,
    /// Local dimension of the splicing core, `d + rank`.
    pub dimension: usize,
}

/// Rank and idempotency of `π_v` over a parameter grid.
pub fn splicing_core_scan(
    family: &dyn SplicingFamily,
    parameters: &[Vec<f64>],
    policy: &RankPolicy,
) -> Result<Vec<SplicingScanRow>> {
    parameters
        .iter()
        .map(|v| {
            let p = family.projection(v)?;
            let rank = policy.rank(&p.singular_values())?;
            Ok(SplicingScanRow {
                parameters: v.clone(),
                rank,
                idempotency_residual: idempotency_residual(&p),
                dimension: family.parameter_dim() + rank,
            })
        })
        .collect()
}

/// The retraction `r_π(v, f) = (v, π_v f)` onto the splicing core, on the
/// constant scale of `ℝ^d ⊕ ℝ^J`.
#[derive(Clone)]
pub struct SplicingRetraction {
    name: String,
    family: Arc<dyn SplicingFamily>,
    scale: TruncatedScale,
}

impl SplicingRetraction {
    pub fn new(family: Arc<dyn SplicingFamily>, max_level: usize) -> Self {
        let scale =
            TruncatedScale::constant(family.parameter_dim() + family.fiber_dim(), max_level);
        Self {
            name: format!("r_π ({})", family.name()),
            family,
            scale,
        }
    }

    pub fn family(&self) -> &Arc<dyn SplicingFamily> {
        &self.family
    }

    /// `|r(r(x)) − r(x)|` with the fiber norm of the family.
    pub fn idempotency_residual(&self, x: &[f64]) -> Result<f64> {
        let y = self.eval(x)?;
        let z = self.eval(&y)?;
        let d = self.family.parameter_dim();
        let dv = crate::linalg::euclidean_norm(&crate::linalg::sub(&z[..d], &y[..d]));
        let df = self
            .family
            .fiber_norm(&crate::linalg::sub(&z[d..], &y[d..]));
        Ok(dv.hypot(df))
    }
}

impl ScMap for SplicingRetraction {
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
        self.scale.truncation_of(x.len())?;
        let d = self.family.parameter_dim();
        let (v, f) = x.split_at(d);
        let p = self.family.projection(v)?;
        let mut out = v.to_vec();
        out.extend(p.apply(f));
        Ok(out)
    }
    fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.scale.dim(0)
            && self
                .family
                .check_parameter(&x[..self.family.parameter_dim()])
                .is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retract::{check_retraction, tangent_space};
    use crate::rng;
    use alloc::vec;

    fn grid() -> GridLineScale {
        GridLineScale::hilbert(64.0, 8192, 0.5, 2).unwrap()
    }

    #[test]
    fn nonpositive_parameters_give_zero() {
        let p = build_pi_t(-0.5, &grid()).unwrap();
        assert_eq!(p.rank(&RankPolicy::default()).unwrap(), 0);
        assert!(p.apply(&vec![1.0; 8192]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bump_is_a_fixed_point() {
        let g = grid();
        let p = build_pi_t(2.0, &g).unwrap();
        let b = p.beta.clone().unwrap();
        assert!((g.inner_product(&b, &b).unwrap() - 1.0).abs() < 1e-14);
        let pb = p.apply(&b);
        assert!(pb.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        assert_eq!(p.rank(&RankPolicy::default()).unwrap(), 1);
        assert!(p.idempotency_residual() <= 1e-10);
    }

    #[test]
    fn disjoint_support_is_annihilated() {
        let g = grid();
        // β_2 lives on [−e^{1/2} − 1, −e^{1/2} + 1] ⊂ [−3, 0]
        let f = g.sample(|s| if s > 1.0 { 1.0 } else { 0.0 });
        assert!(build_pi_t(2.0, &g)
            .unwrap()
            .apply(&f)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn window_restriction() {
        let g = grid();
        let tm = t_min(64.0).unwrap();
        assert!((tm - 1.0 / 63f64.ln()).abs() < 1e-15);
        assert!(matches!(build_pi_t(0.2, &g), Err(ScError::Domain(_))));
        assert!(build_pi_t(0.25, &g).is_ok());
    }

    #[test]
    fn scan_shows_the_jump() {
        let fam = JumpingSplicing::new(grid()).unwrap();
        let ts: Vec<Vec<f64>> = [-1.0, -0.1, 0.0, 0.25, 0.5, 1.0, 2.0]
            .iter()
            .map(|&t| vec![t])
            .collect();
        let rows = splicing_core_scan(&fam, &ts, &RankPolicy::default()).unwrap();
        let ranks: Vec<usize> = rows.iter().map(|r| r.rank).collect();
        assert_eq!(ranks, vec![0, 0, 0, 1, 1, 1, 1]);
        assert!(rows.iter().all(|r| r.idempotency_residual <= 1e-10));
        assert_eq!(rows[6].dimension, 2);
    }

    #[test]
    fn splicing_retraction_is_idempotent_and_has_jumping_tangent_spaces() {
        let g = GridLineScale::hilbert(64.0, 257, 0.5, 2).unwrap();
        let r = SplicingRetraction::new(Arc::new(JumpingSplicing::new(g.clone()).unwrap()), 3);
        let mut rng = rng::seeded(3);
        let samples: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                let mut x = vec![if i % 2 == 0 { 1.0 + i as f64 } else { -1.0 }];
                x.extend((0..257).map(|_| rng::symmetric(&mut rng)));
                x
            })
            .collect();
        for x in &samples {
            assert!(r.idempotency_residual(x).unwrap() <= 1e-10);
        }
        let model = check_retraction(Arc::new(r.clone()), &samples, 1e-10).unwrap();
        let on_core = r.eval(&samples[0]).unwrap();
        assert_eq!(tangent_space(&model, &on_core).unwrap().dimension, 2);
        let off = r.eval(&samples[1]).unwrap();
        assert_eq!(tangent_space(&model, &off).unwrap().dimension, 1);
    }
}
