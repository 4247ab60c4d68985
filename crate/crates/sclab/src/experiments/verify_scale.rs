use anyhow::Result;
use serde_json::json;

use sclab_core::rng;
use sclab_core::scale::{point_of_regularity, smooth_point, RegularityConfig};

use super::{within, Check, Context, Outcome};
use crate::config::VerifyScaleParams;
use crate::formats::{num, Table};

pub const COLUMNS: &[&str] = &["from_level", "to_level", "index", "singular_value"];

pub fn run(p: &VerifyScaleParams, ctx: &Context) -> Result<Outcome> {
    let scale = p.scale.build()?;
    let n = scale.largest_truncation();
    let top = scale.max_level();
    let cfg = RegularityConfig::default();
    let mut checks = Vec::new();
    let mut table = Table::new(COLUMNS);

    // compactness: inclusion singular values are bounded by 1 and decay
    let mut compact = true;
    for m in 0..top {
        let sv = scale.inclusion_singular_values(m, n)?;
        for (i, s) in sv.iter().enumerate() {
            table.push(vec![
                m.to_string(),
                (m + 1).to_string(),
                i.to_string(),
                num(*s),
            ]);
        }
        let bounded = sv.iter().all(|&s| s <= 1.0);
        let decays =
            sv.last().zip(sv.first()).is_some_and(|(l, f)| l < f) || !scale.has_truncated();
        compact &= bounded && decays;
    }
    checks.push(Check::new(
        "inclusions-compact",
        compact,
        format!("levels 0..{top} at N = {n}"),
    ));

    // level norms increase with the level; smooth points are approximated
    // by their truncations in every level
    let mut g = rng::seeded(ctx.seed);
    let mut monotone = true;
    let mut dense = true;
    let mut worst_density = 0.0f64;
    for _ in 0..p.samples {
        let x = point_of_regularity(&scale, top as f64 + 0.5, n, &mut g);
        let norms: Vec<f64> = (0..=top)
            .map(|m| scale.level_norm(&x, m))
            .collect::<Result<_, _>>()?;
        monotone &= norms.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-14));
        if scale.has_truncated() {
            let y = smooth_point(&scale, n, 0.1, &mut g);
            for m in 0..=top {
                let tails: Vec<f64> = scale
                    .ladder()
                    .iter()
                    .map(|&k| scale.density_residual(&y, m, k))
                    .collect::<Result<_, _>>()?;
                let first = tails.first().copied().unwrap_or(0.0);
                let full = scale.level_norm(&y, m)?;
                dense &= tails.windows(2).all(|w| w[1] <= w[0]) && first <= full;
                if full > 0.0 {
                    worst_density = worst_density.max(first / full);
                }
            }
        }
    }
    checks.push(Check::new(
        "level-norms-monotone",
        monotone,
        format!("{} samples", p.samples),
    ));
    checks.push(Check::new(
        "smooth-points-dense",
        dense,
        format!("largest relative tail at the first cutoff {worst_density:e}"),
    ));

    // calibration of the regularity estimator on x_n = w_n^{-s}
    let mut calibration = Vec::new();
    let offset = scale
        .components()
        .iter()
        .find_map(|c| c.weights.growth_exponent())
        .map(|p| 0.5 / p);
    if let (Some(offset), true) = (offset, scale.has_truncated()) {
        let w = scale.weights_vector(n);
        for &s in &p.calibration {
            let x: Vec<f64> = w.iter().map(|w| w.powf(-s)).collect();
            let est = scale.estimate_regularity(&x, &cfg)?;
            let expected = s - offset;
            let ok = within(est.level, expected, p.calibration_tol);
            checks.push(Check::new(
                format!("calibration-s{s}"),
                ok,
                format!(
                    "estimated {} expected {expected} ± {}",
                    est.level, p.calibration_tol
                ),
            ));
            calibration.push(json!({"planted": s, "expected": expected, "estimated": est.level}));
        }
        let x: Vec<f64> = (0..w.len()).map(|i| (-(i as f64)).exp()).collect();
        let est = scale.estimate_regularity(&x, &cfg)?;
        checks.push(Check::new(
            "geometric-decay-smooth",
            est.is_smooth(),
            format!("estimated {}", est.level),
        ));
    }

    let data = json!({
        "truncation": n,
        "max_level": top,
        "calibration": calibration,
    });
    Ok(Outcome {
        checks,
        table,
        data,
    })
}
