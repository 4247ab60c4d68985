use std::sync::Arc;

use anyhow::Result;
use rand::Rng;
use serde_json::json;

use sclab_core::diff::ScMap;
use sclab_core::linalg::RankPolicy;
use sclab_core::retract::{splicing_core_scan, JumpingSplicing, SplicingRetraction};
use sclab_core::rng;

use super::{to_value, Check, Context, Outcome};
use crate::config::SplicingParams;
use crate::formats::{num, Table};

pub const COLUMNS: &[&str] = &["t", "rank", "dimension", "idempotency_residual"];

/// Parameter range of the random `r_π` samples.
const T_RANGE: (f64, f64) = (-2.0, 2.0);

pub fn run(p: &SplicingParams, ctx: &Context) -> Result<Outcome> {
    let family = Arc::new(JumpingSplicing::new(p.grid.build()?)?);
    let params: Vec<Vec<f64>> = p.parameters.iter().map(|&t| vec![t]).collect();
    let rows = splicing_core_scan(family.as_ref(), &params, &RankPolicy::default())?;

    let mut table = Table::new(COLUMNS);
    for r in &rows {
        table.push(vec![
            num(r.parameters[0]),
            r.rank.to_string(),
            r.dimension.to_string(),
            num(r.idempotency_residual),
        ]);
    }
    let jump = rows
        .iter()
        .all(|r| r.rank == usize::from(r.parameters[0] > 0.0));
    let worst = rows
        .iter()
        .map(|r| r.idempotency_residual)
        .fold(0.0, f64::max);
    let mut checks = vec![
        Check::new(
            "rank-jumps-at-zero",
            jump,
            "rank 0 for t ≤ 0 and 1 for t > 0",
        ),
        Check::new(
            "projections-idempotent",
            worst <= p.tol,
            format!("largest residual {} (tol {})", num(worst), p.tol),
        ),
    ];

    // r_π(t, f) = (t, π_t f) on random admissible (t, f)
    let retraction = SplicingRetraction::new(family.clone(), p.grid.max_level);
    let mut g = rng::seeded(ctx.seed);
    let j = p.grid.grid_size;
    let mut residuals = Vec::with_capacity(p.random_samples);
    for _ in 0..p.random_samples {
        let t = admissible_t(&mut g, family.t_min());
        let mut x = Vec::with_capacity(1 + j);
        x.push(t);
        x.extend((0..j).map(|_| rng::symmetric(&mut g)));
        debug_assert!(retraction.contains(&x));
        residuals.push((t, retraction.idempotency_residual(&x)?));
    }
    let worst_r = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    checks.push(Check::new(
        "retraction-idempotent",
        worst_r <= p.tol,
        format!(
            "largest residual {} on {} samples (tol {})",
            num(worst_r),
            residuals.len(),
            p.tol
        ),
    ));

    let data = json!({
        "t_min": family.t_min(),
        "scan": to_value(&rows)?,
        "retraction_samples": residuals.iter().map(|(t, r)| json!({"t": t, "residual": r})).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        checks,
        table,
        data,
    })
}

/// Uniform on `[T_RANGE.0, 0] ∪ [t_min, T_RANGE.1]`.
fn admissible_t(g: &mut rng::SeededRng, t_min: f64) -> f64 {
    let (lo, hi) = T_RANGE;
    let neg = -lo;
    let pos = (hi - t_min).max(0.0);
    let u = g.random::<f64>() * (neg + pos);
    if u < neg {
        -u
    } else {
        t_min + (u - neg)
    }
}
