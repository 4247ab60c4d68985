use anyhow::Result;

use sclab_core::diff::verify_chain_rule;
use sclab_core::rng;
use sclab_core::scale::smooth_point;

use super::{to_value, Check, Context, Outcome};
use crate::config::ChainRuleParams;
use crate::formats::{num, Table};

pub const COLUMNS: &[&str] = &["sample", "level", "residual"];

/// Decay rate of the random base points.
const SAMPLE_RATE: f64 = 0.1;

pub fn run(p: &ChainRuleParams, ctx: &Context) -> Result<Outcome> {
    let scale = p.scale.build()?;
    let f = p.f.build(&scale)?;
    let g = p.g.build(&scale)?;
    let n = scale.largest_truncation();
    let mut r = rng::seeded(ctx.seed);
    let samples: Vec<Vec<f64>> = (0..p.samples)
        .map(|_| smooth_point(&scale, n, SAMPLE_RATE, &mut r))
        .collect();
    let rep = verify_chain_rule(f.as_ref(), g.as_ref(), &samples, p.m_max, p.tol, ctx.seed)?;

    let mut table = Table::new(COLUMNS);
    for row in &rep.rows {
        table.push(vec![
            row.sample.to_string(),
            row.level.to_string(),
            num(row.residual),
        ]);
    }
    let expected_rows = p.samples * (p.m_max.min(scale.max_level()) + 1);
    let checks = vec![
        Check::new(
            "chain-rule",
            rep.passed,
            format!(
                "largest relative residual {} (tol {})",
                num(rep.max_residual),
                p.tol
            ),
        ),
        Check::new(
            "all-samples-checked",
            rep.skipped == 0 && rep.rows.len() == expected_rows,
            format!("{} rows, {} skipped", rep.rows.len(), rep.skipped),
        ),
    ];
    Ok(Outcome {
        checks,
        table,
        data: to_value(&rep)?,
    })
}
