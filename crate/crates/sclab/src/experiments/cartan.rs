use anyhow::{ensure, Result};

use sclab_core::retract::{cartan_chart, CartanConfig};

use super::{to_value, Check, Context, Outcome};
use crate::config::CartanParams;
use crate::formats::{num, Table};

pub const COLUMNS: &[&str] = &[
    "radius",
    "local_dimension",
    "idempotency_residual",
    "conjugation_residual",
    "derivative_residual",
    "identity_residual",
    "chart_residual",
];

pub fn run(p: &CartanParams, ctx: &Context) -> Result<Outcome> {
    let r = p.retraction.build()?;
    let base = p.base.load(&ctx.base_dir)?;
    ensure!(
        base.len() == p.retraction.dim(),
        "base point has {} coordinates, expected {}",
        base.len(),
        p.retraction.dim()
    );
    let config = p.config.clone().unwrap_or(CartanConfig {
        seed: ctx.seed,
        ..CartanConfig::default()
    });
    let chart = cartan_chart(r, &base, &config)?;

    let mut table = Table::new(COLUMNS);
    table.push(vec![
        num(chart.radius),
        chart.local_dimension.to_string(),
        num(chart.idempotency_residual),
        num(chart.conjugation_residual),
        num(chart.derivative_residual),
        num(chart.identity_residual),
        num(chart.chart_residual),
    ]);
    let mut checks = vec![
        Check::new(
            "conjugation",
            chart.conjugation_residual <= config.conjugation_tol,
            format!(
                "sup |α(r z) − R α(z)| = {} (tol {})",
                num(chart.conjugation_residual),
                config.conjugation_tol
            ),
        ),
        Check::new(
            "derivative-identity",
            chart.derivative_residual <= config.derivative_tol,
            format!(
                "|dα − 1| = {} (tol {})",
                num(chart.derivative_residual),
                config.derivative_tol
            ),
        ),
        Check::new(
            "chart-accepted",
            chart.accepted,
            format!("radius {}", num(chart.radius)),
        ),
    ];
    if let Some(d) = p.expected_dimension {
        checks.push(Check::new(
            "local-dimension",
            chart.local_dimension == d,
            format!("dimension {}, expected {d}", chart.local_dimension),
        ));
    }
    if p.exact_identity {
        checks.push(Check::new(
            "exact-identity",
            chart.identity_residual == 0.0,
            format!("|α − id| = {}", num(chart.identity_residual)),
        ));
    }
    Ok(Outcome {
        checks,
        table,
        data: to_value(&chart)?,
    })
}
