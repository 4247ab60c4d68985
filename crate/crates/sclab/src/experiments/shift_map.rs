use anyhow::{ensure, Result};

use sclab_core::diff::shift_map_dichotomy;
use sclab_core::rng;
use sclab_core::scale::smooth_point;

use super::{to_value, Check, Outcome};
use crate::config::ShiftMapParams;
use crate::formats::{num, Table};

pub const COLUMNS: &[&str] = &[
    "nu",
    "tau",
    "truncation",
    "compact_open",
    "horizontal_gap",
    "diagonal_gap",
    "diagonal_bound",
];

const INPUT_SEED: u64 = 0x5eed;

pub fn run(p: &ShiftMapParams) -> Result<Outcome> {
    let scale = p.scale.build()?;
    ensure!(p.max_nu >= 1, "max_nu must be at least 1");
    let n0 = scale.ladder()[0];
    let mut g = rng::seeded(INPUT_SEED);
    let v = smooth_point(&scale, n0, p.input_rate, &mut g);
    let xi = smooth_point(&scale.with_prefix(1), n0, p.input_rate, &mut g);
    let taus: Vec<f64> = (1..=p.max_nu).map(|nu| 0.5f64.powi(nu as i32)).collect();
    let rep = shift_map_dichotomy(&scale, &v, &xi, p.level, &taus, p.max_truncation)?;

    let mut table = Table::new(COLUMNS);
    for (nu, r) in (1..).zip(&rep.rows) {
        table.push(vec![
            nu.to_string(),
            num(r.tau),
            r.truncation.to_string(),
            num(r.compact_open),
            num(r.horizontal_gap),
            num(r.diagonal_gap),
            num(r.diagonal_bound),
        ]);
    }
    let checks = vec![
        Check::new(
            "compact-open-convergence",
            rep.compact_open_converges,
            format!(
                "residuals {} → {}",
                num(rep.rows.first().map_or(0.0, |r| r.compact_open)),
                num(rep.rows.last().map_or(0.0, |r| r.compact_open))
            ),
        ),
        Check::new(
            "norm-topology-failure",
            rep.min_horizontal_gap >= p.min_horizontal_gap,
            format!(
                "smallest horizontal gap {} (required ≥ {})",
                num(rep.min_horizontal_gap),
                p.min_horizontal_gap
            ),
        ),
        Check::new(
            "diagonal-bound",
            rep.diagonal_bounded,
            "gap ≤ 1.01·2πτ on every row",
        ),
    ];
    Ok(Outcome {
        checks,
        table,
        data: to_value(&rep)?,
    })
}
