use std::sync::Arc;

use anyhow::Result;
use serde_json::json;

use sclab_core::bundle::{
    check_strong_retraction, classify_section, splicing_strong_retraction, validate_double_index,
    DoubleScaleIndex, SectionConfig,
};
use sclab_core::diff::{OperatorMap, ScMap};
use sclab_core::linalg::RankPolicy;
use sclab_core::linear::templates;
use sclab_core::retract::{check_retraction, splicing_core_scan, JumpingSplicing};
use sclab_core::rng;
use sclab_core::scale::point_of_regularity;

use super::{to_value, Check, Context, Outcome};
use crate::config::{SectionSpec, StrongBundleParams};
use crate::formats::{num, Table};

pub const COLUMNS: &[&str] = &[
    "t",
    "fiber_dimension",
    "rank",
    "idempotency_0",
    "idempotency_1",
    "ok",
];

pub fn run(p: &StrongBundleParams, ctx: &Context) -> Result<Outcome> {
    let mut checks = Vec::new();

    // double-scale indices (m, k) are admissible iff k ≤ m + 1
    let mut mismatches = Vec::new();
    for m in 0..=p.index_grid {
        for k in 0..=p.index_grid + 2 {
            if validate_double_index(DoubleScaleIndex::new(m, k)) != (k <= m + 1) {
                mismatches.push((m, k));
            }
        }
    }
    checks.push(Check::new(
        "double-index-constraint",
        mismatches.is_empty(),
        format!("grid m ≤ {}, mismatches {mismatches:?}", p.index_grid),
    ));

    let family = Arc::new(JumpingSplicing::new(p.grid.build()?)?);
    let retraction = splicing_strong_retraction(family.clone(), p.grid.max_level)?;
    let j = p.grid.grid_size;
    let mut g = rng::seeded(ctx.seed);
    let samples: Vec<(Vec<f64>, Vec<f64>)> = p
        .parameters
        .iter()
        .map(|&t| {
            let mut u = vec![t];
            u.extend((0..j).map(|_| rng::symmetric(&mut g)));
            (u, (0..j).map(|_| rng::symmetric(&mut g)).collect())
        })
        .collect();
    let rep = check_strong_retraction(&retraction, &samples)?;
    let params: Vec<Vec<f64>> = p.parameters.iter().map(|&t| vec![t]).collect();
    let scan = splicing_core_scan(family.as_ref(), &params, &RankPolicy::default())?;
    let dims = rep.fiber_dimensions();
    let ranks: Vec<usize> = scan.iter().map(|r| r.rank).collect();

    let mut table = Table::new(COLUMNS);
    for ((row, &t), rank) in rep.rows.iter().zip(&p.parameters).zip(&ranks) {
        table.push(vec![
            num(t),
            row.fiber_dimension.to_string(),
            rank.to_string(),
            num(row.idempotency[0]),
            num(row.idempotency[1]),
            row.ok.to_string(),
        ]);
    }
    checks.push(Check::new(
        "strong-retraction",
        rep.accepted,
        format!(
            "failing samples {:?}, extracted scales agree = {}",
            rep.failures, rep.extracted_agree
        ),
    ));
    checks.push(Check::new(
        "fiber-dimension-jump",
        dims.iter()
            .zip(&p.parameters)
            .all(|(&d, &t)| d == usize::from(t > 0.0)),
        format!("fiber dimensions {dims:?}"),
    ));
    checks.push(Check::new(
        "fiber-matches-splicing-rank",
        dims == ranks,
        format!("splicing ranks {ranks:?}"),
    ));

    let section = match &p.section {
        Some(spec) => Some(section(spec, ctx, &mut checks)?),
        None => None,
    };
    let data = json!({
        "index_mismatches": mismatches,
        "strong_retraction": to_value(&rep)?,
        "splicing_ranks": ranks,
        "section": section,
    });
    Ok(Outcome {
        checks,
        table,
        data,
    })
}

fn section(
    spec: &SectionSpec,
    ctx: &Context,
    checks: &mut Vec<Check>,
) -> Result<serde_json::Value> {
    let e = spec.scale.build()?;
    let n = e.largest_truncation();
    let id: Arc<dyn ScMap> = Arc::new(OperatorMap::new(templates::identity(&e)));
    let mut g = rng::seeded(ctx.seed);
    let samples: Vec<Vec<f64>> = (0..spec.samples)
        .map(|_| point_of_regularity(&e, spec.sample_level, n, &mut g))
        .collect();
    let model = check_retraction(id, &samples, 0.0)?;
    let s: Arc<dyn ScMap> = Arc::new(OperatorMap::new(spec.principal_part.build(&e)?));
    let config = SectionConfig {
        certify: spec.certify.clone().unwrap_or_default(),
        ..SectionConfig::default()
    };
    let rep = classify_section(s, &model, &samples, &config)?;
    if let Some(expected) = spec.expected {
        checks.push(Check::new(
            "section-class",
            rep.class == expected,
            format!(
                "classified {}, expected {}",
                rep.class.label(),
                expected.label()
            ),
        ));
    }
    to_value(&rep)
}
