use anyhow::{ensure, Result};
use serde_json::json;

use sclab_core::diff::CertifyConfig;
use sclab_core::polyfold::{
    chart_degeneracy, check_atlas, half_line_chart, la_chart, min_degeneracy, PartialQuadrant,
};

use super::{to_value, Check, Outcome};
use crate::config::DegeneracyParams;
use crate::formats::{num, Table};

pub const COLUMNS: &[&str] = &["kind", "label", "coordinates", "index"];

fn coordinates(x: &[f64]) -> String {
    x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ")
}

pub fn run(p: &DegeneracyParams) -> Result<Outcome> {
    let q = PartialQuadrant::new(p.corners);
    let mut table = Table::new(COLUMNS);
    let mut checks = Vec::new();

    let indices: Vec<usize> = p
        .points
        .iter()
        .map(|x| q.degeneracy_index(x))
        .collect::<Result<_, _>>()?;
    for (x, d) in p.points.iter().zip(&indices) {
        table.push(vec![
            "quadrant".into(),
            String::new(),
            coordinates(x),
            d.to_string(),
        ]);
    }
    if let Some(expected) = &p.expected {
        ensure!(
            expected.len() == p.points.len(),
            "{} expected indices for {} points",
            expected.len(),
            p.points.len()
        );
        checks.push(Check::new(
            "quadrant-indices",
            &indices == expected,
            format!("indices {indices:?}, expected {expected:?}"),
        ));
    }

    let mut charts = Vec::new();
    for &a in &p.chart_slopes {
        charts.push(la_chart(a)?);
    }
    if p.identity_chart {
        charts.push(half_line_chart()?);
    }
    let mut per_chart = Vec::new();
    let mut minima = Vec::new();
    if !charts.is_empty() {
        for &x in &p.chart_points {
            let ds: Vec<usize> = charts
                .iter()
                .map(|c| chart_degeneracy(&[x], c))
                .collect::<Result<_, _>>()?;
            for (c, d) in charts.iter().zip(&ds) {
                table.push(vec!["chart".into(), c.label.clone(), num(x), d.to_string()]);
            }
            let m = min_degeneracy(&[x], &charts)?;
            table.push(vec!["min".into(), String::new(), num(x), m.to_string()]);
            checks.push(Check::new(
                format!("min-over-charts-{}", num(x)),
                ds.iter().all(|&d| m <= d) && ds.contains(&m),
                format!("per chart {ds:?}, minimum {m}"),
            ));
            per_chart.push(json!({"x": x, "indices": ds}));
            minima.push(m);
        }
    }
    let mut atlas = None;
    if charts.len() > 1 {
        let samples: Vec<Vec<f64>> = p.chart_points.iter().map(|&x| vec![x]).collect();
        let rep = check_atlas(&charts, &samples, 1, &CertifyConfig::default())?;
        checks.push(Check::new(
            "atlas-compatible",
            rep.compatible,
            format!("{} chart pairs", rep.pairs.len()),
        ));
        atlas = Some(to_value(&rep)?);
    }

    let data = json!({
        "corners": p.corners,
        "indices": indices,
        "charts": charts.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
        "per_chart": per_chart,
        "min_over_charts": minima,
        "atlas": atlas,
    });
    Ok(Outcome {
        checks,
        table,
        data,
    })
}
