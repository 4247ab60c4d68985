use anyhow::{ensure, Context as _, Result};
use nalgebra::DVector;
use rand::Rng;
use serde_json::json;

use sclab_core::linear::{fredholm_certificate, perturbation_stability, templates, FredholmConfig};
use sclab_core::rng;
use sclab_core::scale::{point_of_regularity, RegularityConfig};

use super::{to_value, Check, Context, Outcome};
use crate::config::FredholmParams;
use crate::formats::{num, Table};

pub const COLUMNS: &[&str] = &["trial", "level", "kernel_dim", "rank", "index"];

pub fn run(p: &FredholmParams, ctx: &Context) -> Result<Outcome> {
    let scale = p.scale.build()?;
    let op = p.operator.build(&scale)?;
    let config = FredholmConfig {
        truncation: p.truncation,
        max_level: p.max_level,
        regularity_levels: p.regularity_levels.clone(),
        seed: ctx.seed,
        ..FredholmConfig::default()
    };
    let mut checks = Vec::new();
    let mut table = Table::new(COLUMNS);
    let cert = fredholm_certificate(&op, &config)?;
    let index = cert
        .index
        .map_or("undefined".to_string(), |i| i.to_string());
    for l in &cert.per_level {
        table.push(vec![
            "base".into(),
            l.level.to_string(),
            l.kernel_dim.to_string(),
            l.rank.to_string(),
            index.clone(),
        ]);
    }
    checks.push(Check::new(
        "kernels-agree",
        cert.kernels_agree,
        format!("kernel dims {:?}", cert.per_level_kernel_dims()),
    ));
    checks.push(Check::new(
        "level-regularity",
        cert.level_regularity_ok,
        format!("{} samples", cert.regularity.len()),
    ));
    if let Some(expected) = p.expected_index {
        checks.push(Check::new(
            "index",
            cert.index == Some(expected),
            format!("index {index}, expected {expected}"),
        ));
    }

    let mut gains = Vec::new();
    if let Some(min_gain) = p.min_gain {
        gains = regularizing(&op, &scale, p, ctx.seed)?;
        let worst = gains
            .iter()
            .map(|&(s, level)| level - s)
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "regularizing",
            !gains.is_empty() && worst >= min_gain,
            format!("smallest gain {} (required ≥ {min_gain})", num(worst)),
        ));
    }

    let mut stability = None;
    if let Some(spec) = &p.perturbations {
        ensure!(
            spec.max_rank >= 1,
            "perturbation max_rank must be at least 1"
        );
        let (domain, target) = (op.domain().clone(), op.target().clone());
        let (max_rank, amplitude, rate) = (spec.max_rank, spec.amplitude, spec.rate);
        let family = move |g: &mut rng::SeededRng| {
            let rank = g.random_range(1..=max_rank);
            templates::random_smoothing(&domain, &target, rank, amplitude, rate, g)
        };
        let rep = perturbation_stability(&op, &family, spec.trials, ctx.seed, &config)?;
        for t in &rep.trials {
            let index = t.index.map_or("undefined".to_string(), |i| i.to_string());
            for (level, k) in t.kernel_dims.iter().enumerate() {
                table.push(vec![
                    t.trial.to_string(),
                    level.to_string(),
                    k.to_string(),
                    String::new(),
                    index.clone(),
                ]);
            }
        }
        let constant = rep
            .trials
            .iter()
            .all(|t| t.kernel_dims.windows(2).all(|w| w[0] == w[1]));
        let same = rep.trials.iter().all(|t| t.same_index && t.error.is_none());
        checks.push(Check::new(
            "perturbations-preserve-index",
            same,
            format!("{} trials", rep.trials.len()),
        ));
        checks.push(Check::new(
            "perturbations-kernel-constant",
            constant,
            "kernel dims agree across levels",
        ));
        stability = Some(to_value(&rep.trials)?);
    }

    let data = json!({
        "certificate": to_value(&cert)?,
        "regularizing": gains.iter().map(|(s, l)| json!({"target_level": s, "solution_level": l})).collect::<Vec<_>>(),
        "perturbations": stability,
    });
    Ok(Outcome {
        checks,
        table,
        data,
    })
}

/// Solves `T x = y` for synthetic `y` of planted regularity `s` and returns
/// `(s, m̂(x))`, with `m̂` measured in the levels of the base scale.
fn regularizing(
    op: &sclab_core::linear::ScOperator,
    scale: &sclab_core::TruncatedScale,
    p: &FredholmParams,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let n = p
        .truncation
        .unwrap_or_else(|| op.domain().largest_truncation());
    let a = op.assemble(n)?.to_dense();
    ensure!(
        a.is_square(),
        "regularizing check needs a square level-0 matrix"
    );
    let lu = a.lu();
    let mut g = rng::seeded(seed ^ 0x9e37_79b9);
    let cfg = RegularityConfig::default();
    let mut out = Vec::new();
    for &s in &p.regularity_levels {
        let y = point_of_regularity(op.target(), s, n, &mut g);
        let x = lu
            .solve(&DVector::from_vec(y))
            .context("singular level-0 matrix")?;
        let est = scale.estimate_regularity(x.as_slice(), &cfg)?;
        out.push((s, est.level));
    }
    Ok(out)
}
