use anyhow::{ensure, Result};

use sclab_core::polyfold::{check_tame, PartialQuadrant};
use sclab_core::retract::check_retraction;

use super::{to_value, Check, Outcome};
use crate::config::TameParams;
use crate::formats::{num, Table};

pub const COLUMNS: &[&str] = &[
    "sample",
    "coordinates",
    "index",
    "image_index",
    "stratum_ok",
    "transversality_residual",
];

/// Idempotency tolerance for accepting the template as a retraction.
const RETRACTION_TOL: f64 = 1e-10;

pub fn run(p: &TameParams) -> Result<Outcome> {
    ensure!(!p.samples.is_empty(), "tame needs at least one sample");
    let r = p.retraction.build()?;
    let model = check_retraction(r.clone(), &p.samples, RETRACTION_TOL)?;
    let q = PartialQuadrant::new(p.corners);
    let rep = check_tame(&model, &q, &p.samples, p.tol)?;

    let mut table = Table::new(COLUMNS);
    for (i, x) in p.samples.iter().enumerate() {
        let index = q.degeneracy_index(x)?;
        let image_index = q.degeneracy_index(&r.eval(x)?)?;
        let residual = rep
            .transversality
            .iter()
            .find(|t| t.sample == i)
            .map_or(String::new(), |t| num(t.residual));
        table.push(vec![
            i.to_string(),
            x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" "),
            index.to_string(),
            image_index.to_string(),
            (index == image_index).to_string(),
            residual,
        ]);
    }
    let expect = p.expect_tame.unwrap_or(true);
    let detail = match rep.first_violation() {
        Some(v) => format!(
            "tame = {}; strata not preserved at {:?}: index {} maps to {} at {:?}",
            rep.tame, v.point, v.index, v.image_index, v.image
        ),
        None => format!("tame = {}", rep.tame),
    };
    let checks = vec![Check::new(
        "tameness",
        rep.tame == expect,
        format!("{detail} (expected tame = {expect})"),
    )];
    Ok(Outcome {
        checks,
        table,
        data: to_value(&rep)?,
    })
}
