use std::sync::Arc;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;

use sclab_core::bundle::{check_strong_retraction, splicing_strong_retraction};
use sclab_core::diff::{OperatorMap, ScMap};
use sclab_core::linear::templates;
use sclab_core::polyfold::{
    chart_degeneracy, check_atlas, check_tame, half_line_chart, la_chart, min_degeneracy,
    PartialQuadrant, TRANSVERSALITY_TOL,
};
use sclab_core::retract::{
    cartan_chart, check_retraction, tangent_space, CartanConfig, JumpingSplicing, RetractModel,
};
use sclab_core::{rng, GridLineScale, TruncatedScale};

fn projector(a: f64) -> RetractModel {
    let s = TruncatedScale::constant(2, 3);
    let c = 1.0 / (1.0 + a * a);
    let m = DMatrix::from_row_slice(2, 2, &[c, a * c, a * c, a * a * c]);
    let r: Arc<dyn ScMap> = Arc::new(OperatorMap::new(templates::matrix(&s, &s, m).unwrap()));
    check_retraction(r, &[vec![1.0, 0.0], vec![0.0, 2.0]], 1e-12).unwrap()
}

#[test]
fn la_retract_across_modules() {
    let model = projector(1.0);
    // O = L_1 is a line: Cartan chart and tangent space see dimension 1
    let chart = cartan_chart(
        model.retraction().clone(),
        &[0.5, 0.5],
        &CartanConfig::default(),
    )
    .unwrap();
    assert!(chart.accepted);
    assert_eq!(chart.local_dimension, 1);
    // off the origin, centering the coordinates costs a rounding
    assert!(chart.identity_residual <= 1e-15);
    assert_eq!(tangent_space(&model, &[0.5, 0.5]).unwrap().dimension, 1);

    let q = PartialQuadrant::new(2);
    let rep = check_tame(
        &model,
        &q,
        &[vec![1.0, 0.0], vec![1.0, 1.0]],
        TRANSVERSALITY_TOL,
    )
    .unwrap();
    assert!(!rep.tame);
    let v = rep.first_violation().unwrap();
    assert_eq!(v.point, vec![1.0, 0.0]);
    assert_abs_diff_eq!(v.image[0], 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(v.image[1], 0.5, epsilon = 1e-15);
}

#[test]
fn chart_dependence_of_the_index() {
    let charts = vec![la_chart(1.0).unwrap(), half_line_chart().unwrap()];
    for (x, per_chart, min) in [(0.0, [2, 1], 1), (0.7, [0, 0], 0)] {
        let d: Vec<usize> = charts
            .iter()
            .map(|c| chart_degeneracy(&[x], c).unwrap())
            .collect();
        assert_eq!(d, per_chart);
        assert_eq!(min_degeneracy(&[x], &charts).unwrap(), min);
    }
    let atlas = check_atlas(&charts, &[vec![0.0], vec![1.5]], 1, &Default::default()).unwrap();
    assert!(atlas.compatible);
}

#[test]
fn splicing_bundle_matches_the_core_scan() {
    let family =
        Arc::new(JumpingSplicing::new(GridLineScale::hilbert(64.0, 513, 0.5, 2).unwrap()).unwrap());
    let r = splicing_strong_retraction(family.clone(), 2).unwrap();
    let mut g = rng::seeded(9);
    let ts = [-0.5, 0.0, 0.3, 1.0];
    let samples: Vec<(Vec<f64>, Vec<f64>)> = ts
        .iter()
        .map(|&t| {
            let mut u = vec![t];
            u.extend((0..513).map(|_| rng::symmetric(&mut g)));
            (u, (0..513).map(|_| rng::symmetric(&mut g)).collect())
        })
        .collect();
    let rep = check_strong_retraction(&r, &samples).unwrap();
    assert!(rep.accepted);
    assert!(rep.extracted_agree);
    assert_eq!(rep.fiber_dimensions(), vec![0, 0, 1, 1]);
}
