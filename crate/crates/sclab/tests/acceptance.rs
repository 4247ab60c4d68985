//! Acceptance suite: thirteen criteria, each run under its runtime limit and
//! reported on one line. Exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use sclab::config::{
    CartanParams, ChainRuleParams, DegeneracyParams, FredholmParams, PerturbationSpec,
    ShiftMapParams, SplicingParams, StrongBundleParams, TameParams, VerifyScaleParams,
};
use sclab::formats::{GridSpec, ScaleSpec, VectorSource};
use sclab::templates::{MapTemplate, OperatorTemplate, RetractionTemplate};
use sclab::{run_experiment, Context, Experiment, Outcome};

use sclab_core::linear::{
    build_sc_projection, check_sc, quotient_inclusion_singular_values, verify_projection,
    ScSubspace, DEFAULT_STABILITY_TOL,
};
use sclab_core::rng;
use sclab_core::scale::{smooth_point, RegularityConfig};

type Verdict = Result<String, String>;

struct Criterion {
    number: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Verdict,
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn run(experiment: Experiment, seed: u64) -> Outcome {
    run_experiment(
        &experiment,
        &Context {
            seed,
            base_dir: PathBuf::from("."),
        },
    )
    .expect("experiment runs")
}

/// All checks of an outcome must pass; returns their details.
fn all_checks(o: &Outcome) -> Verdict {
    let failed: Vec<String> = o
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    if failed.is_empty() {
        Ok(o.checks
            .iter()
            .map(|c| c.name.as_str())
            .collect::<Vec<_>>()
            .join(", "))
    } else {
        Err(failed.join("; "))
    }
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

fn csv_ints(o: &Outcome, column: &str, kind: &str, label: Option<&str>) -> Vec<usize> {
    let t = &o.table;
    let col = t.columns.iter().position(|c| *c == column).unwrap();
    let k = t.columns.iter().position(|c| *c == "kind").unwrap();
    let l = t.columns.iter().position(|c| *c == "label").unwrap();
    t.rows
        .iter()
        .filter(|r| r[k] == kind && label.map_or(true, |label| r[l] == label))
        .map(|r| r[col].parse().unwrap())
        .collect()
}

fn circle(ladder: Vec<usize>, max_level: usize) -> ScaleSpec {
    ScaleSpec::circle(ladder, max_level)
}

fn degeneracy_figure() -> Verdict {
    let points = vec![
        vec![0.0, 0.0],
        vec![0.0, 0.5],
        vec![0.0, 7.0],
        vec![0.25, 1.0],
        vec![3.0, 1e-3],
    ];
    let o = run(
        Experiment::Degeneracy(DegeneracyParams {
            corners: 2,
            points,
            expected: Some(vec![2, 1, 1, 0, 0]),
            chart_slopes: vec![],
            identity_chart: false,
            chart_points: vec![],
        }),
        0,
    );
    expect(
        "indices",
        csv_ints(&o, "index", "quadrant", None),
        vec![2, 1, 1, 0, 0],
    )?;
    all_checks(&o)
}

fn chart_dependence() -> Verdict {
    let slopes = vec![0.0, 0.5, 1.0, 2.0];
    let xs = vec![0.0, 0.3, 1.0, 4.0];
    let o = run(
        Experiment::Degeneracy(DegeneracyParams {
            corners: 2,
            points: vec![],
            expected: None,
            chart_slopes: slopes.clone(),
            identity_chart: true,
            chart_points: xs.clone(),
        }),
        0,
    );
    for &a in &slopes {
        let label = format!("φ_{a}");
        let want: Vec<usize> = xs
            .iter()
            .map(|&x| {
                if x == 0.0 {
                    2
                } else if a == 0.0 {
                    1
                } else {
                    0
                }
            })
            .collect();
        expect(&label, csv_ints(&o, "index", "chart", Some(&label)), want)?;
    }
    let want_id: Vec<usize> = xs.iter().map(|&x| usize::from(x == 0.0)).collect();
    expect(
        "identity chart",
        csv_ints(&o, "index", "chart", Some("id")),
        want_id.clone(),
    )?;
    expect(
        "min over charts",
        csv_ints(&o, "index", "min", None),
        want_id,
    )?;
    all_checks(&o)
}

fn shift_map() -> Verdict {
    let o = run(
        Experiment::ShiftMap(ShiftMapParams {
            scale: circle(vec![65, 4096], 3),
            level: 1,
            max_nu: 10,
            max_truncation: 4096,
            min_horizontal_gap: 1.9,
            input_rate: 2.0,
        }),
        0,
    );
    all_checks(&o)
}

fn chain_rule() -> Verdict {
    let o = run(
        Experiment::ChainRule(ChainRuleParams {
            scale: circle(vec![256], 3),
            f: MapTemplate::Polynomial {
                coeffs: vec![0.0, 1.0, 1.0],
            },
            g: MapTemplate::Polynomial {
                coeffs: vec![0.0, 1.0, 0.0, 1.0],
            },
            samples: 20,
            m_max: 1,
            tol: 1e-6,
        }),
        41,
    );
    let levels: Vec<usize> = o
        .table
        .column("level")
        .unwrap()
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    expect("rows", levels.len(), 40)?;
    expect("levels", levels.iter().filter(|&&m| m <= 1).count(), 40)?;
    all_checks(&o)
}

fn fredholm_params() -> FredholmParams {
    FredholmParams {
        scale: circle(vec![128, 256, 512], 4),
        operator: OperatorTemplate::DerivativePlus { c: 1.0 },
        truncation: Some(512),
        max_level: Some(3),
        expected_index: Some(0),
        perturbations: None,
        min_gain: None,
        regularity_levels: vec![0.0, 1.0, 2.0],
    }
}

fn fredholm_stability() -> Verdict {
    let p = FredholmParams {
        perturbations: Some(PerturbationSpec {
            trials: 20,
            max_rank: 3,
            amplitude: 0.1,
            rate: 0.5,
        }),
        ..fredholm_params()
    };
    let o = run(Experiment::Fredholm(p), 5);
    let cert = &o.data["certificate"];
    let dims: Vec<u64> = cert["per_level"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["kernel_dim"].as_u64().unwrap())
        .collect();
    expect("kernel dims at levels 0..3", dims, vec![0, 0, 0, 0])?;
    expect("index", cert["index"].as_i64(), Some(0))?;
    let trials = o.data["perturbations"].as_array().unwrap();
    expect("trials", trials.len(), 20)?;
    for t in trials {
        expect("perturbed index", t["index"].as_i64(), Some(0))?;
    }
    all_checks(&o)
}

fn regularizing() -> Verdict {
    // an even truncation ends in an unpaired cosine, a mode d/dt + 1 cannot
    // smooth; the odd one carries whole frequency pairs
    let mut details = Vec::new();
    for ladder in [vec![128, 256, 512], vec![129, 257, 513]] {
        let n = ladder[2];
        let p = FredholmParams {
            scale: circle(ladder, 4),
            truncation: Some(n),
            min_gain: Some(0.75),
            ..fredholm_params()
        };
        let o = run(Experiment::Fredholm(p), 6);
        let gains: Vec<String> = o.data["regularizing"]
            .as_array()
            .unwrap()
            .iter()
            .map(|g| {
                format!(
                    "{} → {:.3}",
                    g["target_level"],
                    g["solution_level"].as_f64().unwrap_or(f64::INFINITY)
                )
            })
            .collect();
        expect("targets", gains.len(), 3)?;
        all_checks(&o).map_err(|e| format!("N = {n}: {e}"))?;
        details.push(format!("N = {n}: {}", gains.join(", ")));
    }
    Ok(details.join("; "))
}

fn splicing_core() -> Verdict {
    let ts = vec![-1.0, -0.1, 0.0, 0.25, 0.5, 1.0, 2.0];
    let o = run(
        Experiment::Splicing(SplicingParams {
            grid: GridSpec {
                half_width: 64.0,
                grid_size: 8192,
                delta: 0.5,
                max_level: 2,
            },
            parameters: ts,
            random_samples: 50,
            tol: 1e-10,
        }),
        7,
    );
    let ranks: Vec<usize> = o
        .table
        .column("rank")
        .unwrap()
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    expect("ranks", ranks, vec![0, 0, 0, 1, 1, 1, 1])?;
    expect(
        "r_π samples",
        o.data["retraction_samples"].as_array().unwrap().len(),
        50,
    )?;
    all_checks(&o)
}

fn cartan() -> Verdict {
    let o = run(
        Experiment::Cartan(CartanParams {
            retraction: RetractionTemplate::GraphSquare,
            base: VectorSource::Inline(vec![0.0, 0.0]),
            config: None,
            expected_dimension: Some(1),
            exact_identity: false,
        }),
        8,
    );
    let mut details = vec![all_checks(&o)?];
    let projectors = [
        RetractionTemplate::LaProjector { a: 0.0 },
        RetractionTemplate::LaProjector { a: 0.5 },
        RetractionTemplate::LaProjector { a: 1.0 },
        RetractionTemplate::LaProjector { a: 2.0 },
        RetractionTemplate::CoordinateProjector {
            dim: 3,
            keep: vec![0, 2],
        },
        RetractionTemplate::Identity { dim: 2 },
    ];
    for r in projectors {
        let d = r.dim();
        let o = run(
            Experiment::Cartan(CartanParams {
                retraction: r.clone(),
                base: VectorSource::Inline(vec![0.0; d]),
                config: None,
                expected_dimension: None,
                exact_identity: true,
            }),
            8,
        );
        all_checks(&o).map_err(|e| format!("{r:?}: {e}"))?;
        details.push(format!("{r:?} exact"));
    }
    Ok(details.join("; "))
}

fn projection_splitting() -> Verdict {
    let spec = circle(vec![128, 256, 512], 3);
    let scale = spec.build().map_err(|e| e.to_string())?;
    let mut g = rng::seeded(9);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let rank = 1 + i % 3;
        let basis: Vec<Vec<f64>> = (0..rank)
            .map(|_| smooth_point(&scale, 128, 0.4, &mut g))
            .collect();
        let k = ScSubspace::new(scale.clone(), basis).map_err(|e| e.to_string())?;
        let p = build_sc_projection(&k, &RegularityConfig::default()).map_err(|e| e.to_string())?;
        for &n in scale.ladder() {
            let rep = verify_projection(&p, &k, n, 5, &mut g).map_err(|e| e.to_string())?;
            if rep.idempotency > 1e-10 || rep.splitting_residual != 0.0 || rep.rank != rank {
                return Err(format!("subspace {i} at N = {n}: {rep:?}"));
            }
            worst = worst.max(rep.idempotency);
        }
        let sc = check_sc(&p, DEFAULT_STABILITY_TOL).map_err(|e| e.to_string())?;
        if !sc.accepted {
            return Err(format!(
                "subspace {i}: level norms do not stabilize: {:?}",
                sc.rows
            ));
        }
    }
    Ok(format!("10 subspaces, largest |P² − P| {worst:e}"))
}

fn quotient_compactness() -> Verdict {
    let scale = circle(vec![64, 128], 3)
        .build()
        .map_err(|e| e.to_string())?;
    let n = 128;
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let a = ScSubspace::new(scale.clone(), vec![e0]).map_err(|e| e.to_string())?;
    let sv = quotient_inclusion_singular_values(&a, 0, n).map_err(|e| e.to_string())?;
    let mut oracle: Vec<f64> = scale.weights_vector(n)[1..]
        .iter()
        .map(|w| 1.0 / w)
        .collect();
    oracle.sort_by(|x, y| y.total_cmp(x));
    expect("singular value count", sv.len(), oracle.len())?;
    let err = sv
        .iter()
        .zip(&oracle)
        .map(|(s, o)| (s - o).abs())
        .fold(0.0, f64::max);
    if err > 1e-12 {
        return Err(format!("span{{e0}}: largest deviation from w_n^-1 {err:e}"));
    }
    let mut g = rng::seeded(10);
    let v = smooth_point(&scale, n, 0.3, &mut g);
    let a = ScSubspace::new(scale.clone(), vec![v]).map_err(|e| e.to_string())?;
    let sv = quotient_inclusion_singular_values(&a, 0, n).map_err(|e| e.to_string())?;
    let inclusion = scale
        .inclusion_singular_values(0, n)
        .map_err(|e| e.to_string())?;
    if let Some(k) = sv.iter().zip(&inclusion).position(|(s, w)| *s > 2.0 * w) {
        return Err(format!(
            "random A: σ_{k} = {} above 2·w_k^-1 = {}",
            sv[k],
            2.0 * inclusion[k]
        ));
    }
    Ok(format!(
        "span{{e0}} deviation {err:e}; random smooth A within 2·w_k^-1"
    ))
}

fn estimator_calibration() -> Verdict {
    let o = run(
        Experiment::VerifyScale(VerifyScaleParams {
            scale: circle(vec![128, 256, 512], 4),
            samples: 5,
            calibration: vec![1.0, 2.0, 3.0],
            calibration_tol: 0.1,
        }),
        11,
    );
    for s in [
        "calibration-s1",
        "calibration-s2",
        "calibration-s3",
        "geometric-decay-smooth",
    ] {
        let c = o.check(s).ok_or(format!("missing check {s}"))?;
        if !c.passed {
            return Err(format!("{s}: {}", c.detail));
        }
    }
    all_checks(&o)
}

fn tameness() -> Verdict {
    let samples = vec![
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 0.0],
        vec![0.0, 2.0],
        vec![2.0, 0.5],
    ];
    let o = run(
        Experiment::Tame(TameParams {
            retraction: RetractionTemplate::LaProjector { a: 1.0 },
            corners: 2,
            samples: samples.clone(),
            tol: sclab_core::polyfold::TRANSVERSALITY_TOL,
            expect_tame: Some(false),
        }),
        0,
    );
    let v = &o.data["violations"][0];
    expect(
        "counterexample",
        v["point"].clone(),
        serde_json::json!([1.0, 0.0]),
    )?;
    expect(
        "stratum",
        (v["index"].as_u64(), v["image_index"].as_u64()),
        (Some(1), Some(0)),
    )?;
    all_checks(&o)?;
    let o = run(
        Experiment::Tame(TameParams {
            retraction: RetractionTemplate::Identity { dim: 2 },
            corners: 2,
            samples,
            tol: sclab_core::polyfold::TRANSVERSALITY_TOL,
            expect_tame: Some(true),
        }),
        0,
    );
    all_checks(&o).map(|_| "r_1 not tame at (1, 0): index 1 → 0; identity tame".into())
}

fn strong_bundle() -> Verdict {
    let o = run(
        Experiment::StrongBundle(StrongBundleParams {
            grid: GridSpec {
                half_width: 64.0,
                grid_size: 1025,
                delta: 0.5,
                max_level: 2,
            },
            parameters: vec![-1.0, -0.1, 0.0, 0.25, 0.5, 1.0, 2.0],
            index_grid: 10,
            section: None,
        }),
        13,
    );
    let dims: Vec<usize> = o
        .table
        .column("fiber_dimension")
        .unwrap()
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    expect("fiber dimensions", dims, vec![0, 0, 0, 1, 1, 1, 1])?;
    all_checks(&o)
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            number: 1,
            name: "degeneracy figure",
            limit: secs(1),
            run: degeneracy_figure,
        },
        Criterion {
            number: 2,
            name: "L_a chart dependence",
            limit: secs(1),
            run: chart_dependence,
        },
        Criterion {
            number: 3,
            name: "shift-map dichotomy",
            limit: secs(10),
            run: shift_map,
        },
        Criterion {
            number: 4,
            name: "chain rule",
            limit: secs(10),
            run: chain_rule,
        },
        Criterion {
            number: 5,
            name: "Fredholm stability",
            limit: secs(30),
            run: fredholm_stability,
        },
        Criterion {
            number: 6,
            name: "regularizing property",
            limit: None,
            run: regularizing,
        },
        Criterion {
            number: 7,
            name: "splicing core",
            limit: secs(30),
            run: splicing_core,
        },
        Criterion {
            number: 8,
            name: "Cartan construction",
            limit: None,
            run: cartan,
        },
        Criterion {
            number: 9,
            name: "sc-projection splitting",
            limit: None,
            run: projection_splitting,
        },
        Criterion {
            number: 10,
            name: "quotient compactness",
            limit: None,
            run: quotient_compactness,
        },
        Criterion {
            number: 11,
            name: "regularity estimator calibration",
            limit: None,
            run: estimator_calibration,
        },
        Criterion {
            number: 12,
            name: "tameness diagnosis",
            limit: None,
            run: tameness,
        },
        Criterion {
            number: 13,
            name: "strong-bundle indices",
            limit: None,
            run: strong_bundle,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let verdict = match (verdict, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("runtime {elapsed:.2?} above the limit {limit:?}"))
            }
            (v, _) => v,
        };
        let limit = c.limit.map_or(String::new(), |l| format!(" < {l:?}"));
        match verdict {
            Ok(detail) => println!(
                "criterion {:>2} PASS {} ({elapsed:.2?}{limit}): {detail}",
                c.number, c.name
            ),
            Err(reason) => {
                failures += 1;
                println!(
                    "criterion {:>2} FAIL {} ({elapsed:.2?}{limit}): {reason}",
                    c.number, c.name
                );
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
