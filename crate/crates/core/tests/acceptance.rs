//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Built with `harness = false`, so `cargo test` runs `main`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use amdahl_core::explorer::frontier;
use amdahl_core::features::{standard_terms, FeatureTerm, ModelSpec};
use amdahl_core::prelude::*;
use amdahl_core::regression::FitWarning;
use amdahl_core::speedup::FractionSet;
use amdahl_core::validation::FOLDS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture_data(n: usize, config_seed: u64, sigma: f64, noise_seed: u64) -> (GroundTruth, Dataset) {
    let truth = GroundTruth::fixture();
    let configs = sample_configs(
        &RangeTable::xeon_default(),
        n,
        config_seed,
        SampleMode::RandomUniform,
    )
    .unwrap();
    let noise = if sigma == 0.0 {
        NoiseSpec::none()
    } else {
        NoiseSpec::gaussian(sigma, noise_seed).unwrap()
    };
    let data = generate(&truth, &configs, &noise).unwrap();
    (truth, data)
}

fn hand_checks() -> Outcome {
    let s1 = speedup_single(0.5, 1.0, 2.0)
        .map_err(|e| e.to_string())?
        .speedup;
    check((s1 - 1.333333).abs() <= 1e-6, || format!("single: {s1}"))?;

    let schema = ResourceSchema::new(["r1", "r2"]).unwrap();
    let v = |a: f64, b: f64| ResourceVector::new(&schema, vec![a, b]).unwrap();
    let (t1, t2) = (FeatureTerm::single("r1"), FeatureTerm::single("r2"));
    let fr = FractionSet::new(0.3, vec![(t1.clone(), 0.4), (t2.clone(), 0.3)]).unwrap();
    let s2 = speedup_multi(
        &fr,
        &[t1.clone(), t2.clone()],
        &schema,
        &v(1.0, 1.0),
        &v(2.0, 4.0),
    )
    .map_err(|e| e.to_string())?
    .speedup;
    check((s2 - 1.739130).abs() <= 1e-6, || {
        format!("two resources: {s2}")
    })?;

    let t12 = FeatureTerm::product("r1", "r2");
    let fr = FractionSet::new(
        0.5,
        vec![(t1.clone(), 0.2), (t2.clone(), 0.2), (t12.clone(), 0.1)],
    )
    .unwrap();
    let s3 = speedup_multi(&fr, &[t1, t2, t12], &schema, &v(1.0, 1.0), &v(2.0, 2.0))
        .map_err(|e| e.to_string())?
        .speedup;
    check((s3 - 1.379310).abs() <= 1e-6, || {
        format!("interaction: {s3}")
    })?;
    Ok(format!("{s1:.6} {s2:.6} {s3:.6}"))
}

fn oracle_closure() -> Outcome {
    let start = Instant::now();
    let (truth, data) = fixture_data(58, 2024, 0.0, 0);
    let model = fit_dataset(truth.spec(), &data).map_err(|e| e.to_string())?;
    let est = extract_fractions(&model).map_err(|e| e.to_string())?;
    let mut worst = (est.serial - truth.fractions().serial()).abs();
    for (term, f) in &est.fractions {
        let want = truth
            .fractions()
            .get(term)
            .ok_or("term missing from truth")?;
        worst = worst.max((f - want).abs());
    }
    let report = cross_validate(truth.spec(), &data, 7).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(worst <= 1e-6, || format!("fraction error {worst:e}"))?;
    check(report.mean_mape <= 1e-4, || {
        format!("CV MAPE {:e}%", report.mean_mape)
    })?;
    check(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "max fraction error {worst:.1e}, CV MAPE {:.1e}%, {elapsed:.0?}",
        report.mean_mape
    ))
}

fn noisy_accuracy() -> Outcome {
    let start = Instant::now();
    let mut passing = 0;
    let mut lowest = f64::INFINITY;
    for seed in 0..30u64 {
        let (truth, data) = fixture_data(58, 1000 + seed, 0.02, seed);
        let report = cross_validate(truth.spec(), &data, seed).map_err(|e| e.to_string())?;
        lowest = lowest.min(report.accuracy);
        if report.accuracy >= 95.0 {
            passing += 1;
        }
    }
    let elapsed = start.elapsed();
    check(passing >= 28, || {
        format!("only {passing}/30 seeds reach 95%")
    })?;
    check(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{passing}/30 seeds at >= 95% (lowest {lowest:.3}%), {elapsed:.0?}"
    ))
}

fn baseline_invariance() -> Outcome {
    let (truth, data) = fixture_data(58, 31, 0.02, 31);
    let schema = truth.spec().schema().clone();
    let maxima = ResourceVector::new(&schema, RangeTable::xeon_default().maxima()).unwrap();
    let moved = truth
        .spec()
        .with_baseline(maxima)
        .map_err(|e| e.to_string())?;
    let a = fit_dataset(truth.spec(), &data).map_err(|e| e.to_string())?;
    let b = fit_dataset(&moved, &data).map_err(|e| e.to_string())?;
    let probes = sample_configs(
        &RangeTable::xeon_default(),
        100,
        77,
        SampleMode::RandomUniform,
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for c in &probes {
        let pa = predict_score(&a, c).map_err(|e| e.to_string())?;
        let pb = predict_score(&b, c).map_err(|e| e.to_string())?;
        worst = worst.max(((pa - pb) / pa).abs());
    }
    check(worst <= 1e-9, || format!("relative difference {worst:e}"))?;
    Ok(format!(
        "max relative difference {worst:.1e} over 100 probes"
    ))
}

fn cv_hygiene() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(5..=500);
        let seed: u64 = rng.random();
        let plan = make_folds(n, seed).map_err(|e| e.to_string())?;
        let sizes = plan.fold_sizes();
        let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        check(
            plan.assignments.len() == n && lo >= 1 && hi - lo <= 1,
            || format!("n={n}: fold sizes {sizes:?}"),
        )?;
        let mut seen = vec![0u8; n];
        for f in 0..FOLDS {
            let valid = plan.validation_rows(f);
            let train = plan.training_rows(f);
            check(valid.len() + train.len() == n, || {
                format!("n={n}: fold {f} does not cover rows")
            })?;
            check(valid.iter().all(|r| !train.contains(r)), || {
                format!("n={n}: fold {f} overlaps")
            })?;
            for r in valid {
                seen[r] += 1;
            }
        }
        check(seen.iter().all(|&c| c == 1), || {
            format!("n={n}: not a partition")
        })?;
    }

    for trial in 0..5u64 {
        let (truth, data) = fixture_data(40 + 7 * trial as usize, 300 + trial, 0.02, trial);
        let report = cross_validate(truth.spec(), &data, trial).map_err(|e| e.to_string())?;
        check(report.accuracy == 100.0 - report.mean_mape, || {
            "accuracy identity broken".into()
        })?;
        for f in &report.folds {
            check(f.accuracy == 100.0 - f.mape, || {
                format!("fold {} accuracy identity broken", f.fold)
            })?;
        }
        for fold in 0..FOLDS {
            let mut obs = data.observations().to_vec();
            for (r, o) in obs.iter_mut().enumerate() {
                if report.assignments[r] == fold {
                    o.score *= 3.0;
                }
            }
            let perturbed = Dataset::new(data.schema().clone(), obs, "perturbed").unwrap();
            let again =
                cross_validate(truth.spec(), &perturbed, trial).map_err(|e| e.to_string())?;
            for r in (0..data.len()).filter(|&r| report.assignments[r] == fold) {
                let same =
                    again.predicted[r].map(f64::to_bits) == report.predicted[r].map(f64::to_bits);
                check(same, || {
                    format!("trial {trial}: row {r} of fold {fold} moved")
                })?;
            }
        }
    }
    Ok("200 random partitions, 25 leakage probes, accuracy identity exact".into())
}

fn constant_resource() -> Outcome {
    let (_, base) = fixture_data(58, 41, 0.02, 41);
    let mut names = base.schema().names().to_vec();
    names.push("uncore_freq_mhz".into());
    let schema = ResourceSchema::new(names).unwrap();
    let rows = base
        .observations()
        .iter()
        .map(|o| {
            let mut v = o.config.values().to_vec();
            v.push(2200.0);
            Observation {
                config: ResourceVector::new(&schema, v).unwrap(),
                score: o.score,
            }
        })
        .collect();
    let data = Dataset::new(schema.clone(), rows, "constant-uncore").unwrap();
    let extra = [FeatureTerm::product("cores", "mem_freq_mhz")];
    let terms = standard_terms(&schema, false, &extra).unwrap();
    let baseline = ResourceVector::new(&schema, vec![1.0, 1800.0, 7.0, 2133.0, 1200.0]).unwrap();
    let spec = ModelSpec::new(schema, terms, baseline).map_err(|e| e.to_string())?;
    let model = fit_dataset(&spec, &data).map_err(|e| format!("fit failed: {e}"))?;
    let named = model.warnings().iter().any(
        |w| matches!(w, FitWarning::DegenerateColumn { column } if column == "uncore_freq_mhz"),
    );
    check(named, || format!("warnings: {:?}", model.warnings()))?;
    let report = cross_validate(&spec, &data, 3).map_err(|e| format!("CV failed: {e}"))?;
    let shown = model
        .warnings()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ");
    Ok(format!(
        "rank {}, CV accuracy {:.2}%, warning: {shown}",
        model.rank(),
        report.accuracy
    ))
}

fn explorer_correctness() -> Outcome {
    let (truth, data) = fixture_data(58, 51, 0.0, 0);
    let model = fit_dataset(truth.spec(), &data).map_err(|e| e.to_string())?;
    let ranges = RangeTable::new(vec![
        ResourceRange::levels("cores", vec![4.0, 16.0]).unwrap(),
        ResourceRange::levels("core_freq_mhz", vec![1800.0, 2500.0]).unwrap(),
        ResourceRange::levels("llc_mb", vec![7.0]).unwrap(),
        ResourceRange::levels("mem_freq_mhz", vec![2133.0, 2667.0]).unwrap(),
    ])
    .unwrap();
    let schema = ranges.schema().unwrap();
    // only cores is priced, so ties fall back to grid order
    let cost = CostModel::new(&schema, [("cores", 1.0)], 5.0).unwrap();

    let grid: Vec<ResourceVector> = sample_configs(&ranges, 1, 0, SampleMode::FullGrid).unwrap();
    let mut scores: Vec<f64> = grid.iter().map(|c| truth.score(c).unwrap()).collect();
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let target = 0.5 * (sorted[3] + sorted[4]);

    let mut expected: Vec<(ResourceVector, f64)> = grid
        .iter()
        .cloned()
        .zip(scores.drain(..))
        .filter(|(_, s)| *s >= target)
        .collect();
    expected.sort_by(|a, b| {
        cost.cost(a.0.values())
            .total_cmp(&cost.cost(b.0.values()))
            .then(a.0.lex_cmp(&b.0))
    });

    let res = explore(&model, &ranges, target, &cost, 100).map_err(|e| e.to_string())?;
    let got: Vec<&ResourceVector> = res.feasible.iter().map(|p| &p.config).collect();
    let want: Vec<&ResourceVector> = expected.iter().map(|(c, _)| c).collect();
    check(got == want, || {
        format!("explorer returned {got:?}, brute force {want:?}")
    })?;
    for (p, (_, s)) in res.feasible.iter().zip(&expected) {
        check(((p.predicted_score - s) / s).abs() <= 1e-6, || {
            format!("prediction {} vs generator {s}", p.predicted_score)
        })?;
    }
    let stairs = frontier(&res);
    check(
        stairs
            .windows(2)
            .all(|w| w[0].cost <= w[1].cost && w[0].score <= w[1].score),
        || format!("frontier not monotone: {stairs:?}"),
    )?;
    Ok(format!(
        "{} of 8 configs feasible at target {target:.4}, {} frontier points",
        res.feasible.len(),
        stairs.len()
    ))
}

fn round_trip() -> Outcome {
    let (truth, data) = fixture_data(58, 61, 0.03, 61);
    let model = fit_dataset(truth.spec(), &data).map_err(|e| e.to_string())?;
    let back = model_from_json(&model_to_json(&model)).map_err(|e| e.to_string())?;
    let probes = sample_configs(
        &RangeTable::xeon_default(),
        1000,
        62,
        SampleMode::RandomUniform,
    )
    .unwrap();
    for c in &probes {
        let a = predict_inverse(&model, c).map_err(|e| e.to_string())?;
        let b = predict_inverse(&back, c).map_err(|e| e.to_string())?;
        check(a.to_bits() == b.to_bits(), || format!("{a} vs {b} at {c}"))?;
    }
    Ok("1000 predictions bit-identical".into())
}

fn seven_resource_ranges() -> RangeTable {
    RangeTable::new(vec![
        ResourceRange::stepped("cores", 2.0, 20.0, 2.0).unwrap(),
        ResourceRange::stepped("core_freq_mhz", 1600.0, 2500.0, 100.0).unwrap(),
        ResourceRange::stepped("llc_mb", 5.0, 50.0, 5.0).unwrap(),
        ResourceRange::levels("mem_freq_mhz", vec![1600.0, 1866.0, 2133.0, 2400.0, 2667.0])
            .unwrap(),
        ResourceRange::levels("mem_channels", vec![4.0, 6.0]).unwrap(),
        ResourceRange::levels("smt", vec![1.0, 2.0]).unwrap(),
        ResourceRange::stepped("uncore_freq_mhz", 1200.0, 2000.0, 200.0).unwrap(),
    ])
    .unwrap()
}

fn performance() -> Outcome {
    let ranges = seven_resource_ranges();
    let schema = ranges.schema().unwrap();
    let singles = standard_terms(&schema, false, &[]).unwrap();
    let shares = [0.3, 0.15, 0.1, 0.1, 0.1, 0.05, 0.1];
    let truth_fr = FractionSet::new(0.1, singles.iter().cloned().zip(shares).collect()).unwrap();
    let baseline = ResourceVector::new(&schema, ranges.minima()).unwrap();
    let truth_spec = ModelSpec::new(schema.clone(), singles, baseline.clone()).unwrap();
    let truth = GroundTruth::new(truth_spec, truth_fr, 10.0).map_err(|e| e.to_string())?;
    let configs = sample_configs(&ranges, 200, 71, SampleMode::RandomUniform).unwrap();
    let data = generate(&truth, &configs, &NoiseSpec::gaussian(0.02, 72).unwrap()).unwrap();

    let spec = ModelSpec::new(
        schema.clone(),
        standard_terms(&schema, true, &[]).unwrap(),
        baseline,
    )
    .map_err(|e| e.to_string())?;
    let cols = spec.term_count() + 1;
    check(cols == 29, || format!("{cols} columns"))?;
    let start = Instant::now();
    let model = fit_dataset(&spec, &data).map_err(|e| e.to_string())?;
    let fit_time = start.elapsed();
    check(fit_time < Duration::from_secs(1), || {
        format!("fit took {fit_time:?}")
    })?;

    check(ranges.grid_size() == 100_000, || {
        format!("grid size {}", ranges.grid_size())
    })?;
    let cost = CostModel::new(&schema, [("cores", 20.0), ("llc_mb", 2.0)], 100.0).unwrap();
    let start = Instant::now();
    let res = explore(&model, &ranges, 20.0, &cost, 50).map_err(|e| e.to_string())?;
    let explore_time = start.elapsed();
    check(explore_time < Duration::from_secs(10), || {
        format!("explore took {explore_time:?}")
    })?;
    check(res.evaluated == 100_000, || {
        format!("evaluated {}", res.evaluated)
    })?;
    Ok(format!(
        "fit 200x{cols} in {fit_time:.1?}, explored {} points in {explore_time:.1?}",
        res.evaluated
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("forward-model hand checks", hand_checks),
        ("oracle closure (58 noiseless samples)", oracle_closure),
        ("noisy accuracy over 30 seeds", noisy_accuracy),
        ("baseline invariance", baseline_invariance),
        ("cross-validation hygiene", cv_hygiene),
        ("constant-resource handling", constant_resource),
        ("explorer against brute force", explorer_correctness),
        ("model round trip", round_trip),
        ("performance envelope", performance),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
