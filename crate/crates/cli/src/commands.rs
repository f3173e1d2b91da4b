use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use amdahl_core::dataset::load_configs;
use amdahl_core::explorer::{explore_capped, frontier, frontier_csv};
use amdahl_core::prelude::*;
use amdahl_core::regression::{fit_with, FitOptions};
use amdahl_core::specfile::{ground_truth_to_json, load_ground_truth, load_ranges, ranges_to_json};
use amdahl_core::validation::summary_csv;
use serde_json::{json, Value};

use crate::output::{context, ensure_dir, write_atomic, CliError, CliResult};
use crate::{CvArgs, ExploreArgs, FitArgs, Mode, PredictArgs, ReportArgs, SynthArgs};

pub fn synth(a: SynthArgs) -> CliResult {
    let truth = match &a.truth {
        Some(p) => load_ground_truth(p).map_err(context(p))?,
        None => GroundTruth::fixture(),
    };
    let ranges = match &a.ranges {
        Some(p) => load_ranges(p).map_err(context(p))?,
        None => RangeTable::xeon_default(),
    };
    let ranges = ranges.project(truth.spec().schema()).map_err(|e| {
        CliError::input(format!("range table does not cover the ground truth: {e}"))
    })?;
    if !(a.sigma >= 0.0 && a.sigma.is_finite()) {
        return Err(CliError::input(format!(
            "--sigma must be a nonnegative number, got {}",
            a.sigma
        )));
    }
    let noise = if a.sigma == 0.0 {
        NoiseSpec::none()
    } else {
        NoiseSpec::gaussian(a.sigma, a.noise_seed.unwrap_or(a.seed))
            .map_err(|e| CliError::input(format!("--sigma: {e}")))?
    };
    let mode = match a.mode {
        Mode::Random => SampleMode::RandomUniform,
        Mode::Grid => SampleMode::FullGrid,
    };
    let configs = sample_configs(&ranges, a.n, a.seed, mode)
        .map_err(|e| CliError::input(format!("--n/--mode: {e}")))?;
    let data = generate(&truth, &configs, &noise)?;

    ensure_dir(&a.out_dir)?;
    write_atomic(&a.out_dir.join("dataset.csv"), &data.to_csv())?;
    write_atomic(&a.out_dir.join("truth.json"), &ground_truth_to_json(&truth))?;
    write_atomic(&a.out_dir.join("ranges.json"), &ranges_to_json(&ranges))?;
    println!(
        "wrote {} rows over {} resources to {}",
        data.len(),
        data.schema().len(),
        a.out_dir.display()
    );
    Ok(())
}

fn load_inputs(data: &Path, spec: &Path) -> CliResult<(Dataset, ModelSpec)> {
    let dataset = load_dataset(data).map_err(context(data))?;
    let draft = load_model_spec(spec).map_err(context(spec))?;
    let resolved = draft.resolve(&dataset).map_err(|e| {
        CliError::input(format!(
            "{} does not fit {}: {e}",
            spec.display(),
            data.display()
        ))
    })?;
    Ok((dataset, resolved))
}

pub fn fit(a: FitArgs) -> CliResult {
    let (data, spec) = load_inputs(&a.input.data, &a.input.spec)?;
    let data_path = &a.input.data;
    let design = build_design(&spec, &data).map_err(context(data_path))?;
    let opts = FitOptions {
        normalize: !a.no_normalize,
        ..FitOptions::default()
    };
    let model = fit_with(&spec, &design, opts).map_err(context(data_path))?;
    for w in model.warnings() {
        eprintln!("warning: {w}");
    }
    let estimate = extract_fractions(&model);

    let mut text = String::new();
    let _ = writeln!(
        text,
        "rows: {}  columns: {}  rank: {}",
        design.rows(),
        design.cols(),
        model.rank()
    );
    let _ = writeln!(text, "condition: {:.6e}", model.condition());
    let _ = writeln!(text, "training MAPE: {:.6}%", model.training_mape());
    let fractions = match &estimate {
        Ok(est) => {
            let _ = writeln!(text, "serial fraction: {:.6}", est.serial);
            for (term, f) in &est.fractions {
                let _ = writeln!(text, "  {:<24} {:.6}", term.label(), f);
            }
            let _ = writeln!(text, "fractions valid: {}", est.valid);
            if !est.valid {
                eprintln!("warning: estimated fractions fall outside [-0.05, 1.05]; the Amdahl reading of this model is doubtful");
            }
            json!({
                "serial": est.serial,
                "terms": est.fractions.iter().map(|(t, f)| json!({"label": t.label(), "fraction": f})).collect::<Vec<_>>(),
                "valid": est.valid,
            })
        }
        Err(e) => {
            eprintln!("warning: fractions unavailable: {e}");
            Value::Null
        }
    };
    print!("{text}");

    write_atomic(&a.out, &model_to_json(&model))?;
    if let Some(path) = &a.diagnostics {
        let diag = json!({
            "rows": design.rows(),
            "columns": design.labels,
            "rank": model.rank(),
            "condition": model.condition().is_finite().then_some(model.condition()),
            "training_mape": model.training_mape(),
            "fractions": fractions,
            "warnings": model.warnings().iter().map(ToString::to_string).collect::<Vec<_>>(),
        });
        write_atomic(
            path,
            &serde_json::to_string_pretty(&diag).expect("diagnostics serialise"),
        )?;
    }
    Ok(())
}

pub fn cv(a: CvArgs) -> CliResult {
    let (data, spec) = load_inputs(&a.input.data, &a.input.spec)?;
    let label = a.label.clone().unwrap_or_else(|| {
        a.input.data.file_stem().map_or_else(
            || data.source().to_string(),
            |s| s.to_string_lossy().into_owned(),
        )
    });
    let report = cross_validate(&spec, &data, a.seed)
        .map_err(context(&a.input.data))?
        .with_label(label);
    print!("{}", report.to_table());
    if let Some(dir) = &a.out_dir {
        ensure_dir(dir)?;
        write_atomic(&dir.join("cv_report.json"), &report.to_json())?;
        write_atomic(
            &dir.join("cv_summary.csv"),
            &summary_csv(std::slice::from_ref(&report)),
        )?;
    }
    Ok(())
}

pub fn predict(a: PredictArgs) -> CliResult {
    let model = load_model(&a.model).map_err(context(&a.model))?;
    let schema = model.spec().schema().clone();
    let configs = match (&a.configs, a.set.is_empty()) {
        (Some(path), true) => load_configs(path, &schema).map_err(context(path))?,
        (None, false) => {
            let pairs = a.set.iter().map(|(n, v)| (n.as_str(), *v));
            let config = schema
                .vector_from_pairs(pairs)
                .map_err(|e| CliError::input(format!("--set: {e}")))?;
            vec![config]
        }
        (None, true) => {
            return Err(CliError::input(format!(
                "give a configuration with --set NAME=VALUE for each of [{}], or --configs FILE",
                schema.names().join(", ")
            )))
        }
        (Some(_), false) => return Err(CliError::input("--set and --configs are exclusive")),
    };

    let mut out = schema.names().join(",");
    out.push_str(",predicted_score\n");
    for (i, config) in configs.iter().enumerate() {
        let score = predict_score(&model, config).map_err(|e| {
            let mut err = CliError::from(e);
            if let Some(path) = &a.configs {
                err.message = format!(
                    "{}, configuration {}: {}",
                    path.display(),
                    i + 1,
                    err.message
                );
            }
            err
        })?;
        for v in config.values() {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{score}");
    }
    match &a.out {
        Some(path) => write_atomic(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

pub fn explore(a: ExploreArgs) -> CliResult {
    let model = load_model(&a.model).map_err(context(&a.model))?;
    let ranges = load_ranges(&a.ranges).map_err(context(&a.ranges))?;
    let schema = model.spec().schema();
    let cost = CostModel::new(
        schema,
        a.cost.iter().map(|(n, w)| (n.as_str(), *w)),
        a.cost_offset,
    )
    .map_err(|e| CliError::input(format!("--cost: {e}")))?;
    let result = explore_capped(&model, &ranges, a.target, &cost, a.limit, a.cap).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = match err.message.as_str() {
            m if m.contains("target") => format!("--target: {m}"),
            m if m.contains("limit") => format!("--limit: {m}"),
            m => format!("{}: {m}", a.ranges.display()),
        };
        err
    })?;
    let stairs = frontier(&result);

    ensure_dir(&a.out_dir)?;
    write_atomic(&a.out_dir.join("explore.csv"), &result.to_csv())?;
    write_atomic(&a.out_dir.join("explore.json"), &result.to_json())?;
    write_atomic(&a.out_dir.join("frontier.csv"), &frontier_csv(&stairs))?;

    println!(
        "evaluated {} configurations: {} feasible, {} below target, {} outside the model's valid region",
        result.evaluated, result.feasible_total, result.infeasible, result.errors
    );
    if let Some(best) = result.feasible.first() {
        println!(
            "cheapest: [{}] cost {} predicted score {}",
            schema.describe(&best.config),
            best.cost,
            best.predicted_score
        );
    } else {
        println!("no configuration reaches the target {}", a.target);
    }
    Ok(())
}

pub fn report(a: ReportArgs) -> CliResult {
    let reports = a
        .reports
        .iter()
        .map(|path| {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<CvReport>(&text).map_err(|e| {
                CliError::input(format!(
                    "{}: not a cross-validation report: {e}",
                    path.display()
                ))
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let csv = summary_csv(&reports);
    match &a.out {
        Some(path) => write_atomic(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
