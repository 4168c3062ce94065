use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use fcmstop_core::calibration::write_points_csv;
use fcmstop_core::cost::{seconds_to_hours, Extrapolation};
use fcmstop_core::imagery::{corpus_paths, load_corpus_file};
use fcmstop_core::synthetic::{scene_corpus, SceneParams};
use fcmstop_core::{
    calibrate as run_calibration, classify_early_stop, evaluate_corpus, extrapolate_savings, load_corpus_dir,
    load_image_features, load_model, save_model, write_label_image, write_rgb_image, CalibrationModel,
    CalibrationSettings, CorpusImage, CostReport, EvaluationReport, FcmConfig, FeatureMatrix, LabelMap, PriceSheet,
    TimeBasis,
};

use crate::args::{CalibrateArgs, ClassifyArgs, CorpusArgs, CostArgs, EvaluateArgs, SynthArgs};
use crate::{CmdResult, Failure};

fn set_jobs(jobs: usize) -> CmdResult {
    if jobs == 0 {
        return Err(Failure::usage(anyhow!("--jobs must be at least 1")));
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
        log::debug!("thread pool already configured: {e}");
    }
    Ok(())
}

fn check_accuracies(accuracies: &[f64]) -> CmdResult {
    if accuracies.is_empty() {
        return Err(Failure::usage(anyhow!("no accuracies given")));
    }
    check_accuracy_list(accuracies)
}

fn check_accuracy_list(accuracies: &[f64]) -> CmdResult {
    match accuracies.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        Some(a) => Err(Failure::usage(anyhow!("accuracy {a} is out of range; expected a value in (0, 1)"))),
        None => Ok(()),
    }
}

fn load_corpus(args: &CorpusArgs) -> CmdResult<Vec<CorpusImage>> {
    if !args.input.is_dir() {
        return Err(Failure::usage(anyhow!("{} is not a directory", args.input.display())));
    }
    if corpus_paths(&args.input)?.is_empty() {
        return Err(Failure::usage(anyhow!(
            "no loadable inputs (.png, .ppm, .pnm, .csv) in {}",
            args.input.display()
        )));
    }
    let corpus = load_corpus_dir(&args.input, args.header)?;
    log::info!("loaded {} inputs from {}", corpus.len(), args.input.display());
    Ok(corpus)
}

fn read_model(path: &Path) -> CmdResult<CalibrationModel> {
    if !path.is_file() {
        return Err(Failure::usage(anyhow!("model file {} not found", path.display())));
    }
    load_model(path).map_err(|e| {
        let code = Failure::from(e);
        Failure {
            code: code.code,
            error: code.error.context(format!("loading model {}", path.display())),
        }
    })
}

fn check_clusters(config: &FcmConfig, model: &CalibrationModel) -> CmdResult {
    if config.n_clusters != model.fcm_config.n_clusters {
        return Err(Failure::usage(anyhow!(
            "model was calibrated with {} clusters, not {}",
            model.fcm_config.n_clusters,
            config.n_clusters
        )));
    }
    config.validate()?;
    Ok(())
}

fn create_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::runtime)
}

pub fn calibrate(args: &CalibrateArgs) -> CmdResult {
    set_jobs(args.jobs.jobs)?;
    check_accuracies(&args.accuracies)?;
    let settings = CalibrationSettings {
        fcm: args.fcm.apply(&FcmConfig::default()),
        lof: args.lof(),
        svr: args.svr(),
        accuracy_grid: args.accuracies.clone(),
        record_training_time: args.record_timing,
    };
    settings.fcm.validate()?;
    settings.svr.validate()?;
    if !(settings.lof.outliers_fraction > 0.0 && settings.lof.outliers_fraction < 1.0) {
        return Err(Failure::usage(anyhow!("--outliers-fraction must lie in (0, 1)")));
    }
    if settings.lof.n_neighbors == 0 {
        return Err(Failure::usage(anyhow!("--lof-neighbors must be at least 1")));
    }
    let corpus = load_corpus(&args.corpus)?;

    let (model, harvest) = run_calibration(&corpus, &settings).map_err(|e| match e {
        fcmstop_core::Error::Config(_) => Failure::from(e),
        other => Failure::runtime(other),
    })?;
    if let Some(path) = &args.points_csv {
        write_points_csv(&harvest.points, path).map_err(Failure::runtime)?;
    }
    save_model(&model, &args.out).map_err(Failure::runtime)?;
    if !model.svr.converged {
        log::warn!("the regressor did not converge; thresholds may be imprecise");
    }
    log::info!("wrote {}", args.out.display());

    let s = &model.fit_summary;
    let mut out = String::new();
    let _ = writeln!(out, "images               {}", corpus.len() - harvest.skipped.len());
    if !harvest.skipped.is_empty() {
        let _ = writeln!(out, "skipped              {}", harvest.skipped.join(", "));
    }
    let _ = writeln!(out, "calibration points   {}", s.n_points);
    let _ = writeln!(out, "zero change rates    {}", s.n_zero_rate_dropped);
    let _ = writeln!(out, "outliers removed     {}", s.n_outliers_removed);
    let _ = writeln!(out, "support vectors      {}", s.n_support_vectors);
    let _ = writeln!(out, "accuracy  threshold");
    for e in &model.threshold_table {
        let _ = writeln!(out, "{:<9} {:.6e}", e.accuracy, e.threshold);
    }
    print!("{out}");
    Ok(())
}

/// Where the labels of one classified input go.
fn label_path(args: &ClassifyArgs, id: &str, raster: bool) -> CmdResult<PathBuf> {
    let ext = if raster { "png" } else { "csv" };
    match (&args.out, &args.out_dir) {
        (Some(out), _) => Ok(out.clone()),
        (None, Some(dir)) => Ok(dir.join(format!("{id}_labels.{ext}"))),
        (None, None) => Err(Failure::usage(anyhow!("pass --out or --out-dir"))),
    }
}

fn write_label_lines(labels: &[usize], path: &Path) -> CmdResult {
    let mut text = String::with_capacity(labels.len() * 2);
    for l in labels {
        let _ = writeln!(text, "{l}");
    }
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::runtime)
}

pub fn classify(args: &ClassifyArgs) -> CmdResult {
    check_accuracy_list(&[args.accuracy])?;
    if args.out.is_some() && args.images.len() > 1 {
        return Err(Failure::usage(anyhow!("--out takes a single input; use --out-dir for several")));
    }
    let model = read_model(&args.model)?;
    let config = args.fcm.apply(&model.fcm_config);
    check_clusters(&config, &model)?;
    let threshold = model.threshold_for(args.accuracy)?;
    let interpolated = model.table_entry(args.accuracy).is_none();
    if interpolated {
        log::info!("accuracy {} is not tabulated; using interpolated threshold {threshold:e}", args.accuracy);
    }
    if let Some(dir) = &args.out_dir {
        create_dir(dir)?;
    }

    for path in &args.images {
        let raster = !path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let (id, dims, features): (String, Option<(u32, u32)>, FeatureMatrix) = if raster {
            let r = load_image_features(path).map_err(Failure::usage)?;
            (r.id, Some((r.width, r.height)), r.features)
        } else {
            let c = load_corpus_file(path, args.header).map_err(Failure::usage)?;
            (c.id, None, c.features)
        };
        let result = classify_early_stop(&features, &config, threshold)?;
        let out = label_path(args, &id, raster)?;
        match dims {
            Some((w, h)) => {
                let map = LabelMap::new(w, h, result.labels.clone(), config.n_clusters)?;
                write_label_image(&map, &out).map_err(Failure::runtime)?;
            }
            None => write_label_lines(&result.labels, &out)?,
        }
        println!(
            "{id}\tstop_iteration={}\tstopped_early={}\telapsed={:.6}s\tthreshold={threshold:.6e}{}\tlabels={}",
            result.stop_iteration,
            result.stopped_early,
            result.elapsed_seconds,
            if interpolated { " (interpolated)" } else { "" },
            out.display()
        );
    }
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> CmdResult {
    set_jobs(args.jobs.jobs)?;
    check_accuracies(&args.accuracies)?;
    let model = read_model(&args.model)?;
    let config = args.fcm.apply(&model.fcm_config);
    check_clusters(&config, &model)?;
    let corpus = load_corpus(&args.corpus)?;
    let report = evaluate_corpus(&corpus, &model, &args.accuracies, &config, args.time_basis.into())?;

    create_dir(&args.out_dir)?;
    let write = |r: fcmstop_core::Result<()>| r.map_err(Failure::runtime);
    write(report.save_json(&args.out_dir.join("report.json")))?;
    write(report.write_accuracy_csv(&args.out_dir.join("accuracy.csv")))?;
    write(report.write_time_csv(&args.out_dir.join("time.csv")))?;
    log::info!("wrote report to {}", args.out_dir.display());

    let mut out = String::from("accuracy  threshold     mean_achieved  std_achieved  mean_time_fraction\n");
    for l in &report.levels {
        let _ = writeln!(
            out,
            "{:<9} {:<13.6e} {:<14.6} {:<13.6} {:.6}",
            l.desired_accuracy, l.threshold, l.mean_achieved, l.std_achieved, l.mean_time_fraction
        );
    }
    print!("{out}");
    Ok(())
}

/// Early-stopped and full-run hours summed over the report's images at one level.
fn report_hours(args: &CostArgs, report: &EvaluationReport) -> CmdResult<(f64, f64, usize)> {
    let level = match (args.accuracy, report.levels.as_slice()) {
        (Some(a), _) => report
            .level(a)
            .ok_or_else(|| Failure::usage(anyhow!("report has no accuracy level {a}")))?,
        (None, [only]) => only,
        (None, _) => {
            return Err(Failure::usage(anyhow!(
                "report has {} accuracy levels; choose one with --accuracy",
                report.levels.len()
            )))
        }
    };
    let records = report.records_for(level.desired_accuracy);
    let (mut actual, mut total) = (0.0, 0.0);
    for r in &records {
        let (stop, full) = match (report.time_basis, r.stop_seconds, r.total_seconds) {
            (TimeBasis::WallClock, Some(s), Some(t)) => (s, t),
            _ => {
                let per = args.seconds_per_iteration.ok_or_else(|| {
                    Failure::usage(anyhow!(
                        "the report counts iterations; pass --seconds-per-iteration to convert to time"
                    ))
                })?;
                if !(per > 0.0 && per.is_finite()) {
                    return Err(Failure::usage(anyhow!("--seconds-per-iteration must be positive")));
                }
                (r.stop_iteration as f64 * per, r.total_iterations as f64 * per)
            }
        };
        actual += seconds_to_hours(stop);
        total += seconds_to_hours(full);
    }
    Ok((actual, total, records.len()))
}

fn extrapolation_text(x: &Extrapolation, currency: &str) -> String {
    format!(
        "images in region    {}\nsaved hours         {:.2} h\nsaved in region     {} {currency}",
        x.image_count,
        x.saved_hours,
        fcmstop_core::Cents::from_amount(x.saved_amount)
    )
}

pub fn cost(args: &CostArgs) -> CmdResult {
    let price = args
        .unit_price
        .ok_or_else(|| Failure::usage(anyhow!("missing --unit-price")))?;
    let price = PriceSheet::new(price, args.currency.clone())?;

    let mut times = None;
    let mut per_image_saved = None;
    if let Some(path) = &args.report {
        if !path.is_file() {
            return Err(Failure::usage(anyhow!("report file {} not found", path.display())));
        }
        let report = EvaluationReport::load_json(path)?;
        let (actual, total, n) = report_hours(args, &report)?;
        if n > 0 {
            per_image_saved = Some((total - actual) / n as f64);
        }
        times = Some((actual, total));
    }
    match (args.t_actual, args.t_total) {
        (Some(a), Some(t)) => times = Some((a, t)),
        (None, None) => {}
        _ => return Err(Failure::usage(anyhow!("--t-actual and --t-total go together"))),
    }

    let t_train = match (args.t_train, &args.model) {
        (Some(t), _) => t,
        (None, Some(path)) => read_model(path)?
            .training_time_seconds
            .map(seconds_to_hours)
            .unwrap_or_else(|| {
                log::warn!("model has no recorded training time; using 0 h");
                0.0
            }),
        (None, None) => 0.0,
    };

    let extrapolation = match (args.area_km2, args.image_area_m2) {
        (Some(area), Some(footprint)) => {
            let saved = args.saved_hours_per_image.or(per_image_saved).ok_or_else(|| {
                Failure::usage(anyhow!("pass --saved-hours-per-image or a --report to derive it"))
            })?;
            Some(extrapolate_savings(area, footprint, saved, &price)?)
        }
        (None, None) => None,
        _ => return Err(Failure::usage(anyhow!("--area-km2 and --image-area-m2 go together"))),
    };

    let value = match (times, extrapolation) {
        (Some((actual, total)), x) => {
            let mut report = CostReport::new(&price, t_train, actual, total)?;
            if let Some(x) = x {
                report = report.with_extrapolation(x);
            }
            println!("{report}");
            serde_json::to_value(&report)
        }
        (None, Some(x)) => {
            println!("{}", extrapolation_text(&x, &price.currency));
            serde_json::to_value(&x)
        }
        (None, None) => {
            return Err(Failure::usage(anyhow!(
                "nothing to compute: pass --report, --t-actual/--t-total, or --area-km2/--image-area-m2"
            )))
        }
    }
    .map_err(Failure::runtime)?;
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&value).map_err(Failure::runtime)? + "\n";
        std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::runtime)?;
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> CmdResult {
    let defaults = SceneParams::default();
    let params = SceneParams {
        width: args.width,
        height: args.height,
        noise_std: args.noise.unwrap_or(defaults.noise_std),
        shading: args.shading.unwrap_or(defaults.shading),
        ..defaults
    };
    if params.width == 0 || params.height == 0 {
        return Err(Failure::usage(anyhow!("scene dimensions must be positive")));
    }
    create_dir(&args.out)?;
    let truth_dir = args.out.join("truth");
    if args.truth {
        create_dir(&truth_dir)?;
    }
    for scene in scene_corpus(&args.prefix, args.count, args.seed, &params) {
        let id = &scene.record.id;
        write_rgb_image(&args.out.join(format!("{id}.png")), params.width, params.height, &scene.rgb)
            .map_err(Failure::runtime)?;
        if args.truth {
            let map = LabelMap::new(params.width, params.height, scene.truth, 6)?;
            write_label_image(&map, &truth_dir.join(format!("{id}.png"))).map_err(Failure::runtime)?;
        }
    }
    log::info!("wrote {} scenes to {}", args.count, args.out.display());
    Ok(())
}
