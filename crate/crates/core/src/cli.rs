//! The `cperc` command line.
//!
//! Every artifact written by a command starts with `#` comment lines
//! carrying the tool version, the command, the seed and the resolved
//! configuration as JSON. Failures print a single
//! `error[<kind>]: <message>` line on stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::calibration::{apply_calibration, offset_pattern_table, pattern, Window};
use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::complexity::{CpModel, CpParams, CpTrainer};
use crate::config::{Preset, RunConfig};
use crate::data::{load_feature_csv, read_class_order, write_feature_csv, Dataset, Sample};
use crate::error::{Error, Result};
use crate::eval::{self, SyntheticSpec, ThetaChoice};
use crate::features::{load_rgb, FeaturePipeline, ImageFormat, LbpParams};

#[derive(Debug, Parser)]
#[command(
    name = "cperc",
    version,
    about = "Complexity perception meta-classification"
)]
pub struct Cli {
    /// TOML run configuration; flags take precedence over its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = one per core). Does not change any output.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// LBP + PCA + color-moment features for a labelled image folder.
    ExtractFeatures(ExtractArgs),
    /// Train and save a CP model.
    Train(TrainArgs),
    /// Route and classify feature rows with a saved CP model.
    Predict(PredictArgs),
    /// Outer cross-validation of CP against its base classifier.
    Evaluate(EvaluateArgs),
    /// CP and baseline accuracy over a θ grid.
    Sweep(SweepArgs),
    /// Write a synthetic contaminated-cluster dataset.
    GenSynthetic(SynthArgs),
    /// Apply a calibration pattern to a detection window.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory holding the images.
    #[arg(long)]
    pub images: PathBuf,
    /// CSV with header `file,label`; file names are relative to --images.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to save the fitted pipeline [default: <out>.pipeline.json].
    #[arg(long)]
    pub pipeline_out: Option<PathBuf>,
    #[arg(long)]
    pub pca_dim: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Regions per image side.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// softmax, svm or tree.
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub e: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Class-order sidecar: one class name per line.
    #[arg(long)]
    pub class_order: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Fixed threshold; without it θ is selected on a 15% holdout.
    #[arg(long)]
    pub theta: Option<f64>,
    /// θ candidates for selection, comma separated [default: 0.05..0.95].
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub model_args: ModelArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Output CSV [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub class_order: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Report CSV; the text table always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Select θ per fold on a validation holdout.
    #[arg(long, conflicts_with = "theta")]
    pub auto_theta: bool,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub outer_k: Option<usize>,
    #[command(flatten)]
    pub model_args: ModelArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub outer_k: Option<usize>,
    #[command(flatten)]
    pub model_args: ModelArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Relative class weights, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "constitution_priors")]
    pub priors: Option<Vec<f64>>,
    /// Use the nine body-constitution class shares (implies 9 classes).
    #[arg(long)]
    pub constitution_priors: bool,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub contamination: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    /// Also write a `id,contaminated` truth file.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// `x,y,w,h`.
    #[arg(
        long,
        value_delimiter = ',',
        required_unless_present = "list",
        allow_negative_numbers = true
    )]
    pub window: Option<Vec<f64>>,
    /// Pattern index in 0..45 (22 is the identity).
    #[arg(long, required_unless_present = "list")]
    pub pattern: Option<usize>,
    /// Clip the result to an image of `width,height`.
    #[arg(long, value_delimiter = ',')]
    pub clamp: Option<Vec<f64>>,
    /// Round the result to integer pixels.
    #[arg(long)]
    pub rasterize: bool,
    /// Print the pattern table instead.
    #[arg(long)]
    pub list: bool,
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error[argument]: {first}");
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), one_line(&e.to_string()));
            1
        }
    }
}

/// Entry point for the `cperc` binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn execute(cli: &Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| with_path(p, e))?,
        None => RunConfig::default(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::arg(format!("cannot start {} workers: {e}", cli.jobs)))?;
    pool.install(|| match &cli.command {
        Command::ExtractFeatures(a) => extract_features(a, &config),
        Command::Train(a) => train(a, &config),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a, &config),
        Command::Sweep(a) => sweep(a, &config),
        Command::GenSynthetic(a) => gen_synthetic(a, &config),
        Command::Calibrate(a) => calibrate(a),
    })
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| with_path(path, e.into()))
}

fn provenance<C: Serialize>(command: &str, seed: Option<u64>, config: &C) -> Result<Vec<String>> {
    let json = serde_json::to_string(config).map_err(|e| Error::Format(e.to_string()))?;
    let mut lines = vec![
        format!("tool: {}", crate::tool_version()),
        format!("command: {command}"),
    ];
    if let Some(s) = seed {
        lines.push(format!("seed: {s}"));
    }
    lines.push(format!("config: {json}"));
    Ok(lines)
}

fn load_features(path: &Path, class_order: Option<&Path>) -> Result<Dataset> {
    let order = class_order
        .map(|p| read_class_order(p).map_err(|e| with_path(p, e)))
        .transpose()?;
    load_feature_csv(path, order.as_deref()).map_err(|e| with_path(path, e))
}

fn require_seed(flag: Option<u64>, config: &RunConfig, command: &str) -> Result<u64> {
    flag.or(config.seed).ok_or_else(|| {
        Error::arg(format!(
            "{command} needs --seed (or `seed` in the config file)"
        ))
    })
}

fn resolve_cp(args: &ModelArgs, config: &RunConfig, theta: f64, seed: u64) -> Result<CpParams> {
    let base = match &args.classifier {
        Some(name) => ClassifierSpec {
            kind: ClassifierKind::from_name(name)?,
            seed: 0,
        },
        None => config.classifier.unwrap_or_else(ClassifierSpec::softmax),
    };
    let preset = args
        .preset
        .or(config.cp.preset)
        .unwrap_or(Preset::Traditional);
    let (k, e, n) = preset.kens();
    let params = CpParams {
        k: args.k.or(config.cp.k).unwrap_or(k),
        e: args.e.or(config.cp.e).unwrap_or(e),
        n: args.n.or(config.cp.n).unwrap_or(n),
        theta,
        base,
        seed,
        logit: config.cp.logit.unwrap_or_default(),
    };
    params.validate()?;
    Ok(params)
}

fn resolve_grid(flag: &Option<Vec<f64>>, config: &RunConfig) -> Vec<f64> {
    flag.clone()
        .or_else(|| config.eval.grid.clone())
        .unwrap_or_else(eval::default_grid)
}

#[derive(Serialize)]
struct ExtractConfig<'a> {
    images: &'a Path,
    labels: &'a Path,
    lbp: LbpParams,
    pca_dim: usize,
}

fn read_labels(path: &Path) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 || rec[0].is_empty() || rec[1].is_empty() {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                message: "expected `file,label`".into(),
            });
        }
        out.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(out)
}

fn extract_features(a: &ExtractArgs, config: &RunConfig) -> Result<()> {
    let f = &config.features;
    let lbp = LbpParams::new(
        a.points.or(f.points).unwrap_or(8),
        a.radius.or(f.radius).unwrap_or(1.0),
        a.grid.or(f.grid).unwrap_or(10),
    )?;
    let pca_dim = a.pca_dim.or(f.pca_dim).unwrap_or(50);
    let has_images = std::fs::read_dir(&a.images)
        .map_err(|e| with_path(&a.images, e.into()))?
        .filter_map(|entry| entry.ok())
        .any(|entry| ImageFormat::from_path(&entry.path()).is_some());
    if !has_images {
        return Err(Error::arg(format!(
            "{}: no PNG, PPM or BMP images found",
            a.images.display()
        )));
    }
    let entries = read_labels(&a.labels)?;
    if entries.is_empty() {
        return Err(Error::arg(format!(
            "{}: no labelled images",
            a.labels.display()
        )));
    }
    let mut images = Vec::with_capacity(entries.len());
    let mut failures = 0;
    for (file, _) in &entries {
        match load_rgb(&a.images.join(file)) {
            Ok(img) => images.push(img),
            Err(e) => {
                eprintln!("error[{}]: {}", e.kind(), one_line(&e.to_string()));
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(Error::Image {
            path: a.images.clone(),
            message: format!("{failures} of {} images could not be read", entries.len()),
        });
    }
    let (pipeline, rows) = FeaturePipeline::fit(&images, lbp, pca_dim)?;
    let mut names: Vec<String> = Vec::new();
    let mut samples = Vec::with_capacity(rows.len());
    for (i, ((_, label), features)) in entries.iter().zip(rows).enumerate() {
        let idx = match names.iter().position(|n| n == label) {
            Some(p) => p,
            None => {
                names.push(label.clone());
                names.len() - 1
            }
        };
        samples.push(Sample {
            id: i as u64,
            label: idx,
            features,
        });
    }
    let dataset = Dataset::new(samples, names)?;
    let comments = provenance(
        "extract-features",
        None,
        &ExtractConfig {
            images: &a.images,
            labels: &a.labels,
            lbp,
            pca_dim,
        },
    )?;
    let mut out = create(&a.out)?;
    write_feature_csv(&mut out, &dataset, &comments)?;
    out.flush()?;
    let pipeline_path = a.pipeline_out.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".pipeline.json");
        PathBuf::from(p)
    });
    let json = serde_json::to_string_pretty(&pipeline).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(&pipeline_path, json).map_err(|e| with_path(&pipeline_path, e.into()))?;
    println!(
        "wrote {} rows of {} features to {}",
        dataset.len(),
        dataset.dim(),
        a.out.display()
    );
    Ok(())
}

fn train(a: &TrainArgs, config: &RunConfig) -> Result<()> {
    let seed = require_seed(a.model_args.seed, config, "train")?;
    let data = load_features(&a.features, a.model_args.class_order.as_deref())?;
    let fixed = a.theta.or(config.cp.theta);
    let mut params = resolve_cp(&a.model_args, config, fixed.unwrap_or(1.0), seed)?;
    params.check_against(&data)?;
    if fixed.is_none() {
        let grid = resolve_grid(&a.grid, config);
        let sel = eval::select_theta(&data, &params, &grid, seed)?;
        println!(
            "selected theta {} on a {:.0}% holdout",
            sel.theta,
            eval::VALIDATION_FRACTION * 100.0
        );
        params.theta = sel.theta;
    }
    let model = CpTrainer::new(&data, &params)?.build(params.theta)?;
    model.save(&a.model).map_err(|e| with_path(&a.model, e))?;
    println!(
        "theta {}: easy {}, difficult {}{}{}",
        model.theta(),
        model.easy_count,
        model.difficult_count,
        if model.easy_fell_back() {
            " (easy side uses the fallback)"
        } else {
            ""
        },
        if model.difficult_fell_back() {
            " (difficult side uses the fallback)"
        } else {
            ""
        },
    );
    Ok(())
}

fn predict(a: &PredictArgs) -> Result<()> {
    let model = CpModel::load(&a.model).map_err(|e| with_path(&a.model, e))?;
    // Without a sidecar, read labels in the model's class order so indices agree.
    let data = match &a.class_order {
        Some(p) => load_features(&a.features, Some(p))?,
        None => load_feature_csv(&a.features, Some(&model.class_names))
            .map_err(|e| with_path(&a.features, e))?,
    };
    if data.dim() != model.dim() {
        return Err(Error::arg(format!(
            "features have dimension {}, model expects {}",
            data.dim(),
            model.dim()
        )));
    }
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    #[derive(Serialize)]
    struct PredictConfig<'a> {
        model: &'a Path,
        features: &'a Path,
    }
    for line in provenance(
        "predict",
        None,
        &PredictConfig {
            model: &a.model,
            features: &a.features,
        },
    )? {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "id,label,predicted,complexity")?;
    for s in data.samples() {
        let (label, tag) = model.predict_with_tag(&s.features)?;
        let name = |i: usize| {
            model
                .class_names
                .get(i)
                .map_or_else(|| i.to_string(), Clone::clone)
        };
        writeln!(
            out,
            "{},{},{},{}",
            s.id,
            data.class_names()[s.label],
            name(label),
            tag.name()
        )?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EvalConfig<'a> {
    features: &'a Path,
    cp: CpParams,
    theta: &'a ThetaChoice,
    outer_k: usize,
}

fn evaluate(a: &EvaluateArgs, config: &RunConfig) -> Result<()> {
    let seed = require_seed(a.model_args.seed, config, "evaluate")?;
    let data = load_features(&a.features, a.model_args.class_order.as_deref())?;
    let fixed = if a.auto_theta || (config.eval.auto_theta == Some(true) && a.theta.is_none()) {
        None
    } else {
        a.theta.or(config.cp.theta)
    };
    let choice = match fixed {
        Some(t) => ThetaChoice::Fixed(t),
        None => ThetaChoice::Select(resolve_grid(&a.grid, config)),
    };
    let params = resolve_cp(&a.model_args, config, fixed.unwrap_or(1.0), seed)?;
    let outer_k = a.outer_k.or(config.eval.outer_k).unwrap_or(5);
    let report = eval::evaluate(&data, &params, &choice, outer_k, seed)?;
    if let Some(path) = &a.out {
        let comments = provenance(
            "evaluate",
            Some(seed),
            &EvalConfig {
                features: &a.features,
                cp: params,
                theta: &choice,
                outer_k,
            },
        )?;
        let mut out = create(path)?;
        report.write_csv(&mut out, &comments)?;
        out.flush()?;
    }
    print!("{}", report.to_table());
    Ok(())
}

#[derive(Serialize)]
struct SweepConfig<'a> {
    features: &'a Path,
    cp: CpParams,
    grid: &'a [f64],
    outer_k: usize,
}

fn sweep(a: &SweepArgs, config: &RunConfig) -> Result<()> {
    let seed = require_seed(a.model_args.seed, config, "sweep")?;
    let data = load_features(&a.features, a.model_args.class_order.as_deref())?;
    let grid = resolve_grid(&a.grid, config);
    let params = resolve_cp(
        &a.model_args,
        config,
        grid.first().copied().unwrap_or(1.0),
        seed,
    )?;
    let outer_k = a.outer_k.or(config.eval.outer_k).unwrap_or(5);
    let result = eval::sweep_theta(&data, &params, &grid, outer_k, seed)?;
    let comments = provenance(
        "sweep",
        Some(seed),
        &SweepConfig {
            features: &a.features,
            cp: params,
            grid: &grid,
            outer_k,
        },
    )?;
    let mut out = create(&a.out)?;
    result.write_csv(&mut out, &comments)?;
    out.flush()?;
    for r in &result.rows {
        println!(
            "theta {:.2}  basic {:.2}  cp {:.2}  easy {}  diff {}",
            r.theta, r.basic, r.cp, r.easy_count, r.diff_count
        );
    }
    Ok(())
}

fn gen_synthetic(a: &SynthArgs, config: &RunConfig) -> Result<()> {
    let s = &config.synthetic;
    let seed = require_seed(a.seed, config, "gen-synthetic")?;
    let priors = if a.constitution_priors {
        Some(eval::CONSTITUTION_PRIORS.to_vec())
    } else {
        a.priors.clone().or_else(|| s.priors.clone())
    };
    let default_classes = priors.as_ref().map_or(3, Vec::len);
    let separation = a.separation.or(s.cluster_separation).unwrap_or(1.0);
    let spec = SyntheticSpec {
        class_count: a.classes.or(s.class_count).unwrap_or(default_classes),
        dim: a.dim.or(s.dim).unwrap_or(20),
        samples: a.samples.or(s.samples).unwrap_or(2000),
        priors,
        cluster_separation: separation,
        contamination_fraction: a.contamination.or(s.contamination_fraction).unwrap_or(0.3),
        contamination_noise_scale: a
            .noise
            .or(s.contamination_noise_scale)
            .unwrap_or(3.0 * separation),
        seed,
    };
    let data = eval::generate_synthetic_with_truth(&spec)?;
    let comments = provenance("gen-synthetic", Some(seed), &spec)?;
    let mut out = create(&a.out)?;
    write_feature_csv(&mut out, &data.dataset, &comments)?;
    out.flush()?;
    if let Some(path) = &a.truth_out {
        let mut t = create(path)?;
        for line in &comments {
            writeln!(t, "# {line}")?;
        }
        writeln!(t, "id,contaminated")?;
        for (s, c) in data.dataset.samples().iter().zip(&data.contaminated) {
            writeln!(t, "{},{}", s.id, u8::from(*c))?;
        }
        t.flush()?;
    }
    println!(
        "wrote {} samples to {}",
        data.dataset.len(),
        a.out.display()
    );
    Ok(())
}

fn calibrate(a: &CalibrateArgs) -> Result<()> {
    if a.list {
        println!("index,x_n,y_n,s_n");
        for (i, p) in offset_pattern_table().iter().enumerate() {
            println!("{i},{},{},{}", p.x_n, p.y_n, p.s_n);
        }
        return Ok(());
    }
    let (Some(w), Some(idx)) = (&a.window, a.pattern) else {
        return Err(Error::arg("calibrate needs --window and --pattern"));
    };
    let &[x, y, width, height] = w.as_slice() else {
        return Err(Error::arg(format!(
            "--window needs 4 values x,y,w,h, got {}",
            w.len()
        )));
    };
    let win = Window::new(x, y, width, height)?;
    let mut out = apply_calibration(&win, &pattern(idx)?)?;
    if let Some(c) = &a.clamp {
        let &[width, height] = c.as_slice() else {
            return Err(Error::arg("--clamp needs 2 values width,height"));
        };
        out = out
            .clamp_to(width, height)
            .ok_or_else(|| Error::arg("calibrated window lies entirely outside the image"))?;
    }
    println!("x,y,w,h");
    if a.rasterize {
        let r = out.rasterize();
        println!("{},{},{},{}", r.x, r.y, r.w, r.h);
    } else {
        println!("{},{},{},{}", out.x, out.y, out.w, out.h);
    }
    Ok(())
}
