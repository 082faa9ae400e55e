//! The `hwgail` command line.
//!
//! Settings resolve in three layers: built-in defaults, then the TOML file
//! given with `--config`, then command-line flags. The resolved values, seeds
//! and input fingerprints are written to `manifest.json` in the output
//! directory of every run.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baseline::train_predictor;
use crate::dataset::{
    build_dataset, load_canonical, load_dataset, parse_unipen_subset, sha256_hex, write_dataset,
    Dataset, Split,
};
use crate::error::Error;
use crate::eval::{
    curvature_histogram, generate_set, histogram_distance, qmap, render, Artifact,
    CurvatureHistogram, RenderOptions, DEFAULT_BINS, DEFAULT_DELTA_MAX, DEFAULT_GRID,
    DEFAULT_KAPPA_MAX, DEFAULT_PREFIX,
};
use crate::gail::{train_gail, GailModel, OptimizerKind, TrainingConfig};
use crate::nn::checkpoint::{self, write_atomic};
use crate::nn::{Head, ParameterSet};
use crate::synthetic::{synthetic_experts, SyntheticConfig};
use crate::trajectory::{make_state, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_TRAINING: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hwgail", version, about = "Handwriting trajectory generation by model-based GAIL")]
struct Cli {
    /// TOML file with [ingest], [training], [baseline], [eval] and [synthetic] tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 1 gives bit-reproducible runs. 0 picks the core count.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum InputFormat {
    Unipen,
    Canonical,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert UNIPEN or canonical records into train/test dataset files.
    Ingest {
        #[arg(long)]
        format: Option<InputFormat>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        /// Fraction of samples assigned to the training split.
        #[arg(long)]
        split: Option<f64>,
    },
    /// Train actor, critic and discriminator.
    TrainGail {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Train the supervised next-point predictor.
    TrainBaseline {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Complete every sample of a dataset from its first `t0` points.
    Generate {
        /// Actor or predictor checkpoint.
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        t0: Option<usize>,
    },
    /// Curvature histograms of a reference set and up to two generated sets.
    EvalCurvature {
        #[arg(long)]
        expert: PathBuf,
        #[arg(long)]
        gail: Option<PathBuf>,
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Q values over a grid of candidate next points for one conditioning prefix.
    Qmap {
        #[arg(long)]
        critic: PathBuf,
        #[arg(long)]
        discriminator: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Sample whose prefix conditions the map.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        t0: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        /// Defaults to the discount stored in the critic checkpoint.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Synthetic-expert experiment: data, both models, generation, histograms, Q-maps.
    SmokeTest {
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        baseline_steps: Option<u64>,
    },
}

/// Dataset construction settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub format: String,
    pub horizon: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            format: "unipen".into(),
            horizon: 50,
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Generation and analysis settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Prefix length copied from the source sample.
    pub t0: usize,
    /// 0-based window `t_start..t_end` of curvature centre indices.
    pub t_start: usize,
    pub t_end: usize,
    pub delta_max: usize,
    pub bins: usize,
    pub kappa_max: f64,
    pub grid: usize,
    /// Number of samples drawn as images.
    pub render: usize,
    /// Number of Q-maps exported by the smoke experiment.
    pub qmaps: usize,
    pub pixels: u32,
    pub cell_pixels: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            t0: DEFAULT_PREFIX,
            t_start: DEFAULT_PREFIX,
            t_end: 50,
            delta_max: DEFAULT_DELTA_MAX,
            bins: DEFAULT_BINS,
            kappa_max: DEFAULT_KAPPA_MAX,
            grid: DEFAULT_GRID,
            render: 15,
            qmaps: 3,
            pixels: 256,
            cell_pixels: 4,
        }
    }
}

impl EvalConfig {
    fn render_options(&self) -> RenderOptions {
        RenderOptions {
            size: self.pixels,
            cell: self.cell_pixels,
        }
    }

    fn histogram(&self, trajs: &[Trajectory]) -> crate::Result<CurvatureHistogram> {
        curvature_histogram(trajs, self.t_start..self.t_end, self.delta_max, self.bins, self.kappa_max)
    }
}

/// Settings of the smoke experiment beyond training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmokeConfig {
    pub train_fraction: f64,
}

impl Default for SmokeConfig {
    fn default() -> Self {
        Self { train_fraction: 0.8 }
    }
}

/// GAIL settings used by `smoke-test` before the config file is applied.
///
/// Narrower networks than the full model so the run fits a CPU budget of
/// minutes; training prefixes are centred on the evaluation prefix length.
/// Exploration noise stays well below the expert point spacing (about 0.012
/// here); larger noise lets the discriminator separate generated strokes by
/// their jitter alone and the policy never settles.
pub fn smoke_training_defaults() -> TrainingConfig {
    TrainingConfig {
        optimizer: OptimizerKind::Adam,
        actor_lr: 1e-4,
        critic_lr: 1e-3,
        discriminator_lr: 3e-4,
        total_steps: 20_000,
        noise_scale: 0.003,
        tau: 0.01,
        min_prefix: 18,
        max_prefix: 22,
        log_interval: 100,
        checkpoint_interval: 5_000,
        conv1_channels: 16,
        conv2_channels: 8,
        ..TrainingConfig::default()
    }
}

/// Predictor settings used by `smoke-test` before the config file is applied.
pub fn smoke_baseline_defaults() -> TrainingConfig {
    TrainingConfig {
        optimizer: OptimizerKind::Adam,
        actor_lr: 3e-3,
        final_lr_scale: 0.01,
        total_steps: 10_000,
        log_interval: 100,
        checkpoint_interval: 10_000,
        conv1_channels: 16,
        conv2_channels: 8,
        ..TrainingConfig::default()
    }
}

/// The raw tables of a config file.
#[derive(Debug, Default)]
struct FileConfig {
    tables: toml::Table,
}

const SECTIONS: [&str; 6] = ["ingest", "training", "baseline", "eval", "synthetic", "smoke"];

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let tables: toml::Table = text
            .parse()
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
        if let Some(key) = tables.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(CliError::usage(format!("config {}: unknown table [{key}]", path.display())));
        }
        Ok(Self { tables })
    }

    /// `base` with the keys of table `section` written over it.
    fn resolve<T: Serialize + DeserializeOwned>(&self, section: &str, base: T) -> Result<T, CliError> {
        let Some(overrides) = self.tables.get(section) else {
            return Ok(base);
        };
        let toml::Value::Table(overrides) = overrides else {
            return Err(CliError::usage(format!("config: [{section}] must be a table")));
        };
        let mut merged = toml::Table::try_from(&base)
            .map_err(|e| CliError::usage(format!("config [{section}]: {e}")))?;
        for (k, v) in overrides {
            merged.insert(k.clone(), v.clone());
        }
        merged
            .try_into()
            .map_err(|e| CliError::usage(format!("config [{section}]: {e}")))
    }
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Training(_) | Error::NonFinite(_) => EXIT_TRAINING,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn training_error(e: Error) -> CliError {
    match e {
        Error::InvalidArgument(_) | Error::Io { .. } => e.into(),
        other => CliError {
            code: EXIT_TRAINING,
            message: other.to_string(),
        },
    }
}

#[derive(Debug, Serialize)]
struct InputFingerprint {
    path: String,
    sha256: String,
}

/// Everything needed to repeat a run.
#[derive(Debug, Serialize)]
struct Manifest {
    command: String,
    version: String,
    arguments: Vec<String>,
    workers: usize,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<InputFingerprint>,
    config: serde_json::Value,
}

struct Context {
    out: PathBuf,
    seed: Option<u64>,
    file: FileConfig,
    arguments: Vec<String>,
    workers: usize,
}

impl Context {
    fn seed_or(&self, configured: u64) -> u64 {
        self.seed.unwrap_or(configured)
    }

    fn write_manifest(
        &self,
        command: &str,
        seeds: &[(&str, u64)],
        inputs: &[&Path],
        config: serde_json::Value,
    ) -> CliResult<()> {
        let inputs = inputs
            .iter()
            .map(|p| {
                let bytes = fs::read(p).map_err(|e| Error::io(*p, e))?;
                Ok(InputFingerprint {
                    path: p.display().to_string(),
                    sha256: sha256_hex(&bytes),
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let manifest = Manifest {
            command: command.into(),
            version: crate::VERSION.into(),
            arguments: self.arguments.clone(),
            workers: self.workers,
            seeds: seeds.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            inputs,
            config,
        };
        write_json(&self.out.join("manifest.json"), &manifest)
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    Ok(write_atomic(path, format!("{text}\n").as_bytes())?)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    Ok(write_atomic(path, text.as_bytes())?)
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::from(Error::io(path, e)))
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status. Diagnostics go to standard error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, &args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn run(cli: Cli, args: &[OsString]) -> CliResult<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {} workers: {e}", cli.workers)))?;
    let ctx = Context {
        out: cli.out,
        seed: cli.seed,
        file,
        arguments: args.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        workers: cli.workers,
    };
    create_dir(&ctx.out)?;
    pool.install(|| match cli.command {
        Command::Ingest {
            format,
            input,
            horizon,
            split,
        } => ingest(&ctx, format, &input, horizon, split),
        Command::TrainGail { train, steps } => train_gail_cmd(&ctx, &train, steps),
        Command::TrainBaseline { train, steps } => train_baseline_cmd(&ctx, &train, steps),
        Command::Generate {
            checkpoint,
            data,
            t0,
        } => generate_cmd(&ctx, &checkpoint, &data, t0),
        Command::EvalCurvature {
            expert,
            gail,
            baseline,
        } => eval_curvature_cmd(&ctx, &expert, gail.as_deref(), baseline.as_deref()),
        Command::Qmap {
            critic,
            discriminator,
            data,
            index,
            t0,
            grid,
            gamma,
        } => qmap_cmd(&ctx, &critic, &discriminator, &data, index, t0, grid, gamma),
        Command::SmokeTest {
            steps,
            baseline_steps,
        } => smoke_test(&ctx, steps, baseline_steps),
    })
}

fn ingest(
    ctx: &Context,
    format: Option<InputFormat>,
    input: &Path,
    horizon: Option<usize>,
    split: Option<f64>,
) -> CliResult<()> {
    let mut cfg: IngestConfig = ctx.file.resolve("ingest", IngestConfig::default())?;
    if let Some(f) = format {
        cfg.format = match f {
            InputFormat::Unipen => "unipen",
            InputFormat::Canonical => "canonical",
        }
        .into();
    }
    cfg.horizon = horizon.unwrap_or(cfg.horizon);
    cfg.train_fraction = split.unwrap_or(cfg.train_fraction);
    cfg.seed = ctx.seed_or(cfg.seed);

    let raw = match cfg.format.as_str() {
        "unipen" => {
            let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
            let parsed = parse_unipen_subset(&text)?;
            if parsed.skipped_segments > 0 {
                eprintln!("skipped {} segments without pen-down points", parsed.skipped_segments);
            }
            parsed.samples
        }
        "canonical" => load_canonical(input)?,
        other => return Err(CliError::usage(format!("unknown input format `{other}`"))),
    };
    let split = build_dataset(&raw, cfg.horizon, cfg.train_fraction, cfg.seed)?;
    write_dataset(&split.train, &ctx.out.join("train.jsonl"))?;
    write_dataset(&split.test, &ctx.out.join("test.jsonl"))?;
    if !split.dropped.is_empty() {
        write_text(&ctx.out.join("dropped.txt"), &(split.dropped.join("\n") + "\n"))?;
    }
    println!(
        "ingested {} samples: {} train, {} test, {} dropped",
        raw.len(),
        split.train.len(),
        split.test.len(),
        split.dropped.len()
    );
    ctx.write_manifest(
        "ingest",
        &[("split", cfg.seed)],
        &[input],
        serde_json::json!({ "ingest": cfg }),
    )
}

fn gail_config(ctx: &Context, base: TrainingConfig, steps: Option<u64>) -> CliResult<TrainingConfig> {
    let mut cfg = ctx.file.resolve("training", base)?;
    cfg.seed = ctx.seed_or(cfg.seed);
    cfg.total_steps = steps.unwrap_or(cfg.total_steps);
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

fn baseline_config(ctx: &Context, base: TrainingConfig, steps: Option<u64>) -> CliResult<TrainingConfig> {
    let mut cfg = ctx.file.resolve("baseline", base)?;
    cfg.seed = ctx.seed_or(cfg.seed);
    cfg.total_steps = steps.unwrap_or(cfg.total_steps);
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

fn train_gail_cmd(ctx: &Context, train: &Path, steps: Option<u64>) -> CliResult<()> {
    let cfg = gail_config(ctx, TrainingConfig::default(), steps)?;
    let data = load_dataset(train)?;
    ctx.write_manifest(
        "train-gail",
        &[("training", cfg.seed)],
        &[train],
        serde_json::json!({ "training": cfg }),
    )?;
    let outcome = train_gail(&cfg, &data, Some(&ctx.out)).map_err(training_error)?;
    if let Some(last) = outcome.metrics.last() {
        println!(
            "step {}: discriminator {:.6}, critic {:.6}, actor {:.6}",
            last.step, last.discriminator_loss, last.critic_loss, last.actor_objective
        );
    }
    Ok(())
}

fn train_baseline_cmd(ctx: &Context, train: &Path, steps: Option<u64>) -> CliResult<()> {
    let cfg = baseline_config(ctx, TrainingConfig::default(), steps)?;
    let data = load_dataset(train)?;
    ctx.write_manifest(
        "train-baseline",
        &[("baseline", cfg.seed)],
        &[train],
        serde_json::json!({ "baseline": cfg }),
    )?;
    let outcome = train_predictor(&cfg, &data, Some(&ctx.out)).map_err(training_error)?;
    if let Some(loss) = outcome.loss_curve.last() {
        println!("final loss {loss:.6e}");
    }
    Ok(())
}

fn load_policy(path: &Path) -> CliResult<ParameterSet> {
    let (params, manifest) = checkpoint::load(path)?;
    if params.spec().head != Head::Actor {
        return Err(Error::invalid(format!(
            "{} holds a `{}` network, not a policy",
            path.display(),
            manifest.model_kind
        ))
        .into());
    }
    Ok(params)
}

fn render_set(dir: &Path, prefix: &str, trajs: &[Trajectory], eval: &EvalConfig) -> CliResult<()> {
    create_dir(dir)?;
    for (k, t) in trajs.iter().take(eval.render).enumerate() {
        render(
            Artifact::Trajectory(t),
            &dir.join(format!("{prefix}_{k:03}.png")),
            &eval.render_options(),
        )?;
    }
    Ok(())
}

fn generated_dataset(source: &Dataset, trajs: Vec<Trajectory>) -> CliResult<Dataset> {
    Ok(Dataset::new(source.horizon, Split::Test, source.seed, trajs)?)
}

fn generate_cmd(ctx: &Context, ckpt: &Path, data: &Path, t0: Option<usize>) -> CliResult<()> {
    let mut eval: EvalConfig = ctx.file.resolve("eval", EvalConfig::default())?;
    eval.t0 = t0.unwrap_or(eval.t0);
    let actor = load_policy(ckpt)?;
    let source = load_dataset(data)?;
    let generated = generate_set(&actor, &source.samples, eval.t0)?;
    render_set(&ctx.out.join("images"), "generated", &generated, &eval)?;
    write_dataset(&generated_dataset(&source, generated)?, &ctx.out.join("generated.jsonl"))?;
    println!("generated {} trajectories from {}-point prefixes", source.len(), eval.t0);
    ctx.write_manifest("generate", &[], &[ckpt, data], serde_json::json!({ "eval": eval }))
}

/// Histogram distances of each compared set to the reference set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub reference: String,
    pub distances: BTreeMap<String, f64>,
}

/// Writes `hist_{name}.csv` and `images/hist_{name}.png` for every set and
/// returns the distance of each later set to the first.
fn curvature_report(
    out: &Path,
    sets: &[(&str, &[Trajectory])],
    eval: &EvalConfig,
) -> CliResult<CurvatureReport> {
    let images = out.join("images");
    create_dir(&images)?;
    let mut hists = Vec::with_capacity(sets.len());
    for (name, trajs) in sets {
        let h = eval.histogram(trajs)?;
        write_text(&out.join(format!("hist_{name}.csv")), &h.to_csv())?;
        render(
            Artifact::Histogram(&h),
            &images.join(format!("hist_{name}.png")),
            &eval.render_options(),
        )?;
        hists.push(h);
    }
    let mut distances = BTreeMap::new();
    for ((name, _), h) in sets.iter().zip(&hists).skip(1) {
        distances.insert(name.to_string(), histogram_distance(h, &hists[0])?);
    }
    let report = CurvatureReport {
        reference: sets[0].0.to_string(),
        distances,
    };
    write_json(&out.join("curvature_report.json"), &report)?;
    Ok(report)
}

fn eval_curvature_cmd(
    ctx: &Context,
    expert: &Path,
    gail: Option<&Path>,
    baseline: Option<&Path>,
) -> CliResult<()> {
    let eval: EvalConfig = ctx.file.resolve("eval", EvalConfig::default())?;
    let mut loaded = vec![("expert", load_dataset(expert)?)];
    let mut inputs = vec![expert];
    for (name, path) in [("gail", gail), ("baseline", baseline)] {
        if let Some(p) = path {
            loaded.push((name, load_dataset(p)?));
            inputs.push(p);
        }
    }
    let sets: Vec<(&str, &[Trajectory])> =
        loaded.iter().map(|(n, d)| (*n, d.samples.as_slice())).collect();
    let report = curvature_report(&ctx.out, &sets, &eval)?;
    for (name, d) in &report.distances {
        println!("{name}: histogram distance to expert {d:.6}");
    }
    ctx.write_manifest("eval-curvature", &[], &inputs, serde_json::json!({ "eval": eval }))
}

fn checkpoint_gamma(path: &Path) -> CliResult<(ParameterSet, Option<f64>)> {
    let (params, manifest) = checkpoint::load(path)?;
    Ok((params, manifest.extra.get("gamma").and_then(|g| g.as_f64())))
}

fn export_qmap(
    dir: &Path,
    name: &str,
    critic: &ParameterSet,
    disc: &ParameterSet,
    prefix: &Trajectory,
    t0: usize,
    gamma: f64,
    eval: &EvalConfig,
) -> CliResult<()> {
    if t0 == 0 || t0 > prefix.len() {
        return Err(Error::invalid(format!("prefix length {t0} outside 1..={}", prefix.len())).into());
    }
    let state = make_state(&prefix.points[..t0], critic.spec().sequence_length)?;
    let map = qmap(critic, disc, &state, eval.grid, gamma)?;
    write_text(&dir.join(format!("{name}.csv")), &map.to_csv())?;
    write_json(&dir.join(format!("{name}.json")), &map.sidecar())?;
    render(Artifact::QMap(&map), &dir.join(format!("{name}.png")), &eval.render_options())?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn qmap_cmd(
    ctx: &Context,
    critic_path: &Path,
    disc_path: &Path,
    data: &Path,
    index: usize,
    t0: Option<usize>,
    grid: Option<usize>,
    gamma: Option<f64>,
) -> CliResult<()> {
    let mut eval: EvalConfig = ctx.file.resolve("eval", EvalConfig::default())?;
    eval.t0 = t0.unwrap_or(eval.t0);
    eval.grid = grid.unwrap_or(eval.grid);
    let (critic, stored_gamma) = checkpoint_gamma(critic_path)?;
    let (disc, _) = checkpoint::load(disc_path)?;
    let gamma = gamma
        .or(stored_gamma)
        .unwrap_or(TrainingConfig::default().gamma);
    let source = load_dataset(data)?;
    let sample = source.samples.get(index).ok_or_else(|| {
        CliError::usage(format!("index {index} out of range for {} samples", source.len()))
    })?;
    export_qmap(&ctx.out, "qmap", &critic, &disc, sample, eval.t0, gamma, &eval)?;
    println!("wrote {0}x{0} Q-map for sample {index}", eval.grid);
    ctx.write_manifest(
        "qmap",
        &[],
        &[critic_path, disc_path, data],
        serde_json::json!({ "eval": eval, "gamma": gamma, "index": index }),
    )
}

/// Outcome of the synthetic-expert experiment, written to `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmokeReport {
    pub distance_gail: f64,
    pub distance_baseline: f64,
    pub distance_untrained: f64,
    /// Actor at the start of adversarial training (after any pretraining).
    pub distance_initial: f64,
    /// `1 - distance_gail / distance_untrained`.
    pub improvement: f64,
    /// Mode bin of the generated histogram at scale 10.
    pub gail_mode_delta10: usize,
    /// Mean distance between consecutive generated points after the prefix.
    pub gail_mean_step: f64,
    pub expert_mean_step: f64,
    pub train_samples: usize,
    pub test_samples: usize,
}

fn mean_step(trajs: &[Trajectory], from: usize) -> f64 {
    let steps: Vec<f64> = trajs
        .iter()
        .flat_map(|t| t.points[from.saturating_sub(1)..].windows(2).map(|w| w[0].distance(&w[1])))
        .collect();
    steps.iter().sum::<f64>() / steps.len().max(1) as f64
}

fn smoke_test(ctx: &Context, steps: Option<u64>, baseline_steps: Option<u64>) -> CliResult<()> {
    let gail_cfg = gail_config(ctx, smoke_training_defaults(), steps)?;
    let mut base_cfg = baseline_config(ctx, smoke_baseline_defaults(), baseline_steps)?;
    base_cfg.horizon = gail_cfg.horizon;
    let eval: EvalConfig = ctx.file.resolve("eval", EvalConfig::default())?;
    let smoke: SmokeConfig = ctx.file.resolve("smoke", SmokeConfig::default())?;
    let mut synth: SyntheticConfig = ctx.file.resolve("synthetic", SyntheticConfig::default())?;
    synth.horizon = gail_cfg.horizon;
    let seed = ctx.seed_or(gail_cfg.seed);
    ctx.write_manifest(
        "smoke-test",
        &[("synthetic", seed), ("split", seed), ("training", gail_cfg.seed), ("baseline", base_cfg.seed)],
        &[],
        serde_json::json!({
            "training": gail_cfg,
            "baseline": base_cfg,
            "eval": eval,
            "smoke": smoke,
            "synthetic": synth,
        }),
    )?;

    // Data.
    let experts = synthetic_experts(&synth, seed).map_err(|e| CliError::usage(e.to_string()))?;
    let n_train = (smoke.train_fraction * experts.len() as f64).floor() as usize;
    if n_train == 0 || n_train == experts.len() {
        return Err(CliError::usage("train fraction leaves an empty split"));
    }
    let train = Dataset::new(synth.horizon, Split::Train, seed, experts[..n_train].to_vec())?;
    let test = Dataset::new(synth.horizon, Split::Test, seed, experts[n_train..].to_vec())?;
    write_dataset(&train, &ctx.out.join("train.jsonl"))?;
    write_dataset(&test, &ctx.out.join("test.jsonl"))?;
    // Evaluate on the test split as stored, so every artifact can be recomputed from the files.
    let test = load_dataset(&ctx.out.join("test.jsonl"))?;

    // Models.
    let gail_dir = ctx.out.join("gail");
    let outcome = train_gail(&gail_cfg, &train, Some(&gail_dir)).map_err(training_error)?;
    let baseline_dir = ctx.out.join("baseline");
    let predictor = train_predictor(&base_cfg, &train, Some(&baseline_dir)).map_err(training_error)?;
    let untrained = GailModel::init(&gail_cfg).actor;
    let first = outcome
        .checkpoints
        .first()
        .expect("a run always writes its initial checkpoint");
    let initial = load_policy(&first.join("actor.ckpt"))?;

    // Generation.
    let gail_gen = generate_set(&outcome.model.actor, &test.samples, eval.t0)?;
    let base_gen = generate_set(&predictor.params, &test.samples, eval.t0)?;
    let untrained_gen = generate_set(&untrained, &test.samples, eval.t0)?;
    let initial_gen = generate_set(&initial, &test.samples, eval.t0)?;
    for (name, set) in [
        ("gail", &gail_gen),
        ("baseline", &base_gen),
        ("untrained", &untrained_gen),
        ("initial", &initial_gen),
    ] {
        write_dataset(
            &generated_dataset(&test, set.clone())?,
            &ctx.out.join(format!("generated_{name}.jsonl")),
        )?;
    }
    let images = ctx.out.join("images");
    render_set(&images, "expert", &test.samples, &eval)?;
    render_set(&images, "gail", &gail_gen, &eval)?;
    render_set(&images, "baseline", &base_gen, &eval)?;

    // Curvature.
    let report = curvature_report(
        &ctx.out,
        &[
            ("expert", &test.samples),
            ("gail", &gail_gen),
            ("baseline", &base_gen),
            ("untrained", &untrained_gen),
            ("initial", &initial_gen),
        ],
        &eval,
    )?;
    let gail_hist = eval.histogram(&gail_gen)?;

    // Q-maps from the stored final checkpoints.
    let last = outcome
        .checkpoints
        .last()
        .expect("a run always writes its initial checkpoint");
    let (critic, _) = checkpoint::load(&last.join("critic.ckpt"))?;
    let (disc, _) = checkpoint::load(&last.join("discriminator.ckpt"))?;
    let qdir = ctx.out.join("qmaps");
    create_dir(&qdir)?;
    for (k, sample) in test.samples.iter().take(eval.qmaps).enumerate() {
        export_qmap(&qdir, &format!("qmap_{k:03}"), &critic, &disc, sample, eval.t0, gail_cfg.gamma, &eval)?;
    }

    let d = |name: &str| report.distances[name];
    let smoke_report = SmokeReport {
        distance_gail: d("gail"),
        distance_baseline: d("baseline"),
        distance_untrained: d("untrained"),
        distance_initial: d("initial"),
        improvement: 1.0 - d("gail") / d("untrained"),
        gail_mode_delta10: if eval.delta_max >= 10 { gail_hist.mode(10) } else { gail_hist.mode(eval.delta_max) },
        gail_mean_step: mean_step(&gail_gen, eval.t0),
        expert_mean_step: mean_step(&test.samples, eval.t0),
        train_samples: train.len(),
        test_samples: test.len(),
    };
    write_json(&ctx.out.join("report.json"), &smoke_report)?;
    println!(
        "histogram distance to expert: gail {:.4}, baseline {:.4}, untrained {:.4}, initial {:.4} ({:.1}% lower than untrained)",
        smoke_report.distance_gail,
        smoke_report.distance_baseline,
        smoke_report.distance_untrained,
        smoke_report.distance_initial,
        100.0 * smoke_report.improvement
    );
    Ok(())
}
