//! graspkit command-line interface.
//!
//! Thin dispatch over the library: every subcommand parses arguments,
//! merges defaults from an optional `--config file.toml` (command-line
//! flags win, then a `[subcommand]` table, then top-level keys), and calls
//! into the library. Exit codes: 0 success, 1 usage, 2 no graspable
//! region, 3 no stable configuration, 4 I/O or validation failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use graspkit::dataset::{build_vpt, load_dataset, save_dataset, LabelScheme, VPTDataset};
use graspkit::harness::{benchmark_metric, run_comparison, PolicyModels};
use graspkit::learning::{load_model, save_model, train, ReferenceModel, TrainConfig, TrainSet};
use graspkit::pipeline::{plan_bayesian, PipelineError};
use graspkit::raster::GrayImage;
use graspkit::scene::{load_presets, World};
use graspkit::shake::{simulate_shake, CategoryMix, ContactScenario};
use graspkit::tactile::{categorize, grasp_score, MetricParams, TactileImage};

#[derive(Parser)]
#[command(name = "graspkit", version, about = "Tactile grasp-quality metric and grasp planning toolkit")]
struct Cli {
    /// TOML file supplying defaults for any flag; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the tactile image a contact scenario would produce.
    ///
    /// The scenario is one line of `mode,param,base_pressure,noise_std,seed`
    /// with mode one of nocontact|fall|slip (fall: param is the movement
    /// index 1..4; slip: param is the slip magnitude).
    SimulateShake {
        /// Scenario line, e.g. "slip,300,100,0.5,42".
        #[arg(long)]
        scenario: Option<String>,
        /// Overrides the seed field of the scenario line.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the tactile CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a tactile imprint (5x5 CSV) and print score and category.
    Score {
        #[arg(long)]
        tactile: Option<PathBuf>,
    },
    /// Build the self-supervised visual-tactile dataset.
    BuildDataset {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "per-object")]
        per_object: Option<u32>,
        /// Object preset CSV; the built-in presets when omitted.
        #[arg(long)]
        world: Option<PathBuf>,
    },
    /// Train a classifier preset on a dataset directory.
    Train {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// gre | scg | vision
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plan a grasp on a scene image; prints {"u":..,"v":..,"a":..,"p":..}.
    ///
    /// Probabilities at or above 0.5 count as positive in both phases.
    Grasp {
        /// Scene raster (binary PGM, maxval 255).
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Region-estimation model file.
        #[arg(long)]
        gre: Option<PathBuf>,
        /// Stable-configuration model file.
        #[arg(long)]
        scg: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the paired policy comparison and write summary.json + table.csv.
    Evaluate {
        /// Object preset CSV; the built-in presets when omitted.
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Records per object for the in-process training dataset.
        #[arg(long = "per-object")]
        per_object: Option<u32>,
        /// Pre-trained model files; trained in process when omitted.
        #[arg(long)]
        gre: Option<PathBuf>,
        #[arg(long)]
        scg: Option<PathBuf>,
        #[arg(long)]
        vision: Option<PathBuf>,
    },
    /// Correlate the grasp score against the endurance benchmark.
    BenchmarkMetric {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Paired-sample CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Argument errors map to exit code 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(message.into()))
}

/// Config lookup: `[command].key` first, then a top-level `key`.
fn cfg_get<T: serde::de::DeserializeOwned>(
    cfg: &Option<toml::Value>,
    command: &str,
    key: &str,
) -> anyhow::Result<Option<T>> {
    let Some(cfg) = cfg else { return Ok(None) };
    let found = cfg
        .get(command)
        .and_then(|table| table.get(key))
        .or_else(|| cfg.get(key));
    match found {
        None => Ok(None),
        Some(value) => value
            .clone()
            .try_into()
            .map(Some)
            .with_context(|| format!("config key {key:?} for {command}")),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| usage(format!("missing required argument --{flag} (flag or config)")))
}

fn load_world(path: &Option<PathBuf>) -> anyhow::Result<World> {
    match path {
        None => Ok(World::known()),
        Some(path) => {
            let objects = load_presets(path)?;
            Ok(World { objects, ..World::known() })
        }
    }
}

fn load_model_file(path: &Path) -> anyhow::Result<ReferenceModel> {
    Ok(load_model(path)?.0)
}

fn train_preset(dataset: &VPTDataset, scheme: LabelScheme, seed: u64) -> anyhow::Result<ReferenceModel> {
    let set = TrainSet::from_dataset(dataset, scheme)?;
    let config = TrainConfig::preset(scheme, seed);
    Ok(train(&set, None, &config)?.0)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg: Option<toml::Value> = match &cli.config {
        None => None,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let table: toml::Table = text
                .parse()
                .with_context(|| format!("parsing config {}", path.display()))?;
            Some(toml::Value::Table(table))
        }
    };

    match cli.command {
        Command::SimulateShake { scenario, seed, out } => {
            let cmd = "simulate-shake";
            let scenario = scenario.or(cfg_get(&cfg, cmd, "scenario")?);
            let line = required(scenario, "scenario")?;
            let mut scenario = ContactScenario::parse_line(&line, 1)
                .map_err(|e| usage(format!("--scenario: {e}")))?;
            if let Some(seed) = seed.or(cfg_get(&cfg, cmd, "seed")?) {
                scenario.seed = seed;
            }
            let sim = simulate_shake(&scenario);
            if sim.clamped {
                eprintln!("warning: slip transfer exceeded base pressure; image clamped");
            }
            let csv = sim.image.to_csv();
            match out.or(cfg_get(&cfg, cmd, "out")?) {
                Some(path) => std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
        }

        Command::Score { tactile } => {
            let tactile = tactile.or(cfg_get(&cfg, "score", "tactile")?);
            let path = required(tactile, "tactile")?;
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let image = TactileImage::parse_csv(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let score = grasp_score(&image, &MetricParams::default());
            let category = categorize(score);
            println!("{{\"score\":{},\"category\":\"{category}\"}}", score.value());
        }

        Command::BuildDataset { out, seed, per_object, world } => {
            let cmd = "build-dataset";
            let out = required(out.or(cfg_get(&cfg, cmd, "out")?), "out")?;
            let seed = seed.or(cfg_get(&cfg, cmd, "seed")?).unwrap_or(7);
            let per_object = per_object.or(cfg_get(&cfg, cmd, "per-object")?).unwrap_or(300);
            let world = load_world(&world.or(cfg_get(&cfg, cmd, "world")?))?;
            let dataset = build_vpt(&world, per_object, seed)?;
            save_dataset(&dataset, &out)?;
            for warning in &dataset.manifest.warnings {
                eprintln!("warning: {warning}");
            }
            println!(
                "wrote {} records ({} objects x {per_object} grasps, augmented) to {}",
                dataset.manifest.total_records,
                dataset.manifest.objects.len(),
                out.display()
            );
        }

        Command::Train { dataset, preset, out, epochs, batch, lr, seed } => {
            let cmd = "train";
            let dataset_dir = required(dataset.or(cfg_get(&cfg, cmd, "dataset")?), "dataset")?;
            let preset = required(preset.or(cfg_get(&cfg, cmd, "preset")?), "preset")?;
            let out = required(out.or(cfg_get(&cfg, cmd, "out")?), "out")?;
            let scheme = LabelScheme::parse(&preset)
                .ok_or_else(|| usage(format!("unknown preset {preset:?}, expected gre|scg|vision")))?;
            let dataset = load_dataset(&dataset_dir)?;
            let mut config =
                TrainConfig::preset(scheme, seed.or(cfg_get(&cfg, cmd, "seed")?).unwrap_or(7));
            if let Some(epochs) = epochs.or(cfg_get(&cfg, cmd, "epochs")?) {
                config.epochs = epochs;
            }
            if let Some(batch) = batch.or(cfg_get(&cfg, cmd, "batch")?) {
                config.batch_size = batch;
            }
            if let Some(lr) = lr.or(cfg_get(&cfg, cmd, "lr")?) {
                config.learning_rate = lr;
            }
            let set = TrainSet::from_dataset(&dataset, scheme)?;
            let (model, report) = train(&set, None, &config)?;
            if report.single_class_warning {
                eprintln!("warning: training view contains a single label");
            }
            save_model(&model, &config, &dataset, &out)?;
            println!(
                "trained {scheme} preset on {} records: train accuracy {:.4}, mean loss {:.4} -> {:.4}, {:.2}s; model written to {}",
                set.len(),
                report.final_train_accuracy,
                report.epoch_mean_loss.first().unwrap(),
                report.epoch_mean_loss.last().unwrap(),
                report.wall_seconds,
                out.display()
            );
        }

        Command::Grasp { scene, gre, scg, seed } => {
            let cmd = "grasp";
            let scene_path = required(scene.or(cfg_get(&cfg, cmd, "scene")?), "scene")?;
            let gre_path = required(gre.or(cfg_get(&cfg, cmd, "gre")?), "gre")?;
            let scg_path = required(scg.or(cfg_get(&cfg, cmd, "scg")?), "scg")?;
            let seed = seed.or(cfg_get(&cfg, cmd, "seed")?).unwrap_or(7);
            let image = GrayImage::load_pgm(&scene_path)?;
            let gre_model = load_model_file(&gre_path)?;
            let scg_model = load_model_file(&scg_path)?;
            let plan = plan_bayesian(&image, &gre_model, &scg_model, seed)?;
            println!(
                "{{\"u\":{},\"v\":{},\"a\":{},\"p\":{}}}",
                plan.config.u, plan.config.v, plan.config.angle_deg, plan.probability
            );
        }

        Command::Evaluate { world, trials, seed, out, per_object, gre, scg, vision } => {
            let cmd = "evaluate";
            let out = required(out.or(cfg_get(&cfg, cmd, "out")?), "out")?;
            let trials = trials.or(cfg_get(&cfg, cmd, "trials")?).unwrap_or(100);
            let seed = seed.or(cfg_get(&cfg, cmd, "seed")?).unwrap_or(7);
            let per_object = per_object.or(cfg_get(&cfg, cmd, "per-object")?).unwrap_or(300);
            let world = load_world(&world.or(cfg_get(&cfg, cmd, "world")?))?;

            let gre = gre.or(cfg_get(&cfg, cmd, "gre")?);
            let scg = scg.or(cfg_get(&cfg, cmd, "scg")?);
            let vision = vision.or(cfg_get(&cfg, cmd, "vision")?);
            let models = match (&gre, &scg, &vision) {
                (Some(g), Some(s), Some(v)) => PolicyModels {
                    region: load_model_file(g)?,
                    stable: load_model_file(s)?,
                    vision: load_model_file(v)?,
                },
                _ => {
                    eprintln!(
                        "training models in process ({per_object} grasps per object, seed {seed})"
                    );
                    let dataset = build_vpt(&world, per_object, seed)?;
                    PolicyModels {
                        region: train_preset(&dataset, LabelScheme::Gre, seed)?,
                        stable: train_preset(&dataset, LabelScheme::Scg, seed)?,
                        vision: train_preset(&dataset, LabelScheme::VisionBaseline, seed)?,
                    }
                }
            };

            let report = run_comparison(&world, &models, trials, seed)?;
            report.write(&out)?;
            for o in &report.per_object {
                println!(
                    "{:<20} bayesian {:.3} vision {:.3} gain {:+.3}",
                    o.object_id, o.bayesian_rate, o.vision_rate, o.point_gain
                );
            }
            println!(
                "mean bayesian {:.3} vision {:.3} point gain {:+.3}; report in {}",
                report.mean_bayesian_rate,
                report.mean_vision_rate,
                report.mean_point_gain,
                out.display()
            );
        }

        Command::BenchmarkMetric { n, seed, out } => {
            let cmd = "benchmark-metric";
            let n = n.or(cfg_get(&cfg, cmd, "n")?).unwrap_or(500);
            let seed = seed.or(cfg_get(&cfg, cmd, "seed")?).unwrap_or(7);
            let out = out.or(cfg_get(&cfg, cmd, "out")?);
            let world = World::known();
            let bench = benchmark_metric(n, &CategoryMix::default(), seed, &world)?;
            if let Some(path) = out {
                std::fs::write(&path, bench.to_pairs_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if bench.degenerate {
                eprintln!("warning: degenerate sample (all ranks tied), rho reported as 0");
            }
            println!("spearman rho = {} over {n} scenarios (seed {seed})", bench.spearman_rho);
        }
    }
    Ok(())
}

fn exit_code_for(error: &anyhow::Error) -> u8 {
    if error.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    if let Some(pipeline) = error.downcast_ref::<PipelineError>() {
        return pipeline.exit_code() as u8;
    }
    4
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful exits; everything
            // else is a usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
