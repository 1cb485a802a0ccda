use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use maip_autodiff::gradcheck::check_params;
use maip_baselines::{model_config, Variant};
use maip_eval::{split_episodes, Lab, MetricTable, RunConfig};
use maip_model::checkpoint;
use maip_model::train::{batch_gradients, draw_eps, sample_loss};
use maip_model::{Model, Predictor};
use maip_sim::{generate_dataset, read_dataset, Episode, ScenarioMix, SimConfig, WorldMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "maip",
    version,
    about = "Intersection simulator and multi-agent trajectory predictor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset of simulated episodes (JSON Lines plus sidecar).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one method on the training split and write a checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "MAIP")]
        method: String,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// RMSE table on the held-out split, as CSV.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Repeatable; learned methods take the next `--model` in order.
        #[arg(long, required = true)]
        method: Vec<String>,
        #[arg(long)]
        model: Vec<PathBuf>,
        #[arg(long)]
        n_samples: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump sampled futures for every vehicle of one frame as JSON.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        episode: u32,
        #[arg(long, default_value_t = 50)]
        frame: usize,
        #[arg(long)]
        n_samples: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw one frame, optionally with sampled futures, as SVG.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        episode: u32,
        #[arg(long, default_value_t = 50)]
        frame: usize,
        #[arg(long)]
        n_samples: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference check of every parameter gradient of a fresh model.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "MAIP")]
        method: String,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run_config(common: &Common) -> anyhow::Result<RunConfig> {
    let mut c = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        c.seed = s;
        c.train.seed = s;
    }
    Ok(c)
}

fn parse_variant(s: &str) -> anyhow::Result<Variant> {
    s.parse::<Variant>().map_err(|e| usage(e.to_string()))
}

fn load_data(path: &Path, run: RunConfig) -> anyhow::Result<(Lab, Vec<Episode>)> {
    let (episodes, meta) =
        read_dataset(path).with_context(|| format!("reading {}", path.display()))?;
    let sim = meta.map(|m| m.config).unwrap_or_default();
    Ok((Lab::new(sim, run)?, episodes))
}

fn history_of<'e>(
    episodes: &'e [Episode],
    ep: u32,
    frame: usize,
    th: usize,
) -> anyhow::Result<&'e [maip_sim::Frame]> {
    let e = episodes
        .iter()
        .find(|e| e.ep == ep)
        .ok_or_else(|| usage(format!("no episode {ep}")))?;
    if frame >= e.frames.len() || frame + 1 < th {
        return Err(usage(format!(
            "frame {frame} needs {th} history frames inside the episode"
        )));
    }
    Ok(&e.frames[frame + 1 - th..=frame])
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate {
            common,
            episodes,
            out,
        } => {
            let run = run_config(&common)?;
            let n = episodes.unwrap_or(run.episodes);
            let sim = SimConfig::default();
            let world = WorldMap::build(&sim)?;
            generate_dataset(
                &world,
                &sim,
                n,
                run.seed,
                &ScenarioMix::default(),
                &out,
                maip_grid::codes::sidecar_tables(),
            )?;
            println!("wrote {n} episodes to {}", out.display());
        }
        Command::Train {
            common,
            data,
            method,
            beta,
            epochs,
            out,
        } => {
            let variant = parse_variant(&method)?;
            let mut run = run_config(&common)?;
            if let Some(b) = beta {
                run.train.beta = b;
            }
            if let Some(e) = epochs {
                run.train.epochs = e;
            }
            if !variant.is_learned() {
                return Err(usage(format!("{variant} has nothing to train")));
            }
            let (lab, episodes) = load_data(&data, run.clone())?;
            let (train_eps, _) = split_episodes(&episodes, run.test_fraction);
            let samples = lab.prepare(&train_eps, run.stride)?;
            let members = if variant == Variant::CnnLstm {
                run.members
            } else {
                1
            };
            let (models, reports) = lab.train_variant(variant, &samples, members, &run.train)?;
            let refs: Vec<&Model> = models.iter().collect();
            let extra = serde_json::json!({ "run": run, "loss": reports.iter().map(|r| &r.loss).collect::<Vec<_>>() });
            checkpoint::save(&out, variant.name(), &refs, lab.grid_spec.resolution, extra)?;
            for (i, r) in reports.iter().enumerate() {
                println!("member {i}: loss per epoch {:?}", r.loss);
            }
            println!("wrote {}", out.display());
        }
        Command::Eval {
            common,
            data,
            method,
            model,
            n_samples,
            out,
        } => {
            let run = run_config(&common)?;
            let variants: Vec<Variant> = method
                .iter()
                .map(|m| parse_variant(m))
                .collect::<anyhow::Result<_>>()?;
            let learned = variants.iter().filter(|v| v.is_learned()).count();
            if learned != model.len() {
                return Err(usage(format!(
                    "{learned} learned method(s) need {learned} --model path(s), got {}",
                    model.len()
                )));
            }
            let (lab, episodes) = load_data(&data, run.clone())?;
            let (_, test_eps) = split_episodes(&episodes, run.test_fraction);
            let samples = lab.prepare(&test_eps, 1)?;
            let n = n_samples.unwrap_or(run.n_samples);
            let mut paths = model.iter();
            let mut table = MetricTable::default();
            for v in variants {
                let models = if v.is_learned() {
                    let path = paths.next().expect("counted above");
                    let (ck, models) = checkpoint::load(path)
                        .with_context(|| format!("loading {}", path.display()))?;
                    if ck.header.variant != v.name() {
                        bail!(
                            "{} holds a {} model, not {v}",
                            path.display(),
                            ck.header.variant
                        );
                    }
                    models
                } else {
                    Vec::new()
                };
                table.extend(lab.evaluate(v, &models, &samples, &test_eps, n, run.seed)?);
            }
            table.save(&out)?;
            println!("{} test samples; wrote {}", samples.len(), out.display());
        }
        Command::Sample {
            common,
            data,
            model,
            episode,
            frame,
            n_samples,
            out,
        } => {
            let run = run_config(&common)?;
            let (lab, episodes) = load_data(&data, run.clone())?;
            let (_, models) = checkpoint::load(&model)?;
            let history = history_of(&episodes, episode, frame, run.history)?;
            let enc = lab.encoder();
            let p = Predictor::new(&models[0], enc.static_grid());
            let pred =
                p.predict_frame(&enc, history, n_samples.unwrap_or(run.n_samples), run.seed)?;
            std::fs::write(&out, serde_json::to_string_pretty(&pred)?)?;
            println!("{} vehicles; wrote {}", pred.vehicles.len(), out.display());
        }
        Command::Render {
            common,
            data,
            model,
            episode,
            frame,
            n_samples,
            out,
        } => {
            let run = run_config(&common)?;
            let (lab, episodes) = load_data(&data, run.clone())?;
            let history = history_of(&episodes, episode, frame, run.history)?;
            let last = history.last().expect("non-empty");
            let preds = match model {
                Some(path) => {
                    let (_, models) = checkpoint::load(&path)?;
                    let enc = lab.encoder();
                    let p = Predictor::new(&models[0], enc.static_grid());
                    p.predict_frame(&enc, history, n_samples.unwrap_or(run.n_samples), run.seed)?
                        .vehicles
                }
                None => BTreeMap::new(),
            };
            maip_eval::render_to_file(&out, &lab.world, last, &preds, lab.dt())?;
            println!("wrote {}", out.display());
        }
        Command::Gradcheck {
            common,
            method,
            step,
            tolerance,
        } => {
            let run = run_config(&common)?;
            let variant = parse_variant(&method)?;
            let lab = Lab::new(SimConfig::default(), run.clone())?;
            let mc = model_config(variant, &lab.base_model_config())
                .ok_or_else(|| usage(format!("{variant} has no parameters")))?;
            let sample = gradcheck_sample(&lab, run.seed, mc.horizon)?;
            let model = Model::init(mc, run.seed)?;
            let x1 = lab.static_input();
            let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
            let eps = draw_eps(&mut rng, model.config.latent_dim);
            let beta = run.train.beta;
            let w = run.train.weights;
            let (_, grads) =
                batch_gradients(&model, &x1, &[&sample], std::slice::from_ref(&eps), beta, w)?;
            let report = check_params(&model.params, &grads, step, tolerance, |p| {
                let m = Model {
                    config: model.config.clone(),
                    params: p.clone(),
                };
                sample_loss(&m, &x1, &sample, &eps, beta, w)
                    .map(|l| l.total)
                    .unwrap_or(f64::NAN)
            });
            println!(
                "checked {} gradients, max relative error {:.3e}, failures {}",
                report.checked,
                report.max_rel_err,
                report.failures.len()
            );
            for f in report.failures.iter().take(10) {
                println!(
                    "  {}[{}]: analytic {:.6e} numeric {:.6e}",
                    f.param, f.index, f.analytic, f.numeric
                );
            }
            if !report.passed() {
                bail!("gradient check failed");
            }
            println!("PASS");
        }
    }
    Ok(())
}

/// A sample from a short seeded simulation: the vehicle with the most
/// occupied cells around it at a mid-episode frame.
fn gradcheck_sample(
    lab: &Lab,
    seed: u64,
    horizon: usize,
) -> anyhow::Result<maip_model::PreparedSample> {
    let eps = maip_sim::generate_episodes(&lab.world, &lab.sim, 1, seed, &ScenarioMix::default())?;
    let samples = lab.prepare(&eps, 1)?;
    let s = samples
        .iter()
        .filter(|s| s.anchor().0 > 1.0)
        .max_by_key(|s| s.x2.entries.len())
        .or(samples.first())
        .context("simulation produced no samples")?;
    Ok(s.truncated(horizon))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("run `maip --help` for usage");
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
