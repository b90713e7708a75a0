use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mixnet::data::PredictorId;
use mixnet::imageprep::AugmentConfig;
use mixnet::pipeline::{self, BagSelection, Overrides, PrepOptions, RunConfig};
use mixnet::synth::{accuracy_ladder, SynthSpec};

/// Two-layer mixture ensembles over base-predictor probability outputs.
#[derive(Parser)]
#[command(name = "mixnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every random choice; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn run_config(&self) -> Result<RunConfig> {
        let path = self.config.as_ref().context("--config is required")?;
        let overrides = Overrides {
            seed: self.seed,
            out: self.out.clone(),
        };
        Ok(RunConfig::load(path, &overrides)?)
    }

    /// Reads an optional JSON config, returning it with whether it set `seed`.
    fn partial<T: serde::de::DeserializeOwned + Default>(&self) -> Result<(T, bool)> {
        let Some(path) = &self.config else {
            return Ok((T::default(), false));
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let has_seed = value.get("seed").is_some();
        let parsed = serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))?;
        Ok((parsed, has_seed))
    }

    fn out_dir(&self) -> Result<&Path> {
        self.out.as_deref().context("--out is required")
    }
}

#[derive(Subcommand)]
enum Command {
    /// Weighted-voting bag per task, evaluated on the held-out samples.
    Bag {
        #[command(flatten)]
        common: Common,
        /// Bag the first N configured predictors.
        #[arg(long, conflicts_with = "members")]
        top: Option<usize>,
        /// Bag exactly these predictors (comma separated).
        #[arg(long, value_delimiter = ',')]
        members: Option<Vec<String>>,
        /// Also write basic precision for N = 1..all.
        #[arg(long)]
        sweep: bool,
    },
    /// Cross-validate and train one boosted group.
    Boost {
        #[command(flatten)]
        common: Common,
        /// Name of a group in the mixture config.
        #[arg(long)]
        group: String,
    },
    /// Fit and evaluate the two-layer mixture for each configured strategy.
    Mix {
        #[command(flatten)]
        common: Common,
    },
    /// Score base predictors, or a directory of prediction files.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Directory of `<task>.csv` prediction files.
        #[arg(long)]
        pred: Option<PathBuf>,
    },
    /// Label disagreement between prediction directories.
    Diff {
        #[command(flatten)]
        common: Common,
        /// Directory of `<task>.csv` prediction files to compare against.
        #[arg(long)]
        reference: PathBuf,
        /// Prediction directory to compare; repeatable.
        #[arg(long, required = true)]
        candidate: Vec<PathBuf>,
    },
    /// Write a synthetic predictor fixture and a matching run config.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Number of tasks to generate.
        #[arg(long, default_value_t = 8)]
        tasks: usize,
        /// Samples per task.
        #[arg(long)]
        samples: Option<usize>,
        /// Classes per task.
        #[arg(long)]
        classes: Option<usize>,
        /// Number of predictors on an evenly spaced accuracy ladder.
        #[arg(long)]
        predictors: Option<usize>,
        /// Accuracy of the best predictor.
        #[arg(long)]
        best: Option<f64>,
        /// Accuracy of the worst predictor.
        #[arg(long)]
        worst: Option<f64>,
        /// Probability a wrong prediction follows the shared error pattern.
        #[arg(long)]
        correlation: Option<f64>,
    },
    /// Resize and pad images, then write augmented copies.
    Prep {
        #[command(flatten)]
        common: Common,
        /// Directory of .ppm/.pgm images.
        #[arg(long)]
        input: PathBuf,
        /// Output side length.
        #[arg(long, default_value_t = 256)]
        size: usize,
        /// Pad colour as r,g,b.
        #[arg(long, value_delimiter = ',')]
        pad: Option<Vec<u8>>,
        /// Augmented copies per image.
        #[arg(long, default_value_t = 0)]
        augment: usize,
    },
}

fn run(cli: Cli) -> Result<String> {
    Ok(match cli.command {
        Command::Bag {
            common,
            top,
            members,
            sweep,
        } => {
            let selection = match (top, members) {
                (Some(n), _) => BagSelection::Top(n),
                (None, Some(ids)) => BagSelection::Members(ids.into_iter().map(PredictorId::new).collect()),
                (None, None) => BagSelection::Configured,
            };
            pipeline::cmd_bag(&common.run_config()?, &selection, sweep)?
        }
        Command::Boost { common, group } => pipeline::cmd_boost(&common.run_config()?, &group)?,
        Command::Mix { common } => pipeline::cmd_mix(&common.run_config()?)?,
        Command::Eval { common, pred } => pipeline::cmd_eval(&common.run_config()?, pred.as_deref())?,
        Command::Diff {
            common,
            reference,
            candidate,
        } => {
            let out = match (&common.out, &common.config) {
                (Some(out), _) => out.clone(),
                (None, Some(_)) => common.run_config()?.output_dir,
                (None, None) => bail!("diff needs --out or --config"),
            };
            pipeline::cmd_diff(&reference, &candidate, &out)?
        }
        Command::Synth {
            common,
            tasks,
            samples,
            classes,
            predictors,
            best,
            worst,
            correlation,
        } => {
            let (mut spec, has_seed) = common.partial::<SynthSpec>()?;
            match common.seed {
                Some(seed) => spec.seed = seed,
                None if !has_seed => bail!("synth needs a seed: pass --seed or set it in --config"),
                None => {}
            }
            spec.n_samples = samples.unwrap_or(spec.n_samples);
            spec.class_count = classes.unwrap_or(spec.class_count);
            spec.correlation = correlation.unwrap_or(spec.correlation);
            if predictors.is_some() || best.is_some() || worst.is_some() {
                let acc = &spec.predictor_accuracies;
                let count = predictors.unwrap_or(acc.len());
                let hi = best.or(acc.first().copied()).unwrap_or(0.92);
                let lo = worst.or(acc.last().copied()).unwrap_or(0.86);
                spec.predictor_accuracies = accuracy_ladder(hi, lo, count);
            }
            pipeline::cmd_synth(&spec, tasks, common.out_dir()?)?
        }
        Command::Prep {
            common,
            input,
            size,
            pad,
            augment,
        } => {
            let (mut config, has_seed) = common.partial::<AugmentConfig>()?;
            match common.seed {
                Some(seed) => config.seed = seed,
                None if !has_seed => bail!("prep needs a seed: pass --seed or set it in --config"),
                None => {}
            }
            if let Some(p) = pad {
                let Ok(rgb) = <[u8; 3]>::try_from(p.as_slice()) else {
                    bail!("--pad takes three values r,g,b");
                };
                config.pad_rgb = rgb;
            }
            let opts = PrepOptions {
                size,
                augment_count: augment,
                augment: config,
            };
            pipeline::cmd_prep(&input, &opts, common.out_dir()?)?
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
