use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hoiseg::commands::{self, PredictOptions, SynthOptions, EXPERIMENTS};
use hoiseg::eval::{Condition, Split};
use hoiseg::{Error, PipelineConfig};

#[derive(Parser)]
#[command(name = "hoiseg", version, about = "Synthetic depth segmentation: synthesize, train, predict, evaluate")]
struct Cli {
    /// Flat key = value config file applied over the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set trees=3. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Modeled,
    NonModeled,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Validation,
    Test,
}

#[derive(Args)]
struct CrfArgs {
    /// Refine the forest output with the Potts CRF.
    #[arg(long)]
    crf: bool,
    /// Potts weight; defaults to crf_lambda from the config.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Render labeled depth frames and write a manifest.
    Synth {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "modeled")]
        condition: ConditionArg,
        #[arg(long, value_enum, default_value = "train")]
        split: SplitArg,
        /// Depth noise in meters; defaults to noise_sigma from the config.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Train a forest on a manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Segment one depth raster.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        depth: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        crf: CrfArgs,
        /// Print per-stage milliseconds.
        #[arg(long)]
        timings: bool,
        /// Write per-pixel posteriors as tab-separated rows.
        #[arg(long)]
        posteriors: Option<PathBuf>,
    },
    /// Score a model on a labeled manifest.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        crf: CrfArgs,
    },
    /// Run an ablation experiment: noise, split, modeling or crf.
    Experiment {
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write (x, y, series) rows for plotting.
        #[arg(long)]
        emit_plot_data: bool,
    },
    /// Print the effective configuration.
    Config,
}

fn load_config(cli: &Cli) -> hoiseg::Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    for o in &cli.overrides {
        config.apply_override(o)?;
    }
    Ok(config)
}

fn run(cli: Cli) -> hoiseg::Result<()> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Synth { count, out, condition, split, noise } => {
            let opts = SynthOptions {
                count,
                condition: match condition {
                    ConditionArg::Modeled => Condition::Modeled,
                    ConditionArg::NonModeled => Condition::NonModeled,
                },
                split: match split {
                    SplitArg::Train => Split::Train,
                    SplitArg::Validation => Split::Validation,
                    SplitArg::Test => Split::Test,
                },
                noise_sigma: noise,
            };
            let manifest = commands::cmd_synth(&config, &opts, &out)?;
            println!("wrote {count} frames, manifest {}", manifest.display());
        }
        Command::Train { manifest, model } => {
            let s = commands::cmd_train(&config, &manifest, &model)?;
            println!("trained on {} frames in {:.1} s", s.frames, s.seconds);
            for (i, t) in s.trees.iter().enumerate() {
                println!("tree {i}: nodes {} leaves {} max_depth {}", t.nodes, t.leaves, t.max_depth);
            }
            println!("model {}", model.display());
        }
        Command::Predict { model, depth, out, crf, timings, posteriors } => {
            let opts = PredictOptions { crf: crf.crf, lambda: crf.lambda, posterior_out: posteriors };
            let s = commands::cmd_predict(&config, &model, &depth, &out, &opts)?;
            if timings {
                println!("forest_ms\t{:.2}", s.forest_ms);
                if let Some(ms) = s.crf_ms {
                    println!("crf_ms\t{ms:.2}");
                }
            }
            if let Some(e) = s.crf_energy {
                println!("crf energy {e:.4}, {} pixels relabeled", s.crf_changed);
            }
        }
        Command::Eval { model, manifest, out, crf } => {
            let opts = PredictOptions { crf: crf.crf, lambda: crf.lambda, posterior_out: None };
            let r = commands::cmd_eval(&config, &model, &manifest, &opts, &out)?;
            println!("mAR\t{:.4}\nmAP\t{:.4}\nmean_f1\t{:.4}", r.mean_recall, r.mean_precision, r.mean_f1);
        }
        Command::Experiment { name, out, emit_plot_data } => {
            let table = commands::cmd_experiment(&config, &name, &out, emit_plot_data)?;
            print!("{}", table.to_tsv());
        }
        Command::Config => print!("{}", config.dump()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.verbose {
        env_logger::Builder::new().filter_level(log::LevelFilter::Info).init();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Config(_) | Error::UnknownExperiment(_))) => {
            eprintln!("error: {e}");
            if matches!(e, Error::UnknownExperiment(_)) {
                eprintln!("valid experiments: {}", EXPERIMENTS.join(", "));
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
