//! Entry points behind the command-line subcommands.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::PipelineConfig;
use crate::crf::{solve, CrfProblem};
use crate::error::{Error, Result};
use crate::eval::{self, Condition, ConfusionMatrix, MetricsReport, Split, Table};
use crate::forest::{self, Forest, PosteriorVolume, TreeStats};
use crate::raster::{self, ManifestEntry};
use crate::render::{DepthFrame, LabelFrame};

pub const EXPERIMENTS: [&str; 4] = ["noise", "split", "modeling", "crf"];

/// Name of the effective-config echo written next to every output.
pub const CONFIG_ECHO: &str = "config.txt";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn echo_config(config: &PipelineConfig, dir: &Path) -> Result<()> {
    write_text(&dir.join(CONFIG_ECHO), &config.dump())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthOptions {
    pub count: usize,
    pub condition: Condition,
    pub split: Split,
    /// Defaults to the config's training noise.
    pub noise_sigma: Option<f64>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { count: 0, condition: Condition::Modeled, split: Split::Train, noise_sigma: None }
    }
}

/// Writes `count` frame pairs under `out_dir/frames` plus `manifest.txt`,
/// and returns the manifest path.
pub fn cmd_synth(config: &PipelineConfig, opts: &SynthOptions, out_dir: &Path) -> Result<PathBuf> {
    let frames_dir = out_dir.join("frames");
    create_dir(&frames_dir)?;
    let poses = config.poses()?;
    let sigma = opts.noise_sigma.unwrap_or(config.noise_sigma);
    let results = crate::par::map_indexed(opts.count, |k| -> Result<ManifestEntry> {
        let seed = opts.split.scene_seed(config.seed, k);
        let (depth, labels) = eval::synth_frame(config, &poses, opts.condition, seed, sigma)?;
        let entry = ManifestEntry {
            depth: PathBuf::from(format!("frames/{k:06}.dpth")),
            labels: PathBuf::from(format!("frames/{k:06}.lbls")),
        };
        raster::write_depth(&out_dir.join(&entry.depth), &depth)?;
        raster::write_labels(&out_dir.join(&entry.labels), &labels)?;
        Ok(entry)
    });
    let entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    let manifest = out_dir.join("manifest.txt");
    let comment = format!(
        "split={} condition={} noise_sigma={sigma} scene_seeds={}..{}",
        opts.split.name(),
        opts.condition.name(),
        opts.split.scene_seed(config.seed, 0),
        opts.split.scene_seed(config.seed, opts.count),
    );
    raster::write_manifest(&manifest, &entries, Some(&comment))?;
    echo_config(config, out_dir)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub frames: usize,
    pub trees: Vec<TreeStats>,
    pub seconds: f64,
}

/// Trains on a manifest and writes an `RDF1` model; the effective config is
/// echoed to `<model>.conf`.
pub fn cmd_train(config: &PipelineConfig, manifest: &Path, model_out: &Path) -> Result<TrainSummary> {
    let frames = raster::load_dataset(manifest)?;
    if frames.is_empty() {
        return Err(Error::InvalidParameter(format!("{} lists no frames", manifest.display())));
    }
    let start = Instant::now();
    let forest = forest::train(&frames, &config.train_config(), &config.feature_spec()?)?;
    let seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = model_out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    forest::write_forest(model_out, &forest)?;
    write_text(&model_out.with_extension("conf"), &config.dump())?;
    Ok(TrainSummary { frames: frames.len(), trees: forest.tree_stats(), seconds })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PredictOptions {
    pub crf: bool,
    /// Overrides the config's Potts weight.
    pub lambda: Option<f64>,
    pub posterior_out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictSummary {
    pub forest_ms: f64,
    pub crf_ms: Option<f64>,
    pub crf_energy: Option<f64>,
    /// Pixels whose label the CRF changed.
    pub crf_changed: usize,
}

/// Forest inference, optionally followed by CRF refinement.
pub fn segment(
    config: &PipelineConfig,
    forest: &Forest,
    frame: &DepthFrame,
    opts: &PredictOptions,
) -> Result<(Vec<u8>, PosteriorVolume, PredictSummary)> {
    let (pw, ph) = forest.spec.patch;
    if frame.width < pw as usize || frame.height < ph as usize {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} frame is smaller than the model's {pw}x{ph} feature patch",
            frame.width, frame.height
        )));
    }
    let start = Instant::now();
    let post = forest::predict(forest, frame)?;
    let mut labels = post.argmax();
    let forest_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut summary = PredictSummary { forest_ms, crf_ms: None, crf_energy: None, crf_changed: 0 };
    if opts.crf {
        let start = Instant::now();
        let lambda = opts.lambda.unwrap_or(config.crf_lambda);
        let problem = CrfProblem::from_posteriors(&post, lambda, config.crf_neighborhood)?;
        let s = solve(&problem, Some(&labels), config.crf_max_sweeps)?;
        summary.crf_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        summary.crf_energy = Some(s.energy);
        summary.crf_changed = s.labels.iter().zip(&labels).filter(|(a, b)| a != b).count();
        labels = s.labels;
    }
    Ok((labels, post, summary))
}

/// Tab-separated `x y p0 .. pC-1` rows, one per pixel.
pub fn write_posteriors(path: &Path, post: &PosteriorVolume) -> Result<()> {
    let mut out = Vec::with_capacity(post.width * post.height * (post.classes * 9 + 10));
    let header: Vec<String> = (0..post.classes).map(|c| format!("p{c}")).collect();
    writeln!(out, "x\ty\t{}", header.join("\t")).unwrap();
    for y in 0..post.height {
        for x in 0..post.width {
            write!(out, "{x}\t{y}").unwrap();
            for p in post.pixel(y * post.width + x) {
                write!(out, "\t{p:.7}").unwrap();
            }
            out.push(b'\n');
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn cmd_predict(
    config: &PipelineConfig,
    model: &Path,
    depth_path: &Path,
    out_path: &Path,
    opts: &PredictOptions,
) -> Result<PredictSummary> {
    let forest = forest::read_forest(model)?;
    let frame = raster::read_depth(depth_path)?;
    let (labels, post, summary) = segment(config, &forest, &frame, opts)?;
    raster::write_labels(out_path, &LabelFrame { width: frame.width, height: frame.height, labels })?;
    if let Some(p) = &opts.posterior_out {
        write_posteriors(p, &post)?;
    }
    Ok(summary)
}

fn confusion_tsv(cm: &ConfusionMatrix) -> String {
    let c = cm.classes();
    let mut s = String::from("truth\\pred");
    for k in 0..c {
        s += &format!("\t{k}");
    }
    s.push('\n');
    for t in 0..c {
        s += &t.to_string();
        for p in 0..c {
            s += &format!("\t{}", cm.get(t, p));
        }
        s.push('\n');
    }
    s
}

/// Scores a model on a labeled manifest and writes `report.tsv` and
/// `confusion.tsv` under `out_dir`.
pub fn cmd_eval(
    config: &PipelineConfig,
    model: &Path,
    manifest: &Path,
    opts: &PredictOptions,
    out_dir: &Path,
) -> Result<MetricsReport> {
    let forest = forest::read_forest(model)?;
    let frames = raster::load_dataset(manifest)?;
    let cm = if opts.crf {
        let lambda = opts.lambda.unwrap_or(config.crf_lambda);
        eval::evaluate_with_crf(&forest, &frames, &[lambda], config)?.1.remove(0)
    } else {
        eval::evaluate_forest(&forest, &frames)?
    };
    let report = eval::report(&cm);
    create_dir(out_dir)?;
    write_text(&out_dir.join("report.tsv"), &report.to_tsv())?;
    write_text(&out_dir.join("confusion.tsv"), &confusion_tsv(&cm))?;
    echo_config(config, out_dir)?;
    Ok(report)
}

/// Scores precomputed label frames against ground truth.
pub fn score_labels(truth: &[LabelFrame], pred: &[LabelFrame]) -> Result<MetricsReport> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch(format!("{} truth frames, {} predictions", truth.len(), pred.len())));
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in truth.iter().zip(pred) {
        cm.accumulate(t, &p.labels)?;
    }
    Ok(eval::report(&cm))
}

/// Runs a named experiment and writes `<name>.tsv` (and `<name>.plot.tsv`
/// when `emit_plot_data` is set) under `out_dir`.
pub fn cmd_experiment(config: &PipelineConfig, name: &str, out_dir: &Path, emit_plot_data: bool) -> Result<Table> {
    if !EXPERIMENTS.contains(&name) {
        return Err(Error::UnknownExperiment(name.to_string()));
    }
    let poses = config.poses()?;
    let table = match name {
        "noise" => eval::noise_table(&eval::run_noise_sweep(config, &poses, &config.noise_levels)?),
        "split" => eval::split_table(&eval::run_split_comparison(config, &poses, &config.feature_levels)?),
        "modeling" => eval::modeling_table(&eval::run_modeling_comparison(config, &poses, &config.frame_levels)?),
        _ => {
            let frames = eval::generate_dataset(
                config,
                &poses,
                Condition::Modeled,
                Split::Train,
                config.train.frames_per_tree,
                config.noise_sigma,
            )?;
            let forest = forest::train(&frames, &config.train_config(), &config.feature_spec()?)?;
            eval::crf_table(&eval::run_crf_comparison(config, &poses, &forest)?)
        }
    };
    create_dir(out_dir)?;
    write_text(&out_dir.join(format!("{name}.tsv")), &table.to_tsv())?;
    if emit_plot_data {
        write_text(&out_dir.join(format!("{name}.plot.tsv")), &table.plot_tsv())?;
    }
    echo_config(config, out_dir)?;
    Ok(table)
}
