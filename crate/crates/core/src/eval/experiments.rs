use std::fmt::Write as _;

use super::dataset::{frame_noise_seed, generate_dataset, Condition, Split};
use super::metrics::{report, ConfusionMatrix, MetricsReport};
use crate::class::{ObjectClass, FOREGROUND_COUNT};
use crate::config::PipelineConfig;
use crate::crf::{solve, CrfProblem};
use crate::error::Result;
use crate::forest::{predict, train, Forest, SplitKind};
use crate::render::{add_noise, DepthFrame, LabelFrame, NoiseParams};
use crate::scene::PoseLibrary;

pub type Frames = Vec<(DepthFrame, LabelFrame)>;

/// Text table with a header row, plus `(x, y, series)` points for plotting.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub plot: Vec<(f64, f64, String)>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), ..Self::default() }
    }

    pub fn to_tsv(&self) -> String {
        let mut s = self.header.join("\t");
        s.push('\n');
        for r in &self.rows {
            s += &r.join("\t");
            s.push('\n');
        }
        s
    }

    pub fn plot_tsv(&self) -> String {
        let mut s = String::from("x\ty\tseries\n");
        for (x, y, series) in &self.plot {
            let _ = writeln!(s, "{x}\t{y:.6}\t{series}");
        }
        s
    }
}

/// Argmax labels of every frame scored against the ground truth.
pub fn evaluate_forest(forest: &Forest, frames: &[(DepthFrame, LabelFrame)]) -> Result<ConfusionMatrix> {
    let parts = crate::par::map_indexed(frames.len(), |k| -> Result<ConfusionMatrix> {
        let (depth, truth) = &frames[k];
        let mut cm = ConfusionMatrix::new(forest.class_count);
        cm.accumulate(truth, &predict(forest, depth)?.argmax())?;
        Ok(cm)
    });
    let mut total = ConfusionMatrix::new(forest.class_count);
    for p in parts {
        total.merge(&p?)?;
    }
    Ok(total)
}

/// Forest argmax scores and CRF scores for every Potts weight in `lambdas`,
/// from one forest pass per frame.
pub fn evaluate_with_crf(
    forest: &Forest,
    frames: &[(DepthFrame, LabelFrame)],
    lambdas: &[f64],
    config: &PipelineConfig,
) -> Result<(ConfusionMatrix, Vec<ConfusionMatrix>)> {
    let c = forest.class_count;
    let parts = crate::par::map_indexed(frames.len(), |k| -> Result<(ConfusionMatrix, Vec<ConfusionMatrix>)> {
        let (depth, truth) = &frames[k];
        let post = predict(forest, depth)?;
        let mut base = ConfusionMatrix::new(c);
        let argmax = post.argmax();
        base.accumulate(truth, &argmax)?;
        let mut problem = CrfProblem::from_posteriors(&post, 0.0, config.crf_neighborhood)?;
        let mut per_lambda = Vec::with_capacity(lambdas.len());
        for &l in lambdas {
            problem.potts_weight = l;
            let s = solve(&problem, Some(&argmax), config.crf_max_sweeps)?;
            let mut cm = ConfusionMatrix::new(c);
            cm.accumulate(truth, &s.labels)?;
            per_lambda.push(cm);
        }
        Ok((base, per_lambda))
    });
    let mut base = ConfusionMatrix::new(c);
    let mut per_lambda = vec![ConfusionMatrix::new(c); lambdas.len()];
    for p in parts {
        let (b, l) = p?;
        base.merge(&b)?;
        for (acc, cm) in per_lambda.iter_mut().zip(&l) {
            acc.merge(cm)?;
        }
    }
    Ok((base, per_lambda))
}

/// Re-noises clean frames of `split` exactly as the generator would at `sigma`.
fn with_noise(clean: &Frames, config: &PipelineConfig, split: Split, sigma: f64) -> Frames {
    clean
        .iter()
        .enumerate()
        .map(|(k, (d, l))| {
            let noise = NoiseParams {
                sigma,
                seed: frame_noise_seed(split.scene_seed(config.seed, k)),
                camera_height: config.scene.camera_height,
            };
            (add_noise(d, &noise), l.clone())
        })
        .collect()
}

pub fn test_split(config: &PipelineConfig, poses: &PoseLibrary) -> Result<Frames> {
    generate_dataset(config, poses, Condition::Modeled, Split::Test, config.test_frames, config.test_noise)
}

fn train_on(config: &PipelineConfig, frames: &[(DepthFrame, LabelFrame)]) -> Result<Forest> {
    train(frames, &config.train_config(), &config.feature_spec()?)
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRow {
    pub sigma: f64,
    pub report: MetricsReport,
}

/// One forest per training noise level, all scored on the same test split
/// at `config.test_noise`.
pub fn run_noise_sweep(config: &PipelineConfig, poses: &PoseLibrary, sigmas: &[f64]) -> Result<Vec<NoiseRow>> {
    let test = test_split(config, poses)?;
    let pool = config.train.frames_per_tree;
    let clean = generate_dataset(config, poses, Condition::Modeled, Split::Train, pool, 0.0)?;
    let mut rows = Vec::new();
    for &sigma in sigmas {
        let frames = with_noise(&clean, config, Split::Train, sigma);
        let forest = train_on(config, &frames)?;
        rows.push(NoiseRow { sigma, report: report(&evaluate_forest(&forest, &test)?) });
        log::info!("noise sweep: sigma {sigma} done");
    }
    Ok(rows)
}

pub fn noise_table(rows: &[NoiseRow]) -> Table {
    let mut t = Table::new(&["sigma", "mAR", "mAP", "mean_f1"]);
    for r in rows {
        let m = &r.report;
        t.rows.push(vec![r.sigma.to_string(), fmt(m.mean_recall), fmt(m.mean_precision), fmt(m.mean_f1)]);
        t.plot.push((r.sigma, m.mean_recall, "mAR".into()));
        t.plot.push((r.sigma, m.mean_precision, "mAP".into()));
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitRow {
    pub features: usize,
    pub kind: SplitKind,
    pub report: MetricsReport,
}

/// Linear versus axis-aligned splits for each feature count.
pub fn run_split_comparison(config: &PipelineConfig, poses: &PoseLibrary, counts: &[usize]) -> Result<Vec<SplitRow>> {
    let test = test_split(config, poses)?;
    let pool = config.train.frames_per_tree;
    let frames = generate_dataset(config, poses, Condition::Modeled, Split::Train, pool, config.noise_sigma)?;
    let mut rows = Vec::new();
    for &pc in counts {
        for kind in [SplitKind::Linear, SplitKind::AxisAligned] {
            let mut c = config.clone();
            c.feature_count = pc;
            c.train.split_kind = kind;
            let forest = train_on(&c, &frames)?;
            rows.push(SplitRow { features: pc, kind, report: report(&evaluate_forest(&forest, &test)?) });
            log::info!("split comparison: PC {pc} {} done", kind.name());
        }
    }
    Ok(rows)
}

pub fn split_table(rows: &[SplitRow]) -> Table {
    let mut t = Table::new(&["features", "split", "mAR", "mAP", "mean_f1"]);
    for r in rows {
        let m = &r.report;
        t.rows.push(vec![
            r.features.to_string(),
            r.kind.name().into(),
            fmt(m.mean_recall),
            fmt(m.mean_precision),
            fmt(m.mean_f1),
        ]);
        t.plot.push((r.features as f64, m.mean_recall, r.kind.name().into()));
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelingRow {
    pub frames: usize,
    pub condition: Condition,
    pub report: MetricsReport,
}

/// Forests trained on modeled and on single-object scenes, for each
/// training-set size, scored on the multi-object test split. Each size uses
/// a prefix of the same frame pool.
pub fn run_modeling_comparison(config: &PipelineConfig, poses: &PoseLibrary, sizes: &[usize]) -> Result<Vec<ModelingRow>> {
    let test = test_split(config, poses)?;
    let largest = sizes.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    for condition in [Condition::Modeled, Condition::NonModeled] {
        let pool = generate_dataset(config, poses, condition, Split::Train, largest, config.noise_sigma)?;
        for &f in sizes {
            let mut c = config.clone();
            c.train.frames_per_tree = f;
            let forest = train_on(&c, &pool[..f])?;
            rows.push(ModelingRow { frames: f, condition, report: report(&evaluate_forest(&forest, &test)?) });
            log::info!("modeling comparison: F {f} {} done", condition.name());
        }
    }
    Ok(rows)
}

pub fn modeling_table(rows: &[ModelingRow]) -> Table {
    let mut t = Table::new(&["frames", "condition", "mAR", "mAP", "mean_f1"]);
    for r in rows {
        let m = &r.report;
        t.rows.push(vec![
            r.frames.to_string(),
            r.condition.name().into(),
            fmt(m.mean_recall),
            fmt(m.mean_precision),
            fmt(m.mean_f1),
        ]);
        t.plot.push((r.frames as f64, m.mean_recall, format!("{} mAR", r.condition.name())));
        t.plot.push((r.frames as f64, m.mean_precision, format!("{} mAP", r.condition.name())));
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrfComparison {
    /// `(lambda, mean F1)` on the validation split.
    pub validation: Vec<(f64, f64)>,
    pub lambda: f64,
    pub forest: MetricsReport,
    pub crf: MetricsReport,
}

/// Picks the Potts weight with the best validation mean F1 (ties go to the
/// smaller weight), then scores forest and CRF on the test split.
pub fn run_crf_comparison(config: &PipelineConfig, poses: &PoseLibrary, forest: &Forest) -> Result<CrfComparison> {
    let val = generate_dataset(
        config,
        poses,
        Condition::Modeled,
        Split::Validation,
        config.validation_frames,
        config.test_noise,
    )?;
    let (_, per_lambda) = evaluate_with_crf(forest, &val, &config.lambda_grid, config)?;
    let validation: Vec<(f64, f64)> =
        config.lambda_grid.iter().zip(&per_lambda).map(|(&l, cm)| (l, report(cm).mean_f1)).collect();
    let lambda = validation
        .iter()
        .fold(None::<(f64, f64)>, |best, &(l, f)| match best {
            Some((bl, bf)) if bf > f || (bf == f && bl <= l) => Some((bl, bf)),
            _ => Some((l, f)),
        })
        .map_or(config.crf_lambda, |b| b.0);
    let test = test_split(config, poses)?;
    let (base, crf) = evaluate_with_crf(forest, &test, &[lambda], config)?;
    Ok(CrfComparison { validation, lambda, forest: report(&base), crf: report(&crf[0]) })
}

pub fn crf_table(c: &CrfComparison) -> Table {
    let mut t = Table::new(&["class", "f1_forest", "f1_crf"]);
    for k in 0..FOREGROUND_COUNT {
        let name = ObjectClass::from_id(k as u8).map_or_else(|| k.to_string(), |c| c.name().to_string());
        t.rows.push(vec![name.clone(), fmt(c.forest.f1[k]), fmt(c.crf.f1[k])]);
        t.plot.push((k as f64, c.forest.f1[k], "forest".into()));
        t.plot.push((k as f64, c.crf.f1[k], "crf".into()));
    }
    t.rows.push(vec!["mean".into(), fmt(c.forest.mean_f1), fmt(c.crf.mean_f1)]);
    t.rows.push(vec!["lambda".into(), c.lambda.to_string(), c.lambda.to_string()]);
    t
}
