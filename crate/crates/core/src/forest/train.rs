use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Forest, Node, SplitFunction, SplitKind, TrainConfig, TrainingMeta, Tree};
use crate::class::CLASS_COUNT;
use crate::error::{Error, Result};
use crate::features::{sample_training_pixels, FeatureSpec, FeatureVector, PixelProbe};
use crate::render::{DepthFrame, LabelFrame};
use crate::seed::mix_seed;

/// Shannon entropy in nats of a class histogram; 0 for an empty one.
pub fn entropy(histogram: &[u32]) -> f64 {
    let n: u64 = histogram.iter().map(|&c| c as u64).sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    -histogram
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Feature responses stored column-major (one contiguous column per
/// feature) with one class label per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    feature_count: usize,
    columns: Vec<f32>,
    labels: Vec<u8>,
    class_count: usize,
}

impl TrainingSet {
    pub fn from_samples(samples: &[(FeatureVector, u8)], class_count: usize) -> Result<Self> {
        let feature_count = samples.first().map_or(0, |s| s.0.values.len());
        if samples.iter().any(|s| s.0.values.len() != feature_count) {
            return Err(Error::DimensionMismatch("feature vectors differ in length".into()));
        }
        if let Some(bad) = samples.iter().find(|s| s.1 as usize >= class_count) {
            return Err(Error::InvalidParameter(format!("class {} out of range", bad.1)));
        }
        let n = samples.len();
        let mut columns = vec![0.0f32; feature_count * n];
        for (i, (v, _)) in samples.iter().enumerate() {
            for (f, &x) in v.values.iter().enumerate() {
                columns[f * n + i] = x;
            }
        }
        Ok(Self { feature_count, columns, labels: samples.iter().map(|s| s.1).collect(), class_count })
    }

    fn from_frames(
        frames: &[(DepthFrame, LabelFrame)],
        picks: &[(usize, u64)],
        spec: &FeatureSpec,
        quota: usize,
    ) -> Self {
        let mut pixels = Vec::new();
        for &(f, seed) in picks {
            for p in sample_training_pixels(&frames[f].1, quota, seed) {
                pixels.push((f, p));
            }
        }
        let n = pixels.len();
        let fc = spec.len();
        let mut columns = vec![0.0f32; fc * n];
        for (i, (f, p)) in pixels.iter().enumerate() {
            let probe = PixelProbe::new(&frames[*f].0, p.x as usize, p.y as usize, spec);
            for (k, pair) in spec.offsets.iter().enumerate() {
                columns[k * n + i] = probe.response(pair);
            }
        }
        Self {
            feature_count: fc,
            columns,
            labels: pixels.iter().map(|(_, p)| p.class).collect(),
            class_count: CLASS_COUNT,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn label(&self, i: u32) -> u8 {
        self.labels[i as usize]
    }

    #[inline]
    pub fn value(&self, feature: u32, i: u32) -> f32 {
        self.columns[feature as usize * self.labels.len() + i as usize]
    }

    fn histogram(&self, indices: &[u32]) -> Vec<u32> {
        let mut h = vec![0u32; self.class_count];
        for &i in indices {
            h[self.labels[i as usize] as usize] += 1;
        }
        h
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitCandidate {
    pub split: SplitFunction,
    pub gain: f64,
}

fn xlogx(n: u32) -> f64 {
    if n == 0 {
        0.0
    } else {
        let x = n as f64;
        x * x.ln()
    }
}

/// Randomized node optimization. Draws `response_samples` split functions
/// of the configured kind, scores `thresholds_per_feature` evenly spaced
/// thresholds strictly inside each response range, and returns the split
/// with the largest information gain, or `None` when no split reaches
/// `min_info_gain` with two non-empty children.
pub fn best_split(
    set: &TrainingSet,
    indices: &[u32],
    config: &TrainConfig,
    rng: &mut impl Rng,
) -> Option<SplitCandidate> {
    let n = indices.len();
    if n < 2 || set.feature_count == 0 {
        return None;
    }
    let c = set.class_count;
    let parent = set.histogram(indices);
    let present: Vec<usize> = (0..c).filter(|&k| parent[k] > 0).collect();
    if present.len() < 2 {
        return None;
    }
    let parent_entropy = entropy(&parent);
    let k_thr = config.thresholds_per_feature;
    let table: Vec<f64> = (0..=n as u32).map(xlogx).collect();
    let lookup = |x: u32| table[x as usize];

    let mut responses = vec![0.0f32; n];
    let mut bins = vec![0u32; (k_thr + 1) * c];
    let mut bin_totals = vec![0u32; k_thr + 1];
    let mut left = vec![0u32; c];
    let mut best: Option<(f64, SplitFunction)> = None;
    let fc = set.feature_count as u32;

    for _ in 0..config.response_samples {
        let proto = match config.split_kind {
            SplitKind::AxisAligned => SplitFunction::AxisAligned { feature: rng.random_range(0..fc), threshold: 0.0 },
            SplitKind::Linear => {
                let a = rng.random_range(0..fc);
                let b = if fc > 1 {
                    let b = rng.random_range(0..fc - 1);
                    if b >= a { b + 1 } else { b }
                } else {
                    a
                };
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                SplitFunction::Linear {
                    features: [a, b],
                    direction: [angle.cos() as f32, angle.sin() as f32],
                    threshold: 0.0,
                }
            }
        };
        let (mut lo, mut hi) = (f32::INFINITY, f32::NEG_INFINITY);
        for (r, &i) in responses.iter_mut().zip(indices) {
            *r = proto.project(|f| set.value(f, i));
            lo = lo.min(*r);
            hi = hi.max(*r);
        }
        if !(hi > lo) {
            continue;
        }
        let step = (hi - lo) / (k_thr as f32 + 1.0);
        if !(step > 0.0) {
            continue;
        }
        let tau = |k: usize| lo + (k as f32 + 1.0) * step;

        bins.iter_mut().for_each(|b| *b = 0);
        bin_totals.iter_mut().for_each(|b| *b = 0);
        for (&r, &i) in responses.iter().zip(indices) {
            // bin b holds responses in [tau(b-1), tau(b))
            let mut b = (((r - lo) / step).floor().max(0.0) as usize).min(k_thr);
            while b < k_thr && r >= tau(b) {
                b += 1;
            }
            while b > 0 && r < tau(b - 1) {
                b -= 1;
            }
            bins[b * c + set.labels[i as usize] as usize] += 1;
            bin_totals[b] += 1;
        }

        left.iter_mut().for_each(|x| *x = 0);
        let mut n_left = 0u32;
        for k in 0..k_thr {
            if bin_totals[k] == 0 && k > 0 {
                continue;
            }
            n_left += bin_totals[k];
            for &cl in &present {
                left[cl] += bins[k * c + cl];
            }
            if n_left == 0 || n_left as usize == n {
                continue;
            }
            let n_right = n as u32 - n_left;
            let mut s = lookup(n_left) + lookup(n_right);
            for &cl in &present {
                s -= lookup(left[cl]) + lookup(parent[cl] - left[cl]);
            }
            let gain = parent_entropy - s / n as f64;
            if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                let split = match proto {
                    SplitFunction::AxisAligned { feature, .. } => {
                        SplitFunction::AxisAligned { feature, threshold: tau(k) }
                    }
                    SplitFunction::Linear { features, direction, .. } => {
                        SplitFunction::Linear { features, direction, threshold: tau(k) }
                    }
                };
                best = Some((gain, split));
            }
        }
    }
    let (gain, split) = best?;
    let gain = gain.clamp(0.0, parent_entropy);
    (gain >= config.min_info_gain).then_some(SplitCandidate { split, gain })
}

/// Grows one tree on `set`.
pub fn grow_tree(set: &TrainingSet, config: &TrainConfig, rng: &mut impl Rng) -> Tree {
    let c = set.class_count;
    let mut indices: Vec<u32> = (0..set.len() as u32).collect();
    let mut nodes = vec![Node::Leaf { leaf: 0 }];
    let mut posteriors = Vec::new();
    let mut histograms = Vec::new();
    let mut stack = vec![(0usize, 0usize, indices.len(), 0usize)];

    while let Some((node, start, end, depth)) = stack.pop() {
        let slice = &mut indices[start..end];
        let split = if depth < config.max_depth { best_split(set, slice, config, rng) } else { None };
        match split {
            Some(cand) => {
                // in-place partition, left block first
                let mut mid = 0;
                for j in 0..slice.len() {
                    let i = slice[j];
                    if cand.split.goes_left(|f| set.value(f, i)) {
                        slice.swap(mid, j);
                        mid += 1;
                    }
                }
                debug_assert!(mid > 0 && mid < slice.len());
                let left = nodes.len() as u32;
                nodes.push(Node::Leaf { leaf: 0 });
                nodes.push(Node::Leaf { leaf: 0 });
                nodes[node] = Node::Split { split: cand.split, left, right: left + 1 };
                stack.push((left as usize + 1, start + mid, end, depth + 1));
                stack.push((left as usize, start, start + mid, depth + 1));
            }
            None => {
                let hist = set.histogram(slice);
                let total: u32 = hist.iter().sum();
                let denom = total as f64 + config.leaf_laplace * c as f64;
                let leaf = (posteriors.len() / c.max(1)) as u32;
                for &h in &hist {
                    let p = if denom > 0.0 { (h as f64 + config.leaf_laplace) / denom } else { 1.0 / c as f64 };
                    posteriors.push(p as f32);
                }
                histograms.extend_from_slice(&hist);
                nodes[node] = Node::Leaf { leaf };
            }
        }
    }
    Tree { nodes, posteriors, histograms }
}

/// Trains a forest on in-memory frame pairs. Each tree bags
/// `frames_per_tree * bagging_fraction` frames with replacement and draws
/// `pixels_per_class` pixels per class from each.
pub fn train(frames: &[(DepthFrame, LabelFrame)], config: &TrainConfig, spec: &FeatureSpec) -> Result<Forest> {
    config.validate()?;
    if frames.is_empty() {
        return Err(Error::InvalidParameter("training set is empty".into()));
    }
    if spec.is_empty() {
        return Err(Error::InvalidParameter("feature spec has no offsets".into()));
    }
    for (d, l) in frames {
        if (d.width, d.height) != (l.width, l.height) || d.depth.len() != d.width * d.height {
            return Err(Error::DimensionMismatch("depth and label frames differ in size".into()));
        }
    }
    let bag = ((config.frames_per_tree as f64 * config.bagging_fraction).round() as usize).max(1);
    let trees = crate::par::map_indexed(config.tree_count, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, t as u64));
        let picks: Vec<(usize, u64)> =
            (0..bag).map(|_| (rng.random_range(0..frames.len()), rng.random::<u64>())).collect();
        let set = TrainingSet::from_frames(frames, &picks, spec, config.pixels_per_class);
        grow_tree(&set, config, &mut rng)
    });
    Ok(Forest {
        trees,
        spec: spec.clone(),
        class_count: CLASS_COUNT,
        meta: Some(TrainingMeta {
            max_depth: config.max_depth,
            tree_count: config.tree_count,
            feature_count: spec.len(),
            frames_per_tree: config.frames_per_tree,
            thresholds_per_feature: config.thresholds_per_feature,
            response_samples: config.response_samples,
        }),
    })
}

pub fn train_from_manifest(manifest: &Path, config: &TrainConfig, spec: &FeatureSpec) -> Result<Forest> {
    let frames = crate::raster::load_dataset(manifest)?;
    train(&frames, config, spec)
}
