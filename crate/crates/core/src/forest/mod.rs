//! Random decision forest for per-pixel classification.

mod model;
mod predict;
mod train;

pub use model::{decode_forest, encode_forest, read_forest, write_forest, MODEL_MAGIC};
pub use predict::{predict, PosteriorVolume};
pub use train::{
    best_split, entropy, grow_tree, train, train_from_manifest, SplitCandidate, TrainingSet,
};

use crate::features::FeatureSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitKind {
    AxisAligned,
    Linear,
}

impl SplitKind {
    pub fn name(self) -> &'static str {
        match self {
            SplitKind::AxisAligned => "axis-aligned",
            SplitKind::Linear => "linear",
        }
    }
}

/// Node test. Samples go left when the (projected) response is below the
/// threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitFunction {
    AxisAligned { feature: u32, threshold: f32 },
    /// `direction` has unit norm.
    Linear { features: [u32; 2], direction: [f32; 2], threshold: f32 },
}

impl SplitFunction {
    pub fn kind(&self) -> SplitKind {
        match self {
            SplitFunction::AxisAligned { .. } => SplitKind::AxisAligned,
            SplitFunction::Linear { .. } => SplitKind::Linear,
        }
    }

    pub fn threshold(&self) -> f32 {
        match *self {
            SplitFunction::AxisAligned { threshold, .. } | SplitFunction::Linear { threshold, .. } => threshold,
        }
    }

    /// Projected response given a feature lookup.
    #[inline]
    pub fn project(&self, mut value: impl FnMut(u32) -> f32) -> f32 {
        match *self {
            SplitFunction::AxisAligned { feature, .. } => value(feature),
            SplitFunction::Linear { features, direction, .. } => {
                direction[0] * value(features[0]) + direction[1] * value(features[1])
            }
        }
    }

    #[inline]
    pub fn goes_left(&self, value: impl FnMut(u32) -> f32) -> bool {
        self.project(value) < self.threshold()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node {
    Split { split: SplitFunction, left: u32, right: u32 },
    /// Index into the tree's leaf tables.
    Leaf { leaf: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
    /// `leaf_count x class_count` posteriors.
    pub posteriors: Vec<f32>,
    /// Training class counts per leaf, same layout as `posteriors`. Empty
    /// for trees loaded from a model file.
    pub histograms: Vec<u32>,
}

impl Tree {
    pub fn leaf_count(&self, class_count: usize) -> usize {
        self.posteriors.len() / class_count.max(1)
    }

    pub fn posterior(&self, leaf: u32, class_count: usize) -> &[f32] {
        let s = leaf as usize * class_count;
        &self.posteriors[s..s + class_count]
    }

    /// Depth of the deepest node; the root has depth 0.
    pub fn max_depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0u32, 0usize)];
        while let Some((n, d)) = stack.pop() {
            best = best.max(d);
            if let Node::Split { left, right, .. } = self.nodes[n as usize] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub max_depth: usize,
    pub tree_count: usize,
    pub frames_per_tree: usize,
    pub thresholds_per_feature: usize,
    /// Candidate split functions drawn per node.
    pub response_samples: usize,
    pub min_info_gain: f64,
    /// Bag size as a fraction of `frames_per_tree`, drawn with replacement.
    pub bagging_fraction: f64,
    pub leaf_laplace: f64,
    pub split_kind: SplitKind,
    /// Training pixels drawn per class per bagged frame.
    pub pixels_per_class: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_depth: 19,
            tree_count: 5,
            frames_per_tree: 1600,
            thresholds_per_feature: 100,
            response_samples: 100,
            min_info_gain: 1e-4,
            bagging_fraction: 1.0,
            leaf_laplace: 1.0,
            split_kind: SplitKind::Linear,
            pixels_per_class: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let positive = [
            ("max_depth", self.max_depth),
            ("tree_count", self.tree_count),
            ("frames_per_tree", self.frames_per_tree),
            ("thresholds_per_feature", self.thresholds_per_feature),
            ("response_samples", self.response_samples),
            ("pixels_per_class", self.pixels_per_class),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(crate::Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.bagging_fraction > 0.0) {
            return Err(crate::Error::InvalidParameter("bagging_fraction must be positive".into()));
        }
        if !(self.leaf_laplace >= 0.0) || !(self.min_info_gain >= 0.0) {
            return Err(crate::Error::InvalidParameter("leaf_laplace and min_info_gain must be non-negative".into()));
        }
        Ok(())
    }
}

/// Hyperparameters a forest was trained with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingMeta {
    pub max_depth: usize,
    pub tree_count: usize,
    pub feature_count: usize,
    pub frames_per_tree: usize,
    pub thresholds_per_feature: usize,
    pub response_samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub spec: FeatureSpec,
    pub class_count: usize,
    /// `None` for forests loaded from disk.
    pub meta: Option<TrainingMeta>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeStats {
    pub nodes: usize,
    pub leaves: usize,
    pub max_depth: usize,
}

impl Forest {
    pub fn tree_stats(&self) -> Vec<TreeStats> {
        self.trees
            .iter()
            .map(|t| TreeStats {
                nodes: t.nodes.len(),
                leaves: t.leaf_count(self.class_count),
                max_depth: t.max_depth(),
            })
            .collect()
    }
}
