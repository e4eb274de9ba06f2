//! Flat `key = value` pipeline configuration.
//!
//! Lines are `key = value`; `#` starts a comment. List values are separated
//! by spaces or commas. Unknown keys are errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::class::Family;
use crate::crf::{Neighborhood, DEFAULT_MAX_SWEEPS};
use crate::error::{Error, Result};
use crate::features::{make_spec, FeatureSpec};
use crate::forest::{SplitKind, TrainConfig};
use crate::render::{Camera, Projection};
use crate::scene::{PoseLibrary, SceneConfig};
use crate::seed::mix_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub scene: SceneConfig,
    /// Pose file replacing the bundled library.
    pub pose_library: Option<PathBuf>,
    pub frame_width: usize,
    pub frame_height: usize,
    pub projection: Projection,
    /// Training noise in meters.
    pub noise_sigma: f64,
    pub feature_count: usize,
    pub patch: (u16, u16),
    pub scaled_offsets: bool,
    /// `seed` is ignored; trees are seeded from [`PipelineConfig::seed`].
    pub train: TrainConfig,
    pub crf_lambda: f64,
    pub crf_neighborhood: Neighborhood,
    pub crf_max_sweeps: usize,
    pub test_frames: usize,
    pub validation_frames: usize,
    /// Noise applied to validation and test frames.
    pub test_noise: f64,
    pub lambda_grid: Vec<f64>,
    pub noise_levels: Vec<f64>,
    pub feature_levels: Vec<usize>,
    pub frame_levels: Vec<usize>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            scene: SceneConfig::default(),
            pose_library: None,
            frame_width: 640,
            frame_height: 480,
            projection: Projection::Orthographic,
            noise_sigma: 0.15,
            feature_count: 300,
            patch: (64, 64),
            scaled_offsets: false,
            train: TrainConfig::default(),
            crf_lambda: 2.0,
            crf_neighborhood: Neighborhood::Four,
            crf_max_sweeps: DEFAULT_MAX_SWEEPS,
            test_frames: 50,
            validation_frames: 20,
            test_noise: 0.15,
            lambda_grid: vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0],
            noise_levels: vec![0.0, 0.05, 0.10, 0.15, 0.30, 0.50, 1.0],
            feature_levels: vec![75, 150, 300, 400, 500, 600],
            frame_levels: vec![40, 200, 400, 1200, 1600, 2400, 4800],
            seed: 1,
        }
    }
}

const STREAM_FEATURES: u64 = 0xfea7;
const STREAM_TREES: u64 = 0x7433;

const MIX_KEYS: [(&str, Family); 5] = [
    ("mix_human", Family::Human),
    ("mix_table", Family::Table),
    ("mix_chair", Family::Chair),
    ("mix_plant", Family::Plant),
    ("mix_storage", Family::Storage),
];

const REL_KEYS: [&str; 5] = ["rel_free", "rel_adjacent", "rel_occlusion", "rel_stacked", "rel_touching"];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_pair<T: std::str::FromStr + Copy>(key: &str, value: &str) -> Result<(T, T)> {
    match parse_list::<T>(key, value)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::Config(format!("{key}: expected two values, got '{value}'"))),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{value}'"))),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

impl PipelineConfig {
    /// Reads a config file on top of the defaults.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        self.validate()
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        self.set(k.trim(), v.trim())?;
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.scene;
        let t = &mut self.train;
        match key {
            "scene_width" => s.extent.0 = parse_num(key, value)?,
            "scene_height" => s.extent.1 = parse_num(key, value)?,
            "camera_height" => s.camera_height = parse_num(key, value)?,
            "theta" => s.interaction.theta = parse_num(key, value)?,
            "beta_min" => s.beta_range.0 = parse_num(key, value)?,
            "beta_max" => s.beta_range.1 = parse_num(key, value)?,
            "max_rejections" => s.max_rejections = parse_num(key, value)?,
            "max_humans" => s.max_humans = parse_num(key, value)?,
            "pose_library" => {
                self.pose_library = if value.is_empty() { None } else { Some(PathBuf::from(value)) }
            }
            "frame_width" => self.frame_width = parse_num(key, value)?,
            "frame_height" => self.frame_height = parse_num(key, value)?,
            "projection" => {
                self.projection = match value {
                    "orthographic" => Projection::Orthographic,
                    "pinhole" => match self.projection {
                        p @ Projection::Pinhole { .. } => p,
                        Projection::Orthographic => Projection::Pinhole { vertical_fov_deg: 43.0 },
                    },
                    _ => return Err(Error::Config(format!("{key}: expected orthographic or pinhole"))),
                }
            }
            "fov_deg" => {
                let fov = parse_num(key, value)?;
                if let Projection::Pinhole { vertical_fov_deg } = &mut self.projection {
                    *vertical_fov_deg = fov;
                } else {
                    self.projection = Projection::Pinhole { vertical_fov_deg: fov };
                }
            }
            "noise_sigma" => self.noise_sigma = parse_num(key, value)?,
            "features" => self.feature_count = parse_num(key, value)?,
            "patch_width" => self.patch.0 = parse_num(key, value)?,
            "patch_height" => self.patch.1 = parse_num(key, value)?,
            "scaled_offsets" => self.scaled_offsets = parse_bool(key, value)?,
            "depth" => t.max_depth = parse_num(key, value)?,
            "trees" => t.tree_count = parse_num(key, value)?,
            "frames_per_tree" => t.frames_per_tree = parse_num(key, value)?,
            "thresholds" => t.thresholds_per_feature = parse_num(key, value)?,
            "response_samples" => t.response_samples = parse_num(key, value)?,
            "min_info_gain" => t.min_info_gain = parse_num(key, value)?,
            "bagging_fraction" => t.bagging_fraction = parse_num(key, value)?,
            "leaf_laplace" => t.leaf_laplace = parse_num(key, value)?,
            "pixels_per_class" => t.pixels_per_class = parse_num(key, value)?,
            "split" => {
                t.split_kind = match value {
                    "linear" => SplitKind::Linear,
                    "axis-aligned" | "axis" => SplitKind::AxisAligned,
                    _ => return Err(Error::Config(format!("{key}: expected linear or axis-aligned"))),
                }
            }
            "crf_lambda" => self.crf_lambda = parse_num(key, value)?,
            "crf_neighborhood" => {
                self.crf_neighborhood = match value {
                    "4" => Neighborhood::Four,
                    "8" => Neighborhood::Eight,
                    _ => return Err(Error::Config(format!("{key}: expected 4 or 8"))),
                }
            }
            "crf_max_sweeps" => self.crf_max_sweeps = parse_num(key, value)?,
            "test_frames" => self.test_frames = parse_num(key, value)?,
            "validation_frames" => self.validation_frames = parse_num(key, value)?,
            "test_noise" => self.test_noise = parse_num(key, value)?,
            "lambda_grid" => self.lambda_grid = parse_list(key, value)?,
            "noise_levels" => self.noise_levels = parse_list(key, value)?,
            "feature_levels" => self.feature_levels = parse_list(key, value)?,
            "frame_levels" => self.frame_levels = parse_list(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            _ => {
                if let Some(&(_, family)) = MIX_KEYS.iter().find(|(k, _)| *k == key) {
                    let (lo, hi) = parse_pair(key, value)?;
                    s.class_mix.set(family, lo, hi);
                } else if let Some(i) = REL_KEYS.iter().position(|k| *k == key) {
                    s.interaction.relationship_weights[i] = parse_num(key, value)?;
                } else {
                    return Err(Error::Config(format!("unknown key '{key}'")));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.train.validate().map_err(|e| Error::Config(e.to_string()))?;
        let checks = [
            (self.frame_width > 0 && self.frame_height > 0, "frame size must be positive"),
            (self.noise_sigma >= 0.0 && self.test_noise >= 0.0, "noise must be non-negative"),
            (self.feature_count > 0, "features must be positive"),
            (self.patch.0 > 0 && self.patch.1 > 0, "patch must be positive"),
            (self.crf_lambda >= 0.0 && self.crf_lambda.is_finite(), "crf_lambda must be non-negative"),
            (self.crf_max_sweeps > 0, "crf_max_sweeps must be positive"),
            (self.lambda_grid.iter().all(|l| *l >= 0.0), "lambda_grid entries must be non-negative"),
            (self.noise_levels.iter().all(|s| *s >= 0.0), "noise_levels entries must be non-negative"),
            (self.feature_levels.iter().all(|&p| p > 0), "feature_levels entries must be positive"),
            (self.frame_levels.iter().all(|&f| f > 0), "frame_levels entries must be positive"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Config(msg.into()));
            }
        }
        if let Projection::Pinhole { vertical_fov_deg } = self.projection {
            if !(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0) {
                return Err(Error::Config("fov_deg must lie in (0, 180)".into()));
            }
        }
        Ok(())
    }

    /// Every key with its effective value, in a stable order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let s = &self.scene;
        let t = &self.train;
        let mut e: Vec<(&'static str, String)> = vec![
            ("scene_width", s.extent.0.to_string()),
            ("scene_height", s.extent.1.to_string()),
            ("camera_height", s.camera_height.to_string()),
            ("theta", s.interaction.theta.to_string()),
        ];
        for (i, k) in REL_KEYS.iter().enumerate() {
            e.push((k, s.interaction.relationship_weights[i].to_string()));
        }
        for (k, family) in MIX_KEYS {
            let (lo, hi) = s.class_mix.range(family);
            e.push((k, format!("{lo} {hi}")));
        }
        e.extend([
            ("beta_min", s.beta_range.0.to_string()),
            ("beta_max", s.beta_range.1.to_string()),
            ("max_rejections", s.max_rejections.to_string()),
            ("max_humans", s.max_humans.to_string()),
            ("pose_library", self.pose_library.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("frame_width", self.frame_width.to_string()),
            ("frame_height", self.frame_height.to_string()),
        ]);
        match self.projection {
            Projection::Orthographic => e.push(("projection", "orthographic".into())),
            Projection::Pinhole { vertical_fov_deg } => {
                e.push(("projection", "pinhole".into()));
                e.push(("fov_deg", vertical_fov_deg.to_string()));
            }
        }
        e.extend([
            ("noise_sigma", self.noise_sigma.to_string()),
            ("features", self.feature_count.to_string()),
            ("patch_width", self.patch.0.to_string()),
            ("patch_height", self.patch.1.to_string()),
            ("scaled_offsets", self.scaled_offsets.to_string()),
            ("depth", t.max_depth.to_string()),
            ("trees", t.tree_count.to_string()),
            ("frames_per_tree", t.frames_per_tree.to_string()),
            ("thresholds", t.thresholds_per_feature.to_string()),
            ("response_samples", t.response_samples.to_string()),
            ("min_info_gain", t.min_info_gain.to_string()),
            ("bagging_fraction", t.bagging_fraction.to_string()),
            ("leaf_laplace", t.leaf_laplace.to_string()),
            ("pixels_per_class", t.pixels_per_class.to_string()),
            ("split", t.split_kind.name().into()),
            ("crf_lambda", self.crf_lambda.to_string()),
            ("crf_neighborhood", self.crf_neighborhood.name().into()),
            ("crf_max_sweeps", self.crf_max_sweeps.to_string()),
            ("test_frames", self.test_frames.to_string()),
            ("validation_frames", self.validation_frames.to_string()),
            ("test_noise", self.test_noise.to_string()),
            ("lambda_grid", join(&self.lambda_grid)),
            ("noise_levels", join(&self.noise_levels)),
            ("feature_levels", join(&self.feature_levels)),
            ("frame_levels", join(&self.frame_levels)),
            ("seed", self.seed.to_string()),
        ]);
        e
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn camera(&self) -> Camera {
        Camera { width: self.frame_width, height: self.frame_height, projection: self.projection }
    }

    pub fn feature_spec(&self) -> Result<FeatureSpec> {
        let mut spec = make_spec(
            self.feature_count,
            self.patch,
            mix_seed(self.seed, STREAM_FEATURES),
            self.scene.camera_height as f32,
        )?;
        spec.scaled_offsets = self.scaled_offsets;
        Ok(spec)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: mix_seed(self.seed, STREAM_TREES), ..self.train.clone() }
    }

    pub fn poses(&self) -> Result<PoseLibrary> {
        match &self.pose_library {
            None => Ok(PoseLibrary::bundled()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                PoseLibrary::parse(&text)
            }
        }
    }
}
