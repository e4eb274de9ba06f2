//! Browser demo: render a synthetic scene, inspect one depth-difference
//! feature, and segment the frame with a small forest and the Potts CRF.

use hoiseg::crf::{solve, CrfProblem};
use hoiseg::eval::{generate_dataset, synth_frame, Condition, Split};
use hoiseg::features::{eval_feature, FeatureSpec};
use hoiseg::forest::{predict, train, Forest, PosteriorVolume};
use hoiseg::scene::PoseLibrary;
use hoiseg::{DepthFrame, LabelFrame, ObjectClass, PipelineConfig, Result, CLASS_COUNT};
use wasm_bindgen::prelude::*;

pub const WIDTH: usize = 160;
pub const HEIGHT: usize = 120;

/// RGB per class id, background last.
pub const PALETTE: [[u8; 3]; CLASS_COUNT] = [
    [230, 25, 75],
    [245, 130, 48],
    [255, 225, 25],
    [210, 245, 60],
    [60, 180, 75],
    [70, 240, 240],
    [0, 130, 200],
    [145, 30, 180],
    [240, 50, 230],
    [170, 110, 40],
    [20, 20, 20],
];

pub fn demo_config() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    for kv in [
        "frame_width=160",
        "frame_height=120",
        "patch_width=24",
        "patch_height=24",
        "features=150",
        "depth=12",
        "trees=3",
        "thresholds=40",
        "response_samples=40",
    ] {
        c.apply_override(kv).expect("demo override");
    }
    c
}

/// Scene, model and posteriors shared by the demo operations.
pub struct Session {
    config: PipelineConfig,
    poses: PoseLibrary,
    spec: FeatureSpec,
    frame: Option<(DepthFrame, LabelFrame)>,
    forest: Option<Forest>,
    posteriors: Option<PosteriorVolume>,
}

pub struct Segmentation {
    pub labels: Vec<u8>,
    /// Fraction of pixels matching the ground truth.
    pub accuracy: f64,
}

impl Session {
    pub fn new() -> Result<Self> {
        let config = demo_config();
        let spec = config.feature_spec()?;
        Ok(Self { config, poses: PoseLibrary::bundled(), spec, frame: None, forest: None, posteriors: None })
    }

    pub fn feature_count(&self) -> usize {
        self.spec.len()
    }

    /// Samples and renders a scene with interaction threshold `theta` and
    /// depth noise `sigma`.
    pub fn render(&mut self, seed: u64, theta: f64, sigma: f64) -> Result<&(DepthFrame, LabelFrame)> {
        let mut c = self.config.clone();
        c.apply_override(&format!("theta={theta}"))?;
        let frame = synth_frame(&c, &self.poses, Condition::Modeled, seed, sigma)?;
        self.posteriors = None;
        Ok(self.frame.insert(frame))
    }

    pub fn frame(&self) -> Option<&(DepthFrame, LabelFrame)> {
        self.frame.as_ref()
    }

    /// Response of feature `k` at every pixel of the current frame.
    pub fn feature_response(&self, k: usize) -> Result<Vec<f32>> {
        let (depth, _) = self.current()?;
        let pair = self
            .spec
            .offsets
            .get(k)
            .ok_or_else(|| hoiseg::Error::InvalidParameter(format!("feature {k} of {}", self.spec.len())))?;
        let mut out = Vec::with_capacity(depth.width * depth.height);
        for y in 0..depth.height {
            for x in 0..depth.width {
                out.push(eval_feature(depth, x, y, pair, &self.spec));
            }
        }
        Ok(out)
    }

    /// Trains a forest on `frames` fresh scenes.
    pub fn train(&mut self, frames: usize) -> Result<()> {
        let mut c = self.config.clone();
        c.apply_override(&format!("frames_per_tree={frames}"))?;
        let data = generate_dataset(&c, &self.poses, Condition::Modeled, Split::Train, frames, c.noise_sigma)?;
        self.forest = Some(train(&data, &c.train_config(), &self.spec)?);
        self.posteriors = None;
        Ok(())
    }

    pub fn is_trained(&self) -> bool {
        self.forest.is_some()
    }

    /// Forest labels refined by the CRF with Potts weight `lambda`; zero
    /// leaves the forest's argmax unchanged.
    pub fn segment(&mut self, lambda: f64) -> Result<Segmentation> {
        let forest = self.forest.as_ref().ok_or_else(|| hoiseg::Error::InvalidParameter("no forest trained".into()))?;
        let (depth, truth) = self.frame.as_ref().ok_or_else(|| hoiseg::Error::InvalidParameter("no frame".into()))?;
        let post = match self.posteriors.take() {
            Some(p) => p,
            None => predict(forest, depth)?,
        };
        let mut labels = post.argmax();
        if lambda > 0.0 {
            let problem = CrfProblem::from_posteriors(&post, lambda, self.config.crf_neighborhood)?;
            labels = solve(&problem, Some(&labels), self.config.crf_max_sweeps)?.labels;
        }
        self.posteriors = Some(post);
        let hits = labels.iter().zip(&truth.labels).filter(|(a, b)| a == b).count();
        Ok(Segmentation { accuracy: hits as f64 / labels.len() as f64, labels })
    }

    fn current(&self) -> Result<&(DepthFrame, LabelFrame)> {
        self.frame.as_ref().ok_or_else(|| hoiseg::Error::InvalidParameter("no frame".into()))
    }
}

/// Depth as gray levels, near is bright.
pub fn depth_rgba(depth: &DepthFrame, far: f32) -> Vec<u8> {
    let mut out = Vec::with_capacity(depth.depth.len() * 4);
    for &d in &depth.depth {
        let v = if d.is_finite() { (255.0 * (1.0 - (d / far).clamp(0.0, 1.0))) as u8 } else { 0 };
        out.extend_from_slice(&[v, v, v, 255]);
    }
    out
}

pub fn labels_rgba(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(labels.len() * 4);
    for &l in labels {
        let [r, g, b] = PALETTE[(l as usize).min(CLASS_COUNT - 1)];
        out.extend_from_slice(&[r, g, b, 255]);
    }
    out
}

/// Diverging map: blue negative, red positive, scaled by the largest
/// magnitude.
pub fn response_rgba(values: &[f32]) -> Vec<u8> {
    let scale = values.iter().fold(0.0f32, |m, v| m.max(v.abs())).max(1e-6);
    let mut out = Vec::with_capacity(values.len() * 4);
    for &v in values {
        let t = (v / scale).clamp(-1.0, 1.0);
        let fade = (255.0 * (1.0 - t.abs())) as u8;
        let px = if t >= 0.0 { [255, fade, fade, 255] } else { [fade, fade, 255, 255] };
        out.extend_from_slice(&px);
    }
    out
}

fn js(e: hoiseg::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    session: Session,
    last_accuracy: f64,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Result<Demo, JsError> {
        Ok(Demo { session: Session::new().map_err(js)?, last_accuracy: 0.0 })
    }

    pub fn width(&self) -> usize {
        WIDTH
    }

    pub fn height(&self) -> usize {
        HEIGHT
    }

    #[wasm_bindgen(js_name = featureCount)]
    pub fn feature_count(&self) -> usize {
        self.session.feature_count()
    }

    /// RGBA depth image of a new scene.
    pub fn render(&mut self, seed: u32, theta: f64, sigma: f64) -> Result<Vec<u8>, JsError> {
        let far = self.session.config.scene.camera_height as f32;
        let (depth, _) = self.session.render(seed as u64, theta, sigma).map_err(js)?;
        Ok(depth_rgba(depth, far))
    }

    /// RGBA ground-truth labels of the current scene.
    pub fn truth(&self) -> Result<Vec<u8>, JsError> {
        let (_, labels) = self.session.current().map_err(js)?;
        Ok(labels_rgba(&labels.labels))
    }

    #[wasm_bindgen(js_name = featureResponse)]
    pub fn feature_response(&self, k: usize) -> Result<Vec<u8>, JsError> {
        Ok(response_rgba(&self.session.feature_response(k).map_err(js)?))
    }

    pub fn train(&mut self, frames: usize) -> Result<(), JsError> {
        self.session.train(frames).map_err(js)
    }

    /// RGBA labels; see [`Demo::accuracy`] for their agreement with the truth.
    pub fn segment(&mut self, lambda: f64) -> Result<Vec<u8>, JsError> {
        let s = self.session.segment(lambda).map_err(js)?;
        self.last_accuracy = s.accuracy;
        Ok(labels_rgba(&s.labels))
    }

    pub fn accuracy(&self) -> f64 {
        self.last_accuracy
    }
}

#[wasm_bindgen(js_name = className)]
pub fn class_name(id: u8) -> String {
    ObjectClass::from_id(id).map(|c| c.name().to_string()).unwrap_or_default()
}
