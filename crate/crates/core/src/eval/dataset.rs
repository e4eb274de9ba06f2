use crate::config::PipelineConfig;
use crate::error::Result;
use crate::render::{add_noise, render, DepthFrame, LabelFrame, NoiseParams};
use crate::scene::{sample_scene, sample_single_object_scene, PoseLibrary, SceneGraph};
use crate::seed::mix_seed;

/// Training-data generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    /// Multi-object scenes from the interaction model.
    Modeled,
    /// One free-standing object per scene.
    NonModeled,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Modeled => "modeled",
            Condition::NonModeled => "non-modeled",
        }
    }
}

/// Disjoint scene-seed ranges per split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Validation,
    Test,
}

const SPLIT_STRIDE: u64 = 1 << 40;
const NOISE_STREAM: u64 = 0x6e6f;

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    /// Scene seed of frame `index`; ranges of different splits never overlap
    /// for fewer than 2^40 frames.
    pub fn scene_seed(self, base: u64, index: usize) -> u64 {
        let offset = match self {
            Split::Train => 0,
            Split::Validation => SPLIT_STRIDE,
            Split::Test => 2 * SPLIT_STRIDE,
        };
        base.wrapping_add(offset).wrapping_add(index as u64)
    }
}

pub fn frame_noise_seed(scene_seed: u64) -> u64 {
    mix_seed(scene_seed, NOISE_STREAM)
}

pub fn synth_scene(config: &PipelineConfig, poses: &PoseLibrary, condition: Condition, seed: u64) -> Result<SceneGraph> {
    match condition {
        Condition::Modeled => sample_scene(&config.scene, poses, seed),
        Condition::NonModeled => sample_single_object_scene(&config.scene, poses, seed),
    }
}

/// Renders one frame with noise `sigma`.
pub fn synth_frame(
    config: &PipelineConfig,
    poses: &PoseLibrary,
    condition: Condition,
    seed: u64,
    sigma: f64,
) -> Result<(DepthFrame, LabelFrame)> {
    let scene = synth_scene(config, poses, condition, seed)?;
    let (depth, labels) = render(&scene, &config.camera())?;
    let noise = NoiseParams { sigma, seed: frame_noise_seed(seed), camera_height: config.scene.camera_height };
    Ok((add_noise(&depth, &noise), labels))
}

/// Frames `0..count` of a split.
pub fn generate_dataset(
    config: &PipelineConfig,
    poses: &PoseLibrary,
    condition: Condition,
    split: Split,
    count: usize,
    sigma: f64,
) -> Result<Vec<(DepthFrame, LabelFrame)>> {
    crate::par::map_indexed(count, |k| {
        synth_frame(config, poses, condition, split.scene_seed(config.seed, k), sigma)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PipelineConfig {
        PipelineConfig { frame_width: 40, frame_height: 30, ..PipelineConfig::default() }
    }

    #[test]
    fn splits_do_not_share_scenes() {
        let seeds: Vec<u64> = [Split::Train, Split::Validation, Split::Test]
            .iter()
            .flat_map(|s| (0..1000).map(move |k| s.scene_seed(7, k)))
            .collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len());
    }

    #[test]
    fn generation_is_deterministic() {
        let c = small();
        let poses = PoseLibrary::bundled();
        let a = generate_dataset(&c, &poses, Condition::Modeled, Split::Test, 3, 0.1).unwrap();
        let b = generate_dataset(&c, &poses, Condition::Modeled, Split::Test, 3, 0.1).unwrap();
        assert_eq!(a, b);
        let clean = generate_dataset(&c, &poses, Condition::Modeled, Split::Test, 3, 0.0).unwrap();
        assert_eq!(a[0].1, clean[0].1);
        assert_ne!(a[0].0, clean[0].0);
    }

    #[test]
    fn non_modeled_frames_hold_one_object() {
        let c = small();
        let poses = PoseLibrary::bundled();
        for k in 0..10 {
            let s = synth_scene(&c, &poses, Condition::NonModeled, k).unwrap();
            assert_eq!(s.instances.len(), 1);
        }
    }
}
