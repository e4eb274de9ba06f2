//! Trains a forest on the default configuration and times segmentation of a
//! few test frames. Extra arguments are `key=value` config overrides.

use std::time::Instant;

use hoiseg::commands::{segment, PredictOptions};
use hoiseg::eval::{generate_dataset, Condition, Split};
use hoiseg::forest::train;
use hoiseg::scene::PoseLibrary;
use hoiseg::PipelineConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut c = PipelineConfig::default();
    for a in std::env::args().skip(1) {
        c.apply_override(&a)?;
    }
    let poses = PoseLibrary::bundled();
    let frames = generate_dataset(&c, &poses, Condition::Modeled, Split::Train, c.train.frames_per_tree, c.noise_sigma)?;
    let start = Instant::now();
    let forest = train(&frames, &c.train_config(), &c.feature_spec()?)?;
    println!("trained {} trees on {} frames in {:.1?}", forest.trees.len(), frames.len(), start.elapsed());
    let test = generate_dataset(&c, &poses, Condition::Modeled, Split::Test, 3, c.test_noise)?;
    for (depth, _) in &test {
        let (_, _, s) = segment(&c, &forest, depth, &PredictOptions { crf: true, ..Default::default() })?;
        println!("forest {:.0} ms, crf {:.0} ms", s.forest_ms, s.crf_ms.unwrap_or(0.0));
    }
    Ok(())
}
