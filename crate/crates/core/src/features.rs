//! Depth-difference features over randomized offset pairs.
//!
//! The response of pair `(u, v)` at pixel `s` is `d(s + u) - d(s + v)`.
//! Reads outside the frame (and NaN pixels) return the sentinel depth, which
//! is the camera height, so they look like floor.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::class::CLASS_COUNT;
use crate::error::{Error, Result};
use crate::render::{DepthFrame, LabelFrame};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Offset {
    pub dx: i16,
    pub dy: i16,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OffsetPair {
    pub u: Offset,
    pub v: Offset,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSpec {
    pub offsets: Vec<OffsetPair>,
    /// Patch width and height in pixels.
    pub patch: (u16, u16),
    pub seed: u64,
    /// Depth returned for reads outside the frame.
    pub sentinel: f32,
    /// Scale offsets by `sentinel / d(s)` instead of using them verbatim.
    pub scaled_offsets: bool,
}

impl FeatureSpec {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// `count` offset pairs drawn uniformly over the patch rectangle
/// `[-w/2, w/2] x [-h/2, h/2]`.
pub fn make_spec(count: usize, patch: (u16, u16), seed: u64, sentinel: f32) -> Result<FeatureSpec> {
    if count == 0 {
        return Err(Error::InvalidParameter("feature count must be at least 1".into()));
    }
    if patch.0 == 0 || patch.1 == 0 {
        return Err(Error::InvalidParameter("feature patch must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (hw, hh) = ((patch.0 / 2) as i16, (patch.1 / 2) as i16);
    let offset = |rng: &mut ChaCha8Rng| Offset {
        dx: rng.random_range(-hw..=hw),
        dy: rng.random_range(-hh..=hh),
    };
    let offsets = (0..count).map(|_| OffsetPair { u: offset(&mut rng), v: offset(&mut rng) }).collect();
    Ok(FeatureSpec { offsets, patch, seed, sentinel, scaled_offsets: false })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f32>,
}

#[inline]
fn read(frame: &DepthFrame, x: i64, y: i64, sentinel: f32) -> f32 {
    if x < 0 || y < 0 || x >= frame.width as i64 || y >= frame.height as i64 {
        return sentinel;
    }
    let d = frame.depth[y as usize * frame.width + x as usize];
    if d.is_nan() {
        sentinel
    } else {
        d
    }
}

/// Evaluates features at one pixel. Holds the per-pixel offset scale so the
/// center depth is read once.
#[derive(Clone, Copy)]
pub struct PixelProbe<'a> {
    frame: &'a DepthFrame,
    x: i64,
    y: i64,
    scale: Option<f32>,
    sentinel: f32,
}

impl<'a> PixelProbe<'a> {
    pub fn new(frame: &'a DepthFrame, x: usize, y: usize, spec: &FeatureSpec) -> Self {
        let scale = spec.scaled_offsets.then(|| {
            let d = read(frame, x as i64, y as i64, spec.sentinel);
            spec.sentinel / d.max(1e-3)
        });
        Self { frame, x: x as i64, y: y as i64, scale, sentinel: spec.sentinel }
    }

    #[inline]
    fn depth_at(&self, o: Offset) -> f32 {
        let (dx, dy) = match self.scale {
            None => (o.dx as i64, o.dy as i64),
            Some(s) => ((o.dx as f32 * s).round() as i64, (o.dy as f32 * s).round() as i64),
        };
        read(self.frame, self.x + dx, self.y + dy, self.sentinel)
    }

    #[inline]
    pub fn response(&self, pair: &OffsetPair) -> f32 {
        self.depth_at(pair.u) - self.depth_at(pair.v)
    }
}

/// Response of a single offset pair at pixel `(x, y)`.
pub fn eval_feature(frame: &DepthFrame, x: usize, y: usize, pair: &OffsetPair, spec: &FeatureSpec) -> f32 {
    PixelProbe::new(frame, x, y, spec).response(pair)
}

pub fn feature_vector(frame: &DepthFrame, x: usize, y: usize, spec: &FeatureSpec) -> FeatureVector {
    let probe = PixelProbe::new(frame, x, y, spec);
    FeatureVector { values: spec.offsets.iter().map(|p| probe.response(p)).collect() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelSample {
    pub x: u32,
    pub y: u32,
    pub class: u8,
}

/// Per class, `quota` pixels drawn uniformly without replacement (all of
/// them when the class has fewer). Background is treated like any class.
pub fn sample_training_pixels(labels: &LabelFrame, quota: usize, seed: u64) -> Vec<PixelSample> {
    if quota == 0 {
        return Vec::new();
    }
    let mut by_class: Vec<Vec<u32>> = vec![Vec::new(); CLASS_COUNT];
    for (i, &c) in labels.labels.iter().enumerate() {
        if let Some(bucket) = by_class.get_mut(c as usize) {
            bucket.push(i as u32);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = labels.width as u32;
    let mut out = Vec::new();
    for (class, pixels) in by_class.iter().enumerate() {
        let chosen: Vec<u32> = if pixels.len() <= quota {
            pixels.clone()
        } else {
            let mut idx = sample(&mut rng, pixels.len(), quota).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| pixels[i]).collect()
        };
        out.extend(chosen.into_iter().map(|p| PixelSample { x: p % w, y: p / w, class: class as u8 }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::ObjectClass;
    use proptest::prelude::*;

    fn spec_with(pairs: Vec<OffsetPair>) -> FeatureSpec {
        FeatureSpec { offsets: pairs, patch: (64, 64), seed: 0, sentinel: 3.5, scaled_offsets: false }
    }

    fn off(dx: i16, dy: i16) -> Offset {
        Offset { dx, dy }
    }

    #[test]
    fn spec_is_deterministic_and_bounded() {
        let a = make_spec(300, (64, 64), 5, 3.5).unwrap();
        assert_eq!(a, make_spec(300, (64, 64), 5, 3.5).unwrap());
        assert_eq!(a.len(), 300);
        for p in &a.offsets {
            for o in [p.u, p.v] {
                assert!((-32..=32).contains(&o.dx) && (-32..=32).contains(&o.dy));
            }
        }
        assert_eq!(make_spec(1, (64, 64), 5, 3.5).unwrap().len(), 1);
        assert!(make_spec(0, (64, 64), 5, 3.5).is_err());
    }

    #[test]
    fn identical_offsets_give_zero() {
        let f = DepthFrame { width: 3, height: 3, depth: (0..9).map(|i| i as f32).collect() };
        let pair = OffsetPair { u: off(1, -1), v: off(1, -1) };
        assert_eq!(eval_feature(&f, 1, 1, &pair, &spec_with(vec![pair])), 0.0);
    }

    #[test]
    fn hand_built_difference() {
        let mut f = DepthFrame::filled(3, 3, 3.5);
        f.depth[3 + 2] = 2.7; // (2, 1)
        let pair = OffsetPair { u: off(1, 0), v: off(0, 1) };
        let r = eval_feature(&f, 1, 1, &pair, &spec_with(vec![pair]));
        assert!((r - (-0.8)).abs() < 1e-6, "{r}");
    }

    #[test]
    fn out_of_frame_reads_sentinel() {
        let f = DepthFrame::filled(3, 3, 1.0);
        let pair = OffsetPair { u: off(-30, 0), v: off(0, 0) };
        assert_eq!(eval_feature(&f, 0, 0, &pair, &spec_with(vec![pair])), 2.5);
        let nan = DepthFrame { width: 1, height: 1, depth: vec![f32::NAN] };
        assert_eq!(eval_feature(&nan, 0, 0, &pair, &spec_with(vec![pair])), 0.0);
    }

    #[test]
    fn scaled_offsets_grow_near_camera() {
        let mut f = DepthFrame::filled(9, 1, 3.5);
        f.depth[0] = 1.75; // center pixel at half the sentinel depth
        f.depth[4] = 0.5;
        let pair = OffsetPair { u: off(2, 0), v: off(0, 0) };
        let mut spec = spec_with(vec![pair]);
        assert_eq!(eval_feature(&f, 0, 0, &pair, &spec), 3.5 - 1.75);
        spec.scaled_offsets = true;
        assert_eq!(eval_feature(&f, 0, 0, &pair, &spec), 0.5 - 1.75);
    }

    #[test]
    fn pixel_sampling_quotas() {
        let mut l = LabelFrame::filled(20, 10, ObjectClass::Background);
        for i in 0..10 {
            l.labels[i] = ObjectClass::Head.id();
        }
        for i in 10..60 {
            l.labels[i] = ObjectClass::Table.id();
        }
        assert!(sample_training_pixels(&l, 0, 1).is_empty());
        let s = sample_training_pixels(&l, 50, 1);
        let count = |c: ObjectClass| s.iter().filter(|p| p.class == c.id()).count();
        assert_eq!(count(ObjectClass::Head), 10);
        assert_eq!(count(ObjectClass::Table), 50);
        assert_eq!(count(ObjectClass::Background), 50);
        let s = sample_training_pixels(&l, 20, 1);
        assert_eq!(s.iter().filter(|p| p.class == ObjectClass::Head.id()).count(), 10);
        assert_eq!(s.iter().filter(|p| p.class == ObjectClass::Table.id()).count(), 20);
        assert_eq!(s.iter().filter(|p| p.class == ObjectClass::Background.id()).count(), 20);
        for p in &s {
            assert_eq!(l.at(p.x as usize, p.y as usize), p.class);
        }
        let mut seen = std::collections::HashSet::new();
        assert!(s.iter().all(|p| seen.insert((p.x, p.y))));
        assert_eq!(s, sample_training_pixels(&l, 20, 1));
    }

    fn arb_frame() -> impl Strategy<Value = DepthFrame> {
        (4usize..12, 4usize..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(0.5f32..3.5, w * h)
                .prop_map(move |depth| DepthFrame { width: w, height: h, depth })
        })
    }

    proptest! {
        #[test]
        fn constant_shift_invariance(frame in arb_frame(), c in -0.4f32..0.4, seed in 0u64..1000) {
            let spec = FeatureSpec { sentinel: 3.5, ..make_spec(16, (4, 4), seed, 3.5).unwrap() };
            // keep every read in frame so the sentinel never enters the difference
            let shifted = DepthFrame { depth: frame.depth.iter().map(|d| d + c).collect(), ..frame.clone() };
            for y in 2..frame.height - 2 {
                for x in 2..frame.width - 2 {
                    let a = feature_vector(&frame, x, y, &spec);
                    let b = feature_vector(&shifted, x, y, &spec);
                    for (p, q) in a.values.iter().zip(&b.values) {
                        prop_assert!((p - q).abs() < 1e-5);
                    }
                }
            }
        }

        #[test]
        fn translation_consistency(frame in arb_frame(), seed in 0u64..1000) {
            let spec = make_spec(8, (2, 2), seed, 3.5).unwrap();
            // shift content right by one column
            let w = frame.width + 1;
            let mut moved = DepthFrame::filled(w, frame.height, 3.5);
            for y in 0..frame.height {
                for x in 0..frame.width {
                    moved.depth[y * w + x + 1] = frame.at(x, y);
                }
            }
            for y in 1..frame.height - 1 {
                for x in 1..frame.width - 1 {
                    prop_assert_eq!(feature_vector(&frame, x, y, &spec), feature_vector(&moved, x + 1, y, &spec));
                }
            }
        }

        #[test]
        fn border_reads_are_total(frame in arb_frame(), seed in 0u64..1000) {
            let spec = make_spec(32, (64, 64), seed, 3.5).unwrap();
            for y in [0, frame.height - 1] {
                for x in [0, frame.width - 1] {
                    let v = feature_vector(&frame, x, y, &spec);
                    prop_assert!(v.values.iter().all(|r| r.is_finite()));
                }
            }
        }
    }
}
