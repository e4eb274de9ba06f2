use super::{Forest, Node, SplitFunction, Tree};
use crate::error::{Error, Result};
use crate::features::{FeatureSpec, PixelProbe};
use crate::render::DepthFrame;

/// Per-pixel class posteriors, pixel-major (`classes` floats per pixel).
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorVolume {
    pub width: usize,
    pub height: usize,
    pub classes: usize,
    pub data: Vec<f32>,
}

impl PosteriorVolume {
    pub fn pixel(&self, i: usize) -> &[f32] {
        &self.data[i * self.classes..(i + 1) * self.classes]
    }

    /// Hard labels; ties go to the lower class id.
    pub fn argmax(&self) -> Vec<u8> {
        self.data
            .chunks_exact(self.classes)
            .map(|p| {
                let mut best = 0;
                for (k, &v) in p.iter().enumerate() {
                    if v > p[best] {
                        best = k;
                    }
                }
                best as u8
            })
            .collect()
    }
}

const LEAF: u32 = 1 << 31;

/// Split node with its probe offsets resolved against a padded frame.
#[derive(Clone, Copy)]
struct FlatNode {
    /// `u1, v1, u2, v2` as linear offsets into the padded buffer.
    reads: [i32; 4],
    weights: [f32; 2],
    threshold: f32,
    /// Left child index (right is `child + 1`), or `LEAF | leaf`.
    child: u32,
}

/// Depth frame with a sentinel border wide enough for every offset, so
/// feature reads need no bounds checks. NaN pixels read as the sentinel.
struct PaddedFrame {
    data: Vec<f32>,
    stride: usize,
    pad: usize,
}

impl PaddedFrame {
    fn new(frame: &DepthFrame, spec: &FeatureSpec) -> Self {
        let pad = spec
            .offsets
            .iter()
            .flat_map(|p| [p.u.dx, p.u.dy, p.v.dx, p.v.dy])
            .map(|d| d.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let stride = frame.width + 2 * pad;
        let mut data = vec![spec.sentinel; stride * (frame.height + 2 * pad)];
        for y in 0..frame.height {
            let row = &frame.depth[y * frame.width..(y + 1) * frame.width];
            let start = (y + pad) * stride + pad;
            for (dst, &d) in data[start..start + frame.width].iter_mut().zip(row) {
                *dst = if d.is_nan() { spec.sentinel } else { d };
            }
        }
        Self { data, stride, pad }
    }
}

fn compile_tree(tree: &Tree, spec: &FeatureSpec, stride: usize) -> Vec<FlatNode> {
    let lin = |o: crate::features::Offset| o.dy as i32 * stride as i32 + o.dx as i32;
    let resolve = |f: u32| {
        let p = spec.offsets[f as usize];
        (lin(p.u), lin(p.v))
    };
    let mut flat = vec![FlatNode { reads: [0; 4], weights: [0.0; 2], threshold: 0.0, child: 0 }];
    // (source node, flat slot); children always land in adjacent slots
    let mut stack = vec![(0u32, 0usize)];
    while let Some((n, slot)) = stack.pop() {
        match tree.nodes[n as usize] {
            Node::Leaf { leaf } => flat[slot].child = LEAF | leaf,
            Node::Split { split, left, right } => {
                let (reads, weights, threshold) = match split {
                    SplitFunction::AxisAligned { feature, threshold } => {
                        let (u, v) = resolve(feature);
                        ([u, v, 0, 0], [1.0, 0.0], threshold)
                    }
                    SplitFunction::Linear { features, direction, threshold } => {
                        let (u1, v1) = resolve(features[0]);
                        let (u2, v2) = resolve(features[1]);
                        ([u1, v1, u2, v2], direction, threshold)
                    }
                };
                let child = flat.len();
                flat.push(flat[0]);
                flat.push(flat[0]);
                flat[slot] = FlatNode { reads, weights, threshold, child: child as u32 };
                stack.push((left, child));
                stack.push((right, child + 1));
            }
        }
    }
    flat
}

#[inline]
fn walk(nodes: &[FlatNode], depth: &[f32], base: usize) -> u32 {
    let at = |o: i32| depth[(base as isize + o as isize) as usize];
    let mut n = 0usize;
    loop {
        let node = &nodes[n];
        if node.child & LEAF != 0 {
            return node.child & !LEAF;
        }
        let mut r = node.weights[0] * (at(node.reads[0]) - at(node.reads[1]));
        if node.weights[1] != 0.0 {
            r += node.weights[1] * (at(node.reads[2]) - at(node.reads[3]));
        }
        n = node.child as usize + (r >= node.threshold) as usize;
    }
}

fn check_frame(frame: &DepthFrame) -> Result<()> {
    if frame.width == 0 || frame.height == 0 || frame.depth.len() != frame.width * frame.height {
        return Err(Error::DimensionMismatch(format!("bad frame {}x{}", frame.width, frame.height)));
    }
    Ok(())
}

fn for_each_row(data: &mut [f32], row_len: usize, f: impl Fn(usize, &mut [f32]) + Sync) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(row_len).enumerate().for_each(|(y, out)| f(y, out));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(row_len).enumerate().for_each(|(y, out)| f(y, out));
    }
}

/// Averages the leaf posteriors reached by every tree at every pixel.
pub fn predict(forest: &Forest, frame: &DepthFrame) -> Result<PosteriorVolume> {
    check_frame(frame)?;
    if forest.spec.scaled_offsets {
        return predict_with_probe(forest, frame);
    }
    let c = forest.class_count;
    let (w, h) = (frame.width, frame.height);
    let padded = PaddedFrame::new(frame, &forest.spec);
    let trees: Vec<Vec<FlatNode>> =
        forest.trees.iter().map(|t| compile_tree(t, &forest.spec, padded.stride)).collect();
    let inv_t = 1.0 / forest.trees.len().max(1) as f32;
    let mut data = vec![0.0f32; w * h * c];
    for_each_row(&mut data, w * c, |y, out| {
        let row_base = (y + padded.pad) * padded.stride + padded.pad;
        for (flat, tree) in trees.iter().zip(&forest.trees) {
            for (x, acc) in out.chunks_exact_mut(c).enumerate() {
                let leaf = walk(flat, &padded.data, row_base + x);
                for (a, p) in acc.iter_mut().zip(tree.posterior(leaf, c)) {
                    *a += p;
                }
            }
        }
        for a in out.iter_mut() {
            *a *= inv_t;
        }
    });
    Ok(PosteriorVolume { width: w, height: h, classes: c, data })
}

/// Direct traversal through [`PixelProbe`]; handles depth-scaled offsets.
fn predict_with_probe(forest: &Forest, frame: &DepthFrame) -> Result<PosteriorVolume> {
    check_frame(frame)?;
    let c = forest.class_count;
    let (w, h) = (frame.width, frame.height);
    let spec = &forest.spec;
    let inv_t = 1.0 / forest.trees.len().max(1) as f32;
    let mut data = vec![0.0f32; w * h * c];
    for_each_row(&mut data, w * c, |y, out| {
        for x in 0..w {
            let probe = PixelProbe::new(frame, x, y, spec);
            let acc = &mut out[x * c..(x + 1) * c];
            for tree in &forest.trees {
                let mut n = 0usize;
                let leaf = loop {
                    match tree.nodes[n] {
                        Node::Leaf { leaf } => break leaf,
                        Node::Split { split, left, right } => {
                            let go_left = split.goes_left(|f| probe.response(&spec.offsets[f as usize]));
                            n = if go_left { left } else { right } as usize;
                        }
                    }
                };
                for (a, p) in acc.iter_mut().zip(tree.posterior(leaf, c)) {
                    *a += p;
                }
            }
            for a in acc.iter_mut() {
                *a *= inv_t;
            }
        }
    });
    Ok(PosteriorVolume { width: w, height: h, classes: c, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::ObjectClass;
    use crate::features::make_spec;
    use crate::forest::{train, SplitKind, TrainConfig};
    use crate::render::LabelFrame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stump_forest(p: Vec<f32>, trees: usize) -> Forest {
        let c = p.len();
        Forest {
            trees: (0..trees)
                .map(|_| Tree { nodes: vec![Node::Leaf { leaf: 0 }], posteriors: p.clone(), histograms: vec![] })
                .collect(),
            spec: make_spec(4, (8, 8), 0, 3.5).unwrap(),
            class_count: c,
            meta: None,
        }
    }

    #[test]
    fn single_leaf_forest_broadcasts_posterior() {
        let p = vec![0.1, 0.6, 0.3];
        let f = stump_forest(p.clone(), 3);
        let v = predict(&f, &DepthFrame::filled(5, 4, 2.0)).unwrap();
        for i in 0..20 {
            for (a, b) in v.pixel(i).iter().zip(&p) {
                assert!((a - b).abs() < 1e-6);
            }
        }
        assert!(v.argmax().iter().all(|&l| l == 1));
    }

    #[test]
    fn empty_frame_rejected() {
        let f = stump_forest(vec![1.0], 1);
        assert!(predict(&f, &DepthFrame::filled(0, 4, 2.0)).is_err());
    }

    fn random_frame(w: usize, h: usize, rng: &mut ChaCha8Rng) -> (DepthFrame, LabelFrame) {
        let mut d = DepthFrame::filled(w, h, 3.5);
        let mut l = LabelFrame::filled(w, h, ObjectClass::Background);
        let (cx, cy) = (rng.random_range(0..w), rng.random_range(0..h));
        for y in 0..h {
            for x in 0..w {
                let r2 = (x as i64 - cx as i64).pow(2) + (y as i64 - cy as i64).pow(2);
                if r2 < 40 {
                    d.depth[y * w + x] = 2.0 + rng.random_range(0.0..0.1);
                    l.labels[y * w + x] = ObjectClass::Head.id();
                } else if r2 < 120 {
                    d.depth[y * w + x] = 2.5;
                    l.labels[y * w + x] = ObjectClass::Body.id();
                }
            }
        }
        d.depth[3] = f32::NAN;
        (d, l)
    }

    #[test]
    fn padded_traversal_matches_probe_traversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let frames: Vec<_> = (0..6).map(|_| random_frame(30, 20, &mut rng)).collect();
        for kind in [SplitKind::Linear, SplitKind::AxisAligned] {
            let spec = make_spec(40, (16, 16), 9, 3.5).unwrap();
            let config = TrainConfig {
                split_kind: kind,
                tree_count: 3,
                frames_per_tree: 6,
                max_depth: 10,
                min_info_gain: 0.0,
                ..TrainConfig::default()
            };
            let forest = train(&frames, &config, &spec).unwrap();
            for (d, _) in &frames {
                assert_eq!(predict(&forest, d).unwrap(), predict_with_probe(&forest, d).unwrap());
            }
        }
    }
}
