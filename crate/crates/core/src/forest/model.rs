//! `RDF1` model files.
//!
//! Layout, little-endian: magic `RDF1`; u32 class_count; feature block
//! (u32 count, u16 patch width, u16 patch height, count x 4 i16 offsets
//! `u.dx u.dy v.dx v.dy`, f32 sentinel depth, u8 scaled-offsets flag, u64
//! seed); u32 tree count; per tree u32 node count then nodes. A node is a
//! u8 tag: 0 = leaf followed by class_count f32 posteriors; 1 = axis-aligned
//! (u32 feature, f32 threshold, u32 left, u32 right); 2 = linear (u32 f1,
//! u32 f2, f32 dir x, f32 dir y, f32 threshold, u32 left, u32 right).

use std::path::Path;

use super::{Forest, Node, SplitFunction, Tree};
use crate::error::{Error, Result};
use crate::features::{FeatureSpec, Offset, OffsetPair};

pub const MODEL_MAGIC: &[u8; 4] = b"RDF1";

const TAG_LEAF: u8 = 0;
const TAG_AXIS: u8 = 1;
const TAG_LINEAR: u8 = 2;

pub fn encode_forest(forest: &Forest) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(MODEL_MAGIC);
    b.extend_from_slice(&(forest.class_count as u32).to_le_bytes());
    let spec = &forest.spec;
    b.extend_from_slice(&(spec.offsets.len() as u32).to_le_bytes());
    b.extend_from_slice(&spec.patch.0.to_le_bytes());
    b.extend_from_slice(&spec.patch.1.to_le_bytes());
    for p in &spec.offsets {
        for v in [p.u.dx, p.u.dy, p.v.dx, p.v.dy] {
            b.extend_from_slice(&v.to_le_bytes());
        }
    }
    b.extend_from_slice(&spec.sentinel.to_le_bytes());
    b.push(spec.scaled_offsets as u8);
    b.extend_from_slice(&spec.seed.to_le_bytes());
    b.extend_from_slice(&(forest.trees.len() as u32).to_le_bytes());
    for tree in &forest.trees {
        b.extend_from_slice(&(tree.nodes.len() as u32).to_le_bytes());
        for node in &tree.nodes {
            match *node {
                Node::Leaf { leaf } => {
                    b.push(TAG_LEAF);
                    for p in tree.posterior(leaf, forest.class_count) {
                        b.extend_from_slice(&p.to_le_bytes());
                    }
                }
                Node::Split { split: SplitFunction::AxisAligned { feature, threshold }, left, right } => {
                    b.push(TAG_AXIS);
                    b.extend_from_slice(&feature.to_le_bytes());
                    b.extend_from_slice(&threshold.to_le_bytes());
                    b.extend_from_slice(&left.to_le_bytes());
                    b.extend_from_slice(&right.to_le_bytes());
                }
                Node::Split { split: SplitFunction::Linear { features, direction, threshold }, left, right } => {
                    b.push(TAG_LINEAR);
                    b.extend_from_slice(&features[0].to_le_bytes());
                    b.extend_from_slice(&features[1].to_le_bytes());
                    b.extend_from_slice(&direction[0].to_le_bytes());
                    b.extend_from_slice(&direction[1].to_le_bytes());
                    b.extend_from_slice(&threshold.to_le_bytes());
                    b.extend_from_slice(&left.to_le_bytes());
                    b.extend_from_slice(&right.to_le_bytes());
                }
            }
        }
    }
    b
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::format(self.path, format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(s.try_into().unwrap())
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn i16(&mut self) -> Result<i16> {
        Ok(i16::from_le_bytes(self.take()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take()?))
    }
}

pub fn decode_forest(path: &Path, bytes: &[u8]) -> Result<Forest> {
    let mut r = Reader { bytes, pos: 0, path };
    if &r.take::<4>()? != MODEL_MAGIC {
        return Err(Error::format(path, "not an RDF1 model"));
    }
    let class_count = r.u32()? as usize;
    if class_count == 0 {
        return Err(Error::format(path, "zero classes"));
    }
    let count = r.u32()? as usize;
    let patch = (r.u16()?, r.u16()?);
    let mut offsets = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let (a, b, c, d) = (r.i16()?, r.i16()?, r.i16()?, r.i16()?);
        offsets.push(OffsetPair { u: Offset { dx: a, dy: b }, v: Offset { dx: c, dy: d } });
    }
    let sentinel = r.f32()?;
    let scaled_offsets = r.u8()? != 0;
    let seed = r.u64()?;
    let spec = FeatureSpec { offsets, patch, seed, sentinel, scaled_offsets };

    let tree_count = r.u32()? as usize;
    let mut trees = Vec::with_capacity(tree_count.min(1024));
    for _ in 0..tree_count {
        let node_count = r.u32()? as usize;
        let mut nodes = Vec::with_capacity(node_count.min(1 << 20));
        let mut posteriors = Vec::new();
        for _ in 0..node_count {
            let node = match r.u8()? {
                TAG_LEAF => {
                    let leaf = (posteriors.len() / class_count) as u32;
                    for _ in 0..class_count {
                        posteriors.push(r.f32()?);
                    }
                    Node::Leaf { leaf }
                }
                TAG_AXIS => {
                    let feature = r.u32()?;
                    let threshold = r.f32()?;
                    Node::Split { split: SplitFunction::AxisAligned { feature, threshold }, left: r.u32()?, right: r.u32()? }
                }
                TAG_LINEAR => {
                    let features = [r.u32()?, r.u32()?];
                    let direction = [r.f32()?, r.f32()?];
                    let threshold = r.f32()?;
                    Node::Split {
                        split: SplitFunction::Linear { features, direction, threshold },
                        left: r.u32()?,
                        right: r.u32()?,
                    }
                }
                t => return Err(Error::format(path, format!("unknown node tag {t}"))),
            };
            nodes.push(node);
        }
        if nodes.is_empty() {
            return Err(Error::format(path, "tree without nodes"));
        }
        for n in &nodes {
            if let Node::Split { split, left, right } = n {
                let in_range = |i: &u32| (*i as usize) < nodes.len();
                let feats_ok = match split {
                    SplitFunction::AxisAligned { feature, .. } => (*feature as usize) < count,
                    SplitFunction::Linear { features, .. } => features.iter().all(|&f| (f as usize) < count),
                };
                if !in_range(left) || !in_range(right) || !feats_ok {
                    return Err(Error::format(path, "node references out of range"));
                }
            }
        }
        trees.push(Tree { nodes, posteriors, histograms: Vec::new() });
    }
    if r.pos != bytes.len() {
        return Err(Error::format(path, "trailing bytes"));
    }
    Ok(Forest { trees, spec, class_count, meta: None })
}

pub fn write_forest(path: &Path, forest: &Forest) -> Result<()> {
    std::fs::write(path, encode_forest(forest)).map_err(|e| Error::io(path, e))
}

pub fn read_forest(path: &Path) -> Result<Forest> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_forest(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::make_spec;

    fn small_forest() -> Forest {
        let spec = make_spec(3, (16, 16), 2, 3.5).unwrap();
        let tree = Tree {
            nodes: vec![
                Node::Split { split: SplitFunction::AxisAligned { feature: 2, threshold: 0.25 }, left: 1, right: 2 },
                Node::Leaf { leaf: 0 },
                Node::Split {
                    split: SplitFunction::Linear { features: [0, 1], direction: [0.6, 0.8], threshold: -1.5 },
                    left: 3,
                    right: 4,
                },
                Node::Leaf { leaf: 1 },
                Node::Leaf { leaf: 2 },
            ],
            posteriors: vec![0.5, 0.5, 0.25, 0.75, 1.0, 0.0],
            histograms: vec![],
        };
        Forest { trees: vec![tree], spec, class_count: 2, meta: None }
    }

    #[test]
    fn round_trip() {
        let f = small_forest();
        let bytes = encode_forest(&f);
        assert_eq!(&bytes[..4], b"RDF1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 2);
        assert_eq!(decode_forest(Path::new("m"), &bytes).unwrap(), f);
    }

    #[test]
    fn corrupt_models_rejected() {
        let bytes = encode_forest(&small_forest());
        let p = Path::new("m");
        assert!(decode_forest(p, &bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_forest(p, &extra).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_forest(p, &bad).is_err());
    }
}
