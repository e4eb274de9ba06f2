//! Depth/label raster files and dataset manifests.
//!
//! Depth: `DPTH`, u32 width, u32 height, then width*height f32, little-endian.
//! Labels: `LBLS`, u32 width, u32 height, then width*height bytes.
//! Manifest: one `<depth-path> <label-path>` pair per line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::class::CLASS_COUNT;
use crate::error::{Error, Result};
use crate::render::{DepthFrame, LabelFrame};

pub const DEPTH_MAGIC: &[u8; 4] = b"DPTH";
pub const LABEL_MAGIC: &[u8; 4] = b"LBLS";

fn header(magic: &[u8; 4], w: usize, h: usize) -> Vec<u8> {
    let mut buf = Vec::with_capacity(12);
    buf.extend_from_slice(magic);
    buf.extend_from_slice(&(w as u32).to_le_bytes());
    buf.extend_from_slice(&(h as u32).to_le_bytes());
    buf
}

pub fn encode_depth(frame: &DepthFrame) -> Vec<u8> {
    let mut buf = header(DEPTH_MAGIC, frame.width, frame.height);
    buf.reserve(frame.depth.len() * 4);
    for v in &frame.depth {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn encode_labels(frame: &LabelFrame) -> Vec<u8> {
    let mut buf = header(LABEL_MAGIC, frame.width, frame.height);
    buf.extend_from_slice(&frame.labels);
    buf
}

fn parse_header(path: &Path, bytes: &[u8], magic: &[u8; 4], elem: usize) -> Result<(usize, usize)> {
    if bytes.len() < 12 || &bytes[..4] != magic {
        return Err(Error::format(path, format!("missing {} header", String::from_utf8_lossy(magic))));
    }
    let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(elem))
        .ok_or_else(|| Error::format(path, "dimensions overflow"))?;
    if bytes.len() - 12 != expected {
        return Err(Error::format(
            path,
            format!("{w}x{h} raster needs {expected} payload bytes, found {}", bytes.len() - 12),
        ));
    }
    Ok((w, h))
}

pub fn decode_depth(path: &Path, bytes: &[u8]) -> Result<DepthFrame> {
    let (width, height) = parse_header(path, bytes, DEPTH_MAGIC, 4)?;
    let depth = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DepthFrame { width, height, depth })
}

pub fn decode_labels(path: &Path, bytes: &[u8]) -> Result<LabelFrame> {
    let (width, height) = parse_header(path, bytes, LABEL_MAGIC, 1)?;
    let labels = bytes[12..].to_vec();
    if let Some(bad) = labels.iter().find(|&&c| c as usize >= CLASS_COUNT) {
        return Err(Error::format(path, format!("invalid class id {bad}")));
    }
    Ok(LabelFrame { width, height, labels })
}

pub fn write_depth(path: &Path, frame: &DepthFrame) -> Result<()> {
    fs::write(path, encode_depth(frame)).map_err(|e| Error::io(path, e))
}

pub fn write_labels(path: &Path, frame: &LabelFrame) -> Result<()> {
    fs::write(path, encode_labels(frame)).map_err(|e| Error::io(path, e))
}

pub fn read_depth(path: &Path) -> Result<DepthFrame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_depth(path, &bytes)
}

pub fn read_labels(path: &Path) -> Result<LabelFrame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_labels(path, &bytes)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub depth: PathBuf,
    pub labels: PathBuf,
}

/// Reads a manifest. Relative paths resolve against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(Error::format(path, format!("line {}: expected `<depth-path> <label-path>`", i + 1)));
        }
        entries.push(ManifestEntry { depth: base.join(parts[0]), labels: base.join(parts[1]) });
    }
    Ok(entries)
}

/// Writes entries as given; callers pass paths relative to the manifest
/// directory to keep datasets relocatable.
pub fn write_manifest(path: &Path, entries: &[ManifestEntry], comment: Option<&str>) -> Result<()> {
    let mut out = Vec::new();
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}").unwrap();
        }
    }
    for e in entries {
        writeln!(out, "{} {}", e.depth.display(), e.labels.display()).unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads every frame pair listed in a manifest.
pub fn load_dataset(manifest: &Path) -> Result<Vec<(DepthFrame, LabelFrame)>> {
    read_manifest(manifest)?
        .into_iter()
        .map(|e| {
            let d = read_depth(&e.depth)?;
            let l = read_labels(&e.labels)?;
            if (d.width, d.height) != (l.width, l.height) {
                return Err(Error::DimensionMismatch(format!(
                    "{} is {}x{} but {} is {}x{}",
                    e.depth.display(),
                    d.width,
                    d.height,
                    e.labels.display(),
                    l.width,
                    l.height
                )));
            }
            Ok((d, l))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn golden_depth_bytes() {
        let f = DepthFrame { width: 2, height: 1, depth: vec![1.0, -2.5] };
        let bytes = encode_depth(&f);
        assert_eq!(
            bytes,
            [b'D', b'P', b'T', b'H', 2, 0, 0, 0, 1, 0, 0, 0, 0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x20, 0xc0]
        );
    }

    #[test]
    fn golden_label_bytes() {
        let f = LabelFrame { width: 1, height: 2, labels: vec![3, 10] };
        assert_eq!(encode_labels(&f), [b'L', b'B', b'L', b'S', 1, 0, 0, 0, 2, 0, 0, 0, 3, 10]);
    }

    #[test]
    fn rejects_truncated_and_bad_magic() {
        let p = Path::new("x");
        let mut bytes = encode_depth(&DepthFrame::filled(3, 3, 1.0));
        bytes.pop();
        assert!(matches!(decode_depth(p, &bytes), Err(Error::Format { .. })));
        assert!(decode_labels(p, b"LBLX\x01\0\0\0\x01\0\0\0\0").is_err());
        assert!(decode_labels(p, b"LBLS\x01\0\0\0\x01\0\0\0\x0b").is_err());
    }

    #[test]
    fn manifest_paths_resolve_relative_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("manifest.txt");
        let entries = vec![ManifestEntry { depth: "a.dpth".into(), labels: "a.lbls".into() }];
        write_manifest(&m, &entries, Some("split: train")).unwrap();
        let back = read_manifest(&m).unwrap();
        assert_eq!(back[0].depth, dir.path().join("a.dpth"));
        assert!(matches!(read_manifest(&dir.path().join("missing")), Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn depth_round_trip(w in 1usize..8, h in 1usize..8, seed in any::<u32>()) {
            let depth: Vec<f32> = (0..w * h).map(|i| (seed as f32 * 0.001 + i as f32).sin()).collect();
            let f = DepthFrame { width: w, height: h, depth };
            prop_assert_eq!(decode_depth(Path::new("p"), &encode_depth(&f)).unwrap(), f);
        }

        #[test]
        fn label_round_trip(labels in proptest::collection::vec(0u8..11, 1..64)) {
            let f = LabelFrame { width: labels.len(), height: 1, labels };
            prop_assert_eq!(decode_labels(Path::new("p"), &encode_labels(&f)).unwrap(), f);
        }
    }
}
