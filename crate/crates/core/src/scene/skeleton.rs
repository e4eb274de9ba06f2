//! Sphere-set human skeletons and the bundled pose library.

use crate::class::ObjectClass;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Pose library shipped with the crate: 13 canonical skeletons of a 1.60 m
/// person, 48 spheres each.
pub const BUNDLED_POSES: &str = include_str!("../../data/poses.txt");

/// Stature of the canonical skeletons in the bundled library.
pub const CANONICAL_STATURE: f64 = 1.60;

#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub name: String,
    pub position: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodySphere {
    pub center: Vec3,
    pub radius: f64,
    pub part: ObjectClass,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HumanSkeleton {
    pub name: String,
    pub joints: Vec<Joint>,
    pub spheres: Vec<BodySphere>,
    /// Accumulated scale relative to the canonical skeleton.
    pub scale: f64,
}

// Bone chain whose summed length is the standing height in any pose.
const LEG_CHAIN: [&str; 4] = ["l_heel", "l_ankle", "l_knee", "l_hip"];
const TRUNK_CHAIN: [&str; 4] = ["pelvis", "neck", "head", "head_top"];

impl HumanSkeleton {
    pub fn joint(&self, name: &str) -> Option<Vec3> {
        self.joints.iter().find(|j| j.name == name).map(|j| j.position)
    }

    /// Standing height: summed bone lengths heel to hip and pelvis to crown.
    /// Pose invariant, so a sitting skeleton reports the same stature as the
    /// standing one it was posed from.
    pub fn stature(&self) -> Option<f64> {
        let chain_len = |names: &[&str]| -> Option<f64> {
            let pts: Option<Vec<Vec3>> = names.iter().map(|n| self.joint(n)).collect();
            let pts = pts?;
            Some(pts.windows(2).map(|w| (w[1] - w[0]).dot(w[1] - w[0]).sqrt()).sum())
        };
        Some(chain_len(&LEG_CHAIN)? + chain_len(&TRUNK_CHAIN)?)
    }

    /// Highest point of the sphere set above the floor.
    pub fn top(&self) -> f64 {
        self.spheres
            .iter()
            .map(|s| s.center.z + s.radius)
            .fold(0.0, f64::max)
    }

    /// Index of the sphere whose top is highest.
    pub fn highest_sphere(&self) -> Option<usize> {
        self.spheres
            .iter()
            .enumerate()
            .max_by(|a, b| {
                (a.1.center.z + a.1.radius).total_cmp(&(b.1.center.z + b.1.radius))
            })
            .map(|(i, _)| i)
    }
}

/// Uniformly scales joints and sphere radii by `beta` about the origin
/// (the floor point under the pelvis). Part labels are untouched.
pub fn apply_skeleton_scale(canonical: &HumanSkeleton, beta: f64) -> Result<HumanSkeleton> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("skeleton scale must be positive, got {beta}")));
    }
    Ok(HumanSkeleton {
        name: canonical.name.clone(),
        joints: canonical
            .joints
            .iter()
            .map(|j| Joint { name: j.name.clone(), position: j.position.scaled(beta) })
            .collect(),
        spheres: canonical
            .spheres
            .iter()
            .map(|s| BodySphere { center: s.center.scaled(beta), radius: s.radius * beta, part: s.part })
            .collect(),
        scale: canonical.scale * beta,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoseLibrary {
    pub poses: Vec<HumanSkeleton>,
}

impl PoseLibrary {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_POSES).expect("bundled pose library is well formed")
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Parses `pose <name>` records followed by `joint <name> x y z` and
    /// `sphere <part-id> cx cy cz r` lines. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut poses: Vec<HumanSkeleton> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |reason: String| Error::PoseLibrary { line: line_no, reason };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            let keyword = tok.next().unwrap_or_default();
            let rest: Vec<&str> = tok.collect();
            let nums = |vals: &[&str]| -> Result<Vec<f64>> {
                vals.iter()
                    .map(|v| {
                        v.parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| err(format!("bad number `{v}`")))
                    })
                    .collect()
            };
            match keyword {
                "pose" => {
                    if rest.len() != 1 {
                        return Err(err("expected `pose <name>`".into()));
                    }
                    poses.push(HumanSkeleton {
                        name: rest[0].to_string(),
                        joints: Vec::new(),
                        spheres: Vec::new(),
                        scale: 1.0,
                    });
                }
                "joint" => {
                    if rest.len() != 4 {
                        return Err(err("expected `joint <name> x y z`".into()));
                    }
                    let v = nums(&rest[1..])?;
                    let pose = poses.last_mut().ok_or_else(|| err("joint before pose header".into()))?;
                    pose.joints.push(Joint { name: rest[0].to_string(), position: Vec3::new(v[0], v[1], v[2]) });
                }
                "sphere" => {
                    if rest.len() != 5 {
                        return Err(err("expected `sphere <part-id> cx cy cz r`".into()));
                    }
                    let part = rest[0]
                        .parse::<u8>()
                        .ok()
                        .and_then(ObjectClass::from_id)
                        .filter(|c| c.is_body_part())
                        .ok_or_else(|| err(format!("`{}` is not a body-part id", rest[0])))?;
                    let v = nums(&rest[1..])?;
                    if v[3] <= 0.0 {
                        return Err(err("sphere radius must be positive".into()));
                    }
                    let pose = poses.last_mut().ok_or_else(|| err("sphere before pose header".into()))?;
                    pose.spheres.push(BodySphere { center: Vec3::new(v[0], v[1], v[2]), radius: v[3], part });
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        if poses.is_empty() {
            return Err(Error::PoseLibrary { line: 0, reason: "no poses".into() });
        }
        for p in &poses {
            if p.spheres.is_empty() {
                return Err(Error::PoseLibrary { line: 0, reason: format!("pose `{}` has no spheres", p.name) });
            }
            if p.stature().is_none() {
                return Err(Error::PoseLibrary {
                    line: 0,
                    reason: format!("pose `{}` lacks the joints needed to measure stature", p.name),
                });
            }
        }
        Ok(Self { poses })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_library_shape() {
        let lib = PoseLibrary::bundled();
        assert!(lib.len() >= 12);
        for p in &lib.poses {
            assert_eq!(p.spheres.len(), 48, "{}", p.name);
            assert!(p.spheres.iter().all(|s| s.part.is_body_part()));
            assert!((p.stature().unwrap() - CANONICAL_STATURE).abs() < 1e-3, "{}", p.name);
            for part in 0..6u8 {
                assert!(p.spheres.iter().any(|s| s.part.id() == part), "{} lacks part {part}", p.name);
            }
        }
        for name in ["standing", "sitting", "stretching", "walking", "working", "bending", "bowing",
            "swinging", "boxing", "tilting", "single_arm_raised", "both_arms_raised"]
        {
            assert!(lib.poses.iter().any(|p| p.name == name), "missing {name}");
        }
    }

    #[test]
    fn scale_identity_and_doubling() {
        let p = &PoseLibrary::bundled().poses[0];
        assert_eq!(&apply_skeleton_scale(p, 1.0).unwrap(), p);
        let d = apply_skeleton_scale(p, 2.0).unwrap();
        for (a, b) in p.spheres.iter().zip(&d.spheres) {
            assert_eq!(b.center, a.center.scaled(2.0));
            assert_eq!(b.radius, a.radius * 2.0);
            assert_eq!(b.part, a.part);
        }
        for (a, b) in p.joints.iter().zip(&d.joints) {
            assert_eq!(b.position, a.position.scaled(2.0));
        }
    }

    #[test]
    fn scale_to_tallest() {
        let p = &PoseLibrary::bundled().poses[0];
        let canon = p.stature().unwrap();
        let s = apply_skeleton_scale(p, 1.9 / 1.6).unwrap();
        assert!((s.stature().unwrap() - canon * 1.9 / 1.6).abs() < 1e-9);
    }

    #[test]
    fn non_positive_scale_rejected() {
        let p = &PoseLibrary::bundled().poses[0];
        assert!(apply_skeleton_scale(p, 0.0).is_err());
        assert!(apply_skeleton_scale(p, -1.0).is_err());
        assert!(apply_skeleton_scale(p, f64::NAN).is_err());
    }

    #[test]
    fn parse_errors_carry_line() {
        let e = PoseLibrary::parse("pose a\njoint x 1 2\n").unwrap_err();
        assert!(matches!(e, Error::PoseLibrary { line: 2, .. }));
        let e = PoseLibrary::parse("pose a\nsphere 7 0 0 0 0.1\n").unwrap_err();
        assert!(matches!(e, Error::PoseLibrary { line: 2, .. }));
        let e = PoseLibrary::parse("sphere 1 0 0 0 0.1\n").unwrap_err();
        assert!(matches!(e, Error::PoseLibrary { line: 1, .. }));
    }
}
