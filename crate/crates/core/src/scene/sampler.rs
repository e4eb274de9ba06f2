//! Scene configurations drawn from the interaction density.
//!
//! A scene factors into per-instance terms (height, pose, position,
//! orientation) and pairwise terms (overlap threshold, relationship). The
//! per-instance terms are sampled from their uniform laws; a relationship
//! is drawn per placement and every pair is then validated with
//! [`check_interaction`], resampling a placement up to `max_rejections` times.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::primitives::{furniture_solids, Shape, Solid, PRESETS_PER_FAMILY};
use super::skeleton::{apply_skeleton_scale, PoseLibrary, CANONICAL_STATURE};
use crate::class::Family;
use crate::error::{Error, Result};
use crate::geometry::{overlap_fraction, ConvexPolygon, Vec2};

/// Height range of tables, chairs and storage.
pub const FURNITURE_HEIGHT: (f64, f64) = (0.70, 0.90);
/// Height range of plants.
pub const PLANT_HEIGHT: (f64, f64) = (0.15, 0.35);
/// Human stature range.
pub const HUMAN_HEIGHT: (f64, f64) = (1.60, 1.90);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelationKind {
    FreeStanding,
    AdjacentContact,
    PartialOcclusion,
    StackedOnTop,
    HumanTouching,
}

impl RelationKind {
    pub const ALL: [RelationKind; 5] = [
        RelationKind::FreeStanding,
        RelationKind::AdjacentContact,
        RelationKind::PartialOcclusion,
        RelationKind::StackedOnTop,
        RelationKind::HumanTouching,
    ];
}

/// Relationship sampled for an instance, relative to an already placed anchor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Relation {
    pub kind: RelationKind,
    pub anchor: Option<usize>,
}

impl Relation {
    pub const FREE: Relation = Relation { kind: RelationKind::FreeStanding, anchor: None };
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteractionParams {
    /// Maximum allowed footprint overlap, as a fraction of the smaller footprint.
    pub theta: f64,
    /// Probabilities indexed like [`RelationKind::ALL`].
    pub relationship_weights: [f64; 5],
}

impl Default for InteractionParams {
    fn default() -> Self {
        Self { theta: 0.30, relationship_weights: [0.25, 0.20, 0.20, 0.15, 0.20] }
    }
}

impl InteractionParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if self.relationship_weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter("relationship weights must be non-negative".into()));
        }
        let sum: f64 = self.relationship_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("relationship weights sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Only free-standing placements; used for the single-object baseline.
    pub fn free_standing_only(theta: f64) -> Self {
        Self { theta, relationship_weights: [1.0, 0.0, 0.0, 0.0, 0.0] }
    }
}

/// Inclusive instance-count range per family, indexed by [`Family::index`].
/// The lower bound counts as mandatory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassMix {
    pub ranges: [(u32, u32); 5],
}

impl Default for ClassMix {
    fn default() -> Self {
        // human, table, chair, plant, storage
        Self { ranges: [(1, 1), (1, 2), (1, 2), (1, 2), (1, 1)] }
    }
}

impl ClassMix {
    pub fn none() -> Self {
        Self { ranges: [(0, 0); 5] }
    }

    pub fn range(&self, family: Family) -> (u32, u32) {
        self.ranges[family.index()]
    }

    pub fn set(&mut self, family: Family, min: u32, max: u32) {
        self.ranges[family.index()] = (min, max);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneConfig {
    /// Scene width and depth in meters.
    pub extent: (f64, f64),
    pub camera_height: f64,
    pub interaction: InteractionParams,
    pub class_mix: ClassMix,
    /// Skeleton scale range; the default maps the 1.60 m canonical stature
    /// onto 1.60-1.90 m.
    pub beta_range: (f64, f64),
    pub max_rejections: u32,
    pub max_humans: u32,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            extent: (4.0, 3.0),
            camera_height: 3.5,
            interaction: InteractionParams::default(),
            class_mix: ClassMix::default(),
            beta_range: (HUMAN_HEIGHT.0 / CANONICAL_STATURE, HUMAN_HEIGHT.1 / CANONICAL_STATURE),
            max_rejections: 100,
            max_humans: 1,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        self.interaction.validate()?;
        let (w, h) = self.extent;
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::InvalidParameter(format!("scene extent must be positive, got {w}x{h}")));
        }
        if !(self.camera_height > 0.0) {
            return Err(Error::InvalidParameter("camera height must be positive".into()));
        }
        let (b0, b1) = self.beta_range;
        if !(b0 > 0.0 && b0 <= b1) {
            return Err(Error::InvalidParameter(format!("invalid skeleton scale range [{b0}, {b1}]")));
        }
        for f in Family::ALL {
            let (lo, hi) = self.class_mix.range(f);
            if lo > hi {
                return Err(Error::InvalidParameter(format!("class mix for {f}: min {lo} > max {hi}")));
            }
        }
        if self.class_mix.range(Family::Human).1 > self.max_humans {
            return Err(Error::InvalidParameter(format!(
                "class mix allows more than {} humans per scene",
                self.max_humans
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InstanceKind {
    Human { pose_id: usize, beta: f64 },
    Furniture { preset: u8 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectInstance {
    pub family: Family,
    pub kind: InstanceKind,
    /// Stature for humans, top height above the base for furniture.
    pub height: f64,
    pub position: Vec2,
    /// Radians about the vertical axis, in `[0, 2pi)`.
    pub orientation: f64,
    /// Elevation of the instance base; non-zero only when stacked.
    pub base_z: f64,
    pub relation: Relation,
    /// Geometry in the local frame.
    pub solids: Vec<Solid>,
}

impl ObjectInstance {
    /// World height of the highest surface.
    pub fn top(&self) -> f64 {
        self.base_z + self.solids.iter().map(|s| s.local_bounds().2).fold(0.0, f64::max)
    }

    fn local_rect(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for s in &self.solids {
            let (a, b, _) = s.local_bounds();
            lo = Vec2::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Vec2::new(hi.x.max(b.x), hi.y.max(b.y));
        }
        (lo, hi)
    }

    /// Top-view footprint: the oriented bounding rectangle of all solids.
    pub fn footprint(&self) -> ConvexPolygon {
        footprint_at(self.local_rect(), self.position, self.orientation)
    }
}

fn footprint_at((lo, hi): (Vec2, Vec2), position: Vec2, orientation: f64) -> ConvexPolygon {
    let center = (lo + hi) * 0.5;
    let half = (hi - lo) * 0.5;
    ConvexPolygon::oriented_rect(position, orientation, center, half.x, half.y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneGraph {
    pub instances: Vec<ObjectInstance>,
    pub extent: (f64, f64),
    pub camera_height: f64,
    pub seed: u64,
    /// Optional instances abandoned after exhausting the rejection budget.
    pub dropped: Vec<Family>,
}

impl SceneGraph {
    pub fn empty(extent: (f64, f64), camera_height: f64, seed: u64) -> Self {
        Self { instances: Vec::new(), extent, camera_height, seed, dropped: Vec::new() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

const CLEARANCE_EPS: f64 = 1e-9;

/// Pairwise validation of two placed instances.
///
/// Accepts when the footprint overlap (intersection over the smaller
/// footprint) is at most `theta`, or when one of them was stacked and rests
/// at or above the other's top surface.
pub fn check_interaction(a: &ObjectInstance, b: &ObjectInstance, params: &InteractionParams) -> Verdict {
    let overlap = overlap_fraction(&a.footprint(), &b.footprint());
    if overlap <= params.theta + 1e-12 {
        return Verdict::Accept;
    }
    let stacked_clear = |upper: &ObjectInstance, lower: &ObjectInstance| {
        upper.relation.kind == RelationKind::StackedOnTop && upper.base_z >= lower.top() - CLEARANCE_EPS
    };
    if stacked_clear(a, b) || stacked_clear(b, a) {
        Verdict::Accept
    } else {
        Verdict::Reject
    }
}

// Placement order lets stacked plants and touching humans find anchors.
const PLACEMENT_ORDER: [Family; 5] =
    [Family::Storage, Family::Table, Family::Chair, Family::Human, Family::Plant];

/// Draws a scene from the interaction density. Pure function of
/// `(config, poses, seed)`.
pub fn sample_scene(config: &SceneConfig, poses: &PoseLibrary, seed: u64) -> Result<SceneGraph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scene = SceneGraph::empty(config.extent, config.camera_height, seed);

    let mut counts = [0u32; 5];
    for f in PLACEMENT_ORDER {
        let (lo, hi) = config.class_mix.range(f);
        counts[f.index()] = rng.random_range(lo..=hi);
    }
    for family in PLACEMENT_ORDER {
        let (mandatory, _) = config.class_mix.range(family);
        for k in 0..counts[family.index()] {
            match place_instance(config, poses, family, &scene.instances, &mut rng)? {
                Some(inst) => scene.instances.push(inst),
                None if k < mandatory => {
                    return Err(Error::SceneGeneration { family, attempts: config.max_rejections });
                }
                None => {
                    log::debug!("scene {seed}: dropped {family} after {} rejections", config.max_rejections);
                    scene.dropped.push(family);
                }
            }
        }
    }
    Ok(scene)
}

/// Baseline generator: one free-standing instance of a uniformly chosen
/// family, with no inter-object relationships.
pub fn sample_single_object_scene(config: &SceneConfig, poses: &PoseLibrary, seed: u64) -> Result<SceneGraph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scene = SceneGraph::empty(config.extent, config.camera_height, seed);
    let family = Family::ALL[rng.random_range(0..Family::ALL.len())];
    let free = SceneConfig {
        interaction: InteractionParams::free_standing_only(config.interaction.theta),
        ..config.clone()
    };
    let inst = place_instance(&free, poses, family, &[], &mut rng)?
        .ok_or(Error::SceneGeneration { family, attempts: config.max_rejections })?;
    scene.instances.push(inst);
    Ok(scene)
}

/// Samples the intrinsic terms of one instance: height, preset or pose, scale.
fn sample_intrinsics(
    config: &SceneConfig,
    poses: &PoseLibrary,
    family: Family,
    rng: &mut ChaCha8Rng,
) -> Result<(InstanceKind, f64, Vec<Solid>)> {
    match family {
        Family::Human => {
            if poses.is_empty() {
                return Err(Error::InvalidParameter("pose library is empty".into()));
            }
            let pose_id = rng.random_range(0..poses.len());
            let (b0, b1) = config.beta_range;
            let nominal = if b1 > b0 { rng.random_range(b0..b1) } else { b0 };
            let canonical = &poses.poses[pose_id];
            let stature = CANONICAL_STATURE * nominal;
            // authored poses deviate slightly from the nominal stature
            let beta = stature / canonical.stature().unwrap_or(CANONICAL_STATURE);
            let skeleton = apply_skeleton_scale(canonical, beta)?;
            let solids = skeleton
                .spheres
                .iter()
                .map(|s| Solid { shape: Shape::Sphere { center: s.center, radius: s.radius }, class: s.part })
                .collect();
            Ok((InstanceKind::Human { pose_id, beta }, stature, solids))
        }
        _ => {
            let (lo, hi) = if family == Family::Plant { PLANT_HEIGHT } else { FURNITURE_HEIGHT };
            let height = rng.random_range(lo..hi);
            let preset = rng.random_range(0..PRESETS_PER_FAMILY);
            Ok((InstanceKind::Furniture { preset }, height, furniture_solids(family, preset, height)))
        }
    }
}

fn place_instance(
    config: &SceneConfig,
    poses: &PoseLibrary,
    family: Family,
    placed: &[ObjectInstance],
    rng: &mut ChaCha8Rng,
) -> Result<Option<ObjectInstance>> {
    let (kind, height, solids) = sample_intrinsics(config, poses, family, rng)?;
    let mut inst = ObjectInstance {
        family,
        kind,
        height,
        position: Vec2::default(),
        orientation: 0.0,
        base_z: 0.0,
        relation: Relation::FREE,
        solids,
    };
    let local = inst.local_rect();
    let (w, h) = config.extent;

    for _ in 0..config.max_rejections {
        inst.orientation = rng.random_range(0.0..TAU);
        inst.base_z = 0.0;
        let relation = draw_relation(&config.interaction, family, placed, rng);
        inst.relation = relation;
        let position = match (relation.kind, relation.anchor) {
            (RelationKind::FreeStanding, _) | (_, None) => {
                Vec2::new(rng.random_range(0.0..w), rng.random_range(0.0..h))
            }
            (RelationKind::StackedOnTop, Some(a)) => {
                let anchor = &placed[a];
                inst.base_z = anchor.top();
                let (alo, ahi) = anchor.local_rect();
                let half = (local.1 - local.0) * 0.5;
                // keep the stacked footprint's center inside the support top
                let lx = sample_between(rng, alo.x + half.x.min(0.5 * (ahi.x - alo.x)), ahi.x - half.x.min(0.5 * (ahi.x - alo.x)));
                let ly = sample_between(rng, alo.y + half.y.min(0.5 * (ahi.y - alo.y)), ahi.y - half.y.min(0.5 * (ahi.y - alo.y)));
                anchor.position + Vec2::new(lx, ly).rotated(anchor.orientation)
            }
            (RelationKind::AdjacentContact, Some(a)) => {
                let dir = Vec2::new(1.0, 0.0).rotated(rng.random_range(0.0..TAU));
                offset_for_overlap(&placed[a], local, inst.orientation, dir, 0.0)
            }
            (RelationKind::PartialOcclusion, Some(a)) => {
                let dir = Vec2::new(1.0, 0.0).rotated(rng.random_range(0.0..TAU));
                let target = rng.random_range(0.0..=config.interaction.theta);
                offset_for_overlap(&placed[a], local, inst.orientation, dir, target)
            }
            (RelationKind::HumanTouching, Some(a)) => {
                // face the anchor: step back along the facing direction
                let facing = Vec2::new(1.0, 0.0).rotated(inst.orientation);
                let target = rng.random_range(0.0..=config.interaction.theta);
                offset_for_overlap(&placed[a], local, inst.orientation, facing * -1.0, target)
            }
        };
        if !(0.0..w).contains(&position.x) || !(0.0..h).contains(&position.y) {
            continue;
        }
        inst.position = position;
        if placed
            .iter()
            .all(|other| check_interaction(&inst, other, &config.interaction) == Verdict::Accept)
        {
            return Ok(Some(inst));
        }
    }
    Ok(None)
}

fn sample_between(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        0.5 * (lo + hi)
    }
}

fn draw_relation(
    params: &InteractionParams,
    family: Family,
    placed: &[ObjectInstance],
    rng: &mut ChaCha8Rng,
) -> Relation {
    let u: f64 = rng.random_range(0.0..1.0);
    let mut acc = 0.0;
    let mut kind = RelationKind::FreeStanding;
    for (k, w) in RelationKind::ALL.iter().zip(params.relationship_weights) {
        acc += w;
        if u < acc {
            kind = *k;
            break;
        }
    }
    let on_floor = |i: &ObjectInstance| i.base_z == 0.0;
    let candidates: Vec<usize> = placed
        .iter()
        .enumerate()
        .filter(|(_, p)| match kind {
            RelationKind::FreeStanding => false,
            RelationKind::AdjacentContact | RelationKind::PartialOcclusion => on_floor(p),
            RelationKind::StackedOnTop => {
                family == Family::Plant
                    && on_floor(p)
                    && matches!(p.family, Family::Table | Family::Storage)
            }
            RelationKind::HumanTouching => {
                family == Family::Human && on_floor(p) && p.family != Family::Human
            }
        })
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return Relation::FREE;
    }
    let anchor = candidates[rng.random_range(0..candidates.len())];
    Relation { kind, anchor: Some(anchor) }
}

/// Position along `dir` from the anchor at which the candidate footprint
/// overlaps the anchor by `target` (fraction of the smaller footprint).
/// Overlap decreases monotonically with distance for these centrally
/// symmetric rectangles, so bisection applies.
fn offset_for_overlap(
    anchor: &ObjectInstance,
    local: (Vec2, Vec2),
    orientation: f64,
    dir: Vec2,
    target: f64,
) -> Vec2 {
    let anchor_fp = anchor.footprint();
    let center = |fp: &ConvexPolygon| {
        let n = fp.vertices.len() as f64;
        fp.vertices.iter().fold(Vec2::default(), |a, &v| a + v) * (1.0 / n)
    };
    let anchor_center = center(&anchor_fp);
    let cand0 = footprint_at(local, Vec2::default(), orientation);
    let cand_center = center(&cand0);
    let reach = |fp: &ConvexPolygon, c: Vec2| {
        fp.vertices.iter().map(|&v| {
            let d = v - c;
            (d.x * d.x + d.y * d.y).sqrt()
        }).fold(0.0, f64::max)
    };
    let place = |d: f64| anchor_center + dir * d - cand_center;
    let overlap_at = |d: f64| overlap_fraction(&anchor_fp, &cand0.translated(place(d)));

    let mut lo = 0.0;
    let mut hi = reach(&anchor_fp, anchor_center) + reach(&cand0, cand_center) + 1e-6;
    if overlap_at(lo) <= target {
        return place(lo);
    }
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if overlap_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    place(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::ObjectClass;

    fn unit_box(x: f64, y: f64) -> ObjectInstance {
        ObjectInstance {
            family: Family::Storage,
            kind: InstanceKind::Furniture { preset: 2 },
            height: 0.8,
            position: Vec2::new(x, y),
            orientation: 0.0,
            base_z: 0.0,
            relation: Relation::FREE,
            solids: vec![Solid {
                shape: Shape::Box { center: Vec2::default(), half: Vec2::new(0.5, 0.5), z0: 0.0, z1: 0.8 },
                class: ObjectClass::Storage,
            }],
        }
    }

    #[test]
    fn identical_boxes_reject() {
        let p = InteractionParams::default();
        assert_eq!(check_interaction(&unit_box(1.0, 1.0), &unit_box(1.0, 1.0), &p), Verdict::Reject);
    }

    #[test]
    fn disjoint_boxes_accept() {
        let p = InteractionParams::default();
        assert_eq!(check_interaction(&unit_box(1.0, 1.0), &unit_box(3.0, 1.0), &p), Verdict::Accept);
    }

    #[test]
    fn overlap_threshold_boundary() {
        let p = InteractionParams::default();
        // intersection 0.25 of each unit square
        assert_eq!(check_interaction(&unit_box(1.0, 1.0), &unit_box(1.75, 1.0), &p), Verdict::Accept);
        // intersection 0.35
        assert_eq!(check_interaction(&unit_box(1.0, 1.0), &unit_box(1.65, 1.0), &p), Verdict::Reject);
    }

    #[test]
    fn stacked_needs_clearance() {
        let p = InteractionParams::default();
        let lower = unit_box(1.0, 1.0);
        let mut upper = unit_box(1.0, 1.0);
        upper.relation = Relation { kind: RelationKind::StackedOnTop, anchor: Some(0) };
        upper.base_z = 0.8;
        assert_eq!(check_interaction(&upper, &lower, &p), Verdict::Accept);
        assert_eq!(check_interaction(&lower, &upper, &p), Verdict::Accept);
        upper.base_z = 0.5;
        assert_eq!(check_interaction(&upper, &lower, &p), Verdict::Reject);
    }

    #[test]
    fn same_seed_same_scene() {
        let poses = PoseLibrary::bundled();
        let cfg = SceneConfig::default();
        let a = sample_scene(&cfg, &poses, 42).unwrap();
        let b = sample_scene(&cfg, &poses, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_scene(&cfg, &poses, 43).unwrap());
    }

    #[test]
    fn empty_mix_gives_empty_scene() {
        let cfg = SceneConfig { class_mix: ClassMix::none(), ..SceneConfig::default() };
        let s = sample_scene(&cfg, &PoseLibrary::bundled(), 7).unwrap();
        assert!(s.instances.is_empty());
    }

    #[test]
    fn tiny_extent_fails_with_family() {
        let mut mix = ClassMix::none();
        mix.set(Family::Table, 3, 3);
        let cfg = SceneConfig { extent: (0.5, 0.5), class_mix: mix, max_rejections: 20, ..SceneConfig::default() };
        match sample_scene(&cfg, &PoseLibrary::bundled(), 1) {
            Err(Error::SceneGeneration { family: Family::Table, attempts: 20 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut cfg = SceneConfig::default();
        cfg.interaction.relationship_weights = [0.5, 0.0, 0.0, 0.0, 0.0];
        assert!(sample_scene(&cfg, &PoseLibrary::bundled(), 1).is_err());
        let mut cfg = SceneConfig::default();
        cfg.interaction.theta = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = SceneConfig::default();
        cfg.class_mix.set(Family::Human, 2, 2);
        assert!(cfg.validate().is_err());
        cfg.max_humans = 2;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn scenes_satisfy_pairwise_checks() {
        let poses = PoseLibrary::bundled();
        let cfg = SceneConfig::default();
        for seed in 0..200 {
            let s = sample_scene(&cfg, &poses, seed).unwrap();
            assert!(s.instances.iter().filter(|i| i.family == Family::Human).count() <= 1);
            for (i, a) in s.instances.iter().enumerate() {
                assert!((0.0..TAU).contains(&a.orientation));
                assert!((0.0..cfg.extent.0).contains(&a.position.x));
                assert!((0.0..cfg.extent.1).contains(&a.position.y));
                for b in &s.instances[i + 1..] {
                    assert_eq!(check_interaction(a, b, &cfg.interaction), Verdict::Accept);
                }
            }
        }
    }

    #[test]
    fn single_object_scenes_hold_one_instance() {
        let poses = PoseLibrary::bundled();
        let cfg = SceneConfig::default();
        for seed in 0..50 {
            let s = sample_single_object_scene(&cfg, &poses, seed).unwrap();
            assert_eq!(s.instances.len(), 1);
            assert_eq!(s.instances[0].relation, Relation::FREE);
        }
    }
}
