//! Scene vocabulary and the interaction-density sampler.

mod primitives;
mod sampler;
mod skeleton;

pub use primitives::{furniture_solids, Shape, Solid, PRESETS_PER_FAMILY};
pub use sampler::{
    check_interaction, sample_scene, sample_single_object_scene, ClassMix, InstanceKind,
    InteractionParams, ObjectInstance, Relation, RelationKind, SceneConfig, SceneGraph, Verdict,
    FURNITURE_HEIGHT, HUMAN_HEIGHT, PLANT_HEIGHT,
};
pub use skeleton::{
    apply_skeleton_scale, BodySphere, HumanSkeleton, Joint, PoseLibrary, BUNDLED_POSES,
    CANONICAL_STATURE,
};
