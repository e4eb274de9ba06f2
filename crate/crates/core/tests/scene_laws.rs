use hoiseg::scene::{
    apply_skeleton_scale, check_interaction, sample_scene, InstanceKind, PoseLibrary, SceneConfig, Verdict,
    HUMAN_HEIGHT,
};
use hoiseg::{render, Camera, Family, ObjectClass};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_keeps_highest_sphere(pose in 0usize..13, beta in 0.05f64..20.0) {
        let poses = PoseLibrary::bundled();
        let canonical = &poses.poses[pose % poses.len()];
        let scaled = apply_skeleton_scale(canonical, beta).unwrap();
        prop_assert_eq!(canonical.highest_sphere(), scaled.highest_sphere());
    }

    #[test]
    fn sampled_scenes_revalidate(seed in any::<u64>(), theta in 0.0f64..0.6) {
        let poses = PoseLibrary::bundled();
        let mut config = SceneConfig::default();
        config.interaction.theta = theta;
        if let Ok(scene) = sample_scene(&config, &poses, seed) {
            for (i, a) in scene.instances.iter().enumerate() {
                for b in &scene.instances[i + 1..] {
                    prop_assert_eq!(check_interaction(a, b, &config.interaction), Verdict::Accept);
                }
            }
        }
    }
}

#[test]
fn human_statures_follow_scale() {
    let poses = PoseLibrary::bundled();
    let config = SceneConfig::default();
    let mut seen = 0;
    for seed in 0..2000 {
        let scene = sample_scene(&config, &poses, seed).unwrap();
        for inst in scene.instances.iter().filter(|i| i.family == Family::Human) {
            let InstanceKind::Human { pose_id, beta } = inst.kind else { panic!("human without pose") };
            assert!((HUMAN_HEIGHT.0..=HUMAN_HEIGHT.1).contains(&inst.height), "{}", inst.height);
            let skeleton = apply_skeleton_scale(&poses.poses[pose_id], beta).unwrap();
            assert!((skeleton.stature().unwrap() - inst.height).abs() < 1e-9);
            seen += 1;
        }
    }
    assert_eq!(seen, 2000);
}

#[test]
fn rendered_labels_come_from_placed_families() {
    let poses = PoseLibrary::bundled();
    let config = SceneConfig::default();
    for seed in 0..20 {
        let scene = sample_scene(&config, &poses, seed).unwrap();
        let (depth, labels) = render(&scene, &Camera::orthographic(160, 120)).unwrap();
        for (&l, &d) in labels.labels.iter().zip(&depth.depth) {
            let class = ObjectClass::from_id(l).unwrap();
            if class == ObjectClass::Background {
                assert_eq!(d, config.camera_height as f32);
            } else {
                assert!(d < config.camera_height as f32);
                let family = if class.is_body_part() {
                    Family::Human
                } else {
                    *Family::ALL.iter().find(|f| f.furniture_class() == Some(class)).unwrap()
                };
                assert!(scene.instances.iter().any(|i| i.family == family));
            }
        }
    }
}
