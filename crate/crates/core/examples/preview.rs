//! Writes PGM/PPM previews of a few sampled scenes to a directory.

use std::io::Write;

use hoiseg::scene::{sample_scene, PoseLibrary, SceneConfig};
use hoiseg::{render, Camera};

const PALETTE: [[u8; 3]; 11] = [
    [230, 25, 75], [60, 180, 75], [255, 225, 25], [0, 130, 200], [245, 130, 48],
    [145, 30, 180], [70, 240, 240], [240, 50, 230], [210, 245, 60], [250, 190, 212],
    [40, 40, 40],
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "preview".into());
    std::fs::create_dir_all(&out)?;
    let poses = PoseLibrary::bundled();
    let cfg = SceneConfig::default();
    for seed in 0..4u64 {
        let scene = sample_scene(&cfg, &poses, seed)?;
        let (d, l) = render(&scene, &Camera::orthographic(320, 240))?;
        let mut pgm = format!("P5 {} {} 255\n", d.width, d.height).into_bytes();
        pgm.extend(d.depth.iter().map(|&v| (255.0 * (1.0 - v / 3.5)).clamp(0.0, 255.0) as u8));
        std::fs::write(format!("{out}/depth_{seed}.pgm"), pgm)?;
        let mut f = std::fs::File::create(format!("{out}/labels_{seed}.ppm"))?;
        writeln!(f, "P6 {} {} 255", l.width, l.height)?;
        for &c in &l.labels {
            f.write_all(&PALETTE[c as usize])?;
        }
        println!("seed {seed}: {} instances", scene.instances.len());
    }
    Ok(())
}
