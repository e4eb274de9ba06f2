//! Top-view depth and label rasterization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::class::ObjectClass;
use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::scene::{SceneGraph, Shape};

/// Depth raster in meters, row-major. Invalid pixels are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthFrame {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f32>,
}

impl DepthFrame {
    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self { width, height, depth: vec![value; width * height] }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.depth[y * self.width + x]
    }
}

/// Per-pixel class ids, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelFrame {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u8>,
}

impl LabelFrame {
    pub fn filled(width: usize, height: usize, class: ObjectClass) -> Self {
        Self { width, height, labels: vec![class.id(); width * height] }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projection {
    /// Parallel downward rays covering the scene extent.
    Orthographic,
    /// Pinhole at the scene center looking straight down.
    Pinhole { vertical_fov_deg: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub width: usize,
    pub height: usize,
    pub projection: Projection,
}

impl Camera {
    pub fn orthographic(width: usize, height: usize) -> Self {
        Self { width, height, projection: Projection::Orthographic }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(format!(
                "camera resolution must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if let Projection::Pinhole { vertical_fov_deg } = self.projection {
            if !(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0) {
                return Err(Error::InvalidParameter(format!("field of view {vertical_fov_deg} out of range")));
            }
        }
        Ok(())
    }
}

// World-space solid with its class and a conservative bounding box.
struct WorldSolid {
    geom: WorldShape,
    class: u8,
    lo: Vec3,
    hi: Vec3,
}

enum WorldShape {
    Box { center: Vec2, cos: f64, sin: f64, half: Vec2, z0: f64, z1: f64 },
    Cylinder { center: Vec2, radius: f64, z0: f64, z1: f64 },
    Ellipsoid { center: Vec3, cos: f64, sin: f64, radii: Vec3 },
    Sphere { center: Vec3, radius: f64 },
}

fn world_solids(scene: &SceneGraph) -> Vec<WorldSolid> {
    let mut out = Vec::new();
    for inst in &scene.instances {
        let (sin, cos) = inst.orientation.sin_cos();
        let to_world = |p: Vec2| inst.position + p.rotated(inst.orientation);
        let z = inst.base_z;
        for s in &inst.solids {
            let (geom, lo, hi) = match s.shape {
                Shape::Box { center, half, z0, z1 } => {
                    let c = to_world(center);
                    let ex = half.x * cos.abs() + half.y * sin.abs();
                    let ey = half.x * sin.abs() + half.y * cos.abs();
                    (
                        WorldShape::Box { center: c, cos, sin, half, z0: z0 + z, z1: z1 + z },
                        Vec3::new(c.x - ex, c.y - ey, z0 + z),
                        Vec3::new(c.x + ex, c.y + ey, z1 + z),
                    )
                }
                Shape::Cylinder { center, radius, z0, z1 } => {
                    let c = to_world(center);
                    (
                        WorldShape::Cylinder { center: c, radius, z0: z0 + z, z1: z1 + z },
                        Vec3::new(c.x - radius, c.y - radius, z0 + z),
                        Vec3::new(c.x + radius, c.y + radius, z1 + z),
                    )
                }
                Shape::Ellipsoid { center, radii } => {
                    let c2 = to_world(center.xy());
                    let c = Vec3::new(c2.x, c2.y, center.z + z);
                    let r = radii.x.max(radii.y);
                    (
                        WorldShape::Ellipsoid { center: c, cos, sin, radii },
                        Vec3::new(c.x - r, c.y - r, c.z - radii.z),
                        Vec3::new(c.x + r, c.y + r, c.z + radii.z),
                    )
                }
                Shape::Sphere { center, radius } => {
                    let c2 = to_world(center.xy());
                    let c = Vec3::new(c2.x, c2.y, center.z + z);
                    (
                        WorldShape::Sphere { center: c, radius },
                        Vec3::new(c.x - radius, c.y - radius, c.z - radius),
                        Vec3::new(c.x + radius, c.y + radius, c.z + radius),
                    )
                }
            };
            out.push(WorldSolid { geom, class: s.class.id(), lo, hi });
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Ray {
    origin: Vec3,
    dir: Vec3,
}

// Entry parameter of the ray into [lo, hi] along one axis, or None.
fn slab_interval(o: f64, d: f64, lo: f64, hi: f64, t0: &mut f64, t1: &mut f64) -> bool {
    if d.abs() < 1e-15 {
        return o >= lo && o <= hi;
    }
    let (mut a, mut b) = ((lo - o) / d, (hi - o) / d);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    *t0 = t0.max(a);
    *t1 = t1.min(b);
    *t0 <= *t1
}

fn hit_aabb(ray: &Ray, lo: Vec3, hi: Vec3) -> bool {
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    slab_interval(ray.origin.x, ray.dir.x, lo.x, hi.x, &mut t0, &mut t1)
        && slab_interval(ray.origin.y, ray.dir.y, lo.y, hi.y, &mut t0, &mut t1)
        && slab_interval(ray.origin.z, ray.dir.z, lo.z, hi.z, &mut t0, &mut t1)
}

fn unit_sphere_hit(o: Vec3, d: Vec3) -> Option<f64> {
    let a = d.dot(d);
    let b = o.dot(d);
    let c = o.dot(o) - 1.0;
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let t = (-b - disc.sqrt()) / a;
    (t >= 0.0).then_some(t)
}

impl WorldShape {
    fn intersect(&self, ray: &Ray) -> Option<f64> {
        match *self {
            WorldShape::Sphere { center, radius } => {
                let inv = 1.0 / radius;
                unit_sphere_hit((ray.origin - center).scaled(inv), ray.dir.scaled(inv))
            }
            WorldShape::Ellipsoid { center, cos, sin, radii } => {
                let rel = ray.origin - center;
                let o = Vec3::new(
                    (cos * rel.x + sin * rel.y) / radii.x,
                    (-sin * rel.x + cos * rel.y) / radii.y,
                    rel.z / radii.z,
                );
                let d = Vec3::new(
                    (cos * ray.dir.x + sin * ray.dir.y) / radii.x,
                    (-sin * ray.dir.x + cos * ray.dir.y) / radii.y,
                    ray.dir.z / radii.z,
                );
                unit_sphere_hit(o, d)
            }
            WorldShape::Box { center, cos, sin, half, z0, z1 } => {
                let rx = ray.origin.x - center.x;
                let ry = ray.origin.y - center.y;
                let ox = cos * rx + sin * ry;
                let oy = -sin * rx + cos * ry;
                let dx = cos * ray.dir.x + sin * ray.dir.y;
                let dy = -sin * ray.dir.x + cos * ray.dir.y;
                let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
                (slab_interval(ox, dx, -half.x, half.x, &mut t0, &mut t1)
                    && slab_interval(oy, dy, -half.y, half.y, &mut t0, &mut t1)
                    && slab_interval(ray.origin.z, ray.dir.z, z0, z1, &mut t0, &mut t1))
                .then_some(t0)
            }
            WorldShape::Cylinder { center, radius, z0, z1 } => {
                let mut best: Option<f64> = None;
                let r2 = radius * radius;
                if ray.dir.z < 0.0 {
                    let t = (z1 - ray.origin.z) / ray.dir.z;
                    let px = ray.origin.x + t * ray.dir.x - center.x;
                    let py = ray.origin.y + t * ray.dir.y - center.y;
                    if t >= 0.0 && px * px + py * py <= r2 {
                        best = Some(t);
                    }
                }
                let ox = ray.origin.x - center.x;
                let oy = ray.origin.y - center.y;
                let a = ray.dir.x * ray.dir.x + ray.dir.y * ray.dir.y;
                if a > 1e-15 {
                    let b = ox * ray.dir.x + oy * ray.dir.y;
                    let c = ox * ox + oy * oy - r2;
                    let disc = b * b - a * c;
                    if disc >= 0.0 {
                        let t = (-b - disc.sqrt()) / a;
                        let z = ray.origin.z + t * ray.dir.z;
                        if t >= 0.0 && z >= z0 && z <= z1 {
                            best = Some(best.map_or(t, |b: f64| b.min(t)));
                        }
                    }
                }
                best
            }
        }
    }
}

/// Renders the scene's depth (distance below the camera plane) and the class
/// of the nearest surface along each pixel's ray. Rays that hit nothing see
/// the floor at `camera_height`, labeled background. Ties go to the lower
/// class id, so the result does not depend on instance order.
pub fn render(scene: &SceneGraph, camera: &Camera) -> Result<(DepthFrame, LabelFrame)> {
    camera.validate()?;
    let (ew, eh) = scene.extent;
    if !(ew > 0.0 && eh > 0.0) {
        return Err(Error::InvalidParameter("scene extent must be positive".into()));
    }
    let cam_h = scene.camera_height;
    let solids = world_solids(scene);
    let (w, h) = (camera.width, camera.height);
    let mut depth = DepthFrame::filled(w, h, 0.0);
    let mut labels = LabelFrame::filled(w, h, ObjectClass::Background);

    let focal = match camera.projection {
        Projection::Orthographic => None,
        Projection::Pinhole { vertical_fov_deg } => {
            Some((h as f64 / 2.0) / (vertical_fov_deg.to_radians() / 2.0).tan())
        }
    };
    let ray_for = |x: usize, y: usize| -> Ray {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        match focal {
            None => Ray {
                origin: Vec3::new(px * ew / w as f64, py * eh / h as f64, cam_h),
                dir: Vec3::new(0.0, 0.0, -1.0),
            },
            Some(f) => Ray {
                origin: Vec3::new(ew / 2.0, eh / 2.0, cam_h),
                dir: Vec3::new((px - w as f64 / 2.0) / f, (py - h as f64 / 2.0) / f, -1.0),
            },
        }
    };

    let render_row = |y: usize, drow: &mut [f32], lrow: &mut [u8]| {
        for x in 0..w {
            let ray = ray_for(x, y);
            // floor hit
            let mut best_t = cam_h / -ray.dir.z;
            let mut best_class = ObjectClass::Background.id();
            for s in &solids {
                if !hit_aabb(&ray, s.lo, s.hi) {
                    continue;
                }
                if let Some(t) = s.geom.intersect(&ray) {
                    if t < best_t || (t == best_t && s.class < best_class) {
                        best_t = t;
                        best_class = s.class;
                    }
                }
            }
            let z_hit = if best_class == ObjectClass::Background.id() {
                0.0
            } else {
                cam_h + best_t * ray.dir.z
            };
            drow[x] = (cam_h - z_hit) as f32;
            lrow[x] = best_class;
        }
    };

    crate::par::for_each_row_pair(&mut depth.depth, &mut labels.labels, w, render_row);
    Ok((depth, labels))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    /// Standard deviation in meters.
    pub sigma: f64,
    pub seed: u64,
    /// Upper clamp is `camera_height + 3 sigma`.
    pub camera_height: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { sigma: 0.15, seed: 0, camera_height: 3.5 }
    }
}

/// Pluggable sensor-noise stage applied to rendered depth.
pub trait DepthNoise {
    fn apply(&self, frame: &DepthFrame) -> DepthFrame;
}

impl DepthNoise for NoiseParams {
    fn apply(&self, frame: &DepthFrame) -> DepthFrame {
        add_noise(frame, self)
    }
}

const MIN_DEPTH: f32 = 1e-3;

/// Adds independent zero-mean Gaussian noise per pixel, clamped to
/// `(0, camera_height + 3 sigma]`. NaN pixels stay NaN.
pub fn add_noise(frame: &DepthFrame, params: &NoiseParams) -> DepthFrame {
    if params.sigma <= 0.0 {
        return frame.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let upper = params.camera_height + 3.0 * params.sigma;
    let depth = frame
        .depth
        .iter()
        .map(|&d| {
            let n: f64 = StandardNormal.sample(&mut rng);
            if d.is_nan() {
                return d;
            }
            let v = (d as f64 + params.sigma * n).min(upper) as f32;
            v.max(MIN_DEPTH)
        })
        .collect();
    DepthFrame { width: frame.width, height: frame.height, depth }
}
