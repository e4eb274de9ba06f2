//! Parametric solids standing in for furniture and human geometry.
//!
//! Solids live in an instance's local frame: x forward, y left, z up from the
//! instance base. Each furniture family has four presets.

use crate::class::{Family, ObjectClass};
use crate::geometry::{Vec2, Vec3};

/// Number of geometry presets per furniture family.
pub const PRESETS_PER_FAMILY: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// Axis-aligned (in the local frame) box.
    Box { center: Vec2, half: Vec2, z0: f64, z1: f64 },
    /// Vertical cylinder.
    Cylinder { center: Vec2, radius: f64, z0: f64, z1: f64 },
    /// Axis-aligned ellipsoid.
    Ellipsoid { center: Vec3, radii: Vec3 },
    Sphere { center: Vec3, radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Solid {
    pub shape: Shape,
    pub class: ObjectClass,
}

impl Solid {
    /// Local-frame bounding box as (min xy, max xy, max z).
    pub fn local_bounds(&self) -> (Vec2, Vec2, f64) {
        match self.shape {
            Shape::Box { center, half, z1, .. } => (center - half, center + half, z1),
            Shape::Cylinder { center, radius, z1, .. } => {
                let r = Vec2::new(radius, radius);
                (center - r, center + r, z1)
            }
            Shape::Ellipsoid { center, radii } => {
                let c = center.xy();
                let r = radii.xy();
                (c - r, c + r, center.z + radii.z)
            }
            Shape::Sphere { center, radius } => {
                let c = center.xy();
                let r = Vec2::new(radius, radius);
                (c - r, c + r, center.z + radius)
            }
        }
    }
}

fn slab(class: ObjectClass, cx: f64, cy: f64, hx: f64, hy: f64, z0: f64, z1: f64) -> Solid {
    Solid { shape: Shape::Box { center: Vec2::new(cx, cy), half: Vec2::new(hx, hy), z0, z1 }, class }
}

fn cylinder(class: ObjectClass, cx: f64, cy: f64, r: f64, z0: f64, z1: f64) -> Solid {
    Solid { shape: Shape::Cylinder { center: Vec2::new(cx, cy), radius: r, z0, z1 }, class }
}

/// Builds the solids of a furniture preset whose top sits at `height`.
///
/// Panics if `family` is [`Family::Human`].
pub fn furniture_solids(family: Family, preset: u8, height: f64) -> Vec<Solid> {
    let preset = preset % PRESETS_PER_FAMILY;
    match family {
        Family::Table => table(preset, height),
        Family::Chair => chair(preset, height),
        Family::Storage => storage(preset, height),
        Family::Plant => plant(preset, height),
        Family::Human => panic!("humans are built from skeletons"),
    }
}

fn table(preset: u8, h: f64) -> Vec<Solid> {
    let c = ObjectClass::Table;
    let top = 0.04;
    let legs = |hx: f64, hy: f64| -> Vec<Solid> {
        let mut v = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                v.push(slab(c, sx * (hx - 0.05), sy * (hy - 0.05), 0.025, 0.025, 0.0, h - top));
            }
        }
        v
    };
    match preset {
        // rectangular
        0 => {
            let mut v = legs(0.70, 0.40);
            v.push(slab(c, 0.0, 0.0, 0.70, 0.40, h - top, h));
            v
        }
        // round, single pedestal
        1 => vec![
            cylinder(c, 0.0, 0.0, 0.06, 0.0, h - top),
            cylinder(c, 0.0, 0.0, 0.50, h - top, h),
        ],
        // square
        2 => {
            let mut v = legs(0.45, 0.45);
            v.push(slab(c, 0.0, 0.0, 0.45, 0.45, h - top, h));
            v
        }
        // long desk with side panels
        _ => vec![
            slab(c, 0.0, 0.88, 0.36, 0.02, 0.0, h - top),
            slab(c, 0.0, -0.88, 0.36, 0.02, 0.0, h - top),
            slab(c, 0.0, 0.0, 0.38, 0.90, h - top, h),
        ],
    }
}

fn chair(preset: u8, h: f64) -> Vec<Solid> {
    let c = ObjectClass::Chair;
    let (half_w, arms) = match preset {
        0 => (0.24, true),
        1 => (0.24, false),
        2 => (0.30, true),
        _ => (0.21, false),
    };
    let seat_z = 0.45;
    let mut v = vec![
        cylinder(c, 0.0, 0.0, 0.04, 0.0, seat_z - 0.05),
        slab(c, 0.0, 0.0, half_w, half_w, seat_z - 0.05, seat_z),
        // backrest at the rear edge
        slab(c, -half_w + 0.03, 0.0, 0.03, half_w, seat_z, h),
    ];
    if arms {
        let arm_top = (seat_z + 0.2).min(h);
        for s in [-1.0, 1.0] {
            v.push(slab(c, 0.0, s * (half_w - 0.025), half_w, 0.025, seat_z, arm_top));
        }
    }
    v
}

fn storage(preset: u8, h: f64) -> Vec<Solid> {
    let c = ObjectClass::Storage;
    match preset {
        // shelf
        0 => vec![slab(c, 0.0, 0.0, 0.18, 0.45, 0.0, h)],
        // wardrobe
        1 => vec![slab(c, 0.0, 0.0, 0.30, 0.50, 0.0, h)],
        // cabinet
        2 => vec![slab(c, 0.0, 0.0, 0.25, 0.25, 0.0, h)],
        // low double shelf: two stacked bodies of different depth
        _ => vec![
            slab(c, 0.0, 0.0, 0.22, 0.70, 0.0, 0.6 * h),
            slab(c, -0.05, 0.0, 0.17, 0.70, 0.6 * h, h),
        ],
    }
}

fn plant(preset: u8, h: f64) -> Vec<Solid> {
    let c = ObjectClass::Plant;
    let (pot_r, canopy_r) = match preset {
        0 => (0.08, 0.12),
        1 => (0.10, 0.18),
        2 => (0.12, 0.22),
        _ => (0.09, 0.15),
    };
    let pot_h = 0.4 * h;
    let rz = 0.3 * h;
    vec![
        cylinder(c, 0.0, 0.0, pot_r, 0.0, pot_h),
        Solid {
            shape: Shape::Ellipsoid {
                center: Vec3::new(0.0, 0.0, h - rz),
                radii: Vec3::new(canopy_r, canopy_r, rz),
            },
            class: c,
        },
    ]
}
