//! Planar footprint geometry used by the interaction model.

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    pub vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    /// Rectangle `[-hx, hx] x [-hy, hy]` around `local_center`, rotated by
    /// `angle` and translated to `origin`.
    pub fn oriented_rect(origin: Vec2, angle: f64, local_center: Vec2, hx: f64, hy: f64) -> Self {
        let corners = [
            Vec2::new(-hx, -hy),
            Vec2::new(hx, -hy),
            Vec2::new(hx, hy),
            Vec2::new(-hx, hy),
        ];
        let vertices = corners
            .iter()
            .map(|&c| origin + (local_center + c).rotated(angle))
            .collect();
        Self { vertices }
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut twice = 0.0;
        for i in 0..n {
            twice += self.vertices[i].cross(self.vertices[(i + 1) % n]);
        }
        0.5 * twice.abs()
    }

    /// Sutherland-Hodgman clip of `self` against the convex `clip`.
    pub fn intersection(&self, clip: &ConvexPolygon) -> ConvexPolygon {
        let mut output = self.vertices.clone();
        let m = clip.vertices.len();
        for e in 0..m {
            if output.is_empty() {
                break;
            }
            let a = clip.vertices[e];
            let b = clip.vertices[(e + 1) % m];
            let edge = b - a;
            let inside = |p: Vec2| edge.cross(p - a) >= 0.0;
            let input = std::mem::take(&mut output);
            let n = input.len();
            for i in 0..n {
                let cur = input[i];
                let prev = input[(i + n - 1) % n];
                let cur_in = inside(cur);
                let prev_in = inside(prev);
                if cur_in {
                    if !prev_in {
                        output.push(segment_line_intersection(prev, cur, a, b));
                    }
                    output.push(cur);
                } else if prev_in {
                    output.push(segment_line_intersection(prev, cur, a, b));
                }
            }
        }
        ConvexPolygon { vertices: output }
    }

    pub fn translated(&self, by: Vec2) -> ConvexPolygon {
        ConvexPolygon { vertices: self.vertices.iter().map(|&v| v + by).collect() }
    }
}

fn segment_line_intersection(p: Vec2, q: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let r = q - p;
    let s = b - a;
    let denom = r.cross(s);
    if denom.abs() < 1e-300 {
        return q;
    }
    let t = (a - p).cross(s) / denom;
    p + r * t
}

/// Intersection area divided by the smaller footprint's area.
pub fn overlap_fraction(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    let smaller = a.area().min(b.area());
    if smaller <= 0.0 {
        return 0.0;
    }
    (a.intersection(b).area() / smaller).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_at(x: f64, y: f64) -> ConvexPolygon {
        ConvexPolygon::oriented_rect(Vec2::new(x, y), 0.0, Vec2::default(), 0.5, 0.5)
    }

    #[test]
    fn rect_area() {
        let r = ConvexPolygon::oriented_rect(Vec2::new(3.0, 1.0), 0.7, Vec2::new(0.2, 0.0), 1.0, 0.25);
        assert!((r.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_squares_fully_overlap() {
        let a = unit_square_at(0.0, 0.0);
        assert!((overlap_fraction(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offset_squares() {
        let a = unit_square_at(0.0, 0.0);
        assert!((overlap_fraction(&a, &unit_square_at(0.75, 0.0)) - 0.25).abs() < 1e-12);
        assert!((overlap_fraction(&a, &unit_square_at(0.65, 0.0)) - 0.35).abs() < 1e-12);
        assert_eq!(overlap_fraction(&a, &unit_square_at(2.0, 0.0)), 0.0);
    }

    #[test]
    fn rotated_square_inside_larger() {
        let big = ConvexPolygon::oriented_rect(Vec2::default(), 0.0, Vec2::default(), 2.0, 2.0);
        let small = ConvexPolygon::oriented_rect(Vec2::default(), 0.4, Vec2::default(), 0.5, 0.5);
        assert!((overlap_fraction(&big, &small) - 1.0).abs() < 1e-9);
    }
}
