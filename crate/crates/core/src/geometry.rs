//! Planar vector math, convex hulls and point-to-polygon distances.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2D vector. Used for positions (m), velocities (m/s) and forces (m/s²).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn from_polar(r: f64, angle: f64) -> Self {
        Self::new(r * angle.cos(), r * angle.sin())
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    #[inline]
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0).then(|| self / n)
    }

    /// Counter-clockwise rotation by `angle` radians.
    #[inline]
    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rescales the vector so that its length does not exceed `max_len`.
    #[inline]
    pub fn clamp_norm(self, max_len: f64) -> Vec2 {
        let n = self.norm();
        if n > max_len {
            self * (max_len / n)
        } else {
            self
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl std::iter::Sum for Vec2 {
    fn sum<I: Iterator<Item = Vec2>>(iter: I) -> Vec2 {
        iter.fold(Vec2::ZERO, |acc, v| acc + v)
    }
}

/// A line segment, used for static obstacles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    /// Closest point on the segment to `p`.
    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let ab = self.b - self.a;
        let len_sq = ab.norm_sq();
        if len_sq == 0.0 {
            return self.a;
        }
        let t = ((p - self.a).dot(ab) / len_sq).clamp(0.0, 1.0);
        self.a + ab * t
    }

    pub fn distance(&self, p: Vec2) -> f64 {
        p.distance(self.closest_point(p))
    }
}

/// A convex polygon with vertices in strictly counter-clockwise order.
///
/// Degenerate hulls are allowed: one vertex is a point, two vertices a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    /// Wraps vertices that are already a valid convex CCW polygon.
    pub fn from_convex_ccw(vertices: Vec<Vec2>) -> Result<Self> {
        let poly = Self { vertices };
        poly.validate()?;
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n == 0 {
            return Err(Error::InvalidArgument("polygon has no vertices".into()));
        }
        if self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("polygon vertex is not finite".into()));
        }
        if n == 2 && self.vertices[0] == self.vertices[1] {
            return Err(Error::InvalidArgument("duplicate polygon vertex".into()));
        }
        if n >= 3 {
            for i in 0..n {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let c = self.vertices[(i + 2) % n];
                if (b - a).cross(c - b) <= 0.0 {
                    return Err(Error::InvalidArgument(
                        "polygon is not strictly convex counter-clockwise".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// True when `p` lies inside or on the boundary.
    pub fn contains(&self, p: Vec2) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => self.vertices[0] == p,
            2 => Segment::new(self.vertices[0], self.vertices[1]).distance(p) == 0.0,
            n => (0..n).all(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                (b - a).cross(p - a) >= 0.0
            }),
        }
    }

    pub fn centroid_of_vertices(&self) -> Vec2 {
        let sum: Vec2 = self.vertices.iter().copied().sum();
        sum / self.vertices.len() as f64
    }
}

/// Convex hull by Andrew's monotone chain. Collinear boundary points are dropped.
pub fn convex_hull(points: &[Vec2]) -> Result<Polygon> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("convex hull of an empty point set".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("convex hull input is not finite".into()));
    }

    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return Ok(Polygon { vertices: pts });
    }

    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    // lower chain
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    // upper chain
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    // All points collinear: the chains collapse onto the two extremes.
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.pop();
    }
    Ok(Polygon { vertices: hull })
}

#[inline]
fn turn(o: Vec2, a: Vec2, b: Vec2) -> f64 {
    (a - o).cross(b - o)
}

/// Euclidean distance from `p` to the polygon region; zero inside or on the boundary.
pub fn distance_to_polygon(p: Vec2, poly: &Polygon) -> f64 {
    let v = poly.vertices();
    match v.len() {
        0 => f64::INFINITY,
        1 => p.distance(v[0]),
        2 => Segment::new(v[0], v[1]).distance(p),
        n => {
            if poly.contains(p) {
                return 0.0;
            }
            (0..n)
                .map(|i| Segment::new(v[i], v[(i + 1) % n]).distance(p))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Unsigned angle between two vectors in degrees, in `[0, 180]`.
///
/// Returns 0 when either vector is zero; callers that average angles should
/// skip those samples.
pub fn angle_between(a: Vec2, b: Vec2) -> f64 {
    if a.norm_sq() == 0.0 || b.norm_sq() == 0.0 {
        return 0.0;
    }
    a.cross(b).abs().atan2(a.dot(b)).to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::from_convex_ccw(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn hull_drops_interior_point() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 0.5),
        ];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 4);
        assert!(!hull.vertices().contains(&Vec2::new(0.5, 0.5)));
    }

    #[test]
    fn hull_singleton_and_segment() {
        let hull = convex_hull(&[Vec2::new(2.0, 3.0)]).unwrap();
        assert_eq!(hull.vertices(), &[Vec2::new(2.0, 3.0)]);

        let hull = convex_hull(&[Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.0)])
            .unwrap();
        assert_eq!(hull.len(), 2);

        let hull = convex_hull(&[Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)]).unwrap();
        assert_eq!(hull.len(), 1);
    }

    #[test]
    fn hull_rejects_empty() {
        assert!(matches!(convex_hull(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn hull_drops_collinear_boundary_points() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert_eq!(convex_hull(&pts).unwrap().len(), 4);
    }

    #[test]
    fn distances_to_square() {
        let sq = unit_square();
        assert_eq!(distance_to_polygon(Vec2::new(3.0, 0.0), &sq), 2.0);
        assert_eq!(distance_to_polygon(Vec2::new(0.5, 0.5), &sq), 0.0);
        assert!((distance_to_polygon(Vec2::new(2.0, 2.0), &sq) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(distance_to_polygon(Vec2::new(1.0, 0.5), &sq), 0.0);
    }

    #[test]
    fn angles() {
        assert_eq!(angle_between(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)), 90.0);
        assert_eq!(angle_between(Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)), 0.0);
        assert_eq!(angle_between(Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)), 180.0);
        assert_eq!(angle_between(Vec2::ZERO, Vec2::new(-1.0, 0.0)), 0.0);
    }

    #[test]
    fn rejects_clockwise_polygon() {
        let cw = vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)];
        assert!(Polygon::from_convex_ccw(cw).is_err());
    }
}
