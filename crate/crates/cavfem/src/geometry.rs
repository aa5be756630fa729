//! Points, small matrices, reference shape functions, and the quadratic
//! iso-parametric map.
//!
//! The reference element is the unit triangle with vertices (0,0), (1,0),
//! (0,1). Nodes are ordered `[a1, a2, a3, a12, a13, a23]`: vertices first,
//! then the midpoint of each edge named by its endpoints. All maps built
//! here are quadratic in the reference coordinates, so their jacobian
//! entries are affine; [`QuadraticMap::jacobian_affine`] exposes that
//! decomposition exactly.

use crate::{Error, Result};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

/// Point or vector in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Point in polar coordinates. The angle is kept as given; use
/// [`normalize_angle`] when a canonical representative is needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub const fn new(r: f64, theta: f64) -> Self {
        PolarPoint { r, theta }
    }

    pub fn to_cartesian(self) -> Point2 {
        Point2::new(self.r * self.theta.cos(), self.r * self.theta.sin())
    }

    pub fn from_cartesian(p: Point2) -> Result<PolarPoint> {
        let r = p.norm();
        if r <= 0.0 {
            return Err(Error::ZeroRadius(r));
        }
        Ok(PolarPoint::new(r, normalize_angle(p.y.atan2(p.x))))
    }
}

/// Reduces an angle to the half-open interval (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Node subdividing a circular-arc edge: the radii average and the angle
/// halves the shorter arc between the endpoints.
///
/// Endpoints separated by half a turn or more leave the shorter arc
/// undefined, which is reported as an error rather than resolved by fiat.
pub fn mid_arc_node(a: PolarPoint, b: PolarPoint) -> Result<PolarPoint> {
    if a.r <= 0.0 {
        return Err(Error::ZeroRadius(a.r));
    }
    if b.r <= 0.0 {
        return Err(Error::ZeroRadius(b.r));
    }
    let delta = normalize_angle(b.theta - a.theta);
    if delta.abs() >= PI - 1e-12 {
        return Err(Error::AmbiguousArc {
            from: a.theta,
            to: b.theta,
        });
    }
    Ok(PolarPoint::new(
        0.5 * (a.r + b.r),
        normalize_angle(a.theta + 0.5 * delta),
    ))
}

/// 2x2 matrix with row-major named entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Mat2 { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(self) -> f64 {
        self.m11 * self.m11 + self.m12 * self.m12 + self.m21 * self.m21 + self.m22 * self.m22
    }

    /// Matrix of partial derivatives of the determinant: entry (i,j) is
    /// d(det)/d(m_ij).
    pub fn cofactor(self) -> Mat2 {
        Mat2::new(self.m22, -self.m21, -self.m12, self.m11)
    }

    pub fn transpose(self) -> Mat2 {
        Mat2::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn inverse(self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(
            self.m22 / d,
            -self.m12 / d,
            -self.m21 / d,
            self.m11 / d,
        ))
    }

    pub fn mul_vec(self, v: Point2) -> Point2 {
        Point2::new(
            self.m11 * v.x + self.m12 * v.y,
            self.m21 * v.x + self.m22 * v.y,
        )
    }

    pub fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }

    pub fn scale(self, s: f64) -> Mat2 {
        Mat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 + o.m11,
            self.m12 + o.m12,
            self.m21 + o.m21,
            self.m22 + o.m22,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 - o.m11,
            self.m12 - o.m12,
            self.m21 - o.m21,
            self.m22 - o.m22,
        )
    }
}

/// Point in reference coordinates on the unit triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefPoint {
    pub xi: f64,
    pub eta: f64,
}

impl RefPoint {
    pub const fn new(xi: f64, eta: f64) -> Self {
        RefPoint { xi, eta }
    }
}

/// Reference positions of the six nodes, in node order.
pub const REF_NODES: [RefPoint; 6] = [
    RefPoint::new(0.0, 0.0),
    RefPoint::new(1.0, 0.0),
    RefPoint::new(0.0, 1.0),
    RefPoint::new(0.5, 0.0),
    RefPoint::new(0.0, 0.5),
    RefPoint::new(0.5, 0.5),
];

/// Values of the six quadratic shape functions at `p`.
///
/// In barycentric coordinates the vertex functions are `l(2l - 1)` and the
/// edge functions `4 l_i l_j`.
pub fn shape_values(p: RefPoint) -> [f64; 6] {
    let l1 = 1.0 - p.xi - p.eta;
    let l2 = p.xi;
    let l3 = p.eta;
    [
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        l3 * (2.0 * l3 - 1.0),
        4.0 * l1 * l2,
        4.0 * l1 * l3,
        4.0 * l2 * l3,
    ]
}

/// Reference gradients of the six shape functions at `p`; entry `[i]` is
/// `[d/dxi, d/deta]` of shape `i`.
pub fn shape_gradients(p: RefPoint) -> [[f64; 2]; 6] {
    let l1 = 1.0 - p.xi - p.eta;
    let l2 = p.xi;
    let l3 = p.eta;
    // Gradients of the barycentric coordinates themselves.
    const G1: [f64; 2] = [-1.0, -1.0];
    const G2: [f64; 2] = [1.0, 0.0];
    const G3: [f64; 2] = [0.0, 1.0];
    let vertex = |l: f64, g: [f64; 2]| [(4.0 * l - 1.0) * g[0], (4.0 * l - 1.0) * g[1]];
    let edge = |la: f64, ga: [f64; 2], lb: f64, gb: [f64; 2]| {
        [
            4.0 * (lb * ga[0] + la * gb[0]),
            4.0 * (lb * ga[1] + la * gb[1]),
        ]
    };
    [
        vertex(l1, G1),
        vertex(l2, G2),
        vertex(l3, G3),
        edge(l1, G1, l2, G2),
        edge(l1, G1, l3, G3),
        edge(l2, G2, l3, G3),
    ]
}

/// Quadratic iso-parametric image of the reference triangle, defined by
/// its six node positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticMap {
    pub nodes: [Point2; 6],
}

impl QuadraticMap {
    pub fn new(nodes: [Point2; 6]) -> Self {
        QuadraticMap { nodes }
    }

    /// A straight-edged triangle: edge nodes at the chord midpoints, which
    /// makes the map affine.
    pub fn straight(v1: Point2, v2: Point2, v3: Point2) -> Self {
        QuadraticMap {
            nodes: [
                v1,
                v2,
                v3,
                (v1 + v2) * 0.5,
                (v1 + v3) * 0.5,
                (v2 + v3) * 0.5,
            ],
        }
    }

    pub fn eval(&self, p: RefPoint) -> Point2 {
        let s = shape_values(p);
        let mut out = Point2::default();
        for i in 0..6 {
            out = out + self.nodes[i] * s[i];
        }
        out
    }

    /// Jacobian dx/dxhat at `p`: rows are physical components, columns
    /// reference directions.
    pub fn jacobian(&self, p: RefPoint) -> Mat2 {
        let g = shape_gradients(p);
        let mut j = Mat2::default();
        for i in 0..6 {
            j.m11 += self.nodes[i].x * g[i][0];
            j.m12 += self.nodes[i].x * g[i][1];
            j.m21 += self.nodes[i].y * g[i][0];
            j.m22 += self.nodes[i].y * g[i][1];
        }
        j
    }

    pub fn det_jacobian(&self, p: RefPoint) -> f64 {
        self.jacobian(p).det()
    }

    /// Exact decomposition `J(xi, eta) = J0 + xi * Jx + eta * Jy`, valid
    /// because every jacobian entry of a quadratic map is affine.
    pub fn jacobian_affine(&self) -> (Mat2, Mat2, Mat2) {
        let j0 = self.jacobian(RefPoint::new(0.0, 0.0));
        let jx = self.jacobian(RefPoint::new(1.0, 0.0)) - j0;
        let jy = self.jacobian(RefPoint::new(0.0, 1.0)) - j0;
        (j0, jx, jy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn interior_points() -> Vec<RefPoint> {
        let mut pts = Vec::new();
        let n = 7;
        for i in 0..=n {
            for j in 0..=(n - i) {
                pts.push(RefPoint::new(i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        pts
    }

    #[test]
    fn shapes_are_kronecker_delta_at_nodes() {
        for (i, &node) in REF_NODES.iter().enumerate() {
            let s = shape_values(node);
            for (j, &sj) in s.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(sj, expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        // Central differences are exact for quadratics, so only rounding
        // separates the two sides.
        let h = 1e-5;
        for p in interior_points() {
            let g = shape_gradients(p);
            for i in 0..6 {
                let dxi = (shape_values(RefPoint::new(p.xi + h, p.eta))[i]
                    - shape_values(RefPoint::new(p.xi - h, p.eta))[i])
                    / (2.0 * h);
                let deta = (shape_values(RefPoint::new(p.xi, p.eta + h))[i]
                    - shape_values(RefPoint::new(p.xi, p.eta - h))[i])
                    / (2.0 * h);
                assert_abs_diff_eq!(g[i][0], dxi, epsilon = 1e-9);
                assert_abs_diff_eq!(g[i][1], deta, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn straight_triangle_has_constant_affine_jacobian() {
        let map = QuadraticMap::straight(
            Point2::new(0.2, -0.1),
            Point2::new(1.3, 0.4),
            Point2::new(0.5, 1.7),
        );
        let expected = Mat2::new(1.1, 0.3, 0.5, 1.8);
        for p in interior_points() {
            let j = map.jacobian(p);
            assert_relative_eq!(j.m11, expected.m11, max_relative = 1e-13);
            assert_relative_eq!(j.m12, expected.m12, max_relative = 1e-13);
            assert_relative_eq!(j.m21, expected.m21, max_relative = 1e-13);
            assert_relative_eq!(j.m22, expected.m22, max_relative = 1e-13);
        }
    }

    #[test]
    fn map_reproduces_nodes() {
        let map = QuadraticMap::new([
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.1),
            Point2::new(0.3, 1.9),
            Point2::new(1.1, -0.2),
            Point2::new(0.05, 0.9),
            Point2::new(1.3, 1.2),
        ]);
        for (i, &rp) in REF_NODES.iter().enumerate() {
            let x = map.eval(rp);
            assert_abs_diff_eq!(x.x, map.nodes[i].x, epsilon = 1e-14);
            assert_abs_diff_eq!(x.y, map.nodes[i].y, epsilon = 1e-14);
        }
    }

    #[test]
    fn affine_decomposition_reproduces_jacobian() {
        let map = QuadraticMap::new([
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.1),
            Point2::new(0.3, 1.9),
            Point2::new(1.1, -0.2),
            Point2::new(0.05, 0.9),
            Point2::new(1.3, 1.2),
        ]);
        let (j0, jx, jy) = map.jacobian_affine();
        for p in interior_points() {
            let direct = map.jacobian(p);
            let rebuilt = j0 + jx.scale(p.xi) + jy.scale(p.eta);
            assert_abs_diff_eq!(direct.m11, rebuilt.m11, epsilon = 1e-13);
            assert_abs_diff_eq!(direct.m12, rebuilt.m12, epsilon = 1e-13);
            assert_abs_diff_eq!(direct.m21, rebuilt.m21, epsilon = 1e-13);
            assert_abs_diff_eq!(direct.m22, rebuilt.m22, epsilon = 1e-13);
        }
    }

    #[test]
    fn mid_arc_on_shared_ray_averages_radii() {
        let m = mid_arc_node(PolarPoint::new(0.01, 0.0), PolarPoint::new(0.02, 0.0)).unwrap();
        assert_abs_diff_eq!(m.r, 0.015, epsilon = 1e-17);
        assert_abs_diff_eq!(m.theta, 0.0, epsilon = 1e-17);
    }

    #[test]
    fn mid_arc_on_circle_halves_the_angle() {
        let step = 2.0 * PI / 64.0;
        let m = mid_arc_node(PolarPoint::new(0.01, 0.0), PolarPoint::new(0.01, step)).unwrap();
        assert_abs_diff_eq!(m.r, 0.01, epsilon = 1e-17);
        assert_abs_diff_eq!(m.theta, PI / 64.0, epsilon = 1e-15);
    }

    #[test]
    fn mid_arc_takes_shorter_way_across_the_cut() {
        // Angles 2.8 and -2.9 are 0.583 apart going through pi.
        let m = mid_arc_node(PolarPoint::new(1.0, 2.8), PolarPoint::new(2.0, -2.9)).unwrap();
        assert_abs_diff_eq!(m.r, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.theta, 2.8 + 0.5 * (2.0 * PI - 5.7), epsilon = 1e-12);
    }

    #[test]
    fn mid_arc_rejects_half_turn() {
        let e = mid_arc_node(PolarPoint::new(1.0, 0.0), PolarPoint::new(1.0, PI));
        assert!(matches!(e, Err(crate::Error::AmbiguousArc { .. })));
    }

    #[test]
    fn mid_arc_rejects_zero_radius() {
        let e = mid_arc_node(PolarPoint::new(0.0, 0.0), PolarPoint::new(1.0, 0.1));
        assert!(matches!(e, Err(crate::Error::ZeroRadius(_))));
    }

    proptest! {
        #[test]
        fn shapes_partition_unity(xi in 0.0..1.0f64, t in 0.0..1.0f64) {
            let p = RefPoint::new(xi, (1.0 - xi) * t);
            let s = shape_values(p);
            let sum: f64 = s.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            let g = shape_gradients(p);
            let gx: f64 = g.iter().map(|gi| gi[0]).sum();
            let gy: f64 = g.iter().map(|gi| gi[1]).sum();
            prop_assert!(gx.abs() < 1e-12);
            prop_assert!(gy.abs() < 1e-12);
        }

        #[test]
        fn polar_round_trip(r in 1e-6..1e3f64, theta in -3.14f64..3.14) {
            let p = PolarPoint::new(r, theta).to_cartesian();
            let back = PolarPoint::from_cartesian(p).unwrap();
            prop_assert!((back.r - r).abs() <= 1e-12 * r);
            prop_assert!((back.theta - theta).abs() < 1e-9);
        }
    }
}
