//! Certified determinant bounds on quadratic elements.
//!
//! The jacobian of a quadratic map has entries affine in the reference
//! coordinates, so its determinant is a full quadratic in (xi, eta). That
//! quadratic is cheap to minimize *exactly* over the reference triangle:
//! the extremum is at a vertex, at an interior stationary point, or at a
//! stationary point along one edge, and all of those are closed-form.
//!
//! Orientation of a deformation, however, needs a lower bound on the
//! *ratio* det J_f / det J_g of two such quadratics, which has no usable
//! closed form. We bound it by bisection on the level parameter t: the
//! statement "f - t g >= 0 on the triangle" is decidable exactly through
//! the quadratic range above, and the supremum of the t for which it
//! holds is exactly the minimum of the ratio (when g > 0). Each accepted
//! t is a proof, so the returned bound is certified even before the
//! bisection converges.

use crate::geometry::{Mat2, QuadraticMap, RefPoint};

/// A quadratic polynomial over the reference triangle,
/// `c00 + c10 xi + c01 eta + c20 xi^2 + c02 eta^2 + c11 xi eta`.
#[derive(Debug, Clone, Copy)]
pub struct TriQuadratic {
    pub c00: f64,
    pub c10: f64,
    pub c01: f64,
    pub c20: f64,
    pub c02: f64,
    pub c11: f64,
}

/// The "determinant mix" of two matrices: det(A + B) = det A + det B + mix(A, B).
fn mix(a: &Mat2, b: &Mat2) -> f64 {
    a.m11 * b.m22 + b.m11 * a.m22 - a.m12 * b.m21 - b.m12 * a.m21
}

impl TriQuadratic {
    /// Exact coefficients of det J for a quadratic map, from the affine
    /// decomposition J(xi, eta) = J0 + xi Jx + eta Jy.
    pub fn det_of(map: &QuadraticMap) -> TriQuadratic {
        let (j0, jx, jy) = map.jacobian_affine();
        TriQuadratic {
            c00: j0.det(),
            c10: mix(&j0, &jx),
            c01: mix(&j0, &jy),
            c20: jx.det(),
            c02: jy.det(),
            c11: mix(&jx, &jy),
        }
    }

    pub fn eval(&self, p: RefPoint) -> f64 {
        let (xi, eta) = (p.xi, p.eta);
        self.c00
            + self.c10 * xi
            + self.c01 * eta
            + self.c20 * xi * xi
            + self.c02 * eta * eta
            + self.c11 * xi * eta
    }

    /// `self - t * other`, coefficientwise.
    fn shifted(&self, t: f64, other: &TriQuadratic) -> TriQuadratic {
        TriQuadratic {
            c00: self.c00 - t * other.c00,
            c10: self.c10 - t * other.c10,
            c01: self.c01 - t * other.c01,
            c20: self.c20 - t * other.c20,
            c02: self.c02 - t * other.c02,
            c11: self.c11 - t * other.c11,
        }
    }

    /// Exact (min, max) over the closed reference triangle.
    pub fn range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut take = |v: f64| {
            lo = lo.min(v);
            hi = hi.max(v);
        };

        take(self.c00);
        take(self.c00 + self.c10 + self.c20);
        take(self.c00 + self.c01 + self.c02);

        // Stationary points along the two axis edges.
        if self.c20 != 0.0 {
            let xi = -self.c10 / (2.0 * self.c20);
            if xi > 0.0 && xi < 1.0 {
                take(self.c00 + self.c10 * xi + self.c20 * xi * xi);
            }
        }
        if self.c02 != 0.0 {
            let eta = -self.c01 / (2.0 * self.c02);
            if eta > 0.0 && eta < 1.0 {
                take(self.c00 + self.c01 * eta + self.c02 * eta * eta);
            }
        }

        // Along the hypotenuse (xi, eta) = (s, 1 - s) the polynomial
        // collapses to a s^2 + b s + c.
        let a = self.c20 + self.c02 - self.c11;
        let b = self.c10 - self.c01 - 2.0 * self.c02 + self.c11;
        let c = self.c00 + self.c01 + self.c02;
        if a != 0.0 {
            let s = -0.5 * b / a;
            if s > 0.0 && s < 1.0 {
                take(a * s * s + b * s + c);
            }
        }

        // Interior stationary point of the full quadratic.
        let d = 4.0 * self.c20 * self.c02 - self.c11 * self.c11;
        if d != 0.0 {
            let xi = (self.c01 * self.c11 - 2.0 * self.c02 * self.c10) / d;
            let eta = (self.c10 * self.c11 - 2.0 * self.c20 * self.c01) / d;
            if xi > 0.0 && eta > 0.0 && xi + eta < 1.0 {
                take(self.eval(RefPoint::new(xi, eta)));
            }
        }

        (lo, hi)
    }
}

/// Exact (min, max) of det J over the reference triangle.
pub fn ref_det_range(map: &QuadraticMap) -> (f64, f64) {
    TriQuadratic::det_of(map).range()
}

/// A lower bound for min det J_f / det J_g over the reference triangle.
///
/// `certified` is true when the bound comes with a proof: every reported
/// value t satisfies det J_f - t det J_g >= 0 exactly (in the quadratic
/// coefficients), so det J_f / det J_g >= t wherever det J_g > 0. When
/// the geometric determinant is not strictly positive the ratio is
/// meaningless and the bound degrades to -inf, uncertified.
#[derive(Debug, Clone, Copy)]
pub struct DetBound {
    pub bound: f64,
    pub certified: bool,
}

const CENTROID: RefPoint = RefPoint {
    xi: 1.0 / 3.0,
    eta: 1.0 / 3.0,
};

pub fn min_det_on_element(geo: &QuadraticMap, deformed: &QuadraticMap) -> DetBound {
    let g = TriQuadratic::det_of(geo);
    let f = TriQuadratic::det_of(deformed);
    let (g_min, g_max) = g.range();
    if !(g_min > 0.0) {
        return DetBound {
            bound: f64::NEG_INFINITY,
            certified: false,
        };
    }

    let (f_min, _) = f.range();
    // Both starting brackets are proofs in their own right:
    //  - if f >= f_min >= 0 then f - (f_min / g_max) g >= f_min - f_min = 0;
    //  - if f_min < 0 then for t = f_min / g_min < 0 we get
    //    f - t g >= f_min - t g_min = 0.
    let mut lo = if f_min >= 0.0 {
        f_min / g_max
    } else {
        f_min / g_min
    };
    // The ratio at any single point is an upper bound for its minimum.
    let mut hi = f.eval(CENTROID) / g.eval(CENTROID);
    if hi < lo {
        hi = lo;
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.shifted(mid, &g).range().0 >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    DetBound {
        bound: lo,
        certified: true,
    }
}
