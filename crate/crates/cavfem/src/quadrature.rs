//! Quadrature rules on the reference triangle.
//!
//! Two rules cover all needs here: a seven-point symmetric rule exact
//! through degree 5 for energy assembly, and a 25-point tensor rule exact
//! through degree 8 for error norms and refinement checks. Weights include
//! the reference-triangle area, so plain weighted sums integrate over the
//! whole element.

use crate::geometry::RefPoint;
use std::sync::OnceLock;

/// One quadrature point with its weight.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub at: RefPoint,
    pub weight: f64,
}

/// A fixed rule on the reference triangle.
#[derive(Debug, Clone)]
pub struct TriRule {
    pub points: Vec<QuadPoint>,
}

impl TriRule {
    /// Seven-point symmetric rule, exact for polynomials of total degree
    /// at most 5. Closed forms: centroid weight 9/40, orbits at
    /// barycentric (6 +- sqrt(15))/21 with weights (155 +- sqrt(15))/1200,
    /// all scaled by the triangle area 1/2.
    pub fn degree5() -> &'static TriRule {
        static RULE: OnceLock<TriRule> = OnceLock::new();
        RULE.get_or_init(|| {
            let s15 = 15.0f64.sqrt();
            let mut points = vec![QuadPoint {
                at: RefPoint::new(1.0 / 3.0, 1.0 / 3.0),
                weight: 0.5 * 9.0 / 40.0,
            }];
            for sign in [1.0, -1.0] {
                let a = (6.0 + sign * s15) / 21.0;
                let b = 1.0 - 2.0 * a;
                let w = 0.5 * (155.0 + sign * s15) / 1200.0;
                for at in [
                    RefPoint::new(a, a),
                    RefPoint::new(a, b),
                    RefPoint::new(b, a),
                ] {
                    points.push(QuadPoint { at, weight: w });
                }
            }
            TriRule { points }
        })
    }

    /// 25-point rule exact through total degree 8, built by collapsing a
    /// 5x5 Gauss-Legendre grid onto the triangle via
    /// (u, v) -> (u(1-v), uv), which contributes the extra factor u to
    /// each weight.
    pub fn degree8() -> &'static TriRule {
        static RULE: OnceLock<TriRule> = OnceLock::new();
        RULE.get_or_init(|| {
            let (nodes, weights) = gauss_legendre_5_unit();
            let mut points = Vec::with_capacity(25);
            for i in 0..5 {
                for j in 0..5 {
                    let (u, v) = (nodes[i], nodes[j]);
                    points.push(QuadPoint {
                        at: RefPoint::new(u * (1.0 - v), u * v),
                        weight: weights[i] * weights[j] * u,
                    });
                }
            }
            TriRule { points }
        })
    }

    /// Integrates `f` over the reference triangle.
    pub fn integrate<F: Fn(RefPoint) -> f64>(&self, f: F) -> f64 {
        crate::accum::neumaier_sum(self.points.iter().map(|q| q.weight * f(q.at)))
    }
}

/// Five-point Gauss-Legendre nodes and weights on [0, 1], from the closed
/// forms on [-1, 1]: nodes 0 and +-sqrt(5 -+ 2 sqrt(10/7))/3, weights
/// 128/225 and (322 +- 13 sqrt(70))/900.
pub(crate) fn gauss_legendre_5_unit() -> ([f64; 5], [f64; 5]) {
    let s107 = (10.0f64 / 7.0).sqrt();
    let s70 = 70.0f64.sqrt();
    let n_small = (5.0 - 2.0 * s107).sqrt() / 3.0;
    let n_large = (5.0 + 2.0 * s107).sqrt() / 3.0;
    let w_small = (322.0 + 13.0 * s70) / 900.0;
    let w_large = (322.0 - 13.0 * s70) / 900.0;
    let nodes = [-n_large, -n_small, 0.0, n_small, n_large];
    let weights = [w_large, w_small, 128.0 / 225.0, w_small, w_large];
    let mut un = [0.0; 5];
    let mut uw = [0.0; 5];
    for i in 0..5 {
        un[i] = 0.5 * (nodes[i] + 1.0);
        uw[i] = 0.5 * weights[i];
    }
    (un, uw)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact integral of xi^a eta^b over the reference triangle.
    fn monomial_integral(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>().max(1.0);
        fact(a) * fact(b) / fact(a + b + 2)
    }

    fn check_exactness(rule: &TriRule, degree: u32) {
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                let num = rule.integrate(|p| p.xi.powi(a as i32) * p.eta.powi(b as i32));
                let exact = monomial_integral(a, b);
                assert!(
                    (num - exact).abs() < 1e-14,
                    "monomial xi^{a} eta^{b}: {num} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn degree5_integrates_quintics_exactly() {
        check_exactness(TriRule::degree5(), 5);
    }

    #[test]
    fn degree8_integrates_octics_exactly() {
        check_exactness(TriRule::degree8(), 8);
    }

    #[test]
    fn weights_sum_to_triangle_area() {
        for rule in [TriRule::degree5(), TriRule::degree8()] {
            let total: f64 = rule.points.iter().map(|q| q.weight).sum();
            assert!((total - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn points_lie_inside_the_triangle() {
        for rule in [TriRule::degree5(), TriRule::degree8()] {
            for q in &rule.points {
                assert!(q.at.xi > 0.0 && q.at.eta > 0.0);
                assert!(q.at.xi + q.at.eta < 1.0);
            }
        }
    }
}
