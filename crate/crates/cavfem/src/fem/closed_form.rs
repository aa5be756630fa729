//! Closed forms for the canonical radial element templates.
//!
//! Each element of an annular layer is a rotation of one of four canonical
//! templates sitting symmetrically around the positive x axis, described
//! by three radii: `s0` at the inner circle, `s1` at the outer one, and
//! `s_half` for the mid nodes. The geometric map has `s_half` exactly
//! halfway between `s0` and `s1`; the image of a radial deformation has
//! the same template structure with all three radii remapped, which is
//! what makes these formulas usable as independent oracles for both.

use crate::geometry::{Point2, RefPoint};
use crate::meshgen::ElementKind;
use std::f64::consts::PI;

fn polar(r: f64, theta: f64) -> Point2 {
    Point2::new(r * theta.cos(), r * theta.sin())
}

/// Coefficients of the wedge templates (kinds A and B). The jacobian
/// determinant of such a template is linear in z = x1*x2 and quadratic in
/// y = x1 + x2, which is what makes its exact range computable.
#[derive(Debug, Clone, Copy)]
pub struct DetCoeffs {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Radius of the circle carrying the curved far edge (s1 for kind A,
    /// s0 for kind B); it scales the curvature terms.
    arc_radius: f64,
    /// sin^2(pi / 2N).
    sigma2: f64,
    /// Kind A wedges point outward, kind B inward; the determinant forms
    /// differ by this sign.
    sign: f64,
}

impl DetCoeffs {
    pub fn type_a(n: u32, s0: f64, s_half: f64, s1: f64) -> DetCoeffs {
        let t = PI / n as f64;
        let half = 0.5 * t;
        let (sig, cos_h) = half.sin_cos();
        DetCoeffs {
            alpha1: s0 + s1 - 2.0 * s_half * cos_h,
            alpha2: -3.0 * s0 - s1 * t.cos() + 4.0 * s_half * cos_h,
            beta: s1 * t.sin() - 4.0 * s_half * sig,
            gamma: s1 * t.sin() - 2.0 * s_half * sig,
            arc_radius: s1,
            sigma2: sig * sig,
            sign: -1.0,
        }
    }

    pub fn type_b(n: u32, s0: f64, s_half: f64, s1: f64) -> DetCoeffs {
        let t = PI / n as f64;
        let half = 0.5 * t;
        let (sig, cos_h) = half.sin_cos();
        DetCoeffs {
            alpha1: s0 + s1 - 2.0 * s_half * cos_h,
            alpha2: -3.0 * s1 - s0 * t.cos() + 4.0 * s_half * cos_h,
            beta: s0 * t.sin() - 4.0 * s_half * sig,
            gamma: s0 * t.sin() - 2.0 * s_half * sig,
            arc_radius: s0,
            sigma2: sig * sig,
            sign: 1.0,
        }
    }

    /// The determinant in the symmetric variables y = x1 + x2, z = x1 x2.
    pub fn h(&self, y: f64, z: f64) -> f64 {
        self.sign
            * ((self.alpha2 + 4.0 * self.alpha1 * y) * (2.0 * self.beta - 4.0 * self.gamma * y)
                - 8.0 * self.arc_radius * self.sigma2 * (self.beta * y - 8.0 * self.gamma * z))
    }
}

/// The determinant closed form, for the kinds that have one. The
/// transition wedges C and D have no (y, z) form; callers fall back to
/// the generic jacobian there.
pub fn det_closed_form(
    kind: ElementKind,
    n: u32,
    s0: f64,
    s_half: f64,
    s1: f64,
    at: RefPoint,
) -> Option<f64> {
    let coeffs = match kind {
        ElementKind::A => DetCoeffs::type_a(n, s0, s_half, s1),
        ElementKind::B => DetCoeffs::type_b(n, s0, s_half, s1),
        ElementKind::C | ElementKind::D => return None,
    };
    Some(coeffs.h(at.xi + at.eta, at.xi * at.eta))
}

/// Node positions of the canonical template, in reference node order.
pub fn canonical_nodes(kind: ElementKind, n: u32, s0: f64, s_half: f64, s1: f64) -> [Point2; 6] {
    let t = PI / n as f64;
    let half = 0.5 * t;
    match kind {
        ElementKind::A => [
            Point2::new(s0, 0.0),
            polar(s1, -t),
            polar(s1, t),
            polar(s_half, -half),
            polar(s_half, half),
            Point2::new(s1, 0.0),
        ],
        ElementKind::B => [
            Point2::new(s1, 0.0),
            polar(s0, t),
            polar(s0, -t),
            polar(s_half, half),
            polar(s_half, -half),
            Point2::new(s0, 0.0),
        ],
        ElementKind::C => [
            Point2::new(s0, 0.0),
            Point2::new(s1, 0.0),
            polar(s0, t),
            Point2::new(s_half, 0.0),
            polar(s0, half),
            polar(s_half, half),
        ],
        ElementKind::D => [
            Point2::new(s0, 0.0),
            polar(s0, -t),
            Point2::new(s1, 0.0),
            polar(s0, -half),
            Point2::new(s_half, 0.0),
            polar(s_half, -half),
        ],
    }
}

/// Position of the canonical template map at a reference point, written
/// out in the template radii rather than through shape functions.
pub fn radial_map(
    kind: ElementKind,
    n: u32,
    s0: f64,
    s_half: f64,
    s1: f64,
    at: RefPoint,
) -> Point2 {
    let t = PI / n as f64;
    let half = 0.5 * t;
    let (sig, cos_h) = half.sin_cos();
    let (xi, eta) = (at.xi, at.eta);
    let y = xi + eta;
    match kind {
        ElementKind::A => {
            let c = DetCoeffs::type_a(n, s0, s_half, s1);
            Point2::new(
                s0 + c.alpha2 * y + 2.0 * c.alpha1 * y * y
                    - 4.0 * s1 * sig * sig * (xi * xi + eta * eta),
                (2.0 * c.gamma * y - c.beta) * (eta - xi),
            )
        }
        ElementKind::B => {
            let c = DetCoeffs::type_b(n, s0, s_half, s1);
            Point2::new(
                s1 + c.alpha2 * y + 2.0 * c.alpha1 * y * y
                    - 4.0 * s0 * sig * sig * (xi * xi + eta * eta),
                (2.0 * c.gamma * y - c.beta) * (xi - eta),
            )
        }
        ElementKind::C => {
            let q2 = {
                let q = (0.5 * half).sin();
                q * q
            };
            let a1 = 4.0 * s_half - s1 - 3.0 * s0;
            let a2 = 4.0 * cos_h - t.cos() - 3.0;
            let a3 = s0 + s1 - 2.0 * s_half;
            Point2::new(
                s0 + a1 * xi + s0 * a2 * eta + 2.0 * a3 * xi * xi
                    - 8.0 * q2 * eta * (s0 * cos_h * eta - (s0 - s_half) * xi),
                2.0 * sig
                    * eta
                    * (s0 * (2.0 - cos_h) - 4.0 * s0 * q2 * eta + 2.0 * (s_half - s0) * xi),
            )
        }
        ElementKind::D => {
            let c = radial_map(ElementKind::C, n, s0, s_half, s1, RefPoint::new(eta, xi));
            Point2::new(c.x, -c.y)
        }
    }
}

/// Jacobian determinant of the canonical template map at a reference
/// point. Rotating a template does not change its determinant, so this is
/// also the determinant of any mesh element (or of the image of a radial
/// field on it) with the matching radii.
pub fn radial_det(
    kind: ElementKind,
    n: u32,
    s0: f64,
    s_half: f64,
    s1: f64,
    at: RefPoint,
) -> f64 {
    let t = PI / n as f64;
    let half = 0.5 * t;
    let (sig, cos_h) = half.sin_cos();
    let (xi, eta) = (at.xi, at.eta);
    let y = xi + eta;
    match kind {
        ElementKind::A => {
            let c = DetCoeffs::type_a(n, s0, s_half, s1);
            let arch = c.alpha2 + 4.0 * c.alpha1 * y;
            let j11 = arch - 8.0 * s1 * sig * sig * xi;
            let j12 = arch - 8.0 * s1 * sig * sig * eta;
            let j21 = c.beta - 4.0 * c.gamma * xi;
            let j22 = 4.0 * c.gamma * eta - c.beta;
            j11 * j22 - j12 * j21
        }
        ElementKind::B => {
            let c = DetCoeffs::type_b(n, s0, s_half, s1);
            let arch = c.alpha2 + 4.0 * c.alpha1 * y;
            let j11 = arch - 8.0 * s0 * sig * sig * xi;
            let j12 = arch - 8.0 * s0 * sig * sig * eta;
            let j21 = 4.0 * c.gamma * xi - c.beta;
            let j22 = c.beta - 4.0 * c.gamma * eta;
            j11 * j22 - j12 * j21
        }
        ElementKind::C => {
            let q2 = {
                let q = (0.5 * half).sin();
                q * q
            };
            let a1 = 4.0 * s_half - s1 - 3.0 * s0;
            let a2 = 4.0 * cos_h - t.cos() - 3.0;
            let a3 = s0 + s1 - 2.0 * s_half;
            let j11 = a1 + 4.0 * a3 * xi + 8.0 * q2 * (s0 - s_half) * eta;
            let j12 = s0 * a2 - 16.0 * q2 * s0 * cos_h * eta + 8.0 * q2 * (s0 - s_half) * xi;
            let j21 = 4.0 * sig * (s_half - s0) * eta;
            let j22 =
                2.0 * sig * (s0 * (2.0 - cos_h) - 8.0 * s0 * q2 * eta + 2.0 * (s_half - s0) * xi);
            j11 * j22 - j12 * j21
        }
        ElementKind::D => radial_det(ElementKind::C, n, s0, s_half, s1, RefPoint::new(eta, xi)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{QuadraticMap, REF_NODES};
    use crate::meshgen::{AnnulusMesh, LayerSchedule, MeshConfig};

    const KINDS: [ElementKind; 4] = [
        ElementKind::A,
        ElementKind::B,
        ElementKind::C,
        ElementKind::D,
    ];

    fn lattice(n: usize) -> Vec<RefPoint> {
        let mut pts = Vec::new();
        for i in 0..=n {
            for j in 0..=(n - i) {
                pts.push(RefPoint::new(i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        pts
    }

    /// Radii triples to exercise: a geometric layer (midpoint rule) and a
    /// deformed one where the mid radius is nowhere near the average.
    const TRIPLES: [(f64, f64, f64); 3] = [
        (0.01, 0.015, 0.02),
        (1.0, 1.31, 1.4),
        (0.3, 0.52, 0.9),
    ];

    #[test]
    fn template_map_hits_its_nodes() {
        for kind in KINDS {
            for (s0, sh, s1) in TRIPLES {
                for n in [4u32, 12, 64] {
                    let nodes = canonical_nodes(kind, n, s0, sh, s1);
                    for (i, &rp) in REF_NODES.iter().enumerate() {
                        let p = radial_map(kind, n, s0, sh, s1, rp);
                        assert!(
                            (p - nodes[i]).norm() <= 1e-13 * (1.0 + nodes[i].norm()),
                            "{kind:?} node {i} at n={n}: {p:?} vs {:?}",
                            nodes[i]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_det_matches_generic_jacobian() {
        for kind in KINDS {
            for (s0, sh, s1) in TRIPLES {
                for n in [4u32, 12, 64] {
                    let map = QuadraticMap::new(canonical_nodes(kind, n, s0, sh, s1));
                    for p in lattice(15) {
                        let generic = map.det_jacobian(p);
                        let closed = radial_det(kind, n, s0, sh, s1, p);
                        let scale = s1 * s1;
                        assert!(
                            (generic - closed).abs() <= 1e-12 * (scale + generic.abs()),
                            "{kind:?} n={n} at ({}, {}): {generic} vs {closed}",
                            p.xi,
                            p.eta
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mirrored_template_shares_its_determinant() {
        for (s0, sh, s1) in TRIPLES {
            for p in lattice(7) {
                let c = radial_det(ElementKind::C, 8, s0, sh, s1, p);
                let d = radial_det(ElementKind::D, 8, s0, sh, s1, RefPoint::new(p.eta, p.xi));
                assert_eq!(c, d);
            }
        }
    }

    #[test]
    fn wedge_determinant_form_matches_generic() {
        for kind in [ElementKind::A, ElementKind::B] {
            for (s0, sh, s1) in TRIPLES {
                for n in [4u32, 12, 64] {
                    let map = QuadraticMap::new(canonical_nodes(kind, n, s0, sh, s1));
                    for p in lattice(15) {
                        let h = det_closed_form(kind, n, s0, sh, s1, p).unwrap();
                        let generic = map.det_jacobian(p);
                        assert!(
                            (h - generic).abs() <= 1e-12 * (s1 * s1 + generic.abs()),
                            "{kind:?} n={n}: {h} vs {generic}"
                        );
                    }
                }
            }
        }
        // The identity radii s(t) = t on a fine wedge stay positive.
        let (s0, sh, s1) = (0.01, 0.015, 0.02);
        for p in lattice(15) {
            assert!(det_closed_form(ElementKind::A, 64, s0, sh, s1, p).unwrap() > 0.0);
        }
        assert!(det_closed_form(ElementKind::C, 8, 0.1, 0.15, 0.2, RefPoint::new(0.2, 0.3)).is_none());
        assert!(det_closed_form(ElementKind::D, 8, 0.1, 0.15, 0.2, RefPoint::new(0.2, 0.3)).is_none());
    }

    #[test]
    fn constant_radii_keep_the_equality_contract() {
        let (s, n) = (0.7, 10u32);
        for kind in [ElementKind::A, ElementKind::B] {
            let map = QuadraticMap::new(canonical_nodes(kind, n, s, s, s));
            for p in lattice(9) {
                let h = det_closed_form(kind, n, s, s, s, p).unwrap();
                let generic = map.det_jacobian(p);
                assert!((h - generic).abs() <= 1e-13 * (s * s + generic.abs()));
            }
        }
    }

    /// A kind B wedge with the radius roles swapped carries the same six
    /// nodes as the mirror image of the kind A wedge, so its determinant
    /// is the negation of A's (which is itself symmetric in x1, x2).
    #[test]
    fn flipped_wedge_negates_the_determinant() {
        for (s0, sh, s1) in TRIPLES {
            for p in lattice(9) {
                let a = radial_det(ElementKind::A, 16, s0, sh, s1, p);
                let b = radial_det(ElementKind::B, 16, s1, sh, s0, p);
                assert!((a + b).abs() <= 1e-13 * (s1 * s1 + a.abs()), "{a} vs {b}");
                let swapped = radial_det(ElementKind::A, 16, s0, sh, s1, RefPoint::new(p.eta, p.xi));
                assert!((a - swapped).abs() <= 1e-13 * (s1 * s1 + a.abs()));
            }
        }
    }

    /// Mesh elements are rotations of the canonical templates, so their
    /// jacobian determinants must match the closed forms built from layer
    /// data alone.
    #[test]
    fn mesh_elements_follow_the_closed_forms() {
        let schedule = LayerSchedule::plan(&MeshConfig::new(0.01, 0.06)).unwrap();
        let mesh = AnnulusMesh::build(schedule).unwrap();
        for e in &mesh.elements {
            let map = mesh.element_map(e);
            let (s0, s1) = (e.inner_radius, e.inner_radius + e.thickness);
            let sh = e.inner_radius + 0.5 * e.thickness;
            for p in lattice(5) {
                let generic = map.det_jacobian(p);
                let closed = radial_det(e.kind, e.node_count, s0, sh, s1, p);
                assert!(
                    (generic - closed).abs() <= 1e-11 * (s1 * s1 + generic.abs()),
                    "{:?} in layer {}: {generic} vs {closed}",
                    e.kind,
                    e.layer
                );
            }
        }
    }
}
