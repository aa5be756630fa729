//! Orientation certificates for meshes and deformations.
//!
//! A mesh is usable when every element map has positive jacobian
//! determinant on the whole closed reference triangle; a deformation is
//! admissible when det grad y stays positive there too. Both checks run
//! per element and report the certified minimum, so a failure names the
//! offending element instead of a quadrature point that happened to see
//! it.

use super::det_bound::{min_det_on_element, ref_det_range};
use super::FeFunction;
use crate::exec::{map_indexed, ExecMode};
use crate::geometry::RefPoint;
use crate::meshgen::{AnnulusMesh, ElementKind};

#[derive(Debug, Clone, Copy)]
pub struct OrientationRow {
    pub element: usize,
    pub kind: ElementKind,
    pub layer: u32,
    pub min_det: f64,
    pub certified: bool,
}

/// Exact minimum of det J over each element of the mesh itself.
pub fn mesh_orientation(mesh: &AnnulusMesh) -> Vec<OrientationRow> {
    map_indexed(ExecMode::default(), mesh.elements.len(), |i| {
        let e = &mesh.elements[i];
        let (lo, _) = ref_det_range(&mesh.element_map(e));
        OrientationRow {
            element: i,
            kind: e.kind,
            layer: e.layer,
            min_det: lo,
            certified: true,
        }
    })
}

/// Certified lower bounds of det grad y over each element, for a
/// deformation y given as a finite element function.
pub fn deformation_orientation(f: &FeFunction) -> Vec<OrientationRow> {
    let mesh = f.mesh;
    map_indexed(ExecMode::default(), mesh.elements.len(), |i| {
        let e = &mesh.elements[i];
        let b = min_det_on_element(&mesh.element_map(e), &f.deformed_map(e));
        OrientationRow {
            element: i,
            kind: e.kind,
            layer: e.layer,
            min_det: b.bound,
            certified: b.certified,
        }
    })
}

/// The weakest bound in a report; positive means globally certified
/// orientation preserving (provided every row is certified).
pub fn min_bound(rows: &[OrientationRow]) -> f64 {
    rows.iter().map(|r| r.min_det).fold(f64::INFINITY, f64::min)
}

/// Per-element bounds plus the hole-circle corner determinants, the spot
/// where orientation failures of near-cavity deformations show first.
#[derive(Debug, Clone)]
pub struct OrientationReport {
    pub rows: Vec<OrientationRow>,
    pub inner_corners: Vec<(usize, f64)>,
    pub positive: bool,
}

impl OrientationReport {
    /// Elements whose determinant bound fails to clear zero.
    pub fn offenders(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| !(r.certified && r.min_det > 0.0))
            .map(|r| r.element)
            .collect()
    }
}

pub fn orientation_report(f: &FeFunction) -> OrientationReport {
    let rows = deformation_orientation(f);
    let inner_corners = inner_corner_dets(f);
    let positive = rows.iter().all(|r| r.certified && r.min_det > 0.0)
        && inner_corners.iter().all(|&(_, d)| d > 0.0);
    OrientationReport {
        rows,
        inner_corners,
        positive,
    }
}

pub fn rows_to_csv(rows: &[OrientationRow]) -> String {
    let mut out = String::from("element,kind,layer,min_det,certified\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.16e},{}\n",
            r.element,
            r.kind.letter(),
            r.layer,
            r.min_det,
            r.certified
        ));
    }
    out
}

/// det grad y at the hole-circle corners of the innermost layer, the
/// points where a cavitating deformation is under the most strain. One
/// row per first-layer element carrying the smallest of its hole-circle
/// corner values.
pub fn inner_corner_dets(f: &FeFunction) -> Vec<(usize, f64)> {
    let mesh = f.mesh;
    let mut rows = Vec::new();
    for (i, e) in mesh.elements.iter().enumerate() {
        if e.layer != 0 {
            continue;
        }
        let corners: &[RefPoint] = match e.kind {
            ElementKind::A => &[RefPoint { xi: 0.0, eta: 0.0 }],
            ElementKind::B => &[
                RefPoint { xi: 1.0, eta: 0.0 },
                RefPoint { xi: 0.0, eta: 1.0 },
            ],
            // The innermost layer is never a split one.
            ElementKind::C | ElementKind::D => &[],
        };
        let geo = mesh.element_map(e);
        let def = f.deformed_map(e);
        let mut det = f64::INFINITY;
        for &p in corners {
            det = det.min(def.det_jacobian(p) / geo.det_jacobian(p));
        }
        if det.is_finite() {
            rows.push((i, det));
        }
    }
    rows
}

pub fn inner_corners_to_csv(f: &FeFunction) -> String {
    let mesh = f.mesh;
    let mut out = String::from("element,kind,det\n");
    for (i, det) in inner_corner_dets(f) {
        out.push_str(&format!(
            "{},{},{:.16e}\n",
            i,
            mesh.elements[i].kind.letter(),
            det
        ));
    }
    out
}
