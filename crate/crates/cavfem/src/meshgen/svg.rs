//! SVG rendering of curved meshes.

use crate::geometry::RefPoint;
use crate::meshgen::mesh::{AnnulusMesh, ElementKind};
use std::fmt::Write;

/// Line segments used to draw each curved edge.
const EDGE_SEGMENTS: usize = 16;

/// Renders the mesh as a standalone SVG document. Curved edges are
/// sampled through the element maps, so the picture shows the true
/// element shapes rather than their straightened chords.
pub fn mesh_to_svg(mesh: &AnnulusMesh) -> String {
    let r = mesh.schedule.outer_radius();
    let pad = 1.05 * r;
    let stroke = 1.5e-3 * r;
    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
        -pad,
        -pad,
        2.0 * pad,
        2.0 * pad
    );
    out.push('\n');
    for e in &mesh.elements {
        let map = mesh.element_map(e);
        let mut d = String::new();
        // Walk the boundary: edge 1-2, then 2-3, then 3-1.
        let edges: [fn(f64) -> RefPoint; 3] = [
            |t| RefPoint::new(t, 0.0),
            |t| RefPoint::new(1.0 - t, t),
            |t| RefPoint::new(0.0, 1.0 - t),
        ];
        for (k, edge) in edges.iter().enumerate() {
            let start = if k == 0 { 0 } else { 1 };
            for s in start..=EDGE_SEGMENTS {
                let p = map.eval(edge(s as f64 / EDGE_SEGMENTS as f64));
                let cmd = if k == 0 && s == 0 { 'M' } else { 'L' };
                // SVG's y axis points down; flip to keep the usual view.
                let _ = write!(d, "{cmd}{:.9} {:.9}", p.x, -p.y);
            }
        }
        d.push('Z');
        let fill = match e.kind {
            ElementKind::A => "#dbe9f6",
            ElementKind::B => "#fdf1d6",
            ElementKind::C => "#ddf0de",
            ElementKind::D => "#f6dfdb",
        };
        let _ = writeln!(
            out,
            r##"<path d="{d}" fill="{fill}" stroke="#444" stroke-width="{stroke:.3e}"/>"##
        );
    }
    out.push_str("</svg>\n");
    out
}
