//! Plain-text mesh dumps.
//!
//! The format is line oriented and self-describing: a `cavmesh 1` header,
//! the layer table, node coordinates, element connectivity, and the two
//! boundary id lists. Floats carry 17 significant digits so a dump
//! reproduces the mesh bit for bit.

use crate::meshgen::mesh::AnnulusMesh;
use std::fmt::Write;

pub fn mesh_to_text(mesh: &AnnulusMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cavmesh 1");
    let _ = writeln!(out, "eps0 {:.16e}", mesh.schedule.eps0);
    let _ = writeln!(out, "outer {:.16e}", mesh.schedule.outer_radius());
    let _ = writeln!(out, "layers {}", mesh.schedule.layers.len());
    for (j, l) in mesh.schedule.layers.iter().enumerate() {
        let _ = writeln!(
            out,
            "layer {j} {:.16e} {:.16e} {} {}",
            l.inner_radius,
            l.thickness,
            l.node_count,
            if l.conforming { 1 } else { 0 }
        );
    }
    let _ = writeln!(out, "nodes {}", mesh.nodes.len());
    for (i, p) in mesh.nodes.iter().enumerate() {
        let _ = writeln!(out, "{i} {:.16e} {:.16e}", p.x, p.y);
    }
    let _ = writeln!(out, "elements {}", mesh.elements.len());
    for (i, e) in mesh.elements.iter().enumerate() {
        let n = e.nodes;
        let _ = writeln!(
            out,
            "{i} {} {} {} {} {} {} {} {}",
            e.kind.letter(),
            n[0],
            n[1],
            n[2],
            n[3],
            n[4],
            n[5],
            e.layer
        );
    }
    let ids = |list: &[usize]| {
        list.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, "inner_boundary {}", mesh.inner_boundary.len());
    let _ = writeln!(out, "{}", ids(&mesh.inner_boundary));
    let _ = writeln!(out, "outer_boundary {}", mesh.outer_boundary.len());
    let _ = writeln!(out, "{}", ids(&mesh.outer_boundary));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::schedule::LayerSchedule;

    #[test]
    fn dump_layout_is_stable() {
        let schedule = LayerSchedule::from_layers(0.5, &[(0.5, 4)]).unwrap();
        let mesh = AnnulusMesh::build(schedule).unwrap();
        let text = mesh_to_text(&mesh);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("cavmesh 1"));
        assert_eq!(lines.next(), Some("eps0 5.0000000000000000e-1"));
        assert_eq!(lines.next(), Some("outer 1.0000000000000000e0"));
        assert_eq!(lines.next(), Some("layers 1"));
        assert_eq!(
            lines.next(),
            Some("layer 0 5.0000000000000000e-1 5.0000000000000000e-1 4 0")
        );
        assert_eq!(lines.next(), Some("nodes 24"));
        // Node 0 sits at angle zero on the hole circle.
        assert_eq!(lines.next(), Some("0 5.0000000000000000e-1 0.0000000000000000e0"));
        let body: Vec<&str> = text.lines().collect();
        assert_eq!(body.len(), 4 + 1 + 1 + 24 + 1 + 8 + 4);
        assert!(body.iter().any(|l| *l == "elements 8"));
    }
}
