//! Mesh assembly from a layer schedule.
//!
//! Every node angle in the mesh is an exact integer multiple of the unit
//! `pi / (2 N0)`, where `N0` is the hole ring's count. Layer offsets,
//! half-steps, and full steps all stay on that grid, so nodes shared
//! between neighboring elements and layers are found by exact integer
//! lookup rather than coordinate comparison; a missed lookup means the
//! construction itself is wrong and surfaces as an error.

use crate::geometry::{Point2, QuadraticMap};
use crate::meshgen::schedule::LayerSchedule;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// The four element shapes that tile a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// Apex on the inner circle, curved base arc on the outer circle.
    A,
    /// Apex on the outer circle, curved base arc on the inner circle.
    B,
    /// Transition wedge on the counterclockwise side of a radial edge:
    /// vertices inner, outer, then the next inner corner.
    C,
    /// Transition wedge on the clockwise side of the same radial edge.
    D,
}

impl ElementKind {
    pub fn letter(self) -> char {
        match self {
            ElementKind::A => 'A',
            ElementKind::B => 'B',
            ElementKind::C => 'C',
            ElementKind::D => 'D',
        }
    }
}

/// One curved six-node element, with the layer data its closed forms need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    /// Global node ids in reference order `[a1, a2, a3, a12, a13, a23]`.
    pub nodes: [usize; 6],
    /// Inner radius of the element's layer.
    pub inner_radius: f64,
    /// Thickness of the element's layer.
    pub thickness: f64,
    /// Angular index N of the layer.
    pub node_count: u32,
    /// Layer index, counted from the hole outward.
    pub layer: u32,
}

/// A conforming mesh of the annulus described by a schedule.
#[derive(Debug, Clone)]
pub struct AnnulusMesh {
    pub nodes: Vec<Point2>,
    pub elements: Vec<Element>,
    /// Node ids on the hole circle, in angular order.
    pub inner_boundary: Vec<usize>,
    /// Node ids on the outer circle, in angular order.
    pub outer_boundary: Vec<usize>,
    pub schedule: LayerSchedule,
}

impl AnnulusMesh {
    /// Realizes a schedule as a mesh.
    pub fn build(schedule: LayerSchedule) -> Result<AnnulusMesh> {
        let n0 = schedule.layers[0].node_count as u64;
        let full = 4 * n0;
        let unit = PI / (2.0 * n0 as f64);

        let mut nodes: Vec<Point2> = Vec::with_capacity(schedule.total_nodes());
        let add = |nodes: &mut Vec<Point2>, radius: f64, ang: u64| -> usize {
            let theta = ang as f64 * unit;
            nodes.push(Point2::new(radius * theta.cos(), radius * theta.sin()));
            nodes.len() - 1
        };

        // Hole circle.
        let mut circle: BTreeMap<u64, usize> = BTreeMap::new();
        for s in 0..2 * n0 {
            let a = (2 * s) % full;
            let id = add(&mut nodes, schedule.eps0, a);
            circle.insert(a, id);
        }
        let inner_boundary: Vec<usize> = circle.values().copied().collect();

        let mut elements = Vec::with_capacity(schedule.total_elements());
        let mut b: u64 = 0;
        for (j, layer) in schedule.layers.iter().enumerate() {
            let n = layer.node_count as u64;
            let uj = 1u64 << (layer.halvings + 1);
            let hj = 1u64 << layer.halvings;

            let mut mid: BTreeMap<u64, usize> = BTreeMap::new();
            for l in 0..2 * n {
                let a = (b + (2 * l + 1) * hj) % full;
                let id = add(&mut nodes, layer.mid_radius(), a);
                mid.insert(a, id);
            }
            if layer.conforming {
                for s in 0..n {
                    let a = (b + (2 * s + 1) * uj) % full;
                    let id = add(&mut nodes, layer.mid_radius(), a);
                    mid.insert(a, id);
                }
            }

            let mut outer: BTreeMap<u64, usize> = BTreeMap::new();
            for s in 0..2 * n {
                let a = (b + s * uj) % full;
                let id = add(&mut nodes, layer.outer_radius(), a);
                outer.insert(a, id);
            }

            let look = |map: &BTreeMap<u64, usize>, a: u64| -> Result<usize> {
                map.get(&(a % full)).copied().ok_or_else(|| {
                    Error::NonConforming(format!(
                        "no node at angle index {} of layer {j}",
                        a % full
                    ))
                })
            };
            let make = |kind: ElementKind, ids: [usize; 6]| Element {
                kind,
                nodes: ids,
                inner_radius: layer.inner_radius,
                thickness: layer.thickness,
                node_count: layer.node_count,
                layer: j as u32,
            };

            for k in 0..n {
                let alpha = (b + 2 * k * uj) % full;
                let beta = (alpha + uj) % full;
                elements.push(make(
                    ElementKind::A,
                    [
                        look(&circle, alpha)?,
                        look(&outer, alpha + full - uj)?,
                        look(&outer, alpha + uj)?,
                        look(&mid, alpha + full - hj)?,
                        look(&mid, alpha + hj)?,
                        look(&outer, alpha)?,
                    ],
                ));
                if layer.conforming {
                    elements.push(make(
                        ElementKind::D,
                        [
                            look(&circle, beta)?,
                            look(&circle, beta + full - uj)?,
                            look(&outer, beta)?,
                            look(&circle, beta + full - hj)?,
                            look(&mid, beta)?,
                            look(&mid, beta + full - hj)?,
                        ],
                    ));
                    elements.push(make(
                        ElementKind::C,
                        [
                            look(&circle, beta)?,
                            look(&outer, beta)?,
                            look(&circle, beta + uj)?,
                            look(&mid, beta)?,
                            look(&circle, beta + hj)?,
                            look(&mid, beta + hj)?,
                        ],
                    ));
                } else {
                    elements.push(make(
                        ElementKind::B,
                        [
                            look(&outer, beta)?,
                            look(&circle, beta + uj)?,
                            look(&circle, beta + full - uj)?,
                            look(&mid, beta + hj)?,
                            look(&mid, beta + full - hj)?,
                            look(&circle, beta)?,
                        ],
                    ));
                }
            }

            b = (b + uj) % full;
            circle = outer;
        }
        let outer_boundary: Vec<usize> = circle.values().copied().collect();

        if nodes.len() != schedule.total_nodes() || elements.len() != schedule.total_elements() {
            return Err(Error::NonConforming(format!(
                "built {} nodes and {} elements, expected {} and {}",
                nodes.len(),
                elements.len(),
                schedule.total_nodes(),
                schedule.total_elements()
            )));
        }

        Ok(AnnulusMesh {
            nodes,
            elements,
            inner_boundary,
            outer_boundary,
            schedule,
        })
    }

    /// The geometric map of one element.
    pub fn element_map(&self, e: &Element) -> QuadraticMap {
        QuadraticMap::new([
            self.nodes[e.nodes[0]],
            self.nodes[e.nodes[1]],
            self.nodes[e.nodes[2]],
            self.nodes[e.nodes[3]],
            self.nodes[e.nodes[4]],
            self.nodes[e.nodes[5]],
        ])
    }
}
