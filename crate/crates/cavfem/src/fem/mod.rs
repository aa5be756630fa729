//! Finite element functions on curved meshes.
//!
//! A vector-valued quadratic function is stored by its nodal values. On
//! each element those values define a second [`QuadraticMap`] alongside
//! the geometric one, so the deformation gradient at a reference point is
//! the product of the deformed map's jacobian with the inverse of the
//! geometric map's.

pub mod closed_form;
pub mod det_bound;
pub mod orientation;

use crate::geometry::{Mat2, Point2, QuadraticMap, RefPoint};
use crate::meshgen::{AnnulusMesh, Element};
use crate::{Error, Result};

/// A piecewise-quadratic vector field given by one value per mesh node.
#[derive(Debug, Clone)]
pub struct FeFunction<'m> {
    pub mesh: &'m AnnulusMesh,
    pub values: Vec<Point2>,
}

impl<'m> FeFunction<'m> {
    /// Nodal interpolation of `f`.
    pub fn interpolate<F: Fn(Point2) -> Point2>(mesh: &'m AnnulusMesh, f: F) -> FeFunction<'m> {
        FeFunction {
            mesh,
            values: mesh.nodes.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn from_values(mesh: &'m AnnulusMesh, values: Vec<Point2>) -> Result<FeFunction<'m>> {
        if values.len() != mesh.nodes.len() {
            return Err(Error::InsufficientData(format!(
                "{} nodal values for {} nodes",
                values.len(),
                mesh.nodes.len()
            )));
        }
        Ok(FeFunction { mesh, values })
    }

    /// Reads the field from a flat dof vector `[x0, y0, x1, y1, ...]`.
    pub fn from_dofs(mesh: &'m AnnulusMesh, dofs: &[f64]) -> Result<FeFunction<'m>> {
        if dofs.len() != 2 * mesh.nodes.len() {
            return Err(Error::InsufficientData(format!(
                "{} dofs for {} nodes",
                dofs.len(),
                mesh.nodes.len()
            )));
        }
        Ok(FeFunction {
            mesh,
            values: (0..mesh.nodes.len())
                .map(|i| Point2::new(dofs[2 * i], dofs[2 * i + 1]))
                .collect(),
        })
    }

    pub fn to_dofs(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.values.len());
        for v in &self.values {
            out.push(v.x);
            out.push(v.y);
        }
        out
    }

    /// The deformed image of one element: the same reference triangle
    /// mapped through this function's nodal values.
    pub fn deformed_map(&self, e: &Element) -> QuadraticMap {
        QuadraticMap::new([
            self.values[e.nodes[0]],
            self.values[e.nodes[1]],
            self.values[e.nodes[2]],
            self.values[e.nodes[3]],
            self.values[e.nodes[4]],
            self.values[e.nodes[5]],
        ])
    }

    /// Value of the field at a reference point of element `e`.
    pub fn eval(&self, e: &Element, p: RefPoint) -> Point2 {
        self.deformed_map(e).eval(p)
    }

    /// Deformation gradient at a reference point of element `e`, with the
    /// two reference jacobians it is built from. Fails on a singular
    /// geometric jacobian.
    pub fn gradient(&self, e: &Element, p: RefPoint) -> Result<Mat2> {
        let jg = self.mesh.element_map(e).jacobian(p);
        let inv = jg
            .inverse()
            .ok_or(Error::SingularJacobian(jg.det()))?;
        Ok(self.deformed_map(e).jacobian(p).mul(inv))
    }

    /// Certified lower bound of det grad over one element.
    pub fn min_det_bound(&self, e: &Element) -> det_bound::DetBound {
        det_bound::min_det_on_element(&self.mesh.element_map(e), &self.deformed_map(e))
    }
}
