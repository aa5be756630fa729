//! Stored energy of a deformation and its assembly by quadrature.
//!
//! The density is W(F) = omega |F|^p + g(det F) with g convex, blowing up
//! as the determinant approaches zero. The two terms are tracked
//! separately through every sum: the first carries the cavity's
//! singular energy, the second the compression penalty, and their
//! per-layer split is what the grading of the mesh is designed around.
//!
//! A deformation whose determinant is nonpositive at a quadrature point
//! gets energy +inf rather than an error, so a line search can treat
//! infeasible trial steps as ordinary rejections.

use crate::accum::neumaier_sum;
use crate::exec::{map_indexed, ExecMode};
use crate::fem::FeFunction;
use crate::geometry::{Mat2, Point2};
use crate::meshgen::{area_increment, Element};
use crate::quadrature::TriRule;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct MaterialModel {
    /// Weight of the |F|^p term.
    pub omega: f64,
    /// Growth exponent, strictly between 1 and 2 in the plane.
    pub p: f64,
    /// Scale a of the volumetric penalty g(d) = a ((d-1)^2 / 2 + 1/d).
    pub g_scale: f64,
}

impl Default for MaterialModel {
    fn default() -> Self {
        MaterialModel {
            omega: 2.0 / 3.0,
            p: 1.5,
            g_scale: 2f64.powf(-0.25),
        }
    }
}

impl MaterialModel {
    /// Volumetric penalty; +inf for nonpositive determinants.
    pub fn g(&self, d: f64) -> f64 {
        if d <= 0.0 {
            f64::INFINITY
        } else {
            self.g_scale * (0.5 * (d - 1.0) * (d - 1.0) + 1.0 / d)
        }
    }

    /// dg/dd, defined for d > 0.
    pub fn g_prime(&self, d: f64) -> f64 {
        self.g_scale * (d - 1.0 - 1.0 / (d * d))
    }

    /// d^2 g / dd^2; strictly positive on d > 0, which is the convexity
    /// the existence theory leans on.
    pub fn g_second(&self, d: f64) -> f64 {
        self.g_scale * (1.0 + 2.0 / (d * d * d))
    }

    /// The two density terms (omega |F|^p, g(det F)).
    pub fn density_split(&self, f: &Mat2) -> (f64, f64) {
        (
            self.omega * f.norm_sq().powf(0.5 * self.p),
            self.g(f.det()),
        )
    }

    pub fn density(&self, f: &Mat2) -> f64 {
        let (e1, e2) = self.density_split(f);
        e1 + e2
    }

    /// dW/dF = omega p |F|^(p-2) F + g'(det F) cof F, for det F > 0.
    pub fn density_grad(&self, f: &Mat2) -> Mat2 {
        let stretch = self.omega * self.p * f.norm_sq().powf(0.5 * self.p - 1.0);
        f.scale(stretch) + f.cofactor().scale(self.g_prime(f.det()))
    }
}

struct ElementQuad {
    e1: f64,
    e2: f64,
    min_det: f64,
}

fn element_quad(
    f: &FeFunction,
    e: &Element,
    m: &MaterialModel,
    rule: &TriRule,
) -> Result<ElementQuad> {
    let geo = f.mesh.element_map(e);
    let def = f.deformed_map(e);
    let mut e1 = 0.0;
    let mut e2 = 0.0;
    let mut min_det = f64::INFINITY;
    for q in &rule.points {
        let jg = geo.jacobian(q.at);
        let det_g = jg.det();
        if !(det_g > 0.0) {
            return Err(Error::SingularJacobian(det_g));
        }
        let inv = jg.inverse().expect("positive determinant");
        let grad = def.jacobian(q.at).mul(inv);
        min_det = min_det.min(grad.det());
        let (w1, w2) = m.density_split(&grad);
        e1 += q.weight * det_g * w1;
        e2 += q.weight * det_g * w2;
    }
    Ok(ElementQuad { e1, e2, min_det })
}

/// (E1, E2) of one element; E2 is +inf when the deformation folds at a
/// quadrature point.
pub fn element_energy(
    f: &FeFunction,
    e: &Element,
    m: &MaterialModel,
    rule: &TriRule,
) -> Result<(f64, f64)> {
    element_quad(f, e, m, rule).map(|q| (q.e1, q.e2))
}

/// Energy of one annular layer together with the share of the grading
/// integral it was sized for.
#[derive(Debug, Clone, Copy)]
pub struct LayerEnergy {
    pub layer: usize,
    pub inner_radius: f64,
    pub thickness: f64,
    pub node_count: u32,
    pub e1: f64,
    pub e2: f64,
    /// A(eps, tau), the increment of R^(2-p) across the layer.
    pub area_increment: f64,
}

#[derive(Debug, Clone)]
pub struct EnergyBreakdown {
    pub e1: f64,
    pub e2: f64,
    pub total: f64,
    /// Smallest deformation determinant seen at any quadrature point.
    pub min_quad_det: f64,
    pub per_layer: Vec<LayerEnergy>,
}

impl EnergyBreakdown {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,eps,tau,N,E1,E2,A\n");
        for l in &self.per_layer {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
                l.layer, l.inner_radius, l.thickness, l.node_count, l.e1, l.e2, l.area_increment
            ));
        }
        out
    }
}

pub fn total_energy(f: &FeFunction, m: &MaterialModel) -> Result<EnergyBreakdown> {
    total_energy_with(f, m, TriRule::degree5(), ExecMode::default())
}

pub fn total_energy_with(
    f: &FeFunction,
    m: &MaterialModel,
    rule: &TriRule,
    mode: ExecMode,
) -> Result<EnergyBreakdown> {
    let mesh = f.mesh;
    let per: Result<Vec<ElementQuad>> =
        map_indexed(mode, mesh.elements.len(), |i| {
            element_quad(f, &mesh.elements[i], m, rule)
        })
        .into_iter()
        .collect();
    let per = per?;

    let layers = &mesh.schedule.layers;
    let mut by_layer: Vec<(Vec<f64>, Vec<f64>)> =
        vec![(Vec::new(), Vec::new()); layers.len()];
    for (e, q) in mesh.elements.iter().zip(&per) {
        let slot = &mut by_layer[e.layer as usize];
        slot.0.push(q.e1);
        slot.1.push(q.e2);
    }

    let e1 = neumaier_sum(per.iter().map(|q| q.e1));
    let e2 = neumaier_sum(per.iter().map(|q| q.e2));
    let min_quad_det = per
        .iter()
        .map(|q| q.min_det)
        .fold(f64::INFINITY, f64::min);
    let per_layer = layers
        .iter()
        .enumerate()
        .zip(by_layer)
        .map(|((i, spec), (ones, twos))| LayerEnergy {
            layer: i,
            inner_radius: spec.inner_radius,
            thickness: spec.thickness,
            node_count: spec.node_count,
            e1: neumaier_sum(ones),
            e2: neumaier_sum(twos),
            area_increment: area_increment(spec.inner_radius, spec.thickness, m.p),
        })
        .collect();

    Ok(EnergyBreakdown {
        e1,
        e2,
        total: e1 + e2,
        min_quad_det,
        per_layer,
    })
}

/// Total energy and feasibility floor only, the line-search workhorse.
#[derive(Debug, Clone, Copy)]
pub struct EnergyValue {
    pub total: f64,
    pub min_quad_det: f64,
}

pub fn evaluate(
    f: &FeFunction,
    m: &MaterialModel,
    rule: &TriRule,
    mode: ExecMode,
) -> Result<EnergyValue> {
    let mesh = f.mesh;
    let per: Result<Vec<ElementQuad>> =
        map_indexed(mode, mesh.elements.len(), |i| {
            element_quad(f, &mesh.elements[i], m, rule)
        })
        .into_iter()
        .collect();
    let per = per?;
    Ok(EnergyValue {
        total: neumaier_sum(per.iter().map(|q| q.e1 + q.e2)),
        min_quad_det: per
            .iter()
            .map(|q| q.min_det)
            .fold(f64::INFINITY, f64::min),
    })
}

fn element_gradient(
    f: &FeFunction,
    e: &Element,
    m: &MaterialModel,
    rule: &TriRule,
) -> Result<(ElementQuad, [Point2; 6])> {
    let geo = f.mesh.element_map(e);
    let def = f.deformed_map(e);
    let mut quad = ElementQuad {
        e1: 0.0,
        e2: 0.0,
        min_det: f64::INFINITY,
    };
    let mut local = [Point2::default(); 6];
    for q in &rule.points {
        let jg = geo.jacobian(q.at);
        let det_g = jg.det();
        if !(det_g > 0.0) {
            return Err(Error::SingularJacobian(det_g));
        }
        let inv = jg.inverse().expect("positive determinant");
        let grad = def.jacobian(q.at).mul(inv);
        quad.min_det = quad.min_det.min(grad.det());
        let (w1, w2) = m.density_split(&grad);
        quad.e1 += q.weight * det_g * w1;
        quad.e2 += q.weight * det_g * w2;

        let dw = m.density_grad(&grad);
        let shapes = crate::geometry::shape_gradients(q.at);
        let scale = q.weight * det_g;
        for c in 0..6 {
            // Physical shape gradient: row vector (d mu / d ref) * inv.
            let gx = shapes[c][0] * inv.m11 + shapes[c][1] * inv.m21;
            let gy = shapes[c][0] * inv.m12 + shapes[c][1] * inv.m22;
            local[c].x += scale * (dw.m11 * gx + dw.m12 * gy);
            local[c].y += scale * (dw.m21 * gx + dw.m22 * gy);
        }
    }
    Ok((quad, local))
}

/// Energy value plus its gradient with respect to every nodal dof.
pub fn assemble(
    f: &FeFunction,
    m: &MaterialModel,
    rule: &TriRule,
    mode: ExecMode,
) -> Result<(EnergyValue, Vec<Point2>)> {
    let mesh = f.mesh;
    let per: Result<Vec<(ElementQuad, [Point2; 6])>> =
        map_indexed(mode, mesh.elements.len(), |i| {
            element_gradient(f, &mesh.elements[i], m, rule)
        })
        .into_iter()
        .collect();
    let per = per?;

    let mut gradient = vec![Point2::default(); mesh.nodes.len()];
    for (e, (_, local)) in mesh.elements.iter().zip(&per) {
        for c in 0..6 {
            gradient[e.nodes[c]] = gradient[e.nodes[c]] + local[c];
        }
    }
    Ok((
        EnergyValue {
            total: neumaier_sum(per.iter().map(|(q, _)| q.e1 + q.e2)),
            min_quad_det: per
                .iter()
                .map(|(q, _)| q.min_det)
                .fold(f64::INFINITY, f64::min),
        },
        gradient,
    ))
}
