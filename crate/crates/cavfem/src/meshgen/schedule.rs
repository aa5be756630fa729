//! Layer schedules: how thick each annular layer is and how many element
//! pairs it carries around the circle.
//!
//! A schedule covers the annulus from the hole radius `eps0` out to 1 with
//! layers whose thickness grows away from the hole. The thickness of a
//! layer starting at radius `x` is capped twice over: by `c1 * sqrt(x)`,
//! which controls the distortion of curved elements near the hole, and by
//! [`thickness_cap`], which keeps the radial interpolation error of the
//! expected deformation in step with the target mesh size `h`. Angular
//! resolution follows the same logic: a ring at `(x, tau)` may not be
//! coarser than [`angular_cap`] allows, counts only ever halve from one
//! layer to the next, and a halving ring is flagged so the mesh builder
//! can insert the conforming transition pattern there.

use crate::{Error, Result};

/// How to choose the outermost ring count from its admissible bracket
/// `[a1/h, a2/h]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmPolicy {
    /// Smallest admissible count. The default.
    Smallest,
    /// Largest admissible count.
    Largest,
    /// Caller-chosen count, still validated against the bracket.
    Exact(u32),
}

/// Parameters that turn a hole radius and target size into a schedule.
#[derive(Debug, Clone)]
pub struct MeshConfig {
    /// Hole radius, strictly between 0 and 1.
    pub eps0: f64,
    /// Target mesh size for the outermost ring.
    pub h: f64,
    /// Growth exponent of the stored energy, strictly between 1 and 2.
    pub p: f64,
    /// Grading constant coupling thickness to mesh size.
    pub c: f64,
    /// Cap factor for thickness relative to sqrt(radius).
    pub c1: f64,
    /// Cap factor for angular width relative to (radius * thickness)^(1/4).
    pub c2: f64,
    /// Lower bracket factor for the outermost count.
    pub a1: f64,
    /// Upper bracket factor for the outermost count.
    pub a2: f64,
    /// Tie-break policy inside the bracket.
    pub ring_policy: NmPolicy,
}

impl MeshConfig {
    pub fn new(eps0: f64, h: f64) -> Self {
        MeshConfig {
            eps0,
            h,
            p: 1.5,
            c: 2.0,
            c1: 0.9,
            c2: 0.5,
            a1: 0.8,
            a2: 1.0,
            ring_policy: NmPolicy::Smallest,
        }
    }
}

/// One annular layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec {
    /// Inner radius of the layer.
    pub inner_radius: f64,
    /// Radial extent of the layer.
    pub thickness: f64,
    /// Angular index N: the bounding circles carry 2N nodes each and the
    /// layer holds N apex elements spanning an angle 2*pi/N apiece.
    pub node_count: u32,
    /// Halvings applied so far: `node_count = N0 >> halvings`.
    pub halvings: u32,
    /// True when the count halved entering this layer, so the layer uses
    /// the three-element transition pattern against its finer inner circle.
    pub conforming: bool,
}

impl LayerSpec {
    pub fn outer_radius(&self) -> f64 {
        self.inner_radius + self.thickness
    }

    pub fn mid_radius(&self) -> f64 {
        self.inner_radius + 0.5 * self.thickness
    }

    /// Elements in this layer: 2N standard, 3N conforming.
    pub fn element_count(&self) -> usize {
        let n = self.node_count as usize;
        if self.conforming {
            3 * n
        } else {
            2 * n
        }
    }
}

/// A full radial schedule from the hole to the outer boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSchedule {
    pub eps0: f64,
    pub layers: Vec<LayerSpec>,
}

/// Largest mesh size the grading construction accepts.
pub fn max_mesh_size(p: f64, c: f64) -> f64 {
    let e = 2.0 - p;
    let b1 = e / (2f64.powf(e) * c);
    let b2 = e / (2f64.powf(p - 1.0) * c);
    b1.min(b2)
}

/// Largest admissible thickness for a layer whose inner radius is `x`:
/// the increment that advances `x^(2-p)` by exactly `c * h`.
pub fn thickness_cap(x: f64, h: f64, p: f64, c: f64) -> f64 {
    let e = 2.0 - p;
    (x.powf(e) + c * h).powf(1.0 / e) - x
}

/// Increment of `x^(2-p)` across a layer; the per-layer share of the
/// singular part of the energy scales with it.
pub fn area_increment(eps: f64, tau: f64, p: f64) -> f64 {
    let e = 2.0 - p;
    (eps + tau).powf(e) - eps.powf(e)
}

/// Upper bound on the angular width 1/N admissible for a ring at
/// `(eps, tau)`.
pub fn angular_cap(eps: f64, tau: f64, config: &MeshConfig) -> f64 {
    let b1 = config.c2 * (eps * tau).powf(0.25);
    let b2 = (config.c * config.c * tau * config.h * config.h).powf(0.25);
    b1.min(b2)
}

/// Smallest integer count that is at least `x`, tolerant of values that
/// sit a rounding error past an exact integer.
fn least_count(x: f64) -> u32 {
    let tol = 1e-9 * (1.0 + x.abs());
    let mut n = x.ceil() as i64;
    while (n as f64) < x - tol {
        n += 1;
    }
    while n > 1 && ((n - 1) as f64) >= x - tol {
        n -= 1;
    }
    n.max(1) as u32
}

/// Largest integer count that is at most `x`, with the same tolerance.
fn greatest_count(x: f64) -> u32 {
    let tol = 1e-9 * (1.0 + x.abs());
    let mut n = x.floor() as i64;
    while (n as f64) > x + tol {
        n -= 1;
    }
    while ((n + 1) as f64) <= x + tol {
        n += 1;
    }
    n.max(1) as u32
}

/// Slack under which a layer is allowed to swallow the remaining gap to
/// the outer radius instead of leaving a degenerate sliver behind.
const CLOSURE_TIE: f64 = 1e-9;

impl LayerSchedule {
    /// Plans a schedule for `config`.
    ///
    /// Thicknesses are swept outward first, each layer taking the largest
    /// admissible step, the last one clamped to the remaining room. The
    /// outermost count comes from the bracket policy; the innermost count
    /// doubles it until the hole ring satisfies [`angular_cap`], and the
    /// sweep then halves the count outward as soon as each ring's cap
    /// permits, at most once per ring.
    pub fn plan(config: &MeshConfig) -> Result<LayerSchedule> {
        if !(config.eps0 > 0.0 && config.eps0 < 1.0) {
            return Err(Error::InfeasibleConfig(format!(
                "hole radius {} must lie strictly between 0 and 1",
                config.eps0
            )));
        }
        if !(config.p > 1.0 && config.p < 2.0) {
            return Err(Error::InfeasibleConfig(format!(
                "growth exponent {} must lie strictly between 1 and 2",
                config.p
            )));
        }
        for (name, v) in [
            ("c", config.c),
            ("c1", config.c1),
            ("c2", config.c2),
            ("a1", config.a1),
            ("a2", config.a2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InfeasibleConfig(format!(
                    "constant {name} = {v} must be positive"
                )));
            }
        }
        let h_max = max_mesh_size(config.p, config.c);
        if !(config.h > 0.0 && config.h <= h_max) {
            return Err(Error::InfeasibleConfig(format!(
                "mesh size {} outside (0, {h_max:.6}]",
                config.h
            )));
        }

        // Thickness sweep.
        let mut taus = Vec::new();
        let mut eps = config.eps0;
        loop {
            let cap = (config.c1 * eps.sqrt()).min(thickness_cap(eps, config.h, config.p, config.c));
            let room = 1.0 - eps;
            if cap >= room - CLOSURE_TIE {
                taus.push(room);
                break;
            }
            taus.push(cap);
            eps += cap;
            if taus.len() > 100_000 {
                return Err(Error::InfeasibleConfig(
                    "thickness grading does not reach the outer radius".into(),
                ));
            }
        }

        // Outermost count from the bracket.
        let lo = config.a1 / config.h;
        let hi = config.a2 / config.h;
        let nm = match config.ring_policy {
            NmPolicy::Smallest => least_count(lo),
            NmPolicy::Largest => greatest_count(hi),
            NmPolicy::Exact(n) => n,
        };
        let tol = 1e-9 * (1.0 + hi);
        if (nm as f64) < lo - tol || (nm as f64) > hi + tol {
            return Err(Error::InfeasibleConfig(format!(
                "outer ring count {nm} outside its bracket [{lo:.4}, {hi:.4}]"
            )));
        }
        if nm < 3 {
            return Err(Error::InfeasibleConfig(format!(
                "outer ring count {nm} is too small to form closed rings"
            )));
        }

        // Innermost count: double the outer count until the hole ring
        // satisfies its cap.
        let cap0 = angular_cap(config.eps0, taus[0], config);
        let need = least_count(1.0 / cap0);
        let mut k = 0u32;
        while (nm << k) < need {
            k += 1;
            if k > 32 {
                return Err(Error::InfeasibleConfig(
                    "inner ring count overflows while chasing the hole cap".into(),
                ));
            }
        }

        // Count sweep: halve as soon as each ring's own cap allows.
        let mut layers = Vec::with_capacity(taus.len());
        let mut eps = config.eps0;
        let mut n = nm << k;
        let mut applied = 0u32;
        for (j, &tau) in taus.iter().enumerate() {
            let mut conforming = false;
            if j > 0 && applied < k {
                let half = n / 2;
                if 1.0 / half as f64 <= angular_cap(eps, tau, config) * (1.0 + 1e-12) {
                    n = half;
                    applied += 1;
                    conforming = true;
                }
            }
            layers.push(LayerSpec {
                inner_radius: eps,
                thickness: tau,
                node_count: n,
                halvings: applied,
                conforming,
            });
            eps += tau;
        }

        Ok(LayerSchedule {
            eps0: config.eps0,
            layers,
        })
    }

    /// Builds a schedule directly from `(thickness, count)` pairs, for
    /// meshes that do not come out of the planner. The outer radius is
    /// whatever the thicknesses add up to.
    pub fn from_layers(eps0: f64, layers: &[(f64, u32)]) -> Result<LayerSchedule> {
        if !(eps0 > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "inner radius {eps0} must be positive"
            )));
        }
        if layers.is_empty() {
            return Err(Error::InvalidSchedule("no layers".into()));
        }
        let n0 = layers[0].1;
        let mut specs = Vec::with_capacity(layers.len());
        let mut eps = eps0;
        let mut prev_n = n0;
        for (j, &(tau, n)) in layers.iter().enumerate() {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::InvalidSchedule(format!(
                    "layer {j} thickness {tau} must be positive"
                )));
            }
            if n < 3 {
                return Err(Error::InvalidSchedule(format!(
                    "layer {j} count {n} is too small to form closed rings"
                )));
            }
            let conforming = j > 0 && prev_n == 2 * n;
            if j > 0 && !conforming && n != prev_n {
                return Err(Error::InvalidSchedule(format!(
                    "layer {j} count {n} is neither {prev_n} nor its half"
                )));
            }
            specs.push(LayerSpec {
                inner_radius: eps,
                thickness: tau,
                node_count: n,
                halvings: n0.trailing_zeros() - n.trailing_zeros(),
                conforming,
            });
            eps += tau;
            prev_n = n;
        }
        Ok(LayerSchedule {
            eps0,
            layers: specs,
        })
    }

    pub fn outer_radius(&self) -> f64 {
        self.layers
            .last()
            .map(|l| l.outer_radius())
            .unwrap_or(self.eps0)
    }

    /// Total mesh nodes the schedule will produce: 2N0 on the hole circle,
    /// then per layer its mid-ring nodes (2N, plus N radial mids when
    /// conforming) and the 2N nodes of its outer circle.
    pub fn total_nodes(&self) -> usize {
        let mut total = 2 * self.layers[0].node_count as usize;
        for l in &self.layers {
            let n = l.node_count as usize;
            total += 2 * n + if l.conforming { n } else { 0 };
            total += 2 * n;
        }
        total
    }

    pub fn total_elements(&self) -> usize {
        self.layers.iter().map(|l| l.element_count()).sum()
    }

    /// Checks every invariant the planner promises, against `config`.
    ///
    /// `rel_slack` loosens the two caps multiplicatively; pass 0 for the
    /// strict check. The final layer is clamped to whatever room remains,
    /// so its angular cap is certified against the larger of its own
    /// thickness and its predecessor's, which is what actually set the
    /// count it inherited.
    pub fn certify(&self, config: &MeshConfig, rel_slack: f64) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSchedule(msg));
        if self.layers.is_empty() {
            return fail("no layers".into());
        }
        if (self.eps0 - config.eps0).abs() > 1e-12 {
            return fail(format!(
                "hole radius {} does not match the configuration's {}",
                self.eps0, config.eps0
            ));
        }
        let m = self.layers.len() - 1;
        let mut eps = self.eps0;
        let mut prev: Option<&LayerSpec> = None;
        for (j, l) in self.layers.iter().enumerate() {
            if (l.inner_radius - eps).abs() > 1e-9 {
                return fail(format!(
                    "layer {j} starts at {} instead of {eps}",
                    l.inner_radius
                ));
            }
            if !(l.thickness > 0.0) {
                return fail(format!("layer {j} thickness {} is not positive", l.thickness));
            }
            let t_cap = (config.c1 * l.inner_radius.sqrt())
                .min(thickness_cap(l.inner_radius, config.h, config.p, config.c));
            if l.thickness > t_cap * (1.0 + rel_slack) + CLOSURE_TIE {
                return fail(format!(
                    "layer {j} thickness {} exceeds its cap {t_cap}",
                    l.thickness
                ));
            }
            let tau_for_cap = if j == m && j > 0 {
                l.thickness.max(self.layers[j - 1].thickness)
            } else {
                l.thickness
            };
            let a_cap = angular_cap(l.inner_radius, tau_for_cap, config);
            if 1.0 / l.node_count as f64 > a_cap * (1.0 + rel_slack) * (1.0 + 1e-12) {
                return fail(format!(
                    "layer {j} count {} is coarser than its cap {a_cap} allows",
                    l.node_count
                ));
            }
            if let Some(p) = prev {
                let halved = p.node_count == 2 * l.node_count;
                if !halved && p.node_count != l.node_count {
                    return fail(format!(
                        "layer {j} count {} does not follow {} by keeping or halving",
                        l.node_count, p.node_count
                    ));
                }
                if l.conforming != halved {
                    return fail(format!("layer {j} conforming flag disagrees with its counts"));
                }
            } else if l.conforming {
                return fail("the hole layer cannot be conforming".into());
            }
            eps += l.thickness;
            prev = Some(l);
        }
        if (eps - 1.0).abs() > 1e-9 {
            return fail(format!("layers close at {eps} instead of the outer radius 1"));
        }
        Ok(())
    }
}
