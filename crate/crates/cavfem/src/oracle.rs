//! One-dimensional radial reference solutions.
//!
//! A radially symmetric deformation u(x) = r(R) x / R reduces the stored
//! energy over the annulus eps0 <= R <= 1 to a line integral,
//!
//!   E(r) = 2 pi int [ omega (r'^2 + (r/R)^2)^(p/2) + g(r r' / R) ] R dR,
//!
//! with r(1) = lambda prescribed and the inner end left free: the
//! traction-free condition on the cavity surface is natural for this
//! functional, so it needs no explicit constraint. This module minimizes
//! E over C^1 cubic Hermite splines on a graded grid and packages the
//! minimizer so two-dimensional code can sample r and r' anywhere in the
//! annulus. Resolving the boundary layer near the cavity far beyond the
//! accuracy of any mesh under study makes the result usable as ground
//! truth in convergence measurements.

use std::path::Path;

use crate::energy::MaterialModel;
use crate::quadrature::gauss_legendre_5_unit;
use crate::{Error, Result};

/// Fewest grid cells accepted by [`solve_radial`]. Coarser grids would make
/// the grading below too weak to reach its first/last cell guarantee.
pub const MIN_CELLS: usize = 256;

/// How far below eps0 evaluation may extend, as a fraction of eps0. Curved
/// inner-edge elements place quadrature points slightly inside the hole
/// (the chord of a quadratic arc sags by about (pi/N)^2 / 8 of the radius),
/// so the first spline segment is extended for them rather than rejected.
pub const EXTRAPOLATION_FRACTION: f64 = 0.05;

/// Relative bound on the Newton decrement sqrt(g' H^-1 g) at which a solve
/// counts as converged; see the stopping test inside [`solve_radial`].
const DECREMENT_TOLERANCE: f64 = 1e-10;
const MAX_NEWTON_STEPS: usize = 200;
const MAX_STALLED_STEPS: usize = 60;
const MAX_BACKTRACKS: usize = 60;
const ARMIJO_SLOPE: f64 = 1e-4;

/// Exponent of the graded node layout. Cells shrink toward the cavity like
/// (j/K)^kappa with kappa = 1 + ln(1/eps0) / ln(256), which keeps the first
/// cell at most eps0 times the size of the last one for every K >= 256.
/// A power law is used instead of a geometric progression because doubling
/// K then reproduces every old node exactly, so refined solves minimize
/// over nested spline spaces and their energies decrease monotonically.
pub fn grading_exponent(eps0: f64) -> f64 {
    1.0 + (1.0 / eps0).ln() / 256f64.ln()
}

/// Node radii eps0 + (1 - eps0) (j/K)^kappa for j = 0..=cells.
pub fn power_grid(eps0: f64, cells: usize) -> Vec<f64> {
    let kappa = grading_exponent(eps0);
    let k = cells as f64;
    let mut grid: Vec<f64> = (0..=cells)
        .map(|j| eps0 + (1.0 - eps0) * (j as f64 / k).powf(kappa))
        .collect();
    grid[0] = eps0;
    grid[cells] = 1.0;
    grid
}

/// Minimizer of the radial energy, tabulated as a C^1 cubic Hermite spline.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub material: MaterialModel,
    pub eps0: f64,
    pub lambda: f64,
    /// Node radii, strictly increasing from eps0 to 1.
    pub grid: Vec<f64>,
    /// r at each node.
    pub values: Vec<f64>,
    /// r' at each node.
    pub derivs: Vec<f64>,
    /// Minimized energy, including the 2 pi angular factor.
    pub energy: f64,
    /// (m, M) with m R <= r'(R) <= M R at every node. For cavitation maps
    /// r' grows roughly linearly in R, and downstream admissibility
    /// arguments only need these two envelope constants.
    pub slope_bounds: (f64, f64),
}

impl RadialProfile {
    pub fn cells(&self) -> usize {
        self.grid.len() - 1
    }

    /// Deformed radius r at the given undeformed radius.
    pub fn eval_r(&self, radius: f64) -> Result<f64> {
        self.eval_pair(radius).map(|(r, _)| r)
    }

    /// Radial derivative r' at the given undeformed radius.
    pub fn eval_r_prime(&self, radius: f64) -> Result<f64> {
        self.eval_pair(radius).map(|(_, q)| q)
    }

    /// r and r' in a single cell lookup.
    pub fn eval_pair(&self, radius: f64) -> Result<(f64, f64)> {
        let lo = self.eps0 * (1.0 - EXTRAPOLATION_FRACTION);
        let hi = 1.0 + 1e-9;
        if !(radius >= lo && radius <= hi) {
            return Err(Error::InsufficientData(format!(
                "radius {radius} lies outside the tabulated annulus [{}, 1]",
                self.eps0
            )));
        }
        let cell = self
            .grid
            .partition_point(|&g| g <= radius)
            .clamp(1, self.cells())
            - 1;
        let a = self.grid[cell];
        let len = self.grid[cell + 1] - a;
        let (vals, ders) = hermite_basis((radius - a) / len, len);
        let dofs = [
            self.values[cell],
            self.derivs[cell],
            self.values[cell + 1],
            self.derivs[cell + 1],
        ];
        let mut r = 0.0;
        let mut q = 0.0;
        for i in 0..4 {
            r += dofs[i] * vals[i];
            q += dofs[i] * ders[i];
        }
        Ok((r, q))
    }

    /// Verifies the qualitative structure a cavitation profile must have:
    /// positive radii, positive slopes, divided differences that increase
    /// with R (discrete convexity), the pinned outer value, and consistent
    /// slope-envelope metadata. Run after solving and after parsing a file.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |what: String| Err(Error::OracleDiverged(what));
        let n = self.grid.len();
        if n < 2 || self.values.len() != n || self.derivs.len() != n {
            return fail("profile arrays disagree in length".into());
        }
        if !self.energy.is_finite() {
            return fail("profile energy is not finite".into());
        }
        if self.values[n - 1] != self.lambda {
            return fail(format!(
                "outer radius {} is not pinned to lambda = {}",
                self.values[n - 1],
                self.lambda
            ));
        }
        let mut previous = 0.0;
        for j in 0..n {
            if !(self.grid[j] > if j == 0 { 0.0 } else { self.grid[j - 1] }) {
                return fail(format!("grid is not increasing at node {j}"));
            }
            if !(self.values[j] > 0.0) {
                return fail(format!("deformed radius at node {j} is not positive"));
            }
            if !(self.derivs[j] > 0.0) {
                return fail(format!("slope at node {j} is not positive"));
            }
            if j > 0 {
                let dd = (self.values[j] - self.values[j - 1])
                    / (self.grid[j] - self.grid[j - 1]);
                // allow roundoff-level wiggle in the convexity comparison
                if dd <= 0.0 || dd < previous * (1.0 - 1e-9) {
                    return fail(format!(
                        "divided differences stop increasing at node {j}"
                    ));
                }
                previous = previous.max(dd);
            }
        }
        let (m, big_m) = self.slope_bounds;
        if !(m > 0.0 && big_m >= m && big_m.is_finite()) {
            return fail(format!("slope bounds ({m}, {big_m}) are not usable"));
        }
        for j in 0..n {
            let ratio = self.derivs[j] / self.grid[j];
            if ratio < m * (1.0 - 1e-12) || ratio > big_m * (1.0 + 1e-12) {
                return fail(format!("slope at node {j} escapes the stored envelope"));
            }
        }
        Ok(())
    }
}

/// Cubic Hermite basis on a cell of length `len`, at local coordinate t.
/// Returns values and d/dR of the four local dofs (r_a, r'_a, r_b, r'_b).
fn hermite_basis(t: f64, len: f64) -> ([f64; 4], [f64; 4]) {
    let t2 = t * t;
    let t3 = t2 * t;
    let vals = [
        2.0 * t3 - 3.0 * t2 + 1.0,
        len * (t3 - 2.0 * t2 + t),
        3.0 * t2 - 2.0 * t3,
        len * (t3 - t2),
    ];
    let ders = [
        (6.0 * t2 - 6.0 * t) / len,
        3.0 * t2 - 4.0 * t + 1.0,
        (6.0 * t - 6.0 * t2) / len,
        3.0 * t2 - 2.0 * t,
    ];
    (vals, ders)
}

/// Radial energy density Phi(R, r, q) = omega R S^(p/2) + R g(r q / R) with
/// S = q^2 + (r/R)^2, without the angular factor. Infinite whenever the map
/// would fold (r <= 0 or r q <= 0), which lets the line search reject
/// orientation-breaking trial steps through a plain energy comparison.
fn density_1d(m: &MaterialModel, radius: f64, r: f64, q: f64) -> f64 {
    if r <= 0.0 {
        return f64::INFINITY;
    }
    let sigma = r * q / radius;
    if sigma <= 0.0 {
        return f64::INFINITY;
    }
    let s = q * q + (r / radius) * (r / radius);
    m.omega * radius * s.powf(0.5 * m.p) + radius * m.g(sigma)
}

/// First and second partials of the density with respect to (r, q), in the
/// order [Phi_r, Phi_q, Phi_rr, Phi_rq, Phi_qq]. Assumes a feasible point.
fn density_partials(m: &MaterialModel, radius: f64, r: f64, q: f64) -> [f64; 5] {
    let s = q * q + (r / radius) * (r / radius);
    let sigma = r * q / radius;
    let sp2 = s.powf(0.5 * m.p - 2.0);
    let sp1 = sp2 * s;
    let wp = m.omega * m.p;
    let g1 = m.g_prime(sigma);
    let g2 = m.g_second(sigma);
    [
        wp * sp1 * r / radius + g1 * q,
        wp * radius * sp1 * q + g1 * r,
        wp * sp2 * (s / radius + (m.p - 2.0) * r * r / (radius * radius * radius))
            + g2 * q * q / radius,
        wp * (m.p - 2.0) * sp2 * r * q / radius + g2 * sigma + g1,
        wp * radius * sp2 * (s + (m.p - 2.0) * q * q) + g2 * r * r / radius,
    ]
}

/// Energy of the spline with the given dof vector (r_0, r'_0, r_1, ...),
/// without the 2 pi factor. Five Gauss points per cell.
fn spline_energy(grid: &[f64], dofs: &[f64], m: &MaterialModel) -> f64 {
    let (gln, glw) = gauss_legendre_5_unit();
    let cells = grid.len() - 1;
    crate::accum::neumaier_sum((0..cells * 5).map(|i| {
        let c = i / 5;
        let k = i % 5;
        let a = grid[c];
        let len = grid[c + 1] - a;
        let (vals, ders) = hermite_basis(gln[k], len);
        let local = &dofs[2 * c..2 * c + 4];
        let mut r = 0.0;
        let mut q = 0.0;
        for i in 0..4 {
            r += local[i] * vals[i];
            q += local[i] * ders[i];
        }
        glw[k] * len * density_1d(m, a + gln[k] * len, r, q)
    }))
}

/// Gradient and Hessian of [`spline_energy`] at a feasible dof vector.
fn assemble_newton(grid: &[f64], dofs: &[f64], m: &MaterialModel) -> (Vec<f64>, Banded) {
    let (gln, glw) = gauss_legendre_5_unit();
    let cells = grid.len() - 1;
    let n = dofs.len();
    let mut gradient = vec![0.0; n];
    let mut hessian = Banded::zero(n);
    for c in 0..cells {
        let a = grid[c];
        let len = grid[c + 1] - a;
        let base = 2 * c;
        for k in 0..5 {
            let (vals, ders) = hermite_basis(gln[k], len);
            let local = &dofs[base..base + 4];
            let mut r = 0.0;
            let mut q = 0.0;
            for i in 0..4 {
                r += local[i] * vals[i];
                q += local[i] * ders[i];
            }
            let w = glw[k] * len;
            let [pr, pq, prr, prq, pqq] = density_partials(m, a + gln[k] * len, r, q);
            for i in 0..4 {
                gradient[base + i] += w * (pr * vals[i] + pq * ders[i]);
                for j in 0..=i {
                    let v = prr * vals[i] * vals[j]
                        + prq * (vals[i] * ders[j] + ders[i] * vals[j])
                        + pqq * ders[i] * ders[j];
                    hessian.add(base + i, base + j, w * v);
                }
            }
        }
    }
    (gradient, hessian)
}

/// Symmetric band matrix with half-bandwidth 3; only the lower triangle is
/// stored. `below[i][d]` holds the entry at (i, i - 1 - d).
struct Banded {
    n: usize,
    diag: Vec<f64>,
    below: Vec<[f64; 3]>,
}

struct Factor {
    d: Vec<f64>,
    l: Vec<[f64; 3]>,
    /// Jacobi scaling applied before factorization. Graded grids give the
    /// Hessian a huge spread of diagonal magnitudes; balancing it first
    /// keeps the factorization's rounding errors from burying the small
    /// Newton corrections needed near the minimizer.
    scale: Vec<f64>,
}

impl Banded {
    fn zero(n: usize) -> Banded {
        Banded {
            n,
            diag: vec![0.0; n],
            below: vec![[0.0; 3]; n],
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.diag[i] += v;
        } else {
            let (hi, lo) = if i > j { (i, j) } else { (j, i) };
            self.below[hi][hi - lo - 1] += v;
        }
    }

    /// Zeroes the row and column of a prescribed dof and puts 1 on its
    /// diagonal, so the Newton step leaves that dof untouched.
    fn pin(&mut self, p: usize) {
        self.diag[p] = 1.0;
        for d in 0..3 {
            if p > d {
                self.below[p][d] = 0.0;
            }
        }
        for i in p + 1..(p + 4).min(self.n) {
            self.below[i][i - p - 1] = 0.0;
        }
    }

    /// Copy with mu * max(|diag|, 1) added to each diagonal entry.
    fn shifted(&self, mu: f64) -> Banded {
        let mut out = Banded {
            n: self.n,
            diag: self.diag.clone(),
            below: self.below.clone(),
        };
        if mu > 0.0 {
            for v in &mut out.diag {
                *v += mu * v.abs().max(1.0);
            }
        }
        out
    }

    /// Root-free LDL^T factorization of the Jacobi-balanced matrix.
    /// Returns None on a nonpositive pivot, which the caller treats as
    /// "not positive definite at this damping".
    fn ldlt(&self) -> Option<Factor> {
        let n = self.n;
        let mut scale = vec![0.0; n];
        for i in 0..n {
            if !(self.diag[i] > 0.0) || !self.diag[i].is_finite() {
                return None;
            }
            scale[i] = 1.0 / self.diag[i].sqrt();
        }
        let mut d = vec![0.0; n];
        let mut l = vec![[0.0; 3]; n];
        for j in 0..n {
            let start = j.saturating_sub(3);
            let mut dj = 1.0f64;
            for k in start..j {
                let ljk = l[j][j - k - 1];
                dj -= ljk * ljk * d[k];
            }
            if !(dj > 0.0) || !dj.is_finite() {
                return None;
            }
            d[j] = dj;
            for i in j + 1..(j + 4).min(n) {
                let mut v = self.below[i][i - j - 1] * scale[i] * scale[j];
                for k in start.max(i.saturating_sub(3))..j {
                    v -= l[i][i - k - 1] * l[j][j - k - 1] * d[k];
                }
                l[i][i - j - 1] = v / dj;
            }
        }
        Some(Factor { d, l, scale })
    }
}

impl Factor {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x: Vec<f64> = rhs.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        for i in 0..n {
            let mut v = x[i];
            for k in i.saturating_sub(3)..i {
                v -= self.l[i][i - k - 1] * x[k];
            }
            x[i] = v;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in i + 1..(i + 4).min(n) {
                v -= self.l[k][k - i - 1] * x[k];
            }
            x[i] = v;
        }
        for (v, s) in x.iter_mut().zip(&self.scale) {
            *v *= s;
        }
        x
    }
}

/// Newton decrement at an arbitrary dof vector, or None where the undamped
/// Hessian is not positive definite.
fn trial_decrement(
    grid: &[f64],
    dofs: &[f64],
    m: &MaterialModel,
    pinned: usize,
) -> Option<f64> {
    let (mut gradient, mut hessian) = assemble_newton(grid, dofs, m);
    gradient[pinned] = 0.0;
    hessian.pin(pinned);
    let step = hessian.shifted(0.0).ldlt()?.solve(&gradient);
    let squared: f64 = gradient.iter().zip(&step).map(|(g, d)| g * d).sum();
    squared.max(0.0).sqrt().into()
}

fn bump(mu: f64) -> f64 {
    if mu == 0.0 {
        1e-8
    } else {
        mu * 10.0
    }
}

fn relax(mu: f64) -> f64 {
    let next = mu * 0.25;
    if next < 1e-14 {
        0.0
    } else {
        next
    }
}

/// Minimizes the radial energy for the given material, cavity radius,
/// outer stretch, and cell count. Damped Newton with a banded LDL^T solve:
/// the Hessian is indefinite away from the minimizer because g(r r'/R) is
/// not jointly convex in (r, r'), so failed factorizations and rejected
/// steps raise a Levenberg shift until progress resumes.
pub fn solve_radial(
    m: &MaterialModel,
    eps0: f64,
    lambda: f64,
    cells: usize,
) -> Result<RadialProfile> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::InfeasibleConfig(format!(
            "cavity radius {eps0} must lie strictly between 0 and 1"
        )));
    }
    if !(lambda >= 1.0) {
        return Err(Error::InfeasibleConfig(format!(
            "outer stretch {lambda} below 1 leaves the cavitation regime"
        )));
    }
    if cells < MIN_CELLS {
        return Err(Error::InfeasibleConfig(format!(
            "{cells} cells is below the minimum of {MIN_CELLS}"
        )));
    }
    let grid = power_grid(eps0, cells);
    let n = 2 * (cells + 1);
    let pinned = 2 * cells;

    // Volume-preserving start: r = sqrt(lambda^2 - 1 + R^2) has
    // r r' / R = 1 everywhere, so every quadrature point is feasible.
    let mut dofs = vec![0.0; n];
    for (j, &radius) in grid.iter().enumerate() {
        let r = (lambda * lambda - 1.0 + radius * radius).sqrt();
        dofs[2 * j] = r;
        dofs[2 * j + 1] = radius / r;
    }
    dofs[pinned] = lambda;

    let mut energy = spline_energy(&grid, &dofs, m);
    if !energy.is_finite() {
        return Err(Error::InfeasibleInitialGuess);
    }
    let mut mu = 0.0;
    let mut stalls = 0usize;
    for _step in 0..MAX_NEWTON_STEPS {
        let (mut gradient, mut hessian) = assemble_newton(&grid, &dofs, m);
        gradient[pinned] = 0.0;
        hessian.pin(pinned);
        let gnorm = gradient.iter().map(|v| v * v).sum::<f64>().sqrt();
        if std::env::var_os("CAVFEM_TRACE").is_some() {
            eprintln!("newton step {_step}: e = {energy:.16e} gnorm = {gnorm:.3e} mu = {mu:.3e}");
        }
        'damping: loop {
            if stalls > MAX_STALLED_STEPS {
                return Err(Error::OracleDiverged(format!(
                    "damping stalled at mu = {mu:.3e} with gradient norm {gnorm:.3e}"
                )));
            }
            let Some(factor) = hessian.shifted(mu).ldlt() else {
                mu = bump(mu);
                stalls += 1;
                continue;
            };
            let mut direction = factor.solve(&gradient);
            for v in &mut direction {
                *v = -*v;
            }
            let slope: f64 = gradient
                .iter()
                .zip(&direction)
                .map(|(g, d)| g * d)
                .sum();
            if !(slope < 0.0) {
                mu = bump(mu);
                stalls += 1;
                continue;
            }
            // Convergence is measured by the Newton decrement
            // sqrt(g' H^-1 g), the residual in the energy's own metric.
            // The raw gradient norm has an f64 floor of about
            // |H| eps |dofs| because the dofs themselves are quantized,
            // and the stiffness of the smallest graded cells pushes that
            // floor above any fixed tolerance as eps0 shrinks. The
            // decrement weighs each mode by its actual effect on the
            // energy, so it keeps contracting where the raw norm stalls.
            // Measured only undamped: a Levenberg shift would shrink it
            // artificially.
            let decrement = if mu == 0.0 {
                let dec = (-slope).sqrt();
                if dec <= DECREMENT_TOLERANCE * (1.0 + energy.abs()) {
                    return finish(m, eps0, lambda, grid, dofs, energy);
                }
                Some(dec)
            } else {
                None
            };
            // Near the minimizer the predicted Armijo decrease drops below
            // one ulp of the energy, and comparing energies stops meaning
            // anything. From there acceptance switches to decrement
            // decrease at the trial point. The raw gradient norm would be
            // useless for this: entries for the soft slope dofs of the
            // smallest cells are dominated by evaluation noise, while the
            // decrement weighs that noise by its energetic irrelevance.
            let quantum = 8.0 * f64::EPSILON * energy.abs();
            let mut t = 1.0;
            for _ in 0..MAX_BACKTRACKS {
                let trial: Vec<f64> = dofs
                    .iter()
                    .zip(&direction)
                    .map(|(x, d)| x + t * d)
                    .collect();
                let trial_energy = spline_energy(&grid, &trial, m);
                if trial_energy.is_finite() {
                    let predicted = ARMIJO_SLOPE * t * slope;
                    let accepted = if -predicted >= quantum {
                        trial_energy <= energy + predicted
                    } else if trial_energy <= energy + quantum {
                        match (decrement, trial_decrement(&grid, &trial, m, pinned)) {
                            (Some(dec), Some(trial_dec)) => trial_dec <= 0.9 * dec,
                            _ => false,
                        }
                    } else {
                        false
                    };
                    if accepted {
                        dofs = trial;
                        energy = trial_energy;
                        mu = relax(mu);
                        stalls = 0;
                        break 'damping;
                    }
                }
                t *= 0.5;
            }
            mu = bump(mu);
            stalls += 1;
        }
    }
    Err(Error::OracleDiverged(format!(
        "no convergence within {MAX_NEWTON_STEPS} Newton steps"
    )))
}

fn finish(
    m: &MaterialModel,
    eps0: f64,
    lambda: f64,
    grid: Vec<f64>,
    dofs: Vec<f64>,
    energy: f64,
) -> Result<RadialProfile> {
    let values: Vec<f64> = dofs.iter().step_by(2).copied().collect();
    let derivs: Vec<f64> = dofs.iter().skip(1).step_by(2).copied().collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (slope, radius) in derivs.iter().zip(&grid) {
        let ratio = slope / radius;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let profile = RadialProfile {
        material: m.clone(),
        eps0,
        lambda,
        grid,
        values,
        derivs,
        energy: 2.0 * std::f64::consts::PI * energy,
        slope_bounds: (lo, hi),
    };
    profile.check_invariants()?;
    Ok(profile)
}

/// Text form of a profile. Seventeen significant digits per number, so a
/// parse of the rendered text reproduces every f64 bit for bit.
pub fn render_profile(p: &RadialProfile) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "cavradial 1").unwrap();
    writeln!(out, "scheme cubic-hermite").unwrap();
    writeln!(
        out,
        "material omega {:.16e} p {:.16e} g_scale {:.16e}",
        p.material.omega, p.material.p, p.material.g_scale
    )
    .unwrap();
    writeln!(
        out,
        "domain eps0 {:.16e} lambda {:.16e}",
        p.eps0, p.lambda
    )
    .unwrap();
    writeln!(out, "energy {:.16e}", p.energy).unwrap();
    writeln!(
        out,
        "slope_bounds {:.16e} {:.16e}",
        p.slope_bounds.0, p.slope_bounds.1
    )
    .unwrap();
    writeln!(out, "nodes {}", p.grid.len()).unwrap();
    for j in 0..p.grid.len() {
        writeln!(
            out,
            "{:.16e} {:.16e} {:.16e}",
            p.grid[j], p.values[j], p.derivs[j]
        )
        .unwrap();
    }
    out
}

/// Parses the text form produced by [`render_profile`] and re-checks the
/// profile invariants, so a truncated or hand-edited file cannot smuggle an
/// unusable reference solution into a study.
pub fn parse_profile(text: &str) -> Result<RadialProfile> {
    fn fail(line: usize, what: &str) -> Error {
        Error::InsufficientData(format!("profile line {}: {}", line + 1, what))
    }
    fn number(words: &[&str], at: usize, line: usize) -> Result<f64> {
        words
            .get(at)
            .ok_or_else(|| fail(line, "line is too short"))?
            .parse()
            .map_err(|_| fail(line, "unreadable number"))
    }
    let lines: Vec<&str> = text.lines().collect();
    let words = |i: usize| -> Result<Vec<&str>> {
        Ok(lines
            .get(i)
            .ok_or_else(|| fail(lines.len(), "file ends before the profile is complete"))?
            .split_whitespace()
            .collect())
    };

    if words(0)? != ["cavradial", "1"] {
        return Err(fail(0, "expected the header 'cavradial 1'"));
    }
    if words(1)? != ["scheme", "cubic-hermite"] {
        return Err(fail(1, "unsupported interpolation scheme"));
    }
    let mat = words(2)?;
    if mat.len() != 7 || mat[..2] != ["material", "omega"] || mat[3] != "p" || mat[5] != "g_scale"
    {
        return Err(fail(2, "expected 'material omega _ p _ g_scale _'"));
    }
    let material = MaterialModel {
        omega: number(&mat, 2, 2)?,
        p: number(&mat, 4, 2)?,
        g_scale: number(&mat, 6, 2)?,
    };
    let dom = words(3)?;
    if dom.len() != 5 || dom[..2] != ["domain", "eps0"] || dom[3] != "lambda" {
        return Err(fail(3, "expected 'domain eps0 _ lambda _'"));
    }
    let (eps0, lambda) = (number(&dom, 2, 3)?, number(&dom, 4, 3)?);
    let en = words(4)?;
    if en.len() != 2 || en[0] != "energy" {
        return Err(fail(4, "expected 'energy _'"));
    }
    let energy = number(&en, 1, 4)?;
    let sb = words(5)?;
    if sb.len() != 3 || sb[0] != "slope_bounds" {
        return Err(fail(5, "expected 'slope_bounds _ _'"));
    }
    let bounds = (number(&sb, 1, 5)?, number(&sb, 2, 5)?);
    let nd = words(6)?;
    if nd.len() != 2 || nd[0] != "nodes" {
        return Err(fail(6, "expected 'nodes _'"));
    }
    let count: usize = nd[1]
        .parse()
        .map_err(|_| fail(6, "node count must be an integer"))?;
    if count < 2 {
        return Err(fail(6, "a profile needs at least two nodes"));
    }
    let mut grid = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    let mut derivs = Vec::with_capacity(count);
    for j in 0..count {
        let row = words(7 + j)?;
        if row.len() != 3 {
            return Err(fail(7 + j, "node rows carry exactly R, r, and r'"));
        }
        grid.push(number(&row, 0, 7 + j)?);
        values.push(number(&row, 1, 7 + j)?);
        derivs.push(number(&row, 2, 7 + j)?);
    }
    let profile = RadialProfile {
        material,
        eps0,
        lambda,
        grid,
        values,
        derivs,
        energy,
        slope_bounds: bounds,
    };
    profile.check_invariants()?;
    Ok(profile)
}

/// Cache file name, distinct per solve input. Exact f64 bit patterns go
/// into the name, so two runs share an entry only when every parameter is
/// identical to the last bit.
pub fn cache_file_name(m: &MaterialModel, eps0: f64, lambda: f64, cells: usize) -> String {
    format!(
        "radial-{:016x}-{:016x}-{}-{:016x}-{:016x}-{:016x}.txt",
        eps0.to_bits(),
        lambda.to_bits(),
        cells,
        m.omega.to_bits(),
        m.p.to_bits(),
        m.g_scale.to_bits()
    )
}

/// Returns the cached profile for these parameters, or solves and stores
/// one. A cache entry that fails to parse, fails its invariants, or was
/// written for different parameters is recomputed and overwritten rather
/// than trusted.
pub fn load_or_solve(
    dir: &Path,
    m: &MaterialModel,
    eps0: f64,
    lambda: f64,
    cells: usize,
) -> Result<RadialProfile> {
    let path = dir.join(cache_file_name(m, eps0, lambda, cells));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(profile) = parse_profile(&text) {
            let same = profile.eps0.to_bits() == eps0.to_bits()
                && profile.lambda.to_bits() == lambda.to_bits()
                && profile.cells() == cells
                && profile.material.omega.to_bits() == m.omega.to_bits()
                && profile.material.p.to_bits() == m.p.to_bits()
                && profile.material.g_scale.to_bits() == m.g_scale.to_bits();
            if same {
                return Ok(profile);
            }
        }
    }
    let profile = solve_radial(m, eps0, lambda, cells)?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(&path, render_profile(&profile))?;
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn material() -> MaterialModel {
        MaterialModel::default()
    }

    #[test]
    fn grading_keeps_the_first_cell_below_eps0_of_the_last() {
        for &(eps0, cells) in &[(0.01, 256), (1e-4, 512), (0.5, 256), (0.01, 1000)] {
            let grid = power_grid(eps0, cells);
            assert_eq!(grid[0], eps0);
            assert_eq!(grid[cells], 1.0);
            for j in 0..cells {
                assert!(grid[j + 1] > grid[j], "grid must increase");
            }
            let first = grid[1] - grid[0];
            let last = grid[cells] - grid[cells - 1];
            assert!(
                first <= eps0 * last,
                "first/last = {:.3e} exceeds eps0 = {eps0}",
                first / last
            );
        }
    }

    #[test]
    fn power_grids_nest_under_doubling() {
        let coarse = power_grid(0.01, 256);
        let fine = power_grid(0.01, 512);
        for j in 0..=256 {
            assert_eq!(
                coarse[j].to_bits(),
                fine[2 * j].to_bits(),
                "node {j} moved under refinement"
            );
        }
    }

    #[test]
    fn unit_stretch_cannot_be_beaten_by_much() {
        let m = material();
        let grid = power_grid(0.1, 256);
        let mut identity = vec![0.0; 2 * grid.len()];
        for (j, &radius) in grid.iter().enumerate() {
            identity[2 * j] = radius;
            identity[2 * j + 1] = 1.0;
        }
        let identity_energy =
            2.0 * std::f64::consts::PI * spline_energy(&grid, &identity, &m);
        let profile = solve_radial(&m, 0.1, 1.0, 256).unwrap();
        assert!(profile.energy <= identity_energy + 1e-12 * identity_energy);
        assert_eq!(profile.values[256], 1.0);
    }

    #[test]
    fn cavitation_profile_opens_the_hole_and_stays_convex() {
        let profile = solve_radial(&material(), 0.01, 2.0, 512).unwrap();
        profile.check_invariants().unwrap();
        let inner = profile.values[0];
        assert!(
            inner > 1.0 && inner < 2.0,
            "cavity radius {inner} looks wrong for lambda = 2"
        );
        let (m_lo, m_hi) = profile.slope_bounds;
        assert!(m_lo > 0.0 && m_hi.is_finite());
        for i in 0..=997 {
            let radius = 0.01 + (1.0 - 0.01) * i as f64 / 997.0;
            let (r, q) = profile.eval_pair(radius).unwrap();
            assert!(r > 0.0 && q > 0.0, "fold at R = {radius}");
            assert!(r * q / radius > 0.0);
        }
    }

    #[test]
    fn reported_minimizer_has_a_tiny_newton_decrement() {
        let m = material();
        let profile = solve_radial(&m, 0.01, 2.0, 256).unwrap();
        let mut dofs = vec![0.0; 2 * profile.grid.len()];
        for j in 0..profile.grid.len() {
            dofs[2 * j] = profile.values[j];
            dofs[2 * j + 1] = profile.derivs[j];
        }
        let (mut gradient, mut hessian) = assemble_newton(&profile.grid, &dofs, &m);
        let pinned = 2 * (profile.grid.len() - 1);
        gradient[pinned] = 0.0;
        hessian.pin(pinned);
        let step = hessian.shifted(0.0).ldlt().unwrap().solve(&gradient);
        let decrement = gradient
            .iter()
            .zip(&step)
            .map(|(g, d)| g * d)
            .sum::<f64>()
            .max(0.0)
            .sqrt();
        let internal = profile.energy / (2.0 * std::f64::consts::PI);
        assert!(
            decrement <= DECREMENT_TOLERANCE * (1.0 + internal),
            "newton decrement {decrement:.3e} above the declared tolerance"
        );
    }

    #[test]
    fn node_evaluation_reproduces_stored_dofs() {
        let profile = solve_radial(&material(), 0.1, 1.5, 256).unwrap();
        for j in 0..profile.grid.len() {
            let (r, q) = profile.eval_pair(profile.grid[j]).unwrap();
            assert_eq!(r.to_bits(), profile.values[j].to_bits(), "node {j}");
            assert_eq!(q.to_bits(), profile.derivs[j].to_bits(), "node {j}");
        }
    }

    #[test]
    fn refinement_leaves_values_and_energy_in_place() {
        let m = material();
        let coarse = solve_radial(&m, 0.1, 2.0, 256).unwrap();
        let fine = solve_radial(&m, 0.1, 2.0, 512).unwrap();
        assert!(
            fine.energy <= coarse.energy + 1e-12 * coarse.energy,
            "nested refinement must not raise the minimum"
        );
        let gap = (coarse.energy - fine.energy).abs() / fine.energy;
        assert!(gap <= 1e-8, "energies {gap:.3e} apart under doubling");
        for i in 0..=301 {
            let radius = 0.1 + 0.9 * i as f64 / 301.0;
            let r_c = coarse.eval_r(radius).unwrap();
            let r_f = fine.eval_r(radius).unwrap();
            assert!(
                (r_c - r_f).abs() <= 1e-8 * r_f.abs(),
                "values {:.3e} apart at R = {radius}",
                (r_c - r_f).abs()
            );
            let q_c = coarse.eval_r_prime(radius).unwrap();
            let q_f = fine.eval_r_prime(radius).unwrap();
            assert!((q_c - q_f).abs() <= 1e-6 * q_f.abs());
        }
    }

    #[test]
    fn energy_decreases_monotonically_under_refinement() {
        let m = material();
        let mut previous = f64::INFINITY;
        for cells in [256, 512, 1024] {
            let profile = solve_radial(&m, 0.01, 2.0, cells).unwrap();
            assert!(
                profile.energy <= previous + 1e-12 * previous.min(1e300),
                "energy rose at {cells} cells"
            );
            previous = profile.energy;
        }
    }

    #[test]
    fn tiny_cavities_still_converge() {
        let profile = solve_radial(&material(), 1e-4, 2.0, 512).unwrap();
        profile.check_invariants().unwrap();
        let inner = profile.values[0];
        assert!(
            inner > 1.0 && inner < 2.0,
            "cavity radius {inner} looks wrong for lambda = 2"
        );
        // the opened hole should be nearly independent of eps0 by now
        let coarse_hole = solve_radial(&material(), 0.01, 2.0, 512)
            .unwrap()
            .values[0];
        assert!(
            (inner - coarse_hole).abs() < 0.1,
            "cavity radii {inner} and {coarse_hole} disagree too much"
        );
    }

    #[test]
    fn evaluation_is_fenced_to_the_annulus() {
        let profile = solve_radial(&material(), 0.1, 2.0, 256).unwrap();
        assert!(profile.eval_r(0.1 * 0.96).is_ok(), "5% extension is allowed");
        assert!(profile.eval_r(0.1 * 0.94).is_err());
        assert!(profile.eval_r(1.0 + 5e-10).is_ok());
        assert!(profile.eval_r(1.01).is_err());
        let inside = profile.eval_r(0.097).unwrap();
        let at_edge = profile.eval_r(0.1).unwrap();
        assert!(
            (inside - at_edge).abs() < 0.05,
            "extension should stay close to the boundary value"
        );
    }

    #[test]
    fn profile_file_round_trips_bitwise() {
        let profile = solve_radial(&material(), 0.01, 2.0, 256).unwrap();
        let text = render_profile(&profile);
        let parsed = parse_profile(&text).unwrap();
        assert_eq!(parsed.energy.to_bits(), profile.energy.to_bits());
        assert_eq!(parsed.eps0.to_bits(), profile.eps0.to_bits());
        assert_eq!(parsed.lambda.to_bits(), profile.lambda.to_bits());
        assert_eq!(
            parsed.slope_bounds.0.to_bits(),
            profile.slope_bounds.0.to_bits()
        );
        assert_eq!(
            parsed.slope_bounds.1.to_bits(),
            profile.slope_bounds.1.to_bits()
        );
        for j in 0..profile.grid.len() {
            assert_eq!(parsed.grid[j].to_bits(), profile.grid[j].to_bits());
            assert_eq!(parsed.values[j].to_bits(), profile.values[j].to_bits());
            assert_eq!(parsed.derivs[j].to_bits(), profile.derivs[j].to_bits());
        }
    }

    #[test]
    fn malformed_profiles_are_rejected_with_a_line_number() {
        let profile = solve_radial(&material(), 0.1, 1.5, 256).unwrap();
        let text = render_profile(&profile);
        let truncated: String = text.lines().take(30).collect::<Vec<_>>().join("\n");
        let err = parse_profile(&truncated).unwrap_err().to_string();
        assert!(err.contains("line"), "unhelpful error: {err}");
        let corrupt = text.replacen("cubic-hermite", "quintic", 1);
        let err = parse_profile(&corrupt).unwrap_err().to_string();
        assert!(err.contains("line 2"), "unhelpful error: {err}");
    }

    #[test]
    fn cache_reuses_the_stored_solve() {
        let dir = tempfile::tempdir().unwrap();
        let m = material();
        let first = load_or_solve(dir.path(), &m, 0.1, 2.0, 256).unwrap();
        let path = dir.path().join(cache_file_name(&m, 0.1, 2.0, 256));
        assert!(path.exists(), "first call must write the cache entry");
        let second = load_or_solve(dir.path(), &m, 0.1, 2.0, 256).unwrap();
        assert_eq!(first.energy.to_bits(), second.energy.to_bits());
        for j in 0..first.grid.len() {
            assert_eq!(first.values[j].to_bits(), second.values[j].to_bits());
        }
        std::fs::write(&path, "not a profile").unwrap();
        let third = load_or_solve(dir.path(), &m, 0.1, 2.0, 256).unwrap();
        assert_eq!(first.energy.to_bits(), third.energy.to_bits());
        let healed = std::fs::read_to_string(&path).unwrap();
        assert!(healed.starts_with("cavradial 1"), "corrupt entry not replaced");
    }

    #[test]
    fn unusable_inputs_are_rejected() {
        let m = material();
        assert!(solve_radial(&m, 0.0, 2.0, 256).is_err());
        assert!(solve_radial(&m, 1.0, 2.0, 256).is_err());
        assert!(solve_radial(&m, -0.1, 2.0, 256).is_err());
        assert!(solve_radial(&m, 0.1, 0.5, 256).is_err());
        assert!(solve_radial(&m, 0.1, 2.0, 100).is_err());
    }
}
