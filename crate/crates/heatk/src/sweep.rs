//! Grid sweeps comparing kernels against their envelopes, plus batteries
//! of identity and inequality checks. These drive both the command-line
//! verifier and the acceptance suite: a sweep records the log-ratio
//! `ln(kernel) - ln(envelope)` over a deterministic grid, and sharpness
//! means that ratio stays inside a fixed band independent of the grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::envelopes;
use crate::error::{HeatkError, Result};
use crate::jacobi_kernel::{heat_kernel_reduced_ln, EndpointProfile, KernelEvaluator};
use crate::model_spaces::{self, SpaceDescriptor};
use crate::quadrature;
use crate::specfun::{self, JacobiParams};

const PI: f64 = std::f64::consts::PI;

/// What a ratio sweep compares.
#[derive(Debug, Clone, Serialize)]
pub enum SweepTarget {
    /// `G_t^{a,b}(cos phi, cos psi)` against the general two-angle
    /// envelope, over a `phi x psi` grid.
    JacobiGeneral { alpha: f64, beta: f64 },
    /// `G_t^{l,l}(cos phi, 1)` against the endpoint envelope.
    JacobiEndpoint { lambda: f64 },
    /// Scaled symmetric-space kernel against its envelope.
    Symmetric { descriptor: SpaceDescriptor },
    /// Minus the distance-derivative of the scaled symmetric-space kernel
    /// against the derivative envelope.
    SymmetricDerivative { descriptor: SpaceDescriptor },
    /// Ball heat kernel against its envelope (points laid out on two
    /// radii separated by a relative angle).
    Ball { d: usize, mu: f64 },
    /// Simplex heat kernel against its envelope (pairs from a fixed
    /// barycentric point set).
    Simplex { d: usize, kappa: Vec<f64> },
    /// Long-time regime: the kernel itself against the constant envelope
    /// 1 for `t >= 1`.
    LongTime { alpha: f64, beta: f64 },
}

impl SweepTarget {
    pub fn label(&self) -> String {
        match self {
            Self::JacobiGeneral { alpha, beta } => format!("jacobi_general[{alpha},{beta}]"),
            Self::JacobiEndpoint { lambda } => format!("jacobi_endpoint[{lambda}]"),
            Self::Symmetric { descriptor } => {
                format!("symmetric[{:?},d={}]", descriptor.family, descriptor.d)
            }
            Self::SymmetricDerivative { descriptor } => {
                format!("symmetric_deriv[{:?},d={}]", descriptor.family, descriptor.d)
            }
            Self::Ball { d, mu } => format!("ball[d={d},mu={mu}]"),
            Self::Simplex { d, kappa } => format!("simplex[d={d},kappa={kappa:?}]"),
            Self::LongTime { alpha, beta } => format!("long_time[{alpha},{beta}]"),
        }
    }
}

/// A ratio sweep: target, per-axis grid resolution, and the time values
/// to visit.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub grid: usize,
    pub times: Vec<f64>,
    pub t_min: f64,
}

/// One evaluated grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct RatioCell {
    pub cell_id: String,
    pub t: f64,
    pub ln_kernel: f64,
    pub ln_envelope: f64,
    pub ln_ratio: f64,
}

/// Sweep outcome: all cells plus the extremes of the log-ratio.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub target: String,
    pub min_ln_ratio: f64,
    pub max_ln_ratio: f64,
    pub cells: Vec<RatioCell>,
}

impl RatioReport {
    fn from_cells(target: String, cells: Vec<RatioCell>) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for c in &cells {
            min = min.min(c.ln_ratio);
            max = max.max(c.ln_ratio);
        }
        Self { target, min_ln_ratio: min, max_ln_ratio: max, cells }
    }

    /// Width of the log-ratio band; `exp` of this is the max/min ratio
    /// quotient the sharpness criteria bound.
    pub fn spread_ln(&self) -> f64 {
        self.max_ln_ratio - self.min_ln_ratio
    }

    /// Deterministic CSV rendering (17 significant digits).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("target,cell_id,t,ln_kernel,ln_envelope,ln_ratio\n");
        for c in &self.cells {
            s.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                self.target, c.cell_id, c.t, c.ln_kernel, c.ln_envelope, c.ln_ratio
            ));
        }
        s
    }
}

fn angle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| (PI * i as f64 / (n - 1) as f64).min(PI)).collect()
}

/// Interior angle grid (open at both ends), for quantities that vanish at
/// the endpoints on both sides of the comparison.
fn open_angle_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| PI * i as f64 / (n + 1) as f64).collect()
}

/// Angle grid with geometric refinement towards both endpoints: `n` points
/// equally spaced in `ln(phi)` between `pi * 2^-20` and `pi / 2`, mirrored
/// in `ln(pi - phi)`, plus the exact endpoints `0` and `pi`. The envelope
/// prefactors switch regimes in layers of width `t` at the endpoints, so a
/// uniform grid never resolves them; in the logarithmic coordinate the
/// ratio is smooth and doubling `n` halves the spacing, making the sweep
/// band converge under refinement.
fn endpoint_refined_angle_grid(n: usize) -> Vec<f64> {
    let depth = 20.0 * std::f64::consts::LN_2;
    let mut grid = vec![0.0, PI];
    for i in 0..n {
        let ln_phi = PI.ln() - std::f64::consts::LN_2 - depth * i as f64 / (n - 1) as f64;
        let phi = ln_phi.exp();
        grid.push(phi);
        grid.push(PI - phi);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

fn cell(cell_id: String, t: f64, ln_kernel: f64, ln_envelope: f64) -> RatioCell {
    RatioCell { cell_id, t, ln_kernel, ln_envelope, ln_ratio: ln_kernel - ln_envelope }
}

/// Runs a ratio sweep. Cells are evaluated in parallel but reported in
/// deterministic order.
pub fn run_ratio_sweep(spec: &SweepSpec) -> Result<RatioReport> {
    if spec.grid < 2 {
        return Err(HeatkError::Domain("sweep grid must have at least 2 points".into()));
    }
    if spec.times.is_empty() {
        return Err(HeatkError::Domain("sweep needs at least one time".into()));
    }
    let mut cells = Vec::new();
    for &t in &spec.times {
        let mut batch = match &spec.target {
            SweepTarget::JacobiGeneral { alpha, beta } => {
                let params = JacobiParams::new(*alpha, *beta)?;
                let eval = KernelEvaluator::new(params, t, spec.t_min)?;
                let grid = angle_grid(spec.grid);
                let mut pairs = Vec::new();
                for (i, &phi) in grid.iter().enumerate() {
                    for (j, &psi) in grid.iter().enumerate() {
                        if j > i {
                            continue; // symmetric in (phi, psi)
                        }
                        pairs.push((i, j, phi, psi));
                    }
                }
                pairs
                    .par_iter()
                    .map(|&(i, j, phi, psi)| {
                        let lk = eval.ln_kernel(phi.cos(), psi.cos())?;
                        let le = envelopes::env_jac_gen(params, phi, psi, t)?.ln_value;
                        Ok(cell(format!("phi{i}_psi{j}"), t, lk, le))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SweepTarget::JacobiEndpoint { lambda } => {
                let params = JacobiParams::new(*lambda, *lambda)?;
                let eval = KernelEvaluator::new(params, t, spec.t_min)?;
                angle_grid(spec.grid)
                    .par_iter()
                    .enumerate()
                    .map(|(i, &phi)| {
                        let lk = eval.ln_kernel(phi.cos(), 1.0)?;
                        let le = envelopes::env_jac_spec(*lambda, phi, t)?.ln_value;
                        Ok(cell(format!("phi{i}"), t, lk, le))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SweepTarget::Symmetric { descriptor } => {
                let desc = *descriptor;
                let params = desc.jacobi_params();
                let eval = KernelEvaluator::new(params, t, spec.t_min)?;
                let ln_h0 = specfun::ln_jacobi_norm_h(params, 0)?;
                endpoint_refined_angle_grid(spec.grid)
                    .par_iter()
                    .enumerate()
                    .map(|(i, &phi)| {
                        let lk = ln_h0 + eval.ln_kernel(phi.cos(), 1.0)?;
                        let le = if t <= 1.0 {
                            envelopes::env_symmetric(desc.d, desc.d_tilde, phi, t)?.ln_value
                        } else {
                            0.0
                        };
                        Ok(cell(format!("phi{i}"), t, lk, le))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SweepTarget::SymmetricDerivative { descriptor } => {
                let desc = *descriptor;
                let params = desc.jacobi_params();
                let eval = KernelEvaluator::new(params, t, spec.t_min)?;
                let ln_h0 = specfun::ln_jacobi_norm_h(params, 0)?;
                // -d/dphi [h_0 G_t(cos phi, 1)] = h_0 sin(phi) G_x; both
                // sides vanish at the endpoints, so sweep the open grid.
                open_angle_grid(spec.grid)
                    .par_iter()
                    .enumerate()
                    .map(|(i, &phi)| {
                        let (ld, sign) = eval.ln_kernel_dx(phi.cos(), 1.0)?;
                        if sign <= 0.0 {
                            return Err(HeatkError::Numerical(format!(
                                "expected increasing endpoint profile at phi = {phi}"
                            )));
                        }
                        let lk = ln_h0 + phi.sin().ln() + ld;
                        let le = envelopes::env_symmetric_deriv(
                            desc.d, desc.d_tilde, PI, phi, t,
                        )?
                        .ln_value;
                        Ok(cell(format!("phi{i}"), t, lk, le))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SweepTarget::Ball { d, mu } => {
                let (d, mu) = (*d, *mu);
                let lam = mu + (d as f64 - 1.0) / 2.0;
                let pp = JacobiParams::new(lam - 0.5, lam - 0.5)?;
                let profile = EndpointProfile::build(pp, t, 220, spec.t_min)?;
                let radii: Vec<f64> =
                    (0..spec.grid).map(|i| i as f64 / (spec.grid - 1) as f64).collect();
                let gammas = [0.0, PI / 3.0, 2.0 * PI / 3.0, PI];
                let mut cases = Vec::new();
                for (i, &r1) in radii.iter().enumerate() {
                    for (j, &r2) in radii.iter().enumerate() {
                        if j > i {
                            continue;
                        }
                        for (k, &g) in gammas.iter().enumerate() {
                            cases.push((i, j, k, r1, r2, g));
                        }
                    }
                }
                cases
                    .par_iter()
                    .map(|&(i, j, k, r1, r2, g)| {
                        let mut x = vec![0.0; d];
                        let mut y = vec![0.0; d];
                        x[0] = r1;
                        y[0] = r2 * g.cos();
                        y[1] = r2 * g.sin();
                        let lk =
                            model_spaces::ball_heat_kernel_ln(mu, &x, &y, t, &profile, 64)?;
                        let le = envelopes::env_ball(mu, &x, &y, t)?.ln_value;
                        Ok(cell(format!("r{i}_r{j}_g{k}"), t, lk, le))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SweepTarget::Simplex { d, kappa } => {
                let (d, kappa) = (*d, kappa.clone());
                let total: f64 = kappa.iter().sum();
                let lam = total + (d as f64 - 1.0) / 2.0;
                let pp = JacobiParams::new(lam - 0.5, lam - 0.5)?;
                let profile = EndpointProfile::build(pp, t / 4.0, 220, spec.t_min)?;
                let points = simplex_point_set(d, spec.grid);
                let mut pairs = Vec::new();
                for i in 0..points.len() {
                    for j in 0..=i {
                        pairs.push((i, j));
                    }
                }
                pairs
                    .par_iter()
                    .map(|&(i, j)| {
                        let lk = model_spaces::simplex_heat_kernel_ln(
                            &kappa, &points[i], &points[j], t, &profile, 32,
                        )?;
                        let le =
                            envelopes::env_simplex(&kappa, &points[i], &points[j], t)?.ln_value;
                        Ok(cell(format!("p{i}_p{j}"), t, lk, le))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SweepTarget::LongTime { alpha, beta } => {
                if t < 1.0 {
                    return Err(HeatkError::Domain(
                        "long-time sweeps need times t >= 1".into(),
                    ));
                }
                let params = JacobiParams::new(*alpha, *beta)?;
                let eval = KernelEvaluator::new(params, t, spec.t_min)?;
                let grid = angle_grid(spec.grid);
                let mut pairs = Vec::new();
                for (i, &phi) in grid.iter().enumerate() {
                    for (j, &psi) in grid.iter().enumerate() {
                        if j > i {
                            continue;
                        }
                        pairs.push((i, j, phi, psi));
                    }
                }
                pairs
                    .par_iter()
                    .map(|&(i, j, phi, psi)| {
                        let lk = eval.ln_kernel(phi.cos(), psi.cos())?;
                        Ok(cell(format!("phi{i}_psi{j}"), t, lk, 0.0))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        cells.append(&mut batch);
    }
    Ok(RatioReport::from_cells(spec.target.label(), cells))
}

/// Deterministic barycentric point set on the closed unit simplex:
/// all grid points `(i/n, j/n)` with `i + j <= n` generalized to `d`
/// coordinates by placing the remaining mass on the last axis.
fn simplex_point_set(d: usize, n: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let s: usize = idx.iter().sum();
        if s <= n {
            pts.push(idx.iter().map(|&i| i as f64 / n as f64).collect());
        }
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] <= n {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return pts;
            }
        }
    }
}

/// One verified identity or inequality.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, max_err: f64, tol: f64) -> Self {
        Self { name: name.into(), max_err, tol, pass: max_err.is_finite() && max_err <= tol }
    }
}

fn rel_ln_err(ln_a: f64, ln_b: f64) -> f64 {
    ((ln_a - ln_b).exp() - 1.0).abs()
}

/// Runs the full battery of structural identity checks on fixed,
/// representative parameter sets: product (reduction) formula, quadratic
/// argument identities, the derivative and parameter-comparison
/// relations, semigroup property, normalization, argument symmetries,
/// and long-time decay of the deviation from equilibrium.
pub fn run_identity_checks(t_min: f64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    // Product (reduction) formula at several parameter pairs and angles.
    {
        let mut max_err = 0.0f64;
        for &(a, b, t) in &[(0.5, 0.5, 0.4), (1.5, 0.0, 0.6), (2.0, 0.75, 1.0)] {
            let params = JacobiParams::new(a, b)?;
            let lam = a + b + 0.5;
            let pp = JacobiParams::new(lam, lam)?;
            let profile = EndpointProfile::build(pp, t / 4.0, 180, t_min)?;
            let eval = KernelEvaluator::new(params, t, t_min)?;
            for &(phi, psi) in &[(0.3, 0.3), (1.2, 2.4), (0.0, 3.0), (PI, PI / 2.0)] {
                let direct = eval.ln_kernel(phi.cos(), psi.cos())?;
                let reduced = heat_kernel_reduced_ln(params, t, phi, psi, &profile, 80)?;
                max_err = max_err.max(rel_ln_err(direct, reduced));
            }
        }
        out.push(CheckResult::new("reduction_formula", max_err, 1e-7));
    }

    // Quadratic argument identities relating parameters (a, -1/2) and
    // (a, 1/2) to the ultraspherical pair (a, a).
    {
        let mut e1 = 0.0f64;
        let mut e2 = 0.0f64;
        for &(a, t) in &[(0.0, 0.3), (1.25, 0.8), (0.5, 2.0)] {
            let pm = JacobiParams::new(a, -0.5)?;
            let pp = JacobiParams::new(a, 0.5)?;
            let pu = JacobiParams::new(a, a)?;
            let em = KernelEvaluator::new(pm, t, t_min)?;
            let ep = KernelEvaluator::new(pp, t, t_min)?;
            let eu = KernelEvaluator::new(pu, t / 4.0, t_min)?;
            for &(x, y) in &[(0.9, 0.7), (0.3, -0.6), (1.0, 0.2), (-0.8, -0.8)] {
                let gp = eu.kernel(x, y)?;
                let gm = eu.kernel(-x, y)?;
                let lhs1 = em.kernel(2.0 * x * x - 1.0, 2.0 * y * y - 1.0)?;
                let rhs1 = 2f64.powf(-a - 1.5) * (gp + gm);
                e1 = e1.max(((lhs1 - rhs1) / rhs1).abs());
                if x != 0.0 && y != 0.0 {
                    let lhs2 = ep.kernel(2.0 * x * x - 1.0, 2.0 * y * y - 1.0)?;
                    let rhs2 = 2f64.powf(-a - 2.5) * (t * (a + 1.0) / 2.0).exp()
                        * (gp - gm)
                        / (x * y);
                    e2 = e2.max(((lhs2 - rhs2) / rhs2).abs());
                }
            }
        }
        out.push(CheckResult::new("quadratic_identity_minus", e1, 1e-9));
        out.push(CheckResult::new("quadratic_identity_plus", e2, 1e-9));
    }

    // Endpoint derivative identity:
    // d/dx G_t^{a,b}(x, 1) = 2 (a+1) e^{-t (a+b+2)} G_t^{a+1,b+1}(x, 1).
    {
        let mut max_err = 0.0f64;
        for &(a, b, t) in &[(0.0, 0.0, 0.25), (1.5, 0.5, 0.9), (0.5, 1.0, 1.5)] {
            let eval = KernelEvaluator::new(JacobiParams::new(a, b)?, t, t_min)?;
            let up = KernelEvaluator::new(JacobiParams::new(a + 1.0, b + 1.0)?, t, t_min)?;
            for &x in &[-0.9, 0.0, 0.5, 0.99] {
                let (ld, sign) = eval.ln_kernel_dx(x, 1.0)?;
                if sign <= 0.0 {
                    return Err(HeatkError::Numerical(
                        "endpoint derivative unexpectedly non-positive".into(),
                    ));
                }
                let rhs = (2.0 * (a + 1.0)).ln() - t * (a + b + 2.0) + up.ln_kernel(x, 1.0)?;
                max_err = max_err.max(rel_ln_err(ld, rhs));
            }
        }
        out.push(CheckResult::new("derivative_identity", max_err, 1e-9));
    }

    // Parameter-comparison inequality:
    // [(1+x)(1+y)]^{e/2} G_t^{a,b+e}(x,y)
    //   <= exp(e (a + b + 1 + e/2) t / 2) G_t^{a,b}(x,y)  for e >= 0,
    // checked as a signed log-excess (positive = violation).
    {
        let mut excess = f64::NEG_INFINITY;
        for &(a, b, e) in &[(0.5f64, 0.0f64, 1.0f64), (1.5, -0.25, 0.5), (0.0, 0.5, 2.0)] {
            let lo = KernelEvaluator::new(JacobiParams::new(a, b)?, 0.3, t_min)?;
            let hi = KernelEvaluator::new(JacobiParams::new(a, b + e)?, 0.3, t_min)?;
            for &x in &[-0.95f64, -0.2, 0.6, 1.0] {
                for &y in &[-0.5f64, 0.3, 0.9] {
                    let lhs = (e / 2.0) * ((1.0 + x).max(1e-300) * (1.0 + y)).ln()
                        + hi.ln_kernel(x, y)?;
                    let rhs =
                        e * (a + b + 1.0 + e / 2.0) * 0.3 / 2.0 + lo.ln_kernel(x, y)?;
                    excess = excess.max(lhs - rhs);
                }
            }
        }
        out.push(CheckResult::new("comparison_inequality", excess.max(0.0), 1e-10));
    }

    // Semigroup property and conservation of mass under the Jacobi weight.
    {
        let mut sg = 0.0f64;
        let mut nm = 0.0f64;
        for &(a, b) in &[(0.0, 0.0), (1.5, 0.5), (2.5, -0.5)] {
            let params = JacobiParams::new(a, b)?;
            let rule = quadrature::gauss_jacobi_rule(params, 96)?;
            let e1 = KernelEvaluator::new(params, 0.2, t_min)?;
            let e2 = KernelEvaluator::new(params, 0.5, t_min)?;
            let e3 = KernelEvaluator::new(params, 0.7, t_min)?;
            for &(x, y) in &[(0.8, -0.3), (1.0, 0.5), (-1.0, 1.0)] {
                let conv = rule.integrate_ln(|z| {
                    e1.ln_kernel(x, z).unwrap_or(f64::NEG_INFINITY)
                        + e2.ln_kernel(z, y).unwrap_or(f64::NEG_INFINITY)
                });
                sg = sg.max(rel_ln_err(conv, e3.ln_kernel(x, y)?));
                let mass =
                    rule.integrate_ln(|z| e1.ln_kernel(x, z).unwrap_or(f64::NEG_INFINITY));
                nm = nm.max(rel_ln_err(mass, 0.0));
            }
        }
        out.push(CheckResult::new("semigroup", sg, 1e-9));
        out.push(CheckResult::new("normalization", nm, 1e-10));
    }

    // Argument symmetry and the parameter-swap reflection
    // G_t^{a,b}(x, y) = G_t^{b,a}(-x, -y).
    {
        let mut max_err = 0.0f64;
        let pa = JacobiParams::new(1.5, 0.25)?;
        let ea = KernelEvaluator::new(pa, 0.15, t_min)?;
        let eb = KernelEvaluator::new(pa.swapped(), 0.15, t_min)?;
        for &(x, y) in &[(0.9, -0.4), (0.1, 0.7), (-1.0, 1.0)] {
            max_err = max_err.max(rel_ln_err(ea.ln_kernel(x, y)?, ea.ln_kernel(y, x)?));
            max_err = max_err.max(rel_ln_err(ea.ln_kernel(x, y)?, eb.ln_kernel(-x, -y)?));
        }
        out.push(CheckResult::new("symmetry", max_err, 1e-11));
    }

    // Long-time behavior: the deviation of the normalized kernel from its
    // equilibrium value 1 decays like exp(-t (a + b + 2)).
    {
        let mut max_err = 0.0f64;
        for &(a, b) in &[(0.0, 0.0), (2.0, 0.5)] {
            let params = JacobiParams::new(a, b)?;
            let lam1 = a + b + 2.0;
            for &(x, y) in &[(0.6, -0.8), (1.0, -1.0)] {
                let d2 = KernelEvaluator::new(params, 2.0, t_min)?.deviation(x, y)?;
                let d3 = KernelEvaluator::new(params, 3.0, t_min)?.deviation(x, y)?;
                // One extra unit of time must shrink the deviation by the
                // spectral gap factor.
                max_err = max_err.max((d3.abs() / d2.abs() / (-lam1).exp() - 1.0).abs());
            }
        }
        out.push(CheckResult::new("long_time_decay", max_err, 1e-3));
    }

    Ok(out)
}

/// Short-time asymptotic rate check: for fixed `phi`,
/// `-4t ln G_t(cos phi, 1) / phi^2 -> 1` as `t -> 0`. Verified at
/// `t = 1e-3` within `tol`, and required to move toward 1 when `t`
/// decreases from `4e-3`.
pub fn run_varadhan_check(tol: f64, t_min: f64) -> Result<CheckResult> {
    let params = JacobiParams::new(0.0, 0.0)?;
    let phi: f64 = 2.0;
    let rate = |t: f64| -> Result<f64> {
        let eval = KernelEvaluator::new(params, t, t_min)?;
        Ok(-4.0 * t * eval.ln_kernel(phi.cos(), 1.0)? / (phi * phi))
    };
    let r_fine = rate(1e-3)?;
    let r_coarse = rate(4e-3)?;
    let err = (r_fine - 1.0).abs();
    let improving = (r_fine - 1.0).abs() < (r_coarse - 1.0).abs();
    let mut check = CheckResult::new("varadhan_rate", err, tol);
    check.pass = check.pass && improving;
    Ok(check)
}

/// Short-time asymptotic rate for the simplex kernel: here the Gaussian
/// divisor is `t` (not `4t`), so `-t ln H_t(x, y) / d_V^2 -> 1`.
/// Verified at `t = 4e-3` between two vertices of the triangle (the
/// underlying one-dimensional kernel then sits at time 1e-3, the same
/// depth as the direct Jacobi rate check).
pub fn run_varadhan_simplex_check(tol: f64, t_min: f64) -> Result<CheckResult> {
    let kappa = [0.0, 0.0, 1.0];
    let x = [1.0, 0.0];
    let y = [0.0, 1.0];
    let dv = envelopes::dist_simplex(&x, &y)?;
    let rate = |t: f64| -> Result<f64> {
        let lam = kappa.iter().sum::<f64>() + 0.5;
        let pp = JacobiParams::new(lam - 0.5, lam - 0.5)?;
        let profile = EndpointProfile::build(pp, t / 4.0, 180, t_min)?;
        let lh = model_spaces::simplex_heat_kernel_ln(&kappa, &x, &y, t, &profile, 48)?;
        Ok(-t * lh / (dv * dv))
    };
    let err = (rate(4e-3)? - 1.0).abs();
    Ok(CheckResult::new("varadhan_rate_simplex", err, tol))
}

/// Tail-domination sweep: the supremum of the log-excess of the
/// monotonicity comparison over a `(tau, theta, t)` grid must stay below
/// a constant depending only on the exponent.
pub fn run_est_z_sweep(g: f64, grid: usize) -> Result<CheckResult> {
    let mut sup = f64::NEG_INFINITY;
    for &t in &[1e-3, 1e-2, 0.1, 1.0] {
        for i in 0..=grid {
            let tau = PI * i as f64 / grid as f64;
            for j in 0..=grid {
                let theta = (tau + (PI - tau) * j as f64 / grid as f64).min(PI);
                let (lhs, rhs) = envelopes::est_z_pair(g, tau, theta, t)?;
                sup = sup.max(lhs - rhs);
            }
        }
    }
    // Elementary bound on the admissible constant for this exponent.
    Ok(CheckResult::new(&format!("est_z[g={g}]"), sup.max(0.0), g.abs() * 5.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::T_MIN_DEFAULT;

    #[test]
    fn jacobi_endpoint_sweep_band_is_tight() {
        let spec = SweepSpec {
            target: SweepTarget::JacobiEndpoint { lambda: 1.0 },
            grid: 9,
            times: vec![0.01, 0.1, 1.0],
            t_min: T_MIN_DEFAULT,
        };
        let rep = run_ratio_sweep(&spec).unwrap();
        assert_eq!(rep.cells.len(), 27);
        assert!(rep.spread_ln().is_finite());
        assert!(rep.spread_ln() < (1e4f64).ln(), "spread {}", rep.spread_ln());
        let csv = rep.to_csv();
        assert!(csv.lines().count() == 28);
        assert!(csv.starts_with("target,cell_id,t,"));
    }

    #[test]
    fn long_time_sweep_rejects_small_times() {
        let spec = SweepSpec {
            target: SweepTarget::LongTime { alpha: 0.0, beta: 0.0 },
            grid: 5,
            times: vec![0.5],
            t_min: T_MIN_DEFAULT,
        };
        assert!(run_ratio_sweep(&spec).is_err());
    }

    #[test]
    fn simplex_point_set_covers_vertices() {
        let pts = simplex_point_set(2, 2);
        assert!(pts.contains(&vec![0.0, 0.0]));
        assert!(pts.contains(&vec![1.0, 0.0]));
        assert!(pts.contains(&vec![0.0, 1.0]));
        assert!(pts.contains(&vec![0.5, 0.5]));
        assert_eq!(pts.len(), 6);
    }

    #[test]
    fn varadhan_rate_close_to_one() {
        let check = run_varadhan_check(0.05, T_MIN_DEFAULT).unwrap();
        assert!(check.pass, "rate error {}", check.max_err);
    }

    #[test]
    fn est_z_sweep_passes() {
        for g in [-2.0, 0.0, 1.5] {
            let check = run_est_z_sweep(g, 24).unwrap();
            assert!(check.pass, "g = {g}: excess {}", check.max_err);
        }
    }
}
