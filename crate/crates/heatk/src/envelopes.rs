//! Closed-form two-sided envelope functions: the expressions the heat
//! kernels are squeezed between (up to multiplicative constants depending
//! only on the fixed parameters), together with the elementary integral
//! comparisons they rest on.
//!
//! Everything is computed and returned in the log domain, since both the
//! kernels and the envelopes traverse thousands of orders of magnitude
//! across a sweep.

use crate::error::{HeatkError, Result};
use crate::quadrature;
use crate::specfun::JacobiParams;

const PI: f64 = std::f64::consts::PI;

/// An evaluated envelope, split into the Gaussian factor and the
/// polynomial prefactor (`ln_value = ln_prefactor + ln_gaussian`). The
/// split lets callers compare structurally related envelopes factor by
/// factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeValue {
    pub ln_value: f64,
    pub ln_prefactor: f64,
    pub ln_gaussian: f64,
}

impl EnvelopeValue {
    fn new(ln_prefactor: f64, ln_gaussian: f64) -> Self {
        Self { ln_value: ln_prefactor + ln_gaussian, ln_prefactor, ln_gaussian }
    }
}

fn check_angle(name: &str, v: f64) -> Result<()> {
    if !(0.0..=PI).contains(&v) {
        return Err(HeatkError::Domain(format!("{name} must lie in [0, pi], got {v}")));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(HeatkError::Domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// General two-angle Jacobi envelope:
///
/// `[t + phi psi]^{-a-1/2} [t + (pi-phi)(pi-psi)]^{-b-1/2} t^{-1/2}
///  exp(-(phi-psi)^2 / 4t)`.
///
/// Squeezes `G_t^{a,b}(cos phi, cos psi)` uniformly for `0 < t <= 1` when
/// `a, b >= -1/2`; evaluable for all valid parameters and `t > 0`.
pub fn env_jac_gen(params: JacobiParams, phi: f64, psi: f64, t: f64) -> Result<EnvelopeValue> {
    JacobiParams::new(params.alpha, params.beta)?;
    check_angle("phi", phi)?;
    check_angle("psi", psi)?;
    check_time(t)?;
    let pref = -(params.alpha + 0.5) * (t + phi * psi).ln()
        - (params.beta + 0.5) * (t + (PI - phi) * (PI - psi)).ln()
        - 0.5 * t.ln();
    let gauss = -(phi - psi) * (phi - psi) / (4.0 * t);
    Ok(EnvelopeValue::new(pref, gauss))
}

/// Endpoint (ultraspherical) envelope:
///
/// `t^{-lambda-1/2} [t + pi - phi]^{-lambda-1/2} t^{-1/2}
///  exp(-phi^2 / 4t)`,
///
/// squeezing `G_t^{lambda,lambda}(cos phi, 1)` for `0 < t <= 1`.
pub fn env_jac_spec(lambda: f64, phi: f64, t: f64) -> Result<EnvelopeValue> {
    if !(lambda > -1.0) || !lambda.is_finite() {
        return Err(HeatkError::Domain(format!("env_jac_spec requires lambda > -1, got {lambda}")));
    }
    check_angle("phi", phi)?;
    check_time(t)?;
    let pref = -(lambda + 0.5) * t.ln() - (lambda + 0.5) * (t + PI - phi).ln() - 0.5 * t.ln();
    Ok(EnvelopeValue::new(pref, -phi * phi / (4.0 * t)))
}

/// Envelope of the (unit-diameter-scaled) symmetric-space kernel on
/// `M^{d, d_tilde}` at scaled distance `phi` in `[0, pi]`:
///
/// `[t + pi - phi]^{-(d - d_tilde - 1)/2} t^{-d/2} exp(-phi^2 / 4t)`.
pub fn env_symmetric(d: u32, d_tilde: u32, phi: f64, t: f64) -> Result<EnvelopeValue> {
    if d == 0 || d_tilde >= d {
        return Err(HeatkError::Domain(format!(
            "need dimension d >= 1 and antipodal dimension < d, got ({d}, {d_tilde})"
        )));
    }
    check_angle("phi", phi)?;
    check_time(t)?;
    let pref = -((d - d_tilde) as f64 - 1.0) / 2.0 * (t + PI - phi).ln()
        - d as f64 / 2.0 * t.ln();
    Ok(EnvelopeValue::new(pref, -phi * phi / (4.0 * t)))
}

/// Envelope of `-d/dphi` of the symmetric-space kernel profile, in the
/// original (unscaled) metric with the given diameter. Two regimes:
///
/// * `t <= 1`: `phi (diam - phi) (t + diam - phi)^{-(d+1-d_tilde)/2}
///    t^{-d/2-1} exp(-phi^2/4t)`,
/// * `t >= 1`: `phi (diam - phi) exp(-t (d - d_tilde/2))`.
pub fn env_symmetric_deriv(
    d: u32,
    d_tilde: u32,
    diam: f64,
    phi: f64,
    t: f64,
) -> Result<EnvelopeValue> {
    if d == 0 || d_tilde >= d {
        return Err(HeatkError::Domain(format!(
            "need dimension d >= 1 and antipodal dimension < d, got ({d}, {d_tilde})"
        )));
    }
    if !(diam > 0.0) || !(0.0..=diam).contains(&phi) {
        return Err(HeatkError::Domain(format!(
            "need 0 <= phi <= diam, got phi = {phi}, diam = {diam}"
        )));
    }
    check_time(t)?;
    let edge = (phi * (diam - phi)).max(0.0).ln();
    if t <= 1.0 {
        let pref = edge
            - ((d + 1 - d_tilde) as f64) / 2.0 * (t + diam - phi).ln()
            - (d as f64 / 2.0 + 1.0) * t.ln();
        Ok(EnvelopeValue::new(pref, -phi * phi / (4.0 * t)))
    } else {
        Ok(EnvelopeValue::new(edge, -t * (d as f64 - d_tilde as f64 / 2.0)))
    }
}

/// Squared-norm complement `1 - |x|^2`, clamped against rounding.
fn sq_complement(x: &[f64]) -> f64 {
    (1.0 - x.iter().map(|v| v * v).sum::<f64>()).max(0.0)
}

fn check_ball_point(name: &str, d: usize, x: &[f64]) -> Result<()> {
    if x.len() != d {
        return Err(HeatkError::Domain(format!("{name} must have dimension {d}, got {}", x.len())));
    }
    let n2: f64 = x.iter().map(|v| v * v).sum();
    if n2 > 1.0 + 1e-12 {
        return Err(HeatkError::Domain(format!("{name} must lie in the unit ball, |{name}|^2 = {n2}")));
    }
    Ok(())
}

/// Geodesic-type distance on the unit ball:
/// `arccos(<x,y> + sqrt(1-|x|^2) sqrt(1-|y|^2))`.
pub fn dist_ball(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(HeatkError::Domain("ball points must have equal positive dimension".into()));
    }
    check_ball_point("x", x.len(), x)?;
    check_ball_point("y", y.len(), y)?;
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let c = dot + sq_complement(x).sqrt() * sq_complement(y).sqrt();
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// Ball envelope:
///
/// `[t + pi - d_B]^{-lambda_mu}
///  (t + sqrt(1-|x|^2) sqrt(1-|y|^2) / (pi - d_B))^{-mu}
///  t^{-d/2} exp(-d_B^2 / 4t)`,
///
/// with `lambda_mu = mu + (d-1)/2` and the middle fraction continuously
/// extended by 0 at antipodal points.
pub fn env_ball(mu: f64, x: &[f64], y: &[f64], t: f64) -> Result<EnvelopeValue> {
    let d = x.len();
    if d < 2 {
        return Err(HeatkError::Domain("the ball setting needs dimension >= 2".into()));
    }
    if !(mu >= 0.0) {
        return Err(HeatkError::Domain(format!("env_ball requires mu >= 0, got {mu}")));
    }
    check_time(t)?;
    let theta = dist_ball(x, y)?;
    let lam = mu + (d as f64 - 1.0) / 2.0;
    let gap = PI - theta;
    let s = if gap < 1e-12 { 0.0 } else { (sq_complement(x) * sq_complement(y)).sqrt() / gap };
    let pref =
        -lam * (t + gap).ln() - mu * (t + s).ln() - d as f64 / 2.0 * t.ln();
    Ok(EnvelopeValue::new(pref, -theta * theta / (4.0 * t)))
}

fn check_simplex_point(name: &str, d: usize, x: &[f64]) -> Result<f64> {
    if x.len() != d {
        return Err(HeatkError::Domain(format!("{name} must have dimension {d}, got {}", x.len())));
    }
    let sum: f64 = x.iter().sum();
    if x.iter().any(|&v| v < 0.0) || sum > 1.0 + 1e-12 {
        return Err(HeatkError::Domain(format!("{name} must lie in the unit simplex")));
    }
    Ok((1.0 - sum).max(0.0))
}

/// Distance on the unit simplex: `arccos(sum_j sqrt(x_j y_j))` with the
/// implicit barycentric coordinate `x_{d+1} = 1 - sum x_j` included.
pub fn dist_simplex(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(HeatkError::Domain("simplex points must have equal positive dimension".into()));
    }
    let xl = check_simplex_point("x", x.len(), x)?;
    let yl = check_simplex_point("y", y.len(), y)?;
    let mut c: f64 = x.iter().zip(y).map(|(a, b)| (a * b).sqrt()).sum();
    c += (xl * yl).sqrt();
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// Simplex envelope:
///
/// `prod_{j=1}^{d+1} (t + sqrt(x_j y_j))^{-kappa_j}
///  t^{-d/2} exp(-d_V^2 / t)`
///
/// (note the Gaussian divisor `t`, not `4t`: the simplex metric halves
/// distances relative to the ball under the square-root bijection).
pub fn env_simplex(kappa: &[f64], x: &[f64], y: &[f64], t: f64) -> Result<EnvelopeValue> {
    let d = x.len();
    if d < 2 {
        return Err(HeatkError::Domain("the simplex setting needs dimension >= 2".into()));
    }
    if kappa.len() != d + 1 || kappa.iter().any(|&k| k < 0.0) {
        return Err(HeatkError::Domain(format!(
            "kappa must have {} nonnegative entries",
            d + 1
        )));
    }
    check_time(t)?;
    let xl = check_simplex_point("x", d, x)?;
    let yl = check_simplex_point("y", d, y)?;
    let theta = dist_simplex(x, y)?;
    let mut pref = -(d as f64) / 2.0 * t.ln();
    for j in 0..d {
        pref -= kappa[j] * (t + (x[j] * y[j]).sqrt()).ln();
    }
    pref -= kappa[d] * (t + (xl * yl).sqrt()).ln();
    Ok(EnvelopeValue::new(pref, -theta * theta / t))
}

/// Both sides (in logs) of the endpoint integral comparison
///
/// `int_{[0,1]} (pi - Phi(w) + D)^{-xi} exp(-Phi(w)^2/D) dPi_nu(w)
///  ~ (1/2) D^{nu+1/2} (pi - Phi(1) + D)^{-xi}
///    (B/(pi - Phi(1)) + D)^{-nu-1/2} exp(-Phi(1)^2/D)`
///
/// with `Phi(w) = arccos(A + Bw)`, `0 <= B <= 1`, `-1 <= A <= 1-B`,
/// `D > 0`. Conventions making the degenerate slices exact: the right
/// side carries the factor 1/2 (the mass of the half interval) so that at
/// `B = 0` both sides coincide identically, except at `nu = -1/2` where
/// the right side keeps the paper-free full-mass normalization and the
/// left side (a single atom at w = 1, mass 1/2) sits at exactly half of
/// it. Returns `(ln lhs, ln rhs)`.
pub fn lemma_fvii_pair(
    nu: f64,
    xi: f64,
    a: f64,
    b: f64,
    d_var: f64,
    n_nodes: usize,
) -> Result<(f64, f64)> {
    if nu < -0.5 {
        return Err(HeatkError::Domain(format!("lemma_fvii_pair requires nu >= -1/2, got {nu}")));
    }
    if !(0.0..=1.0).contains(&b) || !(-1.0..=1.0 - b).contains(&a) || !(d_var > 0.0) {
        return Err(HeatkError::Domain(format!(
            "need 0 <= B <= 1, -1 <= A <= 1-B, D > 0; got A = {a}, B = {b}, D = {d_var}"
        )));
    }
    let ln_f = |w: f64| {
        let phi = (a + b * w).clamp(-1.0, 1.0).acos();
        -xi * (PI - phi + d_var).ln() - phi * phi / d_var
    };
    let phi1 = (a + b).clamp(-1.0, 1.0).acos();
    if nu == -0.5 {
        // lhs: single atom at w = 1 with mass 1/2; rhs: the full-mass form
        // evaluated from the same expression, so the ratio is exactly 1/2.
        return Ok(((0.5f64).ln() + ln_f(1.0), ln_f(1.0)));
    }
    if b == 0.0 {
        // Constant integrand: both sides reduce to (mass 1/2) * f(A).
        let v = (0.5f64).ln() + ln_f(1.0);
        return Ok((v, v));
    }
    let rule = quadrature::pi_half_rule(nu, n_nodes)?;
    let lhs = rule.integrate_ln(ln_f);
    let mid = if PI - phi1 < 1e-300 { d_var.ln() } else { (b / (PI - phi1) + d_var).ln() };
    let rhs = (0.5f64).ln() + (nu + 0.5) * d_var.ln() - xi * (PI - phi1 + d_var).ln()
        - (nu + 0.5) * mid
        - phi1 * phi1 / d_var;
    Ok((lhs, rhs))
}

/// Both sides (in logs) of the Gaussian-moment comparison
///
/// `int_a^b exp(-x^2) (x-a)^g x^{g+1} dx
///  ~ ((b-a) b / ((b-a) b + 1))^{g+1} exp(-a^2)`,
///
/// for fixed `g > -1` and `0 <= a <= b`. The integrable endpoint
/// singularity is absorbed by substituting `x = a + s^2` and folding
/// `s^{2g+1}` into a one-sided Gauss-Jacobi weight.
pub fn lemma_f7_pair(g: f64, a: f64, b: f64, n_nodes: usize) -> Result<(f64, f64)> {
    if !(g > -1.0) {
        return Err(HeatkError::Domain(format!("lemma_f7_pair requires g > -1, got {g}")));
    }
    if !(0.0 <= a && a <= b) {
        return Err(HeatkError::Domain(format!("need 0 <= a <= b, got a = {a}, b = {b}")));
    }
    if a == b {
        // Empty interval: both sides vanish (log = -inf), degenerately
        // but consistently.
        return Ok((f64::NEG_INFINITY, f64::NEG_INFINITY));
    }
    // Beyond x^2 > a^2 + 60 the integrand is negligible next to exp(-a^2).
    let b_eff = b.min((a * a + 60.0).sqrt());
    let p = (b - a) * b;
    let rhs = (g + 1.0) * (p / (p + 1.0)).ln() - a * a;
    if a == 0.0 {
        // The endpoint factors merge into x^{2g+1}: fold the whole power
        // into the Jacobi weight, leaving only the analytic exp(-x^2).
        let base = quadrature::gauss_jacobi_rule(JacobiParams::new(0.0, 2.0 * g + 1.0)?, n_nodes)?;
        let scale = (b_eff / 2.0).powf(2.0 * g + 2.0);
        let mut m = f64::NEG_INFINITY;
        let mut vals = Vec::with_capacity(base.len());
        for (&z, &w) in base.nodes.iter().zip(&base.weights) {
            let x = b_eff * (1.0 + z) / 2.0;
            let lv = -x * x;
            vals.push((lv, w * scale));
            m = m.max(lv);
        }
        let sum: f64 = vals.iter().map(|&(v, w)| w * (v - m).exp()).sum();
        return Ok((m + sum.ln(), rhs));
    }
    let c = (b_eff - a).sqrt();
    // s in [0, c], weight s^{2g+1}: map s = c (1+z)/2 with Jacobi weight
    // (1+z)^{2g+1} on [-1, 1].
    let base = quadrature::gauss_jacobi_rule(JacobiParams::new(0.0, 2.0 * g + 1.0)?, n_nodes)?;
    let scale = (c / 2.0).powf(2.0 * g + 2.0);
    let mut vals = Vec::with_capacity(base.len());
    let mut m = f64::NEG_INFINITY;
    for (&z, &w) in base.nodes.iter().zip(&base.weights) {
        let s = c * (1.0 + z) / 2.0;
        let x = a + s * s;
        // Remaining smooth factor: 2 exp(-x^2) x^{g+1}.
        let lv = (2.0f64).ln() - x * x + (g + 1.0) * x.max(1e-300).ln();
        vals.push((lv, w * scale));
        m = m.max(lv);
    }
    let sum: f64 = vals.iter().map(|&(v, w)| w * (v - m).exp()).sum();
    Ok((m + sum.ln(), rhs))
}

/// Both sides (in logs) of the tail-domination inequality
///
/// `(t + pi - theta)^g exp(-theta^2/4t)
///  <~ (t + pi - tau)^g exp(-tau^2/4t)` for `0 <= tau <= theta <= pi`:
/// returns `(ln lhs, ln rhs)`; the admissible constant depends only on
/// `g`.
pub fn est_z_pair(g: f64, tau: f64, theta: f64, t: f64) -> Result<(f64, f64)> {
    if !(0.0 <= tau && tau <= theta && theta <= PI) {
        return Err(HeatkError::Domain(format!(
            "need 0 <= tau <= theta <= pi, got tau = {tau}, theta = {theta}"
        )));
    }
    check_time(t)?;
    let lhs = g * (t + PI - theta).ln() - theta * theta / (4.0 * t);
    let rhs = g * (t + PI - tau).ln() - tau * tau / (4.0 * t);
    Ok((lhs, rhs))
}
