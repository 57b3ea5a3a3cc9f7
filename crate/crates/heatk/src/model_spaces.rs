//! The concrete geometries whose heat kernels reduce to Jacobi
//! expansions: compact rank-one symmetric spaces (through an
//! ultraspherical-type endpoint slice), the unit ball, and the unit
//! simplex (through product formulas against symmetric beta-type
//! measures).

use crate::error::{HeatkError, Result};
use crate::jacobi_kernel::{EndpointProfile, KernelEvaluator};
use crate::quadrature;
use crate::specfun::{self, JacobiParams};

const PI: f64 = std::f64::consts::PI;
const LN_2: f64 = std::f64::consts::LN_2;

/// The five families of compact rank-one symmetric spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SpaceFamily {
    /// Sphere `S^d`, `d >= 1`.
    Sphere,
    /// Real projective space `P^d(R)`, `d >= 2`.
    RealProjective,
    /// Complex projective space `P^d(C)`, real dimension `d = 4, 6, ...`.
    ComplexProjective,
    /// Quaternionic projective space `P^d(H)`, real dimension
    /// `d = 8, 12, ...`.
    QuaternionicProjective,
    /// The Cayley (octonionic) projective plane, real dimension 16.
    CayleyPlane,
}

/// A validated space: family, real dimension `d`, and the dimension
/// `d_tilde` of its antipodal set, which together determine the Jacobi
/// parameters of the spherical-function expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SpaceDescriptor {
    pub family: SpaceFamily,
    pub d: u32,
    pub d_tilde: u32,
}

impl SpaceDescriptor {
    pub fn new(family: SpaceFamily, d: u32) -> Result<Self> {
        let d_tilde = match family {
            SpaceFamily::Sphere => {
                if d < 1 {
                    return Err(HeatkError::Domain("sphere needs d >= 1".into()));
                }
                0
            }
            SpaceFamily::RealProjective => {
                if d < 2 {
                    return Err(HeatkError::Domain("real projective space needs d >= 2".into()));
                }
                d - 1
            }
            SpaceFamily::ComplexProjective => {
                if d < 4 || d % 2 != 0 {
                    return Err(HeatkError::Domain(
                        "complex projective space needs even real dimension d >= 4".into(),
                    ));
                }
                d - 2
            }
            SpaceFamily::QuaternionicProjective => {
                if d < 8 || d % 4 != 0 {
                    return Err(HeatkError::Domain(
                        "quaternionic projective space needs real dimension d in {8, 12, ...}"
                            .into(),
                    ));
                }
                d - 4
            }
            SpaceFamily::CayleyPlane => {
                if d != 16 {
                    return Err(HeatkError::Domain("the Cayley plane has real dimension 16".into()));
                }
                8
            }
        };
        Ok(Self { family, d, d_tilde })
    }

    /// Jacobi parameters of the expansion:
    /// `alpha = d/2 - 1`, `beta = (d - d_tilde)/2 - 1`.
    pub fn jacobi_params(&self) -> JacobiParams {
        JacobiParams::new(
            self.d as f64 / 2.0 - 1.0,
            (self.d - self.d_tilde) as f64 / 2.0 - 1.0,
        )
        .expect("catalog parameters are always admissible")
    }

    /// `ln` of the heat kernel of the *normalized* model: diameter scaled
    /// to `pi`, Riemannian measure scaled to a probability measure. `dist`
    /// is the scaled distance in `[0, pi]`.
    pub fn scaled_kernel_ln(&self, t: f64, dist: f64, t_min: f64) -> Result<f64> {
        if !(0.0..=PI).contains(&dist) {
            return Err(HeatkError::Domain(format!(
                "scaled distance must lie in [0, pi], got {dist}"
            )));
        }
        let params = self.jacobi_params();
        let eval = KernelEvaluator::new(params, t, t_min)?;
        Ok(specfun::ln_jacobi_norm_h(params, 0)? + eval.ln_kernel(dist.cos(), 1.0)?)
    }

    /// `ln` of the heat kernel of the original space with diameter `diam`
    /// and total Riemannian measure `exp(ln_volume)`, at geodesic distance
    /// `dist`:
    ///
    /// `K_t(dist) = scaled_kernel_{(pi/diam)^2 t}(pi dist / diam) / vol`.
    pub fn kernel_ln(
        &self,
        t: f64,
        dist: f64,
        diam: f64,
        ln_volume: f64,
        t_min: f64,
    ) -> Result<f64> {
        if !(diam > 0.0) || !(0.0..=diam).contains(&dist) {
            return Err(HeatkError::Domain(format!(
                "need 0 <= dist <= diam, got dist = {dist}, diam = {diam}"
            )));
        }
        let scale = PI / diam;
        Ok(self.scaled_kernel_ln(scale * scale * t, scale * dist, t_min)? - ln_volume)
    }
}

/// `ln` of the mass of the ball weight:
/// `W_mu(B^d) = pi^{d/2} Gamma(mu + 1/2) / Gamma(mu + (d+1)/2)`.
pub fn ball_volume_ln(d: usize, mu: f64) -> Result<f64> {
    if d < 2 || !(mu >= 0.0) {
        return Err(HeatkError::Domain(format!(
            "ball weight needs d >= 2 and mu >= 0, got d = {d}, mu = {mu}"
        )));
    }
    Ok(d as f64 / 2.0 * PI.ln() + specfun::log_gamma(mu + 0.5)?
        - specfun::log_gamma(mu + (d as f64 + 1.0) / 2.0)?)
}

/// `ln` of the mass of the simplex weight:
/// `int_V prod_j x_j^{kappa_j - 1/2} dx
///  = prod_j Gamma(kappa_j + 1/2) / Gamma(|kappa| + (d+1)/2)`
/// (Dirichlet integral; the product runs over all `d + 1` barycentric
/// coordinates).
pub fn simplex_volume_ln(d: usize, kappa: &[f64]) -> Result<f64> {
    check_kappa(d, kappa)?;
    let total: f64 = kappa.iter().sum();
    let mut v = -specfun::log_gamma(total + (d as f64 + 1.0) / 2.0)?;
    for &k in kappa {
        v += specfun::log_gamma(k + 0.5)?;
    }
    Ok(v)
}

fn check_kappa(d: usize, kappa: &[f64]) -> Result<()> {
    if d < 2 {
        return Err(HeatkError::Domain("the simplex setting needs dimension >= 2".into()));
    }
    if kappa.len() != d + 1 || kappa.iter().any(|&k| !(k >= 0.0)) {
        return Err(HeatkError::Domain(format!(
            "kappa must have {} nonnegative entries",
            d + 1
        )));
    }
    Ok(())
}

fn profile_mismatch(profile: &EndpointProfile, lam: f64, t: f64) -> Option<HeatkError> {
    if (profile.params.alpha - (lam - 0.5)).abs() > 1e-12
        || (profile.params.beta - (lam - 0.5)).abs() > 1e-12
        || (profile.t - t).abs() > 1e-12 * t
    {
        Some(HeatkError::MissingInput(format!(
            "endpoint profile must be at parameters ({0}, {0}) and time {1}",
            lam - 0.5,
            t
        )))
    } else {
        None
    }
}

/// `ln` of the heat kernel on the unit ball `B^d` with weight
/// `(1 - |x|^2)^{mu - 1/2}`, via the one-dimensional product formula
///
/// `h_t(x, y) = [2^{2 lam} Gamma(lam + 1/2)^2 / (Gamma(2 lam + 1) W)]
///   int G_t^{lam - 1/2, lam - 1/2}(<x,y>
///        + u sqrt(1-|x|^2) sqrt(1-|y|^2), 1) dPi_{mu - 1/2}(u)`,
///
/// `lam = mu + (d-1)/2`, `W = W_mu(B^d)`. `profile` must hold the
/// ultraspherical endpoint slice at parameters `lam - 1/2` and time `t`
/// (the same time as the kernel).
pub fn ball_heat_kernel_ln(
    mu: f64,
    x: &[f64],
    y: &[f64],
    t: f64,
    profile: &EndpointProfile,
    n_nodes: usize,
) -> Result<f64> {
    let d = x.len();
    if d < 2 || y.len() != d {
        return Err(HeatkError::Domain("ball points must share a dimension >= 2".into()));
    }
    if !(mu >= 0.0) {
        return Err(HeatkError::Domain(format!("ball kernel requires mu >= 0, got {mu}")));
    }
    let lam = mu + (d as f64 - 1.0) / 2.0;
    if let Some(e) = profile_mismatch(profile, lam, t) {
        return Err(e);
    }
    // Distance validation (also rejects points outside the ball).
    crate::envelopes::dist_ball(x, y)?;
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sx = (1.0 - x.iter().map(|v| v * v).sum::<f64>()).max(0.0).sqrt();
    let sy = (1.0 - y.iter().map(|v| v * v).sum::<f64>()).max(0.0).sqrt();
    let ln_c = 2.0 * lam * LN_2 + 2.0 * specfun::log_gamma(lam + 0.5)?
        - specfun::log_gamma(2.0 * lam + 1.0)?
        - ball_volume_ln(d, mu)?;
    let rule = quadrature::pi_rule(mu - 0.5, n_nodes)?;
    let ln_int = rule.integrate_ln(|u| {
        let z = (dot + u * sx * sy).clamp(-1.0, 1.0);
        profile.ln_kernel_at(z.acos())
    });
    Ok(ln_c + ln_int)
}

/// `ln` of the heat kernel on the unit simplex `V^d` with weight
/// `prod_j x_j^{kappa_j - 1/2}` (all `d + 1` barycentric coordinates),
/// via the multivariate product formula
///
/// `H_t(x, y) = C int_{[-1,1]^{d+1}}
///    G_{t/4}^{lam - 1/2, lam - 1/2}(sum_j u_j sqrt(x_j y_j), 1)
///    prod_j dPi_{kappa_j - 1/2}(u_j)`,
///
/// `lam = |kappa| + (d-1)/2`,
/// `C = sqrt(pi) Gamma(lam + 1/2) / prod_j Gamma(kappa_j + 1/2)`.
/// `profile` must hold the endpoint slice at parameters `lam - 1/2` and
/// time `t/4`.
pub fn simplex_heat_kernel_ln(
    kappa: &[f64],
    x: &[f64],
    y: &[f64],
    t: f64,
    profile: &EndpointProfile,
    n_nodes: usize,
) -> Result<f64> {
    let d = x.len();
    check_kappa(d, kappa)?;
    if y.len() != d {
        return Err(HeatkError::Domain("simplex points must share a dimension".into()));
    }
    let total: f64 = kappa.iter().sum();
    let lam = total + (d as f64 - 1.0) / 2.0;
    if let Some(e) = profile_mismatch(profile, lam, t / 4.0) {
        return Err(e);
    }
    // Validates membership in the simplex.
    crate::envelopes::dist_simplex(x, y)?;
    let xl = (1.0 - x.iter().sum::<f64>()).max(0.0);
    let yl = (1.0 - y.iter().sum::<f64>()).max(0.0);
    let mut roots = Vec::with_capacity(d + 1);
    for j in 0..d {
        roots.push((x[j] * y[j]).sqrt());
    }
    roots.push((xl * yl).sqrt());
    let mut ln_c = 0.5 * PI.ln() + specfun::log_gamma(lam + 0.5)?;
    let mut rules = Vec::with_capacity(d + 1);
    for &k in kappa {
        ln_c -= specfun::log_gamma(k + 0.5)?;
        rules.push(quadrature::pi_rule(k - 0.5, n_nodes)?);
    }
    let ln_int = quadrature::integrate_tensor_ln_nd(&rules, |u| {
        let z: f64 = u.iter().zip(&roots).map(|(&ui, &ri)| ui * ri).sum();
        profile.ln_kernel_at(z.clamp(-1.0, 1.0).acos())
    });
    Ok(ln_c + ln_int)
}
