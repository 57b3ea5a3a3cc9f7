//! Evaluation of the Jacobi heat kernel
//! `G_t(x, y) = sum_n exp(-t n(n+a+b+1)) P_n(x) P_n(y) / h_n`.
//!
//! The series is summed by upward recurrences for everything in sight:
//! polynomial values, norm ratios `h_0/h_n` and exponential factors. Two
//! paths share that structure. The fast path works in `f64` and is valid
//! while the sum cancels by at most a few orders of magnitude. Deep in
//! the Gaussian tail (`ln G ~ -(theta_x - theta_y)^2 / 4t`, thousands
//! below the largest term at small `t`) every quantity is carried in
//! [`BigFix`] fixed point wide enough that the floor sits far below the
//! result. Both paths validate a posteriori: the accumulated-rounding
//! bound is compared against the achieved sum, and the evaluator
//! escalates to (wider) fixed point when the check fails, so a wrong
//! depth estimate costs time, never accuracy.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::bigfix::BigFix;
use crate::error::{HeatkError, Result};
use crate::quadrature;
use crate::specfun::{self, JacobiParams};

/// Cancellation depth (in ln units) up to which the `f64` path is tried
/// first.
const DEPTH_F64: f64 = 5.0;

/// Truncation guard in ln units: the first neglected term sits this far
/// below the smallest magnitude the evaluation must resolve.
const GUARD_LN: f64 = 46.0;

/// Hard ceiling on the fixed-point width (bits).
const MAX_FRAC_BITS: u32 = 1 << 17;

const LN_2: f64 = std::f64::consts::LN_2;
const PI: f64 = std::f64::consts::PI;

/// Smallest summation length whose tail is negligible: the index of the
/// first past-peak term whose worst-case magnitude (attained at
/// `x = y = 1`) has dropped `drop_ln` below the largest term.
pub fn truncation_order(params: JacobiParams, t: f64, drop_ln: f64) -> Result<usize> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(HeatkError::Domain(format!("truncation_order requires t > 0, got {t}")));
    }
    let s1 = params.alpha + params.beta + 1.0;
    let ln_h0 = specfun::ln_jacobi_norm_h(params, 0)?;
    let mut ln_max = f64::NEG_INFINITY;
    let mut n_peak = 0usize;
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        let b = -t * nf * (nf + s1) + 2.0 * specfun::ln_jacobi_at_one(params, n)?
            - specfun::ln_jacobi_norm_h(params, n)?
            + ln_h0;
        if b > ln_max {
            ln_max = b;
            n_peak = n;
        }
        if n > n_peak + 2 && b < ln_max - drop_ln {
            return Ok(n);
        }
        n += 1;
        if n > 2_000_000 {
            return Err(HeatkError::Numerical(format!(
                "truncation order exceeds 2e6 (t = {t}, drop = {drop_ln})"
            )));
        }
    }
}

/// Fixed-point tables shared by all evaluations of one `(params, t)` pair
/// at one width: pre-divided recurrence coefficients, exponential factors
/// and norm ratios, all functions of `n` only.
struct BigTables {
    frac_bits: u32,
    /// `P_n = (axd*x + bcd) P_{n-1} - ccd P_{n-2}`, entries for n >= 2 at
    /// index n.
    axd: Vec<BigFix>,
    bcd: Vec<BigFix>,
    ccd: Vec<BigFix>,
    /// `exp(-t lambda_n)`.
    e: Vec<BigFix>,
    /// `h_0 / h_n`.
    r: Vec<BigFix>,
}

/// One summed series: log-magnitudes and signs of the kernel sum
/// `S = h_0 G` and (optionally) its x-derivative, plus the validated
/// bound on the relative rounding error.
struct SumOut {
    ln_abs: f64,
    sign: f64,
    dln_abs: f64,
    dsign: f64,
    rel_err: f64,
}

/// Heat-kernel evaluator for a fixed parameter pair and time.
///
/// Construction is cheap; fixed-point coefficient tables are built lazily
/// per width tier and shared across queries (and threads), so sweeping
/// many `(x, y)` pairs at one `(params, t)` amortizes all `n`-only work.
pub struct KernelEvaluator {
    pub params: JacobiParams,
    pub t: f64,
    ln_h0: f64,
    tiers: Mutex<HashMap<u32, Arc<BigTables>>>,
}

impl KernelEvaluator {
    /// `t_min` is the refusal floor: series cost and fixed-point width
    /// grow without bound as `t` decreases, so lower times are rejected
    /// rather than silently attempted.
    pub fn new(params: JacobiParams, t: f64, t_min: f64) -> Result<Self> {
        JacobiParams::new(params.alpha, params.beta)?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(HeatkError::Domain(format!("time must be positive, got {t}")));
        }
        if t < t_min {
            return Err(HeatkError::TimeBelowFloor { t, t_min });
        }
        Ok(Self { params, t, ln_h0: specfun::ln_jacobi_norm_h(params, 0)?, tiers: Mutex::new(HashMap::new()) })
    }

    fn check_xy(x: f64, y: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&x) || !(-1.0..=1.0).contains(&y) {
            return Err(HeatkError::Domain(format!(
                "kernel arguments must lie in [-1,1], got ({x}, {y})"
            )));
        }
        Ok(())
    }

    /// Expected cancellation depth of the sum at `(x, y)`, in ln units.
    fn depth_raw(&self, x: f64, y: f64) -> f64 {
        let d = x.acos() - y.acos();
        d * d / (4.0 * self.t)
    }

    /// Depth estimate padded for the polynomial (non-Gaussian) factors of
    /// the kernel; sizing the fixed point from it, an underestimate is
    /// caught by the a-posteriori check and escalated.
    fn depth_budget(&self, x: f64, y: f64) -> f64 {
        let (a, b) = (self.params.alpha, self.params.beta);
        self.depth_raw(x, y) + 2.0 * (a.abs() + b.abs() + 3.0) * (1.0 + 1.0 / self.t).ln() + 40.0
    }

    fn tier_for(depth: f64) -> u32 {
        let need = (depth / LN_2).ceil() as u32 + 128;
        need.next_power_of_two().max(256)
    }

    /// Depth capacity (ln units) resolvable at a given width.
    fn tier_capacity(bits: u32) -> f64 {
        (bits.saturating_sub(128)) as f64 * LN_2
    }

    fn tables(&self, bits: u32) -> Result<Arc<BigTables>> {
        let mut map = self.tiers.lock().expect("tier cache poisoned");
        if let Some(t) = map.get(&bits) {
            return Ok(t.clone());
        }
        let t = Arc::new(self.build_tables(bits)?);
        map.insert(bits, t.clone());
        Ok(t)
    }

    fn build_tables(&self, bits: u32) -> Result<BigTables> {
        let (a, b) = (self.params.alpha, self.params.beta);
        let t = self.t;
        let n_max = truncation_order(self.params, t, Self::tier_capacity(bits) + GUARD_LN)?;
        let bf = |v: f64| BigFix::from_f64(v, bits);
        // All composite coefficients are assembled from exact fixed-point
        // images of a, b, t and integers; additions are exact and each
        // product/quotient rounds once at the resolution floor. That keeps
        // every coefficient coherent with a single underlying (a, b, t),
        // which the tail cancellation depends on.
        let one = bf(1.0)?;
        let av = bf(a)?;
        let bv = bf(b)?;
        let s = av.add(&bv);
        let tv = bf(t)?;
        let mut axd = vec![one.clone(); n_max + 1];
        let mut bcd = vec![BigFix::zero(bits); n_max + 1];
        let mut ccd = vec![BigFix::zero(bits); n_max + 1];
        let a2b2 = av.mul(&av).sub(&bv.mul(&bv));
        for n in 2..=n_max {
            let nf = n as f64;
            let c0 = bf(2.0 * nf - 2.0)?.add(&s);
            let c1 = bf(2.0 * nf - 1.0)?.add(&s);
            let c2 = bf(2.0 * nf)?.add(&s);
            let ax = c1.mul(&c2).mul(&c0);
            let bc = c1.mul(&a2b2);
            let cc = bf(nf - 1.0)?
                .add(&av)
                .mul(&bf(nf - 1.0)?.add(&bv))
                .mul(&c2)
                .mul_i64(2);
            let den = bf(2.0 * nf)?.mul(&bf(nf)?.add(&s)).mul(&c0);
            axd[n] = ax.div(&den)?;
            bcd[n] = bc.div(&den)?;
            ccd[n] = cc.div(&den)?;
        }
        // e_{n+1} = e_n d_n with d_{n+1} = d_n q: two exponentials total.
        let mut e = Vec::with_capacity(n_max + 1);
        e.push(one.clone());
        let mut d = BigFix::exp_big(&tv.mul(&s.add(&bf(2.0)?)).neg())?;
        let q = BigFix::exp(-2.0 * t, bits)?;
        for _ in 1..=n_max {
            let prev = e.last().unwrap().clone();
            e.push(prev.mul(&d));
            d = d.mul(&q);
        }
        // r_n = h_0 / h_n by the rational ratio recurrence.
        let mut r = Vec::with_capacity(n_max + 1);
        r.push(one.clone());
        if n_max >= 1 {
            let num = s.add(&bf(3.0)?);
            let den = av.add(&one).mul(&bv.add(&one));
            r.push(num.div(&den)?);
        }
        for n in 2..=n_max {
            let nf = n as f64;
            let nv = bf(nf)?;
            let num = nv.mul(&nv.add(&s)).mul(&bf(2.0 * nf + 1.0)?.add(&s));
            let den = nv.add(&av).mul(&nv.add(&bv)).mul(&bf(2.0 * nf - 1.0)?.add(&s));
            let prev = r.last().unwrap();
            r.push(prev.mul(&num).div(&den)?);
        }
        Ok(BigTables { frac_bits: bits, axd, bcd, ccd, e, r })
    }

    /// `f64` summation of `S = h_0 G` (and optionally `dS/dx`). Returns
    /// magnitudes, signs and the estimated relative rounding error.
    fn sum_f64(&self, x: f64, y: f64, deriv: bool) -> Result<SumOut> {
        let (a, b) = (self.params.alpha, self.params.beta);
        let s = a + b;
        let t = self.t;
        let n_max = truncation_order(self.params, t, DEPTH_F64 + 37.0)?;
        let mut px0 = 1.0f64;
        let mut py0 = 1.0f64;
        let mut px1 = 0.5 * (s + 2.0) * x + 0.5 * (a - b);
        let mut py1 = 0.5 * (s + 2.0) * y + 0.5 * (a - b);
        let mut dpx0 = 0.0f64;
        let mut dpx1 = 0.5 * (s + 2.0);
        let mut en = (-t * (s + 2.0)).exp();
        let mut dn = en * (-2.0 * t).exp();
        let mut rn = (s + 3.0) / ((a + 1.0) * (b + 1.0));
        let mut sum = 1.0f64;
        let mut dsum = 0.0f64;
        let mut max_abs = 1.0f64;
        let q = (-2.0 * t).exp();
        if n_max >= 1 {
            let term = en * px1 * py1 * rn;
            sum += term;
            max_abs = max_abs.max(term.abs());
            if deriv {
                let dterm = en * dpx1 * py1 * rn;
                dsum += dterm;
                max_abs = max_abs.max(dterm.abs());
            }
        }
        for n in 2..=n_max {
            let nf = n as f64;
            let (ax, bc, cc, den) = specfun::jacobi_rec_coeffs(nf, a, b);
            let (axd, bcd, ccd) = (ax / den, bc / den, cc / den);
            let tx = axd * x + bcd;
            let px = tx * px1 - ccd * px0;
            let ty = axd * y + bcd;
            let py = ty * py1 - ccd * py0;
            if deriv {
                let dpx = axd * px1 + tx * dpx1 - ccd * dpx0;
                dpx0 = dpx1;
                dpx1 = dpx;
            }
            px0 = px1;
            px1 = px;
            py0 = py1;
            py1 = py;
            en *= dn;
            dn *= q;
            rn *= nf * (nf + s) * (2.0 * nf + 1.0 + s)
                / ((nf + a) * (nf + b) * (2.0 * nf - 1.0 + s));
            if en < 1e-320 {
                break;
            }
            let term = en * px1 * py1 * rn;
            sum += term;
            max_abs = max_abs.max(term.abs());
            if deriv {
                let dterm = en * dpx1 * py1 * rn;
                dsum += dterm;
                max_abs = max_abs.max(dterm.abs());
            }
        }
        let noise = 8.0 * (n_max as f64).sqrt() * f64::EPSILON * max_abs;
        let mut rel = if sum == 0.0 { f64::INFINITY } else { noise / sum.abs() };
        if deriv {
            rel = rel.max(if dsum == 0.0 { f64::INFINITY } else { noise / dsum.abs() });
        }
        Ok(SumOut {
            ln_abs: sum.abs().ln(),
            sign: sum.signum(),
            dln_abs: dsum.abs().ln(),
            dsign: dsum.signum(),
            rel_err: rel,
        })
    }

    /// Fixed-point summation at a given width tier.
    fn sum_big(&self, tab: &BigTables, x: f64, y: f64, deriv: bool) -> Result<SumOut> {
        let bits = tab.frac_bits;
        let bf = |v: f64| BigFix::from_f64(v, bits);
        let one = bf(1.0)?;
        let av = bf(self.params.alpha)?;
        let bv = bf(self.params.beta)?;
        let s = av.add(&bv);
        let xv = bf(x)?;
        let yv = bf(y)?;
        // P_1 = ((s+2) x + (a-b)) / 2, assembled exactly.
        let sp2 = s.add(&bf(2.0)?);
        let amb = av.sub(&bv);
        let half = bf(0.5)?;
        let mut px0 = one.clone();
        let mut py0 = one.clone();
        let mut px1 = sp2.mul(&xv).add(&amb).mul(&half);
        let mut py1 = sp2.mul(&yv).add(&amb).mul(&half);
        let mut dpx0 = BigFix::zero(bits);
        let mut dpx1 = sp2.mul(&half);
        let mut sum = one.clone();
        let mut dsum = BigFix::zero(bits);
        let mut max_ln = 0.0f64;
        let mut n_used = 1usize;
        let n_top = tab.e.len() - 1;
        if n_top >= 1 {
            let term = tab.e[1].mul(&px1).mul(&py1).mul(&tab.r[1]);
            if !term.is_zero() {
                max_ln = max_ln.max(term.ln_abs()?);
            }
            sum = sum.add(&term);
            if deriv {
                dsum = dsum.add(&tab.e[1].mul(&dpx1).mul(&py1).mul(&tab.r[1]));
            }
        }
        for n in 2..=n_top {
            if tab.e[n].is_zero() {
                break;
            }
            let tx = tab.axd[n].mul(&xv).add(&tab.bcd[n]);
            let px = tx.mul(&px1).sub(&tab.ccd[n].mul(&px0));
            let ty = tab.axd[n].mul(&yv).add(&tab.bcd[n]);
            let py = ty.mul(&py1).sub(&tab.ccd[n].mul(&py0));
            if deriv {
                let dpx = tab.axd[n].mul(&px1).add(&tx.mul(&dpx1)).sub(&tab.ccd[n].mul(&dpx0));
                dpx0 = std::mem::replace(&mut dpx1, dpx);
            }
            px0 = std::mem::replace(&mut px1, px);
            py0 = std::mem::replace(&mut py1, py);
            let term = tab.e[n].mul(&px1).mul(&py1).mul(&tab.r[n]);
            if !term.is_zero() {
                max_ln = max_ln.max(term.ln_abs()?);
                sum = sum.add(&term);
                if deriv {
                    dsum = dsum.add(&tab.e[n].mul(&dpx1).mul(&py1).mul(&tab.r[n]));
                }
            }
            n_used = n;
        }
        // Accumulated rounding: a handful of floor operations per term,
        // each of absolute size 2^-bits, amplified by the polynomial
        // magnitudes already folded into max_ln.
        let err_ln = (64.0 * n_used as f64).ln() - bits as f64 * LN_2 + max_ln;
        let (ln_abs, sign) = if sum.is_zero() {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (sum.ln_abs()?, if sum.is_negative() { -1.0 } else { 1.0 })
        };
        let (dln_abs, dsign) = if dsum.is_zero() {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (dsum.ln_abs()?, if dsum.is_negative() { -1.0 } else { 1.0 })
        };
        let mut rel = (err_ln - ln_abs).exp();
        if deriv {
            rel = rel.max((err_ln - dln_abs).exp());
        }
        Ok(SumOut { ln_abs, sign, dln_abs, dsign, rel_err: rel })
    }

    /// Sums `S = h_0 G` (and the derivative sum when asked), choosing and
    /// escalating paths until the validated relative error is below 1e-10.
    fn sum(&self, x: f64, y: f64, deriv: bool) -> Result<SumOut> {
        Self::check_xy(x, y)?;
        if self.depth_raw(x, y) <= DEPTH_F64 {
            let out = self.sum_f64(x, y, deriv)?;
            if out.rel_err <= 1e-10 {
                return Ok(out);
            }
        }
        let mut bits = Self::tier_for(self.depth_budget(x, y));
        loop {
            let tab = self.tables(bits)?;
            let out = self.sum_big(&tab, x, y, deriv)?;
            if out.rel_err <= 1e-12 {
                return Ok(out);
            }
            if bits >= MAX_FRAC_BITS {
                return Err(HeatkError::Numerical(format!(
                    "kernel sum not resolved at {bits} fixed-point bits \
                     (params ({}, {}), t = {}, x = {x}, y = {y})",
                    self.params.alpha, self.params.beta, self.t
                )));
            }
            bits *= 2;
        }
    }

    /// `ln G_t(x, y)`. Errors if the computed kernel is not positive
    /// (cannot happen for `alpha, beta >= -1/2`, where positivity is a
    /// theorem; outside that range the signed [`Self::kernel`] is the
    /// honest interface).
    pub fn ln_kernel(&self, x: f64, y: f64) -> Result<f64> {
        let out = self.sum(x, y, false)?;
        if out.sign <= 0.0 {
            return Err(HeatkError::Numerical(format!(
                "kernel non-positive at ({x}, {y}), t = {}",
                self.t
            )));
        }
        Ok(out.ln_abs - self.ln_h0)
    }

    /// `G_t(x, y)` with its sign (underflows to 0 deep in the tail).
    pub fn kernel(&self, x: f64, y: f64) -> Result<f64> {
        let out = self.sum(x, y, false)?;
        Ok(out.sign * (out.ln_abs - self.ln_h0).exp())
    }

    /// `(ln |dG/dx|, sign)` of the x-derivative of the kernel, summed by
    /// the differentiated recurrence (independent of the closed-form
    /// parameter-shift identity it is tested against).
    pub fn ln_kernel_dx(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let out = self.sum(x, y, true)?;
        Ok((out.dln_abs - self.ln_h0, out.dsign))
    }

    /// Long-time deviation `h_0 G_t(x, y) - 1`, summed without the n = 0
    /// term so the result keeps full relative precision as it decays like
    /// `exp(-t (a+b+2))`.
    pub fn deviation(&self, x: f64, y: f64) -> Result<f64> {
        Self::check_xy(x, y)?;
        let (a, b) = (self.params.alpha, self.params.beta);
        let s = a + b;
        let t = self.t;
        let n_max = truncation_order(self.params, t, 40.0)?;
        let mut px0 = 1.0f64;
        let mut py0 = 1.0f64;
        let mut px1 = 0.5 * (s + 2.0) * x + 0.5 * (a - b);
        let mut py1 = 0.5 * (s + 2.0) * y + 0.5 * (a - b);
        let mut en = (-t * (s + 2.0)).exp();
        let mut dn = en * (-2.0 * t).exp();
        let mut rn = (s + 3.0) / ((a + 1.0) * (b + 1.0));
        let q = (-2.0 * t).exp();
        let mut sum = en * px1 * py1 * rn;
        for n in 2..=n_max {
            let nf = n as f64;
            let (ax, bc, cc, den) = specfun::jacobi_rec_coeffs(nf, a, b);
            let px = ((ax * x + bc) * px1 - cc * px0) / den;
            let py = ((ax * y + bc) * py1 - cc * py0) / den;
            px0 = px1;
            px1 = px;
            py0 = py1;
            py1 = py;
            en *= dn;
            dn *= q;
            rn *= nf * (nf + s) * (2.0 * nf + 1.0 + s)
                / ((nf + a) * (nf + b) * (2.0 * nf - 1.0 + s));
            if en < 1e-320 {
                break;
            }
            sum += en * px1 * py1 * rn;
        }
        Ok(sum)
    }
}

/// One-shot `ln G_t(x, y)`; builds a throwaway evaluator.
pub fn heat_kernel_ln(params: JacobiParams, t: f64, x: f64, y: f64) -> Result<f64> {
    KernelEvaluator::new(params, t, crate::T_MIN_DEFAULT)?.ln_kernel(x, y)
}

/// One-shot `G_t(x, y)`.
pub fn heat_kernel(params: JacobiParams, t: f64, x: f64, y: f64) -> Result<f64> {
    KernelEvaluator::new(params, t, crate::T_MIN_DEFAULT)?.kernel(x, y)
}

/// Interpolated endpoint slice `theta -> ln G_t(cos theta, 1)` of an
/// ultraspherical-type kernel.
///
/// The Gaussian factor is stripped off and the remainder
/// `q = ln G + theta^2/(4t)` is interpolated in the variable
/// `u = ln(t + pi - theta)`, which absorbs the logarithmic endpoint
/// behavior at `theta = pi`; `q(u)` is then smooth enough for a global
/// Chebyshev interpolant to reach ~1e-10 with a few hundred nodes. This
/// makes the double integrals of the product formula affordable: the deep
/// kernel is evaluated only at the nodes.
pub struct EndpointProfile {
    pub params: JacobiParams,
    pub t: f64,
    u_lo: f64,
    u_hi: f64,
    nodes: Vec<f64>,
    q: Vec<f64>,
    bary: Vec<f64>,
}

impl EndpointProfile {
    /// Builds the profile from `n + 1` Chebyshev-Lobatto nodes (`n >= 8`).
    pub fn build(params: JacobiParams, t: f64, n: usize, t_min: f64) -> Result<Self> {
        if n < 8 {
            return Err(HeatkError::Domain("endpoint profile needs at least 9 nodes".into()));
        }
        let eval = KernelEvaluator::new(params, t, t_min)?;
        let u_lo = t.ln();
        let u_hi = (t + PI).ln();
        let mid = 0.5 * (u_lo + u_hi);
        let half = 0.5 * (u_hi - u_lo);
        let mut nodes = Vec::with_capacity(n + 1);
        let mut q = Vec::with_capacity(n + 1);
        let mut bary = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let u = mid - half * (PI * j as f64 / n as f64).cos();
            let theta = (t + PI - u.exp()).clamp(0.0, PI);
            let lng = eval.ln_kernel(theta.cos(), 1.0)?;
            nodes.push(u);
            q.push(lng + theta * theta / (4.0 * t));
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                w *= 0.5;
            }
            bary.push(w);
        }
        Ok(Self { params, t, u_lo, u_hi, nodes, q, bary })
    }

    /// `ln G_t(cos theta, 1)` from the interpolant, `theta` in `[0, pi]`.
    pub fn ln_kernel_at(&self, theta: f64) -> f64 {
        let theta = theta.clamp(0.0, PI);
        let u = (self.t + PI - theta).ln().clamp(self.u_lo, self.u_hi);
        // Barycentric interpolation, exact at nodes.
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&uj, &qj), &wj) in self.nodes.iter().zip(&self.q).zip(&self.bary) {
            let d = u - uj;
            if d == 0.0 {
                return qj - theta * theta / (4.0 * self.t);
            }
            let c = wj / d;
            num += c * qj;
            den += c;
        }
        num / den - theta * theta / (4.0 * self.t)
    }
}

/// `ln` of the right-hand side of the product (reduction) formula:
///
/// `G_t^{a,b}(cos phi, cos psi) = C_{a,b} *
///   iint G_{t/4}^{a+b+1/2, a+b+1/2}(u sin(phi/2) sin(psi/2)
///                                   + v cos(phi/2) cos(psi/2), 1)
///        dPi_a(u) dPi_b(v)`
///
/// with `C_{a,b} = sqrt(pi) Gamma(a+b+3/2) /
/// (2^{a+b+1} Gamma(a+1) Gamma(b+1))`. `profile` must hold the
/// ultraspherical slice at parameters `a+b+1/2` and time `t/4`.
pub fn heat_kernel_reduced_ln(
    params: JacobiParams,
    t: f64,
    phi: f64,
    psi: f64,
    profile: &EndpointProfile,
    n_nodes: usize,
) -> Result<f64> {
    let (a, b) = (params.alpha, params.beta);
    if !params.sharp_range() {
        return Err(HeatkError::Domain(
            "the product formula requires alpha, beta >= -1/2".into(),
        ));
    }
    let lam = a + b + 0.5;
    if (profile.params.alpha - lam).abs() > 1e-12
        || (profile.params.beta - lam).abs() > 1e-12
        || (profile.t - t / 4.0).abs() > 1e-12 * t
    {
        return Err(HeatkError::MissingInput(format!(
            "endpoint profile must be at parameters ({lam}, {lam}) and time {}",
            t / 4.0
        )));
    }
    if !(0.0..=PI).contains(&phi) || !(0.0..=PI).contains(&psi) {
        return Err(HeatkError::Domain(format!("angles must lie in [0, pi], got ({phi}, {psi})")));
    }
    let ru = quadrature::pi_rule(a, n_nodes)?;
    let rv = quadrature::pi_rule(b, n_nodes)?;
    let (sp, cp) = ((phi / 2.0).sin(), (phi / 2.0).cos());
    let (sq, cq) = ((psi / 2.0).sin(), (psi / 2.0).cos());
    let ln_c = 0.5 * PI.ln() + specfun::log_gamma(a + b + 1.5)?
        - (a + b + 1.0) * LN_2
        - specfun::log_gamma(a + 1.0)?
        - specfun::log_gamma(b + 1.0)?;
    let ln_int = quadrature::integrate_tensor_ln(&ru, &rv, |u, v| {
        let z = (u * sp * sq + v * cp * cq).clamp(-1.0, 1.0);
        profile.ln_kernel_at(z.acos())
    });
    Ok(ln_c + ln_int)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    /// Exact Chebyshev kernel oracle by periodization:
    /// `G_t^{-1/2,-1/2}(cos phi, 1) = (1/pi) sqrt(pi/t)
    ///  sum_k exp(-(phi - 2 pi k)^2 / 4t)`, valid to f64 accuracy for
    /// small t. Returns the log.
    fn cheb_oracle_ln(t: f64, phi: f64) -> f64 {
        let mut vals = Vec::new();
        for k in -4i32..=4 {
            let d = phi - 2.0 * PI * k as f64;
            vals.push(-d * d / (4.0 * t));
        }
        let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = vals.iter().map(|v| (v - m).exp()).sum();
        (1.0 / PI * (PI / t).sqrt()).ln() + m + s.ln()
    }

    /// Exact second-kind oracle:
    /// `G_t^{1/2,1/2}(cos phi, 1) = (2/pi) e^t / sin(phi) *
    ///  (sqrt(pi)/(4 t^{3/2})) sum_k (phi - 2 pi k) exp(-(phi-2pik)^2/4t)`
    /// (signed log-sum; for phi in (0, pi) all terms keep the sum
    /// positive at small t). Returns the log.
    fn cheb2_oracle_ln(t: f64, phi: f64) -> f64 {
        let mut terms: Vec<(f64, f64)> = Vec::new();
        for k in -4i32..=4 {
            let d = phi - 2.0 * PI * k as f64;
            terms.push((d.signum(), d.abs().ln() - d * d / (4.0 * t)));
        }
        let m = terms.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = terms.iter().map(|&(sg, v)| sg * (v - m).exp()).sum();
        (2.0 / PI).ln() + t - phi.sin().ln() + 0.5 * PI.ln() - 1.5 * t.ln() - (4.0f64).ln()
            + m
            + s.ln()
    }

    #[test]
    fn chebyshev_oracle_shallow() {
        // Shallow point: f64 path.
        let ev = KernelEvaluator::new(params(-0.5, -0.5), 0.2, 1e-4).unwrap();
        for phi in [0.0f64, 0.3, 0.8] {
            assert_relative_eq!(
                ev.ln_kernel(phi.cos(), 1.0).unwrap(),
                cheb_oracle_ln(0.2, phi),
                max_relative = 1e-10,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn chebyshev_oracle_deep() {
        // ln G ~ -1000: pure fixed-point territory. The periodized
        // Gaussian oracle is exact there.
        let t = 1e-3;
        let ev = KernelEvaluator::new(params(-0.5, -0.5), t, 1e-4).unwrap();
        for phi in [0.5, 1.0, 2.0, 3.0, PI] {
            let got = ev.ln_kernel(phi.cos(), 1.0).unwrap();
            let want = cheb_oracle_ln(t, phi);
            assert_relative_eq!(got, want, max_relative = 1e-11, epsilon = 1e-9);
        }
    }

    #[test]
    fn second_kind_oracle_deep() {
        let t = 2e-3;
        let ev = KernelEvaluator::new(params(0.5, 0.5), t, 1e-4).unwrap();
        for phi in [0.4f64, 1.3, 2.4, 3.0] {
            let got = ev.ln_kernel(phi.cos(), 1.0).unwrap();
            let want = cheb2_oracle_ln(t, phi);
            assert_relative_eq!(got, want, max_relative = 1e-11, epsilon = 1e-9);
        }
    }

    #[test]
    fn legendre_naive_sum_oracle() {
        // Independent naive summation (no shared code: explicit formulas)
        // at a moderately shallow point.
        let t = 0.05;
        let (x, y) = (0.9, 0.7);
        let mut acc = 0.0f64;
        for n in 0..400usize {
            let pn = crate::specfun::jacobi_poly(params(0.0, 0.0), n, x).unwrap();
            let qn = crate::specfun::jacobi_poly(params(0.0, 0.0), n, y).unwrap();
            let nf = n as f64;
            acc += (-t * nf * (nf + 1.0)).exp() * pn * qn * (2.0 * nf + 1.0) / 2.0;
        }
        let ev = KernelEvaluator::new(params(0.0, 0.0), t, 1e-4).unwrap();
        assert_relative_eq!(ev.kernel(x, y).unwrap(), acc, max_relative = 1e-11);
    }

    #[test]
    fn symmetry_in_arguments() {
        let ev = KernelEvaluator::new(params(1.0, 0.0), 0.02, 1e-4).unwrap();
        for (x, y) in [(0.9, -0.3), (0.1, 0.5), (-0.8, 0.99)] {
            assert_relative_eq!(
                ev.ln_kernel(x, y).unwrap(),
                ev.ln_kernel(y, x).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn semigroup_property() {
        // G_{2t}(x, y) = int G_t(x, z) G_t(z, y) w(z) dz, resolved by a
        // Gauss-Jacobi rule sized to the truncation order.
        let p = params(0.5, 0.0);
        let t = 0.25;
        let ev_t = KernelEvaluator::new(p, t, 1e-4).unwrap();
        let ev_2t = KernelEvaluator::new(p, 2.0 * t, 1e-4).unwrap();
        let rule = quadrature::gauss_jacobi_rule(p, 48).unwrap();
        for (x, y) in [(1.0, 0.2), (0.6, -0.6), (-1.0, 1.0)] {
            let conv =
                rule.integrate(|z| ev_t.kernel(x, z).unwrap() * ev_t.kernel(z, y).unwrap());
            assert_relative_eq!(conv, ev_2t.kernel(x, y).unwrap(), max_relative = 1e-9);
        }
    }

    #[test]
    fn derivative_identity_smoke() {
        // dG/dx (x, 1) = 2 (a+1) exp(-t(a+b+2)) G^{a+1,b+1}(x, 1): the
        // left side from the differentiated recurrence, the right side a
        // separate kernel evaluation.
        let (a, b) = (0.5, 0.0);
        let t = 0.15;
        let ev = KernelEvaluator::new(params(a, b), t, 1e-4).unwrap();
        let up = KernelEvaluator::new(params(a + 1.0, b + 1.0), t, 1e-4).unwrap();
        for x in [0.95, 0.4, -0.5, -0.97] {
            let (lhs_ln, lhs_sign) = ev.ln_kernel_dx(x, 1.0).unwrap();
            assert_eq!(lhs_sign, 1.0);
            let rhs_ln = (2.0 * (a + 1.0)).ln() - t * (a + b + 2.0) + up.ln_kernel(x, 1.0).unwrap();
            assert_relative_eq!(lhs_ln, rhs_ln, max_relative = 1e-9, epsilon = 1e-9);
        }
    }

    #[test]
    fn deviation_matches_direct_difference() {
        let p = params(0.0, 0.5);
        let t = 1.5;
        let ev = KernelEvaluator::new(p, t, 1e-4).unwrap();
        let h0 = crate::specfun::jacobi_norm_h(p, 0).unwrap();
        let dev = ev.deviation(0.8, -0.2).unwrap();
        let direct = h0 * ev.kernel(0.8, -0.2).unwrap() - 1.0;
        assert_relative_eq!(dev, direct, max_relative = 1e-9);
        // Long-time decay rate: dominated by the n = 1 term.
        let ev2 = KernelEvaluator::new(p, 2.0 * t, 1e-4).unwrap();
        let ratio = ev2.deviation(0.8, -0.2).unwrap() / dev;
        let lam1 = 1.0 * (1.0 + p.alpha + p.beta + 1.0);
        assert_relative_eq!(ratio.ln(), -t * lam1, max_relative = 0.05);
    }

    #[test]
    fn endpoint_profile_accuracy() {
        let p = params(1.0, 1.0);
        let t = 0.02;
        let prof = EndpointProfile::build(p, t, 220, 1e-4).unwrap();
        let ev = KernelEvaluator::new(p, t, 1e-4).unwrap();
        for i in 1..14 {
            let theta = PI * i as f64 / 14.3;
            let direct = ev.ln_kernel(theta.cos(), 1.0).unwrap();
            let interp = prof.ln_kernel_at(theta);
            assert!(
                (direct - interp).abs() < 1e-8 * direct.abs().max(1.0),
                "profile off at theta = {theta}: {direct} vs {interp}"
            );
        }
    }

    #[test]
    fn reduction_formula_smoke() {
        let p = params(0.5, 0.0);
        let t = 0.4;
        let lam = p.alpha + p.beta + 0.5;
        let prof = EndpointProfile::build(params(lam, lam), t / 4.0, 180, 1e-4).unwrap();
        let ev = KernelEvaluator::new(p, t, 1e-4).unwrap();
        for (phi, psi) in [(0.3f64, 0.3f64), (1.2, 0.7), (2.5, 2.0)] {
            let lhs = ev.ln_kernel(phi.cos(), psi.cos()).unwrap();
            let rhs = heat_kernel_reduced_ln(p, t, phi, psi, &prof, 48).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-7, epsilon = 1e-7);
        }
    }

    #[test]
    fn rejects_below_floor_and_bad_args() {
        assert!(matches!(
            KernelEvaluator::new(params(0.0, 0.0), 1e-6, 1e-4),
            Err(HeatkError::TimeBelowFloor { .. })
        ));
        let ev = KernelEvaluator::new(params(0.0, 0.0), 0.1, 1e-4).unwrap();
        assert!(ev.ln_kernel(1.2, 0.0).is_err());
    }

    #[test]
    fn truncation_order_grows_as_expected() {
        let p = params(0.0, 0.0);
        let n1 = truncation_order(p, 1e-2, 100.0).unwrap();
        let n2 = truncation_order(p, 1e-2, 400.0).unwrap();
        // Gaussian decay in n: quadrupling the drop roughly doubles n.
        assert!(n2 as f64 / n1 as f64 > 1.6 && (n2 as f64) / (n1 as f64) < 2.6);
    }
}
