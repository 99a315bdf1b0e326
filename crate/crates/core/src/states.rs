//! Closed-form coherent states: displacement (Klauder-Perelomov) states,
//! annihilation eigenstates (Gazeau-Klauder), and Robertson-Schrödinger
//! minimizing (intelligent) states.
//!
//! All three constructors return coefficients with `c_0` real and positive.

use crate::error::{domain, Error, Result};
use crate::operators::{build_matrices, energy, ladder_down_amplitude, ladder_up_amplitude, variance_pair_with, PotentialParams, StateVector};
use crate::report::{worst, VerifyReport};
use crate::specfun::{hyp0f1, ln_bessel_i, ln_gamma_ratio, log_gamma};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Displacement-state label, `|zeta| < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpLabel {
    pub zeta: C64,
    pub alpha: f64,
}

/// Annihilation-eigenstate label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GkLabel {
    pub z: C64,
    pub alpha: f64,
}

/// Intelligent-state label; `lambda` is the squeezing parameter, `lambda != -1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsLabel {
    pub z: C64,
    pub lambda: C64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CsLabel {
    #[serde(rename = "KP")]
    Kp(KpLabel),
    #[serde(rename = "GK")]
    Gk(GkLabel),
    #[serde(rename = "IS")]
    Is(IsLabel),
}

impl KpLabel {
    pub fn new(zeta: C64, alpha: f64) -> Result<Self> {
        let l = KpLabel { zeta, alpha };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta.norm() < 1.0) {
            return domain(format!("KP label needs |zeta| < 1, got |zeta| = {}", self.zeta.norm()));
        }
        if !self.alpha.is_finite() {
            return domain("alpha must be finite");
        }
        Ok(())
    }
}

impl IsLabel {
    pub fn validate(&self) -> Result<()> {
        if self.lambda == C64::new(-1.0, 0.0) {
            return domain("intelligent states need lambda != -1");
        }
        if !(self.z.is_finite() && self.lambda.is_finite() && self.alpha.is_finite()) {
            return domain("intelligent-state label must be finite");
        }
        Ok(())
    }
}

impl CsLabel {
    pub fn alpha(&self) -> f64 {
        match self {
            CsLabel::Kp(l) => l.alpha,
            CsLabel::Gk(l) => l.alpha,
            CsLabel::Is(l) => l.alpha,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            CsLabel::Kp(_) => "KP",
            CsLabel::Gk(_) => "GK",
            CsLabel::Is(_) => "IS",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CsLabel::Kp(l) => l.validate(),
            CsLabel::Gk(l) if !(l.z.is_finite() && l.alpha.is_finite()) => domain("GK label must be finite"),
            CsLabel::Gk(_) => Ok(()),
            CsLabel::Is(l) => l.validate(),
        }
    }
}

/// Label-level time evolution: `alpha -> alpha + t`, everything else kept.
pub fn evolve(label: &CsLabel, t: f64) -> CsLabel {
    match *label {
        CsLabel::Kp(l) => CsLabel::Kp(KpLabel { alpha: l.alpha + t, ..l }),
        CsLabel::Gk(l) => CsLabel::Gk(GkLabel { alpha: l.alpha + t, ..l }),
        CsLabel::Is(l) => CsLabel::Is(IsLabel { alpha: l.alpha + t, ..l }),
    }
}

/// Builds the state of any family.
pub fn construct(params: &PotentialParams, label: &CsLabel, dim: usize) -> Result<StateVector> {
    match label {
        CsLabel::Kp(l) => kp_coefficients(params, l, dim),
        CsLabel::Gk(l) => gk_coefficients(params, l, dim),
        CsLabel::Is(l) => is_coefficients(params, l, dim),
    }
}

fn phase(arg: f64) -> C64 {
    C64::from_polar(1.0, arg)
}

/// `c_n = (1-|zeta|^2)^{(s+1)/2} zeta^n sqrt(Gamma(n+1+s)/(n! Gamma(1+s))) e^{-i alpha e_n}`.
pub fn kp_coefficients(params: &PotentialParams, label: &KpLabel, dim: usize) -> Result<StateVector> {
    label.validate()?;
    if dim == 0 {
        return domain("dim must be at least 1");
    }
    let p = params.with_alpha(label.alpha);
    let s = p.s();
    let rho = label.zeta.norm();
    let theta = label.zeta.arg();
    let mut amp = (1.0 - rho * rho).powf(0.5 * (s + 1.0));
    let mut coeffs = Vec::with_capacity(dim);
    for n in 0..dim {
        coeffs.push(amp * phase(n as f64 * theta - label.alpha * energy(&p, n)));
        amp *= rho * ((n as f64 + 1.0 + s) / (n as f64 + 1.0)).sqrt();
    }
    let tail = kp_tail_bound(s, rho, dim)?;
    StateVector::new(p, coeffs, tail)
}

/// Geometric majorant of `(1-rho^2)^{s+1} sum_{n>=D} rho^{2n} Gamma(n+1+s)/(n! Gamma(1+s))`.
fn kp_tail_bound(s: f64, rho: f64, dim: usize) -> Result<f64> {
    if rho == 0.0 {
        return Ok(0.0);
    }
    let d = dim as f64;
    let ratio = rho * rho * (d + 1.0 + s) / (d + 1.0);
    if ratio >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let ln_first = (s + 1.0) * (1.0 - rho * rho).ln() + 2.0 * d * rho.ln() + ln_gamma_ratio(dim, s)?;
    Ok(ln_first.exp() / (1.0 - ratio))
}

/// `zeta = z tanh|z| / |z|`, with `zeta(0) = 0`.
pub fn zeta_from_z(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    z * (r.tanh() / r)
}

/// Displacement state `exp(z a+ - conj(z) a-) |psi_0>` in closed form.
pub fn kp_from_z(params: &PotentialParams, z: C64, alpha: f64, dim: usize) -> Result<StateVector> {
    if !z.is_finite() {
        return domain("z must be finite");
    }
    kp_coefficients(params, &KpLabel { zeta: zeta_from_z(z), alpha }, dim)
}

/// A value together with the truncation estimate it inherits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Overlap {
    pub value: C64,
    pub tail_bound: f64,
}

impl Overlap {
    pub fn under_truncated(&self) -> bool {
        !(self.tail_bound <= crate::operators::TAIL_WARN)
    }
}

/// `<zeta, alpha | zeta', alpha'>` from the coefficient vectors.
pub fn kp_kernel(params: &PotentialParams, bra: &KpLabel, ket: &KpLabel, dim: usize) -> Result<Overlap> {
    let a = kp_coefficients(params, bra, dim)?;
    let b = kp_coefficients(params, ket, dim)?;
    Ok(Overlap { value: a.inner(&b)?, tail_bound: a.tail_bound.max(b.tail_bound) })
}

/// `f(zeta, conj zeta) = <zeta, alpha | f>`, the function that reconstructs
/// `|f>` against the displacement-state measure.
pub fn analytic_repr(params: &PotentialParams, f: &StateVector, label: &KpLabel) -> Result<C64> {
    let cs = kp_coefficients(params, label, f.dim())?;
    cs.inner(f)
}

/// `c_n = N(|z|) z^n e^{-i alpha e_n} / sqrt(n! Gamma(n+s+1))`, `N^2 = |z|^s / I_s(2|z|)`.
pub fn gk_coefficients(params: &PotentialParams, label: &GkLabel, dim: usize) -> Result<StateVector> {
    if !(label.z.is_finite() && label.alpha.is_finite()) {
        return domain("GK label must be finite");
    }
    if dim == 0 {
        return domain("dim must be at least 1");
    }
    let p = params.with_alpha(label.alpha);
    let s = p.s();
    let r = label.z.norm();
    let mut coeffs = vec![C64::new(0.0, 0.0); dim];
    if r == 0.0 {
        coeffs[0] = C64::new(1.0, 0.0);
        return StateVector::new(p, coeffs, 0.0);
    }
    let theta = label.z.arg();
    let ln_norm2 = s * r.ln() - ln_bessel_i(s, 2.0 * r)?;
    for (n, c) in coeffs.iter_mut().enumerate() {
        let nf = n as f64;
        let ln_mod = 0.5 * ln_norm2 + nf * r.ln() - 0.5 * (log_gamma(nf + 1.0)? + log_gamma(nf + s + 1.0)?);
        *c = C64::from_polar(ln_mod.exp(), nf * theta - label.alpha * energy(&p, n));
    }
    let d = dim as f64;
    let ratio = r * r / ((d + 1.0) * (d + 1.0 + s));
    let tail = if ratio < 1.0 {
        let ln_first = ln_norm2 + 2.0 * d * r.ln() - log_gamma(d + 1.0)? - log_gamma(d + s + 1.0)?;
        ln_first.exp() / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    StateVector::new(p, coeffs, tail)
}

/// `|| a- |z,alpha> - z |z,alpha> ||` over rows `0..dim-1`, the rows that do
/// not depend on the missing level `dim`.
pub fn gk_apply_annihilation_residual(params: &PotentialParams, label: &GkLabel, dim: usize) -> Result<f64> {
    let state = gk_coefficients(params, label, dim)?;
    annihilation_residual(&state, label.z)
}

pub(crate) fn annihilation_residual(state: &StateVector, z: C64) -> Result<f64> {
    let dim = state.dim();
    if dim < 2 {
        return domain("residual needs dim >= 2");
    }
    let ops = build_matrices(&state.params, dim)?;
    let applied = ops.a_minus.apply(state)?;
    Ok((0..dim - 1).map(|n| (applied[n] - z * state.coeffs[n]).norm_sqr()).sum::<f64>().sqrt())
}

/// Closed form of `<G>` on an annihilation eigenstate of modulus `zmod`.
pub fn gk_mean_g(params: &PotentialParams, zmod: f64) -> Result<f64> {
    if !(zmod >= 0.0) || !zmod.is_finite() {
        return domain(format!("zmod must be >= 0, got {zmod}"));
    }
    let b = 1.0 + params.s();
    let x = zmod * zmod;
    Ok(b + 2.0 * x / b * hyp0f1(b + 1.0, x)? / hyp0f1(b, x)?)
}

/// Solves `[(1-lambda) a+ + (1+lambda) a-] |psi> = 2z |psi>` level by level:
///
/// ```text
/// (1-lambda) u_{n-1} c_{n-1} + (1+lambda) d_{n+1} c_{n+1} = 2 z c_n
/// ```
///
/// seeded with `c_0 = 1`, then normalized. The tail bound is an estimate from
/// the two-step decay of the last retained coefficients; it is infinite when
/// they do not decay.
pub fn is_coefficients(params: &PotentialParams, label: &IsLabel, dim: usize) -> Result<StateVector> {
    label.validate()?;
    if dim < 2 {
        return domain(format!("intelligent states need dim >= 2, got {dim}"));
    }
    let p = params.with_alpha(label.alpha);
    let one = C64::new(1.0, 0.0);
    let up_coef = one - label.lambda;
    let down_coef = one + label.lambda;
    let mut c = vec![C64::new(0.0, 0.0); dim];
    c[0] = one;
    for n in 0..dim - 1 {
        let lower = if n >= 1 { up_coef * ladder_up_amplitude(&p, n - 1) * c[n - 1] } else { C64::new(0.0, 0.0) };
        let next = (2.0 * label.z * c[n] - lower) / (down_coef * ladder_down_amplitude(&p, n + 1));
        if !next.is_finite() {
            return Err(Error::Divergence { n: n + 1 });
        }
        c[n + 1] = next;
    }
    let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>();
    if !norm.is_finite() {
        return Err(Error::Divergence { n: dim - 1 });
    }
    let scale = 1.0 / norm.sqrt();
    c.iter_mut().for_each(|v| *v *= scale);
    let tail = is_tail_estimate(&c);
    StateVector::new(p, c, tail)
}

fn is_tail_estimate(c: &[C64]) -> f64 {
    let m: Vec<f64> = c.iter().map(|v| v.norm_sqr()).collect();
    let d = m.len();
    if d < 4 {
        return if m[d - 1] == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let last = m[d - 1] + m[d - 2];
    if last == 0.0 {
        return 0.0;
    }
    let ratio = |a: f64, b: f64| if b == 0.0 { if a == 0.0 { 0.0 } else { f64::INFINITY } } else { a / b };
    let q = ratio(m[d - 1], m[d - 3]).max(ratio(m[d - 2], m[d - 4]));
    if q < 1.0 {
        last * q / (1.0 - q)
    } else {
        f64::INFINITY
    }
}

/// Checks the minimization relations
/// `dW2 = |lambda| Delta`, `dP2 = Delta / |lambda|`, `dW2 dP2 = (<G>^2 + <F>^2)/4`
/// on the constructed intelligent state. Passes iff every residual is within `1e-8`.
pub fn is_minimization_report(params: &PotentialParams, label: &IsLabel, dim: usize) -> Result<VerifyReport> {
    const TOL: f64 = 1e-8;
    let state = is_coefficients(params, label, dim)?;
    let ops = build_matrices(&state.params, dim)?;
    let v = variance_pair_with(&state, &ops)?;
    let lam = label.lambda.norm();
    let delta = v.delta();
    let res_w = (v.dw2 - lam * delta).abs();
    let res_p = (v.dp2 - delta / lam).abs();
    let res_rs = v.rs_residual().abs();
    let max_dev = worst(worst(res_w, res_p), res_rs);
    Ok(VerifyReport::new("intelligent-state", max_dev, TOL)
        .with_detail("dW2", v.dw2)
        .with_detail("dP2", v.dp2)
        .with_detail("delta", delta)
        .with_detail("mean_G", v.mean_g)
        .with_detail("mean_F", v.mean_f)
        .with_detail("residual_dW2", res_w)
        .with_detail("residual_dP2", res_p)
        .with_detail("residual_rs", res_rs)
        .with_detail("tail_bound", state.tail_bound))
}
