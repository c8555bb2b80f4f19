//! The Carleman weight
//! `zeta = { f_p / ((1+eps u_p)(1-eps v_p)) * exp[ 2b sqrt(f_p) / ((1+eps u_p)(1-eps v_p))^{1/2} ] }^{2a}`
//! with the denominator identity `(1+eps u_p)(1-eps v_p) = 1 - eps r_p + eps^2 f_p`.
//!
//! All arithmetic is carried in log space: the `2a` power underflows and
//! overflows doubles long before the admissible parameter range is exhausted,
//! so products with the weight are assembled as `exp(log zeta + log rest)`
//! with a single final exponentiation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::fmath;
use crate::geometry::{self, PointRef, ReferencePoint, Signature};
use crate::Result;

/// Default factor encoding each `<<` of the admissible regime.
pub const DEFAULT_KAPPA: f64 = 0.1;
/// Default ratio of the interior-estimate requirement `a >> R`.
pub const INTERIOR_A_FACTOR: f64 = 10.0;

/// Parameters of the weight and the estimates built on it.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanParams {
    /// Reference point `p`.
    pub p: ReferencePoint,
    /// Power parameter; admissible from `(m+n)^2`.
    pub a: f64,
    /// Exponential strength; admissible up to `kappa2 / R`.
    pub b: f64,
    /// Perturbation; admissible up to `kappa1 * b`.
    pub eps: f64,
    /// Spatial reach bound `R` with `U ∩ D_p ⊆ { r_p < R }`.
    pub r_bound: f64,
    /// When set, `eps = delta^2 / R` and `b = delta / R` were derived from it.
    pub delta: Option<f64>,
    /// Cone-collar width for first-order coefficients (units of `f_p`).
    pub mu: f64,
    /// Spatial thickening width of the interior observation region.
    pub sigma: f64,
    /// Factor giving `eps <= kappa1 * b`.
    pub kappa1: f64,
    /// Factor giving `b <= kappa2 / R`.
    pub kappa2: f64,
}

impl CarlemanParams {
    /// Explicit `(a, b, eps)` with defaults `mu = 0.05 R^2`, `sigma = 0.1 R`.
    pub fn new(p: ReferencePoint, a: f64, b: f64, eps: f64, r_bound: f64) -> Self {
        Self {
            p,
            a,
            b,
            eps,
            r_bound,
            delta: None,
            mu: 0.05 * r_bound * r_bound,
            sigma: 0.1 * r_bound,
            kappa1: DEFAULT_KAPPA,
            kappa2: DEFAULT_KAPPA,
        }
    }

    /// Derive `eps = delta^2 / R` and `b = delta / R` from a single `delta`.
    pub fn from_delta(p: ReferencePoint, a: f64, delta: f64, r_bound: f64) -> Self {
        let mut params = Self::new(p, a, delta / r_bound, delta * delta / r_bound, r_bound);
        params.delta = Some(delta);
        params
    }

    /// Admissibility diagnostics; an empty list means admissible.
    pub fn validate(&self, sig: Signature) -> Vec<String> {
        let mut out = Vec::new();
        let a_min = (sig.dim() * sig.dim()) as f64;
        if self.a < a_min {
            out.push(format!("a >= {a_min} required (a = {})", self.a));
        }
        if self.r_bound <= 0.0 {
            out.push(format!("R > 0 required (R = {})", self.r_bound));
        }
        if self.b < 0.0 {
            out.push(format!("b >= 0 required (b = {})", self.b));
        }
        if self.eps < 0.0 {
            out.push(format!("eps >= 0 required (eps = {})", self.eps));
        }
        // Boundary-of-regime configurations are admissible; the comparisons
        // carry a relative slack so derived quantities that differ by an ulp
        // (e.g. delta^2/R vs kappa1 * delta/R) are not rejected.
        let slack = 1.0 + 1e-12;
        if self.eps > self.kappa1 * self.b * slack {
            out.push(format!(
                "eps <= {} * b required (eps = {}, b = {})",
                self.kappa1, self.eps, self.b
            ));
        }
        if self.b > self.kappa2 / self.r_bound * slack {
            out.push(format!(
                "b <= {} / R required (b = {}, R = {})",
                self.kappa2, self.b, self.r_bound
            ));
        }
        if self.sigma <= 0.0 {
            out.push(format!("sigma > 0 required (sigma = {})", self.sigma));
        }
        if self.mu < 0.0 {
            out.push(format!("mu >= 0 required (mu = {})", self.mu));
        }
        if let Some(delta) = self.delta {
            let eps_expected = delta * delta / self.r_bound;
            let b_expected = delta / self.r_bound;
            if rel_diff(self.eps, eps_expected) > 1e-12 || rel_diff(self.b, b_expected) > 1e-12 {
                out.push(format!(
                    "delta-derived values out of sync: expected eps = {eps_expected}, b = {b_expected}"
                ));
            }
        }
        out
    }

    /// Diagnostics for the interior estimate, which additionally needs
    /// `a >= 10 R`.
    pub fn validate_interior(&self, sig: Signature) -> Vec<String> {
        let mut out = self.validate(sig);
        if self.a < INTERIOR_A_FACTOR * self.r_bound {
            out.push(format!(
                "a >= {} * R required for the interior estimate (a = {}, R = {})",
                INTERIOR_A_FACTOR, self.a, self.r_bound
            ));
        }
        out
    }

    /// Hard error unless admissible.
    pub fn require_admissible(&self, sig: Signature) -> Result<()> {
        let issues = self.validate(sig);
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Inadmissible(issues.join("; ")))
        }
    }
}

#[inline]
fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = fmath::abs(a).max(fmath::abs(b)).max(1e-300);
    fmath::abs(a - b) / scale
}

/// Weight evaluation result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightValue {
    /// `log zeta`; `-inf` on and inside the cone.
    pub log_zeta: f64,
    /// `zeta = exp(log_zeta)`; may underflow to 0.
    pub zeta: f64,
    /// The bracketed quantity before the `2a` power.
    pub base: f64,
}

/// Evaluate the weight at `q`. Vanishes (log `-inf`) for `f_p <= 0`.
pub fn eval_zeta(q: PointRef<'_>, params: &CarlemanParams, sig: Signature) -> Result<WeightValue> {
    let frame = geometry::to_null_frame(q, &params.p, sig)?;
    eval_zeta_frame(&frame, params)
}

/// Evaluate from a precomputed null frame (the bulk quadrature path).
pub fn eval_zeta_frame(
    frame: &geometry::NullFrame,
    params: &CarlemanParams,
) -> Result<WeightValue> {
    if frame.f <= 0.0 {
        return Ok(WeightValue {
            log_zeta: f64::NEG_INFINITY,
            zeta: 0.0,
            base: 0.0,
        });
    }
    let denom = weight_denominator(frame, params.eps)?;
    let phi = frame.f / denom;
    let log_base = fmath::ln(phi) + 2.0 * params.b * fmath::sqrt(phi);
    let log_zeta = 2.0 * params.a * log_base;
    Ok(WeightValue {
        log_zeta,
        zeta: fmath::exp(log_zeta),
        base: fmath::exp(log_base),
    })
}

/// `1 - eps r_p + eps^2 f_p`, guarded against the nonpositive case.
pub fn weight_denominator(frame: &geometry::NullFrame, eps: f64) -> Result<f64> {
    let denom = 1.0 - eps * frame.r + eps * eps * frame.f;
    if denom <= 0.0 {
        return Err(Error::WeightDenominator { value: denom });
    }
    Ok(denom)
}

/// Cartesian gradient of `log zeta` at `q` (length `m+n`, time block first).
///
/// With `phi = f_p / (1 - eps r_p + eps^2 f_p)` the factored form is
/// `grad log zeta = 2a (1/phi + b/sqrt(phi)) grad phi`.
pub fn grad_log_zeta(q: PointRef<'_>, params: &CarlemanParams, sig: Signature) -> Result<Vec<f64>> {
    let frame = geometry::to_null_frame(q, &params.p, sig)?;
    if frame.f <= 0.0 {
        return Err(Error::GradientOnCone { f_p: frame.f });
    }
    let denom = weight_denominator(&frame, params.eps)?;
    let phi = frame.f / denom;
    let factor = 2.0 * params.a * (1.0 / phi + params.b / fmath::sqrt(phi));

    let (gt_f, gx_f) = geometry::grad_f(q, &params.p, sig)?;
    let d = sig.dim();
    let mut grad = Vec::with_capacity(d);
    let eps = params.eps;
    // grad phi = grad f / D - (f / D^2) grad D, grad D = -eps grad r + eps^2 grad f,
    // grad r = (0, x_p / r_p).
    for gf in gt_f.iter() {
        let g_d = eps * eps * gf;
        grad.push(factor * (gf / denom - frame.f / (denom * denom) * g_d));
    }
    for (j, gf) in gx_f.iter().enumerate() {
        let gr = (q.x[j] - params.p.x[j]) / frame.r;
        let g_d = -eps * gr + eps * eps * gf;
        grad.push(factor * (gf / denom - frame.f / (denom * denom) * g_d));
    }
    Ok(grad)
}

/// Cartesian gradient of `zeta` itself; underflows with the weight.
pub fn grad_zeta(q: PointRef<'_>, params: &CarlemanParams, sig: Signature) -> Result<Vec<f64>> {
    let w = eval_zeta(q, params, sig)?;
    if w.base == 0.0 {
        return Err(Error::GradientOnCone { f_p: 0.0 });
    }
    let mut grad = grad_log_zeta(q, params, sig)?;
    for g in &mut grad {
        *g *= w.zeta;
    }
    Ok(grad)
}

/// `max_alpha |grad_alpha zeta| * f_p / (a R zeta)`, evaluated without ever
/// forming `zeta`; the numerical witness of the derivative bound.
pub fn derivative_bound_ratio(
    q: PointRef<'_>,
    params: &CarlemanParams,
    sig: Signature,
) -> Result<f64> {
    let frame = geometry::to_null_frame(q, &params.p, sig)?;
    if frame.f <= 0.0 {
        return Err(Error::GradientOnCone { f_p: frame.f });
    }
    let grad = grad_log_zeta(q, params, sig)?;
    let max_component = grad.iter().fold(0.0f64, |m, g| m.max(fmath::abs(*g)));
    Ok(max_component * frame.f / (params.a * params.r_bound))
}
