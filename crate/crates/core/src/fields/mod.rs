//! Analytic test functions with exact derivatives, lower-order coefficient
//! fields with the cone-collar vanishing property, and the ultrahyperbolic
//! operator applied to them.
//!
//! Derivatives inside integrands are always closed-form (jet arithmetic);
//! finite differences appear only as test oracles.

pub mod jet;
mod suite;

pub use jet::Jet2;
pub use suite::{generate_suite, SuiteSpec};

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{DomainModel, Polynomial, SpatialShape};
use crate::error::Error;
use crate::fmath;
use crate::geometry::{self, PointRef, ReferencePoint, Signature};
use crate::Result;

/// Family tag carried by every field, echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldFamily {
    Bump,
    PlanewaveBump,
    TrigSum,
    Custom,
}

impl FieldFamily {
    pub fn name(&self) -> &'static str {
        match self {
            FieldFamily::Bump => "bump",
            FieldFamily::PlanewaveBump => "planewave_bump",
            FieldFamily::TrigSum => "trig_sum",
            FieldFamily::Custom => "custom",
        }
    }
}

/// Monomial `coef * prod t_i^{a_i} * prod x_j^{b_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub t_exp: Vec<u8>,
    pub x_exp: Vec<u8>,
}

/// One oscillatory term `amp * sin(l . t + k . x + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub amp: f64,
    pub freq_t: Vec<f64>,
    pub freq_x: Vec<f64>,
    pub phase: f64,
}

/// Factor vanishing identically on the spatial boundary for all times.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryFactor {
    /// `rho^2 - |x - c|^2`.
    Ball { center: Vec<f64>, radius: f64 },
    /// `prod_j (x_j - lo_j)(hi_j - x_j)`, rescaled to 1 at the centre.
    BoxFaces { lo: Vec<f64>, hi: Vec<f64> },
    /// `rho(t1)^2 - |x - c(t1)|^2`.
    MovingBall {
        center: Vec<Polynomial>,
        radius: Polynomial,
    },
}

impl BoundaryFactor {
    /// The natural vanishing factor of a domain's spatial boundary.
    pub fn for_domain(dom: &DomainModel) -> Self {
        match dom.shape() {
            SpatialShape::Ball { center, radius } => BoundaryFactor::Ball {
                center: center.clone(),
                radius: *radius,
            },
            SpatialShape::Box { lo, hi } => BoundaryFactor::BoxFaces {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            SpatialShape::MovingBall { center, radius } => BoundaryFactor::MovingBall {
                center: center.clone(),
                radius: radius.clone(),
            },
        }
    }

    fn eval(&self, q: PointRef<'_>, sig: Signature) -> Jet2 {
        let d = sig.dim();
        let m = sig.m();
        match self {
            BoundaryFactor::Ball { center, radius } => {
                let mut acc = Jet2::constant(radius * radius, d);
                for (j, c) in center.iter().enumerate() {
                    let xj = Jet2::coordinate(m + j, q.x[j], d);
                    let shifted = xj.sub(&Jet2::constant(*c, d));
                    acc = acc.sub(&shifted.mul(&shifted));
                }
                acc
            }
            BoundaryFactor::BoxFaces { lo, hi } => {
                let mut acc = Jet2::constant(1.0, d);
                for j in 0..sig.n() {
                    let half = 0.5 * (hi[j] - lo[j]);
                    let xj = Jet2::coordinate(m + j, q.x[j], d);
                    let a = xj.sub(&Jet2::constant(lo[j], d));
                    let b = Jet2::constant(hi[j], d).sub(&xj);
                    acc = acc.mul(&a.mul(&b).scale(1.0 / (half * half)));
                }
                acc
            }
            BoundaryFactor::MovingBall { center, radius } => {
                let t1 = Jet2::coordinate(0, q.t[0], d);
                let rho = poly_jet(radius, &t1);
                let mut acc = rho.mul(&rho);
                for (j, c) in center.iter().enumerate() {
                    let cj = poly_jet(c, &t1);
                    let xj = Jet2::coordinate(m + j, q.x[j], d);
                    let shifted = xj.sub(&cj);
                    acc = acc.sub(&shifted.mul(&shifted));
                }
                acc
            }
        }
    }
}

/// Univariate polynomial applied to a jet.
fn poly_jet(p: &Polynomial, u: &Jet2) -> Jet2 {
    let t = u.v;
    u.compose(p.eval(t), p.deriv(t), p.deriv2(t))
}

/// A scalar test function with exact value, gradient, and Hessian.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticField {
    /// Sum of monomials in `(t, x)`.
    Poly {
        sig: Signature,
        monomials: Vec<Monomial>,
    },
    /// `amp * sin(l . t + k . x + phase)`; does not vanish on boundaries.
    PlaneWave { sig: Signature, term: TrigTerm },
    /// Boundary factor times a polynomial.
    Bump {
        sig: Signature,
        factor: BoundaryFactor,
        monomials: Vec<Monomial>,
    },
    /// Boundary factor times one oscillatory term.
    PlanewaveBump {
        sig: Signature,
        factor: BoundaryFactor,
        term: TrigTerm,
    },
    /// Boundary factor times a sum of oscillatory terms.
    TrigSum {
        sig: Signature,
        factor: BoundaryFactor,
        terms: Vec<TrigTerm>,
    },
    /// `max(rho^2 - |x - c|^2, 0)^3` times a polynomial: C^2 and compactly
    /// supported in the spatial ball, hence zero near the domain boundary.
    CompactBump {
        sig: Signature,
        center: Vec<f64>,
        radius: f64,
        monomials: Vec<Monomial>,
    },
    /// A field multiplied by a constant.
    Scaled {
        inner: Box<AnalyticField>,
        factor: f64,
    },
}

impl AnalyticField {
    pub fn sig(&self) -> Signature {
        match self {
            AnalyticField::Poly { sig, .. }
            | AnalyticField::PlaneWave { sig, .. }
            | AnalyticField::Bump { sig, .. }
            | AnalyticField::PlanewaveBump { sig, .. }
            | AnalyticField::TrigSum { sig, .. }
            | AnalyticField::CompactBump { sig, .. } => *sig,
            AnalyticField::Scaled { inner, .. } => inner.sig(),
        }
    }

    pub fn family(&self) -> FieldFamily {
        match self {
            AnalyticField::Bump { .. } => FieldFamily::Bump,
            AnalyticField::PlanewaveBump { .. } => FieldFamily::PlanewaveBump,
            AnalyticField::TrigSum { .. } => FieldFamily::TrigSum,
            AnalyticField::Scaled { inner, .. } => inner.family(),
            _ => FieldFamily::Custom,
        }
    }

    /// Constant field.
    pub fn constant(c: f64, sig: Signature) -> Self {
        AnalyticField::Poly {
            sig,
            monomials: vec![Monomial {
                coef: c,
                t_exp: vec![0; sig.m()],
                x_exp: vec![0; sig.n()],
            }],
        }
    }

    /// `|x|^2` (for the operator identity `box |x|^2 = 2n`).
    pub fn square_norm_x(sig: Signature) -> Self {
        let monomials = (0..sig.n())
            .map(|j| {
                let mut x_exp = vec![0u8; sig.n()];
                x_exp[j] = 2;
                Monomial {
                    coef: 1.0,
                    t_exp: vec![0; sig.m()],
                    x_exp,
                }
            })
            .collect();
        AnalyticField::Poly { sig, monomials }
    }

    /// `|t|^2` (for the operator identity `box |t|^2 = -2m`).
    pub fn square_norm_t(sig: Signature) -> Self {
        let monomials = (0..sig.m())
            .map(|i| {
                let mut t_exp = vec![0u8; sig.m()];
                t_exp[i] = 2;
                Monomial {
                    coef: 1.0,
                    t_exp,
                    x_exp: vec![0; sig.n()],
                }
            })
            .collect();
        AnalyticField::Poly { sig, monomials }
    }

    /// Multiply the field by a constant.
    pub fn scaled(self, factor: f64) -> Self {
        AnalyticField::Scaled {
            inner: Box::new(self),
            factor,
        }
    }

    /// Value, gradient, and Hessian at `q`.
    pub fn eval(&self, q: PointRef<'_>) -> Jet2 {
        let sig = self.sig();
        let d = sig.dim();
        match self {
            AnalyticField::Poly { monomials, .. } => eval_monomials(monomials, q, sig),
            AnalyticField::PlaneWave { term, .. } => eval_trig(term, q, sig),
            AnalyticField::Bump {
                factor, monomials, ..
            } => factor.eval(q, sig).mul(&eval_monomials(monomials, q, sig)),
            AnalyticField::PlanewaveBump { factor, term, .. } => {
                factor.eval(q, sig).mul(&eval_trig(term, q, sig))
            }
            AnalyticField::TrigSum { factor, terms, .. } => {
                let mut osc = Jet2::zero(d);
                for term in terms {
                    osc = osc.add(&eval_trig(term, q, sig));
                }
                factor.eval(q, sig).mul(&osc)
            }
            AnalyticField::CompactBump {
                center,
                radius,
                monomials,
                ..
            } => {
                let m = sig.m();
                let mut s = Jet2::constant(radius * radius, d);
                for (j, c) in center.iter().enumerate() {
                    let xj = Jet2::coordinate(m + j, q.x[j], d);
                    let shifted = xj.sub(&Jet2::constant(*c, d));
                    s = s.sub(&shifted.mul(&shifted));
                }
                if s.v <= 0.0 {
                    Jet2::zero(d)
                } else {
                    s.powi(3).mul(&eval_monomials(monomials, q, sig))
                }
            }
            AnalyticField::Scaled { inner, factor } => inner.eval(q).scale(*factor),
        }
    }

    /// Value only.
    pub fn value(&self, q: PointRef<'_>) -> f64 {
        self.eval(q).v
    }
}

fn eval_monomials(monomials: &[Monomial], q: PointRef<'_>, sig: Signature) -> Jet2 {
    let d = sig.dim();
    let m = sig.m();
    let mut acc = Jet2::zero(d);
    for mono in monomials {
        let mut term = Jet2::constant(mono.coef, d);
        for (i, &e) in mono.t_exp.iter().enumerate() {
            if e > 0 {
                term = term.mul(&Jet2::coordinate(i, q.t[i], d).powi(e as u32));
            }
        }
        for (j, &e) in mono.x_exp.iter().enumerate() {
            if e > 0 {
                term = term.mul(&Jet2::coordinate(m + j, q.x[j], d).powi(e as u32));
            }
        }
        acc = acc.add(&term);
    }
    acc
}

fn eval_trig(term: &TrigTerm, q: PointRef<'_>, sig: Signature) -> Jet2 {
    let d = sig.dim();
    let mut coeffs = Vec::with_capacity(d);
    coeffs.extend_from_slice(&term.freq_t);
    coeffs.extend_from_slice(&term.freq_x);
    let mut point = Vec::with_capacity(d);
    point.extend_from_slice(q.t);
    point.extend_from_slice(q.x);
    Jet2::linear(&coeffs, &point, term.phase)
        .sin()
        .scale(term.amp)
}

/// The ultrahyperbolic operator applied to a field at `q`:
/// `-trace(H_tt) + trace(H_xx)`.
pub fn box_op(field: &AnalyticField, q: PointRef<'_>, sig: Signature) -> Result<f64> {
    q.check(sig)?;
    Ok(box_of_jet(&field.eval(q), sig))
}

/// Operator trace from an already-evaluated jet.
pub fn box_of_jet(jet: &Jet2, sig: Signature) -> f64 {
    let mut acc = 0.0;
    for i in 0..sig.m() {
        acc -= jet.hess(i, i);
    }
    for j in sig.m()..sig.dim() {
        acc += jet.hess(j, j);
    }
    acc
}

/// Lower-order coefficients: potential `V`, first-order field `X` with the
/// cone-collar vanishing property, and a source `F`.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub v: AnalyticField,
    /// Pre-collar components of `X` (length m+n, time block first).
    pub x_tilde: Vec<AnalyticField>,
    pub f_src: AnalyticField,
    /// Collar width in units of `f_p`; `X = chi(f_p) * X~` vanishes for
    /// `f_p <= mu` and is untouched for `f_p >= 2 mu`.
    pub mu: f64,
    pub p: ReferencePoint,
}

impl CoefficientSet {
    /// Build collar coefficients about `p`; `mu` must be positive.
    pub fn with_collar(
        p: ReferencePoint,
        mu: f64,
        v: AnalyticField,
        x_tilde: Vec<AnalyticField>,
        sig: Signature,
    ) -> Result<Self> {
        if mu <= 0.0 {
            return Err(Error::Inadmissible(String::from(
                "collar width mu must be positive",
            )));
        }
        if x_tilde.len() != sig.dim() {
            return Err(Error::DimensionMismatch {
                name: "x_tilde",
                expected: sig.dim(),
                got: x_tilde.len(),
            });
        }
        Ok(Self {
            v,
            x_tilde,
            f_src: AnalyticField::constant(0.0, sig),
            mu,
            p,
        })
    }

    /// Zero potential and first-order term.
    pub fn none(p: ReferencePoint, sig: Signature) -> Self {
        Self {
            v: AnalyticField::constant(0.0, sig),
            x_tilde: (0..sig.dim())
                .map(|_| AnalyticField::constant(0.0, sig))
                .collect(),
            f_src: AnalyticField::constant(0.0, sig),
            mu: 0.0,
            p,
        }
    }

    /// C^2 polynomial ramp: 0 for `s <= mu`, 1 for `s >= 2 mu`.
    pub fn chi(&self, f_p: f64) -> f64 {
        if self.mu <= 0.0 {
            return 1.0;
        }
        if f_p <= self.mu {
            0.0
        } else if f_p >= 2.0 * self.mu {
            1.0
        } else {
            let w = (f_p - self.mu) / self.mu;
            w * w * w * (10.0 - 15.0 * w + 6.0 * w * w)
        }
    }

    /// Values of `X = chi(f_p) X~` at `q` (length m+n).
    pub fn x_at(&self, q: PointRef<'_>, sig: Signature) -> Result<Vec<f64>> {
        let frame = geometry::to_null_frame(q, &self.p, sig)?;
        let chi = self.chi(frame.f);
        Ok(self
            .x_tilde
            .iter()
            .map(|c| if chi == 0.0 { 0.0 } else { chi * c.value(q) })
            .collect())
    }
}

/// Full operator `box z + X . grad z + V z` at `q`.
pub fn full_op(
    field: &AnalyticField,
    coeffs: &CoefficientSet,
    q: PointRef<'_>,
    sig: Signature,
) -> Result<f64> {
    let jet = field.eval(q);
    let mut acc = box_of_jet(&jet, sig);
    let x = coeffs.x_at(q, sig)?;
    for (xa, ga) in x.iter().zip(&jet.g) {
        acc += xa * ga;
    }
    acc += coeffs.v.value(q) * jet.v;
    Ok(acc)
}

/// Boundary-vanishing bump: domain factor times a polynomial.
pub fn make_bump(dom: &DomainModel, monomials: Vec<Monomial>) -> AnalyticField {
    AnalyticField::Bump {
        sig: dom.sig(),
        factor: BoundaryFactor::for_domain(dom),
        monomials,
    }
}

/// Grid suprema of `|V|` and `|X|` over the domain, inflated by 5% so the
/// reported constants bound the sampled maxima.
pub fn sup_bounds(coeffs: &CoefficientSet, dom: &DomainModel, res: usize) -> Result<(f64, f64)> {
    let sig = dom.sig();
    let (lo, hi) = dom.spatial_bbox();
    let res = res.max(4);
    let mut axes = Vec::with_capacity(sig.dim());
    for _ in 0..sig.m() {
        axes.push(crate::domain::Axis::midpoint(
            -dom.t_half(),
            dom.t_half(),
            res,
        ));
    }
    for j in 0..sig.n() {
        axes.push(crate::domain::Axis::midpoint(lo[j], hi[j], res));
    }
    let total = crate::domain::tensor_len(&axes);
    let mut buf = alloc::vec![0.0; sig.dim()];
    let mut m0 = 0.0f64;
    let mut m1 = 0.0f64;
    for flat in 0..total {
        crate::domain::tensor_node(&axes, flat, &mut buf);
        let (t, x) = buf.split_at(sig.m());
        let q = PointRef::new(t, x);
        if !dom.contains(q) {
            continue;
        }
        m0 = m0.max(fmath::abs(coeffs.v.value(q)));
        let xv = coeffs.x_at(q, sig)?;
        m1 = m1.max(fmath::norm(&xv));
    }
    Ok((1.05 * m0, 1.05 * m1))
}
