//! Seeded generation of boundary-vanishing test-function suites.
//!
//! Suites cycle through the bump, oscillatory-bump, trig-sum, and
//! compactly-supported families so that calibration sees every shape of
//! field the verification protocol later replays on holdout data.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::domain::{DomainModel, SpatialShape};
use crate::fields::{AnalyticField, BoundaryFactor, Monomial, TrigTerm};
use crate::rng;

/// Shape of a generated suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSpec {
    pub count: usize,
    pub seed: u64,
    /// Maximum total degree of polynomial modulations.
    pub degree: usize,
    /// Number of oscillatory terms in trig sums.
    pub terms: usize,
    pub amplitude: f64,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            count: 20,
            seed: 42,
            degree: 2,
            terms: 3,
            amplitude: 1.0,
        }
    }
}

/// Deterministic suite of boundary-vanishing fields on the domain.
pub fn generate_suite(dom: &DomainModel, spec: &SuiteSpec) -> Vec<AnalyticField> {
    let mut gen = rng::seeded(spec.seed);
    let sig = dom.sig();
    let factor = BoundaryFactor::for_domain(dom);
    let (inner_center, inner_radius) = inner_ball(dom);
    (0..spec.count)
        .map(|k| match k % 4 {
            0 => AnalyticField::Bump {
                sig,
                factor: factor.clone(),
                monomials: random_monomials(&mut gen, dom, spec, 3),
            },
            1 => AnalyticField::PlanewaveBump {
                sig,
                factor: factor.clone(),
                term: random_trig(&mut gen, dom, spec),
            },
            2 => AnalyticField::TrigSum {
                sig,
                factor: factor.clone(),
                terms: (0..spec.terms.max(1))
                    .map(|_| random_trig(&mut gen, dom, spec))
                    .collect(),
            },
            _ => AnalyticField::CompactBump {
                sig,
                center: inner_center.clone(),
                radius: inner_radius,
                monomials: random_monomials(&mut gen, dom, spec, 2),
            },
        })
        .collect()
}

/// A spatial ball compactly contained in every cross-section, used by the
/// compact family.
fn inner_ball(dom: &DomainModel) -> (Vec<f64>, f64) {
    match dom.shape() {
        SpatialShape::Ball { center, radius } => (center.clone(), 0.5 * radius),
        SpatialShape::Box { lo, hi } => {
            let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let half = lo
                .iter()
                .zip(hi)
                .map(|(a, b)| 0.5 * (b - a))
                .fold(f64::INFINITY, f64::min);
            (center, 0.5 * half)
        }
        SpatialShape::MovingBall { .. } => {
            // Smallest cross-section over the time range.
            let mut best_rho = f64::INFINITY;
            let mut center = vec![0.0; dom.sig().n()];
            let t_half = dom.t_half();
            for k in 0..=256 {
                let t1 = -t_half + 2.0 * t_half * k as f64 / 256.0;
                let (c, rho) = dom.ball_at(t1).unwrap();
                if rho < best_rho {
                    best_rho = rho;
                    center = c;
                }
            }
            (center, 0.5 * best_rho)
        }
    }
}

fn random_monomials(
    gen: &mut ChaCha8Rng,
    dom: &DomainModel,
    spec: &SuiteSpec,
    count: usize,
) -> Vec<Monomial> {
    let sig = dom.sig();
    let mut out = Vec::with_capacity(count + 1);
    // A constant part keeps the field nontrivial even when random exponents
    // concentrate on one axis.
    out.push(Monomial {
        coef: spec.amplitude * rng::range(gen, 0.3, 1.0),
        t_exp: vec![0; sig.m()],
        x_exp: vec![0; sig.n()],
    });
    for _ in 0..count {
        let mut t_exp = vec![0u8; sig.m()];
        let mut x_exp = vec![0u8; sig.n()];
        let mut budget = spec.degree.max(1);
        while budget > 0 {
            let axis = rng::index(gen, sig.dim());
            if axis < sig.m() {
                t_exp[axis] += 1;
            } else {
                x_exp[axis - sig.m()] += 1;
            }
            budget -= 1;
            if rng::unit(gen) < 0.35 {
                break;
            }
        }
        out.push(Monomial {
            coef: spec.amplitude * rng::range(gen, -1.0, 1.0),
            t_exp,
            x_exp,
        });
    }
    out
}

fn random_trig(gen: &mut ChaCha8Rng, dom: &DomainModel, spec: &SuiteSpec) -> TrigTerm {
    let sig = dom.sig();
    // Wavelengths on the order of the domain size.
    let scale = 2.0 / dom.t_half().clamp(0.25, 1.0);
    TrigTerm {
        amp: spec.amplitude * rng::range(gen, 0.3, 1.0),
        freq_t: (0..sig.m())
            .map(|_| rng::range(gen, -scale, scale))
            .collect(),
        freq_x: (0..sig.n())
            .map(|_| rng::range(gen, -scale, scale))
            .collect(),
        phase: rng::range(gen, 0.0, core::f64::consts::TAU),
    }
}
