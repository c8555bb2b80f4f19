//! The estimate machinery across desk-scale signatures: multiple time
//! dimensions, one- and three-dimensional space, and a moving domain.

use ultracarl_core::domain::{DomainModel, Polynomial, SpatialShape};
use ultracarl_core::fields::{make_bump, Monomial};
use ultracarl_core::geometry::{Signature, SpaceTimePoint};
use ultracarl_core::par::Sequential;
use ultracarl_core::quadrature::Resolution;
use ultracarl_core::verify::{calibrate, verify_boundary, GradientKind, VerifyContext};
use ultracarl_core::weight::CarlemanParams;

fn run_boundary(dom: &DomainModel, res: Resolution) {
    let sig = dom.sig();
    let p = SpaceTimePoint::zero(sig);
    let a = (sig.dim() * sig.dim()) as f64;
    let r_plus = dom.r_plus(&p).unwrap();
    let params = CarlemanParams::from_delta(p, a, 0.1, r_plus);
    let seq = Sequential;
    let ctx = VerifyContext::prepare(dom, &params, res, &seq).unwrap();
    let bump = make_bump(
        dom,
        vec![Monomial {
            coef: 1.0,
            t_exp: vec![0; sig.m()],
            x_exp: vec![0; sig.n()],
        }],
    );
    let cal = calibrate(
        &ctx,
        core::slice::from_ref(&bump),
        GradientKind::Boundary,
        0.5,
    )
    .unwrap();
    let rep = verify_boundary(&ctx, &bump, &cal.constants()).unwrap();
    assert!(
        rep.pass,
        "margin {} at signature ({}, {})",
        rep.margin,
        sig.m(),
        sig.n()
    );
    assert!(rep.terms.lhs_first_order.is_finite() && rep.terms.lhs_first_order >= 0.0);
    assert!(rep.terms.lhs_zeroth > 0.0);
    assert!(rep.terms.rhs_bulk > 0.0);
}

fn ball(m: usize, n: usize, t_half: f64) -> DomainModel {
    DomainModel::new_static(
        Signature::new(m, n).unwrap(),
        t_half,
        SpatialShape::Ball {
            center: vec![0.0; n],
            radius: 1.0,
        },
    )
    .unwrap()
}

#[test]
fn one_space_dimension() {
    run_boundary(&ball(1, 1, 1.5), Resolution::new(24, 24, 8));
}

#[test]
fn two_time_dimensions() {
    run_boundary(&ball(2, 2, 1.5), Resolution::new(12, 16, 32));
}

#[test]
fn three_space_dimensions() {
    run_boundary(&ball(1, 3, 1.5), Resolution::new(12, 14, 12));
}

#[test]
fn moving_domain_estimate() {
    let dom = DomainModel::new_moving(
        Signature::new(1, 2).unwrap(),
        1.5,
        vec![Polynomial::constant(0.0), Polynomial::constant(0.0)],
        Polynomial::new(vec![1.0, 0.0, -0.08]),
    )
    .unwrap();
    run_boundary(&dom, Resolution::new(16, 16, 48));
}

#[test]
fn moving_domain_with_two_time_dimensions() {
    // The domain varies along t1 only; the remaining temporal coordinates
    // span the hypercube unchanged.
    let dom = DomainModel::new_moving(
        Signature::new(2, 2).unwrap(),
        1.5,
        vec![Polynomial::constant(0.0), Polynomial::constant(0.0)],
        Polynomial::new(vec![1.0, 0.0, -0.08]),
    )
    .unwrap();
    run_boundary(&dom, Resolution::new(10, 14, 32));
}

#[test]
fn box_domain_estimate() {
    let dom = DomainModel::new_static(
        Signature::new(1, 2).unwrap(),
        2.0,
        SpatialShape::Box {
            lo: vec![-1.0, -1.0],
            hi: vec![1.0, 1.0],
        },
    )
    .unwrap();
    run_boundary(&dom, Resolution::new(16, 16, 24));
}
