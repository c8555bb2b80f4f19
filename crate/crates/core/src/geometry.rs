//! Point-centred null-coordinate geometry of `R^m x R^n`.
//!
//! For a fixed reference point `p = (t(p), x(p))` we work with the shifted
//! coordinates `t_p = t - t(p)`, `x_p = x - x(p)`, their radial parts
//! `tau_p = |t_p|`, `r_p = |x_p|`, the null pair
//! `u_p = (tau_p - r_p)/2`, `v_p = (tau_p + r_p)/2`, and
//! `f_p = -u_p v_p = (r_p^2 - tau_p^2)/4`. The cone exterior is
//! `D_p = { f_p > 0 }`.
//!
//! Gradients of scalar functions are split into radial/null parts and the
//! squared tangential (angular) remainders `q_sph` and `q_tmp`; with the
//! block-diagonal metric those Euclidean tangential norms equal the abstract
//! angular contractions, so no spherical charts are needed.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::fmath;
use crate::Result;

/// Number of time (`m`) and space (`n`) dimensions; both at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    m: usize,
    n: usize,
}

impl Signature {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::DimensionMismatch {
                name: "m",
                expected: 1,
                got: 0,
            });
        }
        if n == 0 {
            return Err(Error::DimensionMismatch {
                name: "n",
                expected: 1,
                got: 0,
            });
        }
        Ok(Self { m, n })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total dimension `m + n`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.m + self.n
    }
}

/// A point `(t, x)` in Cartesian coordinates, owned storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimePoint {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
}

impl SpaceTimePoint {
    pub fn new(t: Vec<f64>, x: Vec<f64>) -> Self {
        Self { t, x }
    }

    /// Origin of the given signature.
    pub fn zero(sig: Signature) -> Self {
        Self {
            t: vec![0.0; sig.m()],
            x: vec![0.0; sig.n()],
        }
    }

    #[inline]
    pub fn as_ref(&self) -> PointRef<'_> {
        PointRef {
            t: &self.t,
            x: &self.x,
        }
    }

    pub fn check(&self, sig: Signature) -> Result<()> {
        self.as_ref().check(sig)
    }
}

/// Borrowed view of a point; the form used on bulk quadrature data.
#[derive(Debug, Clone, Copy)]
pub struct PointRef<'a> {
    pub t: &'a [f64],
    pub x: &'a [f64],
}

impl<'a> PointRef<'a> {
    pub fn new(t: &'a [f64], x: &'a [f64]) -> Self {
        Self { t, x }
    }

    pub fn check(&self, sig: Signature) -> Result<()> {
        if self.t.len() != sig.m() {
            return Err(Error::DimensionMismatch {
                name: "t",
                expected: sig.m(),
                got: self.t.len(),
            });
        }
        if self.x.len() != sig.n() {
            return Err(Error::DimensionMismatch {
                name: "x",
                expected: sig.n(),
                got: self.x.len(),
            });
        }
        Ok(())
    }

    pub fn to_owned(&self) -> SpaceTimePoint {
        SpaceTimePoint {
            t: self.t.to_vec(),
            x: self.x.to_vec(),
        }
    }
}

/// The reference point `p = (t(p), x(p))` about which frames are centred.
pub type ReferencePoint = SpaceTimePoint;

/// Derived scalars of the p-centred null frame at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullFrame {
    /// `u_p = (tau_p - r_p)/2`; negative on the cone exterior.
    pub u: f64,
    /// `v_p = (tau_p + r_p)/2`.
    pub v: f64,
    /// Spatial radius `r_p = |x - x(p)|`.
    pub r: f64,
    /// Temporal radius `tau_p = |t - t(p)|`.
    pub tau: f64,
    /// `f_p = -u_p v_p`, the cone-exterior defining function.
    pub f: f64,
}

/// Compute the null frame of `q` relative to `p`.
pub fn to_null_frame(q: PointRef<'_>, p: &ReferencePoint, sig: Signature) -> Result<NullFrame> {
    q.check(sig)?;
    p.check(sig)?;
    let tau = shifted_norm(q.t, &p.t);
    let r = shifted_norm(q.x, &p.x);
    let u = 0.5 * (tau - r);
    let v = 0.5 * (tau + r);
    Ok(NullFrame {
        u,
        v,
        r,
        tau,
        f: -u * v,
    })
}

#[inline]
fn shifted_norm(a: &[f64], b: &[f64]) -> f64 {
    fmath::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// True iff `q` lies in the cone exterior `D_p = { f_p > 0 }`.
pub fn in_exterior(q: PointRef<'_>, p: &ReferencePoint, sig: Signature) -> Result<bool> {
    Ok(to_null_frame(q, p, sig)?.f > 0.0)
}

/// Gradient of `f_p` at `q`: `(grad_t, grad_x) = (-t_p/2, x_p/2)`.
pub fn grad_f(q: PointRef<'_>, p: &ReferencePoint, sig: Signature) -> Result<(Vec<f64>, Vec<f64>)> {
    q.check(sig)?;
    p.check(sig)?;
    let grad_t = q.t.iter().zip(&p.t).map(|(a, b)| -0.5 * (a - b)).collect();
    let grad_x = q.x.iter().zip(&p.x).map(|(a, b)| 0.5 * (a - b)).collect();
    Ok((grad_t, grad_x))
}

/// Gradient of a scalar decomposed along the p-centred frame at `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSplit {
    /// `d z / d u_p = d_tau z - d_r z`.
    pub du: f64,
    /// `d z / d v_p = d_tau z + d_r z`.
    pub dv: f64,
    /// Radial spatial derivative `x_hat . grad_x`.
    pub dr: f64,
    /// Radial temporal derivative `t_hat . grad_t`.
    pub dtau: f64,
    /// Squared spatial-angular gradient `|grad_x - dr x_hat|^2`.
    pub q_sph: f64,
    /// Squared temporal-angular gradient `|grad_t - dtau t_hat|^2`.
    pub q_tmp: f64,
    pub grad_t: Vec<f64>,
    pub grad_x: Vec<f64>,
}

/// Split a Cartesian gradient `(grad_t, grad_x)` at `q` into radial/null and
/// angular parts of the frame centred at `p`.
///
/// Fails with a degenerate-frame error when `tau_p = 0` or `r_p = 0`; callers
/// keep quadrature nodes off those measure-zero sets by staggering.
pub fn split_gradient(
    grad_t: &[f64],
    grad_x: &[f64],
    q: PointRef<'_>,
    p: &ReferencePoint,
    sig: Signature,
) -> Result<GradientSplit> {
    if grad_t.len() != sig.m() {
        return Err(Error::DimensionMismatch {
            name: "grad_t",
            expected: sig.m(),
            got: grad_t.len(),
        });
    }
    if grad_x.len() != sig.n() {
        return Err(Error::DimensionMismatch {
            name: "grad_x",
            expected: sig.n(),
            got: grad_x.len(),
        });
    }
    let frame = to_null_frame(q, p, sig)?;
    if frame.tau == 0.0 {
        return Err(Error::DegenerateFrame { which: "tau_p" });
    }
    if frame.r == 0.0 {
        return Err(Error::DegenerateFrame { which: "r_p" });
    }

    let mut dr = 0.0;
    for ((xq, xp), g) in q.x.iter().zip(&p.x).zip(grad_x) {
        dr += (xq - xp) / frame.r * g;
    }
    let mut dtau = 0.0;
    for ((tq, tp), g) in q.t.iter().zip(&p.t).zip(grad_t) {
        dtau += (tq - tp) / frame.tau * g;
    }

    let mut q_sph = 0.0;
    for ((xq, xp), g) in q.x.iter().zip(&p.x).zip(grad_x) {
        let tang = g - dr * (xq - xp) / frame.r;
        q_sph += tang * tang;
    }
    let mut q_tmp = 0.0;
    for ((tq, tp), g) in q.t.iter().zip(&p.t).zip(grad_t) {
        let tang = g - dtau * (tq - tp) / frame.tau;
        q_tmp += tang * tang;
    }

    Ok(GradientSplit {
        du: dtau - dr,
        dv: dtau + dr,
        dr,
        dtau,
        q_sph,
        q_tmp,
        grad_t: grad_t.to_vec(),
        grad_x: grad_x.to_vec(),
    })
}

/// Metric pairing `g(V, W) = -sum_{i<=m} V_i W_i + sum_{j>m} V_j W_j` on
/// full `(m+n)`-vectors ordered as (time..., space...).
pub fn metric_inner(v: &[f64], w: &[f64], sig: Signature) -> Result<f64> {
    let d = sig.dim();
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            name: "V",
            expected: d,
            got: v.len(),
        });
    }
    if w.len() != d {
        return Err(Error::DimensionMismatch {
            name: "W",
            expected: d,
            got: w.len(),
        });
    }
    let mut acc = 0.0;
    for i in 0..sig.m() {
        acc -= v[i] * w[i];
    }
    for j in sig.m()..d {
        acc += v[j] * w[j];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sig(m: usize, n: usize) -> Signature {
        Signature::new(m, n).unwrap()
    }

    #[test]
    fn null_frame_examples() {
        let s = sig(1, 2);
        let p = SpaceTimePoint::zero(s);
        let q = SpaceTimePoint::new(vec![0.0], vec![3.0, 4.0]);
        let fr = to_null_frame(q.as_ref(), &p, s).unwrap();
        assert_eq!(fr.u, -2.5);
        assert_eq!(fr.v, 2.5);
        assert_eq!(fr.r, 5.0);
        assert_eq!(fr.tau, 0.0);
        assert_eq!(fr.f, 6.25);

        let s = sig(1, 1);
        let p = SpaceTimePoint::zero(s);
        let q = SpaceTimePoint::new(vec![1.0], vec![1.0]);
        let fr = to_null_frame(q.as_ref(), &p, s).unwrap();
        assert_eq!(fr.u, 0.0);
        assert_eq!(fr.v, 1.0);
        assert_eq!(fr.r, 1.0);
        assert_eq!(fr.tau, 1.0);
        assert_eq!(fr.f, 0.0);

        let s = sig(2, 2);
        let p = SpaceTimePoint::zero(s);
        let q = SpaceTimePoint::new(vec![3.0, 0.0], vec![0.0, 5.0]);
        let fr = to_null_frame(q.as_ref(), &p, s).unwrap();
        assert_eq!(fr.u, -1.0);
        assert_eq!(fr.v, 4.0);
        assert_eq!(fr.r, 5.0);
        assert_eq!(fr.tau, 3.0);
        assert_eq!(fr.f, 4.0);
    }

    #[test]
    fn exterior_membership() {
        let s = sig(1, 2);
        let p = SpaceTimePoint::zero(s);
        let inside = SpaceTimePoint::new(vec![0.0], vec![1.0, 0.0]);
        assert!(in_exterior(inside.as_ref(), &p, s).unwrap());
        let outside = SpaceTimePoint::new(vec![2.0], vec![1.0, 0.0]);
        assert!(!in_exterior(outside.as_ref(), &p, s).unwrap());
        let on_cone = SpaceTimePoint::new(vec![1.0], vec![1.0, 0.0]);
        assert!(!in_exterior(on_cone.as_ref(), &p, s).unwrap());
    }

    #[test]
    fn grad_f_examples() {
        let s = sig(1, 2);
        let p = SpaceTimePoint::zero(s);
        let q = SpaceTimePoint::new(vec![0.0], vec![3.0, 4.0]);
        let (gt, gx) = grad_f(q.as_ref(), &p, s).unwrap();
        assert_eq!(gx, vec![1.5, 2.0]);
        assert_eq!(gt, vec![0.0]);

        let (gt, gx) = grad_f(p.as_ref(), &p, s).unwrap();
        assert!(gt.iter().all(|&c| c == 0.0));
        assert!(gx.iter().all(|&c| c == 0.0));

        let s = sig(2, 2);
        let p = SpaceTimePoint::zero(s);
        let q = SpaceTimePoint::new(vec![1.0, 1.0], vec![0.0, 0.0]);
        let (gt, gx) = grad_f(q.as_ref(), &p, s).unwrap();
        assert_eq!(gt, vec![-0.5, -0.5]);
        assert_eq!(gx, vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_reports_offender() {
        let s = sig(1, 2);
        let p = SpaceTimePoint::zero(s);
        let q = SpaceTimePoint::new(vec![0.0, 0.0], vec![1.0, 0.0]);
        match to_null_frame(q.as_ref(), &p, s) {
            Err(Error::DimensionMismatch { name, .. }) => assert_eq!(name, "t"),
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn split_purely_radial() {
        let s = sig(2, 2);
        let p = SpaceTimePoint::zero(s);
        let q = SpaceTimePoint::new(vec![3.0, 0.0], vec![0.0, 5.0]);
        // grad_x = x_hat, grad_t = 0.
        let split = split_gradient(&[0.0, 0.0], &[0.0, 1.0], q.as_ref(), &p, s).unwrap();
        assert_relative_eq!(split.du, -1.0, max_relative = 1e-15);
        assert_relative_eq!(split.dv, 1.0, max_relative = 1e-15);
        assert_eq!(split.q_sph, 0.0);
        assert_eq!(split.q_tmp, 0.0);
    }

    #[test]
    fn split_q_tmp_vanishes_for_single_time() {
        let s = sig(1, 2);
        let p = SpaceTimePoint::zero(s);
        let q = SpaceTimePoint::new(vec![0.5], vec![1.0, 0.5]);
        let split = split_gradient(&[0.7], &[0.2, -0.4], q.as_ref(), &p, s).unwrap();
        assert_eq!(split.q_tmp, 0.0);
    }

    #[test]
    fn split_rejects_degenerate_frame() {
        let s = sig(1, 2);
        let p = SpaceTimePoint::zero(s);
        let q = SpaceTimePoint::new(vec![0.0], vec![1.0, 0.0]);
        match split_gradient(&[1.0], &[1.0, 0.0], q.as_ref(), &p, s) {
            Err(Error::DegenerateFrame { which }) => assert_eq!(which, "tau_p"),
            other => panic!("expected degenerate frame, got {other:?}"),
        }
    }

    #[test]
    fn metric_inner_signature() {
        let s = sig(2, 2);
        assert_eq!(
            metric_inner(&[1.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], s).unwrap(),
            -1.0
        );
        assert_eq!(
            metric_inner(&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 1.0, 0.0], s).unwrap(),
            1.0
        );
        let s = sig(1, 1);
        assert_eq!(metric_inner(&[1.0, 1.0], &[1.0, 1.0], s).unwrap(), 0.0);
    }
}
