//! Deterministic midpoint quadrature over `U ∩ D_p` (volume) and
//! `dU ∩ D_p` (surface).
//!
//! Volume rules are staggered tensor grids over the bounding box of the
//! region: cells whose centre fails membership are dropped, and the whole
//! grid is shifted by a fixed sub-cell offset when a node would land exactly
//! on the degenerate sets `{tau_p = 0}` or `{r_p = 0}`. Surface rules reuse
//! the volume rule's temporal axes, so boundary samples and volume nodes
//! share time slices exactly — the interior observation region relies on
//! that.
//!
//! Integration evaluates nodes independently (optionally in parallel) and
//! reduces in a fixed pairwise tree, so results are bit-identical for any
//! worker count.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{tensor_len, tensor_node, Axis, BoundarySample, DomainModel};
use crate::error::Error;
use crate::geometry::{self, NullFrame, PointRef, ReferencePoint, Signature};
use crate::logsum::{self, LogVal};
use crate::par::{ParallelMap, Sequential};
use crate::Result;

/// Per-axis resolutions and the raw-cell cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Cells per temporal axis.
    pub time: usize,
    /// Cells per spatial axis.
    pub space: usize,
    /// Cross-section resolution of boundary meshes.
    pub angular: usize,
    /// Upper bound on raw tensor cells before membership filtering.
    pub cap: usize,
}

impl Resolution {
    pub fn new(time: usize, space: usize, angular: usize) -> Self {
        Self {
            time,
            space,
            angular,
            cap: 10_000_000,
        }
    }

    /// Same rule with both volume resolutions doubled.
    pub fn doubled(&self) -> Self {
        Self {
            time: 2 * self.time,
            space: 2 * self.space,
            angular: 2 * self.angular,
            cap: self.cap,
        }
    }
}

/// Fixed sub-cell offset applied when midpoints hit a degenerate set.
const STAGGER: f64 = 1.0 / 4096.0;

/// Midpoint rule over `U ∩ D_p` with per-node null frames precomputed.
#[derive(Debug, Clone)]
pub struct VolumeRule {
    sig: Signature,
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    t_index: Vec<usize>,
    frames: Vec<NullFrame>,
    t_axes: Vec<Axis>,
    excluded: usize,
    resolution: Resolution,
}

impl VolumeRule {
    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn sig(&self) -> Signature {
        self.sig
    }

    #[inline]
    pub fn node(&self, i: usize) -> PointRef<'_> {
        let start = i * self.dim;
        let (t, x) = self.coords[start..start + self.dim].split_at(self.sig.m());
        PointRef::new(t, x)
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    #[inline]
    pub fn frame(&self, i: usize) -> &NullFrame {
        &self.frames[i]
    }

    #[inline]
    pub fn slice_of(&self, i: usize) -> usize {
        self.t_index[i]
    }

    /// Temporal axes of the rule; surface rules built from the same axes
    /// share slice indices.
    pub fn t_axes(&self) -> &[Axis] {
        &self.t_axes
    }

    /// Cells rejected by the membership tests.
    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn sum_weights(&self) -> f64 {
        logsum::pairwise_sum(&self.weights)
    }

    /// Integrate `weight * f(node)`; errors on non-finite integrand values.
    pub fn integrate(&self, f: &(dyn Fn(usize, PointRef<'_>) -> f64 + Sync)) -> Result<f64> {
        self.integrate_with(&Sequential, f)
    }

    /// Integrate with a caller-supplied (possibly parallel) node evaluator.
    pub fn integrate_with(
        &self,
        pm: &dyn ParallelMap,
        f: &(dyn Fn(usize, PointRef<'_>) -> f64 + Sync),
    ) -> Result<f64> {
        let values = pm.map_indexed(self.len(), &|i| self.weights[i] * f(i, self.node(i)));
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { index: bad });
        }
        Ok(logsum::pairwise_sum(&values))
    }

    /// Integrate a nonnegative integrand supplied as `ln(term)` per node
    /// (`-inf` meaning zero); the sum is carried in log space.
    pub fn integrate_log(
        &self,
        pm: &dyn ParallelMap,
        f: &(dyn Fn(usize, PointRef<'_>) -> f64 + Sync),
    ) -> Result<LogVal> {
        let terms = pm.map_indexed(self.len(), &|i| {
            let l = f(i, self.node(i));
            if l == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                l + crate::fmath::ln(self.weights[i])
            }
        });
        if let Some(bad) = terms.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::NonFiniteIntegrand { index: bad });
        }
        Ok(logsum::log_sum(&terms))
    }
}

/// Boundary samples restricted to the cone exterior.
#[derive(Debug, Clone)]
pub struct SurfaceRule {
    samples: Vec<BoundarySample>,
    frames: Vec<NullFrame>,
    excluded: usize,
}

impl SurfaceRule {
    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn sample(&self, i: usize) -> &BoundarySample {
        &self.samples[i]
    }

    #[inline]
    pub fn frame(&self, i: usize) -> &NullFrame {
        &self.frames[i]
    }

    pub fn samples(&self) -> &[BoundarySample] {
        &self.samples
    }

    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn sum_weights(&self) -> f64 {
        let w: Vec<f64> = self.samples.iter().map(|s| s.weight).collect();
        logsum::pairwise_sum(&w)
    }

    pub fn integrate(&self, f: &(dyn Fn(usize, &BoundarySample) -> f64 + Sync)) -> Result<f64> {
        let values: Vec<f64> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| s.weight * f(i, s))
            .collect();
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { index: bad });
        }
        Ok(logsum::pairwise_sum(&values))
    }
}

/// Temporal axes covering the slab where `D_p` can meet the domain, shared
/// between the volume and surface rules of one verification run.
pub(crate) fn temporal_axes(
    dom: &DomainModel,
    p: &ReferencePoint,
    reach: f64,
    res: usize,
) -> Vec<Axis> {
    (0..dom.sig().m())
        .map(|i| {
            let lo = (p.t[i] - reach).max(-dom.t_half());
            let hi = (p.t[i] + reach).min(dom.t_half());
            Axis::midpoint(lo, hi, res.max(1))
        })
        .collect()
}

/// Build the volume rule over `U ∩ D_p`.
///
/// Requires `T > R+` so the cone exterior never reaches the temporal
/// boundary of the domain.
pub fn build_volume_rule(
    dom: &DomainModel,
    p: &ReferencePoint,
    res: Resolution,
) -> Result<VolumeRule> {
    let sig = dom.sig();
    p.check(sig)?;
    let r_plus = dom.r_plus(p)?;
    if dom.t_half() <= r_plus {
        return Err(Error::TemporalExtent {
            t_half: dom.t_half(),
            r_plus,
        });
    }

    let (lo, hi) = dom.spatial_bbox();
    let mut t_axes = temporal_axes(dom, p, r_plus, res.time);
    let x_axes: Vec<Axis> = (0..sig.n())
        .map(|j| Axis::midpoint(lo[j], hi[j], res.space.max(1)))
        .collect();

    let cells = tensor_len(&t_axes) * tensor_len(&x_axes);
    if cells > res.cap {
        return Err(Error::NodeCapExceeded {
            cells,
            cap: res.cap,
        });
    }

    for attempt in 0..2 {
        let mut x_axes_try = x_axes.clone();
        if attempt == 1 {
            for ax in t_axes.iter_mut().chain(x_axes_try.iter_mut()) {
                ax.stagger = STAGGER;
            }
        }
        match collect_volume_nodes(dom, p, sig, &t_axes, &x_axes_try, res) {
            BuildOutcome::Degenerate => continue,
            BuildOutcome::Done(rule) => {
                if rule.is_empty() {
                    return Err(Error::EmptyRule(format!(
                        "no cells of the {cells}-cell grid meet U ∩ D_p"
                    )));
                }
                return Ok(rule);
            }
        }
    }
    Err(Error::Unsupported(format!(
        "staggering failed to clear degenerate nodes for p at t = {:?}, x = {:?}",
        p.t, p.x
    )))
}

enum BuildOutcome {
    Degenerate,
    Done(VolumeRule),
}

fn collect_volume_nodes(
    dom: &DomainModel,
    p: &ReferencePoint,
    sig: Signature,
    t_axes: &[Axis],
    x_axes: &[Axis],
    res: Resolution,
) -> BuildOutcome {
    let dim = sig.dim();
    let nt = tensor_len(t_axes);
    let nx = tensor_len(x_axes);
    let mut w_cell = 1.0;
    for ax in t_axes.iter().chain(x_axes) {
        w_cell *= ax.step();
    }

    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut t_index = Vec::new();
    let mut frames = Vec::new();
    let mut excluded = 0usize;
    let mut tbuf = vec![0.0; sig.m()];
    let mut xbuf = vec![0.0; sig.n()];

    for ti in 0..nt {
        tensor_node(t_axes, ti, &mut tbuf);
        for xi in 0..nx {
            tensor_node(x_axes, xi, &mut xbuf);
            let q = PointRef::new(&tbuf, &xbuf);
            let frame = geometry::to_null_frame(q, p, sig).expect("checked dims");
            if !(frame.f > 0.0 && dom.contains(q)) {
                excluded += 1;
                continue;
            }
            if frame.tau == 0.0 || frame.r == 0.0 {
                return BuildOutcome::Degenerate;
            }
            coords.extend_from_slice(&tbuf);
            coords.extend_from_slice(&xbuf);
            weights.push(w_cell);
            t_index.push(ti);
            frames.push(frame);
        }
    }

    BuildOutcome::Done(VolumeRule {
        sig,
        dim,
        coords,
        weights,
        t_index,
        frames,
        t_axes: t_axes.to_vec(),
        excluded,
        resolution: res,
    })
}

/// Build the surface rule on the same time slices as a volume rule.
pub fn build_surface_rule(
    dom: &DomainModel,
    p: &ReferencePoint,
    volume: &VolumeRule,
    res_angular: usize,
) -> Result<SurfaceRule> {
    let sig = dom.sig();
    let mesh = dom.boundary_mesh(volume.t_axes(), res_angular)?;
    let mut samples = Vec::new();
    let mut frames = Vec::new();
    let mut excluded = 0usize;
    for s in mesh {
        let frame = geometry::to_null_frame(s.point.as_ref(), p, sig)?;
        if frame.f > 0.0 {
            samples.push(s);
            frames.push(frame);
        } else {
            excluded += 1;
        }
    }
    Ok(SurfaceRule {
        samples,
        frames,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SpatialShape;
    use crate::geometry::SpaceTimePoint;
    use approx::assert_relative_eq;

    fn ball_dom(t_half: f64) -> DomainModel {
        DomainModel::new_static(
            Signature::new(1, 2).unwrap(),
            t_half,
            SpatialShape::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn constant_integrand_gives_weight_sum() {
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        let rule = build_volume_rule(&dom, &p, Resolution::new(24, 24, 16)).unwrap();
        let total = rule.integrate(&|_, _| 1.0).unwrap();
        assert_relative_eq!(total, rule.sum_weights(), max_relative = 1e-13);
        // Never more than the bounding slab the axes cover: the temporal
        // window is clipped to |t| < R+ = 1 around p.
        let slab = 2.0 * 2.0 * 2.0;
        assert!(rule.sum_weights() <= slab);
    }

    #[test]
    fn all_nodes_strictly_exterior_and_nondegenerate() {
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        // p at the symmetric origin would put midpoints on tau_p = 0 at odd
        // resolutions; the stagger has to clear them.
        let rule = build_volume_rule(&dom, &p, Resolution::new(25, 25, 16)).unwrap();
        for i in 0..rule.len() {
            let fr = rule.frame(i);
            assert!(fr.f > 0.0);
            assert!(fr.tau != 0.0 && fr.r != 0.0);
        }
    }

    #[test]
    fn linearity_to_rounding() {
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        let rule = build_volume_rule(&dom, &p, Resolution::new(16, 16, 16)).unwrap();
        let f = |_: usize, q: PointRef<'_>| q.x[0] + 0.3;
        let g = |_: usize, q: PointRef<'_>| q.t[0] * q.x[1];
        let sum_fg = rule.integrate(&|i, q| f(i, q) + g(i, q)).unwrap();
        let sum_f = rule.integrate(&f).unwrap();
        let sum_g = rule.integrate(&g).unwrap();
        let tol = 1e-16 * rule.len() as f64;
        assert!((sum_fg - (sum_f + sum_g)).abs() <= tol.max(1e-13));
    }

    #[test]
    fn volume_refinement_improves() {
        // |{(t,x): |x| < 1, |t| < |x|}| = 4 pi / 3.
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        let exact = 4.0 * core::f64::consts::PI / 3.0;
        let mut errs = vec![];
        for res in [16usize, 32, 64] {
            let rule = build_volume_rule(&dom, &p, Resolution::new(res, res, 16)).unwrap();
            errs.push((rule.sum_weights() - exact).abs());
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1]);
        assert!(errs[0] / errs[1] >= 1.5 || errs[1] / errs[2] >= 1.5);
    }

    #[test]
    fn smooth_integrand_doubling_differences_shrink() {
        // Successive |I(res) - I(2 res)| gaps contract by at least 1.5x
        // beyond 32 cells per axis.
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        let f = |_: usize, q: PointRef<'_>| (1.3 * q.x[0] + 0.4 * q.t[0]).cos() + q.x[1] * q.x[1];
        let mut values = vec![];
        for res in [32usize, 64, 128] {
            let rule = build_volume_rule(&dom, &p, Resolution::new(res, res, 16)).unwrap();
            values.push(rule.integrate(&f).unwrap());
        }
        let d1 = (values[0] - values[1]).abs();
        let d2 = (values[1] - values[2]).abs();
        assert!(d1 / d2 >= 1.5, "doubling gap ratio {} too small", d1 / d2);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        let rule = build_volume_rule(&dom, &p, Resolution::new(8, 8, 8)).unwrap();
        match rule.integrate(&|i, _| if i == 3 { f64::NAN } else { 1.0 }) {
            Err(Error::NonFiniteIntegrand { index }) => assert_eq!(index, 3),
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_when_temporal_extent_too_small() {
        let dom = ball_dom(0.9);
        let p = SpaceTimePoint::zero(dom.sig());
        match build_volume_rule(&dom, &p, Resolution::new(8, 8, 8)) {
            Err(Error::TemporalExtent { .. }) => {}
            other => panic!("expected temporal extent error, got {other:?}"),
        }
    }

    #[test]
    fn cap_is_enforced() {
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        let mut res = Resolution::new(1000, 1000, 8);
        res.cap = 1_000_000;
        match build_volume_rule(&dom, &p, res) {
            Err(Error::NodeCapExceeded { .. }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn surface_rule_shares_time_slices() {
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        let rule = build_volume_rule(&dom, &p, Resolution::new(16, 16, 16)).unwrap();
        let surf = build_surface_rule(&dom, &p, &rule, 32).unwrap();
        assert!(!surf.is_empty());
        for (i, s) in surf.samples().iter().enumerate() {
            assert!(surf.frame(i).f > 0.0);
            // Slice index resolves to the exact same time coordinate.
            let mut t = vec![0.0];
            tensor_node(rule.t_axes(), s.t_index, &mut t);
            assert_eq!(t[0].to_bits(), s.point.t[0].to_bits());
        }
    }

    #[test]
    fn schedule_independent_integration() {
        struct Chunked;
        impl crate::par::ParallelMap for Chunked {
            fn map_indexed(&self, len: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
                // Evaluate the second half before the first, filling by index.
                let mut out = vec![0.0; len];
                let mid = len / 2;
                for i in (mid..len).chain(0..mid) {
                    out[i] = f(i);
                }
                out
            }
        }
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        let rule = build_volume_rule(&dom, &p, Resolution::new(16, 16, 16)).unwrap();
        let f = |_: usize, q: PointRef<'_>| (q.x[0] * 1.7 + q.t[0]).sin();
        let a = rule.integrate_with(&Sequential, &f).unwrap();
        let b = rule.integrate_with(&Chunked, &f).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn weighted_singular_integrand_stays_finite() {
        // zeta * f^(-1/2) with zeta ~ f^(2a): finite at every node and stable
        // under refinement.
        use crate::weight::{eval_zeta_frame, CarlemanParams};
        let dom = ball_dom(2.0);
        let p = SpaceTimePoint::zero(dom.sig());
        let params = CarlemanParams::new(p.clone(), 9.0, 0.1, 0.01, 1.0);
        let mut last = None;
        for res in [16usize, 32, 64] {
            let rule = build_volume_rule(&dom, &p, Resolution::new(res, res, 16)).unwrap();
            let total = rule
                .integrate(&|i, _| {
                    let fr = rule.frame(i);
                    let w = eval_zeta_frame(fr, &params).unwrap();
                    let log_term = w.log_zeta - 0.5 * fr.f.ln();
                    log_term.exp()
                })
                .unwrap();
            assert!(total.is_finite() && total > 0.0);
            if let Some(prev) = last {
                let rel: f64 = (total - prev) / total;
                assert!(rel.abs() < 0.5, "refinement jump too large: {rel}");
            }
            last = Some(total);
        }
    }
}
