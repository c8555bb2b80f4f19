//! Observation-region geometry on the boundary and in the interior.
//!
//! `Gamma_p` collects boundary points of the cone exterior where the outward
//! normal derivative of `f_p` is positive; `Gamma_p^eps` replaces that
//! functional with `(1 - eps r_p) N f_p + eps f_p N r_p`, the form the
//! perturbed weight actually controls. `W_p^eps` thickens `Gamma_p^eps` in
//! the spatial directions only, slice by slice, and intersects with
//! `U ∩ D_p`.
//!
//! On static domains both indicator functionals share the factor
//! `nu_x . x_p` (the epsilon correction cannot flip the sign in the
//! admissible regime), so the two regions coincide; genuinely distinct
//! regions need a moving boundary. The convergence scan therefore refines
//! membership intervals by root bisection along the boundary cross-section —
//! at small `delta` the flip band is narrower than any affordable uniform
//! sampling.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{tensor_node, BoundarySample, DomainModel, SpatialShape};
use crate::error::Error;
use crate::fmath;
use crate::geometry::{self, PointRef, ReferencePoint};
use crate::logsum;
use crate::quadrature::{temporal_axes, Resolution, SurfaceRule};
use crate::weight::CarlemanParams;
use crate::Result;

/// Region kinds exported by masks and region CSV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// `dU ∩ D_p`, the boundary trace of the cone exterior.
    Trace,
    /// `Gamma_p`.
    Gamma,
    /// `Gamma_p^eps`.
    GammaEps,
    /// `W_p^eps` (interior).
    WEps,
}

impl RegionKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegionKind::Trace => "trace",
            RegionKind::Gamma => "gamma",
            RegionKind::GammaEps => "gamma_eps",
            RegionKind::WEps => "w_eps",
        }
    }
}

/// Membership flags over a sample set, with the measure of the flagged part.
#[derive(Debug, Clone)]
pub struct RegionMask {
    pub kind: RegionKind,
    pub member: Vec<bool>,
    pub measure: f64,
}

/// `Gamma_p` membership of a boundary point: `f_p > 0` and `N f_p > 0`.
pub fn gamma_indicator(q: PointRef<'_>, p: &ReferencePoint, dom: &DomainModel) -> Result<bool> {
    let frame = geometry::to_null_frame(q, p, dom.sig())?;
    if frame.f <= 0.0 {
        return Ok(false);
    }
    Ok(dom.normal_f(q, p)? > 0.0)
}

/// `Gamma_p^eps` membership: `f_p > 0` and
/// `(1 - eps r_p) N f_p + eps f_p N r_p > 0`.
pub fn gamma_eps_indicator(
    q: PointRef<'_>,
    params: &CarlemanParams,
    dom: &DomainModel,
) -> Result<bool> {
    let frame = geometry::to_null_frame(q, &params.p, dom.sig())?;
    if frame.f <= 0.0 {
        return Ok(false);
    }
    let nf = dom.normal_f(q, &params.p)?;
    let nr = dom.normal_r(q, &params.p)?;
    Ok(gamma_eps_bracket(params.eps, frame.f, frame.r, nf, nr) > 0.0)
}

/// The boundary bracket `(1 - eps r) Nf + eps f Nr`.
#[inline]
pub fn gamma_eps_bracket(eps: f64, f: f64, r: f64, nf: f64, nr: f64) -> f64 {
    (1.0 - eps * r) * nf + eps * f * nr
}

/// Flag every sample of a surface rule for the requested boundary region.
pub fn mask_surface(
    kind: RegionKind,
    surface: &SurfaceRule,
    params: &CarlemanParams,
) -> Result<RegionMask> {
    let mut member = Vec::with_capacity(surface.len());
    let mut weights = Vec::new();
    for i in 0..surface.len() {
        let s = surface.sample(i);
        let frame = surface.frame(i);
        let is_member = match kind {
            RegionKind::Trace => frame.f > 0.0,
            RegionKind::Gamma => {
                frame.f > 0.0
                    && crate::domain::normal_f_from(
                        &s.normal_x,
                        s.normal_t1,
                        s.point.as_ref(),
                        &params.p,
                    ) > 0.0
            }
            RegionKind::GammaEps => {
                if frame.f <= 0.0 {
                    false
                } else {
                    let nf = crate::domain::normal_f_from(
                        &s.normal_x,
                        s.normal_t1,
                        s.point.as_ref(),
                        &params.p,
                    );
                    let nr =
                        crate::domain::normal_r_from(&s.normal_x, s.point.as_ref(), &params.p)?;
                    gamma_eps_bracket(params.eps, frame.f, frame.r, nf, nr) > 0.0
                }
            }
            RegionKind::WEps => {
                return Err(Error::Unsupported(alloc::string::String::from(
                    "W_p^eps is an interior region; use WepsIndex",
                )))
            }
        };
        if is_member {
            weights.push(s.weight);
        }
        member.push(is_member);
    }
    Ok(RegionMask {
        kind,
        member,
        measure: logsum::pairwise_sum(&weights),
    })
}

/// Slice-indexed lookup for `W_p^eps` membership of interior points.
///
/// The thickening acts in `x` only: a point belongs when some member
/// boundary sample on the same time slice lies within `sigma` of it.
#[derive(Debug, Clone)]
pub struct WepsIndex {
    sigma: f64,
    slices: BTreeMap<usize, Vec<Vec<f64>>>,
    members: usize,
}

impl WepsIndex {
    /// Build from a surface rule and its `Gamma_p^eps` mask.
    pub fn build(surface: &SurfaceRule, mask: &RegionMask, sigma: f64) -> Self {
        let mut slices: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
        let mut members = 0;
        for (i, is_member) in mask.member.iter().enumerate() {
            if *is_member {
                let s = surface.sample(i);
                slices.entry(s.t_index).or_default().push(s.point.x.clone());
                members += 1;
            }
        }
        Self {
            sigma,
            slices,
            members,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }

    /// Membership test for an interior node known to lie in `U ∩ D_p`,
    /// identified by its temporal slice index.
    pub fn member_by_slice(&self, t_index: usize, x: &[f64]) -> bool {
        let Some(points) = self.slices.get(&t_index) else {
            return false;
        };
        let sigma2 = self.sigma * self.sigma;
        points.iter().any(|y| {
            let mut d2 = 0.0;
            for (a, b) in x.iter().zip(y) {
                d2 += (a - b) * (a - b);
            }
            d2 < sigma2
        })
    }
}

/// Point-based `W_p^eps` indicator per the definition: `q` must lie in
/// `U ∩ D_p` and within `sigma` (in `x` only) of a member sample on the same
/// time slice (`t_tol` is the slice-matching tolerance of the sample grid).
pub fn w_eps_indicator(
    q: PointRef<'_>,
    params: &CarlemanParams,
    dom: &DomainModel,
    gamma_eps_members: &[BoundarySample],
    t_tol: f64,
) -> Result<bool> {
    let frame = geometry::to_null_frame(q, &params.p, dom.sig())?;
    if frame.f <= 0.0 || !dom.contains(q) {
        return Ok(false);
    }
    let sigma2 = params.sigma * params.sigma;
    Ok(gamma_eps_members.iter().any(|s| {
        let same_slice =
            q.t.iter()
                .zip(&s.point.t)
                .all(|(a, b)| fmath::abs(a - b) <= t_tol);
        if !same_slice {
            return false;
        }
        let mut d2 = 0.0;
        for (a, b) in q.x.iter().zip(&s.point.x) {
            d2 += (a - b) * (a - b);
        }
        d2 < sigma2
    }))
}

/// One row of the region convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanEntry {
    pub delta: f64,
    pub eps: f64,
    /// Surface measure of the symmetric difference between `Gamma_p^eps` and
    /// `Gamma_p`.
    pub sym_diff: f64,
}

/// Measure the `Gamma_p^eps(delta)` vs `Gamma_p` symmetric difference for a
/// decreasing list of `delta` values, with `eps = delta^2 / R+`.
///
/// Ball cross-sections in `n = 2` get root-refined membership intervals per
/// time slice; other shapes fall back to sampled masks at the given
/// resolution.
pub fn convergence_scan(
    dom: &DomainModel,
    p: &ReferencePoint,
    deltas: &[f64],
    res: Resolution,
) -> Result<Vec<ScanEntry>> {
    let r_plus = dom.r_plus(p)?;
    let refined = dom.sig().n() == 2
        && matches!(
            dom.shape(),
            SpatialShape::Ball { .. } | SpatialShape::MovingBall { .. }
        );
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let eps = delta * delta / r_plus;
        let sym_diff = if refined {
            refined_symmetric_difference(dom, p, eps, res.time)?
        } else {
            sampled_symmetric_difference(dom, p, eps, res)?
        };
        out.push(ScanEntry {
            delta,
            eps,
            sym_diff,
        });
    }
    Ok(out)
}

/// Slice data for the circular cross-section scan.
struct CircleSlice {
    t: Vec<f64>,
    center: Vec<f64>,
    rho: f64,
    center_d: Vec<f64>,
    rho_d: f64,
    moving: bool,
}

impl CircleSlice {
    fn at(dom: &DomainModel, t: &[f64]) -> Self {
        match dom.shape() {
            SpatialShape::Ball { center, radius } => Self {
                t: t.to_vec(),
                center: center.clone(),
                rho: *radius,
                center_d: vec![0.0; center.len()],
                rho_d: 0.0,
                moving: false,
            },
            SpatialShape::MovingBall { center, radius } => {
                let t1 = t[0];
                Self {
                    t: t.to_vec(),
                    center: center.iter().map(|c| c.eval(t1)).collect(),
                    rho: radius.eval(t1),
                    center_d: center.iter().map(|c| c.deriv(t1)).collect(),
                    rho_d: radius.deriv(t1),
                    moving: true,
                }
            }
            SpatialShape::Box { .. } => unreachable!("refined scan is ball-only"),
        }
    }

    /// (f_p, plain gamma functional, eps bracket functional, area factor).
    ///
    /// The gamma functional is `N f_p` without its positive normalisation;
    /// the bracket keeps the same scaling so the two are sign-comparable.
    fn functionals(&self, theta: f64, p: &ReferencePoint, eps: f64) -> (f64, f64, f64, f64) {
        let omega = [fmath::cos(theta), fmath::sin(theta)];
        let x = [
            self.center[0] + self.rho * omega[0],
            self.center[1] + self.rho * omega[1],
        ];
        let x_p = [x[0] - p.x[0], x[1] - p.x[1]];
        let r2 = x_p[0] * x_p[0] + x_p[1] * x_p[1];
        let r = fmath::sqrt(r2);
        let tau2: f64 = self
            .t
            .iter()
            .zip(&p.t)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let f = 0.25 * (r2 - tau2);
        let omega_dot_xp = omega[0] * x_p[0] + omega[1] * x_p[1];
        let s = if self.moving {
            omega[0] * self.center_d[0] + omega[1] * self.center_d[1] + self.rho_d
        } else {
            0.0
        };
        // 2 sqrt(1-s^2) * N f_p; the common positive factor drops out of all
        // sign tests.
        let g1 = omega_dot_xp - s * (self.t[0] - p.t[0]);
        // Same scaling of (1 - eps r) N f + eps f N r.
        let g2 = if r == 0.0 {
            f64::NAN
        } else {
            (1.0 - eps * r) * g1 + eps * f * 2.0 * omega_dot_xp / r
        };
        let area = self.rho * fmath::sqrt(1.0 + s * s);
        (f, g1, g2, area)
    }
}

/// Root-refined symmetric-difference measure for n = 2 ball sections.
fn refined_symmetric_difference(
    dom: &DomainModel,
    p: &ReferencePoint,
    eps: f64,
    res_time: usize,
) -> Result<f64> {
    let r_plus = dom.r_plus(p)?;
    let t_axes = temporal_axes(dom, p, r_plus, res_time);
    let nt: usize = t_axes.iter().map(|a| a.count).product();
    let mut w_t = 1.0;
    for ax in &t_axes {
        w_t *= ax.step();
    }
    const SEEDS: usize = 1024;
    let step = core::f64::consts::TAU / SEEDS as f64;
    let mut slice_measures = Vec::with_capacity(nt);
    let mut t = vec![0.0; t_axes.len()];
    for ti in 0..nt {
        tensor_node(&t_axes, ti, &mut t);
        let slice = CircleSlice::at(dom, &t);
        if slice.rho <= 0.0 {
            continue;
        }

        // Collect breakpoints: seam points plus refined roots of each
        // functional between seeds.
        let mut breaks = vec![0.0, core::f64::consts::TAU];
        let eval = |theta: f64| slice.functionals(theta, p, eps);
        let mut prev = eval(0.0);
        for k in 1..=SEEDS {
            let theta = k as f64 * step;
            let cur = eval(theta);
            for which in 0..3 {
                let (a, b) = match which {
                    0 => (prev.0, cur.0),
                    1 => (prev.1, cur.1),
                    _ => (prev.2, cur.2),
                };
                if a == 0.0 || (a < 0.0) != (b < 0.0) {
                    let root = bisect_root(
                        |th| {
                            let v = eval(th);
                            match which {
                                0 => v.0,
                                1 => v.1,
                                _ => v.2,
                            }
                        },
                        theta - step,
                        theta,
                    );
                    breaks.push(root);
                }
            }
            prev = cur;
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());

        // Sum XOR-member intervals with the local area factor.
        let mut acc = 0.0;
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi - lo <= 1e-15 {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let (f, g1, g2, _) = eval(mid);
            let member = f > 0.0 && ((g1 > 0.0) != (g2 > 0.0));
            if member {
                // Integrate the area factor over the interval.
                const PTS: usize = 8;
                let h = (hi - lo) / PTS as f64;
                for j in 0..PTS {
                    let th = lo + (j as f64 + 0.5) * h;
                    acc += eval(th).3 * h;
                }
            }
        }
        slice_measures.push(acc * w_t);
    }
    Ok(logsum::pairwise_sum(&slice_measures))
}

fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (flo < 0.0) != (fmid < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    0.5 * (lo + hi)
}

/// Sampled fallback: flag boundary samples under both indicators.
fn sampled_symmetric_difference(
    dom: &DomainModel,
    p: &ReferencePoint,
    eps: f64,
    res: Resolution,
) -> Result<f64> {
    let samples = dom.sample_boundary(res.time, res.angular)?;
    let mut weights = Vec::new();
    for s in &samples {
        let frame = geometry::to_null_frame(s.point.as_ref(), p, dom.sig())?;
        if frame.f <= 0.0 {
            continue;
        }
        let nf = crate::domain::normal_f_from(&s.normal_x, s.normal_t1, s.point.as_ref(), p);
        let nr = crate::domain::normal_r_from(&s.normal_x, s.point.as_ref(), p)?;
        let in_gamma = nf > 0.0;
        let in_gamma_eps = gamma_eps_bracket(eps, frame.f, frame.r, nf, nr) > 0.0;
        if in_gamma != in_gamma_eps {
            weights.push(s.weight);
        }
    }
    Ok(logsum::pairwise_sum(&weights))
}
