//! Domains `U = G x Omega` (static) and their `t1`-modulated variants, with
//! boundary sampling, outward unit normals, and the spatial reach `R+`.
//!
//! `G` is the open temporal hypercube `(-T, T)^m`. The spatial factor is a
//! ball or an axis-aligned box; time-dependent domains modulate a ball's
//! centre and radius by polynomials in the first time coordinate. Only the
//! spatial part of the boundary is ever used: `dU = G x dOmega`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::fmath;
use crate::geometry::{PointRef, ReferencePoint, Signature, SpaceTimePoint};
use crate::Result;

/// Tolerance for boundary membership queries.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Polynomial in `t1` with coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * t + k as f64 * c)
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * t + (k * (k - 1)) as f64 * c)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|&c| c == 0.0)
    }
}

/// Spatial cross-section of the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialShape {
    /// Ball of fixed centre and radius.
    Ball { center: Vec<f64>, radius: f64 },
    /// Axis-aligned box `lo < x < hi`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Ball whose centre and radius vary with `t1`.
    MovingBall {
        center: Vec<Polynomial>,
        radius: Polynomial,
    },
}

/// The domain `U` with temporal half-side `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainModel {
    sig: Signature,
    t_half: f64,
    shape: SpatialShape,
}

/// One boundary quadrature sample: a point of `G x dOmega`, the outward unit
/// normal (unit w.r.t. the metric for moving domains, Euclidean otherwise),
/// and the surface measure of its patch.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: SpaceTimePoint,
    pub normal_t1: f64,
    pub normal_x: Vec<f64>,
    pub weight: f64,
    /// Flat index of the temporal grid slice the sample sits on; volume rules
    /// built from the same axes share these indices.
    pub t_index: usize,
}

/// Uniform midpoint axis over `(lo, hi)` with an optional stagger fraction of
/// the cell width (used to push nodes off measure-zero degeneracies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub stagger: f64,
}

impl Axis {
    pub fn midpoint(lo: f64, hi: f64, count: usize) -> Self {
        Self {
            lo,
            hi,
            count,
            stagger: 0.0,
        }
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5 + self.stagger) * self.step()
    }
}

/// Flat iteration over a tensor product of axes.
pub(crate) fn tensor_len(axes: &[Axis]) -> usize {
    axes.iter().map(|a| a.count).product()
}

pub(crate) fn tensor_node(axes: &[Axis], mut flat: usize, out: &mut [f64]) {
    for (k, ax) in axes.iter().enumerate().rev() {
        out[k] = ax.node(flat % ax.count);
        flat /= ax.count;
    }
}

/// Time-independent piece of one boundary patch.
enum SpatialPatch {
    /// Unit direction and angular weight on the sphere.
    Sphere { omega: Vec<f64>, w: f64 },
    /// Box face node with its fixed outward normal and face-cell measure.
    Face {
        x: Vec<f64>,
        normal: Vec<f64>,
        w: f64,
    },
}

impl DomainModel {
    /// Static domain `(-T,T)^m x Omega`.
    pub fn new_static(sig: Signature, t_half: f64, shape: SpatialShape) -> Result<Self> {
        if t_half <= 0.0 {
            return Err(Error::InvalidDomain(String::from("T must be positive")));
        }
        match &shape {
            SpatialShape::Ball { center, radius } => {
                if center.len() != sig.n() {
                    return Err(Error::DimensionMismatch {
                        name: "center",
                        expected: sig.n(),
                        got: center.len(),
                    });
                }
                if *radius <= 0.0 {
                    return Err(Error::InvalidDomain(String::from(
                        "ball radius must be positive",
                    )));
                }
            }
            SpatialShape::Box { lo, hi } => {
                if lo.len() != sig.n() || hi.len() != sig.n() {
                    return Err(Error::DimensionMismatch {
                        name: "box bounds",
                        expected: sig.n(),
                        got: lo.len().min(hi.len()),
                    });
                }
                if lo.iter().zip(hi).any(|(a, b)| a >= b) {
                    return Err(Error::InvalidDomain(String::from(
                        "box requires lo < hi componentwise",
                    )));
                }
            }
            SpatialShape::MovingBall { .. } => {
                return Err(Error::InvalidDomain(String::from(
                    "moving shapes go through new_moving",
                )))
            }
        }
        Ok(Self { sig, t_half, shape })
    }

    /// Time-dependent ball; the radius must stay positive on `[-T, T]`.
    pub fn new_moving(
        sig: Signature,
        t_half: f64,
        center: Vec<Polynomial>,
        radius: Polynomial,
    ) -> Result<Self> {
        if t_half <= 0.0 {
            return Err(Error::InvalidDomain(String::from("T must be positive")));
        }
        if center.len() != sig.n() {
            return Err(Error::DimensionMismatch {
                name: "center",
                expected: sig.n(),
                got: center.len(),
            });
        }
        let dom = Self {
            sig,
            t_half,
            shape: SpatialShape::MovingBall { center, radius },
        };
        let (rho_min, _) = dom.radius_range();
        if rho_min <= 0.0 {
            return Err(Error::InvalidDomain(format!(
                "radius profile reaches {rho_min:.6} on [-T, T]"
            )));
        }
        Ok(dom)
    }

    #[inline]
    pub fn sig(&self) -> Signature {
        self.sig
    }

    #[inline]
    pub fn t_half(&self) -> f64 {
        self.t_half
    }

    #[inline]
    pub fn shape(&self) -> &SpatialShape {
        &self.shape
    }

    pub fn is_moving(&self) -> bool {
        match &self.shape {
            SpatialShape::MovingBall { center, radius } => {
                !radius.is_constant() || center.iter().any(|c| !c.is_constant())
            }
            _ => false,
        }
    }

    fn radius_range(&self) -> (f64, f64) {
        match &self.shape {
            SpatialShape::Ball { radius, .. } => (*radius, *radius),
            SpatialShape::Box { .. } => (0.0, 0.0),
            SpatialShape::MovingBall { radius, .. } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for k in 0..=4096 {
                    let t1 = -self.t_half + 2.0 * self.t_half * k as f64 / 4096.0;
                    let r = radius.eval(t1);
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
                (lo, hi)
            }
        }
    }

    /// Ball centre and radius at a time slice (static shapes ignore `t1`).
    pub fn ball_at(&self, t1: f64) -> Option<(Vec<f64>, f64)> {
        match &self.shape {
            SpatialShape::Ball { center, radius } => Some((center.clone(), *radius)),
            SpatialShape::MovingBall { center, radius } => {
                Some((center.iter().map(|c| c.eval(t1)).collect(), radius.eval(t1)))
            }
            SpatialShape::Box { .. } => None,
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, q: PointRef<'_>) -> bool {
        if q.t.iter().any(|&ti| fmath::abs(ti) >= self.t_half) {
            return false;
        }
        match &self.shape {
            SpatialShape::Ball { center, radius } => dist(q.x, center) < *radius,
            SpatialShape::Box { lo, hi } => {
                q.x.iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(x, (a, b))| *a < *x && *x < *b)
            }
            SpatialShape::MovingBall { .. } => {
                let (c, rho) = self.ball_at(q.t[0]).unwrap();
                dist(q.x, &c) < rho
            }
        }
    }

    /// Axis-aligned bounding box of the spatial cross-sections.
    pub fn spatial_bbox(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            SpatialShape::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            SpatialShape::Box { lo, hi } => (lo.clone(), hi.clone()),
            SpatialShape::MovingBall { .. } => {
                let n = self.sig.n();
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for k in 0..=2048 {
                    let t1 = -self.t_half + 2.0 * self.t_half * k as f64 / 2048.0;
                    let (c, rho) = self.ball_at(t1).unwrap();
                    for j in 0..n {
                        lo[j] = lo[j].min(c[j] - rho);
                        hi[j] = hi[j].max(c[j] + rho);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Boundary samples of `G x dOmega` on a plain midpoint temporal grid.
    ///
    /// Weights sum to the surface area at first order in the resolution.
    pub fn sample_boundary(
        &self,
        res_time: usize,
        res_angular: usize,
    ) -> Result<Vec<BoundarySample>> {
        let axes: Vec<Axis> = (0..self.sig.m())
            .map(|_| Axis::midpoint(-self.t_half, self.t_half, res_time.max(1)))
            .collect();
        self.boundary_mesh(&axes, res_angular)
    }

    /// Boundary samples on caller-provided temporal axes; volume rules built
    /// from the same axes share slice indices with these samples.
    pub fn boundary_mesh(
        &self,
        t_axes: &[Axis],
        res_angular: usize,
    ) -> Result<Vec<BoundarySample>> {
        if t_axes.len() != self.sig.m() {
            return Err(Error::DimensionMismatch {
                name: "t_axes",
                expected: self.sig.m(),
                got: t_axes.len(),
            });
        }
        let res_angular = res_angular.max(1);
        let spatial = self.spatial_patches(res_angular)?;
        let nt = tensor_len(t_axes);
        let mut t = vec![0.0; self.sig.m()];
        let mut out = Vec::with_capacity(nt * spatial.len());
        let mut w_t_total = 1.0;
        for ax in t_axes {
            w_t_total *= ax.step();
        }
        for ti in 0..nt {
            tensor_node(t_axes, ti, &mut t);
            for patch in &spatial {
                out.push(self.boundary_sample_at(&t, ti, patch, w_t_total)?);
            }
        }
        Ok(out)
    }

    /// Spatial boundary patches independent of time (unit directions for
    /// balls, face nodes for boxes).
    fn spatial_patches(&self, res: usize) -> Result<Vec<SpatialPatch>> {
        match &self.shape {
            SpatialShape::Ball { .. } | SpatialShape::MovingBall { .. } => {
                Ok(unit_sphere_mesh(self.sig.n(), res)
                    .into_iter()
                    .map(|(omega, w)| SpatialPatch::Sphere { omega, w })
                    .collect())
            }
            SpatialShape::Box { lo, hi } => {
                let n = self.sig.n();
                let mut patches = Vec::new();
                for j in 0..n {
                    for side in [false, true] {
                        // Midpoint grid over the face interior; corners are
                        // never sampled.
                        let face_axes: Vec<Axis> = (0..n)
                            .filter(|k| *k != j)
                            .map(|k| Axis::midpoint(lo[k], hi[k], res))
                            .collect();
                        let cells = tensor_len(&face_axes).max(1);
                        let mut w = 1.0;
                        for ax in &face_axes {
                            w *= ax.step();
                        }
                        let mut buf = vec![0.0; face_axes.len()];
                        for flat in 0..cells {
                            tensor_node(&face_axes, flat, &mut buf);
                            let mut x = vec![0.0; n];
                            let mut bi = 0;
                            for (k, xk) in x.iter_mut().enumerate() {
                                if k == j {
                                    *xk = if side { hi[j] } else { lo[j] };
                                } else {
                                    *xk = buf[bi];
                                    bi += 1;
                                }
                            }
                            let mut normal = vec![0.0; n];
                            normal[j] = if side { 1.0 } else { -1.0 };
                            patches.push(SpatialPatch::Face { x, normal, w });
                        }
                    }
                }
                Ok(patches)
            }
        }
    }

    fn boundary_sample_at(
        &self,
        t: &[f64],
        t_index: usize,
        patch: &SpatialPatch,
        w_t: f64,
    ) -> Result<BoundarySample> {
        match (&self.shape, patch) {
            (SpatialShape::Ball { center, radius }, SpatialPatch::Sphere { omega, w }) => {
                let x: Vec<f64> = center
                    .iter()
                    .zip(omega)
                    .map(|(c, o)| c + radius * o)
                    .collect();
                let area_factor = fmath::powi(*radius, (self.sig.n() - 1) as u32);
                Ok(BoundarySample {
                    point: SpaceTimePoint::new(t.to_vec(), x),
                    normal_t1: 0.0,
                    normal_x: omega.clone(),
                    weight: w_t * area_factor * w,
                    t_index,
                })
            }
            (SpatialShape::MovingBall { center, radius }, SpatialPatch::Sphere { omega, w }) => {
                let t1 = t[0];
                let rho = radius.eval(t1);
                let rho_d = radius.deriv(t1);
                let c: Vec<f64> = center.iter().map(|c| c.eval(t1)).collect();
                let c_d: Vec<f64> = center.iter().map(|c| c.deriv(t1)).collect();
                let x: Vec<f64> = c.iter().zip(omega).map(|(ci, o)| ci + rho * o).collect();
                // Boundary slope along t1 seen from the outward direction.
                let s = fmath::dot(omega, &c_d) + rho_d;
                if fmath::abs(s) >= 1.0 {
                    return Err(Error::NotTimelike {
                        slope: fmath::abs(s),
                        t1,
                    });
                }
                let gamma = fmath::sqrt(1.0 - s * s);
                let area_factor =
                    fmath::powi(rho, (self.sig.n() - 1) as u32) * fmath::sqrt(1.0 + s * s);
                Ok(BoundarySample {
                    point: SpaceTimePoint::new(t.to_vec(), x),
                    normal_t1: s / gamma,
                    normal_x: omega.iter().map(|o| o / gamma).collect(),
                    weight: w_t * area_factor * w,
                    t_index,
                })
            }
            (SpatialShape::Box { .. }, SpatialPatch::Face { x, normal, w }) => Ok(BoundarySample {
                point: SpaceTimePoint::new(t.to_vec(), x.clone()),
                normal_t1: 0.0,
                normal_x: normal.clone(),
                weight: w_t * w,
                t_index,
            }),
            _ => Err(Error::Unsupported(String::from(
                "shape/patch combination out of sync",
            ))),
        }
    }

    /// Outward unit normal at a boundary point.
    ///
    /// Static domains return the Euclidean unit normal with `nu_t1 = 0`;
    /// moving domains return the metric-unit outward normal, which flips the
    /// sign of the temporal gradient component and requires a timelike
    /// boundary.
    pub fn outward_normal(&self, q: PointRef<'_>) -> Result<(f64, Vec<f64>)> {
        q.check(self.sig)?;
        if q.t
            .iter()
            .any(|&ti| fmath::abs(ti) > self.t_half + BOUNDARY_TOL)
        {
            return Err(Error::NotOnBoundary {
                distance: q
                    .t
                    .iter()
                    .map(|&ti| (fmath::abs(ti) - self.t_half).max(0.0))
                    .fold(0.0, f64::max),
                tol: BOUNDARY_TOL,
            });
        }
        match &self.shape {
            SpatialShape::Ball { center, radius } => {
                let r = dist(q.x, center);
                let d = fmath::abs(r - radius);
                if d > BOUNDARY_TOL {
                    return Err(Error::NotOnBoundary {
                        distance: d,
                        tol: BOUNDARY_TOL,
                    });
                }
                Ok((
                    0.0,
                    q.x.iter().zip(center).map(|(x, c)| (x - c) / r).collect(),
                ))
            }
            SpatialShape::Box { lo, hi } => {
                let inside =
                    q.x.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(x, (a, b))| *x >= a - BOUNDARY_TOL && *x <= b + BOUNDARY_TOL);
                let mut best: Option<(f64, usize, f64)> = None;
                for j in 0..self.sig.n() {
                    for (face, sign) in [(lo[j], -1.0), (hi[j], 1.0)] {
                        let d = fmath::abs(q.x[j] - face);
                        if best.map(|(bd, _, _)| d < bd).unwrap_or(true) {
                            best = Some((d, j, sign));
                        }
                    }
                }
                let (d, j, sign) = best.unwrap();
                if !inside || d > BOUNDARY_TOL {
                    return Err(Error::NotOnBoundary {
                        distance: d,
                        tol: BOUNDARY_TOL,
                    });
                }
                let mut normal = vec![0.0; self.sig.n()];
                normal[j] = sign;
                Ok((0.0, normal))
            }
            SpatialShape::MovingBall { center, radius } => {
                let t1 = q.t[0];
                let rho = radius.eval(t1);
                let c: Vec<f64> = center.iter().map(|c| c.eval(t1)).collect();
                let r = dist(q.x, &c);
                let d = fmath::abs(r - rho);
                if d > BOUNDARY_TOL {
                    return Err(Error::NotOnBoundary {
                        distance: d,
                        tol: BOUNDARY_TOL,
                    });
                }
                let omega: Vec<f64> = q.x.iter().zip(&c).map(|(x, ci)| (x - ci) / r).collect();
                let s = fmath::dot(
                    &omega,
                    &center.iter().map(|c| c.deriv(t1)).collect::<Vec<_>>(),
                ) + radius.deriv(t1);
                if fmath::abs(s) >= 1.0 {
                    return Err(Error::NotTimelike {
                        slope: fmath::abs(s),
                        t1,
                    });
                }
                let gamma = fmath::sqrt(1.0 - s * s);
                Ok((s / gamma, omega.iter().map(|o| o / gamma).collect()))
            }
        }
    }

    /// `N f_p` at a boundary point: `nu_x . x_p / 2` for static domains and
    /// `(nu_x . x_p - nu_t1 t_{p,1}) / 2` for moving ones.
    pub fn normal_f(&self, q: PointRef<'_>, p: &ReferencePoint) -> Result<f64> {
        let (nt1, nx) = self.outward_normal(q)?;
        Ok(normal_f_from(&nx, nt1, q, p))
    }

    /// `N r_p = nu_x . x_p / r_p` (independent of time, so the same formula
    /// serves static and moving domains).
    pub fn normal_r(&self, q: PointRef<'_>, p: &ReferencePoint) -> Result<f64> {
        let (_, nx) = self.outward_normal(q)?;
        normal_r_from(&nx, q, p)
    }

    /// Spatial reach `R+ = sup_{U ∩ D_p} r_p`.
    ///
    /// Exact for static balls and boxes; moving balls use a dense `t1` scan
    /// inflated by a step-times-slope bound. Errors when the domain misses
    /// the cone exterior entirely.
    pub fn r_plus(&self, p: &ReferencePoint) -> Result<f64> {
        p.check(self.sig)?;
        let sup = match &self.shape {
            SpatialShape::Ball { center, radius } => dist(center, &p.x) + radius,
            SpatialShape::Box { lo, hi } => {
                let n = self.sig.n();
                let mut best = 0.0f64;
                for corner in 0..(1usize << n) {
                    let mut d2 = 0.0;
                    for j in 0..n {
                        let c = if corner >> j & 1 == 1 { hi[j] } else { lo[j] };
                        d2 += (c - p.x[j]) * (c - p.x[j]);
                    }
                    best = best.max(fmath::sqrt(d2));
                }
                best
            }
            SpatialShape::MovingBall { center, radius } => {
                const K: usize = 8192;
                let h = 2.0 * self.t_half / K as f64;
                let mut best = 0.0f64;
                let mut slope = 0.0f64;
                for k in 0..=K {
                    let t1 = -self.t_half + k as f64 * h;
                    let c: Vec<f64> = center.iter().map(|c| c.eval(t1)).collect();
                    let g = dist(&c, &p.x) + radius.eval(t1);
                    best = best.max(g);
                    let cd = fmath::norm(&center.iter().map(|c| c.deriv(t1)).collect::<Vec<_>>());
                    slope = slope.max(cd + fmath::abs(radius.deriv(t1)));
                }
                best + 0.5 * h * slope
            }
        };
        if !self.meets_exterior(p, sup) {
            return Err(Error::EmptyExterior);
        }
        Ok(sup)
    }

    /// Whether `U ∩ D_p` is nonempty, given the spatial reach bound.
    fn meets_exterior(&self, p: &ReferencePoint, r_sup: f64) -> bool {
        if r_sup <= 0.0 {
            return false;
        }
        // Distance from t(p) to the closed temporal hypercube.
        let clamp_dist = |coords: &[f64]| -> f64 {
            fmath::sqrt(
                coords
                    .iter()
                    .map(|&c| {
                        let d = (fmath::abs(c) - self.t_half).max(0.0);
                        d * d
                    })
                    .sum(),
            )
        };
        match &self.shape {
            SpatialShape::MovingBall { center, radius } => {
                let d_rest = clamp_dist(&p.t[1..]);
                const K: usize = 2048;
                (0..=K).any(|k| {
                    let t1 = -self.t_half + 2.0 * self.t_half * k as f64 / K as f64;
                    let c: Vec<f64> = center.iter().map(|c| c.eval(t1)).collect();
                    let reach = dist(&c, &p.x) + radius.eval(t1);
                    let dt1 = t1 - p.t[0];
                    fmath::sqrt(dt1 * dt1 + d_rest * d_rest) < reach
                })
            }
            _ => clamp_dist(&p.t) < r_sup,
        }
    }

    /// Reparametrize a moving ball onto the static ball at `t1 = 0`.
    pub fn static_reparametrize(&self) -> Result<(DomainModel, StaticMap)> {
        let SpatialShape::MovingBall { center, radius } = &self.shape else {
            return Err(Error::Unsupported(String::from(
                "static_reparametrize expects a moving ball",
            )));
        };
        let (rho_min, _) = self.radius_range();
        if rho_min <= 0.0 {
            return Err(Error::InvalidDomain(format!(
                "radius profile reaches {rho_min:.6} on [-T, T]"
            )));
        }
        let rho0 = radius.eval(0.0);
        let c0: Vec<f64> = center.iter().map(|c| c.eval(0.0)).collect();
        let base = DomainModel::new_static(
            self.sig,
            self.t_half,
            SpatialShape::Ball {
                center: c0.clone(),
                radius: rho0,
            },
        )?;
        Ok((
            base,
            StaticMap {
                sig: self.sig,
                center: center.clone(),
                radius: radius.clone(),
                c0,
                rho0,
            },
        ))
    }
}

/// `N f_p` from explicit normal components.
pub fn normal_f_from(normal_x: &[f64], normal_t1: f64, q: PointRef<'_>, p: &ReferencePoint) -> f64 {
    let mut acc = 0.0;
    for ((xq, xp), nu) in q.x.iter().zip(&p.x).zip(normal_x) {
        acc += nu * (xq - xp);
    }
    acc -= normal_t1 * (q.t[0] - p.t[0]);
    0.5 * acc
}

/// `N r_p` from explicit normal components; degenerate when `r_p = 0`.
pub fn normal_r_from(normal_x: &[f64], q: PointRef<'_>, p: &ReferencePoint) -> Result<f64> {
    let mut acc = 0.0;
    let mut r2 = 0.0;
    for ((xq, xp), nu) in q.x.iter().zip(&p.x).zip(normal_x) {
        acc += nu * (xq - xp);
        r2 += (xq - xp) * (xq - xp);
    }
    let r = fmath::sqrt(r2);
    if r == 0.0 {
        return Err(Error::DegenerateFrame { which: "r_p" });
    }
    Ok(acc / r)
}

/// Similarity map carrying the static ball cylinder onto a moving-ball
/// domain, slice by slice.
#[derive(Debug, Clone)]
pub struct StaticMap {
    sig: Signature,
    center: Vec<Polynomial>,
    radius: Polynomial,
    c0: Vec<f64>,
    rho0: f64,
}

impl StaticMap {
    /// `Phi(t, x) = (t, center(t1) + rho(t1)/rho(0) * (x - center(0)))`.
    pub fn forward(&self, q: PointRef<'_>) -> Result<SpaceTimePoint> {
        q.check(self.sig)?;
        let t1 = q.t[0];
        let scale = self.radius.eval(t1) / self.rho0;
        let x =
            q.x.iter()
                .zip(&self.c0)
                .zip(self.center.iter())
                .map(|((x, c0), c)| c.eval(t1) + scale * (x - c0))
                .collect();
        Ok(SpaceTimePoint::new(q.t.to_vec(), x))
    }

    /// Jacobian determinant of the spatial similarity, `(rho(t1)/rho(0))^n`.
    pub fn jacobian_det(&self, t1: f64) -> f64 {
        fmath::powi(self.radius.eval(t1) / self.rho0, self.sig.n() as u32)
    }
}

/// Midpoint mesh of the unit sphere `S^{n-1}` for n in {1, 2, 3}; weights sum
/// to the sphere area (2, 2*pi, 4*pi) at first order.
pub fn unit_sphere_mesh(n: usize, res: usize) -> Vec<(Vec<f64>, f64)> {
    match n {
        1 => vec![(vec![-1.0], 1.0), (vec![1.0], 1.0)],
        2 => {
            let step = core::f64::consts::TAU / res as f64;
            (0..res)
                .map(|j| {
                    let theta = (j as f64 + 0.5) * step;
                    (vec![fmath::cos(theta), fmath::sin(theta)], step)
                })
                .collect()
        }
        3 => {
            let n_polar = res;
            let n_azimuth = 2 * res;
            let d_polar = core::f64::consts::PI / n_polar as f64;
            let d_azimuth = core::f64::consts::TAU / n_azimuth as f64;
            let mut out = Vec::with_capacity(n_polar * n_azimuth);
            for i in 0..n_polar {
                let theta = (i as f64 + 0.5) * d_polar;
                let (st, ct) = (fmath::sin(theta), fmath::cos(theta));
                for j in 0..n_azimuth {
                    let phi = (j as f64 + 0.5) * d_azimuth;
                    out.push((
                        vec![st * fmath::cos(phi), st * fmath::sin(phi), ct],
                        st * d_polar * d_azimuth,
                    ));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

#[inline]
fn dist(a: &[f64], b: &[f64]) -> f64 {
    fmath::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sig(m: usize, n: usize) -> Signature {
        Signature::new(m, n).unwrap()
    }

    fn ball(m: usize, n: usize, t_half: f64, radius: f64) -> DomainModel {
        DomainModel::new_static(
            sig(m, n),
            t_half,
            SpatialShape::Ball {
                center: vec![0.0; n],
                radius,
            },
        )
        .unwrap()
    }

    #[test]
    fn cylinder_boundary_area() {
        // Unit ball in n=2, m=1, T=3: area = 2T * 2*pi*rho = 12*pi.
        let dom = ball(1, 2, 3.0, 1.0);
        let samples = dom.sample_boundary(64, 256).unwrap();
        let total: f64 = samples.iter().map(|s| s.weight).sum();
        assert_relative_eq!(total, 12.0 * core::f64::consts::PI, max_relative = 1e-3);
    }

    #[test]
    fn box_boundary_area_exact() {
        // Box [-1,1]^2, m=1, T=1: boundary measure 2 * 8 = 16.
        let dom = DomainModel::new_static(
            sig(1, 2),
            1.0,
            SpatialShape::Box {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
        )
        .unwrap();
        let samples = dom.sample_boundary(8, 8).unwrap();
        let total: f64 = samples.iter().map(|s| s.weight).sum();
        assert_relative_eq!(total, 16.0, max_relative = 1e-12);
    }

    #[test]
    fn outward_normals_leave_domain() {
        let dom = ball(1, 2, 2.0, 1.0);
        for s in dom.sample_boundary(8, 32).unwrap() {
            let q = &s.point;
            let eps = 1e-6;
            let t_out: Vec<f64> = q.t.iter().map(|&ti| ti + eps * s.normal_t1).collect();
            let x_out: Vec<f64> =
                q.x.iter()
                    .zip(&s.normal_x)
                    .map(|(x, n)| x + eps * n)
                    .collect();
            assert!(!dom.contains(PointRef::new(&t_out, &x_out)));
            let t_in: Vec<f64> = q.t.iter().map(|&ti| ti - eps * s.normal_t1).collect();
            let x_in: Vec<f64> =
                q.x.iter()
                    .zip(&s.normal_x)
                    .map(|(x, n)| x - eps * n)
                    .collect();
            assert!(dom.contains(PointRef::new(&t_in, &x_in)));
        }
    }

    #[test]
    fn moving_ball_timelike_normals() {
        let dom = DomainModel::new_moving(
            sig(1, 2),
            2.0,
            vec![Polynomial::constant(0.0), Polynomial::constant(0.0)],
            Polynomial::new(vec![1.0, 0.1]),
        )
        .unwrap();
        let samples = dom.sample_boundary(16, 64).unwrap();
        for s in &samples {
            let nx = fmath::norm(&s.normal_x);
            assert!(fmath::abs(s.normal_t1) < nx, "normal must be spacelike");
            // Metric-unit: -nu_t1^2 + |nu_x|^2 = 1.
            assert_relative_eq!(
                nx * nx - s.normal_t1 * s.normal_t1,
                1.0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn static_ball_normal_examples() {
        let dom = ball(1, 2, 2.0, 1.0);
        let q = SpaceTimePoint::new(vec![0.5], vec![1.0, 0.0]);
        let (nt1, nx) = dom.outward_normal(q.as_ref()).unwrap();
        assert_eq!(nt1, 0.0);
        assert_relative_eq!(nx[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(nx[1], 0.0, max_relative = 1e-12);

        let p0 = SpaceTimePoint::zero(sig(1, 2));
        assert_relative_eq!(
            dom.normal_f(q.as_ref(), &p0).unwrap(),
            0.5,
            max_relative = 1e-12
        );

        let p2 = SpaceTimePoint::new(vec![0.0], vec![2.0, 0.0]);
        assert_relative_eq!(
            dom.normal_f(q.as_ref(), &p2).unwrap(),
            -0.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn box_face_normal() {
        let dom = DomainModel::new_static(
            sig(1, 2),
            1.0,
            SpatialShape::Box {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
        )
        .unwrap();
        let q = SpaceTimePoint::new(vec![0.0], vec![1.0, 0.25]);
        let (_, nx) = dom.outward_normal(q.as_ref()).unwrap();
        assert_eq!(nx, vec![1.0, 0.0]);
    }

    #[test]
    fn not_on_boundary_diagnostic() {
        let dom = ball(1, 2, 2.0, 1.0);
        let q = SpaceTimePoint::new(vec![0.0], vec![0.5, 0.0]);
        match dom.outward_normal(q.as_ref()) {
            Err(Error::NotOnBoundary { distance, .. }) => {
                assert_relative_eq!(distance, 0.5, max_relative = 1e-12)
            }
            other => panic!("expected boundary error, got {other:?}"),
        }
    }

    #[test]
    fn r_plus_examples() {
        let dom = ball(1, 2, 4.0, 1.0);
        let p0 = SpaceTimePoint::zero(sig(1, 2));
        assert_relative_eq!(dom.r_plus(&p0).unwrap(), 1.0, max_relative = 1e-12);

        let p2 = SpaceTimePoint::new(vec![0.0], vec![2.0, 0.0]);
        assert_relative_eq!(dom.r_plus(&p2).unwrap(), 3.0, max_relative = 1e-12);

        let bx = DomainModel::new_static(
            sig(1, 2),
            2.0,
            SpatialShape::Box {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
        )
        .unwrap();
        assert_relative_eq!(bx.r_plus(&p0).unwrap(), 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn r_plus_detects_empty_intersection() {
        let dom = ball(1, 2, 1.0, 1.0);
        // Reference far in the past: |t - t(p)| >= 4 on G but r_p <= 3.
        let p = SpaceTimePoint::new(vec![-5.0], vec![2.0, 0.0]);
        assert_eq!(dom.r_plus(&p), Err(Error::EmptyExterior));
    }

    #[test]
    fn reparametrization_identity_for_constant_profiles() {
        let dom = DomainModel::new_moving(
            sig(1, 2),
            1.5,
            vec![Polynomial::constant(0.3), Polynomial::constant(0.0)],
            Polynomial::constant(1.0),
        )
        .unwrap();
        let (base, map) = dom.static_reparametrize().unwrap();
        assert!(!dom.is_moving());
        assert_eq!(base.sig(), dom.sig());
        let q = SpaceTimePoint::new(vec![0.7], vec![0.5, -0.2]);
        let out = map.forward(q.as_ref()).unwrap();
        assert_eq!(out, q);
        assert_eq!(map.jacobian_det(0.7), 1.0);
    }

    #[test]
    fn reparametrization_maps_boundary_to_boundary() {
        let dom = DomainModel::new_moving(
            sig(1, 2),
            1.5,
            vec![Polynomial::constant(0.0), Polynomial::constant(0.0)],
            Polynomial::new(vec![1.0, 0.1]),
        )
        .unwrap();
        let (base, map) = dom.static_reparametrize().unwrap();
        for s in base.sample_boundary(8, 32).unwrap() {
            let mapped = map.forward(s.point.as_ref()).unwrap();
            let t1 = mapped.t[0];
            let (c, rho) = dom.ball_at(t1).unwrap();
            let r = dist(&mapped.x, &c);
            assert_relative_eq!(r, rho, max_relative = 1e-10);
        }
        // Similarity scaling of volume.
        let rho_ratio = dom.ball_at(1.0).unwrap().1 / dom.ball_at(0.0).unwrap().1;
        assert_relative_eq!(
            map.jacobian_det(1.0),
            rho_ratio * rho_ratio,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sphere_mesh_areas() {
        let s1: f64 = unit_sphere_mesh(1, 8).iter().map(|(_, w)| w).sum();
        assert_eq!(s1, 2.0);
        let s2: f64 = unit_sphere_mesh(2, 128).iter().map(|(_, w)| w).sum();
        assert_relative_eq!(s2, core::f64::consts::TAU, max_relative = 1e-12);
        let s3: f64 = unit_sphere_mesh(3, 64).iter().map(|(_, w)| w).sum();
        assert_relative_eq!(s3, 4.0 * core::f64::consts::PI, max_relative = 1e-3);
    }
}
