//! Second-order jets: (value, gradient, hessian) triples with exact
//! product/chain-rule arithmetic. Dimensions stay small (m + n <= a handful),
//! so dense symmetric storage is fine.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;

/// Value, gradient, and dense symmetric Hessian of a scalar at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: Vec<f64>,
    /// Row-major `d x d`, kept symmetric by construction.
    pub h: Vec<f64>,
}

impl Jet2 {
    pub fn zero(d: usize) -> Self {
        Self {
            v: 0.0,
            g: vec![0.0; d],
            h: vec![0.0; d * d],
        }
    }

    pub fn constant(c: f64, d: usize) -> Self {
        let mut jet = Self::zero(d);
        jet.v = c;
        jet
    }

    /// The `i`-th coordinate with the given value.
    pub fn coordinate(i: usize, value: f64, d: usize) -> Self {
        let mut jet = Self::zero(d);
        jet.v = value;
        jet.g[i] = 1.0;
        jet
    }

    /// Linear form `c + sum coeff_i x_i` evaluated at `x`.
    pub fn linear(coeffs: &[f64], x: &[f64], c: f64) -> Self {
        let d = coeffs.len();
        let mut jet = Self::zero(d);
        jet.v = c + fmath::dot(coeffs, x);
        jet.g.copy_from_slice(coeffs);
        jet
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.g.len()
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.dim() + j]
    }

    pub fn add(&self, other: &Jet2) -> Jet2 {
        let mut out = self.clone();
        out.v += other.v;
        for (a, b) in out.g.iter_mut().zip(&other.g) {
            *a += b;
        }
        for (a, b) in out.h.iter_mut().zip(&other.h) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Jet2) -> Jet2 {
        let mut out = self.clone();
        out.v -= other.v;
        for (a, b) in out.g.iter_mut().zip(&other.g) {
            *a -= b;
        }
        for (a, b) in out.h.iter_mut().zip(&other.h) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        let mut out = self.clone();
        out.v *= c;
        for a in &mut out.g {
            *a *= c;
        }
        for a in &mut out.h {
            *a *= c;
        }
        out
    }

    /// Product rule: `H(fg) = H(f) g + grad f grad g^T + grad g grad f^T + f H(g)`.
    pub fn mul(&self, other: &Jet2) -> Jet2 {
        let d = self.dim();
        let mut out = Jet2::zero(d);
        out.v = self.v * other.v;
        for i in 0..d {
            out.g[i] = self.g[i] * other.v + self.v * other.g[i];
        }
        for i in 0..d {
            for j in 0..d {
                out.h[i * d + j] = self.h[i * d + j] * other.v
                    + self.g[i] * other.g[j]
                    + other.g[i] * self.g[j]
                    + self.v * other.h[i * d + j];
            }
        }
        out
    }

    /// Chain rule through a univariate C^2 function given as
    /// `(phi(u), phi'(u), phi''(u))` at `u = self.v`.
    pub fn compose(&self, value: f64, d1: f64, d2: f64) -> Jet2 {
        let d = self.dim();
        let mut out = Jet2::zero(d);
        out.v = value;
        for i in 0..d {
            out.g[i] = d1 * self.g[i];
        }
        for i in 0..d {
            for j in 0..d {
                out.h[i * d + j] = d2 * self.g[i] * self.g[j] + d1 * self.h[i * d + j];
            }
        }
        out
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = (fmath::sin(self.v), fmath::cos(self.v));
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = (fmath::sin(self.v), fmath::cos(self.v));
        self.compose(c, -s, -c)
    }

    /// Integer power by repeated multiplication (exact product rule).
    pub fn powi(&self, k: u32) -> Jet2 {
        let d = self.dim();
        let mut acc = Jet2::constant(1.0, d);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}
