//! Truncated Taylor series at `z = 0`.
//!
//! A series of order `N` carries `c_0..=c_N`. Every binary operation yields
//! the smaller of the two operand orders; nothing is silently extended.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::coeffs::C64;
use crate::error::{CmvError, Result};

/// Relative threshold below which a constant term counts as zero in `div`.
pub const ZERO_CONSTANT_REL: f64 = 1e-13;
/// Tolerance for `root0^2 == a.c_0` in `sqrt_branch`.
pub const BRANCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaylorSeries {
    coeffs: Vec<C64>,
}

impl TaylorSeries {
    /// Series from `c_0..=c_N`. Panics on an empty vector.
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least c_0");
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(C64::new(0.0, 0.0), order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(C64::new(1.0, 0.0), order)
    }

    pub fn constant(c: C64, order: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// The series `z` truncated at `order` (requires `order >= 1` to be nonzero).
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = C64::new(1.0, 0.0);
        }
        s
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> C64) -> Self {
        Self {
            coeffs: (0..=order).map(f).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> C64 {
        self.coeffs[n]
    }

    pub fn constant_term(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Self {
            coeffs: self.coeffs[..=n].to_vec(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Multiply by `z`; order grows by one.
    pub fn mul_z(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(C64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Divide by `z`; order drops by one. The constant term is discarded and
    /// must already vanish to rounding (checked relative to the series scale).
    pub fn div_z(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(CmvError::OrderTooLow {
                needed: 1,
                available: 0,
            });
        }
        let scale = self.max_abs().max(1.0);
        if self.coeffs[0].norm() > 1e-10 * scale {
            return Err(CmvError::WrongConstantTerm {
                expected: "0".into(),
                found: format!("{}", self.coeffs[0]),
            });
        }
        Ok(Self {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::from_fn(n, |i| self.coeffs[i] + other.coeffs[i])
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::from_fn(n, |i| self.coeffs[i] - other.coeffs[i])
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::from_fn(n, |i| (0..=i).map(|j| self.coeffs[j] * other.coeffs[i - j]).sum())
    }

    pub fn add_const(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// `q` with `q * other == self` through the smaller order.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let b0 = other.coeffs[0];
        let scale = other.max_abs();
        if scale == 0.0 || b0.norm() < ZERO_CONSTANT_REL * scale {
            return Err(CmvError::ZeroConstantTerm("division"));
        }
        let n = self.order().min(other.order());
        let mut q: Vec<C64> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let acc: C64 = (1..=i).map(|j| other.coeffs[j] * q[i - j]).sum();
            q.push((self.coeffs[i] - acc) / b0);
        }
        Ok(Self { coeffs: q })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one(self.order()).div(self)
    }

    /// Square root whose constant term is pinned to `root0`.
    pub fn sqrt_branch(&self, root0: C64) -> Result<Self> {
        let a0 = self.coeffs[0];
        if root0.norm() == 0.0 || a0.norm() == 0.0 {
            return Err(CmvError::ZeroConstantTerm("square root at a branch point"));
        }
        if (root0 * root0 - a0).norm() > BRANCH_TOL * a0.norm().max(1.0) {
            return Err(CmvError::BranchMismatch {
                root_sq: format!("{}", root0 * root0),
                constant: format!("{a0}"),
            });
        }
        let n = self.order();
        let mut s: Vec<C64> = Vec::with_capacity(n + 1);
        s.push(root0);
        for i in 1..=n {
            let acc: C64 = (1..i).map(|j| s[j] * s[i - j]).sum();
            s.push((self.coeffs[i] - acc) / (root0 * 2.0));
        }
        Ok(Self { coeffs: s })
    }

    /// `(m11 * self + m12) / (m21 * self + m22)`.
    pub fn mobius(&self, m11: &Self, m12: &Self, m21: &Self, m22: &Self) -> Result<Self> {
        let num = m11.mul(self).add(m12);
        let den = m21.mul(self).add(m22);
        num.div(&den)
    }

    /// Mobius transform with constant matrix entries.
    pub fn mobius_const(&self, m11: C64, m12: C64, m21: C64, m22: C64) -> Result<Self> {
        let n = self.order();
        self.mobius(
            &Self::constant(m11, n),
            &Self::constant(m12, n),
            &Self::constant(m21, n),
            &Self::constant(m22, n),
        )
    }

    /// Largest `n` such that coefficients `0..=n` agree within
    /// `rel_tol * scale`, where `scale` is the largest coefficient magnitude
    /// seen in either series (at least 1). `None` when `c_0` already differs.
    pub fn agreement_order(&self, other: &Self, rel_tol: f64) -> Option<usize> {
        let n = self.order().min(other.order());
        let scale = self
            .truncate(n)
            .max_abs()
            .max(other.truncate(n).max_abs())
            .max(1.0);
        let mut last = None;
        for i in 0..=n {
            if (self.coeffs[i] - other.coeffs[i]).norm() > rel_tol * scale {
                break;
            }
            last = Some(i);
        }
        last
    }
}

impl Add for &TaylorSeries {
    type Output = TaylorSeries;
    fn add(self, rhs: Self) -> TaylorSeries {
        TaylorSeries::add(self, rhs)
    }
}

impl Sub for &TaylorSeries {
    type Output = TaylorSeries;
    fn sub(self, rhs: Self) -> TaylorSeries {
        TaylorSeries::sub(self, rhs)
    }
}

impl Mul for &TaylorSeries {
    type Output = TaylorSeries;
    fn mul(self, rhs: Self) -> TaylorSeries {
        TaylorSeries::mul(self, rhs)
    }
}

impl Neg for &TaylorSeries {
    type Output = TaylorSeries;
    fn neg(self) -> TaylorSeries {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl fmt::Display for TaylorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c}) z")?,
                _ => write!(f, "({c}) z^{i}")?,
            }
        }
        write!(f, " + O(z^{})", self.order() + 1)
    }
}
