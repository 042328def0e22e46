//! Moments of the half-lattice spectral measures and the conversions
//! between `m_±`, `M_±` and `Φ_±`.
//!
//! Minus-side `Φ` data is always carried as the reciprocal `1/Φ_-`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cmv::{half_minus, half_plus, resolvent_entry, FiniteCmv};
use crate::coeffs::{derived, VerblunskyWindow, C64};
use crate::error::{CmvError, Result};
use crate::laurent::Side;
use crate::series::TaylorSeries;

/// Tolerance for the `±1` constant term of `m_±`.
pub const CONSTANT_TOL: f64 = 1e-10;

/// Truncation radius below which moments of order `N` are flagged.
pub fn min_radius(order: usize) -> usize {
    2 * order + 6
}

/// `c_1..=c_N` of a probability measure on the circle; `c_0 = 1` is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMoments", into = "RawMoments")]
pub struct MomentSequence {
    c: Vec<C64>,
    radius_warning: bool,
}

#[derive(Serialize, Deserialize)]
struct RawMoments {
    order: usize,
    c: Vec<C64>,
}

impl TryFrom<RawMoments> for MomentSequence {
    type Error = CmvError;

    fn try_from(raw: RawMoments) -> Result<Self> {
        if raw.c.len() != raw.order {
            return Err(CmvError::Json(format!(
                "order {} but {} moments given",
                raw.order,
                raw.c.len()
            )));
        }
        Ok(MomentSequence::new(raw.c))
    }
}

impl From<MomentSequence> for RawMoments {
    fn from(m: MomentSequence) -> Self {
        RawMoments {
            order: m.c.len(),
            c: m.c,
        }
    }
}

impl MomentSequence {
    pub fn new(c: Vec<C64>) -> Self {
        Self {
            c,
            radius_warning: false,
        }
    }

    /// Normalized arc length: every positive moment vanishes.
    pub fn lebesgue(order: usize) -> Self {
        Self::new(vec![C64::new(0.0, 0.0); order])
    }

    pub fn order(&self) -> usize {
        self.c.len()
    }

    /// `c_1..=c_N`.
    pub fn positive(&self) -> &[C64] {
        &self.c
    }

    /// `c_k` for any integer `k`, with `c_{-k} = conj(c_k)`.
    pub fn moment(&self, k: i64) -> Result<C64> {
        let n = k.unsigned_abs() as usize;
        if n == 0 {
            return Ok(C64::new(1.0, 0.0));
        }
        if n > self.c.len() {
            return Err(CmvError::InsufficientMoments {
                needed: n,
                available: self.c.len(),
            });
        }
        let v = self.c[n - 1];
        Ok(if k > 0 { v } else { v.conj() })
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self {
            c: self.c[..order.min(self.c.len())].to_vec(),
            radius_warning: self.radius_warning,
        }
    }

    /// Set when the operator these came from was truncated closer than
    /// [`min_radius`] to the base site.
    pub fn radius_warning(&self) -> bool {
        self.radius_warning
    }

    /// The Hermitian Toeplitz matrix `T[i][j] = c_{j-i}`, `0 <= i, j <= N`.
    pub fn toeplitz(&self) -> DMatrix<C64> {
        let n = self.c.len() + 1;
        DMatrix::from_fn(n, n, |i, j| {
            self.moment(j as i64 - i as i64)
                .expect("indices bounded by order")
        })
    }

    pub fn toeplitz_min_eigenvalue(&self) -> f64 {
        self.toeplitz()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `c_k = <delta_{k0}, U^k delta_{k0}>` for `1 <= k <= order`, where `k0`
/// is an end site of the half-lattice operator `u`.
pub fn moments_from_operator(u: &FiniteCmv, k0: i64, order: usize) -> Result<MomentSequence> {
    if k0 != u.offset() && k0 != u.last() {
        return Err(CmvError::InvalidWindow(format!(
            "k0 = {k0} is not an end site of [{}, {}]",
            u.offset(),
            u.last()
        )));
    }
    let i = u.local(k0)?;
    let mut v = u.basis(k0)?;
    let mut c = Vec::with_capacity(order);
    for _ in 0..order {
        v = u.apply(&v);
        c.push(v[i]);
    }
    let mut mu = MomentSequence::new(c);
    mu.radius_warning = u.dim() - 1 < min_radius(order);
    Ok(mu)
}

fn side_sign(side: Side) -> f64 {
    match side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
    }
}

/// `m_± = ±(1 + 2 sum_k conj(c_k) z^k)`, of order `mu.order()`.
pub fn m_from_moments(mu: &MomentSequence, side: Side) -> TaylorSeries {
    let s = side_sign(side);
    TaylorSeries::from_fn(mu.order(), |k| {
        if k == 0 {
            C64::new(s, 0.0)
        } else {
            mu.c[k - 1].conj() * (2.0 * s)
        }
    })
}

pub fn moments_from_m(m: &TaylorSeries, side: Side) -> Result<MomentSequence> {
    let s = side_sign(side);
    let c0 = m.constant_term();
    if (c0 - s).norm() > CONSTANT_TOL {
        return Err(CmvError::WrongConstantTerm {
            expected: format!("{s}"),
            found: format!("{c0}"),
        });
    }
    Ok(MomentSequence::new(
        m.coeffs()[1..].iter().map(|x| x.conj() * (s / 2.0)).collect(),
    ))
}

pub fn big_m_plus_from_m(m: &TaylorSeries) -> TaylorSeries {
    m.clone()
}

/// `M_- = ((1-z) m_- + (1+z)) / ((1+z) m_- + (1-z))`.
///
/// Numerator and denominator both vanish at `z = 0`; after cancelling `z`
/// the result has order one less than `m`.
pub fn big_m_minus_from_m(m: &TaylorSeries) -> Result<TaylorSeries> {
    if m.order() == 0 {
        return Err(CmvError::OrderTooLow {
            needed: 1,
            available: 0,
        });
    }
    let p = m.add_const(C64::new(1.0, 0.0)).div_z()?;
    let q = m.add_const(C64::new(-1.0, 0.0)).truncate(p.order());
    p.sub(&q)
        .div(&p.add(&q))
        .map_err(|_| CmvError::ZeroConstantTerm("M_- denominator"))
}

/// Inverse of [`big_m_minus_from_m`]; the result has order one more than `big_m`.
pub fn m_minus_from_big_m(big_m: &TaylorSeries) -> Result<TaylorSeries> {
    let x = big_m.add_const(C64::new(1.0, 0.0));
    let y = big_m.add_const(C64::new(-1.0, 0.0));
    let den = y.add(&x.mul_z().truncate(x.order()));
    let q = x
        .div(&den)
        .map_err(|_| CmvError::ZeroConstantTerm("m_- denominator"))?;
    Ok(q.mul_z().scale(C64::new(2.0, 0.0)).add_const(C64::new(-1.0, 0.0)))
}

/// `Φ_+ = (M_+ - 1)/(M_+ + 1)`; minus side returns `1/Φ_- = (M_- + 1)/(M_- - 1)`.
pub fn phi_from_big_m(big_m: &TaylorSeries, side: Side) -> Result<TaylorSeries> {
    let one = C64::new(1.0, 0.0);
    let r = match side {
        Side::Plus => big_m.mobius_const(one, -one, one, one),
        Side::Minus => big_m.mobius_const(one, one, one, -one),
    };
    r.map_err(|_| CmvError::ZeroConstantTerm("Phi denominator"))
}

/// `M_+ = (1 + Φ_+)/(1 - Φ_+)`; minus side consumes `1/Φ_-`.
pub fn big_m_from_phi(phi: &TaylorSeries, side: Side) -> Result<TaylorSeries> {
    let one = C64::new(1.0, 0.0);
    let r = match side {
        Side::Plus => phi.mobius_const(one, one, -one, one),
        Side::Minus => phi.mobius_const(one, one, one, -one),
    };
    r.map_err(|_| CmvError::ZeroConstantTerm("M denominator"))
}

/// `m_- = (z - Φ_-)/(z + Φ_-) = (z/Φ_- - 1)/(z/Φ_- + 1)`, order one more than `inv_phi`.
pub fn m_minus_from_inv_phi(inv_phi: &TaylorSeries) -> Result<TaylorSeries> {
    let zpsi = inv_phi.mul_z();
    zpsi.mobius_const(
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
    )
}

/// `m`, `M` and `Φ` (or `1/Φ_-`) at one base site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WTFunctions {
    pub side: Side,
    pub k0: i64,
    pub m: TaylorSeries,
    pub big_m: TaylorSeries,
    pub phi: TaylorSeries,
}

impl WTFunctions {
    /// Plus side: all three of order `N`. Minus side: `m` of order `N`,
    /// `M_-` and `1/Φ_-` of order `N - 1`.
    pub fn from_moments(mu: &MomentSequence, side: Side, k0: i64) -> Result<Self> {
        let m = m_from_moments(mu, side);
        let big_m = match side {
            Side::Plus => big_m_plus_from_m(&m),
            Side::Minus => big_m_minus_from_m(&m)?,
        };
        let phi = phi_from_big_m(&big_m, side)?;
        Ok(Self {
            side,
            k0,
            m,
            big_m,
            phi,
        })
    }
}

/// Pointwise `m_±(z, k)` from a dense solve on the half-lattice operator.
pub fn m_function_at(window: &VerblunskyWindow, k: i64, z: C64, side: Side) -> Result<C64> {
    let u = match side {
        Side::Plus => half_plus(window, k)?,
        Side::Minus => half_minus(window, k)?,
    };
    // (U + z)(U - z)^{-1} = 1 + 2z (U - z)^{-1}
    let f = 1.0 + 2.0 * z * resolvent_entry(&u, z, k, k)?;
    Ok(f * side_sign(side))
}

/// Pointwise `M_±(z, k)`.
pub fn big_m_function_at(window: &VerblunskyWindow, k: i64, z: C64, side: Side) -> Result<C64> {
    let m = m_function_at(window, k, z, side)?;
    Ok(match side {
        Side::Plus => m,
        Side::Minus => ((1.0 - z) * m + (1.0 + z)) / ((1.0 + z) * m + (1.0 - z)),
    })
}

/// The four resolvent entries around the site pair `(k - 1, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEntries {
    /// `R(k, k)`.
    pub diag: C64,
    /// `R(k - 1, k - 1)`.
    pub diag_prev: C64,
    /// `R(k - 1, k)`.
    pub upper: C64,
    /// `R(k, k - 1)`.
    pub lower: C64,
}

/// Resolvent entries `R = (U - z)^{-1}` of the full operator at `(k-1, k)`
/// expressed through `M_±(z, k)` and `alpha_k`.
pub fn green_from_weyl(k: i64, alpha_k: C64, m_plus: C64, m_minus: C64, z: C64) -> Result<GreenEntries> {
    let d = derived(alpha_k).map_err(|_| CmvError::Domain {
        index: k,
        value: format!("{alpha_k}"),
        modulus: alpha_k.norm(),
    })?;
    let (a, b, rho) = (d.a, d.b, d.rho);
    let den = 2.0 * z * (m_plus - m_minus);
    if den.norm() < 1e-300 {
        return Err(CmvError::SingularSolve(format!("{z}")));
    }
    let diag = (1.0 - m_plus) * (1.0 + m_minus) / den;
    let diag_prev = (a.conj() - b.conj() * m_plus) * (a + b * m_minus) / (den * rho * rho);
    let x = -(1.0 - m_plus) * (a.conj() - b.conj() * m_minus) / (den * rho);
    let y = -(1.0 + m_plus) * (a + b * m_minus) / (den * rho);
    let (upper, lower) = if k.rem_euclid(2) == 1 { (x, y) } else { (y, x) };
    Ok(GreenEntries {
        diag,
        diag_prev,
        upper,
        lower,
    })
}
