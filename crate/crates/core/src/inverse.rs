//! Reconstruction of Verblunsky coefficients from spectral data, and the
//! local uniqueness checker.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeffs::{rho_of, VerblunskyWindow, C64};
use crate::error::{CmvError, Result};
use crate::forward::{forward, ForwardData};
use crate::laurent::{inner_product, LaurentPoly, Side};
use crate::series::TaylorSeries;
use crate::spectral::{big_m_from_phi, m_minus_from_big_m, moments_from_m, MomentSequence};

/// Squared residual norm below which Gram-Schmidt reports rank deficiency.
pub const RANK_TOL: f64 = 1e-14;
/// `|h(0, k0)|` at or below this violates the `(g, h)` hypothesis.
pub const H0_TOL: f64 = 1e-10;
/// `|alpha_k0|` at or below this violates the `(g_prev, g)` hypothesis.
pub const ALPHA0_TOL: f64 = 1e-10;
/// Relative tolerance for coefficientwise series agreement.
pub const AGREEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(k: i64) -> Self {
        if k.rem_euclid(2) == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// Which of the two orthonormal systems, `p` or `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    P,
    R,
}

/// `1, 0, 2, -1, 3, -2, ...`
fn seq_shifted(len: usize) -> Vec<i64> {
    (0..len as i64)
        .map(|i| match i {
            0 => 1,
            _ if i % 2 == 1 => -(i - 1) / 2,
            _ => i / 2 + 1,
        })
        .collect()
}

/// `0, 1, -1, 2, -2, ...` (or `0, -1, 1, -2, 2, ...` when `neg_first`).
fn seq_alternating(len: usize, neg_first: bool) -> Vec<i64> {
    (0..len as i64)
        .map(|i| {
            let m = (i + 1) / 2;
            if i == 0 {
                0
            } else if (i % 2 == 1) == neg_first {
                -m
            } else {
                m
            }
        })
        .collect()
}

/// The monomials `sign * z^exp` that Gram-Schmidt turns into element `j`
/// of the requested system, for `j < len`.
pub fn monomial_ordering(side: Side, parity: Parity, family: Family, len: usize) -> Vec<(i64, f64)> {
    use Family::*;
    use Parity::*;
    let exps = match (side, family, parity) {
        (Side::Plus, P, Odd) | (Side::Minus, P, Even) => seq_shifted(len),
        (Side::Plus, P, Even) | (Side::Plus, R, Odd) => seq_alternating(len, false),
        (Side::Minus, P, Odd) | (Side::Minus, R, Even) => seq_alternating(len, false),
        (Side::Plus, R, Even) | (Side::Minus, R, Odd) => seq_alternating(len, true),
    };
    exps.into_iter()
        .map(|e| {
            let negate = match (side, family, parity) {
                (Side::Plus, _, _) => false,
                (Side::Minus, R, Odd) => e >= 0,
                (Side::Minus, _, _) => e > 0,
            };
            (e, if negate { -1.0 } else { 1.0 })
        })
        .collect()
}

/// Orthonormalize [`monomial_ordering`] under the moment inner product.
///
/// Each element has unit norm and a positive real coefficient on its own
/// signed monomial.
pub fn gram_schmidt_basis(
    mu: &MomentSequence,
    parity: Parity,
    side: Side,
    family: Family,
    len: usize,
) -> Result<Vec<LaurentPoly>> {
    let order = monomial_ordering(side, parity, family, len);
    let mut basis: Vec<LaurentPoly> = Vec::with_capacity(len);
    for (j, &(e, s)) in order.iter().enumerate() {
        let mut v = LaurentPoly::monomial(e, C64::new(s, 0.0));
        for _ in 0..2 {
            for b in &basis {
                let proj = inner_product(b, &v, mu)?;
                v = v.sub(&b.scale(proj));
            }
        }
        let norm_sq = inner_product(&v, &v, mu)?.re;
        if !(norm_sq > RANK_TOL) {
            return Err(CmvError::RankDeficient(j));
        }
        v = v.scale(C64::new(1.0 / norm_sq.sqrt(), 0.0));
        let lead = v.coeff(e) * s;
        v = v.scale((lead / lead.norm()).conj());
        basis.push(v);
    }
    Ok(basis)
}

fn check_disk(k: i64, a: C64) -> Result<C64> {
    if a.norm() >= 1.0 {
        Err(CmvError::OutOfDisk {
            index: k,
            modulus: a.norm(),
        })
    } else {
        Ok(a)
    }
}

/// `alpha_{k0+1}..=alpha_{k0+n}` (plus) or `alpha_{k0-n+1}..=alpha_{k0}`
/// (minus) from the moments of the corresponding half-lattice measure.
pub fn alphas_from_moments(
    mu: &MomentSequence,
    k0: i64,
    side: Side,
    n: usize,
) -> Result<VerblunskyWindow> {
    if n == 0 {
        return Err(CmvError::InvalidWindow("nothing to reconstruct (n = 0)".into()));
    }
    if mu.order() < n {
        return Err(CmvError::InsufficientMoments {
            needed: n,
            available: mu.order(),
        });
    }
    let parity = Parity::of(k0);
    let p = gram_schmidt_basis(mu, parity, side, Family::P, n)?;
    let r = gram_schmidt_basis(mu, parity, side, Family::R, n)?;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let (pj, rj) = (&p[j], &r[j]);
        let a = match side {
            Side::Plus => {
                let k = k0 + j as i64 + 1;
                let a = if k.rem_euclid(2) == 1 {
                    -inner_product(pj, &rj.shift(1), mu)?
                } else {
                    -inner_product(rj, pj, mu)?
                };
                check_disk(k, a)?
            }
            Side::Minus => {
                let k = k0 - j as i64;
                let a = if k.rem_euclid(2) == 1 {
                    inner_product(&rj.shift(1), pj, mu)?
                } else {
                    inner_product(pj, rj, mu)?
                };
                check_disk(k, a)?
            }
        };
        out.push(a);
    }
    match side {
        Side::Plus => VerblunskyWindow::with_default_cuts(k0 + 1, out),
        Side::Minus => {
            out.reverse();
            VerblunskyWindow::with_default_cuts(k0 - n as i64 + 1, out)
        }
    }
}

fn need_order(s: &TaylorSeries, needed: usize) -> Result<()> {
    if s.order() < needed {
        Err(CmvError::OrderTooLow {
            needed,
            available: s.order(),
        })
    } else {
        Ok(())
    }
}

/// `alpha_{k0+1}..=alpha_{k0+n}` from `m_+(z, k0)` of order at least `n`.
pub fn reconstruct_right(m_plus: &TaylorSeries, k0: i64, n: usize) -> Result<VerblunskyWindow> {
    need_order(m_plus, n)?;
    let mu = moments_from_m(&m_plus.truncate(n), Side::Plus)?;
    alphas_from_moments(&mu, k0, Side::Plus, n)
}

/// `alpha_{k0-n+1}..=alpha_{k0}` from `M_-(z, k0)` of order at least `n - 1`.
pub fn reconstruct_left(big_m_minus: &TaylorSeries, k0: i64, n: usize) -> Result<VerblunskyWindow> {
    if n == 0 {
        return Err(CmvError::InvalidWindow("nothing to reconstruct (n = 0)".into()));
    }
    need_order(big_m_minus, n - 1)?;
    let big_m = big_m_minus.truncate(n - 1);
    let m0 = big_m.constant_term();
    if (m0 - 1.0).norm() < 1e-13 {
        return Err(CmvError::ZeroConstantTerm("M_-(0) - 1"));
    }
    let alpha_k0 = check_disk(k0, (m0 + 1.0) / (m0 - 1.0))?;
    let m_minus = m_minus_from_big_m(&big_m)?;
    let mu = moments_from_m(&m_minus, Side::Minus)?;
    let w = alphas_from_moments(&mu, k0, Side::Minus, n)?;
    w.with_alpha(k0, alpha_k0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "moments")]
    Moments,
    #[serde(rename = "right_m")]
    RightM,
    #[serde(rename = "left_M")]
    LeftM,
    #[serde(rename = "full_gh")]
    FullGh,
    #[serde(rename = "full_gg")]
    FullGg,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Route::Moments => "moments",
            Route::RightM => "right_m",
            Route::LeftM => "left_M",
            Route::FullGh => "full_gh",
            Route::FullGg => "full_gg",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub index: i64,
    pub error: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub route: Route,
    pub k0: i64,
    pub order: usize,
    pub recovered: VerblunskyWindow,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<Residual>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

const LEFT_NOTE: &str =
    "M_- converted to m_- with the common factor z cancelled; M_- of order N-1 carries N coefficients";

impl ReconstructionReport {
    fn new(route: Route, k0: i64, order: usize, recovered: VerblunskyWindow) -> Self {
        Self {
            route,
            k0,
            order,
            recovered,
            residuals: None,
            max_residual: None,
            notes: Vec::new(),
        }
    }

    /// Fill `residuals` with `recovered - reference` on every recovered index.
    pub fn compare_with(&mut self, reference: &VerblunskyWindow) -> Result<()> {
        let lo = self.recovered.kmin();
        let res = self
            .recovered
            .alphas()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let k = lo + i as i64;
                Ok(Residual {
                    index: k,
                    error: a - reference.alpha(k)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.max_residual = Some(res.iter().map(|r| r.error.norm()).fold(0.0, f64::max));
        self.residuals = Some(res);
        Ok(())
    }
}

fn join(left: &VerblunskyWindow, right: &VerblunskyWindow) -> Result<VerblunskyWindow> {
    debug_assert_eq!(left.kmax() + 1, right.kmin());
    let mut a = left.alphas().to_vec();
    a.extend_from_slice(right.alphas());
    VerblunskyWindow::with_default_cuts(left.kmin(), a)
}

/// `alpha_{k0-n}..=alpha_{k0+n+1}` from `g(z, k0)` and `h(z, k0)` of order
/// at least `n`. Requires `h(0, k0) != 0`.
pub fn full_from_gh(
    g: &TaylorSeries,
    h: &TaylorSeries,
    k0: i64,
    n: usize,
) -> Result<ReconstructionReport> {
    need_order(g, n)?;
    need_order(h, n)?;
    let (g, h) = (g.truncate(n), h.truncate(n));
    let (g0, h0) = (g.constant_term(), h.constant_term());
    if h0.norm() <= H0_TOL {
        return Err(CmvError::HypothesisViolation(format!(
            "h(0, k0) = {h0} vanishes"
        )));
    }
    let scale = (g0.norm_sqr() + h0.norm_sqr()).sqrt();
    let alpha = check_disk(k0, g0 * h0.norm() / (h0 * scale))?;
    let rho = h0.norm() / scale;
    let b = C64::new(1.0, 0.0) - alpha;

    let d = g.scale(b.conj()).sub(&h.scale(C64::new(rho, 0.0)));
    let two = C64::new(2.0, 0.0);
    let big_m_minus = g
        .scale(two)
        .div(&d)
        .map_err(|_| CmvError::HypothesisViolation("h(0, k0) = 0 in the M_- denominator".into()))?
        .add_const(C64::new(-1.0, 0.0));
    let num = g.mul_z().add_const(C64::new(1.0, 0.0)).scale(two);
    let big_m_plus = num
        .div(&d.mul_z().add_const(C64::new(1.0, 0.0)))?
        .add_const(C64::new(-1.0, 0.0));

    let left = reconstruct_left(&big_m_minus, k0, n + 1)?;
    let right = reconstruct_right(&big_m_plus, k0, n + 1)?;
    let mut report = ReconstructionReport::new(Route::FullGh, k0, n, join(&left, &right)?);
    report.notes.push(LEFT_NOTE.into());
    Ok(report)
}

/// `Φ_+(z, k0)` and `1/Φ_-(z, k0)`, both of order `n + 1`, from `g` at
/// `k0 - 1` and `k0` (order `n`) and `alpha_k0 != 0`.
pub fn phi_pair_from_gg(
    g_prev: &TaylorSeries,
    g: &TaylorSeries,
    alpha_k0: C64,
    n: usize,
) -> Result<(TaylorSeries, TaylorSeries)> {
    need_order(g_prev, n)?;
    need_order(g, n)?;
    if alpha_k0.norm() <= ALPHA0_TOL {
        return Err(CmvError::HypothesisViolation(format!(
            "alpha_k0 = {alpha_k0} vanishes"
        )));
    }
    if alpha_k0.norm() >= 1.0 {
        return Err(CmvError::Domain {
            index: 0,
            value: format!("{alpha_k0}"),
            modulus: alpha_k0.norm(),
        });
    }
    let (g_prev, g) = (g_prev.truncate(n), g.truncate(n));
    let a2 = alpha_k0.norm_sqr();
    let rho2 = rho_of(alpha_k0).powi(2);
    let one = C64::new(1.0, 0.0);

    let zg = g.mul_z();
    let a = zg.add_const(one);
    let b = g_prev.mul_z().scale(C64::new(rho2, 0.0)).sub(&zg).sub(&a.scale(C64::new(a2, 0.0)));
    let disc = b.mul(&b).sub(&a.mul(&zg).scale(C64::new(4.0 * a2, 0.0)));
    let root = disc.sqrt_branch(C64::new(a2, 0.0))?;
    let phi_plus = b
        .add(&root)
        .scale(C64::new(-1.0, 0.0))
        .div(&a.scale(alpha_k0 * 2.0))?;

    let den = a.mul(&phi_plus.scale(C64::new(-1.0, 0.0)).add_const(alpha_k0.conj()));
    let inv_phi_minus = g_prev
        .mul_z()
        .scale(C64::new(-rho2, 0.0))
        .div(&den)?
        .add_const(alpha_k0);
    Ok((phi_plus, inv_phi_minus))
}

/// `alpha_{k0-n-1}..=alpha_{k0+n+1}` from `g(z, k0-1)`, `g(z, k0)` of order
/// at least `n` and `alpha_k0 != 0`.
pub fn full_from_gg(
    g_prev: &TaylorSeries,
    g: &TaylorSeries,
    alpha_k0: C64,
    k0: i64,
    n: usize,
) -> Result<ReconstructionReport> {
    let (phi_plus, inv_phi_minus) = phi_pair_from_gg(g_prev, g, alpha_k0, n)?;
    let big_m_plus = big_m_from_phi(&phi_plus, Side::Plus)?;
    let big_m_minus = big_m_from_phi(&inv_phi_minus, Side::Minus)?;
    let left = reconstruct_left(&big_m_minus, k0, n + 2)?;
    let right = reconstruct_right(&big_m_plus, k0, n + 1)?;
    let mut report = ReconstructionReport::new(Route::FullGg, k0, n, join(&left, &right)?);
    report.notes.push(LEFT_NOTE.into());
    Ok(report)
}

/// Run `route` on forward data; `n` defaults to `data.order`.
///
/// Recovered windows: `moments` gives `[k0-n+1, k0+n]`, `right_m` gives
/// `[k0+1, k0+n]`, `left_M` gives `[k0-n, k0]`, `full_gh` gives
/// `[k0-n, k0+n+1]` and `full_gg` gives `[k0-n-1, k0+n+1]`.
pub fn reconstruct(data: &ForwardData, route: Route, n: Option<usize>) -> Result<ReconstructionReport> {
    let n = n.unwrap_or(data.order);
    let k0 = data.k0;
    let mut notes = Vec::new();
    let recovered = match route {
        Route::Moments => {
            let left = alphas_from_moments(&data.moments_minus, k0, Side::Minus, n)?;
            let right = alphas_from_moments(&data.moments_plus, k0, Side::Plus, n)?;
            join(&left, &right)?
        }
        Route::RightM => reconstruct_right(&data.big_m_plus, k0, n)?,
        Route::LeftM => {
            notes.push(LEFT_NOTE.to_string());
            reconstruct_left(&data.big_m_minus, k0, n + 1)?
        }
        Route::FullGh => return full_from_gh(&data.g, &data.h, k0, n),
        Route::FullGg => return full_from_gg(&data.g_prev, &data.g, data.alpha_k0, k0, n),
    };
    let mut report = ReconstructionReport::new(route, k0, n, recovered);
    report.notes = notes;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniquenessKind {
    /// `m_+(z, k0)`; window `[k0+1, k0+N]`.
    HalfRight,
    /// `M_-(z, k0)`; window `[k0-N, k0]`.
    HalfLeft,
    /// `g(z, k0)` and `h(z, k0)`; window `[k0-N, k0+N+1]`.
    FullGh,
    /// `g(z, k0-1)` and `g(z, k0)`; window `[k0-N-1, k0+N+1]`.
    FullGg,
}

impl UniquenessKind {
    /// Coefficient window matched by data agreement of order `n`
    /// (`None` when it is empty).
    pub fn window(self, k0: i64, n: i64) -> Option<(i64, i64)> {
        let (lo, hi) = match self {
            UniquenessKind::HalfRight => (k0 + 1, k0 + n),
            UniquenessKind::HalfLeft => (k0 - n, k0),
            UniquenessKind::FullGh => (k0 - n, k0 + n + 1),
            UniquenessKind::FullGg => (k0 - n - 1, k0 + n + 1),
        };
        (lo <= hi).then_some((lo, hi))
    }

    /// Largest `n` whose window lies inside the agreeing run `[lo, hi]`
    /// through the base site; `-1` if none does.
    fn order_inside(self, k0: i64, range: Option<(i64, i64)>) -> i64 {
        let Some((lo, hi)) = range else {
            return match self {
                UniquenessKind::HalfRight => 0,
                _ => -1,
            };
        };
        let n = match self {
            UniquenessKind::HalfRight => hi - k0,
            UniquenessKind::HalfLeft => k0 - lo,
            UniquenessKind::FullGh => (k0 - lo).min(hi - k0 - 1),
            UniquenessKind::FullGg => (k0 - lo).min(hi - k0) - 1,
        };
        n.max(-1)
    }

    fn data(self, d: &ForwardData) -> Vec<&TaylorSeries> {
        match self {
            UniquenessKind::HalfRight => vec![&d.m_plus],
            UniquenessKind::HalfLeft => vec![&d.big_m_minus],
            UniquenessKind::FullGh => vec![&d.g, &d.h],
            UniquenessKind::FullGg => vec![&d.g_prev, &d.g],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub kind: UniquenessKind,
    pub k0: i64,
    pub nmax: usize,
    /// Largest `N <= nmax` with Taylor coefficients `0..=N` of the data
    /// agreeing; `-1` when the constant terms already differ.
    pub data_agreement_order: i64,
    /// The theorem's window for `data_agreement_order`.
    pub predicted_window: Option<(i64, i64)>,
    /// Maximal run of agreeing coefficients through the base site
    /// (`k0 + 1` for `half_right`, `k0` otherwise).
    pub coefficient_window: Option<(i64, i64)>,
    /// Largest `N <= nmax` whose theorem window lies in `coefficient_window`.
    pub coefficient_agreement_order: i64,
    /// Data agreement of order `N` holds exactly when coefficient agreement does.
    pub theorem_holds: bool,
}

fn agreeing_run(w1: &VerblunskyWindow, w2: &VerblunskyWindow, start: i64) -> Option<(i64, i64)> {
    let same = |k: i64| match (w1.alpha(k), w2.alpha(k)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if !same(start) {
        return None;
    }
    let mut lo = start;
    while same(lo - 1) {
        lo -= 1;
    }
    let mut hi = start;
    while same(hi + 1) {
        hi += 1;
    }
    Some((lo, hi))
}

/// Compare the spectral data of two windows at `k0` against the indices on
/// which their coefficients agree. Both windows must cover
/// `[k0 - 2 nmax - 8, k0 + 2 nmax + 8]`; data are computed on that range.
pub fn uniqueness_check(
    w1: &VerblunskyWindow,
    w2: &VerblunskyWindow,
    k0: i64,
    kind: UniquenessKind,
    nmax: usize,
    tol: f64,
) -> Result<UniquenessReport> {
    let r = 2 * nmax as i64 + 8;
    let (w1, w2) = (w1.restrict(k0 - r, k0 + r)?, w2.restrict(k0 - r, k0 + r)?);
    let (d1, d2) = (forward(&w1, k0, nmax)?, forward(&w2, k0, nmax)?);
    let data_order = kind
        .data(&d1)
        .into_iter()
        .zip(kind.data(&d2))
        .map(|(a, b)| a.agreement_order(b, tol).map_or(-1, |n| n as i64))
        .min()
        .unwrap_or(-1);

    let start = match kind {
        UniquenessKind::HalfRight => k0 + 1,
        _ => k0,
    };
    let coefficient_window = agreeing_run(&w1, &w2, start);
    let coeff_order = kind
        .order_inside(k0, coefficient_window)
        .min(nmax as i64);

    Ok(UniquenessReport {
        kind,
        k0,
        nmax,
        data_agreement_order: data_order,
        predicted_window: kind.window(k0, data_order),
        coefficient_window,
        coefficient_agreement_order: coeff_order,
        theorem_holds: data_order == coeff_order,
    })
}
