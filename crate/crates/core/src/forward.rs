//! The forward map: coefficients to every kind of spectral data at one site.

use serde::{Deserialize, Serialize};

use crate::cmv::{build_full, green_series, half_minus, half_plus, resolvent_series};
use crate::coeffs::{VerblunskyWindow, C64};
use crate::error::Result;
use crate::laurent::Side;
use crate::series::TaylorSeries;
use crate::spectral::{
    big_m_minus_from_m, m_from_moments, moments_from_operator, phi_from_big_m, MomentSequence,
};

/// Spectral data at `k0`. Every series has order `order`; the moment
/// sequences have `order` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardData {
    pub k0: i64,
    pub order: usize,
    pub alpha_k0: C64,
    pub moments_plus: MomentSequence,
    pub moments_minus: MomentSequence,
    pub m_plus: TaylorSeries,
    pub m_minus: TaylorSeries,
    pub big_m_plus: TaylorSeries,
    pub big_m_minus: TaylorSeries,
    pub phi_plus: TaylorSeries,
    pub inv_phi_minus: TaylorSeries,
    /// `R(k0, k0)`.
    pub g: TaylorSeries,
    /// `R(k0-1, k0)` for odd `k0`, `R(k0, k0-1)` for even `k0`.
    pub h: TaylorSeries,
    /// `R(k0-1, k0-1)`.
    pub g_prev: TaylorSeries,
}

impl ForwardData {
    /// Any moment sequence came from an operator truncated too close to `k0`.
    pub fn radius_warning(&self) -> bool {
        self.moments_plus.radius_warning() || self.moments_minus.radius_warning()
    }
}

/// Compute [`ForwardData`] at `k0` through `order` from dense truncations of
/// `window` (which needs cuts at both ends).
pub fn forward(window: &VerblunskyWindow, k0: i64, order: usize) -> Result<ForwardData> {
    let alpha_k0 = window.alpha(k0)?;
    let moments_plus = moments_from_operator(&half_plus(window, k0)?, k0, order)?;
    // M_- of order N needs m_- of order N + 1
    let minus_ext = moments_from_operator(&half_minus(window, k0)?, k0, order + 1)?;
    let m_plus = m_from_moments(&moments_plus, Side::Plus);
    let m_minus_ext = m_from_moments(&minus_ext, Side::Minus);
    let big_m_minus = big_m_minus_from_m(&m_minus_ext)?;
    let phi_plus = phi_from_big_m(&m_plus, Side::Plus)?;
    let inv_phi_minus = phi_from_big_m(&big_m_minus, Side::Minus)?;

    let u = build_full(window)?;
    let green = green_series(&u, k0, order)?;
    let g_prev = resolvent_series(&u, k0 - 1, k0 - 1, order)?;

    Ok(ForwardData {
        k0,
        order,
        alpha_k0,
        moments_plus,
        moments_minus: minus_ext.truncate(order),
        big_m_plus: m_plus.clone(),
        m_plus,
        m_minus: m_minus_ext.truncate(order),
        big_m_minus,
        phi_plus,
        inv_phi_minus,
        g: green.g,
        h: green.h,
        g_prev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn free_window() {
        let w = VerblunskyWindow::with_default_cuts(-20, vec![c(0.0, 0.0); 41]).unwrap();
        let d = forward(&w, 0, 6).unwrap();
        assert_eq!(d.m_plus, TaylorSeries::one(6));
        assert!(d.g.max_abs() < 1e-15 && d.h.max_abs() < 1e-15);
        assert!((d.big_m_minus.constant_term() + 1.0).norm() < 1e-15);
        assert!(!d.radius_warning());
    }

    #[test]
    fn orders_and_constants() {
        for k0 in [3, 4] {
            let w = VerblunskyWindow::random(17, k0 - 20, k0 + 20, 0.9).unwrap();
            let d = forward(&w, k0, 5).unwrap();
            for s in [&d.m_plus, &d.m_minus, &d.big_m_minus, &d.phi_plus, &d.inv_phi_minus, &d.g, &d.h, &d.g_prev] {
                assert_eq!(s.order(), 5);
            }
            assert_eq!(d.m_plus.constant_term(), c(1.0, 0.0));
            assert_eq!(d.m_minus.constant_term(), c(-1.0, 0.0));
            assert!((d.inv_phi_minus.constant_term() - d.alpha_k0).norm() < 1e-12);
            let a1 = w.alpha(k0 + 1).unwrap();
            let rho = crate::coeffs::rho_of(d.alpha_k0);
            assert!((d.g.constant_term() + d.alpha_k0 * a1.conj()).norm() < 1e-14);
            assert!((d.h.constant_term() + a1.conj() * rho).norm() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let w = VerblunskyWindow::random(4, -15, 15, 0.8).unwrap();
        let d = forward(&w, 1, 3).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: ForwardData = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
