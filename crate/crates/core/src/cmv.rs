//! Finite CMV matrices, their `V`/`W` factors, resolvent entries and the
//! Taylor coefficients of Green's-function entries at `z = 0`.
//!
//! Lattice bookkeeping: a window `[kmin, kmax]` with cuts at `kmin - 1` and
//! `kmax + 1` yields an operator on the lattice sites `kmin - 1 ..= kmax`.
//! The block `Theta_j` occupies rows/columns `(j - 1, j)`; even `j` goes into
//! `V`, odd `j` into `W`. At a cut site the block is diagonal (`rho = 0`) and
//! only the half lying inside the index range is kept.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coeffs::{rho_of, theta, VerblunskyWindow, C64};
use crate::error::{CmvError, Result};
use crate::series::TaylorSeries;

/// Bandwidth of `U`, `U*`, `V` and `W`.
pub const BANDWIDTH: usize = 2;

/// Dense matrix indexed by lattice sites `offset ..= offset + dim - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCmv {
    offset: i64,
    entries: DMatrix<C64>,
}

impl FiniteCmv {
    pub fn from_matrix(offset: i64, entries: DMatrix<C64>) -> Self {
        assert!(entries.is_square());
        Self { offset, entries }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Last lattice site covered.
    pub fn last(&self) -> i64 {
        self.offset + self.dim() as i64 - 1
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn contains(&self, k: i64) -> bool {
        k >= self.offset && k <= self.last()
    }

    pub fn local(&self, k: i64) -> Result<usize> {
        if self.contains(k) {
            Ok((k - self.offset) as usize)
        } else {
            Err(CmvError::IndexOutOfWindow {
                index: k,
                lo: self.offset,
                hi: self.last(),
            })
        }
    }

    /// Entry at lattice position `(k, j)`.
    pub fn entry(&self, k: i64, j: i64) -> Result<C64> {
        Ok(self.entries[(self.local(k)?, self.local(j)?)])
    }

    pub fn basis(&self, k: i64) -> Result<DVector<C64>> {
        let mut v = DVector::zeros(self.dim());
        v[self.local(k)?] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// `U v` using the five-diagonal band only.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let n = self.dim();
        DVector::from_fn(n, |i, _| {
            let lo = i.saturating_sub(BANDWIDTH);
            let hi = (i + BANDWIDTH).min(n - 1);
            (lo..=hi).map(|j| self.entries[(i, j)] * v[j]).sum()
        })
    }

    /// `U* v` using the five-diagonal band only.
    pub fn apply_adjoint(&self, v: &DVector<C64>) -> DVector<C64> {
        let n = self.dim();
        DVector::from_fn(n, |i, _| {
            let lo = i.saturating_sub(BANDWIDTH);
            let hi = (i + BANDWIDTH).min(n - 1);
            (lo..=hi).map(|j| self.entries[(j, i)].conj() * v[j]).sum()
        })
    }

    /// `max |(U U* - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = &self.entries * self.entries.adjoint();
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - C64::new(e, 0.0)).norm());
            }
        }
        worst
    }

    /// Largest modulus outside the band `|row - col| <= 2`.
    pub fn off_band_max(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > BANDWIDTH {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Sub-block on the lattice range `lo ..= hi`.
    pub fn block(&self, lo: i64, hi: i64) -> Result<FiniteCmv> {
        let a = self.local(lo)?;
        let b = self.local(hi)?;
        let n = b + 1 - a;
        Ok(FiniteCmv {
            offset: lo,
            entries: self.entries.view((a, a), (n, n)).into_owned(),
        })
    }

    /// CSV dump: a `# offset = k` header, then one row per matrix row with
    /// interleaved `re,im` pairs.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# offset = {}", self.offset).unwrap();
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let c = self.entries[(i, j)];
                    format!("{:e},{:e}", c.re, c.im)
                })
                .collect();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}

/// Assemble `V` and `W` on `lo ..= lo + run.len() - 2`, where `run[i]` is
/// the coefficient at site `lo + i` and both ends of `run` are cuts.
fn assemble_vw(lo: i64, run: &[C64]) -> Result<(FiniteCmv, FiniteCmv)> {
    if run.len() < 2 {
        return Err(CmvError::InvalidWindow("need at least two cut sites".into()));
    }
    let hi = lo + run.len() as i64 - 2;
    let n = run.len() - 1;
    let mut v = DMatrix::zeros(n, n);
    let mut w = DMatrix::zeros(n, n);
    for (i, &alpha) in run.iter().enumerate() {
        let j = lo + i as i64;
        let block = theta(alpha).map_err(|_| CmvError::Domain {
            index: j,
            value: format!("{alpha}"),
            modulus: alpha.norm(),
        })?;
        let target = if j.rem_euclid(2) == 0 { &mut v } else { &mut w };
        let sites = [j - 1, j];
        for (a, &r) in sites.iter().enumerate() {
            for (b, &c) in sites.iter().enumerate() {
                if (lo..=hi).contains(&r) && (lo..=hi).contains(&c) {
                    target[((r - lo) as usize, (c - lo) as usize)] = block[a][b];
                }
            }
        }
    }
    Ok((
        FiniteCmv::from_matrix(lo, v),
        FiniteCmv::from_matrix(lo, w),
    ))
}

/// The unitary factors `V` (even blocks) and `W` (odd blocks).
pub fn build_vw(window: &VerblunskyWindow) -> Result<(FiniteCmv, FiniteCmv)> {
    let run = window.with_cut_run()?;
    assemble_vw(window.kmin() - 1, &run)
}

/// `U = V W`.
pub fn build_full(window: &VerblunskyWindow) -> Result<FiniteCmv> {
    let (v, w) = build_vw(window)?;
    Ok(FiniteCmv::from_matrix(v.offset, v.entries * w.entries))
}

/// `U` filled entry by entry from the closed-form five-diagonal pattern.
///
/// Row `k` even: `U[k,k-2] = rho_{k-1} rho_k`,
/// `U[k,k-1] = conj(alpha_{k-1}) rho_k`, `U[k,k+1] = conj(alpha_k) rho_{k+1}`.
/// Row `k` odd: `U[k,k-1] = -alpha_{k+1} rho_k`,
/// `U[k,k+1] = -alpha_{k+2} rho_{k+1}`, `U[k,k+2] = rho_{k+1} rho_{k+2}`.
/// Diagonal: `U[k,k] = -conj(alpha_k) alpha_{k+1}`.
pub fn build_closed_form(window: &VerblunskyWindow) -> Result<FiniteCmv> {
    let run = window.with_cut_run()?;
    let lo = window.kmin() - 1;
    let hi = window.kmax();
    let n = (hi - lo + 1) as usize;
    let alpha = |k: i64| run[(k - lo) as usize];
    let rho = |k: i64| C64::new(rho_of(alpha(k)), 0.0);
    let mut u = DMatrix::zeros(n, n);
    for k in lo..=hi {
        let mut put = |j: i64, val: C64| {
            if (lo..=hi).contains(&j) {
                u[((k - lo) as usize, (j - lo) as usize)] = val;
            }
        };
        put(k, -alpha(k).conj() * alpha(k + 1));
        if k.rem_euclid(2) == 0 {
            if k - 2 >= lo {
                put(k - 2, rho(k - 1) * rho(k));
            }
            if k > lo {
                put(k - 1, alpha(k - 1).conj() * rho(k));
            }
            if k < hi {
                put(k + 1, alpha(k).conj() * rho(k + 1));
            }
        } else {
            if k > lo {
                put(k - 1, -alpha(k + 1) * rho(k));
            }
            if k < hi {
                put(k + 1, -alpha(k + 2) * rho(k + 1));
            }
            if k + 2 <= hi {
                put(k + 2, rho(k + 1) * rho(k + 2));
            }
        }
    }
    Ok(FiniteCmv::from_matrix(lo, u))
}

/// Decouple at `k0` by setting `alpha_{k0} = e^{is}`. Returns the blocks on
/// `kmin - 1 ..= k0 - 1` and `k0 ..= kmax`.
pub fn split_half(
    window: &VerblunskyWindow,
    k0: i64,
    s: f64,
) -> Result<(FiniteCmv, FiniteCmv)> {
    if !window.contains(k0) {
        return Err(CmvError::IndexOutOfWindow {
            index: k0,
            lo: window.kmin(),
            hi: window.kmax(),
        });
    }
    let mut run = window.with_cut_run()?;
    let lo = window.kmin() - 1;
    run[(k0 - lo) as usize] = C64::from_polar(1.0, s);
    let (v, w) = assemble_vw(lo, &run)?;
    let full = FiniteCmv::from_matrix(lo, v.entries * w.entries);
    Ok((full.block(lo, k0 - 1)?, full.block(k0, window.kmax())?))
}

/// `U_{+,k0}` (default cut) on `k0 ..= kmax`.
pub fn half_plus(window: &VerblunskyWindow, k0: i64) -> Result<FiniteCmv> {
    Ok(split_half(window, k0, 0.0)?.1)
}

/// `U_{-,k0}` (default cut at `k0 + 1`) on `kmin - 1 ..= k0`.
pub fn half_minus(window: &VerblunskyWindow, k0: i64) -> Result<FiniteCmv> {
    Ok(split_half(window, k0 + 1, 0.0)?.0)
}

/// Columns `k'` of `(U - z I)^{-1}` for every `k'` in `cols`, sharing one
/// partial-pivoted LU factorization.
pub fn resolvent_columns(u: &FiniteCmv, z: C64, cols: &[i64]) -> Result<Vec<DVector<C64>>> {
    let n = u.dim();
    let shifted = &u.entries - DMatrix::from_diagonal_element(n, n, z);
    let lu = shifted.lu();
    // LU::solve only fails on an exactly zero pivot; catch near-singular ones too.
    let diag_min = lu
        .u()
        .diagonal()
        .iter()
        .map(|d| d.norm())
        .fold(f64::INFINITY, f64::min);
    if diag_min < 1e-13 {
        return Err(CmvError::SingularSolve(format!("{z}")));
    }
    cols.iter()
        .map(|&kp| {
            lu.solve(&u.basis(kp)?)
                .ok_or_else(|| CmvError::SingularSolve(format!("{z}")))
        })
        .collect()
}

/// Column `k'` of `(U - z I)^{-1}`.
pub fn resolvent_column(u: &FiniteCmv, z: C64, kp: i64) -> Result<DVector<C64>> {
    Ok(resolvent_columns(u, z, &[kp])?.remove(0))
}

/// Entry `(k, k')` of `(U - z I)^{-1}`.
pub fn resolvent_entry(u: &FiniteCmv, z: C64, k: i64, kp: i64) -> Result<C64> {
    let i = u.local(k)?;
    Ok(resolvent_column(u, z, kp)?[i])
}

/// Taylor coefficients of `z -> (U - z I)^{-1}(k, k')` through `order`.
///
/// Coefficient `n` is `(U*^{n+1})_{k,k'}`, obtained by applying `U*` to
/// `delta_{k'}` repeatedly.
pub fn resolvent_series(u: &FiniteCmv, k: i64, kp: i64, order: usize) -> Result<TaylorSeries> {
    let i = u.local(k)?;
    let mut v = u.basis(kp)?;
    let mut coeffs = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        v = u.apply_adjoint(&v);
        coeffs.push(v[i]);
    }
    Ok(TaylorSeries::new(coeffs))
}

/// Lattice pair `(row, col)` of the off-diagonal Green's entry `h(z, k)`.
pub fn h_position(k: i64) -> (i64, i64) {
    if k.rem_euclid(2) == 1 {
        (k - 1, k)
    } else {
        (k, k - 1)
    }
}

/// Taylor data of the diagonal and neighbouring off-diagonal Green's entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenSeriesPair {
    pub g: TaylorSeries,
    pub h: TaylorSeries,
    pub k0: i64,
}

/// `g(z,k0) = R(k0,k0)` and `h(z,k0)` (`R(k0-1,k0)` for odd `k0`,
/// `R(k0,k0-1)` for even `k0`), `R = (U - zI)^{-1}`, through `order`.
pub fn green_series(u: &FiniteCmv, k0: i64, order: usize) -> Result<GreenSeriesPair> {
    let g = resolvent_series(u, k0, k0, order)?;
    let (r, c) = h_position(k0);
    let h = resolvent_series(u, r, c, order)?;
    Ok(GreenSeriesPair { g, h, k0 })
}
