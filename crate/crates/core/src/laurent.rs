//! Laurent polynomials, transfer matrices and the solution families
//! `p, r, q, s` on both half-lattices.

use std::collections::BTreeMap;
use std::fmt;

use crate::coeffs::{derived, VerblunskyWindow, C64};
use crate::error::{CmvError, Result};
use crate::spectral::MomentSequence;

/// Coefficients below this fraction of the largest one are dropped.
pub const CANONICAL_REL: f64 = 1e-15;

/// Finite sum `sum_e c_e z^e`, `e` in Z, stored sparsely.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, C64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(exp: i64, c: C64) -> Self {
        Self::from_terms([(exp, c)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, C64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (e, c) in terms {
            *coeffs.entry(e).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let mut p = Self { coeffs };
        p.canonicalize();
        p
    }

    fn canonicalize(&mut self) {
        let max = self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        let floor = CANONICAL_REL * max;
        self.coeffs.retain(|_, c| c.norm() > floor && *c != C64::new(0.0, 0.0));
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> C64 {
        self.coeffs.get(&exp).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    /// Exponents with nonzero coefficient, ascending.
    pub fn support(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (e, c * s)))
    }

    /// Multiply by `z^j`.
    pub fn shift(&self, j: i64) -> Self {
        Self {
            coeffs: self.terms().map(|(e, c)| (e + j, c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms().map(|(e, c)| (e, -c))))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.coeffs.len() * other.coeffs.len());
        for (a, x) in self.terms() {
            for (b, y) in other.terms() {
                terms.push((a + b, x * y));
            }
        }
        Self::from_terms(terms)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.terms().map(|(e, c)| c * z.powi(e as i32)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(e, c)| match e {
                0 => format!("({c})"),
                1 => format!("({c}) z"),
                _ => format!("({c}) z^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Conjugate-linear in `f`: `<f, g> = sum conj(f_m) g_n c_{n-m}`.
pub fn inner_product(f: &LaurentPoly, g: &LaurentPoly, mu: &MomentSequence) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (m, x) in f.terms() {
        for (n, y) in g.terms() {
            acc += x.conj() * y * mu.moment(n - m)?;
        }
    }
    Ok(acc)
}

/// 2x2 matrix of Laurent polynomials acting on `(p, r)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub k: i64,
    pub entries: [[LaurentPoly; 2]; 2],
}

impl TransferMatrix {
    pub fn apply(&self, v: &[LaurentPoly; 2]) -> [LaurentPoly; 2] {
        let e = &self.entries;
        [
            e[0][0].mul(&v[0]).add(&e[0][1].mul(&v[1])),
            e[1][0].mul(&v[0]).add(&e[1][1].mul(&v[1])),
        ]
    }

    pub fn determinant(&self) -> LaurentPoly {
        let e = &self.entries;
        e[0][0].mul(&e[1][1]).sub(&e[0][1].mul(&e[1][0]))
    }

    pub fn compose(&self, other: &TransferMatrix) -> [[LaurentPoly; 2]; 2] {
        let a = &self.entries;
        let b = &other.entries;
        let cell = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
        [[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]]
    }
}

fn is_odd(k: i64) -> bool {
    k.rem_euclid(2) == 1
}

fn domain_at(k: i64, alpha: C64) -> CmvError {
    CmvError::Domain {
        index: k,
        value: format!("{alpha}"),
        modulus: alpha.norm(),
    }
}

/// `T(z,k)`: odd `k` gives `[[alpha, z], [1/z, conj(alpha)]] / rho`,
/// even `k` gives `[[conj(alpha), 1], [1, alpha]] / rho`.
pub fn transfer(k: i64, alpha: C64) -> Result<TransferMatrix> {
    let d = derived(alpha).map_err(|_| domain_at(k, alpha))?;
    let inv = 1.0 / d.rho;
    let c = |e: i64, v: C64| LaurentPoly::monomial(e, v * inv);
    let one = C64::new(1.0, 0.0);
    let entries = if is_odd(k) {
        [[c(0, alpha), c(1, one)], [c(-1, one), c(0, alpha.conj())]]
    } else {
        [[c(0, alpha.conj()), c(0, one)], [c(0, one), c(0, alpha)]]
    };
    Ok(TransferMatrix { k, entries })
}

/// Closed-form `T(z,k)^{-1}` (both parities have determinant `-1`).
pub fn inverse_transfer(k: i64, alpha: C64) -> Result<TransferMatrix> {
    let d = derived(alpha).map_err(|_| domain_at(k, alpha))?;
    let inv = 1.0 / d.rho;
    let c = |e: i64, v: C64| LaurentPoly::monomial(e, v * inv);
    let one = C64::new(1.0, 0.0);
    let entries = if is_odd(k) {
        [[c(0, -alpha.conj()), c(1, one)], [c(-1, one), c(0, -alpha)]]
    } else {
        [[c(0, -alpha), c(0, one)], [c(0, one), c(0, -alpha.conj())]]
    };
    Ok(TransferMatrix { k, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

/// `p, r, q, s` at sites `k0, k0 +- 1, ...`; entry `j` belongs to `k0 + j`
/// on the plus side and `k0 - j` on the minus side.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFamily {
    pub side: Side,
    pub k0: i64,
    pub p: Vec<LaurentPoly>,
    pub r: Vec<LaurentPoly>,
    pub q: Vec<LaurentPoly>,
    pub s: Vec<LaurentPoly>,
}

impl SolutionFamily {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Position in the vectors for lattice site `k`.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let j = match self.side {
            Side::Plus => k - self.k0,
            Side::Minus => self.k0 - k,
        };
        (j >= 0 && (j as usize) < self.len()).then_some(j as usize)
    }

    pub fn p_at(&self, k: i64) -> Option<&LaurentPoly> {
        self.index_of(k).map(|j| &self.p[j])
    }

    pub fn r_at(&self, k: i64) -> Option<&LaurentPoly> {
        self.index_of(k).map(|j| &self.r[j])
    }

    pub fn q_at(&self, k: i64) -> Option<&LaurentPoly> {
        self.index_of(k).map(|j| &self.q[j])
    }

    pub fn s_at(&self, k: i64) -> Option<&LaurentPoly> {
        self.index_of(k).map(|j| &self.s[j])
    }
}

fn mono(e: i64, re: f64) -> LaurentPoly {
    LaurentPoly::monomial(e, C64::new(re, 0.0))
}

/// Initial `(p, r)` and `(q, s)` at `k0`.
pub fn initial_values(side: Side, k0: i64) -> ([LaurentPoly; 2], [LaurentPoly; 2]) {
    match (side, is_odd(k0)) {
        (Side::Plus, true) => ([mono(1, 1.0), mono(0, 1.0)], [mono(1, 1.0), mono(0, -1.0)]),
        (Side::Plus, false) => ([mono(0, 1.0), mono(0, 1.0)], [mono(0, -1.0), mono(0, 1.0)]),
        (Side::Minus, true) => ([mono(0, 1.0), mono(0, -1.0)], [mono(0, 1.0), mono(0, 1.0)]),
        (Side::Minus, false) => ([mono(1, -1.0), mono(0, 1.0)], [mono(1, 1.0), mono(0, 1.0)]),
    }
}

/// Forward recursion `(p, r)(k) = T(z,k) (p, r)(k-1)` for `k0 < k <= kmax`.
pub fn solutions_plus(window: &VerblunskyWindow, k0: i64, kmax: i64) -> Result<SolutionFamily> {
    if kmax < k0 {
        return Err(CmvError::InvalidWindow(format!("kmax = {kmax} < k0 = {k0}")));
    }
    let (mut pr, mut qs) = initial_values(Side::Plus, k0);
    let mut fam = SolutionFamily {
        side: Side::Plus,
        k0,
        p: vec![pr[0].clone()],
        r: vec![pr[1].clone()],
        q: vec![qs[0].clone()],
        s: vec![qs[1].clone()],
    };
    for k in (k0 + 1)..=kmax {
        let t = transfer(k, window.alpha(k)?)?;
        pr = t.apply(&pr);
        qs = t.apply(&qs);
        fam.p.push(pr[0].clone());
        fam.r.push(pr[1].clone());
        fam.q.push(qs[0].clone());
        fam.s.push(qs[1].clone());
    }
    Ok(fam)
}

/// Backward recursion `(p, r)(k-1) = T(z,k)^{-1} (p, r)(k)` for `kmin < k <= k0`.
pub fn solutions_minus(window: &VerblunskyWindow, k0: i64, kmin: i64) -> Result<SolutionFamily> {
    if kmin > k0 {
        return Err(CmvError::InvalidWindow(format!("kmin = {kmin} > k0 = {k0}")));
    }
    let (mut pr, mut qs) = initial_values(Side::Minus, k0);
    let mut fam = SolutionFamily {
        side: Side::Minus,
        k0,
        p: vec![pr[0].clone()],
        r: vec![pr[1].clone()],
        q: vec![qs[0].clone()],
        s: vec![qs[1].clone()],
    };
    for k in ((kmin + 1)..=k0).rev() {
        let t = inverse_transfer(k, window.alpha(k)?)?;
        pr = t.apply(&pr);
        qs = t.apply(&qs);
        fam.p.push(pr[0].clone());
        fam.r.push(pr[1].clone());
        fam.q.push(qs[0].clone());
        fam.s.push(qs[1].clone());
    }
    Ok(fam)
}
