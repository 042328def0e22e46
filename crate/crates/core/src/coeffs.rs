//! Verblunsky coefficient windows and the scalar/block quantities derived
//! from a single coefficient.
//!
//! A [`VerblunskyWindow`] stores `alpha_k` for `kmin <= k <= kmax`. The
//! optional cuts are unimodular coefficients placed at the two sites just
//! outside the window, `kmin - 1` and `kmax + 1`. Nothing outside
//! `[kmin - 1, kmax + 1]` is ever assumed to be zero.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CmvError, Result};

pub type C64 = Complex64;

/// Tolerance for `||cut| - 1|`.
pub const CUT_TOL: f64 = 1e-12;

/// `(rho, a, b)` for one coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoeffs {
    pub rho: f64,
    pub a: C64,
    pub b: C64,
}

fn domain_err(index: i64, alpha: C64) -> CmvError {
    CmvError::Domain {
        index,
        value: format!("{alpha}"),
        modulus: alpha.norm(),
    }
}

/// `rho = sqrt(1 - |alpha|^2)`, `a = 1 + alpha`, `b = 1 - alpha`.
pub fn derived(alpha: C64) -> Result<DerivedCoeffs> {
    if !(alpha.norm() < 1.0) {
        return Err(domain_err(0, alpha));
    }
    Ok(DerivedCoeffs {
        rho: rho_of(alpha),
        a: C64::new(1.0, 0.0) + alpha,
        b: C64::new(1.0, 0.0) - alpha,
    })
}

/// `sqrt(1 - |alpha|^2)`, clamped to zero for unimodular input.
pub fn rho_of(alpha: C64) -> f64 {
    (1.0 - alpha.norm_sqr()).max(0.0).sqrt()
}

/// The 2x2 unitary block `[[-alpha, rho], [rho, conj(alpha)]]`.
pub fn theta(alpha: C64) -> Result<[[C64; 2]; 2]> {
    if alpha.norm() > 1.0 + CUT_TOL {
        return Err(domain_err(0, alpha));
    }
    let rho = C64::new(rho_of(alpha), 0.0);
    Ok([[-alpha, rho], [rho, alpha.conj()]])
}

fn is_unimodular(c: C64) -> bool {
    (c.norm() - 1.0).abs() <= CUT_TOL
}

/// Finitely supported coefficients on `[kmin, kmax]` with optional boundary cuts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWindow", into = "RawWindow")]
pub struct VerblunskyWindow {
    kmin: i64,
    kmax: i64,
    alpha: Vec<C64>,
    cut_left: Option<C64>,
    cut_right: Option<C64>,
}

#[derive(Serialize, Deserialize)]
struct RawWindow {
    kmin: i64,
    kmax: i64,
    alpha: Vec<C64>,
    cut_left: Option<C64>,
    cut_right: Option<C64>,
}

impl TryFrom<RawWindow> for VerblunskyWindow {
    type Error = CmvError;

    fn try_from(raw: RawWindow) -> Result<Self> {
        if raw.kmax < raw.kmin {
            return Err(CmvError::InvalidWindow(format!(
                "kmin = {} > kmax = {}",
                raw.kmin, raw.kmax
            )));
        }
        let expected = (raw.kmax - raw.kmin + 1) as usize;
        if raw.alpha.len() != expected {
            return Err(CmvError::InvalidWindow(format!(
                "alpha has {} entries, [kmin, kmax] needs {}",
                raw.alpha.len(),
                expected
            )));
        }
        VerblunskyWindow::new(raw.kmin, raw.alpha, raw.cut_left, raw.cut_right)
    }
}

impl From<VerblunskyWindow> for RawWindow {
    fn from(w: VerblunskyWindow) -> Self {
        RawWindow {
            kmin: w.kmin,
            kmax: w.kmax,
            alpha: w.alpha,
            cut_left: w.cut_left,
            cut_right: w.cut_right,
        }
    }
}

impl VerblunskyWindow {
    pub fn new(
        kmin: i64,
        alpha: Vec<C64>,
        cut_left: Option<C64>,
        cut_right: Option<C64>,
    ) -> Result<Self> {
        if alpha.is_empty() {
            return Err(CmvError::InvalidWindow("empty coefficient list".into()));
        }
        for (i, a) in alpha.iter().enumerate() {
            if !(a.norm() < 1.0) {
                return Err(domain_err(kmin + i as i64, *a));
            }
        }
        for cut in [cut_left, cut_right].into_iter().flatten() {
            if !is_unimodular(cut) {
                return Err(CmvError::InvalidWindow(format!(
                    "cut {cut} is not unimodular"
                )));
            }
        }
        let kmax = kmin + alpha.len() as i64 - 1;
        Ok(Self {
            kmin,
            kmax,
            alpha,
            cut_left,
            cut_right,
        })
    }

    /// Window with the default cut `alpha = 1` at both ends.
    pub fn with_default_cuts(kmin: i64, alpha: Vec<C64>) -> Result<Self> {
        let one = Some(C64::new(1.0, 0.0));
        Self::new(kmin, alpha, one, one)
    }

    /// Seeded sample: each coefficient uniform on the disk of radius `amax`.
    pub fn random(seed: u64, kmin: i64, kmax: i64, amax: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&amax) {
            return Err(CmvError::InvalidWindow(format!(
                "amax = {amax} must lie in [0, 1)"
            )));
        }
        if kmax < kmin {
            return Err(CmvError::InvalidWindow("kmin > kmax".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = (kmin..=kmax)
            .map(|_| {
                let r = amax * rng.gen::<f64>().sqrt();
                let t = std::f64::consts::TAU * rng.gen::<f64>();
                C64::from_polar(r, t)
            })
            .collect();
        Self::with_default_cuts(kmin, alpha)
    }

    pub fn kmin(&self) -> i64 {
        self.kmin
    }

    pub fn kmax(&self) -> i64 {
        self.kmax
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn cut_left(&self) -> Option<C64> {
        self.cut_left
    }

    pub fn cut_right(&self) -> Option<C64> {
        self.cut_right
    }

    pub fn alphas(&self) -> &[C64] {
        &self.alpha
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.kmin..=self.kmax).contains(&k)
    }

    /// Interior coefficient `alpha_k`.
    pub fn alpha(&self, k: i64) -> Result<C64> {
        if self.contains(k) {
            Ok(self.alpha[(k - self.kmin) as usize])
        } else {
            Err(CmvError::IndexOutOfWindow {
                index: k,
                lo: self.kmin,
                hi: self.kmax,
            })
        }
    }

    /// Coefficient at `k`, including the cut sites `kmin - 1` and `kmax + 1`.
    pub fn get(&self, k: i64) -> Option<C64> {
        if self.contains(k) {
            Some(self.alpha[(k - self.kmin) as usize])
        } else if k == self.kmin - 1 {
            self.cut_left
        } else if k == self.kmax + 1 {
            self.cut_right
        } else {
            None
        }
    }

    /// Copy with `alpha_k` replaced.
    pub fn with_alpha(&self, k: i64, value: C64) -> Result<Self> {
        let idx = (self.alpha(k).map(|_| k - self.kmin)?) as usize;
        if !(value.norm() < 1.0) {
            return Err(domain_err(k, value));
        }
        let mut out = self.clone();
        out.alpha[idx] = value;
        Ok(out)
    }

    /// Sub-window `[lo, hi]` with default cuts at `lo - 1` and `hi + 1`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Self> {
        if lo > hi || !self.contains(lo) || !self.contains(hi) {
            return Err(CmvError::IndexOutOfWindow {
                index: if self.contains(lo) { hi } else { lo },
                lo: self.kmin,
                hi: self.kmax,
            });
        }
        let a = self.alpha[(lo - self.kmin) as usize..=(hi - self.kmin) as usize].to_vec();
        Self::with_default_cuts(lo, a)
    }

    /// Full coefficient run `[kmin - 1, kmax + 1]` including both cuts.
    pub(crate) fn with_cut_run(&self) -> Result<Vec<C64>> {
        let (l, r) = match (self.cut_left, self.cut_right) {
            (Some(l), Some(r)) => (l, r),
            _ => return Err(CmvError::MissingCut),
        };
        let mut run = Vec::with_capacity(self.alpha.len() + 2);
        run.push(l);
        run.extend_from_slice(&self.alpha);
        run.push(r);
        Ok(run)
    }

    /// Largest `|alpha_k|` over the interior.
    pub fn max_modulus(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("window serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
