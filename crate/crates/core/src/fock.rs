//! Truncated number-basis states and brute-force moments.
//!
//! Every state of the closed-form families can be written as a finite list of
//! number-state amplitudes once a cutoff is chosen. Expectation values are then
//! plain index sums over ladder-operator matrix elements, which makes this
//! module an independent check on every closed form in [`crate::families`].
//!
//! Truncation is controlled through the *tail mass*: the probability carried
//! by the top 10% of retained indices. A state whose tail mass is tiny has
//! essentially no weight near the cutoff, so the missing part beyond it is
//! negligible as well.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default highest occupation number for single-mode states.
pub const DEFAULT_CUTOFF_ONE: usize = 64;
/// Default highest occupation number per mode for two-mode states.
pub const DEFAULT_CUTOFF_TWO: usize = 32;
/// Tail mass above which a constructed state carries a truncation warning.
pub const TAIL_WARN: f64 = 1e-10;
/// Tail mass above which construction (or a verification run) fails.
pub const TAIL_LIMIT: f64 = 1e-8;
/// Tail mass targeted by the automatic cutoff selection.
pub const AUTO_TAIL: f64 = 1e-18;
/// Largest cutoff the automatic selection will grow to.
pub const MAX_AUTO_CUTOFF: usize = 20_000;

const NORM_FLOOR: f64 = 1e-14;

fn tail_len(dim: usize) -> usize {
    ((dim as f64) * 0.1).ceil().max(1.0) as usize
}

fn normalize(amps: &mut [C64]) -> Result<()> {
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() {
        return Err(Error::NonFinite("state amplitudes"));
    }
    if norm < NORM_FLOOR {
        return Err(Error::Degenerate("superposition"));
    }
    let inv = 1.0 / norm;
    amps.iter_mut().for_each(|c| *c *= inv);
    Ok(())
}

/// A single-mode state truncated at `cutoff` quanta, always stored normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: Vec<C64>,
    truncation_warning: bool,
}

impl FockVector {
    /// Normalizes `amps` (indices `0..=cutoff`) into a state.
    pub fn from_amplitudes(mut amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidCutoff {
                cutoff: amps.len().saturating_sub(1),
                min: 1,
            });
        }
        normalize(&mut amps)?;
        let mut v = FockVector {
            amps,
            truncation_warning: false,
        };
        v.truncation_warning = v.tail_mass() > TAIL_WARN;
        Ok(v)
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        Self::number_state(0, cutoff)
    }

    pub fn number_state(k: usize, cutoff: usize) -> Result<Self> {
        if cutoff < 1 || k > cutoff {
            return Err(Error::InvalidCutoff {
                cutoff,
                min: k.max(1),
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); cutoff + 1];
        amps[k] = C64::new(1.0, 0.0);
        Self::from_amplitudes(amps)
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Probability in the top 10% of retained occupation numbers.
    pub fn tail_mass(&self) -> f64 {
        let dim = self.amps.len();
        self.amps[dim - tail_len(dim)..]
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }

    pub fn truncation_warning(&self) -> bool {
        self.truncation_warning
    }

    /// ⟨a†a⟩.
    pub fn expect_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(k, c)| k as f64 * c.norm_sqr())
            .sum()
    }

    /// The same ray multiplied by `e^{iχ}`.
    pub fn with_phase(&self, chi: f64) -> Self {
        let p = C64::from_polar(1.0, chi);
        FockVector {
            amps: self.amps.iter().map(|c| c * p).collect(),
            truncation_warning: self.truncation_warning,
        }
    }
}

/// A two-mode state; amplitude `(m, n)` has `m` quanta in mode a and `n` in mode b.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeFockVector {
    dim_a: usize,
    dim_b: usize,
    amps: Vec<C64>,
}

impl TwoModeFockVector {
    /// Row-major amplitudes, `amps[m * (cutoff_b + 1) + n]`, normalized on construction.
    pub fn from_amplitudes(cutoff_a: usize, cutoff_b: usize, mut amps: Vec<C64>) -> Result<Self> {
        if cutoff_a < 1 || cutoff_b < 1 {
            return Err(Error::InvalidCutoff {
                cutoff: cutoff_a.min(cutoff_b),
                min: 1,
            });
        }
        let (dim_a, dim_b) = (cutoff_a + 1, cutoff_b + 1);
        if amps.len() != dim_a * dim_b {
            return Err(Error::Domain(format!(
                "expected {} amplitudes, got {}",
                dim_a * dim_b,
                amps.len()
            )));
        }
        normalize(&mut amps)?;
        Ok(TwoModeFockVector { dim_a, dim_b, amps })
    }

    pub fn vacuum(cutoff_a: usize, cutoff_b: usize) -> Result<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); (cutoff_a + 1) * (cutoff_b + 1)];
        amps[0] = C64::new(1.0, 0.0);
        Self::from_amplitudes(cutoff_a, cutoff_b, amps)
    }

    /// `|a⟩ ⊗ |b⟩`.
    pub fn product(a: &FockVector, b: &FockVector) -> Self {
        let amps = a
            .amps()
            .iter()
            .flat_map(|ca| b.amps().iter().map(move |cb| ca * cb))
            .collect();
        TwoModeFockVector {
            dim_a: a.amps.len(),
            dim_b: b.amps.len(),
            amps,
        }
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.dim_a - 1, self.dim_b - 1)
    }

    pub fn amp(&self, m: usize, n: usize) -> C64 {
        self.amps[m * self.dim_b + n]
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Tail mass of each mode's reduced occupation distribution.
    pub fn tail_mass_per_mode(&self) -> (f64, f64) {
        let (ta, tb) = (tail_len(self.dim_a), tail_len(self.dim_b));
        let mut mass_a = 0.0;
        let mut mass_b = 0.0;
        for m in 0..self.dim_a {
            for n in 0..self.dim_b {
                let p = self.amp(m, n).norm_sqr();
                if m >= self.dim_a - ta {
                    mass_a += p;
                }
                if n >= self.dim_b - tb {
                    mass_b += p;
                }
            }
        }
        (mass_a, mass_b)
    }

    pub fn tail_mass(&self) -> f64 {
        let (a, b) = self.tail_mass_per_mode();
        a.max(b)
    }

    pub fn with_phase(&self, chi: f64) -> Self {
        let p = C64::from_polar(1.0, chi);
        TwoModeFockVector {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            amps: self.amps.iter().map(|c| c * p).collect(),
        }
    }
}

/// Anything with a reportable truncation proxy.
pub trait TailMass {
    fn tail_mass(&self) -> f64;
}

impl TailMass for FockVector {
    fn tail_mass(&self) -> f64 {
        FockVector::tail_mass(self)
    }
}

impl TailMass for TwoModeFockVector {
    fn tail_mass(&self) -> f64 {
        TwoModeFockVector::tail_mass(self)
    }
}

pub fn tail_mass<T: TailMass + ?Sized>(v: &T) -> f64 {
    v.tail_mass()
}

/// Expectation values entering the two-mode energy density.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleMoments {
    pub n_a: f64,
    pub n_b: f64,
    pub a2: C64,
    pub b2: C64,
    pub adag_b: C64,
    pub ab: C64,
}

impl OracleMoments {
    /// Largest absolute difference over all six moments.
    pub fn max_deviation(&self, other: &OracleMoments) -> f64 {
        [
            (self.n_a - other.n_a).abs(),
            (self.n_b - other.n_b).abs(),
            (self.a2 - other.a2).norm(),
            (self.b2 - other.b2).norm(),
            (self.adag_b - other.adag_b).norm(),
            (self.ab - other.ab).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// state construction

fn coherent_amps(alpha: C64, dim: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for l in 1..dim {
        c = c * alpha / (l as f64).sqrt();
        amps.push(c);
    }
    amps
}

fn squeezed_amps(r: f64, delta: f64, dim: usize) -> Vec<C64> {
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    let w = C64::from_polar(-0.5 * r.tanh(), delta);
    let mut c = C64::new((1.0 / r.cosh()).sqrt(), 0.0);
    amps[0] = c;
    let mut k = 2;
    while k < dim {
        let n = (k / 2) as f64;
        c = c * w * ((k * (k - 1)) as f64).sqrt() / n;
        amps[k] = c;
        k += 2;
    }
    amps
}

fn two_mode_squeezed_amps(r: f64, delta: f64, dim: usize) -> Vec<C64> {
    let mut amps = vec![C64::new(0.0, 0.0); dim * dim];
    let ratio = C64::from_polar(-r.tanh(), delta);
    let mut c = C64::new(1.0 / r.cosh(), 0.0);
    for n in 0..dim {
        amps[n * dim + n] = c;
        c *= ratio;
    }
    amps
}

fn check_finite(x: f64, what: &'static str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Coherent state `|α⟩` with amplitudes `∝ αˡ/√(ℓ!)`.
///
/// A tail mass above [`TAIL_WARN`] sets the truncation warning rather than failing.
pub fn coherent_vector(alpha: C64, cutoff: usize) -> Result<FockVector> {
    if cutoff < 1 {
        return Err(Error::InvalidCutoff { cutoff, min: 1 });
    }
    check_finite(alpha.re + alpha.im, "coherent amplitude")?;
    FockVector::from_amplitudes(coherent_amps(alpha, cutoff + 1))
}

/// Squeezed vacuum `S(ξ)|0⟩`, `ξ = r e^{iδ}`, built from its even-number expansion.
///
/// Negative `r` is accepted and equals `δ → δ + π`.
pub fn squeezed_vacuum_vector(r: f64, delta: f64, cutoff: usize) -> Result<FockVector> {
    if cutoff < 2 {
        return Err(Error::InvalidCutoff { cutoff, min: 2 });
    }
    check_finite(r + delta, "squeeze parameters")?;
    let v = FockVector::from_amplitudes(squeezed_amps(r, delta, cutoff + 1))?;
    let tail = v.tail_mass();
    if tail > TAIL_LIMIT {
        return Err(Error::Truncation {
            tail,
            limit: TAIL_LIMIT,
            cutoff,
        });
    }
    Ok(v)
}

/// Two-mode squeezed vacuum `exp(ξ*ab − ξa†b†)|0,0⟩` with `c_{n,n} = (−e^{iδ} tanh r)ⁿ / cosh r`.
pub fn two_mode_squeezed_vector(r: f64, delta: f64, cutoff: usize) -> Result<TwoModeFockVector> {
    if cutoff < 2 {
        return Err(Error::InvalidCutoff { cutoff, min: 2 });
    }
    check_finite(r + delta, "squeeze parameters")?;
    let v = TwoModeFockVector::from_amplitudes(
        cutoff,
        cutoff,
        two_mode_squeezed_amps(r, delta, cutoff + 1),
    )?;
    let tail = v.tail_mass();
    if tail > TAIL_LIMIT {
        return Err(Error::Truncation {
            tail,
            limit: TAIL_LIMIT,
            cutoff,
        });
    }
    Ok(v)
}

fn grow_cutoff(min_cutoff: usize, tol: f64, tail_at: impl Fn(usize) -> f64) -> Result<usize> {
    let mut cutoff = min_cutoff;
    loop {
        let tail = tail_at(cutoff);
        if tail <= tol {
            return Ok(cutoff);
        }
        if cutoff >= MAX_AUTO_CUTOFF {
            return Err(Error::Truncation {
                tail,
                limit: tol,
                cutoff,
            });
        }
        cutoff = (cutoff + cutoff / 4 + 8).min(MAX_AUTO_CUTOFF);
    }
}

fn tail_of(amps: &[C64]) -> f64 {
    let total: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let dim = amps.len();
    amps[dim - tail_len(dim)..]
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        / total
}

/// Smallest cutoff ≥ `min_cutoff` whose coherent-state tail mass is at most `tol`.
pub fn coherent_cutoff(alpha: C64, min_cutoff: usize, tol: f64) -> Result<usize> {
    grow_cutoff(min_cutoff.max(1), tol, |c| {
        tail_of(&coherent_amps(alpha, c + 1))
    })
}

/// Smallest cutoff ≥ `min_cutoff` whose squeezed-vacuum tail mass is at most `tol`.
pub fn squeezed_cutoff(r: f64, min_cutoff: usize, tol: f64) -> Result<usize> {
    grow_cutoff(min_cutoff.max(2), tol, |c| {
        tail_of(&squeezed_amps(r, 0.0, c + 1))
    })
}

/// Per-mode cutoff for the two-mode squeezed vacuum (diagonal weights `tanh²ⁿ r`).
pub fn two_mode_squeezed_cutoff(r: f64, min_cutoff: usize, tol: f64) -> Result<usize> {
    let t2 = r.tanh().powi(2);
    grow_cutoff(min_cutoff.max(2), tol, |c| {
        let dim = c + 1;
        let weights: Vec<C64> = (0..dim)
            .map(|n| C64::new(t2.powi(n as i32), 0.0).sqrt())
            .collect();
        tail_of(&weights)
    })
}

// ---------------------------------------------------------------------------
// superposition and inner products

/// Normalized linear combination of equal-cutoff states.
pub fn superpose(terms: &[(C64, &FockVector)]) -> Result<FockVector> {
    let (_, first) = terms.first().ok_or(Error::EmptySuperposition)?;
    let dim = first.amps.len();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (coeff, state) in terms {
        if state.amps.len() != dim {
            return Err(Error::CutoffMismatch {
                left: dim - 1,
                right: state.cutoff(),
            });
        }
        for (acc, c) in amps.iter_mut().zip(&state.amps) {
            *acc += coeff * c;
        }
    }
    FockVector::from_amplitudes(amps)
}

/// Two-mode analogue of [`superpose`].
pub fn superpose_two_mode(terms: &[(C64, &TwoModeFockVector)]) -> Result<TwoModeFockVector> {
    let (_, first) = terms.first().ok_or(Error::EmptySuperposition)?;
    let (ca, cb) = first.cutoffs();
    let mut amps = vec![C64::new(0.0, 0.0); first.amps.len()];
    for (coeff, state) in terms {
        if state.cutoffs() != (ca, cb) {
            return Err(Error::CutoffMismatch {
                left: ca,
                right: state.cutoffs().0,
            });
        }
        for (acc, c) in amps.iter_mut().zip(&state.amps) {
            *acc += coeff * c;
        }
    }
    TwoModeFockVector::from_amplitudes(ca, cb, amps)
}

/// `⟨u|v⟩`.
pub fn inner(u: &FockVector, v: &FockVector) -> Result<C64> {
    matrix_element(u, Ladder::Identity, v)
}

/// Single-mode operators whose matrix elements the oracle evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Identity,
    /// `a`
    Lower,
    /// `a²`
    Lower2,
    /// `(a†)²`
    Raise2,
    /// `a†a`
    Number,
}

/// `⟨u|op|v⟩` by direct index summation.
pub fn matrix_element(u: &FockVector, op: Ladder, v: &FockVector) -> Result<C64> {
    if u.amps.len() != v.amps.len() {
        return Err(Error::CutoffMismatch {
            left: u.cutoff(),
            right: v.cutoff(),
        });
    }
    let (ua, va) = (&u.amps, &v.amps);
    let dim = ua.len();
    let sum = match op {
        Ladder::Identity => ua.iter().zip(va).map(|(x, y)| x.conj() * y).sum(),
        Ladder::Number => ua
            .iter()
            .zip(va)
            .enumerate()
            .map(|(k, (x, y))| x.conj() * y * k as f64)
            .sum(),
        Ladder::Lower => (0..dim - 1)
            .map(|k| ua[k].conj() * va[k + 1] * ((k + 1) as f64).sqrt())
            .sum(),
        Ladder::Lower2 => (0..dim.saturating_sub(2))
            .map(|k| ua[k].conj() * va[k + 2] * (((k + 1) * (k + 2)) as f64).sqrt())
            .sum(),
        Ladder::Raise2 => (2..dim)
            .map(|k| ua[k].conj() * va[k - 2] * ((k * (k - 1)) as f64).sqrt())
            .sum(),
    };
    Ok(sum)
}

/// `n = ⟨a†a⟩` and `⟨a²⟩`; the mode-b fields are zero.
pub fn one_mode_moments(v: &FockVector) -> OracleMoments {
    let a2 = matrix_element(v, Ladder::Lower2, v).expect("same state");
    OracleMoments {
        n_a: v.expect_number(),
        a2,
        ..Default::default()
    }
}

/// All six quadratic moments of a two-mode state.
pub fn two_mode_moments(v: &TwoModeFockVector) -> OracleMoments {
    let (da, db) = (v.dim_a, v.dim_b);
    let c = |m: usize, n: usize| v.amps[m * db + n];
    let mut out = OracleMoments::default();
    for m in 0..da {
        for n in 0..db {
            let here = c(m, n);
            let p = here.norm_sqr();
            out.n_a += m as f64 * p;
            out.n_b += n as f64 * p;
            if m + 2 < da {
                out.a2 += here.conj() * c(m + 2, n) * (((m + 1) * (m + 2)) as f64).sqrt();
            }
            if n + 2 < db {
                out.b2 += here.conj() * c(m, n + 2) * (((n + 1) * (n + 2)) as f64).sqrt();
            }
            if m + 1 < da && n + 1 < db {
                let root = (((m + 1) * (n + 1)) as f64).sqrt();
                // a†b |m, n+1⟩ = √(m+1)√(n+1) |m+1, n⟩
                out.adag_b += c(m + 1, n).conj() * c(m, n + 1) * root;
                out.ab += here.conj() * c(m + 1, n + 1) * root;
            }
        }
    }
    out
}
