//! Closed-form quadratic moments for the one- and two-mode state families.
//!
//! Every family is a normalized two-term superposition (or a single squeezed
//! state), and the energy density only needs `⟨a†a⟩`, `⟨a²⟩` and, for two
//! modes, `⟨b†b⟩`, `⟨b²⟩`, `⟨a†b⟩`, `⟨ab⟩`. The functions here evaluate those
//! analytically; [`crate::fock`] recomputes them by brute force.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::OracleMoments;

/// Normalization denominators at or below this are treated as a vanishing state.
pub const DEGENERATE_EPS: f64 = 1e-14;

/// Largest tolerated rounding error in `R − n` computed as a difference.
pub const DEPTH_ROUNDING_LIMIT: f64 = 1e-6;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn phase_of(z: C64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        wrap_angle(z.arg())
    }
}

fn nonneg(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("{name} must be finite")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("{name} must be ≥ 0, got {x}")));
    }
    Ok(())
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite")))
    }
}

/// Single-mode moments: `n = ⟨a†a⟩` and `⟨a²⟩ = amp·e^{i·phase}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OneModeMoments {
    pub n: f64,
    pub amp: f64,
    pub phase: f64,
}

impl OneModeMoments {
    pub fn from_complex(n: f64, a2: C64) -> Self {
        OneModeMoments {
            n,
            amp: a2.norm(),
            phase: phase_of(a2),
        }
    }

    pub fn from_oracle(m: &OracleMoments) -> Self {
        Self::from_complex(m.n_a, m.a2)
    }

    pub fn a2(&self) -> C64 {
        C64::from_polar(self.amp, self.phase)
    }

    /// `R − n`; the most negative energy density of the mode is `−ω·depth`.
    pub fn depth(&self) -> f64 {
        self.amp - self.n
    }

    pub fn to_oracle(&self) -> OracleMoments {
        OracleMoments {
            n_a: self.n,
            a2: self.a2(),
            ..Default::default()
        }
    }

    /// Embeds the mode as mode 1 of a two-mode excitation with mode 2 in vacuum.
    pub fn to_two_mode(&self) -> TwoModeMoments {
        TwoModeMoments {
            n1: self.n,
            amp: [self.amp, 0.0, 0.0, 0.0],
            phase: [self.phase, 0.0, 0.0, 0.0],
            ..Default::default()
        }
    }
}

/// Two-mode moments. `amp[k]·e^{i·phase[k]}` are, in order,
/// `⟨a²⟩`, `⟨b²⟩`, `⟨a†b⟩`, `⟨ab⟩`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TwoModeMoments {
    pub n1: f64,
    pub n2: f64,
    pub amp: [f64; 4],
    pub phase: [f64; 4],
}

impl TwoModeMoments {
    pub fn from_complex(n1: f64, n2: f64, values: [C64; 4]) -> Self {
        TwoModeMoments {
            n1,
            n2,
            amp: values.map(|z| z.norm()),
            phase: values.map(phase_of),
        }
    }

    pub fn from_oracle(m: &OracleMoments) -> Self {
        Self::from_complex(m.n_a, m.n_b, [m.a2, m.b2, m.adag_b, m.ab])
    }

    pub fn complex(&self) -> [C64; 4] {
        [0, 1, 2, 3].map(|k| C64::from_polar(self.amp[k], self.phase[k]))
    }

    pub fn to_oracle(&self) -> OracleMoments {
        let [a2, b2, adag_b, ab] = self.complex();
        OracleMoments {
            n_a: self.n1,
            n_b: self.n2,
            a2,
            b2,
            adag_b,
            ab,
        }
    }

    /// `R₁ − n₁`, the first mode's depth.
    pub fn depth(&self) -> f64 {
        self.amp[0] - self.n1
    }

    pub fn is_finite(&self) -> bool {
        self.n1.is_finite()
            && self.n2.is_finite()
            && self.amp.iter().chain(&self.phase).all(|x| x.is_finite())
    }
}

/// Moments of either arity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Moments {
    One(OneModeMoments),
    Two(TwoModeMoments),
}

impl Moments {
    pub fn depth(&self) -> f64 {
        match self {
            Moments::One(m) => m.depth(),
            Moments::Two(m) => m.depth(),
        }
    }

    /// `(n, R, γ)` of the first mode.
    pub fn first_mode(&self) -> (f64, f64, f64) {
        match self {
            Moments::One(m) => (m.n, m.amp, m.phase),
            Moments::Two(m) => (m.n1, m.amp[0], m.phase[0]),
        }
    }

    pub fn as_two_mode(&self) -> TwoModeMoments {
        match self {
            Moments::One(m) => m.to_two_mode(),
            Moments::Two(m) => *m,
        }
    }

    pub fn to_oracle(&self) -> OracleMoments {
        match self {
            Moments::One(m) => m.to_oracle(),
            Moments::Two(m) => m.to_oracle(),
        }
    }
}

/// Parameters of one member of a state family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyParams {
    /// `N(|α⟩ + η|β⟩)`.
    CoherentPair { alpha: C64, beta: C64, eta: C64 },
    /// `S(r e^{iδ})|0⟩`.
    SqueezedVacuum { r: f64, delta: f64 },
    /// `N(|r⟩ + η|−r⟩)`.
    SqueezedPair { r: f64, eta: C64 },
    /// `N(|r e^{iδ}⟩ + η|α⟩)`.
    CoherentSqueezed {
        r: f64,
        delta: f64,
        alpha: C64,
        eta: C64,
    },
    /// `N(|r⟩ + η|0⟩)`.
    VacuumSqueezed { r: f64, eta: C64 },
    /// Two-mode squeezed vacuum.
    BarnettRadmore { r: f64, delta: f64 },
    /// `N(|−r⟩|−r⟩ + e^{iθ}|r⟩|r⟩)`.
    ZhangReal { r: f64, theta: f64 },
    /// `N(|α⟩|β⟩ + e^{iθ}|−α⟩|−β⟩)` with `|α| = |β| = σ`.
    EntangledCoherent {
        sigma: f64,
        theta: f64,
        delta1: f64,
        delta2: f64,
    },
}

impl FamilyParams {
    pub fn kind(&self) -> FamilyKind {
        match self {
            FamilyParams::CoherentPair { .. } => FamilyKind::CoherentPair,
            FamilyParams::SqueezedVacuum { .. } => FamilyKind::SqueezedVacuum,
            FamilyParams::SqueezedPair { .. } => FamilyKind::SqueezedPair,
            FamilyParams::CoherentSqueezed { .. } => FamilyKind::CoherentSqueezed,
            FamilyParams::VacuumSqueezed { .. } => FamilyKind::VacuumSqueezed,
            FamilyParams::BarnettRadmore { .. } => FamilyKind::BarnettRadmore,
            FamilyParams::ZhangReal { .. } => FamilyKind::ZhangReal,
            FamilyParams::EntangledCoherent { .. } => FamilyKind::EntangledCoherent,
        }
    }

    pub fn moments(&self) -> Result<Moments> {
        Ok(match *self {
            FamilyParams::CoherentPair { alpha, beta, eta } => {
                Moments::One(coherent_superposition_moments(alpha, beta, eta)?)
            }
            FamilyParams::SqueezedVacuum { r, delta } => {
                Moments::One(squeezed_vacuum_moments(r, delta)?)
            }
            FamilyParams::SqueezedPair { r, eta } => {
                Moments::One(superposed_squeezed_moments(r, eta)?)
            }
            FamilyParams::CoherentSqueezed {
                r,
                delta,
                alpha,
                eta,
            } => Moments::One(coherent_plus_squeezed_moments(r, delta, alpha, eta)?),
            FamilyParams::VacuumSqueezed { r, eta } => {
                Moments::One(vacuum_plus_squeezed_moments(r, eta)?)
            }
            FamilyParams::BarnettRadmore { r, delta } => {
                Moments::Two(barnett_radmore_moments(r, delta)?)
            }
            FamilyParams::ZhangReal { r, theta } => Moments::Two(zhang_moments(r, theta)?),
            FamilyParams::EntangledCoherent {
                sigma,
                theta,
                delta1,
                delta2,
            } => Moments::Two(entangled_coherent_moments(sigma, theta, delta1, delta2)?),
        })
    }

    /// `R − n` (of mode 1). Squeezed vacuum uses `(1 − e^{−2r})/2`, which keeps
    /// full precision where `R` and `n` are both huge; for the other families
    /// the difference is refused once its rounding error could exceed
    /// [`DEPTH_ROUNDING_LIMIT`].
    pub fn depth(&self) -> Result<f64> {
        match *self {
            FamilyParams::SqueezedVacuum { r, delta } => {
                squeezed_vacuum_moments(r, delta)?;
                Ok(-0.5 * (-2.0 * r).exp_m1())
            }
            _ => {
                let (n, amp, _) = self.moments()?.first_mode();
                let bound = 8.0 * f64::EPSILON * n.max(amp);
                if bound > DEPTH_ROUNDING_LIMIT {
                    return Err(Error::Cancellation { n, bound });
                }
                Ok(amp - n)
            }
        }
    }
}

/// The family tags, with a flat named-parameter view used by sweeps and searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    CoherentPair,
    SqueezedVacuum,
    SqueezedPair,
    CoherentSqueezed,
    VacuumSqueezed,
    BarnettRadmore,
    ZhangReal,
    EntangledCoherent,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 8] = [
        FamilyKind::CoherentPair,
        FamilyKind::SqueezedVacuum,
        FamilyKind::SqueezedPair,
        FamilyKind::CoherentSqueezed,
        FamilyKind::VacuumSqueezed,
        FamilyKind::BarnettRadmore,
        FamilyKind::ZhangReal,
        FamilyKind::EntangledCoherent,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::CoherentPair => "coherent-pair",
            FamilyKind::SqueezedVacuum => "squeezed-vacuum",
            FamilyKind::SqueezedPair => "superposed-squeezed",
            FamilyKind::CoherentSqueezed => "coherent-squeezed",
            FamilyKind::VacuumSqueezed => "vacuum-squeezed",
            FamilyKind::BarnettRadmore => "barnett-radmore",
            FamilyKind::ZhangReal => "zhang",
            FamilyKind::EntangledCoherent => "entangled-coherent",
        }
    }

    /// Scalar parameter names; complex parameters appear as magnitude + `_phase` pairs.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            FamilyKind::CoherentPair => &["alpha", "delta1", "beta", "delta2", "eta", "delta"],
            FamilyKind::SqueezedVacuum => &["r", "delta"],
            FamilyKind::SqueezedPair => &["r", "eta", "theta"],
            FamilyKind::CoherentSqueezed => {
                &["r", "delta", "alpha", "alpha_phase", "eta", "eta_phase"]
            }
            FamilyKind::VacuumSqueezed => &["r", "eta", "eta_phase"],
            FamilyKind::BarnettRadmore => &["r", "delta"],
            FamilyKind::ZhangReal => &["r", "theta"],
            FamilyKind::EntangledCoherent => &["sigma", "theta", "delta1", "delta2"],
        }
    }

    pub fn default_values(&self) -> Vec<f64> {
        self.param_names()
            .iter()
            .map(|name| if *name == "eta" { 1.0 } else { 0.0 })
            .collect()
    }

    /// Phases are periodic; everything else is a magnitude bounded below by 0.
    pub fn is_angular(name: &str) -> bool {
        name.starts_with("delta") || name.starts_with("theta") || name.ends_with("_phase")
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names().iter().position(|p| *p == name)
    }

    pub fn is_two_mode(&self) -> bool {
        matches!(
            self,
            FamilyKind::BarnettRadmore | FamilyKind::ZhangReal | FamilyKind::EntangledCoherent
        )
    }

    /// Builds parameters from values ordered as [`FamilyKind::param_names`].
    pub fn build(&self, v: &[f64]) -> Result<FamilyParams> {
        let names = self.param_names();
        if v.len() != names.len() {
            return Err(Error::Domain(format!(
                "{} expects {} values, got {}",
                self.name(),
                names.len(),
                v.len()
            )));
        }
        for (name, x) in names.iter().zip(v) {
            finite(name, *x)?;
        }
        let polar = C64::from_polar;
        Ok(match self {
            FamilyKind::CoherentPair => FamilyParams::CoherentPair {
                alpha: polar(v[0], v[1]),
                beta: polar(v[2], v[3]),
                eta: polar(v[4], v[5]),
            },
            FamilyKind::SqueezedVacuum => FamilyParams::SqueezedVacuum {
                r: v[0],
                delta: v[1],
            },
            FamilyKind::SqueezedPair => FamilyParams::SqueezedPair {
                r: v[0],
                eta: polar(v[1], v[2]),
            },
            FamilyKind::CoherentSqueezed => FamilyParams::CoherentSqueezed {
                r: v[0],
                delta: v[1],
                alpha: polar(v[2], v[3]),
                eta: polar(v[4], v[5]),
            },
            FamilyKind::VacuumSqueezed => FamilyParams::VacuumSqueezed {
                r: v[0],
                eta: polar(v[1], v[2]),
            },
            FamilyKind::BarnettRadmore => FamilyParams::BarnettRadmore {
                r: v[0],
                delta: v[1],
            },
            FamilyKind::ZhangReal => FamilyParams::ZhangReal {
                r: v[0],
                theta: v[1],
            },
            FamilyKind::EntangledCoherent => FamilyParams::EntangledCoherent {
                sigma: v[0],
                theta: v[1],
                delta1: v[2],
                delta2: v[3],
            },
        })
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown family '{s}'")))
    }
}

// ---------------------------------------------------------------------------
// single mode

/// Moments of `N(|α⟩ + η|β⟩)`.
pub fn coherent_superposition_moments(alpha: C64, beta: C64, eta: C64) -> Result<OneModeMoments> {
    // ⟨α|β⟩
    let ov = (-0.5 * (alpha.norm_sqr() + beta.norm_sqr()) + alpha.conj() * beta).exp();
    let den = 1.0 + eta.norm_sqr() + 2.0 * (eta * ov).re;
    if !den.is_finite() {
        return Err(Error::NonFinite("coherent-pair normalization"));
    }
    if den <= DEGENERATE_EPS {
        return Err(Error::Degenerate("coherent pair"));
    }
    let e2 = eta.norm_sqr();
    let n =
        (alpha.norm_sqr() + e2 * beta.norm_sqr() + 2.0 * (eta * alpha.conj() * beta * ov).re) / den;
    let a2 = (alpha * alpha
        + e2 * beta * beta
        + eta * beta * beta * ov
        + eta.conj() * alpha * alpha * ov.conj())
        / den;
    Ok(OneModeMoments::from_complex(n, a2))
}

/// `n = sinh²r`, `⟨a²⟩ = −e^{iδ} sinh r cosh r`.
pub fn squeezed_vacuum_moments(r: f64, delta: f64) -> Result<OneModeMoments> {
    nonneg("r", r)?;
    finite("delta", delta)?;
    Ok(OneModeMoments {
        n: r.sinh().powi(2),
        amp: r.sinh() * r.cosh(),
        phase: if r == 0.0 {
            0.0
        } else {
            wrap_angle(delta + PI)
        },
    })
}

/// Moments of `N(|r⟩ + η|−r⟩)` with real squeeze parameter `r`.
pub fn superposed_squeezed_moments(r: f64, eta: C64) -> Result<OneModeMoments> {
    nonneg("r", r)?;
    let (s, c) = (r.sinh(), r.cosh());
    let ov = elements::squeezed_overlap_opposite(r);
    let cross_num = elements::squeezed_cross_number(r);
    let cross_low = elements::squeezed_cross_lower2(r);
    let e2 = eta.norm_sqr();
    let den = 1.0 + e2 + 2.0 * eta.re * ov;
    if den <= DEGENERATE_EPS {
        return Err(Error::Degenerate("squeezed pair"));
    }
    let n = (s * s * (1.0 + e2) + 2.0 * eta.re * cross_num) / den;
    // ⟨r|a²|−r⟩ = −⟨−r|a²|r⟩
    let a2 = (C64::new((e2 - 1.0) * s * c, 0.0) - (eta - eta.conj()) * cross_low) / den;
    Ok(OneModeMoments::from_complex(n, a2))
}

/// Moments of `N(|r e^{iδ}⟩ + η|α⟩)`.
pub fn coherent_plus_squeezed_moments(
    r: f64,
    delta: f64,
    alpha: C64,
    eta: C64,
) -> Result<OneModeMoments> {
    nonneg("r", r)?;
    finite("delta", delta)?;
    let (s, c) = (r.sinh(), r.cosh());
    let ip = elements::squeezed_coherent_overlap(r, delta, alpha);
    let number = elements::squeezed_coherent_number(r, delta, alpha);
    let raise2 = elements::squeezed_coherent_raise2(r, delta, alpha);
    let e2 = eta.norm_sqr();
    let den = 1.0 + e2 + 2.0 * (eta * ip).re;
    if !den.is_finite() {
        return Err(Error::NonFinite("coherent-squeezed normalization"));
    }
    if den <= DEGENERATE_EPS {
        return Err(Error::Degenerate("coherent-squeezed"));
    }
    let n = (s * s + e2 * alpha.norm_sqr() + 2.0 * (eta * number).re) / den;
    let a2 = (-C64::from_polar(s * c, delta)
        + e2 * alpha * alpha
        + eta * alpha * alpha * ip
        + eta.conj() * raise2.conj())
        / den;
    Ok(OneModeMoments::from_complex(n, a2))
}

/// Moments of `N(|r⟩ + η|0⟩)`.
///
/// At `η = −1`, `r → 0` the state tends to `|2⟩`; when the normalization
/// collapses there the `|2⟩` moments (`n = 2`, `⟨a²⟩ = 0`) are returned.
pub fn vacuum_plus_squeezed_moments(r: f64, eta: C64) -> Result<OneModeMoments> {
    nonneg("r", r)?;
    let (s, c, t) = (r.sinh(), r.cosh(), r.tanh());
    let root_sech = (1.0 / c).sqrt();
    // 1 − √sech r without cancellation
    let one_minus_root = 2.0 * (0.5 * r).sinh().powi(2) / c / (1.0 + root_sech);
    let den = (1.0 + eta).norm_sqr() - 2.0 * eta.re * one_minus_root;
    if den <= DEGENERATE_EPS {
        if (1.0 + eta).norm() < 1e-6 {
            return Ok(OneModeMoments {
                n: 2.0,
                amp: 0.0,
                phase: 0.0,
            });
        }
        return Err(Error::Degenerate("vacuum-squeezed"));
    }
    let n = s * s / den;
    // sinh r cosh r · sech^{5/2} r = tanh r · √sech r
    let a2 = -(C64::new(s * c, 0.0) + eta.conj() * t * root_sech) / den;
    Ok(OneModeMoments::from_complex(n, a2))
}

/// `R − n` for `N(|r⟩ − |η||0⟩)` in its compact real-η form.
pub fn vacuum_squeezed_depth_negative_eta(r: f64, eta_abs: f64) -> f64 {
    let (s, c) = (r.sinh(), r.cosh());
    let sech = 1.0 / c;
    let root_sech = sech.sqrt();
    let one_minus_root = 2.0 * (0.5 * r).sinh().powi(2) / c / (1.0 + root_sech);
    let den = (1.0 - eta_abs).powi(2) + 2.0 * eta_abs * one_minus_root;
    if den == 0.0 {
        // the |2⟩ limit
        return -2.0;
    }
    s * (c * (1.0 - eta_abs * sech.powf(2.5)).abs() - s) / den
}

// ---------------------------------------------------------------------------
// two modes

/// Two-mode squeezed vacuum: `n₁ = n₂ = sinh²r`, `⟨ab⟩ = −e^{iδ} sinh r cosh r`.
pub fn barnett_radmore_moments(r: f64, delta: f64) -> Result<TwoModeMoments> {
    nonneg("r", r)?;
    finite("delta", delta)?;
    let ab = -C64::from_polar(r.sinh() * r.cosh(), delta);
    let n = r.sinh().powi(2);
    let zero = C64::new(0.0, 0.0);
    Ok(TwoModeMoments::from_complex(n, n, [zero, zero, zero, ab]))
}

/// Moments of `N(|−r⟩_a|−r⟩_b + e^{iθ}|r⟩_a|r⟩_b)`.
///
/// Each interference term carries the overlap of *both* modes, so relative to a
/// single-mode cross element it picks up an extra factor `√sech 2r`.
pub fn zhang_moments(r: f64, theta: f64) -> Result<TwoModeMoments> {
    nonneg("r", r)?;
    finite("theta", theta)?;
    let (s, ch2) = (r.sinh(), (2.0 * r).cosh());
    let (sin_t, cos_t) = theta.sin_cos();
    // 1 + cos θ sech 2r = 2cos²(θ/2) − 2cos θ sinh²r / cosh 2r
    let bracket = 2.0 * (0.5 * theta).cos().powi(2) - 2.0 * cos_t * s * s / ch2;
    let den = 2.0 * bracket;
    if den <= DEGENERATE_EPS {
        return Err(Error::Degenerate("zhang state"));
    }
    let n = 2.0 * s * s * (1.0 - cos_t / (ch2 * ch2)) / den;
    let a2 = -I * sin_t * (2.0 * r).tanh() / ch2 / den;
    let zero = C64::new(0.0, 0.0);
    Ok(TwoModeMoments::from_complex(n, n, [a2, a2, zero, zero]))
}

/// Leading small-`r` coefficients `(c_n, c_Rn)` with `n₁ ~ c_n r²`, `R₁ − n₁ ~ c_Rn r`.
pub fn zhang_small_r_asymptotics(theta: f64) -> Result<(f64, f64)> {
    finite("theta", theta)?;
    let one_plus_cos = 2.0 * (0.5 * theta).cos().powi(2);
    if one_plus_cos < 1e-15 {
        return Err(Error::Domain("θ = π has no small-r expansion".into()));
    }
    Ok((
        (1.0 - theta.cos()) / one_plus_cos,
        theta.sin().abs() / one_plus_cos,
    ))
}

/// Moments of `N(|α⟩|β⟩ + e^{iθ}|−α⟩|−β⟩)`, `α = σe^{iδ₁}`, `β = σe^{iδ₂}`.
pub fn entangled_coherent_moments(
    sigma: f64,
    theta: f64,
    delta1: f64,
    delta2: f64,
) -> Result<TwoModeMoments> {
    nonneg("sigma", sigma)?;
    finite("theta", theta)?;
    finite("delta1", delta1)?;
    finite("delta2", delta2)?;
    let e4 = (-4.0 * sigma * sigma).exp();
    let one_minus_e4 = -(-4.0 * sigma * sigma).exp_m1();
    // 1 ± cos θ e^{−4σ²}, each written as a sum of non-negative terms
    let plus = one_minus_e4 + e4 * 2.0 * (0.5 * theta).cos().powi(2);
    let minus = one_minus_e4 + e4 * 2.0 * (0.5 * theta).sin().powi(2);
    let den = 2.0 * plus;
    if den <= DEGENERATE_EPS {
        return Err(Error::Degenerate("entangled coherent state"));
    }
    let alpha = C64::from_polar(sigma, delta1);
    let beta = C64::from_polar(sigma, delta2);
    let n = 2.0 * sigma * sigma * minus / den;
    let same = 2.0 * plus / den;
    let swap = 2.0 * minus / den;
    Ok(TwoModeMoments::from_complex(
        n,
        n,
        [
            alpha * alpha * same,
            beta * beta * same,
            alpha.conj() * beta * swap,
            alpha * beta * same,
        ],
    ))
}

/// `σ² e^{−2σ²}(1 + e^{−2σ²}) / (1 + e^{−4σ²})`.
pub fn f_sigma(sigma: f64) -> f64 {
    let e2 = (-2.0 * sigma * sigma).exp();
    sigma * sigma * e2 * (1.0 + e2) / (1.0 + e2 * e2)
}

// ---------------------------------------------------------------------------

/// Matrix elements between squeezed and coherent states, in closed form.
///
/// `|±r⟩` are squeezed vacua with real squeeze parameter `±r`; `|ξ⟩` has
/// `ξ = r e^{iδ}`.
pub mod elements {
    use super::*;

    fn parts(r: f64) -> (f64, f64) {
        (1.0 / r.cosh(), r.tanh())
    }

    /// `⟨−r|r⟩ = √sech 2r`.
    pub fn squeezed_overlap_opposite(r: f64) -> f64 {
        (1.0 / (2.0 * r).cosh()).sqrt()
    }

    /// `⟨−r|a†a|r⟩ = −sech r tanh²r / (1 + tanh²r)^{3/2}`.
    pub fn squeezed_cross_number(r: f64) -> f64 {
        let (sech, t) = parts(r);
        -sech * t * t / (1.0 + t * t).powf(1.5)
    }

    /// `⟨−r|a²|r⟩ = −sech r tanh r / (1 + tanh²r)^{3/2}`.
    pub fn squeezed_cross_lower2(r: f64) -> f64 {
        let (sech, t) = parts(r);
        -sech * t / (1.0 + t * t).powf(1.5)
    }

    /// The same element with `(1 + tanh r)^{3/2}` in the denominator. It does not
    /// match the number-basis sum; kept so verification can report by how much.
    pub fn squeezed_cross_lower2_linear_tanh(r: f64) -> f64 {
        let (sech, t) = parts(r);
        -sech * t / (1.0 + t).powf(1.5)
    }

    fn exponent(r: f64, delta: f64, alpha: C64) -> C64 {
        -0.5 * C64::from_polar(r.tanh(), -delta) * alpha * alpha
    }

    /// `⟨ξ|α⟩ = e^{−|α|²/2} √sech r · exp(−½ e^{−iδ} α² tanh r)`.
    pub fn squeezed_coherent_overlap(r: f64, delta: f64, alpha: C64) -> C64 {
        (1.0 / r.cosh()).sqrt() * (exponent(r, delta, alpha) - 0.5 * alpha.norm_sqr()).exp()
    }

    /// `⟨ξ|a†a|α⟩ = −e^{−iδ} α² tanh r · ⟨ξ|α⟩`.
    pub fn squeezed_coherent_number(r: f64, delta: f64, alpha: C64) -> C64 {
        -C64::from_polar(r.tanh(), -delta)
            * alpha
            * alpha
            * squeezed_coherent_overlap(r, delta, alpha)
    }

    /// `⟨ξ|a²|α⟩ = α² ⟨ξ|α⟩`.
    pub fn squeezed_coherent_lower2(r: f64, delta: f64, alpha: C64) -> C64 {
        alpha * alpha * squeezed_coherent_overlap(r, delta, alpha)
    }

    /// `⟨ξ|(a†)²|α⟩ = (e^{−iδ} α² tanh r − 1) e^{−iδ} tanh r · ⟨ξ|α⟩`.
    pub fn squeezed_coherent_raise2(r: f64, delta: f64, alpha: C64) -> C64 {
        let w = C64::from_polar(r.tanh(), -delta);
        (w * alpha * alpha - 1.0) * w * squeezed_coherent_overlap(r, delta, alpha)
    }

    /// Partial sum of `Σₙ (2n)!/(n!(n−1)!) (−1)ⁿ (x/2)^{2n−2}` over `n = 1..=terms`.
    pub fn cross_series_partial_sum(x: f64, terms: usize) -> f64 {
        let q = x * x;
        let mut term = -2.0; // n = 1
        let mut sum = 0.0;
        for n in 1..=terms {
            sum += term;
            let nf = n as f64;
            term *= -(2.0 * nf + 1.0) * q / (2.0 * nf);
        }
        sum
    }

    /// Limit of [`cross_series_partial_sum`] for `|x| < 1`: `−2 / (1 + x²)^{3/2}`.
    pub fn cross_series_limit(x: f64) -> f64 {
        -2.0 / (1.0 + x * x).powf(1.5)
    }
}

/// Closed forms whose interference terms keep only one mode's overlap.
///
/// These disagree with the number-basis oracle; `verify` reports the gap.
pub mod variants {
    use super::*;

    pub fn zhang_moments_without_partner_overlap(r: f64, theta: f64) -> Result<TwoModeMoments> {
        nonneg("r", r)?;
        let (s, ch2) = (r.sinh(), (2.0 * r).cosh());
        let (sin_t, cos_t) = theta.sin_cos();
        let norm2 = 1.0 / (2.0 * (1.0 + cos_t / ch2));
        if !norm2.is_finite() || norm2 <= 0.0 {
            return Err(Error::Degenerate("zhang state"));
        }
        let n = 2.0 * norm2 * s * s * (1.0 - cos_t / ch2.powf(1.5));
        let a2 = -I * norm2 * sin_t * (2.0 * r).tanh() / ch2.sqrt();
        let zero = C64::new(0.0, 0.0);
        Ok(TwoModeMoments::from_complex(n, n, [a2, a2, zero, zero]))
    }

    pub fn entangled_coherent_moments_without_partner_overlap(
        sigma: f64,
        theta: f64,
        delta1: f64,
        delta2: f64,
    ) -> Result<TwoModeMoments> {
        nonneg("sigma", sigma)?;
        let s2 = sigma * sigma;
        let (e2, e4) = ((-2.0 * s2).exp(), (-4.0 * s2).exp());
        let cos_t = theta.cos();
        let norm2 = 1.0 / (2.0 * (1.0 + cos_t * e4));
        if !norm2.is_finite() {
            return Err(Error::Degenerate("entangled coherent state"));
        }
        let n = 2.0 * s2 * norm2 * (1.0 - cos_t * e2);
        let r1 = 2.0 * s2 * norm2 * (1.0 + cos_t * e2);
        let r3 = s2 * norm2 * (1.0 - cos_t * e4);
        let values = [
            C64::from_polar(r1, 2.0 * delta1),
            C64::from_polar(r1, 2.0 * delta2),
            C64::from_polar(r3, delta2 - delta1),
            C64::from_polar(s2, delta1 + delta2),
        ];
        Ok(TwoModeMoments::from_complex(n, n, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn squeezed_depth_keeps_precision() {
        let p = FamilyParams::SqueezedVacuum {
            r: 10.0,
            delta: 0.0,
        };
        assert_eq!(p.depth().unwrap(), 0.5 * (1.0 - (-20f64).exp()));
        let q = FamilyParams::SqueezedVacuum { r: 0.3, delta: 1.0 };
        assert!((q.depth().unwrap() - q.moments().unwrap().depth()).abs() < 1e-15);
        let big = FamilyParams::VacuumSqueezed {
            r: 20.0,
            eta: re(-1.0),
        };
        assert!(matches!(big.depth(), Err(Error::Cancellation { .. })));
        let ok = FamilyParams::VacuumSqueezed {
            r: 5.0,
            eta: re(-1.0),
        };
        assert!(ok.depth().is_ok());
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(0.3 - 4.0 * PI) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn coherent_pair_reported_maxima() {
        let m = coherent_superposition_moments(re(0.8), re(-0.8), re(1.0)).unwrap();
        assert!((m.depth() - 0.278).abs() < 0.005);
        assert!((m.n - 0.36).abs() < 0.005);
        let m = coherent_superposition_moments(re(0.0), re(1.61), re(1.0)).unwrap();
        assert!((m.depth() - 0.278).abs() < 0.005);
        assert!((m.n - 1.0).abs() < 0.05);
    }

    #[test]
    fn coherent_pair_of_identical_states() {
        let a = C64::new(0.7, -0.2);
        let m = coherent_superposition_moments(a, a, re(1.0)).unwrap();
        assert!((m.n - a.norm_sqr()).abs() < 1e-12);
        assert!((m.amp - a.norm_sqr()).abs() < 1e-12);
        assert!(m.depth().abs() < 1e-12);
        assert_eq!(
            coherent_superposition_moments(a, a, re(-1.0)),
            Err(Error::Degenerate("coherent pair"))
        );
    }

    #[test]
    fn squeezed_vacuum_values() {
        let m = squeezed_vacuum_moments(0.0, 1.0).unwrap();
        assert_eq!((m.n, m.amp), (0.0, 0.0));
        let m = squeezed_vacuum_moments(1.0, 0.0).unwrap();
        assert!((m.n - 1.381098).abs() < 1e-6);
        assert!((m.amp - 1.813430).abs() < 1e-6);
        assert!((m.depth() - 0.432332).abs() < 1e-6);
        assert!((m.phase - PI).abs() < 1e-15);
        let m = squeezed_vacuum_moments(5.0, 0.0).unwrap();
        assert!(m.depth() > 0.49 && m.depth() < 0.5);
        assert!(squeezed_vacuum_moments(-0.1, 0.0).is_err());
    }

    #[test]
    fn single_term_reductions() {
        for r in [0.0, 0.4, 1.3] {
            let sq = squeezed_vacuum_moments(r, 0.0).unwrap();
            let pair = superposed_squeezed_moments(r, re(0.0)).unwrap();
            assert!((pair.n - sq.n).abs() < 1e-12 && (pair.a2() - sq.a2()).norm() < 1e-12);
            let cs = coherent_plus_squeezed_moments(r, 0.0, C64::new(0.3, 0.1), re(0.0)).unwrap();
            assert!((cs.n - sq.n).abs() < 1e-12 && (cs.a2() - sq.a2()).norm() < 1e-12);
            let vs = vacuum_plus_squeezed_moments(r, re(0.0)).unwrap();
            assert!((vs.n - sq.n).abs() < 1e-12 && (vs.a2() - sq.a2()).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetric_squeezed_pair_has_no_pair_coherence() {
        // |r⟩ + |−r⟩ is even under r → −r, so ⟨a²⟩ vanishes and R − n = −n ≤ 0.
        for r in [0.2, 1.0, 3.0] {
            let m = superposed_squeezed_moments(r, re(1.0)).unwrap();
            assert!(m.amp < 1e-12);
            assert!(m.depth() <= 0.0);
        }
    }

    #[test]
    fn coherent_squeezed_at_r0_is_a_coherent_pair() {
        let (alpha, eta) = (C64::new(0.6, 0.2), C64::new(0.9, -0.4));
        let a = coherent_plus_squeezed_moments(0.0, 0.3, alpha, eta).unwrap();
        let b = coherent_superposition_moments(re(0.0), alpha, eta).unwrap();
        assert!((a.n - b.n).abs() < 1e-13);
        assert!((a.a2() - b.a2()).norm() < 1e-13);
    }

    #[test]
    fn coherent_squeezed_sign_pattern() {
        let depth = |r: f64| {
            coherent_plus_squeezed_moments(r, 0.0, re(0.6), re(1.0))
                .unwrap()
                .depth()
        };
        assert!(depth(0.1) > 0.0);
        assert!(depth(0.4) < 0.0);
        assert!(depth(1.0) > 0.0);
    }

    #[test]
    fn vacuum_squeezed_matches_general_form_and_limit() {
        for r in [0.3, 1.0, 2.2] {
            for eta in [1.0, -1.0, -0.5] {
                let a = vacuum_plus_squeezed_moments(r, re(eta)).unwrap();
                let b = coherent_plus_squeezed_moments(r, 0.0, re(0.0), re(eta)).unwrap();
                assert!((a.n - b.n).abs() < 1e-12 * (1.0 + a.n));
                assert!((a.a2() - b.a2()).norm() < 1e-12 * (1.0 + a.amp));
            }
            for eta_abs in [0.5, 1.0, 2.0] {
                let generic = vacuum_plus_squeezed_moments(r, re(-eta_abs)).unwrap();
                let compact = vacuum_squeezed_depth_negative_eta(r, eta_abs);
                assert!((generic.depth() - compact).abs() < 1e-12);
            }
        }
        let two = vacuum_plus_squeezed_moments(0.0, re(-1.0)).unwrap();
        assert_eq!((two.n, two.amp), (2.0, 0.0));
        assert_eq!(two.depth(), -2.0);
        let near = vacuum_plus_squeezed_moments(1e-5, re(-1.0)).unwrap();
        assert!((near.n - 2.0).abs() < 1e-6 && near.amp < 1e-4);
        assert_eq!(vacuum_squeezed_depth_negative_eta(0.0, 1.0), -2.0);
    }

    #[test]
    fn barnett_radmore_values() {
        let m = barnett_radmore_moments(0.0, 0.2).unwrap();
        assert_eq!(m.n1 + m.n2 + m.amp.iter().sum::<f64>(), 0.0);
        let m = barnett_radmore_moments(1.0, 0.4).unwrap();
        assert!((m.amp[3] - 1.813430).abs() < 1e-6);
        assert!((m.phase[3] - wrap_angle(0.4 + PI)).abs() < 1e-14);
        assert_eq!(&m.amp[..3], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn zhang_special_angles() {
        let m = zhang_moments(0.3, PI).unwrap();
        assert!(m.amp[0] < 1e-14 && m.amp[1] < 1e-14);
        assert!(m.depth() < 0.0);
        let m = zhang_moments(0.3, PI / 2.0).unwrap();
        assert!((m.phase[0] + PI / 2.0).abs() < 1e-14);
        assert_eq!(m.amp[2], 0.0);
        assert_eq!(m.amp[3], 0.0);
        assert_eq!(
            zhang_moments(0.0, PI),
            Err(Error::Degenerate("zhang state"))
        );
    }

    #[test]
    fn zhang_asymptotics() {
        let (cn, crn) = zhang_small_r_asymptotics(PI / 2.0).unwrap();
        assert!((cn - 1.0).abs() < 1e-15 && (crn - 1.0).abs() < 1e-15);
        assert_eq!(zhang_small_r_asymptotics(0.0).unwrap(), (0.0, 0.0));
        assert!(zhang_small_r_asymptotics(PI).is_err());

        let theta = 0.99 * PI;
        let (cn, crn) = zhang_small_r_asymptotics(theta).unwrap();
        let r = 1e-4;
        let m = zhang_moments(r, theta).unwrap();
        assert!(((m.n1 - cn * r * r) / m.n1).abs() < 0.01);
        assert!(((m.depth() - crn * r) / m.depth()).abs() < 0.01);
    }

    #[test]
    fn entangled_coherent_values() {
        let m = entangled_coherent_moments(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(m, TwoModeMoments::default());
        let m = entangled_coherent_moments(0.7, 0.0, 0.0, 0.0).unwrap();
        assert!((m.amp[3] - 0.49).abs() < 1e-15);
        // θ = 0: R₁ = R₂ = R₄ = σ², n₁ = R₃ = σ² tanh(2σ²)
        assert!((m.amp[0] - 0.49).abs() < 1e-15);
        assert!((m.n1 - 0.49 * 0.98f64.tanh()).abs() < 1e-15);
        assert!((m.amp[2] - m.n1).abs() < 1e-15);
        let m = entangled_coherent_moments(0.5, 0.0, 0.3, -0.4).unwrap();
        assert!((m.phase[0] - 0.6).abs() < 1e-14);
        assert!((m.phase[1] + 0.8).abs() < 1e-14);
        assert!((m.phase[2] + 0.7).abs() < 1e-14);
        assert!((m.phase[3] + 0.1).abs() < 1e-14);
        assert!(entangled_coherent_moments(0.0, PI, 0.0, 0.0).is_err());
    }

    #[test]
    fn f_sigma_values() {
        assert_eq!(f_sigma(0.0), 0.0);
        assert!((f_sigma(0.7) - 0.2217).abs() < 1e-4);
        let (best, arg) = (0..=3000)
            .map(|k| k as f64 * 1e-3)
            .map(|s| (f_sigma(s), s))
            .fold((f64::MIN, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
        assert!((arg - 0.7f64).abs() < 0.05, "argmax {arg}");
        assert!((best - 0.22).abs() < 0.01);
    }

    #[test]
    fn cross_series_converges() {
        for r in [0.25f64, 0.5, 1.0] {
            let x = r.tanh();
            let s = elements::cross_series_partial_sum(x, 400);
            assert!((s - elements::cross_series_limit(x)).abs() < 1e-10);
        }
        assert_eq!(elements::cross_series_partial_sum(0.0, 10), -2.0);
    }

    #[test]
    fn family_kind_roundtrip() {
        for k in FamilyKind::ALL {
            assert_eq!(k.name().parse::<FamilyKind>().unwrap(), k);
            let params = k.build(&k.default_values()).unwrap();
            assert_eq!(params.kind(), k);
        }
        assert!("bogus".parse::<FamilyKind>().is_err());
        assert!(FamilyKind::ZhangReal.build(&[0.1]).is_err());
        assert!(FamilyKind::is_angular("delta2") && FamilyKind::is_angular("eta_phase"));
        assert!(!FamilyKind::is_angular("eta"));
    }
}
