//! Closed forms against the number-basis oracle.
//!
//! Each family is rebuilt as an explicit truncated state, its moments are
//! summed directly, and the deviation from the analytic expressions is
//! reported. Cutoffs grow automatically until the tail mass is negligible.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{rho_min_ecs_aligned, rho_min_two_mode_numeric, ModeGeometry};
use crate::error::{Error, Result};
use crate::families::{
    elements, entangled_coherent_moments, variants, zhang_moments, FamilyKind, FamilyParams,
};
use crate::fock::{
    self, coherent_cutoff, coherent_vector, matrix_element, squeezed_cutoff,
    squeezed_vacuum_vector, superpose, superpose_two_mode, two_mode_squeezed_cutoff,
    two_mode_squeezed_vector, FockVector, Ladder, OracleMoments, TwoModeFockVector, AUTO_TAIL,
};

/// Floor of the per-draw tolerance; the other term is ten times the tail mass.
pub const MOMENT_TOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-10;
/// Draws whose unnormalized superposition has squared norm below this are redrawn.
pub const MIN_RAW_NORM: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub families: Vec<FamilyKind>,
    pub draws: usize,
    pub seed: u64,
    /// Lower bounds for the automatic cutoffs.
    pub cutoff_one: usize,
    pub cutoff_two: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            families: FamilyKind::ALL.to_vec(),
            draws: 100,
            seed: 7,
            cutoff_one: fock::DEFAULT_CUTOFF_ONE,
            cutoff_two: fock::DEFAULT_CUTOFF_TWO,
        }
    }
}

/// An oracle evaluation: the moments and the tail mass of the state they came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    pub moments: OracleMoments,
    pub tail: f64,
    /// `‖Σ cᵢ|ψᵢ⟩‖²` before normalization, with the first coefficient 1.
    pub raw_norm: f64,
}

fn raw_norm_one(terms: &[(C64, &FockVector)]) -> Result<f64> {
    let mut total = 0.0;
    for (ci, u) in terms {
        for (cj, v) in terms {
            total += (ci.conj() * cj * fock::inner(u, v)?).re;
        }
    }
    Ok(total)
}

fn raw_norm_two(terms: &[(C64, &TwoModeFockVector)]) -> f64 {
    let mut total = 0.0;
    for (ci, u) in terms {
        for (cj, v) in terms {
            let ov: C64 = u
                .amps()
                .iter()
                .zip(v.amps())
                .map(|(x, y)| x.conj() * y)
                .sum();
            total += (ci.conj() * cj * ov).re;
        }
    }
    total
}

fn one(terms: &[(C64, &FockVector)]) -> Result<OracleResult> {
    let raw_norm = raw_norm_one(terms)?;
    let v = superpose(terms)?;
    Ok(OracleResult {
        moments: fock::one_mode_moments(&v),
        tail: v.tail_mass(),
        raw_norm,
    })
}

fn two(terms: &[(C64, &TwoModeFockVector)]) -> Result<OracleResult> {
    let raw_norm = raw_norm_two(terms);
    let v = superpose_two_mode(terms)?;
    Ok(OracleResult {
        moments: fock::two_mode_moments(&v),
        tail: v.tail_mass(),
        raw_norm,
    })
}

/// Builds the family member in the number basis and sums its moments.
pub fn oracle_moments(p: &FamilyParams, min_one: usize, min_two: usize) -> Result<OracleResult> {
    let unit = C64::new(1.0, 0.0);
    match *p {
        FamilyParams::CoherentPair { alpha, beta, eta } => {
            let cut = coherent_cutoff(alpha, min_one, AUTO_TAIL)?
                .max(coherent_cutoff(beta, min_one, AUTO_TAIL)?);
            let (a, b) = (coherent_vector(alpha, cut)?, coherent_vector(beta, cut)?);
            one(&[(unit, &a), (eta, &b)])
        }
        FamilyParams::SqueezedVacuum { r, delta } => {
            let cut = squeezed_cutoff(r, min_one, AUTO_TAIL)?;
            let v = squeezed_vacuum_vector(r, delta, cut)?;
            one(&[(unit, &v)])
        }
        FamilyParams::SqueezedPair { r, eta } => {
            let cut = squeezed_cutoff(r, min_one, AUTO_TAIL)?;
            let (a, b) = (
                squeezed_vacuum_vector(r, 0.0, cut)?,
                squeezed_vacuum_vector(-r, 0.0, cut)?,
            );
            one(&[(unit, &a), (eta, &b)])
        }
        FamilyParams::CoherentSqueezed {
            r,
            delta,
            alpha,
            eta,
        } => {
            let cut = squeezed_cutoff(r, min_one, AUTO_TAIL)?
                .max(coherent_cutoff(alpha, min_one, AUTO_TAIL)?);
            let (a, b) = (
                squeezed_vacuum_vector(r, delta, cut)?,
                coherent_vector(alpha, cut)?,
            );
            one(&[(unit, &a), (eta, &b)])
        }
        FamilyParams::VacuumSqueezed { r, eta } => {
            let cut = squeezed_cutoff(r, min_one, AUTO_TAIL)?;
            let (a, b) = (
                squeezed_vacuum_vector(r, 0.0, cut)?,
                FockVector::vacuum(cut)?,
            );
            one(&[(unit, &a), (eta, &b)])
        }
        FamilyParams::BarnettRadmore { r, delta } => {
            let cut = two_mode_squeezed_cutoff(r, min_two, AUTO_TAIL)?;
            let v = two_mode_squeezed_vector(r, delta, cut)?;
            two(&[(unit, &v)])
        }
        FamilyParams::ZhangReal { r, theta } => {
            let cut = squeezed_cutoff(r, min_two, AUTO_TAIL)?;
            let (m, p) = (
                squeezed_vacuum_vector(-r, 0.0, cut)?,
                squeezed_vacuum_vector(r, 0.0, cut)?,
            );
            let (mm, pp) = (
                TwoModeFockVector::product(&m, &m),
                TwoModeFockVector::product(&p, &p),
            );
            two(&[(unit, &mm), (C64::from_polar(1.0, theta), &pp)])
        }
        FamilyParams::EntangledCoherent {
            sigma,
            theta,
            delta1,
            delta2,
        } => {
            let (alpha, beta) = (
                C64::from_polar(sigma, delta1),
                C64::from_polar(sigma, delta2),
            );
            let cut = coherent_cutoff(alpha, min_two, AUTO_TAIL)?;
            let plus = TwoModeFockVector::product(
                &coherent_vector(alpha, cut)?,
                &coherent_vector(beta, cut)?,
            );
            let minus = TwoModeFockVector::product(
                &coherent_vector(-alpha, cut)?,
                &coherent_vector(-beta, cut)?,
            );
            two(&[(unit, &plus), (C64::from_polar(1.0, theta), &minus)])
        }
    }
}

fn polar<R: Rng>(rng: &mut R, max_abs: f64) -> C64 {
    C64::from_polar(rng.gen_range(0.0..max_abs), rng.gen_range(-PI..PI))
}

/// A random family member inside the range where the oracle stays cheap.
pub fn draw<R: Rng>(kind: FamilyKind, rng: &mut R) -> FamilyParams {
    let angle = |rng: &mut R| rng.gen_range(-PI..PI);
    match kind {
        FamilyKind::CoherentPair => FamilyParams::CoherentPair {
            alpha: polar(rng, 2.5),
            beta: polar(rng, 2.5),
            eta: polar(rng, 3.0),
        },
        FamilyKind::SqueezedVacuum => FamilyParams::SqueezedVacuum {
            r: rng.gen_range(0.0..2.5),
            delta: angle(rng),
        },
        FamilyKind::SqueezedPair => FamilyParams::SqueezedPair {
            r: rng.gen_range(0.0..2.0),
            eta: polar(rng, 3.0),
        },
        FamilyKind::CoherentSqueezed => FamilyParams::CoherentSqueezed {
            r: rng.gen_range(0.0..2.0),
            delta: angle(rng),
            alpha: polar(rng, 2.5),
            eta: polar(rng, 3.0),
        },
        FamilyKind::VacuumSqueezed => FamilyParams::VacuumSqueezed {
            r: rng.gen_range(0.0..2.0),
            eta: polar(rng, 3.0),
        },
        FamilyKind::BarnettRadmore => FamilyParams::BarnettRadmore {
            r: rng.gen_range(0.0..1.5),
            delta: angle(rng),
        },
        FamilyKind::ZhangReal => FamilyParams::ZhangReal {
            r: rng.gen_range(0.0..1.0),
            theta: angle(rng),
        },
        FamilyKind::EntangledCoherent => FamilyParams::EntangledCoherent {
            sigma: rng.gen_range(0.0..2.0),
            theta: angle(rng),
            delta1: angle(rng),
            delta2: angle(rng),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub family: FamilyKind,
    pub draws: usize,
    pub max_deviation: f64,
    pub worst_params: Option<FamilyParams>,
    /// Largest tail mass over the draws.
    pub tail_mass: f64,
    /// `max(1e−8, 10 × tail_mass)`.
    pub tolerance: f64,
    pub pass: bool,
}

struct DrawOutcome {
    params: FamilyParams,
    deviation: f64,
    tail: f64,
}

fn check_draw(kind: FamilyKind, cfg: &VerifyConfig, index: usize) -> Result<DrawOutcome> {
    let family_index = FamilyKind::ALL.iter().position(|k| *k == kind).unwrap_or(0) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream((family_index << 32) | index as u64);
    for _ in 0..1000 {
        let params = draw(kind, &mut rng);
        let oracle = oracle_moments(&params, cfg.cutoff_one, cfg.cutoff_two)?;
        if oracle.raw_norm < MIN_RAW_NORM {
            continue;
        }
        let closed = params.moments()?.to_oracle();
        let deviation = closed.max_deviation(&oracle.moments);
        return Ok(DrawOutcome {
            params,
            deviation,
            tail: oracle.tail,
        });
    }
    Err(Error::Domain(format!(
        "no well-normalized {kind} draw in 1000 tries"
    )))
}

pub fn verify_family(kind: FamilyKind, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let outcomes: Vec<DrawOutcome> = (0..cfg.draws)
        .into_par_iter()
        .map(|i| check_draw(kind, cfg, i))
        .collect::<Result<_>>()?;
    let tail_mass = outcomes.iter().map(|o| o.tail).fold(0.0, f64::max);
    let pass = outcomes
        .iter()
        .all(|o| o.deviation <= MOMENT_TOL.max(10.0 * o.tail));
    let worst = outcomes
        .iter()
        .max_by(|a, b| a.deviation.total_cmp(&b.deviation));
    Ok(VerifyReport {
        family: kind,
        draws: cfg.draws,
        max_deviation: worst.map_or(0.0, |o| o.deviation),
        worst_params: worst.map(|o| o.params),
        tail_mass,
        tolerance: MOMENT_TOL.max(10.0 * tail_mass),
        pass,
    })
}

/// One matrix element, analytic against the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub r: f64,
    pub closed: C64,
    pub oracle: C64,
    pub deviation: f64,
    pub pass: bool,
}

/// The `⟨−r|a²|r⟩` denominator: `(1 + tanh²r)^{3/2}` against `(1 + tanh r)^{3/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adjudication {
    pub r: f64,
    pub oracle: f64,
    pub tanh_squared_form: f64,
    pub linear_tanh_form: f64,
    pub deviation_tanh_squared: f64,
    pub deviation_linear_tanh: f64,
    /// The squared form matches to 1e−10 and the linear one misses by more than 1e−3.
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesCheck {
    pub r: f64,
    pub terms: usize,
    pub partial_sum: f64,
    pub limit: f64,
    pub deviation: f64,
    pub pass: bool,
}

/// A closed form found to disagree with the oracle; informational only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub label: String,
    pub at: String,
    pub printed: f64,
    pub oracle: f64,
    pub deviation: f64,
}

pub const IDENTITY_RADII: [f64; 3] = [0.5, 1.0, 2.0];
pub const SERIES_RADII: [f64; 3] = [0.25, 0.5, 1.0];
/// Displacement and squeeze phase used for the squeezed–coherent elements.
pub const PROBE_ALPHA: C64 = C64 { re: 0.7, im: 0.3 };
pub const PROBE_DELTA: f64 = 0.4;

fn identity(name: &str, r: f64, closed: C64, oracle: C64) -> IdentityCheck {
    let deviation = (closed - oracle).norm();
    IdentityCheck {
        name: name.into(),
        r,
        closed,
        oracle,
        deviation,
        pass: deviation <= IDENTITY_TOL,
    }
}

pub fn check_identities(min_cutoff: usize) -> Result<(Vec<IdentityCheck>, Vec<Adjudication>)> {
    let mut checks = Vec::new();
    let mut verdicts = Vec::new();
    for r in IDENTITY_RADII {
        let cut = squeezed_cutoff(r, min_cutoff, AUTO_TAIL)?.max(coherent_cutoff(
            PROBE_ALPHA,
            min_cutoff,
            AUTO_TAIL,
        )?);
        let plus = squeezed_vacuum_vector(r, 0.0, cut)?;
        let minus = squeezed_vacuum_vector(-r, 0.0, cut)?;
        let xi = squeezed_vacuum_vector(r, PROBE_DELTA, cut)?;
        let coh = coherent_vector(PROBE_ALPHA, cut)?;
        let re = |x: f64| C64::new(x, 0.0);
        let (a, d) = (PROBE_ALPHA, PROBE_DELTA);

        checks.push(identity(
            "overlap of opposite squeezing",
            r,
            re(elements::squeezed_overlap_opposite(r)),
            matrix_element(&minus, Ladder::Identity, &plus)?,
        ));
        checks.push(identity(
            "number element between opposite squeezing",
            r,
            re(elements::squeezed_cross_number(r)),
            matrix_element(&minus, Ladder::Number, &plus)?,
        ));
        checks.push(identity(
            "squeezed-coherent overlap",
            r,
            elements::squeezed_coherent_overlap(r, d, a),
            matrix_element(&xi, Ladder::Identity, &coh)?,
        ));
        checks.push(identity(
            "squeezed-coherent number element",
            r,
            elements::squeezed_coherent_number(r, d, a),
            matrix_element(&xi, Ladder::Number, &coh)?,
        ));
        checks.push(identity(
            "squeezed-coherent raising-squared element",
            r,
            elements::squeezed_coherent_raise2(r, d, a),
            matrix_element(&xi, Ladder::Raise2, &coh)?,
        ));
        checks.push(identity(
            "squeezed-coherent lowering-squared element",
            r,
            elements::squeezed_coherent_lower2(r, d, a),
            matrix_element(&xi, Ladder::Lower2, &coh)?,
        ));

        let oracle = matrix_element(&minus, Ladder::Lower2, &plus)?;
        let squared = elements::squeezed_cross_lower2(r);
        let linear = elements::squeezed_cross_lower2_linear_tanh(r);
        let dev_sq = (oracle - squared).norm();
        let dev_lin = (oracle - linear).norm();
        checks.push(identity(
            "lowering-squared element between opposite squeezing",
            r,
            re(squared),
            oracle,
        ));
        verdicts.push(Adjudication {
            r,
            oracle: oracle.re,
            tanh_squared_form: squared,
            linear_tanh_form: linear,
            deviation_tanh_squared: dev_sq,
            deviation_linear_tanh: dev_lin,
            pass: dev_sq <= IDENTITY_TOL && dev_lin > 1e-3,
        });
    }
    Ok((checks, verdicts))
}

pub fn check_series(terms: usize) -> Vec<SeriesCheck> {
    SERIES_RADII
        .iter()
        .map(|&r| {
            let x = r.tanh();
            let partial_sum = elements::cross_series_partial_sum(x, terms);
            let limit = elements::cross_series_limit(x);
            let deviation = (partial_sum - limit).abs();
            SeriesCheck {
                r,
                terms,
                partial_sum,
                limit,
                deviation,
                pass: deviation <= IDENTITY_TOL,
            }
        })
        .collect()
}

/// Where the partner-overlap-free forms and the aligned ECS density differ from the oracle.
pub fn discrepancies(min_cutoff_two: usize) -> Result<Vec<Discrepancy>> {
    let mut out = Vec::new();
    let mut push = |label: &str, at: String, printed: f64, oracle: f64| {
        out.push(Discrepancy {
            label: label.into(),
            at,
            printed,
            oracle,
            deviation: (printed - oracle).abs(),
        });
    };

    for (r, theta) in [(0.5, PI / 2.0), (0.0065, 0.99 * PI)] {
        let p = FamilyParams::ZhangReal { r, theta };
        let oracle = oracle_moments(&p, min_cutoff_two, min_cutoff_two)?.moments;
        let printed = variants::zhang_moments_without_partner_overlap(r, theta)?;
        let at = format!("r={r}, theta={theta:.6}");
        push(
            "zhang n1, one overlap factor",
            at.clone(),
            printed.n1,
            oracle.n_a,
        );
        push(
            "zhang R1, one overlap factor",
            at,
            printed.amp[0],
            oracle.a2.norm(),
        );
    }

    let (sigma, theta) = (0.7, 0.0);
    let p = FamilyParams::EntangledCoherent {
        sigma,
        theta,
        delta1: 0.0,
        delta2: 0.0,
    };
    let oracle = oracle_moments(&p, min_cutoff_two, min_cutoff_two)?.moments;
    let printed =
        variants::entangled_coherent_moments_without_partner_overlap(sigma, theta, 0.0, 0.0)?;
    let at = format!("sigma={sigma}, theta={theta}");
    push(
        "ecs n1, one overlap factor",
        at.clone(),
        printed.n1,
        oracle.n_a,
    );
    push(
        "ecs R1, one overlap factor",
        at.clone(),
        printed.amp[0],
        oracle.a2.norm(),
    );
    push(
        "ecs R3, one overlap factor",
        at.clone(),
        printed.amp[2],
        oracle.adag_b.norm(),
    );

    // aligned, equal frequencies: the density depends on a single phase
    let m = entangled_coherent_moments(sigma, theta, 0.0, 0.0)?;
    let g = ModeGeometry::aligned(1.0, 1.0)?;
    let (_, rho) = rho_min_two_mode_numeric(&m, &g, 2.0 * PI, 64)?;
    push(
        "ecs aligned minimum, -4 f(sigma)",
        at,
        rho_min_ecs_aligned(sigma, 1.0),
        rho,
    );

    let (r, theta) = (0.5, PI / 2.0);
    let exact = zhang_moments(r, theta)?;
    let printed = variants::zhang_moments_without_partner_overlap(r, theta)?;
    push(
        "zhang R1 - n1, one overlap factor",
        format!("r={r}, theta={theta:.6}"),
        printed.depth(),
        exact.depth(),
    );
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub config: VerifyConfig,
    pub families: Vec<VerifyReport>,
    pub identities: Vec<IdentityCheck>,
    pub adjudication: Vec<Adjudication>,
    pub series: Vec<SeriesCheck>,
    pub discrepancies: Vec<Discrepancy>,
    pub pass: bool,
}

pub const SERIES_TERMS: usize = 400;

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifySummary> {
    let families = cfg
        .families
        .iter()
        .map(|k| verify_family(*k, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (identities, adjudication) = check_identities(cfg.cutoff_one)?;
    let series = check_series(SERIES_TERMS);
    let discrepancies = discrepancies(cfg.cutoff_two)?;
    let pass = families.iter().all(|r| r.pass)
        && identities.iter().all(|c| c.pass)
        && adjudication.iter().all(|a| a.pass)
        && series.iter().all(|s| s.pass);
    Ok(VerifySummary {
        config: cfg.clone(),
        families,
        identities,
        adjudication,
        series,
        discrepancies,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_draws_pass_trivially() {
        let cfg = VerifyConfig {
            draws: 0,
            ..Default::default()
        };
        let r = verify_family(FamilyKind::ZhangReal, &cfg).unwrap();
        assert!(r.pass && r.worst_params.is_none() && r.max_deviation == 0.0);
    }

    #[test]
    fn identities_hold() {
        let (checks, verdicts) = check_identities(64).unwrap();
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
        for v in &verdicts {
            assert!(v.pass, "{v:?}");
        }
        assert!(check_series(SERIES_TERMS).iter().all(|s| s.pass));
    }

    #[test]
    fn few_draws_each_family() {
        let cfg = VerifyConfig {
            draws: 5,
            ..Default::default()
        };
        for k in FamilyKind::ALL {
            let r = verify_family(k, &cfg).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }
}
