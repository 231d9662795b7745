//! Mean normal-ordered energy density of one- and two-mode excitations.
//!
//! Quantization volume is 1, `ħ = c = 1`, so densities come out in units of
//! frequency. Traveling modes are plane waves `e^{i(k·x − ωt)}` with
//! `k = ω k̂`; standing modes are `sin(ωx)`-type waves along the x axis.

use std::cmp::Ordering;
use std::f64::consts::PI;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{f_sigma, OneModeMoments, TwoModeMoments};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveKind {
    Traveling,
    Standing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeGeometry {
    pub kind: WaveKind,
    pub omega1: f64,
    pub omega2: f64,
    /// Propagation directions; unused for standing waves.
    pub khat1: [f64; 3],
    pub khat2: [f64; 3],
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn check_omegas(omega1: f64, omega2: f64) -> Result<()> {
    if !(omega1 > 0.0 && omega2 > 0.0 && omega1.is_finite() && omega2.is_finite()) {
        return Err(Error::Domain(format!(
            "frequencies must be positive and finite, got {omega1}, {omega2}"
        )));
    }
    Ok(())
}

impl ModeGeometry {
    pub fn traveling(omega1: f64, omega2: f64, khat1: [f64; 3], khat2: [f64; 3]) -> Result<Self> {
        check_omegas(omega1, omega2)?;
        for k in [khat1, khat2] {
            if (dot(k, k).sqrt() - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "direction {k:?} is not a unit vector"
                )));
            }
        }
        Ok(ModeGeometry {
            kind: WaveKind::Traveling,
            omega1,
            omega2,
            khat1,
            khat2,
        })
    }

    /// `k̂₁ = x̂`, `k̂₂` in the xy plane with `k̂₁·k̂₂ = cos_angle`.
    pub fn traveling_at_angle(omega1: f64, omega2: f64, cos_angle: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&cos_angle) {
            return Err(Error::Domain(format!(
                "cos angle {cos_angle} outside [-1, 1]"
            )));
        }
        let sin_angle = (1.0 - cos_angle * cos_angle).max(0.0).sqrt();
        Self::traveling(omega1, omega2, [1.0, 0.0, 0.0], [cos_angle, sin_angle, 0.0])
    }

    pub fn aligned(omega1: f64, omega2: f64) -> Result<Self> {
        Self::traveling_at_angle(omega1, omega2, 1.0)
    }

    pub fn standing(omega1: f64, omega2: f64) -> Result<Self> {
        check_omegas(omega1, omega2)?;
        Ok(ModeGeometry {
            kind: WaveKind::Standing,
            omega1,
            omega2,
            khat1: [1.0, 0.0, 0.0],
            khat2: [1.0, 0.0, 0.0],
        })
    }

    pub fn cos_angle(&self) -> f64 {
        dot(self.khat1, self.khat2)
    }

    /// The point at coordinate `s` along the first mode's axis, time `t`.
    pub fn point_on_axis(&self, s: f64, t: f64) -> SpacetimePoint {
        let k = self.khat1;
        SpacetimePoint {
            x: [s * k[0], s * k[1], s * k[2]],
            t,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub x: [f64; 3],
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(x: [f64; 3], t: f64) -> Self {
        SpacetimePoint { x, t }
    }
}

/// Traveling single mode as a function of `u = 2(k·x − ωt)`.
pub fn rho_one_mode(m: &OneModeMoments, omega: f64, u: f64) -> f64 {
    m.n * omega + m.amp * omega * (u + m.phase).cos()
}

/// Standing single mode along x.
pub fn rho_one_mode_standing(m: &OneModeMoments, omega: f64, x: f64, t: f64) -> f64 {
    m.n * omega + m.amp * omega * (2.0 * omega * x).cos() * (2.0 * omega * t - m.phase).cos()
}

/// `−ω(R − n)`.
pub fn rho_min_one_mode(m: &OneModeMoments, omega: f64) -> f64 {
    -omega * m.depth()
}

pub fn rho_two_mode_traveling(m: &TwoModeMoments, g: &ModeGeometry, p: &SpacetimePoint) -> f64 {
    let (w1, w2) = (g.omega1, g.omega2);
    let phi1 = w1 * (dot(g.khat1, p.x) - p.t);
    let phi2 = w2 * (dot(g.khat2, p.x) - p.t);
    let cross = (w1 * w2).sqrt() * (1.0 + g.cos_angle());
    let (a, ph) = (m.amp, m.phase);
    m.n1 * w1
        + m.n2 * w2
        + a[0] * w1 * (2.0 * phi1 + ph[0]).cos()
        + a[1] * w2 * (2.0 * phi2 + ph[1]).cos()
        + a[2] * cross * (phi2 - phi1 + ph[2]).cos()
        + a[3] * cross * (phi1 + phi2 + ph[3]).cos()
}

/// Standing modes along x; only `p.x[0]` matters.
pub fn rho_two_mode_standing(m: &TwoModeMoments, g: &ModeGeometry, p: &SpacetimePoint) -> f64 {
    let (w1, w2) = (g.omega1, g.omega2);
    let (x, t) = (p.x[0], p.t);
    let root = (w1 * w2).sqrt();
    let (a, ph) = (m.amp, m.phase);
    let (dw, sw) = (w2 - w1, w1 + w2);
    m.n1 * w1
        + m.n2 * w2
        + a[0] * w1 * (2.0 * w1 * x).cos() * (2.0 * w1 * t - ph[0]).cos()
        + a[1] * w2 * (2.0 * w2 * x).cos() * (2.0 * w2 * t - ph[1]).cos()
        + 2.0 * a[2] * root * (dw * x).cos() * (dw * t - ph[2]).cos()
        + 2.0 * a[3] * root * (sw * x).cos() * (sw * t - ph[3]).cos()
}

pub fn rho_two_mode(m: &TwoModeMoments, g: &ModeGeometry, p: &SpacetimePoint) -> f64 {
    match g.kind {
        WaveKind::Traveling => rho_two_mode_traveling(m, g, p),
        WaveKind::Standing => rho_two_mode_standing(m, g, p),
    }
}

/// Two-mode squeezed vacuum in aligned traveling modes (`k̂₁·k̂₂ = 1`):
/// `−sinh r [2√(ω₁ω₂) cosh r − (ω₁+ω₂) sinh r]`. The phase `delta` only moves
/// the minimum in spacetime.
pub fn rho_min_br_closed(r: f64, _delta: f64, omega1: f64, omega2: f64) -> f64 {
    let (s, c) = (r.sinh(), r.cosh());
    -s * (2.0 * (omega1 * omega2).sqrt() * c - (omega1 + omega2) * s)
}

/// How much less negative the two-mode squeezed minimum is than the sum of two
/// single-mode squeezed minima: `sinh r cosh r (√ω₁ − √ω₂)²`.
pub fn br_vs_2sq_gap(r: f64, omega1: f64, omega2: f64) -> f64 {
    r.sinh() * r.cosh() * (omega1.sqrt() - omega2.sqrt()).powi(2)
}

/// `−4ω f(σ)` for near-degenerate aligned modes at `θ = 0`.
pub fn rho_min_ecs_aligned(sigma: f64, omega: f64) -> f64 {
    -4.0 * omega * f_sigma(sigma)
}

/// `n₁ω₁ + n₂ω₂`: every other term oscillates in time when the modes are
/// distinct, so this is the average over a common period.
pub fn spacetime_average(m: &TwoModeMoments, g: &ModeGeometry) -> f64 {
    m.n1 * g.omega1 + m.n2 * g.omega2
}

/// Rectangle-rule time average over `[0, period)` at fixed `x`; exact for
/// trigonometric polynomials of degree below `samples` in `2π/period`.
pub fn time_average(
    m: &TwoModeMoments,
    g: &ModeGeometry,
    x: [f64; 3],
    period: f64,
    samples: usize,
) -> f64 {
    let sum: f64 = (0..samples)
        .map(|k| {
            rho_two_mode(
                m,
                g,
                &SpacetimePoint::new(x, period * k as f64 / samples as f64),
            )
        })
        .sum();
    sum / samples as f64
}

/// A sampled density value on the `(s, t)` plane of a geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub point: SpacetimePoint,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub samples: Vec<DensitySample>,
    pub min_found: DensitySample,
}

#[derive(Clone, Copy)]
struct Sample {
    s: f64,
    t: f64,
    rho: f64,
}

// smaller rho, then smaller t, then smaller s
fn sample_order(a: &Sample, b: &Sample) -> Ordering {
    a.rho
        .total_cmp(&b.rho)
        .then(a.t.total_cmp(&b.t))
        .then(a.s.total_cmp(&b.s))
}

struct AxisDensity<'a> {
    m: &'a TwoModeMoments,
    g: &'a ModeGeometry,
}

impl AxisDensity<'_> {
    fn eval(&self, s: f64, t: f64) -> f64 {
        rho_two_mode(self.m, self.g, &self.g.point_on_axis(s, t))
    }
}

impl CostFunction for AxisDensity<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.eval(p[0], p[1]))
    }
}

fn grid_scan(m: &TwoModeMoments, g: &ModeGeometry, window: f64, grid_n: usize) -> Vec<Sample> {
    let f = AxisDensity { m, g };
    let step = window / grid_n as f64;
    let side = grid_n + 1;
    (0..side * side)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / side, idx % side);
            let (s, t) = (i as f64 * step, j as f64 * step);
            Sample {
                s,
                t,
                rho: f.eval(s, t),
            }
        })
        .collect()
}

fn refine(f: &AxisDensity<'_>, start: Sample, size: f64) -> Option<Sample> {
    let (s, t) = (start.s, start.t);
    let simplex = vec![vec![s, t], vec![s + size, t], vec![s, t + size]];
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-15).ok()?;
    let res = Executor::new(AxisDensity { m: f.m, g: f.g }, solver)
        .configure(|st| st.max_iters(2000))
        .run()
        .ok()?;
    let best = res.state().get_best_param()?;
    let (s, t) = (best[0], best[1]);
    let rho = f.eval(s, t);
    rho.is_finite().then_some(Sample { s, t, rho })
}

/// Minimizes the two-mode density over time and one coordinate along the first
/// mode's axis.
///
/// For distinct traveling directions the two phases are independent linear
/// functions of `(s, t)`, and for aligned modes no other spatial direction adds
/// anything, so this line plus time reaches every attainable phase pair. A
/// `(grid_n+1)²` scan of `[0, window]²` seeds Nelder–Mead refinements from the
/// grid's local minima; the result is never above the best sample.
pub fn rho_min_two_mode_numeric(
    m: &TwoModeMoments,
    g: &ModeGeometry,
    window: f64,
    grid_n: usize,
) -> Result<(SpacetimePoint, f64)> {
    if grid_n < 16 {
        return Err(Error::Domain(format!("grid_n must be ≥ 16, got {grid_n}")));
    }
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::Domain(format!(
            "window must be positive, got {window}"
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("two-mode moments"));
    }
    let grid = grid_scan(m, g, window, grid_n);
    let best = *grid
        .iter()
        .min_by(|a, b| sample_order(a, b))
        .expect("non-empty grid");

    let side = grid_n + 1;
    let at = |i: usize, j: usize| grid[i * side + j].rho;
    let mut seeds: Vec<Sample> = (0..side * side)
        .filter(|&idx| {
            let (i, j) = (idx / side, idx % side);
            let v = grid[idx].rho;
            let lo_i = i.saturating_sub(1);
            let lo_j = j.saturating_sub(1);
            (lo_i..=(i + 1).min(grid_n))
                .all(|a| (lo_j..=(j + 1).min(grid_n)).all(|b| at(a, b) >= v))
        })
        .map(|idx| grid[idx])
        .collect();
    seeds.sort_by(sample_order);
    seeds.truncate(12);

    let f = AxisDensity { m, g };
    let size = window / grid_n as f64;
    let refined: Vec<Option<Sample>> = seeds.par_iter().map(|s| refine(&f, *s, size)).collect();
    let winner = refined
        .into_iter()
        .flatten()
        .chain(std::iter::once(best))
        .min_by(sample_order)
        .expect("grid best is always present");
    Ok((g.point_on_axis(winner.s, winner.t), winner.rho))
}

/// Samples the density on the `(s, t)` grid and attaches the refined minimum.
pub fn density_profile(
    m: &TwoModeMoments,
    g: &ModeGeometry,
    window: f64,
    grid_n: usize,
) -> Result<DensityProfile> {
    let (point, rho) = rho_min_two_mode_numeric(m, g, window, grid_n)?;
    let mut grid = grid_scan(m, g, window, grid_n);
    grid.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.s.total_cmp(&b.s)));
    let samples = grid
        .into_iter()
        .map(|s| DensitySample {
            point: g.point_on_axis(s.s, s.t),
            rho: s.rho,
        })
        .collect();
    Ok(DensityProfile {
        samples,
        min_found: DensitySample { point, rho },
    })
}

/// A window covering at least one full period of the slowest phase.
pub fn default_window(g: &ModeGeometry) -> f64 {
    2.0 * PI / g.omega1.min(g.omega2)
}
