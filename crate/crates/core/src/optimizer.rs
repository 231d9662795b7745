//! Multi-start projected gradient ascent of `F = R − n` over a family's parameters.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{wrap_angle, FamilyKind, FamilyParams, Moments};

/// One free coordinate of a search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dim {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Periodic with period 2π.
    pub angular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub family: FamilyKind,
    pub dims: Vec<Dim>,
    /// Values for every family parameter; free coordinates overwrite theirs.
    pub base: Vec<f64>,
    #[serde(skip)]
    slots: Vec<usize>,
}

impl SearchSpace {
    pub fn new(family: FamilyKind, dims: Vec<Dim>, base: Vec<f64>) -> Result<Self> {
        if base.len() != family.param_names().len() {
            return Err(Error::Domain(format!(
                "{family} has {} parameters, base has {}",
                family.param_names().len(),
                base.len()
            )));
        }
        let mut slots = Vec::with_capacity(dims.len());
        for d in &dims {
            let slot = family
                .param_index(&d.name)
                .ok_or_else(|| Error::Domain(format!("{family} has no parameter '{}'", d.name)))?;
            if slots.contains(&slot) {
                return Err(Error::Domain(format!(
                    "parameter '{}' listed twice",
                    d.name
                )));
            }
            if !d.lo.is_finite() || !d.hi.is_finite() || d.lo > d.hi {
                return Err(Error::Domain(format!("empty bounds for '{}'", d.name)));
            }
            if !d.angular && d.lo < 0.0 {
                return Err(Error::Domain(format!(
                    "magnitude '{}' bounded below by 0",
                    d.name
                )));
            }
            slots.push(slot);
        }
        Ok(SearchSpace {
            family,
            dims,
            base,
            slots,
        })
    }

    /// Magnitudes in `[0, 3]`, `|η|` in `[0, 4]`, angles on the circle. A
    /// coherent pair keeps `δ₁ = 0`, since only phase differences matter, and
    /// its free coordinates are ordered `(|α|, |β|, |η|, δ₂, δ)`.
    pub fn default_for(family: FamilyKind) -> Self {
        let order: Vec<&str> = match family {
            FamilyKind::CoherentPair => vec!["alpha", "beta", "eta", "delta2", "delta"],
            // F does not depend on the squeeze phase
            FamilyKind::SqueezedVacuum | FamilyKind::BarnettRadmore => vec!["r"],
            other => other.param_names().to_vec(),
        };
        let dims = order
            .into_iter()
            .map(|name| {
                let angular = FamilyKind::is_angular(name);
                let (lo, hi) = if angular {
                    (-PI, PI)
                } else if name == "eta" {
                    (0.0, 4.0)
                } else {
                    (0.0, 3.0)
                };
                Dim {
                    name: name.to_string(),
                    lo,
                    hi,
                    angular,
                }
            })
            .collect();
        Self::new(family, dims, family.default_values()).expect("default space is valid")
    }

    /// Removes a coordinate from the search and pins it.
    pub fn with_fixed(mut self, name: &str, value: f64) -> Result<Self> {
        let slot = self
            .family
            .param_index(name)
            .ok_or_else(|| Error::Domain(format!("{} has no parameter '{name}'", self.family)))?;
        self.base[slot] = value;
        if let Some(k) = self.dims.iter().position(|d| d.name == name) {
            self.dims.remove(k);
            self.slots.remove(k);
        }
        Ok(self)
    }

    pub fn with_bounds(mut self, name: &str, lo: f64, hi: f64) -> Result<Self> {
        let dim = self
            .dims
            .iter_mut()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::Domain(format!("'{name}' is not a free coordinate")))?;
        dim.lo = lo;
        dim.hi = hi;
        let (family, dims, base) = (self.family, self.dims, self.base);
        Self::new(family, dims, base)
    }

    pub fn dim_count(&self) -> usize {
        self.dims.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.dims.iter().map(|d| d.name.clone()).collect()
    }

    /// Full family parameter vector for free coordinates `p`.
    pub fn full_params(&self, p: &[f64]) -> Vec<f64> {
        let mut v = self.base.clone();
        for (slot, x) in self.slots.iter().zip(p) {
            v[*slot] = *x;
        }
        v
    }

    pub fn family_params(&self, p: &[f64]) -> Result<FamilyParams> {
        self.family.build(&self.full_params(p))
    }

    /// Clamps magnitudes into bounds and wraps angles onto the circle.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(&self.dims)
            .map(|(x, d)| {
                if d.angular && d.hi - d.lo >= 2.0 * PI - 1e-12 {
                    d.lo + (x - d.lo).rem_euclid(2.0 * PI)
                } else {
                    x.clamp(d.lo, d.hi)
                }
            })
            .collect()
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.dims
            .iter()
            .map(|d| {
                if d.lo == d.hi {
                    d.lo
                } else {
                    rng.gen_range(d.lo..d.hi)
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub starts: usize,
    pub seed: u64,
    /// Relative to `max(1, |p|)`.
    pub fd_step: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            starts: 64,
            seed: 0,
            fd_step: 1e-5,
            step_init: 0.1,
            armijo_c: 1e-4,
            grad_tol: 1e-7,
            max_iters: 500,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.starts >= 1
            && self.fd_step > 0.0
            && self.step_init > 0.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.grad_tol > 0.0
            && self.max_iters >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid search configuration {self:?}"
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIters,
    /// Every remaining ascent direction leaves the box.
    Pinned,
    /// The line search could not increase F.
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub params: Vec<f64>,
    #[serde(rename = "F")]
    pub f: f64,
    pub n: f64,
    #[serde(rename = "R")]
    pub amp: f64,
    pub gamma: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
}

/// `R − n` of the first mode.
pub fn objective_f(space: &SearchSpace, p: &[f64]) -> Result<f64> {
    let v = moments_at(space, p)?.depth();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("objective"))
    }
}

fn moments_at(space: &SearchSpace, p: &[f64]) -> Result<Moments> {
    space.family_params(p)?.moments()
}

fn value(space: &SearchSpace, p: &[f64]) -> f64 {
    objective_f(space, p).unwrap_or(f64::NEG_INFINITY)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub g: Vec<f64>,
    /// Some coordinate fell back to a one-sided difference after a failed evaluation.
    pub fallback: bool,
}

impl Gradient {
    pub fn norm(&self) -> f64 {
        self.g.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Central differences with per-coordinate step `h·max(1, |p|)`, one-sided at
/// box edges, and the outward components removed.
pub fn fd_gradient(space: &SearchSpace, p: &[f64], h: f64) -> Result<Gradient> {
    let f0 = value(space, p);
    let mut g = vec![0.0; p.len()];
    let mut fallback = false;
    let mut any = false;
    for (k, d) in space.dims.iter().enumerate() {
        let step = h * p[k].abs().max(1.0);
        let shifted = |dx: f64| {
            let mut q = p.to_vec();
            q[k] += dx;
            value(space, &q)
        };
        let up_ok = d.angular || p[k] + step <= d.hi;
        let down_ok = d.angular || p[k] - step >= d.lo;
        let up = if up_ok {
            shifted(step)
        } else {
            f64::NEG_INFINITY
        };
        let down = if down_ok {
            shifted(-step)
        } else {
            f64::NEG_INFINITY
        };
        let fin = |x: f64| x.is_finite();
        g[k] = if fin(up) && fin(down) {
            (up - down) / (2.0 * step)
        } else {
            if (up_ok && !fin(up)) || (down_ok && !fin(down)) {
                fallback = true;
            }
            if fin(up) && fin(f0) {
                (up - f0) / step
            } else if fin(down) && fin(f0) {
                (f0 - down) / step
            } else {
                fallback = true;
                continue;
            }
        };
        any = true;
        // within one difference step of a wall counts as on it
        if !d.angular
            && ((p[k] - step <= d.lo && g[k] < 0.0) || (p[k] + step >= d.hi && g[k] > 0.0))
        {
            g[k] = 0.0;
        }
    }
    if !any && !p.is_empty() {
        return Err(Error::ObjectiveFailure);
    }
    Ok(Gradient { g, fallback })
}

fn distance(space: &SearchSpace, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(&space.dims)
        .map(|((x, y), d)| {
            let dx = if d.angular { wrap_angle(x - y) } else { x - y };
            dx * dx
        })
        .sum::<f64>()
        .sqrt()
}

pub fn ascend(space: &SearchSpace, start: &[f64], cfg: &SearchConfig) -> Result<Extremum> {
    ascend_traced(space, start, cfg).map(|(e, _)| e)
}

/// Like [`ascend`], also returning every accepted F value in order.
pub fn ascend_traced(
    space: &SearchSpace,
    start: &[f64],
    cfg: &SearchConfig,
) -> Result<(Extremum, Vec<f64>)> {
    cfg.validate()?;
    if start.len() != space.dim_count() {
        return Err(Error::Domain(format!(
            "start has {} coordinates, space has {}",
            start.len(),
            space.dim_count()
        )));
    }
    let mut p = space.project(start);
    let mut f = value(space, &p);
    if !f.is_finite() {
        return Err(Error::ObjectiveFailure);
    }
    let mut trace = vec![f];
    let mut grad = fd_gradient(space, &p, cfg.fd_step)?;
    let mut alpha = cfg.step_init;
    let mut iterations = 0;
    let mut termination = Termination::MaxIters;

    while iterations < cfg.max_iters {
        if grad.norm() <= cfg.grad_tol {
            termination = Termination::Converged;
            break;
        }
        iterations += 1;
        // no single step moves further than one unit
        let mut trial = alpha.min(1.0 / grad.norm());
        let accepted = loop {
            let q: Vec<f64> = space.project(
                &p.iter()
                    .zip(&grad.g)
                    .map(|(x, g)| x + trial * g)
                    .collect::<Vec<_>>(),
            );
            let moved: f64 = q
                .iter()
                .zip(&p)
                .zip(&grad.g)
                .zip(&space.dims)
                .map(|(((a, b), g), d)| {
                    let dx = if d.angular { wrap_angle(a - b) } else { a - b };
                    g * dx
                })
                .sum();
            // a long step can wrap an angle past the circle; treat it as a failed trial
            if moved > 0.0 {
                let fq = value(space, &q);
                if fq.is_finite() && fq >= f + cfg.armijo_c * moved {
                    break Some((q, fq));
                }
            }
            trial *= 0.5;
            if trial < 1e-14 {
                break None;
            }
        };
        let Some((q, fq)) = accepted else {
            termination = if grad.g.iter().all(|x| *x == 0.0) {
                Termination::Pinned
            } else {
                Termination::Stalled
            };
            break;
        };
        let next = fd_gradient(space, &q, cfg.fd_step)?;
        // Barzilai–Borwein step for the next trial, kept within sane limits
        let (mut ss, mut sy) = (0.0, 0.0);
        for (k, d) in space.dims.iter().enumerate() {
            let s = if d.angular {
                wrap_angle(q[k] - p[k])
            } else {
                q[k] - p[k]
            };
            let y = next.g[k] - grad.g[k];
            ss += s * s;
            sy += s * y;
        }
        alpha = if sy < 0.0 {
            (ss / -sy).clamp(1e-6, 1e3)
        } else {
            (2.0 * trial).min(1e3)
        };
        if distance(space, &q, &p) == 0.0 {
            termination = Termination::Pinned;
            break;
        }
        p = q;
        f = fq;
        trace.push(f);
        grad = next;
    }
    if termination == Termination::MaxIters && grad.norm() <= cfg.grad_tol {
        termination = Termination::Converged;
    }

    let (n, amp, gamma) = moments_at(space, &p)?.first_mode();
    let grad_norm = grad.norm();
    Ok((
        Extremum {
            params: p,
            f,
            n,
            amp,
            gamma,
            grad_norm,
            iterations,
            converged: termination == Termination::Converged,
            termination,
        },
        trace,
    ))
}

/// Coherent-pair points with `|α| > |β|` are mapped through the relabeling
/// `(|α|, |β|, |η|, δ₂, δ) → (|β|, |α|, 1/|η|, −δ₂, −δ)`, which describes the
/// same state.
pub fn canonicalize(space: &SearchSpace, e: &Extremum) -> Vec<f64> {
    let mut p = e.params.clone();
    if space.family != FamilyKind::CoherentPair
        || space.names() != ["alpha", "beta", "eta", "delta2", "delta"]
    {
        return p;
    }
    if p[0] > p[1] && p[2] > 0.0 {
        p = vec![p[1], p[0], 1.0 / p[2], wrap_angle(-p[3]), wrap_angle(-p[4])];
    }
    p
}

// Phase-insensitive coordinates for clustering: rotate so β is real, then use
// the real and imaginary parts of α, β, η.
fn embedding(space: &SearchSpace, canonical: &[f64]) -> Vec<f64> {
    if space.family == FamilyKind::CoherentPair && canonical.len() == 5 {
        let [a, b, e, d2, d] = [
            canonical[0],
            canonical[1],
            canonical[2],
            canonical[3],
            canonical[4],
        ];
        let alpha = C64::from_polar(a, -d2);
        let eta = C64::from_polar(e, d);
        return vec![alpha.re, alpha.im, b, eta.re, eta.im];
    }
    canonical
        .iter()
        .zip(&space.dims)
        .flat_map(|(x, d)| {
            if d.angular {
                vec![x.cos(), x.sin()]
            } else {
                vec![*x]
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteredExtremum {
    #[serde(flatten)]
    pub extremum: Extremum,
    /// Starts that ended in this cluster.
    pub hits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub family: FamilyKind,
    pub names: Vec<String>,
    pub starts: usize,
    pub failed_starts: usize,
    pub extrema: Vec<ClusteredExtremum>,
}

/// Radius for merging endpoints in the clustering embedding.
pub const CLUSTER_RADIUS: f64 = 0.02;

/// Start `i` draws from stream `i` of a ChaCha generator keyed by `seed`.
pub fn start_point(space: &SearchSpace, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    space.sample(&mut rng)
}

pub fn multi_start(space: &SearchSpace, cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let outcomes: Vec<Result<Extremum>> = (0..cfg.starts)
        .into_par_iter()
        .map(|i| ascend(space, &start_point(space, cfg.seed, i), cfg))
        .collect();
    Ok(cluster(space, outcomes))
}

/// Runs ascents from given points and clusters them like [`multi_start`].
pub fn search_from(
    space: &SearchSpace,
    starts: &[Vec<f64>],
    cfg: &SearchConfig,
) -> Result<SearchReport> {
    cfg.validate()?;
    let outcomes: Vec<Result<Extremum>> =
        starts.par_iter().map(|s| ascend(space, s, cfg)).collect();
    Ok(cluster(space, outcomes))
}

fn cluster(space: &SearchSpace, outcomes: Vec<Result<Extremum>>) -> SearchReport {
    let starts = outcomes.len();
    let mut found: Vec<Extremum> = outcomes.into_iter().filter_map(|r| r.ok()).collect();
    let failed_starts = starts - found.len();
    for e in &mut found {
        e.params = canonicalize(space, e);
    }
    // stable: equal F keeps start order
    found.sort_by(|a, b| b.f.total_cmp(&a.f));

    let mut reps: Vec<(Vec<f64>, ClusteredExtremum)> = Vec::new();
    for e in found {
        let key = embedding(space, &e.params);
        let near = reps.iter_mut().find(|(k, _)| {
            k.iter()
                .zip(&key)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                < CLUSTER_RADIUS
        });
        match near {
            Some((_, c)) => c.hits += 1,
            None => reps.push((
                key,
                ClusteredExtremum {
                    extremum: e,
                    hits: 1,
                },
            )),
        }
    }
    SearchReport {
        family: space.family,
        names: space.names(),
        starts,
        failed_starts,
        extrema: reps.into_iter().map(|(_, c)| c).collect(),
    }
}
