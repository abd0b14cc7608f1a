//! `L₁` distances to `L_p` balls and Hausdorff estimates between balls.
//!
//! # Distance to a ball
//!
//! `d₁(y, B) = min { Σ_s w_s ‖y(s) − u(s)‖ : u ∈ B }`. The ball constraint only
//! sees atom magnitudes, and for a fixed magnitude the closest `u(s)` lies on
//! the ray through `y(s)`. The problem therefore reduces to maximizing
//! `Σ w_s t_s` over magnitudes `0 ≤ t_s ≤ min(‖y(s)‖, α)` with
//! `Σ w_s t_s^p ≤ r^p`. Stationarity gives `w_s = λ p w_s t_s^{p−1}` on the
//! unclipped atoms, so the weights cancel and the optimum is the water level
//! `t_s = min(‖y(s)‖, α, c)` with one common `c`. We solve for `c` exactly by
//! sorting the magnitudes.
//!
//! # Hausdorff estimates
//!
//! The supremum of the convex function `d₁(·, B)` over a ball is attained on
//! its sphere, so all candidates are sphere points: single-atom spikes, seeded
//! random directions and their images under the rescaling map. The maximum
//! over candidates is a lower bound; upper bounds come only from the
//! analytic certificates.

use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundLedger, ProblemParams};
use crate::lp::{check_exponent, weighted_norm, BallSpec, MeasureSpace, SimpleFunction};
use crate::math::{floor, powf};
use crate::sampling::{onto_sphere, sphere_point, spikes, SamplerConfig};
use crate::witness::{rescale, truncation_defect_bound};
use crate::{Error, Result};

/// Tolerance of the certified sandwich `lower ≤ upper`.
pub const SANDWICH_TOL: f64 = 1e-9;

/// Relative slack under which a point counts as inside a ball for the
/// distance computations. Points generated on a sphere can sit an ulp
/// outside it; without the slack they would report spurious `1e-16`
/// separations.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Common clip level `c` with `Σ w min(u, c)^p = r^p`, given that `u` itself
/// is infeasible.
fn water_level(weights: &[f64], u: &[f64], p: f64, r: f64) -> f64 {
    if p.is_infinite() {
        return r;
    }
    let m = u.iter().copied().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&i, &j| u[i].total_cmp(&u[j]));
    let budget = powf(r / m, p);
    let mut below = 0.0;
    let mut tail: f64 = weights.iter().sum();
    for &i in &order {
        let level = (budget - below).max(0.0) / tail;
        let c = powf(level, 1.0 / p);
        let ui = u[i] / m;
        if c <= ui {
            return c * m;
        }
        below += weights[i] * powf(ui, p);
        tail -= weights[i];
    }
    // Unreachable for an infeasible `u` up to rounding.
    m
}

/// Clipped magnitudes of the `L₁`-nearest point of `ball` to `y`.
fn nearest_magnitudes(y: &SimpleFunction, ball: &BallSpec) -> (Vec<f64>, Vec<f64>) {
    let a = y.atom_norms();
    let mut t: Vec<f64> = match ball.cap {
        Some(cap) => a
            .iter()
            .map(|&x| {
                if x > cap * (1.0 + MEMBERSHIP_SLACK) {
                    cap
                } else {
                    x
                }
            })
            .collect(),
        None => a.clone(),
    };
    let weights = y.space().weights();
    if weighted_norm(weights, &t, ball.p) > ball.r * (1.0 + MEMBERSHIP_SLACK) {
        let c = water_level(weights, &t, ball.p, ball.r);
        for x in t.iter_mut() {
            *x = x.min(c);
        }
    }
    (a, t)
}

/// The `L₁`-nearest point of `ball` to `y` and the distance to it.
pub fn nearest_point(y: &SimpleFunction, ball: &BallSpec) -> Result<(SimpleFunction, f64)> {
    check_exponent(ball.p)?;
    let (a, t) = nearest_magnitudes(y, ball);
    let dist = distance_from_magnitudes(y.space().weights(), &a, &t);
    let point = y.map_atoms(|s, x, out| {
        if t[s] == a[s] {
            out.copy_from_slice(x);
        } else {
            let scale = t[s] / a[s];
            for (o, v) in out.iter_mut().zip(x) {
                *o = v * scale;
            }
        }
    });
    Ok((point, dist))
}

fn distance_from_magnitudes(weights: &[f64], a: &[f64], t: &[f64]) -> f64 {
    weights
        .iter()
        .zip(a.iter().zip(t))
        .map(|(w, (a, t))| w * (a - t))
        .sum()
}

/// `d₁(y, ball)`, exact up to rounding; `0` exactly when `y` is in the ball
/// up to the relative [`MEMBERSHIP_SLACK`].
pub fn dist_to_ball(y: &SimpleFunction, ball: &BallSpec) -> Result<f64> {
    check_exponent(ball.p)?;
    let (a, t) = nearest_magnitudes(y, ball);
    Ok(distance_from_magnitudes(y.space().weights(), &a, &t))
}

/// Deterministic candidate stream on the sphere of `from`: spikes first, then
/// for every sample a random sphere point and its rescaling image.
pub fn sphere_candidates<'a>(
    space: &'a Arc<MeasureSpace>,
    from: &'a BallSpec,
    to: &'a BallSpec,
    sampler: &SamplerConfig,
) -> impl Iterator<Item = SimpleFunction> + 'a {
    let mut rng = sampler.rng();
    let shaped = BallSpec {
        p: to.p,
        r: from.r,
        cap: None,
    };
    let random = (0..sampler.n_samples).flat_map(move |_| {
        let b = sphere_point(&mut rng, space, from);
        let b_to = onto_sphere(&b, &shaped);
        let image = onto_sphere(&rescale(&b_to, to.p, from.p, from.r), from);
        [b, image]
    });
    spikes(space, from).into_iter().chain(random)
}

/// Maximum of `eval` over the candidate stream and the number of candidates.
pub(crate) fn scan_candidates(
    space: &Arc<MeasureSpace>,
    from: &BallSpec,
    to: &BallSpec,
    sampler: &SamplerConfig,
    mut eval: impl FnMut(&SimpleFunction) -> Result<f64>,
) -> Result<(f64, usize)> {
    let mut best = 0.0f64;
    let mut used = 0;
    for y in sphere_candidates(space, from, to, sampler) {
        best = best.max(eval(&y)?);
        used += 1;
    }
    Ok((best, used))
}

/// Sampled lower bound of `sup_{y ∈ from} d₁(y, to)`.
pub fn directed_distance_lower(
    from: &BallSpec,
    to: &BallSpec,
    space: &Arc<MeasureSpace>,
    sampler: &SamplerConfig,
) -> Result<f64> {
    check_exponent(from.p)?;
    check_exponent(to.p)?;
    scan_candidates(space, from, to, sampler, |y| dist_to_ball(y, to)).map(|(d, _)| d)
}

/// Where an upper bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateSource {
    /// `|p_a − p_b| < δ₀(ε)` around `p*`: `H₁ ≤ ε`.
    ContinuityWindow,
    /// Same `p` and radius, one side capped at `α`: `H₁ ≤ 2rᵖ/α^{p−1}`.
    TruncationDefect,
    /// Output sets of an integral operator inside the window: `H₁ ≤ ψ*·ε`.
    OutputContinuityWindow,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffEstimate {
    /// Largest sampled separation; a lower bound of `H₁`.
    pub lower: f64,
    /// Analytic upper bound when one applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub samples_used: usize,
    pub certificate_source: CertificateSource,
    pub seed: u64,
}

impl HausdorffEstimate {
    pub(crate) fn checked(self) -> Result<Self> {
        if let Some(upper) = self.upper {
            if self.lower > upper + SANDWICH_TOL {
                return Err(Error::SandwichViolation {
                    lower: self.lower,
                    upper,
                });
            }
        }
        Ok(self)
    }
}

fn same_measure(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Whether the ledger certifies `H₁(B_{p_a}(r), B_{p_b}(r)) ≤ ε` on `space`.
pub(crate) fn window_certifies(
    ledger: &BoundLedger,
    space: &MeasureSpace,
    p_a: f64,
    p_b: f64,
    r: f64,
) -> bool {
    let params: &ProblemParams = &ledger.params;
    let centred = p_a == params.p_star || p_b == params.p_star;
    centred
        && (p_a - p_b).abs() < ledger.delta0
        && r == params.r
        && same_measure(space.total_measure(), params.mu_total)
}

/// Two-sided sampled estimate of `H₁(ball_a, ball_b)` with an analytic upper
/// bound when one applies. Both directions use the same seed, so swapping the
/// balls gives the same estimate.
pub fn hausdorff_estimate(
    ball_a: &BallSpec,
    ball_b: &BallSpec,
    space: &Arc<MeasureSpace>,
    ledger: Option<&BoundLedger>,
    sampler: &SamplerConfig,
) -> Result<HausdorffEstimate> {
    check_exponent(ball_a.p)?;
    check_exponent(ball_b.p)?;
    let (ab, n_ab) = scan_candidates(space, ball_a, ball_b, sampler, |y| dist_to_ball(y, ball_b))?;
    let (ba, n_ba) = scan_candidates(space, ball_b, ball_a, sampler, |y| dist_to_ball(y, ball_a))?;

    let uncapped = ball_a.cap.is_none() && ball_b.cap.is_none();
    let (upper, certificate_source) = match ledger {
        Some(l)
            if uncapped
                && ball_a.r == ball_b.r
                && window_certifies(l, space, ball_a.p, ball_b.p, ball_a.r) =>
        {
            (Some(l.params.epsilon), CertificateSource::ContinuityWindow)
        }
        _ => match (ball_a.cap, ball_b.cap) {
            (Some(alpha), None) | (None, Some(alpha))
                if ball_a.p == ball_b.p
                    && ball_a.r == ball_b.r
                    && ball_a.p > 1.0
                    && ball_a.p.is_finite() =>
            {
                (
                    Some(truncation_defect_bound(ball_a.p, ball_a.r, alpha)),
                    CertificateSource::TruncationDefect,
                )
            }
            _ => (None, CertificateSource::None),
        },
    };
    HausdorffEstimate {
        lower: ab.max(ba),
        upper,
        samples_used: n_ab + n_ba,
        certificate_source,
        seed: sampler.seed,
    }
    .checked()
}

/// Largest number of grid cells the oracle will allocate.
pub const ORACLE_MAX_CELLS: usize = 16_000_000;

/// Grid-enumeration oracle for `H₁` on scalar spaces with at most three
/// atoms. Both balls are replaced by their grid points at spacing `grid_res`;
/// the weighted `L₁` distance transform of each point set is computed exactly
/// by separable passes along each axis.
pub fn brute_force_hausdorff(
    ball_a: &BallSpec,
    ball_b: &BallSpec,
    space: &MeasureSpace,
    grid_res: f64,
) -> Result<f64> {
    check_exponent(ball_a.p)?;
    check_exponent(ball_b.p)?;
    if space.atoms() > 3 || space.dim() != 1 {
        return Err(Error::OracleTooLarge(
            "need at most 3 atoms and dim = 1".to_string(),
        ));
    }
    if !(grid_res > 0.0) {
        return Err(Error::InvalidParam {
            name: "grid_res",
            value: grid_res,
            requirement: "grid_res > 0",
        });
    }
    let w = space.weights();
    let half: Vec<usize> = w
        .iter()
        .map(|&wi| floor(ball_a.atom_reach(wi).max(ball_b.atom_reach(wi)) / grid_res) as usize)
        .collect();
    let sides: Vec<usize> = half.iter().map(|k| 2 * k + 1).collect();
    let cells = sides.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    let cells = match cells {
        Some(c) if c <= ORACLE_MAX_CELLS => c,
        _ => {
            return Err(Error::OracleTooLarge(
                "grid exceeds the cell budget; coarsen grid_res".to_string(),
            ))
        }
    };

    let coords = |mut idx: usize, out: &mut [f64]| {
        for (axis, o) in out.iter_mut().enumerate() {
            let k = idx % sides[axis];
            idx /= sides[axis];
            *o = (k as f64 - half[axis] as f64) * grid_res;
        }
    };
    let member = |ball: &BallSpec| -> Vec<bool> {
        let mut v = alloc::vec![0.0; w.len()];
        let mut mags = alloc::vec![0.0; w.len()];
        (0..cells)
            .map(|idx| {
                coords(idx, &mut v);
                for (m, x) in mags.iter_mut().zip(&v) {
                    *m = x.abs();
                }
                let capped = ball
                    .cap
                    .is_none_or(|a| mags.iter().all(|&m| m <= a * (1.0 + 1e-12)));
                capped && weighted_norm(w, &mags, ball.p) <= ball.r * (1.0 + 1e-12)
            })
            .collect()
    };
    let in_a = member(ball_a);
    let in_b = member(ball_b);

    let transform = |mask: &[bool]| -> Vec<f64> {
        let mut d: Vec<f64> = mask
            .iter()
            .map(|&m| if m { 0.0 } else { f64::INFINITY })
            .collect();
        let mut stride = 1;
        for axis in 0..w.len() {
            let n = sides[axis];
            let step = w[axis] * grid_res;
            for start in 0..cells {
                // Visit each line along `axis` once, from its first cell.
                if (start / stride) % n != 0 {
                    continue;
                }
                for k in 1..n {
                    let (prev, cur) = (start + (k - 1) * stride, start + k * stride);
                    d[cur] = d[cur].min(d[prev] + step);
                }
                for k in (0..n - 1).rev() {
                    let (next, cur) = (start + (k + 1) * stride, start + k * stride);
                    d[cur] = d[cur].min(d[next] + step);
                }
            }
            stride *= n;
        }
        d
    };
    let directed = |from: &[bool], to: &[bool]| -> f64 {
        let d = transform(to);
        from.iter()
            .zip(&d)
            .filter(|(m, _)| **m)
            .map(|(_, x)| *x)
            .fold(0.0, f64::max)
    };
    Ok(directed(&in_a, &in_b).max(directed(&in_b, &in_a)))
}
