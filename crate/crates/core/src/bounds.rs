//! Closed-form constants behind the continuity window of `p ↦ B_p(r)`.
//!
//! For a centre exponent `p* > 1`, radius `r`, total measure `μ(Ω)` and a
//! target accuracy `ε ∈ (0, σ*)`, the ledger holds every intermediate
//! quantity: the base constants `c*, d*, α*(ε), σ*`, the per-direction
//! margins `σ₁…σ₅, τ₁…τ₅`, the four one-sided radii `δ₁…δ₄` and finally
//! `δ₀(ε)`. For every `p` with `|p − p*| < δ₀(ε)` the Hausdorff distance
//! `H₁(B_p(r), B_{p*}(r))` is at most `ε`.
//!
//! Logarithms in non-natural bases are evaluated as `ln(arg) / ln(base)`;
//! arguments of the form `1 ± x` with tiny `x` go through `ln_1p`, and the
//! margins `p*[1 − 1/(1 + L)]`, `p*[1/(1 − L) − 1]` are rewritten as
//! `p*·L/(1 ± L)` so no cancellation occurs.

use alloc::format;

use serde::{Deserialize, Serialize};

use crate::math::{ln, ln_1p, powf, sqrt};
use crate::{Error, Result};

/// The query `(p*, r, μ(Ω), ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub p_star: f64,
    pub r: f64,
    pub mu_total: f64,
    pub epsilon: f64,
}

impl ProblemParams {
    pub fn new(p_star: f64, r: f64, mu_total: f64, epsilon: f64) -> Result<Self> {
        let params = ProblemParams {
            p_star,
            r,
            mu_total,
            epsilon,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool, &'static str); 4] = [
            (
                "p_star",
                self.p_star,
                self.p_star > 1.0,
                "p* > 1 and finite",
            ),
            ("r", self.r, self.r > 0.0, "r > 0 and finite"),
            (
                "mu_total",
                self.mu_total,
                self.mu_total > 0.0,
                "mu(Omega) > 0 and finite",
            ),
            (
                "epsilon",
                self.epsilon,
                self.epsilon > 0.0,
                "epsilon > 0 and finite",
            ),
        ];
        for (name, value, ok, requirement) in checks {
            if !(ok && value.is_finite()) {
                return Err(Error::InvalidParam {
                    name,
                    value,
                    requirement,
                });
            }
        }
        Ok(())
    }

    /// The exponent range `[(p*+1)/2, 2p*]` on which truncation is controlled.
    pub fn truncation_range(&self) -> (f64, f64) {
        ((self.p_star + 1.0) / 2.0, 2.0 * self.p_star)
    }
}

/// `c*`, `d*`, `α*(ε)` and `σ*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseConstants {
    pub c_star: f64,
    pub d_star: f64,
    pub alpha_star: f64,
    pub sigma_star: f64,
}

impl BaseConstants {
    /// Whether `epsilon` lies in the admissible range `(0, σ*)`.
    pub fn admits(&self, epsilon: f64) -> bool {
        epsilon > 0.0 && epsilon < self.sigma_star
    }

    pub fn check_epsilon(&self, epsilon: f64) -> Result<()> {
        if self.admits(epsilon) {
            Ok(())
        } else {
            Err(Error::EpsilonOutOfRange {
                epsilon,
                sigma_star: self.sigma_star,
            })
        }
    }
}

/// Maximum of `r^{e(p)}` over a closed interval where `e` is monotone in `p`,
/// so only the endpoints matter.
fn max_power_at_endpoints(r: f64, exponent: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let m = powf(r, exponent(lo)).max(powf(r, exponent(hi)));
    debug_assert!(
        (0..64).all(|k| {
            let p = lo + (hi - lo) * k as f64 / 63.0;
            powf(r, exponent(p)) <= m * (1.0 + 1e-12)
        }),
        "grid cross-check of c* failed"
    );
    m
}

/// `c*, d*, α*(ε), σ*` for the given query. Any `ε > 0` is accepted here; use
/// [`BaseConstants::check_epsilon`] before asking for a window.
pub fn base_constants(params: &ProblemParams) -> Result<BaseConstants> {
    params.validate()?;
    let ProblemParams {
        p_star: ps,
        r,
        mu_total: mu,
        epsilon: eps,
    } = *params;

    let above = max_power_at_endpoints(r, |p| (p - ps) / p, ps, 2.0 * ps);
    let below = max_power_at_endpoints(r, |p| (ps - p) / ps, (ps + 1.0) / 2.0, ps);
    let c_star = above.max(below);
    let d_star = (mu + 1.0) * (c_star + 1.0);
    let alpha_star = (2.0 * r).max(r * powf(8.0 * r / eps, 2.0 / (ps - 1.0)));
    if !alpha_star.is_finite() {
        return Err(Error::InvalidParam {
            name: "epsilon",
            value: eps,
            requirement: "alpha*(epsilon) overflows; epsilon too small for this p*",
        });
    }
    let sigma_star = (r / 2.0)
        .min(4.0 * d_star)
        .min(4.0 * r * mu)
        .min(4.0 * d_star * sqrt(r));
    Ok(BaseConstants {
        c_star,
        d_star,
        alpha_star,
        sigma_star,
    })
}

/// `log_base(arg)` given `ln(arg)` directly (so callers can use `ln_1p`).
fn log_in_base(term: &'static str, ln_arg: f64, arg: f64, base: f64) -> Result<f64> {
    let ln_base = ln(base);
    if !(base > 0.0)
        || !(arg > 0.0)
        || ln_base == 0.0
        || !ln_base.is_finite()
        || !ln_arg.is_finite()
    {
        return Err(Error::LogDomain { term, base, arg });
    }
    Ok(ln_arg / ln_base)
}

fn positive(term: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Precondition(format!(
            "{term} = {value} is not a positive finite number"
        )))
    }
}

/// The five logarithms shared by the `σ` and `τ` families.
struct Logs<'a> {
    params: &'a ProblemParams,
    base: &'a BaseConstants,
}

impl Logs<'_> {
    fn frac(&self, alpha: f64) -> f64 {
        self.params.epsilon / (4.0 * alpha * self.params.mu_total)
    }

    /// `log_{ε/(4rμ)}(1 − ε/(4αμ))`, used by `σ₁` and `τ₄`.
    fn small_set(&self, alpha: f64) -> Result<f64> {
        let x = self.frac(alpha);
        let base = self.params.epsilon / (4.0 * self.params.r * self.params.mu_total);
        log_in_base(
            "log_{eps/(4 r mu)}(1 - eps/(4 alpha mu))",
            ln_1p(-x),
            1.0 - x,
            base,
        )
    }

    /// `log_{α/r}(1 + ε/(4αμ))`, used by `σ₂` and `τ₅`.
    fn cap_growth(&self, alpha: f64) -> Result<f64> {
        let x = self.frac(alpha);
        log_in_base(
            "log_{alpha/r}(1 + eps/(4 alpha mu))",
            ln_1p(x),
            1.0 + x,
            alpha / self.params.r,
        )
    }

    /// `log_{α₁/r}(α₂/α₁)`, used by `σ₃` and `τ₃`.
    fn cap_ratio(&self, alpha1: f64, alpha2: f64) -> Result<f64> {
        log_in_base(
            "log_{alpha1/r}(alpha2/alpha1)",
            ln_1p((alpha2 - alpha1) / alpha1),
            alpha2 / alpha1,
            alpha1 / self.params.r,
        )
    }

    /// `log_{r/α}(1 − ε/(4αμ))`, used by `σ₄` and `τ₁`.
    fn shrink(&self, alpha: f64) -> Result<f64> {
        let x = self.frac(alpha);
        log_in_base(
            "log_{r/alpha}(1 - eps/(4 alpha mu))",
            ln_1p(-x),
            1.0 - x,
            self.params.r / alpha,
        )
    }

    /// `log_{64 r d*²/ε²}(1 + ε/(4αμ))`, used by `σ₅` and `τ₂`.
    fn spread(&self, alpha: f64) -> Result<f64> {
        let x = self.frac(alpha);
        let eps = self.params.epsilon;
        let base = 64.0 * self.params.r * self.base.d_star * self.base.d_star / (eps * eps);
        log_in_base(
            "log_{64 r d*^2/eps^2}(1 + eps/(4 alpha mu))",
            ln_1p(x),
            1.0 + x,
            base,
        )
    }
}

/// `p*[1 − 1/(1 + L)]`.
fn below_margin(p_star: f64, l: f64) -> f64 {
    p_star * l / (1.0 + l)
}

/// `p*[1/(1 − L) − 1]`.
fn above_margin(p_star: f64, l: f64) -> f64 {
    p_star * l / (1.0 - l)
}

fn check_window_query(params: &ProblemParams) -> Result<BaseConstants> {
    let base = base_constants(params)?;
    base.check_epsilon(params.epsilon)?;
    Ok(base)
}

fn check_alpha(base: &BaseConstants, alpha: f64) -> Result<()> {
    if alpha > base.alpha_star && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "alpha > alpha*(eps) required, got alpha = {alpha}, alpha* = {}",
            base.alpha_star
        )))
    }
}

fn check_alpha_pair(base: &BaseConstants, alpha1: f64, alpha2: f64) -> Result<()> {
    check_alpha(base, alpha1)?;
    if alpha2 > alpha1 && alpha2.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "alpha2 > alpha1 required, got alpha1 = {alpha1}, alpha2 = {alpha2}"
        )))
    }
}

/// Margins `[σ₁, σ₂, σ₃]` and `γ₁`.
fn gamma1_parts(
    params: &ProblemParams,
    base: &BaseConstants,
    alpha1: f64,
    alpha2: f64,
) -> Result<([f64; 3], f64)> {
    check_alpha_pair(base, alpha1, alpha2)?;
    let logs = Logs { params, base };
    let ps = params.p_star;
    let s1 = positive("sigma1", below_margin(ps, logs.small_set(alpha1)?))?;
    let s2 = positive("sigma2", below_margin(ps, logs.cap_growth(alpha1)?))?;
    let s3 = positive("sigma3", below_margin(ps, logs.cap_ratio(alpha1, alpha2)?))?;
    Ok(([s1, s2, s3], s1.min(s2).min(s3).min((ps - 1.0) / 2.0)))
}

/// Margins `[σ₄, σ₅]` and `γ₂`.
fn gamma2_parts(
    params: &ProblemParams,
    base: &BaseConstants,
    alpha: f64,
) -> Result<([f64; 2], f64)> {
    check_alpha(base, alpha)?;
    let logs = Logs { params, base };
    let ps = params.p_star;
    let s4 = positive("sigma4", above_margin(ps, logs.shrink(alpha)?))?;
    let s5 = positive("sigma5", above_margin(ps, logs.spread(alpha)?))?;
    Ok(([s4, s5], s4.min(s5).min(ps)))
}

/// Margins `[τ₁, τ₂]` and `γ₃`.
fn gamma3_parts(
    params: &ProblemParams,
    base: &BaseConstants,
    alpha: f64,
) -> Result<([f64; 2], f64)> {
    check_alpha(base, alpha)?;
    let logs = Logs { params, base };
    let ps = params.p_star;
    let t1 = positive("tau1", ps * logs.shrink(alpha)?)?;
    let t2 = positive("tau2", ps * logs.spread(alpha)?)?;
    Ok(([t1, t2], t1.min(t2).min((ps - 1.0) / 2.0)))
}

/// Margins `[τ₃, τ₄, τ₅]` and `γ₄`.
fn gamma4_parts(
    params: &ProblemParams,
    base: &BaseConstants,
    alpha1: f64,
    alpha2: f64,
) -> Result<([f64; 3], f64)> {
    check_alpha_pair(base, alpha1, alpha2)?;
    let logs = Logs { params, base };
    let ps = params.p_star;
    let t3 = positive("tau3", ps * logs.cap_ratio(alpha1, alpha2)?)?;
    let t4 = positive("tau4", ps * logs.small_set(alpha1)?)?;
    let t5 = positive("tau5", ps * logs.cap_growth(alpha1)?)?;
    Ok(([t3, t4, t5], t3.min(t4).min(t5).min(ps)))
}

/// Radius below `p*` on which `B^{α₁}_{p*}` is within `ε/2` of `B^{α₂}_p`.
pub fn gamma1(params: &ProblemParams, alpha1: f64, alpha2: f64) -> Result<f64> {
    let base = check_window_query(params)?;
    gamma1_parts(params, &base, alpha1, alpha2).map(|(_, g)| g)
}

/// Radius above `p*` on which `B^α_{p*}` is within `ε/2` of `B^α_p`.
pub fn gamma2(params: &ProblemParams, alpha: f64) -> Result<f64> {
    let base = check_window_query(params)?;
    gamma2_parts(params, &base, alpha).map(|(_, g)| g)
}

/// Radius below `p*` on which `B^α_p` is within `ε/2` of `B^α_{p*}`.
pub fn gamma3(params: &ProblemParams, alpha: f64) -> Result<f64> {
    let base = check_window_query(params)?;
    gamma3_parts(params, &base, alpha).map(|(_, g)| g)
}

/// Radius above `p*` on which `B^{α₁}_p` is within `ε/2` of `B^{α₂}_{p*}`.
pub fn gamma4(params: &ProblemParams, alpha1: f64, alpha2: f64) -> Result<f64> {
    let base = check_window_query(params)?;
    gamma4_parts(params, &base, alpha1, alpha2).map(|(_, g)| g)
}

/// Every constant of a window query, stored once and never recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundLedger {
    #[serde(flatten)]
    pub params: ProblemParams,
    #[serde(flatten)]
    pub base: BaseConstants,
    /// Cap used by the lower-side rescaling: `2α*`.
    pub alpha1: f64,
    /// Cap reached after rescaling: `3α*`.
    pub alpha2: f64,
    /// Cap used by the single-cap chains: `2α*`.
    pub alpha: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub sigma4: f64,
    pub sigma5: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub tau4: f64,
    pub tau5: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    /// Window for `B_{p*} ⊂ B_p + εB₁`, `p ∈ (p* − δ₁, p*)`.
    pub delta1: f64,
    /// Window for `B_{p*} ⊂ B_p + εB₁`, `p ∈ (p*, p* + δ₂)`.
    pub delta2: f64,
    /// Window for `B_p ⊂ B_{p*} + εB₁`, `p ∈ (p* − δ₃, p*)`.
    pub delta3: f64,
    /// Window for `B_p ⊂ B_{p*} + εB₁`, `p ∈ (p*, p* + δ₄)`.
    pub delta4: f64,
    /// `min(δ₁, δ₂)`.
    pub delta_lower: f64,
    /// `min(δ₃, δ₄)`.
    pub delta_upper: f64,
    /// `min(δ_lower, δ_upper)`.
    pub delta0: f64,
}

impl BoundLedger {
    /// The open interval `(p* − δ₀, p* + δ₀)`.
    pub fn window(&self) -> (f64, f64) {
        (
            self.params.p_star - self.delta0,
            self.params.p_star + self.delta0,
        )
    }

    /// `|p − p*| < δ₀`.
    pub fn in_window(&self, p: f64) -> bool {
        (p - self.params.p_star).abs() < self.delta0
    }
}

/// Builds the full ledger for `params`. Fails when `ε ∉ (0, σ*)`.
pub fn delta_window(params: &ProblemParams) -> Result<BoundLedger> {
    let base = check_window_query(params)?;
    let alpha1 = 2.0 * base.alpha_star;
    let alpha2 = 3.0 * base.alpha_star;
    let alpha = 2.0 * base.alpha_star;

    let ([sigma1, sigma2, sigma3], g1) = gamma1_parts(params, &base, alpha1, alpha2)?;
    let ([sigma4, sigma5], g2) = gamma2_parts(params, &base, alpha)?;
    let ([tau1, tau2], g3) = gamma3_parts(params, &base, alpha)?;
    let ([tau3, tau4, tau5], g4) = gamma4_parts(params, &base, alpha1, alpha2)?;

    let delta_lower = g1.min(g2);
    let delta_upper = g3.min(g4);
    Ok(BoundLedger {
        params: *params,
        base,
        alpha1,
        alpha2,
        alpha,
        sigma1,
        sigma2,
        sigma3,
        sigma4,
        sigma5,
        tau1,
        tau2,
        tau3,
        tau4,
        tau5,
        gamma1: g1,
        gamma2: g2,
        gamma3: g3,
        gamma4: g4,
        delta1: g1,
        delta2: g2,
        delta3: g3,
        delta4: g4,
        delta_lower,
        delta_upper,
        delta0: delta_lower.min(delta_upper),
    })
}
