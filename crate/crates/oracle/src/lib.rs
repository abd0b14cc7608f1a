//! Reference computations for the test suites.
//!
//! Everything here is written for independence, not speed: the constant
//! ledger is re-evaluated from its textbook formulas in 320-bit arithmetic,
//! and distances to balls are found by plain grid enumeration.

pub mod bigfloat;

pub use bigfloat::BigFloat;

/// High-precision reference values of the window ledger.
#[derive(Debug, Clone)]
pub struct LedgerOracle {
    pub c_star: BigFloat,
    pub d_star: BigFloat,
    pub alpha_star: BigFloat,
    pub sigma_star: BigFloat,
    pub sigma: [BigFloat; 5],
    pub tau: [BigFloat; 5],
    pub gamma: [BigFloat; 4],
    pub delta: [BigFloat; 4],
    pub delta0: BigFloat,
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x)
}

fn log_base(base: &BigFloat, arg: &BigFloat) -> BigFloat {
    &arg.ln() / &base.ln()
}

fn min_all(values: &[BigFloat]) -> BigFloat {
    values
        .iter()
        .cloned()
        .reduce(BigFloat::min)
        .expect("nonempty")
}

/// Evaluates the ledger for `(p*, r, μ, ε)` directly from the defining
/// formulas, with `α₁ = α = 2α*` and `α₂ = 3α*`. The maximum defining `c*` is
/// taken over a 65-point grid of each exponent interval (the grid contains
/// the endpoints, where the maximum sits).
pub fn ledger_oracle(p_star: f64, r: f64, mu: f64, epsilon: f64) -> LedgerOracle {
    let (ps, r, mu, eps) = (big(p_star), big(r), big(mu), big(epsilon));
    let one = BigFloat::from_int(1);
    let two = BigFloat::from_int(2);
    let four = BigFloat::from_int(4);

    // r^e(p) = exp(e(p)·ln r) and exp is increasing: maximise e(p)·ln r over
    // the grid and exponentiate once.
    let ln_r = r.ln();
    let mut best_log: Option<BigFloat> = None;
    let grid = 64;
    let above_lo = ps.clone();
    let above_hi = &ps * &two;
    let below_lo = &(&ps + &one) / &two;
    let below_hi = ps.clone();
    for k in 0..=grid {
        let t = &BigFloat::from_int(k) / &BigFloat::from_int(grid);
        let p = &above_lo + &(&(&above_hi - &above_lo) * &t);
        let q = &below_lo + &(&(&below_hi - &below_lo) * &t);
        for e in [&(&p - &ps) / &p, &(&ps - &q) / &ps] {
            let v = &e * &ln_r;
            best_log = Some(match best_log {
                Some(b) => b.max(v),
                None => v,
            });
        }
    }
    let c_star = best_log.expect("nonempty grid").exp();
    let d_star = &(&mu + &one) * &(&c_star + &one);
    let alpha_star =
        (&two * &r).max(&r * &(&(&BigFloat::from_int(8) * &r) / &eps).pow(&(&two / &(&ps - &one))));
    let sigma_star = min_all(&[
        &r / &two,
        &four * &d_star,
        &(&four * &r) * &mu,
        &(&four * &d_star) * &r.sqrt(),
    ]);

    let alpha1 = &two * &alpha_star;
    let alpha2 = &BigFloat::from_int(3) * &alpha_star;
    let alpha = alpha1.clone();
    let x1 = &eps / &(&(&four * &alpha1) * &mu);
    let x = &eps / &(&(&four * &alpha) * &mu);

    let l1 = log_base(&(&eps / &(&(&four * &r) * &mu)), &(&one - &x1));
    let l2 = log_base(&(&alpha1 / &r), &(&one + &x1));
    let l3 = log_base(&(&alpha1 / &r), &(&alpha2 / &alpha1));
    let l4 = log_base(&(&r / &alpha), &(&one - &x));
    let spread_base = &(&(&(&BigFloat::from_int(64) * &r) * &d_star) * &d_star) / &(&eps * &eps);
    let l5 = log_base(&spread_base, &(&one + &x));

    // p*[1 − 1/(1 + L)] and p*[1/(1 − L) − 1], literally.
    let below = |l: &BigFloat| &ps * &(&one - &(&one / &(&one + l)));
    let above = |l: &BigFloat| &ps * &(&(&one / &(&one - l)) - &one);

    let sigma = [below(&l1), below(&l2), below(&l3), above(&l4), above(&l5)];
    let tau = [&ps * &l4, &ps * &l5, &ps * &l3, &ps * &l1, &ps * &l2];
    let half_gap = &(&ps - &one) / &two;
    let gamma = [
        min_all(&[
            sigma[0].clone(),
            sigma[1].clone(),
            sigma[2].clone(),
            half_gap.clone(),
        ]),
        min_all(&[sigma[3].clone(), sigma[4].clone(), ps.clone()]),
        min_all(&[tau[0].clone(), tau[1].clone(), half_gap]),
        min_all(&[tau[2].clone(), tau[3].clone(), tau[4].clone(), ps.clone()]),
    ];
    let delta = gamma.clone();
    let delta0 = min_all(&delta);
    LedgerOracle {
        c_star,
        d_star,
        alpha_star,
        sigma_star,
        sigma,
        tau,
        gamma,
        delta,
        delta0,
    }
}

/// `min_{t ∈ grid ∩ B_p(r)} Σ w_s |y_s − t_s|` on a two-atom scalar space,
/// over the grid `hℤ²`. Ball membership is tested in the form
/// `Σ w_s |t_s|^p ≤ r^p` with a relative slack of `1e-12`. Every grid column
/// `t₀ = ih` is visited; within a column the admissible `t₁` form a symmetric
/// run `|j| ≤ j_max`, on which `|y₁ − jh|` is minimised by the grid point
/// nearest to `y₁`.
pub fn grid_dist_2atom(y: [f64; 2], weights: [f64; 2], p: f64, r: f64, h: f64) -> f64 {
    let inside = |t0: f64, t1: f64| -> bool {
        if p.is_infinite() {
            t0.abs() <= r && t1.abs() <= r
        } else {
            weights[0] * t0.abs().powf(p) + weights[1] * t1.abs().powf(p)
                <= r.powf(p) * (1.0 + 1e-12)
        }
    };
    let reach = |w: f64| {
        if p.is_infinite() {
            r
        } else {
            r / w.powf(1.0 / p)
        }
    };
    let n0 = (reach(weights[0]) / h).floor() as i64;
    let mut best = f64::INFINITY;
    for i in -n0..=n0 {
        let t0 = i as f64 * h;
        if !inside(t0, 0.0) {
            continue;
        }
        let room = if p.is_infinite() {
            r
        } else {
            ((r.powf(p) - weights[0] * t0.abs().powf(p)).max(0.0) / weights[1]).powf(1.0 / p)
        };
        let mut j_max = (room / h).floor() as i64 + 1;
        while j_max > 0 && !inside(t0, j_max as f64 * h) {
            j_max -= 1;
        }
        let j = ((y[1] / h).round() as i64).clamp(-j_max, j_max);
        let d = weights[0] * (y[0] - t0).abs() + weights[1] * (y[1] - j as f64 * h).abs();
        best = best.min(d);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_reference_point() {
        let l = ledger_oracle(2.0, 1.0, 1.0, 0.4);
        assert!((l.alpha_star.to_f64() - 400.0).abs() < 1e-10);
        let s1 = l.sigma[0].to_f64();
        let s2 = l.sigma[1].to_f64();
        assert!((s1 - 1.0858e-4).abs() < 1e-8, "{s1}");
        assert!((s2 - 3.7397e-5).abs() < 1e-9, "{s2}");
        assert!((l.sigma[2].to_f64() - 0.11437).abs() < 1e-5);
    }

    #[test]
    fn grid_distance_simple_cases() {
        // Inside the ball: zero (the origin is a grid point).
        assert_eq!(grid_dist_2atom([0.0, 0.0], [1.0, 1.0], 2.0, 1.0, 1e-3), 0.0);
        // (2, 0) to the unit L1 ball: 1.
        assert!((grid_dist_2atom([2.0, 0.0], [1.0, 1.0], 1.0, 1.0, 1e-3) - 1.0).abs() < 1e-9);
    }
}
