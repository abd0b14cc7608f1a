//! Constructive maps between balls of different exponents.
//!
//! * [`truncate`] clips every atom radially to norm `α`. For `f ∈ B_p(r)` the
//!   clipped atoms have measure at most `(r/α)^p` and the `L₁` defect is at
//!   most `2rᵖ/α^{p−1}`.
//! * [`rescale`] raises atom magnitudes to the power `from/to` around `r`:
//!   `g(s) = f(s)·(‖f(s)‖/r)^{(from−to)/to}`. It maps `B_from(r)` into
//!   `B_to(r)` exactly, since `Σ w‖g‖^{to} = r^{to−from} Σ w‖f‖^{from}`.
//!
//! [`witness_into_ball`] composes the two with the cap `2α*(ε)` and reports
//! which one-sided window of the ledger certifies the result.

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundLedger, ProblemParams};
use crate::lp::{check_exponent, lp_norm, BallSpec, SimpleFunction};
use crate::math::{norm2, powf};
use crate::{Error, Result};

/// Radial clip of every atom value to norm at most `alpha`.
pub fn truncate(f: &SimpleFunction, alpha: f64) -> SimpleFunction {
    f.map_atoms(|_, x, out| {
        let n = norm2(x);
        if n > alpha {
            let scale = alpha / n;
            for (o, v) in out.iter_mut().zip(x) {
                *o = v * scale;
            }
        } else {
            out.copy_from_slice(x);
        }
    })
}

/// `2rᵖ/α^{p−1}`, the worst-case `L₁` cost of clipping a point of `B_p(r)` at
/// `α`.
pub fn truncation_defect_bound(p: f64, r: f64, alpha: f64) -> f64 {
    2.0 * r * powf(r / alpha, p - 1.0)
}

/// Power rescaling from `B_{from_p}(r)` to `B_{to_p}(r)`. Zero atoms stay zero.
pub fn rescale(f: &SimpleFunction, from_p: f64, to_p: f64, r: f64) -> SimpleFunction {
    let exponent = (from_p - to_p) / to_p;
    f.map_atoms(|_, x, out| {
        let n = norm2(x);
        if n == 0.0 || exponent == 0.0 {
            out.copy_from_slice(x);
        } else {
            let scale = powf(n / r, exponent);
            for (o, v) in out.iter_mut().zip(x) {
                *o = v * scale;
            }
        }
    })
}

/// Measures of the atoms at or below a magnitude threshold and above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionDiagnostics {
    pub small_set_measure: f64,
    pub large_set_measure: f64,
    pub threshold: f64,
}

pub fn partition_diagnostics(f: &SimpleFunction, threshold: f64) -> PartitionDiagnostics {
    let norms = f.atom_norms();
    let space = f.space();
    let small = space.measure_where(|i| norms[i] <= threshold);
    let large = space.measure_where(|i| norms[i] > threshold);
    PartitionDiagnostics {
        small_set_measure: small,
        large_set_measure: large,
        threshold,
    }
}

/// Which inclusion chain produced a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessChain {
    /// `from = to`: truncation only.
    Truncation,
    /// `B_{p*} → B_p` with `p < p*`, window `δ₁`.
    CentreToLower,
    /// `B_{p*} → B_p` with `p > p*`, window `δ₂`.
    CentreToHigher,
    /// `B_p → B_{p*}` with `p < p*`, window `δ₃`.
    LowerToCentre,
    /// `B_p → B_{p*}` with `p > p*`, window `δ₄`.
    HigherToCentre,
    /// Outside every certified window.
    Uncertified,
}

impl WitnessChain {
    /// Name of the ledger entry bounding this chain's window.
    pub fn window_key(self) -> Option<&'static str> {
        match self {
            WitnessChain::CentreToLower => Some("delta1"),
            WitnessChain::CentreToHigher => Some("delta2"),
            WitnessChain::LowerToCentre => Some("delta3"),
            WitnessChain::HigherToCentre => Some("delta4"),
            WitnessChain::Truncation | WitnessChain::Uncertified => None,
        }
    }

    /// Classifies a move `from_p → to_p` against the ledger's centre.
    pub fn classify(ledger: &BoundLedger, from_p: f64, to_p: f64) -> (WitnessChain, Option<f64>) {
        let ps = ledger.params.p_star;
        if from_p == to_p {
            return (WitnessChain::Truncation, None);
        }
        let (chain, delta, gap) = if from_p == ps {
            if to_p < ps {
                (WitnessChain::CentreToLower, ledger.delta1, ps - to_p)
            } else {
                (WitnessChain::CentreToHigher, ledger.delta2, to_p - ps)
            }
        } else if to_p == ps {
            if from_p < ps {
                (WitnessChain::LowerToCentre, ledger.delta3, ps - from_p)
            } else {
                (WitnessChain::HigherToCentre, ledger.delta4, from_p - ps)
            }
        } else {
            return (WitnessChain::Uncertified, None);
        };
        if gap < delta {
            (chain, Some(delta))
        } else {
            (WitnessChain::Uncertified, None)
        }
    }
}

/// A witness point together with its measured and certified distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessResult {
    pub witness: SimpleFunction,
    /// Measured `‖f − witness‖₁`.
    pub l1_distance: f64,
    /// Analytic bound on `l1_distance`; absent when uncertified.
    pub certified_bound: Option<f64>,
    pub target_ball: BallSpec,
    pub chain: WitnessChain,
    /// Ledger key of the window that certified the move (`delta1` … `delta4`).
    pub certified_by: Option<&'static str>,
    /// Radius of that window.
    pub window: Option<f64>,
    /// Cap applied before rescaling.
    pub cap: f64,
    /// Measure of the atoms clipped by the cap.
    pub clipped_measure: f64,
    /// Split of the capped input at the threshold the chain's estimate uses.
    pub partition: PartitionDiagnostics,
}

/// Carries `f ∈ B_{from_p}(r)` into `B_{to_p}(r)` by truncating at `2α*(ε)`
/// and rescaling. The result is certified to lie within `ε` in `L₁` when one
/// exponent is the ledger's `p*` and the other sits inside the matching
/// one-sided window; when `from_p = to_p` the bound is the truncation defect.
pub fn witness_into_ball(
    f: &SimpleFunction,
    from_p: f64,
    to_p: f64,
    params: &ProblemParams,
    ledger: &BoundLedger,
) -> Result<WitnessResult> {
    check_exponent(from_p)?;
    check_exponent(to_p)?;
    if ledger.params != *params {
        return Err(Error::Precondition(
            "ledger was built for different parameters".into(),
        ));
    }
    let r = params.r;
    let norm = lp_norm(f, from_p)?;
    if norm > r * (1.0 + crate::DEFAULT_TOL) {
        return Err(Error::Precondition(alloc::format!(
            "source function must lie in B_{from_p}({r}); its norm is {norm}"
        )));
    }
    let cap = 2.0 * ledger.base.alpha_star;
    let capped = truncate(f, cap);
    let norms = f.atom_norms();
    let clipped_measure = f.space().measure_where(|i| norms[i] > cap);
    let witness = rescale(&capped, from_p, to_p, r);
    let l1_distance = f.l1_distance(&witness)?;

    let (chain, window) = WitnessChain::classify(ledger, from_p, to_p);
    let eps = params.epsilon;
    let threshold = match chain {
        WitnessChain::Truncation | WitnessChain::Uncertified => cap,
        WitnessChain::CentreToLower | WitnessChain::HigherToCentre => eps / (4.0 * params.mu_total),
        WitnessChain::CentreToHigher | WitnessChain::LowerToCentre => {
            let t = eps / (8.0 * ledger.base.d_star);
            t * t
        }
    };
    let certified_bound = match chain {
        WitnessChain::Truncation => Some(truncation_defect_bound(from_p, r, cap)),
        WitnessChain::Uncertified => None,
        _ => Some(eps),
    };
    Ok(WitnessResult {
        witness,
        l1_distance,
        certified_bound,
        target_ball: BallSpec::new(to_p, r)?,
        chain,
        certified_by: chain.window_key(),
        window,
        cap,
        clipped_measure,
        partition: partition_diagnostics(&capped, threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::delta_window;
    use crate::lp::{ball_contains, make_space};
    use alloc::vec;

    fn scalar(weights: &[f64], values: &[f64]) -> SimpleFunction {
        SimpleFunction::scalar(make_space(weights.to_vec(), 1).unwrap(), values).unwrap()
    }

    #[test]
    fn truncate_examples() {
        let f = scalar(&[1.0, 1.0], &[0.5, 0.5]);
        assert_eq!(truncate(&f, 1.0), f);
        let space = make_space(vec![1.0], 2).unwrap();
        let g = SimpleFunction::from_rows(space, &[[3.0, 4.0]]).unwrap();
        let t = truncate(&g, 1.0);
        assert!((t.values()[0] - 0.6).abs() < 1e-15 && (t.values()[1] - 0.8).abs() < 1e-15);
        assert_eq!(truncate(&scalar(&[1.0], &[-3.0]), 2.0).values(), &[-2.0]);
    }

    #[test]
    fn truncation_defect_examples() {
        assert_eq!(truncation_defect_bound(2.0, 1.0, 2.0), 1.0);
        assert_eq!(truncation_defect_bound(2.0, 1.0, 400.0), 0.005);
    }

    #[test]
    fn rescale_examples() {
        let f = scalar(&[1.0, 2.0], &[0.3, -0.7]);
        assert_eq!(rescale(&f, 2.5, 2.5, 1.0), f);
        let zero = SimpleFunction::zeros(f.space().clone());
        assert_eq!(rescale(&zero, 2.0, 4.0, 1.0), zero);
        let g = rescale(&scalar(&[1.0], &[0.5]), 2.0, 4.0, 1.0);
        assert!((g.values()[0] - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(lp_norm(&g, 4.0).unwrap() <= 1.0);
    }

    #[test]
    fn partition_examples() {
        let f = scalar(&[1.0, 1.0], &[0.1, 5.0]);
        let d = partition_diagnostics(&f, 1.0);
        assert_eq!((d.small_set_measure, d.large_set_measure), (1.0, 1.0));
        let z = SimpleFunction::zeros(f.space().clone());
        assert_eq!(partition_diagnostics(&z, 0.3).small_set_measure, 2.0);
        assert_eq!(partition_diagnostics(&f, 0.0).small_set_measure, 0.0);
    }

    #[test]
    fn witness_zero_and_identity() {
        let params = ProblemParams::new(2.0, 1.0, 2.0, 0.4).unwrap();
        let ledger = delta_window(&params).unwrap();
        let space = make_space(vec![1.0, 1.0], 1).unwrap();
        let zero = SimpleFunction::zeros(space.clone());
        let w = witness_into_ball(&zero, 2.0, 2.0 + ledger.delta0 / 2.0, &params, &ledger).unwrap();
        assert_eq!(w.l1_distance, 0.0);
        assert_eq!(w.witness, zero);

        let f = SimpleFunction::scalar(space, &[0.6, -0.8]).unwrap();
        let w = witness_into_ball(&f, 2.0, 2.0, &params, &ledger).unwrap();
        assert_eq!(w.chain, WitnessChain::Truncation);
        assert!(w.l1_distance <= params.epsilon / 4.0 + 1e-9);
    }

    #[test]
    fn witness_dispatch_and_flags() {
        let params = ProblemParams::new(2.0, 1.0, 2.0, 0.4).unwrap();
        let ledger = delta_window(&params).unwrap();
        let f = scalar(&[1.0, 1.0], &[0.6, 0.8]);
        let h = ledger.delta0 / 2.0;
        let cases = [
            (2.0, 2.0 - h, WitnessChain::CentreToLower, "delta1"),
            (2.0, 2.0 + h, WitnessChain::CentreToHigher, "delta2"),
            (2.0 - h, 2.0, WitnessChain::LowerToCentre, "delta3"),
            (2.0 + h, 2.0, WitnessChain::HigherToCentre, "delta4"),
        ];
        for (from, to, chain, key) in cases {
            let src = crate::sampling::onto_sphere(&f, &BallSpec::new(from, 1.0).unwrap());
            let w = witness_into_ball(&src, from, to, &params, &ledger).unwrap();
            assert_eq!(w.chain, chain);
            assert_eq!(w.certified_by, Some(key));
            assert_eq!(w.certified_bound, Some(0.4));
            assert!(ball_contains(&w.target_ball, &w.witness, 1e-9));
            assert!(w.l1_distance <= 0.4);
        }
        let far = witness_into_ball(&f, 2.0, 3.0, &params, &ledger).unwrap();
        assert_eq!(far.chain, WitnessChain::Uncertified);
        assert_eq!(far.certified_bound, None);
        assert!(ball_contains(&far.target_ball, &far.witness, 1e-9));
    }

    #[test]
    fn witness_rejects_points_outside_the_source_ball() {
        let params = ProblemParams::new(2.0, 1.0, 2.0, 0.4).unwrap();
        let ledger = delta_window(&params).unwrap();
        let f = scalar(&[1.0, 1.0], &[1.0, 1.0]);
        assert!(matches!(
            witness_into_ball(&f, 2.0, 2.0, &params, &ledger),
            Err(Error::Precondition(_))
        ));
    }
}
