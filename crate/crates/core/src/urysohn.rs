//! Urysohn integral input-output systems on atomic spaces.
//!
//! The system maps an input `x ∈ B_p(r)` on `Ω` to the output
//! `F(x)(ξ) = Σ_s w_s K(ξ, s, x(s))` on `Ω₀`. The kernel must be Lipschitz in
//! its last argument with a weight field `ψ(ξ, s)`; then with
//! `ψ* = Σ_ξ w⁰_ξ max_s ψ(ξ, s)`, `k* = Σ_{ξ,s} w⁰_ξ w_s ‖K(ξ, s, 0)‖`,
//! `θ* = max{1, μ(Ω)}` every output satisfies `‖F(x)‖₁ ≤ ψ*θ*r + k*`, and
//! `F` is `ψ*`-Lipschitz from `L₁(Ω)` to `L₁(Ω₀)`. The latter transports the
//! ball continuity window to the output sets with modulus `ψ*·ε`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundLedger;
use crate::hausdorff::{nearest_point, scan_candidates, sphere_candidates, window_certifies};
use crate::hausdorff::{CertificateSource, HausdorffEstimate};
use crate::lp::{check_exponent, BallSpec, MeasureSpace, SimpleFunction};
use crate::math::{norm2, sqrt, tanh};
use crate::sampling::{ball_point, gaussian, spikes, SamplerConfig};
use crate::{Error, Result};

/// `K(ξ, s, x)` together with its Lipschitz field `ψ(ξ, s)`.
///
/// Implementations must be pure: the same arguments always give the same
/// value.
pub trait Kernel {
    fn input_space(&self) -> &Arc<MeasureSpace>;
    fn output_space(&self) -> &Arc<MeasureSpace>;
    /// Writes `K(ξ, s, x)` into `out` (length = output dimension).
    fn eval(&self, xi: usize, s: usize, x: &[f64], out: &mut [f64]);
    /// `ψ(ξ, s)`.
    fn lipschitz(&self, xi: usize, s: usize) -> f64;
}

/// Built-in kernel families. Each has a coefficient matrix `A(ξ, s)` of shape
/// `dim_out × dim_in` and an optional offset `b(ξ, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `A(ξ, s)·x`.
    Linear,
    /// `A(ξ, s)·x + b(ξ, s)`.
    Affine,
    /// `A(ξ, s)·tanh(x) + b(ξ, s)`, `tanh` applied componentwise.
    Saturating,
}

/// A kernel from one of the built-in families, with its `ψ` field.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    input: Arc<MeasureSpace>,
    output: Arc<MeasureSpace>,
    /// `[ξ][s][row][col]`, flattened.
    a: Vec<f64>,
    /// `[ξ][s][row]`, flattened.
    b: Vec<f64>,
    /// `[ξ][s]`, flattened.
    psi: Vec<f64>,
}

impl KernelSpec {
    /// Builds a kernel from per-pair coefficients. `coeff(ξ, s)` returns the
    /// row-major matrix `A(ξ, s)` and the offset `b(ξ, s)` (ignored for the
    /// linear family). `ψ(ξ, s)` is set to the spectral norm of `A(ξ, s)`,
    /// which is the exact Lipschitz constant of every family.
    pub fn build(
        family: KernelFamily,
        input: Arc<MeasureSpace>,
        output: Arc<MeasureSpace>,
        mut coeff: impl FnMut(usize, usize) -> (Vec<f64>, Vec<f64>),
    ) -> Result<Self> {
        let (n0, n, din, dout) = (output.atoms(), input.atoms(), input.dim(), output.dim());
        let mut a = Vec::with_capacity(n0 * n * din * dout);
        let mut b = Vec::with_capacity(n0 * n * dout);
        let mut psi = Vec::with_capacity(n0 * n);
        for xi in 0..n0 {
            for s in 0..n {
                let (m, off) = coeff(xi, s);
                if m.len() != din * dout {
                    return Err(Error::BadKernel(format!(
                        "A({xi},{s}) has {} entries, expected {dout}x{din}",
                        m.len()
                    )));
                }
                if m.iter().chain(&off).any(|v| !v.is_finite()) {
                    return Err(Error::BadKernel(format!(
                        "non-finite coefficient at ({xi},{s})"
                    )));
                }
                match family {
                    KernelFamily::Linear => b.extend(core::iter::repeat_n(0.0, dout)),
                    _ if off.is_empty() => b.extend(core::iter::repeat_n(0.0, dout)),
                    _ if off.len() == dout => b.extend_from_slice(&off),
                    _ => {
                        return Err(Error::BadKernel(format!(
                            "b({xi},{s}) has {} entries, expected {dout}",
                            off.len()
                        )))
                    }
                }
                psi.push(spectral_norm(&m, dout, din));
                a.extend_from_slice(&m);
            }
        }
        Ok(KernelSpec {
            family,
            input,
            output,
            a,
            b,
            psi,
        })
    }

    /// Replaces the computed `ψ` field, e.g. with a looser bound read from a
    /// configuration file. Use [`validate_kernel`] to check it.
    pub fn with_psi(mut self, psi: Vec<f64>) -> Result<Self> {
        if psi.len() != self.psi.len() {
            return Err(Error::BadKernel(format!(
                "psi has {} entries, expected {}",
                psi.len(),
                self.psi.len()
            )));
        }
        if psi.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::BadKernel(
                "psi entries must be finite and nonnegative".into(),
            ));
        }
        self.psi = psi;
        Ok(self)
    }

    /// `K(ξ, s, x) = x` when `ξ = s`, else `0`, on a single space.
    pub fn diagonal(space: Arc<MeasureSpace>) -> Result<Self> {
        let d = space.dim();
        KernelSpec::build(KernelFamily::Linear, space.clone(), space, |xi, s| {
            let mut m = vec![0.0; d * d];
            if xi == s {
                for k in 0..d {
                    m[k * d + k] = 1.0;
                }
            }
            (m, Vec::new())
        })
    }

    /// `K(ξ, s, x) = c·x` for every pair (input and output dimensions equal).
    pub fn scaled_identity(
        input: Arc<MeasureSpace>,
        output: Arc<MeasureSpace>,
        c: f64,
    ) -> Result<Self> {
        let d = input.dim();
        if output.dim() != d {
            return Err(Error::BadKernel(
                "scaled identity needs equal dimensions".into(),
            ));
        }
        KernelSpec::build(KernelFamily::Linear, input, output, |_, _| {
            let mut m = vec![0.0; d * d];
            for k in 0..d {
                m[k * d + k] = c;
            }
            (m, Vec::new())
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    fn pair(&self, xi: usize, s: usize) -> usize {
        xi * self.input.atoms() + s
    }
}

impl Kernel for KernelSpec {
    fn input_space(&self) -> &Arc<MeasureSpace> {
        &self.input
    }

    fn output_space(&self) -> &Arc<MeasureSpace> {
        &self.output
    }

    fn eval(&self, xi: usize, s: usize, x: &[f64], out: &mut [f64]) {
        let (din, dout) = (self.input.dim(), self.output.dim());
        let k = self.pair(xi, s);
        let m = &self.a[k * din * dout..(k + 1) * din * dout];
        let off = &self.b[k * dout..(k + 1) * dout];
        for (row, o) in out.iter_mut().enumerate() {
            let coeffs = &m[row * din..(row + 1) * din];
            let dot: f64 = match self.family {
                KernelFamily::Saturating => coeffs.iter().zip(x).map(|(c, v)| c * tanh(*v)).sum(),
                _ => coeffs.iter().zip(x).map(|(c, v)| c * v).sum(),
            };
            *o = dot + off[row];
        }
    }

    fn lipschitz(&self, xi: usize, s: usize) -> f64 {
        self.psi[self.pair(xi, s)]
    }
}

/// Largest singular value of a row-major `rows × cols` matrix, via cyclic
/// Jacobi on the Gram matrix.
fn spectral_norm(m: &[f64], rows: usize, cols: usize) -> f64 {
    if rows == 1 || cols == 1 {
        return norm2(m);
    }
    let mut g = vec![0.0; cols * cols];
    for i in 0..cols {
        for j in 0..cols {
            g[i * cols + j] = (0..rows).map(|k| m[k * cols + i] * m[k * cols + j]).sum();
        }
    }
    for _sweep in 0..64 {
        let off: f64 = (0..cols)
            .flat_map(|i| (0..cols).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| g[i * cols + j] * g[i * cols + j])
            .sum();
        let diag: f64 = (0..cols).map(|i| g[i * cols + i] * g[i * cols + i]).sum();
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..cols {
            for q in p + 1..cols {
                let apq = g[p * cols + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (g[q * cols + q] - g[p * cols + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let sn = t * c;
                for k in 0..cols {
                    let gkp = g[k * cols + p];
                    let gkq = g[k * cols + q];
                    g[k * cols + p] = c * gkp - sn * gkq;
                    g[k * cols + q] = sn * gkp + c * gkq;
                }
                for k in 0..cols {
                    let gpk = g[p * cols + k];
                    let gqk = g[q * cols + k];
                    g[p * cols + k] = c * gpk - sn * gqk;
                    g[q * cols + k] = sn * gpk + c * gqk;
                }
            }
        }
    }
    let top = (0..cols).map(|i| g[i * cols + i]).fold(0.0, f64::max);
    sqrt(top)
}

/// Serialized kernel description:
/// `{"family", "A", "b", "psi", "input_space", "output_space"}` with `A`
/// indexed `[ξ][s][row][col]`, `b` indexed `[ξ][s][row]` and `psi` `[ξ][s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub family: KernelFamily,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<Vec<f64>>>,
    pub input_space: MeasureSpace,
    pub output_space: MeasureSpace,
}

impl KernelConfig {
    pub fn build(&self) -> Result<KernelSpec> {
        let input = Arc::new(self.input_space.clone());
        let output = Arc::new(self.output_space.clone());
        let (n0, n) = (output.atoms(), input.atoms());
        let shape_err = |what: &str| {
            Error::BadKernel(format!(
                "{what} must be indexed [{n0} output atoms][{n} input atoms]"
            ))
        };
        if self.a.len() != n0 || self.a.iter().any(|row| row.len() != n) {
            return Err(shape_err("A"));
        }
        if let Some(b) = &self.b {
            if b.len() != n0 || b.iter().any(|row| row.len() != n) {
                return Err(shape_err("b"));
            }
        }
        if self.family == KernelFamily::Affine && self.b.is_none() {
            return Err(Error::BadKernel("affine family requires b".into()));
        }
        let mut failure: Option<Error> = None;
        let spec = KernelSpec::build(self.family, input, output.clone(), |xi, s| {
            let m = &self.a[xi][s];
            if m.len() != output.dim() && failure.is_none() {
                failure = Some(Error::BadKernel(format!(
                    "A({xi},{s}) must have {} rows",
                    output.dim()
                )));
            }
            let flat: Vec<f64> = m.iter().flatten().copied().collect();
            let off = self
                .b
                .as_ref()
                .map(|b| b[xi][s].clone())
                .unwrap_or_default();
            (flat, off)
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        match &self.psi {
            Some(psi) => {
                if psi.len() != n0 || psi.iter().any(|row| row.len() != n) {
                    return Err(shape_err("psi"));
                }
                spec.with_psi(psi.iter().flatten().copied().collect())
            }
            None => Ok(spec),
        }
    }
}

/// Outcome of probing the Lipschitz condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Largest observed `‖K(ξ,s,x₁) − K(ξ,s,x₂)‖ / (ψ(ξ,s)‖x₁ − x₂‖)`.
    pub max_ratio: f64,
    pub probes: usize,
    /// `max_ratio ≤ 1 + 1e-9` and every `K(ξ, s, 0)` finite.
    pub passed: bool,
}

/// Probes the Lipschitz condition on random argument pairs. A pair `(ξ, s)`
/// with `ψ = 0` whose kernel still moves is a hard error.
pub fn validate_kernel<K: Kernel + ?Sized>(
    kernel: &K,
    probes: &SamplerConfig,
) -> Result<ValidationReport> {
    let (n0, n) = (kernel.output_space().atoms(), kernel.input_space().atoms());
    let (din, dout) = (kernel.input_space().dim(), kernel.output_space().dim());
    let zero = vec![0.0; din];
    let mut k1 = vec![0.0; dout];
    let mut k2 = vec![0.0; dout];
    let mut finite = true;
    for xi in 0..n0 {
        for s in 0..n {
            let psi = kernel.lipschitz(xi, s);
            if !(psi.is_finite() && psi >= 0.0) {
                return Err(Error::BadKernel(format!(
                    "psi({xi},{s}) = {psi} is not a finite nonnegative number"
                )));
            }
            kernel.eval(xi, s, &zero, &mut k1);
            finite &= k1.iter().all(|v| v.is_finite());
        }
    }

    let mut rng = probes.rng();
    let mut max_ratio = 0.0f64;
    let mut x1 = vec![0.0; din];
    let mut x2 = vec![0.0; din];
    let mut dx = vec![0.0; din];
    let mut dk = vec![0.0; dout];
    for _ in 0..probes.n_samples {
        let xi = rng.gen_range(0..n0);
        let s = rng.gen_range(0..n);
        let scale = [0.01, 0.1, 1.0, 10.0, 100.0][rng.gen_range(0..5)];
        let near: bool = rng.gen();
        for k in 0..din {
            x1[k] = scale * gaussian(&mut rng);
            let step = gaussian(&mut rng);
            x2[k] = if near {
                x1[k] + 1e-3 * scale * step
            } else {
                scale * step
            };
            dx[k] = x1[k] - x2[k];
        }
        let gap = norm2(&dx);
        if gap == 0.0 {
            continue;
        }
        kernel.eval(xi, s, &x1, &mut k1);
        kernel.eval(xi, s, &x2, &mut k2);
        for k in 0..dout {
            dk[k] = k1[k] - k2[k];
        }
        let jump = norm2(&dk);
        let psi = kernel.lipschitz(xi, s);
        if psi == 0.0 {
            if jump > 0.0 {
                return Err(Error::ZeroLipschitzViolated { xi, s, jump });
            }
            continue;
        }
        max_ratio = max_ratio.max(jump / (psi * gap));
    }
    Ok(ValidationReport {
        max_ratio,
        probes: probes.n_samples,
        passed: finite && max_ratio <= 1.0 + 1e-9,
    })
}

/// `F(x)(ξ) = Σ_s w_s K(ξ, s, x(s))`.
pub fn apply_operator<K: Kernel + ?Sized>(
    kernel: &K,
    x: &SimpleFunction,
) -> Result<SimpleFunction> {
    let input = kernel.input_space();
    if !(Arc::ptr_eq(x.space(), input) || **x.space() == **input) {
        return Err(Error::SpaceMismatch);
    }
    let output = kernel.output_space();
    let dout = output.dim();
    let mut values = vec![0.0; output.atoms() * dout];
    let mut k = vec![0.0; dout];
    for (xi, acc) in values.chunks_exact_mut(dout).enumerate() {
        for s in 0..input.atoms() {
            kernel.eval(xi, s, x.value(s), &mut k);
            let w = input.weight(s);
            for (a, v) in acc.iter_mut().zip(&k) {
                *a += w * v;
            }
        }
    }
    SimpleFunction::new(output.clone(), values)
}

/// `ψ*`, `k*`, `θ*` and `ψ₀ = ψ*θ*r + k*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConstants {
    pub psi_star: f64,
    pub k_star: f64,
    pub theta_star: f64,
    pub psi_0: f64,
}

pub fn system_constants<K: Kernel + ?Sized>(kernel: &K, r: f64) -> Result<SystemConstants> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParam {
            name: "r",
            value: r,
            requirement: "r > 0 and finite",
        });
    }
    let (input, output) = (kernel.input_space(), kernel.output_space());
    let zero = vec![0.0; input.dim()];
    let mut k0 = vec![0.0; output.dim()];
    let mut psi_star = 0.0;
    let mut k_star = 0.0;
    for xi in 0..output.atoms() {
        let w0 = output.weight(xi);
        let phi = (0..input.atoms())
            .map(|s| kernel.lipschitz(xi, s))
            .fold(0.0, f64::max);
        psi_star += w0 * phi;
        for s in 0..input.atoms() {
            kernel.eval(xi, s, &zero, &mut k0);
            k_star += w0 * input.weight(s) * norm2(&k0);
        }
    }
    let theta_star = input.total_measure().max(1.0);
    Ok(SystemConstants {
        psi_star,
        k_star,
        theta_star,
        psi_0: psi_star * theta_star * r + k_star,
    })
}

/// Largest observed output `L₁` norm over sampled inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputBoundReport {
    pub max_output_l1: f64,
    pub psi_0: f64,
    pub samples: usize,
}

/// Samples inputs in `B_p(r)` and checks `‖F(x)‖₁ ≤ ψ₀` for each. A violation
/// is an error: the bound is a theorem, so it means a bug.
pub fn output_bound_check<K: Kernel + ?Sized>(
    kernel: &K,
    p: f64,
    r: f64,
    sampler: &SamplerConfig,
) -> Result<OutputBoundReport> {
    check_exponent(p)?;
    let ball = BallSpec::new(p, r)?;
    let constants = system_constants(kernel, r)?;
    let space = kernel.input_space();
    let limit = constants.psi_0 * (1.0 + 1e-12) + 1e-12;
    let mut rng = sampler.rng();
    let mut max_output_l1 = 0.0f64;
    let mut samples = 0;
    let random = (0..sampler.n_samples).map(|i| {
        if i % 2 == 0 {
            crate::sampling::sphere_point(&mut rng, space, &ball)
        } else {
            ball_point(&mut rng, space, &ball)
        }
    });
    for x in spikes(space, &ball).into_iter().chain(random) {
        let y = apply_operator(kernel, &x)?;
        let l1 = crate::lp::lp_norm(&y, 1.0)?;
        if l1 > limit {
            return Err(Error::OutputBoundViolated {
                observed: l1,
                bound: constants.psi_0,
            });
        }
        max_output_l1 = max_output_l1.max(l1);
        samples += 1;
    }
    Ok(OutputBoundReport {
        max_output_l1,
        psi_0: constants.psi_0,
        samples,
    })
}

/// Number of sampled outputs of the target set each candidate is compared
/// against, besides the image of its own nearest point.
pub const OUTPUT_HULL_SIZE: usize = 64;

/// Sampled `sup_{x ∈ B_from} d₁(F(x), F(B_to))`. The inner distance is
/// bounded above by the image of the `L₁`-nearest point of `B_to` and by a
/// fixed sample of target outputs, so the result is heuristic: output sets
/// need not be convex.
fn directed_output_distance<K: Kernel + ?Sized>(
    kernel: &K,
    from: &BallSpec,
    to: &BallSpec,
    sampler: &SamplerConfig,
) -> Result<(f64, usize)> {
    let space = kernel.input_space();
    let hull: Vec<SimpleFunction> = sphere_candidates(space, to, from, sampler)
        .take(OUTPUT_HULL_SIZE)
        .map(|w| apply_operator(kernel, &w))
        .collect::<Result<_>>()?;
    scan_candidates(space, from, to, sampler, |x| {
        let y = apply_operator(kernel, x)?;
        let (proj, _) = nearest_point(x, to)?;
        let mut best = y.l1_distance(&apply_operator(kernel, &proj)?)?;
        for h in &hull {
            best = best.min(y.l1_distance(h)?);
        }
        Ok(best)
    })
}

/// Hausdorff estimate between the output sets `F(B_{p_a}(r))` and
/// `F(B_{p_b}(r))`, one of the exponents being the ledger's `p*`. The upper
/// bound `ψ*·ε` is attached exactly when `|p_a − p_b| < δ₀`.
pub fn output_set_distance<K: Kernel + ?Sized>(
    kernel: &K,
    p_a: f64,
    p_b: f64,
    r: f64,
    ledger: &BoundLedger,
    sampler: &SamplerConfig,
) -> Result<HausdorffEstimate> {
    check_exponent(p_a)?;
    check_exponent(p_b)?;
    let params = &ledger.params;
    if p_a != params.p_star && p_b != params.p_star {
        return Err(Error::Precondition(format!(
            "one exponent must equal p* = {}, got {p_a} and {p_b}",
            params.p_star
        )));
    }
    ledger.base.check_epsilon(params.epsilon)?;
    let a = BallSpec::new(p_a, r)?;
    let b = BallSpec::new(p_b, r)?;
    let (ab, n_ab) = directed_output_distance(kernel, &a, &b, sampler)?;
    let (ba, n_ba) = directed_output_distance(kernel, &b, &a, sampler)?;
    let (upper, certificate_source) = if window_certifies(ledger, kernel.input_space(), p_a, p_b, r)
    {
        let psi_star = system_constants(kernel, r)?.psi_star;
        (
            Some(psi_star * params.epsilon),
            CertificateSource::OutputContinuityWindow,
        )
    } else {
        (None, CertificateSource::None)
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{delta_window, ProblemParams};
    use crate::lp::make_space;

    fn unit(n: usize) -> Arc<MeasureSpace> {
        make_space(vec![1.0; n], 1).unwrap()
    }

    #[test]
    fn spectral_norm_matches_known_cases() {
        assert!((spectral_norm(&[3.0, 0.0, 0.0, 2.0], 2, 2) - 3.0).abs() < 1e-14);
        // [[1, 1], [0, 1]] has largest singular value (1 + √5)/2.
        let golden = (1.0 + sqrt(5.0)) / 2.0;
        assert!((spectral_norm(&[1.0, 1.0, 0.0, 1.0], 2, 2) - golden).abs() < 1e-14);
        assert!((spectral_norm(&[1.0, 2.0, 2.0], 1, 3) - 3.0).abs() < 1e-15);
        let m = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        // Singular values of [[1,2,3],[4,5,6]]: 9.508032000695724, 0.7728696356734838.
        assert!((spectral_norm(&m, 2, 3) - 9.508032000695724).abs() < 1e-12);
    }

    #[test]
    fn validation_examples() {
        let s = SamplerConfig::new(1, 500);
        let id = KernelSpec::scaled_identity(unit(1), unit(1), 1.0).unwrap();
        let rep = validate_kernel(&id, &s).unwrap();
        assert!(rep.passed && (rep.max_ratio - 1.0).abs() < 1e-12);

        let zero = KernelSpec::scaled_identity(unit(2), unit(1), 0.0).unwrap();
        assert!(validate_kernel(&zero, &s).unwrap().passed);

        let double = KernelSpec::scaled_identity(unit(1), unit(1), 2.0)
            .unwrap()
            .with_psi(vec![1.0])
            .unwrap();
        let rep = validate_kernel(&double, &s).unwrap();
        assert!(!rep.passed && (rep.max_ratio - 2.0).abs() < 1e-9);

        let lying = KernelSpec::scaled_identity(unit(1), unit(1), 1.0)
            .unwrap()
            .with_psi(vec![0.0])
            .unwrap();
        assert!(matches!(
            validate_kernel(&lying, &s),
            Err(Error::ZeroLipschitzViolated { .. })
        ));
    }

    #[test]
    fn operator_examples() {
        let id = KernelSpec::scaled_identity(unit(1), unit(1), 1.0).unwrap();
        let x = SimpleFunction::scalar(unit(1), &[0.3]).unwrap();
        assert_eq!(apply_operator(&id, &x).unwrap().values(), &[0.3]);

        let zero = KernelSpec::scaled_identity(unit(2), unit(1), 0.0).unwrap();
        let x2 = SimpleFunction::scalar(zero.input_space().clone(), &[0.3, 0.4]).unwrap();
        assert_eq!(apply_operator(&zero, &x2).unwrap().values(), &[0.0]);

        let sum = KernelSpec::scaled_identity(unit(2), unit(1), 1.0).unwrap();
        let x2 = SimpleFunction::scalar(sum.input_space().clone(), &[0.3, 0.4]).unwrap();
        assert!((apply_operator(&sum, &x2).unwrap().values()[0] - 0.7).abs() < 1e-15);

        let wrong = SimpleFunction::scalar(make_space(vec![2.0], 1).unwrap(), &[1.0]).unwrap();
        assert_eq!(apply_operator(&id, &wrong), Err(Error::SpaceMismatch));
    }

    #[test]
    fn system_constant_examples() {
        let id = KernelSpec::scaled_identity(unit(1), unit(1), 1.0).unwrap();
        let c = system_constants(&id, 1.0).unwrap();
        assert_eq!(
            (c.psi_star, c.k_star, c.theta_star, c.psi_0),
            (1.0, 0.0, 1.0, 1.0)
        );

        let zero = KernelSpec::scaled_identity(unit(2), unit(1), 0.0).unwrap();
        let c = system_constants(&zero, 1.0).unwrap();
        assert_eq!((c.psi_star, c.k_star, c.psi_0), (0.0, 0.0, 0.0));

        let sum = KernelSpec::scaled_identity(unit(2), unit(1), 1.0).unwrap();
        let c = system_constants(&sum, 1.0).unwrap();
        assert_eq!((c.psi_star, c.theta_star, c.psi_0), (1.0, 2.0, 2.0));
    }

    #[test]
    fn affine_offset_enters_k_star() {
        let input = make_space(vec![0.5, 1.5], 1).unwrap();
        let output = make_space(vec![2.0], 2).unwrap();
        let k = KernelSpec::build(KernelFamily::Affine, input, output, |_, s| {
            (
                vec![1.0, 0.0],
                vec![3.0 * (s as f64 + 1.0), 4.0 * (s as f64 + 1.0)],
            )
        })
        .unwrap();
        let c = system_constants(&k, 1.0).unwrap();
        // k* = 2·(0.5·5 + 1.5·10)
        assert!((c.k_star - 35.0).abs() < 1e-12);
        assert!((c.psi_star - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bound_check_identity() {
        let id = KernelSpec::scaled_identity(unit(1), unit(1), 1.0).unwrap();
        let rep = output_bound_check(&id, 2.0, 1.0, &SamplerConfig::new(2, 100)).unwrap();
        assert!(rep.max_output_l1 <= 1.0 + 1e-12 && rep.max_output_l1 > 0.99);
        let zero = KernelSpec::scaled_identity(unit(2), unit(1), 0.0).unwrap();
        assert_eq!(
            output_bound_check(&zero, 2.0, 1.0, &SamplerConfig::new(2, 100))
                .unwrap()
                .max_output_l1,
            0.0
        );
    }

    #[test]
    fn output_distance_requires_centre() {
        let params = ProblemParams::new(2.0, 1.0, 2.0, 0.4).unwrap();
        let ledger = delta_window(&params).unwrap();
        let k = KernelSpec::diagonal(unit(2)).unwrap();
        let s = SamplerConfig::new(0, 10);
        assert!(matches!(
            output_set_distance(&k, 2.5, 3.0, 1.0, &ledger, &s),
            Err(Error::Precondition(_))
        ));
        let e = output_set_distance(&k, 2.0, 2.0, 1.0, &ledger, &s).unwrap();
        assert_eq!(e.lower, 0.0);
        // ψ* = Σ_ξ max_s ψ(ξ, s) = 2 on two unit output atoms.
        assert_eq!(e.upper, Some(0.8));
    }

    #[test]
    fn config_round_trip_shapes() {
        let cfg = KernelConfig {
            family: KernelFamily::Saturating,
            a: vec![vec![vec![vec![2.0]], vec![vec![-1.0]]]],
            b: Some(vec![vec![vec![0.5], vec![0.0]]]),
            psi: None,
            input_space: MeasureSpace::new(vec![1.0, 1.0], 1).unwrap(),
            output_space: MeasureSpace::new(vec![1.0], 1).unwrap(),
        };
        let k = cfg.build().unwrap();
        assert_eq!(k.lipschitz(0, 0), 2.0);
        assert_eq!(k.lipschitz(0, 1), 1.0);
        let mut bad = cfg.clone();
        bad.a.push(bad.a[0].clone());
        assert!(matches!(bad.build(), Err(Error::BadKernel(_))));
        let mut bad = cfg;
        bad.family = KernelFamily::Affine;
        bad.b = None;
        assert!(bad.build().is_err());
    }
}
