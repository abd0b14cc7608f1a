//! Finite atomic measure spaces, `ℝ^dim`-valued simple functions and the
//! weighted `L_p` norms on them.
//!
//! A measure space is a list of atoms with positive weights. A simple
//! function assigns one vector to each atom, so
//! `‖f‖_p = (Σ_s w_s ‖f(s)‖^p)^{1/p}` with the Euclidean norm inside, and
//! `‖f‖_∞ = max_s ‖f(s)‖` (every atom has positive mass, so the essential
//! supremum is a plain maximum).

use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::math::{norm2, powf};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    weights: Vec<f64>,
    dim: usize,
}

/// A finite measure space `(Ω, Σ, μ)` with `Ω` a list of atoms, paired with
/// the dimension of the value space `X = ℝ^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct MeasureSpace {
    weights: Vec<f64>,
    dim: usize,
    total: f64,
}

impl TryFrom<SpaceRepr> for MeasureSpace {
    type Error = Error;

    fn try_from(raw: SpaceRepr) -> Result<Self> {
        MeasureSpace::new(raw.weights, raw.dim)
    }
}

impl From<MeasureSpace> for SpaceRepr {
    fn from(space: MeasureSpace) -> Self {
        SpaceRepr {
            weights: space.weights,
            dim: space.dim,
        }
    }
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>, dim: usize) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if dim < 1 {
            return Err(Error::BadDimension);
        }
        if let Some((index, &weight)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::BadWeight { index, weight });
        }
        let total: f64 = weights.iter().sum();
        if !total.is_finite() {
            return Err(Error::InvalidParam {
                name: "total_measure",
                value: total,
                requirement: "must be finite",
            });
        }
        Ok(MeasureSpace {
            weights,
            dim,
            total,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `μ(Ω)`.
    pub fn total_measure(&self) -> f64 {
        self.total
    }

    /// Measure of the atoms selected by `pred`.
    pub fn measure_where(&self, mut pred: impl FnMut(usize) -> bool) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, w)| *w)
            .sum()
    }
}

/// Validated constructor for a [`MeasureSpace`] wrapped for sharing between
/// functions.
pub fn make_space(weights: Vec<f64>, dim: usize) -> Result<Arc<MeasureSpace>> {
    MeasureSpace::new(weights, dim).map(Arc::new)
}

/// A function that is constant on each atom. Values are stored atom-major in a
/// flat buffer of length `atoms * dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction {
    space: Arc<MeasureSpace>,
    values: Vec<f64>,
}

impl SimpleFunction {
    pub fn new(space: Arc<MeasureSpace>, values: Vec<f64>) -> Result<Self> {
        let expected = space.atoms() * space.dim();
        if values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected: space.atoms(),
                dim: space.dim(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SimpleFunction { space, values })
    }

    /// Builds a function from one row per atom.
    pub fn from_rows<R: AsRef<[f64]>>(space: Arc<MeasureSpace>, rows: &[R]) -> Result<Self> {
        if rows.len() != space.atoms() || rows.iter().any(|r| r.as_ref().len() != space.dim()) {
            return Err(Error::ShapeMismatch {
                expected: space.atoms(),
                dim: space.dim(),
                got: rows.iter().map(|r| r.as_ref().len()).sum(),
            });
        }
        let values = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        SimpleFunction::new(space, values)
    }

    /// Scalar-valued convenience constructor (`dim` must be 1).
    pub fn scalar(space: Arc<MeasureSpace>, values: &[f64]) -> Result<Self> {
        if space.dim() != 1 {
            return Err(Error::ShapeMismatch {
                expected: space.atoms(),
                dim: space.dim(),
                got: values.len(),
            });
        }
        SimpleFunction::new(space, values.to_vec())
    }

    pub fn zeros(space: Arc<MeasureSpace>) -> Self {
        let n = space.atoms() * space.dim();
        SimpleFunction {
            space,
            values: alloc::vec![0.0; n],
        }
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> &[f64] {
        let d = self.space.dim();
        &self.values[atom * d..(atom + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.space.dim())
    }

    /// `‖f(s)‖` for atom `s`.
    pub fn atom_norm(&self, atom: usize) -> f64 {
        norm2(self.value(atom))
    }

    pub fn atom_norms(&self) -> Vec<f64> {
        self.rows().map(norm2).collect()
    }

    /// `max_s ‖f(s)‖`.
    pub fn sup_norm(&self) -> f64 {
        self.rows().map(norm2).fold(0.0, f64::max)
    }

    /// Applies `op` to every atom value, producing a function on the same
    /// space. `op` receives the atom index, the input value and the output
    /// slot.
    pub fn map_atoms(&self, mut op: impl FnMut(usize, &[f64], &mut [f64])) -> SimpleFunction {
        let d = self.space.dim();
        let mut out = alloc::vec![0.0; self.values.len()];
        for (i, (src, dst)) in self
            .values
            .chunks_exact(d)
            .zip(out.chunks_exact_mut(d))
            .enumerate()
        {
            op(i, src, dst);
        }
        SimpleFunction {
            space: self.space.clone(),
            values: out,
        }
    }

    /// `‖self − other‖₁`.
    pub fn l1_distance(&self, other: &SimpleFunction) -> Result<f64> {
        check_same_space(self, other)?;
        let d = self.space.dim();
        let mut acc = 0.0;
        let mut diff = alloc::vec![0.0; d];
        for (s, (a, b)) in self
            .values
            .chunks_exact(d)
            .zip(other.values.chunks_exact(d))
            .enumerate()
        {
            for k in 0..d {
                diff[k] = a[k] - b[k];
            }
            acc += self.space.weight(s) * norm2(&diff);
        }
        Ok(acc)
    }

    pub fn same_space(&self, other: &SimpleFunction) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }
}

/// Serialized as an array of per-atom arrays (`atoms × dim`).
impl Serialize for SimpleFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.space.atoms()))?;
        for row in self.rows() {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}

pub(crate) fn check_same_space(f: &SimpleFunction, g: &SimpleFunction) -> Result<()> {
    if f.same_space(g) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::BadExponent(p))
    } else {
        Ok(())
    }
}

/// `(Σ_s w_s m_s^p)^{1/p}` for nonnegative magnitudes `m`, factoring out the
/// largest magnitude so large `p` does not overflow.
pub(crate) fn weighted_norm(weights: &[f64], magnitudes: &[f64], p: f64) -> f64 {
    let m = magnitudes.iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return m;
    }
    if p == 1.0 {
        return weights.iter().zip(magnitudes).map(|(w, a)| w * a).sum();
    }
    let s: f64 = weights
        .iter()
        .zip(magnitudes)
        .map(|(w, a)| w * powf(a / m, p))
        .sum();
    m * powf(s, 1.0 / p)
}

/// The weighted `L_p` norm, `p ∈ [1, +∞]`.
pub fn lp_norm(f: &SimpleFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(weighted_norm(f.space.weights(), &f.atom_norms(), p))
}

/// Atom-wise `a·f(s) + b·g(s)`.
pub fn combine(f: &SimpleFunction, g: &SimpleFunction, a: f64, b: f64) -> Result<SimpleFunction> {
    check_same_space(f, g)?;
    let values = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(x, y)| a * x + b * y)
        .collect();
    SimpleFunction::new(f.space.clone(), values)
}

/// A closed ball `{‖f‖_p ≤ r}`, optionally intersected with the pointwise cap
/// `‖f(s)‖ ≤ α` for every atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub p: f64,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

impl BallSpec {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        check_exponent(p)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParam {
                name: "r",
                value: r,
                requirement: "r > 0 and finite",
            });
        }
        Ok(BallSpec { p, r, cap: None })
    }

    pub fn capped(p: f64, r: f64, cap: f64) -> Result<Self> {
        let ball = BallSpec::new(p, r)?;
        if !(cap > 0.0) {
            return Err(Error::InvalidParam {
                name: "cap",
                value: cap,
                requirement: "cap > 0",
            });
        }
        Ok(BallSpec {
            cap: Some(cap),
            ..ball
        })
    }

    /// Largest value a single atom of weight `w` can carry inside the ball.
    pub fn atom_reach(&self, weight: f64) -> f64 {
        let reach = if self.p.is_infinite() {
            self.r
        } else {
            self.r / powf(weight, 1.0 / self.p)
        };
        match self.cap {
            Some(a) => reach.min(a),
            None => reach,
        }
    }
}

/// `‖f‖_p ≤ r + tol`, and when capped also `max_s ‖f(s)‖ ≤ α + tol`.
pub fn ball_contains(ball: &BallSpec, f: &SimpleFunction, tol: f64) -> bool {
    let norms = f.atom_norms();
    if let Some(a) = ball.cap {
        if norms.iter().any(|&n| n > a + tol) {
            return false;
        }
    }
    weighted_norm(f.space.weights(), &norms, ball.p) <= ball.r + tol
}
