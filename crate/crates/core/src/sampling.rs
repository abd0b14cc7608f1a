//! Seeded candidate generation on `L_p` balls.
//!
//! Every draw consumes a fixed number of values from the generator, so a run
//! with more samples replays a run with fewer samples as a prefix.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lp::{weighted_norm, BallSpec, MeasureSpace, SimpleFunction};
use crate::math::{cos, ln, norm2, powf, sqrt};
use crate::witness::truncate;

/// `{seed, n_samples}`; identical configs reproduce identical estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n_samples: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        SamplerConfig { seed, n_samples }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Standard normal draw (Box–Muller, always two uniforms).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    // gen() is in [0, 1); flip to (0, 1] for the logarithm.
    sqrt(-2.0 * ln(1.0 - u1)) * cos(core::f64::consts::TAU * u2)
}

/// Scales `f` so that `‖f‖_p = r`, then applies the ball's cap if present.
/// The zero function is returned unchanged.
pub fn onto_sphere(f: &SimpleFunction, ball: &BallSpec) -> SimpleFunction {
    let norm = weighted_norm(f.space().weights(), &f.atom_norms(), ball.p);
    if norm == 0.0 {
        return f.clone();
    }
    let scale = ball.r / norm;
    let g = f.map_atoms(|_, x, out| {
        for (o, v) in out.iter_mut().zip(x) {
            *o = v * scale;
        }
    });
    match ball.cap {
        Some(a) => truncate(&g, a),
        None => g,
    }
}

/// A random point on the sphere of `ball`. Atom magnitudes are drawn with a
/// random heavy-tailed profile so that both spread-out and concentrated
/// configurations appear.
pub fn sphere_point<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<MeasureSpace>,
    ball: &BallSpec,
) -> SimpleFunction {
    let n = space.atoms() * space.dim();
    let mut values: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
    let tilt: f64 = rng.gen_range(0.0..3.0);
    let d = space.dim();
    for chunk in values.chunks_exact_mut(d) {
        let m = norm2(chunk);
        if m > 0.0 {
            let target = powf(m, tilt);
            for v in chunk.iter_mut() {
                *v *= target / m;
            }
        }
    }
    let f = SimpleFunction::new(space.clone(), values).expect("finite gaussian draw");
    onto_sphere(&f, ball)
}

/// A random point inside `ball`: a sphere point shrunk by a uniform factor.
pub fn ball_point<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<MeasureSpace>,
    ball: &BallSpec,
) -> SimpleFunction {
    let f = sphere_point(rng, space, ball);
    let t: f64 = rng.gen();
    f.map_atoms(|_, x, out| {
        for (o, v) in out.iter_mut().zip(x) {
            *o = v * t;
        }
    })
}

/// Sphere points that put all mass on a single atom along `±e_k`, with the
/// largest value that atom can carry.
pub fn spikes(space: &Arc<MeasureSpace>, ball: &BallSpec) -> Vec<SimpleFunction> {
    let d = space.dim();
    let mut out = Vec::with_capacity(2 * space.atoms() * d);
    for atom in 0..space.atoms() {
        let reach = ball.atom_reach(space.weight(atom));
        for k in 0..d {
            for sign in [1.0, -1.0] {
                let mut values = alloc::vec![0.0; space.atoms() * d];
                values[atom * d + k] = sign * reach;
                out.push(SimpleFunction::new(space.clone(), values).expect("finite spike"));
            }
        }
    }
    out
}
