//! Random streams for the simulation harness.
//!
//! Every stream is a ChaCha8 generator keyed by `seed_from_u64(seed)`. A
//! sweep point `p` and trial `j` read from stream number `(p << 32) | j`, so
//! trials are independent of execution order and of which methods run.
//! Gaussian samples use the Box-Muller transform on two uniforms from
//! `(0, 1]` and `[0, 1)`.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream for trial `trial` of sweep point `point`.
pub fn trial_stream(seed: u64, point: usize, trial: usize) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | (trial as u64 & 0xFFFF_FFFF));
    rng
}

/// Uniform on `[0, 1)`.
pub fn uniform01<R: Rng>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Uniform on `[-1/2, 1/2)`.
pub fn centered_uniform<R: Rng>(rng: &mut R) -> f64 {
    uniform01(rng) - 0.5
}

/// Standard normal sample.
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1 = 1.0 - uniform01(rng);
    let u2 = uniform01(rng);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Uniformly distributed direction on the unit sphere.
pub fn unit_vector<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(gaussian(rng), gaussian(rng), gaussian(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}
