//! Seeded, splittable random streams.
//!
//! Every consumer derives its generator from `(master seed, stream index)`,
//! so parallel work is reproducible regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::BlochVector;

pub type StreamRng = ChaCha8Rng;

/// Independent stream `index` of the generator seeded by `master`.
pub fn stream(master: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Uniformly distributed point on the unit sphere.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    BlochVector::new(r * phi.cos(), r * phi.sin(), z)
}

/// Random unit vector orthogonal to `m`.
pub fn tangent_direction<R: Rng + ?Sized>(rng: &mut R, m: BlochVector) -> BlochVector {
    let mhat = m.normalized();
    loop {
        let v = uniform_sphere(rng);
        let t = v - mhat * v.dot(mhat);
        let n = t.norm();
        if n > 1e-3 {
            return t * (1.0 / n);
        }
    }
}
