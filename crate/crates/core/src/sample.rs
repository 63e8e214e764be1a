//! Seeded random draws of system quantities, shared by self-tests and the
//! validation experiment.

use crate::quadforms::WeightMatrices;
use crate::scalar::{CMat, Real};
use crate::sysmodel::{random_cn_matrix, RelayFilter, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Derives a child seed from a master seed and an index.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    stream_rng(seed, index).random()
}

pub fn relay<T: Real>(cfg: &SystemConfig<T>, rng: &mut ChaCha8Rng) -> RelayFilter<T> {
    RelayFilter { taps: (0..cfg.l_r).map(|_| random_cn_matrix(rng, cfg.m_t, cfg.m_r, T::one())).collect() }
}

pub fn precoders<T: Real>(cfg: &SystemConfig<T>, rng: &mut ChaCha8Rng) -> Vec<CMat<T>> {
    (0..cfg.n).map(|_| random_cn_matrix(rng, cfg.n_t, cfg.gamma, T::one())).collect()
}

pub fn receivers<T: Real>(cfg: &SystemConfig<T>, rng: &mut ChaCha8Rng) -> Vec<CMat<T>> {
    (0..cfg.n).map(|_| random_cn_matrix(rng, cfg.gamma, cfg.n_r, T::one())).collect()
}

pub fn weights<T: Real>(cfg: &SystemConfig<T>, rng: &mut ChaCha8Rng) -> WeightMatrices<T> {
    WeightMatrices {
        diag: (0..cfg.n).map(|_| (0..cfg.gamma).map(|_| T::lit(rng.random_range(0.2..2.0))).collect()).collect(),
    }
}

/// A small random configuration with a valid minimal prefix.
pub fn small_config<T: Real>(rng: &mut ChaCha8Rng) -> SystemConfig<T> {
    let mut c = SystemConfig::<T>::reference();
    c.n = rng.random_range(2..=6);
    c.n_t = rng.random_range(1..=3);
    c.m_r = rng.random_range(1..=3);
    c.m_t = rng.random_range(1..=3);
    c.n_r = rng.random_range(1..=3);
    let min_dim = c.n_t.min(c.m_r).min(c.m_t).min(c.n_r);
    c.gamma = rng.random_range(1..=min_dim);
    c.l_f = rng.random_range(1..=3);
    c.l_r = rng.random_range(1..=3);
    c.l_g = rng.random_range(1..=3);
    c.n_cp = c.min_cp();
    c.sigma_r2 = T::lit(rng.random_range(0.3..1.5));
    c.sigma_d2 = T::lit(rng.random_range(0.3..1.5));
    c
}
