use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub use crate::presets::{five_asset_market, five_asset_pick};

pub fn five_asset_sigma() -> DMatrix<f64> {
    five_asset_market().sigma().clone()
}

pub fn random_matrix<R: Rng>(r: usize, c: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Well-conditioned random SPD matrix with entries of order 0.1.
pub fn random_spd<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = random_matrix(n, n, rng) * 0.3;
    let m = &a * a.transpose() / n as f64 + DMatrix::identity(n, n) * 0.02;
    (&m + m.transpose()) * 0.5
}

