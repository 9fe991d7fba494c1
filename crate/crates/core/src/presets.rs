//! Reference inputs: a five-asset CAPM-calibrated market with three relative
//! and absolute views.

use nalgebra::{DMatrix, DVector};

use crate::market::MarketModel;

pub const FIVE_ASSET_MU: [f64; 5] = [0.0320, 0.0447, 0.0269, 0.0679, 0.0672];

#[rustfmt::skip]
pub const FIVE_ASSET_SIGMA: [f64; 25] = [
    0.0641, 0.0175, 0.0086, 0.0266, 0.0363,
    0.0175, 0.1191, 0.0234, 0.0303, 0.0353,
    0.0086, 0.0234, 0.1154, 0.0322, 0.0278,
    0.0266, 0.0303, 0.0322, 0.1230, 0.0431,
    0.0363, 0.0353, 0.0278, 0.0431, 0.1679,
];

#[rustfmt::skip]
pub const FIVE_ASSET_PICK: [f64; 15] = [
    1.0, -1.0, 0.0, 0.0,  0.0,
    1.0,  0.0, 0.0, 0.0, -1.0,
    0.0,  0.0, 1.0, 0.0,  0.0,
];

pub const FIVE_ASSET_RISK_FREE: f64 = 0.03;

/// The five-asset market over a one-year horizon.
pub fn five_asset_market() -> MarketModel {
    MarketModel::new(
        DVector::from_row_slice(&FIVE_ASSET_MU),
        DMatrix::from_row_slice(5, 5, &FIVE_ASSET_SIGMA),
        FIVE_ASSET_RISK_FREE,
        1.0,
    )
    .expect("reference market is valid")
}

/// Views: asset 1 vs 2, asset 1 vs 5, and asset 3 alone.
pub fn five_asset_pick() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 5, &FIVE_ASSET_PICK)
}
