//! Test functions, data generators, scaling, training and the experiment runners.

mod data;
mod experiments;
mod functions;
mod scaler;
mod train;

pub use data::{
    classify_2d, default_function_data, delay_dataset, delay_targets, function_grid, multiples_in,
    regression_1d, spill_grid, ClassKind, Dataset, Provenance, RegressionKind, MAX_DELAY,
};
pub use experiments::*;
pub use functions::{
    camel3_plus5, matyas_plus5, spill_concentration, sumpower_plus5, SpillParams, TestFunction,
};
pub use scaler::AffineScaler;
pub use train::{mse, train, train_restarts, LrSchedule, TrainConfig};
