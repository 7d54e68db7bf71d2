//! Label massaging before training and per-group monotone score repair after it.

mod massaging;
mod quantile;

pub use massaging::{massage, swap_count, MassagingPlan};
pub use quantile::{fit_quantile_repair, GroupQuantileMap};
