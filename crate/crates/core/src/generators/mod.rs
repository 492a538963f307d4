//! Instance generators: Solomon-derived small instances, random small
//! instances and synthetic monthly instances with month-to-month turnover.

mod monthly;
mod small;
mod solomon;

use thiserror::Error;

use crate::model::ModelError;

pub use self::monthly::{make_month_pair, make_monthly_instance, mean_active_fraction, MonthPair, MonthlyProfile};
pub use self::small::{make_random_small_instance, make_small_instance, GeneratorParams, RANDOM_SMALL_WORKDAY};
pub use self::solomon::{parse_solomon, SolomonFile, SolomonRow};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("missing {0} section")]
    MissingSection(&'static str),
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// First ten customers of Solomon's C101.
pub const C101_HEAD: &str = include_str!("../../fixtures/C101_head.txt");
