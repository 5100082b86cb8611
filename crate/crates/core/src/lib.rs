#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod baseline;
pub mod cli;
pub mod data;
pub mod error;
pub mod graph;
pub mod knn;
pub mod lp;
pub mod matrix;
pub mod objectives;
pub mod optimizer;
pub mod spectral;
pub mod synthetic;

pub use error::{Error, Result};
pub use matrix::MetricMatrix;
