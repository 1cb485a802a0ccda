//! Evaluation harness: RMSE tables, mode counting, rendering, and the glue
//! used by the `maip` binary.

pub mod config;
pub mod error;
pub mod lab;
pub mod metrics;
pub mod modes;
pub mod render;

pub use config::RunConfig;
pub use error::{EvalError, Result};
pub use lab::{split_episodes, Lab};
pub use metrics::{rmse_rows, Metric, MetricRow, MetricTable};
pub use modes::{cluster_headings, cluster_modes, Modes};
pub use render::{dead_reckon, render_svg, render_to_file};
