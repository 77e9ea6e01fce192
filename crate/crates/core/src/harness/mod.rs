//! Monte Carlo experiments behind the `ple-sim` CLI, and their CSV output.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]: trial `t`
//! of sweep cell `c` draws from stream `mix(c, t)` of the master seed, trials
//! may run in parallel, and results are reduced in trial order.

mod config;
mod detection;
mod estimate;
mod routing_run;
mod sweep;

use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub use config::{Experiment, ExperimentConfig};
pub use detection::{run_detect_calibration, DetectEvent, DetectRow, DetectionOutput, Scenario};
pub use estimate::{parse_rss_text, single_estimate, single_estimate_values};
pub use routing_run::{run_routing, RoutingRow};
pub use sweep::{run_density_sweep, run_shadow_sweep, sweep_trial, RmseRow, TrialOutcome};

use crate::error::{Error, Result};

/// √(mean(((γ̂ − γ)/γ)²)).
pub fn normalized_rmse(estimates: &[f64], true_gamma: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::InvalidArgument("no estimates to average".into()));
    }
    if !(true_gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "true PLE must be positive, got {true_gamma}"
        )));
    }
    let ms = estimates
        .iter()
        .map(|g| {
            let e = (g - true_gamma) / true_gamma;
            e * e
        })
        .sum::<f64>()
        / estimates.len() as f64;
    Ok(ms.sqrt())
}

/// Writes serialisable rows as CSV with a header line.
pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV to a file, or to stdout when `path` is `None`.
pub fn write_csv_to<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    match path {
        Some(p) => write_csv(std::fs::File::create(p)?, rows),
        None => write_csv(std::io::stdout().lock(), rows),
    }
}

/// Stable identifier of a sweep cell, independent of its position in the grid.
pub(crate) fn cell_id(values: &[f64]) -> u64 {
    values
        .iter()
        .fold(0x5EED_u64, |acc, v| crate::rng::mix(acc, v.to_bits()))
}
