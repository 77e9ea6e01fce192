use std::path::Path;

use crate::error::{Error, Result};
use crate::estimators::{build_weights, tls_closed_form, tls_svd, wtls, EstimateReport, Method};
use crate::regress::{build_samples, rank_values};

/// Parses one RSS value (dB) per line. Blank lines and `#` comments are
/// skipped; line numbers in errors are 1-based.
pub fn parse_rss_text(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::InputFormat {
            line: n + 1,
            message: format!("'{line}' is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::InputFormat {
                line: n + 1,
                message: format!("'{line}' is not finite"),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// Ranks `rss_db`, builds all rank pairs and estimates with `method`.
pub fn single_estimate_values(rss_db: &[f64], d: usize, method: Method) -> Result<EstimateReport> {
    if rss_db.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: rss_db.len(),
        });
    }
    let ranked = rank_values(rss_db)?;
    let samples = build_samples(&ranked, d)?;
    match method {
        Method::TlsSvd => tls_svd(&samples),
        Method::TlsClosed => tls_closed_form(&samples),
        Method::Wtls => wtls(&samples, &build_weights(&samples)?),
        Method::CPle => Err(Error::InvalidArgument(
            "C-PLE needs neighbourhood sizes under two sensitivities, not an RSS list".into(),
        )),
    }
}

pub fn single_estimate(rss_file: &Path, d: usize, method: Method) -> Result<EstimateReport> {
    let text = std::fs::read_to_string(rss_file)?;
    single_estimate_values(&parse_rss_text(&text)?, d, method)
}
