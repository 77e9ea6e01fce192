//! Experiment configuration: Table-style defaults, a flat `key = value` file
//! format and programmatic overrides (the CLI applies its flags last).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::{friis_prop_constant_db, ChannelParams, DEFAULT_CARRIER_HZ, DEFAULT_RANGE_M};
use crate::error::{Error, Result};
use crate::geometry::{check_dimension, SpaceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ShadowSweep,
    DensitySweep,
    RoutingAnalytic,
    RoutingMc,
    DetectCalibration,
    SingleEstimate,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::ShadowSweep => "shadow_sweep",
            Experiment::DensitySweep => "density_sweep",
            Experiment::RoutingAnalytic => "routing_analytic",
            Experiment::RoutingMc => "routing_mc",
            Experiment::DetectCalibration => "detect_calibration",
            Experiment::SingleEstimate => "single_estimate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(
            match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
                "shadow_sweep" | "sweep_shadow" => Experiment::ShadowSweep,
                "density_sweep" | "sweep_density" => Experiment::DensitySweep,
                "routing_analytic" => Experiment::RoutingAnalytic,
                "routing_mc" => Experiment::RoutingMc,
                "detect_calibration" | "detect" => Experiment::DetectCalibration,
                "single_estimate" | "estimate" => Experiment::SingleEstimate,
                other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
            },
        )
    }
}

/// Everything an experiment run depends on besides the seed-derived streams.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dimension: usize,
    /// Noise-free transmission range the sensitivity is calibrated to.
    pub range: f64,
    /// Deployment radius as a multiple of `range`.
    pub field_factor: f64,
    pub carrier_hz: f64,
    pub tx_power_dbm: f64,
    /// Override for 10·log₁₀(C₁); `None` uses the Friis constant at `carrier_hz`.
    pub prop_constant_db: Option<f64>,
    pub ref_distance: f64,
    /// C-PLE second sensitivity offset in dB (doubling the power is +3.01 dB).
    pub cple_offset_db: f64,

    pub gammas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub densities: Vec<f64>,
    /// Density held fixed during the shadowing sweep.
    pub sweep_density: f64,
    /// Shadowing held fixed during the density sweep.
    pub sweep_sigma: f64,

    pub trials: usize,
    pub seed: u64,

    pub level: f64,
    /// Detection window I.
    pub window: usize,
    pub windows: usize,
    pub detect_gamma: f64,
    pub detect_sigma: f64,
    /// Distance between detector and the reported location of the suspect.
    pub detect_range: f64,
    /// Estimate σ from honest training residuals instead of using the true one.
    pub train_sigma: bool,
    pub training_samples: usize,

    pub alphas: Vec<f64>,
    pub k_max: usize,
    pub routing_radius: f64,
    pub routing_density: f64,
    pub routing_gammas: Vec<f64>,
    pub routing_sigmas: Vec<f64>,

    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::ShadowSweep,
            dimension: 2,
            range: DEFAULT_RANGE_M,
            field_factor: 2.0,
            carrier_hz: DEFAULT_CARRIER_HZ,
            tx_power_dbm: 0.0,
            prop_constant_db: None,
            ref_distance: 1.0,
            cple_offset_db: 10.0 * 2f64.log10(),
            gammas: vec![2.0, 3.0, 4.0, 5.0, 6.0],
            sigmas: vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
            densities: vec![0.002, 0.005, 0.01],
            sweep_density: 0.005,
            sweep_sigma: 12.0,
            trials: 500,
            seed: 1,
            level: 0.05,
            window: 25,
            windows: 10_000,
            detect_gamma: 2.0,
            detect_sigma: 6.0,
            detect_range: 100.0,
            train_sigma: false,
            training_samples: 1000,
            alphas: vec![0.5, 1.0, 1.5, 2.0],
            k_max: 20,
            routing_radius: DEFAULT_RANGE_M,
            routing_density: 0.001,
            routing_gammas: vec![1.5, 2.0, 4.0],
            routing_sigmas: vec![0.0, 8.0],
            output_path: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean '{value}' for '{key}'"))),
    }
}

impl ExperimentConfig {
    /// Sets one key. Unknown keys are a config error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = key.trim();
        match k {
            "experiment" => self.experiment = value.parse()?,
            "dimension" => self.dimension = parse_num(k, value)?,
            "range" => self.range = parse_num(k, value)?,
            "field_factor" => self.field_factor = parse_num(k, value)?,
            "carrier_hz" => self.carrier_hz = parse_num(k, value)?,
            "tx_power_dbm" => self.tx_power_dbm = parse_num(k, value)?,
            "prop_constant_db" => self.prop_constant_db = Some(parse_num(k, value)?),
            "ref_distance" => self.ref_distance = parse_num(k, value)?,
            "cple_offset_db" => self.cple_offset_db = parse_num(k, value)?,
            "gammas" => self.gammas = parse_list(k, value)?,
            "sigmas" => self.sigmas = parse_list(k, value)?,
            "densities" => self.densities = parse_list(k, value)?,
            "sweep_density" => self.sweep_density = parse_num(k, value)?,
            "sweep_sigma" => self.sweep_sigma = parse_num(k, value)?,
            "trials" => self.trials = parse_num(k, value)?,
            "seed" => self.seed = parse_num(k, value)?,
            "level" => self.level = parse_num(k, value)?,
            "window" | "I" => self.window = parse_num(k, value)?,
            "windows" => self.windows = parse_num(k, value)?,
            "detect_gamma" => self.detect_gamma = parse_num(k, value)?,
            "detect_sigma" => self.detect_sigma = parse_num(k, value)?,
            "detect_range" => self.detect_range = parse_num(k, value)?,
            "train_sigma" => self.train_sigma = parse_bool(k, value)?,
            "training_samples" => self.training_samples = parse_num(k, value)?,
            "alphas" => self.alphas = parse_list(k, value)?,
            "k_max" => self.k_max = parse_num(k, value)?,
            "routing_radius" => self.routing_radius = parse_num(k, value)?,
            "routing_density" => self.routing_density = parse_num(k, value)?,
            "routing_gammas" => self.routing_gammas = parse_list(k, value)?,
            "routing_sigmas" => self.routing_sigmas = parse_list(k, value)?,
            "output" | "output_path" => self.output_path = Some(PathBuf::from(value.trim())),
            _ => return Err(Error::Config(format!("unknown key '{k}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_str(&text)?;
        Ok(cfg)
    }

    pub fn prop_constant(&self) -> f64 {
        self.prop_constant_db
            .unwrap_or_else(|| friis_prop_constant_db(self.carrier_hz, self.ref_distance))
    }

    /// Deployment space for a sweep cell at `density`.
    pub fn space(&self, density: f64) -> Result<SpaceConfig> {
        SpaceConfig::new(self.dimension, self.range * self.field_factor, density)
    }

    /// Channel for a sweep cell, sensitivity calibrated to `range`.
    pub fn channel(&self, gamma: f64, sigma: f64) -> Result<ChannelParams> {
        let p = ChannelParams {
            ple: gamma,
            shadow_sigma: sigma,
            ref_distance: self.ref_distance,
            prop_constant_db: self.prop_constant(),
            tx_power_dbm: self.tx_power_dbm,
            ..ChannelParams::default()
        };
        p.validate()?;
        p.with_range(self.range)
    }

    /// Checks the invariants relevant to the selected experiment.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        check_dimension(self.dimension).map_err(|e| Error::Config(e.to_string()))?;
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.range > 0.0) || !(self.field_factor >= 1.0) {
            return bad("range must be positive and field_factor at least 1");
        }
        let positive = |v: &[f64]| !v.is_empty() && v.iter().all(|x| *x > 0.0 && x.is_finite());
        match self.experiment {
            Experiment::ShadowSweep => {
                if !positive(&self.gammas)
                    || self.sigmas.is_empty()
                    || self.sigmas.iter().any(|s| !(*s >= 0.0))
                {
                    return bad("shadow sweep needs non-empty gammas and sigmas");
                }
                if !(self.sweep_density > 0.0) {
                    return bad("sweep_density must be positive");
                }
            }
            Experiment::DensitySweep => {
                if !positive(&self.gammas) || !positive(&self.densities) {
                    return bad("density sweep needs non-empty gammas and densities");
                }
                if !(self.sweep_sigma >= 0.0) {
                    return bad("sweep_sigma must be non-negative");
                }
            }
            Experiment::RoutingAnalytic => {
                if !positive(&self.alphas) || self.k_max == 0 {
                    return bad("routing needs non-empty alphas and k_max ≥ 1");
                }
            }
            Experiment::RoutingMc => {
                if !positive(&self.routing_gammas)
                    || self.routing_sigmas.is_empty()
                    || self.routing_sigmas.iter().any(|s| !(*s >= 0.0))
                    || self.k_max == 0
                {
                    return bad("routing needs non-empty gammas, sigmas and k_max ≥ 1");
                }
            }
            Experiment::DetectCalibration => {
                if !(self.level > 0.0 && self.level < 1.0) {
                    return bad("level must lie in (0, 1)");
                }
                if self.window == 0 || self.windows == 0 {
                    return bad("window and windows must be at least 1");
                }
                if !(self.detect_sigma > 0.0)
                    || !(self.detect_gamma > 0.0)
                    || !(self.detect_range > 0.0)
                {
                    return bad("detect_sigma, detect_gamma and detect_range must be positive");
                }
                if self.train_sigma && self.training_samples < 2 {
                    return bad("training needs at least 2 samples");
                }
            }
            Experiment::SingleEstimate => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for e in [
            Experiment::ShadowSweep,
            Experiment::DensitySweep,
            Experiment::RoutingAnalytic,
            Experiment::RoutingMc,
            Experiment::DetectCalibration,
            Experiment::SingleEstimate,
        ] {
            let cfg = ExperimentConfig {
                experiment: e,
                ..Default::default()
            };
            cfg.validate().unwrap();
            assert_eq!(e.as_str().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn parses_flat_file() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_str("# comment\n\ntrials = 40\ngammas = 2, 4\ntrain_sigma = yes # inline\nexperiment = density-sweep\n")
            .unwrap();
        assert_eq!(cfg.trials, 40);
        assert_eq!(cfg.gammas, vec![2.0, 4.0]);
        assert!(cfg.train_sigma);
        assert_eq!(cfg.experiment, Experiment::DensitySweep);
    }

    #[test]
    fn rejects_bad_input() {
        let mut cfg = ExperimentConfig::default();
        assert!(matches!(cfg.apply_str("trials 4"), Err(Error::Config(_))));
        assert!(matches!(cfg.apply_str("nope = 1"), Err(Error::Config(_))));
        assert!(matches!(cfg.apply_str("trials = x"), Err(Error::Config(_))));
        let zero = ExperimentConfig {
            trials: 0,
            ..Default::default()
        };
        assert!(zero.validate().is_err());
        let empty = ExperimentConfig {
            sigmas: vec![],
            ..Default::default()
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn channel_is_calibrated_to_range() {
        let cfg = ExperimentConfig::default();
        let p = cfg.channel(3.0, 0.0).unwrap();
        let loss = crate::channel::mean_path_loss_db(cfg.range, &p).unwrap();
        assert!((p.tx_power_dbm - loss - p.rx_sensitivity_dbm).abs() < 1e-9);
        assert_eq!(cfg.space(0.005).unwrap().field_radius(), 400.0);
    }
}
