//! Log-distance path loss with lognormal shadowing, optional per-node
//! transmit-power deviation and optional Nakagami-m small-scale fading.
//!
//! Channel arithmetic is carried out in dB; watts only appear for the fading
//! draws and the unit conversions at the boundary.

use std::f64::consts::PI;

use log::warn;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::error::{Error, Result};
use crate::geometry::DeploymentField;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier frequency used by the reference simulation setup.
pub const DEFAULT_CARRIER_HZ: f64 = 2.401e9;

/// Theoretical transmission range the sensitivity is calibrated to.
pub const DEFAULT_RANGE_M: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Path-loss exponent γ.
    pub ple: f64,
    /// Shadowing standard deviation σ in dB.
    pub shadow_sigma: f64,
    /// Reference distance r₀ in meters.
    pub ref_distance: f64,
    /// 10·log₁₀(C₁) in dB.
    pub prop_constant_db: f64,
    pub tx_power_dbm: f64,
    /// Receiver sensitivity; a link is heard when its RSS is strictly above it.
    pub rx_sensitivity_dbm: f64,
    /// Standard deviation in dB of the per-node transmit power deviation.
    pub tx_power_jitter_sigma: f64,
    /// Nakagami fading parameter; `None` disables small-scale fading.
    pub nakagami_m: Option<f64>,
    /// Number of slots K the instantaneous power is averaged over.
    pub slots: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        let mut p = Self {
            ple: 2.0,
            shadow_sigma: 0.0,
            ref_distance: 1.0,
            prop_constant_db: friis_prop_constant_db(DEFAULT_CARRIER_HZ, 1.0),
            tx_power_dbm: 0.0,
            rx_sensitivity_dbm: f64::NEG_INFINITY,
            tx_power_jitter_sigma: 0.0,
            nakagami_m: None,
            slots: 1,
        };
        p.rx_sensitivity_dbm = sensitivity_for_range(&p, DEFAULT_RANGE_M).unwrap();
        p
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ple > 0.0) || !self.ple.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "path-loss exponent must be positive, got {}",
                self.ple
            )));
        }
        if !(2.0..=6.0).contains(&self.ple) {
            warn!(
                "path-loss exponent {} outside the usual 2..6 band",
                self.ple
            );
        }
        if !(self.shadow_sigma >= 0.0) || !(self.tx_power_jitter_sigma >= 0.0) {
            return Err(Error::InvalidArgument(
                "standard deviations must be non-negative".into(),
            ));
        }
        if !(self.ref_distance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reference distance must be positive, got {}",
                self.ref_distance
            )));
        }
        if let Some(m) = self.nakagami_m {
            if !(m > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "Nakagami m must be positive, got {m}"
                )));
            }
        }
        if self.slots == 0 {
            return Err(Error::InvalidArgument("slots must be at least 1".into()));
        }
        Ok(())
    }

    /// Copy with the sensitivity set so the noise-free range equals `range`.
    pub fn with_range(mut self, range: f64) -> Result<Self> {
        self.rx_sensitivity_dbm = sensitivity_for_range(&self, range)?;
        Ok(self)
    }
}

/// One received signal strength.
///
/// `true_distance` is ground truth for evaluation; the estimators never read it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssObservation {
    pub node_index: usize,
    pub rss_db: f64,
    pub true_distance: f64,
}

/// 10·log₁₀(C₁) for free-space propagation with unit antenna gains:
/// C₁ = (λ / (4π r₀))².
pub fn friis_prop_constant_db(carrier_hz: f64, ref_distance: f64) -> f64 {
    let wavelength = SPEED_OF_LIGHT / carrier_hz;
    20.0 * (wavelength / (4.0 * PI * ref_distance)).log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

/// Deterministic attenuation 10γ·log₁₀(r) − 10·log₁₀(C₁) − 10γ·log₁₀(r₀).
pub fn mean_path_loss_db(r: f64, params: &ChannelParams) -> Result<f64> {
    if !(r >= params.ref_distance) {
        return Err(Error::NearField {
            distance: r,
            ref_distance: params.ref_distance,
        });
    }
    let g10 = 10.0 * params.ple;
    Ok(g10 * r.log10() - params.prop_constant_db - g10 * params.ref_distance.log10())
}

/// Sensitivity that makes the noise-free transmission range exactly `range`.
pub fn sensitivity_for_range(params: &ChannelParams, range: f64) -> Result<f64> {
    Ok(params.tx_power_dbm - mean_path_loss_db(range, params)?)
}

/// Noise-free range implied by the configured sensitivity.
pub fn deterministic_range(params: &ChannelParams) -> f64 {
    let budget = params.tx_power_dbm - params.rx_sensitivity_dbm + params.prop_constant_db;
    params.ref_distance * 10f64.powf(budget / (10.0 * params.ple))
}

/// Draws one instantaneous power from the gamma law with shape `m` and mean
/// `mean_power` (the power of a Nakagami-m envelope).
pub fn sample_instantaneous_power<R: Rng + ?Sized>(
    mean_power: f64,
    m: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(mean_power > 0.0) || !(m > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need mean power > 0 and m > 0, got {mean_power}, {m}"
        )));
    }
    let g = Gamma::new(m, mean_power / m).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(g.sample(rng))
}

/// Mean of `slots` independent instantaneous power draws.
pub fn average_over_slots<R: Rng + ?Sized>(
    mean_power: f64,
    m: f64,
    slots: usize,
    rng: &mut R,
) -> Result<f64> {
    if slots == 0 {
        return Err(Error::InvalidArgument("slots must be at least 1".into()));
    }
    if !(mean_power > 0.0) || !(m > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need mean power > 0 and m > 0, got {mean_power}, {m}"
        )));
    }
    let g = Gamma::new(m, mean_power / m).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let total: f64 = (0..slots).map(|_| g.sample(rng)).sum();
    Ok(total / slots as f64)
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("sigma validated non-negative")
}

/// Received power at distance `r` from node `node_index`.
///
/// Draw order per call: shadowing, transmit deviation (when enabled), fading
/// slots (when enabled).
pub fn sample_rss<R: Rng + ?Sized>(
    node_index: usize,
    r: f64,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<RssObservation> {
    let loss = mean_path_loss_db(r, params)?;
    let chi = if params.shadow_sigma > 0.0 {
        normal(params.shadow_sigma).sample(rng)
    } else {
        0.0
    };
    let jitter = if params.tx_power_jitter_sigma > 0.0 {
        normal(params.tx_power_jitter_sigma).sample(rng)
    } else {
        0.0
    };
    let mut rss_db = params.tx_power_dbm + jitter - loss - chi;
    if let Some(m) = params.nakagami_m {
        let averaged = average_over_slots(dbm_to_watts(rss_db), m, params.slots, rng)?;
        rss_db = watts_to_dbm(averaged);
    }
    Ok(RssObservation {
        node_index,
        rss_db,
        true_distance: r,
    })
}

/// Samples one RSS per node and keeps those strictly above the sensitivity.
///
/// Nodes closer than the reference distance are evaluated at r₀. An empty
/// result is a valid outcome (nobody was heard).
pub fn observe_neighborhood<R: Rng + ?Sized>(
    field: &DeploymentField,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<RssObservation>> {
    if field.is_empty() {
        return Err(Error::EmptyField);
    }
    params.validate()?;
    let mut heard = Vec::new();
    for (i, p) in field.positions.iter().enumerate() {
        let r = p.distance(&field.origin);
        let mut obs = sample_rss(i, r.max(params.ref_distance), params, rng)?;
        obs.true_distance = r;
        if obs.rss_db > params.rx_sensitivity_dbm {
            heard.push(obs);
        }
    }
    Ok(heard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{deploy_uniform, SpaceConfig};
    use crate::rng;

    fn unit_c1(ple: f64, sigma: f64) -> ChannelParams {
        ChannelParams {
            ple,
            shadow_sigma: sigma,
            prop_constant_db: 0.0,
            rx_sensitivity_dbm: f64::NEG_INFINITY,
            ..ChannelParams::default()
        }
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn mean_path_loss_values() {
        let p = unit_c1(2.0, 0.0);
        assert!(mean_path_loss_db(1.0, &p).unwrap().abs() < 1e-12);
        assert!((mean_path_loss_db(10.0, &p).unwrap() - 20.0).abs() < 1e-12);
        let p = unit_c1(3.5, 0.0);
        assert!((mean_path_loss_db(100.0, &p).unwrap() - 70.0).abs() < 1e-12);
        assert!(matches!(
            mean_path_loss_db(0.5, &p),
            Err(Error::NearField { .. })
        ));
    }

    #[test]
    fn friis_constant_at_default_carrier() {
        // λ = c / 2.401 GHz ≈ 0.12486 m, C₁ = (λ/4π)² ≈ −40.05 dB
        let c1 = friis_prop_constant_db(DEFAULT_CARRIER_HZ, 1.0);
        assert!((c1 + 40.05).abs() < 0.01, "{c1}");
    }

    #[test]
    fn default_sensitivity_gives_200m_range() {
        let p = ChannelParams::default();
        assert!((deterministic_range(&p) - 200.0).abs() < 1e-9);
    }

    #[test]
    fn noise_free_rss_is_deterministic_and_monotone() {
        let p = unit_c1(3.0, 0.0);
        let mut rng = rng::seeded(1);
        let mut last = f64::INFINITY;
        for r in [1.0, 2.0, 5.0, 50.0, 300.0] {
            let o = sample_rss(0, r, &p, &mut rng).unwrap();
            assert_eq!(o.rss_db, p.tx_power_dbm - mean_path_loss_db(r, &p).unwrap());
            assert!(o.rss_db < last);
            last = o.rss_db;
        }
    }

    #[test]
    fn shadowing_moments_and_symmetry() {
        let p = unit_c1(3.0, 8.0);
        let mut rng = rng::seeded(2);
        let r = 40.0;
        let base = p.tx_power_dbm - mean_path_loss_db(r, &p).unwrap();
        let n = 100_000;
        let dev: Vec<f64> = (0..n)
            .map(|_| sample_rss(0, r, &p, &mut rng).unwrap().rss_db - base)
            .collect();
        let (mean, var) = mean_var(&dev);
        assert!(mean.abs() < 3.0 * 8.0 / (n as f64).sqrt());
        assert!((var - 64.0).abs() / 64.0 < 0.05);
        let skew = dev
            .iter()
            .map(|x| ((x - mean) / var.sqrt()).powi(3))
            .sum::<f64>()
            / n as f64;
        assert!(skew.abs() < 0.05, "skew {skew}");
    }

    #[test]
    fn transmit_jitter_acts_as_extra_shadowing() {
        let mut p = unit_c1(3.0, 6.0);
        p.tx_power_jitter_sigma = 4.0;
        let mut rng = rng::seeded(3);
        let n = 100_000;
        let diffs: Vec<f64> = (0..n)
            .map(|_| {
                let a = sample_rss(0, 20.0, &p, &mut rng).unwrap().rss_db;
                let b = sample_rss(1, 60.0, &p, &mut rng).unwrap().rss_db;
                b - a
            })
            .collect();
        let (_, var) = mean_var(&diffs);
        let want = 2.0 * 36.0 + 2.0 * 16.0;
        assert!((var - want).abs() / want < 0.05, "var {var}");
    }

    #[test]
    fn instantaneous_power_moments() {
        let mut rng = rng::seeded(4);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_instantaneous_power(2.0, 2.0, &mut rng).unwrap())
            .collect();
        let (mean, var) = mean_var(&xs);
        assert!((mean - 2.0).abs() / 2.0 < 0.01);
        assert!((var - 2.0).abs() / 2.0 < 0.05, "var {var}");

        let xs: Vec<f64> = (0..10_000)
            .map(|_| sample_instantaneous_power(1.0, 1e4, &mut rng).unwrap())
            .collect();
        let (mean, var) = mean_var(&xs);
        assert!(var.sqrt() / mean < 0.02);
        assert!(sample_instantaneous_power(0.0, 1.0, &mut rng).is_err());
        assert!(sample_instantaneous_power(1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn single_slot_is_one_draw() {
        let a = average_over_slots(3.0, 1.5, 1, &mut rng::seeded(5)).unwrap();
        let b = sample_instantaneous_power(3.0, 1.5, &mut rng::seeded(5)).unwrap();
        assert_eq!(a, b);
        assert!(average_over_slots(3.0, 1.5, 0, &mut rng::seeded(5)).is_err());
    }

    #[test]
    fn long_windows_concentrate() {
        let mut rng = rng::seeded(6);
        let trials = 200;
        let inside = (0..trials)
            .filter(|_| {
                let v = average_over_slots(1.0, 1.0, 10_000, &mut rng).unwrap();
                (v - 1.0).abs() < 0.05
            })
            .count();
        assert!(inside as f64 / trials as f64 >= 0.99);
    }

    #[test]
    fn fading_perturbs_shadowed_power() {
        let mut p = unit_c1(3.0, 0.0);
        p.nakagami_m = Some(1.0);
        p.slots = 4;
        let mut rng = rng::seeded(7);
        let base = p.tx_power_dbm - mean_path_loss_db(30.0, &p).unwrap();
        let a = sample_rss(0, 30.0, &p, &mut rng).unwrap().rss_db;
        let b = sample_rss(0, 30.0, &p, &mut rng).unwrap().rss_db;
        assert!(a != base && a != b);
    }

    #[test]
    fn units_round_trip() {
        for dbm in [-120.0, -73.5, 0.0, 20.0, 33.3] {
            let back = watts_to_dbm(dbm_to_watts(dbm));
            assert!((back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0));
        }
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noise_free_neighbourhood_is_the_range_disc() {
        let space = SpaceConfig::new(2, 400.0, 0.005).unwrap();
        let field = deploy_uniform(space, &mut rng::seeded(8)).unwrap();
        let p = ChannelParams::default();
        let heard = observe_neighborhood(&field, &p, &mut rng::seeded(9)).unwrap();
        let inside: Vec<usize> = field
            .distances()
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < 200.0)
            .map(|(i, _)| i)
            .collect();
        let got: Vec<usize> = heard.iter().map(|o| o.node_index).collect();
        assert_eq!(got, inside);
    }

    #[test]
    fn shadowing_flips_boundary_nodes() {
        let space = SpaceConfig::new(2, 400.0, 0.005).unwrap();
        let p = ChannelParams {
            shadow_sigma: 12.0,
            ..ChannelParams::default()
        };
        let mut flips = 0;
        for t in 0..100 {
            let mut rng = rng::stream(10, t);
            let field = deploy_uniform(space, &mut rng).unwrap();
            let heard = observe_neighborhood(&field, &p, &mut rng).unwrap();
            let differs = heard.iter().any(|o| o.true_distance >= 200.0)
                || heard.len() != field.distances().iter().filter(|&&r| r < 200.0).count();
            if differs {
                flips += 1;
            }
        }
        assert!(flips >= 99);
    }

    #[test]
    fn no_sensitivity_hears_everyone() {
        let space = SpaceConfig::new(2, 400.0, 0.001).unwrap();
        let field = deploy_uniform(space, &mut rng::seeded(11)).unwrap();
        let p = ChannelParams {
            shadow_sigma: 8.0,
            rx_sensitivity_dbm: f64::NEG_INFINITY,
            ..ChannelParams::default()
        };
        let heard = observe_neighborhood(&field, &p, &mut rng::seeded(12)).unwrap();
        assert_eq!(heard.len(), field.len());
    }
}
