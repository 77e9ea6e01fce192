use serde::Serialize;

use super::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::geometry::SpaceConfig;
use crate::routing::{
    expected_path_loss, k_efficiency, shadowing_inflation, simulate_kth_routing, RoutingScenario,
};

/// `mode` is `analytic` (f(k) over α), `closed_form` (E(𝔏_k)/k, inflated by
/// the lognormal factor when σ > 0) or `mc` (simulated 𝔏̄_k).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutingRow {
    pub mode: &'static str,
    pub k: usize,
    pub alpha: f64,
    pub gamma: Option<f64>,
    pub sigma: Option<f64>,
    pub value: f64,
    pub stderr: Option<f64>,
}

pub fn run_routing(cfg: &ExperimentConfig) -> Result<Vec<RoutingRow>> {
    let mut rows = Vec::new();
    match cfg.experiment {
        Experiment::RoutingAnalytic => {
            for &alpha in &cfg.alphas {
                for k in 1..=cfg.k_max {
                    rows.push(RoutingRow {
                        mode: "analytic",
                        k,
                        alpha,
                        gamma: None,
                        sigma: None,
                        value: k_efficiency(k, alpha)?,
                        stderr: None,
                    });
                }
            }
        }
        Experiment::RoutingMc => {
            let space = SpaceConfig::new(cfg.dimension, cfg.routing_radius, cfg.routing_density)?;
            let d = cfg.dimension as f64;
            for &gamma in &cfg.routing_gammas {
                for &sigma in &cfg.routing_sigmas {
                    let sc = RoutingScenario::new(space, gamma, sigma, cfg.k_max)?;
                    let seed = crate::rng::mix(cfg.seed, super::cell_id(&[gamma, sigma]));
                    for p in simulate_kth_routing(&sc, cfg.trials, seed)? {
                        rows.push(RoutingRow {
                            mode: "closed_form",
                            k: p.k,
                            alpha: gamma / d,
                            gamma: Some(gamma),
                            sigma: Some(sigma),
                            value: expected_path_loss(p.k, &sc)? / p.k as f64
                                * shadowing_inflation(sigma),
                            stderr: None,
                        });
                        rows.push(RoutingRow {
                            mode: "mc",
                            k: p.k,
                            alpha: gamma / d,
                            gamma: Some(gamma),
                            sigma: Some(sigma),
                            value: p.mean,
                            stderr: Some(p.stderr),
                        });
                    }
                }
            }
        }
        other => {
            return Err(Error::Config(format!(
                "{other} is not a routing experiment"
            )));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_alpha_one_row_is_flat() {
        let cfg = ExperimentConfig {
            experiment: Experiment::RoutingAnalytic,
            ..Default::default()
        };
        let rows = run_routing(&cfg).unwrap();
        assert_eq!(rows.len(), 4 * 20);
        for r in rows.iter().filter(|r| r.alpha == 1.0) {
            assert!((r.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mc_tracks_closed_form() {
        let cfg = ExperimentConfig {
            experiment: Experiment::RoutingMc,
            routing_gammas: vec![3.0],
            routing_sigmas: vec![0.0],
            k_max: 5,
            trials: 4000,
            ..Default::default()
        };
        let rows = run_routing(&cfg).unwrap();
        for pair in rows.chunks(2) {
            let (cf, mc) = (&pair[0], &pair[1]);
            assert_eq!(cf.k, mc.k);
            assert!(
                (cf.value - mc.value).abs() < 4.0 * mc.stderr.unwrap(),
                "{cf:?} {mc:?}"
            );
        }
    }

    #[test]
    fn rejects_other_experiments() {
        assert!(run_routing(&ExperimentConfig::default()).is_err());
    }
}
