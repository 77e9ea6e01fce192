//! Energy analysis of kth-nearest-neighbour routing.
//!
//! With r₀ = 1 m the single-hop path loss to the kth nearest of n neighbours
//! uniform in a d-ball of radius R is 𝔏_k = r_k^γ, whose expectation has the
//! closed form R^γ·Γ(n+1)/Γ(n+γ/d+1)·Γ(k+γ/d)/Γ(k). Routing through the kth
//! neighbour is compared per hop through 𝔏̄_k = 𝔏_k / k.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{deploy_count, SpaceConfig};
use crate::rng;
use crate::special::{digamma, ln_gamma, ln_gamma_ratio};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingScenario {
    /// Local ball (radius R) and density; n = round(density·c_d·R^d).
    pub space: SpaceConfig,
    pub gamma: f64,
    /// Shadowing deviation in dB, 0 disables it.
    pub shadow_sigma: f64,
    pub k_max: usize,
}

impl RoutingScenario {
    pub fn new(space: SpaceConfig, gamma: f64, shadow_sigma: f64, k_max: usize) -> Result<Self> {
        let s = Self {
            space,
            gamma,
            shadow_sigma,
            k_max,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn neighbours(&self) -> usize {
        self.space.node_count()
    }

    pub fn alpha(&self) -> f64 {
        self.gamma / self.space.dimension() as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "PLE must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.shadow_sigma >= 0.0) {
            return Err(Error::InvalidArgument(
                "shadowing deviation must be ≥ 0".into(),
            ));
        }
        let n = self.neighbours();
        if self.k_max == 0 || self.k_max > n {
            return Err(Error::InvalidArgument(format!(
                "k_max = {} outside 1..={n}",
                self.k_max
            )));
        }
        Ok(())
    }
}

/// E(𝔏_k) evaluated in log space.
pub fn expected_path_loss(k: usize, scenario: &RoutingScenario) -> Result<f64> {
    let n = scenario.neighbours();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    let alpha = scenario.alpha();
    let nf = n as f64;
    let kf = k as f64;
    let ln = scenario.gamma * scenario.space.field_radius().ln() + ln_gamma(nf + 1.0)
        - ln_gamma(nf + alpha + 1.0)
        + ln_gamma_ratio(kf, alpha);
    Ok(ln.exp())
}

/// k-dependent part of ∂E(𝔏_k)/∂k: f(k) = Γ(k+α)·(ψ(k+α) − ψ(k)) / Γ(k).
pub fn k_efficiency(k: usize, alpha: f64) -> Result<f64> {
    if k == 0 || !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need k ≥ 1 and alpha > 0, got k = {k}, alpha = {alpha}"
        )));
    }
    let kf = k as f64;
    Ok(ln_gamma_ratio(kf, alpha).exp() * (digamma(kf + alpha) - digamma(kf)))
}

/// Mean linear-scale inflation of a loss multiplied by 10^(χ/10), χ ~ N(0, σ²).
pub fn shadowing_inflation(sigma_db: f64) -> f64 {
    let s = sigma_db * std::f64::consts::LN_10 / 10.0;
    (s * s / 2.0).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingPoint {
    pub k: usize,
    /// Monte Carlo mean of 𝔏̄_k = 𝔏_k / k.
    pub mean: f64,
    /// Standard error of `mean`.
    pub stderr: f64,
}

/// Per-trial amortised losses 𝔏̄_1..𝔏̄_kmax for one deployment.
fn routing_trial<R: Rng + ?Sized>(scenario: &RoutingScenario, rng: &mut R) -> Result<Vec<f64>> {
    let field = deploy_count(scenario.space, scenario.neighbours(), rng)?;
    let mut dist = field.distances();
    dist.sort_by(|a, b| a.total_cmp(b));
    let shadow = (scenario.shadow_sigma > 0.0)
        .then(|| Normal::new(0.0, scenario.shadow_sigma).expect("validated sigma"));
    Ok((1..=scenario.k_max)
        .map(|k| {
            let mut loss = dist[k - 1].powf(scenario.gamma);
            if let Some(n) = &shadow {
                let chi: f64 = n.sample(rng);
                loss *= 10f64.powf(chi / 10.0);
            }
            loss / k as f64
        })
        .collect())
}

/// Monte Carlo estimate of 𝔏̄_k for k = 1..k_max over `trials` deployments.
///
/// Trial `t` draws from stream `t` of `seed`; results do not depend on
/// scheduling.
pub fn simulate_kth_routing(
    scenario: &RoutingScenario,
    trials: usize,
    seed: u64,
) -> Result<Vec<RoutingPoint>> {
    scenario.validate()?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be ≥ 1".into()));
    }
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| routing_trial(scenario, &mut rng::stream(seed, t as u64)))
        .collect::<Result<_>>()?;
    let tf = trials as f64;
    Ok((0..scenario.k_max)
        .map(|idx| {
            let (sum, sum_sq) = per_trial.iter().fold((0.0, 0.0), |(s, q), row| {
                (s + row[idx], q + row[idx] * row[idx])
            });
            let mean = sum / tf;
            let var = if trials > 1 {
                ((sum_sq - tf * mean * mean) / (tf - 1.0)).max(0.0)
            } else {
                0.0
            };
            RoutingPoint {
                k: idx + 1,
                mean,
                stderr: (var / tf).sqrt(),
            }
        })
        .collect())
}
