//! Detection of reference nodes that report a false location.
//!
//! A detecting reference predicts the RSS it should see from the reported
//! location using its own self-estimated PLE, records actual − predicted over
//! time, and runs a two-sided Normal mean test on the last I observations.
//! Detections are announced; a suspect is confirmed once more than T distinct
//! references have announced it.

use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub type NodeId = u32;

/// What a detecting reference knows about itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceIdentity {
    pub node_id: NodeId,
    pub own_location: Point,
    /// Locally self-estimated path-loss exponent.
    pub self_gamma: f64,
    /// Shadowing deviation used by the test, in dB.
    pub shadow_sigma: f64,
}

impl ReferenceIdentity {
    pub fn new(
        node_id: NodeId,
        own_location: Point,
        self_gamma: f64,
        shadow_sigma: f64,
    ) -> Result<Self> {
        if !(self_gamma > 0.0) || !(shadow_sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need positive PLE and sigma, got {self_gamma}, {shadow_sigma}"
            )));
        }
        Ok(Self {
            node_id,
            own_location,
            self_gamma,
            shadow_sigma,
        })
    }
}

/// Link-budget constant C₃ = 10·log₁₀(P_t) + 10·log₁₀(C₁) + 10·γ̂·log₁₀(r₀), in dB(m).
pub fn link_constant_db(
    tx_power_dbm: f64,
    prop_constant_db: f64,
    self_gamma: f64,
    ref_distance: f64,
) -> f64 {
    tx_power_dbm + prop_constant_db + 10.0 * self_gamma * ref_distance.log10()
}

/// Predicted RSS from the reported location: C₃ − 10·γ̂·log₁₀(‖s_C′ − s_B‖).
pub fn reference_rss_db(
    identity: &ReferenceIdentity,
    reported_location: &Point,
    c3_db: f64,
) -> Result<f64> {
    let dist = reported_location.distance(&identity.own_location);
    if !(dist > 0.0) {
        return Err(Error::ZeroDistance);
    }
    Ok(c3_db - 10.0 * identity.self_gamma * dist.log10())
}

/// One recorded difference between actual and predicted RSS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// Slot index, increasing by one per recorded observation.
    pub slot: u64,
    pub delta_db: f64,
}

/// Observation history a reference keeps for one suspect.
#[derive(Debug, Clone, PartialEq)]
pub struct SuspectRecord {
    pub suspect_id: NodeId,
    pub reported_location: Point,
    observations: Vec<Observation>,
    pub announcements_received: u32,
}

impl SuspectRecord {
    pub fn new(suspect_id: NodeId, reported_location: Point) -> Self {
        Self {
            suspect_id,
            reported_location,
            observations: Vec::new(),
            announcements_received: 0,
        }
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Appends actual − reference and returns the stored value.
    pub fn record_observation(&mut self, actual_rss_db: f64, reference_rss_db: f64) -> f64 {
        let delta_db = actual_rss_db - reference_rss_db;
        let slot = self.observations.len() as u64;
        self.observations.push(Observation { slot, delta_db });
        delta_db
    }

    /// Mean of the most recent `window` observations.
    pub fn window_mean(&self, window: usize) -> Result<f64> {
        if window == 0 || self.observations.len() < window {
            return Err(Error::InsufficientObservations {
                needed: window.max(1),
                got: self.observations.len(),
            });
        }
        let tail = &self.observations[self.observations.len() - window..];
        Ok(tail.iter().map(|o| o.delta_db).sum::<f64>() / window as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Trust,
    Attacker,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::Trust => "trust",
            Decision::Attacker => "attacker",
        }
    }
}

/// Result of one range test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeTest {
    /// Mean ρ of the tested window.
    pub rho: f64,
    /// Critical value for ρ²: q·σ²/I.
    pub threshold: f64,
    pub decision: Decision,
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "significance level must lie in (0, 1), got {level}"
        )));
    }
    Ok(())
}

/// Two-sided standard-normal quantile z with P(|Z| ≥ z) = level.
pub fn normal_critical_value(level: f64) -> Result<f64> {
    check_level(level)?;
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(n.inverse_cdf(1.0 - level / 2.0))
}

/// Upper-`level` quantile of chi-square with one degree of freedom (z²).
pub fn chi_square1_critical_value(level: f64) -> Result<f64> {
    let z = normal_critical_value(level)?;
    Ok(z * z)
}

/// Neyman-Pearson test of H₀′: μ = 0 against H₁′: μ ≠ 0 on the last `window`
/// observations. Rejects (attacker) when ρ² ≥ q·σ²/I.
pub fn np_range_test(
    record: &SuspectRecord,
    sigma: f64,
    window: usize,
    level: f64,
) -> Result<RangeTest> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let q = chi_square1_critical_value(level)?;
    let rho = record.window_mean(window)?;
    let threshold = q * sigma * sigma / window as f64;
    let decision = if rho * rho >= threshold {
        Decision::Attacker
    } else {
        Decision::Trust
    };
    Ok(RangeTest {
        rho,
        threshold,
        decision,
    })
}

/// The same test written as the two-sided region |ρ| ≥ z·σ/√I.
pub fn np_range_test_normal(
    record: &SuspectRecord,
    sigma: f64,
    window: usize,
    level: f64,
) -> Result<Decision> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let z = normal_critical_value(level)?;
    let rho = record.window_mean(window)?;
    let bound = z * sigma / (window as f64).sqrt();
    Ok(if rho <= -bound || rho >= bound {
        Decision::Attacker
    } else {
        Decision::Trust
    })
}

/// Band of true ranges `[inner, outer]` whose mean observation falls inside the
/// acceptance region: |10·γ̂·log₁₀(r / r_reported)| < z·σ/√I.
pub fn trust_region_radius_band(
    identity: &ReferenceIdentity,
    reported_location: &Point,
    sigma: f64,
    window: usize,
    level: f64,
) -> Result<(f64, f64)> {
    if !(sigma > 0.0) || window == 0 {
        return Err(Error::InvalidArgument(
            "need sigma > 0 and window ≥ 1".into(),
        ));
    }
    let reported = reported_location.distance(&identity.own_location);
    if !(reported > 0.0) {
        return Err(Error::ZeroDistance);
    }
    let z = normal_critical_value(level)?;
    let exponent = z * sigma / ((window as f64).sqrt() * 10.0 * identity.self_gamma);
    Ok((
        reported * 10f64.powf(-exponent),
        reported * 10f64.powf(exponent),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confirmation {
    Unconfirmed { distinct_announcers: usize },
    Confirmed,
}

/// Per-suspect tally of distinct announcing references.
///
/// A suspect is confirmed once more than `threshold` distinct references have
/// announced it; repeated announcements from one reference count once, and a
/// confirmation is never withdrawn.
#[derive(Debug, Clone, Default)]
pub struct AnnouncementLedger {
    threshold: usize,
    announcers: BTreeMap<NodeId, BTreeSet<NodeId>>,
    confirmed: BTreeSet<NodeId>,
}

impl AnnouncementLedger {
    pub fn new(threshold: usize) -> Result<Self> {
        if threshold == 0 {
            return Err(Error::InvalidArgument(
                "confirmation threshold T must be ≥ 1".into(),
            ));
        }
        Ok(Self {
            threshold,
            ..Self::default()
        })
    }

    pub fn announce(&mut self, suspect: NodeId, announcer: NodeId) -> Confirmation {
        let set = self.announcers.entry(suspect).or_default();
        set.insert(announcer);
        if set.len() > self.threshold {
            self.confirmed.insert(suspect);
        }
        self.status(suspect)
    }

    pub fn status(&self, suspect: NodeId) -> Confirmation {
        if self.confirmed.contains(&suspect) {
            Confirmation::Confirmed
        } else {
            Confirmation::Unconfirmed {
                distinct_announcers: self.announcers.get(&suspect).map_or(0, |s| s.len()),
            }
        }
    }

    pub fn is_confirmed(&self, suspect: NodeId) -> bool {
        self.confirmed.contains(&suspect)
    }
}

/// Applies a batch of `(announcer, suspect)` announcements and reports the
/// status of `suspect` afterwards.
pub fn announce_and_confirm(
    announcements: &[(NodeId, NodeId)],
    suspect: NodeId,
    threshold: usize,
) -> Result<Confirmation> {
    let mut ledger = AnnouncementLedger::new(threshold)?;
    for &(announcer, s) in announcements {
        ledger.announce(s, announcer);
    }
    Ok(ledger.status(suspect))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{mean_path_loss_db, ChannelParams};
    use crate::rng;
    use rand_distr::{Distribution, Normal as NormalDist};

    fn identity(gamma: f64) -> ReferenceIdentity {
        ReferenceIdentity::new(1, Point::ORIGIN, gamma, 6.0).unwrap()
    }

    #[test]
    fn reference_rss_examples() {
        let id = identity(2.0);
        let c3 = link_constant_db(10.0, 0.0, 2.0, 1.0);
        let at1 = reference_rss_db(&id, &Point::new(1.0, 0.0, 0.0), c3).unwrap();
        assert!((at1 - 10.0).abs() < 1e-12);
        let at2 = reference_rss_db(&id, &Point::new(2.0, 0.0, 0.0), c3).unwrap();
        assert!((at1 - at2 - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!((at1 - at2 - 6.02).abs() < 0.01);
        assert_eq!(
            reference_rss_db(&id, &Point::ORIGIN, c3),
            Err(Error::ZeroDistance)
        );
    }

    #[test]
    fn reference_rss_matches_channel_model() {
        let params = ChannelParams {
            ple: 3.5,
            ..ChannelParams::default()
        };
        let id = identity(3.5);
        let c3 = link_constant_db(
            params.tx_power_dbm,
            params.prop_constant_db,
            3.5,
            params.ref_distance,
        );
        let predicted = reference_rss_db(&id, &Point::new(0.0, 100.0, 0.0), c3).unwrap();
        let model = params.tx_power_dbm - mean_path_loss_db(100.0, &params).unwrap();
        assert!((predicted - model).abs() < 1e-10);
    }

    #[test]
    fn observations_append_in_order() {
        let mut rec = SuspectRecord::new(9, Point::new(5.0, 0.0, 0.0));
        assert_eq!(rec.record_observation(-50.0, -50.0), 0.0);
        rec.record_observation(-48.0, -50.0);
        let slots: Vec<u64> = rec.observations().iter().map(|o| o.slot).collect();
        assert_eq!(slots, vec![0, 1]);
        assert_eq!(rec.window_mean(2).unwrap(), 1.0);
        assert!(rec.window_mean(3).is_err());
    }

    #[test]
    fn honest_observations_centre_on_zero() {
        let mut rng = rng::seeded(3);
        let noise = NormalDist::new(0.0, 6.0).unwrap();
        let mut rec = SuspectRecord::new(2, Point::new(50.0, 0.0, 0.0));
        for _ in 0..10_000 {
            rec.record_observation(-70.0 + noise.sample(&mut rng), -70.0);
        }
        let mean = rec.window_mean(10_000).unwrap();
        assert!(mean.abs() < 3.0 * 6.0 / 100.0);
    }

    #[test]
    fn attacker_shift_is_range_ratio() {
        // attacker at twice the reported range, γ = 2: mean −10·2·log₁₀2
        let params = ChannelParams::default();
        let id = identity(2.0);
        let c3 = link_constant_db(params.tx_power_dbm, params.prop_constant_db, 2.0, 1.0);
        let reported = Point::new(80.0, 0.0, 0.0);
        let actual = params.tx_power_dbm - mean_path_loss_db(160.0, &params).unwrap();
        let mut rec = SuspectRecord::new(3, reported);
        let d = rec.record_observation(actual, reference_rss_db(&id, &reported, c3).unwrap());
        assert!((d + 20.0 * 2f64.log10()).abs() < 1e-10);
    }

    #[test]
    fn critical_values() {
        assert!((chi_square1_critical_value(0.05).unwrap() - 3.84).abs() < 5e-3);
        assert!((normal_critical_value(0.05).unwrap() - 1.96).abs() < 5e-3);
        assert!(normal_critical_value(0.0).is_err());
        assert!(normal_critical_value(1.0).is_err());
    }

    #[test]
    fn zero_mean_window_is_trusted() {
        let mut rec = SuspectRecord::new(1, Point::new(1.0, 0.0, 0.0));
        for _ in 0..4 {
            rec.record_observation(-60.0, -60.0);
        }
        for level in [0.01, 0.05, 0.5, 0.99] {
            let t = np_range_test(&rec, 6.0, 4, level).unwrap();
            assert_eq!(t.decision, Decision::Trust);
        }
        let t = np_range_test(&rec, 6.0, 4, 0.05).unwrap();
        assert!(
            (t.threshold - chi_square1_critical_value(0.05).unwrap() * 36.0 / 4.0).abs() < 1e-12
        );
        assert!(np_range_test(&rec, 6.0, 5, 0.05).is_err());
        assert!(np_range_test(&rec, 0.0, 4, 0.05).is_err());
    }

    #[test]
    fn chi_square_and_normal_regions_agree() {
        let mut rng = rng::seeded(4);
        let noise = NormalDist::new(0.0, 1.0).unwrap();
        for t in 0..5000 {
            let mut rec = SuspectRecord::new(1, Point::new(1.0, 0.0, 0.0));
            let shift = (t % 7) as f64 * 0.5;
            for _ in 0..9 {
                rec.record_observation(shift + 4.0 * noise.sample(&mut rng), 0.0);
            }
            let a = np_range_test(&rec, 4.0, 9, 0.05).unwrap().decision;
            let b = np_range_test_normal(&rec, 4.0, 9, 0.05).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn honest_false_alarm_rate() {
        let mut rng = rng::seeded(5);
        let noise = NormalDist::new(0.0, 6.0).unwrap();
        let runs = 10_000;
        let mut alarms = 0;
        for _ in 0..runs {
            let mut rec = SuspectRecord::new(1, Point::new(1.0, 0.0, 0.0));
            for _ in 0..25 {
                rec.record_observation(noise.sample(&mut rng), 0.0);
            }
            if np_range_test(&rec, 6.0, 25, 0.05).unwrap().decision == Decision::Attacker {
                alarms += 1;
            }
        }
        let rate = alarms as f64 / runs as f64;
        assert!((rate - 0.05).abs() <= 0.01, "rate {rate}");
    }

    #[test]
    fn trust_band() {
        let id = identity(2.0);
        let reported = Point::new(100.0, 0.0, 0.0);
        let (lo, hi) = trust_region_radius_band(&id, &reported, 6.0, 25, 0.05).unwrap();
        assert!((lo - 76.3).abs() < 0.1, "{lo}");
        assert!((hi - 131.1).abs() < 0.1, "{hi}");
        assert!(lo < 100.0 && 100.0 < hi);
        let (lo2, hi2) = trust_region_radius_band(&id, &reported, 6.0, 100, 0.05).unwrap();
        assert!(lo2 > lo && hi2 < hi);
    }

    #[test]
    fn trust_band_edges_match_simulated_acceptance() {
        // noise-free observations at the band edges sit on the decision boundary
        let id = identity(2.0);
        let reported = Point::new(100.0, 0.0, 0.0);
        let (lo, hi) = trust_region_radius_band(&id, &reported, 6.0, 25, 0.05).unwrap();
        for (r, inside) in [
            (lo * 1.01, true),
            (hi * 0.99, true),
            (lo * 0.99, false),
            (hi * 1.01, false),
        ] {
            let mut rec = SuspectRecord::new(1, reported);
            let shift = -20.0 * (r / 100.0).log10();
            for _ in 0..25 {
                rec.record_observation(shift, 0.0);
            }
            let d = np_range_test(&rec, 6.0, 25, 0.05).unwrap().decision;
            assert_eq!(d == Decision::Trust, inside, "r={r}");
        }
    }

    #[test]
    fn confirmation_needs_more_than_t_distinct() {
        assert_eq!(
            announce_and_confirm(&[(1, 9), (2, 9), (3, 9)], 9, 2).unwrap(),
            Confirmation::Confirmed
        );
        assert_eq!(
            announce_and_confirm(&[(1, 9), (2, 9)], 9, 2).unwrap(),
            Confirmation::Unconfirmed {
                distinct_announcers: 2
            }
        );
        assert_eq!(
            announce_and_confirm(&[(1, 9), (1, 9), (1, 9), (2, 9)], 9, 2).unwrap(),
            Confirmation::Unconfirmed {
                distinct_announcers: 2
            }
        );
        assert!(announce_and_confirm(&[], 9, 0).is_err());
    }

    #[test]
    fn confirmation_is_monotone() {
        let mut ledger = AnnouncementLedger::new(1).unwrap();
        ledger.announce(4, 10);
        assert!(!ledger.is_confirmed(4));
        ledger.announce(4, 11);
        assert!(ledger.is_confirmed(4));
        for a in 0..20 {
            ledger.announce(4, a % 3);
            ledger.announce(5, a);
            assert!(ledger.is_confirmed(4));
        }
    }
}
