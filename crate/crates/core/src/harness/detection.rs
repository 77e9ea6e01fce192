use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::channel::{sample_rss, ChannelParams};
use crate::detect::{
    link_constant_db, np_range_test, reference_rss_db, Decision, NodeId, ReferenceIdentity,
    SuspectRecord,
};
use crate::error::Result;
use crate::geometry::Point;
use crate::rng;

const ORIGIN: Point = Point::ORIGIN;

/// Where the suspect actually sits relative to the location it reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// True location equals the reported one.
    Honest,
    /// True range from the detector is twice the reported range.
    DoubleRange,
    /// Different location on the circle of the reported range.
    EqualRange,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::Honest,
        Scenario::DoubleRange,
        Scenario::EqualRange,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Honest => "honest",
            Scenario::DoubleRange => "attacker_double_range",
            Scenario::EqualRange => "attacker_equal_range",
        }
    }

    fn suspect_id(&self) -> NodeId {
        match self {
            Scenario::Honest => 1,
            Scenario::DoubleRange => 2,
            Scenario::EqualRange => 3,
        }
    }

    /// (reported, true) locations at reported range `r` from the detector.
    fn locations(&self, r: f64) -> (Point, Point) {
        let reported = Point::new(r, 0.0, 0.0);
        let actual = match self {
            Scenario::Honest => reported,
            Scenario::DoubleRange => Point::new(2.0 * r, 0.0, 0.0),
            Scenario::EqualRange => Point::new(0.0, r, 0.0),
        };
        (reported, actual)
    }
}

/// Summary per scenario. Under the honest scenario only the false-alarm rate
/// is defined, under the attacker scenarios only the detection rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectRow {
    pub scenario: String,
    pub level: f64,
    #[serde(rename = "I")]
    pub window: usize,
    pub sigma: f64,
    pub false_alarm_rate: Option<f64>,
    pub detection_rate: Option<f64>,
    pub windows: usize,
}

/// One range test, logged on a global slot clock.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectEvent {
    pub time: u64,
    pub detector_id: NodeId,
    pub suspect_id: NodeId,
    pub rho: f64,
    pub threshold: f64,
    pub decision: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutput {
    pub rows: Vec<DetectRow>,
    pub events: Vec<DetectEvent>,
    /// σ passed to the test (trained or configured).
    pub test_sigma: f64,
}

const DETECTOR: NodeId = 0;
const TRAINING_STREAM: u64 = u64::MAX;

/// σ estimated as the sample deviation of honest-link residuals.
fn train_sigma(cfg: &ExperimentConfig, params: &ChannelParams) -> f64 {
    let mut g = rng::stream(cfg.seed, TRAINING_STREAM);
    let noise = Normal::new(0.0, params.shadow_sigma).expect("positive sigma");
    let xs: Vec<f64> = (0..cfg.training_samples)
        .map(|_| noise.sample(&mut g))
        .collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Simulates `windows` independent I-slot windows per scenario. The detector
/// sits at the origin and knows the true PLE; each window feeds a fresh
/// record and is tested once.
pub fn run_detect_calibration(cfg: &ExperimentConfig) -> Result<DetectionOutput> {
    let params = ChannelParams {
        ple: cfg.detect_gamma,
        shadow_sigma: cfg.detect_sigma,
        ref_distance: cfg.ref_distance,
        prop_constant_db: cfg.prop_constant(),
        tx_power_dbm: cfg.tx_power_dbm,
        rx_sensitivity_dbm: f64::NEG_INFINITY,
        ..ChannelParams::default()
    };
    params.validate()?;
    let test_sigma = if cfg.train_sigma {
        train_sigma(cfg, &params)
    } else {
        cfg.detect_sigma
    };
    let identity = ReferenceIdentity::new(DETECTOR, ORIGIN, cfg.detect_gamma, test_sigma)?;
    let c3 = link_constant_db(
        params.tx_power_dbm,
        params.prop_constant_db,
        identity.self_gamma,
        params.ref_distance,
    );

    let mut rows = Vec::new();
    let mut events = Vec::new();
    let mut clock = 0u64;
    for (s, scenario) in Scenario::ALL.iter().enumerate() {
        let (reported, actual) = scenario.locations(cfg.detect_range);
        let expected = reference_rss_db(&identity, &reported, c3)?;
        let true_range = actual.distance(&ORIGIN);
        let mut rejections = 0usize;
        for w in 0..cfg.windows {
            let mut g = rng::stream(cfg.seed, rng::mix(s as u64, w as u64));
            let mut record = SuspectRecord::new(scenario.suspect_id(), reported);
            for _ in 0..cfg.window {
                let obs = sample_rss(scenario.suspect_id() as usize, true_range, &params, &mut g)?;
                record.record_observation(obs.rss_db, expected);
            }
            clock += cfg.window as u64;
            let test = np_range_test(&record, identity.shadow_sigma, cfg.window, cfg.level)?;
            if test.decision == Decision::Attacker {
                rejections += 1;
            }
            events.push(DetectEvent {
                time: clock - 1,
                detector_id: DETECTOR,
                suspect_id: scenario.suspect_id(),
                rho: test.rho,
                threshold: test.threshold,
                decision: test.decision.as_str(),
            });
        }
        let rate = rejections as f64 / cfg.windows as f64;
        let honest = *scenario == Scenario::Honest;
        rows.push(DetectRow {
            scenario: scenario.as_str().to_string(),
            level: cfg.level,
            window: cfg.window,
            sigma: cfg.detect_sigma,
            false_alarm_rate: honest.then_some(rate),
            detection_rate: (!honest).then_some(rate),
            windows: cfg.windows,
        });
    }
    Ok(DetectionOutput {
        rows,
        events,
        test_sigma,
    })
}
