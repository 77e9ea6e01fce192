//! Path-loss exponent estimators.
//!
//! * [`tls_svd`]: total least squares through the SVD of the N×2 matrix [L̂ ΔP].
//! * [`tls_closed_form`]: the same fit from three inner products.
//! * [`wtls`]: weighted TLS with rank-mismatch weights from [`build_weights`].
//! * [`c_ple`]: baseline from the change in neighbourhood size between two
//!   receiver sensitivities.
//!
//! Fitting ΔP ≈ γ·L̂ by orthogonal regression through the origin minimises
//! J(γ) = ‖ΔP − γL̂‖² / (1 + γ²). Its stationary points solve
//! c·γ² + (b − a)·γ − c = 0 with a = ΔPᵀΔP, b = L̂ᵀL̂, c = L̂ᵀΔP, i.e.
//! γ = η ± √(1 + η²) with η = (a − b)/(2c). The `+` root is the positive one
//! and is the minimiser whenever c > 0.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::regress::{PairSampleSet, RankedRssSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    TlsSvd,
    TlsClosed,
    Wtls,
    CPle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::TlsSvd => "TLS_SVD",
            Method::TlsClosed => "TLS_CLOSED",
            Method::Wtls => "WTLS",
            Method::CPle => "C_PLE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "tls_svd" | "svd" => Ok(Method::TlsSvd),
            "tls_closed" | "tls" => Ok(Method::TlsClosed),
            "wtls" => Ok(Method::Wtls),
            "c_ple" | "cple" => Ok(Method::CPle),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

/// Why an estimate should not be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// L̂ᵀΔP = 0 (or its weighted form): η is undefined.
    ZeroCrossProduct,
    /// L̂ᵀΔP < 0: the positive stationary point maximises the cost.
    PositiveRootMaximizesCost,
    /// The minimising singular vector has no ΔP component.
    VerticalSolution,
    /// [L̂ ΔP] is the zero matrix.
    RankZero,
    /// Both singular values coincide; any direction fits equally well.
    SingularValueTie,
    /// A cardinality estimate came out ≤ 0.
    NonPositiveEstimate,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Degeneracy::ZeroCrossProduct => "cross product L'dP is zero, eta undefined",
            Degeneracy::PositiveRootMaximizesCost => {
                "cross product L'dP is negative, positive root maximises the cost"
            }
            Degeneracy::VerticalSolution => "vertical solution, V22 = 0",
            Degeneracy::RankZero => "sample matrix is zero",
            Degeneracy::SingularValueTie => "singular values tie",
            Degeneracy::NonPositiveEstimate => "non-positive estimate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub method: Method,
    /// NaN when the estimate is undefined (see `degenerate`).
    pub gamma_hat: f64,
    pub sample_count: usize,
    /// η or η′ for the closed forms.
    pub eta: Option<f64>,
    pub degenerate: Option<Degeneracy>,
}

impl EstimateReport {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate.is_some()
    }
}

/// Per-pair weights aligned with a [`PairSampleSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    weights: Vec<f64>,
}

impl WeightSet {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weights must be positive and finite, found {w}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.weights.iter().map(|w| w * c).collect())
    }
}

/// Weight ω = 1 / max{(n̂/î + ĵ − 2)², (n̂/ĵ + î − 2)²} for one rank pair.
///
/// The constant 100·ln(10)²/d² of the mismatch bound is omitted; weighted
/// TLS is invariant to a common positive scale.
pub fn pair_weight(n_hat: usize, i_hat: usize, j_hat: usize) -> f64 {
    let n = n_hat as f64;
    let (i, j) = (i_hat as f64, j_hat as f64);
    let a = n / i + j - 2.0;
    let b = n / j + i - 2.0;
    1.0 / (a * a).max(b * b)
}

/// Weighted sums Σw·ΔP², Σw·L̂², Σw·L̂·ΔP over a sample set.
///
/// `ops` counts the multiplications performed, three per sample unweighted and
/// six per sample weighted: the closed forms are Θ(N) and never form an N×N
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TlsMoments {
    pub pp: f64,
    pub ll: f64,
    pub lp: f64,
    pub count: usize,
    pub ops: u64,
}

impl TlsMoments {
    pub fn unweighted(samples: &PairSampleSet) -> Self {
        let mut m = Self::default();
        for (&p, &l) in samples.delta_p.iter().zip(&samples.l_hat) {
            m.pp += p * p;
            m.ll += l * l;
            m.lp += l * p;
        }
        m.count = samples.len();
        m.ops = 3 * m.count as u64;
        m
    }

    pub fn weighted(samples: &PairSampleSet, weights: &WeightSet) -> Result<Self> {
        if weights.len() != samples.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} samples",
                weights.len(),
                samples.len()
            )));
        }
        let mut m = Self::default();
        for ((&p, &l), &w) in samples
            .delta_p
            .iter()
            .zip(&samples.l_hat)
            .zip(weights.as_slice())
        {
            let wp = w * p;
            m.pp += wp * p;
            m.ll += w * l * l;
            m.lp += wp * l;
        }
        m.count = samples.len();
        m.ops = 6 * m.count as u64;
        Ok(m)
    }

    /// Streams over all rank pairs of `ranked` without materialising them,
    /// returning `(unweighted, weighted)` moments. Summation order matches
    /// [`crate::regress::build_samples`].
    pub fn from_ranked(ranked: &RankedRssSet, d: usize) -> Result<(Self, Self)> {
        crate::geometry::check_dimension(d)?;
        let n = ranked.n_hat();
        if n < 2 {
            return Err(Error::InsufficientSamples { needed: 2, got: n });
        }
        let scale = 10.0 / d as f64;
        let log_rank: Vec<f64> = (1..=n).map(|k| (k as f64).log10()).collect();
        let p = ranked.rss_db();
        let nf = n as f64;
        let mut plain = Self::default();
        let mut wtd = Self::default();
        for i in 0..n {
            let n_over_i = nf / (i + 1) as f64;
            for j in (i + 1)..n {
                let dp = p[j] - p[i];
                let l = scale * (log_rank[i] - log_rank[j]);
                plain.pp += dp * dp;
                plain.ll += l * l;
                plain.lp += l * dp;
                // for î < ĵ the first term of the max always dominates
                let a = n_over_i + (j + 1) as f64 - 2.0;
                let w = 1.0 / (a * a);
                let wp = w * dp;
                wtd.pp += wp * dp;
                wtd.ll += w * l * l;
                wtd.lp += wp * l;
            }
        }
        let count = n * (n - 1) / 2;
        plain.count = count;
        plain.ops = 3 * count as u64;
        wtd.count = count;
        wtd.ops = 6 * count as u64;
        Ok((plain, wtd))
    }

    /// η = (ΔPᵀΔP − L̂ᵀL̂) / (2·L̂ᵀΔP); `None` when the cross product is zero.
    pub fn eta(&self) -> Option<f64> {
        if self.lp == 0.0 || !self.lp.is_finite() {
            None
        } else {
            Some((self.pp - self.ll) / (2.0 * self.lp))
        }
    }

    /// Orthogonal-regression cost at slope `gamma`.
    pub fn cost(&self, gamma: f64) -> f64 {
        (self.pp - 2.0 * gamma * self.lp + gamma * gamma * self.ll) / (1.0 + gamma * gamma)
    }

    /// Closed-form solution from these moments.
    pub fn solve(&self, method: Method) -> EstimateReport {
        match self.eta() {
            None => EstimateReport {
                method,
                gamma_hat: f64::NAN,
                sample_count: self.count,
                eta: None,
                degenerate: Some(Degeneracy::ZeroCrossProduct),
            },
            Some(eta) => {
                let (g1, _) = stationary_points(eta);
                EstimateReport {
                    method,
                    gamma_hat: g1,
                    sample_count: self.count,
                    eta: Some(eta),
                    degenerate: (self.lp < 0.0).then_some(Degeneracy::PositiveRootMaximizesCost),
                }
            }
        }
    }
}

/// The two stationary points η ± √(1+η²), each evaluated without
/// cancellation. Their product is −1.
pub fn stationary_points(eta: f64) -> (f64, f64) {
    let s = eta.hypot(1.0);
    if eta >= 0.0 {
        let g1 = eta + s;
        (g1, -1.0 / g1)
    } else {
        let g2 = eta - s;
        (-1.0 / g2, g2)
    }
}

/// J(γ) = ‖ΔP − γL̂‖² / (1 + γ²) evaluated sample by sample.
pub fn tls_cost(samples: &PairSampleSet, gamma: f64) -> f64 {
    let ss: f64 = samples
        .delta_p
        .iter()
        .zip(&samples.l_hat)
        .map(|(p, l)| (p - gamma * l).powi(2))
        .sum();
    ss / (1.0 + gamma * gamma)
}

/// Weighted cost (ΔP − γL̂)ᵀW(ΔP − γL̂) / (1 + γ²) with diagonal W.
pub fn wtls_cost(samples: &PairSampleSet, weights: &WeightSet, gamma: f64) -> f64 {
    let ss: f64 = samples
        .delta_p
        .iter()
        .zip(&samples.l_hat)
        .zip(weights.as_slice())
        .map(|((p, l), w)| w * (p - gamma * l).powi(2))
        .sum();
    ss / (1.0 + gamma * gamma)
}

/// TLS slope from the right singular vector of [L̂ ΔP] that belongs to the
/// smallest singular value: the null direction (γ, −1) gives γ = −v_L / v_ΔP.
///
/// When the minimising slope is negative the orthogonal singular vector is
/// used instead (it carries the positive stationary point) and the report is
/// flagged, mirroring the closed form.
pub fn tls_svd(samples: &PairSampleSet) -> Result<EstimateReport> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    // a single row is padded with zeros; the right singular vectors are unchanged
    let rows = n.max(2);
    let mut m = DMatrix::<f64>::zeros(rows, 2);
    for k in 0..n {
        m[(k, 0)] = samples.l_hat[k];
        m[(k, 1)] = samples.delta_p[k];
    }
    let report = |gamma_hat: f64, degenerate: Option<Degeneracy>| EstimateReport {
        method: Method::TlsSvd,
        gamma_hat,
        sample_count: n,
        eta: None,
        degenerate,
    };
    let svd = m.svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd
        .v_t
        .as_ref()
        .expect("right singular vectors were requested");
    let (big, small) = if sv[0] >= sv[1] { (0, 1) } else { (1, 0) };
    if sv[big] == 0.0 {
        return Ok(report(f64::NAN, Some(Degeneracy::RankZero)));
    }
    let slope = |row: usize| -v_t[(row, 0)] / v_t[(row, 1)];
    if sv[big] - sv[small] <= 1e-12 * sv[big] {
        let g = [slope(small), slope(big)]
            .into_iter()
            .find(|g| g.is_finite() && *g > 0.0)
            .unwrap_or(f64::NAN);
        return Ok(report(g, Some(Degeneracy::SingularValueTie)));
    }
    let g = slope(small);
    if !g.is_finite() {
        return Ok(report(f64::NAN, Some(Degeneracy::VerticalSolution)));
    }
    if g > 0.0 {
        Ok(report(g, None))
    } else if g < 0.0 {
        Ok(report(
            slope(big),
            Some(Degeneracy::PositiveRootMaximizesCost),
        ))
    } else {
        Ok(report(g, Some(Degeneracy::ZeroCrossProduct)))
    }
}

/// γ̂ = η + √(1 + η²) with η = (ΔPᵀΔP − L̂ᵀL̂) / (2·L̂ᵀΔP).
pub fn tls_closed_form(samples: &PairSampleSet) -> Result<EstimateReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    Ok(TlsMoments::unweighted(samples).solve(Method::TlsClosed))
}

/// Rank-mismatch weights for every pair of `samples`.
pub fn build_weights(samples: &PairSampleSet) -> Result<WeightSet> {
    if samples.n_hat < 2 || samples.rank_pairs.len() != samples.len() {
        return Err(Error::InvalidArgument(
            "weights need rank pairs from a ranked RSS set".into(),
        ));
    }
    let n = samples.n_hat;
    WeightSet::new(
        samples
            .rank_pairs
            .iter()
            .map(|&(i, j)| pair_weight(n, i as usize, j as usize))
            .collect(),
    )
}

/// γ̂ = η′ + √(1 + η′²) with η′ = (ΔPᵀWΔP − L̂ᵀWL̂) / (2·L̂ᵀWΔP), W diagonal.
pub fn wtls(samples: &PairSampleSet, weights: &WeightSet) -> Result<EstimateReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    Ok(TlsMoments::weighted(samples, weights)?.solve(Method::Wtls))
}

/// Cardinality baseline: γ̂ = d·ln(P_thres2/P_thres1) / ln(n̂₁/n̂₂), with the
/// sensitivity ratio taken in linear power.
pub fn c_ple(
    n1_hat: usize,
    n2_hat: usize,
    p_thres1_dbm: f64,
    p_thres2_dbm: f64,
    dimension: usize,
) -> Result<EstimateReport> {
    crate::geometry::check_dimension(dimension)?;
    if n1_hat == 0 || n2_hat == 0 {
        return Err(Error::InsufficientSamples {
            needed: 1,
            got: n1_hat.min(n2_hat),
        });
    }
    if n1_hat == n2_hat {
        return Err(Error::UndefinedEstimate(format!(
            "equal neighbourhood sizes ({n1_hat}) under both sensitivities"
        )));
    }
    if p_thres1_dbm == p_thres2_dbm || !p_thres1_dbm.is_finite() || !p_thres2_dbm.is_finite() {
        return Err(Error::InvalidArgument(
            "sensitivities must be finite and distinct".into(),
        ));
    }
    let ln_ratio = (p_thres2_dbm - p_thres1_dbm) / 10.0 * std::f64::consts::LN_10;
    let gamma_hat = dimension as f64 * ln_ratio / (n1_hat as f64 / n2_hat as f64).ln();
    Ok(EstimateReport {
        method: Method::CPle,
        gamma_hat,
        sample_count: n1_hat,
        eta: None,
        degenerate: (gamma_hat <= 0.0).then_some(Degeneracy::NonPositiveEstimate),
    })
}
