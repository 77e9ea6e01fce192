//! Ranked RSS and the pairwise regression samples.
//!
//! For every rank pair î < ĵ the model pairs a measured power difference
//! ΔP_{î,ĵ} = P_{r,ĵ} − P_{r,î} (dB) with the rank-based estimate of the
//! log-distance ratio L̂_{î,ĵ} = (10/d)·log₁₀(î/ĵ). Both are non-positive in
//! expectation and are related by ΔP ≈ γ·L̂.

use rand::seq::index;
use rand::Rng;

use crate::channel::RssObservation;
use crate::error::{Error, Result};
use crate::geometry::{check_dimension, full_angle, DeploymentField, Point};

/// RSS values sorted strongest first with their 1-based ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRssSet {
    rss_db: Vec<f64>,
    source_indices: Vec<usize>,
}

impl RankedRssSet {
    /// Powers in rank order; entry `k` has rank `k + 1`.
    pub fn rss_db(&self) -> &[f64] {
        &self.rss_db
    }

    /// Node index of each ranked entry.
    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    pub fn n_hat(&self) -> usize {
        self.rss_db.len()
    }

    pub fn ranks(&self) -> impl Iterator<Item = usize> {
        1..=self.rss_db.len()
    }

    /// Power received at rank `rank` (1-based).
    pub fn power(&self, rank: usize) -> Result<f64> {
        if rank == 0 || rank > self.n_hat() {
            return Err(Error::InvalidArgument(format!(
                "rank {rank} outside 1..={}",
                self.n_hat()
            )));
        }
        Ok(self.rss_db[rank - 1])
    }
}

/// Aligned ΔP and L̂ vectors over all rank pairs î < ĵ, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSampleSet {
    pub delta_p: Vec<f64>,
    pub l_hat: Vec<f64>,
    pub rank_pairs: Vec<(u32, u32)>,
    pub n_hat: usize,
    pub dimension: usize,
}

impl PairSampleSet {
    pub fn len(&self) -> usize {
        self.delta_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_p.is_empty()
    }

    /// Builds a sample set from raw vectors, e.g. for synthetic regression
    /// problems. Rank pairs are left empty.
    pub fn from_vectors(delta_p: Vec<f64>, l_hat: Vec<f64>, dimension: usize) -> Result<Self> {
        if delta_p.len() != l_hat.len() {
            return Err(Error::InvalidArgument(format!(
                "length mismatch: {} power differences vs {} log-ratios",
                delta_p.len(),
                l_hat.len()
            )));
        }
        check_dimension(dimension)?;
        Ok(Self {
            delta_p,
            l_hat,
            rank_pairs: Vec::new(),
            n_hat: 0,
            dimension,
        })
    }
}

/// Stable descending sort by RSS. Ties keep input order.
pub fn rank_rss(observations: &[RssObservation]) -> Result<RankedRssSet> {
    if observations.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: observations.len(),
        });
    }
    if let Some(bad) = observations.iter().find(|o| !o.rss_db.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite RSS {} from node {}",
            bad.rss_db, bad.node_index
        )));
    }
    let mut order: Vec<&RssObservation> = observations.iter().collect();
    order.sort_by(|a, b| b.rss_db.total_cmp(&a.rss_db));
    Ok(RankedRssSet {
        rss_db: order.iter().map(|o| o.rss_db).collect(),
        source_indices: order.iter().map(|o| o.node_index).collect(),
    })
}

/// Ranks bare RSS values (dB); node indices are the input positions.
pub fn rank_values(rss_db: &[f64]) -> Result<RankedRssSet> {
    let obs: Vec<RssObservation> = rss_db
        .iter()
        .enumerate()
        .map(|(i, &v)| RssObservation {
            node_index: i,
            rss_db: v,
            true_distance: f64::NAN,
        })
        .collect();
    rank_rss(&obs)
}

/// ΔP_{î,ĵ} = P_{r,ĵ} − P_{r,î} in dB. Transmit power and path constants cancel.
pub fn pair_delta_p(ranked: &RankedRssSet, i_hat: usize, j_hat: usize) -> Result<f64> {
    if i_hat == j_hat {
        return Err(Error::InvalidArgument(format!(
            "pair needs distinct ranks, got ({i_hat}, {j_hat})"
        )));
    }
    Ok(ranked.power(j_hat)? - ranked.power(i_hat)?)
}

/// L̂_{î,ĵ} = (10/d)·log₁₀(î/ĵ).
pub fn l_hat(i_hat: usize, j_hat: usize, d: usize) -> Result<f64> {
    check_dimension(d)?;
    if i_hat == 0 || j_hat == 0 {
        return Err(Error::InvalidArgument("ranks start at 1".into()));
    }
    Ok(10.0 / d as f64 * (i_hat as f64 / j_hat as f64).log10())
}

/// All C(n̂, 2) pairs î < ĵ in lexicographic order.
pub fn build_samples(ranked: &RankedRssSet, d: usize) -> Result<PairSampleSet> {
    check_dimension(d)?;
    let n = ranked.n_hat();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let scale = 10.0 / d as f64;
    let log_rank: Vec<f64> = (1..=n).map(|k| (k as f64).log10()).collect();
    let total = n * (n - 1) / 2;
    let mut delta_p = Vec::with_capacity(total);
    let mut l = Vec::with_capacity(total);
    let mut rank_pairs = Vec::with_capacity(total);
    let p = ranked.rss_db();
    for i in 0..n {
        for j in (i + 1)..n {
            delta_p.push(p[j] - p[i]);
            l.push(scale * (log_rank[i] - log_rank[j]));
            rank_pairs.push(((i + 1) as u32, (j + 1) as u32));
        }
    }
    Ok(PairSampleSet {
        delta_p,
        l_hat: l,
        rank_pairs,
        n_hat: n,
        dimension: d,
    })
}

/// Like [`build_samples`] but keeps a uniform random subset of at most `cap`
/// pairs (lexicographic order preserved). With `cap ≥ C(n̂,2)` every pair is kept.
pub fn build_samples_capped<R: Rng + ?Sized>(
    ranked: &RankedRssSet,
    d: usize,
    cap: usize,
    rng: &mut R,
) -> Result<PairSampleSet> {
    let full = build_samples(ranked, d)?;
    if cap >= full.len() {
        return Ok(full);
    }
    if cap == 0 {
        return Err(Error::InvalidArgument("pair cap must be positive".into()));
    }
    let mut keep = index::sample(rng, full.len(), cap).into_vec();
    keep.sort_unstable();
    Ok(PairSampleSet {
        delta_p: keep.iter().map(|&k| full.delta_p[k]).collect(),
        l_hat: keep.iter().map(|&k| full.l_hat[k]).collect(),
        rank_pairs: keep.iter().map(|&k| full.rank_pairs[k]).collect(),
        n_hat: full.n_hat,
        dimension: d,
    })
}

/// Keeps the observations whose node lies in the angular window `phi` around
/// `bearing`, seen from the field origin.
///
/// In 2-D `phi` is the apex angle (half-angle φ/2); in 3-D it is the polar
/// half-angle of the cone, matching the sector volume c_{3,φ}. Points on the
/// boundary count as inside. Ranking and L̂ are unchanged downstream because
/// the sector constants cancel in the pair differences.
pub fn filter_angular(
    observations: &[RssObservation],
    field: &DeploymentField,
    phi: f64,
    bearing: Point,
) -> Result<Vec<RssObservation>> {
    let d = field.space.dimension();
    if d == 1 {
        return Err(Error::UnsupportedDimension(1));
    }
    let full = full_angle(d)?;
    if !(phi > 0.0) || phi > full {
        return Err(Error::InvalidArgument(format!(
            "angular window {phi} outside (0, {full}]"
        )));
    }
    let bn = bearing.norm();
    if !(bn > 0.0) {
        return Err(Error::InvalidArgument("bearing must be non-zero".into()));
    }
    if phi >= full {
        return Ok(observations.to_vec());
    }
    let half = if d == 2 { phi / 2.0 } else { phi };
    let cos_half = half.cos();
    let mut kept = Vec::new();
    for o in observations {
        let p = field
            .positions
            .get(o.node_index)
            .ok_or_else(|| Error::InvalidArgument(format!("node {} not in field", o.node_index)))?;
        let v = p.sub(&field.origin);
        let vn = v.norm();
        if vn == 0.0 {
            kept.push(*o);
            continue;
        }
        let cos_angle = v.dot(&bearing) / (vn * bn);
        if cos_angle >= cos_half - 1e-12 {
            kept.push(*o);
        }
    }
    Ok(kept)
}
