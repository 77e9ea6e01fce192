//! Random node deployment in d-dimensional balls and the distance
//! distributions of the resulting binomial point process.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::special::{ln_beta, ln_gamma};

/// A point in up to three dimensions. Unused trailing coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point(pub [f64; 3]);

impl Point {
    pub const ORIGIN: Point = Point([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point([x, y, z])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }
}

/// Dimension, deployment radius and node density of a field.
///
/// Density units follow the dimension: nodes/m, nodes/m² or nodes/m³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceConfig {
    dimension: usize,
    field_radius: f64,
    density: f64,
}

impl SpaceConfig {
    pub fn new(dimension: usize, field_radius: f64, density: f64) -> Result<Self> {
        check_dimension(dimension)?;
        if !(field_radius > 0.0) || !field_radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "field radius must be positive, got {field_radius}"
            )));
        }
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "density must be positive, got {density}"
            )));
        }
        Ok(Self {
            dimension,
            field_radius,
            density,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn field_radius(&self) -> f64 {
        self.field_radius
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// Volume c_d·R^d of the deployment ball.
    pub fn volume(&self) -> f64 {
        // dimension is validated at construction
        unit_ball_coeff(self.dimension).unwrap() * self.field_radius.powi(self.dimension as i32)
    }

    /// Deterministic node count `round(density · volume)`.
    pub fn node_count(&self) -> usize {
        (self.density * self.volume()).round() as usize
    }
}

/// Nodes placed around an estimating node at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentField {
    pub origin: Point,
    pub positions: Vec<Point>,
    pub space: SpaceConfig,
}

impl DeploymentField {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Distances from the origin to each node, in position order.
    pub fn distances(&self) -> Vec<f64> {
        self.positions
            .iter()
            .map(|p| p.distance(&self.origin))
            .collect()
    }
}

pub(crate) fn check_dimension(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

/// Volume of the unit d-ball, c_d = π^(d/2) / Γ(1 + d/2).
pub fn unit_ball_coeff(d: usize) -> Result<f64> {
    check_dimension(d)?;
    let half = d as f64 / 2.0;
    Ok((half * PI.ln() - ln_gamma(1.0 + half)).exp())
}

/// The full angular window for dimension `d`.
///
/// In 1-D and 2-D the window is an apex angle (2π covers everything); in 3-D
/// it is the polar half-angle of a cone (π covers the whole sphere).
pub fn full_angle(d: usize) -> Result<f64> {
    check_dimension(d)?;
    Ok(if d == 3 { PI } else { 2.0 * PI })
}

/// Volume coefficient c_{d,φ} of a sector with angular window `phi`:
/// 1 for d = 1 (one side of the line, both sides at the full angle),
/// φ/2 for d = 2, (2π/3)(1 − cos φ) for d = 3.
pub fn sector_coeff(d: usize, phi: f64) -> Result<f64> {
    let full = full_angle(d)?;
    if !(phi > 0.0) || phi > full {
        return Err(Error::InvalidArgument(format!(
            "angular window {phi} outside (0, {full}] for d = {d}"
        )));
    }
    Ok(match d {
        1 => {
            if phi >= full {
                2.0
            } else {
                1.0
            }
        }
        2 => phi / 2.0,
        _ => 2.0 * PI / 3.0 * (1.0 - phi.cos()),
    })
}

/// Uniform point in the d-ball of radius `radius` about the origin.
///
/// Radial inverse-CDF sampling, r = R·U^(1/d), with an isotropic direction.
pub fn sample_in_ball<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Point {
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / d as f64);
    match d {
        1 => {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Point::new(sign * r, 0.0, 0.0)
        }
        2 => {
            let theta = rng.random::<f64>() * 2.0 * PI;
            Point::new(r * theta.cos(), r * theta.sin(), 0.0)
        }
        _ => loop {
            let v: [f64; 3] = [
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-12 {
                break Point::new(r * v[0] / n, r * v[1] / n, r * v[2] / n);
            }
        },
    }
}

/// Deploys `round(density · c_d · R^d)` nodes uniformly over the field ball,
/// centred on an origin node.
pub fn deploy_uniform<R: Rng + ?Sized>(space: SpaceConfig, rng: &mut R) -> Result<DeploymentField> {
    let n = space.node_count();
    if n == 0 {
        return Err(Error::EmptyField);
    }
    deploy_count(space, n, rng)
}

/// Deploys exactly `n` nodes uniformly over the field ball.
pub fn deploy_count<R: Rng + ?Sized>(
    space: SpaceConfig,
    n: usize,
    rng: &mut R,
) -> Result<DeploymentField> {
    if n == 0 {
        return Err(Error::EmptyField);
    }
    let positions = (0..n)
        .map(|_| sample_in_ball(space.dimension, space.field_radius, rng))
        .collect();
    Ok(DeploymentField {
        origin: Point::ORIGIN,
        positions,
        space,
    })
}

fn check_order_args(r: f64, k: usize, n: usize, space: &SpaceConfig) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "neighbour order k = {k} outside 1..={n}"
        )));
    }
    if !(r > 0.0) || r > space.field_radius {
        return Err(Error::InvalidArgument(format!(
            "distance {r} outside (0, {}]",
            space.field_radius
        )));
    }
    Ok(())
}

/// Density of the distance to the kth nearest of `n` nodes uniform in the
/// d-ball of radius R:
/// `d / (r·B(n−k+1, k)) · (r^d/R^d)^k · (1 − r^d/R^d)^(n−k)`.
pub fn kth_nearest_distance_pdf(r: f64, k: usize, n: usize, space: &SpaceConfig) -> Result<f64> {
    check_order_args(r, k, n, space)?;
    let d = space.dimension as f64;
    let u = (r / space.field_radius).powf(d);
    if u >= 1.0 {
        return Ok(if k == n { d / r * (n as f64) } else { 0.0 });
    }
    let ln = d.ln() - r.ln() - ln_beta((n - k + 1) as f64, k as f64)
        + k as f64 * u.ln()
        + (n - k) as f64 * (-u).ln_1p();
    Ok(ln.exp())
}

/// CDF of the kth-nearest distance: P[at least k of n nodes within r]
/// = Σ_{j=k}^{n} C(n,j) u^j (1−u)^(n−j) with u = (r/R)^d.
pub fn kth_nearest_distance_cdf(r: f64, k: usize, n: usize, space: &SpaceConfig) -> Result<f64> {
    check_order_args(r, k, n, space)?;
    let u = (r / space.field_radius).powi(space.dimension as i32);
    if u >= 1.0 {
        return Ok(1.0);
    }
    let ln_u = u.ln();
    let ln_1mu = (-u).ln_1p();
    let nf = n as f64;
    let total: f64 = (k..=n)
        .map(|j| {
            let jf = j as f64;
            let ln_binom = ln_gamma(nf + 1.0) - ln_gamma(jf + 1.0) - ln_gamma(nf - jf + 1.0);
            (ln_binom + jf * ln_u + (nf - jf) * ln_1mu).exp()
        })
        .sum();
    Ok(total.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let panels = panels + panels % 2;
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn unit_ball_coefficients() {
        assert!((unit_ball_coeff(1).unwrap() - 2.0).abs() < 1e-12);
        assert!((unit_ball_coeff(2).unwrap() - PI).abs() < 1e-12);
        assert!((unit_ball_coeff(3).unwrap() - 4.0 / 3.0 * PI).abs() < 1e-12);
        assert_eq!(unit_ball_coeff(4), Err(Error::UnsupportedDimension(4)));
        assert_eq!(unit_ball_coeff(0), Err(Error::UnsupportedDimension(0)));
    }

    #[test]
    fn sector_coefficients() {
        assert!((sector_coeff(2, PI / 2.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((sector_coeff(2, 2.0 * PI).unwrap() - PI).abs() < 1e-15);
        assert!((sector_coeff(3, PI).unwrap() - 4.0 / 3.0 * PI).abs() < 1e-15);
        assert_eq!(sector_coeff(1, 1.0).unwrap(), 1.0);
        assert!(sector_coeff(2, 0.0).is_err());
        assert!(sector_coeff(2, 7.0).is_err());
        assert!(sector_coeff(3, 3.5).is_err());
    }

    #[test]
    fn full_window_recovers_unit_ball() {
        for d in 1..=3 {
            let full = full_angle(d).unwrap();
            let s = sector_coeff(d, full).unwrap();
            assert!((s - unit_ball_coeff(d).unwrap()).abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn node_counts_follow_density() {
        let s = SpaceConfig::new(2, 200.0, 0.005).unwrap();
        assert_eq!(s.node_count(), 628);
        let s = SpaceConfig::new(1, 10.0, 0.1).unwrap();
        assert_eq!(s.node_count(), 2);
        let tiny = SpaceConfig::new(2, 1.0, 0.01).unwrap();
        assert_eq!(
            deploy_uniform(tiny, &mut rng::seeded(1)),
            Err(Error::EmptyField)
        );
    }

    #[test]
    fn invalid_space_rejected() {
        assert!(SpaceConfig::new(4, 1.0, 1.0).is_err());
        assert!(SpaceConfig::new(2, 0.0, 1.0).is_err());
        assert!(SpaceConfig::new(2, 1.0, -1.0).is_err());
    }

    #[test]
    fn deployment_is_seeded_and_bounded() {
        for d in 1..=3 {
            let s = SpaceConfig::new(d, 50.0, 0.01).unwrap();
            let a = deploy_uniform(s, &mut rng::seeded(42)).unwrap();
            let b = deploy_uniform(s, &mut rng::seeded(42)).unwrap();
            assert_eq!(a, b);
            assert!(a.distances().iter().all(|&r| r <= 50.0));
        }
    }

    #[test]
    fn radial_distribution_passes_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        // 10⁴ nodes, 20 equiprobable radial shells: P(r ≤ R·(b/20)^(1/d)) = b/20
        for d in 1..=3 {
            let space = SpaceConfig::new(d, 1.0, 1.0).unwrap();
            let field = deploy_count(space, 10_000, &mut rng::seeded(9 + d as u64)).unwrap();
            let bins = 20usize;
            let mut counts = vec![0usize; bins];
            for r in field.distances() {
                let b = ((r.powi(d as i32)) * bins as f64).floor() as usize;
                counts[b.min(bins - 1)] += 1;
            }
            let expected = 10_000.0 / bins as f64;
            let stat: f64 = counts
                .iter()
                .map(|&c| (c as f64 - expected).powi(2) / expected)
                .sum();
            let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
            assert!(p > 0.01, "d={d} chi2={stat} p={p}");
        }
    }

    #[test]
    fn kth_pdf_integrates_to_one() {
        for d in 1..=3 {
            let space = SpaceConfig::new(d, 100.0, 1.0).unwrap();
            for &n in &[10usize, 50] {
                for &k in &[1usize, 3, 10] {
                    if k > n {
                        continue;
                    }
                    // right-limit at r = 0 is nonzero when d = k = 1
                    let f = |r: f64| kth_nearest_distance_pdf(r.max(1e-12), k, n, &space).unwrap();
                    let total = simpson(f, 0.0, 100.0, 10_000);
                    assert!(
                        (total - 1.0).abs() < 1e-6,
                        "d={d} n={n} k={k} total={total}"
                    );
                }
            }
        }
    }

    #[test]
    fn cdf_matches_integrated_pdf_and_ends_at_one() {
        let space = SpaceConfig::new(2, 100.0, 1.0).unwrap();
        let (k, n) = (3, 10);
        for &r in &[20.0, 50.0, 80.0] {
            let f = |x: f64| {
                if x <= 0.0 {
                    0.0
                } else {
                    kth_nearest_distance_pdf(x, k, n, &space).unwrap()
                }
            };
            let integ = simpson(f, 0.0, r, 10_000);
            let cdf = kth_nearest_distance_cdf(r, k, n, &space).unwrap();
            assert!((integ - cdf).abs() < 1e-8);
        }
        assert_eq!(
            kth_nearest_distance_cdf(100.0, 10, 10, &space).unwrap(),
            1.0
        );
    }

    #[test]
    fn kth_pdf_rejects_bad_arguments() {
        let space = SpaceConfig::new(2, 100.0, 1.0).unwrap();
        assert!(kth_nearest_distance_pdf(10.0, 11, 10, &space).is_err());
        assert!(kth_nearest_distance_pdf(10.0, 0, 10, &space).is_err());
        assert!(kth_nearest_distance_pdf(101.0, 1, 10, &space).is_err());
        assert!(kth_nearest_distance_pdf(0.0, 1, 10, &space).is_err());
    }

    #[test]
    fn empirical_kth_distance_matches_closed_form_ks() {
        let space = SpaceConfig::new(2, 100.0, 1.0).unwrap();
        let (k, n) = (3usize, 20usize);
        let trials = 10_000;
        let mut rng = rng::seeded(77);
        let mut samples: Vec<f64> = (0..trials)
            .map(|_| {
                let f = deploy_count(space, n, &mut rng).unwrap();
                let mut ds = f.distances();
                ds.sort_by(|a, b| a.total_cmp(b));
                ds[k - 1]
            })
            .collect();
        samples.sort_by(|a, b| a.total_cmp(b));
        let mut ks = 0.0_f64;
        for (i, &r) in samples.iter().enumerate() {
            let c = kth_nearest_distance_cdf(r, k, n, &space).unwrap();
            let lo = i as f64 / trials as f64;
            let hi = (i + 1) as f64 / trials as f64;
            ks = ks.max((c - lo).abs()).max((hi - c).abs());
        }
        assert!(ks < 0.05, "KS statistic {ks}");
    }
}
