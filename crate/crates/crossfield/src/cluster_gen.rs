//! Seeded statistical generation of multipath clusters and their rays:
//! exponential cluster delays, exponential-in-delay powers with per-cluster
//! shadowing, wrapped-Gaussian departure/arrival angles around the
//! line-of-sight direction, fixed-offset ray fans, and per-ray polarization
//! phases.
//!
//! Angles are global-frame spherical angles (zenith from +z, azimuth from
//! +x toward +y). Cluster 0 is always the line-of-sight entry: it carries
//! the direct-path delay and direction, a zero power share (its amplitude
//! comes from the Ricean weighting at assembly time), and a single ray.

use crate::error::{Error, Result};
use crate::geometry::{reflect_zenith, spherical_of_direction, wrap_azimuth, SPEED_OF_LIGHT};
use crate::vec3::Vec3;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Full statistical description of one link drop.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Number of scattered (non-line-of-sight) clusters, >= 1.
    pub nlos_clusters: usize,
    /// Rays per scattered cluster, >= 1.
    pub rays_per_cluster: usize,
    /// Ricean K-factor in dB (direct-path to scattered power ratio).
    pub ricean_k_db: f64,
    /// RMS delay spread in seconds.
    pub delay_spread: f64,
    /// Delay distribution proportionality factor, > 1.
    pub delay_scaling: f64,
    /// Cluster-level azimuth spread of departure, radians.
    pub asd: f64,
    /// Cluster-level azimuth spread of arrival, radians.
    pub asa: f64,
    /// Cluster-level zenith spread of departure, radians.
    pub zsd: f64,
    /// Cluster-level zenith spread of arrival, radians.
    pub zsa: f64,
    /// Per-cluster shadowing standard deviation in dB.
    pub shadowing_db: f64,
    /// Intra-cluster delay spread in seconds (largest ray delay offset).
    pub intra_delay_spread: f64,
    /// Intra-cluster angle spreads, radians.
    pub c_asd: f64,
    pub c_asa: f64,
    pub c_zsd: f64,
    pub c_zsa: f64,
    /// Mean cross-polarization power ratio in dB.
    pub xpr_mean_db: f64,
    /// Transmit array center, global frame (meters).
    pub tx_center: Vec3,
    /// Receive array center, global frame (meters).
    pub rx_center: Vec3,
    /// Receiver velocity (m/s), global frame.
    pub rx_velocity: Vec3,
    /// Master seed for every derived random stream.
    pub seed: u64,
}

impl ScenarioConfig {
    /// Carrier wavelength (meters).
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Direct Tx-Rx distance (meters).
    pub fn los_distance(&self) -> f64 {
        self.tx_center.distance(self.rx_center)
    }

    /// Direct-path propagation delay (seconds).
    pub fn los_delay(&self) -> f64 {
        self.los_distance() / SPEED_OF_LIGHT
    }

    /// Ricean K-factor as a linear power ratio.
    pub fn ricean_k_linear(&self) -> f64 {
        10.0_f64.powf(self.ricean_k_db / 10.0)
    }

    /// Mean cross-polarization ratio as a linear power ratio.
    pub fn xpr_linear(&self) -> f64 {
        10.0_f64.powf(self.xpr_mean_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0) {
            return Err(Error::config("scenario.carrier_hz", "carrier frequency must be > 0"));
        }
        if self.nlos_clusters == 0 {
            return Err(Error::config("scenario.nlos_clusters", "at least one scattered cluster is required"));
        }
        if self.rays_per_cluster == 0 {
            return Err(Error::config("scenario.rays_per_cluster", "at least one ray per cluster is required"));
        }
        if !(self.delay_scaling > 1.0) {
            return Err(Error::config("scenario.delay_scaling", "delay scaling factor must be > 1"));
        }
        let spreads = [
            ("delay_spread", self.delay_spread),
            ("asd", self.asd),
            ("asa", self.asa),
            ("zsd", self.zsd),
            ("zsa", self.zsa),
            ("shadowing_db", self.shadowing_db),
            ("intra_delay_spread", self.intra_delay_spread),
            ("c_asd", self.c_asd),
            ("c_asa", self.c_asa),
            ("c_zsd", self.c_zsd),
            ("c_zsa", self.c_zsa),
        ];
        for (name, v) in spreads {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(
                    format!("scenario.{name}"),
                    "spreads must be finite and >= 0",
                ));
            }
        }
        if self.los_distance() <= 0.0 {
            return Err(Error::config(
                "scenario.rx_center",
                "transmit and receive centers must not coincide",
            ));
        }
        Ok(())
    }
}

/// One ray of a cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    /// Absolute propagation delay (seconds).
    pub delay: f64,
    /// Power share (cluster power / ray count; 1 for the direct ray).
    pub power: f64,
    /// Departure azimuth/zenith and arrival azimuth/zenith (radians,
    /// global frame).
    pub aod: f64,
    pub zod: f64,
    pub aoa: f64,
    pub zoa: f64,
    /// Cross-polarization power ratio (linear).
    pub xpr: f64,
    /// Random polarization phases (radians): co-vertical, vertical-to-
    /// horizontal, horizontal-to-vertical, co-horizontal.
    pub psi_tt: f64,
    pub psi_tp: f64,
    pub psi_pt: f64,
    pub psi_pp: f64,
}

/// One multipath cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Position in the set (0 = line-of-sight entry).
    pub index: usize,
    pub is_los: bool,
    /// Absolute cluster delay (seconds).
    pub delay: f64,
    /// Normalized power share (scattered clusters sum to 1; 0 for the
    /// line-of-sight entry, whose amplitude is the Ricean weight).
    pub power: f64,
    /// Cluster departure/arrival angles (radians, global frame).
    pub aod: f64,
    pub zod: f64,
    pub aoa: f64,
    pub zoa: f64,
    pub rays: Vec<Ray>,
}

/// Clusters of one drop, sorted by delay with the direct path first.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    /// Direct-path delay (seconds).
    pub los_delay: f64,
    /// Ricean K-factor (linear).
    pub k_linear: f64,
}

impl ClusterSet {
    /// Scattered (non-direct) clusters.
    pub fn nlos(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter().filter(|c| !c.is_los)
    }
}

/// Generate cluster-level parameters.
///
/// Random draw order (one stream, in sequence): N uniform variates for
/// delays; N standard normals for shadowing; per cluster in ascending delay
/// order, four standard normals (departure azimuth, departure zenith,
/// arrival azimuth, arrival zenith); one shuffle for the departure/arrival
/// coupling. Rays are not drawn here (see [`generate_rays`]).
pub fn generate_clusters(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<ClusterSet> {
    cfg.validate()?;
    let n = cfg.nlos_clusters;
    let los_delay = cfg.los_delay();
    let los_dir = (cfg.rx_center - cfg.tx_center) / cfg.los_distance();
    let (zod_los, aod_los) =
        spherical_of_direction(los_dir).ok_or_else(|| Error::internal("degenerate direct path"))?;
    let (zoa_los, aoa_los) = spherical_of_direction(-los_dir)
        .ok_or_else(|| Error::internal("degenerate direct path"))?;

    // Excess path delays: exponential with mean (scaling * spread), kept
    // strictly positive so every scattered cluster detours off the direct
    // segment.
    let mut excess: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            -cfg.delay_scaling * cfg.delay_spread * u.ln()
        })
        .collect();
    excess.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Powers: exponential decay in excess delay times lognormal shadowing,
    // normalized over the scattered clusters.
    let shot: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let mut powers: Vec<f64> = excess
        .iter()
        .zip(&shot)
        .map(|(&tau, &z)| {
            let decay = if cfg.delay_spread > 0.0 {
                (-tau * (cfg.delay_scaling - 1.0) / (cfg.delay_scaling * cfg.delay_spread)).exp()
            } else {
                1.0
            };
            decay * 10.0_f64.powf(-cfg.shadowing_db * z / 10.0)
        })
        .collect();
    let total: f64 = powers.iter().sum();
    for p in &mut powers {
        *p /= total;
    }

    // Departure/arrival angles: Gaussian around the direct direction,
    // wrapped into valid ranges.
    let mut departures = Vec::with_capacity(n);
    let mut arrivals = Vec::with_capacity(n);
    for _ in 0..n {
        let g: [f64; 4] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        departures.push((
            wrap_azimuth(aod_los + cfg.asd * g[0]),
            reflect_zenith(zod_los + cfg.zsd * g[1]),
        ));
        arrivals.push((
            wrap_azimuth(aoa_los + cfg.asa * g[2]),
            reflect_zenith(zoa_los + cfg.zsa * g[3]),
        ));
    }
    // Random coupling: permute which arrival pair goes with which
    // departure pair.
    arrivals.shuffle(rng);

    let mut clusters = Vec::with_capacity(n + 1);
    clusters.push(Cluster {
        index: 0,
        is_los: true,
        delay: los_delay,
        power: 0.0,
        aod: aod_los,
        zod: zod_los,
        aoa: aoa_los,
        zoa: zoa_los,
        rays: Vec::new(),
    });
    for i in 0..n {
        clusters.push(Cluster {
            index: i + 1,
            is_los: false,
            delay: los_delay + excess[i],
            power: powers[i],
            aod: departures[i].0,
            zod: departures[i].1,
            aoa: arrivals[i].0,
            zoa: arrivals[i].1,
            rays: Vec::new(),
        });
    }
    Ok(ClusterSet {
        clusters,
        los_delay,
        k_linear: cfg.ricean_k_linear(),
    })
}

/// Standard 20-ray angle-offset fan (unitless multipliers of the
/// intra-cluster angle spread).
const OFFSETS_20: [f64; 20] = [
    0.0447, -0.0447, 0.1413, -0.1413, 0.2492, -0.2492, 0.3715, -0.3715, 0.5129, -0.5129, 0.6797,
    -0.6797, 0.8844, -0.8844, 1.1481, -1.1481, 1.5195, -1.5195, 2.1551, -2.1551,
];

/// Symmetric per-ray angle-offset table: the standard 20-value fan when
/// `m == 20`, otherwise equally spaced quantiles of a unit-variance
/// Laplacian, interleaved as (+x, -x) pairs in increasing magnitude (with a
/// leading 0 when `m` is odd). The table always sums to exactly zero.
pub fn ray_offset_table(m: usize) -> Vec<f64> {
    if m == 20 {
        return OFFSETS_20.to_vec();
    }
    let mut out = Vec::with_capacity(m);
    if m % 2 == 1 {
        out.push(0.0);
    }
    let b = std::f64::consts::FRAC_1_SQRT_2; // unit-variance Laplacian scale
    for i in (1..=(m / 2)).rev() {
        // Upper-tail probability (2i - 1) / (2m) from the symmetric grid
        // p_k = (k + 1/2) / m; larger tails sit closer to the center, so
        // iterating tails downward emits magnitudes in increasing order.
        let tail = (2 * i - 1) as f64 / (2 * m) as f64;
        let mag = -b * (2.0 * tail).ln();
        out.push(mag);
        out.push(-mag);
    }
    out
}

/// Fill in per-ray parameters for every cluster.
///
/// Ray angles fan out from the cluster angle by a fixed symmetric offset
/// table scaled by the intra-cluster spreads; ray delays step linearly from
/// the cluster delay up to the intra-cluster delay spread; cluster power is
/// split equally across rays; each ray draws four uniform polarization
/// phases on [-pi, pi). The direct-path cluster gets a single deterministic
/// ray and consumes no randomness.
pub fn generate_rays(cfg: &ScenarioConfig, mut set: ClusterSet, rng: &mut ChaCha8Rng) -> ClusterSet {
    let m = cfg.rays_per_cluster;
    let offsets = ray_offset_table(m);
    let xpr = cfg.xpr_linear();
    for cluster in &mut set.clusters {
        if cluster.is_los {
            cluster.rays = vec![Ray {
                delay: cluster.delay,
                power: 1.0,
                aod: cluster.aod,
                zod: cluster.zod,
                aoa: cluster.aoa,
                zoa: cluster.zoa,
                xpr: f64::INFINITY,
                psi_tt: 0.0,
                psi_tp: 0.0,
                psi_pt: 0.0,
                psi_pp: 0.0,
            }];
            continue;
        }
        let mut rays = Vec::with_capacity(m);
        for (k, &off) in offsets.iter().enumerate() {
            let delay_off = if m > 1 {
                cfg.intra_delay_spread * k as f64 / (m as f64 - 1.0)
            } else {
                0.0
            };
            rays.push(Ray {
                delay: cluster.delay + delay_off,
                power: cluster.power / m as f64,
                aod: wrap_azimuth(cluster.aod + cfg.c_asd * off),
                zod: reflect_zenith(cluster.zod + cfg.c_zsd * off),
                aoa: wrap_azimuth(cluster.aoa + cfg.c_asa * off),
                zoa: reflect_zenith(cluster.zoa + cfg.c_zsa * off),
                xpr,
                psi_tt: rng.gen_range(-PI..PI),
                psi_tp: rng.gen_range(-PI..PI),
                psi_pt: rng.gen_range(-PI..PI),
                psi_pp: rng.gen_range(-PI..PI),
            });
        }
        cluster.rays = rays;
    }
    set
}

/// Convenience: clusters and rays in one call.
pub fn generate(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<ClusterSet> {
    let set = generate_clusters(cfg, rng)?;
    Ok(generate_rays(cfg, set, rng))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::stream;
    use crate::vec3::vec3;
    use approx::assert_abs_diff_eq;

    fn base_config() -> ScenarioConfig {
        ScenarioConfig {
            carrier_hz: 2.6e9,
            nlos_clusters: 15,
            rays_per_cluster: 20,
            ricean_k_db: 9.0,
            delay_spread: 100e-9,
            delay_scaling: 2.3,
            asd: 2.0_f64.to_radians(),
            asa: 15.0_f64.to_radians(),
            zsd: 1.0_f64.to_radians(),
            zsa: 7.0_f64.to_radians(),
            shadowing_db: 3.0,
            intra_delay_spread: 5e-9,
            c_asd: 1.0_f64.to_radians(),
            c_asa: 3.0_f64.to_radians(),
            c_zsd: 0.5_f64.to_radians(),
            c_zsa: 1.5_f64.to_radians(),
            xpr_mean_db: 8.0,
            tx_center: vec3(0.0, 0.0, 25.0),
            rx_center: vec3(300.0, 40.0, 1.5),
            rx_velocity: Vec3::ZERO,
            seed: 42,
        }
    }

    #[test]
    fn powers_normalize_and_delays_sort() {
        let cfg = base_config();
        for trial in 0..20u64 {
            let mut rng = stream(cfg.seed, &[trial]);
            let set = generate_clusters(&cfg, &mut rng).unwrap();
            let total: f64 = set.clusters.iter().map(|c| c.power).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
            assert_eq!(set.clusters[0].delay, set.los_delay);
            assert!(set.clusters[0].is_los);
            for w in set.clusters.windows(2) {
                assert!(w[1].delay >= w[0].delay);
            }
            for c in set.nlos() {
                assert!(c.delay > set.los_delay);
                assert!(c.power > 0.0);
            }
        }
    }

    #[test]
    fn zero_delay_spread_collapses_onto_direct_delay() {
        let mut cfg = base_config();
        cfg.delay_spread = 0.0;
        let mut rng = stream(cfg.seed, &[0]);
        let set = generate_clusters(&cfg, &mut rng).unwrap();
        for c in &set.clusters {
            assert_abs_diff_eq!(c.delay, set.los_delay, epsilon = 1e-18);
        }
    }

    #[test]
    fn empirical_rms_delay_spread_matches_configuration() {
        let cfg = base_config();
        let mut acc = 0.0;
        let draws = 10_000u64;
        for trial in 0..draws {
            let mut rng = stream(cfg.seed, &[trial]);
            let set = generate_clusters(&cfg, &mut rng).unwrap();
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for c in set.nlos() {
                let t = c.delay - set.los_delay;
                m1 += c.power * t;
                m2 += c.power * t * t;
            }
            acc += (m2 - m1 * m1).max(0.0).sqrt();
        }
        let mean_rms = acc / draws as f64;
        let ratio = mean_rms / cfg.delay_spread;
        assert!(
            (ratio - 1.0).abs() < 0.05,
            "mean rms delay spread ratio {ratio}"
        );
    }

    #[test]
    fn generated_angles_stay_in_range() {
        let mut cfg = base_config();
        cfg.asa = 120.0_f64.to_radians();
        cfg.zsa = 60.0_f64.to_radians();
        cfg.zsd = 45.0_f64.to_radians();
        for trial in 0..50u64 {
            let mut rng = stream(cfg.seed, &[trial]);
            let set = generate(&cfg, &mut rng).unwrap();
            for c in &set.clusters {
                for r in &c.rays {
                    for az in [r.aod, r.aoa] {
                        assert!(az > -PI && az <= PI);
                    }
                    for zen in [r.zod, r.zoa] {
                        assert!((0.0..=PI).contains(&zen));
                    }
                }
            }
        }
    }

    #[test]
    fn zero_intra_spreads_make_rays_equal_cluster() {
        let mut cfg = base_config();
        cfg.intra_delay_spread = 0.0;
        cfg.c_asd = 0.0;
        cfg.c_asa = 0.0;
        cfg.c_zsd = 0.0;
        cfg.c_zsa = 0.0;
        let mut rng = stream(cfg.seed, &[0]);
        let set = generate(&cfg, &mut rng).unwrap();
        for c in set.nlos() {
            assert_eq!(c.rays.len(), 20);
            for r in &c.rays {
                assert_eq!(r.delay, c.delay);
                assert_eq!(r.aod, c.aod);
                assert_eq!(r.zod, c.zod);
                assert_eq!(r.aoa, c.aoa);
                assert_eq!(r.zoa, c.zoa);
                assert_abs_diff_eq!(r.power, c.power / 20.0, epsilon = 1e-18);
            }
        }
    }

    #[test]
    fn single_ray_equals_cluster() {
        let mut cfg = base_config();
        cfg.rays_per_cluster = 1;
        let mut rng = stream(cfg.seed, &[0]);
        let set = generate(&cfg, &mut rng).unwrap();
        for c in set.nlos() {
            assert_eq!(c.rays.len(), 1);
            assert_eq!(c.rays[0].delay, c.delay);
            assert_eq!(c.rays[0].aod, c.aod);
            assert_eq!(c.rays[0].power, c.power);
        }
    }

    #[test]
    fn offset_tables_are_symmetric_and_zero_mean() {
        for m in [1usize, 2, 4, 7, 13, 20, 25] {
            let t = ray_offset_table(m);
            assert_eq!(t.len(), m);
            let sum: f64 = t.iter().sum();
            assert!(sum.abs() < 1e-12, "m={m} sum={sum}");
        }
        let t20 = ray_offset_table(20);
        assert_eq!(t20[0], 0.0447);
        assert_eq!(t20[1], -0.0447);
        assert_eq!(t20[18], 2.1551);
        // Non-standard count: increasing magnitudes, strictly positive.
        let t6 = ray_offset_table(6);
        assert!(t6[0] > 0.0 && t6[2] > t6[0] && t6[4] > t6[2]);
    }

    #[test]
    fn ray_delay_offsets_bounded_by_intra_spread() {
        let cfg = base_config();
        let mut rng = stream(cfg.seed, &[3]);
        let set = generate(&cfg, &mut rng).unwrap();
        for c in set.nlos() {
            let max_off = c
                .rays
                .iter()
                .map(|r| r.delay - c.delay)
                .fold(0.0f64, f64::max);
            assert_abs_diff_eq!(max_off, cfg.intra_delay_spread, epsilon = 1e-18);
            assert!(c.rays.iter().all(|r| r.delay >= c.delay));
        }
    }

    #[test]
    fn identical_seed_reproduces_bitwise() {
        let cfg = base_config();
        let mut a = stream(cfg.seed, &[9, 4]);
        let mut b = stream(cfg.seed, &[9, 4]);
        let sa = generate(&cfg, &mut a).unwrap();
        let sb = generate(&cfg, &mut b).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = base_config();
        cfg.delay_scaling = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = base_config();
        cfg.nlos_clusters = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = base_config();
        cfg.rx_center = cfg.tx_center;
        assert!(cfg.validate().is_err());
        let mut cfg = base_config();
        cfg.asd = -0.1;
        assert!(cfg.validate().is_err());
    }
}
