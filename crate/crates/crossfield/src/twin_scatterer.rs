//! Placement of first-bounce / last-bounce scatterer pairs consistent with
//! each scattered cluster's delay and departure/arrival directions.
//!
//! Every scattered path is split into three segments: Tx center to the
//! first-bounce scatterer (r_t, along the cluster departure direction), a
//! virtual hop between the two scatterers (r_v, direction ignored), and the
//! last-bounce scatterer to the Rx center (r_r, along the cluster arrival
//! direction). The split must reproduce the cluster delay exactly:
//! r_t + r_v + r_r = c * delay.

use crate::cluster_gen::{ClusterSet, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{direction_unit_vector, SPEED_OF_LIGHT};
use crate::vec3::Vec3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A placed scatterer pair for one scattered cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinScatterer {
    /// Index of the cluster this pair realizes (matches `Cluster::index`).
    pub cluster_index: usize,
    /// First-bounce scatterer, global frame (meters).
    pub fbs: Vec3,
    /// Last-bounce scatterer, global frame (meters).
    pub lbs: Vec3,
    /// Tx-side segment length (meters).
    pub r_t: f64,
    /// Virtual inter-scatterer segment length (meters).
    pub r_v: f64,
    /// Rx-side segment length (meters).
    pub r_r: f64,
    /// True when the pair collapsed to a single bounce on the departure ray
    /// because no feasible split honored the drawn arrival direction.
    pub fallback: bool,
}

impl TwinScatterer {
    /// Tx-side, virtual, and Rx-side delays (seconds).
    pub fn delay_split(&self) -> (f64, f64, f64) {
        (
            self.r_t / SPEED_OF_LIGHT,
            self.r_v / SPEED_OF_LIGHT,
            self.r_r / SPEED_OF_LIGHT,
        )
    }
}

/// Radius, along departure direction `d_hat` from `tx`, of the single-bounce
/// locus (points P with |tx-P| + |P-rx| equal to `total_len`). This is the
/// largest Tx-side segment any feasible split can use for that direction.
fn single_bounce_radius(tx: Vec3, rx: Vec3, d_hat: Vec3, total_len: f64) -> f64 {
    let delta = rx - tx;
    (total_len * total_len - delta.norm_sq()) / (2.0 * (total_len - d_hat.dot(delta)))
}

/// Bisection solve of f(r_r) = r_t + r_r + |fbs - (rx + r_r * u_r)| - total
/// on [0, total]. Requires f(0) < 0; f is nondecreasing with slope in
/// [0, 2], so a root always exists in the bracket.
fn solve_rx_segment(fbs: Vec3, rx: Vec3, u_r: Vec3, r_t: f64, total_len: f64) -> Option<f64> {
    let f = |r_r: f64| r_t + r_r + (fbs - (rx + u_r * r_r)).norm() - total_len;
    if f(0.0) >= 0.0 {
        return None;
    }
    let mut lo = 0.0f64;
    let mut hi = total_len;
    let tol = 1e-12 * total_len;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() <= tol {
            return Some(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Exact single-bounce placement on the departure ray: both scatterers
/// coincide where the ray meets the single-bounce locus, so the path sum
/// holds exactly and only the arrival direction is sacrificed.
fn one_bounce_fallback(
    cluster_index: usize,
    tx: Vec3,
    rx: Vec3,
    d_hat: Vec3,
    total_len: f64,
) -> TwinScatterer {
    let r_t = single_bounce_radius(tx, rx, d_hat, total_len);
    let p = tx + d_hat * r_t;
    TwinScatterer {
        cluster_index,
        fbs: p,
        lbs: p,
        r_t,
        r_v: 0.0,
        r_r: (p - rx).norm(),
        fallback: true,
    }
}

/// Place one scatterer pair per scattered cluster.
///
/// The Tx-side segment is drawn as a fraction beta ~ Uniform(0.2, 0.8) of
/// the single-bounce radius along the departure direction, which keeps the
/// remaining length always sufficient to reach the arrival ray; the Rx-side
/// segment is then solved by bisection so the three segments reproduce the
/// cluster delay to one part in 1e9. Random draws: one uniform per
/// placement attempt, clusters in ascending order.
///
/// Errors if any scattered cluster has no positive excess delay (its path
/// cannot leave the direct segment).
pub fn place_twins(
    cfg: &ScenarioConfig,
    set: &ClusterSet,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<TwinScatterer>> {
    let tx = cfg.tx_center;
    let rx = cfg.rx_center;
    let direct = cfg.los_distance();
    let mut out = Vec::new();
    for cluster in set.nlos() {
        let total_len = SPEED_OF_LIGHT * cluster.delay;
        if total_len <= direct {
            return Err(Error::domain(format!(
                "cluster {} has no excess path length (c*delay {} <= direct distance {})",
                cluster.index, total_len, direct
            )));
        }
        let d_hat = direction_unit_vector(cluster.zod, cluster.aod);
        let u_r = direction_unit_vector(cluster.zoa, cluster.aoa);
        let rho = single_bounce_radius(tx, rx, d_hat, total_len);
        let mut placed = None;
        for _ in 0..100 {
            let beta = rng.gen_range(0.2..0.8);
            let r_t = beta * rho;
            let fbs = tx + d_hat * r_t;
            if let Some(r_r) = solve_rx_segment(fbs, rx, u_r, r_t, total_len) {
                let lbs = rx + u_r * r_r;
                out.push(TwinScatterer {
                    cluster_index: cluster.index,
                    fbs,
                    lbs,
                    r_t,
                    r_v: (fbs - lbs).norm(),
                    r_r,
                    fallback: false,
                });
                placed = Some(());
                break;
            }
        }
        if placed.is_none() {
            out.push(one_bounce_fallback(cluster.index, tx, rx, d_hat, total_len));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
