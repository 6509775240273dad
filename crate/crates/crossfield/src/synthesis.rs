//! Element-level synthesis of channel coefficients.
//!
//! Each scatterer pair (and the direct path) is expanded from array-center
//! parameters to per-element parameters through a tiered scheme: path
//! lengths switch between first-order, second-order, and exact range
//! evaluation, and angles switch between a center copy and exact per-element
//! geometry, each tier chosen from the per-parameter field-region report.
//! Coefficients combine element patterns, polarization coupling, ray power,
//! motion-induced phase rotation, and the carrier phase of the full
//! element-to-element delay.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::cluster_gen::{ClusterSet, Ray, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{
    direction_unit_vector, reflect_zenith, spherical_of_direction, wrap_azimuth, ArrayGeometry,
    ScattererSpherical, SPEED_OF_LIGHT,
};
use crate::nf_boundary::{classify_with, AntennaSpec, DelayBoundaryMode, FieldRegion, NfFfReport};
use crate::range_approx::{distance, RangeMethod};
use crate::twin_scatterer::TwinScatterer;
use crate::vec3::Vec3;

/// How per-element parameters are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthesisMode {
    /// Per-parameter tiers follow the field-region report (default).
    #[default]
    Cascade,
    /// Every parameter uses its far-field form: first-order path lengths and
    /// center-copied angles.
    ForceFf,
    /// Every parameter is evaluated exactly per element.
    ForceExact,
}

/// Tier used for one parameter of one array/point pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamMethod {
    /// Copied from the array center.
    CenterCopy,
    /// First-order range expansion.
    Taylor1,
    /// Second-order range expansion.
    Taylor2,
    /// Exact per-element evaluation.
    Exact,
}

impl ParamMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ParamMethod::CenterCopy => "CC",
            ParamMethod::Taylor1 => "T1",
            ParamMethod::Taylor2 => "T2",
            ParamMethod::Exact => "EX",
        }
    }
}

impl fmt::Display for ParamMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-element distances and local angles for one array facing one point.
#[derive(Debug, Clone)]
pub struct SideParams {
    /// Range from each element to the point (meters).
    pub distances: Vec<f64>,
    /// Local zenith of the point seen from each element (radians).
    pub zeniths: Vec<f64>,
    /// Local azimuth of the point seen from each element (radians).
    pub azimuths: Vec<f64>,
    pub distance_method: ParamMethod,
    pub zenith_method: ParamMethod,
    pub azimuth_method: ParamMethod,
    /// Center-referenced coordinates of the point.
    pub center: ScattererSpherical,
    /// The classification that selected the tiers.
    pub report: NfFfReport,
}

/// Per-element ranges to one point. The tier follows the path-length flags:
/// far by the first-order test selects the first-order expansion; otherwise
/// far by the second-order test selects the second-order expansion;
/// otherwise every range is evaluated exactly.
pub fn per_element_delays(
    geom: &ArrayGeometry,
    sc: &ScattererSpherical,
    report: &NfFfReport,
    mode: SynthesisMode,
) -> Result<(Vec<f64>, ParamMethod)> {
    let method = match mode {
        SynthesisMode::ForceFf => ParamMethod::Taylor1,
        SynthesisMode::ForceExact => ParamMethod::Exact,
        SynthesisMode::Cascade => {
            if report.delay_t1 == FieldRegion::Far {
                ParamMethod::Taylor1
            } else if report.delay_t2 == FieldRegion::Far {
                ParamMethod::Taylor2
            } else {
                ParamMethod::Exact
            }
        }
    };
    let range_method = match method {
        ParamMethod::Taylor1 => RangeMethod::Taylor1,
        ParamMethod::Taylor2 => RangeMethod::Taylor2,
        _ => RangeMethod::Exact,
    };
    let n = geom.element_count();
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        out.push(distance(geom, s, sc, range_method)?);
    }
    Ok((out, method))
}

/// Per-element local angles to one point. A far-field zenith or azimuth is
/// copied from the array center; a near-field one is recomputed exactly per
/// element from the local geometry. The two angles are tiered independently.
pub fn per_element_angles(
    geom: &ArrayGeometry,
    sc: &ScattererSpherical,
    report: &NfFfReport,
    mode: SynthesisMode,
) -> Result<(Vec<f64>, Vec<f64>, ParamMethod, ParamMethod)> {
    let (zen_method, az_method) = match mode {
        SynthesisMode::ForceFf => (ParamMethod::CenterCopy, ParamMethod::CenterCopy),
        SynthesisMode::ForceExact => (ParamMethod::Exact, ParamMethod::Exact),
        SynthesisMode::Cascade => (
            if report.zenith == FieldRegion::Far {
                ParamMethod::CenterCopy
            } else {
                ParamMethod::Exact
            },
            if report.azimuth == FieldRegion::Far {
                ParamMethod::CenterCopy
            } else {
                ParamMethod::Exact
            },
        ),
    };
    let n = geom.element_count();
    let mut zeniths = vec![sc.zenith; n];
    let mut azimuths = vec![sc.azimuth; n];
    if zen_method == ParamMethod::Exact || az_method == ParamMethod::Exact {
        let target = sc.position_local();
        for (e, p) in geom.element_positions_local().iter().enumerate() {
            let v = target - *p;
            let planar = v.x.hypot(v.y);
            if planar == 0.0 && v.z == 0.0 {
                return Err(Error::domain(format!(
                    "element {e} coincides with the scatterer point"
                )));
            }
            if zen_method == ParamMethod::Exact {
                zeniths[e] = planar.atan2(v.z);
            }
            if az_method == ParamMethod::Exact {
                azimuths[e] = v.y.atan2(v.x);
            }
        }
    }
    Ok((zeniths, azimuths, zen_method, az_method))
}

/// Classify one point against one array and expand every parameter tier.
pub fn side_params(
    geom: &ArrayGeometry,
    sc: &ScattererSpherical,
    classify_antenna: &AntennaSpec,
    wavelength: f64,
    boundary_mode: DelayBoundaryMode,
    mode: SynthesisMode,
) -> Result<SideParams> {
    let report = classify_with(geom, sc, classify_antenna, wavelength, boundary_mode)?;
    let (distances, distance_method) = per_element_delays(geom, sc, &report, mode)?;
    let (zeniths, azimuths, zenith_method, azimuth_method) =
        per_element_angles(geom, sc, &report, mode)?;
    Ok(SideParams {
        distances,
        zeniths,
        azimuths,
        distance_method,
        zenith_method,
        azimuth_method,
        center: *sc,
        report,
    })
}

/// Field components (co-vertical, co-horizontal) radiated by an element
/// toward a local direction. The pattern boresight is the local +z axis;
/// the vertical cut is measured in the local y-z plane and the horizontal
/// cut in the local x-z plane. Elements are vertically polarized, so the
/// horizontal component is zero.
pub fn element_field(antenna: &AntennaSpec, zenith: f64, azimuth: f64) -> (f64, f64) {
    let u = direction_unit_vector(zenith, azimuth);
    (antenna.field_amplitude(u.y.atan2(u.z), u.x.atan2(u.z)), 0.0)
}

/// Polarization coupling matrix of one scattered ray. Rows index the receive
/// (vertical, horizontal) field components and columns the transmit
/// components; cross terms are attenuated by the inverse square root of the
/// ray's cross-polarization power ratio, so an infinite ratio decouples the
/// polarizations entirely.
pub fn ray_polarization(ray: &Ray) -> [[Complex64; 2]; 2] {
    let cross = if ray.xpr.is_finite() {
        (1.0 / ray.xpr).sqrt()
    } else {
        0.0
    };
    [
        [
            Complex64::from_polar(1.0, ray.psi_tt),
            Complex64::from_polar(cross, ray.psi_tp),
        ],
        [
            Complex64::from_polar(cross, ray.psi_pt),
            Complex64::from_polar(1.0, ray.psi_pp),
        ],
    ]
}

/// Polarization matrix of the direct path: co-polarized components pass
/// unchanged with the horizontal one sign-flipped, and there is no cross
/// coupling.
pub fn los_polarization() -> [[Complex64; 2]; 2] {
    [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
    ]
}

/// Receive-field row vector times coupling matrix times transmit-field
/// column vector.
fn field_product(frx: (f64, f64), m: &[[Complex64; 2]; 2], ftx: (f64, f64)) -> Complex64 {
    (m[0][0] * ftx.0 + m[0][1] * ftx.1) * frx.0 + (m[1][0] * ftx.0 + m[1][1] * ftx.1) * frx.1
}

/// Optional direct-path gain boost for face-to-face arrays.
#[derive(Debug, Clone)]
pub struct XfGainConfig {
    pub enabled: bool,
    /// Exponent base (> 0; > 1 makes the boost fade with distance).
    pub c1: f64,
    /// Axial-distance decay rate (1/m).
    pub c2: f64,
    /// Lateral offset scales (meters).
    pub c3: f64,
    pub c4: f64,
    /// Reference distance subtracted from the axial separation (meters).
    pub d_ref: f64,
}

impl Default for XfGainConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            c1: 10.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            d_ref: 0.0,
        }
    }
}

/// Power factor applied to the direct path between face-to-face arrays:
/// `1 + c1^(((dx/c3)^2 + (dy/c4)^2)/wavelength - c2*(d0 - d_ref))` when
/// enabled, exactly 1 when disabled. `dx`/`dy` are the lateral offsets of
/// the facing array in this array's plane and `d0` the axial separation.
pub fn xf_gain_factor(cfg: &XfGainConfig, dx: f64, dy: f64, wavelength: f64, d0: f64) -> f64 {
    if !cfg.enabled {
        return 1.0;
    }
    let exponent =
        ((dx / cfg.c3).powi(2) + (dy / cfg.c4).powi(2)) / wavelength - cfg.c2 * (d0 - cfg.d_ref);
    1.0 + cfg.c1.powf(exponent)
}

/// Phase rotation from receiver motion: `exp(j*2*pi*t*(v . r)/wavelength)`
/// where `r` is the unit vector pointing from the receiver toward the
/// incoming wave.
pub fn doppler_phase(velocity: Vec3, arrival_unit: Vec3, wavelength: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * t * velocity.dot(arrival_unit) / wavelength)
}

/// Parameter tiers behind one coefficient: transmit side then receive side,
/// each as range:zenith:azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodFlags {
    pub tx_range: ParamMethod,
    pub tx_zenith: ParamMethod,
    pub tx_azimuth: ParamMethod,
    pub rx_range: ParamMethod,
    pub rx_zenith: ParamMethod,
    pub rx_azimuth: ParamMethod,
}

impl fmt::Display for MethodFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}|{}:{}:{}",
            self.tx_range,
            self.tx_zenith,
            self.tx_azimuth,
            self.rx_range,
            self.rx_zenith,
            self.rx_azimuth
        )
    }
}

/// One element-to-element path term.
#[derive(Debug, Clone)]
pub struct PathCoefficient {
    /// Receive element index.
    pub u: usize,
    /// Transmit element index.
    pub s: usize,
    /// Cluster position in the set (0 = direct path).
    pub cluster: usize,
    /// Ray position within the cluster.
    pub ray: usize,
    pub is_los: bool,
    /// Element-to-element delay (seconds).
    pub delay: f64,
    /// Complex amplitude.
    pub gain: Complex64,
    /// Global-frame departure and arrival angles for this element pair
    /// (radians).
    pub aod: f64,
    pub zod: f64,
    pub aoa: f64,
    pub zoa: f64,
    pub methods: MethodFlags,
}

/// Field-region reports for one scattered cluster.
#[derive(Debug, Clone)]
pub struct ClusterClassification {
    pub cluster: usize,
    pub tx: NfFfReport,
    pub rx: NfFfReport,
}

/// A complete single-drop channel: every element-to-element path term plus
/// the classification metadata that shaped it.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub rx_elements: usize,
    pub tx_elements: usize,
    pub carrier_hz: f64,
    /// Direct-to-scattered power ratio (linear).
    pub k_linear: f64,
    pub seed: u64,
    pub config_hash: u64,
    pub coefficients: Vec<PathCoefficient>,
    /// Reports for the direct path (transmit side, receive side).
    pub los_classification: (NfFfReport, NfFfReport),
    pub cluster_classifications: Vec<ClusterClassification>,
}

impl ChannelRealization {
    /// Sum of squared amplitudes over every path term of one element pair.
    pub fn link_energy(&self, u: usize, s: usize) -> f64 {
        self.coefficients
            .iter()
            .filter(|c| c.u == u && c.s == s)
            .map(|c| c.gain.norm_sqr())
            .sum()
    }
}

/// Everything one realization needs.
pub struct SynthesisInputs<'a> {
    pub scenario: &'a ScenarioConfig,
    pub tx: &'a ArrayGeometry,
    pub rx: &'a ArrayGeometry,
    /// Element pattern shaping coefficient amplitudes on each side.
    pub tx_antenna: &'a AntennaSpec,
    pub rx_antenna: &'a AntennaSpec,
    /// Antenna whose beamwidths drive the angle classifications.
    pub classify_antenna: &'a AntennaSpec,
    pub clusters: &'a ClusterSet,
    pub twins: &'a [TwinScatterer],
    pub mode: SynthesisMode,
    pub boundary_mode: DelayBoundaryMode,
    pub xf: &'a XfGainConfig,
    /// Observation time (seconds); only matters with receiver motion.
    pub time: f64,
    pub seed: u64,
    pub config_hash: u64,
}

/// Global-frame (zenith, azimuth) of a local direction.
fn global_angles(geom: &ArrayGeometry, zenith: f64, azimuth: f64) -> (f64, f64) {
    let g = geom.rotate_to_global(direction_unit_vector(zenith, azimuth));
    spherical_of_direction(g).expect("unit direction has defined angles")
}

/// Per-element pattern fields and global angles for one ray on one side.
fn side_ray_terms(
    geom: &ArrayGeometry,
    antenna: &AntennaSpec,
    side: &SideParams,
    zenith_offset: f64,
    azimuth_offset: f64,
) -> Vec<((f64, f64), (f64, f64))> {
    (0..geom.element_count())
        .map(|e| {
            let zen = reflect_zenith(side.zeniths[e] + zenith_offset);
            let az = wrap_azimuth(side.azimuths[e] + azimuth_offset);
            (element_field(antenna, zen, az), global_angles(geom, zen, az))
        })
        .collect()
}

/// Build every element-to-element coefficient of one drop.
///
/// The direct path carries the Ricean weight `sqrt(k/(k+1))` and the
/// direct-path polarization matrix; each scattered ray carries
/// `sqrt(ray power/(k+1))` and its own polarization coupling. Both are
/// multiplied by the element patterns at per-element angles, the motion
/// phase, and the carrier phase of the full element-to-element delay, so a
/// far-field drop degenerates to planar phase ramps across the array.
pub fn assemble(inp: &SynthesisInputs) -> Result<ChannelRealization> {
    let cfg = inp.scenario;
    let lambda = cfg.wavelength();
    let s_count = inp.tx.element_count();
    let u_count = inp.rx.element_count();
    let k = inp.clusters.k_linear;
    let los_w = (k / (k + 1.0)).sqrt();
    let nlos_w = (1.0 / (k + 1.0)).sqrt();
    let direct = cfg.los_distance();

    let mut twin_of: HashMap<usize, &TwinScatterer> = HashMap::new();
    for t in inp.twins {
        twin_of.insert(t.cluster_index, t);
    }

    // Direct path: each side treats the other array's center as its target.
    let sc_tx_los = inp.tx.relative_position(cfg.rx_center)?;
    let sc_rx_los = inp.rx.relative_position(cfg.tx_center)?;
    let tx_los = side_params(
        inp.tx,
        &sc_tx_los,
        inp.classify_antenna,
        lambda,
        inp.boundary_mode,
        inp.mode,
    )?;
    let rx_los = side_params(
        inp.rx,
        &sc_rx_los,
        inp.classify_antenna,
        lambda,
        inp.boundary_mode,
        inp.mode,
    )?;

    // Optional face-to-face boost, applied to direct-path power only when
    // the receiver sits in front of the transmit plane.
    let xf_amp = if inp.xf.enabled {
        let delta = cfg.rx_center - cfg.tx_center;
        let d0 = delta.dot(inp.tx.normal());
        if d0 > 0.0 {
            xf_gain_factor(
                inp.xf,
                delta.dot(inp.tx.axis_x()),
                delta.dot(inp.tx.axis_y()),
                lambda,
                d0,
            )
            .sqrt()
        } else {
            1.0
        }
    } else {
        1.0
    };

    let mut coefficients =
        Vec::with_capacity(u_count * s_count * (1 + cfg.nlos_clusters * cfg.rays_per_cluster));
    let mut cluster_classifications = Vec::new();

    let los_pol = los_polarization();
    let los_arrival = (cfg.tx_center - cfg.rx_center) / direct;
    let los_doppler = doppler_phase(cfg.rx_velocity, los_arrival, lambda, inp.time);
    let los_methods = MethodFlags {
        tx_range: tx_los.distance_method,
        tx_zenith: tx_los.zenith_method,
        tx_azimuth: tx_los.azimuth_method,
        rx_range: rx_los.distance_method,
        rx_zenith: rx_los.zenith_method,
        rx_azimuth: rx_los.azimuth_method,
    };
    let tx_los_terms = side_ray_terms(inp.tx, inp.tx_antenna, &tx_los, 0.0, 0.0);
    let rx_los_terms = side_ray_terms(inp.rx, inp.rx_antenna, &rx_los, 0.0, 0.0);

    for cluster in &inp.clusters.clusters {
        if cluster.is_los {
            for u in 0..u_count {
                for s in 0..s_count {
                    let delay =
                        (tx_los.distances[s] + rx_los.distances[u] - direct) / SPEED_OF_LIGHT;
                    let carrier = Complex64::from_polar(1.0, -TAU * cfg.carrier_hz * delay);
                    let (ftx, (zod, aod)) = tx_los_terms[s];
                    let (frx, (zoa, aoa)) = rx_los_terms[u];
                    let gain =
                        field_product(frx, &los_pol, ftx) * los_w * xf_amp * los_doppler * carrier;
                    coefficients.push(PathCoefficient {
                        u,
                        s,
                        cluster: cluster.index,
                        ray: 0,
                        is_los: true,
                        delay,
                        gain,
                        aod,
                        zod,
                        aoa,
                        zoa,
                        methods: los_methods,
                    });
                }
            }
            continue;
        }

        let twin = twin_of.get(&cluster.index).ok_or_else(|| {
            Error::internal(format!("no scatterer pair for cluster {}", cluster.index))
        })?;
        let sc_t = inp.tx.relative_position(twin.fbs)?;
        let sc_r = inp.rx.relative_position(twin.lbs)?;
        let tx_side = side_params(
            inp.tx,
            &sc_t,
            inp.classify_antenna,
            lambda,
            inp.boundary_mode,
            inp.mode,
        )?;
        let rx_side = side_params(
            inp.rx,
            &sc_r,
            inp.classify_antenna,
            lambda,
            inp.boundary_mode,
            inp.mode,
        )?;
        let methods = MethodFlags {
            tx_range: tx_side.distance_method,
            tx_zenith: tx_side.zenith_method,
            tx_azimuth: tx_side.azimuth_method,
            rx_range: rx_side.distance_method,
            rx_zenith: rx_side.zenith_method,
            rx_azimuth: rx_side.azimuth_method,
        };
        cluster_classifications.push(ClusterClassification {
            cluster: cluster.index,
            tx: tx_side.report.clone(),
            rx: rx_side.report.clone(),
        });

        for (mi, ray) in cluster.rays.iter().enumerate() {
            let tx_terms = side_ray_terms(
                inp.tx,
                inp.tx_antenna,
                &tx_side,
                ray.zod - cluster.zod,
                wrap_azimuth(ray.aod - cluster.aod),
            );
            let rx_terms = side_ray_terms(
                inp.rx,
                inp.rx_antenna,
                &rx_side,
                ray.zoa - cluster.zoa,
                wrap_azimuth(ray.aoa - cluster.aoa),
            );
            let pol = ray_polarization(ray);
            let ray_amp = ray.power.sqrt() * nlos_w;
            let arrival = direction_unit_vector(ray.zoa, ray.aoa);
            let dop = doppler_phase(cfg.rx_velocity, arrival, lambda, inp.time);
            let ray_offset = ray.delay - cluster.delay;
            for u in 0..u_count {
                for s in 0..s_count {
                    let delay = (tx_side.distances[s] + twin.r_v + rx_side.distances[u])
                        / SPEED_OF_LIGHT
                        + ray_offset;
                    let carrier = Complex64::from_polar(1.0, -TAU * cfg.carrier_hz * delay);
                    let (ftx, (zod, aod)) = tx_terms[s];
                    let (frx, (zoa, aoa)) = rx_terms[u];
                    let gain = field_product(frx, &pol, ftx) * ray_amp * dop * carrier;
                    coefficients.push(PathCoefficient {
                        u,
                        s,
                        cluster: cluster.index,
                        ray: mi,
                        is_los: false,
                        delay,
                        gain,
                        aod,
                        zod,
                        aoa,
                        zoa,
                        methods,
                    });
                }
            }
        }
    }

    Ok(ChannelRealization {
        rx_elements: u_count,
        tx_elements: s_count,
        carrier_hz: cfg.carrier_hz,
        k_linear: k,
        seed: inp.seed,
        config_hash: inp.config_hash,
        coefficients,
        los_classification: (tx_los.report, rx_los.report),
        cluster_classifications,
    })
}

/// Frequency response of every element pair over a frequency grid.
#[derive(Debug, Clone)]
pub struct Cfr {
    pub freqs: Vec<f64>,
    pub rx_elements: usize,
    pub tx_elements: usize,
    /// Row per element pair, receive-major: row = u * tx_elements + s.
    pub h: Vec<Vec<Complex64>>,
}

impl Cfr {
    pub fn link(&self, u: usize, s: usize) -> &[Complex64] {
        &self.h[u * self.tx_elements + s]
    }
}

/// Sum each path term into `H(f) = sum gain * exp(-j*2*pi*f*delay)` per
/// element pair.
pub fn frequency_response(real: &ChannelRealization, freqs: &[f64]) -> Result<Cfr> {
    if freqs.is_empty() {
        return Err(Error::domain("frequency grid is empty"));
    }
    let rows = real.rx_elements * real.tx_elements;
    let mut h = vec![vec![Complex64::new(0.0, 0.0); freqs.len()]; rows];
    for c in &real.coefficients {
        let row = &mut h[c.u * real.tx_elements + c.s];
        for (i, f) in freqs.iter().enumerate() {
            row[i] += c.gain * Complex64::from_polar(1.0, -TAU * f * c.delay);
        }
    }
    Ok(Cfr {
        freqs: freqs.to_vec(),
        rx_elements: real.rx_elements,
        tx_elements: real.tx_elements,
        h,
    })
}
