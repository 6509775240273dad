//! Run configuration: TOML loading, defaults, validation, and hashing.
//!
//! A configuration file is a TOML document with up to eight tables, all
//! optional — an empty file resolves to the documented defaults below.
//! Angles are written in degrees (`*_deg` keys) and times in seconds
//! (`*_s` keys); internally everything is radians and seconds.
//!
//! ```toml
//! [scenario]
//! carrier_hz = 2.6e9            # carrier frequency
//! nlos_clusters = 15            # scattered clusters per drop
//! rays_per_cluster = 20
//! ricean_k_db = 9.0             # direct-to-scattered power ratio
//! delay_spread_s = 60e-9        # RMS delay spread
//! delay_scaling = 2.3           # delay distribution proportionality
//! asd_deg = 2.0                 # cluster azimuth spread, departure
//! asa_deg = 15.0                # cluster azimuth spread, arrival
//! zsd_deg = 1.0                 # cluster zenith spread, departure
//! zsa_deg = 7.0                 # cluster zenith spread, arrival
//! shadowing_db = 3.0            # per-cluster shadowing std dev
//! intra_delay_spread_s = 5e-9   # largest ray delay offset
//! c_asd_deg = 1.0               # intra-cluster angle spreads
//! c_asa_deg = 3.0
//! c_zsd_deg = 0.5
//! c_zsa_deg = 1.5
//! xpr_mean_db = 8.0             # mean cross-polarization ratio
//! tx_center_m = [0.0, 0.0, 25.0]
//! rx_center_m = [300.0, 0.0, 1.5]
//! rx_velocity_mps = [0.0, 0.0, 0.0]
//! time_s = 0.0                  # snapshot instant for Doppler
//! seed = 1                      # master seed (CLI --seed overrides)
//!
//! [tx]                          # transmit array; defaults: 8x8 wall panel
//! kind = "upa"                  # "upa" | "ula" | "uca"
//! rows = 8
//! cols = 8
//! # count = 64                  # element count (ula/uca only)
//! # radius_m = 0.5              # circle radius (uca only)
//! # spacing_m = 0.0577          # default: half the carrier wavelength
//! orientation = "wall"          # "horizontal" | "wall" | "wall-back"
//! # orientation = { a1 = [0.0, 1.0, 0.0], a2 = [0.0, 0.0, 1.0] }
//!
//! [rx]                          # receive array; defaults: 2x2 facing back
//! kind = "upa"
//! rows = 2
//! cols = 2
//! orientation = "wall-back"
//!
//! [antenna]                     # element pattern on both link ends
//! gain_dbi = 0.0
//! hpbw_v_deg = 120.0
//! hpbw_h_deg = 120.0
//! isotropic = false
//!
//! [classify]                    # pattern used for field-region decisions
//! gain_dbi = 0.0
//! hpbw_v_deg = 120.0
//! hpbw_h_deg = 360.0            # no azimuth selectivity
//! delay_boundary = "worst-case" # or "angle-specific"
//!
//! [xf]                          # optional face-to-face gain factor
//! enabled = false
//! c1 = 10.0
//! c2 = 1.0
//! c3 = 1.0
//! c4 = 1.0
//! d_ref_m = 0.0
//!
//! [sweep]                       # field-region probability sweep grid
//! arrays = ["4x4", "8x8", "16x16", "9x21"]
//! freqs_hz = [2.6e9, 140e9]
//! d2d_m = [10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0, 5000.0, 10000.0]
//! trials = 20
//! spacing_m = 3.0
//! rx_height_m = 2.5
//! # tx_height_m = 25.0          # default: 25 m, or 31.5 m for 9x21
//!
//! [compare]                     # far-field-only vs tiered comparison grid
//! arrays = ["4x4", "16x16"]
//! freqs_hz = [2.6e9, 140e9]
//! d2d_m = [30.0, 300.0, 3000.0]
//! seeds_per_cell = 10
//! spacing_m = 3.0
//! rx_height_m = 1.5
//! ```
//!
//! Unknown keys anywhere are rejected, with the key named in the error.

use serde::{Deserialize, Serialize};

use crate::analysis::{ArrayLayout, CompareGrid, SweepGrid};
use crate::cluster_gen::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, SPEED_OF_LIGHT};
use crate::nf_boundary::{AntennaSpec, DelayBoundaryMode};
use crate::synthesis::XfGainConfig;
use crate::vec3::{vec3, Vec3};

// --------------------------------------------------------------------------
// Raw TOML layer: every field optional, unknown keys rejected.
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    pub scenario: ScenarioSection,
    pub tx: ArraySection,
    pub rx: ArraySection,
    pub antenna: AntennaSection,
    pub classify: ClassifySection,
    pub xf: XfSection,
    pub sweep: SweepSection,
    pub compare: CompareSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub carrier_hz: Option<f64>,
    pub nlos_clusters: Option<usize>,
    pub rays_per_cluster: Option<usize>,
    pub ricean_k_db: Option<f64>,
    pub delay_spread_s: Option<f64>,
    pub delay_scaling: Option<f64>,
    pub asd_deg: Option<f64>,
    pub asa_deg: Option<f64>,
    pub zsd_deg: Option<f64>,
    pub zsa_deg: Option<f64>,
    pub shadowing_db: Option<f64>,
    pub intra_delay_spread_s: Option<f64>,
    pub c_asd_deg: Option<f64>,
    pub c_asa_deg: Option<f64>,
    pub c_zsd_deg: Option<f64>,
    pub c_zsa_deg: Option<f64>,
    pub xpr_mean_db: Option<f64>,
    pub tx_center_m: Option<[f64; 3]>,
    pub rx_center_m: Option<[f64; 3]>,
    pub rx_velocity_mps: Option<[f64; 3]>,
    pub time_s: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    pub kind: Option<String>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub count: Option<usize>,
    pub radius_m: Option<f64>,
    pub spacing_m: Option<f64>,
    pub orientation: Option<OrientationSpec>,
}

/// Either a named preset or explicit in-plane axes (the array normal is
/// their cross product).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrientationSpec {
    Preset(String),
    Axes { a1: [f64; 3], a2: [f64; 3] },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AntennaSection {
    pub gain_dbi: Option<f64>,
    pub hpbw_v_deg: Option<f64>,
    pub hpbw_h_deg: Option<f64>,
    pub isotropic: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifySection {
    pub gain_dbi: Option<f64>,
    pub hpbw_v_deg: Option<f64>,
    pub hpbw_h_deg: Option<f64>,
    pub delay_boundary: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XfSection {
    pub enabled: Option<bool>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub d_ref_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub arrays: Option<Vec<String>>,
    pub freqs_hz: Option<Vec<f64>>,
    pub d2d_m: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub spacing_m: Option<f64>,
    pub rx_height_m: Option<f64>,
    pub tx_height_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub arrays: Option<Vec<String>>,
    pub freqs_hz: Option<Vec<f64>>,
    pub d2d_m: Option<Vec<f64>>,
    pub seeds_per_cell: Option<usize>,
    pub spacing_m: Option<f64>,
    pub rx_height_m: Option<f64>,
    pub tx_height_m: Option<f64>,
}

// --------------------------------------------------------------------------
// Resolved layer.
// --------------------------------------------------------------------------

/// Sweep-grid settings with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub arrays: Vec<ArrayLayout>,
    pub freqs_hz: Vec<f64>,
    pub d2d_m: Vec<f64>,
    pub trials: usize,
    pub spacing_m: f64,
    pub rx_height_m: f64,
    /// Fixed transmit height; absent means the per-layout default.
    pub tx_height_m: Option<f64>,
}

/// Comparison-grid settings with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareSettings {
    pub arrays: Vec<ArrayLayout>,
    pub freqs_hz: Vec<f64>,
    pub d2d_m: Vec<f64>,
    pub seeds_per_cell: usize,
    pub spacing_m: f64,
    pub rx_height_m: f64,
    pub tx_height_m: Option<f64>,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    /// Snapshot instant for Doppler evolution, seconds.
    pub time_s: f64,
    pub tx_array: ArrayGeometry,
    pub rx_array: ArrayGeometry,
    pub tx_antenna: AntennaSpec,
    pub rx_antenna: AntennaSpec,
    /// Element model used only for field-region classification.
    pub classify: AntennaSpec,
    pub boundary_mode: DelayBoundaryMode,
    pub xf: XfGainConfig,
    pub sweep: SweepSettings,
    pub compare: CompareSettings,
    /// Canonical raw form (every field populated) used for hashing.
    resolved: RawConfig,
}

/// Parse an array layout label of the form `ROWSxCOLS`, e.g. `"9x21"`.
pub fn parse_layout(key: &str, label: &str) -> Result<ArrayLayout> {
    let err = || {
        Error::config(
            key,
            format!("array label `{label}` must be ROWSxCOLS with positive integers"),
        )
    };
    let (r, c) = label.split_once('x').ok_or_else(err)?;
    let rows: usize = r.parse().map_err(|_| err())?;
    let cols: usize = c.parse().map_err(|_| err())?;
    if rows == 0 || cols == 0 {
        return Err(err());
    }
    Ok(ArrayLayout::new(rows, cols))
}

/// 64-bit FNV-1a over a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Load and resolve a configuration file.
pub fn load(path: &str) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_toml_str(&text)
}

/// Parse and resolve configuration TOML; an empty string yields defaults.
pub fn from_toml_str(text: &str) -> Result<RunConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
    resolve(raw)
}

fn check_positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be finite and > 0, got {v}")))
    }
}

fn check_nonnegative(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be finite and >= 0, got {v}")))
    }
}

fn check_finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be finite, got {v}")))
    }
}

fn check_positive_list(key: &str, vs: &[f64]) -> Result<()> {
    if vs.is_empty() {
        return Err(Error::config(key, "list must not be empty"));
    }
    for &v in vs {
        check_positive(key, v)?;
    }
    Ok(())
}

/// Replace the key of a configuration error raised by a building block with
/// the file-level key the user actually wrote.
fn rekey(err: Error, key: &str) -> Error {
    match err {
        Error::Config { message, .. } => Error::config(key, message),
        other => other,
    }
}

fn to_vec3(a: [f64; 3]) -> Vec3 {
    vec3(a[0], a[1], a[2])
}

fn resolve_orientation(section: &str, spec: &OrientationSpec) -> Result<(Vec3, Vec3)> {
    match spec {
        OrientationSpec::Preset(name) => match name.as_str() {
            "horizontal" => Ok((Vec3::X, Vec3::Y)),
            "wall" => Ok((Vec3::Y, Vec3::Z)),
            "wall-back" => Ok((-Vec3::Y, Vec3::Z)),
            other => Err(Error::config(
                format!("{section}.orientation"),
                format!(
                    "unknown preset `{other}`; use \"horizontal\", \"wall\", \
                     \"wall-back\", or explicit axes {{ a1 = [..], a2 = [..] }}"
                ),
            )),
        },
        OrientationSpec::Axes { a1, a2 } => Ok((to_vec3(*a1), to_vec3(*a2))),
    }
}

struct ArrayDefaults {
    rows: usize,
    cols: usize,
    orientation: OrientationSpec,
}

fn resolve_array(
    section: &str,
    raw: &ArraySection,
    defaults: &ArrayDefaults,
    center: Vec3,
    half_wavelength: f64,
) -> Result<(ArrayGeometry, ArraySection)> {
    let key = |f: &str| format!("{section}.{f}");
    let kind = raw.kind.clone().unwrap_or_else(|| "upa".to_string());
    let spacing = match raw.spacing_m {
        Some(s) => check_positive(&key("spacing_m"), s)?,
        None => half_wavelength,
    };
    // Reject fields that do not apply to the chosen kind so typos cannot
    // silently change the layout.
    let geometry = match kind.as_str() {
        "upa" => {
            if raw.count.is_some() {
                return Err(Error::config(key("count"), "only applies to kind \"ula\" or \"uca\""));
            }
            if raw.radius_m.is_some() {
                return Err(Error::config(key("radius_m"), "only applies to kind \"uca\""));
            }
            let rows = raw.rows.unwrap_or(defaults.rows);
            let cols = raw.cols.unwrap_or(defaults.cols);
            ArrayGeometry::upa(rows, cols, spacing).map_err(|e| rekey(e, &key("rows")))?
        }
        "ula" => {
            if raw.rows.is_some() || raw.cols.is_some() {
                return Err(Error::config(key("rows"), "only applies to kind \"upa\""));
            }
            if raw.radius_m.is_some() {
                return Err(Error::config(key("radius_m"), "only applies to kind \"uca\""));
            }
            let count = raw
                .count
                .ok_or_else(|| Error::config(key("count"), "required for kind \"ula\""))?;
            ArrayGeometry::ula(count, spacing).map_err(|e| rekey(e, &key("count")))?
        }
        "uca" => {
            if raw.rows.is_some() || raw.cols.is_some() {
                return Err(Error::config(key("rows"), "only applies to kind \"upa\""));
            }
            if raw.spacing_m.is_some() {
                return Err(Error::config(
                    key("spacing_m"),
                    "does not apply to kind \"uca\"; set radius_m instead",
                ));
            }
            let count = raw
                .count
                .ok_or_else(|| Error::config(key("count"), "required for kind \"uca\""))?;
            let radius = raw
                .radius_m
                .ok_or_else(|| Error::config(key("radius_m"), "required for kind \"uca\""))?;
            ArrayGeometry::uca(count, check_positive(&key("radius_m"), radius)?)
                .map_err(|e| rekey(e, &key("count")))?
        }
        other => {
            return Err(Error::config(
                key("kind"),
                format!("unknown array kind `{other}`; use \"upa\", \"ula\", or \"uca\""),
            ))
        }
    };
    let orientation = raw.orientation.clone().unwrap_or_else(|| defaults.orientation.clone());
    let (a1, a2) = resolve_orientation(section, &orientation)?;
    let geometry = geometry
        .with_center(center)
        .with_orientation(a1, a2)
        .map_err(|e| rekey(e, &key("orientation")))?;
    let canonical = ArraySection {
        kind: Some(kind),
        rows: if geometry.kind == crate::geometry::ArrayKind::Upa {
            Some(geometry.rows)
        } else {
            None
        },
        cols: if geometry.kind == crate::geometry::ArrayKind::Upa {
            Some(geometry.cols)
        } else {
            None
        },
        count: raw.count,
        radius_m: raw.radius_m,
        spacing_m: Some(geometry.spacing),
        orientation: Some(OrientationSpec::Axes {
            a1: [geometry.axis_x().x, geometry.axis_x().y, geometry.axis_x().z],
            a2: [geometry.axis_y().x, geometry.axis_y().y, geometry.axis_y().z],
        }),
    };
    Ok((geometry, canonical))
}

fn resolve_layouts(key: &str, labels: Option<Vec<String>>, fallback: &[&str]) -> Result<(Vec<ArrayLayout>, Vec<String>)> {
    let labels = labels.unwrap_or_else(|| fallback.iter().map(|s| s.to_string()).collect());
    if labels.is_empty() {
        return Err(Error::config(key, "list must not be empty"));
    }
    let layouts = labels
        .iter()
        .map(|l| parse_layout(key, l))
        .collect::<Result<Vec<_>>>()?;
    Ok((layouts, labels))
}

/// Apply defaults and validate, producing a runnable configuration.
pub fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let s = &raw.scenario;
    let deg = |v: Option<f64>, d: f64| v.unwrap_or(d).to_radians();

    let carrier_hz = check_positive("scenario.carrier_hz", s.carrier_hz.unwrap_or(2.6e9))?;
    let nlos_clusters = s.nlos_clusters.unwrap_or(15);
    if nlos_clusters == 0 {
        return Err(Error::config("scenario.nlos_clusters", "must be >= 1"));
    }
    let rays_per_cluster = s.rays_per_cluster.unwrap_or(20);
    if rays_per_cluster == 0 {
        return Err(Error::config("scenario.rays_per_cluster", "must be >= 1"));
    }
    let delay_scaling = s.delay_scaling.unwrap_or(2.3);
    if !(delay_scaling.is_finite() && delay_scaling > 1.0) {
        return Err(Error::config(
            "scenario.delay_scaling",
            format!("must be finite and > 1, got {delay_scaling}"),
        ));
    }
    let scenario = ScenarioConfig {
        carrier_hz,
        nlos_clusters,
        rays_per_cluster,
        ricean_k_db: check_finite("scenario.ricean_k_db", s.ricean_k_db.unwrap_or(9.0))?,
        delay_spread: check_positive("scenario.delay_spread_s", s.delay_spread_s.unwrap_or(60e-9))?,
        delay_scaling,
        asd: check_nonnegative("scenario.asd_deg", deg(s.asd_deg, 2.0))?,
        asa: check_nonnegative("scenario.asa_deg", deg(s.asa_deg, 15.0))?,
        zsd: check_nonnegative("scenario.zsd_deg", deg(s.zsd_deg, 1.0))?,
        zsa: check_nonnegative("scenario.zsa_deg", deg(s.zsa_deg, 7.0))?,
        shadowing_db: check_nonnegative("scenario.shadowing_db", s.shadowing_db.unwrap_or(3.0))?,
        intra_delay_spread: check_nonnegative(
            "scenario.intra_delay_spread_s",
            s.intra_delay_spread_s.unwrap_or(5e-9),
        )?,
        c_asd: check_nonnegative("scenario.c_asd_deg", deg(s.c_asd_deg, 1.0))?,
        c_asa: check_nonnegative("scenario.c_asa_deg", deg(s.c_asa_deg, 3.0))?,
        c_zsd: check_nonnegative("scenario.c_zsd_deg", deg(s.c_zsd_deg, 0.5))?,
        c_zsa: check_nonnegative("scenario.c_zsa_deg", deg(s.c_zsa_deg, 1.5))?,
        xpr_mean_db: check_finite("scenario.xpr_mean_db", s.xpr_mean_db.unwrap_or(8.0))?,
        tx_center: to_vec3(s.tx_center_m.unwrap_or([0.0, 0.0, 25.0])),
        rx_center: to_vec3(s.rx_center_m.unwrap_or([300.0, 0.0, 1.5])),
        rx_velocity: to_vec3(s.rx_velocity_mps.unwrap_or([0.0; 3])),
        seed: s.seed.unwrap_or(1),
    };
    if scenario.los_distance() <= 0.0 {
        return Err(Error::config(
            "scenario.rx_center_m",
            "transmit and receive centers must not coincide",
        ));
    }
    let time_s = check_finite("scenario.time_s", s.time_s.unwrap_or(0.0))?;

    let half_wavelength = 0.5 * SPEED_OF_LIGHT / carrier_hz;
    let (tx_array, tx_canonical) = resolve_array(
        "tx",
        &raw.tx,
        &ArrayDefaults {
            rows: 8,
            cols: 8,
            orientation: OrientationSpec::Preset("wall".into()),
        },
        scenario.tx_center,
        half_wavelength,
    )?;
    let (rx_array, rx_canonical) = resolve_array(
        "rx",
        &raw.rx,
        &ArrayDefaults {
            rows: 2,
            cols: 2,
            orientation: OrientationSpec::Preset("wall-back".into()),
        },
        scenario.rx_center,
        half_wavelength,
    )?;

    let a = &raw.antenna;
    let antenna_gain = check_finite("antenna.gain_dbi", a.gain_dbi.unwrap_or(0.0))?;
    let antenna_v = deg(a.hpbw_v_deg, 120.0);
    let antenna_h = deg(a.hpbw_h_deg, 120.0);
    let isotropic = a.isotropic.unwrap_or(false);
    let element = if isotropic {
        AntennaSpec::isotropic()
    } else {
        AntennaSpec::cosine_power(antenna_gain, antenna_v, antenna_h)
            .map_err(|e| rekey(e, "antenna.hpbw_v_deg"))?
    };

    let c = &raw.classify;
    let classify = AntennaSpec::cosine_power(
        check_finite("classify.gain_dbi", c.gain_dbi.unwrap_or(0.0))?,
        deg(c.hpbw_v_deg, 120.0),
        deg(c.hpbw_h_deg, 360.0),
    )
    .map_err(|e| rekey(e, "classify.hpbw_v_deg"))?;
    let delay_boundary = c.delay_boundary.clone().unwrap_or_else(|| "worst-case".to_string());
    let boundary_mode = match delay_boundary.as_str() {
        "worst-case" => DelayBoundaryMode::WorstCase,
        "angle-specific" => DelayBoundaryMode::AngleSpecific,
        other => {
            return Err(Error::config(
                "classify.delay_boundary",
                format!("unknown mode `{other}`; use \"worst-case\" or \"angle-specific\""),
            ))
        }
    };

    let x = &raw.xf;
    let xf = XfGainConfig {
        enabled: x.enabled.unwrap_or(false),
        c1: check_positive("xf.c1", x.c1.unwrap_or(10.0))?,
        c2: check_finite("xf.c2", x.c2.unwrap_or(1.0))?,
        c3: check_positive("xf.c3", x.c3.unwrap_or(1.0))?,
        c4: check_positive("xf.c4", x.c4.unwrap_or(1.0))?,
        d_ref: check_finite("xf.d_ref_m", x.d_ref_m.unwrap_or(0.0))?,
    };

    let sw = &raw.sweep;
    let (sweep_layouts, sweep_labels) =
        resolve_layouts("sweep.arrays", sw.arrays.clone(), &["4x4", "8x8", "16x16", "9x21"])?;
    let sweep_freqs = sw.freqs_hz.clone().unwrap_or_else(|| vec![2.6e9, 140e9]);
    check_positive_list("sweep.freqs_hz", &sweep_freqs)?;
    let sweep_d2d = sw
        .d2d_m
        .clone()
        .unwrap_or_else(|| vec![10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0, 5000.0, 10000.0]);
    check_positive_list("sweep.d2d_m", &sweep_d2d)?;
    let sweep_trials = sw.trials.unwrap_or(20);
    if sweep_trials == 0 {
        return Err(Error::config("sweep.trials", "must be >= 1"));
    }
    let sweep = SweepSettings {
        arrays: sweep_layouts,
        freqs_hz: sweep_freqs,
        d2d_m: sweep_d2d,
        trials: sweep_trials,
        spacing_m: check_positive("sweep.spacing_m", sw.spacing_m.unwrap_or(3.0))?,
        rx_height_m: check_nonnegative("sweep.rx_height_m", sw.rx_height_m.unwrap_or(2.5))?,
        tx_height_m: sw.tx_height_m.map(|h| check_positive("sweep.tx_height_m", h)).transpose()?,
    };

    let cm = &raw.compare;
    let (compare_layouts, compare_labels) =
        resolve_layouts("compare.arrays", cm.arrays.clone(), &["4x4", "16x16"])?;
    let compare_freqs = cm.freqs_hz.clone().unwrap_or_else(|| vec![2.6e9, 140e9]);
    check_positive_list("compare.freqs_hz", &compare_freqs)?;
    let compare_d2d = cm.d2d_m.clone().unwrap_or_else(|| vec![30.0, 300.0, 3000.0]);
    check_positive_list("compare.d2d_m", &compare_d2d)?;
    let seeds_per_cell = cm.seeds_per_cell.unwrap_or(10);
    if seeds_per_cell == 0 {
        return Err(Error::config("compare.seeds_per_cell", "must be >= 1"));
    }
    let compare = CompareSettings {
        arrays: compare_layouts,
        freqs_hz: compare_freqs,
        d2d_m: compare_d2d,
        seeds_per_cell,
        spacing_m: check_positive("compare.spacing_m", cm.spacing_m.unwrap_or(3.0))?,
        rx_height_m: check_nonnegative("compare.rx_height_m", cm.rx_height_m.unwrap_or(1.5))?,
        tx_height_m: cm
            .tx_height_m
            .map(|h| check_positive("compare.tx_height_m", h))
            .transpose()?,
    };

    // Canonical form: every field populated with its resolved value so the
    // hash does not depend on which keys were spelled out or their order.
    let resolved = RawConfig {
        scenario: ScenarioSection {
            carrier_hz: Some(scenario.carrier_hz),
            nlos_clusters: Some(scenario.nlos_clusters),
            rays_per_cluster: Some(scenario.rays_per_cluster),
            ricean_k_db: Some(scenario.ricean_k_db),
            delay_spread_s: Some(scenario.delay_spread),
            delay_scaling: Some(scenario.delay_scaling),
            asd_deg: Some(scenario.asd.to_degrees()),
            asa_deg: Some(scenario.asa.to_degrees()),
            zsd_deg: Some(scenario.zsd.to_degrees()),
            zsa_deg: Some(scenario.zsa.to_degrees()),
            shadowing_db: Some(scenario.shadowing_db),
            intra_delay_spread_s: Some(scenario.intra_delay_spread),
            c_asd_deg: Some(scenario.c_asd.to_degrees()),
            c_asa_deg: Some(scenario.c_asa.to_degrees()),
            c_zsd_deg: Some(scenario.c_zsd.to_degrees()),
            c_zsa_deg: Some(scenario.c_zsa.to_degrees()),
            xpr_mean_db: Some(scenario.xpr_mean_db),
            tx_center_m: Some([scenario.tx_center.x, scenario.tx_center.y, scenario.tx_center.z]),
            rx_center_m: Some([scenario.rx_center.x, scenario.rx_center.y, scenario.rx_center.z]),
            rx_velocity_mps: Some([
                scenario.rx_velocity.x,
                scenario.rx_velocity.y,
                scenario.rx_velocity.z,
            ]),
            time_s: Some(time_s),
            seed: Some(scenario.seed),
        },
        tx: tx_canonical,
        rx: rx_canonical,
        antenna: AntennaSection {
            gain_dbi: Some(antenna_gain),
            hpbw_v_deg: Some(antenna_v.to_degrees()),
            hpbw_h_deg: Some(antenna_h.to_degrees()),
            isotropic: Some(isotropic),
        },
        classify: ClassifySection {
            gain_dbi: Some(c.gain_dbi.unwrap_or(0.0)),
            hpbw_v_deg: Some(c.hpbw_v_deg.unwrap_or(120.0)),
            hpbw_h_deg: Some(c.hpbw_h_deg.unwrap_or(360.0)),
            delay_boundary: Some(delay_boundary),
        },
        xf: XfSection {
            enabled: Some(xf.enabled),
            c1: Some(xf.c1),
            c2: Some(xf.c2),
            c3: Some(xf.c3),
            c4: Some(xf.c4),
            d_ref_m: Some(xf.d_ref),
        },
        sweep: SweepSection {
            arrays: Some(sweep_labels),
            freqs_hz: Some(sweep.freqs_hz.clone()),
            d2d_m: Some(sweep.d2d_m.clone()),
            trials: Some(sweep.trials),
            spacing_m: Some(sweep.spacing_m),
            rx_height_m: Some(sweep.rx_height_m),
            tx_height_m: sweep.tx_height_m,
        },
        compare: CompareSection {
            arrays: Some(compare_labels),
            freqs_hz: Some(compare.freqs_hz.clone()),
            d2d_m: Some(compare.d2d_m.clone()),
            seeds_per_cell: Some(compare.seeds_per_cell),
            spacing_m: Some(compare.spacing_m),
            rx_height_m: Some(compare.rx_height_m),
            tx_height_m: compare.tx_height_m,
        },
    };

    Ok(RunConfig {
        scenario,
        time_s,
        tx_array,
        rx_array,
        tx_antenna: element.clone(),
        rx_antenna: element,
        classify,
        boundary_mode,
        xf,
        sweep,
        compare,
        resolved,
    })
}

impl Default for RunConfig {
    fn default() -> Self {
        resolve(RawConfig::default()).expect("default configuration must be valid")
    }
}

impl RunConfig {
    /// Canonical TOML of the fully resolved configuration.
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(&self.resolved).expect("resolved config serializes")
    }

    /// FNV-1a hash of the canonical form; independent of key order and of
    /// which defaults were spelled out in the input file.
    pub fn config_hash(&self) -> u64 {
        fnv1a64(self.canonical_toml().as_bytes())
    }

    /// Override the master seed (e.g. from `--seed`), keeping the canonical
    /// form in sync so the hash reflects the effective run.
    pub fn set_seed(&mut self, seed: u64) {
        self.scenario.seed = seed;
        self.resolved.scenario.seed = Some(seed);
    }

    /// Override both sweep trial count and comparison drops per cell
    /// (e.g. from `--trials`).
    pub fn set_trials(&mut self, trials: usize) -> Result<()> {
        if trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        self.sweep.trials = trials;
        self.resolved.sweep.trials = Some(trials);
        self.compare.seeds_per_cell = trials;
        self.resolved.compare.seeds_per_cell = Some(trials);
        Ok(())
    }

    /// Sweep grid assembled from the resolved settings.
    pub fn sweep_grid(&self) -> SweepGrid {
        SweepGrid {
            arrays: self.sweep.arrays.clone(),
            freqs_hz: self.sweep.freqs_hz.clone(),
            d2d_m: self.sweep.d2d_m.clone(),
            trials: self.sweep.trials,
            spacing_m: self.sweep.spacing_m,
            rx_height_m: self.sweep.rx_height_m,
            tx_height_m: self.sweep.tx_height_m,
            scenario: self.scenario.clone(),
            classify: self.classify.clone(),
            boundary_mode: self.boundary_mode,
        }
    }

    /// Comparison grid assembled from the resolved settings.
    pub fn compare_grid(&self) -> CompareGrid {
        CompareGrid {
            arrays: self.compare.arrays.clone(),
            freqs_hz: self.compare.freqs_hz.clone(),
            d2d_m: self.compare.d2d_m.clone(),
            seeds_per_cell: self.compare.seeds_per_cell,
            spacing_m: self.compare.spacing_m,
            rx_height_m: self.compare.rx_height_m,
            tx_height_m: self.compare.tx_height_m,
            scenario: self.scenario.clone(),
            classify: self.classify.clone(),
            tx_antenna: self.tx_antenna.clone(),
            rx_antenna: self.rx_antenna.clone(),
            boundary_mode: self.boundary_mode,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_input_resolves_to_documented_defaults() {
        let cfg = from_toml_str("").unwrap();
        assert_abs_diff_eq!(cfg.scenario.carrier_hz, 2.6e9);
        assert_eq!(cfg.scenario.nlos_clusters, 15);
        assert_eq!(cfg.scenario.rays_per_cluster, 20);
        assert_abs_diff_eq!(cfg.scenario.delay_spread, 60e-9);
        assert_abs_diff_eq!(cfg.scenario.asa, 15f64.to_radians());
        assert_eq!(cfg.scenario.seed, 1);
        assert_abs_diff_eq!(cfg.scenario.tx_center.z, 25.0);
        assert_abs_diff_eq!(cfg.scenario.rx_center.x, 300.0);
        assert_eq!(cfg.tx_array.rows, 8);
        assert_eq!(cfg.rx_array.rows, 2);
        // Default spacing is half the carrier wavelength.
        assert_abs_diff_eq!(
            cfg.tx_array.spacing,
            0.5 * SPEED_OF_LIGHT / 2.6e9,
            epsilon = 1e-12
        );
        // Tx faces +x, Rx faces -x.
        assert_abs_diff_eq!(cfg.tx_array.normal().x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cfg.rx_array.normal().x, -1.0, epsilon = 1e-12);
        assert!(!cfg.xf.enabled);
        assert_eq!(cfg.sweep.arrays.len(), 4);
        assert_eq!(cfg.sweep.d2d_m.len(), 8);
        assert_eq!(cfg.sweep.trials, 20);
        assert_abs_diff_eq!(cfg.sweep.rx_height_m, 2.5);
        assert_eq!(cfg.sweep.tx_height_m, None);
        assert_eq!(cfg.compare.seeds_per_cell, 10);
        assert_abs_diff_eq!(cfg.compare.rx_height_m, 1.5);
        assert_eq!(cfg.boundary_mode, DelayBoundaryMode::WorstCase);
    }

    #[test]
    fn hash_ignores_key_order_and_spelled_out_defaults() {
        let a = from_toml_str(
            "[scenario]\ncarrier_hz = 3.5e9\nseed = 4\n[sweep]\ntrials = 5\n",
        )
        .unwrap();
        let b = from_toml_str(
            "[sweep]\ntrials = 5\n[scenario]\nseed = 4\ncarrier_hz = 3.5e9\n",
        )
        .unwrap();
        assert_eq!(a.config_hash(), b.config_hash());

        // Spelling out a default changes nothing.
        let c = from_toml_str("[scenario]\nnlos_clusters = 15\n").unwrap();
        assert_eq!(c.config_hash(), RunConfig::default().config_hash());

        // Changing a value does.
        let d = from_toml_str("[scenario]\nnlos_clusters = 14\n").unwrap();
        assert_ne!(d.config_hash(), RunConfig::default().config_hash());
    }

    #[test]
    fn orientation_preset_and_explicit_axes_hash_alike() {
        let preset = from_toml_str("[tx]\norientation = \"wall\"\n").unwrap();
        let axes = from_toml_str(
            "[tx]\norientation = { a1 = [0.0, 1.0, 0.0], a2 = [0.0, 0.0, 1.0] }\n",
        )
        .unwrap();
        assert_eq!(preset.config_hash(), axes.config_hash());
        assert_eq!(preset.config_hash(), RunConfig::default().config_hash());
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = from_toml_str("[scenario]\ndela_spread_s = 1e-9\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("dela_spread_s"), "{msg}");
        assert!(matches!(err, Error::Config { .. }));

        let err = from_toml_str("[scnario]\n").unwrap_err();
        assert!(err.to_string().contains("scnario"), "{err}");
    }

    #[test]
    fn range_violations_name_the_key() {
        let err = from_toml_str("[tx]\nspacing_m = 0.0\n").unwrap_err();
        assert!(err.to_string().contains("tx.spacing_m"), "{err}");

        let err = from_toml_str("[scenario]\ndelay_scaling = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("scenario.delay_scaling"), "{err}");

        let err = from_toml_str("[sweep]\narrays = [\"4by4\"]\n").unwrap_err();
        assert!(err.to_string().contains("sweep.arrays"), "{err}");
        assert!(err.to_string().contains("4by4"), "{err}");

        let err = from_toml_str("[compare]\nseeds_per_cell = 0\n").unwrap_err();
        assert!(err.to_string().contains("compare.seeds_per_cell"), "{err}");
    }

    #[test]
    fn inapplicable_array_fields_are_rejected() {
        let err = from_toml_str("[tx]\nkind = \"upa\"\ncount = 4\n").unwrap_err();
        assert!(err.to_string().contains("tx.count"), "{err}");

        let err = from_toml_str("[rx]\nkind = \"ula\"\n").unwrap_err();
        assert!(err.to_string().contains("rx.count"), "{err}");

        let err =
            from_toml_str("[rx]\nkind = \"uca\"\ncount = 8\nspacing_m = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("rx.spacing_m"), "{err}");
    }

    #[test]
    fn construction_element_layout_resolves() {
        let cfg = from_toml_str(
            "[scenario]\ncarrier_hz = 140e9\ntx_center_m = [0.0, 0.0, 31.5]\n\
             [tx]\nrows = 9\ncols = 21\nspacing_m = 3.0\n",
        )
        .unwrap();
        assert_eq!((cfg.tx_array.rows, cfg.tx_array.cols), (9, 21));
        assert_abs_diff_eq!(cfg.tx_array.spacing, 3.0);
        assert_abs_diff_eq!(cfg.tx_array.center.z, 31.5);
        assert_abs_diff_eq!(cfg.tx_array.normal().x, 1.0, epsilon = 1e-12);
        // 9 rows x 21 cols of 3 m pitch span 24 m x 60 m corner to corner.
        assert_abs_diff_eq!(cfg.tx_array.aperture(), (24.0f64 * 24.0 + 60.0 * 60.0).sqrt());
    }

    #[test]
    fn canonical_form_round_trips_to_the_same_hash() {
        let cfg = from_toml_str(
            "[scenario]\ncarrier_hz = 140e9\nseed = 9\n[tx]\nrows = 9\ncols = 21\n\
             spacing_m = 3.0\n[xf]\nenabled = true\nc2 = 0.5\n",
        )
        .unwrap();
        let reparsed = from_toml_str(&cfg.canonical_toml()).unwrap();
        assert_eq!(cfg.config_hash(), reparsed.config_hash());
    }

    #[test]
    fn seed_and_trials_overrides_update_the_hash() {
        let mut cfg = RunConfig::default();
        let base = cfg.config_hash();
        cfg.set_seed(99);
        assert_eq!(cfg.scenario.seed, 99);
        assert_ne!(cfg.config_hash(), base);
        cfg.set_trials(3).unwrap();
        assert_eq!(cfg.sweep.trials, 3);
        assert_eq!(cfg.compare.seeds_per_cell, 3);
        assert!(cfg.set_trials(0).is_err());
    }

    #[test]
    fn grids_reflect_the_resolved_settings() {
        let cfg = from_toml_str(
            "[sweep]\narrays = [\"2x3\"]\nfreqs_hz = [1e9]\nd2d_m = [50.0]\ntrials = 2\n\
             [compare]\narrays = [\"2x2\"]\nfreqs_hz = [1e9]\nd2d_m = [40.0]\nseeds_per_cell = 1\n",
        )
        .unwrap();
        let sg = cfg.sweep_grid();
        assert_eq!(sg.arrays, vec![ArrayLayout::new(2, 3)]);
        assert_eq!(sg.trials, 2);
        assert_abs_diff_eq!(sg.rx_height_m, 2.5);
        let cg = cfg.compare_grid();
        assert_eq!(cg.arrays, vec![ArrayLayout::new(2, 2)]);
        assert_eq!(cg.seeds_per_cell, 1);
        assert_abs_diff_eq!(cg.rx_height_m, 1.5);
    }

    #[test]
    fn fnv_hash_matches_reference_vectors() {
        // Standard FNV-1a 64-bit test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }
}
