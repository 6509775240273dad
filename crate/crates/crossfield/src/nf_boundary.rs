//! Near-field / far-field demarcation, one boundary per channel parameter:
//! path length under the first-order expansion (Rayleigh distance), path
//! length under the second-order expansion (Fresnel distance), zenith angle
//! (from the maximum angle deviation across the aperture vs. the vertical
//! beamwidth), and azimuth angle (deviation at the outermost elements vs.
//! the horizontal beamwidth).
//!
//! Distance boundaries come in a worst-case form (direction independent)
//! and an angle-specific form; angle boundaries depend only on geometry, not
//! on wavelength.

use crate::error::{Error, Result};
use crate::geometry::{wrap_azimuth, ArrayGeometry, ArrayKind, ScattererSpherical};
use std::f64::consts::{FRAC_PI_2, PI};

/// Linear field-amplitude floor applied to antenna patterns (-30 dB).
const PATTERN_FLOOR: f64 = 0.03162277660168379; // 10^(-30/20)

/// Antenna element description: gain, half-power beamwidths for the
/// vertical and horizontal cuts, and the pattern shape used when a field
/// amplitude is required.
#[derive(Debug, Clone)]
pub struct AntennaSpec {
    /// Boresight gain in dBi (applied as a field factor 10^(gain/20)).
    pub gain_dbi: f64,
    /// Vertical-cut half-power beamwidth in radians, (0, 2*pi].
    pub hpbw_v: f64,
    /// Horizontal-cut half-power beamwidth in radians, (0, 2*pi].
    pub hpbw_h: f64,
    pub pattern: PatternKind,
}

/// Pattern shapes for [`AntennaSpec`].
#[derive(Debug, Clone)]
pub enum PatternKind {
    /// Unit field in every direction.
    Isotropic,
    /// Per-cut cosine-power shape whose exponent matches the cut's
    /// half-power beamwidth; beamwidths of pi or wider flatten the cut.
    CosinePower,
    /// Piecewise-linear gain tables (offset radians, gain dB) per cut,
    /// interpolated in dB and clamped at the table ends.
    TabulatedCut {
        vertical: Vec<(f64, f64)>,
        horizontal: Vec<(f64, f64)>,
    },
}

impl AntennaSpec {
    fn validate(self) -> Result<Self> {
        for (name, v) in [("hpbw_v", self.hpbw_v), ("hpbw_h", self.hpbw_h)] {
            if !(v > 0.0 && v <= 2.0 * PI) {
                return Err(Error::config(
                    format!("antenna.{name}"),
                    "half-power beamwidth must lie in (0, 2*pi] radians",
                ));
            }
        }
        if let PatternKind::TabulatedCut { vertical, horizontal } = &self.pattern {
            for (name, table) in [("vertical", vertical), ("horizontal", horizontal)] {
                if table.is_empty() {
                    return Err(Error::config(
                        format!("antenna.{name}_cut"),
                        "tabulated pattern cut must not be empty",
                    ));
                }
                if table.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::config(
                        format!("antenna.{name}_cut"),
                        "tabulated pattern offsets must be strictly increasing",
                    ));
                }
            }
        }
        Ok(self)
    }

    /// Unit-gain isotropic element.
    pub fn isotropic() -> Self {
        Self {
            gain_dbi: 0.0,
            hpbw_v: 2.0 * PI,
            hpbw_h: 2.0 * PI,
            pattern: PatternKind::Isotropic,
        }
    }

    /// Cosine-power element with the given beamwidths (radians).
    pub fn cosine_power(gain_dbi: f64, hpbw_v: f64, hpbw_h: f64) -> Result<Self> {
        Self {
            gain_dbi,
            hpbw_v,
            hpbw_h,
            pattern: PatternKind::CosinePower,
        }
        .validate()
    }

    /// Tabulated element with per-cut (offset radians, gain dB) tables.
    pub fn tabulated(
        gain_dbi: f64,
        hpbw_v: f64,
        hpbw_h: f64,
        vertical: Vec<(f64, f64)>,
        horizontal: Vec<(f64, f64)>,
    ) -> Result<Self> {
        Self {
            gain_dbi,
            hpbw_v,
            hpbw_h,
            pattern: PatternKind::TabulatedCut { vertical, horizontal },
        }
        .validate()
    }

    /// Cosine exponent giving half power at half the beamwidth; zero (flat)
    /// for beamwidths of pi or wider, where the half-power point would fall
    /// behind the element.
    fn cosine_exponent(hpbw: f64) -> f64 {
        if hpbw >= PI {
            return 0.0;
        }
        let c = (hpbw / 2.0).cos();
        0.5_f64.ln() / (2.0 * c.ln())
    }

    /// Field amplitude (linear) at angular offsets from boresight in the
    /// vertical and horizontal cuts. The combined shape is floored at
    /// -30 dB and scaled by the element gain.
    pub fn field_amplitude(&self, off_v: f64, off_h: f64) -> f64 {
        let gain = 10.0_f64.powf(self.gain_dbi / 20.0);
        let shape = match &self.pattern {
            PatternKind::Isotropic => 1.0,
            PatternKind::CosinePower => {
                let cut = |off: f64, hpbw: f64| -> f64 {
                    let c = off.cos();
                    if c <= 0.0 {
                        0.0
                    } else {
                        c.powf(Self::cosine_exponent(hpbw))
                    }
                };
                cut(off_v, self.hpbw_v) * cut(off_h, self.hpbw_h)
            }
            PatternKind::TabulatedCut { vertical, horizontal } => {
                let db = interp_db(vertical, off_v) + interp_db(horizontal, off_h);
                10.0_f64.powf(db / 20.0)
            }
        };
        shape.max(PATTERN_FLOOR) * gain
    }
}

fn interp_db(table: &[(f64, f64)], x: f64) -> f64 {
    let first = table[0];
    let last = table[table.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = table.partition_point(|&(a, _)| a <= x);
    let (x0, y0) = table[i - 1];
    let (x1, y1) = table[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

// ---------------------------------------------------------------------------
// Boundary distances
// ---------------------------------------------------------------------------

/// Worst-case boundary of the first-order path-length approximation:
/// 2 D^2 / wavelength (meters).
pub fn rayleigh_worst(aperture: f64, wavelength: f64) -> f64 {
    2.0 * aperture * aperture / wavelength
}

/// Worst-case boundary of the second-order path-length approximation:
/// 0.62 sqrt(D^3 / wavelength) (meters). The leading constant is the
/// conventional two-digit rounding of sqrt(2 / (3 sqrt(3))).
pub fn fresnel_worst(aperture: f64, wavelength: f64) -> f64 {
    0.62 * (aperture.powi(3) / wavelength).sqrt()
}

/// Exact (unrounded) leading constant of the second-order boundary.
pub const FRESNEL_EXACT_CONSTANT: f64 = 0.6204032394013997;

/// Angle-specific first-order boundary: 2 D^2 cos^2(zenith) / wavelength.
pub fn rayleigh_general(aperture: f64, wavelength: f64, zenith: f64) -> f64 {
    let c = zenith.cos();
    2.0 * aperture * aperture * c * c / wavelength
}

/// Angle-specific second-order boundary:
/// sqrt(D^3 / wavelength * (x - x^3)) with x = sin(zenith) sin(azimuth).
/// A negative radicand means the approximation holds at any range and the
/// boundary collapses to zero.
pub fn fresnel_general(aperture: f64, wavelength: f64, zenith: f64, azimuth: f64) -> f64 {
    let x = zenith.sin() * azimuth.sin();
    let radicand = aperture.powi(3) / wavelength * (x - x * x * x);
    if radicand <= 0.0 {
        0.0
    } else {
        radicand.sqrt()
    }
}

// ---------------------------------------------------------------------------
// Maximum angle deviations and angle boundaries
// ---------------------------------------------------------------------------

/// Largest zenith-angle deviation across an aperture of size `aperture`
/// seen from range `r` at elevation `elevation` (radians, measured from the
/// plane perpendicular to the aperture). Symmetric in the elevation sign.
pub fn mad_zenith(r: f64, aperture: f64, elevation: f64) -> Result<f64> {
    if !(r > 0.0) || !(aperture > 0.0) {
        return Err(Error::domain("range and aperture must be > 0"));
    }
    let t = elevation.abs();
    let rho = r / aperture;
    Ok(t - (rho * t.sin() - 0.5).atan2(rho * t.cos()))
}

/// Range beyond which the zenith-angle deviation stays below half the
/// vertical beamwidth: D / (2 [sin e - tan(e - hpbw_v/2) cos e]).
/// Returns 0 when the deviation is acceptable at every range (beam wide
/// enough that the bracket's tangent argument passes -pi/2) and +inf when
/// no range satisfies it.
pub fn zenith_boundary(aperture: f64, elevation: f64, hpbw_v: f64) -> f64 {
    let t = elevation.abs();
    let arg = t - hpbw_v / 2.0;
    if arg <= -FRAC_PI_2 {
        return 0.0;
    }
    if arg >= FRAC_PI_2 {
        return f64::INFINITY;
    }
    let denom = t.sin() - arg.tan() * t.cos();
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        aperture / (2.0 * denom)
    }
}

/// Largest azimuth-angle deviation between the array center and its
/// outermost elements, as seen toward the scatterer (local frame). For grid
/// layouts the deviation is evaluated at the vertex elements; for circular
/// layouts it is the tangent-line half-angle asin(R / (r sin(zenith))).
/// Returns pi (a deviation no beamwidth accepts) when the scatterer's
/// in-plane projection is degenerate: on the circle or inside it, or on a
/// vertex or the center.
pub fn mad_azimuth(geom: &ArrayGeometry, sc: &ScattererSpherical) -> f64 {
    let w = sc.position_local();
    let projected = (w.x * w.x + w.y * w.y).sqrt();
    if let ArrayKind::Uca = geom.kind {
        if projected <= geom.radius {
            return PI;
        }
        return (geom.radius / projected).asin();
    }
    if projected <= 0.0 {
        return PI;
    }
    let center_az = w.y.atan2(w.x);
    let mut max_dev = 0.0f64;
    for v in geom.vertex_elements_local() {
        let dx = w.x - v.x;
        let dy = w.y - v.y;
        if dx == 0.0 && dy == 0.0 {
            return PI;
        }
        let dev = wrap_azimuth(dy.atan2(dx) - center_az).abs();
        max_dev = max_dev.max(dev);
    }
    max_dev
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Which boundary feeds the two path-length flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DelayBoundaryMode {
    /// Direction-independent worst case (default; conservative).
    #[default]
    WorstCase,
    /// Angle-specific boundaries evaluated at the scatterer's local angles.
    AngleSpecific,
}

/// Near- or far-field, per parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRegion {
    Near,
    Far,
}

impl std::fmt::Display for FieldRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FieldRegion::Near => "NF",
            FieldRegion::Far => "FF",
        })
    }
}

/// Per-parameter classification of one scatterer against one array.
#[derive(Debug, Clone)]
pub struct NfFfReport {
    /// Scatterer range from the array center (meters).
    pub r: f64,
    /// First-order path-length boundary used (meters).
    pub rayleigh_boundary: f64,
    /// Second-order path-length boundary used (meters).
    pub fresnel_boundary: f64,
    /// Zenith-angle boundary (meters; 0 = always far, +inf = always near).
    pub zenith_boundary: f64,
    /// Azimuth deviation at the outermost elements (radians).
    pub azimuth_mad: f64,
    /// Azimuth acceptance threshold, half the horizontal beamwidth (radians).
    pub azimuth_threshold: f64,
    /// Path length under the first-order expansion.
    pub delay_t1: FieldRegion,
    /// Path length under the second-order expansion.
    pub delay_t2: FieldRegion,
    pub zenith: FieldRegion,
    pub azimuth: FieldRegion,
}

fn region(far: bool) -> FieldRegion {
    if far {
        FieldRegion::Far
    } else {
        FieldRegion::Near
    }
}

/// Signed elevation of the scatterer relative to the array, from its local
/// spherical coordinates: the component along the element axis for a linear
/// array, the component along the broadside normal otherwise.
pub fn elevation_from_spherical(geom: &ArrayGeometry, sc: &ScattererSpherical) -> f64 {
    let u = sc.unit_local();
    let s = match geom.kind {
        ArrayKind::Ula => u.y,
        ArrayKind::Upa | ArrayKind::Uca => u.z,
    };
    s.clamp(-1.0, 1.0).asin()
}

/// Classify a scatterer with worst-case path-length boundaries.
pub fn classify(
    geom: &ArrayGeometry,
    sc: &ScattererSpherical,
    antenna: &AntennaSpec,
    wavelength: f64,
) -> Result<NfFfReport> {
    classify_with(geom, sc, antenna, wavelength, DelayBoundaryMode::WorstCase)
}

/// Classify a scatterer, selecting how the path-length boundaries are
/// evaluated. Every flag compares the scatterer range (or angle deviation)
/// against its own boundary.
pub fn classify_with(
    geom: &ArrayGeometry,
    sc: &ScattererSpherical,
    antenna: &AntennaSpec,
    wavelength: f64,
    mode: DelayBoundaryMode,
) -> Result<NfFfReport> {
    if !(wavelength > 0.0) {
        return Err(Error::config("scenario.wavelength", "wavelength must be > 0"));
    }
    let aperture = geom.aperture();
    let (rayleigh, fresnel) = match mode {
        DelayBoundaryMode::WorstCase => (
            rayleigh_worst(aperture, wavelength),
            fresnel_worst(aperture, wavelength),
        ),
        DelayBoundaryMode::AngleSpecific => (
            rayleigh_general(aperture, wavelength, sc.zenith),
            fresnel_general(aperture, wavelength, sc.zenith, sc.azimuth),
        ),
    };
    let elevation = elevation_from_spherical(geom, sc);
    let zb = if aperture > 0.0 {
        zenith_boundary(aperture, elevation, antenna.hpbw_v)
    } else {
        0.0
    };
    let mad_az = if aperture > 0.0 { mad_azimuth(geom, sc) } else { 0.0 };
    let threshold = antenna.hpbw_h / 2.0;
    let report = NfFfReport {
        r: sc.r,
        rayleigh_boundary: rayleigh,
        fresnel_boundary: fresnel,
        zenith_boundary: zb,
        azimuth_mad: mad_az,
        azimuth_threshold: threshold,
        delay_t1: region(sc.r > rayleigh),
        delay_t2: region(sc.r > fresnel),
        zenith: region(sc.r > zb),
        azimuth: region(mad_az < threshold),
    };
    // The second-order expansion holds wherever the first-order one does,
    // provided the aperture is at least wavelength-sized.
    debug_assert!(
        aperture < wavelength
            || mode == DelayBoundaryMode::AngleSpecific
            || report.delay_t1 == FieldRegion::Near
            || report.delay_t2 == FieldRegion::Far
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
