//! Element-to-scatterer range: exact spherical-wave distance and its
//! far-field approximations (first/second-order expansions and the
//! per-sub-array expansion), plus phase-error profiling across an array.
//!
//! All distances are computed in the array's local frame; the scatterer is
//! given in spherical coordinates relative to the array center.

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, ArrayKind, ScattererSpherical};
use crate::vec3::{vec3, Vec3};

/// How the per-element range to a scatterer is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeMethod {
    /// Exact Euclidean distance (spherical wavefront).
    Exact,
    /// First-order expansion r - u.p (planar wavefront).
    Taylor1,
    /// Second-order expansion r - u.p + (|p|^2 - (u.p)^2) / (2r).
    Taylor2,
    /// Exact range at each sub-array center, first-order expansion within
    /// each sub-array. Block counts must divide the row/column counts.
    SubArray { row_blocks: usize, col_blocks: usize },
}

impl RangeMethod {
    /// Stable lowercase label for reports and CSV headers.
    pub fn label(&self) -> &'static str {
        match self {
            RangeMethod::Exact => "exact",
            RangeMethod::Taylor1 => "taylor1",
            RangeMethod::Taylor2 => "taylor2",
            RangeMethod::SubArray { .. } => "subarray",
        }
    }
}

/// Per-element phase error of an approximation against the exact range,
/// in radians at a given wavelength.
#[derive(Debug, Clone)]
pub struct PhaseErrorProfile {
    pub wavelength: f64,
    pub method: RangeMethod,
    /// Phase error per element, indexed like the element positions.
    pub errors: Vec<f64>,
}

impl PhaseErrorProfile {
    /// Largest per-element phase error in radians.
    pub fn max_error(&self) -> f64 {
        self.errors.iter().cloned().fold(0.0, f64::max)
    }
}

fn element_local(geom: &ArrayGeometry, s: usize) -> Result<Vec3> {
    geom.element_positions_local()
        .get(s)
        .copied()
        .ok_or_else(|| Error::domain(format!("element index {s} out of range")))
}

/// Exact distance from element `s` to the scatterer (meters).
pub fn exact_distance(geom: &ArrayGeometry, s: usize, sc: &ScattererSpherical) -> Result<f64> {
    let p = element_local(geom, s)?;
    Ok((sc.position_local() - p).norm())
}

/// First-order (planar wavefront) distance: r - u.p.
pub fn taylor1_distance(geom: &ArrayGeometry, s: usize, sc: &ScattererSpherical) -> Result<f64> {
    let p = element_local(geom, s)?;
    Ok(sc.r - sc.unit_local().dot(p))
}

/// Second-order distance: adds (|p|^2 - (u.p)^2) / (2r) to the first order.
pub fn taylor2_distance(geom: &ArrayGeometry, s: usize, sc: &ScattererSpherical) -> Result<f64> {
    let p = element_local(geom, s)?;
    let b = sc.unit_local().dot(p);
    Ok(sc.r - b + (p.norm_sq() - b * b) / (2.0 * sc.r))
}

/// Sub-array block center (local frame) for element `s` in a grid split into
/// `row_blocks` x `col_blocks` blocks.
fn subarray_center(
    geom: &ArrayGeometry,
    s: usize,
    row_blocks: usize,
    col_blocks: usize,
) -> Result<Vec3> {
    if geom.kind == ArrayKind::Uca {
        return Err(Error::config(
            "range.method",
            "sub-array ranging requires a grid layout (linear or planar array)",
        ));
    }
    if row_blocks == 0 || col_blocks == 0 {
        return Err(Error::config("range.method", "sub-array block counts must be >= 1"));
    }
    if geom.rows % row_blocks != 0 || geom.cols % col_blocks != 0 {
        return Err(Error::config(
            "range.method",
            format!(
                "sub-array split {row_blocks}x{col_blocks} does not divide the {}x{} grid",
                geom.rows, geom.cols
            ),
        ));
    }
    let rows_per = geom.rows / row_blocks;
    let cols_per = geom.cols / col_blocks;
    let m = s / geom.cols;
    let n = s % geom.cols;
    let block_m0 = (m / rows_per) * rows_per;
    let block_n0 = (n / cols_per) * cols_per;
    let cm = block_m0 as f64 + (rows_per as f64 - 1.0) / 2.0;
    let cn = block_n0 as f64 + (cols_per as f64 - 1.0) / 2.0;
    Ok(vec3(
        (cm - (geom.rows as f64 - 1.0) / 2.0) * geom.spacing,
        (cn - (geom.cols as f64 - 1.0) / 2.0) * geom.spacing,
        0.0,
    ))
}

/// Sub-array distance: exact range to the element's sub-array center, then a
/// first-order expansion (around that center) for the element offset.
pub fn subarray_distance(
    geom: &ArrayGeometry,
    s: usize,
    sc: &ScattererSpherical,
    row_blocks: usize,
    col_blocks: usize,
) -> Result<f64> {
    let p = element_local(geom, s)?;
    let center = subarray_center(geom, s, row_blocks, col_blocks)?;
    let v = sc.position_local() - center;
    let rk = v.norm();
    if rk <= 0.0 {
        return Err(Error::domain("scatterer coincides with a sub-array center"));
    }
    Ok(rk - (v / rk).dot(p - center))
}

/// Range by the selected method.
pub fn distance(
    geom: &ArrayGeometry,
    s: usize,
    sc: &ScattererSpherical,
    method: RangeMethod,
) -> Result<f64> {
    match method {
        RangeMethod::Exact => exact_distance(geom, s, sc),
        RangeMethod::Taylor1 => taylor1_distance(geom, s, sc),
        RangeMethod::Taylor2 => taylor2_distance(geom, s, sc),
        RangeMethod::SubArray { row_blocks, col_blocks } => {
            subarray_distance(geom, s, sc, row_blocks, col_blocks)
        }
    }
}

/// Magnitude of the first path-length term the first-order expansion drops:
/// (|p|^2 - (u.p)^2) / (2r), in meters.
pub fn taylor1_omitted_term(geom: &ArrayGeometry, s: usize, sc: &ScattererSpherical) -> Result<f64> {
    let p = element_local(geom, s)?;
    let b = sc.unit_local().dot(p);
    Ok((p.norm_sq() - b * b) / (2.0 * sc.r))
}

/// Magnitude of the first path-length term the second-order expansion drops:
/// |u.p| (|p|^2 - (u.p)^2) / (2 r^2), in meters.
pub fn taylor2_omitted_term(geom: &ArrayGeometry, s: usize, sc: &ScattererSpherical) -> Result<f64> {
    let p = element_local(geom, s)?;
    let b = sc.unit_local().dot(p);
    Ok(b.abs() * (p.norm_sq() - b * b) / (2.0 * sc.r * sc.r))
}

/// Largest omitted-term magnitude over every possible scatterer direction,
/// for an element at offset `half_aperture` from the array center and a
/// scatterer at range `r` (meters). For the first-order expansion this is
/// a^2 / (2r), attained near broadside; for the second order it is
/// a^3 / (3 sqrt(3) r^2), attained at u.p = a / sqrt(3).
pub fn worst_case_deviation(half_aperture: f64, r: f64, method: RangeMethod) -> Result<f64> {
    let a = half_aperture;
    match method {
        RangeMethod::Exact => Ok(0.0),
        RangeMethod::Taylor1 => Ok(a * a / (2.0 * r)),
        RangeMethod::Taylor2 => Ok(a * a * a / (3.0 * 3.0_f64.sqrt() * r * r)),
        RangeMethod::SubArray { .. } => Err(Error::config(
            "range.method",
            "worst-case deviation is defined for the expansion methods only",
        )),
    }
}

/// Per-element phase error of `method` against the exact range, in radians:
/// (2 pi / wavelength) * |approx - exact|.
pub fn phase_error_profile(
    geom: &ArrayGeometry,
    sc: &ScattererSpherical,
    wavelength: f64,
    method: RangeMethod,
) -> Result<PhaseErrorProfile> {
    if !(wavelength > 0.0) {
        return Err(Error::config("scenario.wavelength", "wavelength must be > 0"));
    }
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let count = geom.element_count();
    let mut errors = Vec::with_capacity(count);
    for s in 0..count {
        let approx = distance(geom, s, sc, method)?;
        let exact = exact_distance(geom, s, sc)?;
        errors.push(k * (approx - exact).abs());
    }
    Ok(PhaseErrorProfile { wavelength, method, errors })
}

/// Smallest element count at which a centered linear array (spacing `d`,
/// grown symmetrically one element at a time) can no longer guarantee a
/// phase error below pi/8 for every scatterer direction at range `r`.
/// The guarantee uses the direction-independent worst case of the method's
/// omitted term, so the count depends only on aperture, range, and
/// wavelength. Returns None if no crossing occurs up to `max_elements`.
pub fn pi8_guarantee_crossing(
    d: f64,
    wavelength: f64,
    r: f64,
    method: RangeMethod,
    max_elements: usize,
) -> Result<Option<usize>> {
    if !(d > 0.0) || !(wavelength > 0.0) || !(r > 0.0) {
        return Err(Error::domain("spacing, wavelength, and range must all be > 0"));
    }
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let threshold = std::f64::consts::PI / 8.0;
    for n in 2..=max_elements {
        let half_aperture = (n as f64 - 1.0) * d / 2.0;
        let dev = worst_case_deviation(half_aperture, r, method)?;
        if k * dev > threshold {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
