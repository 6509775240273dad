//! Post-processing: power-delay profiles with path extraction, spatial
//! correlation and effective degrees of freedom, field-region probability
//! sweeps over array/frequency/distance grids, and statistics comparing
//! tiered against far-field-only synthesis.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::cluster_gen::{generate, generate_clusters, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, SPEED_OF_LIGHT};
use crate::vec3::{vec3, Vec3};
use crate::nf_boundary::{classify_with, AntennaSpec, DelayBoundaryMode, FieldRegion};
use crate::seeding::{stream, STREAM_COMPARE, STREAM_SWEEP};
use crate::synthesis::{assemble, ChannelRealization, SynthesisInputs, SynthesisMode, XfGainConfig};
use crate::twin_scatterer::place_twins;

/// Taper applied across the frequency grid before the inverse transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rect,
    Hann,
}

fn window_weights(window: Window, n: usize) -> Vec<f64> {
    match window {
        Window::Rect => vec![1.0; n],
        Window::Hann => (0..n)
            .map(|j| {
                if n == 1 {
                    1.0
                } else {
                    0.5 * (1.0 - (TAU * j as f64 / (n - 1) as f64).cos())
                }
            })
            .collect(),
    }
}

/// Delay-bin width resolvable from a sweep of the given bandwidth (seconds).
pub fn delay_resolution(bandwidth: f64) -> f64 {
    1.0 / bandwidth
}

/// Longest unambiguous path length for the given frequency step (meters).
pub fn max_unambiguous_range(freq_step: f64) -> f64 {
    SPEED_OF_LIGHT / freq_step
}

/// One extracted path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mpc {
    /// Row (scan angle) the path was found in.
    pub angle_index: usize,
    /// Delay-bin center (seconds).
    pub delay: f64,
    pub power_db: f64,
}

/// Power over (scan angle, delay) derived from frequency sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Pdap {
    /// Delay-bin centers (seconds), k/(N*freq_step).
    pub delay_bins: Vec<f64>,
    /// Scan angles (radians), one per row.
    pub angle_bins: Vec<f64>,
    /// Power in dB, row per angle, column per delay bin.
    pub power_db: Vec<Vec<f64>>,
    /// Detection threshold: strongest bin minus the configured margin (dB).
    pub noise_threshold_db: f64,
}

impl Pdap {
    /// Local delay-axis maxima above the noise threshold.
    pub fn detect_mpcs(&self) -> Vec<Mpc> {
        let mut out = Vec::new();
        for (ai, row) in self.power_db.iter().enumerate() {
            for k in 0..row.len() {
                let p = row[k];
                if p < self.noise_threshold_db {
                    continue;
                }
                // Ties count on both sides so that equal-power paths in
                // adjacent bins are reported separately.
                let left_ok = k == 0 || row[k - 1] <= p;
                let right_ok = k + 1 == row.len() || row[k + 1] <= p;
                if left_ok && right_ok {
                    out.push(Mpc {
                        angle_index: ai,
                        delay: self.delay_bins[k],
                        power_db: p,
                    });
                }
            }
        }
        out
    }
}

/// Inverse-transform frequency sweeps (one row per scan angle) into a
/// power-delay-angle map and set the detection threshold `threshold_db`
/// below the strongest bin. The frequency grid must be uniform.
pub fn pdap(
    scans: &[Vec<Complex64>],
    angles: &[f64],
    freqs: &[f64],
    window: Window,
    threshold_db: f64,
) -> Result<Pdap> {
    if scans.is_empty() {
        return Err(Error::domain("no frequency scans supplied"));
    }
    if scans.len() != angles.len() {
        return Err(Error::domain(format!(
            "{} scans but {} scan angles",
            scans.len(),
            angles.len()
        )));
    }
    let n = freqs.len();
    if n < 2 {
        return Err(Error::domain("frequency grid needs at least two points"));
    }
    let step = freqs[1] - freqs[0];
    if !(step > 0.0) {
        return Err(Error::domain("frequency grid must be increasing"));
    }
    for w in freqs.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-6 * step {
            return Err(Error::domain("frequency grid must be uniform"));
        }
    }
    for row in scans {
        if row.len() != n {
            return Err(Error::domain("scan length does not match frequency grid"));
        }
    }
    let weights = window_weights(window, n);
    let weight_sum: f64 = weights.iter().sum();
    let delay_bins: Vec<f64> = (0..n).map(|k| k as f64 / (n as f64 * step)).collect();
    let mut power_db = Vec::with_capacity(scans.len());
    let mut max_db = f64::NEG_INFINITY;
    for row in scans {
        let mut out = Vec::with_capacity(n);
        for &tau in &delay_bins {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, h) in row.iter().enumerate() {
                acc += h * weights[j] * Complex64::from_polar(1.0, TAU * freqs[j] * tau);
            }
            let p = 20.0 * (acc.norm() / weight_sum).log10();
            if p > max_db {
                max_db = p;
            }
            out.push(p);
        }
        power_db.push(out);
    }
    Ok(Pdap {
        delay_bins,
        angle_bins: angles.to_vec(),
        power_db,
        noise_threshold_db: max_db - threshold_db,
    })
}

/// Correlation matrix of the rows of `h`: entry (i, j) is the inner product
/// of rows i and j normalized by their norms, giving a Hermitian matrix
/// with unit diagonal.
pub fn spatial_correlation(h: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    if h.is_empty() {
        return Err(Error::domain("correlation input has no rows"));
    }
    let len = h[0].len();
    let mut norms = Vec::with_capacity(h.len());
    for (i, row) in h.iter().enumerate() {
        if row.len() != len {
            return Err(Error::domain(format!("row {i} length differs")));
        }
        let norm = row.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::domain(format!("row {i} has zero norm")));
        }
        norms.push(norm);
    }
    let s = h.len();
    let mut r = vec![vec![Complex64::new(0.0, 0.0); s]; s];
    for i in 0..s {
        r[i][i] = Complex64::new(1.0, 0.0);
        for j in (i + 1)..s {
            let dot: Complex64 = h[i]
                .iter()
                .zip(&h[j])
                .map(|(a, b)| a * b.conj())
                .sum();
            let v = dot / (norms[i] * norms[j]);
            r[i][j] = v;
            r[j][i] = v.conj();
        }
    }
    Ok(r)
}

/// Effective degrees of freedom of a correlation matrix:
/// `(trace / Frobenius norm)^2`.
pub fn edof(r: &[Vec<Complex64>]) -> f64 {
    let trace: f64 = (0..r.len()).map(|i| r[i][i].re).sum();
    let frob: f64 = r
        .iter()
        .flat_map(|row| row.iter().map(|x| x.norm_sqr()))
        .sum::<f64>()
        .sqrt();
    (trace / frob).powi(2)
}

/// One transmit-array layout in a sweep or comparison grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayLayout {
    pub label: String,
    pub rows: usize,
    pub cols: usize,
}

impl ArrayLayout {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            label: format!("{rows}x{cols}"),
            rows,
            cols,
        }
    }
}

/// Default mounting height of the transmit-array center (meters): large
/// facade layouts sit higher than the standard rooftop mount.
pub fn default_tx_height(rows: usize, cols: usize) -> f64 {
    if (rows, cols) == (9, 21) {
        31.5
    } else {
        25.0
    }
}

/// Wall-mounted planar transmit array: element grid in the global y-z
/// plane, broadside along +x, centered at the given height.
pub fn wall_array(rows: usize, cols: usize, spacing: f64, height: f64) -> Result<ArrayGeometry> {
    Ok(ArrayGeometry::upa(rows, cols, spacing)?
        .with_center(vec3(0.0, 0.0, height))
        .with_orientation(Vec3::Y, Vec3::Z)?)
}

/// Grid for the field-region probability sweep.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub arrays: Vec<ArrayLayout>,
    pub freqs_hz: Vec<f64>,
    pub d2d_m: Vec<f64>,
    /// Independent drops per grid cell.
    pub trials: usize,
    pub spacing_m: f64,
    pub rx_height_m: f64,
    /// Transmit-array center height; defaults per layout when absent.
    pub tx_height_m: Option<f64>,
    /// Cluster statistics template; carrier and endpoints are overridden
    /// per cell.
    pub scenario: ScenarioConfig,
    /// Antenna whose beamwidths drive the angle classifications.
    pub classify: AntennaSpec,
    pub boundary_mode: DelayBoundaryMode,
}

/// Field-region fractions of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub array: String,
    pub f_hz: f64,
    pub d2d_m: f64,
    /// Fraction of first-bounce scatterers beyond the first-order
    /// path-length boundary.
    pub ff_frac_delay: f64,
    /// Fraction beyond the departure-zenith boundary.
    pub ff_frac_eod: f64,
    /// Fraction inside the departure-azimuth acceptance.
    pub ff_frac_aod: f64,
    pub trials: usize,
    pub scatterers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
}

/// Classify every first-bounce scatterer of every drop on the grid.
///
/// Stream derivation: each (cell, trial) pair draws from its own stream of
/// the master seed, so results do not depend on evaluation order. Within a
/// trial the clusters are drawn first, then the scatterer pairs.
pub fn nf_probability_sweep(grid: &SweepGrid, master_seed: u64) -> Result<SweepResult> {
    if grid.arrays.is_empty() || grid.freqs_hz.is_empty() || grid.d2d_m.is_empty() {
        return Err(Error::domain("sweep grid is empty"));
    }
    if grid.trials == 0 {
        return Err(Error::config("sweep.trials", "trial count must be >= 1"));
    }
    let mut cells = Vec::new();
    for (ai, layout) in grid.arrays.iter().enumerate() {
        let tx_height = grid
            .tx_height_m
            .unwrap_or_else(|| default_tx_height(layout.rows, layout.cols));
        let geom = wall_array(layout.rows, layout.cols, grid.spacing_m, tx_height)?;
        for (fi, &f_hz) in grid.freqs_hz.iter().enumerate() {
            for (di, &d2d) in grid.d2d_m.iter().enumerate() {
                let cell_index =
                    ((ai * grid.freqs_hz.len() + fi) * grid.d2d_m.len() + di) as u64;
                let mut scenario = grid.scenario.clone();
                scenario.carrier_hz = f_hz;
                scenario.tx_center = vec3(0.0, 0.0, tx_height);
                scenario.rx_center = vec3(d2d, 0.0, grid.rx_height_m);
                scenario.validate()?;
                let lambda = scenario.wavelength();
                let (mut n_delay, mut n_eod, mut n_aod, mut total) = (0usize, 0usize, 0usize, 0usize);
                for trial in 0..grid.trials {
                    let mut rng = stream(master_seed, &[STREAM_SWEEP, cell_index, trial as u64]);
                    let set = generate_clusters(&scenario, &mut rng)?;
                    let twins = place_twins(&scenario, &set, &mut rng)?;
                    for twin in &twins {
                        let sc = geom.relative_position(twin.fbs)?;
                        let report =
                            classify_with(&geom, &sc, &grid.classify, lambda, grid.boundary_mode)?;
                        total += 1;
                        if report.delay_t1 == FieldRegion::Far {
                            n_delay += 1;
                        }
                        if report.zenith == FieldRegion::Far {
                            n_eod += 1;
                        }
                        if report.azimuth == FieldRegion::Far {
                            n_aod += 1;
                        }
                    }
                }
                cells.push(SweepCell {
                    array: layout.label.clone(),
                    f_hz,
                    d2d_m: d2d,
                    ff_frac_delay: n_delay as f64 / total as f64,
                    ff_frac_eod: n_eod as f64 / total as f64,
                    ff_frac_aod: n_aod as f64 / total as f64,
                    trials: grid.trials,
                    scatterers: total / grid.trials,
                });
            }
        }
    }
    Ok(SweepResult { cells })
}

/// Per-path differences between two realizations of the same drop:
/// phase (radians, in (-2*pi, 2*pi)) and amplitude ratio (dB) of `b`
/// relative to `a`, per coefficient.
pub fn cf_ff_compare(
    a: &ChannelRealization,
    b: &ChannelRealization,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.coefficients.len() != b.coefficients.len()
        || a.tx_elements != b.tx_elements
        || a.rx_elements != b.rx_elements
    {
        return Err(Error::internal("realizations have mismatched structure"));
    }
    let mut phase = Vec::with_capacity(a.coefficients.len());
    let mut gain = Vec::with_capacity(a.coefficients.len());
    for (ca, cb) in a.coefficients.iter().zip(&b.coefficients) {
        if (ca.u, ca.s, ca.cluster, ca.ray) != (cb.u, cb.s, cb.cluster, cb.ray) {
            return Err(Error::internal("realizations have mismatched path order"));
        }
        phase.push(cb.gain.arg() - ca.gain.arg());
        gain.push(20.0 * (cb.gain.norm() / ca.gain.norm()).log10());
    }
    Ok((phase, gain))
}

/// Median of the absolute values of a sample set.
pub fn median_abs(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Grid for the tiered-versus-far-field comparison.
#[derive(Debug, Clone)]
pub struct CompareGrid {
    pub arrays: Vec<ArrayLayout>,
    pub freqs_hz: Vec<f64>,
    pub d2d_m: Vec<f64>,
    /// Independent drops pooled per cell.
    pub seeds_per_cell: usize,
    pub spacing_m: f64,
    pub rx_height_m: f64,
    pub tx_height_m: Option<f64>,
    pub scenario: ScenarioConfig,
    pub classify: AntennaSpec,
    pub tx_antenna: AntennaSpec,
    pub rx_antenna: AntennaSpec,
    pub boundary_mode: DelayBoundaryMode,
}

/// Pooled differences of one comparison cell: far-field-only synthesis
/// relative to the tiered cascade, over every path term and drop.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareCell {
    pub array: String,
    pub f_hz: f64,
    pub d2d_m: f64,
    pub phase_diffs: Vec<f64>,
    pub gain_diffs_db: Vec<f64>,
}

impl CompareCell {
    pub fn median_abs_phase(&self) -> f64 {
        median_abs(&self.phase_diffs)
    }
    pub fn median_abs_gain_db(&self) -> f64 {
        median_abs(&self.gain_diffs_db)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareResult {
    pub cells: Vec<CompareCell>,
}

/// Synthesize each drop twice from identical inputs — once with the tiered
/// cascade, once forced far-field — and pool the per-path differences.
pub fn cf_ff_compare_grid(grid: &CompareGrid, master_seed: u64) -> Result<CompareResult> {
    if grid.arrays.is_empty() || grid.freqs_hz.is_empty() || grid.d2d_m.is_empty() {
        return Err(Error::domain("comparison grid is empty"));
    }
    if grid.seeds_per_cell == 0 {
        return Err(Error::config("compare.seeds", "seed count must be >= 1"));
    }
    let xf = XfGainConfig::default();
    let mut cells = Vec::new();
    for (ai, layout) in grid.arrays.iter().enumerate() {
        let tx_height = grid
            .tx_height_m
            .unwrap_or_else(|| default_tx_height(layout.rows, layout.cols));
        let tx = wall_array(layout.rows, layout.cols, grid.spacing_m, tx_height)?;
        for (fi, &f_hz) in grid.freqs_hz.iter().enumerate() {
            for (di, &d2d) in grid.d2d_m.iter().enumerate() {
                let cell_index =
                    ((ai * grid.freqs_hz.len() + fi) * grid.d2d_m.len() + di) as u64;
                let mut scenario = grid.scenario.clone();
                scenario.carrier_hz = f_hz;
                scenario.tx_center = vec3(0.0, 0.0, tx_height);
                scenario.rx_center = vec3(d2d, 0.0, grid.rx_height_m);
                scenario.validate()?;
                let rx = ArrayGeometry::ula(1, 1.0)?.with_center(scenario.rx_center);
                let mut phase_diffs = Vec::new();
                let mut gain_diffs = Vec::new();
                for k in 0..grid.seeds_per_cell {
                    let mut rng =
                        stream(master_seed, &[STREAM_COMPARE, cell_index, k as u64]);
                    let set = generate(&scenario, &mut rng)?;
                    let twins = place_twins(&scenario, &set, &mut rng)?;
                    let mut inputs = SynthesisInputs {
                        scenario: &scenario,
                        tx: &tx,
                        rx: &rx,
                        tx_antenna: &grid.tx_antenna,
                        rx_antenna: &grid.rx_antenna,
                        classify_antenna: &grid.classify,
                        clusters: &set,
                        twins: &twins,
                        mode: SynthesisMode::Cascade,
                        boundary_mode: grid.boundary_mode,
                        xf: &xf,
                        time: 0.0,
                        seed: master_seed,
                        config_hash: 0,
                    };
                    let cascade = assemble(&inputs)?;
                    inputs.mode = SynthesisMode::ForceFf;
                    let far = assemble(&inputs)?;
                    let (p, g) = cf_ff_compare(&cascade, &far)?;
                    phase_diffs.extend(p);
                    gain_diffs.extend(g);
                }
                cells.push(CompareCell {
                    array: layout.label.clone(),
                    f_hz,
                    d2d_m: d2d,
                    phase_diffs,
                    gain_diffs_db: gain_diffs,
                });
            }
        }
    }
    Ok(CompareResult { cells })
}
