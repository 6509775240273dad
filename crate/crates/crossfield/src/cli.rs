//! Command-line interface: argument parsing, run orchestration, and result
//! emission.
//!
//! Every run writes a `manifest.toml` provenance sidecar into the output
//! directory before any result file, then one or more CSV tables. Given the
//! same configuration, seed, and arguments, result files are byte-identical
//! across runs; wall-clock information exists only in the manifest.
//! Exit codes: 0 success, 1 runtime failure, 2 configuration failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::analysis::{cf_ff_compare_grid, edof, nf_probability_sweep, spatial_correlation};
use crate::cluster_gen::generate;
use crate::config::{self, RunConfig};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, ScattererSpherical, SPEED_OF_LIGHT};
use crate::nf_boundary::{
    fresnel_general, fresnel_worst, rayleigh_general, rayleigh_worst, zenith_boundary,
};
use crate::output::{float_field, histogram, write_file, Csv, RunManifest};
use crate::range_approx::{phase_error_profile, pi8_guarantee_crossing, RangeMethod};
use crate::seeding::{stream, STREAM_DROP};
use crate::synthesis::{
    assemble, frequency_response, xf_gain_factor, SynthesisInputs, SynthesisMode, XfGainConfig,
};
use crate::twin_scatterer::place_twins;

#[derive(Debug, Parser)]
#[command(
    name = "crossfield",
    version,
    about = "Deterministic cross near-/far-field channel simulator for very large antenna arrays"
)]
struct Cli {
    /// TOML configuration file; omitted means documented defaults.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for the manifest and result files.
    #[arg(long, global = true, default_value = "out")]
    out: String,

    /// Override sweep trials per cell and comparison drops per cell.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Synthesize with far-field approximations everywhere.
    #[arg(long, global = true, conflicts_with = "force_exact")]
    force_ff: bool,

    /// Synthesize every per-element parameter exactly.
    #[arg(long, global = true)]
    force_exact: bool,

    /// Also write scatterer placements (generate).
    #[arg(long, global = true)]
    dump_scatterers: bool,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Field-region boundary curves over a log-spaced aperture grid.
    Boundaries(BoundariesArgs),
    /// Per-element range-approximation phase errors and pi/8 crossings.
    PhaseError(PhaseErrorArgs),
    /// One channel realization: per-path coefficients, optional frequency
    /// response, optional scatterer dump.
    Generate(GenerateArgs),
    /// Field-region probability sweep over arrays, bands, and distances.
    NfProb,
    /// Far-field-only vs tiered synthesis differences over the comparison
    /// grid.
    CompareFf,
    /// Effective degrees of freedom of a stored frequency response.
    Edof(EdofArgs),
    /// Built-in golden-number checks.
    Selftest,
}

#[derive(Debug, clap::Args)]
struct BoundariesArgs {
    /// Smallest aperture diagonal, meters.
    #[arg(long, default_value_t = 0.1)]
    d_min: f64,
    /// Largest aperture diagonal, meters.
    #[arg(long, default_value_t = 100.0)]
    d_max: f64,
    /// Number of log-spaced aperture samples.
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Carrier frequency, Hz.
    #[arg(long, default_value_t = 100e9)]
    freq: f64,
    /// Scatterer elevation above the aperture plane, degrees.
    #[arg(long, default_value_t = 45.0)]
    elevation_deg: f64,
    /// Scatterer azimuth, degrees.
    #[arg(long, default_value_t = 90.0)]
    azimuth_deg: f64,
    /// Vertical half-power beamwidth for the angle boundary, degrees.
    #[arg(long, default_value_t = 120.0)]
    hpbw_v_deg: f64,
}

#[derive(Debug, clap::Args)]
struct PhaseErrorArgs {
    /// Element count of the evaluated line array.
    #[arg(long, default_value_t = 256)]
    elements: usize,
    /// Carrier frequency, Hz.
    #[arg(long, default_value_t = 100e9)]
    freq: f64,
    /// Element spacing, meters; omitted means half the wavelength.
    #[arg(long)]
    spacing_m: Option<f64>,
    /// Scatterer range from the array center, meters.
    #[arg(long, default_value_t = 5.0)]
    range_m: f64,
    /// Scatterer zenith angle, degrees.
    #[arg(long, default_value_t = 45.0)]
    zenith_deg: f64,
    /// Scatterer azimuth angle, degrees.
    #[arg(long, default_value_t = 0.0)]
    azimuth_deg: f64,
    /// Sub-array row blocks.
    #[arg(long, default_value_t = 1)]
    row_blocks: usize,
    /// Sub-array column blocks.
    #[arg(long, default_value_t = 4)]
    col_blocks: usize,
    /// Upper element-count limit for the pi/8 crossing search.
    #[arg(long, default_value_t = 2048)]
    max_elements: usize,
}

#[derive(Debug, clap::Args)]
struct GenerateArgs {
    /// Frequency samples for the optional response table; 0 skips it.
    #[arg(long, default_value_t = 0)]
    cfr_points: usize,
    /// Frequency step of the response table, Hz.
    #[arg(long, default_value_t = 30e6)]
    cfr_step_hz: f64,
}

#[derive(Debug, clap::Args)]
struct EdofArgs {
    /// Frequency-response CSV produced by `generate`.
    #[arg(long)]
    input: String,
}

/// Parse arguments, execute, and map failures to exit codes.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e @ Error::Config { .. }) => {
            eprintln!("{e}");
            2
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    if matches!(cli.cmd, Command::Selftest) {
        return selftest();
    }
    let mut cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(trials) = cli.trials {
        cfg.set_trials(trials)?;
    }
    let mode = if cli.force_ff {
        SynthesisMode::ForceFf
    } else if cli.force_exact {
        SynthesisMode::ForceExact
    } else {
        SynthesisMode::Cascade
    };
    let out_dir = PathBuf::from(&cli.out);
    match &cli.cmd {
        Command::Boundaries(args) => boundaries(&cfg, args, &out_dir),
        Command::PhaseError(args) => phase_error(&cfg, args, &out_dir),
        Command::Generate(args) => generate_cmd(&cfg, args, mode, cli.dump_scatterers, &out_dir),
        Command::NfProb => nf_prob(&cfg, &out_dir),
        Command::CompareFf => compare_ff(&cfg, &out_dir),
        Command::Edof(args) => edof_cmd(&cfg, args, &out_dir),
        Command::Selftest => unreachable!("handled above"),
    }
}

fn write_manifest(cfg: &RunConfig, subcommand: &str, outputs: &[&str], out_dir: &Path) -> Result<()> {
    RunManifest::new(cfg.config_hash(), cfg.scenario.seed, subcommand, outputs)
        .write(out_dir)?;
    Ok(())
}

fn boundaries(cfg: &RunConfig, args: &BoundariesArgs, out_dir: &Path) -> Result<()> {
    if args.steps < 2 {
        return Err(Error::config("boundaries.steps", "need at least 2 samples"));
    }
    if !(args.d_min > 0.0) || !(args.d_max > args.d_min) {
        return Err(Error::config("boundaries.d_min", "need 0 < d-min < d-max"));
    }
    if !(args.freq > 0.0) {
        return Err(Error::config("boundaries.freq", "frequency must be > 0"));
    }
    write_manifest(cfg, "boundaries", &["boundaries.csv"], out_dir)?;

    let wavelength = SPEED_OF_LIGHT / args.freq;
    let elevation = args.elevation_deg.to_radians();
    let zenith = std::f64::consts::FRAC_PI_2 - elevation;
    let azimuth = args.azimuth_deg.to_radians();
    let hpbw_v = args.hpbw_v_deg.to_radians();
    let ratio = args.d_max / args.d_min;

    let mut csv = Csv::new(&[
        "D_m",
        "rayleigh_worst_m",
        "fresnel_worst_m",
        "zenith_boundary_m",
        "rayleigh_general_m",
        "fresnel_general_m",
    ]);
    for i in 0..args.steps {
        let d = args.d_min * ratio.powf(i as f64 / (args.steps - 1) as f64);
        csv.push_row(&[
            float_field(d),
            float_field(rayleigh_worst(d, wavelength)),
            float_field(fresnel_worst(d, wavelength)),
            float_field(zenith_boundary(d, elevation, hpbw_v)),
            float_field(rayleigh_general(d, wavelength, zenith)),
            float_field(fresnel_general(d, wavelength, zenith, azimuth)),
        ])?;
    }
    write_file(&out_dir.join("boundaries.csv"), &csv.into_string())?;
    println!("wrote {} ({} apertures)", out_dir.join("boundaries.csv").display(), args.steps);
    Ok(())
}

fn phase_error(cfg: &RunConfig, args: &PhaseErrorArgs, out_dir: &Path) -> Result<()> {
    if !(args.freq > 0.0) {
        return Err(Error::config("phase-error.freq", "frequency must be > 0"));
    }
    write_manifest(cfg, "phase-error", &["phase_error.csv"], out_dir)?;

    let wavelength = SPEED_OF_LIGHT / args.freq;
    let spacing = args.spacing_m.unwrap_or(wavelength / 2.0);
    let geom = ArrayGeometry::ula(args.elements, spacing)?;
    let sc = ScattererSpherical::new(
        args.range_m,
        args.zenith_deg.to_radians(),
        args.azimuth_deg.to_radians(),
    )?;
    let subarray = RangeMethod::SubArray {
        row_blocks: args.row_blocks,
        col_blocks: args.col_blocks,
    };
    let t1 = phase_error_profile(&geom, &sc, wavelength, RangeMethod::Taylor1)?;
    let t2 = phase_error_profile(&geom, &sc, wavelength, RangeMethod::Taylor2)?;
    let sub = phase_error_profile(&geom, &sc, wavelength, subarray)?;

    let mut csv = Csv::new(&[
        "element_index",
        "error_taylor1_rad",
        "error_taylor2_rad",
        "error_subarray_rad",
    ]);
    for s in 0..args.elements {
        csv.push_row(&[
            s.to_string(),
            float_field(t1.errors[s]),
            float_field(t2.errors[s]),
            float_field(sub.errors[s]),
        ])?;
    }
    write_file(&out_dir.join("phase_error.csv"), &csv.into_string())?;

    for (label, method) in [("first-order", RangeMethod::Taylor1), ("second-order", RangeMethod::Taylor2)] {
        let crossing =
            pi8_guarantee_crossing(spacing, wavelength, args.range_m, method, args.max_elements)?;
        match crossing {
            Some(n) => println!("pi/8 guarantee crossing, {label}: {n} elements"),
            None => println!(
                "pi/8 guarantee crossing, {label}: none up to {} elements",
                args.max_elements
            ),
        }
    }
    println!(
        "max per-element error at {} elements: first-order {}, second-order {}, sub-array({}x{}) {}",
        args.elements,
        float_field(t1.max_error()),
        float_field(t2.max_error()),
        args.row_blocks,
        args.col_blocks,
        float_field(sub.max_error()),
    );
    Ok(())
}

fn generate_cmd(
    cfg: &RunConfig,
    args: &GenerateArgs,
    mode: SynthesisMode,
    dump_scatterers: bool,
    out_dir: &Path,
) -> Result<()> {
    let mut outputs = vec!["rays.csv"];
    if args.cfr_points > 0 {
        outputs.push("cfr.csv");
    }
    if dump_scatterers {
        outputs.push("scatterers.csv");
    }
    write_manifest(cfg, "generate", &outputs, out_dir)?;

    let mut rng = stream(cfg.scenario.seed, &[STREAM_DROP]);
    let set = generate(&cfg.scenario, &mut rng)?;
    let twins = place_twins(&cfg.scenario, &set, &mut rng)?;
    let real = assemble(&SynthesisInputs {
        scenario: &cfg.scenario,
        tx: &cfg.tx_array,
        rx: &cfg.rx_array,
        tx_antenna: &cfg.tx_antenna,
        rx_antenna: &cfg.rx_antenna,
        classify_antenna: &cfg.classify,
        clusters: &set,
        twins: &twins,
        mode,
        boundary_mode: cfg.boundary_mode,
        xf: &cfg.xf,
        time: cfg.time_s,
        seed: cfg.scenario.seed,
        config_hash: cfg.config_hash(),
    })?;

    let mut csv = Csv::new(&[
        "u",
        "s",
        "cluster",
        "ray",
        "is_los",
        "delay_s",
        "gain_real",
        "gain_imag",
        "aod_deg",
        "zod_deg",
        "aoa_deg",
        "zoa_deg",
        "methods",
    ]);
    for c in &real.coefficients {
        csv.push_row(&[
            c.u.to_string(),
            c.s.to_string(),
            c.cluster.to_string(),
            c.ray.to_string(),
            c.is_los.to_string(),
            float_field(c.delay),
            float_field(c.gain.re),
            float_field(c.gain.im),
            float_field(c.aod.to_degrees()),
            float_field(c.zod.to_degrees()),
            float_field(c.aoa.to_degrees()),
            float_field(c.zoa.to_degrees()),
            c.methods.to_string(),
        ])?;
    }
    let rows = real.coefficients.len();
    write_file(&out_dir.join("rays.csv"), &csv.into_string())?;
    println!("wrote {} ({} path terms)", out_dir.join("rays.csv").display(), rows);

    if args.cfr_points > 0 {
        if !(args.cfr_step_hz > 0.0) {
            return Err(Error::config("generate.cfr_step_hz", "frequency step must be > 0"));
        }
        let freqs: Vec<f64> = (0..args.cfr_points)
            .map(|k| cfg.scenario.carrier_hz + k as f64 * args.cfr_step_hz)
            .collect();
        let cfr = frequency_response(&real, &freqs)?;
        let mut csv = Csv::new(&["frequency_Hz", "u", "s", "H_real", "H_imag"]);
        for (i, f) in cfr.freqs.iter().enumerate() {
            for u in 0..cfr.rx_elements {
                for s in 0..cfr.tx_elements {
                    let h = cfr.link(u, s)[i];
                    csv.push_row(&[
                        float_field(*f),
                        u.to_string(),
                        s.to_string(),
                        float_field(h.re),
                        float_field(h.im),
                    ])?;
                }
            }
        }
        write_file(&out_dir.join("cfr.csv"), &csv.into_string())?;
        println!(
            "wrote {} ({} frequencies x {} links)",
            out_dir.join("cfr.csv").display(),
            cfr.freqs.len(),
            cfr.rx_elements * cfr.tx_elements
        );
    }

    if dump_scatterers {
        let mut csv = Csv::new(&[
            "cluster",
            "fbs_x_m",
            "fbs_y_m",
            "fbs_z_m",
            "lbs_x_m",
            "lbs_y_m",
            "lbs_z_m",
            "r_t_m",
            "r_v_m",
            "r_r_m",
            "fallback",
        ]);
        for t in &twins {
            csv.push_row(&[
                t.cluster_index.to_string(),
                float_field(t.fbs.x),
                float_field(t.fbs.y),
                float_field(t.fbs.z),
                float_field(t.lbs.x),
                float_field(t.lbs.y),
                float_field(t.lbs.z),
                float_field(t.r_t),
                float_field(t.r_v),
                float_field(t.r_r),
                t.fallback.to_string(),
            ])?;
        }
        write_file(&out_dir.join("scatterers.csv"), &csv.into_string())?;
        println!(
            "wrote {} ({} scatterer pairs)",
            out_dir.join("scatterers.csv").display(),
            twins.len()
        );
    }
    Ok(())
}

fn nf_prob(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    write_manifest(cfg, "nf-prob", &["sweep.csv"], out_dir)?;
    let result = nf_probability_sweep(&cfg.sweep_grid(), cfg.scenario.seed)?;
    let mut csv = Csv::new(&[
        "array",
        "f_Hz",
        "d2d_m",
        "ff_frac_delay",
        "ff_frac_eod",
        "ff_frac_aod",
    ]);
    for cell in &result.cells {
        csv.push_row(&[
            cell.array.clone(),
            float_field(cell.f_hz),
            float_field(cell.d2d_m),
            float_field(cell.ff_frac_delay),
            float_field(cell.ff_frac_eod),
            float_field(cell.ff_frac_aod),
        ])?;
    }
    let rows = result.cells.len();
    write_file(&out_dir.join("sweep.csv"), &csv.into_string())?;
    println!("wrote {} ({} grid cells)", out_dir.join("sweep.csv").display(), rows);
    Ok(())
}

fn compare_ff(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    write_manifest(
        cfg,
        "compare-ff",
        &["compare_summary.csv", "phase_hist.csv", "gain_hist.csv"],
        out_dir,
    )?;
    let cells = cf_ff_compare_grid(&cfg.compare_grid(), cfg.scenario.seed)?.cells;

    let mut summary = Csv::new(&[
        "array",
        "f_Hz",
        "d2d_m",
        "terms",
        "median_abs_phase_rad",
        "median_abs_gain_db",
    ]);
    let mut phases = Vec::new();
    let mut gains = Vec::new();
    for cell in &cells {
        summary.push_row(&[
            cell.array.clone(),
            float_field(cell.f_hz),
            float_field(cell.d2d_m),
            cell.phase_diffs.len().to_string(),
            float_field(cell.median_abs_phase()),
            float_field(cell.median_abs_gain_db()),
        ])?;
        phases.extend_from_slice(&cell.phase_diffs);
        gains.extend_from_slice(&cell.gain_diffs_db);
    }
    write_file(&out_dir.join("compare_summary.csv"), &summary.into_string())?;

    let tau = 2.0 * std::f64::consts::PI;
    let mut phase_csv = Csv::new(&["bin_lo_rad", "bin_hi_rad", "count"]);
    for (lo, hi, count) in histogram(&phases, -tau, tau, 96)? {
        phase_csv.push_row(&[float_field(lo), float_field(hi), count.to_string()])?;
    }
    write_file(&out_dir.join("phase_hist.csv"), &phase_csv.into_string())?;

    let (mut lo, mut hi) = gains.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &g| {
        (l.min(g), h.max(g))
    });
    lo = lo.floor();
    hi = hi.ceil();
    if !(hi > lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    let mut gain_csv = Csv::new(&["bin_lo_db", "bin_hi_db", "count"]);
    for (lo, hi, count) in histogram(&gains, lo, hi, 80)? {
        gain_csv.push_row(&[float_field(lo), float_field(hi), count.to_string()])?;
    }
    write_file(&out_dir.join("gain_hist.csv"), &gain_csv.into_string())?;
    println!(
        "wrote {} comparison cells pooling {} path terms under {}",
        cells.len(),
        phases.len(),
        out_dir.display()
    );
    Ok(())
}

fn edof_cmd(cfg: &RunConfig, args: &EdofArgs, out_dir: &Path) -> Result<()> {
    write_manifest(cfg, "edof", &["edof.csv"], out_dir)?;
    let text =
        std::fs::read_to_string(&args.input).map_err(|e| Error::io(args.input.clone(), e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "frequency_Hz,u,s,H_real,H_imag" {
        return Err(Error::domain(format!(
            "{}: expected a frequency-response table with header \
             frequency_Hz,u,s,H_real,H_imag, found `{header}`",
            args.input
        )));
    }
    let mut by_rx: Vec<Vec<Complex64>> = Vec::new();
    let mut by_tx: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::domain(format!(
                "{}:{}: expected 5 fields, found {}",
                args.input,
                lineno + 2,
                fields.len()
            )));
        }
        let parse =
            |what: &str, s: &str| -> Result<f64> {
                s.parse().map_err(|_| {
                    Error::domain(format!("{}:{}: bad {what} `{s}`", args.input, lineno + 2))
                })
            };
        let u = parse("receive index", fields[1])? as usize;
        let s = parse("transmit index", fields[2])? as usize;
        let h = Complex64::new(parse("real part", fields[3])?, parse("imaginary part", fields[4])?);
        if by_rx.len() <= u {
            by_rx.resize(u + 1, Vec::new());
        }
        if by_tx.len() <= s {
            by_tx.resize(s + 1, Vec::new());
        }
        by_rx[u].push(h);
        by_tx[s].push(h);
    }

    let mut csv = Csv::new(&["side", "elements", "observations", "edof"]);
    for (side, rows) in [("rx", &by_rx), ("tx", &by_tx)] {
        let r = spatial_correlation(rows)?;
        let value = edof(&r);
        println!(
            "{side} side: {} elements, {} observations each, effective degrees of freedom {}",
            rows.len(),
            rows.first().map_or(0, Vec::len),
            float_field(value)
        );
        csv.push_row(&[
            side.to_string(),
            rows.len().to_string(),
            rows.first().map_or(0, Vec::len).to_string(),
            float_field(value),
        ])?;
    }
    write_file(&out_dir.join("edof.csv"), &csv.into_string())?;
    Ok(())
}

fn selftest() -> Result<()> {
    // 256-element half-wavelength line at a 3 mm wavelength: aperture
    // 255 * 1.5 mm, and 64-element blocks span 63 * 1.5 mm.
    let wavelength = 0.003;
    let aperture = 255.0 * wavelength / 2.0;
    let block_aperture = 63.0 * wavelength / 2.0;

    let edof_golden = {
        let half = Complex64::new(0.5, 0.0);
        let one = Complex64::new(1.0, 0.0);
        edof(&[vec![one, half], vec![half, one]])
    };
    let xf_golden = {
        let cfg = XfGainConfig {
            enabled: true,
            c1: 10.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            d_ref: 0.0,
        };
        xf_gain_factor(&cfg, 0.0, 0.0, wavelength, 3.0)
    };

    let checks: [(&str, f64, f64, f64); 5] = [
        ("first-order worst-case boundary (m)", rayleigh_worst(aperture, wavelength), 97.5375, 1e-3),
        ("second-order worst-case boundary (m)", fresnel_worst(aperture, wavelength), 2.6778, 1e-3),
        ("64-element block boundary (m)", rayleigh_worst(block_aperture, wavelength), 5.9535, 1e-3),
        ("effective degrees of freedom, coupled pair", edof_golden, 1.6, 1e-12),
        ("face-to-face gain factor", xf_golden, 1.001, 1e-12),
    ];
    let mut failures = 0;
    for (name, value, expected, tol) in checks {
        let ok = (value - expected).abs() <= tol;
        if !ok {
            failures += 1;
        }
        println!(
            "{name}: {} (expected {expected}) {}",
            float_field(value),
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if failures > 0 {
        return Err(Error::domain(format!("selftest: {failures} of 5 checks failed")));
    }
    println!("selftest: 5/5 PASS");
    Ok(())
}
