//! `leo-nlos` subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use leo_nlos_core::angular_pdf::{joint_pdf, marginal_azimuth, marginal_elevation, AzimuthSupport, JointAoaPdf};
use leo_nlos_core::delay_stats::{delay_spread_target, excess_moments, DelaySpreadSchedule};
use leo_nlos_core::geometry::{
    axes_from_height_and_delay, max_relative_delay, solve_axes, Closure, ElevationAngle, EllipsoidAxes, EnvironmentSpec,
};
use leo_nlos_core::montecarlo::{
    empirical_delay_stats, empirical_doppler, empirical_marginals, sample_rays, synthesize_waveform,
};
use leo_nlos_core::numerics::QuadratureSpec;
use leo_nlos_core::spectrum::{compose_rician, psd_binned, psd_delta, DopplerSpectrum};
use leo_nlos_core::SPEED_OF_LIGHT;

use crate::config::{self, IO_KEYS};
use crate::periodogram::{welch, Window};
use crate::schedule::read_schedule;
use crate::table::{format_float, CsvTable};
use crate::{CliError, EXIT_NUMERICAL, EXIT_USAGE};

const NS: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "leo-nlos",
    version,
    about = "Semi-ellipsoid NLOS channel model for LEO downlinks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the scatterer volume at one elevation.
    #[command(args_override_self = true)]
    Geometry(GeometryArgs),
    /// Solve the scatterer volume over a range of elevations.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Excess-delay statistics of the solved volume.
    #[command(args_override_self = true)]
    DelayStats(GeometryArgs),
    /// Angle-of-arrival densities.
    #[command(args_override_self = true)]
    Pdf(PdfArgs),
    /// Doppler power spectral density of the NLOS part.
    #[command(args_override_self = true)]
    Psd(PsdArgs),
    /// Doppler spectrum with a line-of-sight component added.
    #[command(args_override_self = true)]
    Compose(ComposeArgs),
    /// Monte Carlo scatterer sampling.
    #[command(args_override_self = true)]
    Mc(McArgs),
    /// Sum-of-rays waveform and its periodogram.
    #[command(args_override_self = true)]
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Maximum building height (m).
    #[arg(long, default_value_t = 65.0)]
    pub height: f64,
    /// Target RMS delay spread (ns). Defaults to the schedule value.
    #[arg(long)]
    pub rms_delay_ns: Option<f64>,
    /// Close the geometry with this maximum excess delay (ns) instead of the
    /// axis ratio.
    #[arg(long)]
    pub max_delay_ns: Option<f64>,
    /// b / a under the ratio closure.
    #[arg(long, default_value_t = 0.6)]
    pub ratio: f64,
    /// CSV with `elevation_deg,rms_delay_ns` columns.
    #[arg(long, value_name = "FILE")]
    pub schedule: Option<PathBuf>,
    /// Use these semi-axes (m) instead of solving.
    #[arg(long, value_name = "A,B,C")]
    pub axes: Option<Triple>,
    /// Quadrature points per axis.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Write the table here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Read `key=value` defaults from FILE (any CSV this tool wrote works).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    /// Satellite elevation (degrees, 0 to 180).
    #[arg(long)]
    pub elevation: f64,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// First elevation (degrees).
    #[arg(long, default_value_t = 0.0)]
    pub start: f64,
    /// Last elevation (degrees).
    #[arg(long, default_value_t = 90.0)]
    pub end: f64,
    /// Elevation step (degrees).
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PdfArgs {
    #[arg(long)]
    pub elevation: f64,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Azimuth support (degrees).
    #[arg(long, value_name = "LO,HI", default_value = "0,360")]
    pub support: Pair,
    /// Joint density on an azimuth by elevation grid.
    #[arg(long, overrides_with_all = ["marginal_azimuth", "marginal_elevation"])]
    pub joint: bool,
    /// Azimuth marginal (the default).
    #[arg(long, overrides_with_all = ["joint", "marginal_elevation"])]
    pub marginal_azimuth: bool,
    /// Elevation marginal.
    #[arg(long, overrides_with_all = ["joint", "marginal_azimuth"])]
    pub marginal_elevation: bool,
    /// Points along each angle.
    #[arg(long, default_value_t = 361)]
    pub grid: usize,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PsdMethod {
    Delta,
    Binned,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub elevation: f64,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, value_enum, default_value_t = PsdMethod::Binned)]
    pub method: PsdMethod,
    /// Azimuth support (degrees).
    #[arg(long, value_name = "LO,HI", default_value = "0,360")]
    pub support: Pair,
    /// Frequency cells over [-f_d, f_d].
    #[arg(long, default_value_t = 201)]
    pub bins: usize,
    /// Maximum Doppler shift f_d (Hz).
    #[arg(long, default_value_t = 1.0)]
    pub doppler_hz: f64,
    /// Native cell count of the delta method before rebinning.
    #[arg(long, default_value_t = 1000)]
    pub delta_grid: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PsdArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ComposeArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    /// Rician K-factor (linear).
    #[arg(long)]
    pub k_factor: f64,
    /// LOS Doppler shift as a fraction of f_d.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub f_los: f64,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum McTable {
    Doppler,
    Rays,
    Marginals,
    Delay,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[arg(long)]
    pub elevation: f64,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Histogram bins.
    #[arg(long, default_value_t = 101)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = McTable::Doppler)]
    pub table: McTable,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthTable {
    Waveform,
    Periodogram,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub elevation: f64,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value_t = 10_000)]
    pub rays: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Maximum Doppler shift f_d (Hz).
    #[arg(long, default_value_t = 1.0)]
    pub doppler_hz: f64,
    /// Record length (s). Defaults to 200 / f_d.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Sample rate (Hz). Defaults to 8 f_d.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, value_enum, default_value_t = SynthTable::Waveform)]
    pub table: SynthTable,
    /// Periodogram segment length (samples).
    #[arg(long, default_value_t = 512)]
    pub segment: usize,
    /// Periodogram segment overlap fraction.
    #[arg(long, default_value_t = 0.5)]
    pub overlap: f64,
    #[arg(long, value_enum, default_value_t = Window::Rectangular)]
    pub window: Window,
    /// Periodogram cells over [-f_d, f_d].
    #[arg(long, default_value_t = 101)]
    pub bins: usize,
    #[command(flatten)]
    pub io: IoArgs,
}

/// Two comma-separated numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub f64, pub f64);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_list(s)?.as_slice() {
            &[a, b] => Ok(Pair(a, b)),
            _ => Err(format!("expected two comma-separated numbers, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple(pub f64, pub f64, pub f64);

impl FromStr for Triple {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_list(s)?.as_slice() {
            &[a, b, c] => Ok(Triple(a, b, c)),
            _ => Err(format!("expected three comma-separated numbers, got `{s}`")),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

/// Runs the tool and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    match dispatch(argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("leo-nlos: {}", single_line(&e.to_string()));
            e.exit_code()
        }
    }
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parsed subcommand plus the configuration that reproduces it.
struct Run {
    command: String,
    config: Vec<(String, String)>,
}

impl Run {
    fn header(&self, table: &mut CsvTable, extra: impl IntoIterator<Item = String>) {
        let mut meta = vec![format!("leo-nlos {}", env!("CARGO_PKG_VERSION"))];
        meta.extend(config::embed(&self.command, &self.config));
        meta.extend(extra);
        table.metadata = meta;
    }
}

fn dispatch(argv: Vec<OsString>) -> Result<i32, CliError> {
    let argv = config::splice(argv)?;
    let mut cmd = Cli::command();
    let matches = match cmd.try_get_matches_from_mut(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    Ok(0)
                }
                _ => {
                    let text = e.render().to_string();
                    let first = text.lines().next().unwrap_or("invalid arguments");
                    Err(CliError::Usage(first.trim_start_matches("error: ").to_string()))
                }
            };
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(single_line(&e.to_string())))?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let sub_cmd = cmd.find_subcommand(name).expect("parsed subcommand exists");
    let run = Run {
        command: name.to_string(),
        config: resolved_config(sub_cmd, sub),
    };
    let (table, io, code) = match &cli.command {
        Command::Geometry(a) => {
            let (t, c) = geometry(&run, a)?;
            (t, &a.io, c)
        }
        Command::Sweep(a) => {
            let (t, c) = sweep(&run, a)?;
            (t, &a.io, c)
        }
        Command::DelayStats(a) => (delay_stats(&run, a)?, &a.io, 0),
        Command::Pdf(a) => (pdf(&run, a)?, &a.io, 0),
        Command::Psd(a) => (psd(&run, &a.spectrum)?, &a.io, 0),
        Command::Compose(a) => (compose(&run, a)?, &a.io, 0),
        Command::Mc(a) => (mc(&run, a)?, &a.io, 0),
        Command::Synth(a) => (synth(&run, a)?, &a.io, 0),
    };
    emit(&table, io)?;
    Ok(code)
}

/// Every argument with a value, as `long=raw`, in declaration order.
fn resolved_config(cmd: &clap::Command, m: &clap::ArgMatches) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for arg in cmd.get_arguments() {
        let Some(long) = arg.get_long() else { continue };
        if IO_KEYS.contains(&long) || long == "help" {
            continue;
        }
        if let Ok(Some(raw)) = m.try_get_raw(arg.get_id().as_str()) {
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            if let Some(v) = vals.last() {
                out.push((long.to_string(), v.clone()));
            }
        }
    }
    out
}

fn emit(table: &CsvTable, io: &IoArgs) -> Result<(), CliError> {
    let mut buf = Vec::new();
    table.write_to(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    match &io.out {
        Some(path) => {
            std::fs::write(path, &buf).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .lock()
            .write_all(&buf)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn elevation(deg: f64) -> Result<ElevationAngle, CliError> {
    Ok(ElevationAngle::from_degrees(deg)?)
}

impl SolveArgs {
    fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let q = QuadratureSpec::trapezoid(self.points);
        q.validate()?;
        Ok(q)
    }

    fn load_schedule(&self) -> Result<DelaySpreadSchedule, CliError> {
        match &self.schedule {
            Some(p) => read_schedule(p),
            None => Ok(DelaySpreadSchedule::default()),
        }
    }

    fn target_ns(&self, e: ElevationAngle, schedule: &DelaySpreadSchedule) -> Result<f64, CliError> {
        match self.rms_delay_ns {
            Some(t) => Ok(t),
            None => Ok(delay_spread_target(e.folded_degrees(), schedule)?),
        }
    }

    fn closure(&self) -> Closure {
        match self.max_delay_ns {
            Some(d) => Closure::MaxRelativeDelay(d * NS),
            None => Closure::AxisRatio(self.ratio),
        }
    }

    fn solve(
        &self,
        e: ElevationAngle,
        schedule: &DelaySpreadSchedule,
        quad: &QuadratureSpec,
    ) -> Result<EllipsoidAxes, CliError> {
        if let Some(Triple(a, b, c)) = self.axes {
            return Ok(EllipsoidAxes::new(a, b, c)?);
        }
        let target = self.target_ns(e, schedule)?;
        let spec = EnvironmentSpec::new(self.height, e, target * NS, self.closure())?;
        Ok(solve_axes(&spec, quad)?)
    }

    /// Axes for commands that work on one geometry.
    fn axes_at(&self, e: ElevationAngle) -> Result<EllipsoidAxes, CliError> {
        let schedule = self.load_schedule()?;
        self.solve(e, &schedule, &self.quadrature()?)
    }
}

const GEOMETRY_HEADER: [&str; 6] = ["elevation_deg", "a_m", "b_m", "c_m", "sigma_tau_ns", "max_delay_ns"];

/// One sweep row; on failure the row is NaN except for what the closure
/// fixes without solving.
fn geometry_row(
    deg: f64,
    solve: &SolveArgs,
    schedule: &DelaySpreadSchedule,
    quad: &QuadratureSpec,
) -> (Vec<f64>, Option<CliError>) {
    let attempt = || -> Result<Vec<f64>, CliError> {
        let e = elevation(deg)?;
        let axes = solve.solve(e, schedule, quad)?;
        let sigma = excess_moments(&axes, e, quad)?;
        let sigma_ns = sigma.variance().max(0.0).sqrt() / SPEED_OF_LIGHT / NS;
        Ok(vec![
            deg,
            axes.a,
            axes.b,
            axes.c,
            sigma_ns,
            max_relative_delay(&axes, e) / NS,
        ])
    };
    match attempt() {
        Ok(row) => (row, None),
        Err(err) => {
            let nan = f64::NAN;
            let mut row = vec![deg, nan, nan, nan, nan, nan];
            if let (Some(d), None, Ok(e)) = (solve.max_delay_ns, solve.axes, elevation(deg)) {
                if let Ok((a, c)) = axes_from_height_and_delay(solve.height, d * NS, e) {
                    row[1] = a;
                    row[3] = c;
                    row[5] = d;
                }
            }
            (row, Some(err))
        }
    }
}

fn geometry_table(run: &Run, elevations: &[f64], solve: &SolveArgs) -> Result<(CsvTable, i32), CliError> {
    let schedule = solve.load_schedule()?;
    let quad = solve.quadrature()?;
    if let Some(t) = solve.rms_delay_ns {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("--rms-delay-ns must be positive, got {t}")));
        }
    }
    let mut table = CsvTable::new(&GEOMETRY_HEADER);
    run.header(&mut table, []);
    let mut code = 0;
    for &deg in elevations {
        let (row, err) = geometry_row(deg, solve, &schedule, &quad);
        table.push_floats(&row);
        if let Some(err) = err {
            table.trailer.push(format!(
                "error: elevation {}: {}",
                format_float(deg),
                single_line(&err.to_string())
            ));
            code = code.max(err.exit_code());
        }
    }
    Ok((table, code))
}

fn geometry(run: &Run, a: &GeometryArgs) -> Result<(CsvTable, i32), CliError> {
    elevation(a.elevation)?;
    let (table, code) = geometry_table(run, &[a.elevation], &a.solve)?;
    if code == EXIT_USAGE {
        // A single bad geometry is an input error, not a row failure.
        let msg = table.trailer.first().cloned().unwrap_or_default();
        return Err(CliError::Usage(msg.trim_start_matches("error: ").to_string()));
    }
    Ok((table, code))
}

fn sweep(run: &Run, a: &SweepArgs) -> Result<(CsvTable, i32), CliError> {
    if !(0.0 <= a.start && a.start <= a.end && a.end <= 90.0) {
        return Err(CliError::Usage(format!(
            "sweep needs 0 <= start <= end <= 90, got {} to {}",
            a.start, a.end
        )));
    }
    if !(a.step > 0.0) {
        return Err(CliError::Usage(format!("sweep step must be positive, got {}", a.step)));
    }
    if a.solve.axes.is_some() {
        return Err(CliError::Usage("--axes fixes one geometry and cannot be swept".into()));
    }
    let count = ((a.end - a.start) / a.step + 1e-9).floor() as usize + 1;
    let elevations: Vec<f64> = (0..count).map(|i| a.start + i as f64 * a.step).collect();
    let (table, code) = geometry_table(run, &elevations, &a.solve)?;
    Ok((table, if code != 0 { EXIT_NUMERICAL } else { 0 }))
}

fn delay_stats(run: &Run, a: &GeometryArgs) -> Result<CsvTable, CliError> {
    let e = elevation(a.elevation)?;
    let schedule = a.solve.load_schedule()?;
    let quad = a.solve.quadrature()?;
    let axes = a.solve.solve(e, &schedule, &quad)?;
    let m = excess_moments(&axes, e, &quad)?;
    let target = match a.solve.axes {
        Some(_) => f64::NAN,
        None => a.solve.target_ns(e, &schedule)?,
    };
    let mut table = CsvTable::new(&[
        "elevation_deg",
        "a_m",
        "b_m",
        "c_m",
        "mean_excess_ns",
        "sigma_tau_ns",
        "target_ns",
        "max_delay_ns",
    ]);
    run.header(&mut table, []);
    table.push_floats(&[
        a.elevation,
        axes.a,
        axes.b,
        axes.c,
        m.mean / SPEED_OF_LIGHT / NS,
        m.variance().max(0.0).sqrt() / SPEED_OF_LIGHT / NS,
        target,
        max_relative_delay(&axes, e) / NS,
    ]);
    Ok(table)
}

fn support(p: Pair) -> Result<AzimuthSupport, CliError> {
    Ok(AzimuthSupport::arc_degrees(p.0, p.1)?)
}

fn build_pdf(elevation_deg: f64, solve: &SolveArgs, arc: Pair) -> Result<JointAoaPdf, CliError> {
    let e = elevation(elevation_deg)?;
    let axes = solve.axes_at(e)?;
    Ok(JointAoaPdf::with_support(axes, e, support(arc)?, &solve.quadrature()?)?)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn pdf(run: &Run, a: &PdfArgs) -> Result<CsvTable, CliError> {
    if a.grid < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {}", a.grid)));
    }
    let p = build_pdf(a.elevation, &a.solve, a.support)?;
    let quad = a.solve.quadrature()?;
    let meta = [format!("support_mass {}", format_float(p.support_mass()))];
    let alphas = grid(0.0, 360.0, a.grid);
    let betas = grid(0.0, 90.0, a.grid);
    let table = if a.joint {
        let mut t = CsvTable::new(&["alpha_deg", "beta_deg", "density_per_rad2"]);
        for &al in &alphas {
            for &be in &betas {
                t.push_floats(&[al, be, joint_pdf(&p, al.to_radians(), be.to_radians())]);
            }
        }
        t
    } else if a.marginal_elevation {
        let mut t = CsvTable::new(&["beta_deg", "density_per_rad"]);
        for &be in &betas {
            t.push_floats(&[be, marginal_elevation(&p, be.to_radians(), &quad)?]);
        }
        t
    } else {
        let mut t = CsvTable::new(&["alpha_deg", "density_per_rad"]);
        for &al in &alphas {
            t.push_floats(&[al, marginal_azimuth(&p, al.to_radians(), &quad)?]);
        }
        t
    };
    let mut table = table;
    run.header(&mut table, meta);
    Ok(table)
}

fn spectrum(a: &SpectrumArgs) -> Result<(DopplerSpectrum, JointAoaPdf), CliError> {
    if !(a.doppler_hz > 0.0) || !a.doppler_hz.is_finite() {
        return Err(CliError::Usage(format!(
            "--doppler-hz must be positive, got {}",
            a.doppler_hz
        )));
    }
    let p = build_pdf(a.elevation, &a.solve, a.support)?;
    let s = match a.method {
        PsdMethod::Binned => psd_binned(&p, a.doppler_hz, a.bins)?,
        PsdMethod::Delta => psd_delta(&p, a.doppler_hz, &QuadratureSpec::midpoint(a.delta_grid))?.rebin(a.bins)?,
    };
    Ok((s, p))
}

fn spectrum_table(run: &Run, s: &DopplerSpectrum, p: &JointAoaPdf) -> CsvTable {
    let mut t = CsvTable::new(&["nu", "freq_hz", "density"]);
    for (i, &d) in s.density().iter().enumerate() {
        t.push_floats(&[s.freq(i), s.freq(i) * s.f_d(), d]);
    }
    run.header(
        &mut t,
        [
            format!("support_mass {}", format_float(p.support_mass())),
            format!("continuous_power {}", format_float(s.continuous_power())),
        ],
    );
    for l in s.lines() {
        t.trailer
            .push(format!("line {} {}", format_float(l.freq), format_float(l.power)));
    }
    t
}

fn psd(run: &Run, a: &SpectrumArgs) -> Result<CsvTable, CliError> {
    let (s, p) = spectrum(a)?;
    Ok(spectrum_table(run, &s, &p))
}

fn compose(run: &Run, a: &ComposeArgs) -> Result<CsvTable, CliError> {
    let (s, p) = spectrum(&a.spectrum)?;
    let composed = compose_rician(&s, a.k_factor, a.f_los)?;
    Ok(spectrum_table(run, &composed, &p))
}

fn mc(run: &Run, a: &McArgs) -> Result<CsvTable, CliError> {
    let e = elevation(a.elevation)?;
    let axes = a.solve.axes_at(e)?;
    let ens = sample_rays(&axes, e, a.samples, a.seed)?;
    let mut meta = vec![format!("attempts {}", ens.attempts)];
    let mut t = match a.table {
        McTable::Rays => {
            let mut t = CsvTable::new(&["alpha", "beta", "r", "excess_delay_s", "doppler_norm"]);
            for r in &ens.rays {
                t.push_floats(&[r.alpha, r.beta, r.r, r.excess_delay, r.doppler_norm]);
            }
            t
        }
        McTable::Doppler => {
            let h = empirical_doppler(&ens, a.bins)?;
            let analytic = psd_binned(&JointAoaPdf::new(axes, e), 1.0, a.bins)?;
            meta.push(format!("l1 {}", format_float(h.l1_distance(analytic.density())?)));
            let mut t = CsvTable::new(&["nu", "count", "density", "analytic"]);
            for (i, c) in h.centres().into_iter().enumerate() {
                t.push_row(vec![
                    format_float(c),
                    h.counts[i].to_string(),
                    format_float(h.densities[i]),
                    format_float(analytic.density()[i]),
                ]);
            }
            t
        }
        McTable::Marginals => {
            let (az, el) = empirical_marginals(&ens, a.bins)?;
            let mut t = CsvTable::new(&["angle", "centre_deg", "count", "density_per_rad"]);
            for (name, h) in [("azimuth", &az), ("elevation", &el)] {
                for (i, c) in h.centres().into_iter().enumerate() {
                    t.push_row(vec![
                        name.to_string(),
                        format_float(c.to_degrees()),
                        h.counts[i].to_string(),
                        format_float(h.densities[i]),
                    ]);
                }
            }
            t
        }
        McTable::Delay => {
            let d = empirical_delay_stats(&ens);
            let m = excess_moments(&axes, e, &a.solve.quadrature()?)?;
            let max_z = ens.rays.iter().map(|r| r.r * r.beta.sin()).fold(0.0, f64::max);
            let mut t = CsvTable::new(&[
                "mean_excess_ns",
                "rms_delay_ns",
                "max_excess_ns",
                "quadrature_rms_ns",
                "max_z_m",
            ]);
            t.push_floats(&[
                d.mean / NS,
                d.rms / NS,
                d.max / NS,
                m.variance().max(0.0).sqrt() / SPEED_OF_LIGHT / NS,
                max_z,
            ]);
            t
        }
    };
    run.header(&mut t, meta);
    Ok(t)
}

fn synth(run: &Run, a: &SynthArgs) -> Result<CsvTable, CliError> {
    if !(a.doppler_hz > 0.0) || !a.doppler_hz.is_finite() {
        return Err(CliError::Usage(format!(
            "--doppler-hz must be positive, got {}",
            a.doppler_hz
        )));
    }
    let e = elevation(a.elevation)?;
    let axes = a.solve.axes_at(e)?;
    let ens = sample_rays(&axes, e, a.rays, a.seed)?;
    let duration = a.duration.unwrap_or(200.0 / a.doppler_hz);
    let rate = a.rate.unwrap_or(8.0 * a.doppler_hz);
    let w = synthesize_waveform(&ens, a.doppler_hz, duration, rate)?;
    let mut meta = vec![format!("mean_power {}", format_float(w.mean_power()))];
    let mut t = match a.table {
        SynthTable::Waveform => {
            let mut t = CsvTable::new(&["t", "re", "im"]);
            for (k, s) in w.samples.iter().enumerate() {
                t.push_floats(&[w.time(k), s.re, s.im]);
            }
            t
        }
        SynthTable::Periodogram => {
            // The field phasors rotate as exp(-j 2 pi f t), so a ray with
            // positive Doppler shows up at negative FFT frequency.
            let est = welch(&w.samples, rate, a.segment, a.overlap, a.window)?
                .mirrored()
                .to_spectrum(a.doppler_hz, a.bins)?;
            let analytic = psd_binned(&JointAoaPdf::new(axes, e), a.doppler_hz, a.bins)?;
            meta.push(format!("l1 {}", format_float(est.l1_distance(&analytic)?)));
            let mut t = CsvTable::new(&["nu", "density", "analytic"]);
            for i in 0..est.len() {
                t.push_floats(&[est.freq(i), est.density()[i], analytic.density()[i]]);
            }
            t
        }
    };
    run.header(&mut t, meta);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn lists_parse() {
        assert_eq!("0,270".parse::<Pair>().unwrap(), Pair(0.0, 270.0));
        assert_eq!(" 1, 2 ,3".parse::<Triple>().unwrap(), Triple(1.0, 2.0, 3.0));
        assert!("1".parse::<Pair>().is_err());
        assert!("1,x".parse::<Pair>().is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut cmd = Cli::command();
        let m = cmd
            .try_get_matches_from_mut(["leo-nlos", "pdf", "--elevation", "30", "--joint", "--out", "x.csv"])
            .unwrap();
        let (name, sub) = m.subcommand().unwrap();
        let cfg = resolved_config(cmd.find_subcommand(name).unwrap(), sub);
        let get = |k: &str| cfg.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        assert_eq!(get("elevation"), Some("30"));
        assert_eq!(get("height"), Some("65"));
        assert_eq!(get("joint"), Some("true"));
        assert_eq!(get("marginal-azimuth"), Some("false"));
        assert_eq!(get("out"), None);
    }
}
