//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when the physics or the input is at fault
//! (validation errors, a poor coupling fit, an infeasible design), 2 when
//! the environment is (unreadable or unwritable files, bad usage).

pub mod config;
pub mod output;
pub mod svg;
pub mod units;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{solve_dl_parameter, FreeParameter};
use crate::continuum::{calibrate, fit_coupling, Calibration, CalibrationOptions, CALIBRATION_FILE};
use crate::error::{Error, Result};
use crate::experiments::{
    array2, array3, reproduce_figure, simulate, straight_array, sweep, Dataset, Engine, Figure,
    ScenarioConfig,
};
use crate::geometry::big_gamma;

#[derive(Parser, Debug)]
#[command(name = "dynloc", version, about = "Dynamic localization in curved waveguide arrays")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// Directory for CSV, provenance and plot files
    #[arg(long, global = true, env = "DYNLOC_OUTPUT_DIR", default_value = "out")]
    pub output_dir: PathBuf,
    /// Also write an SVG plot per table
    #[arg(long, global = true)]
    pub plots: bool,
    /// Override the engine of a scenario file
    #[arg(long, global = true, value_enum)]
    pub engine: Option<EngineArg>,
    /// Override the ODE tolerance of a scenario file
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Worker threads for sweeps and figure presets
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Override a scenario key, e.g. --set array.lambda=1440nm
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Calibration file (default: <output-dir>/calibration.json, then ./calibration.json)
    #[arg(long, global = true)]
    pub calibration: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one scenario file
    Simulate { config: PathBuf },
    /// Run the [sweep] section of a scenario file
    Sweep { config: PathBuf },
    /// Fit a coupling constant to straight-array output powers
    FitCoupling {
        /// CSV with columns n and power
        #[arg(long)]
        powers: PathBuf,
        /// Propagation length, e.g. 28mm
        #[arg(long, value_parser = parse_length_arg)]
        length: f64,
    },
    /// Solve for the parameter that puts an array at dynamic localization
    Design {
        #[arg(long, value_enum, default_value = "array2", conflicts_with = "config")]
        preset: Preset,
        /// Take the array from a scenario file instead of a preset
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        free: FreeArg,
        /// Search interval, e.g. 1.4um:1.7um
        #[arg(long, value_parser = parse_bracket)]
        bracket: (f64, f64),
        /// Preset wavelength when the wavelength is not the free parameter
        #[arg(long, value_parser = parse_length_arg, default_value = "1610nm")]
        lambda: f64,
    },
    /// Regenerate the data behind a figure
    Reproduce { figure: FigureArg },
    /// Tune the well depth to the measured coupling constants
    Calibrate {
        /// Refine each depth with straight-array beam propagation
        #[arg(long)]
        refine: bool,
        /// Gaussian well half-width, e.g. 3um
        #[arg(long, value_parser = parse_length_arg)]
        well_width: Option<f64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum EngineArg {
    TightBinding,
    Continuum,
    Both,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::TightBinding => Engine::TightBinding,
            EngineArg::Continuum => Engine::Continuum,
            EngineArg::Both => Engine::Both,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Preset {
    Straight,
    Array2,
    Array3,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FreeArg {
    Wavelength,
    Period,
    Amplitude,
}

#[derive(Clone, Copy, Debug)]
pub enum FigureArg {
    One(Figure),
    All,
}

impl std::str::FromStr for FigureArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            Ok(FigureArg::All)
        } else {
            s.parse::<Figure>()
                .map(FigureArg::One)
                .map_err(|_| format!("unknown figure `{s}`; expected fig2 … fig6 or all"))
        }
    }
}

fn parse_length_arg(s: &str) -> std::result::Result<f64, String> {
    units::parse_length(s)
}

fn parse_bracket(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not a bracket; write lo:hi, e.g. 1.4um:1.7um"))?;
    Ok((units::parse_length(a)?, units::parse_length(b)?))
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("dynloc: {e}");
            e.exit_code()
        }
    }
}

fn jobs(g: &GlobalArgs) -> usize {
    g.jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn load_scenario(path: &Path, g: &GlobalArgs) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = config::parse_config_with(&path.display().to_string(), &text, &g.overrides)?;
    if let Some(e) = g.engine {
        config.engine = e.into();
    }
    if let Some(t) = g.tolerance {
        config.tolerance = t;
    }
    config.validate()?;
    Ok(config)
}

/// Explicit path, then the output directory, then the working directory.
fn find_calibration(g: &GlobalArgs) -> Result<Option<Calibration>> {
    if let Some(p) = &g.calibration {
        return Calibration::load(p).map(Some);
    }
    for p in [g.output_dir.join(CALIBRATION_FILE), PathBuf::from(CALIBRATION_FILE)] {
        if p.is_file() {
            return Calibration::load(&p).map(Some);
        }
    }
    Ok(None)
}

fn scenario_calibration(config: &ScenarioConfig, g: &GlobalArgs) -> Result<Option<Calibration>> {
    if config.engine == Engine::TightBinding {
        return Ok(None);
    }
    find_calibration(g)
}

fn emit(dataset: &Dataset, dir: &Path, g: &GlobalArgs) -> Result<()> {
    let files = output::emit_dataset(dataset, dir, g.plots)?;
    for n in &dataset.provenance.notes {
        println!("note: {n}");
    }
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate { config } => {
            let c = load_scenario(config, g)?;
            let cal = scenario_calibration(&c, g)?;
            let d = simulate(&c, cal.as_ref())?;
            emit(&d, &g.output_dir, g)
        }
        Command::Sweep { config } => {
            let c = load_scenario(config, g)?;
            if c.sweep.is_none() {
                return Err(Error::Config(format!("{} has no [sweep] section", config.display())));
            }
            let cal = scenario_calibration(&c, g)?;
            let d = sweep(&c, cal.as_ref(), jobs(g))?;
            emit(&d, &g.output_dir, g)
        }
        Command::FitCoupling { powers, length } => {
            let p = output::read_site_powers(powers)?;
            let fit = fit_coupling(&p, *length)?;
            println!(
                "delta = {} ({:.6} /cm), residual = {:.3e}",
                units::format_inverse_length(fit.delta),
                fit.delta / 100.0,
                fit.residual
            );
            if fit.poor_fit {
                return Err(Error::Model(format!(
                    "poor fit: residual {:.3e} exceeds {:.1e}; the data do not follow the straight-array Bessel law",
                    fit.residual,
                    crate::continuum::POOR_FIT_RESIDUAL
                )));
            }
            Ok(())
        }
        Command::Design {
            preset,
            config,
            free,
            bracket,
            lambda,
        } => {
            let (spec, profile) = match config {
                Some(path) => {
                    let c = load_scenario(path, g)?;
                    (c.spec, c.profile)
                }
                None => match preset {
                    Preset::Straight => straight_array(*lambda)?,
                    Preset::Array2 => array2(*lambda)?,
                    Preset::Array3 => array3(*lambda)?,
                },
            };
            let free = match free {
                FreeArg::Wavelength => FreeParameter::Wavelength,
                FreeArg::Period => FreeParameter::Period,
                FreeArg::Amplitude => FreeParameter::Amplitude,
            };
            let value = solve_dl_parameter(&spec, &profile, free, *bracket)?;
            let (s, p) = crate::analytics::apply_parameter(&spec, &profile, free, value)?;
            let shown = match free {
                FreeParameter::Wavelength => format!("lambda = {:.3} nm", value * 1e9),
                FreeParameter::Period => format!("Lambda = {:.5} mm", value * 1e3),
                FreeParameter::Amplitude => format!("A = {:.4} um", value * 1e6),
            };
            match big_gamma(&s, &p) {
                Ok(gamma) => println!("{shown} (Gamma = {gamma:.6})"),
                Err(_) => println!("{shown}"),
            }
            Ok(())
        }
        Command::Reproduce { figure } => {
            let figures: Vec<Figure> = match figure {
                FigureArg::One(f) => vec![*f],
                FigureArg::All => Figure::ALL.to_vec(),
            };
            let cal = if figures.iter().any(|f| f.needs_calibration()) {
                find_calibration(g)?
            } else {
                None
            };
            for f in figures {
                let d = reproduce_figure(f, cal.as_ref(), jobs(g))?;
                emit(&d, &g.output_dir.join(f.to_string()), g)?;
            }
            Ok(())
        }
        Command::Calibrate { refine, well_width } => {
            let (spec, _) = straight_array(1610e-9)?;
            let mut options = CalibrationOptions {
                refine_with_bpm: *refine,
                ..CalibrationOptions::default()
            };
            if let Some(w) = well_width {
                options.well_width = *w;
            }
            let cal = calibrate(&spec, &options)?;
            fs::create_dir_all(&g.output_dir).map_err(|e| Error::io(&g.output_dir, e))?;
            let path = g.output_dir.join(CALIBRATION_FILE);
            cal.save(&path)?;
            for a in &cal.anchors {
                let fitted = a.fitted_delta.map_or_else(|| "-".to_string(), units::format_inverse_length);
                println!(
                    "lambda = {:.1} nm: delta_n = {:.6e}, target {}, two-well {}, fitted {fitted}",
                    a.wavelength * 1e9,
                    a.well_depth,
                    units::format_inverse_length(a.target_delta),
                    units::format_inverse_length(a.two_well_delta),
                );
            }
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_parsing() {
        let cli = Cli::try_parse_from([
            "dynloc",
            "design",
            "--free",
            "wavelength",
            "--bracket",
            "1.4um:1.7um",
            "--set",
            "a=b",
        ])
        .unwrap();
        match cli.command {
            Command::Design { bracket, .. } => assert_eq!(bracket, (1.4e-6, 1.7e-6)),
            other => panic!("{other:?}"),
        }
        assert_eq!(cli.global.overrides, vec!["a=b".to_string()]);
        assert!(Cli::try_parse_from(["dynloc", "reproduce", "fig9"]).is_err());
        assert!(Cli::try_parse_from(["dynloc", "design", "--free", "period", "--bracket", "1:2"]).is_err());
    }

    #[test]
    fn design_exit_codes() {
        let ok = run_from(["dynloc", "design", "--free", "wavelength", "--bracket", "1.4um:1.7um"]);
        assert_eq!(ok, 0);
        let infeasible = run_from(["dynloc", "design", "--free", "wavelength", "--bracket", "1.4um:1.5um"]);
        assert_eq!(infeasible, 1);
    }
}
