use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{delta_of_lambda, Cell, Dataset, Provenance, Table};
use crate::analytics::{apply_parameter, diagnose, FreeParameter, LOCALIZATION_TOLERANCE};
use crate::continuum::{
    build_potential, fundamental_mode, gaussian_input, mode_input, propagate, site_powers_local,
    BpmConfig, Calibration, FieldTrajectory, Grid, GuidedMode, SitePowers,
};
use crate::error::{Error, Result};
use crate::geometry::{amplitude_for_gamma, big_gamma, ArraySpec, BendingProfile, Side};
use crate::tightbinding::{
    default_half_width, evolve, mean_square_site, SiteState, SiteTrajectory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    TightBinding,
    Continuum,
    Both,
}

impl Engine {
    fn lattice(self) -> bool {
        self != Engine::Continuum
    }

    fn continuum(self) -> bool {
        self != Engine::TightBinding
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Excitation {
    /// Light launched into one waveguide, matched to its input slope.
    SingleSite(i64),
    /// Gaussian `exp(−(x−center)²/width²)` entering at angle `tilt` to the z axis.
    Gaussian { width: f64, center: f64, tilt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    SitePowers,
    Trajectory,
    CrossSection,
    Msd,
    ReturnProbability,
    DlDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Wavelength,
    Period,
    Amplitude,
    Gamma,
}

impl SweepAxis {
    fn column(self) -> (&'static str, &'static str) {
        match self {
            SweepAxis::Wavelength => ("lambda", "m"),
            SweepAxis::Period => ("Lambda", "m"),
            SweepAxis::Amplitude => ("A", "m"),
            SweepAxis::Gamma => ("Gamma_target", "1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    /// Strictly monotone.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub engine: Engine,
    pub spec: ArraySpec,
    /// Coupling constant in 1/m; taken from the measured dispersion when absent.
    pub coupling: Option<f64>,
    pub profile: BendingProfile,
    pub excitation: Excitation,
    pub sweep: Option<Sweep>,
    pub outputs: Vec<Observable>,
    /// Recorded planes, including the input plane.
    pub z_points: usize,
    pub tolerance: f64,
    pub grid: Grid,
}

impl ScenarioConfig {
    /// Tight-binding single-site scenario with site powers and spreading outputs.
    pub fn new(name: &str, spec: ArraySpec, profile: BendingProfile) -> Self {
        ScenarioConfig {
            name: name.to_string(),
            engine: Engine::TightBinding,
            spec,
            coupling: None,
            profile,
            excitation: Excitation::SingleSite(0),
            sweep: None,
            outputs: vec![Observable::SitePowers, Observable::Msd],
            z_points: 57,
            tolerance: 1e-10,
            grid: Grid::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.profile.validate_for(&self.spec)?;
        self.grid.validate()?;
        if self.z_points < 2 {
            return Err(Error::Config("z_points must be at least 2".into()));
        }
        if let Some(d) = self.coupling {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::Config(format!("coupling must be non-negative, got {d}")));
            }
        }
        if let Excitation::Gaussian { width, center, tilt } = self.excitation {
            if !(width > 0.0 && center.is_finite() && tilt.is_finite()) {
                return Err(Error::Config(
                    "Gaussian excitation needs a positive width and finite center and tilt".into(),
                ));
            }
        }
        if let Excitation::SingleSite(n) = self.excitation {
            if !self.spec.site_indices().contains(&n) {
                return Err(Error::Config(format!("site {n} is not in the array")));
            }
        }
        if let Some(s) = &self.sweep {
            let up = s.values.windows(2).all(|w| w[1] > w[0]);
            let down = s.values.windows(2).all(|w| w[1] < w[0]);
            if !(up || down) {
                return Err(Error::Config("sweep values must be strictly monotone".into()));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("sweep values must be finite".into()));
            }
        }
        Ok(())
    }

    fn delta(&self, spec: &ArraySpec, notes: &mut Vec<String>) -> f64 {
        self.coupling.unwrap_or_else(|| {
            let d = delta_of_lambda(spec.wavelength);
            if d.extrapolated {
                notes.push(format!(
                    "coupling at {:.1} nm extrapolated from the measured range",
                    spec.wavelength * 1e9
                ));
            }
            d.delta
        })
    }

    fn z_grid(&self, length: f64) -> Vec<f64> {
        let n = self.z_points - 1;
        (0..=n).map(|i| length * i as f64 / n as f64).collect()
    }

    fn provenance(&self) -> Provenance {
        let mut p = Provenance::new(serde_json::to_value(self).unwrap_or_default());
        p.tolerances.insert("ode".into(), self.tolerance);
        p.tolerances.insert("localization".into(), LOCALIZATION_TOLERANCE);
        p
    }
}

/// Initial lattice amplitudes for an excitation, expressed in the waveguide
/// frame at z = 0 (a lab-frame tilt becomes a Bloch phase per site).
pub fn lattice_input(
    spec: &ArraySpec,
    profile: &BendingProfile,
    excitation: &Excitation,
    half_width: usize,
) -> Result<SiteState> {
    match *excitation {
        Excitation::SingleSite(site) => {
            let hw = half_width.max(site.unsigned_abs() as usize + 1);
            Ok(SiteState::from_fn(hw, |n| {
                Complex64::new(if n == site { 1.0 } else { 0.0 }, 0.0)
            }))
        }
        Excitation::Gaussian { width, center, tilt } => {
            let a = spec.site_period;
            let q = bloch_phase(spec, profile, tilt)?;
            let reach = ((center.abs() + 6.0 * width) / a).ceil() as usize;
            let hw = half_width.max(reach);
            SiteState::from_fn(hw, |n| {
                let x = n as f64 * a;
                Complex64::from_polar((-((x - center) / width).powi(2)).exp(), q * n as f64)
            })
            .normalized()
        }
    }
}

/// Tight-binding run on the physical array: the lattice starts at the
/// default half-width and grows on demand, but never past the array edge,
/// where light reaching the boundary is reported as truncation.
pub fn run_lattice(
    spec: &ArraySpec,
    profile: &BendingProfile,
    delta: f64,
    excitation: &Excitation,
    z_grid: &[f64],
    tol: f64,
) -> Result<SiteTrajectory> {
    let end = z_grid.last().copied().unwrap_or(0.0);
    let sites = spec.site_indices();
    let limit = (-*sites.start()).min(*sites.end()).max(0) as usize;
    let initial = lattice_input(spec, profile, excitation, default_half_width(delta, end).min(limit))?;
    if initial.half_width() > limit {
        return Err(Error::Config(format!(
            "excitation extends past the {}-site array",
            spec.site_count
        )));
    }
    match evolve(&initial, delta, spec, profile, z_grid, tol) {
        Err(Error::LatticeTruncation { .. }) if initial.half_width() < limit => {
            evolve(&initial.widened(limit), delta, spec, profile, z_grid, tol)
        }
        other => other,
    }
}

/// Lab-frame beam propagation together with the per-plane site powers.
#[derive(Debug, Clone)]
pub struct ContinuumRun {
    /// Spec with the calibrated wells.
    pub spec: ArraySpec,
    pub mode: GuidedMode,
    pub trajectory: FieldTrajectory,
    /// Site powers in the local guide frame at every recorded plane.
    pub sites: Vec<SitePowers>,
    pub extrapolated: bool,
}

/// Propagates an excitation through the calibrated continuum model,
/// recording about `planes` fields.
pub fn run_continuum(
    spec: &ArraySpec,
    profile: &BendingProfile,
    excitation: &Excitation,
    grid: &Grid,
    calibration: &Calibration,
    planes: usize,
) -> Result<ContinuumRun> {
    let (_, extrapolated) = calibration.well_depth(spec.wavelength);
    let spec = calibration.apply(spec)?;
    let mode = fundamental_mode(&spec, grid)?;
    let potential = build_potential(&spec, grid)?;
    let input = match *excitation {
        Excitation::SingleSite(site) => mode_input(&mode, &spec, profile, site)?,
        Excitation::Gaussian { width, center, tilt } => {
            gaussian_input(width, center, tilt, grid, &spec)?
        }
    };
    let config = BpmConfig::for_profile(profile, grid);
    let steps = (spec.length / config.step).ceil().max(1.0) as usize;
    let config = config.recording_every((steps / planes.max(2).saturating_sub(1)).max(1));
    let trajectory = propagate(&input, &potential, profile, &spec, &config, spec.length)?;
    let sites = trajectory
        .fields
        .iter()
        .map(|f| site_powers_local(f, &spec, &mode, profile))
        .collect::<Result<Vec<_>>>()?;
    Ok(ContinuumRun {
        spec,
        mode,
        trajectory,
        sites,
        extrapolated,
    })
}

fn require_calibration<'a>(
    engine: Engine,
    calibration: Option<&'a Calibration>,
) -> Result<Option<&'a Calibration>> {
    match (engine.continuum(), calibration) {
        (true, None) => Err(Error::MissingCalibration(
            "the continuum engine needs calibrated wells".into(),
        )),
        (true, c) => Ok(c),
        (false, _) => Ok(None),
    }
}

fn lattice_tables(
    config: &ScenarioConfig,
    run: &SiteTrajectory,
    tables: &mut Vec<Table>,
) -> Result<()> {
    for out in &config.outputs {
        match out {
            Observable::SitePowers => {
                let mut t = Table::new("site_powers", &[("n", "1"), ("power", "1")]);
                let last = run.last();
                for n in last.indices() {
                    t.push(vec![n.into(), last.site_power(n).into()]);
                }
                tables.push(t);
            }
            Observable::Trajectory => {
                let mut t = Table::new("trajectory", &[("z", "m"), ("n", "1"), ("power", "1")]);
                for s in &run.states {
                    for n in s.indices() {
                        t.push(vec![s.z.into(), n.into(), s.site_power(n).into()]);
                    }
                }
                tables.push(t);
            }
            Observable::Msd => {
                let mut t = Table::new("msd", &[("z", "m"), ("msd", "1"), ("sqrt_msd", "1")]);
                for s in &run.states {
                    let m = mean_square_site(s)?.value;
                    t.push(vec![s.z.into(), m.into(), m.sqrt().into()]);
                }
                tables.push(t);
            }
            Observable::ReturnProbability => {
                let mut t = Table::new("return_probability", &[("z", "m"), ("p0", "1")]);
                for s in &run.states {
                    t.push(vec![s.z.into(), s.site_power(0).into()]);
                }
                tables.push(t);
            }
            Observable::CrossSection | Observable::DlDiagnostics => {}
        }
    }
    Ok(())
}

fn continuum_tables(config: &ScenarioConfig, run: &ContinuumRun, tables: &mut Vec<Table>) -> Result<()> {
    for out in &config.outputs {
        match out {
            Observable::SitePowers => {
                let mut t = Table::new("site_powers_bpm", &[("n", "1"), ("power", "1")]);
                let last = run.sites.last().expect("recorded");
                for (n, p) in last.indices().zip(&last.powers) {
                    t.push(vec![n.into(), (*p).into()]);
                }
                tables.push(t);
            }
            Observable::Trajectory => {
                let mut t = Table::new("trajectory_bpm", &[("z", "m"), ("n", "1"), ("power", "1")]);
                for (f, s) in run.trajectory.fields.iter().zip(&run.sites) {
                    for (n, p) in s.indices().zip(&s.powers) {
                        t.push(vec![f.z.into(), n.into(), (*p).into()]);
                    }
                }
                tables.push(t);
            }
            Observable::CrossSection => {
                let mut t = Table::new("xsection", &[("x", "m"), ("intensity", "1/m")]);
                let last = run.trajectory.last();
                let p = last.power();
                for (i, v) in last.intensity().iter().enumerate() {
                    t.push(vec![last.x(i).into(), (v / p).into()]);
                }
                tables.push(t);
            }
            Observable::Msd => {
                let mut t = Table::new(
                    "msd_bpm",
                    &[("z", "m"), ("msd", "1"), ("sqrt_msd", "1"), ("guided", "1")],
                );
                for (f, s) in run.trajectory.fields.iter().zip(&run.sites) {
                    let m = s.mean_square()?;
                    t.push(vec![f.z.into(), m.into(), m.sqrt().into(), s.total().into()]);
                }
                tables.push(t);
            }
            Observable::ReturnProbability => {
                let mut t = Table::new("return_probability_bpm", &[("z", "m"), ("p0", "1")]);
                for (f, s) in run.trajectory.fields.iter().zip(&run.sites) {
                    t.push(vec![f.z.into(), (s.get(0) / s.total()).into()]);
                }
                tables.push(t);
            }
            Observable::DlDiagnostics => {}
        }
    }
    Ok(())
}

fn diagnostics_table(
    spec: &ArraySpec,
    profile: &BendingProfile,
    delta: f64,
    notes: &mut Vec<String>,
) -> Result<Option<Table>> {
    if profile.period().is_none() {
        notes.push(format!("no DL diagnostics for a {} profile", profile.kind_name()));
        return Ok(None);
    }
    let d = diagnose(spec, profile, delta, LOCALIZATION_TOLERANCE)?;
    let mut t = Table::new(
        "dl_diagnostics",
        &[
            ("Gamma", "1"),
            ("dl_integral_abs", "m"),
            ("delta", "1/m"),
            ("delta_eff", "1/m"),
            ("localized", "1"),
        ],
    );
    t.push(vec![
        d.gamma.into(),
        d.dl_integral.norm().into(),
        delta.into(),
        d.effective_delta.into(),
        (if d.is_localized { 1.0 } else { 0.0 }).into(),
    ]);
    Ok(Some(t))
}

/// Runs one scenario (ignoring any sweep) on the configured engine(s).
pub fn simulate(config: &ScenarioConfig, calibration: Option<&Calibration>) -> Result<Dataset> {
    config.validate()?;
    let calibration = require_calibration(config.engine, calibration)?;
    let mut provenance = config.provenance();
    let spec = &config.spec;
    let delta = config.delta(spec, &mut provenance.notes);
    let mut tables = Vec::new();

    let lattice = if config.engine.lattice() {
        let run = run_lattice(
            spec,
            &config.profile,
            delta,
            &config.excitation,
            &config.z_grid(spec.length),
            config.tolerance,
        )?;
        provenance.tolerances.insert("norm_drift".into(), run.norm_drift);
        lattice_tables(config, &run, &mut tables)?;
        if config.outputs.contains(&Observable::CrossSection) && !config.engine.continuum() {
            provenance.notes.push("cross sections need the continuum engine".into());
        }
        Some(run)
    } else {
        None
    };

    let continuum = if let Some(cal) = calibration {
        let run = run_continuum(spec, &config.profile, &config.excitation, &config.grid, cal, config.z_points)?;
        if run.extrapolated {
            provenance.notes.push(format!(
                "well depth at {:.1} nm extrapolated from the calibration anchors",
                spec.wavelength * 1e9
            ));
        }
        continuum_tables(config, &run, &mut tables)?;
        Some(run)
    } else {
        None
    };

    if let (Some(l), Some(c)) = (&lattice, &continuum) {
        let bpm = c.sites.last().expect("recorded");
        let tb = l.last();
        let mut t = Table::new(
            "cross_check",
            &[("n", "1"), ("power_tb", "1"), ("power_bpm", "1"), ("abs_diff", "1")],
        );
        let mut worst: f64 = 0.0;
        for (n, p) in bpm.indices().zip(&bpm.powers) {
            let q = tb.site_power(n);
            worst = worst.max((p - q).abs());
            t.push(vec![n.into(), q.into(), (*p).into(), (p - q).abs().into()]);
        }
        provenance.tolerances.insert("engine_max_site_difference".into(), worst);
        tables.push(t);
    }

    if config.outputs.contains(&Observable::DlDiagnostics) {
        if let Some(t) = diagnostics_table(spec, &config.profile, delta, &mut provenance.notes)? {
            tables.push(t);
        }
    }

    Ok(Dataset {
        name: config.name.clone(),
        provenance,
        tables,
    })
}

/// Spec and profile for one sweep value.
fn sweep_point(config: &ScenarioConfig, axis: SweepAxis, value: f64) -> Result<(ArraySpec, BendingProfile)> {
    match axis {
        SweepAxis::Wavelength => apply_parameter(&config.spec, &config.profile, FreeParameter::Wavelength, value),
        SweepAxis::Period => apply_parameter(&config.spec, &config.profile, FreeParameter::Period, value),
        SweepAxis::Amplitude => match config.profile {
            BendingProfile::Sinusoidal { period, phase, .. } => {
                Ok((config.spec.clone(), BendingProfile::sinusoidal(value, period, phase)?))
            }
            _ => apply_parameter(&config.spec, &config.profile, FreeParameter::Amplitude, value),
        },
        SweepAxis::Gamma => match config.profile {
            BendingProfile::Sinusoidal { period, phase, .. } => {
                if value < 0.0 {
                    return Err(Error::Config(format!("Γ must be non-negative, got {value}")));
                }
                let a = amplitude_for_gamma(&config.spec, period, value);
                Ok((config.spec.clone(), BendingProfile::sinusoidal(a, period, phase)?))
            }
            _ => Err(Error::UnsupportedProfile(format!(
                "a Γ sweep needs a sinusoidal profile, got {}",
                config.profile.kind_name()
            ))),
        },
    }
}

struct SweepRow {
    gamma: Option<f64>,
    delta: f64,
    delta_eff: Option<f64>,
    dl_abs: Option<f64>,
    tb: Option<(f64, f64)>,
    bpm: Option<(f64, f64)>,
}

fn sweep_row(
    config: &ScenarioConfig,
    calibration: Option<&Calibration>,
    axis: SweepAxis,
    value: f64,
) -> Result<SweepRow> {
    let (spec, profile) = sweep_point(config, axis, value)?;
    profile.validate_for(&spec)?;
    let mut notes = Vec::new();
    let delta = config.delta(&spec, &mut notes);
    let gamma = big_gamma(&spec, &profile).ok();
    let (delta_eff, dl_abs) = match profile.period() {
        Some(_) => {
            let d = diagnose(&spec, &profile, delta, LOCALIZATION_TOLERANCE)?;
            (Some(d.effective_delta), Some(d.dl_integral.norm()))
        }
        None => (None, None),
    };
    let tb = if config.engine.lattice() {
        let run = run_lattice(&spec, &profile, delta, &config.excitation, &[spec.length], config.tolerance)?;
        let m = mean_square_site(run.last())?.value;
        Some((m.sqrt(), run.last().site_power(0)))
    } else {
        None
    };
    let bpm = match calibration {
        Some(cal) => {
            let run = run_continuum(&spec, &profile, &config.excitation, &config.grid, cal, 2)?;
            let s = run.sites.last().expect("recorded");
            Some((s.mean_square()?.sqrt(), s.get(0) / s.total()))
        }
        None => None,
    };
    Ok(SweepRow {
        gamma,
        delta,
        delta_eff,
        dl_abs,
        tb,
        bpm,
    })
}

/// Evaluates the scenario at every sweep value on `jobs` worker threads.
///
/// Rows come back in sweep order; a failing point is recorded in its row's
/// `error` column and the sweep carries on.
pub fn sweep(config: &ScenarioConfig, calibration: Option<&Calibration>, jobs: usize) -> Result<Dataset> {
    config.validate()?;
    let calibration = require_calibration(config.engine, calibration)?;
    let s = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("scenario has no sweep axis".into()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    let rows: Vec<Result<SweepRow>> = pool.install(|| {
        s.values
            .par_iter()
            .map(|&v| sweep_row(config, calibration, s.axis, v))
            .collect()
    });

    let (axis_name, axis_unit) = s.axis.column();
    let mut columns = vec![
        (axis_name, axis_unit),
        ("Gamma", "1"),
        ("delta", "1/m"),
        ("delta_eff", "1/m"),
        ("dl_integral_abs", "m"),
    ];
    if config.engine.lattice() {
        columns.extend([("sqrt_msd", "1"), ("p0", "1")]);
    }
    if config.engine.continuum() {
        columns.extend([("sqrt_msd_bpm", "1"), ("p0_bpm", "1")]);
    }
    columns.push(("error", "text"));
    let mut table = Table::new("sweep", &columns);
    let mut provenance = config.provenance();
    let mut failures = 0;
    for (&v, row) in s.values.iter().zip(rows) {
        let mut cells: Vec<Cell> = vec![v.into()];
        match row {
            Ok(r) => {
                cells.extend([r.gamma.into(), r.delta.into(), r.delta_eff.into(), r.dl_abs.into()]);
                if let Some((m, p)) = r.tb {
                    cells.extend([m.into(), p.into()]);
                }
                if let Some((m, p)) = r.bpm {
                    cells.extend([m.into(), p.into()]);
                }
                cells.push(Cell::Empty);
            }
            Err(e) => {
                failures += 1;
                cells.resize(columns.len() - 1, Cell::Empty);
                cells.push(e.to_string().into());
            }
        }
        table.push(cells);
    }
    if failures > 0 {
        provenance.notes.push(format!("{failures} sweep point(s) failed; see the error column"));
    }
    Ok(Dataset {
        name: config.name.clone(),
        provenance,
        tables: vec![table],
    })
}

/// Phase that a lab-frame tilt picks up per site in the guide frame at z = 0.
pub(crate) fn bloch_phase(spec: &ArraySpec, profile: &BendingProfile, tilt: f64) -> Result<f64> {
    let slope = profile.kinematics_checked(0.0, Side::Right)?.slope;
    let q = spec.substrate_index * (tilt - slope) * spec.site_period / spec.reduced_wavelength();
    Ok(q.rem_euclid(2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{array2, straight_array};

    #[test]
    fn lattice_scenario_tables() {
        let (spec, profile) = straight_array(1610e-9).unwrap();
        let mut c = ScenarioConfig::new("straight", spec, profile);
        c.outputs = vec![
            Observable::SitePowers,
            Observable::Trajectory,
            Observable::Msd,
            Observable::ReturnProbability,
            Observable::DlDiagnostics,
        ];
        let d = simulate(&c, None).unwrap();
        let msd = d.table("msd").unwrap().column("msd").unwrap();
        assert!((msd.last().unwrap() - 141.12).abs() < 0.15);
        assert_eq!(d.table("trajectory").unwrap().columns[2].header(), "power[1]");
        assert!(d.table("dl_diagnostics").is_none());
        assert!(!d.provenance.notes.is_empty());
    }

    #[test]
    fn continuum_needs_calibration() {
        let (spec, profile) = straight_array(1610e-9).unwrap();
        let mut c = ScenarioConfig::new("straight", spec, profile);
        c.engine = Engine::Both;
        assert!(matches!(simulate(&c, None), Err(Error::MissingCalibration(_))));
    }

    #[test]
    fn sweep_keeps_order_and_records_failures() {
        let (spec, profile) = array2(1610e-9).unwrap();
        let mut c = ScenarioConfig::new("gamma", spec, profile);
        c.sweep = Some(Sweep {
            axis: SweepAxis::Gamma,
            values: vec![-1.0, 0.5, 2.404826, 3.0],
        });
        let d = sweep(&c, None, 3).unwrap();
        let t = d.table("sweep").unwrap();
        assert_eq!(t.column("Gamma_target").unwrap(), vec![-1.0, 0.5, 2.404826, 3.0]);
        let err = t.column_index("error").unwrap();
        assert!(matches!(t.rows[0][err], Cell::Text(_)));
        assert_eq!(t.rows[1][err], Cell::Empty);
        let p0 = t.column("p0").unwrap();
        assert!(p0[2] > 0.9999 && p0[3] < 0.5);
    }

    #[test]
    fn empty_sweep_is_empty_dataset() {
        let (spec, profile) = array2(1610e-9).unwrap();
        let mut c = ScenarioConfig::new("empty", spec, profile);
        c.sweep = Some(Sweep {
            axis: SweepAxis::Period,
            values: vec![],
        });
        assert!(sweep(&c, None, 1).unwrap().tables[0].rows.is_empty());
    }

    #[test]
    fn rejects_non_monotone_sweep() {
        let (spec, profile) = array2(1610e-9).unwrap();
        let mut c = ScenarioConfig::new("bad", spec, profile);
        c.sweep = Some(Sweep {
            axis: SweepAxis::Period,
            values: vec![1e-3, 3e-3, 2e-3],
        });
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn normal_incidence_is_bloch_phase_gamma() {
        let (spec, profile) = array2(1610e-9).unwrap();
        let g = big_gamma(&spec, &profile).unwrap();
        let q = bloch_phase(&spec, &profile, 0.0).unwrap();
        assert!(((2.0 * PI - q) - g).abs() < 1e-9);
    }
}
