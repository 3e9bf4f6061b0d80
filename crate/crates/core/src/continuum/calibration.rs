//! Calibration of the Gaussian well model against measured couplings.
//!
//! The well width is held fixed and the depth δn is tuned separately at each
//! anchor wavelength; depths in between are interpolated linearly. A single
//! wavelength-independent (δn, w) pair cannot reproduce both anchors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    build_potential, fit_coupling, fundamental_mode, mode_input, propagate, second_mode,
    site_powers, two_well_coupling, BpmConfig, Grid,
};
use crate::error::{Error, Result};
use crate::geometry::{ArraySpec, BendingProfile, DEFAULT_WELL_WIDTH};

pub const CALIBRATION_FILE: &str = "calibration.json";
const SCHEMA_VERSION: u32 = 1;

/// Measured couplings `(λ, Δ)` in SI units: 1.75 cm⁻¹ at 1440 nm, 3 cm⁻¹ at 1610 nm.
pub const MEASURED_COUPLING: [(f64, f64); 2] = [(1440e-9, 175.0), (1610e-9, 300.0)];

const TWO_WELL_TOLERANCE: f64 = 1e-6;
const BPM_TOLERANCE: f64 = 2e-3;
const MAX_SECANT_STEPS: usize = 30;
const MAX_BPM_STEPS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationAnchor {
    pub wavelength: f64,
    pub target_delta: f64,
    pub well_depth: f64,
    /// Coupling from the two-well supermode splitting at this depth.
    pub two_well_delta: f64,
    /// Coupling fitted from a straight-array propagation, when refined.
    pub fitted_delta: Option<f64>,
    pub effective_index: f64,
    pub single_mode: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub schema_version: u32,
    pub well_width: f64,
    pub site_period: f64,
    pub substrate_index: f64,
    pub grid: Grid,
    pub refined_with_bpm: bool,
    /// Sorted by wavelength.
    pub anchors: Vec<CalibrationAnchor>,
}

#[derive(Debug, Clone)]
pub struct CalibrationOptions {
    pub well_width: f64,
    pub grid: Grid,
    pub targets: Vec<(f64, f64)>,
    /// Tune δn until a straight-array propagation fits the target instead of
    /// stopping at the two-well estimate.
    pub refine_with_bpm: bool,
    /// Initial depth guess.
    pub start_depth: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            well_width: DEFAULT_WELL_WIDTH,
            grid: Grid::default(),
            targets: MEASURED_COUPLING.to_vec(),
            refine_with_bpm: false,
            start_depth: 2.5e-3,
        }
    }
}

impl Calibration {
    /// Depth at `wavelength` and whether it was extrapolated.
    pub fn well_depth(&self, wavelength: f64) -> (f64, bool) {
        let a = &self.anchors;
        if a.len() == 1 {
            return (a[0].well_depth, wavelength != a[0].wavelength);
        }
        let last = a.len() - 1;
        let extrapolated = wavelength < a[0].wavelength || wavelength > a[last].wavelength;
        let i = a
            .windows(2)
            .position(|w| wavelength <= w[1].wavelength)
            .unwrap_or(last - 1);
        let (l, r) = (&a[i], &a[i + 1]);
        let t = (wavelength - l.wavelength) / (r.wavelength - l.wavelength);
        (l.well_depth + t * (r.well_depth - l.well_depth), extrapolated)
    }

    /// `spec` with calibrated wells for its wavelength.
    pub fn apply(&self, spec: &ArraySpec) -> Result<ArraySpec> {
        let rel = |a: f64, b: f64| (a - b).abs() > 1e-9 * b.abs();
        if rel(spec.site_period, self.site_period) || rel(spec.substrate_index, self.substrate_index) {
            return Err(Error::Model(format!(
                "calibration was made for a = {:e} m, n_s = {}; rerun `dynloc calibrate`",
                self.site_period, self.substrate_index
            )));
        }
        let (depth, _) = self.well_depth(spec.wavelength);
        let s = spec.with_wells(depth, self.well_width);
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("cannot serialize calibration: {e}")))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingCalibration(path.display().to_string())
            } else {
                Error::io(path, e)
            }
        })?;
        let cal: Calibration = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if cal.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported calibration schema version {}",
                cal.schema_version
            )));
        }
        if cal.anchors.is_empty() {
            return Err(Error::Config("calibration has no anchors".into()));
        }
        Ok(cal)
    }
}

/// Secant iteration on `g(δn) = 0`, keeping the depth positive.
fn secant(
    mut g: impl FnMut(f64) -> Result<f64>,
    x0: f64,
    x1: f64,
    tol: f64,
    max_steps: usize,
) -> Result<f64> {
    let (mut a, mut b) = (x0, x1);
    let (mut ga, mut gb) = (g(a)?, g(b)?);
    for _ in 0..max_steps {
        if gb.abs() < tol {
            return Ok(b);
        }
        if gb == ga {
            break;
        }
        let mut next = b - gb * (b - a) / (gb - ga);
        // limit each jump to a factor of two in depth
        next = next.clamp(0.5 * b, 2.0 * b);
        a = b;
        ga = gb;
        b = next;
        gb = g(b)?;
    }
    if gb.abs() < tol {
        Ok(b)
    } else {
        Err(Error::Numeric {
            message: "well-depth calibration did not converge".into(),
            achieved: gb.abs(),
        })
    }
}

/// Coupling fitted from a straight-array propagation of the calibrated
/// fundamental mode launched in site 0.
pub fn straight_array_coupling(spec: &ArraySpec, grid: &Grid) -> Result<f64> {
    let mode = fundamental_mode(spec, grid)?;
    let potential = build_potential(spec, grid)?;
    let profile = BendingProfile::Straight;
    let input = mode_input(&mode, spec, &profile, 0)?;
    let out = propagate(&input, &potential, &profile, spec, &BpmConfig::straight(grid), spec.length)?;
    let powers = site_powers(out.last(), spec, &mode)?;
    Ok(fit_coupling(&powers, spec.length)?.delta)
}

/// Tunes the well depth at every target wavelength of `options`.
pub fn calibrate(spec: &ArraySpec, options: &CalibrationOptions) -> Result<Calibration> {
    spec.validate()?;
    options.grid.validate()?;
    if options.targets.is_empty() {
        return Err(Error::Config("calibration needs at least one (λ, Δ) target".into()));
    }
    let mut targets = options.targets.clone();
    targets.sort_by(|a, b| a.0.total_cmp(&b.0));
    let grid = &options.grid;
    let mut anchors = Vec::with_capacity(targets.len());
    let mut depth_guess = options.start_depth;
    for &(wavelength, target) in &targets {
        let base = spec.with_wavelength(wavelength);
        let at = |depth: f64| base.with_wells(depth, options.well_width);
        let depth = secant(
            |d| Ok((two_well_coupling(&at(d), grid)? / target).ln()),
            depth_guess,
            depth_guess * 1.05,
            TWO_WELL_TOLERANCE,
            MAX_SECANT_STEPS,
        )?;
        let two_well_delta = two_well_coupling(&at(depth), grid)?;
        let (depth, fitted) = if options.refine_with_bpm {
            let d = secant(
                |d| Ok(straight_array_coupling(&at(d), grid)? / target - 1.0),
                depth,
                depth * 1.01,
                BPM_TOLERANCE,
                MAX_BPM_STEPS,
            )?;
            (d, Some(straight_array_coupling(&at(d), grid)?))
        } else {
            (depth, None)
        };
        let mode = fundamental_mode(&at(depth), grid)?;
        let single_mode = second_mode(&at(depth), grid)?.is_none();
        anchors.push(CalibrationAnchor {
            wavelength,
            target_delta: target,
            well_depth: depth,
            two_well_delta,
            fitted_delta: fitted,
            effective_index: mode.effective_index,
            single_mode,
        });
        depth_guess = depth;
    }
    Ok(Calibration {
        schema_version: SCHEMA_VERSION,
        well_width: options.well_width,
        site_period: spec.site_period,
        substrate_index: spec.substrate_index,
        grid: *grid,
        refined_with_bpm: options.refine_with_bpm,
        anchors,
    })
}
