//! Scalar paraxial beam propagation through the curved array.
//!
//! The envelope obeys `iƛ ∂ψ/∂z = −(ƛ²/2n_s) ∂²ψ/∂x² + V(x − x₀(z)) ψ` with
//! `V ≃ n_s − n(x)`. Fields live on a uniform periodic grid and are advanced
//! by Strang splitting with spectral kinetic steps.

mod bpm;
mod calibration;
mod fit;
mod modes;
mod potential;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArraySpec, BendingProfile, Side};

pub use bpm::{
    kh_map, kh_map_inverse, propagate, propagate_transformed, BpmConfig, FieldTrajectory,
    DEFAULT_ABSORBER_STRENGTH,
};
pub use calibration::{
    calibrate, straight_array_coupling, Calibration, CalibrationAnchor, CalibrationOptions, CALIBRATION_FILE,
    MEASURED_COUPLING,
};
pub use fit::{fit_coupling, CouplingFit, POOR_FIT_RESIDUAL};
pub use modes::{fundamental_mode, second_mode, two_well_coupling, GuidedMode};
pub use potential::{build_potential, PotentialProfile, WellModel};

pub const DEFAULT_GRID_POINTS: usize = 4096;
pub const DEFAULT_GRID_SPACING: f64 = 0.35e-6;

/// Uniform periodic transverse grid centred on x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub points: usize,
    pub spacing: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            points: DEFAULT_GRID_POINTS,
            spacing: DEFAULT_GRID_SPACING,
        }
    }
}

impl Grid {
    pub fn new(points: usize, spacing: f64) -> Result<Self> {
        let g = Grid { points, spacing };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.points.is_power_of_two() || self.points < 64 {
            return Err(Error::Config(format!(
                "grid size must be a power of two ≥ 64, got {}",
                self.points
            )));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::Config(format!("grid spacing must be positive, got {}", self.spacing)));
        }
        Ok(())
    }

    pub fn start(&self) -> f64 {
        -((self.points / 2) as f64) * self.spacing
    }

    pub fn width(&self) -> f64 {
        self.points as f64 * self.spacing
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start() + i as f64 * self.spacing
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points;
        let dk = 2.0 * PI / self.width();
        (0..n)
            .map(|i| if i < n / 2 { i as f64 } else { i as f64 - n as f64 } * dk)
            .collect()
    }

    /// Index of the mirror point `x → −x`.
    pub(crate) fn mirror(&self, i: usize) -> usize {
        (self.points - i) % self.points
    }
}

/// Complex envelope ψ(x) sampled on a [`Grid`] at propagation distance `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub grid_start: f64,
    pub grid_spacing: f64,
    pub amplitudes: Vec<Complex64>,
    pub z: f64,
    pub wavelength: f64,
}

impl SampledField {
    pub fn new(grid: &Grid, amplitudes: Vec<Complex64>, z: f64, wavelength: f64) -> Result<Self> {
        grid.validate()?;
        if amplitudes.len() != grid.points {
            return Err(Error::Config(format!(
                "field has {} samples, grid has {}",
                amplitudes.len(),
                grid.points
            )));
        }
        Ok(SampledField {
            grid_start: grid.start(),
            grid_spacing: grid.spacing,
            amplitudes,
            z,
            wavelength,
        })
    }

    pub fn zeros(grid: &Grid, wavelength: f64) -> Self {
        SampledField {
            grid_start: grid.start(),
            grid_spacing: grid.spacing,
            amplitudes: vec![Complex64::new(0.0, 0.0); grid.points],
            z: 0.0,
            wavelength,
        }
    }

    pub fn grid(&self) -> Grid {
        Grid {
            points: self.amplitudes.len(),
            spacing: self.grid_spacing,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.grid_start + i as f64 * self.grid_spacing
    }

    /// `∫|ψ|² dx`.
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid_spacing
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let p = self.power();
        if !(p > 0.0) {
            return Err(Error::UndefinedObservable("cannot normalize a zero field".into()));
        }
        let s = 1.0 / p.sqrt();
        for c in &mut self.amplitudes {
            *c *= s;
        }
        Ok(self)
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.amplitudes.len() != grid.points
            || (self.grid_spacing - grid.spacing).abs() > 1e-12 * grid.spacing
            || (self.grid_start - grid.start()).abs() > 1e-9 * grid.spacing
        {
            return Err(Error::Config("field and potential live on different grids".into()));
        }
        Ok(())
    }

    /// `‖|a| − |b|‖₂ / ‖b‖₂`, comparing intensity envelopes only.
    pub fn modulus_distance(&self, reference: &SampledField) -> f64 {
        let num: f64 = self
            .amplitudes
            .iter()
            .zip(&reference.amplitudes)
            .map(|(a, b)| (a.norm() - b.norm()).powi(2))
            .sum();
        let den: f64 = reference.amplitudes.iter().map(|b| b.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// `‖a − b‖₂ / ‖b‖₂`.
    pub fn distance(&self, reference: &SampledField) -> f64 {
        let num: f64 = self
            .amplitudes
            .iter()
            .zip(&reference.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.amplitudes.iter().map(|b| b.norm_sqr()).sum();
        (num / den).sqrt()
    }
}

/// Forward/inverse FFT pair with the `1/N` placed on the inverse.
#[derive(Clone)]
pub(crate) struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl Spectral {
    pub(crate) fn new(points: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Spectral {
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            scale: 1.0 / points as f64,
        }
    }

    pub(crate) fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    pub(crate) fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        for c in data.iter_mut() {
            *c *= self.scale;
        }
    }
}

/// `f(x − s)` by spectral interpolation, exact for band-limited periodic data.
pub(crate) fn shift_samples(data: &[Complex64], grid: &Grid, s: f64) -> Vec<Complex64> {
    if s == 0.0 {
        return data.to_vec();
    }
    let mut spec = Spectral::new(grid.points);
    let mut buf = data.to_vec();
    spec.forward(&mut buf);
    for (c, k) in buf.iter_mut().zip(grid.wavenumbers()) {
        *c *= Complex64::from_polar(1.0, -k * s);
    }
    spec.inverse(&mut buf);
    buf
}

/// Guided power in each waveguide mode, starting at site `first`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SitePowers {
    pub first: i64,
    pub powers: Vec<f64>,
}

impl SitePowers {
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.powers.len()).map(move |i| self.first + i as i64)
    }

    pub fn get(&self, n: i64) -> f64 {
        let i = n - self.first;
        if i < 0 || i as usize >= self.powers.len() {
            0.0
        } else {
            self.powers[i as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn normalized(&self) -> Result<SitePowers> {
        let t = self.total();
        if !(t > 0.0) {
            return Err(Error::UndefinedObservable("no guided power".into()));
        }
        Ok(SitePowers {
            first: self.first,
            powers: self.powers.iter().map(|p| p / t).collect(),
        })
    }

    /// `Σ n² P_n / Σ P_n`.
    pub fn mean_square(&self) -> Result<f64> {
        let t = self.total();
        if !(t > 0.0) {
            return Err(Error::UndefinedObservable("no guided power".into()));
        }
        Ok(self
            .indices()
            .zip(&self.powers)
            .map(|(n, p)| (n * n) as f64 * p)
            .sum::<f64>()
            / t)
    }

    /// Centred RMS width in units of sites.
    pub fn rms_width(&self) -> Result<f64> {
        let t = self.total();
        if !(t > 0.0) {
            return Err(Error::UndefinedObservable("no guided power".into()));
        }
        let mean = self.indices().zip(&self.powers).map(|(n, p)| n as f64 * p).sum::<f64>() / t;
        let var = self
            .indices()
            .zip(&self.powers)
            .map(|(n, p)| (n as f64 - mean).powi(2) * p)
            .sum::<f64>()
            / t;
        Ok(var.sqrt())
    }
}

/// Overlaps `⟨m(x − s_j) | ψ⟩` for a list of shifts, evaluated spectrally so
/// sub-grid positions are exact.
fn overlaps(field: &[Complex64], mode: &[Complex64], grid: &Grid, shifts: &[f64]) -> Vec<Complex64> {
    let mut spec = Spectral::new(grid.points);
    let mut f = field.to_vec();
    let mut m = mode.to_vec();
    spec.forward(&mut f);
    spec.forward(&mut m);
    let ks = grid.wavenumbers();
    let product: Vec<Complex64> = f.iter().zip(&m).map(|(a, b)| b.conj() * a).collect();
    let scale = grid.spacing / grid.points as f64;
    shifts
        .iter()
        .map(|&s| {
            product
                .iter()
                .zip(&ks)
                .map(|(p, &k)| p * Complex64::from_polar(1.0, k * s))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Power in the fundamental mode of every site, `P_n = |⟨m_n|ψ⟩|²` with
/// `m_n` the mode centred at `n·a`.
pub fn site_powers(field: &SampledField, spec: &ArraySpec, mode: &GuidedMode) -> Result<SitePowers> {
    let grid = field.grid();
    mode.field.check_grid(&grid)?;
    let sites: Vec<i64> = spec.site_indices().collect();
    let shifts: Vec<f64> = sites.iter().map(|&n| n as f64 * spec.site_period).collect();
    let c = overlaps(&field.amplitudes, &mode.field.amplitudes, &grid, &shifts);
    Ok(SitePowers {
        first: sites[0],
        powers: c.iter().map(|v| v.norm_sqr()).collect(),
    })
}

/// Site powers of a lab-frame field, projected onto the modes of the guides
/// at their local position `n·a + x₀(z)` and local tilt `ẋ₀(z)`.
pub fn site_powers_local(
    field: &SampledField,
    spec: &ArraySpec,
    mode: &GuidedMode,
    profile: &BendingProfile,
) -> Result<SitePowers> {
    let k = profile.kinematics_checked(field.z, Side::Left)?;
    let detilt = spec.substrate_index * k.slope / spec.reduced_wavelength();
    let mut local = field.clone();
    for (i, c) in local.amplitudes.iter_mut().enumerate() {
        *c *= Complex64::from_polar(1.0, -detilt * field.x(i));
    }
    let grid = field.grid();
    local.amplitudes = shift_samples(&local.amplitudes, &grid, -k.displacement);
    site_powers(&local, spec, mode)
}

/// `∫(x/a)²|ψ|² dx / ∫|ψ|² dx` about x = 0.
pub fn continuum_msd(field: &SampledField, spec: &ArraySpec) -> Result<f64> {
    continuum_msd_about(field, spec, 0.0)
}

/// As [`continuum_msd`], measured about `center`.
pub fn continuum_msd_about(field: &SampledField, spec: &ArraySpec, center: f64) -> Result<f64> {
    let p = field.power();
    if !(p > 1e-12) {
        return Err(Error::UndefinedObservable(format!(
            "field power {p:e} too small for a spreading estimate"
        )));
    }
    let a = spec.site_period;
    let m: f64 = field
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, c)| ((field.x(i) - center) / a).powi(2) * c.norm_sqr())
        .sum::<f64>()
        * field.grid_spacing;
    Ok(m / p)
}

/// Normalized Gaussian `exp(−(x−c)²/w_x²)·exp(i n_s·tilt·x/ƛ)`.
pub fn gaussian_input(
    w_x: f64,
    center: f64,
    tilt: f64,
    grid: &Grid,
    spec: &ArraySpec,
) -> Result<SampledField> {
    grid.validate()?;
    if !(w_x > grid.spacing) {
        return Err(Error::Config(format!(
            "beam width {w_x:e} m must exceed the grid spacing {:e} m",
            grid.spacing
        )));
    }
    let kx = spec.substrate_index * tilt / spec.reduced_wavelength();
    let amplitudes = grid
        .xs()
        .into_iter()
        .map(|x| {
            let env = (-((x - center) / w_x).powi(2)).exp();
            if tilt == 0.0 {
                Complex64::new(env, 0.0)
            } else {
                Complex64::from_polar(env, kx * x)
            }
        })
        .collect();
    SampledField::new(grid, amplitudes, 0.0, spec.wavelength)?.normalized()
}

/// The guided mode placed in waveguide `site` at z = 0 and tilted to match
/// the guide's launch slope.
pub fn mode_input(
    mode: &GuidedMode,
    spec: &ArraySpec,
    profile: &BendingProfile,
    site: i64,
) -> Result<SampledField> {
    let grid = mode.field.grid();
    let k = profile.kinematics_checked(0.0, Side::Right)?;
    let kx = spec.substrate_index * k.slope / spec.reduced_wavelength();
    let shifted = shift_samples(&mode.field.amplitudes, &grid, site as f64 * spec.site_period);
    let amplitudes = shifted
        .into_iter()
        .enumerate()
        .map(|(i, c)| c * Complex64::from_polar(1.0, kx * grid.x(i)))
        .collect();
    SampledField::new(&grid, amplitudes, 0.0, spec.wavelength)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::REFERENCE_SUBSTRATE_INDEX;

    fn spec() -> ArraySpec {
        ArraySpec::new(14e-6, 80, 28e-3, REFERENCE_SUBSTRATE_INDEX, 1610e-9).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = Grid::default();
        assert_eq!(g.x(g.points / 2), 0.0);
        assert_eq!(g.mirror(g.points / 2), g.points / 2);
        assert!((g.x(g.mirror(10)) + g.x(10)).abs() < 1e-18);
        assert!(Grid::new(1000, 1e-6).is_err());
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert!(k[g.points - 1] < 0.0);
    }

    #[test]
    fn spectral_shift_moves_gaussian() {
        let g = Grid::new(512, 0.5e-6).unwrap();
        let f: Vec<Complex64> = g.xs().iter().map(|x| Complex64::new((-(x / 10e-6).powi(2)).exp(), 0.0)).collect();
        let s = 3.3e-6;
        let shifted = shift_samples(&f, &g, s);
        for (i, v) in shifted.iter().enumerate() {
            let expect = (-((g.x(i) - s) / 10e-6).powi(2)).exp();
            assert!((v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_input_properties() {
        let g = Grid::default();
        let f = gaussian_input(24.7e-6, 0.0, 0.0, &g, &spec()).unwrap();
        assert!((f.power() - 1.0).abs() < 1e-12);
        assert!(f.amplitudes.iter().all(|c| c.im == 0.0));
        let t = gaussian_input(24.7e-6, 0.0, 0.01, &g, &spec()).unwrap();
        assert!(t.amplitudes.iter().any(|c| c.im != 0.0));
        assert!(gaussian_input(0.1e-6, 0.0, 0.0, &g, &spec()).is_err());
    }

    #[test]
    fn msd_of_two_site_field() {
        let g = Grid::default();
        let s = spec();
        let a = s.site_period;
        let amps = g
            .xs()
            .iter()
            .map(|x| {
                let v = (-((x - a) / 2e-6).powi(2)).exp() + (-((x + a) / 2e-6).powi(2)).exp();
                Complex64::new(v, 0.0)
            })
            .collect();
        let f = SampledField::new(&g, amps, 0.0, 1610e-9).unwrap();
        let m = continuum_msd(&f, &s).unwrap();
        assert!((m - 1.0).abs() < 0.01, "{m}");
        let zero = SampledField::zeros(&g, 1610e-9);
        assert!(matches!(continuum_msd(&zero, &s), Err(Error::UndefinedObservable(_))));
    }

    #[test]
    fn site_power_statistics() {
        let p = SitePowers {
            first: -2,
            powers: vec![0.0, 0.5, 0.0, 0.5, 0.0],
        };
        assert_eq!(p.get(-1), 0.5);
        assert_eq!(p.get(7), 0.0);
        assert_eq!(p.mean_square().unwrap(), 1.0);
        assert_eq!(p.rms_width().unwrap(), 1.0);
    }
}
