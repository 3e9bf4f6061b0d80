//! Split-step propagation in the lab frame and in the accelerated frame of
//! the bent axis, and the map between the two.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::Serialize;

use super::{shift_samples, Grid, PotentialProfile, SampledField, Spectral};
use crate::analytics::quad;
use crate::error::{Error, Result};
use crate::geometry::{ArraySpec, BendingProfile, Side};

/// Absorber strength in index units; `exp(−α s(x) dz/ƛ)` per step.
pub const DEFAULT_ABSORBER_STRENGTH: f64 = 2e-2;
/// Absorber width in grid points. Narrower absorbers let steep radiation wrap
/// around, and the lab and bent frames wrap it differently.
pub(crate) const ABSORBER_POINTS: f64 = 150.0;
const STRAIGHT_STEP: f64 = 2e-6;
const CURVED_STEPS_PER_PERIOD: f64 = 2048.0;
const MAX_ABSORBER_FRACTION: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BpmConfig {
    /// Propagation step dz in metres (shortened to divide the length evenly).
    pub step: f64,
    /// Absorber width per grid edge in metres.
    pub absorber_width: f64,
    pub absorber_strength: f64,
    /// Store the field every this many steps (the final field is always kept).
    pub record_every: usize,
}

impl BpmConfig {
    pub fn straight(grid: &Grid) -> Self {
        BpmConfig {
            step: STRAIGHT_STEP,
            absorber_width: ABSORBER_POINTS * grid.spacing,
            absorber_strength: DEFAULT_ABSORBER_STRENGTH,
            record_every: usize::MAX,
        }
    }

    /// Defaults for `profile`: 2 µm steps, or Λ/2048 when that is finer.
    pub fn for_profile(profile: &BendingProfile, grid: &Grid) -> Self {
        let mut c = Self::straight(grid);
        if let Some(p) = profile.period() {
            c.step = c.step.min(p / CURVED_STEPS_PER_PERIOD);
        }
        c
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn without_absorber(mut self) -> Self {
        self.absorber_strength = 0.0;
        self
    }

    pub fn recording_every(mut self, steps: usize) -> Self {
        self.record_every = steps.max(1);
        self
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Config(format!("step must be positive, got {}", self.step)));
        }
        if !(self.absorber_width >= 0.0 && self.absorber_width < MAX_ABSORBER_FRACTION * grid.width()) {
            return Err(Error::Config(format!(
                "absorber width {:e} m must be below 15% of the {:e} m window",
                self.absorber_width,
                grid.width()
            )));
        }
        if !(self.absorber_strength >= 0.0 && self.absorber_strength.is_finite()) {
            return Err(Error::Config("absorber strength must be non-negative".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stored fields of one propagation, first entry at the input plane.
#[derive(Debug, Clone, Serialize)]
pub struct FieldTrajectory {
    pub fields: Vec<SampledField>,
    pub steps: usize,
    pub step: f64,
}

impl FieldTrajectory {
    pub fn last(&self) -> &SampledField {
        self.fields.last().expect("trajectory has a field")
    }
}

/// Super-Gaussian absorber profile in [0, 1] at position `x` on the
/// periodic window, largest at the window edges.
fn absorber_shape(grid: &Grid, width: f64, x: f64) -> f64 {
    if width <= 0.0 {
        return 0.0;
    }
    let start = grid.start();
    let w = grid.width();
    let u = (x - start).rem_euclid(w);
    let d = u.min(w - u);
    if d > 1.5 * width {
        return 0.0;
    }
    (-(2.0 * d / width).powi(4)).exp()
}

enum Frame<'a> {
    Lab,
    /// Accelerated frame with the static potential and the inertial force.
    Transformed { xs: &'a [f64] },
}

fn run(
    field: &SampledField,
    potential: &PotentialProfile,
    profile: &BendingProfile,
    spec: &ArraySpec,
    config: &BpmConfig,
    length: f64,
    transformed: bool,
) -> Result<FieldTrajectory> {
    let grid = potential.grid;
    field.check_grid(&grid)?;
    config.validate(&grid)?;
    profile.validate()?;
    if !(length.is_finite() && length >= 0.0) {
        return Err(Error::Config(format!("length must be non-negative, got {length}")));
    }
    let z0 = field.z;
    let z_end = z0 + length;
    profile.displacement(z_end)?;

    let lambda_bar = spec.reduced_wavelength();
    let ns = spec.substrate_index;
    let steps = if length > 0.0 {
        (length / config.step * (1.0 - 1e-12)).ceil().max(1.0) as usize
    } else {
        0
    };
    let dz = if steps > 0 { length / steps as f64 } else { 0.0 };

    let xs = grid.xs();
    let half_window = 0.5 * grid.width();
    let inertial_bound = if transformed {
        ns * profile.max_curvature(z_end) * half_window
    } else {
        0.0
    };
    let phase_per_step = (potential.max_depth() + inertial_bound) * dz / lambda_bar;
    if phase_per_step > FRAC_PI_4 {
        return Err(Error::Config(format!(
            "potential phase per step {phase_per_step:.3} rad exceeds π/4; reduce the step"
        )));
    }

    let half_kinetic: Vec<Complex64> = grid
        .wavenumbers()
        .iter()
        .map(|k| Complex64::from_polar(1.0, -lambda_bar * k * k * dz / (4.0 * ns)))
        .collect();
    let frame = if transformed {
        Frame::Transformed { xs: &xs }
    } else {
        Frame::Lab
    };
    let static_absorber: Vec<f64> = xs
        .iter()
        .map(|&x| absorber_shape(&grid, config.absorber_width, x))
        .collect();

    let mut spectral = Spectral::new(grid.points);
    let mut psi = field.amplitudes.clone();
    let mut v = vec![0.0; grid.points];
    let mut factor = vec![Complex64::new(0.0, 0.0); grid.points];
    let mut fields = vec![field.clone()];
    let alpha = config.absorber_strength;

    spectral.forward(&mut psi);
    for step in 0..steps {
        let zm = z0 + (step as f64 + 0.5) * dz;
        let k = profile.kinematics_checked(zm, Side::Right)?;
        for (c, h) in psi.iter_mut().zip(&half_kinetic) {
            *c *= h;
        }
        spectral.inverse(&mut psi);

        match frame {
            Frame::Lab => {
                potential.shifted_into(k.displacement, &mut v);
                for i in 0..grid.points {
                    let loss = alpha * static_absorber[i];
                    factor[i] = Complex64::from_polar((-loss * dz / lambda_bar).exp(), -v[i] * dz / lambda_bar);
                }
            }
            Frame::Transformed { xs } => {
                let force = ns * k.curvature;
                for i in 0..grid.points {
                    let x = xs[i];
                    // the lab-fixed absorber seen from the moving frame
                    let loss = if alpha > 0.0 {
                        alpha * absorber_shape(&grid, config.absorber_width, x + k.displacement)
                    } else {
                        0.0
                    };
                    let vi = potential.samples[i] + force * x;
                    factor[i] = Complex64::from_polar((-loss * dz / lambda_bar).exp(), -vi * dz / lambda_bar);
                }
            }
        }
        for (c, f) in psi.iter_mut().zip(&factor) {
            *c *= f;
        }

        spectral.forward(&mut psi);
        for (c, h) in psi.iter_mut().zip(&half_kinetic) {
            *c *= h;
        }
        let done = step + 1;
        if done == steps || done % config.record_every == 0 {
            let mut out = psi.clone();
            spectral.inverse(&mut out);
            fields.push(SampledField {
                amplitudes: out,
                z: z0 + done as f64 * dz,
                ..field.clone()
            });
        }
    }
    if let Some(last) = fields.last_mut() {
        if steps > 0 {
            last.z = z_end;
        }
    }
    Ok(FieldTrajectory {
        fields,
        steps,
        step: dz,
    })
}

/// Lab-frame propagation over `length` with the wells following `x₀(z)`.
pub fn propagate(
    field: &SampledField,
    potential: &PotentialProfile,
    profile: &BendingProfile,
    spec: &ArraySpec,
    config: &BpmConfig,
    length: f64,
) -> Result<FieldTrajectory> {
    run(field, potential, profile, spec, config, length, false)
}

/// Propagation in the frame co-moving with the axis: straight wells plus the
/// inertial term `n_s ẍ₀(z) x′`. Fields are in transformed coordinates.
pub fn propagate_transformed(
    field: &SampledField,
    potential: &PotentialProfile,
    profile: &BendingProfile,
    spec: &ArraySpec,
    config: &BpmConfig,
    length: f64,
) -> Result<FieldTrajectory> {
    if matches!(profile, BendingProfile::Zigzag { .. }) {
        return Err(Error::UnsupportedProfile(
            "zig-zag curvature is impulsive; use the lab frame or the tight-binding engine".into(),
        ));
    }
    run(field, potential, profile, spec, config, length, true)
}

/// `∫₀^z ẋ₀² dξ`.
fn slope_square_integral(profile: &BendingProfile, z: f64) -> Result<f64> {
    if z <= 0.0 || matches!(profile, BendingProfile::Straight) {
        return Ok(0.0);
    }
    profile.slope(z)?;
    let mut pts = vec![0.0];
    pts.extend(profile.kinks(0.0, z));
    pts.push(z);
    let v = quad::integrate(
        |t| Complex64::new(profile.kinematics_checked(t, Side::Right).map(|k| k.slope * k.slope).unwrap_or(0.0), 0.0),
        &pts,
        1e-15 * z,
        1e-13,
    )?;
    Ok(v.re)
}

/// Lab field → accelerated frame:
/// `φ(x′) = ψ(x′ + x₀) exp[−i(n_s/ƛ)ẋ₀x′ − i(n_s/2ƛ)∫₀^z ẋ₀²]`.
pub fn kh_map(field: &SampledField, profile: &BendingProfile, spec: &ArraySpec) -> Result<SampledField> {
    let k = profile.kinematics_checked(field.z, Side::Left)?;
    let q = spec.substrate_index / spec.reduced_wavelength();
    let global = 0.5 * q * slope_square_integral(profile, field.z)?;
    let grid = field.grid();
    let shifted = shift_samples(&field.amplitudes, &grid, -k.displacement);
    let amplitudes = shifted
        .into_iter()
        .enumerate()
        .map(|(i, c)| c * Complex64::from_polar(1.0, -q * k.slope * field.x(i) - global))
        .collect();
    Ok(SampledField {
        amplitudes,
        ..field.clone()
    })
}

/// Inverse of [`kh_map`].
pub fn kh_map_inverse(
    field: &SampledField,
    profile: &BendingProfile,
    spec: &ArraySpec,
) -> Result<SampledField> {
    let k = profile.kinematics_checked(field.z, Side::Left)?;
    let q = spec.substrate_index / spec.reduced_wavelength();
    let global = 0.5 * q * slope_square_integral(profile, field.z)?;
    let grid = field.grid();
    let tilted: Vec<Complex64> = field
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, c)| c * Complex64::from_polar(1.0, q * k.slope * field.x(i) + global))
        .collect();
    Ok(SampledField {
        amplitudes: shift_samples(&tilted, &grid, k.displacement),
        ..field.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::{gaussian_input, WellModel};
    use crate::geometry::REFERENCE_SUBSTRATE_INDEX;

    fn spec() -> ArraySpec {
        ArraySpec::new(14e-6, 80, 28e-3, REFERENCE_SUBSTRATE_INDEX, 1610e-9).unwrap()
    }

    fn empty(grid: &Grid) -> PotentialProfile {
        PotentialProfile::from_wells(WellModel::centered(0.0, 3e-6, 14e-6, 1), grid).unwrap()
    }

    #[test]
    fn free_space_fresnel_gaussian() {
        let g = Grid::new(2048, 0.5e-6).unwrap();
        let s = spec();
        let w0 = 20e-6;
        let input = gaussian_input(w0, 0.0, 0.0, &g, &s).unwrap();
        let z = 5e-3;
        let cfg = BpmConfig::straight(&g).without_absorber();
        let out = propagate(&input, &empty(&g), &BendingProfile::Straight, &s, &cfg, z).unwrap();
        let q = Complex64::new(w0 * w0, 2.0 * s.reduced_wavelength() * z / s.substrate_index);
        let norm = input.amplitudes[g.points / 2].re;
        let exact: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| norm * (Complex64::new(w0 * w0, 0.0) / q).sqrt() * (-x * x / q).exp())
            .collect();
        let reference = SampledField::new(&g, exact, z, s.wavelength).unwrap();
        assert!(out.last().distance(&reference) < 1e-8);
        assert!((out.last().z - z).abs() < 1e-18);
    }

    #[test]
    fn unitary_without_absorber() {
        let g = Grid::new(1024, 0.35e-6).unwrap();
        let s = spec().with_wells(2.5e-3, 3e-6);
        let pot = PotentialProfile::from_wells(WellModel::centered(2.5e-3, 3e-6, 14e-6, 9), &g).unwrap();
        let input = gaussian_input(5e-6, 0.0, 0.0, &g, &s).unwrap();
        let cfg = BpmConfig::straight(&g).without_absorber();
        let out = propagate(&input, &pot, &BendingProfile::Straight, &s, &cfg, 2e-3).unwrap();
        assert_eq!(out.steps, 1000);
        assert!((out.last().power() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn straight_frames_coincide() {
        let g = Grid::new(1024, 0.35e-6).unwrap();
        let s = spec().with_wells(2.5e-3, 3e-6);
        let pot = PotentialProfile::from_wells(WellModel::centered(2.5e-3, 3e-6, 14e-6, 9), &g).unwrap();
        let input = gaussian_input(5e-6, 0.0, 0.0, &g, &s).unwrap();
        let cfg = BpmConfig::straight(&g);
        let a = propagate(&input, &pot, &BendingProfile::Straight, &s, &cfg, 1e-3).unwrap();
        let b = propagate_transformed(&input, &pot, &BendingProfile::Straight, &s, &cfg, 1e-3).unwrap();
        assert!(a.last().distance(b.last()) < 1e-12);
    }

    #[test]
    fn kh_map_round_trip_and_modulus() {
        let g = Grid::new(1024, 0.35e-6).unwrap();
        let s = spec();
        let p = BendingProfile::sinusoidal(13e-6, 4e-3, 0.0).unwrap();
        let mut f = gaussian_input(8e-6, 0.0, 0.0, &g, &s).unwrap();
        f.z = 1.3e-3;
        let x0 = p.displacement(1.3e-3).unwrap();
        let m = kh_map(&f, &p, &s).unwrap();
        let back = kh_map_inverse(&m, &p, &s).unwrap();
        assert!(back.distance(&f) < 1e-12);
        let moved = gaussian_input(8e-6, -x0, 0.0, &g, &s).unwrap();
        assert!(m.modulus_distance(&moved) < 1e-8);
        // identity for straight guides
        let id = kh_map(&f, &BendingProfile::Straight, &s).unwrap();
        assert_eq!(id.amplitudes, f.amplitudes);
    }

    #[test]
    fn rejects_zigzag_and_coarse_steps() {
        let g = Grid::new(1024, 0.35e-6).unwrap();
        let s = spec();
        let input = gaussian_input(5e-6, 0.0, 0.0, &g, &s).unwrap();
        let z = BendingProfile::zigzag(0.01, 4e-3).unwrap();
        let cfg = BpmConfig::for_profile(&z, &g);
        assert!(matches!(
            propagate_transformed(&input, &empty(&g), &z, &s, &cfg, 1e-3),
            Err(Error::UnsupportedProfile(_))
        ));
        let deep = PotentialProfile::from_wells(WellModel::centered(0.05, 3e-6, 14e-6, 1), &g).unwrap();
        let coarse = BpmConfig::straight(&g).with_step(20e-6);
        assert!(matches!(
            propagate(&input, &deep, &BendingProfile::Straight, &s, &coarse, 1e-3),
            Err(Error::Config(_))
        ));
        let wide = BpmConfig {
            absorber_width: 0.2 * g.width(),
            ..cfg
        };
        assert!(wide.validate(&g).is_err());
    }
}
