//! Array and bending-profile data model.
//!
//! Lengths are SI metres throughout. The bending profile `x₀(z)` is the
//! transverse displacement of the waveguide axes at propagation distance `z`.

mod sampled;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use sampled::SampledPath;

use crate::error::{Error, Result};

/// Substrate index that reproduces `Γ = 2.405` for the short-period array
/// (a = 14 µm, A = 13 µm, Λ = 4 mm) at 1610 nm.
pub const REFERENCE_SUBSTRATE_INDEX: f64 = 2.1556;

/// Default Gaussian well width of the continuum potential model.
pub const DEFAULT_WELL_WIDTH: f64 = 3.0e-6;

/// Default Gaussian well depth (index contrast) of the continuum potential model.
pub const DEFAULT_WELL_DEPTH: f64 = 2.5e-3;

/// Distance from a zig-zag kink, in half periods, treated as on the kink.
const KINK_SNAP: f64 = 1e-9;

/// The physical lattice of identical, equally spaced waveguides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    /// Waveguide separation `a`.
    pub site_period: f64,
    pub site_count: usize,
    /// Sample length `L`.
    pub length: f64,
    /// Substrate refractive index `n_s`.
    pub substrate_index: f64,
    /// Vacuum probe wavelength `λ`.
    pub wavelength: f64,
    /// Peak index contrast `δn` of each Gaussian well.
    pub well_depth: f64,
    /// 1/e half-width `w` of each Gaussian well.
    pub well_width: f64,
}

impl ArraySpec {
    /// Builds a spec with the default well model.
    pub fn new(
        site_period: f64,
        site_count: usize,
        length: f64,
        substrate_index: f64,
        wavelength: f64,
    ) -> Result<Self> {
        let spec = ArraySpec {
            site_period,
            site_count,
            length,
            substrate_index,
            wavelength,
            well_depth: DEFAULT_WELL_DEPTH,
            well_width: DEFAULT_WELL_WIDTH,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("site period", self.site_period),
            ("sample length", self.length),
            ("wavelength", self.wavelength),
            ("well depth", self.well_depth),
            ("well width", self.well_width),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if self.site_count == 0 {
            return Err(Error::Config("site count must be positive".into()));
        }
        if !(self.substrate_index.is_finite() && self.substrate_index > 1.0) {
            return Err(Error::Config(format!(
                "substrate index must exceed 1, got {}",
                self.substrate_index
            )));
        }
        if self.well_width >= self.site_period {
            return Err(Error::Config(format!(
                "well width {} must be smaller than the site period {}",
                self.well_width, self.site_period
            )));
        }
        Ok(())
    }

    /// Reduced wavelength `ƛ = λ / 2π`.
    pub fn reduced_wavelength(&self) -> f64 {
        self.wavelength / (2.0 * PI)
    }

    pub fn with_wavelength(&self, wavelength: f64) -> Self {
        ArraySpec {
            wavelength,
            ..self.clone()
        }
    }

    pub fn with_length(&self, length: f64) -> Self {
        ArraySpec {
            length,
            ..self.clone()
        }
    }

    pub fn with_wells(&self, depth: f64, width: f64) -> Self {
        ArraySpec {
            well_depth: depth,
            well_width: width,
            ..self.clone()
        }
    }

    /// Site indices of the physical array, centred so that site 0 sits at x = 0.
    pub fn site_indices(&self) -> std::ops::RangeInclusive<i64> {
        let n = self.site_count as i64;
        let first = -(n / 2);
        first..=first + n - 1
    }

    /// Phase accumulated between neighbouring sites per unit axis slope, `n_s a / ƛ`.
    pub fn slope_phase_factor(&self) -> f64 {
        self.substrate_index * self.site_period / self.reduced_wavelength()
    }
}

/// Which one-sided limit to take where a profile has a slope discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Displacement and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub displacement: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Trajectory of the waveguide axes, `x₀(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BendingProfile {
    Straight,
    /// `x₀(z) = A sin(2πz/Λ + φ₀) − A sin φ₀`.
    Sinusoidal {
        amplitude: f64,
        period: f64,
        phase: f64,
    },
    /// Triangle wave: slope `+tilt` on the first half period, `−tilt` on the second.
    Zigzag { tilt: f64, period: f64 },
    /// Circular arc of constant curvature `1/radius`, tangent to the z axis at z = 0.
    Circular { radius: f64 },
    Sampled(SampledPath),
}

impl BendingProfile {
    pub fn sinusoidal(amplitude: f64, period: f64, phase: f64) -> Result<Self> {
        let p = BendingProfile::Sinusoidal {
            amplitude,
            period,
            phase,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn zigzag(tilt: f64, period: f64) -> Result<Self> {
        let p = BendingProfile::Zigzag { tilt, period };
        p.validate()?;
        Ok(p)
    }

    pub fn circular(radius: f64) -> Result<Self> {
        let p = BendingProfile::Circular { radius };
        p.validate()?;
        Ok(p)
    }

    /// Interpolated profile through `(z, x₀)` samples on a strictly increasing grid.
    pub fn sampled(z: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        Ok(BendingProfile::Sampled(SampledPath::new(z, x)?))
    }

    /// Samples another profile at `points` uniform positions spanning `[0, length]`.
    pub fn sample_from(other: &BendingProfile, length: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Config("need at least two samples".into()));
        }
        let z: Vec<f64> = (0..points)
            .map(|i| length * i as f64 / (points - 1) as f64)
            .collect();
        let x = z
            .iter()
            .map(|&zi| other.displacement(zi))
            .collect::<Result<Vec<_>>>()?;
        Self::sampled(z, x)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BendingProfile::Straight => Ok(()),
            BendingProfile::Sinusoidal {
                amplitude,
                period,
                phase,
            } => {
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(Error::Config(format!(
                        "amplitude must be non-negative, got {amplitude}"
                    )));
                }
                check_period(period)?;
                if !phase.is_finite() {
                    return Err(Error::Config("phase must be finite".into()));
                }
                Ok(())
            }
            BendingProfile::Zigzag { tilt, period } => {
                if !tilt.is_finite() {
                    return Err(Error::Config("zigzag tilt must be finite".into()));
                }
                check_period(period)
            }
            BendingProfile::Circular { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::Config(format!("radius must be positive, got {radius}")));
                }
                Ok(())
            }
            BendingProfile::Sampled(_) => Ok(()),
        }
    }

    /// Checks that the profile is defined over the whole sample length.
    pub fn validate_for(&self, spec: &ArraySpec) -> Result<()> {
        self.validate()?;
        match self {
            BendingProfile::Sampled(path) => {
                let (lo, hi) = path.range();
                if lo > 0.0 || hi < spec.length * (1.0 - 1e-12) {
                    return Err(Error::Config(format!(
                        "sampled profile covers [{lo}, {hi}] but the sample length is {}",
                        spec.length
                    )));
                }
                Ok(())
            }
            BendingProfile::Circular { radius } if *radius <= spec.length => Err(Error::Config(
                format!("arc radius {radius} must exceed the sample length {}", spec.length),
            )),
            _ => Ok(()),
        }
    }

    pub fn period(&self) -> Option<f64> {
        match *self {
            BendingProfile::Sinusoidal { period, .. } | BendingProfile::Zigzag { period, .. } => {
                Some(period)
            }
            _ => None,
        }
    }

    /// Peak-to-origin amplitude; for zig-zag profiles this is `tilt·Λ/4`.
    pub fn amplitude(&self) -> Option<f64> {
        match *self {
            BendingProfile::Straight => Some(0.0),
            BendingProfile::Sinusoidal { amplitude, .. } => Some(amplitude),
            BendingProfile::Zigzag { tilt, period } => Some(tilt.abs() * period / 4.0),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            BendingProfile::Straight => "straight",
            BendingProfile::Sinusoidal { .. } => "sinusoidal",
            BendingProfile::Zigzag { .. } => "zigzag",
            BendingProfile::Circular { .. } => "circular",
            BendingProfile::Sampled(_) => "sampled",
        }
    }

    fn check_range(&self, z: f64) -> Result<()> {
        if !z.is_finite() || z < 0.0 {
            return Err(Error::Domain(format!("z = {z} outside [0, L]")));
        }
        match self {
            BendingProfile::Sampled(path) => {
                let (lo, hi) = path.range();
                if z < lo || z > hi {
                    return Err(Error::Domain(format!(
                        "z = {z} outside the sampled range [{lo}, {hi}]"
                    )));
                }
            }
            BendingProfile::Circular { radius } if z >= *radius => {
                return Err(Error::Domain(format!("z = {z} beyond the arc radius {radius}")));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn displacement(&self, z: f64) -> Result<f64> {
        self.check_range(z)?;
        Ok(self.kinematics(z, Side::Right).displacement)
    }

    pub fn slope(&self, z: f64) -> Result<f64> {
        self.check_range(z)?;
        Ok(self.kinematics(z, Side::Right).slope)
    }

    /// Axis curvature `ẍ₀(z)`. Zig-zag profiles return 0; their kinks are
    /// reported by [`BendingProfile::kinks`].
    pub fn curvature(&self, z: f64) -> Result<f64> {
        self.check_range(z)?;
        Ok(self.kinematics(z, Side::Right).curvature)
    }

    /// Displacement, slope and curvature together, taking the one-sided
    /// limit `side` at kinks.
    pub fn kinematics_checked(&self, z: f64, side: Side) -> Result<Kinematics> {
        self.check_range(z)?;
        Ok(self.kinematics(z, side))
    }

    /// Slope discontinuities strictly inside `(start, end)`.
    pub fn kinks(&self, start: f64, end: f64) -> Vec<f64> {
        match *self {
            BendingProfile::Zigzag { period, .. } => {
                let half = period / 2.0;
                let first = (start / half).floor() as i64 + 1;
                (first..)
                    .map(|m| m as f64 * half)
                    .take_while(|&z| z < end)
                    .filter(|&z| z > start)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Unchecked evaluation; callers guarantee `z` is in range.
    pub(crate) fn kinematics(&self, z: f64, side: Side) -> Kinematics {
        match *self {
            BendingProfile::Straight => Kinematics {
                displacement: 0.0,
                slope: 0.0,
                curvature: 0.0,
            },
            BendingProfile::Sinusoidal {
                amplitude,
                period,
                phase,
            } => {
                let k = 2.0 * PI / period;
                let (s, c) = (k * z + phase).sin_cos();
                Kinematics {
                    displacement: amplitude * (s - phase.sin()),
                    slope: amplitude * k * c,
                    curvature: -amplitude * k * k * s,
                }
            }
            BendingProfile::Zigzag { tilt, period } => {
                let half = period / 2.0;
                let cycles = (z / period).floor();
                let u = z - cycles * period;
                // Snap to the nearest kink before picking a side: z = m·Λ/2
                // computed elsewhere may land an ulp on either side of it.
                let t = z / half;
                let m = t.round();
                let segment = if (t - m).abs() <= KINK_SNAP {
                    match side {
                        Side::Right => m,
                        Side::Left => m - 1.0,
                    }
                } else {
                    t.floor()
                };
                let rising = segment.max(0.0).rem_euclid(2.0) == 0.0;
                let displacement = if u < half {
                    tilt * u
                } else {
                    tilt * (period - u)
                };
                Kinematics {
                    displacement,
                    slope: if rising { tilt } else { -tilt },
                    curvature: 0.0,
                }
            }
            BendingProfile::Circular { radius } => {
                let root = (radius * radius - z * z).sqrt();
                Kinematics {
                    displacement: radius - root,
                    slope: z / root,
                    curvature: radius * radius / (root * root * root),
                }
            }
            BendingProfile::Sampled(ref path) => path.kinematics(z),
        }
    }

    /// Upper bound of `|ẍ₀|` over `[0, end]`.
    pub(crate) fn max_curvature(&self, end: f64) -> f64 {
        match *self {
            BendingProfile::Straight | BendingProfile::Zigzag { .. } => 0.0,
            BendingProfile::Sinusoidal {
                amplitude, period, ..
            } => amplitude * (2.0 * PI / period).powi(2),
            BendingProfile::Circular { radius } => {
                let z = end.min(radius * (1.0 - 1e-9));
                self.kinematics(z, Side::Right).curvature.abs()
            }
            BendingProfile::Sampled(ref path) => path.max_abs_curvature(),
        }
    }

    /// Same shape with the transverse excursion multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        match self {
            BendingProfile::Straight => Ok(BendingProfile::Straight),
            BendingProfile::Sinusoidal {
                amplitude,
                period,
                phase,
            } => Self::sinusoidal(amplitude * factor, *period, *phase),
            BendingProfile::Zigzag { tilt, period } => Self::zigzag(tilt * factor, *period),
            BendingProfile::Circular { radius } => Self::circular(radius / factor),
            BendingProfile::Sampled(path) => Ok(BendingProfile::Sampled(path.scaled(factor)?)),
        }
    }
}

fn check_period(period: f64) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::Config(format!("period must be positive, got {period}")));
    }
    Ok(())
}

/// Drive phase `γ(z) = (n_s a/ƛ)(ẋ₀(z) − ẋ₀(0))`, precomputed for inner loops.
#[derive(Debug, Clone)]
pub struct DrivePhase<'a> {
    profile: &'a BendingProfile,
    factor: f64,
    initial_slope: f64,
}

impl<'a> DrivePhase<'a> {
    pub fn new(spec: &ArraySpec, profile: &'a BendingProfile) -> Self {
        let factor = spec.slope_phase_factor();
        let initial_slope = profile.kinematics(0.0, Side::Right).slope;
        DrivePhase {
            profile,
            factor,
            initial_slope,
        }
    }

    #[inline]
    pub fn at(&self, z: f64, side: Side) -> f64 {
        self.factor * (self.profile.kinematics(z, side).slope - self.initial_slope)
    }

    /// Upper bound of `|dγ/dz|` over `[0, end]`.
    pub fn rate_bound(&self, end: f64) -> f64 {
        self.factor * self.profile.max_curvature(end)
    }

    pub fn profile(&self) -> &BendingProfile {
        self.profile
    }
}

/// `γ(z)`, the drive phase in the gauge where `γ(0) = 0`.
pub fn gamma_phase(spec: &ArraySpec, profile: &BendingProfile, z: f64) -> Result<f64> {
    profile.check_range(z)?;
    Ok(DrivePhase::new(spec, profile).at(z, Side::Right))
}

/// Dimensionless drive strength `Γ = 4π² n_s a A / (Λ λ)` of a sinusoidal array.
pub fn big_gamma(spec: &ArraySpec, profile: &BendingProfile) -> Result<f64> {
    match *profile {
        BendingProfile::Sinusoidal {
            amplitude, period, ..
        } => Ok(4.0 * PI * PI * spec.substrate_index * spec.site_period * amplitude
            / (period * spec.wavelength)),
        _ => Err(Error::UnsupportedProfile(format!(
            "Γ is defined for sinusoidal profiles only, got {}; use the DL integral instead",
            profile.kind_name()
        ))),
    }
}

/// Sinusoid amplitude that produces drive strength `gamma` at the spec's wavelength.
pub fn amplitude_for_gamma(spec: &ArraySpec, period: f64, gamma: f64) -> f64 {
    gamma * period * spec.wavelength / (4.0 * PI * PI * spec.substrate_index * spec.site_period)
}
