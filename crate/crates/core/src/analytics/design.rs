use serde::{Deserialize, Serialize};

use super::{bessel_j, dl_integral};
use crate::error::{Error, Result};
use crate::geometry::{big_gamma, ArraySpec, BendingProfile};

/// Design parameter left free when tuning an array to dynamic localization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParameter {
    /// Sinusoid amplitude (or zig-zag tilt / sampled excursion, scaled proportionally).
    Amplitude,
    Period,
    Wavelength,
}

/// Minimum of `|∫₀^Λ e^{−iγ}|/Λ` accepted as a root for general profiles.
const GENERAL_ROOT_THRESHOLD: f64 = 1e-6;
const SCAN_POINTS: usize = 48;

/// Spec and profile with one parameter replaced by `value`.
pub fn apply_parameter(
    spec: &ArraySpec,
    profile: &BendingProfile,
    free: FreeParameter,
    value: f64,
) -> Result<(ArraySpec, BendingProfile)> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::Config(format!("{free:?} must be positive, got {value}")));
    }
    match free {
        FreeParameter::Wavelength => Ok((spec.with_wavelength(value), profile.clone())),
        FreeParameter::Amplitude => {
            let current = profile.amplitude().filter(|&a| a > 0.0).ok_or_else(|| {
                Error::UnsupportedProfile(format!(
                    "cannot rescale the amplitude of a {} profile",
                    profile.kind_name()
                ))
            })?;
            Ok((spec.clone(), profile.scaled(value / current)?))
        }
        FreeParameter::Period => {
            let p = match *profile {
                BendingProfile::Sinusoidal {
                    amplitude, phase, ..
                } => BendingProfile::sinusoidal(amplitude, value, phase)?,
                BendingProfile::Zigzag { tilt, period } => {
                    // keep the excursion fixed so the period is the only change
                    BendingProfile::zigzag(tilt * period / value, value)?
                }
                _ => {
                    return Err(Error::UnsupportedProfile(format!(
                        "{} profiles have no period",
                        profile.kind_name()
                    )))
                }
            };
            Ok((spec.clone(), p))
        }
    }
}

/// Finds the value of `free` inside `bracket` that puts the array at dynamic
/// localization.
///
/// Sinusoids are solved as a root of `J₀(Γ)`; other periodic profiles by
/// golden-section minimization of `|∫₀^Λ e^{−iγ}|`.
pub fn solve_dl_parameter(
    spec: &ArraySpec,
    profile: &BendingProfile,
    free: FreeParameter,
    bracket: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Config(format!("invalid bracket [{lo}, {hi}]")));
    }
    let scan = |f: &dyn Fn(f64) -> Result<f64>| -> Result<Vec<(f64, f64)>> {
        (0..SCAN_POINTS)
            .map(|i| {
                let p = lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64;
                Ok((p, f(p)?))
            })
            .collect()
    };

    if matches!(profile, BendingProfile::Sinusoidal { .. }) {
        let f = |p: f64| -> Result<f64> {
            let (s, prof) = apply_parameter(spec, profile, free, p)?;
            bessel_j(0, big_gamma(&s, &prof)?)
        };
        let (mut a, mut b) = (lo, hi);
        let (mut fa, fb) = (f(a)?, f(b)?);
        if fa * fb > 0.0 {
            return Err(Error::DesignInfeasible {
                message: format!("J0(Γ) does not change sign on [{lo}, {hi}]"),
                scanned: scan(&f)?,
            });
        }
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        while b - a > 1e-12 * b.abs() {
            let m = 0.5 * (a + b);
            let fm = f(m)?;
            if fm == 0.0 {
                return Ok(m);
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        return Ok(0.5 * (a + b));
    }

    let period_of = |prof: &BendingProfile| {
        prof.period().ok_or_else(|| {
            Error::UnsupportedProfile(format!(
                "DL design needs a periodic profile, got {}",
                prof.kind_name()
            ))
        })
    };
    let g = |p: f64| -> Result<f64> {
        let (s, prof) = apply_parameter(spec, profile, free, p)?;
        Ok(dl_integral(&s, &prof)?.norm() / period_of(&prof)?)
    };
    let samples = scan(&g)?;
    let best = samples
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .map(|(i, _)| i)
        .expect("non-empty scan");
    let mut a = samples[best.saturating_sub(1)].0;
    let mut b = samples[(best + 1).min(SCAN_POINTS - 1)].0;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    while b - a > 1e-11 * b.abs() {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d)?;
        }
    }
    let root = 0.5 * (a + b);
    if g(root)? < GENERAL_ROOT_THRESHOLD {
        Ok(root)
    } else {
        Err(Error::DesignInfeasible {
            message: format!(
                "minimum |DL integral|/Λ = {:.3e} on [{lo}, {hi}] exceeds {GENERAL_ROOT_THRESHOLD:.0e}",
                g(root)?
            ),
            scanned: samples,
        })
    }
}
