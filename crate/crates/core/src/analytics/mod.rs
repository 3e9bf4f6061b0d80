//! Special functions, the dynamic-localization integral, the closed-form
//! spreading law and inverse design.

mod bessel;
mod design;
pub(crate) mod quad;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

pub use bessel::{bessel_j, bessel_j_orders, first_j0_zero};
pub use design::{apply_parameter, solve_dl_parameter, FreeParameter};

use crate::error::{Error, Result};
use crate::geometry::{big_gamma, ArraySpec, BendingProfile, DrivePhase, Side};

/// Default threshold on `|∫₀^Λ e^{−iγ}|/Λ` below which a profile counts as localizing.
pub const LOCALIZATION_TOLERANCE: f64 = 1e-3;

/// Relative accuracy targeted by the DL-integral quadratures.
const QUAD_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct DlDiagnostics {
    /// Γ for sinusoidal profiles.
    pub gamma: Option<f64>,
    /// `∫₀^Λ e^{−iγ(ξ)} dξ` in metres.
    pub dl_integral: Complex64,
    /// Cycle-averaged coupling `Δ |∫₀^Λ e^{−iγ}| / Λ`; equals `Δ|J₀(Γ)|` for sinusoids.
    pub effective_delta: f64,
    pub is_localized: bool,
    pub tolerance: f64,
}

fn unimodular_integrand<'a>(phase: &'a DrivePhase<'a>) -> impl Fn(f64) -> Complex64 + 'a {
    move |z| Complex64::from_polar(1.0, -phase.at(z, Side::Right))
}

/// Sorted panel boundaries for `[start, end]` including slope discontinuities.
fn breakpoints(profile: &BendingProfile, start: f64, end: f64) -> Vec<f64> {
    let mut pts = vec![start];
    pts.extend(profile.kinks(start, end));
    pts.push(end);
    pts
}

/// One-period DL integral `∫₀^Λ e^{−iγ(ξ)} dξ`; vanishes exactly at dynamic localization.
pub fn dl_integral(spec: &ArraySpec, profile: &BendingProfile) -> Result<Complex64> {
    let period = profile.period().ok_or_else(|| {
        Error::UnsupportedProfile(format!(
            "DL integral needs a periodic profile, got {}",
            profile.kind_name()
        ))
    })?;
    profile.validate()?;
    let phase = DrivePhase::new(spec, profile);
    // the integrand is unimodular, so accuracy is measured against the period
    quad::integrate(
        unimodular_integrand(&phase),
        &breakpoints(profile, 0.0, period),
        QUAD_REL_TOL * period,
        0.0,
    )
}

/// Running DL integral `w(z) = ∫₀^z e^{−iγ(τ)} dτ`.
pub fn w_function(spec: &ArraySpec, profile: &BendingProfile, z: f64) -> Result<Complex64> {
    Ok(w_series(spec, profile, &[z])?[0])
}

/// `w` at each of the non-decreasing positions `z_points`, accumulated interval by interval.
pub fn w_series(
    spec: &ArraySpec,
    profile: &BendingProfile,
    z_points: &[f64],
) -> Result<Vec<Complex64>> {
    if let Some(&last) = z_points.last() {
        profile.displacement(last)?;
    }
    if z_points.iter().any(|&z| z < 0.0) || z_points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("z points must be non-negative and sorted".into()));
    }
    let phase = DrivePhase::new(spec, profile);
    let integrand = unimodular_integrand(&phase);
    let mut out = Vec::with_capacity(z_points.len());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut previous = 0.0;
    for &z in z_points {
        if z > previous {
            acc += quad::integrate(
                &integrand,
                &breakpoints(profile, previous, z),
                QUAD_REL_TOL * (z - previous),
                0.0,
            )?;
            previous = z;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Closed-form mean-square spreading `⟨n²⟩ = 2Δ²[u²(z) + v²(z)]` for a
/// sine-phased sinusoidal array, with `u, v` the cosine and sine integrals
/// of `E₀η(τ)`.
pub fn msd_closed_form(
    z: f64,
    delta: f64,
    spec: &ArraySpec,
    profile: &BendingProfile,
) -> Result<f64> {
    let (amplitude, period) = match *profile {
        BendingProfile::Sinusoidal {
            amplitude,
            period,
            phase,
        } if phase == 0.0 => (amplitude, period),
        _ => {
            return Err(Error::UnsupportedProfile(format!(
                "closed-form spreading law needs a sinusoid with zero phase, got {:?}",
                profile
            )))
        }
    };
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::Domain(format!("z = {z} must be non-negative")));
    }
    let lambda_bar = spec.reduced_wavelength();
    let field = 4.0 * PI * PI * spec.site_period * spec.substrate_index * amplitude
        / (lambda_bar * period * period);
    let k = 2.0 * PI / period;
    let eta = |t: f64| (1.0 - (k * t).cos()) / k;
    // period boundaries as panel edges keep each panel smooth and short
    let mut pts: Vec<f64> = (0..)
        .map(|m| m as f64 * 0.5 * period)
        .take_while(|&p| p < z)
        .collect();
    pts.push(z);
    if pts.len() < 2 {
        return Ok(0.0);
    }
    let tol = QUAD_REL_TOL * z;
    let u = quad::integrate(|t| Complex64::new((field * eta(t)).cos(), 0.0), &pts, tol, 0.0)?.re;
    let v = quad::integrate(|t| Complex64::new((field * eta(t)).sin(), 0.0), &pts, tol, 0.0)?.re;
    Ok(2.0 * delta * delta * (u * u + v * v))
}

/// `Δ_eff = Δ |J₀(Γ)|`.
pub fn effective_coupling(delta: f64, gamma: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("coupling must be non-negative, got {delta}")));
    }
    Ok(delta * bessel_j(0, gamma)?.abs())
}

/// Localization diagnostics of a periodic profile.
pub fn diagnose(
    spec: &ArraySpec,
    profile: &BendingProfile,
    delta: f64,
    tolerance: f64,
) -> Result<DlDiagnostics> {
    let period = profile
        .period()
        .ok_or_else(|| Error::UnsupportedProfile("diagnostics need a periodic profile".into()))?;
    let integral = dl_integral(spec, profile)?;
    let gamma = big_gamma(spec, profile).ok();
    let ratio = integral.norm() / period;
    Ok(DlDiagnostics {
        gamma,
        dl_integral: integral,
        effective_delta: delta * ratio,
        is_localized: ratio < tolerance,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{amplitude_for_gamma, REFERENCE_SUBSTRATE_INDEX};

    fn spec() -> ArraySpec {
        ArraySpec::new(14e-6, 80, 28e-3, REFERENCE_SUBSTRATE_INDEX, 1610e-9).unwrap()
    }

    fn tuned(gamma: f64, period: f64, phase: f64) -> BendingProfile {
        BendingProfile::sinusoidal(amplitude_for_gamma(&spec(), period, gamma), period, phase)
            .unwrap()
    }

    #[test]
    fn straight_integral_is_period_length() {
        let p = BendingProfile::zigzag(0.0, 4e-3).unwrap();
        let v = dl_integral(&spec(), &p).unwrap();
        assert!((v - Complex64::new(4e-3, 0.0)).norm() < 1e-16);
        assert!(matches!(
            dl_integral(&spec(), &BendingProfile::Straight),
            Err(Error::UnsupportedProfile(_))
        ));
        let w = w_function(&spec(), &BendingProfile::Straight, 7e-3).unwrap();
        assert!((w.re - 7e-3).abs() < 1e-17 && w.im == 0.0);
        assert_eq!(w_function(&spec(), &tuned(1.0, 4e-3, 0.0), 0.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dl_integral_matches_bessel_identity() {
        // |∫₀^Λ e^{−iΓ(cos − 1)}| = Λ|J₀(Γ)| across Γ ∈ [0, 6]
        for i in 0..=24 {
            let gamma = 0.25 * i as f64;
            let p = tuned(gamma, 4e-3, 0.0);
            let v = dl_integral(&spec(), &p).unwrap();
            let expected = 4e-3 * bessel_j(0, gamma).unwrap().abs();
            assert!((v.norm() - expected).abs() < 1e-9 * 4e-3, "Γ={gamma}");
        }
        let p = tuned(first_j0_zero(), 4e-3, 0.0);
        assert!(dl_integral(&spec(), &p).unwrap().norm() / 4e-3 < 1e-9);
    }

    #[test]
    fn half_period_w_vanishes_at_dl() {
        // semi-cycle refocusing: |w(Λ/2)| = (Λ/2)|J₀(Γ)|
        let p = tuned(2.404826, 56e-3, 0.0);
        let w = w_function(&spec(), &p, 28e-3).unwrap();
        let expected = 28e-3 * bessel_j(0, 2.404826).unwrap().abs();
        assert!((w.norm() - expected).abs() < 1e-12 * 56e-3);
        let p = tuned(first_j0_zero(), 56e-3, 0.0);
        let w = w_function(&spec(), &p, 28e-3).unwrap();
        assert!(w.norm() < 1e-9 * 56e-3);
    }

    #[test]
    fn closed_form_straight_limit() {
        let flat = BendingProfile::sinusoidal(0.0, 4e-3, 0.0).unwrap();
        let msd = msd_closed_form(0.028, 300.0, &spec(), &flat).unwrap();
        assert!((msd - 2.0 * 300.0f64.powi(2) * 0.028f64.powi(2)).abs() < 1e-9);
        assert!((msd - 141.12).abs() < 0.01);
        assert!((msd.sqrt() - 11.88).abs() < 0.005);
    }

    #[test]
    fn closed_form_vanishes_at_full_periods() {
        let p = tuned(2.404826, 4e-3, 0.0);
        for m in 1..=7 {
            let msd = msd_closed_form(m as f64 * 4e-3, 300.0, &spec(), &p).unwrap();
            assert!(msd < 1e-10, "m={m}: {msd}");
        }
        assert!(msd_closed_form(1e-3, 300.0, &spec(), &tuned(1.0, 4e-3, 0.3)).is_err());
    }

    #[test]
    fn w_modulus_equals_u_v_route() {
        for &(gamma, z) in &[(0.7, 3.3e-3), (2.1, 11.7e-3), (3.9, 25.0e-3)] {
            let p = tuned(gamma, 4e-3, 0.0);
            let w = w_function(&spec(), &p, z).unwrap();
            let delta = 1.0;
            let uv = msd_closed_form(z, delta, &spec(), &p).unwrap() / 2.0;
            assert!((w.norm_sqr() - uv).abs() < 1e-10 * uv.max(1e-12), "Γ={gamma}");
        }
    }

    #[test]
    fn effective_coupling_values() {
        assert_eq!(effective_coupling(3.0, 0.0).unwrap(), 3.0);
        assert!(effective_coupling(3.0, first_j0_zero()).unwrap() < 3e-12);
        let v = effective_coupling(3.0, 3.44).unwrap();
        assert!((v - 3.0 * bessel_j(0, 3.44).unwrap().abs()).abs() < 1e-15);
        assert!((v - 1.113_391_867_678_247).abs() < 1e-12);
        assert!(effective_coupling(-1.0, 1.0).is_err());
    }

    #[test]
    fn zigzag_localizes_when_phase_jump_is_pi() {
        let s = spec();
        // γ alternates between 0 and −2(n_s a/ƛ)·tilt; cancellation at 2(n_s a/ƛ)·tilt = π
        let tilt = PI / (2.0 * s.slope_phase_factor());
        let p = BendingProfile::zigzag(tilt, 4e-3).unwrap();
        let d = diagnose(&s, &p, 300.0, LOCALIZATION_TOLERANCE).unwrap();
        assert!(d.is_localized);
        assert!(d.dl_integral.norm() < 1e-12 * 4e-3);
        assert!(d.gamma.is_none());
    }
}
