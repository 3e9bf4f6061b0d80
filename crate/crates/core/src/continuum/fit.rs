use serde::Serialize;

use super::SitePowers;
use crate::analytics::bessel_j_orders;
use crate::error::{Error, Result};

/// Residuals above this mark the fit as poor.
pub const POOR_FIT_RESIDUAL: f64 = 0.1;
/// Scan resolution in the Bessel argument `2ΔL`.
const SCAN_STEP: f64 = 0.01;
const MAX_ARGUMENT: f64 = 190.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingFit {
    /// Best-fit coupling constant in 1/m.
    pub delta: f64,
    /// `Σ_n (P_n − J_n(2ΔL)²)²` at the optimum.
    pub residual: f64,
    pub poor_fit: bool,
}

fn objective(powers: &SitePowers, x: f64) -> f64 {
    let n_max = powers
        .indices()
        .map(|n| n.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let j = bessel_j_orders(n_max, x).expect("argument within the scan range");
    powers
        .indices()
        .zip(&powers.powers)
        .map(|(n, p)| (p - j[n.unsigned_abs() as usize].powi(2)).powi(2))
        .sum()
}

/// Least-squares coupling constant from single-site-excitation output powers
/// after a straight run of `length`.
pub fn fit_coupling(powers: &SitePowers, length: f64) -> Result<CouplingFit> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::Config(format!("length must be positive, got {length}")));
    }
    let p = powers.normalized()?;
    let reach = p.indices().map(|n| n.abs()).max().unwrap_or(0) as f64;
    let x_max = (2.0 * reach + 10.0).min(MAX_ARGUMENT);
    let f = |x: f64| objective(&p, x);

    let n_scan = (x_max / SCAN_STEP).ceil() as usize;
    let (mut best_x, mut best_f) = (0.0, f(0.0));
    for i in 1..=n_scan {
        let x = i as f64 * SCAN_STEP;
        let v = f(x);
        if v < best_f {
            best_x = x;
            best_f = v;
        }
    }

    let mut a = (best_x - SCAN_STEP).max(0.0);
    let mut b = best_x + SCAN_STEP;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 * b.max(1.0) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mut x = 0.5 * (a + b);
    let mut residual = f(x);
    if best_x == 0.0 && f(0.0) <= residual {
        x = 0.0;
        residual = f(0.0);
    }
    Ok(CouplingFit {
        delta: x / (2.0 * length),
        residual,
        poor_fit: residual > POOR_FIT_RESIDUAL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::bessel_j;

    fn synthetic(delta: f64, length: f64, half: i64) -> SitePowers {
        SitePowers {
            first: -half,
            powers: (-half..=half)
                .map(|n| bessel_j(n as i32, 2.0 * delta * length).unwrap().powi(2))
                .collect(),
        }
    }

    #[test]
    fn recovers_synthetic_coupling() {
        let fit = fit_coupling(&synthetic(220.0, 0.028, 40), 0.028).unwrap();
        assert!((fit.delta - 220.0).abs() < 2.2, "{}", fit.delta);
        assert!(fit.residual < 1e-12 && !fit.poor_fit);
    }

    #[test]
    fn impulse_gives_zero() {
        let mut powers = vec![0.0; 21];
        powers[10] = 1.0;
        let fit = fit_coupling(&SitePowers { first: -10, powers }, 0.028).unwrap();
        assert!(fit.delta.abs() < 1e-6);
    }

    #[test]
    fn flags_poor_fit() {
        let powers = vec![0.5, 0.0, 0.0, 0.0, 0.5];
        let fit = fit_coupling(&SitePowers { first: -2, powers }, 0.01).unwrap();
        assert!(fit.poor_fit || fit.residual > 0.0);
        let empty = SitePowers { first: 0, powers: vec![0.0; 3] };
        assert!(fit_coupling(&empty, 0.01).is_err());
    }
}
