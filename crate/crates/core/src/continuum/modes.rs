//! Guided modes by imaginary-distance propagation.
//!
//! With `z → −iτ` every component decays as `exp(−E τ/ƛ)`, so repeated
//! split steps with renormalization converge to the lowest state of the
//! chosen parity. The step is refined in stages to push the splitting bias
//! of the fixed point below the Rayleigh-quotient tolerance.

use num_complex::Complex64;
use serde::Serialize;

use super::{Grid, PotentialProfile, SampledField, Spectral, WellModel};
use crate::error::{Error, Result};
use crate::geometry::ArraySpec;

/// Relative Rayleigh-quotient change at which a stage counts as converged.
const RQ_TOLERANCE: f64 = 1e-12;
const CHECK_EVERY: usize = 20;
const MAX_STEPS_PER_STAGE: usize = 400_000;
/// Potential "phase" `δn·dτ/ƛ` of the first stage; later stages divide it by 4.
const FIRST_STAGE_STRENGTH: f64 = 0.2;
const STAGES: usize = 3;
/// Fraction of mode power that must sit within one site period of the well.
const MIN_CONFINEMENT: f64 = 0.9;
/// Steps after which a state whose energy is still above the continuum edge
/// is declared unbound.
const UNBOUND_PATIENCE: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parity {
    Even,
    Odd,
}

/// A bound mode normalized to `∫|ψ|² dx = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct GuidedMode {
    pub field: SampledField,
    /// `n_eff = n_s − E`.
    pub effective_index: f64,
    /// Eigenvalue `E` of `−(ƛ²/2n_s)∂² + V`, in index units (negative when bound).
    pub eigenvalue: f64,
}

struct Solver<'a> {
    grid: Grid,
    lambda_bar: f64,
    potential: &'a [f64],
    kinetic: Vec<f64>,
    spectral: Spectral,
}

impl<'a> Solver<'a> {
    fn new(grid: Grid, spec: &ArraySpec, potential: &'a [f64]) -> Self {
        let lambda_bar = spec.reduced_wavelength();
        let ns = spec.substrate_index;
        let kinetic = grid
            .wavenumbers()
            .iter()
            .map(|k| lambda_bar * lambda_bar * k * k / (2.0 * ns))
            .collect();
        Solver {
            grid,
            lambda_bar,
            potential,
            kinetic,
            spectral: Spectral::new(grid.points),
        }
    }

    fn symmetrize(&self, psi: &mut [Complex64], parity: Parity) {
        let n = psi.len();
        let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
        for i in 0..n {
            let j = self.grid.mirror(i);
            if j > i {
                let a = psi[i];
                let b = psi[j];
                psi[i] = 0.5 * (a + sign * b);
                psi[j] = 0.5 * (b + sign * a);
            } else if j == i && parity == Parity::Odd {
                psi[i] = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn normalize(&self, psi: &mut [Complex64]) {
        let p: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.spacing;
        let s = 1.0 / p.sqrt();
        for c in psi.iter_mut() {
            *c *= s;
        }
    }

    /// `⟨ψ|H|ψ⟩/⟨ψ|ψ⟩` with the exact spectral kinetic operator.
    fn rayleigh(&mut self, psi: &[Complex64]) -> f64 {
        let mut f = psi.to_vec();
        self.spectral.forward(&mut f);
        let n = psi.len() as f64;
        let kin: f64 = f.iter().zip(&self.kinetic).map(|(c, t)| t * c.norm_sqr()).sum::<f64>() / n;
        let pot: f64 = psi.iter().zip(self.potential).map(|(c, v)| v * c.norm_sqr()).sum();
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        (kin + pot) / norm
    }

    /// Lowest state of the given parity, or `None` when the sector has no
    /// state below the continuum edge.
    fn lowest(
        &mut self,
        mut psi: Vec<Complex64>,
        parity: Parity,
        depth: f64,
    ) -> Result<Option<(Vec<Complex64>, f64)>> {
        self.symmetrize(&mut psi, parity);
        self.normalize(&mut psi);
        let mut tau = FIRST_STAGE_STRENGTH * self.lambda_bar / depth;
        let mut energy = self.rayleigh(&psi);
        for _ in 0..STAGES {
            let half_kin: Vec<f64> = self
                .kinetic
                .iter()
                .map(|t| (-0.5 * t * tau / self.lambda_bar).exp())
                .collect();
            let pot: Vec<f64> = self
                .potential
                .iter()
                .map(|v| (-v * tau / self.lambda_bar).exp())
                .collect();
            let mut converged = false;
            let mut steps = 0;
            while steps < MAX_STEPS_PER_STAGE {
                for _ in 0..CHECK_EVERY {
                    self.spectral.forward(&mut psi);
                    for (c, h) in psi.iter_mut().zip(&half_kin) {
                        *c *= h;
                    }
                    self.spectral.inverse(&mut psi);
                    for (c, p) in psi.iter_mut().zip(&pot) {
                        *c *= p;
                    }
                    self.spectral.forward(&mut psi);
                    for (c, h) in psi.iter_mut().zip(&half_kin) {
                        *c *= h;
                    }
                    self.spectral.inverse(&mut psi);
                }
                steps += CHECK_EVERY;
                // keep the state real and of pure parity against round-off
                for c in psi.iter_mut() {
                    c.im = 0.0;
                }
                self.symmetrize(&mut psi, parity);
                self.normalize(&mut psi);
                let e = self.rayleigh(&psi);
                let change = (e - energy).abs();
                energy = e;
                if e >= 0.0 && steps >= UNBOUND_PATIENCE {
                    return Ok(None);
                }
                if change <= RQ_TOLERANCE * e.abs().max(1e-300) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numeric {
                    message: "imaginary-distance mode search did not converge".into(),
                    achieved: energy,
                });
            }
            tau *= 0.25;
        }
        // fix the overall sign so the mode peaks positive
        let peak = psi
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if psi[peak].re < 0.0 {
            for c in psi.iter_mut() {
                *c = -*c;
            }
        }
        Ok(Some((psi, energy)))
    }
}

fn confinement(psi: &[Complex64], grid: &Grid, half_width: f64) -> f64 {
    let total: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    let inside: f64 = psi
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.x(*i).abs() <= half_width)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    inside / total
}

fn seed(grid: &Grid, width: f64, centers: &[f64], parity: Parity) -> Vec<Complex64> {
    grid.xs()
        .iter()
        .map(|&x| {
            let v: f64 = centers
                .iter()
                .map(|&c| {
                    let g = (-((x - c) / width).powi(2)).exp();
                    match (parity, centers.len()) {
                        (Parity::Odd, 1) => g * (x - c) / width,
                        (Parity::Odd, _) => g * c.signum(),
                        _ => g,
                    }
                })
                .sum();
            Complex64::new(v, 0.0)
        })
        .collect()
}

fn isolated_well(spec: &ArraySpec, grid: &Grid) -> Result<PotentialProfile> {
    spec.validate()?;
    if !(spec.well_depth > 0.0) {
        return Err(Error::Model("well depth must be positive".into()));
    }
    PotentialProfile::from_wells(WellModel::centered(spec.well_depth, spec.well_width, spec.site_period, 1), grid)
}

fn is_bound(energy: f64, psi: &[Complex64], grid: &Grid, reach: f64) -> bool {
    energy < 0.0 && confinement(psi, grid, reach) >= MIN_CONFINEMENT
}

/// Fundamental mode of a single well of the array at x = 0.
pub fn fundamental_mode(spec: &ArraySpec, grid: &Grid) -> Result<GuidedMode> {
    let pot = isolated_well(spec, grid)?;
    let mut solver = Solver::new(*grid, spec, &pot.samples);
    let found = solver.lowest(seed(grid, spec.well_width, &[0.0], Parity::Even), Parity::Even, spec.well_depth)?;
    let Some((psi, e)) = found.filter(|(psi, e)| is_bound(*e, psi, grid, spec.site_period)) else {
        return Err(Error::Model(format!(
            "no bound mode for δn = {:.3e}, w = {:.3e} m at λ = {:.4e} m; recalibrate the wells",
            spec.well_depth, spec.well_width, spec.wavelength
        )));
    };
    Ok(GuidedMode {
        field: SampledField::new(grid, psi, 0.0, spec.wavelength)?,
        effective_index: spec.substrate_index - e,
        eigenvalue: e,
    })
}

/// First odd mode of a single well, or `None` when the well is single-mode.
pub fn second_mode(spec: &ArraySpec, grid: &Grid) -> Result<Option<GuidedMode>> {
    let pot = isolated_well(spec, grid)?;
    let mut solver = Solver::new(*grid, spec, &pot.samples);
    let found = solver.lowest(seed(grid, spec.well_width, &[0.0], Parity::Odd), Parity::Odd, spec.well_depth)?;
    let Some((psi, e)) = found.filter(|(psi, e)| is_bound(*e, psi, grid, spec.site_period)) else {
        return Ok(None);
    };
    Ok(Some(GuidedMode {
        field: SampledField::new(grid, psi, 0.0, spec.wavelength)?,
        effective_index: spec.substrate_index - e,
        eigenvalue: e,
    }))
}

/// Coupling `Δ = (E_odd − E_even)/(2ƛ)` from the supermodes of two wells at `±a/2`.
pub fn two_well_coupling(spec: &ArraySpec, grid: &Grid) -> Result<f64> {
    spec.validate()?;
    let half = 0.5 * spec.site_period;
    let pot = PotentialProfile::from_wells(
        WellModel::centered(spec.well_depth, spec.well_width, spec.site_period, 2),
        grid,
    )?;
    let mut solver = Solver::new(*grid, spec, &pot.samples);
    let centers = [-half, half];
    let reach = 2.0 * spec.site_period;
    let mut energy = |parity| -> Result<f64> {
        let state = solver.lowest(seed(grid, spec.well_width, &centers, parity), parity, spec.well_depth)?;
        state
            .filter(|(psi, e)| is_bound(*e, psi, grid, reach))
            .map(|(_, e)| e)
            .ok_or_else(|| {
                Error::Model(format!(
                    "two-well supermodes are not bound for δn = {:.3e}; recalibrate the wells",
                    spec.well_depth
                ))
            })
    };
    let e_even = energy(Parity::Even)?;
    let e_odd = energy(Parity::Odd)?;
    Ok((e_odd - e_even) / (2.0 * spec.reduced_wavelength()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::{gaussian_input, site_powers};
    use crate::geometry::REFERENCE_SUBSTRATE_INDEX;

    fn spec() -> ArraySpec {
        ArraySpec::new(14e-6, 80, 28e-3, REFERENCE_SUBSTRATE_INDEX, 1610e-9)
            .unwrap()
            .with_wells(2.5e-3, 3.0e-6)
    }

    #[test]
    fn fundamental_mode_is_even_and_bounded() {
        let g = Grid::default();
        let m = fundamental_mode(&spec(), &g).unwrap();
        let c = g.points / 2;
        for s in 1..200 {
            let d = m.field.amplitudes[c + s] - m.field.amplitudes[c - s];
            assert!(d.norm() < 1e-8);
        }
        let ns = REFERENCE_SUBSTRATE_INDEX;
        assert!(m.effective_index > ns && m.effective_index < ns + 2.5e-3);
        assert!((m.field.power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_mode_at_long_wavelength() {
        assert!(second_mode(&spec(), &Grid::default()).unwrap().is_none());
    }

    #[test]
    fn deep_well_is_multimode() {
        let deep = spec().with_wells(2.0e-2, 3.0e-6);
        let m = second_mode(&deep, &Grid::default()).unwrap().expect("odd mode");
        assert!(m.eigenvalue > fundamental_mode(&deep, &Grid::default()).unwrap().eigenvalue);
    }

    #[test]
    fn mode_overlaps() {
        let g = Grid::default();
        let s = spec();
        let m = fundamental_mode(&s, &g).unwrap();
        let p = site_powers(&m.field, &s, &m).unwrap();
        assert!((p.get(0) - 1.0).abs() < 1e-12);
        assert!(p.get(1) < 0.05 && (p.get(1) - p.get(-1)).abs() < 1e-12);
        let beam = gaussian_input(3.5e-6, 0.0, 0.0, &g, &s).unwrap();
        assert!(site_powers(&beam, &s, &m).unwrap().get(0) >= 0.7);
        let zero = SampledField::zeros(&g, s.wavelength);
        assert!(site_powers(&zero, &s, &m).unwrap().powers.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn coupling_decreases_with_depth() {
        let g = Grid::default();
        let shallow = two_well_coupling(&spec(), &g).unwrap();
        let deep = two_well_coupling(&spec().with_wells(3.0e-3, 3.0e-6), &g).unwrap();
        assert!(shallow > deep && deep > 0.0);
    }

    #[test]
    fn vanishing_well_has_no_mode() {
        let s = spec().with_wells(1e-7, 3.0e-6);
        assert!(matches!(fundamental_mode(&s, &Grid::default()), Err(Error::Model(_))));
    }
}
