//! Lattice and continuum engines describe the same drift of a broad beam.

use dynloc::continuum::*;
use dynloc::geometry::*;
use dynloc::tightbinding::{evolve, SiteState};
use num_complex::Complex64;

fn centroid(first: i64, powers: &[f64]) -> f64 {
    let total: f64 = powers.iter().sum();
    powers
        .iter()
        .enumerate()
        .map(|(i, p)| (first + i as i64) as f64 * p)
        .sum::<f64>()
        / total
}

// A broad envelope with zero Bloch momentum drifts at 2Δ·sin(−γ) sites per
// unit length, so the direction of the drift pins the sign of the gauge phase.
#[test]
fn broad_beam_drift_matches_lattice() {
    let grid = Grid::default();
    let spec = ArraySpec::new(14e-6, 80, 7e-3, REFERENCE_SUBSTRATE_INDEX, 1610e-9)
        .unwrap()
        .with_wells(2.50034e-3, 3e-6);
    let period = 14e-3;
    let profile = BendingProfile::sinusoidal(amplitude_for_gamma(&spec, period, 1.2), period, 0.0).unwrap();
    let mode = fundamental_mode(&spec, &grid).unwrap();
    let delta = two_well_coupling(&spec, &grid).unwrap();
    let sigma = 5.0;
    let envelope = |n: i64| (-(n as f64 / sigma).powi(2) / 2.0).exp();

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); grid.points];
    for n in -20..=20 {
        let m = mode_input(&mode, &spec, &BendingProfile::Straight, n).unwrap();
        for (a, b) in amplitudes.iter_mut().zip(&m.amplitudes) {
            *a += envelope(n) * b;
        }
    }
    let input = SampledField::new(&grid, amplitudes, 0.0, spec.wavelength).unwrap();
    let config = BpmConfig::for_profile(&profile, &grid);
    let out = propagate_transformed(&input, &build_potential(&spec, &grid).unwrap(), &profile, &spec, &config, spec.length).unwrap();
    let continuum = site_powers(out.last(), &spec, &mode).unwrap();
    let drift_continuum = centroid(continuum.first, &continuum.powers);

    let initial = SiteState::from_fn(40, |n| Complex64::new(envelope(n), 0.0));
    let lattice = evolve(&initial, delta, &spec, &profile, &[0.0, spec.length], 1e-10).unwrap();
    let drift_lattice = centroid(-40, &lattice.last().powers());

    assert!(drift_lattice.abs() > 1.0, "drift {drift_lattice}");
    assert!(
        (drift_continuum - drift_lattice).abs() < 0.1 * drift_lattice.abs(),
        "continuum {drift_continuum}, lattice {drift_lattice}"
    );
}
