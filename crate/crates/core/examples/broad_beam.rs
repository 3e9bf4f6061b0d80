//! Broad Gaussian beams through the long array: width preserved at the
//! localization point, broadened when detuned.

use dynloc::experiments::{
    array3, delta_of_lambda, dl_wavelength_array3, run_lattice, Excitation, FIG5_CONTRAST_WAVELENGTH, FIG5_WIDTHS,
};
use dynloc::tightbinding::SiteState;

fn rms_width(s: &SiteState) -> f64 {
    let p = s.total_power();
    let mean: f64 = s.indices().map(|n| n as f64 * s.site_power(n)).sum::<f64>() / p;
    (s.indices().map(|n| (n as f64 - mean).powi(2) * s.site_power(n)).sum::<f64>() / p).sqrt()
}

fn main() -> dynloc::Result<()> {
    let l_dl = dl_wavelength_array3()?;
    for width in FIG5_WIDTHS {
        for lambda in [l_dl, FIG5_CONTRAST_WAVELENGTH] {
            let (spec, profile) = array3(lambda)?;
            let excitation = Excitation::Gaussian { width, center: 0.0, tilt: 0.0 };
            let t = run_lattice(&spec, &profile, delta_of_lambda(lambda).delta, &excitation, &[0.0, spec.length], 1e-10)?;
            println!(
                "w_x {:.1} um at {:.1} nm: rms width {:.3} -> {:.3} sites",
                width * 1e6,
                lambda * 1e9,
                rms_width(&t.states[0]),
                rms_width(t.last())
            );
        }
    }
    Ok(())
}
