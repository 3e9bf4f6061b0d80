//! Single-guide excitation of the short-period array on and off the
//! localization wavelength: return probability after every period.

use dynloc::experiments::{array2, delta_of_lambda};
use dynloc::tightbinding::{impulse_response, mean_square_site};

fn main() -> dynloc::Result<()> {
    for nm in [1610.0, 1560.0, 1510.0, 1440.0] {
        let (spec, profile) = array2(nm * 1e-9)?;
        let delta = delta_of_lambda(spec.wavelength).delta;
        let z: Vec<f64> = (1..=7).map(|m| m as f64 * 4e-3).collect();
        let t = impulse_response(delta, &spec, &profile, &z, 1e-10)?;
        let p0: Vec<String> = t.states.iter().map(|s| format!("{:.3}", s.site_power(0))).collect();
        println!(
            "{nm:.0} nm: |c0(m Lambda)|^2 = [{}], output rms width {:.2} sites",
            p0.join(", "),
            mean_square_site(t.last())?.value.sqrt()
        );
    }
    Ok(())
}
