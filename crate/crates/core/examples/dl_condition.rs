//! Drive strength of the short-period array and the wavelength that puts it
//! exactly at dynamic localization.

use dynloc::analytics::{diagnose, first_j0_zero, solve_dl_parameter, FreeParameter, LOCALIZATION_TOLERANCE};
use dynloc::experiments::{array2, delta_of_lambda};
use dynloc::geometry::big_gamma;

fn main() -> dynloc::Result<()> {
    let (spec, profile) = array2(1610e-9)?;
    println!("first zero of J0: {:.7}", first_j0_zero());
    println!("Gamma at 1610 nm: {:.5}", big_gamma(&spec, &profile)?);

    let lambda = solve_dl_parameter(&spec, &profile, FreeParameter::Wavelength, (1.4e-6, 1.7e-6))?;
    println!("exact DL wavelength: {:.3} nm", lambda * 1e9);

    for nm in [1440.0, 1525.0, 1610.0] {
        let s = spec.with_wavelength(nm * 1e-9);
        let d = diagnose(&s, &profile, delta_of_lambda(s.wavelength).delta, LOCALIZATION_TOLERANCE)?;
        println!(
            "{nm:.0} nm: Gamma {:.4}, |w(Lambda)|/Lambda {:.2e}, delta_eff {:.3} /cm, localized: {}",
            d.gamma.unwrap_or(f64::NAN),
            d.dl_integral.norm() / 4e-3,
            d.effective_delta / 100.0,
            d.is_localized
        );
    }
    Ok(())
}
