//! Half a period of the long array refocuses only for sine-phased bending.

use std::f64::consts::PI;

use dynloc::experiments::{array3, delta_of_lambda, dl_wavelength_array3};
use dynloc::geometry::BendingProfile;
use dynloc::tightbinding::impulse_response;

fn main() -> dynloc::Result<()> {
    let lambda = dl_wavelength_array3()?;
    let (spec, profile) = array3(lambda)?;
    let (a, period) = (profile.amplitude().unwrap(), profile.period().unwrap());
    let delta = delta_of_lambda(lambda).delta;
    println!("array tuned to {:.2} nm, delta {:.3} /cm", lambda * 1e9, delta / 100.0);
    let z: Vec<f64> = (1..=8).map(|k| k as f64 * period / 16.0).collect();
    for (name, phase) in [("sine", 0.0), ("cosine", 0.5 * PI)] {
        let p = BendingProfile::sinusoidal(a, period, phase)?;
        let t = impulse_response(delta, &spec, &p, &z, 1e-10)?;
        let line: Vec<String> = t.states.iter().map(|s| format!("{:.3}", s.site_power(0))).collect();
        println!("{name:>6}: |c0|^2 at z = k Lambda/16: {}", line.join(" "));
    }
    Ok(())
}
