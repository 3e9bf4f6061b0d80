//! Discrete diffraction in a straight array against |J_n(2Δz)|².

use dynloc::analytics::bessel_j;
use dynloc::experiments::straight_array;
use dynloc::geometry::BendingProfile;
use dynloc::tightbinding::{impulse_response, mean_square_site};

fn main() -> dynloc::Result<()> {
    let (spec, _) = straight_array(1610e-9)?;
    let delta = 300.0;
    let t = impulse_response(delta, &spec, &BendingProfile::Straight, &[spec.length], 1e-10)?;
    let out = t.last();
    let x = 2.0 * delta * spec.length;
    println!("  n   P_n (ODE)     J_n(2 delta L)^2");
    for n in (-20..=20).step_by(2) {
        println!("{n:>3}   {:.6e}  {:.6e}", out.site_power(n), bessel_j(n as i32, x)?.powi(2));
    }
    println!("<n^2> = {:.4} (2 delta^2 L^2 = {:.4})", mean_square_site(out)?.value, 2.0 * (delta * spec.length).powi(2));
    Ok(())
}
