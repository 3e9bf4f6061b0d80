//! Different axis shapes: sinusoid, zig-zag and circular arc, compared via the
//! localization integral and the exact impulse response.

use dynloc::analytics::dl_integral;
use dynloc::geometry::{amplitude_for_gamma, BendingProfile};
use dynloc::experiments::straight_array;
use dynloc::tightbinding::{dk_oracle, impulse_response, mean_square_site};

fn main() -> dynloc::Result<()> {
    let (spec, _) = straight_array(1610e-9)?;
    let period = 4e-3;
    // slopes ±t make γ jump by 2t·k between half periods; w vanishes when that jump is π
    let zigzag_tilt = 0.5 * std::f64::consts::PI / spec.slope_phase_factor();
    let profiles = [
        ("straight", BendingProfile::Straight),
        ("sinusoid at J0 zero", BendingProfile::sinusoidal(amplitude_for_gamma(&spec, period, 2.404826), period, 0.0)?),
        ("zig-zag, tuned", BendingProfile::zigzag(zigzag_tilt, period)?),
        ("circular arc, R = 2 m", BendingProfile::circular(2.0)?),
    ];
    for (name, p) in profiles {
        let w = match p.period() {
            Some(_) => format!("{:.2e}", dl_integral(&spec, &p)?.norm() / period),
            None => "-".into(),
        };
        let t = impulse_response(300.0, &spec, &p, &[spec.length], 1e-10)?;
        println!(
            "{name:>22}: |w(Lambda)|/Lambda {w:>9}, <n^2>(L) {:>9.4}, P0 {:.4} (exact {:.4})",
            mean_square_site(t.last())?.value,
            t.last().site_power(0),
            dk_oracle(0, spec.length, 300.0, &spec, &p)?
        );
    }
    Ok(())
}
