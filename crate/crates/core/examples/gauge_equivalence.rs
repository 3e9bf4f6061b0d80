//! Lab-frame and co-moving-frame beam propagation over one period agree
//! after the frame map.

use dynloc::continuum::*;
use dynloc::experiments::{array2, straight_array};

fn main() -> dynloc::Result<()> {
    let cal = calibrate(&straight_array(1610e-9)?.0, &CalibrationOptions::default())?;
    let (spec, profile) = array2(1610e-9)?;
    let spec = cal.apply(&spec)?.with_length(4e-3);
    let mode = fundamental_mode(&spec, &cal.grid)?;
    let potential = build_potential(&spec, &cal.grid)?;
    let input = mode_input(&mode, &spec, &profile, 0)?;
    for steps in [2048.0, 4096.0, 8192.0] {
        let config = BpmConfig::for_profile(&profile, &cal.grid).with_step(4e-3 / steps);
        let lab = propagate(&input, &potential, &profile, &spec, &config, spec.length)?;
        let moving = propagate_transformed(&kh_map(&input, &profile, &spec)?, &potential, &profile, &spec, &config, spec.length)?;
        let mapped = kh_map(lab.last(), &profile, &spec)?;
        println!(
            "dz = Lambda/{steps}: relative L2 {:.3e}, modulus only {:.3e}",
            mapped.distance(moving.last()),
            mapped.modulus_distance(moving.last())
        );
    }
    Ok(())
}
