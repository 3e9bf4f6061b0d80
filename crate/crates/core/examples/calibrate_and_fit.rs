//! Tune the well depth to the measured couplings, then check the continuum
//! model by fitting the Bessel law to a straight-array propagation.

use dynloc::continuum::{calibrate, straight_array_coupling, CalibrationOptions};
use dynloc::experiments::straight_array;

fn main() -> dynloc::Result<()> {
    let cal = calibrate(&straight_array(1610e-9)?.0, &CalibrationOptions::default())?;
    for a in &cal.anchors {
        let (spec, _) = straight_array(a.wavelength)?;
        let fitted = straight_array_coupling(&cal.apply(&spec)?, &cal.grid)?;
        println!(
            "{:.0} nm: delta_n {:.4e}, n_eff {:.5}, target {:.3} /cm, propagated fit {:.3} /cm",
            a.wavelength * 1e9,
            a.well_depth,
            a.effective_index,
            a.target_delta / 100.0,
            fitted / 100.0
        );
    }
    let path = std::env::temp_dir().join("dynloc-calibration.json");
    cal.save(&path)?;
    println!("saved {}", path.display());
    Ok(())
}
