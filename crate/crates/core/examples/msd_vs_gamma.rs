//! Mean-square spreading after the full sample against the drive strength,
//! from the ODE and from the closed form.

use dynloc::experiments::{reproduce_figure, Figure};

fn main() -> dynloc::Result<()> {
    let d = reproduce_figure(Figure::Fig6, None, 1)?;
    let t = d.table("fig6_sweep").expect("sweep table");
    let cols = ["Lambda", "Gamma", "msd_ode", "msd_closed", "delta_eff"];
    let data: Vec<Vec<f64>> = cols.iter().map(|c| t.column(c).unwrap()).collect();
    println!("Lambda[mm]  Gamma    <n^2> ODE     closed form   delta_eff[/cm]");
    for i in 0..t.rows.len() {
        println!(
            "{:>9.1}  {:.4}  {:.6e}  {:.6e}  {:.4}",
            data[0][i] * 1e3,
            data[1][i],
            data[2][i],
            data[3][i],
            data[4][i] / 100.0
        );
    }
    Ok(())
}
