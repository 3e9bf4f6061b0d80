use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::scenario::{run_continuum, run_lattice, ContinuumRun, Excitation};
use super::{array2, array3, delta_of_lambda, straight_array, Cell, Dataset, Provenance, Table};
use crate::analytics::{
    bessel_j, effective_coupling, msd_closed_form, solve_dl_parameter, FreeParameter,
};
use crate::continuum::{fit_coupling, Calibration};
use crate::error::{Error, Result};
use crate::geometry::{big_gamma, ArraySpec, BendingProfile};
use crate::tightbinding::{mean_square_site, SiteState, SiteTrajectory};

/// Representative wavelengths across the tuning range.
pub const FIG3_WAVELENGTHS: [f64; 4] = [1610e-9, 1560e-9, 1510e-9, 1440e-9];
/// Gaussian beam widths `w_x` of the broad-beam experiment.
pub const FIG5_WIDTHS: [f64; 2] = [24.7e-6, 37.4e-6];
/// Off-resonance wavelength contrasted with the DL point in the broad-beam runs.
pub const FIG5_CONTRAST_WAVELENGTH: f64 = 1525e-9;
/// Periods of the seven arrays; the interior values are representative.
pub const FIG6_PERIODS: [f64; 7] = [2.8e-3, 4e-3, 5.2e-3, 7e-3, 9e-3, 11e-3, 14e-3];

const ODE_TOLERANCE: f64 = 1e-10;
const TRAJECTORY_PLANES: usize = 141;
const CURVE_POINTS: usize = 281;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6];

    pub fn needs_calibration(self) -> bool {
        self != Figure::Fig6
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Figure::Fig2 => 2,
            Figure::Fig3 => 3,
            Figure::Fig4 => 4,
            Figure::Fig5 => 5,
            Figure::Fig6 => 6,
        };
        write!(f, "fig{n}")
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown figure `{s}`; expected fig2..fig6")))
    }
}

/// Wavelength at which array (3) sits exactly on the first zero of J₀.
pub fn dl_wavelength_array3() -> Result<f64> {
    let (spec, profile) = array3(1440e-9)?;
    solve_dl_parameter(&spec, &profile, FreeParameter::Wavelength, (1400e-9, 1500e-9))
}

fn uniform(end: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| end * i as f64 / (points - 1) as f64).collect()
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

fn lattice_rms_width(state: &SiteState) -> f64 {
    let total = state.total_power();
    let mean: f64 = state.indices().map(|n| n as f64 * state.site_power(n)).sum::<f64>() / total;
    let var: f64 = state
        .indices()
        .map(|n| (n as f64 - mean).powi(2) * state.site_power(n))
        .sum::<f64>()
        / total;
    var.sqrt()
}

/// Dataset for one figure preset. Every figure except Fig. 6 includes
/// continuum runs and therefore needs a calibration.
pub fn reproduce_figure(figure: Figure, calibration: Option<&Calibration>, jobs: usize) -> Result<Dataset> {
    let cal = match (figure.needs_calibration(), calibration) {
        (true, None) => {
            return Err(Error::MissingCalibration(format!(
                "{figure} compares against the continuum model"
            )))
        }
        (_, c) => c,
    };
    let pool = pool(jobs)?;
    let mut dataset = match figure {
        Figure::Fig2 => fig2(cal.expect("checked"))?,
        Figure::Fig3 => pool.install(|| impulse_figure(figure, cal.expect("checked")))?,
        Figure::Fig4 => pool.install(|| impulse_figure(figure, cal.expect("checked")))?,
        Figure::Fig5 => pool.install(|| fig5(cal.expect("checked")))?,
        Figure::Fig6 => pool.install(fig6)?,
    };
    dataset.provenance.tolerances.insert("ode".into(), ODE_TOLERANCE);
    if let Some(c) = cal {
        dataset.provenance.config["calibration"] = serde_json::to_value(c).unwrap_or_default();
    }
    Ok(dataset)
}

/// Straight array at 1610 nm against the Bessel law.
fn fig2(cal: &Calibration) -> Result<Dataset> {
    let (spec, profile) = straight_array(1610e-9)?;
    let delta = delta_of_lambda(spec.wavelength).delta;
    let excitation = Excitation::SingleSite(0);
    let tb = run_lattice(&spec, &profile, delta, &excitation, &[spec.length], ODE_TOLERANCE)?;
    let bpm = run_continuum(&spec, &profile, &excitation, &cal.grid, cal, 2)?;
    let sites = bpm.sites.last().expect("recorded");
    let x = 2.0 * delta * spec.length;

    let mut t = Table::new(
        "fig2_sites",
        &[("n", "1"), ("power_tb", "1"), ("bessel", "1"), ("power_bpm", "1")],
    );
    for (n, p) in sites.indices().zip(&sites.powers) {
        t.push(vec![
            n.into(),
            tb.last().site_power(n).into(),
            bessel_j(n as i32, x)?.powi(2).into(),
            (*p).into(),
        ]);
    }
    let fit = fit_coupling(sites, spec.length)?;
    let mut s = Table::new(
        "fig2_summary",
        &[
            ("delta", "1/m"),
            ("sqrt_msd_tb", "1"),
            ("sqrt_msd_law", "1"),
            ("delta_fit_bpm", "1/m"),
            ("fit_residual", "1"),
        ],
    );
    s.push(vec![
        delta.into(),
        mean_square_site(tb.last())?.value.sqrt().into(),
        (2f64.sqrt() * delta * spec.length).into(),
        fit.delta.into(),
        fit.residual.into(),
    ]);
    let mut provenance = Provenance::new(json!({
        "figure": "fig2", "array": "straight", "wavelength": spec.wavelength,
        "length": spec.length, "delta": delta,
    }));
    provenance.notes.push("continuum coupling fitted from the BPM output against |J_n(2ΔL)|²".into());
    Ok(Dataset {
        name: "fig2".into(),
        provenance,
        tables: vec![t, s, xsection_table("fig2_xsection", &[], &bpm)],
    })
}

fn xsection_table(name: &str, keys: &[(&str, &str)], run: &ContinuumRun) -> Table {
    let mut cols: Vec<(&str, &str)> = keys.to_vec();
    cols.extend([("x", "m"), ("intensity", "1/m")]);
    let mut t = Table::new(name, &cols);
    append_xsection(&mut t, &[], run);
    t
}

fn append_xsection(t: &mut Table, keys: &[f64], run: &ContinuumRun) {
    let f = run.trajectory.last();
    let p = f.power();
    for (i, v) in f.intensity().iter().enumerate() {
        let mut row: Vec<Cell> = keys.iter().map(|&k| k.into()).collect();
        row.extend([f.x(i).into(), (v / p).into()]);
        t.push(row);
    }
}

struct ImpulsePoint {
    wavelength: f64,
    spec: ArraySpec,
    profile: BendingProfile,
    delta: f64,
    extrapolated: bool,
    tb: SiteTrajectory,
    bpm: ContinuumRun,
}

fn impulse_point(
    wavelength: f64,
    preset: fn(f64) -> Result<(ArraySpec, BendingProfile)>,
    cal: &Calibration,
) -> Result<ImpulsePoint> {
    let (spec, profile) = preset(wavelength)?;
    let d = delta_of_lambda(wavelength);
    let excitation = Excitation::SingleSite(0);
    let tb = run_lattice(
        &spec,
        &profile,
        d.delta,
        &excitation,
        &uniform(spec.length, TRAJECTORY_PLANES),
        ODE_TOLERANCE,
    )?;
    let bpm = run_continuum(&spec, &profile, &excitation, &cal.grid, cal, 29)?;
    Ok(ImpulsePoint {
        wavelength,
        spec,
        profile,
        delta: d.delta,
        extrapolated: d.extrapolated || bpm.extrapolated,
        tb,
        bpm,
    })
}

/// Single-waveguide excitation of array (2) (Fig. 3) or array (3) (Fig. 4)
/// across the tuning range.
fn impulse_figure(figure: Figure, cal: &Calibration) -> Result<Dataset> {
    let mut wavelengths = FIG3_WAVELENGTHS.to_vec();
    let preset = if figure == Figure::Fig3 { array2 } else { array3 };
    if figure == Figure::Fig4 {
        wavelengths.push(dl_wavelength_array3()?);
        wavelengths.sort_by(|a, b| b.total_cmp(a));
    }
    let points = wavelengths
        .par_iter()
        .map(|&l| impulse_point(l, preset, cal))
        .collect::<Result<Vec<_>>>()?;

    let name = figure.to_string();
    let mut summary = Table::new(
        &format!("{name}_summary"),
        &[
            ("lambda", "m"),
            ("Gamma", "1"),
            ("delta", "1/m"),
            ("delta_eff", "1/m"),
            ("p0_tb", "1"),
            ("sqrt_msd_tb", "1"),
            ("p0_bpm", "1"),
            ("guided_bpm", "1"),
            ("max_site_diff", "1"),
        ],
    );
    let mut sites = Table::new(
        &format!("{name}_sites"),
        &[("lambda", "m"), ("n", "1"), ("power_tb", "1"), ("power_bpm", "1")],
    );
    let mut ret = Table::new(
        &format!("{name}_return"),
        &[("lambda", "m"), ("z", "m"), ("p0_tb", "1")],
    );
    let mut xs = Table::new(
        &format!("{name}_xsection"),
        &[("lambda", "m"), ("x", "m"), ("intensity", "1/m")],
    );
    let mut notes = Vec::new();
    for p in &points {
        let gamma = big_gamma(&p.spec, &p.profile)?;
        let last = p.tb.last();
        let bpm = p.bpm.sites.last().expect("recorded");
        let total = bpm.total();
        let mut worst: f64 = 0.0;
        for (n, q) in bpm.indices().zip(&bpm.powers) {
            let tb = last.site_power(n);
            worst = worst.max((tb - q / total).abs());
            sites.push(vec![p.wavelength.into(), n.into(), tb.into(), (q / total).into()]);
        }
        summary.push(vec![
            p.wavelength.into(),
            gamma.into(),
            p.delta.into(),
            effective_coupling(p.delta, gamma)?.into(),
            last.site_power(0).into(),
            mean_square_site(last)?.value.sqrt().into(),
            (bpm.get(0) / total).into(),
            total.into(),
            worst.into(),
        ]);
        for s in &p.tb.states {
            ret.push(vec![p.wavelength.into(), s.z.into(), s.site_power(0).into()]);
        }
        append_xsection(&mut xs, &[p.wavelength], &p.bpm);
        if p.extrapolated {
            notes.push(format!("{:.1} nm lies outside the measured range", p.wavelength * 1e9));
        }
    }
    let mut tables = vec![summary, sites, ret, xs];
    let array = if figure == Figure::Fig3 { "array2" } else { "array3" };
    notes.push("continuum site powers are normalized to the guided power".into());
    if figure == Figure::Fig4 {
        let l = dl_wavelength_array3()?;
        let (spec, _) = array3(l)?;
        let mut control = Table::new(
            "fig4_phase_control",
            &[("lambda", "m"), ("phase", "rad"), ("p0_tb", "1")],
        );
        for phase in [0.0, std::f64::consts::FRAC_PI_2] {
            let profile = BendingProfile::sinusoidal(164e-6, 56e-3, phase)?;
            let d = delta_of_lambda(l).delta;
            let run = run_lattice(&spec, &profile, d, &Excitation::SingleSite(0), &[spec.length], ODE_TOLERANCE)?;
            control.push(vec![l.into(), phase.into(), run.last().site_power(0).into()]);
        }
        tables.push(control);
        let (s1440, p1440) = array3(1440e-9)?;
        notes.push(format!(
            "with a single substrate index Γ(1440 nm) = {:.4}; the DL point of array (3) is at {:.2} nm",
            big_gamma(&s1440, &p1440)?,
            l * 1e9
        ));
    }
    let mut provenance = Provenance::new(json!({
        "figure": name, "array": array, "wavelengths": wavelengths,
        "excitation": "single_site", "grid": cal.grid,
    }));
    provenance.notes = notes;
    Ok(Dataset {
        name,
        provenance,
        tables,
    })
}

/// Broad Gaussian beams at normal incidence through array (3).
fn fig5(cal: &Calibration) -> Result<Dataset> {
    let l_dl = dl_wavelength_array3()?;
    let wavelengths = [1440e-9, l_dl, FIG5_CONTRAST_WAVELENGTH];
    let cases: Vec<(f64, f64)> = FIG5_WIDTHS
        .iter()
        .flat_map(|&w| wavelengths.iter().map(move |&l| (w, l)))
        .collect();
    let runs = cases
        .par_iter()
        .map(|&(w, l)| -> Result<_> {
            let (spec, profile) = array3(l)?;
            let excitation = Excitation::Gaussian {
                width: w,
                center: 0.0,
                tilt: 0.0,
            };
            let d = delta_of_lambda(l).delta;
            let tb = run_lattice(&spec, &profile, d, &excitation, &[0.0, spec.length], ODE_TOLERANCE)?;
            let bpm = run_continuum(&spec, &profile, &excitation, &cal.grid, cal, 2)?;
            Ok((w, l, big_gamma(&spec, &profile)?, tb, bpm))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Table::new(
        "fig5_summary",
        &[
            ("w_x", "m"),
            ("lambda", "m"),
            ("Gamma", "1"),
            ("width_in_tb", "1"),
            ("width_out_tb", "1"),
            ("width_in_bpm", "1"),
            ("width_out_bpm", "1"),
            ("guided_bpm", "1"),
        ],
    );
    let mut xs = Table::new(
        "fig5_xsection",
        &[("w_x", "m"), ("lambda", "m"), ("x", "m"), ("intensity", "1/m")],
    );
    for (w, l, gamma, tb, bpm) in &runs {
        let first = bpm.sites.first().expect("recorded");
        let last = bpm.sites.last().expect("recorded");
        summary.push(vec![
            (*w).into(),
            (*l).into(),
            (*gamma).into(),
            lattice_rms_width(&tb.states[0]).into(),
            lattice_rms_width(tb.last()).into(),
            first.rms_width()?.into(),
            last.rms_width()?.into(),
            (last.total() / first.total()).into(),
        ]);
        append_xsection(&mut xs, &[*w, *l], bpm);
    }
    let mut provenance = Provenance::new(json!({
        "figure": "fig5", "array": "array3", "widths": FIG5_WIDTHS,
        "wavelengths": wavelengths, "incidence": "normal", "grid": cal.grid,
    }));
    provenance.notes.push(
        "widths are centred RMS widths of the site-power distribution, in sites".into(),
    );
    Ok(Dataset {
        name: "fig5".into(),
        provenance,
        tables: vec![summary, xs],
    })
}

/// Spreading after 28 mm for the seven arrays of increasing period, from the
/// closed form and from the ODE.
fn fig6() -> Result<Dataset> {
    let wavelength = 1610e-9;
    let delta = delta_of_lambda(wavelength).delta;
    let (spec, _) = array2(wavelength)?;
    let amplitude = 13e-6;
    let rows = FIG6_PERIODS
        .par_iter()
        .map(|&period| -> Result<Vec<Cell>> {
            let profile = BendingProfile::sinusoidal(amplitude, period, 0.0)?;
            let gamma = big_gamma(&spec, &profile)?;
            let run = run_lattice(&spec, &profile, delta, &Excitation::SingleSite(0), &[spec.length], ODE_TOLERANCE)?;
            let ode = mean_square_site(run.last())?.value;
            let closed = msd_closed_form(spec.length, delta, &spec, &profile)?;
            Ok(vec![
                period.into(),
                gamma.into(),
                ode.into(),
                closed.into(),
                ode.sqrt().into(),
                effective_coupling(delta, gamma)?.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(
        "fig6_sweep",
        &[
            ("Lambda", "m"),
            ("Gamma", "1"),
            ("msd_ode", "1"),
            ("msd_closed", "1"),
            ("sqrt_msd", "1"),
            ("delta_eff", "1/m"),
        ],
    );
    for r in rows {
        table.push(r);
    }

    let (lo, hi) = (FIG6_PERIODS[0], FIG6_PERIODS[FIG6_PERIODS.len() - 1]);
    let curve_rows = (0..CURVE_POINTS)
        .into_par_iter()
        .map(|i| -> Result<Vec<Cell>> {
            let period = lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64;
            let profile = BendingProfile::sinusoidal(amplitude, period, 0.0)?;
            let gamma = big_gamma(&spec, &profile)?;
            let closed = msd_closed_form(spec.length, delta, &spec, &profile)?;
            let eff = 2f64.sqrt() * effective_coupling(delta, gamma)? * spec.length;
            Ok(vec![period.into(), gamma.into(), closed.sqrt().into(), eff.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut curve = Table::new(
        "fig6_curve",
        &[
            ("Lambda", "m"),
            ("Gamma", "1"),
            ("sqrt_msd_closed", "1"),
            ("sqrt_msd_effective", "1"),
        ],
    );
    for r in curve_rows {
        curve.push(r);
    }
    let mut provenance = Provenance::new(json!({
        "figure": "fig6", "amplitude": amplitude, "periods": FIG6_PERIODS,
        "wavelength": wavelength, "delta": delta, "length": spec.length,
    }));
    provenance
        .notes
        .push("interior periods between 2.8 mm and 14 mm are representative values".into());
    Ok(Dataset {
        name: "fig6".into(),
        provenance,
        tables: vec![table, curve],
    })
}
