//! The `dynloc` binary: exit codes, output files and their schemas.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dynloc::analytics::bessel_j_orders;

const MINIMAL: &str = r#"
schema_version = 1
name = "straight"

[array]
a = "14um"
length = "28mm"
lambda = "1610nm"
delta = "3percm"

[excitation]
single_site = 0

[output]
observables = ["site_powers", "trajectory", "msd"]
z_points = 5
"#;

fn dynloc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynloc"))
        .current_dir(dir)
        .env_remove("DYNLOC_OUTPUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_tables_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), MINIMAL).unwrap();
    let o = dynloc(dir.path(), &["simulate", "s.toml", "--plots"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    assert_eq!(header(&out.join("site_powers.csv")), "n[1],power[1]");
    assert_eq!(header(&out.join("trajectory.csv")), "z[m],n[1],power[1]");
    assert!(out.join("trajectory.svg").is_file());

    let msd = fs::read_to_string(out.join("msd.csv")).unwrap();
    let last: Vec<f64> = msd.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 0.028);
    assert!((last[1] - 141.12).abs() < 1e-6, "{last:?}");

    let prov: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("provenance.json")).unwrap()).unwrap();
    assert_eq!(prov["config"]["spec"]["wavelength"], 1.61e-6);
    assert!(prov["tolerances"]["ode"].is_number());
}

#[test]
fn overrides_and_env_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), MINIMAL).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dynloc"))
        .current_dir(dir.path())
        .env("DYNLOC_OUTPUT_DIR", "elsewhere")
        .args(["simulate", "s.toml", "--set", "array.delta=1.75percm", "--set", "output.observables=[\"msd\"]"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let msd = fs::read_to_string(dir.path().join("elsewhere/msd.csv")).unwrap();
    let last: f64 = msd.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let want = 2.0 * (175.0f64 * 0.028).powi(2);
    assert!((last - want).abs() < 1e-6 * want);
    assert!(!dir.path().join("elsewhere/site_powers.csv").exists());

    let o = dynloc(dir.path(), &["simulate", "s.toml", "--set", "array.detla=1percm"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("detla"));
}

#[test]
fn validation_and_io_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("v99.toml"), MINIMAL.replace("schema_version = 1", "schema_version = 99")).unwrap();
    let o = dynloc(p, &["simulate", "v99.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("v99.toml:2:"), "{}", stderr(&o));

    let o = dynloc(p, &["simulate", "missing.toml"]);
    assert_eq!(o.status.code(), Some(2));

    // light reaches the edge of a 21-guide array within 28 mm
    fs::write(p.join("small.toml"), MINIMAL.replace("a = \"14um\"", "a = \"14um\"\nsites = 21")).unwrap();
    let o = dynloc(p, &["simulate", "small.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("truncation"), "{}", stderr(&o));

    fs::write(p.join("s.toml"), MINIMAL).unwrap();
    fs::write(p.join("blocker"), "").unwrap();
    let o = dynloc(p, &["simulate", "s.toml", "--output-dir", "blocker/out"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = dynloc(p, &["simulate", "s.toml", "--engine", "continuum"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("calibrate"), "{}", stderr(&o));
}

#[test]
fn design_wraps_the_inverse_solver() {
    let dir = tempfile::tempdir().unwrap();
    let o = dynloc(dir.path(), &["design", "--free", "wavelength", "--bracket", "1.4um:1.7um"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    let nm: f64 = text.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((nm - 1610.0).abs() < 1.0, "{text}");

    let o = dynloc(dir.path(), &["design", "--free", "period", "--bracket", "5mm:9mm"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("infeasible"));
}

#[test]
fn fit_coupling_reports_poor_fits() {
    let dir = tempfile::tempdir().unwrap();
    let j = bessel_j_orders(30, 2.0 * 300.0 * 0.028).unwrap();
    let mut csv = String::from("n[1],power[1]\n");
    for n in -30i64..=30 {
        csv += &format!("{n},{:?}\n", j[n.unsigned_abs() as usize].powi(2));
    }
    fs::write(dir.path().join("good.csv"), csv).unwrap();
    let o = dynloc(dir.path(), &["fit-coupling", "--powers", "good.csv", "--length", "28mm"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("(3.000000 /cm)"));

    // all power in two distant guides: no Bessel pattern looks like that
    fs::write(dir.path().join("flat.csv"), "-5,0.5\n5,0.5\n").unwrap();
    let o = dynloc(dir.path(), &["fit-coupling", "--powers", "flat.csv", "--length", "28mm"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("poor fit"));
}

#[test]
fn reproduce_without_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let o = dynloc(dir.path(), &["reproduce", "fig6", "--plots"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let sweep = dir.path().join("out/fig6/fig6_sweep.csv");
    assert_eq!(
        header(&sweep),
        "Lambda[m],Gamma[1],msd_ode[1],msd_closed[1],sqrt_msd[1],delta_eff[1/m]"
    );
    assert!(dir.path().join("out/fig6/fig6_sweep.svg").is_file());

    let o = dynloc(dir.path(), &["reproduce", "fig3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("calibrate"));
}

#[test]
fn sweep_over_periods() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{MINIMAL}\n[profile]\nkind = \"sinusoidal\"\namplitude = \"13um\"\nperiod = \"4mm\"\n\n[sweep]\naxis = \"period\"\nvalues = [\"3mm\", \"4mm\", \"5mm\"]\n"
    );
    fs::write(dir.path().join("s.toml"), text).unwrap();
    let o = dynloc(dir.path(), &["sweep", "s.toml", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert!(table.starts_with("Lambda[m],Gamma[1]"), "{table}");
    assert_eq!(table.lines().count(), 4);
}
