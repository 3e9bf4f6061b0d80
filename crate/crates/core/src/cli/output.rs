//! Dataset serialization: one CSV per table plus `provenance.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::svg::{heatmap, line_plot, Series};
use crate::error::{Error, Result};
use crate::experiments::{Cell, Dataset, Table};

pub const PROVENANCE_FILE: &str = "provenance.json";

fn cell_text(c: &Cell) -> String {
    match c {
        // Debug formatting of f64 is the shortest string that round-trips.
        Cell::Num(v) => format!("{v:?}"),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(table.columns.iter().map(|c| c.header()))
        .map_err(|e| csv_error(path, e))?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell_text)).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{}: {other:?}", path.display())),
    }
}

/// Writes every table of `dataset` into `dir` and returns the files written.
pub fn emit_dataset(dataset: &Dataset, dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for t in &dataset.tables {
        let path = dir.join(format!("{}.csv", t.name));
        write_csv(t, &path)?;
        written.push(path);
        if plots {
            if let Some(svg) = plot_table(t) {
                let path = dir.join(format!("{}.svg", t.name));
                fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
        }
    }
    let p = &dataset.provenance;
    let doc = json!({
        "dataset": dataset.name,
        "code_version": p.code_version,
        "config": p.config,
        "tolerances": p.tolerances,
        "notes": p.notes,
        "tables": dataset.tables.iter().map(|t| json!({
            "name": t.name,
            "file": format!("{}.csv", t.name),
            "columns": t.columns,
            "rows": t.rows.len(),
        })).collect::<Vec<_>>(),
    });
    let path = dir.join(PROVENANCE_FILE);
    let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

fn numeric_columns(t: &Table) -> Vec<usize> {
    (0..t.columns.len())
        .filter(|&i| t.rows.iter().any(|r| matches!(r[i], Cell::Num(_))))
        .collect()
}

fn plot_table(t: &Table) -> Option<String> {
    if t.rows.is_empty() {
        return None;
    }
    let names: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).collect();
    if names == ["z", "n", "power"] {
        return Some(trajectory_heatmap(t));
    }
    let numeric = numeric_columns(t);
    let x = if t.name.starts_with("fig6") {
        t.column_index("Gamma").or_else(|| numeric.first().copied())?
    } else {
        *numeric.first()?
    };
    let first = t.column(&t.columns[x].name)?;
    let grouped = numeric.len() >= 3 && {
        let mut u = first.clone();
        u.dedup();
        u.len() < first.len() && u.len() <= 8
    };
    let (group, x) = if grouped && x == numeric[0] {
        (Some(x), numeric[1])
    } else {
        (None, x)
    };
    let xs = t.column(&t.columns[x].name)?;
    let mut series = Vec::new();
    for &y in numeric.iter().filter(|&&i| i != x && Some(i) != group) {
        let ys = t.column(&t.columns[y].name)?;
        match group {
            None => series.push(Series {
                label: t.columns[y].header(),
                points: xs.iter().copied().zip(ys).collect(),
            }),
            Some(g) => {
                let keys = t.column(&t.columns[g].name)?;
                let mut seen: Vec<f64> = Vec::new();
                for k in &keys {
                    if !seen.contains(k) {
                        seen.push(*k);
                    }
                }
                for k in seen {
                    series.push(Series {
                        label: format!("{} {}={k:e}", t.columns[y].name, t.columns[g].header()),
                        points: (0..xs.len()).filter(|&i| keys[i] == k).map(|i| (xs[i], ys[i])).collect(),
                    });
                }
            }
        }
    }
    if series.is_empty() {
        return None;
    }
    let ylabel = if series.len() == 1 { series[0].label.clone() } else { String::new() };
    Some(line_plot(&t.name, &t.columns[x].header(), &ylabel, &series))
}

fn trajectory_heatmap(t: &Table) -> String {
    let z = t.column("z").unwrap_or_default();
    let n = t.column("n").unwrap_or_default();
    let p = t.column("power").unwrap_or_default();
    let mut zs: Vec<f64> = z.clone();
    zs.dedup();
    let mut ns = n.clone();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    let mut grid = vec![vec![0.0; ns.len()]; zs.len()];
    let (mut row, mut last) = (0, z.first().copied().unwrap_or(0.0));
    for i in 0..z.len() {
        if z[i] != last {
            row += 1;
            last = z[i];
        }
        if let Ok(col) = ns.binary_search_by(|v| v.total_cmp(&n[i])) {
            grid[row.min(zs.len() - 1)][col] = p[i];
        }
    }
    heatmap(&t.name, "n[1]", "z[m]", &ns, &zs, &grid)
}

/// Reads a two-column site-power CSV (`n`, `power`); a header row is optional.
pub fn read_site_powers(path: &Path) -> Result<crate::continuum::SitePowers> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let bad = |line: usize, m: String| Error::Parse {
        path: path.display().to_string(),
        line,
        column: 1,
        message: m,
    };
    let mut rows: Vec<(i64, f64)> = Vec::new();
    let (mut n_col, mut p_col) = (0, 1);
    for (i, rec) in r.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        if i == 0 && field(0).parse::<f64>().is_err() {
            let base = |s: &str| s.split('[').next().unwrap_or("").trim().to_string();
            let heads: Vec<String> = rec.iter().map(base).collect();
            n_col = heads.iter().position(|h| h == "n").unwrap_or(0);
            p_col = heads.iter().position(|h| h == "power").unwrap_or(1);
            continue;
        }
        let n: f64 = field(n_col)
            .parse()
            .map_err(|_| bad(line, format!("site index `{}` is not a number", field(n_col))))?;
        let p: f64 = field(p_col)
            .parse()
            .map_err(|_| bad(line, format!("power `{}` is not a number", field(p_col))))?;
        if n.fract() != 0.0 || !(p >= 0.0) {
            return Err(bad(line, format!("expected an integer site and a non-negative power, got {n}, {p}")));
        }
        rows.push((n as i64, p));
    }
    if rows.is_empty() {
        return Err(bad(0, "no site powers".into()));
    }
    rows.sort_by_key(|r| r.0);
    let first = rows[0].0;
    let last = rows[rows.len() - 1].0;
    let mut powers = vec![0.0; (last - first + 1) as usize];
    for (n, p) in rows {
        powers[(n - first) as usize] += p;
    }
    Ok(crate::continuum::SitePowers { first, powers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Provenance;

    fn dataset() -> Dataset {
        let mut traj = Table::new("trajectory", &[("z", "m"), ("n", "1"), ("power", "1")]);
        for z in [0.0, 1.0] {
            for n in [-1i64, 0, 1] {
                traj.push(vec![z.into(), n.into(), (0.1 * (n + 2) as f64 + z).into()]);
            }
        }
        let mut s = Table::new("summary", &[("x", "m"), ("y", "1"), ("note", "text")]);
        s.push(vec![0.1.into(), None.into(), "ok".to_string().into()]);
        s.push(vec![0.30000000000000004.into(), 1e-300.into(), "a,b".to_string().into()]);
        Dataset {
            name: "demo".into(),
            provenance: Provenance::new(json!({"k": 1})),
            tables: vec![traj, s],
        }
    }

    #[test]
    fn csv_values_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_dataset(&dataset(), dir.path(), true).unwrap();
        assert_eq!(files.len(), 5);
        let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x[m],y[1],note[text]");
        assert_eq!(lines[1], "0.1,,ok");
        assert_eq!(lines[2], "0.30000000000000004,1e-300,\"a,b\"");
        let prov: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(PROVENANCE_FILE)).unwrap()).unwrap();
        assert_eq!(prov["tables"][1]["rows"], 2);
        assert_eq!(prov["config"]["k"], 1);
    }

    #[test]
    fn site_power_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        fs::write(&path, "power[1],n[1]\n0.5,1\n0.25,-1\n0.25,0\n").unwrap();
        let p = read_site_powers(&path).unwrap();
        assert_eq!(p.first, -1);
        assert_eq!(p.powers, vec![0.25, 0.25, 0.5]);
        fs::write(&path, "0,1\n1,x\n").unwrap();
        assert!(matches!(read_site_powers(&path), Err(Error::Parse { line: 2, .. })));
    }
}
