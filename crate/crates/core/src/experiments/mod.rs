//! Declarative scenarios, figure presets and parameter sweeps.
//!
//! A [`ScenarioConfig`] names an engine, an array, a bending profile and an
//! excitation; [`simulate`] and [`sweep`] turn it into a [`Dataset`] of named
//! tables that the CLI writes out as CSV.

mod figures;
mod scenario;

use std::collections::BTreeMap;

use serde::Serialize;

pub use figures::{
    dl_wavelength_array3, reproduce_figure, Figure, FIG3_WAVELENGTHS, FIG5_CONTRAST_WAVELENGTH,
    FIG5_WIDTHS, FIG6_PERIODS,
};
pub use scenario::{
    lattice_input, run_continuum, run_lattice, simulate, sweep, ContinuumRun, Engine, Excitation,
    Observable, ScenarioConfig, Sweep, SweepAxis,
};

use crate::continuum::MEASURED_COUPLING;
use crate::error::Result;
use crate::geometry::{ArraySpec, BendingProfile, REFERENCE_SUBSTRATE_INDEX};

pub const SITE_PERIOD: f64 = 14e-6;
pub const SAMPLE_LENGTH: f64 = 28e-3;
/// Waveguides per array; enough that no scenario reaches the edges.
pub const SITE_COUNT: usize = 80;

/// Coupling constant at a wavelength, from the measured dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    /// Outside the measured 1440–1610 nm range.
    pub extrapolated: bool,
}

/// Δ(λ) interpolated linearly between 1.75 cm⁻¹ at 1440 nm and 3 cm⁻¹ at
/// 1610 nm. Wavelengths outside that range are extrapolated and flagged.
pub fn delta_of_lambda(wavelength: f64) -> DeltaEstimate {
    let [(l0, d0), (l1, d1)] = MEASURED_COUPLING;
    let t = (wavelength - l0) / (l1 - l0);
    DeltaEstimate {
        delta: d0 + t * (d1 - d0),
        extrapolated: !(l0..=l1).contains(&wavelength),
    }
}

fn base_spec(wavelength: f64) -> Result<ArraySpec> {
    ArraySpec::new(
        SITE_PERIOD,
        SITE_COUNT,
        SAMPLE_LENGTH,
        REFERENCE_SUBSTRATE_INDEX,
        wavelength,
    )
}

/// Array (1): straight guides.
pub fn straight_array(wavelength: f64) -> Result<(ArraySpec, BendingProfile)> {
    Ok((base_spec(wavelength)?, BendingProfile::Straight))
}

/// Array (2): seven cycles of Λ = 4 mm, A = 13 µm.
pub fn array2(wavelength: f64) -> Result<(ArraySpec, BendingProfile)> {
    Ok((base_spec(wavelength)?, BendingProfile::sinusoidal(13e-6, 4e-3, 0.0)?))
}

/// Array (3): half a cycle of Λ = 56 mm, A = 164 µm.
pub fn array3(wavelength: f64) -> Result<(ArraySpec, BendingProfile)> {
    Ok((base_spec(wavelength)?, BendingProfile::sinusoidal(164e-6, 56e-3, 0.0)?))
}

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: String,
    /// `1` for dimensionless quantities, `text` for labels.
    pub unit: String,
}

impl Column {
    /// Header as written to CSV, `name[unit]`.
    pub fn header(&self) -> String {
        format!("{}[{}]", self.name, self.unit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns
                .iter()
                .map(|(n, u)| Column {
                    name: n.to_string(),
                    unit: u.to_string(),
                })
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Numeric values of a column; non-numeric cells read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[i] {
                    Cell::Num(v) => v,
                    _ => f64::NAN,
                })
                .collect(),
        )
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub code_version: String,
    /// Echo of the scenario or preset that produced the data.
    pub config: serde_json::Value,
    pub tolerances: BTreeMap<String, f64>,
    /// Model caveats: extrapolated couplings, parameter substitutions.
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(config: serde_json::Value) -> Self {
        Provenance {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            tolerances: BTreeMap::new(),
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub name: String,
    pub provenance: Provenance,
    pub tables: Vec<Table>,
}

impl Dataset {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}
