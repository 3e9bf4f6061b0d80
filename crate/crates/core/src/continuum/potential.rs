use serde::Serialize;

use super::{bpm::ABSORBER_POINTS, Grid};
use crate::error::{Error, Result};
use crate::geometry::ArraySpec;

/// Wells further than this many widths away contribute below 1e-16 δn.
const WELL_REACH: f64 = 6.1;

/// Identical Gaussian wells `−δn·exp(−(x − x_j)²/w²)` on a uniform lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellModel {
    pub depth: f64,
    pub width: f64,
    /// Lattice period; unused for a single well.
    pub period: f64,
    /// Position of the lowest well.
    pub first_center: f64,
    pub count: usize,
}

impl WellModel {
    pub fn array(spec: &ArraySpec) -> Self {
        WellModel {
            depth: spec.well_depth,
            width: spec.well_width,
            period: spec.site_period,
            first_center: *spec.site_indices().start() as f64 * spec.site_period,
            count: spec.site_count,
        }
    }

    /// `count` wells spaced by `period` and centred on x = 0.
    pub fn centered(depth: f64, width: f64, period: f64, count: usize) -> Self {
        WellModel {
            depth,
            width,
            period,
            first_center: -0.5 * (count as f64 - 1.0) * period,
            count,
        }
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.first_center + j as f64 * self.period)
    }

    /// V(x), summing only the wells within reach of `x`.
    pub fn value(&self, x: f64) -> f64 {
        let reach = WELL_REACH * self.width;
        let (lo, hi) = if self.count == 1 || self.period <= 0.0 {
            (0, self.count)
        } else {
            let lo = ((x - reach - self.first_center) / self.period).ceil().max(0.0) as usize;
            let hi = ((x + reach - self.first_center) / self.period).floor() + 1.0;
            (lo, (hi.max(0.0) as usize).min(self.count))
        };
        let inv_w = 1.0 / self.width;
        let mut v = 0.0;
        for j in lo..hi {
            let d = (x - self.first_center - j as f64 * self.period) * inv_w;
            v -= (-d * d).exp();
        }
        self.depth * v
    }

    pub fn extent(&self) -> (f64, f64) {
        let last = self.first_center + (self.count as f64 - 1.0) * self.period;
        (self.first_center, last)
    }
}

/// V(x) sampled on a grid, with the well model kept for exact shifts.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialProfile {
    pub wells: WellModel,
    pub grid: Grid,
    pub samples: Vec<f64>,
}

impl PotentialProfile {
    pub fn from_wells(wells: WellModel, grid: &Grid) -> Result<Self> {
        grid.validate()?;
        let samples = grid.xs().into_iter().map(|x| wells.value(x)).collect();
        Ok(PotentialProfile {
            wells,
            grid: *grid,
            samples,
        })
    }

    /// `V(x − shift)` at every grid point.
    pub fn shifted_into(&self, shift: f64, out: &mut [f64]) {
        for (i, v) in out.iter_mut().enumerate() {
            *v = self.wells.value(self.grid.x(i) - shift);
        }
    }

    pub fn max_depth(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(self.wells.depth)
    }
}

/// Potential of the full array with wells at `j·a`, `j` over the site indices.
///
/// The grid must leave a margin of two well widths plus the default absorber
/// beyond the outermost wells.
pub fn build_potential(spec: &ArraySpec, grid: &Grid) -> Result<PotentialProfile> {
    spec.validate()?;
    grid.validate()?;
    let wells = WellModel::array(spec);
    let (lo, hi) = wells.extent();
    let margin = 2.0 * spec.well_width + ABSORBER_POINTS * grid.spacing;
    let (start, end) = (grid.start(), grid.start() + grid.width());
    if lo - margin < start || hi + margin > end {
        return Err(Error::Config(format!(
            "grid [{start:.4e}, {end:.4e}] m is too small for wells spanning [{lo:.4e}, {hi:.4e}] m"
        )));
    }
    PotentialProfile::from_wells(wells, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::REFERENCE_SUBSTRATE_INDEX;

    fn spec() -> ArraySpec {
        ArraySpec::new(14e-6, 80, 28e-3, REFERENCE_SUBSTRATE_INDEX, 1610e-9)
            .unwrap()
            .with_wells(2.5e-3, 3.5e-6)
    }

    #[test]
    fn well_bottom_and_midpoint() {
        let single = WellModel::centered(2.5e-3, 3.5e-6, 14e-6, 1);
        assert_eq!(single.value(0.0), -2.5e-3);
        let arr = WellModel::array(&spec());
        let mid = arr.value(7e-6);
        assert!(mid.abs() < 2.5e-3 * 2.0 * (-4.0f64).exp() * 1.0001);
        assert!(mid < 0.0);
    }

    #[test]
    fn lattice_periodic_inside_array() {
        let arr = WellModel::array(&spec());
        for i in 0..200 {
            let x = -200e-6 + i as f64 * 1.37e-6;
            assert!((arr.value(x + 14e-6) - arr.value(x)).abs() < 1e-12 * 2.5e-3);
        }
        assert_eq!(arr.centers().count(), 80);
    }

    #[test]
    fn matches_full_sum() {
        let arr = WellModel::array(&spec());
        for i in 0..50 {
            let x = -600e-6 + i as f64 * 23.1e-6;
            let full: f64 = arr
                .centers()
                .map(|c| -2.5e-3 * (-((x - c) / 3.5e-6).powi(2)).exp())
                .sum();
            assert!((arr.value(x) - full).abs() < 1e-13 * 2.5e-3, "x={x}");
        }
    }

    #[test]
    fn grid_too_small() {
        let g = Grid::new(1024, 0.35e-6).unwrap();
        assert!(matches!(build_potential(&spec(), &g), Err(Error::Config(_))));
        assert!(build_potential(&spec(), &Grid::default()).is_ok());
    }
}
