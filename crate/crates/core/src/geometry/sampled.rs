use serde::{Deserialize, Serialize};

use super::Kinematics;
use crate::error::{Error, Result};

/// Stencil size for the nodal derivative estimates.
const STENCIL: usize = 7;

/// Tabulated axis trajectory with a C² piecewise-quintic Hermite interpolant.
///
/// Nodal first and second derivatives come from local 7-point
/// finite-difference weights (Fornberg), so the interpolated curvature is
/// fourth-order accurate on smooth data and continuous across knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath", into = "RawPath")]
pub struct SampledPath {
    z: Vec<f64>,
    x: Vec<f64>,
    slope: Vec<f64>,
    curvature: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPath {
    z: Vec<f64>,
    x: Vec<f64>,
}

impl TryFrom<RawPath> for SampledPath {
    type Error = Error;
    fn try_from(raw: RawPath) -> Result<Self> {
        SampledPath::new(raw.z, raw.x)
    }
}

impl From<SampledPath> for RawPath {
    fn from(p: SampledPath) -> Self {
        RawPath { z: p.z, x: p.x }
    }
}

impl SampledPath {
    pub fn new(z: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if z.len() != x.len() {
            return Err(Error::Config(format!(
                "sampled profile has {} z values but {} displacements",
                z.len(),
                x.len()
            )));
        }
        if z.len() < 3 {
            return Err(Error::Config("sampled profile needs at least 3 points".into()));
        }
        if z.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(Error::Config("sampled profile contains non-finite values".into()));
        }
        if z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sampled z grid must be strictly increasing".into()));
        }
        let n = z.len();
        let width = STENCIL.min(n);
        let mut slope = vec![0.0; n];
        let mut curvature = vec![0.0; n];
        for i in 0..n {
            let start = i.saturating_sub(width / 2).min(n - width);
            let nodes = &z[start..start + width];
            let w = fornberg_weights(z[i], nodes, 2);
            let values = &x[start..start + width];
            slope[i] = w[1].iter().zip(values).map(|(c, v)| c * v).sum();
            curvature[i] = w[2].iter().zip(values).map(|(c, v)| c * v).sum();
        }
        Ok(SampledPath {
            z,
            x,
            slope,
            curvature,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.z[0], *self.z.last().expect("non-empty"))
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.z, &self.x)
    }

    pub(crate) fn scaled(&self, factor: f64) -> Result<Self> {
        SampledPath::new(self.z.clone(), self.x.iter().map(|v| v * factor).collect())
    }

    pub(crate) fn max_abs_curvature(&self) -> f64 {
        self.curvature.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub(crate) fn kinematics(&self, z: f64) -> Kinematics {
        let n = self.z.len();
        let i = match self.z.partition_point(|&zi| zi <= z) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.z[i + 1] - self.z[i];
        let t = (z - self.z[i]) / h;
        let (f0, f1) = (self.x[i], self.x[i + 1]);
        let (d0, d1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let (s0, s1) = (self.curvature[i] * h * h, self.curvature[i + 1] * h * h);

        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        // quintic Hermite basis and its t-derivatives
        let h5 = [10.0 * t3 - 15.0 * t4 + 6.0 * t5, 30.0 * t2 - 60.0 * t3 + 30.0 * t4, 60.0 * t - 180.0 * t2 + 120.0 * t3];
        let h0 = [1.0 - h5[0], -h5[1], -h5[2]];
        let h1 = [
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            -36.0 * t + 96.0 * t2 - 60.0 * t3,
        ];
        let h2 = [
            0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
            0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
            0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3),
        ];
        let h4 = [
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            -24.0 * t + 84.0 * t2 - 60.0 * t3,
        ];
        let h3 = [
            0.5 * (t3 - 2.0 * t4 + t5),
            0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
            0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3),
        ];
        let eval = |k: usize| {
            f0 * h0[k] + d0 * h1[k] + s0 * h2[k] + f1 * h5[k] + d1 * h4[k] + s1 * h3[k]
        };
        Kinematics {
            displacement: eval(0),
            slope: eval(1) / h,
            curvature: eval(2) / (h * h),
        }
    }
}

/// Finite-difference weights for derivatives `0..=order` at `x0` on `nodes`.
/// Returns `weights[m][j]` for derivative `m` and node `j`.
fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=order.min(i)).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=order.min(i)).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
