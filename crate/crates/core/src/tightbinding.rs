//! Nearest-neighbour coupled-mode dynamics of the curved array.
//!
//! Amplitudes are integrated in the drive-phase gauge
//!
//! ```text
//! i db_n/dz = −Δ ( b_{n+1} e^{−iγ(z)} + b_{n−1} e^{+iγ(z)} ),
//! ```
//!
//! obtained from the site-energy form `i dc_n/dz = −Δ(c_{n+1}+c_{n−1}) + n γ'(z) c_n`
//! by `b_n = c_n e^{inγ}`. Site powers are identical in both gauges, and the
//! zig-zag profile (impulsive curvature) becomes a piecewise-constant phase.

use num_complex::Complex64;
use serde::Serialize;

use crate::analytics::{bessel_j_orders, w_series};
use crate::error::{Error, Result};
use crate::geometry::{ArraySpec, BendingProfile, DrivePhase, Side};

/// Edge power above which a run is rejected as truncated.
pub const EDGE_POWER_LIMIT: f64 = 1e-6;
const EDGE_SITES: usize = 2;
const MIN_STEPS_PER_SCALE: f64 = 200.0;
const MAX_GROWTH_ATTEMPTS: usize = 4;

/// Complex amplitudes on sites `−half_width ..= half_width`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteState {
    half_width: usize,
    amplitudes: Vec<Complex64>,
    pub z: f64,
}

impl SiteState {
    /// Single-site excitation `c_n = δ_{n,0}` at z = 0.
    pub fn impulse(half_width: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * half_width + 1];
        amplitudes[half_width] = Complex64::new(1.0, 0.0);
        SiteState {
            half_width,
            amplitudes,
            z: 0.0,
        }
    }

    /// Amplitudes listed from site `−half_width` upwards.
    pub fn from_amplitudes(half_width: usize, amplitudes: Vec<Complex64>, z: f64) -> Result<Self> {
        if amplitudes.len() != 2 * half_width + 1 {
            return Err(Error::Config(format!(
                "expected {} amplitudes for half-width {half_width}, got {}",
                2 * half_width + 1,
                amplitudes.len()
            )));
        }
        Ok(SiteState {
            half_width,
            amplitudes,
            z,
        })
    }

    /// Builds a state from a function of the site index.
    pub fn from_fn(half_width: usize, f: impl Fn(i64) -> Complex64) -> Self {
        let h = half_width as i64;
        SiteState {
            half_width,
            amplitudes: (-h..=h).map(f).collect(),
            z: 0.0,
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        let h = self.half_width as i64;
        -h..=h
    }

    pub fn amplitude(&self, n: i64) -> Complex64 {
        let idx = n + self.half_width as i64;
        if idx < 0 || idx as usize >= self.amplitudes.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.amplitudes[idx as usize]
        }
    }

    pub fn site_power(&self, n: i64) -> f64 {
        self.amplitude(n).norm_sqr()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn total_power(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let p = self.total_power();
        if !(p > 0.0) {
            return Err(Error::UndefinedObservable("state has zero power".into()));
        }
        let s = 1.0 / p.sqrt();
        Ok(SiteState {
            amplitudes: self.amplitudes.iter().map(|c| c * s).collect(),
            ..self.clone()
        })
    }

    /// Largest power found in the outermost sites on either side.
    pub fn edge_power(&self) -> f64 {
        let n = self.amplitudes.len();
        let k = EDGE_SITES.min(n);
        self.amplitudes[..k]
            .iter()
            .chain(&self.amplitudes[n - k..])
            .map(|c| c.norm_sqr())
            .fold(0.0, f64::max)
    }

    /// The same amplitudes embedded in a wider lattice.
    pub fn widened(&self, half_width: usize) -> Self {
        if half_width <= self.half_width {
            return self.clone();
        }
        let pad = half_width - self.half_width;
        let zero = Complex64::new(0.0, 0.0);
        let mut amplitudes = vec![zero; pad];
        amplitudes.extend_from_slice(&self.amplitudes);
        amplitudes.extend(std::iter::repeat_n(zero, pad));
        SiteState {
            half_width,
            amplitudes,
            z: self.z,
        }
    }
}

/// Amplitudes sampled on a z grid.
#[derive(Debug, Clone, Serialize)]
pub struct SiteTrajectory {
    pub z_grid: Vec<f64>,
    pub states: Vec<SiteState>,
    /// Coupling constant Δ the run used, in 1/m.
    pub coupling: f64,
    /// Largest `|P(z) − P(0)| / P(0)` over the recorded states.
    pub norm_drift: f64,
    /// Largest edge-site power seen at the recorded states.
    pub max_edge_power: f64,
    pub steps: usize,
}

impl SiteTrajectory {
    pub fn last(&self) -> &SiteState {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn half_width(&self) -> usize {
        self.states[0].half_width
    }
}

/// Step length for fixed-step RK4: resolves the drive period and the
/// coupling length by at least 200 steps and keeps `(h·ω)⁴` near `tol`.
fn step_length(delta: f64, phase: &DrivePhase<'_>, end: f64, tol: f64) -> f64 {
    let mut h = end.max(f64::MIN_POSITIVE);
    if let Some(period) = phase.profile().period() {
        h = h.min(period / MIN_STEPS_PER_SCALE);
    }
    if delta > 0.0 {
        h = h.min(1.0 / (MIN_STEPS_PER_SCALE * delta));
    }
    let omega = 2.0 * delta + phase.rate_bound(end);
    if omega > 0.0 {
        h = h.min(tol.powf(0.25) / omega);
    }
    h
}

fn rhs(b: &[Complex64], out: &mut [Complex64], delta: f64, gamma: f64) {
    let n = b.len();
    let up = Complex64::from_polar(delta, -gamma);
    let down = Complex64::from_polar(delta, gamma);
    let i = Complex64::new(0.0, 1.0);
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        if k + 1 < n {
            acc += up * b[k + 1];
        }
        if k > 0 {
            acc += down * b[k - 1];
        }
        out[k] = i * acc;
    }
}

struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Rk4 {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    fn step(&mut self, b: &mut [Complex64], h: f64, delta: f64, gammas: [f64; 3]) {
        rhs(b, &mut self.k1, delta, gammas[0]);
        for (t, (y, k)) in self.tmp.iter_mut().zip(b.iter().zip(&self.k1)) {
            *t = y + k * (0.5 * h);
        }
        rhs(&self.tmp, &mut self.k2, delta, gammas[1]);
        for (t, (y, k)) in self.tmp.iter_mut().zip(b.iter().zip(&self.k2)) {
            *t = y + k * (0.5 * h);
        }
        rhs(&self.tmp, &mut self.k3, delta, gammas[1]);
        for (t, (y, k)) in self.tmp.iter_mut().zip(b.iter().zip(&self.k3)) {
            *t = y + k * h;
        }
        rhs(&self.tmp, &mut self.k4, delta, gammas[2]);
        let w = h / 6.0;
        for i in 0..b.len() {
            b[i] += (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]) * w;
        }
    }
}

/// Integrates the coupled-mode equations from `initial` and records the
/// state at every point of `z_grid`.
pub fn evolve(
    initial: &SiteState,
    delta: f64,
    spec: &ArraySpec,
    profile: &BendingProfile,
    z_grid: &[f64],
    tol: f64,
) -> Result<SiteTrajectory> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::Config(format!("tolerance {tol:e} outside [1e-12, 1e-6]")));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::Config(format!("coupling must be non-negative, got {delta}")));
    }
    if z_grid.is_empty() {
        return Err(Error::Config("empty z grid".into()));
    }
    if z_grid[0] < initial.z || z_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "z grid must be strictly increasing and start at or after the initial state".into(),
        ));
    }
    profile.validate()?;
    let end = *z_grid.last().expect("non-empty");
    profile.displacement(end)?;

    let phase = DrivePhase::new(spec, profile);
    let h_max = step_length(delta, &phase, end - initial.z, tol);
    let p0 = initial.total_power();
    let mut b = initial.amplitudes.clone();
    let mut rk = Rk4::new(b.len());
    let mut states = Vec::with_capacity(z_grid.len());
    let mut z = initial.z;
    let mut steps = 0usize;
    let mut drift: f64 = 0.0;
    let mut edge: f64 = 0.0;

    // interval ends: recording points plus slope discontinuities
    let mut stops: Vec<(f64, bool)> = z_grid.iter().map(|&zg| (zg, true)).collect();
    stops.extend(profile.kinks(initial.z, end).into_iter().map(|k| (k, false)));
    stops.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    stops.dedup_by(|a, b| {
        if a.0 == b.0 {
            b.1 |= a.1;
            true
        } else {
            false
        }
    });

    for (stop, record) in stops {
        let span = stop - z;
        if span > 0.0 && delta > 0.0 {
            let n = (span / h_max).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for i in 0..n {
                let z0 = z + i as f64 * h;
                let z1 = if i + 1 == n { stop } else { z0 + h };
                let gammas = [
                    phase.at(z0, Side::Right),
                    phase.at(z0 + 0.5 * h, Side::Right),
                    phase.at(z1, Side::Left),
                ];
                rk.step(&mut b, h, delta, gammas);
            }
            steps += n;
        }
        z = stop;
        if record {
            let state = SiteState {
                half_width: initial.half_width,
                amplitudes: b.clone(),
                z,
            };
            if p0 > 0.0 {
                drift = drift.max((state.total_power() - p0).abs() / p0);
            }
            edge = edge.max(state.edge_power());
            states.push(state);
        }
    }

    if edge > EDGE_POWER_LIMIT {
        return Err(Error::LatticeTruncation {
            edge_power: edge,
            limit: EDGE_POWER_LIMIT,
            half_width: initial.half_width,
            required: 2 * initial.half_width + 1,
        });
    }
    Ok(SiteTrajectory {
        z_grid: z_grid.to_vec(),
        states,
        coupling: delta,
        norm_drift: drift,
        max_edge_power: edge,
        steps,
    })
}

/// Default lattice half-width `⌈2ΔL⌉ + 15` for a run over `[0, length]`.
pub fn default_half_width(delta: f64, length: f64) -> usize {
    (2.0 * delta * length).ceil() as usize + 15
}

/// Evolves `initial`, widening the lattice whenever the edge-power check trips.
pub fn evolve_auto(
    initial: &SiteState,
    delta: f64,
    spec: &ArraySpec,
    profile: &BendingProfile,
    z_grid: &[f64],
    tol: f64,
) -> Result<SiteTrajectory> {
    let end = z_grid.last().copied().unwrap_or(0.0);
    let mut state = initial.widened(default_half_width(delta, end).max(initial.half_width));
    let mut attempt = 0;
    loop {
        match evolve(&state, delta, spec, profile, z_grid, tol) {
            Err(Error::LatticeTruncation { required, .. }) if attempt < MAX_GROWTH_ATTEMPTS => {
                attempt += 1;
                state = state.widened(required);
            }
            other => return other,
        }
    }
}

/// Single-site impulse response `c_n(0) = δ_{n,0}`.
pub fn impulse_response(
    delta: f64,
    spec: &ArraySpec,
    profile: &BendingProfile,
    z_grid: &[f64],
    tol: f64,
) -> Result<SiteTrajectory> {
    let end = z_grid.last().copied().unwrap_or(0.0);
    evolve_auto(
        &SiteState::impulse(default_half_width(delta, end)),
        delta,
        spec,
        profile,
        z_grid,
        tol,
    )
}

/// Exact nearest-neighbour impulse response `|c_n(z)|² = J_n(2Δ|w(z)|)²`.
pub fn dk_oracle(
    n: i64,
    z: f64,
    delta: f64,
    spec: &ArraySpec,
    profile: &BendingProfile,
) -> Result<f64> {
    let w = w_series(spec, profile, &[z])?[0];
    let j = bessel_j_orders(n.unsigned_abs() as usize, 2.0 * delta * w.norm())?;
    Ok(j[n.unsigned_abs() as usize].powi(2))
}

/// Oracle site powers for `n ∈ [−half_width, half_width]` at each z.
pub fn dk_oracle_powers(
    z_points: &[f64],
    delta: f64,
    spec: &ArraySpec,
    profile: &BendingProfile,
    half_width: usize,
) -> Result<Vec<Vec<f64>>> {
    let ws = w_series(spec, profile, z_points)?;
    ws.iter()
        .map(|w| {
            let j = bessel_j_orders(half_width, 2.0 * delta * w.norm())?;
            let h = half_width as i64;
            Ok((-h..=h).map(|n| j[n.unsigned_abs() as usize].powi(2)).collect())
        })
        .collect()
}

/// `⟨n²⟩` together with the normalization factor that was applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSquare {
    pub value: f64,
    /// Total power of the state before renormalization.
    pub power: f64,
}

/// `⟨n²⟩ = Σ n² |c_n|²` of the normalized state.
pub fn mean_square_site(state: &SiteState) -> Result<MeanSquare> {
    let power = state.total_power();
    if !(power > 0.0) {
        return Err(Error::UndefinedObservable(
            "mean square site of a zero-power state".into(),
        ));
    }
    let sum: f64 = state
        .indices()
        .zip(&state.amplitudes)
        .map(|(n, c)| (n * n) as f64 * c.norm_sqr())
        .sum();
    Ok(MeanSquare {
        value: sum / power,
        power,
    })
}

/// `(z, |c_0(z)|²)` along a trajectory.
pub fn return_probability(trajectory: &SiteTrajectory) -> Vec<(f64, f64)> {
    trajectory
        .states
        .iter()
        .map(|s| (s.z, s.site_power(0)))
        .collect()
}

/// Cycle-averaged approximation `|J_n(2Δ J₀(Γ) z)|²`.
pub fn effective_approximation(n: i64, z: f64, delta: f64, gamma: f64) -> Result<f64> {
    let j0 = crate::analytics::bessel_j(0, gamma)?;
    Ok(crate::analytics::bessel_j(n as i32, 2.0 * delta * j0 * z)?.powi(2))
}
