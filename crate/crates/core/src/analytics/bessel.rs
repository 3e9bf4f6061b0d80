//! Bessel functions of the first kind for integer order.

use crate::error::{Error, Result};

const MAX_ARGUMENT: f64 = 1.0e4;
const MAX_ORDER: usize = 200;
/// Below this |x| the power series is used; cancellation there costs at most a few ulps.
const SERIES_LIMIT: f64 = 4.0;
const RESCALE_ABOVE: f64 = 1.0e200;

fn check(order: usize, x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::Domain(format!(
            "Bessel argument {x} outside |x| <= {MAX_ARGUMENT}"
        )));
    }
    if order > MAX_ORDER {
        return Err(Error::Domain(format!(
            "Bessel order {order} exceeds {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// `J_n(x)` for integer `n`, with `J_{−n} = (−1)ⁿ J_n`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    let order = n.unsigned_abs() as usize;
    check(order, x)?;
    let value = if x.abs() < SERIES_LIMIT {
        series(order, x)
    } else {
        miller(order, x)[order]
    };
    Ok(if n < 0 && order % 2 == 1 { -value } else { value })
}

/// `J_0(x) … J_{n_max}(x)` from a single backward sweep.
pub fn bessel_j_orders(n_max: usize, x: f64) -> Result<Vec<f64>> {
    check(n_max, x)?;
    if x.abs() < SERIES_LIMIT {
        Ok((0..=n_max).map(|n| series(n, x)).collect())
    } else {
        let mut v = miller(n_max, x);
        v.truncate(n_max + 1);
        Ok(v)
    }
}

pub(crate) fn j0(x: f64) -> f64 {
    bessel_j(0, x).expect("argument in range")
}

pub(crate) fn j1(x: f64) -> f64 {
    bessel_j(1, x).expect("argument in range")
}

fn series(order: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    // (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + order as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Backward recurrence normalized with `J_0 + 2 Σ J_{2k} = 1`.
/// Returns values for orders `0..=start`, with at least `n_max + 1` entries.
fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let ax = x.abs();
    let nu = (n_max as f64).max(ax);
    let mut start = (nu + 30.0 + 12.0 * nu.cbrt()).ceil() as usize;
    start += start % 2;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    let mut norm = 0.0;
    let two_over_x = 2.0 / ax;
    for k in (1..=start).rev() {
        j[k - 1] = k as f64 * two_over_x * j[k] - j[k + 1];
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j[k - 1];
        }
        if j[k - 1].abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            for v in &mut j[k - 1..] {
                *v *= s;
            }
            norm *= s;
        }
    }
    norm += j[0];
    let inv = 1.0 / norm;
    let negative = x < 0.0;
    for (n, v) in j.iter_mut().enumerate() {
        *v *= inv;
        if negative && n % 2 == 1 {
            *v = -*v;
        }
    }
    j
}

/// First positive zero of `J_0`, located by bisection and polished by Newton steps.
pub fn first_j0_zero() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..20 {
        let step = j0(x) / j1(x);
        x += step;
        if step.abs() < 1e-16 * x {
            break;
        }
    }
    x
}
