//! Bessel functions of the first kind, integer order.
//!
//! Small arguments (`x <= 12`) use the ascending power series, which keeps the
//! absolute error near `eps * I_n(x) <= eps * I_0(12) ~ 2e-12`. Larger arguments
//! use Miller's downward recurrence normalized with `J_0 + 2 sum J_2k = 1`.

use crate::error::{Error, Result};

/// Largest order accepted by [`bessel_j`].
pub const MAX_ENVELOPE_ORDER: u32 = 200;
/// Largest argument accepted by [`bessel_j`] and [`bessel_j_orders`].
pub const MAX_ENVELOPE_ARG: f64 = 1.0e4;

const SERIES_LIMIT: f64 = 12.0;
const RESCALE_AT: f64 = 1.0e250;
const RESCALE_BY: f64 = 1.0e-250;

/// `J_order(x)` with absolute error below `1e-10` on `order <= 200`, `0 <= x <= 1e4`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if order > MAX_ENVELOPE_ORDER {
        return Err(Error::Range(format!(
            "Bessel order {order} exceeds {MAX_ENVELOPE_ORDER}"
        )));
    }
    check_arg(x)?;
    if x <= SERIES_LIMIT {
        Ok(series(order, x))
    } else {
        Ok(miller(order as usize, x)[order as usize])
    }
}

/// `J_0(x), ..., J_max_order(x)` from a single evaluation.
///
/// Used by the Nyström assembly, which needs every angular order at the same
/// kernel argument. Orders above [`MAX_ENVELOPE_ORDER`] are allowed here; the
/// recurrence stays stable for any order.
pub fn bessel_j_orders(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    if x <= SERIES_LIMIT {
        Ok((0..=max_order).map(|n| series(n as u32, x)).collect())
    } else {
        Ok(miller(max_order, x))
    }
}

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() || !(0.0..=MAX_ENVELOPE_ARG).contains(&x) {
        return Err(Error::Range(format!(
            "Bessel argument {x} outside [0, {MAX_ENVELOPE_ARG}]"
        )));
    }
    Ok(())
}

fn series(order: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / f64::from(k);
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let n = f64::from(order);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (n + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(f64::MIN_POSITIVE) && k > half {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    sum
}

/// Downward recurrence from an even start order well above `max(n, x)`.
fn miller(max_order: usize, x: f64) -> Vec<f64> {
    let top = (max_order as f64).max(x);
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    start += start % 2;

    let mut out = vec![0.0; max_order + 1];
    let two_over_x = 2.0 / x;
    let mut above = 0.0; // J_{k+1}
    let mut cur = 1.0; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= max_order {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let below = k as f64 * two_over_x * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > RESCALE_AT {
            cur *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            for v in &mut out {
                *v *= RESCALE_BY;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    let scale = 1.0 / norm;
    for v in &mut out {
        *v *= scale;
    }
    out
}
