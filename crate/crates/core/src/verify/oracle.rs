//! Independent reference computations used by the acceptance checks.
//!
//! None of these share an algorithm with the code they check: the spectrum
//! oracle discretizes the full 2-D kernel instead of the separated radial
//! problems, the allocation oracle searches a power grid exhaustively, and the
//! `eps0` oracle is plain bisection.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::link_model::log2_1p;
use crate::numerics::gauss_quadrature;

/// Bisection of `e - exp(2 (1 - 1/e))` on `[2, 10]` for a fixed number of steps.
pub fn eps0_bisection(steps: usize) -> f64 {
    let f = |e: f64| e - (2.0 * (1.0 - 1.0 / e)).exp();
    let (mut lo, mut hi) = (2.0, 10.0);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Best `sum log2(1 + g_i p_i / floor)` over powers `p_i = k_i P / steps` with
/// `sum k_i = steps`, found exactly by dynamic programming over the grid.
pub fn simplex_grid_efficiency(gains: &[f64], floor: f64, power: f64, steps: usize) -> f64 {
    let unit = power / steps as f64;
    let mut best = vec![f64::NEG_INFINITY; steps + 1];
    best[0] = 0.0;
    for &g in gains {
        let value: Vec<f64> = (0..=steps).map(|k| log2_1p(g * k as f64 * unit / floor)).collect();
        let mut next = vec![f64::NEG_INFINITY; steps + 1];
        for (total, slot) in next.iter_mut().enumerate() {
            for (share, v) in value.iter().enumerate().take(total + 1) {
                let cand = best[total - share] + v;
                if cand > *slot {
                    *slot = cand;
                }
            }
        }
        best = next;
    }
    best[steps]
}

/// Top `count` values of `|alpha|^2` for the unit-disc kernel `exp(i c <x, y>)`,
/// from a dense `radial x angular` polar-grid discretization.
///
/// The weighted matrix `A = W^1/2 E W^1/2` is complex symmetric, so `A^H = conj(A)`.
/// Singular values are found by block subspace iteration on `A^H A` with
/// Rayleigh–Ritz extraction; the matrix is held as separate real and imaginary
/// parts so products run through the real matrix kernels.
pub fn polar_grid_spectrum(c: f64, radial: usize, angular: usize, count: usize) -> Result<Vec<f64>> {
    let rule = gauss_quadrature(radial)?;
    let n = radial * angular;
    let block = (count + 11).min(n);
    let dtheta = 2.0 * PI / angular as f64;
    let sqrt_w: Vec<f64> = (0..n)
        .map(|p| {
            let a = p / angular;
            (rule.weights[a] * rule.nodes[a] * dtheta).sqrt()
        })
        .collect();
    let cos_table: Vec<f64> = (0..angular).map(|k| (k as f64 * dtheta).cos()).collect();

    let mut re = DMatrix::<f64>::zeros(n, n);
    let mut im = DMatrix::<f64>::zeros(n, n);
    for q in 0..n {
        let (aq, bq) = (q / angular, q % angular);
        for p in 0..n {
            let (ap, bp) = (p / angular, p % angular);
            let delta = (bp + angular - bq) % angular;
            let phase = c * rule.nodes[ap] * rule.nodes[aq] * cos_table[delta];
            let w = sqrt_w[p] * sqrt_w[q];
            re[(p, q)] = w * phase.cos();
            im[(p, q)] = w * phase.sin();
        }
    }

    // Deterministic start block with full rank.
    let mut xr = DMatrix::from_fn(n, block, |i, j| ((i * 7 + j * 13) % 17) as f64 - 8.0 + j as f64 * 0.01);
    let mut xi = DMatrix::from_fn(n, block, |i, j| ((i * 5 + j * 3) % 11) as f64 - 5.0);
    let mut previous = vec![f64::INFINITY; count];
    for iteration in 0..200 {
        let q = orthonormal(&xr, &xi)?;
        let qr = q.map(|z| z.re);
        let qi = q.map(|z| z.im);
        let yr = &re * &qr - &im * &qi;
        let yi = &re * &qi + &im * &qr;
        let y = DMatrix::from_fn(n, block, |i, j| Complex64::new(yr[(i, j)], yi[(i, j)]));
        let ritz = y.adjoint() * &y;
        let eig = SymmetricEigen::try_new(ritz, 1e-15, 10_000).ok_or_else(|| Error::EigenSolve {
            context: "polar-grid oracle Rayleigh-Ritz".into(),
        })?;
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        values.truncate(count);
        let settled = values
            .iter()
            .zip(&previous)
            .all(|(v, p)| (v - p).abs() <= 1e-14 * values[0]);
        if settled && iteration > 2 {
            return Ok(values);
        }
        previous = values;
        // Next block: A^H (A Q) = conj(A) Y.
        xr = &re * &yr + &im * &yi;
        xi = &re * &yi - &im * &yr;
    }
    Err(Error::EigenSolve {
        context: format!("polar-grid oracle did not settle at c = {c}"),
    })
}

fn orthonormal(xr: &DMatrix<f64>, xi: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let x = DMatrix::from_fn(xr.nrows(), xr.ncols(), |i, j| Complex64::new(xr[(i, j)], xi[(i, j)]));
    Ok(x.qr().q())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_converges() {
        let e = eps0_bisection(60);
        assert!((e - (2.0 * (1.0 - 1.0 / e)).exp()).abs() < 1e-12);
    }

    #[test]
    fn grid_oracle_hand_case() {
        // Optimum {5.5, 4.5, 0} lies on the 1e-3 grid.
        let best = simplex_grid_efficiency(&[1.0, 0.5, 0.1], 1.0, 10.0, 1000);
        assert!((best - (6.5f64.log2() + 3.25f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn polar_oracle_small_c_limit() {
        // For c -> 0 the kernel is the constant 1 and |alpha|^2 -> pi^2.
        let v = polar_grid_spectrum(1e-3, 12, 12, 2).unwrap();
        assert!((v[0] - PI * PI).abs() < 1e-5);
        assert!(v[1] < 1e-5);
    }
}
