use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUADRATURE_ORDER: usize = 512;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss–Legendre rule on `[0, 1]`; nodes strictly increasing, weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre rule of the given order, mapped from `[-1, 1]` to `[0, 1]`.
///
/// Roots of `P_n` are located by Newton iteration on the three-term recurrence,
/// starting from the Tricomi estimate, with a fixed `1e-14` step tolerance.
pub fn gauss_quadrature(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_QUADRATURE_ORDER {
        return Err(Error::Range(format!(
            "quadrature order {order} outside [1, {MAX_QUADRATURE_ORDER}]"
        )));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th largest root of P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_derivative(n, x);
            deriv = dp;
            let step = p / dp;
            x -= step;
            if step.abs() <= NEWTON_TOL {
                let (_, dp) = legendre_with_derivative(n, x);
                deriv = dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        // x is the (i+1)-th largest root; its mirror -x the (i+1)-th smallest.
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[n - 1 - i] = 0.5 * w;
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// `(P_n(x), P_n'(x))` by the Bonnet recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let k = k as f64;
        let next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}
