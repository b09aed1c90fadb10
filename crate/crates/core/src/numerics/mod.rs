//! Special functions, quadrature and root finding shared by the rest of the crate.

mod bessel;
mod quadrature;
mod roots;

pub use bessel::{bessel_j, bessel_j_orders, MAX_ENVELOPE_ARG, MAX_ENVELOPE_ORDER};
pub use quadrature::{gauss_quadrature, QuadratureRule, MAX_QUADRATURE_ORDER};
pub use roots::{solve_eps0, EPS0_BRACKET};
