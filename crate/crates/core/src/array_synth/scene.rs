//! Explicit 3-D element geometry, exact and reduced far-field channel matrices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible `d / max(r_T, r_R)`.
pub const MIN_RANGE_RATIO: f64 = 1.0e2;

/// Transmit elements near the origin, receive elements near `(d, 0, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldScene {
    pub tx_positions: Vec<[f64; 3]>,
    /// Receive positions in absolute coordinates.
    pub rx_positions: Vec<[f64; 3]>,
    pub wavelength: f64,
    pub range: f64,
}

fn norm3(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

impl FarFieldScene {
    pub fn new(
        tx_positions: Vec<[f64; 3]>,
        rx_positions: Vec<[f64; 3]>,
        wavelength: f64,
        range: f64,
    ) -> Result<Self> {
        let scene = FarFieldScene {
            tx_positions,
            rx_positions,
            wavelength,
            range,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Radii of the spheres about the tx and rx origins containing all elements.
    pub fn radii(&self) -> (f64, f64) {
        let r_t = self.tx_positions.iter().map(|&p| norm3(p)).fold(0.0, f64::max);
        let r_r = self
            .rx_positions
            .iter()
            .map(|p| norm3([p[0] - self.range, p[1], p[2]]))
            .fold(0.0, f64::max);
        (r_t, r_r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_positions.is_empty() || self.rx_positions.is_empty() {
            return Err(Error::validation("scene", "needs at least one tx and one rx element"));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::validation("wavelength", "must be finite and > 0"));
        }
        if !(self.range.is_finite() && self.range > 0.0) {
            return Err(Error::validation("range", "must be finite and > 0"));
        }
        let all_finite = self
            .tx_positions
            .iter()
            .chain(&self.rx_positions)
            .all(|p| p.iter().all(|c| c.is_finite()));
        if !all_finite {
            return Err(Error::validation("scene", "positions must be finite"));
        }
        let (r_t, r_r) = self.radii();
        if self.range < MIN_RANGE_RATIO * r_t.max(r_r) {
            return Err(Error::validation(
                "range",
                format!(
                    "d = {} is below {MIN_RANGE_RATIO} * max(r_T, r_R) = {}",
                    self.range,
                    MIN_RANGE_RATIO * r_t.max(r_r)
                ),
            ));
        }
        Ok(())
    }

    /// `n_tx` and `n_rx` points drawn uniformly from transverse discs of radius
    /// `radius` in the planes `x = 0` and `x = d`.
    pub fn random_transverse(
        n_tx: usize,
        n_rx: usize,
        radius: f64,
        wavelength: f64,
        range: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut disc_point = |x: f64| {
            let r = radius * rng.random::<f64>().sqrt();
            let t = 2.0 * PI * rng.random::<f64>();
            [x, r * t.cos(), r * t.sin()]
        };
        let tx = (0..n_tx).map(|_| disc_point(0.0)).collect();
        let rx = (0..n_rx).map(|_| disc_point(range)).collect();
        Self::new(tx, rx, wavelength, range)
    }

    /// Copy with the receive plane moved to range `range`, keeping transverse offsets.
    pub fn at_range(&self, range: f64) -> Result<Self> {
        let rx = self
            .rx_positions
            .iter()
            .map(|p| [p[0] - self.range + range, p[1], p[2]])
            .collect();
        Self::new(self.tx_positions.clone(), rx, self.wavelength, range)
    }

    pub fn tx_transverse(&self) -> Vec<[f64; 2]> {
        self.tx_positions.iter().map(|p| [p[1], p[2]]).collect()
    }

    pub fn rx_transverse(&self) -> Vec<[f64; 2]> {
        self.rx_positions.iter().map(|p| [p[1], p[2]]).collect()
    }
}

/// `h_ij = exp(-i 2 pi d_ij / lambda)`, rows indexed by receive element.
///
/// The distance is split as `dx + q` with `q = |D|^2 / (d_ij + dx)` so that the
/// large common part is reduced modulo the wavelength before it meets `q`.
pub fn exact_channel_matrix(scene: &FarFieldScene) -> Result<DMatrix<Complex64>> {
    scene.validate()?;
    let lambda = scene.wavelength;
    Ok(DMatrix::from_fn(
        scene.rx_positions.len(),
        scene.tx_positions.len(),
        |i, j| {
            let v = scene.rx_positions[i];
            let u = scene.tx_positions[j];
            let dx = v[0] - u[0];
            let perp_sq = (v[1] - u[1]).powi(2) + (v[2] - u[2]).powi(2);
            let dist = (dx * dx + perp_sq).sqrt();
            let q = perp_sq / (dist + dx);
            let turns = (dx / lambda).rem_euclid(1.0) + q / lambda;
            Complex64::from_polar(1.0, -2.0 * PI * turns.rem_euclid(1.0))
        },
    ))
}

/// `h~_ij = exp(i 2 pi <v_i, u_j> / (lambda d))` from transverse coordinates only.
pub fn reduced_channel_matrix(
    tx_2d: &[[f64; 2]],
    rx_2d: &[[f64; 2]],
    wavelength: f64,
    range: f64,
) -> DMatrix<Complex64> {
    let scale = 2.0 * PI / (wavelength * range);
    DMatrix::from_fn(rx_2d.len(), tx_2d.len(), |i, j| {
        let v = rx_2d[i];
        let u = tx_2d[j];
        Complex64::from_polar(1.0, scale * (v[0] * u[0] + v[1] * u[1]))
    })
}

/// Singular values, sorted descending.
pub fn singular_values(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, 1e-15, 10_000).ok_or_else(|| {
        Error::EigenSolve {
            context: format!("SVD of {}x{} matrix", m.nrows(), m.ncols()),
        }
    })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Exact and reduced matrices for one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrixPair {
    pub exact: DMatrix<Complex64>,
    pub reduced: DMatrix<Complex64>,
}

pub fn channel_matrices(scene: &FarFieldScene) -> Result<ChannelMatrixPair> {
    Ok(ChannelMatrixPair {
        exact: exact_channel_matrix(scene)?,
        reduced: reduced_channel_matrix(
            &scene.tx_transverse(),
            &scene.rx_transverse(),
            scene.wavelength,
            scene.range,
        ),
    })
}

/// `max_i |s_i - s~_i| / max s~` over sorted singular values.
pub fn lemma1_check(scene: &FarFieldScene) -> Result<f64> {
    let pair = channel_matrices(scene)?;
    let a = singular_values(&pair.exact)?;
    let b = singular_values(&pair.reduced)?;
    let top = b.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / top)
}
