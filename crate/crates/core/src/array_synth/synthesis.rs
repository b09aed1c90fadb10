//! Simple-function synthesis of distributed arrays from the disc eigenfunctions.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::partition::{equal_area_partition, Cell};
use super::scene::singular_values;
use crate::error::{Error, Result};
use crate::link_model::{log2_1p, LinkBudget};
use crate::spectrum::{DiscGeometry, ModeIndex, OperatorSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayElement {
    pub x: f64,
    pub y: f64,
    /// Sub-aperture area, `A / N`.
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayDesign {
    pub cell_count: usize,
    pub disc_area: f64,
    pub modes: Vec<ModeIndex>,
    pub cells: Vec<Cell>,
    pub tx_elements: Vec<ArrayElement>,
    pub rx_elements: Vec<ArrayElement>,
    /// `K x N`; row `k` is the transmit antenna function of stream `k`.
    pub stream_weights_tx: DMatrix<Complex64>,
    /// `K x N`; row `k` is the receive antenna function of stream `k`.
    pub stream_weights_rx: DMatrix<Complex64>,
    pub stream_powers: Vec<f64>,
}

impl ArrayDesign {
    pub fn streams(&self) -> usize {
        self.stream_powers.len()
    }

    pub fn export(&self) -> ArrayExport {
        let rows = |w: &DMatrix<Complex64>| {
            (0..w.nrows())
                .map(|k| w.row(k).iter().map(|z| [z.re, z.im]).collect())
                .collect()
        };
        ArrayExport {
            schema_version: crate::SCHEMA_VERSION,
            cell_count: self.cell_count,
            streams: self.streams(),
            disc_area: self.disc_area,
            modes: self.modes.iter().map(|m| [m.angular as i64, m.radial as i64]).collect(),
            tx_elements: self.tx_elements.clone(),
            rx_elements: self.rx_elements.clone(),
            tx_weights: rows(&self.stream_weights_tx),
            rx_weights: rows(&self.stream_weights_rx),
            powers: self.stream_powers.clone(),
        }
    }
}

/// JSON form of an [`ArrayDesign`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayExport {
    pub schema_version: u32,
    #[serde(rename = "N")]
    pub cell_count: usize,
    #[serde(rename = "K")]
    pub streams: usize,
    pub disc_area: f64,
    /// `[N, m]` per stream.
    pub modes: Vec<[i64; 2]>,
    pub tx_elements: Vec<ArrayElement>,
    pub rx_elements: Vec<ArrayElement>,
    /// `K` rows of `N` `[re, im]` pairs.
    pub tx_weights: Vec<Vec<[f64; 2]>>,
    pub rx_weights: Vec<Vec<[f64; 2]>>,
    pub powers: Vec<f64>,
}

/// Per-stream powers `P/K + (1/K) sum_i c_i - c_k` with `c_k = BN0 / h_k` and
/// `h_k = (A_T A_R / |S|^2) |nu_k|^2`, the waterfill levels restricted to `K` streams.
pub fn stream_powers(nu_sq: &[f64], area: f64, link: &LinkBudget) -> Result<Vec<f64>> {
    let k = nu_sq.len() as f64;
    let scale = link.aperture_tx * link.aperture_rx / (area * area);
    let inverse: Vec<f64> = nu_sq.iter().map(|&v| link.noise_floor() / (scale * v)).collect();
    let mean = inverse.iter().sum::<f64>() / k;
    let powers: Vec<f64> = inverse.iter().map(|c| link.power / k + mean - c).collect();
    if let Some((i, p)) = powers.iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
        return Err(Error::validation(
            "streams",
            format!("stream {i} would get power {p:e}; too many streams for this SNR"),
        ));
    }
    Ok(powers)
}

/// Partitions the disc of area `area` into `cell_count` equal-area cells,
/// places an element at each centroid and samples the first `streams`
/// eigenfunctions there.
pub fn synthesize_array(
    spectrum: &OperatorSpectrum,
    area: f64,
    streams: usize,
    cell_count: usize,
    link: &LinkBudget,
) -> Result<ArrayDesign> {
    link.validate()?;
    if streams == 0 || streams > spectrum.len() {
        return Err(Error::validation(
            "streams",
            format!("need 1..={} streams, got {streams}", spectrum.len()),
        ));
    }
    if cell_count < streams {
        return Err(Error::validation(
            "cell_count",
            format!("{cell_count} cells cannot carry {streams} streams"),
        ));
    }
    let geometry = &spectrum.geometry;
    if (geometry.area - area).abs() > 1e-9 * area {
        return Err(Error::validation("area", "spectrum was computed for a different disc"));
    }
    if spectrum.radial.is_none() {
        return Err(Error::validation("spectrum", "eigenfunctions were not computed"));
    }
    if area < link.max_aperture() {
        return Err(Error::validation("area", "disc is smaller than the aperture"));
    }

    let cells = equal_area_partition(geometry.radius, cell_count)?;
    let sub_radius = (link.max_aperture() / (cell_count as f64 * PI)).sqrt();
    for (i, c) in cells.iter().enumerate() {
        if sub_radius > c.clearance() {
            return Err(Error::validation(
                "cell_count",
                format!(
                    "sub-aperture radius {sub_radius:e} does not fit cell {i} (clearance {:e})",
                    c.clearance()
                ),
            ));
        }
    }
    let centroids: Vec<[f64; 2]> = cells.iter().map(Cell::centroid).collect();
    let n = cell_count as f64;
    let elements = |a: f64| {
        centroids
            .iter()
            .map(|p| ArrayElement { x: p[0], y: p[1], area: a / n })
            .collect::<Vec<_>>()
    };

    let mut samples = DMatrix::zeros(streams, cell_count);
    for k in 0..streams {
        for (i, p) in centroids.iter().enumerate() {
            samples[(k, i)] = spectrum.eigenfunction(k, p[0], p[1])?;
        }
    }
    let weights = |a: f64| {
        let mut w = samples.map(|z| z * (area / a).sqrt());
        for k in 0..streams {
            let norm = (w.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>() * a / n).sqrt();
            for z in w.row_mut(k).iter_mut() {
                *z /= norm;
            }
        }
        w
    };

    let nu_sq: Vec<f64> = spectrum.entries[..streams].iter().map(|e| e.nu_sq).collect();
    Ok(ArrayDesign {
        cell_count,
        disc_area: area,
        modes: spectrum.entries[..streams].iter().map(|e| e.mode).collect(),
        cells,
        tx_elements: elements(link.aperture_tx),
        rx_elements: elements(link.aperture_rx),
        stream_weights_tx: weights(link.aperture_tx),
        stream_weights_rx: weights(link.aperture_rx),
        stream_powers: stream_powers(&nu_sq, area, link)?,
    })
}

/// `K x K` channel seen by the streams: element midpoint quadrature of
/// `conj(g_m(v)) H(v, u) f_n(u)` with `H = sqrt(L)/(lambda d) exp(i 2 pi <v, u> / (lambda d))`.
pub fn finite_array_gram(design: &ArrayDesign, geometry: &DiscGeometry) -> Result<DMatrix<Complex64>> {
    let n = design.cell_count;
    if design.tx_elements.len() != n
        || design.rx_elements.len() != n
        || design.stream_weights_tx.ncols() != n
        || design.stream_weights_rx.ncols() != n
    {
        return Err(Error::Dimension("design arrays disagree with the cell count".into()));
    }
    let lambda_d = geometry.wavelength * geometry.range;
    let amp = geometry.loss.sqrt() / lambda_d;
    let phase = 2.0 * PI / lambda_d;
    let kernel = DMatrix::from_fn(n, n, |i, j| {
        let v = design.rx_elements[i];
        let u = design.tx_elements[j];
        Complex64::from_polar(amp * v.area * u.area, phase * (v.x * u.x + v.y * u.y))
    });
    let rx = design.stream_weights_rx.map(|z| z.conj());
    Ok(rx * kernel * design.stream_weights_tx.transpose())
}

/// Frobenius norm of the off-diagonal part.
pub fn off_diagonal_norm(m: &DMatrix<Complex64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// `sum log2(1 + s_k^2 P_k / (B N0))` with Gram singular values and stream
/// powers both sorted descending.
pub fn achieved_efficiency(
    design: &ArrayDesign,
    geometry: &DiscGeometry,
    link: &LinkBudget,
) -> Result<f64> {
    let gram = finite_array_gram(design, geometry)?;
    let sv = singular_values(&gram)?;
    let mut powers = design.stream_powers.clone();
    powers.sort_by(|a, b| b.total_cmp(a));
    Ok(sv
        .iter()
        .zip(&powers)
        .map(|(s, p)| log2_1p(s * s * p / link.noise_floor()))
        .sum())
}
