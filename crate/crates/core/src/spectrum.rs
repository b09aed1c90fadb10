//! Eigenvalues and radial eigenfunctions of the free-space propagation operator
//! restricted to a disc.
//!
//! On the unit disc the kernel `exp(i c <v, u>)` separates in polar coordinates:
//! each angular order `N` contributes the radial integral operator
//! `beta R(r) = int_0^1 J_|N|(c r r') R(r') r' dr'`, with operator eigenvalue
//! `2 pi i^N beta`. The radial problem is discretized by Gauss–Legendre Nyström
//! after the substitution `phi = sqrt(r) R`, which makes the matrix
//! `sqrt(w_i r_i) J_N(c r_i r_j) sqrt(w_j r_j)` symmetric.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_model::LinkBudget;
use crate::numerics::{bessel_j_orders, gauss_quadrature, QuadratureRule};

/// Largest disc area relative to `pi d^2`.
pub const MAX_AREA_FRACTION: f64 = 1.0e-4;
/// Sum-rule fraction below which a spectrum is flagged as under-truncated.
pub const SUM_RULE_FRACTION: f64 = 0.999;
pub const MIN_QUADRATURE_ORDER: usize = 16;
pub const MAX_C_PARAM: f64 = 1.0e3;

/// Synthesis disc of radius `R` at range `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscGeometry {
    pub radius: f64,
    /// `|S| = pi R^2`.
    pub area: f64,
    /// Kernel bandwidth `c = 2 pi R^2 / (lambda d)`.
    pub c_param: f64,
    /// Space-bandwidth product `M0 = |S|^2 / (lambda d)^2`.
    pub space_bandwidth: f64,
    pub wavelength: f64,
    pub range: f64,
    pub loss: f64,
}

impl DiscGeometry {
    pub fn from_area(area: f64, wavelength: f64, range: f64, loss: f64) -> Result<Self> {
        for (field, v) in [("area", area), ("wavelength", wavelength), ("range", range)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(loss > 0.0 && loss <= 1.0) {
            return Err(Error::validation("loss", format!("must lie in (0, 1], got {loss}")));
        }
        if area > MAX_AREA_FRACTION * PI * range * range {
            return Err(Error::validation(
                "area",
                format!("|S| = {area:e} exceeds {MAX_AREA_FRACTION:e} * pi d^2"),
            ));
        }
        let lambda_d = wavelength * range;
        let radius = (area / PI).sqrt();
        Ok(DiscGeometry {
            radius,
            area,
            c_param: 2.0 * area / lambda_d,
            space_bandwidth: (area / lambda_d).powi(2),
            wavelength,
            range,
            loss,
        })
    }

    /// Disc of the given area at the link's wavelength, range and loss.
    pub fn for_link(area: f64, link: &LinkBudget) -> Result<Self> {
        Self::from_area(area, link.wavelength, link.range, link.loss)
    }

    /// Disc whose kernel constant equals `c_param`.
    pub fn from_c_param(c_param: f64, wavelength: f64, range: f64, loss: f64) -> Result<Self> {
        Self::from_area(0.5 * c_param * wavelength * range, wavelength, range, loss)
    }

    /// Disc with space-bandwidth product `m0`.
    pub fn from_space_bandwidth(m0: f64, wavelength: f64, range: f64, loss: f64) -> Result<Self> {
        Self::from_area(m0.sqrt() * wavelength * range, wavelength, range, loss)
    }

    /// Hilbert–Schmidt mass `L |S|^2 / (lambda d)^2`, the exact sum of `|nu_n|^2`.
    pub fn hs_norm_sq(&self) -> f64 {
        self.loss * self.space_bandwidth
    }

    /// Converts a radial eigenvalue into `|nu|^2 = (L / (lambda d)^2) R^4 (2 pi beta)^2`.
    pub fn nu_sq(&self, beta: f64) -> f64 {
        let lambda_d = self.wavelength * self.range;
        self.loss / (lambda_d * lambda_d) * self.radius.powi(4) * (2.0 * PI * beta).powi(2)
    }
}

/// Doubly indexed mode: angular order `N` (signed) and radial order `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub angular: i32,
    pub radial: u32,
}

/// Nyström truncation: angular orders `0..=max_angular`, radial orders `0..=max_radial`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    pub max_angular: u32,
    pub max_radial: u32,
    pub quadrature_order: usize,
}

impl Truncation {
    /// `max_angular = ceil(2c) + 10`, `max_radial = ceil(c) + 10`, `Q = max(64, 4 ceil(c))`.
    pub fn default_for(c_param: f64) -> Self {
        let c = c_param.ceil().max(0.0);
        Truncation {
            max_angular: (2.0 * c_param).ceil() as u32 + 10,
            max_radial: c as u32 + 10,
            quadrature_order: 64usize.max(4 * c as usize),
        }
    }

    /// Smaller truncation for repeated eigenvalue-only solves inside the area
    /// search. Modes with `|N| + 2m` well above `c` carry no mass, so this
    /// still meets the sum rule while keeping large `c` affordable.
    pub fn compact_for(c_param: f64) -> Self {
        let c = c_param.ceil().max(0.0) as u32;
        Truncation {
            max_angular: c + 12,
            max_radial: c / 2 + 10,
            quadrature_order: 48usize.max(c as usize + 32),
        }
    }
}

/// Per-field overrides applied on top of a default truncation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationOverride {
    pub max_angular: Option<u32>,
    pub max_radial: Option<u32>,
    pub quadrature_order: Option<usize>,
}

impl TruncationOverride {
    pub fn is_empty(&self) -> bool {
        self.max_angular.is_none() && self.max_radial.is_none() && self.quadrature_order.is_none()
    }

    pub fn apply(&self, base: Truncation) -> Truncation {
        Truncation {
            max_angular: self.max_angular.unwrap_or(base.max_angular),
            max_radial: self.max_radial.unwrap_or(base.max_radial),
            quadrature_order: self.quadrature_order.unwrap_or(base.quadrature_order),
        }
    }
}

/// One radial eigenpair: `beta` and `R(r_i)` at the quadrature nodes,
/// normalized so that `int_0^1 R^2 r dr = 1 / (2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialEigenpair {
    pub beta: f64,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub mode: ModeIndex,
    pub beta: f64,
    pub nu_sq: f64,
}

/// Radial eigenfunctions sampled on the Nyström grid, with what is needed to
/// extend them off the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialBasis {
    pub rule: QuadratureRule,
    pub c_param: f64,
    /// `samples[|N|][m]` holds `R_{|N|,m}(r_i)`.
    pub samples: Vec<Vec<Vec<f64>>>,
}

impl RadialBasis {
    /// Nyström extension `R(r) = beta^-1 sum_j w_j J_N(c r r_j) R(r_j) r_j`.
    ///
    /// Exact at the nodes up to the eigen-solve residual and spectrally
    /// accurate in between.
    pub fn evaluate(&self, angular: u32, radial: u32, beta: f64, r: f64) -> Result<f64> {
        let samples = self
            .samples
            .get(angular as usize)
            .and_then(|m| m.get(radial as usize))
            .ok_or_else(|| Error::Range(format!("mode ({angular}, {radial}) not sampled")))?;
        let mut acc = 0.0;
        for ((&rj, &wj), &fj) in self.rule.nodes.iter().zip(&self.rule.weights).zip(samples) {
            let j = bessel_j_orders(angular as usize, self.c_param * r * rj)?[angular as usize];
            acc += wj * j * fj * rj;
        }
        Ok(acc / beta)
    }
}

/// Sorted operator spectrum for one disc geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpectrum {
    /// Sorted by `nu_sq` descending, ties by `(|N|, m)` ascending then `+N` first.
    pub entries: Vec<SpectrumEntry>,
    pub geometry: DiscGeometry,
    pub truncation: Truncation,
    /// `sum nu_sq / (L |S|^2 / (lambda d)^2)`.
    pub captured_fraction: f64,
    /// Present when eigenfunctions were requested.
    pub radial: Option<RadialBasis>,
}

impl OperatorSpectrum {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.nu_sq).sum()
    }

    pub fn nu_sq(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.nu_sq).collect()
    }

    pub fn is_truncation_sufficient(&self) -> bool {
        self.captured_fraction >= SUM_RULE_FRACTION
    }

    /// Radial samples of entry `index`, if eigenfunctions were computed.
    pub fn radial_samples(&self, index: usize) -> Option<&[f64]> {
        let entry = self.entries.get(index)?;
        let basis = self.radial.as_ref()?;
        basis
            .samples
            .get(entry.mode.angular.unsigned_abs() as usize)?
            .get(entry.mode.radial as usize)
            .map(Vec::as_slice)
    }

    /// Unit-disc eigenfunction `psi(r, theta) = R_{|N|,m}(r) exp(i N theta)` at `(x, y)`.
    pub fn unit_disc_eigenfunction(&self, index: usize, x: f64, y: f64) -> Result<Complex64> {
        let entry = self
            .entries
            .get(index)
            .ok_or_else(|| Error::Range(format!("spectrum has no entry {index}")))?;
        let basis = self.radial.as_ref().ok_or_else(|| {
            Error::validation("spectrum", "eigenfunctions were not computed")
        })?;
        let r = x.hypot(y).min(1.0);
        let theta = y.atan2(x);
        let radial = basis.evaluate(
            entry.mode.angular.unsigned_abs(),
            entry.mode.radial,
            entry.beta,
            r,
        )?;
        Ok(Complex64::from_polar(1.0, f64::from(entry.mode.angular) * theta) * radial)
    }

    /// Eigenfunction `p(u) = psi(u / R) / R`, unit norm on the physical disc.
    pub fn eigenfunction(&self, index: usize, x: f64, y: f64) -> Result<Complex64> {
        let radius = self.geometry.radius;
        Ok(self.unit_disc_eigenfunction(index, x / radius, y / radius)? / radius)
    }

    pub fn export(&self) -> SpectrumExport {
        SpectrumExport {
            schema_version: crate::SCHEMA_VERSION,
            geometry: self.geometry,
            truncation: self.truncation,
            captured_fraction: self.captured_fraction,
            entries: self
                .entries
                .iter()
                .map(|e| ExportEntry {
                    angular: e.mode.angular,
                    m: e.mode.radial,
                    beta: e.beta,
                    nu_sq: e.nu_sq,
                })
                .collect(),
        }
    }
}

/// JSON form of a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumExport {
    pub schema_version: u32,
    pub geometry: DiscGeometry,
    pub truncation: Truncation,
    pub captured_fraction: f64,
    pub entries: Vec<ExportEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportEntry {
    #[serde(rename = "N")]
    pub angular: i32,
    pub m: u32,
    pub beta: f64,
    pub nu_sq: f64,
}

fn check_radial_args(c_param: f64, quadrature_order: usize) -> Result<()> {
    if !(c_param.is_finite() && c_param > 0.0 && c_param <= MAX_C_PARAM) {
        return Err(Error::Range(format!("c_param {c_param} outside (0, {MAX_C_PARAM}]")));
    }
    if quadrature_order < MIN_QUADRATURE_ORDER {
        return Err(Error::Range(format!(
            "quadrature order {quadrature_order} below {MIN_QUADRATURE_ORDER}"
        )));
    }
    Ok(())
}

/// `J_N(c r_i r_j)` for every `N <= max_order` and every node pair.
struct KernelTable {
    q: usize,
    orders: usize,
    values: Vec<f64>,
}

impl KernelTable {
    fn build(rule: &QuadratureRule, c_param: f64, max_order: usize) -> Result<Self> {
        let q = rule.order();
        let orders = max_order + 1;
        let mut values = vec![0.0; q * (q + 1) / 2 * orders];
        let mut slot = 0;
        for i in 0..q {
            for j in i..q {
                let js = bessel_j_orders(max_order, c_param * rule.nodes[i] * rule.nodes[j])?;
                values[slot * orders..(slot + 1) * orders].copy_from_slice(&js);
                slot += 1;
            }
        }
        Ok(KernelTable { q, orders, values })
    }

    fn nystrom_matrix(&self, rule: &QuadratureRule, order: usize) -> DMatrix<f64> {
        let q = self.q;
        let scale: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(r, w)| (r * w).sqrt())
            .collect();
        let mut m = DMatrix::zeros(q, q);
        let mut slot = 0;
        for i in 0..q {
            for j in i..q {
                let v = scale[i] * self.values[slot * self.orders + order] * scale[j];
                m[(i, j)] = v;
                m[(j, i)] = v;
                slot += 1;
            }
        }
        m
    }
}

fn solve_order(
    table: &KernelTable,
    rule: &QuadratureRule,
    order: usize,
    c_param: f64,
    eigenfunctions: bool,
) -> Result<Vec<RadialEigenpair>> {
    let m = table.nystrom_matrix(rule, order);
    let q = rule.order();
    let mut pairs: Vec<RadialEigenpair> = if eigenfunctions {
        let eig = SymmetricEigen::try_new(m, 1e-15, 1000 * q).ok_or_else(|| Error::EigenSolve {
            context: format!("angular order {order}, c = {c_param}, Q = {q}"),
        })?;
        let norm = 1.0 / (2.0 * PI).sqrt();
        (0..q)
            .map(|k| {
                let v = eig.eigenvectors.column(k);
                // R(0) vanishes for N > 0, so fix the sign on the largest sample.
                let pivot = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
                let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
                let samples = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .zip(v.iter())
                    .map(|((r, w), vi)| sign * norm * vi / (r * w).sqrt())
                    .collect();
                RadialEigenpair {
                    beta: eig.eigenvalues[k],
                    samples,
                }
            })
            .collect()
    } else {
        m.symmetric_eigenvalues()
            .iter()
            .map(|&beta| RadialEigenpair {
                beta,
                samples: Vec::new(),
            })
            .collect()
    };
    pairs.sort_by(|a, b| b.beta.abs().total_cmp(&a.beta.abs()));
    Ok(pairs)
}

/// All Nyström eigenpairs of the order-`angular` radial operator, sorted by `|beta|` descending.
pub fn radial_eigensolve(
    angular: u32,
    c_param: f64,
    quadrature_order: usize,
) -> Result<Vec<RadialEigenpair>> {
    check_radial_args(c_param, quadrature_order)?;
    let rule = gauss_quadrature(quadrature_order)?;
    let table = KernelTable::build(&rule, c_param, angular as usize)?;
    solve_order(&table, &rule, angular as usize, c_param, true)
}

/// Assembles the sorted spectrum, including radial eigenfunctions.
pub fn assemble_spectrum(geometry: &DiscGeometry, truncation: Truncation) -> Result<OperatorSpectrum> {
    assemble(geometry, truncation, true)
}

/// Same as [`assemble_spectrum`] but skips eigenvectors; `radial` is `None`.
pub fn assemble_eigenvalues(
    geometry: &DiscGeometry,
    truncation: Truncation,
) -> Result<OperatorSpectrum> {
    assemble(geometry, truncation, false)
}

fn assemble(
    geometry: &DiscGeometry,
    truncation: Truncation,
    eigenfunctions: bool,
) -> Result<OperatorSpectrum> {
    let RadialSolution { betas, basis } = solve_radial_family(geometry.c_param, truncation, eigenfunctions)?;
    Ok(scale_to_geometry(geometry, truncation, &betas, basis))
}

struct RadialSolution {
    /// `betas[N][m]`, truncated to `max_radial + 1` per order.
    betas: Vec<Vec<f64>>,
    basis: Option<RadialBasis>,
}

fn solve_radial_family(
    c_param: f64,
    truncation: Truncation,
    eigenfunctions: bool,
) -> Result<RadialSolution> {
    if truncation.max_radial as usize >= truncation.quadrature_order {
        return Err(Error::Range(format!(
            "max_radial {} must be below the quadrature order {}",
            truncation.max_radial, truncation.quadrature_order
        )));
    }
    check_radial_args(c_param, truncation.quadrature_order)?;
    let rule = gauss_quadrature(truncation.quadrature_order)?;
    let max_order = truncation.max_angular as usize;
    let table = KernelTable::build(&rule, c_param, max_order)?;
    let keep = truncation.max_radial as usize + 1;
    let mut betas = Vec::with_capacity(max_order + 1);
    let mut samples = Vec::new();
    for order in 0..=max_order {
        let mut pairs = solve_order(&table, &rule, order, c_param, eigenfunctions)?;
        pairs.truncate(keep);
        betas.push(pairs.iter().map(|p| p.beta).collect());
        if eigenfunctions {
            samples.push(pairs.into_iter().map(|p| p.samples).collect());
        }
    }
    let basis = eigenfunctions.then(|| RadialBasis {
        rule,
        c_param,
        samples,
    });
    Ok(RadialSolution { betas, basis })
}

fn scale_to_geometry(
    geometry: &DiscGeometry,
    truncation: Truncation,
    betas: &[Vec<f64>],
    radial: Option<RadialBasis>,
) -> OperatorSpectrum {
    let mut entries = Vec::new();
    for (order, row) in betas.iter().enumerate() {
        for (m, &beta) in row.iter().enumerate() {
            let nu_sq = geometry.nu_sq(beta);
            let n = order as i32;
            entries.push(SpectrumEntry {
                mode: ModeIndex { angular: n, radial: m as u32 },
                beta,
                nu_sq,
            });
            if n != 0 {
                entries.push(SpectrumEntry {
                    mode: ModeIndex { angular: -n, radial: m as u32 },
                    beta,
                    nu_sq,
                });
            }
        }
    }
    entries.sort_by(|a, b| {
        b.nu_sq
            .total_cmp(&a.nu_sq)
            .then(a.mode.angular.unsigned_abs().cmp(&b.mode.angular.unsigned_abs()))
            .then(a.mode.radial.cmp(&b.mode.radial))
            .then(b.mode.angular.cmp(&a.mode.angular))
    });
    let captured_fraction = entries.iter().map(|e| e.nu_sq).sum::<f64>() / geometry.hs_norm_sq();
    if captured_fraction < SUM_RULE_FRACTION {
        log::warn!(
            "spectrum truncation captures {:.5}% of the Hilbert-Schmidt mass (c = {}, {:?})",
            100.0 * captured_fraction,
            geometry.c_param,
            truncation
        );
    }
    OperatorSpectrum {
        entries,
        geometry: *geometry,
        truncation,
        captured_fraction,
        radial,
    }
}

/// Number of entries with `nu_sq >= fraction * max nu_sq`.
pub fn effective_rank(spectrum: &OperatorSpectrum, fraction: f64) -> usize {
    let Some(max) = spectrum.entries.first().map(|e| e.nu_sq) else {
        return 0;
    };
    spectrum
        .entries
        .iter()
        .filter(|e| e.nu_sq >= fraction * max)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CacheKey {
    c_micro: i64,
    truncation: Truncation,
    eigenfunctions: bool,
}

/// Spectra keyed by `(c rounded to 1e-6, truncation)`.
///
/// Eigenvalues depend on the geometry only through `c` up to the global factor
/// `(L / (lambda d)^2) R^4`, so cached radial solutions are rescaled per request.
/// Reads are concurrent; inserts take the write lock.
#[derive(Debug, Default)]
pub struct SpectrumCache {
    inner: RwLock<HashMap<CacheKey, Arc<CachedRadial>>>,
}

#[derive(Debug)]
struct CachedRadial {
    betas: Vec<Vec<f64>>,
    basis: Option<RadialBasis>,
}

impl SpectrumCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spectrum at `geometry`, eigenvalues only unless `eigenfunctions` is set.
    pub fn spectrum(
        &self,
        geometry: &DiscGeometry,
        truncation: Truncation,
        eigenfunctions: bool,
    ) -> Result<OperatorSpectrum> {
        let key = CacheKey {
            c_micro: (geometry.c_param * 1e6).round() as i64,
            truncation,
            eigenfunctions,
        };
        let hit = self
            .inner
            .read()
            .ok()
            .and_then(|m| m.get(&key).cloned());
        let cached = match hit {
            Some(c) => c,
            None => {
                let sol = solve_radial_family(geometry.c_param, truncation, eigenfunctions)?;
                let entry = Arc::new(CachedRadial {
                    betas: sol.betas,
                    basis: sol.basis,
                });
                if let Ok(mut map) = self.inner.write() {
                    map.entry(key).or_insert_with(|| entry.clone());
                }
                entry
            }
        };
        Ok(scale_to_geometry(
            geometry,
            truncation,
            &cached.betas,
            cached.basis.clone(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry_c(c: f64) -> DiscGeometry {
        DiscGeometry::from_c_param(c, 0.01, 1.0e6, 0.8).unwrap()
    }

    #[test]
    fn geometry_consistency() {
        let g = DiscGeometry::from_area(12.5, 0.02, 3.0e5, 1.0).unwrap();
        assert!((g.area - PI * g.radius * g.radius).abs() <= 1e-12 * g.area);
        let m0 = (PI * g.radius.powi(2) / (g.wavelength * g.range)).powi(2);
        assert!((g.space_bandwidth - m0).abs() <= 1e-12 * m0);
        assert!((g.space_bandwidth - (g.c_param / 2.0).powi(2)).abs() <= 1e-12 * m0);
        assert!(DiscGeometry::from_area(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn small_c_limit_is_constant_mode() {
        let pairs = radial_eigensolve(0, 1e-3, 32).unwrap();
        assert!((pairs[0].beta - 0.5).abs() < 1e-6);
        let s = &pairs[0].samples;
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!(s.iter().all(|v| (v - mean).abs() < 1e-6 * mean.abs()));
        // Unit norm on the disc: R = 1/sqrt(pi).
        assert!((mean - 1.0 / PI.sqrt()).abs() < 1e-6);

        let first = radial_eigensolve(1, 1e-3, 32).unwrap();
        assert!(first[0].beta.abs() <= 1e-3);
    }

    #[test]
    fn radial_eigenfunctions_normalized() {
        let rule = gauss_quadrature(48).unwrap();
        for order in [0, 1, 3] {
            let pairs = radial_eigensolve(order, 3.0, 48).unwrap();
            for p in pairs.iter().take(6) {
                let norm: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .zip(&p.samples)
                    .map(|((r, w), f)| w * f * f * r)
                    .sum();
                assert!((norm - 1.0 / (2.0 * PI)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(radial_eigensolve(0, 1.0, 8).is_err());
        assert!(radial_eigensolve(0, 0.0, 32).is_err());
        assert!(radial_eigensolve(0, 2000.0, 32).is_err());
    }

    #[test]
    fn degenerate_pairs_and_ordering() {
        let g = geometry_c(4.0);
        let s = assemble_eigenvalues(&g, Truncation::default_for(4.0)).unwrap();
        assert!(s.entries.windows(2).all(|w| w[0].nu_sq >= w[1].nu_sq));
        for e in s.entries.iter().filter(|e| e.mode.angular > 0) {
            let twin = s
                .entries
                .iter()
                .find(|t| t.mode.angular == -e.mode.angular && t.mode.radial == e.mode.radial)
                .expect("missing -N twin");
            assert_eq!(twin.nu_sq.to_bits(), e.nu_sq.to_bits());
        }
    }

    #[test]
    fn tiny_disc_has_single_mode() {
        let g = DiscGeometry::from_space_bandwidth(1e-4, 0.01, 1.0e6, 0.6).unwrap();
        let s = assemble_eigenvalues(&g, Truncation::default_for(g.c_param)).unwrap();
        let top = s.entries[0].nu_sq;
        assert!((top - g.hs_norm_sq()).abs() < 1e-3 * g.hs_norm_sq());
        assert!(s.entries[1..].iter().all(|e| e.nu_sq < 1e-3 * top));
        assert_eq!(effective_rank(&s, 0.5), 1);
        assert_eq!(effective_rank(&s, 1e-300), s.len());
    }

    #[test]
    fn sum_rule_holds_at_default_truncation() {
        for c in [0.5, 1.0, 2.0, 4.0, 9.0] {
            let g = geometry_c(c);
            let s = assemble_eigenvalues(&g, Truncation::default_for(c)).unwrap();
            assert!(s.captured_fraction <= 1.0 + 1e-6, "c = {c}");
            assert!(s.captured_fraction >= SUM_RULE_FRACTION, "c = {c}: {}", s.captured_fraction);
        }
    }

    #[test]
    fn sum_rule_monotone_in_truncation() {
        let g = geometry_c(6.0);
        let mut last = 0.0;
        for (n, m) in [(2, 2), (5, 4), (8, 6), (14, 10), (22, 16)] {
            let t = Truncation { max_angular: n, max_radial: m, quadrature_order: 64 };
            let s = assemble_eigenvalues(&g, t).unwrap();
            assert!(s.captured_fraction >= last - 1e-15);
            last = s.captured_fraction;
        }
        assert!(last >= SUM_RULE_FRACTION);
    }

    #[test]
    fn eigenfunctions_match_values_only_spectrum() {
        let g = geometry_c(2.0);
        let t = Truncation::default_for(2.0);
        let full = assemble_spectrum(&g, t).unwrap();
        let vals = assemble_eigenvalues(&g, t).unwrap();
        for (a, b) in full.entries.iter().zip(&vals.entries).take(8) {
            assert!((a.nu_sq - b.nu_sq).abs() < 1e-12 * vals.entries[0].nu_sq);
        }
        assert!(full.radial_samples(0).is_some());
        assert!(vals.radial_samples(0).is_none());
    }

    #[test]
    fn nystrom_extension_reproduces_nodes() {
        let g = geometry_c(3.0);
        let s = assemble_spectrum(&g, Truncation::default_for(3.0)).unwrap();
        let basis = s.radial.as_ref().unwrap();
        for idx in 0..5 {
            let e = s.entries[idx];
            let samples = s.radial_samples(idx).unwrap();
            for (i, &r) in basis.rule.nodes.iter().enumerate().step_by(7) {
                let v = basis
                    .evaluate(e.mode.angular.unsigned_abs(), e.mode.radial, e.beta, r)
                    .unwrap();
                assert!((v - samples[i]).abs() < 1e-9, "entry {idx} node {i}");
            }
        }
    }

    #[test]
    fn cache_reuses_and_rescales() {
        let cache = SpectrumCache::new();
        let a = DiscGeometry::from_c_param(2.5, 0.01, 1.0e6, 1.0).unwrap();
        let b = DiscGeometry::from_c_param(2.5, 0.02, 5.0e5, 0.5).unwrap();
        let t = Truncation::default_for(2.5);
        let sa = cache.spectrum(&a, t, false).unwrap();
        let sb = cache.spectrum(&b, t, false).unwrap();
        assert_eq!(cache.len(), 1);
        for (x, y) in sa.entries.iter().zip(&sb.entries) {
            assert!((x.nu_sq * 0.5 - y.nu_sq).abs() <= 1e-12 * sa.entries[0].nu_sq);
        }
        let direct = assemble_eigenvalues(&a, t).unwrap();
        assert_eq!(direct.entries, sa.entries);
    }

    #[test]
    fn export_has_schema() {
        let g = geometry_c(1.0);
        let s = assemble_eigenvalues(&g, Truncation::default_for(1.0)).unwrap();
        let json = serde_json::to_value(s.export()).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert!(json["entries"][0]["N"].is_i64());
        assert!(json["entries"][0]["nu_sq"].is_f64());
    }
}
