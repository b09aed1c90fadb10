//! Upper and lower capacity bounds, the closed-form strong-signal approximation,
//! and the search over synthesis disc area.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_model::{derive_link, siso_efficiency, LinkBudget};
use crate::numerics::solve_eps0;
use crate::spectrum::{
    DiscGeometry, OperatorSpectrum, SpectrumCache, Truncation, TruncationOverride,
    MAX_AREA_FRACTION,
};
use crate::waterfill::{allocation_efficiency, waterfill, ChannelGains, PowerAllocation};

/// Grid size used by [`default_area_grid`].
pub const AREA_GRID_POINTS: usize = 32;
/// Upper end of the default grid as a multiple of the predicted optimal `M0`.
pub const AREA_GRID_SPAN: f64 = 4.0;
const GOLDEN_STEPS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    WeakSignal,
    StrongSignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityBounds {
    pub received_snr: f64,
    pub lower_bits: f64,
    pub upper_bits: f64,
    pub regime: Regime,
    pub active_k: usize,
    /// Disc area maximizing the lower bound; `None` in the weak regime.
    pub best_area: Option<f64>,
    pub eps0: f64,
}

/// `eps0 - 1`, at or below which a single spatial mode is optimal.
pub fn weak_threshold(eps0: f64) -> f64 {
    eps0 - 1.0
}

pub fn regime(received_snr: f64, eps0: f64) -> Regime {
    if received_snr <= weak_threshold(eps0) {
        Regime::WeakSignal
    } else {
        Regime::StrongSignal
    }
}

/// Strong-branch formula `sqrt(gamma g / (eps0 - 1)) log2(eps0)`, valid at any SNR.
pub fn strong_branch(received_snr: f64, eps0: f64) -> f64 {
    (received_snr / (eps0 - 1.0)).sqrt() * eps0.log2()
}

/// Upper bound on the spectral efficiency.
pub fn upper_bound(received_snr: f64, eps0: f64) -> f64 {
    match regime(received_snr, eps0) {
        Regime::WeakSignal => siso_efficiency(received_snr),
        Regime::StrongSignal => strong_branch(received_snr, eps0),
    }
}

/// `log2(eps0) / sqrt(eps0 - 1)`.
pub fn corollary_coefficient(eps0: f64) -> f64 {
    eps0.log2() / (eps0 - 1.0).sqrt()
}

/// Closed-form strong-signal approximation `coefficient * sqrt(gamma g)`.
pub fn corollary_approx(received_snr: f64, eps0: f64) -> Result<f64> {
    // The boundary itself is accepted so that branch continuity can be checked.
    if !(received_snr >= weak_threshold(eps0)) {
        return Err(Error::validation(
            "received_snr",
            format!(
                "approximation holds above gamma*g = {}, got {received_snr}",
                weak_threshold(eps0)
            ),
        ));
    }
    Ok(corollary_coefficient(eps0) * received_snr.sqrt())
}

fn effective_gains(area: f64, link: &LinkBudget, spectrum: &OperatorSpectrum) -> Result<ChannelGains> {
    let scale = link.aperture_tx * link.aperture_rx / (area * area);
    ChannelGains::new(
        spectrum.entries.iter().map(|e| scale * e.nu_sq.max(0.0)).collect(),
        link.noise_floor(),
    )
}

fn check_area(area: f64, link: &LinkBudget, spectrum: &OperatorSpectrum) -> Result<()> {
    let min = link.max_aperture();
    if !(area >= min) {
        return Err(Error::validation(
            "area",
            format!("disc area {area:e} is below the largest aperture {min:e}"),
        ));
    }
    let g = &spectrum.geometry;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    if !(close(g.area, area)
        && close(g.wavelength, link.wavelength)
        && close(g.range, link.range)
        && close(g.loss, link.loss))
    {
        return Err(Error::validation(
            "spectrum",
            "spectrum geometry does not match the requested area and link",
        ));
    }
    Ok(())
}

/// Lower bound at disc area `area`: the waterfilled efficiency over effective
/// gains `(A_T A_R / |S|^2) |nu_k|^2`, with the waterfill active count.
pub fn lower_bound_beta(
    area: f64,
    link: &LinkBudget,
    spectrum: &OperatorSpectrum,
) -> Result<(f64, usize)> {
    let (bits, alloc) = lower_bound_allocation(area, link, spectrum)?;
    Ok((bits, alloc.active_k))
}

fn lower_bound_allocation(
    area: f64,
    link: &LinkBudget,
    spectrum: &OperatorSpectrum,
) -> Result<(f64, PowerAllocation)> {
    link.validate()?;
    check_area(area, link, spectrum)?;
    let gains = effective_gains(area, link, spectrum)?;
    let alloc = waterfill(&gains, link.power)?;
    Ok((allocation_efficiency(&gains, &alloc)?, alloc))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamRate {
    pub power: f64,
    /// `log2(1 + h_k P_k / (B N0))`, the rate this stream alone can carry.
    pub rate_cap: f64,
}

/// Powers and rate ceilings of the active streams at area `area`.
pub fn stream_rates(
    area: f64,
    link: &LinkBudget,
    spectrum: &OperatorSpectrum,
) -> Result<Vec<StreamRate>> {
    let (_, alloc) = lower_bound_allocation(area, link, spectrum)?;
    let gains = effective_gains(area, link, spectrum)?;
    Ok(gains
        .gains()
        .iter()
        .zip(&alloc.powers)
        .take(alloc.active_k)
        .map(|(&h, &p)| StreamRate {
            power: p,
            rate_cap: crate::link_model::log2_1p(h * p / link.noise_floor()),
        })
        .collect())
}

/// How the spectrum behind each lower-bound evaluation is truncated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumSettings {
    pub overrides: TruncationOverride,
}

impl SpectrumSettings {
    pub fn truncation(&self, c_param: f64) -> Truncation {
        self.overrides.apply(Truncation::compact_for(c_param))
    }
}

/// Lower bound at one area, computing (or reusing) the spectrum.
pub fn lower_bound_at_area(
    area: f64,
    link: &LinkBudget,
    cache: &SpectrumCache,
    settings: &SpectrumSettings,
) -> Result<(f64, usize)> {
    let geometry = DiscGeometry::for_link(area, link)?;
    let spectrum = cache.spectrum(&geometry, settings.truncation(geometry.c_param), false)?;
    lower_bound_beta(area, link, &spectrum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaOptimum {
    pub best_area: f64,
    pub beta_bits: f64,
    pub active_k: usize,
    /// `M0` at the best area.
    pub space_bandwidth: f64,
}

/// Log-spaced grid from `max(A_T, A_R)` to the area where `M0` reaches
/// `4 sqrt(gamma g / (eps0 - 1))`, clamped to the admissible disc size.
pub fn default_area_grid(link: &LinkBudget, eps0: f64) -> Result<Vec<f64>> {
    let derived = derive_link(link)?;
    let lo = link.max_aperture();
    let target_m0 = AREA_GRID_SPAN * (derived.received_snr / (eps0 - 1.0)).sqrt();
    let cap = MAX_AREA_FRACTION * std::f64::consts::PI * link.range * link.range;
    let hi = (target_m0.sqrt() * link.lambda_d()).max(2.0 * lo).min(cap);
    if hi <= lo {
        return Err(Error::validation(
            "area",
            "largest aperture leaves no admissible disc area to search",
        ));
    }
    Ok(log_grid(lo, hi, AREA_GRID_POINTS))
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else if i == 0 {
                lo
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Maximizes the lower bound over `area_grid`, then refines by golden-section
/// search between the neighbours of the best grid point.
pub fn optimize_disc_area(
    link: &LinkBudget,
    area_grid: &[f64],
    cache: &SpectrumCache,
    settings: &SpectrumSettings,
) -> Result<AreaOptimum> {
    link.validate()?;
    if area_grid.is_empty() {
        return Err(Error::validation("area_grid", "grid is empty"));
    }
    let cap = MAX_AREA_FRACTION * std::f64::consts::PI * link.range * link.range;
    for &a in area_grid {
        if !(a >= link.max_aperture() && a <= cap) {
            return Err(Error::validation(
                "area_grid",
                format!("area {a:e} outside [{:e}, {cap:e}]", link.max_aperture()),
            ));
        }
    }
    let mut grid = area_grid.to_vec();
    grid.sort_by(f64::total_cmp);

    let eval = |a: f64| -> Result<(f64, usize)> { lower_bound_at_area(a, link, cache, settings) };
    let mut best = (grid[0], eval(grid[0])?);
    let mut best_index = 0;
    for (i, &a) in grid.iter().enumerate().skip(1) {
        let v = eval(a)?;
        if v.0 > best.1 .0 {
            best = (a, v);
            best_index = i;
        }
    }

    if grid.len() >= 2 {
        let lo = grid[best_index.saturating_sub(1)].ln();
        let hi = grid[(best_index + 1).min(grid.len() - 1)].ln();
        let (mut a, mut b) = (lo, hi);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let mut f1 = eval(x1.exp())?;
        let mut f2 = eval(x2.exp())?;
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f.0 > best.1 .0 {
                best = (x.exp(), f);
            }
        }
        for _ in 0..GOLDEN_STEPS {
            if f1.0 >= f2.0 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = eval(x1.exp())?;
                if f1.0 > best.1 .0 {
                    best = (x1.exp(), f1);
                }
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = eval(x2.exp())?;
                if f2.0 > best.1 .0 {
                    best = (x2.exp(), f2);
                }
            }
        }
    }
    let (best_area, (beta_bits, active_k)) = best;
    Ok(AreaOptimum {
        best_area,
        beta_bits,
        active_k,
        space_bandwidth: (best_area / link.lambda_d()).powi(2),
    })
}

/// Area selection for [`capacity_bounds`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AreaChoice {
    /// Search [`default_area_grid`].
    Optimize,
    /// Search the given grid.
    Grid(Vec<f64>),
    /// Evaluate the lower bound at one area only.
    Fixed(f64),
}

/// Both bounds for a link. In the weak regime they coincide with the SISO efficiency.
pub fn capacity_bounds(
    link: &LinkBudget,
    area: &AreaChoice,
    cache: &SpectrumCache,
    settings: &SpectrumSettings,
) -> Result<CapacityBounds> {
    let derived = derive_link(link)?;
    let eps0 = solve_eps0();
    let gg = derived.received_snr;
    let upper_bits = upper_bound(gg, eps0);
    if regime(gg, eps0) == Regime::WeakSignal && !matches!(area, AreaChoice::Fixed(_)) {
        return Ok(CapacityBounds {
            received_snr: gg,
            lower_bits: upper_bits,
            upper_bits,
            regime: Regime::WeakSignal,
            active_k: 1,
            best_area: None,
            eps0,
        });
    }
    let (best_area, lower_bits, active_k) = match area {
        AreaChoice::Fixed(a) => {
            let (bits, k) = lower_bound_at_area(*a, link, cache, settings)?;
            (*a, bits, k)
        }
        AreaChoice::Grid(grid) => {
            let o = optimize_disc_area(link, grid, cache, settings)?;
            (o.best_area, o.beta_bits, o.active_k)
        }
        AreaChoice::Optimize => {
            let grid = default_area_grid(link, eps0)?;
            let o = optimize_disc_area(link, &grid, cache, settings)?;
            (o.best_area, o.beta_bits, o.active_k)
        }
    };
    let r = regime(gg, eps0);
    Ok(CapacityBounds {
        received_snr: gg,
        lower_bits,
        upper_bits,
        regime: r,
        active_k,
        best_area: (r == Regime::StrongSignal).then_some(best_area),
        eps0,
    })
}

/// JSON form of [`CapacityBounds`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub schema_version: u32,
    pub gamma_g: f64,
    pub regime: Regime,
    pub lower: f64,
    pub upper: f64,
    /// Closed-form approximation; `None` in the weak regime.
    pub approx: Option<f64>,
    #[serde(rename = "K")]
    pub active_k: usize,
    pub best_area: Option<f64>,
    pub eps0: f64,
}

impl From<&CapacityBounds> for BoundsReport {
    fn from(b: &CapacityBounds) -> Self {
        BoundsReport {
            schema_version: crate::SCHEMA_VERSION,
            gamma_g: b.received_snr,
            regime: b.regime,
            lower: b.lower_bits,
            upper: b.upper_bits,
            approx: match b.regime {
                Regime::StrongSignal => corollary_approx(b.received_snr, b.eps0).ok(),
                Regime::WeakSignal => None,
            },
            active_k: b.active_k,
            best_area: b.best_area,
            eps0: b.eps0,
        }
    }
}
