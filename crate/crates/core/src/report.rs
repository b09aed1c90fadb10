//! Link reports and SNR sweep tables.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{capacity_bounds, AreaChoice, BoundsReport, Regime, SpectrumSettings};
use crate::error::{Error, Result};
use crate::link_model::{derive_link, siso_efficiency, LinkBudget};
use crate::spectrum::SpectrumCache;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub schema_version: u32,
    pub g: f64,
    pub gamma: f64,
    pub gamma_g: f64,
    pub siso_bits: f64,
    pub capacity_bps: f64,
    pub bounds: BoundsReport,
}

pub fn link_report(
    link: &LinkBudget,
    area: &AreaChoice,
    cache: &SpectrumCache,
    settings: &SpectrumSettings,
) -> Result<LinkReport> {
    let d = derive_link(link)?;
    let siso = siso_efficiency(d.received_snr);
    let bounds = capacity_bounds(link, area, cache, settings)?;
    Ok(LinkReport {
        schema_version: crate::SCHEMA_VERSION,
        g: d.gain,
        gamma: d.snr,
        gamma_g: d.received_snr,
        siso_bits: siso,
        capacity_bps: link.bandwidth * siso,
        bounds: BoundsReport::from(&bounds),
    })
}

/// `min:max:points[:log|lin]`, log spacing by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepGrid {
    pub fn new(min: f64, max: f64, points: usize, log: bool) -> Result<Self> {
        if points < 2 {
            return Err(Error::validation("grid", format!("need at least 2 points, got {points}")));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::validation("grid", format!("need min < max, got {min}..{max}")));
        }
        if !(min > 0.0) {
            return Err(Error::validation("grid", "received SNR values must be > 0"));
        }
        Ok(SweepGrid { min, max, points, log })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    self.min
                } else if i + 1 == self.points {
                    self.max
                } else if self.log {
                    (self.min.ln() + (self.max.ln() - self.min.ln()) * i as f64 / last).exp()
                } else {
                    self.min + (self.max - self.min) * i as f64 / last
                }
            })
            .collect()
    }
}

impl FromStr for SweepGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(Error::validation("grid", format!("expected min:max:points[:log|lin], got {s:?}")));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation("grid", format!("not a number: {t:?}")))
        };
        let points = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::validation("grid", format!("not a point count: {:?}", parts[2])))?;
        let log = match parts.get(3).map(|t| t.trim()) {
            None | Some("log") => true,
            Some("lin") | Some("linear") => false,
            Some(other) => {
                return Err(Error::validation("grid", format!("unknown spacing {other:?}")));
            }
        };
        SweepGrid::new(num(parts[0])?, num(parts[1])?, points, log)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma_g: f64,
    pub siso: f64,
    pub lower: f64,
    pub upper: f64,
    /// Closed-form approximation; `None` in the weak regime.
    pub approx: Option<f64>,
    #[serde(rename = "K")]
    pub active_k: usize,
    /// Optimal `M0` over its predicted value `sqrt(gamma g / (eps0 - 1))`; `None` in the weak regime.
    pub best_area_ratio: Option<f64>,
}

/// One row per grid value; the link's power is rescaled to hit each `gamma g`.
pub fn run_sweep(
    link: &LinkBudget,
    grid: &SweepGrid,
    cache: &SpectrumCache,
    settings: &SpectrumSettings,
) -> Result<Vec<SweepRow>> {
    link.validate()?;
    grid.values()
        .into_iter()
        .map(|gg| {
            let l = link.with_received_snr(gg);
            let b = capacity_bounds(&l, &AreaChoice::Optimize, cache, settings)?;
            let report = BoundsReport::from(&b);
            let best_area_ratio = match (b.regime, b.best_area) {
                (Regime::StrongSignal, Some(a)) => {
                    Some((a / l.lambda_d()).powi(2) / (gg / (b.eps0 - 1.0)).sqrt())
                }
                _ => None,
            };
            Ok(SweepRow {
                gamma_g: gg,
                siso: siso_efficiency(gg),
                lower: b.lower_bits,
                upper: b.upper_bits,
                approx: report.approx,
                active_k: b.active_k,
                best_area_ratio,
            })
        })
        .collect()
}

pub const SWEEP_COLUMNS: [&str; 7] = [
    "gamma_g",
    "siso",
    "lower",
    "upper",
    "approx",
    "K",
    "best_area_ratio",
];

/// CSV with a header line; empty fields for absent values.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.gamma_g,
            r.siso,
            r.lower,
            r.upper,
            opt(r.approx),
            r.active_k,
            opt(r.best_area_ratio)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub rows: Vec<SweepRow>,
}

pub fn sweep_json(rows: &[SweepRow]) -> String {
    let report = SweepReport {
        schema_version: crate::SCHEMA_VERSION,
        rows: rows.to_vec(),
    };
    serde_json::to_string_pretty(&report).expect("sweep rows serialize")
}
