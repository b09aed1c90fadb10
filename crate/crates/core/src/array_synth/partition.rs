//! Equal-area polar partition of a disc into ring sectors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Annular sector `inner <= r < outer`, `theta_start <= theta < theta_start + span`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub inner: f64,
    pub outer: f64,
    pub theta_start: f64,
    pub span: f64,
}

impl Cell {
    pub fn area(&self) -> f64 {
        0.5 * self.span * (self.outer * self.outer - self.inner * self.inner)
    }

    fn is_full_turn(&self) -> bool {
        self.span >= 2.0 * PI * (1.0 - 1e-12)
    }

    /// Area centroid.
    pub fn centroid(&self) -> [f64; 2] {
        if self.is_full_turn() {
            return [0.0, 0.0];
        }
        let half = 0.5 * self.span;
        let (r1, r2) = (self.inner, self.outer);
        let r = 2.0 / 3.0 * (r2.powi(3) - r1.powi(3)) / (r2 * r2 - r1 * r1) * half.sin() / half;
        let mid = self.theta_start + half;
        [r * mid.cos(), r * mid.sin()]
    }

    /// Radius of the largest disc about the centroid that stays inside the cell.
    pub fn clearance(&self) -> f64 {
        if self.is_full_turn() {
            // Only the central full disc has its centroid inside.
            return if self.inner == 0.0 { self.outer } else { 0.0 };
        }
        let c = self.centroid();
        let r = c[0].hypot(c[1]);
        let half = 0.5 * self.span;
        let side = if half < 0.5 * PI { r * half.sin() } else { r };
        (r - self.inner).min(self.outer - r).min(side)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let r = p[0].hypot(p[1]);
        if r < self.inner || r > self.outer {
            return false;
        }
        if self.is_full_turn() {
            return true;
        }
        let t = (p[1].atan2(p[0]) - self.theta_start).rem_euclid(2.0 * PI);
        t <= self.span
    }
}

fn sector_counts(n: usize, rings: usize) -> Vec<usize> {
    let cumulative = |k: usize| ((n * k * k) as f64 / (rings * rings) as f64).round() as usize;
    (1..=rings).map(|k| cumulative(k) - cumulative(k - 1)).collect()
}

/// `n` equal-area cells: concentric rings of near-square sectors.
///
/// Ring `k` holds `round(n k^2 / rings^2)` cells in total up to and including
/// itself, so every cell has area `pi R^2 / n` exactly and cell width tracks
/// ring width. A ring with a single sector would be a full annulus whose
/// centroid lies outside it, so fewer rings are used when that happens.
pub fn equal_area_partition(radius: f64, n: usize) -> Result<Vec<Cell>> {
    if n == 0 {
        return Err(Error::validation("cell_count", "must be positive"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::validation("radius", "must be finite and > 0"));
    }
    let mut rings = ((n as f64 / PI).sqrt().round() as usize).max(1);
    let counts = loop {
        let counts = sector_counts(n, rings);
        let ok = counts.iter().all(|&s| s >= 1) && counts.iter().skip(1).all(|&s| s >= 2);
        if ok || rings == 1 {
            break counts;
        }
        rings -= 1;
    };
    let mut cells = Vec::with_capacity(n);
    let mut done = 0usize;
    for &s in &counts {
        let inner = radius * (done as f64 / n as f64).sqrt();
        done += s;
        let outer = radius * (done as f64 / n as f64).sqrt();
        let span = 2.0 * PI / s as f64;
        for j in 0..s {
            cells.push(Cell {
                inner,
                outer,
                theta_start: j as f64 * span,
                span,
            });
        }
    }
    Ok(cells)
}
