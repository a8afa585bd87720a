//! Kernel density estimation over spanning-forest edge lengths, extremum
//! detection on the sampled curve, and the extraction thresholds derived from
//! consecutive extrema.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{DecwaError, Result};
use crate::format::sig6;

pub const DEFAULT_GRID_SIZE: usize = 1024;
pub const MIN_GRID_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum KernelKind {
    #[default]
    Gaussian,
    Uniform,
    Triangular,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [
        KernelKind::Gaussian,
        KernelKind::Uniform,
        KernelKind::Triangular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Gaussian => "gaussian",
            KernelKind::Uniform => "uniform",
            KernelKind::Triangular => "triangular",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            KernelKind::Gaussian => (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            KernelKind::Uniform => {
                if x.abs() <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            KernelKind::Triangular => {
                let a = x.abs();
                if a <= 1.0 {
                    1.0 - a
                } else {
                    0.0
                }
            }
        }
    }

    /// Grid padding around the sample range, in bandwidth units.
    fn margin(self) -> f64 {
        match self {
            KernelKind::Gaussian => 4.0,
            KernelKind::Uniform | KernelKind::Triangular => 1.0,
        }
    }

    /// Half-width (in bandwidth units) beyond which the kernel is exactly 0.0
    /// in double precision.
    fn support(self) -> f64 {
        match self {
            // exp(-x^2/2) underflows to zero well before |x| = 40.
            KernelKind::Gaussian => 40.0,
            KernelKind::Uniform | KernelKind::Triangular => 1.0,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = DecwaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(KernelKind::Gaussian),
            "uniform" => Ok(KernelKind::Uniform),
            "triangular" => Ok(KernelKind::Triangular),
            other => Err(DecwaError::config(format!("unknown kernel '{other}'"))),
        }
    }
}

/// A kernel density estimate sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub sample_count: usize,
}

impl DensityCurve {
    /// Trapezoidal integral of the sampled curve.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }

    /// Writes `position,value` rows, one per grid point.
    pub fn write_two_column<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (a, f) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{},{}", sig6(*a), sig6(*f))?;
        }
        Ok(())
    }
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(DecwaError::config(format!(
            "bandwidth must be positive and finite, got {h}"
        )));
    }
    Ok(())
}

/// KDE value at `a` for samples already sorted ascending.
///
/// Samples outside the kernel's numerical support contribute exactly zero, so
/// they are skipped without changing the summation result.
fn kde_sorted(sorted: &[f64], h: f64, kernel: KernelKind, a: f64) -> f64 {
    // Slightly wider than the support so rounding never drops a boundary sample.
    let reach = kernel.support() * h * (1.0 + 1e-6);
    let lo = sorted.partition_point(|&d| d < a - reach);
    let hi = sorted.partition_point(|&d| d <= a + reach);
    let sum: f64 = sorted[lo..hi]
        .iter()
        .map(|&d| kernel.eval((a - d) / h))
        .sum();
    sum / (sorted.len() as f64 * h)
}

/// Evaluates the kernel density estimate of `distances` at one position.
pub fn kde_at(distances: &[f64], h: f64, kernel: KernelKind, a: f64) -> Result<f64> {
    check_bandwidth(h)?;
    if distances.is_empty() {
        return Err(DecwaError::pipeline(
            "no distances to estimate a density from",
        ));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(kde_sorted(&sorted, h, kernel, a))
}

/// Samples the density of `distances` on `grid_size` uniformly spaced points
/// covering the sample range padded by the kernel margin.
pub fn estimate_density(
    distances: &[f64],
    h: f64,
    kernel: KernelKind,
    grid_size: usize,
) -> Result<DensityCurve> {
    check_bandwidth(h)?;
    if grid_size < MIN_GRID_SIZE {
        return Err(DecwaError::config(format!(
            "grid size must be at least {MIN_GRID_SIZE}, got {grid_size}"
        )));
    }
    if distances.is_empty() {
        return Err(DecwaError::pipeline(
            "no distances to estimate a density from (edgeless forest)",
        ));
    }
    if let Some(d) = distances.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
        return Err(DecwaError::data(format!("invalid distance {d}")));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let margin = kernel.margin() * h;
    let lo = sorted[0] - margin;
    let hi = sorted[sorted.len() - 1] + margin;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size)
        .map(|j| {
            if j + 1 == grid_size {
                hi
            } else {
                lo + j as f64 * step
            }
        })
        .collect();
    let values = grid
        .iter()
        .map(|&a| kde_sorted(&sorted, h, kernel, a))
        .collect();
    Ok(DensityCurve {
        grid,
        values,
        bandwidth: h,
        sample_count: sorted.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub position: f64,
    pub kind: ExtremumKind,
}

/// Alternating extrema in ascending position, starting and ending with a
/// maximum (or empty).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtremaSequence(pub Vec<Extremum>);

impl ExtremaSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn maxima(&self) -> usize {
        self.0
            .iter()
            .filter(|e| e.kind == ExtremumKind::Maximum)
            .count()
    }
}

/// Finds the local extrema of a sampled curve.
///
/// Runs of equal values are collapsed and reported at the run's center grid
/// point. Boundary runs are reported only as maxima; the sequence is trimmed
/// so that it starts and ends with a maximum.
pub fn locate_extrema(curve: &DensityCurve) -> ExtremaSequence {
    let vals = &curve.values;
    // (start, end inclusive, value)
    let mut runs: Vec<(usize, usize, f64)> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.2 == v => run.1 = i,
            _ => runs.push((i, i, v)),
        }
    }
    let mut out = Vec::new();
    if runs.len() < 2 {
        return ExtremaSequence(out);
    }
    for (r, &(start, end, v)) in runs.iter().enumerate() {
        let prev = r.checked_sub(1).map(|p| runs[p].2);
        let next = runs.get(r + 1).map(|n| n.2);
        let kind = match (prev, next) {
            (Some(p), Some(n)) if p < v && n < v => Some(ExtremumKind::Maximum),
            (Some(p), Some(n)) if p > v && n > v => Some(ExtremumKind::Minimum),
            (None, Some(n)) if n < v => Some(ExtremumKind::Maximum),
            (Some(p), None) if p < v => Some(ExtremumKind::Maximum),
            _ => None,
        };
        if let Some(kind) = kind {
            out.push(Extremum {
                position: curve.grid[(start + end) / 2],
                kind,
            });
        }
    }
    while out.first().is_some_and(|e| e.kind == ExtremumKind::Minimum) {
        out.remove(0);
    }
    while out.last().is_some_and(|e| e.kind == ExtremumKind::Minimum) {
        out.pop();
    }
    ExtremaSequence(out)
}

/// Strictly descending extraction thresholds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThresholdList(Vec<f64>);

impl ThresholdList {
    /// Accepts any finite list and sorts it descending, dropping duplicates.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DecwaError::config("thresholds must be finite"));
        }
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        values.dedup();
        Ok(ThresholdList(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Midpoints between consecutive extrema, largest first.
pub fn derive_thresholds(extrema: &ExtremaSequence) -> ThresholdList {
    let mut mids: Vec<f64> = extrema
        .0
        .windows(2)
        .map(|w| 0.5 * (w[0].position + w[1].position))
        .collect();
    mids.reverse();
    ThresholdList(mids)
}
