//! Seeded random search over the clustering hyperparameters, scored by the
//! adjusted Rand index against known labels.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::density::KernelKind;
use crate::error::{DecwaError, Result};
use crate::evaluation::{adjusted_rand_index, OutlierMode};
use crate::format::round_sig6;
use crate::graph::NeighborTable;
use crate::metrics::{check_dataset, Point};
use crate::pipeline::{fit_with_table, DecwaParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRange {
    pub lo: f64,
    pub hi: f64,
    pub scale: Scale,
}

impl RealRange {
    pub fn linear(lo: f64, hi: f64) -> Self {
        RealRange {
            lo,
            hi,
            scale: Scale::Linear,
        }
    }

    pub fn log(lo: f64, hi: f64) -> Self {
        RealRange {
            lo,
            hi,
            scale: Scale::Log,
        }
    }

    pub fn fixed(v: f64) -> Self {
        RealRange::linear(v, v)
    }

    fn validate(&self, name: &str, allow_zero: bool) -> Result<()> {
        let lower_ok = if allow_zero {
            self.lo >= 0.0
        } else {
            self.lo > 0.0
        };
        if !(self.lo.is_finite() && self.hi.is_finite() && lower_ok && self.lo <= self.hi) {
            return Err(DecwaError::config(format!(
                "invalid {name} range {}:{}",
                self.lo, self.hi
            )));
        }
        if self.scale == Scale::Log && self.lo <= 0.0 {
            return Err(DecwaError::config(format!(
                "log-scaled {name} range must be positive"
            )));
        }
        Ok(())
    }

    /// Draws one value, rounded to six significant digits so that printed
    /// parameters reproduce the run exactly.
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        let raw = match self.scale {
            Scale::Linear => self.lo + u * (self.hi - self.lo),
            Scale::Log => (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp(),
        };
        round_sig6(raw).clamp(self.lo, self.hi)
    }
}

impl fmt::Display for RealRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)?;
        if self.scale == Scale::Log {
            f.write_str(":log")?;
        }
        Ok(())
    }
}

impl FromStr for RealRange {
    type Err = DecwaError;

    /// Parses `A:B` or `A:B:log` (also `A:B:linear`).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || DecwaError::config(format!("malformed range '{s}', expected A:B[:log]"));
        let (lo, hi, scale) = match parts.as_slice() {
            [a, b] => (a, b, Scale::Linear),
            [a, b, "log"] => (a, b, Scale::Log),
            [a, b, "linear"] => (a, b, Scale::Linear),
            _ => return Err(bad()),
        };
        Ok(RealRange {
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
            scale,
        })
    }
}

/// Inclusive integer interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub lo: usize,
    pub hi: usize,
}

impl FromStr for IntRange {
    type Err = DecwaError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || DecwaError::config(format!("malformed integer range '{s}', expected A:B"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        Ok(IntRange {
            lo: a.trim().parse().map_err(|_| bad())?,
            hi: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Where to look. Fields of `base` that are not searched (metric, grid size,
/// minimum cluster size, agglomeration mode, seed) are copied into every trial.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub k: IntRange,
    pub bandwidth: RealRange,
    pub lambda: RealRange,
    pub alpha: RealRange,
    pub kernels: Vec<KernelKind>,
    pub base: DecwaParams,
    /// Convention used when scoring trials.
    pub outlier_mode: OutlierMode,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            k: IntRange { lo: 2, hi: 30 },
            bandwidth: RealRange::log(1e-3, 10.0),
            lambda: RealRange::log(1e-3, 100.0),
            alpha: RealRange::log(1e-4, 10.0),
            kernels: vec![KernelKind::Gaussian],
            base: DecwaParams::default(),
            outlier_mode: OutlierMode::OneCluster,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        if self.k.lo == 0 || self.k.lo > self.k.hi {
            return Err(DecwaError::config(format!("invalid k range {}", self.k)));
        }
        self.bandwidth.validate("bandwidth", false)?;
        self.lambda.validate("lambda", false)?;
        self.alpha.validate("alpha", true)?;
        if self.kernels.is_empty() {
            return Err(DecwaError::config("at least one kernel must be searchable"));
        }
        Ok(())
    }

    /// The deterministic parameter stream for `iterations` trials.
    pub fn sample(&self, iterations: usize, seed: u64) -> Result<Vec<DecwaParams>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..iterations)
            .map(|_| {
                let k = rng.random_range(self.k.lo..=self.k.hi);
                let bandwidth = self.bandwidth.sample(&mut rng);
                let lambda = self.lambda.sample(&mut rng);
                let alpha = self.alpha.sample(&mut rng);
                let kernel = *self.kernels.choose(&mut rng).expect("non-empty kernels");
                DecwaParams {
                    k,
                    bandwidth,
                    lambda,
                    alpha,
                    kernel,
                    ..self.base.clone()
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub params: DecwaParams,
    /// Negative infinity when the trial failed.
    pub ari: f64,
    /// NaN when the trial failed.
    pub outlier_ratio: f64,
    pub cluster_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: TrialRecord,
    pub history: Vec<TrialRecord>,
}

/// Random search maximizing the adjusted Rand index.
///
/// Trials run in parallel; the result depends only on the inputs and `seed`.
/// Ties on ARI go to the earliest trial.
pub fn random_search(
    points: &[Point],
    truth: &[i64],
    space: &SearchSpace,
    iterations: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    if iterations == 0 {
        return Err(DecwaError::config("iterations must be at least 1"));
    }
    check_dataset(points)?;
    if truth.len() != points.len() {
        return Err(DecwaError::config(format!(
            "ground truth has {} labels for {} points",
            truth.len(),
            points.len()
        )));
    }
    if points.len() < 2 {
        return Err(DecwaError::pipeline("at least two points are required"));
    }
    let trials = space.sample(iterations, seed)?;
    let max_k = space.k.hi.min(points.len() - 1);
    let table = NeighborTable::build(points, max_k, space.base.metric)?;

    let history: Vec<TrialRecord> = trials
        .into_par_iter()
        .enumerate()
        .map(|(trial_index, params)| {
            let scored = fit_with_table(&table, &params).and_then(|trace| {
                let ari = adjusted_rand_index(&trace.result.labels, truth, space.outlier_mode)?;
                Ok((ari, trace.result.outlier_ratio, trace.result.cluster_count))
            });
            let (ari, outlier_ratio, cluster_count) =
                scored.unwrap_or((f64::NEG_INFINITY, f64::NAN, 0));
            TrialRecord {
                trial_index,
                params,
                ari,
                outlier_ratio,
                cluster_count,
            }
        })
        .collect();

    let best = history
        .iter()
        .fold(None::<&TrialRecord>, |best, t| match best {
            Some(b) if b.ari >= t.ari => Some(b),
            _ => Some(t),
        })
        .expect("at least one trial")
        .clone();
    Ok(SearchOutcome { best, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!(
            "1:2".parse::<RealRange>().unwrap(),
            RealRange::linear(1.0, 2.0)
        );
        assert_eq!(
            "0.001:10:log".parse::<RealRange>().unwrap(),
            RealRange::log(0.001, 10.0)
        );
        assert!("1".parse::<RealRange>().is_err());
        assert!("1:2:cubic".parse::<RealRange>().is_err());
        assert!("a:2".parse::<RealRange>().is_err());
        assert_eq!(
            "2:30".parse::<IntRange>().unwrap(),
            IntRange { lo: 2, hi: 30 }
        );
        assert!("2-30".parse::<IntRange>().is_err());
    }

    #[test]
    fn invalid_spaces() {
        let s = SearchSpace {
            k: IntRange { lo: 5, hi: 2 },
            ..Default::default()
        };
        assert!(s.validate().is_err());
        let s = SearchSpace {
            bandwidth: RealRange::log(0.0, 1.0),
            ..Default::default()
        };
        assert!(s.validate().is_err());
        let s = SearchSpace {
            lambda: RealRange::linear(2.0, 1.0),
            ..Default::default()
        };
        assert!(s.validate().is_err());
        let s = SearchSpace {
            alpha: RealRange::linear(0.0, 1.0),
            ..Default::default()
        };
        assert!(s.validate().is_ok());
        let s = SearchSpace {
            kernels: vec![],
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn samples_stay_in_range_and_repeat() {
        let s = SearchSpace {
            kernels: KernelKind::ALL.to_vec(),
            ..Default::default()
        };
        let a = s.sample(300, 7).unwrap();
        assert_eq!(a, s.sample(300, 7).unwrap());
        assert_ne!(a, s.sample(300, 8).unwrap());
        for p in &a {
            assert!((2..=30).contains(&p.k));
            assert!((1e-3..=10.0).contains(&p.bandwidth));
            assert!((1e-3..=100.0).contains(&p.lambda));
            assert!((1e-4..=10.0).contains(&p.alpha));
            assert_eq!(round_sig6(p.bandwidth), p.bandwidth);
        }
        assert!(KernelKind::ALL
            .iter()
            .all(|k| a.iter().any(|p| p.kernel == *k)));
        // Log sampling puts roughly a quarter of draws below 0.01 for [1e-3, 10].
        let small = a.iter().filter(|p| p.bandwidth < 0.01).count();
        assert!((40..=110).contains(&small), "{small}");
    }

    #[test]
    fn zero_iterations_rejected() {
        let pts: Vec<Point> = (0..4)
            .map(|i| Point::new(vec![i as f64]).unwrap())
            .collect();
        assert!(random_search(&pts, &[0, 0, 1, 1], &SearchSpace::default(), 0, 1).is_err());
        assert!(random_search(&pts, &[0, 0, 1], &SearchSpace::default(), 1, 1).is_err());
    }
}
