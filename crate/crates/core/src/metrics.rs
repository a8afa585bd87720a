//! Dissimilarity functions used to weight neighbor-graph edges.
//!
//! None of the pipeline stages assume the triangle inequality: cosine and
//! Bray-Curtis dissimilarities violate it, and only symmetry and reflexivity
//! are relied upon downstream.

use std::fmt;
use std::str::FromStr;

use crate::error::{DecwaError, Result};

/// One data record.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    features: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty or non-finite feature vectors.
    pub fn new(features: Vec<f64>) -> Result<Self> {
        if features.is_empty() {
            return Err(DecwaError::data("point must have at least one feature"));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(DecwaError::data(format!(
                "feature {i} is not finite ({})",
                features[i]
            )));
        }
        Ok(Point { features })
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn dimension(&self) -> usize {
        self.features.len()
    }
}

/// Checks that a dataset is non-empty and rectangular. Returns the dimension.
pub fn check_dataset(points: &[Point]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| DecwaError::data("dataset is empty"))?;
    let dim = first.dimension();
    if let Some((i, p)) = points
        .iter()
        .enumerate()
        .find(|(_, p)| p.dimension() != dim)
    {
        return Err(DecwaError::config(format!(
            "point {i} has dimension {} but point 0 has dimension {dim}",
            p.dimension()
        )));
    }
    Ok(dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MetricKind {
    #[default]
    Euclidean,
    Manhattan,
    Canberra,
    BrayCurtis,
    Cosine,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::Euclidean,
        MetricKind::Manhattan,
        MetricKind::Canberra,
        MetricKind::BrayCurtis,
        MetricKind::Cosine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Manhattan => "manhattan",
            MetricKind::Canberra => "canberra",
            MetricKind::BrayCurtis => "bray-curtis",
            MetricKind::Cosine => "cosine",
        }
    }

    /// Evaluates the dissimilarity on raw slices of equal length.
    ///
    /// Callers are responsible for the length and finiteness checks done by
    /// [`distance`]; the graph builder validates the dataset once and then
    /// calls this directly.
    pub fn eval(self, p: &[f64], q: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), q.len());
        match self {
            MetricKind::Euclidean => p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            MetricKind::Manhattan => p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum(),
            MetricKind::Canberra => p
                .iter()
                .zip(q)
                .map(|(a, b)| {
                    let denom = a.abs() + b.abs();
                    if denom == 0.0 {
                        0.0
                    } else {
                        (a - b).abs() / denom
                    }
                })
                .sum(),
            MetricKind::BrayCurtis => {
                let mut num = 0.0;
                let mut denom = 0.0;
                for (a, b) in p.iter().zip(q) {
                    num += (a - b).abs();
                    denom += (a + b).abs();
                }
                if num == 0.0 {
                    0.0
                } else if denom == 0.0 {
                    // Only reachable with mixed-sign records where p = -q.
                    1.0
                } else {
                    num / denom
                }
            }
            MetricKind::Cosine => {
                if p == q {
                    return 0.0;
                }
                let mut dot = 0.0;
                let mut pp = 0.0;
                let mut qq = 0.0;
                for (a, b) in p.iter().zip(q) {
                    dot += a * b;
                    pp += a * a;
                    qq += b * b;
                }
                if pp == 0.0 && qq == 0.0 {
                    0.0
                } else if pp == 0.0 || qq == 0.0 {
                    1.0
                } else {
                    let sim = dot / (pp.sqrt() * qq.sqrt());
                    (1.0 - sim).clamp(0.0, 2.0)
                }
            }
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = DecwaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(MetricKind::Euclidean),
            "manhattan" => Ok(MetricKind::Manhattan),
            "canberra" => Ok(MetricKind::Canberra),
            "bray-curtis" | "bray_curtis" | "braycurtis" => Ok(MetricKind::BrayCurtis),
            "cosine" => Ok(MetricKind::Cosine),
            other => Err(DecwaError::config(format!("unknown metric '{other}'"))),
        }
    }
}

/// Checked dissimilarity between two points.
pub fn distance(metric: MetricKind, p: &Point, q: &Point) -> Result<f64> {
    if p.dimension() != q.dimension() {
        return Err(DecwaError::config(format!(
            "dimension mismatch: {} vs {}",
            p.dimension(),
            q.dimension()
        )));
    }
    Ok(metric.eval(p.features(), q.features()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn spot_values() {
        let d = distance(MetricKind::Euclidean, &pt(&[0.0, 0.0]), &pt(&[3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);
        let d = distance(
            MetricKind::Canberra,
            &pt(&[1.0, 2.0, 3.0]),
            &pt(&[1.0, 2.0, 3.0]),
        )
        .unwrap();
        assert_eq!(d, 0.0);
        let d = distance(MetricKind::Cosine, &pt(&[1.0, 0.0]), &pt(&[0.0, 1.0])).unwrap();
        assert_eq!(d, 1.0);
        let d = distance(MetricKind::BrayCurtis, &pt(&[1.0, 1.0]), &pt(&[3.0, 1.0])).unwrap();
        assert!((d - 2.0 / 6.0).abs() < 1e-15);
        let d = distance(MetricKind::Manhattan, &pt(&[1.0, -1.0]), &pt(&[-2.0, 3.0])).unwrap();
        assert_eq!(d, 7.0);
    }

    #[test]
    fn zero_vector_conventions() {
        let z = pt(&[0.0, 0.0]);
        let x = pt(&[1.0, 2.0]);
        assert_eq!(MetricKind::Canberra.eval(z.features(), z.features()), 0.0);
        assert_eq!(MetricKind::BrayCurtis.eval(z.features(), z.features()), 0.0);
        assert_eq!(MetricKind::Cosine.eval(z.features(), z.features()), 0.0);
        assert_eq!(MetricKind::Cosine.eval(z.features(), x.features()), 1.0);
        assert_eq!(MetricKind::Cosine.eval(x.features(), z.features()), 1.0);
        // Canberra: the 0/0 coordinate contributes nothing.
        assert_eq!(MetricKind::Canberra.eval(&[0.0, 1.0], &[0.0, 3.0]), 0.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Point::new(vec![]), Err(DecwaError::Data(_))));
        assert!(matches!(
            Point::new(vec![1.0, f64::NAN]),
            Err(DecwaError::Data(_))
        ));
        assert!(matches!(
            Point::new(vec![f64::INFINITY]),
            Err(DecwaError::Data(_))
        ));
        let err = distance(MetricKind::Euclidean, &pt(&[1.0]), &pt(&[1.0, 2.0]));
        assert!(matches!(err, Err(DecwaError::Config(_))));
        assert!("minkowski".parse::<MetricKind>().is_err());
        for m in MetricKind::ALL {
            assert_eq!(m.name().parse::<MetricKind>().unwrap(), m);
        }
    }

    #[test]
    fn check_dataset_shapes() {
        assert!(check_dataset(&[]).is_err());
        assert_eq!(
            check_dataset(&[pt(&[1.0, 2.0]), pt(&[3.0, 4.0])]).unwrap(),
            2
        );
        assert!(check_dataset(&[pt(&[1.0, 2.0]), pt(&[3.0])]).is_err());
    }

    fn vec_pair(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-100.0f64..100.0, dim),
            prop::collection::vec(-100.0f64..100.0, dim),
        )
    }

    fn pair_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..8).prop_flat_map(vec_pair)
    }

    fn triple_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..8).prop_flat_map(|d| {
            (
                prop::collection::vec(-100.0f64..100.0, d),
                prop::collection::vec(-100.0f64..100.0, d),
                prop::collection::vec(-100.0f64..100.0, d),
            )
        })
    }

    proptest! {
        #[test]
        fn axioms_hold_for_every_metric((p, q) in pair_strategy()) {
            for m in MetricKind::ALL {
                let pq = m.eval(&p, &q);
                let qp = m.eval(&q, &p);
                prop_assert!(pq >= 0.0 && pq.is_finite(), "{m}: {pq}");
                prop_assert_eq!(pq, qp);
                prop_assert_eq!(m.eval(&p, &p), 0.0);
                prop_assert_eq!(m.eval(&q, &q), 0.0);
            }
        }

        #[test]
        fn axioms_hold_on_non_negative_records(
            (p, q) in (1usize..8).prop_flat_map(|d| (
                prop::collection::vec(0.0f64..50.0, d),
                prop::collection::vec(0.0f64..50.0, d),
            ))
        ) {
            for m in [MetricKind::Canberra, MetricKind::BrayCurtis, MetricKind::Cosine] {
                let pq = m.eval(&p, &q);
                prop_assert!(pq >= 0.0 && pq.is_finite());
                prop_assert_eq!(pq, m.eval(&q, &p));
            }
            // Bray-Curtis stays within [0, 1] on non-negative data.
            prop_assert!(MetricKind::BrayCurtis.eval(&p, &q) <= 1.0 + 1e-12);
        }

        #[test]
        fn triangle_inequality_for_true_metrics((a, b, c) in triple_strategy()) {
            for m in [MetricKind::Euclidean, MetricKind::Manhattan] {
                let ab = m.eval(&a, &b);
                let bc = m.eval(&b, &c);
                let ac = m.eval(&a, &c);
                prop_assert!(ac <= ab + bc + 1e-9 * (1.0 + ab + bc));
            }
        }
    }
}
