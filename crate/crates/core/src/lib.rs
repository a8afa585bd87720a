//! Density-based clustering over the edge-length distribution of a minimum
//! spanning forest.
//!
//! A k-nearest-neighbor graph is reduced to its minimum spanning forest; a
//! kernel density estimate of the forest's edge lengths yields extraction
//! thresholds that split the forest into sub-clusters; sub-clusters joined by
//! a short forest edge whose edge-length distributions are close in
//! Wasserstein distance are merged back together.
//!
//! ```
//! use decwa::{fit, DecwaParams, Point};
//!
//! let points: Vec<Point> = [0.0, 0.1, 0.2, 0.3, 9.0, 9.1, 9.2, 9.3]
//!     .iter()
//!     .map(|&x| Point::new(vec![x]).unwrap())
//!     .collect();
//! let params = DecwaParams { k: 2, bandwidth: 0.05, ..Default::default() };
//! let result = fit(&points, &params).unwrap();
//! assert_eq!(result.cluster_count, 2);
//! ```

pub mod cli;
pub mod dataset;
pub mod density;
pub mod error;
pub mod evaluation;
pub mod format;
pub mod graph;
pub mod metrics;
pub mod partition;
pub mod pipeline;
pub mod tuning;

pub use density::{DensityCurve, KernelKind};
pub use error::{DecwaError, Result};
pub use evaluation::{adjusted_rand_index, outlier_ratio, OutlierMode, OUTLIER};
pub use metrics::{distance, MetricKind, Point};
pub use partition::{wasserstein1, AgglomerationMode};
pub use pipeline::{fit, ClusteringResult, DecwaParams};
pub use tuning::{random_search, SearchSpace, TrialRecord};
