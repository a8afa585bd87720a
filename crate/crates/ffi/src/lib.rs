//! C ABI for the decwa clustering library.
//!
//! Datasets and results are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`DecwaStatus`]; on failure a description is available from
//! [`decwa_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use decwa::pipeline::{fit_traced, FitTrace};
use decwa::{
    adjusted_rand_index, wasserstein1, AgglomerationMode, DecwaError, DecwaParams, KernelKind,
    MetricKind, OutlierMode, Point,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecwaStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Data = 3,
    Pipeline = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecwaMetric {
    Euclidean = 0,
    Manhattan = 1,
    Canberra = 2,
    BrayCurtis = 3,
    Cosine = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecwaKernel {
    Gaussian = 0,
    Uniform = 1,
    Triangular = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecwaAgglomeration {
    SinglePass = 0,
    Fixpoint = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecwaOutlierMode {
    OneCluster = 0,
    Singletons = 1,
}

/// Plain-data mirror of the clustering hyperparameters. Enumerated fields hold
/// `DecwaKernel`, `DecwaMetric` and `DecwaAgglomeration` values; anything else
/// is rejected with `DECWA_STATUS_CONFIG`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DecwaParamsC {
    pub k: usize,
    pub bandwidth: f64,
    pub kernel: i32,
    pub lambda: f64,
    pub alpha: f64,
    pub metric: i32,
    pub grid_size: usize,
    pub min_cluster_size: usize,
    pub agglomeration: i32,
    pub seed: u64,
}

/// Opaque row-major dataset.
pub struct DecwaDataset {
    points: Vec<Point>,
}

/// Opaque clustering result.
pub struct DecwaResult {
    trace: FitTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(err: DecwaError) -> DecwaStatus {
    let status = match err {
        DecwaError::Config(_) => DecwaStatus::Config,
        DecwaError::Data(_) => DecwaStatus::Data,
        DecwaError::Pipeline(_) => DecwaStatus::Pipeline,
    };
    set_error(err.to_string());
    status
}

fn null(what: &str) -> DecwaStatus {
    set_error(format!("{what} is null"));
    DecwaStatus::NullPointer
}

fn guarded(f: impl FnOnce() -> DecwaStatus) -> DecwaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            DecwaStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null only when `len` is 0, otherwise valid for `len` reads.
unsafe fn slice_or_empty<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(ptr, len))
    }
}

fn bad_enum(field: &str, v: i32) -> DecwaError {
    DecwaError::Config(format!("invalid {field} value {v}"))
}

impl TryFrom<DecwaParamsC> for DecwaParams {
    type Error = DecwaError;

    fn try_from(p: DecwaParamsC) -> Result<Self, DecwaError> {
        let kernel = match p.kernel {
            x if x == DecwaKernel::Gaussian as i32 => KernelKind::Gaussian,
            x if x == DecwaKernel::Uniform as i32 => KernelKind::Uniform,
            x if x == DecwaKernel::Triangular as i32 => KernelKind::Triangular,
            x => return Err(bad_enum("kernel", x)),
        };
        let metric = match p.metric {
            x if x == DecwaMetric::Euclidean as i32 => MetricKind::Euclidean,
            x if x == DecwaMetric::Manhattan as i32 => MetricKind::Manhattan,
            x if x == DecwaMetric::Canberra as i32 => MetricKind::Canberra,
            x if x == DecwaMetric::BrayCurtis as i32 => MetricKind::BrayCurtis,
            x if x == DecwaMetric::Cosine as i32 => MetricKind::Cosine,
            x => return Err(bad_enum("metric", x)),
        };
        let agglomeration = match p.agglomeration {
            x if x == DecwaAgglomeration::SinglePass as i32 => AgglomerationMode::SinglePass,
            x if x == DecwaAgglomeration::Fixpoint as i32 => AgglomerationMode::Fixpoint,
            x => return Err(bad_enum("agglomeration", x)),
        };
        Ok(DecwaParams {
            k: p.k,
            bandwidth: p.bandwidth,
            kernel,
            lambda: p.lambda,
            alpha: p.alpha,
            metric,
            grid_size: p.grid_size,
            min_cluster_size: p.min_cluster_size,
            agglomeration,
            seed: p.seed,
        })
    }
}

fn outlier_mode(m: i32) -> Result<OutlierMode, DecwaError> {
    match m {
        x if x == DecwaOutlierMode::OneCluster as i32 => Ok(OutlierMode::OneCluster),
        x if x == DecwaOutlierMode::Singletons as i32 => Ok(OutlierMode::Singletons),
        x => Err(bad_enum("outlier mode", x)),
    }
}

/// Message for the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn decwa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Fills `out` with the library defaults.
///
/// # Safety
/// `out` must be null or point to writable memory for one `DecwaParamsC`.
#[no_mangle]
pub unsafe extern "C" fn decwa_params_default(out: *mut DecwaParamsC) -> DecwaStatus {
    if out.is_null() {
        return null("out");
    }
    let d = DecwaParams::default();
    out.write(DecwaParamsC {
        k: d.k,
        bandwidth: d.bandwidth,
        kernel: DecwaKernel::Gaussian as i32,
        lambda: d.lambda,
        alpha: d.alpha,
        metric: DecwaMetric::Euclidean as i32,
        grid_size: d.grid_size,
        min_cluster_size: d.min_cluster_size,
        agglomeration: DecwaAgglomeration::SinglePass as i32,
        seed: d.seed,
    });
    DecwaStatus::Ok
}

/// Copies a row-major `rows x cols` matrix into a new dataset handle.
///
/// # Safety
/// `values` must be valid for `rows * cols` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn decwa_dataset_new(
    values: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut DecwaDataset,
) -> DecwaStatus {
    guarded(|| {
        if out.is_null() {
            return null("out");
        }
        out.write(ptr::null_mut());
        if cols == 0 || rows == 0 {
            return fail(DecwaError::Data(
                "dataset must have at least one row and one column".into(),
            ));
        }
        let Some(len) = rows.checked_mul(cols) else {
            return fail(DecwaError::Data("dataset size overflows".into()));
        };
        let Some(values) = slice_or_empty(values, len) else {
            return null("values");
        };
        let points: Result<Vec<Point>, _> = values
            .chunks_exact(cols)
            .map(|r| Point::new(r.to_vec()))
            .collect();
        match points {
            Ok(points) => {
                out.write(Box::into_raw(Box::new(DecwaDataset { points })));
                DecwaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `dataset` must be null or a handle from [`decwa_dataset_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn decwa_dataset_free(dataset: *mut DecwaDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn decwa_dataset_rows(dataset: *const DecwaDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.points.len())
}

/// Clusters a dataset.
///
/// # Safety
/// `dataset` and `params` must be live pointers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn decwa_fit(
    dataset: *const DecwaDataset,
    params: *const DecwaParamsC,
    out: *mut *mut DecwaResult,
) -> DecwaStatus {
    guarded(|| {
        if out.is_null() {
            return null("out");
        }
        out.write(ptr::null_mut());
        let Some(dataset) = dataset.as_ref() else {
            return null("dataset");
        };
        let Some(params) = params.as_ref() else {
            return null("params");
        };
        let params = match DecwaParams::try_from(*params) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match fit_traced(&dataset.points, &params) {
            Ok(trace) => {
                out.write(Box::into_raw(Box::new(DecwaResult { trace })));
                DecwaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `result` must be null or a handle from [`decwa_fit`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn decwa_result_free(result: *mut DecwaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of labels (points) in the result; 0 for null.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn decwa_result_len(result: *const DecwaResult) -> usize {
    result.as_ref().map_or(0, |r| r.trace.result.labels.len())
}

/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn decwa_result_cluster_count(result: *const DecwaResult) -> usize {
    result.as_ref().map_or(0, |r| r.trace.result.cluster_count)
}

/// NaN for null.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn decwa_result_outlier_ratio(result: *const DecwaResult) -> f64 {
    result
        .as_ref()
        .map_or(f64::NAN, |r| r.trace.result.outlier_ratio)
}

/// Copies labels into `out`, which must hold `capacity >= decwa_result_len`.
///
/// # Safety
/// `result` must be a live handle; `out` must be valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn decwa_result_labels(
    result: *const DecwaResult,
    out: *mut i64,
    capacity: usize,
) -> DecwaStatus {
    let Some(result) = result.as_ref() else {
        return null("result");
    };
    let labels = &result.trace.result.labels;
    if capacity < labels.len() {
        return fail(DecwaError::Config(format!(
            "label buffer holds {capacity} entries but {} are needed",
            labels.len()
        )));
    }
    if labels.is_empty() {
        return DecwaStatus::Ok;
    }
    if out.is_null() {
        return null("out");
    }
    ptr::copy_nonoverlapping(labels.as_ptr(), out, labels.len());
    DecwaStatus::Ok
}

/// Number of extraction thresholds used by the run.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn decwa_result_threshold_count(result: *const DecwaResult) -> usize {
    result
        .as_ref()
        .map_or(0, |r| r.trace.result.diagnostics.thresholds.len())
}

/// Copies the thresholds (descending) into `out`.
///
/// # Safety
/// `result` must be a live handle; `out` must be valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn decwa_result_thresholds(
    result: *const DecwaResult,
    out: *mut f64,
    capacity: usize,
) -> DecwaStatus {
    let Some(result) = result.as_ref() else {
        return null("result");
    };
    let t = &result.trace.result.diagnostics.thresholds;
    if capacity < t.len() {
        return fail(DecwaError::Config(format!(
            "threshold buffer holds {capacity} entries but {} are needed",
            t.len()
        )));
    }
    if !t.is_empty() {
        if out.is_null() {
            return null("out");
        }
        ptr::copy_nonoverlapping(t.as_ptr(), out, t.len());
    }
    DecwaStatus::Ok
}

/// Adjusted Rand index of two label vectors of length `n`; `mode` is a
/// `DecwaOutlierMode` value.
///
/// # Safety
/// `predicted` and `truth` must be valid for `n` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn decwa_adjusted_rand_index(
    predicted: *const i64,
    truth: *const i64,
    n: usize,
    mode: i32,
    out: *mut f64,
) -> DecwaStatus {
    guarded(|| {
        if out.is_null() {
            return null("out");
        }
        let (Some(p), Some(t)) = (slice_or_empty(predicted, n), slice_or_empty(truth, n)) else {
            return null("labels");
        };
        match outlier_mode(mode).and_then(|m| adjusted_rand_index(p, t, m)) {
            Ok(v) => {
                out.write(v);
                DecwaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// First Wasserstein distance between two samples (0 if either is empty).
///
/// # Safety
/// `a` and `b` must be valid for `len_a` and `len_b` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn decwa_wasserstein1(
    a: *const f64,
    len_a: usize,
    b: *const f64,
    len_b: usize,
    out: *mut f64,
) -> DecwaStatus {
    guarded(|| {
        if out.is_null() {
            return null("out");
        }
        let (Some(a), Some(b)) = (slice_or_empty(a, len_a), slice_or_empty(b, len_b)) else {
            return null("samples");
        };
        if a.iter().chain(b).any(|v| !v.is_finite()) {
            return fail(DecwaError::Data("samples must be finite".into()));
        }
        out.write(wasserstein1(a, b));
        DecwaStatus::Ok
    })
}
