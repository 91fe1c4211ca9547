//! C ABI over the `newsdiff` simulator, analytics and logistic model.
//!
//! Conventions:
//! * every fallible function returns an [`NdStatus`]; results go through
//!   out-pointers that are only written on `ND_STATUS_OK`
//! * simulations and ensembles are opaque handles released with their
//!   `*_free` function
//! * the message for the most recent failure on the calling thread is
//!   available from [`nd_last_error`]
//!
//! The generated header lives at `include/newsdiff.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use newsdiff::analytics::{cross_point, stabilization_ratio};
use newsdiff::engine::{self, EnsembleResult, SimulationConfig, Trajectory};
use newsdiff::grid::Boundary;
use newsdiff::model::{self, AnalyticModel, FitShape, LogisticParams};
use newsdiff::rules::NewsRuleParams;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    /// The run hit `max_steps` before reaching a fixed point.
    NotConverged = 4,
    FitFailed = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: NdStatus, message: impl Into<String>) -> NdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.into());
    status
}

fn guard(f: impl FnOnce() -> NdStatus) -> NdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(NdStatus::Panic, "internal panic"),
    }
}

/// Copies `s` into a caller buffer with a trailing NUL, truncating if
/// needed. Returns the buffer size needed for the full string.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize) -> usize {
    if !buf.is_null() && len > 0 {
        let n = s.len().min(len - 1);
        // SAFETY: caller guarantees `buf` points to `len` writable bytes.
        unsafe {
            ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
    }
    s.len() + 1
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nd_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(s) => s,
            Err(_) => panic!("version has no interior NUL"),
        };
    VERSION.as_ptr()
}

/// Writes the calling thread's last error message into `buf` (at most
/// `len` bytes including the NUL) and returns the size needed.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nd_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| unsafe { copy_out(&e.borrow(), buf, len) })
}

/// Simulation settings. `seed_row`/`seed_col` of -1 select the center.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NdSimConfig {
    pub width: u32,
    pub height: u32,
    pub seed_row: i64,
    pub seed_col: i64,
    pub toroidal: bool,
    pub rng_seed: u64,
    pub max_steps: u32,
    pub adoption_threshold: f64,
    pub boost_factor: f64,
    pub boost_below: u8,
}

impl Default for NdSimConfig {
    fn default() -> Self {
        let c = SimulationConfig::<NewsRuleParams>::default();
        Self {
            width: c.width as u32,
            height: c.height as u32,
            seed_row: -1,
            seed_col: -1,
            toroidal: false,
            rng_seed: c.rng_seed,
            max_steps: c.max_steps as u32,
            adoption_threshold: c.rule.adoption_threshold,
            boost_factor: c.rule.boost_factor,
            boost_below: c.rule.boost_below,
        }
    }
}

impl NdSimConfig {
    fn to_config(self) -> Result<SimulationConfig, NdStatus> {
        let seed_position = match (self.seed_row, self.seed_col) {
            (-1, -1) => None,
            (r, c) if r >= 0 && c >= 0 => Some((r as usize, c as usize)),
            _ => {
                return Err(fail(
                    NdStatus::InvalidArgument,
                    "seed_row and seed_col must both be -1 or both be non-negative",
                ))
            }
        };
        Ok(SimulationConfig {
            width: self.width as usize,
            height: self.height as usize,
            seed_position,
            boundary: if self.toroidal {
                Boundary::Toroidal
            } else {
                Boundary::Bounded
            },
            rng_seed: self.rng_seed,
            max_steps: self.max_steps as usize,
            rule: NewsRuleParams {
                adoption_threshold: self.adoption_threshold,
                boost_factor: self.boost_factor,
                boost_below: self.boost_below,
            },
            snapshot_every: None,
        })
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NdCounts {
    pub white: u64,
    pub grey: u64,
    pub black: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NdFractions {
    pub white: f64,
    pub grey: f64,
    pub black: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NdConvergenceStats {
    pub min: u64,
    pub median: f64,
    pub max: u64,
    /// Number of converged runs the statistics cover.
    pub count: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NdCrossPoint {
    pub step: u64,
    pub level: f64,
    pub spread: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NdLogisticParams {
    pub c: f64,
    pub tau: f64,
    pub gamma: f64,
}

impl From<LogisticParams> for NdLogisticParams {
    fn from(p: LogisticParams) -> Self {
        Self {
            c: p.c,
            tau: p.tau,
            gamma: p.gamma,
        }
    }
}

impl From<NdLogisticParams> for LogisticParams {
    fn from(p: NdLogisticParams) -> Self {
        Self {
            c: p.c,
            tau: p.tau,
            gamma: p.gamma,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NdAnalyticModel {
    pub grey: NdLogisticParams,
    pub white: NdLogisticParams,
}

impl From<NdAnalyticModel> for AnalyticModel {
    fn from(m: NdAnalyticModel) -> Self {
        Self {
            grey: m.grey.into(),
            white: m.white.into(),
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NdFitResult {
    pub params: NdLogisticParams,
    pub rmse: f64,
    pub iterations: u64,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdFitShape {
    Rising = 0,
    Falling = 1,
}

/// Opaque single-run result.
pub struct NdTrajectory(Trajectory);

/// Opaque ensemble result.
pub struct NdEnsemble(EnsembleResult);

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(NdStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Fills `out` with the default 40x40 centered configuration.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_sim_config_default(out: *mut NdSimConfig) -> NdStatus {
    non_null!(out);
    unsafe { out.write(NdSimConfig::default()) };
    NdStatus::Ok
}

/// Runs one simulation. A run that hits `max_steps` still yields a handle;
/// query [`nd_trajectory_converged_at`] to tell.
///
/// # Safety
/// `config` must be null or point to a valid config; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_simulate(
    config: *const NdSimConfig,
    out: *mut *mut NdTrajectory,
) -> NdStatus {
    non_null!(config, out);
    guard(|| {
        let cfg = match unsafe { *config }.to_config() {
            Ok(c) => c,
            Err(s) => return s,
        };
        match engine::run(&cfg) {
            Ok(t) => {
                unsafe { out.write(Box::into_raw(Box::new(NdTrajectory(t)))) };
                NdStatus::Ok
            }
            Err(e) => fail(NdStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Number of recorded states (steps + 1); 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle from [`nd_simulate`].
#[no_mangle]
pub unsafe extern "C" fn nd_trajectory_len(traj: *const NdTrajectory) -> usize {
    unsafe { traj.as_ref() }.map_or(0, |t| t.0.counts.len())
}

/// # Safety
/// `traj` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_trajectory_counts(
    traj: *const NdTrajectory,
    step: usize,
    out: *mut NdCounts,
) -> NdStatus {
    non_null!(traj, out);
    let t = unsafe { &*traj };
    match t.0.counts.get(step) {
        Some(c) => {
            unsafe {
                out.write(NdCounts {
                    white: c.white as u64,
                    grey: c.grey as u64,
                    black: c.black as u64,
                })
            };
            NdStatus::Ok
        }
        None => fail(
            NdStatus::OutOfRange,
            format!(
                "step {step} beyond trajectory of {} states",
                t.0.counts.len()
            ),
        ),
    }
}

/// Writes the fixed-point step, or returns `NotConverged`.
///
/// # Safety
/// `traj` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_trajectory_converged_at(
    traj: *const NdTrajectory,
    out: *mut u64,
) -> NdStatus {
    non_null!(traj, out);
    match unsafe { &*traj }.0.converged_at {
        Some(t) => {
            unsafe { out.write(t as u64) };
            NdStatus::Ok
        }
        None => fail(NdStatus::NotConverged, "run did not reach a fixed point"),
    }
}

/// Writes the first step without Black cells, or returns `NotConverged`.
///
/// # Safety
/// `traj` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_trajectory_black_extinct_at(
    traj: *const NdTrajectory,
    out: *mut u64,
) -> NdStatus {
    non_null!(traj, out);
    match unsafe { &*traj }.0.black_extinct_at {
        Some(t) => {
            unsafe { out.write(t as u64) };
            NdStatus::Ok
        }
        None => fail(NdStatus::NotConverged, "Black cells never died out"),
    }
}

/// ASCII rendering of the final grid; same contract as [`nd_last_error`].
///
/// # Safety
/// `traj` must be null or a live handle; `buf` null or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nd_trajectory_final_grid(
    traj: *const NdTrajectory,
    buf: *mut c_char,
    len: usize,
) -> usize {
    match unsafe { traj.as_ref() } {
        Some(t) => unsafe { copy_out(&t.0.final_grid.to_ascii(), buf, len) },
        None => 0,
    }
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nd_trajectory_free(traj: *mut NdTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Runs `runs` seeded simulations. `threads == 0` uses all cores; the
/// result is the same for any thread count.
///
/// # Safety
/// `config` must be null or valid; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_ensemble_run(
    config: *const NdSimConfig,
    runs: u32,
    threads: u32,
    out: *mut *mut NdEnsemble,
) -> NdStatus {
    non_null!(config, out);
    guard(|| {
        let cfg = match unsafe { *config }.to_config() {
            Ok(c) => c,
            Err(s) => return s,
        };
        let threads = (threads > 0).then_some(threads as usize);
        match engine::run_ensemble(&cfg, runs as usize, threads) {
            Ok(e) => {
                unsafe { out.write(Box::into_raw(Box::new(NdEnsemble(e)))) };
                NdStatus::Ok
            }
            Err(e) => fail(NdStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Length of the mean fraction series; 0 for a null handle.
///
/// # Safety
/// `ens` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_ensemble_len(ens: *const NdEnsemble) -> usize {
    unsafe { ens.as_ref() }.map_or(0, |e| e.0.mean_series.len())
}

/// # Safety
/// `ens` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_ensemble_fractions(
    ens: *const NdEnsemble,
    step: usize,
    out: *mut NdFractions,
) -> NdStatus {
    non_null!(ens, out);
    let e = unsafe { &*ens };
    match e.0.mean_series.as_slice().get(step) {
        Some(f) => {
            unsafe {
                out.write(NdFractions {
                    white: f.white,
                    grey: f.grey,
                    black: f.black,
                })
            };
            NdStatus::Ok
        }
        None => fail(NdStatus::OutOfRange, format!("step {step} beyond series")),
    }
}

/// Convergence statistics over converged runs; `NotConverged` if none did.
///
/// # Safety
/// `ens` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_ensemble_convergence(
    ens: *const NdEnsemble,
    out: *mut NdConvergenceStats,
) -> NdStatus {
    non_null!(ens, out);
    match unsafe { &*ens }.0.convergence {
        Some(s) => {
            unsafe {
                out.write(NdConvergenceStats {
                    min: s.min as u64,
                    median: s.median,
                    max: s.max as u64,
                    count: s.count as u64,
                })
            };
            NdStatus::Ok
        }
        None => fail(NdStatus::NotConverged, "no run converged"),
    }
}

/// Number of runs that hit `max_steps`; 0 for a null handle.
///
/// # Safety
/// `ens` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_ensemble_non_converged(ens: *const NdEnsemble) -> usize {
    unsafe { ens.as_ref() }.map_or(0, |e| e.0.non_converged().len())
}

/// # Safety
/// `ens` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_ensemble_cross_point(
    ens: *const NdEnsemble,
    out: *mut NdCrossPoint,
) -> NdStatus {
    non_null!(ens, out);
    match cross_point(&unsafe { &*ens }.0.mean_series) {
        Ok(cp) => {
            unsafe {
                out.write(NdCrossPoint {
                    step: cp.step as u64,
                    level: cp.level,
                    spread: cp.spread,
                })
            };
            NdStatus::Ok
        }
        Err(e) => fail(NdStatus::InvalidArgument, e.to_string()),
    }
}

/// Final mean fractions of the ensemble.
///
/// # Safety
/// `ens` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_ensemble_stabilization(
    ens: *const NdEnsemble,
    out: *mut NdFractions,
) -> NdStatus {
    non_null!(ens, out);
    match stabilization_ratio(&unsafe { &*ens }.0.mean_series) {
        Ok(r) => {
            unsafe {
                out.write(NdFractions {
                    white: r.white,
                    grey: r.grey,
                    black: r.black,
                })
            };
            NdStatus::Ok
        }
        Err(e) => fail(NdStatus::InvalidArgument, e.to_string()),
    }
}

/// # Safety
/// `ens` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nd_ensemble_free(ens: *mut NdEnsemble) {
    if !ens.is_null() {
        drop(unsafe { Box::from_raw(ens) });
    }
}

/// The reference parameterization: grey `(0.75, 30, 0.15)`, white `(0.75, 20, 0.25)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_model_default(out: *mut NdAnalyticModel) -> NdStatus {
    non_null!(out);
    let m = model::paper_model();
    unsafe {
        out.write(NdAnalyticModel {
            grey: m.grey.into(),
            white: m.white.into(),
        })
    };
    NdStatus::Ok
}

/// Evaluates the three model curves at `t`. Black may be slightly negative.
///
/// # Safety
/// `model` must be null or valid; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_model_eval(
    model: *const NdAnalyticModel,
    t: f64,
    out: *mut NdFractions,
) -> NdStatus {
    non_null!(model, out);
    let m: AnalyticModel = unsafe { *model }.into();
    if let Err(e) = m.grey.validate().and(m.white.validate()) {
        return fail(NdStatus::InvalidArgument, e.to_string());
    }
    let f = m.eval(t);
    unsafe {
        out.write(NdFractions {
            white: f.white,
            grey: f.grey,
            black: f.black,
        })
    };
    NdStatus::Ok
}

/// Least-squares logistic fit to `len` samples `(steps[i], values[i])`.
/// `shape` takes an [`NdFitShape`] value.
///
/// # Safety
/// `steps` and `values` must each point to `len` readable doubles; `out`
/// must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nd_fit_logistic(
    steps: *const f64,
    values: *const f64,
    len: usize,
    shape: u32,
    out: *mut NdFitResult,
) -> NdStatus {
    non_null!(steps, values, out);
    let shape = match shape {
        s if s == NdFitShape::Rising as u32 => FitShape::Rising,
        s if s == NdFitShape::Falling as u32 => FitShape::Falling,
        other => {
            return fail(
                NdStatus::InvalidArgument,
                format!("unknown fit shape {other}"),
            )
        }
    };
    guard(|| {
        let (ts, vs) = unsafe {
            (
                std::slice::from_raw_parts(steps, len),
                std::slice::from_raw_parts(values, len),
            )
        };
        let points: Vec<(f64, f64)> = ts.iter().copied().zip(vs.iter().copied()).collect();
        match model::fit_logistic(&points, shape) {
            Ok(f) => {
                unsafe {
                    out.write(NdFitResult {
                        params: f.params.into(),
                        rmse: f.rmse,
                        iterations: f.iterations as u64,
                        converged: f.converged,
                    })
                };
                NdStatus::Ok
            }
            Err(e) => fail(NdStatus::FitFailed, e.to_string()),
        }
    })
}
