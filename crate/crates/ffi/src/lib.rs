//! C ABI over the accelperf models.
//!
//! Conventions: devices are opaque handles created by `ap_device_*` and
//! released with `ap_device_free`; model calls return an `ApStatus` and
//! write results through out-pointers; strings returned through out-pointers
//! are released with `ap_string_free`. On any failure the per-thread message
//! from `ap_last_error` describes the cause. Zero-valued optional scalar
//! arguments select the documented defaults. All functions are safe to call
//! from multiple threads as long as each device handle is not freed while
//! in use.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use accelperf::device::Engine;
use accelperf::error::Error;
use accelperf::interconnect::CollectiveKind;
use accelperf::memory::{AccessPattern, Direction, GatherWorkload};
use accelperf::mme::{GemmMode, GemmShape, MacGeometry};
use accelperf::operators::{EmbeddingConfig, Layout, PagedAttentionConfig, Variant};
use accelperf::scenario::ReportFormat;
use accelperf::tpc::VectorKernel;
use accelperf::{presets, scenario, Bound, DeviceSpec};

/// Opaque device handle.
pub struct ApDevice(DeviceSpec);

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApStatus {
    /// Success.
    Ok = 0,
    /// A value violated a model precondition.
    InvalidArgument = 1,
    /// A name did not resolve to a preset or file.
    UnknownName = 2,
    /// A spec or scenario file failed to parse.
    ParseError = 3,
    /// The filesystem call failed.
    IoError = 4,
    /// A required pointer argument was null.
    NullArgument = 5,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 6,
    /// The model panicked; report this as a bug.
    InternalPanic = 7,
}

/// Engine selector for `ap_attainable_flops`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApEngine {
    Matrix = 0,
    Vector = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApGemmResult {
    pub cycles: f64,
    pub achieved_flops: f64,
    pub utilization: f64,
    pub operational_intensity: f64,
    /// 1 when the bandwidth roof binds, 0 when compute does.
    pub memory_bound: c_int,
    /// Selected geometry as a NUL-terminated `CxHxW` label.
    pub geometry: [c_char; 32],
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApStreamResult {
    pub cycles_per_body: u64,
    pub achieved_flops: f64,
    pub achieved_bytes_per_sec: f64,
    pub operational_intensity: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApGatherResult {
    pub utilization: f64,
    pub useful_bytes_per_sec: f64,
    pub fetched_bytes_per_sec: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApCollectiveResult {
    pub time_s: f64,
    pub steps: u32,
    pub algo_bytes_per_sec: f64,
    pub bus_bytes_per_sec: f64,
    pub utilization: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApEmbeddingResult {
    pub time_s: f64,
    pub bandwidth_utilization: f64,
    pub launches: u32,
    pub achieved_bytes_per_sec: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApAttentionResult {
    pub time_s: f64,
    pub gather_time_s: f64,
    pub gemm_time_s: f64,
    pub tokens_per_sec: f64,
    pub processed_blocks: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let text = CString::new(message).unwrap_or_else(|_| CString::new("bad message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(err: &Error) -> ApStatus {
    set_error(err.to_string());
    match err {
        Error::Invalid { .. } => ApStatus::InvalidArgument,
        Error::Unknown { .. } => ApStatus::UnknownName,
        Error::Parse { .. } => ApStatus::ParseError,
        Error::Io(_) => ApStatus::IoError,
    }
}

/// Runs a body with panic isolation; panics become `InternalPanic`.
fn guarded(body: impl FnOnce() -> ApStatus) -> ApStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            ApStatus::InternalPanic
        }
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, ApStatus> {
    if ptr.is_null() {
        set_error(format!("{what} must not be null"));
        return Err(ApStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        ApStatus::InvalidUtf8
    })
}

unsafe fn device_ref<'a>(ptr: *const ApDevice) -> Result<&'a DeviceSpec, ApStatus> {
    if ptr.is_null() {
        set_error("device must not be null");
        return Err(ApStatus::NullArgument);
    }
    Ok(&(*ptr).0)
}

unsafe fn out_ref<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, ApStatus> {
    if ptr.is_null() {
        set_error(format!("{what} must not be null"));
        return Err(ApStatus::NullArgument);
    }
    Ok(&mut *ptr)
}

fn copy_label(label: &str, dest: &mut [c_char; 32]) {
    dest.fill(0);
    for (slot, byte) in dest.iter_mut().zip(label.bytes().take(31)) {
        *slot = byte as c_char;
    }
}

fn device_from(result: Result<DeviceSpec, Error>) -> *mut ApDevice {
    clear_error();
    match result {
        Ok(spec) => Box::into_raw(Box::new(ApDevice(spec))),
        Err(err) => {
            fail(&err);
            std::ptr::null_mut()
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread, or null.
/// The pointer is valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ap_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |text| text.as_ptr())
    })
}

/// Creates a device from a bundled spec name ("gaudi2", "a100").
/// Returns null on failure; see `ap_last_error`.
///
/// # Safety
/// `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ap_device_builtin(name: *const c_char) -> *mut ApDevice {
    let name = match required_str(name, "name") {
        Ok(name) => name,
        Err(_) => return std::ptr::null_mut(),
    };
    device_from(presets::builtin_device(name))
}

/// Creates a device from a spec path, a name under the directory in
/// `ACCELPERF_SPEC_DIR`, or a bundled name. Returns null on failure.
///
/// # Safety
/// `name_or_path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ap_device_open(name_or_path: *const c_char) -> *mut ApDevice {
    let name = match required_str(name_or_path, "name_or_path") {
        Ok(name) => name,
        Err(_) => return std::ptr::null_mut(),
    };
    device_from(presets::resolve_device(name))
}

/// Releases a device handle. Null is ignored.
///
/// # Safety
/// `device` must be null or a pointer from `ap_device_builtin`/`ap_device_open`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ap_device_free(device: *mut ApDevice) {
    if !device.is_null() {
        drop(Box::from_raw(device));
    }
}

/// Roofline-attainable flop rate at one operational intensity (flop/byte).
/// `memory_bound` may be null when the caller only needs the rate.
///
/// # Safety
/// Pointer arguments must satisfy the conventions above.
#[no_mangle]
pub unsafe extern "C" fn ap_attainable_flops(
    device: *const ApDevice,
    operational_intensity: f64,
    engine: ApEngine,
    out_flops: *mut f64,
    memory_bound: *mut c_int,
) -> ApStatus {
    guarded(|| {
        let spec = match device_ref(device) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out = match out_ref(out_flops, "out_flops") {
            Ok(o) => o,
            Err(status) => return status,
        };
        let engine = match engine {
            ApEngine::Matrix => Engine::Matrix,
            ApEngine::Vector => Engine::Vector,
        };
        match accelperf::attainable_flops(spec, operational_intensity, engine) {
            Ok(point) => {
                *out = point.attainable_flops;
                if !memory_bound.is_null() {
                    *memory_bound = (point.bound == Bound::Memory) as c_int;
                }
                ApStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// GEMM cycle/throughput estimate. A null `fixed_geometry` picks the best
/// menu geometry; otherwise the `CxHxW` label is used as-is.
///
/// # Safety
/// Pointer arguments must satisfy the conventions above.
#[no_mangle]
pub unsafe extern "C" fn ap_gemm(
    device: *const ApDevice,
    m: u64,
    k: u64,
    n: u64,
    element_bytes: u64,
    fixed_geometry: *const c_char,
    out: *mut ApGemmResult,
) -> ApStatus {
    guarded(|| {
        let spec = match device_ref(device) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out = match out_ref(out, "out") {
            Ok(o) => o,
            Err(status) => return status,
        };
        let mode = if fixed_geometry.is_null() {
            GemmMode::Configurable
        } else {
            let label = match required_str(fixed_geometry, "fixed_geometry") {
                Ok(label) => label,
                Err(status) => return status,
            };
            match MacGeometry::parse_label(label) {
                Ok(geometry) => GemmMode::Fixed(geometry),
                Err(err) => return fail(&err),
            }
        };
        let shape = GemmShape::new(m, k, n).with_element_bytes(element_bytes);
        match accelperf::gemm_perf(&shape, spec, &mode) {
            Ok(result) => {
                out.cycles = result.cycles;
                out.achieved_flops = result.achieved_flops;
                out.utilization = result.utilization;
                out.operational_intensity = result.operational_intensity;
                out.memory_bound = (result.bound == Bound::Memory) as c_int;
                copy_label(&result.geometry.label(), &mut out.geometry);
                ApStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Streaming-kernel throughput for `cores` active cores (0 means all).
/// `kernel` is one of "add", "scale", "triad".
///
/// # Safety
/// Pointer arguments must satisfy the conventions above.
#[no_mangle]
pub unsafe extern "C" fn ap_stream(
    device: *const ApDevice,
    kernel: *const c_char,
    access_bytes: u64,
    unroll: u32,
    extra_ops_per_element: u32,
    cores: u32,
    out: *mut ApStreamResult,
) -> ApStatus {
    guarded(|| {
        let spec = match device_ref(device) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out = match out_ref(out, "out") {
            Ok(o) => o,
            Err(status) => return status,
        };
        let name = match required_str(kernel, "kernel") {
            Ok(name) => name,
            Err(status) => return status,
        };
        let kernel = match VectorKernel::preset(name) {
            Ok(kernel) => kernel
                .with_access_bytes(access_bytes)
                .with_unroll(unroll)
                .with_extra_ops(extra_ops_per_element),
            Err(err) => return fail(&err),
        };
        let cores = if cores == 0 {
            spec.vector_engine.core_count
        } else {
            cores
        };
        let single = match accelperf::kernel_cycles(&kernel, spec) {
            Ok(r) => r,
            Err(err) => return fail(&err),
        };
        match accelperf::multi_core(&kernel, spec, cores) {
            Ok(result) => {
                out.cycles_per_body = single.cycles_per_body;
                out.achieved_flops = result.achieved_flops;
                out.achieved_bytes_per_sec = result.achieved_bandwidth;
                out.operational_intensity = result.operational_intensity;
                ApStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Random gather (`scatter` = 0) or scatter (`scatter` = 1) bandwidth for
/// one vector size.
///
/// # Safety
/// Pointer arguments must satisfy the conventions above.
#[no_mangle]
pub unsafe extern "C" fn ap_gather(
    device: *const ApDevice,
    vector_bytes: u64,
    fraction_accessed: f64,
    scatter: c_int,
    out: *mut ApGatherResult,
) -> ApStatus {
    guarded(|| {
        let spec = match device_ref(device) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out = match out_ref(out, "out") {
            Ok(o) => o,
            Err(status) => return status,
        };
        let workload = GatherWorkload {
            num_vectors: 4_000_000,
            vector_bytes,
            fraction_accessed,
            direction: if scatter != 0 {
                Direction::Scatter
            } else {
                Direction::Gather
            },
            pattern: AccessPattern::Random,
        };
        match accelperf::gather_scatter_utilization(&workload, spec) {
            Ok(result) => {
                out.utilization = result.utilization;
                out.useful_bytes_per_sec = result.useful_bytes_per_sec;
                out.fetched_bytes_per_sec = result.fetched_bytes_per_sec;
                ApStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Completion time of one collective. `kind` is one of "all_reduce",
/// "all_gather", "reduce_scatter", "all_to_all", "reduce", "broadcast".
///
/// # Safety
/// Pointer arguments must satisfy the conventions above.
#[no_mangle]
pub unsafe extern "C" fn ap_collective(
    device: *const ApDevice,
    kind: *const c_char,
    payload_bytes: u64,
    participants: u32,
    out: *mut ApCollectiveResult,
) -> ApStatus {
    guarded(|| {
        let spec = match device_ref(device) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out = match out_ref(out, "out") {
            Ok(o) => o,
            Err(status) => return status,
        };
        let name = match required_str(kind, "kind") {
            Ok(name) => name,
            Err(status) => return status,
        };
        let kind = match CollectiveKind::from_str(name) {
            Ok(kind) => kind,
            Err(err) => return fail(&err),
        };
        match accelperf::collective_time(spec, kind, payload_bytes, participants) {
            Ok(result) => {
                out.time_s = result.time_s;
                out.steps = result.steps;
                out.algo_bytes_per_sec = result.algo_bandwidth;
                out.bus_bytes_per_sec = result.bus_bandwidth;
                out.utilization = result.utilization;
                ApStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Embedding-lookup estimate. `layout` is "single_table" or
/// "batched_table"; `rows_per_table` 0 selects 2^20 and `unroll` 0
/// selects 4.
///
/// # Safety
/// Pointer arguments must satisfy the conventions above.
#[no_mangle]
pub unsafe extern "C" fn ap_embedding(
    device: *const ApDevice,
    layout: *const c_char,
    num_tables: u32,
    rows_per_table: u64,
    vector_bytes: u64,
    pooling_factor: u32,
    batch: u32,
    unroll: u32,
    out: *mut ApEmbeddingResult,
) -> ApStatus {
    guarded(|| {
        let spec = match device_ref(device) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out = match out_ref(out, "out") {
            Ok(o) => o,
            Err(status) => return status,
        };
        let name = match required_str(layout, "layout") {
            Ok(name) => name,
            Err(status) => return status,
        };
        let layout = match Layout::from_str(name) {
            Ok(layout) => layout,
            Err(err) => return fail(&err),
        };
        let cfg = EmbeddingConfig {
            num_tables,
            rows_per_table: if rows_per_table == 0 {
                1 << 20
            } else {
                rows_per_table
            },
            vector_bytes,
            pooling_factor,
            batch,
            unroll: if unroll == 0 { 4 } else { unroll },
        };
        match accelperf::embedding_lookup(layout, &cfg, spec) {
            Ok(result) => {
                out.time_s = result.time_s;
                out.bandwidth_utilization = result.bandwidth_utilization;
                out.launches = result.launches;
                out.achieved_bytes_per_sec = result.achieved_bandwidth;
                ApStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Paged-attention decode estimate. `variant` is "block_table" or
/// "block_list". Zero-valued head/block/element arguments select the
/// 8B-model defaults (block 128, head dim 128, 32 query / 8 KV heads,
/// 2-byte elements).
///
/// # Safety
/// Pointer arguments must satisfy the conventions above.
#[no_mangle]
pub unsafe extern "C" fn ap_paged_attention(
    device: *const ApDevice,
    variant: *const c_char,
    batch: u32,
    seq_len: u64,
    padded_fraction: f64,
    block_size: u64,
    head_dim: u64,
    num_query_heads: u32,
    num_kv_heads: u32,
    element_bytes: u64,
    out: *mut ApAttentionResult,
) -> ApStatus {
    guarded(|| {
        let spec = match device_ref(device) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out = match out_ref(out, "out") {
            Ok(o) => o,
            Err(status) => return status,
        };
        let name = match required_str(variant, "variant") {
            Ok(name) => name,
            Err(status) => return status,
        };
        let variant = match Variant::from_str(name) {
            Ok(variant) => variant,
            Err(err) => return fail(&err),
        };
        let mut cfg = PagedAttentionConfig::llama31_8b(batch, seq_len, padded_fraction);
        if block_size != 0 {
            cfg.block_size = block_size;
        }
        if head_dim != 0 {
            cfg.head_dim = head_dim;
        }
        if num_query_heads != 0 {
            cfg.num_query_heads = num_query_heads;
        }
        if num_kv_heads != 0 {
            cfg.num_kv_heads = num_kv_heads;
        }
        if element_bytes != 0 {
            cfg.element_bytes = element_bytes;
        }
        match accelperf::paged_attention(variant, &cfg, spec) {
            Ok(result) => {
                out.time_s = result.time_s;
                out.gather_time_s = result.gather_time_s;
                out.gemm_time_s = result.gemm_time_s;
                out.tokens_per_sec = result.tokens_per_sec;
                out.processed_blocks = result.processed_blocks;
                ApStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Runs a scenario (name or path) on a device (name or path; null uses the
/// scenario's default) and returns the report through `out_report`.
/// `json` 0 emits CSV, nonzero emits JSON. Free the string with
/// `ap_string_free`.
///
/// # Safety
/// Pointer arguments must satisfy the conventions above.
#[no_mangle]
pub unsafe extern "C" fn ap_run_scenario(
    scenario: *const c_char,
    device: *const c_char,
    json: c_int,
    out_report: *mut *mut c_char,
) -> ApStatus {
    guarded(|| {
        let out = match out_ref(out_report, "out_report") {
            Ok(o) => o,
            Err(status) => return status,
        };
        let scenario_name = match required_str(scenario, "scenario") {
            Ok(name) => name,
            Err(status) => return status,
        };
        let scenario = match presets::resolve_scenario(scenario_name) {
            Ok(s) => s,
            Err(err) => return fail(&err),
        };
        let device_name = if device.is_null() {
            match scenario.device.as_deref() {
                Some(name) => name.to_string(),
                None => {
                    set_error("scenario names no default device; pass one");
                    return ApStatus::InvalidArgument;
                }
            }
        } else {
            match required_str(device, "device") {
                Ok(name) => name.to_string(),
                Err(status) => return status,
            }
        };
        let device = match presets::resolve_device(&device_name) {
            Ok(d) => d,
            Err(err) => return fail(&err),
        };
        let table = match scenario::run_scenario(&scenario, &device) {
            Ok(t) => t,
            Err(err) => return fail(&err),
        };
        let format = if json != 0 {
            ReportFormat::Json
        } else {
            ReportFormat::Csv
        };
        match CString::new(table.emit(format)) {
            Ok(text) => {
                *out = text.into_raw();
                ApStatus::Ok
            }
            Err(_) => {
                set_error("report contained an interior NUL byte");
                ApStatus::InternalPanic
            }
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `text` must be null or an unfreed pointer returned through an
/// out-parameter of this library.
#[no_mangle]
pub unsafe extern "C" fn ap_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}
