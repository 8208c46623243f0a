//! Analytical performance models for heterogeneous AI accelerators.
//!
//! The crate models five subsystems of a modern training/inference chip and
//! two operator-level pipelines built on them, each parameterized by a
//! declarative device spec (TOML):
//!
//! - [`device`]: the spec schema, validation, and the roofline
//!   ([`attainable_flops`]).
//! - [`mme`]: GEMM on a reconfigurable output-stationary systolic array;
//!   geometry enumeration, shape-aware selection, cycle estimates.
//! - [`tpc`]: VLIW vector cores running streaming kernels; issue, dependency
//!   and bandwidth limits.
//! - [`memory`]: random gather/scatter under access-granularity constraints
//!   and a latency/concurrency bandwidth bound.
//! - [`interconnect`]: alpha-beta ring collectives over point-to-point mesh
//!   or switched topologies.
//! - [`operators`]: batched embedding lookups and paged-attention decode.
//! - [`scenario`]: declarative sweep files, parallel evaluation, device
//!   comparison, and byte-stable CSV/JSON reports.
//!
//! Two reference device specs ship with the crate (`gaudi2`, `a100`) along
//! with a set of sweep scenarios; see [`presets`]. All models are exact
//! arithmetic over the spec values: no sampling, no host-dependent state,
//! so every report is reproducible byte for byte.

pub mod device;
pub mod error;
pub mod interconnect;
pub mod memory;
pub mod mme;
pub mod operators;
pub mod presets;
pub mod scenario;
pub mod tpc;

pub use device::{attainable_flops, Bound, DeviceSpec, Engine, RooflinePoint};
pub use error::{Error, Result};
pub use interconnect::{collective_time, CollectiveKind, CollectiveResult};
pub use memory::{
    gather_scatter_utilization, AccessPattern, BandwidthResult, Direction, GatherWorkload,
};
pub use mme::{gemm_perf, select_geometry, GemmMode, GemmResult, GemmShape, MacGeometry};
pub use operators::{
    embedding_lookup, paged_attention, paged_attention_cross_device, EmbeddingConfig,
    EmbeddingResult, Layout, PagedAttentionConfig, PagedAttentionResult, Variant,
};
pub use scenario::{
    compare_devices, device_fingerprint, run_scenario, ReportFormat, ReportTable, ScenarioSpec,
    SweepKind,
};
pub use tpc::{kernel_cycles, multi_core, TpcMultiResult, TpcResult, VectorKernel};
