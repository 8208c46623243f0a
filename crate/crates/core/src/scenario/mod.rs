//! Declarative sweep scenarios and the report builder.
//!
//! A scenario file names a sweep kind, per-axis value lists and scalar
//! params. Evaluation walks the cartesian product of the axes in the file's
//! order (first axis outermost), fans rows out to worker threads, and
//! reassembles them in product order, so a report is a pure function of
//! (scenario, device) and two runs emit identical bytes. The metadata block
//! records the device fingerprint and every calibration constant that
//! shaped the numbers.

pub mod report;

use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::device::DeviceSpec;
use crate::error::{Error, Result};
use crate::interconnect::{self, CollectiveKind};
use crate::memory::{self, AccessPattern, Direction, GatherWorkload};
use crate::mme::{self, GemmShape, MacGeometry};
use crate::operators::{self, EmbeddingConfig, Layout, PagedAttentionConfig, Variant};
use crate::tpc::{self, TpcBound, VectorKernel};

pub use report::{ReportFormat, ReportTable, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    GemmSweep,
    StreamSweep,
    GatherSweep,
    CollectiveSweep,
    EmbeddingSweep,
    PagedAttentionSweep,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::GemmSweep => "gemm_sweep",
            SweepKind::StreamSweep => "stream_sweep",
            SweepKind::GatherSweep => "gather_sweep",
            SweepKind::CollectiveSweep => "collective_sweep",
            SweepKind::EmbeddingSweep => "embedding_sweep",
            SweepKind::PagedAttentionSweep => "paged_attention_sweep",
        }
    }

    /// Leading columns that identify a row; the rest are metrics.
    pub fn axis_column_count(&self) -> usize {
        match self {
            SweepKind::GemmSweep => 4,
            SweepKind::StreamSweep => 5,
            SweepKind::GatherSweep => 3,
            SweepKind::CollectiveSweep => 3,
            SweepKind::EmbeddingSweep => 4,
            SweepKind::PagedAttentionSweep => 4,
        }
    }
}

/// One parsed scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub kind: SweepKind,
    #[serde(default)]
    pub description: String,
    /// Default device reference, overridable from the CLI.
    #[serde(default)]
    pub device: Option<String>,
    axes: toml::Value,
    #[serde(default)]
    params: Option<toml::Value>,
}

impl ScenarioSpec {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<ScenarioSpec> {
        let spec: ScenarioSpec =
            toml::from_str(text).map_err(|e| Error::parse(origin, e.message()))?;
        if spec.name.is_empty() {
            return Err(Error::invalid("name", "must not be empty"));
        }
        Ok(spec)
    }

    pub fn load(path: &std::path::Path) -> Result<ScenarioSpec> {
        let text = std::fs::read_to_string(path)?;
        ScenarioSpec::from_toml_str(&text, &path.display().to_string())
    }

    fn section<'de, T: Deserialize<'de>>(&self, value: &toml::Value, what: &str) -> Result<T> {
        value
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| {
                Error::parse(format!("{} ({what})", self.name), e.message())
            })
    }

    fn axes<'de, T: Deserialize<'de>>(&self) -> Result<T> {
        self.section(&self.axes, "axes")
    }

    fn params<'de, T: Deserialize<'de>>(&self) -> Result<T> {
        let empty = toml::Value::Table(toml::value::Table::new());
        self.section(self.params.as_ref().unwrap_or(&empty), "params")
    }
}

fn non_empty<T>(scenario: &str, axis: &str, values: &[T]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(
            format!("{scenario}: axes.{axis}"),
            "must not be empty",
        ));
    }
    Ok(())
}

/// SHA-256 of the canonical serialized device spec.
pub fn device_fingerprint(spec: &DeviceSpec) -> String {
    let text = toml::to_string(spec).expect("device serialization");
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn calibration_metadata(table: &mut ReportTable, prefix: &str, spec: &DeviceSpec) {
    let cal = &spec.calibration;
    let fill = match cal.mme_fill_model {
        crate::device::FillModel::None => "none",
        crate::device::FillModel::HPlusW => "h_plus_w",
    };
    let staging = match cal.attention_staging {
        crate::device::AttentionStaging::Staged => "staged",
        crate::device::AttentionStaging::Inline => "inline",
    };
    table.meta(format!("{prefix}.stream_efficiency"), cal.stream_efficiency);
    table.meta(
        format!("{prefix}.kernel_launch_overhead"),
        cal.kernel_launch_overhead,
    );
    table.meta(format!("{prefix}.mme_fill_model"), fill);
    table.meta(
        format!("{prefix}.gemm_memory_efficiency"),
        cal.gemm_memory_efficiency,
    );
    table.meta(format!("{prefix}.attention_staging"), staging);
    table.meta(format!("{prefix}.pipeline_overlap"), cal.pipeline_overlap);
    table.meta(
        format!("{prefix}.unbatched_gather_efficiency"),
        cal.unbatched_gather_efficiency,
    );
}

fn tpc_bound_name(bound: TpcBound) -> &'static str {
    match bound {
        TpcBound::Dependency => "dependency",
        TpcBound::LoadStoreIssue => "load_store_issue",
        TpcBound::VectorIssue => "vector_issue",
        TpcBound::Memory => "memory",
        TpcBound::ComputeMix => "compute_mix",
    }
}

/// Evaluates a scenario on one device.
pub fn run_scenario(scenario: &ScenarioSpec, device: &DeviceSpec) -> Result<ReportTable> {
    let (columns, rows) = match scenario.kind {
        SweepKind::GemmSweep => gemm_rows(scenario, device)?,
        SweepKind::StreamSweep => stream_rows(scenario, device)?,
        SweepKind::GatherSweep => gather_rows(scenario, device)?,
        SweepKind::CollectiveSweep => collective_rows(scenario, device)?,
        SweepKind::EmbeddingSweep => embedding_rows(scenario, device)?,
        SweepKind::PagedAttentionSweep => attention_rows(scenario, device)?,
    };
    let mut table = ReportTable::new(columns);
    table.meta("scenario", &scenario.name);
    table.meta("kind", scenario.kind.name());
    if !scenario.description.is_empty() {
        table.meta("description", &scenario.description);
    }
    table.meta("tool_version", env!("CARGO_PKG_VERSION"));
    table.meta("device", &device.name);
    table.meta("device_sha256", device_fingerprint(device));
    calibration_metadata(&mut table, "calibration", device);
    table.rows = rows;
    Ok(table)
}

/// Runs the scenario on two devices and appends `_a`, `_b` and `_ratio`
/// (a over b) columns per metric, plus a geometric-mean summary row over
/// the finite positive ratios.
pub fn compare_devices(
    scenario: &ScenarioSpec,
    device_a: &DeviceSpec,
    device_b: &DeviceSpec,
) -> Result<ReportTable> {
    let ta = run_scenario(scenario, device_a)?;
    let tb = run_scenario(scenario, device_b)?;
    let axes = scenario.kind.axis_column_count();
    debug_assert_eq!(ta.columns, tb.columns);
    debug_assert_eq!(ta.rows.len(), tb.rows.len());

    let mut columns: Vec<String> = ta.columns[..axes].to_vec();
    let metric_names: Vec<String> = ta.columns[axes..].to_vec();
    let numeric: Vec<bool> = (0..metric_names.len())
        .map(|i| {
            ta.rows
                .iter()
                .all(|row| row[axes + i].as_f64().is_some())
        })
        .collect();
    for (name, &is_num) in metric_names.iter().zip(&numeric) {
        columns.push(format!("{name}_a"));
        columns.push(format!("{name}_b"));
        if is_num {
            columns.push(format!("{name}_ratio"));
        }
    }

    let mut table = ReportTable::new(columns);
    table.meta("scenario", &scenario.name);
    table.meta("kind", scenario.kind.name());
    table.meta("tool_version", env!("CARGO_PKG_VERSION"));
    table.meta("device_a", &device_a.name);
    table.meta("device_a_sha256", device_fingerprint(device_a));
    table.meta("device_b", &device_b.name);
    table.meta("device_b_sha256", device_fingerprint(device_b));
    calibration_metadata(&mut table, "calibration_a", device_a);
    calibration_metadata(&mut table, "calibration_b", device_b);

    // Geometric means accumulate in log space over positive finite ratios.
    let mut log_sums = vec![0.0f64; metric_names.len()];
    let mut log_counts = vec![0usize; metric_names.len()];
    for (ra, rb) in ta.rows.iter().zip(&tb.rows) {
        debug_assert_eq!(&ra[..axes], &rb[..axes]);
        let mut row: Vec<Value> = ra[..axes].to_vec();
        for i in 0..metric_names.len() {
            let (va, vb) = (&ra[axes + i], &rb[axes + i]);
            row.push(va.clone());
            row.push(vb.clone());
            if numeric[i] {
                let ratio = match (va.as_f64(), vb.as_f64()) {
                    (Some(a), Some(b)) if b != 0.0 => a / b,
                    _ => f64::NAN,
                };
                if ratio.is_finite() && ratio > 0.0 {
                    log_sums[i] += ratio.ln();
                    log_counts[i] += 1;
                    row.push(Value::Float(ratio));
                } else {
                    row.push(Value::Str(String::new()));
                }
            }
        }
        table.push_row(row);
    }

    let mut summary: Vec<Value> = Vec::with_capacity(table.columns.len());
    summary.push(Value::Str("geomean".into()));
    summary.extend(std::iter::repeat_n(Value::Str(String::new()), axes - 1));
    for i in 0..metric_names.len() {
        summary.push(Value::Str(String::new()));
        summary.push(Value::Str(String::new()));
        if numeric[i] {
            if log_counts[i] > 0 {
                summary.push(Value::Float((log_sums[i] / log_counts[i] as f64).exp()));
            } else {
                summary.push(Value::Str(String::new()));
            }
        }
    }
    table.push_row(summary);
    Ok(table)
}

// ---- gemm_sweep ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GemmAxes {
    /// `[m, k, n]` triples.
    shape: Vec<[u64; 3]>,
    mode: Vec<GemmModeName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GemmModeName {
    Configurable,
    Fixed,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GemmParams {
    #[serde(default = "default_element_bytes")]
    element_bytes: u64,
    /// `CxHxW` label; the device's native arrangement when absent.
    #[serde(default)]
    fixed_geometry: Option<String>,
}

fn default_element_bytes() -> u64 {
    2
}

fn gemm_rows(
    scenario: &ScenarioSpec,
    device: &DeviceSpec,
) -> Result<(Vec<String>, Vec<Vec<Value>>)> {
    let axes: GemmAxes = scenario.axes()?;
    let params: GemmParams = scenario.params()?;
    non_empty(&scenario.name, "shape", &axes.shape)?;
    non_empty(&scenario.name, "mode", &axes.mode)?;

    let me = &device.matrix_engine;
    let fixed = match &params.fixed_geometry {
        Some(label) => MacGeometry::parse_label(label)?,
        None => MacGeometry::new(me.unit_count, me.unit_height, me.unit_width),
    };

    let mut inputs = Vec::new();
    for &[m, k, n] in &axes.shape {
        for &mode in &axes.mode {
            inputs.push((m, k, n, mode));
        }
    }
    let columns = vec![
        "m".to_string(),
        "k".into(),
        "n".into(),
        "mode".into(),
        "geometry".into(),
        "operational_intensity".into(),
        "cycles".into(),
        "achieved_flops".into(),
        "utilization".into(),
        "bound".into(),
    ];
    let rows = inputs
        .par_iter()
        .map(|&(m, k, n, mode)| {
            let shape = GemmShape::new(m, k, n).with_element_bytes(params.element_bytes);
            let (mode_name, result) = match mode {
                GemmModeName::Configurable => (
                    "configurable",
                    mme::gemm_perf(&shape, device, &mme::GemmMode::Configurable)?,
                ),
                GemmModeName::Fixed => (
                    "fixed",
                    mme::gemm_perf(&shape, device, &mme::GemmMode::Fixed(fixed.clone()))?,
                ),
            };
            Ok(vec![
                Value::from(m),
                Value::from(k),
                Value::from(n),
                Value::from(mode_name),
                Value::from(result.geometry.label()),
                Value::from(result.operational_intensity),
                Value::from(result.cycles),
                Value::from(result.achieved_flops),
                Value::from(result.utilization),
                Value::from(result.bound.to_string()),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((columns, rows))
}

// ---- stream_sweep ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StreamAxes {
    kernel: Vec<String>,
    #[serde(default = "default_access_axis")]
    access_bytes: Vec<u64>,
    #[serde(default = "default_unroll_axis")]
    unroll: Vec<u32>,
    #[serde(default = "default_extra_axis")]
    extra_ops: Vec<u32>,
    /// Defaults to all cores of the device under test.
    #[serde(default)]
    cores: Option<Vec<u32>>,
}

fn default_access_axis() -> Vec<u64> {
    vec![256]
}

fn default_unroll_axis() -> Vec<u32> {
    vec![1]
}

fn default_extra_axis() -> Vec<u32> {
    vec![0]
}

fn stream_rows(
    scenario: &ScenarioSpec,
    device: &DeviceSpec,
) -> Result<(Vec<String>, Vec<Vec<Value>>)> {
    let axes: StreamAxes = scenario.axes()?;
    let _: NoParams = scenario.params()?;
    let cores_axis = axes
        .cores
        .clone()
        .unwrap_or_else(|| vec![device.vector_engine.core_count]);
    non_empty(&scenario.name, "kernel", &axes.kernel)?;
    non_empty(&scenario.name, "access_bytes", &axes.access_bytes)?;
    non_empty(&scenario.name, "unroll", &axes.unroll)?;
    non_empty(&scenario.name, "extra_ops", &axes.extra_ops)?;
    non_empty(&scenario.name, "cores", &cores_axis)?;

    let mut inputs = Vec::new();
    for kernel in &axes.kernel {
        for &access in &axes.access_bytes {
            for &unroll in &axes.unroll {
                for &extra in &axes.extra_ops {
                    for &cores in &cores_axis {
                        inputs.push((kernel.clone(), access, unroll, extra, cores));
                    }
                }
            }
        }
    }
    let columns = vec![
        "kernel".to_string(),
        "access_bytes".into(),
        "unroll".into(),
        "extra_ops".into(),
        "cores".into(),
        "cycles_per_body".into(),
        "operational_intensity".into(),
        "achieved_flops".into(),
        "achieved_bandwidth".into(),
        "bound".into(),
    ];
    let rows = inputs
        .par_iter()
        .map(|(name, access, unroll, extra, cores)| {
            let kernel = VectorKernel::preset(name)?
                .with_access_bytes(*access)
                .with_unroll(*unroll)
                .with_extra_ops(*extra);
            let single = tpc::kernel_cycles(&kernel, device)?;
            let multi = tpc::multi_core(&kernel, device, *cores)?;
            Ok(vec![
                Value::from(name.as_str()),
                Value::from(*access),
                Value::from(*unroll),
                Value::from(*extra),
                Value::from(*cores),
                Value::from(single.cycles_per_body),
                Value::from(multi.operational_intensity),
                Value::from(multi.achieved_flops),
                Value::from(multi.achieved_bandwidth),
                Value::from(tpc_bound_name(multi.bound)),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((columns, rows))
}

/// Kinds without scalar params reject any `[params]` table.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

// ---- gather_sweep ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GatherAxes {
    vector_bytes: Vec<u64>,
    #[serde(default = "default_fraction_axis")]
    fraction: Vec<f64>,
    #[serde(default = "default_direction_axis")]
    direction: Vec<Direction>,
}

fn default_fraction_axis() -> Vec<f64> {
    vec![1.0]
}

fn default_direction_axis() -> Vec<Direction> {
    vec![Direction::Gather]
}

fn gather_rows(
    scenario: &ScenarioSpec,
    device: &DeviceSpec,
) -> Result<(Vec<String>, Vec<Vec<Value>>)> {
    let axes: GatherAxes = scenario.axes()?;
    let _: NoParams = scenario.params()?;
    non_empty(&scenario.name, "vector_bytes", &axes.vector_bytes)?;
    non_empty(&scenario.name, "fraction", &axes.fraction)?;
    non_empty(&scenario.name, "direction", &axes.direction)?;

    let mut inputs = Vec::new();
    for &bytes in &axes.vector_bytes {
        for &fraction in &axes.fraction {
            for &direction in &axes.direction {
                inputs.push((bytes, fraction, direction));
            }
        }
    }
    let columns = vec![
        "vector_bytes".to_string(),
        "fraction".into(),
        "direction".into(),
        "access_efficiency".into(),
        "utilization".into(),
        "useful_bytes_per_sec".into(),
        "fetched_bytes_per_sec".into(),
    ];
    let rows = inputs
        .par_iter()
        .map(|&(bytes, fraction, direction)| {
            let workload = GatherWorkload {
                num_vectors: 4_000_000,
                vector_bytes: bytes,
                fraction_accessed: fraction,
                direction,
                pattern: AccessPattern::Random,
            };
            let r = memory::gather_scatter_utilization(&workload, device)?;
            let eff = memory::access_efficiency(bytes, device.memory.min_access_granularity)?;
            Ok(vec![
                Value::from(bytes),
                Value::from(fraction),
                Value::from(direction.name()),
                Value::from(eff),
                Value::from(r.utilization),
                Value::from(r.useful_bytes_per_sec),
                Value::from(r.fetched_bytes_per_sec),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((columns, rows))
}

// ---- collective_sweep ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CollectiveAxes {
    collective: Vec<CollectiveKind>,
    payload_bytes: Vec<u64>,
    participants: Vec<u32>,
}

fn collective_rows(
    scenario: &ScenarioSpec,
    device: &DeviceSpec,
) -> Result<(Vec<String>, Vec<Vec<Value>>)> {
    let axes: CollectiveAxes = scenario.axes()?;
    let _: NoParams = scenario.params()?;
    non_empty(&scenario.name, "collective", &axes.collective)?;
    non_empty(&scenario.name, "payload_bytes", &axes.payload_bytes)?;
    non_empty(&scenario.name, "participants", &axes.participants)?;

    let mut inputs = Vec::new();
    for &kind in &axes.collective {
        for &payload in &axes.payload_bytes {
            for &participants in &axes.participants {
                inputs.push((kind, payload, participants));
            }
        }
    }
    let columns = vec![
        "collective".to_string(),
        "payload_bytes".into(),
        "participants".into(),
        "steps".into(),
        "time_s".into(),
        "algo_bandwidth".into(),
        "bus_bandwidth".into(),
        "utilization".into(),
    ];
    let rows = inputs
        .par_iter()
        .map(|&(kind, payload, participants)| {
            let r = interconnect::collective_time(device, kind, payload, participants)?;
            Ok(vec![
                Value::from(kind.name()),
                Value::from(payload),
                Value::from(participants),
                Value::from(r.steps),
                Value::from(r.time_s),
                Value::from(r.algo_bandwidth),
                Value::from(r.bus_bandwidth),
                Value::from(r.utilization),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((columns, rows))
}

// ---- embedding_sweep ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingAxes {
    layout: Vec<Layout>,
    tables: Vec<u32>,
    batch: Vec<u32>,
    vector_bytes: Vec<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingParams {
    pooling_factor: u32,
    #[serde(default = "default_rows_per_table")]
    rows_per_table: u64,
    #[serde(default = "default_gather_unroll")]
    unroll: u32,
}

fn default_rows_per_table() -> u64 {
    1 << 20
}

fn default_gather_unroll() -> u32 {
    4
}

fn embedding_rows(
    scenario: &ScenarioSpec,
    device: &DeviceSpec,
) -> Result<(Vec<String>, Vec<Vec<Value>>)> {
    let axes: EmbeddingAxes = scenario.axes()?;
    let params: EmbeddingParams = scenario.params()?;
    non_empty(&scenario.name, "layout", &axes.layout)?;
    non_empty(&scenario.name, "tables", &axes.tables)?;
    non_empty(&scenario.name, "batch", &axes.batch)?;
    non_empty(&scenario.name, "vector_bytes", &axes.vector_bytes)?;

    let mut inputs = Vec::new();
    for &layout in &axes.layout {
        for &tables in &axes.tables {
            for &batch in &axes.batch {
                for &vector_bytes in &axes.vector_bytes {
                    inputs.push((layout, tables, batch, vector_bytes));
                }
            }
        }
    }
    let columns = vec![
        "layout".to_string(),
        "tables".into(),
        "batch".into(),
        "vector_bytes".into(),
        "time_s".into(),
        "bandwidth_utilization".into(),
        "launches".into(),
        "achieved_bandwidth".into(),
    ];
    let rows = inputs
        .par_iter()
        .map(|&(layout, tables, batch, vector_bytes)| {
            let cfg = EmbeddingConfig {
                num_tables: tables,
                rows_per_table: params.rows_per_table,
                vector_bytes,
                pooling_factor: params.pooling_factor,
                batch,
                unroll: params.unroll,
            };
            let r = operators::embedding_lookup(layout, &cfg, device)?;
            Ok(vec![
                Value::from(layout.name()),
                Value::from(tables),
                Value::from(batch),
                Value::from(vector_bytes),
                Value::from(r.time_s),
                Value::from(r.bandwidth_utilization),
                Value::from(r.launches),
                Value::from(r.achieved_bandwidth),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((columns, rows))
}

// ---- paged_attention_sweep ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttentionAxes {
    variant: Vec<Variant>,
    batch: Vec<u32>,
    seq_len: Vec<u64>,
    #[serde(default = "default_padding_axis")]
    padded_fraction: Vec<f64>,
}

fn default_padding_axis() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttentionParams {
    #[serde(default = "default_block_size")]
    block_size: u64,
    #[serde(default = "default_head_dim")]
    head_dim: u64,
    #[serde(default = "default_query_heads")]
    num_query_heads: u32,
    #[serde(default = "default_kv_heads")]
    num_kv_heads: u32,
    #[serde(default = "default_element_bytes")]
    element_bytes: u64,
}

fn default_block_size() -> u64 {
    128
}

fn default_head_dim() -> u64 {
    128
}

fn default_query_heads() -> u32 {
    32
}

fn default_kv_heads() -> u32 {
    8
}

fn attention_rows(
    scenario: &ScenarioSpec,
    device: &DeviceSpec,
) -> Result<(Vec<String>, Vec<Vec<Value>>)> {
    let axes: AttentionAxes = scenario.axes()?;
    let params: AttentionParams = scenario.params()?;
    non_empty(&scenario.name, "variant", &axes.variant)?;
    non_empty(&scenario.name, "batch", &axes.batch)?;
    non_empty(&scenario.name, "seq_len", &axes.seq_len)?;
    non_empty(&scenario.name, "padded_fraction", &axes.padded_fraction)?;

    let mut inputs = Vec::new();
    for &variant in &axes.variant {
        for &batch in &axes.batch {
            for &seq_len in &axes.seq_len {
                for &z in &axes.padded_fraction {
                    inputs.push((variant, batch, seq_len, z));
                }
            }
        }
    }
    let columns = vec![
        "variant".to_string(),
        "batch".into(),
        "seq_len".into(),
        "padded_fraction".into(),
        "time_s".into(),
        "gather_time_s".into(),
        "gemm_time_s".into(),
        "overlap_achieved".into(),
        "tokens_per_sec".into(),
        "processed_blocks".into(),
    ];
    let rows = inputs
        .par_iter()
        .map(|&(variant, batch, seq_len, z)| {
            let cfg = PagedAttentionConfig {
                batch,
                seq_len,
                block_size: params.block_size,
                head_dim: params.head_dim,
                num_query_heads: params.num_query_heads,
                num_kv_heads: params.num_kv_heads,
                element_bytes: params.element_bytes,
                padded_fraction: z,
            };
            let r = operators::paged_attention(variant, &cfg, device)?;
            Ok(vec![
                Value::from(variant.name()),
                Value::from(batch),
                Value::from(seq_len),
                Value::from(z),
                Value::from(r.time_s),
                Value::from(r.gather_time_s),
                Value::from(r.gemm_time_s),
                Value::from(r.overlap_achieved),
                Value::from(r.tokens_per_sec),
                Value::from(r.processed_blocks),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((columns, rows))
}
