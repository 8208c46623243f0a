//! Embedding-lookup operator: SingleTable vs BatchedTable layouts.
//!
//! Both layouts move the same useful bytes, `T * B * P * vector_bytes`; they
//! differ in launch count and in how many gathers are in flight at once.
//! SingleTable launches one kernel per table, so only the batch's `B` offset
//! streams (times the per-core unroll) cover memory latency. BatchedTable
//! fuses all tables into one kernel over `T * B` offset streams, which both
//! amortizes the launch overhead and deepens the outstanding-request pool.
//! Achieved bandwidth per launch is the gather ceiling for the vector size,
//! capped below by Little's law when concurrency is too shallow.

use serde::{Deserialize, Serialize};

use crate::device::DeviceSpec;
use crate::error::{Error, Result};
use crate::memory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    SingleTable,
    BatchedTable,
}

impl Layout {
    pub fn name(&self) -> &'static str {
        match self {
            Layout::SingleTable => "single_table",
            Layout::BatchedTable => "batched_table",
        }
    }
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Layout> {
        match s {
            "single_table" => Ok(Layout::SingleTable),
            "batched_table" => Ok(Layout::BatchedTable),
            other => Err(Error::unknown("embedding layout", other)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EmbeddingConfig {
    pub num_tables: u32,
    pub rows_per_table: u64,
    pub vector_bytes: u64,
    /// Gathers per sample per table.
    pub pooling_factor: u32,
    pub batch: u32,
    /// Concurrent gathers each core keeps in flight.
    pub unroll: u32,
}

impl EmbeddingConfig {
    pub fn new(num_tables: u32, vector_bytes: u64, pooling_factor: u32, batch: u32) -> Self {
        EmbeddingConfig {
            num_tables,
            rows_per_table: 1 << 20,
            vector_bytes,
            pooling_factor,
            batch,
            unroll: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("num_tables", self.num_tables as u64),
            ("rows_per_table", self.rows_per_table),
            ("vector_bytes", self.vector_bytes),
            ("pooling_factor", self.pooling_factor as u64),
            ("batch", self.batch as u64),
            ("unroll", self.unroll as u64),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("embedding.{field}"), "must be at least 1"));
            }
        }
        if self.vector_bytes > 2048 {
            return Err(Error::invalid(
                "embedding.vector_bytes",
                "validated range ends at 2048",
            ));
        }
        Ok(())
    }

    /// Bytes the workload actually needs.
    pub fn useful_bytes(&self) -> f64 {
        self.num_tables as f64
            * self.batch as f64
            * self.pooling_factor as f64
            * self.vector_bytes as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EmbeddingResult {
    pub time_s: f64,
    /// Useful bytes over `time * peak_bandwidth`.
    pub bandwidth_utilization: f64,
    pub launches: u32,
    /// Per-launch gather bandwidth after the concurrency cap.
    pub achieved_bandwidth: f64,
}

/// Per-launch gather bandwidth: the random-access ceiling for this vector
/// size, unless too few outstanding gathers cover the memory latency.
fn per_launch_bandwidth(spec: &DeviceSpec, offsets: u64, unroll: u32, vector_bytes: u64) -> Result<f64> {
    let cores = spec.vector_engine.core_count as u64;
    let concurrent = cores.min(offsets) * unroll as u64;
    let ceiling = memory::gather_bandwidth(spec, vector_bytes)?;
    let littles = memory::littles_law_bandwidth(spec, concurrent, vector_bytes)?;
    Ok(ceiling.min(littles))
}

pub fn embedding_lookup(
    layout: Layout,
    cfg: &EmbeddingConfig,
    spec: &DeviceSpec,
) -> Result<EmbeddingResult> {
    cfg.validate()?;
    let launch = spec.calibration.kernel_launch_overhead;
    let per_table_bytes =
        cfg.batch as f64 * cfg.pooling_factor as f64 * cfg.vector_bytes as f64;

    let (time, launches, bandwidth) = match layout {
        Layout::SingleTable => {
            let bw = per_launch_bandwidth(spec, cfg.batch as u64, cfg.unroll, cfg.vector_bytes)?;
            let time = cfg.num_tables as f64 * (launch + per_table_bytes / bw);
            (time, cfg.num_tables, bw)
        }
        Layout::BatchedTable => {
            let offsets = cfg.num_tables as u64 * cfg.batch as u64;
            let bw = per_launch_bandwidth(spec, offsets, cfg.unroll, cfg.vector_bytes)?;
            let time = launch + cfg.num_tables as f64 * per_table_bytes / bw;
            (time, 1, bw)
        }
    };
    Ok(EmbeddingResult {
        time_s: time,
        bandwidth_utilization: cfg.useful_bytes() / (time * spec.memory.peak_bandwidth),
        launches,
        achieved_bandwidth: bandwidth,
    })
}
