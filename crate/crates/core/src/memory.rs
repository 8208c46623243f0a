//! Random-access memory behavior: access granularity, gather/scatter
//! utilization, and the latency/concurrency (Little's-law) bandwidth cap.
//!
//! DRAM serves whole granules. A transfer of `s` bytes fetches
//! `ceil(s / granularity)` granules, so the useful fraction is
//! `s / (ceil(s / granularity) * granularity)`. Random (gather) traffic
//! additionally pays a device coefficient `beta` and, where the hardware
//! charges one, a fixed per-transaction overhead that mostly hurts small
//! transfers.

use serde::{Deserialize, Serialize};

use crate::device::DeviceSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Gather,
    Scatter,
}

impl Direction {
    pub fn name(&self) -> &'static str {
        match self {
            Direction::Gather => "gather",
            Direction::Scatter => "scatter",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessPattern {
    Random,
    Streaming,
}

/// One random-access microbenchmark: move `num_vectors * vector_bytes`
/// useful bytes from (or to) arbitrary addresses.
#[derive(Debug, Clone, Copy)]
pub struct GatherWorkload {
    pub num_vectors: u64,
    pub vector_bytes: u64,
    /// Share of the index space touched; affects totals, not rates.
    pub fraction_accessed: f64,
    pub direction: Direction,
    pub pattern: AccessPattern,
}

impl GatherWorkload {
    pub fn random(direction: Direction, vector_bytes: u64) -> GatherWorkload {
        GatherWorkload {
            num_vectors: 4_000_000,
            vector_bytes,
            fraction_accessed: 1.0,
            direction,
            pattern: AccessPattern::Random,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_vectors == 0 {
            return Err(Error::invalid("workload.num_vectors", "must be at least 1"));
        }
        if self.vector_bytes == 0 {
            return Err(Error::invalid("workload.vector_bytes", "must be at least 1"));
        }
        if !self.fraction_accessed.is_finite()
            || self.fraction_accessed <= 0.0
            || self.fraction_accessed > 1.0
        {
            return Err(Error::invalid(
                "workload.fraction_accessed",
                "must be in (0, 1]",
            ));
        }
        Ok(())
    }
}

/// Useful vs fetched rates of one workload.
#[derive(Debug, Clone, Copy)]
pub struct BandwidthResult {
    pub useful_bytes_per_sec: f64,
    pub fetched_bytes_per_sec: f64,
    /// Useful rate as a fraction of peak.
    pub utilization: f64,
}

/// Smallest granularity multiple covering `size_bytes`.
pub fn ceil_to_granularity(size_bytes: u64, granularity: u64) -> u64 {
    debug_assert!(granularity > 0);
    size_bytes.div_ceil(granularity) * granularity
}

/// Useful fraction of the bytes DRAM actually moves for one transfer.
pub fn access_efficiency(size_bytes: u64, granularity: u64) -> Result<f64> {
    if size_bytes == 0 {
        return Err(Error::invalid("size_bytes", "must be at least 1"));
    }
    if granularity == 0 {
        return Err(Error::invalid("granularity", "must be at least 1"));
    }
    Ok(size_bytes as f64 / ceil_to_granularity(size_bytes, granularity) as f64)
}

fn random_utilization(spec: &DeviceSpec, element_bytes: u64, beta: f64) -> Result<f64> {
    let mem = &spec.memory;
    let eff = access_efficiency(element_bytes, mem.min_access_granularity)?;
    let served = ceil_to_granularity(element_bytes, mem.min_access_granularity) as f64;
    let overhead_share = served / (served + mem.small_transfer_overhead_bytes);
    Ok(beta * eff * overhead_share)
}

/// Fraction of peak bandwidth random reads of `element_bytes` achieve.
pub fn gather_utilization(spec: &DeviceSpec, element_bytes: u64) -> Result<f64> {
    random_utilization(spec, element_bytes, spec.memory.random_access_beta)
}

/// Fraction of peak bandwidth random writes of `element_bytes` achieve.
pub fn scatter_utilization(spec: &DeviceSpec, element_bytes: u64) -> Result<f64> {
    random_utilization(spec, element_bytes, spec.memory.scatter_beta())
}

/// Achieved gather bandwidth in byte/s.
pub fn gather_bandwidth(spec: &DeviceSpec, element_bytes: u64) -> Result<f64> {
    Ok(gather_utilization(spec, element_bytes)? * spec.memory.peak_bandwidth)
}

/// Full workload rates: random traffic pays the granularity and beta
/// penalties, streaming traffic runs at the device's streaming share.
pub fn gather_scatter_utilization(
    workload: &GatherWorkload,
    spec: &DeviceSpec,
) -> Result<BandwidthResult> {
    workload.validate()?;
    let (utilization, efficiency) = match workload.pattern {
        AccessPattern::Random => {
            let util = match workload.direction {
                Direction::Gather => gather_utilization(spec, workload.vector_bytes)?,
                Direction::Scatter => scatter_utilization(spec, workload.vector_bytes)?,
            };
            let eff =
                access_efficiency(workload.vector_bytes, spec.memory.min_access_granularity)?;
            (util, eff)
        }
        AccessPattern::Streaming => (spec.calibration.stream_efficiency, 1.0),
    };
    let useful = utilization * spec.memory.peak_bandwidth;
    Ok(BandwidthResult {
        useful_bytes_per_sec: useful,
        fetched_bytes_per_sec: useful / efficiency,
        utilization,
    })
}

/// Little's law: sustained bandwidth of `outstanding` in-flight transfers of
/// `transfer_bytes` each against the device's mean round-trip latency,
/// clamped at peak. Transfers round up to the access granularity.
pub fn littles_law_bandwidth(
    spec: &DeviceSpec,
    outstanding: u64,
    transfer_bytes: u64,
) -> Result<f64> {
    if outstanding == 0 {
        return Err(Error::invalid("outstanding", "must be at least 1"));
    }
    if transfer_bytes == 0 {
        return Err(Error::invalid("transfer_bytes", "must be at least 1"));
    }
    let served = ceil_to_granularity(transfer_bytes, spec.memory.min_access_granularity) as f64;
    let demanded = outstanding as f64 * served / spec.memory.mean_latency;
    Ok(demanded.min(spec.memory.peak_bandwidth))
}
