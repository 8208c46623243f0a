//! Paged-attention decode operator: BlockTable vs BlockList index layouts.
//!
//! One decode step gathers KV-cache blocks and runs two batched GEMM passes
//! (QK^T and scores x V) plus a vector-engine softmax. The 2D BlockTable
//! layout is padded to the longest sequence, so it processes
//! `effectual / (1 - z)` blocks and drives the gather from per-sequence
//! rows, which on a staged device runs at the unbatched gather efficiency.
//! The 1D BlockList layout holds effectual blocks only, gathers them in one
//! batched pass, and overlaps gather with compute at the device's fitted
//! `pipeline_overlap`.
//!
//! Devices with `attention_staging = staged` copy blocks into a contiguous
//! staging buffer that the matrix engine streams back out; `inline` devices
//! fuse the gather into the attention kernel, paying the random-access
//! bandwidth inside the GEMM's memory floor instead.

use serde::{Deserialize, Serialize};

use crate::device::{AttentionStaging, DeviceSpec};
use crate::error::{Error, Result};
use crate::memory;
use crate::mme::{min_compute_makespan, GemmShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    BlockTable,
    BlockList,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::BlockTable => "block_table",
            Variant::BlockList => "block_list",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "block_table" => Ok(Variant::BlockTable),
            "block_list" => Ok(Variant::BlockList),
            other => Err(Error::unknown("attention variant", other)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PagedAttentionConfig {
    pub batch: u32,
    pub seq_len: u64,
    /// Tokens per KV-cache block.
    pub block_size: u64,
    pub head_dim: u64,
    pub num_query_heads: u32,
    pub num_kv_heads: u32,
    pub element_bytes: u64,
    /// Fraction of BlockTable entries that are zero padding.
    pub padded_fraction: f64,
}

impl PagedAttentionConfig {
    /// Llama-3.1-8B attention: 32 query heads, 8 KV heads, head dim 128.
    pub fn llama31_8b(batch: u32, seq_len: u64, padded_fraction: f64) -> Self {
        PagedAttentionConfig {
            batch,
            seq_len,
            block_size: 128,
            head_dim: 128,
            num_query_heads: 32,
            num_kv_heads: 8,
            element_bytes: 2,
            padded_fraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("batch", self.batch as u64),
            ("seq_len", self.seq_len),
            ("block_size", self.block_size),
            ("head_dim", self.head_dim),
            ("num_query_heads", self.num_query_heads as u64),
            ("num_kv_heads", self.num_kv_heads as u64),
            ("element_bytes", self.element_bytes),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("attention.{field}"), "must be at least 1"));
            }
        }
        if !self.num_query_heads.is_multiple_of(self.num_kv_heads) {
            return Err(Error::invalid(
                "attention.num_query_heads",
                "must be a multiple of num_kv_heads",
            ));
        }
        if !self.padded_fraction.is_finite()
            || !(0.0..1.0).contains(&self.padded_fraction)
        {
            return Err(Error::invalid(
                "attention.padded_fraction",
                "must be in [0, 1)",
            ));
        }
        Ok(())
    }

    /// KV blocks holding real data.
    pub fn effectual_blocks(&self) -> u64 {
        self.batch as u64 * self.seq_len.div_ceil(self.block_size)
    }

    /// Bytes of one block: K and V for every KV head.
    pub fn block_bytes(&self) -> u64 {
        self.block_size * self.num_kv_heads as u64 * self.head_dim * self.element_bytes * 2
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PagedAttentionResult {
    pub time_s: f64,
    pub gather_time_s: f64,
    pub gemm_time_s: f64,
    /// Fraction of the shorter phase hidden behind the longer one.
    pub overlap_achieved: f64,
    pub tokens_per_sec: f64,
    pub processed_blocks: f64,
}

/// One GEMM pass over all processed blocks: the per-block, per-KV-head
/// `group x dim` problems concatenate into one tall GEMM, floored by the
/// time to move the K (or V) half of every block.
fn gemm_pass(
    cfg: &PagedAttentionConfig,
    spec: &DeviceSpec,
    processed: f64,
    k: u64,
    n: u64,
    block_read_bw: f64,
) -> Result<f64> {
    let groups = cfg.num_query_heads as u64 / cfg.num_kv_heads as u64;
    let m = (processed * cfg.num_kv_heads as f64 * groups as f64).ceil() as u64;
    let shape = GemmShape {
        m: m.max(1),
        k,
        n,
        element_bytes: cfg.element_bytes,
    };
    let (_, cycles) = min_compute_makespan(&shape, spec)?;
    let compute = cycles / spec.matrix_clock_hz();
    let memory_floor = processed * cfg.block_bytes() as f64 / 2.0 / block_read_bw;
    Ok(compute.max(memory_floor))
}

pub fn paged_attention(
    variant: Variant,
    cfg: &PagedAttentionConfig,
    spec: &DeviceSpec,
) -> Result<PagedAttentionResult> {
    cfg.validate()?;
    let cal = &spec.calibration;
    let effectual = cfg.effectual_blocks() as f64;
    let processed = match variant {
        Variant::BlockTable => effectual / (1.0 - cfg.padded_fraction),
        Variant::BlockList => effectual,
    };
    let block_bytes = cfg.block_bytes();
    let total_bytes = processed * block_bytes as f64;

    let gather_bw = memory::gather_bandwidth(spec, block_bytes)?;
    let stream_bw = cal.stream_efficiency * spec.memory.peak_bandwidth;

    let (gather_time, block_read_bw) = match cal.attention_staging {
        AttentionStaging::Staged => {
            // Random reads plus the contiguous staging write; the padded
            // per-row path runs at the unbatched gather efficiency.
            let path_efficiency = match variant {
                Variant::BlockTable => cal.unbatched_gather_efficiency,
                Variant::BlockList => 1.0,
            };
            let t = (total_bytes / gather_bw + total_bytes / stream_bw) / path_efficiency;
            // The GEMM then streams the staged buffer.
            (t, stream_bw)
        }
        // Fused kernels read blocks in place at random-access bandwidth.
        AttentionStaging::Inline => (0.0, gather_bw),
    };

    let qk = gemm_pass(cfg, spec, processed, cfg.head_dim, cfg.block_size, block_read_bw)?;
    let sv = gemm_pass(cfg, spec, processed, cfg.block_size, cfg.head_dim, block_read_bw)?;
    // Softmax over the scores, three streaming passes on the vector cores.
    let scores = processed * cfg.num_query_heads as f64 * cfg.block_size as f64;
    let softmax = scores * 3.0 * cfg.element_bytes as f64 / stream_bw;
    let gemm_time = qk + sv + softmax;

    let (time, overlap) = match variant {
        Variant::BlockTable => (gather_time + gemm_time, 0.0),
        Variant::BlockList => {
            let overlap = cal.pipeline_overlap;
            let time = gather_time.max(gemm_time)
                + (1.0 - overlap) * gather_time.min(gemm_time);
            (time, overlap)
        }
    };
    Ok(PagedAttentionResult {
        time_s: time,
        gather_time_s: gather_time,
        gemm_time_s: gemm_time,
        overlap_achieved: overlap,
        tokens_per_sec: cfg.batch as f64 / time,
        processed_blocks: processed,
    })
}

/// Decode-throughput ratio of the best variant on `spec_a` over the best on
/// `spec_b`.
pub fn paged_attention_cross_device(
    cfg: &PagedAttentionConfig,
    spec_a: &DeviceSpec,
    spec_b: &DeviceSpec,
) -> Result<f64> {
    let best = |spec: &DeviceSpec| -> Result<f64> {
        let bt = paged_attention(Variant::BlockTable, cfg, spec)?;
        let bl = paged_attention(Variant::BlockList, cfg, spec)?;
        Ok(bt.tokens_per_sec.max(bl.tokens_per_sec))
    };
    Ok(best(spec_a)? / best(spec_b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn gaudi2() -> DeviceSpec {
        presets::builtin_device("gaudi2").unwrap()
    }

    fn a100() -> DeviceSpec {
        presets::builtin_device("a100").unwrap()
    }

    fn reference(z: f64) -> PagedAttentionConfig {
        PagedAttentionConfig::llama31_8b(32, 4096, z)
    }

    #[test]
    fn block_bytes_and_block_count() {
        let cfg = reference(0.0);
        assert_eq!(cfg.block_bytes(), 524_288);
        assert_eq!(cfg.effectual_blocks(), 32 * 32);
        let ragged = PagedAttentionConfig::llama31_8b(3, 130, 0.0);
        assert_eq!(ragged.effectual_blocks(), 3 * 2);
    }

    #[test]
    fn staged_phase_times_match_hand_arithmetic() {
        let spec = gaudi2();
        let bl = paged_attention(Variant::BlockList, &reference(0.0), &spec).unwrap();
        // 1024 blocks * 512 KiB: random read at 0.64 of peak plus the
        // staging write at the streaming share.
        let bytes = 1024.0 * 524_288.0;
        let want_gather = bytes / 1.5744e12 + bytes / 1.968e12;
        assert!((bl.gather_time_s - want_gather).abs() / want_gather < 1e-12);
        // Two memory-floored passes of half the bytes each plus softmax.
        let want_gemm = bytes / 1.968e12 + 1024.0 * 32.0 * 128.0 * 6.0 / 1.968e12;
        assert!((bl.gemm_time_s - want_gemm).abs() / want_gemm < 1e-12);
        assert_eq!(bl.overlap_achieved, 0.4);
        assert!((bl.time_s - 785.16e-6).abs() / 785.16e-6 < 1e-3);

        let bt = paged_attention(Variant::BlockTable, &reference(0.0), &spec).unwrap();
        assert_eq!(bt.overlap_achieved, 0.0);
        assert!((bt.gather_time_s - want_gather / 0.15).abs() / bt.gather_time_s < 1e-12);
        assert_eq!(bt.time_s, bt.gather_time_s + bt.gemm_time_s);
    }

    #[test]
    fn padding_speedup_lands_on_the_measured_band() {
        let spec = gaudi2();
        let speedup = |z: f64| {
            let bt = paged_attention(Variant::BlockTable, &reference(z), &spec).unwrap();
            let bl = paged_attention(Variant::BlockList, &reference(z), &spec).unwrap();
            bt.time_s / bl.time_s
        };
        let s0 = speedup(0.0);
        assert!((s0 - 5.575).abs() < 0.01, "z=0 speedup {s0}");
        let s9 = speedup(0.9);
        assert!((s9 - 55.75).abs() < 0.1, "z=0.9 speedup {s9}");
        // Strictly increasing in padding.
        let mut prev = 0.0;
        for z in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9] {
            let s = speedup(z);
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn inline_device_fuses_the_gather() {
        let spec = a100();
        let bt = paged_attention(Variant::BlockTable, &reference(0.0), &spec).unwrap();
        let bl = paged_attention(Variant::BlockList, &reference(0.0), &spec).unwrap();
        assert_eq!(bt.gather_time_s, 0.0);
        assert_eq!(bt.time_s, bl.time_s);
        // Padding still costs: the fused kernel reads padded blocks too.
        let padded = paged_attention(Variant::BlockTable, &reference(0.5), &spec).unwrap();
        assert!(padded.time_s > bt.time_s * 1.9);
    }

    #[test]
    fn cross_device_ratio_matches_frozen_value() {
        let ratio = paged_attention_cross_device(&reference(0.0), &gaudi2(), &a100()).unwrap();
        assert!((ratio - 0.494).abs() < 0.005, "ratio {ratio}");
        let unity = paged_attention_cross_device(&reference(0.0), &gaudi2(), &gaudi2()).unwrap();
        assert_eq!(unity, 1.0);
    }

    #[test]
    fn bandwidth_scaling_is_linear_when_memory_bound() {
        let spec = gaudi2();
        let mut fast = spec.clone();
        fast.memory.peak_bandwidth *= 2.0;
        let base = paged_attention(Variant::BlockList, &reference(0.0), &spec).unwrap();
        let doubled = paged_attention(Variant::BlockList, &reference(0.0), &fast).unwrap();
        let ratio = base.time_s / doubled.time_s;
        assert!((ratio - 2.0).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn overlap_zero_and_unit_path_efficiency_reduce_to_serial_composition() {
        let mut spec = gaudi2();
        spec.calibration.pipeline_overlap = 0.0;
        spec.calibration.unbatched_gather_efficiency = 1.0;
        let bt = paged_attention(Variant::BlockTable, &reference(0.0), &spec).unwrap();
        let bl = paged_attention(Variant::BlockList, &reference(0.0), &spec).unwrap();
        assert_eq!(bt.time_s, bl.time_s);
    }

    #[test]
    fn block_list_never_loses() {
        for spec in [gaudi2(), a100()] {
            for batch in [1u32, 8, 64] {
                for seq in [128u64, 1000, 8192] {
                    for z in [0.0, 0.25, 0.9] {
                        let cfg = PagedAttentionConfig::llama31_8b(batch, seq, z);
                        let bt = paged_attention(Variant::BlockTable, &cfg, &spec).unwrap();
                        let bl = paged_attention(Variant::BlockList, &cfg, &spec).unwrap();
                        assert!(bl.time_s <= bt.time_s * (1.0 + 1e-12));
                        assert!(bl.time_s >= bl.gather_time_s.max(bl.gemm_time_s) * (1.0 - 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let spec = gaudi2();
        let mut cfg = reference(1.0);
        assert!(paged_attention(Variant::BlockList, &cfg, &spec).is_err());
        cfg = reference(0.0);
        cfg.num_query_heads = 30;
        assert!(paged_attention(Variant::BlockList, &cfg, &spec).is_err());
        cfg = reference(0.0);
        cfg.block_size = 0;
        assert!(paged_attention(Variant::BlockList, &cfg, &spec).is_err());
    }
}
