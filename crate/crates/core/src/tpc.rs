//! VLIW vector-core (TPC-style) kernel model.
//!
//! A kernel body is one unrolled loop iteration: each logical stream access
//! touches `access_bytes`, split into `r = ceil(access_bytes / vector_width)`
//! vector instructions. Per body the core pays the worst of three prices:
//! load/store issue, vector issue, and the dependency chain
//! `latency * stages * r` that serializes load -> compute -> store when the
//! unroll factor exposes no independent work. Unrolling multiplies the issue
//! terms but not the chain, which is how unrolled kernels hide latency.
//!
//! The engine peak assumes a pure multiply-accumulate mix (2 flop per lane
//! per cycle), so a kernel whose arithmetic instructions carry
//! `flops_per_instr` flops can reach at most `flops_per_instr / 2` of it.
//! `extra_ops_per_element` adds MAC-rated register arithmetic that raises
//! operational intensity without touching memory, which is how the sweep
//! kernels walk a workload from the bandwidth roof to the compute roof.
//!
//! Multi-core throughput is the per-core rate times the core count, clamped
//! by the mix ceiling and by the streaming share of HBM bandwidth.

use crate::device::DeviceSpec;
use crate::error::{Error, Result};

/// One streaming vector kernel, STREAM-style.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorKernel {
    /// Input streams per body.
    pub loads: u32,
    /// Output streams per body.
    pub stores: u32,
    /// Arithmetic vector instructions per element vector.
    pub compute_ops: u32,
    /// flop per element each arithmetic instruction performs:
    /// 1 for add/mul, 2 for a fused multiply-accumulate.
    pub flops_per_instr: u32,
    /// Extra MAC-rated register instructions per element vector; they add
    /// 2 flop per element each and raise operational intensity.
    pub extra_ops_per_element: u32,
    /// Independent bodies in flight.
    pub unroll: u32,
    /// Bytes touched per stream per body.
    pub access_bytes: u64,
    /// Bytes per element.
    pub element_bytes: u64,
}

impl VectorKernel {
    /// `c[i] = a[i] + b[i]`
    pub fn add() -> VectorKernel {
        VectorKernel::stream(2, 1, 1, 1)
    }

    /// `b[i] = alpha * c[i]`
    pub fn scale() -> VectorKernel {
        VectorKernel::stream(1, 1, 1, 1)
    }

    /// `a[i] = b[i] + alpha * c[i]`, a fused multiply-add per element.
    pub fn triad() -> VectorKernel {
        VectorKernel::stream(2, 1, 1, 2)
    }

    pub fn preset(name: &str) -> Result<VectorKernel> {
        match name {
            "add" => Ok(VectorKernel::add()),
            "scale" => Ok(VectorKernel::scale()),
            "triad" => Ok(VectorKernel::triad()),
            other => Err(Error::unknown("kernel preset", other)),
        }
    }

    fn stream(loads: u32, stores: u32, compute_ops: u32, flops_per_instr: u32) -> VectorKernel {
        VectorKernel {
            loads,
            stores,
            compute_ops,
            flops_per_instr,
            extra_ops_per_element: 0,
            unroll: 1,
            access_bytes: 256,
            element_bytes: 2,
        }
    }

    pub fn with_unroll(mut self, unroll: u32) -> VectorKernel {
        self.unroll = unroll;
        self
    }

    pub fn with_access_bytes(mut self, access_bytes: u64) -> VectorKernel {
        self.access_bytes = access_bytes;
        self
    }

    pub fn with_extra_ops(mut self, extra_ops_per_element: u32) -> VectorKernel {
        self.extra_ops_per_element = extra_ops_per_element;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.loads + self.stores + self.compute_ops == 0 {
            return Err(Error::invalid(
                "kernel",
                "needs at least one load, store or compute instruction",
            ));
        }
        if self.compute_ops > 0 && !(1..=2).contains(&self.flops_per_instr) {
            return Err(Error::invalid(
                "kernel.flops_per_instr",
                "must be 1 (add/mul) or 2 (multiply-accumulate)",
            ));
        }
        if self.unroll == 0 {
            return Err(Error::invalid("kernel.unroll", "must be at least 1"));
        }
        if self.element_bytes == 0 {
            return Err(Error::invalid("kernel.element_bytes", "must be at least 1"));
        }
        if self.access_bytes < self.element_bytes {
            return Err(Error::invalid(
                "kernel.access_bytes",
                "must cover at least one element",
            ));
        }
        Ok(())
    }

    /// Streams touched per body.
    pub fn streams(&self) -> u32 {
        self.loads + self.stores
    }

    /// flop per element including extra register arithmetic.
    pub fn flops_per_element(&self) -> f64 {
        (self.compute_ops * self.flops_per_instr + 2 * self.extra_ops_per_element) as f64
    }

    /// Effective flop per byte moved; zero for pure-copy kernels.
    pub fn operational_intensity(&self) -> f64 {
        if self.streams() == 0 {
            return 0.0;
        }
        self.flops_per_element() / (self.streams() as f64 * self.element_bytes as f64)
    }
}

/// Fraction of the MAC-rated engine peak the kernel's arithmetic mix can
/// reach: add/mul instructions leave half of every lane-cycle idle.
pub fn compute_bound_fraction(kernel: &VectorKernel) -> f64 {
    if kernel.compute_ops == 0 {
        return 0.0;
    }
    kernel.flops_per_instr as f64 / 2.0
}

/// Which price dominated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpcBound {
    /// Dependency chain: latency-bound, unroll too shallow.
    Dependency,
    LoadStoreIssue,
    VectorIssue,
    /// Streaming bandwidth share (multi-core only).
    Memory,
    /// Arithmetic-mix ceiling against the MAC-rated peak (multi-core only).
    ComputeMix,
}

#[derive(Debug, Clone, Copy)]
pub struct TpcResult {
    pub cycles_per_body: u64,
    pub flops_per_body: f64,
    pub bytes_per_body: f64,
    pub single_core_flops: f64,
    pub single_core_bandwidth: f64,
    pub bound: TpcBound,
}

/// Single-core cycle model.
pub fn kernel_cycles(kernel: &VectorKernel, spec: &DeviceSpec) -> Result<TpcResult> {
    kernel.validate()?;
    let ve = &spec.vector_engine;
    let r = kernel.access_bytes.div_ceil(ve.vector_width_bytes).max(1);
    let u = kernel.unroll as u64;

    let ls_ops = u * kernel.streams() as u64 * r;
    let ls_issue = ls_ops.div_ceil(ve.issue_slots.load_store_slots as u64);

    let v_ops = u * (kernel.compute_ops + kernel.extra_ops_per_element) as u64 * r;
    let v_issue = v_ops.div_ceil(ve.issue_slots.vector_slots as u64);

    let stages = (kernel.loads > 0) as u64
        + (kernel.compute_ops > 0) as u64
        + (kernel.stores > 0) as u64;
    let dependency = ve.instr_latency_cycles as u64 * stages * r;

    let cycles = ls_issue.max(v_issue).max(dependency);
    let bound = if cycles == dependency {
        TpcBound::Dependency
    } else if cycles == ls_issue {
        TpcBound::LoadStoreIssue
    } else {
        TpcBound::VectorIssue
    };

    let elements = kernel.access_bytes as f64 / kernel.element_bytes as f64;
    let flops_per_body = u as f64 * elements * kernel.flops_per_element();
    let bytes_per_body = (u * kernel.streams() as u64 * kernel.access_bytes) as f64;
    let per_cycle = ve.clock_hz() / cycles as f64;
    Ok(TpcResult {
        cycles_per_body: cycles,
        flops_per_body,
        bytes_per_body,
        single_core_flops: flops_per_body * per_cycle,
        single_core_bandwidth: bytes_per_body * per_cycle,
        bound,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct TpcMultiResult {
    pub achieved_flops: f64,
    pub achieved_bandwidth: f64,
    pub operational_intensity: f64,
    pub bound: TpcBound,
}

/// Aggregate throughput of `cores` cores running the kernel: the issue-rate
/// scaling, clamped by the arithmetic-mix ceiling and by the streaming share
/// of peak bandwidth.
pub fn multi_core(kernel: &VectorKernel, spec: &DeviceSpec, cores: u32) -> Result<TpcMultiResult> {
    if cores == 0 || cores > spec.vector_engine.core_count {
        return Err(Error::invalid(
            "cores",
            format!(
                "must be in 1..={}, got {cores}",
                spec.vector_engine.core_count
            ),
        ));
    }
    let single = kernel_cycles(kernel, spec)?;
    let oi = kernel.operational_intensity();

    let issue_flops = cores as f64 * single.single_core_flops;
    let mix_flops = compute_bound_fraction(kernel) * spec.vector_engine.aggregate_peak_flops;
    let mem_flops =
        spec.calibration.stream_efficiency * spec.memory.peak_bandwidth * oi;

    // Pure-copy kernels carry no flops; clamp on bandwidth alone.
    if single.flops_per_body == 0.0 {
        let issue_bw = cores as f64 * single.single_core_bandwidth;
        let cap = spec.calibration.stream_efficiency * spec.memory.peak_bandwidth;
        let (bw, bound) = if issue_bw <= cap {
            (issue_bw, single.bound)
        } else {
            (cap, TpcBound::Memory)
        };
        return Ok(TpcMultiResult {
            achieved_flops: 0.0,
            achieved_bandwidth: bw,
            operational_intensity: 0.0,
            bound,
        });
    }

    let (flops, bound) = [
        (issue_flops, single.bound),
        (mix_flops, TpcBound::ComputeMix),
        (mem_flops, TpcBound::Memory),
    ]
    .into_iter()
    .min_by(|a, b| a.0.total_cmp(&b.0))
    .unwrap();
    Ok(TpcMultiResult {
        achieved_flops: flops,
        achieved_bandwidth: flops / oi,
        operational_intensity: oi,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Engine;
    use crate::presets;

    fn gaudi2() -> DeviceSpec {
        presets::builtin_device("gaudi2").unwrap()
    }

    fn a100() -> DeviceSpec {
        presets::builtin_device("a100").unwrap()
    }

    #[test]
    fn preset_intensities_match_hand_values() {
        assert_eq!(VectorKernel::add().operational_intensity(), 1.0 / 6.0);
        assert_eq!(VectorKernel::scale().operational_intensity(), 1.0 / 4.0);
        assert_eq!(VectorKernel::triad().operational_intensity(), 2.0 / 6.0);
        assert!(VectorKernel::preset("copy").is_err());
    }

    #[test]
    fn unrolled_bodies_amortize_the_dependency_chain() {
        let spec = gaudi2();
        // Without unrolling every stream kernel hangs on the chain:
        // 4-cycle latency times three stages.
        let add1 = kernel_cycles(&VectorKernel::add(), &spec).unwrap();
        assert_eq!(add1.cycles_per_body, 12);
        assert_eq!(add1.bound, TpcBound::Dependency);

        // Eight-deep unrolling shifts add to the load/store slot (3 streams)
        // and scale to the same slot at 2 streams.
        let add8 = kernel_cycles(&VectorKernel::add().with_unroll(8), &spec).unwrap();
        assert_eq!(add8.cycles_per_body, 24);
        assert_eq!(add8.bound, TpcBound::LoadStoreIssue);
        let add_gain = add8.single_core_flops / add1.single_core_flops;
        assert_eq!(add_gain, 4.0);

        let scale1 = kernel_cycles(&VectorKernel::scale(), &spec).unwrap();
        let scale8 = kernel_cycles(&VectorKernel::scale().with_unroll(8), &spec).unwrap();
        assert_eq!(scale8.cycles_per_body, 16);
        let scale_gain = scale8.single_core_flops / scale1.single_core_flops;
        assert_eq!(scale_gain, 6.0);
        // Unrolling helps the two-stream kernel more.
        assert!(scale_gain > add_gain);
    }

    #[test]
    fn per_byte_cost_is_flat_at_and_above_vector_width() {
        let spec = gaudi2();
        let base = kernel_cycles(&VectorKernel::add().with_access_bytes(256), &spec).unwrap();
        let per_byte = base.cycles_per_body as f64 / 256.0;
        for access in [512u64, 1024, 4096, 65536] {
            let r = kernel_cycles(&VectorKernel::add().with_access_bytes(access), &spec).unwrap();
            assert_eq!(r.cycles_per_body as f64 / access as f64, per_byte);
        }
        // Sub-width accesses still pay full vector instructions.
        let narrow = kernel_cycles(&VectorKernel::add().with_access_bytes(64), &spec).unwrap();
        assert_eq!(narrow.cycles_per_body as f64 / 64.0, per_byte * 4.0);
    }

    #[test]
    fn mix_fractions_cap_the_compute_bound_kernels() {
        // With enough extra register MACs every preset leaves the memory
        // roof; the add/mul mix then saturates at exactly half of peak.
        for spec in [gaudi2(), a100()] {
            let agg = spec.vector_engine.aggregate_peak_flops;
            for (kernel, want) in [
                (VectorKernel::add(), 0.5),
                (VectorKernel::scale(), 0.5),
                (VectorKernel::triad(), 1.0),
            ] {
                assert_eq!(compute_bound_fraction(&kernel), want);
                let pumped = kernel.with_extra_ops(96).with_unroll(8);
                let r = multi_core(&pumped, &spec, spec.vector_engine.core_count).unwrap();
                let frac = r.achieved_flops / agg;
                assert!(
                    (frac - want).abs() < 1e-9,
                    "{} {kernel:?}: {frac}",
                    spec.name
                );
            }
        }
    }

    #[test]
    fn stream_plateaus_hit_the_bandwidth_share() {
        let spec = gaudi2();
        let cap = 0.80 * 2.46e12;
        for (kernel, oi) in [
            (VectorKernel::add().with_unroll(4), 1.0 / 6.0),
            (VectorKernel::scale().with_unroll(4), 1.0 / 4.0),
            (VectorKernel::triad().with_unroll(4), 1.0 / 3.0),
        ] {
            let r = multi_core(&kernel, &spec, 24).unwrap();
            assert_eq!(r.bound, TpcBound::Memory);
            assert!((r.achieved_bandwidth - cap).abs() < 1e-3);
            assert!((r.achieved_flops - cap * oi).abs() < 1.0);
        }
        // Frozen plateau values, in flop/s.
        let triad = multi_core(&VectorKernel::triad().with_unroll(4), &spec, 24).unwrap();
        assert!((triad.achieved_flops - 656e9).abs() < 1e9);
    }

    #[test]
    fn core_scaling_is_linear_until_the_cap() {
        let spec = gaudi2();
        let kernel = VectorKernel::triad().with_unroll(4);
        let one = multi_core(&kernel, &spec, 1).unwrap();
        assert_eq!(one.bound, TpcBound::Dependency);
        let two = multi_core(&kernel, &spec, 2).unwrap();
        assert_eq!(two.achieved_flops, 2.0 * one.achieved_flops);
        let mut prev = 0.0;
        for cores in 1..=24 {
            let r = multi_core(&kernel, &spec, cores).unwrap();
            assert!(r.achieved_flops >= prev);
            prev = r.achieved_flops;
        }
    }

    #[test]
    fn stream_identity_ties_flops_to_bytes() {
        let spec = gaudi2();
        for kernel in [VectorKernel::add(), VectorKernel::scale(), VectorKernel::triad()] {
            for cores in [1u32, 7, 24] {
                let r = multi_core(&kernel.with_unroll(3), &spec, cores).unwrap();
                let oi = kernel.operational_intensity();
                assert!((r.achieved_flops / r.achieved_bandwidth - oi).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn multi_core_respects_the_vector_roofline() {
        let spec = gaudi2();
        for extra in [0u32, 1, 4, 16, 96] {
            for kernel in [VectorKernel::add(), VectorKernel::triad()] {
                let k = kernel.with_extra_ops(extra).with_unroll(8);
                let r = multi_core(&k, &spec, 24).unwrap();
                let roof =
                    crate::device::attainable_flops(&spec, r.operational_intensity, Engine::Vector)
                        .unwrap();
                assert!(r.achieved_flops <= roof.attainable_flops * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn throughput_is_monotone_in_unroll() {
        let spec = gaudi2();
        for kernel in [VectorKernel::add(), VectorKernel::scale(), VectorKernel::triad()] {
            let mut prev = 0.0;
            for unroll in 1..=16 {
                let r = kernel_cycles(&kernel.with_unroll(unroll), &spec).unwrap();
                assert!(
                    r.single_core_flops >= prev * (1.0 - 1e-12),
                    "unroll {unroll} regressed"
                );
                prev = r.single_core_flops;
            }
        }
    }

    #[test]
    fn invalid_kernels_are_rejected() {
        let spec = gaudi2();
        let empty = VectorKernel {
            loads: 0,
            stores: 0,
            compute_ops: 0,
            flops_per_instr: 1,
            extra_ops_per_element: 0,
            unroll: 1,
            access_bytes: 256,
            element_bytes: 2,
        };
        assert!(kernel_cycles(&empty, &spec).is_err());
        assert!(kernel_cycles(&VectorKernel::add().with_unroll(0), &spec).is_err());
        let bad_mix = VectorKernel {
            flops_per_instr: 3,
            ..VectorKernel::add()
        };
        assert!(kernel_cycles(&bad_mix, &spec).is_err());
        assert!(multi_core(&VectorKernel::add(), &spec, 0).is_err());
        assert!(multi_core(&VectorKernel::add(), &spec, 25).is_err());
    }
}
