//! Device specs and the roofline entry point.
//!
//! A [`DeviceSpec`] is pure data: engine peaks, memory parameters, the
//! interconnect wiring, and the calibration constants every model consumes.
//! Specs load from TOML with a fail-closed schema; unknown keys are errors.
//! All rates are SI base units (flop/s, byte/s, seconds, bytes).

use serde::{Deserialize, Serialize};

use crate::error::{require_fraction, require_positive, Error, Result};

/// Which execution engine a roofline question is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Matrix,
    Vector,
}

/// Which side of the roofline a point landed on. Ties count as compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Compute,
    Memory,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Compute => write!(f, "compute"),
            Bound::Memory => write!(f, "memory"),
        }
    }
}

/// One point on a device roofline.
#[derive(Debug, Clone, Copy)]
pub struct RooflinePoint {
    /// Operational intensity in flop/byte.
    pub operational_intensity: f64,
    /// Attainable throughput in flop/s.
    pub attainable_flops: f64,
    pub bound: Bound,
}

/// MAC-array structure of the matrix engine.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEngineSpec {
    pub unit_count: u32,
    pub unit_height: u64,
    pub unit_width: u64,
    /// Whether the units can be merged/reshaped into the geometry menu.
    pub configurable: bool,
    /// Smallest height or width a menu geometry may have.
    #[serde(default = "default_min_geometry_dim")]
    pub min_geometry_dim: u64,
    /// Explicit geometry menu override; the default menu is derived from the
    /// unit structure when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub menu: Option<Vec<GeometryEntry>>,
}

fn default_min_geometry_dim() -> u64 {
    128
}

/// One menu entry: `count` identical `height x width` MAC rectangles.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryEntry {
    pub count: u32,
    pub height: u64,
    pub width: u64,
}

impl MatrixEngineSpec {
    /// Total MAC budget of the device.
    pub fn mac_budget(&self) -> u64 {
        self.unit_count as u64 * self.unit_height * self.unit_width
    }
}

/// Issue-slot families of one vector core; one instruction per slot per cycle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssueSlots {
    pub load_store_slots: u32,
    pub vector_slots: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorEngineSpec {
    pub core_count: u32,
    pub vector_width_bytes: u64,
    pub instr_latency_cycles: u32,
    pub aggregate_peak_flops: f64,
    pub issue_slots: IssueSlots,
}

impl VectorEngineSpec {
    /// Clock equivalent chosen so that every core issuing a MAC vector
    /// instruction per vector slot per cycle (at the 2-byte reference
    /// element) reaches `aggregate_peak_flops` exactly.
    pub fn clock_hz(&self) -> f64 {
        let lanes = self.vector_width_bytes as f64 / 2.0;
        self.aggregate_peak_flops
            / (self.core_count as f64 * self.issue_slots.vector_slots as f64 * 2.0 * lanes)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemorySpec {
    pub peak_bandwidth: f64,
    /// Effective DRAM access quantum in bytes; fetches round up to it.
    pub min_access_granularity: u64,
    /// Fraction of peak reachable by granularity-aligned random access.
    pub random_access_beta: f64,
    /// Separate scatter coefficient; gather's beta is shared when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_access_beta_scatter: Option<f64>,
    /// Per-transaction overhead charged against small transfers, in bytes.
    pub small_transfer_overhead_bytes: f64,
    /// Mean memory round-trip latency in seconds, for the Little's-law cap.
    pub mean_latency: f64,
}

impl MemorySpec {
    pub fn scatter_beta(&self) -> f64 {
        self.random_access_beta_scatter
            .unwrap_or(self.random_access_beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyVariant {
    /// Point-to-point all-to-all mesh; per-device bandwidth grows with the
    /// number of participants.
    P2pMesh,
    /// Switched fabric; per-device bandwidth is flat.
    Switched,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub variant: TopologyVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links_per_pair: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_ports: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_device_bandwidth: Option<f64>,
    /// Per-step launch/sync latency of a collective, in seconds.
    pub alpha_latency: f64,
    /// Devices per node; also the normalization point for utilization.
    pub node_size: u32,
}

impl TopologySpec {
    fn mesh_field(&self, field: &'static str, value: Option<f64>) -> Result<f64> {
        value.ok_or_else(|| {
            Error::invalid(
                format!("interconnect.{field}"),
                "required for variant \"p2p_mesh\"",
            )
        })
    }

    pub(crate) fn mesh_links_per_pair(&self) -> Result<f64> {
        self.mesh_field("links_per_pair", self.links_per_pair.map(f64::from))
    }

    pub(crate) fn mesh_link_bandwidth(&self) -> Result<f64> {
        self.mesh_field("link_bandwidth", self.link_bandwidth)
    }

    pub(crate) fn switched_bandwidth(&self) -> Result<f64> {
        self.per_device_bandwidth.ok_or_else(|| {
            Error::invalid(
                "interconnect.per_device_bandwidth",
                "required for variant \"switched\"",
            )
        })
    }
}

/// How the matrix engine charges systolic fill time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillModel {
    /// No fill cost; pure streaming accumulation.
    None,
    /// `height + width - 1` cycles charged once per unit; consecutive tiles
    /// overlap drain with fill.
    HPlusW,
}

/// How attention kernels reach the KV blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionStaging {
    /// Vector cores gather blocks into an HBM staging buffer that the matrix
    /// engine then consumes.
    Staged,
    /// The attention kernel reads blocks in place; gather and math fused.
    Inline,
}

/// Fitted constants that tie the analytical models to measured hardware.
/// Every emitted report records them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    /// Fraction of peak bandwidth streaming vector kernels achieve.
    pub stream_efficiency: f64,
    /// Host-side cost of one kernel launch, in seconds.
    pub kernel_launch_overhead: f64,
    pub mme_fill_model: FillModel,
    /// GEMM memory-bound ceiling relative to the raw bandwidth roofline.
    #[serde(default = "default_one")]
    pub gemm_memory_efficiency: f64,
    #[serde(default = "default_staging")]
    pub attention_staging: AttentionStaging,
    /// Achieved gather/compute overlap of the pipelined attention path.
    pub pipeline_overlap: f64,
    /// Bandwidth fraction of the unbatched per-row gather path relative to
    /// the batched one.
    #[serde(default = "default_one")]
    pub unbatched_gather_efficiency: f64,
}

fn default_one() -> f64 {
    1.0
}

fn default_staging() -> AttentionStaging {
    AttentionStaging::Staged
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub name: String,
    pub matrix_peak_flops: f64,
    pub matrix_engine: MatrixEngineSpec,
    pub vector_engine: VectorEngineSpec,
    pub memory: MemorySpec,
    pub interconnect: TopologySpec,
    pub calibration: CalibrationSpec,
}

impl DeviceSpec {
    /// Parses and validates a spec. `origin` names the source in errors.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<DeviceSpec> {
        let spec: DeviceSpec =
            toml::from_str(text).map_err(|e| Error::parse(origin, e.message()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &std::path::Path) -> Result<DeviceSpec> {
        let text = std::fs::read_to_string(path)?;
        DeviceSpec::from_toml_str(&text, &path.display().to_string())
    }

    /// Matrix-engine clock equivalent: full-array MAC issue per cycle
    /// reaches `matrix_peak_flops` exactly.
    pub fn matrix_clock_hz(&self) -> f64 {
        self.matrix_peak_flops / (2.0 * self.matrix_engine.mac_budget() as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::invalid("name", "must not be empty"));
        }
        require_positive("matrix_peak_flops", self.matrix_peak_flops)?;

        let me = &self.matrix_engine;
        for (field, v) in [
            ("matrix_engine.unit_count", me.unit_count as u64),
            ("matrix_engine.unit_height", me.unit_height),
            ("matrix_engine.unit_width", me.unit_width),
            ("matrix_engine.min_geometry_dim", me.min_geometry_dim),
        ] {
            if v == 0 {
                return Err(Error::invalid(field, "must be at least 1"));
            }
        }
        if let Some(menu) = &me.menu {
            if menu.is_empty() {
                return Err(Error::invalid("matrix_engine.menu", "must not be empty"));
            }
            for (i, entry) in menu.iter().enumerate() {
                if entry.count == 0 || entry.height == 0 || entry.width == 0 {
                    return Err(Error::invalid(
                        format!("matrix_engine.menu[{i}]"),
                        "count, height and width must be at least 1",
                    ));
                }
                let macs = entry.count as u64 * entry.height * entry.width;
                if macs > me.mac_budget() {
                    return Err(Error::invalid(
                        format!("matrix_engine.menu[{i}]"),
                        "exceeds the device MAC budget",
                    ));
                }
            }
        }

        let ve = &self.vector_engine;
        if ve.core_count == 0 {
            return Err(Error::invalid("vector_engine.core_count", "must be at least 1"));
        }
        if ve.vector_width_bytes == 0 || !ve.vector_width_bytes.is_power_of_two() {
            return Err(Error::invalid(
                "vector_engine.vector_width_bytes",
                "must be a power of two",
            ));
        }
        if ve.instr_latency_cycles == 0 {
            return Err(Error::invalid(
                "vector_engine.instr_latency_cycles",
                "must be at least 1",
            ));
        }
        if ve.issue_slots.load_store_slots == 0 || ve.issue_slots.vector_slots == 0 {
            return Err(Error::invalid(
                "vector_engine.issue_slots",
                "slot counts must be at least 1",
            ));
        }
        require_positive("vector_engine.aggregate_peak_flops", ve.aggregate_peak_flops)?;

        let mem = &self.memory;
        require_positive("memory.peak_bandwidth", mem.peak_bandwidth)?;
        if mem.min_access_granularity == 0 || !mem.min_access_granularity.is_power_of_two() {
            return Err(Error::invalid(
                "memory.min_access_granularity",
                "must be a power of two",
            ));
        }
        require_fraction("memory.random_access_beta", mem.random_access_beta)?;
        if let Some(beta) = mem.random_access_beta_scatter {
            require_fraction("memory.random_access_beta_scatter", beta)?;
        }
        if !mem.small_transfer_overhead_bytes.is_finite() || mem.small_transfer_overhead_bytes < 0.0
        {
            return Err(Error::invalid(
                "memory.small_transfer_overhead_bytes",
                "must be non-negative",
            ));
        }
        require_positive("memory.mean_latency", mem.mean_latency)?;

        let ic = &self.interconnect;
        if !ic.alpha_latency.is_finite() || ic.alpha_latency < 0.0 {
            return Err(Error::invalid("interconnect.alpha_latency", "must be non-negative"));
        }
        if ic.node_size < 2 {
            return Err(Error::invalid("interconnect.node_size", "must be at least 2"));
        }
        match ic.variant {
            TopologyVariant::P2pMesh => {
                let links = ic.mesh_links_per_pair()?;
                require_positive("interconnect.link_bandwidth", ic.mesh_link_bandwidth()?)?;
                let ports = ic.total_ports.ok_or_else(|| {
                    Error::invalid("interconnect.total_ports", "required for variant \"p2p_mesh\"")
                })? as f64;
                // Every peer pair needs its links wired from the same port pool.
                if links * (ic.node_size as f64 - 1.0) > ports {
                    return Err(Error::invalid(
                        "interconnect.total_ports",
                        "links_per_pair * (node_size - 1) exceeds total_ports",
                    ));
                }
            }
            TopologyVariant::Switched => {
                require_positive(
                    "interconnect.per_device_bandwidth",
                    ic.switched_bandwidth()?,
                )?;
            }
        }

        let cal = &self.calibration;
        require_fraction("calibration.stream_efficiency", cal.stream_efficiency)?;
        if !cal.kernel_launch_overhead.is_finite() || cal.kernel_launch_overhead < 0.0 {
            return Err(Error::invalid(
                "calibration.kernel_launch_overhead",
                "must be non-negative",
            ));
        }
        require_fraction("calibration.gemm_memory_efficiency", cal.gemm_memory_efficiency)?;
        if !cal.pipeline_overlap.is_finite()
            || !(0.0..=1.0).contains(&cal.pipeline_overlap)
        {
            return Err(Error::invalid("calibration.pipeline_overlap", "must be in [0, 1]"));
        }
        require_fraction(
            "calibration.unbatched_gather_efficiency",
            cal.unbatched_gather_efficiency,
        )?;
        Ok(())
    }
}

/// Roofline: attainable throughput of `engine` at operational intensity
/// `oi`, `min(engine_peak, oi * peak_bandwidth)`. Ties tag compute.
pub fn attainable_flops(spec: &DeviceSpec, oi: f64, engine: Engine) -> Result<RooflinePoint> {
    if !oi.is_finite() || oi < 0.0 {
        return Err(Error::invalid(
            "operational_intensity",
            format!("must be non-negative, got {oi}"),
        ));
    }
    let peak = match engine {
        Engine::Matrix => self_peak(spec, Engine::Matrix),
        Engine::Vector => self_peak(spec, Engine::Vector),
    };
    let memory_roof = oi * spec.memory.peak_bandwidth;
    let (attainable, bound) = if memory_roof < peak {
        (memory_roof, Bound::Memory)
    } else {
        (peak, Bound::Compute)
    };
    Ok(RooflinePoint {
        operational_intensity: oi,
        attainable_flops: attainable,
        bound,
    })
}

fn self_peak(spec: &DeviceSpec, engine: Engine) -> f64 {
    match engine {
        Engine::Matrix => spec.matrix_peak_flops,
        Engine::Vector => spec.vector_engine.aggregate_peak_flops,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn bundled_specs_load_and_validate() {
        let g = presets::builtin_device("gaudi2").unwrap();
        assert_eq!(g.name, "gaudi2");
        assert_eq!(g.matrix_engine.mac_budget(), 131_072);
        let a = presets::builtin_device("a100").unwrap();
        assert_eq!(a.interconnect.variant, TopologyVariant::Switched);
    }

    #[test]
    fn roofline_memory_side() {
        // Streaming add at 2-byte elements: 1 flop per 6 bytes moved.
        let g = presets::builtin_device("gaudi2").unwrap();
        let p = attainable_flops(&g, 1.0 / 6.0, Engine::Vector).unwrap();
        assert_eq!(p.bound, Bound::Memory);
        assert!((p.attainable_flops - 2.46e12 / 6.0).abs() < 1e-3);
        assert!((p.attainable_flops - 0.41e12).abs() < 0.41e12 * 1e-2);
    }

    #[test]
    fn roofline_compute_side_and_tie() {
        let g = presets::builtin_device("gaudi2").unwrap();
        let p = attainable_flops(&g, 1e6, Engine::Matrix).unwrap();
        assert_eq!(p.bound, Bound::Compute);
        assert_eq!(p.attainable_flops, 432e12);

        // Exactly at the ridge the point counts as compute-bound.
        let ridge = 432e12 / 2.46e12;
        let p = attainable_flops(&g, ridge, Engine::Matrix).unwrap();
        assert_eq!(p.bound, Bound::Compute);
    }

    #[test]
    fn roofline_rejects_negative_oi() {
        let g = presets::builtin_device("gaudi2").unwrap();
        assert!(attainable_flops(&g, -1.0, Engine::Vector).is_err());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = presets::builtin_device_text("gaudi2").unwrap();
        let broken = text.replace("core_count = 24", "core_count = 24\nfrobnication = 3");
        let err = DeviceSpec::from_toml_str(&broken, "test").unwrap_err();
        assert!(err.to_string().contains("frobnication"), "{err}");
    }

    #[test]
    fn non_positive_quantity_is_rejected() {
        let text = presets::builtin_device_text("gaudi2").unwrap();
        let broken = text.replace("peak_bandwidth = 2.46e12", "peak_bandwidth = 0.0");
        let err = DeviceSpec::from_toml_str(&broken, "test").unwrap_err();
        assert!(err.to_string().contains("peak_bandwidth"), "{err}");
    }

    #[test]
    fn unknown_topology_variant_is_rejected() {
        let text = presets::builtin_device_text("gaudi2").unwrap();
        let broken = text.replace("variant = \"p2p_mesh\"", "variant = \"ring\"");
        let err = DeviceSpec::from_toml_str(&broken, "test").unwrap_err();
        assert!(err.to_string().contains("ring"), "{err}");
    }

    #[test]
    fn mesh_port_budget_is_enforced() {
        let text = presets::builtin_device_text("gaudi2").unwrap();
        let broken = text.replace("total_ports = 24", "total_ports = 20");
        let err = DeviceSpec::from_toml_str(&broken, "test").unwrap_err();
        assert!(err.to_string().contains("total_ports"), "{err}");
    }

    #[test]
    fn spec_roundtrips_numeric_fields_bit_exactly() {
        for name in ["gaudi2", "a100"] {
            let spec = presets::builtin_device(name).unwrap();
            let text = toml::to_string(&spec).unwrap();
            let back = DeviceSpec::from_toml_str(&text, "roundtrip").unwrap();
            assert_eq!(
                spec.matrix_peak_flops.to_bits(),
                back.matrix_peak_flops.to_bits()
            );
            assert_eq!(
                spec.memory.peak_bandwidth.to_bits(),
                back.memory.peak_bandwidth.to_bits()
            );
            assert_eq!(
                spec.memory.mean_latency.to_bits(),
                back.memory.mean_latency.to_bits()
            );
            assert_eq!(
                spec.calibration.stream_efficiency.to_bits(),
                back.calibration.stream_efficiency.to_bits()
            );
            assert_eq!(
                spec.interconnect.alpha_latency.to_bits(),
                back.interconnect.alpha_latency.to_bits()
            );
            assert_eq!(spec.vector_engine.clock_hz(), back.vector_engine.clock_hz());
        }
    }

    #[test]
    fn matrix_clock_matches_budget() {
        let g = presets::builtin_device("gaudi2").unwrap();
        let clock = g.matrix_clock_hz();
        assert!((clock * 2.0 * 131_072.0 - 432e12).abs() < 1.0);
    }
}
