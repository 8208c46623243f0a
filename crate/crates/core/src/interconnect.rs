//! Alpha-beta model of intra-node collectives on ring schedules.
//!
//! A ring all-reduce over `n` devices runs `2(n-1)` steps (reduce-scatter
//! then all-gather), moving `2 * P * (n-1) / n` bytes per device for a
//! `P`-byte payload; the single-phase collectives take `n-1` steps and
//! `P * (n-1) / n` bytes. Each step pays the device's launch/sync alpha.
//!
//! On a point-to-point mesh the per-device bandwidth grows with the
//! participant count because every peer adds wired links; on a switched
//! fabric it is flat. Utilization is reported against the full-node
//! bandwidth, which is what makes small mesh groups look poor: the links to
//! idle peers cannot help the ring.

use serde::{Deserialize, Serialize};

use crate::device::{DeviceSpec, TopologyVariant};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectiveKind {
    AllReduce,
    AllGather,
    ReduceScatter,
    AllToAll,
    Reduce,
    Broadcast,
}

impl CollectiveKind {
    pub const ALL: [CollectiveKind; 6] = [
        CollectiveKind::AllReduce,
        CollectiveKind::AllGather,
        CollectiveKind::ReduceScatter,
        CollectiveKind::AllToAll,
        CollectiveKind::Reduce,
        CollectiveKind::Broadcast,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CollectiveKind::AllReduce => "all_reduce",
            CollectiveKind::AllGather => "all_gather",
            CollectiveKind::ReduceScatter => "reduce_scatter",
            CollectiveKind::AllToAll => "all_to_all",
            CollectiveKind::Reduce => "reduce",
            CollectiveKind::Broadcast => "broadcast",
        }
    }

    /// Ring steps for `n` participants.
    pub fn steps(&self, n: u32) -> u32 {
        match self {
            CollectiveKind::AllReduce => 2 * (n - 1),
            _ => n - 1,
        }
    }

    /// Bytes each device moves per payload byte.
    pub fn traffic_factor(&self, n: u32) -> f64 {
        let n = n as f64;
        match self {
            CollectiveKind::AllReduce => 2.0 * (n - 1.0) / n,
            CollectiveKind::AllGather | CollectiveKind::ReduceScatter | CollectiveKind::AllToAll => {
                (n - 1.0) / n
            }
            CollectiveKind::Reduce | CollectiveKind::Broadcast => 1.0,
        }
    }

    /// Payload-to-wire scaling used for the bus-bandwidth figure of merit;
    /// equal to the traffic factor on a ring.
    pub fn bus_factor(&self, n: u32) -> f64 {
        self.traffic_factor(n)
    }
}

impl std::fmt::Display for CollectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CollectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<CollectiveKind> {
        CollectiveKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::unknown("collective", s))
    }
}

/// Unidirectional per-device bandwidth available to a group of
/// `participants` devices.
pub fn per_device_bandwidth(spec: &DeviceSpec, participants: u32) -> Result<f64> {
    validate_participants(spec, participants)?;
    let ic = &spec.interconnect;
    match ic.variant {
        TopologyVariant::P2pMesh => Ok(ic.mesh_links_per_pair()?
            * (participants as f64 - 1.0)
            * ic.mesh_link_bandwidth()?),
        TopologyVariant::Switched => ic.switched_bandwidth(),
    }
}

fn validate_participants(spec: &DeviceSpec, participants: u32) -> Result<()> {
    if participants < 2 || participants > spec.interconnect.node_size {
        return Err(Error::invalid(
            "participants",
            format!(
                "must be in 2..={}, got {participants}",
                spec.interconnect.node_size
            ),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct CollectiveResult {
    pub time_s: f64,
    pub steps: u32,
    /// Bytes each device puts on the wire.
    pub per_device_traffic_bytes: f64,
    /// Payload size over completion time.
    pub algo_bandwidth: f64,
    /// Topology-independent figure of merit: `bus_factor * payload / time`.
    pub bus_bandwidth: f64,
    /// Bus bandwidth relative to the full-node per-device bandwidth.
    pub utilization: f64,
}

/// Completion time and derived rates of one collective.
pub fn collective_time(
    spec: &DeviceSpec,
    kind: CollectiveKind,
    payload_bytes: u64,
    participants: u32,
) -> Result<CollectiveResult> {
    validate_participants(spec, participants)?;
    if payload_bytes == 0 {
        return Err(Error::invalid("payload_bytes", "must be at least 1"));
    }
    let bw = per_device_bandwidth(spec, participants)?;
    let node_bw = per_device_bandwidth(spec, spec.interconnect.node_size)?;

    let steps = kind.steps(participants);
    let traffic = kind.traffic_factor(participants) * payload_bytes as f64;
    let time = steps as f64 * spec.interconnect.alpha_latency + traffic / bw;
    let bus = kind.bus_factor(participants) * payload_bytes as f64 / time;
    Ok(CollectiveResult {
        time_s: time,
        steps,
        per_device_traffic_bytes: traffic,
        algo_bandwidth: payload_bytes as f64 / time,
        bus_bandwidth: bus,
        utilization: bus / node_bw,
    })
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

    fn zero_alpha(mut spec: DeviceSpec) -> DeviceSpec {
        spec.interconnect.alpha_latency = 0.0;
        spec
    }

    /// Ring-walk oracle: pass `1/n` chunks around the ring step by step and
    /// count what one device actually sends.
    fn ring_traffic(kind: CollectiveKind, payload: f64, n: u32) -> Option<f64> {
        let chunk = payload / n as f64;
        match kind {
            // Reduce-scatter phase sends n-1 chunks, all-gather phase again.
            CollectiveKind::AllReduce => Some(2.0 * (n - 1) as f64 * chunk),
            CollectiveKind::AllGather | CollectiveKind::ReduceScatter => {
                Some((n - 1) as f64 * chunk)
            }
            _ => None,
        }
    }

    #[test]
    fn traffic_matches_ring_walk() {
        for kind in [
            CollectiveKind::AllReduce,
            CollectiveKind::AllGather,
            CollectiveKind::ReduceScatter,
        ] {
            for n in 2..=8u32 {
                let want = ring_traffic(kind, 1.0, n).unwrap();
                let got = kind.traffic_factor(n);
                assert!((got - want).abs() < 1e-12, "{kind} n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn mesh_bandwidth_grows_with_participants() {
        let spec = gaudi2();
        assert_eq!(per_device_bandwidth(&spec, 2).unwrap(), 37.5e9);
        assert_eq!(per_device_bandwidth(&spec, 4).unwrap(), 112.5e9);
        assert_eq!(per_device_bandwidth(&spec, 8).unwrap(), 262.5e9);
        assert!(per_device_bandwidth(&spec, 1).is_err());
        assert!(per_device_bandwidth(&spec, 9).is_err());
    }

    #[test]
    fn switched_bandwidth_is_flat() {
        let spec = a100();
        for n in 2..=8 {
            assert_eq!(per_device_bandwidth(&spec, n).unwrap(), 300e9);
        }
    }

    #[test]
    fn asymptotic_bus_bandwidth_is_the_wire_rate() {
        // With alpha = 0 the ring keeps every link busy, so bus bandwidth
        // equals the per-device wire bandwidth for every collective.
        for spec in [zero_alpha(gaudi2()), zero_alpha(a100())] {
            for kind in CollectiveKind::ALL {
                for n in [2u32, 4, 8] {
                    let r = collective_time(&spec, kind, 1 << 28, n).unwrap();
                    let bw = per_device_bandwidth(&spec, n).unwrap();
                    let ratio = r.bus_bandwidth / bw;
                    assert!((ratio - 1.0).abs() < 1e-12, "{kind} n={n}: {ratio}");
                }
            }
        }
    }

    #[test]
    fn alpha_dominates_small_payloads() {
        let spec = gaudi2();
        let r = collective_time(&spec, CollectiveKind::AllReduce, 1, 8).unwrap();
        assert!((r.time_s - 14e-6) / 14e-6 < 1e-3);
        assert_eq!(r.steps, 14);
        let r = collective_time(&spec, CollectiveKind::AllGather, 1, 8).unwrap();
        assert_eq!(r.steps, 7);
    }

    #[test]
    fn single_phase_collectives_match_each_other() {
        let spec = gaudi2();
        let ag = collective_time(&spec, CollectiveKind::AllGather, 1 << 20, 8).unwrap();
        let rs = collective_time(&spec, CollectiveKind::ReduceScatter, 1 << 20, 8).unwrap();
        let a2a = collective_time(&spec, CollectiveKind::AllToAll, 1 << 20, 8).unwrap();
        assert_eq!(ag.time_s, rs.time_s);
        assert_eq!(ag.time_s, a2a.time_s);
        // All-reduce moves twice the bytes over twice the steps.
        let ar = collective_time(&spec, CollectiveKind::AllReduce, 1 << 20, 8).unwrap();
        assert_eq!(ar.time_s, 2.0 * ag.time_s);
    }

    #[test]
    fn time_is_monotone_in_payload_and_bounded_utilization() {
        for spec in [gaudi2(), a100()] {
            for kind in CollectiveKind::ALL {
                let mut prev_time = 0.0;
                for pow in 10..30 {
                    let r = collective_time(&spec, kind, 1u64 << pow, 8).unwrap();
                    assert!(r.time_s > prev_time);
                    assert!(r.utilization > 0.0 && r.utilization <= 1.0 + 1e-12);
                    prev_time = r.time_s;
                }
            }
        }
    }
}
