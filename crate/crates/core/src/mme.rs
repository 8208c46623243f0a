//! Output-stationary systolic GEMM model for the matrix engine.
//!
//! A geometry is a set of identical MAC rectangles. The output grid is cut
//! into `ceil(m/h) x ceil(n/w)` tiles, distributed evenly across units
//! (remainder to lower-indexed units). Each tile accumulates over the full
//! K extent, so a tile costs `k` cycles; the systolic fill (`h + w - 1`
//! cycles under the `h_plus_w` fill model) is charged once per unit because
//! consecutive tiles overlap drain with fill. K is never split: partial
//! products stay inside the array.
//!
//! Reported utilization is normalized to the full-array peak, and the
//! achieved rate is additionally capped by the bandwidth roofline at the
//! GEMM's operational intensity (scaled by the fitted
//! `gemm_memory_efficiency`).

use crate::device::{Bound, DeviceSpec, FillModel};
use crate::error::{Error, Result};

/// GEMM problem: C[m,n] += A[m,k] * B[k,n], `element_bytes` per element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GemmShape {
    pub m: u64,
    pub k: u64,
    pub n: u64,
    pub element_bytes: u64,
}

impl GemmShape {
    /// Shape with the 2-byte default element.
    pub fn new(m: u64, k: u64, n: u64) -> GemmShape {
        GemmShape { m, k, n, element_bytes: 2 }
    }

    pub fn with_element_bytes(mut self, element_bytes: u64) -> GemmShape {
        self.element_bytes = element_bytes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("m", self.m), ("k", self.k), ("n", self.n)] {
            if v == 0 {
                return Err(Error::invalid(format!("shape.{field}"), "must be at least 1"));
            }
        }
        if self.element_bytes == 0 {
            return Err(Error::invalid("shape.element_bytes", "must be at least 1"));
        }
        Ok(())
    }

    pub fn total_flops(&self) -> f64 {
        2.0 * self.m as f64 * self.n as f64 * self.k as f64
    }

    /// flop/byte when A, B and C each move once.
    pub fn operational_intensity(&self) -> f64 {
        let (m, k, n) = (self.m as f64, self.k as f64, self.n as f64);
        self.total_flops() / (self.element_bytes as f64 * (m * k + k * n + m * n))
    }
}

/// One active MAC rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacUnit {
    pub height: u64,
    pub width: u64,
}

/// A matrix-engine configuration: `units` identical MAC rectangles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacGeometry {
    pub unit_count: u32,
    pub unit: MacUnit,
}

impl MacGeometry {
    pub fn new(unit_count: u32, height: u64, width: u64) -> MacGeometry {
        MacGeometry { unit_count, unit: MacUnit { height, width } }
    }

    pub fn units(&self) -> impl Iterator<Item = MacUnit> + '_ {
        std::iter::repeat_n(self.unit, self.unit_count as usize)
    }

    pub fn total_macs(&self) -> u64 {
        self.unit_count as u64 * self.unit.height * self.unit.width
    }

    /// Label of the form `2x256x256` (count x height x width).
    pub fn label(&self) -> String {
        format!("{}x{}x{}", self.unit_count, self.unit.height, self.unit.width)
    }

    /// Parses a `count x height x width` label.
    pub fn parse_label(label: &str) -> Result<MacGeometry> {
        let parts: Vec<&str> = label.split('x').collect();
        let err = || Error::invalid("geometry", format!("expected CxHxW label, got `{label}`"));
        if parts.len() != 3 {
            return Err(err());
        }
        let count: u32 = parts[0].trim().parse().map_err(|_| err())?;
        let height: u64 = parts[1].trim().parse().map_err(|_| err())?;
        let width: u64 = parts[2].trim().parse().map_err(|_| err())?;
        if count == 0 || height == 0 || width == 0 {
            return Err(err());
        }
        Ok(MacGeometry::new(count, height, width))
    }
}

/// How `gemm_perf` picks the geometry.
#[derive(Debug, Clone)]
pub enum GemmMode {
    /// Pick the fastest menu geometry.
    Configurable,
    /// Use the given geometry as-is.
    Fixed(MacGeometry),
}

#[derive(Debug, Clone)]
pub struct GemmResult {
    /// Effective cycles at the matrix-engine clock, including any
    /// memory-bound stretch beyond the compute makespan.
    pub cycles: f64,
    /// Compute-only makespan of the slowest unit, in cycles.
    pub makespan_cycles: f64,
    pub achieved_flops: f64,
    /// `achieved_flops / matrix_peak_flops`.
    pub utilization: f64,
    pub bound: Bound,
    pub geometry: MacGeometry,
    pub operational_intensity: f64,
}

/// The geometry menu of a device, in deterministic order: the native
/// arrangement first, then full-budget merged shapes (tallest first), then
/// single-unit power-of-two sub-rectangles (largest first, tallest first).
/// Non-configurable engines expose only the native arrangement.
pub fn enumerate_geometries(spec: &DeviceSpec) -> Vec<MacGeometry> {
    let me = &spec.matrix_engine;
    if let Some(menu) = &me.menu {
        return menu
            .iter()
            .map(|e| MacGeometry::new(e.count, e.height, e.width))
            .collect();
    }
    let identity = MacGeometry::new(me.unit_count, me.unit_height, me.unit_width);
    if !me.configurable {
        return vec![identity];
    }
    let budget = me.mac_budget();
    let min_dim = me.min_geometry_dim;
    let mut menu = vec![identity.clone()];

    // Merged full-budget shapes with both dimensions at least min_dim.
    let mut merged = Vec::new();
    let mut h = min_dim;
    while h.saturating_mul(min_dim) <= budget {
        if budget.is_multiple_of(h) {
            let w = budget / h;
            if w >= min_dim {
                merged.push(MacGeometry::new(1, h, w));
            }
        }
        match h.checked_mul(2) {
            Some(next) => h = next,
            None => break,
        }
    }
    merged.sort_by_key(|g| std::cmp::Reverse(g.unit.height));
    merged.retain(|g| *g != identity);
    menu.extend(merged);

    // Power-of-two sub-rectangles of a single unit.
    let mut subs = Vec::new();
    let mut sh = me.unit_height;
    while sh >= min_dim {
        let mut sw = me.unit_width;
        while sw >= min_dim {
            let g = MacGeometry::new(1, sh, sw);
            if g != identity && !menu.contains(&g) {
                subs.push(g);
            }
            sw /= 2;
        }
        sh /= 2;
    }
    subs.sort_by(|a, b| {
        b.total_macs()
            .cmp(&a.total_macs())
            .then(b.unit.height.cmp(&a.unit.height))
    });
    menu.extend(subs);
    menu
}

/// Cycle and throughput model for one shape on one geometry.
pub fn gemm_cycles(shape: &GemmShape, geometry: &MacGeometry, spec: &DeviceSpec) -> Result<GemmResult> {
    shape.validate()?;
    if geometry.unit_count == 0 || geometry.unit.height == 0 || geometry.unit.width == 0 {
        return Err(Error::invalid("geometry", "counts and dimensions must be at least 1"));
    }
    if geometry.total_macs() > spec.matrix_engine.mac_budget() {
        return Err(Error::invalid(
            "geometry",
            format!(
                "{} MACs exceed the device budget of {}",
                geometry.total_macs(),
                spec.matrix_engine.mac_budget()
            ),
        ));
    }

    let (h, w) = (geometry.unit.height, geometry.unit.width);
    let tiles = shape.m.div_ceil(h) * shape.n.div_ceil(w);
    let tiles_on_busiest = tiles.div_ceil(geometry.unit_count as u64);
    let fill = match spec.calibration.mme_fill_model {
        FillModel::None => 0,
        FillModel::HPlusW => h + w - 1,
    };
    let makespan = (tiles_on_busiest * shape.k + fill) as f64;

    let budget = spec.matrix_engine.mac_budget() as f64;
    let ideal_cycles = shape.m as f64 * shape.n as f64 * shape.k as f64 / budget;
    let compute_flops = ideal_cycles / makespan * spec.matrix_peak_flops;

    let oi = shape.operational_intensity();
    let memory_flops =
        spec.calibration.gemm_memory_efficiency * oi * spec.memory.peak_bandwidth;

    let (achieved, bound) = if memory_flops < compute_flops {
        (memory_flops, Bound::Memory)
    } else {
        (compute_flops, Bound::Compute)
    };
    Ok(GemmResult {
        cycles: makespan * (compute_flops / achieved),
        makespan_cycles: makespan,
        achieved_flops: achieved,
        utilization: achieved / spec.matrix_peak_flops,
        bound,
        geometry: geometry.clone(),
        operational_intensity: oi,
    })
}

/// Fastest menu geometry for a shape. Ties prefer fewer active MACs, then
/// the taller unit, then menu order.
pub fn select_geometry(shape: &GemmShape, spec: &DeviceSpec) -> Result<GemmResult> {
    let mut best: Option<GemmResult> = None;
    for geometry in enumerate_geometries(spec) {
        let cand = gemm_cycles(shape, &geometry, spec)?;
        best = Some(match best {
            None => cand,
            Some(cur) => {
                let better = cand.cycles < cur.cycles
                    || (cand.cycles == cur.cycles
                        && (cand.geometry.total_macs() < cur.geometry.total_macs()
                            || (cand.geometry.total_macs() == cur.geometry.total_macs()
                                && cand.geometry.unit.height > cur.geometry.unit.height)));
                if better {
                    cand
                } else {
                    cur
                }
            }
        });
    }
    best.ok_or_else(|| Error::invalid("matrix_engine.menu", "empty geometry menu"))
}

/// GEMM performance under the given selection mode.
pub fn gemm_perf(shape: &GemmShape, spec: &DeviceSpec, mode: &GemmMode) -> Result<GemmResult> {
    match mode {
        GemmMode::Configurable => select_geometry(shape, spec),
        GemmMode::Fixed(geometry) => gemm_cycles(shape, geometry, spec),
    }
}

/// Compute-only makespan minimum over the menu, ignoring the bandwidth cap.
/// Used by operator models that account for memory traffic themselves.
pub fn min_compute_makespan(shape: &GemmShape, spec: &DeviceSpec) -> Result<(MacGeometry, f64)> {
    let mut best: Option<(MacGeometry, f64)> = None;
    for geometry in enumerate_geometries(spec) {
        let r = gemm_cycles(shape, &geometry, spec)?;
        if best.as_ref().is_none_or(|(_, c)| r.makespan_cycles < *c) {
            best = Some((geometry, r.makespan_cycles));
        }
    }
    best.ok_or_else(|| Error::invalid("matrix_engine.menu", "empty geometry menu"))
}
