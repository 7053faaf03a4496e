//! Zone grids, zone kinds and qubit occupancy.
//!
//! Zones are addressed either by grid coordinates `(i, j)` with
//! `i in 0..m` (the axis along the linear segments) and `j in 0..n`, or by a
//! linear index `i * n + j`. Junction zones sit on every `k`-th value of `i`
//! (the "junction tracks"), so vertical transport is only possible on those
//! tracks. Parity follows the checkerboard rule: zone `(i, j)` is odd iff
//! `i + j` is odd.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type QubitId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("qubits per junction must be at least 1")]
    InvalidQubitsPerJunction,
    #[error("at least 2 qubits are required, got {0}")]
    TooFewQubits(usize),
    #[error("grid must have at least one zone, got {m}x{n}")]
    EmptyGrid { m: usize, n: usize },
    #[error("zone count along the segment axis ({m}) is not a multiple of k = {k}")]
    NotMultipleOfK { m: usize, k: usize },
    #[error("zone {zone} is out of range for a grid of {zones} zones")]
    ZoneOutOfRange { zone: usize, zones: usize },
    #[error("occupancy lists {got} zones but the layout has {expected}")]
    ZoneCountMismatch { expected: usize, got: usize },
    #[error("qubit {0} appears more than once")]
    DuplicateQubit(QubitId),
    #[error("zone {zone} holds {count} qubits, more than allowed in {mode} mode")]
    ZoneOverfull {
        zone: usize,
        count: usize,
        mode: ChainMode,
    },
    #[error("junction zone {0} is occupied in chained mode")]
    JunctionOccupied(usize),
    #[error("zone {0} is not a chain storage zone")]
    NotChainHome(usize),
    #[error("chain storage needs k >= 2 and an even segment length (got m = {m}, k = {k})")]
    ChainsUnsupported { m: usize, k: usize },
    #[error("expected a {expected} configuration")]
    WrongMode { expected: ChainMode },
}

/// The four zone types of a realistic trap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZoneKind {
    GateOdd,
    GateEven,
    JunctionOdd,
    JunctionEven,
}

impl ZoneKind {
    fn from_parts(junction: bool, odd: bool) -> Self {
        match (junction, odd) {
            (false, true) => ZoneKind::GateOdd,
            (false, false) => ZoneKind::GateEven,
            (true, true) => ZoneKind::JunctionOdd,
            (true, false) => ZoneKind::JunctionEven,
        }
    }

    pub fn is_junction(self) -> bool {
        matches!(self, ZoneKind::JunctionOdd | ZoneKind::JunctionEven)
    }

    pub fn is_odd(self) -> bool {
        matches!(self, ZoneKind::GateOdd | ZoneKind::JunctionOdd)
    }

    /// Two-letter code used in grid dumps.
    pub fn code(self) -> &'static str {
        match self {
            ZoneKind::GateOdd => "GO",
            ZoneKind::GateEven => "GE",
            ZoneKind::JunctionOdd => "JO",
            ZoneKind::JunctionEven => "JE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectrodeCounts {
    pub dynamic_per_gate_zone: u64,
    pub dynamic_per_junction_zone: u64,
    pub shim_per_zone: u64,
}

impl Default for ElectrodeCounts {
    fn default() -> Self {
        ElectrodeCounts {
            dynamic_per_gate_zone: 10,
            dynamic_per_junction_zone: 20,
            shim_per_zone: 10,
        }
    }
}

/// Zone footprint and ion height, in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneGeometry {
    pub zone_x_um: u64,
    pub zone_y_um: u64,
    pub ion_height_um: u64,
}

impl ZoneGeometry {
    /// Square zones of ten ion heights on a side.
    pub fn from_ion_height(ion_height_um: u64) -> Self {
        ZoneGeometry {
            zone_x_um: 10 * ion_height_um,
            zone_y_um: 10 * ion_height_um,
            ion_height_um,
        }
    }

    pub fn zone_area_um2(&self) -> u64 {
        self.zone_x_um * self.zone_y_um
    }
}

impl Default for ZoneGeometry {
    fn default() -> Self {
        ZoneGeometry::from_ion_height(40)
    }
}

/// A pair of neighbouring zones along a segment that store one two-qubit
/// chain in `home` while the qubits are idle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSlot {
    pub home: usize,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapLayout {
    m: usize,
    n: usize,
    k: usize,
    electrodes: ElectrodeCounts,
    geometry: ZoneGeometry,
}

impl TrapLayout {
    pub fn new(
        m: usize,
        n: usize,
        k: usize,
        electrodes: ElectrodeCounts,
        geometry: ZoneGeometry,
    ) -> Result<Self, TopologyError> {
        if k == 0 {
            return Err(TopologyError::InvalidQubitsPerJunction);
        }
        if m == 0 || n == 0 {
            return Err(TopologyError::EmptyGrid { m, n });
        }
        if !m.is_multiple_of(k) {
            return Err(TopologyError::NotMultipleOfK { m, k });
        }
        Ok(TrapLayout {
            m,
            n,
            k,
            electrodes,
            geometry,
        })
    }

    /// A regular `m x n` array with one junction per qubit.
    pub fn regular(m: usize, n: usize) -> Result<Self, TopologyError> {
        Self::new(m, n, 1, ElectrodeCounts::default(), ZoneGeometry::default())
    }

    /// A linear chain of `len` zones.
    pub fn linear(len: usize) -> Result<Self, TopologyError> {
        Self::regular(len, 1)
    }

    /// Picks the grid that minimises the worst-case routing bound `2m + kn`
    /// subject to `m % k == 0` and `m * n >= target`.
    ///
    /// Ties go to the `m` closest to `sqrt(k * target / 2)`, then to the
    /// smaller zone count.
    pub fn build(
        target: usize,
        k: usize,
        electrodes: ElectrodeCounts,
        geometry: ZoneGeometry,
    ) -> Result<Self, TopologyError> {
        if k == 0 {
            return Err(TopologyError::InvalidQubitsPerJunction);
        }
        if target < 2 {
            return Err(TopologyError::TooFewQubits(target));
        }
        let ideal = ((k * target) as f64 / 2.0).sqrt();
        let mut best: Option<(usize, f64, usize, usize, usize)> = None;
        // Past m = target + k every column count is 1 and the bound only grows.
        let mut m = k;
        while m <= target + k {
            let n = target.div_ceil(m);
            let cand = (2 * m + k * n, (m as f64 - ideal).abs(), m * n, m, n);
            let better = match &best {
                None => true,
                Some(b) => {
                    cand.0 < b.0
                        || (cand.0 == b.0 && cand.1 < b.1)
                        || (cand.0 == b.0 && cand.1 == b.1 && cand.2 < b.2)
                }
            };
            if better {
                best = Some(cand);
            }
            m += k;
        }
        let (_, _, _, m, n) = best.expect("search range is never empty");
        Self::new(m, n, k, electrodes, geometry)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn electrodes(&self) -> &ElectrodeCounts {
        &self.electrodes
    }

    pub fn geometry(&self) -> &ZoneGeometry {
        &self.geometry
    }

    pub fn zone_count(&self) -> usize {
        self.m * self.n
    }

    pub fn junction_zone_count(&self) -> usize {
        self.n * self.m / self.k
    }

    pub fn gate_zone_count(&self) -> usize {
        self.zone_count() - self.junction_zone_count()
    }

    pub fn dynamic_electrode_count(&self) -> u64 {
        self.electrodes.dynamic_per_gate_zone * self.gate_zone_count() as u64
            + self.electrodes.dynamic_per_junction_zone * self.junction_zone_count() as u64
    }

    pub fn shim_electrode_count(&self) -> u64 {
        self.electrodes.shim_per_zone * self.zone_count() as u64
    }

    pub fn electrode_count(&self) -> u64 {
        self.dynamic_electrode_count() + self.shim_electrode_count()
    }

    /// Worst-case step bound of the realistic router, without slack.
    pub fn step_bound(&self) -> usize {
        2 * self.m + self.k * self.n
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.m && j < self.n);
        i * self.n + j
    }

    #[inline]
    pub fn coords(&self, zone: usize) -> (usize, usize) {
        (zone / self.n, zone % self.n)
    }

    pub fn is_junction_track(&self, i: usize) -> bool {
        i.is_multiple_of(self.k)
    }

    pub fn kind(&self, i: usize, j: usize) -> ZoneKind {
        ZoneKind::from_parts(self.is_junction_track(i), (i + j) % 2 == 1)
    }

    pub fn kind_of(&self, zone: usize) -> ZoneKind {
        let (i, j) = self.coords(zone);
        self.kind(i, j)
    }

    fn check_zone(&self, zone: usize) -> Result<(), TopologyError> {
        if zone >= self.zone_count() {
            return Err(TopologyError::ZoneOutOfRange {
                zone,
                zones: self.zone_count(),
            });
        }
        Ok(())
    }

    /// Grid 4-neighbourhood of `zone`, clipped at the boundary.
    pub fn neighbors(&self, zone: usize) -> Result<Vec<usize>, TopologyError> {
        self.check_zone(zone)?;
        let (i, j) = self.coords(zone);
        let mut out = Vec::with_capacity(4);
        if i > 0 {
            out.push(self.index(i - 1, j));
        }
        if i + 1 < self.m {
            out.push(self.index(i + 1, j));
        }
        if j > 0 {
            out.push(self.index(i, j - 1));
        }
        if j + 1 < self.n {
            out.push(self.index(i, j + 1));
        }
        Ok(out)
    }

    /// Neighbours reachable by a single swap: along segments everywhere,
    /// across segments only on junction tracks.
    pub fn transport_neighbors(&self, zone: usize) -> Result<Vec<usize>, TopologyError> {
        let (i, _) = self.coords(zone);
        let on_track = self.is_junction_track(i);
        Ok(self
            .neighbors(zone)?
            .into_iter()
            .filter(|&z| on_track || self.coords(z).0 != i)
            .collect())
    }

    /// Chain storage slots: zone pairs `(2p, 2p + 1)` along every segment,
    /// stored in whichever of the two is a gate zone (the right one when both
    /// are).
    pub fn chain_slots(&self) -> Result<Vec<ChainSlot>, TopologyError> {
        if self.k < 2 || !self.m.is_multiple_of(2) {
            return Err(TopologyError::ChainsUnsupported {
                m: self.m,
                k: self.k,
            });
        }
        let mut slots = Vec::with_capacity(self.zone_count() / 2);
        for j in 0..self.n {
            for p in 0..self.m / 2 {
                let (li, ri) = (2 * p, 2 * p + 1);
                let home_i = if !self.is_junction_track(ri) { ri } else { li };
                slots.push(ChainSlot {
                    home: self.index(home_i, j),
                    left: self.index(li, j),
                    right: self.index(ri, j),
                });
            }
        }
        Ok(slots)
    }

    pub fn dump(&self) -> LayoutDump {
        let kinds = (0..self.m)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.kind(i, j).code().to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        LayoutDump {
            m: self.m,
            n: self.n,
            k: self.k,
            zones: self.zone_count(),
            junction_zones: self.junction_zone_count(),
            gate_zones: self.gate_zone_count(),
            dynamic_electrodes: self.dynamic_electrode_count(),
            shim_electrodes: self.shim_electrode_count(),
            electrodes: self.electrodes,
            geometry: self.geometry,
            kinds,
        }
    }
}

/// JSON view of a layout and its derived grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutDump {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub zones: usize,
    pub junction_zones: usize,
    pub gate_zones: usize,
    pub dynamic_electrodes: u64,
    pub shim_electrodes: u64,
    pub electrodes: ElectrodeCounts,
    pub geometry: ZoneGeometry,
    /// One string per `i`, zone codes for `j = 0..n` separated by spaces.
    pub kinds: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChainMode {
    /// Every qubit in its own zone.
    Split,
    /// Qubits paired into two-ion chains held in gate zones.
    Chained,
}

impl fmt::Display for ChainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainMode::Split => f.write_str("split"),
            ChainMode::Chained => f.write_str("chained"),
        }
    }
}

/// Which qubits sit in which zone.
///
/// Chains are kept sorted by qubit id; splitting a chain sends the lower id
/// to the left zone of its slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitConfig {
    mode: ChainMode,
    zones: Vec<Vec<QubitId>>,
}

impl QubitConfig {
    pub fn new(mode: ChainMode, mut zones: Vec<Vec<QubitId>>) -> Self {
        if mode == ChainMode::Chained {
            for z in &mut zones {
                z.sort_unstable();
            }
        }
        QubitConfig { mode, zones }
    }

    /// Split configuration with `order[z]` in zone `z`.
    pub fn from_order(order: &[QubitId]) -> Self {
        QubitConfig {
            mode: ChainMode::Split,
            zones: order.iter().map(|&q| vec![q]).collect(),
        }
    }

    /// Split configuration with optional occupants.
    pub fn from_slots(slots: &[Option<QubitId>]) -> Self {
        QubitConfig {
            mode: ChainMode::Split,
            zones: slots.iter().map(|s| s.iter().copied().collect()).collect(),
        }
    }

    pub fn mode(&self) -> ChainMode {
        self.mode
    }

    pub fn zones(&self) -> &[Vec<QubitId>] {
        &self.zones
    }

    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }

    pub fn qubit_count(&self) -> usize {
        self.zones.iter().map(Vec::len).sum()
    }

    pub fn qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.zones.iter().flatten().copied()
    }

    pub fn zone_of(&self, qubit: QubitId) -> Option<usize> {
        self.zones.iter().position(|z| z.contains(&qubit))
    }

    /// Occupant of each zone of a split configuration.
    pub fn slots(&self) -> Result<Vec<Option<QubitId>>, TopologyError> {
        if self.mode != ChainMode::Split {
            return Err(TopologyError::WrongMode {
                expected: ChainMode::Split,
            });
        }
        Ok(self.zones.iter().map(|z| z.first().copied()).collect())
    }

    pub(crate) fn zones_mut(&mut self) -> &mut [Vec<QubitId>] {
        &mut self.zones
    }

    /// Sorted list of qubit ids, for conservation checks.
    pub fn qubit_multiset(&self) -> Vec<QubitId> {
        let mut v: Vec<_> = self.qubits().collect();
        v.sort_unstable();
        v
    }

    pub fn validate(&self, layout: &TrapLayout) -> Result<(), TopologyError> {
        if self.zones.len() != layout.zone_count() {
            return Err(TopologyError::ZoneCountMismatch {
                expected: layout.zone_count(),
                got: self.zones.len(),
            });
        }
        let mut seen = HashSet::with_capacity(self.qubit_count());
        for q in self.qubits() {
            if !seen.insert(q) {
                return Err(TopologyError::DuplicateQubit(q));
            }
        }
        match self.mode {
            ChainMode::Split => {
                if let Some((zone, z)) = self.zones.iter().enumerate().find(|(_, z)| z.len() > 1) {
                    return Err(TopologyError::ZoneOverfull {
                        zone,
                        count: z.len(),
                        mode: self.mode,
                    });
                }
            }
            ChainMode::Chained => {
                let homes: HashSet<usize> = layout.chain_slots()?.iter().map(|s| s.home).collect();
                for (zone, z) in self.zones.iter().enumerate() {
                    if z.is_empty() {
                        continue;
                    }
                    if layout.kind_of(zone).is_junction() {
                        return Err(TopologyError::JunctionOccupied(zone));
                    }
                    if z.len() > 2 {
                        return Err(TopologyError::ZoneOverfull {
                            zone,
                            count: z.len(),
                            mode: self.mode,
                        });
                    }
                    if !homes.contains(&zone) {
                        return Err(TopologyError::NotChainHome(zone));
                    }
                }
            }
        }
        Ok(())
    }

    /// Splits every chain into its slot, lower id on the left.
    pub fn split_chains(&self, layout: &TrapLayout) -> Result<QubitConfig, TopologyError> {
        if self.mode != ChainMode::Chained {
            return Err(TopologyError::WrongMode {
                expected: ChainMode::Chained,
            });
        }
        self.validate(layout)?;
        let mut zones = vec![Vec::new(); layout.zone_count()];
        for slot in layout.chain_slots()? {
            let chain = &self.zones[slot.home];
            if let Some(&q) = chain.first() {
                zones[slot.left].push(q);
            }
            if let Some(&q) = chain.get(1) {
                zones[slot.right].push(q);
            }
        }
        Ok(QubitConfig {
            mode: ChainMode::Split,
            zones,
        })
    }

    /// Merges the two zones of every slot into its home zone.
    pub fn merge_chains(&self, layout: &TrapLayout) -> Result<QubitConfig, TopologyError> {
        if self.mode != ChainMode::Split {
            return Err(TopologyError::WrongMode {
                expected: ChainMode::Split,
            });
        }
        self.validate(layout)?;
        let mut zones = vec![Vec::new(); layout.zone_count()];
        for slot in layout.chain_slots()? {
            let mut chain: Vec<QubitId> = self.zones[slot.left]
                .iter()
                .chain(self.zones[slot.right].iter())
                .copied()
                .collect();
            chain.sort_unstable();
            zones[slot.home] = chain;
        }
        Ok(QubitConfig {
            mode: ChainMode::Chained,
            zones,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_layout() -> TrapLayout {
        TrapLayout::build(1000, 6, ElectrodeCounts::default(), ZoneGeometry::default()).unwrap()
    }

    #[test]
    fn thousand_qubit_grid() {
        let l = table_layout();
        assert_eq!((l.m(), l.n()), (54, 19));
        assert_eq!(l.zone_count(), 1026);
        assert_eq!(l.junction_zone_count(), 171);
        assert_eq!(l.gate_zone_count(), 855);
        assert_eq!(l.dynamic_electrode_count(), 11970);
        assert_eq!(l.shim_electrode_count(), 10260);
        assert_eq!(l.electrode_count(), 22230);
    }

    #[test]
    fn smallest_grid() {
        let l = TrapLayout::build(2, 1, Default::default(), Default::default()).unwrap();
        assert_eq!((l.m(), l.n()), (1, 2));
    }

    #[test]
    fn build_matches_brute_force_minimiser() {
        // Exhaustive scan over every (m, n) pair with m even.
        let (target, k) = (100, 2);
        let mut best = usize::MAX;
        for m in 2..=200 {
            if m % k != 0 {
                continue;
            }
            for n in 1..=200 {
                if m * n >= target {
                    best = best.min(2 * m + k * n);
                }
            }
        }
        let l = TrapLayout::build(target, k, Default::default(), Default::default()).unwrap();
        assert_eq!(l.step_bound(), best);
        assert_eq!(l.m() % k, 0);
        assert!(l.zone_count() >= target);
    }

    #[test]
    fn build_rejects_bad_inputs() {
        assert_eq!(
            TrapLayout::build(1, 1, Default::default(), Default::default()),
            Err(TopologyError::TooFewQubits(1))
        );
        assert_eq!(
            TrapLayout::build(10, 0, Default::default(), Default::default()),
            Err(TopologyError::InvalidQubitsPerJunction)
        );
        assert!(matches!(
            TrapLayout::new(10, 3, 4, Default::default(), Default::default()),
            Err(TopologyError::NotMultipleOfK { .. })
        ));
    }

    #[test]
    fn neighbor_counts() {
        let l = TrapLayout::regular(4, 4).unwrap();
        assert_eq!(l.neighbors(l.index(0, 0)).unwrap().len(), 2);
        assert_eq!(l.neighbors(l.index(1, 2)).unwrap().len(), 4);
        assert_eq!(l.neighbors(l.index(0, 2)).unwrap().len(), 3);
        assert!(matches!(
            l.neighbors(16),
            Err(TopologyError::ZoneOutOfRange {
                zone: 16,
                zones: 16
            })
        ));
    }

    #[test]
    fn neighbor_parity_alternates_everywhere() {
        let l = table_layout();
        for z in 0..l.zone_count() {
            let odd = l.kind_of(z).is_odd();
            for nb in l.neighbors(z).unwrap() {
                assert_ne!(l.kind_of(nb).is_odd(), odd, "zone {z} -> {nb}");
            }
        }
    }

    #[test]
    fn adjacency_is_two_colourable() {
        // BFS 2-colouring, independent of the parity rule.
        let l = table_layout();
        let mut colour = vec![None; l.zone_count()];
        let mut queue = std::collections::VecDeque::new();
        colour[0] = Some(false);
        queue.push_back(0);
        while let Some(z) = queue.pop_front() {
            let c = colour[z].unwrap();
            for nb in l.neighbors(z).unwrap() {
                match colour[nb] {
                    None => {
                        colour[nb] = Some(!c);
                        queue.push_back(nb);
                    }
                    Some(cn) => assert_ne!(cn, c),
                }
            }
        }
        for (z, c) in colour.iter().enumerate() {
            assert_eq!(c.unwrap(), l.kind_of(z).is_odd());
        }
    }

    #[test]
    fn kind_counts_match_formulas() {
        for (target, k) in [(1000, 6), (300, 4), (50, 2), (77, 3)] {
            let l = TrapLayout::build(target, k, Default::default(), Default::default()).unwrap();
            let junctions = (0..l.zone_count())
                .filter(|&z| l.kind_of(z).is_junction())
                .count();
            assert_eq!(junctions, l.junction_zone_count());
            assert_eq!(l.zone_count() - junctions, l.gate_zone_count());
        }
    }

    #[test]
    fn transport_neighbors_respect_junction_tracks() {
        let l = TrapLayout::new(6, 3, 3, Default::default(), Default::default()).unwrap();
        // Gate zone (1, 1): only along the segment.
        let nb = l.transport_neighbors(l.index(1, 1)).unwrap();
        assert_eq!(nb, vec![l.index(0, 1), l.index(2, 1)]);
        // Junction zone (3, 1): all four.
        assert_eq!(l.transport_neighbors(l.index(3, 1)).unwrap().len(), 4);
    }

    #[test]
    fn chain_slots_use_gate_zones() {
        let l = table_layout();
        let slots = l.chain_slots().unwrap();
        assert_eq!(slots.len(), 513);
        for s in &slots {
            assert!(!l.kind_of(s.home).is_junction());
            assert!(s.home == s.left || s.home == s.right);
        }
        assert!(TrapLayout::regular(4, 4).unwrap().chain_slots().is_err());
    }

    #[test]
    fn split_then_merge_round_trips() {
        let l = TrapLayout::new(6, 2, 3, Default::default(), Default::default()).unwrap();
        let slots = l.chain_slots().unwrap();
        let mut zones = vec![Vec::new(); l.zone_count()];
        let mut next = 0;
        for s in &slots {
            zones[s.home] = vec![next + 1, next];
            next += 2;
        }
        let chained = QubitConfig::new(ChainMode::Chained, zones);
        chained.validate(&l).unwrap();
        let split = chained.split_chains(&l).unwrap();
        split.validate(&l).unwrap();
        assert_eq!(split.zones()[slots[0].left], vec![0]);
        assert_eq!(split.zones()[slots[0].right], vec![1]);
        assert_eq!(split.merge_chains(&l).unwrap(), chained);
    }

    #[test]
    fn validate_catches_bad_occupancy() {
        let l = TrapLayout::new(4, 1, 2, Default::default(), Default::default()).unwrap();
        let dup = QubitConfig::from_order(&[0, 1, 1, 2]);
        assert_eq!(dup.validate(&l), Err(TopologyError::DuplicateQubit(1)));
        let junction = QubitConfig::new(ChainMode::Chained, vec![vec![0], vec![], vec![], vec![]]);
        assert_eq!(
            junction.validate(&l),
            Err(TopologyError::JunctionOccupied(0))
        );
        let short = QubitConfig::from_order(&[0, 1]);
        assert!(matches!(
            short.validate(&l),
            Err(TopologyError::ZoneCountMismatch { .. })
        ));
    }
}
