//! Qubit reconfiguration as sequences of parallel switchable swaps.
//!
//! A [`SwapStep`] plays one transport phase across the whole trap; its select
//! mask decides which zones take part. Swap phases pair each zone with exactly
//! one partner determined by the phase and the zone parity, so the active
//! pairs of a step are disjoint by construction. [`execute`] replays a
//! schedule and rejects any step the hardware could not perform.

mod engine;
mod matching;
mod planner;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{ChainMode, QubitConfig, TopologyError, TrapLayout};
use crate::wiring::{SelectWord, WiringError};

pub use matching::column_assignment;
pub use planner::{
    candidate_permutations, permutation_configs, plan, plan_1d, plan_2d_realistic, plan_2d_regular,
    random_permutation, route_permutation, worst_case_permutation, WorstCase, WORST_CASE_SEEDS,
};

/// Default duration of one swap step, seconds.
pub const DEFAULT_STEP_TIME: f64 = 100e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoutingError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Wiring(#[from] WiringError),
    #[error("source and target hold different qubit sets")]
    MismatchedQubits,
    #[error("expected exactly one qubit in every zone")]
    NotOnePerZone,
    #[error("{0}")]
    Unsupported(String),
    #[error("column assignment input is not the row image of a permutation")]
    InfeasibleAssignment,
    #[error("step {step}: mask has {got} bits, layout has {expected} zones")]
    MaskLength {
        step: usize,
        expected: usize,
        got: usize,
    },
    #[error("step {step}: active zone {zone} has no active partner for {phase:?}")]
    UnpairedZone {
        step: usize,
        zone: usize,
        phase: Phase,
    },
    #[error("step {step}: vertical swap at zone {zone} is off a junction track")]
    OffTrack { step: usize, zone: usize },
    #[error("step {step}: {phase:?} requires a {expected} configuration")]
    WrongMode {
        step: usize,
        phase: Phase,
        expected: ChainMode,
    },
    #[error("step {step}: {phase:?} mask does not cover exactly the occupied chain slots")]
    ChainMaskMismatch { step: usize, phase: Phase },
    #[error("qubit multiset changed during execution")]
    ConservationViolated,
    #[error("schedule was planned for a {expected} layout but the configuration has {got} zones")]
    LayoutMismatch { expected: String, got: usize },
    #[error("executing the schedule did not reach its target")]
    VerificationFailed,
    #[error("malformed schedule file: {0}")]
    BadScheduleFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    OddHorizontal,
    EvenHorizontal,
    OddVertical,
    EvenVertical,
    Split,
    Merge,
}

impl Phase {
    pub fn is_swap(self) -> bool {
        !matches!(self, Phase::Split | Phase::Merge)
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Phase::OddVertical | Phase::EvenVertical)
    }

    fn is_odd(self) -> bool {
        matches!(self, Phase::OddHorizontal | Phase::OddVertical)
    }

    /// Partner zone of `(i, j)` under this swap phase, if inside the grid.
    ///
    /// Odd phases pair a zone with `i + j` even with its successor along the
    /// phase axis; even phases pair a zone with `i + j` odd with its successor.
    pub fn partner(self, layout: &TrapLayout, zone: usize) -> Option<usize> {
        debug_assert!(self.is_swap());
        let (i, j) = layout.coords(zone);
        let leads = ((i + j) % 2 == 0) == self.is_odd();
        let (pos, len) = if self.is_vertical() {
            (j, layout.n())
        } else {
            (i, layout.m())
        };
        let other = if leads {
            (pos + 1 < len).then_some(pos + 1)?
        } else {
            pos.checked_sub(1)?
        };
        Some(if self.is_vertical() {
            layout.index(i, other)
        } else {
            layout.index(other, j)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapStep {
    pub phase: Phase,
    pub mask: SelectWord,
    /// Seconds.
    pub duration: f64,
}

impl SwapStep {
    pub fn new(phase: Phase, mask: SelectWord) -> Self {
        SwapStep {
            phase,
            mask,
            duration: DEFAULT_STEP_TIME,
        }
    }

    /// Active swap pairs `(lower zone, upper zone)`, validated against the
    /// layout. `index` only labels errors.
    pub fn pairs(
        &self,
        layout: &TrapLayout,
        index: usize,
    ) -> Result<Vec<(usize, usize)>, RoutingError> {
        if self.mask.len() != layout.zone_count() {
            return Err(RoutingError::MaskLength {
                step: index,
                expected: layout.zone_count(),
                got: self.mask.len(),
            });
        }
        let mut out = Vec::new();
        for zone in self.mask.iter_ones() {
            let partner = self
                .phase
                .partner(layout, zone)
                .filter(|&p| self.mask.get(p))
                .ok_or(RoutingError::UnpairedZone {
                    step: index,
                    zone,
                    phase: self.phase,
                })?;
            if self.phase.is_vertical() && !layout.is_junction_track(layout.coords(zone).0) {
                return Err(RoutingError::OffTrack { step: index, zone });
            }
            if zone < partner {
                out.push((zone, partner));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapSchedule {
    pub layout: TrapLayout,
    pub steps: Vec<SwapStep>,
    pub source: QubitConfig,
    pub target: QubitConfig,
}

impl SwapSchedule {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Steps that move qubits between zones (everything but split/merge).
    pub fn swap_step_count(&self) -> usize {
        self.steps.iter().filter(|s| s.phase.is_swap()).count()
    }

    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    pub fn set_step_duration(&mut self, seconds: f64) {
        for s in &mut self.steps {
            s.duration = seconds;
        }
    }

    pub fn select_words(&self) -> Vec<SelectWord> {
        self.steps.iter().map(|s| s.mask.clone()).collect()
    }

    /// Replays the schedule from its source and checks the target is reached.
    pub fn verify(&self) -> Result<(), RoutingError> {
        if execute(self, &self.source)? == self.target {
            Ok(())
        } else {
            Err(RoutingError::VerificationFailed)
        }
    }

    pub fn to_file(&self) -> ScheduleFile {
        ScheduleFile {
            m: self.layout.m(),
            n: self.layout.n(),
            k: self.layout.k(),
            steps: self
                .steps
                .iter()
                .map(|s| StepRecord {
                    phase: s.phase,
                    mask: s.mask.to_hex(),
                    duration: s.duration,
                })
                .collect(),
            source: self.source.clone(),
            target: self.target.clone(),
        }
    }

    pub fn from_file(file: &ScheduleFile, layout: TrapLayout) -> Result<Self, RoutingError> {
        if (file.m, file.n, file.k) != (layout.m(), layout.n(), layout.k()) {
            return Err(RoutingError::BadScheduleFile(format!(
                "file is for a {}x{} (k={}) grid",
                file.m, file.n, file.k
            )));
        }
        let steps = file
            .steps
            .iter()
            .map(|r| {
                Ok(SwapStep {
                    phase: r.phase,
                    mask: SelectWord::from_hex(layout.zone_count(), &r.mask)?,
                    duration: r.duration,
                })
            })
            .collect::<Result<_, RoutingError>>()?;
        Ok(SwapSchedule {
            layout,
            steps,
            source: file.source.clone(),
            target: file.target.clone(),
        })
    }
}

/// On-disk JSON form of a schedule. Masks are hex strings of the packed
/// select word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub steps: Vec<StepRecord>,
    pub source: QubitConfig,
    pub target: QubitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub phase: Phase,
    pub mask: String,
    pub duration: f64,
}

fn occupied_slot_mask(
    layout: &TrapLayout,
    config: &QubitConfig,
    phase: Phase,
) -> Result<SelectWord, RoutingError> {
    let mut mask = SelectWord::zeros(layout.zone_count());
    let zones = config.zones();
    for slot in layout.chain_slots()? {
        let occupied = match phase {
            Phase::Split => !zones[slot.home].is_empty(),
            _ => !zones[slot.left].is_empty() || !zones[slot.right].is_empty(),
        };
        if occupied {
            mask.set(slot.left, true);
            mask.set(slot.right, true);
        }
    }
    Ok(mask)
}

/// Select mask of a split or merge step acting on `config`.
pub fn chain_step_mask(
    layout: &TrapLayout,
    config: &QubitConfig,
    phase: Phase,
) -> Result<SelectWord, RoutingError> {
    debug_assert!(!phase.is_swap());
    occupied_slot_mask(layout, config, phase)
}

/// Applies every step of `schedule` to `source`.
pub fn execute(schedule: &SwapSchedule, source: &QubitConfig) -> Result<QubitConfig, RoutingError> {
    execute_steps(&schedule.layout, &schedule.steps, source)
}

pub fn execute_steps(
    layout: &TrapLayout,
    steps: &[SwapStep],
    source: &QubitConfig,
) -> Result<QubitConfig, RoutingError> {
    if source.zone_count() != layout.zone_count() {
        return Err(RoutingError::LayoutMismatch {
            expected: format!("{}x{}", layout.m(), layout.n()),
            got: source.zone_count(),
        });
    }
    source.validate(layout)?;
    let before = source.qubit_multiset();
    let mut config = source.clone();
    for (index, step) in steps.iter().enumerate() {
        let expected = match step.phase {
            Phase::Split => ChainMode::Chained,
            _ => ChainMode::Split,
        };
        if config.mode() != expected {
            return Err(RoutingError::WrongMode {
                step: index,
                phase: step.phase,
                expected,
            });
        }
        match step.phase {
            Phase::Split | Phase::Merge => {
                if step.mask.len() != layout.zone_count() {
                    return Err(RoutingError::MaskLength {
                        step: index,
                        expected: layout.zone_count(),
                        got: step.mask.len(),
                    });
                }
                if occupied_slot_mask(layout, &config, step.phase)? != step.mask {
                    return Err(RoutingError::ChainMaskMismatch {
                        step: index,
                        phase: step.phase,
                    });
                }
                config = if step.phase == Phase::Split {
                    config.split_chains(layout)?
                } else {
                    config.merge_chains(layout)?
                };
            }
            _ => {
                let pairs = step.pairs(layout, index)?;
                let zones = config.zones_mut();
                for (a, b) in pairs {
                    zones.swap(a, b);
                }
            }
        }
    }
    if config.qubit_multiset() != before {
        return Err(RoutingError::ConservationViolated);
    }
    config.validate(layout)?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(layout: &TrapLayout, phase: Phase, bits: &[usize]) -> SwapStep {
        let mut mask = SelectWord::zeros(layout.zone_count());
        for &b in bits {
            mask.set(b, true);
        }
        SwapStep::new(phase, mask)
    }

    #[test]
    fn empty_schedule_is_identity() {
        let l = TrapLayout::linear(5).unwrap();
        let src = QubitConfig::from_order(&[4, 2, 0, 1, 3]);
        assert_eq!(execute_steps(&l, &[], &src).unwrap(), src);
    }

    #[test]
    fn full_odd_step_on_four_zones() {
        let l = TrapLayout::linear(4).unwrap();
        let src = QubitConfig::from_order(&[1, 2, 3, 4]);
        let out =
            execute_steps(&l, &[step(&l, Phase::OddHorizontal, &[0, 1, 2, 3])], &src).unwrap();
        assert_eq!(out, QubitConfig::from_order(&[2, 1, 4, 3]));
    }

    #[test]
    fn eight_zone_mask_leaves_middle_pair() {
        let l = TrapLayout::linear(8).unwrap();
        let src = QubitConfig::from_order(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let mask = SelectWord::from_bits(&[true, true, false, false, true, true, true, true]);
        let out = execute_steps(&l, &[SwapStep::new(Phase::OddHorizontal, mask)], &src).unwrap();
        assert_eq!(out, QubitConfig::from_order(&[2, 1, 3, 4, 6, 5, 8, 7]));
    }

    #[test]
    fn rejects_half_active_pair() {
        let l = TrapLayout::linear(4).unwrap();
        let src = QubitConfig::from_order(&[1, 2, 3, 4]);
        let err = execute_steps(&l, &[step(&l, Phase::OddHorizontal, &[0])], &src).unwrap_err();
        assert!(matches!(err, RoutingError::UnpairedZone { zone: 0, .. }));
        // Zone 3 has no even-phase partner on a 4-zone line.
        let err = execute_steps(&l, &[step(&l, Phase::EvenHorizontal, &[3])], &src).unwrap_err();
        assert!(matches!(err, RoutingError::UnpairedZone { zone: 3, .. }));
    }

    #[test]
    fn vertical_partners_follow_checkerboard() {
        let l = TrapLayout::regular(4, 4).unwrap();
        // (0,0) has i+j even: odd vertical pairs it with (0,1).
        assert_eq!(
            Phase::OddVertical.partner(&l, l.index(0, 0)),
            Some(l.index(0, 1))
        );
        // (1,0) has i+j odd: odd vertical has no lower partner.
        assert_eq!(Phase::OddVertical.partner(&l, l.index(1, 0)), None);
        assert_eq!(
            Phase::EvenVertical.partner(&l, l.index(1, 0)),
            Some(l.index(1, 1))
        );
        for phase in [
            Phase::OddHorizontal,
            Phase::EvenHorizontal,
            Phase::OddVertical,
            Phase::EvenVertical,
        ] {
            for z in 0..16 {
                if let Some(p) = phase.partner(&l, z) {
                    assert_eq!(phase.partner(&l, p), Some(z));
                    assert_ne!(l.kind_of(z).is_odd(), l.kind_of(p).is_odd());
                }
            }
        }
    }

    #[test]
    fn rejects_vertical_swap_off_track() {
        let l = TrapLayout::new(4, 2, 2, Default::default(), Default::default()).unwrap();
        let src = QubitConfig::from_order(&[0, 1, 2, 3, 4, 5, 6, 7]);
        // i = 1 is not a junction track.
        let z = l.index(1, 0);
        let p = Phase::EvenVertical.partner(&l, z).unwrap();
        let err = execute_steps(&l, &[step(&l, Phase::EvenVertical, &[z, p])], &src).unwrap_err();
        assert!(matches!(err, RoutingError::OffTrack { .. }));
    }

    #[test]
    fn rejects_swap_in_chained_mode() {
        let l = TrapLayout::new(2, 1, 2, Default::default(), Default::default()).unwrap();
        let src = QubitConfig::new(ChainMode::Chained, vec![vec![], vec![0, 1]]);
        let err = execute_steps(&l, &[step(&l, Phase::OddHorizontal, &[0, 1])], &src).unwrap_err();
        assert!(matches!(err, RoutingError::WrongMode { .. }));
    }

    #[test]
    fn split_mask_must_match_occupancy() {
        let l = TrapLayout::new(4, 1, 2, Default::default(), Default::default()).unwrap();
        let src = QubitConfig::new(ChainMode::Chained, vec![vec![], vec![0, 1], vec![], vec![]]);
        let good = chain_step_mask(&l, &src, Phase::Split).unwrap();
        assert_eq!(good.bits(), vec![true, true, false, false]);
        let out = execute_steps(&l, &[SwapStep::new(Phase::Split, good)], &src).unwrap();
        assert_eq!(
            out,
            QubitConfig::from_slots(&[Some(0), Some(1), None, None])
        );
        let err = execute_steps(&l, &[step(&l, Phase::Split, &[0, 1, 2, 3])], &src).unwrap_err();
        assert!(matches!(err, RoutingError::ChainMaskMismatch { .. }));
    }
}
