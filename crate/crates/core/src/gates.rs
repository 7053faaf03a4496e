//! Transport-assisted gate layers.
//!
//! Lasers or microwaves act on the whole chip at once; a zone takes part in
//! a layer only when its select bit moves its ions into the drive. Two-qubit
//! layers act on neighbouring zone pairs `(2p, 2p + 1)` along a segment, or
//! on a stored two-ion chain.

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::SystemParams;
use crate::topology::{ChainMode, QubitConfig, QubitId, TrapLayout};
use crate::wiring::SelectWord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GateError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("layer is empty")]
    EmptyLayer,
    #[error("layer mixes gate kinds")]
    MixedKinds,
    #[error("layer mixes drive phases")]
    MixedPhases,
    #[error("qubit {0} is not in the configuration")]
    UnknownQubit(QubitId),
    #[error("qubit {0} appears twice in one layer")]
    DuplicateQubit(QubitId),
    #[error("qubits {0} and {1} are not in a merge pair: routing required")]
    RoutingRequired(QubitId, QubitId),
    #[error("qubit {0} shares its zone with a qubit outside the layer")]
    PartialChain(QubitId),
    #[error("rabi frequency {0} is out of the profile's range")]
    Unreachable(f64),
    #[error("continuous layers need shim recharging and cannot run in parallel mode")]
    NeedsRecharge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RabiProfile {
    /// `Omega(y) = alpha_i * y` near a microwave field null.
    MicrowaveLinear { alpha_i: f64 },
    /// `Omega(x) = omega0 * exp(-x^2 / w^2)` across a laser beam.
    LaserGaussian { omega0: f64, waist: f64 },
}

impl RabiProfile {
    /// Rabi frequency, rad/s, at `x` metres from the profile origin.
    pub fn rabi_at(&self, x: f64) -> f64 {
        match *self {
            RabiProfile::MicrowaveLinear { alpha_i } => alpha_i * x,
            RabiProfile::LaserGaussian { omega0, waist } => omega0 * (-(x / waist).powi(2)).exp(),
        }
    }

    /// Displacement giving Rabi frequency `omega`. Gaussian solutions are
    /// taken on the `x >= 0` flank.
    pub fn solve_displacement(&self, omega: f64) -> Result<f64, GateError> {
        match *self {
            RabiProfile::MicrowaveLinear { alpha_i } => {
                if alpha_i == 0.0 || !omega.is_finite() {
                    return Err(GateError::Unreachable(omega));
                }
                Ok(omega / alpha_i)
            }
            RabiProfile::LaserGaussian { omega0, waist } => {
                if !(omega > 0.0 && omega <= omega0) {
                    return Err(GateError::Unreachable(omega));
                }
                Ok(waist * (omega0 / omega).ln().sqrt())
            }
        }
    }

    /// Operating point of steepest slope for the Gaussian profile.
    pub fn steepest_point(&self) -> Option<f64> {
        match *self {
            RabiProfile::MicrowaveLinear { .. } => None,
            RabiProfile::LaserGaussian { waist, .. } => Some(waist * FRAC_1_SQRT_2),
        }
    }
}

/// Strength of the off-resonant `sigma_z` term, `Omega^2 / (2 delta)`.
pub fn stark_shift(omega: f64, detuning: f64) -> f64 {
    omega * omega / (2.0 * detuning)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    /// Equatorial rotation with drive phase `phi`.
    Sq {
        q: QubitId,
        phi: f64,
    },
    /// Phase rotation from the off-resonant drive.
    Sz {
        q: QubitId,
    },
    Tq {
        a: QubitId,
        b: QubitId,
        phi: f64,
    },
    /// Equatorial rotation by a per-qubit angle.
    Sqc {
        q: QubitId,
        theta: f64,
    },
}

impl Gate {
    fn qubits(&self) -> Vec<QubitId> {
        match *self {
            Gate::Sq { q, .. } | Gate::Sz { q } | Gate::Sqc { q, .. } => vec![q],
            Gate::Tq { a, b, .. } => vec![a, b],
        }
    }

    fn tag(&self) -> u8 {
        match self {
            Gate::Sq { .. } => 0,
            Gate::Sz { .. } => 1,
            Gate::Tq { .. } => 2,
            Gate::Sqc { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerKind {
    SqPhi { phi: f64 },
    SqZ,
    Tq { phi: f64 },
    SqContinuous,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerKind::SqPhi { phi } => write!(f, "SQ phi={phi}"),
            LayerKind::SqZ => f.write_str("SZ"),
            LayerKind::Tq { phi } => write!(f, "TQ phi={phi}"),
            LayerKind::SqContinuous => f.write_str("SQC"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateLayer {
    pub kind: LayerKind,
    pub mask: SelectWord,
    /// Zone pairs driven together; two-qubit layers only.
    pub pairs: Vec<(usize, usize)>,
    /// Rotation angle per active zone; continuous layers only.
    pub angles: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Single(usize),
    Pair(usize, usize),
}

impl GateLayer {
    /// Drive terms the layer switches on. Chained zones show up as a
    /// single-zone term.
    pub fn terms(&self) -> Vec<Term> {
        match self.kind {
            LayerKind::Tq { .. } => self
                .pairs
                .iter()
                .map(|&(a, b)| {
                    if a == b {
                        Term::Single(a)
                    } else {
                        Term::Pair(a, b)
                    }
                })
                .collect(),
            _ => self.mask.iter_ones().map(Term::Single).collect(),
        }
    }

    /// Displacement per active zone realising its angle in `t_1q`.
    pub fn displacements(
        &self,
        profile: &RabiProfile,
        t_1q: f64,
    ) -> Result<Vec<(usize, f64)>, GateError> {
        self.angles
            .iter()
            .map(|&(z, theta)| Ok((z, profile.solve_displacement(theta / t_1q)?)))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "mask": self.mask.to_hex(),
            "active_zones": self.mask.iter_ones().collect::<Vec<_>>(),
            "pairs": self.pairs,
            "angles": self.angles,
        })
    }
}

/// Zone pairs that can merge for a two-qubit gate.
pub fn merge_pairs(layout: &TrapLayout) -> Vec<(usize, usize)> {
    (0..layout.n())
        .flat_map(|j| (0..layout.m() / 2).map(move |p| (j, p)))
        .map(|(j, p)| (layout.index(2 * p, j), layout.index(2 * p + 1, j)))
        .collect()
}

pub fn compile_layer(
    gates: &[Gate],
    config: &QubitConfig,
    layout: &TrapLayout,
) -> Result<GateLayer, GateError> {
    let first = gates.first().ok_or(GateError::EmptyLayer)?;
    if gates.iter().any(|g| g.tag() != first.tag()) {
        return Err(GateError::MixedKinds);
    }
    let phase = |g: &Gate| match *g {
        Gate::Sq { phi, .. } | Gate::Tq { phi, .. } => phi,
        _ => 0.0,
    };
    if gates.iter().any(|g| phase(g) != phase(first)) {
        return Err(GateError::MixedPhases);
    }
    let mut seen = HashSet::new();
    for q in gates.iter().flat_map(Gate::qubits) {
        if !seen.insert(q) {
            return Err(GateError::DuplicateQubit(q));
        }
    }
    let zone = |q: QubitId| config.zone_of(q).ok_or(GateError::UnknownQubit(q));
    // In a shared zone both ions are driven together.
    let whole_zone = |q: QubitId, z: usize| {
        config.zones()[z]
            .iter()
            .find(|o| !seen.contains(o))
            .map_or(Ok(()), |_| Err(GateError::PartialChain(q)))
    };

    let mut mask = SelectWord::zeros(layout.zone_count());
    let mut pairs = Vec::new();
    let mut angles = Vec::new();
    let kind = match *first {
        Gate::Sq { phi, .. } => LayerKind::SqPhi { phi },
        Gate::Sz { .. } => LayerKind::SqZ,
        Gate::Tq { phi, .. } => LayerKind::Tq { phi },
        Gate::Sqc { .. } => LayerKind::SqContinuous,
    };
    let merge: HashSet<(usize, usize)> = merge_pairs(layout).into_iter().collect();
    for g in gates {
        match *g {
            Gate::Sq { q, .. } | Gate::Sz { q } => {
                let z = zone(q)?;
                whole_zone(q, z)?;
                mask.set(z, true);
            }
            Gate::Sqc { q, theta } => {
                let z = zone(q)?;
                if config.zones()[z].len() > 1 {
                    return Err(GateError::PartialChain(q));
                }
                mask.set(z, true);
                angles.push((z, theta));
            }
            Gate::Tq { a, b, .. } => {
                let (za, zb) = (zone(a)?, zone(b)?);
                let (lo, hi) = (za.min(zb), za.max(zb));
                let ok = match config.mode() {
                    ChainMode::Split => merge.contains(&(lo, hi)),
                    ChainMode::Chained => lo == hi,
                };
                if !ok {
                    return Err(GateError::RoutingRequired(a, b));
                }
                whole_zone(a, lo)?;
                whole_zone(b, hi)?;
                mask.set(lo, true);
                mask.set(hi, true);
                pairs.push((lo, hi));
            }
        }
    }
    pairs.sort_unstable();
    angles.sort_by_key(|&(z, _)| z);
    Ok(GateLayer {
        kind,
        mask,
        pairs,
        angles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Shims are recharged before every layer.
    #[default]
    Demux,
    /// A fixed set of discrete layers with shims charged once.
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerTiming {
    pub seconds: f64,
    /// Whether a shim recharge cycle is included.
    pub recharge: bool,
}

pub fn layer_duration(
    kind: LayerKind,
    p: &SystemParams,
    mode: GateMode,
) -> Result<LayerTiming, GateError> {
    let pulse = match kind {
        LayerKind::Tq { .. } => p.t_2q,
        _ => p.t_1q,
    };
    let recharge = match (mode, kind) {
        (GateMode::Parallel, LayerKind::SqContinuous) => return Err(GateError::NeedsRecharge),
        (GateMode::Parallel, _) => false,
        (GateMode::Demux, _) => true,
    };
    Ok(LayerTiming {
        seconds: pulse + if recharge { p.t_sc } else { 0.0 },
        recharge,
    })
}

fn parse_f64(s: &str, line: usize) -> Result<f64, GateError> {
    s.trim().parse().map_err(|_| GateError::Parse {
        line,
        msg: format!("bad number {s:?}"),
    })
}

fn parse_qubit(s: &str, line: usize) -> Result<QubitId, GateError> {
    s.trim().parse().map_err(|_| GateError::Parse {
        line,
        msg: format!("bad qubit id {s:?}"),
    })
}

/// Parses one circuit layer per line. Blank lines and `#` comments are
/// skipped.
///
/// ```text
/// SQ phi=0 q=1,5,9
/// SZ q=2
/// TQ phi=0 q=0-1,2-3
/// SQC q=0:1.57,4:0.3
/// ```
pub fn parse_circuit(text: &str) -> Result<Vec<Vec<Gate>>, GateError> {
    let mut layers = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: String| GateError::Parse { line, msg };
        let mut words = body.split_whitespace();
        let op = words.next().unwrap_or_default();
        let mut phi = 0.0;
        let mut targets: Option<&str> = None;
        for w in words {
            match w.split_once('=') {
                Some(("phi", v)) => phi = parse_f64(v, line)?,
                Some(("q", v)) => targets = Some(v),
                _ => return Err(err(format!("unexpected field {w:?}"))),
            }
        }
        let targets = targets.ok_or_else(|| err("missing q=".into()))?;
        let items = targets.split(',').filter(|s| !s.is_empty());
        let gates = match op {
            "SQ" => items
                .map(|s| {
                    Ok(Gate::Sq {
                        q: parse_qubit(s, line)?,
                        phi,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
            "SZ" => items
                .map(|s| {
                    Ok(Gate::Sz {
                        q: parse_qubit(s, line)?,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
            "TQ" => items
                .map(|s| {
                    let (a, b) = s
                        .split_once('-')
                        .ok_or_else(|| err(format!("bad pair {s:?}")))?;
                    Ok(Gate::Tq {
                        a: parse_qubit(a, line)?,
                        b: parse_qubit(b, line)?,
                        phi,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
            "SQC" => items
                .map(|s| {
                    let (q, t) = s
                        .split_once(':')
                        .ok_or_else(|| err(format!("bad angle entry {s:?}")))?;
                    Ok(Gate::Sqc {
                        q: parse_qubit(q, line)?,
                        theta: parse_f64(t, line)?,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
            _ => return Err(err(format!("unknown layer kind {op:?}"))),
        };
        if gates.is_empty() {
            return Err(err("layer names no qubits".into()));
        }
        layers.push(gates);
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive, BaseInputs};
    use crate::topology::{ElectrodeCounts, ZoneGeometry};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn split_line(n: usize) -> (TrapLayout, QubitConfig) {
        let order: Vec<QubitId> = (0..n as QubitId).collect();
        (
            TrapLayout::linear(n).unwrap(),
            QubitConfig::from_order(&order),
        )
    }

    #[test]
    fn single_qubit_mask() {
        let (l, c) = split_line(12);
        let layer = compile_layer(&parse_circuit("SQ phi=0 q=1,5,9").unwrap()[0], &c, &l).unwrap();
        assert_eq!(layer.kind, LayerKind::SqPhi { phi: 0.0 });
        assert_eq!(layer.mask.iter_ones().collect::<Vec<_>>(), vec![1, 5, 9]);
    }

    #[test]
    fn two_qubit_pairs() {
        let (l, c) = split_line(8);
        let layer = compile_layer(&parse_circuit("TQ q=3-2,4-5").unwrap()[0], &c, &l).unwrap();
        assert_eq!(layer.pairs, vec![(2, 3), (4, 5)]);
        assert_eq!(layer.terms(), vec![Term::Pair(2, 3), Term::Pair(4, 5)]);
        let err = compile_layer(&parse_circuit("TQ q=1-2").unwrap()[0], &c, &l).unwrap_err();
        assert_eq!(err, GateError::RoutingRequired(1, 2));
        let err = compile_layer(&parse_circuit("TQ q=0-7").unwrap()[0], &c, &l).unwrap_err();
        assert_eq!(err, GateError::RoutingRequired(0, 7));
    }

    #[test]
    fn chained_two_qubit_layer() {
        let l =
            TrapLayout::new(4, 1, 2, ElectrodeCounts::default(), ZoneGeometry::default()).unwrap();
        let c = QubitConfig::new(
            ChainMode::Chained,
            vec![vec![], vec![0, 1], vec![], vec![2, 3]],
        );
        let layer = compile_layer(&parse_circuit("TQ q=0-1").unwrap()[0], &c, &l).unwrap();
        assert_eq!(layer.terms(), vec![Term::Single(1)]);
        let err = compile_layer(&parse_circuit("TQ q=1-2").unwrap()[0], &c, &l).unwrap_err();
        assert_eq!(err, GateError::RoutingRequired(1, 2));
        let err = compile_layer(&parse_circuit("SQ q=0").unwrap()[0], &c, &l).unwrap_err();
        assert_eq!(err, GateError::PartialChain(0));
        assert!(compile_layer(&parse_circuit("SQ q=0,1").unwrap()[0], &c, &l).is_ok());
    }

    #[test]
    fn layer_validation() {
        let (l, c) = split_line(4);
        let mixed = [Gate::Sq { q: 0, phi: 0.0 }, Gate::Sz { q: 1 }];
        assert_eq!(
            compile_layer(&mixed, &c, &l).unwrap_err(),
            GateError::MixedKinds
        );
        let phases = [Gate::Sq { q: 0, phi: 0.0 }, Gate::Sq { q: 1, phi: 1.0 }];
        assert_eq!(
            compile_layer(&phases, &c, &l).unwrap_err(),
            GateError::MixedPhases
        );
        let dup = [Gate::Sz { q: 0 }, Gate::Sz { q: 0 }];
        assert_eq!(
            compile_layer(&dup, &c, &l).unwrap_err(),
            GateError::DuplicateQubit(0)
        );
        assert_eq!(
            compile_layer(&[Gate::Sz { q: 9 }], &c, &l).unwrap_err(),
            GateError::UnknownQubit(9)
        );
        assert_eq!(
            compile_layer(&[], &c, &l).unwrap_err(),
            GateError::EmptyLayer
        );
    }

    #[test]
    fn parser_errors_name_the_line() {
        assert!(matches!(
            parse_circuit("\nSQ q=a"),
            Err(GateError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_circuit("XX q=1"),
            Err(GateError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_circuit("TQ q=1"),
            Err(GateError::Parse { .. })
        ));
        assert!(matches!(
            parse_circuit("SQ phi=1"),
            Err(GateError::Parse { .. })
        ));
        assert_eq!(parse_circuit("# only a comment\n\n").unwrap().len(), 0);
        let sqc = parse_circuit("SQC q=0:1.5,3:0.25").unwrap();
        assert_eq!(
            sqc[0],
            vec![
                Gate::Sqc { q: 0, theta: 1.5 },
                Gate::Sqc { q: 3, theta: 0.25 }
            ]
        );
    }

    #[test]
    fn table_durations() {
        let p = derive(&BaseInputs::default()).unwrap();
        let sq = layer_duration(LayerKind::SqPhi { phi: 0.0 }, &p, GateMode::Demux).unwrap();
        let tq = layer_duration(LayerKind::Tq { phi: 0.0 }, &p, GateMode::Demux).unwrap();
        assert_relative_eq!(sq.seconds, 385e-6, max_relative = 1e-12);
        assert_relative_eq!(tq.seconds, 484e-6, max_relative = 1e-12);
        let par = layer_duration(LayerKind::SqZ, &p, GateMode::Parallel).unwrap();
        assert_relative_eq!(par.seconds, 1e-6, max_relative = 1e-12);
        assert!(!par.recharge);
        assert_eq!(
            layer_duration(LayerKind::SqContinuous, &p, GateMode::Parallel),
            Err(GateError::NeedsRecharge)
        );
    }

    #[test]
    fn profiles() {
        let mw = RabiProfile::MicrowaveLinear { alpha_i: 2.0e6 };
        assert_eq!(mw.rabi_at(0.0), 0.0);
        assert_eq!(mw.solve_displacement(0.0).unwrap(), 0.0);
        let w = 20e-6;
        let g = RabiProfile::LaserGaussian {
            omega0: 1e6,
            waist: w,
        };
        assert_relative_eq!(
            g.rabi_at(w * FRAC_1_SQRT_2),
            1e6 * (-0.5f64).exp(),
            max_relative = 1e-14
        );
        assert!(g.rabi_at(10.0 * w) <= 1e6 * (-100.0f64).exp());
        assert_eq!(g.solve_displacement(1e6).unwrap(), 0.0);
        assert_relative_eq!(
            g.solve_displacement(0.5e6).unwrap(),
            w * 2f64.ln().sqrt(),
            max_relative = 1e-14
        );
        assert!(g.solve_displacement(2e6).is_err());
        assert!(g.solve_displacement(0.0).is_err());
        assert_relative_eq!(stark_shift(2.0, 4.0), 0.5);
    }

    #[test]
    fn continuous_angles_become_displacements() {
        let (l, c) = split_line(4);
        let layer =
            compile_layer(&parse_circuit("SQC q=2:0.5,0:0.25").unwrap()[0], &c, &l).unwrap();
        assert_eq!(layer.angles, vec![(0, 0.25), (2, 0.5)]);
        let mw = RabiProfile::MicrowaveLinear { alpha_i: 1e11 };
        let d = layer.displacements(&mw, 1e-6).unwrap();
        assert_relative_eq!(d[1].1, 0.5 / 1e-6 / 1e11);
    }

    proptest! {
        #[test]
        fn gaussian_inverse_round_trips(frac in 1e-6f64..=1.0, omega0 in 1e3f64..1e8, waist in 1e-6f64..1e-3) {
            let g = RabiProfile::LaserGaussian { omega0, waist };
            let target = frac * omega0;
            let x = g.solve_displacement(target).unwrap();
            prop_assert!(x >= 0.0);
            prop_assert!(((g.rabi_at(x) - target) / target).abs() < 1e-12);
        }

        #[test]
        fn linear_inverse_round_trips(target in -1e7f64..1e7, alpha in 1e9f64..1e12) {
            let p = RabiProfile::MicrowaveLinear { alpha_i: alpha };
            let back = p.rabi_at(p.solve_displacement(target).unwrap());
            prop_assert!((back - target).abs() <= 1e-12 * target.abs().max(1.0));
        }

        #[test]
        fn inactive_zones_have_no_terms(bits in proptest::collection::vec(any::<bool>(), 8)) {
            let (l, c) = split_line(8);
            let gates: Vec<Gate> = bits.iter().enumerate().filter(|(_, &b)| b)
                .map(|(q, _)| Gate::Sq { q: q as QubitId, phi: 0.3 }).collect();
            prop_assume!(!gates.is_empty());
            let layer = compile_layer(&gates, &c, &l).unwrap();
            let active: Vec<usize> = layer.terms().iter().map(|t| match t { Term::Single(z) => *z, Term::Pair(..) => unreachable!() }).collect();
            let expected: Vec<usize> = bits.iter().enumerate().filter(|(_, &b)| b).map(|(z, _)| z).collect();
            prop_assert_eq!(active, expected);
        }
    }
}
