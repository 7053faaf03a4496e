//! Switch network and shim demultiplexer models.
//!
//! Dynamic electrodes are driven by a fixed bank of DACs through per-zone
//! switches steered by a select word. Shim electrodes hold their voltage on
//! integrated capacitors that a small number of DACs recharge in turn through
//! demultiplexers; slot 0 of every demultiplexer connects nothing.

pub mod select;

pub use select::*;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::TrapLayout;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WiringError {
    #[error("{bytes} bytes cannot hold a {bits}-bit select word")]
    BadWordLength { bits: usize, bytes: usize },
    #[error("padding bits past the end of a select word are set")]
    PaddingBitsSet,
    #[error("invalid hex select word: {0}")]
    BadHex(String),
    #[error("select stream ends early")]
    TruncatedStream,
    #[error("not a select stream (bad magic)")]
    BadMagic,
    #[error("select stream has trailing bytes")]
    TrailingBytes,
    #[error("multiplexing order must be a power of two of at least 2, got {0}")]
    BadMuxOrder(u64),
    #[error("{shims} shims exceed the capacity of {capacity} demultiplexer outputs")]
    CapacityExceeded { shims: u64, capacity: u64 },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchMode {
    /// Every dynamic electrode has its own stay/swap switch pair.
    PerElectrode,
    /// One switchable electrode per zone pushing the ions left or right.
    SinglePerZone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchNetworkConfig {
    pub mode: SwitchMode,
    /// Switch settings per zone (stay, swap).
    pub settings: u64,
    pub gates_per_dynamic: u64,
    pub gates_per_shim: u64,
    /// Area of one transmission gate, square micrometres.
    pub gate_area_um2: u64,
}

impl Default for SwitchNetworkConfig {
    fn default() -> Self {
        SwitchNetworkConfig {
            mode: SwitchMode::PerElectrode,
            settings: 2,
            gates_per_dynamic: 2,
            gates_per_shim: 1,
            gate_area_um2: 50 * 50,
        }
    }
}

/// Extra waveform sources of the single-switch variant.
pub const SINGLE_PER_ZONE_EXTRA_DACS: u64 = 2;

impl SwitchNetworkConfig {
    pub fn dynamic_dacs(&self, layout: &TrapLayout) -> u64 {
        let e = layout.electrodes();
        let base = 2 * self.settings * (e.dynamic_per_gate_zone + e.dynamic_per_junction_zone);
        match self.mode {
            SwitchMode::PerElectrode => base,
            SwitchMode::SinglePerZone => base + SINGLE_PER_ZONE_EXTRA_DACS,
        }
    }

    pub fn transmission_gates(&self, layout: &TrapLayout) -> u64 {
        let shims = self.gates_per_shim * layout.shim_electrode_count();
        match self.mode {
            SwitchMode::PerElectrode => {
                self.gates_per_dynamic * layout.dynamic_electrode_count() + shims
            }
            SwitchMode::SinglePerZone => layout.zone_count() as u64 + shims,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemuxConfig {
    /// Outputs per demultiplexer, a power of two; output 0 is the off state.
    pub order: u64,
    /// Charge time of one electrode, seconds.
    pub t_ec: f64,
    /// fF per square micrometre.
    pub cap_density: f64,
    /// Square micrometres.
    pub cap_area_um2: u64,
}

impl Default for DemuxConfig {
    fn default() -> Self {
        DemuxConfig {
            order: 128,
            t_ec: 3e-6,
            cap_density: 3.0,
            cap_area_um2: 100 * 100,
        }
    }
}

impl DemuxConfig {
    pub fn validate(&self) -> Result<(), WiringError> {
        if self.order < 2 || !self.order.is_power_of_two() {
            return Err(WiringError::BadMuxOrder(self.order));
        }
        if self.t_ec.is_nan() || self.t_ec <= 0.0 {
            return Err(WiringError::NonPositive("t_ec"));
        }
        if self.cap_density.is_nan() || self.cap_density <= 0.0 {
            return Err(WiringError::NonPositive("cap_density"));
        }
        Ok(())
    }

    pub fn register_bits(&self) -> u32 {
        self.order.trailing_zeros()
    }

    /// Electrodes served by one DAC.
    pub fn outputs_per_dac(&self) -> u64 {
        self.order - 1
    }

    pub fn shim_dacs(&self, shims: u64) -> u64 {
        shims.div_ceil(self.outputs_per_dac())
    }

    /// Full recharge cycle, seconds.
    pub fn cycle_time(&self) -> f64 {
        self.order as f64 * self.t_ec
    }

    /// Farads.
    pub fn capacitance(&self) -> f64 {
        self.cap_density * self.cap_area_um2 as f64 * 1e-15
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeSlot {
    /// Demultiplexer output, `1..order`.
    pub slot: u64,
    pub shim: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeSchedule {
    pub order: u64,
    pub t_ec: f64,
    /// Slots of each DAC in firing order.
    pub dacs: Vec<Vec<ChargeSlot>>,
    /// Output at which the clock pauses with every electrode disconnected.
    pub pause_slot: u64,
    pub cycle_time: f64,
}

impl ChargeSchedule {
    /// Start time of `slot` within the cycle, seconds. Slot 0 runs first.
    pub fn slot_start(&self, slot: u64) -> f64 {
        slot as f64 * self.t_ec
    }

    pub fn shim_count(&self) -> usize {
        self.dacs.iter().map(Vec::len).sum()
    }
}

/// Charging schedule for `shims` electrodes using the fewest DACs.
pub fn demux_schedule(cfg: &DemuxConfig, shims: u64) -> Result<ChargeSchedule, WiringError> {
    cfg.validate()?;
    demux_schedule_on(cfg, shims, cfg.shim_dacs(shims))
}

/// Charging schedule on a fixed bank of `dacs` DACs. Shims are dealt out
/// contiguously: shim `s` goes to DAC `s / (M - 1)`, output `s % (M - 1) + 1`.
pub fn demux_schedule_on(
    cfg: &DemuxConfig,
    shims: u64,
    dacs: u64,
) -> Result<ChargeSchedule, WiringError> {
    cfg.validate()?;
    let per = cfg.outputs_per_dac();
    if shims > dacs * per {
        return Err(WiringError::CapacityExceeded {
            shims,
            capacity: dacs * per,
        });
    }
    let mut out = vec![Vec::new(); dacs as usize];
    for shim in 0..shims {
        out[(shim / per) as usize].push(ChargeSlot {
            slot: shim % per + 1,
            shim,
        });
    }
    Ok(ChargeSchedule {
        order: cfg.order,
        t_ec: cfg.t_ec,
        dacs: out,
        pause_slot: 0,
        cycle_time: cfg.cycle_time(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalogErrorParams {
    /// Volts.
    pub v_rf: f64,
    /// Shim-to-RF capacitance, farads.
    pub c_s_rf: f64,
    /// Switch transistor capacitance, farads.
    pub c_t: f64,
    /// Typical shim field, V/m.
    pub e_s: f64,
    /// Shim discharge time constant, seconds.
    pub tau: f64,
    /// Mode frequency sensitivity, Hz per V/m.
    pub df_de: f64,
}

impl Default for AnalogErrorParams {
    fn default() -> Self {
        AnalogErrorParams {
            v_rf: 100.0,
            c_s_rf: 1e-15,
            c_t: 30e-15,
            e_s: 200.0,
            tau: 180.0,
            df_de: 1e3,
        }
    }
}

impl AnalogErrorParams {
    pub fn validate(&self) -> Result<(), WiringError> {
        for (name, v) in [
            ("v_rf", self.v_rf),
            ("c_s_rf", self.c_s_rf),
            ("c_t", self.c_t),
            ("e_s", self.e_s),
            ("tau", self.tau),
            ("df_de", self.df_de),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(WiringError::NonPositive(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalogErrors {
    /// RF voltage coupled onto a floating shim, volts.
    pub rf_pickup: f64,
    /// Field offset from switch charge injection, V/m.
    pub charge_injection: f64,
    /// Field drift over one reconfiguration, V/m.
    pub drift_reconfig: f64,
    /// Field drift over one two-qubit gate, V/m.
    pub drift_gate: f64,
    /// Mode frequency shift during a two-qubit gate, Hz.
    pub df: f64,
    pub gate_error: f64,
}

pub fn analog_errors(
    p: &AnalogErrorParams,
    cfg: &DemuxConfig,
    t_r: f64,
    t_2q: f64,
) -> AnalogErrors {
    let c = cfg.capacitance();
    let drift = |t: f64| p.e_s * -(-t / p.tau).exp_m1();
    let drift_gate = drift(t_2q);
    let df = p.df_de * drift_gate;
    AnalogErrors {
        rf_pickup: p.v_rf * p.c_s_rf / c,
        charge_injection: p.e_s * p.c_t / c,
        drift_reconfig: drift(t_r),
        drift_gate,
        df,
        gate_error: df * df * t_2q * t_2q,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchBudget {
    pub mode: SwitchMode,
    pub transmission_gates: u64,
    pub dynamic_dacs: u64,
    pub shim_dacs: u64,
    pub select_word_bits: u64,
    /// Square micrometres.
    pub gate_area_um2: u64,
    pub capacitor_area_um2: u64,
    pub active_area_um2: u64,
    /// Capacitor area needed under one zone.
    pub capacitor_area_per_zone_um2: u64,
    pub zone_area_um2: u64,
    /// Whether a zone's capacitors fit under the zone.
    pub footprint_ok: bool,
}

impl SwitchBudget {
    pub fn gate_area_mm2(&self) -> f64 {
        um2_to_mm2(self.gate_area_um2)
    }

    pub fn capacitor_area_mm2(&self) -> f64 {
        um2_to_mm2(self.capacitor_area_um2)
    }

    pub fn active_area_mm2(&self) -> f64 {
        um2_to_mm2(self.active_area_um2)
    }
}

pub fn um2_to_mm2(um2: u64) -> f64 {
    um2 as f64 * 1e-6
}

pub fn switch_budget(
    layout: &TrapLayout,
    sw: &SwitchNetworkConfig,
    demux: &DemuxConfig,
) -> SwitchBudget {
    let g = layout.geometry();
    let shims = layout.shim_electrode_count();
    let n_gates = sw.transmission_gates(layout);
    let per_zone = layout.electrodes().shim_per_zone * demux.cap_area_um2;
    SwitchBudget {
        mode: sw.mode,
        transmission_gates: n_gates,
        dynamic_dacs: sw.dynamic_dacs(layout),
        shim_dacs: demux.shim_dacs(shims),
        select_word_bits: layout.zone_count() as u64,
        gate_area_um2: n_gates * sw.gate_area_um2,
        capacitor_area_um2: shims * demux.cap_area_um2,
        active_area_um2: layout.m() as u64 * g.zone_x_um * layout.n() as u64 * g.zone_y_um,
        capacitor_area_per_zone_um2: per_zone,
        zone_area_um2: g.zone_area_um2(),
        footprint_ok: per_zone <= g.zone_area_um2(),
    }
}
