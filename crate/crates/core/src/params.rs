//! System parameter derivation, reconfiguration timing and throughput.
//!
//! All times are seconds, capacitances farads, fields V/m. Counts and
//! micrometre geometry are integers so that electrode, gate and area totals
//! are exact.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{ElectrodeCounts, TopologyError, TrapLayout, ZoneGeometry};
use crate::wiring::{
    analog_errors, switch_budget, AnalogErrorParams, DemuxConfig, SwitchNetworkConfig, WiringError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Wiring(#[from] WiringError),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("sweep needs at least one qubit count and one k")]
    EmptySweep,
    #[error(transparent)]
    Csv(#[from] CsvError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("csv output failed: {0}")]
pub struct CsvError(pub String);

impl From<csv::Error> for ParamsError {
    fn from(e: csv::Error) -> Self {
        ParamsError::Csv(CsvError(e.to_string()))
    }
}

/// Independent inputs of the parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseInputs {
    pub n_qubits: usize,
    pub k: usize,
    /// Explicit `[m, n]`; otherwise the grid is optimised for `n_qubits`.
    pub grid: Option<[usize; 2]>,
    pub electrodes: ElectrodeCounts,
    pub geometry: ZoneGeometry,
    pub switch: SwitchNetworkConfig,
    pub demux: DemuxConfig,
    pub analog: AnalogErrorParams,
    /// Serial select link, bit/s.
    pub link_rate: f64,
    pub t_0: f64,
    pub t_1q: f64,
    pub t_2q: f64,
}

impl Default for BaseInputs {
    fn default() -> Self {
        BaseInputs {
            n_qubits: 1000,
            k: 6,
            grid: None,
            electrodes: ElectrodeCounts::default(),
            geometry: ZoneGeometry::default(),
            switch: SwitchNetworkConfig::default(),
            demux: DemuxConfig::default(),
            analog: AnalogErrorParams::default(),
            link_rate: 50e6,
            t_0: 100e-6,
            t_1q: 1e-6,
            t_2q: 100e-6,
        }
    }
}

impl BaseInputs {
    pub fn layout(&self) -> Result<TrapLayout, ParamsError> {
        Ok(match self.grid {
            Some([m, n]) => TrapLayout::new(m, n, self.k, self.electrodes, self.geometry)?,
            None => TrapLayout::build(self.n_qubits, self.k, self.electrodes, self.geometry)?,
        })
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        for (name, v) in [
            ("link_rate", self.link_rate),
            ("t_0", self.t_0),
            ("t_1q", self.t_1q),
            ("t_2q", self.t_2q),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(ParamsError::NonPositive(name));
            }
        }
        self.demux.validate()?;
        self.analog.validate()?;
        Ok(())
    }
}

/// Every row of the system parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub base: BaseInputs,
    pub zones: usize,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub junction_zones: usize,
    pub gate_zones: usize,
    pub dynamic_per_gate_zone: u64,
    pub dynamic_per_junction_zone: u64,
    pub shim_per_zone: u64,
    pub dynamic_electrodes: u64,
    pub shim_electrodes: u64,
    pub electrodes: u64,
    pub ion_height_um: u64,
    pub zone_x_um: u64,
    pub zone_y_um: u64,
    pub chip_x_um: u64,
    pub chip_y_um: u64,
    pub active_area_um2: u64,
    pub cap_density_ff_per_um2: f64,
    pub cap_area_um2: u64,
    pub capacitor_area_um2: u64,
    pub capacitance: f64,
    pub v_rf: f64,
    pub c_s_rf: f64,
    pub rf_pickup: f64,
    pub switch_settings: u64,
    pub dynamic_dacs: u64,
    pub mux_order: u64,
    pub shim_dacs: u64,
    pub select_word_bits: u64,
    pub link_rate: f64,
    pub select_time: f64,
    /// Link rate at which select words keep pace with swap steps.
    pub required_link_rate: f64,
    pub gates_per_dynamic: u64,
    pub gates_per_shim: u64,
    pub transmission_gates: u64,
    pub gate_area_um2: u64,
    pub gate_total_area_um2: u64,
    pub t_ec: f64,
    pub t_sc: f64,
    pub t_0: f64,
    pub reconfig_steps: usize,
    pub t_r: f64,
    /// Continuous step estimate `sqrt(8kN)`, for comparison only.
    pub estimated_steps: f64,
    pub c_t: f64,
    pub e_s: f64,
    pub charge_injection: f64,
    pub tau: f64,
    pub drift_reconfig: f64,
    pub drift_gate: f64,
    pub t_1q: f64,
    pub t_2q: f64,
    pub t_tag_1q: f64,
    pub t_tag_2q: f64,
    pub max_speed: Option<f64>,
    pub min_speed: Option<f64>,
}

pub fn derive(base: &BaseInputs) -> Result<SystemParams, ParamsError> {
    base.validate()?;
    let layout = base.layout()?;
    let budget = switch_budget(&layout, &base.switch, &base.demux);
    let rt = reconfig_time(&layout, base.t_0);
    let analog = analog_errors(&base.analog, &base.demux, rt.seconds, base.t_2q);
    let t_sc = base.demux.cycle_time();
    let speed = system_speed(base.t_1q, base.t_2q, t_sc, rt.seconds);
    let g = layout.geometry();
    let e = layout.electrodes();
    Ok(SystemParams {
        base: base.clone(),
        zones: layout.zone_count(),
        k: layout.k(),
        m: layout.m(),
        n: layout.n(),
        junction_zones: layout.junction_zone_count(),
        gate_zones: layout.gate_zone_count(),
        dynamic_per_gate_zone: e.dynamic_per_gate_zone,
        dynamic_per_junction_zone: e.dynamic_per_junction_zone,
        shim_per_zone: e.shim_per_zone,
        dynamic_electrodes: layout.dynamic_electrode_count(),
        shim_electrodes: layout.shim_electrode_count(),
        electrodes: layout.electrode_count(),
        ion_height_um: g.ion_height_um,
        zone_x_um: g.zone_x_um,
        zone_y_um: g.zone_y_um,
        chip_x_um: layout.m() as u64 * g.zone_x_um,
        chip_y_um: layout.n() as u64 * g.zone_y_um,
        active_area_um2: budget.active_area_um2,
        cap_density_ff_per_um2: base.demux.cap_density,
        cap_area_um2: base.demux.cap_area_um2,
        capacitor_area_um2: budget.capacitor_area_um2,
        capacitance: base.demux.capacitance(),
        v_rf: base.analog.v_rf,
        c_s_rf: base.analog.c_s_rf,
        rf_pickup: analog.rf_pickup,
        switch_settings: base.switch.settings,
        dynamic_dacs: budget.dynamic_dacs,
        mux_order: base.demux.order,
        shim_dacs: budget.shim_dacs,
        select_word_bits: budget.select_word_bits,
        link_rate: base.link_rate,
        select_time: budget.select_word_bits as f64 / base.link_rate,
        required_link_rate: crate::wiring::required_rate(layout.zone_count(), base.t_0),
        gates_per_dynamic: base.switch.gates_per_dynamic,
        gates_per_shim: base.switch.gates_per_shim,
        transmission_gates: budget.transmission_gates,
        gate_area_um2: base.switch.gate_area_um2,
        gate_total_area_um2: budget.gate_area_um2,
        t_ec: base.demux.t_ec,
        t_sc,
        t_0: base.t_0,
        reconfig_steps: rt.steps,
        t_r: rt.seconds,
        estimated_steps: rt.estimated_steps,
        c_t: base.analog.c_t,
        e_s: base.analog.e_s,
        charge_injection: analog.charge_injection,
        tau: base.analog.tau,
        drift_reconfig: analog.drift_reconfig,
        drift_gate: analog.drift_gate,
        t_1q: base.t_1q,
        t_2q: base.t_2q,
        t_tag_1q: t_sc + base.t_1q,
        t_tag_2q: t_sc + base.t_2q,
        max_speed: speed.max,
        min_speed: speed.min,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub key: &'static str,
    pub quantity: &'static str,
    pub value: f64,
    pub unit: &'static str,
    /// Value at report precision, in `unit`.
    pub display: String,
}

fn row(
    key: &'static str,
    quantity: &'static str,
    value: f64,
    unit: &'static str,
    digits: usize,
) -> ReportRow {
    ReportRow {
        key,
        quantity,
        value,
        unit,
        display: format!("{value:.digits$}"),
    }
}

impl SystemParams {
    /// Table rows in display units.
    pub fn report(&self) -> Vec<ReportRow> {
        let c = |v: u64| v as f64;
        let u = |v: usize| v as f64;
        let mm2 = |um2: u64| um2 as f64 * 1e-6;
        let opt = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
        vec![
            row("zones", "qubits = zones", u(self.zones), "", 0),
            row("k", "qubits per junction", u(self.k), "", 0),
            row("m", "zones along segments", u(self.m), "", 0),
            row("n", "zones across segments", u(self.n), "", 0),
            row(
                "junction_zones",
                "junction zones",
                u(self.junction_zones),
                "",
                0,
            ),
            row("gate_zones", "gate zones", u(self.gate_zones), "", 0),
            row(
                "dynamic_per_gate_zone",
                "dynamic electrodes per gate zone",
                c(self.dynamic_per_gate_zone),
                "",
                0,
            ),
            row(
                "dynamic_per_junction_zone",
                "dynamic electrodes per junction zone",
                c(self.dynamic_per_junction_zone),
                "",
                0,
            ),
            row(
                "shim_per_zone",
                "shim electrodes per zone",
                c(self.shim_per_zone),
                "",
                0,
            ),
            row(
                "dynamic_electrodes",
                "dynamic electrodes",
                c(self.dynamic_electrodes),
                "",
                0,
            ),
            row(
                "shim_electrodes",
                "shim electrodes",
                c(self.shim_electrodes),
                "",
                0,
            ),
            row("electrodes", "electrodes", c(self.electrodes), "", 0),
            row("ion_height", "ion height", c(self.ion_height_um), "um", 0),
            row("zone_x", "zone size x", c(self.zone_x_um), "um", 0),
            row("zone_y", "zone size y", c(self.zone_y_um), "um", 0),
            row(
                "chip_x",
                "active region x",
                c(self.chip_x_um) * 1e-3,
                "mm",
                1,
            ),
            row(
                "chip_y",
                "active region y",
                c(self.chip_y_um) * 1e-3,
                "mm",
                1,
            ),
            row(
                "active_area",
                "active area",
                mm2(self.active_area_um2),
                "mm2",
                1,
            ),
            row(
                "cap_density",
                "capacitance density",
                self.cap_density_ff_per_um2,
                "fF/um2",
                1,
            ),
            row("cap_area", "capacitor size", c(self.cap_area_um2), "um2", 0),
            row(
                "capacitor_area",
                "capacitor area",
                mm2(self.capacitor_area_um2),
                "mm2",
                1,
            ),
            row(
                "capacitance",
                "shim capacitance",
                self.capacitance * 1e12,
                "pF",
                1,
            ),
            row("v_rf", "RF voltage", self.v_rf, "V", 0),
            row(
                "c_s_rf",
                "shim-to-RF capacitance",
                self.c_s_rf * 1e15,
                "fF",
                1,
            ),
            row(
                "rf_pickup",
                "RF voltage on shims",
                self.rf_pickup * 1e3,
                "mV",
                2,
            ),
            row(
                "switch_settings",
                "switch settings",
                c(self.switch_settings),
                "",
                0,
            ),
            row("dynamic_dacs", "dynamic DACs", c(self.dynamic_dacs), "", 0),
            row("mux_order", "multiplexing order", c(self.mux_order), "", 0),
            row("shim_dacs", "shim DACs", c(self.shim_dacs), "", 0),
            row(
                "select_word_bits",
                "select word length",
                c(self.select_word_bits),
                "bit",
                0,
            ),
            row(
                "link_rate",
                "serial link rate",
                self.link_rate * 1e-6,
                "Mbit/s",
                1,
            ),
            row(
                "select_time",
                "select time",
                self.select_time * 1e6,
                "us",
                1,
            ),
            row(
                "required_link_rate",
                "required link rate",
                self.required_link_rate * 1e-6,
                "Mbit/s",
                2,
            ),
            row(
                "gates_per_dynamic",
                "gates per dynamic electrode",
                c(self.gates_per_dynamic),
                "",
                0,
            ),
            row(
                "gates_per_shim",
                "gates per shim electrode",
                c(self.gates_per_shim),
                "",
                0,
            ),
            row(
                "transmission_gates",
                "transmission gates",
                c(self.transmission_gates),
                "",
                0,
            ),
            row(
                "gate_area",
                "transmission gate size",
                c(self.gate_area_um2),
                "um2",
                0,
            ),
            row(
                "gate_total_area",
                "transmission gate area",
                mm2(self.gate_total_area_um2),
                "mm2",
                1,
            ),
            row("t_ec", "charge time per shim", self.t_ec * 1e6, "us", 1),
            row("t_sc", "shim charging cycle", self.t_sc * 1e6, "us", 1),
            row("t_0", "swap time", self.t_0 * 1e6, "us", 1),
            row(
                "reconfig_steps",
                "reconfiguration steps",
                u(self.reconfig_steps),
                "",
                0,
            ),
            row("t_r", "reconfiguration time", self.t_r * 1e3, "ms", 2),
            row(
                "estimated_steps",
                "continuous step estimate",
                self.estimated_steps,
                "",
                1,
            ),
            row("c_t", "transistor capacitance", self.c_t * 1e15, "fF", 1),
            row("e_s", "shim field", self.e_s, "V/m", 1),
            row(
                "charge_injection",
                "charge injection field",
                self.charge_injection,
                "V/m",
                3,
            ),
            row("tau", "shim discharge time constant", self.tau, "s", 1),
            row(
                "drift_reconfig",
                "drift during reconfiguration",
                self.drift_reconfig * 1e3,
                "mV/m",
                2,
            ),
            row(
                "drift_gate",
                "drift during two-qubit gate",
                self.drift_gate * 1e3,
                "mV/m",
                3,
            ),
            row("t_1q", "one-qubit pulse", self.t_1q * 1e6, "us", 1),
            row("t_2q", "two-qubit pulse", self.t_2q * 1e6, "us", 1),
            row(
                "t_tag_1q",
                "assisted one-qubit gate",
                self.t_tag_1q * 1e6,
                "us",
                1,
            ),
            row(
                "t_tag_2q",
                "assisted two-qubit gate",
                self.t_tag_2q * 1e6,
                "us",
                1,
            ),
            row(
                "max_speed",
                "maximum speed",
                opt(self.max_speed),
                "layers/s",
                1,
            ),
            row(
                "min_speed",
                "minimum speed",
                opt(self.min_speed),
                "layers/s",
                1,
            ),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconfigTime {
    pub steps: usize,
    pub seconds: f64,
    pub estimated_steps: f64,
    pub estimated_seconds: f64,
}

/// Worst-case reconfiguration bound `2m + kn` swap steps.
pub fn reconfig_time(layout: &TrapLayout, t_0: f64) -> ReconfigTime {
    let steps = layout.step_bound();
    let est = (8.0 * layout.k() as f64 * layout.zone_count() as f64).sqrt();
    ReconfigTime {
        steps,
        seconds: steps as f64 * t_0,
        estimated_steps: est,
        estimated_seconds: est * t_0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryForm {
    Linear,
    Quadratic,
}

/// Memory error per qubit per reconfiguration as a function of its duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryErrorModel {
    pub form: MemoryForm,
    /// Per second (linear) or per second squared (quadratic).
    pub coefficient: f64,
}

pub const MEMORY_ANCHOR_TIME: f64 = 22e-3;
pub const MEMORY_ANCHOR_ERROR: f64 = 2e-5;

impl MemoryErrorModel {
    /// Model of the given form through `(t, error)`.
    pub fn calibrated(form: MemoryForm, t: f64, error: f64) -> Self {
        let coefficient = match form {
            MemoryForm::Linear => error / t,
            MemoryForm::Quadratic => error / (t * t),
        };
        MemoryErrorModel { form, coefficient }
    }

    pub fn error(&self, t: f64) -> Result<f64, ParamsError> {
        if t.is_nan() || t < 0.0 {
            return Err(ParamsError::NegativeTime(t));
        }
        Ok(match self.form {
            MemoryForm::Linear => self.coefficient * t,
            MemoryForm::Quadratic => self.coefficient * t * t,
        })
    }
}

impl Default for MemoryErrorModel {
    fn default() -> Self {
        Self::calibrated(MemoryForm::Linear, MEMORY_ANCHOR_TIME, MEMORY_ANCHOR_ERROR)
    }
}

/// Circuit layers per second; `None` when the time in the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpeed {
    pub max: Option<f64>,
    pub min: Option<f64>,
}

pub fn system_speed(t_1q: f64, t_2q: f64, t_sc: f64, t_r: f64) -> SystemSpeed {
    let rate = |t: f64| (t > 0.0).then(|| 1.0 / t);
    SystemSpeed {
        max: rate(t_sc + t_1q),
        min: rate(t_r + t_2q + t_sc),
    }
}

/// Fraction of run time spent recharging shims with `layers` gate layers per
/// reconfiguration.
pub fn shim_overhead(layers: u64, t_sc: f64, t_r: f64) -> f64 {
    layers as f64 * t_sc / t_r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub steps: usize,
    pub t_r_s: f64,
    pub mem_error: f64,
}

/// Optimised layout, worst-case reconfiguration time and memory error for
/// every `(N, k)` pair, `N` varying slowest.
pub fn sweep_scaling(
    n_values: &[usize],
    k_values: &[usize],
    t_0: f64,
    model: &MemoryErrorModel,
) -> Result<Vec<SweepRow>, ParamsError> {
    if n_values.is_empty() || k_values.is_empty() {
        return Err(ParamsError::EmptySweep);
    }
    if t_0.is_nan() || t_0 <= 0.0 {
        return Err(ParamsError::NonPositive("t_0"));
    }
    let cells: Vec<(usize, usize)> = n_values
        .iter()
        .flat_map(|&n| k_values.iter().map(move |&k| (n, k)))
        .collect();
    cells
        .par_iter()
        .map(|&(target, k)| {
            let layout = TrapLayout::build(
                target,
                k,
                ElectrodeCounts::default(),
                ZoneGeometry::default(),
            )?;
            let rt = reconfig_time(&layout, t_0);
            Ok(SweepRow {
                n_qubits: target,
                k,
                m: layout.m(),
                n: layout.n(),
                steps: rt.steps,
                t_r_s: rt.seconds,
                mem_error: model.error(rt.seconds)?,
            })
        })
        .collect()
}

pub const SWEEP_HEADER: [&str; 7] = ["N", "k", "m", "n", "steps", "t_r_s", "mem_error"];

/// Writes sweep rows as CSV with a header, appending a `config_hash` column
/// when a hash is given.
pub fn write_sweep_csv<W: Write>(
    rows: &[SweepRow],
    out: W,
    config_hash: Option<&str>,
) -> Result<(), ParamsError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = SWEEP_HEADER.to_vec();
    if config_hash.is_some() {
        header.push("config_hash");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.n_qubits.to_string(),
            r.k.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.steps.to_string(),
            format!("{:e}", r.t_r_s),
            format!("{:e}", r.mem_error),
        ];
        if let Some(h) = config_hash {
            rec.push(h.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()
        .map_err(|e| ParamsError::Csv(CsvError(e.to_string())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn table_rows() {
        let p = derive(&BaseInputs::default()).unwrap();
        assert_eq!((p.m, p.n, p.zones), (54, 19, 1026));
        assert_eq!((p.junction_zones, p.gate_zones), (171, 855));
        assert_eq!(
            (p.dynamic_electrodes, p.shim_electrodes, p.electrodes),
            (11970, 10260, 22230)
        );
        assert_eq!((p.chip_x_um, p.chip_y_um), (21600, 7600));
        assert_eq!(
            (p.dynamic_dacs, p.shim_dacs, p.select_word_bits),
            (120, 81, 1026)
        );
        assert_eq!(p.transmission_gates, 34200);
        assert_eq!(p.reconfig_steps, 222);
        assert_relative_eq!(p.t_r, 22.2e-3, max_relative = 1e-12);
        assert_relative_eq!(p.select_time, 20.52e-6, max_relative = 1e-12);
        assert_relative_eq!(p.t_tag_1q, 385e-6, max_relative = 1e-12);
        assert_relative_eq!(p.t_tag_2q, 484e-6, max_relative = 1e-12);
        assert_relative_eq!(p.capacitance, 30e-12, max_relative = 1e-12);
        assert_relative_eq!(p.max_speed.unwrap(), 2597.4, max_relative = 1e-4);
        assert_relative_eq!(p.min_speed.unwrap(), 44.08, max_relative = 1e-3);
        assert_relative_eq!(p.estimated_steps, 49248f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn tiny_table_by_hand() {
        let base = BaseInputs {
            n_qubits: 4,
            k: 1,
            grid: Some([2, 2]),
            electrodes: ElectrodeCounts {
                dynamic_per_gate_zone: 0,
                dynamic_per_junction_zone: 3,
                shim_per_zone: 1,
            },
            ..BaseInputs::default()
        };
        let p = derive(&base).unwrap();
        // Every zone is a junction with k = 1.
        assert_eq!((p.junction_zones, p.gate_zones), (4, 0));
        assert_eq!(
            (p.dynamic_electrodes, p.shim_electrodes, p.electrodes),
            (12, 4, 16)
        );
        assert_eq!(p.dynamic_dacs, 2 * 2 * 3);
        assert_eq!(p.shim_dacs, 1);
        assert_eq!(p.transmission_gates, 2 * 12 + 4);
        assert_eq!(p.reconfig_steps, 2 * 2 + 2);
    }

    #[test]
    fn zero_counts_give_zero_totals() {
        let base = BaseInputs {
            electrodes: ElectrodeCounts {
                dynamic_per_gate_zone: 0,
                dynamic_per_junction_zone: 0,
                shim_per_zone: 0,
            },
            ..BaseInputs::default()
        };
        let p = derive(&base).unwrap();
        assert_eq!(
            (
                p.electrodes,
                p.transmission_gates,
                p.shim_dacs,
                p.capacitor_area_um2
            ),
            (0, 0, 0, 0)
        );
    }

    #[test]
    fn rejects_inconsistent_grid() {
        let base = BaseInputs {
            grid: Some([10, 5]),
            ..BaseInputs::default()
        };
        assert!(matches!(
            derive(&base),
            Err(ParamsError::Topology(TopologyError::NotMultipleOfK { .. }))
        ));
    }

    #[test]
    fn derive_round_trips_through_json() {
        let p = derive(&BaseInputs::default()).unwrap();
        let back: SystemParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(derive(&back.base).unwrap(), p);
    }

    #[test]
    fn memory_model() {
        let m = MemoryErrorModel::default();
        assert_eq!(m.error(0.0).unwrap(), 0.0);
        assert_relative_eq!(m.error(22e-3).unwrap(), 2e-5, max_relative = 1e-12);
        assert_relative_eq!(m.error(44e-3).unwrap(), 4e-5, max_relative = 1e-12);
        assert!(m.error(-1.0).is_err());
        let q = MemoryErrorModel::calibrated(MemoryForm::Quadratic, 22e-3, 2e-5);
        assert_relative_eq!(q.error(44e-3).unwrap(), 8e-5, max_relative = 1e-12);
    }

    #[test]
    fn speed_limits() {
        let s = system_speed(1e-6, 100e-6, 384e-6, 0.0);
        assert_relative_eq!(s.min.unwrap(), 1.0 / 484e-6, max_relative = 1e-12);
        assert_eq!(system_speed(0.0, 1e-4, 0.0, 0.0).max, None);
    }

    #[test]
    fn overhead() {
        assert_relative_eq!(
            shim_overhead(10, 384e-6, 22e-3),
            0.17454,
            max_relative = 1e-4
        );
        assert_eq!(shim_overhead(0, 384e-6, 22e-3), 0.0);
        assert_relative_eq!(
            shim_overhead(20, 384e-6, 22e-3),
            2.0 * shim_overhead(10, 384e-6, 22e-3)
        );
    }

    #[test]
    fn sweep_rows_and_csv() {
        let rows =
            sweep_scaling(&[1000, 4000], &[6], 100e-6, &MemoryErrorModel::default()).unwrap();
        assert_eq!((rows[0].m, rows[0].n, rows[0].steps), (54, 19, 222));
        let ratio = rows[1].t_r_s / rows[0].t_r_s;
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
        let mut buf = Vec::new();
        write_sweep_csv(&rows[..1], &mut buf, Some("ab")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "N,k,m,n,steps,t_r_s,mem_error,config_hash"
        );
        assert_eq!(text.lines().count(), 2);
        assert_eq!(
            sweep_scaling(&[], &[6], 1e-4, &MemoryErrorModel::default()),
            Err(ParamsError::EmptySweep)
        );
    }

    proptest! {
        #[test]
        fn memory_error_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, quad in any::<bool>()) {
            let form = if quad { MemoryForm::Quadratic } else { MemoryForm::Linear };
            let m = MemoryErrorModel::calibrated(form, 22e-3, 2e-5);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(m.error(lo).unwrap() <= m.error(hi).unwrap());
        }

        #[test]
        fn speed_decreases_with_time(t in 1e-6f64..1e-2, extra in 1e-7f64..1e-2) {
            let a = system_speed(t, t, t, t);
            let b = system_speed(t + extra, t + extra, t + extra, t + extra);
            prop_assert!(b.max.unwrap() < a.max.unwrap());
            prop_assert!(b.min.unwrap() < a.min.unwrap());
        }
    }
}
