//! Run configuration: flat `key = value` TOML with environment overrides.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gates::GateMode;
use crate::params::{
    BaseInputs, MemoryErrorModel, MemoryForm, MEMORY_ANCHOR_ERROR, MEMORY_ANCHOR_TIME,
};
use crate::topology::{ElectrodeCounts, ZoneGeometry};
use crate::wiring::{AnalogErrorParams, DemuxConfig, SwitchMode, SwitchNetworkConfig};

pub const ENV_PREFIX: &str = "WISESIM_";

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub key: Option<String>,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "config key `{k}`: {}", self.msg),
            None => f.write_str(&self.msg),
        }
    }
}

fn key_err(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        key: Some(key.to_string()),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_qubits: usize,
    pub k: usize,
    /// Explicit grid; both or neither.
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub n_de_gz: u64,
    pub n_de_jz: u64,
    pub n_se_z: u64,
    pub ion_height_um: u64,
    /// Default ten ion heights.
    pub zone_x_um: Option<u64>,
    pub zone_y_um: Option<u64>,
    pub t_0: f64,
    pub t_ec: f64,
    pub t_1q: f64,
    pub t_2q: f64,
    pub link_rate: f64,
    pub mux_order: u64,
    pub cap_density: f64,
    pub cap_area_um2: u64,
    pub gate_area_um2: u64,
    pub v_rf: f64,
    pub c_s_rf: f64,
    pub c_t: f64,
    pub e_s: f64,
    pub tau: f64,
    pub df_de: f64,
    pub memory_model: MemoryForm,
    pub switch_mode: SwitchMode,
    pub gate_mode: GateMode,
    pub seed: u64,
    /// Non-DAC connections counted in the I/O total.
    pub aux_lines: u64,
    /// Gate layers between reconfigurations.
    pub layers_per_reconfig: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = BaseInputs::default();
        RunConfig {
            n_qubits: b.n_qubits,
            k: b.k,
            m: None,
            n: None,
            n_de_gz: b.electrodes.dynamic_per_gate_zone,
            n_de_jz: b.electrodes.dynamic_per_junction_zone,
            n_se_z: b.electrodes.shim_per_zone,
            ion_height_um: b.geometry.ion_height_um,
            zone_x_um: None,
            zone_y_um: None,
            t_0: b.t_0,
            t_ec: b.demux.t_ec,
            t_1q: b.t_1q,
            t_2q: b.t_2q,
            link_rate: b.link_rate,
            mux_order: b.demux.order,
            cap_density: b.demux.cap_density,
            cap_area_um2: b.demux.cap_area_um2,
            gate_area_um2: b.switch.gate_area_um2,
            v_rf: b.analog.v_rf,
            c_s_rf: b.analog.c_s_rf,
            c_t: b.analog.c_t,
            e_s: b.analog.e_s,
            tau: b.analog.tau,
            df_de: b.analog.df_de,
            memory_model: MemoryForm::Linear,
            switch_mode: SwitchMode::PerElectrode,
            gate_mode: GateMode::Demux,
            seed: 0,
            aux_lines: 10,
            layers_per_reconfig: 10,
        }
    }
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(key_err(key, "expected a number")),
    }
}

fn as_u64(key: &str, v: &toml::Value) -> Result<u64, ConfigError> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(key_err(key, "expected a non-negative integer")),
    }
}

fn as_str<'v>(key: &str, v: &'v toml::Value) -> Result<&'v str, ConfigError> {
    v.as_str().ok_or_else(|| key_err(key, "expected a string"))
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(key_err(key, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Sets one key from a TOML value.
    pub fn set(&mut self, key: &str, v: &toml::Value) -> Result<(), ConfigError> {
        let usize_of = |v| as_u64(key, v).map(|x| x as usize);
        match key {
            "n_qubits" => self.n_qubits = usize_of(v)?,
            "k" => self.k = usize_of(v)?,
            "m" => self.m = Some(usize_of(v)?),
            "n" => self.n = Some(usize_of(v)?),
            "n_de_gz" => self.n_de_gz = as_u64(key, v)?,
            "n_de_jz" => self.n_de_jz = as_u64(key, v)?,
            "n_se_z" => self.n_se_z = as_u64(key, v)?,
            "ion_height_um" => self.ion_height_um = as_u64(key, v)?,
            "zone_x_um" => self.zone_x_um = Some(as_u64(key, v)?),
            "zone_y_um" => self.zone_y_um = Some(as_u64(key, v)?),
            "t_0" => self.t_0 = positive(key, as_f64(key, v)?)?,
            "t_ec" => self.t_ec = positive(key, as_f64(key, v)?)?,
            "t_1q" => self.t_1q = positive(key, as_f64(key, v)?)?,
            "t_2q" => self.t_2q = positive(key, as_f64(key, v)?)?,
            "link_rate" => self.link_rate = positive(key, as_f64(key, v)?)?,
            "mux_order" => {
                let m = as_u64(key, v)?;
                if m < 2 || !m.is_power_of_two() {
                    return Err(key_err(
                        key,
                        format!("must be a power of two >= 2, got {m}"),
                    ));
                }
                self.mux_order = m;
            }
            "cap_density" => self.cap_density = positive(key, as_f64(key, v)?)?,
            "cap_area_um2" => self.cap_area_um2 = as_u64(key, v)?,
            "gate_area_um2" => self.gate_area_um2 = as_u64(key, v)?,
            "v_rf" => self.v_rf = positive(key, as_f64(key, v)?)?,
            "c_s_rf" => self.c_s_rf = positive(key, as_f64(key, v)?)?,
            "c_t" => self.c_t = positive(key, as_f64(key, v)?)?,
            "e_s" => self.e_s = positive(key, as_f64(key, v)?)?,
            "tau" => self.tau = positive(key, as_f64(key, v)?)?,
            "df_de" => self.df_de = positive(key, as_f64(key, v)?)?,
            "memory_model" => {
                self.memory_model = match as_str(key, v)? {
                    "linear" => MemoryForm::Linear,
                    "quadratic" => MemoryForm::Quadratic,
                    other => return Err(key_err(key, format!("unknown model {other:?}"))),
                }
            }
            "switch_mode" => {
                self.switch_mode = match as_str(key, v)? {
                    "per_electrode" => SwitchMode::PerElectrode,
                    "single_per_zone" => SwitchMode::SinglePerZone,
                    other => return Err(key_err(key, format!("unknown mode {other:?}"))),
                }
            }
            "gate_mode" => {
                self.gate_mode = match as_str(key, v)? {
                    "demux" => GateMode::Demux,
                    "parallel" => GateMode::Parallel,
                    other => return Err(key_err(key, format!("unknown mode {other:?}"))),
                }
            }
            "seed" => self.seed = as_u64(key, v)?,
            "aux_lines" => self.aux_lines = as_u64(key, v)?,
            "layers_per_reconfig" => self.layers_per_reconfig = as_u64(key, v)?,
            _ => return Err(key_err(key, "unknown key")),
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        cfg.apply_toml(text)?;
        Ok(cfg)
    }

    pub fn apply_toml(&mut self, text: &str) -> Result<(), ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError {
            key: None,
            msg: format!("malformed config: {}", e.message()),
        })?;
        for (key, v) in &table {
            self.set(key, v)?;
        }
        self.check()
    }

    /// Applies `WISESIM_<KEY>` variables; values use TOML syntax, bare words
    /// are read as strings.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(
        &mut self,
        vars: I,
    ) -> Result<(), ConfigError> {
        let mut vars: Vec<_> = vars
            .into_iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(ENV_PREFIX)
                    .map(|s| (s.to_ascii_lowercase(), v))
            })
            .collect();
        vars.sort();
        for (key, raw) in vars {
            let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or(toml::Value::String(raw));
            self.set(&key, &value)?;
        }
        self.check()
    }

    /// Defaults, then the file at `path` if any, then the environment.
    pub fn load<I>(path: Option<&Path>, env: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut cfg = RunConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError {
                key: None,
                msg: format!("cannot read {}: {e}", p.display()),
            })?;
            cfg.apply_toml(&text)?;
        }
        cfg.apply_env(env)?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.m.is_some() != self.n.is_some() {
            return Err(key_err(
                if self.m.is_some() { "n" } else { "m" },
                "m and n must be given together",
            ));
        }
        if self.k == 0 {
            return Err(key_err("k", "must be at least 1"));
        }
        if self.m.is_none() && self.n_qubits < 2 {
            return Err(key_err("n_qubits", "must be at least 2"));
        }
        if let (Some(m), Some(n)) = (self.m, self.n) {
            if m == 0 || n == 0 {
                return Err(key_err("m", "grid must be non-empty"));
            }
            if m % self.k != 0 {
                return Err(key_err(
                    "m",
                    format!("must be a multiple of k = {}", self.k),
                ));
            }
        }
        Ok(())
    }

    pub fn base_inputs(&self) -> BaseInputs {
        let zone = 10 * self.ion_height_um;
        BaseInputs {
            n_qubits: self.n_qubits,
            k: self.k,
            grid: self.m.zip(self.n).map(|(m, n)| [m, n]),
            electrodes: ElectrodeCounts {
                dynamic_per_gate_zone: self.n_de_gz,
                dynamic_per_junction_zone: self.n_de_jz,
                shim_per_zone: self.n_se_z,
            },
            geometry: ZoneGeometry {
                zone_x_um: self.zone_x_um.unwrap_or(zone),
                zone_y_um: self.zone_y_um.unwrap_or(zone),
                ion_height_um: self.ion_height_um,
            },
            switch: SwitchNetworkConfig {
                mode: self.switch_mode,
                gate_area_um2: self.gate_area_um2,
                ..SwitchNetworkConfig::default()
            },
            demux: DemuxConfig {
                order: self.mux_order,
                t_ec: self.t_ec,
                cap_density: self.cap_density,
                cap_area_um2: self.cap_area_um2,
            },
            analog: AnalogErrorParams {
                v_rf: self.v_rf,
                c_s_rf: self.c_s_rf,
                c_t: self.c_t,
                e_s: self.e_s,
                tau: self.tau,
                df_de: self.df_de,
            },
            link_rate: self.link_rate,
            t_0: self.t_0,
            t_1q: self.t_1q,
            t_2q: self.t_2q,
        }
    }

    pub fn memory_model(&self) -> MemoryErrorModel {
        MemoryErrorModel::calibrated(self.memory_model, MEMORY_ANCHOR_TIME, MEMORY_ANCHOR_ERROR)
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }

    /// First four bytes of the hash, little endian.
    pub fn hash_tag(&self) -> u32 {
        let json = serde_json::to_vec(self).expect("config serialises");
        let d = Sha256::digest(json);
        u32::from_le_bytes([d[0], d[1], d[2], d[3]])
    }
}
