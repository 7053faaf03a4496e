use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wisesim_core::config::{ConfigError, RunConfig};
use wisesim_core::gates::{compile_layer, layer_duration, parse_circuit};
use wisesim_core::params::{derive, shim_overhead, sweep_scaling, write_sweep_csv, SystemParams};
use wisesim_core::pulse::{amplitude_report, crosstalk_report, log_grid};
use wisesim_core::routing::{execute, random_permutation, route_permutation, RoutingError};
use wisesim_core::topology::{QubitConfig, TrapLayout};
use wisesim_core::wiring::{analog_errors, demux_schedule, switch_budget, SelectStream};

const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "wisesim",
    version,
    about = "Routing, wiring and timing budgets for switch-controlled ion trap arrays"
)]
struct Cli {
    /// TOML file of `key = value` settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Pretty,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteMode {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
    Realistic,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the full system parameter table.
    Params {
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Plan, verify and export a reconfiguration schedule.
    Route {
        #[arg(long, value_enum)]
        mode: RouteMode,
        /// identity, reversal, random, random:<seed> or file:<path> (JSON array of zones).
        #[arg(long, default_value = "reversal")]
        perm: String,
        /// Writes <out>.json and <out>.sel.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case reconfiguration time and memory error over a grid of sizes.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        n_values: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        k_values: Vec<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Switch, DAC, footprint, analog error and throughput budget.
    Budget {
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Shim demultiplexer charging schedule.
    ShimSchedule {
        /// Defaults to every shim electrode of the configured trap.
        #[arg(long)]
        shims: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Composite pulse error tables.
    Pulse {
        #[command(subcommand)]
        which: PulseCommand,
    },
    /// Compile a circuit file into gate layer masks.
    Compile {
        circuit: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PulseCommand {
    Sk1 {
        #[arg(long, default_value_t = std::f64::consts::PI)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Comma separated error values; defaults to 9 log-spaced points in [1e-3, 1e-1].
        #[arg(long, value_delimiter = ',')]
        eps_grid: Vec<f64>,
        /// Relative amplitude error on the addressed qubit instead of spectator crosstalk.
        #[arg(long)]
        addressed: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Verify(String),
    Other(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::load(cli.config.as_deref(), std::env::vars())?;
    match cli.command {
        Command::Params { format } => cmd_params(&cfg, format),
        Command::Route { mode, perm, out } => cmd_route(&cfg, mode, &perm, out.as_deref()),
        Command::Sweep {
            n_values,
            k_values,
            output,
        } => cmd_sweep(&cfg, &n_values, &k_values, output.as_deref()),
        Command::Budget { format } => cmd_budget(&cfg, format),
        Command::ShimSchedule {
            shims,
            format,
            output,
        } => cmd_shim_schedule(&cfg, shims, format, output.as_deref()),
        Command::Pulse {
            which:
                PulseCommand::Sk1 {
                    theta,
                    phi,
                    eps_grid,
                    addressed,
                    output,
                },
        } => cmd_pulse(&cfg, theta, phi, eps_grid, addressed, output.as_deref()),
        Command::Compile { circuit, output } => cmd_compile(&cfg, &circuit, output.as_deref()),
    }
}

fn params_of(cfg: &RunConfig) -> Result<SystemParams> {
    derive(&cfg.base_inputs()).map_err(|e| Failure::Config(e.to_string()))
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => match io::stdout().write_all(bytes) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            r => r.context("writing stdout")?,
        },
    }
    Ok(())
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s.into_bytes()
}

fn csv_line(fields: &[String]) -> String {
    let quoted: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect();
    format!("{}\r\n", quoted.join(","))
}

fn cmd_params(cfg: &RunConfig, format: Format) -> Result<()> {
    let p = params_of(cfg)?;
    let hash = cfg.hash();
    let out = match format {
        Format::Json => json_bytes(&json!({ "config_hash": hash, "params": p })),
        Format::Csv => {
            let mut s = csv_line(
                &["key", "quantity", "value", "unit", "display", "config_hash"].map(String::from),
            );
            for r in p.report() {
                s += &csv_line(&[
                    r.key.into(),
                    r.quantity.into(),
                    format!("{:e}", r.value),
                    r.unit.into(),
                    r.display,
                    hash.clone(),
                ]);
            }
            s.into_bytes()
        }
        Format::Pretty => {
            let mut s = format!("# config {hash}\n");
            for r in p.report() {
                s += &format!("{:<38} {:>14} {}\n", r.quantity, r.display, r.unit);
            }
            s.into_bytes()
        }
    };
    emit(None, &out)
}

fn route_layout(cfg: &RunConfig, mode: RouteMode) -> Result<TrapLayout> {
    let base = cfg.base_inputs();
    let bad = |e: &dyn std::fmt::Display| Failure::Config(e.to_string());
    match mode {
        RouteMode::OneD => TrapLayout::linear(cfg.n_qubits).map_err(|e| bad(&e)),
        RouteMode::TwoD => match (cfg.m, cfg.n) {
            (Some(m), Some(n)) => TrapLayout::new(m, n, 1, base.electrodes, base.geometry),
            _ => TrapLayout::build(cfg.n_qubits, 1, base.electrodes, base.geometry),
        }
        .map_err(|e| bad(&e)),
        RouteMode::Realistic => {
            let l = base.layout().map_err(|e| bad(&e))?;
            l.chain_slots().map_err(|e| bad(&e))?;
            Ok(l)
        }
    }
}

/// Guaranteed worst-case step count of the planner used for `mode`.
fn route_bound(layout: &TrapLayout, mode: RouteMode) -> usize {
    let (m, n, k) = (layout.m(), layout.n(), layout.k());
    match mode {
        RouteMode::OneD => layout.zone_count(),
        RouteMode::TwoD => (2 * m + n).min(2 * n + m),
        RouteMode::Realistic => layout.step_bound() + 2 * k,
    }
}

fn parse_perm(cfg: &RunConfig, spec: &str, zones: usize) -> Result<Vec<usize>> {
    let bad = |msg: String| Failure::Config(format!("--perm: {msg}"));
    Ok(match spec {
        "identity" => (0..zones).collect(),
        "reversal" => (0..zones).rev().collect(),
        "random" => random_permutation(zones, cfg.seed),
        s if s.starts_with("random:") => {
            let seed = s["random:".len()..]
                .parse()
                .map_err(|_| bad(format!("bad seed in {s:?}")))?;
            random_permutation(zones, seed)
        }
        s if s.starts_with("file:") => {
            let path = &s["file:".len()..];
            let text =
                fs::read_to_string(path).map_err(|e| bad(format!("cannot read {path}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| bad(format!("{path}: {e}")))?
        }
        s => return Err(bad(format!("unknown permutation {s:?}"))),
    })
}

fn cmd_route(cfg: &RunConfig, mode: RouteMode, perm: &str, out: Option<&Path>) -> Result<()> {
    let layout = route_layout(cfg, mode)?;
    let perm = parse_perm(cfg, perm, layout.zone_count())?;
    let mut schedule = route_permutation(&layout, &perm).map_err(|e| match e {
        RoutingError::VerificationFailed => Failure::Verify(e.to_string()),
        e => Failure::Config(e.to_string()),
    })?;
    schedule.set_step_duration(cfg.t_0);
    let reached: QubitConfig =
        execute(&schedule, &schedule.source).map_err(|e| Failure::Verify(e.to_string()))?;
    if reached != schedule.target {
        return Err(Failure::Verify(
            "final configuration differs from the target".into(),
        ));
    }
    let hash = cfg.hash();
    let t_r = schedule.total_duration();
    let mem_error = cfg
        .memory_model()
        .error(t_r)
        .map_err(|e| Failure::Other(anyhow!(e)))?;
    let stats = json!({
        "config_hash": hash,
        "m": layout.m(),
        "n": layout.n(),
        "k": layout.k(),
        "steps": schedule.len(),
        "swap_steps": schedule.swap_step_count(),
        "bound": route_bound(&layout, mode),
        "t_r_s": t_r,
        "mem_error": mem_error,
        "verified": true,
    });
    if let Some(prefix) = out {
        let file = json!({ "config_hash": hash, "schedule": schedule.to_file() });
        emit(Some(&prefix.with_extension("json")), &json_bytes(&file))?;
        let stream =
            SelectStream::new(layout.zone_count(), cfg.hash_tag(), schedule.select_words())
                .map_err(|e| Failure::Other(anyhow!(e)))?;
        emit(Some(&prefix.with_extension("sel")), &stream.to_bytes())?;
    }
    emit(None, &json_bytes(&stats))
}

fn cmd_sweep(
    cfg: &RunConfig,
    n_values: &[usize],
    k_values: &[usize],
    output: Option<&Path>,
) -> Result<()> {
    let rows = sweep_scaling(n_values, k_values, cfg.t_0, &cfg.memory_model())
        .map_err(|e| Failure::Config(e.to_string()))?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf, Some(&cfg.hash())).map_err(|e| Failure::Other(anyhow!(e)))?;
    emit(output, &buf)
}

fn cmd_budget(cfg: &RunConfig, format: Format) -> Result<()> {
    let base = cfg.base_inputs();
    let p = params_of(cfg)?;
    let layout = base.layout().map_err(|e| Failure::Config(e.to_string()))?;
    let switches = switch_budget(&layout, &base.switch, &base.demux);
    let analog = analog_errors(&base.analog, &base.demux, p.t_r, p.t_2q);
    let overhead = shim_overhead(cfg.layers_per_reconfig, p.t_sc, p.t_r);
    let total_io = switches.dynamic_dacs + switches.shim_dacs + cfg.aux_lines;
    let sq = layer_duration(
        wisesim_core::gates::LayerKind::SqPhi { phi: 0.0 },
        &p,
        cfg.gate_mode,
    )
    .map_err(|e| Failure::Config(e.to_string()))?;
    let report = json!({
        "config_hash": cfg.hash(),
        "switches": switches,
        "analog": analog,
        "speed": { "max_layers_per_s": p.max_speed, "min_layers_per_s": p.min_speed },
        "single_qubit_layer_s": sq.seconds,
        "shim_overhead": overhead,
        "io": {
            "dynamic_dacs": switches.dynamic_dacs,
            "shim_dacs": switches.shim_dacs,
            "aux_lines": cfg.aux_lines,
            "total": total_io,
        },
    });
    let out = match format {
        Format::Json => json_bytes(&report),
        Format::Csv => {
            let mut s = csv_line(&["quantity", "value", "config_hash"].map(String::from));
            let h = cfg.hash();
            let rows: Vec<(&str, f64)> = vec![
                ("transmission_gates", switches.transmission_gates as f64),
                ("gate_area_mm2", switches.gate_area_mm2()),
                ("capacitor_area_mm2", switches.capacitor_area_mm2()),
                ("active_area_mm2", switches.active_area_mm2()),
                ("footprint_ok", f64::from(u8::from(switches.footprint_ok))),
                ("rf_pickup_v", analog.rf_pickup),
                ("charge_injection_v_per_m", analog.charge_injection),
                ("drift_reconfig_v_per_m", analog.drift_reconfig),
                ("drift_gate_v_per_m", analog.drift_gate),
                ("gate_error", analog.gate_error),
                ("max_speed", p.max_speed.unwrap_or(f64::INFINITY)),
                ("min_speed", p.min_speed.unwrap_or(f64::INFINITY)),
                ("shim_overhead", overhead),
                ("total_io", total_io as f64),
            ];
            for (k, v) in rows {
                s += &csv_line(&[k.to_string(), format!("{v}"), h.clone()]);
            }
            s.into_bytes()
        }
        Format::Pretty => {
            let mut s = format!("# config {}\n", cfg.hash());
            s += &format!("transmission gates       {}\n", switches.transmission_gates);
            s += &format!(
                "gate area                {:.1} mm2\n",
                switches.gate_area_mm2()
            );
            s += &format!(
                "capacitor area           {:.1} mm2\n",
                switches.capacitor_area_mm2()
            );
            s += &format!(
                "active area              {:.1} mm2\n",
                switches.active_area_mm2()
            );
            s += &format!("capacitors fit per zone  {}\n", switches.footprint_ok);
            s += &format!(
                "RF pickup                {:.2} mV\n",
                analog.rf_pickup * 1e3
            );
            s += &format!(
                "charge injection         {:.3} V/m\n",
                analog.charge_injection
            );
            s += &format!(
                "drift (reconfiguration)  {:.2} mV/m\n",
                analog.drift_reconfig * 1e3
            );
            s += &format!(
                "drift (two-qubit gate)   {:.3} mV/m\n",
                analog.drift_gate * 1e3
            );
            s += &format!("two-qubit gate error     {:.2e}\n", analog.gate_error);
            s += &format!(
                "max speed                {:.1} layers/s\n",
                p.max_speed.unwrap_or(f64::INFINITY)
            );
            s += &format!(
                "min speed                {:.1} layers/s\n",
                p.min_speed.unwrap_or(f64::INFINITY)
            );
            s += &format!("shim overhead            {overhead:.4}\n");
            s += &format!(
                "I/O lines                {} ({} dynamic DACs + {} shim DACs + {} aux)\n",
                total_io, switches.dynamic_dacs, switches.shim_dacs, cfg.aux_lines
            );
            s.into_bytes()
        }
    };
    emit(None, &out)
}

fn cmd_shim_schedule(
    cfg: &RunConfig,
    shims: Option<u64>,
    format: Format,
    output: Option<&Path>,
) -> Result<()> {
    let base = cfg.base_inputs();
    let shims = match shims {
        Some(s) => s,
        None => base
            .layout()
            .map_err(|e| Failure::Config(e.to_string()))?
            .shim_electrode_count(),
    };
    let sched = demux_schedule(&base.demux, shims).map_err(|e| Failure::Config(e.to_string()))?;
    let out = match format {
        Format::Json => json_bytes(&json!({ "config_hash": cfg.hash(), "schedule": sched })),
        _ => {
            let h = cfg.hash();
            let mut s =
                csv_line(&["dac", "slot", "shim", "start_s", "config_hash"].map(String::from));
            for (d, slots) in sched.dacs.iter().enumerate() {
                for c in slots {
                    s += &csv_line(&[
                        d.to_string(),
                        c.slot.to_string(),
                        c.shim.to_string(),
                        format!("{:e}", sched.slot_start(c.slot)),
                        h.clone(),
                    ]);
                }
            }
            s.into_bytes()
        }
    };
    emit(output, &out)
}

fn cmd_pulse(
    cfg: &RunConfig,
    theta: f64,
    phi: f64,
    grid: Vec<f64>,
    addressed: bool,
    output: Option<&Path>,
) -> Result<()> {
    let grid = if grid.is_empty() {
        log_grid(1e-3, 1e-1, 9)
    } else {
        grid
    };
    if grid.iter().any(|&e| !(e > 0.0 && e <= 0.5)) {
        return Err(Failure::Config(
            "--eps-grid values must lie in (0, 0.5]".into(),
        ));
    }
    let report = if addressed {
        amplitude_report(theta, phi, &grid)
    } else {
        crosstalk_report(theta, phi, &grid)
    }
    .map_err(|e| Failure::Config(e.to_string()))?;
    let h = cfg.hash();
    let mut s = csv_line(&["eps", "plain_infid", "sk1_infid", "config_hash"].map(String::from));
    for r in &report.rows {
        s += &csv_line(&[
            format!("{:e}", r.error),
            format!("{:e}", r.plain),
            format!("{:e}", r.sk1),
            h.clone(),
        ]);
    }
    eprintln!(
        "log-log slope: plain {:.3}, sk1 {:.3}",
        report.plain_slope, report.sk1_slope
    );
    emit(output, s.as_bytes())
}

fn cmd_compile(cfg: &RunConfig, circuit: &Path, output: Option<&Path>) -> Result<()> {
    let text =
        fs::read_to_string(circuit).with_context(|| format!("reading {}", circuit.display()))?;
    let layers = parse_circuit(&text).map_err(|e| Failure::Config(e.to_string()))?;
    let p = params_of(cfg)?;
    let layout = TrapLayout::linear(cfg.n_qubits).map_err(|e| Failure::Config(e.to_string()))?;
    let ids: Vec<u32> = (0..cfg.n_qubits as u32).collect();
    let config = QubitConfig::from_order(&ids);
    let mut compiled = Vec::new();
    let mut total = 0.0;
    for (i, gates) in layers.iter().enumerate() {
        let layer = compile_layer(gates, &config, &layout)
            .map_err(|e| Failure::Config(format!("layer {}: {e}", i + 1)))?;
        let timing = layer_duration(layer.kind, &p, cfg.gate_mode)
            .map_err(|e| Failure::Config(e.to_string()))?;
        total += timing.seconds;
        let mut v = layer.to_json();
        v["duration_s"] = json!(timing.seconds);
        v["recharge"] = json!(timing.recharge);
        compiled.push(v);
    }
    let doc = json!({ "config_hash": cfg.hash(), "layers": compiled, "total_s": total });
    emit(output, &json_bytes(&doc))
}
