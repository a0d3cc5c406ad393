//! Scenario runner: config file + `.faultrc` in, event log out.
//!
//! Exit codes: 0 when the global predicate holds at the horizon, 1 when it
//! does not, 2 on unreadable or invalid input.

use std::io::Write;
use std::path::PathBuf;

use ams_core::{parse_config, parse_faultrc, Config, FaultSpec, PredicateReport, Simulation, Tick, TraceEvent};
use clap::{Args, ValueEnum};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PREDICATE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Configuration file (`KEY value` lines); defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fault-injection script; no faults when omitted.
    #[arg(long)]
    pub faultrc: Option<PathBuf>,
    /// Simulated run length in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub horizon_s: f64,
    /// Latency seed; overrides SEED from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also log heartbeats and every message send/receive.
    #[arg(long)]
    pub verbose: bool,
    /// Extra instants (seconds) at which to report the global predicate.
    #[arg(long, value_delimiter = ',')]
    pub predicate_at: Vec<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            config: None,
            faultrc: None,
            horizon_s: 60.0,
            seed: None,
            format: Format::Text,
            verbose: false,
            predicate_at: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct JsonEvent<'a> {
    event_id: u64,
    time_s: f64,
    node: u32,
    task: String,
    text: &'a str,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    verbose: bool,
}

impl<'a> JsonEvent<'a> {
    fn new(ev: &'a TraceEvent, tick_ns: u64) -> Self {
        JsonEvent {
            event_id: ev.event_id,
            time_s: (u128::from(ev.at) * u128::from(tick_ns)) as f64 / 1e9,
            node: ev.node.0,
            task: ev.task.to_string(),
            text: &ev.text,
            verbose: ev.verbose,
        }
    }
}

fn read(path: &Option<PathBuf>, what: &str) -> Result<String, String> {
    match path {
        None => Ok(String::new()),
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("cannot read {what} {}: {e}", p.display())),
    }
}

/// Parsed inputs of one run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: Config,
    pub faults: Vec<FaultSpec>,
    pub horizon: Tick,
    pub seed: u64,
}

pub fn load_scenario(opts: &Options) -> Result<Scenario, String> {
    let config_text = read(&opts.config, "config")?;
    let config = parse_config(&config_text).map_err(|e| format!("config: {e}"))?;
    let faults = parse_faultrc(&read(&opts.faultrc, "faultrc")?).map_err(|e| format!("faultrc: {e}"))?;
    if !(opts.horizon_s.is_finite() && opts.horizon_s > 0.0) {
        return Err(format!("horizon must be a positive number of seconds, got {}", opts.horizon_s));
    }
    let horizon = config.ticks_from_secs(opts.horizon_s);
    if horizon == 0 {
        return Err("horizon is shorter than one tick".to_string());
    }
    Ok(Scenario { config, faults, horizon, seed: opts.seed.unwrap_or(config.seed) })
}

/// Runs a scenario, writing the trace to `out` and predicate reports and
/// errors to `err`. Returns the process exit code.
pub fn run_scenario(opts: &Options, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run_inner(opts, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn run_inner(opts: &Options, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let scenario = load_scenario(opts)?;
    let cfg = scenario.config.validate().map_err(|e| format!("config: {e}"))?;
    let mut sim = Simulation::new(cfg, &scenario.faults, scenario.seed).map_err(|e| e.to_string())?;
    sim.set_verbose(opts.verbose);

    let mut checkpoints: Vec<Tick> = opts
        .predicate_at
        .iter()
        .filter(|s| s.is_finite() && **s >= 0.0)
        .map(|s| cfg.ticks_from_secs(*s))
        .filter(|t| *t < scenario.horizon)
        .collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    for at in checkpoints {
        sim.run_until(at);
        report(err, &sim.predicate())?;
    }
    sim.run_until(scenario.horizon);
    let verdict = sim.predicate();

    let trace = sim.trace();
    let io = |e: std::io::Error| format!("write failed: {e}");
    for ev in trace.events() {
        match opts.format {
            Format::Text => writeln!(out, "{}", ev.line(trace.tick_ns())).map_err(io)?,
            Format::Json => {
                let line = serde_json::to_string(&JsonEvent::new(ev, trace.tick_ns())).map_err(|e| e.to_string())?;
                writeln!(out, "{line}").map_err(io)?;
            }
        }
    }
    report(err, &verdict)?;
    Ok(if verdict.holds() { EXIT_OK } else { EXIT_PREDICATE })
}

fn report(err: &mut dyn Write, report: &PredicateReport) -> Result<(), String> {
    writeln!(err, "predicate {report}").map_err(|e| format!("write failed: {e}"))
}
