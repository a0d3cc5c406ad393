//! Mutual-suspicion crash detection and coordinator failover for a small
//! fixed set of nodes.
//!
//! - [`config`]: timeouts and their consistency checks.
//! - [`alarm`]: the per-node alarm manager driving every timeout.
//! - [`agent`]: pure state machines for the protocol task (D) and the
//!   watchdog task (I).
//! - [`faultrc`]: the fault-injection script format.
//! - [`sim`]: a deterministic discrete-event simulator that runs one agent
//!   per node and records a [`Trace`].

pub mod agent;
pub mod alarm;
pub mod config;
pub mod faultrc;
pub mod sim;
pub mod types;

pub use agent::{init_agent, Action, AgentError, AgentEvent, AgentState, Clause, ClauseKind};
pub use alarm::{AlarmError, AlarmManager, AlarmSpec, FiredAlarm};
pub use config::{
    format_secs, parse_config, render_config, validate_config, Config, ConfigError, ElectionPolicy, Inequality,
    ValidatedConfig,
};
pub use faultrc::{parse_faultrc, render_faultrc, FaultKind, FaultSpec, FaultrcError};
pub use sim::{run, PredicateReport, SimError, Simulation, TaskLabel, Trace, TraceEvent};
pub use types::{Deduction, Message, MessageKind, NodeId, NodeSet, Role, TaskKind, Tick};
