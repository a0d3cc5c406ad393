//! Backbone configuration: node count, initial coordinator, timeouts.
//!
//! The file format is one `KEY value` pair per line; `#` starts a comment.
//! Every key is optional and falls back to the defaults below.

use std::fmt;
use std::ops::Deref;

use thiserror::Error;

use crate::types::{NodeId, Tick, MAX_NODES};

/// How a surviving assistant picks the next coordinator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ElectionPolicy {
    /// First operational node after the failed one, modulo n.
    #[default]
    SkipScan,
    /// Always the node right after the failed one, modulo n, operational or not.
    Naive,
}

impl ElectionPolicy {
    fn keyword(self) -> &'static str {
        match self {
            ElectionPolicy::SkipScan => "SKIP",
            ElectionPolicy::Naive => "NAIVE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Config {
    pub nodes: u32,
    /// Node hosting the coordinator at start-up.
    pub coordinator: NodeId,
    /// Length of one clock tick in nanoseconds.
    pub tick_ns: u64,
    pub mia_send: Tick,
    pub mia_recv: Tick,
    pub taia_send: Tick,
    pub taia_recv: Tick,
    pub im_alive_set: Tick,
    pub im_alive_clear: Tick,
    /// Length of a suspicion period.
    pub teif_recv: Tick,
    /// Ticks task I needs to revive a crashed task D; 0 disables revival.
    pub revive_delay: Tick,
    /// Ticks before a crashed node reboots; 0 means it never does.
    pub node_reboot_delay: Tick,
    /// Upper bound of the simulated message delay.
    pub max_latency: Tick,
    pub seed: u64,
    pub election: ElectionPolicy,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            nodes: 4,
            coordinator: NodeId(0),
            tick_ns: 1_000,
            mia_send: 100_000,
            mia_recv: 300_000,
            taia_send: 100_000,
            taia_recv: 300_000,
            im_alive_set: 50_000,
            im_alive_clear: 150_000,
            teif_recv: 500_000,
            revive_delay: 200_000,
            node_reboot_delay: 0,
            max_latency: 10_000,
            seed: 0,
            election: ElectionPolicy::SkipScan,
        }
    }
}

/// The timing relations a configuration must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inequality {
    /// `MIA_SEND + MAX_LATENCY < MIA_RECV`
    MiaDeadline,
    /// `TAIA_SEND + MAX_LATENCY < TAIA_RECV`
    TaiaDeadline,
    /// `IM_ALIVE_SET < IM_ALIVE_CLEAR`
    ImAliveOrder,
    /// `TEIF_RECV > IM_ALIVE_CLEAR + MAX_LATENCY`
    TeifDeadline,
}

impl Inequality {
    pub const ALL: [Inequality; 4] =
        [Inequality::MiaDeadline, Inequality::TaiaDeadline, Inequality::ImAliveOrder, Inequality::TeifDeadline];

    pub fn holds(self, cfg: &Config) -> bool {
        match self {
            Inequality::MiaDeadline => cfg.mia_send.saturating_add(cfg.max_latency) < cfg.mia_recv,
            Inequality::TaiaDeadline => cfg.taia_send.saturating_add(cfg.max_latency) < cfg.taia_recv,
            Inequality::ImAliveOrder => cfg.im_alive_set < cfg.im_alive_clear,
            Inequality::TeifDeadline => cfg.teif_recv > cfg.im_alive_clear.saturating_add(cfg.max_latency),
        }
    }

    fn describe(self, cfg: &Config) -> String {
        match self {
            Inequality::MiaDeadline => {
                format!("{self} violated ({} + {} >= {})", cfg.mia_send, cfg.max_latency, cfg.mia_recv)
            }
            Inequality::TaiaDeadline => {
                format!("{self} violated ({} + {} >= {})", cfg.taia_send, cfg.max_latency, cfg.taia_recv)
            }
            Inequality::ImAliveOrder => format!("{self} violated ({} >= {})", cfg.im_alive_set, cfg.im_alive_clear),
            Inequality::TeifDeadline => {
                format!("{self} violated ({} <= {} + {})", cfg.teif_recv, cfg.im_alive_clear, cfg.max_latency)
            }
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::MiaDeadline => "MIA_SEND + MAX_LATENCY < MIA_RECV",
            Inequality::TaiaDeadline => "TAIA_SEND + MAX_LATENCY < TAIA_RECV",
            Inequality::ImAliveOrder => "IM_ALIVE_SET < IM_ALIVE_CLEAR",
            Inequality::TeifDeadline => "TEIF_RECV > IM_ALIVE_CLEAR + MAX_LATENCY",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` needs exactly one value")]
    MissingValue { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    InvalidValue { line: usize, key: String, value: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("NODES must be in 1..={MAX_NODES}, got {0}")]
    NodeCount(u32),
    #[error("COORDINATOR {coordinator} is not a node of a {nodes}-node system")]
    CoordinatorOutOfRange { coordinator: u32, nodes: u32 },
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{message}")]
    Violated { inequality: Inequality, message: String },
}

/// A configuration that passed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ValidatedConfig {
    config: Config,
    ams_enabled: bool,
}

impl ValidatedConfig {
    /// False for single-node systems: there is nobody to suspect.
    pub fn ams_enabled(&self) -> bool {
        self.ams_enabled
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.config.nodes).map(NodeId)
    }
}

impl Deref for ValidatedConfig {
    type Target = Config;

    fn deref(&self) -> &Config {
        &self.config
    }
}

impl Config {
    /// All inequalities this configuration breaks, in declaration order.
    pub fn violations(&self) -> Vec<Inequality> {
        Inequality::ALL.into_iter().filter(|i| !i.holds(self)).collect()
    }

    pub fn validate(self) -> Result<ValidatedConfig, ConfigError> {
        validate_config(self)
    }

    pub fn node_count(&self) -> usize {
        self.nodes as usize
    }

    /// Ticks in `secs` seconds, rounded to the nearest tick.
    pub fn ticks_from_secs(&self, secs: f64) -> Tick {
        (secs * 1e9 / self.tick_ns as f64).round() as Tick
    }

    /// `tick` rendered as seconds with six decimals, computed exactly.
    pub fn format_secs(&self, tick: Tick) -> String {
        format_secs(tick, self.tick_ns)
    }
}

pub fn format_secs(tick: Tick, tick_ns: u64) -> String {
    let ns = u128::from(tick) * u128::from(tick_ns);
    format!("{}.{:06}", ns / 1_000_000_000, (ns % 1_000_000_000) / 1_000)
}

pub fn validate_config(cfg: Config) -> Result<ValidatedConfig, ConfigError> {
    if cfg.nodes == 0 || cfg.nodes as usize > MAX_NODES {
        return Err(ConfigError::NodeCount(cfg.nodes));
    }
    if cfg.coordinator.0 >= cfg.nodes {
        return Err(ConfigError::CoordinatorOutOfRange { coordinator: cfg.coordinator.0, nodes: cfg.nodes });
    }
    let positive = [
        ("TICK_NS", cfg.tick_ns),
        ("MIA_SEND", cfg.mia_send),
        ("MIA_RECV", cfg.mia_recv),
        ("TAIA_SEND", cfg.taia_send),
        ("TAIA_RECV", cfg.taia_recv),
        ("IM_ALIVE_SET", cfg.im_alive_set),
        ("IM_ALIVE_CLEAR", cfg.im_alive_clear),
        ("TEIF_RECV", cfg.teif_recv),
        ("MAX_LATENCY", cfg.max_latency),
    ];
    if let Some((key, _)) = positive.iter().find(|(_, v)| *v == 0) {
        return Err(ConfigError::NotPositive(key));
    }
    if let Some(&inequality) = cfg.violations().first() {
        return Err(ConfigError::Violated { inequality, message: inequality.describe(&cfg) });
    }
    Ok(ValidatedConfig { config: cfg, ams_enabled: cfg.nodes > 1 })
}

const KEYS: [&str; 15] = [
    "NODES",
    "COORDINATOR",
    "TICK_NS",
    "MIA_SEND",
    "MIA_RECV",
    "TAIA_SEND",
    "TAIA_RECV",
    "IM_ALIVE_SET",
    "IM_ALIVE_CLEAR",
    "TEIF_RECV",
    "REVIVE_DELAY",
    "NODE_REBOOT_DELAY",
    "MAX_LATENCY",
    "SEED",
    "ELECTION",
];

/// Parses and validates a configuration script.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    let mut seen = [false; KEYS.len()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut words = content.split_whitespace();
        let Some(key) = words.next() else { continue };
        let key = key.to_ascii_uppercase();
        let Some(slot) = KEYS.iter().position(|k| *k == key) else {
            return Err(ConfigError::UnknownKey { line, key });
        };
        let value = match (words.next(), words.next()) {
            (Some(v), None) => v,
            _ => return Err(ConfigError::MissingValue { line, key }),
        };
        if std::mem::replace(&mut seen[slot], true) {
            return Err(ConfigError::DuplicateKey { line, key });
        }
        let invalid = || ConfigError::InvalidValue { line, key: key.clone(), value: value.to_string() };
        if key == "ELECTION" {
            cfg.election = match value.to_ascii_uppercase().as_str() {
                "SKIP" => ElectionPolicy::SkipScan,
                "NAIVE" => ElectionPolicy::Naive,
                _ => return Err(invalid()),
            };
            continue;
        }
        let number: u64 = value.parse().map_err(|_| invalid())?;
        let small = || u32::try_from(number).map_err(|_| invalid());
        match key.as_str() {
            "NODES" => cfg.nodes = small()?,
            "COORDINATOR" => cfg.coordinator = NodeId(small()?),
            "TICK_NS" => cfg.tick_ns = number,
            "MIA_SEND" => cfg.mia_send = number,
            "MIA_RECV" => cfg.mia_recv = number,
            "TAIA_SEND" => cfg.taia_send = number,
            "TAIA_RECV" => cfg.taia_recv = number,
            "IM_ALIVE_SET" => cfg.im_alive_set = number,
            "IM_ALIVE_CLEAR" => cfg.im_alive_clear = number,
            "TEIF_RECV" => cfg.teif_recv = number,
            "REVIVE_DELAY" => cfg.revive_delay = number,
            "NODE_REBOOT_DELAY" => cfg.node_reboot_delay = number,
            "MAX_LATENCY" => cfg.max_latency = number,
            "SEED" => cfg.seed = number,
            _ => unreachable!("key table and match arms out of sync"),
        }
    }
    validate_config(cfg)?;
    Ok(cfg)
}

/// Writes every key, one per line, in the canonical order.
pub fn render_config(cfg: &Config) -> String {
    let values: [String; 15] = [
        cfg.nodes.to_string(),
        cfg.coordinator.to_string(),
        cfg.tick_ns.to_string(),
        cfg.mia_send.to_string(),
        cfg.mia_recv.to_string(),
        cfg.taia_send.to_string(),
        cfg.taia_recv.to_string(),
        cfg.im_alive_set.to_string(),
        cfg.im_alive_clear.to_string(),
        cfg.teif_recv.to_string(),
        cfg.revive_delay.to_string(),
        cfg.node_reboot_delay.to_string(),
        cfg.max_latency.to_string(),
        cfg.seed.to_string(),
        cfg.election.keyword().to_string(),
    ];
    KEYS.iter().zip(values).map(|(k, v)| format!("{k} {v}\n")).collect()
}
