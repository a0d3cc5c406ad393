use std::fmt;

use crate::config::format_secs;
use crate::types::{NodeId, TaskKind, Tick};

/// Which part of a node produced a trace event. `A` is the node's
/// infrastructure (alarms, fault injection, reboots), `Net` the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskLabel {
    D,
    I,
    A,
    Net,
}

impl From<TaskKind> for TaskLabel {
    fn from(task: TaskKind) -> Self {
        match task {
            TaskKind::D => TaskLabel::D,
            TaskKind::I => TaskLabel::I,
        }
    }
}

impl fmt::Display for TaskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskLabel::D => "D",
            TaskLabel::I => "I",
            TaskLabel::A => "A",
            TaskLabel::Net => "NET",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceEvent {
    /// Consecutive per node, from 0. Verbose events count separately.
    pub event_id: u64,
    pub verbose: bool,
    pub at: Tick,
    pub node: NodeId,
    pub task: TaskLabel,
    pub text: String,
}

impl TraceEvent {
    /// The id column: verbose ids carry a `v` prefix.
    pub fn id_label(&self) -> String {
        if self.verbose {
            format!("v{}", self.event_id)
        } else {
            self.event_id.to_string()
        }
    }

    /// `<id>\t<seconds>\t<node>\t<task>\t<text>`
    pub fn line(&self, tick_ns: u64) -> String {
        format!("{}\t{}\t{}\t{}\t{}", self.id_label(), format_secs(self.at, tick_ns), self.node, self.task, self.text)
    }
}

/// Time-ordered event log of one run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    tick_ns: u64,
    events: Vec<TraceEvent>,
    next_ids: Vec<(u64, u64)>,
}

impl Trace {
    pub fn new(nodes: usize, tick_ns: u64) -> Self {
        Trace { tick_ns, events: Vec::new(), next_ids: vec![(0, 0); nodes] }
    }

    pub fn push(&mut self, at: Tick, node: NodeId, task: TaskLabel, verbose: bool, text: String) {
        let ids = &mut self.next_ids[node.index()];
        let counter = if verbose { &mut ids.1 } else { &mut ids.0 };
        let event_id = *counter;
        *counter += 1;
        self.events.push(TraceEvent { event_id, verbose, at, node, task, text });
    }

    pub fn tick_ns(&self) -> u64 {
        self.tick_ns
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn on_node(&self, node: NodeId) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.node == node)
    }

    /// First event on `node` whose text starts with `prefix`.
    pub fn find(&self, node: NodeId, prefix: &str) -> Option<&TraceEvent> {
        self.on_node(node).find(|e| e.text.starts_with(prefix))
    }

    /// Number of events (on any node) whose text starts with `prefix`.
    pub fn count(&self, prefix: &str) -> usize {
        self.events.iter().filter(|e| e.text.starts_with(prefix)).count()
    }

    pub fn lines(&self) -> impl Iterator<Item = String> + '_ {
        self.events.iter().map(|e| e.line(self.tick_ns))
    }

    /// The whole log, one line per event.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in self.lines() {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}
