use std::fmt;

use crate::config::format_secs;
use crate::types::{NodeId, NodeSet, Tick};

/// Global health check over every live agent (node up, task D running).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateReport {
    pub at: Tick,
    pub tick_ns: u64,
    pub live: NodeSet,
    /// Live agents that believe they are the coordinator.
    pub coordinators: NodeSet,
    /// The coordinator every live agent names, if they all name the same.
    pub agreed: Option<NodeId>,
    /// Membership view of the coordinator, when there is exactly one.
    pub coordinator_view: Option<NodeSet>,
    /// `(observer, suspect, since)` for suspicions open longer than the
    /// TEIF deadline plus the latency bound.
    pub stuck: Vec<(NodeId, NodeId, Tick)>,
}

impl PredicateReport {
    /// One coordinator, named by every live agent, whose view is exactly the
    /// live set, and no stuck suspicion.
    pub fn holds(&self) -> bool {
        self.problems().is_empty()
    }

    pub fn no_operational_agents(&self) -> bool {
        self.live.is_empty()
    }

    pub fn coordinator(&self) -> Option<NodeId> {
        (self.coordinators.len() == 1).then(|| self.coordinators.iter().next().unwrap())
    }

    pub fn problems(&self) -> Vec<String> {
        if self.live.is_empty() {
            return vec!["no operational agents".to_string()];
        }
        let mut out = Vec::new();
        if self.coordinators.len() != 1 {
            out.push(format!(
                "{} coordinators among operational agents {}",
                self.coordinators.len(),
                self.coordinators
            ));
        }
        match (self.agreed, self.coordinator()) {
            (Some(a), Some(c)) if a == c => {}
            (Some(a), _) => out.push(format!("operational agents follow {a}, which is not the coordinator")),
            (None, _) => out.push("operational agents disagree on the coordinator".to_string()),
        }
        if let Some(view) = self.coordinator_view {
            if view != self.live {
                out.push(format!("coordinator view {view} differs from operational agents {}", self.live));
            }
        }
        for (observer, suspect, since) in &self.stuck {
            out.push(format!("node {observer} has suspected {suspect} since {}", format_secs(*since, self.tick_ns)));
        }
        out
    }
}

impl fmt::Display for PredicateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}: ", format_secs(self.at, self.tick_ns))?;
        let problems = self.problems();
        if problems.is_empty() {
            write!(
                f,
                "ok: coordinator {} over operational agents {}",
                self.coordinator().expect("holds implies one coordinator"),
                self.live
            )
        } else {
            write!(f, "FAILED: {}", problems.join("; "))
        }
    }
}
