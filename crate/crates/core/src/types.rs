//! Domain types shared by every module: node labels, roles, protocol
//! messages and deductions.

use std::fmt;

/// Simulated clock tick. One tick is `Config::tick_ns` nanoseconds.
pub type Tick = u64;

/// Largest supported node count (node sets are 64-bit masks).
pub const MAX_NODES: usize = 64;

/// Label of a processing node, in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// A set of nodes, stored as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const fn empty() -> Self {
        NodeSet(0)
    }

    /// Every node in `0..n`.
    pub fn all(n: usize) -> Self {
        assert!(n <= MAX_NODES, "node count {n} exceeds {MAX_NODES}");
        if n == MAX_NODES {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, node: NodeId) -> bool {
        node.index() < MAX_NODES && self.0 & (1 << node.0) != 0
    }

    pub fn insert(&mut self, node: NodeId) -> bool {
        let had = self.contains(node);
        self.0 |= 1 << node.0;
        !had
    }

    pub fn remove(&mut self, node: NodeId) -> bool {
        let had = self.contains(node);
        self.0 &= !(1 << node.0);
        had
    }

    pub fn with(mut self, node: NodeId) -> Self {
        self.insert(node);
        self
    }

    pub fn without(mut self, node: NodeId) -> Self {
        self.remove(node);
        self
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = NodeId> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let low = rest.trailing_zeros();
            rest &= rest - 1;
            Some(NodeId(low))
        })
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut set = NodeSet::empty();
        for node in iter {
            set.insert(node);
        }
        set
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, node) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{node}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Coordinator,
    Assistant,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Coordinator => "COORDINATOR",
            Role::Assistant => "ASSISTANT",
        })
    }
}

/// The two agent tasks that exchange protocol messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskKind {
    /// Database/protocol task: heartbeats, suspicion, election.
    D,
    /// Watchdog task: clears the I'm-alive flag and reports a silent task D.
    I,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::D => "D",
            TaskKind::I => "I",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    /// Manager is alive.
    Mia,
    /// This assistant is alive.
    Taia,
    /// This entity is faulty: task I reporting that its task D went silent.
    Teif,
    /// Application event forwarded to the coordinator; doubles as a TAIA.
    EventNotify,
    /// Reply to a returning or misdirected agent, naming the current
    /// coordinator and epoch.
    HelloBack,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageKind::Mia => "MIA",
            MessageKind::Taia => "TAIA",
            MessageKind::Teif => "TEIF",
            MessageKind::EventNotify => "EVENT_NOTIFY",
            MessageKind::HelloBack => "HELLO_BACK",
        })
    }
}

/// A protocol message. `coordinator` and `view` are the sender's beliefs:
/// MIA carries the coordinator's membership view so assistants track it,
/// HELLO_BACK names the coordinator the recipient should follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Message {
    pub kind: MessageKind,
    pub from: NodeId,
    pub from_task: TaskKind,
    pub epoch: u64,
    pub sent_at: Tick,
    pub coordinator: NodeId,
    pub view: NodeSet,
}

/// Outcome of one suspicion period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deduction {
    /// Task I of the node reported its task D silent: the agent crashed,
    /// the node is still up.
    AgentCrashedNodeAlive(NodeId),
    /// A late sign of life arrived: the agent or its links are slow.
    AgentSlowedDown(NodeId),
    /// Nothing arrived before the TEIF deadline: the whole node is gone.
    NodeCrashed(NodeId),
}

impl Deduction {
    pub fn subject(self) -> NodeId {
        match self {
            Deduction::AgentCrashedNodeAlive(k) | Deduction::AgentSlowedDown(k) | Deduction::NodeCrashed(k) => k,
        }
    }
}

impl fmt::Display for Deduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deduction::AgentCrashedNodeAlive(k) => write!(f, "AgentCrashedNodeAlive({k})"),
            Deduction::AgentSlowedDown(k) => write!(f, "AgentSlowedDown({k})"),
            Deduction::NodeCrashed(k) => write!(f, "NodeCrashed({k})"),
        }
    }
}
