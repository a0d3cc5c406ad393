//! Per-node state machines of the mutual-suspicion protocol.
//!
//! An agent is the pair (task D, task I) running on one node. Task D
//! exchanges heartbeats with the coordinator (or, on the coordinator, with
//! every assistant), suspects silent peers, turns each suspicion into a
//! [`Deduction`] and elects a successor when the coordinator is lost.
//! Task I watches the I'm-alive flag that task D keeps setting and reports
//! a silent task D with a TEIF broadcast.
//!
//! Transitions are pure: they mutate the [`AgentState`] and return the
//! [`Action`]s the hosting runtime has to carry out (sending, alarm
//! bookkeeping, logging). Nothing else leaves an agent.

mod election;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use election::{claim_dominates, elect_naive, elect_successor};

use crate::alarm::{AlarmSpec, FiredAlarm};
use crate::config::{ElectionPolicy, ValidatedConfig};
use crate::types::{Deduction, Message, MessageKind, NodeId, NodeSet, Role, TaskKind, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClauseKind {
    MiaSend,
    MiaRecv,
    TaiaSend,
    TaiaRecv,
    ImAliveSet,
    ImAliveClear,
    TeifRecv,
}

impl ClauseKind {
    fn is_protocol(self) -> bool {
        !matches!(self, ClauseKind::ImAliveSet | ClauseKind::ImAliveClear)
    }
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClauseKind::MiaSend => "MIA_SEND",
            ClauseKind::MiaRecv => "MIA_RECV",
            ClauseKind::TaiaSend => "TAIA_SEND",
            ClauseKind::TaiaRecv => "TAIA_RECV",
            ClauseKind::ImAliveSet => "IM_ALIVE_SET",
            ClauseKind::ImAliveClear => "IM_ALIVE_CLEAR",
            ClauseKind::TeifRecv => "TEIF_RECV",
        })
    }
}

/// A time clause managed by the node's alarm manager. A node holds at most
/// one alarm per clause, so the clause doubles as the alarm id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub kind: ClauseKind,
    pub subject: NodeId,
}

impl Clause {
    pub fn new(kind: ClauseKind, subject: NodeId) -> Self {
        Clause { kind, subject }
    }

    /// The task whose mailbox receives the expiry.
    pub fn task(self) -> TaskKind {
        match self.kind {
            ClauseKind::ImAliveClear => TaskKind::I,
            _ => TaskKind::D,
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.kind, self.subject)
    }
}

/// Protocol milestones worth a line in the event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentEvent {
    Started { role: Role, coordinator: NodeId, epoch: u64 },
    Suspect(NodeId),
    TeifReceived(NodeId),
    Readmitted(NodeId),
    Reintegrated(NodeId),
    Elected { epoch: u64 },
    Follow { coordinator: NodeId, epoch: u64 },
    Demoted { coordinator: NodeId, epoch: u64 },
    TeifBroadcast,
}

impl fmt::Display for AgentEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentEvent::Started { role: Role::Coordinator, epoch, .. } => {
                write!(f, "START COORDINATOR epoch={epoch}")
            }
            AgentEvent::Started { role: Role::Assistant, coordinator, epoch } => {
                write!(f, "START ASSISTANT coordinator={coordinator} epoch={epoch}")
            }
            AgentEvent::Suspect(k) => write!(f, "SUSPECT {k}"),
            AgentEvent::TeifReceived(k) => write!(f, "TEIF-RECV from {k}"),
            AgentEvent::Readmitted(k) => write!(f, "READMIT {k}"),
            AgentEvent::Reintegrated(k) => write!(f, "REINTEGRATE {k}"),
            AgentEvent::Elected { epoch } => write!(f, "ELECTED epoch={epoch}"),
            AgentEvent::Follow { coordinator, epoch } => {
                write!(f, "FOLLOW {coordinator} epoch={epoch}")
            }
            AgentEvent::Demoted { coordinator, epoch } => {
                write!(f, "DEMOTE to {coordinator} epoch={epoch}")
            }
            AgentEvent::TeifBroadcast => f.write_str("TEIF-BROADCAST"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Send {
        to: NodeId,
        msg: Message,
    },
    /// Deliver to every other node.
    Broadcast(Message),
    RegisterAlarm(AlarmSpec<Clause>),
    CancelAlarm(Clause),
    RestartAlarm(Clause),
    Deduce(Deduction),
    /// Task I asks for its task D to be restarted.
    ReviveLocalD,
    /// Node recovery should start for the given node (task R's job).
    RecoveryHook(NodeId),
    Log(AgentEvent),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("task D of node {0} has crashed")]
    Crashed(NodeId),
    #[error("alarm {0} is not armed by this agent")]
    UnknownAlarm(Clause),
    #[error("alarm {0} belongs to the other task")]
    WrongTask(Clause),
    #[error("no operational node left to succeed {0}")]
    NoSurvivor(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    me: NodeId,
    cfg: ValidatedConfig,
    role: Role,
    epoch: u64,
    coordinator: NodeId,
    operational: NodeSet,
    /// Open suspicions and the tick each one started.
    sus: BTreeMap<NodeId, Tick>,
    /// Set by task D, cleared by task I.
    im_alive_flag: bool,
    /// What task I found at its last clear.
    im_alive_seen_set: bool,
    armed: BTreeSet<Clause>,
    crashed: bool,
}

/// Fresh agent for node `me` as configured at start-up.
pub fn init_agent(me: NodeId, cfg: &ValidatedConfig) -> (AgentState, Vec<Action>) {
    AgentState::init(me, cfg)
}

impl AgentState {
    pub fn init(me: NodeId, cfg: &ValidatedConfig) -> (Self, Vec<Action>) {
        let role = if me == cfg.coordinator { Role::Coordinator } else { Role::Assistant };
        Self::start(me, cfg, role, cfg.coordinator)
    }

    /// State of a task D restarted by task I: always an assistant, with no
    /// memory of the previous incarnation. It first reports to the
    /// configured coordinator, or to that node's successor if it was the
    /// configured coordinator itself.
    pub fn revive(me: NodeId, cfg: &ValidatedConfig) -> (Self, Vec<Action>) {
        let all = NodeSet::all(cfg.node_count());
        let guess = if me == cfg.coordinator {
            elect_successor(all, me, cfg.node_count()).unwrap_or(me)
        } else {
            cfg.coordinator
        };
        if guess == me {
            return Self::start(me, cfg, Role::Coordinator, me);
        }
        Self::start(me, cfg, Role::Assistant, guess)
    }

    fn start(me: NodeId, cfg: &ValidatedConfig, role: Role, coordinator: NodeId) -> (Self, Vec<Action>) {
        let mut state = AgentState {
            me,
            cfg: *cfg,
            role,
            epoch: 0,
            coordinator,
            operational: NodeSet::all(cfg.node_count()),
            sus: BTreeMap::new(),
            im_alive_flag: true,
            im_alive_seen_set: true,
            armed: BTreeSet::new(),
            crashed: false,
        };
        let mut out = vec![Action::Log(AgentEvent::Started { role, coordinator, epoch: 0 })];
        if cfg.ams_enabled() {
            match role {
                Role::Coordinator => state.arm_coordinator_clauses(&mut out),
                Role::Assistant => state.arm_assistant_clauses(coordinator, &mut out),
            }
            state.arm(AlarmSpec::cyclic(state.clause(ClauseKind::ImAliveSet, me), cfg.im_alive_set), &mut out);
            state.arm(AlarmSpec::cyclic(state.clause(ClauseKind::ImAliveClear, me), cfg.im_alive_clear), &mut out);
        }
        (state, out)
    }

    pub fn me(&self) -> NodeId {
        self.me
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn coordinator(&self) -> NodeId {
        self.coordinator
    }

    pub fn operational(&self) -> NodeSet {
        self.operational
    }

    pub fn is_suspected(&self, node: NodeId) -> bool {
        self.sus.contains_key(&node)
    }

    /// Open suspicions with their start ticks.
    pub fn suspicions(&self) -> impl Iterator<Item = (NodeId, Tick)> + '_ {
        self.sus.iter().map(|(k, t)| (*k, *t))
    }

    pub fn im_alive_flag(&self) -> bool {
        self.im_alive_flag
    }

    pub fn im_alive_seen_set(&self) -> bool {
        self.im_alive_seen_set
    }

    /// Clauses this agent believes are live in its alarm manager.
    pub fn armed(&self) -> &BTreeSet<Clause> {
        &self.armed
    }

    pub fn is_crashed(&self) -> bool {
        self.crashed
    }

    /// Task D stops; task I keeps working on the shared flag.
    pub fn mark_crashed(&mut self) {
        self.crashed = true;
    }

    /// Checks the structural invariants; returns the first one broken.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.role == Role::Coordinator && self.coordinator != self.me {
            return Err(format!("node {} is coordinator but follows {}", self.me, self.coordinator));
        }
        for k in self.sus.keys() {
            if !self.armed.contains(&self.clause(ClauseKind::TeifRecv, *k)) {
                return Err(format!("node {} suspects {k} without a TEIF_RECV alarm", self.me));
            }
        }
        if !self.crashed && !self.operational.contains(self.me) {
            return Err(format!("node {} is missing from its own view", self.me));
        }
        Ok(())
    }

    fn clause(&self, kind: ClauseKind, subject: NodeId) -> Clause {
        Clause::new(kind, subject)
    }

    fn message(&self, kind: MessageKind, now: Tick) -> Message {
        Message {
            kind,
            from: self.me,
            from_task: TaskKind::D,
            epoch: self.epoch,
            sent_at: now,
            coordinator: self.coordinator,
            view: self.operational,
        }
    }

    fn arm(&mut self, spec: AlarmSpec<Clause>, out: &mut Vec<Action>) {
        if self.armed.insert(spec.id) {
            out.push(Action::RegisterAlarm(spec));
        }
    }

    fn disarm(&mut self, clause: Clause, out: &mut Vec<Action>) {
        if self.armed.remove(&clause) {
            out.push(Action::CancelAlarm(clause));
        }
    }

    fn renew(&self, clause: Clause, out: &mut Vec<Action>) {
        if self.armed.contains(&clause) {
            out.push(Action::RestartAlarm(clause));
        }
    }

    fn arm_coordinator_clauses(&mut self, out: &mut Vec<Action>) {
        let others: Vec<NodeId> = self.operational.without(self.me).iter().collect();
        for &j in &others {
            self.arm(AlarmSpec::cyclic(self.clause(ClauseKind::MiaSend, j), self.cfg.mia_send), out);
        }
        for &j in &others {
            self.arm(AlarmSpec::cyclic(self.clause(ClauseKind::TaiaRecv, j), self.cfg.taia_recv), out);
        }
    }

    fn arm_assistant_clauses(&mut self, coordinator: NodeId, out: &mut Vec<Action>) {
        self.arm(AlarmSpec::cyclic(self.clause(ClauseKind::TaiaSend, coordinator), self.cfg.taia_send), out);
        self.arm(AlarmSpec::cyclic(self.clause(ClauseKind::MiaRecv, coordinator), self.cfg.mia_recv), out);
    }

    /// Task D's reaction to one of its alarms.
    pub fn on_alarm(&mut self, fired: &FiredAlarm<Clause>) -> Result<Vec<Action>, AgentError> {
        let clause = fired.id;
        if self.crashed {
            return Err(AgentError::Crashed(self.me));
        }
        if clause.task() != TaskKind::D {
            return Err(AgentError::WrongTask(clause));
        }
        if !self.armed.contains(&clause) {
            return Err(AgentError::UnknownAlarm(clause));
        }
        let now = fired.fired_at;
        let subject = clause.subject;
        let mut out = Vec::new();
        match clause.kind {
            ClauseKind::MiaSend => out.push(Action::Send { to: subject, msg: self.message(MessageKind::Mia, now) }),
            ClauseKind::TaiaSend => out.push(Action::Send { to: subject, msg: self.message(MessageKind::Taia, now) }),
            ClauseKind::ImAliveSet => self.im_alive_flag = true,
            ClauseKind::TaiaRecv | ClauseKind::MiaRecv => {
                if !self.sus.contains_key(&subject) {
                    self.suspect(subject, now, &mut out);
                }
            }
            ClauseKind::TeifRecv => {
                self.armed.remove(&clause);
                if self.sus.remove(&subject).is_some() {
                    self.conclude_node_crashed(subject, now, &mut out);
                }
            }
            ClauseKind::ImAliveClear => unreachable!("task I clause routed to task D"),
        }
        Ok(out)
    }

    /// Task I's reaction to its clear alarm: report a task D that never set
    /// the flag during the period just elapsed, otherwise clear it.
    pub fn task_i_step(&mut self, fired: &FiredAlarm<Clause>) -> Result<Vec<Action>, AgentError> {
        if fired.id.kind != ClauseKind::ImAliveClear {
            return Err(AgentError::WrongTask(fired.id));
        }
        let mut out = Vec::new();
        self.im_alive_seen_set = self.im_alive_flag;
        if self.im_alive_flag {
            self.im_alive_flag = false;
        } else {
            let teif = Message { from_task: TaskKind::I, ..self.message(MessageKind::Teif, fired.fired_at) };
            out.push(Action::Log(AgentEvent::TeifBroadcast));
            out.push(Action::Broadcast(teif));
            out.push(Action::ReviveLocalD);
        }
        Ok(out)
    }

    /// Task D's reaction to a message in its mailbox.
    pub fn on_message(&mut self, msg: &Message, now: Tick) -> Vec<Action> {
        let mut out = Vec::new();
        if self.crashed || msg.from == self.me || !self.cfg.ams_enabled() {
            return out;
        }
        let from = msg.from;
        if msg.kind == MessageKind::Teif {
            if msg.from_task != TaskKind::I {
                return out;
            }
            let monitored = match self.role {
                Role::Coordinator => self.operational.contains(from),
                Role::Assistant => from == self.coordinator || self.sus.contains_key(&from),
            };
            if monitored {
                self.conclude_agent_crashed(from, now, &mut out);
            } else if self.role == Role::Assistant {
                // Not mine to judge, but never elect a node known to be down.
                self.operational.remove(from);
            }
            return out;
        }

        let mut replied = false;
        match msg.kind {
            MessageKind::Mia => {
                let claim = (msg.epoch, from);
                match self.role {
                    Role::Coordinator if claim_dominates(claim, (self.epoch, self.me)) => {
                        out.push(Action::Log(AgentEvent::Demoted { coordinator: from, epoch: msg.epoch }));
                        self.follow(from, msg.epoch, now, &mut out);
                        self.operational = msg.view.with(from).with(self.me);
                    }
                    Role::Assistant if from == self.coordinator => {
                        self.epoch = msg.epoch;
                        self.operational = msg.view.with(from).with(self.me);
                    }
                    Role::Assistant if claim_dominates(claim, (self.epoch, self.coordinator)) => {
                        out.push(Action::Log(AgentEvent::Follow { coordinator: from, epoch: msg.epoch }));
                        self.follow(from, msg.epoch, now, &mut out);
                        self.operational = msg.view.with(from).with(self.me);
                    }
                    _ => {
                        // Stale or weaker claim: tell the sender who leads.
                        out.push(Action::Send { to: from, msg: self.message(MessageKind::HelloBack, now) });
                        replied = true;
                    }
                }
            }
            MessageKind::HelloBack => {
                let claim = (msg.epoch, msg.coordinator);
                let named = msg.coordinator;
                match self.role {
                    Role::Coordinator => {
                        if named != self.me && claim_dominates(claim, (self.epoch, self.me)) {
                            // A later epoch means an election happened behind
                            // my back, whoever reports it.
                            if from == named || msg.epoch > self.epoch {
                                out.push(Action::Log(AgentEvent::Demoted { coordinator: named, epoch: msg.epoch }));
                                self.follow(named, msg.epoch, now, &mut out);
                            } else {
                                // Second-hand news may be stale: ask the rival
                                // directly, it answers with its own claim.
                                out.push(Action::Send { to: named, msg: self.message(MessageKind::Mia, now) });
                            }
                        }
                    }
                    Role::Assistant => {
                        let dominates = claim_dominates(claim, (self.epoch, self.coordinator));
                        // My coordinator pointing elsewhere is authoritative
                        // unless it lags behind my epoch.
                        let redirected = from == self.coordinator && msg.epoch >= self.epoch;
                        if named != self.coordinator && named != self.me && (dominates || redirected) {
                            out.push(Action::Log(AgentEvent::Follow { coordinator: named, epoch: msg.epoch }));
                            self.follow(named, msg.epoch, now, &mut out);
                        }
                    }
                }
            }
            MessageKind::Taia | MessageKind::EventNotify => {
                if self.role == Role::Assistant {
                    let claim = (msg.epoch, msg.coordinator);
                    // The sender elected me before I noticed the vacancy. If
                    // I already suspect my coordinator, my own deduction
                    // decides shortly.
                    let elected = msg.coordinator == self.me
                        && claim_dominates(claim, (self.epoch, self.coordinator))
                        && !self.sus.contains_key(&self.coordinator);
                    if elected {
                        self.take_over(msg.epoch, now, &mut out);
                    } else {
                        out.push(Action::Send { to: from, msg: self.message(MessageKind::HelloBack, now) });
                        replied = true;
                    }
                }
            }
            MessageKind::Teif => unreachable!("handled above"),
        }
        self.sign_of_life(msg, now, replied, &mut out);
        out
    }

    /// An application event to forward to the coordinator; it stands in for
    /// the next TAIA.
    pub fn notify_event(&mut self, now: Tick) -> Vec<Action> {
        let mut out = Vec::new();
        if self.crashed || self.role == Role::Coordinator || !self.cfg.ams_enabled() {
            return out;
        }
        out.push(Action::Send { to: self.coordinator, msg: self.message(MessageKind::EventNotify, now) });
        self.renew(self.clause(ClauseKind::TaiaSend, self.coordinator), &mut out);
        out
    }

    /// First contact after a revival or a reboot. A coordinator pings every
    /// node in its view; an assistant tells every node it is back, so
    /// whoever leads now can reintegrate it and the others can redirect it.
    pub fn announce(&mut self, now: Tick) -> Vec<Action> {
        let mut out = Vec::new();
        if self.crashed || !self.cfg.ams_enabled() {
            return out;
        }
        match self.role {
            Role::Coordinator => {
                for j in self.operational.without(self.me).iter() {
                    out.push(Action::Send { to: j, msg: self.message(MessageKind::Mia, now) });
                }
            }
            Role::Assistant => out.push(Action::Broadcast(self.message(MessageKind::Taia, now))),
        }
        out
    }

    /// Takes over as coordinator after winning an election.
    pub fn become_coordinator(&mut self, now: Tick) -> Vec<Action> {
        let mut out = Vec::new();
        self.take_over(self.epoch + 1, now, &mut out);
        out
    }

    fn take_over(&mut self, epoch: u64, now: Tick, out: &mut Vec<Action>) {
        self.abandon_protocol(out);
        self.role = Role::Coordinator;
        self.epoch = epoch;
        self.coordinator = self.me;
        self.operational.insert(self.me);
        out.push(Action::Log(AgentEvent::Elected { epoch: self.epoch }));
        self.arm_coordinator_clauses(out);
        for j in self.operational.without(self.me).iter() {
            out.push(Action::Send { to: j, msg: self.message(MessageKind::Mia, now) });
        }
    }

    fn follow(&mut self, coordinator: NodeId, epoch: u64, now: Tick, out: &mut Vec<Action>) {
        self.abandon_protocol(out);
        self.role = Role::Assistant;
        self.coordinator = coordinator;
        self.epoch = epoch;
        self.arm_assistant_clauses(coordinator, out);
        out.push(Action::Send { to: coordinator, msg: self.message(MessageKind::Taia, now) });
    }

    /// Drops every heartbeat clause. Open suspicions keep running to
    /// their own resolution.
    fn abandon_protocol(&mut self, out: &mut Vec<Action>) {
        let doomed: Vec<Clause> =
            self.armed.iter().filter(|c| c.kind.is_protocol() && c.kind != ClauseKind::TeifRecv).copied().collect();
        for clause in doomed {
            self.disarm(clause, out);
        }
    }

    fn suspect(&mut self, k: NodeId, now: Tick, out: &mut Vec<Action>) {
        self.sus.insert(k, now);
        out.push(Action::Log(AgentEvent::Suspect(k)));
        self.arm(AlarmSpec::one_shot(self.clause(ClauseKind::TeifRecv, k), self.cfg.teif_recv), out);
    }

    /// Removes `k` from the view along with every clause about it.
    fn drop_member(&mut self, k: NodeId, out: &mut Vec<Action>) {
        self.operational.remove(k);
        self.sus.remove(&k);
        let doomed: Vec<Clause> =
            self.armed.iter().filter(|c| c.subject == k && c.kind.is_protocol()).copied().collect();
        for clause in doomed {
            self.disarm(clause, out);
        }
    }

    fn conclude_node_crashed(&mut self, k: NodeId, now: Tick, out: &mut Vec<Action>) {
        out.push(Action::Deduce(Deduction::NodeCrashed(k)));
        self.drop_member(k, out);
        out.push(Action::RecoveryHook(k));
        if self.role == Role::Assistant && k == self.coordinator {
            self.elect(k, now, out);
        }
    }

    fn conclude_agent_crashed(&mut self, k: NodeId, now: Tick, out: &mut Vec<Action>) {
        out.push(Action::Log(AgentEvent::TeifReceived(k)));
        if self.sus.remove(&k).is_some() {
            self.disarm(self.clause(ClauseKind::TeifRecv, k), out);
        } else {
            // An unsolicited TEIF opens and settles a suspicion at once.
            out.push(Action::Log(AgentEvent::Suspect(k)));
        }
        out.push(Action::Deduce(Deduction::AgentCrashedNodeAlive(k)));
        self.drop_member(k, out);
        if self.role == Role::Assistant && k == self.coordinator {
            self.elect(k, now, out);
        }
    }

    fn elect(&mut self, failed: NodeId, now: Tick, out: &mut Vec<Action>) {
        let n = self.cfg.node_count();
        let successor = match self.cfg.election {
            ElectionPolicy::SkipScan => {
                // The view always holds `me`, so a successor exists.
                elect_successor(self.operational, failed, n).unwrap_or(self.me)
            }
            ElectionPolicy::Naive => elect_naive(failed, n),
        };
        if successor == self.me {
            self.take_over(self.epoch + 1, now, out);
        } else {
            let epoch = self.epoch + 1;
            out.push(Action::Log(AgentEvent::Follow { coordinator: successor, epoch }));
            self.follow(successor, epoch, now, out);
        }
    }

    fn sign_of_life(&mut self, msg: &Message, now: Tick, replied: bool, out: &mut Vec<Action>) {
        let from = msg.from;
        if self.sus.remove(&from).is_some() {
            self.disarm(self.clause(ClauseKind::TeifRecv, from), out);
            out.push(Action::Deduce(Deduction::AgentSlowedDown(from)));
            out.push(Action::Log(AgentEvent::Readmitted(from)));
        }
        match self.role {
            Role::Coordinator if !self.operational.contains(from) => self.reintegrate(from, now, replied, out),
            Role::Coordinator => self.renew(self.clause(ClauseKind::TaiaRecv, from), out),
            // A TAIA from my coordinator means it does not consider itself
            // one; that is no proof it is leading.
            Role::Assistant
                if from == self.coordinator && matches!(msg.kind, MessageKind::Mia | MessageKind::HelloBack) =>
            {
                self.renew(self.clause(ClauseKind::MiaRecv, from), out)
            }
            Role::Assistant => {}
        }
    }

    fn reintegrate(&mut self, j: NodeId, now: Tick, replied: bool, out: &mut Vec<Action>) {
        self.operational.insert(j);
        out.push(Action::Log(AgentEvent::Reintegrated(j)));
        self.arm(AlarmSpec::cyclic(self.clause(ClauseKind::MiaSend, j), self.cfg.mia_send), out);
        self.arm(AlarmSpec::cyclic(self.clause(ClauseKind::TaiaRecv, j), self.cfg.taia_recv), out);
        if !replied {
            out.push(Action::Send { to: j, msg: self.message(MessageKind::HelloBack, now) });
        }
    }
}
