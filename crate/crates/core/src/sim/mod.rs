//! Deterministic discrete-event simulator.
//!
//! One agent per node, a virtual clock in ticks and a single event queue
//! ordered by `(tick, sequence number)`. Messages take a seeded random
//! latency in `[1, MAX_LATENCY]` and never overtake each other on the same
//! (sender task, receiver) channel. Faults from a `.faultrc` script are
//! applied at their injection tick. The same configuration, faults and seed
//! always give the same [`Trace`].

mod predicate;
mod trace;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use predicate::PredicateReport;
pub use trace::{TaskLabel, Trace, TraceEvent};

use crate::agent::{Action, AgentEvent, AgentState, Clause, ClauseKind};
use crate::alarm::{AlarmManager, FiredAlarm};
use crate::config::ValidatedConfig;
use crate::faultrc::{FaultKind, FaultSpec};
use crate::types::{Message, NodeId, NodeSet, Role, TaskKind, Tick};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("fault `{fault}` targets node {} but the system has {nodes} nodes", fault.target)]
    UnknownTarget { fault: FaultSpec, nodes: usize },
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    Deliver { msg: Message, to: NodeId, incarnation: u32 },
    AlarmCheck(NodeId),
    Fault(usize),
    SlowdownEnd(NodeId),
    ReviveComplete { node: NodeId, incarnation: u32 },
    RebootComplete { node: NodeId, incarnation: u32 },
    AppEvent(NodeId),
}

#[derive(Debug, Clone, Copy)]
struct Scheduled {
    at: Tick,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.seq) == (other.at, other.seq)
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

#[derive(Debug, Clone)]
struct Node {
    agent: AgentState,
    alarms: AlarmManager<Clause>,
    up: bool,
    d_alive: bool,
    i_alive: bool,
    /// Bumped on every node crash; events for an older incarnation are void.
    incarnation: u32,
    /// Earliest pending alarm check.
    next_check: Option<Tick>,
    revive_pending: bool,
    reboot_pending: bool,
    /// Active slowdowns as `(until, factor)`.
    slowdowns: Vec<(Tick, u32)>,
}

impl Node {
    fn slow_factor(&self, now: Tick) -> u32 {
        self.slowdowns.iter().filter(|(until, _)| *until > now).map(|(_, f)| *f).max().unwrap_or(1)
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: ValidatedConfig,
    now: Tick,
    seq: u64,
    queue: BinaryHeap<Reverse<Scheduled>>,
    nodes: Vec<Node>,
    faults: Vec<FaultSpec>,
    rng: ChaCha8Rng,
    /// Latest arrival per channel, indexed by `channel()`.
    last_arrival: Vec<Tick>,
    trace: Trace,
    verbose: bool,
}

impl Simulation {
    pub fn new(cfg: ValidatedConfig, faults: &[FaultSpec], seed: u64) -> Result<Self, SimError> {
        let n = cfg.node_count();
        if let Some(fault) = faults.iter().find(|f| f.target.index() >= n) {
            return Err(SimError::UnknownTarget { fault: *fault, nodes: n });
        }
        let mut sim = Simulation {
            cfg,
            now: 0,
            seq: 0,
            queue: BinaryHeap::new(),
            nodes: Vec::with_capacity(n),
            faults: faults.to_vec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_arrival: vec![0; n * 2 * n],
            trace: Trace::new(n, cfg.tick_ns),
            verbose: false,
        };
        let mut starts = Vec::with_capacity(n);
        for me in cfg.node_ids() {
            let (agent, actions) = AgentState::init(me, &cfg);
            sim.nodes.push(Node {
                agent,
                alarms: AlarmManager::new(),
                up: true,
                d_alive: true,
                i_alive: true,
                incarnation: 0,
                next_check: None,
                revive_pending: false,
                reboot_pending: false,
                slowdowns: Vec::new(),
            });
            starts.push(actions);
        }
        for (i, actions) in starts.into_iter().enumerate() {
            sim.apply(NodeId(i as u32), actions);
        }
        for (idx, fault) in faults.iter().enumerate() {
            sim.schedule(fault.at, EventKind::Fault(idx));
        }
        Ok(sim)
    }

    /// Log every message send and delivery as well (in the verbose id space).
    pub fn set_verbose(&mut self, verbose: bool) {
        self.verbose = verbose;
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.cfg
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    pub fn agent(&self, node: NodeId) -> &AgentState {
        &self.nodes[node.index()].agent
    }

    pub fn alarms(&self, node: NodeId) -> &AlarmManager<Clause> {
        &self.nodes[node.index()].alarms
    }

    pub fn is_up(&self, node: NodeId) -> bool {
        self.nodes[node.index()].up
    }

    /// Node up and its task D running.
    pub fn is_live(&self, node: NodeId) -> bool {
        let n = &self.nodes[node.index()];
        n.up && n.d_alive
    }

    /// Queue an application event on `node`; its task D forwards it to the
    /// coordinator in place of the next TAIA.
    pub fn schedule_app_event(&mut self, node: NodeId, at: Tick) {
        self.schedule(at.max(self.now), EventKind::AppEvent(node));
    }

    /// Processes every event due at or before `until`, then sets the clock
    /// to `until`.
    pub fn run_until(&mut self, until: Tick) {
        while let Some(Reverse(next)) = self.queue.peek() {
            if next.at > until {
                break;
            }
            let Reverse(ev) = self.queue.pop().unwrap();
            self.now = ev.at;
            self.handle(ev.kind);
        }
        self.now = self.now.max(until);
    }

    pub fn predicate(&self) -> PredicateReport {
        let live: NodeSet = self.cfg.node_ids().filter(|&k| self.is_live(k)).collect();
        let coordinators: NodeSet = live.iter().filter(|&k| self.agent(k).role() == Role::Coordinator).collect();
        let mut named = live.iter().map(|k| self.agent(k).coordinator());
        let first = named.next();
        let agreed = first.filter(|c| named.all(|o| o == *c));
        let coordinator_view =
            (coordinators.len() == 1).then(|| self.agent(coordinators.iter().next().unwrap()).operational());
        let patience = self.cfg.teif_recv + self.cfg.max_latency;
        let stuck = live
            .iter()
            .flat_map(|k| {
                self.agent(k)
                    .suspicions()
                    .filter(|&(_, since)| self.now.saturating_sub(since) > patience)
                    .map(move |(s, since)| (k, s, since))
            })
            .collect();
        PredicateReport { at: self.now, tick_ns: self.cfg.tick_ns, live, coordinators, agreed, coordinator_view, stuck }
    }

    fn schedule(&mut self, at: Tick, kind: EventKind) {
        self.queue.push(Reverse(Scheduled { at, seq: self.seq, kind }));
        self.seq += 1;
    }

    fn log(&mut self, node: NodeId, task: TaskLabel, text: String) {
        self.trace.push(self.now, node, task, false, text);
    }

    fn log_verbose(&mut self, node: NodeId, task: TaskLabel, text: impl FnOnce() -> String) {
        if self.verbose {
            self.trace.push(self.now, node, task, true, text());
        }
    }

    fn channel(&self, from: NodeId, task: TaskKind, to: NodeId) -> usize {
        let n = self.nodes.len();
        let t = match task {
            TaskKind::D => 0,
            TaskKind::I => 1,
        };
        (from.index() * 2 + t) * n + to.index()
    }

    fn send(&mut self, from: NodeId, to: NodeId, msg: Message) {
        let bound = self.cfg.max_latency.max(1);
        let mut latency = self.rng.gen_range(1..=bound);
        if msg.from_task == TaskKind::D {
            let factor = self.nodes[from.index()].slow_factor(self.now);
            latency += u64::from(factor - 1) * bound;
        }
        let ch = self.channel(from, msg.from_task, to);
        let at = (self.now + latency).max(self.last_arrival[ch]);
        self.last_arrival[ch] = at;
        let incarnation = self.nodes[to.index()].incarnation;
        self.log_verbose(from, msg.from_task.into(), || format!("SEND {} to {to}", msg.kind));
        self.schedule(at, EventKind::Deliver { msg, to, incarnation });
    }

    fn ensure_check(&mut self, node: NodeId) {
        let n = &mut self.nodes[node.index()];
        if let Some(deadline) = n.alarms.next_deadline() {
            if n.next_check.is_none_or(|c| deadline < c) {
                n.next_check = Some(deadline);
                self.schedule(deadline, EventKind::AlarmCheck(node));
            }
        }
    }

    fn apply(&mut self, node: NodeId, actions: Vec<Action>) {
        let now = self.now;
        for action in actions {
            match action {
                Action::Send { to, msg } => self.send(node, to, msg),
                Action::Broadcast(msg) => {
                    for to in 0..self.nodes.len() as u32 {
                        if to != node.0 {
                            self.send(node, NodeId(to), msg);
                        }
                    }
                }
                Action::RegisterAlarm(spec) => {
                    let res = self.nodes[node.index()].alarms.register(spec, now).map(|_| ());
                    self.alarm_result(node, res);
                }
                Action::CancelAlarm(clause) => {
                    let res = self.nodes[node.index()].alarms.cancel(clause);
                    self.alarm_result(node, res);
                }
                Action::RestartAlarm(clause) => {
                    let res = self.nodes[node.index()].alarms.restart(clause, now);
                    self.alarm_result(node, res);
                }
                Action::Deduce(d) => self.log(node, TaskLabel::D, format!("DEDUCE {d}")),
                Action::ReviveLocalD => self.request_revive(node),
                Action::RecoveryHook(k) => {
                    self.log(node, TaskLabel::D, format!("RECOVERY node {k}"));
                    let target = &self.nodes[k.index()];
                    if !target.up && !target.reboot_pending {
                        self.log(node, TaskLabel::D, format!("KILLED {k}"));
                    }
                }
                Action::Log(ev) => {
                    let task = match ev {
                        AgentEvent::TeifBroadcast => TaskLabel::I,
                        _ => TaskLabel::D,
                    };
                    self.log(node, task, ev.to_string());
                }
            }
        }
        self.ensure_check(node);
    }

    fn alarm_result(&mut self, node: NodeId, res: Result<(), crate::alarm::AlarmError<Clause>>) {
        if let Err(e) = res {
            self.log(node, TaskLabel::A, format!("ALARM-ERROR {e}"));
        }
    }

    fn request_revive(&mut self, node: NodeId) {
        let delay = self.cfg.revive_delay;
        let n = &mut self.nodes[node.index()];
        if delay == 0 || n.revive_pending || n.d_alive {
            return;
        }
        n.revive_pending = true;
        let incarnation = n.incarnation;
        self.schedule(self.now + delay, EventKind::ReviveComplete { node, incarnation });
    }

    fn handle(&mut self, kind: EventKind) {
        match kind {
            EventKind::Deliver { msg, to, incarnation } => {
                let n = &self.nodes[to.index()];
                if !n.up || n.incarnation != incarnation || !n.d_alive {
                    return;
                }
                self.log_verbose(to, TaskLabel::D, || format!("RECV {} from {}", msg.kind, msg.from));
                let now = self.now;
                let actions = self.nodes[to.index()].agent.on_message(&msg, now);
                self.apply(to, actions);
            }
            EventKind::AlarmCheck(node) => self.check_alarms(node),
            EventKind::Fault(idx) => self.inject(self.faults[idx]),
            EventKind::SlowdownEnd(node) => {
                let now = self.now;
                let n = &mut self.nodes[node.index()];
                n.slowdowns.retain(|(until, _)| *until > now);
                self.log(node, TaskLabel::A, "SLOWDOWN END".to_string());
            }
            EventKind::ReviveComplete { node, incarnation } => {
                let n = &mut self.nodes[node.index()];
                if !n.up || n.incarnation != incarnation || !n.revive_pending {
                    return;
                }
                n.revive_pending = false;
                n.d_alive = true;
                n.alarms.retain(|_| false);
                let (agent, mut actions) = AgentState::revive(node, &self.cfg);
                n.agent = agent;
                self.log(node, TaskLabel::I, "REVIVE D".to_string());
                actions.extend(self.nodes[node.index()].agent.announce(self.now));
                self.apply(node, actions);
            }
            EventKind::RebootComplete { node, incarnation } => {
                let n = &mut self.nodes[node.index()];
                if n.incarnation != incarnation || !n.reboot_pending {
                    return;
                }
                n.reboot_pending = false;
                n.up = true;
                n.d_alive = true;
                n.i_alive = true;
                let (agent, mut actions) = AgentState::init(node, &self.cfg);
                n.agent = agent;
                self.log(node, TaskLabel::A, "REBOOT".to_string());
                actions.extend(self.nodes[node.index()].agent.announce(self.now));
                self.apply(node, actions);
            }
            EventKind::AppEvent(node) => {
                if !self.is_live(node) {
                    return;
                }
                let now = self.now;
                self.log(node, TaskLabel::D, "APP-EVENT".to_string());
                let actions = self.nodes[node.index()].agent.notify_event(now);
                self.apply(node, actions);
            }
        }
    }

    fn check_alarms(&mut self, node: NodeId) {
        let now = self.now;
        {
            let n = &mut self.nodes[node.index()];
            if n.next_check == Some(now) {
                n.next_check = None;
            }
            if !n.up {
                return;
            }
        }
        while let Some(fired) = self.nodes[node.index()].alarms.pop_due(now) {
            self.dispatch_alarm(node, fired);
        }
        self.ensure_check(node);
    }

    fn dispatch_alarm(&mut self, node: NodeId, fired: FiredAlarm<Clause>) {
        let n = &mut self.nodes[node.index()];
        // A dead task's alarms still fire; nobody reads the message.
        let result = match fired.id.task() {
            TaskKind::I if n.i_alive => n.agent.task_i_step(&fired),
            TaskKind::D if n.d_alive => {
                if self.verbose && fired.id.kind == ClauseKind::ImAliveSet {
                    self.trace.push(self.now, node, TaskLabel::D, true, "SET I'M-ALIVE".to_string());
                }
                n.agent.on_alarm(&fired)
            }
            _ => return,
        };
        match result {
            Ok(actions) => self.apply(node, actions),
            Err(e) => self.log(node, fired.id.task().into(), format!("ALARM-ERROR {e}")),
        }
    }

    fn inject(&mut self, fault: FaultSpec) {
        let k = fault.target;
        let text = match fault.kind {
            FaultKind::CrashComponent { task } => format!("INJECT CRASH COMPONENT {task}"),
            FaultKind::CrashNode => "INJECT CRASH NODE".to_string(),
            FaultKind::RebootNode => "INJECT REBOOT NODE".to_string(),
            FaultKind::Slowdown { duration, factor } => format!(
                "INJECT SLOWDOWN factor={factor} for {}s",
                crate::config::format_secs(duration, self.cfg.tick_ns)
            ),
        };
        self.log(k, TaskLabel::A, text);
        let now = self.now;
        let n = &mut self.nodes[k.index()];
        if !n.up {
            return;
        }
        match fault.kind {
            FaultKind::CrashComponent { task: TaskKind::D } => {
                n.d_alive = false;
                n.agent.mark_crashed();
            }
            FaultKind::CrashComponent { task: TaskKind::I } => n.i_alive = false,
            FaultKind::CrashNode => {
                let delay = self.cfg.node_reboot_delay;
                self.crash_node(k, delay);
            }
            FaultKind::RebootNode => {
                let delay = match self.cfg.node_reboot_delay {
                    0 => self.cfg.ticks_from_secs(1.0),
                    d => d,
                };
                self.crash_node(k, delay);
            }
            FaultKind::Slowdown { duration, factor } => {
                n.slowdowns.push((now + duration, factor));
                self.schedule(now + duration, EventKind::SlowdownEnd(k));
            }
        }
    }

    /// Stops every task of `k`; with a positive delay the node comes back
    /// after it.
    fn crash_node(&mut self, k: NodeId, reboot_delay: Tick) {
        let n = &mut self.nodes[k.index()];
        n.up = false;
        n.d_alive = false;
        n.i_alive = false;
        n.incarnation += 1;
        n.alarms.retain(|_| false);
        n.next_check = None;
        n.revive_pending = false;
        n.slowdowns.clear();
        n.agent.mark_crashed();
        if reboot_delay > 0 {
            n.reboot_pending = true;
            let incarnation = n.incarnation;
            self.schedule(self.now + reboot_delay, EventKind::RebootComplete { node: k, incarnation });
        }
    }
}

/// Runs a whole scenario from tick 0 to `horizon`.
pub fn run(cfg: ValidatedConfig, faults: &[FaultSpec], horizon: Tick, seed: u64) -> Result<Trace, SimError> {
    let mut sim = Simulation::new(cfg, faults, seed)?;
    sim.run_until(horizon);
    Ok(sim.into_trace())
}
