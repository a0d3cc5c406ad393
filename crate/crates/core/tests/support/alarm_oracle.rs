//! Brute-force reference for the alarm manager: a flat list of alarms,
//! rescanned in full for every tick between two `advance` calls.
//!
//! Shared between the core integration tests and the acceptance suite.

use ams_core::{AlarmError, AlarmManager, AlarmSpec, Tick};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Register { id: u32, deadline_in: Tick, cyclic: bool, now: Tick },
    Cancel { id: u32 },
    Restart { id: u32, now: Tick },
    Suspend { id: u32 },
    Resume { id: u32, now: Tick },
    Advance { now: Tick },
}

/// What an operation produced: the error name, or the alarms it fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Err(&'static str),
    Fired(Vec<(u32, Tick)>),
}

#[derive(Debug, Clone)]
struct Slot {
    id: u32,
    period: Tick,
    cyclic: bool,
    /// `(deadline, entry order)`, or `None` while suspended.
    due: Option<(Tick, u64)>,
}

#[derive(Debug, Clone, Default)]
pub struct Oracle {
    alarms: Vec<Slot>,
    entries: u64,
    scanned: Tick,
}

impl Oracle {
    fn find(&mut self, id: u32) -> Option<&mut Slot> {
        self.alarms.iter_mut().find(|a| a.id == id)
    }

    fn entry(&mut self) -> u64 {
        self.entries += 1;
        self.entries
    }

    pub fn apply(&mut self, op: Op) -> Outcome {
        match op {
            Op::Register { id, deadline_in, cyclic, now } => {
                if deadline_in == 0 {
                    return Outcome::Err("zero");
                }
                if self.find(id).is_some() {
                    return Outcome::Err("duplicate");
                }
                let e = self.entry();
                self.alarms.push(Slot { id, period: deadline_in, cyclic, due: Some((now + deadline_in, e)) });
                Outcome::Ok
            }
            Op::Cancel { id } => match self.alarms.iter().position(|a| a.id == id) {
                Some(i) => {
                    self.alarms.remove(i);
                    Outcome::Ok
                }
                None => Outcome::Err("unknown"),
            },
            Op::Restart { id, now } => {
                let e = self.entries + 1;
                match self.find(id) {
                    None => Outcome::Err("unknown"),
                    Some(a) if a.due.is_none() => Outcome::Err("suspended"),
                    Some(a) => {
                        a.due = Some((now + a.period, e));
                        self.entries = e;
                        Outcome::Ok
                    }
                }
            }
            Op::Suspend { id } => match self.find(id) {
                None => Outcome::Err("unknown"),
                Some(a) if a.due.is_none() => Outcome::Err("suspended"),
                Some(a) => {
                    a.due = None;
                    Outcome::Ok
                }
            },
            Op::Resume { id, now } => {
                let e = self.entries + 1;
                match self.find(id) {
                    None => Outcome::Err("unknown"),
                    Some(a) if a.due.is_some() => Outcome::Err("not-suspended"),
                    Some(a) => {
                        a.due = Some((now + a.period, e));
                        self.entries = e;
                        Outcome::Ok
                    }
                }
            }
            Op::Advance { now } => {
                let mut fired = Vec::new();
                // Anything registered "in the past" is still due.
                let first = self.alarms.iter().filter_map(|a| a.due).map(|d| d.0).min();
                let start = first.map_or(now + 1, |f| f.min(self.scanned + 1));
                for tick in start..=now {
                    loop {
                        let next = self
                            .alarms
                            .iter()
                            .enumerate()
                            .filter_map(|(i, a)| a.due.filter(|d| d.0 == tick).map(|d| (d.1, i)))
                            .min();
                        let Some((_, i)) = next else { break };
                        let id = self.alarms[i].id;
                        fired.push((id, tick));
                        if self.alarms[i].cyclic {
                            let e = self.entry();
                            let a = &mut self.alarms[i];
                            a.due = Some((tick + a.period, e));
                        } else {
                            self.alarms.remove(i);
                        }
                    }
                }
                self.scanned = self.scanned.max(now);
                Outcome::Fired(fired)
            }
        }
    }
}

fn err_name(e: AlarmError<u32>) -> &'static str {
    match e {
        AlarmError::Duplicate(_) => "duplicate",
        AlarmError::Unknown(_) => "unknown",
        AlarmError::Suspended(_) => "suspended",
        AlarmError::NotSuspended(_) => "not-suspended",
        AlarmError::ZeroDeadline(_) => "zero",
    }
}

/// Applies `op` to the real manager, reported in the oracle's terms.
pub fn apply_real(m: &mut AlarmManager<u32>, op: Op) -> Outcome {
    let unit = |r: Result<(), AlarmError<u32>>| match r {
        Ok(()) => Outcome::Ok,
        Err(e) => Outcome::Err(err_name(e)),
    };
    match op {
        Op::Register { id, deadline_in, cyclic, now } => {
            unit(m.register(AlarmSpec { id, deadline_in, cyclic }, now).map(|_| ()))
        }
        Op::Cancel { id } => unit(m.cancel(id)),
        Op::Restart { id, now } => unit(m.restart(id, now)),
        Op::Suspend { id } => unit(m.suspend(id)),
        Op::Resume { id, now } => unit(m.resume(id, now)),
        Op::Advance { now } => Outcome::Fired(m.advance(now).into_iter().map(|f| (f.id, f.fired_at)).collect()),
    }
}

/// A random operation sequence: at most 20 alarm ids, deadlines up to 1000
/// ticks, time moving forward only.
pub fn random_ops(rng: &mut impl Rng, len: usize) -> Vec<Op> {
    let mut now: Tick = 0;
    let mut ops = Vec::with_capacity(len);
    for _ in 0..len {
        now += rng.gen_range(0..=150);
        let id = rng.gen_range(0..20);
        let op = match rng.gen_range(0..10) {
            0..=2 => Op::Register { id, deadline_in: rng.gen_range(1..=1000), cyclic: rng.gen_bool(0.5), now },
            3 => Op::Cancel { id },
            4 => Op::Restart { id, now },
            5 => Op::Suspend { id },
            6 => Op::Resume { id, now },
            _ => Op::Advance { now },
        };
        ops.push(op);
    }
    ops.push(Op::Advance { now: now + 2000 });
    ops
}

/// Runs `ops` on both implementations; the first disagreement, if any.
pub fn first_mismatch(ops: &[Op]) -> Option<(usize, Op, Outcome, Outcome)> {
    let mut real = AlarmManager::new();
    let mut oracle = Oracle::default();
    for (i, op) in ops.iter().enumerate() {
        let got = apply_real(&mut real, *op);
        let want = oracle.apply(*op);
        if got != want {
            return Some((i, *op, got, want));
        }
    }
    None
}
