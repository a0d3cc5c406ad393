//! Alarm manager: an ordered list of time clauses that turns each expiry
//! into a [`FiredAlarm`] for the caller to route as a message.
//!
//! Alarms are ordered by absolute deadline; equal deadlines fire in the
//! order the alarms were (re-)entered. Cyclic alarms are re-entered at
//! `deadline + period` after each expiry, so a single [`AlarmManager::advance`]
//! over several periods reports every missed expiry. Time never flows on its
//! own: every operation takes the current tick from the caller.

use std::collections::BTreeMap;
use std::fmt::Debug;

use thiserror::Error;

use crate::types::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlarmSpec<K> {
    pub id: K,
    /// Ticks from registration (and period, for cyclic alarms).
    pub deadline_in: Tick,
    pub cyclic: bool,
}

impl<K> AlarmSpec<K> {
    pub fn cyclic(id: K, period: Tick) -> Self {
        AlarmSpec { id, deadline_in: period, cyclic: true }
    }

    pub fn one_shot(id: K, deadline_in: Tick) -> Self {
        AlarmSpec { id, deadline_in, cyclic: false }
    }
}

/// "Clause `id` has elapsed", stamped with the tick it was due.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiredAlarm<K> {
    pub id: K,
    pub fired_at: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlarmError<K: Debug> {
    #[error("alarm {0:?} is already registered")]
    Duplicate(K),
    #[error("no live alarm {0:?}")]
    Unknown(K),
    #[error("alarm {0:?} is suspended")]
    Suspended(K),
    #[error("alarm {0:?} is not suspended")]
    NotSuspended(K),
    #[error("alarm {0:?} needs a positive deadline")]
    ZeroDeadline(K),
}

#[derive(Debug, Clone)]
struct Entry {
    period: Tick,
    cyclic: bool,
    /// `None` while suspended.
    slot: Option<(Tick, u64)>,
}

#[derive(Debug, Clone)]
pub struct AlarmManager<K> {
    queue: BTreeMap<(Tick, u64), K>,
    entries: BTreeMap<K, Entry>,
    next_seq: u64,
    now: Tick,
}

impl<K> Default for AlarmManager<K> {
    fn default() -> Self {
        AlarmManager { queue: BTreeMap::new(), entries: BTreeMap::new(), next_seq: 0, now: 0 }
    }
}

impl<K: Ord + Copy + Debug> AlarmManager<K> {
    pub fn new() -> Self {
        Self::default()
    }

    fn enter(&mut self, id: K, deadline: Tick) -> (Tick, u64) {
        let slot = (deadline, self.next_seq);
        self.next_seq += 1;
        self.queue.insert(slot, id);
        slot
    }

    pub fn register(&mut self, spec: AlarmSpec<K>, now: Tick) -> Result<K, AlarmError<K>> {
        if spec.deadline_in == 0 {
            return Err(AlarmError::ZeroDeadline(spec.id));
        }
        if self.entries.contains_key(&spec.id) {
            return Err(AlarmError::Duplicate(spec.id));
        }
        let slot = self.enter(spec.id, now.saturating_add(spec.deadline_in));
        self.entries.insert(spec.id, Entry { period: spec.deadline_in, cyclic: spec.cyclic, slot: Some(slot) });
        Ok(spec.id)
    }

    /// Pops the earliest alarm due at or before `now`, re-entering it if
    /// cyclic.
    pub fn pop_due(&mut self, now: Tick) -> Option<FiredAlarm<K>> {
        let (&(deadline, seq), &id) = self.queue.first_key_value()?;
        if deadline > now {
            self.now = self.now.max(now);
            return None;
        }
        self.queue.remove(&(deadline, seq));
        let entry = self.entries.get(&id).expect("queued alarm has an entry");
        if entry.cyclic {
            let next = deadline + entry.period;
            let slot = self.enter(id, next);
            self.entries.get_mut(&id).expect("entry checked above").slot = Some(slot);
        } else {
            self.entries.remove(&id);
        }
        self.now = self.now.max(deadline);
        Some(FiredAlarm { id, fired_at: deadline })
    }

    /// Every expiry up to and including `now`, in firing order.
    pub fn advance(&mut self, now: Tick) -> Vec<FiredAlarm<K>> {
        let mut fired = Vec::new();
        while let Some(f) = self.pop_due(now) {
            fired.push(f);
        }
        self.now = self.now.max(now);
        fired
    }

    /// Deletes and re-enters the alarm with a full deadline from `now`.
    pub fn restart(&mut self, id: K, now: Tick) -> Result<(), AlarmError<K>> {
        let entry = self.entries.get(&id).ok_or(AlarmError::Unknown(id))?;
        let Some(slot) = entry.slot else {
            return Err(AlarmError::Suspended(id));
        };
        let period = entry.period;
        self.queue.remove(&slot);
        let slot = self.enter(id, now.saturating_add(period));
        self.entries.get_mut(&id).expect("entry checked above").slot = Some(slot);
        Ok(())
    }

    pub fn suspend(&mut self, id: K) -> Result<(), AlarmError<K>> {
        let entry = self.entries.get_mut(&id).ok_or(AlarmError::Unknown(id))?;
        let slot = entry.slot.take().ok_or(AlarmError::Suspended(id))?;
        self.queue.remove(&slot);
        Ok(())
    }

    /// Re-enables a suspended alarm; missed periods are not replayed.
    pub fn resume(&mut self, id: K, now: Tick) -> Result<(), AlarmError<K>> {
        let entry = self.entries.get(&id).ok_or(AlarmError::Unknown(id))?;
        if entry.slot.is_some() {
            return Err(AlarmError::NotSuspended(id));
        }
        let period = entry.period;
        let slot = self.enter(id, now.saturating_add(period));
        self.entries.get_mut(&id).expect("entry checked above").slot = Some(slot);
        Ok(())
    }

    pub fn cancel(&mut self, id: K) -> Result<(), AlarmError<K>> {
        let entry = self.entries.remove(&id).ok_or(AlarmError::Unknown(id))?;
        if let Some(slot) = entry.slot {
            self.queue.remove(&slot);
        }
        Ok(())
    }

    /// Cancels every alarm whose id fails `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&K) -> bool) {
        let doomed: Vec<K> = self.entries.keys().filter(|k| !keep(k)).copied().collect();
        for id in doomed {
            let _ = self.cancel(id);
        }
    }

    pub fn next_deadline(&self) -> Option<Tick> {
        self.queue.first_key_value().map(|(&(deadline, _), _)| deadline)
    }

    /// Absolute deadline of an active alarm.
    pub fn deadline_of(&self, id: K) -> Option<Tick> {
        self.entries.get(&id).and_then(|e| e.slot).map(|(d, _)| d)
    }

    pub fn is_live(&self, id: K) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn is_suspended(&self, id: K) -> bool {
        self.entries.get(&id).is_some_and(|e| e.slot.is_none())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Live alarm ids in firing order; suspended ones last, by id.
    pub fn ids(&self) -> Vec<K> {
        let mut ids: Vec<K> = self.queue.values().copied().collect();
        ids.extend(self.entries.iter().filter(|(_, e)| e.slot.is_none()).map(|(k, _)| *k));
        ids
    }

    pub fn now(&self) -> Tick {
        self.now
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = AlarmManager<char>;

    fn fired(m: &mut M, now: Tick) -> Vec<(char, Tick)> {
        m.advance(now).into_iter().map(|f| (f.id, f.fired_at)).collect()
    }

    #[test]
    fn head_is_earliest() {
        let mut m = M::new();
        m.register(AlarmSpec::one_shot('A', 3), 0).unwrap();
        m.register(AlarmSpec::one_shot('B', 5), 0).unwrap();
        assert_eq!(m.ids()[0], 'A');
        assert_eq!(m.next_deadline(), Some(3));
    }

    #[test]
    fn duplicate_register_fails() {
        let mut m = M::new();
        m.register(AlarmSpec::one_shot('A', 1), 0).unwrap();
        assert_eq!(m.register(AlarmSpec::one_shot('A', 1), 0), Err(AlarmError::Duplicate('A')));
        assert_eq!(m.register(AlarmSpec::one_shot('Z', 0), 0), Err(AlarmError::ZeroDeadline('Z')));
    }

    #[test]
    fn fires_in_deadline_order() {
        let mut m = M::new();
        m.register(AlarmSpec::one_shot('A', 9), 0).unwrap();
        m.register(AlarmSpec::one_shot('B', 3), 0).unwrap();
        m.register(AlarmSpec::one_shot('C', 5), 0).unwrap();
        assert_eq!(fired(&mut m, 100), vec![('B', 3), ('C', 5), ('A', 9)]);
    }

    #[test]
    fn cyclic_is_reentered_one_shot_removed() {
        let mut m = M::new();
        m.register(AlarmSpec::cyclic('A', 3), 0).unwrap();
        m.register(AlarmSpec::one_shot('B', 5), 0).unwrap();
        assert_eq!(fired(&mut m, 5), vec![('A', 3), ('B', 5)]);
        assert_eq!(m.ids(), vec!['A']);
        assert_eq!(m.deadline_of('A'), Some(6));
    }

    #[test]
    fn empty_advance() {
        assert!(M::new().advance(1_000).is_empty());
    }

    #[test]
    fn cyclic_catch_up() {
        let mut m = M::new();
        m.register(AlarmSpec::cyclic('A', 2), 0).unwrap();
        assert_eq!(fired(&mut m, 7), vec![('A', 2), ('A', 4), ('A', 6)]);
    }

    #[test]
    fn restart_pushes_deadline() {
        let mut m = M::new();
        m.register(AlarmSpec::cyclic('A', 300_000), 0).unwrap();
        m.restart('A', 250_000).unwrap();
        assert_eq!(fired(&mut m, 549_999), vec![]);
        assert_eq!(fired(&mut m, 550_000), vec![('A', 550_000)]);
        assert_eq!(m.restart('Q', 1), Err(AlarmError::Unknown('Q')));
    }

    #[test]
    fn restart_at_same_deadline_is_invisible() {
        let mut m = M::new();
        m.register(AlarmSpec::cyclic('A', 10), 5).unwrap();
        m.restart('A', 5).unwrap();
        assert_eq!(fired(&mut m, 25), vec![('A', 15), ('A', 25)]);
    }

    #[test]
    fn suspend_and_resume() {
        let mut m = M::new();
        m.register(AlarmSpec::cyclic('A', 5), 0).unwrap();
        m.suspend('A').unwrap();
        assert!(m.is_suspended('A'));
        assert_eq!(m.suspend('A'), Err(AlarmError::Suspended('A')));
        assert_eq!(m.restart('A', 1), Err(AlarmError::Suspended('A')));
        assert_eq!(fired(&mut m, 1_000_000), vec![]);

        // suspended at 10, resumed at 20 with deadline_in 5
        let mut m = M::new();
        m.register(AlarmSpec::cyclic('A', 5), 8).unwrap();
        m.advance(10);
        m.suspend('A').unwrap();
        assert_eq!(fired(&mut m, 20), vec![]);
        m.resume('A', 20).unwrap();
        assert_eq!(fired(&mut m, 25), vec![('A', 25)]);
        assert_eq!(m.resume('A', 25), Err(AlarmError::NotSuspended('A')));
    }

    #[test]
    fn cancel_removes_for_good() {
        let mut m = M::new();
        m.register(AlarmSpec::cyclic('A', 5), 0).unwrap();
        m.cancel('A').unwrap();
        assert_eq!(fired(&mut m, 1_000), vec![]);
        m.register(AlarmSpec::one_shot('A', 1), 1_000).unwrap();
        assert_eq!(m.cancel('B'), Err(AlarmError::Unknown('B')));
    }

    #[test]
    fn ties_fire_in_entry_order() {
        let mut m = M::new();
        m.register(AlarmSpec::one_shot('B', 4), 0).unwrap();
        m.register(AlarmSpec::one_shot('A', 4), 0).unwrap();
        m.register(AlarmSpec::one_shot('C', 2), 2).unwrap();
        assert_eq!(fired(&mut m, 4), vec![('B', 4), ('A', 4), ('C', 4)]);
    }

    #[test]
    fn retain_cancels_the_rest() {
        let mut m = M::new();
        for id in ['A', 'B', 'C'] {
            m.register(AlarmSpec::cyclic(id, 3), 0).unwrap();
        }
        m.retain(|id| *id == 'B');
        assert_eq!(m.ids(), vec!['B']);
    }
}
