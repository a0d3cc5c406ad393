use crate::types::{NodeId, NodeSet};

use super::AgentError;

/// Picks the next coordinator: the first node after `failed` (modulo `n`)
/// that is still in `operational`.
///
/// Every survivor holding the same operational set computes the same answer.
pub fn elect_successor(operational: NodeSet, failed: NodeId, n: usize) -> Result<NodeId, AgentError> {
    let candidates = operational.without(failed);
    (1..=n as u32)
        .map(|offset| NodeId((failed.0 + offset) % n as u32))
        .find(|c| candidates.contains(*c))
        .ok_or(AgentError::NoSurvivor(failed))
}

/// The unconditional rule: the node right after `failed`, modulo `n`.
pub fn elect_naive(failed: NodeId, n: usize) -> NodeId {
    NodeId((failed.0 + 1) % n as u32)
}

/// Total order on coordinator claims `(epoch, coordinator)`: later epochs
/// win, and within an epoch the lower node label wins.
pub fn claim_dominates(claim: (u64, NodeId), other: (u64, NodeId)) -> bool {
    claim.0 > other.0 || (claim.0 == other.0 && claim.1 < other.1)
}
