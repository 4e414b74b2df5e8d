//! Validation of candidate post-fixpoints. Uses only `le` and the transfer
//! functions, never the iteration strategy.

use super::{Candidate, Graph, Transfer};
use crate::domain::AbstractDomain;
use crate::ir::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixpointViolation {
    /// The initial value is not below the entry's value.
    Entry,
    /// The transformer of the edge `from -> to` escapes the value at `to`.
    Edge { from: NodeId, to: NodeId },
}

pub fn find_violation<D, T>(
    graph: &Graph,
    entry: NodeId,
    transfer: &T,
    init: &D,
    fxp: &Candidate<D>,
) -> Option<FixpointViolation>
where
    D: AbstractDomain,
    T: Transfer<D> + ?Sized,
{
    if !init.le(&fxp.get(entry)) {
        return Some(FixpointViolation::Entry);
    }
    for (&pc, instr) in graph {
        let here = fxp.get(pc);
        for edge in transfer.edges(pc, instr) {
            if !(edge.transform)(&here).le(&fxp.get(edge.target)) {
                return Some(FixpointViolation::Edge { from: pc, to: edge.target });
            }
        }
    }
    None
}

/// Whether `fxp` is a post-fixpoint of `transfer` above `init` at `entry`.
pub fn check_fxp<D, T>(graph: &Graph, entry: NodeId, transfer: &T, init: &D, fxp: &Candidate<D>) -> bool
where
    D: AbstractDomain,
    T: Transfer<D> + ?Sized,
{
    find_violation(graph, entry, transfer, init, fxp).is_none()
}
