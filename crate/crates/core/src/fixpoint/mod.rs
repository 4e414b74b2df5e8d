//! Post-fixpoint computation for abstract transfer functions on a CFG.
//!
//! An iterator proposes a candidate solution and [`check_fxp`] validates it
//! using only the order and the transfer functions. A rejected candidate is
//! replaced by the constant top solution, so the result is sound whatever
//! the iterator does.

mod checker;
mod engine;
pub mod wto;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub use checker::{check_fxp, find_violation, FixpointViolation};
pub use engine::{Bourdoncle, FixpointEngine, IterationBudgetExceeded};

use crate::domain::AbstractDomain;
use crate::ir::{Instruction, NodeId};

pub type Graph = BTreeMap<NodeId, Instruction>;

/// One outgoing edge of a node with its abstract transformer.
pub struct Edge<'a, D> {
    pub target: NodeId,
    pub transform: Box<dyn Fn(&D) -> D + 'a>,
}

impl<'a, D> Edge<'a, D> {
    pub fn new(target: NodeId, f: impl Fn(&D) -> D + 'a) -> Self {
        Edge {
            target,
            transform: Box::new(f),
        }
    }
}

/// Abstract semantics of instructions as a list of edges.
pub trait Transfer<D> {
    fn edges<'s>(&'s self, node: NodeId, instr: &'s Instruction) -> Vec<Edge<'s, D>>;
}

/// Candidate solution. Nodes without a value read as top.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate<D> {
    values: BTreeMap<NodeId, D>,
}

impl<D: AbstractDomain> Candidate<D> {
    pub fn top() -> Self {
        Candidate { values: BTreeMap::new() }
    }

    pub fn from_values(values: BTreeMap<NodeId, D>) -> Self {
        Candidate { values }
    }

    pub fn get(&self, n: NodeId) -> D {
        self.values.get(&n).cloned().unwrap_or_else(D::top)
    }

    pub fn values(&self) -> &BTreeMap<NodeId, D> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut BTreeMap<NodeId, D> {
        &mut self.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// The iterator's candidate was validated.
    Checked,
    /// Validation failed; the result is the constant top solution.
    Rejected,
    /// The iterator gave up; the result is the constant top solution.
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<D> {
    pub values: Candidate<D>,
    pub status: SolveStatus,
}

/// Computes a post-fixpoint with `engine`, validated by the checker.
pub fn solve_pfp<D, T, E>(graph: &Graph, entry: NodeId, transfer: &T, init: &D, engine: &E) -> Solution<D>
where
    D: AbstractDomain,
    T: Transfer<D> + ?Sized,
    E: FixpointEngine<D> + ?Sized,
{
    match engine.fixpoint(graph, entry, transfer, init) {
        Ok(c) if check_fxp(graph, entry, transfer, init, &c) => Solution {
            values: c,
            status: SolveStatus::Checked,
        },
        Ok(_) => Solution {
            values: Candidate::top(),
            status: SolveStatus::Rejected,
        },
        Err(IterationBudgetExceeded) => Solution {
            values: Candidate::top(),
            status: SolveStatus::BudgetExceeded,
        },
    }
}
