//! Bourdoncle's recursive iteration strategy with delayed widening and a
//! few decreasing sweeps. Its output is not trusted.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::wto::{compute_wto, WtoElement};
use super::{Candidate, Edge, Graph, Transfer};
use crate::domain::{AbstractDomain, Bottom, Meet};
use crate::ir::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationBudgetExceeded;

/// Produces a candidate post-fixpoint.
pub trait FixpointEngine<D> {
    fn fixpoint<T: Transfer<D> + ?Sized>(
        &self,
        graph: &Graph,
        entry: NodeId,
        transfer: &T,
        init: &D,
    ) -> Result<Candidate<D>, IterationBudgetExceeded>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bourdoncle {
    /// Number of plain joins at a loop head before widening kicks in.
    pub widening_delay: usize,
    pub narrowing_sweeps: usize,
    /// Iterations allowed for one stabilization of one component.
    pub max_iterations: usize,
}

impl Default for Bourdoncle {
    fn default() -> Self {
        Bourdoncle {
            widening_delay: 2,
            narrowing_sweeps: 2,
            max_iterations: 10_000,
        }
    }
}

struct Run<'a, D> {
    engine: &'a Bourdoncle,
    index: BTreeMap<NodeId, usize>,
    entry: Option<usize>,
    init: &'a D,
    /// Incoming edges: (source, position in the source's edge list).
    preds: Vec<Vec<(usize, usize)>>,
    edges: Vec<Vec<Edge<'a, D>>>,
    values: Vec<D>,
}

impl<D: AbstractDomain + Bottom + Meet> Run<'_, D> {
    fn incoming(&self, i: usize) -> D {
        let mut acc = if Some(i) == self.entry { self.init.clone() } else { D::bottom() };
        for &(p, k) in &self.preds[i] {
            let v = &self.values[p];
            if v.is_bottom() {
                continue;
            }
            acc = acc.join(&(self.edges[p][k].transform)(v));
        }
        acc
    }

    fn elements(&mut self, es: &[WtoElement]) -> Result<(), IterationBudgetExceeded> {
        for e in es {
            match e {
                WtoElement::Vertex(n) => {
                    let i = self.index[n];
                    self.values[i] = self.incoming(i);
                }
                WtoElement::Component(h, body) => self.component(self.index[h], body)?,
            }
        }
        Ok(())
    }

    fn component(&mut self, h: usize, body: &[WtoElement]) -> Result<(), IterationBudgetExceeded> {
        self.values[h] = self.incoming(h);
        let mut round = 0;
        loop {
            self.elements(body)?;
            let next = self.incoming(h);
            if next.le(&self.values[h]) {
                return Ok(());
            }
            round += 1;
            if round > self.engine.max_iterations {
                return Err(IterationBudgetExceeded);
            }
            self.values[h] = if round <= self.engine.widening_delay {
                self.values[h].join(&next)
            } else {
                self.values[h].widen(&next)
            };
        }
    }
}

impl<D: AbstractDomain + Bottom + Meet> FixpointEngine<D> for Bourdoncle {
    fn fixpoint<T: Transfer<D> + ?Sized>(
        &self,
        graph: &Graph,
        entry: NodeId,
        transfer: &T,
        init: &D,
    ) -> Result<Candidate<D>, IterationBudgetExceeded> {
        let nodes: Vec<NodeId> = graph.keys().copied().collect();
        let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let edges: Vec<Vec<Edge<'_, D>>> = graph.iter().map(|(n, instr)| transfer.edges(*n, instr)).collect();
        let mut preds = alloc::vec![Vec::new(); nodes.len()];
        for (p, es) in edges.iter().enumerate() {
            for (k, e) in es.iter().enumerate() {
                if let Some(&t) = index.get(&e.target) {
                    preds[t].push((p, k));
                }
            }
        }
        let wto = compute_wto(&nodes, entry, |n| {
            edges[index[&n]].iter().map(|e| e.target).collect()
        });
        let mut run = Run {
            engine: self,
            entry: index.get(&entry).copied(),
            index,
            init,
            preds,
            edges,
            values: alloc::vec![D::bottom(); nodes.len()],
        };
        run.elements(&wto.0)?;
        let order = wto.flatten();
        for _ in 0..self.narrowing_sweeps {
            for n in &order {
                let i = run.index[n];
                let next = run.incoming(i);
                run.values[i] = run.values[i].meet(&next);
            }
        }
        Ok(Candidate::from_values(nodes.into_iter().zip(run.values).collect()))
    }
}
