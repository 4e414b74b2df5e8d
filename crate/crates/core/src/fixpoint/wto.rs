//! Weak topological orderings, computed by recursive decomposition into
//! strongly connected components.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::ir::NodeId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WtoElement {
    Vertex(NodeId),
    /// A head and the ordering of the rest of its component.
    Component(NodeId, Vec<WtoElement>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Wto(pub Vec<WtoElement>);

impl Wto {
    /// Every node in order, heads before their bodies.
    pub fn flatten(&self) -> Vec<NodeId> {
        fn go(es: &[WtoElement], out: &mut Vec<NodeId>) {
            for e in es {
                match e {
                    WtoElement::Vertex(n) => out.push(*n),
                    WtoElement::Component(h, body) => {
                        out.push(*h);
                        go(body, out)
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(&self.0, &mut out);
        out
    }

    pub fn heads(&self) -> BTreeSet<NodeId> {
        fn go(es: &[WtoElement], out: &mut BTreeSet<NodeId>) {
            for e in es {
                if let WtoElement::Component(h, body) = e {
                    out.insert(*h);
                    go(body, out)
                }
            }
        }
        let mut out = BTreeSet::new();
        go(&self.0, &mut out);
        out
    }
}

impl fmt::Display for Wto {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(es: &[WtoElement], f: &mut fmt::Formatter<'_>) -> fmt::Result {
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                match e {
                    WtoElement::Vertex(n) => write!(f, "{n}")?,
                    WtoElement::Component(h, body) => {
                        write!(f, "({h}")?;
                        if !body.is_empty() {
                            f.write_str(" ")?;
                            go(body, f)?;
                        }
                        f.write_str(")")?;
                    }
                }
            }
            Ok(())
        }
        go(&self.0, f)
    }
}

/// Graph in dense form: `succ[i]` lists the indices of the successors of `i`.
struct Dense<'a> {
    succ: &'a [Vec<usize>],
    ids: &'a [NodeId],
}

impl Dense<'_> {
    /// Orders the subgraph induced by `members`, exploring from `roots`
    /// first. Edges into `members`-external nodes are ignored.
    fn decompose(&self, members: &[usize], roots: &[usize], in_set: &mut [bool]) -> Vec<WtoElement> {
        for &m in members {
            in_set[m] = true;
        }
        let sccs = self.tarjan(members, roots, in_set);
        for &m in members {
            in_set[m] = false;
        }
        let mut out = Vec::new();
        for scc in sccs.into_iter().rev() {
            let head = scc[0];
            let self_loop = self.succ[head].contains(&head);
            if scc.len() == 1 && !self_loop {
                out.push(WtoElement::Vertex(self.ids[head]));
                continue;
            }
            let body: Vec<usize> = scc[1..].to_vec();
            let body_roots: Vec<usize> = self.succ[head].iter().copied().filter(|s| body.contains(s)).collect();
            let inner = self.decompose(&body, &body_roots, in_set);
            out.push(WtoElement::Component(self.ids[head], inner));
        }
        out
    }

    /// Iterative Tarjan. Returns components in reverse topological order,
    /// each listing its first-discovered node first.
    fn tarjan(&self, members: &[usize], roots: &[usize], in_set: &[bool]) -> Vec<Vec<usize>> {
        let mut index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut low: BTreeMap<usize, usize> = BTreeMap::new();
        let mut on_stack: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut sccs = Vec::new();
        let mut counter = 0;

        for &root in roots.iter().chain(members.iter()) {
            if index.contains_key(&root) {
                continue;
            }
            // (node, next successor position)
            let mut call: Vec<(usize, usize)> = alloc::vec![(root, 0)];
            index.insert(root, counter);
            low.insert(root, counter);
            counter += 1;
            stack.push(root);
            on_stack.insert(root);
            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                let succs = &self.succ[v];
                if *pos < succs.len() {
                    let w = succs[*pos];
                    *pos += 1;
                    if !in_set[w] {
                        continue;
                    }
                    if !index.contains_key(&w) {
                        index.insert(w, counter);
                        low.insert(w, counter);
                        counter += 1;
                        stack.push(w);
                        on_stack.insert(w);
                        call.push((w, 0));
                    } else if on_stack.contains(&w) {
                        let lw = index[&w];
                        let lv = low.get_mut(&v).unwrap();
                        *lv = (*lv).min(lw);
                    }
                    continue;
                }
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    let lv = low[&v];
                    let lp = low.get_mut(&parent).unwrap();
                    *lp = (*lp).min(lv);
                }
                if low[&v] == index[&v] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack.remove(&w);
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    scc.reverse();
                    sccs.push(scc);
                }
            }
        }
        sccs
    }
}

/// Weak topological ordering of the nodes reachable from `entry`, followed
/// by the unreachable nodes as plain vertices.
pub fn compute_wto(nodes: &[NodeId], entry: NodeId, succ: impl Fn(NodeId) -> Vec<NodeId>) -> Wto {
    let pos: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let dense: Vec<Vec<usize>> = nodes
        .iter()
        .map(|n| succ(*n).iter().filter_map(|s| pos.get(s).copied()).collect())
        .collect();
    let Some(&root) = pos.get(&entry) else {
        return Wto(nodes.iter().map(|n| WtoElement::Vertex(*n)).collect());
    };

    let mut reached = alloc::vec![false; nodes.len()];
    let mut todo = alloc::vec![root];
    reached[root] = true;
    while let Some(v) = todo.pop() {
        for &w in &dense[v] {
            if !reached[w] {
                reached[w] = true;
                todo.push(w);
            }
        }
    }
    let members: Vec<usize> = (0..nodes.len()).filter(|&i| reached[i]).collect();
    let g = Dense { succ: &dense, ids: nodes };
    let mut in_set = alloc::vec![false; nodes.len()];
    let mut out = g.decompose(&members, &[root], &mut in_set);
    out.extend((0..nodes.len()).filter(|&i| !reached[i]).map(|i| WtoElement::Vertex(nodes[i])));
    Wto(out)
}
