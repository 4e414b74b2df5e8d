#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;

use cfgval::core::analysis::{build_transfer, AnalysisResult, DefaultState};
use cfgval::core::concrete::Value;
use cfgval::core::domain::{AbstractDomain, Bottom, Lifted, LiftedMeet, NotBot};
use cfgval::core::fixpoint::{Candidate, FixpointEngine, Graph, IterationBudgetExceeded, Transfer};
use cfgval::core::intervals::{Interval, NumDom, SignFlag, SignedItv, SignedUnsigned, UnsignedItv};
use cfgval::core::ir::{CfgFunction, CfgProgram, NodeId, VarId};
use cfgval::core::mem::{AbMem, MemDom};
use cfgval::gen::random_args;

/// An iterator that answers bottom everywhere, even at the entry.
pub struct GarbageEngine;

impl<D: AbstractDomain + Bottom> FixpointEngine<D> for GarbageEngine {
    fn fixpoint<T: Transfer<D> + ?Sized>(
        &self,
        graph: &Graph,
        _entry: NodeId,
        _transfer: &T,
        _init: &D,
    ) -> Result<Candidate<D>, IterationBudgetExceeded> {
        Ok(Candidate::from_values(graph.keys().map(|n| (*n, D::bottom())).collect()))
    }
}

pub fn seeds<R: Rng>(rng: &mut R, p: &CfgProgram, n: usize) -> Vec<BTreeMap<VarId, Value>> {
    let (_, main) = p.main_function().expect("program has a main function");
    (0..n).map(|_| random_args(rng, main)).collect()
}

fn within(a: &Lifted<Interval>, b: &Lifted<Interval>) -> bool {
    match (a, b) {
        (Lifted::Bot, _) => true,
        (NotBot(_), Lifted::Bot) => false,
        (NotBot(a), NotBot(b)) => b.min <= a.min && a.max <= b.max,
    }
}

/// Whether every variable's ranges in `a` lie within those in `b`, and
/// the kinds of `a` are below those of `b`.
fn state_within(f: &CfgFunction, a: &DefaultState, b: &DefaultState) -> bool {
    if a.is_bottom() {
        return true;
    }
    if b.is_bottom() || !a.types().le(b.types()) {
        return false;
    }
    f.variables().into_iter().all(|x| {
        [SignFlag::Signed, SignFlag::Unsigned]
            .into_iter()
            .all(|flag| within(&a.range(x, flag), &b.range(x, flag)))
    })
}

/// Re-checks the post-fixpoint inequalities of `cand` variable by variable,
/// without the domain order.
pub fn brute_recheck(f: &CfgFunction, cand: &Candidate<DefaultState>) -> bool {
    let transfer = build_transfer::<DefaultState>();
    if !state_within(f, &DefaultState::top(), &cand.get(f.entry)) {
        return false;
    }
    f.graph.iter().all(|(&pc, instr)| {
        let here = cand.get(pc);
        transfer
            .edges(pc, instr)
            .into_iter()
            .all(|e| state_within(f, &(e.transform)(&here), &cand.get(e.target)))
    })
}

/// A state strictly below `s`: either bottom, or `s` with one variable
/// restricted to a strict sub-interval of one of its ranges.
pub fn shrink<R: Rng>(rng: &mut R, f: &CfgFunction, s: &DefaultState) -> Option<DefaultState> {
    if s.is_bottom() {
        return None;
    }
    if rng.gen_bool(0.2) {
        return Some(DefaultState::bottom());
    }
    let x = f.variables().into_iter().choose(rng)?;
    let NotBot(v) = s.num().get(&x) else { return None };
    let flag = *[SignFlag::Signed, SignFlag::Unsigned].choose(rng).unwrap();
    let NotBot(r) = v.range(flag) else { return None };
    if r.min == r.max {
        return Some(DefaultState::bottom());
    }
    let (lo, hi) = match rng.gen_range(0..3) {
        0 => (r.min + 1, r.max),
        1 => (r.min, r.max - 1),
        _ => {
            let lo = rng.gen_range(r.min..r.max);
            (lo, rng.gen_range(lo..r.max))
        }
    };
    let restriction = match flag {
        SignFlag::Signed => SignedUnsigned::reduced(NotBot(SignedItv::new(lo, hi)), NotBot(UnsignedItv::top())),
        SignFlag::Unsigned => SignedUnsigned::reduced(NotBot(SignedItv::top()), NotBot(UnsignedItv::new(lo, hi))),
    };
    let smaller = restriction.and_then(|c| v.meet_lifted(&c));
    let out = AbMem::new(s.num().set(x, smaller), s.types().clone());
    debug_assert!(out.le(s) && out != *s);
    Some(out)
}

/// Replaces the value of `function` at `node` in a copy of `res`.
pub fn with_state(
    res: &AnalysisResult<DefaultState>,
    function: &str,
    node: NodeId,
    s: DefaultState,
) -> AnalysisResult<DefaultState> {
    let mut out = res.clone();
    let fr = out.functions.get_mut(function).expect("function analyzed");
    fr.solution.values.values_mut().insert(node, s);
    out
}

/// Ranges of one variable as `(signed, unsigned)` bounds.
pub fn bounds(res: &AnalysisResult<DefaultState>, function: &str, node: u32, x: u32) -> Option<((i64, i64), (i64, i64))> {
    let r = res.function(function)?.ranges(NodeId(node), VarId(x))?;
    match (r.signed, r.unsigned) {
        (NotBot(s), NotBot(u)) => Some(((s.min, s.max), (u.min, u.max))),
        _ => None,
    }
}
