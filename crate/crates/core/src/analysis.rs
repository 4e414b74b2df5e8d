//! Intraprocedural value analysis of whole programs, and a differential
//! check of its results against concrete executions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::marker::PhantomData;

use crate::concrete::{trace, Value};
use crate::domain::{Lifted, NotBot};
use crate::fixpoint::{solve_pfp, Bourdoncle, Edge, FixpointEngine, SolveStatus, Solution, Transfer};
use crate::intervals::{RangePair, SignFlag, SignedUnsigned};
use crate::ir::{CfgFunction, CfgProgram, Expr, Instruction, NodeId, VarId};
use crate::machine_int::{MachineInt, UnOp};
use crate::mem::{AbMem, MemDom};
use crate::num_env::NonRelEnv;

/// The state used by [`value_analysis`]: signed and unsigned intervals per
/// variable, plus variable kinds.
pub type DefaultState = AbMem<NonRelEnv<SignedUnsigned>>;

/// Abstract semantics of instructions over a [`MemDom`].
pub struct MemTransfer<M>(PhantomData<M>);

impl<M> Default for MemTransfer<M> {
    fn default() -> Self {
        MemTransfer(PhantomData)
    }
}

impl<M: MemDom + 'static> Transfer<M> for MemTransfer<M> {
    fn edges<'s>(&'s self, _node: NodeId, instr: &'s Instruction) -> Vec<Edge<'s, M>> {
        match instr {
            Instruction::Skip(l) => alloc::vec![Edge::new(*l, |d: &M| d.clone())],
            Instruction::Assign(x, e, l) => alloc::vec![Edge::new(*l, move |d: &M| d.assign(*x, e))],
            Instruction::Store(chunk, a, v, l) => {
                alloc::vec![Edge::new(*l, move |d: &M| d.store(*chunk, a, v))]
            }
            Instruction::If(e, t, f) => {
                let neg = Expr::unop(UnOp::NotBool, e.clone());
                alloc::vec![
                    Edge::new(*t, move |d: &M| d.assume(e)),
                    Edge::new(*f, move |d: &M| d.assume(&neg)),
                ]
            }
            Instruction::Call { dest, next, .. } => match dest {
                Some(x) => alloc::vec![Edge::new(*next, move |d: &M| d.forget(*x))],
                None => alloc::vec![Edge::new(*next, |d: &M| d.clone())],
            },
            Instruction::Return(_) => Vec::new(),
        }
    }
}

pub fn build_transfer<M: MemDom + 'static>() -> MemTransfer<M> {
    MemTransfer::default()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionResult<M> {
    pub solution: Solution<M>,
    pub variables: BTreeSet<VarId>,
}

impl<M: MemDom> FunctionResult<M> {
    pub fn state(&self, n: NodeId) -> M {
        self.solution.values.get(n)
    }

    pub fn status(&self) -> SolveStatus {
        self.solution.status
    }

    /// `false` when the analysis proved `n` unreachable.
    pub fn is_reachable(&self, n: NodeId) -> bool {
        !self.state(n).is_bottom()
    }

    /// Signed and unsigned ranges of `x` at `n`; `None` when `n` is
    /// unreachable.
    pub fn ranges(&self, n: NodeId, x: VarId) -> Option<RangePair> {
        let s = self.state(n);
        if s.is_bottom() {
            return None;
        }
        Some(RangePair {
            signed: s.range(x, SignFlag::Signed),
            unsigned: s.range(x, SignFlag::Unsigned),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisResult<M> {
    pub functions: BTreeMap<String, FunctionResult<M>>,
}

pub fn analyze_function<M, E>(f: &CfgFunction, engine: &E) -> FunctionResult<M>
where
    M: MemDom + 'static,
    E: FixpointEngine<M> + ?Sized,
{
    let transfer = build_transfer::<M>();
    FunctionResult {
        solution: solve_pfp(&f.graph, f.entry, &transfer, &M::top(), engine),
        variables: f.variables(),
    }
}

/// Analyzes every function of `p` with the given state and iterator.
pub fn value_analysis_with<M, E>(p: &CfgProgram, engine: &E) -> AnalysisResult<M>
where
    M: MemDom + 'static,
    E: FixpointEngine<M> + ?Sized,
{
    AnalysisResult {
        functions: p
            .functions
            .iter()
            .map(|(name, f)| (name.clone(), analyze_function(f, engine)))
            .collect(),
    }
}

pub fn value_analysis(p: &CfgProgram) -> AnalysisResult<DefaultState> {
    value_analysis_with(p, &Bourdoncle::default())
}

/// A concrete state the analysis result fails to cover.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub seed: usize,
    pub function: String,
    pub node: NodeId,
    /// `None` when the node itself was wrongly deemed unreachable.
    pub var: Option<VarId>,
    pub value: Option<MachineInt>,
    pub ranges: Option<RangePair>,
}

/// Runs `main` from each seed environment for at most `fuel` steps and
/// reports every state, in `main` or a callee, whose defined variables fall
/// outside the ranges computed at that node.
pub fn check_result_against_oracle<M: MemDom>(
    p: &CfgProgram,
    result: &AnalysisResult<M>,
    seeds: &[BTreeMap<VarId, Value>],
    fuel: usize,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let Some((main, _)) = p.main_function() else {
        return out;
    };
    for (seed, args) in seeds.iter().enumerate() {
        let t = trace(p, main, args, fuel);
        for st in &t.states {
            let Some(fr) = result.functions.get(&st.function) else {
                continue;
            };
            let abs = fr.state(st.pc);
            if abs.is_bottom() {
                out.push(Violation {
                    seed,
                    function: st.function.clone(),
                    node: st.pc,
                    var: None,
                    value: None,
                    ranges: None,
                });
                continue;
            }
            for (x, v) in &st.env {
                let Some(n) = v.numeric() else { continue };
                let ranges = RangePair {
                    signed: abs.range(*x, SignFlag::Signed),
                    unsigned: abs.range(*x, SignFlag::Unsigned),
                };
                if !ranges.contains(n) {
                    out.push(Violation {
                        seed,
                        function: st.function.clone(),
                        node: st.pc,
                        var: Some(*x),
                        value: Some(n),
                        ranges: Some(ranges),
                    });
                }
            }
        }
    }
    out
}

/// Analyzes `p` and checks the result against concrete runs.
pub fn check_against_oracle(p: &CfgProgram, seeds: &[BTreeMap<VarId, Value>], fuel: usize) -> Vec<Violation> {
    check_result_against_oracle(p, &value_analysis(p), seeds, fuel)
}

/// Whether the ranges of a variable describe at most 2^31 words in either
/// reading, the threshold for reporting it as bounded.
pub fn is_bounded(r: &RangePair) -> bool {
    let small = |l: &Lifted<crate::intervals::Interval>| match l {
        NotBot(i) => i.count() <= 1 << 31,
        _ => true,
    };
    small(&r.signed) || small(&r.unsigned)
}

impl<M: MemDom> AnalysisResult<M> {
    pub fn function(&self, name: &str) -> Option<&FunctionResult<M>> {
        self.functions.get(name)
    }

    /// Whether every function's candidate was validated.
    pub fn all_checked(&self) -> bool {
        self.functions.values().all(|f| f.status() == SolveStatus::Checked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::Interval;
    use crate::machine_int::{BinOp, Comparison, MAX_SIGNED};

    fn program(graph: Vec<(u32, Instruction)>, params: Vec<u32>) -> CfgProgram {
        let mut f = CfgFunction::new(NodeId(graph[0].0));
        f.params = params.into_iter().map(VarId).collect();
        f.graph = graph.into_iter().map(|(n, i)| (NodeId(n), i)).collect();
        let mut p = CfgProgram::default();
        p.functions.insert("main".into(), f);
        p
    }

    fn signed(r: &FunctionResult<DefaultState>, n: u32, x: u32) -> Interval {
        r.ranges(NodeId(n), VarId(x)).unwrap().signed.unwrap()
    }

    fn unsigned(r: &FunctionResult<DefaultState>, n: u32, x: u32) -> Interval {
        r.ranges(NodeId(n), VarId(x)).unwrap().unsigned.unwrap()
    }

    /// `i = 0; while (i < 10) i = i + 1;`
    fn counted_loop() -> CfgProgram {
        let i = 1;
        program(
            alloc::vec![
                (1, Instruction::Assign(VarId(i), Expr::int(0), NodeId(2))),
                (
                    2,
                    Instruction::If(
                        Expr::binop(BinOp::Cmp(Comparison::Lt), Expr::var(i), Expr::int(10)),
                        NodeId(3),
                        NodeId(4),
                    ),
                ),
                (
                    3,
                    Instruction::Assign(VarId(i), Expr::binop(BinOp::Add, Expr::var(i), Expr::int(1)), NodeId(2)),
                ),
                (4, Instruction::Return(Some(Expr::var(i)))),
            ],
            alloc::vec![],
        )
    }

    #[test]
    fn counted_loop_ranges() {
        let res = value_analysis(&counted_loop());
        let f = res.function("main").unwrap();
        assert_eq!(f.status(), SolveStatus::Checked);
        assert_eq!(signed(f, 2, 1), Interval::new(0, 10));
        assert_eq!(signed(f, 3, 1), Interval::new(0, 9));
        assert_eq!(signed(f, 4, 1), Interval::new(10, 10));
        assert_eq!(unsigned(f, 4, 1), Interval::new(10, 10));
    }

    /// Two independent choices feed `u` and `s`.
    #[test]
    fn signed_and_unsigned_choices() {
        let (c1, c2, u, s) = (1, 2, 3, 4);
        let p = program(
            alloc::vec![
                (1, Instruction::If(Expr::var(c1), NodeId(2), NodeId(3))),
                (2, Instruction::Assign(VarId(u), Expr::int(MAX_SIGNED), NodeId(4))),
                (3, Instruction::Assign(VarId(u), Expr::int(MAX_SIGNED + 1), NodeId(4))),
                (4, Instruction::If(Expr::var(c2), NodeId(5), NodeId(6))),
                (5, Instruction::Assign(VarId(s), Expr::int(0), NodeId(7))),
                (6, Instruction::Assign(VarId(s), Expr::int(-1), NodeId(7))),
                (
                    7,
                    Instruction::Return(Some(Expr::binop(BinOp::Add, Expr::var(u), Expr::var(s)))),
                ),
            ],
            alloc::vec![c1, c2],
        );
        let res = value_analysis(&p);
        let f = res.function("main").unwrap();
        assert_eq!(unsigned(f, 7, u), Interval::new(MAX_SIGNED, MAX_SIGNED + 1));
        assert_eq!(signed(f, 7, u), Interval::top(SignFlag::Signed));
        assert_eq!(signed(f, 7, s), Interval::new(-1, 0));
    }

    #[test]
    fn unreachable_branch_is_bottom() {
        let p = program(
            alloc::vec![
                (1, Instruction::Assign(VarId(1), Expr::int(3), NodeId(2))),
                (
                    2,
                    Instruction::If(
                        Expr::binop(BinOp::Cmp(Comparison::Gt), Expr::var(1), Expr::int(5)),
                        NodeId(3),
                        NodeId(4),
                    ),
                ),
                (3, Instruction::Return(None)),
                (4, Instruction::Return(None)),
            ],
            alloc::vec![],
        );
        let res = value_analysis(&p);
        let f = res.function("main").unwrap();
        assert!(!f.is_reachable(NodeId(3)));
        assert!(f.is_reachable(NodeId(4)));
    }

    #[test]
    fn oracle_finds_no_violation_on_loop() {
        let p = counted_loop();
        assert!(check_against_oracle(&p, &[BTreeMap::new()], 100).is_empty());
    }

    #[test]
    fn bounded_rule() {
        let pair = |a, b| RangePair {
            signed: NotBot(Interval::new(a, b)),
            unsigned: NotBot(Interval::top(SignFlag::Unsigned)),
        };
        assert!(!is_bounded(&pair(-(1 << 31), (1 << 31) - 2)));
        assert!(is_bounded(&pair(0, 9)));
        assert!(is_bounded(&pair(-(1 << 30), (1 << 30) - 1)));
        assert!(!is_bounded(&pair(-(1 << 30), 1 << 30)));
    }
}
