use std::collections::{BTreeMap, BTreeSet};

use cfgval_core::concrete::{eval_expr, initial_state, normalize, step, BlockId, Value};
use cfgval_core::domain::{AbstractDomain, Bottom, Gamma, NotBot};
use cfgval_core::fixpoint::wto::compute_wto;
use cfgval_core::intervals::{NumDom, SignFlag, SignedUnsigned};
use cfgval_core::ir::{CfgFunction, CfgProgram, Constant, Expr, Instruction, MemChunk, NodeId, VarId};
use cfgval_core::machine_int::{BinOp, MachineInt, UnOp, MAX_SIGNED, MIN_SIGNED};
use cfgval_core::mem::{convert, kind_of, Kind, TypeInfo};
use cfgval_core::num_env::{assume_passes, backward_expr, eval_nexpr, IntDom, NExpr, NonRelEnv};
use proptest::prelude::*;

type Env = NonRelEnv<SignedUnsigned>;
type Rho = BTreeMap<VarId, MachineInt>;

const NVARS: u32 = 3;

fn word() -> impl Strategy<Value = MachineInt> {
    let near = prop_oneof![
        Just(0i64),
        Just(MAX_SIGNED),
        Just(MIN_SIGNED),
        Just((1 << 32) - 1),
        Just(100),
    ];
    prop_oneof![
        3 => (near, -8i64..8).prop_map(|(c, d)| MachineInt::from_i64(c + d)),
        1 => any::<u32>().prop_map(MachineInt::from_bits),
    ]
}

fn binop() -> impl Strategy<Value = BinOp> {
    proptest::sample::select(BinOp::all().collect::<Vec<_>>())
}

fn nexpr() -> impl Strategy<Value = NExpr> {
    let leaf = prop_oneof![
        (0..NVARS).prop_map(NExpr::var),
        word().prop_map(NExpr::Const),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            1 => (proptest::sample::select(UnOp::ALL.to_vec()), inner.clone()).prop_map(|(op, e)| NExpr::unop(op, e)),
            3 => (binop(), inner.clone(), inner.clone()).prop_map(|(op, a, b)| NExpr::binop(op, a, b)),
            1 => (inner.clone(), inner.clone(), inner).prop_map(|(g, a, b)| NExpr::cond(g, a, b)),
        ]
    })
}

/// A concrete environment together with an abstract one containing it.
/// Each variable is abstracted by the hull of its value and a nearby word,
/// or left unbound.
fn env_and_rho() -> impl Strategy<Value = (Env, Rho)> {
    proptest::collection::vec((word(), prop::option::of(-20i64..20)), NVARS as usize).prop_map(|vs| {
        let mut env = Env::top();
        let mut rho = Rho::new();
        for (i, (v, spread)) in vs.into_iter().enumerate() {
            let x = VarId(i as u32);
            rho.insert(x, v);
            if let Some(d) = spread {
                let other = MachineInt::from_i64(v.signed() + d);
                let a = SignedUnsigned::constant(v).join(&SignedUnsigned::constant(other));
                env = env.set(x, NotBot(a));
            }
        }
        (env, rho)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn range_contains_the_value((env, rho) in env_and_rho(), e in nexpr()) {
        prop_assert!(env.gamma(&rho));
        if let Some(v) = eval_nexpr(&rho, &e) {
            for flag in [SignFlag::Signed, SignFlag::Unsigned] {
                let r = env.range(&e, flag);
                prop_assert!(matches!(r, NotBot(i) if i.contains(flag.read(v))), "{e:?} {flag:?} {r:?} {v:?}");
            }
        }
    }

    #[test]
    fn assign_is_sound((env, rho) in env_and_rho(), e in nexpr(), x in 0..NVARS) {
        if let Some(v) = eval_nexpr(&rho, &e) {
            let mut after = rho.clone();
            after.insert(VarId(x), v);
            prop_assert!(env.assign(VarId(x), &e).gamma(&after));
        }
        let mut any = rho.clone();
        any.insert(VarId(x), MachineInt::from_i64(12345));
        prop_assert!(env.forget(VarId(x)).gamma(&any));
    }

    #[test]
    fn assume_keeps_satisfying_states((env, rho) in env_and_rho(), e in nexpr()) {
        let guard = NExpr::unop(UnOp::BoolVal, e);
        let refined = env.assume(&guard);
        prop_assert!(refined.le(&env));
        for e in [&guard, &NExpr::unop(UnOp::NotBool, guard.clone())] {
            let refined = env.assume(e);
            if eval_nexpr(&rho, e) == Some(MachineInt::ONE) {
            prop_assert!(refined.gamma(&rho), "{e:?} refined {env:?} to {refined:?}, losing {rho:?}");
                prop_assert!(assume_passes(e, &env, 1).gamma(&rho));
            }
        }
    }

    #[test]
    fn backward_expr_only_shrinks((env, rho) in env_and_rho(), e in nexpr(), z in word(), w in 0i64..4) {
        let expected = SignedUnsigned::constant(z).join(&SignedUnsigned::constant(MachineInt::from_i64(z.signed() + w)));
        let out = backward_expr(&e, &env, &expected);
        prop_assert!(out.le(&env));
        if matches!(eval_nexpr(&rho, &e), Some(v) if expected.gamma(&v)) {
            prop_assert!(out.gamma(&rho));
        }
    }

    #[test]
    fn bottom_is_absorbing(e in nexpr(), x in 0..NVARS) {
        prop_assert!(Env::bottom().assign(VarId(x), &e).is_bottom());
        prop_assert!(Env::bottom().assume(&e).is_bottom());
    }
}

fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        3 => word().prop_map(Value::Int),
        1 => word().prop_map(|o| Value::Ptr(BlockId(0), o)),
        1 => Just(Value::Undef),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => (0..NVARS).prop_map(Expr::var),
        2 => word().prop_map(|n| Expr::Const(Constant::Int(n))),
        1 => (0u32..8).prop_map(|n| Expr::Const(Constant::AddrStack(MachineInt::from_bits(n)))),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            1 => (proptest::sample::select(UnOp::ALL.to_vec()), inner.clone()).prop_map(|(op, e)| Expr::unop(op, e)),
            3 => (binop(), inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::binop(op, a, b)),
            1 => (inner.clone(), inner.clone(), inner).prop_map(|(g, a, b)| Expr::Cond(Box::new(g), Box::new(a), Box::new(b))),
        ]
    })
}

fn program_with_params() -> CfgProgram {
    let mut f = CfgFunction::new(NodeId(1));
    f.params = (0..NVARS).map(VarId).collect();
    f.stacksize = 8;
    f.graph.insert(NodeId(1), Instruction::Return(None));
    let mut p = CfgProgram::default();
    p.functions.insert("main".into(), f);
    p
}

fn kind_for(v: Value, known: bool) -> Kind {
    match (v, known) {
        (_, false) => Kind::Top,
        (Value::Ptr(..), true) => Kind::Ptr,
        (_, true) => Kind::Int,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    /// A converted expression computes the integer, or the pointer offset,
    /// of the original.
    #[test]
    fn convert_preserves_numeric_values(
        vals in proptest::collection::vec((value(), any::<bool>()), NVARS as usize),
        e in expr(),
    ) {
        let p = program_with_params();
        let mut args = BTreeMap::new();
        let mut tp = TypeInfo::default();
        let state0 = initial_state(&p, "main", &BTreeMap::new()).unwrap();
        for (i, (v, known)) in vals.iter().enumerate() {
            // Pointers to the frame, so they share a block with AddrStack.
            let v = match *v {
                Value::Ptr(_, o) => Value::Ptr(state0.stack_block, o),
                v => v,
            };
            args.insert(VarId(i as u32), v);
            tp = tp.set(VarId(i as u32), kind_for(v, *known));
        }
        let state = initial_state(&p, "main", &args).unwrap();
        prop_assert!(tp.contains(&state.env));
        let Ok(v) = eval_expr(&state, &e) else { return Ok(()) };
        prop_assert!(kind_of(&tp, &e).contains(&v), "kind of {e:?} excludes {v:?}");
        if let (Some(ne), Some(n)) = (convert(&tp, &e), v.numeric()) {
            let rho: Rho = state.env.iter().filter_map(|(x, v)| v.numeric().map(|n| (*x, n))).collect();
            prop_assert_eq!(eval_nexpr(&rho, &ne), Some(n), "{:?} converted to {:?}", e, ne);
        }
    }

    #[test]
    fn store_then_load_normalizes(chunk in proptest::sample::select(MemChunk::ALL.to_vec()), v in value(), ofs in 0u32..4) {
        let p = program_with_params();
        let mut s = initial_state(&p, "main", &BTreeMap::new()).unwrap();
        let v = match v {
            Value::Ptr(_, o) => Value::Ptr(s.stack_block, o),
            v => v,
        };
        let ofs = MachineInt::from_bits(ofs);
        let b = s.stack_block;
        s.mem.store(chunk, b, ofs, v).unwrap();
        prop_assert_eq!(s.mem.load(chunk, b, ofs).unwrap(), normalize(chunk, v));
        for other in MemChunk::ALL {
            if other != chunk {
                prop_assert_eq!(s.mem.load(other, b, ofs).unwrap(), Value::Undef);
            }
        }
    }

    #[test]
    fn step_is_deterministic(args in proptest::collection::vec(value(), NVARS as usize), e in expr()) {
        let mut f = CfgFunction::new(NodeId(1));
        f.params = (0..NVARS).map(VarId).collect();
        f.stacksize = 8;
        f.graph.insert(NodeId(1), Instruction::Assign(VarId(0), e.clone(), NodeId(2)));
        f.graph.insert(NodeId(2), Instruction::If(e, NodeId(1), NodeId(3)));
        f.graph.insert(NodeId(3), Instruction::Return(Some(Expr::var(0))));
        let mut p = CfgProgram::default();
        p.functions.insert("main".into(), f);
        let args: BTreeMap<VarId, Value> = args.into_iter().enumerate().map(|(i, v)| (VarId(i as u32), v)).collect();
        let mut s = initial_state(&p, "main", &args).unwrap();
        for _ in 0..6 {
            let (a, b) = (step(&s, &p), step(&s, &p));
            prop_assert_eq!(&a, &b);
            match a {
                cfgval_core::concrete::Step::Next(n) => s = n,
                _ => break,
            }
        }
    }

    /// Every node appears once in the ordering, and every edge from a
    /// reachable node going backwards in it targets a component head.
    #[test]
    fn wto_lists_each_node_once(n in 1u32..14, edges in proptest::collection::vec((1u32..14, 1u32..14), 0..30)) {
        let nodes: Vec<NodeId> = (1..=n).map(NodeId).collect();
        let edges: Vec<(u32, u32)> = edges.into_iter().filter(|&(a, b)| a <= n && b <= n).collect();
        let succ = |v: NodeId| edges.iter().filter(|e| e.0 == v.0).map(|e| NodeId(e.1)).collect::<Vec<_>>();
        let wto = compute_wto(&nodes, NodeId(1), &succ);
        let mut reachable = BTreeSet::from([NodeId(1)]);
        let mut stack = vec![NodeId(1)];
        while let Some(v) = stack.pop() {
            for w in succ(v) {
                if reachable.insert(w) {
                    stack.push(w);
                }
            }
        }
        let flat = wto.flatten();
        prop_assert_eq!(flat.len(), nodes.len());
        prop_assert_eq!(flat.iter().copied().collect::<BTreeSet<_>>(), nodes.iter().copied().collect());
        prop_assert_eq!(flat[0], NodeId(1));
        let pos: BTreeMap<NodeId, usize> = flat.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let heads = wto.heads();
        for &(a, b) in &edges {
            if reachable.contains(&NodeId(a)) && pos[&NodeId(b)] <= pos[&NodeId(a)] {
                prop_assert!(heads.contains(&NodeId(b)), "edge {a}->{b} in {wto}");
            }
        }
    }
}
