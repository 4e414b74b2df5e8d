//! Numerical expressions and non-relational abstract environments.
//!
//! [`NonRelEnv`] lifts any [`NumDom`] to environments mapping variables to
//! abstract values, with forward evaluation of expressions, a backward
//! analysis that refines variables from an expected expression value, and
//! the `assign` / `assume` / `range` operations of an [`IntDom`].

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::domain::{AbstractDomain, Bot, Bottom, Lifted, Meet, NotBot, ReducedMap};
use crate::intervals::{Interval, NumDom, SignFlag};
use crate::ir::VarId;
use crate::machine_int::{eval_binop, eval_unop, BinOp, MachineInt, UnOp};

pub const NTRUE: MachineInt = MachineInt::ONE;
pub const NFALSE: MachineInt = MachineInt::ZERO;

/// Upper bound on backward passes performed by `assume`.
pub const MAX_ASSUME_PASSES: usize = 16;

/// Side-effect free integer expressions over local variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NExpr {
    Var(VarId),
    Const(MachineInt),
    Unop(UnOp, Box<NExpr>),
    Binop(BinOp, Box<NExpr>, Box<NExpr>),
    Cond(Box<NExpr>, Box<NExpr>, Box<NExpr>),
}

impl NExpr {
    pub fn var(x: u32) -> NExpr {
        NExpr::Var(VarId(x))
    }

    pub fn int(n: i64) -> NExpr {
        NExpr::Const(MachineInt::from_i64(n))
    }

    pub fn unop(op: UnOp, e: NExpr) -> NExpr {
        NExpr::Unop(op, Box::new(e))
    }

    pub fn binop(op: BinOp, a: NExpr, b: NExpr) -> NExpr {
        NExpr::Binop(op, Box::new(a), Box::new(b))
    }

    pub fn cond(g: NExpr, a: NExpr, b: NExpr) -> NExpr {
        NExpr::Cond(Box::new(g), Box::new(a), Box::new(b))
    }

    pub fn vars(&self) -> Vec<VarId> {
        fn go(e: &NExpr, out: &mut Vec<VarId>) {
            match e {
                NExpr::Var(x) => {
                    if !out.contains(x) {
                        out.push(*x)
                    }
                }
                NExpr::Const(_) => {}
                NExpr::Unop(_, a) => go(a, out),
                NExpr::Binop(_, a, b) => {
                    go(a, out);
                    go(b, out)
                }
                NExpr::Cond(g, a, b) => {
                    go(g, out);
                    go(a, out);
                    go(b, out)
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

/// Big-step evaluation. `None` when the expression has no value: an
/// arithmetic error, or a variable missing from `rho`.
pub fn eval_nexpr(rho: &BTreeMap<VarId, MachineInt>, e: &NExpr) -> Option<MachineInt> {
    match e {
        NExpr::Var(x) => rho.get(x).copied(),
        NExpr::Const(n) => Some(*n),
        NExpr::Unop(op, a) => Some(eval_unop(*op, eval_nexpr(rho, a)?)),
        NExpr::Binop(op, a, b) => {
            let a = eval_nexpr(rho, a)?;
            let b = eval_nexpr(rho, b)?;
            eval_binop(*op, a, b).ok()
        }
        NExpr::Cond(g, a, b) => {
            if eval_nexpr(rho, g)?.is_zero() {
                eval_nexpr(rho, b)
            } else {
                eval_nexpr(rho, a)
            }
        }
    }
}

/// Abstraction of numerical environments `var -> int`.
pub trait IntDom: AbstractDomain + Bottom + Meet + PartialEq + core::fmt::Debug {
    fn range(&self, e: &NExpr, flag: SignFlag) -> Lifted<Interval>;
    fn assign(&self, x: VarId, e: &NExpr) -> Self;
    /// Keeps the environments where `e` evaluates to exactly 1. Guards
    /// should be wrapped in `boolval` first.
    fn assume(&self, e: &NExpr) -> Self;
    /// Drops all knowledge about `x`.
    fn forget(&self, x: VarId) -> Self;
}

pub type NonRelEnv<V> = ReducedMap<VarId, V>;

/// Abstract value of `e` in `env`.
pub fn forward_eval<V: NumDom>(e: &NExpr, env: &NonRelEnv<V>) -> Lifted<V> {
    if env.is_bottom() {
        return Bot;
    }
    match e {
        NExpr::Var(x) => env.get(x),
        NExpr::Const(n) => NotBot(V::constant(*n)),
        NExpr::Unop(op, a) => forward_eval(a, env).and_then(|v| V::forward_unop(*op, &v)),
        NExpr::Binop(op, a, b) => {
            let (NotBot(va), NotBot(vb)) = (forward_eval(a, env), forward_eval(b, env)) else {
                return Bot;
            };
            V::forward_binop(*op, &va, &vb)
        }
        NExpr::Cond(g, a, b) => {
            let NotBot(vg) = forward_eval(g, env) else {
                return Bot;
            };
            let (may_true, may_false) = truth(&vg);
            let mut out = Bot;
            if may_true {
                out = out.join(&forward_eval(a, env));
            }
            if may_false {
                out = out.join(&forward_eval(b, env));
            }
            out
        }
    }
}

/// Whether a value may be non-zero, and whether it may be zero.
fn truth<V: NumDom>(v: &V) -> (bool, bool) {
    match v.range(SignFlag::Unsigned) {
        NotBot(r) => (r.max > 0, r.min == 0),
        Bot => (false, false),
    }
}

/// Refines `env` assuming `e` evaluates to a member of `expected`.
///
/// Binary operators propagate into their right operand first, then their
/// left. A conditional joins the scenario where the guard is false and the
/// right branch produced the value with the one where the guard is true and
/// the left branch produced it.
pub fn backward_expr<V: NumDom>(e: &NExpr, env: &NonRelEnv<V>, expected: &V) -> NonRelEnv<V> {
    if env.is_bottom() {
        return NonRelEnv::bottom();
    }
    match e {
        NExpr::Var(x) => {
            let refined = env.get(x).and_then(|v| v.meet(expected));
            env.set(*x, refined)
        }
        NExpr::Const(n) => match V::constant(*n).meet(expected) {
            Bot => NonRelEnv::bottom(),
            NotBot(_) => env.clone(),
        },
        NExpr::Unop(op, a) => {
            let NotBot(va) = forward_eval(a, env) else {
                return NonRelEnv::bottom();
            };
            match V::backward_unop(*op, &va, expected) {
                Bot => NonRelEnv::bottom(),
                NotBot(va) => backward_expr(a, env, &va),
            }
        }
        NExpr::Binop(op, a, b) => {
            let (NotBot(va), NotBot(vb)) = (forward_eval(a, env), forward_eval(b, env)) else {
                return NonRelEnv::bottom();
            };
            match V::backward_binop(*op, &va, &vb, expected) {
                (NotBot(va), NotBot(vb)) => {
                    let env = backward_expr(b, env, &vb);
                    backward_expr(a, &env, &va)
                }
                _ => NonRelEnv::bottom(),
            }
        }
        NExpr::Cond(g, l, r) => {
            let when_false = backward_expr(g, &backward_expr(r, env, expected), &V::constant(NFALSE));
            let when_true = match forward_eval(g, env)
                .and_then(|vg| V::backward_unop(UnOp::BoolVal, &vg, &V::constant(NTRUE)))
            {
                Bot => NonRelEnv::bottom(),
                NotBot(vg) => backward_expr(g, &backward_expr(l, env, expected), &vg),
            };
            when_false.join(&when_true)
        }
    }
}

/// Number of backward passes `assume` performs on `e` at most.
pub fn assume_budget(e: &NExpr) -> usize {
    (2 * e.vars().len()).clamp(1, MAX_ASSUME_PASSES)
}

/// `assume` with an explicit bound on the number of backward passes.
pub fn assume_passes<V: NumDom>(e: &NExpr, env: &NonRelEnv<V>, passes: usize) -> NonRelEnv<V> {
    let expected = V::constant(NTRUE);
    let mut cur = env.clone();
    for _ in 0..passes {
        let next = backward_expr(e, &cur, &expected);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

impl<V: NumDom> IntDom for NonRelEnv<V> {
    fn range(&self, e: &NExpr, flag: SignFlag) -> Lifted<Interval> {
        forward_eval(e, self).and_then(|v| v.range(flag))
    }

    fn assign(&self, x: VarId, e: &NExpr) -> Self {
        self.set(x, forward_eval(e, self))
    }

    fn assume(&self, e: &NExpr) -> Self {
        assume_passes(e, self, assume_budget(e))
    }

    fn forget(&self, x: VarId) -> Self {
        self.remove(&x)
    }
}
