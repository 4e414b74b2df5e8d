//! Abstraction of local environments and memory.
//!
//! Only local variables are tracked. Each variable holds either an integer
//! or a pointer, and pointers are abstracted by their offset, so a numeric
//! abstract environment suffices once expressions are converted to
//! [`NExpr`]. A small kind map records which variables are known to hold
//! integers or pointers; it decides whether a comparison can be converted.

use alloc::collections::BTreeMap;

use crate::concrete::{Env, Value};
use crate::domain::{AbstractDomain, Bot, Bottom, Gamma, Lifted, Meet, NotBot};
use crate::intervals::{Interval, SignFlag};
use crate::ir::{Constant, Expr, MemChunk, VarId};
use crate::machine_int::{BinOp, MachineInt};
use crate::num_env::{IntDom, NExpr};

use alloc::boxed::Box;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Int,
    Ptr,
    Top,
}

impl Kind {
    pub fn join(self, other: Kind) -> Kind {
        if self == other {
            self
        } else {
            Kind::Top
        }
    }

    pub fn le(self, other: Kind) -> bool {
        self == other || other == Kind::Top
    }

    /// `Undef` belongs to every kind.
    pub fn contains(self, v: &Value) -> bool {
        match (self, v) {
            (Kind::Top, _) | (_, Value::Undef) => true,
            (Kind::Int, Value::Int(_)) | (Kind::Ptr, Value::Ptr(..)) => true,
            _ => false,
        }
    }
}

/// Kinds of variables; unbound variables have kind `Top`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeInfo(BTreeMap<VarId, Kind>);

impl TypeInfo {
    pub fn get(&self, x: VarId) -> Kind {
        self.0.get(&x).copied().unwrap_or(Kind::Top)
    }

    pub fn set(&self, x: VarId, k: Kind) -> TypeInfo {
        let mut m = self.0.clone();
        if k == Kind::Top {
            m.remove(&x);
        } else {
            m.insert(x, k);
        }
        TypeInfo(m)
    }

    pub fn le(&self, other: &TypeInfo) -> bool {
        other.0.iter().all(|(x, k)| self.get(*x).le(*k))
    }

    pub fn join(&self, other: &TypeInfo) -> TypeInfo {
        TypeInfo(
            self.0
                .iter()
                .filter(|(x, k)| other.0.get(x) == Some(k))
                .map(|(x, k)| (*x, *k))
                .collect(),
        )
    }

    /// Greatest lower bound, or `None` when some variable gets both kinds.
    pub fn meet(&self, other: &TypeInfo) -> Option<TypeInfo> {
        let mut m = self.0.clone();
        for (x, k) in &other.0 {
            match m.get(x) {
                Some(k2) if k2 != k => return None,
                _ => {
                    m.insert(*x, *k);
                }
            }
        }
        Some(TypeInfo(m))
    }

    pub fn contains(&self, env: &Env) -> bool {
        self.0
            .iter()
            .all(|(x, k)| k.contains(env.get(x).unwrap_or(&Value::Undef)))
    }
}

/// Kind of the value of `e`, given the kinds of variables.
pub fn kind_of(tp: &TypeInfo, e: &Expr) -> Kind {
    match e {
        Expr::Var(x) => tp.get(*x),
        Expr::Const(Constant::Int(_)) => Kind::Int,
        Expr::Const(_) => Kind::Ptr,
        Expr::Unop(..) => Kind::Int,
        Expr::Binop(op, a, b) => match op {
            BinOp::Add => match (kind_of(tp, a), kind_of(tp, b)) {
                (Kind::Int, Kind::Int) => Kind::Int,
                (Kind::Ptr, Kind::Int) | (Kind::Int, Kind::Ptr) => Kind::Ptr,
                _ => Kind::Top,
            },
            BinOp::Sub => match (kind_of(tp, a), kind_of(tp, b)) {
                (Kind::Int, Kind::Int) => Kind::Int,
                (Kind::Ptr, Kind::Int) => Kind::Ptr,
                _ => Kind::Top,
            },
            _ => Kind::Int,
        },
        Expr::Cond(_, a, b) => kind_of(tp, a).join(kind_of(tp, b)),
        Expr::Load(MemChunk::Mint32, _) => Kind::Top,
        Expr::Load(..) => Kind::Int,
    }
}

/// Translates `e` to a numeric expression whose value is the integer, or
/// the offset of the pointer, that `e` evaluates to.
///
/// Fails on loads, on signed comparisons involving a known pointer, and on
/// unsigned comparisons unless both operands are known integers or both
/// known pointers: `0 ==u p` is false for a pointer `p`, whatever its
/// offset.
pub fn convert(tp: &TypeInfo, e: &Expr) -> Option<NExpr> {
    Some(match e {
        Expr::Var(x) => NExpr::Var(*x),
        Expr::Const(Constant::Int(n)) | Expr::Const(Constant::AddrStack(n)) => NExpr::Const(*n),
        Expr::Const(Constant::AddrSymbol(_, n)) => NExpr::Const(*n),
        Expr::Unop(op, a) => NExpr::Unop(*op, Box::new(convert(tp, a)?)),
        Expr::Binop(op, a, b) => {
            let comparable = match op {
                // Signed comparisons only produce an integer from two
                // integers, so only a known pointer operand is a problem.
                BinOp::Cmp(_) => kind_of(tp, a) != Kind::Ptr && kind_of(tp, b) != Kind::Ptr,
                BinOp::CmpU(_) => {
                    let (ka, kb) = (kind_of(tp, a), kind_of(tp, b));
                    ka == kb && ka != Kind::Top
                }
                _ => true,
            };
            if !comparable {
                return None;
            }
            NExpr::Binop(*op, Box::new(convert(tp, a)?), Box::new(convert(tp, b)?))
        }
        Expr::Cond(g, a, b) => NExpr::Cond(
            Box::new(convert(tp, g)?),
            Box::new(convert(tp, a)?),
            Box::new(convert(tp, b)?),
        ),
        Expr::Load(..) => return None,
    })
}

/// Abstraction of the local environment and memory of one function.
pub trait MemDom: AbstractDomain + Bottom + Meet + PartialEq + core::fmt::Debug {
    fn range(&self, x: VarId, flag: SignFlag) -> Lifted<Interval>;
    fn forget(&self, x: VarId) -> Self;
    fn assign(&self, x: VarId, e: &Expr) -> Self;
    fn store(&self, chunk: MemChunk, addr: &Expr, v: &Expr) -> Self;
    fn assume(&self, e: &Expr) -> Self;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbMem<N> {
    num: N,
    types: TypeInfo,
}

impl<N: IntDom> AbMem<N> {
    pub fn new(num: N, types: TypeInfo) -> Self {
        if num.is_bottom() {
            AbMem {
                num,
                types: TypeInfo::default(),
            }
        } else {
            AbMem { num, types }
        }
    }

    pub fn num(&self) -> &N {
        &self.num
    }

    pub fn types(&self) -> &TypeInfo {
        &self.types
    }

    /// Numeric range of `e` in this state, if it can be converted.
    pub fn range_of(&self, e: &Expr, flag: SignFlag) -> Option<Lifted<Interval>> {
        convert(&self.types, e).map(|ne| self.num.range(&ne, flag))
    }
}

impl<N: IntDom> AbstractDomain for AbMem<N> {
    fn le(&self, other: &Self) -> bool {
        self.num.is_bottom() || (self.num.le(&other.num) && self.types.le(&other.types))
    }

    fn top() -> Self {
        AbMem::new(N::top(), TypeInfo::default())
    }

    fn join(&self, other: &Self) -> Self {
        if self.num.is_bottom() {
            return other.clone();
        }
        if other.num.is_bottom() {
            return self.clone();
        }
        AbMem::new(self.num.join(&other.num), self.types.join(&other.types))
    }

    fn widen(&self, next: &Self) -> Self {
        if self.num.is_bottom() {
            return next.clone();
        }
        if next.num.is_bottom() {
            return self.clone();
        }
        AbMem::new(self.num.widen(&next.num), self.types.join(&next.types))
    }
}

impl<N: IntDom> Bottom for AbMem<N> {
    fn bottom() -> Self {
        AbMem {
            num: N::bottom(),
            types: TypeInfo::default(),
        }
    }

    fn is_bottom(&self) -> bool {
        self.num.is_bottom()
    }
}

impl<N: IntDom> Meet for AbMem<N> {
    fn meet(&self, other: &Self) -> Self {
        match self.types.meet(&other.types) {
            Some(types) => AbMem::new(self.num.meet(&other.num), types),
            None => AbMem::bottom(),
        }
    }
}

impl<N: IntDom> MemDom for AbMem<N> {
    fn range(&self, x: VarId, flag: SignFlag) -> Lifted<Interval> {
        if self.num.is_bottom() {
            return Bot;
        }
        self.num.range(&NExpr::Var(x), flag)
    }

    fn forget(&self, x: VarId) -> Self {
        AbMem::new(self.num.forget(x), self.types.set(x, Kind::Top))
    }

    fn assign(&self, x: VarId, e: &Expr) -> Self {
        if self.num.is_bottom() {
            return self.clone();
        }
        let kind = kind_of(&self.types, e);
        match convert(&self.types, e) {
            Some(ne) => AbMem::new(self.num.assign(x, &ne), self.types.set(x, kind)),
            None => AbMem::new(self.num.forget(x), self.types.set(x, kind)),
        }
    }

    /// Memory contents are not tracked and locals cannot be aliased.
    fn store(&self, _chunk: MemChunk, _addr: &Expr, _v: &Expr) -> Self {
        self.clone()
    }

    fn assume(&self, e: &Expr) -> Self {
        if self.num.is_bottom() {
            return self.clone();
        }
        match convert(&self.types, e) {
            Some(ne) => AbMem::new(
                self.num.assume(&NExpr::unop(crate::machine_int::UnOp::BoolVal, ne)),
                self.types.clone(),
            ),
            None => self.clone(),
        }
    }
}

/// Numeric projection of an environment: integers and pointer offsets.
/// Variables holding `Undef` are left out, so they may take any value.
pub fn project(env: &Env) -> BTreeMap<VarId, MachineInt> {
    env.iter()
        .filter_map(|(x, v)| v.numeric().map(|n| (*x, n)))
        .collect()
}

impl<N: IntDom + Gamma<BTreeMap<VarId, MachineInt>>> Gamma<Env> for AbMem<N> {
    fn gamma(&self, env: &Env) -> bool {
        !self.num.is_bottom() && self.types.contains(env) && self.num.gamma(&project(env))
    }
}

impl<N: IntDom> AbMem<N> {
    /// Whether every defined variable of `env` lies within the ranges of
    /// this state, in both signed and unsigned views.
    pub fn admits_values(&self, env: &Env) -> bool {
        if self.num.is_bottom() {
            return false;
        }
        project(env).iter().all(|(x, n)| {
            [SignFlag::Signed, SignFlag::Unsigned].into_iter().all(|flag| {
                match self.range(*x, flag) {
                    NotBot(r) => r.contains(flag.read(*n)),
                    Bot => false,
                }
            })
        })
    }
}
