//! Generic abstract domains and the functors that combine them: direct
//! product, bottom lifting and finite reduced maps.
//!
//! An abstract domain only has to provide a decidable order, a top element,
//! an upper bound and a widening. The only laws are those linking the order
//! and the upper bound to the concretization:
//!
//! * `a.le(b)` implies `γ(a) ⊆ γ(b)`,
//! * every concrete value is in `γ(top)`,
//! * `γ(a) ∪ γ(b) ⊆ γ(a.join(b))`.
//!
//! Nothing is required of widening: fixpoints are checked after the fact.

use alloc::collections::BTreeMap;
use core::fmt;

pub trait AbstractDomain: Clone {
    fn le(&self, other: &Self) -> bool;
    fn top() -> Self;
    fn join(&self, other: &Self) -> Self;
    fn widen(&self, next: &Self) -> Self;
}

/// Concretization as an executable membership test.
///
/// This exists for property tests; the analysis never calls it.
pub trait Gamma<C: ?Sized> {
    fn gamma(&self, concrete: &C) -> bool;
}

/// Domains with a least element. Used by the fixpoint iterator to seed
/// nodes that have not been reached yet.
pub trait Bottom {
    fn bottom() -> Self;
    fn is_bottom(&self) -> bool;
}

/// Greatest lower bound, used by decreasing iterations.
pub trait Meet: Sized {
    fn meet(&self, other: &Self) -> Self;
}

/// `A + ⊥`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lifted<A> {
    Bot,
    NotBot(A),
}

pub use Lifted::{Bot, NotBot};

impl<A: fmt::Debug> fmt::Debug for Lifted<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bot => f.write_str("⊥"),
            NotBot(a) => a.fmt(f),
        }
    }
}

impl<A> Lifted<A> {
    pub fn is_bot(&self) -> bool {
        matches!(self, Bot)
    }

    pub fn as_ref(&self) -> Lifted<&A> {
        match self {
            Bot => Bot,
            NotBot(a) => NotBot(a),
        }
    }

    pub fn map<B>(self, f: impl FnOnce(A) -> B) -> Lifted<B> {
        match self {
            Bot => Bot,
            NotBot(a) => NotBot(f(a)),
        }
    }

    pub fn and_then<B>(self, f: impl FnOnce(A) -> Lifted<B>) -> Lifted<B> {
        match self {
            Bot => Bot,
            NotBot(a) => f(a),
        }
    }

    pub fn not_bot(self) -> Option<A> {
        match self {
            Bot => None,
            NotBot(a) => Some(a),
        }
    }

    pub fn unwrap(self) -> A {
        match self {
            Bot => panic!("called `Lifted::unwrap()` on `Bot`"),
            NotBot(a) => a,
        }
    }
}

impl<A> From<Option<A>> for Lifted<A> {
    fn from(o: Option<A>) -> Self {
        match o {
            Some(a) => NotBot(a),
            None => Bot,
        }
    }
}

impl<A: AbstractDomain> AbstractDomain for Lifted<A> {
    fn le(&self, other: &Self) -> bool {
        match (self, other) {
            (Bot, _) => true,
            // γ(a) may be empty, but we cannot decide that in general.
            (NotBot(_), Bot) => false,
            (NotBot(a), NotBot(b)) => a.le(b),
        }
    }

    fn top() -> Self {
        NotBot(A::top())
    }

    fn join(&self, other: &Self) -> Self {
        match (self, other) {
            (Bot, x) | (x, Bot) => x.clone(),
            (NotBot(a), NotBot(b)) => NotBot(a.join(b)),
        }
    }

    fn widen(&self, next: &Self) -> Self {
        match (self, next) {
            (Bot, x) | (x, Bot) => x.clone(),
            (NotBot(a), NotBot(b)) => NotBot(a.widen(b)),
        }
    }
}

impl<A> Bottom for Lifted<A> {
    fn bottom() -> Self {
        Bot
    }

    fn is_bottom(&self) -> bool {
        self.is_bot()
    }
}

impl<A: Meet> Meet for Lifted<A> {
    fn meet(&self, other: &Self) -> Self {
        match (self, other) {
            (NotBot(a), NotBot(b)) => NotBot(a.meet(b)),
            _ => Bot,
        }
    }
}

impl<A: Gamma<C>, C: ?Sized> Gamma<C> for Lifted<A> {
    fn gamma(&self, c: &C) -> bool {
        match self {
            Bot => false,
            NotBot(a) => a.gamma(c),
        }
    }
}

/// Direct product; the concretization of a pair is the intersection of
/// the concretizations of its components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Product<A, B>(pub A, pub B);

impl<A: AbstractDomain, B: AbstractDomain> AbstractDomain for Product<A, B> {
    fn le(&self, other: &Self) -> bool {
        self.0.le(&other.0) && self.1.le(&other.1)
    }

    fn top() -> Self {
        Product(A::top(), B::top())
    }

    fn join(&self, other: &Self) -> Self {
        Product(self.0.join(&other.0), self.1.join(&other.1))
    }

    fn widen(&self, next: &Self) -> Self {
        Product(self.0.widen(&next.0), self.1.widen(&next.1))
    }
}

impl<A: Gamma<C>, B: Gamma<C>, C: ?Sized> Gamma<C> for Product<A, B> {
    fn gamma(&self, c: &C) -> bool {
        self.0.gamma(c) && self.1.gamma(c)
    }
}

/// A finite map whose unbound keys read as top, reduced with respect to
/// bottom: binding any key to `Bot` collapses the whole map to `Bot`.
#[derive(Clone, PartialEq, Eq)]
pub struct ReducedMap<K, A>(Lifted<BTreeMap<K, A>>);

impl<K: fmt::Debug, A: fmt::Debug> fmt::Debug for ReducedMap<K, A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Bot => f.write_str("⊥"),
            NotBot(m) => f.debug_map().entries(m.iter()).finish(),
        }
    }
}

impl<K: Ord + Clone, A: AbstractDomain> ReducedMap<K, A> {
    pub fn empty() -> Self {
        ReducedMap(NotBot(BTreeMap::new()))
    }

    pub fn from_bindings(bindings: impl IntoIterator<Item = (K, A)>) -> Self {
        ReducedMap(NotBot(bindings.into_iter().collect()))
    }

    pub fn get(&self, k: &K) -> Lifted<A> {
        match &self.0 {
            Bot => Bot,
            NotBot(m) => NotBot(m.get(k).cloned().unwrap_or_else(A::top)),
        }
    }

    pub fn set(&self, k: K, v: Lifted<A>) -> Self {
        match (&self.0, v) {
            (Bot, _) | (_, Bot) => ReducedMap(Bot),
            (NotBot(m), NotBot(a)) => {
                let mut m = m.clone();
                m.insert(k, a);
                ReducedMap(NotBot(m))
            }
        }
    }

    /// Drops the binding of `k`, which then reads as top.
    pub fn remove(&self, k: &K) -> Self {
        match &self.0 {
            Bot => ReducedMap(Bot),
            NotBot(m) => {
                let mut m = m.clone();
                m.remove(k);
                ReducedMap(NotBot(m))
            }
        }
    }

    pub fn bindings(&self) -> Option<&BTreeMap<K, A>> {
        match &self.0 {
            Bot => None,
            NotBot(m) => Some(m),
        }
    }
}

impl<K: Ord + Clone, A: AbstractDomain> AbstractDomain for ReducedMap<K, A> {
    /// Only keys bound on the right are compared; anything is below an
    /// unbound (top) key.
    fn le(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Bot, _) => true,
            (_, Bot) => false,
            (NotBot(m1), NotBot(m2)) => m2.iter().all(|(k, b)| match m1.get(k) {
                Some(a) => a.le(b),
                None => A::top().le(b),
            }),
        }
    }

    fn top() -> Self {
        Self::empty()
    }

    /// Keys bound on one side only are dropped: top absorbs them.
    fn join(&self, other: &Self) -> Self {
        match (&self.0, &other.0) {
            (Bot, _) => other.clone(),
            (_, Bot) => self.clone(),
            (NotBot(m1), NotBot(m2)) => ReducedMap(NotBot(
                m1.iter()
                    .filter_map(|(k, a)| m2.get(k).map(|b| (k.clone(), a.join(b))))
                    .collect(),
            )),
        }
    }

    fn widen(&self, next: &Self) -> Self {
        match (&self.0, &next.0) {
            (Bot, _) => next.clone(),
            (_, Bot) => self.clone(),
            (NotBot(m1), NotBot(m2)) => ReducedMap(NotBot(
                m1.iter()
                    .filter_map(|(k, a)| m2.get(k).map(|b| (k.clone(), a.widen(b))))
                    .collect(),
            )),
        }
    }
}

impl<K, A> Bottom for ReducedMap<K, A> {
    fn bottom() -> Self {
        ReducedMap(Bot)
    }

    fn is_bottom(&self) -> bool {
        self.0.is_bot()
    }
}

/// Keywise meet of values that may themselves meet to bottom.
pub trait LiftedMeet: Sized {
    fn meet_lifted(&self, other: &Self) -> Lifted<Self>;
}

impl<K: Ord + Clone, A: AbstractDomain + LiftedMeet> Meet for ReducedMap<K, A> {
    fn meet(&self, other: &Self) -> Self {
        let (NotBot(m1), NotBot(m2)) = (&self.0, &other.0) else {
            return ReducedMap(Bot);
        };
        let mut out = m1.clone();
        for (k, b) in m2 {
            let v = match m1.get(k) {
                Some(a) => a.meet_lifted(b),
                None => NotBot(b.clone()),
            };
            match v {
                Bot => return ReducedMap(Bot),
                NotBot(v) => {
                    out.insert(k.clone(), v);
                }
            }
        }
        ReducedMap(NotBot(out))
    }
}

/// Membership of a concrete valuation. Keys missing from the valuation are
/// unconstrained, matching the existential reading used for undefined
/// variables.
impl<K: Ord + Clone, A: AbstractDomain + Gamma<C>, C> Gamma<BTreeMap<K, C>> for ReducedMap<K, A> {
    fn gamma(&self, rho: &BTreeMap<K, C>) -> bool {
        match &self.0 {
            Bot => false,
            NotBot(m) => m.iter().all(|(k, a)| rho.get(k).map_or(true, |c| a.gamma(c))),
        }
    }
}
