//! Exhaustive brute-force checks of the abstract domain laws and of the
//! soundness of every transfer function.
//!
//! Abstract operands are intervals of width at most 16 anchored near 0,
//! near 2^31 (both sides of the signed wraparound) and near 2^32 (both
//! sides of the unsigned wraparound), so their concretizations can be
//! enumerated outright. Order laws are checked on a fixed set of 512 words
//! covering the same neighbourhoods.

#![allow(dead_code)]

use std::collections::BTreeMap;

use cfgval_core::domain::{AbstractDomain, Bot, Bottom, Gamma, Lifted, LiftedMeet, Meet, NotBot, ReducedMap};
use cfgval_core::intervals::{
    Itv, NumDom, SignFlag, SignedItv, SignedUnsigned, SignedView, UnsignedItv, UnsignedView, View,
};
use cfgval_core::machine_int::{eval_binop, eval_unop, BinOp, MachineInt, UnOp, MAX_SIGNED, MIN_SIGNED};

#[derive(Debug, Default)]
pub struct LawReport {
    pub name: String,
    pub checks: u64,
    pub failures: Vec<String>,
}

impl LawReport {
    fn new(name: impl Into<String>) -> Self {
        LawReport {
            name: name.into(),
            ..Default::default()
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const TWO_31: i64 = 1 << 31;

/// Words whose signed reading is in [-128, 127], and whose unsigned
/// reading is in [2^31 - 128, 2^31 + 127].
pub fn words() -> Vec<MachineInt> {
    let mut w: Vec<MachineInt> = (-128..128).map(MachineInt::from_i64).collect();
    w.extend((TWO_31 - 128..TWO_31 + 128).map(MachineInt::from_i64));
    w
}

/// Candidate interval operands of one reading.
pub fn itv_candidates<K: View>() -> Vec<Itv<K>> {
    let anchors: Vec<i64> = match K::FLAG {
        SignFlag::Signed => vec![0, 30, MAX_SIGNED, MIN_SIGNED, -1],
        SignFlag::Unsigned => vec![0, 30, TWO_31 - 1, TWO_31, (1 << 32) - 1],
    };
    let mut out = Vec::new();
    for a in anchors {
        for lo in [a - 16, a - 9, a - 1, a, a + 3] {
            for w in [0, 1, 3, 16] {
                let hi = lo + w;
                if K::MIN <= lo && hi <= K::MAX {
                    let v = Itv::<K>::new(lo, hi);
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
    }
    out
}

/// Wider values, only used for order laws.
fn itv_wide<K: View>() -> Vec<Itv<K>> {
    let mut v = vec![Itv::<K>::top()];
    for (lo, hi) in [(-128, 127), (0, 255), (TWO_31 - 128, TWO_31 + 127), (0, MAX_SIGNED), (-5, 5)] {
        if let NotBot(i) = Itv::<K>::reduce(lo, hi) {
            v.push(i);
        }
    }
    v
}

/// Members of `γ(d)`, when few enough to list.
pub trait Enumerate {
    fn members(&self) -> Option<Vec<MachineInt>>;
}

impl<K: View> Enumerate for Itv<K> {
    fn members(&self) -> Option<Vec<MachineInt>> {
        (self.max() - self.min() <= 64).then(|| (self.min()..=self.max()).map(MachineInt::from_i64).collect())
    }
}

impl Enumerate for SignedUnsigned {
    fn members(&self) -> Option<Vec<MachineInt>> {
        let m = self.first.members().or_else(|| self.second.members())?;
        Some(m.into_iter().filter(|n| self.gamma(n)).collect())
    }
}

/// A value is well formed when each of its intervals is non-empty and
/// within its reading.
pub trait WellFormed {
    fn well_formed(&self) -> bool;
}

impl<K: View> WellFormed for Itv<K> {
    fn well_formed(&self) -> bool {
        K::MIN <= self.min() && self.min() <= self.max() && self.max() <= K::MAX
    }
}

impl WellFormed for SignedUnsigned {
    fn well_formed(&self) -> bool {
        self.first.well_formed() && self.second.well_formed()
    }
}

fn product_candidates() -> Vec<SignedUnsigned> {
    let mut out = Vec::new();
    let push = |v: Lifted<SignedUnsigned>, out: &mut Vec<SignedUnsigned>| {
        if let NotBot(v) = v {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    };
    let ss = itv_candidates::<SignedView>();
    let us = itv_candidates::<UnsignedView>();
    for s in ss.iter().step_by(2) {
        push(SignedUnsigned::reduced(NotBot(*s), NotBot(UnsignedItv::top())), &mut out);
    }
    for u in us.iter().step_by(2) {
        push(SignedUnsigned::reduced(NotBot(SignedItv::top()), NotBot(*u)), &mut out);
    }
    // Pairs that reduce to something narrower than either side.
    push(
        SignedUnsigned::reduced(
            NotBot(SignedItv::new(-10, 10)),
            NotBot(UnsignedItv::new((1 << 32) - 20, (1 << 32) - 1)),
        ),
        &mut out,
    );
    push(
        SignedUnsigned::reduced(
            NotBot(SignedItv::new(MIN_SIGNED, MIN_SIGNED + 20)),
            NotBot(UnsignedItv::new(TWO_31 - 5, TWO_31 + 5)),
        ),
        &mut out,
    );
    out
}

fn product_wide() -> Vec<SignedUnsigned> {
    let mut v = vec![SignedUnsigned::top()];
    for s in itv_wide::<SignedView>() {
        for u in itv_wide::<UnsignedView>() {
            if let NotBot(p) = SignedUnsigned::reduced(NotBot(s), NotBot(u)) {
                if !v.contains(&p) {
                    v.push(p);
                }
            }
        }
    }
    v
}

fn gamma_lifted<D: Gamma<MachineInt>>(d: &Lifted<D>, n: &MachineInt) -> bool {
    match d {
        NotBot(d) => d.gamma(n),
        Bot => false,
    }
}

/// Order laws: reflexivity, transitivity, `gamma_monotone`, `top_sound`,
/// `join_sound`, and soundness of meet.
pub fn order_laws<D>(name: &str, values: &[D]) -> LawReport
where
    D: AbstractDomain + LiftedMeet + Gamma<MachineInt> + std::fmt::Debug,
{
    let mut r = LawReport::new(format!("order laws: {name}"));
    let ws = words();
    let top = D::top();
    for w in &ws {
        r.check(top.gamma(w), || format!("top_sound: {w:?}"));
    }
    for a in values {
        r.check(a.le(a), || format!("reflexive: {a:?}"));
        for b in values {
            let j = a.join(b);
            let m = a.meet_lifted(b);
            let a_le_b = a.le(b);
            for w in &ws {
                let (ga, gb) = (a.gamma(w), b.gamma(w));
                if a_le_b {
                    r.check(!ga || gb, || format!("gamma_monotone: {a:?} <= {b:?} at {w:?}"));
                }
                r.check(!(ga || gb) || j.gamma(w), || format!("join_sound: {a:?} ⊔ {b:?} at {w:?}"));
                r.check(!(ga && gb) || gamma_lifted(&m, w), || format!("meet_sound: {a:?} ⊓ {b:?} at {w:?}"));
            }
            if a_le_b {
                for c in values {
                    if b.le(c) {
                        r.check(a.le(c), || format!("transitive: {a:?} {b:?} {c:?}"));
                    }
                }
            }
        }
    }
    r
}

/// `range`, `constant`, and forward transfer functions.
pub fn forward_soundness<D>(name: &str, values: &[D]) -> LawReport
where
    D: NumDom + Gamma<MachineInt> + Enumerate + WellFormed,
{
    let mut r = LawReport::new(format!("forward soundness: {name}"));
    let listed: Vec<(&D, Vec<MachineInt>)> = values.iter().filter_map(|v| v.members().map(|m| (v, m))).collect();
    for w in words() {
        r.check(D::constant(w).gamma(&w), || format!("constant {w:?}"));
    }
    for (x, mx) in &listed {
        for flag in [SignFlag::Signed, SignFlag::Unsigned] {
            let rg = x.range(flag);
            for a in mx {
                r.check(matches!(rg, NotBot(i) if i.contains(flag.read(*a))), || {
                    format!("range {flag:?} of {x:?} misses {a:?}")
                });
            }
        }
        for op in UnOp::ALL {
            let res = D::forward_unop(op, x);
            r.check(matches!(&res, NotBot(v) if v.well_formed()) || mx.is_empty(), || {
                format!("{op:?} {x:?} malformed: {res:?}")
            });
            for a in mx {
                let z = eval_unop(op, *a);
                r.check(gamma_lifted(&res, &z), || format!("{op:?} {x:?} = {res:?} misses {z:?}"));
            }
        }
    }
    for op in BinOp::all() {
        for (x, mx) in &listed {
            for (y, my) in &listed {
                let res = D::forward_binop(op, x, y);
                if let NotBot(v) = &res {
                    r.check(v.well_formed(), || format!("{op:?} malformed result {v:?}"));
                }
                for a in mx {
                    for b in my {
                        if let Ok(z) = eval_binop(op, *a, *b) {
                            r.check(gamma_lifted(&res, &z), || {
                                format!("{x:?} {} {y:?} = {res:?} misses {a:?} {} {b:?} = {z:?}", op.symbol(), op.symbol())
                            });
                        }
                    }
                }
            }
        }
    }
    r
}

/// Backward transfer functions, over triples satisfying the operation.
pub fn backward_soundness<D>(name: &str, values: &[D], results: &[D]) -> LawReport
where
    D: NumDom + Gamma<MachineInt> + Enumerate + WellFormed,
{
    let mut r = LawReport::new(format!("backward soundness: {name}"));
    let listed: Vec<(&D, Vec<MachineInt>)> = values.iter().filter_map(|v| v.members().map(|m| (v, m))).collect();
    for op in UnOp::ALL {
        for (x, mx) in &listed {
            for z in results {
                let x2 = D::backward_unop(op, x, z);
                for a in mx {
                    if z.gamma(&eval_unop(op, *a)) {
                        r.check(gamma_lifted(&x2, a), || format!("{op:?}⁻¹ {x:?} {z:?} = {x2:?} loses {a:?}"));
                    }
                }
            }
        }
    }
    for op in BinOp::all() {
        for (x, mx) in &listed {
            for (y, my) in &listed {
                for z in results {
                    let (x2, y2) = D::backward_binop(op, x, y, z);
                    for a in mx {
                        for b in my {
                            let Ok(k) = eval_binop(op, *a, *b) else { continue };
                            if z.gamma(&k) {
                                r.check(gamma_lifted(&x2, a) && gamma_lifted(&y2, b), || {
                                    format!(
                                        "{} backward {x:?} {y:?} z={z:?} gave {x2:?} {y2:?}, losing {a:?}, {b:?}",
                                        op.symbol()
                                    )
                                })
                            }
                        }
                    }
                }
            }
        }
    }
    r
}

/// Result values for the backward checks: booleans and a few ranges.
fn results_for<D: NumDom>(extra: &[D]) -> Vec<D> {
    let mut v = vec![D::constant(MachineInt::ZERO), D::constant(MachineInt::ONE)];
    v.push(D::constant(MachineInt::ZERO).join(&D::constant(MachineInt::ONE)));
    v.extend(extra.iter().cloned());
    v.push(D::top());
    v
}

fn lifted_laws(name: &str, values: &[SignedItv]) -> LawReport {
    let mut r = LawReport::new(format!("order laws: {name}"));
    let mut vals: Vec<Lifted<SignedItv>> = vec![Bot];
    vals.extend(values.iter().map(|v| NotBot(*v)));
    let ws = words();
    for w in &ws {
        r.check(gamma_lifted(&Lifted::<SignedItv>::top(), w), || "top_sound".into());
        r.check(!gamma_lifted(&Lifted::<SignedItv>::bottom(), w), || "bottom is empty".into());
    }
    for a in &vals {
        r.check(a.le(a), || format!("reflexive {a:?}"));
        for b in &vals {
            let j = a.join(b);
            for w in &ws {
                let (ga, gb) = (gamma_lifted(a, w), gamma_lifted(b, w));
                if a.le(b) {
                    r.check(!ga || gb, || format!("gamma_monotone {a:?} {b:?}"));
                }
                r.check(!(ga || gb) || gamma_lifted(&j, w), || format!("join_sound {a:?} {b:?}"));
            }
        }
    }
    r
}

type Map = ReducedMap<u8, SignedUnsigned>;

fn map_gamma(m: &Map, rho: &BTreeMap<u8, MachineInt>) -> bool {
    m.gamma(rho)
}

fn reduced_map_laws() -> LawReport {
    let mut r = LawReport::new("order laws: reduced map");
    let vals: Vec<SignedUnsigned> = {
        let c = product_candidates();
        let mut v: Vec<SignedUnsigned> = c.into_iter().step_by(9).take(6).collect();
        v.push(SignedUnsigned::top());
        v
    };
    let mut maps = vec![Map::bottom(), Map::top()];
    for a in &vals {
        maps.push(Map::from_bindings([(1, *a)]));
        maps.push(Map::from_bindings([(2, *a)]));
        for b in &vals {
            maps.push(Map::from_bindings([(1, *a), (2, *b)]));
        }
    }
    let sample: Vec<MachineInt> = words().into_iter().step_by(37).chain([MachineInt::ZERO]).collect();
    let mut rhos = Vec::new();
    for a in &sample {
        for b in &sample {
            rhos.push(BTreeMap::from([(1u8, *a), (2u8, *b)]));
        }
    }
    for rho in &rhos {
        r.check(map_gamma(&Map::top(), rho), || "top_sound".into());
    }
    for a in &maps {
        r.check(a.le(a), || format!("reflexive {a:?}"));
        for b in &maps {
            let j = a.join(b);
            let m = a.meet(b);
            let a_le_b = a.le(b);
            for k in [1u8, 2] {
                let (ga, gb, gj) = (a.get(&k), b.get(&k), j.get(&k));
                for n in &sample {
                    let (ia, ib) = (gamma_lifted(&ga, n), gamma_lifted(&gb, n));
                    r.check(!(ia || ib) || gamma_lifted(&gj, n), || format!("get of join at {k}: {a:?} {b:?}"));
                }
            }
            for rho in &rhos {
                let (ga, gb) = (map_gamma(a, rho), map_gamma(b, rho));
                if a_le_b {
                    r.check(!ga || gb, || format!("gamma_monotone {a:?} {b:?} {rho:?}"));
                }
                r.check(!(ga || gb) || map_gamma(&j, rho), || format!("join_sound {a:?} {b:?} {rho:?}"));
                r.check(!(ga && gb) || map_gamma(&m, rho), || format!("meet_sound {a:?} {b:?} {rho:?}"));
            }
        }
    }
    r
}

fn with_wide<T>(mut v: Vec<T>, w: Vec<T>) -> Vec<T> {
    v.extend(w);
    v
}

pub fn all_suites() -> Vec<LawReport> {
    let s = itv_candidates::<SignedView>();
    let u = itv_candidates::<UnsignedView>();
    let p = product_candidates();
    let s_res: Vec<SignedItv> = s.iter().step_by(7).copied().collect();
    let u_res: Vec<UnsignedItv> = u.iter().step_by(7).copied().collect();
    let p_res: Vec<SignedUnsigned> = p.iter().step_by(7).copied().collect();
    let s_back: Vec<SignedItv> = s.iter().step_by(2).copied().collect();
    let u_back: Vec<UnsignedItv> = u.iter().step_by(2).copied().collect();
    let p_back: Vec<SignedUnsigned> = p.iter().step_by(2).copied().collect();
    vec![
        order_laws("signed interval", &with_wide(s.clone(), itv_wide())),
        order_laws("unsigned interval", &with_wide(u.clone(), itv_wide())),
        order_laws("signed/unsigned product", &with_wide(p.clone(), product_wide())),
        lifted_laws("lifted signed interval", &s),
        reduced_map_laws(),
        forward_soundness("signed interval", &s),
        forward_soundness("unsigned interval", &u),
        forward_soundness("signed/unsigned product", &p),
        backward_soundness("signed interval", &s_back, &results_for(&s_res)),
        backward_soundness("unsigned interval", &u_back, &results_for(&u_res)),
        backward_soundness("signed/unsigned product", &p_back, &results_for(&p_res)),
    ]
}
