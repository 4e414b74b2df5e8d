//! Signed and unsigned intervals over machine integers, their transfer
//! functions, and the signed × unsigned reduced product.
//!
//! An interval bounds one reading of a word: [`SignedItv`] bounds
//! `signed(n)`, [`UnsignedItv`] bounds `unsigned(n)`. Bounds always lie in
//! the range of that reading. Arithmetic is computed exactly on wide
//! integers and falls back to top whenever the exact result might not fit,
//! i.e. whenever a wraparound cannot be ruled out.
//!
//! Operators whose meaning depends on a reading (`/`, `<u`, `>>`,
//! `cast8signed`, ...) convert their operands to that reading, compute there,
//! and convert the result back.

use core::fmt;
use core::marker::PhantomData;

use crate::domain::{AbstractDomain, Bot, Gamma, Lifted, LiftedMeet, NotBot};
use crate::machine_int::{
    eval_binop, eval_unop, BinOp, Comparison, MachineInt, UnOp, MAX_SIGNED, MAX_UNSIGNED,
    MIN_SIGNED, MODULUS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignFlag {
    Signed,
    Unsigned,
}

impl SignFlag {
    pub fn bounds(self) -> (i64, i64) {
        match self {
            SignFlag::Signed => (MIN_SIGNED, MAX_SIGNED),
            SignFlag::Unsigned => (0, MAX_UNSIGNED),
        }
    }

    pub fn read(self, n: MachineInt) -> i64 {
        match self {
            SignFlag::Signed => n.signed(),
            SignFlag::Unsigned => n.unsigned(),
        }
    }
}

/// A plain closed range, as reported by `range` queries.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub min: i64,
    pub max: i64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.min, self.max)
    }
}

impl Interval {
    pub const fn new(min: i64, max: i64) -> Self {
        Interval { min, max }
    }

    pub fn top(flag: SignFlag) -> Self {
        let (min, max) = flag.bounds();
        Interval { min, max }
    }

    pub fn contains(&self, z: i64) -> bool {
        self.min <= z && z <= self.max
    }

    /// Number of integers in the range.
    pub fn count(&self) -> u64 {
        (self.max - self.min + 1) as u64
    }

    pub fn meet(&self, other: &Interval) -> Lifted<Interval> {
        reduce(self.min.max(other.min), self.max.min(other.max))
    }

    /// Converts a range of one reading into a range of the other reading
    /// covering the same words.
    pub fn convert(self, from: SignFlag, to: SignFlag) -> Interval {
        match (from, to) {
            (SignFlag::Signed, SignFlag::Unsigned) => {
                if self.min >= 0 {
                    self
                } else if self.max < 0 {
                    Interval::new(self.min + MODULUS, self.max + MODULUS)
                } else {
                    Interval::top(to)
                }
            }
            (SignFlag::Unsigned, SignFlag::Signed) => {
                if self.max <= MAX_SIGNED {
                    self
                } else if self.min > MAX_SIGNED {
                    Interval::new(self.min - MODULUS, self.max - MODULUS)
                } else {
                    Interval::top(to)
                }
            }
            _ => self,
        }
    }
}

/// Canonical constructor: `Bot` exactly when the range is empty.
pub fn reduce(min: i64, max: i64) -> Lifted<Interval> {
    if min <= max {
        NotBot(Interval { min, max })
    } else {
        Bot
    }
}

/// `ints_in_range`: the words whose signed reading lies in `signed` and
/// whose unsigned reading lies in `unsigned`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangePair {
    pub signed: Lifted<Interval>,
    pub unsigned: Lifted<Interval>,
}

impl RangePair {
    pub fn contains(&self, n: MachineInt) -> bool {
        let inside = |r: &Lifted<Interval>, z| matches!(r, NotBot(i) if i.contains(z));
        inside(&self.signed, n.signed()) && inside(&self.unsigned, n.unsigned())
    }
}

/// The reading an interval instance bounds.
pub trait View: Copy + Eq + fmt::Debug + 'static {
    const FLAG: SignFlag;
    const MIN: i64;
    const MAX: i64;
    const SUFFIX: &'static str;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedView;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnsignedView;

impl View for SignedView {
    const FLAG: SignFlag = SignFlag::Signed;
    const MIN: i64 = MIN_SIGNED;
    const MAX: i64 = MAX_SIGNED;
    const SUFFIX: &'static str = "s";
}

impl View for UnsignedView {
    const FLAG: SignFlag = SignFlag::Unsigned;
    const MIN: i64 = 0;
    const MAX: i64 = MAX_UNSIGNED;
    const SUFFIX: &'static str = "u";
}

pub struct Itv<K> {
    min: i64,
    max: i64,
    view: PhantomData<K>,
}

pub type SignedItv = Itv<SignedView>;
pub type UnsignedItv = Itv<UnsignedView>;

impl<K> Clone for Itv<K> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<K> Copy for Itv<K> {}

impl<K> PartialEq for Itv<K> {
    fn eq(&self, other: &Self) -> bool {
        self.min == other.min && self.max == other.max
    }
}

impl<K> Eq for Itv<K> {}

impl<K: View> fmt::Debug for Itv<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]{}", self.min, self.max, K::SUFFIX)
    }
}

/// Bound ladder for widening; each instance clamps it to its own range.
pub const WIDENING_THRESHOLDS: [i64; 8] = [
    MIN_SIGNED,
    -(1 << 16),
    -1,
    0,
    1,
    1 << 16,
    MAX_SIGNED,
    MAX_UNSIGNED,
];

impl<K: View> Itv<K> {
    /// Panics if the range is empty or not within the instance's reading.
    pub fn new(min: i64, max: i64) -> Self {
        assert!(
            K::MIN <= min && min <= max && max <= K::MAX,
            "invalid interval [{min}, {max}]{}",
            K::SUFFIX
        );
        Self::raw(min, max)
    }

    fn raw(min: i64, max: i64) -> Self {
        debug_assert!(K::MIN <= min && min <= max && max <= K::MAX);
        Itv {
            min,
            max,
            view: PhantomData,
        }
    }

    pub fn min(&self) -> i64 {
        self.min
    }

    pub fn max(&self) -> i64 {
        self.max
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.min, self.max)
    }

    pub fn singleton(z: i64) -> Self {
        Self::new(z, z)
    }

    pub fn is_top(&self) -> bool {
        self.min == K::MIN && self.max == K::MAX
    }

    /// Checked constructor; `Bot` when empty. Bounds outside the reading are
    /// clipped, which does not change the concretization.
    pub fn reduce(min: i64, max: i64) -> Lifted<Self> {
        let (min, max) = (min.max(K::MIN), max.min(K::MAX));
        reduce(min, max).map(Self::from_interval_unchecked)
    }

    fn from_interval_unchecked(i: Interval) -> Self {
        Self::raw(i.min, i.max)
    }

    /// Interval of this reading covering the words of `r`, a range of the
    /// `from` reading.
    pub fn from_range(r: Interval, from: SignFlag) -> Self {
        let i = r.convert(from, K::FLAG);
        Self::raw(i.min, i.max)
    }

    /// Keeps exact bounds when they fit the reading, otherwise gives up
    /// to top.
    pub fn repr(min: i128, max: i128) -> Self {
        if (K::MIN as i128) <= min && max <= (K::MAX as i128) && min <= max {
            Self::raw(min as i64, max as i64)
        } else {
            Self::top()
        }
    }

    fn view_of(&self, flag: SignFlag) -> Interval {
        self.interval().convert(K::FLAG, flag)
    }

    fn meet_interval(&self, r: Lifted<Interval>, from: SignFlag) -> Lifted<Self> {
        match r {
            Bot => Bot,
            NotBot(r) => self.meet_lifted(&Self::from_range(r, from)),
        }
    }

    fn without(&self, z: i64) -> Lifted<Self> {
        let min = if self.min == z { self.min + 1 } else { self.min };
        let max = if self.max == z { self.max - 1 } else { self.max };
        Self::reduce(min, max)
    }
}

impl<K: View> AbstractDomain for Itv<K> {
    fn le(&self, other: &Self) -> bool {
        other.min <= self.min && self.max <= other.max
    }

    fn top() -> Self {
        Self::raw(K::MIN, K::MAX)
    }

    fn join(&self, other: &Self) -> Self {
        Self::raw(self.min.min(other.min), self.max.max(other.max))
    }

    fn widen(&self, next: &Self) -> Self {
        let min = if next.min < self.min {
            WIDENING_THRESHOLDS
                .iter()
                .rev()
                .copied()
                .find(|&t| t <= next.min && t >= K::MIN)
                .unwrap_or(K::MIN)
        } else {
            self.min
        };
        let max = if next.max > self.max {
            WIDENING_THRESHOLDS
                .iter()
                .copied()
                .find(|&t| t >= next.max && t <= K::MAX)
                .unwrap_or(K::MAX)
        } else {
            self.max
        };
        Self::raw(min, max)
    }
}

impl<K: View> LiftedMeet for Itv<K> {
    fn meet_lifted(&self, other: &Self) -> Lifted<Self> {
        Self::reduce(self.min.max(other.min), self.max.min(other.max))
    }
}

impl<K: View> Gamma<MachineInt> for Itv<K> {
    fn gamma(&self, n: &MachineInt) -> bool {
        self.interval().contains(K::FLAG.read(*n))
    }
}

/// Abstraction of single machine integers with forward and backward
/// transfer functions.
///
/// Soundness obligations, with `γ` the concretization:
/// * `range`: every member's signed (resp. unsigned) reading is in
///   `range(Signed)` (resp. `range(Unsigned)`);
/// * `forward_*`: the image of the operator over `γ` of the inputs is
///   included in `γ` of the result;
/// * `backward_binop(op, x, y, z)`: whenever `op i j = k` with `i ∈ γ x`,
///   `j ∈ γ y`, `k ∈ γ z`, then `i ∈ γ x'` and `j ∈ γ y'` (likewise for
///   `backward_unop`).
pub trait NumDom: AbstractDomain + LiftedMeet + PartialEq + fmt::Debug {
    fn range(&self, flag: SignFlag) -> Lifted<Interval>;
    fn constant(n: MachineInt) -> Self;
    fn forward_unop(op: UnOp, x: &Self) -> Lifted<Self>;
    fn forward_binop(op: BinOp, x: &Self, y: &Self) -> Lifted<Self>;
    fn backward_unop(op: UnOp, x: &Self, z: &Self) -> Lifted<Self>;
    fn backward_binop(op: BinOp, x: &Self, y: &Self, z: &Self) -> (Lifted<Self>, Lifted<Self>);

    fn meet(&self, other: &Self) -> Lifted<Self> {
        self.meet_lifted(other)
    }
}

/// Outcome of a comparison over two ranges: `(may_be_true, may_be_false)`.
fn compare(c: Comparison, a: Interval, b: Interval) -> (bool, bool) {
    let always = match c {
        Comparison::Eq => a.min == a.max && b.min == b.max && a.min == b.min,
        Comparison::Ne => a.max < b.min || b.max < a.min,
        Comparison::Lt => a.max < b.min,
        Comparison::Le => a.max <= b.min,
        Comparison::Gt => a.min > b.max,
        Comparison::Ge => a.min >= b.max,
    };
    let never = match c {
        Comparison::Eq => a.max < b.min || b.max < a.min,
        Comparison::Ne => a.min == a.max && b.min == b.max && a.min == b.min,
        Comparison::Lt => a.min >= b.max,
        Comparison::Le => a.min > b.max,
        Comparison::Gt => a.max <= b.min,
        Comparison::Ge => a.max < b.min,
    };
    (!never, !always)
}

fn bool_range(may_true: bool, may_false: bool) -> Interval {
    match (may_true, may_false) {
        (true, false) => Interval::new(1, 1),
        (false, true) => Interval::new(0, 0),
        _ => Interval::new(0, 1),
    }
}

/// Refines two ranges of one reading assuming `a c b` holds.
pub fn refine_comparison(
    c: Comparison,
    a: Interval,
    b: Interval,
    flag: SignFlag,
) -> (Lifted<Interval>, Lifted<Interval>) {
    let (lo, hi) = flag.bounds();
    let pair = match c {
        Comparison::Lt => (
            a.meet(&Interval::new(lo, b.max - 1)),
            b.meet(&Interval::new(a.min + 1, hi)),
        ),
        Comparison::Le => (
            a.meet(&Interval::new(lo, b.max)),
            b.meet(&Interval::new(a.min, hi)),
        ),
        Comparison::Gt => {
            let (b2, a2) = refine_comparison(Comparison::Lt, b, a, flag);
            (a2, b2)
        }
        Comparison::Ge => {
            let (b2, a2) = refine_comparison(Comparison::Le, b, a, flag);
            (a2, b2)
        }
        Comparison::Eq => {
            let m = a.meet(&b);
            (m, m)
        }
        Comparison::Ne => {
            let remove = |x: Interval, y: Interval| {
                if y.min != y.max {
                    return NotBot(x);
                }
                let min = if x.min == y.min { x.min + 1 } else { x.min };
                let max = if x.max == y.min { x.max - 1 } else { x.max };
                reduce(min, max)
            };
            (remove(a, b), remove(b, a))
        }
    };
    match pair {
        (NotBot(x), NotBot(y)) => (NotBot(x), NotBot(y)),
        _ => (Bot, Bot),
    }
}

fn corners(a: Interval, b: Interval, f: impl Fn(i128, i128) -> i128) -> (i128, i128) {
    let vals = [
        f(a.min as i128, b.min as i128),
        f(a.min as i128, b.max as i128),
        f(a.max as i128, b.min as i128),
        f(a.max as i128, b.max as i128),
    ];
    let lo = *vals.iter().min().expect("non-empty");
    let hi = *vals.iter().max().expect("non-empty");
    (lo, hi)
}

/// Smallest `2^k - 1` that is at least `n` (for `n >= 0`).
fn all_ones_above(n: i64) -> i64 {
    let mut m: i64 = 0;
    while m < n {
        m = (m << 1) | 1;
    }
    m
}

impl<K: View> Itv<K> {
    fn forward_unop_impl(op: UnOp, x: &Self) -> Self {
        if x.min == x.max {
            let n = MachineInt::from_i64(x.min);
            return Self::constant(eval_unop(op, n));
        }
        let s = x.view_of(SignFlag::Signed);
        let u = x.view_of(SignFlag::Unsigned);
        let cast = |r: Interval, lo: i64, hi: i64, flag| {
            if lo <= r.min && r.max <= hi {
                Self::from_range(r, flag)
            } else {
                Self::from_range(Interval::new(lo, hi), flag)
            }
        };
        match op {
            UnOp::Cast8Unsigned => cast(u, 0, 0xff, SignFlag::Unsigned),
            UnOp::Cast16Unsigned => cast(u, 0, 0xffff, SignFlag::Unsigned),
            UnOp::Cast8Signed => cast(s, -0x80, 0x7f, SignFlag::Signed),
            UnOp::Cast16Signed => cast(s, -0x8000, 0x7fff, SignFlag::Signed),
            UnOp::BoolVal | UnOp::NotBool => {
                let may_zero = x.interval().contains(0);
                let may_nonzero = x.min != 0 || x.max != 0;
                let (t, f) = if op == UnOp::BoolVal {
                    (may_nonzero, may_zero)
                } else {
                    (may_zero, may_nonzero)
                };
                Self::from_range(bool_range(t, f), K::FLAG)
            }
            UnOp::NegInt => match K::FLAG {
                SignFlag::Signed => Self::repr(-(x.max as i128), -(x.min as i128)),
                SignFlag::Unsigned => {
                    if x.min >= 1 {
                        Self::raw(MODULUS - x.max, MODULUS - x.min)
                    } else {
                        Self::top()
                    }
                }
            },
            UnOp::NotInt => match K::FLAG {
                SignFlag::Signed => Self::raw(-x.max - 1, -x.min - 1),
                SignFlag::Unsigned => Self::raw(MAX_UNSIGNED - x.max, MAX_UNSIGNED - x.min),
            },
        }
    }

    fn forward_binop_impl(op: BinOp, x: &Self, y: &Self) -> Self {
        if x.min == x.max && y.min == y.max {
            let a = MachineInt::from_i64(x.min);
            let b = MachineInt::from_i64(y.min);
            return match eval_binop(op, a, b) {
                Ok(r) => Self::constant(r),
                // No concrete result; top is the conservative answer.
                Err(_) => Self::top(),
            };
        }
        let (a, b) = (x.interval(), y.interval());
        let (xs, ys) = (x.view_of(SignFlag::Signed), y.view_of(SignFlag::Signed));
        let (xu, yu) = (x.view_of(SignFlag::Unsigned), y.view_of(SignFlag::Unsigned));
        match op {
            BinOp::Add => Self::repr(a.min as i128 + b.min as i128, a.max as i128 + b.max as i128),
            BinOp::Sub => Self::repr(a.min as i128 - b.max as i128, a.max as i128 - b.min as i128),
            BinOp::Mul => {
                let (lo, hi) = corners(a, b, |p, q| p * q);
                Self::repr(lo, hi)
            }
            BinOp::Div => {
                let excludes_zero = ys.min > 0 || ys.max < 0;
                let overflow = xs.min == MIN_SIGNED && ys.contains(-1);
                if !excludes_zero || overflow {
                    return Self::top();
                }
                let (lo, hi) = corners(xs, ys, |p, q| p / q);
                Self::from_range(Interval::new(lo as i64, hi as i64), SignFlag::Signed)
            }
            BinOp::Mod => {
                if ys.min == 0 && ys.max == 0 {
                    return Self::top();
                }
                let m = (ys.min.unsigned_abs()).max(ys.max.unsigned_abs()) as i64;
                let lo = if xs.min < 0 { xs.min.max(-(m - 1)) } else { 0 };
                let hi = if xs.max > 0 { xs.max.min(m - 1) } else { 0 };
                Self::from_range(Interval::new(lo, hi), SignFlag::Signed)
            }
            BinOp::DivU => {
                if yu.min >= 1 {
                    Self::from_range(Interval::new(xu.min / yu.max, xu.max / yu.min), SignFlag::Unsigned)
                } else if yu.max >= 1 {
                    Self::from_range(Interval::new(0, xu.max), SignFlag::Unsigned)
                } else {
                    Self::top()
                }
            }
            BinOp::ModU => {
                if yu.max >= 1 {
                    Self::from_range(Interval::new(0, xu.max.min(yu.max - 1)), SignFlag::Unsigned)
                } else {
                    Self::top()
                }
            }
            BinOp::Shl | BinOp::Shr | BinOp::ShrU => {
                // Amounts of 32 or more are undefined and contribute nothing.
                if yu.min > 31 {
                    return Self::top();
                }
                let (k1, k2) = (yu.min as u32, yu.max.min(31) as u32);
                match op {
                    BinOp::Shl => {
                        let (lo, hi) = corners(a, Interval::new(k1 as i64, k2 as i64), |p, k| p << k);
                        Self::repr(lo, hi)
                    }
                    BinOp::Shr => {
                        let lo = (xs.min >> k1).min(xs.min >> k2);
                        let hi = (xs.max >> k1).max(xs.max >> k2);
                        Self::from_range(Interval::new(lo, hi), SignFlag::Signed)
                    }
                    _ => Self::from_range(Interval::new(xu.min >> k2, xu.max >> k1), SignFlag::Unsigned),
                }
            }
            BinOp::And => Self::from_range(Interval::new(0, xu.max.min(yu.max)), SignFlag::Unsigned),
            BinOp::Or => Self::from_range(
                Interval::new(xu.min.max(yu.min), all_ones_above(xu.max.max(yu.max))),
                SignFlag::Unsigned,
            ),
            BinOp::Xor => {
                Self::from_range(Interval::new(0, all_ones_above(xu.max.max(yu.max))), SignFlag::Unsigned)
            }
            BinOp::Cmp(c) => {
                let (t, f) = compare(c, xs, ys);
                Self::from_range(bool_range(t, f), K::FLAG)
            }
            BinOp::CmpU(c) => {
                let (t, f) = compare(c, xu, yu);
                Self::from_range(bool_range(t, f), K::FLAG)
            }
        }
    }

    fn backward_unop_impl(op: UnOp, x: &Self, z: &Self) -> Lifted<Self> {
        match op {
            UnOp::BoolVal | UnOp::NotBool => {
                let zr = z.interval();
                let (can_true, can_false) = (zr.contains(1), zr.contains(0));
                // Outcome for which the operand is non-zero.
                let (nonzero, zero) = if op == UnOp::BoolVal {
                    (can_true, can_false)
                } else {
                    (can_false, can_true)
                };
                match (nonzero, zero) {
                    (false, false) => Bot,
                    (true, true) => NotBot(*x),
                    (false, true) => x.meet_lifted(&Self::singleton(0)),
                    (true, false) => x.without(0),
                }
            }
            UnOp::NegInt | UnOp::NotInt => {
                // Both are involutions.
                x.meet_lifted(&Self::forward_unop_impl(op, z))
            }
            UnOp::Cast8Unsigned | UnOp::Cast16Unsigned | UnOp::Cast8Signed | UnOp::Cast16Signed => {
                let (flag, lo, hi) = match op {
                    UnOp::Cast8Unsigned => (SignFlag::Unsigned, 0, 0xff),
                    UnOp::Cast16Unsigned => (SignFlag::Unsigned, 0, 0xffff),
                    UnOp::Cast8Signed => (SignFlag::Signed, -0x80, 0x7f),
                    _ => (SignFlag::Signed, -0x8000, 0x7fff),
                };
                let Some(reachable) = z.view_of(flag).meet(&Interval::new(lo, hi)).not_bot() else {
                    return Bot;
                };
                let xv = x.view_of(flag);
                if lo <= xv.min && xv.max <= hi {
                    // The cast is the identity on every member of x.
                    x.meet_interval(NotBot(reachable), flag)
                } else {
                    NotBot(*x)
                }
            }
        }
    }

    fn backward_binop_impl(op: BinOp, x: &Self, y: &Self, z: &Self) -> (Lifted<Self>, Lifted<Self>) {
        let (a, b, r) = (x.interval(), y.interval(), z.interval());
        let fits = |lo: i128, hi: i128| (K::MIN as i128) <= lo && hi <= (K::MAX as i128);
        // If `lo..=hi` is within the reading, the operand equals the exact
        // difference and can be intersected with it.
        let refine = |v: &Self, lo: i128, hi: i128| {
            if fits(lo, hi) {
                v.meet_lifted(&Self::raw(lo as i64, hi as i64))
            } else {
                NotBot(*v)
            }
        };
        let both = |p: Lifted<Self>, q: Lifted<Self>| match (p, q) {
            (NotBot(p), NotBot(q)) => (NotBot(p), NotBot(q)),
            _ => (Bot, Bot),
        };
        match op {
            BinOp::Add => both(
                refine(x, r.min as i128 - b.max as i128, r.max as i128 - b.min as i128),
                refine(y, r.min as i128 - a.max as i128, r.max as i128 - a.min as i128),
            ),
            BinOp::Sub => both(
                refine(x, r.min as i128 + b.min as i128, r.max as i128 + b.max as i128),
                refine(y, a.min as i128 - r.max as i128, a.max as i128 - r.min as i128),
            ),
            BinOp::Cmp(c) | BinOp::CmpU(c) => {
                let flag = if matches!(op, BinOp::Cmp(_)) {
                    SignFlag::Signed
                } else {
                    SignFlag::Unsigned
                };
                let c = match (r.contains(1), r.contains(0)) {
                    (false, false) => return (Bot, Bot),
                    (true, true) => return (NotBot(*x), NotBot(*y)),
                    (true, false) => c,
                    (false, true) => c.negate(),
                };
                let (xr, yr) = refine_comparison(c, x.view_of(flag), y.view_of(flag), flag);
                both(x.meet_interval(xr, flag), y.meet_interval(yr, flag))
            }
            _ => (NotBot(*x), NotBot(*y)),
        }
    }
}

impl<K: View> NumDom for Itv<K> {
    fn range(&self, flag: SignFlag) -> Lifted<Interval> {
        NotBot(self.view_of(flag))
    }

    fn constant(n: MachineInt) -> Self {
        Self::singleton(K::FLAG.read(n))
    }

    fn forward_unop(op: UnOp, x: &Self) -> Lifted<Self> {
        NotBot(Self::forward_unop_impl(op, x))
    }

    fn forward_binop(op: BinOp, x: &Self, y: &Self) -> Lifted<Self> {
        NotBot(Self::forward_binop_impl(op, x, y))
    }

    fn backward_unop(op: UnOp, x: &Self, z: &Self) -> Lifted<Self> {
        Self::backward_unop_impl(op, x, z)
    }

    fn backward_binop(op: BinOp, x: &Self, y: &Self, z: &Self) -> (Lifted<Self>, Lifted<Self>) {
        Self::backward_binop_impl(op, x, y, z)
    }
}

/// A reduction operator `ρ` between two numerical domains. It must satisfy
/// `γ(a) ∩ γ(b) ⊆ γ(ρ(a, b))`; it need not actually shrink anything.
pub trait Reduction<A, B> {
    fn reduce(a: Lifted<A>, b: Lifted<B>) -> Lifted<(A, B)>;
}

/// Reduced product of two numerical domains. Every operator runs both
/// components and reduces the pair with `R`.
pub struct ReducedProduct<A, B, R> {
    pub first: A,
    pub second: B,
    reduction: PhantomData<R>,
}

impl<A: Clone, B: Clone, R> Clone for ReducedProduct<A, B, R> {
    fn clone(&self) -> Self {
        ReducedProduct {
            first: self.first.clone(),
            second: self.second.clone(),
            reduction: PhantomData,
        }
    }
}

impl<A: Copy, B: Copy, R> Copy for ReducedProduct<A, B, R> {}

impl<A: PartialEq, B: PartialEq, R> PartialEq for ReducedProduct<A, B, R> {
    fn eq(&self, other: &Self) -> bool {
        self.first == other.first && self.second == other.second
    }
}

impl<A: Eq, B: Eq, R> Eq for ReducedProduct<A, B, R> {}

impl<A: fmt::Debug, B: fmt::Debug, R> fmt::Debug for ReducedProduct<A, B, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.first, self.second)
    }
}

impl<A, B, R: Reduction<A, B>> ReducedProduct<A, B, R> {
    /// A pair exactly as given, without reduction.
    pub fn unreduced(first: A, second: B) -> Self {
        ReducedProduct {
            first,
            second,
            reduction: PhantomData,
        }
    }

    pub fn reduced(a: Lifted<A>, b: Lifted<B>) -> Lifted<Self> {
        R::reduce(a, b).map(|(a, b)| Self::unreduced(a, b))
    }
}

impl<A: NumDom, B: NumDom, R: Reduction<A, B>> AbstractDomain for ReducedProduct<A, B, R> {
    fn le(&self, other: &Self) -> bool {
        self.first.le(&other.first) && self.second.le(&other.second)
    }

    fn top() -> Self {
        Self::unreduced(A::top(), B::top())
    }

    fn join(&self, other: &Self) -> Self {
        let (a, b) = (self.first.join(&other.first), self.second.join(&other.second));
        match R::reduce(NotBot(a.clone()), NotBot(b.clone())) {
            NotBot((a, b)) => Self::unreduced(a, b),
            // Cannot happen for a sound ρ on a non-empty join.
            Bot => Self::unreduced(a, b),
        }
    }

    /// Componentwise only: reducing after widening could undo it.
    fn widen(&self, next: &Self) -> Self {
        Self::unreduced(self.first.widen(&next.first), self.second.widen(&next.second))
    }
}

impl<A: NumDom, B: NumDom, R: Reduction<A, B>> LiftedMeet for ReducedProduct<A, B, R> {
    fn meet_lifted(&self, other: &Self) -> Lifted<Self> {
        Self::reduced(self.first.meet_lifted(&other.first), self.second.meet_lifted(&other.second))
    }
}

impl<A: Gamma<C>, B: Gamma<C>, R, C: ?Sized> Gamma<C> for ReducedProduct<A, B, R> {
    fn gamma(&self, c: &C) -> bool {
        self.first.gamma(c) && self.second.gamma(c)
    }
}

impl<A: NumDom, B: NumDom, R: Reduction<A, B>> NumDom for ReducedProduct<A, B, R> {
    fn range(&self, flag: SignFlag) -> Lifted<Interval> {
        match (self.first.range(flag), self.second.range(flag)) {
            (NotBot(p), NotBot(q)) => p.meet(&q),
            _ => Bot,
        }
    }

    fn constant(n: MachineInt) -> Self {
        Self::unreduced(A::constant(n), B::constant(n))
    }

    fn forward_unop(op: UnOp, x: &Self) -> Lifted<Self> {
        Self::reduced(A::forward_unop(op, &x.first), B::forward_unop(op, &x.second))
    }

    fn forward_binop(op: BinOp, x: &Self, y: &Self) -> Lifted<Self> {
        Self::reduced(
            A::forward_binop(op, &x.first, &y.first),
            B::forward_binop(op, &x.second, &y.second),
        )
    }

    fn backward_unop(op: UnOp, x: &Self, z: &Self) -> Lifted<Self> {
        Self::reduced(
            A::backward_unop(op, &x.first, &z.first),
            B::backward_unop(op, &x.second, &z.second),
        )
    }

    fn backward_binop(op: BinOp, x: &Self, y: &Self, z: &Self) -> (Lifted<Self>, Lifted<Self>) {
        let (x1, y1) = A::backward_binop(op, &x.first, &y.first, &z.first);
        let (x2, y2) = B::backward_binop(op, &x.second, &y.second, &z.second);
        (Self::reduced(x1, x2), Self::reduced(y1, y2))
    }
}

/// Exchanges bounds between the signed and unsigned readings: whenever one
/// side does not straddle its wraparound point, its exact image in the
/// other reading is intersected into the other side.
pub struct SignedUnsignedReduction;

impl Reduction<SignedItv, UnsignedItv> for SignedUnsignedReduction {
    fn reduce(a: Lifted<SignedItv>, b: Lifted<UnsignedItv>) -> Lifted<(SignedItv, UnsignedItv)> {
        let (NotBot(s), NotBot(u)) = (a, b) else {
            return Bot;
        };
        let NotBot(u) = u.meet_lifted(&UnsignedItv::from_range(s.interval(), SignFlag::Signed)) else {
            return Bot;
        };
        let NotBot(s) = s.meet_lifted(&SignedItv::from_range(u.interval(), SignFlag::Unsigned)) else {
            return Bot;
        };
        NotBot((s, u))
    }
}

/// The numerical value domain used by the analyzer.
pub type SignedUnsigned = ReducedProduct<SignedItv, UnsignedItv, SignedUnsignedReduction>;
