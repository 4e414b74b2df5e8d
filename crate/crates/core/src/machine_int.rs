//! 32-bit machine integers with signed and unsigned readings.
//!
//! A [`MachineInt`] is a bare word. Whether it is read as a two's-complement
//! signed value or as an unsigned value is decided by each operation, which is
//! also how the abstract domains reason about it.

use core::fmt;

pub const MODULUS: i64 = 1 << 32;
pub const MAX_UNSIGNED: i64 = (1 << 32) - 1;
pub const MAX_SIGNED: i64 = (1 << 31) - 1;
pub const MIN_SIGNED: i64 = -(1 << 31);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MachineInt(u32);

impl MachineInt {
    pub const ZERO: MachineInt = MachineInt(0);
    pub const ONE: MachineInt = MachineInt(1);

    pub const fn from_bits(bits: u32) -> Self {
        MachineInt(bits)
    }

    /// Reduces an arbitrary integer modulo 2^32.
    pub fn wrap(z: i128) -> Self {
        MachineInt(z.rem_euclid(1i128 << 32) as u32)
    }

    pub fn from_i64(z: i64) -> Self {
        Self::wrap(z as i128)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn unsigned(self) -> i64 {
        self.0 as i64
    }

    pub const fn signed(self) -> i64 {
        self.0 as i32 as i64
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for MachineInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signed())
    }
}

impl fmt::Display for MachineInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signed())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparison {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub const ALL: [Comparison; 6] = [
        Comparison::Eq,
        Comparison::Ne,
        Comparison::Lt,
        Comparison::Le,
        Comparison::Gt,
        Comparison::Ge,
    ];

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Comparison::Eq => a == b,
            Comparison::Ne => a != b,
            Comparison::Lt => a < b,
            Comparison::Le => a <= b,
            Comparison::Gt => a > b,
            Comparison::Ge => a >= b,
        }
    }

    /// The comparison that holds exactly when `self` does not.
    pub fn negate(self) -> Self {
        match self {
            Comparison::Eq => Comparison::Ne,
            Comparison::Ne => Comparison::Eq,
            Comparison::Lt => Comparison::Ge,
            Comparison::Le => Comparison::Gt,
            Comparison::Gt => Comparison::Le,
            Comparison::Ge => Comparison::Lt,
        }
    }

    /// The comparison obtained by exchanging operands: `a < b` iff `b > a`.
    pub fn swap(self) -> Self {
        match self {
            Comparison::Lt => Comparison::Gt,
            Comparison::Le => Comparison::Ge,
            Comparison::Gt => Comparison::Lt,
            Comparison::Ge => Comparison::Le,
            c => c,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Eq => "==",
            Comparison::Ne => "!=",
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Cast8Unsigned,
    Cast8Signed,
    Cast16Unsigned,
    Cast16Signed,
    BoolVal,
    NegInt,
    NotBool,
    NotInt,
}

impl UnOp {
    pub const ALL: [UnOp; 8] = [
        UnOp::Cast8Unsigned,
        UnOp::Cast8Signed,
        UnOp::Cast16Unsigned,
        UnOp::Cast16Signed,
        UnOp::BoolVal,
        UnOp::NegInt,
        UnOp::NotBool,
        UnOp::NotInt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnOp::Cast8Unsigned => "cast8unsigned",
            UnOp::Cast8Signed => "cast8signed",
            UnOp::Cast16Unsigned => "cast16unsigned",
            UnOp::Cast16Signed => "cast16signed",
            UnOp::BoolVal => "boolval",
            UnOp::NegInt => "negint",
            UnOp::NotBool => "notbool",
            UnOp::NotInt => "notint",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    DivU,
    ModU,
    Shl,
    Shr,
    ShrU,
    And,
    Or,
    Xor,
    Cmp(Comparison),
    CmpU(Comparison),
}

impl BinOp {
    pub fn all() -> impl Iterator<Item = BinOp> {
        use BinOp::*;
        [Add, Sub, Mul, Div, Mod, DivU, ModU, Shl, Shr, ShrU, And, Or, Xor]
            .into_iter()
            .chain(Comparison::ALL.into_iter().map(Cmp))
            .chain(Comparison::ALL.into_iter().map(CmpU))
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::DivU => "/u",
            BinOp::ModU => "%u",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::ShrU => ">>u",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::Cmp(c) => c.symbol(),
            BinOp::CmpU(c) => match c {
                Comparison::Eq => "==u",
                Comparison::Ne => "!=u",
                Comparison::Lt => "<u",
                Comparison::Le => "<=u",
                Comparison::Gt => ">u",
                Comparison::Ge => ">=u",
            },
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Cmp(_) | BinOp::CmpU(_))
    }
}

/// Undefined behaviour raised by an operation on machine integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithError {
    DivisionByZero,
    SignedOverflow,
    ShiftOutOfRange,
}

impl fmt::Display for ArithError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithError::DivisionByZero => f.write_str("division by zero"),
            ArithError::SignedOverflow => f.write_str("signed division overflow"),
            ArithError::ShiftOutOfRange => f.write_str("shift amount out of range"),
        }
    }
}

pub fn eval_unop(op: UnOp, a: MachineInt) -> MachineInt {
    let bits = a.bits();
    match op {
        UnOp::Cast8Unsigned => MachineInt(bits & 0xff),
        UnOp::Cast8Signed => MachineInt(bits as u8 as i8 as i32 as u32),
        UnOp::Cast16Unsigned => MachineInt(bits & 0xffff),
        UnOp::Cast16Signed => MachineInt(bits as u16 as i16 as i32 as u32),
        UnOp::BoolVal => MachineInt::from_bool(bits != 0),
        UnOp::NegInt => MachineInt(bits.wrapping_neg()),
        UnOp::NotBool => MachineInt::from_bool(bits == 0),
        UnOp::NotInt => MachineInt(!bits),
    }
}

pub fn eval_binop(op: BinOp, a: MachineInt, b: MachineInt) -> Result<MachineInt, ArithError> {
    let (x, y) = (a.bits(), b.bits());
    let (sx, sy) = (x as i32, y as i32);
    let r = match op {
        BinOp::Add => x.wrapping_add(y),
        BinOp::Sub => x.wrapping_sub(y),
        BinOp::Mul => x.wrapping_mul(y),
        BinOp::Div | BinOp::Mod => {
            if sy == 0 {
                return Err(ArithError::DivisionByZero);
            }
            if sx == i32::MIN && sy == -1 {
                return Err(ArithError::SignedOverflow);
            }
            if op == BinOp::Div {
                (sx / sy) as u32
            } else {
                (sx % sy) as u32
            }
        }
        BinOp::DivU | BinOp::ModU => {
            if y == 0 {
                return Err(ArithError::DivisionByZero);
            }
            if op == BinOp::DivU {
                x / y
            } else {
                x % y
            }
        }
        BinOp::Shl | BinOp::Shr | BinOp::ShrU => {
            if y >= 32 {
                return Err(ArithError::ShiftOutOfRange);
            }
            match op {
                BinOp::Shl => x << y,
                BinOp::Shr => (sx >> y) as u32,
                _ => x >> y,
            }
        }
        BinOp::And => x & y,
        BinOp::Or => x | y,
        BinOp::Xor => x ^ y,
        BinOp::Cmp(c) => c.holds(a.signed(), b.signed()) as u32,
        BinOp::CmpU(c) => c.holds(a.unsigned(), b.unsigned()) as u32,
    };
    Ok(MachineInt(r))
}
