//! Small-step concrete semantics of CFG programs.
//!
//! Memory is a map from blocks to typed cells rather than an array of bytes:
//! a load returns the stored value only when its chunk and offset match the
//! store exactly, and `Undef` otherwise. The analysis tracks no memory
//! contents, so this is all the soundness oracle needs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ir::{CfgFunction, CfgProgram, Constant, Expr, Instruction, MemChunk, NodeId, VarId};
use crate::machine_int::{eval_binop, eval_unop, ArithError, BinOp, Comparison, MachineInt};

/// Nesting limit for calls; deeper recursion is reported as running out of fuel.
pub const MAX_CALL_DEPTH: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Int(MachineInt),
    Ptr(BlockId, MachineInt),
    Undef,
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(MachineInt::from_i64(n))
    }

    /// The integer a local variable denotes for the analysis: the value of an
    /// integer, or the offset of a pointer.
    pub fn numeric(self) -> Option<MachineInt> {
        match self {
            Value::Int(i) | Value::Ptr(_, i) => Some(i),
            Value::Undef => None,
        }
    }
}

pub type Env = BTreeMap<VarId, Value>;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Cell {
    chunk: MemChunk,
    value: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Block {
    size: u32,
    live: bool,
    /// Set for the pseudo-blocks standing for function symbols.
    function: Option<String>,
    cells: BTreeMap<u32, Cell>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Memory {
    blocks: BTreeMap<BlockId, Block>,
    symbols: BTreeMap<String, BlockId>,
    next: u32,
}

impl Memory {
    fn alloc(&mut self, size: u32, function: Option<String>) -> BlockId {
        self.next += 1;
        let id = BlockId(self.next);
        self.blocks.insert(
            id,
            Block {
                size,
                live: true,
                function,
                cells: BTreeMap::new(),
            },
        );
        id
    }

    fn free(&mut self, b: BlockId) {
        if let Some(block) = self.blocks.get_mut(&b) {
            block.live = false;
            block.cells.clear();
        }
    }

    pub fn symbol(&self, name: &str) -> Option<BlockId> {
        self.symbols.get(name).copied()
    }

    fn function_at(&self, b: BlockId) -> Option<&str> {
        self.blocks.get(&b).and_then(|blk| blk.function.as_deref())
    }

    fn check_access(&self, chunk: MemChunk, b: BlockId, ofs: MachineInt) -> Result<(), EvalError> {
        match self.blocks.get(&b) {
            Some(blk) if blk.live && blk.function.is_none() => {
                let end = ofs.unsigned() + chunk.size() as i64;
                if end <= blk.size as i64 {
                    Ok(())
                } else {
                    Err(EvalError::InvalidAddress)
                }
            }
            _ => Err(EvalError::InvalidAddress),
        }
    }

    pub fn load(&self, chunk: MemChunk, b: BlockId, ofs: MachineInt) -> Result<Value, EvalError> {
        self.check_access(chunk, b, ofs)?;
        let blk = &self.blocks[&b];
        Ok(match blk.cells.get(&ofs.bits()) {
            Some(c) if c.chunk == chunk => c.value,
            _ => Value::Undef,
        })
    }

    pub fn store(
        &mut self,
        chunk: MemChunk,
        b: BlockId,
        ofs: MachineInt,
        v: Value,
    ) -> Result<(), EvalError> {
        self.check_access(chunk, b, ofs)?;
        let start = ofs.bits();
        let end = start + chunk.size();
        let blk = self.blocks.get_mut(&b).expect("checked above");
        // Drop every cell overlapping the written range.
        blk.cells.retain(|&o, c| o + c.chunk.size() <= start || o >= end);
        blk.cells.insert(
            start,
            Cell {
                chunk,
                value: normalize(chunk, v),
            },
        );
        Ok(())
    }
}

/// Value as observed after a store through `chunk`.
pub fn normalize(chunk: MemChunk, v: Value) -> Value {
    match (v, chunk.normalizer()) {
        (Value::Int(i), Some(op)) => Value::Int(eval_unop(op, i)),
        (Value::Int(i), None) => Value::Int(i),
        (Value::Ptr(b, o), None) => Value::Ptr(b, o),
        _ => Value::Undef,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalError {
    Arith(ArithError),
    UnknownSymbol,
    InvalidAddress,
    /// A conditional expression whose guard is not an integer.
    UndefinedGuard,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Arith(e) => write!(f, "{e}"),
            EvalError::UnknownSymbol => f.write_str("unknown symbol"),
            EvalError::InvalidAddress => f.write_str("invalid memory access"),
            EvalError::UndefinedGuard => f.write_str("guard is not an integer"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub function: String,
    /// Node to resume at once the callee returns.
    pub resume: NodeId,
    pub dest: Option<VarId>,
    pub env: Env,
    pub stack_block: BlockId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteState {
    pub function: String,
    pub pc: NodeId,
    pub env: Env,
    pub mem: Memory,
    pub stack_block: BlockId,
    pub callers: Vec<Frame>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StuckReason {
    Eval(EvalError),
    GuardNotInt,
    NotAFunction,
    ArityMismatch,
    MissingNode(NodeId),
    OutOfFuel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Next(ConcreteState),
    Finished(Option<Value>),
    Stuck(StuckReason),
}

pub fn eval_expr(state: &ConcreteState, e: &Expr) -> Result<Value, EvalError> {
    eval_in(&state.env, &state.mem, state.stack_block, e)
}

fn eval_in(env: &Env, mem: &Memory, sp: BlockId, e: &Expr) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Var(x) => env.get(x).copied().unwrap_or(Value::Undef),
        Expr::Const(Constant::Int(n)) => Value::Int(*n),
        Expr::Const(Constant::AddrStack(n)) => Value::Ptr(sp, *n),
        Expr::Const(Constant::AddrSymbol(id, n)) => {
            Value::Ptr(mem.symbol(id).ok_or(EvalError::UnknownSymbol)?, *n)
        }
        Expr::Unop(op, a) => match eval_in(env, mem, sp, a)? {
            Value::Int(i) => Value::Int(eval_unop(*op, i)),
            _ => Value::Undef,
        },
        Expr::Binop(op, a, b) => {
            let va = eval_in(env, mem, sp, a)?;
            let vb = eval_in(env, mem, sp, b)?;
            eval_binop_value(*op, va, vb)?
        }
        Expr::Cond(g, a, b) => match eval_in(env, mem, sp, g)? {
            Value::Int(i) if !i.is_zero() => eval_in(env, mem, sp, a)?,
            Value::Int(_) => eval_in(env, mem, sp, b)?,
            _ => return Err(EvalError::UndefinedGuard),
        },
        Expr::Load(chunk, a) => match eval_in(env, mem, sp, a)? {
            Value::Ptr(blk, ofs) => mem.load(*chunk, blk, ofs)?,
            _ => return Err(EvalError::InvalidAddress),
        },
    })
}

/// Binary operators on values. Pointers only support offsetting by an
/// integer, unsigned comparison within one block, and unsigned equality
/// with zero; anything else involving a pointer or `Undef` is `Undef`.
pub fn eval_binop_value(op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
    let add = |x: MachineInt, y: MachineInt| eval_binop(BinOp::Add, x, y).expect("total");
    let sub = |x: MachineInt, y: MachineInt| eval_binop(BinOp::Sub, x, y).expect("total");
    Ok(match (op, a, b) {
        (_, Value::Int(x), Value::Int(y)) => Value::Int(eval_binop(op, x, y).map_err(EvalError::Arith)?),
        (BinOp::Add, Value::Ptr(blk, o), Value::Int(i)) | (BinOp::Add, Value::Int(i), Value::Ptr(blk, o)) => {
            Value::Ptr(blk, add(o, i))
        }
        (BinOp::Sub, Value::Ptr(blk, o), Value::Int(i)) => Value::Ptr(blk, sub(o, i)),
        (BinOp::CmpU(c), Value::Ptr(b1, o1), Value::Ptr(b2, o2)) if b1 == b2 => {
            Value::Int(eval_binop(BinOp::CmpU(c), o1, o2).map_err(EvalError::Arith)?)
        }
        // A pointer is never null.
        (BinOp::CmpU(c @ (Comparison::Eq | Comparison::Ne)), Value::Int(z), Value::Ptr(..))
        | (BinOp::CmpU(c @ (Comparison::Eq | Comparison::Ne)), Value::Ptr(..), Value::Int(z))
            if z.is_zero() =>
        {
            Value::Int(MachineInt::from_bool(c == Comparison::Ne))
        }
        _ => Value::Undef,
    })
}

/// Builds the memory for `program`: one block per global, one pseudo-block
/// per function symbol.
pub fn initial_memory(program: &CfgProgram) -> Memory {
    let mut mem = Memory::default();
    for (name, size) in &program.globals {
        let b = mem.alloc(*size, None);
        mem.symbols.insert(name.clone(), b);
    }
    for name in program.functions.keys() {
        let b = mem.alloc(0, Some(name.clone()));
        mem.symbols.insert(name.clone(), b);
    }
    mem
}

fn bind_params(f: &CfgFunction, args: &BTreeMap<VarId, Value>) -> Env {
    f.params
        .iter()
        .map(|p| (*p, args.get(p).copied().unwrap_or(Value::Undef)))
        .collect()
}

/// Entry state of `function`; parameters take their value from `args`,
/// every other variable is undefined.
pub fn initial_state(
    program: &CfgProgram,
    function: &str,
    args: &BTreeMap<VarId, Value>,
) -> Option<ConcreteState> {
    let f = program.functions.get(function)?;
    let mut mem = initial_memory(program);
    let sp = mem.alloc(f.stacksize, None);
    Some(ConcreteState {
        function: function.into(),
        pc: f.entry,
        env: bind_params(f, args),
        mem,
        stack_block: sp,
        callers: Vec::new(),
    })
}

pub fn step(state: &ConcreteState, program: &CfgProgram) -> Step {
    let stuck = |r| Step::Stuck(r);
    let Some(f) = program.functions.get(&state.function) else {
        return stuck(StuckReason::MissingNode(state.pc));
    };
    let Some(instr) = f.graph.get(&state.pc) else {
        return stuck(StuckReason::MissingNode(state.pc));
    };
    let eval = |e: &Expr| eval_expr(state, e).map_err(StuckReason::Eval);
    let goto = |pc: NodeId, env: Env, mem: Memory| {
        Step::Next(ConcreteState {
            function: state.function.clone(),
            pc,
            env,
            mem,
            stack_block: state.stack_block,
            callers: state.callers.clone(),
        })
    };
    match instr {
        Instruction::Skip(l) => goto(*l, state.env.clone(), state.mem.clone()),
        Instruction::Assign(x, e, l) => match eval(e) {
            Ok(v) => {
                let mut env = state.env.clone();
                env.insert(*x, v);
                goto(*l, env, state.mem.clone())
            }
            Err(r) => stuck(r),
        },
        Instruction::Store(chunk, a, v, l) => {
            let (addr, val) = match (eval(a), eval(v)) {
                (Ok(a), Ok(v)) => (a, v),
                (Err(r), _) | (_, Err(r)) => return stuck(r),
            };
            let Value::Ptr(b, ofs) = addr else {
                return stuck(StuckReason::Eval(EvalError::InvalidAddress));
            };
            let mut mem = state.mem.clone();
            match mem.store(*chunk, b, ofs, val) {
                Ok(()) => goto(*l, state.env.clone(), mem),
                Err(e) => stuck(StuckReason::Eval(e)),
            }
        }
        Instruction::If(e, t, fl) => match eval(e) {
            Ok(Value::Int(i)) => {
                let l = if i.is_zero() { *fl } else { *t };
                goto(l, state.env.clone(), state.mem.clone())
            }
            Ok(_) => stuck(StuckReason::GuardNotInt),
            Err(r) => stuck(r),
        },
        Instruction::Call {
            dest,
            callee,
            args,
            next,
            ..
        } => {
            let target = match eval(callee) {
                Ok(Value::Ptr(b, ofs)) if ofs.is_zero() => state.mem.function_at(b),
                Ok(_) => None,
                Err(r) => return stuck(r),
            };
            let Some((gname, g)) = target.and_then(|n| program.functions.get_key_value(n)) else {
                return stuck(StuckReason::NotAFunction);
            };
            if args.len() != g.params.len() {
                return stuck(StuckReason::ArityMismatch);
            }
            if state.callers.len() >= MAX_CALL_DEPTH {
                return stuck(StuckReason::OutOfFuel);
            }
            let mut actuals = BTreeMap::new();
            for (p, a) in g.params.iter().zip(args) {
                match eval(a) {
                    Ok(v) => {
                        actuals.insert(*p, v);
                    }
                    Err(r) => return stuck(r),
                }
            }
            let mut mem = state.mem.clone();
            let sp = mem.alloc(g.stacksize, None);
            let mut callers = state.callers.clone();
            callers.push(Frame {
                function: state.function.clone(),
                resume: *next,
                dest: *dest,
                env: state.env.clone(),
                stack_block: state.stack_block,
            });
            Step::Next(ConcreteState {
                function: gname.clone(),
                pc: g.entry,
                env: bind_params(g, &actuals),
                mem,
                stack_block: sp,
                callers,
            })
        }
        Instruction::Return(e) => {
            let ret = match e {
                Some(e) => match eval(e) {
                    Ok(v) => Some(v),
                    Err(r) => return stuck(r),
                },
                None => None,
            };
            let mut mem = state.mem.clone();
            mem.free(state.stack_block);
            let mut callers = state.callers.clone();
            match callers.pop() {
                None => Step::Finished(ret),
                Some(frame) => {
                    let mut env = frame.env;
                    if let Some(d) = frame.dest {
                        env.insert(d, ret.unwrap_or(Value::Undef));
                    }
                    Step::Next(ConcreteState {
                        function: frame.function,
                        pc: frame.resume,
                        env,
                        mem,
                        stack_block: frame.stack_block,
                        callers,
                    })
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEnd {
    Finished(Option<Value>),
    Stuck(StuckReason),
    /// The fuel ran out before the program stopped.
    Truncated,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub states: Vec<ConcreteState>,
    pub end: TraceEnd,
}

/// Runs `function` for at most `fuel` steps. The result starts with the
/// initial state and has at most `fuel + 1` states.
pub fn trace(program: &CfgProgram, function: &str, args: &BTreeMap<VarId, Value>, fuel: usize) -> Trace {
    let Some(init) = initial_state(program, function, args) else {
        return Trace {
            states: Vec::new(),
            end: TraceEnd::Stuck(StuckReason::NotAFunction),
        };
    };
    let mut states = alloc::vec![init];
    for _ in 0..fuel {
        match step(states.last().expect("non-empty"), program) {
            Step::Next(s) => states.push(s),
            Step::Finished(v) => {
                return Trace {
                    states,
                    end: TraceEnd::Finished(v),
                }
            }
            Step::Stuck(r) => {
                return Trace {
                    states,
                    end: TraceEnd::Stuck(r),
                }
            }
        }
    }
    Trace {
        states,
        end: TraceEnd::Truncated,
    }
}
