//! Program generators: small random programs for differential testing
//! against the interpreter, and large structured functions for timing.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use cfgval_core::concrete::Value;
use cfgval_core::ir::{CfgFunction, CfgProgram, Constant, Expr, Instruction, MemChunk, NodeId, Signature, VarId};
use cfgval_core::machine_int::{BinOp, Comparison, MachineInt, UnOp, MAX_SIGNED, MIN_SIGNED};

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_vars: u32,
    pub max_nodes: u32,
    pub max_depth: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_vars: 8,
            max_nodes: 30,
            max_depth: 4,
        }
    }
}

const GLOBAL: &str = "g";
const HELPER: &str = "helper";

/// Integers near the points where readings change or operators misbehave.
const INTERESTING: &[i64] = &[
    0,
    1,
    -1,
    2,
    7,
    10,
    255,
    256,
    65535,
    -128,
    MAX_SIGNED,
    MIN_SIGNED,
    MAX_SIGNED - 1,
    MIN_SIGNED + 1,
    1 << 31,
    (1 << 32) - 2,
];

pub fn random_int<R: Rng>(rng: &mut R) -> MachineInt {
    match rng.gen_range(0..4) {
        0 => MachineInt::from_i64(*INTERESTING.choose(rng).unwrap()),
        1 => MachineInt::from_i64(rng.gen_range(-20..=20)),
        2 => MachineInt::from_i64(rng.gen_range(-1000..=1000)),
        _ => MachineInt::from_bits(rng.gen()),
    }
}

struct ExprGen<'a> {
    vars: &'a [VarId],
    max_depth: u32,
}

impl ExprGen<'_> {
    fn leaf<R: Rng>(&self, rng: &mut R) -> Expr {
        match rng.gen_range(0..20) {
            0..=11 => Expr::Var(*self.vars.choose(rng).unwrap()),
            12..=17 => Expr::Const(Constant::Int(random_int(rng))),
            18 => Expr::Const(Constant::AddrStack(MachineInt::from_i64(rng.gen_range(0..4) * 4))),
            _ => Expr::Const(Constant::AddrSymbol(
                GLOBAL.into(),
                MachineInt::from_i64(rng.gen_range(0..4) * 4),
            )),
        }
    }

    fn expr<R: Rng>(&self, rng: &mut R, depth: u32) -> Expr {
        if depth >= self.max_depth || rng.gen_bool(0.4) {
            return self.leaf(rng);
        }
        match rng.gen_range(0..20) {
            0..=3 => Expr::unop(*UnOp::ALL.choose(rng).unwrap(), self.expr(rng, depth + 1)),
            4..=16 => {
                let ops: Vec<BinOp> = BinOp::all().collect();
                let op = *ops.choose(rng).unwrap();
                Expr::binop(op, self.expr(rng, depth + 1), self.expr(rng, depth + 1))
            }
            17..=18 => Expr::cond(
                self.guard(rng, depth + 1),
                self.expr(rng, depth + 1),
                self.expr(rng, depth + 1),
            ),
            _ => {
                let chunk = *MemChunk::ALL.choose(rng).unwrap();
                let addr = if rng.gen_bool(0.5) {
                    Expr::Const(Constant::AddrStack(MachineInt::from_i64(rng.gen_range(0..4) * 4)))
                } else {
                    self.expr(rng, depth + 1)
                };
                Expr::load(chunk, addr)
            }
        }
    }

    /// Mostly comparisons of a variable with a constant or another
    /// variable, so that loops are bounded by guards the analysis refines.
    fn guard<R: Rng>(&self, rng: &mut R, depth: u32) -> Expr {
        if rng.gen_bool(0.2) {
            return self.expr(rng, depth);
        }
        let c = *Comparison::ALL.choose(rng).unwrap();
        let op = if rng.gen_bool(0.7) { BinOp::Cmp(c) } else { BinOp::CmpU(c) };
        let lhs = Expr::Var(*self.vars.choose(rng).unwrap());
        let rhs = if rng.gen_bool(0.6) {
            Expr::Const(Constant::Int(random_int(rng)))
        } else {
            self.expr(rng, depth + 1)
        };
        Expr::binop(op, lhs, rhs)
    }
}

fn name_vars(f: &mut CfgFunction, vars: &[VarId], prefix: &str) {
    for x in vars {
        f.var_names.insert(*x, format!("{prefix}{}", x.0));
    }
}

fn helper<R: Rng>(rng: &mut R, cfg: &GenConfig) -> CfgFunction {
    let (a, r) = (VarId(1), VarId(2));
    let vars = [a, r];
    let g = ExprGen {
        vars: &vars[..1],
        max_depth: cfg.max_depth.min(2),
    };
    let mut f = CfgFunction::new(NodeId(1));
    f.params = vec![a];
    f.graph.insert(NodeId(1), Instruction::Assign(r, g.expr(rng, 0), NodeId(2)));
    f.graph.insert(NodeId(2), Instruction::Return(Some(Expr::Var(r))));
    name_vars(&mut f, &vars, "h");
    f
}

/// A random well-formed program whose `main` takes up to two parameters.
pub fn random_program<R: Rng>(rng: &mut R, cfg: &GenConfig) -> CfgProgram {
    let nvars = rng.gen_range(2..=cfg.max_vars.max(2));
    let vars: Vec<VarId> = (1..=nvars).map(VarId).collect();
    let nparams = rng.gen_range(0..=2.min(nvars as usize));
    let nnodes = rng.gen_range(4..=cfg.max_nodes.max(4));
    let g = ExprGen {
        vars: &vars,
        max_depth: cfg.max_depth,
    };
    let mut f = CfgFunction::new(NodeId(1));
    f.params = vars[..nparams].to_vec();
    f.stacksize = 16;
    let target = |rng: &mut R, i: u32| {
        if rng.gen_bool(0.7) {
            NodeId(i + 1)
        } else {
            NodeId(rng.gen_range(1..=nnodes))
        }
    };
    for i in 1..=nnodes {
        let instr = if i == nnodes {
            Instruction::Return(Some(g.expr(rng, 2)))
        } else if i <= nvars && rng.gen_bool(0.6) {
            // Initialize most variables up front so runs compute on values.
            Instruction::Assign(vars[(i - 1) as usize], Expr::Const(Constant::Int(random_int(rng))), NodeId(i + 1))
        } else {
            match rng.gen_range(0..100) {
                0..=44 => {
                    let x = *vars.choose(rng).unwrap();
                    let e = if rng.gen_bool(0.3) {
                        // Counters drive loops through widening.
                        let step = Expr::int(rng.gen_range(-3..=5));
                        Expr::binop(BinOp::Add, Expr::Var(x), step)
                    } else {
                        g.expr(rng, 0)
                    };
                    Instruction::Assign(x, e, target(rng, i))
                }
                45..=69 => {
                    let (t, e) = (target(rng, i), target(rng, i));
                    let (t, e) = if rng.gen_bool(0.5) { (t, NodeId(i + 1)) } else { (NodeId(i + 1), e) };
                    Instruction::If(g.guard(rng, 0), t, e)
                }
                70..=74 => Instruction::Skip(target(rng, i)),
                75..=84 => {
                    let addr = if rng.gen_bool(0.7) {
                        Expr::Const(Constant::AddrStack(MachineInt::from_i64(rng.gen_range(0..4) * 4)))
                    } else {
                        g.expr(rng, 1)
                    };
                    Instruction::Store(*MemChunk::ALL.choose(rng).unwrap(), addr, g.expr(rng, 1), target(rng, i))
                }
                85..=94 => Instruction::Call {
                    sig: Signature("int -> int".into()),
                    dest: rng.gen_bool(0.8).then(|| *vars.choose(rng).unwrap()),
                    callee: Expr::Const(Constant::AddrSymbol(HELPER.into(), MachineInt::ZERO)),
                    args: vec![g.expr(rng, 2)],
                    next: target(rng, i),
                },
                _ => Instruction::Return(Some(Expr::Var(*vars.choose(rng).unwrap()))),
            }
        };
        f.graph.insert(NodeId(i), instr);
    }
    name_vars(&mut f, &vars, "x");
    let mut p = CfgProgram::default();
    p.globals.insert(GLOBAL.into(), 16);
    p.functions.insert("main".into(), f);
    p.functions.insert(HELPER.into(), helper(rng, cfg));
    p
}

/// Random arguments for the parameters of `f`.
pub fn random_args<R: Rng>(rng: &mut R, f: &CfgFunction) -> BTreeMap<VarId, Value> {
    f.params.iter().map(|x| (*x, Value::Int(random_int(rng)))).collect()
}

/// Emits consecutive nodes of one function.
struct Builder {
    f: CfgFunction,
    next: u32,
}

impl Builder {
    fn fresh(&mut self) -> NodeId {
        let n = NodeId(self.next);
        self.next += 1;
        n
    }

    fn put(&mut self, n: NodeId, i: Instruction) {
        self.f.graph.insert(n, i);
    }
}

/// A function of about `size` instructions made of triply nested counted
/// loops with straight-line bodies.
pub fn synthetic_nested_loops<R: Rng>(rng: &mut R, size: usize) -> CfgProgram {
    const NVARS: u32 = 24;
    let vars: Vec<VarId> = (1..=NVARS).map(VarId).collect();
    let (i, j, k) = (vars[0], vars[1], vars[2]);
    let data = &vars[3..];
    let mut b = Builder {
        f: CfgFunction::new(NodeId(1)),
        next: 1,
    };
    b.f.params = vec![data[0], data[1]];
    let lt = |x: VarId, e: Expr| Expr::binop(BinOp::Cmp(Comparison::Lt), Expr::Var(x), e);
    let inc = |x: VarId| Expr::binop(BinOp::Add, Expr::Var(x), Expr::int(1));
    let g = ExprGen {
        vars: data,
        max_depth: 2,
    };

    let mut cur = b.fresh();
    while b.f.graph.len() + 12 < size {
        let body_len = rng.gen_range(5..=30).min(size.saturating_sub(b.f.graph.len() + 12).max(1));
        // i = 0; while (i < n1) { j = 0; while (j < i) { k = j; while (k < n3) { body; k++ } j++ } i++ }
        let h1 = b.fresh();
        b.put(cur, Instruction::Assign(i, Expr::int(0), h1));
        let (b1, h2, b2, h3, b3, e2, e3) = (b.fresh(), b.fresh(), b.fresh(), b.fresh(), b.fresh(), b.fresh(), b.fresh());
        let exit = b.fresh();
        b.put(h1, Instruction::If(lt(i, Expr::int(rng.gen_range(2..200))), b1, exit));
        b.put(b1, Instruction::Assign(j, Expr::int(0), h2));
        b.put(h2, Instruction::If(lt(j, Expr::Var(i)), b2, e2));
        b.put(b2, Instruction::Assign(k, Expr::Var(j), h3));
        b.put(h3, Instruction::If(lt(k, Expr::int(rng.gen_range(2..500))), b3, e3));
        let mut at = b3;
        for _ in 0..body_len {
            let next = b.fresh();
            let x = *data.choose(rng).unwrap();
            let instr = match rng.gen_range(0..10) {
                0 => {
                    let skip = b.fresh();
                    b.put(skip, Instruction::Skip(next));
                    Instruction::If(g.guard(rng, 0), skip, next)
                }
                1..=3 => Instruction::Assign(x, Expr::binop(BinOp::Add, Expr::Var(x), Expr::Var(k)), next),
                _ => Instruction::Assign(x, g.expr(rng, 0), next),
            };
            b.put(at, instr);
            at = next;
        }
        b.put(at, Instruction::Assign(k, inc(k), h3));
        b.put(e3, Instruction::Assign(j, inc(j), h2));
        b.put(e2, Instruction::Assign(i, inc(i), h1));
        cur = exit;
    }
    b.put(cur, Instruction::Return(Some(Expr::Var(data[0]))));
    let mut f = b.f;
    name_vars(&mut f, &vars, "v");
    let mut p = CfgProgram::default();
    p.functions.insert("main".into(), f);
    p
}
