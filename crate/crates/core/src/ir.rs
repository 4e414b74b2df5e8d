//! The CFG intermediate language: side-effect free expressions, and functions
//! represented as graphs from node labels to instructions.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::machine_int::{BinOp, MachineInt, UnOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constant {
    Int(MachineInt),
    /// Address of a global symbol plus an offset.
    AddrSymbol(String, MachineInt),
    /// The current stack block plus an offset.
    AddrStack(MachineInt),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MemChunk {
    Mint8Signed,
    Mint8Unsigned,
    Mint16Signed,
    Mint16Unsigned,
    Mint32,
}

impl MemChunk {
    pub const ALL: [MemChunk; 5] = [
        MemChunk::Mint8Signed,
        MemChunk::Mint8Unsigned,
        MemChunk::Mint16Signed,
        MemChunk::Mint16Unsigned,
        MemChunk::Mint32,
    ];

    pub fn size(self) -> u32 {
        match self {
            MemChunk::Mint8Signed | MemChunk::Mint8Unsigned => 1,
            MemChunk::Mint16Signed | MemChunk::Mint16Unsigned => 2,
            MemChunk::Mint32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MemChunk::Mint8Signed => "Mint8signed",
            MemChunk::Mint8Unsigned => "Mint8unsigned",
            MemChunk::Mint16Signed => "Mint16signed",
            MemChunk::Mint16Unsigned => "Mint16unsigned",
            MemChunk::Mint32 => "Mint32",
        }
    }

    /// The extension applied to integers stored or loaded through this chunk.
    pub fn normalizer(self) -> Option<UnOp> {
        match self {
            MemChunk::Mint8Signed => Some(UnOp::Cast8Signed),
            MemChunk::Mint8Unsigned => Some(UnOp::Cast8Unsigned),
            MemChunk::Mint16Signed => Some(UnOp::Cast16Signed),
            MemChunk::Mint16Unsigned => Some(UnOp::Cast16Unsigned),
            MemChunk::Mint32 => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var(VarId),
    Const(Constant),
    Unop(UnOp, Box<Expr>),
    Binop(BinOp, Box<Expr>, Box<Expr>),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
    Load(MemChunk, Box<Expr>),
}

impl Expr {
    pub fn var(id: u32) -> Expr {
        Expr::Var(VarId(id))
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Constant::Int(MachineInt::from_i64(n)))
    }

    pub fn unop(op: UnOp, e: Expr) -> Expr {
        Expr::Unop(op, Box::new(e))
    }

    pub fn binop(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binop(op, Box::new(a), Box::new(b))
    }

    pub fn cond(g: Expr, a: Expr, b: Expr) -> Expr {
        Expr::Cond(Box::new(g), Box::new(a), Box::new(b))
    }

    pub fn load(chunk: MemChunk, a: Expr) -> Expr {
        Expr::Load(chunk, Box::new(a))
    }

    /// Variables read by the expression, in first-occurrence order.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<VarId>) {
        match self {
            Expr::Var(x) => {
                if !out.contains(x) {
                    out.push(*x)
                }
            }
            Expr::Const(_) => {}
            Expr::Unop(_, e) | Expr::Load(_, e) => e.collect_vars(out),
            Expr::Binop(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Cond(g, a, b) => {
                g.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// Call signature. Kept as written; the analysis ignores it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature(pub String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instruction {
    Skip(NodeId),
    Assign(VarId, Expr, NodeId),
    Store(MemChunk, Expr, Expr, NodeId),
    If(Expr, NodeId, NodeId),
    Call {
        sig: Signature,
        dest: Option<VarId>,
        callee: Expr,
        args: Vec<Expr>,
        next: NodeId,
    },
    Return(Option<Expr>),
}

impl Instruction {
    pub fn successors(&self) -> Vec<NodeId> {
        match self {
            Instruction::Skip(l)
            | Instruction::Assign(_, _, l)
            | Instruction::Store(_, _, _, l)
            | Instruction::Call { next: l, .. } => alloc::vec![*l],
            Instruction::If(_, t, f) => alloc::vec![*t, *f],
            Instruction::Return(_) => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfgFunction {
    pub params: Vec<VarId>,
    pub stacksize: u32,
    pub entry: NodeId,
    pub graph: BTreeMap<NodeId, Instruction>,
    /// Source names of variables.
    pub var_names: BTreeMap<VarId, String>,
    /// Nodes selected by `@report` markers.
    pub report_nodes: BTreeSet<NodeId>,
}

impl CfgFunction {
    pub fn new(entry: NodeId) -> Self {
        CfgFunction {
            params: Vec::new(),
            stacksize: 0,
            entry,
            graph: BTreeMap::new(),
            var_names: BTreeMap::new(),
            report_nodes: BTreeSet::new(),
        }
    }

    pub fn var_name(&self, x: VarId) -> String {
        match self.var_names.get(&x) {
            Some(n) => n.clone(),
            None => alloc::format!("v{}", x.0),
        }
    }

    /// Every variable that is a parameter, assigned, or read somewhere.
    pub fn variables(&self) -> BTreeSet<VarId> {
        let mut vars: BTreeSet<VarId> = self.params.iter().copied().collect();
        vars.extend(self.var_names.keys().copied());
        let mut add = |e: &Expr| vars.extend(e.vars());
        for instr in self.graph.values() {
            match instr {
                Instruction::Skip(_) => {}
                Instruction::Assign(_, e, _) => add(e),
                Instruction::Store(_, a, v, _) => {
                    add(a);
                    add(v)
                }
                Instruction::If(e, _, _) => add(e),
                Instruction::Call { callee, args, .. } => {
                    add(callee);
                    args.iter().for_each(&mut add);
                }
                Instruction::Return(e) => {
                    if let Some(e) = e {
                        add(e)
                    }
                }
            }
        }
        for instr in self.graph.values() {
            match instr {
                Instruction::Assign(x, _, _) => {
                    vars.insert(*x);
                }
                Instruction::Call { dest: Some(x), .. } => {
                    vars.insert(*x);
                }
                _ => {}
            }
        }
        vars
    }

    /// Nodes reachable from the entry, in depth-first preorder.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        let mut stack = alloc::vec![self.entry];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            order.push(n);
            if let Some(i) = self.graph.get(&n) {
                for s in i.successors().into_iter().rev() {
                    if !seen.contains(&s) {
                        stack.push(s);
                    }
                }
            }
        }
        order
    }

    pub fn validate(&self, name: &str) -> Result<(), SemanticError> {
        if !self.graph.contains_key(&self.entry) {
            return Err(SemanticError::MissingEntry {
                function: name.into(),
                entry: self.entry,
            });
        }
        for (n, i) in &self.graph {
            for s in i.successors() {
                if !self.graph.contains_key(&s) {
                    return Err(SemanticError::DanglingLabel {
                        function: name.into(),
                        node: *n,
                        target: s,
                    });
                }
            }
        }
        for r in &self.report_nodes {
            if !self.graph.contains_key(r) {
                return Err(SemanticError::DanglingLabel {
                    function: name.into(),
                    node: *r,
                    target: *r,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CfgProgram {
    /// Global symbols and the size in bytes of their block.
    pub globals: BTreeMap<String, u32>,
    pub functions: BTreeMap<String, CfgFunction>,
}

impl CfgProgram {
    /// `main` when present, otherwise the first function by name.
    pub fn main_function(&self) -> Option<(&str, &CfgFunction)> {
        self.functions
            .get_key_value("main")
            .or_else(|| self.functions.iter().next())
            .map(|(k, f)| (k.as_str(), f))
    }

    pub fn validate(&self) -> Result<(), SemanticError> {
        for name in self.functions.keys() {
            if self.globals.contains_key(name) {
                return Err(SemanticError::DuplicateSymbol(name.clone()));
            }
        }
        for (name, f) in &self.functions {
            f.validate(name)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SemanticError {
    DanglingLabel {
        function: String,
        node: NodeId,
        target: NodeId,
    },
    DuplicateNode {
        function: String,
        node: NodeId,
    },
    MissingEntry {
        function: String,
        entry: NodeId,
    },
    DuplicateSymbol(String),
    UnknownSymbol(String),
}

impl fmt::Display for SemanticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticError::DanglingLabel { function, node, target } => write!(
                f,
                "in function `{function}`: node {node} refers to missing node {target}"
            ),
            SemanticError::DuplicateNode { function, node } => {
                write!(f, "in function `{function}`: node {node} defined twice")
            }
            SemanticError::MissingEntry { function, entry } => {
                write!(f, "in function `{function}`: entry node {entry} is not defined")
            }
            SemanticError::DuplicateSymbol(s) => write!(f, "symbol `{s}` defined twice"),
            SemanticError::UnknownSymbol(s) => write!(f, "unknown symbol `{s}`"),
        }
    }
}

impl core::error::Error for SemanticError {}
