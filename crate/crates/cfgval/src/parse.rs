//! Parser for the `.cfg` text format. See the README for the grammar.

use std::collections::{BTreeMap, BTreeSet};

use cfgval_core::ir::{
    CfgFunction, CfgProgram, Constant, Expr, Instruction, MemChunk, NodeId, SemanticError, Signature, VarId,
};
use cfgval_core::machine_int::{BinOp, Comparison, MachineInt, UnOp, MAX_UNSIGNED, MIN_SIGNED};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Semantic(#[from] SemanticError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(i128),
    Ident(String),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

/// Longest first, so that `>>u` wins over `>>` and `>`.
const SYMBOLS: &[&str] = &[
    ">>u", "==u", "!=u", "<=u", ">=u", "->", "<<", ">>", "==", "!=", "<=", ">=", "/u", "%u", "<u", ">u", "+", "-",
    "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "?", ":", ";", ",", "(", ")", "{", "}", "[", "]", "=", "@",
];

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$' || c == '.'
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            let radix = if c == '0' && matches!(chars.get(i + 1), Some('x' | 'X')) {
                i += 2;
                16
            } else {
                10
            };
            let digits_start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let text: String = chars[digits_start..i].iter().collect();
            let n = i128::from_str_radix(&text, radix)
                .map_err(|_| err(l0, c0, format!("invalid integer literal `{}`", chars[start..i].iter().collect::<String>())))?;
            col += i - start;
            out.push(Token { tok: Tok::Int(n), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c == '"' {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if chars.get(i) != Some(&'"') {
                return Err(err(l0, c0, "unterminated string".into()));
            }
            i += 1;
            col += i - start;
            out.push(Token {
                tok: Tok::Str(chars[start + 1..i - 1].iter().collect()),
                line: l0,
                col: c0,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let sym = SYMBOLS.iter().find(|s| {
            rest.starts_with(**s)
                // `x <u y` is unsigned, but in `x <u1` the `u` starts a name.
                && !(s.ends_with('u') && chars.get(i + s.len()).is_some_and(|c| is_ident_char(*c)))
        });
        match sym {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), line: l0, col: c0 });
            }
            None => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Per-function variable naming.
#[derive(Default)]
struct Scope {
    ids: BTreeMap<String, VarId>,
    next: u32,
}

impl Scope {
    fn declare(&mut self, name: &str, id: VarId) {
        self.ids.insert(name.to_string(), id);
        self.next = self.next.max(id.0 + 1);
    }

    fn lookup_or_create(&mut self, name: &str) -> VarId {
        if let Some(id) = self.ids.get(name) {
            return *id;
        }
        let id = VarId(self.next.max(1));
        self.declare(name, id);
        id
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    globals: &'a BTreeSet<String>,
    scope: Scope,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), ParseError> {
        if self.is_kw(k) {
            self.next();
            Ok(())
        } else {
            self.error(format!("expected `{k}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            t => self.error(format!("expected a name, found {}", describe(&t))),
        }
    }

    fn uint(&mut self, max: i128) -> Result<i128, ParseError> {
        match *self.peek() {
            Tok::Int(n) if n <= max => {
                self.next();
                Ok(n)
            }
            Tok::Int(_) => self.error("number out of range"),
            ref t => self.error(format!("expected a number, found {}", describe(t))),
        }
    }

    fn node_id(&mut self) -> Result<NodeId, ParseError> {
        match *self.peek() {
            Tok::Int(n) if n >= 1 && n <= u32::MAX as i128 => {
                self.next();
                Ok(NodeId(n as u32))
            }
            _ => self.error(format!("expected a positive node label, found {}", describe(self.peek()))),
        }
    }

    /// An integer literal, with an optional leading minus.
    fn machine_int(&mut self) -> Result<MachineInt, ParseError> {
        let neg = self.eat_sym("-");
        let n = self.uint(i128::MAX)?;
        int_literal(if neg { -n } else { n }).map_or_else(|| self.error("integer literal out of 32-bit range"), Ok)
    }

    fn program(&mut self) -> Result<CfgProgram, ParseError> {
        let mut p = CfgProgram::default();
        let mut bare: Option<CfgFunction> = None;
        while *self.peek() != Tok::Eof {
            if self.is_kw("global") {
                self.next();
                let name = self.ident()?;
                let size = if self.eat_sym("[") {
                    let n = self.uint(u32::MAX as i128)? as u32;
                    self.expect_sym("]")?;
                    n
                } else {
                    0
                };
                self.eat_sym(";");
                if p.globals.insert(name.clone(), size).is_some() {
                    return Err(SemanticError::DuplicateSymbol(name).into());
                }
            } else if self.is_kw("function") {
                if bare.is_some() {
                    return self.error("instructions outside a function cannot be mixed with function blocks");
                }
                let (name, f) = self.function()?;
                if p.functions.contains_key(&name) {
                    return Err(SemanticError::DuplicateSymbol(name).into());
                }
                p.functions.insert(name, f);
            } else {
                if !p.functions.is_empty() {
                    return self.error(format!("expected `function` or `global`, found {}", describe(self.peek())));
                }
                let f = bare.get_or_insert_with(|| CfgFunction::new(NodeId(0)));
                let first = self.instruction_into(f, "main")?;
                if f.entry == NodeId(0) {
                    f.entry = first;
                }
            }
        }
        if let Some(mut f) = bare {
            if p.functions.contains_key("main") {
                return Err(SemanticError::DuplicateSymbol("main".into()).into());
            }
            f.var_names = self.take_names();
            p.functions.insert("main".into(), f);
        }
        p.validate()?;
        Ok(p)
    }

    fn take_names(&mut self) -> BTreeMap<VarId, String> {
        std::mem::take(&mut self.scope).ids.into_iter().map(|(n, id)| (id, n)).collect()
    }

    fn function(&mut self) -> Result<(String, CfgFunction), ParseError> {
        self.expect_kw("function")?;
        let name = self.ident()?;
        self.scope = Scope::default();
        let mut f = CfgFunction::new(NodeId(0));
        let mut params_named = Vec::new();
        self.expect_sym("(")?;
        if !self.is_sym(")") {
            loop {
                params_named.push(self.ident()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        let mut entry = None;
        loop {
            if self.is_kw("stack") {
                self.next();
                f.stacksize = self.uint(u32::MAX as i128)? as u32;
            } else if self.is_kw("entry") {
                self.next();
                entry = Some(self.node_id()?);
            } else {
                break;
            }
        }
        self.expect_sym("{")?;
        if self.is_kw("vars") {
            self.next();
            while let Tok::Ident(n) = self.peek().clone() {
                self.next();
                self.expect_sym("=")?;
                let id = self.uint(u32::MAX as i128)? as u32;
                if id == 0 {
                    return self.error("variable ids are positive");
                }
                if self.scope.ids.contains_key(&n) || self.scope.ids.values().any(|v| v.0 == id) {
                    return self.error(format!("variable `{n}` or id {id} declared twice"));
                }
                self.scope.declare(&n, VarId(id));
            }
            self.eat_sym(";");
        }
        f.params = params_named.iter().map(|n| self.scope.lookup_or_create(n)).collect();
        let mut first = None;
        while !self.is_sym("}") {
            if *self.peek() == Tok::Eof {
                return self.error("unexpected end of input in function body");
            }
            let n = self.instruction_into(&mut f, &name)?;
            first.get_or_insert(n);
        }
        self.expect_sym("}")?;
        f.entry = match (entry, first) {
            (Some(e), _) | (None, Some(e)) => e,
            (None, None) => return self.error(format!("function `{name}` has no instructions")),
        };
        f.var_names = self.take_names();
        Ok((name, f))
    }

    /// Parses `[@report] N: instr [;]` and adds it to `f`.
    fn instruction_into(&mut self, f: &mut CfgFunction, fname: &str) -> Result<NodeId, ParseError> {
        let report = if self.eat_sym("@") {
            self.expect_kw("report")?;
            true
        } else {
            false
        };
        let n = self.node_id()?;
        self.expect_sym(":")?;
        let instr = self.instruction()?;
        self.eat_sym(";");
        if f.graph.insert(n, instr).is_some() {
            return Err(SemanticError::DuplicateNode {
                function: fname.into(),
                node: n,
            }
            .into());
        }
        if report {
            f.report_nodes.insert(n);
        }
        Ok(n)
    }

    fn arrow(&mut self) -> Result<NodeId, ParseError> {
        self.expect_sym("->")?;
        self.node_id()
    }

    fn instruction(&mut self) -> Result<Instruction, ParseError> {
        if self.is_kw("skip") {
            self.next();
            return Ok(Instruction::Skip(self.arrow()?));
        }
        if self.is_kw("store") && matches!(self.peek_at(1), Tok::Sym("(")) {
            self.next();
            self.expect_sym("(")?;
            let chunk = self.chunk()?;
            self.expect_sym(",")?;
            let a = self.expr()?;
            self.expect_sym(",")?;
            let v = self.expr()?;
            self.expect_sym(")")?;
            return Ok(Instruction::Store(chunk, a, v, self.arrow()?));
        }
        if self.is_kw("if") && !matches!(self.peek_at(1), Tok::Sym("=")) {
            self.next();
            let e = self.expr()?;
            self.expect_sym("->")?;
            let t = self.node_id()?;
            self.expect_sym(",")?;
            let f = self.node_id()?;
            return Ok(Instruction::If(e, t, f));
        }
        if self.is_kw("call") && !matches!(self.peek_at(1), Tok::Sym("=")) {
            self.next();
            let sig = match self.peek().clone() {
                Tok::Str(s) => {
                    self.next();
                    Signature(s)
                }
                _ => Signature::default(),
            };
            let dest = if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym("=")) {
                let name = self.ident()?;
                self.next();
                Some(self.scope.lookup_or_create(&name))
            } else {
                None
            };
            let callee = self.callee()?;
            self.expect_sym("(")?;
            let mut args = Vec::new();
            if !self.is_sym(")") {
                loop {
                    args.push(self.expr()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
            let next = self.arrow()?;
            return Ok(Instruction::Call {
                sig,
                dest,
                callee,
                args,
                next,
            });
        }
        if self.is_kw("return") && !matches!(self.peek_at(1), Tok::Sym("=")) {
            self.next();
            let ends = matches!(self.peek(), Tok::Sym(";" | "}") | Tok::Eof)
                || matches!(self.peek(), Tok::Sym("@"))
                || (matches!(self.peek(), Tok::Int(_)) && matches!(self.peek_at(1), Tok::Sym(":")));
            return Ok(Instruction::Return(if ends { None } else { Some(self.expr()?) }));
        }
        let name = self.ident()?;
        self.expect_sym("=")?;
        let x = self.scope.lookup_or_create(&name);
        let e = self.expr()?;
        Ok(Instruction::Assign(x, e, self.arrow()?))
    }

    /// A bare name that is not a local variable denotes a symbol.
    fn callee(&mut self) -> Result<Expr, ParseError> {
        if let Tok::Ident(n) = self.peek().clone() {
            if matches!(self.peek_at(1), Tok::Sym("(")) && !self.scope.ids.contains_key(&n) && !is_builtin(&n) {
                if !self.globals.contains(&n) {
                    return Err(SemanticError::UnknownSymbol(n).into());
                }
                self.next();
                return Ok(Expr::Const(Constant::AddrSymbol(n, MachineInt::ZERO)));
            }
        }
        self.unary()
    }

    fn chunk(&mut self) -> Result<MemChunk, ParseError> {
        let name = self.ident()?;
        MemChunk::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(&name))
            .map_or_else(|| self.error(format!("unknown memory chunk `{name}`")), Ok)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let g = self.binary(0)?;
        if self.eat_sym("?") {
            let a = self.expr()?;
            self.expect_sym(":")?;
            let b = self.expr()?;
            return Ok(Expr::cond(g, a, b));
        }
        Ok(g)
    }

    fn binary(&mut self, level: usize) -> Result<Expr, ParseError> {
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Sym(s) => LEVELS[level].iter().find(|(sym, _)| sym == s).map(|(_, op)| *op),
                _ => None,
            };
            let Some(op) = op else { return Ok(lhs) };
            self.next();
            let rhs = self.binary(level + 1)?;
            lhs = Expr::binop(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_sym("-") {
            if matches!(self.peek_at(1), Tok::Int(_)) {
                return Ok(Expr::Const(Constant::Int(self.machine_int()?)));
            }
            self.next();
            return Ok(Expr::unop(UnOp::NegInt, self.unary()?));
        }
        if self.eat_sym("~") {
            return Ok(Expr::unop(UnOp::NotInt, self.unary()?));
        }
        if self.eat_sym("!") {
            return Ok(Expr::unop(UnOp::NotBool, self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(_) => Ok(Expr::Const(Constant::Int(self.machine_int()?))),
            Tok::Sym("(") => {
                self.next();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let call_like = matches!(self.peek_at(1), Tok::Sym("("));
                if call_like {
                    if let Some(op) = UnOp::ALL.into_iter().find(|op| op.name() == name) {
                        self.next();
                        self.expect_sym("(")?;
                        let e = self.expr()?;
                        self.expect_sym(")")?;
                        return Ok(Expr::unop(op, e));
                    }
                    match name.as_str() {
                        "addrsymbol" => {
                            self.next();
                            self.expect_sym("(")?;
                            let id = self.ident()?;
                            let ofs = if self.eat_sym(",") { self.machine_int()? } else { MachineInt::ZERO };
                            self.expect_sym(")")?;
                            if !self.globals.contains(&id) {
                                return Err(SemanticError::UnknownSymbol(id).into());
                            }
                            return Ok(Expr::Const(Constant::AddrSymbol(id, ofs)));
                        }
                        "addrstack" => {
                            self.next();
                            self.expect_sym("(")?;
                            let ofs = self.machine_int()?;
                            self.expect_sym(")")?;
                            return Ok(Expr::Const(Constant::AddrStack(ofs)));
                        }
                        "load" => {
                            self.next();
                            self.expect_sym("(")?;
                            let chunk = self.chunk()?;
                            self.expect_sym(",")?;
                            let a = self.expr()?;
                            self.expect_sym(")")?;
                            return Ok(Expr::load(chunk, a));
                        }
                        _ => {}
                    }
                }
                self.next();
                Ok(Expr::Var(self.scope.lookup_or_create(&name)))
            }
            t => self.error(format!("expected an expression, found {}", describe(&t))),
        }
    }
}

fn is_builtin(name: &str) -> bool {
    matches!(name, "addrsymbol" | "addrstack" | "load") || UnOp::ALL.iter().any(|op| op.name() == name)
}

/// Accepts the union of both readings of a 32-bit word.
fn int_literal(n: i128) -> Option<MachineInt> {
    (MIN_SIGNED as i128..=MAX_UNSIGNED as i128)
        .contains(&n)
        .then(|| MachineInt::wrap(n))
}

/// Binary operators from loosest to tightest binding.
const LEVELS: &[&[(&str, BinOp)]] = {
    use BinOp::*;
    use Comparison::*;
    &[
        &[("|", Or)],
        &[("^", Xor)],
        &[("&", And)],
        &[("==", Cmp(Eq)), ("!=", Cmp(Ne)), ("==u", CmpU(Eq)), ("!=u", CmpU(Ne))],
        &[
            ("<", Cmp(Lt)),
            ("<=", Cmp(Le)),
            (">", Cmp(Gt)),
            (">=", Cmp(Ge)),
            ("<u", CmpU(Lt)),
            ("<=u", CmpU(Le)),
            (">u", CmpU(Gt)),
            (">=u", CmpU(Ge)),
        ],
        &[("<<", Shl), (">>", Shr), (">>u", ShrU)],
        &[("+", Add), ("-", Sub)],
        &[("*", Mul), ("/", Div), ("%", Mod), ("/u", DivU), ("%u", ModU)],
    ]
};

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("`{n}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Global and function names declared anywhere in the file, so that
/// `addrsymbol` may refer to functions defined later.
fn collect_symbols(toks: &[Token]) -> BTreeSet<String> {
    toks.windows(2)
        .filter_map(|w| match (&w[0].tok, &w[1].tok) {
            (Tok::Ident(k), Tok::Ident(n)) if k == "global" || k == "function" => Some(n.clone()),
            _ => None,
        })
        .collect()
}

pub fn parse(src: &str) -> Result<CfgProgram, ParseError> {
    let toks = lex(src)?;
    let globals = collect_symbols(&toks);
    let mut p = Parser {
        toks,
        pos: 0,
        globals: &globals,
        scope: Scope::default(),
    };
    p.program()
}
