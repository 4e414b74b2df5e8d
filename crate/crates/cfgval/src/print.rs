//! Printer for the `.cfg` text format. Its output parses back to the same
//! program, provided every variable has a name.

use std::fmt::Write;

use cfgval_core::ir::{CfgFunction, CfgProgram, Constant, Expr, Instruction};

pub fn print_program(p: &CfgProgram) -> String {
    let mut out = String::new();
    for (g, size) in &p.globals {
        writeln!(out, "global {g}[{size}]").unwrap();
    }
    for (name, f) in &p.functions {
        if !out.is_empty() {
            out.push('\n');
        }
        print_function(&mut out, name, f);
    }
    out
}

fn print_function(out: &mut String, name: &str, f: &CfgFunction) {
    let params: Vec<String> = f.params.iter().map(|x| f.var_name(*x)).collect();
    writeln!(
        out,
        "function {name}({}) stack {} entry {} {{",
        params.join(", "),
        f.stacksize,
        f.entry
    )
    .unwrap();
    let vars: Vec<String> = f
        .variables()
        .into_iter()
        .map(|x| format!("{}={}", f.var_name(x), x.0))
        .collect();
    if !vars.is_empty() {
        writeln!(out, "  vars {};", vars.join(" ")).unwrap();
    }
    for (n, instr) in &f.graph {
        let marker = if f.report_nodes.contains(n) { "@report " } else { "" };
        writeln!(out, "  {marker}{n}: {};", instruction(f, instr)).unwrap();
    }
    out.push_str("}\n");
}

pub fn instruction(f: &CfgFunction, i: &Instruction) -> String {
    match i {
        Instruction::Skip(l) => format!("skip -> {l}"),
        Instruction::Assign(x, e, l) => format!("{} = {} -> {l}", f.var_name(*x), expr(f, e)),
        Instruction::Store(chunk, a, v, l) => {
            format!("store({}, {}, {}) -> {l}", chunk.name(), expr(f, a), expr(f, v))
        }
        Instruction::If(e, t, fl) => format!("if {} -> {t}, {fl}", expr(f, e)),
        Instruction::Call {
            sig,
            dest,
            callee,
            args,
            next,
        } => {
            let mut s = String::from("call ");
            if !sig.0.is_empty() {
                write!(s, "\"{}\" ", sig.0).unwrap();
            }
            if let Some(x) = dest {
                write!(s, "{} = ", f.var_name(*x)).unwrap();
            }
            match callee {
                Expr::Const(Constant::AddrSymbol(id, ofs))
                    if ofs.bits() == 0 && !f.var_names.values().any(|n| n == id) =>
                {
                    s.push_str(id)
                }
                Expr::Var(_) => s.push_str(&expr(f, callee)),
                _ => write!(s, "({})", expr(f, callee)).unwrap(),
            }
            let args: Vec<String> = args.iter().map(|a| expr(f, a)).collect();
            write!(s, "({}) -> {next}", args.join(", ")).unwrap();
            s
        }
        Instruction::Return(None) => "return".into(),
        Instruction::Return(Some(e)) => format!("return {}", expr(f, e)),
    }
}

pub fn expr(f: &CfgFunction, e: &Expr) -> String {
    match e {
        Expr::Var(x) => f.var_name(*x),
        Expr::Const(Constant::Int(n)) => n.signed().to_string(),
        Expr::Const(Constant::AddrSymbol(id, n)) => format!("addrsymbol({id}, {})", n.signed()),
        Expr::Const(Constant::AddrStack(n)) => format!("addrstack({})", n.signed()),
        Expr::Unop(op, a) => format!("{}({})", op.name(), expr(f, a)),
        Expr::Binop(op, a, b) => format!("({} {} {})", expr(f, a), op.symbol(), expr(f, b)),
        Expr::Cond(g, a, b) => format!("({} ? {} : {})", expr(f, g), expr(f, a), expr(f, b)),
        Expr::Load(chunk, a) => format!("load({}, {})", chunk.name(), expr(f, a)),
    }
}
