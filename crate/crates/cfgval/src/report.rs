//! Range reports in JSON and as a text table.
//!
//! A variable is reported as bounded when its signed or its unsigned
//! interval has at most 2^31 elements.

use serde_json::{json, Map, Value};

use cfgval_core::analysis::{is_bounded, AnalysisResult, DefaultState, FunctionResult};
use cfgval_core::domain::{Lifted, NotBot};
use cfgval_core::intervals::{Interval, RangePair};
use cfgval_core::ir::{CfgFunction, CfgProgram, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum NodeSelection {
    All,
    /// Only nodes carrying an `@report` marker.
    Marked,
}

fn selected(f: &CfgFunction, sel: NodeSelection) -> Vec<NodeId> {
    match sel {
        NodeSelection::All => f.graph.keys().copied().collect(),
        NodeSelection::Marked => f.report_nodes.iter().copied().collect(),
    }
}

fn interval_json(i: &Lifted<Interval>) -> Value {
    match i {
        NotBot(i) => json!([i.min, i.max]),
        _ => json!("bot"),
    }
}

fn interval_text(i: &Lifted<Interval>) -> String {
    match i {
        NotBot(i) => format!("[{}, {}]", i.min, i.max),
        _ => "bot".into(),
    }
}

/// Ranges of every variable at `n`, or `None` when `n` is unreachable.
pub fn node_ranges(f: &CfgFunction, r: &FunctionResult<DefaultState>, n: NodeId) -> Option<Vec<(String, RangePair)>> {
    let vars = &r.variables;
    vars.iter()
        .map(|x| r.ranges(n, *x).map(|rp| (f.var_name(*x), rp)))
        .collect()
}

/// `{ function: { node: { var: {signed, unsigned, bounded} } | "unreachable" } }`
pub fn report_json(p: &CfgProgram, res: &AnalysisResult<DefaultState>, sel: NodeSelection) -> Value {
    let mut out = Map::new();
    for (name, f) in &p.functions {
        let Some(r) = res.function(name) else { continue };
        let mut nodes = Map::new();
        for n in selected(f, sel) {
            let entry = match node_ranges(f, r, n) {
                None => json!("unreachable"),
                Some(vars) => Value::Object(
                    vars.into_iter()
                        .map(|(v, rp)| {
                            let o = json!({
                                "signed": interval_json(&rp.signed),
                                "unsigned": interval_json(&rp.unsigned),
                                "bounded": is_bounded(&rp),
                            });
                            (v, o)
                        })
                        .collect(),
                ),
            };
            nodes.insert(n.to_string(), entry);
        }
        out.insert(name.clone(), Value::Object(nodes));
    }
    Value::Object(out)
}

pub fn report_text(p: &CfgProgram, res: &AnalysisResult<DefaultState>, sel: NodeSelection) -> String {
    let mut rows = vec![["function", "node", "var", "signed", "unsigned", "bounded"].map(String::from)];
    for (name, f) in &p.functions {
        let Some(r) = res.function(name) else { continue };
        for n in selected(f, sel) {
            match node_ranges(f, r, n) {
                None => rows.push([
                    name.clone(),
                    n.to_string(),
                    "-".into(),
                    "unreachable".into(),
                    String::new(),
                    String::new(),
                ]),
                Some(vars) => {
                    for (v, rp) in vars {
                        rows.push([
                            name.clone(),
                            n.to_string(),
                            v,
                            interval_text(&rp.signed),
                            interval_text(&rp.unsigned),
                            if is_bounded(&rp) { "yes" } else { "no" }.into(),
                        ]);
                    }
                }
            }
        }
    }
    let widths: Vec<usize> = (0..6).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Number of bounded (node, variable) pairs among the selected nodes.
pub fn count_bounded(p: &CfgProgram, res: &AnalysisResult<DefaultState>, sel: NodeSelection) -> (usize, usize) {
    let (mut bounded, mut total) = (0, 0);
    for (name, f) in &p.functions {
        let Some(r) = res.function(name) else { continue };
        for n in selected(f, sel) {
            for (_, rp) in node_ranges(f, r, n).unwrap_or_default() {
                total += 1;
                bounded += is_bounded(&rp) as usize;
            }
        }
    }
    (bounded, total)
}
