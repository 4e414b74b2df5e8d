use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cfgval::core::analysis::{check_result_against_oracle, value_analysis};
use cfgval::core::fixpoint::wto::compute_wto;
use cfgval::core::fixpoint::SolveStatus;
use cfgval::gen::random_args;
use cfgval::report::{report_json, report_text, NodeSelection};

#[derive(Parser)]
#[command(version, about = "Value-range analysis of CFG programs over 32-bit integers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze every function of a `.cfg` file.
    Analyze {
        /// Program in the `.cfg` text format.
        file: PathBuf,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
        /// Print the ranges as a table.
        #[arg(long)]
        text: bool,
        /// Print the weak topological ordering of each function.
        #[arg(long)]
        wto: bool,
        /// Check the result against concrete runs of `main`, e.g.
        /// `--oracle seeds=20 fuel=500`.
        #[arg(long, num_args = 0..=2, value_name = "KEY=N")]
        oracle: Option<Vec<String>>,
        #[arg(long, value_enum, default_value = "all")]
        report_nodes: NodeSelection,
    },
}

struct OracleOpts {
    seeds: usize,
    fuel: usize,
}

fn oracle_opts(args: &[String]) -> anyhow::Result<OracleOpts> {
    let mut o = OracleOpts { seeds: 10, fuel: 500 };
    for a in args {
        let (k, v) = a.split_once('=').with_context(|| format!("expected KEY=N, got `{a}`"))?;
        let n: usize = v.parse().with_context(|| format!("invalid number in `{a}`"))?;
        match k {
            "seeds" => o.seeds = n,
            "fuel" => o.fuel = n,
            _ => bail!("unknown oracle option `{k}`"),
        }
    }
    Ok(o)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let Cmd::Analyze {
        file,
        json,
        text,
        wto,
        oracle,
        report_nodes,
    } = cli.cmd;
    let src = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
    let program = cfgval::parse(&src).with_context(|| format!("in {}", file.display()))?;

    if wto {
        for (name, f) in &program.functions {
            let nodes: Vec<_> = f.graph.keys().copied().collect();
            let w = compute_wto(&nodes, f.entry, |n| f.graph[&n].successors());
            println!("{name}: {w}");
        }
    }

    let result = value_analysis(&program);
    let mut code = 0;
    for (name, f) in &result.functions {
        match f.status() {
            SolveStatus::Checked => {}
            SolveStatus::Rejected => {
                eprintln!("warning: `{name}`: candidate fixpoint rejected by the checker; reporting top");
                code = 2;
            }
            SolveStatus::BudgetExceeded => {
                eprintln!("warning: `{name}`: iteration budget exceeded; reporting top");
                code = 2;
            }
        }
    }

    if let Some(out) = json {
        let doc = serde_json::to_string_pretty(&report_json(&program, &result, report_nodes))?;
        if out.as_os_str() == "-" {
            println!("{doc}");
        } else {
            std::fs::write(&out, doc + "\n").with_context(|| format!("writing {}", out.display()))?;
        }
    }
    if text {
        print!("{}", report_text(&program, &result, report_nodes));
    }

    if let Some(args) = oracle {
        let o = oracle_opts(&args)?;
        let Some((_, main)) = program.main_function() else {
            bail!("no function to run");
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let seeds: Vec<BTreeMap<_, _>> = (0..o.seeds).map(|_| random_args(&mut rng, main)).collect();
        let violations = check_result_against_oracle(&program, &result, &seeds, o.fuel);
        for v in &violations {
            eprintln!(
                "violation: seed {} in `{}` at node {}: {:?} = {:?} outside {:?}",
                v.seed, v.function, v.node, v.var, v.value, v.ranges
            );
        }
        if violations.is_empty() {
            eprintln!("oracle: {} runs, no violations", o.seeds);
        } else {
            code = 3;
        }
    }
    Ok(ExitCode::from(code))
}
