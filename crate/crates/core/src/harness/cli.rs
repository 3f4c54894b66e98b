//! `semisim` command line. Exit codes: 0 pass, 1 verification failure,
//! 2 usage error or refusal.

use super::{bench, differential_test, exhaustive_test};
use crate::algebra::{analyze, CascadeSpec};
use crate::automaton::{builtin, Semiautomaton};
use crate::compiler::{compile, compile_cascade, CompileReport, Construction};
use crate::error::{Error, Result};
use crate::tkernel::TransformerNet;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "semisim", version, about = "Compile semiautomata into transformer nets and check them")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the algebraic structure of the transition semigroup.
    Analyze {
        /// Automaton JSON file or builtin such as `gridworld(3)`.
        automaton: String,
    },
    /// Compile an automaton; writes the net and `<stem>.report.json`.
    Compile {
        automaton: String,
        #[arg(long)]
        construction: String,
        #[command(flatten)]
        common: CompileArgs,
    },
    /// Compile a cascade of permutation-reset components.
    CompileCascade {
        cascade: PathBuf,
        /// Initial state of every component, comma separated.
        #[arg(long, value_delimiter = ',')]
        q0: Vec<usize>,
        #[arg(long = "T")]
        t: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run an automaton or a compiled net on one input.
    Simulate {
        /// Automaton (JSON or builtin) or compiled net JSON.
        model: String,
        #[arg(long, default_value_t = 0)]
        q0: usize,
        /// Symbols separated by commas or spaces.
        #[arg(long, allow_hyphen_values = true)]
        input: String,
    },
    /// Check a net against the automaton's sequential run.
    Verify {
        automaton: String,
        net: PathBuf,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sequence length; defaults to the net's compiled length.
        #[arg(long = "T")]
        t: Option<usize>,
        /// Defaults to the value recorded at compile time, else 0.
        #[arg(long)]
        q0: Option<usize>,
        /// Also write the verification report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare sequential and layer step counts over a sweep of lengths.
    Bench {
        automaton: String,
        #[arg(long)]
        construction: String,
        #[arg(long = "T", value_delimiter = ',', default_values_t = [8usize, 32, 128])]
        t: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        q0: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 16)]
        reps: usize,
    },
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[arg(long = "T")]
    t: usize,
    #[arg(long, default_value_t = 0)]
    q0: usize,
    #[arg(short, long)]
    out: PathBuf,
}

/// What `compile` writes next to the net.
#[derive(Serialize, Deserialize)]
struct Sidecar {
    automaton: String,
    q0: Vec<usize>,
    report: CompileReport,
}

fn sidecar_path(net: &Path) -> PathBuf {
    let stem = net.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "net".into());
    net.with_file_name(format!("{stem}.report.json"))
}

fn load_automaton(spec: &str) -> Result<Semiautomaton> {
    if Path::new(spec).exists() {
        Semiautomaton::load(spec)
    } else {
        builtin(spec).map_err(|e| Error::Input(format!("{spec:?} is neither a file nor a builtin: {e}")))
    }
}

fn split_symbols(s: &str) -> Vec<&str> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|x| !x.is_empty()).collect()
}

fn print_report(r: &CompileReport) {
    for c in &r.checks {
        let op = if c.exact { "==" } else { "<=" };
        println!("  {} {:<18} {} {op} {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.measured, c.bound);
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn write_artifacts(net: &TransformerNet, report: &CompileReport, name: &str, q0: Vec<usize>, out: &Path) -> Result<()> {
    net.save(out)?;
    let side = Sidecar { automaton: name.to_string(), q0, report: report.clone() };
    std::fs::write(sidecar_path(out), serde_json::to_string_pretty(&side)?)?;
    println!("wrote {} (depth {}, d = {})", out.display(), net.depth(), net.d);
    print_report(report);
    Ok(())
}

fn exec(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Analyze { automaton } => {
            let a = load_automaton(&automaton)?;
            let r = analyze(&a)?;
            println!("states: {}", a.num_states());
            println!("symbols: {}", a.num_symbols());
            println!("semigroup size: {}", r.semigroup_size);
            println!("group: {}", r.is_group);
            println!("maximal subgroup orders: {:?}", r.maximal_subgroup_orders);
            println!("solvable: {}", r.solvable);
            println!("aperiodic: {}", r.aperiodic);
            println!("permutation-reset: {}", r.permutation_reset);
            Ok(0)
        }
        Cmd::Compile { automaton, construction, common } => {
            let a = load_automaton(&automaton)?;
            let c: Construction = construction.parse()?;
            let (net, report) = compile(&a, common.q0, c, common.t)?;
            write_artifacts(&net, &report, a.name().unwrap_or(&automaton), vec![common.q0], &common.out)?;
            Ok(0)
        }
        Cmd::CompileCascade { cascade, q0, t, out } => {
            let spec = CascadeSpec::load(&cascade)?;
            let (net, report) = compile_cascade(&spec, &q0, t)?;
            write_artifacts(&net, &report, &cascade.display().to_string(), q0, &out)?;
            Ok(0)
        }
        Cmd::Simulate { model, q0, input } => {
            let syms = split_symbols(&input);
            let states = match std::fs::read_to_string(&model).ok().and_then(|s| TransformerNet::from_json(&s).ok()) {
                Some(net) => net.evaluate_labels(&syms)?,
                None => {
                    let a = load_automaton(&model)?;
                    a.run(q0, &a.encode_symbols(&syms)?)?.states
                }
            };
            println!("{}", states.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" "));
            Ok(0)
        }
        Cmd::Verify { automaton, net, exhaustive, trials, seed, t, q0, report } => {
            let a = load_automaton(&automaton)?;
            let n = TransformerNet::load(&net)?;
            let side: Option<Sidecar> = std::fs::read_to_string(sidecar_path(&net)).ok().and_then(|s| serde_json::from_str(&s).ok());
            let q0 = q0.or_else(|| side.as_ref().and_then(|s| s.q0.first().copied())).unwrap_or(0);
            let t = t.unwrap_or(n.t_max);
            let mut r = if exhaustive { exhaustive_test(&a, q0, &n, t)? } else { differential_test(&a, q0, &n, t, trials, seed)? };
            if let Some(s) = &side {
                r = r.with_report(&s.report);
            }
            println!(
                "{} {}: T = {t}, {} sequences{}, {} mismatches, max rounding error {:.3e}",
                r.automaton,
                r.construction,
                r.trials,
                if r.exhaustive { " (exhaustive)".to_string() } else { format!(" (seed {seed})") },
                r.mismatches,
                r.max_rounding_error
            );
            println!("oracle {:.3}s, net {:.3}s", r.oracle_seconds, r.net_seconds);
            if let Some(m) = &r.first_mismatch {
                println!("first mismatch at position {}: input {:?}, expected {:?}, got {:?}", m.position, m.input, m.expected, m.got);
            }
            for c in r.checks.iter().filter(|c| !c.pass) {
                println!("bound check failed: {} = {} (bound {})", c.name, c.measured, c.bound);
            }
            if let Some(p) = report {
                std::fs::write(p, r.to_json())?;
            }
            println!("{}", if r.passed() { "PASS" } else { "FAIL" });
            Ok(if r.passed() { 0 } else { 1 })
        }
        Cmd::Bench { automaton, construction, t, q0, threads, reps } => {
            let a = load_automaton(&automaton)?;
            let c: Construction = construction.parse()?;
            let nets = t.iter().map(|&t| compile(&a, q0, c, t).map(|x| x.0)).collect::<Result<Vec<_>>>()?;
            let r = bench(&a, q0, &nets, threads, reps)?;
            println!("{:>6} {:>10} {:>8} {:>14} {:>14}", "T", "seq steps", "layers", "oracle s/seq", "net s/seq");
            for row in &r.rows {
                println!(
                    "{:>6} {:>10} {:>8} {:>14.3e} {:>14.3e}",
                    row.t, row.sequential_steps, row.layer_steps, row.oracle_seconds, row.net_seconds
                );
            }
            Ok(0)
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match exec(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

