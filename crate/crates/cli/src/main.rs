use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use xfo_core::discourse::{check_inus, parse_field};
use xfo_core::foundry::Foundry;
use xfo_core::lang::{compile, expand_activity_family, format_diagnostics, has_errors, load_files, Compiled};
use xfo_core::microworld::{Microworld, RunEnd};
use xfo_core::par::Exec;
use xfo_core::transitions::{
    bind_params, check_equivalence, instantiate_chain, parse_space_spec, Equivalence, StateSpace, DEFAULT_STATE_BOUND,
};

#[derive(Parser)]
#[command(name = "xfo", version, about = "Compile, check and run .xfo ontology models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile models and print the registry fingerprint.
    Compile {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print diagnostics for the given models.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Build a world and run a chain, or its interaction rules.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        world: String,
        #[arg(long)]
        chain: Option<String>,
        #[arg(long, default_value_t = 1000)]
        ticks: u64,
        /// Seed for instance ids; ids are sequential without it.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the NDJSON trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Explicit `param=instance` chain binding.
        #[arg(long = "bind", value_name = "PARAM=INSTANCE")]
        binds: Vec<String>,
    },
    /// Compare two chains over every state of a bounded space.
    Equiv {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// `world:instance.determinable[=v1|v2…], …`
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
        bound: u64,
        #[arg(long = "bind", value_name = "PARAM=INSTANCE")]
        binds: Vec<String>,
    },
    /// Foundry measures over the modules of the given models.
    #[command(group(ArgGroup::new("measure").required(true).multiple(true)))]
    Metrics {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, num_args = 2, value_names = ["A", "B"], group = "measure")]
        orthogonality: Option<Vec<String>>,
        #[arg(long, group = "measure")]
        specificity: Option<String>,
        /// Comma-separated terms describing one instance.
        #[arg(long, group = "measure")]
        exhaustivity: Option<String>,
    },
    /// Check whether a condition is INUS in a causal field file.
    Inus {
        field: PathBuf,
        #[arg(long)]
        condition: String,
    },
    /// Print role, process and facility stubs derived from a verb stem.
    Expand {
        #[arg(long)]
        root: String,
    },
}

/// Failure with the exit code it maps to.
struct Fail(u8, String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(1, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = String::new();
    let result = dispatch(cli.command, &mut out);
    print!("{out}");
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}

fn load(files: &[PathBuf]) -> Result<Compiled, Fail> {
    let (modules, parse_diags) = load_files(files)?;
    if has_errors(&parse_diags) {
        return Err(Fail(1, format_diagnostics(&parse_diags).trim_end().to_string()));
    }
    compile(&modules).map_err(|d| Fail(1, format_diagnostics(&d).trim_end().to_string()))
}

fn parse_binds(binds: &[String]) -> Result<BTreeMap<String, String>, Fail> {
    binds
        .iter()
        .map(|b| match b.split_once('=') {
            Some((p, i)) if !p.is_empty() && !i.is_empty() => Ok((p.to_string(), i.to_string())),
            _ => Err(Fail(2, format!("bad binding `{b}`, expected PARAM=INSTANCE"))),
        })
        .collect()
}

fn world(c: &Compiled, name: &str, seed: Option<u64>) -> Result<Microworld, Fail> {
    let def = c.world(name).ok_or_else(|| Fail(1, format!("no world named `{name}`")))?;
    Ok(Microworld::from_def(c.registry.clone(), def, seed)?)
}

fn dispatch(command: Command, out: &mut String) -> Result<(), Fail> {
    match command {
        Command::Compile { files } => {
            let c = load(&files)?;
            writeln!(out, "{}", c.registry.fingerprint()).unwrap();
        }
        Command::Validate { files } => {
            let (modules, mut diags) = load_files(&files)?;
            if !has_errors(&diags) {
                match compile(&modules) {
                    Ok(c) => diags.extend(c.warnings),
                    Err(d) => diags.extend(d),
                }
            }
            out.push_str(&format_diagnostics(&diags));
            if has_errors(&diags) {
                return Err(Fail(1, String::new()));
            }
        }
        Command::Run { files, world: w, chain, ticks, seed, trace, binds } => {
            let explicit = parse_binds(&binds)?;
            let c = load(&files)?;
            let mut mw = world(&c, &w, seed)?;
            let result = match &chain {
                Some(name) => {
                    let bindings = bind_params(&c.registry, mw.store(), name, &explicit)?;
                    let mut inst = instantiate_chain(&c.registry, name, bindings)?;
                    mw.run_chain(&mut inst, ticks)
                }
                None => mw.run_interactions(ticks),
            };
            if let Some(path) = trace {
                fs::write(&path, mw.trace_ndjson())
                    .map_err(|e| Fail(1, format!("cannot write {}: {e}", path.display())))?;
            }
            let report = result?;
            let end = match &report.end {
                RunEnd::Completed => "completed".to_string(),
                RunEnd::Quiescent => "quiescent".to_string(),
                RunEnd::Aborted(r) => format!("aborted: {r}"),
            };
            writeln!(out, "world\t{w}").unwrap();
            writeln!(out, "end\t{end}").unwrap();
            writeln!(out, "applied\t{}", report.applied).unwrap();
            writeln!(out, "dispositions\t{}", report.fired.len()).unwrap();
            writeln!(out, "ticks\t{}", report.ticks_used).unwrap();
            writeln!(out, "fingerprint\t{}", mw.fingerprint()).unwrap();
        }
        Command::Equiv { files, a, b, space, bound, binds } => {
            let explicit = parse_binds(&binds)?;
            let (w, axes) = parse_space_spec(&space).map_err(|e| Fail(2, e.to_string()))?;
            let c = load(&files)?;
            let mw = world(&c, &w, None)?;
            let reg = &c.registry;
            let ba = bind_params(reg, mw.store(), &a, &explicit)?;
            let bb = bind_params(reg, mw.store(), &b, &explicit)?;
            let space = StateSpace::new(reg, mw.store().clone(), mw.clock(), &axes)?;
            match check_equivalence(reg, &a, &b, &ba, &bb, &space, bound, Exec::default())? {
                Equivalence::Equivalent { states } => writeln!(out, "equivalent\t{states} states").unwrap(),
                Equivalence::Counterexample(ce) => {
                    let start: Vec<String> = ce.assignment.iter().map(|(i, d, v)| format!("{i}.{d}={v}")).collect();
                    writeln!(out, "counterexample\t{}", start.join(",")).unwrap();
                    writeln!(out, "status\t{a}\t{}", ce.status_a).unwrap();
                    writeln!(out, "status\t{b}\t{}", ce.status_b).unwrap();
                    for (p, s, o) in ce.final_a.difference(&ce.final_b) {
                        writeln!(out, "only\t{a}\t{p}({s}, {o})").unwrap();
                    }
                    for (p, s, o) in ce.final_b.difference(&ce.final_a) {
                        writeln!(out, "only\t{b}\t{p}({s}, {o})").unwrap();
                    }
                }
            }
        }
        Command::Metrics { files, orthogonality, specificity, exhaustivity } => {
            let c = load(&files)?;
            let f = Foundry::from_compiled(&c)?;
            if let Some(pair) = orthogonality {
                let score = f.orthogonality(&pair[0], &pair[1])?;
                writeln!(out, "orthogonality\t{} {}\t{score}", pair[0], pair[1]).unwrap();
            }
            if let Some(name) = specificity {
                writeln!(out, "specificity\t{name}\t{}", f.specificity(&name)?).unwrap();
            }
            if let Some(desc) = exhaustivity {
                let terms: Vec<&str> = desc.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
                writeln!(out, "exhaustivity\t{}\t{}", terms.join(","), f.exhaustivity(&terms)?).unwrap();
            }
        }
        Command::Inus { field, condition } => {
            let text =
                fs::read_to_string(&field).map_err(|e| Fail(1, format!("cannot read {}: {e}", field.display())))?;
            let f = parse_field(&text)?;
            let v = check_inus(&f, &condition)?;
            let witness = v.witness.map(|w| w.into_iter().collect::<Vec<_>>().join(",")).unwrap_or_else(|| "-".into());
            writeln!(out, "inus\t{}\t{condition}\t{}\t{witness}", f.outcome, v.inus).unwrap();
        }
        Command::Expand { root } => {
            let family = expand_activity_family(&root).map_err(|e| Fail(2, e.to_string()))?;
            out.push_str(&family.to_source(true));
        }
    }
    Ok(())
}
