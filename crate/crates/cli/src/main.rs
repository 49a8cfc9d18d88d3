use std::fmt::Write as _;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dynslice::frontend::pretty;
use dynslice::gen::{generate_with, GenConfig};
use dynslice::interp::{read_trace, run, write_trace, ExecEvent, ExitStatus, DEFAULT_BUDGET};
use dynslice::oracle::{cross_check, CrossCheckError};
use dynslice::{build_cdg, parse, Program, Slicer, StmtId, StmtSet};

/// Dynamic slicer for a small object-oriented language.
#[derive(Parser)]
#[command(name = "dynslice", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a program and print dynamic slices.
    Slice {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Slicing criterion `NODE:VAR`, e.g. `16:T4.a`. Repeatable.
        #[arg(long = "criterion", value_name = "N:VAR")]
        criteria: Vec<String>,
        /// Slice of a whole object of `main`. Repeatable.
        #[arg(long = "object", value_name = "NAME")]
        objects: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Print the control dependence graph.
    Cdg {
        file: PathBuf,
        /// Also write Graphviz output to PATH (`-` for stdout).
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run a program and write its event trace as newline-delimited JSON.
    Trace {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare the streaming slicer with the reference slicer.
    Check {
        /// Program to check; omit with `--seed` to check a generated one.
        file: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        /// Generate the program from this seed.
        #[arg(long, conflicts_with = "file")]
        seed: Option<u64>,
        /// Statement budget of the generated program.
        #[arg(long, default_value_t = 30, requires = "seed")]
        size: usize,
        /// Check a recorded trace instead of running the program.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Print a generated program.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        size: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated program input, e.g. `1,2,3,4`. Overrides --inputs-file.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    inputs: Option<String>,
    /// File of integers separated by commas or whitespace.
    #[arg(long, value_name = "PATH")]
    inputs_file: Option<PathBuf>,
    /// Maximum number of statements to execute.
    #[arg(long, env = "DYNSLICE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

/// A failure and the exit code it maps to.
struct Fail {
    code: u8,
    msg: String,
}

const USAGE: u8 = 1;
const PARSE: u8 = 2;
const RUNTIME: u8 = 3;
const CRITERION: u8 = 4;
const MISMATCH: u8 = 5;

impl From<anyhow::Error> for Fail {
    fn from(e: anyhow::Error) -> Self {
        Fail {
            code: USAGE,
            msg: format!("{e:#}"),
        }
    }
}

fn fail(code: u8, msg: impl Into<String>) -> Fail {
    Fail {
        code,
        msg: msg.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.cmd {
        Cmd::Slice {
            file,
            run,
            criteria,
            objects,
            json,
        } => slice(&file, &run, &criteria, &objects, json),
        Cmd::Cdg { file, dot, json } => cdg(&file, dot.as_deref(), json),
        Cmd::Trace { file, run } => trace(&file, &run),
        Cmd::Check {
            file,
            run,
            seed,
            size,
            trace,
        } => check(file.as_deref(), &run, seed, size, trace.as_deref()),
        Cmd::Gen { seed, size } => {
            print!("{}", generated(seed, size, 0).source);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dynslice: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<Program, Fail> {
    let src =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&src).map_err(|e| fail(PARSE, format!("{}:{e}", path.display())))
}

fn parse_ints(text: &str, what: &str) -> Result<Vec<i64>, Fail> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| fail(USAGE, format!("{what}: `{t}` is not an integer")))
        })
        .collect()
}

fn inputs(args: &RunArgs) -> Result<Vec<i64>, Fail> {
    if let Some(list) = &args.inputs {
        return parse_ints(list, "--inputs");
    }
    if let Some(path) = &args.inputs_file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        return parse_ints(&text, &path.display().to_string());
    }
    Ok(Vec::new())
}

fn execute(program: &Program, args: &RunArgs) -> Result<(Vec<ExecEvent>, ExitStatus), Fail> {
    let inputs = inputs(args)?;
    Ok(run(program, &inputs, args.budget))
}

fn runtime_failure(status: &ExitStatus) -> Option<Fail> {
    match status {
        ExitStatus::Completed => None,
        ExitStatus::Failed(e) => Some(fail(RUNTIME, format!("runtime error: {e}"))),
    }
}

enum Query {
    At(StmtId, String),
    Object(String),
}

impl Query {
    fn label(&self) -> String {
        match self {
            Query::At(n, v) => format!("{n}:{v}"),
            Query::Object(o) => o.clone(),
        }
    }
}

fn parse_criterion(text: &str) -> Result<Query, Fail> {
    let bad = || {
        fail(
            CRITERION,
            format!("bad criterion `{text}`, expected NODE:VAR"),
        )
    };
    let (node, var) = text.split_once(':').ok_or_else(bad)?;
    let node = node.trim().parse().map_err(|_| bad())?;
    let var = var.trim();
    if var.is_empty() {
        return Err(bad());
    }
    Ok(Query::At(node, var.to_string()))
}

fn slice(
    file: &Path,
    args: &RunArgs,
    criteria: &[String],
    objects: &[String],
    json: bool,
) -> Result<(), Fail> {
    let program = load(file)?;
    let mut queries = criteria
        .iter()
        .map(|c| parse_criterion(c))
        .collect::<Result<Vec<_>, _>>()?;
    queries.extend(objects.iter().cloned().map(Query::Object));

    let cdg = build_cdg(&program);
    let (events, status) = execute(&program, args)?;
    let mut slicer = Slicer::new(&cdg);
    for e in &events {
        slicer
            .apply(e)
            .map_err(|e| fail(RUNTIME, format!("slicer: {e}")))?;
    }

    let answers: Vec<(String, StmtSet)> = if queries.is_empty() {
        slicer
            .criteria()
            .map(|((n, v), s)| (format!("{n}:{v}"), s.clone()))
            .collect()
    } else {
        queries
            .iter()
            .map(|q| {
                let s = match q {
                    Query::At(n, v) => slicer.slice_of(*n, v),
                    Query::Object(o) => slicer.slice_of_object(o),
                };
                s.map(|s| (q.label(), s))
                    .map_err(|e| fail(CRITERION, e.to_string()))
            })
            .collect::<Result<_, _>>()?
    };

    let mut out = String::new();
    if json {
        let executed: Vec<StmtId> = slicer.executed().iter().copied().collect();
        let slices: Vec<Value> = answers
            .iter()
            .map(|(c, s)| json!({ "criterion": c, "slice": s.to_vec() }))
            .collect();
        let stats = slicer.stats();
        let doc = json!({
            "executed": executed,
            "slices": slices,
            "stats": { "events": stats.events, "updates": stats.updates },
        });
        out = serde_json::to_string_pretty(&doc).expect("json value serializes");
        out.push('\n');
    } else {
        for (c, s) in &answers {
            let _ = writeln!(out, "{c} = {s}");
        }
        if queries.len() == 1 {
            out.push('\n');
            out.push_str(&listing(
                &program,
                &answers[0].1,
                io::stdout().is_terminal(),
            ));
        }
    }
    io::stdout()
        .write_all(out.as_bytes())
        .context("cannot write to stdout")?;
    match runtime_failure(&status) {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

/// The program with every statement in `slice` marked by `> `. Other
/// statements are dimmed when `color` is set.
fn listing(program: &Program, slice: &StmtSet, color: bool) -> String {
    let mut out = String::new();
    for line in pretty(program).lines() {
        let body = line.trim_start();
        let label = body
            .strip_prefix('#')
            .and_then(|r| r.split_once(':'))
            .and_then(|(n, _)| n.parse::<StmtId>().ok());
        match label {
            Some(n) if slice.contains(n) => {
                let _ = writeln!(out, "> {line}");
            }
            Some(_) if color => {
                let _ = writeln!(out, "  \x1b[2m{line}\x1b[0m");
            }
            _ => {
                let _ = writeln!(out, "  {line}");
            }
        }
    }
    out
}

fn cdg(file: &Path, dot: Option<&Path>, json: bool) -> Result<(), Fail> {
    let program = load(file)?;
    let g = build_cdg(&program);
    let mut out = String::new();
    if json {
        out = serde_json::to_string_pretty(&g.export_json()).expect("json value serializes");
        out.push('\n');
    } else if dot.is_none() {
        for n in g.stmts() {
            let defs: Vec<String> = n.def_set.iter().map(ToString::to_string).collect();
            let uses: Vec<String> = n.use_set.iter().map(ToString::to_string).collect();
            let parent = n.parent.map(|p| g.node_key(p)).unwrap_or_default();
            let _ = writeln!(
                out,
                "{:>4}  {:<8} parent {:<20} def {{{}}} use {{{}}}  {}",
                g.node_key(n.id),
                n.kind.name(),
                parent,
                defs.join(","),
                uses.join(","),
                n.text
            );
        }
    }
    match dot {
        Some(p) if p == Path::new("-") => out.push_str(&g.export_dot()),
        Some(p) => std::fs::write(p, g.export_dot())
            .with_context(|| format!("cannot write {}", p.display()))?,
        None => {}
    }
    io::stdout()
        .write_all(out.as_bytes())
        .context("cannot write to stdout")?;
    Ok(())
}

fn trace(file: &Path, args: &RunArgs) -> Result<(), Fail> {
    let program = load(file)?;
    let (events, status) = execute(&program, args)?;
    let mut stdout = io::stdout().lock();
    write_trace(&events, &mut stdout).context("cannot write trace")?;
    stdout.flush().context("cannot write trace")?;
    match runtime_failure(&status) {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn generated(seed: u64, size: usize, inputs: usize) -> dynslice::gen::Generated {
    generate_with(
        seed,
        &GenConfig {
            max_stmts: size,
            inputs,
        },
    )
}

fn check(
    file: Option<&Path>,
    args: &RunArgs,
    seed: Option<u64>,
    size: usize,
    trace: Option<&Path>,
) -> Result<(), Fail> {
    let (program, own_inputs) = match (file, seed) {
        (Some(f), _) => (load(f)?, None),
        (None, Some(s)) => {
            let g = generated(s, size, GenConfig::default().inputs);
            (g.program, Some(g.inputs))
        }
        (None, None) => return Err(fail(USAGE, "check needs a program file or --seed")),
    };
    let events = match trace {
        Some(p) => {
            let f =
                std::fs::File::open(p).with_context(|| format!("cannot read {}", p.display()))?;
            read_trace(io::BufReader::new(f))
                .map_err(|e| fail(USAGE, format!("{}: {e}", p.display())))?
        }
        None => {
            let inputs = match (&args.inputs, &args.inputs_file, own_inputs) {
                (None, None, Some(own)) => own,
                _ => inputs(args)?,
            };
            let (events, status) = run(&program, &inputs, args.budget);
            if let Some(f) = runtime_failure(&status) {
                eprintln!("dynslice: {}; checking the partial trace", f.msg);
            }
            events
        }
    };
    let cdg = build_cdg(&program);
    match cross_check(&cdg, &events) {
        Ok(n) => {
            println!("OK: {n} criteria agree");
            Ok(())
        }
        Err(e @ (CrossCheckError::Mismatch { .. } | CrossCheckError::Spurious { .. })) => {
            println!("MISMATCH: {e}");
            Err(fail(MISMATCH, "streaming and reference slices differ"))
        }
        Err(e) => {
            println!("MISMATCH: {e}");
            Err(fail(MISMATCH, "the trace does not fit the program"))
        }
    }
}
