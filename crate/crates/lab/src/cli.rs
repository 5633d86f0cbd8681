//! The `pglblab` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pglb_core::analyzer::{analyze, AnalysisError, Delay, MidResult, StateGraph, Witness};
use pglb_core::family::{gen_paper_family, gen_random, KindWeights};
use pglb_core::isa::validate;
use pglb_core::projector::{
    check_equivalence, dispatch_project, specialize, thread_jumps, OracleSuite, ProjectionReport, Verdict,
};
use pglb_core::vm::{run, ObservableTrace, ReplyOracle};
use pglb_core::{parse_program, Program, ToolParams};

use crate::bench::{bench_family, render_csv, render_markdown, BenchOptions};
use crate::config::Config;
use crate::formats::{parse_oracle_script, render_map, render_report, render_trace};

#[derive(Debug, Parser)]
#[command(
    name = "pglblab",
    version,
    about = "Run, analyse and project PGLB programs with indirect jumps"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Config file (default: sidecar `.cfg` of the program, then $PGLBLAB_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    maxr: Option<u32>,
    #[arg(long, global = true)]
    maxn: Option<u32>,
    /// Auxiliary instructions, e.g. `x.*,flag.get`
    #[arg(long, global = true)]
    aux: Option<String>,
    #[arg(long, global = true)]
    step_limit: Option<u64>,
    #[arg(long, global = true)]
    state_limit: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a program and print its trace
    Run {
        /// Program file, `-` for stdin
        file: PathBuf,
        /// Oracle: a seed (digits) or a script file of T/F lines; default seed 0
        #[arg(long)]
        oracle: Option<String>,
        /// Step limit for this run
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Compute the maximal internal delay
    Mid { file: PathBuf },
    /// Eliminate indirect jumps
    Project {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Thread jump chains in the output
        #[arg(long)]
        thread: bool,
        /// Output prefix; writes PREFIX.pglb, PREFIX.map.csv, PREFIX.report.txt, PREFIX.cfg
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate programs
    #[command(subcommand)]
    Gen(Gen),
    /// Measure both projections over the family
    Bench {
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=8))]
        kmax: u32,
        /// CSV output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print a Markdown table
        #[arg(long)]
        md: bool,
    },
    /// Compare the observable behaviour of two programs
    Check {
        p: PathBuf,
        q: PathBuf,
        /// Exhaustive oracle depth
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Number of seeded oracles
        #[arg(long, default_value_t = 8)]
        seeds: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Specialize,
    Dispatch,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Specialize => "specialize",
            Mode::Dispatch => "dispatch",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Gen {
    /// The dispatch family P_k
    Family {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=16))]
        k: u32,
        /// Output file (default: stdout); a sidecar .cfg is written next to it
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A random program
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        len: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Problems with the program itself (exit code 1); anything else, such as
/// unreadable files or bad config, exits with 2.
#[derive(Debug)]
struct Failure(String);

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failure {}

/// Runs the command line; returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if e.downcast_ref::<Failure>().is_some() {
                1
            } else {
                2
            }
        }
    }
}

/// `x.pglb` → `x.cfg`.
pub fn sidecar_path(program: &Path) -> PathBuf {
    program.with_extension("cfg")
}

fn read_source(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_program(path: &Path) -> Result<Program> {
    let text = read_source(path)?;
    parse_program(&text).map_err(|e| anyhow!(Failure(format!("{}:{e}", path.display()))))
}

impl GlobalArgs {
    fn overrides(&self) -> Result<Config> {
        let mut c = Config::default();
        if let Some(v) = self.maxr {
            c.set("maxr", &v.to_string())?;
        }
        if let Some(v) = self.maxn {
            c.set("maxn", &v.to_string())?;
        }
        if let Some(v) = &self.aux {
            c.set("aux", v)?;
        }
        if let Some(v) = self.step_limit {
            c.set("stepLimit", &v.to_string())?;
        }
        if let Some(v) = self.state_limit {
            c.set("stateLimit", &v.to_string())?;
        }
        Ok(c)
    }

    /// Explicit config, else the first existing sidecar of `programs`, else
    /// the environment; then flag overrides.
    fn config(&self, programs: &[&Path]) -> Result<Config> {
        let sidecar = programs
            .iter()
            .filter(|p| p.as_os_str() != "-")
            .map(|p| sidecar_path(p))
            .find(|p| p.is_file());
        let base = match (&self.config, sidecar) {
            (Some(explicit), _) => Config::load(explicit)?,
            (None, Some(s)) => Config::load(&s)?,
            (None, None) => Config::discover(None)?,
        };
        Ok(base.merge(self.overrides()?))
    }
}

fn checked_params(config: &Config, programs: &[&Program]) -> Result<ToolParams> {
    let params = config.tool_params(programs);
    params.check()?;
    for p in programs {
        let diagnostics = validate(p, &params);
        if !diagnostics.is_empty() {
            let mut msg = String::from("program fails validation:");
            for d in diagnostics {
                let _ = write!(msg, "\n  {d}");
            }
            bail!(Failure(msg));
        }
    }
    Ok(params)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let g = &cli.global;
    match cli.command {
        Command::Run { file, oracle, steps } => {
            let p = load_program(&file)?;
            let mut params = checked_params(&g.config(&[&file])?, &[&p])?;
            if let Some(s) = steps {
                params.step_limit = s.max(1);
            }
            let oracle = match oracle {
                None => ReplyOracle::seeded(0),
                Some(s) if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => ReplyOracle::seeded(s.parse()?),
                Some(path) => ReplyOracle::scripted(parse_oracle_script(&read_source(Path::new(&path))?)?),
            };
            let trace = run(&p, &params, oracle).map_err(|e| Failure(e.to_string()))?;
            out.write_all(render_trace(&trace).as_bytes())?;
            Ok(0)
        }
        Command::Mid { file } => {
            let p = load_program(&file)?;
            let params = checked_params(&g.config(&[&file])?, &[&p])?;
            match analyze(&p, &params) {
                Ok((graph, r)) => {
                    out.write_all(render_mid(&graph, &r).as_bytes())?;
                    Ok(0)
                }
                Err(e @ AnalysisError::StateLimitExceeded { .. }) => bail!(Failure(e.to_string())),
                Err(e) => bail!(Failure(e.to_string())),
            }
        }
        Command::Project {
            file,
            mode,
            thread,
            out: prefix,
        } => {
            let p = load_program(&file)?;
            let params = checked_params(&g.config(&[&file])?, &[&p])?;
            let mut report = match mode {
                Mode::Specialize => specialize(&p, &params),
                Mode::Dispatch => dispatch_project(&p, &params),
            }
            .map_err(|e| anyhow!(Failure(e.to_string())))?;
            if thread {
                report = threaded(report);
            }
            let prefix = prefix.unwrap_or_else(|| default_prefix(&file, mode.name()));
            let text = render_report(mode.name(), thread, &report);
            write_file(&with_suffix(&prefix, ".pglb"), &format!("{}\n", report.output))?;
            write_file(&with_suffix(&prefix, ".map.csv"), &render_map(&report.map))?;
            write_file(&with_suffix(&prefix, ".report.txt"), &text)?;
            write_file(&with_suffix(&prefix, ".cfg"), &Config::render_params(&report.params))?;
            out.write_all(text.as_bytes())?;
            writeln!(out, "\nwrote {}.{{pglb,map.csv,report.txt,cfg}}", prefix.display())?;
            Ok(0)
        }
        Command::Gen(Gen::Family { k, out: file }) => {
            let (p, family) = gen_paper_family(k);
            emit_program(out, &p, &family.tool_params(), file.as_deref())
        }
        Command::Gen(Gen::Random { seed, len, out: file }) => {
            let c = g.config(&[])?;
            let mut params = c.tool_params(&[]);
            params.maxr = c.maxr.unwrap_or(2);
            params.maxn = c.maxn.unwrap_or(3);
            let p = gen_random(seed, len as usize, &params, &KindWeights::default());
            emit_program(out, &p, &params, file.as_deref())
        }
        Command::Bench { kmax, out: file, md } => {
            let mut opts = BenchOptions::new(kmax);
            if let Some(s) = g.state_limit {
                opts.state_limit = s;
            }
            let rows = bench_family(&opts);
            let csv = render_csv(&rows);
            match &file {
                Some(f) => write_file(f, &csv)?,
                None if !md => out.write_all(csv.as_bytes())?,
                None => {}
            }
            if md {
                out.write_all(render_markdown(&rows).as_bytes())?;
            }
            Ok(if rows.iter().all(|r| r.ok()) { 0 } else { 1 })
        }
        Command::Check { p, q, depth, seeds } => {
            let left = load_program(&p)?;
            let right = load_program(&q)?;
            let params = checked_params(&g.config(&[&q, &p])?, &[&left, &right])?;
            let suite = OracleSuite {
                depth,
                seeds: (0..seeds).collect(),
                step_limit: g.step_limit.unwrap_or(100_000),
            };
            match check_equivalence(&left, &right, &params, &suite).map_err(|e| Failure(e.to_string()))? {
                Verdict::Equivalent { checked, inconclusive } => {
                    writeln!(
                        out,
                        "equivalent: {checked} oracles agree ({inconclusive} inconclusive at the step limit)"
                    )?;
                    Ok(0)
                }
                Verdict::Counterexample(c) => {
                    writeln!(out, "counterexample under {}", c.oracle)?;
                    writeln!(out, "  {}: {}", p.display(), render_observable(&c.left))?;
                    writeln!(out, "  {}: {}", q.display(), render_observable(&c.right))?;
                    Ok(1)
                }
            }
        }
    }
}

fn threaded(mut r: ProjectionReport) -> ProjectionReport {
    r.output = thread_jumps(&r.output);
    r.mid_after = analyze(&r.output, &r.params).map(|(_, m)| m);
    r
}

fn default_prefix(file: &Path, mode: &str) -> PathBuf {
    if file.as_os_str() == "-" {
        PathBuf::from(format!("stdin.{mode}"))
    } else {
        file.with_extension(mode)
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit_program(out: &mut dyn Write, p: &Program, params: &ToolParams, file: Option<&Path>) -> Result<i32> {
    let text = format!("{p}\n");
    match file {
        Some(f) => {
            write_file(f, &text)?;
            write_file(&sidecar_path(f), &Config::render_params(params))?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

fn render_path(g: &StateGraph, path: &[u32]) -> String {
    path.iter()
        .map(|&v| format!("{}/{}", g.node(v).pc, g.weight(v)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `MID = ...`, the witness as `position/weight` pairs, graph size.
pub fn render_mid(g: &StateGraph, r: &MidResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "MID = {}", r.value);
    match &r.witness {
        Witness::None => {
            let _ = writeln!(out, "witness: none (no anchor is reachable)");
        }
        Witness::Segment(s) => {
            let _ = writeln!(out, "witness: {}", render_path(g, s));
        }
        Witness::Cycle { stem, cycle, exit } => {
            let _ = writeln!(out, "witness stem: {}", render_path(g, stem));
            let _ = writeln!(out, "witness cycle: {}", render_path(g, cycle));
            let _ = writeln!(out, "witness exit: {}", render_path(g, exit));
        }
    }
    if r.open_tail > Delay::Finite(0) {
        let _ = writeln!(out, "open tail = {}", r.open_tail);
    }
    let _ = writeln!(out, "nodes = {}", g.len());
    let _ = writeln!(out, "edges = {}", g.edge_count());
    out
}

fn render_observable(t: &ObservableTrace) -> String {
    let events: Vec<String> = t
        .events
        .iter()
        .map(|e| format!("{}={}", e.basic, if e.reply { 'T' } else { 'F' }))
        .collect();
    format!("[{}] {}", events.join(", "), t.status)
}
