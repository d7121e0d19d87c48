use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tsd::bench::{fit_through_origin, measure, BenchRow, Shape};
use tsd::graph::{to_dot, DotOptions, Graph};
use tsd::machine::{fuel_from_env, Config, Flag, JsonlSink, Machine, Outcome, ValidateLevel};
use tsd::oracle::gen::{gen_program, GenConfig};
use tsd::oracle::{differential_check, Observation};
use tsd::propagation::Schedule;
use tsd::syntax::{parse, pretty};
use tsd::translate::{translate_program, TranslationResult};
use tsd::validity;

const EXIT_USAGE: u8 = 1;
const EXIT_STUCK: u8 = 2;
const EXIT_FUEL: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

#[derive(Parser)]
#[command(name = "tsd", version, about = "Token-machine interpreter for dataflow programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a program, printing each peek and the final value.
    Run {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a program and write its JSONL trace to stdout (or --trace).
    Trace {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print the graph of a program in DOT format.
    Dot {
        file: PathBuf,
        /// Run until this many propagation rounds have committed first.
        #[arg(long)]
        after_steps: Option<usize>,
        /// Run until propagation round N is about to start.
        #[arg(long, conflicts_with = "after_steps")]
        before_step: Option<usize>,
        /// Run to the end first.
        #[arg(long, conflicts_with_all = ["after_steps", "before_step"])]
        at_end: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Check the translated graph and every state of a run for validity.
    Lint {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Compare the machine against the reference interpreter on one program.
    Diff {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Compare the machine against the reference interpreter on random programs.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        /// Also generate recursive functions.
        #[arg(long)]
        recursive: bool,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Measure transitions on generated programs of growing size.
    Bench {
        /// chain, chain:D, tree, field, fold, map or alt-sum
        #[arg(long, default_value = "chain")]
        shape: Shape,
        #[arg(long, value_delimiter = ',', default_values_t = vec![100, 1000, 10000])]
        sizes: Vec<usize>,
        #[arg(long, default_value = "rr")]
        schedule: Schedule,
        /// Write the table as CSV here instead of printing it.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Off,
    Commit,
    EveryStep,
}

#[derive(Args)]
struct RunOpts {
    /// rr, rand:SEED or par:K
    #[arg(long, default_value = "rr")]
    schedule: Schedule,
    #[arg(long, value_enum, default_value = "off")]
    validate: Level,
    /// Make step return 1 if anything changed and 0 otherwise.
    #[arg(long)]
    step_returns_bool: bool,
    /// Write a JSONL trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the translated graph in DOT format here before running.
    #[arg(long)]
    dump_initial_dot: Option<PathBuf>,
    /// Transition budget; defaults to TSD_FUEL or 10^7.
    #[arg(long)]
    fuel: Option<u64>,
}

impl RunOpts {
    fn config(&self) -> Config {
        Config {
            fuel: self.fuel.unwrap_or_else(fuel_from_env),
            schedule: self.schedule.clone(),
            validate: match self.validate {
                Level::Off => ValidateLevel::Off,
                Level::Commit => ValidateLevel::Commit,
                Level::EveryStep => ValidateLevel::EveryStep,
            },
            step_returns_bool: self.step_returns_bool,
        }
    }
}

/// Failure before or outside a run: reported on stderr with exit code 1.
struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

type Res = Result<u8, Fail>;

fn read(file: &Path) -> Result<String, Fail> {
    fs::read_to_string(file).map_err(|e| Fail(format!("{}: {e}", file.display())))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, Fail> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| Fail(format!("{}: {e}", path.display())))
}

fn load(file: &Path) -> Result<TranslationResult, Fail> {
    let src = read(file)?;
    translate_program(&src).map_err(|e| Fail(format!("{}: {e}", file.display())))
}

/// Builds the machine, honouring --dump-initial-dot and --trace.
fn machine(file: &Path, opts: &RunOpts) -> Result<Machine, Fail> {
    let tr = load(file)?;
    let mut m = Machine::new(tr, opts.config())?;
    if let Some(p) = &opts.dump_initial_dot {
        let dot = to_dot(&m.graph, &DotOptions { token: Some(m.token.pos), title: None });
        create(p)?.write_all(dot.as_bytes())?;
    }
    if let Some(p) = &opts.trace {
        m.set_trace(Box::new(JsonlSink(create(p)?)));
    }
    Ok(m)
}

fn report(m: &Machine, o: &Outcome) -> u8 {
    match o {
        Outcome::Final { value, .. } => {
            println!("=> {value} : {}", m.ty);
            0
        }
        Outcome::Stuck { diag, transitions } => {
            eprintln!("stuck after {transitions} transitions: {diag}");
            EXIT_STUCK
        }
        Outcome::FuelExhausted { transitions } => {
            eprintln!("out of fuel after {transitions} transitions");
            EXIT_FUEL
        }
        Outcome::Invalid { violations, transitions } => {
            eprintln!("invalid state after {transitions} transitions:");
            for v in violations {
                eprintln!("  {v}");
            }
            EXIT_INVALID
        }
    }
}

fn cmd_run(file: &Path, opts: &RunOpts) -> Res {
    let mut m = machine(file, opts)?;
    let out = io::stdout();
    let mut printed = 0;
    let o = loop {
        let o = m.step_once();
        if m.peeks.len() > printed {
            let mut out = out.lock();
            for p in &m.peeks[printed..] {
                let _ = writeln!(out, "{p}");
            }
            let _ = out.flush();
            printed = m.peeks.len();
        }
        if let Some(o) = o {
            break o;
        }
    };
    drop(m.take_trace());
    Ok(report(&m, &o))
}

fn cmd_trace(file: &Path, opts: &RunOpts) -> Res {
    let mut m = machine(file, opts)?;
    if opts.trace.is_none() {
        m.set_trace(Box::new(JsonlSink(BufWriter::new(io::stdout()))));
    }
    let o = m.run();
    drop(m.take_trace());
    Ok(match o {
        Outcome::Final { .. } => 0,
        o => report(&m, &o),
    })
}

/// True when the file holds nothing but comments and whitespace.
fn is_blank(src: &str) -> bool {
    src.lines().all(|l| {
        let l = l.trim();
        l.is_empty() || l.starts_with("//")
    })
}

/// When to take the DOT snapshot.
enum Snap {
    Initial,
    After(usize),
    Before(usize),
    End,
}

fn cmd_dot(file: &Path, snap: Snap, output: Option<&Path>, opts: &RunOpts) -> Res {
    let src = read(file)?;
    let (dot, code) = if is_blank(&src) {
        (to_dot(&Graph::new(), &DotOptions::default()), 0)
    } else {
        let mut m = machine(file, opts)?;
        let mut code = 0;
        let reached = |m: &Machine| match snap {
            Snap::Initial => true,
            Snap::After(n) => m.steps.len() >= n,
            Snap::Before(n) => m.steps.len() + 1 >= n && m.token.flag == Flag::StepProp,
            Snap::End => false,
        };
        while !reached(&m) {
            if let Some(o) = m.step_once() {
                // running out before the requested point is worth reporting
                if !matches!((&snap, &o), (Snap::End, Outcome::Final { .. })) {
                    code = report(&m, &o);
                }
                break;
            }
        }
        let title = format!("{} after {} steps", file.display(), m.steps.len());
        (to_dot(&m.graph, &DotOptions { token: Some(m.token.pos), title: Some(title) }), code)
    };
    match output {
        Some(p) => create(p)?.write_all(dot.as_bytes())?,
        None => print!("{dot}"),
    }
    Ok(code)
}

fn cmd_lint(file: &Path, opts: &RunOpts) -> Res {
    let tr = load(file)?;
    let vs = validity::check_graph_with(&tr.graph, true);
    if !vs.is_empty() {
        for v in &vs {
            println!("{v}");
        }
        return Ok(EXIT_INVALID);
    }
    println!("graph: ok");
    let mut cfg = opts.config();
    if matches!(opts.validate, Level::Off) {
        cfg.validate = ValidateLevel::EveryStep;
    }
    let mut m = Machine::new(tr, cfg)?;
    let o = m.run();
    match o {
        Outcome::Final { transitions, .. } => {
            println!("run: ok ({transitions} transitions, {} steps)", m.steps.len());
            Ok(0)
        }
        Outcome::Invalid { violations, .. } => {
            for v in &violations {
                println!("{v}");
            }
            Ok(EXIT_INVALID)
        }
        o => Ok(report(&m, &o)),
    }
}

fn show(o: &Observation) -> String {
    match o {
        Observation::Done { value, peeks, steps } => format!("{value}, peeks {peeks:?}, {} steps", steps.len()),
        Observation::OutOfFuel => "out of fuel".into(),
        Observation::Failed(e) => e.clone(),
    }
}

fn cmd_diff(file: &Path, opts: &RunOpts) -> Res {
    let t = parse(&read(file)?).map_err(|e| Fail(format!("{}: {e}", file.display())))?;
    let a = differential_check(&t, &opts.config());
    println!("machine: {}", show(&a.machine));
    println!("oracle:  {}", show(&a.oracle));
    if !a.agrees() {
        for m in &a.mismatches {
            println!("mismatch: {m}");
        }
        return Ok(EXIT_MISMATCH);
    }
    if a.inconclusive {
        println!("inconclusive");
        return Ok(EXIT_FUEL);
    }
    println!("agree");
    Ok(0)
}

fn cmd_fuzz(count: usize, seed: u64, max_depth: usize, recursive: bool, opts: &RunOpts) -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gcfg = GenConfig { depth: max_depth, recursive, ..GenConfig::default() };
    let cfg = opts.config();
    let (mut agree, mut inconclusive, mut bad) = (0, 0, 0);
    for i in 0..count {
        let t = gen_program(&mut rng, &gcfg);
        let a = differential_check(&t, &cfg);
        if !a.agrees() {
            bad += 1;
            println!("# program {i} disagrees");
            println!("{}", pretty(&t));
            for m in &a.mismatches {
                println!("# {m}");
            }
        } else if a.inconclusive {
            inconclusive += 1;
        } else {
            agree += 1;
        }
    }
    println!("{count} programs: {agree} agree, {inconclusive} out of fuel, {bad} disagree");
    Ok(if bad > 0 { EXIT_MISMATCH } else { 0 })
}

fn cmd_bench(shape: Shape, sizes: &[usize], schedule: &Schedule, csv: Option<&Path>) -> Res {
    let mut rows: Vec<BenchRow> = Vec::new();
    for &n in sizes {
        rows.push(measure(shape, n, schedule.clone())?);
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.depth * r.cells) as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.prop_transitions as f64).collect();
    let (a, r2) = fit_through_origin(&xs, &ys);
    match csv {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{}", BenchRow::CSV_HEADER)?;
            for r in &rows {
                writeln!(w, "{}", r.csv())?;
            }
        }
        None => {
            println!("{:>8} {:>8} {:>6} {:>10} {:>12} {:>12} {:>10}", "size", "cells", "depth", "nodes", "transitions", "prop", "ms");
            for r in &rows {
                println!(
                    "{:>8} {:>8} {:>6} {:>10} {:>12} {:>12} {:>10.1}",
                    r.size, r.cells, r.depth, r.graph_nodes, r.transitions, r.prop_transitions, r.millis
                );
            }
        }
    }
    println!("fit prop = a·depth·cells: a = {a:.3}, r² = {r2:.4}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let r = match &cli.cmd {
        Cmd::Run { file, opts } => cmd_run(file, opts),
        Cmd::Trace { file, opts } => cmd_trace(file, opts),
        Cmd::Dot { file, after_steps, before_step, at_end, output, opts } => {
            let snap = match (after_steps, before_step) {
                (Some(n), _) => Snap::After(*n),
                (_, Some(n)) => Snap::Before(*n),
                _ if *at_end => Snap::End,
                _ => Snap::Initial,
            };
            cmd_dot(file, snap, output.as_deref(), opts)
        }
        Cmd::Lint { file, opts } => cmd_lint(file, opts),
        Cmd::Diff { file, opts } => cmd_diff(file, opts),
        Cmd::Fuzz { count, seed, max_depth, recursive, opts } => cmd_fuzz(*count, *seed, *max_depth, *recursive, opts),
        Cmd::Bench { shape, sizes, schedule, csv } => cmd_bench(*shape, sizes, schedule, csv.as_deref()),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(Fail(msg)) => {
            eprintln!("tsd: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
