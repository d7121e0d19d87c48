//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always show.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{machine, run, PROGRAMS};
use tsd::bench::{fit_through_origin, measure, Shape};
use tsd::graph::{End, Graph, NodeKind};
use tsd::machine::{Config, Flag, Mode, Outcome, Token, ValidateLevel, Value};
use tsd::oracle::differential_check;
use tsd::oracle::gen::{gen_program, GenConfig};
use tsd::propagation::{PropReport, Schedule};
use tsd::syntax::{parse, pretty};
use tsd::translate::translate_program;
use tsd::validity::{check_graph, check_state};

const LARGER_TIME_LIMIT: Duration = Duration::from_secs(1);
const SCHEDULE_SEEDS: u64 = 100;
const CONCURRENT_WORKERS: usize = 4;
const GENERATED_PLAIN: usize = 1000;
const GENERATED_RECURSIVE: usize = 100;
const RECURSIVE_FUEL: u64 = 1_000_000;
const CORPUS_SIZE: usize = 500;
const CHAIN_SIZES: [usize; 7] = [100, 200, 500, 1000, 2000, 5000, 10_000];
const MIN_R2: f64 = 0.99;
const SNAPSHOTS: usize = 20;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn final_int(o: &Outcome) -> Result<i64, String> {
    match o {
        Outcome::Final { value: Value::Int(n), .. } => Ok(*n),
        o => Err(format!("did not finish with an integer: {o:?}")),
    }
}

/// The two-cell comparison prints 1 before the first step and 3 after
/// every later one.
fn c1_larger() -> Check {
    let exe = env!("CARGO_BIN_EXE_tsd");
    let path = common::program_path("larger");
    let t0 = Instant::now();
    let out = Command::new(exe).arg("run").arg(&path).output().map_err(|e| e.to_string())?;
    let took = t0.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    ensure(out.status.success(), || format!("exit status {}", out.status))?;
    ensure(lines == ["1", "3", "3", "=> 3 : Int"], || format!("printed {lines:?}"))?;
    ensure(took < LARGER_TIME_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("printed 1, 3, 3 in {:.3} s", took.as_secs_f64()))
}

fn c2_composite() -> Check {
    let (m, o) = run("composite", Config::default());
    final_int(&o)?;
    let h = m.cell_history();
    ensure(h.len() >= 2, || format!("only {} steps", h.len()))?;
    ensure(h[0] == [0, 1] && h[1] == [1, 1], || format!("cells after steps: {h:?}"))?;
    Ok(format!("cells {:?} then {:?}", h[0], h[1]))
}

fn c3_sieve() -> Check {
    let (m, o) = run("sieve", Config::default());
    final_int(&o)?;
    // each round peeks the input inside `next`, then the primes output
    let primes: Vec<i64> = m.peeks.iter().skip(1).step_by(2).copied().collect();
    ensure(primes == [2, 3, 0], || format!("primes {primes:?} from {:?}", m.peeks))?;

    let (m, o) = run("sieve8", Config::default());
    final_int(&o)?;
    // groups of five: inp, sieve, delay, primes, then the peek inside `next`
    let mut rows = vec![Vec::new(); 4];
    for g in m.peeks.chunks(5) {
        for (row, v) in rows.iter_mut().zip(g) {
            row.push(*v);
        }
    }
    let want: [Vec<i64>; 4] = [
        vec![2, 3, 4, 5, 6, 7, 8, 9],
        vec![1, 1, 1, 0, 1, 0, 1, 0],
        vec![2, 2, 3, 4, 5, 6, 7, 8],
        vec![2, 2, 3, 0, 5, 0, 7, 0],
    ];
    for (name, (got, want)) in ["inp", "sieve", "delay", "primes"].iter().zip(rows.iter().zip(&want)) {
        ensure(got == want, || format!("{name}: {got:?}, want {want:?}"))?;
    }
    Ok("peeks 2, 3, 0; all four streams match over 8 steps".into())
}

fn observe(name: &str, schedule: Schedule) -> Result<(Vec<PropReport>, Vec<i64>, i64), String> {
    let (m, o) = run(name, Config { schedule: schedule.clone(), ..Config::default() });
    let v = final_int(&o).map_err(|e| format!("{name} under {schedule}: {e}"))?;
    Ok((m.steps.into_iter().map(|s| s.report).collect(), m.peeks, v))
}

fn c4_schedules() -> Check {
    let mut rounds = 0;
    for name in ["composite", "sieve"] {
        let reference = observe(name, Schedule::RoundRobin)?;
        let mut schedules: Vec<Schedule> = (0..SCHEDULE_SEEDS).map(Schedule::Random).collect();
        schedules.push(Schedule::Concurrent(CONCURRENT_WORKERS));
        for s in schedules {
            let got = observe(name, s.clone())?;
            ensure(got == reference, || format!("{name}: {s} differs from round robin"))?;
            rounds += got.0.len();
        }
    }
    Ok(format!(
        "{SCHEDULE_SEEDS} seeds and par:{CONCURRENT_WORKERS} match round robin ({rounds} rounds compared)"
    ))
}

fn c5_generated() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let plain = GenConfig::default();
    for i in 0..GENERATED_PLAIN {
        let t = gen_program(&mut rng, &plain);
        let tr = tsd::translate::translate(&t, &Default::default()).map_err(|e| e.to_string())?;
        let mut m = tsd::machine::Machine::new(tr, Config::default()).map_err(|e| e.to_string())?;
        let o = m.run();
        ensure(matches!(o, Outcome::Final { .. }), || format!("plain program {i} ended {o:?}:\n{}", pretty(&t)))?;
    }
    let rec = GenConfig { recursive: true, ..GenConfig::default() };
    let (mut finals, mut fuel, mut with_rec) = (0, 0, 0);
    for i in 0..GENERATED_RECURSIVE {
        let t = gen_program(&mut rng, &rec);
        with_rec += usize::from(t.contains_rec());
        let tr = tsd::translate::translate(&t, &Default::default()).map_err(|e| e.to_string())?;
        let cfg = Config { fuel: RECURSIVE_FUEL, ..Config::default() };
        let mut m = tsd::machine::Machine::new(tr, cfg).map_err(|e| e.to_string())?;
        match m.run() {
            Outcome::Final { .. } => finals += 1,
            Outcome::FuelExhausted { .. } => fuel += 1,
            o => return Err(format!("recursive program {i} ended {o:?}:\n{}", pretty(&t))),
        }
    }
    Ok(format!(
        "{GENERATED_PLAIN} plain programs finished; {GENERATED_RECURSIVE} recursive ({with_rec} using rec): \
         {finals} finished, {fuel} out of fuel, none stuck"
    ))
}

fn c6_oracle() -> Check {
    for name in PROGRAMS {
        let t = parse(&common::source(name)).map_err(|e| e.to_string())?;
        let a = differential_check(&t, &Config::default());
        ensure(a.agrees() && !a.inconclusive, || format!("{name}: {:?} {:?}", a.mismatches, a.machine))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
    let mut compared = 0;
    for (i, recursive) in (0..CORPUS_SIZE).map(|i| (i, i % 5 == 4)) {
        let t = gen_program(&mut rng, &GenConfig { recursive, ..GenConfig::default() });
        let cfg = Config { fuel: if recursive { RECURSIVE_FUEL } else { Config::default().fuel }, ..Config::default() };
        let a = differential_check(&t, &cfg);
        ensure(a.agrees(), || format!("program {i}: {:?}\n{}", a.mismatches, pretty(&t)))?;
        ensure(recursive || !a.inconclusive, || format!("plain program {i} ran out of fuel"))?;
        compared += usize::from(!a.inconclusive);
    }
    Ok(format!("{} examples and {compared}/{CORPUS_SIZE} generated programs agree step by step", PROGRAMS.len()))
}

fn c7_linear() -> Check {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &CHAIN_SIZES {
        let r = measure(Shape::Chain { depth: 1 }, n, Schedule::RoundRobin)?;
        xs.push((r.depth * r.cells) as f64);
        ys.push(r.prop_transitions as f64);
    }
    let (a, r2) = fit_through_origin(&xs, &ys);
    ensure(r2 >= MIN_R2, || format!("r² = {r2:.5} (a = {a:.3})"))?;
    Ok(format!("chains of {}..{} cells: a = {a:.3}, r² = {r2:.5}", CHAIN_SIZES[0], CHAIN_SIZES[CHAIN_SIZES.len() - 1]))
}

fn clauses(v: Vec<tsd::validity::Violation>) -> Vec<&'static str> {
    v.into_iter().map(|v| v.clause).collect()
}

fn c8_validity() -> Check {
    for name in PROGRAMS {
        let (_, o) = run(name, Config { validate: ValidateLevel::EveryStep, ..Config::default() });
        ensure(matches!(o, Outcome::Final { .. }), || format!("{name}: {o:?}"))?;
    }

    // an abstraction that is not the content of a box
    let mut g = Graph::new();
    let l = g.add_node(NodeKind::Lam);
    g.new_edge(End::Iface(0), End::Port(l, 1));
    let w = g.add_node(NodeKind::Contraction(0));
    g.new_edge(End::Port(w, 0), End::Port(l, 0));
    let k = g.const_box(NodeKind::Const(1), None);
    g.new_edge(End::Port(l, 0), End::Port(k, 0));
    let got = clauses(check_graph(&g));
    ensure(got.contains(&"box-discipline"), || format!("bare abstraction: {got:?}"))?;

    // a dependency cycle with no cell on it
    let mut g = Graph::new();
    let d = g.add_node(NodeKind::Deref);
    let c = g.add_node(NodeKind::Contraction(0));
    let top = g.new_edge(End::Iface(0), End::Open);
    g.c_push_in(c, top);
    g.new_edge(End::Port(c, 0), End::Port(d, 0));
    let back = g.new_edge(End::Port(d, 0), End::Open);
    g.c_push_in(c, back);
    let got = clauses(check_graph(&g));
    ensure(got.contains(&"cell-free-cycle"), || format!("cell-free cycle: {got:?}"))?;

    // a rewrite flag raised away from any redex
    let tr = translate_program("5").map_err(|e| e.to_string())?;
    let mut t = Token::new(tr.root);
    t.flag = Flag::Beta;
    let got = clauses(check_state(&tr.graph, &t, &[], Mode::Construct));
    ensure(got == ["flag-site"], || format!("misplaced flag: {got:?}"))?;

    Ok(format!("{} examples valid at every transition; 3 negative fixtures rejected", PROGRAMS.len()))
}

/// Next peek, or the final value when no peek comes.
fn next_observable(m: &mut tsd::machine::Machine) -> Result<i64, String> {
    match m.run_until_peek(u64::MAX) {
        Some(p) => Ok(p),
        None => final_int(&m.run()),
    }
}

fn c9_restart() -> Check {
    let total = machine("sieve", Config::default()).run().transitions();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut points: Vec<u64> = (0..SNAPSHOTS).map(|_| rng.gen_range(0..total)).collect();
    points.sort_unstable();
    for k in points {
        let mut m = machine("sieve", Config::default());
        while m.transitions < k && m.step_once().is_none() {}
        let mut fresh = m.restart().ok_or_else(|| format!("no root edge at transition {k}"))?;
        let a = next_observable(&mut m)?;
        let b = next_observable(&mut fresh)?;
        ensure(a == b, || format!("at transition {k}: continuing gives {a}, restarting gives {b}"))?;
    }
    Ok(format!("{SNAPSHOTS} snapshots out of {total} transitions restart consistently"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("two-cell comparison output", c1_larger),
        ("composite cell values", c2_composite),
        ("prime sieve streams", c3_sieve),
        ("schedule independence", c4_schedules),
        ("generated programs finish", c5_generated),
        ("oracle agreement", c6_oracle),
        ("linear propagation cost", c7_linear),
        ("validity at every transition", c8_validity),
        ("restart from snapshots", c9_restart),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
