//! Scaling workloads: generated recursion-free programs whose dependency
//! graphs have a known shape, with counters from the run.

use std::fmt::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use crate::machine::{Config, Outcome, Value};
use crate::propagation::Schedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Each cell reads the previous one through `depth` additions.
    Chain { depth: usize },
    /// Complete binary tree, every inner cell summing its children.
    Tree,
    /// Square grid, each cell reading its left and upper neighbours.
    Field,
    /// One accumulator reading every other cell.
    Fold,
    /// Independent cells, each reading only itself.
    Map,
    /// The oscillator feeding an accumulator, stepped `size` times.
    AltSum,
}

impl FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "chain" => Shape::Chain { depth: 1 },
            "tree" => Shape::Tree,
            "field" => Shape::Field,
            "fold" => Shape::Fold,
            "map" => Shape::Map,
            "alt-sum" => Shape::AltSum,
            _ => match s.strip_prefix("chain:").map(str::parse) {
                Some(Ok(depth)) if depth >= 1 => Shape::Chain { depth },
                _ => return Err(format!("unknown shape {s:?} (chain, chain:D, tree, field, fold, map, alt-sum)")),
            },
        })
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Chain { depth: 1 } => write!(f, "chain"),
            Shape::Chain { depth } => write!(f, "chain:{depth}"),
            Shape::Tree => write!(f, "tree"),
            Shape::Field => write!(f, "field"),
            Shape::Fold => write!(f, "fold"),
            Shape::Map => write!(f, "map"),
            Shape::AltSum => write!(f, "alt-sum"),
        }
    }
}

fn tree_depth(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()) as usize
}

fn grid_side(n: usize) -> usize {
    (n as f64).sqrt().ceil().max(1.0) as usize
}

impl Shape {
    /// Program text for `size` cells (`AltSum`: `size` steps). Cells are
    /// linked as soon as their inputs exist so that few stay in scope.
    pub fn source(self, size: usize) -> String {
        let n = size.max(1);
        let mut s = String::new();
        match self {
            Shape::Chain { depth } => {
                s.push_str("let c0 = ref 0 in\n");
                for i in 1..n {
                    let _ = writeln!(s, "let c{i} = ref 0 in link c{i} (deref c{}{});", i - 1, " + 1".repeat(depth));
                }
                let _ = write!(s, "step; deref c{}", n - 1);
            }
            Shape::Tree => {
                // post-order, so only the path to the current node is live
                fn emit(i: usize, n: usize, s: &mut String) {
                    if i > n {
                        return;
                    }
                    emit(2 * i, n, s);
                    emit(2 * i + 1, n, s);
                    let _ = write!(s, "let t{i} = ref 1 in ");
                    if 2 * i <= n {
                        let r = if 2 * i < n { format!("deref t{}", 2 * i + 1) } else { "0".into() };
                        let _ = write!(s, "link t{i} (deref t{} + {r});", 2 * i);
                    }
                    s.push('\n');
                }
                emit(1, n, &mut s);
                let _ = write!(s, "{}deref t1", "step; ".repeat(tree_depth(n)));
            }
            Shape::Field => {
                let w = grid_side(n);
                let h = n.div_ceil(w);
                for i in 0..h {
                    for j in 0..w {
                        let up = if i > 0 { format!("deref f{}_{j}", i - 1) } else { "1".into() };
                        let left = if j > 0 { format!("deref f{i}_{}", j - 1) } else { "1".into() };
                        let _ = writeln!(s, "let f{i}_{j} = ref 0 in link f{i}_{j} ({up} + {left});");
                    }
                }
                let _ = write!(s, "step; deref f{}_{}", h - 1, w - 1);
            }
            Shape::Fold => {
                for i in 1..n {
                    let _ = writeln!(s, "let x{i} = ref {i} in");
                }
                s.push_str("let acc = ref 0 in link acc (deref acc");
                for i in 1..n {
                    let _ = write!(s, " + deref x{i}");
                }
                s.push_str(");\nstep; deref acc");
            }
            Shape::Map => {
                for i in 0..n {
                    let _ = writeln!(s, "let m{i} = ref {i} in link m{i} (deref m{i} * 2 % 1000);");
                }
                let _ = write!(s, "step; deref m{}", n - 1);
            }
            Shape::AltSum => {
                s.push_str(
                    "let sm = λi.λf.λx. let s = ref i in link s (f s x); deref s in\n\
                     let alt = sm 1 (λs.λi. 1 - deref s) 0 in\n\
                     let a = sm 0 (λs.λi. i + deref s) alt in\n",
                );
                s.push_str(&"step; ".repeat(n));
                s.push_str("peek a");
            }
        }
        s
    }

    /// Height of the longest dependency expression a propagation token
    /// walks, counted in operators.
    pub fn depth(self, size: usize) -> usize {
        match self {
            Shape::Chain { depth } => depth,
            Shape::Tree | Shape::Field | Shape::AltSum => 1,
            Shape::Fold => size.max(1),
            Shape::Map => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub shape: Shape,
    pub size: usize,
    pub cells: usize,
    pub depth: usize,
    pub steps: usize,
    pub graph_nodes: usize,
    pub transitions: u64,
    pub prop_transitions: u64,
    pub millis: f64,
    pub value: i64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str =
        "shape,size,cells,depth,steps,graph_nodes,transitions,prop_transitions,millis,value";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.3},{}",
            self.shape,
            self.size,
            self.cells,
            self.depth,
            self.steps,
            self.graph_nodes,
            self.transitions,
            self.prop_transitions,
            self.millis,
            self.value
        )
    }
}

/// Parsing and translation recurse on the program, whose nesting grows with
/// the size, so runs happen on a thread with a roomy stack.
const STACK: usize = 1 << 30;

pub fn measure(shape: Shape, size: usize, schedule: Schedule) -> Result<BenchRow, String> {
    let src = shape.source(size);
    let cfg = Config { fuel: u64::MAX, schedule, ..Config::default() };
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK)
            .spawn_scoped(s, move || {
                let t0 = Instant::now();
                let (m, o) = crate::machine::run_source(&src, cfg).map_err(|e| e.to_string())?;
                let millis = t0.elapsed().as_secs_f64() * 1e3;
                let Outcome::Final { value: Value::Int(value), .. } = o else {
                    return Err(format!("{shape} size {size}: run did not finish: {o:?}"));
                };
                Ok(BenchRow {
                    shape,
                    size,
                    cells: m.graph.cells_by_serial().count(),
                    depth: shape.depth(size),
                    steps: m.steps.len(),
                    graph_nodes: m.graph.node_count(),
                    transitions: o.transitions(),
                    prop_transitions: m.prop_transitions,
                    millis,
                    value,
                })
            })
            .map_err(|e| e.to_string())?
            .join()
            .map_err(|_| "benchmark thread panicked".to_string())?
    })
}

/// Least squares fit of `y = a·x` through the origin; returns `(a, r²)`,
/// with r² taken against the mean of `y`.
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let a = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let mean = ys.iter().sum::<f64>() / ys.len().max(1) as f64;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (a, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(shape: &str, size: usize) -> BenchRow {
        measure(shape.parse().unwrap(), size, Schedule::RoundRobin).unwrap()
    }

    #[test]
    fn exact_fit() {
        let (a, r2) = fit_through_origin(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
        assert!((a - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shapes_agree_with_the_oracle() {
        use crate::oracle::{oracle_eval, OracleConfig};
        for shape in ["chain", "chain:3", "tree", "field", "fold", "map", "alt-sum"] {
            for size in [1, 2, 7, 10] {
                let t = crate::syntax::parse(&shape.parse::<Shape>().unwrap().source(size)).unwrap();
                let want = oracle_eval(&t, &OracleConfig::default()).unwrap().value;
                assert_eq!(Value::Int(run(shape, size).value), want, "{shape} {size}");
            }
        }
        assert_eq!(run("chain:2", 5).value, 2);
        assert_eq!(run("fold", 4).value, 6);
        assert_eq!(run("tree", 7).value, 4);
    }

    #[test]
    fn transitions_grow_with_size() {
        for shape in ["chain", "tree", "field", "fold", "map", "alt-sum"] {
            let a = run(shape, 8);
            let b = run(shape, 16);
            assert!(b.transitions > a.transitions, "{shape}");
        }
    }

    #[test]
    fn parse_shapes() {
        assert_eq!("chain:3".parse::<Shape>(), Ok(Shape::Chain { depth: 3 }));
        assert_eq!("alt-sum".parse::<Shape>(), Ok(Shape::AltSum));
        assert!("chain:0".parse::<Shape>().is_err());
    }
}
