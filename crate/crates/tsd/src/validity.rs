//! Executable validity predicates for graphs and machine states. Each
//! violation carries the id of the predicate clause it breaks.

use std::collections::HashSet;
use std::fmt;

use crate::graph::{EdgeId, End, Graph, NodeId, NodeKind};
use crate::machine::{Dir, Elem, Flag, Mode, Tag, Token};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: &'static str,
    pub location: String,
    pub msg: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.clause, self.location, self.msg)
    }
}

fn v(clause: &'static str, location: impl fmt::Display, msg: impl Into<String>) -> Violation {
    Violation { clause, location: location.to_string(), msg: msg.into() }
}

/// Graphs above this size skip the cycle clause unless forced.
pub const CYCLE_CHECK_LIMIT: usize = 10_000;

fn is_const_box(g: &Graph, bang: NodeId) -> bool {
    g.box_of_bang(bang).is_some_and(|b| {
        g.bx(b).doors.is_empty()
            && g.box_content(b).is_some_and(|c| matches!(g.kind(c), NodeKind::Const(_) | NodeKind::UnitConst))
    })
}

fn producer(g: &Graph, e: EdgeId) -> Option<NodeId> {
    if e.is_nil() || !g.edge_live(e) {
        return None;
    }
    g.above(e).filter(|&n| g.is_live(n))
}

/// Whether everything reachable upwards from `start` is made of operations,
/// conditionals, contractions and dereferences, ending in cells or constant
/// boxes.
pub fn is_dataflow_environment(g: &Graph, start: EdgeId) -> Result<(), String> {
    let mut seen = HashSet::new();
    let mut work = vec![start];
    while let Some(e) = work.pop() {
        let Some(n) = producer(g, e) else {
            return Err(format!("{e} has no live producer"));
        };
        if !seen.insert(n) {
            continue;
        }
        match g.kind(n) {
            NodeKind::Cell(_) => {}
            NodeKind::Bang if is_const_box(g, n) => {}
            NodeKind::Contraction(_) => {
                let up = g.out_edge(n, 0);
                match producer(g, up).map(|m| g.kind(m)) {
                    Some(NodeKind::Contraction(_)) => return Err(format!("{n} feeds another contraction")),
                    Some(NodeKind::Bang) => return Err(format!("{n} shares a box")),
                    _ => work.push(up),
                }
            }
            NodeKind::Deref => work.push(g.out_edge(n, 0)),
            NodeKind::If => {
                let cond = g.out_edge(n, 0);
                if producer(g, cond).is_some_and(|m| g.kind(m) == &NodeKind::Bang) {
                    return Err(format!("{n} has a constant condition"));
                }
                work.extend([cond, g.out_edge(n, 1), g.out_edge(n, 2)]);
            }
            NodeKind::BinOp(_) => {
                let (l, r) = (g.out_edge(n, 0), g.out_edge(n, 1));
                let boxed = |e| producer(g, e).is_some_and(|m| g.kind(m) == &NodeKind::Bang);
                if boxed(l) && boxed(r) {
                    return Err(format!("{n} only has constant operands"));
                }
                work.extend([l, r]);
            }
            k => return Err(format!("{n} ({}) cannot appear in a dependency", k.tag())),
        }
    }
    Ok(())
}

/// Graph-level clauses.
pub fn check_graph(g: &Graph) -> Vec<Violation> {
    check_graph_with(g, false)
}

pub fn check_graph_with(g: &Graph, force_cycles: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    // 1: abstractions only ever sit directly inside a box
    for n in g.node_ids() {
        let want_rec_or_bang = match g.kind(n) {
            NodeKind::Lam => true,
            NodeKind::Rec => false,
            _ => continue,
        };
        let ok = match g.edge(g.in_edge(n, 1)).lo {
            End::Port(b, 0) => match g.kind(b) {
                NodeKind::Bang => true,
                NodeKind::Rec => want_rec_or_bang,
                _ => false,
            },
            _ => false,
        };
        if !ok || g.node(n).owner.is_none() {
            out.push(v("box-discipline", n, format!("{} is not the content of a box", g.kind(n).tag())));
        }
    }
    // 2: structure
    for msg in g.well_formed() {
        out.push(v("well-formed", "graph", msg));
    }
    // 3: a single root leaving through interface slot 0
    let roots = g.edge_ids().filter(|&e| g.edge(e).lo == End::Iface(0)).count();
    if roots != 1 {
        out.push(v("single-root", "interface", format!("{roots} edges leave through slot 0")));
    }
    // 4: cells are registered, at top level, and have a dependency
    let registered: HashSet<NodeId> = g.cells().collect();
    for n in g.node_ids() {
        if let NodeKind::Cell(_) = g.kind(n) {
            if !registered.contains(&n) {
                out.push(v("cell-placement", n, "cell was never registered"));
            }
            if g.node(n).owner.is_some() {
                out.push(v("cell-placement", n, "cell inside a box"));
            }
            match is_dataflow_environment(g, g.out_edge(n, 0)) {
                Ok(()) => {}
                Err(msg) => out.push(v("dependency-env", n, msg)),
            }
        }
    }
    // 5: every cycle passes through a cell or an abstraction
    if force_cycles || g.node_count() <= CYCLE_CHECK_LIMIT {
        if let Some(n) = find_cell_free_cycle(g) {
            out.push(v("cell-free-cycle", n, "cycle without a cell"));
        }
    }
    out
}

/// Depth-first search over consumer-to-producer links, ignoring cells and
/// abstraction nodes. Returns a node on a cycle.
fn find_cell_free_cycle(g: &Graph) -> Option<NodeId> {
    let skip = |n: NodeId| matches!(g.kind(n), NodeKind::Cell(_) | NodeKind::Lam | NodeKind::Rec);
    let succ = |n: NodeId| -> Vec<NodeId> {
        g.node(n).outs.iter().filter_map(|&e| producer(g, e)).filter(|&m| !skip(m)).collect()
    };
    // 0 unvisited, 1 on stack, 2 done
    let mut color = vec![0u8; g.node_ids().map(|n| n.0 as usize + 1).max().unwrap_or(0)];
    for root in g.node_ids() {
        if skip(root) || color[root.0 as usize] != 0 {
            continue;
        }
        let mut stack = vec![(root, succ(root), 0usize)];
        color[root.0 as usize] = 1;
        while let Some((n, next, i)) = stack.last_mut() {
            if *i < next.len() {
                let m = next[*i];
                *i += 1;
                match color[m.0 as usize] {
                    0 => {
                        color[m.0 as usize] = 1;
                        let s = succ(m);
                        stack.push((m, s, 0));
                    }
                    1 => return Some(m),
                    _ => {}
                }
            } else {
                color[n.0 as usize] = 2;
                stack.pop();
            }
        }
    }
    None
}

fn flag_site_ok(g: &Graph, t: &Token) -> bool {
    let ed = g.edge(t.pos);
    let above = ed.hi.node().filter(|&n| g.is_live(n)).map(|n| g.kind(n));
    let below = ed.lo.node().filter(|&n| g.is_live(n)).map(|n| g.kind(n));
    let up = t.dir == Dir::Up;
    match t.flag {
        Flag::None => true,
        Flag::Beta => up && matches!(above, Some(NodeKind::App)),
        Flag::If => up && matches!(below, Some(NodeKind::If)) && matches!(ed.lo, End::Port(_, 1 | 2)),
        Flag::Contract => up && matches!(below, Some(NodeKind::Contraction(_))),
        Flag::Bang => up && matches!(below, Some(NodeKind::Bang)),
        Flag::Rec => up && matches!(above, Some(NodeKind::Rec)),
        Flag::Make => !up && matches!(above, Some(NodeKind::MakeCell)),
        Flag::Peek => !up && matches!(above, Some(NodeKind::Peek)),
        Flag::Link(c) => !up && matches!(above, Some(NodeKind::Link)) && is_cell(g, c),
        Flag::Assign { cell, .. } => !up && matches!(above, Some(NodeKind::Assign)) && is_cell(g, cell),
        Flag::Root(c) => !up && matches!(above, Some(NodeKind::Root)) && is_cell(g, c),
        Flag::StepProp => up && matches!(above, Some(NodeKind::Step)),
        Flag::StepDone => !up && matches!(above, Some(NodeKind::Step)),
        Flag::Fold { .. } => !up && matches!(above, Some(NodeKind::BinOp(_))),
    }
}

fn is_cell(g: &Graph, c: NodeId) -> bool {
    g.is_live(c) && matches!(g.kind(c), NodeKind::Cell(_))
}

fn check_token(g: &Graph, t: &Token, who: &str, out: &mut Vec<Violation>) {
    // position
    if !g.edge_live(t.pos) {
        out.push(v("token-position", who, format!("token sits on dead edge {}", t.pos)));
        return;
    }
    let facing = match t.dir {
        Dir::Up => g.edge(t.pos).hi,
        Dir::Down => g.edge(t.pos).lo,
    };
    match facing {
        End::Port(n, _) if !g.is_live(n) => out.push(v("token-position", who, format!("token faces dead node {n}"))),
        End::Open => out.push(v("token-position", who, "token faces an open end")),
        _ => {}
    }
    // flag
    if !flag_site_ok(g, t) {
        out.push(v("flag-site", who, format!("flag {} away from its redex", t.flag)));
    }
    // stacks
    match (t.dir, t.stack.last()) {
        (_, None) => out.push(v("stacks", who, "empty computation stack")),
        (Dir::Up, Some(Elem::Star)) => {}
        (Dir::Up, Some(e)) => out.push(v("stacks", who, format!("going up with {e} on top"))),
        (Dir::Down, Some(Elem::Star | Elem::If0 | Elem::If1)) => {
            out.push(v("stacks", who, "going down without a value on top"))
        }
        (Dir::Down, _) => {}
    }
    for e in &t.stack {
        if let Elem::Int(_, Tag::CellRef(c)) = e {
            if !is_cell(g, *c) {
                out.push(v("stacks", who, format!("stack refers to {c}, which is not a cell")));
            }
        }
    }
    for &b in &t.bstack {
        let ok = g.edge_live(b)
            && g.edge(b).hi.node().is_some_and(|c| g.is_live(c) && g.kind(c).is_contraction());
        if !ok {
            out.push(v("stacks", who, format!("box stack entry {b} does not enter a contraction")));
        }
    }
}

/// State-level clauses for the main token and any prop tokens.
pub fn check_state(g: &Graph, main: &Token, props: &[Token], mode: Mode) -> Vec<Violation> {
    let mut out = Vec::new();
    if mode == Mode::Construct || props.is_empty() {
        check_token(g, main, "main", &mut out);
    }
    if !props.is_empty() && main.flag != Flag::StepProp {
        out.push(v("prop-needs-step", "props", format!("prop tokens exist while the main flag is {}", main.flag)));
    }
    if mode == Mode::Propagate && main.flag != Flag::StepProp {
        out.push(v("prop-needs-step", "main", "propagating without a pending step"));
    }
    for (i, t) in props.iter().enumerate() {
        let who = format!("prop {i}");
        check_token(g, t, &who, &mut out);
        match t.flag {
            Flag::None | Flag::Contract | Flag::Bang | Flag::Fold { flow: true } => {}
            f => out.push(v("prop-state", &who, format!("rewrite flag {f} during propagation"))),
        }
        if t.stack.iter().any(|e| matches!(e, Elem::Lam | Elem::Unit)) {
            out.push(v("prop-state", &who, "non-integer value during propagation"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::translate::translate_program;

    #[test]
    fn translated_programs_are_valid() {
        for src in ["5", "λx.x", "let x = ref 1 in link x (1 - deref x); step", "rec f. λn. if n then f (n - 1) else 0"] {
            let tr = translate_program(src).unwrap();
            assert_eq!(check_graph(&tr.graph), vec![], "{src}");
            assert_eq!(check_state(&tr.graph, &Token::new(tr.root), &[], Mode::Construct), vec![]);
        }
    }

    #[test]
    fn bare_lambda_fails_clause_one() {
        let mut g = Graph::new();
        let l = g.add_node(NodeKind::Lam);
        g.new_edge(End::Iface(0), End::Port(l, 1));
        let w = g.add_node(NodeKind::Contraction(0));
        g.new_edge(End::Port(w, 0), End::Port(l, 0));
        let k = g.const_box(NodeKind::Const(1), None);
        g.new_edge(End::Port(l, 0), End::Port(k, 0));
        let ids: Vec<_> = check_graph(&g).iter().map(|v| v.clause).collect();
        assert!(ids.contains(&"box-discipline"), "{ids:?}");
    }

    #[test]
    fn cell_free_cycle_fails_clause_five() {
        let mut g = Graph::new();
        let a = g.add_node(NodeKind::Deref);
        let c = g.add_node(NodeKind::Contraction(0));
        let top = g.new_edge(End::Iface(0), End::Open);
        g.c_push_in(c, top);
        g.new_edge(End::Port(c, 0), End::Port(a, 0));
        let back = g.new_edge(End::Port(a, 0), End::Open);
        g.c_push_in(c, back);
        let ids: Vec<_> = check_graph(&g).iter().map(|v| v.clause).collect();
        assert!(ids.contains(&"cell-free-cycle"), "{ids:?}");
    }

    #[test]
    fn misplaced_flag_fails_clause_thirteen() {
        let tr = translate_program("5").unwrap();
        let mut t = Token::new(tr.root);
        t.flag = Flag::Beta;
        let ids: Vec<_> = check_state(&tr.graph, &t, &[], Mode::Construct).iter().map(|v| v.clause).collect();
        assert_eq!(ids, vec!["flag-site"]);
    }

    #[test]
    fn props_need_pending_step() {
        let tr = translate_program("5").unwrap();
        let main = Token::new(tr.root);
        let ids: Vec<_> =
            check_state(&tr.graph, &main, std::slice::from_ref(&main), Mode::Construct).iter().map(|v| v.clause).collect();
        assert!(ids.contains(&"prop-needs-step"));
    }

    #[test]
    fn dataflow_environment() {
        let tr = translate_program("let x = ref 1 in link x (1 - deref x); x").unwrap();
        let mut m = crate::machine::Machine::new(tr, Default::default()).unwrap();
        m.run();
        let c = m.graph.cells().next().unwrap();
        assert_eq!(is_dataflow_environment(&m.graph, m.graph.out_edge(c, 0)), Ok(()));
        let mut g = Graph::new();
        let op = g.add_node(NodeKind::BinOp(crate::syntax::BinOp::Add));
        let top = g.new_edge(End::Iface(0), End::Port(op, 0));
        for i in 0..2 {
            let k = g.const_box(NodeKind::Const(1), None);
            g.new_edge(End::Port(op, i), End::Port(k, 0));
        }
        assert!(is_dataflow_environment(&g, top).is_err());
    }
}
