//! Terms to initial machine graphs. Port layouts are listed in
//! docs/TRANSLATION.md.

use std::collections::BTreeMap;

use crate::graph::{BoxId, EdgeId, End, Graph, NodeKind};
use crate::syntax::{self, infer_type, Prim, Term, Type, TypeEnv};

#[derive(Clone, Debug)]
pub struct TranslationResult {
    pub graph: Graph,
    /// Edge leaving the graph at interface slot 0; the token starts here.
    pub root: EdgeId,
    /// Free variable name to the edge entering its interface slot.
    pub free_var_ports: BTreeMap<String, EdgeId>,
    pub ty: Type,
}

#[derive(Debug, thiserror::Error)]
pub enum TranslateError {
    #[error("parse: {0}")]
    Parse(#[from] syntax::SyntaxError),
    #[error("type: {0}")]
    Type(#[from] syntax::TypeError),
}

type Uses = BTreeMap<String, Vec<EdgeId>>;

struct Frag {
    /// Open at the bottom.
    root: EdgeId,
    /// Variable occurrences, each an edge open at the top.
    uses: Uses,
}

fn merge(into: &mut Uses, from: Uses) {
    for (x, es) in from {
        into.entry(x).or_default().extend(es);
    }
}

/// Connects all occurrences of a variable to `target`: a weakening when
/// there are none, directly for one, through a single contraction otherwise.
fn bind(g: &mut Graph, uses: Vec<EdgeId>, target: End, owner: Option<BoxId>) {
    match uses.len() {
        0 => {
            let w = g.add_node_in(NodeKind::Contraction(0), owner);
            g.new_edge(End::Port(w, 0), target);
        }
        1 => g.set_hi(uses[0], target),
        _ => {
            let c = g.add_node_in(NodeKind::Contraction(0), owner);
            for e in uses {
                g.c_push_in(c, e);
            }
            g.new_edge(End::Port(c, 0), target);
        }
    }
}

/// Routes the remaining free variables of a box through one door each.
fn close_box(g: &mut Graph, b: BoxId, uses: Uses) -> Uses {
    let mut outer = Uses::new();
    for (x, es) in uses {
        let q = g.add_door(b);
        bind(g, es, End::Port(q, 0), Some(b));
        let e = g.new_edge(End::Port(q, 0), End::Open);
        outer.insert(x, vec![e]);
    }
    outer
}

fn prim_kind(p: Prim) -> NodeKind {
    match p {
        Prim::Bin(op) => NodeKind::BinOp(op),
        Prim::Ref => NodeKind::MakeCell,
        Prim::Deref => NodeKind::Deref,
        Prim::Root => NodeKind::Root,
        Prim::Link => NodeKind::Link,
        Prim::Assign => NodeKind::Assign,
        Prim::Peek => NodeKind::Peek,
        Prim::Step => NodeKind::Step,
    }
}

/// `λ%a0 … λ%an. p %a0 … %an`; the `%` names cannot clash with source names.
fn eta(p: Prim) -> Term {
    let names: Vec<String> = (0..p.arity()).map(|i| format!("%a{i}")).collect();
    let body = Term::prim(p, names.iter().map(|x| Term::var(x)));
    names.iter().rev().fold(body, |b, x| Term::lam(x, b))
}

fn const_frag(g: &mut Graph, kind: NodeKind, owner: Option<BoxId>) -> Frag {
    let bang = g.const_box(kind, owner);
    let root = g.new_edge(End::Open, End::Port(bang, 0));
    Frag { root, uses: Uses::new() }
}

fn tr(g: &mut Graph, t: &Term, owner: Option<BoxId>) -> Frag {
    match t {
        Term::Var(x) => {
            let e = g.new_edge(End::Open, End::Open);
            Frag { root: e, uses: Uses::from([(x.clone(), vec![e])]) }
        }
        Term::Int(n) => const_frag(g, NodeKind::Const(*n), owner),
        Term::Unit => const_frag(g, NodeKind::UnitConst, owner),
        Term::Lam(x, _, body) => {
            let b = g.add_box(owner);
            let bang = g.bx(b).bang;
            let lam = g.add_node_in(NodeKind::Lam, Some(b));
            g.new_edge(End::Port(bang, 0), End::Port(lam, 1));
            let mut fb = tr(g, body, Some(b));
            g.set_lo(fb.root, End::Port(lam, 0));
            let xs = fb.uses.remove(x).unwrap_or_default();
            bind(g, xs, End::Port(lam, 0), Some(b));
            let uses = close_box(g, b, fb.uses);
            let root = g.new_edge(End::Open, End::Port(bang, 0));
            Frag { root, uses }
        }
        Term::Rec(f, _, body) => {
            let Term::Lam(x, _, lbody) = &**body else {
                panic!("rec body must be a function literal (rejected by the typechecker)");
            };
            let b = g.add_box(owner);
            let bang = g.bx(b).bang;
            let mu = g.add_node_in(NodeKind::Rec, Some(b));
            let lam = g.add_node_in(NodeKind::Lam, Some(b));
            g.new_edge(End::Port(bang, 0), End::Port(mu, 1));
            g.new_edge(End::Port(mu, 0), End::Port(lam, 1));
            let mut fb = tr(g, lbody, Some(b));
            g.set_lo(fb.root, End::Port(lam, 0));
            let xs = fb.uses.remove(x).unwrap_or_default();
            bind(g, xs, End::Port(lam, 0), Some(b));
            let fs = fb.uses.remove(f).unwrap_or_default();
            bind(g, fs, End::Port(mu, 0), Some(b));
            let uses = close_box(g, b, fb.uses);
            let root = g.new_edge(End::Open, End::Port(bang, 0));
            Frag { root, uses }
        }
        Term::Op(p) if p.arity() == 0 => {
            let n = g.add_node_in(prim_kind(*p), owner);
            let root = g.new_edge(End::Open, End::Port(n, 0));
            Frag { root, uses: Uses::new() }
        }
        Term::Op(p) => tr(g, &eta(*p), owner),
        Term::If(c, th, el) => {
            let n = g.add_node_in(NodeKind::If, owner);
            let mut uses = Uses::new();
            for (i, sub) in [c, el, th].into_iter().enumerate() {
                let f = tr(g, sub, owner);
                g.set_lo(f.root, End::Port(n, i));
                merge(&mut uses, f.uses);
            }
            let root = g.new_edge(End::Open, End::Port(n, 0));
            Frag { root, uses }
        }
        Term::App(..) => {
            let (head, args) = t.spine();
            if let Term::Op(p) = head {
                let k = p.arity();
                if k > 0 && args.len() >= k {
                    let n = g.add_node_in(prim_kind(*p), owner);
                    let mut uses = Uses::new();
                    for (i, a) in args[..k].iter().copied().enumerate() {
                        let f = tr(g, a, owner);
                        g.set_lo(f.root, End::Port(n, i));
                        merge(&mut uses, f.uses);
                    }
                    let root = g.new_edge(End::Open, End::Port(n, 0));
                    let mut fr = Frag { root, uses };
                    for a in args[k..].iter().copied() {
                        fr = app(g, fr, a, owner);
                    }
                    return fr;
                }
            }
            let Term::App(f, a) = t else { unreachable!() };
            let ff = tr(g, f, owner);
            app(g, ff, a, owner)
        }
    }
}

fn app(g: &mut Graph, ff: Frag, a: &Term, owner: Option<BoxId>) -> Frag {
    let n = g.add_node_in(NodeKind::App, owner);
    g.set_lo(ff.root, End::Port(n, 0));
    let fa = tr(g, a, owner);
    g.set_lo(fa.root, End::Port(n, 1));
    let mut uses = ff.uses;
    merge(&mut uses, fa.uses);
    let root = g.new_edge(End::Open, End::Port(n, 0));
    Frag { root, uses }
}

/// Builds the graph of a well-typed term. Variables of `env` become
/// interface slots 1.., in the order `env.names()` lists them.
pub fn translate(term: &Term, env: &TypeEnv) -> Result<TranslationResult, TranslateError> {
    let ty = infer_type(env, term)?;
    let mut g = Graph::new();
    let mut f = tr(&mut g, term, None);
    g.set_lo(f.root, End::Iface(0));
    let mut free_var_ports = BTreeMap::new();
    for (k, x) in env.names().into_iter().enumerate() {
        let es = f.uses.remove(&x).unwrap_or_default();
        let slot = End::Iface(k as u32 + 1);
        bind(&mut g, es, slot, None);
        let e = g.edge_ids().find(|&e| g.edge(e).hi == slot).expect("slot bound");
        free_var_ports.insert(x, e);
    }
    debug_assert!(f.uses.is_empty(), "typechecked term has unbound uses");
    Ok(TranslationResult { graph: g, root: f.root, free_var_ports, ty })
}

/// parse, typecheck and translate a closed program.
pub fn translate_program(src: &str) -> Result<TranslationResult, TranslateError> {
    let term = syntax::parse(src)?;
    translate(&term, &TypeEnv::new())
}

pub fn translate_open(src: &str, env: &[(&str, Type)]) -> Result<TranslationResult, TranslateError> {
    let term = syntax::parse(src)?;
    let env = env.iter().fold(TypeEnv::new(), |e, (x, t)| e.with(x, t.clone()));
    translate(&term, &env)
}

/// Node kinds present in the graph, as (tag, count) pairs sorted by tag.
pub fn inventory(g: &Graph) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for n in g.node_ids() {
        let k = match g.kind(n) {
            NodeKind::Const(v) => format!("const {v}"),
            NodeKind::BinOp(op) => format!("op {}", op.symbol()),
            NodeKind::Contraction(k) => format!("C{k}"),
            NodeKind::Cell(v) => format!("cell {v}"),
            other => other.tag().to_string(),
        };
        *m.entry(k).or_default() += 1;
    }
    m
}
