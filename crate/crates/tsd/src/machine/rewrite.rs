use crate::graph::{End, Graph, NodeId, NodeKind};

use super::{Dir, Elem, Flag, Machine, Tag};

type Res = Result<&'static str, String>;

/// Replaces a node having one in-port with a closed box around `kind`.
/// Everything the node consumed is discarded.
fn replace_with_box(g: &mut Graph, n: NodeId, kind: NodeKind) {
    let owner = g.node(n).owner;
    let bang = g.const_box(kind, owner);
    let e = g.in_edge(n, 0);
    g.set_hi(e, End::Port(bang, 0));
    let outs = g.node(n).outs.clone();
    for o in outs.into_iter().filter(|o| !o.is_nil()) {
        g.discard(o);
    }
    g.kill_node(n);
}

fn above(g: &Graph, e: crate::graph::EdgeId) -> Result<NodeId, String> {
    g.above(e).ok_or_else(|| "no node above the token".to_string())
}

fn below(g: &Graph, e: crate::graph::EdgeId) -> Result<NodeId, String> {
    g.below(e).ok_or_else(|| "no node below the token".to_string())
}

impl Machine {
    /// Performs the rewrite the token's flag asks for.
    pub(super) fn rewrite(&mut self) -> Res {
        let g = &mut self.graph;
        let t = &mut self.token;
        match t.flag {
            Flag::None | Flag::StepProp => unreachable!("not a rewrite flag"),
            Flag::Contract => {
                let c1 = below(g, t.pos)?;
                match g.edge(t.pos).hi {
                    End::Port(c2, k) if g.kind(c2).is_contraction() => {
                        let ins = g.node(c1).ins.clone();
                        g.c_splice_in(c2, k, &ins);
                        g.kill_edge(t.pos);
                        g.kill_node(c1);
                        t.pos = g.out_edge(c2, 0);
                        Ok("rw.Cc")
                    }
                    _ => {
                        t.flag = Flag::None;
                        Ok("rw.C.reset")
                    }
                }
            }
            Flag::Bang => {
                let bang = below(g, t.pos)?;
                let under = g.in_edge(bang, 0);
                let c = match g.edge(under).lo {
                    End::Port(c, _) if g.kind(c).is_contraction() => c,
                    _ => {
                        t.flag = Flag::None;
                        return Ok("rw.X!");
                    }
                };
                let top = *t.bstack.last().ok_or("contraction below a box but box stack is empty")?;
                let slot = match g.edge(top).hi {
                    End::Port(x, s) if x == c => s,
                    _ => return Err("box stack top does not enter the contraction below the box".into()),
                };
                if g.node(c).ins.len() >= 2 {
                    let b = g.box_of_bang(bang).ok_or("bang without a box")?;
                    let cp = g.copy_box(b);
                    g.c_remove_in(c, slot);
                    g.set_hi(top, End::Port(cp.bang, 0));
                    t.bstack.pop();
                    t.pos = g.out_edge(cp.bang, 0);
                    Ok("rw.delta")
                } else {
                    g.fuse(top, under);
                    g.kill_node(c);
                    t.bstack.pop();
                    Ok("rw.C!")
                }
            }
            Flag::Beta => {
                let app = above(g, t.pos)?;
                let fe = g.out_edge(app, 0);
                let bang = above(g, fe)?;
                let b = g.box_of_bang(bang).ok_or("function is not a box")?;
                let lam = g.box_content(b).ok_or("empty box")?;
                if g.kind(lam) != &NodeKind::Lam {
                    return Err("box does not hold an abstraction".into());
                }
                let body = g.out_edge(lam, 0);
                let var = g.in_edge(lam, 0);
                let arg = g.out_edge(app, 1);
                g.open_box(b);
                // the variable goes first: for λx.x it is the body edge too
                match g.below(var) {
                    Some(w) if g.is_weakening(w) => {
                        g.kill_edge(var);
                        g.kill_node(w);
                        g.discard(arg);
                    }
                    _ => g.fuse(var, arg),
                }
                g.fuse(t.pos, body);
                g.kill_node(app);
                g.kill_node(lam);
                t.flag = Flag::None;
                Ok("rw.beta")
            }
            Flag::Rec => {
                let mu = above(g, t.pos)?;
                let b = g.node(mu).owner.ok_or("recursive definition outside a box")?;
                let fe = g.in_edge(mu, 0);
                match g.below(fe) {
                    Some(w) if g.is_weakening(w) => {
                        g.kill_edge(fe);
                        g.kill_node(w);
                    }
                    _ => {
                        let cp = g.copy_box(b);
                        let q = g.add_door(b);
                        g.set_hi(fe, End::Port(q, 0));
                        g.new_edge(End::Port(q, 0), End::Port(cp.bang, 0));
                    }
                }
                let inner = g.out_edge(mu, 0);
                g.fuse(t.pos, inner);
                g.kill_node(mu);
                t.flag = Flag::None;
                Ok("rw.mu")
            }
            Flag::Make => {
                let mc = above(g, t.pos)?;
                let Some(Elem::Int(n, _)) = t.stack.last().copied() else {
                    return Err("cell creation without an integer".into());
                };
                g.set_kind(mc, NodeKind::Cell(n));
                g.register_cell(mc);
                *t.stack.last_mut().unwrap() = Elem::Int(n, Tag::CellRef(mc));
                t.flag = Flag::None;
                Ok("rw.m")
            }
            Flag::Peek => {
                let p = above(g, t.pos)?;
                let Some(Elem::Int(n, _)) = t.stack.last().copied() else {
                    return Err("peek without an integer".into());
                };
                self.peeks.push(n);
                replace_with_box(g, p, NodeKind::Const(n));
                t.flag = Flag::None;
                Ok("rw.p")
            }
            Flag::Fold { flow: true } => {
                t.flag = Flag::None;
                Ok("flow.$.reset")
            }
            Flag::Fold { flow: false } => {
                let op = above(g, t.pos)?;
                let Some(Elem::Int(n, Tag::Plain)) = t.stack.last().copied() else {
                    return Err("constant folding without a plain integer".into());
                };
                replace_with_box(g, op, NodeKind::Const(n));
                t.flag = Flag::None;
                Ok("rw.fold")
            }
            Flag::Assign { value, cell } => {
                let a = above(g, t.pos)?;
                if !g.is_live(cell) || !matches!(g.kind(cell), NodeKind::Cell(_)) {
                    return Err("assignment target is not a live cell".into());
                }
                g.set_cell_value(cell, value);
                replace_with_box(g, a, NodeKind::UnitConst);
                t.flag = Flag::None;
                Ok("rw.a")
            }
            Flag::Link(cell) => {
                let l = above(g, t.pos)?;
                if !g.is_live(cell) || !matches!(g.kind(cell), NodeKind::Cell(_)) {
                    return Err("link target is not a live cell".into());
                }
                let dep = g.out_edge(l, 1);
                let old = g.out_edge(cell, 0);
                g.set_lo(old, End::Open);
                g.set_lo(dep, End::Port(cell, 0));
                g.discard(old);
                replace_with_box(g, l, NodeKind::UnitConst);
                t.flag = Flag::None;
                Ok("rw.l")
            }
            Flag::Root(cell) => {
                let r = above(g, t.pos)?;
                if !g.is_live(cell) || !matches!(g.kind(cell), NodeKind::Cell(_)) {
                    return Err("root of something that is not a live cell".into());
                }
                let dep = g.out_edge(cell, 0);
                let rule = match g.edge(dep).hi {
                    End::Port(x, _) if g.kind(x).is_contraction() => {
                        g.c_push_in(x, t.pos);
                        "rw.root.C"
                    }
                    End::Port(x, _) if g.kind(x) == &NodeKind::Bang => {
                        let b = g.box_of_bang(x).ok_or("bang without a box")?;
                        let cp = g.copy_box(b);
                        g.set_hi(t.pos, End::Port(cp.bang, 0));
                        "rw.root.box"
                    }
                    _ => {
                        let owner = g.node(cell).owner;
                        g.set_hi(t.pos, End::Open);
                        g.share_upstream(dep, t.pos, owner);
                        "rw.root.share"
                    }
                };
                let ro = g.out_edge(r, 0);
                g.discard(ro);
                g.kill_node(r);
                *t.stack.last_mut().ok_or("empty stack")? = Elem::Star;
                t.dir = Dir::Up;
                t.flag = Flag::None;
                Ok(rule)
            }
            Flag::If => {
                let i = below(g, t.pos)?;
                let taken = match g.edge(t.pos).lo {
                    End::Port(_, k) => k,
                    _ => unreachable!(),
                };
                let inn = g.in_edge(i, 0);
                let cond = g.out_edge(i, 0);
                let other = g.out_edge(i, 3 - taken);
                g.fuse(inn, t.pos);
                g.discard(cond);
                g.discard(other);
                g.kill_node(i);
                t.pos = inn;
                t.flag = Flag::None;
                Ok("rw.if")
            }
            Flag::StepDone => {
                let s = above(g, t.pos)?;
                let Some(Elem::Int(n, _)) = t.stack.last().copied() else {
                    return Err("step result missing".into());
                };
                replace_with_box(g, s, NodeKind::Const(n));
                t.flag = Flag::None;
                Ok("rw.s")
            }
        }
    }
}
