use crate::graph::{End, Graph, NodeKind};
use crate::syntax::BinOp;

use super::{Dir, Elem, Flag, Tag, Token};

type Res = Result<&'static str, String>;

fn pop(t: &mut Token) -> Result<Elem, String> {
    t.stack.pop().ok_or_else(|| "empty stack".to_string())
}

fn pop_star(t: &mut Token) -> Result<(), String> {
    match pop(t)? {
        Elem::Star => Ok(()),
        e => Err(format!("expected * on the stack, found {e}")),
    }
}

fn pop_int(t: &mut Token) -> Result<(i64, Tag), String> {
    match pop(t)? {
        Elem::Int(n, tag) => Ok((n, tag)),
        e => Err(format!("expected an integer on the stack, found {e}")),
    }
}

fn pop_cell(t: &mut Token) -> Result<(i64, crate::graph::NodeId), String> {
    match pop(t)? {
        Elem::Int(n, Tag::CellRef(c)) => Ok((n, c)),
        e => Err(format!("expected a cell on the stack, found {e}")),
    }
}

fn is_unary(k: &NodeKind) -> bool {
    matches!(k, NodeKind::Deref | NodeKind::Peek | NodeKind::MakeCell | NodeKind::Root)
}

/// The flow tag wins over plain; mixing a cell into arithmetic is rejected
/// by the typechecker and treated as flow here.
fn combine(a: Tag, b: Tag) -> Tag {
    if a == Tag::Plain && b == Tag::Plain {
        Tag::Plain
    } else {
        Tag::Flow
    }
}

/// Values chosen by a flow-mode conditional depend on the condition.
fn retag(e: Elem) -> Elem {
    match e {
        Elem::Int(n, Tag::Plain) => Elem::Int(n, Tag::Flow),
        e => e,
    }
}

/// One pass transition. The graph is never modified; a rewrite is requested
/// by setting the token's flag.
pub(crate) fn pass(g: &Graph, t: &mut Token) -> Res {
    debug_assert_eq!(t.flag, Flag::None);
    let e = t.pos;
    match t.dir {
        Dir::Up => {
            let (x, i) = match g.edge(e).hi {
                End::Port(x, i) => (x, i),
                End::Iface(k) => return Err(format!("reached free variable slot {k}")),
                End::Open => return Err("edge has no producer".into()),
            };
            let kind = g.kind(x);
            match (kind, i) {
                (NodeKind::Lam, 1) => {
                    pop_star(t)?;
                    t.stack.push(Elem::Lam);
                    t.dir = Dir::Down;
                    Ok("pass.lam.i1.up")
                }
                (NodeKind::Rec, 1) => {
                    t.flag = Flag::Rec;
                    Ok("pass.rec.i1.up")
                }
                (NodeKind::App, 0) => {
                    t.up(g.out_edge(x, 1));
                    Ok("pass.app.i0.up")
                }
                (NodeKind::Const(n), 0) => {
                    let n = *n;
                    pop_star(t)?;
                    t.stack.push(Elem::Int(n, Tag::Plain));
                    t.dir = Dir::Down;
                    Ok("pass.const.i0.up")
                }
                (NodeKind::UnitConst, 0) => {
                    pop_star(t)?;
                    t.stack.push(Elem::Unit);
                    t.dir = Dir::Down;
                    Ok("pass.unit.i0.up")
                }
                (NodeKind::BinOp(_), 0) => {
                    t.up(g.out_edge(x, 1));
                    Ok("pass.op.i0.up")
                }
                (NodeKind::Assign, 0) => {
                    t.up(g.out_edge(x, 1));
                    Ok("pass.assign.i0.up")
                }
                (NodeKind::Link, 0) => {
                    t.up(g.out_edge(x, 1));
                    Ok("pass.link.i0.up")
                }
                (k, 0) if is_unary(k) => {
                    t.up(g.out_edge(x, 0));
                    Ok(match k {
                        NodeKind::Deref => "pass.deref.i0.up",
                        NodeKind::Peek => "pass.peek.i0.up",
                        NodeKind::MakeCell => "pass.ref.i0.up",
                        _ => "pass.root.i0.up",
                    })
                }
                (NodeKind::If, 0) => {
                    t.up(g.out_edge(x, 0));
                    Ok("pass.if.i0.up")
                }
                (NodeKind::Bang, 0) => {
                    t.up(g.out_edge(x, 0));
                    t.flag = Flag::Bang;
                    Ok("pass.bang.i0.up")
                }
                (NodeKind::Query, 0) => {
                    t.up(g.out_edge(x, 0));
                    Ok("pass.door.i0.up")
                }
                (NodeKind::Cell(n), 0) => {
                    let n = *n;
                    pop_star(t)?;
                    t.stack.push(Elem::Int(n, Tag::CellRef(x)));
                    t.dir = Dir::Down;
                    Ok("pass.cell.i0.up")
                }
                (NodeKind::Contraction(_), _) => {
                    t.bstack.push(e);
                    t.up(g.out_edge(x, 0));
                    t.flag = Flag::Contract;
                    Ok("pass.C.in.up")
                }
                (NodeKind::Step, 0) => {
                    if t.stack.last() != Some(&Elem::Star) {
                        return Err("step reached without * on the stack".into());
                    }
                    t.flag = Flag::StepProp;
                    Ok("switch.sp")
                }
                (k, i) => Err(format!("no rule going up into {}.i{i}", k.tag())),
            }
        }
        Dir::Down => {
            let (y, j) = match g.edge(e).lo {
                End::Port(y, j) => (y, j),
                End::Iface(k) => return Err(format!("returned to interface slot {k}")),
                End::Open => return Err("edge has no consumer".into()),
            };
            let kind = g.kind(y);
            match (kind, j) {
                (NodeKind::App, 1) => {
                    pop(t)?;
                    t.stack.push(Elem::Star);
                    t.up(g.out_edge(y, 0));
                    Ok("pass.app.o1.down")
                }
                (NodeKind::App, 0) => {
                    match pop(t)? {
                        Elem::Lam => {}
                        e => return Err(format!("applying a non-function {e}")),
                    }
                    t.stack.push(Elem::Star);
                    t.up(g.in_edge(y, 0));
                    t.flag = Flag::Beta;
                    Ok("pass.app.o0.down")
                }
                (NodeKind::BinOp(_) | NodeKind::Assign | NodeKind::Link, 1) => {
                    t.stack.push(Elem::Star);
                    t.up(g.out_edge(y, 0));
                    Ok(match kind {
                        NodeKind::BinOp(_) => "pass.op.o1.down",
                        NodeKind::Assign => "pass.assign.o1.down",
                        _ => "pass.link.o1.down",
                    })
                }
                (NodeKind::BinOp(op), 0) => {
                    let op: BinOp = *op;
                    let (m, lt) = pop_int(t)?;
                    let (n, rt) = pop_int(t)?;
                    let tag = combine(lt, rt);
                    t.stack.push(Elem::Int(op.apply(m, n), tag));
                    t.down(g.in_edge(y, 0));
                    t.flag = Flag::Fold { flow: tag != Tag::Plain };
                    Ok(if tag == Tag::Plain { "pass.op.o0.down" } else { "flow.op" })
                }
                (NodeKind::Assign, 0) => {
                    let (_, cell) = pop_cell(t)?;
                    let (value, _) = pop_int(t)?;
                    t.stack.push(Elem::Unit);
                    t.down(g.in_edge(y, 0));
                    t.flag = Flag::Assign { value, cell };
                    Ok("pass.assign.o0.down")
                }
                (NodeKind::Link, 0) => {
                    let (_, cell) = pop_cell(t)?;
                    pop_int(t)?;
                    t.stack.push(Elem::Unit);
                    t.down(g.in_edge(y, 0));
                    t.flag = Flag::Link(cell);
                    Ok("pass.link.o0.down")
                }
                (NodeKind::Deref, 0) => {
                    let (n, _) = pop_cell(t)?;
                    t.stack.push(Elem::Int(n, Tag::Flow));
                    t.down(g.in_edge(y, 0));
                    Ok("flow.d")
                }
                (NodeKind::Peek, 0) => {
                    let (n, _) = pop_int(t)?;
                    t.stack.push(Elem::Int(n, Tag::Plain));
                    t.down(g.in_edge(y, 0));
                    t.flag = Flag::Peek;
                    Ok("pass.peek.o0.down")
                }
                (NodeKind::Root, 0) => {
                    let (n, c) = pop_cell(t)?;
                    t.stack.push(Elem::Int(n, Tag::Plain));
                    t.down(g.in_edge(y, 0));
                    t.flag = Flag::Root(c);
                    Ok("pass.root.o0.down")
                }
                (NodeKind::MakeCell, 0) => {
                    let (n, _) = pop_int(t)?;
                    t.stack.push(Elem::Int(n, Tag::Plain));
                    t.down(g.in_edge(y, 0));
                    t.flag = Flag::Make;
                    Ok("pass.ref.o0.down")
                }
                (NodeKind::If, 0) => {
                    let (n, tag) = pop_int(t)?;
                    if tag == Tag::Plain {
                        t.stack.push(Elem::Star);
                        t.up(g.out_edge(y, if n == 0 { 1 } else { 2 }));
                        t.flag = Flag::If;
                        Ok("pass.if.o0.down")
                    } else {
                        t.stack.push(if n == 0 { Elem::If0 } else { Elem::If1 });
                        t.stack.push(Elem::Star);
                        t.up(g.out_edge(y, 1));
                        Ok("flow.if.cond")
                    }
                }
                (NodeKind::If, 1) => {
                    t.stack.push(Elem::Star);
                    t.up(g.out_edge(y, 2));
                    Ok("flow.if.o1.down")
                }
                (NodeKind::If, 2) => {
                    let then_v = pop(t)?;
                    let else_v = pop(t)?;
                    let (v, rule) = match pop(t)? {
                        Elem::If0 => (else_v, "flow.if.sel0"),
                        Elem::If1 => (then_v, "flow.if.sel1"),
                        e => return Err(format!("expected a branch marker, found {e}")),
                    };
                    t.stack.push(retag(v));
                    t.down(g.in_edge(y, 0));
                    Ok(rule)
                }
                (NodeKind::Bang, 0) => {
                    t.down(g.in_edge(y, 0));
                    Ok("pass.bang.o0.down")
                }
                (NodeKind::Query, 0) => {
                    t.down(g.in_edge(y, 0));
                    Ok("pass.door.o0.down")
                }
                (NodeKind::Contraction(_), 0) => {
                    let b = t.bstack.pop().ok_or("box stack empty at a contraction")?;
                    match g.edge(b).hi {
                        End::Port(c, _) if c == y => {}
                        _ => return Err("box stack top does not enter this contraction".into()),
                    }
                    t.down(b);
                    Ok("pass.C.o0.down")
                }
                (k, j) => Err(format!("no rule going down out of {}.o{j}", k.tag())),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeKind;

    #[test]
    fn constant_reflects() {
        let mut g = Graph::new();
        let k = g.add_node(NodeKind::Const(7));
        let e = g.new_edge(End::Iface(0), End::Port(k, 0));
        let mut t = Token::new(e);
        assert_eq!(pass(&g, &mut t), Ok("pass.const.i0.up"));
        assert_eq!(t.dir, Dir::Down);
        assert_eq!(t.stack, vec![Elem::Int(7, Tag::Plain)]);
    }

    #[test]
    fn binop_sets_fold_flag() {
        let mut g = Graph::new();
        let op = g.add_node(NodeKind::BinOp(BinOp::Add));
        let top = g.new_edge(End::Iface(0), End::Port(op, 0));
        let a = g.add_node(NodeKind::Const(3));
        g.new_edge(End::Port(op, 0), End::Port(a, 0));
        let mut t = Token::new(top);
        t.pos = g.out_edge(op, 0);
        t.dir = Dir::Down;
        // left operand (3) on top, right (4) below
        t.stack = vec![Elem::Int(4, Tag::Plain), Elem::Int(3, Tag::Plain)];
        assert_eq!(pass(&g, &mut t), Ok("pass.op.o0.down"));
        assert_eq!(t.stack, vec![Elem::Int(7, Tag::Plain)]);
        assert_eq!(t.flag, Flag::Fold { flow: false });
        assert_eq!(t.pos, top);
    }

    #[test]
    fn cell_reflects_reference() {
        let mut g = Graph::new();
        let c = g.add_node(NodeKind::Cell(9));
        let e = g.new_edge(End::Iface(0), End::Port(c, 0));
        let mut t = Token::new(e);
        pass(&g, &mut t).unwrap();
        assert_eq!(t.stack, vec![Elem::Int(9, Tag::CellRef(c))]);
    }

    #[test]
    fn flow_if_selects_else_on_zero() {
        let mut g = Graph::new();
        let i = g.add_node(NodeKind::If);
        let top = g.new_edge(End::Iface(0), End::Port(i, 0));
        let mut t = Token::new(top);
        let k = g.add_node(NodeKind::Const(0));
        t.pos = g.new_edge(End::Port(i, 2), End::Port(k, 0));
        t.dir = Dir::Down;
        t.stack = vec![Elem::If0, Elem::Int(1, Tag::Plain), Elem::Int(2, Tag::Plain)];
        assert_eq!(pass(&g, &mut t), Ok("flow.if.sel0"));
        assert_eq!(t.stack, vec![Elem::Int(1, Tag::Flow)]);
    }

    #[test]
    fn no_rule_is_an_error() {
        let mut g = Graph::new();
        let l = g.add_node(NodeKind::Lam);
        let e = g.new_edge(End::Iface(0), End::Port(l, 0));
        assert!(pass(&g, &mut Token::new(e)).is_err());
    }
}
