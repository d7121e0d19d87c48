//! Port graph with nestable boxes.
//!
//! Every edge runs from a consumer's out-port (its `lo` end, drawn below) to a
//! producer's in-port (its `hi` end, drawn above), so edges point along data
//! dependencies. A token travelling up an edge arrives at the in-port of
//! `hi`; travelling down it arrives at the out-port of `lo`.

mod check;
mod copy;
mod dot;
mod gc;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::syntax::BinOp;

pub use check::{canonical_box, canonical_from};
pub use dot::{to_dot, DotOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BoxId(pub u32);

impl EdgeId {
    /// Placeholder in a port slot that has no edge yet.
    pub const NIL: EdgeId = EdgeId(u32::MAX);

    pub fn is_nil(self) -> bool {
        self == EdgeId::NIL
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NodeKind {
    Lam,
    App,
    Const(i64),
    UnitConst,
    BinOp(BinOp),
    If,
    Rec,
    Bang,
    Query,
    /// Fan-in count; zero is a weakening.
    Contraction(usize),
    Cell(i64),
    Step,
    Peek,
    MakeCell,
    Root,
    Deref,
    Assign,
    Link,
}

impl NodeKind {
    /// (in-ports, out-ports)
    pub fn arity(&self) -> (usize, usize) {
        match self {
            NodeKind::Lam | NodeKind::Rec => (2, 1),
            NodeKind::App | NodeKind::BinOp(_) | NodeKind::Assign | NodeKind::Link => (1, 2),
            NodeKind::If => (1, 3),
            NodeKind::Const(_) | NodeKind::UnitConst | NodeKind::Step => (1, 0),
            NodeKind::Bang
            | NodeKind::Query
            | NodeKind::Cell(_)
            | NodeKind::Peek
            | NodeKind::MakeCell
            | NodeKind::Root
            | NodeKind::Deref => (1, 1),
            NodeKind::Contraction(k) => (*k, 1),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NodeKind::Lam => "λ".into(),
            NodeKind::App => "@".into(),
            NodeKind::Const(n) => n.to_string(),
            NodeKind::UnitConst => "()".into(),
            NodeKind::BinOp(op) => op.symbol().into(),
            NodeKind::If => "if".into(),
            NodeKind::Rec => "μ".into(),
            NodeKind::Bang => "!".into(),
            NodeKind::Query => "?".into(),
            NodeKind::Contraction(k) => format!("C{k}"),
            NodeKind::Cell(n) => format!("{{{n}}}"),
            NodeKind::Step => "s".into(),
            NodeKind::Peek => "p".into(),
            NodeKind::MakeCell => "m".into(),
            NodeKind::Root => "r".into(),
            NodeKind::Deref => "d".into(),
            NodeKind::Assign => "a".into(),
            NodeKind::Link => "l".into(),
        }
    }

    /// Short stable name used in traces and diagnostics.
    pub fn tag(&self) -> &'static str {
        match self {
            NodeKind::Lam => "lam",
            NodeKind::App => "app",
            NodeKind::Const(_) => "const",
            NodeKind::UnitConst => "unit",
            NodeKind::BinOp(_) => "op",
            NodeKind::If => "if",
            NodeKind::Rec => "mu",
            NodeKind::Bang => "bang",
            NodeKind::Query => "query",
            NodeKind::Contraction(_) => "C",
            NodeKind::Cell(_) => "cell",
            NodeKind::Step => "step",
            NodeKind::Peek => "peek",
            NodeKind::MakeCell => "ref",
            NodeKind::Root => "root",
            NodeKind::Deref => "deref",
            NodeKind::Assign => "assign",
            NodeKind::Link => "link",
        }
    }

    pub fn is_contraction(&self) -> bool {
        matches!(self, NodeKind::Contraction(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Polarity {
    In,
    Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PortRef {
    pub node: NodeId,
    pub index: usize,
    pub polarity: Polarity,
}

impl PortRef {
    pub fn input(node: NodeId, index: usize) -> Self {
        PortRef { node, index, polarity: Polarity::In }
    }

    pub fn output(node: NodeId, index: usize) -> Self {
        PortRef { node, index, polarity: Polarity::Out }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.polarity {
            Polarity::In => 'i',
            Polarity::Out => 'o',
        };
        write!(f, "{}.{}{}", self.node, p, self.index)
    }
}

/// One end of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum End {
    /// Dangling; only legal while a fragment is being built.
    Open,
    /// Graph interface slot.
    Iface(u32),
    /// A node port. For `lo` this is an out-port, for `hi` an in-port.
    Port(NodeId, usize),
}

impl End {
    pub fn node(self) -> Option<NodeId> {
        match self {
            End::Port(n, _) => Some(n),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub lo: End,
    pub hi: End,
    pub live: bool,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: NodeKind,
    pub ins: Vec<EdgeId>,
    pub outs: Vec<EdgeId>,
    /// Innermost box whose content this node is. A box's own `!` and `?`
    /// nodes are owned by the enclosing box.
    pub owner: Option<BoxId>,
    /// For `!` and `?` nodes, the box they sit on the boundary of.
    pub boundary: Option<BoxId>,
    pub live: bool,
}

#[derive(Clone, Debug)]
pub struct BoxData {
    pub bang: NodeId,
    pub doors: Vec<NodeId>,
    pub parent: Option<BoxId>,
    pub members: BTreeSet<NodeId>,
    pub children: Vec<BoxId>,
    pub live: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("port {0} is already connected")]
    PortConnected(PortRef),
    #[error("port {0} is not connected")]
    NotConnected(PortRef),
    #[error("port {0} does not exist")]
    NoSuchPort(PortRef),
    #[error("edge from {0} would dangle")]
    Dangling(PortRef),
    #[error("connect needs an out-port and an in-port")]
    Polarity,
}

#[derive(Clone, Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    boxes: Vec<BoxData>,
    /// Cells in creation order; the index is the cell's serial.
    cells: Vec<NodeId>,
    live_nodes: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    // ---- queries ----

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n.0 as usize]
    }

    pub fn kind(&self, n: NodeId) -> &NodeKind {
        &self.nodes[n.0 as usize].kind
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0 as usize]
    }

    pub fn bx(&self, b: BoxId) -> &BoxData {
        &self.boxes[b.0 as usize]
    }

    pub fn node_count(&self) -> usize {
        self.live_nodes
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.live)
            .map(|(i, _)| NodeId(i as u32))
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.live)
            .map(|(i, _)| EdgeId(i as u32))
    }

    pub fn box_ids(&self) -> impl Iterator<Item = BoxId> + '_ {
        self.boxes
            .iter()
            .enumerate()
            .filter(|(_, b)| b.live)
            .map(|(i, _)| BoxId(i as u32))
    }

    pub fn is_live(&self, n: NodeId) -> bool {
        self.nodes.get(n.0 as usize).is_some_and(|x| x.live)
    }

    pub fn edge_live(&self, e: EdgeId) -> bool {
        self.edges.get(e.0 as usize).is_some_and(|x| x.live)
    }

    /// Live cells in creation order.
    pub fn cells(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.cells.iter().copied().filter(|&c| self.is_live(c))
    }

    /// Live cells with their serials.
    pub fn cells_by_serial(&self) -> impl Iterator<Item = (usize, NodeId)> + '_ {
        self.cells.iter().copied().enumerate().filter(|&(_, c)| self.is_live(c))
    }

    pub fn cell_serial(&self, c: NodeId) -> Option<usize> {
        self.cells.iter().position(|&x| x == c)
    }

    pub fn cell_by_serial(&self, s: usize) -> Option<NodeId> {
        self.cells.get(s).copied()
    }

    pub fn cell_value(&self, c: NodeId) -> Option<i64> {
        match self.kind(c) {
            NodeKind::Cell(v) => Some(*v),
            _ => None,
        }
    }

    /// Cell values indexed by serial.
    pub fn cell_values(&self) -> Vec<i64> {
        self.cells.iter().map(|&c| self.cell_value(c).unwrap_or(0)).collect()
    }

    /// Node whose in-port the edge enters.
    pub fn above(&self, e: EdgeId) -> Option<NodeId> {
        self.edge(e).hi.node()
    }

    /// Node whose out-port the edge leaves.
    pub fn below(&self, e: EdgeId) -> Option<NodeId> {
        self.edge(e).lo.node()
    }

    pub fn in_edge(&self, n: NodeId, i: usize) -> EdgeId {
        self.node(n).ins[i]
    }

    pub fn out_edge(&self, n: NodeId, i: usize) -> EdgeId {
        self.node(n).outs[i]
    }

    /// The box whose `!` node this is.
    pub fn box_of_bang(&self, bang: NodeId) -> Option<BoxId> {
        let n = self.node(bang);
        match n.kind {
            NodeKind::Bang => n.boundary.filter(|b| self.bx(*b).live),
            _ => None,
        }
    }

    /// The box a `?` node is a door of.
    pub fn box_of_door(&self, q: NodeId) -> Option<BoxId> {
        let n = self.node(q);
        match n.kind {
            NodeKind::Query => n.boundary.filter(|b| self.bx(*b).live),
            _ => None,
        }
    }

    /// Nesting depth of the node's owner; 0 for top level.
    pub fn depth(&self, n: NodeId) -> usize {
        let mut d = 0;
        let mut b = self.node(n).owner;
        while let Some(x) = b {
            d += 1;
            b = self.bx(x).parent;
        }
        d
    }

    /// True if `b` is `inner` or one of its ancestors.
    pub fn box_encloses(&self, b: BoxId, inner: BoxId) -> bool {
        let mut cur = Some(inner);
        while let Some(x) = cur {
            if x == b {
                return true;
            }
            cur = self.bx(x).parent;
        }
        false
    }

    pub fn is_weakening(&self, n: NodeId) -> bool {
        matches!(self.kind(n), NodeKind::Contraction(0))
    }

    /// For a box's bang, the single content node its out-edge enters.
    pub fn box_content(&self, b: BoxId) -> Option<NodeId> {
        let bang = self.bx(b).bang;
        self.above(self.out_edge(bang, 0))
    }

    // ---- construction ----

    pub fn add_node(&mut self, kind: NodeKind) -> NodeId {
        self.add_node_in(kind, None)
    }

    pub fn add_node_in(&mut self, kind: NodeKind, owner: Option<BoxId>) -> NodeId {
        let (i, o) = kind.arity();
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            kind,
            ins: vec![EdgeId::NIL; i],
            outs: vec![EdgeId::NIL; o],
            owner,
            boundary: None,
            live: true,
        });
        if let Some(b) = owner {
            self.boxes[b.0 as usize].members.insert(id);
        }
        self.live_nodes += 1;
        id
    }

    /// Creates a box with a fresh `!` node owned by `parent`.
    pub fn add_box(&mut self, parent: Option<BoxId>) -> BoxId {
        let id = BoxId(self.boxes.len() as u32);
        let bang = self.add_node_in(NodeKind::Bang, parent);
        self.nodes[bang.0 as usize].boundary = Some(id);
        self.boxes.push(BoxData {
            bang,
            doors: Vec::new(),
            parent,
            members: BTreeSet::new(),
            children: Vec::new(),
            live: true,
        });
        if let Some(p) = parent {
            self.boxes[p.0 as usize].children.push(id);
        }
        id
    }

    /// Adds a `?` door to `b`; the door node lives in `b`'s parent.
    pub fn add_door(&mut self, b: BoxId) -> NodeId {
        let parent = self.bx(b).parent;
        let q = self.add_node_in(NodeKind::Query, parent);
        self.nodes[q.0 as usize].boundary = Some(b);
        self.boxes[b.0 as usize].doors.push(q);
        q
    }

    /// Registers a cell created by the machine and returns its serial.
    pub fn register_cell(&mut self, c: NodeId) -> usize {
        self.cells.push(c);
        self.cells.len() - 1
    }

    pub fn set_kind(&mut self, n: NodeId, kind: NodeKind) {
        debug_assert_eq!(kind.arity(), self.kind(n).arity());
        self.nodes[n.0 as usize].kind = kind;
    }

    pub fn set_cell_value(&mut self, c: NodeId, v: i64) {
        if let NodeKind::Cell(x) = &mut self.nodes[c.0 as usize].kind {
            *x = v;
        }
    }

    fn slot(&mut self, end: End, lo: bool) -> Option<&mut EdgeId> {
        match end {
            End::Port(n, i) => {
                let node = &mut self.nodes[n.0 as usize];
                Some(if lo { &mut node.outs[i] } else { &mut node.ins[i] })
            }
            _ => None,
        }
    }

    /// Raw edge creation; attaches to the given port slots.
    pub fn new_edge(&mut self, lo: End, hi: End) -> EdgeId {
        let e = EdgeId(self.edges.len() as u32);
        self.edges.push(Edge { lo, hi, live: true });
        if let Some(s) = self.slot(lo, true) {
            debug_assert!(s.is_nil(), "out-port {lo:?} already connected");
            *s = e;
        }
        if let Some(s) = self.slot(hi, false) {
            debug_assert!(s.is_nil(), "in-port {hi:?} already connected");
            *s = e;
        }
        e
    }

    /// Moves the lower end of `e`.
    pub fn set_lo(&mut self, e: EdgeId, lo: End) {
        let old = self.edge(e).lo;
        if let Some(s) = self.slot(old, true) {
            if *s == e {
                *s = EdgeId::NIL;
            }
        }
        self.edges[e.0 as usize].lo = lo;
        if let Some(s) = self.slot(lo, true) {
            *s = e;
        }
    }

    /// Moves the upper end of `e`.
    pub fn set_hi(&mut self, e: EdgeId, hi: End) {
        let old = self.edge(e).hi;
        if let Some(s) = self.slot(old, false) {
            if *s == e {
                *s = EdgeId::NIL;
            }
        }
        self.edges[e.0 as usize].hi = hi;
        if let Some(s) = self.slot(hi, false) {
            *s = e;
        }
    }

    /// Removes an edge, clearing whichever port slots still point at it.
    pub fn kill_edge(&mut self, e: EdgeId) {
        let Edge { lo, hi, .. } = *self.edge(e);
        if let Some(s) = self.slot(lo, true) {
            if *s == e {
                *s = EdgeId::NIL;
            }
        }
        if let Some(s) = self.slot(hi, false) {
            if *s == e {
                *s = EdgeId::NIL;
            }
        }
        self.edges[e.0 as usize].live = false;
    }

    /// Tombstones a node. Its edges must already be dealt with.
    pub fn kill_node(&mut self, n: NodeId) {
        let node = &mut self.nodes[n.0 as usize];
        if !node.live {
            return;
        }
        node.live = false;
        if let Some(b) = node.owner {
            self.boxes[b.0 as usize].members.remove(&n);
        }
        self.live_nodes -= 1;
    }

    /// Joins two edges that met at a node being removed: `lower` takes over
    /// the upper end of `upper`, which disappears.
    pub fn fuse(&mut self, lower: EdgeId, upper: EdgeId) {
        let hi = self.edge(upper).hi;
        self.kill_edge(upper);
        self.set_hi(lower, hi);
    }

    /// Adds an in-slot to a contraction and plugs `e` into it.
    pub fn c_push_in(&mut self, c: NodeId, e: EdgeId) {
        let node = &mut self.nodes[c.0 as usize];
        node.ins.push(EdgeId::NIL);
        let k = node.ins.len();
        node.kind = NodeKind::Contraction(k);
        self.set_hi(e, End::Port(c, k - 1));
    }

    /// Removes in-slot `i` of a contraction, renumbering the later slots.
    /// The edge that sat there is left with an open upper end.
    pub fn c_remove_in(&mut self, c: NodeId, i: usize) -> EdgeId {
        let e = self.node(c).ins[i];
        self.nodes[c.0 as usize].ins.remove(i);
        if !e.is_nil() {
            self.edges[e.0 as usize].hi = End::Open;
        }
        self.renumber_ins(c, i);
        e
    }

    /// Replaces in-slot `i` with several edges, in order.
    pub fn c_splice_in(&mut self, c: NodeId, i: usize, es: &[EdgeId]) {
        let old = self.node(c).ins[i];
        if !old.is_nil() {
            self.edges[old.0 as usize].hi = End::Open;
        }
        self.nodes[c.0 as usize].ins.splice(i..=i, es.iter().copied());
        self.renumber_ins(c, 0);
    }

    fn renumber_ins(&mut self, c: NodeId, from: usize) {
        let ins = self.node(c).ins.clone();
        self.nodes[c.0 as usize].kind = NodeKind::Contraction(ins.len());
        for (j, &e) in ins.iter().enumerate().skip(from) {
            if !e.is_nil() {
                self.edges[e.0 as usize].hi = End::Port(c, j);
            }
        }
    }

    /// Moves a node to another owner, keeping member sets in sync.
    pub fn set_owner(&mut self, n: NodeId, owner: Option<BoxId>) {
        if let Some(b) = self.node(n).owner {
            self.boxes[b.0 as usize].members.remove(&n);
        }
        self.nodes[n.0 as usize].owner = owner;
        if let Some(b) = owner {
            self.boxes[b.0 as usize].members.insert(n);
        }
    }

    /// Dissolves a box boundary: content joins the parent, doors are removed
    /// by fusing their inner and outer edges, and the `!` node goes away along
    /// with its in-edge and out-edge. Returns the content node the bang led to.
    pub fn open_box(&mut self, b: BoxId) -> Option<NodeId> {
        let data = self.bx(b).clone();
        for &q in &data.doors {
            let inner = self.in_edge(q, 0);
            let outer = self.out_edge(q, 0);
            self.fuse(inner, outer);
            self.kill_node(q);
        }
        for &m in &data.members {
            self.nodes[m.0 as usize].owner = data.parent;
            if let Some(p) = data.parent {
                self.boxes[p.0 as usize].members.insert(m);
            }
        }
        for &c in &data.children {
            self.boxes[c.0 as usize].parent = data.parent;
        }
        if let Some(p) = data.parent {
            let pb = &mut self.boxes[p.0 as usize];
            pb.children.retain(|&x| x != b);
            pb.children.extend(data.children.iter().copied());
        }
        let content = self.box_content(b);
        let bo = self.out_edge(data.bang, 0);
        let bi = self.in_edge(data.bang, 0);
        self.kill_edge(bo);
        self.kill_edge(bi);
        self.kill_node(data.bang);
        let bd = &mut self.boxes[b.0 as usize];
        bd.members.clear();
        bd.children.clear();
        bd.doors.clear();
        bd.live = false;
        content
    }

    /// Builds a closed box holding one constant node, returning its bang.
    pub fn const_box(&mut self, kind: NodeKind, parent: Option<BoxId>) -> NodeId {
        let b = self.add_box(parent);
        let bang = self.bx(b).bang;
        let k = self.add_node_in(kind, Some(b));
        self.new_edge(End::Port(bang, 0), End::Port(k, 0));
        bang
    }

    // ---- checked editing API ----

    /// Connects an out-port to an in-port with a fresh edge.
    pub fn connect(&mut self, a: PortRef, b: PortRef) -> Result<EdgeId, GraphError> {
        let (out, inp) = match (a.polarity, b.polarity) {
            (Polarity::Out, Polarity::In) => (a, b),
            (Polarity::In, Polarity::Out) => (b, a),
            _ => return Err(GraphError::Polarity),
        };
        for p in [out, inp] {
            match self.port_edge(p) {
                None => return Err(GraphError::NoSuchPort(p)),
                Some(e) if !e.is_nil() => return Err(GraphError::PortConnected(p)),
                _ => {}
            }
        }
        Ok(self.new_edge(End::Port(out.node, out.index), End::Port(inp.node, inp.index)))
    }

    /// Removes the edge at `a` and returns the port at its other end.
    pub fn disconnect(&mut self, a: PortRef) -> Result<PortRef, GraphError> {
        let e = match self.port_edge(a) {
            None => return Err(GraphError::NoSuchPort(a)),
            Some(e) if e.is_nil() => return Err(GraphError::NotConnected(a)),
            Some(e) => e,
        };
        let Edge { lo, hi, .. } = *self.edge(e);
        let peer = match a.polarity {
            Polarity::Out => match hi {
                End::Port(n, i) => PortRef::input(n, i),
                _ => return Err(GraphError::NotConnected(a)),
            },
            Polarity::In => match lo {
                End::Port(n, i) => PortRef::output(n, i),
                _ => return Err(GraphError::NotConnected(a)),
            },
        };
        self.kill_edge(e);
        Ok(peer)
    }

    pub fn port_edge(&self, p: PortRef) -> Option<EdgeId> {
        let n = self.nodes.get(p.node.0 as usize)?;
        if !n.live {
            return None;
        }
        match p.polarity {
            Polarity::In => n.ins.get(p.index).copied(),
            Polarity::Out => n.outs.get(p.index).copied(),
        }
    }

    /// Nodes owned by `b` and by every box nested in it, plus the bangs and
    /// doors of those nested boxes.
    pub fn box_nodes(&self, b: BoxId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = Vec::new();
        let mut stack = vec![b];
        while let Some(x) = stack.pop() {
            out.extend(self.bx(x).members.iter().copied());
            stack.extend(self.bx(x).children.iter().copied());
        }
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_node_port_counts() {
        let mut g = Graph::new();
        let c = g.add_node(NodeKind::Cell(1));
        assert_eq!((g.node(c).ins.len(), g.node(c).outs.len()), (1, 1));
        let w = g.add_node(NodeKind::Contraction(0));
        assert_eq!((g.node(w).ins.len(), g.node(w).outs.len()), (0, 1));
        let p = g.add_node(NodeKind::BinOp(BinOp::Add));
        assert_eq!((g.node(p).ins.len(), g.node(p).outs.len()), (1, 2));
    }

    #[test]
    fn connect_and_disconnect() {
        let mut g = Graph::new();
        let k = g.add_node(NodeKind::Const(2));
        let c = g.add_node(NodeKind::Cell(0));
        g.connect(PortRef::output(c, 0), PortRef::input(k, 0)).unwrap();
        assert!(matches!(
            g.connect(PortRef::output(c, 0), PortRef::input(k, 0)),
            Err(GraphError::PortConnected(_))
        ));
        assert_eq!(g.disconnect(PortRef::output(c, 0)).unwrap(), PortRef::input(k, 0));
        assert!(matches!(g.disconnect(PortRef::output(c, 0)), Err(GraphError::NotConnected(_))));
    }

    #[test]
    fn contraction_slots_renumber() {
        let mut g = Graph::new();
        let c = g.add_node(NodeKind::Contraction(0));
        let es: Vec<EdgeId> = (0..3).map(|_| g.new_edge(End::Open, End::Open)).collect();
        for &e in &es {
            g.c_push_in(c, e);
        }
        assert_eq!(g.kind(c), &NodeKind::Contraction(3));
        g.c_remove_in(c, 0);
        assert_eq!(g.edge(es[1]).hi, End::Port(c, 0));
        assert_eq!(g.edge(es[2]).hi, End::Port(c, 1));
        let extra = [g.new_edge(End::Open, End::Open), g.new_edge(End::Open, End::Open)];
        g.c_splice_in(c, 0, &extra);
        assert_eq!(g.node(c).ins, vec![extra[0], extra[1], es[2]]);
        assert_eq!(g.edge(es[2]).hi, End::Port(c, 2));
    }
}
