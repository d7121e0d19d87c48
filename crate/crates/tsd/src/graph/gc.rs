use super::{BoxId, EdgeId, End, Graph, NodeId, NodeKind};

impl Graph {
    /// Drops the consumer side of `e` and removes whatever becomes garbage
    /// above it. Contractions lose a slot; a bang takes its whole box with
    /// it; cells, binder variable ports and doors are never removed and get
    /// a weakening instead.
    pub fn discard(&mut self, e: EdgeId) {
        let mut work = vec![e];
        while let Some(e) = work.pop() {
            if !self.edge_live(e) {
                continue;
            }
            let lo = self.edge(e).lo;
            if lo != End::Open {
                self.set_lo(e, End::Open);
            }
            let hi = self.edge(e).hi;
            let (x, port) = match hi {
                End::Port(x, i) => (x, i),
                End::Iface(_) => {
                    self.cap_with_weakening(e, None);
                    continue;
                }
                End::Open => {
                    self.kill_edge(e);
                    continue;
                }
            };
            match self.kind(x).clone() {
                NodeKind::Contraction(_) => {
                    self.c_remove_in(x, port);
                    self.kill_edge(e);
                    if self.node(x).ins.is_empty() {
                        let out = self.out_edge(x, 0);
                        if self.keeps_weakening(out) {
                            continue;
                        }
                        self.kill_node(x);
                        work.push(out);
                    }
                }
                NodeKind::Cell(_) | NodeKind::Query => {
                    let owner = self.node(x).owner;
                    self.cap_with_weakening(e, owner);
                }
                NodeKind::Lam | NodeKind::Rec if port == 0 => {
                    let owner = self.node(x).owner;
                    self.cap_with_weakening(e, owner);
                }
                NodeKind::Bang => {
                    let b = self.box_of_bang(x).expect("bang without box");
                    work.extend(self.delete_box(b));
                }
                _ => {
                    self.kill_edge(e);
                    let outs = self.node(x).outs.clone();
                    for &o in &outs {
                        if !o.is_nil() {
                            self.set_lo(o, End::Open);
                        }
                    }
                    for e in self.node(x).ins.clone() {
                        if !e.is_nil() {
                            self.kill_edge(e);
                        }
                    }
                    self.kill_node(x);
                    work.extend(outs.into_iter().filter(|o| !o.is_nil()));
                }
            }
        }
    }

    /// Whether a weakening feeding this edge must stay to keep a port closed.
    fn keeps_weakening(&self, out: EdgeId) -> bool {
        match self.edge(out).hi {
            End::Port(y, i) => match self.kind(y) {
                NodeKind::Cell(_) | NodeKind::Query => true,
                NodeKind::Lam | NodeKind::Rec => i == 0,
                _ => false,
            },
            _ => true,
        }
    }

    fn cap_with_weakening(&mut self, e: EdgeId, owner: Option<BoxId>) {
        let w = self.add_node_in(NodeKind::Contraction(0), owner);
        self.set_lo(e, End::Port(w, 0));
    }

    /// Removes a region that nothing outside it consumes. Edges leaving the
    /// region upwards are discarded, so shared producers lose a slot and
    /// cells get a weakening.
    pub fn delete_subgraph(&mut self, roots: &[NodeId]) -> Result<(), super::GraphError> {
        let inside = |g: &Graph, m: NodeId| {
            roots.iter().any(|&r| {
                r == m
                    || (matches!(g.kind(r), NodeKind::Bang)
                        && g.box_of_bang(r).is_some_and(|b| {
                            g.node(m).owner.is_some_and(|o| g.box_encloses(b, o))
                        }))
            })
        };
        for &n in roots {
            for &e in &self.node(n).ins {
                if e.is_nil() {
                    continue;
                }
                if let End::Port(m, i) = self.edge(e).lo {
                    if !inside(self, m) {
                        return Err(super::GraphError::Dangling(super::PortRef::output(m, i)));
                    }
                }
            }
        }
        let mut ups = Vec::new();
        for &n in roots {
            if !self.is_live(n) {
                continue;
            }
            if matches!(self.kind(n), NodeKind::Bang) {
                if let Some(b) = self.box_of_bang(n) {
                    ups.extend(self.delete_box(b));
                    continue;
                }
            }
            for e in self.node(n).ins.clone() {
                if !e.is_nil() && self.edge_live(e) {
                    self.kill_edge(e);
                }
            }
            for o in self.node(n).outs.clone() {
                if !o.is_nil() {
                    self.set_lo(o, End::Open);
                    ups.push(o);
                }
            }
            self.kill_node(n);
        }
        for e in ups {
            if self.edge_live(e) && self.edge(e).hi.node().is_some_and(|m| !self.is_live(m)) {
                continue;
            }
            self.discard(e);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::BinOp;

    #[test]
    fn discard_const_box_removes_it() {
        let mut g = Graph::new();
        let bang = g.const_box(NodeKind::Const(4), None);
        let e = g.new_edge(End::Open, End::Port(bang, 0));
        g.discard(e);
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.box_ids().count(), 0);
    }

    #[test]
    fn discard_keeps_cells_and_shared_contractions() {
        let mut g = Graph::new();
        let cell = g.add_node(NodeKind::Cell(3));
        let k = g.const_box(NodeKind::Const(1), None);
        g.new_edge(End::Port(cell, 0), End::Port(k, 0));
        let c = g.add_node(NodeKind::Contraction(0));
        g.new_edge(End::Port(c, 0), End::Port(cell, 0));
        let a = g.new_edge(End::Open, End::Open);
        let b = g.new_edge(End::Open, End::Open);
        g.c_push_in(c, a);
        g.c_push_in(c, b);
        let d = g.add_node(NodeKind::Deref);
        g.set_lo(a, End::Port(d, 0));
        let op = g.add_node(NodeKind::BinOp(BinOp::Add));
        g.new_edge(End::Port(op, 0), End::Port(d, 0));
        let k2 = g.const_box(NodeKind::Const(2), None);
        g.new_edge(End::Port(op, 1), End::Port(k2, 0));
        let top = g.new_edge(End::Open, End::Port(op, 0));
        g.discard(top);
        assert!(!g.is_live(op) && !g.is_live(d));
        assert_eq!(g.kind(c), &NodeKind::Contraction(1));
        // the last use goes; the contraction stays behind as the cell's weakening
        g.discard(b);
        assert!(g.is_live(cell) && g.is_weakening(c));
        assert_eq!(g.below(g.in_edge(cell, 0)), Some(c));
    }

    #[test]
    fn delete_subgraph_checks_closure() {
        let mut g = Graph::new();
        let k = g.add_node(NodeKind::Const(1));
        g.delete_subgraph(&[k]).unwrap();
        assert_eq!(g.node_count(), 0);
        let bang = g.const_box(NodeKind::Const(2), None);
        let p = g.add_node(NodeKind::Peek);
        g.new_edge(End::Port(p, 0), End::Port(bang, 0));
        assert!(g.delete_subgraph(&[bang]).is_err());
        g.delete_subgraph(&[p]).unwrap();
        assert_eq!(g.node_count(), 0);
    }
}
