use std::collections::HashMap;

use super::{BoxData, BoxId, EdgeId, End, Graph, NodeId, NodeKind};

/// Result of copying a box.
#[derive(Clone, Debug)]
pub struct BoxCopy {
    pub new_box: BoxId,
    pub bang: NodeId,
    /// Old node id to new node id, for every copied node.
    pub nodes: HashMap<NodeId, NodeId>,
    /// Original door to copied door.
    pub doors: Vec<(NodeId, NodeId)>,
}

impl Graph {
    /// Deep copy of box `b` as a sibling. The copy's doors share whatever the
    /// original doors are connected to: if that is a contraction it gains an
    /// in-slot, otherwise a binary contraction is inserted. The copy's bang
    /// in-port is left unconnected for the caller.
    pub fn copy_box(&mut self, b: BoxId) -> BoxCopy {
        let parent = self.bx(b).parent;
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        let mut box_map: HashMap<BoxId, BoxId> = HashMap::new();

        // boxes first, top-down, so owners exist when nodes are created
        let new_box = self.clone_box_shell(b, parent, &mut map, &mut box_map);
        let mut order = vec![b];
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            for &c in &self.bx(x).children.clone() {
                let nc = self.clone_box_shell(c, Some(box_map[&x]), &mut map, &mut box_map);
                let _ = nc;
                order.push(c);
            }
            i += 1;
        }
        for &x in &order {
            for m in self.bx(x).members.clone() {
                if map.contains_key(&m) {
                    continue; // bangs and doors of children, created with their shell
                }
                let kind = self.kind(m).clone();
                let kind = match kind {
                    NodeKind::Contraction(_) => NodeKind::Contraction(self.node(m).ins.len()),
                    k => k,
                };
                let n = self.add_node_in(kind, Some(box_map[&x]));
                map.insert(m, n);
            }
        }

        // internal edges: every out-port of a copied node except the doors of b
        let doors_b: Vec<NodeId> = self.bx(b).doors.clone();
        let mut olds: Vec<NodeId> = map.keys().copied().collect();
        olds.sort();
        for old in olds {
            if doors_b.contains(&old) {
                continue;
            }
            let outs = self.node(old).outs.clone();
            for (k, e) in outs.into_iter().enumerate() {
                if e.is_nil() {
                    continue;
                }
                let hi = match self.edge(e).hi {
                    End::Port(h, j) => match map.get(&h) {
                        Some(&nh) => End::Port(nh, j),
                        None => panic!("edge {e} leaves box {b:?} without a door"),
                    },
                    other => panic!("edge {e} leaves box {b:?} to {other:?}"),
                };
                self.new_edge(End::Port(map[&old], k), hi);
            }
        }

        // doors: the copy shares the original's upstream
        let mut doors = Vec::new();
        for &q in &doors_b {
            let nq = map[&q];
            doors.push((q, nq));
            let outer = self.out_edge(q, 0);
            let ne = self.new_edge(End::Port(nq, 0), End::Open);
            self.share_upstream(outer, ne, parent);
        }
        let bang = self.bx(new_box).bang;
        BoxCopy { new_box, bang, nodes: map, doors }
    }

    fn clone_box_shell(
        &mut self,
        b: BoxId,
        parent: Option<BoxId>,
        map: &mut HashMap<NodeId, NodeId>,
        box_map: &mut HashMap<BoxId, BoxId>,
    ) -> BoxId {
        let nb = self.add_box(parent);
        map.insert(self.bx(b).bang, self.bx(nb).bang);
        for q in self.bx(b).doors.clone() {
            let nq = self.add_door(nb);
            map.insert(q, nq);
        }
        box_map.insert(b, nb);
        nb
    }

    /// Makes `extra` (open at the top) consume the same producer as `existing`.
    /// A contraction producer gains a slot; anything else gets a fresh binary
    /// contraction, owned by `owner`, spliced in front of it.
    pub fn share_upstream(&mut self, existing: EdgeId, extra: EdgeId, owner: Option<BoxId>) {
        let hi = self.edge(existing).hi;
        match hi {
            End::Port(x, _) if self.kind(x).is_contraction() => self.c_push_in(x, extra),
            _ => {
                let c = self.add_node_in(NodeKind::Contraction(0), owner);
                self.set_hi(existing, End::Open);
                self.new_edge(End::Port(c, 0), hi);
                self.c_push_in(c, existing);
                self.c_push_in(c, extra);
            }
        }
    }

    /// Removes a whole box: all nested content, its bang and its doors. The
    /// doors' outer edges are returned so the caller can discard them.
    pub(super) fn delete_box(&mut self, b: BoxId) -> Vec<EdgeId> {
        let nodes = self.box_nodes(b);
        let data: BoxData = self.bx(b).clone();
        let mut outer = Vec::new();
        for &q in &data.doors {
            let e = self.out_edge(q, 0);
            if !e.is_nil() {
                self.set_lo(e, End::Open);
                outer.push(e);
            }
        }
        let mut all = nodes;
        all.push(data.bang);
        all.extend(data.doors.iter().copied());
        for &n in &all {
            for e in self.node(n).ins.clone().into_iter().chain(self.node(n).outs.clone()) {
                if !e.is_nil() && self.edge_live(e) {
                    self.kill_edge(e);
                }
            }
        }
        for &n in &all {
            self.kill_node(n);
        }
        let mut stack = vec![b];
        while let Some(x) = stack.pop() {
            stack.extend(self.bx(x).children.iter().copied());
            let bd = &mut self.boxes[x.0 as usize];
            bd.live = false;
            bd.members.clear();
        }
        if let Some(p) = data.parent {
            self.boxes[p.0 as usize].children.retain(|&x| x != b);
        }
        outer
    }
}

#[cfg(test)]
mod tests {
    use super::super::canonical_box;
    use super::*;
    use crate::translate::translate_program;

    #[test]
    fn copy_const_box() {
        let mut g = Graph::new();
        let bang = g.const_box(NodeKind::Const(5), None);
        let root = g.new_edge(End::Iface(0), End::Port(bang, 0));
        let _ = root;
        let b = g.box_of_bang(bang).unwrap();
        let before = g.node_count();
        let cp = g.copy_box(b);
        assert_eq!(g.node_count(), before + 2);
        assert_eq!(g.kind(g.box_content(cp.new_box).unwrap()), &NodeKind::Const(5));
        assert_eq!(canonical_box(&g, b), canonical_box(&g, cp.new_box));
    }

    #[test]
    fn copy_is_isomorphic_and_disjoint() {
        let tr = translate_program("λf.λx.f (f x)").unwrap();
        let mut g = tr.graph;
        let b = g.box_ids().next().unwrap();
        let old: Vec<NodeId> = g.box_nodes(b);
        let cp = g.copy_box(b);
        let new: Vec<NodeId> = g.box_nodes(cp.new_box);
        assert_eq!(old.len(), new.len());
        assert!(old.iter().all(|n| !new.contains(n)));
        assert_eq!(canonical_box(&g, b), canonical_box(&g, cp.new_box));
    }

    #[test]
    fn nested_copy_keeps_depth() {
        let tr = translate_program("λx.λy.x").unwrap();
        let mut g = tr.graph;
        let outer = g.box_ids().find(|&b| g.bx(b).parent.is_none()).unwrap();
        let cp = g.copy_box(outer);
        let inner_new = g.bx(cp.new_box).children[0];
        let content = g.box_content(inner_new).unwrap();
        assert_eq!(g.depth(content), 2);
        assert_eq!(canonical_box(&g, outer), canonical_box(&g, cp.new_box));
    }

    #[test]
    fn doors_are_shared() {
        // λy.x has one door for x; copying it adds a contraction on x's producer
        let tr = crate::translate::translate_open("λy.x", &[("x", crate::syntax::Type::Int)]).unwrap();
        let mut g = tr.graph;
        let b = g.box_ids().next().unwrap();
        let q = g.bx(b).doors[0];
        let cp = g.copy_box(b);
        let up = g.above(g.out_edge(q, 0)).unwrap();
        assert_eq!(g.kind(up), &NodeKind::Contraction(2));
        let nq = cp.doors[0].1;
        assert_eq!(g.above(g.out_edge(nq, 0)), Some(up));
        // the copy's bang is left for the caller to wire
        g.new_edge(End::Iface(1), End::Port(cp.bang, 0));
        assert!(g.well_formed().is_empty(), "{:?}", g.well_formed());
    }
}
