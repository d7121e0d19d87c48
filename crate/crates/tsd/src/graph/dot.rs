use std::fmt::Write;

use super::{BoxId, EdgeId, End, Graph, NodeId, NodeKind};

#[derive(Clone, Debug, Default)]
pub struct DotOptions {
    /// Edge to highlight as the token position.
    pub token: Option<EdgeId>,
    pub title: Option<String>,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_line(g: &Graph, n: NodeId, indent: &str, out: &mut String) {
    let kind = g.kind(n);
    let shape = match kind {
        NodeKind::Cell(_) => "box",
        NodeKind::Bang | NodeKind::Query => "invtriangle",
        NodeKind::Contraction(_) => "circle",
        _ => "ellipse",
    };
    let extra = match kind {
        NodeKind::Bang => ", style=filled, fillcolor=lightgrey",
        NodeKind::Cell(_) => ", style=bold",
        _ => "",
    };
    let _ = writeln!(out, "{indent}{n} [label=\"{}\", shape={shape}{extra}];", escape(&kind.label()));
}

fn write_box(g: &Graph, b: BoxId, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth + 1);
    let _ = writeln!(out, "{indent}subgraph cluster_b{} {{", b.0);
    let _ = writeln!(out, "{indent}  style=rounded; label=\"\";");
    let inner = "  ".repeat(depth + 2);
    let d = g.bx(b);
    node_line(g, d.bang, &inner, out);
    for &q in &d.doors {
        node_line(g, q, &inner, out);
    }
    for &m in &d.members {
        if g.node(m).boundary.is_none() {
            node_line(g, m, &inner, out);
        }
    }
    for &c in &d.children {
        write_box(g, c, depth + 1, out);
    }
    let _ = writeln!(out, "{indent}}}");
}

/// Renders the graph with arrows pointing at data dependencies: from each
/// consumer up to the node it reads from. Boxes become clusters.
pub fn to_dot(g: &Graph, opts: &DotOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph tsd {{");
    if let Some(t) = &opts.title {
        let _ = writeln!(out, "  label=\"{}\";", escape(t));
    }
    let nodes: Vec<NodeId> = g.node_ids().collect();
    if nodes.is_empty() {
        out.push_str("}\n");
        return out;
    }
    let _ = writeln!(out, "  rankdir=BT; node [fontname=\"monospace\"];");
    for &n in &nodes {
        if g.node(n).owner.is_none() && g.node(n).boundary.is_none() {
            node_line(g, n, "  ", &mut out);
        }
    }
    for b in g.box_ids() {
        if g.bx(b).parent.is_none() {
            write_box(g, b, 0, &mut out);
        }
    }
    let mut iface = false;
    for e in g.edge_ids() {
        let ed = g.edge(e);
        let name = |end: End| match end {
            End::Port(n, _) => n.to_string(),
            End::Iface(k) => format!("iface{k}"),
            End::Open => "open".into(),
        };
        if !matches!(ed.lo, End::Port(..)) || !matches!(ed.hi, End::Port(..)) {
            iface = true;
        }
        let (tl, hl) = match (ed.lo, ed.hi) {
            (End::Port(_, i), End::Port(_, j)) => (format!("o{i}"), format!("i{j}")),
            (End::Port(_, i), _) => (format!("o{i}"), String::new()),
            (_, End::Port(_, j)) => (String::new(), format!("i{j}")),
            _ => (String::new(), String::new()),
        };
        let style = if opts.token == Some(e) { ", color=red, penwidth=3" } else { "" };
        let _ = writeln!(
            out,
            "  {} -> {} [taillabel=\"{tl}\", headlabel=\"{hl}\", fontsize=8{style}];",
            name(ed.lo),
            name(ed.hi)
        );
    }
    if iface {
        let _ = writeln!(out, "  node [shape=point];");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_is_header_only() {
        assert_eq!(to_dot(&Graph::new(), &DotOptions::default()), "digraph tsd {\n}\n");
    }

    #[test]
    fn cells_render_with_braces() {
        let mut g = Graph::new();
        let c = g.add_node(NodeKind::Cell(7));
        let k = g.const_box(NodeKind::Const(1), None);
        g.new_edge(End::Port(c, 0), End::Port(k, 0));
        let dot = to_dot(&g, &DotOptions::default());
        assert!(dot.contains("label=\"{7}\""));
        assert!(dot.contains("subgraph cluster_b0"));
    }
}
