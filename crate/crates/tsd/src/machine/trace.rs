use std::io::Write;

use serde::Serialize;

use crate::graph::Graph;
use crate::propagation::PropReport;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommitEntry {
    pub cell: usize,
    pub old: i64,
    pub new: i64,
}

/// One transition, as written to a JSONL trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub mode: &'static str,
    pub rule_id: String,
    pub node_kind: String,
    pub port: String,
    pub direction: &'static str,
    pub flag: String,
    pub cstack_depth: usize,
    pub bstack_depth: usize,
    pub graph_nodes: usize,
    /// Prop token index, for propagation events.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub token: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commit: Option<Vec<CommitEntry>>,
}

impl TraceEvent {
    pub(crate) fn commit(seq: u64, g: &Graph, report: &PropReport) -> Self {
        TraceEvent {
            seq,
            mode: "propagate",
            rule_id: "commit".into(),
            node_kind: "step".into(),
            port: "i0".into(),
            direction: "up",
            flag: "sp".into(),
            cstack_depth: 1,
            bstack_depth: 0,
            graph_nodes: g.node_count(),
            token: None,
            commit: Some(
                report.cells.iter().map(|c| CommitEntry { cell: c.serial, old: c.old, new: c.new }).collect(),
            ),
        }
    }
}

pub trait TraceSink {
    fn event(&mut self, ev: TraceEvent);
}

impl TraceSink for Vec<TraceEvent> {
    fn event(&mut self, ev: TraceEvent) {
        self.push(ev);
    }
}

/// Writes one JSON object per line.
pub struct JsonlSink<W: Write>(pub W);

impl<W: Write> TraceSink for JsonlSink<W> {
    fn event(&mut self, ev: TraceEvent) {
        // a broken pipe just ends the trace
        if let Ok(line) = serde_json::to_string(&ev) {
            let _ = writeln!(self.0, "{line}");
        }
    }
}

/// Keeps only the rule ids, for golden comparisons.
#[derive(Default, Debug)]
pub struct RuleSink(pub Vec<String>);

impl TraceSink for RuleSink {
    fn event(&mut self, ev: TraceEvent) {
        self.0.push(ev.rule_id);
    }
}

/// Shares a sink between the machine and the caller.
impl<T: TraceSink> TraceSink for std::rc::Rc<std::cell::RefCell<T>> {
    fn event(&mut self, ev: TraceEvent) {
        self.borrow_mut().event(ev);
    }
}
