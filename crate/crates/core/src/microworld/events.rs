use serde::{Deserialize, Serialize};

use crate::relations::{InstanceId, Node, Store, Tick};
use crate::transitions::{Edit, EditOp};

/// Why a transitional was applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cause {
    Direct,
    Chain { chain: String, intervention: bool },
    Disposition { disposition: String },
    Rule { rule: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimelineEvent {
    Spawn {
        tick: Tick,
        instance: InstanceId,
        name: String,
        kind: String,
        edits: Vec<Edit>,
    },
    Destroy {
        tick: Tick,
        /// Root first, then parts destroyed with it.
        instances: Vec<InstanceId>,
        edits: Vec<Edit>,
    },
    TransitionInstant {
        tick: Tick,
        transitional: String,
        bearer: InstanceId,
        edits: Vec<Edit>,
        cause: Cause,
    },
    /// A fact asserted or retracted from outside any transitional.
    Assertion {
        tick: Tick,
        edit: Edit,
    },
    ProcessInterval {
        start: Tick,
        end: Option<Tick>,
        process: String,
        participants: Vec<InstanceId>,
    },
}

impl TimelineEvent {
    /// Tick the event happened at; intervals report their start.
    pub fn tick(&self) -> Tick {
        match self {
            TimelineEvent::Spawn { tick, .. }
            | TimelineEvent::Destroy { tick, .. }
            | TimelineEvent::TransitionInstant { tick, .. }
            | TimelineEvent::Assertion { tick, .. } => *tick,
            TimelineEvent::ProcessInterval { start, .. } => *start,
        }
    }
}

/// One exported trace line. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLine {
    pub tick: Tick,
    pub kind: String,
    pub name: String,
    pub participants: Vec<String>,
    pub edits: Vec<String>,
}

/// Position in the trace of everything that happened, in order. Intervals
/// contribute a line when they open and another when they close.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) enum TraceEntry {
    Event(usize),
    ProcessEnd(usize),
}

pub fn render_edit(store: &Store, e: &Edit) -> String {
    let op = match e.op {
        EditOp::Delete => "delete",
        EditOp::Create => "create",
    };
    format!("{op} {}", store.render_triple(&e.subject, &e.predicate, &e.object))
}

fn names(store: &Store, ids: &[InstanceId]) -> Vec<String> {
    ids.iter().map(|id| store.render(&Node::Instance(*id))).collect()
}

pub(crate) fn trace_line(store: &Store, timeline: &[TimelineEvent], entry: TraceEntry) -> TraceLine {
    let edits = |es: &[Edit]| es.iter().map(|e| render_edit(store, e)).collect::<Vec<_>>();
    match entry {
        TraceEntry::Event(i) => match &timeline[i] {
            TimelineEvent::Spawn { tick, instance, name, kind, edits: es } => TraceLine {
                tick: *tick,
                kind: "spawn".into(),
                name: kind.clone(),
                participants: vec![name.clone()],
                edits: {
                    let _ = instance;
                    edits(es)
                },
            },
            TimelineEvent::Destroy { tick, instances, edits: es } => TraceLine {
                tick: *tick,
                kind: "destroy".into(),
                name: names(store, &instances[..1]).remove(0),
                participants: names(store, instances),
                edits: edits(es),
            },
            TimelineEvent::TransitionInstant { tick, transitional, bearer, edits: es, cause } => TraceLine {
                tick: *tick,
                kind: match cause {
                    Cause::Disposition { .. } => "disposition".into(),
                    Cause::Rule { .. } => "rule".into(),
                    Cause::Chain { intervention: true, .. } => "intervention".into(),
                    _ => "transition".into(),
                },
                name: transitional.clone(),
                participants: names(store, &[*bearer]),
                edits: edits(es),
            },
            TimelineEvent::Assertion { tick, edit } => TraceLine {
                tick: *tick,
                kind: match edit.op {
                    EditOp::Create => "assert".into(),
                    EditOp::Delete => "retract".into(),
                },
                name: edit.predicate.clone(),
                participants: [&edit.subject, &edit.object]
                    .iter()
                    .filter(|n| n.instance().is_some())
                    .map(|n| store.render(n))
                    .collect(),
                edits: edits(std::slice::from_ref(edit)),
            },
            TimelineEvent::ProcessInterval { start, process, participants, .. } => TraceLine {
                tick: *start,
                kind: "process-begin".into(),
                name: process.clone(),
                participants: names(store, participants),
                edits: Vec::new(),
            },
        },
        TraceEntry::ProcessEnd(i) => match &timeline[i] {
            TimelineEvent::ProcessInterval { end, process, participants, .. } => TraceLine {
                tick: end.expect("end entry is written when the interval closes"),
                kind: "process-end".into(),
                name: process.clone(),
                participants: names(store, participants),
                edits: Vec::new(),
            },
            other => unreachable!("process end recorded for {other:?}"),
        },
    }
}
