//! The blackboard runtime: instances, the store, a logical clock, the
//! timeline of everything that happened, dispositions and interaction rules.

mod events;
mod run;
mod snapshot;

pub use events::{render_edit, Cause, TimelineEvent, TraceLine};
pub use run::{FiredDisposition, RunEnd, RunReport, DEFAULT_CASCADE_CAP};
pub use snapshot::SNAPSHOT_VERSION;

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::fingerprint::Fingerprint;
use crate::lang::{RuleDef, WorldDef, WorldItemDef};
use crate::ontology::{Domain, Pattern, Registry, Term};
use crate::relations::{IdGen, InstanceId, Node, RelationError, Store, Tick};
use crate::transitions::{Edit, EditOp, TransitionError};
use events::TraceEntry;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MicroworldError {
    #[error("`{instance}` needs a value for required determinable `{determinable}`")]
    MissingRequiredDeterminable { instance: String, determinable: String },
    #[error("`{value}` is not a determinant of `{determinable}`")]
    UnknownDeterminant { determinable: String, value: String },
    #[error("`{key}` is neither a determinable, a slot nor a predicate of `{kind}`")]
    UnknownBindingKey { kind: String, key: String },
    #[error("no instance `{0}`")]
    UnknownInstance(String),
    #[error("no process `{0}`")]
    UnknownProcess(String),
    #[error("process `{0}` has no alive independent continuant participant")]
    NoIndependentContinuantParticipant(String),
    #[error("process `{0}` has no open interval")]
    NoOpenInterval(String),
    #[error("tick budget must be positive")]
    ZeroTickBudget,
    #[error("tick budget of {0} exhausted")]
    TickBudgetExhausted(u64),
    #[error("dispositions fired more than {0} times without settling")]
    DispositionCascadeOverflow(usize),
    #[error("disposition `{disposition}` on {bearer} is triggered but `{transitional}` is blocked: {reason}")]
    DispositionBlocked { disposition: String, bearer: String, transitional: String, reason: String },
    #[error("snapshot version {found}, expected {expected}")]
    SnapshotVersionMismatch { found: u32, expected: u32 },
    #[error("snapshot was taken against a different registry")]
    SnapshotRegistryMismatch,
    #[error("unreadable snapshot: {0}")]
    BadSnapshot(String),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// One running world over a shared registry.
#[derive(Debug, Clone)]
pub struct Microworld {
    pub name: String,
    registry: Arc<Registry>,
    store: Store,
    clock: Tick,
    timeline: Vec<TimelineEvent>,
    trace: Vec<TraceEntry>,
    rules: Vec<RuleDef>,
    pub cascade_cap: usize,
}

impl Microworld {
    pub fn new(name: impl Into<String>, registry: Arc<Registry>, ids: IdGen) -> Self {
        Microworld {
            name: name.into(),
            registry,
            store: Store::new(ids),
            clock: 0,
            timeline: Vec::new(),
            trace: Vec::new(),
            rules: Vec::new(),
            cascade_cap: DEFAULT_CASCADE_CAP,
        }
    }

    /// Builds a world from its declaration. `seed` switches instance ids to
    /// the seeded generator.
    pub fn from_def(registry: Arc<Registry>, def: &WorldDef, seed: Option<u64>) -> Result<Self, MicroworldError> {
        let ids = seed.map_or_else(IdGen::sequential, IdGen::seeded);
        let mut w = Microworld::new(def.name.clone(), registry, ids);
        for item in &def.items {
            match item {
                WorldItemDef::Spawn { name, kind, bindings } => {
                    w.spawn(kind, Some(name), bindings)?;
                }
                WorldItemDef::Assert(p) => w.assert_fact(p)?,
            }
        }
        w.rules = def.rules.clone();
        Ok(w)
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn clock(&self) -> Tick {
        self.clock
    }

    pub fn timeline(&self) -> &[TimelineEvent] {
        &self.timeline
    }

    pub fn rules(&self) -> &[RuleDef] {
        &self.rules
    }

    pub fn add_rule(&mut self, rule: RuleDef) {
        self.rules.push(rule);
    }

    pub fn id(&self, name: &str) -> Result<InstanceId, MicroworldError> {
        self.store.id_of(name).ok_or_else(|| MicroworldError::UnknownInstance(name.to_string()))
    }

    /// Content fingerprint of the whole world state.
    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::of(&(&self.name, &self.store, self.clock, &self.timeline, &self.trace, &self.rules))
    }

    /// Exported lines in event order.
    pub fn trace_lines(&self) -> Vec<TraceLine> {
        self.trace.iter().map(|e| events::trace_line(&self.store, &self.timeline, *e)).collect()
    }

    /// Line-delimited JSON, one event per line.
    pub fn trace_ndjson(&self) -> String {
        let mut out = String::new();
        for line in self.trace_lines() {
            out.push_str(&serde_json::to_string(&line).expect("trace lines serialize"));
            out.push('\n');
        }
        out
    }

    fn record(&mut self, event: TimelineEvent) -> usize {
        self.timeline.push(event);
        let i = self.timeline.len() - 1;
        self.trace.push(TraceEntry::Event(i));
        i
    }

    /// Creates an instance with its determinants, slot members and other
    /// relations, all at one new tick. Nothing changes if any binding fails.
    pub fn spawn(
        &mut self,
        kind: &str,
        name: Option<&str>,
        bindings: &[(String, Term)],
    ) -> Result<InstanceId, MicroworldError> {
        let reg = Arc::clone(&self.registry);
        let tick = self.clock + 1;
        let label = name.unwrap_or(kind).to_string();
        if let Some(obj) = reg.object(kind) {
            if let Some(q) =
                obj.qualities.iter().find(|q| q.required && !bindings.iter().any(|(k, _)| *k == q.determinable))
            {
                return Err(MicroworldError::MissingRequiredDeterminable {
                    instance: label,
                    determinable: q.determinable.clone(),
                });
            }
        }
        let backup = self.store.clone();
        let result = self.spawn_into(&reg, kind, name, bindings, tick);
        match result {
            Ok((id, edits)) => {
                self.clock = tick;
                let name = self.store.instance(id).expect("just created").name.clone();
                self.record(TimelineEvent::Spawn { tick, instance: id, name, kind: kind.to_string(), edits });
                Ok(id)
            }
            Err(e) => {
                self.store = backup;
                Err(e)
            }
        }
    }

    fn spawn_into(
        &mut self,
        reg: &Registry,
        kind: &str,
        name: Option<&str>,
        bindings: &[(String, Term)],
        tick: Tick,
    ) -> Result<(InstanceId, Vec<Edit>), MicroworldError> {
        let id = self.store.create_instance(reg, name, kind, tick)?;
        let subject = Node::Instance(id);
        let before: BTreeSet<(String, Node, Node)> = self.live_keys();
        for (key, term) in bindings {
            if let Some(slot) = reg.determinable_of(kind, key) {
                let value = term_text(term);
                let ontology = reg.ontology(&slot.ontology).expect("resolved registry");
                if !ontology.contains(&value) {
                    return Err(MicroworldError::UnknownDeterminant { determinable: key.clone(), value });
                }
                self.store.assert_relation(reg, subject.clone(), key, Node::Value(value), tick)?;
            } else if reg.aggregate(kind).is_some_and(|a| a.member(key).is_some()) {
                let member = self.id(&term_text(term))?;
                self.store.bind_member(reg, id, key, member, tick)?;
            } else if let Some(sig) = reg.predicate(key) {
                let object = match &sig.object {
                    Domain::Instance(_) => Node::Instance(self.id(&term_text(term))?),
                    _ => Node::Value(term_text(term)),
                };
                self.store.assert_relation(reg, subject.clone(), key, object, tick)?;
            } else {
                return Err(MicroworldError::UnknownBindingKey { kind: kind.to_string(), key: key.clone() });
            }
        }
        let edits = self
            .live_keys()
            .difference(&before)
            .map(|(p, s, o)| Edit { op: EditOp::Create, subject: s.clone(), predicate: p.clone(), object: o.clone() })
            .collect();
        Ok((id, edits))
    }

    fn live_keys(&self) -> BTreeSet<(String, Node, Node)> {
        self.store.live_triples().map(|t| (t.predicate.clone(), t.subject.clone(), t.object.clone())).collect()
    }

    /// Asserts a ground fact at a new tick, then lets dispositions react.
    pub fn assert_fact(&mut self, pattern: &Pattern) -> Result<(), MicroworldError> {
        let reg = Arc::clone(&self.registry);
        let (s, o) = self.store.ground(&reg, pattern, &Default::default())?;
        if self.store.is_live(&s, &pattern.predicate, &o) {
            return Ok(());
        }
        let tick = self.clock + 1;
        self.store.assert_relation(&reg, s.clone(), &pattern.predicate, o.clone(), tick)?;
        self.clock = tick;
        let edit = Edit { op: EditOp::Create, subject: s, predicate: pattern.predicate.clone(), object: o };
        self.record(TimelineEvent::Assertion { tick, edit });
        self.fire_dispositions()?;
        Ok(())
    }

    pub fn retract_fact(&mut self, pattern: &Pattern) -> Result<(), MicroworldError> {
        let reg = Arc::clone(&self.registry);
        let (s, o) = self.store.ground(&reg, pattern, &Default::default())?;
        let tick = self.clock + 1;
        self.store.retract_relation(&s, &pattern.predicate, &o, tick)?;
        self.clock = tick;
        let edit = Edit { op: EditOp::Delete, subject: s, predicate: pattern.predicate.clone(), object: o };
        self.record(TimelineEvent::Assertion { tick, edit });
        self.fire_dispositions()?;
        Ok(())
    }

    /// Destroys an instance and whatever is composed into it. Returns the
    /// destroyed ids, root first.
    pub fn destroy(&mut self, name: &str) -> Result<Vec<InstanceId>, MicroworldError> {
        let id = self.id(name)?;
        let tick = self.clock + 1;
        let before = self.live_keys();
        let instances = self.store.destroy_instance(id, tick)?;
        self.clock = tick;
        let after = self.live_keys();
        let edits = before
            .difference(&after)
            .map(|(p, s, o)| Edit { op: EditOp::Delete, subject: s.clone(), predicate: p.clone(), object: o.clone() })
            .collect();
        self.record(TimelineEvent::Destroy { tick, instances: instances.clone(), edits });
        Ok(instances)
    }

    /// Opens an interval at the current tick.
    pub fn begin_process(&mut self, process: &str, participants: &[InstanceId]) -> Result<usize, MicroworldError> {
        if self.registry.process(process).is_none() {
            return Err(MicroworldError::UnknownProcess(process.to_string()));
        }
        for p in participants {
            if self.store.instance(*p).is_none() {
                return Err(MicroworldError::UnknownInstance(p.to_string()));
            }
        }
        let alive_ic = participants.iter().any(|p| {
            self.store.instance(*p).is_some_and(|r| r.alive() && self.registry.is_independent_continuant(&r.schema))
        });
        if !alive_ic {
            return Err(MicroworldError::NoIndependentContinuantParticipant(process.to_string()));
        }
        Ok(self.record(TimelineEvent::ProcessInterval {
            start: self.clock,
            end: None,
            process: process.to_string(),
            participants: participants.to_vec(),
        }))
    }

    /// Closes the latest open interval of `process` at the current tick. With
    /// participants given, only an interval with exactly those matches.
    pub fn end_process(
        &mut self,
        process: &str,
        participants: Option<&[InstanceId]>,
    ) -> Result<usize, MicroworldError> {
        let clock = self.clock;
        let found = self.timeline.iter().rposition(|e| {
            matches!(e, TimelineEvent::ProcessInterval { end: None, process: p, participants: ps, .. }
                if p == process && participants.is_none_or(|want| want == ps.as_slice()))
        });
        let i = found.ok_or_else(|| MicroworldError::NoOpenInterval(process.to_string()))?;
        if let TimelineEvent::ProcessInterval { end, .. } = &mut self.timeline[i] {
            *end = Some(clock);
        }
        self.trace.push(TraceEntry::ProcessEnd(i));
        Ok(i)
    }

    /// Intervals still open.
    pub fn open_processes(&self) -> impl Iterator<Item = &TimelineEvent> {
        self.timeline.iter().filter(|e| matches!(e, TimelineEvent::ProcessInterval { end: None, .. }))
    }
}

fn term_text(term: &Term) -> String {
    match term {
        Term::Var(v) => format!("?{v}"),
        Term::Const(c) => c.clone(),
        Term::Text(t) => t.clone(),
    }
}
