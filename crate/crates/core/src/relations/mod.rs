//! The triple store: every relationship between instances, with history.
//!
//! Triples are never removed. Retraction stamps `retracted_at`, so any past
//! tick can be queried. A live index keyed by `(predicate, subject, object)`
//! gives the deterministic binding order that transitionals rely on.

mod aggregate;
mod ids;
mod query;

pub use aggregate::{AggregateInstance, SlotBinding};
pub use ids::{IdGen, InstanceId};
pub use query::{Bindings, Lookup};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprint::Fingerprint;
use crate::ontology::{Domain, PredicateOrigin, Registry, CONTAINED_IN, MEMBER_OF, PART_OF};

/// Logical time. Every applied unit of change gets its own tick.
pub type Tick = u64;

/// Either endpoint of a triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Node {
    Instance(InstanceId),
    Value(String),
}

impl Node {
    pub fn value(v: impl Into<String>) -> Node {
        Node::Value(v.into())
    }

    pub fn instance(&self) -> Option<InstanceId> {
        match self {
            Node::Instance(id) => Some(*id),
            Node::Value(_) => None,
        }
    }
}

impl From<InstanceId> for Node {
    fn from(id: InstanceId) -> Self {
        Node::Instance(id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Node,
    pub predicate: String,
    pub object: Node,
    pub asserted_at: Tick,
    pub retracted_at: Option<Tick>,
}

impl Triple {
    pub fn live_at(&self, tick: Tick) -> bool {
        self.asserted_at <= tick && self.retracted_at.is_none_or(|r| r > tick)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub name: String,
    pub schema: String,
    pub created_at: Tick,
    pub destroyed_at: Option<Tick>,
}

impl InstanceRecord {
    pub fn alive(&self) -> bool {
        self.destroyed_at.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("`{0}` is not a declared predicate")]
    UndeclaredPredicate(String),
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("subject `{0}` has been destroyed")]
    SubjectDestroyed(String),
    #[error("`{subject}` already has a live `{predicate}` value")]
    FunctionalViolation { subject: String, predicate: String },
    #[error("no live triple {0}")]
    NoSuchLiveTriple(String),
    #[error("`{0}` is already destroyed")]
    AlreadyDestroyed(String),
    #[error("no instance `{0}`")]
    UnknownInstance(String),
    #[error("instance name `{0}` is already taken")]
    DuplicateInstanceName(String),
    #[error("`{0}` is not an instantiable kind")]
    NotInstantiable(String),
    #[error("slot mismatch: {0}")]
    SlotTypeMismatch(String),
}

/// Instances, their lifecycle, and every triple ever asserted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "StoreDoc", from = "StoreDoc")]
pub struct Store {
    instances: BTreeMap<InstanceId, InstanceRecord>,
    names: BTreeMap<String, InstanceId>,
    triples: Vec<Triple>,
    /// (predicate, subject, object) -> index into `triples` for live triples.
    live: BTreeMap<(String, Node, Node), usize>,
    aggregates: BTreeMap<InstanceId, AggregateInstance>,
    ids: IdGen,
}

/// Enough to undo a batch of triple edits without copying the store.
pub(crate) struct Undo {
    len: usize,
    reopened: Vec<usize>,
    aggregates: BTreeMap<InstanceId, AggregateInstance>,
}

/// Serialized form: the name and live indexes are rebuilt on load.
#[derive(Serialize, Deserialize)]
struct StoreDoc {
    instances: Vec<(InstanceId, InstanceRecord)>,
    triples: Vec<Triple>,
    aggregates: Vec<(InstanceId, AggregateInstance)>,
    ids: IdGen,
}

impl From<Store> for StoreDoc {
    fn from(s: Store) -> Self {
        StoreDoc {
            instances: s.instances.into_iter().collect(),
            triples: s.triples,
            aggregates: s.aggregates.into_iter().collect(),
            ids: s.ids,
        }
    }
}

impl From<StoreDoc> for Store {
    fn from(d: StoreDoc) -> Self {
        let names = d.instances.iter().map(|(id, r)| (r.name.clone(), *id)).collect();
        let live = d
            .triples
            .iter()
            .enumerate()
            .filter(|(_, t)| t.retracted_at.is_none())
            .map(|(i, t)| ((t.predicate.clone(), t.subject.clone(), t.object.clone()), i))
            .collect();
        Store {
            instances: d.instances.into_iter().collect(),
            names,
            triples: d.triples,
            live,
            aggregates: d.aggregates.into_iter().collect(),
            ids: d.ids,
        }
    }
}

impl Default for Store {
    fn default() -> Self {
        Store::new(IdGen::sequential())
    }
}

impl Store {
    pub fn new(ids: IdGen) -> Self {
        Store {
            instances: BTreeMap::new(),
            names: BTreeMap::new(),
            triples: Vec::new(),
            live: BTreeMap::new(),
            aggregates: BTreeMap::new(),
            ids,
        }
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::of(self)
    }

    /// Full history, in assertion order.
    pub fn history(&self) -> &[Triple] {
        &self.triples
    }

    pub fn live_triples(&self) -> impl Iterator<Item = &Triple> {
        self.live.values().map(|&i| &self.triples[i])
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn instances(&self) -> impl Iterator<Item = (InstanceId, &InstanceRecord)> {
        self.instances.iter().map(|(id, r)| (*id, r))
    }

    pub fn alive_instances(&self) -> impl Iterator<Item = (InstanceId, &InstanceRecord)> {
        self.instances().filter(|(_, r)| r.alive())
    }

    pub fn instance(&self, id: InstanceId) -> Option<&InstanceRecord> {
        self.instances.get(&id)
    }

    pub fn id_of(&self, name: &str) -> Option<InstanceId> {
        self.names.get(name).copied()
    }

    pub fn is_alive(&self, id: InstanceId) -> bool {
        self.instances.get(&id).is_some_and(InstanceRecord::alive)
    }

    pub fn aggregate(&self, id: InstanceId) -> Option<&AggregateInstance> {
        self.aggregates.get(&id)
    }

    /// Human-readable rendering of a node: instance name or raw value.
    pub fn render(&self, node: &Node) -> String {
        match node {
            Node::Instance(id) => self.instances.get(id).map_or_else(|| id.to_string(), |r| r.name.clone()),
            Node::Value(v) => v.clone(),
        }
    }

    pub fn render_triple(&self, subject: &Node, predicate: &str, object: &Node) -> String {
        format!("{predicate}({}, {})", self.render(subject), self.render(object))
    }

    /// Live triples as rendered `(predicate, subject, object)` strings; the
    /// comparison key for functional equivalence.
    pub fn live_set(&self) -> BTreeSet<(String, String, String)> {
        self.live_triples().map(|t| (t.predicate.clone(), self.render(&t.subject), self.render(&t.object))).collect()
    }

    /// Creates a live instance. Determinants and links are asserted separately.
    pub fn create_instance(
        &mut self,
        reg: &Registry,
        name: Option<&str>,
        schema: &str,
        tick: Tick,
    ) -> Result<InstanceId, RelationError> {
        if !reg.is_independent_continuant(schema) || reg.get(schema).is_none() {
            return Err(RelationError::NotInstantiable(schema.to_string()));
        }
        if let Some(n) = name {
            if self.names.contains_key(n) {
                return Err(RelationError::DuplicateInstanceName(n.to_string()));
            }
        }
        let id = self.ids.next(|id| self.instances.contains_key(&id));
        let name = name.map_or_else(|| format!("{schema}#{}", self.instances.len() + 1), str::to_string);
        if self.names.contains_key(&name) {
            return Err(RelationError::DuplicateInstanceName(name));
        }
        self.names.insert(name.clone(), id);
        self.instances
            .insert(id, InstanceRecord { name, schema: schema.to_string(), created_at: tick, destroyed_at: None });
        if let Some(agg) = reg.aggregate(schema) {
            self.aggregates.insert(id, AggregateInstance::unbound(agg));
        }
        Ok(id)
    }

    fn kind_of_node(&self, node: &Node) -> Option<&str> {
        node.instance().and_then(|id| self.instances.get(&id)).map(|r| r.schema.as_str())
    }

    /// Type-checks a prospective triple against the registry.
    pub fn check(&self, reg: &Registry, subject: &Node, predicate: &str, object: &Node) -> Result<(), RelationError> {
        let sig = reg.predicate(predicate).ok_or_else(|| RelationError::UndeclaredPredicate(predicate.to_string()))?;
        let mismatch = |what: &str| {
            RelationError::KindMismatch(format!(
                "{what} of {} does not fit `{predicate}`",
                self.render_triple(subject, predicate, object)
            ))
        };
        let fits = |domain: &Domain, node: &Node| match node {
            Node::Instance(id) => match self.instances.get(id) {
                Some(r) => reg.instance_fits(domain, &r.schema),
                None => false,
            },
            Node::Value(v) => reg.value_fits(domain, v),
        };
        if let Node::Instance(id) = subject {
            match self.instances.get(id) {
                None => return Err(RelationError::UnknownInstance(id.to_string())),
                Some(r) if !r.alive() => return Err(RelationError::SubjectDestroyed(r.name.clone())),
                Some(_) => {}
            }
        }
        if !fits(&sig.subject, subject) {
            return Err(mismatch("subject"));
        }
        if !fits(&sig.object, object) {
            return Err(mismatch("object"));
        }
        if let Node::Instance(id) = object {
            if !self.is_alive(*id) {
                return Err(mismatch("destroyed object"));
            }
        }
        if sig.origin == PredicateOrigin::Determinable {
            let kind = self.kind_of_node(subject).unwrap_or_default();
            if reg.determinable_of(kind, predicate).is_none() {
                return Err(RelationError::KindMismatch(format!("`{kind}` has no determinable `{predicate}`")));
            }
        }
        match predicate {
            PART_OF | CONTAINED_IN => {
                let whole = self.kind_of_node(object).unwrap_or_default();
                let part = self.kind_of_node(subject).unwrap_or_default();
                let linkage_ok = reg.object(whole).is_some_and(|o| {
                    o.parts
                        .iter()
                        .any(|slot| slot.linkage.predicate() == predicate && reg.is_subkind(part, &slot.schema))
                });
                if !linkage_ok {
                    return Err(RelationError::KindMismatch(format!(
                        "`{whole}` declares no {predicate} slot for `{part}`"
                    )));
                }
            }
            MEMBER_OF => {
                let agg = object.instance().and_then(|id| self.aggregates.get(&id));
                let part = self.kind_of_node(subject).unwrap_or_default();
                let ok = agg.is_some_and(|a| a.slots.values().any(|s| reg.is_subkind(part, &s.kind)));
                if !ok {
                    return Err(RelationError::KindMismatch(format!("no member slot accepts `{part}`")));
                }
            }
            _ => {}
        }
        if sig.functional && !self.live.contains_key(&(predicate.to_string(), subject.clone(), object.clone())) {
            let taken = self.objects_of(subject, predicate).next().is_some();
            if taken {
                return Err(RelationError::FunctionalViolation {
                    subject: self.render(subject),
                    predicate: predicate.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Adds a live triple; a no-op if the identical triple is already live.
    pub fn assert_relation(
        &mut self,
        reg: &Registry,
        subject: Node,
        predicate: &str,
        object: Node,
        tick: Tick,
    ) -> Result<(), RelationError> {
        self.check(reg, &subject, predicate, &object)?;
        if self.is_live(&subject, predicate, &object) {
            return Ok(());
        }
        if predicate == MEMBER_OF {
            if let (Node::Instance(m), Node::Instance(a)) = (&subject, &object) {
                return self.bind_first_fitting(reg, *m, *a, tick);
            }
        }
        self.insert_live(subject, predicate, object, tick);
        Ok(())
    }

    fn insert_live(&mut self, subject: Node, predicate: &str, object: Node, tick: Tick) {
        let key = (predicate.to_string(), subject.clone(), object.clone());
        if self.live.contains_key(&key) {
            return;
        }
        self.live.insert(key, self.triples.len());
        self.triples.push(Triple {
            subject,
            predicate: predicate.to_string(),
            object,
            asserted_at: tick,
            retracted_at: None,
        });
    }

    /// Marks the matching live triple retracted at `tick`; history is kept.
    pub fn retract_relation(
        &mut self,
        subject: &Node,
        predicate: &str,
        object: &Node,
        tick: Tick,
    ) -> Result<(), RelationError> {
        let key = (predicate.to_string(), subject.clone(), object.clone());
        let idx = self
            .live
            .remove(&key)
            .ok_or_else(|| RelationError::NoSuchLiveTriple(self.render_triple(subject, predicate, object)))?;
        self.triples[idx].retracted_at = Some(tick.max(self.triples[idx].asserted_at));
        Ok(())
    }

    pub(crate) fn begin_undo(&self) -> Undo {
        Undo { len: self.triples.len(), reopened: Vec::new(), aggregates: self.aggregates.clone() }
    }

    pub(crate) fn retract_logged(
        &mut self,
        undo: &mut Undo,
        subject: &Node,
        predicate: &str,
        object: &Node,
        tick: Tick,
    ) -> Result<(), RelationError> {
        let idx = self.live.get(&(predicate.to_string(), subject.clone(), object.clone())).copied();
        self.retract_relation(subject, predicate, object, tick)?;
        undo.reopened.extend(idx);
        Ok(())
    }

    /// Restores the triples and memberships recorded by `undo`.
    pub(crate) fn rollback(&mut self, undo: Undo) {
        for t in self.triples.drain(undo.len..) {
            if t.retracted_at.is_none() {
                self.live.remove(&(t.predicate, t.subject, t.object));
            }
        }
        for idx in undo.reopened.into_iter().filter(|&i| i < undo.len) {
            let t = &mut self.triples[idx];
            t.retracted_at = None;
            self.live.insert((t.predicate.clone(), t.subject.clone(), t.object.clone()), idx);
        }
        self.aggregates = undo.aggregates;
    }

    pub fn is_live(&self, subject: &Node, predicate: &str, object: &Node) -> bool {
        self.live.contains_key(&(predicate.to_string(), subject.clone(), object.clone()))
    }

    /// Live objects of `subject` under `predicate`, in object order.
    pub fn objects_of<'a>(&'a self, subject: &'a Node, predicate: &'a str) -> impl Iterator<Item = &'a Node> + 'a {
        self.live
            .range((predicate.to_string(), subject.clone(), Node::Instance(InstanceId::MIN))..)
            .take_while(move |((p, s, _), _)| p == predicate && s == subject)
            .map(|((_, _, o), _)| o)
    }

    /// Live triples with `predicate`, in (subject, object) order.
    pub fn live_with_predicate<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = (&'a Node, &'a Node)> + 'a {
        self.live
            .range((predicate.to_string(), Node::Instance(InstanceId::MIN), Node::Instance(InstanceId::MIN))..)
            .take_while(move |((p, _, _), _)| p == predicate)
            .map(|((_, s, o), _)| (s, o))
    }

    /// Destroys an instance, cascading through composition links.
    ///
    /// Parts linked by `part_of` are destroyed recursively. Contained parts and
    /// aggregate members survive; their links to any destroyed instance are
    /// retracted along with every other live triple touching one. Returns the
    /// destroyed ids in destruction order (the root first).
    pub fn destroy_instance(&mut self, id: InstanceId, tick: Tick) -> Result<Vec<InstanceId>, RelationError> {
        match self.instances.get(&id) {
            None => return Err(RelationError::UnknownInstance(id.to_string())),
            Some(r) if !r.alive() => return Err(RelationError::AlreadyDestroyed(r.name.clone())),
            Some(_) => {}
        }
        let mut destroyed = Vec::new();
        let mut frontier = vec![id];
        while let Some(next) = frontier.pop() {
            if !self.is_alive(next) {
                continue;
            }
            self.instances.get_mut(&next).expect("checked above").destroyed_at = Some(tick);
            destroyed.push(next);
            let whole = Node::Instance(next);
            let mut parts: Vec<InstanceId> = self
                .live_with_predicate(PART_OF)
                .filter(|(_, o)| **o == whole)
                .filter_map(|(s, _)| s.instance())
                .collect();
            // Reverse so the lowest id is destroyed first.
            parts.reverse();
            frontier.extend(parts);
        }
        let gone: BTreeSet<Node> = destroyed.iter().map(|&d| Node::Instance(d)).collect();
        let touching: Vec<(String, Node, Node)> =
            self.live.keys().filter(|(_, s, o)| gone.contains(s) || gone.contains(o)).cloned().collect();
        for (p, s, o) in touching {
            self.retract_relation(&s, &p, &o, tick).expect("key came from the live index");
        }
        Ok(destroyed)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Instance(id) => write!(f, "{id}"),
            Node::Value(v) => f.write_str(v),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests;
