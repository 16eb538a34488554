use std::fmt;

use serde::{Deserialize, Serialize};

use super::TransitionError;
use crate::ontology::{Registry, SELF_VAR};
use crate::relations::{Bindings, InstanceId, Node, RelationError, Store, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Delete,
    Create,
}

/// One grounded triple edit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub op: EditOp,
    pub subject: Node,
    pub predicate: String,
    pub object: Node,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedRecord {
    pub transitional: String,
    pub bearer: InstanceId,
    pub tick: Tick,
    pub bindings: Bindings,
    /// Deletes first, then creates, all at `tick`.
    pub edits: Vec<Edit>,
    pub intervention: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockReason {
    /// Guard `index` (0-based) had no match; `guard` is its source form.
    Guard { index: usize, guard: String },
    /// Guards matched but an edit was rejected by the store.
    Edit(RelationError),
}

impl fmt::Display for BlockReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockReason::Guard { guard, .. } => write!(f, "guard `{guard}` does not hold"),
            BlockReason::Edit(e) => write!(f, "edit rejected: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocked {
    pub transitional: String,
    pub bearer: InstanceId,
    pub reason: BlockReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Applied(AppliedRecord),
    Blocked(Blocked),
}

impl Outcome {
    pub fn applied(&self) -> Option<&AppliedRecord> {
        match self {
            Outcome::Applied(r) => Some(r),
            Outcome::Blocked(_) => None,
        }
    }

    pub fn is_blocked(&self) -> bool {
        matches!(self, Outcome::Blocked(_))
    }
}

/// Applies `name` with `bearer` bound to `?self`. Either every edit lands at
/// `tick` or the store is left exactly as it was.
pub fn apply_transitional(
    reg: &Registry,
    store: &mut Store,
    name: &str,
    bearer: InstanceId,
    tick: Tick,
) -> Result<Outcome, TransitionError> {
    let t = reg.transitional(name).ok_or_else(|| TransitionError::UnknownTransitional(name.to_string()))?;
    let record = store.instance(bearer).ok_or_else(|| TransitionError::UnknownInstance(bearer.to_string()))?;
    if !record.alive() {
        return Err(TransitionError::DestroyedBearer(record.name.clone()));
    }
    let expected = t.bearer.as_deref().unwrap_or("");
    if !reg.is_subkind(&record.schema, expected) {
        return Err(TransitionError::BearerKindMismatch {
            transitional: name.to_string(),
            expected: expected.to_string(),
            found: record.schema.clone(),
        });
    }

    let mut start = Bindings::new();
    start.insert(SELF_VAR.to_string(), Node::Instance(bearer));
    let bindings = match store.solve(reg, &t.guards, &start)? {
        Ok(b) => b,
        Err(lookup) => {
            let guard = t.guards[lookup.failed_guard].to_string();
            return Ok(Outcome::Blocked(Blocked {
                transitional: name.to_string(),
                bearer,
                reason: BlockReason::Guard { index: lookup.failed_guard, guard },
            }));
        }
    };

    let mut edits = Vec::with_capacity(t.deletes.len() + t.creates.len());
    for (op, patterns) in [(EditOp::Delete, &t.deletes), (EditOp::Create, &t.creates)] {
        for p in patterns {
            let (subject, object) = match store.ground(reg, p, &bindings) {
                Ok(g) => g,
                Err(e) => return Ok(blocked(name, bearer, e)),
            };
            edits.push(Edit { op, subject, predicate: p.predicate.clone(), object });
        }
    }

    let mut undo = store.begin_undo();
    for e in &edits {
        let result = match e.op {
            EditOp::Delete => store.retract_logged(&mut undo, &e.subject, &e.predicate, &e.object, tick),
            EditOp::Create => store.assert_relation(reg, e.subject.clone(), &e.predicate, e.object.clone(), tick),
        };
        if let Err(err) = result {
            store.rollback(undo);
            return Ok(blocked(name, bearer, err));
        }
    }
    Ok(Outcome::Applied(AppliedRecord {
        transitional: name.to_string(),
        bearer,
        tick,
        bindings,
        edits,
        intervention: false,
    }))
}

fn blocked(name: &str, bearer: InstanceId, e: RelationError) -> Outcome {
    Outcome::Blocked(Blocked { transitional: name.to_string(), bearer, reason: BlockReason::Edit(e) })
}
