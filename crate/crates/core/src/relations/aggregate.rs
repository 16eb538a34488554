use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{InstanceId, Node, RelationError, Store, Tick};
use crate::ontology::{AggregateSchema, Registry, MEMBER_OF};

/// A live aggregate: one slot per declared member, each bound or typed-but-unbound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateInstance {
    pub schema: String,
    pub slots: BTreeMap<String, SlotBinding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotBinding {
    pub kind: String,
    pub bound: Option<InstanceId>,
}

impl AggregateInstance {
    pub(crate) fn unbound(schema: &AggregateSchema) -> Self {
        AggregateInstance {
            schema: schema.name.clone(),
            slots: schema
                .members
                .iter()
                .map(|m| (m.slot.clone(), SlotBinding { kind: m.kind.clone(), bound: None }))
                .collect(),
        }
    }

    pub fn bound_slots(&self) -> impl Iterator<Item = (&str, InstanceId)> {
        self.slots.iter().filter_map(|(s, b)| b.bound.map(|id| (s.as_str(), id)))
    }

    /// Slot names and declared types, ignoring which slots are bound.
    pub fn structure(&self) -> BTreeMap<&str, &str> {
        self.slots.iter().map(|(s, b)| (s.as_str(), b.kind.as_str())).collect()
    }
}

impl Store {
    /// Creates an aggregate from a single known member. The member fills
    /// `slot`; every other slot is created typed but unbound.
    pub fn instantiate_aggregate_from_member(
        &mut self,
        reg: &Registry,
        aggregate: &str,
        member: InstanceId,
        slot: &str,
        name: Option<&str>,
        tick: Tick,
    ) -> Result<InstanceId, RelationError> {
        let schema = reg.aggregate(aggregate).ok_or_else(|| RelationError::NotInstantiable(aggregate.to_string()))?;
        self.check_slot(reg, schema, slot, member)?;
        let id = self.create_instance(reg, name, aggregate, tick)?;
        self.bind_member(reg, id, slot, member, tick)?;
        Ok(id)
    }

    fn check_slot(
        &self,
        reg: &Registry,
        schema: &AggregateSchema,
        slot: &str,
        member: InstanceId,
    ) -> Result<(), RelationError> {
        let declared = schema
            .member(slot)
            .ok_or_else(|| RelationError::SlotTypeMismatch(format!("`{}` has no slot `{slot}`", schema.name)))?;
        let rec = self.instance(member).ok_or_else(|| RelationError::UnknownInstance(member.to_string()))?;
        if !rec.alive() {
            return Err(RelationError::SubjectDestroyed(rec.name.clone()));
        }
        if !reg.is_subkind(&rec.schema, &declared.kind) {
            return Err(RelationError::SlotTypeMismatch(format!(
                "`{}` is a {}, slot `{slot}` takes {}",
                rec.name, rec.schema, declared.kind
            )));
        }
        Ok(())
    }

    /// Binds `member` into an unbound slot, records membership and asserts
    /// every declared link whose two ends are now bound.
    pub fn bind_member(
        &mut self,
        reg: &Registry,
        aggregate: InstanceId,
        slot: &str,
        member: InstanceId,
        tick: Tick,
    ) -> Result<(), RelationError> {
        let agg =
            self.aggregates.get(&aggregate).ok_or_else(|| RelationError::UnknownInstance(aggregate.to_string()))?;
        let schema = reg.aggregate(&agg.schema).expect("aggregate schema registered");
        self.check_slot(reg, schema, slot, member)?;
        if let Some(existing) = agg.slots[slot].bound {
            return Err(RelationError::SlotTypeMismatch(format!(
                "slot `{slot}` already holds {}",
                self.render(&Node::Instance(existing))
            )));
        }

        // Links are type-checked before anything is written.
        let mut bound: BTreeMap<&str, InstanceId> = agg.bound_slots().collect();
        bound.insert(slot, member);
        let links: Vec<(String, Node, Node)> = schema
            .links
            .iter()
            .filter(|l| l.from == slot || l.to == slot)
            .filter_map(|l| {
                Some((
                    l.relation.clone(),
                    Node::Instance(*bound.get(l.from.as_str())?),
                    Node::Instance(*bound.get(l.to.as_str())?),
                ))
            })
            .collect();
        for (p, s, o) in &links {
            if !self.is_live(s, p, o) {
                self.check(reg, s, p, o)?;
            }
        }

        self.aggregates.get_mut(&aggregate).expect("checked").slots.get_mut(slot).expect("checked").bound =
            Some(member);
        self.insert_live(Node::Instance(member), MEMBER_OF, Node::Instance(aggregate), tick);
        for (p, s, o) in links {
            self.insert_live(s, &p, o, tick);
        }
        Ok(())
    }

    /// Membership asserted directly lands in the first unbound slot that accepts the member.
    pub(crate) fn bind_first_fitting(
        &mut self,
        reg: &Registry,
        member: InstanceId,
        aggregate: InstanceId,
        tick: Tick,
    ) -> Result<(), RelationError> {
        let kind = self.instance(member).map(|r| r.schema.clone()).unwrap_or_default();
        let slot = self
            .aggregates
            .get(&aggregate)
            .and_then(|a| a.slots.iter().find(|(_, b)| b.bound.is_none() && reg.is_subkind(&kind, &b.kind)))
            .map(|(s, _)| s.clone())
            .ok_or_else(|| RelationError::SlotTypeMismatch(format!("no free slot accepts `{kind}`")))?;
        self.bind_member(reg, aggregate, &slot, member, tick)
    }
}
