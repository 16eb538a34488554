use std::collections::{BTreeMap, BTreeSet};

use super::chain::{instantiate_chain, AbortReason, ChainStatus};
use super::TransitionError;
use crate::ontology::Registry;
use crate::par::Exec;
use crate::relations::{InstanceId, Node, Store, Tick};

/// Largest number of initial states `check_equivalence` will enumerate.
pub const DEFAULT_STATE_BOUND: u64 = 1_000_000;

/// One dimension of a state space: the values a determinable of one
/// instance ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub instance: String,
    pub determinable: String,
    pub values: Vec<String>,
}

/// `instance.determinable[=v1|v2|...]` before values are filled in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisSpec {
    pub instance: String,
    pub determinable: String,
    pub values: Option<Vec<String>>,
}

/// Splits `WORLD:inst.det[=a|b],inst.det...` into the world name and axes.
pub fn parse_space_spec(spec: &str) -> Result<(String, Vec<AxisSpec>), TransitionError> {
    let (world, axes) = spec.split_once(':').unwrap_or((spec, ""));
    if world.trim().is_empty() {
        return Err(TransitionError::InvalidSpace(format!("`{spec}` names no world")));
    }
    let mut out = Vec::new();
    for part in axes.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (target, values) = match part.split_once('=') {
            Some((t, v)) => (t, Some(v.split('|').map(|s| s.trim().to_string()).collect::<Vec<_>>())),
            None => (part, None),
        };
        let (instance, determinable) = target
            .split_once('.')
            .ok_or_else(|| TransitionError::InvalidSpace(format!("`{part}` should read instance.determinable")))?;
        if values.as_ref().is_some_and(|v| v.iter().any(String::is_empty)) {
            return Err(TransitionError::InvalidSpace(format!("`{part}` has an empty value")));
        }
        out.push(AxisSpec { instance: instance.trim().into(), determinable: determinable.trim().into(), values });
    }
    Ok((world.trim().to_string(), out))
}

/// Finitely many initial stores: `base` with each axis set to one of its values.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub base: Store,
    /// Last tick used while building `base`.
    pub tick: Tick,
    pub axes: Vec<Axis>,
}

impl StateSpace {
    /// Resolves axis specs against `base`; an axis without values ranges over
    /// its whole quality ontology in declared order.
    pub fn new(reg: &Registry, base: Store, tick: Tick, specs: &[AxisSpec]) -> Result<Self, TransitionError> {
        let mut axes = Vec::new();
        for s in specs {
            let id = base.id_of(&s.instance).ok_or_else(|| TransitionError::UnknownInstance(s.instance.clone()))?;
            let kind = &base.instance(id).expect("id_of returned a known id").schema;
            let slot = reg.determinable_of(kind, &s.determinable).ok_or_else(|| {
                TransitionError::InvalidSpace(format!("`{kind}` has no determinable `{}`", s.determinable))
            })?;
            let ontology = reg.ontology(&slot.ontology).expect("resolved registry");
            let values = match &s.values {
                Some(v) => {
                    if let Some(bad) = v.iter().find(|v| !ontology.contains(v)) {
                        return Err(TransitionError::InvalidSpace(format!("`{bad}` is not in `{}`", ontology.name)));
                    }
                    v.clone()
                }
                None => ontology.determinants.clone(),
            };
            axes.push(Axis { instance: s.instance.clone(), determinable: s.determinable.clone(), values });
        }
        Ok(StateSpace { base, tick, axes })
    }

    /// Number of initial states, saturating.
    pub fn size(&self) -> u64 {
        self.axes.iter().fold(1u64, |acc, a| acc.saturating_mul(a.values.len() as u64))
    }

    /// Axis values of state `index`; the first axis varies slowest.
    pub fn assignment(&self, mut index: u64) -> Vec<(String, String, String)> {
        let mut out = vec![(String::new(), String::new(), String::new()); self.axes.len()];
        for (i, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len() as u64;
            let v = &axis.values[(index % n) as usize];
            index /= n;
            out[i] = (axis.instance.clone(), axis.determinable.clone(), v.clone());
        }
        out
    }

    /// The store for state `index`, and the tick its overrides were made at.
    pub fn state(&self, reg: &Registry, index: u64) -> Result<(Store, Tick), TransitionError> {
        let mut store = self.base.clone();
        let tick = self.tick + 1;
        for (inst, det, value) in self.assignment(index) {
            let id = store.id_of(&inst).expect("checked in StateSpace::new");
            let subject = Node::Instance(id);
            let old: Vec<Node> = store.objects_of(&subject, &det).cloned().collect();
            for o in old {
                store.retract_relation(&subject, &det, &o, tick)?;
            }
            store.assert_relation(reg, subject, &det, Node::Value(value), tick)?;
        }
        Ok((store, tick))
    }
}

pub type LiveSet = BTreeSet<(String, String, String)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub index: u64,
    pub assignment: Vec<(String, String, String)>,
    pub final_a: LiveSet,
    pub final_b: LiveSet,
    pub status_a: ChainStatus,
    pub status_b: ChainStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent { states: u64 },
    Counterexample(Box<Counterexample>),
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

/// Final live set and status after running `chain` to completion or abort.
pub fn run_from(
    reg: &Registry,
    chain: &str,
    bindings: &BTreeMap<String, InstanceId>,
    mut store: Store,
    tick: Tick,
) -> Result<(LiveSet, ChainStatus), TransitionError> {
    let mut inst = instantiate_chain(reg, chain, bindings.clone())?;
    inst.run_to_end(reg, &mut store, tick)?;
    if let Some(AbortReason::LoopCap { .. }) = inst.abort {
        return Err(TransitionError::NonterminatingChain(chain.to_string()));
    }
    Ok((store.live_set(), inst.status()))
}

/// Runs both chains from every state of `space` and compares final live
/// sets. Reports the first differing state in enumeration order.
#[allow(clippy::too_many_arguments)]
pub fn check_equivalence(
    reg: &Registry,
    a: &str,
    b: &str,
    bindings_a: &BTreeMap<String, InstanceId>,
    bindings_b: &BTreeMap<String, InstanceId>,
    space: &StateSpace,
    bound: u64,
    exec: Exec,
) -> Result<Equivalence, TransitionError> {
    instantiate_chain(reg, a, bindings_a.clone())?;
    instantiate_chain(reg, b, bindings_b.clone())?;
    let size = space.size();
    if size > bound {
        return Err(TransitionError::StateSpaceTooLarge { size, bound });
    }
    let first = exec.find_map_first(size, |i| {
        let outcome = (|| {
            let (start, tick) = space.state(reg, i)?;
            let (final_a, status_a) = run_from(reg, a, bindings_a, start.clone(), tick)?;
            let (final_b, status_b) = run_from(reg, b, bindings_b, start, tick)?;
            Ok::<_, TransitionError>((final_a != final_b).then(|| Counterexample {
                index: i,
                assignment: space.assignment(i),
                final_a,
                final_b,
                status_a,
                status_b,
            }))
        })();
        match outcome {
            Ok(None) => None,
            Ok(Some(c)) => Some(Ok(c)),
            Err(e) => Some(Err(e)),
        }
    });
    match first {
        None => Ok(Equivalence::Equivalent { states: size }),
        Some(Ok(c)) => Ok(Equivalence::Counterexample(Box::new(c))),
        Some(Err(e)) => Err(e),
    }
}
