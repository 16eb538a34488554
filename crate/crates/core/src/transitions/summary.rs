use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::TransitionError;
use crate::ontology::{infer_bearer, ChainKind, ChainSchema, Pattern, Registry, Step, Term};

/// Structured description of a whole chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThickChainSummary {
    pub chain: String,
    pub kind: ChainKind,
    /// Transitionals in first-use order.
    pub transitionals: Vec<String>,
    /// Kinds of the parameters that bear a transitional, are named in a
    /// condition or take part in a process.
    pub participants: BTreeSet<String>,
    /// Predicates read or written by the chain and its transitionals.
    pub predicates: BTreeSet<String>,
    pub interventions: usize,
    pub loops: usize,
    pub conditionals: usize,
    /// Nesting of step lists; a flat body has depth 1, an empty one 0.
    pub depth: usize,
}

pub fn thick_chain_summary(reg: &Registry, name: &str) -> Result<ThickChainSummary, TransitionError> {
    let chain = reg.chain(name).ok_or_else(|| TransitionError::UnknownChain(name.to_string()))?;
    let mut s = ThickChainSummary {
        chain: name.to_string(),
        kind: chain.kind,
        transitionals: Vec::new(),
        participants: BTreeSet::new(),
        predicates: BTreeSet::new(),
        interventions: 0,
        loops: 0,
        conditionals: 0,
        depth: 0,
    };
    walk(reg, chain, &chain.body, 1, &mut s);
    Ok(s)
}

fn walk(reg: &Registry, chain: &ChainSchema, steps: &[Step], depth: usize, s: &mut ThickChainSummary) {
    if !steps.is_empty() {
        s.depth = s.depth.max(depth);
    }
    for step in steps {
        match step {
            Step::Do { transitional, bearer, intervention } => {
                if !s.transitionals.contains(transitional) {
                    s.transitionals.push(transitional.clone());
                }
                s.interventions += usize::from(*intervention);
                let Some(t) = reg.transitional(transitional) else { continue };
                let param = match bearer {
                    Some(b) => chain.params.iter().find(|p| &p.name == b),
                    None => infer_bearer(reg, chain, t),
                };
                if let Some(kind) = param.map(|p| p.kind.clone()).or_else(|| t.bearer.clone()) {
                    s.participants.insert(kind);
                }
                let patterns = t.guards.iter().map(|g| &g.pattern).chain(&t.deletes).chain(&t.creates);
                s.predicates.extend(patterns.map(|p| p.predicate.clone()));
            }
            Step::If { cond, then, otherwise } => {
                s.conditionals += 1;
                s.predicates.insert(cond.pattern.predicate.clone());
                named_params(chain, &cond.pattern, s);
                walk(reg, chain, then, depth + 1, s);
                walk(reg, chain, otherwise, depth + 1, s);
            }
            Step::While { cond, body } => {
                s.loops += 1;
                s.predicates.insert(cond.pattern.predicate.clone());
                named_params(chain, &cond.pattern, s);
                walk(reg, chain, body, depth + 1, s);
            }
            Step::Begin { participants, .. } => {
                let kinds = chain.params.iter().filter(|p| participants.contains(&p.name)).map(|p| p.kind.clone());
                s.participants.extend(kinds);
            }
            Step::End { .. } => {}
        }
    }
}

fn named_params(chain: &ChainSchema, pattern: &Pattern, s: &mut ThickChainSummary) {
    for term in pattern.terms() {
        if let Term::Const(c) = term {
            if let Some(p) = chain.params.iter().find(|p| &p.name == c) {
                s.participants.insert(p.kind.clone());
            }
        }
    }
}
