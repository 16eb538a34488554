use std::collections::BTreeMap;

use super::{Node, RelationError, Store, Tick};
use crate::ontology::{Domain, Guard, Pattern, Registry, Term};

/// Variable name (without `?`) to bound node.
pub type Bindings = BTreeMap<String, Node>;

/// How far a guard search got before failing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lookup {
    /// Index of the guard that could not be satisfied.
    pub failed_guard: usize,
}

enum Resolved {
    Bound(Node),
    Free(String),
    /// A constant that names no live instance: the pattern cannot match.
    Impossible,
}

impl Store {
    fn resolve_term(&self, term: &Term, domain: &Domain, bindings: &Bindings) -> Resolved {
        match term {
            Term::Var(v) => match bindings.get(v) {
                Some(n) => Resolved::Bound(n.clone()),
                None => Resolved::Free(v.clone()),
            },
            Term::Const(c) => match domain {
                Domain::Instance(_) => match self.id_of(c) {
                    Some(id) => Resolved::Bound(Node::Instance(id)),
                    None => Resolved::Impossible,
                },
                _ => Resolved::Bound(Node::Value(c.clone())),
            },
            Term::Text(t) => Resolved::Bound(Node::Value(t.clone())),
        }
    }

    /// All bindings of `pattern` that extend `bindings`, ordered by
    /// (subject, object). `at = None` queries the current live set; a tick
    /// queries the triples live at that tick.
    pub fn query(
        &self,
        reg: &Registry,
        pattern: &Pattern,
        bindings: &Bindings,
        at: Option<Tick>,
    ) -> Result<Vec<Bindings>, RelationError> {
        let sig = reg
            .predicate(&pattern.predicate)
            .ok_or_else(|| RelationError::UndeclaredPredicate(pattern.predicate.clone()))?;
        let subject = self.resolve_term(&pattern.subject, &sig.subject, bindings);
        let object = self.resolve_term(&pattern.object, &sig.object, bindings);
        if matches!(subject, Resolved::Impossible) || matches!(object, Resolved::Impossible) {
            return Ok(Vec::new());
        }

        let candidates: Vec<(Node, Node)> = match at {
            None => match &subject {
                Resolved::Bound(s) => self.objects_of(s, &pattern.predicate).map(|o| (s.clone(), o.clone())).collect(),
                _ => self.live_with_predicate(&pattern.predicate).map(|(s, o)| (s.clone(), o.clone())).collect(),
            },
            Some(tick) => {
                let mut v: Vec<(Node, Node)> = self
                    .history()
                    .iter()
                    .filter(|t| t.predicate == pattern.predicate && t.live_at(tick))
                    .map(|t| (t.subject.clone(), t.object.clone()))
                    .collect();
                v.sort();
                v.dedup();
                v
            }
        };

        let mut out = Vec::new();
        for (s, o) in candidates {
            let mut b = bindings.clone();
            if bind(&subject, &s, &mut b) && bind(&object, &o, &mut b) {
                out.push(b);
            }
        }
        Ok(out)
    }

    /// First solution of a guard conjunction, searching depth-first with
    /// candidates in query order. Negated guards must have no match under the
    /// bindings reached so far.
    pub fn solve(
        &self,
        reg: &Registry,
        guards: &[Guard],
        bindings: &Bindings,
    ) -> Result<Result<Bindings, Lookup>, RelationError> {
        let mut deepest = 0;
        let found = self.solve_from(reg, guards, 0, bindings, &mut deepest)?;
        Ok(found.ok_or(Lookup { failed_guard: deepest }))
    }

    fn solve_from(
        &self,
        reg: &Registry,
        guards: &[Guard],
        i: usize,
        bindings: &Bindings,
        deepest: &mut usize,
    ) -> Result<Option<Bindings>, RelationError> {
        let Some(guard) = guards.get(i) else {
            return Ok(Some(bindings.clone()));
        };
        *deepest = (*deepest).max(i);
        let matches = self.query(reg, &guard.pattern, bindings, None)?;
        if guard.negated {
            return if matches.is_empty() { self.solve_from(reg, guards, i + 1, bindings, deepest) } else { Ok(None) };
        }
        for m in matches {
            if let Some(done) = self.solve_from(reg, guards, i + 1, &m, deepest)? {
                return Ok(Some(done));
            }
        }
        Ok(None)
    }

    /// Grounds a pattern under complete bindings.
    pub fn ground(
        &self,
        reg: &Registry,
        pattern: &Pattern,
        bindings: &Bindings,
    ) -> Result<(Node, Node), RelationError> {
        let sig = reg
            .predicate(&pattern.predicate)
            .ok_or_else(|| RelationError::UndeclaredPredicate(pattern.predicate.clone()))?;
        let ground = |term: &Term, domain: &Domain| match self.resolve_term(term, domain, bindings) {
            Resolved::Bound(n) => Ok(n),
            Resolved::Free(v) => Err(RelationError::KindMismatch(format!("?{v} is unbound in `{pattern}`"))),
            Resolved::Impossible => Err(RelationError::UnknownInstance(term.to_string())),
        };
        Ok((ground(&pattern.subject, &sig.subject)?, ground(&pattern.object, &sig.object)?))
    }
}

fn bind(term: &Resolved, value: &Node, b: &mut Bindings) -> bool {
    match term {
        Resolved::Bound(n) => n == value,
        Resolved::Free(v) => match b.get(v) {
            Some(existing) => existing == value,
            None => {
                b.insert(v.clone(), value.clone());
                true
            }
        },
        Resolved::Impossible => false,
    }
}
