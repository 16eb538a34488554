use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::schema::*;
use super::{is_reserved_name, DanglingRef, OntologyError, UpperKind, TEXT_DOMAIN};
use crate::fingerprint::Fingerprint;

/// Accumulates schemas before resolution. Single-threaded by construction.
#[derive(Debug, Default, Clone)]
pub struct RegistryBuilder {
    schemas: BTreeMap<String, Schema>,
    order: Vec<String>,
    owners: BTreeMap<String, String>,
}

impl RegistryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.schemas.contains_key(name)
    }

    pub fn register(&mut self, schema: Schema) -> Result<&mut Self, OntologyError> {
        let name = schema.name().to_string();
        if is_reserved_name(&name) {
            return Err(OntologyError::ReservedUpperTaxonomyName(name));
        }
        if self.schemas.contains_key(&name) || BUILTIN_PREDICATES.contains(&name.as_str()) {
            return Err(OntologyError::DuplicateName(name));
        }
        self.order.push(name.clone());
        self.schemas.insert(name, schema);
        Ok(self)
    }

    /// Registers a schema and remembers which source module declared it.
    pub fn register_in(&mut self, module: &str, schema: Schema) -> Result<&mut Self, OntologyError> {
        let name = schema.name().to_string();
        self.register(schema)?;
        self.owners.insert(name, module.to_string());
        Ok(self)
    }

    pub fn resolve(self) -> Result<Registry, OntologyError> {
        let RegistryBuilder { schemas, order, owners } = self;

        let mut dangling = BTreeSet::new();
        for schema in schemas.values() {
            for name in references(schema) {
                if !name_exists(&schemas, &name) {
                    dangling.insert(DanglingRef { from: schema.name().to_string(), missing: name });
                }
            }
        }
        if !dangling.is_empty() {
            return Err(OntologyError::DanglingReference(dangling.into_iter().collect()));
        }

        for name in &order {
            if let Some(cycle) = find_cycle(&schemas, name) {
                return Err(OntologyError::InheritanceCycle(cycle));
            }
        }

        let mut flat = BTreeMap::new();
        for (name, schema) in &schemas {
            let resolved = match schema {
                Schema::Object(_) => Schema::Object(flatten_object(&schemas, name)),
                other => other.clone(),
            };
            flat.insert(name.clone(), resolved);
        }

        let predicates = build_predicates(&flat, &order)?;
        let fingerprint = Fingerprint::of(&(&flat, &order, &owners));
        Ok(Registry { schemas: flat, order, owners, predicates, fingerprint })
    }
}

fn name_exists(schemas: &BTreeMap<String, Schema>, name: &str) -> bool {
    schemas.contains_key(name)
        || name.parse::<UpperKind>().is_ok()
        || name == TEXT_DOMAIN
        || BUILTIN_PREDICATES.contains(&name)
        || schemas.values().any(|s| match s {
            Schema::Object(o) => o.qualities.iter().any(|q| q.determinable == name),
            _ => false,
        })
}

/// Every name a schema mentions that must resolve somewhere.
fn references(schema: &Schema) -> Vec<String> {
    let mut out = Vec::new();
    let pattern = |p: &Pattern, out: &mut Vec<String>| out.push(p.predicate.clone());
    match schema {
        Schema::Object(o) => {
            out.extend(o.parent.iter().cloned());
            out.extend(o.qualities.iter().map(|q| q.ontology.clone()));
            out.extend(o.parts.iter().map(|p| p.schema.clone()));
            out.extend(o.realizables.iter().cloned());
            out.extend(o.location.iter().cloned());
        }
        Schema::Aggregate(a) => {
            out.extend(a.members.iter().map(|m| m.kind.clone()));
            out.extend(a.links.iter().map(|l| l.relation.clone()));
        }
        Schema::Realizable(r) => {
            out.push(r.bearer.clone());
            out.extend(r.context.iter().cloned());
            out.extend(r.realization.iter().cloned());
            out.extend(r.serves.iter().cloned());
            if let Some(t) = &r.trigger {
                pattern(t, &mut out);
            }
        }
        Schema::Relation(r) => {
            out.push(r.subject.clone());
            out.push(r.object.clone());
        }
        Schema::Process(p) => {
            for part in &p.participants {
                out.push(part.kind.clone());
                out.extend(part.role.iter().cloned());
            }
            out.extend(p.location.iter().cloned());
        }
        Schema::Transitional(t) => {
            out.extend(t.bearer.iter().cloned());
            for g in &t.guards {
                pattern(&g.pattern, &mut out);
            }
            for p in t.deletes.iter().chain(&t.creates) {
                pattern(p, &mut out);
            }
        }
        Schema::Chain(c) => {
            out.extend(c.params.iter().map(|p| p.kind.clone()));
            walk_steps(&c.body, &mut |step| match step {
                Step::Do { transitional, .. } => out.push(transitional.clone()),
                Step::If { cond, .. } | Step::While { cond, .. } => out.push(cond.pattern.predicate.clone()),
                Step::Begin { process, .. } | Step::End { process } => out.push(process.clone()),
            });
        }
        Schema::Quality(_) | Schema::Need(_) => {}
    }
    out
}

/// Pre-order walk over a step tree.
pub(crate) fn walk_steps<'a>(steps: &'a [Step], f: &mut impl FnMut(&'a Step)) {
    for step in steps {
        f(step);
        match step {
            Step::If { then, otherwise, .. } => {
                walk_steps(then, f);
                walk_steps(otherwise, f);
            }
            Step::While { body, .. } => walk_steps(body, f),
            _ => {}
        }
    }
}

fn find_cycle(schemas: &BTreeMap<String, Schema>, start: &str) -> Option<Vec<String>> {
    let mut path = vec![start.to_string()];
    let mut cur = start;
    while let Some(parent) = schemas.get(cur).and_then(Schema::declared_parent) {
        if let Some(pos) = path.iter().position(|p| p == parent) {
            let mut cycle = path[pos..].to_vec();
            cycle.push(parent.to_string());
            return Some(cycle);
        }
        path.push(parent.to_string());
        cur = parent;
    }
    None
}

/// Child-over-parent merge. Inherited slots keep the parent's position; a
/// redeclared slot replaces it in place; new slots are appended.
fn flatten_object(schemas: &BTreeMap<String, Schema>, name: &str) -> ObjectSchema {
    let Some(Schema::Object(own)) = schemas.get(name) else {
        unreachable!("flatten_object called on non-object {name}")
    };
    let Some(parent) = own.parent.as_deref().filter(|p| matches!(schemas.get(*p), Some(Schema::Object(_)))) else {
        return own.clone();
    };
    let base = flatten_object(schemas, parent);
    let mut out = ObjectSchema { name: own.name.clone(), parent: own.parent.clone(), ..Default::default() };

    out.qualities = merge_by(&base.qualities, &own.qualities, |q| q.determinable.as_str());
    out.parts = merge_by(&base.parts, &own.parts, |p| p.slot.as_str());
    out.realizables = merge_by(&base.realizables, &own.realizables, |r| r.as_str());
    out.location = own.location.clone().or(base.location);
    out
}

fn merge_by<T: Clone>(base: &[T], own: &[T], key: impl Fn(&T) -> &str) -> Vec<T> {
    let mut out: Vec<T> = base.to_vec();
    for item in own {
        match out.iter().position(|b| key(b) == key(item)) {
            Some(i) => out[i] = item.clone(),
            None => out.push(item.clone()),
        }
    }
    out
}

fn build_predicates(
    schemas: &BTreeMap<String, Schema>,
    order: &[String],
) -> Result<BTreeMap<String, PredicateSig>, OntologyError> {
    let mut preds = BTreeMap::new();
    let ic = || Domain::Instance(UpperKind::IndependentContinuant.name().to_string());
    let builtin = |name: &str, subject: Domain, object: Domain| PredicateSig {
        name: name.to_string(),
        subject,
        object,
        functional: false,
        origin: PredicateOrigin::Builtin,
    };
    preds.insert(PART_OF.into(), builtin(PART_OF, ic(), ic()));
    preds.insert(CONTAINED_IN.into(), builtin(CONTAINED_IN, ic(), ic()));
    preds.insert(LOCATED_IN.into(), builtin(LOCATED_IN, ic(), ic()));
    preds.insert(
        MEMBER_OF.into(),
        builtin(MEMBER_OF, ic(), Domain::Instance(UpperKind::ObjectAggregate.name().to_string())),
    );
    preds.insert(HAS_ROLE.into(), builtin(HAS_ROLE, ic(), Domain::SchemaRef(UpperKind::Role.name().to_string())));

    for name in order {
        match &schemas[name] {
            Schema::Relation(r) => {
                preds.insert(
                    r.name.clone(),
                    PredicateSig {
                        name: r.name.clone(),
                        subject: domain_of(schemas, &r.subject),
                        object: domain_of(schemas, &r.object),
                        functional: false,
                        origin: PredicateOrigin::Relation,
                    },
                );
            }
            Schema::Object(o) => {
                for q in &o.qualities {
                    if schemas.get(&q.determinable).is_some_and(|s| !matches!(s, Schema::Quality(_))) {
                        return Err(OntologyError::DuplicateName(q.determinable.clone()));
                    }
                    // Conflicting ontologies for one determinable are reported by validate().
                    preds.entry(q.determinable.clone()).or_insert_with(|| PredicateSig {
                        name: q.determinable.clone(),
                        subject: ic(),
                        object: Domain::Determinant(q.ontology.clone()),
                        functional: true,
                        origin: PredicateOrigin::Determinable,
                    });
                }
            }
            _ => {}
        }
    }
    Ok(preds)
}

fn domain_of(schemas: &BTreeMap<String, Schema>, name: &str) -> Domain {
    if name == TEXT_DOMAIN {
        return Domain::Text;
    }
    if let Ok(upper) = name.parse::<UpperKind>() {
        return if UpperKind::IndependentContinuant.is_a(upper) || upper.is_independent_continuant() {
            Domain::Instance(name.to_string())
        } else {
            Domain::SchemaRef(name.to_string())
        };
    }
    match schemas.get(name) {
        Some(Schema::Quality(_)) => Domain::Determinant(name.to_string()),
        Some(Schema::Object(_)) | Some(Schema::Aggregate(_)) => Domain::Instance(name.to_string()),
        _ => Domain::SchemaRef(name.to_string()),
    }
}

/// What a relation endpoint may hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// An instance whose kind is this kind or a subkind.
    Instance(String),
    /// A determinant of the named quality ontology.
    Determinant(String),
    /// The name of a schema that is this kind or a subkind.
    SchemaRef(String),
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredicateOrigin {
    Builtin,
    Relation,
    Determinable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSig {
    pub name: String,
    pub subject: Domain,
    pub object: Domain,
    /// At most one live object per subject.
    pub functional: bool,
    pub origin: PredicateOrigin,
}

/// Resolved, immutable set of Universals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    schemas: BTreeMap<String, Schema>,
    order: Vec<String>,
    owners: BTreeMap<String, String>,
    predicates: BTreeMap<String, PredicateSig>,
    fingerprint: Fingerprint,
}

impl Registry {
    pub fn empty() -> Registry {
        RegistryBuilder::new().resolve().expect("empty registry resolves")
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Schema> {
        self.schemas.get(name)
    }

    /// Schemas in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = &Schema> {
        self.order.iter().map(|n| &self.schemas[n])
    }

    pub fn owner(&self, name: &str) -> Option<&str> {
        self.owners.get(name).map(String::as_str)
    }

    /// A builder holding this registry's (already flattened) schemas.
    pub fn to_builder(&self) -> RegistryBuilder {
        RegistryBuilder { schemas: self.schemas.clone(), order: self.order.clone(), owners: self.owners.clone() }
    }

    pub fn object(&self, name: &str) -> Option<&ObjectSchema> {
        match self.schemas.get(name) {
            Some(Schema::Object(o)) => Some(o),
            _ => None,
        }
    }

    pub fn aggregate(&self, name: &str) -> Option<&AggregateSchema> {
        match self.schemas.get(name) {
            Some(Schema::Aggregate(a)) => Some(a),
            _ => None,
        }
    }

    pub fn ontology(&self, name: &str) -> Option<&QualityOntology> {
        match self.schemas.get(name) {
            Some(Schema::Quality(q)) => Some(q),
            _ => None,
        }
    }

    pub fn transitional(&self, name: &str) -> Option<&TransitionalSchema> {
        match self.schemas.get(name) {
            Some(Schema::Transitional(t)) => Some(t),
            _ => None,
        }
    }

    pub fn chain(&self, name: &str) -> Option<&ChainSchema> {
        match self.schemas.get(name) {
            Some(Schema::Chain(c)) => Some(c),
            _ => None,
        }
    }

    pub fn realizable(&self, name: &str) -> Option<&RealizableSchema> {
        match self.schemas.get(name) {
            Some(Schema::Realizable(r)) => Some(r),
            _ => None,
        }
    }

    pub fn process(&self, name: &str) -> Option<&ProcessSchema> {
        match self.schemas.get(name) {
            Some(Schema::Process(p)) => Some(p),
            _ => None,
        }
    }

    /// Dispositions in declaration order.
    pub fn dispositions(&self) -> impl Iterator<Item = &RealizableSchema> {
        self.iter().filter_map(|s| match s {
            Schema::Realizable(r) if r.variant == RealizableVariant::Disposition => Some(r),
            _ => None,
        })
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateSig> {
        self.predicates.get(name)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &PredicateSig> {
        self.predicates.values()
    }

    /// Ontology a determinable draws its values from, as declared on `kind`.
    pub fn determinable_of(&self, kind: &str, determinable: &str) -> Option<&QualitySlot> {
        self.object(kind)?.qualities.iter().find(|q| q.determinable == determinable)
    }

    /// Names from `name` up to `Entity`: schema ancestors, then upper nodes.
    pub fn ancestry(&self, name: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = name.to_string();
        loop {
            if let Ok(upper) = cur.parse::<UpperKind>() {
                out.extend(upper.ancestry().into_iter().map(|u| u.name().to_string()));
                return out;
            }
            let Some(schema) = self.schemas.get(&cur) else {
                return out;
            };
            out.push(cur.clone());
            match schema.declared_parent() {
                Some(p) => cur = p.to_string(),
                None => match schema.default_attachment() {
                    Some(u) => cur = u.name().to_string(),
                    None => return out,
                },
            }
        }
    }

    /// Upper node a kind ultimately attaches to.
    pub fn attachment(&self, name: &str) -> Option<UpperKind> {
        self.ancestry(name).iter().find_map(|n| n.parse::<UpperKind>().ok())
    }

    pub fn is_subkind(&self, kind: &str, ancestor: &str) -> bool {
        self.ancestry(kind).iter().any(|a| a == ancestor)
    }

    pub fn is_independent_continuant(&self, kind: &str) -> bool {
        self.attachment(kind).is_some_and(UpperKind::is_independent_continuant)
    }

    /// Edges from a kind to its upper-taxonomy attachment point.
    pub fn specificity(&self, name: &str) -> Option<usize> {
        if name.parse::<UpperKind>().is_ok() {
            return Some(0);
        }
        if !self.schemas.contains_key(name) {
            return None;
        }
        let ancestry = self.ancestry(name);
        Some(ancestry.iter().position(|n| n.parse::<UpperKind>().is_ok()).unwrap_or(ancestry.len()))
    }

    /// Whether an instance of `kind` may fill an endpoint of this domain.
    pub fn instance_fits(&self, domain: &Domain, kind: &str) -> bool {
        matches!(domain, Domain::Instance(d) if self.is_subkind(kind, d))
    }

    /// Whether a literal/determinant/schema name may fill an endpoint of this domain.
    pub fn value_fits(&self, domain: &Domain, value: &str) -> bool {
        match domain {
            Domain::Instance(_) => false,
            Domain::Determinant(o) => self.ontology(o).is_some_and(|q| q.contains(value)),
            Domain::SchemaRef(k) => self.schemas.contains_key(value) && self.is_subkind(value, k),
            Domain::Text => true,
        }
    }

    /// Well-formedness checks over the resolved registry. Empty means clean.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Validator { reg: self, out: Vec::new() };
        for schema in self.iter() {
            v.check(schema);
        }
        v.determinable_conflicts();
        v.out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    UnboundOccurrent,
    PartWithoutFunction,
    DispositionIncomplete,
    RoleContextNotAggregate,
    KindMismatch,
    UnboundVariable,
    PatternType,
    RecursiveAggregate,
    FlowControlInSequence,
    InterventionInMechanism,
    AmbiguousBearer,
    DeterminableConflict,
    EmptyQualityOntology,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        use ViolationCode::*;
        match self {
            UnboundOccurrent => "unbound-occurrent",
            PartWithoutFunction => "part-without-function",
            DispositionIncomplete => "disposition-incomplete",
            RoleContextNotAggregate => "role-context-not-aggregate",
            KindMismatch => "kind-mismatch",
            UnboundVariable => "unbound-variable",
            PatternType => "pattern-type",
            RecursiveAggregate => "recursive-aggregate",
            FlowControlInSequence => "flow-control-in-sequence",
            InterventionInMechanism => "intervention-in-mechanism",
            AmbiguousBearer => "ambiguous-bearer",
            DeterminableConflict => "determinable-conflict",
            EmptyQualityOntology => "empty-quality-ontology",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One registry-level well-formedness finding, attributed to a schema.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub schema: String,
    pub message: String,
}

struct Validator<'a> {
    reg: &'a Registry,
    out: Vec<Violation>,
}

impl Validator<'_> {
    fn push(&mut self, code: ViolationCode, schema: &str, message: impl Into<String>) {
        self.out.push(Violation { code, schema: schema.to_string(), message: message.into() });
    }

    fn expect_instance_kind(&mut self, schema: &str, what: &str, kind: &str) {
        if !self.reg.is_independent_continuant(kind) {
            self.push(ViolationCode::KindMismatch, schema, format!("{what} `{kind}` is not an independent continuant"));
        }
    }

    fn expect_sort(&mut self, schema: &str, what: &str, name: &str, ok: bool) {
        if !ok {
            self.push(ViolationCode::KindMismatch, schema, format!("{what} `{name}` has the wrong sort"));
        }
    }

    fn check(&mut self, schema: &Schema) {
        let reg = self.reg;
        match schema {
            Schema::Object(o) => {
                if let Some(p) = &o.parent {
                    let ok = reg.object(p).is_some()
                        || p.parse::<UpperKind>()
                            .is_ok_and(|u| UpperKind::Object.is_a(u) && u.is_independent_continuant());
                    self.expect_sort(&o.name, "parent", p, ok);
                }
                for q in &o.qualities {
                    self.expect_sort(&o.name, "quality ontology", &q.ontology, reg.ontology(&q.ontology).is_some());
                }
                for part in &o.parts {
                    if part.function.trim().is_empty() {
                        self.push(
                            ViolationCode::PartWithoutFunction,
                            &o.name,
                            format!("part `{}` declares no function", part.slot),
                        );
                    }
                    self.expect_instance_kind(&o.name, "part", &part.schema);
                }
                for r in &o.realizables {
                    self.expect_sort(&o.name, "realizable", r, reg.realizable(r).is_some());
                }
                if let Some(l) = &o.location {
                    self.expect_instance_kind(&o.name, "location", l);
                }
            }
            Schema::Aggregate(a) => {
                for m in &a.members {
                    self.expect_instance_kind(&a.name, "member", &m.kind);
                }
                for l in &a.links {
                    for end in [&l.from, &l.to] {
                        if a.member(end).is_none() {
                            self.push(
                                ViolationCode::KindMismatch,
                                &a.name,
                                format!("link endpoint `{end}` is not a member slot"),
                            );
                        }
                    }
                    if reg.predicate(&l.relation).is_none() {
                        self.push(
                            ViolationCode::PatternType,
                            &a.name,
                            format!("link `{}` is not a relation", l.relation),
                        );
                    }
                }
                if self.aggregate_reaches(&a.name, &a.name, &mut BTreeSet::new()) {
                    self.push(
                        ViolationCode::RecursiveAggregate,
                        &a.name,
                        "aggregate contains itself through its member slots; recursive aggregates are not supported",
                    );
                }
            }
            Schema::Quality(q) => {
                if q.determinants.is_empty() {
                    self.push(ViolationCode::EmptyQualityOntology, &q.name, "quality ontology has no determinants");
                }
                let unique: BTreeSet<_> = q.determinants.iter().collect();
                if unique.len() != q.determinants.len() {
                    self.push(ViolationCode::EmptyQualityOntology, &q.name, "determinants are not unique");
                }
            }
            Schema::Realizable(r) => self.check_realizable(r),
            Schema::Need(_) => {}
            Schema::Relation(r) => {
                let subject = domain_of(&reg.schemas, &r.subject);
                if matches!(subject, Domain::Text | Domain::SchemaRef(_)) {
                    self.push(
                        ViolationCode::KindMismatch,
                        &r.name,
                        "relation subject must be an instance kind or a quality ontology",
                    );
                }
            }
            Schema::Process(p) => {
                if !p.participants.iter().any(|part| reg.is_independent_continuant(&part.kind)) {
                    self.push(
                        ViolationCode::UnboundOccurrent,
                        &p.name,
                        "process has no independent continuant participant",
                    );
                }
                for part in &p.participants {
                    if let Some(role) = &part.role {
                        let ok = reg.realizable(role).is_some_and(|r| r.variant == RealizableVariant::Role);
                        self.expect_sort(&p.name, "role", role, ok);
                    }
                }
            }
            Schema::Transitional(t) => self.check_transitional(t),
            Schema::Chain(c) => self.check_chain(c),
        }
    }

    fn aggregate_reaches(&self, from: &str, target: &str, seen: &mut BTreeSet<String>) -> bool {
        let Some(a) = self.reg.aggregate(from) else { return false };
        for m in &a.members {
            for kind in self.reg.ancestry(&m.kind) {
                if kind == target {
                    return true;
                }
                if self.reg.aggregate(&kind).is_some()
                    && seen.insert(kind.clone())
                    && self.aggregate_reaches(&kind, target, seen)
                {
                    return true;
                }
            }
        }
        false
    }

    fn check_realizable(&mut self, r: &RealizableSchema) {
        let reg = self.reg;
        self.expect_instance_kind(&r.name, "bearer", &r.bearer);
        match r.variant {
            RealizableVariant::Disposition => {
                if r.trigger.is_none() || r.realization.is_none() {
                    self.push(
                        ViolationCode::DispositionIncomplete,
                        &r.name,
                        "disposition needs both a trigger and a realization",
                    );
                }
                if let Some(t) = &r.trigger {
                    self.check_pattern(&r.name, t);
                }
                if let Some(real) = &r.realization {
                    match reg.transitional(real) {
                        Some(t) => {
                            if let Some(b) = &t.bearer {
                                if !reg.is_subkind(&r.bearer, b) {
                                    self.push(
                                        ViolationCode::KindMismatch,
                                        &r.name,
                                        format!("realization `{real}` is borne by `{b}`, not `{}`", r.bearer),
                                    );
                                }
                            }
                        }
                        None => self.expect_sort(&r.name, "realization", real, false),
                    }
                }
            }
            RealizableVariant::Role => {
                if let Some(ctx) = &r.context {
                    if reg.aggregate(ctx).is_none() {
                        self.push(
                            ViolationCode::RoleContextNotAggregate,
                            &r.name,
                            format!("role context `{ctx}` is not an aggregate"),
                        );
                    }
                }
            }
            RealizableVariant::Function => {
                if let Some(n) = &r.serves {
                    self.expect_sort(&r.name, "need", n, matches!(reg.get(n), Some(Schema::Need(_))));
                }
            }
        }
    }

    fn check_transitional(&mut self, t: &TransitionalSchema) {
        let reg = self.reg;
        match &t.bearer {
            None => self.push(ViolationCode::UnboundOccurrent, &t.name, "transitional declares no bearer"),
            Some(b) if !reg.is_independent_continuant(b) => self.push(
                ViolationCode::UnboundOccurrent,
                &t.name,
                format!("bearer `{b}` is not an independent continuant"),
            ),
            Some(_) => {}
        }
        let mut bound: BTreeSet<&str> = BTreeSet::from([SELF_VAR]);
        for g in &t.guards {
            self.check_pattern(&t.name, &g.pattern);
            if !g.negated {
                bound.extend(g.pattern.variables());
            }
        }
        for p in t.deletes.iter().chain(&t.creates) {
            self.check_pattern(&t.name, p);
            for var in p.variables() {
                if !bound.contains(var) {
                    self.push(
                        ViolationCode::UnboundVariable,
                        &t.name,
                        format!("?{var} in `{p}` is not bound by a guard or the bearer"),
                    );
                }
            }
        }
    }

    fn check_pattern(&mut self, schema: &str, p: &Pattern) {
        let reg = self.reg;
        let Some(sig) = reg.predicate(&p.predicate) else {
            self.push(ViolationCode::PatternType, schema, format!("`{}` is not a predicate", p.predicate));
            return;
        };
        for (term, domain) in [(&p.subject, &sig.subject), (&p.object, &sig.object)] {
            let ok = match term {
                Term::Var(_) => true,
                Term::Const(c) => !matches!(domain, Domain::Instance(_)) && reg.value_fits(domain, c),
                Term::Text(_) => matches!(domain, Domain::Text),
            };
            if !ok {
                self.push(
                    ViolationCode::PatternType,
                    schema,
                    format!("`{term}` does not fit `{}` in `{p}`", p.predicate),
                );
            }
        }
    }

    fn check_chain(&mut self, c: &ChainSchema) {
        let reg = self.reg;
        for param in &c.params {
            self.expect_instance_kind(&c.name, "parameter", &param.kind);
        }
        let mut steps = Vec::new();
        walk_steps(&c.body, &mut |s| steps.push(s));
        for step in steps {
            match step {
                Step::Do { transitional, bearer, intervention } => {
                    if *intervention && !c.kind.allows_intervention() {
                        self.push(
                            ViolationCode::InterventionInMechanism,
                            &c.name,
                            format!("{} chains run without intervention", c.kind.keyword()),
                        );
                    }
                    let Some(t) = reg.transitional(transitional) else {
                        self.expect_sort(&c.name, "step", transitional, false);
                        continue;
                    };
                    match bearer {
                        Some(b) => match c.params.iter().find(|p| &p.name == b) {
                            None => {
                                self.push(ViolationCode::KindMismatch, &c.name, format!("`{b}` is not a parameter"))
                            }
                            Some(p) => {
                                if let Some(tb) = &t.bearer {
                                    if !reg.is_subkind(&p.kind, tb) {
                                        self.push(
                                            ViolationCode::KindMismatch,
                                            &c.name,
                                            format!("`{b}: {}` cannot bear `{transitional}`", p.kind),
                                        );
                                    }
                                }
                            }
                        },
                        None => {
                            if infer_bearer(reg, c, t).is_none() {
                                self.push(
                                    ViolationCode::AmbiguousBearer,
                                    &c.name,
                                    format!("cannot infer which parameter bears `{transitional}`"),
                                );
                            }
                        }
                    }
                }
                Step::If { cond, .. } | Step::While { cond, .. } => {
                    if !c.kind.allows_flow_control() {
                        self.push(
                            ViolationCode::FlowControlInSequence,
                            &c.name,
                            "a sequence is a disjoint series of steps; it admits no conditionals or loops",
                        );
                    }
                    self.check_step_pattern(c, &cond.pattern);
                }
                Step::Begin { process, participants } => {
                    self.expect_sort(&c.name, "process", process, reg.process(process).is_some());
                    for p in participants {
                        if !c.params.iter().any(|cp| &cp.name == p) {
                            self.push(ViolationCode::KindMismatch, &c.name, format!("`{p}` is not a parameter"));
                        }
                    }
                }
                Step::End { process } => {
                    self.expect_sort(&c.name, "process", process, reg.process(process).is_some());
                }
            }
        }
    }

    /// Chain conditions may name parameters as bare identifiers.
    fn check_step_pattern(&mut self, c: &ChainSchema, p: &Pattern) {
        let is_param = |t: &Term| matches!(t, Term::Const(n) if c.params.iter().any(|cp| &cp.name == n));
        let mut probe = p.clone();
        if is_param(&p.subject) {
            probe.subject = Term::Var(String::from("param"));
        }
        if is_param(&p.object) {
            probe.object = Term::Var(String::from("param"));
        }
        self.check_pattern(&c.name, &probe);
    }

    fn determinable_conflicts(&mut self) {
        let mut seen: BTreeMap<&str, (&str, &str)> = BTreeMap::new();
        for schema in self.reg.iter() {
            let Schema::Object(o) = schema else { continue };
            for q in &o.qualities {
                match seen.get(q.determinable.as_str()) {
                    Some((onto, first)) if *onto != q.ontology => {
                        let msg = format!(
                            "determinable `{}` draws from `{}` here but from `{onto}` in `{first}`",
                            q.determinable, q.ontology
                        );
                        self.push(ViolationCode::DeterminableConflict, &o.name, msg);
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(&q.determinable, (&q.ontology, &o.name));
                    }
                }
            }
        }
    }
}

/// The single chain parameter able to bear `t`, if exactly one exists.
pub fn infer_bearer<'c>(reg: &Registry, chain: &'c ChainSchema, t: &TransitionalSchema) -> Option<&'c ChainParam> {
    let bearer = t.bearer.as_deref()?;
    let mut fits = chain.params.iter().filter(|p| reg.is_subkind(&p.kind, bearer));
    let first = fits.next()?;
    fits.next().is_none().then_some(first)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ontology(name: &str, values: &[&str]) -> Schema {
        Schema::Quality(QualityOntology {
            name: name.into(),
            determinants: values.iter().map(|v| v.to_string()).collect(),
        })
    }

    fn object(name: &str, parent: Option<&str>, qualities: &[(&str, &str)]) -> ObjectSchema {
        ObjectSchema {
            name: name.into(),
            parent: parent.map(Into::into),
            qualities: qualities
                .iter()
                .map(|(d, o)| QualitySlot { determinable: d.to_string(), ontology: o.to_string(), required: true })
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn register_traffic_light() {
        let mut b = RegistryBuilder::new();
        b.register(Schema::Object(object("TrafficLight", None, &[("color", "color")]))).unwrap();
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn duplicate_and_reserved_names() {
        let mut b = RegistryBuilder::new();
        b.register(ontology("color", &["green"])).unwrap();
        assert_eq!(b.register(ontology("color", &["red"])).unwrap_err(), OntologyError::DuplicateName("color".into()));
        assert_eq!(
            b.register(Schema::Object(object("Object", None, &[]))).unwrap_err(),
            OntologyError::ReservedUpperTaxonomyName("Object".into())
        );
        assert!(matches!(b.register(ontology("part_of", &["x"])), Err(OntologyError::DuplicateName(_))));
    }

    #[test]
    fn inheritance_flattens_child_over_parent() {
        let mut b = RegistryBuilder::new();
        b.register(ontology("moisture-content", &["wet", "leather-hard", "dry", "fired"])).unwrap();
        b.register(ontology("glaze", &["celadon", "white"])).unwrap();
        b.register(ontology("shape", &["duck", "ring"])).unwrap();
        b.register(Schema::Object(object(
            "WaterDropper",
            None,
            &[("moisture", "moisture-content"), ("shape", "shape")],
        )))
        .unwrap();
        let mut child = object("CeladonDropper", Some("WaterDropper"), &[("glaze-color", "glaze")]);
        child.qualities.push(QualitySlot { determinable: "shape".into(), ontology: "shape".into(), required: false });
        b.register(Schema::Object(child)).unwrap();
        let reg = b.resolve().unwrap();

        // Hand-flattened expectation.
        let expected = ObjectSchema {
            name: "CeladonDropper".into(),
            parent: Some("WaterDropper".into()),
            qualities: vec![
                QualitySlot { determinable: "moisture".into(), ontology: "moisture-content".into(), required: true },
                QualitySlot { determinable: "shape".into(), ontology: "shape".into(), required: false },
                QualitySlot { determinable: "glaze-color".into(), ontology: "glaze".into(), required: true },
            ],
            ..Default::default()
        };
        assert_eq!(reg.object("CeladonDropper").unwrap(), &expected);
        assert_eq!(reg.specificity("CeladonDropper"), Some(2));
        assert!(reg.is_subkind("CeladonDropper", "MaterialEntity"));
        assert!(reg.validate().is_empty(), "{:?}", reg.validate());
    }

    #[test]
    fn flattening_is_idempotent() {
        let mut b = RegistryBuilder::new();
        b.register(ontology("c", &["x"])).unwrap();
        b.register(Schema::Object(object("A", None, &[("q", "c")]))).unwrap();
        b.register(Schema::Object(object("B", Some("A"), &[]))).unwrap();
        let once = b.resolve().unwrap();
        let twice = once.to_builder().resolve().unwrap();
        assert_eq!(once.object("B"), twice.object("B"));
        assert_eq!(once.fingerprint(), twice.fingerprint());
    }

    #[test]
    fn dangling_references_are_all_reported() {
        let mut b = RegistryBuilder::new();
        b.register(Schema::Object(object("Lamp", Some("Fixture"), &[("hue", "hue-ontology")]))).unwrap();
        let err = b.resolve().unwrap_err();
        let OntologyError::DanglingReference(refs) = err else { panic!("{err:?}") };
        let missing: Vec<_> = refs.iter().map(|r| r.missing.as_str()).collect();
        assert_eq!(missing, vec!["Fixture", "hue-ontology"]);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let mut b = RegistryBuilder::new();
        b.register(Schema::Object(object("A", Some("B"), &[]))).unwrap();
        b.register(Schema::Object(object("B", Some("A"), &[]))).unwrap();
        assert!(matches!(b.resolve(), Err(OntologyError::InheritanceCycle(_))));
    }

    #[test]
    fn unbound_transitional_and_part_without_function() {
        let mut b = RegistryBuilder::new();
        b.register(ontology("color", &["red", "green"])).unwrap();
        b.register(Schema::Object(object("Light", None, &[("color", "color")]))).unwrap();
        let mut engine = object("Engine", None, &[]);
        b.register(Schema::Object(object("Crankshaft", None, &[]))).unwrap();
        engine.parts.push(PartSlot {
            slot: "crankshaft".into(),
            schema: "Crankshaft".into(),
            function: String::new(),
            linkage: Linkage::Composition,
        });
        b.register(Schema::Object(engine)).unwrap();
        b.register(Schema::Transitional(TransitionalSchema {
            name: "turn_green".into(),
            bearer: None,
            guards: vec![Guard::positive(Pattern::new("color", Term::var_self(), Term::Const("red".into())))],
            deletes: vec![],
            creates: vec![],
        }))
        .unwrap();
        let codes: Vec<_> = b.resolve().unwrap().validate().into_iter().map(|v| v.code).collect();
        assert_eq!(codes, vec![ViolationCode::PartWithoutFunction, ViolationCode::UnboundOccurrent]);
    }

    #[test]
    fn fingerprint_is_stable_for_identical_input() {
        let build = || {
            let mut b = RegistryBuilder::new();
            b.register(ontology("color", &["green", "yellow", "red"])).unwrap();
            b.resolve().unwrap().fingerprint()
        };
        assert_eq!(build(), build());
    }
}
