use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::diagnostic::{has_errors, Diagnostic, Span};
use super::parser::parse_module;
use crate::fingerprint::Fingerprint;
use crate::ontology::*;

/// Facet a module gets when it declares none.
pub const DEFAULT_FACET: &str = "physical";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldDef {
    pub name: String,
    pub module: String,
    pub items: Vec<WorldItemDef>,
    pub rules: Vec<RuleDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum WorldItemDef {
    /// Binding keys name a determinable, an aggregate slot or any predicate.
    Spawn {
        name: String,
        kind: String,
        bindings: Vec<(String, Term)>,
    },
    Assert(Pattern),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDef {
    pub name: String,
    /// `(variable, kind)` in dispatch order.
    pub params: Vec<(String, String)>,
    pub when: Vec<Guard>,
    pub transitional: String,
    pub bearer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimDef {
    pub name: String,
    pub statement: String,
    pub evidence: Vec<EvidenceDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceDef {
    pub artifact: ArtifactRef,
    pub note: String,
    pub validated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArtifactRef {
    /// Name of an instance spawned in some world.
    Instance(String),
    /// Opaque reference to an external document.
    Document(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleInfo {
    pub name: String,
    pub fingerprint: Fingerprint,
    pub facet: String,
    pub imports: Vec<String>,
    /// Schema, relation and determinable names declared here.
    pub terms: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub registry: Arc<Registry>,
    pub worlds: Vec<WorldDef>,
    pub claims: Vec<ClaimDef>,
    pub modules: Vec<ModuleInfo>,
    /// Warnings only; errors make compilation fail.
    pub warnings: Vec<Diagnostic>,
}

impl Compiled {
    pub fn world(&self, name: &str) -> Option<&WorldDef> {
        self.worlds.iter().find(|w| w.name == name)
    }

    pub fn module(&self, name: &str) -> Option<&ModuleInfo> {
        self.modules.iter().find(|m| m.name == name)
    }
}

/// Parses and compiles `(module name, source)` pairs in one go.
pub fn compile_sources(sources: &[(&str, &str)]) -> Result<Compiled, Vec<Diagnostic>> {
    let mut modules = Vec::new();
    let mut diags = Vec::new();
    for (name, text) in sources {
        let (m, d) = parse_module(name, text);
        modules.push(m);
        diags.extend(d);
    }
    if has_errors(&diags) {
        return Err(diags);
    }
    compile(&modules)
}

pub fn compile(modules: &[SourceModule]) -> Result<Compiled, Vec<Diagnostic>> {
    let mut c = Compiler::default();
    c.dedup(modules);
    c.order_modules();
    c.collect_declarations();
    c.check_references();
    if has_errors(&c.diags) {
        return Err(c.diags);
    }
    let builder = c.register();
    if has_errors(&c.diags) {
        return Err(c.diags);
    }
    let registry = match builder.resolve() {
        Ok(r) => r,
        Err(e) => {
            c.report_ontology_error(&e);
            return Err(c.diags);
        }
    };
    for v in registry.validate() {
        let (file, span) = c.origin(&v.schema);
        c.diags.push(Diagnostic::error(&file, span, v.code.as_str(), v.message));
    }
    let worlds = c.lower_worlds();
    let claims = c.lower_claims();
    c.warn_unused_quality(&registry);
    c.warn_empty_chains();
    if has_errors(&c.diags) {
        return Err(c.diags);
    }
    let modules = c.module_infos();
    Ok(Compiled { registry: Arc::new(registry), worlds, claims, modules, warnings: c.diags })
}

fn file_of(module: &str) -> String {
    format!("{module}.xfo")
}

#[derive(Default)]
struct ModuleScope {
    schemas: BTreeSet<String>,
    determinables: BTreeSet<String>,
    visible: BTreeSet<String>,
    used_imports: BTreeSet<String>,
}

#[derive(Default)]
struct Compiler<'a> {
    modules: Vec<&'a SourceModule>,
    scopes: BTreeMap<String, ModuleScope>,
    origins: BTreeMap<String, (String, Span)>,
    diags: Vec<Diagnostic>,
}

impl<'a> Compiler<'a> {
    fn dedup(&mut self, modules: &'a [SourceModule]) {
        let mut seen: BTreeMap<&str, Fingerprint> = BTreeMap::new();
        for m in modules {
            match seen.get(m.name.as_str()) {
                Some(fp) if *fp == m.fingerprint() => {}
                Some(_) => self.diags.push(Diagnostic::error(
                    &file_of(&m.name),
                    Span::new(1, 1, 0),
                    "conflicting-module",
                    format!("module `{}` was given twice with different content", m.name),
                )),
                None => {
                    seen.insert(&m.name, m.fingerprint());
                    self.modules.push(m);
                }
            }
        }
    }

    /// Imports before importers, otherwise in the given order.
    fn order_modules(&mut self) {
        let by_name: BTreeMap<&str, &'a SourceModule> = self.modules.iter().map(|m| (m.name.as_str(), *m)).collect();
        let mut ordered = Vec::new();
        let mut visited = BTreeSet::new();
        fn visit<'a>(
            m: &'a SourceModule,
            by_name: &BTreeMap<&str, &'a SourceModule>,
            visited: &mut BTreeSet<String>,
            out: &mut Vec<&'a SourceModule>,
        ) {
            if !visited.insert(m.name.clone()) {
                return;
            }
            for i in &m.imports {
                if let Some(dep) = by_name.get(i.text.as_str()) {
                    visit(dep, by_name, visited, out);
                }
            }
            out.push(m);
        }
        for m in &self.modules {
            visit(m, &by_name, &mut visited, &mut ordered);
        }
        for m in &self.modules {
            for i in &m.imports {
                if !by_name.contains_key(i.text.as_str()) {
                    self.diags.push(Diagnostic::error(
                        &file_of(&m.name),
                        i.span,
                        "unknown-import",
                        format!("module `{}` is not available", i.text),
                    ));
                }
            }
        }
        self.modules = ordered;
    }

    fn collect_declarations(&mut self) {
        for m in &self.modules {
            let mut scope = ModuleScope::default();
            for d in &m.decls {
                match d {
                    Decl::World(_) | Decl::Claim(_) | Decl::Facet(_) => {}
                    _ => {
                        scope.schemas.insert(d.name().text.clone());
                    }
                }
                if let Decl::Object(o) = d {
                    for item in &o.items {
                        match item {
                            ObjItem::Quality { determinable, .. } => {
                                scope.determinables.insert(determinable.text.clone());
                            }
                            ObjItem::Function { name, .. } => {
                                scope.schemas.insert(name.text.clone());
                            }
                            _ => {}
                        }
                    }
                }
            }
            self.scopes.insert(m.name.clone(), scope);
        }
        let names: Vec<String> = self.modules.iter().map(|m| m.name.clone()).collect();
        let imports: BTreeMap<String, Vec<String>> =
            self.modules.iter().map(|m| (m.name.clone(), m.imports.iter().map(|i| i.text.clone()).collect())).collect();
        for name in names {
            let mut visible = BTreeSet::new();
            let mut stack = imports[&name].clone();
            while let Some(n) = stack.pop() {
                if self.scopes.contains_key(&n) && visible.insert(n.clone()) {
                    stack.extend(imports[&n].iter().cloned());
                }
            }
            visible.remove(&name);
            self.scopes.get_mut(&name).unwrap().visible = visible;
        }
    }

    /// Module declaring `name` as seen from `module`, or `None` for built-ins.
    fn lookup(&mut self, module: &str, name: &Name, predicate: bool) -> Result<Option<String>, String> {
        let declares = |scope: &ModuleScope, text: &str| {
            scope.schemas.contains(text) || (predicate && scope.determinables.contains(text))
        };
        if let Some(q) = &name.module {
            let scope = &self.scopes[module];
            if q != module && !scope.visible.contains(q) {
                return Err(format!("`{q}.{}`: module `{q}` is not imported", name.text));
            }
            if !declares(&self.scopes[q], &name.text) {
                return Err(format!("`{}` is not declared in module `{q}`", name.text));
            }
            self.mark_used(module, q);
            return Ok(Some(q.clone()));
        }
        if (is_reserved_name(&name.text) && !predicate)
            || (predicate && BUILTIN_PREDICATES.contains(&name.text.as_str()))
        {
            return Ok(None);
        }
        if declares(&self.scopes[module], &name.text) {
            return Ok(Some(module.to_string()));
        }
        let visible: Vec<String> = self.scopes[module].visible.iter().cloned().collect();
        for v in visible {
            if declares(&self.scopes[&v], &name.text) {
                self.mark_used(module, &v);
                return Ok(Some(v));
            }
        }
        Err(format!("`{}` is not declared in `{module}` or its imports", name.text))
    }

    fn mark_used(&mut self, module: &str, owner: &str) {
        let direct: Vec<String> =
            self.modules.iter().find(|m| m.name == module).unwrap().imports.iter().map(|i| i.text.clone()).collect();
        for d in direct {
            if d == owner || self.scopes.get(&d).is_some_and(|s| s.visible.contains(owner)) {
                self.scopes.get_mut(module).unwrap().used_imports.insert(d);
            }
        }
    }

    fn check_references(&mut self) {
        let modules = self.modules.clone();
        for m in modules {
            let mut refs: Vec<(&Name, bool)> = Vec::new();
            for d in &m.decls {
                decl_refs(d, &mut refs);
            }
            for (name, predicate) in refs {
                if let Err(msg) = self.lookup(&m.name, name, predicate) {
                    self.diags.push(Diagnostic::error(&file_of(&m.name), name.span, "dangling-reference", msg));
                }
            }
            for i in &m.imports {
                if self.scopes.contains_key(&i.text) && !self.scopes[&m.name].used_imports.contains(&i.text) {
                    self.diags.push(Diagnostic::warning(
                        &file_of(&m.name),
                        i.span,
                        "unused-import",
                        format!("nothing from `{}` is used", i.text),
                    ));
                }
            }
        }
    }

    fn register(&mut self) -> RegistryBuilder {
        let mut b = RegistryBuilder::new();
        let modules = self.modules.clone();
        for m in modules {
            let file = file_of(&m.name);
            for d in &m.decls {
                for (schema, span) in lower_decl(d) {
                    let name = schema.name().to_string();
                    match b.register_in(&m.name, schema) {
                        Ok(_) => {
                            self.origins.insert(name, (file.clone(), span));
                        }
                        Err(e) => self.diags.push(ontology_diag(&file, span, &e)),
                    }
                }
            }
        }
        b
    }

    fn origin(&self, schema: &str) -> (String, Span) {
        self.origins.get(schema).cloned().unwrap_or_else(|| {
            let file = self.modules.first().map(|m| file_of(&m.name)).unwrap_or_default();
            (file, Span::new(1, 1, 0))
        })
    }

    fn report_ontology_error(&mut self, e: &OntologyError) {
        match e {
            OntologyError::DanglingReference(list) => {
                for r in list {
                    let (file, span) = self.origin(&r.from);
                    self.diags.push(Diagnostic::error(
                        &file,
                        span,
                        "dangling-reference",
                        format!("`{}` references undeclared `{}`", r.from, r.missing),
                    ));
                }
            }
            OntologyError::InheritanceCycle(cycle) => {
                let (file, span) = self.origin(&cycle[0]);
                self.diags.push(ontology_diag(&file, span, e));
            }
            OntologyError::DuplicateName(n) | OntologyError::ReservedUpperTaxonomyName(n) => {
                let (file, span) = self.origin(n);
                self.diags.push(ontology_diag(&file, span, e));
            }
        }
    }

    fn lower_worlds(&mut self) -> Vec<WorldDef> {
        let mut worlds: Vec<WorldDef> = Vec::new();
        for m in &self.modules {
            for d in &m.decls {
                let Decl::World(w) = d else { continue };
                if worlds.iter().any(|x| x.name == w.name.text) {
                    self.diags.push(Diagnostic::error(
                        &file_of(&m.name),
                        w.name.span,
                        "duplicate-name",
                        format!("world `{}` is declared twice", w.name.text),
                    ));
                    continue;
                }
                let mut def = WorldDef {
                    name: w.name.text.clone(),
                    module: m.name.clone(),
                    items: Vec::new(),
                    rules: Vec::new(),
                };
                for item in &w.items {
                    match item {
                        WorldItem::Spawn { name, kind, bindings, .. } => def.items.push(WorldItemDef::Spawn {
                            name: name.text.clone(),
                            kind: kind.text.clone(),
                            bindings: bindings.iter().map(|(k, v)| (k.text.clone(), v.term.clone())).collect(),
                        }),
                        WorldItem::Assert(p) => def.items.push(WorldItemDef::Assert(lower_pattern(p))),
                        WorldItem::Rule(r) => def.rules.push(RuleDef {
                            name: r.name.text.clone(),
                            params: r.params.iter().map(|(v, k)| (v.text.clone(), k.text.clone())).collect(),
                            when: r.when.iter().map(lower_guard).collect(),
                            transitional: r.transitional.text.clone(),
                            bearer: r.bearer.text.clone(),
                        }),
                    }
                }
                for r in &w.items {
                    if let WorldItem::Rule(r) = r {
                        let vars: BTreeSet<&str> = r.params.iter().map(|(v, _)| v.text.as_str()).collect();
                        if !vars.contains(r.bearer.text.as_str()) {
                            self.diags.push(Diagnostic::error(
                                &file_of(&m.name),
                                r.bearer.span,
                                "unbound-variable",
                                format!(
                                    "rule `{}` fires on `?{}`, which is not a parameter",
                                    r.name.text, r.bearer.text
                                ),
                            ));
                        }
                    }
                }
                worlds.push(def);
            }
        }
        worlds
    }

    fn lower_claims(&mut self) -> Vec<ClaimDef> {
        let mut claims: Vec<ClaimDef> = Vec::new();
        for m in &self.modules {
            for d in &m.decls {
                let Decl::Claim(c) = d else { continue };
                if claims.iter().any(|x| x.name == c.name.text) {
                    self.diags.push(Diagnostic::error(
                        &file_of(&m.name),
                        c.name.span,
                        "duplicate-name",
                        format!("claim `{}` is declared twice", c.name.text),
                    ));
                    continue;
                }
                claims.push(ClaimDef {
                    name: c.name.text.clone(),
                    statement: c.statement.clone(),
                    evidence: c
                        .evidence
                        .iter()
                        .map(|e| EvidenceDef {
                            artifact: match &e.artifact {
                                ArtifactAst::Instance(n) => ArtifactRef::Instance(n.text.clone()),
                                ArtifactAst::Document(d) => ArtifactRef::Document(d.clone()),
                            },
                            note: e.note.clone(),
                            validated: e.validated,
                        })
                        .collect(),
                });
            }
        }
        claims
    }

    fn warn_unused_quality(&mut self, reg: &Registry) {
        let mut used = BTreeSet::new();
        for s in reg.iter() {
            match s {
                Schema::Object(o) => used.extend(o.qualities.iter().map(|q| q.ontology.clone())),
                Schema::Relation(r) => {
                    used.insert(r.subject.clone());
                    used.insert(r.object.clone());
                }
                _ => {}
            }
        }
        for s in reg.iter() {
            if let Schema::Quality(q) = s {
                if !used.contains(&q.name) {
                    let (file, span) = self.origin(&q.name);
                    self.diags.push(Diagnostic::warning(
                        &file,
                        span,
                        "unused-quality",
                        format!("quality ontology `{}` is never used", q.name),
                    ));
                }
            }
        }
    }

    fn warn_empty_chains(&mut self) {
        for m in &self.modules {
            for d in &m.decls {
                if let Decl::Chain(c) = d {
                    if c.body.is_empty() {
                        self.diags.push(Diagnostic::warning(
                            &file_of(&m.name),
                            c.name.span,
                            "empty-chain",
                            format!("chain `{}` has no steps", c.name.text),
                        ));
                    }
                }
            }
        }
    }

    fn module_infos(&self) -> Vec<ModuleInfo> {
        self.modules
            .iter()
            .map(|m| {
                let scope = &self.scopes[&m.name];
                let facet = m
                    .decls
                    .iter()
                    .find_map(|d| match d {
                        Decl::Facet(f) => Some(f.name.text.clone()),
                        _ => None,
                    })
                    .unwrap_or_else(|| DEFAULT_FACET.to_string());
                ModuleInfo {
                    name: m.name.clone(),
                    fingerprint: m.fingerprint(),
                    facet,
                    imports: m.imports.iter().map(|i| i.text.clone()).collect(),
                    terms: scope.schemas.union(&scope.determinables).cloned().collect(),
                }
            })
            .collect()
    }
}

fn ontology_diag(file: &str, span: Span, e: &OntologyError) -> Diagnostic {
    let code = match e {
        OntologyError::DuplicateName(_) => "duplicate-name",
        OntologyError::ReservedUpperTaxonomyName(_) => "reserved-name",
        OntologyError::DanglingReference(_) => "dangling-reference",
        OntologyError::InheritanceCycle(_) => "inheritance-cycle",
    };
    Diagnostic::error(file, span, code, e.to_string())
}

/// Every name in `decl` that must resolve, flagged when it names a predicate.
fn decl_refs<'d>(decl: &'d Decl, out: &mut Vec<(&'d Name, bool)>) {
    let pat = |p: &'d PatternAst, out: &mut Vec<(&'d Name, bool)>| out.push((&p.predicate, true));
    match decl {
        Decl::Object(o) => {
            out.extend(o.parent.iter().map(|p| (p, false)));
            for item in &o.items {
                match item {
                    ObjItem::Quality { ontology, .. } => out.push((ontology, false)),
                    ObjItem::Part { schema, .. } => out.push((schema, false)),
                    ObjItem::Function { serves, .. } => out.extend(serves.iter().map(|s| (s, false))),
                    ObjItem::Role { name } => out.push((name, false)),
                    ObjItem::Location { kind } => out.push((kind, false)),
                }
            }
        }
        Decl::Aggregate(a) => {
            out.extend(a.members.iter().map(|(_, k)| (k, false)));
            out.extend(a.links.iter().map(|l| (&l.relation, true)));
        }
        Decl::Relation(r) => {
            out.push((&r.subject, false));
            out.push((&r.object, false));
        }
        Decl::Transitional(t) => {
            out.extend(t.bearer.iter().map(|b| (b, false)));
            for g in &t.requires {
                pat(&g.pattern, out);
            }
            for p in t.deletes.iter().chain(&t.creates) {
                pat(p, out);
            }
        }
        Decl::Chain(c) => {
            out.extend(c.params.iter().map(|(_, k)| (k, false)));
            step_refs(&c.body, out);
        }
        Decl::Disposition(d) => {
            out.push((&d.bearer, false));
            pat(&d.trigger, out);
            out.push((&d.realization, false));
        }
        Decl::World(w) => {
            for item in &w.items {
                match item {
                    WorldItem::Spawn { kind, .. } => out.push((kind, false)),
                    WorldItem::Assert(p) => pat(p, out),
                    WorldItem::Rule(r) => {
                        out.extend(r.params.iter().map(|(_, k)| (k, false)));
                        for g in &r.when {
                            pat(&g.pattern, out);
                        }
                        out.push((&r.transitional, false));
                    }
                }
            }
        }
        Decl::Process(p) => {
            for (kind, role) in &p.participants {
                out.push((kind, false));
                out.extend(role.iter().map(|r| (r, false)));
            }
            out.extend(p.location.iter().map(|l| (l, false)));
        }
        Decl::Role(r) => {
            out.push((&r.bearer, false));
            out.extend(r.context.iter().map(|c| (c, false)));
        }
        Decl::Quality(_) | Decl::Claim(_) | Decl::Need(_) | Decl::Facet(_) => {}
    }
}

fn step_refs<'d>(steps: &'d [StepAst], out: &mut Vec<(&'d Name, bool)>) {
    for s in steps {
        match s {
            StepAst::Do { transitional, .. } => out.push((transitional, false)),
            StepAst::If { cond, then, otherwise, .. } => {
                out.push((&cond.pattern.predicate, true));
                step_refs(then, out);
                step_refs(otherwise, out);
            }
            StepAst::While { cond, body, .. } => {
                out.push((&cond.pattern.predicate, true));
                step_refs(body, out);
            }
            StepAst::Begin { process, .. } | StepAst::End { process, .. } => out.push((process, false)),
        }
    }
}

fn lower_pattern(p: &PatternAst) -> Pattern {
    Pattern::new(p.predicate.text.clone(), p.subject.term.clone(), p.object.term.clone())
}

fn lower_guard(g: &GuardAst) -> Guard {
    Guard { negated: g.negated, pattern: lower_pattern(&g.pattern) }
}

fn lower_steps(steps: &[StepAst]) -> Vec<Step> {
    steps
        .iter()
        .map(|s| match s {
            StepAst::Do { transitional, bearer, intervention, .. } => Step::Do {
                transitional: transitional.text.clone(),
                bearer: bearer.as_ref().map(|b| b.text.clone()),
                intervention: *intervention,
            },
            StepAst::If { cond, then, otherwise, .. } => {
                Step::If { cond: lower_guard(cond), then: lower_steps(then), otherwise: lower_steps(otherwise) }
            }
            StepAst::While { cond, body, .. } => Step::While { cond: lower_guard(cond), body: lower_steps(body) },
            StepAst::Begin { process, participants, .. } => Step::Begin {
                process: process.text.clone(),
                participants: participants.iter().map(|p| p.text.clone()).collect(),
            },
            StepAst::End { process, .. } => Step::End { process: process.text.clone() },
        })
        .collect()
}

fn text(n: &Option<Name>) -> Option<String> {
    n.as_ref().map(|n| n.text.clone())
}

/// Schemas a declaration contributes, each with the span to report it at.
fn lower_decl(decl: &Decl) -> Vec<(Schema, Span)> {
    let span = decl.name().span;
    match decl {
        Decl::Quality(q) => vec![(
            Schema::Quality(QualityOntology {
                name: q.name.text.clone(),
                determinants: q.determinants.iter().map(|d| d.text.clone()).collect(),
            }),
            span,
        )],
        Decl::Object(o) => {
            let mut schema = ObjectSchema { name: o.name.text.clone(), parent: text(&o.parent), ..Default::default() };
            let mut extra = Vec::new();
            for item in &o.items {
                match item {
                    ObjItem::Quality { determinable, ontology, required } => schema.qualities.push(QualitySlot {
                        determinable: determinable.text.clone(),
                        ontology: ontology.text.clone(),
                        required: *required,
                    }),
                    ObjItem::Part { slot, schema: kind, function, linkage } => schema.parts.push(PartSlot {
                        slot: slot.text.clone(),
                        schema: kind.text.clone(),
                        function: function.clone(),
                        linkage: linkage.unwrap_or(Linkage::Composition),
                    }),
                    ObjItem::Function { name, purpose, serves } => {
                        schema.realizables.push(name.text.clone());
                        let mut f =
                            RealizableSchema::new(name.text.clone(), RealizableVariant::Function, o.name.text.clone());
                        f.purpose = purpose.clone();
                        f.serves = text(serves);
                        extra.push((Schema::Realizable(f), name.span));
                    }
                    ObjItem::Role { name } => schema.realizables.push(name.text.clone()),
                    ObjItem::Location { kind } => schema.location = Some(kind.text.clone()),
                }
            }
            let mut out = vec![(Schema::Object(schema), span)];
            out.extend(extra);
            out
        }
        Decl::Aggregate(a) => vec![(
            Schema::Aggregate(AggregateSchema {
                name: a.name.text.clone(),
                members: a
                    .members
                    .iter()
                    .map(|(s, k)| MemberSlot { slot: s.text.clone(), kind: k.text.clone() })
                    .collect(),
                links: a
                    .links
                    .iter()
                    .map(|l| AggregateLink {
                        relation: l.relation.text.clone(),
                        from: l.from.text.clone(),
                        to: l.to.text.clone(),
                    })
                    .collect(),
            }),
            span,
        )],
        Decl::Relation(r) => vec![(
            Schema::Relation(RelationSchema {
                name: r.name.text.clone(),
                subject: r.subject.text.clone(),
                object: r.object.text.clone(),
                relational_quality: r.relational_quality,
            }),
            span,
        )],
        Decl::Transitional(t) => vec![(
            Schema::Transitional(TransitionalSchema {
                name: t.name.text.clone(),
                bearer: text(&t.bearer),
                guards: t.requires.iter().map(lower_guard).collect(),
                deletes: t.deletes.iter().map(lower_pattern).collect(),
                creates: t.creates.iter().map(lower_pattern).collect(),
            }),
            span,
        )],
        Decl::Chain(c) => vec![(
            Schema::Chain(ChainSchema {
                name: c.name.text.clone(),
                kind: c.kind,
                params: c
                    .params
                    .iter()
                    .map(|(p, k)| ChainParam { name: p.text.clone(), kind: k.text.clone() })
                    .collect(),
                body: lower_steps(&c.body),
            }),
            span,
        )],
        Decl::Disposition(d) => {
            let mut r =
                RealizableSchema::new(d.name.text.clone(), RealizableVariant::Disposition, d.bearer.text.clone());
            r.trigger = Some(lower_pattern(&d.trigger));
            r.realization = Some(d.realization.text.clone());
            vec![(Schema::Realizable(r), span)]
        }
        Decl::Process(p) => vec![(
            Schema::Process(ProcessSchema {
                name: p.name.text.clone(),
                participants: p
                    .participants
                    .iter()
                    .map(|(k, r)| Participant { kind: k.text.clone(), role: text(r) })
                    .collect(),
                location: text(&p.location),
            }),
            span,
        )],
        Decl::Role(r) => {
            let mut s = RealizableSchema::new(r.name.text.clone(), RealizableVariant::Role, r.bearer.text.clone());
            s.context = text(&r.context);
            vec![(Schema::Realizable(s), span)]
        }
        Decl::Need(n) => {
            vec![(Schema::Need(Need { name: n.name.text.clone(), description: n.description.clone() }), span)]
        }
        Decl::World(_) | Decl::Claim(_) | Decl::Facet(_) => Vec::new(),
    }
}
