//! Syntax tree for `.xfo` modules. Every node carries the span of the
//! source it came from; [`ClearSpans`] zeroes them for structural comparison.

use super::diagnostic::Span;
use crate::fingerprint::Fingerprint;
use crate::ontology::{ChainKind, Linkage, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceModule {
    pub name: String,
    pub text: String,
    pub imports: Vec<Name>,
    pub decls: Vec<Decl>,
}

impl SourceModule {
    /// Content fingerprint of the source text.
    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::of_bytes(self.text.as_bytes())
    }
}

/// Possibly module-qualified identifier: `Kiln` or `pottery.Kiln`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Name {
    pub module: Option<String>,
    pub text: String,
    pub span: Span,
}

impl Name {
    pub fn new(text: impl Into<String>, span: Span) -> Self {
        Name { module: None, text: text.into(), span }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermAst {
    pub term: Term,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternAst {
    pub predicate: Name,
    pub subject: TermAst,
    pub object: TermAst,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardAst {
    pub negated: bool,
    pub pattern: PatternAst,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Quality(QualityDecl),
    Object(ObjectDecl),
    Aggregate(AggregateDecl),
    Relation(RelationDecl),
    Transitional(TransitionalDecl),
    Chain(ChainDecl),
    Disposition(DispositionDecl),
    World(WorldDecl),
    Claim(ClaimDecl),
    Process(ProcessDecl),
    Role(RoleDecl),
    Need(NeedDecl),
    Facet(FacetDecl),
}

impl Decl {
    pub fn name(&self) -> &Name {
        match self {
            Decl::Quality(d) => &d.name,
            Decl::Object(d) => &d.name,
            Decl::Aggregate(d) => &d.name,
            Decl::Relation(d) => &d.name,
            Decl::Transitional(d) => &d.name,
            Decl::Chain(d) => &d.name,
            Decl::Disposition(d) => &d.name,
            Decl::World(d) => &d.name,
            Decl::Claim(d) => &d.name,
            Decl::Process(d) => &d.name,
            Decl::Role(d) => &d.name,
            Decl::Need(d) => &d.name,
            Decl::Facet(d) => &d.name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Decl::Quality(d) => d.span,
            Decl::Object(d) => d.span,
            Decl::Aggregate(d) => d.span,
            Decl::Relation(d) => d.span,
            Decl::Transitional(d) => d.span,
            Decl::Chain(d) => d.span,
            Decl::Disposition(d) => d.span,
            Decl::World(d) => d.span,
            Decl::Claim(d) => d.span,
            Decl::Process(d) => d.span,
            Decl::Role(d) => d.span,
            Decl::Need(d) => d.span,
            Decl::Facet(d) => d.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualityDecl {
    pub name: Name,
    pub determinants: Vec<Name>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectDecl {
    pub name: Name,
    pub parent: Option<Name>,
    pub items: Vec<ObjItem>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjItem {
    Quality { determinable: Name, ontology: Name, required: bool },
    Part { slot: Name, schema: Name, function: String, linkage: Option<Linkage> },
    Function { name: Name, purpose: Option<String>, serves: Option<Name> },
    Role { name: Name },
    Location { kind: Name },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateDecl {
    pub name: Name,
    pub members: Vec<(Name, Name)>,
    pub links: Vec<LinkAst>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkAst {
    pub relation: Name,
    pub from: Name,
    pub to: Name,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDecl {
    pub name: Name,
    pub subject: Name,
    pub object: Name,
    pub relational_quality: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionalDecl {
    pub name: Name,
    pub bearer: Option<Name>,
    pub requires: Vec<GuardAst>,
    pub deletes: Vec<PatternAst>,
    pub creates: Vec<PatternAst>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDecl {
    pub kind: ChainKind,
    pub name: Name,
    pub params: Vec<(Name, Name)>,
    pub body: Vec<StepAst>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepAst {
    Do { transitional: Name, bearer: Option<Name>, intervention: bool, span: Span },
    If { cond: GuardAst, then: Vec<StepAst>, otherwise: Vec<StepAst>, span: Span },
    While { cond: GuardAst, body: Vec<StepAst>, span: Span },
    Begin { process: Name, participants: Vec<Name>, span: Span },
    End { process: Name, span: Span },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispositionDecl {
    pub name: Name,
    pub bearer: Name,
    pub trigger: PatternAst,
    pub realization: Name,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldDecl {
    pub name: Name,
    pub items: Vec<WorldItem>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorldItem {
    Spawn { name: Name, kind: Name, bindings: Vec<(Name, TermAst)>, span: Span },
    Assert(PatternAst),
    Rule(RuleAst),
}

/// Interaction rule: a method of the generic function `name`, dispatched on
/// the kinds of its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleAst {
    pub name: Name,
    pub params: Vec<(Name, Name)>,
    pub when: Vec<GuardAst>,
    pub transitional: Name,
    pub bearer: Name,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimDecl {
    pub name: Name,
    pub statement: String,
    pub evidence: Vec<EvidenceAst>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArtifactAst {
    Instance(Name),
    Document(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceAst {
    pub artifact: ArtifactAst,
    pub note: String,
    pub validated: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessDecl {
    pub name: Name,
    pub participants: Vec<(Name, Option<Name>)>,
    pub location: Option<Name>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleDecl {
    pub name: Name,
    pub bearer: Name,
    pub context: Option<Name>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeedDecl {
    pub name: Name,
    pub description: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetDecl {
    pub name: Name,
    pub span: Span,
}

/// Zeroes every span so two trees can be compared structurally.
pub trait ClearSpans {
    fn clear_spans(&mut self);
}

impl ClearSpans for Span {
    fn clear_spans(&mut self) {
        *self = Span::default();
    }
}

impl ClearSpans for Name {
    fn clear_spans(&mut self) {
        self.span.clear_spans();
    }
}

impl ClearSpans for TermAst {
    fn clear_spans(&mut self) {
        self.span.clear_spans();
    }
}

impl ClearSpans for PatternAst {
    fn clear_spans(&mut self) {
        self.predicate.clear_spans();
        self.subject.clear_spans();
        self.object.clear_spans();
        self.span.clear_spans();
    }
}

impl ClearSpans for GuardAst {
    fn clear_spans(&mut self) {
        self.pattern.clear_spans();
    }
}

impl<T: ClearSpans> ClearSpans for Vec<T> {
    fn clear_spans(&mut self) {
        self.iter_mut().for_each(ClearSpans::clear_spans);
    }
}

impl<T: ClearSpans> ClearSpans for Option<T> {
    fn clear_spans(&mut self) {
        if let Some(t) = self {
            t.clear_spans();
        }
    }
}

impl<A: ClearSpans, B: ClearSpans> ClearSpans for (A, B) {
    fn clear_spans(&mut self) {
        self.0.clear_spans();
        self.1.clear_spans();
    }
}

impl ClearSpans for StepAst {
    fn clear_spans(&mut self) {
        match self {
            StepAst::Do { transitional, bearer, span, .. } => {
                transitional.clear_spans();
                bearer.clear_spans();
                span.clear_spans();
            }
            StepAst::If { cond, then, otherwise, span } => {
                cond.clear_spans();
                then.clear_spans();
                otherwise.clear_spans();
                span.clear_spans();
            }
            StepAst::While { cond, body, span } => {
                cond.clear_spans();
                body.clear_spans();
                span.clear_spans();
            }
            StepAst::Begin { process, participants, span } => {
                process.clear_spans();
                participants.clear_spans();
                span.clear_spans();
            }
            StepAst::End { process, span } => {
                process.clear_spans();
                span.clear_spans();
            }
        }
    }
}

impl ClearSpans for ObjItem {
    fn clear_spans(&mut self) {
        match self {
            ObjItem::Quality { determinable, ontology, .. } => {
                determinable.clear_spans();
                ontology.clear_spans();
            }
            ObjItem::Part { slot, schema, .. } => {
                slot.clear_spans();
                schema.clear_spans();
            }
            ObjItem::Function { name, serves, .. } => {
                name.clear_spans();
                serves.clear_spans();
            }
            ObjItem::Role { name } => name.clear_spans(),
            ObjItem::Location { kind } => kind.clear_spans(),
        }
    }
}

impl ClearSpans for WorldItem {
    fn clear_spans(&mut self) {
        match self {
            WorldItem::Spawn { name, kind, bindings, span } => {
                name.clear_spans();
                kind.clear_spans();
                bindings.clear_spans();
                span.clear_spans();
            }
            WorldItem::Assert(p) => p.clear_spans(),
            WorldItem::Rule(r) => {
                r.name.clear_spans();
                r.params.clear_spans();
                r.when.clear_spans();
                r.transitional.clear_spans();
                r.bearer.clear_spans();
                r.span.clear_spans();
            }
        }
    }
}

impl ClearSpans for EvidenceAst {
    fn clear_spans(&mut self) {
        if let ArtifactAst::Instance(n) = &mut self.artifact {
            n.clear_spans();
        }
        self.span.clear_spans();
    }
}

impl ClearSpans for LinkAst {
    fn clear_spans(&mut self) {
        self.relation.clear_spans();
        self.from.clear_spans();
        self.to.clear_spans();
    }
}

impl ClearSpans for Decl {
    fn clear_spans(&mut self) {
        match self {
            Decl::Quality(d) => {
                d.name.clear_spans();
                d.determinants.clear_spans();
                d.span.clear_spans();
            }
            Decl::Object(d) => {
                d.name.clear_spans();
                d.parent.clear_spans();
                d.items.clear_spans();
                d.span.clear_spans();
            }
            Decl::Aggregate(d) => {
                d.name.clear_spans();
                d.members.clear_spans();
                d.links.clear_spans();
                d.span.clear_spans();
            }
            Decl::Relation(d) => {
                d.name.clear_spans();
                d.subject.clear_spans();
                d.object.clear_spans();
                d.span.clear_spans();
            }
            Decl::Transitional(d) => {
                d.name.clear_spans();
                d.bearer.clear_spans();
                d.requires.clear_spans();
                d.deletes.clear_spans();
                d.creates.clear_spans();
                d.span.clear_spans();
            }
            Decl::Chain(d) => {
                d.name.clear_spans();
                d.params.clear_spans();
                d.body.clear_spans();
                d.span.clear_spans();
            }
            Decl::Disposition(d) => {
                d.name.clear_spans();
                d.bearer.clear_spans();
                d.trigger.clear_spans();
                d.realization.clear_spans();
                d.span.clear_spans();
            }
            Decl::World(d) => {
                d.name.clear_spans();
                d.items.clear_spans();
                d.span.clear_spans();
            }
            Decl::Claim(d) => {
                d.name.clear_spans();
                d.evidence.clear_spans();
                d.span.clear_spans();
            }
            Decl::Process(d) => {
                d.name.clear_spans();
                d.participants.clear_spans();
                d.location.clear_spans();
                d.span.clear_spans();
            }
            Decl::Role(d) => {
                d.name.clear_spans();
                d.bearer.clear_spans();
                d.context.clear_spans();
                d.span.clear_spans();
            }
            Decl::Need(d) => {
                d.name.clear_spans();
                d.span.clear_spans();
            }
            Decl::Facet(d) => {
                d.name.clear_spans();
                d.span.clear_spans();
            }
        }
    }
}

impl ClearSpans for SourceModule {
    fn clear_spans(&mut self) {
        self.imports.clear_spans();
        self.decls.clear_spans();
    }
}
