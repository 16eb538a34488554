use std::fmt;

use serde::{Deserialize, Serialize};

use super::UpperKind;

/// A compiled Universal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schema {
    Object(ObjectSchema),
    Aggregate(AggregateSchema),
    Quality(QualityOntology),
    Realizable(RealizableSchema),
    Need(Need),
    Relation(RelationSchema),
    Process(ProcessSchema),
    Transitional(TransitionalSchema),
    Chain(ChainSchema),
}

impl Schema {
    pub fn name(&self) -> &str {
        match self {
            Schema::Object(s) => &s.name,
            Schema::Aggregate(s) => &s.name,
            Schema::Quality(s) => &s.name,
            Schema::Realizable(s) => &s.name,
            Schema::Need(s) => &s.name,
            Schema::Relation(s) => &s.name,
            Schema::Process(s) => &s.name,
            Schema::Transitional(s) => &s.name,
            Schema::Chain(s) => &s.name,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Schema::Object(_) => "object",
            Schema::Aggregate(_) => "aggregate",
            Schema::Quality(_) => "quality",
            Schema::Realizable(r) => match r.variant {
                RealizableVariant::Role => "role",
                RealizableVariant::Disposition => "disposition",
                RealizableVariant::Function => "function",
            },
            Schema::Need(_) => "need",
            Schema::Relation(_) => "relation",
            Schema::Process(_) => "process",
            Schema::Transitional(_) => "transitional",
            Schema::Chain(_) => "chain",
        }
    }

    /// Declared parent name, which is either another schema or an upper node.
    pub fn declared_parent(&self) -> Option<&str> {
        match self {
            Schema::Object(s) => s.parent.as_deref(),
            _ => None,
        }
    }

    /// The upper node a parentless schema of this sort hangs from.
    pub fn default_attachment(&self) -> Option<UpperKind> {
        Some(match self {
            Schema::Object(_) => UpperKind::Object,
            Schema::Aggregate(_) => UpperKind::ObjectAggregate,
            Schema::Quality(_) => UpperKind::Quality,
            Schema::Realizable(r) => match r.variant {
                RealizableVariant::Role => UpperKind::Role,
                RealizableVariant::Disposition => UpperKind::Disposition,
                RealizableVariant::Function => UpperKind::Function,
            },
            Schema::Relation(r) if r.relational_quality => UpperKind::RelationalQuality,
            Schema::Process(_) | Schema::Chain(_) => UpperKind::Process,
            Schema::Transitional(_) => UpperKind::Transitional,
            Schema::Need(_) | Schema::Relation(_) => return None,
        })
    }
}

/// Structured schema of a Thick Object.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSchema {
    pub name: String,
    pub parent: Option<String>,
    pub qualities: Vec<QualitySlot>,
    pub parts: Vec<PartSlot>,
    pub realizables: Vec<String>,
    pub location: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualitySlot {
    pub determinable: String,
    pub ontology: String,
    pub required: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Linkage {
    /// Parts are destroyed with the whole.
    Composition,
    /// Parts outlive the whole; only the link is retracted.
    Containment,
}

impl Linkage {
    /// Built-in predicate that records this kind of part link.
    pub fn predicate(self) -> &'static str {
        match self {
            Linkage::Composition => PART_OF,
            Linkage::Containment => CONTAINED_IN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartSlot {
    pub slot: String,
    pub schema: String,
    pub function: String,
    pub linkage: Linkage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateSchema {
    pub name: String,
    pub members: Vec<MemberSlot>,
    pub links: Vec<AggregateLink>,
}

impl AggregateSchema {
    pub fn member(&self, slot: &str) -> Option<&MemberSlot> {
        self.members.iter().find(|m| m.slot == slot)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberSlot {
    pub slot: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateLink {
    pub relation: String,
    pub from: String,
    pub to: String,
}

/// Closed, ordered set of determinants for one determinable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityOntology {
    pub name: String,
    pub determinants: Vec<String>,
}

impl QualityOntology {
    pub fn contains(&self, value: &str) -> bool {
        self.determinants.iter().any(|d| d == value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RealizableVariant {
    Role,
    Disposition,
    Function,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizableSchema {
    pub name: String,
    pub variant: RealizableVariant,
    pub bearer: String,
    /// Aggregate a Role is played in.
    pub context: Option<String>,
    pub trigger: Option<Pattern>,
    pub realization: Option<String>,
    pub purpose: Option<String>,
    pub serves: Option<String>,
}

impl RealizableSchema {
    pub fn new(name: impl Into<String>, variant: RealizableVariant, bearer: impl Into<String>) -> Self {
        RealizableSchema {
            name: name.into(),
            variant,
            bearer: bearer.into(),
            context: None,
            trigger: None,
            realization: None,
            purpose: None,
            serves: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Need {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSchema {
    pub name: String,
    pub subject: String,
    pub object: String,
    pub relational_quality: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessSchema {
    pub name: String,
    pub participants: Vec<Participant>,
    pub location: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub kind: String,
    pub role: Option<String>,
}

/// Guarded atomic edit of relationships, borne by an Independent Continuant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionalSchema {
    pub name: String,
    pub bearer: Option<String>,
    pub guards: Vec<Guard>,
    pub deletes: Vec<Pattern>,
    pub creates: Vec<Pattern>,
}

/// Variable the bearer instance is bound to inside a transitional or trigger.
pub const SELF_VAR: &str = "self";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guard {
    pub negated: bool,
    pub pattern: Pattern,
}

impl Guard {
    pub fn positive(pattern: Pattern) -> Self {
        Guard { negated: false, pattern }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not {}", self.pattern)
        } else {
            write!(f, "{}", self.pattern)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    pub predicate: String,
    pub subject: Term,
    pub object: Term,
}

impl Pattern {
    pub fn new(predicate: impl Into<String>, subject: Term, object: Term) -> Self {
        Pattern { predicate: predicate.into(), subject, object }
    }

    pub fn terms(&self) -> [&Term; 2] {
        [&self.subject, &self.object]
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.terms().into_iter().filter_map(Term::var)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.predicate, self.subject, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    /// Bare identifier: a determinant, schema name or instance name.
    Const(String),
    /// Quoted literal.
    Text(String),
}

impl Term {
    pub fn var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn var_self() -> Term {
        Term::Var(SELF_VAR.to_string())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => f.write_str(c),
            Term::Text(t) => write!(f, "{t:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChainKind {
    Sequence,
    Mechanism,
    Procedure,
    Workflow,
}

impl ChainKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ChainKind::Sequence => "sequence",
            ChainKind::Mechanism => "mechanism",
            ChainKind::Procedure => "procedure",
            ChainKind::Workflow => "workflow",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "sequence" => ChainKind::Sequence,
            "mechanism" => ChainKind::Mechanism,
            "procedure" => ChainKind::Procedure,
            "workflow" => ChainKind::Workflow,
            _ => return None,
        })
    }

    pub fn allows_flow_control(self) -> bool {
        self != ChainKind::Sequence
    }

    pub fn allows_intervention(self) -> bool {
        matches!(self, ChainKind::Procedure | ChainKind::Workflow)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSchema {
    pub name: String,
    pub kind: ChainKind,
    pub params: Vec<ChainParam>,
    pub body: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainParam {
    pub name: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Do {
        transitional: String,
        /// Chain parameter naming the bearer; inferred when there is one candidate.
        bearer: Option<String>,
        intervention: bool,
    },
    If {
        cond: Guard,
        then: Vec<Step>,
        otherwise: Vec<Step>,
    },
    While {
        cond: Guard,
        body: Vec<Step>,
    },
    Begin {
        process: String,
        participants: Vec<String>,
    },
    End {
        process: String,
    },
}

// Built-in predicates. Their signatures are fixed by the registry.
pub const PART_OF: &str = "part_of";
pub const CONTAINED_IN: &str = "contained_in";
pub const MEMBER_OF: &str = "member_of";
pub const LOCATED_IN: &str = "located_in";
pub const HAS_ROLE: &str = "has_role";

pub const BUILTIN_PREDICATES: [&str; 5] = [PART_OF, CONTAINED_IN, MEMBER_OF, LOCATED_IN, HAS_ROLE];
