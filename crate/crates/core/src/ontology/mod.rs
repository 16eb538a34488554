//! The fixed upper taxonomy, schema definitions (Universals) and the
//! registry that compiles them.

mod registry;
mod schema;

pub use registry::{
    infer_bearer, Domain, PredicateOrigin, PredicateSig, Registry, RegistryBuilder, Violation, ViolationCode,
};
pub use schema::*;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Nodes of the upper taxonomy. User kinds attach below exactly one of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UpperKind {
    Entity,
    Continuant,
    Occurrent,
    IndependentContinuant,
    MaterialEntity,
    Object,
    ObjectAggregate,
    DependentContinuant,
    Quality,
    RelationalQuality,
    Realizable,
    Role,
    Disposition,
    Function,
    Process,
    Transitional,
}

impl UpperKind {
    pub const ALL: [UpperKind; 16] = [
        UpperKind::Entity,
        UpperKind::Continuant,
        UpperKind::Occurrent,
        UpperKind::IndependentContinuant,
        UpperKind::MaterialEntity,
        UpperKind::Object,
        UpperKind::ObjectAggregate,
        UpperKind::DependentContinuant,
        UpperKind::Quality,
        UpperKind::RelationalQuality,
        UpperKind::Realizable,
        UpperKind::Role,
        UpperKind::Disposition,
        UpperKind::Function,
        UpperKind::Process,
        UpperKind::Transitional,
    ];

    pub fn parent(self) -> Option<UpperKind> {
        use UpperKind::*;
        match self {
            Entity => None,
            Continuant | Occurrent => Some(Entity),
            IndependentContinuant | DependentContinuant => Some(Continuant),
            MaterialEntity => Some(IndependentContinuant),
            Object | ObjectAggregate => Some(MaterialEntity),
            Quality | Realizable => Some(DependentContinuant),
            RelationalQuality => Some(Quality),
            Role | Disposition | Function => Some(Realizable),
            Process | Transitional => Some(Occurrent),
        }
    }

    pub fn name(self) -> &'static str {
        use UpperKind::*;
        match self {
            Entity => "Entity",
            Continuant => "Continuant",
            Occurrent => "Occurrent",
            IndependentContinuant => "IndependentContinuant",
            MaterialEntity => "MaterialEntity",
            Object => "Object",
            ObjectAggregate => "ObjectAggregate",
            DependentContinuant => "DependentContinuant",
            Quality => "Quality",
            RelationalQuality => "RelationalQuality",
            Realizable => "Realizable",
            Role => "Role",
            Disposition => "Disposition",
            Function => "Function",
            Process => "Process",
            Transitional => "Transitional",
        }
    }

    /// Path from this node up to `Entity`, inclusive of both ends.
    pub fn ancestry(self) -> Vec<UpperKind> {
        let mut path = vec![self];
        let mut cur = self;
        while let Some(p) = cur.parent() {
            path.push(p);
            cur = p;
        }
        path
    }

    pub fn is_a(self, ancestor: UpperKind) -> bool {
        self.ancestry().contains(&ancestor)
    }

    pub fn is_independent_continuant(self) -> bool {
        self.is_a(UpperKind::IndependentContinuant)
    }
}

impl fmt::Display for UpperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UpperKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UpperKind::ALL.iter().copied().find(|k| k.name() == s).ok_or(())
    }
}

/// Names that may never be registered: the upper taxonomy plus the
/// built-in free-text value domain.
pub fn is_reserved_name(name: &str) -> bool {
    name == TEXT_DOMAIN || name.parse::<UpperKind>().is_ok()
}

/// Relation object domain accepting any string literal.
pub const TEXT_DOMAIN: &str = "Text";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("`{0}` is already registered")]
    DuplicateName(String),
    #[error("`{0}` is a reserved upper-taxonomy name")]
    ReservedUpperTaxonomyName(String),
    #[error("unresolved references: {}", render_dangling(.0))]
    DanglingReference(Vec<DanglingRef>),
    #[error("inheritance cycle through {}", .0.join(" -> "))]
    InheritanceCycle(Vec<String>),
}

/// One unresolved name, with the schema that mentions it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DanglingRef {
    pub from: String,
    pub missing: String,
}

fn render_dangling(refs: &[DanglingRef]) -> String {
    refs.iter().map(|r| format!("{} (in {})", r.missing, r.from)).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_upper_node_has_exactly_one_path_to_entity() {
        for k in UpperKind::ALL {
            let path = k.ancestry();
            assert_eq!(*path.last().unwrap(), UpperKind::Entity, "{k}");
            let mut seen = path.clone();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), path.len(), "cycle through {k}");
        }
    }

    #[test]
    fn taxonomy_shape() {
        use UpperKind::*;
        assert!(Object.is_independent_continuant());
        assert!(ObjectAggregate.is_a(MaterialEntity));
        assert!(RelationalQuality.is_a(Quality));
        assert!(Disposition.is_a(DependentContinuant));
        assert!(Transitional.is_a(Occurrent));
        assert!(!Process.is_independent_continuant());
        assert!(!Quality.is_independent_continuant());
    }

    #[test]
    fn reserved_names() {
        assert!(is_reserved_name("Object"));
        assert!(is_reserved_name("Text"));
        assert!(!is_reserved_name("object"));
        assert!(!is_reserved_name("TrafficLight"));
    }
}
