//! Registry of ontology modules and the overlap and depth measures over them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprint::Fingerprint;
use crate::lang::{Compiled, ModuleInfo};
use crate::ontology::{Registry, UpperKind};

pub const DEFAULT_FACETS: [&str; 3] = ["physical", "social-structure", "meta-structure"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoundryError {
    #[error("module `{name}` is already registered with different content")]
    ConflictingModule { name: String },
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
    #[error("facet `{0}` is not registered")]
    UnknownFacet(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyModuleRecord {
    pub name: String,
    pub fingerprint: Fingerprint,
    pub terms: BTreeSet<String>,
    pub facet: String,
    /// Declared parent, or upper attachment, of each kind exported here.
    pub parents: BTreeMap<String, String>,
}

impl OntologyModuleRecord {
    pub fn new(
        name: &str,
        fingerprint: Fingerprint,
        facet: &str,
        terms: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        OntologyModuleRecord {
            name: name.to_string(),
            fingerprint,
            terms: terms.into_iter().map(Into::into).collect(),
            facet: facet.to_string(),
            parents: BTreeMap::new(),
        }
    }

    pub fn from_module(info: &ModuleInfo, reg: &Registry) -> Self {
        let mut rec = OntologyModuleRecord::new(&info.name, info.fingerprint, &info.facet, info.terms.iter().cloned());
        for term in &info.terms {
            let Some(schema) = reg.get(term) else { continue };
            let parent = schema
                .declared_parent()
                .map(str::to_string)
                .or_else(|| schema.default_attachment().map(|u| u.name().to_string()));
            if let Some(p) = parent {
                rec.parents.insert(term.clone(), p);
            }
        }
        rec
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Foundry {
    facets: Vec<String>,
    modules: BTreeMap<String, OntologyModuleRecord>,
}

impl Default for Foundry {
    fn default() -> Self {
        Foundry { facets: DEFAULT_FACETS.iter().map(|f| f.to_string()).collect(), modules: BTreeMap::new() }
    }
}

impl Foundry {
    /// Registers every module of a compilation unit. Facets a module declares
    /// are added to the facet list.
    pub fn from_compiled(c: &Compiled) -> Result<Foundry, FoundryError> {
        let mut f = Foundry::default();
        for m in &c.modules {
            f.add_facet(&m.facet);
            f.register_ontology_module(OntologyModuleRecord::from_module(m, &c.registry))?;
        }
        Ok(f)
    }

    pub fn add_facet(&mut self, facet: &str) {
        if !self.facets.iter().any(|f| f == facet) {
            self.facets.push(facet.to_string());
        }
    }

    pub fn facets(&self) -> &[String] {
        &self.facets
    }

    pub fn modules(&self) -> impl Iterator<Item = &OntologyModuleRecord> {
        self.modules.values()
    }

    pub fn module(&self, name: &str) -> Option<&OntologyModuleRecord> {
        self.modules.get(name)
    }

    /// Facets in use by at least one registered module.
    pub fn used_facets(&self) -> BTreeSet<&str> {
        self.modules.values().map(|m| m.facet.as_str()).collect()
    }

    pub fn register_ontology_module(&mut self, record: OntologyModuleRecord) -> Result<&mut Self, FoundryError> {
        if !self.facets.contains(&record.facet) {
            return Err(FoundryError::UnknownFacet(record.facet));
        }
        match self.modules.get(&record.name) {
            Some(old) if old.fingerprint == record.fingerprint => {}
            Some(_) => return Err(FoundryError::ConflictingModule { name: record.name }),
            None => {
                self.modules.insert(record.name.clone(), record);
            }
        }
        Ok(self)
    }

    pub fn orthogonality(&self, a: &str, b: &str) -> Result<f64, FoundryError> {
        let ta = &self.modules.get(a).ok_or_else(|| FoundryError::UnknownModule(a.to_string()))?.terms;
        let tb = &self.modules.get(b).ok_or_else(|| FoundryError::UnknownModule(b.to_string()))?.terms;
        Ok(jaccard_complement(ta, tb))
    }

    /// Distinct facets among the modules exporting the given terms.
    pub fn exhaustivity<S: AsRef<str>>(&self, description: &[S]) -> Result<usize, FoundryError> {
        let mut facets = BTreeSet::new();
        for term in description {
            let term = term.as_ref();
            let mut found = false;
            for m in self.modules.values().filter(|m| m.terms.contains(term)) {
                found = true;
                facets.insert(m.facet.as_str());
            }
            if !found {
                return Err(FoundryError::UnknownTerm(term.to_string()));
            }
        }
        Ok(facets.len())
    }

    /// Edges from a schema to its upper-taxonomy attachment point.
    pub fn specificity(&self, name: &str) -> Result<usize, FoundryError> {
        if name.parse::<UpperKind>().is_ok() {
            return Ok(0);
        }
        let parent_of = |n: &str| self.modules.values().find_map(|m| m.parents.get(n));
        let mut cur = parent_of(name).ok_or_else(|| FoundryError::UnknownTerm(name.to_string()))?;
        let mut depth = 1;
        while cur.parse::<UpperKind>().is_err() {
            cur = parent_of(cur).ok_or_else(|| FoundryError::UnknownTerm(cur.clone()))?;
            depth += 1;
            if depth > self.modules.values().map(|m| m.parents.len()).sum::<usize>() {
                return Err(FoundryError::UnknownTerm(name.to_string()));
            }
        }
        Ok(depth)
    }
}

pub fn jaccard_complement(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    1.0 - a.intersection(b).count() as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(name: &str, facet: &str, terms: &[&str]) -> OntologyModuleRecord {
        OntologyModuleRecord::new(
            name,
            Fingerprint::of_bytes(format!("{name}{terms:?}").as_bytes()),
            facet,
            terms.iter().copied(),
        )
    }

    #[test]
    fn reregistering_identical_content_keeps_one_entry() {
        let mut f = Foundry::default();
        f.register_ontology_module(rec("ceramics-physical", "physical", &["glaze"])).unwrap();
        f.register_ontology_module(rec("ceramics-physical", "physical", &["glaze"])).unwrap();
        assert_eq!(f.modules().count(), 1);
        let err = f.register_ontology_module(rec("ceramics-physical", "physical", &["glaze", "kiln"])).unwrap_err();
        assert_eq!(err, FoundryError::ConflictingModule { name: "ceramics-physical".into() });
        assert_eq!(
            f.register_ontology_module(rec("x", "astral", &[])).unwrap_err(),
            FoundryError::UnknownFacet("astral".into())
        );
        f.add_facet("astral");
        f.register_ontology_module(rec("x", "astral", &[])).unwrap();
    }

    #[test]
    fn orthogonality_by_hand() {
        let mut f = Foundry::default();
        f.register_ontology_module(rec("a", "physical", &["a", "b", "c"])).unwrap();
        f.register_ontology_module(rec("b", "physical", &["b", "c", "d"])).unwrap();
        f.register_ontology_module(rec("z", "physical", &["x", "y"])).unwrap();
        assert_eq!(f.orthogonality("a", "b").unwrap(), 0.5);
        assert_eq!(f.orthogonality("a", "a").unwrap(), 0.0);
        assert_eq!(f.orthogonality("a", "z").unwrap(), 1.0);
        assert_eq!(f.orthogonality("a", "q").unwrap_err(), FoundryError::UnknownModule("q".into()));
    }

    #[test]
    fn empty_description_touches_no_facet() {
        let f = Foundry::default();
        assert_eq!(f.exhaustivity::<&str>(&[]).unwrap(), 0);
        assert_eq!(f.exhaustivity(&["glaze"]).unwrap_err(), FoundryError::UnknownTerm("glaze".into()));
    }

    #[test]
    fn corpus_depths_and_facets() {
        let c = crate::relations::tests::corpus_compiled(&["waterdropper-goryeo.xfo", "village-gangjin.xfo"]);
        let f = Foundry::from_compiled(&c).unwrap();
        assert_eq!(f.specificity("Object").unwrap(), 0);
        assert_eq!(f.specificity("Vessel").unwrap(), 1);
        assert_eq!(f.specificity("CeladonDropper").unwrap(), 3);
        assert_eq!(f.specificity("Teapot").unwrap_err(), FoundryError::UnknownTerm("Teapot".into()));
        assert_eq!(f.exhaustivity(&["glaze", "moisture"]).unwrap(), 1);
        assert_eq!(f.exhaustivity(&["glaze", "moisture", "YangbanCalligrapher"]).unwrap(), 2);
        for m in f.modules() {
            for (child, parent) in &m.parents {
                assert_eq!(f.specificity(child).unwrap(), f.specificity(parent).unwrap() + 1, "{child}");
            }
        }
    }

    fn term_set() -> impl Strategy<Value = BTreeSet<String>> {
        prop::collection::btree_set("[a-f]", 0..6)
    }

    proptest! {
        #[test]
        fn orthogonality_is_symmetric_and_bounded(a in term_set(), b in term_set()) {
            let x = jaccard_complement(&a, &b);
            prop_assert_eq!(x, jaccard_complement(&b, &a));
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert_eq!(jaccard_complement(&a, &a), 0.0);
        }

        #[test]
        fn exhaustivity_grows_with_description(terms in prop::collection::vec(0..6usize, 0..8)) {
            let mut f = Foundry::default();
            for (i, facet) in DEFAULT_FACETS.iter().enumerate() {
                let names = [format!("t{}", 2 * i), format!("t{}", 2 * i + 1)];
                f.register_ontology_module(OntologyModuleRecord::new(facet, Fingerprint::of_bytes(facet.as_bytes()), facet, names)).unwrap();
            }
            let desc: Vec<String> = terms.iter().map(|t| format!("t{t}")).collect();
            let mut prev = 0;
            for n in 0..=desc.len() {
                let e = f.exhaustivity(&desc[..n]).unwrap();
                prop_assert!(e >= prev && e <= f.facets().len());
                prev = e;
            }
        }
    }
}
