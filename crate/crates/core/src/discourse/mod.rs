//! Claims backed by evidence, and INUS analysis over declared causal fields.

mod field;
mod inus;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{ArtifactRef, ClaimDef};
use crate::relations::{InstanceId, Store};

pub use field::parse_field;
pub use inus::{check_inus, check_inus_all, is_witness, CausalField, InusVerdict, MAX_CONDITIONS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscourseError {
    #[error("unknown claim `{0}`")]
    UnknownClaim(String),
    #[error("claim `{0}` already exists")]
    DuplicateClaim(String),
    #[error("evidence refers to `{0}`, which never existed")]
    DanglingEvidenceRef(String),
    #[error("`{0}` is not in the condition universe")]
    UnknownCondition(String),
    #[error("invalid causal field: {0}")]
    InvalidField(String),
    #[error("line {line}: {message}")]
    FieldSyntax { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Artifact {
    Instance(InstanceId),
    Document(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub artifact: Artifact,
    /// How the artifact bears on the claim, kept verbatim.
    pub note: String,
    pub validated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub statement: String,
    pub evidence: Vec<Evidence>,
}

impl Claim {
    pub fn new(id: &str, statement: &str) -> Self {
        Claim { id: id.to_string(), statement: statement.to_string(), evidence: Vec::new() }
    }

    pub fn supported(&self) -> bool {
        self.evidence.iter().any(|e| e.validated)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimLedger {
    claims: Vec<Claim>,
}

impl ClaimLedger {
    /// Builds a ledger from compiled claim declarations, resolving instance
    /// names against `store`.
    pub fn from_defs(defs: &[ClaimDef], store: &Store) -> Result<ClaimLedger, DiscourseError> {
        let mut ledger = ClaimLedger::default();
        for def in defs {
            ledger.add_claim(Claim::new(&def.name, &def.statement))?;
            for ev in &def.evidence {
                let artifact = match &ev.artifact {
                    ArtifactRef::Instance(name) => Artifact::Instance(
                        store.id_of(name).ok_or_else(|| DiscourseError::DanglingEvidenceRef(name.clone()))?,
                    ),
                    ArtifactRef::Document(d) => Artifact::Document(d.clone()),
                };
                let evidence = Evidence { artifact, note: ev.note.clone(), validated: ev.validated };
                ledger.attach_evidence(store, &def.name, evidence)?;
            }
        }
        Ok(ledger)
    }

    pub fn add_claim(&mut self, claim: Claim) -> Result<&mut Self, DiscourseError> {
        if self.claim(&claim.id).is_some() {
            return Err(DiscourseError::DuplicateClaim(claim.id));
        }
        self.claims.push(claim);
        Ok(self)
    }

    /// Destroyed instances are fine; ids the store never issued are not.
    pub fn attach_evidence(
        &mut self,
        store: &Store,
        claim: &str,
        evidence: Evidence,
    ) -> Result<&mut Self, DiscourseError> {
        if let Artifact::Instance(id) = &evidence.artifact {
            if store.instance(*id).is_none() {
                return Err(DiscourseError::DanglingEvidenceRef(id.to_string()));
            }
        }
        let c = self
            .claims
            .iter_mut()
            .find(|c| c.id == claim)
            .ok_or_else(|| DiscourseError::UnknownClaim(claim.to_string()))?;
        c.evidence.push(evidence);
        Ok(self)
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }

    pub fn claims(&self) -> &[Claim] {
        &self.claims
    }

    pub fn is_supported(&self, id: &str) -> Result<bool, DiscourseError> {
        self.claim(id).map(Claim::supported).ok_or_else(|| DiscourseError::UnknownClaim(id.to_string()))
    }
}

#[cfg(test)]
mod tests;
