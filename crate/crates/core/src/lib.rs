pub mod discourse;
pub mod fingerprint;
pub mod foundry;
pub mod lang;
pub mod microworld;
pub mod ontology;
pub mod par;
pub mod relations;
pub mod transitions;
