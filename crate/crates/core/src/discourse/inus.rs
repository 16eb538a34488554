use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::DiscourseError;
use crate::par::Exec;

/// Conditions are packed into a `u64` mask.
pub const MAX_CONDITIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalField {
    pub outcome: String,
    pub universe: Vec<String>,
    /// Condition sets declared sufficient for the outcome, in declaration order.
    pub sufficient: Vec<BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InusVerdict {
    pub condition: String,
    pub inus: bool,
    pub witness: Option<BTreeSet<String>>,
}

impl CausalField {
    pub fn new(outcome: &str, universe: &[&str], sufficient: &[&[&str]]) -> Result<CausalField, DiscourseError> {
        let field = CausalField {
            outcome: outcome.to_string(),
            universe: universe.iter().map(|c| c.to_string()).collect(),
            sufficient: sufficient.iter().map(|s| s.iter().map(|c| c.to_string()).collect()).collect(),
        };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<(), DiscourseError> {
        if self.universe.len() > MAX_CONDITIONS {
            return Err(DiscourseError::InvalidField(format!("more than {MAX_CONDITIONS} conditions")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.universe.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(DiscourseError::InvalidField(format!("condition `{dup}` listed twice")));
        }
        if self.sufficient.is_empty() {
            return Err(DiscourseError::InvalidField("no sufficient sets".into()));
        }
        for set in &self.sufficient {
            if let Some(c) = set.iter().find(|c| !seen.contains(c.as_str())) {
                return Err(DiscourseError::InvalidField(format!("`{c}` is not in the universe")));
            }
        }
        Ok(())
    }

    fn bit(&self, condition: &str) -> Option<u64> {
        self.universe.iter().position(|c| c == condition).map(|i| 1 << i)
    }

    fn mask(&self, set: &BTreeSet<String>) -> u64 {
        set.iter().filter_map(|c| self.bit(c)).fold(0, |m, b| m | b)
    }
}

/// True when some declared set is contained in `m`, found by walking every
/// submask of `m`.
fn contains_sufficient(declared: &HashSet<u64>, m: u64) -> bool {
    let mut sub = m;
    loop {
        if declared.contains(&sub) {
            return true;
        }
        if sub == 0 {
            return false;
        }
        sub = (sub - 1) & m;
    }
}

struct Masks {
    c: u64,
    declared: HashSet<u64>,
    insufficient: bool,
    unnecessary: bool,
}

impl Masks {
    fn new(field: &CausalField, condition: &str) -> Result<Masks, DiscourseError> {
        let c = field.bit(condition).ok_or_else(|| DiscourseError::UnknownCondition(condition.to_string()))?;
        let all: Vec<u64> = field.sufficient.iter().map(|s| field.mask(s)).collect();
        let declared: HashSet<u64> = all.iter().copied().collect();
        Ok(Masks {
            c,
            insufficient: !contains_sufficient(&declared, c),
            unnecessary: all.iter().any(|&d| d & c == 0),
            declared,
        })
    }

    fn witnesses(&self, s: u64) -> bool {
        self.insufficient
            && self.unnecessary
            && s & self.c != 0
            && self.declared.contains(&s)
            && !contains_sufficient(&self.declared, s & !self.c)
    }
}

/// The first declared set that makes `condition` an INUS condition is
/// returned as the witness.
pub fn check_inus(field: &CausalField, condition: &str) -> Result<InusVerdict, DiscourseError> {
    field.validate()?;
    let m = Masks::new(field, condition)?;
    let witness = field.sufficient.iter().find(|s| m.witnesses(field.mask(s))).cloned();
    Ok(InusVerdict { condition: condition.to_string(), inus: witness.is_some(), witness })
}

/// Whether `set` satisfies all four INUS clauses for `condition` in `field`.
pub fn is_witness(field: &CausalField, condition: &str, set: &BTreeSet<String>) -> Result<bool, DiscourseError> {
    let m = Masks::new(field, condition)?;
    Ok(set.iter().all(|c| field.bit(c).is_some()) && m.witnesses(field.mask(set)))
}

/// Verdicts for every condition of the universe, in universe order.
pub fn check_inus_all(field: &CausalField, exec: Exec) -> Result<Vec<InusVerdict>, DiscourseError> {
    field.validate()?;
    exec.map(&field.universe, |c| check_inus(field, c)).into_iter().collect()
}
