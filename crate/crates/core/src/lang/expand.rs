use thiserror::Error;

use super::printer::quote;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("activity root is empty")]
    EmptyRoot,
    #[error("`{0}` is not a valid identifier")]
    InvalidRoot(String),
}

/// Agent, activity and place derived from one verb stem. Fields are public so
/// irregular forms can be renamed before rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityFamily {
    pub root: String,
    pub role: String,
    pub process: String,
    pub facility: String,
}

/// Relation linking people to the activities they take part in.
pub const PARTICIPATES_IN: &str = "participates_in";
pub const PERSON: &str = "Person";

impl ActivityFamily {
    /// `(predicate, subject, object)` of the three links between the stubs.
    pub fn links(&self) -> [(&'static str, String, String); 3] {
        [
            ("has_role", PERSON.to_string(), self.role.clone()),
            (PARTICIPATES_IN, PERSON.to_string(), self.process.clone()),
            ("located_in", self.process.clone(), self.facility.clone()),
        ]
    }

    /// Source for the three stubs. With `with_common`, also declares `Person`
    /// and the participation relation, which several families can share.
    pub fn to_source(&self, with_common: bool) -> String {
        let mut s = String::new();
        if with_common {
            s.push_str(&format!("object {PERSON} {{ }}\n"));
            s.push_str(&format!("relation {PARTICIPATES_IN}({PERSON}, Process)\n"));
        }
        s.push_str(&format!("role {} on {PERSON}\n", self.role));
        s.push_str(&format!(
            "object {} {{\n    function house_{} {}\n}}\n",
            self.facility,
            self.process,
            quote(&format!("place where {} happens", self.process))
        ));
        s.push_str(&format!(
            "process {} {{\n    participant {PERSON} as {}\n    at {}\n}}\n",
            self.process, self.role, self.facility
        ));
        s
    }
}

pub fn expand_activity_family(root: &str) -> Result<ActivityFamily, ExpandError> {
    if root.is_empty() {
        return Err(ExpandError::EmptyRoot);
    }
    let mut chars = root.chars();
    let first_ok = chars.next().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_');
    if !first_ok || !root.chars().all(super::lexer::is_ident_char) {
        return Err(ExpandError::InvalidRoot(root.to_string()));
    }
    Ok(ActivityFamily {
        root: root.to_string(),
        role: format!("{root}er"),
        process: format!("{root}ing"),
        facility: format!("{root}ery"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::compile_sources;
    use crate::ontology::{RealizableVariant, Schema};

    #[test]
    fn bak_and_brew() {
        let bak = expand_activity_family("bak").unwrap();
        assert_eq!((bak.role.as_str(), bak.process.as_str(), bak.facility.as_str()), ("baker", "baking", "bakery"));
        assert_eq!(bak.links().len(), 3);
        let brew = expand_activity_family("brew").unwrap();
        assert_eq!(
            (brew.role.as_str(), brew.process.as_str(), brew.facility.as_str()),
            ("brewer", "brewing", "brewery")
        );
    }

    #[test]
    fn empty_root() {
        assert_eq!(expand_activity_family(""), Err(ExpandError::EmptyRoot));
    }

    #[test]
    fn expansions_compile_together() {
        let src = expand_activity_family("bak").unwrap().to_source(true)
            + &expand_activity_family("brew").unwrap().to_source(false);
        let c = compile_sources(&[("trades", &src)]).unwrap();
        let role = c.registry.realizable("baker").unwrap();
        assert_eq!(role.variant, RealizableVariant::Role);
        assert!(matches!(c.registry.get("brewing"), Some(Schema::Process(_))));
        assert!(matches!(c.registry.get("bakery"), Some(Schema::Object(_))));
    }

    #[test]
    fn renamed_irregular_form_still_compiles() {
        let mut f = expand_activity_family("cook").unwrap();
        f.facility = "kitchen".into();
        assert!(compile_sources(&[("k", &f.to_source(true))]).is_ok());
    }
}
