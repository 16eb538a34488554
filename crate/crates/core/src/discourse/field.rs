use super::{CausalField, DiscourseError};

/// Reads a causal field from its line format:
///
/// ```text
/// # comment
/// outcome fire
/// conditions short_circuit flammable_material arson
/// sufficient short_circuit flammable_material
/// sufficient arson
/// ```
pub fn parse_field(text: &str) -> Result<CausalField, DiscourseError> {
    let mut outcome = None;
    let mut universe: Option<Vec<String>> = None;
    let mut sufficient = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let err = |message: String| DiscourseError::FieldSyntax { line: i + 1, message };
        let mut words = line.split_whitespace();
        let Some(head) = words.next() else { continue };
        let rest: Vec<String> = words.map(str::to_string).collect();
        match head {
            "outcome" => {
                if outcome.is_some() {
                    return Err(err("second `outcome` line".into()));
                }
                let [name] = rest.as_slice() else {
                    return Err(err("`outcome` takes exactly one name".into()));
                };
                outcome = Some(name.clone());
            }
            "conditions" => {
                if universe.is_some() {
                    return Err(err("second `conditions` line".into()));
                }
                universe = Some(rest);
            }
            "sufficient" => {
                if rest.is_empty() {
                    return Err(err("`sufficient` needs at least one condition".into()));
                }
                sufficient.push(rest.into_iter().collect());
            }
            other => return Err(err(format!("unexpected `{other}`"))),
        }
    }
    let field = CausalField {
        outcome: outcome.ok_or_else(|| DiscourseError::InvalidField("missing `outcome` line".into()))?,
        universe: universe.ok_or_else(|| DiscourseError::InvalidField("missing `conditions` line".into()))?,
        sufficient,
    };
    field.validate()?;
    Ok(field)
}
