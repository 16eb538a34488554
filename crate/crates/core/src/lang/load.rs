use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::ast::SourceModule;
use super::diagnostic::Diagnostic;
use super::parser::parse_module;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Module name of a source file: its stem.
pub fn module_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Reads and parses `paths`, then any imported module found as `<name>.xfo`
/// next to an already loaded file. Missing imports are left for `compile` to
/// report.
pub fn load_files(paths: &[PathBuf]) -> Result<(Vec<SourceModule>, Vec<Diagnostic>), LoadError> {
    let mut modules = Vec::new();
    let mut diags = Vec::new();
    let mut queue: VecDeque<PathBuf> = paths.iter().cloned().collect();
    let mut loaded = BTreeSet::new();
    while let Some(path) = queue.pop_front() {
        let name = module_name(&path);
        let text = fs::read_to_string(&path).map_err(|source| LoadError::Io { path: path.clone(), source })?;
        let (module, d) = parse_module(&name, &text);
        diags.extend(d);
        loaded.insert(name);
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for import in &module.imports {
            let candidate = dir.join(format!("{}.xfo", import.text));
            if !loaded.contains(&import.text) && !queue.contains(&candidate) && candidate.is_file() {
                queue.push_back(candidate);
            }
        }
        modules.push(module);
    }
    Ok((modules, diags))
}
