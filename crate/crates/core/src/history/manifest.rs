use serde_json::Value;

use super::{DependencySpec, HistoryError};

/// Production dependencies declared in a `package.json` document.
///
/// Only the `dependencies` map is read; `devDependencies` (and the other
/// optional maps) are ignored. Entries come back sorted by package name.
pub fn parse_manifest(bytes: &[u8]) -> Result<Vec<DependencySpec>, HistoryError> {
    let doc: Value = serde_json::from_slice(bytes)
        .map_err(|e| HistoryError::ManifestParse(format!("not JSON: {e}")))?;
    let root = doc
        .as_object()
        .ok_or_else(|| HistoryError::ManifestParse("manifest is not a JSON object".into()))?;
    let deps = match root.get("dependencies") {
        None | Some(Value::Null) => return Ok(Vec::new()),
        Some(Value::Object(map)) => map,
        Some(_) => {
            return Err(HistoryError::ManifestParse(
                "\"dependencies\" is not an object".into(),
            ))
        }
    };
    let mut specs = deps
        .iter()
        .map(|(name, constraint)| match constraint {
            Value::String(text) => Ok(DependencySpec::new(name.clone(), text.clone())),
            other => Err(HistoryError::ManifestParse(format!(
                "constraint for {name:?} is not a string: {other}"
            ))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    specs.sort_by(|a, b| a.package.cmp(&b.package));
    Ok(specs)
}
