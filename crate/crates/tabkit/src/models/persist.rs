//! Model files: versioned JSON wrapping any fitted classifier. Round-trips
//! are exact — floats serialize in shortest-round-trip form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ClassifierModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    tool_version: String,
    /// Decoded class labels in code order; lets a consumer align labels from
    /// a differently-encoded dataset before scoring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_names: Option<Vec<String>>,
    model: ClassifierModel,
}

pub fn save_model(model: &ClassifierModel, path: impl AsRef<Path>) -> Result<()> {
    save_model_with_names(model, None, path)
}

pub fn save_model_with_names(
    model: &ClassifierModel,
    class_names: Option<&[String]>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        class_names: class_names.map(<[String]>::to_vec),
        model: model.clone(),
    };
    let body = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Model(format!("serialize model: {e}")))?;
    std::fs::write(path, body + "\n").map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ClassifierModel> {
    Ok(load_model_with_names(path)?.0)
}

pub fn load_model_with_names(
    path: impl AsRef<Path>,
) -> Result<(ClassifierModel, Option<Vec<String>>)> {
    let path = path.as_ref();
    let body = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    // version check first so a clear error beats a parse failure
    let probe: serde_json::Value = serde_json::from_str(&body)
        .map_err(|e| Error::ModelFormat(format!("not valid JSON: {e}")))?;
    match probe.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::ModelFormat(format!(
                "format_version {v} unsupported (expected {FORMAT_VERSION})"
            )))
        }
        None => return Err(Error::ModelFormat("missing format_version".into())),
    }
    let file: ModelFile = serde_json::from_str(&body)
        .map_err(|e| Error::ModelFormat(format!("malformed model payload: {e}")))?;
    Ok((file.model, file.class_names))
}
