use thiserror::Error;

use super::Document;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("JSON error at {path}: {message}")]
    Schema { path: String, message: String },
}

/// Serialize with the field layout of `schemas/document.v1.json`.
pub fn to_json(doc: &Document) -> String {
    serde_json::to_string(doc).expect("document serialization cannot fail")
}

/// Parse and validate a document. Errors carry the JSON path of the offending value.
pub fn from_json(input: &str) -> Result<Document, JsonError> {
    let de = &mut serde_json::Deserializer::from_str(input);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        JsonError::Schema {
            path: if path.is_empty() {
                "$".to_string()
            } else {
                path
            },
            message: e.into_inner().to_string(),
        }
    })?;
    doc.validate().map_err(|e| JsonError::Schema {
        path: e.path,
        message: e.message,
    })?;
    Ok(doc)
}
