//! Reading input files with diagnostics that name the file and the field.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use coincide_core::io::{GroupSpec, ImageSpec};
use coincide_core::padic::PAdicImage;
use coincide_core::rules::CurveRecord;
use coincide_core::MatGroup;
use serde::de::DeserializeOwned;

/// A malformed or unreadable input file.
#[derive(Debug)]
pub struct InputError {
    pub path: PathBuf,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let Some(field) = &self.field {
            write!(f, ": field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for InputError {}

fn input_error(path: &Path, field: Option<String>, message: impl Into<String>) -> InputError {
    InputError {
        path: path.to_path_buf(),
        field,
        message: message.into(),
    }
}

/// Parses `text` as `T`, reporting the path of the offending field.
pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let field = (field != ".").then_some(field);
        input_error(path, field, e.into_inner().to_string())
    })
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| input_error(path, None, e.to_string()))
}

fn semantic(path: &Path, e: coincide_core::Error) -> InputError {
    input_error(path, None, e.to_string())
}

pub fn group_from_spec(path: &Path, spec: &GroupSpec) -> Result<MatGroup, InputError> {
    let g = spec.to_group().map_err(|e| semantic(path, e))?;
    if let Some(order) = spec.order {
        let actual = g.order().map_err(|e| semantic(path, e))?;
        if actual != order {
            return Err(input_error(
                path,
                Some("order".into()),
                format!("generators give a group of order {actual}, file says {order}"),
            ));
        }
    }
    Ok(g)
}

pub fn ingest_group(path: &Path) -> Result<MatGroup, InputError> {
    let spec: GroupSpec = parse_json(path, &read(path)?)?;
    group_from_spec(path, &spec)
}

pub fn ingest_image(path: &Path) -> Result<PAdicImage, InputError> {
    let spec: ImageSpec = parse_json(path, &read(path)?)?;
    spec.to_image().map_err(|e| semantic(path, e))
}

pub fn ingest_record(path: &Path) -> Result<CurveRecord, InputError> {
    let rec: CurveRecord = parse_json(path, &read(path)?)?;
    rec.validate().map_err(|e| semantic(path, e))?;
    Ok(rec)
}

pub fn ingest_json<T: DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    parse_json(path, &read(path)?)
}
