//! JSON description of matroids.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Matroid;
use crate::error::{Error, Result};
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MatroidSpec {
    Uniform { n: usize, r: usize },
    Partition { blocks: Vec<Vec<usize>>, caps: Vec<usize> },
    Graphic { vertices: usize, edges: Vec<(usize, usize)> },
    Linear { field: u64, matrix: Vec<Vec<i64>> },
    Truncation { k: usize, inner: Box<MatroidSpec> },
    Contract { set: Vec<usize>, inner: Box<MatroidSpec> },
    Delete { set: Vec<usize>, inner: Box<MatroidSpec> },
    Dual { inner: Box<MatroidSpec> },
}

impl MatroidSpec {
    pub fn from_json(text: &str) -> Result<MatroidSpec> {
        let value: Value = from_json_str(text)?;
        MatroidSpec::from_value(&value)
    }

    /// Parses a JSON value, reporting the path of the first offending field.
    pub fn from_value(value: &Value) -> Result<MatroidSpec> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Uniform {
            n: usize,
            r: usize,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Partition {
            blocks: Vec<Vec<usize>>,
            caps: Vec<usize>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Graphic {
            vertices: usize,
            edges: Vec<(usize, usize)>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Linear {
            field: u64,
            matrix: Vec<Vec<i64>>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Truncation {
            k: usize,
            inner: Value,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Minor {
            set: Vec<usize>,
            inner: Value,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Dual {
            inner: Value,
        }

        let (tag, body) = split_tag(value)?;
        let inner = |v: &Value| MatroidSpec::from_value(v).map(Box::new).map_err(|e| e.within("inner"));
        Ok(match tag {
            "uniform" => {
                let u: Uniform = from_json_value(body)?;
                MatroidSpec::Uniform { n: u.n, r: u.r }
            }
            "partition" => {
                let p: Partition = from_json_value(body)?;
                MatroidSpec::Partition { blocks: p.blocks, caps: p.caps }
            }
            "graphic" => {
                let g: Graphic = from_json_value(body)?;
                MatroidSpec::Graphic { vertices: g.vertices, edges: g.edges }
            }
            "linear" => {
                let l: Linear = from_json_value(body)?;
                MatroidSpec::Linear { field: l.field, matrix: l.matrix }
            }
            "truncation" => {
                let t: Truncation = from_json_value(body)?;
                MatroidSpec::Truncation { k: t.k, inner: inner(&t.inner)? }
            }
            "contract" | "delete" => {
                let m: Minor = from_json_value(body)?;
                let inner = inner(&m.inner)?;
                if tag == "contract" {
                    MatroidSpec::Contract { set: m.set, inner }
                } else {
                    MatroidSpec::Delete { set: m.set, inner }
                }
            }
            "dual" => {
                let d: Dual = from_json_value(body)?;
                MatroidSpec::Dual { inner: inner(&d.inner)? }
            }
            other => return Err(Error::input_at("type", format!("unknown matroid type `{other}`"))),
        })
    }

    pub fn build(&self) -> Result<Matroid> {
        match self {
            MatroidSpec::Uniform { n, r } => Matroid::uniform(*n, *r),
            MatroidSpec::Partition { blocks, caps } => Matroid::partition(blocks.clone(), caps.clone()),
            MatroidSpec::Graphic { vertices, edges } => Matroid::graphic(*vertices, edges.clone()),
            MatroidSpec::Linear { field, matrix } => Matroid::linear(*field, matrix),
            MatroidSpec::Truncation { k, inner } => inner.build().map_err(|e| e.within("inner"))?.truncate(*k),
            MatroidSpec::Contract { set, inner } => {
                let m = inner.build().map_err(|e| e.within("inner"))?;
                m.contract(&subset_field(set, m.n())?).map_err(|e| e.within("set"))
            }
            MatroidSpec::Delete { set, inner } => {
                let m = inner.build().map_err(|e| e.within("inner"))?;
                m.delete(&subset_field(set, m.n())?)
            }
            MatroidSpec::Dual { inner } => Ok(inner.build().map_err(|e| e.within("inner"))?.dual()),
        }
    }
}

fn subset_field(set: &[usize], n: usize) -> Result<Subset> {
    let s = Subset::new(set.to_vec()).map_err(|e| e.within("set"))?;
    s.check_range(n).map_err(|e| e.within("set"))?;
    Ok(s)
}

pub(crate) fn path_error(e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = e.path().to_string();
    let path = if path == "." { String::new() } else { path };
    Error::input_at(path, e.into_inner().to_string())
}

pub(crate) fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(path_error)
}

pub(crate) fn from_json_value<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(path_error)
}

/// Separates the `"type"` tag of a JSON object from its remaining fields.
pub(crate) fn split_tag(value: &Value) -> Result<(&str, Value)> {
    let obj = value.as_object().ok_or_else(|| Error::input("expected a JSON object"))?;
    let tag = obj
        .get("type")
        .ok_or_else(|| Error::input_at("type", "missing field `type`"))?
        .as_str()
        .ok_or_else(|| Error::input_at("type", "`type` must be a string"))?;
    let mut body = obj.clone();
    body.remove("type");
    Ok((tag, Value::Object(body)))
}

/// Parses a JSON matroid description and builds the oracle.
pub fn parse_matroid(text: &str) -> Result<Matroid> {
    MatroidSpec::from_json(text)?.build()
}
