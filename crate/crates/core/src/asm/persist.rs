//! Versioned JSON model files.
//!
//! Every real is written with 17 significant digits (`{:.16e}`), which
//! round-trips an `f64` exactly, so saving a loaded model reproduces the file
//! byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::ShapeModel;
use crate::error::{Result, ShapeError};
use crate::landmark::LandmarkShape;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format_version: u32,
    n: usize,
    k: usize,
    mean: Vec<f64>,
    eigenvalues: Vec<f64>,
    modes: Vec<Vec<f64>>,
}

fn push_reals(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{v:.16e}").expect("writing to a String cannot fail");
    }
    out.push(']');
}

impl ShapeModel {
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        writeln!(out, "  \"format_version\": {FORMAT_VERSION},").unwrap();
        writeln!(out, "  \"n\": {},", self.n()).unwrap();
        writeln!(out, "  \"k\": {},", self.k()).unwrap();
        out.push_str("  \"mean\": ");
        push_reals(&mut out, self.mean.coords());
        out.push_str(",\n  \"eigenvalues\": ");
        push_reals(&mut out, &self.eigenvalues);
        out.push_str(",\n  \"modes\": [\n");
        for (j, m) in self.modes.iter().enumerate() {
            out.push_str("    ");
            push_reals(&mut out, m);
            out.push_str(if j + 1 < self.modes.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<ShapeModel> {
        let doc: ModelDoc =
            serde_json::from_str(text).map_err(|e| ShapeError::Format(format!("model file: {e}")))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(ShapeError::Format(format!(
                "unsupported model format_version {} (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        if doc.mean.len() != 2 * doc.n {
            return Err(ShapeError::Format(format!(
                "mean has {} values, header says n = {} ({} expected)",
                doc.mean.len(),
                doc.n,
                2 * doc.n
            )));
        }
        if doc.eigenvalues.len() != doc.k || doc.modes.len() != doc.k {
            return Err(ShapeError::Format(format!(
                "header says k = {}, found {} eigenvalues and {} modes",
                doc.k,
                doc.eigenvalues.len(),
                doc.modes.len()
            )));
        }
        let mean = LandmarkShape::new(doc.mean).map_err(|e| ShapeError::Format(format!("mean: {e}")))?;
        ShapeModel::new(mean, doc.modes, doc.eigenvalues)
            .map_err(|e| ShapeError::Format(format!("model invariants: {e}")))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ShapeModel> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
