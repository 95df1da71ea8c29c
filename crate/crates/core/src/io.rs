//! JSON interchange for vector-field systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::PolyVectorField;
use crate::polyalg::{parse_polynomial, parse_rational, DilationWeights, PolyError};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSystemFile {
    pub n: usize,
    pub weights: Vec<String>,
    pub fields: Vec<Vec<String>>,
}

/// A parsed system `X_1..X_m` on `R^n` with its dilation weights.
#[derive(Clone, Debug)]
pub struct FieldSystem {
    pub weights: DilationWeights,
    pub fields: Vec<PolyVectorField>,
}

impl FieldSystem {
    /// Parses fields given as component strings.
    pub fn from_strings(weights: &[&str], fields: &[&[&str]]) -> Result<Self> {
        let file = FieldSystemFile {
            n: weights.len(),
            weights: weights.iter().map(|s| s.to_string()).collect(),
            fields: fields
                .iter()
                .map(|f| f.iter().map(|s| s.to_string()).collect())
                .collect(),
        };
        Self::from_file(&file)
    }

    pub fn from_file(file: &FieldSystemFile) -> Result<Self> {
        if file.weights.len() != file.n {
            return Err(Error::InvalidInput(format!(
                "n = {} but {} weights given",
                file.n,
                file.weights.len()
            )));
        }
        let sigma = file
            .weights
            .iter()
            .enumerate()
            .map(|(i, s)| {
                parse_rational(s).map_err(|e| {
                    Error::InvalidInput(format!("weights[{i}]: {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let weights = DilationWeights::new(sigma)?;
        if file.fields.is_empty() {
            return Err(Error::InvalidInput("no fields given".into()));
        }
        let fields = file
            .fields
            .iter()
            .enumerate()
            .map(|(j, comps)| {
                if comps.len() != file.n {
                    return Err(Error::InvalidInput(format!(
                        "fields[{j}] has {} components, expected {}",
                        comps.len(),
                        file.n
                    )));
                }
                let polys = comps
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        parse_polynomial(s, file.n).map_err(|e| match e {
                            PolyError::Parse { column, message } => Error::InvalidInput(format!(
                                "fields[{j}][{i}] column {column}: {message}"
                            )),
                            other => other.into(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                PolyVectorField::new(polys, weights.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { weights, fields })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // serde_json messages end with the line and column.
        let file: FieldSystemFile = serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn to_file(&self) -> FieldSystemFile {
        FieldSystemFile {
            n: self.n(),
            weights: self.weights.sigma().iter().map(|s| s.to_string()).collect(),
            fields: self.fields.iter().map(|f| f.to_strings()).collect(),
        }
    }
}

/// Grushin system `{d1, x1 d2}` with weights `(1, 2)`.
pub fn grushin() -> FieldSystem {
    FieldSystem::from_strings(&["1", "2"], &[&["1", "0"], &["0", "x1"]]).unwrap()
}

/// Engel-type system `{d1, x1 d2 + x1^2 d3}` with weights `(1, 2, 3)`.
pub fn engel() -> FieldSystem {
    FieldSystem::from_strings(&["1", "2", "3"], &[&["1", "0", "0"], &["0", "x1", "x1^2"]])
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_keys_and_reports_position() {
        let bad = r#"{"n": 2, "weights": ["1","2"], "fields": [["1","0"]], "extra": 1}"#;
        assert!(FieldSystem::from_json(bad).is_err());
        let broken = "{\"n\": 2,\n \"weights\": [\"1\" \"2\"]}";
        let msg = FieldSystem::from_json(broken).unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
        let badpoly = r#"{"n": 2, "weights": ["1","2"], "fields": [["1","0"],["0","x1 +"]]}"#;
        let msg = FieldSystem::from_json(badpoly).unwrap_err().to_string();
        assert!(msg.contains("fields[1][1] column"), "{msg}");
    }

    #[test]
    fn roundtrip() {
        let g = grushin();
        let text = serde_json::to_string(&g.to_file()).unwrap();
        let back = FieldSystem::from_json(&text).unwrap();
        assert_eq!(back.fields, g.fields);
    }
}
