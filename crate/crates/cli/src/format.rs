//! The manifold file format: a UTF-8 JSON document
//!
//! ```json
//! {
//!   "label": "bielliptic_d2",
//!   "n": 2,
//!   "cplx": [[0.0, -1.0, ...], ...],
//!   "generators": [
//!     {"rotation": [[-1, 0, ...], ...], "translation": ["1/2", "0/1", ...]}
//!   ]
//! }
//! ```
//!
//! Rational values are written as `"p/q"` strings and parse exactly; entries
//! of the complex structure may be numbers or `"p/q"` strings on input and
//! are always written as shortest round-trip decimals. Serialization is
//! canonical: serializing a parsed file reproduces it byte for byte.

use flatkahler::crystal::{AffineIsometry, CrystalError, FlatKahlerData};
use flatkahler::exact::{IntMatrix, Rat};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from reading or writing manifold files.
#[derive(Debug, Error)]
pub enum FormatError {
    /// Malformed document: broken JSON, bad rational strings, ragged arrays.
    #[error("parse error: {0}")]
    Malformed(String),
    /// Well-formed document describing inconsistent data (wrong shapes,
    /// non-unimodular rotations, J² != -Id).
    #[error("invalid data: {0}")]
    Invalid(String),
}

impl From<CrystalError> for FormatError {
    fn from(e: CrystalError) -> Self {
        FormatError::Invalid(e.to_string())
    }
}

/// An entry of the complex-structure matrix: a number, or an exact fraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CplxEntry {
    Number(f64),
    Fraction(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub rotation: Vec<Vec<i64>>,
    pub translation: Vec<String>,
}

/// Serialized form of [`FlatKahlerData`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifoldFile {
    pub label: String,
    pub n: usize,
    pub cplx: Vec<Vec<CplxEntry>>,
    pub generators: Vec<GeneratorFile>,
}

fn parse_rational(s: &str) -> Result<Rat, FormatError> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| FormatError::Malformed(format!("`{s}` is not of the form p/q")))?;
    let numer: BigInt = p
        .trim()
        .parse()
        .map_err(|_| FormatError::Malformed(format!("bad numerator in `{s}`")))?;
    let denom: BigInt = q
        .trim()
        .parse()
        .map_err(|_| FormatError::Malformed(format!("bad denominator in `{s}`")))?;
    if denom.is_zero() {
        return Err(FormatError::Malformed(format!("zero denominator in `{s}`")));
    }
    Ok(Rat::new(numer, denom))
}

fn render_rational(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl ManifoldFile {
    /// Reconstructs the validated-shape data record.
    pub fn to_data(&self) -> Result<FlatKahlerData, FormatError> {
        let rank = 2 * self.n;
        if self.cplx.len() != rank || self.cplx.iter().any(|row| row.len() != rank) {
            return Err(FormatError::Invalid(format!(
                "cplx must be a {rank}x{rank} matrix"
            )));
        }
        let mut cplx = DMatrix::zeros(rank, rank);
        for (i, row) in self.cplx.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                cplx[(i, j)] = match entry {
                    CplxEntry::Number(x) => {
                        if !x.is_finite() {
                            return Err(FormatError::Malformed(format!(
                                "non-finite cplx entry at ({i}, {j})"
                            )));
                        }
                        *x
                    }
                    CplxEntry::Fraction(s) => parse_rational(s)?
                        .to_f64()
                        .ok_or_else(|| FormatError::Malformed(format!("`{s}` out of range")))?,
                };
            }
        }
        let mut generators = Vec::with_capacity(self.generators.len());
        for (idx, g) in self.generators.iter().enumerate() {
            if g.rotation.len() != rank || g.rotation.iter().any(|row| row.len() != rank) {
                return Err(FormatError::Invalid(format!(
                    "generator {idx}: rotation must be {rank}x{rank}"
                )));
            }
            if g.translation.len() != rank {
                return Err(FormatError::Invalid(format!(
                    "generator {idx}: translation must have {rank} entries"
                )));
            }
            let rotation = IntMatrix::from_fn(rank, rank, |i, j| BigInt::from(g.rotation[i][j]));
            let translation = g
                .translation
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()?;
            generators.push(AffineIsometry::new(rotation, translation)?);
        }
        Ok(FlatKahlerData::new(
            self.n,
            cplx,
            generators,
            self.label.clone(),
        )?)
    }

    /// Canonical file image of a data record.
    pub fn from_data(data: &FlatKahlerData) -> Result<Self, FormatError> {
        let rank = data.rank();
        let cplx = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| CplxEntry::Number(data.cplx()[(i, j)]))
                    .collect()
            })
            .collect();
        let mut generators = Vec::with_capacity(data.generators().len());
        for g in data.generators() {
            let rotation = (0..rank)
                .map(|i| {
                    (0..rank)
                        .map(|j| {
                            g.rotation().get(i, j).to_i64().ok_or_else(|| {
                                FormatError::Invalid("rotation entry exceeds i64".to_string())
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let translation = g.translation().iter().map(render_rational).collect();
            generators.push(GeneratorFile {
                rotation,
                translation,
            });
        }
        Ok(Self {
            label: data.label().to_string(),
            n: data.n(),
            cplx,
            generators,
        })
    }
}

/// Parses a manifold document.
pub fn parse_str(text: &str) -> Result<FlatKahlerData, FormatError> {
    let file: ManifoldFile =
        serde_json::from_str(text).map_err(|e| FormatError::Malformed(e.to_string()))?;
    file.to_data()
}

/// Canonical serialization: pretty-printed JSON with shortest round-trip
/// decimals and reduced fractions, ending in a newline.
pub fn to_canonical_string(data: &FlatKahlerData) -> Result<String, FormatError> {
    let file = ManifoldFile::from_data(data)?;
    let mut text =
        serde_json::to_string_pretty(&file).map_err(|e| FormatError::Invalid(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use flatkahler::catalog;

    #[test]
    fn round_trip_is_canonical() {
        let data = catalog::build("bielliptic_d2").unwrap();
        let once = to_canonical_string(&data).unwrap();
        let reparsed = parse_str(&once).unwrap();
        let twice = to_canonical_string(&reparsed).unwrap();
        assert_eq!(once, twice);
        assert_eq!(reparsed.label(), "bielliptic_d2");
        assert_eq!(reparsed.generators().len(), 1);
    }

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("1/2").unwrap(), flatkahler::exact::rat(1, 2));
        assert_eq!(
            parse_rational("-3/6").unwrap(),
            flatkahler::exact::rat(-1, 2)
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
    }

    #[test]
    fn fractional_cplx_entries_are_accepted() {
        let text = r#"{
  "label": "t1",
  "n": 1,
  "cplx": [["0/1", "-1/1"], ["1/1", "0/1"]],
  "generators": []
}"#;
        let data = parse_str(text).unwrap();
        assert_eq!(data.cplx()[(1, 0)], 1.0);
    }

    #[test]
    fn malformed_documents_are_parse_errors() {
        assert!(matches!(
            parse_str("not json"),
            Err(FormatError::Malformed(_))
        ));
        let bad_shape = r#"{"label": "x", "n": 1, "cplx": [[0.0]], "generators": []}"#;
        assert!(matches!(parse_str(bad_shape), Err(FormatError::Invalid(_))));
    }
}
