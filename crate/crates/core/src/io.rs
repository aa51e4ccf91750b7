//! JSON formats for functions, matrices, adversary matrices, witnesses and
//! certificates.
//!
//! ```text
//! truth table   { "n": 2, "rows": [ { "x": "01", "f": 1 }, … ] }
//! matrix        { "labels": ["00", …], "entries": [[…], …] }
//! adversary     matrix fields + { "function": <truth table> }
//! witness       { "rows": [ { "x": "01", "p": [0.5, 0.5] }, … ] }
//! ```
//!
//! Matrices are always written in full and read back with an exact symmetry
//! check. Floats use the shortest decimal form that parses back to the same
//! `f64`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryMatrix, CostVector, MinimaxWitness};
use crate::boolfn::{BitString, BooleanFunction};
use crate::error::{Error, Result};
use crate::solver::{BoundCertificate, SolverMetadata};
use crate::specmat::SymMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub x: String,
    pub f: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub n: usize,
    pub rows: Vec<TableRow>,
}

impl TruthTable {
    pub fn from_function(f: &BooleanFunction) -> Self {
        TruthTable {
            n: f.arity(),
            rows: f
                .rows()
                .map(|(x, v)| TableRow {
                    x: x.to_string(),
                    f: v as u8,
                })
                .collect(),
        }
    }

    pub fn to_function(&self) -> Result<BooleanFunction> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let v = match r.f {
                    0 => false,
                    1 => true,
                    other => {
                        return Err(Error::InvalidFunction(format!(
                            "value {other} for {} is not 0 or 1",
                            r.x
                        )))
                    }
                };
                Ok((r.x.parse::<BitString>()?, v))
            })
            .collect::<Result<Vec<_>>>()?;
        BooleanFunction::new(self.n, rows)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &SymMatrix) -> Self {
        MatrixJson {
            labels: m.labels().iter().map(ToString::to_string).collect(),
            entries: m.rows(),
        }
    }

    pub fn to_matrix(&self) -> Result<SymMatrix> {
        let labels = self
            .labels
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<BitString>>>()?;
        SymMatrix::from_rows(labels, &self.entries)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    pub function: TruthTable,
}

impl AdversaryJson {
    pub fn from_adversary(gamma: &AdversaryMatrix) -> Self {
        AdversaryJson {
            matrix: MatrixJson::from_matrix(gamma.matrix()),
            function: TruthTable::from_function(gamma.function()),
        }
    }

    /// Rows may come in any order; they are matched to the function's
    /// domain by label.
    pub fn to_adversary(&self) -> Result<AdversaryMatrix> {
        let f = self.function.to_function()?;
        let m = self.matrix.to_matrix()?;
        if m.dim() != f.len() {
            return Err(Error::Mismatch(format!(
                "{} matrix labels for a domain of size {}",
                m.dim(),
                f.len()
            )));
        }
        let order = m
            .labels()
            .iter()
            .map(|x| f.index_of(x).ok_or_else(|| Error::OutsideDomain(x.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let mut back = vec![usize::MAX; f.len()];
        for (k, &r) in order.iter().enumerate() {
            if back[r] != usize::MAX {
                return Err(Error::InvalidAdversary(format!("label {} repeated", f.domain()[r])));
            }
            back[r] = k;
        }
        let sorted = SymMatrix::from_fn(f.domain().to_vec(), |r, c| m.get(back[r], back[c]))?;
        AdversaryMatrix::new(f, sorted)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub x: String,
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub rows: Vec<WitnessRow>,
}

impl WitnessJson {
    pub fn from_witness(w: &MinimaxWitness) -> Self {
        WitnessJson {
            rows: w
                .function()
                .domain()
                .iter()
                .zip(w.rows())
                .map(|(x, p)| WitnessRow {
                    x: x.to_string(),
                    p: p.clone(),
                })
                .collect(),
        }
    }

    /// Needs the function to check that every domain string has a row.
    pub fn to_witness(&self, f: &BooleanFunction) -> Result<MinimaxWitness> {
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; f.len()];
        for row in &self.rows {
            let x: BitString = row.x.parse()?;
            let r = f.index_of(&x).ok_or_else(|| Error::OutsideDomain(row.x.clone()))?;
            if rows[r].replace(row.p.clone()).is_some() {
                return Err(Error::InvalidWitness(format!("row {} repeated", row.x)));
            }
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(r, p)| p.ok_or_else(|| Error::InvalidWitness(format!("missing row {}", f.domain()[r]))))
            .collect::<Result<Vec<_>>>()?;
        MinimaxWitness::new(f.clone(), rows)
    }
}

/// A certificate with both halves and its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub function: TruthTable,
    pub alpha: CostVector,
    pub lower: AdversaryJson,
    pub lower_value: f64,
    pub upper: WitnessJson,
    pub upper_value: f64,
    pub gap: f64,
    pub tight: bool,
    pub metadata: SolverMetadata,
}

impl CertificateJson {
    pub fn from_certificate(c: &BoundCertificate) -> Self {
        CertificateJson {
            function: TruthTable::from_function(&c.function),
            alpha: c.alpha.clone(),
            lower: AdversaryJson::from_adversary(&c.lower),
            lower_value: c.lower_value,
            upper: WitnessJson::from_witness(&c.upper),
            upper_value: c.upper_value,
            gap: c.gap,
            tight: c.tight,
            metadata: c.metadata.clone(),
        }
    }

    pub fn to_certificate(&self) -> Result<BoundCertificate> {
        let function = self.function.to_function()?;
        let lower = self.lower.to_adversary()?;
        if !lower.function().same_map(&function) {
            return Err(Error::Mismatch("lower certificate is over a different function".into()));
        }
        Ok(BoundCertificate {
            upper: self.upper.to_witness(&function)?,
            function,
            alpha: self.alpha.clone(),
            lower,
            lower_value: self.lower_value,
            upper_value: self.upper_value,
            gap: self.gap,
            tight: self.tight,
            metadata: self.metadata.clone(),
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_function(path: &Path) -> Result<BooleanFunction> {
    read_json::<TruthTable>(path)?.to_function()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{make_family, Family};

    #[test]
    fn partial_table_round_trip() {
        let text = r#"{"n":2,"rows":[{"x":"00","f":0},{"x":"01","f":1},{"x":"11","f":1}]}"#;
        let t: TruthTable = serde_json::from_str(text).unwrap();
        let f = t.to_function().unwrap();
        assert_eq!(f.len(), 3);
        assert!(!f.is_total());
        assert_eq!(TruthTable::from_function(&f), t);
    }

    #[test]
    fn table_rejects_bad_values() {
        let t = TruthTable {
            n: 1,
            rows: vec![TableRow { x: "0".into(), f: 2 }],
        };
        assert!(t.to_function().is_err());
        let t = TruthTable {
            n: 2,
            rows: vec![TableRow { x: "0".into(), f: 0 }],
        };
        assert!(t.to_function().is_err());
    }

    #[test]
    fn matrix_symmetry_is_exact() {
        let m = MatrixJson {
            labels: vec!["0".into(), "1".into()],
            entries: vec![vec![0.0, 0.1 + 0.2], vec![0.3, 0.0]],
        };
        assert!(matches!(m.to_matrix(), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn adversary_round_trip_is_lossless() {
        let f = make_family(Family::Or, 2).unwrap();
        let gamma = AdversaryMatrix::from_pair_weights(f, |r, c| 1.0 / (1.0 + (r * 7 + c) as f64).sqrt()).unwrap();
        let text = serde_json::to_string(&AdversaryJson::from_adversary(&gamma)).unwrap();
        let back: AdversaryJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_adversary().unwrap(), gamma);
    }

    #[test]
    fn adversary_rows_may_be_permuted() {
        let f = make_family(Family::And, 1).unwrap();
        let j = AdversaryJson {
            matrix: MatrixJson {
                labels: vec!["1".into(), "0".into()],
                entries: vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            },
            function: TruthTable::from_function(&f),
        };
        let gamma = j.to_adversary().unwrap();
        assert_eq!(gamma.matrix().get(0, 1), 2.0);
    }

    #[test]
    fn witness_round_trip() {
        let f = make_family(Family::And, 2).unwrap();
        let w = MinimaxWitness::new(
            f.clone(),
            vec![vec![0.36, 0.64], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.36, 0.64]],
        )
        .unwrap();
        let text = serde_json::to_string(&WitnessJson::from_witness(&w)).unwrap();
        let back: WitnessJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_witness(&f).unwrap(), w);
        let mut short = back.clone();
        short.rows.pop();
        assert!(matches!(short.to_witness(&f), Err(Error::InvalidWitness(_))));
    }
}
