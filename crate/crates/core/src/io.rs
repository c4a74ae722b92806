//! Family files: JSON documents holding a verified set or grid of arrays,
//! and CSV tables of sequences.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{is_cas, is_ccc, is_ccc_sequences, is_css, QArray, QSequence};
use crate::polymatrix::FunctionMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FamilyKind {
    /// Complementary sequence set.
    Css,
    /// Complete complementary code of sequences.
    Ccc,
    /// Complementary array set.
    Cas,
    /// Complete complementary arrays.
    Cca,
}

impl FamilyKind {
    pub fn is_grid(self) -> bool {
        matches!(self, FamilyKind::Ccc | FamilyKind::Cca)
    }
}

/// Members as flat tables (`y_0` fastest) of length `p^m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Members {
    Set(Vec<Vec<usize>>),
    Grid(Vec<Vec<Vec<usize>>>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: String,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub kind: FamilyKind,
    pub q: usize,
    /// Set size, or grid order for CCC/CCA.
    #[serde(rename = "N")]
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub members: Members,
    #[serde(default)]
    pub provenance: Provenance,
}

impl FamilyFile {
    pub fn from_set(kind: FamilyKind, set: &[QArray], provenance: Provenance) -> Result<Self> {
        let first = set.first().ok_or_else(|| Error::Domain("empty family".into()))?;
        let (q, p, m) = first.shape();
        Ok(FamilyFile {
            kind,
            q,
            n: set.len(),
            p,
            m,
            members: Members::Set(set.iter().map(|a| a.table().to_vec()).collect()),
            provenance,
        })
    }

    pub fn from_grid(kind: FamilyKind, fm: &FunctionMatrix, provenance: Provenance) -> Self {
        FamilyFile {
            kind,
            q: fm.q,
            n: fm.n,
            p: fm.p,
            m: fm.m,
            members: Members::Grid(fm.entries.iter().map(|r| r.iter().map(|a| a.table().to_vec()).collect()).collect()),
            provenance,
        }
    }

    fn array(&self, table: &[usize]) -> Result<QArray> {
        QArray::new(self.q, self.p, self.m, table.to_vec())
    }

    /// Members as arrays, checked against the declared shape.
    pub fn arrays(&self) -> Result<Vec<Vec<QArray>>> {
        let rows: Vec<Vec<&Vec<usize>>> = match (&self.members, self.kind.is_grid()) {
            (Members::Set(s), false) => vec![s.iter().collect()],
            (Members::Grid(g), true) => g.iter().map(|r| r.iter().collect()).collect(),
            // An empty list parses as a set; only a mismatch in nesting is an error.
            (Members::Set(s), true) if s.is_empty() => vec![],
            _ => return Err(Error::ShapeMismatch(format!("{:?} members have the wrong nesting", self.kind))),
        };
        let expected_rows = if self.kind.is_grid() { self.n } else { 1 };
        if rows.len() != expected_rows || rows.iter().any(|r| r.len() != self.n) {
            return Err(Error::ShapeMismatch(format!("expected {expected_rows}×{} members", self.n)));
        }
        rows.into_iter().map(|r| r.into_iter().map(|t| self.array(t)).collect()).collect()
    }

    /// All members as sequences, row by row.
    pub fn sequences(&self) -> Result<Vec<QSequence>> {
        Ok(self.arrays()?.iter().flatten().map(QArray::evaluate_to_sequence).collect())
    }

    /// Re-derives the declared property from the raw values.
    pub fn verify(&self) -> Result<bool> {
        let arrays = self.arrays()?;
        match self.kind {
            FamilyKind::Cas => is_cas(&arrays[0]),
            FamilyKind::Cca => is_ccc(&arrays),
            FamilyKind::Css => is_css(&arrays[0].iter().map(QArray::evaluate_to_sequence).collect::<Vec<_>>()),
            FamilyKind::Ccc => is_ccc_sequences(
                &arrays
                    .iter()
                    .map(|r| r.iter().map(QArray::evaluate_to_sequence).collect())
                    .collect::<Vec<_>>(),
            ),
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    id: usize,
    q: usize,
    #[serde(rename = "L")]
    len: usize,
    values: String,
}

/// Writes `id,q,L,values` rows with `;`-separated phases.
pub fn write_csv<W: Write>(out: W, seqs: &[QSequence]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (id, s) in seqs.iter().enumerate() {
        let values = s.values().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";");
        w.serialize(CsvRow { id, q: s.q(), len: s.len(), values }).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<QSequence>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<CsvRow>()
        .map(|row| {
            let row = row.map_err(|e| Error::Serialization(e.to_string()))?;
            let values = row
                .values
                .split(';')
                .filter(|v| !v.is_empty())
                .map(|v| v.trim().parse::<usize>().map_err(|e| Error::Serialization(format!("row {}: {e}", row.id))))
                .collect::<Result<Vec<_>>>()?;
            if values.len() != row.len {
                return Err(Error::Serialization(format!("row {}: declared length {} but {} values", row.id, row.len, values.len())));
            }
            QSequence::new(row.q, values)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> FamilyFile {
        FamilyFile {
            kind: FamilyKind::Ccc,
            q: 4,
            n: 2,
            p: 4,
            m: 1,
            members: Members::Grid(vec![
                vec![vec![0, 1, 0, 3], vec![0, 1, 2, 1]],
                vec![vec![0, 3, 0, 1], vec![0, 3, 2, 3]],
            ]),
            provenance: Provenance::default(),
        }
    }

    #[test]
    fn family_json_round_trip_and_verify() {
        let f = example1();
        let back = FamilyFile::from_json_str(&f.to_json_string().unwrap()).unwrap();
        assert_eq!(back, f);
        assert!(back.verify().unwrap());
        let mut broken = f.clone();
        if let Members::Grid(g) = &mut broken.members {
            g[1][1][3] = 0;
        }
        assert!(!broken.verify().unwrap());
        let mut wrong = f;
        wrong.kind = FamilyKind::Css;
        assert!(wrong.verify().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let seqs = example1().sequences().unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &seqs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,q,L,values\n0,4,4,0;1;0;3\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), seqs);
        assert!(read_csv("id,q,L,values\n0,4,3,0;1\n".as_bytes()).is_err());
    }
}
