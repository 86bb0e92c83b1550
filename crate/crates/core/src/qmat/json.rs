//! `{"dim": d, "entries": [[re, im], ...]}` encoding, row-major for operators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Ket, Operator, QmatError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    fn complex_entries(&self) -> Result<Vec<Complex64>, QmatError> {
        self.entries
            .iter()
            .map(|&[re, im]| {
                if re.is_finite() && im.is_finite() {
                    Ok(Complex64::new(re, im))
                } else {
                    Err(QmatError::InvalidEncoding("non-finite entry".into()))
                }
            })
            .collect()
    }
}

fn encode(dim: usize, entries: impl Iterator<Item = Complex64>) -> MatrixJson {
    MatrixJson {
        dim,
        entries: entries.map(|z| [z.re, z.im]).collect(),
    }
}

impl From<Operator> for MatrixJson {
    fn from(op: Operator) -> Self {
        encode(op.dim(), op.row_major().into_iter())
    }
}

impl From<Ket> for MatrixJson {
    fn from(ket: Ket) -> Self {
        encode(ket.dim(), ket.amplitudes().iter().copied())
    }
}

impl TryFrom<MatrixJson> for Operator {
    type Error = QmatError;

    fn try_from(value: MatrixJson) -> Result<Self, Self::Error> {
        let entries = value.complex_entries()?;
        Operator::from_row_major(value.dim, &entries)
    }
}

impl TryFrom<MatrixJson> for Ket {
    type Error = QmatError;

    fn try_from(value: MatrixJson) -> Result<Self, Self::Error> {
        let entries = value.complex_entries()?;
        if entries.len() != value.dim {
            return Err(QmatError::DimensionMismatch {
                expected: value.dim,
                got: entries.len(),
            });
        }
        Ket::new(entries)
    }
}

impl Serialize for Operator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        Operator::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Ket {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ket {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        Ket::try_from(raw).map_err(serde::de::Error::custom)
    }
}
