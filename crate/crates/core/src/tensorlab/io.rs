use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// On-disk matrix: row-major `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        ComplexMatrix::new(f.rows, f.cols, f.entries.iter().map(|e| C64::new(e[0], e[1])).collect())
    }
}

impl ComplexMatrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixFile::from(self)).expect("matrix serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: format!("matrix at line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        f.try_into()
    }
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path)?;
    ComplexMatrix::from_json(&text).map_err(|e| match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    fs::write(path, m.to_json())?;
    Ok(())
}
