//! Component codes: the short block constraints that replace single parity
//! checks at generalized check nodes.
//!
//! A component code is given by its parity-check matrix over GF(2): `p - k`
//! rows of length `p`. Row `j` of the matrix becomes one constraint row of
//! the generalized node; column `t` refers to the node's `t`-th neighbor
//! in ascending variable-node order.
//!
//! # File format
//!
//! Plain text. First line `p k`, then `p - k` rows of `p` space-separated
//! bits:
//!
//! ```text
//! 7 4
//! 1 0 0 1 1 0 1
//! 0 1 0 1 0 1 1
//! 0 0 1 0 1 1 1
//! ```

use crate::gf2::{self, BitRow};
use std::path::Path;
use thiserror::Error;

/// Parity-check description of a `[p, k]` component code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentCode {
    name: String,
    length: usize,
    dimension: usize,
    rows: Vec<Vec<u8>>,
}

/// Validation and parse errors for component-code matrices.
#[derive(Debug, Error)]
pub enum ComponentError {
    #[error("unknown built-in component code {0:?}")]
    UnknownBuiltin(String),
    #[error("component file {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("component {name:?}: expected {expected} rows of length {length}, got {got}")]
    RowShape { name: String, expected: usize, length: usize, got: String },
    #[error("component {name:?}: entries must be 0 or 1")]
    NonBinary { name: String },
    #[error("component {name:?}: parity-check rows are linearly dependent (rank {rank} < {rows})")]
    RankDeficient { name: String, rank: usize, rows: usize },
    #[error("component {name:?}: column {col} is zero; every neighbor must enter some row")]
    ZeroColumn { name: String, col: usize },
    #[error("component {name:?}: dimension {dimension} not below length {length}")]
    BadDimensions { name: String, length: usize, dimension: usize },
}

impl ComponentCode {
    /// Builds and validates a component code from explicit parity rows.
    pub fn new(
        name: impl Into<String>,
        length: usize,
        dimension: usize,
        rows: Vec<Vec<u8>>,
    ) -> Result<Self, ComponentError> {
        let name = name.into();
        if dimension >= length || length == 0 {
            return Err(ComponentError::BadDimensions { name, length, dimension });
        }
        let expected = length - dimension;
        if rows.len() != expected || rows.iter().any(|r| r.len() != length) {
            let got = format!(
                "{} rows of lengths {:?}",
                rows.len(),
                rows.iter().map(Vec::len).collect::<Vec<_>>()
            );
            return Err(ComponentError::RowShape { name, expected, length, got });
        }
        if rows.iter().flatten().any(|&b| b > 1) {
            return Err(ComponentError::NonBinary { name });
        }
        for col in 0..length {
            if rows.iter().all(|r| r[col] == 0) {
                return Err(ComponentError::ZeroColumn { name, col });
            }
        }
        let packed: Vec<BitRow> = rows
            .iter()
            .map(|r| {
                let mut b = BitRow::zeros(length);
                for (i, &bit) in r.iter().enumerate() {
                    if bit == 1 {
                        b.set(i);
                    }
                }
                b
            })
            .collect();
        let rank = gf2::rank(&packed);
        if rank != expected {
            return Err(ComponentError::RankDeficient { name, rank, rows: expected });
        }
        Ok(ComponentCode { name, length, dimension, rows })
    }

    /// Looks up a built-in component code by name.
    ///
    /// Currently `"hamming74"`: the `[7, 4]` Hamming code with the
    /// parity-check matrix shown in the module docs.
    pub fn builtin(name: &str) -> Result<Self, ComponentError> {
        match name {
            "hamming74" => ComponentCode::new(
                "hamming-7-4",
                7,
                4,
                vec![
                    vec![1, 0, 0, 1, 1, 0, 1],
                    vec![0, 1, 0, 1, 0, 1, 1],
                    vec![0, 0, 1, 0, 1, 1, 1],
                ],
            ),
            other => Err(ComponentError::UnknownBuiltin(other.to_string())),
        }
    }

    /// Parses the plain-text file format described in the module docs.
    pub fn from_file(path: &Path) -> Result<Self, ComponentError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ComponentError::Parse { path: display.clone(), msg: e.to_string() })?;
        Self::parse(&text, &display)
    }

    /// Parses component-file text; `source` names the input in errors.
    pub fn parse(text: &str, source: &str) -> Result<Self, ComponentError> {
        let err = |msg: &str| ComponentError::Parse { path: source.to_string(), msg: msg.into() };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| err("empty file"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| err("header must be two integers: length and dimension"))?;
        let [length, dimension] = dims[..] else {
            return Err(err("header must be two integers: length and dimension"));
        };
        if dimension >= length {
            return Err(ComponentError::BadDimensions {
                name: source.to_string(),
                length,
                dimension,
            });
        }
        let mut rows = Vec::with_capacity(length - dimension);
        for line in lines.by_ref().take(length - dimension) {
            let row: Vec<u8> = line
                .split_whitespace()
                .map(|t| match t.parse::<u8>() {
                    Ok(b @ (0 | 1)) => Ok(b),
                    _ => Err(()),
                })
                .collect::<Result<_, ()>>()
                .map_err(|()| err("rows must contain integers 0 or 1"))?;
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(err("trailing content after the parity rows"));
        }
        let name = Path::new(source)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| source.to_string());
        ComponentCode::new(name, length, dimension, rows)
    }

    /// Canonical text form; [`ComponentCode::parse`] inverts it.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.length, self.dimension);
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(u8::to_string).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// Human-readable code name (`hamming-7-4` for the built-in).
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Block length `p`; must equal the base graph's check-node degree.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Code dimension `k`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of parity rows `p - k` contributed per generalized node.
    pub fn parity_rows(&self) -> usize {
        self.length - self.dimension
    }

    /// Parity-check rows, each of length `p`.
    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }
}
