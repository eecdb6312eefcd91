//! LAEF binary snapshots and CSV tables.
//!
//! LAEF layout, all little-endian: `b"LAEF"`, version `u16`, grid size `n`
//! as `u32`, component count `u8`, then each component as `n·n` row-major
//! `f64` values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::field_calculus::{GridField, GridSpec, ScalarField, Tensor2Field, VectorField};

pub const MAGIC: &[u8; 4] = b"LAEF";
pub const VERSION: u16 = 1;
const HEADER: usize = 4 + 2 + 4 + 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported LAEF version {0}")]
    Version(u16),
    #[error("truncated snapshot: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} trailing bytes after snapshot payload")]
    TrailingBytes(usize),
    #[error("snapshot has {found} components, expected {expected}")]
    ComponentCount { expected: u8, found: u8 },
    #[error("invalid grid size {0}")]
    InvalidGrid(u32),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.display().to_string(), source }
}

/// Raw decoded snapshot on the `[0, 2π)²` torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub components: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn of<F: GridField>(field: &F) -> Self {
        Snapshot { grid: field.grid(), components: field.arrays().iter().map(|a| a.to_vec()).collect() }
    }

    fn fill<F: GridField>(self, mut field: F) -> Result<F, IoError> {
        let expected = field.arrays().len() as u8;
        if self.components.len() != expected as usize {
            return Err(IoError::ComponentCount { expected, found: self.components.len() as u8 });
        }
        for (dst, src) in field.arrays_mut().into_iter().zip(&self.components) {
            dst.copy_from_slice(src);
        }
        Ok(field)
    }

    pub fn into_scalar(self) -> Result<ScalarField, IoError> {
        let g = self.grid;
        self.fill(ScalarField::zeros(g))
    }

    pub fn into_vector(self) -> Result<VectorField, IoError> {
        let g = self.grid;
        self.fill(VectorField::zeros(g))
    }

    pub fn into_tensor(self) -> Result<Tensor2Field, IoError> {
        let g = self.grid;
        self.fill(Tensor2Field::zeros(g))
    }

    pub fn encode(&self) -> Vec<u8> {
        let n = self.grid.n();
        let mut out = Vec::with_capacity(HEADER + self.components.len() * n * n * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.push(self.components.len() as u8);
        for c in &self.components {
            for v in c {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, IoError> {
        if bytes.len() < HEADER {
            return Err(IoError::Truncated { expected: HEADER, found: bytes.len() });
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if &magic != MAGIC {
            return Err(IoError::BadMagic(magic));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(IoError::Version(version));
        }
        let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
        let grid = GridSpec::periodic(n as usize).map_err(|_| IoError::InvalidGrid(n))?;
        let comps = bytes[10] as usize;
        let len = grid.len();
        let expected = HEADER + comps * len * 8;
        if bytes.len() < expected {
            return Err(IoError::Truncated { expected, found: bytes.len() });
        }
        if bytes.len() > expected {
            return Err(IoError::TrailingBytes(bytes.len() - expected));
        }
        let components = bytes[HEADER..]
            .chunks_exact(len * 8)
            .map(|c| c.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
            .collect();
        Ok(Snapshot { grid, components })
    }
}

pub fn write_snapshot<F: GridField>(field: &F, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    fs::write(path, Snapshot::of(field).encode()).map_err(io_err(path))
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot, IoError> {
    let path = path.as_ref();
    Snapshot::decode(&fs::read(path).map_err(io_err(path))?)
}

/// One CSV cell. Reals print with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => write!(f, "{v:.16e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Header plus rows with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{c}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        let path = path.as_ref();
        fs::write(path, self.render()).map_err(io_err(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bytes_round_trip_and_layout() {
        let g = GridSpec::periodic(8).unwrap();
        let v = VectorField::from_fn(g, |x, y| [x.sin() * 1e-300, y / 3.0]);
        let bytes = Snapshot::of(&v).encode();
        assert_eq!(&bytes[..4], b"LAEF");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..10], &[8, 0, 0, 0]);
        assert_eq!(bytes[10], 2);
        assert_eq!(bytes.len(), 11 + 2 * 64 * 8);
        let back = Snapshot::decode(&bytes).unwrap().into_vector().unwrap();
        assert_eq!(back, v);
        assert!(matches!(Snapshot::decode(&bytes[..500]), Err(IoError::Truncated { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Snapshot::decode(&bad), Err(IoError::BadMagic(_))));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(Snapshot::decode(&bad), Err(IoError::Version(2))));
        assert!(matches!(Snapshot::decode(&bytes).unwrap().into_tensor(), Err(IoError::ComponentCount { .. })));
    }

    #[test]
    fn csv_is_round_trip_safe() {
        let mut t = CsvTable::new(&["i", "x"]);
        t.push(vec![3usize.into(), 0.1f64.into()]);
        t.push(vec![4usize.into(), (1.0f64 / 3.0).into()]);
        let s = t.render();
        assert!(s.starts_with("i,x\n3,"));
        for line in s.lines().skip(1) {
            let x: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!(x == 0.1 || x == 1.0 / 3.0);
        }
    }
}
