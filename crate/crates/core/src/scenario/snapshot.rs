//! Binary snapshots, all little-endian: the 16-byte magic `SVMSNAP1` padded
//! with NUL, `u32 nx`, `u32 nv` (zero for a field), `f64 time`, then the
//! lattice as `f64` in row-major order (`v` fastest).

use std::path::Path;

use crate::error::{Error, Result};
use crate::phase_space::{DensityField, TransportField};

pub const MAGIC: [u8; 16] = *b"SVMSNAP1\0\0\0\0\0\0\0\0";
const HEADER_LEN: usize = 16 + 4 + 4 + 8;

/// A decoded snapshot. `nv == 0` marks a field on `nx` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub nx: u32,
    pub nv: u32,
    pub time: f64,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn is_field(&self) -> bool {
        self.nv == 0
    }

    fn expected_len(nx: u32, nv: u32) -> usize {
        nx as usize * (nv as usize).max(1)
    }

    pub fn from_density(f: &DensityField) -> Snapshot {
        Snapshot {
            nx: f.grid().nx() as u32,
            nv: f.grid().nv() as u32,
            time: f.time(),
            values: f.values().to_vec(),
        }
    }

    pub fn from_field(b: &TransportField) -> Snapshot {
        Snapshot {
            nx: b.axis().len() as u32,
            nv: 0,
            time: b.time(),
            values: b.values().to_vec(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&self.nx.to_le_bytes());
        out.extend_from_slice(&self.nv.to_le_bytes());
        out.extend_from_slice(&self.time.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Snapshot> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Snapshot(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if bytes[..16] != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
        let (nx, nv) = (word(16), word(20));
        let time = f64::from_le_bytes(bytes[24..32].try_into().expect("8 bytes"));
        let body = &bytes[HEADER_LEN..];
        let n = Self::expected_len(nx, nv);
        if body.len() != 8 * n {
            return Err(Error::Snapshot(format!(
                "header declares {n} values for {nx} x {nv} but the body holds {} bytes",
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Snapshot { nx, nv, time, values })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::from(e).context(path.display().to_string()))
    }

    pub fn read(path: &Path) -> Result<Snapshot> {
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Self::from_bytes(&bytes).map_err(|e| e.context(path.display().to_string()))
    }

    /// `max |a - b|` over the lattice; the shapes must agree.
    pub fn sup_distance(&self, other: &Snapshot) -> Result<f64> {
        if (self.nx, self.nv) != (other.nx, other.nv) {
            return Err(Error::Snapshot(format!(
                "shapes differ: {} x {} against {} x {}",
                self.nx, self.nv, other.nx, other.nv
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())))
    }
}
