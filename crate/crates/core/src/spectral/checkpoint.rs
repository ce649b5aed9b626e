//! Binary snapshot of a velocity field.
//!
//! Layout: the 8 bytes `THNSCKPT`, a little-endian `u32` header length, a
//! UTF-8 JSON header, then the coefficients. Components come in order
//! 1, 2, 3; within a component the modes run row-major over `(m, n, p)`,
//! each index from `-n_i` to `n_i`, and every coefficient is two
//! little-endian `f64` (real, imaginary).

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{ScalarField, SpectralField};
use super::torus::{DomainSpec, Torus};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"THNSCKPT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub version: u32,
    pub torus: Torus,
    pub domain: Option<DomainSpec>,
    pub time: f64,
    pub step: u64,
    pub index_order: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub field: SpectralField,
}

impl Checkpoint {
    pub fn new(field: SpectralField, domain: Option<DomainSpec>, time: f64, step: u64) -> Self {
        Self {
            header: CheckpointHeader {
                version: FORMAT_VERSION,
                torus: *field.torus(),
                domain,
                time,
                step,
                index_order: "component,m,n,p row-major; re,im f64 little-endian".into(),
            },
            field,
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let io = |e: std::io::Error| Error::Checkpoint(e.to_string());
        let header = serde_json::to_vec(&self.header).map_err(|e| Error::Checkpoint(e.to_string()))?;
        w.write_all(MAGIC).map_err(io)?;
        w.write_all(&(header.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(&header).map_err(io)?;
        let mut body = Vec::with_capacity(3 * 16 * self.field.torus().len());
        for comp in self.field.components() {
            for c in comp.coeffs() {
                body.extend_from_slice(&c.re.to_le_bytes());
                body.extend_from_slice(&c.im.to_le_bytes());
            }
        }
        w.write_all(&body).map_err(io)
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let io = |e: std::io::Error| Error::Checkpoint(e.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let mut len = [0u8; 4];
        r.read_exact(&mut len).map_err(io)?;
        let mut header = vec![0u8; u32::from_le_bytes(len) as usize];
        r.read_exact(&mut header).map_err(io)?;
        let header: CheckpointHeader =
            serde_json::from_slice(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if header.version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", header.version)));
        }
        let torus = header.torus;
        let mut body = vec![0u8; 3 * 16 * torus.len()];
        r.read_exact(&mut body).map_err(io)?;
        let mut chunks = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()));
        let mut comps = Vec::with_capacity(3);
        for _ in 0..3 {
            let coeffs: Vec<Complex64> = (0..torus.len())
                .map(|_| Complex64::new(chunks.next().unwrap(), chunks.next().unwrap()))
                .collect();
            comps.push(ScalarField::from_coeffs(torus, coeffs)?);
        }
        let comps: [ScalarField; 3] = comps.try_into().unwrap();
        Ok(Self {
            header,
            field: SpectralField::from_components(comps)?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref()).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::Checkpoint(e.to_string()))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bytes() {
        let t = Torus::new([1.0, 0.5, 0.1], [2, 2, 1]).unwrap();
        let u = SpectralField::from_fn(t, |m| {
            [Complex64::new(m[0] as f64, 0.5), Complex64::new(0.25, m[2] as f64), Complex64::new(-1.0, 0.0)]
        });
        let ck = Checkpoint::new(u, None, 0.75, 12);
        let mut bytes = Vec::new();
        ck.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        let back = Checkpoint::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back, ck);
    }

    #[test]
    fn truncated_input_rejected() {
        let t = Torus::new([1.0; 3], [1, 1, 1]).unwrap();
        let ck = Checkpoint::new(SpectralField::zeros(t), None, 0.0, 0);
        let mut bytes = Vec::new();
        ck.write_to(&mut bytes).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(Checkpoint::read_from(bytes.as_slice()).is_err());
        assert!(Checkpoint::read_from(&b"NOPE0000"[..]).is_err());
    }
}
