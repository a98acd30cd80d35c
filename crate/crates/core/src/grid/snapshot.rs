//! Binary field snapshots: `"BLLF"`, u32 version, u32 nx, u32 nz,
//! u8 staggering, then the values as row-major little-endian f64.

use std::io::{Read, Write};

use super::{Grid, ScalarField, Staggering};
use crate::error::{BllError, Result};

const MAGIC: &[u8; 4] = b"BLLF";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub nz: usize,
    pub staggering: Staggering,
    pub values: Vec<f64>,
}

impl Snapshot {
    /// Rebuilds the field on a grid of period `lx` (the format does not store it).
    pub fn into_field(self, lx: f64) -> Result<ScalarField> {
        let grid = Grid::new(self.nx, self.nz, lx)?;
        ScalarField::from_vec(grid, self.staggering, self.values)
    }
}

pub fn write_snapshot<W: Write>(out: &mut W, field: &ScalarField) -> Result<()> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(17 + 8 * field.values().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.nx as u32).to_le_bytes());
    buf.extend_from_slice(&(g.nz as u32).to_le_bytes());
    buf.push(field.staggering().tag());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(input: &mut R) -> Result<Snapshot> {
    let mut head = [0u8; 17];
    input.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(BllError::Io("not a BLLF snapshot".into()));
    }
    let word = |k: usize| u32::from_le_bytes([head[k], head[k + 1], head[k + 2], head[k + 3]]);
    let version = word(4);
    if version != VERSION {
        return Err(BllError::Io(format!("unsupported snapshot version {version}")));
    }
    let (nx, nz) = (word(8) as usize, word(12) as usize);
    let staggering = Staggering::from_tag(head[16])
        .ok_or_else(|| BllError::Io(format!("unknown staggering tag {}", head[16])))?;
    let rows = if staggering == Staggering::ZFace { nz + 1 } else { nz };
    let mut raw = vec![0u8; 8 * nx * rows];
    input.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(Snapshot { nx, nz, staggering, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let g = Grid::new(8, 4, 2.0).unwrap();
        for stag in [Staggering::Center, Staggering::XFace, Staggering::ZFace] {
            let f = ScalarField::from_fn(g, stag, |x, z| x - 3.0 * z * z);
            let mut bytes = Vec::new();
            write_snapshot(&mut bytes, &f).unwrap();
            assert_eq!(&bytes[..4], b"BLLF");
            let back = read_snapshot(&mut bytes.as_slice()).unwrap().into_field(2.0).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn rejects_garbage() {
        let bytes = b"NOPE0000000000000".to_vec();
        assert!(read_snapshot(&mut bytes.as_slice()).is_err());
    }
}
