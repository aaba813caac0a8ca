//! Binary field files: `"WNF1"`, `u32 nx`, `u32 ny`, `f64 M`, then `nx * ny` `f64` samples,
//! all little-endian. Row `i` holds the samples with first coordinate `-M/2 + i M/nx`.

use std::io::{Read, Write};

use super::NoiseField;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"WNF1";

#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid {
    pub nx: usize,
    pub ny: usize,
    pub side: f64,
    pub samples: Vec<f64>,
}

impl FieldGrid {
    pub fn from_field(field: &NoiseField, n: usize) -> Result<Self> {
        if n <= 2 * field.cutoff() {
            return Err(Error::Resolution {
                what: "mode cutoff",
                detail: format!("{n} grid points cannot represent cutoff {}", field.cutoff()),
            });
        }
        Ok(FieldGrid {
            nx: n,
            ny: n,
            side: field.side(),
            samples: field.to_grid(n),
        })
    }
}

pub fn write_wnf1<W: Write>(mut w: W, grid: &FieldGrid) -> Result<()> {
    if grid.samples.len() != grid.nx * grid.ny {
        return Err(Error::Format(format!(
            "{} samples for a {} x {} grid",
            grid.samples.len(),
            grid.nx,
            grid.ny
        )));
    }
    let dim = |v: usize| {
        u32::try_from(v).map_err(|_| Error::Format(format!("grid size {v} exceeds u32")))
    };
    w.write_all(MAGIC)?;
    w.write_all(&dim(grid.nx)?.to_le_bytes())?;
    w.write_all(&dim(grid.ny)?.to_le_bytes())?;
    w.write_all(&grid.side.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * grid.samples.len());
    for v in &grid.samples {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_wnf1<R: Read>(mut r: R) -> Result<FieldGrid> {
    let mut head = [0u8; 20];
    r.read_exact(&mut head)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("missing WNF1 magic".into()));
    }
    let nx = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let ny = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let side = f64::from_le_bytes(head[12..20].try_into().unwrap());
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != 8 * nx * ny {
        return Err(Error::Format(format!(
            "expected {} sample bytes for {nx} x {ny}, found {}",
            8 * nx * ny,
            body.len()
        )));
    }
    let samples = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FieldGrid {
        nx,
        ny,
        side,
        samples,
    })
}
