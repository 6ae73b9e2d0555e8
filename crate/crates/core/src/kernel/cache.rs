//! Little-endian binary container for kernel tables.

use std::io::{Read, Write};

use super::heat::KernelTable;
use crate::{Error, Grid, Result};

const MAGIC: &[u8; 8] = b"HKTABLE\0";
pub const CACHE_VERSION: u32 = 1;

fn put_f64s(out: &mut impl Write, v: &[f64]) -> std::io::Result<()> {
    out.write_all(&(v.len() as u64).to_le_bytes())?;
    for x in v {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn io(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("kernel cache: {e}"))
}

pub fn write_table(out: &mut impl Write, table: &KernelTable) -> Result<()> {
    let mut go = || -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&CACHE_VERSION.to_le_bytes())?;
        put_f64s(
            out,
            &[
                table.grid.half_width(),
                table.grid.len() as f64,
                table.y,
                table.source as f64,
                table.w,
                table.mu,
                table.start,
                table.min_value,
                table.blended_fraction,
            ],
        )?;
        put_f64s(out, &table.times)?;
        put_f64s(out, &table.mass)?;
        put_f64s(out, &table.boundary_flux)?;
        put_f64s(
            out,
            &table.steps.iter().map(|&s| s as f64).collect::<Vec<_>>(),
        )?;
        for row in &table.values {
            put_f64s(out, row)?;
        }
        Ok(())
    };
    go().map_err(io)
}

struct Reader<'a, R: Read>(&'a mut R);

impl<R: Read> Reader<'_, R> {
    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.0.read_exact(&mut b).map_err(io)?;
        Ok(u64::from_le_bytes(b))
    }

    fn f64s(&mut self, limit: usize) -> Result<Vec<f64>> {
        let n = self.u64()? as usize;
        if n > limit {
            return Err(Error::InvalidArgument(format!(
                "kernel cache: block of {n} values"
            )));
        }
        let mut bytes = vec![0u8; 8 * n];
        self.0.read_exact(&mut bytes).map_err(io)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn read_table(input: &mut impl Read) -> Result<KernelTable> {
    let mut head = [0u8; 12];
    input.read_exact(&mut head).map_err(io)?;
    if &head[..8] != MAGIC {
        return Err(Error::InvalidArgument("kernel cache: bad magic".into()));
    }
    let version = u32::from_le_bytes(head[8..].try_into().expect("4 bytes"));
    if version != CACHE_VERSION {
        return Err(Error::InvalidArgument(format!(
            "kernel cache: version {version}, expected {CACHE_VERSION}"
        )));
    }
    let mut r = Reader(input);
    let meta = r.f64s(9)?;
    if meta.len() != 9 {
        return Err(Error::InvalidArgument("kernel cache: short header".into()));
    }
    let n = meta[1] as usize;
    let grid = Grid::new(meta[0], n)?;
    let times = r.f64s(1 << 24)?;
    let nt = times.len();
    let mass = r.f64s(nt)?;
    let boundary_flux = r.f64s(nt)?;
    let steps = r
        .f64s(nt)?
        .into_iter()
        .map(|s| s as usize)
        .collect::<Vec<_>>();
    if mass.len() != nt || boundary_flux.len() != nt || steps.len() != nt {
        return Err(Error::InvalidArgument(
            "kernel cache: inconsistent lengths".into(),
        ));
    }
    let values = (0..nt)
        .map(|_| {
            let row = r.f64s(n)?;
            if row.len() == n {
                Ok(row)
            } else {
                Err(Error::InvalidArgument("kernel cache: short row".into()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelTable {
        grid,
        y: meta[2],
        source: meta[3] as usize,
        w: meta[4],
        mu: meta[5],
        start: meta[6],
        times,
        values,
        mass,
        boundary_flux,
        steps,
        min_value: meta[7],
        blended_fraction: meta[8],
    })
}
