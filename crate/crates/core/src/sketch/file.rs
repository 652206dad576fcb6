//! `SKB1` sketch files: magic, `n` and `b` as little-endian u64, then `n`
//! rows of `b / 8` bytes, least significant bit first.

use std::io::{Read, Write};

use super::Sketch;
use crate::error::{Error, Result};

pub const SKETCH_MAGIC: &[u8; 4] = b"SKB1";

pub fn write_sketches<W: Write>(mut out: W, sketches: &[Sketch]) -> Result<()> {
    let b = sketches.first().map_or(0, Sketch::len);
    if !b.is_multiple_of(8) {
        return Err(Error::Format(format!("sketch length {b} is not a whole number of bytes")));
    }
    out.write_all(SKETCH_MAGIC)?;
    out.write_all(&(sketches.len() as u64).to_le_bytes())?;
    out.write_all(&(b as u64).to_le_bytes())?;
    let mut row = Vec::with_capacity(b / 8);
    for s in sketches {
        if s.len() != b {
            return Err(Error::LengthMismatch { expected: b, found: s.len() });
        }
        row.clear();
        for w in s.words() {
            row.extend_from_slice(&w.to_le_bytes());
        }
        out.write_all(&row[..b / 8])?;
    }
    out.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_sketches<R: Read>(mut input: R) -> Result<Vec<Sketch>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != SKETCH_MAGIC {
        return Err(Error::Format("not a SKB1 sketch file".into()));
    }
    let n = read_u64(&mut input)?;
    let b = read_u64(&mut input)?;
    if b % 8 != 0 || b > (1 << 40) {
        return Err(Error::Format(format!("bad sketch length {b}")));
    }
    let b = b as usize;
    let mut row = vec![0u8; b / 8];
    let mut out = Vec::new();
    for _ in 0..n {
        input.read_exact(&mut row)?;
        let words = row
            .chunks(8)
            .map(|c| {
                let mut w = [0u8; 8];
                w[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(w)
            })
            .collect();
        out.push(Sketch::from_words(b, words)?);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after sketch rows".into()));
    }
    Ok(out)
}
