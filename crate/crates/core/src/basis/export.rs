use std::io::{self, Read, Write};

use super::{SequenceWindow, SumsetBitmap};

/// First four bytes of a bitmap dump.
pub const BITMAP_MAGIC: [u8; 4] = *b"SSBM";

/// CSV with header `n,a_n,flag`; flag is 0 (double), 1 (extended) or 2 (ambiguous).
pub fn write_sequence_csv<W: Write>(seq: &SequenceWindow, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "a_n", "flag"])?;
    for (i, (v, f)) in seq.values.iter().zip(&seq.flags).enumerate() {
        w.write_record(&[(seq.n_start + i as u64).to_string(), v.to_string(), f.code().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// 16-byte header (magic, s as u32 LE, limit as u64 LE) followed by the words, little-endian.
pub fn write_bitmap_dump<W: Write>(bm: &SumsetBitmap, mut out: W) -> io::Result<()> {
    out.write_all(&BITMAP_MAGIC)?;
    out.write_all(&bm.s.to_le_bytes())?;
    out.write_all(&bm.limit.to_le_bytes())?;
    let mut buf = Vec::with_capacity(bm.words().len() * 8);
    for w in bm.words() {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    out.write_all(&buf)
}

pub fn read_bitmap_dump<R: Read>(mut input: R) -> io::Result<SumsetBitmap> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if header[..4] != BITMAP_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad bitmap magic"));
    }
    let s = u32::from_le_bytes(header[4..8].try_into().unwrap());
    let limit = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    let n = (limit / 64 + 1) as usize;
    if body.len() != n * 8 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bitmap body length does not match limit"));
    }
    let words = body.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(SumsetBitmap::from_words(s, limit, words))
}
