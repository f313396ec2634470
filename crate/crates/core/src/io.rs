//! Binary screen files.
//!
//! A file is a concatenation of records, one real screen each:
//!
//! | bytes  | content                          |
//! |--------|----------------------------------|
//! | 0..4   | magic `PHSC`                     |
//! | 4..6   | format version, `u16`            |
//! | 6..10  | `nx`, `u32`                      |
//! | 10..14 | `ny`, `u32`                      |
//! | 14..22 | side length `L` in m, `f64`      |
//! | 22..30 | sample index, `u64`              |
//! | 30..32 | zero padding                     |
//! | 32..   | `nx·ny` phases in rad, `f64`, row-major |
//!
//! All numbers are little-endian. The two real screens of complex sample `s`
//! carry indices `2s` (real part) and `2s + 1` (imaginary part).

use std::io::{self, Read, Write};

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::grid::{ComplexScreen, GridSpec};

pub const MAGIC: [u8; 4] = *b"PHSC";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenRecord {
    pub grid: GridSpec,
    pub sample_index: u64,
    /// `values[[l, j]]`, rows along `y`.
    pub values: Array2<f64>,
}

pub fn write_record<W: Write>(
    w: &mut W,
    grid: &GridSpec,
    sample_index: u64,
    values: ArrayView2<'_, f64>,
) -> Result<()> {
    if values.dim() != (grid.ny, grid.nx) {
        return Err(Error::argument("screen shape does not match its grid"));
    }
    let nx = u32::try_from(grid.nx).map_err(|_| Error::argument("nx exceeds u32"))?;
    let ny = u32::try_from(grid.ny).map_err(|_| Error::argument("ny exceeds u32"))?;
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&MAGIC);
    header[4..6].copy_from_slice(&VERSION.to_le_bytes());
    header[6..10].copy_from_slice(&nx.to_le_bytes());
    header[10..14].copy_from_slice(&ny.to_le_bytes());
    header[14..22].copy_from_slice(&grid.side.to_le_bytes());
    header[22..30].copy_from_slice(&sample_index.to_le_bytes());
    w.write_all(&header)?;
    let mut payload = Vec::with_capacity(8 * values.len());
    for v in values.iter() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&payload)?;
    Ok(())
}

/// Writes the real and imaginary parts of `screen` as two records.
pub fn write_complex<W: Write>(w: &mut W, screen: &ComplexScreen) -> Result<()> {
    let base = screen.sample_index.checked_mul(2).ok_or_else(|| Error::argument("sample index too large"))?;
    write_record(w, &screen.grid, base, screen.real().view())?;
    write_record(w, &screen.grid, base + 1, screen.imag().view())
}

/// Reads the next record, or `None` at a clean end of stream.
pub fn read_record<R: Read>(r: &mut R) -> Result<Option<ScreenRecord>> {
    let mut header = [0u8; HEADER_LEN];
    let mut filled = 0;
    while filled < HEADER_LEN {
        match r.read(&mut header[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    if filled == 0 {
        return Ok(None);
    }
    if filled < HEADER_LEN {
        return Err(Error::Format(format!("truncated header ({filled} of {HEADER_LEN} bytes)")));
    }
    if header[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap()) as usize;
    let (nx, ny) = (word(6), word(10));
    let side = f64::from_le_bytes(header[14..22].try_into().unwrap());
    let sample_index = u64::from_le_bytes(header[22..30].try_into().unwrap());
    let grid = GridSpec::new(nx, ny, side).map_err(|e| Error::Format(format!("invalid header: {e}")))?;
    let mut payload = vec![0u8; 8 * nx * ny];
    r.read_exact(&mut payload).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Format("truncated payload".into()),
        _ => e.into(),
    })?;
    let data: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let values = Array2::from_shape_vec((ny, nx), data).expect("payload length matches header");
    Ok(Some(ScreenRecord { grid, sample_index, values }))
}

pub fn read_all<R: Read>(r: &mut R) -> Result<Vec<ScreenRecord>> {
    let mut out = Vec::new();
    while let Some(rec) = read_record(r)? {
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = GridSpec::new(3, 2, 0.75).unwrap();
        let values = Array2::from_shape_fn((2, 3), |(l, j)| {
            Complex64::new(1.0 / (1 + j + l) as f64, -f64::MIN_POSITIVE * j as f64)
        });
        let screen = ComplexScreen { grid, values, sample_index: 7 };
        let mut buf = Vec::new();
        write_complex(&mut buf, &screen).unwrap();
        assert_eq!(buf.len(), 2 * (HEADER_LEN + 6 * 8));
        assert_eq!(&buf[0..4], b"PHSC");
        let recs = read_all(&mut buf.as_slice()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].sample_index, 14);
        assert_eq!(recs[1].sample_index, 15);
        assert_eq!(recs[0].grid, grid);
        assert_eq!(recs[0].values, screen.real());
        assert_eq!(recs[1].values, screen.imag());
    }

    #[test]
    fn header_layout() {
        let grid = GridSpec::new(2, 1, 1.0).unwrap();
        let mut buf = Vec::new();
        write_record(&mut buf, &grid, 0x0102, Array2::zeros((1, 2)).view()).unwrap();
        assert_eq!(&buf[4..6], &[1, 0]);
        assert_eq!(&buf[6..10], &[2, 0, 0, 0]);
        assert_eq!(&buf[10..14], &[1, 0, 0, 0]);
        assert_eq!(&buf[14..22], &1.0f64.to_le_bytes());
        assert_eq!(&buf[22..30], &[2, 1, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&buf[30..32], &[0, 0]);
    }

    #[test]
    fn corrupt_input_is_reported() {
        let grid = GridSpec::new(2, 2, 1.0).unwrap();
        let mut buf = Vec::new();
        write_record(&mut buf, &grid, 0, Array2::zeros((2, 2)).view()).unwrap();
        assert!(matches!(read_record(&mut &buf[..20]), Err(Error::Format(_))));
        assert!(matches!(read_record(&mut &buf[..40]), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_record(&mut bad.as_slice()), Err(Error::Format(_))));
        assert!(read_record(&mut &[][..]).unwrap().is_none());
    }
}
