//! Binary matrix container.
//!
//! `PFM1` (transfer matrices): magic, `n: u32`, `fejer: u8`, `map_id: u64`,
//! then the `(2n+1)²` entries row-major as little-endian `(re, im)` f64 pairs.
//!
//! `SUB1` (subspace bases): magic, `n: u32`, `d: u32`, then the `(2n+1) × d`
//! orthonormal basis row-major in the same entry encoding.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grassmann::Subspace;
use crate::linalg::{CMat, C64};

use super::TransferMatrix;

const MATRIX_MAGIC: &[u8; 4] = b"PFM1";
const SUBSPACE_MAGIC: &[u8; 4] = b"SUB1";

fn write_entries<W: Write>(w: &mut W, m: &CMat) -> Result<()> {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_entries<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<CMat> {
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re = f64::from_le_bytes(read_array(r)?);
            let im = f64::from_le_bytes(read_array(r)?);
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<()> {
    let got: [u8; 4] = read_array(r)?;
    if &got != magic {
        return Err(Error::Container(format!("bad magic {:?}, expected {:?}", got, magic)));
    }
    Ok(())
}

pub fn write_matrix<W: Write>(w: &mut W, m: &TransferMatrix) -> Result<()> {
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&(m.order() as u32).to_le_bytes())?;
    w.write_all(&[u8::from(m.is_fejer())])?;
    w.write_all(&m.map_id().to_le_bytes())?;
    write_entries(w, m.matrix())
}

pub fn read_matrix<R: Read>(r: &mut R) -> Result<TransferMatrix> {
    expect_magic(r, MATRIX_MAGIC)?;
    let order = u32::from_le_bytes(read_array(r)?) as usize;
    let fejer = match read_array::<_, 1>(r)?[0] {
        0 => false,
        1 => true,
        b => return Err(Error::Container(format!("bad fejer flag {b}"))),
    };
    let map_id = u64::from_le_bytes(read_array(r)?);
    let dim = 2 * order + 1;
    let data = read_entries(r, dim, dim)?;
    TransferMatrix::from_parts(order, data, fejer, map_id)
}

pub fn write_subspace<W: Write>(w: &mut W, s: &Subspace) -> Result<()> {
    let b = s.basis();
    w.write_all(SUBSPACE_MAGIC)?;
    w.write_all(&(((b.nrows() - 1) / 2) as u32).to_le_bytes())?;
    w.write_all(&(b.ncols() as u32).to_le_bytes())?;
    write_entries(w, b)
}

pub fn read_subspace<R: Read>(r: &mut R) -> Result<Subspace> {
    expect_magic(r, SUBSPACE_MAGIC)?;
    let order = u32::from_le_bytes(read_array(r)?) as usize;
    let d = u32::from_le_bytes(read_array(r)?) as usize;
    Subspace::new(&read_entries(r, 2 * order + 1, d)?)
}
