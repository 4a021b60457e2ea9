//! Trajectory file format.
//!
//! Binary, little-endian:
//!
//! ```text
//! magic "STKJ1" | u32 d | u64 N | f64 dt | f64 beta | f64 gamma | u64 seed
//! | u32 tag_len | tag bytes (UTF-8 generator tag)
//! | (N + 1) * d f64 states, row-major
//! ```
//!
//! plus a CSV export (`t,x1,..,xd`) for quick inspection.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use crate::simulate::Trajectory;

pub const MAGIC: &[u8; 5] = b"STKJ1";

#[derive(Debug, Error)]
pub enum TrajFileError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: not a trajectory file")]
    BadMagic,
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("non-finite state value at index {0}")]
    NonFinite(usize),
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), TrajFileError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(traj.d as u32)?;
    w.write_u64::<LittleEndian>(traj.n_steps() as u64)?;
    w.write_f64::<LittleEndian>(traj.dt)?;
    w.write_f64::<LittleEndian>(traj.beta)?;
    w.write_f64::<LittleEndian>(traj.gamma)?;
    w.write_u64::<LittleEndian>(traj.seed)?;
    let tag = traj.generator.as_bytes();
    w.write_u32::<LittleEndian>(tag.len() as u32)?;
    w.write_all(tag)?;
    for &x in &traj.states {
        w.write_f64::<LittleEndian>(x)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory, TrajFileError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TrajFileError::BadMagic);
    }
    let d = r.read_u32::<LittleEndian>()? as usize;
    let n = r.read_u64::<LittleEndian>()? as usize;
    let dt = r.read_f64::<LittleEndian>()?;
    let beta = r.read_f64::<LittleEndian>()?;
    let gamma = r.read_f64::<LittleEndian>()?;
    let seed = r.read_u64::<LittleEndian>()?;
    let tag_len = r.read_u32::<LittleEndian>()? as usize;
    if d == 0 {
        return Err(TrajFileError::CorruptHeader("dimension 0".into()));
    }
    if tag_len > 4096 {
        return Err(TrajFileError::CorruptHeader(format!("tag length {tag_len}")));
    }
    let mut tag = vec![0u8; tag_len];
    r.read_exact(&mut tag)?;
    let generator = String::from_utf8(tag)
        .map_err(|e| TrajFileError::CorruptHeader(format!("tag not UTF-8: {e}")))?;
    let count = (n + 1) * d;
    let mut states = vec![0.0f64; count];
    r.read_f64_into::<LittleEndian>(&mut states)?;
    if let Some(i) = states.iter().position(|v| !v.is_finite()) {
        return Err(TrajFileError::NonFinite(i));
    }
    Ok(Trajectory { d, dt, beta, gamma, seed, generator, states })
}

/// CSV export with header `t,x1,..,xd`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), TrajFileError> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "t")?;
    for i in 1..=traj.d {
        write!(w, ",x{i}")?;
    }
    writeln!(w)?;
    for (l, row) in traj.states.chunks_exact(traj.d).enumerate() {
        write!(w, "{}", l as f64 * traj.dt)?;
        for x in row {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
