use std::io::{Read, Write};
use std::path::Path;

use crate::dynamics::State;
use crate::error::ElhError;
use crate::spectral::inverse;

/// `ELHSNAP\0` zero-padded to 16 bytes.
pub const SNAPSHOT_MAGIC: [u8; 16] = *b"ELHSNAP\0\0\0\0\0\0\0\0\0";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Real-space fields read back from a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub version: u32,
    pub dim: u32,
    pub n: u32,
    pub ncomp: u32,
    pub t: f64,
    /// Components back to back, each `n^dim` samples in row-major order.
    pub data: Vec<f64>,
}

pub fn write_snapshot(mut out: impl Write, s: &State) -> Result<(), ElhError> {
    let g = s.grid();
    let fields = [inverse(&s.u), inverse(&s.d), inverse(&s.w)];
    let ncomp: usize = fields.iter().map(|f| f.ncomp()).sum();
    out.write_all(&SNAPSHOT_MAGIC)?;
    for v in [SNAPSHOT_VERSION, g.dim() as u32, g.n() as u32, ncomp as u32] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&s.t.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * ncomp * g.len());
    for f in &fields {
        for x in f.data() {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn save_snapshot(path: &Path, s: &State) -> Result<(), ElhError> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_snapshot(&mut w, s)?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(mut input: impl Read) -> Result<Snapshot, ElhError> {
    let mut magic = [0u8; 16];
    input.read_exact(&mut magic)?;
    if magic != SNAPSHOT_MAGIC {
        return Err(ElhError::Format("not a snapshot file (bad magic)".into()));
    }
    let mut word = [0u8; 4];
    let mut header = [0u32; 4];
    for h in header.iter_mut() {
        input.read_exact(&mut word)?;
        *h = u32::from_le_bytes(word);
    }
    let [version, dim, n, ncomp] = header;
    if version != SNAPSHOT_VERSION {
        return Err(ElhError::Format(format!("unsupported snapshot version {version}")));
    }
    if !(2..=3).contains(&dim) {
        return Err(ElhError::Format(format!("invalid dimension {dim}")));
    }
    let mut eight = [0u8; 8];
    input.read_exact(&mut eight)?;
    let t = f64::from_le_bytes(eight);
    let count = (ncomp as usize) * (n as usize).pow(dim);
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * count {
        return Err(ElhError::Format(format!(
            "expected {} payload bytes, found {}",
            8 * count,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(Snapshot {
        version,
        dim,
        n,
        ncomp,
        t,
        data,
    })
}
