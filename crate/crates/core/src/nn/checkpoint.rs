//! Binary parameter checkpoints.
//!
//! Layout, little-endian:
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 8     | magic `SFCRLNN\0`                       |
//! | 4     | format version (u32, currently 1)       |
//! | 4     | trunk size count `k` (u32)              |
//! | 4·k   | input width then hidden widths (u32)    |
//! | 4     | action count (u32)                      |
//! | 8     | parameter count (u64)                   |
//! | 8·n   | parameters (f64)                        |

use std::path::Path;

use super::mlp::{Mlp, MlpShape};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SFCRLNN\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode(net: &Mlp) -> Vec<u8> {
    let shape = net.shape();
    let mut out = Vec::with_capacity(32 + 8 * net.params().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(shape.hidden.len() as u32 + 1).to_le_bytes());
    out.extend_from_slice(&(shape.input as u32).to_le_bytes());
    for &h in &shape.hidden {
        out.extend_from_slice(&(h as u32).to_le_bytes());
    }
    out.extend_from_slice(&(shape.actions as u32).to_le_bytes());
    out.extend_from_slice(&(net.params().len() as u64).to_le_bytes());
    for p in net.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        if self.bytes.len() < n {
            return Err("truncated".into());
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Mlp, String> {
    let mut r = Reader { bytes };
    if r.take(8)? != MAGIC {
        return Err("bad magic".into());
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(format!("unsupported format version {version}"));
    }
    let k = r.u32()? as usize;
    if k == 0 || k > 64 {
        return Err(format!("implausible layer count {k}"));
    }
    let sizes = (0..k).map(|_| r.u32().map(|s| s as usize)).collect::<std::result::Result<Vec<_>, _>>()?;
    let actions = r.u32()? as usize;
    let shape = MlpShape {
        input: sizes[0],
        hidden: sizes[1..].to_vec(),
        actions,
    };
    let n = r.u64()? as usize;
    if n != shape.parameter_count() {
        return Err(format!("parameter count {n} does not match shape ({})", shape.parameter_count()));
    }
    let raw = r.take(n.checked_mul(8).ok_or("overflow")?)?;
    if !r.bytes.is_empty() {
        return Err("trailing bytes".into());
    }
    let params = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Mlp::from_parts(shape, params).map_err(|e| e.to_string())
}

pub fn save(net: &Mlp, path: &Path) -> Result<()> {
    std::fs::write(path, encode(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Mlp> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|reason| Error::Checkpoint {
        path: path.to_path_buf(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RngStream;

    #[test]
    fn round_trip_is_bit_exact() {
        let net = Mlp::new(MlpShape::actor_critic(10, 12), &mut RngStream::new(9, 0));
        let back = decode(&encode(&net)).unwrap();
        assert_eq!(back.shape(), net.shape());
        assert!(back.params().iter().zip(net.params()).all(|(a, b)| a.to_bits() == b.to_bits()));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        save(&net, &path).unwrap();
        assert_eq!(load(&path).unwrap(), net);
    }

    #[test]
    fn corrupt_inputs() {
        let net = Mlp::zeros(MlpShape::actor_critic(2, 3));
        let bytes = encode(&net);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(decode(&extra).is_err());
        assert!(matches!(load(Path::new("/nonexistent/x.ckpt")), Err(Error::Io { .. })));
    }
}
