//! Length-prefixed binary container for fragment streams.
//!
//! `b"XRFS"`, a version byte (`1`), then per fragment a big-endian `u32`
//! length followed by that many bytes of encoded fragment.

use std::io::{Read, Write};

use super::{BurstError, Fragment};

pub const STREAM_MAGIC: &[u8; 4] = b"XRFS";
const STREAM_VERSION: u8 = 1;

pub fn write_fragment_stream<W: Write>(mut w: W, fragments: &[Fragment]) -> std::io::Result<()> {
    w.write_all(STREAM_MAGIC)?;
    w.write_all(&[STREAM_VERSION])?;
    for f in fragments {
        let bytes = f.encode();
        w.write_all(&(bytes.len() as u32).to_be_bytes())?;
        w.write_all(&bytes)?;
    }
    w.flush()
}

pub fn read_fragment_stream<R: Read>(mut r: R) -> Result<Vec<Fragment>, BurstError> {
    let io = |e: std::io::Error| BurstError::Stream(e.to_string());
    let mut buf = Vec::new();
    r.read_to_end(&mut buf).map_err(io)?;
    if buf.len() < 5 || &buf[..4] != STREAM_MAGIC {
        return Err(BurstError::Stream("missing XRFS magic".into()));
    }
    if buf[4] != STREAM_VERSION {
        return Err(BurstError::Stream(format!("unsupported version {}", buf[4])));
    }
    let mut pos = 5;
    let mut out = Vec::new();
    while pos < buf.len() {
        if buf.len() - pos < 4 {
            return Err(BurstError::Stream("truncated length prefix".into()));
        }
        let len = u32::from_be_bytes(buf[pos..pos + 4].try_into().unwrap()) as usize;
        pos += 4;
        if buf.len() - pos < len {
            return Err(BurstError::Stream(format!(
                "record at byte {} claims {len} bytes, {} left",
                pos - 4,
                buf.len() - pos
            )));
        }
        out.push(Fragment::decode(&buf[pos..pos + len])?);
        pos += len;
    }
    Ok(out)
}
