use super::{BurstError, HEADER_BYTES, HEADER_MAGIC, HEADER_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FragmentHeader {
    pub frame_seq: u32,
    pub n_fragments: u16,
    pub frag_seq: u16,
    pub total_frame_size: u32,
    pub checksum: u32,
}

pub fn encode_header(h: &FragmentHeader) -> [u8; HEADER_BYTES] {
    let mut b = [0u8; HEADER_BYTES];
    b[0..2].copy_from_slice(&HEADER_MAGIC.to_be_bytes());
    b[2] = HEADER_VERSION;
    b[3..7].copy_from_slice(&h.frame_seq.to_be_bytes());
    b[7..9].copy_from_slice(&h.n_fragments.to_be_bytes());
    b[9..11].copy_from_slice(&h.frag_seq.to_be_bytes());
    b[11..15].copy_from_slice(&h.total_frame_size.to_be_bytes());
    b[15..19].copy_from_slice(&h.checksum.to_be_bytes());
    b
}

/// Reserved bytes are ignored on decode.
pub fn decode_header(buf: &[u8]) -> Result<FragmentHeader, BurstError> {
    if buf.len() != HEADER_BYTES {
        return Err(BurstError::InvalidLength {
            expected: HEADER_BYTES,
            got: buf.len(),
        });
    }
    let magic = u16::from_be_bytes([buf[0], buf[1]]);
    if magic != HEADER_MAGIC {
        return Err(BurstError::BadMagic(magic));
    }
    if buf[2] != HEADER_VERSION {
        return Err(BurstError::UnsupportedVersion(buf[2]));
    }
    Ok(FragmentHeader {
        frame_seq: u32::from_be_bytes(buf[3..7].try_into().unwrap()),
        n_fragments: u16::from_be_bytes(buf[7..9].try_into().unwrap()),
        frag_seq: u16::from_be_bytes(buf[9..11].try_into().unwrap()),
        total_frame_size: u32::from_be_bytes(buf[11..15].try_into().unwrap()),
        checksum: u32::from_be_bytes(buf[15..19].try_into().unwrap()),
    })
}
