use super::header::{decode_header, encode_header, FragmentHeader};
use super::{
    BurstError, DATA_BYTES_PER_FRAGMENT, FRAGMENT_PAYLOAD_BYTES, HEADER_BYTES, MAX_FRAGMENTS,
    WIRE_PACKET_BYTES,
};
use crate::trace::FrameRecord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub header: FragmentHeader,
    /// Exactly [`DATA_BYTES_PER_FRAGMENT`] bytes: data, then zero padding.
    pub payload: Vec<u8>,
}

impl Fragment {
    /// Header followed by payload: always [`FRAGMENT_PAYLOAD_BYTES`] long.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRAGMENT_PAYLOAD_BYTES);
        out.extend_from_slice(&encode_header(&self.header));
        out.extend_from_slice(&self.payload);
        debug_assert_eq!(out.len(), FRAGMENT_PAYLOAD_BYTES);
        out
    }

    pub fn decode(buf: &[u8]) -> Result<Self, BurstError> {
        if buf.len() != FRAGMENT_PAYLOAD_BYTES {
            return Err(BurstError::InvalidLength {
                expected: FRAGMENT_PAYLOAD_BYTES,
                got: buf.len(),
            });
        }
        Ok(Self {
            header: decode_header(&buf[..HEADER_BYTES])?,
            payload: buf[HEADER_BYTES..].to_vec(),
        })
    }

    /// Number of real data bytes in this fragment (padding excluded).
    pub fn data_len(&self) -> usize {
        let start = self.header.frag_seq as usize * DATA_BYTES_PER_FRAGMENT;
        (self.header.total_frame_size as usize)
            .saturating_sub(start)
            .min(DATA_BYTES_PER_FRAGMENT)
    }
}

/// `ceil(size / 1247)`.
pub fn fragment_count(size: u64) -> u64 {
    size.div_ceil(DATA_BYTES_PER_FRAGMENT as u64)
}

/// UDP payload bytes of a frame's burst, padding included.
pub fn wire_payload_bytes(size: u64) -> u64 {
    fragment_count(size) * FRAGMENT_PAYLOAD_BYTES as u64
}

/// Packet bytes of a frame's burst including link overhead.
pub fn wire_packet_bytes(size: u64) -> u64 {
    fragment_count(size) * WIRE_PACKET_BYTES as u64
}

/// Video data bytes when a size counts unpadded UDP payload (headers
/// included) rather than pure video data.
pub fn video_bytes_from_udp_payload(udp_payload_bytes: u64) -> u64 {
    let n = udp_payload_bytes.div_ceil(FRAGMENT_PAYLOAD_BYTES as u64);
    udp_payload_bytes - n * HEADER_BYTES as u64
}

/// Inverse of [`video_bytes_from_udp_payload`]: data plus one header per
/// fragment, without padding.
pub fn udp_payload_bytes_unpadded(video_bytes: u64) -> u64 {
    video_bytes + fragment_count(video_bytes) * HEADER_BYTES as u64
}

/// Deterministic stand-in content for a frame that only has a size.
pub fn frame_data_for(frame: &FrameRecord) -> Vec<u8> {
    // splitmix64 keyed by the frame index
    let mut state = frame.index ^ 0x9e37_79b9_7f4a_7c15;
    let mut out = Vec::with_capacity(frame.size as usize + 8);
    while out.len() < frame.size as usize {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        out.extend_from_slice(&z.to_le_bytes());
    }
    out.truncate(frame.size as usize);
    out
}

/// Split `data` into a burst. The last fragment is zero-padded to full
/// length.
pub fn fragment_data(frame_seq: u32, data: &[u8]) -> Result<Vec<Fragment>, BurstError> {
    if data.is_empty() {
        return Err(BurstError::EmptyFrame);
    }
    let n = data.len().div_ceil(DATA_BYTES_PER_FRAGMENT);
    if n > MAX_FRAGMENTS {
        return Err(BurstError::FrameTooLarge {
            size: data.len() as u64,
            max: MAX_FRAGMENTS,
        });
    }
    let checksum = crc32fast::hash(data);
    Ok(data
        .chunks(DATA_BYTES_PER_FRAGMENT)
        .enumerate()
        .map(|(k, chunk)| {
            let mut payload = Vec::with_capacity(DATA_BYTES_PER_FRAGMENT);
            payload.extend_from_slice(chunk);
            payload.resize(DATA_BYTES_PER_FRAGMENT, 0);
            Fragment {
                header: FragmentHeader {
                    frame_seq,
                    n_fragments: n as u16,
                    frag_seq: k as u16,
                    total_frame_size: data.len() as u32,
                    checksum,
                },
                payload,
            }
        })
        .collect())
}

/// Fragment a trace frame, using [`frame_data_for`] as its content and the
/// low 32 bits of its index as the frame sequence number.
pub fn fragment_frame(frame: &FrameRecord) -> Result<Vec<Fragment>, BurstError> {
    if frame.size == 0 {
        return Err(BurstError::EmptyFrame);
    }
    if fragment_count(frame.size) > MAX_FRAGMENTS as u64 {
        return Err(BurstError::FrameTooLarge {
            size: frame.size,
            max: MAX_FRAGMENTS,
        });
    }
    fragment_data(frame.index as u32, &frame_data_for(frame))
}
