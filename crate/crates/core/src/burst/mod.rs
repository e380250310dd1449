//! Burst wire format for video frames.
//!
//! A frame of `size` data bytes travels as `ceil(size / 1247)` fragments.
//! Every fragment carries a 31-byte application header followed by 1247
//! bytes of data, the last one zero-padded, so each fragment's UDP payload
//! is exactly 1278 bytes (1320 bytes on the wire with 42 bytes of
//! UDP/IPv4/Ethernet overhead).
//!
//! Header layout, big-endian:
//!
//! | offset | size | field              |
//! |-------:|-----:|--------------------|
//! |      0 |    2 | magic `0x5852`     |
//! |      2 |    1 | version `1`        |
//! |      3 |    4 | frame_seq          |
//! |      7 |    2 | n_fragments        |
//! |      9 |    2 | frag_seq           |
//! |     11 |    4 | total_frame_size   |
//! |     15 |    4 | checksum (CRC-32)  |
//! |     19 |   12 | reserved, zero     |
//!
//! The checksum is CRC-32 (IEEE) over the frame's data bytes, padding
//! excluded.

mod ancillary;
mod fragment;
mod header;
mod reassembly;
mod stream_file;

pub use ancillary::{ancillary_packet_schedule, AncillaryStreamSpec, Direction};
pub use fragment::{
    fragment_count, fragment_data, fragment_frame, frame_data_for, udp_payload_bytes_unpadded,
    video_bytes_from_udp_payload, wire_packet_bytes, wire_payload_bytes, Fragment,
};
pub use header::{decode_header, encode_header, FragmentHeader};
pub use reassembly::{reassemble, ReassembledFrame, Reassembler};
pub use stream_file::{read_fragment_stream, write_fragment_stream, STREAM_MAGIC};

/// Application header length.
pub const HEADER_BYTES: usize = 31;
/// UDP payload of every fragment.
pub const FRAGMENT_PAYLOAD_BYTES: usize = 1278;
/// Frame data carried per fragment.
pub const DATA_BYTES_PER_FRAGMENT: usize = FRAGMENT_PAYLOAD_BYTES - HEADER_BYTES;
/// UDP + IPv4 + Ethernet overhead per packet.
pub const LINK_OVERHEAD_BYTES: usize = 42;
/// Full packet size on the wire.
pub const WIRE_PACKET_BYTES: usize = FRAGMENT_PAYLOAD_BYTES + LINK_OVERHEAD_BYTES;
pub const MAX_FRAGMENTS: usize = u16::MAX as usize;

pub const HEADER_MAGIC: u16 = 0x5852;
pub const HEADER_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BurstError {
    #[error("frame must hold at least one byte")]
    EmptyFrame,
    #[error("frame of {size} bytes needs more than {max} fragments")]
    FrameTooLarge { size: u64, max: usize },
    #[error("expected {expected} bytes, got {got}")]
    InvalidLength { expected: usize, got: usize },
    #[error("bad header magic {0:#06x}")]
    BadMagic(u16),
    #[error("unsupported header version {0}")]
    UnsupportedVersion(u8),
    #[error("no fragments supplied")]
    NoFragments,
    #[error("frame {frame_seq}: missing fragments {missing:?}")]
    MissingFragments { frame_seq: u32, missing: Vec<u16> },
    #[error("frame {frame_seq}: checksum mismatch (header {expected:#010x}, data {actual:#010x})")]
    ChecksumMismatch {
        frame_seq: u32,
        expected: u32,
        actual: u32,
    },
    #[error("inconsistent burst: {0}")]
    InconsistentBurst(String),
    #[error("fragment stream: {0}")]
    Stream(String),
}
