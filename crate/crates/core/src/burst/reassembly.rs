use std::collections::BTreeMap;

use super::{BurstError, Fragment, DATA_BYTES_PER_FRAGMENT};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReassembledFrame {
    pub frame_seq: u32,
    pub data: Vec<u8>,
}

impl ReassembledFrame {
    pub fn size(&self) -> u64 {
        self.data.len() as u64
    }
}

/// Rebuild one frame from its fragments, in any order and with duplicates.
pub fn reassemble(fragments: &[Fragment]) -> Result<ReassembledFrame, BurstError> {
    let first = fragments.first().ok_or(BurstError::NoFragments)?.header;
    let n = first.n_fragments as usize;
    if n == 0 {
        return Err(BurstError::InconsistentBurst("n_fragments is zero".into()));
    }
    if (first.total_frame_size as usize).div_ceil(DATA_BYTES_PER_FRAGMENT) != n {
        return Err(BurstError::InconsistentBurst(format!(
            "total_frame_size {} does not need {} fragments",
            first.total_frame_size, n
        )));
    }
    let mut slots: Vec<Option<&[u8]>> = vec![None; n];
    for f in fragments {
        let h = f.header;
        if (h.frame_seq, h.n_fragments, h.total_frame_size, h.checksum)
            != (
                first.frame_seq,
                first.n_fragments,
                first.total_frame_size,
                first.checksum,
            )
        {
            return Err(BurstError::InconsistentBurst(format!(
                "fragment {} disagrees with the burst header",
                h.frag_seq
            )));
        }
        if h.frag_seq as usize >= n {
            return Err(BurstError::InconsistentBurst(format!(
                "frag_seq {} >= n_fragments {}",
                h.frag_seq, n
            )));
        }
        if f.payload.len() != DATA_BYTES_PER_FRAGMENT {
            return Err(BurstError::InvalidLength {
                expected: DATA_BYTES_PER_FRAGMENT,
                got: f.payload.len(),
            });
        }
        let slot = &mut slots[h.frag_seq as usize];
        match slot {
            Some(prev) if *prev != f.payload.as_slice() => {
                return Err(BurstError::InconsistentBurst(format!(
                    "duplicate fragment {} with different payload",
                    h.frag_seq
                )))
            }
            _ => *slot = Some(&f.payload),
        }
    }
    let missing: Vec<u16> = slots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(k, _)| k as u16)
        .collect();
    if !missing.is_empty() {
        return Err(BurstError::MissingFragments {
            frame_seq: first.frame_seq,
            missing,
        });
    }
    let total = first.total_frame_size as usize;
    let mut data = Vec::with_capacity(total);
    for (k, slot) in slots.iter().enumerate() {
        let len = (total - k * DATA_BYTES_PER_FRAGMENT).min(DATA_BYTES_PER_FRAGMENT);
        data.extend_from_slice(&slot.unwrap()[..len]);
    }
    let actual = crc32fast::hash(&data);
    if actual != first.checksum {
        return Err(BurstError::ChecksumMismatch {
            frame_seq: first.frame_seq,
            expected: first.checksum,
            actual,
        });
    }
    Ok(ReassembledFrame {
        frame_seq: first.frame_seq,
        data,
    })
}

/// Per-flow reassembly buffer keyed by frame sequence number. Single
/// owner; callers serialize access per flow.
#[derive(Debug, Default)]
pub struct Reassembler {
    pending: BTreeMap<u32, Vec<Fragment>>,
}

impl Reassembler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Buffer a fragment. Returns the frame once every fragment index of
    /// its burst has been seen.
    pub fn push(&mut self, fragment: Fragment) -> Result<Option<ReassembledFrame>, BurstError> {
        let seq = fragment.header.frame_seq;
        let n = fragment.header.n_fragments as usize;
        let buf = self.pending.entry(seq).or_default();
        buf.push(fragment);
        let mut seen = vec![false; n];
        for f in buf.iter() {
            if let Some(s) = seen.get_mut(f.header.frag_seq as usize) {
                *s = true;
            }
        }
        if n == 0 || seen.iter().all(|&s| s) {
            let frags = self.pending.remove(&seq).unwrap_or_default();
            return reassemble(&frags).map(Some);
        }
        Ok(None)
    }

    /// Frame sequence numbers still waiting for fragments.
    pub fn pending(&self) -> Vec<u32> {
        self.pending.keys().copied().collect()
    }

    /// Drop an incomplete burst, reporting what it lacked.
    pub fn evict(&mut self, frame_seq: u32) -> Option<BurstError> {
        let frags = self.pending.remove(&frame_seq)?;
        reassemble(&frags).err()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{fragment_data, fragment_frame};
    use super::*;
    use crate::trace::FrameRecord;

    fn burst(size: u64) -> (Vec<u8>, Vec<Fragment>) {
        let frame = FrameRecord {
            index: 42,
            timestamp: 0.0,
            size,
        };
        let data = super::super::frame_data_for(&frame);
        (data, fragment_frame(&frame).unwrap())
    }

    #[test]
    fn shuffled_round_trip() {
        let (data, mut frags) = burst(5000);
        frags.reverse();
        frags.swap(0, 2);
        let out = reassemble(&frags).unwrap();
        assert_eq!(out.data, data);
        assert_eq!(out.frame_seq, 42);
        assert_eq!(out.size(), 5000);
    }

    #[test]
    fn duplicates_are_tolerated() {
        let (data, frags) = burst(3000);
        let mut dup = frags.clone();
        dup.extend(frags.iter().cloned());
        dup.push(frags[1].clone());
        assert_eq!(reassemble(&dup).unwrap().data, data);
    }

    #[test]
    fn missing_fragment_is_reported() {
        let (_, mut frags) = burst(3000);
        assert_eq!(frags.len(), 3);
        frags.remove(1);
        assert_eq!(
            reassemble(&frags),
            Err(BurstError::MissingFragments {
                frame_seq: 42,
                missing: vec![1]
            })
        );
    }

    #[test]
    fn flipped_byte_is_detected() {
        let (_, mut frags) = burst(3000);
        frags[2].payload[10] ^= 0x40;
        assert!(matches!(
            reassemble(&frags),
            Err(BurstError::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn every_single_byte_error_changes_crc() {
        let data: Vec<u8> = (0..64u8).collect();
        let base = crc32fast::hash(&data);
        for pos in 0..data.len() {
            for e in 1..=255u8 {
                let mut d = data.clone();
                d[pos] ^= e;
                assert_ne!(crc32fast::hash(&d), base, "pos {pos} xor {e}");
            }
        }
    }

    #[test]
    fn padding_is_not_checksummed() {
        let (data, mut frags) = burst(1248);
        frags[1].payload[500] = 0xff;
        assert_eq!(reassemble(&frags).unwrap().data, data);
    }

    #[test]
    fn conflicting_headers() {
        let (_, mut frags) = burst(3000);
        frags[1].header.total_frame_size = 2999;
        assert!(matches!(
            reassemble(&frags),
            Err(BurstError::InconsistentBurst(_))
        ));
        let (_, mut frags) = burst(3000);
        let mut other = frags[0].clone();
        other.payload[0] ^= 1;
        frags.push(other);
        assert!(matches!(
            reassemble(&frags),
            Err(BurstError::InconsistentBurst(_))
        ));
        assert_eq!(reassemble(&[]), Err(BurstError::NoFragments));
    }

    #[test]
    fn reassembler_completes_interleaved_bursts() {
        let a = fragment_data(1, &[7u8; 2600]).unwrap();
        let b = fragment_data(2, &[9u8; 1300]).unwrap();
        let mut r = Reassembler::new();
        let mut done = Vec::new();
        for f in [&a[2], &b[1], &a[0], &b[0], &a[1]] {
            if let Some(frame) = r.push(f.clone()).unwrap() {
                done.push(frame.frame_seq);
            }
        }
        assert_eq!(done, vec![2, 1]);
        assert!(r.pending().is_empty());

        r.push(a[0].clone()).unwrap();
        assert_eq!(r.pending(), vec![1]);
        assert!(matches!(
            r.evict(1),
            Some(BurstError::MissingFragments { .. })
        ));
    }
}
