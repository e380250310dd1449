use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use super::link::{FlowSpec, LinkSpec, QueueDiscipline};
use super::percentile::percentile_sorted;
use super::NetsimError;
use crate::burst::{ancillary_packet_schedule, DATA_BYTES_PER_FRAGMENT};
use crate::model::{synthesize_with_rng, ModelError};
use crate::rng::{flow_stream, XrRng, OFFSET_STREAM};

/// Video data bytes (padding and headers excluded) of one flow at the
/// horizon. `generated == delivered + queued + dropped` always holds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteLedger {
    pub generated: u64,
    /// Carried by fragments whose transmission completed.
    pub delivered: u64,
    /// Waiting or in transmission at the horizon.
    pub queued: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowMetrics {
    pub flow: usize,
    pub app: String,
    pub fps: u32,
    pub target_rate_bps: f64,
    pub start_offset_s: f64,
    /// Video bytes of fully delivered frames over the flow's active time
    /// (horizon minus start offset), in bit/s.
    pub avg_throughput_bps: f64,
    pub avg_frame_delay_s: f64,
    pub p95_frame_delay_s: f64,
    pub median_frame_delay_s: f64,
    pub min_frame_delay_s: f64,
    pub max_frame_delay_s: f64,
    pub frames_generated: u64,
    pub frames_delivered: u64,
    /// Frames that lost at least one fragment to queue overflow.
    pub frames_dropped: u64,
    /// Peak number of this flow's fragments waiting (excluding the one in
    /// transmission).
    pub max_queue: usize,
    /// Mean delay of frames generated in the second half of the flow's
    /// active time over that of the first half; well above 1 when the queue
    /// diverges.
    pub delay_trend: f64,
    pub bytes: ByteLedger,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStats {
    /// Time spent transmitting up to the horizon.
    pub busy_ns: u64,
    pub packets_sent: u64,
    /// Largest total backlog in packets.
    pub max_backlog: usize,
    /// Time the link sat idle while packets were waiting; zero for a
    /// work-conserving server.
    pub idle_with_backlog_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub horizon_ns: u64,
    pub flows: Vec<FlowMetrics>,
    pub link: LinkStats,
}

#[derive(Debug, Clone, Copy)]
enum ArrivalKind {
    Frame { size: u64 },
    Ancillary { payload: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Arrival {
    at_ns: u64,
    kind: ArrivalKind,
}

/// Packets of one burst still waiting for the link.
struct Burst {
    flow: usize,
    generated_ns: u64,
    /// `None` for ancillary packets.
    frame_size: Option<u64>,
    next: u64,
    /// Packets admitted to the queue.
    admitted: u64,
    /// Whether every packet of the burst was admitted.
    whole: bool,
    service_ns: u64,
}

impl Burst {
    fn data_bytes(&self, k: u64) -> u64 {
        match self.frame_size {
            Some(size) => (size - k * DATA_BYTES_PER_FRAGMENT as u64).min(DATA_BYTES_PER_FRAGMENT as u64),
            None => 0,
        }
    }
}

struct InService {
    flow: usize,
    data_bytes: u64,
    started_ns: u64,
    /// Generation instant of a frame this packet completes.
    completes_frame: Option<(u64, u64)>,
}

#[derive(Debug, Default)]
struct FlowState {
    arrivals: Vec<Arrival>,
    queued_packets: usize,
    max_queue: usize,
    frames_generated: u64,
    frames_dropped: u64,
    bytes: ByteLedger,
    /// (generation ns, delay ns, frame bytes) of fully delivered frames.
    delivered: Vec<(u64, u64, u64)>,
}

enum Queues {
    Fifo(VecDeque<Burst>),
    RoundRobin { queues: Vec<VecDeque<Burst>>, cursor: usize },
}

impl Queues {
    fn push(&mut self, b: Burst) {
        match self {
            Queues::Fifo(q) => q.push_back(b),
            Queues::RoundRobin { queues, .. } => queues[b.flow].push_back(b),
        }
    }

    /// Take the next packet to transmit: head of the shared queue, or the
    /// head of the next non-empty flow queue after the last one served.
    fn pop_packet(&mut self) -> Option<Packet> {
        let q = match self {
            Queues::Fifo(q) => q,
            Queues::RoundRobin { queues, cursor } => {
                let n = queues.len();
                let i = (0..n).map(|k| (*cursor + k) % n).find(|&i| !queues[i].is_empty())?;
                *cursor = (i + 1) % n;
                &mut queues[i]
            }
        };
        let b = q.front_mut()?;
        let k = b.next;
        b.next += 1;
        let last = b.next == b.admitted;
        let p = Packet {
            flow: b.flow,
            data_bytes: b.data_bytes(k),
            service_ns: b.service_ns,
            completes_frame: match b.frame_size {
                Some(size) if last && b.whole => Some((b.generated_ns, size)),
                _ => None,
            },
        };
        if last {
            q.pop_front();
        }
        Some(p)
    }
}

struct Packet {
    flow: usize,
    data_bytes: u64,
    service_ns: u64,
    completes_frame: Option<(u64, u64)>,
}

fn secs_to_ns(s: f64) -> u64 {
    (s * 1e9).round() as u64
}

fn start_offsets(flows: &[FlowSpec], seed: u64) -> Result<Vec<f64>, NetsimError> {
    let mut rng = XrRng::new(seed, OFFSET_STREAM);
    flows
        .iter()
        .enumerate()
        .map(|(i, f)| {
            // Always draw so that fixing one offset leaves the others intact.
            let drawn = rng.unit();
            let off = f.start_offset.unwrap_or(drawn);
            if (0.0..1.0).contains(&off) {
                Ok(off)
            } else {
                Err(NetsimError::InvalidStartOffset { flow: i, offset: off })
            }
        })
        .collect()
}

fn build_arrivals(
    flow: &FlowSpec,
    index: usize,
    offset_s: f64,
    duration_s: f64,
    seed: u64,
) -> Result<Vec<Arrival>, NetsimError> {
    let active = duration_s - offset_s;
    let mut arrivals = Vec::new();
    if active <= 0.0 {
        return Ok(arrivals);
    }
    let config = flow.stream.clone().with_duration(active).with_seed(seed);
    let mut rng = XrRng::new(seed, flow_stream(index));
    match synthesize_with_rng(&config, &mut rng) {
        Ok(trace) => arrivals.extend(trace.frames.iter().map(|f| Arrival {
            at_ns: secs_to_ns(offset_s + f.timestamp),
            kind: ArrivalKind::Frame { size: f.size },
        })),
        Err(ModelError::EmptyTrace { .. }) => {}
        Err(source) => return Err(NetsimError::Flow { flow: index, source }),
    }
    for spec in &flow.ancillary {
        if !(spec.mean_rate_bps > 0.0 && spec.packet_payload > 0) {
            continue;
        }
        arrivals.extend(
            ancillary_packet_schedule(spec, active)
                .into_iter()
                .map(|(t, payload)| Arrival {
                    at_ns: secs_to_ns(offset_s + t),
                    kind: ArrivalKind::Ancillary { payload },
                }),
        );
    }
    // Stable: frames precede ancillary packets due at the same instant.
    arrivals.sort_by_key(|a| a.at_ns);
    Ok(arrivals)
}

const DEPARTURE: u8 = 0;
const ARRIVAL: u8 = 1;

/// Run one simulation and return per-flow metrics.
///
/// Flow `i` draws its trace from substream `i + 1` of `seed` and its start
/// offset, unless fixed, from a dedicated offset substream; the flows' own
/// `StreamConfig` seeds and durations are not used.
pub fn run_simulation(
    link: &LinkSpec,
    flows: &[FlowSpec],
    duration_s: f64,
    seed: u64,
) -> Result<Vec<FlowMetrics>, NetsimError> {
    simulate(link, flows, duration_s, seed).map(|o| o.flows)
}

/// [`run_simulation`] with link statistics and byte accounting.
pub fn simulate(
    link: &LinkSpec,
    flows: &[FlowSpec],
    duration_s: f64,
    seed: u64,
) -> Result<SimOutcome, NetsimError> {
    if flows.is_empty() {
        return Err(NetsimError::NoFlows);
    }
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(NetsimError::InvalidDuration(duration_s));
    }
    link.validate()?;
    for (i, f) in flows.iter().enumerate() {
        f.stream
            .validate()
            .map_err(|source| NetsimError::Flow { flow: i, source })?;
    }

    let horizon_ns = secs_to_ns(duration_s);
    let offsets = start_offsets(flows, seed)?;
    let mut state: Vec<FlowState> = flows
        .iter()
        .enumerate()
        .map(|(i, f)| {
            Ok(FlowState {
                arrivals: build_arrivals(f, i, offsets[i], duration_s, seed)?,
                ..FlowState::default()
            })
        })
        .collect::<Result<_, NetsimError>>()?;

    let video_ns = link.video_fragment_time_ns();
    let limit = link.queue_limit;
    let mut queues = match link.queue_discipline {
        QueueDiscipline::Fifo => Queues::Fifo(VecDeque::new()),
        QueueDiscipline::RoundRobinPerFlow => Queues::RoundRobin {
            queues: (0..flows.len()).map(|_| VecDeque::new()).collect(),
            cursor: 0,
        },
    };
    let mut total_queued = 0usize;
    let mut in_service: Option<InService> = None;
    let mut stats = LinkStats::default();

    // (time, class, flow, sequence): departures sort ahead of arrivals at
    // the same instant; only the next arrival of each flow is scheduled.
    let mut events: BinaryHeap<Reverse<(u64, u8, usize, usize)>> = BinaryHeap::new();
    for (i, s) in state.iter().enumerate() {
        if let Some(a) = s.arrivals.first() {
            events.push(Reverse((a.at_ns, ARRIVAL, i, 0)));
        }
    }

    let start_next = |now: u64,
                      queues: &mut Queues,
                      state: &mut [FlowState],
                      total_queued: &mut usize,
                      stats: &mut LinkStats,
                      events: &mut BinaryHeap<Reverse<(u64, u8, usize, usize)>>|
     -> Option<InService> {
        let p = queues.pop_packet()?;
        *total_queued -= 1;
        state[p.flow].queued_packets -= 1;
        stats.packets_sent += 1;
        events.push(Reverse((now + p.service_ns, DEPARTURE, p.flow, 0)));
        Some(InService {
            flow: p.flow,
            data_bytes: p.data_bytes,
            started_ns: now,
            completes_frame: p.completes_frame,
        })
    };

    let mut last_event_ns = 0u64;
    while let Some(&Reverse((now, class, flow, seq))) = events.peek() {
        if now > horizon_ns {
            break;
        }
        events.pop();
        if in_service.is_none() && total_queued > 0 {
            stats.idle_with_backlog_ns += now - last_event_ns;
        }
        last_event_ns = now;
        if class == DEPARTURE {
            let done = in_service.take().expect("departure without a packet in service");
            stats.busy_ns += now - done.started_ns;
            let st = &mut state[done.flow];
            st.bytes.queued -= done.data_bytes;
            st.bytes.delivered += done.data_bytes;
            if let Some((gen_ns, size)) = done.completes_frame {
                st.delivered.push((gen_ns, now - gen_ns, size));
            }
        } else {
            let st = &mut state[flow];
            let a = st.arrivals[seq];
            if let Some(next) = st.arrivals.get(seq + 1) {
                events.push(Reverse((next.at_ns, ARRIVAL, flow, seq + 1)));
            }
            let (packets, frame_size, service_ns) = match a.kind {
                ArrivalKind::Frame { size } => {
                    st.frames_generated += 1;
                    st.bytes.generated += size;
                    (size.div_ceil(DATA_BYTES_PER_FRAGMENT as u64), Some(size), video_ns)
                }
                ArrivalKind::Ancillary { payload } => {
                    (1, None, link.service_time_ns(payload as usize))
                }
            };
            let occupied = match link.queue_discipline {
                QueueDiscipline::Fifo => total_queued,
                QueueDiscipline::RoundRobinPerFlow => st.queued_packets,
            };
            let room = if limit == 0 {
                u64::MAX
            } else {
                limit.saturating_sub(occupied) as u64
            };
            let admitted = packets.min(room);
            let burst = Burst {
                flow,
                generated_ns: a.at_ns,
                frame_size,
                next: 0,
                admitted,
                whole: admitted == packets,
                service_ns,
            };
            let admitted_bytes: u64 = (0..admitted).map(|k| burst.data_bytes(k)).sum();
            if let Some(size) = frame_size {
                st.bytes.queued += admitted_bytes;
                st.bytes.dropped += size - admitted_bytes;
                if !burst.whole {
                    st.frames_dropped += 1;
                }
            }
            if admitted > 0 {
                st.queued_packets += admitted as usize;
                st.max_queue = st.max_queue.max(st.queued_packets);
                total_queued += admitted as usize;
                stats.max_backlog = stats.max_backlog.max(total_queued);
                queues.push(burst);
            }
        }
        if in_service.is_none() {
            in_service = start_next(
                now,
                &mut queues,
                &mut state,
                &mut total_queued,
                &mut stats,
                &mut events,
            );
        }
    }
    if let Some(p) = &in_service {
        stats.busy_ns += horizon_ns - p.started_ns.min(horizon_ns);
    }

    let flows_out = flows
        .iter()
        .zip(state)
        .zip(offsets)
        .enumerate()
        .map(|(i, ((spec, st), off))| {
            flow_metrics(i, spec, st, off, duration_s)
        })
        .collect();
    Ok(SimOutcome {
        horizon_ns,
        flows: flows_out,
        link: stats,
    })
}

fn flow_metrics(
    index: usize,
    spec: &FlowSpec,
    st: FlowState,
    offset_s: f64,
    duration_s: f64,
) -> FlowMetrics {
    let active = duration_s - offset_s;
    let mut delays: Vec<f64> = st.delivered.iter().map(|d| d.1 as f64 * 1e-9).collect();
    let delivered_bytes: u64 = st.delivered.iter().map(|d| d.2).sum();
    let n = delays.len();
    // Summed in whole nanoseconds so equal delays average exactly.
    let total_ns: u128 = st.delivered.iter().map(|d| d.1 as u128).sum();
    let avg = if n == 0 {
        0.0
    } else {
        total_ns as f64 / n as f64 * 1e-9
    };

    let mid_ns = secs_to_ns(offset_s + 0.5 * active);
    let half_mean = |first: bool| {
        let v: Vec<f64> = st
            .delivered
            .iter()
            .filter(|d| (d.0 < mid_ns) == first)
            .map(|d| d.1 as f64)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let delay_trend = match (half_mean(true), half_mean(false)) {
        (Some(a), Some(b)) if a > 0.0 => b / a,
        _ => 1.0,
    };

    delays.sort_by(f64::total_cmp);
    let pct = |p| if n == 0 { 0.0 } else { percentile_sorted(&delays, p) };
    FlowMetrics {
        flow: index,
        app: spec.stream.profile.name.clone(),
        fps: spec.stream.frame_rate.fps(),
        target_rate_bps: spec.stream.target_rate_bps,
        start_offset_s: offset_s,
        avg_throughput_bps: if active > 0.0 {
            8.0 * delivered_bytes as f64 / active
        } else {
            0.0
        },
        avg_frame_delay_s: avg,
        p95_frame_delay_s: pct(95.0),
        median_frame_delay_s: pct(50.0),
        min_frame_delay_s: delays.first().copied().unwrap_or(0.0),
        max_frame_delay_s: delays.last().copied().unwrap_or(0.0),
        frames_generated: st.frames_generated,
        frames_delivered: n as u64,
        frames_dropped: st.frames_dropped,
        max_queue: st.max_queue,
        delay_trend,
        bytes: st.bytes,
    }
}
