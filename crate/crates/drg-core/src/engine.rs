//! Deterministic discrete-event engine: a virtual clock plus timer
//! scheduling and cancellation under a total (fire_time, sequence) order.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

/// Opaque reference to a scheduled event. Cancelling is idempotent and a
/// fired handle can no longer be cancelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimerHandle(u64);

impl TimerHandle {
    /// Monotone insertion sequence; also the tie-breaker for equal times.
    pub fn sequence(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TimerState {
    Pending,
    Cancelled,
}

struct Entry<P> {
    time: f64,
    seq: u64,
    payload: P,
}

impl<P> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<P> Eq for Entry<P> {}

impl<P> Ord for Entry<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed so the BinaryHeap pops the earliest (time, seq) first;
        // times are asserted finite at scheduling so the unwrap cannot fail
        other
            .time
            .partial_cmp(&self.time)
            .unwrap()
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
impl<P> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Event queue with a virtual clock in seconds. `P` is the payload
/// dispatched back to the owner; the engine itself never interprets it.
pub struct Engine<P> {
    clock: f64,
    next_seq: u64,
    heap: BinaryHeap<Entry<P>>,
    state: HashMap<u64, TimerState>,
    pending: usize,
}

impl<P> Engine<P> {
    pub fn new() -> Self {
        Engine {
            clock: 0.0,
            next_seq: 0,
            heap: BinaryHeap::new(),
            state: HashMap::new(),
            pending: 0,
        }
    }

    /// Current virtual time in seconds.
    pub fn now(&self) -> f64 {
        self.clock
    }

    /// Number of scheduled events that are neither fired nor cancelled.
    pub fn pending_count(&self) -> usize {
        self.pending
    }

    /// Schedules an event `delay` seconds from now.
    pub fn schedule_in(&mut self, delay: f64, payload: P) -> TimerHandle {
        assert!(
            delay >= 0.0 && delay.is_finite(),
            "event delay must be finite and nonnegative, got {delay}"
        );
        self.schedule_at(self.clock + delay, payload)
    }

    /// Schedules an event at absolute time `time` (>= now).
    pub fn schedule_at(&mut self, time: f64, payload: P) -> TimerHandle {
        assert!(
            time >= self.clock && time.is_finite(),
            "event time {time} precedes clock {}",
            self.clock
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { time, seq, payload });
        self.state.insert(seq, TimerState::Pending);
        self.pending += 1;
        TimerHandle(seq)
    }

    /// Cancels a scheduled event. Returns true iff the event had not fired
    /// and was not already cancelled; cancelled events never dispatch.
    pub fn cancel(&mut self, h: TimerHandle) -> bool {
        match self.state.get_mut(&h.0) {
            Some(s @ TimerState::Pending) => {
                *s = TimerState::Cancelled;
                self.pending -= 1;
                true
            }
            _ => false,
        }
    }

    /// Pops the earliest pending event with fire_time <= until, advancing
    /// the clock to its time. When none remains the clock advances to
    /// `until` and None is returned.
    pub fn pop_due(&mut self, until: f64) -> Option<(f64, P)> {
        while let Some(top) = self.heap.peek() {
            if top.time > until {
                break;
            }
            let entry = self.heap.pop().unwrap();
            let state = self.state.remove(&entry.seq);
            match state {
                Some(TimerState::Pending) => {
                    debug_assert!(entry.time >= self.clock, "clock must be monotone");
                    self.clock = entry.time;
                    self.pending -= 1;
                    return Some((entry.time, entry.payload));
                }
                _ => continue,
            }
        }
        if until > self.clock {
            self.clock = until;
        }
        None
    }

    /// Dispatches every event with fire_time <= until through `handler`,
    /// in (fire_time, sequence) order; afterwards the clock equals `until`.
    pub fn run(&mut self, until: f64, mut handler: impl FnMut(&mut Self, f64, P)) {
        assert!(until >= self.clock, "run target precedes clock");
        while let Some((time, payload)) = self.pop_due(until) {
            handler(self, time, payload);
        }
    }

    /// Removes and returns all still-pending events in fire order. Used by
    /// tests to inspect what would have run after a simulation ends.
    pub fn drain_pending(&mut self) -> Vec<(f64, P)> {
        let mut out = Vec::with_capacity(self.pending);
        while let Some(entry) = self.heap.pop() {
            if let Some(TimerState::Pending) = self.state.remove(&entry.seq) {
                self.pending -= 1;
                out.push((entry.time, entry.payload));
            }
        }
        out
    }
}

impl<P> Default for Engine<P> {
    fn default() -> Self {
        Self::new()
    }
}
