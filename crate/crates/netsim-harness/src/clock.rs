//! Event-stepped virtual time. Nothing in a scenario sleeps or reads the
//! wall clock: time is a number that jumps from one scheduled event to the
//! next, which is why multi-day runs finish in milliseconds and replay
//! byte-identically.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Simulation time in whole milliseconds since the scenario epoch.
/// Integer internally so the event queue needs no float ordering caveats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimInstant(pub u64);

impl SimInstant {
    pub fn from_seconds(s: f64) -> Self {
        SimInstant((s * 1000.0).round() as u64)
    }

    pub fn as_seconds(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn plus_seconds(self, s: f64) -> Self {
        SimInstant(self.0 + (s * 1000.0).round() as u64)
    }
}

/// Priority queue of `(time, participant, insertion sequence)` → event.
/// The total order (time, then participant index, then insertion order) is
/// what pins cross-participant interleaving.
#[derive(Debug)]
pub struct EventQueue<E> {
    heap: BinaryHeap<Reverse<(SimInstant, u32, u64, EventSlot<E>)>>,
    seq: u64,
}

/// Wrapper carrying the payload without affecting the ordering.
#[derive(Debug)]
struct EventSlot<E>(E);

impl<E> PartialEq for EventSlot<E> {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl<E> Eq for EventSlot<E> {}
impl<E> PartialOrd for EventSlot<E> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> Ord for EventSlot<E> {
    fn cmp(&self, _: &Self) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            seq: 0,
        }
    }

    pub fn schedule(&mut self, at: SimInstant, participant: u32, event: E) {
        self.seq += 1;
        self.heap.push(Reverse((at, participant, self.seq, EventSlot(event))));
    }

    pub fn pop(&mut self) -> Option<(SimInstant, u32, E)> {
        self.heap
            .pop()
            .map(|Reverse((at, participant, _, slot))| (at, participant, slot.0))
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}
