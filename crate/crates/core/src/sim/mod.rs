//! Discrete-event kernel and seeded random streams.
//!
//! Events are totally ordered by `(fire_time, sequence)`. The sequence number
//! is assigned at scheduling time, so two events with the same fire time are
//! dispatched in the order they were scheduled.

mod rng;

pub use rng::{draw, Distribution, RngError, RngStreams, Sample, StreamId};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Simulated time in seconds.
pub type SimTime = f64;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("event scheduled in the past: fire_time {fire_time} < clock {clock}")]
    InPast { fire_time: SimTime, clock: SimTime },
    #[error("event fire time is not finite: {0}")]
    NotFinite(SimTime),
}

/// A scheduled event with its ordering key.
#[derive(Debug, Clone)]
pub struct SimEvent<E> {
    pub fire_time: SimTime,
    pub sequence: u64,
    pub payload: E,
}

impl<E> PartialEq for SimEvent<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for SimEvent<E> {}

impl<E> PartialOrd for SimEvent<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for SimEvent<E> {
    // Reversed so that `BinaryHeap` pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .fire_time
            .total_cmp(&self.fire_time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}

/// Time-ordered event queue with a monotone clock.
#[derive(Debug)]
pub struct EventQueue<E> {
    heap: BinaryHeap<SimEvent<E>>,
    clock: SimTime,
    next_sequence: u64,
    dispatched: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            clock: 0.0,
            next_sequence: 0,
            dispatched: 0,
        }
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    /// Enqueues `payload` to fire at `fire_time`. Returns the assigned sequence number.
    pub fn schedule(&mut self, fire_time: SimTime, payload: E) -> Result<u64, ScheduleError> {
        if !fire_time.is_finite() {
            return Err(ScheduleError::NotFinite(fire_time));
        }
        if fire_time < self.clock {
            return Err(ScheduleError::InPast {
                fire_time,
                clock: self.clock,
            });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(SimEvent {
            fire_time,
            sequence,
            payload,
        });
        Ok(sequence)
    }

    /// Schedules `payload` at `clock + delay`.
    pub fn schedule_in(&mut self, delay: SimTime, payload: E) -> Result<u64, ScheduleError> {
        self.schedule(self.clock + delay, payload)
    }

    /// Pops the next event if it fires no later than `until`, advancing the clock to it.
    pub fn pop_until(&mut self, until: SimTime) -> Option<SimEvent<E>> {
        match self.heap.peek() {
            Some(ev) if ev.fire_time <= until => {
                let ev = self.heap.pop().expect("peeked");
                self.clock = ev.fire_time;
                self.dispatched += 1;
                Some(ev)
            }
            _ => None,
        }
    }

    /// Dispatches every event with `fire_time <= until` in order, then sets the clock
    /// to `until`. The handler may schedule further events through the queue it is given.
    pub fn run<F>(&mut self, until: SimTime, mut handler: F) -> SimTime
    where
        F: FnMut(&mut Self, SimEvent<E>),
    {
        while let Some(ev) = self.pop_until(until) {
            handler(self, ev);
        }
        if until > self.clock {
            self.clock = until;
        }
        self.clock
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_event_fires_after_earlier_ones() {
        let mut q = EventQueue::new();
        q.schedule(1.0, "a").unwrap();
        q.pop_until(1.0).unwrap();
        q.schedule(5.0, "late").unwrap();
        q.schedule(3.0, "early").unwrap();
        q.schedule(4.999, "earlier").unwrap();
        let mut order = Vec::new();
        q.run(10.0, |_, ev| order.push(ev.payload));
        assert_eq!(order, vec!["early", "earlier", "late"]);
    }

    #[test]
    fn equal_times_fire_in_scheduling_order() {
        let mut q = EventQueue::new();
        q.schedule(5.0, 'A').unwrap();
        q.schedule(5.0, 'B').unwrap();
        let mut order = Vec::new();
        q.run(5.0, |_, ev| order.push(ev.payload));
        assert_eq!(order, vec!['A', 'B']);
    }

    #[test]
    fn scheduling_in_the_past_is_rejected() {
        let mut q = EventQueue::new();
        q.schedule(1.0, ()).unwrap();
        q.pop_until(10.0).unwrap();
        assert_eq!(
            q.schedule(0.5, ()),
            Err(ScheduleError::InPast {
                fire_time: 0.5,
                clock: 1.0
            })
        );
        assert!(matches!(
            q.schedule(f64::NAN, ()),
            Err(ScheduleError::NotFinite(_))
        ));
    }

    #[test]
    fn empty_run_advances_clock() {
        let mut q: EventQueue<()> = EventQueue::new();
        let clock = q.run(360.0, |_, _| panic!("no events"));
        assert_eq!(clock, 360.0);
        assert_eq!(q.dispatched(), 0);
    }

    #[test]
    fn run_stops_at_horizon() {
        let mut q = EventQueue::new();
        for t in [1.0, 2.0, 3.0] {
            q.schedule(t, t).unwrap();
        }
        let mut n = 0;
        let clock = q.run(2.0, |_, _| n += 1);
        assert_eq!(n, 2);
        assert_eq!(q.pending(), 1);
        assert_eq!(clock, 2.0);
    }

    #[test]
    fn handler_can_schedule_follow_ups() {
        let mut q = EventQueue::new();
        q.schedule(0.0, 0u32).unwrap();
        let mut fired = Vec::new();
        q.run(10.0, |q, ev| {
            fired.push(ev.fire_time);
            if ev.payload < 3 {
                q.schedule_in(1.5, ev.payload + 1).unwrap();
            }
        });
        assert_eq!(fired, vec![0.0, 1.5, 3.0, 4.5]);
    }

    proptest::proptest! {
        #[test]
        fn dispatch_order_is_chronological(times in proptest::collection::vec(0.0f64..1000.0, 0..100)) {
            let mut q = EventQueue::new();
            for (i, &t) in times.iter().enumerate() {
                q.schedule(t, i).unwrap();
            }
            let mut seen: Vec<(f64, usize)> = Vec::new();
            q.run(2000.0, |_, ev| seen.push((ev.fire_time, ev.payload)));
            proptest::prop_assert_eq!(seen.len(), times.len());
            for pair in seen.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                proptest::prop_assert!(a.0 < b.0 || (a.0 == b.0 && a.1 < b.1));
            }
        }
    }
}
