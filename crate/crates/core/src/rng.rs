//! Named random streams derived from one master seed.
//!
//! Every source of randomness draws from one of four ChaCha8 streams keyed
//! by the master seed:
//!
//! | stream     | id | access     | used for                                        |
//! |------------|----|------------|-------------------------------------------------|
//! | `Market`   | 0  | sequential | AR(1) innovations, regime uniforms, magnitudes  |
//! | `Customer` | 1  | slotted    | archetype assignment, accept/reduction draws    |
//! | `Budget`   | 2  | sequential | day-of-year draw, daily budget draws            |
//! | `Demand`   | 3  | slotted    | profile scale/jitter, demand and weather noise  |
//!
//! Slotted streams are addressed by `(lane, counter)`: lane is the building
//! index (or [`WEATHER_LANE`]) and counter is the simulation clock. Each slot
//! owns a fixed window of [`WORDS_PER_SLOT`] words of keystream, so the draws
//! of building `i` at clock `k` do not depend on how many other buildings
//! exist or on what happened in earlier slots. Adding buildings therefore
//! never perturbs the market stream or the draws of existing buildings, and
//! runs that differ only in the action see the same acceptance uniforms.
//!
//! A fifth stream id ([`POLICY_STREAM`]) is reserved for harness-side policy
//! randomness and is never touched by the environment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words of keystream reserved per slot; more than any single slot consumes
/// (a uniform plus a Ziggurat normal uses 4 words in the common case).
pub const WORDS_PER_SLOT: u128 = 32;

/// Lanes are limited so that `lane << 32 | counter` times the slot width
/// stays inside the 2^68-word ChaCha address space.
pub const MAX_LANES: usize = 1 << 30;

/// Lane of the demand stream used for weather noise.
pub const WEATHER_LANE: u32 = (MAX_LANES - 1) as u32;

/// Counter reserved for once-per-episode draws (archetypes, scales, jitter).
pub const SETUP_COUNTER: u32 = u32::MAX;

/// ChaCha stream id for policy randomness owned by the harness.
pub const POLICY_STREAM: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Market = 0,
    Customer = 1,
    Budget = 2,
    Demand = 3,
}

/// Base generators for one master seed.
#[derive(Debug, Clone)]
pub struct SeedStreams {
    master: u64,
    customer: ChaCha8Rng,
    demand: ChaCha8Rng,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        Self {
            master,
            customer: stream_rng(master, Stream::Customer as u64),
            demand: stream_rng(master, Stream::Demand as u64),
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// A generator positioned at the start of `stream`.
    pub fn sequential(&self, stream: Stream) -> ChaCha8Rng {
        stream_rng(self.master, stream as u64)
    }

    /// A generator positioned at the start of slot `(lane, counter)`.
    ///
    /// Only the customer and demand streams are slotted.
    pub fn slot(&self, stream: Stream, lane: u32, counter: u32) -> ChaCha8Rng {
        debug_assert!((lane as usize) < MAX_LANES);
        let mut rng = match stream {
            Stream::Customer => self.customer.clone(),
            Stream::Demand => self.demand.clone(),
            Stream::Market | Stream::Budget => panic!("{stream:?} is a sequential stream"),
        };
        let index = ((lane as u128) << 32) | counter as u128;
        rng.set_word_pos(index * WORDS_PER_SLOT);
        rng
    }

    /// Generator for harness-side policy randomness.
    pub fn policy(&self) -> ChaCha8Rng {
        stream_rng(self.master, POLICY_STREAM)
    }
}

fn stream_rng(master: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn take(mut rng: ChaCha8Rng, n: usize) -> Vec<u64> {
        (0..n).map(|_| rng.random()).collect()
    }

    #[test]
    fn same_seed_same_sequence() {
        let a = SeedStreams::new(9);
        let b = SeedStreams::new(9);
        assert_eq!(take(a.sequential(Stream::Market), 16), take(b.sequential(Stream::Market), 16));
        assert_eq!(
            take(a.slot(Stream::Customer, 3, 17), 4),
            take(b.slot(Stream::Customer, 3, 17), 4)
        );
    }

    #[test]
    fn streams_are_distinct() {
        let s = SeedStreams::new(9);
        let seqs: Vec<_> = [Stream::Market, Stream::Customer, Stream::Budget, Stream::Demand]
            .into_iter()
            .map(|st| take(s.sequential(st), 4))
            .collect();
        for i in 0..seqs.len() {
            for j in i + 1..seqs.len() {
                assert_ne!(seqs[i], seqs[j]);
            }
        }
        assert_ne!(take(s.policy(), 4), seqs[0]);
    }

    #[test]
    fn slots_do_not_overlap() {
        let s = SeedStreams::new(1);
        // A slot's window is WORDS_PER_SLOT words = 16 u64 draws.
        let a = take(s.slot(Stream::Demand, 0, 0), 16);
        let b = take(s.slot(Stream::Demand, 0, 1), 16);
        assert!(a.iter().all(|x| !b.contains(x)));
        // Reading past the window spills into the next slot.
        let long = take(s.slot(Stream::Demand, 0, 0), 17);
        assert_eq!(long[16], b[0]);
    }

    #[test]
    fn lanes_are_independent_of_each_other() {
        let s = SeedStreams::new(1);
        assert_ne!(take(s.slot(Stream::Customer, 0, 5), 2), take(s.slot(Stream::Customer, 1, 5), 2));
        assert_ne!(
            take(s.slot(Stream::Demand, WEATHER_LANE, 5), 2),
            take(s.slot(Stream::Demand, 0, 5), 2)
        );
        // The largest slot is still addressable.
        let _ = take(s.slot(Stream::Demand, WEATHER_LANE, SETUP_COUNTER), 2);
    }
}
