//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream addressed
//! by `(master seed, sample index, block index)`. A sample therefore produces
//! the same numbers whichever worker evaluates it, and the blocks of one
//! matrix never share words of the keystream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Keystream words reserved for one block. Far more than any W×W block needs.
const WORDS_PER_BLOCK: u128 = 1 << 40;

/// Bits of the ChaCha stream id used for the sample index; the remaining high
/// bits number retry attempts after a rejected draw.
const SAMPLE_BITS: u32 = 48;

/// Entry point for all randomness of one experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedSequence {
    seed: u64,
}

impl SeedSequence {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The stream owned by sample `index`.
    pub fn sample(&self, index: u64) -> Stream {
        assert!(index < (1 << SAMPLE_BITS), "sample index {index} out of range");
        Stream {
            seed: self.seed,
            id: index,
        }
    }

    /// A sequence for an independent sub-experiment, e.g. one row of a scan.
    pub fn derive(&self, tag: u64) -> SeedSequence {
        // splitmix64 finaliser
        let mut z = self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        SeedSequence { seed: z ^ (z >> 31) }
    }
}

/// The random stream of a single sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Stream {
    seed: u64,
    id: u64,
}

impl Stream {
    /// Stream used for the `attempt`-th redraw of this sample.
    pub fn retry(&self, attempt: u32) -> Stream {
        let sample = self.id & ((1 << SAMPLE_BITS) - 1);
        let previous = self.id >> SAMPLE_BITS;
        Stream {
            seed: self.seed,
            id: sample | ((previous + u64::from(attempt)) << SAMPLE_BITS),
        }
    }

    /// Generator positioned at the start of block `block`.
    pub fn block(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.id);
        rng.set_word_pos(u128::from(block) * WORDS_PER_BLOCK);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_address_same_numbers() {
        let seq = SeedSequence::new(7);
        let mut r1 = seq.sample(3).block(5);
        let mut r2 = seq.sample(3).block(5);
        let a: Vec<u64> = (0..8).map(|_| r1.gen()).collect();
        let b: Vec<u64> = (0..8).map(|_| r2.gen()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn blocks_and_samples_differ() {
        let seq = SeedSequence::new(7);
        let x: u64 = seq.sample(0).block(0).gen();
        let y: u64 = seq.sample(0).block(1).gen();
        let z: u64 = seq.sample(1).block(0).gen();
        let w: u64 = seq.sample(0).retry(1).block(0).gen();
        assert!(x != y && x != z && x != w && z != w);
        assert_ne!(seq.derive(1).seed(), seq.derive(2).seed());
    }

    #[test]
    fn retries_compose() {
        let s = SeedSequence::new(1).sample(9);
        assert_eq!(s.retry(1).retry(1), s.retry(2));
        assert_eq!(s.retry(0), s);
    }
}
