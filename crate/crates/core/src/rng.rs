//! Seeded, splittable random streams.
//!
//! A [`SeedSpec`] names one ChaCha8 stream: the master seed keys the
//! generator and the stream index selects one of 2^64 independent
//! keystreams. Trial `t` of an experiment always reads stream `t` (or a
//! grouped index, see [`SeedSpec::grouped`]), so results do not depend on
//! how trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeedSpec {
    pub master: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub const fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    /// Stream `(group << 32) | index`, for experiments that run several
    /// families of trials (e.g. one group per network size) off one seed.
    pub const fn grouped(master: u64, group: u32, index: u32) -> Self {
        Self {
            master,
            stream: ((group as u64) << 32) | index as u64,
        }
    }

    pub const fn with_stream(self, stream: u64) -> Self {
        Self {
            master: self.master,
            stream,
        }
    }

    pub fn rng(&self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}
