//! Seed derivation and per-purpose random streams.
//!
//! Every trial owns a handful of ChaCha8 streams whose keys are derived from
//! `(master_seed, trial_index, stream)`. ChaCha is counter based, so two
//! streams with different keys (or different stream words under one key) are
//! independent by construction and no state is shared between trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// The purpose a random stream is reserved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Which student arrives at each step. Shared by paired policies.
    StudentArrival,
    /// Posterior draws made by the policy when choosing.
    PolicySampling,
    /// Reward / outcome draws.
    OutcomeDraw,
    /// Posterior draws used when estimating choice disparity after a trial.
    Disparity,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::StudentArrival => 0x5354_5544,
            Stream::PolicySampling => 0x504f_4c49,
            Stream::OutcomeDraw => 0x4f55_5443,
            Stream::Disparity => 0x4449_5350,
        }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes the three inputs into a 64-bit stream key.
pub fn derive_seed(master_seed: u64, trial_index: u64, stream: Stream) -> u64 {
    let mut h = splitmix64(master_seed);
    h = splitmix64(h ^ trial_index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix64(h ^ stream.tag().wrapping_mul(0xAEF1_7502_108E_F2D9))
}

/// Mixes an arbitrary label into a seed, e.g. to give each grid cell its own
/// master seed. FNV-1a over the bytes, then a splitmix finalizer.
pub fn mix_label(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(seed ^ h)
}

pub fn stream_rng(master_seed: u64, trial_index: u64, stream: Stream) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master_seed, trial_index, stream))
}

/// Outcome draws keyed by `(step, action)`.
///
/// Two policies run on the same trial see the same outcome whenever they pick
/// the same action for the same step, and independent draws otherwise.
#[derive(Debug, Clone)]
pub struct OutcomeStream {
    base: StreamRng,
}

impl OutcomeStream {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            base: stream_rng(master_seed, trial_index, Stream::OutcomeDraw),
        }
    }

    pub fn at(&self, step: usize, action: usize) -> StreamRng {
        let mut rng = self.base.clone();
        rng.set_stream(((step as u64) << 8) | (action as u64 & 0xff));
        rng.set_word_pos(0);
        rng
    }
}
