//! Counter-based random substreams.
//!
//! Every Monte Carlo trial draws from its own ChaCha8 stream addressed by
//! `(domain, snr index, trial index)` under a key derived from the master
//! seed. A trial's randomness therefore does not depend on which worker runs
//! it or in what order, and two scenarios evaluated with the same address see
//! identical draws.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// The generator handed to every sampling operation.
pub type Stream = ChaCha8Rng;

const TRIAL_BITS: u32 = 40;
const SNR_BITS: u32 = 22;

/// Which part of a trial a stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Tag bits, channels, ambient symbols and receiver noise.
    Link = 0,
    /// Perturbations applied to the Reader's channel knowledge.
    CsiError = 1,
    /// Free-standing draws (tests, demos, selfcheck).
    Auxiliary = 2,
}

/// Address of one substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamId {
    pub domain: Domain,
    pub snr_index: u32,
    pub trial_index: u64,
}

impl StreamId {
    pub fn new(domain: Domain, snr_index: u32, trial_index: u64) -> Self {
        Self {
            domain,
            snr_index,
            trial_index,
        }
    }

    fn word(self) -> u64 {
        assert!(u64::from(self.snr_index) < 1 << SNR_BITS, "snr index overflow");
        assert!(self.trial_index < 1 << TRIAL_BITS, "trial index overflow");
        ((self.domain as u64) << (TRIAL_BITS + SNR_BITS))
            | (u64::from(self.snr_index) << TRIAL_BITS)
            | self.trial_index
    }
}

/// Opens the substream `id` under `master_seed`.
pub fn substream(master_seed: u64, id: StreamId) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(id.word());
    rng
}

/// Shorthand for an auxiliary stream, used outside the trial machinery.
pub fn auxiliary(master_seed: u64, index: u64) -> Stream {
    substream(master_seed, StreamId::new(Domain::Auxiliary, 0, index))
}

/// Draws from `CN(0, variance)`.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}
