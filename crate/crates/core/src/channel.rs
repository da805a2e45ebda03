//! System configuration, block-fading channel draws and received-signal
//! synthesis for the normalized AmBC model
//! `z_q(n) = (h_q^SR + h_q^TR g x) s(n) + w_q(n)`.

use num_complex::Complex64;
use rand::Rng;

use crate::rng::complex_normal;
use crate::{db_to_linear, Error, Result, Symbol};

/// Scenario scalars shared by every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Direct-link SNR `P_s / N_w` in dB.
    pub direct_link_snr_db: f64,
    /// Direct-to-backscatter power ratio in dB.
    pub relative_snr_db: f64,
    /// Tag implementation loss in dB, applied as an amplitude factor.
    pub alpha_loss_db: f64,
    /// Reader antennas `Q`.
    pub num_antennas: usize,
    /// Repetition length `M`.
    pub repetition_length: usize,
    /// Coherence length `K` in ambient symbols. Always equal to `M`.
    pub coherence_length: usize,
    /// Receiver noise variance. The ambient power is `10^(snr/10)` times a
    /// unit reference, so the default of 1 makes `snr` equal `P_s / N_w`.
    pub noise_power: f64,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            direct_link_snr_db: 20.0,
            relative_snr_db: 40.0,
            alpha_loss_db: 1.1,
            num_antennas: 2,
            repetition_length: 1,
            coherence_length: 1,
            noise_power: 1.0,
            seed: 0x5eed_ab5c,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("direct_link_snr_db", self.direct_link_snr_db),
            ("relative_snr_db", self.relative_snr_db),
            ("alpha_loss_db", self.alpha_loss_db),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if self.num_antennas < 2 {
            return Err(Error::Config(format!(
                "num_antennas must be at least 2, got {}",
                self.num_antennas
            )));
        }
        if self.repetition_length == 0 {
            return Err(Error::Config("repetition_length must be at least 1".into()));
        }
        if self.coherence_length != self.repetition_length {
            return Err(Error::Config(format!(
                "coherence_length ({}) must equal repetition_length ({})",
                self.coherence_length, self.repetition_length
            )));
        }
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return Err(Error::Config(format!(
                "noise_power must be finite and non-negative, got {}",
                self.noise_power
            )));
        }
        Ok(())
    }

    /// The same configuration at another direct-link SNR.
    pub fn at_snr(&self, snr_db: f64) -> Self {
        Self {
            direct_link_snr_db: snr_db,
            ..self.clone()
        }
    }

    pub fn amplitudes(&self) -> (f64, f64) {
        derive_amplitudes(self.alpha_loss_db, self.relative_snr_db)
    }

    pub fn powers(&self) -> Powers {
        Powers {
            signal: db_to_linear(self.direct_link_snr_db),
            noise: self.noise_power,
        }
    }

    /// `alpha^2 A_TR^2 Δγ - 1`, zero up to rounding.
    pub fn relative_snr_residual(&self) -> f64 {
        let (alpha, a_tr) = self.amplitudes();
        alpha * alpha * a_tr * a_tr * db_to_linear(self.relative_snr_db) - 1.0
    }
}

/// Ambient signal power `P_s` and noise power `N_w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Powers {
    pub signal: f64,
    pub noise: f64,
}

/// Returns `(alpha, a_tr)` with `alpha = 10^(-loss/20)` and `a_tr` chosen so
/// that `1 / (alpha^2 a_tr^2)` is the relative SNR in linear scale.
pub fn derive_amplitudes(alpha_loss_db: f64, relative_snr_db: f64) -> (f64, f64) {
    let alpha = 10f64.powf(-alpha_loss_db / 20.0);
    let a_tr = 1.0 / (alpha * 10f64.powf(relative_snr_db / 20.0));
    (alpha, a_tr)
}

/// Fading coefficients of one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h_sr: Vec<Complex64>,
    h_tr: Vec<Complex64>,
    h_st: Complex64,
    g: Complex64,
}

impl ChannelRealization {
    /// Builds a realization from small-scale coefficients, computing
    /// `g = alpha A_TR h_st`.
    pub fn new(h_sr: Vec<Complex64>, h_tr: Vec<Complex64>, h_st: Complex64, alpha: f64, a_tr: f64) -> Self {
        let g = h_st * (alpha * a_tr);
        Self::with_backscatter_gain(h_sr, h_tr, h_st, g)
    }

    /// Builds a realization with an explicit backscatter gain `g`.
    pub fn with_backscatter_gain(h_sr: Vec<Complex64>, h_tr: Vec<Complex64>, h_st: Complex64, g: Complex64) -> Self {
        assert_eq!(h_sr.len(), h_tr.len(), "branch vectors must have equal length");
        Self { h_sr, h_tr, h_st, g }
    }

    pub fn num_antennas(&self) -> usize {
        self.h_sr.len()
    }

    pub fn h_sr(&self) -> &[Complex64] {
        &self.h_sr
    }

    pub fn h_tr(&self) -> &[Complex64] {
        &self.h_tr
    }

    pub fn h_st(&self) -> Complex64 {
        self.h_st
    }

    pub fn g(&self) -> Complex64 {
        self.g
    }

    /// Composite channel `mu_q = h_q^SR + h_q^TR g x`.
    #[inline]
    pub fn composite(&self, q: usize, x: Symbol) -> Complex64 {
        self.h_sr[q] + self.h_tr[q] * self.g * x.value()
    }

    /// Relabels antennas: branch `q` of the result is branch `perm[q]` of
    /// `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            h_sr: perm.iter().map(|&q| self.h_sr[q]).collect(),
            h_tr: perm.iter().map(|&q| self.h_tr[q]).collect(),
            h_st: self.h_st,
            g: self.g,
        }
    }
}

fn nonzero_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    loop {
        let h = complex_normal(rng, 1.0);
        if h != Complex64::new(0.0, 0.0) {
            return h;
        }
    }
}

/// Draws `h_sr`, `h_tr` (length `Q`) and `h_st`, all i.i.d. `CN(0, 1)`.
/// Exact zeros are redrawn.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, config: &SystemConfig) -> ChannelRealization {
    let q = config.num_antennas;
    let h_sr = (0..q).map(|_| nonzero_cn(rng)).collect();
    let h_tr = (0..q).map(|_| complex_normal(rng, 1.0)).collect();
    let h_st = nonzero_cn(rng);
    let (alpha, a_tr) = config.amplitudes();
    ChannelRealization::new(h_sr, h_tr, h_st, alpha, a_tr)
}

/// Received samples of one block on every antenna, plus the ground truth the
/// synthesis used. Detectors only ever receive [`ReceivedBlock::branch`]
/// slices; the ambient and Tag symbols are kept for scoring and oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    len: usize,
    z: Vec<Complex64>,
    s: Vec<Complex64>,
    x: Vec<Symbol>,
}

impl ReceivedBlock {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_antennas(&self) -> usize {
        self.z.len() / self.len.max(1)
    }

    /// Samples received on antenna `q`.
    pub fn branch(&self, q: usize) -> &[Complex64] {
        &self.z[q * self.len..(q + 1) * self.len]
    }

    /// The ambient symbols `s(n)`. Oracle use only.
    pub fn ambient_symbols(&self) -> &[Complex64] {
        &self.s
    }

    /// The transmitted Tag symbols. Scoring use only.
    pub fn tag_symbols(&self) -> &[Symbol] {
        &self.x
    }
}

/// The ambient symbols and receiver noise of one block, drawn independently
/// of what the Tag sends so that different Tag sequences can be evaluated
/// against the same randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNoise {
    s: Vec<Complex64>,
    w: Vec<Complex64>,
}

impl BlockNoise {
    /// Draws `s(n) ~ CN(0, P_s)` and `w_q(n) ~ CN(0, N_w)` for `len` symbols.
    /// Per symbol the order is `s(n)` then `w_1(n) .. w_Q(n)`.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, num_antennas: usize, len: usize, powers: Powers) -> Self {
        let mut s = Vec::with_capacity(len);
        let mut w = vec![Complex64::new(0.0, 0.0); num_antennas * len];
        for n in 0..len {
            s.push(complex_normal(rng, powers.signal));
            for q in 0..num_antennas {
                w[q * len + n] = complex_normal(rng, powers.noise);
            }
        }
        Self { s, w }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Forms `z_q(n) = (h_sr_q + h_tr_q g x(n)) s(n) + w_q(n)`.
    pub fn received(&self, ch: &ChannelRealization, x_seq: &[Symbol]) -> ReceivedBlock {
        let n = self.s.len();
        assert_eq!(x_seq.len(), n, "one Tag symbol per ambient symbol");
        let q = ch.num_antennas();
        assert_eq!(self.w.len(), q * n, "noise drawn for a different antenna count");
        let composite: [Vec<Complex64>; 2] = Symbol::BOTH.map(|x| (0..q).map(|b| ch.composite(b, x)).collect());
        let mut z = vec![Complex64::new(0.0, 0.0); q * n];
        for (idx, &x) in x_seq.iter().enumerate() {
            let mu = &composite[(x == Symbol::Plus) as usize];
            for b in 0..q {
                z[b * n + idx] = mu[b] * self.s[idx] + self.w[b * n + idx];
            }
        }
        ReceivedBlock {
            len: n,
            z,
            s: self.s.clone(),
            x: x_seq.to_vec(),
        }
    }
}

/// Synthesizes `z_q(n)` for every antenna and every `x(n)` in `x_seq`. The
/// randomness consumed is that of [`BlockNoise::draw`] and does not depend on
/// `x_seq`.
pub fn synthesize_block<R: Rng + ?Sized>(
    rng: &mut R,
    ch: &ChannelRealization,
    x_seq: &[Symbol],
    powers: Powers,
) -> ReceivedBlock {
    BlockNoise::draw(rng, ch.num_antennas(), x_seq.len(), powers).received(ch, x_seq)
}
