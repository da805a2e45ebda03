//! Monte Carlo BER engine.
//!
//! One trial is a super-block of `M` coherence blocks of `M` symbols that
//! carries `M` bits. Each trial owns the counter-based substream
//! `(snr index, trial index)`, drawn in the order: bits, then per block the
//! channel followed by the ambient symbols and noise. None of these draws
//! depend on what the Tag sends, so every scenario with the same `Q` and `M`
//! sees the same randomness and can be compared bit by bit.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{BlockNoise, ChannelRealization, Powers, ReceivedBlock, SystemConfig};
use crate::coding::{decode_average, decode_hard, decode_soft, encode, ReceivedCode};
use crate::detectors::{min_distance_detect, Decision, EnergyDetector, MagnitudeRatioDetector, RatioMlDetector};
use crate::linearize::{Linearizer, PhaseMode};
use crate::ratio_stats::closed_form_ber;
use crate::rng::{complex_normal, substream, Domain, StreamId};
use crate::selection::select_ratio;
use crate::{Error, Result, Symbol};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Bits evaluated per scheduling batch. Fixed so that the trials consumed do
/// not depend on the worker count.
const BATCH_BITS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    MlRaw,
    MinDistance,
    MagnitudeRatio,
    Energy,
    Averaging,
    RepHard,
    RepSoft,
    RepHardInterleaved,
    RepSoftInterleaved,
    RatioSelection,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::MlRaw,
        Scenario::MinDistance,
        Scenario::MagnitudeRatio,
        Scenario::Energy,
        Scenario::Averaging,
        Scenario::RepHard,
        Scenario::RepSoft,
        Scenario::RepHardInterleaved,
        Scenario::RepSoftInterleaved,
        Scenario::RatioSelection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::MlRaw => "ml_raw",
            Scenario::MinDistance => "min_distance",
            Scenario::MagnitudeRatio => "magnitude_ratio",
            Scenario::Energy => "energy",
            Scenario::Averaging => "averaging",
            Scenario::RepHard => "rep_hard",
            Scenario::RepSoft => "rep_soft",
            Scenario::RepHardInterleaved => "rep_hard_interleaved",
            Scenario::RepSoftInterleaved => "rep_soft_interleaved",
            Scenario::RatioSelection => "ratio_selection",
        }
    }

    /// Whether the super-block is sent transposed.
    pub fn interleaved(self) -> bool {
        matches!(
            self,
            Scenario::RepHardInterleaved | Scenario::RepSoftInterleaved | Scenario::RatioSelection
        )
    }

    /// Single-sample detectors, defined only for `M = 1`.
    pub fn single_symbol(self) -> bool {
        matches!(self, Scenario::MlRaw | Scenario::MinDistance | Scenario::MagnitudeRatio)
    }

    /// Detectors built on the exact ratio density, which degenerates without
    /// noise.
    pub fn needs_noise(self) -> bool {
        matches!(self, Scenario::MlRaw | Scenario::MagnitudeRatio)
    }

    /// Whether decisions go through the linearized model (and so depend on
    /// the phase mode).
    pub fn linearized(self) -> bool {
        !matches!(self, Scenario::MlRaw | Scenario::MagnitudeRatio | Scenario::Energy)
    }

    /// Distinct channel realizations each bit's decision depends on.
    pub fn channels_per_bit(self, m: usize) -> usize {
        if self.interleaved() {
            m
        } else {
            1
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

/// A point stops when it has `target_errors` errors or exactly `max_bits`
/// bits, whichever comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub max_bits: u64,
    pub target_errors: u64,
}

impl StopRule {
    /// Runs exactly `bits` bits.
    pub fn fixed(bits: u64) -> Self {
        Self {
            max_bits: bits,
            target_errors: u64::MAX,
        }
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_bits: 1_000_000,
            target_errors: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub snr_grid_db: Vec<f64>,
    pub system: SystemConfig,
    pub stop: StopRule,
    pub phase_mode: PhaseMode,
    /// Variance of the additive `CN(0, v)` error on every `h_sr` and `h_tr`
    /// the receiver uses. `None` means perfect CSI.
    pub csi_error_variance: Option<f64>,
    /// Worker threads; 0 uses the default pool size. Results do not depend
    /// on it.
    pub workers: usize,
}

impl ExperimentSpec {
    pub fn new(scenario: Scenario, snr_grid_db: Vec<f64>, system: SystemConfig, stop: StopRule) -> Self {
        Self {
            scenario,
            snr_grid_db,
            system,
            stop,
            phase_mode: PhaseMode::default(),
            csi_error_variance: None,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("snr grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("snr grid values must be finite".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("snr grid must be strictly increasing".into()));
        }
        if self.stop.max_bits == 0 || self.stop.target_errors == 0 {
            return Err(Error::Config("max_bits and target_errors must be positive".into()));
        }
        if self.scenario.single_symbol() && self.system.repetition_length != 1 {
            return Err(Error::Config(format!(
                "scenario {} needs repetition_length = 1, got {}",
                self.scenario, self.system.repetition_length
            )));
        }
        if self.scenario.needs_noise() && self.system.noise_power <= 0.0 {
            return Err(Error::Config(format!("scenario {} needs noise_power > 0", self.scenario)));
        }
        if let Some(v) = self.csi_error_variance {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("csi_error_variance must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn bits_per_trial(&self) -> u64 {
        self.system.repetition_length as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits_tested: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Half width of the 95% normal-approximation binomial interval.
    pub half_width_95: f64,
    /// Mean closed-form BER over the channels behind the counted bits, for
    /// the single-sample min-distance scenario.
    pub closed_form_mean: Option<f64>,
}

impl BerPoint {
    fn new(snr_db: f64, bits: u64, errors: u64, closed_form_mean: Option<f64>) -> Self {
        let ber = errors as f64 / bits as f64;
        Self {
            snr_db,
            bits_tested: bits,
            bit_errors: errors,
            ber,
            half_width_95: Z95 * (ber * (1.0 - ber) / bits as f64).sqrt(),
            closed_form_mean,
        }
    }

    /// Binomial standard deviation of the estimate under rate `p`.
    pub fn binomial_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.bits_tested as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub scenario: Scenario,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    /// Grid indices where the BER rises above the previous point by more
    /// than both points' combined 95% half widths.
    pub fn monotonicity_flags(&self) -> Vec<usize> {
        self.points
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1].ber - w[0].ber > w[0].half_width_95 + w[1].half_width_95)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// True when the last three points are within a factor of 2 of each
    /// other.
    pub fn has_error_floor(&self) -> bool {
        let n = self.points.len();
        if n < 3 {
            return false;
        }
        let tail = &self.points[n - 3..];
        let hi = tail.iter().map(|p| p.ber).fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().map(|p| p.ber).fold(f64::INFINITY, f64::min);
        lo > 0.0 && hi < 2.0 * lo
    }
}

/// Randomness and ground truth of one trial.
struct TrialDraw {
    bits: Vec<Symbol>,
    channels: Vec<ChannelRealization>,
    csi: Vec<ChannelRealization>,
    noise: Vec<BlockNoise>,
}

fn perturb(rng: &mut impl Rng, ch: &ChannelRealization, variance: f64) -> ChannelRealization {
    let h_sr = ch.h_sr().iter().map(|&h| h + complex_normal(rng, variance)).collect();
    let h_tr = ch.h_tr().iter().map(|&h| h + complex_normal(rng, variance)).collect();
    ChannelRealization::with_backscatter_gain(h_sr, h_tr, ch.h_st(), ch.g())
}

fn draw_trial(spec: &ExperimentSpec, powers: Powers, snr_index: u32, trial: u64) -> TrialDraw {
    let system = &spec.system;
    let m = system.repetition_length;
    let mut rng = substream(system.seed, StreamId::new(Domain::Link, snr_index, trial));
    let bits: Vec<Symbol> = (0..m).map(|_| Symbol::from_bool(rng.random())).collect();
    let mut channels = Vec::with_capacity(m);
    let mut noise = Vec::with_capacity(m);
    for _ in 0..m {
        channels.push(crate::channel::sample_channel(&mut rng, system));
        noise.push(BlockNoise::draw(&mut rng, system.num_antennas, m, powers));
    }
    let csi = match spec.csi_error_variance {
        Some(v) if v > 0.0 => {
            let mut rng = substream(system.seed, StreamId::new(Domain::CsiError, snr_index, trial));
            channels.iter().map(|ch| perturb(&mut rng, ch, v)).collect()
        }
        _ => channels.clone(),
    };
    TrialDraw {
        bits,
        channels,
        csi,
        noise,
    }
}

/// Per-bit error indicators of one trial, with the closed-form BER of the
/// single-sample min-distance scenario.
struct TrialOutcome {
    errors: Vec<bool>,
    closed_form: Option<f64>,
}

/// Linearized super-block: `Y` laid out like the transmit matrix, with the
/// per-block model parameters.
fn linearize_blocks(spec: &ExperimentSpec, powers: Powers, draw: &TrialDraw, rx: &[ReceivedBlock]) -> Result<ReceivedCode> {
    let m = rx.len();
    let mut y = Array2::zeros((rx[0].len(), m));
    let mut h = Vec::with_capacity(m);
    let mut tau = Vec::with_capacity(m);
    for (b, block) in rx.iter().enumerate() {
        let (i, j) = if spec.scenario == Scenario::RatioSelection {
            let choice = select_ratio(&draw.csi[b])?;
            (choice.i, choice.j)
        } else {
            (0, 1)
        };
        let lin = Linearizer::new(&draw.csi[b], i, j, powers, spec.phase_mode)?;
        let (zi, zj, s) = (block.branch(i), block.branch(j), block.ambient_symbols());
        for n in 0..block.len() {
            // A zero sample has no logarithm; it carries no information, so
            // it is mapped to the origin.
            y[[n, b]] = lin.apply(zi[n], zj[n], Some(s[n])).unwrap_or(Complex64::new(0.0, 0.0));
        }
        h.push(lin.h_eff());
        tau.push(lin.tau());
    }
    ReceivedCode::new(y, h, tau, spec.scenario.interleaved())
}

fn evaluate(spec: &ExperimentSpec, powers: Powers, draw: &TrialDraw) -> Result<TrialOutcome> {
    let m = draw.bits.len();
    let code = encode(&draw.bits, m, spec.scenario.interleaved());
    let rx: Vec<ReceivedBlock> = (0..m)
        .map(|b| draw.noise[b].received(&draw.channels[b], &code.block_symbols(b)))
        .collect();
    let mut closed_form = None;
    let decisions: Vec<Decision> = match spec.scenario {
        Scenario::MlRaw => {
            let det = RatioMlDetector::new(&draw.csi[0], 0, 1, powers)?;
            vec![det.decide(rx[0].branch(0)[0] / rx[0].branch(1)[0])]
        }
        Scenario::MagnitudeRatio => {
            let det = MagnitudeRatioDetector::new(&draw.csi[0], 0, 1, powers)?;
            vec![det.decide((rx[0].branch(0)[0] / rx[0].branch(1)[0]).norm())]
        }
        Scenario::Energy => (0..m)
            .map(|k| EnergyDetector::new(&draw.csi[k], 0, powers).decide(rx[k].branch(0)))
            .collect(),
        Scenario::MinDistance => {
            let code = linearize_blocks(spec, powers, draw, &rx)?;
            let sample = code.codeword(0).next().expect("one sample");
            closed_form = Some(closed_form_ber(sample.h_eff, sample.tau));
            vec![min_distance_detect(&sample)]
        }
        Scenario::Averaging => {
            let code = linearize_blocks(spec, powers, draw, &rx)?;
            (0..m).map(|k| decode_average(&code, k)).collect::<Result<_>>()?
        }
        Scenario::RepHard | Scenario::RepHardInterleaved => {
            let code = linearize_blocks(spec, powers, draw, &rx)?;
            (0..m).map(|k| decode_hard(&code, k)).collect()
        }
        Scenario::RepSoft | Scenario::RepSoftInterleaved | Scenario::RatioSelection => {
            let code = linearize_blocks(spec, powers, draw, &rx)?;
            (0..m).map(|k| decode_soft(&code, k)).collect()
        }
    };
    Ok(TrialOutcome {
        errors: decisions.iter().zip(&draw.bits).map(|(d, &b)| d.x_hat != b).collect(),
        closed_form,
    })
}

/// Evaluates `f` on each trial index of `range`, in order.
struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    fn new(workers: usize) -> Result<Self> {
        #[cfg(feature = "parallel")]
        {
            let pool = if workers == 1 {
                None
            } else {
                Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .build()
                        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?,
                )
            };
            Ok(Self { pool })
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Ok(Self {})
        }
    }

    fn map<T, F>(&self, range: std::ops::Range<u64>, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| range.into_par_iter().map(&f).collect());
        }
        range.map(f).collect()
    }
}

fn trials_per_batch(bits_per_trial: u64) -> u64 {
    BATCH_BITS.div_ceil(bits_per_trial).max(1)
}

/// Runs every grid point of `spec` until its stopping rule fires.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<BerCurve> {
    spec.validate()?;
    let exec = Executor::new(spec.workers)?;
    let per_trial = spec.bits_per_trial();
    let batch = trials_per_batch(per_trial);
    let mut points = Vec::with_capacity(spec.snr_grid_db.len());
    for (idx, &snr) in spec.snr_grid_db.iter().enumerate() {
        let powers = spec.system.at_snr(snr).powers();
        let (mut bits, mut errors, mut analytic) = (0u64, 0u64, 0.0f64);
        let mut next = 0u64;
        'point: loop {
            let outcomes = exec.map(next..next + batch, |t| evaluate(spec, powers, &draw_trial(spec, powers, idx as u32, t)))?;
            next += batch;
            for out in outcomes {
                let take = (spec.stop.max_bits - bits).min(per_trial) as usize;
                errors += out.errors[..take].iter().filter(|&&e| e).count() as u64;
                bits += take as u64;
                if let Some(p) = out.closed_form {
                    analytic += p;
                }
                if bits >= spec.stop.max_bits || errors >= spec.stop.target_errors {
                    break 'point;
                }
            }
        }
        let closed_form_mean = (spec.scenario == Scenario::MinDistance).then(|| analytic / bits as f64);
        points.push(BerPoint::new(snr, bits, errors, closed_form_mean));
    }
    Ok(BerCurve {
        scenario: spec.scenario,
        points,
    })
}

/// Paired BER comparison at one grid point: `difference = ber_a - ber_b`
/// with a 95% interval from the per-bit differences.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedPoint {
    pub snr_db: f64,
    pub bits: u64,
    pub errors_a: u64,
    pub errors_b: u64,
    /// Bits wrong under `a` only.
    pub only_a: u64,
    /// Bits wrong under `b` only.
    pub only_b: u64,
    pub difference: f64,
    pub half_width_95: f64,
}

impl PairedPoint {
    fn new(snr_db: f64, bits: u64, errors_a: u64, errors_b: u64, only_a: u64, only_b: u64) -> Self {
        let n = bits as f64;
        let difference = (only_a as f64 - only_b as f64) / n;
        let second = (only_a + only_b) as f64 / n;
        let var = (second - difference * difference).max(0.0);
        Self {
            snr_db,
            bits,
            errors_a,
            errors_b,
            only_a,
            only_b,
            difference,
            half_width_95: Z95 * (var / n).sqrt(),
        }
    }

    pub fn ber_a(&self) -> f64 {
        self.errors_a as f64 / self.bits as f64
    }

    pub fn ber_b(&self) -> f64 {
        self.errors_b as f64 / self.bits as f64
    }

    /// The 95% interval of `ber_a - ber_b`.
    pub fn interval(&self) -> (f64, f64) {
        (self.difference - self.half_width_95, self.difference + self.half_width_95)
    }

    /// `ber_a <= ber_b` at 95% confidence: the interval lies at or below 0.
    pub fn a_not_worse(&self) -> bool {
        self.interval().1 <= 0.0
    }

    pub fn interval_contains_zero(&self) -> bool {
        let (lo, hi) = self.interval();
        lo <= 0.0 && 0.0 <= hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedReport {
    pub scenario_a: Scenario,
    pub scenario_b: Scenario,
    pub points: Vec<PairedPoint>,
}

/// Runs `a` and `b` on the same trials. Uses `a`'s stopping rule, stopping a
/// point at `max_bits` or once both scenarios reach `target_errors`.
pub fn compare_paired(a: &ExperimentSpec, b: &ExperimentSpec) -> Result<PairedReport> {
    a.validate()?;
    b.validate()?;
    if a.snr_grid_db != b.snr_grid_db {
        return Err(Error::Mismatch("snr grids differ".into()));
    }
    let (sa, sb) = (&a.system, &b.system);
    if sa.seed != sb.seed {
        return Err(Error::Mismatch("seeds differ".into()));
    }
    if sa.num_antennas != sb.num_antennas || sa.repetition_length != sb.repetition_length {
        return Err(Error::Mismatch("antenna count and repetition length must match to share draws".into()));
    }
    let exec = Executor::new(a.workers)?;
    let per_trial = a.bits_per_trial();
    let batch = trials_per_batch(per_trial);
    let mut points = Vec::with_capacity(a.snr_grid_db.len());
    for (idx, &snr) in a.snr_grid_db.iter().enumerate() {
        let pa = sa.at_snr(snr).powers();
        let pb = sb.at_snr(snr).powers();
        let (mut bits, mut ea, mut eb, mut oa, mut ob) = (0u64, 0u64, 0u64, 0u64, 0u64);
        let mut next = 0u64;
        'point: loop {
            let outcomes = exec.map(next..next + batch, |t| {
                let da = draw_trial(a, pa, idx as u32, t);
                let out_a = evaluate(a, pa, &da)?;
                let out_b = if pa == pb && a.csi_error_variance == b.csi_error_variance {
                    evaluate(b, pb, &da)?
                } else {
                    evaluate(b, pb, &draw_trial(b, pb, idx as u32, t))?
                };
                Ok((out_a.errors, out_b.errors))
            })?;
            next += batch;
            for (xa, xb) in outcomes {
                let take = (a.stop.max_bits - bits).min(per_trial) as usize;
                for (&u, &v) in xa[..take].iter().zip(&xb[..take]) {
                    ea += u as u64;
                    eb += v as u64;
                    oa += (u && !v) as u64;
                    ob += (v && !u) as u64;
                }
                bits += take as u64;
                if bits >= a.stop.max_bits || (ea >= a.stop.target_errors && eb >= a.stop.target_errors) {
                    break 'point;
                }
            }
        }
        points.push(PairedPoint::new(snr, bits, ea, eb, oa, ob));
    }
    Ok(PairedReport {
        scenario_a: a.scenario,
        scenario_b: b.scenario,
        points,
    })
}

/// Conditional BER of single-sample min-distance detection on the fixed
/// channel `ch`, from `samples` trials with random bits. Returns the error
/// count.
pub fn conditional_min_distance_errors(
    ch: &ChannelRealization,
    powers: Powers,
    mode: PhaseMode,
    samples: u64,
    seed: u64,
) -> Result<u64> {
    let lin = Linearizer::new(ch, 0, 1, powers, mode)?;
    let mut rng = substream(seed, StreamId::new(Domain::Auxiliary, 0, 0));
    let q = ch.num_antennas();
    let mu = Symbol::BOTH.map(|x| [ch.composite(0, x), ch.composite(1, x)]);
    let mut errors = 0;
    for _ in 0..samples {
        let x = Symbol::from_bool(rng.random());
        let s = complex_normal(&mut rng, powers.signal);
        let mut w = [Complex64::new(0.0, 0.0); 2];
        // Every branch's noise is drawn so the stream matches a full block.
        for b in 0..q {
            let v = complex_normal(&mut rng, powers.noise);
            if let Some(slot) = w.get_mut(b) {
                *slot = v;
            }
        }
        let m = mu[(x == Symbol::Plus) as usize];
        let sample = lin
            .sample(m[0] * s + w[0], m[1] * s + w[1], Some(s))
            .unwrap_or(crate::linearize::LinearizedSample {
                y: Complex64::new(0.0, 0.0),
                h_eff: lin.h_eff(),
                tau: lin.tau(),
            });
        errors += (min_distance_detect(&sample).x_hat != x) as u64;
    }
    Ok(errors)
}
