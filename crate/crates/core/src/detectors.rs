//! Per-observation detectors.
//!
//! All decisions break exact ties towards `x = -1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{ChannelRealization, Powers};
use crate::linearize::LinearizedSample;
use crate::quad::{integrate, Tolerance};
use crate::ratio_stats::{hypothesis_stats, ratio_pdf_unchecked, HypothesisStats};
use crate::{Error, Result, Symbol};

/// A hard decision and the score difference `score(+1) - score(-1)` that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub x_hat: Symbol,
    pub score_margin: f64,
}

impl Decision {
    /// Decides `+1` only when the margin is strictly positive.
    #[inline]
    pub fn from_margin(score_margin: f64) -> Self {
        Self {
            x_hat: Symbol::from_bool(score_margin > 0.0),
            score_margin,
        }
    }
}

fn valid_stats(stats: HypothesisStats) -> Result<(HypothesisStats, f64)> {
    let rho_sq = stats.rho.norm_sqr();
    if rho_sq < 1.0 && stats.sigma1_sq > 0.0 && stats.sigma2_sq > 0.0 {
        Ok((stats, rho_sq))
    } else {
        Err(Error::InvalidStats { rho_abs: rho_sq.sqrt() })
    }
}

/// ML detector on the raw complex ratio `lambda = z_i / z_j`.
#[derive(Debug, Clone, Copy)]
pub struct RatioMlDetector {
    minus: (HypothesisStats, f64),
    plus: (HypothesisStats, f64),
}

impl RatioMlDetector {
    pub fn new(csi: &ChannelRealization, i: usize, j: usize, powers: Powers) -> Result<Self> {
        Ok(Self {
            minus: valid_stats(hypothesis_stats(csi, i, j, Symbol::Minus, powers))?,
            plus: valid_stats(hypothesis_stats(csi, i, j, Symbol::Plus, powers))?,
        })
    }

    pub fn likelihoods(&self, lambda: Complex64) -> (f64, f64) {
        (
            ratio_pdf_unchecked(lambda, &self.minus.0, self.minus.1),
            ratio_pdf_unchecked(lambda, &self.plus.0, self.plus.1),
        )
    }

    pub fn decide(&self, lambda: Complex64) -> Decision {
        let (f_minus, f_plus) = self.likelihoods(lambda);
        Decision::from_margin(f_plus - f_minus)
    }
}

/// ML decision on `lambda` with perfect channel knowledge.
pub fn ml_detect_ratio(lambda: Complex64, csi: &ChannelRealization, i: usize, j: usize, powers: Powers) -> Result<Decision> {
    Ok(RatioMlDetector::new(csi, i, j, powers)?.decide(lambda))
}

/// `argmin_x |y - h x|^2`, i.e. the sign of `Re{y h^*}`.
#[inline]
pub fn min_distance_detect(sample: &LinearizedSample) -> Decision {
    Decision::from_margin(4.0 * (sample.y * sample.h_eff.conj()).re)
}

/// Density of `|lambda|` obtained by integrating the ratio density over
/// phase. The integrand peaks at the phase of the density's centre, so the
/// circle is split there.
pub fn magnitude_ratio_pdf(r: f64, stats: &HypothesisStats) -> Result<f64> {
    let (stats, rho_sq) = valid_stats(*stats)?;
    Ok(magnitude_pdf_unchecked(r, &stats, rho_sq))
}

fn magnitude_pdf_unchecked(r: f64, stats: &HypothesisStats, rho_sq: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let peak = stats.ratio_center().arg();
    let tol = Tolerance::new(0.0, 1e-9);
    let f = |theta: f64| ratio_pdf_unchecked(Complex64::from_polar(r, theta), stats, rho_sq);
    let lower = integrate(f, peak - PI, peak, tol).value;
    let upper = integrate(f, peak, peak + PI, tol).value;
    r * (lower + upper)
}

/// ML detector on the magnitude ratio `|z_i / z_j|`.
#[derive(Debug, Clone, Copy)]
pub struct MagnitudeRatioDetector {
    minus: (HypothesisStats, f64),
    plus: (HypothesisStats, f64),
}

impl MagnitudeRatioDetector {
    pub fn new(csi: &ChannelRealization, i: usize, j: usize, powers: Powers) -> Result<Self> {
        Ok(Self {
            minus: valid_stats(hypothesis_stats(csi, i, j, Symbol::Minus, powers))?,
            plus: valid_stats(hypothesis_stats(csi, i, j, Symbol::Plus, powers))?,
        })
    }

    pub fn likelihoods(&self, lambda_abs: f64) -> (f64, f64) {
        (
            magnitude_pdf_unchecked(lambda_abs, &self.minus.0, self.minus.1),
            magnitude_pdf_unchecked(lambda_abs, &self.plus.0, self.plus.1),
        )
    }

    pub fn decide(&self, lambda_abs: f64) -> Decision {
        let (f_minus, f_plus) = self.likelihoods(lambda_abs);
        Decision::from_margin(f_plus - f_minus)
    }
}

/// ML decision on `|lambda|` with perfect channel knowledge.
pub fn magnitude_ratio_detect(lambda_abs: f64, csi: &ChannelRealization, i: usize, j: usize, powers: Powers) -> Result<Decision> {
    Ok(MagnitudeRatioDetector::new(csi, i, j, powers)?.decide(lambda_abs))
}

/// Averaged-power detector on one antenna.
#[derive(Debug, Clone, Copy)]
pub struct EnergyDetector {
    var_minus: f64,
    var_plus: f64,
}

impl EnergyDetector {
    pub fn new(csi: &ChannelRealization, branch: usize, powers: Powers) -> Self {
        let var = |x| csi.composite(branch, x).norm_sqr() * powers.signal + powers.noise;
        Self {
            var_minus: var(Symbol::Minus),
            var_plus: var(Symbol::Plus),
        }
    }

    /// The received variance under each hypothesis.
    pub fn variances(&self) -> (f64, f64) {
        (self.var_minus, self.var_plus)
    }

    /// Decides from the samples of one symbol period. The averaged power `T`
    /// of `M` samples is Gamma distributed with shape `M` and mean equal to
    /// the hypothesis variance; the margin is the per-sample log-likelihood
    /// ratio.
    pub fn decide(&self, samples: &[Complex64]) -> Decision {
        assert!(!samples.is_empty(), "energy detection needs at least one sample");
        let t = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / samples.len() as f64;
        let llr = (self.var_minus / self.var_plus).ln() + t * (1.0 / self.var_minus - 1.0 / self.var_plus);
        Decision::from_margin(llr)
    }
}

/// Energy decision from the samples of branch `0` in `z_block`.
pub fn energy_detect(z_block: &[Complex64], csi: &ChannelRealization, powers: Powers) -> Decision {
    EnergyDetector::new(csi, 0, powers).decide(z_block)
}
