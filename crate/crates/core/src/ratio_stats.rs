//! Closed-form statistics for ratios of zero-mean complex Gaussians.
//!
//! Two models are covered. The exact one describes `lambda = z_i / z_j`
//! under a known Tag symbol. The linearized one describes `y = h x + w`,
//! where `w` is itself a ratio of independent zero-mean Gaussians with
//! density `tau (|w|^2 + pi tau)^-2`; its error variable `phi = h x w` gives
//! the closed-form BER through the antiderivative `G`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::channel::{ChannelRealization, Powers};
use crate::{Error, Result, Symbol};

/// Second-order statistics of `(z_i, z_j)` under one Tag hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisStats {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    /// `mu_i^* mu_j P_s / (sigma_i sigma_j)`.
    pub rho: Complex64,
    pub mu1: Complex64,
    pub mu2: Complex64,
}

impl HypothesisStats {
    fn check(&self) -> Result<f64> {
        let rho_sq = self.rho.norm_sqr();
        if rho_sq < 1.0 && self.sigma1_sq > 0.0 && self.sigma2_sq > 0.0 {
            Ok(rho_sq)
        } else {
            Err(Error::InvalidStats {
                rho_abs: rho_sq.sqrt(),
            })
        }
    }

    /// Location of the ratio density's peak, `rho^* sigma_1 / sigma_2`.
    pub fn ratio_center(&self) -> Complex64 {
        self.rho.conj() * (self.sigma1_sq / self.sigma2_sq).sqrt()
    }

    /// Core width of the ratio density, `(sigma_1 / sigma_2) sqrt(1 - |rho|^2)`.
    pub fn ratio_scale(&self) -> f64 {
        (self.sigma1_sq / self.sigma2_sq * (1.0 - self.rho.norm_sqr())).sqrt()
    }
}

/// Statistics of branches `i` (numerator) and `j` (denominator) given `x`.
pub fn hypothesis_stats(ch: &ChannelRealization, i: usize, j: usize, x: Symbol, powers: Powers) -> HypothesisStats {
    assert_ne!(i, j, "a ratio needs two distinct branches");
    let mu1 = ch.composite(i, x);
    let mu2 = ch.composite(j, x);
    let sigma1_sq = mu1.norm_sqr() * powers.signal + powers.noise;
    let sigma2_sq = mu2.norm_sqr() * powers.signal + powers.noise;
    let rho = mu1.conj() * mu2 * powers.signal / (sigma1_sq * sigma2_sq).sqrt();
    HypothesisStats {
        sigma1_sq,
        sigma2_sq,
        rho,
        mu1,
        mu2,
    }
}

/// Density of `lambda = z_i / z_j` under `stats`.
pub fn ratio_pdf(lambda: Complex64, stats: &HypothesisStats) -> Result<f64> {
    let rho_sq = stats.check()?;
    Ok(ratio_pdf_unchecked(lambda, stats, rho_sq))
}

#[inline]
pub(crate) fn ratio_pdf_unchecked(lambda: Complex64, stats: &HypothesisStats, rho_sq: f64) -> f64 {
    let s1 = stats.sigma1_sq;
    let s2 = stats.sigma2_sq;
    let s12 = (s1 * s2).sqrt();
    let cross = stats.rho.re * lambda.re - stats.rho.im * lambda.im;
    let base = lambda.norm_sqr() / s1 + 1.0 / s2 - 2.0 * cross / s12;
    (1.0 - rho_sq) / (PI * s1 * s2) / (base * base)
}

/// Sum of inverse direct-link gains `1/|h_i|^2 + 1/|h_j|^2`.
pub(crate) fn inverse_gain_sum(ch: &ChannelRealization, i: usize, j: usize) -> Result<f64> {
    let gi = ch.h_sr()[i].norm_sqr();
    let gj = ch.h_sr()[j].norm_sqr();
    if gi == 0.0 {
        return Err(Error::DegenerateChannel { branch: i });
    }
    if gj == 0.0 {
        return Err(Error::DegenerateChannel { branch: j });
    }
    Ok(1.0 / gi + 1.0 / gj)
}

/// Density of the linearized noise `w`, written with the channel gains and
/// powers directly.
pub fn linear_noise_pdf(w: Complex64, ch: &ChannelRealization, i: usize, j: usize, powers: Powers) -> Result<f64> {
    let gains = inverse_gain_sum(ch, i, j)?;
    if !(powers.noise > 0.0 && powers.signal > 0.0) {
        return Err(Error::Domain("linear noise density needs positive signal and noise power".into()));
    }
    let ratio = powers.noise / powers.signal;
    let inner = w.norm_sqr() + gains * ratio;
    Ok(ratio / PI * gains / (inner * inner))
}

/// The same density parameterized by the noise scale `tau`.
pub fn linear_noise_pdf_tau(w: Complex64, tau: f64) -> f64 {
    let inner = w.norm_sqr() + PI * tau;
    tau / (inner * inner)
}

/// Density of the error variable `phi = h x w`.
pub fn error_pdf(phi: Complex64, tau: f64, h_abs_sq: f64) -> f64 {
    let c = PI * tau * h_abs_sq;
    let inner = phi.norm_sqr() + c;
    tau * h_abs_sq / (inner * inner)
}

/// `zeta(a, b) = gamma(b) / (2 pi) * atan(a / sqrt(c + b^2))` for at most one
/// infinite argument.
fn zeta(a: f64, b: f64, c: f64) -> f64 {
    if b.is_infinite() {
        // atan(a / inf) vanishes for finite a.
        return 0.0;
    }
    let root = (c + b * b).sqrt();
    let gamma = b / root;
    let angle = if a.is_infinite() {
        FRAC_PI_2.copysign(a)
    } else {
        (a / root).atan()
    };
    gamma * angle / (2.0 * PI)
}

/// Antiderivative `G(phi_r, phi_i)` of [`error_pdf`], accepting `±inf`.
///
/// With both arguments infinite the two `zeta` terms are not separately
/// defined; every path to the corner gives `sign(phi_r) sign(phi_i) / 4`,
/// which is what is returned.
pub fn error_cdf_g(phi_r: f64, phi_i: f64, tau: f64, h_abs_sq: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    if !(h_abs_sq > 0.0) {
        return Err(Error::Domain(format!("|h|^2 must be positive, got {h_abs_sq}")));
    }
    if phi_r.is_nan() || phi_i.is_nan() {
        return Err(Error::Domain("G is undefined at NaN".into()));
    }
    if phi_r.is_infinite() && phi_i.is_infinite() {
        return Ok(0.25 * phi_r.signum() * phi_i.signum());
    }
    let c = PI * tau * h_abs_sq;
    Ok(zeta(phi_r, phi_i, c) + zeta(phi_i, phi_r, c))
}

/// BER assembled from `G` over the error region `phi_r < -|h|^2`.
pub fn ber_from_g(h_abs_sq: f64, tau: f64) -> Result<f64> {
    let d = -h_abs_sq;
    let inf = f64::INFINITY;
    let g = |r, i| error_cdf_g(r, i, tau, h_abs_sq);
    Ok(g(d, inf)? + g(-inf, -inf)? - g(inf, -inf)? - g(d, -inf)?)
}

/// Closed-form BER of the minimum-distance detector on the linear model,
/// `1/2 - 1/2 (pi tau / |h|^2 + 1)^(-1/2)`.
///
/// Returns 1/2 at `h = 0` and 0 at `tau = 0`.
pub fn closed_form_ber(h_eff: Complex64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0, "tau must be non-negative");
    let h_abs_sq = h_eff.norm_sqr();
    if h_abs_sq == 0.0 {
        return 0.5;
    }
    let x = PI * tau / h_abs_sq;
    if x.is_infinite() {
        return 0.5;
    }
    let root = (1.0 + x).sqrt();
    // Same value as 1/2 - 1/(2 root), without cancellation at small x.
    x / (2.0 * root * (root + 1.0))
}

/// Pair-selection metric `(1/|h_i|^2 + 1/|h_j|^2) / |h_tr_i/h_sr_i - h_tr_j/h_sr_j|^2`.
/// The BER of the pair is increasing in it. `+inf` when the pair's
/// backscatter components cancel.
pub fn eta(ch: &ChannelRealization, i: usize, j: usize) -> Result<f64> {
    assert_ne!(i, j, "a ratio needs two distinct branches");
    let gains = inverse_gain_sum(ch, i, j)?;
    let diff = ch.h_tr()[i] / ch.h_sr()[i] - ch.h_tr()[j] / ch.h_sr()[j];
    let denom = diff.norm_sqr();
    Ok(if denom == 0.0 { f64::INFINITY } else { gains / denom })
}
