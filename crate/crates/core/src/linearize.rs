//! Log-ratio linearization of the two-branch observation into
//! `y = h x + w`, with bias removal and `2 pi` phase compensation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{ChannelRealization, Powers};
use crate::ratio_stats::inverse_gain_sum;
use crate::{Error, Result};

/// One observation of the linear model together with the block's model
/// parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedSample {
    pub y: Complex64,
    pub h_eff: Complex64,
    pub tau: f64,
}

/// How the `2 pi` ambiguity of the principal logarithm is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    /// Use the bias-removed principal log as is.
    Uncompensated,
    /// Add `j dphi` with `dphi` from comparing the two principal phases.
    #[default]
    Compensated,
    /// Use the true unwrapped phase. Needs the ambient symbol, so it is only
    /// available to oracles inside the harness.
    Perfect,
}

/// Effective channel `h = (h_tr_i/h_sr_i - h_tr_j/h_sr_j) g` and noise scale
/// `tau = (1/|h_sr_i|^2 + 1/|h_sr_j|^2) N_w / (pi P_s)`.
pub fn effective_channel(ch: &ChannelRealization, i: usize, j: usize, powers: Powers) -> Result<(Complex64, f64)> {
    let gains = inverse_gain_sum(ch, i, j)?;
    let h = (ch.h_tr()[i] / ch.h_sr()[i] - ch.h_tr()[j] / ch.h_sr()[j]) * ch.g();
    let tau = gains * powers.noise / (PI * powers.signal);
    Ok((h, tau))
}

/// Phase correction for a sample whose principal log-ratio phase is
/// `ratio_phase` when the bias phase is `bias_phase`. A difference of exactly
/// `±pi` maps to 0.
#[inline]
pub fn phase_shift(ratio_phase: f64, bias_phase: f64) -> f64 {
    let diff = ratio_phase - bias_phase;
    if diff < -PI {
        2.0 * PI
    } else if diff > PI {
        -2.0 * PI
    } else {
        0.0
    }
}

/// Per-block linearization state: the bias `Log(h_sr_i / h_sr_j)` and the
/// linear-model parameters, computed once from the Reader's channel
/// knowledge.
#[derive(Debug, Clone, Copy)]
pub struct Linearizer {
    bias: Complex64,
    h_sr_i: Complex64,
    h_sr_j: Complex64,
    h_eff: Complex64,
    tau: f64,
    mode: PhaseMode,
}

impl Linearizer {
    pub fn new(csi: &ChannelRealization, i: usize, j: usize, powers: Powers, mode: PhaseMode) -> Result<Self> {
        let (h_eff, tau) = effective_channel(csi, i, j, powers)?;
        let h_sr_i = csi.h_sr()[i];
        let h_sr_j = csi.h_sr()[j];
        Ok(Self {
            bias: (h_sr_i / h_sr_j).ln(),
            h_sr_i,
            h_sr_j,
            h_eff,
            tau,
            mode,
        })
    }

    pub fn h_eff(&self) -> Complex64 {
        self.h_eff
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mode(&self) -> PhaseMode {
        self.mode
    }

    /// Linearizes `(z_i, z_j)`. Under [`PhaseMode::Perfect`] `ambient` must
    /// carry the true `s(n)`; the other modes ignore it.
    pub fn apply(&self, z_i: Complex64, z_j: Complex64, ambient: Option<Complex64>) -> Result<Complex64> {
        if z_j == Complex64::new(0.0, 0.0) {
            return Err(Error::DivisionByZero { branch: 1 });
        }
        if z_i == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("log of a zero ratio".into()));
        }
        match self.mode {
            PhaseMode::Perfect => {
                let s = ambient.ok_or_else(|| Error::Domain("perfect phase compensation needs the ambient symbol".into()))?;
                Ok((z_i / (self.h_sr_i * s)).ln() - (z_j / (self.h_sr_j * s)).ln())
            }
            PhaseMode::Uncompensated => Ok((z_i / z_j).ln() - self.bias),
            PhaseMode::Compensated => {
                let log_ratio = (z_i / z_j).ln();
                let y_hat = log_ratio - self.bias;
                Ok(y_hat + Complex64::new(0.0, phase_shift(log_ratio.im, self.bias.im)))
            }
        }
    }

    pub fn sample(&self, z_i: Complex64, z_j: Complex64, ambient: Option<Complex64>) -> Result<LinearizedSample> {
        Ok(LinearizedSample {
            y: self.apply(z_i, z_j, ambient)?,
            h_eff: self.h_eff,
            tau: self.tau,
        })
    }
}

/// Linearizes one sample pair with estimated phase compensation using the
/// channel knowledge `csi`.
pub fn linearize_sample(
    z_i: Complex64,
    z_j: Complex64,
    csi: &ChannelRealization,
    i: usize,
    j: usize,
    powers: Powers,
) -> Result<LinearizedSample> {
    Linearizer::new(csi, i, j, powers, PhaseMode::Compensated)?.sample(z_i, z_j, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, synthesize_block, SystemConfig};
    use crate::rng::auxiliary;
    use crate::Symbol;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cancelling_pair_has_zero_channel() {
        let ch = ChannelRealization::with_backscatter_gain(vec![c(1.0, 0.0), c(0.0, 2.0)], vec![c(0.5, 0.25), c(-0.5, 1.0)], c(1.0, 0.0), c(0.01, 0.0));
        let (h, _) = effective_channel(&ch, 0, 1, Powers { signal: 10.0, noise: 1.0 }).unwrap();
        assert_eq!(h, c(0.0, 0.0));
    }

    #[test]
    fn tau_scales_inversely_with_signal_power() {
        let ch = sample_channel(&mut auxiliary(1, 0), &SystemConfig::default());
        let (_, t1) = effective_channel(&ch, 0, 1, Powers { signal: 10.0, noise: 1.0 }).unwrap();
        let (_, t2) = effective_channel(&ch, 0, 1, Powers { signal: 20.0, noise: 1.0 }).unwrap();
        assert_eq!(t1, 2.0 * t2);
    }

    #[test]
    fn swapping_branches() {
        let ch = sample_channel(&mut auxiliary(2, 0), &SystemConfig::default());
        let p = Powers { signal: 10.0, noise: 1.0 };
        let (h01, t01) = effective_channel(&ch, 0, 1, p).unwrap();
        let (h10, t10) = effective_channel(&ch, 1, 0, p).unwrap();
        assert_eq!(h01, -h10);
        assert_eq!(t01, t10);
    }

    #[test]
    fn dead_branch_is_degenerate() {
        let ch = ChannelRealization::with_backscatter_gain(vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0); 2], c(1.0, 0.0), c(0.01, 0.0));
        assert_eq!(effective_channel(&ch, 0, 1, Powers { signal: 1.0, noise: 1.0 }), Err(Error::DegenerateChannel { branch: 1 }));
    }

    #[test]
    fn noiseless_direct_link_only_gives_zero() {
        let ch = ChannelRealization::with_backscatter_gain(vec![c(0.4, -1.3), c(-0.9, -0.2)], vec![c(1.0, 0.0); 2], c(1.0, 0.0), c(0.0, 0.0));
        let s = c(0.8, 1.9);
        let y = linearize_sample(ch.h_sr()[0] * s, ch.h_sr()[1] * s, &ch, 0, 1, Powers { signal: 1.0, noise: 1.0 }).unwrap();
        assert!(y.y.norm() < 1e-15, "{}", y.y);
    }

    #[test]
    fn phase_shift_case_table() {
        assert_eq!(phase_shift(-0.75 * PI, 0.75 * PI), 2.0 * PI);
        assert_eq!(phase_shift(0.75 * PI, -0.75 * PI), -2.0 * PI);
        assert_eq!(phase_shift(0.2, -0.3), 0.0);
        // Boundary equality maps to no shift.
        assert_eq!(phase_shift(0.0, PI), 0.0);
        assert_eq!(phase_shift(PI, 0.0), 0.0);
    }

    #[test]
    fn constructed_wrap_is_compensated() {
        // Bias phase 3pi/4 and a ratio whose principal phase wrapped to -3pi/4:
        // difference -3pi/2, so +2pi is added back.
        let h_i = Complex64::from_polar(1.0, 0.75 * PI);
        let ch = ChannelRealization::with_backscatter_gain(vec![h_i, c(1.0, 0.0)], vec![c(0.0, 0.0); 2], c(1.0, 0.0), c(0.0, 0.0));
        let z_i = Complex64::from_polar(1.0, -0.75 * PI);
        let y = linearize_sample(z_i, c(1.0, 0.0), &ch, 0, 1, Powers { signal: 1.0, noise: 1.0 }).unwrap();
        assert!((y.y - c(0.0, 0.5 * PI)).norm() < 1e-14, "{}", y.y);
        let raw = Linearizer::new(&ch, 0, 1, Powers { signal: 1.0, noise: 1.0 }, PhaseMode::Uncompensated).unwrap().apply(z_i, c(1.0, 0.0), None).unwrap();
        assert!((raw - c(0.0, -1.5 * PI)).norm() < 1e-14);
    }

    #[test]
    fn zero_denominator_is_an_error() {
        let ch = sample_channel(&mut auxiliary(3, 0), &SystemConfig::default());
        let r = linearize_sample(c(1.0, 0.0), c(0.0, 0.0), &ch, 0, 1, Powers { signal: 1.0, noise: 1.0 });
        assert!(matches!(r, Err(Error::DivisionByZero { .. })));
    }

    #[test]
    fn compensation_only_moves_by_two_pi() {
        let cfg = SystemConfig { direct_link_snr_db: 10.0, ..Default::default() };
        let p = cfg.powers();
        for t in 0..50 {
            let ch = sample_channel(&mut auxiliary(4, t), &cfg);
            let blk = synthesize_block(&mut auxiliary(5, t), &ch, &[Symbol::Plus; 20], p);
            let lin = Linearizer::new(&ch, 0, 1, p, PhaseMode::Compensated).unwrap();
            let bias = (ch.h_sr()[0] / ch.h_sr()[1]).ln();
            for (&zi, &zj) in blk.branch(0).iter().zip(blk.branch(1)) {
                let y = lin.apply(zi, zj, None).unwrap();
                let log_ratio = (zi / zj).ln();
                assert!(((y + bias).re - log_ratio.re).abs() < 1e-12);
                let dphi = (y + bias).im - log_ratio.im;
                assert!([-2.0 * PI, 0.0, 2.0 * PI].iter().any(|v| (dphi - v).abs() < 1e-12), "{dphi}");
            }
        }
    }

    /// Median of `|y - (h x + w)| / |h|` with `w` computed directly from the
    /// same noise draws.
    fn median_linearization_residual(snr_db: f64) -> f64 {
        let cfg = SystemConfig { direct_link_snr_db: snr_db, ..Default::default() };
        let p = cfg.powers();
        let mut ratios = Vec::new();
        for t in 0..400 {
            let ch = sample_channel(&mut auxiliary(6, t), &cfg);
            let x = if t % 2 == 0 { Symbol::Plus } else { Symbol::Minus };
            let blk = synthesize_block(&mut auxiliary(7, t), &ch, &[x; 10], p);
            let lin = Linearizer::new(&ch, 0, 1, p, PhaseMode::Compensated).unwrap();
            for n in 0..10 {
                let s = blk.ambient_symbols()[n];
                let w0 = blk.branch(0)[n] - ch.composite(0, x) * s;
                let w1 = blk.branch(1)[n] - ch.composite(1, x) * s;
                let w = (w0 / ch.h_sr()[0] - w1 / ch.h_sr()[1]) / s;
                let y = lin.apply(blk.branch(0)[n], blk.branch(1)[n], None).unwrap();
                ratios.push((y - (lin.h_eff() * x.value() + w)).norm() / lin.h_eff().norm());
            }
        }
        ratios.sort_by(f64::total_cmp);
        ratios[ratios.len() / 2]
    }

    #[test]
    fn close_to_linear_model_at_high_snr() {
        let r20 = median_linearization_residual(20.0);
        let r30 = median_linearization_residual(30.0);
        let r40 = median_linearization_residual(40.0);
        eprintln!("median residual / |h|: 20 dB {r20:.4}, 30 dB {r30:.4}, 40 dB {r40:.4}");
        // The residual is second order in the per-branch noise, so it falls
        // roughly tenfold per 10 dB.
        assert!(r30 < 0.2 * r20 && r40 < 0.2 * r30);
        assert!(r40 < 0.05, "{r40}");
    }

    #[test]
    fn perfect_mode_needs_ambient_symbol() {
        let ch = sample_channel(&mut auxiliary(8, 0), &SystemConfig::default());
        let lin = Linearizer::new(&ch, 0, 1, Powers { signal: 1.0, noise: 1.0 }, PhaseMode::Perfect).unwrap();
        assert!(lin.apply(c(1.0, 0.0), c(1.0, 1.0), None).is_err());
    }

    #[test]
    fn perfect_and_compensated_agree_without_large_noise() {
        let cfg = SystemConfig { direct_link_snr_db: 25.0, ..Default::default() };
        let p = cfg.powers();
        let mut agree = 0;
        let mut total = 0;
        for t in 0..200 {
            let ch = sample_channel(&mut auxiliary(9, t), &cfg);
            let blk = synthesize_block(&mut auxiliary(10, t), &ch, &[Symbol::Minus; 10], p);
            let comp = Linearizer::new(&ch, 0, 1, p, PhaseMode::Compensated).unwrap();
            let perf = Linearizer::new(&ch, 0, 1, p, PhaseMode::Perfect).unwrap();
            for n in 0..10 {
                let (zi, zj, s) = (blk.branch(0)[n], blk.branch(1)[n], blk.ambient_symbols()[n]);
                let a = comp.apply(zi, zj, None).unwrap();
                let b = perf.apply(zi, zj, Some(s)).unwrap();
                total += 1;
                if (a - b).norm() < 1e-9 {
                    agree += 1;
                } else {
                    // Any disagreement is a whole turn of phase.
                    assert!(((a - b).im.abs() / (2.0 * PI) - 1.0).abs() < 1e-9);
                }
            }
        }
        assert!(agree as f64 / total as f64 > 0.99, "{agree}/{total}");
    }
}
