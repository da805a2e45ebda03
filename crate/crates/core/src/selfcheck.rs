//! Fast analytic and Monte Carlo consistency checks of the library's
//! closed forms.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{sample_channel, Powers, SystemConfig};
use crate::harness::conditional_min_distance_errors;
use crate::linearize::{effective_channel, PhaseMode};
use crate::quad::{integrate_plane, Tolerance};
use crate::ratio_stats::{ber_from_g, closed_form_ber, error_pdf, hypothesis_stats, linear_noise_pdf, ratio_pdf};
use crate::rng::auxiliary;
use crate::Symbol;

/// Tolerance on every density's total mass.
pub const MASS_TOL: f64 = 1e-3;
/// Tolerance between the four-term `G` combination and the closed-form BER.
pub const G_IDENTITY_TOL: f64 = 1e-12;
/// Monte Carlo samples per channel in the simulation check.
pub const MC_SAMPLES: u64 = 200_000;

/// Signature of a closed-form BER `P_b(h, tau)` under test.
pub type BerFn = fn(Complex64, f64) -> f64;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SelfCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn check_channels() -> Vec<crate::channel::ChannelRealization> {
    let system = SystemConfig::default();
    (0..3).map(|t| sample_channel(&mut auxiliary(0xc0ffee, t), &system)).collect()
}

fn mass_check(name: &'static str, masses: Vec<f64>) -> CheckOutcome {
    let worst = masses.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    CheckOutcome {
        name,
        passed: worst < MASS_TOL,
        detail: format!("max |mass - 1| = {worst:.2e} over {} cases (tol {MASS_TOL:.0e})", masses.len()),
    }
}

fn ratio_masses() -> Vec<f64> {
    let tol = Tolerance::new(1e-9, 1e-8);
    let mut out = Vec::new();
    for ch in check_channels() {
        for (snr, x) in [(10.0, Symbol::Minus), (1000.0, Symbol::Plus)] {
            let st = hypothesis_stats(&ch, 0, 1, x, Powers { signal: snr, noise: 1.0 });
            let mass = integrate_plane(|l| ratio_pdf(l, &st).unwrap_or(f64::NAN), st.ratio_center(), st.ratio_scale(), tol);
            out.push(mass.value);
        }
    }
    out
}

fn linear_noise_masses() -> Vec<f64> {
    let tol = Tolerance::new(1e-10, 1e-9);
    let mut out = Vec::new();
    for ch in check_channels() {
        let p = Powers { signal: 100.0, noise: 1.0 };
        let Ok((_, tau)) = effective_channel(&ch, 0, 1, p) else {
            out.push(f64::NAN);
            continue;
        };
        let mass = integrate_plane(|w| linear_noise_pdf(w, &ch, 0, 1, p).unwrap_or(f64::NAN), Complex64::new(0.0, 0.0), (PI * tau).sqrt(), tol);
        out.push(mass.value);
    }
    out
}

fn error_masses() -> Vec<f64> {
    let tol = Tolerance::new(1e-10, 1e-9);
    [(1e-3, 1e-4), (0.2, 3.0), (5.0, 0.5)]
        .into_iter()
        .map(|(tau, h2)| {
            let scale = (PI * tau * h2).sqrt();
            integrate_plane(|phi| error_pdf(phi, tau, h2), Complex64::new(0.0, 0.0), scale, tol).value
        })
        .collect()
}

fn g_identity(ber: BerFn) -> CheckOutcome {
    let mut rng = auxiliary(0x6_1d, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let h = Complex64::from_polar(10f64.powf(rng.random_range(-3.0..1.0)), rng.random_range(-PI..PI));
        let tau = 10f64.powf(rng.random_range(-6.0..1.0));
        let four_term = ber_from_g(h.norm_sqr(), tau).unwrap_or(f64::NAN);
        let d = (four_term - ber(h, tau)).abs();
        worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
    }
    CheckOutcome {
        name: "G four-term identity",
        passed: worst < G_IDENTITY_TOL,
        detail: format!("max |difference| = {worst:.2e} over 1000 points (tol {G_IDENTITY_TOL:.0e})"),
    }
}

fn mc_oracle(ber: BerFn) -> CheckOutcome {
    let system = SystemConfig::default().at_snr(25.0);
    let powers = system.powers();
    let mut passed = true;
    let mut parts = Vec::new();
    for (t, ch) in check_channels().into_iter().enumerate() {
        let Ok((h, tau)) = effective_channel(&ch, 0, 1, powers) else {
            passed = false;
            continue;
        };
        let p = ber(h, tau);
        let errors = conditional_min_distance_errors(&ch, powers, PhaseMode::Compensated, MC_SAMPLES, t as u64).unwrap_or(u64::MAX);
        let mc = errors as f64 / MC_SAMPLES as f64;
        // Binomial spread plus a margin for the linearization's own error.
        let allowed = 4.0 * (p * (1.0 - p) / MC_SAMPLES as f64).sqrt() + 0.02 * p;
        passed &= (mc - p).abs() <= allowed;
        parts.push(format!("{mc:.4} vs {p:.4}"));
    }
    CheckOutcome {
        name: "Monte Carlo vs closed-form BER",
        passed,
        detail: parts.join(", "),
    }
}

/// Runs every check against the library's BER formula.
pub fn run_selfcheck() -> SelfCheckReport {
    run_selfcheck_with(closed_form_ber)
}

/// Runs every check with `ber` standing in for the closed-form BER.
pub fn run_selfcheck_with(ber: BerFn) -> SelfCheckReport {
    SelfCheckReport {
        checks: vec![
            mass_check("ratio density mass", ratio_masses()),
            mass_check("linearized noise density mass", linear_noise_masses()),
            mass_check("detection error density mass", error_masses()),
            g_identity(ber),
            mc_oracle(ber),
        ],
    }
}
