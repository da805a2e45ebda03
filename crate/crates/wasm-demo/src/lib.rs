//! Browser bindings for three interactive views: the ratio density under
//! each hypothesis, BER curves, and the linearized constellation.
//!
//! Every function returns a flat `Float64Array` so the page can draw it
//! without further decoding.

use ambc::channel::{sample_channel, synthesize_block, SystemConfig};
use ambc::harness::{run_experiment, ExperimentSpec, Scenario, StopRule};
use ambc::linearize::{effective_channel, Linearizer, PhaseMode};
use ambc::ratio_stats::{closed_form_ber, hypothesis_stats, ratio_pdf};
use ambc::rng::auxiliary;
use ambc::{Complex64, Symbol};
use wasm_bindgen::prelude::*;

fn system(direct_snr_db: f64, relative_snr_db: f64, seed: u64) -> SystemConfig {
    SystemConfig {
        direct_link_snr_db: direct_snr_db,
        relative_snr_db,
        seed,
        ..Default::default()
    }
}

fn parse_mode(mode: &str) -> Result<PhaseMode, String> {
    match mode {
        "uncompensated" => Ok(PhaseMode::Uncompensated),
        "compensated" => Ok(PhaseMode::Compensated),
        "perfect" => Ok(PhaseMode::Perfect),
        _ => Err(format!("unknown phase mode `{mode}`")),
    }
}

/// `log10` of the density of `z_0 / z_1` on an `n x n` grid for one random
/// channel, under `x = +1` or `x = -1`.
///
/// Layout: `[re_min, re_max, im_min, im_max, v(0,0), v(0,1), ...]`, rows
/// running over the imaginary axis from top to bottom.
#[wasm_bindgen]
pub fn ratio_density(direct_snr_db: f64, relative_snr_db: f64, seed: u64, plus: bool, n: usize) -> Result<Vec<f64>, String> {
    let sys = system(direct_snr_db, relative_snr_db, seed);
    sys.validate().map_err(|e| e.to_string())?;
    let n = n.clamp(8, 512);
    let ch = sample_channel(&mut auxiliary(seed, 0), &sys);
    let st = hypothesis_stats(&ch, 0, 1, Symbol::from_bool(plus), sys.powers());
    // Both hypotheses share the window so toggling shows the shift.
    let other = hypothesis_stats(&ch, 0, 1, Symbol::from_bool(!plus), sys.powers());
    let center = (st.ratio_center() + other.ratio_center()) / 2.0;
    let half = 4.0 * st.ratio_scale().max(other.ratio_scale()) + (st.ratio_center() - other.ratio_center()).norm();
    let mut out = vec![center.re - half, center.re + half, center.im - half, center.im + half];
    out.reserve(n * n);
    for row in 0..n {
        let im = center.im + half - 2.0 * half * (row as f64 + 0.5) / n as f64;
        for col in 0..n {
            let re = center.re - half + 2.0 * half * (col as f64 + 0.5) / n as f64;
            let f = ratio_pdf(Complex64::new(re, im), &st).map_err(|e| e.to_string())?;
            out.push(f.max(1e-300).log10());
        }
    }
    Ok(out)
}

/// Monte Carlo BER curve for `scenario` over `snr_start..=snr_stop`.
///
/// Layout: `[snr, ber, ci95]` per point.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn ber_curve(
    scenario: &str,
    repetition_length: usize,
    num_antennas: usize,
    snr_start: f64,
    snr_stop: f64,
    snr_step: f64,
    max_bits: u64,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let scenario: Scenario = scenario.parse().map_err(|e: ambc::Error| e.to_string())?;
    if !(snr_step > 0.0) || snr_stop < snr_start {
        return Err("need snr_step > 0 and snr_stop >= snr_start".into());
    }
    let count = ((snr_stop - snr_start) / snr_step + 1e-9).floor() as usize + 1;
    let grid = (0..count).map(|i| snr_start + i as f64 * snr_step).collect();
    let sys = SystemConfig {
        repetition_length,
        coherence_length: repetition_length,
        num_antennas,
        seed,
        ..Default::default()
    };
    let spec = ExperimentSpec {
        workers: 1,
        ..ExperimentSpec::new(
            scenario,
            grid,
            sys,
            StopRule {
                max_bits,
                target_errors: 500,
            },
        )
    };
    let curve = run_experiment(&spec).map_err(|e| e.to_string())?;
    Ok(curve.points.iter().flat_map(|p| [p.snr_db, p.ber, p.half_width_95]).collect())
}

/// Closed-form BER averaged over `channels` random channel draws at each SNR
/// of the given grid, for the single-sample min-distance detector.
///
/// Layout: `[snr, ber]` per point.
#[wasm_bindgen]
pub fn closed_form_curve(relative_snr_db: f64, snr_start: f64, snr_stop: f64, snr_step: f64, channels: u64, seed: u64) -> Result<Vec<f64>, String> {
    if !(snr_step > 0.0) || snr_stop < snr_start {
        return Err("need snr_step > 0 and snr_stop >= snr_start".into());
    }
    let count = ((snr_stop - snr_start) / snr_step + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let snr = snr_start + i as f64 * snr_step;
        let sys = system(snr, relative_snr_db, seed);
        sys.validate().map_err(|e| e.to_string())?;
        let mut sum = 0.0;
        for t in 0..channels {
            let ch = sample_channel(&mut auxiliary(seed, t), &sys);
            let (h, tau) = effective_channel(&ch, 0, 1, sys.powers()).map_err(|e| e.to_string())?;
            sum += closed_form_ber(h, tau);
        }
        out.extend([snr, sum / channels.max(1) as f64]);
    }
    Ok(out)
}

/// Linearized samples `y` of one block on one random channel.
///
/// Layout: `[h_re, h_im, y_re, y_im, x, y_re, y_im, x, ...]` with `x = ±1`
/// the transmitted symbol.
#[wasm_bindgen]
pub fn constellation(direct_snr_db: f64, relative_snr_db: f64, samples: usize, seed: u64, mode: &str) -> Result<Vec<f64>, String> {
    let sys = system(direct_snr_db, relative_snr_db, seed);
    sys.validate().map_err(|e| e.to_string())?;
    let mode = parse_mode(mode)?;
    let mut rng = auxiliary(seed, 1);
    let ch = sample_channel(&mut rng, &sys);
    let powers = sys.powers();
    let lin = Linearizer::new(&ch, 0, 1, powers, mode).map_err(|e| e.to_string())?;
    let xs: Vec<Symbol> = (0..samples).map(|n| Symbol::from_bool(n % 2 == 0)).collect();
    let block = synthesize_block(&mut rng, &ch, &xs, powers);
    let (z0, z1, s) = (block.branch(0), block.branch(1), block.ambient_symbols());
    let h = lin.h_eff();
    let mut out = vec![h.re, h.im];
    for n in 0..samples {
        if let Ok(y) = lin.apply(z0[n], z1[n], Some(s[n])) {
            out.extend([y.re, y.im, xs[n].value()]);
        }
    }
    Ok(out)
}
