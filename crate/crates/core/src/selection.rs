//! Antenna-pair selection for Readers with more than two antennas.

use crate::channel::ChannelRealization;
use crate::ratio_stats::eta;
use crate::{Error, Result};

/// Selected ratio `z_i / z_j` (0-based, `i < j`) and its metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioChoice {
    pub i: usize,
    pub j: usize,
    pub eta_value: f64,
}

/// Searches all `Q(Q-1)/2` pairs for the smallest `eta`. Equal values keep
/// the lexicographically first pair.
pub fn select_ratio(ch: &ChannelRealization) -> Result<RatioChoice> {
    let q = ch.num_antennas();
    if q < 2 {
        return Err(Error::Config(format!("selection needs at least two antennas, got {q}")));
    }
    let mut best: Option<RatioChoice> = None;
    for i in 0..q {
        for j in i + 1..q {
            let eta_value = eta(ch, i, j)?;
            if best.is_none_or(|b| eta_value < b.eta_value) {
                best = Some(RatioChoice { i, j, eta_value });
            }
        }
    }
    match best {
        Some(b) if b.eta_value.is_finite() => Ok(b),
        _ => Err(Error::AllPairsDegenerate),
    }
}
