//! Repetition coding over coherence blocks: symbol averaging, hard and soft
//! decisions, and transpose interleaving.
//!
//! Matrices are laid out with one column per coherence block and one row per
//! symbol position inside the block.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::detectors::{min_distance_detect, Decision};
use crate::linearize::LinearizedSample;
use crate::{Error, Result, Symbol};

/// Information bits of one super-block and the symbols sent for them.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeBlock {
    bits: Vec<Symbol>,
    tx_matrix: Array2<Symbol>,
    interleaved: bool,
}

impl CodeBlock {
    pub fn bits(&self) -> &[Symbol] {
        &self.bits
    }

    /// Transmitted symbols; column `b` is what coherence block `b` carries.
    pub fn tx_matrix(&self) -> &Array2<Symbol> {
        &self.tx_matrix
    }

    pub fn interleaved(&self) -> bool {
        self.interleaved
    }

    pub fn num_blocks(&self) -> usize {
        self.tx_matrix.ncols()
    }

    /// Symbols sent during coherence block `b`.
    pub fn block_symbols(&self, b: usize) -> Vec<Symbol> {
        self.tx_matrix.column(b).to_vec()
    }

    /// The repetition matrix `X` (column `k` is bit `k` repeated), undoing
    /// the interleaver if present.
    pub fn deinterleaved(&self) -> Array2<Symbol> {
        if self.interleaved {
            self.tx_matrix.t().to_owned()
        } else {
            self.tx_matrix.clone()
        }
    }
}

/// Repeats each bit `m` times into `X` and, when interleaving, sends `X^T`.
pub fn encode(bits: &[Symbol], m: usize, interleave: bool) -> CodeBlock {
    assert!(!bits.is_empty() && m >= 1, "need at least one bit and one repetition");
    let x = Array2::from_shape_fn((m, bits.len()), |(_, k)| bits[k]);
    let tx_matrix = if interleave { x.reversed_axes() } else { x };
    CodeBlock {
        bits: bits.to_vec(),
        tx_matrix,
        interleaved: interleave,
    }
}

/// Linearized observations of one super-block laid out like
/// [`CodeBlock::tx_matrix`], with the linear-model parameters of every block.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedCode {
    y_matrix: Array2<Complex64>,
    h_per_block: Vec<Complex64>,
    tau_per_block: Vec<f64>,
    interleaved: bool,
}

impl ReceivedCode {
    pub fn new(y_matrix: Array2<Complex64>, h_per_block: Vec<Complex64>, tau_per_block: Vec<f64>, interleaved: bool) -> Result<Self> {
        let blocks = y_matrix.ncols();
        if h_per_block.len() != blocks || tau_per_block.len() != blocks {
            return Err(Error::Domain(format!(
                "{} blocks of samples but {} channels and {} noise scales",
                blocks,
                h_per_block.len(),
                tau_per_block.len()
            )));
        }
        Ok(Self {
            y_matrix,
            h_per_block,
            tau_per_block,
            interleaved,
        })
    }

    pub fn y_matrix(&self) -> &Array2<Complex64> {
        &self.y_matrix
    }

    pub fn h_per_block(&self) -> &[Complex64] {
        &self.h_per_block
    }

    pub fn tau_per_block(&self) -> &[f64] {
        &self.tau_per_block
    }

    pub fn interleaved(&self) -> bool {
        self.interleaved
    }

    /// Number of codewords (information bits).
    pub fn num_codewords(&self) -> usize {
        if self.interleaved {
            self.y_matrix.nrows()
        } else {
            self.y_matrix.ncols()
        }
    }

    /// The samples of codeword `k` with the channel each one saw. After
    /// de-interleaving this is row `k` of `Y` (one sample per block);
    /// otherwise it is column `k` (all samples from block `k`).
    pub fn codeword(&self, k: usize) -> impl Iterator<Item = LinearizedSample> + '_ {
        let (lane, fixed) = if self.interleaved {
            (self.y_matrix.row(k), None)
        } else {
            (self.y_matrix.column(k), Some(k))
        };
        lane.into_iter().enumerate().map(move |(m, &y)| {
            let b = fixed.unwrap_or(m);
            LinearizedSample {
                y,
                h_eff: self.h_per_block[b],
                tau: self.tau_per_block[b],
            }
        })
    }
}

/// Averages the codeword's samples and applies the minimum-distance rule.
/// Only defined without interleaving, where the codeword sees one channel.
pub fn decode_average(rx: &ReceivedCode, k: usize) -> Result<Decision> {
    if rx.interleaved {
        return Err(Error::Domain("averaging needs a codeword inside one coherence block".into()));
    }
    let mut count = 0usize;
    let sum = rx.codeword(k).fold(Complex64::new(0.0, 0.0), |acc, s| {
        count += 1;
        acc + s.y
    });
    Ok(min_distance_detect(&LinearizedSample {
        y: sum / count as f64,
        h_eff: rx.h_per_block[k],
        tau: rx.tau_per_block[k],
    }))
}

/// Majority vote over per-sample minimum-distance decisions. A tie decides
/// `+1`.
pub fn decode_hard(rx: &ReceivedCode, k: usize) -> Decision {
    let votes: i64 = rx
        .codeword(k)
        .map(|s| match min_distance_detect(&s).x_hat {
            Symbol::Plus => 1,
            Symbol::Minus => -1,
        })
        .sum();
    Decision {
        x_hat: Symbol::from_bool(votes >= 0),
        score_margin: votes as f64,
    }
}

/// Soft-decision metric `sum_m ln(|y_m - h_m x|^2 + pi tau_m)` of one codeword.
pub fn soft_metric<I: IntoIterator<Item = LinearizedSample>>(samples: I, x: Symbol) -> f64 {
    let xv = x.value();
    samples
        .into_iter()
        .map(|s| ((s.y - s.h_eff * xv).norm_sqr() + PI * s.tau).ln())
        .sum()
}

/// Joint ML decision over the codeword under the linearized noise density.
/// Ties decide `-1`.
pub fn decode_soft(rx: &ReceivedCode, k: usize) -> Decision {
    let (mut minus, mut plus) = (0.0, 0.0);
    for s in rx.codeword(k) {
        let base = (s.y.norm_sqr() + s.h_eff.norm_sqr()) + PI * s.tau;
        let cross = 2.0 * (s.y * s.h_eff.conj()).re;
        minus += (base + cross).ln();
        plus += (base - cross).ln();
    }
    Decision::from_margin(minus - plus)
}
