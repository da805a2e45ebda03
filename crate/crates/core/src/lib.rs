//! Link-level simulation of ambient backscatter communication with a
//! multi-antenna Reader that detects Tag bits from the complex ratio of two
//! antenna branches.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] draws block-fading channels and synthesizes received samples.
//! * [`ratio_stats`] holds the closed-form densities, the error-region
//!   antiderivative `G`, the closed-form BER and the pair-selection metric.
//! * [`linearize`] maps raw samples onto the linear model `y = h x + w`.
//! * [`detectors`] provides the ML ratio detector, the minimum-distance
//!   detector and two baselines (magnitude ratio, energy).
//! * [`coding`] implements averaging, repetition coding and block
//!   interleaving.
//! * [`selection`] picks the best antenna pair for `Q > 2`.
//! * [`harness`] runs reproducible Monte Carlo BER sweeps.
//! * [`selfcheck`] bundles the analytic-vs-numeric oracles.

pub mod channel;
pub mod coding;
pub mod detectors;
mod error;
pub mod harness;
pub mod linearize;
pub mod quad;
pub mod ratio_stats;
pub mod rng;
pub mod selection;
pub mod selfcheck;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// A BPSK Tag symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Minus,
    Plus,
}

impl Symbol {
    pub const BOTH: [Symbol; 2] = [Symbol::Minus, Symbol::Plus];

    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Symbol::Minus => -1.0,
            Symbol::Plus => 1.0,
        }
    }

    #[inline]
    pub fn from_bool(plus: bool) -> Self {
        if plus {
            Symbol::Plus
        } else {
            Symbol::Minus
        }
    }

    #[inline]
    pub fn flip(self) -> Self {
        match self {
            Symbol::Minus => Symbol::Plus,
            Symbol::Plus => Symbol::Minus,
        }
    }
}

impl std::ops::Neg for Symbol {
    type Output = Symbol;
    fn neg(self) -> Symbol {
        self.flip()
    }
}

/// Converts decibels to a linear power ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
