//! Floating-point summation strategies.
//!
//! Every reduction over particles in this crate goes through [`Summation`],
//! so that results are reproducible bit-for-bit for a given mode.

use serde::{Deserialize, Serialize};

/// How a sequence of terms is reduced to a single sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    /// Left-to-right accumulation in index order.
    #[default]
    Ordered,
    /// Recursive pairwise (cascade) summation; error grows as O(log n).
    Pairwise,
}

const PAIRWISE_BLOCK: usize = 16;

impl Summation {
    pub fn sum(self, terms: &[f64]) -> f64 {
        match self {
            Summation::Ordered => terms.iter().sum(),
            Summation::Pairwise => pairwise(terms),
        }
    }

    /// Sums `f(i)` for `i in 0..n` without materializing the terms in
    /// ordered mode.
    pub fn sum_by<F: Fn(usize) -> f64>(self, n: usize, f: F) -> f64 {
        match self {
            Summation::Ordered => (0..n).map(f).sum(),
            Summation::Pairwise => {
                let terms: Vec<f64> = (0..n).map(f).collect();
                pairwise(&terms)
            }
        }
    }
}

fn pairwise(terms: &[f64]) -> f64 {
    if terms.len() <= PAIRWISE_BLOCK {
        terms.iter().sum()
    } else {
        let mid = terms.len() / 2;
        pairwise(&terms[..mid]) + pairwise(&terms[mid..])
    }
}
