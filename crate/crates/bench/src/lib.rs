//! Inputs shared by the benchmarks.

use hk_core::ParticleEnsemble;

/// `n` sorted, irregularly spaced particles on `[-10, 10]` with uneven
/// weights. Deterministic, so runs are comparable.
pub fn irregular_ensemble(n: usize) -> ParticleEnsemble {
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            let s = (i as f64 + 0.5) / n as f64;
            -10.0 + 20.0 * s + 0.3 / n as f64 * (37.0 * s).sin()
        })
        .collect();
    let ws: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (i as f64 * 0.61).cos()).collect();
    ParticleEnsemble::new(xs, ws).expect("valid ensemble")
}
