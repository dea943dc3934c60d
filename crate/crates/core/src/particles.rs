//! Weighted Dirac ensembles and their construction from Gaussian mixtures.
//!
//! An opinion distribution is approximated by `Σ w_i δ(x - X_i)` with
//! positive weights summing to one. [`discretize`] builds such an ensemble
//! on a uniform lattice from a [`DensitySpec`], and [`mollify`] turns an
//! ensemble back into a smooth density by convolving with a Gaussian.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Raw weights below this are treated as zero and their particles dropped.
pub const MIN_WEIGHT: f64 = 1e-300;

/// One Gaussian bump of an initial density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

impl GaussianComponent {
    pub fn density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        self.weight * (-d * d / (2.0 * self.variance)).exp() / (2.0 * PI * self.variance).sqrt()
    }

    /// Mass of this component on `[a, b)`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let s = (2.0 * self.variance).sqrt();
        let (za, zb) = ((a - self.mean) / s, (b - self.mean) / s);
        // Difference of upper tails on the right of the mean and of lower
        // tails on the left keeps the far cells accurate.
        let frac = if za >= 0.0 {
            0.5 * (libm::erfc(za) - libm::erfc(zb))
        } else if zb <= 0.0 {
            0.5 * (libm::erfc(-zb) - libm::erfc(-za))
        } else {
            0.5 * (libm::erf(zb) - libm::erf(za))
        };
        self.weight * frac
    }
}

/// A Gaussian-mixture description of an initial opinion density `f₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    components: Vec<GaussianComponent>,
}

impl DensitySpec {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDensity("no components".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if !(c.variance.is_finite() && c.variance > 0.0) {
                return Err(Error::InvalidDensity(format!(
                    "component {i} has non-positive variance {}",
                    c.variance
                )));
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::InvalidDensity(format!(
                    "component {i} has non-positive weight {}",
                    c.weight
                )));
            }
            if !c.mean.is_finite() {
                return Err(Error::InvalidDensity(format!("component {i} has non-finite mean")));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensity(format!(
                "component weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { components })
    }

    /// Equal-weight mixture of Gaussians sharing one variance.
    pub fn equal_mixture(means: &[f64], variance: f64) -> Result<Self> {
        let w = 1.0 / means.len().max(1) as f64;
        Self::new(
            means
                .iter()
                .map(|&mean| GaussianComponent {
                    weight: w,
                    mean,
                    variance,
                })
                .collect(),
        )
    }

    /// `½ (N(-1, ¼) + N(1, ¼))`.
    pub fn two_bump() -> Self {
        Self::equal_mixture(&[-1.0, 1.0], 0.25).expect("valid preset")
    }

    /// `⅓ (N(-1, 1/10) + N(0, 1/10) + N(1, 1/10))`.
    pub fn three_bump() -> Self {
        Self::equal_mixture(&[-1.0, 0.0, 1.0], 0.1).expect("valid preset")
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn density(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.density(x)).sum()
    }

    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.components.iter().map(|c| c.mass_between(a, b)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.mean).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * (c.variance + c.mean * c.mean))
            .sum()
    }
}

/// How the raw weight of the lattice cell around `x_i` is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// `f₀(x_i) · dx`.
    #[default]
    Midpoint,
    /// Exact mass of `f₀` on `[x_i - dx/2, x_i + dx/2)`.
    Exact,
}

/// A discrete opinion measure `Σ w_i δ(x - X_i)`.
///
/// Constructed ensembles have strictly increasing positions, positive
/// weights, and total weight one. Ensembles produced by time stepping keep
/// the weights bit-for-bit and may only contain ties where particles have
/// collapsed to the same floating-point value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleEnsemble {
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl ParticleEnsemble {
    /// Builds a normalized ensemble from raw positions and nonnegative
    /// weights. Positions are sorted (weights follow), coincident positions
    /// are merged, and weights below [`MIN_WEIGHT`] are dropped.
    pub fn new(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} positions but {} weights",
                positions.len(),
                weights.len()
            )));
        }
        if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidEnsemble(format!("position {i} is not finite")));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidEnsemble(format!("weight {i} is negative or not finite")));
        }

        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));

        let mut xs: Vec<f64> = Vec::with_capacity(order.len());
        let mut ws: Vec<f64> = Vec::with_capacity(order.len());
        for i in order {
            let (x, w) = (positions[i], weights[i]);
            if w < MIN_WEIGHT {
                continue;
            }
            match xs.last() {
                Some(&last) if last == x => *ws.last_mut().unwrap() += w,
                _ => {
                    xs.push(x);
                    ws.push(w);
                }
            }
        }
        if xs.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let total: f64 = ws.iter().sum();
        for w in &mut ws {
            *w /= total;
        }
        Ok(Self {
            positions: xs,
            weights: ws,
        })
    }

    /// A single unit-mass particle.
    pub fn single(x: f64) -> Self {
        Self {
            positions: vec![x],
            weights: vec![1.0],
        }
    }

    /// Replaces positions and keeps the weights untouched. Used by the time
    /// steppers, which guarantee `positions` is nondecreasing.
    pub(crate) fn with_positions(&self, positions: Vec<f64>) -> Self {
        debug_assert_eq!(positions.len(), self.weights.len());
        Self {
            positions,
            weights: self.weights.clone(),
        }
    }

    /// Reassembles an ensemble without renormalizing, e.g. when reading a
    /// snapshot back from disk. Positions must be nondecreasing.
    pub fn from_parts(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if positions.len() != weights.len() || positions.is_empty() {
            return Err(Error::InvalidEnsemble("length mismatch or empty".into()));
        }
        if positions.windows(2).any(|p| p[0].is_nan() || p[0] > p[1]) {
            return Err(Error::InvalidEnsemble("positions are not sorted".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidEnsemble("weights must be positive".into()));
        }
        Ok(Self { positions, weights })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min_position(&self) -> f64 {
        self.positions[0]
    }

    pub fn max_position(&self) -> f64 {
        self.positions[self.positions.len() - 1]
    }

    pub fn diameter(&self) -> f64 {
        self.max_position() - self.min_position()
    }

    /// `Σ_i w_i X_i^k`.
    pub fn moment(&self, k: i32) -> f64 {
        self.positions
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * x.powi(k))
            .sum()
    }

    /// Total weight of particles with `a ≤ X_i ≤ b`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        self.positions
            .iter()
            .zip(&self.weights)
            .filter(|(x, _)| a <= **x && **x <= b)
            .map(|(_, w)| w)
            .sum()
    }
}

/// Places `2m - 1` particles at `i·dx`, `i = -m+1 ..= m-1`, weighted by the
/// mass of `spec` in the surrounding cell and renormalized to one.
pub fn discretize(spec: &DensitySpec, m: usize, dx: f64, mode: WeightMode) -> Result<ParticleEnsemble> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "must be at least 1".into(),
        });
    }
    positive("dx", dx)?;
    let m = m as i64;
    let positions: Vec<f64> = (-m + 1..m).map(|i| i as f64 * dx).collect();
    discretize_at(spec, &positions, dx, mode)
}

/// Like [`discretize`] but on caller-chosen lattice points with spacing `dx`.
pub fn discretize_at(spec: &DensitySpec, positions: &[f64], dx: f64, mode: WeightMode) -> Result<ParticleEnsemble> {
    positive("dx", dx)?;
    let weights = positions
        .iter()
        .map(|&x| match mode {
            WeightMode::Midpoint => spec.density(x) * dx,
            WeightMode::Exact => spec.mass_between(x - 0.5 * dx, x + 0.5 * dx),
        })
        .collect();
    ParticleEnsemble::new(positions.to_vec(), weights)
}

/// Exact mass of `spec` covered by the cells of [`discretize`]; one minus
/// this is the mass lost to truncation before renormalization.
pub fn captured_mass(spec: &DensitySpec, m: usize, dx: f64) -> f64 {
    let half = (m as f64 - 0.5) * dx;
    spec.mass_between(-half, half)
}

#[inline]
fn gaussian(d: f64, sigma: f64) -> f64 {
    (-0.5 * (d / sigma).powi(2)).exp() * (FRAC_1_SQRT_2 / (sigma * PI.sqrt()))
}

/// Mollified density `Σ_i w_i N(x; X_i, σ²)` at a single point.
pub fn mollify_at(ens: &ParticleEnsemble, sigma: f64, x: f64) -> f64 {
    ens.positions
        .iter()
        .zip(&ens.weights)
        .map(|(&xi, &w)| w * gaussian(x - xi, sigma))
        .sum()
}

/// Mollified density evaluated at every point of `xs`.
///
/// Each output value is an index-ordered sum over all particles, so the
/// result does not depend on how the points are split across threads.
pub fn mollify(ens: &ParticleEnsemble, sigma: f64, xs: &[f64]) -> Result<Vec<f64>> {
    positive("sigma", sigma)?;
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "xs",
            reason: "evaluation points must be finite".into(),
        });
    }
    Ok(xs.par_iter().map(|&x| mollify_at(ens, sigma, x)).collect())
}
