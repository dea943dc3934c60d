//! The exponential interaction function `η(z) = e^{-z/ν}` and the fields it
//! induces from a Dirac-sum opinion measure.
//!
//! For `f = Σ_j w_j δ(x - X_j)` every field has a closed form:
//!
//! ```text
//! g(x) = Σ_j w_j e^{-|x-X_j|/ν}
//! h(x) = Σ_j w_j (x - X_j) e^{-|x-X_j|/ν}
//! H(x) = ∫_{-∞}^x h = Σ_j w_j Φ(x - X_j)
//!         Φ(u) = e^{u/ν} (νu - ν²)      u ≤ 0
//!         Φ(u) = -e^{-u/ν} (νu + ν²)    u > 0
//! ‖g‖² = Σ_i Σ_j w_i w_j e^{-d_ij/ν} (ν + d_ij),   d_ij = |X_i - X_j|
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::particles::ParticleEnsemble;
use crate::summation::Summation;

/// Parameters of the interaction law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Opinion-distance scale ν of the interaction function.
    pub nu: f64,
    /// Conformity rate α; a uniform factor on every velocity.
    pub alpha: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self { nu: 0.5, alpha: 1.0 }
    }
}

impl KernelParams {
    pub fn new(nu: f64, alpha: f64) -> Result<Self> {
        Ok(Self {
            nu: positive("nu", nu)?,
            alpha: positive("alpha", alpha)?,
        })
    }

    pub fn with_nu(nu: f64) -> Result<Self> {
        Self::new(nu, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.nu, self.alpha).map(|_| ())
    }
}

/// Interaction weight `η(z) = e^{-z/ν}` for an opinion distance `z ≥ 0`.
pub fn eta(z: f64, p: &KernelParams) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::InvalidParameter {
            name: "z",
            reason: format!("opinion distance must be nonnegative, got {z}"),
        });
    }
    Ok((-z / p.nu).exp())
}

/// Antiderivative of a single atom's `h` contribution, vanishing at `-∞`.
#[inline]
fn big_phi(u: f64, nu: f64) -> f64 {
    if u <= 0.0 {
        (u / nu).exp() * (nu * u - nu * nu)
    } else {
        -(-u / nu).exp() * (nu * u + nu * nu)
    }
}

/// Locally averaged density `g(x)`.
pub fn field_g(ens: &ParticleEnsemble, x: f64, p: &KernelParams) -> f64 {
    field_g_with(ens, x, p, Summation::Ordered)
}

pub fn field_g_with(ens: &ParticleEnsemble, x: f64, p: &KernelParams, s: Summation) -> f64 {
    let (xs, ws) = (ens.positions(), ens.weights());
    s.sum_by(xs.len(), |j| ws[j] * (-(x - xs[j]).abs() / p.nu).exp())
}

/// Drift-weighted field `h(x)`; `-h/g` is the opinion velocity at `x`.
pub fn field_h(ens: &ParticleEnsemble, x: f64, p: &KernelParams) -> f64 {
    field_h_with(ens, x, p, Summation::Ordered)
}

pub fn field_h_with(ens: &ParticleEnsemble, x: f64, p: &KernelParams, s: Summation) -> f64 {
    let (xs, ws) = (ens.positions(), ens.weights());
    s.sum_by(xs.len(), |j| {
        let u = x - xs[j];
        ws[j] * u * (-u.abs() / p.nu).exp()
    })
}

/// Running integral `H(x) = ∫_{-∞}^x h`; nonpositive everywhere.
#[allow(non_snake_case)]
pub fn field_H(ens: &ParticleEnsemble, x: f64, p: &KernelParams) -> f64 {
    field_H_with(ens, x, p, Summation::Ordered)
}

#[allow(non_snake_case)]
pub fn field_H_with(ens: &ParticleEnsemble, x: f64, p: &KernelParams, s: Summation) -> f64 {
    let (xs, ws) = (ens.positions(), ens.weights());
    s.sum_by(xs.len(), |j| ws[j] * big_phi(x - xs[j], p.nu))
}

/// Concentration functional `‖g‖²_{L²}` by the exact pairwise double sum.
pub fn concentration(ens: &ParticleEnsemble, p: &KernelParams) -> f64 {
    concentration_with(ens, p, Summation::Ordered)
}

pub fn concentration_with(ens: &ParticleEnsemble, p: &KernelParams, s: Summation) -> f64 {
    let (xs, ws) = (ens.positions(), ens.weights());
    let nu = p.nu;
    let rows: Vec<f64> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            ws[i]
                * s.sum_by(xs.len(), |j| {
                    let d = (xs[i] - xs[j]).abs();
                    ws[j] * (-d / nu).exp() * (nu + d)
                })
        })
        .collect();
    s.sum(&rows)
}

/// One-sided attenuated sums over a sorted ensemble, all evaluated at the
/// particle positions themselves.
///
/// For particle `i`, with `d = |X_i - X_j|`:
///
/// ```text
/// left0[i]  = Σ_{j<i} w_j e^{-d/ν}      left1[i]  = Σ_{j<i} w_j d e^{-d/ν}
/// right0[i] = Σ_{j>i} w_j e^{-d/ν}      right1[i] = Σ_{j>i} w_j d e^{-d/ν}
/// ```
///
/// The left sums obey the recurrence, with `δ = X_i - X_{i-1}` and
/// `a = e^{-δ/ν}`,
///
/// ```text
/// left0[i] = a (left0[i-1] + w_{i-1})
/// left1[i] = a (left1[i-1] + δ (left0[i-1] + w_{i-1}))
/// ```
///
/// and the right sums mirror it. Only gaps enter the exponent, so nothing
/// overflows however far apart the particles are, and every accumulated
/// term is nonnegative.
#[derive(Debug, Clone, Default)]
pub struct ExpScans {
    pub left0: Vec<f64>,
    pub left1: Vec<f64>,
    pub right0: Vec<f64>,
    pub right1: Vec<f64>,
}

impl ExpScans {
    /// `xs` must be nondecreasing.
    pub fn compute(xs: &[f64], ws: &[f64], nu: f64) -> Self {
        let mut scans = Self::default();
        scans.recompute(xs, ws, nu);
        scans
    }

    /// Reuses the existing buffers.
    pub fn recompute(&mut self, xs: &[f64], ws: &[f64], nu: f64) {
        let n = xs.len();
        debug_assert_eq!(n, ws.len());
        for v in [&mut self.left0, &mut self.left1, &mut self.right0, &mut self.right1] {
            v.clear();
            v.resize(n, 0.0);
        }
        for i in 1..n {
            let gap = xs[i] - xs[i - 1];
            let a = (-gap / nu).exp();
            let carry = self.left0[i - 1] + ws[i - 1];
            self.left0[i] = a * carry;
            self.left1[i] = a * (self.left1[i - 1] + gap * carry);
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let gap = xs[i + 1] - xs[i];
            let a = (-gap / nu).exp();
            let carry = self.right0[i + 1] + ws[i + 1];
            self.right0[i] = a * carry;
            self.right1[i] = a * (self.right1[i + 1] + gap * carry);
        }
    }

    /// `g(X_i)`.
    #[inline]
    pub fn g(&self, ws: &[f64], i: usize) -> f64 {
        self.left0[i] + ws[i] + self.right0[i]
    }

    /// `h(X_i)`.
    #[inline]
    pub fn h(&self, i: usize) -> f64 {
        self.left1[i] - self.right1[i]
    }
}

/// `‖g‖²` in O(n) from the attenuated scans; positions must be sorted.
pub fn concentration_fast(ens: &ParticleEnsemble, p: &KernelParams) -> f64 {
    let (xs, ws) = (ens.positions(), ens.weights());
    let scans = ExpScans::compute(xs, ws, p.nu);
    (0..xs.len())
        .map(|i| ws[i] * (p.nu * scans.g(ws, i) + scans.left1[i] + scans.right1[i]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn half_nu() -> KernelParams {
        KernelParams::default()
    }

    fn pair() -> ParticleEnsemble {
        ParticleEnsemble::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn eta_values() {
        let p = half_nu();
        assert_eq!(eta(0.0, &p).unwrap(), 1.0);
        assert_relative_eq!(eta(2.0, &p).unwrap(), (-4.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(eta(2.0, &p).unwrap(), 0.01831563888873418, max_relative = 1e-15);
        assert!(eta(-1e-9, &p).is_err());
        assert!(eta(f64::NAN, &p).is_err());
        for (z, w) in [(0.3, 0.7), (1.0, 2.5), (0.0, 4.0)] {
            let lhs = eta(z, &p).unwrap() * eta(w, &p).unwrap();
            assert_relative_eq!(lhs, eta(z + w, &p).unwrap(), max_relative = 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn params_validation() {
        assert!(KernelParams::new(0.0, 1.0).is_err());
        assert!(KernelParams::new(0.5, -1.0).is_err());
        assert!(KernelParams::new(f64::INFINITY, 1.0).is_err());
        assert_eq!(KernelParams::new(0.5, 1.0).unwrap(), KernelParams::default());
    }

    #[test]
    fn single_particle_closed_forms() {
        let p = half_nu();
        let ens = ParticleEnsemble::single(0.0);
        assert_eq!(field_g(&ens, 0.0, &p), 1.0);
        assert_relative_eq!(field_g(&ens, 0.7, &p), (-1.4f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(field_h(&ens, 0.5, &p), 0.5 * (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(field_h(&ens, 0.5, &p), 0.18393972058572117, max_relative = 1e-15);
        assert_relative_eq!(field_H(&ens, 0.0, &p), -0.25, max_relative = 1e-15);
        assert_relative_eq!(concentration(&ens, &p), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn two_particle_values() {
        let p = half_nu();
        let ens = pair();
        assert_relative_eq!(field_g(&ens, 0.0, &p), (-2.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(field_g(&ens, 0.0, &p), 0.1353352832366127, max_relative = 1e-15);
        assert_eq!(field_h(&ens, 0.0, &p), 0.0);
        let expected = 0.25 + 1.25 * (-4.0f64).exp();
        assert_relative_eq!(concentration(&ens, &p), expected, max_relative = 1e-15);
        assert_relative_eq!(concentration(&ens, &p), 0.2728945486109177, max_relative = 1e-14);
    }

    #[test]
    fn consensus_concentration_is_nu() {
        let p = KernelParams::with_nu(2.0).unwrap();
        let ens = ParticleEnsemble::single(3.3);
        assert_relative_eq!(concentration(&ens, &p), 2.0, max_relative = 1e-15);
        // Spreading the same mass out lowers it.
        let spread = ParticleEnsemble::new(vec![3.2, 3.4], vec![0.5, 0.5]).unwrap();
        assert!(concentration(&spread, &p) < 2.0);
    }

    #[test]
    fn scans_match_direct_fields() {
        let p = KernelParams::with_nu(0.3).unwrap();
        let ens = ParticleEnsemble::new(
            vec![-2.0, -1.1, -1.0, 0.2, 0.25, 1.7],
            vec![0.1, 0.2, 0.15, 0.3, 0.05, 0.2],
        )
        .unwrap();
        let scans = ExpScans::compute(ens.positions(), ens.weights(), p.nu);
        for (i, &x) in ens.positions().iter().enumerate() {
            assert_relative_eq!(scans.g(ens.weights(), i), field_g(&ens, x, &p), max_relative = 1e-14);
            assert_relative_eq!(scans.h(i), field_h(&ens, x, &p), max_relative = 1e-13, epsilon = 1e-16);
        }
        assert_relative_eq!(
            concentration_fast(&ens, &p),
            concentration(&ens, &p),
            max_relative = 1e-14
        );
    }

    #[test]
    fn pairwise_summation_agrees() {
        let p = half_nu();
        let ens = ParticleEnsemble::new((0..300).map(|i| i as f64 * 0.01).collect(), vec![1.0; 300]).unwrap();
        let a = concentration_with(&ens, &p, Summation::Ordered);
        let b = concentration_with(&ens, &p, Summation::Pairwise);
        assert_relative_eq!(a, b, max_relative = 1e-13);
        assert_relative_eq!(
            field_H_with(&ens, 1.0, &p, Summation::Pairwise),
            field_H(&ens, 1.0, &p),
            max_relative = 1e-13
        );
    }
}
