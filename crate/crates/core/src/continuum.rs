//! Grid verification of the differential form of the dynamics.
//!
//! With the exponential kernel the nonlocal fields satisfy screened Poisson
//! equations
//!
//! ```text
//! -g'' + g/ν² =  (2/ν) f
//! -h'' + h/ν² = -2 g'
//! -H'' + H/ν² = -2 g
//! ```
//!
//! and the density moves with velocity `-α h/g`. This module solves the
//! three equations on a truncated interval with homogeneous Dirichlet ends
//! and compares the result with the closed forms in [`crate::kernel`] and
//! with the particle velocities.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dynamics::{velocity_naive, TrajectoryRecord};
use crate::error::{positive, Error, Result};
use crate::kernel::{field_g, field_h, ExpScans, KernelParams};
use crate::particles::{mollify, ParticleEnsemble};
use crate::tridiag::Tridiagonal;

/// Uniform grid `x_j = x_min + j δ`, `j = 0..=n_cells`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::GridTooSmall(n_cells));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need finite x_min < x_max, got [{x_min}, {x_max}]"),
            });
        }
        Ok(Self { x_min, x_max, n_cells })
    }

    /// Grid on `[x_min, x_max]` whose spacing is `spacing` (rounded so the
    /// cells tile the interval).
    pub fn with_spacing(x_min: f64, x_max: f64, spacing: f64) -> Result<Self> {
        positive("spacing", spacing)?;
        Self::new(x_min, x_max, ((x_max - x_min) / spacing).round() as usize)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|j| self.node(j)).collect()
    }

    /// Same interval with half the spacing; node `j` here is node `2j` there.
    pub fn refined(&self) -> Self {
        Self {
            n_cells: 2 * self.n_cells,
            ..*self
        }
    }

    /// Piecewise-linear interpolation of nodal `values` at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let s = (x - self.x_min) / self.spacing();
        let j = (s.floor().max(0.0) as usize).min(self.n_cells - 1);
        let t = s - j as f64;
        values[j] * (1.0 - t) + values[j + 1] * t
    }

    /// Composite trapezoidal rule.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        self.spacing() * (inner + 0.5 * (values[0] + values[n - 1]))
    }

    fn check_len(&self, values: &[f64], name: &'static str) -> Result<()> {
        if values.len() != self.n_cells + 1 {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("expected {} nodal values, got {}", self.n_cells + 1, values.len()),
            });
        }
        Ok(())
    }
}

/// `f, g, h, H` sampled on the nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTable {
    pub grid: Grid,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    #[serde(rename = "H")]
    pub big_h: Vec<f64>,
}

impl FieldTable {
    /// Solves all three equations for a nodal density `f`.
    pub fn solve(grid: Grid, f: Vec<f64>, p: &KernelParams) -> Result<Self> {
        let g = solve_bvp_g(&grid, &f, p)?;
        let h = solve_bvp_h(&grid, &g, p)?;
        let big_h = solve_bvp_big_h(&grid, &g, p)?;
        Ok(Self { grid, f, g, h, big_h })
    }

    /// Mollifies `ens` onto `grid` and solves.
    pub fn from_ensemble(ens: &ParticleEnsemble, grid: Grid, sigma: f64, p: &KernelParams) -> Result<Self> {
        let f = mollify(ens, sigma, &grid.nodes())?;
        Self::solve(grid, f, p)
    }

    /// Exact fields of the mollified ensemble, for comparison with
    /// [`FieldTable::from_ensemble`].
    pub fn smoothed_exact(ens: &ParticleEnsemble, grid: Grid, sigma: f64, p: &KernelParams) -> Result<Self> {
        positive("sigma", sigma)?;
        let xs = grid.nodes();
        let f = mollify(ens, sigma, &xs)?;
        let mut g = Vec::with_capacity(xs.len());
        let mut h = Vec::with_capacity(xs.len());
        let mut big_h = Vec::with_capacity(xs.len());
        for &x in &xs {
            let s = smoothed_fields(ens, x, sigma, p);
            g.push(s.g);
            h.push(s.h);
            big_h.push(s.big_h);
        }
        Ok(Self { grid, f, g, h, big_h })
    }
}

fn screened_operator(grid: &Grid, nu: f64) -> Tridiagonal {
    let inv_d2 = 1.0 / grid.spacing().powi(2);
    Tridiagonal::constant(grid.n_cells - 1, -inv_d2, 2.0 * inv_d2 + 1.0 / (nu * nu), -inv_d2)
}

/// Solves `-u'' + u/ν² = rhs` with `u = 0` at both ends. Returns nodal
/// values including the two boundary zeros.
pub fn solve_screened(grid: &Grid, rhs: &[f64], nu: f64) -> Result<Vec<f64>> {
    grid.check_len(rhs, "rhs")?;
    positive("nu", nu)?;
    let interior = screened_operator(grid, nu).solve(&rhs[1..grid.n_cells])?;
    let mut u = Vec::with_capacity(grid.n_cells + 1);
    u.push(0.0);
    u.extend(interior);
    u.push(0.0);
    Ok(u)
}

/// `‖A u - b‖_∞ / ‖b‖_∞` over interior rows, for a solution from
/// [`solve_screened`]. Returns the absolute residual when `b = 0`.
pub fn screened_residual(grid: &Grid, u: &[f64], rhs: &[f64], nu: f64) -> f64 {
    let n = grid.n_cells;
    let b = &rhs[1..n];
    let r = screened_operator(grid, nu).residual(&u[1..n], b);
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

/// Second-order nodal derivative: central inside, one-sided at the ends.
pub fn derivative(grid: &Grid, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let inv = 1.0 / (2.0 * grid.spacing());
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv;
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv;
    for j in 1..n - 1 {
        d[j] = (u[j + 1] - u[j - 1]) * inv;
    }
    d
}

/// `-g'' + g/ν² = (2/ν) f`.
pub fn solve_bvp_g(grid: &Grid, f: &[f64], p: &KernelParams) -> Result<Vec<f64>> {
    grid.check_len(f, "f")?;
    let rhs: Vec<f64> = f.iter().map(|v| 2.0 / p.nu * v).collect();
    solve_screened(grid, &rhs, p.nu)
}

/// `-h'' + h/ν² = -2 g'`.
pub fn solve_bvp_h(grid: &Grid, g: &[f64], p: &KernelParams) -> Result<Vec<f64>> {
    grid.check_len(g, "g")?;
    let rhs: Vec<f64> = derivative(grid, g).iter().map(|v| -2.0 * v).collect();
    solve_screened(grid, &rhs, p.nu)
}

/// `-H'' + H/ν² = -2 g`.
pub fn solve_bvp_big_h(grid: &Grid, g: &[f64], p: &KernelParams) -> Result<Vec<f64>> {
    grid.check_len(g, "g")?;
    let rhs: Vec<f64> = g.iter().map(|v| -2.0 * v).collect();
    solve_screened(grid, &rhs, p.nu)
}

/// Values of `g`, `h`, `H` for the ensemble convolved with `N(0, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedFields {
    pub g: f64,
    pub h: f64,
    pub big_h: f64,
}

fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / SQRT_2)
}

/// Exact convolution of the kernel fields with a Gaussian mollifier.
///
/// For one unit atom at the origin and `s = σ²/ν`, split each integral at
/// `z = 0`; on each half-line `e^{∓z/ν} N(x - z; 0, σ²)` is a rescaled
/// Gaussian in `z` centred at `x ∓ s`, so only Gaussian half-line moments
/// remain. Valid while `|x - X_j|/ν` stays well below the exponent range.
pub fn smoothed_fields(ens: &ParticleEnsemble, x: f64, sigma: f64, p: &KernelParams) -> SmoothedFields {
    let nu = p.nu;
    let s2 = sigma * sigma;
    let shift = s2 / nu;
    let bias = s2 / (2.0 * nu * nu);
    let mut out = SmoothedFields {
        g: 0.0,
        h: 0.0,
        big_h: 0.0,
    };
    for (&xj, &w) in ens.positions().iter().zip(ens.weights()) {
        let u = x - xj;
        let pdf = (-0.5 * u * u / s2).exp() / (2.0 * PI * s2).sqrt();
        // z > 0 half
        let mu_p = u - shift;
        let c_p = (-u / nu + bias).exp();
        let p0_p = c_p * normal_cdf(mu_p / sigma);
        let p1_p = mu_p * p0_p + s2 * pdf;
        // z < 0 half
        let mu_m = u + shift;
        let c_m = (u / nu + bias).exp();
        let p0_m = c_m * normal_cdf(-mu_m / sigma);
        let p1_m = mu_m * p0_m - s2 * pdf;

        out.g += w * (p0_p + p0_m);
        out.h += w * (p1_p + p1_m);
        out.big_h += w * (nu * p1_m - nu * nu * p0_m - nu * p1_p - nu * nu * p0_p);
    }
    out
}

/// Total integrals of the grid fields against their whole-line values
/// `∫g = 2ν ∫f` and `∫h = 0`.
///
/// Summing the discrete equations telescopes the second differences, so the
/// trapezoid sums differ from the targets only by
///
/// * quadrature of `f`: at most `δ² ∫|f''|/12`, bounded here by
///   `δ² W / (3ν)` with `W` the total weight (the mollified `f` has
///   `∫|f''| ≤ 4W/ν` on the scales where the check is meaningful);
/// * truncation: the boundary fluxes `ν²(|u_1| + |u_{N-1}|)/δ` of each solve,
///   plus `2ν` times the mass of `f` outside the interval for `g`, and
///   `ν²(|g_1| + |g_{N-1}|)` from the source term for `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralCheck {
    pub int_g: f64,
    pub int_h: f64,
    pub target_g: f64,
    pub budget_g: f64,
    pub budget_h: f64,
}

impl IntegralCheck {
    pub fn passes(&self) -> bool {
        (self.int_g - self.target_g).abs() <= self.budget_g && self.int_h.abs() <= self.budget_h
    }
}

/// Integral check for the mollified ensemble on `grid`.
pub fn check_integrals(ens: &ParticleEnsemble, grid: &Grid, sigma: f64, p: &KernelParams) -> Result<IntegralCheck> {
    let table = FieldTable::from_ensemble(ens, *grid, sigma, p)?;
    let n = grid.n_cells;
    let d = grid.spacing();
    let w = ens.total_weight();
    let outside: f64 = ens
        .positions()
        .iter()
        .zip(ens.weights())
        .map(|(&x, &wi)| wi * (normal_cdf((grid.x_min - x) / sigma) + normal_cdf((x - grid.x_max) / sigma)))
        .sum();
    let flux = |u: &[f64]| p.nu * p.nu * (u[1].abs() + u[n - 1].abs()) / d;
    let quad = d * d * w / (3.0 * p.nu);
    Ok(IntegralCheck {
        int_g: grid.integrate(&table.g),
        int_h: grid.integrate(&table.h),
        target_g: 2.0 * p.nu * w,
        budget_g: quad + flux(&table.g) + 2.0 * p.nu * outside,
        budget_h: quad + flux(&table.h) + p.nu * p.nu * (table.g[1].abs() + table.g[n - 1].abs()),
    })
}

/// Outcome of comparing particle velocities with the continuum field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityConsistency {
    /// `max_i |-α h(X_i)/g(X_i) - v_i| / max_i |v_i|` with closed-form
    /// fields (absolute when all velocities vanish).
    pub path_a_max_rel: f64,
    /// `max_i` absolute deviation of the grid-solved velocity from the
    /// particle velocity; includes the O(σ²) mollification bias.
    pub path_b_vs_particles: f64,
    /// `max_i` absolute deviation of the grid-solved velocity from the
    /// exact velocity of the mollified density; O(δ²).
    pub path_b_vs_smoothed: f64,
    pub spacing: f64,
    pub sigma: f64,
}

impl VelocityConsistency {
    pub fn path_a_passes(&self) -> bool {
        self.path_a_max_rel <= 1e-12
    }
}

pub fn check_velocity_consistency(
    ens: &ParticleEnsemble,
    p: &KernelParams,
    grid: &Grid,
    sigma: f64,
) -> Result<VelocityConsistency> {
    if ens.min_position() <= grid.x_min || ens.max_position() >= grid.x_max {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "particles must lie strictly inside the grid".into(),
        });
    }
    let v = velocity_naive(ens, p);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let path_a = ens
        .positions()
        .iter()
        .zip(&v)
        .map(|(&x, &vi)| (-p.alpha * field_h(ens, x, p) / field_g(ens, x, p) - vi).abs())
        .fold(0.0, f64::max);

    let table = FieldTable::from_ensemble(ens, *grid, sigma, p)?;
    let mut vs_particles = 0.0f64;
    let mut vs_smoothed = 0.0f64;
    for (&x, &vi) in ens.positions().iter().zip(&v) {
        let vb = -p.alpha * grid.interpolate(&table.h, x) / grid.interpolate(&table.g, x);
        let s = smoothed_fields(ens, x, sigma, p);
        vs_particles = vs_particles.max((vb - vi).abs());
        vs_smoothed = vs_smoothed.max((vb + p.alpha * s.h / s.g).abs());
    }
    Ok(VelocityConsistency {
        path_a_max_rel: if scale > 0.0 { path_a / scale } else { path_a },
        path_b_vs_particles: vs_particles,
        path_b_vs_smoothed: vs_smoothed,
        spacing: grid.spacing(),
        sigma,
    })
}

/// Comparison of the two sides of the concentration identity
/// `d/dt ‖g‖² = (2α/ν) Σ_i w_i h(X_i)² / g(X_i)` along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationIdentity {
    pub times: Vec<f64>,
    pub concentration: Vec<f64>,
    /// Right-hand side at every snapshot.
    pub production: Vec<f64>,
    /// Centred difference quotients at interior snapshots.
    pub rate: Vec<f64>,
    pub max_abs_mismatch: f64,
    /// `max_abs_mismatch / max |production|` over interior snapshots.
    pub max_rel_mismatch: f64,
    /// Whether `‖g‖²` never dropped by more than `1e-10` of its value.
    pub nondecreasing: bool,
    /// Smallest `(c_{k+1} - c_k) / c_k` over the trajectory.
    pub min_relative_increment: f64,
}

/// Concentration production `(2α/ν) Σ_i w_i h(X_i)²/g(X_i)`.
pub fn concentration_production(ens: &ParticleEnsemble, p: &KernelParams) -> f64 {
    let (xs, ws) = (ens.positions(), ens.weights());
    let scans = ExpScans::compute(xs, ws, p.nu);
    let sum: f64 = (0..xs.len())
        .map(|i| {
            let h = scans.h(i);
            ws[i] * h * h / scans.g(ws, i)
        })
        .sum();
    2.0 * p.alpha / p.nu * sum
}

pub fn check_concentration_identity(traj: &TrajectoryRecord, p: &KernelParams) -> Result<ConcentrationIdentity> {
    let n = traj.times.len();
    if n < 3 {
        return Err(Error::InvalidParameter {
            name: "trajectory",
            reason: format!("need at least 3 snapshots, got {n}"),
        });
    }
    let dt0 = traj.times[1] - traj.times[0];
    if traj.times.windows(2).any(|w| ((w[1] - w[0]) - dt0).abs() > 1e-9 * dt0) {
        return Err(Error::InvalidParameter {
            name: "trajectory",
            reason: "snapshot times must be uniformly spaced".into(),
        });
    }
    let concentration: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|e| crate::kernel::concentration_fast(e, p))
        .collect();
    let production: Vec<f64> = traj.snapshots.iter().map(|e| concentration_production(e, p)).collect();
    let rate: Vec<f64> = (1..n - 1)
        .map(|k| (concentration[k + 1] - concentration[k - 1]) / (traj.times[k + 1] - traj.times[k - 1]))
        .collect();
    let max_abs_mismatch = (1..n - 1)
        .map(|k| (rate[k - 1] - production[k]).abs())
        .fold(0.0, f64::max);
    let scale = production[1..n - 1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let increments: Vec<f64> = concentration.windows(2).map(|c| (c[1] - c[0]) / c[0]).collect();
    Ok(ConcentrationIdentity {
        times: traj.times.clone(),
        max_rel_mismatch: if scale > 0.0 {
            max_abs_mismatch / scale
        } else {
            max_abs_mismatch
        },
        max_abs_mismatch,
        nondecreasing: increments.iter().all(|&r| r >= -1e-10),
        min_relative_increment: increments.iter().cloned().fold(f64::INFINITY, f64::min),
        concentration,
        production,
        rate,
    })
}

/// Observed orders of grid self-convergence for the three solves, from
/// three successively halved grids compared on the coarsest nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpOrders {
    pub spacing: f64,
    pub g: f64,
    pub h: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
    /// Largest relative residual of any tridiagonal solve.
    pub max_residual: f64,
}

fn self_convergence_order(coarse: &[f64], mid: &[f64], fine: &[f64]) -> f64 {
    let e1 = (0..coarse.len())
        .map(|j| (coarse[j] - mid[2 * j]).abs())
        .fold(0.0, f64::max);
    let e2 = (0..coarse.len())
        .map(|j| (mid[2 * j] - fine[4 * j]).abs())
        .fold(0.0, f64::max);
    (e1 / e2).log2()
}

/// Solves on `grid`, its refinement, and the refinement of that, with the
/// density sampled from `density`.
pub fn bvp_self_convergence<F: Fn(f64) -> f64>(grid: &Grid, density: F, p: &KernelParams) -> Result<BvpOrders> {
    let grids = [*grid, grid.refined(), grid.refined().refined()];
    let mut tables = Vec::with_capacity(3);
    let mut max_residual = 0.0f64;
    for gr in &grids {
        let f: Vec<f64> = gr.nodes().into_iter().map(&density).collect();
        let t = FieldTable::solve(*gr, f, p)?;
        let rhs_g: Vec<f64> = t.f.iter().map(|v| 2.0 / p.nu * v).collect();
        let rhs_h: Vec<f64> = derivative(gr, &t.g).iter().map(|v| -2.0 * v).collect();
        let rhs_big: Vec<f64> = t.g.iter().map(|v| -2.0 * v).collect();
        max_residual = max_residual
            .max(screened_residual(gr, &t.g, &rhs_g, p.nu))
            .max(screened_residual(gr, &t.h, &rhs_h, p.nu))
            .max(screened_residual(gr, &t.big_h, &rhs_big, p.nu));
        tables.push(t);
    }
    Ok(BvpOrders {
        spacing: grid.spacing(),
        g: self_convergence_order(&tables[0].g, &tables[1].g, &tables[2].g),
        h: self_convergence_order(&tables[0].h, &tables[1].h, &tables[2].h),
        big_h: self_convergence_order(&tables[0].big_h, &tables[1].big_h, &tables[2].big_h),
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_basics() {
        assert!(matches!(Grid::new(0.0, 1.0, 3), Err(Error::GridTooSmall(3))));
        assert!(Grid::new(1.0, 0.0, 10).is_err());
        let g = Grid::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.refined().node(2), g.node(1));
        assert_relative_eq!(g.interpolate(&[0.0, 1.0, 2.0, 3.0, 4.0], 0.25), 2.5);
        assert_relative_eq!(g.integrate(&[1.0; 5]), 2.0);
    }

    #[test]
    fn zero_forcing_gives_zero_fields() {
        let grid = Grid::new(-3.0, 3.0, 64).unwrap();
        let t = FieldTable::solve(grid, vec![0.0; 65], &KernelParams::default()).unwrap();
        assert!(t.g.iter().chain(&t.h).chain(&t.big_h).all(|v| *v == 0.0));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let grid = Grid::new(-3.0, 3.0, 64).unwrap();
        assert!(solve_bvp_g(&grid, &[0.0; 10], &KernelParams::default()).is_err());
    }

    #[test]
    fn derivative_is_exact_on_quadratics() {
        let grid = Grid::new(0.0, 1.0, 10).unwrap();
        let u: Vec<f64> = grid.nodes().iter().map(|x| x * x - 3.0 * x).collect();
        for (x, d) in grid.nodes().iter().zip(derivative(&grid, &u)) {
            assert_relative_eq!(d, 2.0 * x - 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn smoothed_fields_approach_point_fields_as_sigma_shrinks() {
        let p = KernelParams::default();
        let ens = ParticleEnsemble::new(vec![-0.4, 0.9], vec![0.3, 0.7]).unwrap();
        for x in [-1.3, 0.1, 0.5, 2.0] {
            let s = smoothed_fields(&ens, x, 1e-4, &p);
            assert_relative_eq!(s.g, field_g(&ens, x, &p), max_relative = 1e-6);
            assert_relative_eq!(s.h, field_h(&ens, x, &p), max_relative = 1e-6, epsilon = 1e-9);
            assert_relative_eq!(s.big_h, crate::kernel::field_H(&ens, x, &p), max_relative = 1e-6);
        }
    }

    #[test]
    fn single_particle_velocity_is_zero_both_ways() {
        let grid = Grid::new(-4.0, 4.0, 800).unwrap();
        let r =
            check_velocity_consistency(&ParticleEnsemble::single(0.0), &KernelParams::default(), &grid, 0.1).unwrap();
        assert_eq!(r.path_a_max_rel, 0.0);
        assert!(r.path_b_vs_particles < 1e-12);
        assert!(r.path_b_vs_smoothed < 1e-12);
    }
}
