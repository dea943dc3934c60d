//! Particle velocities, time stepping, and trajectory diagnostics.
//!
//! Each particle drifts toward the η-weighted average of all opinions:
//!
//! ```text
//! dX_i/dt = α Σ_j η(|X_i - X_j|) w_j (X_j - X_i) / Σ_l η(|X_i - X_l|) w_l
//! ```
//!
//! [`velocity_naive`] evaluates the double sum directly in O(n²);
//! [`velocity_fast`] uses the separable structure of the exponential kernel
//! (see [`ExpScans`]) to do the same in O(n) on sorted positions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::kernel::{concentration_fast, ExpScans, KernelParams};
use crate::particles::{mollify_at, ParticleEnsemble};

/// Strategy used to evaluate the velocity field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityMethod {
    Naive,
    #[default]
    Fast,
}

/// Time integration scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Explicit midpoint Runge-Kutta; second order.
    #[default]
    Midpoint,
    /// Forward Euler; first order. Kept as a reference for order studies.
    Euler,
}

fn naive_into(xs: &[f64], ws: &[f64], p: &KernelParams, parallel: bool, out: &mut [f64]) {
    let nu = p.nu;
    let alpha = p.alpha;
    let one = |i: usize| {
        let xi = xs[i];
        let mut num = 0.0;
        let mut den = 0.0;
        for (&xj, &wj) in xs.iter().zip(ws) {
            let d = xj - xi;
            let e = (-d.abs() / nu).exp() * wj;
            num += e * d;
            den += e;
        }
        alpha * num / den
    };
    if parallel {
        out.par_iter_mut().enumerate().for_each(|(i, v)| *v = one(i));
    } else {
        out.iter_mut().enumerate().for_each(|(i, v)| *v = one(i));
    }
}

fn fast_sorted_into(xs: &[f64], ws: &[f64], p: &KernelParams, scans: &mut ExpScans, out: &mut [f64]) {
    scans.recompute(xs, ws, p.nu);
    for (i, v) in out.iter_mut().enumerate() {
        *v = p.alpha * (scans.right1[i] - scans.left1[i]) / scans.g(ws, i);
    }
}

fn is_sorted(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] <= w[1])
}

/// Reusable velocity evaluator holding scratch space for the fast path.
#[derive(Debug, Clone, Default)]
pub struct VelocityField {
    pub method: VelocityMethod,
    /// Spread the naive double sum over threads. Every velocity is still an
    /// index-ordered sum, so results are identical either way.
    pub parallel: bool,
    scans: ExpScans,
    perm: Vec<usize>,
    sorted_x: Vec<f64>,
    sorted_w: Vec<f64>,
    sorted_v: Vec<f64>,
}

impl VelocityField {
    pub fn new(method: VelocityMethod, parallel: bool) -> Self {
        Self {
            method,
            parallel,
            ..Default::default()
        }
    }

    /// Writes the velocity of every particle into `out`. Returns `true` when
    /// the fast path had to sort an out-of-order input internally.
    pub fn eval(&mut self, xs: &[f64], ws: &[f64], p: &KernelParams, out: &mut [f64]) -> bool {
        assert_eq!(xs.len(), ws.len());
        assert_eq!(xs.len(), out.len());
        match self.method {
            VelocityMethod::Naive => {
                naive_into(xs, ws, p, self.parallel, out);
                false
            }
            VelocityMethod::Fast if is_sorted(xs) => {
                fast_sorted_into(xs, ws, p, &mut self.scans, out);
                false
            }
            VelocityMethod::Fast => {
                let n = xs.len();
                self.perm.clear();
                self.perm.extend(0..n);
                self.perm.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
                self.sorted_x.clear();
                self.sorted_w.clear();
                self.sorted_x.extend(self.perm.iter().map(|&k| xs[k]));
                self.sorted_w.extend(self.perm.iter().map(|&k| ws[k]));
                self.sorted_v.resize(n, 0.0);
                fast_sorted_into(&self.sorted_x, &self.sorted_w, p, &mut self.scans, &mut self.sorted_v);
                for (slot, &k) in self.perm.iter().enumerate() {
                    out[k] = self.sorted_v[slot];
                }
                true
            }
        }
    }
}

/// Velocities by the direct O(n²) double sum.
pub fn velocity_naive(ens: &ParticleEnsemble, p: &KernelParams) -> Vec<f64> {
    let mut out = vec![0.0; ens.len()];
    naive_into(ens.positions(), ens.weights(), p, false, &mut out);
    out
}

/// Velocities by attenuated left/right scans in O(n).
pub fn velocity_fast(ens: &ParticleEnsemble, p: &KernelParams) -> Vec<f64> {
    let mut out = vec![0.0; ens.len()];
    VelocityField::new(VelocityMethod::Fast, false).eval(ens.positions(), ens.weights(), p, &mut out);
    out
}

/// Advances an ensemble by fixed steps and keeps count of ordering repairs.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub kernel: KernelParams,
    pub dt: f64,
    pub integrator: Integrator,
    field: VelocityField,
    k1: Vec<f64>,
    k2: Vec<f64>,
    stage: Vec<f64>,
    /// Steps after which the positions had to be re-sorted.
    pub resorts: usize,
    /// Stage evaluations where the fast path saw out-of-order positions.
    pub stage_resorts: usize,
    steps_taken: usize,
}

impl Stepper {
    pub fn new(
        kernel: KernelParams,
        dt: f64,
        integrator: Integrator,
        method: VelocityMethod,
        parallel: bool,
    ) -> Result<Self> {
        kernel.validate()?;
        positive("dt", dt)?;
        Ok(Self {
            kernel,
            dt,
            integrator,
            field: VelocityField::new(method, parallel),
            k1: Vec::new(),
            k2: Vec::new(),
            stage: Vec::new(),
            resorts: 0,
            stage_resorts: 0,
            steps_taken: 0,
        })
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    fn velocity(&mut self, xs: &[f64], ws: &[f64], which: u8) -> Result<()> {
        let out = if which == 1 { &mut self.k1 } else { &mut self.k2 };
        out.resize(xs.len(), 0.0);
        if self.field.eval(xs, ws, &self.kernel, out) {
            self.stage_resorts += 1;
        }
        if let Some(particle) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteVelocity {
                step: self.steps_taken,
                particle,
            });
        }
        Ok(())
    }

    pub fn step(&mut self, ens: &ParticleEnsemble) -> Result<ParticleEnsemble> {
        let xs = ens.positions();
        let ws = ens.weights();
        let dt = self.dt;
        self.velocity(xs, ws, 1)?;
        let next: Vec<f64> = match self.integrator {
            Integrator::Euler => xs.iter().zip(&self.k1).map(|(x, v)| x + dt * v).collect(),
            Integrator::Midpoint => {
                let mut stage = std::mem::take(&mut self.stage);
                stage.clear();
                stage.extend(xs.iter().zip(&self.k1).map(|(x, v)| x + 0.5 * dt * v));
                let r = self.velocity(&stage, ws, 2);
                self.stage = stage;
                r?;
                xs.iter().zip(&self.k2).map(|(x, v)| x + dt * v).collect()
            }
        };
        self.steps_taken += 1;
        if is_sorted(&next) {
            Ok(ens.with_positions(next))
        } else {
            self.resorts += 1;
            let mut order: Vec<usize> = (0..next.len()).collect();
            order.sort_by(|&a, &b| next[a].total_cmp(&next[b]));
            let pos = order.iter().map(|&k| next[k]).collect();
            let w = order.iter().map(|&k| ws[k]).collect();
            ParticleEnsemble::from_parts(pos, w)
        }
    }
}

/// One explicit midpoint step:
/// `k₁ = v(X)`, `k₂ = v(X + dt/2 · k₁)`, `X' = X + dt · k₂`.
pub fn step_midpoint(ens: &ParticleEnsemble, dt: f64, p: &KernelParams) -> Result<ParticleEnsemble> {
    Stepper::new(*p, dt, Integrator::Midpoint, VelocityMethod::Fast, false)?.step(ens)
}

/// How clusters are counted in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ClusterRule {
    /// Maximal runs of particles whose consecutive gaps are below `threshold`.
    Gap { threshold: f64 },
    /// Modes of the σ-mollified density whose topographic prominence is at
    /// least `min_prominence` times the global maximum.
    Modes { sigma: f64, min_prominence: f64 },
}

impl Default for ClusterRule {
    fn default() -> Self {
        ClusterRule::Modes {
            sigma: 0.1,
            min_prominence: 0.02,
        }
    }
}

impl ClusterRule {
    pub fn count(&self, ens: &ParticleEnsemble) -> usize {
        match *self {
            ClusterRule::Gap { threshold } => {
                1 + ens.positions().windows(2).filter(|w| w[1] - w[0] >= threshold).count()
            }
            ClusterRule::Modes { sigma, min_prominence } => {
                let lo = ens.min_position() - 4.0 * sigma;
                let span = ens.diameter() + 8.0 * sigma;
                let step = sigma / 8.0;
                let n = (span / step).ceil() as usize + 1;
                let values: Vec<f64> = (0..n)
                    .into_par_iter()
                    .map(|k| mollify_at(ens, sigma, lo + k as f64 * step))
                    .collect();
                count_modes(&values, min_prominence)
            }
        }
    }
}

/// Number of local maxima whose prominence is at least `rel` times the
/// global maximum. A sampled profile with a positive maximum has at least
/// one mode.
pub fn count_modes(values: &[f64], rel: f64) -> usize {
    let n = values.len();
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if n == 0 || top.is_nan() || top <= 0.0 {
        return 0;
    }
    let floor = rel * top;
    let mut count = 0;
    let mut i = 0;
    while i < n {
        // Collapse plateaus to their first index.
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let rises = i == 0 || values[i - 1] < values[i];
        let falls = j + 1 == n || values[j + 1] < values[i];
        if rises && falls {
            let peak = values[i];
            let mut left_min = peak;
            let mut k = i;
            while k > 0 && values[k - 1] <= peak {
                k -= 1;
                left_min = left_min.min(values[k]);
            }
            let left_open = k == 0;
            let mut right_min = peak;
            let mut k = j;
            while k + 1 < n && values[k + 1] <= peak {
                k += 1;
                right_min = right_min.min(values[k]);
            }
            let right_open = k + 1 == n;
            let col = match (left_open, right_open) {
                (true, true) => 0.0,
                (true, false) => right_min,
                (false, true) => left_min,
                (false, false) => left_min.max(right_min),
            };
            if peak - col >= floor {
                count += 1;
            }
        }
        i = j + 1;
    }
    count.max(1)
}

/// Per-snapshot summary of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min: f64,
    pub max: f64,
    pub diameter: f64,
    pub concentration: f64,
    pub clusters: usize,
    /// Weight of particles inside each requested closed interval.
    pub interval_masses: Vec<f64>,
}

pub fn diagnostics(
    ens: &ParticleEnsemble,
    p: &KernelParams,
    rule: &ClusterRule,
    intervals: &[(f64, f64)],
) -> Diagnostics {
    Diagnostics {
        min: ens.min_position(),
        max: ens.max_position(),
        diameter: ens.diameter(),
        concentration: concentration_fast(ens, p),
        clusters: rule.count(ens),
        interval_masses: intervals.iter().map(|&(a, b)| ens.mass_in(a, b)).collect(),
    }
}

/// Which steps of a run are recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Snapshots {
    /// Requested times, each rounded to the nearest step boundary.
    At(Vec<f64>),
    /// Every `k`-th step, plus the first and last.
    Every(usize),
}

impl Default for Snapshots {
    fn default() -> Self {
        Snapshots::Every(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub kernel: KernelParams,
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: Snapshots,
    pub velocity: VelocityMethod,
    pub integrator: Integrator,
    /// Mollification width used for output densities.
    pub sigma: f64,
    pub cluster_rule: ClusterRule,
    pub intervals: Vec<(f64, f64)>,
    pub parallel: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            kernel: KernelParams::default(),
            dt: 0.04,
            t_end: 1.0,
            snapshots: Snapshots::default(),
            velocity: VelocityMethod::Fast,
            integrator: Integrator::Midpoint,
            sigma: 0.1,
            cluster_rule: ClusterRule::default(),
            intervals: Vec::new(),
            parallel: false,
        }
    }
}

/// Rounds `t / dt` to an integer step count, rejecting values that are not
/// within `1e-9` (relative) of one.
pub fn step_count(what: &'static str, t: f64, dt: f64) -> Result<usize> {
    let ratio = t / dt;
    let n = ratio.round();
    if !(ratio.is_finite() && n >= 0.0 && (ratio - n).abs() <= 1e-9 * n.max(1.0)) {
        return Err(Error::NonIntegralSteps { what, ratio });
    }
    Ok(n as usize)
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        positive("dt", self.dt)?;
        positive("sigma", self.sigma)?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("must be finite and nonnegative, got {}", self.t_end),
            });
        }
        step_count("t_end", self.t_end, self.dt)?;
        if let Snapshots::At(ts) = &self.snapshots {
            if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end + 0.5 * self.dt)) {
                return Err(Error::InvalidParameter {
                    name: "snapshot_times",
                    reason: format!("{t} lies outside [0, {}]", self.t_end),
                });
            }
        }
        if let Snapshots::Every(0) = self.snapshots {
            return Err(Error::InvalidParameter {
                name: "snapshots",
                reason: "snapshot interval must be at least one step".into(),
            });
        }
        Ok(())
    }

    /// Sorted, deduplicated step indices at which snapshots are taken.
    pub fn snapshot_steps(&self) -> Result<Vec<usize>> {
        let n = step_count("t_end", self.t_end, self.dt)?;
        let mut steps: Vec<usize> = match &self.snapshots {
            Snapshots::At(ts) if ts.is_empty() => vec![0, n],
            Snapshots::At(ts) => ts.iter().map(|t| ((t / self.dt).round() as usize).min(n)).collect(),
            Snapshots::Every(k) => (0..=n).step_by(*k).chain(std::iter::once(n)).collect(),
        };
        steps.sort_unstable();
        steps.dedup();
        Ok(steps)
    }
}

/// The recorded history of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub steps: Vec<usize>,
    pub snapshots: Vec<ParticleEnsemble>,
    pub diagnostics: Vec<Diagnostics>,
    pub dt: f64,
    /// Largest distance between a requested snapshot time and the step
    /// boundary it was rounded to.
    pub max_snapshot_rounding: f64,
    pub resorts: usize,
    pub stage_resorts: usize,
}

impl TrajectoryRecord {
    pub fn last(&self) -> &ParticleEnsemble {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }
}

/// Integrates `ens0` to `cfg.t_end` and records snapshots with diagnostics.
pub fn simulate(ens0: &ParticleEnsemble, cfg: &SimulationConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let n_steps = step_count("t_end", cfg.t_end, cfg.dt)?;
    let steps = cfg.snapshot_steps()?;
    let max_snapshot_rounding = match &cfg.snapshots {
        Snapshots::At(ts) => ts
            .iter()
            .map(|t| (t - ((t / cfg.dt).round().min(n_steps as f64)) * cfg.dt).abs())
            .fold(0.0, f64::max),
        Snapshots::Every(_) => 0.0,
    };

    let mut stepper = Stepper::new(cfg.kernel, cfg.dt, cfg.integrator, cfg.velocity, cfg.parallel)?;
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(steps.len()),
        steps: Vec::with_capacity(steps.len()),
        snapshots: Vec::with_capacity(steps.len()),
        diagnostics: Vec::with_capacity(steps.len()),
        dt: cfg.dt,
        max_snapshot_rounding,
        resorts: 0,
        stage_resorts: 0,
    };
    let record = |rec: &mut TrajectoryRecord, k: usize, ens: &ParticleEnsemble| {
        rec.times.push(k as f64 * cfg.dt);
        rec.steps.push(k);
        rec.diagnostics
            .push(diagnostics(ens, &cfg.kernel, &cfg.cluster_rule, &cfg.intervals));
        rec.snapshots.push(ens.clone());
    };

    let mut ens = ens0.clone();
    let mut next = steps.iter().peekable();
    if next.peek() == Some(&&0) {
        record(&mut rec, 0, &ens);
        next.next();
    }
    for k in 1..=n_steps {
        ens = stepper.step(&ens)?;
        if next.peek() == Some(&&k) {
            record(&mut rec, k, &ens);
            next.next();
        }
    }
    rec.resorts = stepper.resorts;
    rec.stage_resorts = stepper.stage_resorts;
    Ok(rec)
}

/// Final ensemble only, without snapshots or diagnostics.
pub fn evolve(
    ens0: &ParticleEnsemble,
    kernel: KernelParams,
    dt: f64,
    t_end: f64,
    integrator: Integrator,
    method: VelocityMethod,
) -> Result<ParticleEnsemble> {
    let n = step_count("t_end", t_end, dt)?;
    let mut stepper = Stepper::new(kernel, dt, integrator, method, false)?;
    let mut ens = ens0.clone();
    for _ in 0..n {
        ens = stepper.step(&ens)?;
    }
    Ok(ens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair() -> ParticleEnsemble {
        ParticleEnsemble::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn single_particle_does_not_move() {
        let p = KernelParams::default();
        let ens = ParticleEnsemble::single(0.3);
        assert_eq!(velocity_naive(&ens, &p), vec![0.0]);
        assert_eq!(velocity_fast(&ens, &p), vec![0.0]);
        assert_eq!(step_midpoint(&ens, 0.1, &p).unwrap(), ens);
    }

    #[test]
    fn two_particle_velocity() {
        let p = KernelParams::default();
        let e4 = (-4.0f64).exp();
        let expected = 2.0 * e4 / (1.0 + e4);
        for v in [velocity_naive(&pair(), &p), velocity_fast(&pair(), &p)] {
            assert_relative_eq!(v[0], expected, max_relative = 1e-14);
            assert_relative_eq!(v[1], -expected, max_relative = 1e-14);
            assert_relative_eq!(v[0], 0.03597241992418311, max_relative = 1e-14);
        }
    }

    #[test]
    fn alpha_scales_velocity() {
        let p1 = KernelParams::default();
        let p3 = KernelParams::new(0.5, 3.0).unwrap();
        let a = velocity_fast(&pair(), &p1);
        let b = velocity_fast(&pair(), &p3);
        assert_relative_eq!(b[0], 3.0 * a[0], max_relative = 1e-15);
    }

    #[test]
    fn unsorted_stage_input_is_handled() {
        let p = KernelParams::with_nu(0.7).unwrap();
        let xs = [0.4, -1.0, 2.0, 0.1];
        let ws = [0.1, 0.2, 0.3, 0.4];
        let mut fast = VelocityField::new(VelocityMethod::Fast, false);
        let mut naive = VelocityField::new(VelocityMethod::Naive, false);
        let (mut a, mut b) = ([0.0; 4], [0.0; 4]);
        assert!(fast.eval(&xs, &ws, &p, &mut a));
        assert!(!naive.eval(&xs, &ws, &p, &mut b));
        for i in 0..4 {
            assert_relative_eq!(a[i], b[i], max_relative = 1e-13);
        }
    }

    #[test]
    fn mirror_symmetry_is_preserved() {
        let p = KernelParams::default();
        let mut ens = pair();
        for _ in 0..50 {
            ens = step_midpoint(&ens, 0.1, &p).unwrap();
            let x = ens.positions();
            assert!((x[0] + x[1]).abs() <= 1e-12);
        }
        assert!(ens.diameter() < 2.0);
    }

    #[test]
    fn mode_counting() {
        assert_eq!(count_modes(&[0.0, 1.0, 0.0, 1.0, 0.0], 0.1), 2);
        assert_eq!(count_modes(&[0.0, 1.0, 0.95, 0.96, 0.0], 0.1), 1);
        assert_eq!(count_modes(&[1.0, 1.0, 1.0], 0.1), 1);
        assert_eq!(count_modes(&[3.0, 2.0, 1.0, 2.5, 0.0], 0.1), 2);
        assert_eq!(count_modes(&[], 0.1), 0);
    }

    #[test]
    fn gap_clusters_and_consensus() {
        let ens = ParticleEnsemble::new(vec![0.0, 0.1, 1.0, 1.05, 3.0], vec![1.0; 5]).unwrap();
        assert_eq!(ClusterRule::Gap { threshold: 0.25 }.count(&ens), 3);
        assert_eq!(ClusterRule::default().count(&ens), 3);
        let one = ParticleEnsemble::single(2.0);
        let d = diagnostics(&one, &KernelParams::default(), &ClusterRule::default(), &[(1.0, 3.0)]);
        assert_eq!(d.diameter, 0.0);
        assert_eq!(d.clusters, 1);
        assert_eq!(d.interval_masses, vec![1.0]);
    }

    #[test]
    fn step_count_rejects_fractions() {
        assert_eq!(step_count("t", 1.0, 0.1).unwrap(), 10);
        assert_eq!(step_count("t", 0.0, 0.1).unwrap(), 0);
        assert!(step_count("t", 1.0, 0.3).is_err());
    }

    #[test]
    fn empty_evolution_records_initial_state_only() {
        let cfg = SimulationConfig {
            t_end: 0.0,
            ..Default::default()
        };
        let rec = simulate(&pair(), &cfg).unwrap();
        assert_eq!(rec.times, vec![0.0]);
        assert_eq!(rec.snapshots[0], pair());
    }

    #[test]
    fn snapshot_times_are_rounded_to_steps() {
        let cfg = SimulationConfig {
            dt: 0.1,
            t_end: 1.0,
            snapshots: Snapshots::At(vec![0.0, 0.52, 1.0]),
            ..Default::default()
        };
        let rec = simulate(&pair(), &cfg).unwrap();
        assert_eq!(rec.steps, vec![0, 5, 10]);
        assert_relative_eq!(rec.max_snapshot_rounding, 0.02, epsilon = 1e-12);
        let bad = SimulationConfig {
            snapshots: Snapshots::At(vec![2.0]),
            ..cfg
        };
        assert!(simulate(&pair(), &bad).is_err());
    }

    #[test]
    fn non_finite_velocity_reports_step() {
        let p = KernelParams::default();
        let ens = ParticleEnsemble::from_parts(vec![-f64::MAX, f64::MAX], vec![0.5, 0.5]).unwrap();
        let mut stepper = Stepper::new(p, 0.1, Integrator::Midpoint, VelocityMethod::Naive, false).unwrap();
        match stepper.step(&ens) {
            Err(Error::NonFiniteVelocity { step: 0, .. }) => {}
            other => panic!("expected non-finite velocity error, got {other:?}"),
        }
    }
}
