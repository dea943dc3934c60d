//! Experiment presets and self-convergence studies.
//!
//! There is no closed-form solution to compare against, so accuracy is
//! measured by self-convergence of the mollified density at `t = 1`:
//!
//! * **E** refines `dx` and `dt` together and compares each run with the
//!   run at half both parameters;
//! * **F** fixes `dx` and compares coarse time steps with a fine reference;
//! * **G** fixes `dt` and compares coarse lattices with a fine reference.
//!
//! Errors are maxima of absolute differences over `x = j·dx`, `-3 < x < 3`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, step_count, ClusterRule, Integrator, SimulationConfig, Snapshots, VelocityMethod};
use crate::error::{positive, Error, Result};
use crate::kernel::KernelParams;
use crate::particles::{discretize, discretize_at, mollify, DensitySpec, ParticleEnsemble, WeightMode};

/// Half-width of the lattice and comparison window used by the studies.
pub const HALF_WIDTH: f64 = 3.0;

/// Default E levels `(dx, dt)`; each is compared with `(dx/2, dt/2)`.
pub const E_LEVELS: [(f64, f64); 4] = [(0.06, 0.1), (0.03, 0.05), (0.015, 0.025), (0.0075, 0.0125)];
/// Coarse time steps for the F study.
pub const F_DTS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
/// Coarse lattice spacings for the G study.
pub const G_DXS: [f64; 4] = [0.06, 0.03, 0.015, 0.0075];
/// Fine reference `(dx, dt)` for the F and G studies.
pub const REFERENCE: (f64, f64) = (0.00375, 0.00625);

/// Interaction scale of the two-bump experiment, `η(z) = e^{-2z}`.
pub const TWO_BUMP_NU: f64 = 0.5;
/// Interaction scale of the three-bump experiment and the convergence
/// studies, `η(z) = e^{-5z}`. The three clusters merge at t ≈ 30.
pub const THREE_BUMP_NU: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    TwoBump,
    ThreeBump,
    ConvergenceBase,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::TwoBump, Preset::ThreeBump, Preset::ConvergenceBase];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::TwoBump => "two_bump",
            Preset::ThreeBump => "three_bump",
            Preset::ConvergenceBase => "convergence_base",
        }
    }

    pub fn setup(&self) -> PresetSetup {
        let narrow = KernelParams {
            nu: THREE_BUMP_NU,
            alpha: 1.0,
        };
        let base = SimulationConfig {
            kernel: KernelParams {
                nu: TWO_BUMP_NU,
                alpha: 1.0,
            },
            sigma: 0.1,
            cluster_rule: ClusterRule::default(),
            intervals: vec![(-0.5, 0.5)],
            ..Default::default()
        };
        match self {
            Preset::TwoBump => PresetSetup {
                preset: *self,
                spec: DensitySpec::two_bump(),
                lattice: Lattice::Symmetric {
                    m: 200,
                    dx: 3.0 / 200.0,
                },
                weights: WeightMode::Midpoint,
                sim: SimulationConfig {
                    dt: 0.04,
                    t_end: 10.0,
                    snapshots: Snapshots::At(vec![0.0, 5.0, 10.0]),
                    ..base
                },
            },
            Preset::ThreeBump => PresetSetup {
                preset: *self,
                spec: DensitySpec::three_bump(),
                lattice: Lattice::Symmetric {
                    m: 100,
                    dx: 3.0 / 100.0,
                },
                weights: WeightMode::Midpoint,
                sim: SimulationConfig {
                    kernel: narrow,
                    dt: 0.1,
                    t_end: 35.0,
                    snapshots: Snapshots::At(vec![0.0, 10.0, 20.0, 25.0, 30.0, 35.0]),
                    ..base
                },
            },
            Preset::ConvergenceBase => PresetSetup {
                preset: *self,
                spec: DensitySpec::three_bump(),
                lattice: Lattice::Window {
                    half_width: HALF_WIDTH,
                    dx: 0.06,
                },
                weights: WeightMode::Midpoint,
                sim: SimulationConfig {
                    kernel: narrow,
                    dt: 0.1,
                    t_end: 1.0,
                    snapshots: Snapshots::At(vec![0.0, 1.0]),
                    ..base
                },
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Where the initial particles sit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Lattice {
    /// `i·dx` for `i = -m+1 ..= m-1`.
    Symmetric { m: usize, dx: f64 },
    /// `-L + j·dx` for `j = 1 .. 2L/dx - 1`; `2L/dx` must be an integer.
    Window { half_width: f64, dx: f64 },
}

impl Lattice {
    pub fn dx(&self) -> f64 {
        match *self {
            Lattice::Symmetric { dx, .. } | Lattice::Window { dx, .. } => dx,
        }
    }

    pub fn with_dx(&self, dx: f64) -> Self {
        match *self {
            Lattice::Symmetric { m, .. } => Lattice::Symmetric { m, dx },
            Lattice::Window { half_width, .. } => Lattice::Window { half_width, dx },
        }
    }

    pub fn build(&self, spec: &DensitySpec, mode: WeightMode) -> Result<ParticleEnsemble> {
        match *self {
            Lattice::Symmetric { m, dx } => discretize(spec, m, dx, mode),
            Lattice::Window { half_width, dx } => {
                positive("dx", dx)?;
                let cells = step_count("lattice width", 2.0 * half_width, dx)?;
                let centre = cells as f64 / 2.0;
                let positions: Vec<f64> = (1..cells).map(|j| (j as f64 - centre) * dx).collect();
                discretize_at(spec, &positions, dx, mode)
            }
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetSetup {
    pub preset: Preset,
    pub spec: DensitySpec,
    pub lattice: Lattice,
    pub weights: WeightMode,
    pub sim: SimulationConfig,
}

impl PresetSetup {
    pub fn ensemble(&self) -> Result<ParticleEnsemble> {
        self.lattice.build(&self.spec, self.weights)
    }
}

pub fn preset(name: &str) -> Result<PresetSetup> {
    Ok(name.parse::<Preset>()?.setup())
}

/// Initial ensemble of the convergence studies at lattice spacing `dx`.
pub fn convergence_ensemble(dx: f64) -> Result<ParticleEnsemble> {
    Lattice::Window {
        half_width: HALF_WIDTH,
        dx,
    }
    .build(&DensitySpec::three_bump(), WeightMode::Midpoint)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Study {
    E,
    F,
    G,
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Study::E => "E",
            Study::F => "F",
            Study::G => "G",
        })
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E" | "e" => Ok(Study::E),
            "F" | "f" => Ok(Study::F),
            "G" | "g" => Ok(Study::G),
            _ => Err(Error::InvalidParameter {
                name: "study",
                reason: format!("unknown study `{s}`"),
            }),
        }
    }
}

/// Shared settings of the convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    pub kernel: KernelParams,
    pub sigma: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub velocity: VelocityMethod,
    /// Fine run `(dx, dt)` for the F and G studies.
    pub reference: (f64, f64),
    /// Run independent resolutions on separate threads.
    pub parallel: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            kernel: KernelParams {
                nu: THREE_BUMP_NU,
                alpha: 1.0,
            },
            sigma: 0.1,
            t_end: 1.0,
            integrator: Integrator::Midpoint,
            velocity: VelocityMethod::Fast,
            reference: REFERENCE,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub dt: f64,
    pub error: f64,
    /// `error / error of the next row`; absent on the last row.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub preset: String,
    pub nu: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    /// Human-readable description of the comparison points.
    pub comparison: String,
    pub reference: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub study: Study,
    pub rows: Vec<ConvergenceRow>,
    pub meta: ReportMeta,
}

impl ConvergenceReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.ratio).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    fn assemble(study: Study, pairs: Vec<(f64, f64, f64)>, meta: ReportMeta) -> Self {
        let errors: Vec<f64> = pairs.iter().map(|p| p.2).collect();
        let rows = pairs
            .into_iter()
            .enumerate()
            .map(|(k, (dx, dt, error))| ConvergenceRow {
                dx,
                dt,
                error,
                ratio: errors.get(k + 1).map(|next| error / next),
            })
            .collect();
        Self { study, rows, meta }
    }
}

/// Points `x = j·dx` with `-3 < x < 3`.
pub fn comparison_points(dx: f64) -> Vec<f64> {
    let r = HALF_WIDTH / dx;
    let jmax = if (r - r.round()).abs() <= 1e-9 * r.max(1.0) {
        r.round() as i64 - 1
    } else {
        r.floor() as i64
    };
    (-jmax..=jmax).map(|j| j as f64 * dx).collect()
}

/// Final ensemble of a convergence run at `(dx, dt)`.
pub fn run_case(dx: f64, dt: f64, opts: &StudyOptions) -> Result<ParticleEnsemble> {
    positive("dt", dt)?;
    step_count("t_end", opts.t_end, dt)?;
    let ens0 = convergence_ensemble(dx)?;
    evolve(&ens0, opts.kernel, dt, opts.t_end, opts.integrator, opts.velocity)
}

/// `max_x |f_a(x) - f_b(x)|` of the mollified densities over `xs`.
pub fn max_density_difference(a: &ParticleEnsemble, b: &ParticleEnsemble, sigma: f64, xs: &[f64]) -> Result<f64> {
    let fa = mollify(a, sigma, xs)?;
    let fb = mollify(b, sigma, xs)?;
    Ok(fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

fn run_all(cases: &[(f64, f64)], opts: &StudyOptions) -> Result<Vec<ParticleEnsemble>> {
    if opts.parallel {
        cases.par_iter().map(|&(dx, dt)| run_case(dx, dt, opts)).collect()
    } else {
        cases.iter().map(|&(dx, dt)| run_case(dx, dt, opts)).collect()
    }
}

fn meta(opts: &StudyOptions, comparison: &str, reference: Option<(f64, f64)>) -> ReportMeta {
    ReportMeta {
        preset: Preset::ConvergenceBase.name().into(),
        nu: opts.kernel.nu,
        alpha: opts.kernel.alpha,
        sigma: opts.sigma,
        t_end: opts.t_end,
        integrator: opts.integrator,
        comparison: comparison.into(),
        reference,
    }
}

fn check_lattice(dx: f64) -> Result<()> {
    positive("dx", dx)?;
    step_count("lattice width", 2.0 * HALF_WIDTH, dx).map(|_| ())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Simultaneous refinement: `E(dx, dt) = max |f_{dx/2,dt/2} - f_{dx,dt}|`
/// over `x = j·dx`. Consecutive levels must halve both parameters; the fine
/// run of one level is reused as the coarse run of the next.
pub fn study_e(levels: &[(f64, f64)], opts: &StudyOptions) -> Result<ConvergenceReport> {
    if levels.is_empty() {
        return Err(Error::TooFewLevels { needed: 1, got: 0 });
    }
    for &(dx, dt) in levels {
        check_lattice(dx)?;
        check_lattice(dx / 2.0)?;
        positive("dt", dt)?;
        step_count("t_end", opts.t_end, dt)?;
        step_count("t_end", opts.t_end, dt / 2.0)?;
    }
    let chained = levels
        .windows(2)
        .all(|w| close(w[1].0, w[0].0 / 2.0) && close(w[1].1, w[0].1 / 2.0));
    if !chained {
        return Err(Error::InvalidParameter {
            name: "levels",
            reason: "each level must halve both dx and dt of the previous one".into(),
        });
    }
    let mut cases = levels.to_vec();
    let (dx_last, dt_last) = levels[levels.len() - 1];
    cases.push((dx_last / 2.0, dt_last / 2.0));
    let finals = run_all(&cases, opts)?;

    let mut pairs = Vec::with_capacity(levels.len());
    for (k, &(dx, dt)) in levels.iter().enumerate() {
        let err = max_density_difference(&finals[k + 1], &finals[k], opts.sigma, &comparison_points(dx))?;
        pairs.push((dx, dt, err));
    }
    Ok(ConvergenceReport::assemble(
        Study::E,
        pairs,
        meta(opts, "x = j*dx (coarse level), -3 < x < 3", None),
    ))
}

/// Time-step dependence at fixed `dx`: `F(dt) = max |f_ref - f_{dx,dt}|`
/// over `x = j·dx_ref`.
pub fn study_f(dts: &[f64], opts: &StudyOptions) -> Result<ConvergenceReport> {
    if dts.is_empty() {
        return Err(Error::TooFewLevels { needed: 1, got: 0 });
    }
    let (dx_ref, dt_ref) = opts.reference;
    check_lattice(dx_ref)?;
    for &dt in dts.iter().chain(std::iter::once(&dt_ref)) {
        positive("dt", dt)?;
        step_count("t_end", opts.t_end, dt)?;
    }
    let mut cases = vec![(dx_ref, dt_ref)];
    cases.extend(dts.iter().map(|&dt| (dx_ref, dt)));
    let finals = run_all(&cases, opts)?;
    let xs = comparison_points(dx_ref);
    let pairs = dts
        .iter()
        .enumerate()
        .map(|(k, &dt)| {
            Ok((
                dx_ref,
                dt,
                max_density_difference(&finals[0], &finals[k + 1], opts.sigma, &xs)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::assemble(
        Study::F,
        pairs,
        meta(opts, "x = j*dx_ref, -3 < x < 3", Some(opts.reference)),
    ))
}

/// Lattice dependence at fixed `dt`: `G(dx) = max |f_ref - f_{dx,dt}|`
/// over `x = j·dx` of the coarse lattice.
pub fn study_g(dxs: &[f64], opts: &StudyOptions) -> Result<ConvergenceReport> {
    if dxs.is_empty() {
        return Err(Error::TooFewLevels { needed: 1, got: 0 });
    }
    let (dx_ref, dt_ref) = opts.reference;
    positive("dt", dt_ref)?;
    step_count("t_end", opts.t_end, dt_ref)?;
    for &dx in dxs.iter().chain(std::iter::once(&dx_ref)) {
        check_lattice(dx)?;
    }
    let mut cases = vec![(dx_ref, dt_ref)];
    cases.extend(dxs.iter().map(|&dx| (dx, dt_ref)));
    let finals = run_all(&cases, opts)?;
    let pairs = dxs
        .iter()
        .enumerate()
        .map(|(k, &dx)| {
            let xs = comparison_points(dx);
            Ok((
                dx,
                dt_ref,
                max_density_difference(&finals[0], &finals[k + 1], opts.sigma, &xs)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::assemble(
        Study::G,
        pairs,
        meta(opts, "x = j*dx (coarse run), -3 < x < 3", Some(opts.reference)),
    ))
}

pub fn run_study(study: Study, levels: &[(f64, f64)], opts: &StudyOptions) -> Result<ConvergenceReport> {
    match study {
        Study::E => study_e(levels, opts),
        Study::F => study_f(&levels.iter().map(|l| l.1).collect::<Vec<_>>(), opts),
        Study::G => study_g(&levels.iter().map(|l| l.0).collect::<Vec<_>>(), opts),
    }
}

/// Default levels for `study`, as `(dx, dt)` pairs.
pub fn default_levels(study: Study) -> Vec<(f64, f64)> {
    match study {
        Study::E => E_LEVELS.to_vec(),
        Study::F => F_DTS.iter().map(|&dt| (REFERENCE.0, dt)).collect(),
        Study::G => G_DXS.iter().map(|&dx| (dx, REFERENCE.1)).collect(),
    }
}
