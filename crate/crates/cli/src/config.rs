//! Run configuration: an optional JSON file, overridden by flags.
//!
//! Every field of [`FileConfig`] is optional. Resolution order is preset
//! defaults, then the file, then command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use hk_core::dynamics::{ClusterRule, Integrator, Snapshots, VelocityMethod};
use hk_core::harness::{Lattice, PresetSetup, Study, StudyOptions, REFERENCE};
use hk_core::{DensitySpec, GaussianComponent, KernelParams, ParticleEnsemble, SimulationConfig, WeightMode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Flags shared by all commands.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Named experiment: two_bump, three_bump, convergence_base.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Mollifier width for output densities.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Half the number of lattice cells (2m - 1 particles).
    #[arg(long)]
    pub m: Option<usize>,
    /// Lattice spacing (grid spacing for `verify`).
    #[arg(long)]
    pub dx: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Use the O(n) velocity evaluation (default).
    #[arg(long, conflicts_with = "naive")]
    pub fast: bool,
    /// Use the direct O(n²) velocity evaluation.
    #[arg(long)]
    pub naive: bool,
    /// Single-threaded, fixed-order reductions.
    #[arg(long)]
    pub deterministic: bool,
    /// Cell-averaged initial weights instead of midpoint samples.
    #[arg(long)]
    pub exact_weights: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
}

impl Default for OutputGrid {
    fn default() -> Self {
        Self {
            x_min: -3.0,
            x_max: 3.0,
            dx: 0.01,
        }
    }
}

impl OutputGrid {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        let ok = self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max && self.dx > 0.0;
        if !ok {
            return Err(CliError::Config(format!("invalid output grid {self:?}")));
        }
        let n = hk_core::dynamics::step_count("output grid width", self.x_max - self.x_min, self.dx)?;
        Ok((0..=n).map(|j| self.x_min + j as f64 * self.dx).collect())
    }
}

/// Schema of the `--config` JSON file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    /// Gaussian mixture replacing the preset's initial density.
    pub density: Option<Vec<GaussianComponent>>,
    pub lattice: Option<Lattice>,
    pub weights: Option<WeightMode>,
    pub kernel: Option<KernelParams>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub snapshot_every: Option<usize>,
    pub sigma: Option<f64>,
    pub intervals: Option<Vec<(f64, f64)>>,
    pub cluster_rule: Option<ClusterRule>,
    pub integrator: Option<Integrator>,
    pub output_grid: Option<OutputGrid>,
    pub fast: Option<bool>,
    pub deterministic: Option<bool>,
    /// Convergence levels as `(dx, dt)` pairs.
    pub levels: Option<Vec<(f64, f64)>>,
    /// Fine run `(dx, dt)` for the F and G studies.
    pub reference: Option<(f64, f64)>,
    pub study: Option<Study>,
    /// Grid spacing for `verify`.
    pub grid_spacing: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// A fully resolved simulation: initial ensemble plus run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub label: String,
    pub spec: DensitySpec,
    pub lattice: Lattice,
    pub weights: WeightMode,
    pub sim: SimulationConfig,
    pub output_grid: OutputGrid,
    pub deterministic: bool,
}

impl RunConfig {
    pub fn ensemble(&self) -> CliResult<ParticleEnsemble> {
        Ok(self.lattice.build(&self.spec, self.weights)?)
    }
}

pub fn load_file(args: &CommonArgs) -> CliResult<FileConfig> {
    match &args.config {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn preset_setup(name: &str) -> CliResult<PresetSetup> {
    Ok(hk_core::harness::preset(name)?)
}

fn kernel(base: KernelParams, file: &FileConfig, args: &CommonArgs) -> CliResult<KernelParams> {
    let mut k = file.kernel.unwrap_or(base);
    if let Some(nu) = args.nu {
        k.nu = nu;
    }
    if let Some(alpha) = args.alpha {
        k.alpha = alpha;
    }
    k.validate()?;
    Ok(k)
}

fn velocity(file: &FileConfig, args: &CommonArgs) -> VelocityMethod {
    if args.naive {
        VelocityMethod::Naive
    } else if args.fast || file.fast.unwrap_or(true) {
        VelocityMethod::Fast
    } else {
        VelocityMethod::Naive
    }
}

/// Resolves the run; `default_preset` applies when neither a preset nor a
/// density is given.
pub fn resolve_run(args: &CommonArgs, file: &FileConfig, default_preset: &str) -> CliResult<RunConfig> {
    let name = args.preset.clone().or_else(|| file.preset.clone());
    let setup = preset_setup(name.as_deref().unwrap_or(default_preset))?;
    let label = match (&name, &file.density) {
        (_, Some(_)) => "config".to_string(),
        (Some(n), None) => n.clone(),
        (None, None) => default_preset.to_string(),
    };
    let spec = match &file.density {
        Some(c) => DensitySpec::new(c.clone())?,
        None => setup.spec.clone(),
    };

    let mut lattice = file.lattice.unwrap_or(setup.lattice);
    match (args.m, args.dx) {
        (Some(m), dx) => {
            lattice = Lattice::Symmetric {
                m,
                dx: dx.unwrap_or(lattice.dx()),
            }
        }
        (None, Some(dx)) => lattice = lattice.with_dx(dx),
        (None, None) => {}
    }
    let weights = if args.exact_weights {
        WeightMode::Exact
    } else {
        file.weights.unwrap_or(setup.weights)
    };

    let mut sim = setup.sim.clone();
    sim.kernel = kernel(sim.kernel, file, args)?;
    sim.dt = args.dt.or(file.dt).unwrap_or(sim.dt);
    let t_end_given = args.t_end.or(file.t_end);
    sim.t_end = t_end_given.unwrap_or(sim.t_end);
    sim.sigma = args.sigma.or(file.sigma).unwrap_or(sim.sigma);
    if let Some(ts) = &file.snapshot_times {
        sim.snapshots = Snapshots::At(ts.clone());
    } else if let Some(k) = file.snapshot_every {
        sim.snapshots = Snapshots::Every(k);
    } else if let (Snapshots::At(ts), Some(t_end)) = (&sim.snapshots, t_end_given) {
        // Preset times past a shortened horizon are dropped.
        let kept: Vec<f64> = ts.iter().cloned().filter(|t| *t <= t_end).collect();
        sim.snapshots = Snapshots::At(kept);
    }
    if let Some(iv) = &file.intervals {
        sim.intervals = iv.clone();
    }
    if let Some(rule) = file.cluster_rule {
        sim.cluster_rule = rule;
    }
    if let Some(i) = file.integrator {
        sim.integrator = i;
    }
    sim.velocity = velocity(file, args);
    let deterministic = args.deterministic || file.deterministic.unwrap_or(false);
    sim.parallel = !deterministic;
    sim.validate()?;

    Ok(RunConfig {
        label,
        spec,
        lattice,
        weights,
        sim,
        output_grid: file.output_grid.unwrap_or_default(),
        deterministic,
    })
}

/// Study settings from the convergence_base preset, the file, and flags.
pub fn resolve_study(args: &CommonArgs, file: &FileConfig) -> CliResult<StudyOptions> {
    let base = StudyOptions::default();
    let kernel = kernel(base.kernel, file, args)?;
    let opts = StudyOptions {
        kernel,
        sigma: args.sigma.or(file.sigma).unwrap_or(base.sigma),
        t_end: args.t_end.or(file.t_end).unwrap_or(base.t_end),
        integrator: file.integrator.unwrap_or(base.integrator),
        velocity: velocity(file, args),
        reference: file.reference.unwrap_or(REFERENCE),
        parallel: !(args.deterministic || file.deterministic.unwrap_or(false)),
    };
    if !(opts.sigma > 0.0 && opts.t_end > 0.0) {
        return Err(CliError::Config("sigma and t-end must be positive".into()));
    }
    Ok(opts)
}

/// Parses `--levels`: comma-separated items, each `dx:dt` or a single
/// number (a time step for F, a spacing for G and E).
pub fn parse_levels(text: &str, study: Study, reference: (f64, f64)) -> CliResult<Vec<(f64, f64)>> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Config(
            "empty level list; usage: --levels dx:dt[,dx:dt...] (E), dt[,dt...] (F), dx[,dx...] (G)".into(),
        ));
    }
    items
        .into_iter()
        .map(|item| {
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("bad level value '{s}' in --levels")))
            };
            match item.split_once(':') {
                Some((a, b)) => Ok((num(a)?, num(b)?)),
                None => {
                    let v = num(item)?;
                    match study {
                        Study::F => Ok((reference.0, v)),
                        Study::G => Ok((v, reference.1)),
                        Study::E => Err(CliError::Config(format!("study E needs dx:dt pairs, got '{item}'"))),
                    }
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_parse_per_study() {
        assert_eq!(
            parse_levels("0.06:0.1, 0.03:0.05", Study::E, REFERENCE).unwrap(),
            vec![(0.06, 0.1), (0.03, 0.05)]
        );
        assert_eq!(
            parse_levels("0.1", Study::F, REFERENCE).unwrap(),
            vec![(REFERENCE.0, 0.1)]
        );
        assert_eq!(
            parse_levels("0.06", Study::G, REFERENCE).unwrap(),
            vec![(0.06, REFERENCE.1)]
        );
        assert!(parse_levels("", Study::F, REFERENCE).is_err());
        assert!(parse_levels(" , ", Study::G, REFERENCE).is_err());
        assert!(parse_levels("0.06", Study::E, REFERENCE).is_err());
        assert!(parse_levels("x", Study::F, REFERENCE).is_err());
    }

    #[test]
    fn flags_override_preset() {
        let args = CommonArgs {
            preset: Some("three_bump".into()),
            nu: Some(0.3),
            t_end: Some(10.0),
            ..Default::default()
        };
        let run = resolve_run(&args, &FileConfig::default(), "two_bump").unwrap();
        assert_eq!(run.sim.kernel.nu, 0.3);
        assert_eq!(run.sim.snapshots, Snapshots::At(vec![0.0, 10.0]));
        assert_eq!(run.label, "three_bump");

        let args = CommonArgs {
            m: Some(10),
            naive: true,
            deterministic: true,
            ..Default::default()
        };
        let run = resolve_run(&args, &FileConfig::default(), "two_bump").unwrap();
        assert_eq!(run.lattice, Lattice::Symmetric { m: 10, dx: 0.015 });
        assert_eq!(run.sim.velocity, VelocityMethod::Naive);
        assert!(!run.sim.parallel);
        assert_eq!(run.ensemble().unwrap().len(), 19);
    }

    #[test]
    fn output_grid_points() {
        assert_eq!(OutputGrid::default().points().unwrap().len(), 601);
        assert!(OutputGrid {
            x_min: 0.0,
            x_max: 1.0,
            dx: 0.3
        }
        .points()
        .is_err());
        assert!(OutputGrid {
            x_min: 1.0,
            x_max: 0.0,
            dx: 0.1
        }
        .points()
        .is_err());
    }
}
