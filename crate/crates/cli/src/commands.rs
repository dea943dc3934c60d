use std::fs;
use std::path::Path;

use clap::{Parser, Subcommand};
use hk_core::continuum::{bvp_self_convergence, check_concentration_identity, check_velocity_consistency};
use hk_core::dynamics::Snapshots;
use hk_core::harness::{default_levels, run_study, Study};
use hk_core::particles::mollify_at;
use hk_core::{check_integrals, simulate, Grid, KernelParams, ParticleEnsemble, SimulationConfig};
use serde::Serialize;

use crate::config::{load_file, parse_levels, resolve_run, resolve_study, CommonArgs};
use crate::error::{CliError, CliResult};
use crate::output;

#[derive(Debug, Parser)]
#[command(
    name = "hk",
    version,
    about = "Continuous bounded-confidence opinion dynamics with weighted particles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve an initial density and write snapshots, particles, diagnostics.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write grid-solved fields to fields.csv.
        #[arg(long)]
        fields: bool,
    },
    /// Run a self-convergence study and write report_<study>.csv/.json.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// E (dx and dt together), F (dt only), or G (dx only).
        #[arg(long)]
        study: Option<Study>,
        /// Levels: `dx:dt,...` for E, `dt,...` for F, `dx,...` for G.
        #[arg(long)]
        levels: Option<String>,
    },
    /// Check the grid formulation against the particle method; writes verify.json.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { common, fields } => cmd_simulate(&common, fields),
        Command::Converge { common, study, levels } => cmd_converge(&common, study, levels.as_deref()),
        Command::Verify { common } => cmd_verify(&common),
    }
}

fn prepare_out(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

pub fn cmd_simulate(args: &CommonArgs, fields: bool) -> CliResult<()> {
    let file = load_file(args)?;
    let run = resolve_run(args, &file, "two_bump")?;
    let xs = run.output_grid.points()?;
    let ens = run.ensemble()?;
    prepare_out(&args.out)?;
    let rec = simulate(&ens, &run.sim)?;
    output::write_text(
        &args.out,
        "snapshots.csv",
        &output::snapshots_csv(&rec, run.sim.sigma, &xs)?,
    )?;
    output::write_text(&args.out, "particles.csv", &output::particles_csv(&rec))?;
    output::write_text(
        &args.out,
        "diagnostics.csv",
        &output::diagnostics_csv(&rec, &run.sim.intervals),
    )?;
    if fields {
        let g = &run.output_grid;
        let grid = Grid::with_spacing(g.x_min, g.x_max, g.dx)?;
        output::write_text(
            &args.out,
            "fields.csv",
            &output::fields_csv(&rec, grid, run.sim.sigma, &run.sim.kernel)?,
        )?;
    }
    Ok(())
}

pub fn cmd_converge(args: &CommonArgs, study: Option<Study>, levels: Option<&str>) -> CliResult<()> {
    let file = load_file(args)?;
    let study = study
        .or(file.study)
        .ok_or_else(|| CliError::Config("--study E|F|G is required".into()))?;
    let opts = resolve_study(args, &file)?;
    let levels = match (levels, &file.levels) {
        (Some(text), _) => parse_levels(text, study, opts.reference)?,
        (None, Some(l)) if l.is_empty() => return Err(CliError::Config("empty level list in config".into())),
        (None, Some(l)) => l.clone(),
        (None, None) => default_levels(study),
    };
    prepare_out(&args.out)?;
    let report = run_study(study, &levels, &opts)?;
    output::write_text(&args.out, &format!("report_{study}.csv"), &output::report_csv(&report))?;
    output::write_json(&args.out, &format!("report_{study}.json"), &report)?;
    println!("ratio");
    for r in &report.rows {
        match r.ratio {
            Some(v) => println!("{v:.4}"),
            None => println!("-"),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    /// `>=` or `<=`: how `value` is compared with `threshold`.
    pub relation: &'static str,
}

fn at_least(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        passed: value >= threshold,
        value,
        threshold,
        relation: ">=",
    }
}

fn at_most(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        passed: value <= threshold,
        value,
        threshold,
        relation: "<=",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub ensemble: String,
    pub particles: usize,
    pub nu: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Observed order `log2(coarse/fine)`; an exact zero on both levels counts
/// as converged.
fn order(coarse: f64, fine: f64) -> f64 {
    if coarse <= 1e-15 && fine <= 1e-15 {
        f64::INFINITY
    } else {
        (coarse / fine).log2()
    }
}

pub fn cmd_verify(args: &CommonArgs) -> CliResult<()> {
    let file = load_file(args)?;
    let explicit = args.preset.is_some() || file.preset.is_some() || file.density.is_some();
    let (label, ens, sim) = if explicit {
        let mut run_args = args.clone();
        // Here --dx is the grid spacing, not the lattice spacing.
        run_args.dx = None;
        if run_args.t_end.is_none() && file.t_end.is_none() {
            run_args.t_end = Some(1.0);
        }
        let run = resolve_run(&run_args, &file, "two_bump")?;
        let ens = run.ensemble()?;
        (run.label, ens, run.sim)
    } else {
        let pair = ParticleEnsemble::new(vec![-1.0, 1.0], vec![0.5, 0.5])?;
        let mut kernel = file.kernel.unwrap_or_default();
        kernel.nu = args.nu.unwrap_or(kernel.nu);
        kernel.alpha = args.alpha.unwrap_or(kernel.alpha);
        let sim = SimulationConfig {
            kernel,
            dt: args.dt.or(file.dt).unwrap_or(0.04),
            t_end: args.t_end.or(file.t_end).unwrap_or(1.0),
            sigma: args.sigma.or(file.sigma).unwrap_or(0.1),
            parallel: !args.deterministic,
            ..Default::default()
        };
        sim.validate()?;
        ("pair".to_string(), pair, sim)
    };
    let p: KernelParams = sim.kernel;
    let sigma = sim.sigma;
    let spacing = args.dx.or(file.grid_spacing).unwrap_or(0.02);
    let pad = 20.0 * p.nu + 6.0 * sigma;
    let grid = Grid::with_spacing(ens.min_position() - pad, ens.max_position() + pad, spacing)?;

    let mut checks = Vec::new();
    let orders = bvp_self_convergence(&grid, |x| mollify_at(&ens, sigma, x), &p)?;
    checks.push(at_least("bvp_order_g", orders.g, 1.9));
    checks.push(at_least("bvp_order_h", orders.h, 1.9));
    checks.push(at_least("bvp_order_H", orders.big_h, 1.9));
    checks.push(at_most("bvp_residual", orders.max_residual, 1e-10));

    let coarse = check_velocity_consistency(&ens, &p, &grid, sigma)?;
    let fine = check_velocity_consistency(&ens, &p, &grid.refined(), sigma)?;
    checks.push(at_most("velocity_path_a", coarse.path_a_max_rel, 1e-12));
    checks.push(at_least(
        "velocity_path_b_order",
        order(coarse.path_b_vs_smoothed, fine.path_b_vs_smoothed),
        1.9,
    ));

    let integrals = check_integrals(&ens, &grid, sigma, &p)?;
    checks.push(at_most(
        "integral_g",
        (integrals.int_g - integrals.target_g).abs(),
        integrals.budget_g,
    ));
    checks.push(at_most("integral_h", integrals.int_h.abs(), integrals.budget_h));

    let mut mismatch = Vec::new();
    let mut nondecreasing = true;
    for k in 0..3 {
        let cfg = SimulationConfig {
            dt: sim.dt / f64::from(1u32 << k),
            snapshots: Snapshots::Every(1),
            ..sim.clone()
        };
        let rec = simulate(&ens, &cfg)?;
        let id = check_concentration_identity(&rec, &p)?;
        nondecreasing &= id.nondecreasing;
        mismatch.push(id.max_abs_mismatch);
    }
    checks.push(Check {
        name: "concentration_nondecreasing".into(),
        passed: nondecreasing,
        value: f64::from(u8::from(nondecreasing)),
        threshold: 1.0,
        relation: ">=",
    });
    // Finest pair: at dt = 0.1 the coarsest pair is still pre-asymptotic.
    let identity_order = order(mismatch[1], mismatch[2]);
    checks.push(at_least("concentration_identity_order", identity_order, 1.9));

    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        ensemble: label,
        particles: ens.len(),
        nu: p.nu,
        alpha: p.alpha,
        sigma,
        grid,
        dt: sim.dt,
        t_end: sim.t_end,
        checks,
        passed,
    };
    prepare_out(&args.out)?;
    output::write_json(&args.out, "verify.json", &report)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(
            report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.clone())
                .collect(),
        ))
    }
}
