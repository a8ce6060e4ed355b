//! Command-line front end for `lrchain`: single-point reports, grid sweeps
//! and oracle validation, all writing plot-ready CSV and JSON.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod oracle_check;
pub mod output;
pub mod params;
pub mod sweep;

use args::{Cli, Command};
use config::Settings;
use error::{CliError, CliResult};
use output::OutputDir;

/// Executes a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    let mut s = Settings::load(cli.global.config.as_deref())?;
    let ctx = commands::Context::resolve(&cli.global, &mut s)?;
    match cli.command {
        Command::Dispersion { params, points } => commands::dispersion(&ctx, &params, points, &mut s),
        Command::Boundary { params, json } => commands::boundary(&params, json, &mut s),
        Command::Profile { params, exhaustive } => commands::profile(&ctx, &params, exhaustive, &mut s),
        Command::Entropy {
            params,
            lmax,
            fit_min,
            fit_max,
        } => commands::entropy(&ctx, &params, lmax, fit_min, fit_max, &mut s),
        Command::Scaling {
            params,
            axis,
            distances,
            side,
            step,
            window_lo,
            window_hi,
            samples,
        } => commands::scaling(
            &ctx, &params, axis, distances, side, step, window_lo, window_hi, samples, &mut s,
        ),
        Command::OracleCheck {
            n_sites,
            draws,
            xmax,
            x_states,
            wick_dmax,
        } => {
            let d = oracle_check::OracleSpec::default();
            let spec = oracle_check::OracleSpec {
                n_sites: s.or("n_sites", n_sites, d.n_sites)?,
                draws: s.or("draws", draws, d.draws)?,
                x_max: s.or("xmax", xmax, d.x_max)?,
                x_states: s.or("x_states", x_states, d.x_states)?,
                wick_dmax: s.or("wick_dmax", wick_dmax, d.wick_dmax)?,
                quadrature: ctx.quadrature,
            };
            s.finish()?;
            let pool = ctx.pool()?;
            let report = pool.install(|| oracle_check::run(&spec))?;
            let mut out = OutputDir::create(&ctx.out)?;
            out.write_json("oracle_check.json", &report)?;
            for c in &report.checks {
                println!(
                    "{} {}: max error {:.3e} (tolerance {:e}, {} samples)",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_error,
                    c.tolerance,
                    c.samples
                );
            }
            println!("wrote {}", out.root().display());
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Failed("oracle validation failed".into()))
            }
        }
        Command::Sweep {
            params,
            x_axis,
            y_axis,
            quantities,
            max_points,
            lmax,
        } => {
            let fixed = params::PartialParams::resolve(&params, &mut s)?;
            let mut axes = Vec::new();
            for a in [s.get("x_axis", x_axis)?, s.get("y_axis", y_axis)?].into_iter().flatten() {
                axes.push(sweep::AxisSpec::parse(&a)?);
            }
            let spec = sweep::SweepSpec {
                axes,
                fixed,
                quantities: sweep::Quantity::parse_list(&s.or("quantities", quantities, "gap".into())?)?,
                dmax: ctx.dmax,
                lmax: s.or("lmax", lmax, 128)?,
                quadrature: ctx.quadrature,
                workers: ctx.workers,
                max_points: s.or("max_points", max_points, 100_000)?,
            };
            s.finish()?;
            spec.validate()?;
            let mut out = OutputDir::create(&ctx.out)?;
            let m = sweep::run_sweep(&spec, &mut out)?;
            println!(
                "{} points in {:.1} s, {} failures; wrote {}",
                m.points,
                m.wall_time_seconds,
                m.failures.len(),
                out.root().display()
            );
            if !m.failures.is_empty() && m.failures.len() == m.points * spec.quantities.len() {
                return Err(CliError::Failed("every grid point failed".into()));
            }
            Ok(())
        }
    }
}
