//! Single-point subcommands.

use std::f64::consts::PI;
use std::path::PathBuf;

use log::{info, warn};
use lrchain::criticality::{
    kd_linear_fit, log_divergence_fits, nearest_critical, Axis, KdFit, ScalingOptions, Side,
};
use lrchain::entanglement::{
    check_kbi_relation, check_monogamy, entanglement_profile_with, ExponentialFit, KbiReport,
    MonogamyReport, ProfileOptions, ProfileSummary,
};
use lrchain::entropy::{default_lengths, entropy_curve, CentralChargeFit};
use lrchain::model::{
    band_energy, critical_alphas, critical_mus, gap_scan, global_gap, GapMinimum,
    DEFAULT_K_RESOLUTION,
};
use lrchain::{correlator_table, ModelParams, QuadratureConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{GlobalArgs, ParamArgs};
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::output::{Csv, OutputDir};
use crate::params::{ParamName, PartialParams};

pub const DEFAULT_DMAX: usize = 400;
pub const DEFAULT_OUT: &str = "lrchain-out";

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Context {
    pub quadrature: QuadratureConfig,
    pub dmax: usize,
    pub workers: usize,
    pub out: PathBuf,
}

impl Context {
    pub fn resolve(g: &GlobalArgs, s: &mut Settings) -> CliResult<Self> {
        let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let tol = s.or("tol", g.tol, QuadratureConfig::default().abs_tol)?;
        let ctx = Context {
            quadrature: QuadratureConfig::default().with_abs_tol(tol),
            dmax: s.or("dmax", g.dmax, DEFAULT_DMAX)?,
            workers: s.or("workers", g.workers, default_workers)?,
            out: s.or("out", g.out.clone(), PathBuf::from(DEFAULT_OUT))?,
        };
        ctx.quadrature.validate()?;
        if ctx.workers == 0 {
            return Err(CliError::Input("--workers must be >= 1".into()));
        }
        if ctx.dmax < 2 {
            return Err(CliError::Input("--dmax must be >= 2".into()));
        }
        Ok(ctx)
    }

    pub fn pool(&self) -> CliResult<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CliError::Failed(format!("cannot start worker pool: {e}")))
    }
}

#[derive(Serialize)]
struct DispersionReport {
    params: ModelParams,
    gap: f64,
    minima: Vec<GapMinimum>,
    interior_closings: Vec<f64>,
}

pub fn dispersion(
    ctx: &Context,
    params: &ParamArgs,
    points: Option<usize>,
    s: &mut Settings,
) -> CliResult<()> {
    let p = PartialParams::resolve(params, s)?.model()?;
    let points = s.or("points", points, 513)?;
    s.finish()?;
    if points < 2 {
        return Err(CliError::Input("--points must be >= 2".into()));
    }
    let mut csv = Csv::new(&["k", "eps1", "eps2", "energy"]);
    for i in 0..points {
        let k = -PI + 2.0 * PI * i as f64 / (points - 1) as f64;
        let b = band_energy(k, &p);
        csv.row(&[&b.k, &b.eps1, &b.eps2, &b.energy]);
    }
    let scan = gap_scan(&p, DEFAULT_K_RESOLUTION)?;
    let report = DispersionReport {
        params: p,
        gap: scan.gap,
        interior_closings: scan.interior_closings(p.t()),
        minima: scan.minima,
    };
    let mut out = OutputDir::create(&ctx.out)?;
    out.write("dispersion.csv", csv.as_str())?;
    out.write_json("dispersion.json", &report)?;
    println!("E_g = {:e} at k = {:.9}", report.gap, report.minima[0].k);
    println!("wrote {}", out.root().display());
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct BoundaryEntry {
    pub alpha_star: f64,
    pub branch: &'static str,
    pub closing_momentum: f64,
    /// `E_g` at `α*`, `α* − 0.05` and `α* + 0.05` (the latter two may be
    /// absent when `α* − 0.05 ≤ 0`).
    pub gap_at: f64,
    pub gap_below: Option<f64>,
    pub gap_above: f64,
}

#[derive(Debug, Serialize)]
pub struct MuStar {
    pub mu_star: f64,
    pub branch: &'static str,
}

#[derive(Debug, Serialize)]
pub struct BoundaryReport {
    pub mu: f64,
    pub t: f64,
    /// Couplings used for the gap checks around each boundary.
    pub check_delta: f64,
    pub check_beta: f64,
    pub boundaries: Vec<BoundaryEntry>,
    pub alpha: Option<f64>,
    pub mu_star: Vec<MuStar>,
}

/// Analytic boundaries at `μ`, with the global gap at and around each.
pub fn boundary_report(
    mu: f64,
    t: f64,
    alpha: Option<f64>,
    delta: f64,
    beta: Option<f64>,
) -> CliResult<BoundaryReport> {
    let gap_at = |a: f64| -> CliResult<f64> {
        let p = ModelParams::new(mu, t, delta, a, beta.unwrap_or(a))?;
        Ok(global_gap(&p, DEFAULT_K_RESOLUTION)?)
    };
    let mut boundaries = Vec::new();
    for b in critical_alphas(mu, t)? {
        let a = b.alpha_star;
        boundaries.push(BoundaryEntry {
            alpha_star: a,
            branch: b.branch.label(),
            closing_momentum: b.closing_momentum,
            gap_at: gap_at(a)?,
            gap_below: if a > 0.05 { Some(gap_at(a - 0.05)?) } else { None },
            gap_above: gap_at(a + 0.05)?,
        });
    }
    let mu_star = match alpha {
        Some(a) => critical_mus(a, t)?
            .iter()
            .map(|(m, b)| MuStar {
                mu_star: *m,
                branch: b.label(),
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(BoundaryReport {
        mu,
        t,
        check_delta: delta,
        check_beta: beta.unwrap_or(f64::NAN),
        boundaries,
        alpha,
        mu_star,
    })
}

pub fn boundary(params: &ParamArgs, json: bool, s: &mut Settings) -> CliResult<()> {
    let pp = PartialParams::resolve(params, s)?;
    let json = s.switch("json", json)?;
    s.finish()?;
    let mu = pp.require(ParamName::Mu)?;
    // Δ and β do not move the boundary; they only shape the gap nearby.
    let delta = pp.delta.unwrap_or(1.0);
    let beta = if pp.lock_beta { None } else { Some(pp.beta.unwrap_or(1.0)) };
    let report = boundary_report(mu, pp.t, pp.alpha, delta, beta)?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("boundary report serializes")
        );
        return Ok(());
    }
    if report.boundaries.is_empty() {
        println!("no phase boundary alpha* > 0 at mu = {mu}, t = {}", pp.t);
    }
    for b in &report.boundaries {
        println!(
            "alpha* = {:.4} ({:.10}; branch {}, gap closes at k = {})",
            b.alpha_star,
            b.alpha_star,
            b.branch,
            if b.closing_momentum == 0.0 { "0" } else { "pi" }
        );
        println!(
            "  E_g: {:.3e} at alpha*, {} at alpha* - 0.05, {:.3e} at alpha* + 0.05 (delta = {delta}, beta = {})",
            b.gap_at,
            b.gap_below.map_or("n/a".to_string(), |g| format!("{g:.3e}")),
            b.gap_above,
            beta.map_or("alpha".to_string(), |b| b.to_string()),
        );
    }
    for m in &report.mu_star {
        println!(
            "mu* = {:.10} at alpha = {} (branch {})",
            m.mu_star,
            pp.alpha.unwrap_or_default(),
            m.branch
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct ProfileReport {
    summary: ProfileSummary,
    xi_fit: Option<ExponentialFit>,
    decay_fit: Option<ExponentialFit>,
    monogamy: MonogamyReport,
    kbi: Option<KbiReport>,
    kbi_skipped: Option<String>,
    quadrature: QuadratureConfig,
    d_max: usize,
    early_stop: bool,
}

pub fn profile(
    ctx: &Context,
    params: &ParamArgs,
    exhaustive: bool,
    s: &mut Settings,
) -> CliResult<()> {
    let p = PartialParams::resolve(params, s)?.model()?;
    let exhaustive = s.switch("exhaustive", exhaustive)?;
    s.finish()?;
    let opts = if exhaustive {
        ProfileOptions::exhaustive(ctx.dmax)
    } else {
        ProfileOptions::new(ctx.dmax)
    };
    let prof = entanglement_profile_with(&p, &opts, &ctx.quadrature)?;
    if prof.near_critical {
        warn!("E_g = {:e}: near-critical parameters, quadrature is slow and less reliable", prof.gap);
    }
    if !prof.converged {
        warn!(
            "C_d has not decayed below 1e-12 by d = {}; totals are truncated (tail bound {:e})",
            prof.c_d.len(),
            prof.tail_bound
        );
    }
    let monogamy = check_monogamy(&prof);
    let (kbi, kbi_skipped) = match check_kbi_relation(&prof) {
        Ok(k) => (Some(k), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = ProfileReport {
        summary: prof.summary(),
        xi_fit: prof.xi_fit,
        decay_fit: prof.decay_fit,
        monogamy,
        kbi,
        kbi_skipped,
        quadrature: ctx.quadrature,
        d_max: ctx.dmax,
        early_stop: opts.early_stop,
    };
    let mut out = OutputDir::create(&ctx.out)?;
    out.write("profile.csv", &prof.to_csv())?;
    out.write_json("profile.json", &report)?;
    println!(
        "C_1 = {:e}, xi_cut = {}, xi_fit = {}, C_inf = {:e}, tau_inf = {:e}",
        prof.c(1),
        prof.xi_cut,
        prof.xi_fit.map_or("n/a".into(), |f| format!("{:.4}", f.xi)),
        prof.c_inf,
        prof.tau_inf
    );
    println!("wrote {}", out.root().display());
    if !report.monogamy.holds {
        return Err(CliError::Failed(format!(
            "monogamy bound violated: {}",
            report.monogamy.violations.join("; ")
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct EntropyReport {
    params: ModelParams,
    fit_window: (usize, usize),
    fit: Option<CentralChargeFit>,
    c: Option<f64>,
    s0: Option<f64>,
}

pub fn entropy(
    ctx: &Context,
    params: &ParamArgs,
    lmax: Option<usize>,
    fit_min: Option<usize>,
    fit_max: Option<usize>,
    s: &mut Settings,
) -> CliResult<()> {
    let p = PartialParams::resolve(params, s)?.model()?;
    let lmax = s.or("lmax", lmax, 256)?;
    let window = (s.or("fit_min", fit_min, 32)?, s.or("fit_max", fit_max, lmax)?);
    s.finish()?;
    if lmax < 1 || window.0 > window.1 {
        return Err(CliError::Input(format!(
            "need lmax >= 1 and fit_min <= fit_max (got {lmax}, {window:?})"
        )));
    }
    let tbl = correlator_table(&p, lmax, &ctx.quadrature)?;
    let curve = entropy_curve(&default_lengths(lmax), &tbl, window)?;
    match curve.fit {
        Some(f) if f.curved => warn!(
            "S_A bends away from a straight line in log2 L (curvature {:.2}); gapped or window too small",
            f.curvature
        ),
        None => warn!("fewer than 4 block sizes inside {window:?}; no fit"),
        _ => {}
    }
    let report = EntropyReport {
        params: p,
        fit_window: window,
        fit: curve.fit,
        c: curve.c_fit(),
        s0: curve.s0_fit(),
    };
    let mut out = OutputDir::create(&ctx.out)?;
    out.write("entropy.csv", &curve.to_csv())?;
    out.write_json("entropy.json", &report)?;
    if let Some(f) = curve.fit {
        println!("c = {:.4}, s0 = {:.4} (window {window:?}, residual {:.2e})", f.c, f.s0, f.residual);
    }
    println!("wrote {}", out.root().display());
    Ok(())
}

#[derive(Serialize)]
struct FitRow {
    d: usize,
    k_d: f64,
    intercept: f64,
    residual: f64,
    correlation: f64,
    slope_error: f64,
    points: usize,
    unreliable_points: usize,
}

#[derive(Serialize)]
struct SideReport {
    side: Side,
    fits: Vec<FitRow>,
    kd: Option<KdFit>,
    error: Option<String>,
}

#[derive(Serialize)]
struct ScalingReport {
    params: ModelParams,
    axis: Axis,
    critical: f64,
    options: ScalingOptions,
    sides: Vec<SideReport>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| CliError::Input(format!("bad {what} entry `{x}`")))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn scaling(
    ctx: &Context,
    params: &ParamArgs,
    axis: Option<String>,
    distances: Option<String>,
    side: Option<String>,
    step: Option<f64>,
    window_lo: Option<f64>,
    window_hi: Option<f64>,
    samples: Option<usize>,
    s: &mut Settings,
) -> CliResult<()> {
    let p = PartialParams::resolve(params, s)?.model()?;
    let axis = match s.or("axis", axis, "alpha".to_string())?.as_str() {
        "alpha" => Axis::Alpha,
        "mu" => Axis::Mu,
        other => return Err(CliError::Input(format!("--axis must be alpha or mu, got `{other}`"))),
    };
    let ds: Vec<usize> = parse_list(&s.or("distances", distances, "1,2,3,4,5,6,7,8".into())?, "distance")?;
    let sides = match s.or("side", side, "both".to_string())?.as_str() {
        "below" => vec![Side::Below],
        "above" => vec![Side::Above],
        "both" => vec![Side::Below, Side::Above],
        other => return Err(CliError::Input(format!("--side must be below, above or both, got `{other}`"))),
    };
    let d = ScalingOptions::default();
    let opts = ScalingOptions {
        step: s.or("step", step, d.step)?,
        window: (s.or("window_lo", window_lo, d.window.0)?, s.or("window_hi", window_hi, d.window.1)?),
        samples: s.or("samples", samples, d.samples)?,
    };
    s.finish()?;
    let critical = nearest_critical(&p, axis)?;
    info!("critical {} = {critical}", axis.name());

    let pool = ctx.pool()?;
    let results: Vec<_> = pool.install(|| {
        sides
            .par_iter()
            .map(|&side| (side, log_divergence_fits(&ds, &p, axis, critical, side, &opts, &ctx.quadrature)))
            .collect()
    });

    let mut csv = Csv::new(&["side", "x", "log_distance", "d", "dC_dx", "error", "reliable", "used"]);
    let mut report = ScalingReport {
        params: p,
        axis,
        critical,
        options: opts,
        sides: Vec::new(),
    };
    for (side, res) in results {
        let side_name = match side {
            Side::Below => "below",
            Side::Above => "above",
        };
        match res {
            Ok(fits) => {
                for f in &fits {
                    for smp in &f.samples {
                        let dv = &smp.derivative;
                        csv.row(&[&side_name, &smp.x, &smp.log_distance, &f.d, &dv.value, &dv.error, &dv.reliable, &smp.used]);
                    }
                    if f.correlation.abs() < lrchain::criticality::LINEARITY_THRESHOLD {
                        warn!("{side_name}: d = {} fit correlation {:.4}", f.d, f.correlation);
                    }
                }
                let kd = kd_linear_fit(&fits);
                if let Ok(k) = &kd {
                    if k.nonlinear {
                        warn!("{side_name}: k_d is not linear in d (correlation {:.4})", k.correlation);
                    }
                    println!("{side_name}: q = {:.6}, q' = {:.6} (correlation {:.4})", k.q, k.q_prime, k.correlation);
                }
                report.sides.push(SideReport {
                    side,
                    fits: fits
                        .iter()
                        .map(|f| FitRow {
                            d: f.d,
                            k_d: f.k_d,
                            intercept: f.intercept,
                            residual: f.residual,
                            correlation: f.correlation,
                            slope_error: f.slope_error,
                            points: f.points,
                            unreliable_points: f.unreliable_points,
                        })
                        .collect(),
                    error: kd.as_ref().err().map(|e| e.to_string()),
                    kd: kd.ok(),
                });
            }
            Err(e) => {
                warn!("{side_name}: {e}");
                report.sides.push(SideReport {
                    side,
                    fits: Vec::new(),
                    kd: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let mut out = OutputDir::create(&ctx.out)?;
    out.write("scaling.csv", csv.as_str())?;
    out.write_json("scaling.json", &report)?;
    println!("wrote {}", out.root().display());
    if report.sides.iter().all(|s| s.fits.is_empty()) {
        return Err(CliError::Failed("no side produced a usable fit".into()));
    }
    Ok(())
}
