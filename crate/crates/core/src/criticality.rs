//! Derivatives of `C_d` across a phase transition and the logarithmic law
//! `∂C_d/∂α ≃ k_d ln|α − α*|` with `k_d = q|d| + q′`.

use serde::Serialize;

use crate::correlators::{correlator_table, QuadratureConfig};
use crate::entanglement::{concurrence_with_branch, two_site_state, ConcurrenceBranch};
use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::model::{critical_alphas, critical_mus, ModelParams};

pub const DEFAULT_STEP: f64 = 1e-4;
/// Default fit window in `ln|x − x*|`.
pub const DEFAULT_WINDOW: (f64, f64) = (-9.0, -4.0);
/// Richardson error above this fraction of the value marks a derivative
/// unreliable.
pub const RELIABILITY: f64 = 0.01;
/// Fewest usable samples for a logarithmic fit.
pub const MIN_FIT_POINTS: usize = 6;
/// Correlation below which a `k_d` line is reported as nonlinear.
pub const LINEARITY_THRESHOLD: f64 = 0.98;

/// The coupling varied across the transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    Alpha,
    Mu,
}

impl Axis {
    pub fn value(self, p: &ModelParams) -> f64 {
        match self {
            Axis::Alpha => p.alpha(),
            Axis::Mu => p.mu(),
        }
    }

    pub fn set(self, p: &ModelParams, v: f64) -> Result<ModelParams> {
        match self {
            Axis::Alpha => p.with_alpha(v),
            Axis::Mu => p.with_mu(v),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Alpha => "alpha",
            Axis::Mu => "mu",
        }
    }
}

/// Critical value along `axis` closest to the current parameters.
pub fn nearest_critical(p: &ModelParams, axis: Axis) -> Result<f64> {
    let here = axis.value(p);
    let candidates: Vec<f64> = match axis {
        Axis::Alpha => critical_alphas(p.mu(), p.t())?
            .iter()
            .map(|b| b.alpha_star)
            .collect(),
        Axis::Mu => critical_mus(p.alpha(), p.t())?.iter().map(|c| c.0).collect(),
    };
    candidates
        .into_iter()
        .min_by(|a, b| (a - here).abs().total_cmp(&(b - here).abs()))
        .ok_or_else(|| {
            Error::OutsideRegime(format!(
                "no phase boundary along {} at {p:?}",
                axis.name()
            ))
        })
}

/// `C_d` and the active concurrence branch for every requested `d`.
fn concurrences(
    ds: &[usize],
    p: &ModelParams,
    q: &QuadratureConfig,
) -> Result<Vec<(f64, ConcurrenceBranch)>> {
    let d_max = ds.iter().copied().max().unwrap_or(1);
    let tbl = correlator_table(p, d_max, q)?;
    ds.iter()
        .map(|&d| Ok(concurrence_with_branch(&two_site_state(d, &tbl)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivative {
    pub d: usize,
    /// Richardson extrapolation of the central differences at `h` and `h/2`.
    pub value: f64,
    /// `|D(h/2) − D(h)| / 3`.
    pub error: f64,
    pub step: f64,
    pub reliable: bool,
    /// The active concurrence branch differs among the stencil points.
    pub branch_change: bool,
}

/// `∂C_d/∂x` along `axis` for each `d` in `ds`, sharing the stencil tables.
pub fn derivatives(
    ds: &[usize],
    p: &ModelParams,
    axis: Axis,
    step: f64,
    q: &QuadratureConfig,
) -> Result<Vec<Derivative>> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {step}")));
    }
    if ds.is_empty() || ds.contains(&0) {
        return Err(Error::InvalidParameter("distances must be >= 1".into()));
    }
    let x = axis.value(p);
    let eval = |offset: f64| concurrences(ds, &axis.set(p, x + offset)?, q);
    let (hp, hm) = (eval(step)?, eval(-step)?);
    let (sp, sm) = (eval(step / 2.0)?, eval(-step / 2.0)?);
    Ok((0..ds.len())
        .map(|i| {
            let coarse = (hp[i].0 - hm[i].0) / (2.0 * step);
            let fine = (sp[i].0 - sm[i].0) / step;
            let value = (4.0 * fine - coarse) / 3.0;
            let error = (fine - coarse).abs() / 3.0;
            let b = hp[i].1;
            Derivative {
                d: ds[i],
                value,
                error,
                step,
                reliable: error <= RELIABILITY * value.abs(),
                branch_change: [hm[i].1, sp[i].1, sm[i].1].iter().any(|&o| o != b),
            }
        })
        .collect())
}

/// `∂C_d/∂α` by Richardson-extrapolated central differences.
pub fn dc_dalpha(d: usize, p: &ModelParams, step: f64, q: &QuadratureConfig) -> Result<Derivative> {
    Ok(derivatives(&[d], p, Axis::Alpha, step, q)?[0])
}

/// Which side of the critical point is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Below,
    Above,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Below => -1.0,
            Side::Above => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingOptions {
    pub step: f64,
    /// `[lo, hi]` in `ln|x − x*|`.
    pub window: (f64, f64),
    /// Samples per side, evenly spaced in `ln|x − x*|`.
    pub samples: usize,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            step: DEFAULT_STEP,
            window: DEFAULT_WINDOW,
            samples: 16,
        }
    }
}

impl ScalingOptions {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.window;
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("empty window [{lo}, {hi}]")));
        }
        if hi >= 0.05f64.ln() {
            return Err(Error::InvalidParameter(format!(
                "window upper end {hi} must stay below ln 0.05"
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter("need >= 2 samples".into()));
        }
        Ok(())
    }
}

/// One derivative sample used in (or excluded from) a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingSample {
    pub x: f64,
    pub log_distance: f64,
    pub derivative: Derivative,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub d: usize,
    pub axis: Axis,
    pub side: Side,
    /// Slope of `∂C_d/∂x` against `ln|x − x*|`.
    pub k_d: f64,
    pub intercept: f64,
    pub critical: f64,
    pub fit_window: (f64, f64),
    pub residual: f64,
    pub correlation: f64,
    pub slope_error: f64,
    pub points: usize,
    pub unreliable_points: usize,
    pub samples: Vec<ScalingSample>,
}

/// Logarithmic-divergence fits for several distances on one side of `x*`.
///
/// Samples closer than `10·step` to `x*`, those whose stencil straddles a
/// concurrence branch change, and those that fail to evaluate are excluded.
pub fn log_divergence_fits(
    ds: &[usize],
    p: &ModelParams,
    axis: Axis,
    critical: f64,
    side: Side,
    opts: &ScalingOptions,
    q: &QuadratureConfig,
) -> Result<Vec<ScalingFit>> {
    opts.validate()?;
    let (lo, hi) = opts.window;
    let mut per_d: Vec<Vec<ScalingSample>> = vec![Vec::new(); ds.len()];
    for s in 0..opts.samples {
        let u = lo + (hi - lo) * s as f64 / (opts.samples - 1) as f64;
        let offset = u.exp();
        let x = critical + side.sign() * offset;
        if offset < 10.0 * opts.step {
            continue;
        }
        let Ok(point) = axis.set(p, x) else { continue };
        let Ok(derivs) = derivatives(ds, &point, axis, opts.step, q) else {
            continue;
        };
        for (slot, derivative) in per_d.iter_mut().zip(derivs) {
            slot.push(ScalingSample {
                x,
                log_distance: u,
                derivative,
                used: !derivative.branch_change && derivative.value.is_finite(),
            });
        }
    }
    ds.iter()
        .zip(per_d)
        .map(|(&d, samples)| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = samples
                .iter()
                .filter(|s| s.used)
                .map(|s| (s.log_distance, s.derivative.value))
                .unzip();
            if xs.len() < MIN_FIT_POINTS {
                return Err(Error::InsufficientData(format!(
                    "d = {d}: {} usable derivative samples, need {MIN_FIT_POINTS}",
                    xs.len()
                )));
            }
            let fit = fit_line(&xs, &ys)?;
            Ok(ScalingFit {
                d,
                axis,
                side,
                k_d: fit.slope,
                intercept: fit.intercept,
                critical,
                fit_window: opts.window,
                residual: fit.rms_residual,
                correlation: fit.correlation,
                slope_error: fit.slope_error,
                points: xs.len(),
                unreliable_points: samples
                    .iter()
                    .filter(|s| s.used && !s.derivative.reliable)
                    .count(),
                samples,
            })
        })
        .collect()
}

/// Single-distance form of [`log_divergence_fits`] along `α`, using the
/// nearest analytic `α*`.
pub fn log_divergence_fit(
    d: usize,
    p: &ModelParams,
    side: Side,
    opts: &ScalingOptions,
    q: &QuadratureConfig,
) -> Result<ScalingFit> {
    let critical = nearest_critical(p, Axis::Alpha)?;
    let mut fits = log_divergence_fits(&[d], p, Axis::Alpha, critical, side, opts, q)?;
    Ok(fits.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KdFit {
    pub q: f64,
    pub q_prime: f64,
    pub residual: f64,
    pub correlation: f64,
    pub nonlinear: bool,
    pub line: LineFit,
}

/// Fits `k_d = q|d| + q′` over at least four distances.
pub fn kd_linear_fit(fits: &[ScalingFit]) -> Result<KdFit> {
    kd_linear_fit_points(
        &fits.iter().map(|f| (f.d, f.k_d)).collect::<Vec<_>>(),
    )
}

pub fn kd_linear_fit_points(points: &[(usize, f64)]) -> Result<KdFit> {
    let mut ds: Vec<usize> = points.iter().map(|p| p.0).collect();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "k_d fit needs >= 4 distances, got {}",
            ds.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().map(|&(d, k)| (d as f64, k)).unzip();
    let line = fit_line(&x, &y)?;
    Ok(KdFit {
        q: line.slope,
        q_prime: line.intercept,
        residual: line.rms_residual,
        correlation: line.correlation,
        nonlinear: line.correlation.abs() < LINEARITY_THRESHOLD,
        line,
    })
}

/// Grid point where `|∂C_d/∂x|` peaks, skipping points that fail to evaluate.
pub fn derivative_peak(
    d: usize,
    p: &ModelParams,
    axis: Axis,
    grid: &[f64],
    step: f64,
    q: &QuadratureConfig,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let values: Vec<(f64, f64)> = grid
        .iter()
        .filter_map(|&x| {
            let point = axis.set(p, x).ok()?;
            let deriv = derivatives(&[d], &point, axis, step, q).ok()?;
            Some((x, deriv[0].value))
        })
        .collect();
    let peak = values
        .iter()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .ok_or_else(|| Error::InsufficientData("no derivative could be evaluated".into()))?
        .0;
    Ok((peak, values))
}
