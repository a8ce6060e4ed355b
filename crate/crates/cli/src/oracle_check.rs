//! Validation of the closed-form pipeline against the finite-ring oracle.

use lrchain::entanglement::{concurrence, two_site_state, wootters_concurrence, TwoSiteState};
use lrchain::model::{global_gap, DEFAULT_K_RESOLUTION};
use lrchain::oracle::{diagonalize_ring, wick_two_site, Method, RingConfig};
use lrchain::{correlator_table, ModelParams, QuadratureConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Draws closer to a phase boundary than this gap are skipped, so that the
/// ring has converged to the infinite chain.
pub const MIN_DRAW_GAP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSpec {
    pub n_sites: usize,
    pub draws: usize,
    pub x_max: usize,
    pub x_states: usize,
    pub wick_dmax: usize,
    pub quadrature: QuadratureConfig,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            n_sites: 512,
            draws: 10,
            x_max: 20,
            x_states: 10_000,
            wick_dmax: 8,
            quadrature: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub tolerance: f64,
    pub max_error: f64,
    pub samples: usize,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, tolerance: f64, errors: &[f64]) -> Self {
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        CheckResult {
            name,
            tolerance,
            max_error,
            samples: errors.len(),
            passed: !errors.is_empty() && errors.iter().all(|e| *e <= tolerance),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub spec: OracleSpec,
    pub draws: Vec<ModelParams>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Radical inverse of `i` in `base`: a low-discrepancy sequence in [0, 1).
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic gapped parameter draws.
pub fn parameter_draws(count: usize) -> Vec<ModelParams> {
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count && i < 1000 * (count as u64 + 1) {
        let u = |b| halton(i, b);
        let mu = -6.0 + 12.0 * u(2);
        let sign = if u(11) < 0.5 { -1.0 } else { 1.0 };
        let delta = sign * (0.3 + 1.7 * u(3));
        let alpha = 0.3 + 2.7 * u(5);
        let beta = 0.3 + 2.7 * u(7);
        i += 1;
        let Ok(p) = ModelParams::unit_hopping(mu, delta, alpha, beta) else { continue };
        if global_gap(&p, DEFAULT_K_RESOLUTION).is_ok_and(|g| g >= MIN_DRAW_GAP) {
            out.push(p);
        }
    }
    out
}

/// Deterministic physical X-states with both coherences populated.
pub fn x_states(count: usize) -> Vec<TwoSiteState> {
    (1..=count as u64)
        .map(|i| {
            let w = [halton(i, 2), halton(i, 3), halton(i, 5)];
            let total: f64 = w.iter().sum::<f64>() + 1e-12;
            let (a, b, dd) = (4.0 * w[0] / total, 2.0 * w[1] / total, 4.0 * w[2] / total);
            let e = b * (2.0 * halton(i, 7) - 1.0);
            let f = (a * dd).sqrt() * (2.0 * halton(i, 11) - 1.0);
            TwoSiteState::new(1, a, b, dd, e, f).expect("constructed inside the physical region")
        })
        .collect()
}

struct DrawErrors {
    g: Vec<f64>,
    wick: Vec<f64>,
    paths: Option<f64>,
}

fn check_draw(index: usize, p: &ModelParams, spec: &OracleSpec) -> lrchain::Result<DrawErrors> {
    let reach = spec.x_max.max(spec.wick_dmax);
    let tbl = correlator_table(p, reach, &spec.quadrature)?;
    let ring = diagonalize_ring(&RingConfig::new(*p, spec.n_sites)?, Method::Momentum)?;
    let x_max = spec.x_max as i64;
    let g = (-x_max..=x_max).map(|x| (ring.g(x) - tbl.g(x)).abs()).collect();
    let mut wick = Vec::with_capacity(spec.wick_dmax);
    for d in 1..=spec.wick_dmax {
        let closed = concurrence(&two_site_state(d, &tbl)?);
        let rho = wick_two_site(&ring, 0, d)?;
        wick.push((wootters_concurrence(&rho)? - closed).abs());
    }
    // Dense diagonalization is O(N³); compare paths on a smaller ring for a
    // few draws.
    let paths = if index < 3 {
        let cfg = RingConfig::new(*p, spec.n_sites.min(128))?;
        let dense = diagonalize_ring(&cfg, Method::Dense)?;
        let momentum = diagonalize_ring(&cfg, Method::Momentum)?;
        let diff = (&dense.hop - &momentum.hop)
            .iter()
            .chain((&dense.pair - &momentum.pair).iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        Some(diff)
    } else {
        None
    };
    Ok(DrawErrors { g, wick, paths })
}

pub fn run(spec: &OracleSpec) -> CliResult<OracleReport> {
    if spec.draws == 0 || spec.wick_dmax == 0 || spec.wick_dmax > lrchain::oracle::MAX_WICK_SEPARATION {
        return Err(CliError::Input(format!(
            "need draws >= 1 and 1 <= wick_dmax <= {}",
            lrchain::oracle::MAX_WICK_SEPARATION
        )));
    }
    if spec.x_max >= spec.n_sites / 2 {
        return Err(CliError::Input("xmax must be below n_sites / 2".into()));
    }
    let draws = parameter_draws(spec.draws);
    let per_draw: Vec<DrawErrors> = draws
        .par_iter()
        .enumerate()
        .map(|(i, p)| check_draw(i, p, spec))
        .collect::<lrchain::Result<_>>()?;

    let xs = x_states(spec.x_states);
    let x_errors: Vec<f64> = xs
        .par_iter()
        .map(|s| Ok((wootters_concurrence(&s.density_matrix())? - concurrence(s)).abs()))
        .collect::<lrchain::Result<_>>()?;

    let flat = |f: fn(&DrawErrors) -> &Vec<f64>| -> Vec<f64> {
        per_draw.iter().flat_map(|d| f(d).iter().copied()).collect()
    };
    let paths: Vec<f64> = per_draw.iter().filter_map(|d| d.paths).collect();
    let checks = vec![
        CheckResult::new("g_ring_vs_quadrature", 1e-4, &flat(|d| &d.g)),
        CheckResult::new("x_state_closed_form_vs_wootters", 1e-10, &x_errors),
        CheckResult::new("wick_concurrence_vs_closed_form", 1e-4, &flat(|d| &d.wick)),
        CheckResult::new("dense_vs_momentum_ring", 1e-12, &paths),
    ];
    Ok(OracleReport {
        spec: *spec,
        passed: checks.iter().all(|c| c.passed),
        draws,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_values() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn draws_are_gapped_and_deterministic() {
        let a = parameter_draws(5);
        assert_eq!(a, parameter_draws(5));
        assert_eq!(a.len(), 5);
        for p in &a {
            assert!(global_gap(p, DEFAULT_K_RESOLUTION).unwrap() >= MIN_DRAW_GAP);
        }
    }

    #[test]
    fn small_report_passes() {
        let spec = OracleSpec {
            n_sites: 128,
            draws: 2,
            x_max: 10,
            x_states: 200,
            wick_dmax: 4,
            ..OracleSpec::default()
        };
        let r = run(&spec).unwrap();
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.checks.len(), 4);
    }
}
