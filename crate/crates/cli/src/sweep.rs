//! Grid sweeps with deterministic, worker-count independent output.

use std::time::Instant;

use log::warn;
use lrchain::entanglement::{check_kbi_relation, check_monogamy, entanglement_profile, EntanglementProfile};
use lrchain::entropy::{default_lengths, entropy_curve};
use lrchain::model::{critical_alphas, critical_mus, global_gap, DEFAULT_K_RESOLUTION};
use lrchain::{correlator_table, ModelParams, QuadratureConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{Csv, CsvField, FileRecord, OutputDir};
use crate::params::{ParamName, PartialParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisSpec {
    pub param: ParamName,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl AxisSpec {
    /// `name:start:stop:steps`.
    pub fn parse(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Input(format!("axis `{s}`: expected name:start:stop:steps"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let axis = AxisSpec {
            param: ParamName::parse(parts[0])?,
            start: parts[1].trim().parse().map_err(|_| bad())?,
            stop: parts[2].trim().parse().map_err(|_| bad())?,
            steps: parts[3].trim().parse().map_err(|_| bad())?,
        };
        if axis.steps < 2 {
            return Err(CliError::Input(format!("axis `{s}`: steps must be >= 2")));
        }
        if !axis.start.is_finite() || !axis.stop.is_finite() {
            return Err(bad());
        }
        Ok(axis)
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.stop;
        }
        self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Gap,
    Xi,
    Profile,
    Entropy,
}

impl Quantity {
    pub fn parse_list(s: &str) -> CliResult<Vec<Quantity>> {
        let mut out = Vec::new();
        for item in s.split(',') {
            let q = match item.trim() {
                "gap" => Quantity::Gap,
                "xi" => Quantity::Xi,
                "profile" => Quantity::Profile,
                "entropy" => Quantity::Entropy,
                other => {
                    return Err(CliError::Input(format!(
                        "unknown quantity `{other}` (expected gap, xi, profile, entropy)"
                    )))
                }
            };
            if !out.contains(&q) {
                out.push(q);
            }
        }
        Ok(out)
    }

    fn name(self) -> &'static str {
        match self {
            Quantity::Gap => "gap",
            Quantity::Xi => "xi",
            Quantity::Profile => "profile",
            Quantity::Entropy => "entropy",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub axes: Vec<AxisSpec>,
    pub fixed: PartialParams,
    pub quantities: Vec<Quantity>,
    pub dmax: usize,
    pub lmax: usize,
    pub quadrature: QuadratureConfig,
    pub workers: usize,
    pub max_points: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.axes.len() > 2 {
            return Err(CliError::Input("at most two sweep axes".into()));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(CliError::Input("sweep axes must differ".into()));
        }
        if self.quantities.is_empty() {
            return Err(CliError::Input("no quantities requested".into()));
        }
        if self.points() > self.max_points {
            return Err(CliError::Input(format!(
                "{} grid points exceed the budget of {}",
                self.points(),
                self.max_points
            )));
        }
        // Everything not on an axis must be fixed.
        let probe = self.point_params(0);
        for name in [ParamName::Mu, ParamName::Delta, ParamName::Alpha, ParamName::Beta] {
            probe.require(name)?;
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    /// Axis coordinates of grid point `i`; the first axis varies slowest.
    pub fn coords(&self, i: usize) -> Vec<f64> {
        match self.axes.as_slice() {
            [] => Vec::new(),
            [x] => vec![x.value(i)],
            [x, y] => vec![x.value(i / y.steps), y.value(i % y.steps)],
            _ => unreachable!("validated"),
        }
    }

    fn point_params(&self, i: usize) -> PartialParams {
        let mut p = self.fixed;
        for (axis, v) in self.axes.iter().zip(self.coords(i)) {
            p.set(axis.param, v);
        }
        p
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub index: usize,
    pub coords: Vec<f64>,
    pub quantity: Quantity,
    pub reason: String,
}

#[derive(Debug, Clone)]
struct XiRow {
    xi_cut: usize,
    xi_fit: Option<f64>,
    decay_xi: Option<f64>,
    c1: f64,
    c_inf: f64,
    tau_inf: f64,
    converged: bool,
    monogamy_holds: bool,
    kbi_r1: Option<f64>,
}

#[derive(Debug, Clone)]
struct EntropyRow {
    s_lmax: f64,
    c: Option<f64>,
    s0: Option<f64>,
    curved: Option<bool>,
}

#[derive(Debug, Default)]
struct PointResult {
    gap: Option<f64>,
    profile: Option<EntanglementProfile>,
    xi: Option<XiRow>,
    entropy: Option<EntropyRow>,
    failures: Vec<(Quantity, String)>,
}

fn evaluate(spec: &SweepSpec, i: usize) -> PointResult {
    let mut r = PointResult::default();
    let params = match spec.point_params(i).model() {
        Ok(p) => p,
        Err(e) => {
            for &q in &spec.quantities {
                r.failures.push((q, e.to_string()));
            }
            return r;
        }
    };
    for &q in &spec.quantities {
        let outcome = match q {
            Quantity::Gap => global_gap(&params, DEFAULT_K_RESOLUTION).map(|g| r.gap = Some(g)),
            Quantity::Xi | Quantity::Profile => {
                let prof = match r.profile.take() {
                    Some(p) => Ok(p),
                    None => entanglement_profile(&params, spec.dmax, &spec.quadrature),
                };
                prof.map(|prof| {
                    if q == Quantity::Xi {
                        r.xi = Some(xi_row(&prof));
                    }
                    r.profile = Some(prof);
                })
            }
            Quantity::Entropy => entropy_row(&params, spec.lmax, &spec.quadrature).map(|e| r.entropy = Some(e)),
        };
        if let Err(e) = outcome {
            r.failures.push((q, e.to_string()));
        }
    }
    r
}

fn xi_row(prof: &EntanglementProfile) -> XiRow {
    XiRow {
        xi_cut: prof.xi_cut,
        xi_fit: prof.xi_fit.map(|f| f.xi),
        decay_xi: prof.decay_fit.map(|f| f.xi),
        c1: prof.c(1),
        c_inf: prof.c_inf,
        tau_inf: prof.tau_inf,
        converged: prof.converged,
        monogamy_holds: check_monogamy(prof).holds,
        kbi_r1: check_kbi_relation(prof).ok().map(|k| k.r1),
    }
}

fn entropy_row(p: &ModelParams, lmax: usize, q: &QuadratureConfig) -> lrchain::Result<EntropyRow> {
    let tbl = correlator_table(p, lmax, q)?;
    let curve = entropy_curve(&default_lengths(lmax), &tbl, ((lmax / 8).max(1), lmax))?;
    Ok(EntropyRow {
        s_lmax: *curve.s_a.last().expect("non-empty"),
        c: curve.c_fit(),
        s0: curve.s0_fit(),
        curved: curve.fit.map(|f| f.curved),
    })
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub spec: SweepSpec,
    pub points: usize,
    pub wall_time_seconds: f64,
    pub files: Vec<FileRecord>,
    pub failures: Vec<Failure>,
}

fn header<'a>(spec: &'a SweepSpec, rest: &[&'a str]) -> Vec<&'a str> {
    let mut h: Vec<&str> = spec.axes.iter().map(|a| a.param.as_str()).collect();
    h.extend_from_slice(rest);
    h
}

/// Runs the sweep, writing one CSV per quantity, a boundary overlay and
/// `manifest.json` into `out`.
pub fn run_sweep(spec: &SweepSpec, out: &mut OutputDir) -> CliResult<Manifest> {
    spec.validate()?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| CliError::Failed(format!("cannot start worker pool: {e}")))?;
    let results: Vec<PointResult> =
        pool.install(|| (0..spec.points()).into_par_iter().map(|i| evaluate(spec, i)).collect());

    let mut failures = Vec::new();
    for (i, r) in results.iter().enumerate() {
        for (q, reason) in &r.failures {
            failures.push(Failure {
                index: i,
                coords: spec.coords(i),
                quantity: *q,
                reason: reason.clone(),
            });
        }
    }

    for &q in &spec.quantities {
        let csv = match q {
            Quantity::Gap => {
                let mut csv = Csv::new(&header(spec, &["E_g"]));
                for (i, r) in results.iter().enumerate() {
                    if let Some(g) = r.gap {
                        row(&mut csv, spec, i, &[&g]);
                    }
                }
                csv
            }
            Quantity::Xi => {
                let mut csv = Csv::new(&header(
                    spec,
                    &["xi_cut", "xi_fit", "decay_xi", "C_1", "C_inf", "tau_inf", "converged", "monogamy_holds", "kbi_r1"],
                ));
                for (i, r) in results.iter().enumerate() {
                    if let Some(x) = &r.xi {
                        row(
                            &mut csv,
                            spec,
                            i,
                            &[&x.xi_cut, &x.xi_fit, &x.decay_xi, &x.c1, &x.c_inf, &x.tau_inf, &x.converged, &x.monogamy_holds, &x.kbi_r1],
                        );
                    }
                }
                csv
            }
            Quantity::Profile => {
                let mut csv = Csv::new(&header(spec, &["d", "C_d", "tau_d"]));
                for (i, r) in results.iter().enumerate() {
                    if let Some(p) = &r.profile {
                        for (k, (c, t)) in p.c_d.iter().zip(&p.tau_d).enumerate() {
                            row(&mut csv, spec, i, &[&(k + 1), c, t]);
                        }
                    }
                }
                csv
            }
            Quantity::Entropy => {
                let mut csv = Csv::new(&header(spec, &["S_A_lmax", "c_fit", "s0_fit", "curved"]));
                for (i, r) in results.iter().enumerate() {
                    if let Some(e) = &r.entropy {
                        row(&mut csv, spec, i, &[&e.s_lmax, &e.c, &e.s0, &e.curved]);
                    }
                }
                csv
            }
        };
        out.write(&format!("{}.csv", q.name()), csv.as_str())?;
    }
    out.write("boundary.csv", boundary_overlay(spec).as_str())?;

    if !failures.is_empty() {
        warn!("{} point evaluations failed; see manifest.json", failures.len());
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        spec: spec.clone(),
        points: spec.points(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        files: out.files().to_vec(),
        failures,
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(manifest)
}

fn row(csv: &mut Csv, spec: &SweepSpec, i: usize, rest: &[&dyn CsvField]) {
    let coords = spec.coords(i);
    let mut cells: Vec<&dyn CsvField> = coords.iter().map(|c| c as &dyn CsvField).collect();
    cells.extend_from_slice(rest);
    csv.row(&cells);
}

/// Analytic boundaries along the swept `μ` (as `α*`) and `α` (as `μ*`).
fn boundary_overlay(spec: &SweepSpec) -> Csv {
    let mut csv = Csv::new(&["param", "value", "critical_param", "critical_value", "branch"]);
    let t = spec.fixed.t;
    let mu_axis = spec.axes.iter().find(|a| a.param == ParamName::Mu);
    let alpha_axis = spec.axes.iter().find(|a| a.param == ParamName::Alpha);
    let mus = mu_axis.map_or_else(|| spec.fixed.mu.into_iter().collect(), |a| a.values());
    let alphas = alpha_axis.map_or_else(|| spec.fixed.alpha.into_iter().collect(), |a| a.values());
    if mu_axis.is_some() || alpha_axis.is_none() {
        for mu in mus {
            for b in critical_alphas(mu, t).unwrap_or_default() {
                csv.row(&[&"mu", &mu, &"alpha", &b.alpha_star, &b.branch.label()]);
            }
        }
    }
    if alpha_axis.is_some() || mu_axis.is_none() {
        for alpha in alphas {
            if let Ok(sols) = critical_mus(alpha, t) {
                for (m, b) in sols {
                    csv.row(&[&"alpha", &alpha, &"mu", &m, &b.label()]);
                }
            }
        }
    }
    csv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(axes: Vec<AxisSpec>, quantities: Vec<Quantity>, workers: usize) -> SweepSpec {
        SweepSpec {
            axes,
            fixed: PartialParams {
                mu: Some(-5.0),
                t: 1.0,
                delta: Some(1.3),
                alpha: Some(0.8),
                beta: None,
                lock_beta: true,
            },
            quantities,
            dmax: 40,
            lmax: 16,
            quadrature: QuadratureConfig::default(),
            workers,
            max_points: 1000,
        }
    }

    #[test]
    fn axis_parsing() {
        let a = AxisSpec::parse("mu:-30:10:81").unwrap();
        assert_eq!(a.param, ParamName::Mu);
        assert_eq!(a.value(0), -30.0);
        assert_eq!(a.value(80), 10.0);
        assert_eq!(a.value(40), -10.0);
        assert!(AxisSpec::parse("mu:0:1:1").is_err());
        assert!(AxisSpec::parse("nu:0:1:3").is_err());
        assert!(AxisSpec::parse("mu:0:1").is_err());
    }

    #[test]
    fn grid_order_first_axis_slowest() {
        let s = spec(
            vec![AxisSpec::parse("mu:0:1:2").unwrap(), AxisSpec::parse("alpha:1:3:3").unwrap()],
            vec![Quantity::Gap],
            1,
        );
        assert_eq!(s.points(), 6);
        assert_eq!(s.coords(0), vec![0.0, 1.0]);
        assert_eq!(s.coords(1), vec![0.0, 2.0]);
        assert_eq!(s.coords(3), vec![1.0, 1.0]);
    }

    #[test]
    fn budget_and_missing_parameters() {
        let mut s = spec(vec![AxisSpec::parse("mu:0:1:2000").unwrap()], vec![Quantity::Gap], 1);
        assert!(s.validate().is_err());
        s.max_points = 5000;
        s.validate().unwrap();
        s.fixed.delta = None;
        assert!(s.validate().is_err());
    }

    #[test]
    fn single_point_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        let m = run_sweep(&spec(vec![], vec![Quantity::Gap, Quantity::Xi], 1), &mut out).unwrap();
        assert_eq!(m.points, 1);
        assert!(m.failures.is_empty());
        let gap = std::fs::read_to_string(dir.path().join("gap.csv")).unwrap();
        assert_eq!(gap.lines().count(), 2);
    }

    #[test]
    fn output_independent_of_workers() {
        let axes = vec![AxisSpec::parse("mu:-8:2:6").unwrap(), AxisSpec::parse("alpha:0:1:3").unwrap()];
        let qs = vec![Quantity::Gap, Quantity::Xi, Quantity::Profile, Quantity::Entropy];
        let mut manifests = Vec::new();
        for workers in [1, 4] {
            let dir = tempfile::tempdir().unwrap();
            let mut out = OutputDir::create(dir.path()).unwrap();
            let m = run_sweep(&spec(axes.clone(), qs.clone(), workers), &mut out).unwrap();
            manifests.push(m);
        }
        let hashes = |m: &Manifest| -> Vec<(String, String)> {
            m.files.iter().map(|f| (f.name.clone(), f.sha256.clone())).collect()
        };
        assert_eq!(hashes(&manifests[0]), hashes(&manifests[1]));
        // α = 0 is invalid: those points fail but the sweep goes on.
        assert_eq!(manifests[0].failures.len(), 6 * 4);
        assert!(manifests[0].failures.iter().all(|f| f.coords[1] == 0.0));
    }
}
