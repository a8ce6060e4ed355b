//! The Majorana correlator `G_x` and the spin correlators built from it.
//!
//! With `A_i = c_i† + c_i` and `B_i = c_i† − c_i`,
//!
//! ```text
//! G_x = ⟨B_{i+x} A_i⟩ = (1/π) ∫₀^π [ε₂(k) sin(kx) − ε₁(k) cos(kx)] / E(k) dk
//! ```
//!
//! The two-site spin correlators follow from Wick's theorem:
//! `P_zz = G_0² − G_d G_{−d}`, `P_z0 = −G_0`, and `P_xx`, `P_yy` are `d × d`
//! Toeplitz determinants with entries `G_{i−j−1}` and `G_{i−j+1}`.

mod cache;

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

pub use cache::CorrelatorCache;

use crate::error::{Error, Result};
use crate::linalg::{lu_determinant, Square};
use crate::model::{band_energy, gap_scan, ModelParams, DEFAULT_K_RESOLUTION};
use crate::quadrature;

/// Largest separation accepted by [`g_correlator`].
pub const MAX_SEPARATION: i64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    /// Absolute tolerance on each `G_x`.
    pub abs_tol: f64,
    /// Bisections allowed beyond the structured initial partition.
    pub max_subdivisions: usize,
    /// Samples in the FFT pre-pass; a power of two.
    pub grid_size: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            max_subdivisions: 60,
            grid_size: 1 << 16,
        }
    }
}

impl QuadratureConfig {
    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        QuadratureConfig { abs_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be > 0, got {}",
                self.abs_tol
            )));
        }
        if !self.grid_size.is_power_of_two() || self.grid_size < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid_size must be a power of two >= 16, got {}",
                self.grid_size
            )));
        }
        Ok(())
    }
}

/// Breakpoints on `[0, π]`: geometric grading towards `0`, `π` and each
/// gap minimum, plus uniform panels short enough to follow `cos(kx)`.
fn breakpoints(x: i64, seeds: &[f64]) -> Vec<f64> {
    const LEVELS: i32 = 40;
    let mut pts = vec![0.0, PI];
    let mut grade = |s: f64| {
        pts.push(s);
        for j in 1..=LEVELS {
            let h = PI * 0.5f64.powi(j);
            for p in [s - h, s + h] {
                if p > 0.0 && p < PI {
                    pts.push(p);
                }
            }
        }
    };
    grade(0.0);
    grade(PI);
    for &s in seeds {
        grade(s.clamp(0.0, PI));
    }
    let uniform = (x.unsigned_abs() as usize).max(16);
    for i in 1..uniform {
        pts.push(PI * i as f64 / uniform as f64);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1e-300));
    pts
}

fn integrand(x: i64, p: &ModelParams) -> impl Fn(f64) -> f64 + '_ {
    let xf = x as f64;
    move |k: f64| {
        let s = band_energy(k, p);
        if s.energy == 0.0 {
            return 0.0;
        }
        let (sin, cos) = (k * xf).sin_cos();
        (s.eps2 * sin - s.eps1 * cos) / s.energy
    }
}

fn quadrature_g(x: i64, p: &ModelParams, q: &QuadratureConfig, seeds: &[f64]) -> Result<f64> {
    let bp = breakpoints(x, seeds);
    // The 1/π prefactor scales the error too.
    let r = quadrature::integrate(integrand(x, p), &bp, q.abs_tol * PI, q.max_subdivisions);
    let estimate = r.abs_error / PI;
    if estimate > q.abs_tol {
        return Err(Error::QuadratureDivergence {
            x,
            estimate,
            tolerance: q.abs_tol,
        });
    }
    Ok(r.value / PI)
}

fn gap_seeds(p: &ModelParams) -> Vec<f64> {
    gap_scan(p, DEFAULT_K_RESOLUTION)
        .map(|s| s.minima.iter().map(|m| m.k).collect())
        .unwrap_or_default()
}

/// `G_x` by adaptive quadrature, with the partition seeded at the gap
/// minima found by [`gap_scan`].
pub fn g_correlator(x: i64, p: &ModelParams, q: &QuadratureConfig) -> Result<f64> {
    q.validate()?;
    if x.abs() > MAX_SEPARATION {
        return Err(Error::InvalidParameter(format!(
            "|x| must be <= {MAX_SEPARATION}, got {x}"
        )));
    }
    quadrature_g(x, p, q, &gap_seeds(p))
}

/// Trapezoidal estimates of every `G_x` from `n` samples of
/// `h(k) = −(ε₁ + iε₂)/E` on the periodic grid, via one inverse FFT.
fn trapezoid_all(p: &ModelParams, n: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = (0..n)
        .map(|m| {
            let k = 2.0 * PI * m as f64 / n as f64;
            let s = band_energy(k, p);
            if s.energy == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(-s.eps1, -s.eps2) / s.energy
            }
        })
        .collect();
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

fn wrap(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

/// Cached `G_x` for `|x| ≤ x_max + 1` at fixed parameters.
///
/// The extra entry on each side covers the index shifts of the Toeplitz
/// matrices for `P_xx` and `P_yy` at `d = x_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatorTable {
    params: ModelParams,
    x_max: usize,
    quadrature: QuadratureConfig,
    values: Vec<f64>,
    refined: usize,
}

impl CorrelatorTable {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn x_max(&self) -> usize {
        self.x_max
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quadrature
    }

    /// Number of entries that needed adaptive quadrature after the FFT pass.
    pub fn refined_entries(&self) -> usize {
        self.refined
    }

    /// Largest `|x|` stored.
    pub fn reach(&self) -> i64 {
        self.x_max as i64 + 1
    }

    pub fn get(&self, x: i64) -> Option<f64> {
        if x.abs() > self.reach() {
            return None;
        }
        Some(self.values[(x + self.reach()) as usize])
    }

    /// `G_x`; panics when `|x| > x_max + 1`.
    pub fn g(&self, x: i64) -> f64 {
        self.get(x)
            .unwrap_or_else(|| panic!("G_{x} outside table reach {}", self.reach()))
    }

    /// Entries from `-(x_max + 1)` to `x_max + 1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn from_parts(
        params: ModelParams,
        x_max: usize,
        quadrature: QuadratureConfig,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), 2 * x_max + 3);
        CorrelatorTable {
            params,
            x_max,
            quadrature,
            values,
            refined: 0,
        }
    }
}

/// Builds a [`CorrelatorTable`].
///
/// An FFT pre-pass evaluates the trapezoidal rule on `grid_size` and
/// `grid_size / 2` points; for periodic analytic integrands the finer rule is
/// exponentially more accurate, so their difference bounds its error. Entries
/// where that difference exceeds `abs_tol` (near-critical parameters, or
/// separations approaching the grid's aliasing range) are recomputed with
/// adaptive quadrature. Each entry depends only on `(p, x, q)`, not on
/// `x_max`.
pub fn correlator_table(
    p: &ModelParams,
    x_max: usize,
    q: &QuadratureConfig,
) -> Result<CorrelatorTable> {
    q.validate()?;
    if x_max < 1 {
        return Err(Error::InvalidParameter("x_max must be >= 1".into()));
    }
    if x_max as i64 >= MAX_SEPARATION {
        return Err(Error::InvalidParameter(format!(
            "x_max must be < {MAX_SEPARATION}"
        )));
    }
    let reach = x_max as i64 + 1;
    let n = q.grid_size;
    let mut planner = FftPlanner::new();
    let fine = trapezoid_all(p, n, &mut planner);
    let coarse = trapezoid_all(p, n / 2, &mut planner);
    // Beyond a quarter of the coarse grid the aliasing images are too close.
    let fft_reach = (n / 8) as i64;

    let mut seeds: Option<Vec<f64>> = None;
    let mut refined = 0;
    let mut values = Vec::with_capacity(2 * reach as usize + 1);
    for x in -reach..=reach {
        let f = fine[wrap(x, n)].re;
        let c = coarse[wrap(x, n / 2)].re;
        if x.abs() <= fft_reach && (f - c).abs() <= q.abs_tol {
            values.push(f);
        } else {
            let seeds = seeds.get_or_insert_with(|| gap_seeds(p));
            values.push(quadrature_g(x, p, q, seeds)?);
            refined += 1;
        }
    }
    Ok(CorrelatorTable {
        params: *p,
        x_max,
        quadrature: *q,
        values,
        refined,
    })
}

/// Two-site spin correlators at separation `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PCoefficients {
    pub d: usize,
    pub p00: f64,
    pub pzz: f64,
    pub pz0: f64,
    pub pxx: f64,
    pub pyy: f64,
}

/// `d × d` Toeplitz matrix with entries `G_{i−j+shift}`.
fn toeplitz(tbl: &CorrelatorTable, d: usize, shift: i64) -> Square<f64> {
    Square::from_fn(d, |i, j| tbl.g(i as i64 - j as i64 + shift))
}

pub fn p_coefficients(d: usize, tbl: &CorrelatorTable) -> Result<PCoefficients> {
    if d < 1 || d > tbl.x_max {
        return Err(Error::OutOfRange {
            d,
            max: tbl.x_max,
        });
    }
    let di = d as i64;
    let g0 = tbl.g(0);
    Ok(PCoefficients {
        d,
        p00: 1.0,
        pzz: g0 * g0 - tbl.g(di) * tbl.g(-di),
        pz0: -g0,
        pxx: lu_determinant(toeplitz(tbl, d, -1)),
        pyy: lu_determinant(toeplitz(tbl, d, 1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(mu: f64, delta: f64, alpha: f64, beta: f64) -> ModelParams {
        ModelParams::unit_hopping(mu, delta, alpha, beta).unwrap()
    }

    #[test]
    fn product_state_limit() {
        let p = params(100.0, 0.0, 1.0, 1.0);
        let q = QuadratureConfig::default();
        assert!((g_correlator(0, &p, &q).unwrap() + 1.0).abs() < 1e-10);
        assert!(g_correlator(3, &p, &q).unwrap().abs() < 1e-10);
        let tbl = correlator_table(&p, 12, &q).unwrap();
        for x in -13..=13 {
            let expect = if x == 0 { -1.0 } else { 0.0 };
            assert!((tbl.g(x) - expect).abs() < 1e-10, "x = {x}");
        }
        for d in 1..=12 {
            let c = p_coefficients(d, &tbl).unwrap();
            assert!((c.pzz - 1.0).abs() < 1e-10);
            assert!((c.pz0 - 1.0).abs() < 1e-10);
            assert!(c.pxx.abs() < 1e-9 && c.pyy.abs() < 1e-9);
        }
    }

    #[test]
    fn d1_reduces_to_single_entries() {
        let p = params(-1.0, 0.8, 0.6, 0.9);
        let tbl = correlator_table(&p, 4, &QuadratureConfig::default()).unwrap();
        let c = p_coefficients(1, &tbl).unwrap();
        assert_eq!(c.pxx, tbl.g(-1));
        assert_eq!(c.pyy, tbl.g(1));
        assert_eq!(c.p00, 1.0);
    }

    #[test]
    fn out_of_range_separation() {
        let p = params(-1.0, 0.8, 0.6, 0.9);
        let tbl = correlator_table(&p, 4, &QuadratureConfig::default()).unwrap();
        assert!(matches!(p_coefficients(0, &tbl), Err(Error::OutOfRange { .. })));
        assert!(matches!(p_coefficients(5, &tbl), Err(Error::OutOfRange { .. })));
        assert!(tbl.get(6).is_none());
        assert!(tbl.get(5).is_some());
    }

    #[test]
    fn rejects_bad_config() {
        let p = params(-1.0, 0.8, 0.6, 0.9);
        let bad = QuadratureConfig {
            grid_size: 1000,
            ..Default::default()
        };
        assert!(correlator_table(&p, 4, &bad).is_err());
        let bad = QuadratureConfig::default().with_abs_tol(0.0);
        assert!(g_correlator(1, &p, &bad).is_err());
        assert!(g_correlator(MAX_SEPARATION + 1, &p, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn fft_prepass_agrees_with_direct_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = QuadratureConfig::default();
        let mut checked = 0;
        while checked < 100 {
            let p = params(
                rng.gen_range(-30.0..30.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.01..3.0),
                rng.gen_range(0.01..3.0),
            );
            if crate::model::global_gap(&p, 4096).unwrap() < 1e-3 {
                continue;
            }
            let x = rng.gen_range(-60..=60);
            let tbl = correlator_table(&p, 60, &q).unwrap();
            let direct = g_correlator(x, &p, &q).unwrap();
            assert!(
                (tbl.g(x) - direct).abs() < 1e-9,
                "{p:?} x = {x}: {} vs {direct}",
                tbl.g(x)
            );
            checked += 1;
        }
    }

    #[test]
    fn halving_tolerance_is_stable() {
        let p = params(-3.0, 1.3, 0.05, 0.05);
        let q = QuadratureConfig::default().with_abs_tol(1e-8);
        let q2 = q.with_abs_tol(5e-9);
        for x in [-7, 0, 1, 13, 40] {
            let a = g_correlator(x, &p, &q).unwrap();
            let b = g_correlator(x, &p, &q2).unwrap();
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn table_slicing_is_bit_identical() {
        let p = params(4.0, -1.0, 0.3, 0.2);
        let q = QuadratureConfig::default();
        let small = correlator_table(&p, 9, &q).unwrap();
        let big = correlator_table(&p, 10, &q).unwrap();
        for d in 1..=9 {
            assert_eq!(
                p_coefficients(d, &small).unwrap(),
                p_coefficients(d, &big).unwrap()
            );
        }
    }

    #[test]
    fn gapped_correlator_decays_exponentially() {
        let p = params(-3.0, 1.0, 1.0, 1.0);
        let tbl = correlator_table(&p, 30, &QuadratureConfig::default()).unwrap();
        let (xs, ys): (Vec<f64>, Vec<f64>) = (2..=25)
            .map(|x| (x as f64, tbl.g(x).abs().ln()))
            .unzip();
        let fit = crate::fit::fit_line(&xs, &ys).unwrap();
        assert!(fit.slope < 0.0);
        assert!(fit.r_squared > 0.95, "{fit:?}");
    }

    #[test]
    fn near_critical_entries_fall_back_to_quadrature() {
        let a_star = crate::model::critical_alphas(-23.23722, 1.0).unwrap()[0].alpha_star;
        let p = params(-23.23722, 1.3, a_star + 1e-4, 0.027);
        let q = QuadratureConfig::default();
        let tbl = correlator_table(&p, 8, &q).unwrap();
        assert!(tbl.refined_entries() > 0);
        for x in [-3, 0, 2, 9] {
            let direct = g_correlator(x, &p, &q).unwrap();
            assert!((tbl.g(x) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn p_coefficient_bounds_over_grid() {
        let q = QuadratureConfig::default();
        for i in 0..20 {
            for j in 0..20 {
                let mu = -30.0 + 40.0 * i as f64 / 19.0;
                let alpha = 0.02 + 1.5 * j as f64 / 19.0;
                let p = params(mu, 1.3, alpha, alpha);
                let tbl = correlator_table(&p, 6, &q).unwrap();
                for &v in tbl.values() {
                    assert!(v.abs() <= 1.0 + 1e-12);
                }
                for d in [1, 3, 6] {
                    let c = p_coefficients(d, &tbl).unwrap();
                    for v in [c.pzz, c.pz0, c.pxx, c.pyy] {
                        assert!(v.abs() <= 1.0 + 1e-9, "{p:?} {c:?}");
                    }
                }
            }
        }
    }
}
