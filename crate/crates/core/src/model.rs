//! Hamiltonian parameters, momentum-space dispersion, global gap and the
//! analytic phase boundaries.
//!
//! The chain has hopping `t(d) = t·exp(-α|d| + α)` and pairing
//! `Δ(d) = Δ·exp(-β|d| + β)`, so both equal their bare values at `|d| = 1`.
//! Summing the geometric series gives the closed-form Bogoliubov–de Gennes
//! blocks
//!
//! ```text
//! ε₁(k) = μ + t·e^α (sinh α − cosh α + cos k) / (cosh α − cos k)
//! ε₂(k) = Δ·e^β sin k / (cosh β − cos k)
//! E(k)  = √(ε₁² + ε₂²)
//! ```
//!
//! Both are evaluated in a rescaled form that stays accurate for tiny decay
//! rates (where `cosh α − cos k` cancels catastrophically) and does not
//! overflow for large ones.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Gap below which a configuration is treated as gapless, in units of `|t|`.
pub const GAP_CLOSED_THRESHOLD: f64 = 1e-6;

/// Default number of grid points over `[0, π]` for the gap scanner.
pub const DEFAULT_K_RESOLUTION: usize = 4096;

/// The five couplings defining every computation.
///
/// Construction validates `α > 0`, `β > 0` and `t ≠ 0`; a value of this type
/// is therefore always usable by the dispersion formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    mu: f64,
    t: f64,
    delta: f64,
    alpha: f64,
    beta: f64,
}

impl ModelParams {
    pub fn new(mu: f64, t: f64, delta: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = ModelParams {
            mu,
            t,
            delta,
            alpha,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters in units of the hopping, `t = 1`.
    pub fn unit_hopping(mu: f64, delta: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(mu, 1.0, delta, alpha, beta)
    }

    fn validate(&self) -> Result<()> {
        let all = [self.mu, self.t, self.delta, self.alpha, self.beta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "all couplings must be finite, got {self:?}"
            )));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "hopping decay rate alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "pairing decay rate beta must be > 0, got {}",
                self.beta
            )));
        }
        if self.t == 0.0 {
            return Err(Error::InvalidParameter("hopping t must be non-zero".into()));
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        Self::new(mu, self.t, self.delta, self.alpha, self.beta)
    }
    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::new(self.mu, self.t, delta, self.alpha, self.beta)
    }
    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.mu, self.t, self.delta, alpha, self.beta)
    }
    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.mu, self.t, self.delta, self.alpha, beta)
    }

    /// Hopping amplitude `t(d)` between sites `d` apart (`d ≠ 0`).
    pub fn hopping(&self, d: i64) -> f64 {
        let d = d.unsigned_abs() as f64;
        self.t * (-self.alpha * (d - 1.0)).exp()
    }

    /// Pairing magnitude `Δ(d)` between sites `d` apart (`d ≠ 0`). The
    /// pairing term itself is odd in `d`; see [`crate::oracle`].
    pub fn pairing(&self, d: i64) -> f64 {
        let d = d.unsigned_abs() as f64;
        self.delta * (-self.beta * (d - 1.0)).exp()
    }
}

/// `e^{-r}·(cosh r − cos k)`, written without cancellation.
fn scaled_denominator(rate: f64, half_sin_sq: f64) -> f64 {
    let one_minus = -(-rate).exp_m1();
    0.5 * one_minus * one_minus + 2.0 * (-rate).exp() * half_sin_sq
}

/// Diagonal block `ε₁(k)`; even in `k`.
pub fn epsilon1(k: f64, p: &ModelParams) -> f64 {
    let s = (0.5 * k).sin();
    let half_sin_sq = s * s;
    // e^{-α}·e^α(sinh α − cosh α + cos k) = (1 − e^{-α}) − 2 sin²(k/2)
    let num = -(-p.alpha).exp_m1() - 2.0 * half_sin_sq;
    p.mu + p.t * num / scaled_denominator(p.alpha, half_sin_sq)
}

/// Off-diagonal block `ε₂(k)`; odd in `k` and zero at `k ∈ {0, π}`.
pub fn epsilon2(k: f64, p: &ModelParams) -> f64 {
    let s = (0.5 * k).sin();
    p.delta * k.sin() / scaled_denominator(p.beta, s * s)
}

/// One sample of the positive quasiparticle branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionSample {
    pub k: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub energy: f64,
}

pub fn band_energy(k: f64, p: &ModelParams) -> DispersionSample {
    let eps1 = epsilon1(k, p);
    let eps2 = epsilon2(k, p);
    DispersionSample {
        k,
        eps1,
        eps2,
        energy: eps1.hypot(eps2),
    }
}

/// A refined local minimum of `E(k)` on `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapMinimum {
    pub k: f64,
    pub energy: f64,
}

/// Result of the global gap scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapScan {
    /// `E_g = min_k 2E(k)`.
    pub gap: f64,
    /// Up to three lowest local minima, ascending in energy.
    pub minima: Vec<GapMinimum>,
}

impl GapScan {
    /// Momentum of the global minimum.
    pub fn argmin(&self) -> f64 {
        self.minima[0].k
    }

    /// Minima at interior momenta where the gap closes. Closings at `k = 0`
    /// or `k = π` are the ones predicted by [`phase_boundary`]; anything else
    /// is reported here rather than assumed away.
    pub fn interior_closings(&self, t: f64) -> Vec<f64> {
        const EDGE: f64 = 1e-6;
        self.minima
            .iter()
            .filter(|m| 2.0 * m.energy < GAP_CLOSED_THRESHOLD * t.abs())
            .filter(|m| m.k > EDGE && m.k < PI - EDGE)
            .map(|m| m.k)
            .collect()
    }
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    // Minima sitting on an end of the bracket (k = 0, π) are common.
    [lo, mid, hi]
        .into_iter()
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap()
}

/// Dense-grid scan of `E(k)` over `[0, π]` with golden-section refinement
/// around the three lowest grid minima (tolerance 1e-9 in `k`).
pub fn gap_scan(p: &ModelParams, k_resolution: usize) -> Result<GapScan> {
    if k_resolution < 64 {
        return Err(Error::InvalidParameter(format!(
            "k_resolution must be >= 64, got {k_resolution}"
        )));
    }
    let n = k_resolution;
    let h = PI / (n - 1) as f64;
    let energies: Vec<f64> = (0..n)
        .map(|i| band_energy(i as f64 * h, p).energy)
        .collect();

    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || energies[i] <= energies[i - 1];
            let right = i == n - 1 || energies[i] <= energies[i + 1];
            left && right
        })
        .collect();
    candidates.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    candidates.truncate(3);

    let energy = |k: f64| band_energy(k, p).energy;
    let mut minima: Vec<GapMinimum> = candidates
        .into_iter()
        .map(|i| {
            let lo = if i == 0 { 0.0 } else { (i - 1) as f64 * h };
            let hi = if i == n - 1 { PI } else { (i + 1) as f64 * h };
            let k = golden_section_min(energy, lo, hi, 1e-9);
            GapMinimum { k, energy: energy(k) }
        })
        .collect();
    minima.sort_by(|a, b| a.energy.total_cmp(&b.energy));

    Ok(GapScan {
        gap: 2.0 * minima[0].energy,
        minima,
    })
}

/// `E_g = min_{k ∈ [−π, π]} 2E(k)`.
pub fn global_gap(p: &ModelParams, k_resolution: usize) -> Result<f64> {
    Ok(gap_scan(p, k_resolution)?.gap)
}

/// Which sign of `2t ± μ` in `α* = ln(μ / (2t ± μ))` a boundary comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `α* = ln(μ / (2t + μ))`: `ε₁(0) = 0`, the gap closes at `k = 0`.
    Plus,
    /// `α* = ln(μ / (2t − μ))`: `ε₁(π) = 0`, the gap closes at `k = π`.
    Minus,
}

impl Branch {
    pub fn closing_momentum(self) -> f64 {
        match self {
            Branch::Plus => 0.0,
            Branch::Minus => PI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "2t+mu",
            Branch::Minus => "2t-mu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseBoundary {
    pub alpha_star: f64,
    pub branch: Branch,
    pub closing_momentum: f64,
}

/// Critical hopping decay rates at the given `μ` and `t`. Independent of `β`
/// and `Δ` because `ε₂` vanishes at `k ∈ {0, π}`. Returns an empty list when
/// no real `α* > 0` exists.
pub fn phase_boundary(p: &ModelParams) -> Result<Vec<PhaseBoundary>> {
    critical_alphas(p.mu, p.t)
}

/// [`phase_boundary`] without needing a full parameter set.
pub fn critical_alphas(mu: f64, t: f64) -> Result<Vec<PhaseBoundary>> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "phase boundaries need t > 0, got {t}"
        )));
    }
    let mut out = Vec::with_capacity(2);
    for branch in [Branch::Plus, Branch::Minus] {
        let denom = match branch {
            Branch::Plus => 2.0 * t + mu,
            Branch::Minus => 2.0 * t - mu,
        };
        let arg = mu / denom;
        if arg.is_finite() && arg > 1.0 {
            out.push(PhaseBoundary {
                alpha_star: arg.ln(),
                branch,
                closing_momentum: branch.closing_momentum(),
            });
        }
    }
    Ok(out)
}

/// The same boundaries solved for `μ` at fixed `α`: `ε₁(0) = 0` at
/// `μ = −2t/(1 − e^{-α})` and `ε₁(π) = 0` at `μ = 2t/(1 + e^{-α})`.
pub fn critical_mus(alpha: f64, t: f64) -> Result<[(f64, Branch); 2]> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let r = (-alpha).exp();
    Ok([
        (-2.0 * t / (1.0 - r), Branch::Plus),
        (2.0 * t / (1.0 + r), Branch::Minus),
    ])
}
