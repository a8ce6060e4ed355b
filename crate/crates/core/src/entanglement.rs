//! Two-site reduced density matrices, concurrence and tangle, truncation
//! lengths, total entanglement and the monogamy relations.
//!
//! Translation invariance reduces `ρ_d` to an X-state
//!
//! ```text
//!         ⎡ a  0  0  f ⎤
//! ρ_d = ¼ ⎢ 0  b  e  0 ⎥     a = 1 + 2P_z0 + P_zz,  ρ_dd = 1 − 2P_z0 + P_zz,
//!         ⎢ 0  e  b  0 ⎥     b = 1 − P_zz,  e = P_xx + P_yy,  f = P_xx − P_yy
//!         ⎣ f  0  0 ρ_dd⎦
//! ```
//!
//! whose concurrence is `max{0, ½(|f| − b), ½(|e| − √(a·ρ_dd))}`; the ¼ of
//! the matrix is already folded into the halves.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::correlators::{correlator_table, p_coefficients, CorrelatorTable, PCoefficients};
use crate::correlators::QuadratureConfig;
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::model::{global_gap, ModelParams, DEFAULT_K_RESOLUTION};

/// Tolerance for positivity violations that are clamped rather than reported.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// `C_d` above this counts towards the support truncation length `ξ_cut`.
pub const XI_CUT_THRESHOLD: f64 = 1e-8;
/// `C_d` above this enters the exponential fit for `ξ_fit`.
pub const XI_FIT_THRESHOLD: f64 = 1e-10;
/// A profile is converged when its last concurrence is below this.
pub const CONVERGED_THRESHOLD: f64 = 1e-12;
/// Profiles whose global gap is below this are flagged as near-critical.
pub const NEAR_CRITICAL_GAP: f64 = 1e-4;

/// Which term of the concurrence formula is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConcurrenceBranch {
    /// Both terms are negative; the state is separable.
    Zero,
    /// `½(|f| − b)`, coherence between `|00⟩` and `|11⟩`.
    Pairing,
    /// `½(|e| − √(a·ρ_dd))`, coherence between `|01⟩` and `|10⟩`.
    Exchange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoSiteState {
    pub d: usize,
    pub a: f64,
    pub b: f64,
    pub rho_dd: f64,
    pub e: f64,
    pub f: f64,
}

impl TwoSiteState {
    /// Validates positivity, clamping violations up to [`POSITIVITY_TOL`].
    pub fn new(d: usize, a: f64, b: f64, rho_dd: f64, e: f64, f: f64) -> Result<Self> {
        let bad = |reason: String| Err(Error::NonPhysicalState { d, reason });
        if ![a, b, rho_dd, e, f].iter().all(|v| v.is_finite()) {
            return bad("non-finite coefficient".into());
        }
        let clamp_non_negative = |name: &str, v: f64| -> Result<f64> {
            if v < -POSITIVITY_TOL {
                Err(Error::NonPhysicalState {
                    d,
                    reason: format!("{name} = {v:e} < 0"),
                })
            } else {
                Ok(v.max(0.0))
            }
        };
        let a = clamp_non_negative("a", a)?;
        let b = clamp_non_negative("b", b)?;
        let rho_dd = clamp_non_negative("rho_dd", rho_dd)?;

        let e = if e.abs() > b {
            if e.abs() > b + POSITIVITY_TOL {
                return bad(format!("|e| = {:e} exceeds b = {b:e}", e.abs()));
            }
            b.copysign(e)
        } else {
            e
        };
        let bound = (a * rho_dd).sqrt();
        let f = if f.abs() > bound {
            if f.abs() > bound + POSITIVITY_TOL {
                return bad(format!("|f| = {:e} exceeds sqrt(a*rho_dd) = {bound:e}", f.abs()));
            }
            bound.copysign(f)
        } else {
            f
        };
        Ok(TwoSiteState {
            d,
            a,
            b,
            rho_dd,
            e,
            f,
        })
    }

    pub fn from_coefficients(c: &PCoefficients) -> Result<Self> {
        Self::new(
            c.d,
            c.p00 + 2.0 * c.pz0 + c.pzz,
            c.p00 - c.pzz,
            c.p00 - 2.0 * c.pz0 + c.pzz,
            c.pxx + c.pyy,
            c.pxx - c.pyy,
        )
    }

    pub fn trace(&self) -> f64 {
        (self.a + 2.0 * self.b + self.rho_dd) / 4.0
    }

    /// The full 4×4 matrix in the basis `|00⟩, |01⟩, |10⟩, |11⟩`, where `0`
    /// is an empty site.
    pub fn density_matrix(&self) -> Matrix4<Complex64> {
        let c = |v: f64| Complex64::new(v / 4.0, 0.0);
        let z = Complex64::default();
        Matrix4::new(
            c(self.a), z, z, c(self.f),
            z, c(self.b), c(self.e), z,
            z, c(self.e), c(self.b), z,
            c(self.f), z, z, c(self.rho_dd),
        )
    }
}

pub fn two_site_state(d: usize, tbl: &CorrelatorTable) -> Result<TwoSiteState> {
    TwoSiteState::from_coefficients(&p_coefficients(d, tbl)?)
}

/// Concurrence together with the active branch of the formula.
pub fn concurrence_with_branch(s: &TwoSiteState) -> (f64, ConcurrenceBranch) {
    let pairing = 0.5 * (s.f.abs() - s.b);
    let exchange = 0.5 * (s.e.abs() - (s.a * s.rho_dd).max(0.0).sqrt());
    if pairing <= 0.0 && exchange <= 0.0 {
        (0.0, ConcurrenceBranch::Zero)
    } else if pairing >= exchange {
        (pairing, ConcurrenceBranch::Pairing)
    } else {
        (exchange, ConcurrenceBranch::Exchange)
    }
}

pub fn concurrence(s: &TwoSiteState) -> f64 {
    concurrence_with_branch(s).0
}

/// General two-qubit concurrence `max{0, λ₁ − λ₂ − λ₃ − λ₄}`, with `λᵢ` the
/// decreasing square roots of the eigenvalues of `ρ (σʸ⊗σʸ) ρ* (σʸ⊗σʸ)`.
///
/// The `λᵢ` are obtained as singular values of `√ρ (σʸ⊗σʸ) √ρ*`, which avoids
/// taking square roots of tiny eigenvalues.
pub fn wootters_concurrence(rho: &Matrix4<Complex64>) -> Result<f64> {
    let tol = POSITIVITY_TOL;
    let non_physical = |reason: String| Err(Error::NonPhysicalState { d: 0, reason });
    let herm_err = (rho - rho.adjoint()).camax();
    if herm_err > tol {
        return non_physical(format!("not Hermitian (deviation {herm_err:e})"));
    }
    let trace = rho.trace();
    if (trace - Complex64::new(1.0, 0.0)).norm() > tol {
        return non_physical(format!("trace {trace} != 1"));
    }
    let hermitian = (rho + rho.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(hermitian);
    let min_ev = eig.eigenvalues.min();
    if min_ev < -tol {
        return non_physical(format!("negative eigenvalue {min_ev:e}"));
    }
    let sqrt_diag = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    let sqrt_rho = v * Matrix4::from_diagonal(&sqrt_diag) * v.adjoint();

    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::default();
    let yy = Matrix4::new(
        z, z, z, -one,
        z, z, one, z,
        z, one, z, z,
        -one, z, z, z,
    );
    let m = sqrt_rho * yy * sqrt_rho.conjugate();
    let mut lambda: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

/// Least-squares fit of `ln C_d = intercept − d/ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialFit {
    pub xi: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub d_lo: usize,
    pub d_hi: usize,
    pub points: usize,
}

fn exponential_fit(c_d: &[f64], d_hi: usize) -> Option<ExponentialFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = c_d
        .iter()
        .enumerate()
        .take(d_hi)
        .filter(|(_, &c)| c > XI_FIT_THRESHOLD)
        .map(|(i, &c)| ((i + 1) as f64, c.ln()))
        .unzip();
    if xs.len() < 3 {
        return None;
    }
    let fit = fit_line(&xs, &ys).ok()?;
    if !(fit.slope < 0.0) {
        return None;
    }
    Some(ExponentialFit {
        xi: -1.0 / fit.slope,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        d_lo: xs[0] as usize,
        d_hi: *xs.last().unwrap() as usize,
        points: xs.len(),
    })
}

/// Controls how far a profile is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileOptions {
    pub d_max: usize,
    /// Stop once `C_d` has been exactly zero for every `d` from the last
    /// non-zero distance `d₀` up to `2·d₀ + 16`.
    pub early_stop: bool,
}

impl ProfileOptions {
    pub fn new(d_max: usize) -> Self {
        ProfileOptions {
            d_max,
            early_stop: true,
        }
    }

    pub fn exhaustive(d_max: usize) -> Self {
        ProfileOptions {
            d_max,
            early_stop: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementProfile {
    pub params: ModelParams,
    pub d_max: usize,
    /// `C_d` for `d = 1..=c_d.len()`; distances not evaluated after an early
    /// stop are exactly zero.
    pub c_d: Vec<f64>,
    pub tau_d: Vec<f64>,
    pub branches: Vec<ConcurrenceBranch>,
    /// Largest `d` with `C_d > 1e-8` (0 if none).
    pub xi_cut: usize,
    /// Decay length fitted over every `d` with `C_d > 1e-10`.
    pub xi_fit: Option<ExponentialFit>,
    /// Decay length fitted over the exponential regime before the cutoff,
    /// `d ≤ ⌈ξ_cut / 2⌉`.
    pub decay_fit: Option<ExponentialFit>,
    /// `C^N = 2 Σ_{d ≤ N} C_d` for `N = 1..=c_d.len()`.
    pub c_partial: Vec<f64>,
    pub tau_partial: Vec<f64>,
    pub c_inf: f64,
    pub tau_inf: f64,
    pub converged: bool,
    /// Estimated bound on the neglected tail of `C∞`.
    pub tail_bound: f64,
    pub gap: f64,
    /// True when `E_g < 1e-4`; quadrature is less reliable there.
    pub near_critical: bool,
}

impl EntanglementProfile {
    /// `C_d`, zero beyond the evaluated range.
    pub fn c(&self, d: usize) -> f64 {
        if d == 0 {
            return 0.0;
        }
        self.c_d.get(d - 1).copied().unwrap_or(0.0)
    }

    /// `C^N`, constant beyond the evaluated range.
    pub fn c_total(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let idx = n.min(self.c_partial.len()) - 1;
        self.c_partial[idx]
    }

    pub fn tau_total(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let idx = n.min(self.tau_partial.len()) - 1;
        self.tau_partial[idx]
    }

    /// CSV with columns `d,C_d,tau_d`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("d,C_d,tau_d\n");
        for (i, (c, t)) in self.c_d.iter().zip(&self.tau_d).enumerate() {
            s.push_str(&format!("{},{:?},{:?}\n", i + 1, c, t));
        }
        s
    }

    pub fn summary(&self) -> ProfileSummary {
        let m = check_monogamy(self);
        ProfileSummary {
            params: self.params,
            d_evaluated: self.c_d.len(),
            xi_cut: self.xi_cut,
            xi_fit: self.xi_fit.map(|f| f.xi),
            xi_fit_r_squared: self.xi_fit.map(|f| f.r_squared),
            decay_xi: self.decay_fit.map(|f| f.xi),
            decay_r_squared: self.decay_fit.map(|f| f.r_squared),
            c_1: self.c(1),
            c_inf: self.c_inf,
            tau_inf: self.tau_inf,
            converged: self.converged,
            tail_bound: self.tail_bound,
            gap: self.gap,
            near_critical: self.near_critical,
            tangle_margin: m.tangle_margin,
            concurrence_margin: m.concurrence_margin,
            monogamy_holds: m.holds,
            kbi_ratio: check_kbi_relation(self).ok().map(|k| k.r1),
        }
    }
}

/// JSON-friendly digest of a profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub params: ModelParams,
    pub d_evaluated: usize,
    pub xi_cut: usize,
    pub xi_fit: Option<f64>,
    pub xi_fit_r_squared: Option<f64>,
    pub decay_xi: Option<f64>,
    pub decay_r_squared: Option<f64>,
    pub c_1: f64,
    pub c_inf: f64,
    pub tau_inf: f64,
    pub converged: bool,
    pub tail_bound: f64,
    pub gap: f64,
    pub near_critical: bool,
    pub tangle_margin: f64,
    pub concurrence_margin: f64,
    pub monogamy_holds: bool,
    pub kbi_ratio: Option<f64>,
}

/// `C_d` for `d = 1..=d_max` plus everything derived from it.
pub fn entanglement_profile(
    p: &ModelParams,
    d_max: usize,
    q: &QuadratureConfig,
) -> Result<EntanglementProfile> {
    entanglement_profile_with(p, &ProfileOptions::new(d_max), q)
}

pub fn entanglement_profile_with(
    p: &ModelParams,
    opts: &ProfileOptions,
    q: &QuadratureConfig,
) -> Result<EntanglementProfile> {
    if opts.d_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "d_max must be >= 2, got {}",
            opts.d_max
        )));
    }
    let tbl = correlator_table(p, opts.d_max, q)?;
    profile_from_table(&tbl, opts)
}

/// Profile from an existing table; `opts.d_max` must not exceed its range.
pub fn profile_from_table(
    tbl: &CorrelatorTable,
    opts: &ProfileOptions,
) -> Result<EntanglementProfile> {
    if opts.d_max > tbl.x_max() {
        return Err(Error::OutOfRange {
            d: opts.d_max,
            max: tbl.x_max(),
        });
    }
    let mut c_d = Vec::with_capacity(opts.d_max);
    let mut branches = Vec::with_capacity(opts.d_max);
    let mut last_nonzero = 0;
    for d in 1..=opts.d_max {
        let (c, br) = concurrence_with_branch(&two_site_state(d, tbl)?);
        c_d.push(c);
        branches.push(br);
        if c > 0.0 {
            last_nonzero = d;
        }
        if opts.early_stop && d >= 2 * last_nonzero + 16 {
            break;
        }
    }
    let tau_d: Vec<f64> = c_d.iter().map(|c| c * c).collect();
    let running = |v: &[f64]| {
        v.iter()
            .scan(0.0, |acc, x| {
                *acc += 2.0 * x;
                Some(*acc)
            })
            .collect::<Vec<f64>>()
    };
    let c_partial = running(&c_d);
    let tau_partial = running(&tau_d);

    let xi_cut = c_d
        .iter()
        .rposition(|&c| c > XI_CUT_THRESHOLD)
        .map_or(0, |i| i + 1);
    let xi_fit = exponential_fit(&c_d, c_d.len());
    let decay_fit = exponential_fit(&c_d, xi_cut.div_ceil(2));

    let last = *c_d.last().unwrap();
    let converged = last < CONVERGED_THRESHOLD;
    let tail_bound = if last == 0.0 {
        0.0
    } else {
        // Geometric tail 2 Σ_{d > D} C_D r^{d−D}.
        let r = xi_fit.map_or(1.0, |f| (-1.0 / f.xi).exp());
        if r < 1.0 {
            2.0 * last * r / (1.0 - r)
        } else {
            f64::INFINITY
        }
    };
    let gap = global_gap(tbl.params(), DEFAULT_K_RESOLUTION)?;

    Ok(EntanglementProfile {
        params: *tbl.params(),
        d_max: opts.d_max,
        c_inf: *c_partial.last().unwrap(),
        tau_inf: *tau_partial.last().unwrap(),
        c_d,
        tau_d,
        branches,
        xi_cut,
        xi_fit,
        decay_fit,
        c_partial,
        tau_partial,
        converged,
        tail_bound,
        gap,
        near_critical: gap < NEAR_CRITICAL_GAP,
    })
}

/// Margins of the two monogamy bounds over every partial sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonogamyReport {
    /// `min_N (1 − τ^N)`.
    pub tangle_margin: f64,
    /// `min_{N ≥ 2} (√(N − 1) − C^N)`.
    pub concurrence_margin: f64,
    pub holds: bool,
    pub violations: Vec<String>,
}

/// Checks `τ^N ≤ 1` and `C^N ≤ √(N − 1)` for every partial sum. Both are
/// theorems, so a violation points at a numerical failure upstream.
pub fn check_monogamy(profile: &EntanglementProfile) -> MonogamyReport {
    check_partial_sums(&profile.c_partial, &profile.tau_partial)
}

pub fn check_partial_sums(c_partial: &[f64], tau_partial: &[f64]) -> MonogamyReport {
    let mut violations = Vec::new();
    let mut tangle_margin = f64::INFINITY;
    let mut concurrence_margin = f64::INFINITY;
    for (i, (&c, &tau)) in c_partial.iter().zip(tau_partial).enumerate() {
        let n = i + 1;
        let tm = 1.0 - tau;
        tangle_margin = tangle_margin.min(tm);
        if tm < 0.0 {
            violations.push(format!("tau^{n} = {tau} > 1"));
        }
        if n >= 2 {
            let cm = ((n - 1) as f64).sqrt() - c;
            concurrence_margin = concurrence_margin.min(cm);
            if cm < 0.0 {
                violations.push(format!("C^{n} = {c} > sqrt({})", n - 1));
            }
        }
    }
    MonogamyReport {
        tangle_margin,
        concurrence_margin,
        holds: violations.is_empty(),
        violations,
    }
}

/// Lower edge of the accepted band for `C∞ / (2 ξ τ∞)`.
pub const KBI_RATIO_MIN: f64 = 0.5;
/// Upper edge of the accepted band for `C∞ / (2 ξ τ∞)`.
pub const KBI_RATIO_MAX: f64 = 2.0;
/// Smallest `ξ_fit` for which the relation is tested.
pub const KBI_MIN_XI: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KbiReport {
    pub xi: f64,
    /// `C∞ / (2 ξ τ∞)`.
    pub r1: f64,
    /// `τ∞ · ξ`.
    pub r2: f64,
    /// `C₁ · ξ`; for a pure exponential `r1 ≈ 1 / (C₁ ξ)`.
    pub c1_xi: f64,
    pub within_band: bool,
}

/// Tests `C∞ ≈ 2 ξ τ∞` using `ξ_fit`.
pub fn check_kbi_relation(profile: &EntanglementProfile) -> Result<KbiReport> {
    let xi = match profile.xi_fit {
        Some(f) if f.xi >= KBI_MIN_XI => f.xi,
        other => {
            return Err(Error::OutsideRegime(format!(
                "xi_fit = {:?} < {KBI_MIN_XI}",
                other.map(|f| f.xi)
            )))
        }
    };
    Ok(kbi_report(profile.c_inf, profile.tau_inf, profile.c(1), xi))
}

pub fn kbi_report(c_inf: f64, tau_inf: f64, c1: f64, xi: f64) -> KbiReport {
    let r1 = c_inf / (2.0 * xi * tau_inf);
    KbiReport {
        xi,
        r1,
        r2: tau_inf * xi,
        c1_xi: c1 * xi,
        within_band: (KBI_RATIO_MIN..=KBI_RATIO_MAX).contains(&r1),
    }
}

/// Pairwise concurrence in the fully connected (LMG) model with coupling
/// `λ < 1` and anisotropy `γ`: `(1 − √((1 − λ)/(1 − γλ))) / (N − 1)`.
pub fn lmg_reference_concurrence(lambda: f64, gamma: f64, n: usize) -> Result<f64> {
    if !(lambda < 1.0) || !(gamma * lambda < 1.0) || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "LMG reference needs lambda < 1, gamma*lambda < 1, N >= 2 (got {lambda}, {gamma}, {n})"
        )));
    }
    let root = ((1.0 - lambda) / (1.0 - gamma * lambda)).sqrt();
    Ok((1.0 - root) / (n - 1) as f64)
}

/// Totals `(C^N, τ^N)` of the LMG reference: every one of the `N − 1`
/// partners carries the same concurrence.
pub fn lmg_totals(lambda: f64, gamma: f64, n: usize) -> Result<(f64, f64)> {
    let c = lmg_reference_concurrence(lambda, gamma, n)?;
    let partners = (n - 1) as f64;
    Ok((partners * c, partners * c * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(mu: f64, delta: f64, alpha: f64, beta: f64) -> ModelParams {
        ModelParams::unit_hopping(mu, delta, alpha, beta).unwrap()
    }

    /// Random physical X-state with real coherences.
    pub(crate) fn random_x_state(rng: &mut impl Rng) -> TwoSiteState {
        let w: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
        let s = w.iter().sum::<f64>();
        let (a, b, dd) = (4.0 * w[0] / s, 2.0 * w[1] / s, 4.0 * w[2] / s);
        let e = b * rng.gen_range(-1.0..1.0);
        let f = (a * dd).sqrt() * rng.gen_range(-1.0..1.0);
        TwoSiteState::new(1, a, b, dd, e, f).unwrap()
    }

    #[test]
    fn product_state_has_no_entanglement() {
        let s = TwoSiteState::new(1, 4.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(concurrence(&s), 0.0);
        assert_eq!(wootters_concurrence(&s.density_matrix()).unwrap(), 0.0);
    }

    #[test]
    fn bell_state_in_exchange_block() {
        let s = TwoSiteState::new(1, 0.0, 2.0, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(concurrence_with_branch(&s), (1.0, ConcurrenceBranch::Exchange));
        assert!((wootters_concurrence(&s.density_matrix()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_state_in_pairing_block() {
        let s = TwoSiteState::new(1, 2.0, 0.0, 2.0, 0.0, -2.0).unwrap();
        assert_eq!(concurrence_with_branch(&s), (1.0, ConcurrenceBranch::Pairing));
    }

    #[test]
    fn maximally_mixed_state() {
        let s = TwoSiteState::new(1, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(concurrence(&s), 0.0);
        assert!(wootters_concurrence(&s.density_matrix()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn clamps_small_violations_rejects_large() {
        let s = TwoSiteState::new(1, 4.0 + 1e-10, -5e-10, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(s.b, 0.0);
        assert!(TwoSiteState::new(1, 4.0, 1.0, 0.0, 1.0 + 1e-6, 0.0).is_err());
        assert!(TwoSiteState::new(1, 1.0, 1.0, 1.0, 0.0, 1.0 + 1e-6).is_err());
        assert!(TwoSiteState::new(1, -1e-3, 1.0, 1.0, 0.0, 0.0).is_err());
        let s = TwoSiteState::new(1, 1.0, 1.0, 1.0, 1.0 + 1e-10, 0.0).unwrap();
        assert_eq!(s.e, 1.0);
    }

    #[test]
    fn wootters_rejects_non_physical_input() {
        let mut m = TwoSiteState::new(1, 1.0, 1.0, 1.0, 0.0, 0.0)
            .unwrap()
            .density_matrix();
        m[(0, 0)] += Complex64::new(0.1, 0.0);
        assert!(wootters_concurrence(&m).is_err());
        let mut m = TwoSiteState::new(1, 1.0, 1.0, 1.0, 0.0, 0.0)
            .unwrap()
            .density_matrix();
        m[(0, 3)] = Complex64::new(0.5, 0.0);
        m[(3, 0)] = Complex64::new(0.5, 0.0);
        assert!(wootters_concurrence(&m).is_err());
        m[(3, 0)] = Complex64::new(0.1, 0.0);
        assert!(wootters_concurrence(&m).is_err());
    }

    #[test]
    fn closed_form_matches_wootters_on_random_x_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let s = random_x_state(&mut rng);
            let w = wootters_concurrence(&s.density_matrix()).unwrap();
            assert!((concurrence(&s) - w).abs() < 1e-10, "{s:?}");
        }
    }

    #[test]
    fn trace_is_one_for_model_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = QuadratureConfig::default();
        for _ in 0..100 {
            let p = params(
                rng.gen_range(-30.0..30.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.05..3.0),
                rng.gen_range(0.05..3.0),
            );
            let tbl = correlator_table(&p, 3, &q).unwrap();
            for d in 1..=3 {
                let s = two_site_state(d, &tbl).unwrap();
                assert!((s.trace() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_limit_profile() {
        let p = params(100.0, 0.0, 1.0, 1.0);
        let tbl = correlator_table(&p, 5, &QuadratureConfig::default()).unwrap();
        let s = two_site_state(2, &tbl).unwrap();
        assert!((s.a - 4.0).abs() < 1e-9);
        for v in [s.b, s.rho_dd, s.e, s.f] {
            assert!(v.abs() < 1e-9);
        }
        assert_eq!(concurrence(&s), 0.0);
    }

    #[test]
    fn short_range_limit_truncates_at_one() {
        let p = params(-1.0, 1.0, 10.0, 10.0);
        let prof = entanglement_profile(&p, 20, &QuadratureConfig::default()).unwrap();
        assert!(prof.xi_cut <= 2, "{:?}", &prof.c_d[..4]);
        assert!(prof.c(2) < 0.05 * prof.c(1));
        assert!(prof.c(3) < 1e-8);
        assert!(prof.converged);
    }

    #[test]
    fn mu_zero_keeps_truncation_small() {
        let p = params(0.0, -1.0, 0.015, 0.015);
        let prof = entanglement_profile(&p, 60, &QuadratureConfig::default()).unwrap();
        assert!(prof.xi_cut <= 3, "xi_cut = {}", prof.xi_cut);
    }

    #[test]
    fn partial_sums_are_monotone_and_squared() {
        let p = params(30.0, -1.0, 0.015, 0.015);
        let prof = entanglement_profile(&p, 120, &QuadratureConfig::default()).unwrap();
        for w in prof.c_partial.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for w in prof.tau_partial.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for (c, t) in prof.c_d.iter().zip(&prof.tau_d) {
            assert_eq!(c * c, *t);
        }
        assert!(check_monogamy(&prof).holds);
        assert!(prof.xi_cut >= 10);
        let decay = prof.decay_fit.unwrap();
        assert!(decay.r_squared > 0.99, "{decay:?}");
    }

    #[test]
    fn early_stop_does_not_change_totals() {
        let p = params(10.0, -1.0, 0.015, 0.015);
        let q = QuadratureConfig::default();
        let fast = entanglement_profile_with(&p, &ProfileOptions::new(100), &q).unwrap();
        let full = entanglement_profile_with(&p, &ProfileOptions::exhaustive(100), &q).unwrap();
        assert!(fast.c_d.len() < full.c_d.len());
        assert_eq!(fast.c_inf, full.c_inf);
        assert_eq!(fast.tau_inf, full.tau_inf);
        assert_eq!(fast.xi_cut, full.xi_cut);
    }

    #[test]
    fn doubling_d_max_keeps_converged_total() {
        let p = params(5.0, 1.3, 0.1, 0.1);
        let q = QuadratureConfig::default();
        let a = entanglement_profile_with(&p, &ProfileOptions::exhaustive(40), &q).unwrap();
        let b = entanglement_profile_with(&p, &ProfileOptions::exhaustive(80), &q).unwrap();
        assert!(a.converged);
        assert!((a.c_inf - b.c_inf).abs() < 1e-10);
    }

    #[test]
    fn profile_rejects_tiny_d_max() {
        let p = params(5.0, 1.3, 0.1, 0.1);
        assert!(entanglement_profile(&p, 1, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn csv_layout() {
        let p = params(-1.0, 1.0, 10.0, 10.0);
        let prof = entanglement_profile(&p, 4, &QuadratureConfig::default()).unwrap();
        let csv = prof.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("d,C_d,tau_d"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "1");
        assert_eq!(first[1].parse::<f64>().unwrap(), prof.c(1));
    }

    #[test]
    fn w_state_partial_sums_respect_bound() {
        // W state on 2M + 1 sites seen from the centre: every pair has C = 2/(2M + 1),
        // and distance d collects two partners.
        for m in [16usize, 32, 64] {
            let c = 2.0 / (2 * m + 1) as f64;
            let c_partial: Vec<f64> = (1..=m).map(|k| 2.0 * k as f64 * c).collect();
            let tau_partial: Vec<f64> = (1..=m).map(|k| 2.0 * k as f64 * c * c).collect();
            let r = check_partial_sums(&c_partial, &tau_partial);
            assert!(r.holds, "{r:?}");
            let full = 2.0 * m as f64 * c * c;
            assert!((tau_partial[m - 1] - full).abs() < 1e-15 && full <= 1.0);
        }
        let r = check_partial_sums(&[0.5, 1.6], &[0.1, 1.1]);
        assert!(!r.holds);
        assert_eq!(r.violations.len(), 2);
    }

    #[test]
    fn kbi_on_exact_geometric_profile() {
        for (c1, xi) in [(0.1, 10.0), (0.02, 50.0), (0.01, 40.0)] {
            let ratio = (-1.0f64 / xi).exp();
            let c_inf = 2.0 * c1 / (1.0 / ratio - 1.0);
            let tau_inf = 2.0 * c1 * c1 / (1.0 / (ratio * ratio) - 1.0);
            let r = kbi_report(c_inf, tau_inf, c1, xi);
            let expect = ((1.0 / xi).exp() + 1.0) / (2.0 * xi * c1);
            assert!((r.r1 - expect).abs() < 1e-12);
            if (c1 * xi - 1.0).abs() < 1e-12 {
                assert!((r.r1 - 1.0).abs() < 0.06);
            }
        }
    }

    #[test]
    fn kbi_refuses_short_truncation() {
        let p = params(-1.0, 1.0, 10.0, 10.0);
        let prof = entanglement_profile(&p, 10, &QuadratureConfig::default()).unwrap();
        assert!(matches!(
            check_kbi_relation(&prof),
            Err(Error::OutsideRegime(_))
        ));
    }

    #[test]
    fn lmg_reference_values() {
        assert_eq!(lmg_reference_concurrence(0.0, 0.3, 10).unwrap(), 0.0);
        assert_eq!(lmg_reference_concurrence(0.6, 1.0, 10).unwrap(), 0.0);
        let c = lmg_reference_concurrence(0.75, 0.0, 101).unwrap();
        assert!((c - 0.005).abs() < 1e-15);
        assert!(lmg_reference_concurrence(1.0, 0.0, 10).is_err());
        assert!(lmg_reference_concurrence(0.5, 3.0, 10).is_err());
        assert!(lmg_reference_concurrence(0.5, 0.0, 1).is_err());
    }

    #[test]
    fn lmg_tangle_scales_inversely_with_n() {
        let (c_small, t_small) = lmg_totals(0.75, 0.0, 101).unwrap();
        let (c_big, t_big) = lmg_totals(0.75, 0.0, 1001).unwrap();
        assert!((c_small - c_big).abs() < 1e-12);
        assert!((t_small * 100.0 - t_big * 1000.0).abs() < 1e-12);
    }
}
