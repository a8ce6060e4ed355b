//! Block entanglement entropy of `L` contiguous sites and central-charge fits.
//!
//! The block's Majorana correlation matrix has `2 × 2` blocks
//! `[[0, G_l], [−G_{−l}, 0]]` at offset `l = i − j`. Regrouping the `A` and
//! `B` Majoranas turns it into `[[0, G], [−Gᵀ, 0]]` with the Toeplitz matrix
//! `G_ij = G_{i−j}`, whose eigenvalues are `±iν_m` for the singular values
//! `ν_m` of `G`. Each mode contributes the binary entropy of `(1 + ν_m)/2`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::correlators::CorrelatorTable;
use crate::error::{Error, Result};
use crate::fit::fit_line;

/// Spectral values above `1 + NU_TOL` indicate a broken correlator table.
pub const NU_TOL: f64 = 1e-8;
/// Relative slope change between window halves that flags curvature.
pub const CURVATURE_THRESHOLD: f64 = 0.25;

/// `ν_m`, sorted descending, for a block of `l` sites.
pub fn correlation_spectrum(l: usize, tbl: &CorrelatorTable) -> Result<Vec<f64>> {
    if l == 0 {
        return Err(Error::InvalidParameter("block size must be >= 1".into()));
    }
    if l > tbl.x_max() {
        return Err(Error::OutOfRange {
            d: l,
            max: tbl.x_max(),
        });
    }
    let g = DMatrix::from_fn(l, l, |i, j| tbl.g(i as i64 - j as i64));
    let mut nu: Vec<f64> = g.singular_values().iter().copied().collect();
    nu.sort_by(|a, b| b.total_cmp(a));
    Ok(nu)
}

fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// `Σ H₂((1 + ν)/2)` in bits; values within [`NU_TOL`] above 1 are clamped.
pub fn entropy_from_spectrum(nu: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &v in nu {
        if !(-NU_TOL..=1.0 + NU_TOL).contains(&v) {
            return Err(Error::CorrelationSpectrum { nu: v });
        }
        s += binary_entropy((1.0 + v.clamp(0.0, 1.0)) / 2.0);
    }
    Ok(s)
}

/// `S_A(L)` in bits.
pub fn block_entropy(l: usize, tbl: &CorrelatorTable) -> Result<f64> {
    entropy_from_spectrum(&correlation_spectrum(l, tbl)?)
}

/// Roughly four block sizes per octave from 1 to `l_max`, always including
/// `l_max`.
pub fn default_lengths(l_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut j = 0;
    loop {
        let l = 2f64.powf(j as f64 / 4.0).round() as usize;
        if l > l_max {
            break;
        }
        if out.last() != Some(&l) {
            out.push(l);
        }
        j += 1;
    }
    if out.last() != Some(&l_max) && l_max > 0 {
        out.push(l_max);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CentralChargeFit {
    pub c: f64,
    pub s0: f64,
    /// RMS residual of `S_A` about the fitted line, bits.
    pub residual: f64,
    pub r_squared: f64,
    /// Relative slope difference between the lower and upper half windows.
    pub curvature: f64,
    /// True when the data bend away from a straight line in `log₂ L`.
    pub curved: bool,
    pub points: usize,
}

/// Fits `S_A = (c/6) log₂ L + s₀` over the points with `L` inside `window`.
pub fn central_charge_fit(
    lengths: &[usize],
    s_a: &[f64],
    window: (usize, usize),
) -> Result<CentralChargeFit> {
    if lengths.len() != s_a.len() {
        return Err(Error::InvalidParameter(
            "lengths and entropies differ in length".into(),
        ));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = lengths
        .iter()
        .zip(s_a)
        .filter(|(&l, _)| l >= window.0 && l <= window.1)
        .map(|(&l, &s)| ((l as f64).log2(), s))
        .unzip();
    if x.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "central charge fit needs >= 4 points in [{}, {}], got {}",
            window.0,
            window.1,
            x.len()
        )));
    }
    let fit = fit_line(&x, &y)?;
    let half = x.len() / 2;
    let lower = fit_line(&x[..=half.min(x.len() - 2)], &y[..=half.min(x.len() - 2)])?;
    let upper = fit_line(&x[half..], &y[half..])?;
    let scale = lower.slope.abs().max(upper.slope.abs());
    let curvature = if scale > 0.0 {
        (lower.slope - upper.slope).abs() / scale
    } else {
        0.0
    };
    Ok(CentralChargeFit {
        c: 6.0 * fit.slope,
        s0: fit.intercept,
        residual: fit.rms_residual,
        r_squared: fit.r_squared,
        curvature,
        curved: curvature > CURVATURE_THRESHOLD,
        points: x.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyCurve {
    pub lengths: Vec<usize>,
    /// Entropies in bits.
    pub s_a: Vec<f64>,
    pub fit_window: (usize, usize),
    pub fit: Option<CentralChargeFit>,
}

impl EntropyCurve {
    pub fn c_fit(&self) -> Option<f64> {
        self.fit.map(|f| f.c)
    }

    pub fn s0_fit(&self) -> Option<f64> {
        self.fit.map(|f| f.s0)
    }

    pub fn entropy_at(&self, l: usize) -> Option<f64> {
        self.lengths.iter().position(|&x| x == l).map(|i| self.s_a[i])
    }

    /// CSV with columns `L,S_A`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("L,S_A\n");
        for (l, v) in self.lengths.iter().zip(&self.s_a) {
            s.push_str(&format!("{l},{v:?}\n"));
        }
        s
    }
}

/// `S_A(L)` for every requested length and, when at least four fall inside
/// `fit_window`, the central-charge fit.
pub fn entropy_curve(
    lengths: &[usize],
    tbl: &CorrelatorTable,
    fit_window: (usize, usize),
) -> Result<EntropyCurve> {
    let mut lengths = lengths.to_vec();
    lengths.sort_unstable();
    lengths.dedup();
    let s_a = lengths
        .iter()
        .map(|&l| block_entropy(l, tbl))
        .collect::<Result<Vec<f64>>>()?;
    let fit = match central_charge_fit(&lengths, &s_a, fit_window) {
        Ok(f) => Some(f),
        Err(Error::InsufficientData(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(EntropyCurve {
        lengths,
        s_a,
        fit_window,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::{correlator_table, QuadratureConfig};
    use crate::model::{critical_alphas, ModelParams};

    fn table(mu: f64, delta: f64, alpha: f64, beta: f64, x_max: usize) -> CorrelatorTable {
        let p = ModelParams::unit_hopping(mu, delta, alpha, beta).unwrap();
        correlator_table(&p, x_max, &QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn product_state_has_zero_entropy() {
        let tbl = table(100.0, 0.0, 1.0, 1.0, 40);
        for l in [1, 5, 40] {
            assert!(block_entropy(l, &tbl).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn maximally_mixed_modes_give_one_bit_each() {
        assert_eq!(entropy_from_spectrum(&[0.0; 7]).unwrap(), 7.0);
        assert_eq!(entropy_from_spectrum(&[1.0, 1.0 + 1e-9]).unwrap(), 0.0);
        assert!(matches!(
            entropy_from_spectrum(&[1.0 + 1e-6]),
            Err(Error::CorrelationSpectrum { .. })
        ));
    }

    #[test]
    fn single_site_entropy_at_most_one_bit() {
        let tbl = table(0.3, 1.0, 0.8, 0.5, 4);
        let s = block_entropy(1, &tbl).unwrap();
        assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn block_size_must_fit_table() {
        let tbl = table(0.3, 1.0, 0.8, 0.5, 4);
        assert!(block_entropy(0, &tbl).is_err());
        assert!(matches!(
            block_entropy(5, &tbl),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn exact_fit_identity() {
        let lengths: Vec<usize> = (3..=10).map(|j| 1 << j).collect();
        let s: Vec<f64> = lengths
            .iter()
            .map(|&l| (l as f64).log2() / 6.0 + 0.3)
            .collect();
        let f = central_charge_fit(&lengths, &s, (1, 1 << 10)).unwrap();
        assert!((f.c - 1.0).abs() < 1e-12);
        assert!((f.s0 - 0.3).abs() < 1e-12);
        assert!(!f.curved);
    }

    #[test]
    fn fit_needs_four_points() {
        assert!(matches!(
            central_charge_fit(&[2, 4, 8], &[0.1, 0.2, 0.3], (1, 100)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn block_matrix_eigenvalues_are_imaginary_pairs() {
        let tbl = table(-5.0, 1.3, 0.511, 0.511, 16);
        let l = 12;
        let gamma = DMatrix::from_fn(2 * l, 2 * l, |r, c| {
            let off = (r / 2) as i64 - (c / 2) as i64;
            match (r % 2, c % 2) {
                (0, 1) => tbl.g(off),
                (1, 0) => -tbl.g(-off),
                _ => 0.0,
            }
        });
        let sym = (&gamma - gamma.transpose()) * 0.5;
        let ev = sym.complex_eigenvalues();
        assert!(ev.iter().all(|z| z.re.abs() < 1e-10));
        let mut im: Vec<f64> = ev.iter().map(|z| z.im.abs()).collect();
        im.sort_by(|a, b| b.total_cmp(a));
        let nu = correlation_spectrum(l, &tbl).unwrap();
        for (m, v) in nu.iter().enumerate() {
            assert!((im[2 * m] - v).abs() < 1e-9);
            assert!((im[2 * m + 1] - v).abs() < 1e-9);
        }
    }

    #[test]
    fn gapped_entropy_saturates() {
        let tbl = table(-30.0, 1.0, 8.0, 8.0, 256);
        let s128 = block_entropy(128, &tbl).unwrap();
        let s256 = block_entropy(256, &tbl).unwrap();
        assert!((s256 - s128).abs() < 0.05);
    }

    #[test]
    fn critical_entropy_grows_with_unit_charge() {
        let tbl = table(-5.0, 1.3, 0.511, 0.511, 128);
        let lengths = default_lengths(128);
        let curve = entropy_curve(&lengths, &tbl, (16, 128)).unwrap();
        for w in curve.s_a.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        let c = curve.c_fit().unwrap();
        assert!((c - 1.0).abs() < 0.15, "c = {c}");
    }

    #[test]
    fn longer_range_needs_longer_blocks() {
        // Fixed window; on the k = 0 boundary the log regime sets in later as
        // α shrinks, so the residual about a straight line grows.
        let mut residuals = Vec::new();
        for alpha in [1.0f64, 0.3, 0.05] {
            let mu = -2.0 / (1.0 - (-alpha).exp());
            let b = critical_alphas(mu, 1.0).unwrap();
            assert!((b[0].alpha_star - alpha).abs() < 1e-9);
            let tbl = table(mu, 1.3, alpha, alpha, 64);
            let curve = entropy_curve(&default_lengths(64), &tbl, (2, 64)).unwrap();
            residuals.push(curve.fit.unwrap().residual);
        }
        assert!(residuals[0] < residuals[1] && residuals[1] < residuals[2], "{residuals:?}");
    }

    #[test]
    fn default_lengths_cover_range() {
        let l = default_lengths(256);
        assert_eq!(l[0], 1);
        assert_eq!(*l.last().unwrap(), 256);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
    }
}
