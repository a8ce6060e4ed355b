//! Finite-ring exact diagonalization and Wick reconstruction of two-site
//! density matrices.
//!
//! The ring Hamiltonian is
//!
//! ```text
//! H = Σ_ij c_i† h_ij c_j + ½ Σ_ij (c_i† D_ij c_j† + h.c.)
//! h_ii = μ,  h_{i,i±r} = t(r),  D_{i,i+r} = Δ(r) = −D_{i,i−r},  1 ≤ r ≤ range_cut
//! ```
//!
//! with indices mod `N`. Its ground state is reached either through the dense
//! `2N × 2N` Bogoliubov–de Gennes matrix or sector by sector in momentum
//! space; both paths produce the same `⟨c_i† c_j⟩` and `⟨c_i c_j⟩`.
//!
//! Spin operators follow from the Jordan–Wigner map with Majoranas
//! `γ_{2l} = c_l + c_l†`, `γ_{2l+1} = i(c_l† − c_l)`:
//! `σᶻ_l = −i γ_{2l} γ_{2l+1}`, `σˣ_l = S_l γ_{2l}`, `σʸ_l = S_l γ_{2l+1}`,
//! with `S_l = Π_{m<l} σᶻ_m`. Expectations of Majorana monomials are
//! Pfaffians of the two-point matrix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{pfaffian, Square};
use crate::model::ModelParams;

pub const DEFAULT_RING_SITES: usize = 512;
/// Longest separation accepted by [`wick_two_site`].
pub const MAX_WICK_SEPARATION: usize = 64;
/// Quasiparticle energies below this mark the ring as gapless.
pub const GAPLESS_ENERGY: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingConfig {
    pub n_sites: usize,
    pub range_cut: usize,
    pub params: ModelParams,
}

impl RingConfig {
    /// Ring of `n_sites` with couplings kept up to range `n_sites/2 − 1`.
    pub fn new(params: ModelParams, n_sites: usize) -> Result<Self> {
        let cfg = RingConfig {
            n_sites,
            range_cut: (n_sites / 2).saturating_sub(1),
            params,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_range_cut(self, range_cut: usize) -> Result<Self> {
        let cfg = RingConfig { range_cut, ..self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 4 || !self.n_sites.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "ring size must be even and >= 4, got {}",
                self.n_sites
            )));
        }
        if self.range_cut == 0 || self.range_cut >= self.n_sites / 2 {
            return Err(Error::InvalidParameter(format!(
                "range_cut must be in 1..{}, got {}",
                self.n_sites / 2,
                self.range_cut
            )));
        }
        Ok(())
    }

    /// `(h_r, Δ_r)` for `r = 0..=range_cut`; `Δ_0 = 0`.
    fn couplings(&self) -> Vec<(f64, f64)> {
        let p = &self.params;
        (0..=self.range_cut as i64)
            .map(|r| {
                if r == 0 {
                    (p.mu(), 0.0)
                } else {
                    (p.hopping(r), p.pairing(r))
                }
            })
            .collect()
    }

    /// Real symmetric BdG matrix `[[h, D], [Dᵀ, −h]]`.
    pub fn bdg_matrix(&self) -> DMatrix<f64> {
        let n = self.n_sites;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (r, (h, d)) in self.couplings().into_iter().enumerate() {
            for i in 0..n {
                let fwd = (i + r) % n;
                let back = (i + n - r) % n;
                if r == 0 {
                    m[(i, i)] = h;
                    m[(n + i, n + i)] = -h;
                    continue;
                }
                for j in [fwd, back] {
                    m[(i, j)] = h;
                    m[(n + i, n + j)] = -h;
                }
                m[(i, n + fwd)] = d;
                m[(i, n + back)] = -d;
                m[(n + fwd, i)] = d;
                m[(n + back, i)] = -d;
            }
        }
        m
    }

    /// `h(k)` and `ε₂(k)` of the truncated couplings at `k = 2πm/N`.
    fn sector(&self, m: usize) -> (f64, f64) {
        let k = 2.0 * PI * m as f64 / self.n_sites as f64;
        let mut h = 0.0;
        let mut e2 = 0.0;
        for (r, (hr, dr)) in self.couplings().into_iter().enumerate() {
            if r == 0 {
                h += hr;
            } else {
                let (s, c) = (k * r as f64).sin_cos();
                h += 2.0 * hr * c;
                e2 += 2.0 * dr * s;
            }
        }
        (h, e2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dense diagonalization of the `2N × 2N` BdG matrix.
    Dense,
    /// `N` independent `2 × 2` problems, one per momentum.
    Momentum,
}

/// Ground-state two-point functions of a ring.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateCorrelations {
    pub n_sites: usize,
    /// `⟨c_i† c_j⟩`.
    pub hop: DMatrix<Complex64>,
    /// `⟨c_i c_j⟩`.
    pub pair: DMatrix<Complex64>,
    /// BdG eigenvalues in ascending order.
    pub spectrum: Vec<f64>,
    /// Smallest quasiparticle energy.
    pub min_energy: f64,
}

pub fn diagonalize_ring(cfg: &RingConfig, method: Method) -> Result<GroundStateCorrelations> {
    cfg.validate()?;
    match method {
        Method::Dense => dense(cfg),
        Method::Momentum => momentum(cfg),
    }
}

fn gapless(min_energy: f64) -> Result<()> {
    if min_energy < GAPLESS_ENERGY {
        return Err(Error::Gapless(format!(
            "ring ground state is degenerate (min quasiparticle energy {min_energy:e})"
        )));
    }
    Ok(())
}

fn dense(cfg: &RingConfig) -> Result<GroundStateCorrelations> {
    let n = cfg.n_sites;
    let eig = SymmetricEigen::new(cfg.bdg_matrix());
    let min_energy = eig.eigenvalues.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    gapless(min_energy)?;

    let positive: Vec<usize> = (0..2 * n).filter(|&c| eig.eigenvalues[c] > 0.0).collect();
    let vp = DMatrix::from_fn(2 * n, positive.len(), |r, c| eig.eigenvectors[(r, positive[c])]);
    // ⟨Ψ Ψ†⟩ with Ψ = (c, c†): the projector on positive-energy modes.
    let proj = &vp * vp.transpose();

    let hop = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(delta - proj[(j, i)], 0.0)
    });
    let pair = DMatrix::from_fn(n, n, |i, j| Complex64::new(proj[(i, n + j)], 0.0));
    let mut spectrum: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    spectrum.sort_by(f64::total_cmp);
    Ok(GroundStateCorrelations {
        n_sites: n,
        hop,
        pair,
        spectrum,
        min_energy,
    })
}

fn momentum(cfg: &RingConfig) -> Result<GroundStateCorrelations> {
    let n = cfg.n_sites;
    let sectors: Vec<(f64, f64)> = (0..n).map(|m| cfg.sector(m)).collect();
    let energies: Vec<f64> = sectors.iter().map(|(h, e2)| h.hypot(*e2)).collect();
    let min_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
    gapless(min_energy)?;

    // Per sector, ⟨c_k c_k†⟩ = (1 + h/E)/2 and ⟨c_k c_−k⟩ = iε₂/(2E); the
    // real-space functions depend on i − j only.
    let mut particle = vec![0.0; n];
    let mut anomalous = vec![0.0; n];
    for (delta, (pt, an)) in particle.iter_mut().zip(anomalous.iter_mut()).enumerate() {
        let mut sp = 0.0;
        let mut sa = 0.0;
        for (m, ((h, e2), e)) in sectors.iter().zip(&energies).enumerate() {
            let phase = 2.0 * PI * ((m * delta) % n) as f64 / n as f64;
            let (s, c) = phase.sin_cos();
            sp += c * 0.5 * (1.0 + h / e);
            // Re[e^{ikδ} · iε₂/(2E)]
            sa -= s * 0.5 * e2 / e;
        }
        *pt = sp / n as f64;
        *an = sa / n as f64;
    }

    let diff = |i: usize, j: usize| (i + n - j) % n;
    let hop = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(delta - particle[diff(j, i)], 0.0)
    });
    let pair = DMatrix::from_fn(n, n, |i, j| Complex64::new(anomalous[diff(i, j)], 0.0));
    let mut spectrum: Vec<f64> = energies.iter().flat_map(|&e| [-e, e]).collect();
    spectrum.sort_by(f64::total_cmp);
    Ok(GroundStateCorrelations {
        n_sites: n,
        hop,
        pair,
        spectrum,
        min_energy,
    })
}

impl GroundStateCorrelations {
    /// `⟨c_i c_j†⟩`, `⟨c_i c_j⟩`, `⟨c_i† c_j†⟩`, `⟨c_i† c_j⟩` as the 2×2 block of
    /// `⟨Ψ Ψ†⟩` for sites `i`, `j`.
    fn nambu(&self, i: usize, j: usize) -> Matrix2<Complex64> {
        let delta = if i == j { 1.0 } else { 0.0 };
        Matrix2::new(
            Complex64::new(delta, 0.0) - self.hop[(j, i)],
            self.pair[(i, j)],
            self.pair[(j, i)].conj(),
            self.hop[(i, j)],
        )
    }

    /// `⟨γ_p γ_q⟩` for Majorana indices on the ring.
    pub fn majorana(&self, p: usize, q: usize) -> Complex64 {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        // γ_{2l} = Ψ_l + Ψ_{N+l}, γ_{2l+1} = −iΨ_l + iΨ_{N+l}
        let row = |p: usize| if p.is_multiple_of(2) { [one, one] } else { [-i, i] };
        let (wp, wq) = (row(p), row(q));
        let c = self.nambu(p / 2, q / 2);
        let mut s = Complex64::default();
        for a in 0..2 {
            for b in 0..2 {
                s += wp[a] * c[(a, b)] * wq[b].conj();
            }
        }
        s
    }

    /// `G_x = −i⟨γ_{2x+1} γ_0⟩`, the ring counterpart of the
    /// momentum-space correlator.
    pub fn g(&self, x: i64) -> f64 {
        let n = self.n_sites as i64;
        let site = x.rem_euclid(n) as usize;
        (-Complex64::i() * self.majorana(2 * site + 1, 0)).re
    }

    /// Expectation of a product of Majoranas with strictly increasing indices.
    fn monomial_expectation(&self, idx: &[usize]) -> Complex64 {
        if idx.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        if idx.len() % 2 == 1 {
            return Complex64::default();
        }
        let m = Square::from_fn(idx.len(), |a, b| {
            if a < b {
                self.majorana(idx[a], idx[b])
            } else {
                Complex64::default()
            }
        });
        pfaffian(m)
    }
}

/// `coeff · γ_{i₁} γ_{i₂} ⋯` with strictly increasing indices.
#[derive(Debug, Clone, PartialEq)]
struct Monomial {
    coeff: Complex64,
    idx: Vec<usize>,
}

impl Monomial {
    fn identity() -> Self {
        Monomial {
            coeff: Complex64::new(1.0, 0.0),
            idx: Vec::new(),
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut idx: Vec<usize> = self.idx.iter().chain(&other.idx).copied().collect();
        // Insertion sort; every transposition of distinct Majoranas flips the sign.
        let mut swaps = 0usize;
        for a in 1..idx.len() {
            let mut b = a;
            while b > 0 && idx[b - 1] > idx[b] {
                idx.swap(b - 1, b);
                swaps += 1;
                b -= 1;
            }
        }
        // γ_p γ_p = 1
        let mut reduced = Vec::with_capacity(idx.len());
        for p in idx {
            if reduced.last() == Some(&p) {
                reduced.pop();
            } else {
                reduced.push(p);
            }
        }
        let sign = if swaps.is_multiple_of(2) { 1.0 } else { -1.0 };
        Monomial {
            coeff: self.coeff * other.coeff * sign,
            idx: reduced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pauli {
    I,
    X,
    Y,
    Z,
}

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

impl Pauli {
    fn matrix(self) -> Matrix2<Complex64> {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::default();
        let i = Complex64::i();
        match self {
            Pauli::I => Matrix2::new(o, z, z, o),
            Pauli::X => Matrix2::new(z, o, o, z),
            Pauli::Y => Matrix2::new(z, -i, i, z),
            Pauli::Z => Matrix2::new(o, z, z, -o),
        }
    }

    /// Jordan–Wigner image of this Pauli operator on site `l`.
    fn majorana_form(self, l: usize) -> Monomial {
        let string = || {
            let mut m = Monomial::identity();
            m.idx = (0..2 * l).collect();
            m.coeff = (-Complex64::i()).powu(l as u32);
            m
        };
        match self {
            Pauli::I => Monomial::identity(),
            Pauli::Z => Monomial {
                coeff: -Complex64::i(),
                idx: vec![2 * l, 2 * l + 1],
            },
            Pauli::X => {
                let mut m = string();
                m.idx.push(2 * l);
                m
            }
            Pauli::Y => {
                let mut m = string();
                m.idx.push(2 * l + 1);
                m
            }
        }
    }
}

fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `ρ_ij = ¼ Σ_ab ⟨σᵃ_i σᵇ_j⟩ σᵃ ⊗ σᵇ`, site `i` first, basis `|0⟩` = empty.
pub fn wick_two_site(corr: &GroundStateCorrelations, i: usize, j: usize) -> Result<Matrix4<Complex64>> {
    let n = corr.n_sites;
    if i >= n || j >= n || i == j {
        return Err(Error::InvalidParameter(format!(
            "sites must be distinct and < {n}, got ({i}, {j})"
        )));
    }
    if i.abs_diff(j) > MAX_WICK_SEPARATION {
        return Err(Error::OutOfRange {
            d: i.abs_diff(j),
            max: MAX_WICK_SEPARATION,
        });
    }
    gapless(corr.min_energy)?;
    let mut rho = Matrix4::zeros();
    for a in PAULIS {
        for b in PAULIS {
            let op = a.majorana_form(i).mul(&b.majorana_form(j));
            let expectation = op.coeff * corr.monomial_expectation(&op.idx);
            rho += kron(&a.matrix(), &b.matrix()) * (expectation * 0.25);
        }
    }
    Ok(rho)
}
