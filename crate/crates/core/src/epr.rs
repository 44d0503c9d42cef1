//! Continuous-variable correlations of two particles.
//!
//! A two-particle state enters only through its four cross moments
//! `A = ⟨q₁q₂⟩`, `B = ⟨p₁q₂⟩`, `C = ⟨q₁p₂⟩`, `D = ⟨p₁p₂⟩` (ħ = m = 1). The
//! rotated-quadrature correlation `⟨q₁(α₁) q₂(α₂)⟩` is bilinear in those
//! moments, and any such bilinear form is the covariance of two classical
//! processes `ξ_n(α) = f_n cos α − g_n sin α` built from orthonormal noise.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{estimate_mean, open_unit_f64, unit_f64, McEstimate, SamplingError};

const DEGENERATE_A: f64 = 1e-12;
const MAX_SQUEEZING: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EprError {
    #[error("⟨q₁q₂⟩ = {0} is too close to zero for the ratio construction")]
    DegenerateMoment(f64),
    #[error("squeezing parameter {0} outside [-5, 5]")]
    SqueezingOutOfRange(f64),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Cross moments of two one-dimensional particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossMomentMatrix {
    /// `⟨q₁q₂⟩`
    pub a: f64,
    /// `⟨p₁q₂⟩`
    pub b: f64,
    /// `⟨q₁p₂⟩`
    pub c: f64,
    /// `⟨p₁p₂⟩`
    pub d: f64,
}

impl CrossMomentMatrix {
    pub const ZERO: Self = Self { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// `[[A, C], [B, D]]`: row = particle-1 variable (q, p), column =
    /// particle-2 variable (q, p).
    pub fn as_matrix(&self) -> [[f64; 2]; 2] {
        [[self.a, self.c], [self.b, self.d]]
    }
}

/// The symplectic mixing `q(α) = q cos α − p sin α`, `p(α) = q sin α + p cos α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalRotation {
    pub alpha: f64,
}

impl CanonicalRotation {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    /// `(cos α, sin α)`, exact at integer multiples of π/2.
    pub fn cos_sin(&self) -> (f64, f64) {
        let quarter = self.alpha / FRAC_PI_2;
        if quarter.is_finite() && quarter == quarter.round() {
            match (quarter.round() as i64).rem_euclid(4) {
                0 => (1.0, 0.0),
                1 => (0.0, 1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, -1.0),
            }
        } else {
            let (s, c) = self.alpha.sin_cos();
            (c, s)
        }
    }

    /// Acts on `(q, p)` column vectors.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (c, s) = self.cos_sin();
        [[c, -s], [s, c]]
    }

    pub fn determinant(&self) -> f64 {
        let m = self.matrix();
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

/// `⟨q₁(α₁) q₂(α₂)⟩` expanded in the cross moments.
pub fn rotated_correlation(m: &CrossMomentMatrix, alpha1: CanonicalRotation, alpha2: CanonicalRotation) -> f64 {
    let (c1, s1) = alpha1.cos_sin();
    let (c2, s2) = alpha2.cos_sin();
    m.a * c1 * c2 - m.b * s1 * c2 - m.c * c1 * s2 + m.d * s1 * s2
}

/// Two classical processes expanded over orthonormal noise `(η₁, η₂)`.
///
/// `particle1` rows hold the coefficients of `f₁` and `g₁`; `particle2`
/// rows hold those of `f₂` and `g₂`. Then `E f₁ f₂ = particle1[0] ·
/// particle2[0]` and so on, i.e. the implied moment matrix is
/// `particle1 · particle2ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessPair {
    pub particle1: [[f64; 2]; 2],
    pub particle2: [[f64; 2]; 2],
}

impl ProcessPair {
    pub const ZERO: Self = Self { particle1: [[0.0; 2]; 2], particle2: [[0.0; 2]; 2] };

    /// `particle1 · particle2ᵀ`, laid out like [`CrossMomentMatrix::as_matrix`].
    pub fn implied_moments(&self) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = dot2(&self.particle1[i], &self.particle2[j]);
            }
        }
        out
    }

    /// Noise coefficients of `ξ₁(α₁)` and `ξ₂(α₂)`.
    pub fn rotated_coefficients(&self, alpha1: CanonicalRotation, alpha2: CanonicalRotation) -> ([f64; 2], [f64; 2]) {
        (rotate(&self.particle1, alpha1), rotate(&self.particle2, alpha2))
    }

    /// Noise coefficients of `ξ_n(t) = f_n + g_n t`.
    pub fn time_coefficients(&self, t1: f64, t2: f64) -> ([f64; 2], [f64; 2]) {
        let lin = |rows: &[[f64; 2]; 2], t: f64| [rows[0][0] + rows[1][0] * t, rows[0][1] + rows[1][1] * t];
        (lin(&self.particle1, t1), lin(&self.particle2, t2))
    }
}

fn dot2(x: &[f64; 2], y: &[f64; 2]) -> f64 {
    x[0] * y[0] + x[1] * y[1]
}

fn rotate(rows: &[[f64; 2]; 2], alpha: CanonicalRotation) -> [f64; 2] {
    let (c, s) = alpha.cos_sin();
    [rows[0][0] * c - rows[1][0] * s, rows[0][1] * c - rows[1][1] * s]
}

/// The ratio solution: `f₁ = Aη₁`, `f₂ = η₁`, `g₁ = Bη₁ + (D − BC/A)η₂`,
/// `g₂ = (C/A)η₁ + η₂`.
pub fn construct_processes_paper(m: &CrossMomentMatrix) -> Result<ProcessPair, EprError> {
    if m.a.abs() <= DEGENERATE_A {
        return Err(EprError::DegenerateMoment(m.a));
    }
    let ratio = m.c / m.a;
    Ok(ProcessPair { particle1: [[m.a, 0.0], [m.b, m.d - m.b * ratio]], particle2: [[1.0, 0.0], [ratio, 1.0]] })
}

/// `particle1 = [[A, C], [B, D]]`, `particle2 = I`. Total, and exact.
pub fn construct_processes_general(m: &CrossMomentMatrix) -> ProcessPair {
    ProcessPair { particle1: m.as_matrix(), particle2: [[1.0, 0.0], [0.0, 1.0]] }
}

/// Max-abs residual of the implied moments against `m`.
pub fn verify_moments(p: &ProcessPair, m: &CrossMomentMatrix) -> f64 {
    let implied = p.implied_moments();
    let target = m.as_matrix();
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((implied[i][j] - target[i][j]).abs());
        }
    }
    worst
}

/// `E ξ₁(α₁) ξ₂(α₂)` from the coefficient algebra (`E η_μ η_ν = δ_μν`).
pub fn process_correlation(p: &ProcessPair, alpha1: CanonicalRotation, alpha2: CanonicalRotation) -> f64 {
    let (u, v) = p.rotated_coefficients(alpha1, alpha2);
    dot2(&u, &v)
}

/// Distribution of the orthonormal noise pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseDistribution {
    /// Independent ±1 signs: a four-point space with exact orthonormality.
    #[default]
    Rademacher,
    /// Independent standard normals (unbounded).
    Gaussian,
}

impl NoiseDistribution {
    /// Draws `(η₁, η₂)` from two raw words.
    pub fn draw(self, words: &[u64; 2]) -> [f64; 2] {
        match self {
            NoiseDistribution::Rademacher => {
                let sign = |w: u64| if w >> 63 == 0 { 1.0 } else { -1.0 };
                [sign(words[0]), sign(words[1])]
            }
            NoiseDistribution::Gaussian => {
                // Box–Muller
                let radius = (-2.0 * open_unit_f64(words[0]).ln()).sqrt();
                let (s, c) = (std::f64::consts::TAU * unit_f64(words[1])).sin_cos();
                [radius * c, radius * s]
            }
        }
    }
}

/// Monte Carlo estimate of `E ξ₁(α₁) ξ₂(α₂)`.
pub fn sample_processes(
    p: &ProcessPair,
    alpha1: CanonicalRotation,
    alpha2: CanonicalRotation,
    dist: NoiseDistribution,
    n: u64,
    seed: u64,
) -> Result<McEstimate, EprError> {
    let (u, v) = p.rotated_coefficients(alpha1, alpha2);
    Ok(estimate_mean::<2, _>(seed, n, |words| {
        let eta = dist.draw(words);
        dot2(&u, &eta) * dot2(&v, &eta)
    })?)
}

/// Processes reproducing the free-evolution correlation
/// `⟨q₁(t₁) q₂(t₂)⟩ = A + B t₁ + C t₂ + D t₁ t₂`, with `q_n(t) = q_n + p_n t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeProcesses {
    pub processes: ProcessPair,
}

impl TimeProcesses {
    /// `E ξ₁(t₁) ξ₂(t₂)` with `ξ_n(t) = f_n + g_n t`.
    pub fn correlation(&self, t1: f64, t2: f64) -> f64 {
        let (u, v) = self.processes.time_coefficients(t1, t2);
        dot2(&u, &v)
    }
}

/// The moments consumed here are the same four cross moments; different
/// particles commute, so no ordering choice arises.
pub fn time_processes(m: &CrossMomentMatrix) -> TimeProcesses {
    TimeProcesses { processes: construct_processes_general(m) }
}

/// `⟨q₁(t₁) q₂(t₂)⟩` for free evolution, expanded directly.
pub fn free_evolution_correlation(m: &CrossMomentMatrix, t1: f64, t2: f64) -> f64 {
    m.a + m.b * t1 + m.c * t2 + m.d * t1 * t2
}

/// A sampled function of one variable.
pub type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// `f(s, t) = Σ_n g_n(s) h_n(t)` realized as `E ξ(s) η(t)` with
/// `ξ(s) = Σ g_n(s) x_n`, `η(t) = Σ h_n(t) x_n`, `E x_n x_m = δ_nm`.
pub struct BivariateFactorization {
    terms: Vec<(ScalarFn, ScalarFn)>,
}

impl BivariateFactorization {
    pub fn components(&self) -> usize {
        self.terms.len()
    }

    /// Noise coefficients of `ξ(s)`.
    pub fn xi_coefficients(&self, s: f64) -> Vec<f64> {
        self.terms.iter().map(|(g, _)| g(s)).collect()
    }

    /// Noise coefficients of `η(t)`.
    pub fn eta_coefficients(&self, t: f64) -> Vec<f64> {
        self.terms.iter().map(|(_, h)| h(t)).collect()
    }

    /// `E ξ(s) η(t)`; zero when there are no terms.
    pub fn expectation(&self, s: f64, t: f64) -> f64 {
        self.xi_coefficients(s).iter().zip(self.eta_coefficients(t)).map(|(x, y)| x * y).sum()
    }

    /// Monte Carlo estimate of `E ξ(s) η(t)` with independent Rademacher noise.
    pub fn sample(&self, s: f64, t: f64, n: u64, seed: u64) -> Result<McEstimate, EprError> {
        let xs = self.xi_coefficients(s);
        let ys = self.eta_coefficients(t);
        // one word per sample carries up to 64 independent signs
        assert!(xs.len() <= 64, "at most 64 noise components are supported when sampling");
        Ok(estimate_mean::<1, _>(seed, n, |words| {
            let mut left = 0.0;
            let mut right = 0.0;
            for (k, (x, y)) in xs.iter().zip(&ys).enumerate() {
                let sign = if (words[0] >> k) & 1 == 0 { 1.0 } else { -1.0 };
                left += x * sign;
                right += y * sign;
            }
            left * right
        })?)
    }
}

pub fn factorize_bivariate(terms: Vec<(ScalarFn, ScalarFn)>) -> BivariateFactorization {
    BivariateFactorization { terms }
}

/// Cross moments of the two-mode squeezed vacuum
/// `exp(r(a†b† − ab))|0,0⟩ ∝ Σ tanh(r)ⁿ |n,n⟩`, with `q = (a + a†)/√2` and
/// `p = (a − a†)/(i√2)`: `A = sinh(2r)/2`, `B = C = 0`, `D = −sinh(2r)/2`.
pub fn tmsv_moments(r: f64) -> Result<CrossMomentMatrix, EprError> {
    if !(r.is_finite() && r.abs() <= MAX_SQUEEZING) {
        return Err(EprError::SqueezingOutOfRange(r));
    }
    let half = 0.5 * (2.0 * r).sinh();
    Ok(CrossMomentMatrix { a: half, b: 0.0, c: 0.0, d: -half })
}
