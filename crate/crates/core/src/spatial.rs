//! Spin correlations measured by detectors occupying regions of space.
//!
//! For a product wavefunction `ψ_spin · ψ₁(r₁) ψ₂(r₂)` the localized
//! correlation is `g(O₁, O₂) · D_spin(a, b)` where `g` is the probability
//! of finding particle 1 in `O₁` and particle 2 in `O₂`. Packets are
//! isotropic Gaussians and regions are axis-aligned boxes, so `g` is a
//! product of one-dimensional error-function integrals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{expectation, tensor, Operator};
use crate::lhv::{LhvModel, VariableFamily};
use crate::spin::{pauli_dot, singlet_state, spin_correlation, UnitVector3};

/// Half-width, in packet widths, of the window used to truncate unbounded
/// sides during quadrature.
const QUADRATURE_PADDING: f64 = 6.0;
const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpatialError {
    #[error("packet width must be positive and finite, got {0}")]
    BadWidth(f64),
    #[error("packet center must be finite")]
    BadCenter,
    #[error("axis {axis}: lower bound {lo} is not below upper bound {hi}")]
    EmptyInterval { axis: usize, lo: f64, hi: f64 },
    #[error("detector region must be bounded")]
    Unbounded,
    #[error("localization factor {0} outside [0, 1]")]
    FactorOutOfRange(f64),
    #[error("quadrature resolution {0} is below the minimum of 8")]
    ResolutionTooLow(usize),
}

/// An isotropic Gaussian packet; `|ψ|²` is the normal density with mean
/// `center` and standard deviation `sigma` on each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WavepacketSpec", into = "WavepacketSpec")]
pub struct Wavepacket {
    center: [f64; 3],
    sigma: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketSpec {
    pub center: [f64; 3],
    pub sigma: f64,
}

impl TryFrom<WavepacketSpec> for Wavepacket {
    type Error = SpatialError;

    fn try_from(s: WavepacketSpec) -> Result<Self, Self::Error> {
        Wavepacket::new(s.center, s.sigma)
    }
}

impl From<Wavepacket> for WavepacketSpec {
    fn from(p: Wavepacket) -> Self {
        WavepacketSpec { center: p.center, sigma: p.sigma }
    }
}

impl Wavepacket {
    pub fn new(center: [f64; 3], sigma: f64) -> Result<Self, SpatialError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(SpatialError::BadWidth(sigma));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(SpatialError::BadCenter);
        }
        Ok(Self { center, sigma })
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `|ψ(r)|²`.
    pub fn density(&self, r: [f64; 3]) -> f64 {
        let norm = (std::f64::consts::TAU * self.sigma * self.sigma).powf(-1.5);
        let d2: f64 = (0..3).map(|i| (r[i] - self.center[i]).powi(2)).sum();
        norm * (-d2 / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// An axis-aligned box; any bound may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionSpec", into = "RegionSpec")]
pub struct DetectorRegion {
    lo: [f64; 3],
    hi: [f64; 3],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl TryFrom<RegionSpec> for DetectorRegion {
    type Error = SpatialError;

    fn try_from(s: RegionSpec) -> Result<Self, Self::Error> {
        DetectorRegion::new(s.lo, s.hi)
    }
}

impl From<DetectorRegion> for RegionSpec {
    fn from(r: DetectorRegion) -> Self {
        RegionSpec { lo: r.lo, hi: r.hi }
    }
}

impl DetectorRegion {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self, SpatialError> {
        for axis in 0..3 {
            // NaN fails this comparison too
            if lo[axis].is_nan()
                || hi[axis].is_nan()
                || lo[axis] >= hi[axis]
                || lo[axis] == f64::INFINITY
                || hi[axis] == f64::NEG_INFINITY
            {
                return Err(SpatialError::EmptyInterval { axis, lo: lo[axis], hi: hi[axis] });
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn whole_space() -> Self {
        Self { lo: [f64::NEG_INFINITY; 3], hi: [f64::INFINITY; 3] }
    }

    /// The cube of half-width `half` around `center`.
    pub fn cube(center: [f64; 3], half: f64) -> Result<Self, SpatialError> {
        Self::new(center.map(|c| c - half), center.map(|c| c + half))
    }

    /// `{r : r[axis] ≥ threshold}`.
    pub fn half_space_above(axis: usize, threshold: f64) -> Result<Self, SpatialError> {
        let mut lo = [f64::NEG_INFINITY; 3];
        lo[axis] = threshold;
        Self::new(lo, [f64::INFINITY; 3])
    }

    pub fn lo(&self) -> [f64; 3] {
        self.lo
    }

    pub fn hi(&self) -> [f64; 3] {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|x| x.is_finite())
    }

    /// Translation by the vector `l`.
    pub fn shifted(&self, l: [f64; 3]) -> Self {
        Self { lo: [0, 1, 2].map(|i| self.lo[i] + l[i]), hi: [0, 1, 2].map(|i| self.hi[i] + l[i]) }
    }

    pub fn contains(&self, other: &DetectorRegion) -> bool {
        (0..3).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }
}

/// `P(lo ≤ X ≤ hi)` for `X ~ N(mean, sigma²)`.
///
/// Written with `erfc` on whichever side keeps both tails small, so far
/// tails do not cancel to zero.
pub fn interval_probability(mean: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let scale = 1.0 / (sigma * std::f64::consts::SQRT_2);
    let zl = (lo - mean) * scale;
    let zh = (hi - mean) * scale;
    let p = if zl >= 0.0 {
        0.5 * (libm::erfc(zl) - libm::erfc(zh))
    } else if zh <= 0.0 {
        0.5 * (libm::erfc(-zh) - libm::erfc(-zl))
    } else {
        1.0 - 0.5 * libm::erfc(-zl) - 0.5 * libm::erfc(zh)
    };
    p.clamp(0.0, 1.0)
}

/// `∫_O |ψ|²`.
pub fn box_probability(p: &Wavepacket, o: &DetectorRegion) -> f64 {
    (0..3).map(|i| interval_probability(p.center[i], p.sigma, o.lo[i], o.hi[i])).product()
}

/// `g(O₁, O₂) = ∫_{O₁}|ψ₁|² · ∫_{O₂}|ψ₂|²`.
pub fn localization_factor(p1: &Wavepacket, p2: &Wavepacket, o1: &DetectorRegion, o2: &DetectorRegion) -> f64 {
    box_probability(p1, o1) * box_probability(p2, o2)
}

/// `g · D_spin(a, b)`.
pub fn localized_correlation(g: f64, a: &UnitVector3, b: &UnitVector3) -> Result<f64, SpatialError> {
    if !(0.0..=1.0).contains(&g) {
        return Err(SpatialError::FactorOutOfRange(g));
    }
    Ok(g * spin_correlation(a, b))
}

/// Localized singlet correlation for fixed packets and regions.
#[derive(Debug, Clone, Copy)]
pub struct LocalizedCorrelation {
    pub g: f64,
}

impl crate::spin::Correlation for LocalizedCorrelation {
    fn correlate(&self, a: &UnitVector3, b: &UnitVector3) -> f64 {
        self.g * spin_correlation(a, b)
    }
}

/// One row of a disentanglement scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub shift: [f64; 3],
    pub shift_norm: f64,
    pub g: f64,
    /// `ω(σ·a P_{O₁(l)} ⊗ σ·b P_{O₂})`.
    pub omega: f64,
    /// `|ω − ω(σ·a P_{O₁(l)} ⊗ I) · ω(I ⊗ σ·b P_{O₂})|`.
    pub residual: f64,
}

/// Settings for a scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanSetup {
    pub p1: Wavepacket,
    pub p2: Wavepacket,
    pub o1: DetectorRegion,
    pub o2: DetectorRegion,
    pub a: UnitVector3,
    pub b: UnitVector3,
}

/// Translates `O₁` along each shift and records `g`, `ω` and the
/// factorization residual. Rows follow the input order.
pub fn disentanglement_scan(setup: &ScanSetup, shifts: &[[f64; 3]]) -> Result<Vec<ScanRow>, SpatialError> {
    if !setup.o1.is_bounded() {
        return Err(SpatialError::Unbounded);
    }
    let singlet = singlet_state();
    let id = Operator::identity(2);
    let spin_a = expectation(&singlet, &tensor(&pauli_dot(&setup.a), &id)).expect("dims").re;
    let spin_b = expectation(&singlet, &tensor(&id, &pauli_dot(&setup.b))).expect("dims").re;
    let g2 = box_probability(&setup.p2, &setup.o2);
    let omega2 = g2 * spin_b;

    Ok(shifts
        .par_iter()
        .map(|&l| {
            let o1 = setup.o1.shifted(l);
            let g1 = box_probability(&setup.p1, &o1);
            let g = localization_factor(&setup.p1, &setup.p2, &o1, &setup.o2);
            let omega = localized_correlation(g, &setup.a, &setup.b).expect("g within [0, 1]");
            let omega1 = g1 * spin_a;
            ScanRow {
                shift: l,
                shift_norm: (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt(),
                g,
                omega,
                residual: (omega - omega1 * omega2).abs(),
            }
        })
        .collect())
}

/// Boundedness verdict for [`theorem4_model`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub g1: f64,
    pub g2: f64,
    /// `g1 · g2 ≤ 1/3`.
    pub product_ok: bool,
    pub sup_norm_xi: f64,
    pub sup_norm_eta: f64,
}

/// A three-point model reproducing `g1 g2 D_spin(a, b)`.
///
/// `ξ(a, λ) = −3 g1 g2 a_λ`, `η(b, λ) = b_λ` with uniform weights, so
/// `E ξ η = −g1 g2 (a·b)`. Both variables are bounded by 1 exactly when
/// `g1 g2 ≤ 1/3`.
pub fn theorem4_model(g1: f64, g2: f64) -> Result<(LhvModel, BoundCertificate), SpatialError> {
    for g in [g1, g2] {
        if !(0.0..=1.0).contains(&g) {
            return Err(SpatialError::FactorOutOfRange(g));
        }
    }
    let product = g1 * g2;
    let model = LhvModel::uniform(
        3,
        VariableFamily::Components { scale: -3.0 * product },
        VariableFamily::Components { scale: 1.0 },
    )
    .expect("three-point model is valid");
    let certificate = BoundCertificate {
        g1,
        g2,
        product_ok: product <= 1.0 / 3.0,
        sup_norm_xi: model.sup_norm_xi(),
        sup_norm_eta: model.sup_norm_eta(),
    };
    Ok((model, certificate))
}

/// `|analytic − quadrature|` for `∫_O |ψ|²`.
///
/// The quadrature is the 3-D midpoint rule on `resolution³` cells over `O`
/// clipped to `center ± 6σ`.
pub fn projector_consistency_check(p: &Wavepacket, o: &DetectorRegion, resolution: usize) -> Result<f64, SpatialError> {
    if resolution < MIN_RESOLUTION {
        return Err(SpatialError::ResolutionTooLow(resolution));
    }
    let pad = QUADRATURE_PADDING * p.sigma;
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(3);
    let mut cell = 1.0;
    for i in 0..3 {
        let lo = o.lo[i].max(p.center[i] - pad);
        let hi = o.hi[i].min(p.center[i] + pad);
        if lo >= hi {
            axes.push(Vec::new());
            continue;
        }
        let h = (hi - lo) / resolution as f64;
        cell *= h;
        axes.push((0..resolution).map(|k| lo + (k as f64 + 0.5) * h).collect());
    }
    let quadrature: f64 = axes[0]
        .par_iter()
        .map(|&x| {
            let mut acc = 0.0;
            for &y in &axes[1] {
                for &z in &axes[2] {
                    acc += p.density([x, y, z]);
                }
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        * cell;
    Ok((box_probability(p, o) - quadrature).abs())
}
