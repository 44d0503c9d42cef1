//! Finite local hidden-variable models.
//!
//! A model is a finite probability space `Λ = {λ_0, …, λ_{n-1}}` with weights,
//! plus two setting-indexed random variables `ξ(a, λ)` and `η(b, λ)`. The
//! variables come from a small closed set of families so that models can be
//! written to and read from scenario files.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{estimate_mean, unit_f64, McEstimate, SamplingError};
use crate::spin::{chsh_value, ChshSettings, Correlation, UnitVector3};

const WEIGHT_TOLERANCE: f64 = 1e-14;
/// Slack allowed above the classical CHSH bound of 2.
pub const CHSH_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LhvError {
    #[error("model needs at least one point")]
    Empty,
    #[error("weight {index} is negative or not finite ({value})")]
    BadWeight { index: usize, value: f64 },
    #[error("weights sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("variable family is defined on {family} points but the model has {points}")]
    FamilySize { family: usize, points: usize },
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// A setting-indexed random variable on a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum VariableFamily {
    /// `scale · a_λ`: point `λ` reports the `λ`-th component of the setting.
    /// Defined on exactly three points.
    Components { scale: f64 },
    /// `w_λ · a + c_λ`, optionally clipped to `[-clip, clip]`.
    Affine {
        weights: Vec<[f64; 3]>,
        offsets: Vec<f64>,
        #[serde(default)]
        clip: Option<f64>,
    },
    /// `sign(w_λ · a + c_λ)` with `sign(0) = +1`.
    Sign { weights: Vec<[f64; 3]>, offsets: Vec<f64> },
    /// Setting-independent values.
    Constant { values: Vec<f64> },
}

impl VariableFamily {
    fn points(&self) -> Option<usize> {
        match self {
            VariableFamily::Components { .. } => Some(3),
            VariableFamily::Affine { weights, offsets, .. } | VariableFamily::Sign { weights, offsets } => {
                (weights.len() == offsets.len()).then_some(weights.len())
            }
            VariableFamily::Constant { values } => Some(values.len()),
        }
    }

    pub fn value(&self, setting: &UnitVector3, point: usize) -> f64 {
        let a = setting.components();
        match self {
            VariableFamily::Components { scale } => scale * a[point],
            VariableFamily::Affine { weights, offsets, clip } => {
                let w = weights[point];
                let raw = w[0] * a[0] + w[1] * a[1] + w[2] * a[2] + offsets[point];
                match clip {
                    Some(c) => raw.clamp(-c, *c),
                    None => raw,
                }
            }
            VariableFamily::Sign { weights, offsets } => {
                let w = weights[point];
                let raw = w[0] * a[0] + w[1] * a[1] + w[2] * a[2] + offsets[point];
                if raw >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            VariableFamily::Constant { values } => values[point],
        }
    }

    /// An upper bound on `|value(a, λ)|` over all settings and points.
    ///
    /// Exact for every family except an unclipped `Affine`, where it is the
    /// Cauchy–Schwarz bound `max_λ (|w_λ| + |c_λ|)`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            VariableFamily::Components { scale } => scale.abs(),
            VariableFamily::Affine { weights, offsets, clip } => {
                let bound = weights
                    .iter()
                    .zip(offsets)
                    .map(|(w, c)| (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt() + c.abs())
                    .fold(0.0, f64::max);
                match clip {
                    Some(c) => bound.min(c.abs()),
                    None => bound,
                }
            }
            VariableFamily::Sign { .. } => 1.0,
            VariableFamily::Constant { values } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LhvModelSpec", into = "LhvModelSpec")]
pub struct LhvModel {
    weights: Vec<f64>,
    xi: VariableFamily,
    eta: VariableFamily,
}

/// Serialized form of [`LhvModel`]; validated on conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LhvModelSpec {
    pub weights: Vec<f64>,
    pub xi: VariableFamily,
    pub eta: VariableFamily,
}

impl TryFrom<LhvModelSpec> for LhvModel {
    type Error = LhvError;

    fn try_from(spec: LhvModelSpec) -> Result<Self, Self::Error> {
        LhvModel::new(spec.weights, spec.xi, spec.eta)
    }
}

impl From<LhvModel> for LhvModelSpec {
    fn from(m: LhvModel) -> Self {
        LhvModelSpec { weights: m.weights, xi: m.xi, eta: m.eta }
    }
}

impl LhvModel {
    pub fn new(weights: Vec<f64>, xi: VariableFamily, eta: VariableFamily) -> Result<Self, LhvError> {
        if weights.is_empty() {
            return Err(LhvError::Empty);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(LhvError::BadWeight { index, value });
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(LhvError::NotNormalized(total));
        }
        for family in [&xi, &eta] {
            match family.points() {
                Some(n) if n == weights.len() => {}
                other => return Err(LhvError::FamilySize { family: other.unwrap_or(0), points: weights.len() }),
            }
        }
        Ok(Self { weights, xi, eta })
    }

    /// Uniform weights over `n` points.
    pub fn uniform(n: usize, xi: VariableFamily, eta: VariableFamily) -> Result<Self, LhvError> {
        if n == 0 {
            return Err(LhvError::Empty);
        }
        Self::new(vec![1.0 / n as f64; n], xi, eta)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn xi(&self, a: &UnitVector3, point: usize) -> f64 {
        self.xi.value(a, point)
    }

    pub fn eta(&self, b: &UnitVector3, point: usize) -> f64 {
        self.eta.value(b, point)
    }

    pub fn sup_norm_xi(&self) -> f64 {
        self.xi.sup_norm()
    }

    pub fn sup_norm_eta(&self) -> f64 {
        self.eta.sup_norm()
    }

    /// Largest `|ξ(a, λ)|` over the points for one setting.
    pub fn max_abs_xi(&self, a: &UnitVector3) -> f64 {
        (0..self.len()).map(|p| self.xi(a, p).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_eta(&self, b: &UnitVector3) -> f64 {
        (0..self.len()).map(|p| self.eta(b, p).abs()).fold(0.0, f64::max)
    }
}

/// The three-point model: `ξ(a, λ) = η(a, λ) = √3 a_λ`, uniform weights.
pub fn sqrt3_model() -> LhvModel {
    let scale = 3f64.sqrt();
    LhvModel::uniform(3, VariableFamily::Components { scale }, VariableFamily::Components { scale })
        .expect("three-point model is valid")
}

/// `E ξ(a) η(b) = Σ_λ w_λ ξ(a, λ) η(b, λ)`.
pub fn model_correlation(m: &LhvModel, a: &UnitVector3, b: &UnitVector3) -> f64 {
    m.weights.iter().enumerate().map(|(p, w)| w * m.xi(a, p) * m.eta(b, p)).sum()
}

impl Correlation for LhvModel {
    fn correlate(&self, a: &UnitVector3, b: &UnitVector3) -> f64 {
        model_correlation(self, a, b)
    }
}

/// Monte Carlo estimate of `E ξ(a) η(b)` from `n` i.i.d. draws of `λ`.
pub fn mc_correlation(
    m: &LhvModel,
    a: &UnitVector3,
    b: &UnitVector3,
    n: u64,
    seed: u64,
) -> Result<McEstimate, LhvError> {
    let products: Vec<f64> = (0..m.len()).map(|p| m.xi(a, p) * m.eta(b, p)).collect();
    let mut cumulative = Vec::with_capacity(m.len());
    let mut running = 0.0;
    for w in &m.weights {
        running += w;
        cumulative.push(running);
    }
    let last = products.len() - 1;
    let est = estimate_mean::<1, _>(seed, n, |words| {
        let u = unit_f64(words[0]) * running;
        let point = cumulative.partition_point(|&c| c <= u).min(last);
        products[point]
    })?;
    Ok(est)
}

/// Outcome of checking the CHSH inequality on a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ChshBoundReport {
    /// The bounded-variable hypothesis holds; `satisfied` says whether the
    /// exact value stayed at or below 2.
    Checked { value: f64, satisfied: bool },
    /// `sup|ξ| · sup|η| > 1`, so the inequality makes no claim.
    NotApplicable { value: f64, sup_norm_product: f64 },
}

impl ChshBoundReport {
    pub fn value(&self) -> f64 {
        match *self {
            ChshBoundReport::Checked { value, .. } | ChshBoundReport::NotApplicable { value, .. } => value,
        }
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, ChshBoundReport::Checked { satisfied: false, .. })
    }
}

/// Exact CHSH value of the model, judged against the classical bound.
pub fn chsh_bound_check(m: &LhvModel, s: &ChshSettings) -> ChshBoundReport {
    let value = chsh_value(m, s);
    let product = m.sup_norm_xi() * m.sup_norm_eta();
    if product > 1.0 {
        ChshBoundReport::NotApplicable { value, sup_norm_product: product }
    } else {
        ChshBoundReport::Checked { value, satisfied: value <= 2.0 + CHSH_SLACK }
    }
}

/// A random model with `|ξ|, |η| ≤ 1`.
///
/// 2–16 points with Dirichlet(1,…,1) weights; each variable is either a
/// clipped affine response or a sign response with coefficients uniform in
/// `[-1, 1]`.
pub fn random_bounded_model<R: Rng + ?Sized>(rng: &mut R) -> LhvModel {
    let n = rng.random_range(2..=16);
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // push the rounding residue into the largest weight
    let residue = 1.0 - weights.iter().sum::<f64>();
    let largest = (0..n).max_by(|&i, &j| weights[i].total_cmp(&weights[j])).unwrap();
    weights[largest] += residue;

    let xi = random_family(rng, n);
    let eta = random_family(rng, n);
    LhvModel::new(weights, xi, eta).expect("generated model is valid")
}

fn random_family<R: Rng + ?Sized>(rng: &mut R, n: usize) -> VariableFamily {
    let mut uniform = || rng.random_range(-1.0..=1.0);
    let weights: Vec<[f64; 3]> = (0..n).map(|_| [uniform(), uniform(), uniform()]).collect();
    let offsets: Vec<f64> = (0..n).map(|_| uniform()).collect();
    if rng.random_bool(0.5) {
        VariableFamily::Affine { weights, offsets, clip: Some(1.0) }
    } else {
        VariableFamily::Sign { weights, offsets }
    }
}

/// A uniformly random direction on the sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> UnitVector3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    UnitVector3::normalize(r * phi.cos(), r * phi.sin(), z).expect("nonzero direction")
}

pub fn random_settings<R: Rng + ?Sized>(rng: &mut R) -> ChshSettings {
    ChshSettings {
        a: random_unit_vector(rng),
        a_prime: random_unit_vector(rng),
        b: random_unit_vector(rng),
        b_prime: random_unit_vector(rng),
    }
}
