//! Singlet spin correlations and the CHSH combination.

use std::cmp::Ordering;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{expectation, tensor, Operator, State};

const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("vector ({0}, {1}, {2}) is not a unit vector")]
    NotUnit(f64, f64, f64),
    #[error("vector has zero or non-finite length")]
    Degenerate,
}

/// A direction in three-dimensional space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVector3([f64; 3]);

impl UnitVector3 {
    pub const X: Self = Self([1.0, 0.0, 0.0]);
    pub const Y: Self = Self([0.0, 1.0, 0.0]);
    pub const Z: Self = Self([0.0, 0.0, 1.0]);

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, SpinError> {
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(SpinError::NotUnit(x, y, z));
        }
        Ok(Self([x, y, z]))
    }

    pub fn normalize(x: f64, y: f64, z: f64) -> Result<Self, SpinError> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(SpinError::Degenerate);
        }
        Ok(Self([x / norm, y / norm, z / norm]))
    }

    /// Direction in the x–z plane at angle `theta` (radians) from +z towards +x.
    pub fn in_xz_plane(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self([s, 0.0, c])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn negated(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl TryFrom<[f64; 3]> for UnitVector3 {
    type Error = SpinError;

    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<UnitVector3> for [f64; 3] {
    fn from(v: UnitVector3) -> Self {
        v.0
    }
}

/// The four measurement directions entering the CHSH combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: UnitVector3,
    pub a_prime: UnitVector3,
    pub b: UnitVector3,
    pub b_prime: UnitVector3,
}

impl ChshSettings {
    /// Coplanar settings in the x–z plane, angles in radians.
    pub fn coplanar(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        Self {
            a: UnitVector3::in_xz_plane(a),
            a_prime: UnitVector3::in_xz_plane(a_prime),
            b: UnitVector3::in_xz_plane(b),
            b_prime: UnitVector3::in_xz_plane(b_prime),
        }
    }
}

/// A two-party correlation function `E(a, b)`.
///
/// Quantum predictions, exact hidden-variable expectations and sampled
/// estimates all implement this so the same CHSH code can consume them.
pub trait Correlation: Sync {
    fn correlate(&self, a: &UnitVector3, b: &UnitVector3) -> f64;
}

impl<F> Correlation for F
where
    F: Fn(&UnitVector3, &UnitVector3) -> f64 + Sync,
{
    fn correlate(&self, a: &UnitVector3, b: &UnitVector3) -> f64 {
        self(a, b)
    }
}

/// `σ·a = Σ σ_i a_i`.
pub fn pauli_dot(a: &UnitVector3) -> Operator {
    let [x, y, z] = a.components();
    let sx = Operator::pauli_x().scale_real(x);
    let sy = Operator::pauli_y().scale_real(y);
    let sz = Operator::pauli_z().scale_real(z);
    &(&sx + &sy) + &sz
}

/// `(|01⟩ − |10⟩)/√2` in the `|00⟩, |01⟩, |10⟩, |11⟩` basis.
pub fn singlet_state() -> State {
    static SINGLET: OnceLock<State> = OnceLock::new();
    SINGLET
        .get_or_init(|| {
            let zero = Complex64::new(0.0, 0.0);
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            State::new(vec![zero, h, -h, zero]).expect("singlet is normalized")
        })
        .clone()
}

/// `⟨ψ|σ·a ⊗ σ·b|ψ⟩` on the singlet, evaluated through the operator algebra.
pub fn spin_correlation(a: &UnitVector3, b: &UnitVector3) -> f64 {
    let joint = tensor(&pauli_dot(a), &pauli_dot(b));
    expectation(&singlet_state(), &joint).expect("4-dimensional operator on 4-dimensional state").re
}

/// The singlet correlation as a [`Correlation`] handle.
#[derive(Debug, Clone, Copy, Default)]
pub struct SingletCorrelation;

impl Correlation for SingletCorrelation {
    fn correlate(&self, a: &UnitVector3, b: &UnitVector3) -> f64 {
        spin_correlation(a, b)
    }
}

/// `|E(a,b) − E(a,b′)| + |E(a′,b) + E(a′,b′)|`.
pub fn chsh_value<C: Correlation + ?Sized>(corr: &C, s: &ChshSettings) -> f64 {
    let p11 = corr.correlate(&s.a, &s.b);
    let p12 = corr.correlate(&s.a, &s.b_prime);
    let p21 = corr.correlate(&s.a_prime, &s.b);
    let p22 = corr.correlate(&s.a_prime, &s.b_prime);
    (p11 - p12).abs() + (p21 + p22).abs()
}

/// Result of [`chsh_optimize`]: angles in radians in the x–z plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshOptimum {
    /// `[a, a′, b, b′]`.
    pub angles: [f64; 4],
    pub settings: ChshSettings,
    pub value: f64,
}

const COARSE_STEPS: usize = 360;
const REFINE_ROUNDS: usize = 3;
const REFINE_HALF_WIDTH: usize = 10;

/// Maximizes the CHSH value over coplanar settings.
///
/// A 1° grid over all four angles is searched exhaustively, then three
/// rounds refine the grid tenfold around the incumbent. Ties go to the
/// lexicographically smallest `(a, a′, b, b′)` index tuple so the result does
/// not depend on evaluation order.
pub fn chsh_optimize<C: Correlation + ?Sized>(corr: &C) -> ChshOptimum {
    let step = std::f64::consts::TAU / COARSE_STEPS as f64;
    let coarse: Vec<f64> = (0..COARSE_STEPS).map(|k| k as f64 * step).collect();
    let best = search_grid(corr, &coarse, &coarse, &coarse, &coarse);
    let mut angles = best.angles;
    let mut value = best.value;

    let mut width = step;
    for _ in 0..REFINE_ROUNDS {
        width /= 10.0;
        let local = |center: f64| -> Vec<f64> {
            let half = REFINE_HALF_WIDTH as isize;
            (-half..=half).map(|k| center + k as f64 * width).collect()
        };
        let candidate = search_grid(corr, &local(angles[0]), &local(angles[1]), &local(angles[2]), &local(angles[3]));
        // the incumbent is on the local grid; keep it on ties
        if candidate.value > value {
            angles = candidate.angles;
            value = candidate.value;
        }
    }

    let settings = ChshSettings::coplanar(angles[0], angles[1], angles[2], angles[3]);
    ChshOptimum { angles, settings, value }
}

struct GridBest {
    angles: [f64; 4],
    value: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    index: [usize; 4],
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        match self.value.total_cmp(&other.value) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.index < other.index,
        }
    }
}

fn pick(x: Candidate, y: Candidate) -> Candidate {
    if y.better_than(&x) {
        y
    } else {
        x
    }
}

/// Exhaustive search over a product grid.
///
/// For fixed `(b, b′)` the `a` and `a′` terms separate, so each is maximized
/// independently over tabulated correlations.
fn search_grid<C: Correlation + ?Sized>(
    corr: &C,
    a_grid: &[f64],
    a_prime_grid: &[f64],
    b_grid: &[f64],
    b_prime_grid: &[f64],
) -> GridBest {
    let dirs = |grid: &[f64]| -> Vec<UnitVector3> { grid.iter().map(|&t| UnitVector3::in_xz_plane(t)).collect() };
    let (a_dirs, ap_dirs, b_dirs, bp_dirs) = (dirs(a_grid), dirs(a_prime_grid), dirs(b_grid), dirs(b_prime_grid));

    let table = |left: &[UnitVector3], right: &[UnitVector3]| -> Vec<Vec<f64>> {
        left.par_iter().map(|x| right.iter().map(|y| corr.correlate(x, y)).collect()).collect()
    };
    let t_ab = table(&a_dirs, &b_dirs);
    let t_abp = table(&a_dirs, &bp_dirs);
    let t_apb = table(&ap_dirs, &b_dirs);
    let t_apbp = table(&ap_dirs, &bp_dirs);

    let best = (0..b_dirs.len())
        .into_par_iter()
        .map(|j| {
            let mut local: Option<Candidate> = None;
            for k in 0..bp_dirs.len() {
                let (mut best_i, mut best_minus) = (0, f64::NEG_INFINITY);
                for i in 0..a_dirs.len() {
                    let v = (t_ab[i][j] - t_abp[i][k]).abs();
                    if v > best_minus {
                        best_minus = v;
                        best_i = i;
                    }
                }
                let (mut best_ip, mut best_plus) = (0, f64::NEG_INFINITY);
                for i in 0..ap_dirs.len() {
                    let v = (t_apb[i][j] + t_apbp[i][k]).abs();
                    if v > best_plus {
                        best_plus = v;
                        best_ip = i;
                    }
                }
                let cand = Candidate { value: best_minus + best_plus, index: [best_i, best_ip, j, k] };
                local = Some(match local {
                    Some(prev) => pick(prev, cand),
                    None => cand,
                });
            }
            local.expect("non-empty grid")
        })
        .reduce_with(pick)
        .expect("non-empty grid");

    let [i, ip, j, k] = best.index;
    GridBest { angles: [a_grid[i], a_prime_grid[ip], b_grid[j], b_prime_grid[k]], value: best.value }
}
