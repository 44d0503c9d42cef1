//! Families of commuting self-adjoint operators, and lattice translations.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::hilbert::{commutator_norm, HilbertError, Operator, TOLERANCE};

/// Commutator-norm threshold used when none is given.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContextError {
    #[error("a context needs at least one operator")]
    Empty,
    #[error("operator {0} is not Hermitian")]
    NonHermitian(usize),
    #[error("operators {first} and {second} do not commute (commutator norm {norm:e})")]
    NonCommuting { first: usize, second: usize, norm: f64 },
    #[error(transparent)]
    Dimension(#[from] HilbertError),
    #[error("lattice needs at least 2 sites, got {0}")]
    LatticeTooSmall(usize),
    #[error("site {site} outside a lattice of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },
    #[error("shift {shift} outside 0..{sites}")]
    ShiftOutOfRange { shift: usize, sites: usize },
    #[error("charge assignment {index} has {len} entries, expected {dim}")]
    ChargeLength { index: usize, len: usize, dim: usize },
}

/// Pairwise-commuting Hermitian operators on a shared space.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    operators: Vec<Operator>,
    tolerance: f64,
    worst_commutator: f64,
}

impl Context {
    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Largest pairwise commutator norm seen during validation.
    pub fn worst_commutator(&self) -> f64 {
        self.worst_commutator
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }
}

/// Accepts `ops` as a context iff each is Hermitian and every pair commutes
/// to within `tol` in spectral norm. On rejection the worst pair is reported.
pub fn make_context(ops: Vec<Operator>, tol: f64) -> Result<Context, ContextError> {
    let first = ops.first().ok_or(ContextError::Empty)?;
    let dim = first.dim();
    for op in &ops {
        if op.dim() != dim {
            return Err(HilbertError::DimensionMismatch { left: dim, right: op.dim() }.into());
        }
    }
    if let Some(index) = ops.iter().position(|op| !op.is_hermitian()) {
        return Err(ContextError::NonHermitian(index));
    }
    let mut worst = (0, 0, 0.0f64);
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let norm = commutator_norm(&ops[i], &ops[j])?;
            if norm > worst.2 {
                worst = (i, j, norm);
            }
        }
    }
    if worst.2 > tol {
        return Err(ContextError::NonCommuting { first: worst.0, second: worst.1, norm: worst.2 });
    }
    Ok(Context { operators: ops, tolerance: tol, worst_commutator: worst.2 })
}

fn cyclic_permutation(sites: usize, d: usize) -> Operator {
    let mut entries = vec![0.0; sites * sites];
    for j in 0..sites {
        entries[((j + d) % sites) * sites + j] = 1.0;
    }
    Operator::from_real_rows(sites, &entries).expect("square by construction")
}

/// Cyclic translations on a periodic lattice of `n` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationSystem {
    sites: usize,
    shift: Operator,
}

impl TranslationSystem {
    pub fn new(sites: usize) -> Result<Self, ContextError> {
        if sites < 2 {
            return Err(ContextError::LatticeTooSmall(sites));
        }
        Ok(Self { sites, shift: cyclic_permutation(sites, 1) })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn shift(&self) -> &Operator {
        &self.shift
    }

    /// `U^d`, built directly as the permutation `|j⟩ ↦ |j+d mod n⟩`.
    pub fn translation(&self, d: usize) -> Operator {
        cyclic_permutation(self.sites, d)
    }

    /// Orthogonal projector onto the sites in `subset`.
    pub fn projector(&self, subset: &[usize]) -> Result<Operator, ContextError> {
        let mut diag = vec![0.0; self.sites];
        for &site in subset {
            if site >= self.sites {
                return Err(ContextError::SiteOutOfRange { site, sites: self.sites });
            }
            diag[site] = 1.0;
        }
        Ok(Operator::diagonal(&diag))
    }

    /// Hermitian circulant generators `U^k + U^{-k}` and `i(U^k − U^{-k})`.
    pub fn generators(&self) -> Vec<Operator> {
        let i = Complex64::i();
        let mut out = Vec::new();
        for k in 1..=self.sites / 2 {
            let forward = self.translation(k);
            let backward = forward.adjoint();
            out.push(&forward + &backward);
            if 2 * k != self.sites {
                out.push((&forward - &backward).scale(i));
            }
        }
        out
    }
}

/// The commuting family of translation generators on an `n`-site ring.
pub fn translation_context(n: usize) -> Result<Context, ContextError> {
    let system = TranslationSystem::new(n)?;
    make_context(system.generators(), DEFAULT_TOLERANCE)
}

/// Diagonal charge operators `Q = diag(charges)` and their squares.
pub fn internal_symmetry_context(charges: &[Vec<i64>], dim: usize) -> Result<Context, ContextError> {
    let mut ops = Vec::with_capacity(2 * charges.len());
    for (index, assignment) in charges.iter().enumerate() {
        if assignment.len() != dim {
            return Err(ContextError::ChargeLength { index, len: assignment.len(), dim });
        }
        let values: Vec<f64> = assignment.iter().map(|&q| q as f64).collect();
        let q = Operator::diagonal(&values);
        ops.push(&q * &q);
        ops.insert(ops.len() - 1, q);
    }
    make_context(ops, DEFAULT_TOLERANCE)
}

/// `max |U^d P_S U^{d†} − P_{S+d}|` entrywise.
pub fn covariance_check(t: &TranslationSystem, subset: &[usize], d: usize) -> Result<f64, ContextError> {
    if d >= t.sites {
        return Err(ContextError::ShiftOutOfRange { shift: d, sites: t.sites });
    }
    let projector = t.projector(subset)?;
    let translated: Vec<usize> = subset.iter().map(|&s| (s + d) % t.sites).collect();
    let expected = t.projector(&translated)?;
    let u = t.translation(d);
    let conjugated = &(&u * &projector) * &u.adjoint();
    Ok((&conjugated - &expected).max_abs())
}

/// Summary of a context check, for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextVerdict {
    pub accepted: bool,
    pub worst_commutator: f64,
}

impl From<&Result<Context, ContextError>> for ContextVerdict {
    fn from(r: &Result<Context, ContextError>) -> Self {
        match r {
            Ok(c) => ContextVerdict { accepted: true, worst_commutator: c.worst_commutator },
            Err(ContextError::NonCommuting { norm, .. }) => ContextVerdict { accepted: false, worst_commutator: *norm },
            Err(_) => ContextVerdict { accepted: false, worst_commutator: f64::NAN },
        }
    }
}

/// Checks unitarity `U U† = I` and periodicity `U^n = I`.
pub fn translation_defects(t: &TranslationSystem) -> (f64, f64) {
    let id = Operator::identity(t.sites);
    let unitarity = (&(t.shift() * &t.shift().adjoint()) - &id).max_abs();
    let period = (&t.shift().pow(t.sites as u32) - &id).max_abs();
    debug_assert!(unitarity <= TOLERANCE && period <= TOLERANCE);
    (unitarity, period)
}
