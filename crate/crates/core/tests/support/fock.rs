//! Brute-force two-mode squeezed vacuum in a truncated Fock space.
//!
//! The state is produced by exponentiating the squeezing generator
//! `a†b† − ab` numerically and the moments are read off with dense
//! quadrature operators, independent of any closed form.

use bellspace::epr::CrossMomentMatrix;
use bellspace::hilbert::{expectation, tensor, Operator, State};
use num_complex::Complex64;

/// Annihilation operator truncated to `dim` levels.
pub fn annihilation(dim: usize) -> Operator {
    let mut entries = vec![0.0; dim * dim];
    for n in 1..dim {
        entries[(n - 1) * dim + n] = (n as f64).sqrt();
    }
    Operator::from_real_rows(dim, &entries).unwrap()
}

pub fn position(dim: usize) -> Operator {
    let a = annihilation(dim);
    (&a + &a.adjoint()).scale_real(std::f64::consts::FRAC_1_SQRT_2)
}

pub fn momentum(dim: usize) -> Operator {
    let a = annihilation(dim);
    // (a − a†) / (i√2)
    (&a - &a.adjoint()).scale(Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2))
}

/// `exp(r (a†b† − ab)) |0,0⟩` with `dim` levels per mode.
///
/// The generator conserves `n_a − n_b`, so it is exponentiated on the
/// `{|n,n⟩}` block of the full two-mode operator.
pub fn squeezed_vacuum(r: f64, dim: usize) -> State {
    let a = annihilation(dim);
    let generator = &tensor(&a.adjoint(), &a.adjoint()) - &tensor(&a, &a);
    let diag: Vec<usize> = (0..dim).map(|n| n * dim + n).collect();
    let mut block = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (i, &row) in diag.iter().enumerate() {
        for (j, &col) in diag.iter().enumerate() {
            // H = i K is Hermitian, and exp(rK) = exp(−i r H)
            block[i * dim + j] = generator.entry(row, col) * Complex64::i();
        }
    }
    let h = Operator::from_rows(dim, &block).unwrap();
    let (values, vectors) = h.hermitian_eigen();
    let phases: Vec<Complex64> = values.iter().map(|&l| Complex64::new(0.0, -r * l).exp()).collect();
    // exp(−i r H)|0⟩ = V diag(phases) V† |0⟩
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (i, &full) in diag.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, phase) in phases.iter().enumerate() {
            acc += vectors.entry(i, k) * phase * vectors.entry(0, k).conj();
        }
        amplitudes[full] = acc;
    }
    State::normalized(amplitudes).unwrap()
}

/// Cross moments of the truncated squeezed vacuum.
pub fn tmsv_moments_oracle(r: f64, dim: usize) -> CrossMomentMatrix {
    let state = squeezed_vacuum(r, dim);
    let (q, p) = (position(dim), momentum(dim));
    let moment = |x: &Operator, y: &Operator| expectation(&state, &tensor(x, y)).unwrap().re;
    CrossMomentMatrix { a: moment(&q, &q), b: moment(&p, &q), c: moment(&q, &p), d: moment(&p, &p) }
}
