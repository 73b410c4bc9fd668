//! Seeded random matrices for tests and verification suites.
//!
//! Every generator takes an explicit RNG; [`rng`] builds the ChaCha stream
//! used throughout so that reports are reproducible from a seed.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::opalg::{ComplexMatrix, DensityMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / 2f64.sqrt()
    })
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-random isometry (`rows ≥ cols`): orthonormal columns from the QR
/// factorization of a Ginibre matrix, with the phases of `R`'s diagonal
/// absorbed so that the distribution is invariant.
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = random_matrix(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    random_isometry(rng, dim, dim)
}

/// Full-rank random state `G G† / tr(G G†)`.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let g = random_matrix(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let mut m = m.unscale(tr);
    // exact Hermiticity
    m = (&m + m.adjoint()).scale(0.5);
    DensityMatrix::new(m).expect("Ginibre state is valid")
}

/// Random pure state.
pub fn random_pure_density(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let v = random_isometry(rng, dim, 1);
    DensityMatrix::new(&v * v.adjoint()).expect("pure state is valid")
}

/// `k` Kraus blocks `X_j` cut from a Haar isometry `V: C^dim → C^{k·dim}`,
/// so that `Σ X_j† X_j = V† V = 1`.
pub fn random_kraus(rng: &mut impl Rng, dim: usize, k: usize) -> Vec<ComplexMatrix> {
    let v = random_isometry(rng, dim * k, dim);
    (0..k).map(|j| v.rows(j * dim, dim).into_owned()).collect()
}

/// Random mixture of `k` unitaries with random weights: a unitary-class
/// partition `{√p_j U_j}`.
pub fn random_unitary_mixture(rng: &mut impl Rng, dim: usize, k: usize) -> Vec<ComplexMatrix> {
    let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .map(|w| random_unitary(rng, dim).scale((w / total).sqrt()))
        .collect()
}

/// Random POVM with `m` effects `X_j† X_j`.
pub fn random_povm_effects(rng: &mut impl Rng, dim: usize, m: usize) -> Vec<ComplexMatrix> {
    random_kraus(rng, dim, m)
        .into_iter()
        .map(|x| {
            let e = x.adjoint() * &x;
            (&e + e.adjoint()).scale(0.5)
        })
        .collect()
}
