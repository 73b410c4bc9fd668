//! Finite quantum dynamical systems, multi-time correlation matrices and
//! entropy-rate estimators.
//!
//! Multi-indices `(i_1, …, i_n)` are encoded little-endian in time:
//! `i_1 + k·i_2 + … + k^{n-1}·i_n`. As a Kronecker product the last time
//! slot is therefore the leftmost factor.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::opalg::{
    entropy_of_spectrum, hermitian_eigen, identity, max_diff, partial_trace, purify_with,
    tensor_guarded, von_neumann_entropy, ComplexMatrix, DensityMatrix, Guard,
};
use crate::partition::OperationalPartition;

/// Largest accepted `‖UρU† − ρ‖_max`.
pub const INVARIANCE_TOL: f64 = 1e-8;
pub const UNITARY_TOL: f64 = 1e-10;

/// A dynamics together with an invariant reference state that can produce
/// the multi-time correlation matrix of a partition.
pub trait DynamicalSystem {
    type Partition;

    fn correlation_state(
        &self,
        x: &Self::Partition,
        n: usize,
        guard: Guard,
    ) -> Result<CorrelationState>;
}

/// `(M_dim, Θ(A) = U†AU, ω = tr(ρ ·))`.
#[derive(Debug, Clone)]
pub struct FiniteDynamicalSystem {
    unitary: ComplexMatrix,
    ref_state: DensityMatrix,
    invariance_residual: f64,
}

impl FiniteDynamicalSystem {
    pub fn new(unitary: ComplexMatrix, ref_state: DensityMatrix) -> Result<Self> {
        if !unitary.is_square() || unitary.nrows() != ref_state.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state has dimension {}",
                unitary.nrows(),
                unitary.ncols(),
                ref_state.dim()
            )));
        }
        let residual = max_diff(&(unitary.adjoint() * &unitary), &identity(unitary.nrows()));
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        let invariance_residual = invariance_residual(&unitary, &ref_state);
        if invariance_residual > INVARIANCE_TOL {
            return Err(Error::NotInvariant {
                residual: invariance_residual,
            });
        }
        Ok(FiniteDynamicalSystem {
            unitary,
            ref_state,
            invariance_residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.ref_state.dim()
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn ref_state(&self) -> &DensityMatrix {
        &self.ref_state
    }

    pub fn check_invariance(&self) -> f64 {
        self.invariance_residual
    }

    /// `Θ^m(A) = U†^m A U^m` for `m = 0..n`.
    fn evolved(&self, x: &OperationalPartition, n: usize) -> Vec<Vec<ComplexMatrix>> {
        let mut out = Vec::with_capacity(n);
        let mut current: Vec<ComplexMatrix> = x.elements().to_vec();
        for m in 0..n {
            if m > 0 {
                current = current
                    .iter()
                    .map(|a| self.unitary.adjoint() * a * &self.unitary)
                    .collect();
            }
            out.push(current.clone());
        }
        out
    }
}

/// `‖UρU† − ρ‖_max`.
pub fn invariance_residual(unitary: &ComplexMatrix, rho: &DensityMatrix) -> f64 {
    max_diff(&(unitary * rho.matrix() * unitary.adjoint()), rho.matrix())
}

impl DynamicalSystem for FiniteDynamicalSystem {
    type Partition = OperationalPartition;

    fn correlation_state(
        &self,
        x: &OperationalPartition,
        n: usize,
        guard: Guard,
    ) -> Result<CorrelationState> {
        correlation_matrix(self, x, n, guard)
    }
}

/// `ρ[Xⁿ]`, a `kⁿ × kⁿ` density matrix.
#[derive(Debug, Clone)]
pub struct CorrelationState {
    pub n: usize,
    pub k: usize,
    pub state: DensityMatrix,
}

impl CorrelationState {
    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    /// Partial trace over the last time slot, giving `ρ[X^{n-1}]`.
    pub fn marginal(&self) -> Result<CorrelationState> {
        if self.n == 0 {
            return Err(Error::Invalid("no time slot to trace out".into()));
        }
        let dims = vec![self.k; self.n];
        let keep: Vec<usize> = (1..self.n).collect();
        let m = partial_trace(self.state.matrix(), &dims, &keep)?;
        Ok(CorrelationState {
            n: self.n - 1,
            k: self.k,
            state: DensityMatrix::new(m)?,
        })
    }

    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(&self.state)
    }
}

/// Gram-matrix construction of `ρ[Xⁿ]` from precomputed evolved elements
/// `evolved[m][j] = Θ^m(X_j)` and the reference state on the same space.
///
/// The operators `Y_ī = Θ^{n-1}(X_{i_n})···Θ(X_{i_2})X_{i_1}` are built by
/// extending shared prefixes one time step at a time; entries are
/// `ω(Y_j̄† Y_ī) = Σ_ab conj(Y_j̄)_ab (Y_ī ρ)_ab`.
pub fn correlation_from_evolved(
    state: &DensityMatrix,
    evolved: &[Vec<ComplexMatrix>],
    guard: Guard,
) -> Result<CorrelationState> {
    let n = evolved.len();
    let k = evolved.first().map(|e| e.len()).unwrap_or(1);
    if evolved.iter().any(|e| e.len() != k) {
        return Err(Error::Invalid(
            "time steps disagree on partition size".into(),
        ));
    }
    let size = guard.check_pow("correlation matrix", k, n)?;
    let dim = state.dim();

    let mut ys: Vec<ComplexMatrix> = vec![identity(dim)];
    for step in evolved {
        let mut next = Vec::with_capacity(ys.len() * k);
        // new slot is the slowest-varying index
        for x in step {
            for y in &ys {
                next.push(x * y);
            }
        }
        ys = next;
    }
    debug_assert_eq!(ys.len(), size);

    let yr: Vec<ComplexMatrix> = ys.iter().map(|y| y * state.matrix()).collect();
    let mut m = ComplexMatrix::zeros(size, size);
    for i in 0..size {
        for j in i..size {
            let v = ys[j]
                .iter()
                .zip(yr[i].iter())
                .fold(num_complex::Complex64::new(0.0, 0.0), |acc, (a, b)| {
                    acc + a.conj() * b
                });
            m[(i, j)] = v;
            if i != j {
                m[(j, i)] = v.conj();
            }
        }
    }
    Ok(CorrelationState {
        n,
        k,
        state: DensityMatrix::new(m)?,
    })
}

/// Multi-time correlation matrix `ρ[Xⁿ]_{ī,j̄} = ω(Y_j̄† Y_ī)`.
pub fn correlation_matrix(
    system: &FiniteDynamicalSystem,
    x: &OperationalPartition,
    n: usize,
    guard: Guard,
) -> Result<CorrelationState> {
    if x.dim() != system.dim() {
        return Err(Error::DimensionMismatch(format!(
            "partition acts on {}, system has dimension {}",
            x.dim(),
            system.dim()
        )));
    }
    guard.check_pow("correlation matrix", x.k(), n)?;
    correlation_from_evolved(system.ref_state(), &system.evolved(x, n), guard)
}

/// Entropies `S_n` for `n = 1..=n_max` with both finite-n rate estimators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyTrace {
    pub entropies: Vec<f64>,
    pub averages: Vec<f64>,
    pub increments: Vec<f64>,
}

impl EntropyTrace {
    pub fn from_entropies(entropies: Vec<f64>) -> Self {
        let averages = entropies
            .iter()
            .enumerate()
            .map(|(i, s)| s / (i + 1) as f64)
            .collect();
        let mut prev = 0.0;
        let increments = entropies
            .iter()
            .map(|&s| {
                let inc = s - prev;
                prev = s;
                inc
            })
            .collect();
        EntropyTrace {
            entropies,
            averages,
            increments,
        }
    }

    pub fn n_max(&self) -> usize {
        self.entropies.len()
    }

    /// `S_n − S_{n−1}` at `n = n_max`.
    pub fn final_increment(&self) -> f64 {
        self.increments.last().copied().unwrap_or(0.0)
    }
}

pub fn entropy_trace<S: DynamicalSystem>(
    system: &S,
    x: &S::Partition,
    n_max: usize,
    guard: Guard,
) -> Result<EntropyTrace> {
    let mut entropies = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        entropies.push(system.correlation_state(x, n, guard)?.entropy()?);
    }
    Ok(EntropyTrace::from_entropies(entropies))
}

/// Family member with the largest final increment.
#[derive(Debug, Clone)]
pub struct BestRate {
    pub index: usize,
    pub rate: f64,
    pub traces: Vec<EntropyTrace>,
}

/// Maximum of the finite-n rate over a user-supplied family; ties keep the
/// earliest member.
pub fn best_rate_over_family<S: DynamicalSystem>(
    system: &S,
    family: &[S::Partition],
    n_max: usize,
    guard: Guard,
) -> Result<BestRate> {
    if family.is_empty() {
        return Err(Error::Invalid("empty partition family".into()));
    }
    let traces = family
        .iter()
        .map(|x| entropy_trace(system, x, n_max, guard))
        .collect::<Result<Vec<_>>>()?;
    let mut index = 0;
    for (i, t) in traces.iter().enumerate() {
        if t.final_increment() > traces[index].final_increment() {
            index = i;
        }
    }
    Ok(BestRate {
        index,
        rate: traces[index].final_increment(),
        traces,
    })
}

/// `ρ̂[Xⁿ] = [Θ̂ᵀΛ̂ᵀ_X]ⁿ(|Ω⟩⟨Ω|)` on the system ⊗ ancilla space.
///
/// `|Ω⟩` is the purification of the reference state, `X̂_j = X_j ⊗ 1` and
/// the lifted dynamics is `U ⊗ conj(V†UV)` with `V` the eigenbasis used for
/// the purification, which leaves `|Ω⟩` fixed.
pub fn gns_correlation_state(
    system: &FiniteDynamicalSystem,
    x: &OperationalPartition,
    n: usize,
    guard: Guard,
) -> Result<DensityMatrix> {
    let eig = hermitian_eigen(system.ref_state().matrix())?;
    let omega = purify_with(&eig);
    let v = &eig.vectors;
    let ancilla_unitary = (v.adjoint() * system.unitary() * v).map(|z| z.conj());
    gns_with_dilation(system, x, n, omega.amplitudes(), &ancilla_unitary, guard)
}

/// Same construction with a caller-chosen purification vector and ancilla
/// unitary (the lifted dynamics is `U ⊗ ancilla_unitary`).
pub fn gns_with_dilation(
    system: &FiniteDynamicalSystem,
    x: &OperationalPartition,
    n: usize,
    omega: &nalgebra::DVector<num_complex::Complex64>,
    ancilla_unitary: &ComplexMatrix,
    guard: Guard,
) -> Result<DensityMatrix> {
    let d = system.dim();
    if x.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "partition acts on {}, system has dimension {d}",
            x.dim()
        )));
    }
    guard.check_pow("purified operator entries", d, 4)?;
    let lifted_u = tensor_guarded(system.unitary(), ancilla_unitary, guard)?;
    let one = identity(ancilla_unitary.nrows());
    let lifted_x = x
        .elements()
        .iter()
        .map(|e| tensor_guarded(e, &one, guard))
        .collect::<Result<Vec<_>>>()?;

    let mut r = omega * omega.adjoint();
    for _ in 0..n {
        let mut next = ComplexMatrix::zeros(r.nrows(), r.ncols());
        for xh in &lifted_x {
            next += xh * &r * xh.adjoint();
        }
        r = &lifted_u * next * lifted_u.adjoint();
    }
    let r = (&r + r.adjoint()).scale(0.5);
    DensityMatrix::new(r)
}

/// Entropy of the purified correlation state.
pub fn gns_entropy(
    system: &FiniteDynamicalSystem,
    x: &OperationalPartition,
    n: usize,
    guard: Guard,
) -> Result<f64> {
    let rho = gns_correlation_state(system, x, n, guard)?;
    entropy_of_spectrum(&crate::opalg::hermitian_spectrum(rho.matrix())?.values)
}

/// Random finite system: a random state and a unitary diagonal in its
/// eigenbasis with random phases, so the state is invariant.
pub fn random_system(rng: &mut impl rand::Rng, dim: usize) -> FiniteDynamicalSystem {
    let rho = crate::random::random_density(rng, dim);
    let eig = hermitian_eigen(rho.matrix()).expect("state is Hermitian");
    let phases = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        (0..dim).map(|_| {
            num_complex::Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
        }),
    ));
    let u = &eig.vectors * phases * eig.vectors.adjoint();
    FiniteDynamicalSystem::new(u, rho).expect("commuting unitary leaves the state invariant")
}
