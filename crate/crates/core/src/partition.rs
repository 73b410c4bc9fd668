//! Operational partitions of unity `{X_j}` with `Σ X_j† X_j = 1` and the
//! completely positive maps they generate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opalg::{
    c, check_finite, identity, max_diff, weyl_family, ComplexMatrix, DensityMatrix,
};

/// Residual tolerance for the defining relation and for classification.
pub const PARTITION_TOL: f64 = 1e-10;

/// Ordered from finest to coarsest: every unitary partition is bistochastic
/// and every bistochastic partition is general.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Unitary,
    Bistochastic,
    General,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Unitary => "unitary",
            Classification::Bistochastic => "bistochastic",
            Classification::General => "general",
        })
    }
}

#[derive(Debug, Clone)]
pub struct OperationalPartition {
    dim: usize,
    elements: Vec<ComplexMatrix>,
    classification: Classification,
    norm_residual: f64,
    weights: Option<Vec<f64>>,
}

impl OperationalPartition {
    /// Validates `Σ X_j† X_j = 1` and assigns the tightest classification.
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = match elements.first() {
            Some(x) => x.nrows(),
            None => return Err(Error::Invalid("partition has no elements".into())),
        };
        if dim == 0 {
            return Err(Error::Invalid(
                "partition elements are empty matrices".into(),
            ));
        }
        for (j, x) in elements.iter().enumerate() {
            check_finite(x)?;
            if x.nrows() != dim || x.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "element {j} is {}x{}, expected {dim}x{dim}",
                    x.nrows(),
                    x.ncols()
                )));
            }
        }
        let one = identity(dim);
        let mut left = ComplexMatrix::zeros(dim, dim);
        let mut right = ComplexMatrix::zeros(dim, dim);
        for x in &elements {
            left += x.adjoint() * x;
            right += x * x.adjoint();
        }
        let norm_residual = max_diff(&left, &one);
        if norm_residual > PARTITION_TOL {
            return Err(Error::NotAPartition {
                residual: norm_residual,
            });
        }

        let mut classification = if max_diff(&right, &one) <= PARTITION_TOL {
            Classification::Bistochastic
        } else {
            Classification::General
        };
        let mut weights = None;
        if classification == Classification::Bistochastic {
            let mu: Vec<f64> = elements
                .iter()
                .map(|x| (x.adjoint() * x).trace().re / dim as f64)
                .collect();
            let proportional = elements.iter().zip(&mu).all(|(x, &m)| {
                let scaled = one.scale(m);
                m > 0.0
                    && max_diff(&(x.adjoint() * x), &scaled) <= PARTITION_TOL
                    && max_diff(&(x * x.adjoint()), &scaled) <= PARTITION_TOL
            });
            if proportional && (mu.iter().sum::<f64>() - 1.0).abs() <= PARTITION_TOL {
                classification = Classification::Unitary;
                weights = Some(mu);
            }
        }
        Ok(OperationalPartition {
            dim,
            elements,
            classification,
            norm_residual,
            weights,
        })
    }

    /// The unit of the composition semigroup, `{1}`.
    pub fn trivial(dim: usize) -> Self {
        OperationalPartition {
            dim,
            elements: vec![identity(dim)],
            classification: Classification::Unitary,
            norm_residual: 0.0,
            weights: Some(vec![1.0]),
        }
    }

    /// `{d⁻¹ W(k,l)}` in the standard basis, `k` outer and `l` inner.
    pub fn weyl(d: usize) -> Self {
        let scale = 1.0 / d as f64;
        Self::new(weyl_family(d).into_iter().map(|w| w.scale(scale)).collect())
            .expect("Weyl partition is a partition")
    }

    /// Weyl partition written in the basis given by the columns of `basis`.
    pub fn weyl_in_basis(basis: &ComplexMatrix) -> Result<Self> {
        let d = basis.nrows();
        let scale = 1.0 / d as f64;
        Self::new(
            weyl_family(d)
                .into_iter()
                .map(|w| (basis * w * basis.adjoint()).scale(scale))
                .collect(),
        )
    }

    /// Single-element partition `{U}`.
    pub fn from_unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Projective partition onto the standard basis vectors.
    pub fn computational(dim: usize) -> Self {
        Self::new(
            (0..dim)
                .map(|i| {
                    let mut p = ComplexMatrix::zeros(dim, dim);
                    p[(i, i)] = c(1.0, 0.0);
                    p
                })
                .collect(),
        )
        .expect("basis projectors form a partition")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn norm_residual(&self) -> f64 {
        self.norm_residual
    }

    /// `μ_j` with `X_j† X_j = μ_j 1`, only for unitary partitions.
    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    fn check_dim(&self, what: &str, dim: usize) -> Result<()> {
        if dim != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{what} has dimension {dim}, partition acts on {}",
                self.dim
            )));
        }
        Ok(())
    }

    /// `X∘Y = {X_j Y_l}` with `j` outer and `l` inner.
    pub fn compose(&self, other: &OperationalPartition) -> Result<OperationalPartition> {
        self.check_dim("composed partition", other.dim)?;
        let mut elements = Vec::with_capacity(self.k() * other.k());
        for x in &self.elements {
            for y in &other.elements {
                elements.push(x * y);
            }
        }
        OperationalPartition::new(elements)
    }

    /// Heisenberg picture `Λ_X(A) = Σ X_j† A X_j`.
    pub fn apply_heisenberg(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("operator is not square".into()));
        }
        self.check_dim("operator", a.nrows())?;
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for x in &self.elements {
            out += x.adjoint() * a * x;
        }
        Ok(out)
    }

    /// Schrödinger picture `Λ_Xᵀ(ρ) = Σ X_j ρ X_j†`.
    pub fn apply_schrodinger(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim("state", rho.dim())?;
        DensityMatrix::new(self.apply_schrodinger_raw(rho.matrix()))
    }

    pub(crate) fn apply_schrodinger_raw(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for x in &self.elements {
            out += x * m * x.adjoint();
        }
        out
    }

    /// `σ[X]_{ij} = tr(σ X_j† X_i)`.
    pub fn correlation(&self, sigma: &DensityMatrix) -> Result<PartitionCorrelation> {
        self.check_dim("state", sigma.dim())?;
        let k = self.k();
        // σ X_j† once per column
        let sx: Vec<ComplexMatrix> = self
            .elements
            .iter()
            .map(|x| sigma.matrix() * x.adjoint())
            .collect();
        let mut m = ComplexMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = trace_of_product(&sx[j], &self.elements[i]);
            }
        }
        Ok(PartitionCorrelation {
            k,
            matrix: DensityMatrix::new(m)?,
        })
    }
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> num_complex::Complex64 {
    let n = a.nrows();
    let mut s = c(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Free-function form of [`OperationalPartition::new`].
pub fn validate_and_classify(elements: Vec<ComplexMatrix>) -> Result<OperationalPartition> {
    OperationalPartition::new(elements)
}

pub fn compose(x: &OperationalPartition, y: &OperationalPartition) -> Result<OperationalPartition> {
    x.compose(y)
}

pub fn apply_heisenberg(x: &OperationalPartition, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    x.apply_heisenberg(a)
}

pub fn apply_schrodinger(x: &OperationalPartition, rho: &DensityMatrix) -> Result<DensityMatrix> {
    x.apply_schrodinger(rho)
}

pub fn partition_correlation(
    sigma: &DensityMatrix,
    x: &OperationalPartition,
) -> Result<PartitionCorrelation> {
    x.correlation(sigma)
}

/// The k×k correlation matrix `σ[X]` of a state and a partition.
#[derive(Debug, Clone)]
pub struct PartitionCorrelation {
    pub k: usize,
    pub matrix: DensityMatrix,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{diag, von_neumann_entropy, weyl};
    use crate::random::{random_density, random_kraus, random_matrix, random_unitary_mixture, rng};

    fn projectors() -> OperationalPartition {
        OperationalPartition::new(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn classify_examples() {
        let t = OperationalPartition::new(vec![identity(3)]).unwrap();
        assert_eq!(t.classification(), Classification::Unitary);
        assert_eq!(t.k(), 1);
        assert_eq!(t.weights().unwrap(), &[1.0]);

        for d in 2..=4 {
            let w = OperationalPartition::weyl(d);
            assert_eq!(w.classification(), Classification::Unitary);
            assert_eq!(w.k(), d * d);
            for &mu in w.weights().unwrap() {
                assert!((mu - 1.0 / (d * d) as f64).abs() < 1e-14);
            }
        }

        let p = projectors();
        assert_eq!(p.classification(), Classification::Bistochastic);
        assert!(p.norm_residual() < 1e-15);
    }

    #[test]
    fn general_and_rejected_partitions() {
        // amplitude-damping style Kraus pair: not unital
        let g = 0.3f64;
        let k0 = diag(&[1.0, (1.0 - g).sqrt()]);
        let mut k1 = ComplexMatrix::zeros(2, 2);
        k1[(0, 1)] = c(g.sqrt(), 0.0);
        let p = OperationalPartition::new(vec![k0, k1]).unwrap();
        assert_eq!(p.classification(), Classification::General);

        match OperationalPartition::new(vec![diag(&[1.0, 0.5])]) {
            Err(Error::NotAPartition { residual }) => assert!((residual - 0.75).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert!(OperationalPartition::new(vec![identity(2), identity(3)]).is_err());
        assert!(OperationalPartition::new(vec![]).is_err());
    }

    #[test]
    fn compose_unit_and_cardinality() {
        let mut r = rng(11);
        let x = OperationalPartition::new(random_kraus(&mut r, 3, 4)).unwrap();
        let i = OperationalPartition::trivial(3);
        for composed in [x.compose(&i).unwrap(), i.compose(&x).unwrap()] {
            assert_eq!(composed.k(), x.k());
            for (a, b) in composed.elements().iter().zip(x.elements()) {
                assert!(max_diff(a, b) < 1e-15);
            }
        }
        let y = OperationalPartition::new(random_kraus(&mut r, 3, 2)).unwrap();
        let xy = x.compose(&y).unwrap();
        assert_eq!(xy.k(), 8);
        // lexicographic order, j outer
        assert!(max_diff(&xy.elements()[3], &(&x.elements()[1] * &y.elements()[1])) < 1e-15);
        assert!(x.compose(&OperationalPartition::trivial(2)).is_err());
    }

    #[test]
    fn compose_maps_reverse_order() {
        let mut r = rng(12);
        let x = OperationalPartition::new(random_kraus(&mut r, 2, 3)).unwrap();
        let y = OperationalPartition::new(random_kraus(&mut r, 2, 2)).unwrap();
        let a = random_matrix(&mut r, 2, 2);
        let lhs = x.compose(&y).unwrap().apply_heisenberg(&a).unwrap();
        let rhs = y
            .apply_heisenberg(&x.apply_heisenberg(&a).unwrap())
            .unwrap();
        assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn compose_of_unitary_partitions_is_unitary() {
        let w2 = OperationalPartition::weyl(2);
        let shifted = OperationalPartition::new(vec![
            weyl(2, 1, 0).unwrap().scale(0.6f64.sqrt()),
            weyl(2, 1, 1).unwrap().scale(0.4f64.sqrt()),
        ])
        .unwrap();
        let composed = w2.compose(&shifted).unwrap();
        assert_eq!(composed.classification(), Classification::Unitary);
        let mut r = rng(13);
        let a = OperationalPartition::new(random_unitary_mixture(&mut r, 3, 3)).unwrap();
        let b = OperationalPartition::new(random_unitary_mixture(&mut r, 3, 2)).unwrap();
        assert_eq!(a.classification(), Classification::Unitary);
        assert_eq!(
            a.compose(&b).unwrap().classification(),
            Classification::Unitary
        );
    }

    #[test]
    fn heisenberg_examples() {
        let mut r = rng(14);
        let x = OperationalPartition::new(random_kraus(&mut r, 3, 3)).unwrap();
        assert!(max_diff(&x.apply_heisenberg(&identity(3)).unwrap(), &identity(3)) < 1e-10);
        let a = random_matrix(&mut r, 3, 3);
        let t = OperationalPartition::trivial(3);
        assert!(max_diff(&t.apply_heisenberg(&a).unwrap(), &a) < 1e-15);

        let a = random_matrix(&mut r, 2, 2);
        let twirled = OperationalPartition::weyl(2).apply_heisenberg(&a).unwrap();
        let expect = identity(2).map(|z| z * a.trace() / 2.0);
        assert!(max_diff(&twirled, &expect) < 1e-12);
        assert!(x.apply_heisenberg(&identity(2)).is_err());
    }

    #[test]
    fn schrodinger_examples() {
        let mut r = rng(15);
        let rho = random_density(&mut r, 3);
        let t = OperationalPartition::trivial(3);
        assert!(max_diff(t.apply_schrodinger(&rho).unwrap().matrix(), rho.matrix()) < 1e-15);
        let out = OperationalPartition::weyl(3)
            .apply_schrodinger(&rho)
            .unwrap();
        assert!(max_diff(out.matrix(), &identity(3).scale(1.0 / 3.0)) < 1e-12);

        for _ in 0..20 {
            let rho = random_density(&mut r, 4);
            let x = OperationalPartition::new(random_unitary_mixture(&mut r, 4, 3)).unwrap();
            let out = x.apply_schrodinger(&rho).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
            assert!(
                von_neumann_entropy(&out).unwrap() >= von_neumann_entropy(&rho).unwrap() - 1e-9
            );
        }
    }

    #[test]
    fn correlation_examples() {
        let sigma = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let t = OperationalPartition::trivial(2)
            .correlation(&sigma)
            .unwrap();
        assert_eq!(t.k, 1);
        assert!((t.matrix.matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);

        let p = projectors().correlation(&sigma).unwrap();
        assert!(max_diff(p.matrix.matrix(), &diag(&[0.3, 0.7])) < 1e-15);

        let w = OperationalPartition::weyl(2)
            .correlation(&DensityMatrix::maximally_mixed(2))
            .unwrap();
        assert!(max_diff(w.matrix.matrix(), &identity(4).scale(0.25)) < 1e-15);
    }

    #[test]
    fn correlation_entropy_bound_and_saturation() {
        let mut r = rng(16);
        for _ in 0..30 {
            let n = 2 + (r.random::<u32>() % 4) as usize;
            let k = 1 + (r.random::<u32>() % 5) as usize;
            let sigma = random_density(&mut r, n);
            let x = OperationalPartition::new(random_kraus(&mut r, n, k)).unwrap();
            let s = von_neumann_entropy(&x.correlation(&sigma).unwrap().matrix).unwrap();
            let s0 = von_neumann_entropy(&sigma).unwrap();
            assert!(s <= s0 + (n as f64).ln() + 1e-8);
            assert!(s <= s0 + (k as f64).ln() + 1e-8);

            let w = OperationalPartition::weyl(n).correlation(&sigma).unwrap();
            let sw = von_neumann_entropy(&w.matrix).unwrap();
            assert!((sw - s0 - (n as f64).ln()).abs() < 1e-8);
        }
    }

    use rand::Rng;
}
