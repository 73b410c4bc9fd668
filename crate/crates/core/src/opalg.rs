//! Dense complex matrix algebra and entropy primitives.
//!
//! Everything is built on `nalgebra::DMatrix<Complex64>`. Entropies are in
//! nats. Eigenvalues in `(-1e-8, 1e-12]` are treated as zero; anything more
//! negative than `-1e-8` means the input was not a state.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Hermiticity tolerance for density matrices.
pub const HERM_TOL: f64 = 1e-10;
/// Most negative eigenvalue still accepted as numerical PSD drift.
pub const PSD_TOL: f64 = 1e-8;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues at or below this contribute nothing to entropies.
pub const CLIP: f64 = 1e-12;
/// Hermiticity tolerance accepted by [`hermitian_eigen`].
pub const EIGEN_HERM_TOL: f64 = 1e-8;

pub const DEFAULT_GUARD: usize = 1 << 16;

/// Upper bound on any matrix dimension the library is asked to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guard(pub usize);

impl Default for Guard {
    fn default() -> Self {
        Guard(DEFAULT_GUARD)
    }
}

impl Guard {
    pub fn check(&self, what: &str, requested: u128) -> Result<usize> {
        if requested > self.0 as u128 {
            return Err(Error::GuardExceeded {
                what: what.to_string(),
                requested,
                guard: self.0,
            });
        }
        Ok(requested as usize)
    }

    /// Checks `base^exp` without overflowing.
    pub fn check_pow(&self, what: &str, base: usize, exp: usize) -> Result<usize> {
        let mut acc: u128 = 1;
        for _ in 0..exp {
            acc = acc.saturating_mul(base as u128);
            if acc > self.0 as u128 {
                return self.check(what, acc);
            }
        }
        self.check(what, acc)
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// Builds a real diagonal matrix.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

/// Largest entrywise modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖a − b‖_max`, or infinity when the shapes differ.
pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_diff(m, &m.adjoint())
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.trace()
}

/// `|v⟩⟨v|`.
pub fn projector(v: &DVector<Complex64>) -> ComplexMatrix {
    v * v.adjoint()
}

/// Standard basis vector `e_i` in dimension `dim`.
pub fn basis(dim: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    v[i] = c(1.0, 0.0);
    v
}

/// Kronecker product under the default dimension guard.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_guarded(a, b, Guard::default())
}

/// Kronecker product; block `(i, j)` of the result is `a[i, j]·b`.
pub fn tensor_guarded(a: &ComplexMatrix, b: &ComplexMatrix, guard: Guard) -> Result<ComplexMatrix> {
    guard.check("tensor rows", a.nrows() as u128 * b.nrows() as u128)?;
    guard.check("tensor cols", a.ncols() as u128 * b.ncols() as u128)?;
    Ok(a.kronecker(b))
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all(factors: &[ComplexMatrix], guard: Guard) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::from_element(1, 1, c(1.0, 0.0));
    for f in factors {
        acc = tensor_guarded(&acc, f, guard)?;
    }
    Ok(acc)
}

/// `m^{⊗n}`; `n = 0` gives the 1×1 unit.
pub fn tensor_power(m: &ComplexMatrix, n: usize, guard: Guard) -> Result<ComplexMatrix> {
    guard.check_pow("tensor power", m.nrows().max(m.ncols()), n)?;
    let mut acc = ComplexMatrix::from_element(1, 1, c(1.0, 0.0));
    for _ in 0..n {
        acc = acc.kronecker(m);
    }
    Ok(acc)
}

/// Traces out every factor not listed in `keep`. Factor 0 is the leftmost
/// (slowest varying) Kronecker factor.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != total || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!(
            "factor dims {dims:?} do not multiply to matrix dimension {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut keep_mask = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::OutOfRange(format!(
                "factor {k} of {} in partial trace",
                dims.len()
            )));
        }
        keep_mask[k] = true;
    }

    let nf = dims.len();
    let mut strides = vec![1usize; nf];
    for f in (0..nf.saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    let kept: Vec<usize> = (0..nf).filter(|&f| keep_mask[f]).collect();
    let traced: Vec<usize> = (0..nf).filter(|&f| !keep_mask[f]).collect();
    let out_dim: usize = kept.iter().map(|&f| dims[f]).product();
    let tr_dim: usize = traced.iter().map(|&f| dims[f]).product();

    // offset in the full index for a multi-index over a subset of factors
    let offset = |factors: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &f in factors.iter().rev() {
            off += (idx % dims[f]) * strides[f];
            idx /= dims[f];
        }
        off
    };
    let kept_off: Vec<usize> = (0..out_dim).map(|i| offset(&kept, i)).collect();
    let tr_off: Vec<usize> = (0..tr_dim).map(|i| offset(&traced, i)).collect();

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for i in 0..out_dim {
        for j in 0..out_dim {
            let mut s = c(0.0, 0.0);
            for &t in &tr_off {
                s += m[(kept_off[i] + t, kept_off[j] + t)];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// Real eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub dim: usize,
}

impl Spectrum {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Spectrum together with the eigenbasis used to produce it; column `i` of
/// `vectors` belongs to `spectrum.values[i]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub spectrum: Spectrum,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `‖M − VΛV†‖_max` against the given matrix.
    pub fn reconstruction_residual(&self, m: &ComplexMatrix) -> f64 {
        max_diff(m, &self.apply(|x| x))
    }

    /// `V f(Λ) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.vectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.spectrum.values.iter().enumerate() {
            let fl = f(lam);
            scaled.column_mut(j).scale_mut(fl);
        }
        scaled * v.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Exactly diagonal inputs are handled without iteration so that degenerate
/// states such as `I/d` keep the standard basis (ordered by a stable sort).
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_finite(m)?;
    let residual = hermiticity_residual(m);
    if residual > EIGEN_HERM_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let n = m.nrows();

    let is_diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == c(0.0, 0.0)));
    let (vals, vecs): (Vec<f64>, ComplexMatrix) = if is_diagonal {
        ((0..n).map(|i| m[(i, i)].re).collect(), identity(n))
    } else {
        // symmetrize so the solver sees an exactly Hermitian matrix
        let h = (m + m.adjoint()).scale(0.5);
        let eig = h.clone().symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if vals.iter().all(|v| v.is_finite())
            && eigen_residual(&h, &vals, &eig.eigenvectors) <= 1e-10 * scale
        {
            (vals, eig.eigenvectors)
        } else {
            jacobi_eigen(h)
        }
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &vecs.column(src));
    }
    Ok(HermitianEigen {
        spectrum: Spectrum {
            values: order.iter().map(|&i| vals[i]).collect(),
            dim: n,
        },
        vectors,
    })
}

fn eigen_residual(h: &ComplexMatrix, vals: &[f64], vecs: &ComplexMatrix) -> f64 {
    let mut scaled = vecs.clone();
    for (j, &lam) in vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(lam);
    }
    let r = max_diff(h, &(scaled * vecs.adjoint()));
    if r.is_finite() {
        r
    } else {
        f64::INFINITY
    }
}

/// Cyclic complex Jacobi sweeps; slower than the QR solver but immune to its
/// occasional breakdown on highly structured input.
fn jacobi_eigen(mut a: ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.nrows();
    let mut v = identity(n);
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)].norm();
                if b == 0.0 {
                    continue;
                }
                let phase = (a[(p, q)] / b).conj();
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * b);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let (vpp, vpq) = (c(cs, 0.0), c(sn, 0.0));
                let (vqp, vqq) = (phase * -sn, phase * cs);
                for r in 0..n {
                    let (x, y) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = x * vpp + y * vqp;
                    a[(r, q)] = x * vpq + y * vqq;
                    let (x, y) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = x * vpp + y * vqp;
                    v[(r, q)] = x * vpq + y * vqq;
                }
                for r in 0..n {
                    let (x, y) = (a[(p, r)], a[(q, r)]);
                    a[(p, r)] = vpp.conj() * x + vqp.conj() * y;
                    a[(q, r)] = vpq.conj() * x + vqq.conj() * y;
                }
                a[(p, q)] = c(0.0, 0.0);
                a[(q, p)] = c(0.0, 0.0);
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

pub fn hermitian_spectrum(m: &ComplexMatrix) -> Result<Spectrum> {
    Ok(hermitian_eigen(m)?.spectrum)
}

/// Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    herm_residual: f64,
    psd_residual: f64,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_finite(&matrix)?;
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::NotAState(format!(
                "shape {}x{} is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm_residual = hermiticity_residual(&matrix);
        if herm_residual > HERM_TOL {
            return Err(Error::NotAState(format!(
                "Hermiticity residual {herm_residual:.3e}"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotAState(format!("trace {tr}")));
        }
        let min = hermitian_spectrum(&matrix)?.min();
        if min < -PSD_TOL {
            return Err(Error::NotAState(format!("eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix {
            matrix,
            herm_residual,
            psd_residual: (-min).max(0.0),
        })
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(diag(values))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = identity(dim).scale(1.0 / dim as f64);
        DensityMatrix {
            matrix: m,
            herm_residual: 0.0,
            psd_residual: 0.0,
        }
    }

    /// `|v⟩⟨v|` for a normalized vector.
    pub fn pure(v: &DVector<Complex64>) -> Result<Self> {
        Self::new(projector(v))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn herm_residual(&self) -> f64 {
        self.herm_residual
    }

    pub fn psd_residual(&self) -> f64 {
        self.psd_residual
    }

    /// `tr(ρ A)`.
    pub fn expect(&self, a: &ComplexMatrix) -> Complex64 {
        let n = self.dim();
        let mut s = c(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s += self.matrix[(i, j)] * a[(j, i)];
            }
        }
        s
    }

    pub fn tensor(&self, other: &DensityMatrix, guard: Guard) -> Result<DensityMatrix> {
        let m = tensor_guarded(&self.matrix, &other.matrix, guard)?;
        DensityMatrix::new(m)
    }
}

/// `−Σ λ ln λ` over the clipped eigenvalues.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &lam in values {
        if lam < -PSD_TOL {
            return Err(Error::NotAState(format!("eigenvalue {lam:.3e}")));
        }
        if lam > CLIP {
            s -= lam * lam.ln();
        }
    }
    Ok(s.max(0.0))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let spec = hermitian_spectrum(rho.matrix())?;
    entropy_of_spectrum(&spec.values)
}

pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    check_probabilities(p, 1e-8)?;
    Ok(p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.ln())
        .sum::<f64>()
        .max(0.0))
}

pub(crate) fn check_probabilities(p: &[f64], sum_tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilities("empty vector".into()));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -1e-12) {
        return Err(Error::InvalidProbabilities(format!("entry {x}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > sum_tol {
        return Err(Error::InvalidProbabilities(format!("sum {sum}")));
    }
    Ok(())
}

/// Quantum relative entropy. `value` is `+∞` when the support of ρ is not
/// contained in the support of σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeEntropy {
    pub value: f64,
    pub support_violation: bool,
}

pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelativeEntropy> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy of {}-dim and {}-dim states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let er = hermitian_eigen(rho.matrix())?;
    let es = hermitian_eigen(sigma.matrix())?;
    let neg_entropy = -entropy_of_spectrum(&er.spectrum.values)?;

    // overlaps |⟨r_i|s_j⟩|²
    let overlap = er.vectors.adjoint() * &es.vectors;
    let mut cross = 0.0;
    for (j, &mu) in es.spectrum.values.iter().enumerate() {
        let weight: f64 = er
            .spectrum
            .values
            .iter()
            .enumerate()
            .filter(|(_, &lam)| lam > CLIP)
            .map(|(i, &lam)| lam * overlap[(i, j)].norm_sqr())
            .sum();
        if mu <= CLIP {
            if weight > 1e-10 {
                return Ok(RelativeEntropy {
                    value: f64::INFINITY,
                    support_violation: true,
                });
            }
            continue;
        }
        cross += weight * mu.ln();
    }
    Ok(RelativeEntropy {
        value: neg_entropy - cross,
        support_violation: false,
    })
}

/// Normalized pure state vector.
#[derive(Debug, Clone)]
pub struct PureStateVector {
    amplitudes: DVector<Complex64>,
    norm_residual: f64,
}

impl PureStateVector {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm_residual = (amplitudes.norm() - 1.0).abs();
        if norm_residual > 1e-10 {
            return Err(Error::Invalid(format!(
                "state vector norm off by {norm_residual:.3e}"
            )));
        }
        Ok(PureStateVector {
            amplitudes,
            norm_residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_residual(&self) -> f64 {
        self.norm_residual
    }

    pub fn density(&self) -> DensityMatrix {
        let m = projector(&self.amplitudes);
        DensityMatrix {
            matrix: m,
            herm_residual: 0.0,
            psd_residual: 0.0,
        }
    }
}

/// `Σ_j √λ_j |e_j⟩ ⊗ |j⟩` with `|e_j⟩` the eigenbasis of ρ and `|j⟩` the
/// standard basis of the ancilla. The system factor comes first.
pub fn purify(rho: &DensityMatrix) -> Result<PureStateVector> {
    let eig = hermitian_eigen(rho.matrix())?;
    Ok(purify_with(&eig))
}

pub(crate) fn purify_with(eig: &HermitianEigen) -> PureStateVector {
    let d = eig.spectrum.dim;
    let weights: Vec<f64> = eig.spectrum.values.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut v: DVector<Complex64> = DVector::zeros(d * d);
    for (j, &w) in weights.iter().enumerate() {
        let amp = (w / total).sqrt();
        for i in 0..d {
            v[i * d + j] += eig.vectors[(i, j)] * amp;
        }
    }
    let norm_residual = (v.norm() - 1.0).abs();
    PureStateVector {
        amplitudes: v,
        norm_residual,
    }
}

/// Discrete Weyl operator `W(k,l)|e_m⟩ = exp(i2πkm/d)|e_{m⊕l}⟩` in the
/// standard basis, indices `0..d`.
pub fn weyl(d: usize, k: usize, l: usize) -> Result<ComplexMatrix> {
    if d == 0 || k >= d || l >= d {
        return Err(Error::OutOfRange(format!("weyl({d}, {k}, {l})")));
    }
    let mut w = ComplexMatrix::zeros(d, d);
    for m in 0..d {
        let phase = 2.0 * PI * ((k * m) % d) as f64 / d as f64;
        w[((m + l) % d, m)] = Complex64::from_polar(1.0, phase);
    }
    Ok(w)
}

/// All `d²` Weyl operators ordered with `k` outer, `l` inner.
pub fn weyl_family(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        for l in 0..d {
            out.push(weyl(d, k, l).expect("indices in range"));
        }
    }
    out
}

/// `V A V†`: rewrites an operator given in the basis `V` (columns) into the
/// standard basis.
pub fn change_basis(a: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    v * a * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, random_unitary, rng};
    use std::f64::consts::LN_2;

    fn sx() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }
    fn sz() -> ComplexMatrix {
        diag(&[1.0, -1.0])
    }

    #[test]
    fn tensor_examples() {
        assert_eq!(tensor(&identity(2), &identity(2)).unwrap(), identity(4));
        let p = diag(&[1.0, 0.0]);
        assert_eq!(tensor(&p, &p).unwrap(), diag(&[1.0, 0.0, 0.0, 0.0]));
        // σx⊗σx maps e0⊗e0 (index 0) to e1⊗e1 (index 3)
        let xx = tensor(&sx(), &sx()).unwrap();
        assert_eq!(xx[(3, 0)], c(1.0, 0.0));
        assert_eq!(xx[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn tensor_guard_refuses() {
        let a = identity(300);
        let err = tensor(&a, &a).unwrap_err();
        assert!(matches!(
            err,
            Error::GuardExceeded {
                requested: 90000,
                ..
            }
        ));
        assert!(tensor_guarded(&identity(3), &identity(3), Guard(8)).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let mut r = rng(1);
        let rho = random_density(&mut r, 2);
        let sigma = random_density(&mut r, 3);
        let prod = tensor(rho.matrix(), sigma.matrix()).unwrap();
        let kept = partial_trace(&prod, &[2, 3], &[0]).unwrap();
        assert!(max_diff(&kept, rho.matrix()) < 1e-12);
        let kept = partial_trace(&prod, &[2, 3], &[1]).unwrap();
        assert!(max_diff(&kept, sigma.matrix()) < 1e-12);

        let m = random_hermitian(&mut r, 6);
        let none = partial_trace(&m, &[2, 3], &[]).unwrap();
        assert_eq!(none.shape(), (1, 1));
        assert!((none[(0, 0)] - m.trace()).norm() < 1e-12);

        let s = 1.0 / 2f64.sqrt();
        let bell = DVector::from_vec(vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]);
        let red = partial_trace(&projector(&bell), &[2, 2], &[0]).unwrap();
        assert!(max_diff(&red, &diag(&[0.5, 0.5])) < 1e-15);

        assert!(partial_trace(&m, &[2, 2], &[0]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[2]).is_err());
    }

    #[test]
    fn partial_trace_three_factors_keeps_middle() {
        let mut r = rng(2);
        let a = random_density(&mut r, 2);
        let b = random_density(&mut r, 3);
        let cc = random_density(&mut r, 2);
        let abc = tensor_all(
            &[a.matrix().clone(), b.matrix().clone(), cc.matrix().clone()],
            Guard::default(),
        )
        .unwrap();
        let mid = partial_trace(&abc, &[2, 3, 2], &[1]).unwrap();
        assert!(max_diff(&mid, b.matrix()) < 1e-12);
        let outer = partial_trace(&abc, &[2, 3, 2], &[0, 2]).unwrap();
        let expect = tensor(a.matrix(), cc.matrix()).unwrap();
        assert!(max_diff(&outer, &expect) < 1e-12);
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(
            hermitian_spectrum(&diag(&[0.25, 0.75])).unwrap().values,
            vec![0.75, 0.25]
        );
        let s = hermitian_spectrum(&sx()).unwrap().values;
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] + 1.0).abs() < 1e-14);

        let mut r = rng(3);
        let h = random_hermitian(&mut r, 8);
        let eig = hermitian_eigen(&h).unwrap();
        assert!((eig.spectrum.sum() - h.trace().re).abs() < 1e-10);
        assert!(eig.reconstruction_residual(&h) < 1e-9);
        assert!(eig.spectrum.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn jacobi_matches_direct_solver() {
        let mut r = crate::random::rng(8);
        let h = crate::random::random_hermitian(&mut r, 7);
        let (vals, vecs) = jacobi_eigen(h.clone());
        assert!(eigen_residual(&h, &vals, &vecs) < 1e-12);
        assert!(max_diff(&(vecs.adjoint() * &vecs), &identity(7)) < 1e-12);
        let mut a = vals.clone();
        a.sort_by(|x, y| y.total_cmp(x));
        let b = hermitian_spectrum(&h).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_rejects_non_hermitian() {
        let mut m = identity(2);
        m[(0, 1)] = c(0.5, 0.0);
        match hermitian_spectrum(&m) {
            Err(Error::NotHermitian { residual }) => assert!((residual - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn entropy_examples() {
        let mixed = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        assert!((von_neumann_entropy(&mixed).unwrap() - LN_2).abs() < 1e-15);
        let mut r = rng(4);
        let u = random_unitary(&mut r, 3);
        let pure = DensityMatrix::new(projector(&u.column(0).into_owned())).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-9);
        let q = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        // -0.75 ln 0.75 - 0.25 ln 0.25
        assert!((von_neumann_entropy(&q).unwrap() - 0.562335).abs() < 1e-6);
    }

    #[test]
    fn entropy_rejects_negative_eigenvalue() {
        assert!(entropy_of_spectrum(&[1.1, -0.1]).is_err());
        assert!(DensityMatrix::from_diagonal(&[1.1, -0.1]).is_err());
        // drift within tolerance is clipped
        assert_eq!(entropy_of_spectrum(&[1.0, -1e-9]).unwrap(), 0.0);
    }

    #[test]
    fn shannon_examples() {
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.9, 0.1]).unwrap() - 0.325083).abs() < 1e-6);
        assert!(shannon_entropy(&[1.2, -0.2]).is_err());
        assert!(shannon_entropy(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        let mut r = rng(5);
        let rho = random_density(&mut r, 3);
        let d = relative_entropy(&rho, &rho).unwrap();
        assert!(d.value.abs() < 1e-10 && !d.support_violation);

        let p0 = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((relative_entropy(&p0, &mixed).unwrap().value - LN_2).abs() < 1e-12);

        let q = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let v = relative_entropy(&q, &mixed).unwrap().value;
        assert!((v - 0.130812).abs() < 1e-6);
        assert!((v - (LN_2 - von_neumann_entropy(&q).unwrap())).abs() < 1e-12);

        let viol = relative_entropy(&mixed, &p0).unwrap();
        assert!(viol.support_violation && viol.value.is_infinite());
    }

    #[test]
    fn purify_examples() {
        let p0 = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let v = purify(&p0).unwrap();
        assert!((v.amplitudes() - basis(4, 0)).norm() < 1e-15);

        let v = purify(&DensityMatrix::maximally_mixed(2)).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((v.amplitudes()[0].re - s).abs() < 1e-15);
        assert!((v.amplitudes()[3].re - s).abs() < 1e-15);
        assert!(v.amplitudes()[1].norm() < 1e-15 && v.amplitudes()[2].norm() < 1e-15);

        let q = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let v = purify(&q).unwrap();
        let red = partial_trace(v.density().matrix(), &[2, 2], &[0]).unwrap();
        assert!(max_diff(&red, q.matrix()) < 1e-12);
    }

    #[test]
    fn weyl_examples() {
        assert_eq!(weyl(2, 0, 0).unwrap(), identity(2));
        assert_eq!(weyl(3, 0, 0).unwrap(), identity(3));
        assert!(max_diff(&weyl(2, 0, 1).unwrap(), &sx()) < 1e-15);
        assert!(max_diff(&weyl(2, 1, 0).unwrap(), &sz()) < 1e-15);
        // the m-dependent phase puts the sign on the source index: W(1,1) = σx·σz
        assert!(max_diff(&weyl(2, 1, 1).unwrap(), &(sx() * sz())) < 1e-15);
        assert!(max_diff(&weyl(2, 1, 1).unwrap(), &(sz() * sx()).scale(-1.0)) < 1e-15);
        assert!(weyl(2, 2, 0).is_err());
    }

    #[test]
    fn weyl_orthogonality_d3() {
        let inner = |a: &ComplexMatrix, b: &ComplexMatrix| (a.adjoint() * b).trace();
        let w12 = weyl(3, 1, 2).unwrap();
        assert!((inner(&w12, &w12) - c(3.0, 0.0)).norm() < 1e-12);
        assert!(inner(&w12, &weyl(3, 2, 2).unwrap()).norm() < 1e-12);
        let fam = weyl_family(3);
        for (i, a) in fam.iter().enumerate() {
            assert!(max_diff(&(a.adjoint() * a), &identity(3)) < 1e-12);
            for (j, b) in fam.iter().enumerate() {
                let expect = if i == j { 3.0 } else { 0.0 };
                assert!((inner(a, b) - c(expect, 0.0)).norm() < 1e-10);
            }
        }
    }
}
