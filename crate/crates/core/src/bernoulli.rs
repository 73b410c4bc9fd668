//! Quantum Bernoulli shift truncated to a finite lattice window.
//!
//! Sites are integers; a window `[a, b]` is the Kronecker product of the
//! single-site spaces in ascending site order. The shift moves an operator
//! sitting at site `s` to `s + 1`.

use crate::dynsys::{correlation_from_evolved, CorrelationState, DynamicalSystem};
use crate::error::{Error, Result};
use crate::opalg::{
    hermitian_eigen, identity, purify, tensor_guarded, tensor_power, von_neumann_entropy,
    ComplexMatrix, DensityMatrix, Guard, PureStateVector,
};
use crate::partition::OperationalPartition;

/// Closed interval of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn new(start: i64, end: i64) -> Result<Self> {
        if end < start {
            return Err(Error::Invalid(format!("empty window [{start}, {end}]")));
        }
        Ok(Window { start, end })
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, other: &Window) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone)]
pub struct BernoulliShiftSystem {
    d: usize,
    site_state: DensityMatrix,
    window: Option<Window>,
}

impl BernoulliShiftSystem {
    pub fn new(site_state: DensityMatrix) -> Self {
        BernoulliShiftSystem {
            d: site_state.dim(),
            site_state,
            window: None,
        }
    }

    /// Fixes the lattice window instead of deriving the minimal one.
    pub fn with_window(mut self, window: Window) -> Self {
        self.window = Some(window);
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn site_state(&self) -> &DensityMatrix {
        &self.site_state
    }

    pub fn window(&self) -> Option<Window> {
        self.window
    }

    /// `⊗_window ρ`.
    pub fn window_state(&self, window: Window, guard: Guard) -> Result<DensityMatrix> {
        guard.check_pow("window state", self.d, window.len())?;
        DensityMatrix::new(tensor_power(self.site_state.matrix(), window.len(), guard)?)
    }

    /// Eigenvectors of the site state, ordered by descending eigenvalue.
    pub fn eigenbasis(&self) -> Result<ComplexMatrix> {
        Ok(hermitian_eigen(self.site_state.matrix())?.vectors)
    }

    /// Weyl partition built on the eigenbasis of the site state, at site 0.
    pub fn weyl_partition(&self) -> Result<SitedPartition> {
        SitedPartition::single_site(OperationalPartition::weyl_in_basis(&self.eigenbasis()?)?)
    }

    /// `S(ρ) + ln d`.
    pub fn analytic_entropy(&self) -> Result<f64> {
        Ok(von_neumann_entropy(&self.site_state)? + (self.d as f64).ln())
    }

    pub fn purified_site(&self) -> Result<PureStateVector> {
        purify(&self.site_state)
    }

    /// Window used for `n` steps of a partition: the override when present
    /// (it must cover the supports), otherwise the minimal covering interval.
    pub fn window_for(&self, x: &SitedPartition, n: usize) -> Result<Window> {
        let needed = Window::new(
            x.support_start,
            x.support_start + x.support_len as i64 - 1 + n.saturating_sub(1) as i64,
        )?;
        match self.window {
            Some(w) if w.contains(&needed) => Ok(w),
            Some(w) => Err(Error::Invalid(format!(
                "window [{}, {}] too small for n = {n}: needs [{}, {}]",
                w.start, w.end, needed.start, needed.end
            ))),
            None => Ok(needed),
        }
    }

    /// `ρ[Xⁿ]` evaluated on the lattice window by re-siting the partition
    /// elements, `Θ^m(X at s) = X at s + m`.
    pub fn generic_correlation_matrix(
        &self,
        x: &SitedPartition,
        n: usize,
        guard: Guard,
    ) -> Result<CorrelationState> {
        self.check_partition(x)?;
        guard.check_pow("correlation matrix", x.k(), n)?;
        let window = self.window_for(x, n)?;
        let state = self.window_state(window, guard)?;
        let mut evolved = Vec::with_capacity(n);
        for m in 0..n {
            let start = x.support_start + m as i64;
            evolved.push(
                x.partition
                    .elements()
                    .iter()
                    .map(|e| embed_block(e, self.d, start, x.support_len, window, guard))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        correlation_from_evolved(&state, &evolved, guard)
    }

    /// `ρ[Xⁿ]`. Partitions supported exactly on site 0 use the product
    /// structure `ρ[Xⁿ] = σ[X]^{⊗n}`; anything wider goes through the
    /// windowed construction.
    pub fn shift_correlation_matrix(
        &self,
        x: &SitedPartition,
        n: usize,
        guard: Guard,
    ) -> Result<CorrelationState> {
        self.check_partition(x)?;
        if !x.is_single_site_at_origin() {
            return self.generic_correlation_matrix(x, n, guard);
        }
        // honor an explicit window even on the fast path
        self.window_for(x, n)?;
        guard.check_pow("correlation matrix", x.k(), n)?;
        let sigma = x.partition.correlation(&self.site_state)?;
        let m = tensor_power(sigma.matrix.matrix(), n, guard)?;
        Ok(CorrelationState {
            n,
            k: x.k(),
            state: DensityMatrix::new(m)?,
        })
    }

    fn check_partition(&self, x: &SitedPartition) -> Result<()> {
        let expect = self
            .d
            .checked_pow(x.support_len as u32)
            .ok_or_else(|| Error::Invalid("partition support too wide".into()))?;
        if x.partition.dim() != expect {
            return Err(Error::DimensionMismatch(format!(
                "partition acts on dimension {}, support of {} sites needs {expect}",
                x.partition.dim(),
                x.support_len
            )));
        }
        Ok(())
    }
}

impl DynamicalSystem for BernoulliShiftSystem {
    type Partition = SitedPartition;

    fn correlation_state(
        &self,
        x: &SitedPartition,
        n: usize,
        guard: Guard,
    ) -> Result<CorrelationState> {
        self.shift_correlation_matrix(x, n, guard)
    }
}

/// A single-site operator placed at a lattice site.
#[derive(Debug, Clone)]
pub struct SitedOperator {
    pub op: ComplexMatrix,
    pub site: i64,
}

/// Partition acting on the contiguous sites
/// `[support_start, support_start + support_len − 1]`.
#[derive(Debug, Clone)]
pub struct SitedPartition {
    partition: OperationalPartition,
    support_start: i64,
    support_len: usize,
}

impl SitedPartition {
    pub fn new(
        partition: OperationalPartition,
        support_start: i64,
        support_len: usize,
    ) -> Result<Self> {
        if support_len == 0 {
            return Err(Error::Invalid("partition support is empty".into()));
        }
        Ok(SitedPartition {
            partition,
            support_start,
            support_len,
        })
    }

    pub fn single_site(partition: OperationalPartition) -> Result<Self> {
        Self::new(partition, 0, 1)
    }

    pub fn partition(&self) -> &OperationalPartition {
        &self.partition
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }

    pub fn support(&self) -> Window {
        Window {
            start: self.support_start,
            end: self.support_start + self.support_len as i64 - 1,
        }
    }

    pub fn is_single_site_at_origin(&self) -> bool {
        self.support_start == 0 && self.support_len == 1
    }
}

/// `1 ⊗ … ⊗ op ⊗ … ⊗ 1` with `op` at the factor of its site.
pub fn embed(sop: &SitedOperator, d: usize, window: Window, guard: Guard) -> Result<ComplexMatrix> {
    if sop.op.nrows() != d || sop.op.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "sited operator is {}x{}, site dimension is {d}",
            sop.op.nrows(),
            sop.op.ncols()
        )));
    }
    embed_block(&sop.op, d, sop.site, 1, window, guard)
}

/// Embeds an operator on `len` contiguous sites starting at `start`.
pub fn embed_block(
    op: &ComplexMatrix,
    d: usize,
    start: i64,
    len: usize,
    window: Window,
    guard: Guard,
) -> Result<ComplexMatrix> {
    let block = Window::new(start, start + len as i64 - 1)?;
    if !window.contains(&block) {
        return Err(Error::OutOfRange(format!(
            "sites [{}, {}] outside window [{}, {}]",
            block.start, block.end, window.start, window.end
        )));
    }
    guard.check_pow("embedded operator", d, window.len())?;
    let left = (block.start - window.start) as usize;
    let right = (window.end - block.end) as usize;
    let l = identity(d.pow(left as u32));
    let r = identity(d.pow(right as u32));
    tensor_guarded(&tensor_guarded(&l, op, guard)?, &r, guard)
}
