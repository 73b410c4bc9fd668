//! Classical communication over a quantum Bernoulli carrier.
//!
//! Letters are encoded by perturbing the reference state with a completely
//! positive map, one letter per time step. Between letters the dynamics
//! shifts the lattice, so letter `t` of a message ends up acting on its own
//! block of sites. States are built in the frame that moves with the shift,
//! where letter `t` (0-based) sits at site `t`; the product reference state
//! is shift invariant, so this relabeling changes no entropy or probability.
//!
//! Messages `(α_1, …, α_n)` are indexed little-endian, `α_1 + r·α_2 + …`,
//! and block states list sites in ascending order.

use serde::Serialize;

use crate::bernoulli::{embed_block, BernoulliShiftSystem, Window};
use crate::error::{Error, Result};
use crate::format::{ser_f64, ser_f64_vec};
use crate::opalg::{
    check_probabilities, hermitian_eigen, identity, max_diff, projector, purify, relative_entropy,
    shannon_entropy, tensor_guarded, tensor_power, von_neumann_entropy, weyl_family, ComplexMatrix,
    DensityMatrix, Guard, CLIP,
};
use crate::partition::{Classification, OperationalPartition};

/// The lattice that carries the message. A purified carrier replaces each
/// spin by a spin–ancilla pair in the purification of the site state, and
/// decoders may then act on the ancillas as well.
#[derive(Debug, Clone)]
pub struct Carrier {
    system: BernoulliShiftSystem,
    purified: bool,
    site_state: DensityMatrix,
}

impl Carrier {
    pub fn bernoulli(system: BernoulliShiftSystem) -> Self {
        let site_state = system.site_state().clone();
        Carrier {
            system,
            purified: false,
            site_state,
        }
    }

    pub fn purified(system: BernoulliShiftSystem) -> Result<Self> {
        let site_state = purify(system.site_state())?.density();
        Ok(Carrier {
            system,
            purified: true,
            site_state,
        })
    }

    pub fn system(&self) -> &BernoulliShiftSystem {
        &self.system
    }

    pub fn is_purified(&self) -> bool {
        self.purified
    }

    /// Spin dimension `d`.
    pub fn d(&self) -> usize {
        self.system.d()
    }

    /// Dimension of one carrier site (`d`, or `d²` when purified).
    pub fn site_dim(&self) -> usize {
        self.site_state.dim()
    }

    pub fn site_state(&self) -> &DensityMatrix {
        &self.site_state
    }

    /// Per-site bound on the Holevo quantity for encodings of the given
    /// class: `ln d + S(ρ)` with ancilla access, otherwise `ln d` for general
    /// encodings and `ln d − S(ρ)` for bistochastic or unitary ones.
    pub fn locality_rate_bound(&self, class: Classification) -> Result<f64> {
        let ln_d = (self.d() as f64).ln();
        let s = von_neumann_entropy(self.system.site_state())?;
        Ok(if self.purified {
            ln_d + s
        } else if class == Classification::General {
            ln_d
        } else {
            ln_d - s
        })
    }
}

/// One completely positive map per letter, each acting on the `2l + 1`
/// carrier sites centered on the letter's site.
#[derive(Debug, Clone)]
pub struct Encoding {
    letters: Vec<OperationalPartition>,
    locality_radius: usize,
    class: Classification,
}

impl Encoding {
    pub fn new(letters: Vec<OperationalPartition>, locality_radius: usize) -> Result<Self> {
        if letters.len() < 2 {
            return Err(Error::Invalid(format!(
                "alphabet needs at least 2 letters, got {}",
                letters.len()
            )));
        }
        let dim = letters[0].dim();
        if letters.iter().any(|l| l.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "letters act on different spaces".into(),
            ));
        }
        let class = letters
            .iter()
            .map(|l| l.classification())
            .max()
            .expect("nonempty");
        Ok(Encoding {
            letters,
            locality_radius,
            class,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[OperationalPartition] {
        &self.letters
    }

    pub fn locality_radius(&self) -> usize {
        self.locality_radius
    }

    pub fn class(&self) -> Classification {
        self.class
    }

    fn check_carrier(&self, carrier: &Carrier) -> Result<()> {
        let block = 2 * self.locality_radius + 1;
        let expect = carrier
            .site_dim()
            .checked_pow(block as u32)
            .ok_or_else(|| Error::Invalid("locality radius too large".into()))?;
        if self.letters[0].dim() != expect {
            return Err(Error::DimensionMismatch(format!(
                "letters act on dimension {}, {block} carrier sites need {expect}",
                self.letters[0].dim()
            )));
        }
        Ok(())
    }
}

/// Input distribution over messages of length `n`.
#[derive(Debug, Clone)]
pub enum SourceModel {
    /// i.i.d. letters with the given single-letter distribution.
    Bernoulli { p: Vec<f64>, n: usize },
    /// Full table over the `rⁿ` messages.
    General { table: Vec<f64>, n: usize },
}

impl SourceModel {
    pub fn bernoulli(p: Vec<f64>, n: usize) -> Result<Self> {
        check_probabilities(&p, 1e-10)?;
        Ok(SourceModel::Bernoulli { p, n })
    }

    pub fn uniform(r: usize, n: usize) -> Self {
        SourceModel::Bernoulli {
            p: vec![1.0 / r as f64; r],
            n,
        }
    }

    pub fn general(table: Vec<f64>, n: usize) -> Result<Self> {
        check_probabilities(&table, 1e-10)?;
        Ok(SourceModel::General { table, n })
    }

    pub fn n(&self) -> usize {
        match self {
            SourceModel::Bernoulli { n, .. } | SourceModel::General { n, .. } => *n,
        }
    }

    /// Message probabilities, little-endian in time.
    pub fn table(&self, guard: Guard) -> Result<Vec<f64>> {
        match self {
            SourceModel::General { table, .. } => Ok(table.clone()),
            SourceModel::Bernoulli { p, n } => {
                let size = guard.check_pow("message table", p.len(), *n)?;
                let r = p.len();
                Ok((0..size)
                    .map(|mut idx| {
                        let mut prob = 1.0;
                        for _ in 0..*n {
                            prob *= p[idx % r];
                            idx /= r;
                        }
                        prob
                    })
                    .collect())
            }
        }
    }
}

/// Letters of message `idx`, first letter first.
pub fn message_letters(mut idx: usize, r: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(idx % r);
        idx /= r;
    }
    out
}

/// Generalized observable `{D_k ≥ 0, Σ D_k = 1}`.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
    completeness_residual: f64,
}

pub const POVM_TOL: f64 = 1e-10;

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = match effects.first() {
            Some(e) => e.nrows(),
            None => return Err(Error::InvalidPovm("no effects".into())),
        };
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (k, e) in effects.iter().enumerate() {
            if e.shape() != (dim, dim) {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} has the wrong shape"
                )));
            }
            let min = hermitian_eigen(e)
                .map_err(|err| Error::InvalidPovm(format!("effect {k}: {err}")))?
                .spectrum
                .min();
            if min < -POVM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} has eigenvalue {min:.3e}"
                )));
            }
            sum += e;
        }
        let completeness_residual = max_diff(&sum, &identity(dim));
        if completeness_residual > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {completeness_residual:.3e}"
            )));
        }
        Ok(Povm {
            effects,
            completeness_residual,
        })
    }

    pub fn trivial(dim: usize) -> Self {
        Povm {
            effects: vec![identity(dim)],
            completeness_residual: 0.0,
        }
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &ComplexMatrix) -> Result<Self> {
        Povm::new(
            (0..basis.ncols())
                .map(|j| projector(&basis.column(j).into_owned()))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn completeness_residual(&self) -> f64 {
        self.completeness_residual
    }

    /// `D^{⊗n}`, outcome index little-endian with the first site fastest.
    pub fn tensor_power(&self, n: usize, guard: Guard) -> Result<Povm> {
        guard.check_pow("product POVM size", self.effects.len(), n)?;
        guard.check_pow("product POVM dimension", self.dim(), n)?;
        let m = self.effects.len();
        let total = m.pow(n as u32);
        let mut effects = Vec::with_capacity(total);
        for idx in 0..total {
            // site 0 is the leftmost Kronecker factor
            let mut acc = ComplexMatrix::from_element(1, 1, num_complex::Complex64::new(1.0, 0.0));
            for e in message_letters(idx, m, n) {
                acc = tensor_guarded(&acc, &self.effects[e], guard)?;
            }
            effects.push(acc);
        }
        Povm::new(effects)
    }
}

/// Priors and signal states.
#[derive(Debug, Clone)]
pub struct Ensemble {
    priors: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(priors: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        check_probabilities(&priors, 1e-10)?;
        if priors.len() != states.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "signal states differ in dimension".into(),
            ));
        }
        Ok(Ensemble { priors, states })
    }

    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let r = states.len();
        Self::new(vec![1.0 / r as f64; r], states)
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `Σ p(α) ρ(α)`.
    pub fn average(&self) -> Result<DensityMatrix> {
        let mut avg = ComplexMatrix::zeros(self.dim(), self.dim());
        for (p, s) in self.priors.iter().zip(&self.states) {
            avg += s.matrix().scale(*p);
        }
        DensityMatrix::new((&avg + avg.adjoint()).scale(0.5))
    }
}

/// Schrödinger-picture message state on the window of `n + 2l` sites.
pub fn message_state(
    carrier: &Carrier,
    encoding: &Encoding,
    message: &[usize],
    guard: Guard,
) -> Result<DensityMatrix> {
    let ctx = MessageContext::new(carrier, encoding, message.len(), guard)?;
    ctx.state(message)
}

/// Embedded Kraus elements for every (time step, letter) pair, shared by all
/// messages of a block.
struct MessageContext {
    base: DensityMatrix,
    // kraus[t][letter] = embedded elements
    kraus: Vec<Vec<Vec<ComplexMatrix>>>,
    r: usize,
}

impl MessageContext {
    fn new(carrier: &Carrier, encoding: &Encoding, n: usize, guard: Guard) -> Result<Self> {
        encoding.check_carrier(carrier)?;
        if n == 0 {
            return Err(Error::Invalid("empty message".into()));
        }
        let l = encoding.locality_radius as i64;
        let window = Window::new(-l, n as i64 - 1 + l)?;
        guard.check_pow("message window", carrier.site_dim(), window.len())?;
        let base = DensityMatrix::new(tensor_power(
            carrier.site_state().matrix(),
            window.len(),
            guard,
        )?)?;
        let block = 2 * encoding.locality_radius + 1;
        let mut kraus = Vec::with_capacity(n);
        for t in 0..n as i64 {
            let per_letter = encoding
                .letters
                .iter()
                .map(|letter| {
                    letter
                        .elements()
                        .iter()
                        .map(|x| embed_block(x, carrier.site_dim(), t - l, block, window, guard))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            kraus.push(per_letter);
        }
        Ok(MessageContext {
            base,
            kraus,
            r: encoding.alphabet_size(),
        })
    }

    fn state(&self, message: &[usize]) -> Result<DensityMatrix> {
        if message.len() != self.kraus.len() {
            return Err(Error::Invalid(format!(
                "message of length {} for a block of {}",
                message.len(),
                self.kraus.len()
            )));
        }
        let mut rho = self.base.matrix().clone();
        for (t, &alpha) in message.iter().enumerate() {
            if alpha >= self.r {
                return Err(Error::OutOfRange(format!(
                    "letter {alpha} in an alphabet of {}",
                    self.r
                )));
            }
            let mut next = ComplexMatrix::zeros(rho.nrows(), rho.ncols());
            for x in &self.kraus[t][alpha] {
                next += x * &rho * x.adjoint();
            }
            rho = next;
        }
        DensityMatrix::new((&rho + rho.adjoint()).scale(0.5))
    }
}

/// Ensemble of all `rⁿ` message states with the source's priors.
pub fn block_ensemble(
    carrier: &Carrier,
    encoding: &Encoding,
    source: &SourceModel,
    guard: Guard,
) -> Result<Ensemble> {
    let n = source.n();
    let r = encoding.alphabet_size();
    let count = guard.check_pow("message enumeration", r, n)?;
    let table = source.table(guard)?;
    if table.len() != count {
        return Err(Error::DimensionMismatch(format!(
            "source has {} messages, alphabet gives {count}",
            table.len()
        )));
    }
    let ctx = MessageContext::new(carrier, encoding, n, guard)?;
    let states = (0..count)
        .map(|idx| ctx.state(&message_letters(idx, r, n)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(table, states)
}

/// `P(ᾱ|δ_j) = tr(ρ(ᾱ) D_j)`.
pub fn conditional_probs(state: &DensityMatrix, povm: &Povm) -> Result<Vec<f64>> {
    if state.dim() != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, POVM acts on {}",
            state.dim(),
            povm.dim()
        )));
    }
    let probs: Vec<f64> = povm.effects.iter().map(|d| state.expect(d).re).collect();
    if let Some(p) = probs.iter().find(|&&p| p < -1e-9) {
        return Err(Error::InvalidProbabilities(format!(
            "outcome probability {p}"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!(
            "outcomes sum to {sum}"
        )));
    }
    Ok(probs.into_iter().map(|p| p.max(0.0)).collect())
}

/// Transmitted information and the entropies that bound it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Information {
    pub value: f64,
    pub input_entropy: f64,
    pub output_entropy: f64,
}

impl Information {
    /// `0 ≤ I ≤ min(S(p_in), S(p_out))` within `tol`.
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.value >= -tol && self.value <= self.input_entropy.min(self.output_entropy) + tol
    }
}

/// `I = S(p_out) − Σ p_in(ᾱ) S(P(ᾱ|·))` from priors and conditional rows.
pub fn information_from_rows(priors: &[f64], rows: &[Vec<f64>]) -> Result<Information> {
    if priors.len() != rows.len() || rows.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} priors for {} conditional rows",
            priors.len(),
            rows.len()
        )));
    }
    let m = rows[0].len();
    let mut p_out = vec![0.0; m];
    let mut noise = 0.0;
    for (p, row) in priors.iter().zip(rows) {
        if row.len() != m {
            return Err(Error::DimensionMismatch("ragged conditional rows".into()));
        }
        for (o, q) in p_out.iter_mut().zip(row) {
            *o += p * q;
        }
        if *p > 0.0 {
            noise += p * shannon_entropy(row)?;
        }
    }
    let output_entropy = shannon_entropy(&p_out)?;
    Ok(Information {
        value: output_entropy - noise,
        input_entropy: shannon_entropy(priors)?,
        output_entropy,
    })
}

pub fn ensemble_information(ensemble: &Ensemble, povm: &Povm) -> Result<Information> {
    let rows = ensemble
        .states
        .iter()
        .map(|s| conditional_probs(s, povm))
        .collect::<Result<Vec<_>>>()?;
    information_from_rows(&ensemble.priors, &rows)
}

/// Mutual information of a block of `source.n()` letters.
pub fn mutual_information(
    source: &SourceModel,
    encoding: &Encoding,
    povm: &Povm,
    carrier: &Carrier,
    guard: Guard,
) -> Result<Information> {
    let ensemble = block_ensemble(carrier, encoding, source, guard)?;
    ensemble_information(&ensemble, povm)
}

/// `S(Σ p ρ) − Σ p S(ρ)`.
pub fn holevo_chi(ensemble: &Ensemble) -> Result<f64> {
    let mut chi = von_neumann_entropy(&ensemble.average()?)?;
    for (p, s) in ensemble.priors.iter().zip(&ensemble.states) {
        if *p > 0.0 {
            chi -= p * von_neumann_entropy(s)?;
        }
    }
    // clear round-off below zero
    Ok(if chi < 0.0 && chi > -CLIP { 0.0 } else { chi })
}

/// Pretty good measurement `D_α = ρ̄^{-1/2} p(α)ρ(α) ρ̄^{-1/2}`, with the
/// projector onto `ker ρ̄` shared equally among the outcomes.
pub fn pgm_povm(ensemble: &Ensemble) -> Result<Povm> {
    let avg = ensemble.average()?;
    let eig = hermitian_eigen(avg.matrix())?;
    let inv_sqrt = eig.apply(|l| if l > CLIP { 1.0 / l.sqrt() } else { 0.0 });
    let kernel = eig.apply(|l| if l > CLIP { 0.0 } else { 1.0 });
    let m = ensemble.states.len() as f64;
    let effects = ensemble
        .priors
        .iter()
        .zip(&ensemble.states)
        .map(|(p, s)| {
            let e = &inv_sqrt * s.matrix().scale(*p) * &inv_sqrt + kernel.unscale(m);
            (&e + e.adjoint()).scale(0.5)
        })
        .collect();
    Povm::new(effects)
}

/// Result of the prior optimization.
#[derive(Debug, Clone)]
pub struct PriorOptimum {
    pub priors: Vec<f64>,
    pub chi: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Holevo quantity after each iterate, starting with the uniform prior.
    pub history: Vec<f64>,
}

pub const DEFAULT_PRIOR_TOL: f64 = 1e-9;
pub const DEFAULT_PRIOR_MAX_ITER: usize = 10_000;

/// Maximizes the Holevo quantity over priors for fixed signal states with
/// the fixed-point update `p′(α) ∝ p(α)·exp(D(ρ_α‖ρ̄_p))`, started from the
/// uniform prior.
pub fn optimize_prior(states: &[DensityMatrix], tol: f64, max_iter: usize) -> Result<PriorOptimum> {
    if states.len() < 2 {
        return Err(Error::Invalid(
            "prior optimization needs at least 2 states".into(),
        ));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    let r = states.len();
    let mut p = vec![1.0 / r as f64; r];
    let (mut divergences, mut chi) = divergences_of(states, &p)?;
    let mut history = vec![chi];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let dmax = divergences.iter().cloned().fold(f64::MIN, f64::max);
        let mut next: Vec<f64> = p
            .iter()
            .zip(&divergences)
            .map(|(q, d)| q * (d - dmax).exp())
            .collect();
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|q| *q /= total);
        let step = p
            .iter()
            .zip(&next)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        p = next;
        (divergences, chi) = divergences_of(states, &p)?;
        history.push(chi);
        if step < tol {
            converged = true;
            break;
        }
    }
    Ok(PriorOptimum {
        priors: p,
        chi,
        iterations,
        converged,
        history,
    })
}

// D(ρ_α‖ρ̄) for each α and χ = Σ p D
fn divergences_of(states: &[DensityMatrix], p: &[f64]) -> Result<(Vec<f64>, f64)> {
    let ensemble = Ensemble::new(p.to_vec(), states.to_vec())?;
    let avg = ensemble.average()?;
    let mut chi = 0.0;
    let mut out = Vec::with_capacity(states.len());
    for (q, s) in p.iter().zip(states) {
        let d = relative_entropy(s, &avg)?;
        // a letter outside the support of ρ̄ must have zero weight
        let v = if d.support_violation { 0.0 } else { d.value };
        out.push(v);
        chi += q * v;
    }
    Ok((out, chi))
}

/// The three single-site coding schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Classical,
    Weyl,
    DenseCoding,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [
        SchemeKind::Classical,
        SchemeKind::Weyl,
        SchemeKind::DenseCoding,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Classical => "classical",
            SchemeKind::Weyl => "weyl",
            SchemeKind::DenseCoding => "dense_coding",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(SchemeKind::Classical),
            "weyl" => Ok(SchemeKind::Weyl),
            "dense" | "dense_coding" => Ok(SchemeKind::DenseCoding),
            other => Err(Error::Invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// An encoding bound to its carrier, with the known single-letter value
/// when there is one.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub name: String,
    pub carrier: Carrier,
    pub encoding: Encoding,
    pub theory: Option<f64>,
}

impl Scheme {
    /// Uniform single-letter ensemble.
    pub fn single_letter_ensemble(&self, guard: Guard) -> Result<Ensemble> {
        block_ensemble(
            &self.carrier,
            &self.encoding,
            &SourceModel::uniform(self.encoding.alphabet_size(), 1),
            guard,
        )
    }
}

/// Builds one of the canonical schemes on the Bernoulli shift with the given
/// site state. Bases are the eigenbasis of the site state.
///
/// - classical: `d` letters `σ ↦ tr(σ)|e_α⟩⟨e_α|`, value `ln d`
/// - weyl: `d²` letters `σ ↦ WσW†`, value `ln d − S(ρ)`
/// - dense coding: `d²` letters `W ⊗ 1` on the purified carrier, value
///   `ln d + S(ρ)`
pub fn scheme(kind: SchemeKind, site_state: &DensityMatrix) -> Result<Scheme> {
    let d = site_state.dim();
    let system = BernoulliShiftSystem::new(site_state.clone());
    let basis = hermitian_eigen(site_state.matrix())?.vectors;
    let s = von_neumann_entropy(site_state)?;
    let ln_d = (d as f64).ln();
    let weyls: Vec<ComplexMatrix> = weyl_family(d)
        .into_iter()
        .map(|w| &basis * w * basis.adjoint())
        .collect();

    let (carrier, letters, theory) = match kind {
        SchemeKind::Classical => {
            let letters = (0..d)
                .map(|alpha| {
                    let target = basis.column(alpha).into_owned();
                    OperationalPartition::new(
                        (0..d)
                            .map(|m| &target * basis.column(m).adjoint())
                            .collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            (Carrier::bernoulli(system), letters, ln_d)
        }
        SchemeKind::Weyl => {
            let letters = weyls
                .into_iter()
                .map(OperationalPartition::from_unitary)
                .collect::<Result<Vec<_>>>()?;
            (Carrier::bernoulli(system), letters, ln_d - s)
        }
        SchemeKind::DenseCoding => {
            let one = identity(d);
            let letters = weyls
                .iter()
                .map(|w| OperationalPartition::from_unitary(w.kronecker(&one)))
                .collect::<Result<Vec<_>>>()?;
            (Carrier::purified(system)?, letters, ln_d + s)
        }
    };
    Ok(Scheme {
        name: kind.name().to_string(),
        carrier,
        encoding: Encoding::new(letters, 0)?,
        theory: Some(theory),
    })
}

/// Decoder families used for block information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    /// Pretty good measurement of the whole block ensemble.
    Pgm,
    /// Tensor power of the single-letter pretty good measurement.
    Product,
    /// Per-site projective measurement in the eigenbasis of the site state.
    Projective,
}

impl DecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::Pgm => "pgm",
            DecoderKind::Product => "product",
            DecoderKind::Projective => "projective",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(DecoderKind::Pgm),
            "product" => Ok(DecoderKind::Product),
            "projective" => Ok(DecoderKind::Projective),
            other => Err(Error::Invalid(format!("unknown decoder '{other}'"))),
        }
    }
}

/// Decoder for a block of `n` letters.
pub fn block_decoder(
    kind: DecoderKind,
    scheme: &Scheme,
    block: &Ensemble,
    n: usize,
    guard: Guard,
) -> Result<Povm> {
    let l = scheme.encoding.locality_radius();
    match kind {
        DecoderKind::Pgm => pgm_povm(block),
        DecoderKind::Product | DecoderKind::Projective if l > 0 => Err(Error::Invalid(format!(
            "{} decoder needs single-site letters",
            kind.name()
        ))),
        DecoderKind::Product => {
            let single = scheme.single_letter_ensemble(guard)?;
            pgm_povm(&single)?.tensor_power(n, guard)
        }
        DecoderKind::Projective => {
            let basis = hermitian_eigen(scheme.carrier.site_state().matrix())?.vectors;
            Povm::projective(&basis)?.tensor_power(n, guard)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockEstimate {
    pub n: usize,
    #[serde(rename = "I_over_n", serialize_with = "ser_f64")]
    pub info_per_letter: f64,
    pub decoder: DecoderKind,
    #[serde(serialize_with = "ser_f64")]
    pub chi_over_n: f64,
    #[serde(serialize_with = "ser_f64")]
    pub input_entropy: f64,
    #[serde(serialize_with = "ser_f64")]
    pub output_entropy: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq, Eq)]
pub struct ReportChecks {
    pub holevo_ok: bool,
    pub ordering_ok: bool,
    pub theorem1_ok: bool,
    pub locality_ok: bool,
}

impl ReportChecks {
    pub fn all(&self) -> bool {
        self.holevo_ok && self.ordering_ok && self.theorem1_ok && self.locality_ok
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityReport {
    pub scheme: String,
    pub class: Classification,
    #[serde(serialize_with = "ser_f64")]
    pub chi_per_letter: f64,
    #[serde(serialize_with = "crate::format::ser_opt_f64")]
    pub theory: Option<f64>,
    pub block: Vec<BlockEstimate>,
    pub checks: ReportChecks,
    /// Block Holevo quantities `χ_n` for `n = 1..=n_max`.
    #[serde(serialize_with = "ser_f64_vec")]
    pub block_chi: Vec<f64>,
}

/// Tolerance for the information-theoretic inequalities in reports.
pub const BOUND_TOL: f64 = 1e-8;
/// Tolerance for the bounds of `0 ≤ I ≤ min(S(p_in), S(p_out))`.
pub const INFO_TOL: f64 = 1e-9;

/// Evaluates every scheme on blocks `n = 1..=n_max` with the requested
/// decoders under a uniform Bernoulli source, then records the checks.
pub fn capacity_report(
    schemes: &[Scheme],
    n_max: usize,
    decoders: &[DecoderKind],
    guard: Guard,
) -> Result<Vec<CapacityReport>> {
    let mut reports = Vec::with_capacity(schemes.len());
    for scheme in schemes {
        let r = scheme.encoding.alphabet_size();
        let chi_per_letter = holevo_chi(&scheme.single_letter_ensemble(guard)?)?;
        let analytic = scheme.carrier.system().analytic_entropy()?;
        let bound_rate = scheme
            .carrier
            .locality_rate_bound(scheme.encoding.class())?;
        let l = scheme.encoding.locality_radius();

        let mut block = Vec::new();
        let mut block_chi = Vec::with_capacity(n_max);
        let mut holevo_ok = true;
        let mut locality_ok = true;
        for n in 1..=n_max {
            let ensemble = block_ensemble(
                &scheme.carrier,
                &scheme.encoding,
                &SourceModel::uniform(r, n),
                guard,
            )?;
            let chi_n = holevo_chi(&ensemble)?;
            block_chi.push(chi_n);
            locality_ok &= chi_n <= (n + 2 * l + 1) as f64 * bound_rate + BOUND_TOL;
            for &kind in decoders {
                let povm = block_decoder(kind, scheme, &ensemble, n, guard)?;
                let info = ensemble_information(&ensemble, &povm)?;
                holevo_ok &= info.within_bounds(INFO_TOL)
                    && info.value <= chi_n + BOUND_TOL
                    && info.value / n as f64 <= chi_per_letter + BOUND_TOL;
                block.push(BlockEstimate {
                    n,
                    info_per_letter: info.value / n as f64,
                    decoder: kind,
                    chi_over_n: chi_n / n as f64,
                    input_entropy: info.input_entropy,
                    output_entropy: info.output_entropy,
                });
            }
        }
        reports.push(CapacityReport {
            scheme: scheme.name.clone(),
            class: scheme.encoding.class(),
            chi_per_letter,
            theory: scheme.theory,
            block,
            checks: ReportChecks {
                holevo_ok,
                ordering_ok: true,
                theorem1_ok: chi_per_letter <= analytic + BOUND_TOL,
                locality_ok,
            },
            block_chi,
        });
    }

    // weyl ≤ classical ≤ dense_coding among whichever are present
    let chain: Vec<f64> = ["weyl", "classical", "dense_coding"]
        .iter()
        .filter_map(|name| reports.iter().find(|r| r.scheme == *name))
        .map(|r| r.chi_per_letter)
        .collect();
    let ordering_ok = chain.windows(2).all(|w| w[0] <= w[1] + BOUND_TOL);
    for r in &mut reports {
        r.checks.ordering_ok = ordering_ok;
    }
    Ok(reports)
}

/// Binds a user-supplied encoding to a carrier.
pub fn custom_scheme(
    name: &str,
    carrier: Carrier,
    encoding: Encoding,
    theory: Option<f64>,
) -> Result<Scheme> {
    encoding.check_carrier(&carrier)?;
    Ok(Scheme {
        name: name.to_string(),
        carrier,
        encoding,
        theory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{basis, c, diag, tensor};
    use crate::random::{random_density, random_kraus, random_povm_effects, rng};
    use std::f64::consts::LN_2;

    fn q() -> DensityMatrix {
        DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap()
    }

    fn plus_minus() -> Povm {
        let s = 1.0 / 2f64.sqrt();
        let b = ComplexMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
        Povm::projective(&b).unwrap()
    }

    /// Classical binary channel oracle: uniform input over two rows.
    fn classical_information(rows: &[[f64; 2]; 2]) -> f64 {
        let out = [
            (rows[0][0] + rows[1][0]) / 2.0,
            (rows[0][1] + rows[1][1]) / 2.0,
        ];
        let h = |p: &[f64]| {
            p.iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| -x * x.ln())
                .sum::<f64>()
        };
        h(&out) - 0.5 * h(&rows[0]) - 0.5 * h(&rows[1])
    }

    #[test]
    fn message_state_examples() {
        let g = Guard::default();
        let cl = scheme(SchemeKind::Classical, &q()).unwrap();
        for alpha in 0..2 {
            let st = message_state(&cl.carrier, &cl.encoding, &[alpha], g).unwrap();
            assert!(max_diff(st.matrix(), &projector(&basis(2, alpha))) < 1e-14);
        }

        let trivial = Encoding::new(
            vec![
                OperationalPartition::trivial(2),
                OperationalPartition::trivial(2),
            ],
            0,
        )
        .unwrap();
        let carrier = Carrier::bernoulli(BernoulliShiftSystem::new(q()));
        let st = message_state(&carrier, &trivial, &[1, 1, 1], g).unwrap();
        let reference = tensor_power(q().matrix(), 3, g).unwrap();
        assert!(max_diff(st.matrix(), &reference) < 1e-15);

        let w = scheme(SchemeKind::Weyl, &q()).unwrap();
        let letters = w.encoding.letters();
        for (a1, a2) in [(1, 2), (3, 0), (2, 2)] {
            let st = message_state(&w.carrier, &w.encoding, &[a1, a2], g).unwrap();
            let w1 = &letters[a1].elements()[0];
            let w2 = &letters[a2].elements()[0];
            let expect = tensor(
                &(w1 * q().matrix() * w1.adjoint()),
                &(w2 * q().matrix() * w2.adjoint()),
            )
            .unwrap();
            assert!(max_diff(st.matrix(), &expect) < 1e-14);
        }
        assert!(message_state(&w.carrier, &w.encoding, &[4], g).is_err());
    }

    #[test]
    fn wider_letters_share_sites() {
        // l = 1: each letter is a random channel on three sites
        let mut r = rng(41);
        let carrier = Carrier::bernoulli(BernoulliShiftSystem::new(random_density(&mut r, 2)));
        let letters = (0..2)
            .map(|_| OperationalPartition::new(random_kraus(&mut r, 8, 2)).unwrap())
            .collect();
        let enc = Encoding::new(letters, 1).unwrap();
        let st = message_state(&carrier, &enc, &[0, 1], Guard::default()).unwrap();
        assert_eq!(st.dim(), 16);
        assert!((st.matrix().trace().re - 1.0).abs() < 1e-12);
        let bad = Encoding::new(
            vec![
                OperationalPartition::trivial(4),
                OperationalPartition::trivial(4),
            ],
            0,
        )
        .unwrap();
        assert!(message_state(&carrier, &bad, &[0], Guard::default()).is_err());
    }

    #[test]
    fn conditional_prob_examples() {
        let p0 = DensityMatrix::pure(&basis(2, 0)).unwrap();
        let comp = Povm::projective(&identity(2)).unwrap();
        assert_eq!(conditional_probs(&p0, &comp).unwrap(), vec![1.0, 0.0]);
        assert_eq!(
            conditional_probs(&p0, &Povm::trivial(2)).unwrap(),
            vec![1.0]
        );
        let pm = conditional_probs(&p0, &plus_minus()).unwrap();
        assert!((pm[0] - 0.5).abs() < 1e-15 && (pm[1] - 0.5).abs() < 1e-15);
        assert!(conditional_probs(&p0, &Povm::trivial(3)).is_err());
    }

    #[test]
    fn povm_validation() {
        assert!(Povm::new(vec![diag(&[1.0, 0.5])]).is_err());
        assert!(Povm::new(vec![diag(&[1.5, 1.0]), diag(&[-0.5, 0.0])]).is_err());
        let mut r = rng(42);
        let p = Povm::new(random_povm_effects(&mut r, 3, 4)).unwrap();
        assert!(p.completeness_residual() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let g = Guard::default();
        // noiseless: classical scheme with its own projective decoder
        let cl = scheme(SchemeKind::Classical, &DensityMatrix::maximally_mixed(3)).unwrap();
        let src = SourceModel::uniform(3, 1);
        let comp = Povm::projective(&identity(3)).unwrap();
        let info = mutual_information(&src, &cl.encoding, &comp, &cl.carrier, g).unwrap();
        assert!((info.value - 3f64.ln()).abs() < 1e-12);

        let none =
            mutual_information(&src, &cl.encoding, &Povm::trivial(3), &cl.carrier, g).unwrap();
        assert!(none.value.abs() < 1e-15);

        // binary symmetric channel with crossover 0.1
        let states = vec![
            DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap(),
            DensityMatrix::from_diagonal(&[0.1, 0.9]).unwrap(),
        ];
        let ens = Ensemble::uniform(states).unwrap();
        let info = ensemble_information(&ens, &Povm::projective(&identity(2)).unwrap()).unwrap();
        let oracle = classical_information(&[[0.9, 0.1], [0.1, 0.9]]);
        assert!((info.value - oracle).abs() < 1e-12);
        assert!((info.value - 0.368064).abs() < 1e-6);
        assert!(info.within_bounds(1e-9));
    }

    #[test]
    fn holevo_examples() {
        let same = Ensemble::uniform(vec![q(), q(), q()]).unwrap();
        assert!(holevo_chi(&same).unwrap().abs() < 1e-12);

        for d in 2..=3 {
            let rho = DensityMatrix::maximally_mixed(d);
            let cl = scheme(SchemeKind::Classical, &rho).unwrap();
            let chi = holevo_chi(&cl.single_letter_ensemble(Guard::default()).unwrap()).unwrap();
            assert!((chi - (d as f64).ln()).abs() < 1e-12);
        }
        let w = scheme(SchemeKind::Weyl, &q()).unwrap();
        let chi = holevo_chi(&w.single_letter_ensemble(Guard::default()).unwrap()).unwrap();
        assert!((chi - 0.130812).abs() < 1e-6);
    }

    #[test]
    fn weyl_average_is_maximally_mixed() {
        let mut r = rng(43);
        for d in 2..=4 {
            let rho = random_density(&mut r, d);
            let w = scheme(SchemeKind::Weyl, &rho).unwrap();
            let avg = w
                .single_letter_ensemble(Guard::default())
                .unwrap()
                .average()
                .unwrap();
            assert!(max_diff(avg.matrix(), &identity(d).scale(1.0 / d as f64)) < 1e-10);
        }
    }

    #[test]
    fn dense_coding_states_are_pure() {
        let mut r = rng(44);
        let rho = random_density(&mut r, 3);
        let dc = scheme(SchemeKind::DenseCoding, &rho).unwrap();
        let ens = dc.single_letter_ensemble(Guard::default()).unwrap();
        for s in ens.states() {
            assert!(von_neumann_entropy(s).unwrap() <= 1e-9);
        }
        let chi = holevo_chi(&ens).unwrap();
        let s_avg = von_neumann_entropy(&ens.average().unwrap()).unwrap();
        assert!((chi - s_avg).abs() < 1e-9);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn scheme_theories() {
        let cases: [(DensityMatrix, [f64; 3]); 3] = [
            (DensityMatrix::maximally_mixed(2), [LN_2, 0.0, 2.0 * LN_2]),
            (q(), [0.693147, 0.130812, 1.255482]),
            (
                DensityMatrix::maximally_mixed(3),
                [3f64.ln(), 0.0, 2.0 * 3f64.ln()],
            ),
        ];
        for (rho, expect) in cases {
            for (kind, want) in SchemeKind::ALL.iter().zip(expect) {
                let s = scheme(*kind, &rho).unwrap();
                let theory = s.theory.unwrap();
                assert!((theory - want).abs() < 1e-6, "{kind:?}");
                let chi = holevo_chi(&s.single_letter_ensemble(Guard::default()).unwrap()).unwrap();
                assert!((chi - theory).abs() < 1e-8, "{kind:?}: {chi} vs {theory}");
            }
        }
    }

    #[test]
    fn scheme_classes_and_sizes() {
        let cl = scheme(SchemeKind::Classical, &q()).unwrap();
        assert_eq!(cl.encoding.class(), Classification::General);
        assert_eq!(cl.encoding.alphabet_size(), 2);
        let w = scheme(SchemeKind::Weyl, &q()).unwrap();
        assert_eq!(w.encoding.class(), Classification::Unitary);
        assert_eq!(w.encoding.alphabet_size(), 4);
        let dc = scheme(SchemeKind::DenseCoding, &q()).unwrap();
        assert!(dc.carrier.is_purified());
        assert_eq!(dc.carrier.site_dim(), 4);
        assert_eq!(SchemeKind::parse("dense").unwrap(), SchemeKind::DenseCoding);
        assert!(SchemeKind::parse("quantum").is_err());
    }

    #[test]
    fn optimizer_examples() {
        let states = vec![
            DensityMatrix::pure(&basis(2, 0)).unwrap(),
            DensityMatrix::pure(&basis(2, 1)).unwrap(),
        ];
        let opt = optimize_prior(&states, DEFAULT_PRIOR_TOL, DEFAULT_PRIOR_MAX_ITER).unwrap();
        assert!(opt.converged);
        assert!((opt.chi - LN_2).abs() < 1e-12);
        assert!((opt.priors[0] - 0.5).abs() < 1e-12);

        let bsc = vec![
            DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap(),
            DensityMatrix::from_diagonal(&[0.1, 0.9]).unwrap(),
        ];
        let opt = optimize_prior(&bsc, DEFAULT_PRIOR_TOL, DEFAULT_PRIOR_MAX_ITER).unwrap();
        assert!((opt.chi - 0.368064).abs() < 1e-6);

        let w = scheme(SchemeKind::Weyl, &q()).unwrap();
        let states = w
            .single_letter_ensemble(Guard::default())
            .unwrap()
            .states()
            .to_vec();
        let opt = optimize_prior(&states, DEFAULT_PRIOR_TOL, DEFAULT_PRIOR_MAX_ITER).unwrap();
        assert!((opt.chi - (LN_2 - von_neumann_entropy(&q()).unwrap())).abs() < 1e-9);
        assert!(opt.priors.iter().all(|p| (p - 0.25).abs() < 1e-9));
        assert!(optimize_prior(&states[..1], 1e-9, 10).is_err());
    }

    /// Classical Blahut–Arimoto on a transition matrix, independent of the
    /// quantum code path.
    fn blahut_arimoto(w: &[Vec<f64>], iters: usize) -> f64 {
        let r = w.len();
        let m = w[0].len();
        let mut p = vec![1.0 / r as f64; r];
        let mut cap = 0.0;
        for _ in 0..iters {
            let q: Vec<f64> = (0..m)
                .map(|y| (0..r).map(|x| p[x] * w[x][y]).sum())
                .collect();
            let dv: Vec<f64> = (0..r)
                .map(|x| {
                    (0..m)
                        .filter(|&y| w[x][y] > 0.0)
                        .map(|y| w[x][y] * (w[x][y] / q[y]).ln())
                        .sum()
                })
                .collect();
            cap = (0..r).map(|x| p[x] * dv[x]).sum();
            let z: f64 = (0..r).map(|x| p[x] * dv[x].exp()).sum();
            p = (0..r).map(|x| p[x] * dv[x].exp() / z).collect();
        }
        cap
    }

    #[test]
    fn optimizer_matches_classical_oracle_on_asymmetric_channel() {
        let rows = vec![
            vec![0.95, 0.05, 0.0],
            vec![0.2, 0.6, 0.2],
            vec![0.0, 0.3, 0.7],
        ];
        let states: Vec<_> = rows
            .iter()
            .map(|r| DensityMatrix::from_diagonal(r).unwrap())
            .collect();
        let opt = optimize_prior(&states, 1e-12, 100_000).unwrap();
        let oracle = blahut_arimoto(&rows, 20_000);
        assert!((opt.chi - oracle).abs() < 1e-8, "{} vs {oracle}", opt.chi);
        assert!(opt.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn optimizer_is_monotone_on_random_states() {
        let mut r = rng(45);
        for _ in 0..5 {
            let states: Vec<_> = (0..4).map(|_| random_density(&mut r, 3)).collect();
            let opt = optimize_prior(&states, 1e-10, 2000).unwrap();
            assert!(opt.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            let uniform = holevo_chi(&Ensemble::uniform(states.clone()).unwrap()).unwrap();
            assert!(opt.chi >= uniform - 1e-12);
        }
    }

    #[test]
    fn holevo_quantity_is_concave_in_priors() {
        let mut r = rng(46);
        for _ in 0..10 {
            let states: Vec<_> = (0..3).map(|_| random_density(&mut r, 2)).collect();
            let mut draw = || {
                let w: Vec<f64> = (0..3)
                    .map(|_| rand::Rng::random::<f64>(&mut r) + 0.01)
                    .collect();
                let t: f64 = w.iter().sum();
                w.into_iter().map(|x| x / t).collect::<Vec<_>>()
            };
            let (a, b) = (draw(), draw());
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let chi = |p: &Vec<f64>| {
                holevo_chi(&Ensemble::new(p.clone(), states.clone()).unwrap()).unwrap()
            };
            assert!(chi(&mid) >= 0.5 * (chi(&a) + chi(&b)) - 1e-12);
        }
    }

    #[test]
    fn pgm_examples() {
        let e0 = DensityMatrix::pure(&basis(2, 0)).unwrap();
        let e1 = DensityMatrix::pure(&basis(2, 1)).unwrap();
        let pgm = pgm_povm(&Ensemble::uniform(vec![e0.clone(), e1.clone()]).unwrap()).unwrap();
        assert!(max_diff(&pgm.effects()[0], e0.matrix()) < 1e-12);
        assert!(max_diff(&pgm.effects()[1], e1.matrix()) < 1e-12);
        assert!(pgm.completeness_residual() <= 1e-9);

        let single = pgm_povm(&Ensemble::new(vec![1.0], vec![q()]).unwrap()).unwrap();
        assert_eq!(single.effects().len(), 1);
        assert!(max_diff(&single.effects()[0], &identity(2)) < 1e-12);

        // pure-state ensemble with a kernel
        let p = pgm_povm(&Ensemble::new(vec![1.0], vec![e0]).unwrap()).unwrap();
        assert!(max_diff(&p.effects()[0], &identity(2)) < 1e-12);
    }

    #[test]
    fn pgm_success_for_mirrored_pure_states() {
        // |ψ±⟩ = cos θ|0⟩ ± sin θ|1⟩, equal priors: the PGM is the optimal
        // measurement with success (1 + sin 2θ)/2
        for theta in [0.1, 0.3, 0.6, 0.7] {
            let (cs, sn): (f64, f64) = (f64::cos(theta), f64::sin(theta));
            let psi = |sign: f64| nalgebra::DVector::from_vec(vec![c(cs, 0.0), c(sign * sn, 0.0)]);
            let states = vec![
                DensityMatrix::pure(&psi(1.0)).unwrap(),
                DensityMatrix::pure(&psi(-1.0)).unwrap(),
            ];
            let ens = Ensemble::uniform(states.clone()).unwrap();
            let pgm = pgm_povm(&ens).unwrap();
            let success = 0.5 * states[0].expect(&pgm.effects()[0]).re
                + 0.5 * states[1].expect(&pgm.effects()[1]).re;
            assert!((success - 0.5 * (1.0 + (2.0 * theta).sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn holevo_bounds_random_decoders() {
        let mut r = rng(47);
        let g = Guard::default();
        for kind in SchemeKind::ALL {
            let s = scheme(kind, &random_density(&mut r, 2)).unwrap();
            for n in 1..=2 {
                let ens = block_ensemble(
                    &s.carrier,
                    &s.encoding,
                    &SourceModel::uniform(s.encoding.alphabet_size(), n),
                    g,
                )
                .unwrap();
                let chi = holevo_chi(&ens).unwrap();
                for m in [2, 3, 5] {
                    let povm = Povm::new(random_povm_effects(&mut r, ens.dim(), m)).unwrap();
                    let info = ensemble_information(&ens, &povm).unwrap();
                    assert!(info.within_bounds(1e-9));
                    assert!(info.value <= chi + 1e-8);
                }
            }
        }
    }

    #[test]
    fn bernoulli_source_table_is_product() {
        let src = SourceModel::bernoulli(vec![0.2, 0.8], 3).unwrap();
        let t = src.table(Guard::default()).unwrap();
        assert_eq!(t.len(), 8);
        // message (1, 0, 0) has index 1
        assert!((t[1] - 0.8 * 0.2 * 0.2).abs() < 1e-15);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(SourceModel::bernoulli(vec![0.5, 0.6], 2).is_err());
    }

    #[test]
    fn report_on_maximally_mixed_qubit() {
        let schemes: Vec<_> = SchemeKind::ALL
            .iter()
            .map(|k| scheme(*k, &DensityMatrix::maximally_mixed(2)).unwrap())
            .collect();
        let reports = capacity_report(
            &schemes,
            2,
            &[DecoderKind::Pgm, DecoderKind::Product],
            Guard::default(),
        )
        .unwrap();
        let chis: Vec<f64> = reports.iter().map(|r| r.chi_per_letter).collect();
        assert!((chis[0] - LN_2).abs() < 1e-8);
        assert!(chis[1].abs() < 1e-8);
        assert!((chis[2] - 2.0 * LN_2).abs() < 1e-8);
        for r in &reports {
            assert!(r.checks.all(), "{}: {:?}", r.scheme, r.checks);
        }
        // dense coding meets the dynamical-entropy bound with equality
        let h = schemes[2].carrier.system().analytic_entropy().unwrap();
        assert!((chis[2] - h).abs() < 1e-8);
    }

    #[test]
    fn report_with_trivial_encoding_is_zero() {
        let carrier = Carrier::bernoulli(BernoulliShiftSystem::new(q()));
        let enc = Encoding::new(
            vec![
                OperationalPartition::trivial(2),
                OperationalPartition::trivial(2),
            ],
            0,
        )
        .unwrap();
        let s = custom_scheme("trivial", carrier, enc, Some(0.0)).unwrap();
        let rep = capacity_report(&[s], 2, &[DecoderKind::Pgm], Guard::default()).unwrap();
        assert!(rep[0].chi_per_letter.abs() < 1e-12);
        assert!(rep[0].block.iter().all(|b| b.info_per_letter.abs() < 1e-12));
        assert!(rep[0].checks.all());
    }

    #[test]
    fn report_blocks_respect_holevo() {
        let schemes: Vec<_> = SchemeKind::ALL
            .iter()
            .map(|k| scheme(*k, &q()).unwrap())
            .collect();
        let reports = capacity_report(
            &schemes,
            2,
            &[
                DecoderKind::Pgm,
                DecoderKind::Product,
                DecoderKind::Projective,
            ],
            Guard::default(),
        )
        .unwrap();
        for r in &reports {
            assert!(r.checks.all());
            for b in &r.block {
                assert!(b.info_per_letter <= r.chi_per_letter + 1e-8);
            }
        }
    }

    #[test]
    fn dense_coding_bell_states_are_perfectly_decoded() {
        let dc = scheme(SchemeKind::DenseCoding, &DensityMatrix::maximally_mixed(2)).unwrap();
        let ens = dc.single_letter_ensemble(Guard::default()).unwrap();
        let info = ensemble_information(&ens, &pgm_povm(&ens).unwrap()).unwrap();
        assert!((info.value - 2.0 * LN_2).abs() < 1e-10);
    }
}
