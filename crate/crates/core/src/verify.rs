//! Seeded verification suites.
//!
//! Each suite draws its random instances from one ChaCha stream seeded by
//! the caller and runs trials sequentially, so a report is a pure function of
//! `(suite, options)` and serializes byte-identically across runs.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::bernoulli::BernoulliShiftSystem;
use crate::channel::{
    block_ensemble, holevo_chi, optimize_prior, scheme, Carrier, Encoding, Ensemble, SchemeKind,
    SourceModel,
};
use crate::dynsys::{correlation_matrix, gns_entropy, random_system};
use crate::error::{Error, Result};
use crate::format::{ser_f64, to_json};
use crate::opalg::{
    identity, max_diff, von_neumann_entropy, weyl_family, ComplexMatrix, DensityMatrix, Guard,
};
use crate::partition::OperationalPartition;
use crate::random::{random_density, random_kraus, random_matrix, random_pure_density, rng};

pub const TWIRL_TOL: f64 = 1e-10;
pub const BOUND_TOL: f64 = 1e-8;
pub const GNS_TOL: f64 = 1e-7;
pub const THEOREM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bounds,
    Gns,
    Theorem1,
    Theorem2,
    Twirl,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Bounds,
        Suite::Gns,
        Suite::Theorem1,
        Suite::Theorem2,
        Suite::Twirl,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bounds" => Ok(Suite::Bounds),
            "gns" => Ok(Suite::Gns),
            "theorem1" => Ok(Suite::Theorem1),
            "theorem2" => Ok(Suite::Theorem2),
            "twirl" => Ok(Suite::Twirl),
            other => Err(Error::Invalid(format!(
                "unknown suite '{other}' (expected bounds, gns, theorem1, theorem2 or twirl)"
            ))),
        }
    }

    pub fn default_trials(&self) -> usize {
        match self {
            Suite::Bounds => 200,
            Suite::Gns => 50,
            Suite::Theorem1 => 20,
            Suite::Theorem2 => 10,
            Suite::Twirl => 100,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Bounds => "bounds",
            Suite::Gns => "gns",
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Twirl => "twirl",
        })
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: usize,
    /// Fixed site state for the theorem suites; random otherwise.
    pub site_state: Option<DensityMatrix>,
    /// Fixed Hilbert-space dimension for the bounds and gns suites.
    pub dim: Option<usize>,
    pub guard: Guard,
}

impl VerifyOptions {
    pub fn new(seed: u64, trials: usize) -> Self {
        VerifyOptions {
            seed,
            trials,
            site_state: None,
            dim: None,
            guard: Guard::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trial {
    pub index: usize,
    pub passed: bool,
    pub label: String,
    /// Largest tolerance-relative violation measure of the trial: distance
    /// from an identity, or how far an inequality's slack went negative.
    #[serde(serialize_with = "ser_f64")]
    pub residual: f64,
    pub metrics: Vec<Metric>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: Vec<Trial>,
    pub passed: bool,
    pub failures: usize,
    #[serde(serialize_with = "ser_f64")]
    pub max_residual: f64,
}

impl VerifyReport {
    fn from_trials(suite: Suite, seed: u64, trials: Vec<Trial>) -> Self {
        let failures = trials.iter().filter(|t| !t.passed).count();
        let max_residual = trials.iter().map(|t| t.residual).fold(0.0, f64::max);
        VerifyReport {
            suite,
            seed,
            passed: failures == 0,
            failures,
            max_residual,
            trials,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// One line per trial.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.trials {
            out.push_str(&format!(
                "{} trial {:>4} {} residual={} {}\n",
                self.suite,
                t.index,
                if t.passed { "PASS" } else { "FAIL" },
                crate::format::sig17(t.residual),
                t.label
            ));
        }
        out.push_str(&format!(
            "{}: {}/{} passed, max residual {}\n",
            self.suite,
            self.trials.len() - self.failures,
            self.trials.len(),
            crate::format::sig17(self.max_residual)
        ));
        out
    }
}

struct TrialBuilder {
    index: usize,
    label: String,
    metrics: Vec<Metric>,
    residual: f64,
    passed: bool,
}

impl TrialBuilder {
    fn new(index: usize, label: String) -> Self {
        TrialBuilder {
            index,
            label,
            metrics: Vec::new(),
            residual: 0.0,
            passed: true,
        }
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push(Metric {
            name: name.to_string(),
            value,
        });
    }

    /// `|value| < tol`.
    fn equality(&mut self, name: &str, value: f64, tol: f64) {
        self.metric(name, value);
        self.residual = self.residual.max(value.abs());
        self.passed &= value.abs() < tol;
    }

    /// `lhs ≤ rhs + tol`; the residual records any excess.
    fn at_most(&mut self, name: &str, lhs: f64, rhs: f64, tol: f64) {
        self.metric(name, rhs - lhs);
        self.residual = self.residual.max((lhs - rhs).max(0.0));
        self.passed &= lhs <= rhs + tol;
    }

    fn fail(&mut self, why: String) {
        self.passed = false;
        self.label = format!("{} error: {why}", self.label);
    }

    fn build(self) -> Trial {
        Trial {
            index: self.index,
            passed: self.passed,
            label: self.label,
            residual: self.residual,
            metrics: self.metrics,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let trials = match suite {
        Suite::Twirl => twirl(opts),
        Suite::Bounds => bounds(opts),
        Suite::Gns => gns(opts),
        Suite::Theorem1 => theorem1(opts),
        Suite::Theorem2 => theorem2(opts),
    }?;
    Ok(VerifyReport::from_trials(suite, opts.seed, trials))
}

/// `‖(1/d²) Σ W σ W† − tr(σ) 1/d‖_max` for a general matrix σ.
pub fn twirl_residual(sigma: &ComplexMatrix) -> f64 {
    let d = sigma.nrows();
    let mut acc = ComplexMatrix::zeros(d, d);
    for w in weyl_family(d) {
        acc += &w * sigma * w.adjoint();
    }
    let avg = acc.unscale((d * d) as f64);
    let target = identity(d).map(|z| z * sigma.trace() / d as f64);
    max_diff(&avg, &target)
}

fn twirl(opts: &VerifyOptions) -> Result<Vec<Trial>> {
    let mut r = rng(opts.seed);
    let mut out = Vec::with_capacity(opts.trials);
    for index in 0..opts.trials {
        let mut t = TrialBuilder::new(index, "random 2x2 and 3x3 matrices".into());
        for d in [2usize, 3] {
            let sigma = random_matrix(&mut r, d, d);
            t.equality(&format!("residual_d{d}"), twirl_residual(&sigma), TWIRL_TOL);
        }
        out.push(t.build());
    }
    Ok(out)
}

fn bounds(opts: &VerifyOptions) -> Result<Vec<Trial>> {
    let mut r = rng(opts.seed);
    let mut out = Vec::with_capacity(opts.trials);
    for index in 0..opts.trials {
        let n = opts.dim.unwrap_or_else(|| r.random_range(2..=8));
        let k = r.random_range(1..=6);
        // every fourth state is pure so the bound is probed at S(σ) = 0 too
        let sigma = if index % 4 == 3 {
            random_pure_density(&mut r, n)
        } else {
            random_density(&mut r, n)
        };
        let x = OperationalPartition::new(random_kraus(&mut r, n, k))?;
        let mut t = TrialBuilder::new(index, format!("N={n} k={k}"));
        let s_sigma = von_neumann_entropy(&sigma)?;
        let s_corr = von_neumann_entropy(&x.correlation(&sigma)?.matrix)?;
        t.metric("S_sigma", s_sigma);
        t.metric("S_corr", s_corr);
        t.at_most("slack_ln_k", s_corr, s_sigma + (k as f64).ln(), BOUND_TOL);
        t.at_most("slack_ln_N", s_corr, s_sigma + (n as f64).ln(), BOUND_TOL);
        let s_weyl =
            von_neumann_entropy(&OperationalPartition::weyl(n).correlation(&sigma)?.matrix)?;
        t.equality(
            "weyl_saturation",
            s_weyl - s_sigma - (n as f64).ln(),
            BOUND_TOL,
        );
        out.push(t.build());
    }
    Ok(out)
}

fn gns(opts: &VerifyOptions) -> Result<Vec<Trial>> {
    let mut r = rng(opts.seed);
    let mut out = Vec::with_capacity(opts.trials);
    for index in 0..opts.trials {
        let dim = opts.dim.unwrap_or_else(|| r.random_range(2..=3));
        let k = r.random_range(1..=3);
        let n = r.random_range(1..=2);
        let system = random_system(&mut r, dim);
        let x = OperationalPartition::new(random_kraus(&mut r, dim, k))?;
        let mut t = TrialBuilder::new(index, format!("dim={dim} k={k} n={n}"));
        let s = correlation_matrix(&system, &x, n, opts.guard)?.entropy()?;
        let s_hat = gns_entropy(&system, &x, n, opts.guard)?;
        t.metric("S_corr", s);
        t.metric("S_gns", s_hat);
        t.equality("difference", s - s_hat, GNS_TOL);
        out.push(t.build());
    }
    Ok(out)
}

fn site_state_for(opts: &VerifyOptions, r: &mut impl Rng, index: usize) -> DensityMatrix {
    match &opts.site_state {
        Some(s) => s.clone(),
        None => random_density(r, 2 + index % 2),
    }
}

fn random_priors(r: &mut impl Rng, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| r.random::<f64>() + 0.01).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn theorem1(opts: &VerifyOptions) -> Result<Vec<Trial>> {
    let mut r = rng(opts.seed);
    let mut out = Vec::with_capacity(opts.trials);
    for index in 0..opts.trials {
        let rho = site_state_for(opts, &mut r, index);
        let d = rho.dim();
        let system = BernoulliShiftSystem::new(rho.clone());
        let h = system.analytic_entropy()?;
        let mut t = TrialBuilder::new(index, format!("d={d}"));
        t.metric("analytic_entropy", h);

        let mut best = f64::MIN;
        let mut best_kind = SchemeKind::Classical;
        for kind in SchemeKind::ALL {
            let s = scheme(kind, &rho)?;
            let chi = holevo_chi(&s.single_letter_ensemble(opts.guard)?)?;
            t.at_most(&format!("slack_{}", kind.name()), chi, h, THEOREM_TOL);
            if chi > best {
                best = chi;
                best_kind = kind;
            }
        }
        t.equality("max_chi_minus_h", best - h, THEOREM_TOL);
        if best_kind != SchemeKind::DenseCoding {
            t.fail(format!("maximum attained by {}", best_kind.name()));
        }

        // random general encodings on both carriers, with random and with
        // optimized Bernoulli priors
        for purified in [false, true] {
            let letters = r.random_range(2..=4);
            let kraus = r.random_range(1..=3);
            let elements: Vec<OperationalPartition> = (0..letters)
                .map(|_| {
                    let xs = random_kraus(&mut r, d, kraus);
                    let xs = if purified {
                        xs.into_iter().map(|x| x.kronecker(&identity(d))).collect()
                    } else {
                        xs
                    };
                    OperationalPartition::new(xs)
                })
                .collect::<Result<_>>()?;
            let carrier = if purified {
                Carrier::purified(system.clone())?
            } else {
                Carrier::bernoulli(system.clone())
            };
            let enc = Encoding::new(elements, 0)?;
            let priors = random_priors(&mut r, letters);
            let ens = block_ensemble(
                &carrier,
                &enc,
                &SourceModel::bernoulli(priors, 1)?,
                opts.guard,
            )?;
            let tag = if purified { "purified" } else { "plain" };
            t.at_most(
                &format!("slack_random_{tag}"),
                holevo_chi(&ens)?,
                h,
                THEOREM_TOL,
            );
            let opt = optimize_prior(ens.states(), 1e-10, 500)?;
            t.at_most(&format!("slack_optimized_{tag}"), opt.chi, h, THEOREM_TOL);
        }
        out.push(t.build());
    }
    Ok(out)
}

fn theorem2(opts: &VerifyOptions) -> Result<Vec<Trial>> {
    let mut r = rng(opts.seed);
    let cases: Vec<(String, DensityMatrix)> = match &opts.site_state {
        Some(s) => vec![(format!("d={} given", s.dim()), s.clone())],
        None => {
            let mut v = vec![
                ("d=2 I/2".to_string(), DensityMatrix::maximally_mixed(2)),
                (
                    "d=2 diag(0.75,0.25)".to_string(),
                    DensityMatrix::from_diagonal(&[0.75, 0.25])?,
                ),
                ("d=3 I/3".to_string(), DensityMatrix::maximally_mixed(3)),
            ];
            for i in 0..opts.trials {
                let d = 2 + i % 2;
                v.push((format!("d={d} random"), random_density(&mut r, d)));
            }
            v
        }
    };
    let mut out = Vec::with_capacity(cases.len());
    for (index, (label, rho)) in cases.into_iter().enumerate() {
        let mut t = TrialBuilder::new(index, label);
        let ln_d = (rho.dim() as f64).ln();
        let s = von_neumann_entropy(&rho)?;
        t.metric("S_rho", s);
        for kind in SchemeKind::ALL {
            let expect = match kind {
                SchemeKind::Weyl => ln_d - s,
                SchemeKind::Classical => ln_d,
                SchemeKind::DenseCoding => ln_d + s,
            };
            let sch = scheme(kind, &rho)?;
            let ens: Ensemble = sch.single_letter_ensemble(opts.guard)?;
            let chi = holevo_chi(&ens)?;
            t.metric(&format!("chi_{}", kind.name()), chi);
            t.equality(
                &format!("uniform_{}", kind.name()),
                chi - expect,
                THEOREM_TOL,
            );
            let opt = optimize_prior(ens.states(), 1e-10, 1000)?;
            t.equality(
                &format!("optimized_{}", kind.name()),
                opt.chi - expect,
                THEOREM_TOL,
            );
        }
        out.push(t.build());
    }
    Ok(out)
}
