mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdyn_core::channel::{capacity_report, scheme, CapacityReport, DecoderKind, SchemeKind};
use qdyn_core::dynsys::{entropy_trace, EntropyTrace};
use qdyn_core::format::{entropy_trace_csv, ser_f64, ser_opt_f64, sig17, to_json};
use qdyn_core::verify::{run_suite, Suite, VerifyOptions};
use qdyn_core::{Error, Result};
use serde::Serialize;

use config::{diagonal_system, Config, Format, PartitionSpec};

#[derive(Parser, Debug)]
#[command(
    name = "qdyn",
    version,
    about = "Dynamical entropy and quantum dynamical channel experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest matrix dimension or enumeration size allowed.
    #[arg(long, global = true)]
    guard: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropy trace S_n of a partition under a dynamical system.
    Entropy {
        /// Bernoulli site state as a comma-separated diagonal, e.g. 0.75,0.25.
        #[arg(long)]
        diag: Option<String>,
        /// weyl, trivial, computational or random:K.
        #[arg(long)]
        partition: Option<String>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Holevo capacities of the encoding schemes with block checks.
    Capacity {
        #[arg(long)]
        diag: Option<String>,
        /// classical, weyl, dense or all.
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        n_max: Option<usize>,
        /// Comma-separated list of pgm, product, projective.
        #[arg(long)]
        decoders: Option<String>,
    },
    /// Seeded verification suite.
    Verify {
        /// bounds, gns, theorem1, theorem2 or twirl.
        suite: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Fixed site state for the theorem suites.
        #[arg(long)]
        diag: Option<String>,
        /// Fixed dimension for the bounds and gns suites.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Block mutual information of decoders against the Holevo quantity.
    Simulate {
        #[arg(long)]
        diag: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        decoders: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn merge(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let name = match &cli.command {
        Command::Entropy { .. } => "entropy",
        Command::Capacity { .. } => "capacity",
        Command::Verify { .. } => "verify",
        Command::Simulate { .. } => "simulate",
    };
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(Error::Invalid(format!(
                "config is for '{c}' but the '{name}' command was run"
            )));
        }
    }
    let c = &cli.common;
    cfg.seed = c.seed.or(cfg.seed);
    cfg.guard = c.guard.or(cfg.guard);
    cfg.format = c.format.or(cfg.format);
    cfg.out = c.out.clone().or(cfg.out.take());

    let diag = match &cli.command {
        Command::Entropy {
            diag,
            partition,
            n_max,
        } => {
            if let Some(p) = partition {
                cfg.partition = Some(PartitionSpec::Named(p.clone()));
            }
            cfg.n_max = n_max.or(cfg.n_max);
            diag
        }
        Command::Capacity {
            diag,
            scheme,
            n_max,
            decoders,
        }
        | Command::Simulate {
            diag,
            scheme,
            n_max,
            decoders,
        } => {
            cfg.scheme = scheme.clone().or(cfg.scheme.take());
            cfg.n_max = n_max.or(cfg.n_max);
            if let Some(list) = decoders {
                cfg.decoders = Some(list.split(',').map(|s| s.trim().to_string()).collect());
            }
            diag
        }
        Command::Verify {
            suite,
            trials,
            diag,
            dim,
        } => {
            cfg.suite = suite.clone().or(cfg.suite.take());
            cfg.trials = trials.or(cfg.trials);
            cfg.dim = dim.or(cfg.dim);
            diag
        }
    };
    if let Some(d) = diag {
        cfg.system = Some(diagonal_system(d).map_err(|e| Error::Invalid(format!("--diag {e}")))?);
        cfg.finite = None;
    }
    if cfg.guard == Some(0) {
        return Err(Error::Invalid("guard must be positive".into()));
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = merge(&cli)?;
    match cli.command {
        Command::Entropy { .. } => cmd_entropy(&cfg),
        Command::Capacity { .. } => cmd_capacity(&cfg),
        Command::Verify { .. } => cmd_verify(&cfg),
        Command::Simulate { .. } => cmd_simulate(&cfg),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct EntropySummary {
    command: &'static str,
    seed: u64,
    guard: usize,
    n_max: usize,
    #[serde(serialize_with = "ser_f64")]
    final_increment: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    analytic: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceRow>>,
}

#[derive(Serialize)]
struct TraceRow {
    n: usize,
    #[serde(rename = "S_n", serialize_with = "ser_f64")]
    s_n: f64,
    #[serde(rename = "S_n_over_n", serialize_with = "ser_f64")]
    s_n_over_n: f64,
    #[serde(serialize_with = "ser_f64")]
    increment: f64,
}

fn cmd_entropy(cfg: &Config) -> Result<bool> {
    let guard = cfg.guard();
    let n_max = cfg.n_max.unwrap_or(4);
    if n_max == 0 {
        return Err(Error::Invalid("n_max must be at least 1".into()));
    }
    let (trace, analytic): (EntropyTrace, Option<f64>) = match (&cfg.system, &cfg.finite) {
        (Some(_), Some(_)) => {
            return Err(Error::Invalid(
                "config sets both \"system\" and \"finite\"".into(),
            ))
        }
        (None, Some(lit)) => {
            let system = lit.to_system()?;
            let x = cfg.partition_spec().build(system.dim(), cfg.seed())?;
            (entropy_trace(&system, &x, n_max, guard)?, None)
        }
        _ => {
            let system = cfg.bernoulli()?;
            let x = cfg.sited_partition(&system)?;
            (
                entropy_trace(&system, &x, n_max, guard)?,
                Some(system.analytic_entropy()?),
            )
        }
    };
    let final_increment = trace.final_increment();
    let mut summary = EntropySummary {
        command: "entropy",
        seed: cfg.seed(),
        guard: guard.0,
        n_max,
        final_increment,
        analytic,
        gap: analytic.map(|a| a - final_increment),
        trace: None,
    };
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            emit(cfg.out.as_deref(), &entropy_trace_csv(&trace))?;
            match &cfg.out {
                Some(path) => emit(
                    Some(&path.with_extension("summary.json")),
                    &to_json(&summary),
                )?,
                None => eprint!("{}", to_json(&summary)),
            }
        }
        Format::Json => {
            summary.trace = Some(
                (0..trace.n_max())
                    .map(|i| TraceRow {
                        n: i + 1,
                        s_n: trace.entropies[i],
                        s_n_over_n: trace.averages[i],
                        increment: trace.increments[i],
                    })
                    .collect(),
            );
            emit(cfg.out.as_deref(), &to_json(&summary))?;
        }
    }
    Ok(true)
}

fn schemes_of(cfg: &Config) -> Result<Vec<SchemeKind>> {
    match cfg.scheme.as_deref().unwrap_or("all") {
        "all" => Ok(SchemeKind::ALL.to_vec()),
        name => Ok(vec![SchemeKind::parse(name)?]),
    }
}

fn decoders_of(cfg: &Config, default: &[DecoderKind]) -> Result<Vec<DecoderKind>> {
    match &cfg.decoders {
        Some(list) => list.iter().map(|s| DecoderKind::parse(s)).collect(),
        None => Ok(default.to_vec()),
    }
}

fn reports_for(
    cfg: &Config,
    default_n: usize,
    default_decoders: &[DecoderKind],
) -> Result<Vec<CapacityReport>> {
    let rho = cfg.bernoulli()?.site_state().clone();
    let n_max = cfg.n_max.unwrap_or(default_n);
    let schemes = schemes_of(cfg)?
        .into_iter()
        .map(|k| scheme(k, &rho))
        .collect::<Result<Vec<_>>>()?;
    capacity_report(
        &schemes,
        n_max,
        &decoders_of(cfg, default_decoders)?,
        cfg.guard(),
    )
}

#[derive(Serialize)]
struct CapacityDocument<'a> {
    command: &'static str,
    seed: u64,
    guard: usize,
    passed: bool,
    reports: &'a [CapacityReport],
}

fn cmd_capacity(cfg: &Config) -> Result<bool> {
    let reports = reports_for(cfg, 1, &[DecoderKind::Pgm])?;
    let passed = reports.iter().all(|r| r.checks.all());
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&CapacityDocument {
            command: "capacity",
            seed: cfg.seed(),
            guard: cfg.guard().0,
            passed,
            reports: &reports,
        }),
        Format::Csv => {
            let mut s = String::from(
                "scheme,class,chi_per_letter,theory,holevo_ok,ordering_ok,theorem1_ok,locality_ok\n",
            );
            for r in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.scheme,
                    r.class,
                    sig17(r.chi_per_letter),
                    r.theory.map(sig17).unwrap_or_default(),
                    r.checks.holevo_ok,
                    r.checks.ordering_ok,
                    r.checks.theorem1_ok,
                    r.checks.locality_ok
                ));
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(passed)
}

#[derive(Serialize)]
struct SimulateRow {
    scheme: String,
    n: usize,
    decoder: DecoderKind,
    #[serde(rename = "I_n_over_n", serialize_with = "ser_f64")]
    info_per_letter: f64,
    #[serde(serialize_with = "ser_f64")]
    chi_n_over_n: f64,
    #[serde(serialize_with = "ser_f64")]
    chi_per_letter: f64,
    #[serde(serialize_with = "ser_f64")]
    gap: f64,
}

#[derive(Serialize)]
struct SimulateDocument {
    command: &'static str,
    seed: u64,
    guard: usize,
    passed: bool,
    rows: Vec<SimulateRow>,
}

fn cmd_simulate(cfg: &Config) -> Result<bool> {
    let reports = reports_for(
        cfg,
        2,
        &[
            DecoderKind::Pgm,
            DecoderKind::Product,
            DecoderKind::Projective,
        ],
    )?;
    let passed = reports.iter().all(|r| r.checks.holevo_ok);
    let rows: Vec<SimulateRow> = reports
        .iter()
        .flat_map(|r| {
            r.block.iter().map(move |b| SimulateRow {
                scheme: r.scheme.clone(),
                n: b.n,
                decoder: b.decoder,
                info_per_letter: b.info_per_letter,
                chi_n_over_n: b.chi_over_n,
                chi_per_letter: r.chi_per_letter,
                gap: r.chi_per_letter - b.info_per_letter,
            })
        })
        .collect();
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&SimulateDocument {
            command: "simulate",
            seed: cfg.seed(),
            guard: cfg.guard().0,
            passed,
            rows,
        }),
        Format::Csv => {
            let mut s =
                String::from("scheme,n,decoder,I_n_over_n,chi_n_over_n,chi_per_letter,gap\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.scheme,
                    r.n,
                    r.decoder.name(),
                    sig17(r.info_per_letter),
                    sig17(r.chi_n_over_n),
                    sig17(r.chi_per_letter),
                    sig17(r.gap)
                ));
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(passed)
}

fn cmd_verify(cfg: &Config) -> Result<bool> {
    let suite = Suite::parse(
        cfg.suite
            .as_deref()
            .ok_or_else(|| Error::Invalid("no suite given".into()))?,
    )?;
    let mut opts = VerifyOptions::new(cfg.seed(), cfg.trials.unwrap_or(suite.default_trials()));
    opts.guard = cfg.guard();
    opts.dim = cfg.dim;
    opts.site_state = cfg.site_state()?;
    let report = run_suite(suite, &opts)?;
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json(),
        Format::Csv => {
            let mut s = String::from("index,passed,residual,label\n");
            for t in &report.trials {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    t.index,
                    t.passed,
                    sig17(t.residual),
                    t.label
                ));
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    eprint!(
        "{}",
        report
            .to_text()
            .lines()
            .last()
            .map(|l| format!("{l}\n"))
            .unwrap_or_default()
    );
    Ok(report.passed)
}
