//! `sparsebound`: sample-complexity lower bounds for adaptive sparse
//! recovery, and the Monte-Carlo experiments that validate them.
//!
//! Subcommands:
//! * `bound`    - evaluate the test-count bound, the `(T, SNR)`
//!   feasibility condition, and the SNR threshold from flags;
//! * `simulate` - run one experiment configuration from JSON;
//! * `sweep`    - run a `T` or SNR grid from JSON;
//! * `mi`       - standalone conditional mutual information computation;
//! * `verify`   - run the full consistency suite.
//!
//! Exit codes: 0 success, 1 configuration or domain error, 2 resource-cap
//! error, 3 verification-suite violation.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sparsebound::acceptance::{run_all, DEFAULT_SUITE_SEED};
use sparsebound::bounds::{
    adaptive_lower_bound, cs_feasibility, sequence_mi_cap, snr_necessary, BoundForm, BoundReport,
    CsFeasibilityReport, PowerAllocation,
};
use sparsebound::harness::{compare_adaptive_gap, run_trials, sweep, ExperimentConfig};
use sparsebound::infotheory::{
    binary_channel_mi_mc, exact_conditional_mi, linear_cs_mi_closed_form, linear_cs_mi_mc,
    DiscreteDesign, GaussianDesign, MiEstimate, SequenceMiProfile,
};
use sparsebound::models::{ObservationModel, OneBitCsModel};
use sparsebound::types::{LatentCoefficients, ProblemDims};
use sparsebound::{Error, Result, Scalar};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sparsebound", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    GroupTesting,
    OneBitCs,
    LinearCs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormArg {
    Asymptotic,
    FiniteFano,
}

fn model_name(m: ModelArg) -> &'static str {
    match m {
        ModelArg::GroupTesting => "group-testing",
        ModelArg::OneBitCs => "one-bit-cs",
        ModelArg::LinearCs => "linear-cs",
    }
}

impl From<FormArg> for BoundForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Asymptotic => BoundForm::Asymptotic,
            FormArg::FiniteFano => BoundForm::FiniteFano,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitsArg {
    Nats,
    Bits,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate sample-complexity bounds from flags.
    Bound(BoundArgs),
    /// Run one experiment configuration from a JSON file.
    Simulate(SimulateArgs),
    /// Run a T or SNR grid from a JSON file.
    Sweep(SimulateArgs),
    /// Compare a nonadaptive and an adaptive configuration at a matched
    /// budget.
    Gap(GapArgs),
    /// Compute a conditional mutual information value.
    Mi(MiArgs),
    /// Run the verification suite and write its report.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// SNR (required for the linear CS bound).
    #[arg(long)]
    snr: Option<f64>,
    /// Horizon for the linear CS per-sequence cap and feasibility check.
    #[arg(long)]
    t: Option<u64>,
    #[arg(long, value_enum, default_value = "finite-fano")]
    form: FormArg,
    #[arg(long, value_enum, default_value = "nats")]
    units: UnitsArg,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a flat CSV rendering of the rows.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GapArgs {
    /// Baseline (nonadaptive) configuration JSON.
    #[arg(long)]
    baseline: PathBuf,
    /// Adaptive configuration JSON (same model, dims, trials, seed).
    #[arg(long)]
    adaptive: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MiArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Sparsity (length of the on-support block).
    #[arg(long)]
    k: usize,
    /// Revealed subset size `|S~|`.
    #[arg(long, default_value_t = 0)]
    revealed: usize,
    /// Group testing crossover probability.
    #[arg(long, default_value_t = 0.0)]
    crossover: f64,
    /// Bernoulli inclusion probability for discrete designs.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// SNR for the 1-bit and linear models.
    #[arg(long)]
    snr: Option<f64>,
    /// Number of variables (linear CS closed form).
    #[arg(long)]
    n: Option<usize>,
    /// Per-step power share (linear CS closed form).
    #[arg(long, default_value_t = 1.0)]
    p_t: f64,
    /// Design covariance diagonal for Monte-Carlo estimation.
    #[arg(long)]
    variance: Option<f64>,
    /// Constant off-diagonal correlation of the design covariance.
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SUITE_SEED)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct BoundOutput {
    model: String,
    n: usize,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr: Option<f64>,
    bound: BoundReport<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cs_feasibility: Option<CsFeasibilityReport<Scalar>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_necessary: Option<f64>,
}

#[derive(Serialize)]
struct MiOutput {
    model: String,
    k: usize,
    revealed: usize,
    units: String,
    estimate: MiEstimate<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
}

fn emit(out: &Option<PathBuf>, payload: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{payload}");
            Ok(())
        }
    }
}

fn read_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&raw)
}

fn cmd_bound(args: &BoundArgs) -> Result<()> {
    let dims = ProblemDims::with_candidate_cap(args.n, args.k, None)?;
    let form: BoundForm = args.form.into();
    let ln2 = std::f64::consts::LN_2;
    let (bound, feasibility, threshold) = match args.model {
        ModelArg::GroupTesting | ModelArg::OneBitCs => {
            // Binary output caps the per-step information at ln 2 nats.
            let profiles: BTreeMap<usize, SequenceMiProfile<Scalar>> = (0..args.k)
                .map(|j| {
                    Ok((
                        j,
                        SequenceMiProfile::constant(MiEstimate::exact(ln2), 1)?,
                    ))
                })
                .collect::<Result<_>>()?;
            (adaptive_lower_bound(&dims, &profiles, form)?, None, None)
        }
        ModelArg::LinearCs => {
            let snr = args
                .snr
                .ok_or_else(|| Error::config("--snr is required for the linear CS bound"))?;
            let t = args
                .t
                .ok_or_else(|| Error::config("--t is required for the linear CS bound"))?;
            let allocation = PowerAllocation::uniform(t as usize)?;
            let mi: BTreeMap<usize, Scalar> = (0..args.k)
                .map(|j| Ok((j, sequence_mi_cap(snr, args.n, args.k, j, &allocation)?)))
                .collect::<Result<_>>()?;
            let bound = sparsebound::bounds::nonadaptive_lower_bound(&dims, &mi, form)?;
            let feas = cs_feasibility(t, snr, args.n, args.k, form)?;
            let thr = snr_necessary::<f64>(args.n, args.k, form)?;
            (bound, Some(feas), Some(thr))
        }
    };
    let (bound, feasibility) = match args.units {
        UnitsArg::Nats => (bound, feasibility),
        UnitsArg::Bits => (bound.in_bits(), feasibility.map(|f| f.in_bits())),
    };
    let output = BoundOutput {
        model: model_name(args.model).to_string(),
        n: args.n,
        k: args.k,
        t: args.t,
        snr: args.snr,
        bound,
        cs_feasibility: feasibility,
        snr_necessary: threshold,
    };
    emit(
        &args.out,
        &serde_json::to_string_pretty(&output).expect("output serializes"),
    )
}

fn cmd_mi(args: &MiArgs) -> Result<()> {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    if args.revealed >= args.k {
        return Err(Error::config("--revealed must be < --k"));
    }
    let (estimate, closed) = match args.model {
        ModelArg::GroupTesting => {
            let model = ObservationModel::group_testing(args.crossover)?;
            let design = DiscreteDesign::bernoulli(args.p)?;
            let beta = LatentCoefficients::unit(args.k);
            (
                exact_conditional_mi(&model, &design, args.k, args.revealed, &beta)?,
                None,
            )
        }
        ModelArg::OneBitCs => {
            let snr = args
                .snr
                .ok_or_else(|| Error::config("--snr is required for the 1-bit model"))?;
            let model = OneBitCsModel::new(snr)?;
            let variance = args.variance.unwrap_or(1.0);
            let design = GaussianDesign::constant_correlation(args.k, variance, args.rho)?;
            let beta = LatentCoefficients::unit(args.k);
            (
                binary_channel_mi_mc(&model, &design, args.revealed, &beta, args.samples, &mut rng)?,
                None,
            )
        }
        ModelArg::LinearCs => {
            let snr = args
                .snr
                .ok_or_else(|| Error::config("--snr is required for the linear model"))?;
            let n = args
                .n
                .ok_or_else(|| Error::config("--n is required for the linear CS closed form"))?;
            let closed = linear_cs_mi_closed_form(snr, n, args.k, args.revealed, args.p_t)?;
            let diag = args
                .variance
                .unwrap_or(n as f64 * args.p_t / args.k as f64);
            let design = GaussianDesign::constant_correlation(args.k, diag, args.rho)?;
            let mc = linear_cs_mi_mc(snr, &design, args.revealed, args.samples, &mut rng)?;
            (mc, Some(closed))
        }
    };
    let output = MiOutput {
        model: model_name(args.model).to_string(),
        k: args.k,
        revealed: args.revealed,
        units: "nats".to_string(),
        estimate,
        closed_form: closed,
    };
    emit(
        &args.out,
        &serde_json::to_string_pretty(&output).expect("output serializes"),
    )
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let report = run_all(args.seed)?;
    for criterion in &report.criteria {
        eprintln!("{}", criterion.status_line());
    }
    emit(&args.out, &report.to_json_stable())?;
    Ok(report.passed)
}

fn configure_workers() {
    if let Ok(value) = std::env::var("SPARSEBOUND_WORKERS") {
        if let Ok(workers) = value.parse::<usize>() {
            if workers > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build_global();
            }
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    configure_workers();
    match &cli.command {
        Command::Bound(args) => cmd_bound(args).map(|_| true),
        Command::Simulate(args) => {
            let config = read_config(&args.config)?;
            let report = run_trials(&config)?;
            if let Some(csv) = &args.csv {
                std::fs::write(csv, report.to_csv())
                    .map_err(|e| Error::config(format!("cannot write {}: {e}", csv.display())))?;
            }
            emit(&args.out, &report.to_json())?;
            Ok(true)
        }
        Command::Sweep(args) => {
            let config = read_config(&args.config)?;
            let report = sweep(&config)?;
            if let Some(csv) = &args.csv {
                std::fs::write(csv, report.to_csv())
                    .map_err(|e| Error::config(format!("cannot write {}: {e}", csv.display())))?;
            }
            emit(&args.out, &report.to_json())?;
            Ok(true)
        }
        Command::Gap(args) => {
            let baseline = read_config(&args.baseline)?;
            let adaptive = read_config(&args.adaptive)?;
            let report = compare_adaptive_gap(&baseline, &adaptive)?;
            emit(
                &args.out,
                &serde_json::to_string_pretty(&report).expect("report serializes"),
            )?;
            Ok(true)
        }
        Command::Mi(args) => cmd_mi(args).map(|_| true),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        // A completed verify run with failing criteria.
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Resource(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
