//! Experiment orchestration: Monte-Carlo estimation of the error
//! probability `P_e` for a `(model, strategy, decoder, dims, T)`
//! configuration, with the matching bound evaluations attached to every
//! row.
//!
//! Reproducibility contract: a config carries one seed; each trial runs
//! on an independent stream derived as `seed ⊕ hash(trial index)`, so a
//! worker pool of any size produces bit-identical reports. Sweeps derive
//! per-grid-point seeds as `seed + index`.

use crate::bounds::{
    adaptive_lower_bound, cs_feasibility, fano_error_lower_bound, nonadaptive_lower_bound,
    sequence_mi_cap, BoundForm, BoundReport, CsFeasibilityReport, PowerAllocation,
};
use crate::decoders::{comp_decode, ml_decode, BetaPrior, CompDecodeOutcome};
use crate::error::{Error, Result};
use crate::infotheory::{
    exact_conditional_mi, plugin_sequence_mi, DiscreteDesign, MiEstimate, MiMethod,
    SequenceMiProfile,
};
use crate::models::{ObservationModel, OutputAlphabet};
use crate::scalar::stable_mean;
use crate::strategies::{
    BernoulliStrategy, BinarySplittingStrategy, GaussianStrategy, Strategy, TwoStageCsStrategy,
};
use crate::types::{
    extract_values, random_support, unrank_support, LatentCoefficients, MeasurementHistory,
    ProblemDims, RevealedSubset, RngSeed, SupportSet,
};
use crate::Scalar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsSpec {
    pub n: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    GroupTesting {
        #[serde(default)]
        crossover: f64,
    },
    OneBitCs {
        snr: f64,
    },
    LinearCs {
        snr: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<ObservationModel<Scalar>> {
        match *self {
            ModelSpec::GroupTesting { crossover } => ObservationModel::group_testing(crossover),
            ModelSpec::OneBitCs { snr } => ObservationModel::one_bit_cs(snr),
            ModelSpec::LinearCs { snr } => ObservationModel::linear_cs(snr),
        }
    }

    pub fn snr(&self) -> Option<f64> {
        match *self {
            ModelSpec::GroupTesting { .. } => None,
            ModelSpec::OneBitCs { snr } | ModelSpec::LinearCs { snr } => Some(snr),
        }
    }

    fn with_snr(&self, snr: f64) -> Result<ModelSpec> {
        match *self {
            ModelSpec::OneBitCs { .. } => Ok(ModelSpec::OneBitCs { snr }),
            ModelSpec::LinearCs { .. } => Ok(ModelSpec::LinearCs { snr }),
            ModelSpec::GroupTesting { .. } => Err(Error::config(
                "SNR sweeps require a model with an SNR parameter",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    /// Nonadaptive IID Bernoulli(p) inclusion designs.
    Bernoulli { p: f64 },
    /// Nonadaptive IID Gaussian designs under uniform power `P_t = 1/T`.
    Gaussian {},
    /// Adaptive generalized binary splitting (noiseless group testing).
    BinarySplitting {},
    /// Adaptive two-stage power concentration (linear CS).
    TwoStageCs { split: f64 },
}

impl StrategySpec {
    pub fn build(&self, dims: &ProblemDims, t: u64) -> Result<Box<dyn Strategy>> {
        Ok(match *self {
            StrategySpec::Bernoulli { p } => Box::new(BernoulliStrategy::new(dims, p)?),
            StrategySpec::Gaussian {} => Box::new(GaussianStrategy::new(dims, t.max(1) as usize)?),
            StrategySpec::BinarySplitting {} => Box::new(BinarySplittingStrategy::new(dims)),
            StrategySpec::TwoStageCs { split } => {
                Box::new(TwoStageCsStrategy::new(dims, split, t as usize)?)
            }
        })
    }

    /// Whether per-step designs take finitely many values exactly.
    fn finite_alphabet(&self) -> bool {
        matches!(
            self,
            StrategySpec::Bernoulli { .. } | StrategySpec::BinarySplitting {}
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderSpec {
    Ml,
    Comp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MiSpec {
    /// Exact enumeration (binary model, IID finite-alphabet design).
    Exact,
    /// Plug-in estimation from `m` dedicated simulation traces.
    PlugIn { m: u64 },
    /// Closed-form per-step cap (linear CS under uniform allocation).
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub from: u64,
    pub to: u64,
}

/// One experiment configuration. Exactly one of `t` and `t_sweep` must be
/// set; `snr_sweep` additionally requires a fixed `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub dims: DimsSpec,
    pub model: ModelSpec,
    pub strategy: StrategySpec,
    pub decoder: DecoderSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_sweep: Option<SweepRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_sweep: Option<Vec<f64>>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub revealed_size: usize,
    pub mi_estimation: MiSpec,
    pub bound_form: BoundForm,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(json).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn dims(&self) -> Result<ProblemDims> {
        // The candidate cap protects exhaustive decoding only.
        match self.decoder {
            DecoderSpec::Ml => ProblemDims::new(self.dims.n, self.dims.k),
            DecoderSpec::Comp => ProblemDims::with_candidate_cap(self.dims.n, self.dims.k, None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be >= 1"));
        }
        let dims = self.dims()?;
        if self.revealed_size >= dims.sparsity() {
            return Err(Error::config(format!(
                "revealed_size {} must be < K = {}",
                self.revealed_size,
                dims.sparsity()
            )));
        }
        let model = self.model.build()?;

        match (self.t, &self.t_sweep) {
            (Some(_), Some(_)) => {
                return Err(Error::config("set exactly one of `t` and `t_sweep`"))
            }
            (None, None) => return Err(Error::config("one of `t` and `t_sweep` is required")),
            (Some(0), _) => return Err(Error::config("t must be >= 1")),
            (None, Some(range)) if range.from == 0 || range.from > range.to => {
                return Err(Error::config("t_sweep must satisfy 1 <= from <= to"))
            }
            _ => {}
        }
        if let Some(snrs) = &self.snr_sweep {
            if self.t.is_none() {
                return Err(Error::config("snr_sweep requires a fixed `t`"));
            }
            if snrs.is_empty() {
                return Err(Error::config("snr_sweep must be nonempty"));
            }
            self.model.with_snr(snrs[0])?;
        }

        // Strategy / model compatibility.
        match (&self.strategy, &self.model) {
            (StrategySpec::BinarySplitting {}, ModelSpec::GroupTesting { crossover })
                if *crossover == 0.0 => {}
            (StrategySpec::BinarySplitting {}, _) => {
                return Err(Error::config(
                    "binary_splitting requires noiseless group testing",
                ))
            }
            (StrategySpec::TwoStageCs { .. }, ModelSpec::LinearCs { .. }) => {}
            (StrategySpec::TwoStageCs { .. }, _) => {
                return Err(Error::config("two_stage_cs requires the linear CS model"))
            }
            (StrategySpec::Gaussian {}, ModelSpec::GroupTesting { .. }) => {
                return Err(Error::config(
                    "Gaussian designs do not apply to group testing",
                ))
            }
            _ => {}
        }
        if let StrategySpec::TwoStageCs { split } = self.strategy {
            if !(split > 0.0 && split < 1.0) {
                return Err(Error::config("two_stage_cs split must be in (0, 1)"));
            }
        }

        // Decoder compatibility.
        match self.decoder {
            DecoderSpec::Comp => match self.model {
                ModelSpec::GroupTesting { crossover } if crossover == 0.0 => {}
                _ => {
                    return Err(Error::config(
                        "the comp decoder requires noiseless group testing",
                    ))
                }
            },
            DecoderSpec::Ml => {
                if model.has_latent_prior() && dims.sparsity() >= 24 {
                    return Err(Error::config(
                        "ML with Rademacher marginalization needs K < 24",
                    ));
                }
            }
        }

        // MI estimation compatibility.
        match self.mi_estimation {
            MiSpec::Exact => {
                if model.output_alphabet() != OutputAlphabet::Binary {
                    return Err(Error::config(
                        "exact MI enumeration requires a binary-output model",
                    ));
                }
                if !matches!(self.strategy, StrategySpec::Bernoulli { .. }) {
                    return Err(Error::config(
                        "exact MI enumeration requires an IID Bernoulli design",
                    ));
                }
            }
            MiSpec::PlugIn { m } => {
                if model.output_alphabet() != OutputAlphabet::Binary {
                    return Err(Error::config(
                        "plug-in MI estimation requires a binary-output model",
                    ));
                }
                if !self.strategy.finite_alphabet() {
                    return Err(Error::config(
                        "plug-in MI estimation requires a finite design alphabet",
                    ));
                }
                if m < 100 {
                    return Err(Error::config("plug-in MI needs m >= 100 traces"));
                }
            }
            MiSpec::ClosedForm => {
                if !matches!(self.model, ModelSpec::LinearCs { .. }) {
                    return Err(Error::config(
                        "the closed-form MI cap applies to the linear CS model",
                    ));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub schema_version: u32,
    pub version: String,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub t: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    pub trials: u64,
    pub error_count: u64,
    pub empirical_pe: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub fano_bound: f64,
    pub mi: MiEstimate<Scalar>,
    pub bound_t: BoundReport<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cs_feasibility: Option<CsFeasibilityReport<Scalar>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub meta: ReportMeta,
    pub units: String,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Canonical encoding for byte-comparison: identical runs agree on
    /// every byte once the wall-time field is dropped.
    pub fn to_json_stable(&self) -> String {
        let mut stable = self.clone();
        stable.meta.wall_time_ms = None;
        serde_json::to_string_pretty(&stable).expect("report serializes")
    }

    /// Flat CSV rendering, one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "t,snr,trials,error_count,empirical_pe,wilson_low,wilson_high,fano_bound,\
             mi_value,mi_method,mi_std_error,mi_samples,bound_overall,cs_feasible,seed\n",
        );
        for row in &self.rows {
            let method = match row.mi.method {
                MiMethod::ExactEnumeration => "exact-enumeration",
                MiMethod::ClosedForm => "closed-form",
                MiMethod::PlugIn => "plug-in",
                MiMethod::MonteCarlo => "monte-carlo",
            };
            let bound = row
                .bound_t
                .overall
                .finite()
                .map(|v| v.to_string())
                .unwrap_or_else(|| "unbounded".to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                row.t,
                row.snr.map(|v| v.to_string()).unwrap_or_default(),
                row.trials,
                row.error_count,
                row.empirical_pe,
                row.wilson_low,
                row.wilson_high,
                row.fano_bound,
                row.mi.value,
                method,
                row.mi.std_error.map(|v| v.to_string()).unwrap_or_default(),
                row.mi.samples.map(|v| v.to_string()).unwrap_or_default(),
                bound,
                row.cs_feasibility
                    .as_ref()
                    .map(|f| f.feasible.to_string())
                    .unwrap_or_default(),
                row.seed,
            ));
        }
        out
    }
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

// ---------------------------------------------------------------------------
// Trial execution
// ---------------------------------------------------------------------------

struct TrialSetup<'a> {
    dims: &'a ProblemDims,
    model: &'a ObservationModel<Scalar>,
    strategy: &'a StrategySpec,
    decoder: DecoderSpec,
    revealed_size: usize,
    t: u64,
}

fn beta_prior(model: &ObservationModel<Scalar>) -> BetaPrior {
    if model.has_latent_prior() {
        BetaPrior::Rademacher
    } else {
        BetaPrior::Unit
    }
}

/// Run one seeded trial; returns whether the decoder erred.
fn run_trial(setup: &TrialSetup, seed: RngSeed) -> Result<bool> {
    let mut rng = seed.rng();
    let dims = setup.dims;
    let support = random_support(dims, &mut rng);
    let k = dims.sparsity();
    let beta = if setup.model.has_latent_prior() {
        LatentCoefficients::rademacher(k, &mut rng)
    } else {
        LatentCoefficients::unit(k)
    };
    let revealed = if setup.revealed_size > 0 {
        Some(support.reveal_random(setup.revealed_size, &mut rng)?)
    } else {
        None
    };

    let mut strategy = setup.strategy.build(dims, setup.t)?;
    let mut history = MeasurementHistory::new(dims.n_vars());
    for _ in 0..setup.t {
        let x = strategy.next_design(&history, &mut rng)?;
        let y = setup
            .model
            .sample(&extract_values(&x, support.members()), &beta, &mut rng)?;
        history.push(x, y)?;
    }

    let decoded: Option<SupportSet> = match setup.decoder {
        DecoderSpec::Ml => {
            let omega = ml_decode(
                &history,
                setup.model,
                dims,
                beta_prior(setup.model),
                revealed.as_ref(),
            )?;
            Some(unrank_support(dims, omega)?)
        }
        DecoderSpec::Comp => match comp_decode(&history, dims)? {
            CompDecodeOutcome::Determined(s) => Some(s),
            CompDecodeOutcome::Ambiguous => None,
        },
    };
    Ok(decoded.as_ref() != Some(&support))
}

/// MI values per revealed size used for the attached bound report.
enum MiBySubset {
    Scalars(BTreeMap<usize, Scalar>, MiMethod),
    Profiles(BTreeMap<usize, SequenceMiProfile<Scalar>>, u64),
}

impl MiBySubset {
    fn estimate_at(&self, j: usize) -> MiEstimate<Scalar> {
        match self {
            MiBySubset::Scalars(map, method) => MiEstimate::new(map[&j], *method, None, None),
            MiBySubset::Profiles(map, m) => {
                let profile = &map[&j];
                // Conservative: the largest per-step standard error.
                let se = profile
                    .per_step()
                    .iter()
                    .filter_map(|e| e.std_error)
                    .fold(0.0, Scalar::max);
                MiEstimate::new(profile.average(), MiMethod::PlugIn, Some(*m), Some(se))
            }
        }
    }

    fn bound_report(&self, dims: &ProblemDims, form: BoundForm) -> Result<BoundReport<Scalar>> {
        match self {
            MiBySubset::Scalars(map, _) => nonadaptive_lower_bound(dims, map, form),
            MiBySubset::Profiles(map, _) => adaptive_lower_bound(dims, map, form),
        }
    }
}

/// Exact per-subset MI for a Bernoulli design, marginalized over the
/// latent sign patterns where the model has them.
fn exact_mi_per_subset(
    model: &ObservationModel<Scalar>,
    p: f64,
    dims: &ProblemDims,
) -> Result<BTreeMap<usize, Scalar>> {
    let k = dims.sparsity();
    let design = DiscreteDesign::bernoulli(p)?;
    let patterns: Vec<LatentCoefficients<Scalar>> = if model.has_latent_prior() {
        if k >= 20 {
            return Err(Error::resource(
                "exact MI with latent marginalization needs K < 20",
            ));
        }
        (0..(1u64 << k))
            .map(|bits| LatentCoefficients::sign_pattern(k, bits))
            .collect()
    } else {
        vec![LatentCoefficients::unit(k)]
    };
    let mut out = BTreeMap::new();
    for j in 0..k {
        let values: Vec<Scalar> = patterns
            .iter()
            .map(|beta| Ok(exact_conditional_mi(model, &design, k, j, beta)?.value))
            .collect::<Result<_>>()?;
        out.insert(j, stable_mean(&values));
    }
    Ok(out)
}

/// Plug-in per-subset MI profiles from `m` dedicated traces at one fixed
/// support.
///
/// The uniform support prior and the decoder are irrelevant to the MI of
/// the channel itself, so the traces condition on a single support drawn
/// once from the MI stream; revealed subsets follow the first-`j`
/// convention.
fn plugin_mi_per_subset(
    model: &ObservationModel<Scalar>,
    strategy: &StrategySpec,
    dims: &ProblemDims,
    t: u64,
    m: u64,
    mi_seed: RngSeed,
) -> Result<BTreeMap<usize, SequenceMiProfile<Scalar>>> {
    let mut rng = mi_seed.rng();
    let support = random_support(dims, &mut rng);
    let k = dims.sparsity();
    let mut traces = Vec::with_capacity(m as usize);
    for trace in 0..m {
        let mut trng = mi_seed.for_trial(trace.wrapping_add(1)).rng();
        let beta = if model.has_latent_prior() {
            LatentCoefficients::rademacher(k, &mut trng)
        } else {
            LatentCoefficients::unit(k)
        };
        let mut strat = strategy.build(dims, t)?;
        let mut history = MeasurementHistory::new(dims.n_vars());
        for _ in 0..t {
            let x = strat.next_design(&history, &mut trng)?;
            let y = model.sample(&extract_values(&x, support.members()), &beta, &mut trng)?;
            history.push(x, y)?;
        }
        traces.push(history);
    }
    let mut out = BTreeMap::new();
    for j in 0..k {
        let revealed = if j == 0 {
            RevealedSubset::empty()
        } else {
            support.reveal_first(j)?
        };
        out.insert(j, plugin_sequence_mi(&traces, &support, &revealed, &mut rng)?);
    }
    Ok(out)
}

fn closed_form_mi_per_subset(
    snr: Scalar,
    dims: &ProblemDims,
    t: u64,
) -> Result<BTreeMap<usize, Scalar>> {
    let allocation = PowerAllocation::uniform(t as usize)?;
    (0..dims.sparsity())
        .map(|j| {
            Ok((
                j,
                sequence_mi_cap(snr, dims.n_vars(), dims.sparsity(), j, &allocation)?,
            ))
        })
        .collect()
}

fn mi_by_subset(
    config: &ExperimentConfig,
    model_spec: &ModelSpec,
    dims: &ProblemDims,
    t: u64,
    row_seed: RngSeed,
) -> Result<MiBySubset> {
    let model = model_spec.build()?;
    match config.mi_estimation {
        MiSpec::Exact => {
            let p = match config.strategy {
                StrategySpec::Bernoulli { p } => p,
                _ => unreachable!("validated: exact MI implies a Bernoulli design"),
            };
            Ok(MiBySubset::Scalars(
                exact_mi_per_subset(&model, p, dims)?,
                MiMethod::ExactEnumeration,
            ))
        }
        MiSpec::PlugIn { m } => {
            // A distinct stream keeps MI traces independent of the trials.
            let mi_seed = RngSeed(row_seed.0 ^ 0x4D49_5F54_5241_4345);
            Ok(MiBySubset::Profiles(
                plugin_mi_per_subset(&model, &config.strategy, dims, t, m, mi_seed)?,
                m,
            ))
        }
        MiSpec::ClosedForm => {
            let snr = model_spec
                .snr()
                .expect("validated: closed form implies an SNR model");
            Ok(MiBySubset::Scalars(
                closed_form_mi_per_subset(snr, dims, t)?,
                MiMethod::ClosedForm,
            ))
        }
    }
}

fn run_single(
    config: &ExperimentConfig,
    model_spec: &ModelSpec,
    t: u64,
    row_seed: RngSeed,
) -> Result<ReportRow> {
    let dims = config.dims()?;
    let model = model_spec.build()?;

    let mi = mi_by_subset(config, model_spec, &dims, t, row_seed)?;
    let bound_t = mi.bound_report(&dims, config.bound_form)?;
    let mi_at_j = mi.estimate_at(config.revealed_size);
    let fano = fano_error_lower_bound(
        t,
        mi_at_j.value,
        dims.n_vars(),
        dims.sparsity(),
        config.revealed_size,
    )?;

    let setup = TrialSetup {
        dims: &dims,
        model: &model,
        strategy: &config.strategy,
        decoder: config.decoder,
        revealed_size: config.revealed_size,
        t,
    };
    let error_count = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = row_seed.for_trial(trial);
            match run_trial(&setup, seed) {
                Ok(err) => Ok(u64::from(err)),
                Err(e) => Err(Error::domain(format!(
                    "trial {trial} (seed {}) failed: {e}",
                    seed.0
                ))),
            }
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;

    let empirical_pe = error_count as f64 / config.trials as f64;
    let (wilson_low, wilson_high) = wilson_interval(error_count, config.trials);
    let feasibility = match model_spec {
        ModelSpec::LinearCs { snr } => Some(cs_feasibility(
            t,
            *snr,
            dims.n_vars(),
            dims.sparsity(),
            config.bound_form,
        )?),
        _ => None,
    };

    Ok(ReportRow {
        t,
        snr: model_spec.snr(),
        trials: config.trials,
        error_count,
        empirical_pe,
        wilson_low,
        wilson_high,
        fano_bound: fano,
        mi: mi_at_j,
        bound_t,
        cs_feasibility: feasibility,
        seed: row_seed.0,
    })
}

fn finish_report(config: &ExperimentConfig, rows: Vec<ReportRow>, started: Instant) -> ExperimentReport {
    ExperimentReport {
        meta: ReportMeta {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            wall_time_ms: Some(started.elapsed().as_millis() as u64),
        },
        units: "nats".to_string(),
        rows,
    }
}

/// Run the Monte-Carlo trials of a fixed-`T` configuration.
pub fn run_trials(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    config.validate()?;
    if config.t_sweep.is_some() || config.snr_sweep.is_some() {
        return Err(Error::config("this config sweeps a grid; use `sweep`"));
    }
    let t = config.t.expect("validated");
    let row = run_single(config, &config.model, t, RngSeed(config.seed))?;
    Ok(finish_report(config, vec![row], started))
}

/// Run a `T` or SNR grid, one row per grid point, with derived seeds.
pub fn sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    config.validate()?;
    let base_seed = RngSeed(config.seed);
    let mut rows = Vec::new();
    match (&config.t_sweep, &config.snr_sweep) {
        (Some(range), None) => {
            for (index, t) in (range.from..=range.to).enumerate() {
                rows.push(run_single(
                    config,
                    &config.model,
                    t,
                    base_seed.for_grid_point(index as u64),
                )?);
            }
        }
        (None, Some(snrs)) => {
            let t = config.t.expect("validated");
            for (index, &snr) in snrs.iter().enumerate() {
                let model = config.model.with_snr(snr)?;
                rows.push(run_single(
                    config,
                    &model,
                    t,
                    base_seed.for_grid_point(index as u64),
                )?);
            }
        }
        (None, None) => return Err(Error::config("sweep needs `t_sweep` or `snr_sweep`")),
        (Some(_), Some(_)) => {
            return Err(Error::config("set only one of `t_sweep` and `snr_sweep`"))
        }
    }
    Ok(finish_report(config, rows, started))
}

// ---------------------------------------------------------------------------
// Adaptive-vs-nonadaptive comparison
// ---------------------------------------------------------------------------

/// Outcome of a matched-budget comparison between two strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub baseline: ReportRow,
    pub adaptive: ReportRow,
    /// `baseline P_e - adaptive P_e`: positive favors the adaptive side.
    pub pe_gap: f64,
    /// 95% two-proportion interval for the gap.
    pub gap_interval: (f64, f64),
}

/// Compare two strategies under a matched budget: both configurations
/// must share the model, dims, trials, horizon, and seed. The measured
/// gap is reported with an interval; its sign is never asserted.
pub fn compare_adaptive_gap(
    baseline: &ExperimentConfig,
    adaptive: &ExperimentConfig,
) -> Result<GapReport> {
    if baseline.dims != adaptive.dims
        || baseline.model != adaptive.model
        || baseline.trials != adaptive.trials
        || baseline.seed != adaptive.seed
        || baseline.t != adaptive.t
        || baseline.revealed_size != adaptive.revealed_size
    {
        return Err(Error::domain(
            "gap comparison requires matching dims, model, trials, t, revealed size, and seed",
        ));
    }
    let base_report = run_trials(baseline)?;
    let adaptive_report = run_trials(adaptive)?;
    let b = base_report.rows[0].clone();
    let a = adaptive_report.rows[0].clone();
    let n1 = b.trials as f64;
    let n2 = a.trials as f64;
    let p1 = b.empirical_pe;
    let p2 = a.empirical_pe;
    let gap = p1 - p2;
    let se = (p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2).sqrt();
    let z = 1.96;
    Ok(GapReport {
        baseline: b,
        adaptive: a,
        pe_gap: gap,
        gap_interval: (gap - z * se, gap + z * se),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            dims: DimsSpec { n: 8, k: 2 },
            model: ModelSpec::GroupTesting { crossover: 0.0 },
            strategy: StrategySpec::Bernoulli { p: 0.5 },
            decoder: DecoderSpec::Ml,
            t: Some(4),
            t_sweep: None,
            snr_sweep: None,
            trials: 200,
            seed: 7,
            revealed_size: 0,
            mi_estimation: MiSpec::Exact,
            bound_form: BoundForm::FiniteFano,
        }
    }

    #[test]
    fn config_json_roundtrip_and_unknown_fields() {
        let config = base_config();
        let json = serde_json::to_string(&config).unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(config, back);

        let with_unknown = json.replace("\"seed\":7", "\"seed\":7,\"bogus\":1");
        assert!(matches!(
            ExperimentConfig::from_json(&with_unknown),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn config_validation_rules() {
        let mut c = base_config();
        c.schema_version = 2;
        assert!(c.validate().is_err());

        let mut c = base_config();
        c.trials = 0;
        assert!(c.validate().is_err());

        let mut c = base_config();
        c.revealed_size = 2;
        assert!(c.validate().is_err());

        let mut c = base_config();
        c.t = None;
        assert!(c.validate().is_err());
        c.t_sweep = Some(SweepRange { from: 1, to: 5 });
        assert!(c.validate().is_ok());
        c.t = Some(3);
        assert!(c.validate().is_err());

        let mut c = base_config();
        c.strategy = StrategySpec::BinarySplitting {};
        c.mi_estimation = MiSpec::PlugIn { m: 200 };
        assert!(c.validate().is_ok());
        c.model = ModelSpec::GroupTesting { crossover: 0.1 };
        assert!(c.validate().is_err());

        let mut c = base_config();
        c.model = ModelSpec::LinearCs { snr: 2.0 };
        c.mi_estimation = MiSpec::Exact;
        assert!(c.validate().is_err(), "exact MI needs a binary model");
        c.mi_estimation = MiSpec::ClosedForm;
        c.strategy = StrategySpec::Gaussian {};
        assert!(c.validate().is_ok());
    }

    #[test]
    fn wilson_interval_behaves() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo.abs() < 1e-12);
        assert!(hi > 0.0 && hi < 0.06);
        let (lo, hi) = wilson_interval(100, 100);
        assert!(lo > 0.94);
        assert!((hi - 1.0).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
    }

    #[test]
    fn run_trials_is_reproducible() {
        let config = base_config();
        let a = run_trials(&config).unwrap();
        let b = run_trials(&config).unwrap();
        assert_eq!(a.to_json_stable(), b.to_json_stable());
        // Accounting invariants.
        let row = &a.rows[0];
        assert!(row.error_count <= row.trials);
        assert!(row.wilson_low <= row.empirical_pe && row.empirical_pe <= row.wilson_high);
    }

    #[test]
    fn single_trial_with_fixed_seed_is_deterministic() {
        let mut config = base_config();
        config.trials = 1;
        let a = run_trials(&config).unwrap();
        let b = run_trials(&config).unwrap();
        assert_eq!(a.rows[0].error_count, b.rows[0].error_count);
    }

    #[test]
    fn generous_budget_drives_error_down() {
        // Noiseless group testing with a large budget and ML decoding.
        let mut config = base_config();
        config.t = Some(30);
        config.trials = 2000;
        let report = run_trials(&config).unwrap();
        assert!(
            report.rows[0].empirical_pe < 0.01,
            "P_e = {}",
            report.rows[0].empirical_pe
        );
    }

    #[test]
    fn starved_budget_respects_fano() {
        let mut config = base_config();
        config.t = Some(1);
        config.trials = 2000;
        let report = run_trials(&config).unwrap();
        let row = &report.rows[0];
        let half_width = (row.wilson_high - row.wilson_low) / 2.0;
        assert!(
            row.empirical_pe >= row.fano_bound - 3.0 * half_width,
            "P_e {} vs Fano {}",
            row.empirical_pe,
            row.fano_bound
        );
    }

    #[test]
    fn t_sweep_produces_weakly_improving_rows() {
        let mut config = base_config();
        config.t = None;
        config.t_sweep = Some(SweepRange { from: 1, to: 8 });
        config.trials = 400;
        let report = sweep(&config).unwrap();
        assert_eq!(report.rows.len(), 8);
        // Soft monotonicity: more measurements cannot hurt beyond noise.
        for pair in report.rows.windows(2) {
            let hw = (pair[0].wilson_high - pair[0].wilson_low) / 2.0
                + (pair[1].wilson_high - pair[1].wilson_low) / 2.0;
            assert!(
                pair[1].empirical_pe <= pair[0].empirical_pe + 1.5 * hw,
                "t={} -> t={}: {} -> {}",
                pair[0].t,
                pair[1].t,
                pair[0].empirical_pe,
                pair[1].empirical_pe
            );
        }
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn snr_sweep_tags_feasibility() {
        let config = ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            dims: DimsSpec { n: 8, k: 2 },
            model: ModelSpec::LinearCs { snr: 1.0 },
            strategy: StrategySpec::Gaussian {},
            decoder: DecoderSpec::Ml,
            t: Some(6),
            t_sweep: None,
            snr_sweep: Some(vec![0.5, 2.0, 8.0]),
            trials: 100,
            seed: 11,
            revealed_size: 0,
            mi_estimation: MiSpec::ClosedForm,
            bound_form: BoundForm::FiniteFano,
        };
        let report = sweep(&config).unwrap();
        assert_eq!(report.rows.len(), 3);
        for row in &report.rows {
            assert!(row.cs_feasibility.is_some());
            assert!(row.snr.is_some());
        }
        // Empty grid is a config error.
        let mut empty = config.clone();
        empty.snr_sweep = Some(vec![]);
        assert!(matches!(sweep(&empty), Err(Error::Config(_))));
    }

    #[test]
    fn identical_configs_have_zero_gap() {
        let mut config = base_config();
        config.trials = 300;
        let gap = compare_adaptive_gap(&config, &config).unwrap();
        assert_eq!(gap.pe_gap, 0.0);
        assert!(gap.gap_interval.0 <= 0.0 && gap.gap_interval.1 >= 0.0);
    }

    #[test]
    fn mismatched_gap_configs_rejected() {
        let a = base_config();
        let mut b = base_config();
        b.trials = 100;
        assert!(compare_adaptive_gap(&a, &b).is_err());
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = base_config();
        let mut b = base_config();
        assert_eq!(a.hash(), b.hash());
        b.seed = 8;
        assert_ne!(a.hash(), b.hash());
    }
}
