//! Decoders `g(X^T, Y^T) -> ω̂`.
//!
//! The reference decoder is exhaustive maximum likelihood with the latent
//! coefficients marginalized exactly over the Rademacher sign patterns.
//! For noiseless group testing a cheap combinatorial decoder is also
//! provided: every item appearing in a negative test is non-defective.

use crate::error::{Error, Result};
use crate::models::ObservationModel;
use crate::types::{
    extract_values, rank_support, LatentCoefficients, MeasurementHistory, ProblemDims,
    RevealedSubset, SupportIndex, SupportSet,
};
use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Prior over the latent coefficients marginalized by the ML decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaPrior {
    /// No latent parameter: a single all-ones placeholder.
    Unit,
    /// IID signs, each ±1 with equal probability (2^K patterns).
    Rademacher,
}

/// Exhaustive maximum-likelihood decoding over all candidate supports.
///
/// Scores each candidate by the β-marginalized log likelihood of the
/// observed history; candidates are restricted to supersets of `revealed`
/// when given. Ties break toward the smallest support index, so decoding
/// is deterministic. An empty history therefore decodes to index 0.
pub fn ml_decode(
    history: &MeasurementHistory<Scalar>,
    model: &ObservationModel<Scalar>,
    dims: &ProblemDims,
    beta_prior: BetaPrior,
    revealed: Option<&RevealedSubset>,
) -> Result<SupportIndex> {
    let candidate_count = dims.candidate_count_checked()?;
    let _ = candidate_count;
    let k = dims.sparsity();
    if history.n_vars() != dims.n_vars() {
        return Err(Error::domain("history does not match problem dimensions"));
    }
    let patterns: Vec<LatentCoefficients<Scalar>> = match beta_prior {
        BetaPrior::Unit => vec![LatentCoefficients::unit(k)],
        BetaPrior::Rademacher => {
            // 2^K patterns are enumerated; keep under the candidate cap.
            if k >= 24 {
                return Err(Error::resource(format!(
                    "2^{k} sign patterns exceed the marginalization cap"
                )));
            }
            (0..(1u64 << k))
                .map(|bits| LatentCoefficients::sign_pattern(k, bits))
                .collect()
        }
    };

    let mut best_score = Scalar::NEG_INFINITY;
    let mut best: Option<u64> = None;
    let mut pattern_scores = vec![0.0; patterns.len()];
    for (omega, members) in (0..dims.n_vars()).combinations(k).enumerate() {
        if let Some(rev) = revealed {
            if !rev.members().iter().all(|m| members.contains(m)) {
                continue;
            }
        }
        for s in pattern_scores.iter_mut() {
            *s = 0.0;
        }
        for step in history.steps() {
            let x_s = extract_values(&step.x, &members);
            for (slot, beta) in patterns.iter().enumerate() {
                if pattern_scores[slot] == Scalar::NEG_INFINITY {
                    continue;
                }
                pattern_scores[slot] += model.log_likelihood(&step.y, &x_s, beta)?;
            }
        }
        let score = log_mean_exp(&pattern_scores);
        if best.is_none() || score > best_score {
            best_score = score;
            best = Some(omega as u64);
        }
    }
    let omega = best.ok_or_else(|| Error::domain("no candidate support is consistent with the revealed subset"))?;
    Ok(SupportIndex(omega))
}

/// `ln( (1/m) Σ exp(v_i) )`, safe when every term is `-inf`.
fn log_mean_exp(values: &[Scalar]) -> Scalar {
    let max = values.iter().copied().fold(Scalar::NEG_INFINITY, Scalar::max);
    if max == Scalar::NEG_INFINITY {
        return Scalar::NEG_INFINITY;
    }
    let sum: Scalar = values.iter().map(|&v| (v - max).exp()).sum();
    max + (sum / values.len() as Scalar).ln()
}

/// Outcome of the combinatorial group-testing decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompDecodeOutcome {
    /// Exactly `K` items were never cleared: the decoded support.
    Determined(SupportSet),
    /// The negative tests do not pin down a unique `K`-set.
    Ambiguous,
}

impl CompDecodeOutcome {
    /// Decoded support index, when determined and rankable.
    pub fn index(&self, dims: &ProblemDims) -> Result<Option<SupportIndex>> {
        match self {
            CompDecodeOutcome::Determined(s) => Ok(Some(rank_support(dims, s)?)),
            CompDecodeOutcome::Ambiguous => Ok(None),
        }
    }
}

/// Noiseless group-testing decoder: declare non-defective every item that
/// appears in any negative test; if exactly `K` items survive, they are
/// the support.
pub fn comp_decode(
    history: &MeasurementHistory<Scalar>,
    dims: &ProblemDims,
) -> Result<CompDecodeOutcome> {
    if history.n_vars() != dims.n_vars() {
        return Err(Error::domain("history does not match problem dimensions"));
    }
    let n = dims.n_vars();
    let mut cleared = vec![false; n];
    for step in history.steps() {
        if !step.y.as_bit()? {
            for (i, &x) in step.x.iter().enumerate() {
                if x != 0.0 {
                    cleared[i] = true;
                }
            }
        }
    }
    let remaining: Vec<usize> = (0..n).filter(|&i| !cleared[i]).collect();
    if remaining.len() == dims.sparsity() {
        Ok(CompDecodeOutcome::Determined(SupportSet::new(
            dims, remaining,
        )?))
    } else {
        Ok(CompDecodeOutcome::Ambiguous)
    }
}
