//! Sample-complexity lower bounds and feasibility conditions.
//!
//! The central object is the subset-maximized bound
//! `T >= max_j log C(N-j, K-j) / I_j` with `j = |S~|` ranging over the
//! sizes of revealed support subsets, evaluated with either per-step MI
//! (nonadaptive designs) or sequence-averaged MI (adaptive designs). Two
//! forms are reported everywhere:
//!
//! * `asymptotic` - the ratio as stated, the form quoted in theorems;
//! * `finite-fano` - keeps the one-bit (`ln 2` nats) slack from the
//!   binary-error-entropy step of the underlying inequality, making it a
//!   literal finite-sample statement. Experiments validate this form.
//!
//! The module also carries the linear-CS machinery: the circulant design
//! covariance eigenvalues, the per-sequence MI cap under a power
//! allocation, the `(T, SNR)` feasibility region, and the SNR threshold
//! obtained from its `T -> infinity` limit.

use crate::error::{Error, Result};
use crate::infotheory::{linear_cs_mi_closed_form, SequenceMiProfile};
use crate::scalar::{real, stable_mean, Real};
use crate::types::{log_binom, ProblemDims};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default search cap for [`min_feasible_t`].
pub const DEFAULT_T_SEARCH_CAP: u64 = 10_000_000;

/// Which variant of the bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundForm {
    /// `log C / I`, the ratio as stated in the theorems.
    Asymptotic,
    /// `(log C - ln 2) / I`, keeping the one-bit slack of the proof.
    FiniteFano,
}

/// A bound value that may be infinite (zero information with candidates
/// left to distinguish). Serializes as a number or the string
/// `"unbounded"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue<T> {
    Finite(T),
    Unbounded,
}

impl<T: Real> BoundValue<T> {
    pub fn is_unbounded(&self) -> bool {
        matches!(self, BoundValue::Unbounded)
    }

    pub fn finite(&self) -> Option<T> {
        match self {
            BoundValue::Finite(v) => Some(*v),
            BoundValue::Unbounded => None,
        }
    }

    fn max(self, other: Self) -> Self {
        match (self, other) {
            (BoundValue::Unbounded, _) | (_, BoundValue::Unbounded) => BoundValue::Unbounded,
            (BoundValue::Finite(a), BoundValue::Finite(b)) => {
                BoundValue::Finite(if b > a { b } else { a })
            }
        }
    }
}

impl<T: Serialize> Serialize for BoundValue<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BoundValue::Finite(v) => v.serialize(s),
            BoundValue::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for BoundValue<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr<T> {
            Num(T),
            Str(String),
        }
        match Repr::<T>::deserialize(d)? {
            Repr::Num(v) => Ok(BoundValue::Finite(v)),
            Repr::Str(s) if s == "unbounded" => Ok(BoundValue::Unbounded),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"unbounded\", got {s:?}"
            ))),
        }
    }
}

/// One term of the subset maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetTerm<T> {
    /// Revealed subset size `j = |S~|`.
    pub revealed_size: usize,
    /// `log C(N-j, K-j)` in nats.
    pub numerator: T,
    /// The MI value used for this term, in nats.
    pub mi: T,
    /// The implied bound on `T`.
    pub t_bound: BoundValue<T>,
}

/// Full evaluation of the subset-maximized bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport<T> {
    pub units: String,
    pub form: BoundForm,
    pub per_subset_terms: Vec<SubsetTerm<T>>,
    pub overall: BoundValue<T>,
}

impl<T: Real> BoundReport<T> {
    /// Display conversion: numerators and MI values in bits. The bound on
    /// `T` is a sample count and is unchanged.
    pub fn in_bits(&self) -> BoundReport<T> {
        let ln2 = T::ln_2();
        BoundReport {
            units: "bits".to_string(),
            form: self.form,
            per_subset_terms: self
                .per_subset_terms
                .iter()
                .map(|t| SubsetTerm {
                    revealed_size: t.revealed_size,
                    numerator: t.numerator / ln2,
                    mi: t.mi / ln2,
                    t_bound: t.t_bound,
                })
                .collect(),
            overall: self.overall,
        }
    }
}

fn bound_term<T: Real>(numerator: T, mi: T, form: BoundForm) -> BoundValue<T> {
    let effective = match form {
        BoundForm::Asymptotic => numerator,
        BoundForm::FiniteFano => (numerator - T::ln_2()).max(T::zero()),
    };
    if mi > T::zero() {
        BoundValue::Finite(effective / mi)
    } else if effective > T::zero() {
        BoundValue::Unbounded
    } else {
        BoundValue::Finite(T::zero())
    }
}

fn evaluate_bound<T: Real>(
    dims: &ProblemDims,
    mi_by_subset: &BTreeMap<usize, T>,
    form: BoundForm,
) -> Result<BoundReport<T>> {
    let k = dims.sparsity();
    let n = dims.n_vars();
    for j in 0..k {
        match mi_by_subset.get(&j) {
            None => {
                return Err(Error::domain(format!(
                    "missing MI value for revealed size j={j}"
                )))
            }
            Some(&mi) if mi < T::zero() || !mi.is_finite() => {
                return Err(Error::domain(format!(
                    "MI for j={j} must be finite and nonnegative, got {mi}"
                )))
            }
            Some(_) => {}
        }
    }
    if mi_by_subset.len() != k {
        return Err(Error::domain(format!(
            "expected MI for exactly j in 0..{k}, got {} entries",
            mi_by_subset.len()
        )));
    }

    let mut terms = Vec::with_capacity(k);
    let mut overall = BoundValue::Finite(T::zero());
    for j in 0..k {
        let numerator = log_binom::<T>((n - j) as u64, (k - j) as u64)?;
        let mi = mi_by_subset[&j];
        let t_bound = bound_term(numerator, mi, form);
        overall = overall.max(t_bound);
        terms.push(SubsetTerm {
            revealed_size: j,
            numerator,
            mi,
            t_bound,
        });
    }
    Ok(BoundReport {
        units: "nats".to_string(),
        form,
        per_subset_terms: terms,
        overall,
    })
}

/// Lower bound on `T` for nonadaptive (IID-in-`t`) designs: per-subset
/// `log C(N-j, K-j) / I_j`, maximized over `j`.
pub fn nonadaptive_lower_bound<T: Real>(
    dims: &ProblemDims,
    mi_per_subset: &BTreeMap<usize, T>,
    form: BoundForm,
) -> Result<BoundReport<T>> {
    evaluate_bound(dims, mi_per_subset, form)
}

/// Lower bound on `T` for adaptive strategies: identical structure with
/// the sequence-averaged MI in place of the per-step MI. On constant
/// per-step profiles this reduces exactly to the nonadaptive bound.
pub fn adaptive_lower_bound<T: Real>(
    dims: &ProblemDims,
    avg_mi_per_subset: &BTreeMap<usize, SequenceMiProfile<T>>,
    form: BoundForm,
) -> Result<BoundReport<T>> {
    let averages: BTreeMap<usize, T> = avg_mi_per_subset
        .iter()
        .map(|(&j, p)| (j, p.average()))
        .collect();
    evaluate_bound(dims, &averages, form)
}

/// Finite-sample error lower bound from the identification inequality:
/// `P_e >= 1 - (T * avg_mi + ln 2) / log C(N-j, K-j)`, clamped to `[0, 1]`.
/// The `ln 2` term is the one-bit entropy of the error indicator.
pub fn fano_error_lower_bound<T: Real>(
    t: u64,
    avg_mi: T,
    n_vars: usize,
    k: usize,
    revealed_size: usize,
) -> Result<T> {
    if k == 0 || k > n_vars {
        return Err(Error::domain("need 1 <= K <= N"));
    }
    if revealed_size >= k {
        return Err(Error::domain(format!(
            "revealed size {revealed_size} must be < K={k}"
        )));
    }
    if avg_mi < T::zero() || !avg_mi.is_finite() {
        return Err(Error::domain(format!("average MI must be >= 0, got {avg_mi}")));
    }
    let log_candidates =
        log_binom::<T>((n_vars - revealed_size) as u64, (k - revealed_size) as u64)?;
    if log_candidates <= T::zero() {
        // A single candidate: nothing left to identify.
        return Ok(T::zero());
    }
    let numerator = real::<T>(t as f64) * avg_mi + T::ln_2();
    Ok((T::one() - numerator / log_candidates)
        .max(T::zero())
        .min(T::one()))
}

// ---------------------------------------------------------------------------
// Circulant design covariance
// ---------------------------------------------------------------------------

/// Eigenvalues of the `d x d` matrix with constant diagonal `diag` and
/// constant off-diagonal `rho` (the DFT-diagonalized design covariance):
/// `diag + (d-1) rho` once and `diag - rho` with multiplicity `d-1`.
pub fn circulant_eigenvalues<T: Real>(d: usize, diag: T, rho: T) -> Result<Vec<T>> {
    if d == 0 {
        return Err(Error::domain("dimension must be >= 1"));
    }
    let top = diag + real::<T>((d - 1) as f64) * rho;
    if top < T::zero() {
        return Err(Error::domain(format!(
            "not PSD: leading eigenvalue diag + (d-1) rho = {top} is negative"
        )));
    }
    if d > 1 {
        let rest = diag - rho;
        if rest < T::zero() {
            return Err(Error::domain(format!(
                "not PSD: repeated eigenvalue diag - rho = {rest} is negative"
            )));
        }
        let mut out = Vec::with_capacity(d);
        out.push(top);
        out.resize(d, rest);
        Ok(out)
    } else {
        Ok(vec![top])
    }
}

// ---------------------------------------------------------------------------
// Power allocations and the per-sequence MI cap
// ---------------------------------------------------------------------------

/// Per-step shares `P_t` of the unit total design power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation<T> {
    weights: Vec<T>,
}

impl<T: Real> PowerAllocation<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("allocation needs at least one step"));
        }
        if weights.iter().any(|&w| w < T::zero() || !w.is_finite()) {
            return Err(Error::domain("allocation weights must be nonnegative"));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > real(1e-12) {
            return Err(Error::domain(format!("allocation must sum to 1, got {total}")));
        }
        Ok(PowerAllocation { weights })
    }

    /// Equal shares `P_t = 1/T`.
    pub fn uniform(t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::domain("allocation needs at least one step"));
        }
        PowerAllocation::new(vec![T::one() / real::<T>(t as f64); t])
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Sequence-averaged MI cap under a power allocation:
/// `(1/T) Σ_t ½ ln(1 + SNR (K-j) N P_t / K)`. Maximized by the uniform
/// allocation (strict concavity in `P_t`).
pub fn sequence_mi_cap<T: Real>(
    snr: T,
    n_vars: usize,
    k: usize,
    revealed_size: usize,
    allocation: &PowerAllocation<T>,
) -> Result<T> {
    let terms: Vec<T> = allocation
        .weights()
        .iter()
        .map(|&p_t| {
            if p_t == T::zero() {
                Ok(T::zero())
            } else {
                linear_cs_mi_closed_form(snr, n_vars, k, revealed_size, p_t)
            }
        })
        .collect::<Result<_>>()?;
    Ok(stable_mean(&terms))
}

// ---------------------------------------------------------------------------
// (T, SNR) feasibility for linear CS
// ---------------------------------------------------------------------------

/// One term of the necessary condition, at `i = K - |S~|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsFeasibilityTerm<T> {
    pub i: usize,
    /// `T * ½ ln(1 + SNR i N / (K T))` in nats.
    pub lhs: T,
    /// `log C(N-K+i, i)` in nats.
    pub rhs: T,
    pub satisfied: bool,
}

/// Verdict of the `(T, SNR)` necessary condition across `i = 1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsFeasibilityReport<T> {
    pub units: String,
    pub form: BoundForm,
    pub t: u64,
    pub snr: T,
    pub per_i_terms: Vec<CsFeasibilityTerm<T>>,
    pub feasible: bool,
}

impl<T: Real> CsFeasibilityReport<T> {
    pub fn in_bits(&self) -> CsFeasibilityReport<T> {
        let ln2 = T::ln_2();
        CsFeasibilityReport {
            units: "bits".to_string(),
            form: self.form,
            t: self.t,
            snr: self.snr,
            per_i_terms: self
                .per_i_terms
                .iter()
                .map(|x| CsFeasibilityTerm {
                    i: x.i,
                    lhs: x.lhs / ln2,
                    rhs: x.rhs / ln2,
                    satisfied: x.satisfied,
                })
                .collect(),
            feasible: self.feasible,
        }
    }
}

/// Check the necessary condition for exact support recovery at `(T, SNR)`:
/// for every `i in 1..=K`,
/// `T * ½ ln(1 + SNR i N / (K T)) >= log C(N-K+i, i)` (asymptotic form)
/// or `>= log C(N-K+i, i) - ln 2` (finite form).
pub fn cs_feasibility<T: Real>(
    t: u64,
    snr: T,
    n_vars: usize,
    k: usize,
    form: BoundForm,
) -> Result<CsFeasibilityReport<T>> {
    if t == 0 {
        return Err(Error::domain("need T >= 1"));
    }
    if !(snr > T::zero() && snr.is_finite()) {
        return Err(Error::domain(format!("SNR must be positive, got {snr}")));
    }
    if k == 0 || k > n_vars {
        return Err(Error::domain("need 1 <= K <= N"));
    }
    let tt = real::<T>(t as f64);
    let n = real::<T>(n_vars as f64);
    let kk = real::<T>(k as f64);
    let half = real::<T>(0.5);
    let mut terms = Vec::with_capacity(k);
    let mut feasible = true;
    for i in 1..=k {
        let lhs = tt * half * (snr * real::<T>(i as f64) * n / (kk * tt)).ln_1p();
        let rhs = log_binom::<T>((n_vars - k + i) as u64, i as u64)?;
        let threshold = match form {
            BoundForm::Asymptotic => rhs,
            BoundForm::FiniteFano => rhs - T::ln_2(),
        };
        let satisfied = lhs >= threshold;
        feasible &= satisfied;
        terms.push(CsFeasibilityTerm {
            i,
            lhs,
            rhs,
            satisfied,
        });
    }
    Ok(CsFeasibilityReport {
        units: "nats".to_string(),
        form,
        t,
        snr,
        per_i_terms: terms,
        feasible,
    })
}

/// Smallest `T <= cap` satisfying [`cs_feasibility`], or `None` if no such
/// `T` exists up to the cap. Exponential bracketing plus binary search,
/// valid because the feasibility left-hand side is nondecreasing in `T`.
pub fn min_feasible_t<T: Real>(
    snr: T,
    n_vars: usize,
    k: usize,
    form: BoundForm,
    cap: u64,
) -> Result<Option<u64>> {
    if cap == 0 {
        return Err(Error::domain("search cap must be >= 1"));
    }
    let feasible = |t: u64| -> Result<bool> { Ok(cs_feasibility(t, snr, n_vars, k, form)?.feasible) };
    if feasible(1)? {
        return Ok(Some(1));
    }
    // Bracket: lo infeasible, hi feasible (if any suffix is).
    let mut lo = 1u64;
    let mut hi = 2u64;
    while hi < cap && !feasible(hi)? {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    hi = hi.min(cap);
    if !feasible(hi)? {
        return Ok(None);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// SNR below which no `T` can satisfy the feasibility condition, from the
/// `i = 1` term in the `T -> infinity` limit:
/// `snr_min = 2 K (ln(N-K+1) - slack) / N`, `slack = ln 2` for the finite
/// form and `0` for the asymptotic form.
///
/// The constant (factor 2, argument `N-K+1`) comes from instantiating the
/// feasibility condition at `i = 1` as implemented here; treat it as
/// implementation-specific rather than a universally tight constant.
pub fn snr_necessary<T: Real>(n_vars: usize, k: usize, form: BoundForm) -> Result<T> {
    if k == 0 || k >= n_vars {
        return Err(Error::domain("need 1 <= K < N"));
    }
    let slack = match form {
        BoundForm::Asymptotic => T::zero(),
        BoundForm::FiniteFano => T::ln_2(),
    };
    let base = (real::<T>((n_vars - k + 1) as f64).ln() - slack).max(T::zero());
    Ok(real::<T>(2.0) * real::<T>(k as f64) * base / real::<T>(n_vars as f64))
}
