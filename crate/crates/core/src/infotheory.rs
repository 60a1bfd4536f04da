//! Conditional mutual information `I(X_{S\S~}; Y | X_S~, β_S)`.
//!
//! Three estimation routes, matched to how the quantity is used:
//!
//! * exact enumeration over a finite design alphabet (binary-output
//!   models), the reference value for nonadaptive designs;
//! * closed-form and Monte-Carlo evaluation for Gaussian designs (linear
//!   and 1-bit compressive sensing), including the Schur-complement
//!   conditioning on revealed coordinates;
//! * a plug-in estimator over simulated measurement histories, the only
//!   route available for adaptive strategies whose per-step marginals
//!   differ.
//!
//! Everything is reported in nats. Revealed coordinates follow one
//! convention throughout: the *first* `|S~|` coordinates of the support
//! ordering are the revealed ones.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::models::{ObservationModel, OneBitCsModel, OutputAlphabet};
use crate::scalar::{real, stable_mean, Real};
use crate::types::{LatentCoefficients, MeasurementHistory, RevealedSubset, SupportSet};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Enumeration cap for exact conditional MI (`alphabet^K` terms).
pub const ENUM_CAP: u64 = 10_000_000;

/// Bootstrap resamples used for every Monte-Carlo standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Largest design alphabet the plug-in estimator will accept; beyond this
/// the design is treated as continuous and unsupported.
pub const PLUGIN_ALPHABET_CAP: usize = 64;

const INNER_SAMPLES: u64 = 64;

// ---------------------------------------------------------------------------
// Estimates
// ---------------------------------------------------------------------------

/// How an MI value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MiMethod {
    #[serde(rename = "exact-enumeration")]
    ExactEnumeration,
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "plug-in")]
    PlugIn,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

/// A conditional mutual information value in nats, with estimator
/// metadata. Values within `-1e-9` of zero are clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate<T> {
    pub value: T,
    pub method: MiMethod,
    pub samples: Option<u64>,
    pub std_error: Option<T>,
}

impl<T: Real> MiEstimate<T> {
    pub fn new(value: T, method: MiMethod, samples: Option<u64>, std_error: Option<T>) -> Self {
        let tol = real::<T>(-1e-9);
        debug_assert!(value >= tol, "MI estimate {value} below -1e-9");
        let value = if value < T::zero() && value >= tol {
            T::zero()
        } else {
            value
        };
        MiEstimate {
            value,
            method,
            samples,
            std_error,
        }
    }

    pub fn exact(value: T) -> Self {
        MiEstimate::new(value, MiMethod::ExactEnumeration, None, None)
    }

    pub fn closed_form(value: T) -> Self {
        MiEstimate::new(value, MiMethod::ClosedForm, None, None)
    }
}

/// Per-step MI values along a measurement sequence and their average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMiProfile<T> {
    per_step: Vec<MiEstimate<T>>,
    average: T,
}

impl<T: Real> SequenceMiProfile<T> {
    pub fn from_estimates(per_step: Vec<MiEstimate<T>>) -> Result<Self> {
        if per_step.is_empty() {
            return Err(Error::domain("sequence MI profile must have T >= 1 steps"));
        }
        let values: Vec<T> = per_step.iter().map(|e| e.value).collect();
        // stable_mean reproduces the common value exactly for constant
        // profiles, which the bound-reduction identity relies on.
        let average = stable_mean(&values);
        Ok(SequenceMiProfile { per_step, average })
    }

    /// Profile with the same estimate at every step.
    pub fn constant(estimate: MiEstimate<T>, steps: usize) -> Result<Self> {
        Self::from_estimates(vec![estimate; steps.max(1)])
    }

    pub fn per_step(&self) -> &[MiEstimate<T>] {
        &self.per_step
    }

    pub fn average(&self) -> T {
        self.average
    }

    pub fn len(&self) -> usize {
        self.per_step.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_step.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Design distributions
// ---------------------------------------------------------------------------

/// Explicit pmf over a finite alphabet, IID per on-support coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDesign<T> {
    symbols: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> DiscreteDesign<T> {
    pub fn new(symbols: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if symbols.is_empty() || symbols.len() != probs.len() {
            return Err(Error::domain("pmf needs matching, nonempty symbol/prob lists"));
        }
        if probs.iter().any(|&p| p < T::zero() || !p.is_finite()) {
            return Err(Error::domain("pmf probabilities must be nonnegative"));
        }
        let total: T = probs.iter().copied().sum();
        if (total - T::one()).abs() > real(1e-12) {
            return Err(Error::domain(format!("pmf must sum to 1, got {total}")));
        }
        Ok(DiscreteDesign { symbols, probs })
    }

    /// Bernoulli(p) inclusion design over symbols {0, 1}.
    pub fn bernoulli(p: T) -> Result<Self> {
        if p < T::zero() || p > T::one() {
            return Err(Error::domain(format!("Bernoulli p must be in [0, 1], got {p}")));
        }
        DiscreteDesign::new(vec![T::zero(), T::one()], vec![T::one() - p, p])
    }

    /// Point mass at a single value.
    pub fn delta(value: T) -> Self {
        DiscreteDesign {
            symbols: vec![value],
            probs: vec![T::one()],
        }
    }

    pub fn alphabet_len(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[T] {
        &self.symbols
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }
}

/// Zero-mean Gaussian design over the `K` on-support coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDesign<T> {
    cov: Matrix<T>,
    chol: Matrix<T>,
}

impl<T: Real> GaussianDesign<T> {
    pub fn new(cov: Matrix<T>) -> Result<Self> {
        if cov.is_empty() {
            return Err(Error::domain("covariance must be at least 1x1"));
        }
        let tol = real::<T>(1e-12) * linalg::max_diag(&cov).max(T::one());
        let chol = linalg::cholesky_psd(&cov, tol)?;
        Ok(GaussianDesign { cov, chol })
    }

    /// IID coordinates with the given variance.
    pub fn isotropic(dim: usize, variance: T) -> Result<Self> {
        if variance < T::zero() {
            return Err(Error::domain("variance must be nonnegative"));
        }
        GaussianDesign::new(linalg::constant_correlation(dim, variance, T::zero()))
    }

    /// Constant diagonal `diag`, constant off-diagonal `rho`.
    pub fn constant_correlation(dim: usize, diag: T, rho: T) -> Result<Self> {
        GaussianDesign::new(linalg::constant_correlation(dim, diag, rho))
    }

    pub fn dim(&self) -> usize {
        self.cov.len()
    }

    pub fn covariance(&self) -> &Matrix<T> {
        &self.cov
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        let n = self.dim();
        let z: Vec<T> = (0..n).map(|_| T::std_normal(rng)).collect();
        for i in 0..n {
            let mut s = T::zero();
            for k in 0..=i {
                s = s + self.chol[i][k] * z[k];
            }
            out[i] = s;
        }
    }
}

/// A per-coordinate design distribution: finite pmf or Gaussian.
#[derive(Debug, Clone)]
pub enum DesignDistribution<T> {
    Discrete(DiscreteDesign<T>),
    Gaussian(GaussianDesign<T>),
}

// ---------------------------------------------------------------------------
// Entropy primitives
// ---------------------------------------------------------------------------

/// Binary entropy `H_b(p) = -p ln p - (1-p) ln(1-p)` in nats, with the
/// `0 ln 0 = 0` convention.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    let slack = real::<T>(1e-12);
    if p < -slack || p > T::one() + slack || !p.is_finite() {
        return Err(Error::domain(format!("probability out of [0, 1]: {p}")));
    }
    let p = p.max(T::zero()).min(T::one());
    let q = T::one() - p;
    let mut h = T::zero();
    if p > T::zero() {
        h = h - p * p.ln();
    }
    if q > T::zero() {
        h = h - q * q.ln();
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// Exact enumeration (binary-output models, finite alphabet)
// ---------------------------------------------------------------------------

/// Exact `I(X_{S'}; Y | X_S~, β_S)` for a binary-output model under an
/// IID finite-alphabet design, by summing over all `alphabet^K` on-support
/// configurations. The first `s_tilde_size` support coordinates are the
/// revealed ones.
pub fn exact_conditional_mi<T: Real>(
    model: &ObservationModel<T>,
    design: &DiscreteDesign<T>,
    k: usize,
    s_tilde_size: usize,
    beta: &LatentCoefficients<T>,
) -> Result<MiEstimate<T>> {
    if model.output_alphabet() != OutputAlphabet::Binary {
        return Err(Error::unsupported(
            "exact enumeration requires a binary-output model",
        ));
    }
    if k == 0 || beta.len() != k {
        return Err(Error::domain("need K >= 1 and β aligned with the support"));
    }
    if s_tilde_size >= k {
        return Err(Error::domain("revealed size must be < K"));
    }
    let a = design.alphabet_len() as u64;
    let total = a
        .checked_pow(k as u32)
        .filter(|&c| c <= ENUM_CAP)
        .ok_or_else(|| {
            Error::resource(format!(
                "enumeration size {a}^{k} exceeds cap {ENUM_CAP}"
            ))
        })?;
    let _ = total;

    let j = s_tilde_size;
    let hidden = k - j;
    let outer = a.pow(j as u32);
    let inner = a.pow(hidden as u32);

    let mut x_s = vec![T::zero(); k];
    let mut mi = T::zero();
    for out_code in 0..outer {
        let q_out = decode_config(design, out_code, j, &mut x_s[..j]);
        let mut p_marginal = T::zero();
        let mut h_conditional = T::zero();
        for in_code in 0..inner {
            let q_in = decode_config(design, in_code, hidden, &mut x_s[j..]);
            let p1 = model.positive_probability(&x_s, beta)?;
            p_marginal = p_marginal + q_in * p1;
            h_conditional = h_conditional + q_in * binary_entropy(p1)?;
        }
        mi = mi + q_out * (binary_entropy(p_marginal)? - h_conditional);
    }
    Ok(MiEstimate::exact(mi))
}

/// Write the `code`-th alphabet configuration into `out` (mixed radix,
/// least-significant coordinate first) and return its probability.
fn decode_config<T: Real>(design: &DiscreteDesign<T>, code: u64, len: usize, out: &mut [T]) -> T {
    let a = design.alphabet_len() as u64;
    let mut rest = code;
    let mut q = T::one();
    for slot in 0..len {
        let digit = (rest % a) as usize;
        rest /= a;
        out[slot] = design.symbols()[digit];
        q = q * design.probs()[digit];
    }
    q
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimation for Gaussian designs, binary output
// ---------------------------------------------------------------------------

/// Monte-Carlo `I(X_{S'}; Y | X_S~, β_S)` for the 1-bit model under a
/// Gaussian design.
///
/// Conditional positive probabilities are exact (`Φ`); the marginal
/// `P(Y=1 | x_S~)` is estimated by nested sampling of the hidden
/// coordinates given the revealed ones (Schur-complement conditioning).
/// The standard error comes from a 200-resample bootstrap.
pub fn binary_channel_mi_mc<T: Real, R: Rng + ?Sized>(
    model: &OneBitCsModel<T>,
    design: &GaussianDesign<T>,
    s_tilde_size: usize,
    beta: &LatentCoefficients<T>,
    samples: u64,
    rng: &mut R,
) -> Result<MiEstimate<T>> {
    let k = design.dim();
    if beta.len() != k {
        return Err(Error::domain("β must align with the design covariance"));
    }
    if s_tilde_size >= k {
        return Err(Error::domain("revealed size must be < K"));
    }
    if samples < 1_000 {
        return Err(Error::domain("Monte-Carlo MI needs at least 1000 samples"));
    }
    let j = s_tilde_size;
    let as_model = ObservationModel::OneBitCs(*model);

    if j == 0 {
        let n = samples as usize;
        let mut phi = Vec::with_capacity(n);
        let mut ent = Vec::with_capacity(n);
        let mut x = vec![T::zero(); k];
        for _ in 0..n {
            design.sample_into(rng, &mut x);
            let p1 = as_model.positive_probability(&x, beta)?;
            phi.push(p1);
            ent.push(binary_entropy(p1)?);
        }
        let value = binary_entropy(stable_mean(&phi))? - stable_mean(&ent);
        let se = bootstrap_se(n, rng, |idx| {
            let mut p_sum = T::zero();
            let mut h_sum = T::zero();
            for &i in idx {
                p_sum = p_sum + phi[i];
                h_sum = h_sum + ent[i];
            }
            let m = real::<T>(idx.len() as f64);
            binary_entropy(p_sum / m).unwrap_or(T::zero()) - h_sum / m
        });
        return Ok(MiEstimate::new(
            value,
            MiMethod::MonteCarlo,
            Some(samples),
            Some(se),
        ));
    }

    // Revealed coordinates are the first j; condition the hidden block.
    let a_idx: Vec<usize> = (0..j).collect();
    let b_idx: Vec<usize> = (j..k).collect();
    let cond = linalg::condition_on(design.covariance(), &a_idx, &b_idx)?;
    let revealed_design = GaussianDesign::new(linalg::submatrix(
        design.covariance(),
        &a_idx,
        &a_idx,
    ))?;
    let cond_chol = linalg::cholesky_psd(
        &cond.conditional_cov,
        real::<T>(1e-12) * linalg::max_diag(&cond.conditional_cov).max(T::one()),
    )?;

    let m_out = (samples / INNER_SAMPLES).max(16) as usize;
    let m_in = INNER_SAMPLES as usize;
    let mut contrib = Vec::with_capacity(m_out);
    let mut x = vec![T::zero(); k];
    let mut x_rev = vec![T::zero(); j];
    let hidden = k - j;
    for _ in 0..m_out {
        revealed_design.sample_into(rng, &mut x_rev);
        x[..j].copy_from_slice(&x_rev);
        let mean_b = linalg::mat_vec(&cond.regression, &x_rev);
        let mut p_hat = T::zero();
        let mut h_in = T::zero();
        for _ in 0..m_in {
            let z: Vec<T> = (0..hidden).map(|_| T::std_normal(rng)).collect();
            for (bi, xb) in x[j..].iter_mut().enumerate() {
                let mut s = mean_b[bi];
                for bk in 0..=bi {
                    s = s + cond_chol[bi][bk] * z[bk];
                }
                *xb = s;
            }
            let p1 = as_model.positive_probability(&x, beta)?;
            p_hat = p_hat + p1;
            h_in = h_in + binary_entropy(p1)?;
        }
        let m = real::<T>(m_in as f64);
        contrib.push(binary_entropy(p_hat / m)? - h_in / m);
    }
    let value = stable_mean(&contrib);
    let se = bootstrap_se(m_out, rng, |idx| {
        let sum: T = idx.iter().map(|&i| contrib[i]).sum();
        sum / real::<T>(idx.len() as f64)
    });
    Ok(MiEstimate::new(
        value,
        MiMethod::MonteCarlo,
        Some((m_out * m_in) as u64),
        Some(se),
    ))
}

// ---------------------------------------------------------------------------
// Linear CS: closed form and Monte-Carlo oracle
// ---------------------------------------------------------------------------

/// Per-step MI cap for the linear model under the total power constraint:
/// `½ ln(1 + SNR (K - |S~|) N P_t / K)`.
pub fn linear_cs_mi_closed_form<T: Real>(
    snr: T,
    n_vars: usize,
    k: usize,
    s_tilde_size: usize,
    p_t: T,
) -> Result<T> {
    if !(snr > T::zero() && snr.is_finite()) {
        return Err(Error::domain(format!("SNR must be positive, got {snr}")));
    }
    if !(p_t > T::zero() && p_t <= T::one()) {
        return Err(Error::domain(format!("P_t must be in (0, 1], got {p_t}")));
    }
    if k == 0 || k > n_vars {
        return Err(Error::domain("need 1 <= K <= N"));
    }
    if s_tilde_size >= k {
        return Err(Error::domain("revealed size must be < K"));
    }
    let hidden = real::<T>((k - s_tilde_size) as f64);
    let n = real::<T>(n_vars as f64);
    let kk = real::<T>(k as f64);
    Ok(real::<T>(0.5) * (snr * hidden * n * p_t / kk).ln_1p())
}

/// Monte-Carlo `E_β[½ ln(1 + SNR · β' Σ_{S'|S~} β')]` under the Rademacher
/// prior: the exact Gaussian-design MI, conditioning on the revealed
/// block through the Schur complement. Serves as the oracle the closed
/// form must dominate.
pub fn linear_cs_mi_mc<T: Real, R: Rng + ?Sized>(
    snr: T,
    design: &GaussianDesign<T>,
    s_tilde_size: usize,
    samples: u64,
    rng: &mut R,
) -> Result<MiEstimate<T>> {
    if !(snr > T::zero() && snr.is_finite()) {
        return Err(Error::domain(format!("SNR must be positive, got {snr}")));
    }
    let k = design.dim();
    if s_tilde_size >= k {
        return Err(Error::domain("revealed size must be < K"));
    }
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let j = s_tilde_size;
    let cond_cov = if j == 0 {
        design.covariance().clone()
    } else {
        let a_idx: Vec<usize> = (0..j).collect();
        let b_idx: Vec<usize> = (j..k).collect();
        linalg::condition_on(design.covariance(), &a_idx, &b_idx)?.conditional_cov
    };

    let half = real::<T>(0.5);
    let n = samples as usize;
    let mut terms = Vec::with_capacity(n);
    for _ in 0..n {
        let beta = LatentCoefficients::<T>::rademacher(k - j, rng);
        let v = linalg::quadratic_form(&cond_cov, beta.values()).max(T::zero());
        terms.push(half * (snr * v).ln_1p());
    }
    let value = stable_mean(&terms);
    let se = bootstrap_se(n, rng, |idx| {
        let sum: T = idx.iter().map(|&i| terms[i]).sum();
        sum / real::<T>(idx.len() as f64)
    });
    Ok(MiEstimate::new(
        value,
        MiMethod::MonteCarlo,
        Some(samples),
        Some(se),
    ))
}

// ---------------------------------------------------------------------------
// Plug-in estimation from measurement histories
// ---------------------------------------------------------------------------

/// Plug-in per-step conditional MI from `M` independent runs sharing the
/// same support, revealed subset, and horizon.
///
/// For each step the joint pmf of `(x_S~, x_{S'}, y)` across runs is
/// estimated and the plug-in conditional MI computed from it; the profile
/// averages over steps. On-support design values must live in a finite
/// alphabet (at most [`PLUGIN_ALPHABET_CAP`] distinct values); the
/// estimator is biased upward by `O(cells / M)` and carries a multinomial
/// bootstrap standard error.
pub fn plugin_sequence_mi<T: Real, R: Rng + ?Sized>(
    traces: &[MeasurementHistory<T>],
    support: &SupportSet,
    revealed: &RevealedSubset,
    rng: &mut R,
) -> Result<SequenceMiProfile<T>> {
    let m = traces.len();
    if m < 100 {
        return Err(Error::domain("plug-in estimation needs at least 100 traces"));
    }
    let t_len = traces[0].len();
    if t_len == 0 {
        return Err(Error::domain("traces must have at least one step"));
    }
    if traces.iter().any(|tr| tr.len() != t_len) {
        return Err(Error::domain("all traces must share the same horizon T"));
    }
    if !support.contains_all(revealed.members()) || revealed.len() >= support.len() {
        return Err(Error::domain("revealed subset must be a proper subset of the support"));
    }

    let a_vars = revealed.members().to_vec();
    let b_vars = support.hidden(revealed);
    let mut alphabet: Vec<T> = Vec::new();

    let mut per_step = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut cells: BTreeMap<(Vec<u8>, Vec<u8>, bool), u64> = BTreeMap::new();
        for trace in traces {
            let step = &trace.steps()[t];
            let a_key = encode_symbols(&step.x, &a_vars, &mut alphabet)?;
            let b_key = encode_symbols(&step.x, &b_vars, &mut alphabet)?;
            let y = step.y.as_bit()?;
            *cells.entry((a_key, b_key, y)).or_insert(0) += 1;
        }
        let flat: Vec<(&(Vec<u8>, Vec<u8>, bool), u64)> =
            cells.iter().map(|(k, &v)| (k, v)).collect();
        let value = plugin_cmi::<T>(&flat);
        let se = multinomial_bootstrap_se::<T, _>(&flat, m as u64, rng);
        per_step.push(MiEstimate::new(
            value,
            MiMethod::PlugIn,
            Some(m as u64),
            Some(se),
        ));
    }
    SequenceMiProfile::from_estimates(per_step)
}

/// Map design values at `vars` to alphabet symbol ids by exact equality.
fn encode_symbols<T: Real>(x: &[T], vars: &[usize], alphabet: &mut Vec<T>) -> Result<Vec<u8>> {
    vars.iter()
        .map(|&v| {
            let val = x[v];
            if !val.is_finite() {
                return Err(Error::domain("design values must be finite"));
            }
            if let Some(pos) = alphabet.iter().position(|&s| s == val) {
                return Ok(pos as u8);
            }
            if alphabet.len() >= PLUGIN_ALPHABET_CAP {
                return Err(Error::unsupported(
                    "plug-in MI requires a finite design alphabet; \
                     continuous-valued designs are not supported",
                ));
            }
            alphabet.push(val);
            Ok((alphabet.len() - 1) as u8)
        })
        .collect()
}

/// Plug-in conditional MI from a flat count table, in nats:
/// `Σ p(a,b,y) ln[ n(a) n(a,b,y) / (n(a,b) n(a,y)) ]`.
fn plugin_cmi<T: Real>(cells: &[(&(Vec<u8>, Vec<u8>, bool), u64)]) -> T {
    let mut n_a: BTreeMap<&[u8], u64> = BTreeMap::new();
    let mut n_ab: BTreeMap<(&[u8], &[u8]), u64> = BTreeMap::new();
    let mut n_ay: BTreeMap<(&[u8], bool), u64> = BTreeMap::new();
    let mut total = 0u64;
    for ((a, b, y), c) in cells {
        *n_a.entry(a).or_insert(0) += c;
        *n_ab.entry((a, b)).or_insert(0) += c;
        *n_ay.entry((a, *y)).or_insert(0) += c;
        total += c;
    }
    let mut mi = T::zero();
    for ((a, b, y), c) in cells {
        if *c == 0 {
            continue;
        }
        let na = n_a[a.as_slice()] as f64;
        let nab = n_ab[&(a.as_slice(), b.as_slice())] as f64;
        let nay = n_ay[&(a.as_slice(), *y)] as f64;
        let p = real::<T>(*c as f64 / total as f64);
        mi = mi + p * real::<T>((na * *c as f64) / (nab * nay)).ln();
    }
    mi.max(T::zero())
}

/// Multinomial bootstrap over the count table: resample `total` draws
/// across cells and recompute the plug-in value.
fn multinomial_bootstrap_se<T: Real, R: Rng + ?Sized>(
    cells: &[(&(Vec<u8>, Vec<u8>, bool), u64)],
    total: u64,
    rng: &mut R,
) -> T {
    let mut values = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resampled: Vec<(&(Vec<u8>, Vec<u8>, bool), u64)> =
        cells.iter().map(|&(k, _)| (k, 0)).collect();
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut remaining = total;
        let mut mass_left = 1.0f64;
        for (slot, &(_, count)) in cells.iter().enumerate() {
            let p_cell = count as f64 / total as f64;
            let draw = if remaining == 0 || mass_left <= 0.0 {
                0
            } else {
                let p = (p_cell / mass_left).clamp(0.0, 1.0);
                Binomial::new(remaining, p)
                    .map(|d| d.sample(rng))
                    .unwrap_or(0)
            };
            resampled[slot].1 = draw;
            remaining -= draw;
            mass_left -= p_cell;
        }
        values.push(plugin_cmi::<T>(&resampled));
    }
    std_dev(&values)
}

// ---------------------------------------------------------------------------
// Bootstrap helpers
// ---------------------------------------------------------------------------

/// Standard error of a statistic by nonparametric bootstrap over sample
/// indices (200 resamples).
fn bootstrap_se<T: Real, R: Rng + ?Sized, F: FnMut(&[usize]) -> T>(
    n: usize,
    rng: &mut R,
    mut stat: F,
) -> T {
    let mut idx = vec![0usize; n];
    let mut values = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
        values.push(stat(&idx));
    }
    std_dev(&values)
}

fn std_dev<T: Real>(values: &[T]) -> T {
    let n = real::<T>(values.len() as f64);
    let mean = stable_mean(values);
    let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (ss / n).sqrt()
}
