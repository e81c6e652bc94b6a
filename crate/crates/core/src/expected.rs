//! Mixture output with expected approximation factor `3 - 2/n`.
//!
//! Weights come from the closed-form solution of the system
//! `sum_{j != i} p_j (1 + W_j / W_i) = const` (zero diagonal), rounded to
//! a distribution by restricting to the largest good prefix of the
//! hypotheses sorted by `W`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::check_accuracy;
use crate::dist::{HypothesisSet, LazySemiDistances, SampleSet, SemiDistances, TableSource};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureOutput<T> {
    pub weights: Vec<T>,
    #[serde(rename = "W")]
    pub w_used: Vec<T>,
}

fn check_positive<T: Scalar>(w: &[T]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::EmptyHypothesisSet);
    }
    match w.iter().position(|&x| !(x > T::zero() && x.is_finite())) {
        Some(i) => Err(Error::ZeroWeight(i)),
        None => Ok(()),
    }
}

/// `p_i = (D/W_i - (n-2)) / (DC - n(n-2))` with `C = sum 1/W_i`,
/// `D = sum W_i`. Entries may be negative; they always sum to 1.
pub fn closed_form_weights<T: Scalar>(w: &[T]) -> Result<Vec<T>> {
    check_positive(w)?;
    let n = T::of_usize(w.len());
    let two = T::of(2.0);
    let c: T = w.iter().map(|&x| x.recip()).sum();
    let d: T = w.iter().copied().sum();
    let denom = d * c - n * (n - two);
    Ok(w.iter().map(|&x| (d / x - (n - two)) / denom).collect())
}

/// Largest `k` such that `(k-3) W_j <= sum_{i<=k, i!=j} W_i` for every
/// `j <= k`. Expects `w` sorted ascending; returns `min(n, 3)` or more.
pub fn good_index<T: Scalar>(w: &[T]) -> usize {
    let mut prefix = T::zero();
    let mut best = 0;
    for k in 1..=w.len() {
        prefix = prefix + w[k - 1];
        let kk = T::of_usize(k) - T::of(3.0);
        if w[..k].iter().all(|&x| kk * x <= prefix - x) {
            best = k;
        }
    }
    best
}

/// Rounds the closed-form weights to a distribution: the `k` smallest `W`
/// (ties by index) get the `k`-hypothesis closed form, the rest get 0,
/// where `k` is the good index.
pub fn round_weights<T: Scalar>(w: &[T]) -> Result<Vec<T>> {
    check_positive(w)?;
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[a].partial_cmp(&w[b]).expect("finite").then(a.cmp(&b)));
    let sorted: Vec<T> = order.iter().map(|&i| w[i]).collect();
    let k = good_index(&sorted);
    let p = closed_form_weights(&sorted[..k])?;
    let mut q = vec![T::zero(); w.len()];
    for (rank, &i) in order[..k].iter().enumerate() {
        q[i] = p[rank];
    }
    Ok(q)
}

/// `1 + sum_{i != i*} q_i (1 + W_i / W_{i*})`.
pub fn factor_bound<T: Scalar>(q: &[T], w: &[T], i_star: usize) -> T {
    let ws = w[i_star];
    T::one()
        + q.iter()
            .zip(w)
            .enumerate()
            .filter(|&(i, _)| i != i_star)
            .map(|(_, (&qi, &wi))| qi * (T::one() + wi / ws))
            .sum::<T>()
}

/// Mixture from `W_i = shift + max_j w_{j->i}`. If some `W_i` is zero the
/// point mass on the smallest such `i` is returned.
pub fn expected_select<T: Scalar, S: SemiDistances<T> + ?Sized>(
    table: &S,
    shift: T,
) -> Result<MixtureOutput<T>> {
    let n = table.size();
    if n == 0 {
        return Err(Error::EmptyHypothesisSet);
    }
    let w: Vec<T> = (0..n).map(|i| table.max_semi(i) + shift).collect();
    let weights = match w.iter().position(|&x| x == T::zero()) {
        Some(i) => {
            let mut q = vec![T::zero(); n];
            q[i] = T::one();
            q
        }
        None => round_weights(&w)?,
    };
    Ok(MixtureOutput { weights, w_used: w })
}

/// Mixture from empirical semi-distances, each `W` shifted up by `eps` so
/// it dominates the true value when the estimates are `eps`-accurate.
pub fn select_expected<T: Scalar>(
    hyps: &HypothesisSet<T>,
    sample: &SampleSet,
    eps: f64,
) -> Result<MixtureOutput<T>> {
    check_accuracy(eps, 0.5)?;
    let oracle = LazySemiDistances::new(hyps, TableSource::Empirical(sample))?;
    expected_select(&oracle, T::of(eps))
}

impl<T: Scalar> MixtureOutput<T> {
    /// `sum_i q_i v_i`.
    pub fn expectation(&self, values: &[T]) -> T {
        self.weights.iter().zip(values).map(|(&q, &v)| q * v).sum()
    }

    /// Draws one index from the mixture; rounding noise below zero is
    /// treated as zero weight.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.weights.iter().map(|q| q.as_f64().max(0.0)).sum();
        let mut u = rng.random::<f64>() * total;
        let mut last = 0;
        for (i, q) in self.weights.iter().enumerate() {
            let q = q.as_f64().max(0.0);
            if q > 0.0 {
                last = i;
                if u < q {
                    return i;
                }
                u -= q;
            }
        }
        last
    }
}
