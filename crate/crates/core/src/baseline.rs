//! Baseline selectors: minimum max-semi-distance, the MLW elimination
//! tournament, and the quantile-threshold algorithm.

use rand::Rng;

use crate::dist::{HypothesisSet, LazySemiDistances, SampleSet, SemiDistances, TableSource};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectorResult {
    pub chosen: usize,
    pub queries: u64,
    pub samples_used: usize,
}

pub(crate) fn finish<T: Scalar, S: SemiDistances<T> + ?Sized>(
    oracle: &S,
    start: u64,
    chosen: usize,
) -> SelectorResult {
    SelectorResult {
        chosen,
        queries: oracle.queries() - start,
        samples_used: oracle.samples(),
    }
}

/// `argmin_j max_i w_{i->j}`, lowest index on ties.
pub fn select_min_w<T: Scalar, S: SemiDistances<T> + ?Sized>(table: &S) -> Result<SelectorResult> {
    let n = table.size();
    if n == 0 {
        return Err(Error::EmptyHypothesisSet);
    }
    let start = table.queries();
    let mut best = (0, table.max_semi(0));
    for j in 1..n {
        let w = table.max_semi(j);
        if w < best.1 {
            best = (j, w);
        }
    }
    Ok(finish(table, start, best.0))
}

/// Unordered pairs `(i, j)`, `i < j`, by decreasing `tv(H_i, H_j)`, ties in
/// lexicographic order.
pub fn pair_order<T: Scalar>(hyps: &HypothesisSet<T>) -> Vec<(usize, usize)> {
    let n = hyps.len();
    let l1 = hyps.pairwise_l1();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    pairs.sort_by(|&(a, b), &(c, d)| {
        l1[c * n + d]
            .partial_cmp(&l1[a * n + b])
            .expect("finite distances")
            .then((a, b).cmp(&(c, d)))
    });
    pairs
}

/// Outcome of comparing `H_i` against `H_j` on their Scheffé sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Duel {
    pub winner: usize,
    pub loser: usize,
}

/// The hypothesis with the larger deviation on the shared Scheffé set
/// loses: `H_j` if `w_{i->j} > w_{j->i}`, `H_i` if the reverse, and the
/// higher index on equality. Two charged reads.
pub fn duel<T: Scalar, S: SemiDistances<T> + ?Sized>(table: &S, i: usize, j: usize) -> Duel {
    let wij = table.semi(i, j);
    let wji = table.semi(j, i);
    let loser = if wij > wji {
        j
    } else if wji > wij {
        i
    } else {
        i.max(j)
    };
    Duel {
        winner: i + j - loser,
        loser,
    }
}

fn check_order<T: Scalar>(hyps: &HypothesisSet<T>, order: &[(usize, usize)]) -> Result<()> {
    let n = hyps.len();
    if order.len() != n * (n - 1) / 2 {
        return Err(Error::MalformedOrder(format!(
            "{} pairs for {} hypotheses",
            order.len(),
            n
        )));
    }
    let mut seen = vec![false; n * n];
    for &(i, j) in order {
        if i >= j || j >= n {
            return Err(Error::MalformedOrder(format!("bad pair ({i}, {j})")));
        }
        if std::mem::replace(&mut seen[i * n + j], true) {
            return Err(Error::MalformedOrder(format!("duplicate pair ({i}, {j})")));
        }
    }
    let l1 = hyps.pairwise_l1();
    for w in order.windows(2) {
        let ((a, b), (c, d)) = (w[0], w[1]);
        let (x, y) = (l1[a * n + b], l1[c * n + d]);
        if x < y || (x == y && (a, b) > (c, d)) {
            return Err(Error::MalformedOrder(format!(
                "({a}, {b}) precedes ({c}, {d}) out of order"
            )));
        }
    }
    Ok(())
}

/// Every comparison the MLW loop performs, in order. The survivor is the
/// winner of the last duel (or 0 when `n = 1`).
pub fn mlw_duels<T: Scalar, S: SemiDistances<T> + ?Sized>(
    hyps: &HypothesisSet<T>,
    table: &S,
    order: &[(usize, usize)],
) -> Result<Vec<Duel>> {
    if hyps.len() != table.size() {
        return Err(Error::param("table", "size differs from hypothesis set"));
    }
    check_order(hyps, order)?;
    let n = hyps.len();
    let mut alive = vec![true; n];
    let mut duels = Vec::with_capacity(n.saturating_sub(1));
    for &(i, j) in order {
        if duels.len() + 1 == n {
            break;
        }
        if alive[i] && alive[j] {
            let d = duel(table, i, j);
            alive[d.loser] = false;
            duels.push(d);
        }
    }
    Ok(duels)
}

/// Eliminates along `order` (pairs by decreasing `tv(H_i, H_j)`) until one
/// hypothesis survives.
pub fn select_mlw<T: Scalar, S: SemiDistances<T> + ?Sized>(
    hyps: &HypothesisSet<T>,
    table: &S,
    order: &[(usize, usize)],
) -> Result<SelectorResult> {
    let start = table.queries();
    let duels = mlw_duels(hyps, table, order)?;
    let chosen = duels.last().map_or(0, |d| d.winner);
    Ok(finish(table, start, chosen))
}

/// Per-round sample size and round budget of the quantile algorithm.
fn quantile_sizes(n: usize, delta: f64) -> (usize, usize) {
    let ln_n = (n as f64).ln();
    let rounds_cap = (4.0 * ln_n / delta).ceil() as usize + 1;
    let r = (8.0 * (n as f64 * rounds_cap as f64 / 0.01).ln() / delta).ceil() as usize;
    (r.max(1), rounds_cap)
}

/// Smallest `c` among `values ∪ {0}` with at most `m` values `>= c`.
/// `values` must be sorted descending. If ties at the top make every
/// candidate exceed the budget, the largest value is returned so the
/// caller still removes something.
fn empirical_quantile<T: Scalar>(values: &[T], m: usize) -> T {
    if values.len() <= m {
        return T::zero();
    }
    // count(>= values[m]) > m, so the answer is the smallest value strictly
    // above values[m]
    let pivot = values[m];
    match values[..m].iter().rev().find(|&&v| v > pivot) {
        Some(&v) => v,
        None => values[0],
    }
}

/// Rounds of the quantile algorithm: threshold `t_l` and the active set it
/// was computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRound<T> {
    pub threshold: T,
    pub kicker: usize,
    pub active: Vec<usize>,
}

/// Runs the quantile elimination loop and returns the rounds it made.
pub fn quantile_rounds<T: Scalar, S: SemiDistances<T> + ?Sized, R: Rng + ?Sized>(
    table: &S,
    delta: f64,
    rng: &mut R,
) -> Vec<QuantileRound<T>> {
    let n = table.size();
    let (r, _) = quantile_sizes(n, delta);
    let m = (2.0 * delta * r as f64).ceil() as usize;
    let mut active: Vec<usize> = (0..n).collect();
    let mut rounds = Vec::new();
    let mut values = Vec::with_capacity(r);
    while !active.is_empty() {
        let mut best: Option<(T, usize)> = None;
        for i in 0..n {
            values.clear();
            values.extend((0..r).map(|_| table.semi(i, active[rng.random_range(0..active.len())])));
            values.sort_by(|a, b| b.partial_cmp(a).expect("finite semi-distances"));
            let a = empirical_quantile(&values, m);
            if best.is_none_or(|(t, _)| a > t) {
                best = Some((a, i));
            }
        }
        let (t, kicker) = best.expect("n > 0");
        let next: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&j| table.semi(kicker, j) < t)
            .collect();
        debug_assert!(next.len() < active.len());
        rounds.push(QuantileRound {
            threshold: t,
            kicker,
            active: std::mem::replace(&mut active, next),
        });
    }
    rounds
}

pub(crate) fn check_accuracy(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("{eps} not in (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("{delta} not in (0, 1)")));
    }
    Ok(())
}

/// Quantile selector over any semi-distance oracle.
pub fn quantile_select<T: Scalar, S: SemiDistances<T> + ?Sized>(
    table: &S,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SelectorResult> {
    check_accuracy(eps, delta)?;
    let n = table.size();
    if n == 0 {
        return Err(Error::EmptyHypothesisSet);
    }
    let start = table.queries();
    if n == 1 {
        return Ok(finish(table, start, 0));
    }
    let mut rng = rng_from_seed(seed);
    let rounds = quantile_rounds(table, delta, &mut rng);
    let mut pick = &rounds[0];
    for round in &rounds[1..] {
        if round.threshold < pick.threshold {
            pick = round;
        }
    }
    let chosen = pick.active[rng.random_range(0..pick.active.len())];
    Ok(finish(table, start, chosen))
}

/// Quantile selector on empirical semi-distances from `sample`.
pub fn select_quantile<T: Scalar>(
    hyps: &HypothesisSet<T>,
    sample: &SampleSet,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SelectorResult> {
    let oracle = LazySemiDistances::new(hyps, TableSource::Empirical(sample))?;
    quantile_select(&oracle, eps, delta, seed)
}
