use super::graph::{estimate_average_degree, ThresholdGraph};
use super::prompting::{find_heavy_prompter, find_prompting, PromptingResult};
use crate::baseline::{check_accuracy, finish, SelectorResult};
use crate::dist::{HypothesisSet, LazySemiDistances, SampleSet, SemiDistances, TableSource};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, split_seed};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdAnswer {
    /// Every hypothesis was pruned by some `w_{u->j} > b`.
    Bot,
    Hypothesis(usize),
}

/// A solver run: the answer plus a certificate `(u, j)` with
/// `w_{u->j} > b` for every pruned `j`, in pruning order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTrace {
    pub answer: ThresholdAnswer,
    pub certificates: Vec<(usize, usize)>,
    pub iterations: usize,
}

/// Iterations in a row without pruning before the solver gives up. Only
/// reachable through repeated low-probability estimator failures.
const STALL_LIMIT: usize = 10_000;

fn prune<T: Scalar, S: SemiDistances<T> + ?Sized>(
    g: &mut ThresholdGraph<'_, T, S>,
    u: usize,
    certificates: &mut Vec<(usize, usize)>,
) {
    let removed = g.out_neighbors(u);
    certificates.extend(removed.iter().map(|&j| (u, j)));
    // out_neighbors is sorted by survivor order, as is the active list
    let mut it = removed.iter().peekable();
    g.retain(|v| {
        if it.peek() == Some(&&v) {
            it.next();
            false
        } else {
            true
        }
    });
}

/// Solves the semi-distance threshold problem at `b` by repeatedly pruning
/// the surviving set with prompting hypotheses.
///
/// Each iteration estimates the average degree (failure share
/// `zeta = n^-4`, threshold `delta`). Below `delta` it runs
/// [`find_prompting`] with `beta = delta`: a prompter prunes, a witness is
/// returned. Otherwise [`find_heavy_prompter`] with `gamma = delta / 2`,
/// `beta = zeta` supplies the pruning vertex. Pruning removes exactly the
/// survivors `j` with `w_{u->j} > b`.
pub fn solve_threshold_traced<T: Scalar, S: SemiDistances<T> + ?Sized>(
    table: &S,
    b: T,
    delta: f64,
    seed: u64,
) -> Result<ThresholdTrace> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("{delta} not in (0, 1)")));
    }
    let n = table.size();
    if n == 0 {
        return Err(Error::EmptyHypothesisSet);
    }
    let zeta = (n as f64).powi(-4).min(0.5);
    let mut rng = rng_from_seed(seed);
    let mut g = ThresholdGraph::new(table, b);
    let mut certificates = Vec::new();
    let mut stalled = 0;
    let mut iterations = 0;
    while !g.active().is_empty() {
        iterations += 1;
        let before = g.active().len();
        let d_hat = estimate_average_degree(&mut g, zeta, delta, &mut rng)?;
        if d_hat < delta {
            match find_prompting(&mut g, delta, d_hat, &mut rng)? {
                PromptingResult::Prompter(u) => prune(&mut g, u, &mut certificates),
                PromptingResult::Witness(v) => {
                    return Ok(ThresholdTrace {
                        answer: ThresholdAnswer::Hypothesis(v),
                        certificates,
                        iterations,
                    })
                }
                PromptingResult::Fail => {}
            }
        } else if let Some(u) = find_heavy_prompter(&mut g, delta / 2.0, zeta, &mut rng)? {
            prune(&mut g, u, &mut certificates);
        }
        if g.active().len() == before {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                return Err(Error::NoProgress(iterations));
            }
        } else {
            stalled = 0;
        }
    }
    Ok(ThresholdTrace {
        answer: ThresholdAnswer::Bot,
        certificates,
        iterations,
    })
}

pub fn solve_threshold<T: Scalar, S: SemiDistances<T> + ?Sized>(
    table: &S,
    b: T,
    delta: f64,
    seed: u64,
) -> Result<ThresholdAnswer> {
    solve_threshold_traced(table, b, delta, seed).map(|t| t.answer)
}

/// One threshold-solver call made by the binary search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub b: f64,
    pub answer: ThresholdAnswer,
    /// Search interval `[k, l]` after this probe was applied.
    pub low: f64,
    pub high: f64,
}

/// Binary search over `b` with `eps' = eps/3` and per-call failure share
/// `delta' = delta / (2 ceil(log2(1/eps')) + 2)`. Returns the chosen index
/// and every probe made.
pub fn fast_probes<T: Scalar, S: SemiDistances<T> + ?Sized>(
    table: &S,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<(usize, Vec<Probe>)> {
    check_accuracy(eps, delta)?;
    let n = table.size();
    if n == 0 {
        return Err(Error::EmptyHypothesisSet);
    }
    if n == 1 {
        return Ok((0, Vec::new()));
    }
    let eps_p = eps / 3.0;
    let delta_p = delta / (2.0 * (1.0 / eps_p).log2().ceil() + 2.0);
    let mut probes: Vec<Probe> = Vec::new();
    let solve = |b: f64, index: usize| {
        solve_threshold(table, T::of(b), delta_p, split_seed(seed, index as u64))
    };

    let answer = solve(0.0, 0)?;
    probes.push(Probe { b: 0.0, answer, low: 0.0, high: 1.0 });
    if let ThresholdAnswer::Hypothesis(j) = answer {
        return Ok((j, probes));
    }
    let answer = solve(1.0, 1)?;
    probes.push(Probe { b: 1.0, answer, low: 0.0, high: 1.0 });
    let mut best = match answer {
        ThresholdAnswer::Hypothesis(j) => j,
        // no semi-distance exceeds 1, so nothing can be pruned at b = 1
        ThresholdAnswer::Bot => unreachable!("threshold 1 admits no edges"),
    };
    let (mut low, mut high) = (0.0f64, 1.0f64);
    while high - low > eps_p {
        let mid = 0.5 * (low + high);
        let answer = solve(mid, probes.len())?;
        match answer {
            ThresholdAnswer::Bot => low = mid,
            ThresholdAnswer::Hypothesis(j) => {
                high = mid;
                best = j;
            }
        }
        probes.push(Probe { b: mid, answer, low, high });
    }
    Ok((best, probes))
}

/// Binary-search selector over any semi-distance oracle.
pub fn fast_select<T: Scalar, S: SemiDistances<T> + ?Sized>(
    table: &S,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SelectorResult> {
    let start = table.queries();
    let (chosen, _) = fast_probes(table, eps, delta, seed)?;
    Ok(finish(table, start, chosen))
}

/// Binary-search selector on empirical semi-distances from `sample`.
pub fn select_fast<T: Scalar>(
    hyps: &HypothesisSet<T>,
    sample: &SampleSet,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SelectorResult> {
    let oracle = LazySemiDistances::new(hyps, TableSource::Empirical(sample))?;
    fast_select(&oracle, eps, delta, seed)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::table_from_edges;
    use super::*;
    use crate::dist::{SemiDistanceTable, TableMode};
    use crate::rng::mix64;

    #[test]
    fn threshold_one_returns_hypothesis() {
        let t = table_from_edges(15, |_, _| true);
        assert!(matches!(
            solve_threshold(&t, 1.0, 0.1, 3).unwrap(),
            ThresholdAnswer::Hypothesis(_)
        ));
    }

    #[test]
    fn threshold_zero_on_positive_table_is_bot() {
        let n = 12;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    v[i * n + j] = 0.01 + (mix64((i * n + j) as u64) % 100) as f64 / 200.0;
                }
            }
        }
        let t = SemiDistanceTable::from_values(n, v, TableMode::Exact).unwrap();
        for s in 0..20 {
            let tr = solve_threshold_traced(&t, 0.0, 0.1, s).unwrap();
            assert_eq!(tr.answer, ThresholdAnswer::Bot);
            let mut pruned: Vec<usize> = tr.certificates.iter().map(|&(_, j)| j).collect();
            pruned.sort_unstable();
            assert_eq!(pruned, (0..n).collect::<Vec<_>>());
            assert!(tr.certificates.iter().all(|&(u, j)| t.get(u, j) > 0.0));
        }
    }

    #[test]
    fn boundary_ties_are_not_pruned() {
        // every off-diagonal value equals b: no edges, so a hypothesis comes back
        let n = 6;
        let v: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { 0.3 }).collect();
        let t = SemiDistanceTable::from_values(n, v, TableMode::Exact).unwrap();
        let tr = solve_threshold_traced(&t, 0.3, 0.1, 0).unwrap();
        assert!(matches!(tr.answer, ThresholdAnswer::Hypothesis(_)));
        assert!(tr.certificates.is_empty());
    }

    #[test]
    fn fast_single_hypothesis() {
        let t = SemiDistanceTable::from_values(1, vec![0.0], TableMode::Exact).unwrap();
        assert_eq!(fast_select(&t, 0.1, 0.1, 0).unwrap().chosen, 0);
    }

    #[test]
    fn binary_search_discipline() {
        let n = 20;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    v[i * n + j] = (mix64((i * n + j) as u64 + 99) % 1000) as f64 / 1000.0;
                }
            }
        }
        let t = SemiDistanceTable::from_values(n, v, TableMode::Exact).unwrap();
        for eps in [0.3, 0.1, 0.05] {
            let (_, probes) = fast_probes(&t, eps, 0.1, 5).unwrap();
            let cap = (3.0f64 / eps).log2().ceil() as usize + 2;
            assert!(probes.len() <= cap, "{} > {cap}", probes.len());
            assert_eq!(probes[0].answer, ThresholdAnswer::Bot);
            for p in &probes[2..] {
                let ok = match p.answer {
                    ThresholdAnswer::Bot => p.low == p.b,
                    ThresholdAnswer::Hypothesis(_) => p.high == p.b,
                };
                assert!(ok);
            }
        }
    }
}
