//! Selection when the value `OPT` is known: shrink a survivor set by
//! pivots whose sampled rejection fraction is small.

use rand::Rng;

use crate::baseline::{check_accuracy, finish, SelectorResult};
use crate::dist::{HypothesisSet, LazySemiDistances, SampleSet, SemiDistances, TableSource};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

/// Fraction of `probe` with `w_{i->j} > threshold`.
pub fn lambda_fraction<T: Scalar, S: SemiDistances<T> + ?Sized>(
    table: &S,
    j: usize,
    probe: &[usize],
    threshold: T,
) -> Result<f64> {
    if probe.is_empty() {
        return Err(Error::param("probe", "empty probe multiset"));
    }
    if probe.contains(&j) {
        return Err(Error::param("probe", format!("probe contains the pivot {j}")));
    }
    let above = probe.iter().filter(|&&i| table.semi(i, j) > threshold).count();
    Ok(above as f64 / probe.len() as f64)
}

/// How the run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnownOptExit {
    /// The last pivot had no `w_{i->j}` above the threshold.
    Emptied,
    /// No survivor qualified as pivot; the second-to-last pivot is returned.
    Halted,
    /// The round cap `ceil(log2 n) + 1` was reached, handled like a halt.
    Capped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownOptTrace {
    pub chosen: usize,
    pub exit: KnownOptExit,
    pub pivots: Vec<usize>,
    /// `|S_k|` for each constructed set, starting with `|S_0| = n`.
    pub set_sizes: Vec<usize>,
}

/// `ceil(48 * 2^k * ln(n / delta0))`.
fn probe_size(k: u32, n: usize, delta0: f64) -> usize {
    ((48.0 * 2f64.powi(k as i32) * (n as f64 / delta0).ln()).ceil() as usize).max(1)
}

/// Runs the pivot loop with threshold `opt + eps/2` and `delta0 = delta/3`.
///
/// Round `k` scans `S_{k-1}` in ascending order, drawing for each `j` a
/// multiset of `s_k` indices from `[n] \ {j}`, and accepts the first `j`
/// with rejection fraction at most `2^-(k+1)`. Then
/// `S_k = {i != j : w_{i->j} > threshold}`.
pub fn known_opt_trace<T: Scalar, S: SemiDistances<T> + ?Sized>(
    table: &S,
    opt: T,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<KnownOptTrace> {
    check_accuracy(eps, delta)?;
    if !(opt >= T::zero() && opt <= T::one()) {
        return Err(Error::param("opt", format!("{opt} not in [0, 1]")));
    }
    let n = table.size();
    if n == 0 {
        return Err(Error::EmptyHypothesisSet);
    }
    if n == 1 {
        return Ok(KnownOptTrace {
            chosen: 0,
            exit: KnownOptExit::Emptied,
            pivots: vec![0],
            set_sizes: vec![1],
        });
    }
    let threshold = opt + T::of(eps / 2.0);
    let delta0 = delta / 3.0;
    let cap = (n as f64).log2().ceil() as u32 + 1;
    let mut rng = rng_from_seed(seed);
    let mut survivors: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    let mut set_sizes = vec![n];
    let mut probe = Vec::new();

    for k in 1..=cap {
        let s_k = probe_size(k, n, delta0);
        let bar = 0.5f64.powi(k as i32 + 1);
        let mut pivot = None;
        for &j in &survivors {
            probe.clear();
            probe.extend((0..s_k).map(|_| {
                // uniform over [n] \ {j}
                let i = rng.random_range(0..n - 1);
                if i >= j {
                    i + 1
                } else {
                    i
                }
            }));
            if lambda_fraction(table, j, &probe, threshold)? <= bar {
                pivot = Some(j);
                break;
            }
        }
        let Some(j) = pivot else {
            return match pivots.last() {
                Some(&last) => Ok(KnownOptTrace {
                    chosen: last,
                    exit: KnownOptExit::Halted,
                    pivots,
                    set_sizes,
                }),
                None => Err(Error::OptInfeasible { opt: opt.as_f64() }),
            };
        };
        pivots.push(j);
        survivors = (0..n)
            .filter(|&i| i != j && table.semi(i, j) > threshold)
            .collect();
        set_sizes.push(survivors.len());
        if survivors.is_empty() {
            return Ok(KnownOptTrace {
                chosen: j,
                exit: KnownOptExit::Emptied,
                pivots,
                set_sizes,
            });
        }
    }
    // The cap counts as a halt while building S_{cap+1}.
    let chosen = pivots[pivots.len() - 1];
    Ok(KnownOptTrace {
        chosen,
        exit: KnownOptExit::Capped,
        pivots,
        set_sizes,
    })
}

pub fn known_opt_select<T: Scalar, S: SemiDistances<T> + ?Sized>(
    table: &S,
    opt: T,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SelectorResult> {
    let start = table.queries();
    let trace = known_opt_trace(table, opt, eps, delta, seed)?;
    Ok(finish(table, start, trace.chosen))
}

/// Known-OPT selector on empirical semi-distances from `sample`.
pub fn select_known_opt<T: Scalar>(
    hyps: &HypothesisSet<T>,
    sample: &SampleSet,
    opt: T,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SelectorResult> {
    let oracle = LazySemiDistances::new(hyps, TableSource::Empirical(sample))?;
    known_opt_select(&oracle, opt, eps, delta, seed)
}
