//! Tournament selection driven by a diameter structure over the
//! hypotheses as points in `l1`, built before any sample is seen.

use std::time::{Duration, Instant};

use crate::baseline::{duel, finish, Duel, SelectorResult};
use crate::dist::{HypothesisSet, SemiDistances};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Farthest-pair queries under deletions. `query` returns a surviving pair
/// `(i, j)`, `i < j`, whose `l1` distance is at least `(1 - alpha)` times
/// the largest surviving distance.
pub trait DiameterStructure {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn alive(&self, i: usize) -> bool;

    fn alive_count(&self) -> usize;

    fn alpha(&self) -> f64;

    fn query(&mut self) -> Result<(usize, usize, f64)>;

    fn delete(&mut self, i: usize);
}

fn check_points(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param("n", format!("diameter structure needs at least 2 points, got {n}")));
    }
    Ok(())
}

/// Sorted pair list with a cursor: the exact diameter, ties broken by
/// lexicographic pair order.
#[derive(Debug, Clone)]
pub struct ExactDiameter {
    pairs: Vec<(usize, usize, f64)>,
    cursor: usize,
    alive: Vec<bool>,
    count: usize,
}

impl ExactDiameter {
    pub fn new<T: Scalar>(hyps: &HypothesisSet<T>) -> Result<Self> {
        check_points(hyps.len())?;
        let n = hyps.len();
        let l1 = hyps.pairwise_l1();
        let mut pairs: Vec<(usize, usize, f64)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, l1[i * n + j].as_f64()))
            .collect();
        pairs.sort_by(|a, b| b.2.partial_cmp(&a.2).expect("finite").then((a.0, a.1).cmp(&(b.0, b.1))));
        Ok(Self {
            pairs,
            cursor: 0,
            alive: vec![true; n],
            count: n,
        })
    }
}

impl DiameterStructure for ExactDiameter {
    fn len(&self) -> usize {
        self.alive.len()
    }

    fn alive(&self, i: usize) -> bool {
        self.alive[i]
    }

    fn alive_count(&self) -> usize {
        self.count
    }

    fn alpha(&self) -> f64 {
        0.0
    }

    fn query(&mut self) -> Result<(usize, usize, f64)> {
        if self.count < 2 {
            return Err(Error::DiameterExhausted);
        }
        while let Some(&(i, j, d)) = self.pairs.get(self.cursor) {
            if self.alive[i] && self.alive[j] {
                return Ok((i, j, d));
            }
            self.cursor += 1;
        }
        Err(Error::DiameterExhausted)
    }

    fn delete(&mut self, i: usize) {
        if std::mem::replace(&mut self.alive[i], false) {
            self.count -= 1;
        }
    }
}

/// Pairs grouped into geometric distance bands `(h_{b+1}, h_b]` with
/// `h_0` the initial diameter and `h_{b+1} = (1 - alpha) h_b`, plus a final
/// band for zero distances. A query returns the first surviving pair of
/// the first nonempty band, which is within `(1 - alpha)` of the surviving
/// diameter because that diameter lies in the same or a later band.
/// Within a band pairs are kept in lexicographic order.
#[derive(Debug, Clone)]
pub struct BucketedDiameter {
    alpha: f64,
    bands: Vec<Vec<(usize, usize, f64)>>,
    cursors: Vec<usize>,
    first: usize,
    alive: Vec<bool>,
    count: usize,
}

impl BucketedDiameter {
    pub fn new<T: Scalar>(hyps: &HypothesisSet<T>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param("alpha", format!("{alpha} not in (0, 1)")));
        }
        check_points(hyps.len())?;
        let n = hyps.len();
        let l1 = hyps.pairwise_l1();
        let dist = |i: usize, j: usize| l1[i * n + j].as_f64();
        let mut top = 0.0f64;
        let mut floor = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist(i, j);
                top = top.max(d);
                if d > 0.0 {
                    floor = floor.min(d);
                }
            }
        }
        // band upper edges h_0 > h_1 > ... until below the smallest positive distance
        let mut edges = Vec::new();
        if top > 0.0 {
            let mut h = top;
            while h >= floor {
                edges.push(h);
                h *= 1.0 - alpha;
            }
        }
        let zero_band = edges.len();
        let mut bands = vec![Vec::new(); zero_band + 1];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist(i, j);
                // last band whose upper edge is >= d; edges is decreasing
                let band = if d > 0.0 {
                    edges.partition_point(|&h| h >= d) - 1
                } else {
                    zero_band
                };
                bands[band].push((i, j, d));
            }
        }
        Ok(Self {
            alpha,
            cursors: vec![0; bands.len()],
            bands,
            first: 0,
            alive: vec![true; n],
            count: n,
        })
    }
}

impl DiameterStructure for BucketedDiameter {
    fn len(&self) -> usize {
        self.alive.len()
    }

    fn alive(&self, i: usize) -> bool {
        self.alive[i]
    }

    fn alive_count(&self) -> usize {
        self.count
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn query(&mut self) -> Result<(usize, usize, f64)> {
        if self.count < 2 {
            return Err(Error::DiameterExhausted);
        }
        while self.first < self.bands.len() {
            let band = &self.bands[self.first];
            let cursor = &mut self.cursors[self.first];
            while let Some(&(i, j, d)) = band.get(*cursor) {
                if self.alive[i] && self.alive[j] {
                    return Ok((i, j, d));
                }
                *cursor += 1;
            }
            self.first += 1;
        }
        Err(Error::DiameterExhausted)
    }

    fn delete(&mut self, i: usize) {
        if std::mem::replace(&mut self.alive[i], false) {
            self.count -= 1;
        }
    }
}

/// Wraps a structure and checks every answer against a brute-force scan of
/// the surviving pairs.
pub struct AuditedDiameter<D> {
    inner: D,
    l1: Vec<f64>,
    worst_ratio: f64,
    violations: usize,
    queries: usize,
}

impl<D: DiameterStructure> AuditedDiameter<D> {
    pub fn new<T: Scalar>(inner: D, hyps: &HypothesisSet<T>) -> Self {
        Self {
            inner,
            l1: hyps.pairwise_l1().into_iter().map(Scalar::as_f64).collect(),
            worst_ratio: 1.0,
            violations: 0,
            queries: 0,
        }
    }

    /// Smallest `returned / true diameter` seen (1 when the diameter is 0).
    pub fn worst_ratio(&self) -> f64 {
        self.worst_ratio
    }

    pub fn violations(&self) -> usize {
        self.violations
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    fn true_diameter(&self) -> f64 {
        let n = self.inner.len();
        let mut best = 0.0f64;
        for i in (0..n).filter(|&i| self.inner.alive(i)) {
            for j in ((i + 1)..n).filter(|&j| self.inner.alive(j)) {
                best = best.max(self.l1[i * n + j]);
            }
        }
        best
    }
}

impl<D: DiameterStructure> DiameterStructure for AuditedDiameter<D> {
    fn len(&self) -> usize {
        self.inner.len()
    }

    fn alive(&self, i: usize) -> bool {
        self.inner.alive(i)
    }

    fn alive_count(&self) -> usize {
        self.inner.alive_count()
    }

    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn query(&mut self) -> Result<(usize, usize, f64)> {
        let answer = self.inner.query()?;
        let truth = self.true_diameter();
        self.queries += 1;
        if truth > 0.0 {
            let ratio = answer.2 / truth;
            self.worst_ratio = self.worst_ratio.min(ratio);
            if answer.2 < (1.0 - self.inner.alpha()) * truth {
                self.violations += 1;
            }
        }
        if !(self.inner.alive(answer.0) && self.inner.alive(answer.1)) || answer.0 >= answer.1 {
            self.violations += 1;
        }
        Ok(answer)
    }

    fn delete(&mut self, i: usize) {
        self.inner.delete(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiameterBackend {
    Exact,
    Approx(f64),
}

impl std::str::FromStr for DiameterBackend {
    type Err = Error;

    /// `exact` or `approx:ALPHA`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(DiameterBackend::Exact);
        }
        let alpha = s
            .strip_prefix("approx:")
            .and_then(|a| a.parse::<f64>().ok())
            .ok_or_else(|| Error::Parse(format!("diameter backend `{s}`")))?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param("alpha", format!("{alpha} not in (0, 1)")));
        }
        Ok(DiameterBackend::Approx(alpha))
    }
}

impl std::fmt::Display for DiameterBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiameterBackend::Exact => write!(f, "exact"),
            DiameterBackend::Approx(a) => write!(f, "approx:{a}"),
        }
    }
}

pub struct Preprocessed {
    pub structure: Box<dyn DiameterStructure + Send>,
    pub elapsed: Duration,
}

/// Builds the chosen structure from the hypotheses alone.
pub fn preprocess<T: Scalar>(hyps: &HypothesisSet<T>, backend: DiameterBackend) -> Result<Preprocessed> {
    let start = Instant::now();
    let structure: Box<dyn DiameterStructure + Send> = match backend {
        DiameterBackend::Exact => Box::new(ExactDiameter::new(hyps)?),
        DiameterBackend::Approx(alpha) => Box::new(BucketedDiameter::new(hyps, alpha)?),
    };
    Ok(Preprocessed {
        structure,
        elapsed: start.elapsed(),
    })
}

/// Revealed pair and comparison outcome for each round of the tournament.
pub fn tournament_duels<T: Scalar, S: SemiDistances<T> + ?Sized, D: DiameterStructure + ?Sized>(
    table: &S,
    diam: &mut D,
) -> Result<Vec<((usize, usize), Duel)>> {
    if table.size() != diam.len() {
        return Err(Error::param("diam", "built over a different hypothesis count"));
    }
    let mut rounds = Vec::new();
    while diam.alive_count() > 1 {
        let (i, j, _) = diam.query()?;
        let d = duel(table, i, j);
        diam.delete(d.loser);
        rounds.push(((i, j), d));
    }
    Ok(rounds)
}

/// Repeatedly compares the revealed farthest pair and deletes the loser.
pub fn select_tournament<T: Scalar, S: SemiDistances<T> + ?Sized, D: DiameterStructure + ?Sized>(
    table: &S,
    diam: &mut D,
) -> Result<SelectorResult> {
    let start = table.queries();
    let n = diam.len();
    let rounds = tournament_duels(table, diam)?;
    let chosen = match rounds.last() {
        Some((_, d)) => d.winner,
        None => (0..n).find(|&i| diam.alive(i)).unwrap_or(0),
    };
    Ok(finish(table, start, chosen))
}
