use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::dist::SemiDistances;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The bipartite threshold graph: `u` ranges over all `n` hypotheses, `v`
/// over the surviving set, and `(u, v)` is an edge iff `w_{u->v} > b`.
///
/// Edge tests through [`ThresholdGraph::edge`] are charged to the oracle.
/// Exact degrees are computed with uncharged peeks and cached until the
/// surviving set changes; they back the binomial shortcut in the
/// estimators and the test oracles.
pub struct ThresholdGraph<'a, T, S: ?Sized> {
    table: &'a S,
    b: T,
    n: usize,
    active: Vec<usize>,
    out_cache: Vec<Option<usize>>,
    edges_cache: Option<usize>,
    literal: bool,
}

impl<'a, T: Scalar, S: SemiDistances<T> + ?Sized> ThresholdGraph<'a, T, S> {
    /// Graph over the full surviving set `0..n`.
    pub fn new(table: &'a S, b: T) -> Self {
        let n = table.size();
        Self::with_active(table, b, (0..n).collect())
    }

    pub fn with_active(table: &'a S, b: T, active: Vec<usize>) -> Self {
        let n = table.size();
        debug_assert!(active.iter().all(|&v| v < n));
        Self {
            table,
            b,
            n,
            active,
            out_cache: vec![None; n],
            edges_cache: None,
            literal: false,
        }
    }

    /// Forces estimators to draw every sample through the oracle instead
    /// of simulating the count from the exact degree. Both are identical in
    /// distribution; this exists for tests and for tiny graphs.
    pub fn set_literal(&mut self, literal: bool) {
        self.literal = literal;
    }

    pub fn table(&self) -> &'a S {
        self.table
    }

    pub fn threshold(&self) -> T {
        self.b
    }

    /// `|U| = n`.
    pub fn full_size(&self) -> usize {
        self.n
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Charged edge test. `(v, v)` is never an edge and is not charged.
    pub fn edge(&self, u: usize, v: usize) -> bool {
        u != v && self.table.semi(u, v) > self.b
    }

    fn peek_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.table.peek(u, v) > self.b
    }

    /// Number of surviving `v` with an edge from `u`, uncharged.
    pub fn out_count(&mut self, u: usize) -> usize {
        if let Some(c) = self.out_cache[u] {
            return c;
        }
        let c = self.active.iter().filter(|&&v| self.peek_edge(u, v)).count();
        self.out_cache[u] = Some(c);
        c
    }

    /// `d_u = |{v in active : (u, v) in E}| / |active|`, uncharged.
    pub fn out_degree(&mut self, u: usize) -> f64 {
        if self.active.is_empty() {
            return 0.0;
        }
        self.out_count(u) as f64 / self.active.len() as f64
    }

    /// `d_v = |{u in U : (u, v) in E}| / n`, uncharged.
    pub fn in_degree(&self, v: usize) -> f64 {
        (0..self.n).filter(|&u| self.peek_edge(u, v)).count() as f64 / self.n as f64
    }

    /// `|E|`, uncharged.
    pub fn edge_count(&mut self) -> usize {
        if let Some(e) = self.edges_cache {
            return e;
        }
        let e = (0..self.n).map(|u| self.out_count(u)).sum();
        self.edges_cache = Some(e);
        e
    }

    /// `|E| / (n |active|)`, uncharged.
    pub fn average_degree(&mut self) -> f64 {
        if self.active.is_empty() {
            return 0.0;
        }
        self.edge_count() as f64 / (self.n as f64 * self.active.len() as f64)
    }

    /// Surviving `v` with an edge from `u`, charging one test per survivor.
    pub fn out_neighbors(&self, u: usize) -> Vec<usize> {
        self.active
            .iter()
            .copied()
            .filter(|&v| self.edge(u, v))
            .collect()
    }

    /// `u in U` with an edge into `v`, charging one test per `u != v`.
    pub fn in_neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.edge(u, v)).collect()
    }

    /// Keeps only the survivors for which `keep` holds.
    pub fn retain(&mut self, mut keep: impl FnMut(usize) -> bool) {
        let before = self.active.len();
        self.active.retain(|&v| keep(v));
        if self.active.len() != before {
            self.out_cache.iter_mut().for_each(|c| *c = None);
            self.edges_cache = None;
        }
    }

    pub(crate) fn literal(&self) -> bool {
        self.literal
    }
}

/// `max(1, ceil(48 ln(1/beta) / gamma))`.
pub fn draw_count(beta: f64, gamma: f64) -> u64 {
    ((48.0 * (1.0 / beta).ln() / gamma).ceil() as u64).max(1)
}

fn check_rates(beta: f64, gamma: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param("beta", format!("{beta} not in (0, 1]")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param("gamma", format!("{gamma} not in (0, 1]")));
    }
    Ok(())
}

fn binomial_hits<R: Rng + ?Sized>(draws: u64, p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return draws;
    }
    Binomial::new(draws, p).expect("valid binomial").sample(rng)
}

/// Fraction of `T = draw_count(beta, gamma)` uniform pairs from
/// `U x active` that are edges.
///
/// When `T` exceeds the number of distinct pairs the count is drawn from
/// `Binomial(T, d)` with `d` the exact average degree, which has the same
/// law as drawing the pairs; the oracle is charged `T` either way.
pub fn estimate_average_degree<T: Scalar, S: SemiDistances<T> + ?Sized, R: Rng + ?Sized>(
    g: &mut ThresholdGraph<'_, T, S>,
    beta: f64,
    gamma: f64,
    rng: &mut R,
) -> Result<f64> {
    check_rates(beta, gamma)?;
    if g.active().is_empty() {
        return Err(Error::param("active", "surviving set is empty"));
    }
    let draws = draw_count(beta, gamma);
    let population = (g.full_size() * g.active().len()) as u64;
    let hits = if g.literal() || draws <= population {
        let (n, m) = (g.full_size(), g.active().len());
        (0..draws)
            .filter(|_| {
                let u = rng.random_range(0..n);
                let v = g.active()[rng.random_range(0..m)];
                if u == v {
                    g.table().charge(1);
                }
                g.edge(u, v)
            })
            .count() as u64
    } else {
        let d = g.average_degree();
        g.table().charge(draws);
        binomial_hits(draws, d, rng)
    };
    Ok(hits as f64 / draws as f64)
}

/// Fraction of `T = draw_count(beta, gamma)` uniform survivors `v` with an
/// edge `(u, v)`. Same sampling shortcut as [`estimate_average_degree`].
pub fn estimate_out_degree<T: Scalar, S: SemiDistances<T> + ?Sized, R: Rng + ?Sized>(
    g: &mut ThresholdGraph<'_, T, S>,
    u: usize,
    beta: f64,
    gamma: f64,
    rng: &mut R,
) -> Result<f64> {
    check_rates(beta, gamma)?;
    if g.active().is_empty() {
        return Err(Error::param("active", "surviving set is empty"));
    }
    if u >= g.full_size() {
        return Err(Error::IndexOutOfRange {
            index: u,
            len: g.full_size(),
        });
    }
    let draws = draw_count(beta, gamma);
    let m = g.active().len();
    let hits = if g.literal() || draws <= m as u64 {
        (0..draws)
            .filter(|_| {
                let v = g.active()[rng.random_range(0..m)];
                if u == v {
                    g.table().charge(1);
                }
                g.edge(u, v)
            })
            .count() as u64
    } else {
        let d = g.out_degree(u);
        g.table().charge(draws);
        binomial_hits(draws, d, rng)
    };
    Ok(hits as f64 / draws as f64)
}
