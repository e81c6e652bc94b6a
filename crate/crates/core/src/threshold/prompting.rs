use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::graph::{draw_count, estimate_out_degree, ThresholdGraph};
use crate::dist::SemiDistances;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptingResult {
    /// A hypothesis whose estimated out-degree cleared the bar.
    Prompter(usize),
    /// A survivor none of whose in-neighbors looks prompting.
    Witness(usize),
    Fail,
}

/// Level-set search for a vertex of out-degree `Omega(gamma)` when the
/// average degree is at least `gamma`.
///
/// Round `r = 1..k-1`, `k = ceil(log2(1/gamma)) + 2`, samples up to
/// `T_r = ceil(1e4 log2(1/gamma) ln(100/beta) / (2^r gamma))` vertices of
/// `U` and returns the first whose out-degree estimate (threshold
/// `gamma_r = 2^-r / 100`, failure share `beta / (100 k T_r)`) exceeds
/// `gamma_r`.
///
/// Vertices of out-degree zero always estimate to 0, so runs of them are
/// skipped in one geometric draw; their estimates are still charged.
pub fn find_heavy_prompter<T: Scalar, S: SemiDistances<T> + ?Sized, R: Rng + ?Sized>(
    g: &mut ThresholdGraph<'_, T, S>,
    gamma: f64,
    beta: f64,
    rng: &mut R,
) -> Result<Option<usize>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param("gamma", format!("{gamma} not in (0, 1)")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", format!("{beta} not in (0, 1)")));
    }
    if g.active().is_empty() {
        return Err(Error::param("active", "surviving set is empty"));
    }
    let n = g.full_size();
    let lg = (1.0 / gamma).log2();
    let k = lg.ceil() as u32 + 2;
    let positive: Vec<usize> = (0..n).filter(|&u| g.out_count(u) > 0).collect();
    let zero_frac = 1.0 - positive.len() as f64 / n as f64;
    let skip = (zero_frac > 0.0 && !positive.is_empty())
        .then(|| Geometric::new(1.0 - zero_frac).expect("probability in (0, 1]"));

    for r in 1..k {
        let scale = 2f64.powi(r as i32);
        let t_r = (1e4 * lg * (100.0 / beta).ln() / (scale * gamma)).ceil() as u64;
        let gamma_r = 1.0 / (100.0 * scale);
        let beta_r = beta / (100.0 * k as f64 * t_r as f64);
        let cost = draw_count(beta_r, gamma_r);
        let mut tried = 0u64;
        while tried < t_r {
            let zeros = match (&skip, positive.is_empty()) {
                (_, true) => t_r - tried,
                (Some(geo), false) => geo.sample(rng).min(t_r - tried),
                (None, false) => 0,
            };
            g.table().charge(zeros * cost);
            tried += zeros;
            if tried == t_r {
                break;
            }
            let u = positive[rng.random_range(0..positive.len())];
            tried += 1;
            if estimate_out_degree(g, u, beta_r, gamma_r, rng)? > gamma_r {
                return Ok(Some(u));
            }
        }
    }
    Ok(None)
}

/// Neighborhood-based search for a prompting hypothesis, falling back to a
/// survivor that no prompting hypothesis points at.
///
/// With `beta' = beta / 4` and `t = max(1, ceil(8 ln n))`: sample `t`
/// survivors, scan `U` for each one's in-neighbors, drop those with more
/// than `20 d_hat n` neighbors, and return the first neighbor whose
/// out-degree estimate (failure share `n^-11`, threshold `beta'/(2t)`)
/// reaches `beta'/(2t)`. Otherwise sample `t` fresh survivors, apply the
/// same size filter, and return the first whose neighbors all estimate at
/// most `2 beta'/t`. A second-pass estimate above the bar disqualifies the
/// survivor but is never returned as a prompter.
pub fn find_prompting<T: Scalar, S: SemiDistances<T> + ?Sized, R: Rng + ?Sized>(
    g: &mut ThresholdGraph<'_, T, S>,
    beta: f64,
    d_hat: f64,
    rng: &mut R,
) -> Result<PromptingResult> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", format!("{beta} not in (0, 1)")));
    }
    if g.active().is_empty() {
        return Err(Error::param("active", "surviving set is empty"));
    }
    let n = g.full_size();
    let beta_p = beta / 4.0;
    let t = ((8.0 * (n as f64).ln()).ceil() as usize).max(1);
    let fail_share = (n as f64).powi(-11).min(1.0);
    let limit = 20.0 * d_hat * n as f64;

    let sample_small = |g: &mut ThresholdGraph<'_, T, S>, rng: &mut R| {
        let mut kept = Vec::new();
        for _ in 0..t {
            let v = g.active()[rng.random_range(0..g.active().len())];
            let nei = g.in_neighbors(v);
            if nei.len() as f64 <= limit {
                kept.push((v, nei));
            }
        }
        kept
    };

    let bar = beta_p / (2.0 * t as f64);
    for (_, nei) in sample_small(g, rng) {
        for u in nei {
            if estimate_out_degree(g, u, fail_share, bar, rng)? >= bar {
                return Ok(PromptingResult::Prompter(u));
            }
        }
    }

    let bar = 2.0 * beta_p / t as f64;
    'candidates: for (v, nei) in sample_small(g, rng) {
        for u in nei {
            if estimate_out_degree(g, u, fail_share, bar, rng)? > bar {
                continue 'candidates;
            }
        }
        return Ok(PromptingResult::Witness(v));
    }
    Ok(PromptingResult::Fail)
}
