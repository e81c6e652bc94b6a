//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any fails.

use std::time::Instant;

use hsel_core::baseline::{pair_order, select_min_w, select_mlw};
use hsel_core::dist::{build_table, sample_size, DiscreteDistribution, HypothesisSet, SampleSet, TableMode, TableSource};
use hsel_core::dist::SemiDistanceTable;
use hsel_core::expected::{closed_form_weights, expected_select, factor_bound, round_weights, select_expected};
use hsel_core::harness::{per_doubling_factors, run_trials, summarize, Algorithm, ExperimentConfig, Family, OptMode};
use hsel_core::instances::{collision_probability, gen_hard_expected, gen_planted};
use hsel_core::preprocess::{select_tournament, AuditedDiameter, BucketedDiameter, DiameterBackend, ExactDiameter};
use hsel_core::rng::{rng_from_seed, split_seed};
use hsel_core::threshold::{estimate_average_degree, estimate_out_degree, fast_probes, ThresholdAnswer, ThresholdGraph};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn opt_of(hyps: &HypothesisSet<f64>, p: &DiscreteDistribution<f64>) -> (f64, Vec<f64>) {
    let tvs: Vec<f64> = hyps.hypotheses().iter().map(|h| tv(p.probs(), h.probs())).collect();
    (tvs.iter().cloned().fold(f64::INFINITY, f64::min), tvs)
}

fn random_w<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.01..1.0)).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_form_vs_dense_solve() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(1);
    let (mut worst_spread, mut worst_diff) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(2..=64);
        let w = random_w(&mut rng, n);
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 + w[j] / w[i] });
        let x = a.clone().lu().solve(&DVector::from_element(n, 1.0)).ok_or("singular system")?;
        let x = &x / x.sum();
        let p = closed_form_weights(&w).map_err(|e| e.to_string())?;
        let ap = &a * DVector::from_vec(p.clone());
        worst_spread = worst_spread.max(ap.max() - ap.min());
        for i in 0..n {
            worst_diff = worst_diff.max((p[i] - x[i]).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_spread < 1e-9 && worst_diff < 1e-9 && secs < 5.0,
        format!("residual spread {worst_spread:.2e}, max |p - solve| {worst_diff:.2e}, {secs:.2}s"),
    )
}

fn rounding_bound() -> Outcome {
    let mut rng = rng_from_seed(2);
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..500 {
        let n = rng.random_range(1..=40);
        let mut w = random_w(&mut rng, n);
        if rng.random_bool(0.3) {
            // a few very large values force a proper good-index cut
            for x in w.iter_mut().take(n / 3) {
                *x *= 50.0;
            }
        }
        let q = round_weights(&w).map_err(|e| e.to_string())?;
        let sum: f64 = q.iter().sum();
        if q.iter().any(|&x| x < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return Err(format!("invalid distribution {q:?}"));
        }
        for i_star in 0..n {
            let excess = factor_bound(&q, &w, i_star) - (3.0 - 2.0 / n as f64);
            worst_excess = worst_excess.max(excess);
        }
    }
    let q = round_weights(&[4.0f64, 1.0, 1.0, 1.0]).map_err(|e| e.to_string())?;
    let third = 1.0f64 / 3.0;
    let example = q[0] == 0.0 && q[1..].iter().all(|&x| (x - third).abs() < 1e-12);
    check(
        worst_excess <= 1e-9 && example,
        format!("max factor_bound - (3 - 2/n) = {worst_excess:.2e}; W=(4,1,1,1) -> {q:?}"),
    )
}

fn hard_instance_geometry() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [2, 4, 8] {
        for k in [3, 10] {
            for ell in [3, 5] {
                let (inst, mut sampler) = gen_hard_expected::<f64>(n, k, ell, split_seed(3, (n * 100 + k * 10 + ell) as u64))
                    .map_err(|e| e.to_string())?;
                let d = (2 * n * k * ell) as f64;
                let beta = 1.0 / (ell as f64 - 1.0);
                let (near, far) = (k as f64 * (1.0 + beta) / d, k as f64 * (3.0 + beta) / d);
                for _ in 0..20 {
                    let t = sampler.sample_any::<f64>().map_err(|e| e.to_string())?;
                    for j in 0..n {
                        let got = tv(t.distribution.probs(), inst.hypotheses.get(j).probs());
                        let want = if j == t.index { near } else { far };
                        worst = worst.max((got - want).abs());
                        if j != t.index {
                            let near_got = tv(t.distribution.probs(), inst.hypotheses.get(t.index).probs());
                            worst = worst.max((got / near_got - (3.0 + beta) / (1.0 + beta)).abs());
                        }
                    }
                    cases += 1;
                }
            }
        }
    }
    check(worst <= 1e-12, format!("{cases} sampled truths, max deviation {worst:.2e}"))
}

fn collision_bound() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [2, 4] {
        for k in [10, 50] {
            for ell in [3, 5] {
                let (inst, _) = gen_hard_expected::<f64>(n, k, ell, 4).map_err(|e| e.to_string())?;
                let d = (2 * n * k * ell) as f64;
                let s_max = ((d / ell as f64).sqrt() / 3.0).floor() as usize;
                for s in [2.min(s_max), s_max] {
                    if s == 0 {
                        continue;
                    }
                    let (p, se) = collision_probability(&inst, s, 100_000, split_seed(4, s as u64)).map_err(|e| e.to_string())?;
                    let bound = (s * s) as f64 * ell as f64 / d;
                    if p > bound + 3.0 * se {
                        ok = false;
                        lines.push(format!("n={n} k={k} l={ell} s={s}: {p:.4} > {bound:.4}"));
                    }
                }
            }
        }
    }
    check(ok, if ok { "16 grid points within s^2 l / d + 3 stderr".into() } else { lines.join("; ") })
}

fn minw_exact_three_approx() -> Outcome {
    let mut rng = rng_from_seed(5);
    let mut worst = 0.0f64;
    for t in 0..500 {
        let n = rng.random_range(2..=30);
        let d = rng.random_range(2..=60);
        let target = rng.random_range(0.0..0.5);
        let inst = match gen_planted::<f64>(n, d, target, split_seed(5, t)) {
            Ok(i) => i,
            Err(_) => gen_planted::<f64>(n, d, 0.0, split_seed(5, t)).map_err(|e| e.to_string())?,
        };
        let table = build_table(TableSource::Exact(&inst.truth), &inst.hypotheses).map_err(|e| e.to_string())?;
        let chosen = select_min_w(&table).map_err(|e| e.to_string())?.chosen;
        let (opt, tvs) = opt_of(&inst.hypotheses, &inst.truth);
        worst = worst.max(tvs[chosen] - 3.0 * opt);
    }
    check(worst <= 1e-12, format!("500 instances, max tv - 3 OPT = {worst:.2e}"))
}

fn empirical_envelope() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        family: Family::Planted {
            n: 50,
            d: 400,
            target_opt: 0.1,
        },
        algorithms: vec![
            Algorithm::MinW,
            Algorithm::Mlw,
            Algorithm::Quantile,
            Algorithm::Fast,
            Algorithm::KnownOpt,
            Algorithm::Tournament,
        ],
        eps: 0.1,
        delta: 0.1,
        trials: 200,
        master_seed: 6,
        output: None,
        diam: DiameterBackend::Exact,
        opt: OptMode::Auto,
        timing: false,
    };
    let summary = summarize(&run_trials(&cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let ok = summary.algorithms.iter().all(|a| a.failure_fraction <= 2.0 * cfg.delta) && secs < 300.0;
    let detail = summary
        .algorithms
        .iter()
        .map(|a| format!("{} {:.3}", a.algo, a.failure_fraction))
        .collect::<Vec<_>>()
        .join(", ");
    check(ok, format!("failure fractions: {detail}; {secs:.1}s"))
}

fn expected_value_bound() -> Outcome {
    let n = 4;
    let c = 3.0 - 2.0 / n as f64;
    let mut worst = f64::NEG_INFINITY;
    for (k, ell) in [(3, 3), (5, 5), (10, 3)] {
        let (inst, mut sampler) = gen_hard_expected::<f64>(n, k, ell, 7).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let t = sampler.sample_any::<f64>().map_err(|e| e.to_string())?;
            let table = build_table(TableSource::Exact(&t.distribution), &inst.hypotheses).map_err(|e| e.to_string())?;
            let mix = expected_select(&table, 0.0).map_err(|e| e.to_string())?;
            let (opt, tvs) = opt_of(&inst.hypotheses, &t.distribution);
            worst = worst.max(mix.expectation(&tvs) - c * opt);
        }
    }
    let (eps, delta) = (0.1, 0.1);
    let (inst, mut sampler) = gen_hard_expected::<f64>(n, 5, 5, 77).map_err(|e| e.to_string())?;
    let s = sample_size(n, eps, delta);
    let mut held = 0;
    for trial in 0..200u64 {
        let t = sampler.sample_any::<f64>().map_err(|e| e.to_string())?;
        let sample = SampleSet::draw(&t.distribution, s, split_seed(77, trial)).map_err(|e| e.to_string())?;
        let mix = select_expected(&inst.hypotheses, &sample, eps).map_err(|e| e.to_string())?;
        let (opt, tvs) = opt_of(&inst.hypotheses, &t.distribution);
        if mix.expectation(&tvs) <= c * opt + 3.0 * eps {
            held += 1;
        }
    }
    check(
        worst <= 1e-9 && held >= 190,
        format!("exact: max E[tv] - (3-2/n) OPT = {worst:.2e}; empirical: bound held in {held}/200"),
    )
}

fn scaling_signal() -> Outcome {
    let mut fast = Vec::new();
    let mut minw = Vec::new();
    for n in [25, 50, 100] {
        let cfg = ExperimentConfig {
            family: Family::Planted {
                n,
                d: 400,
                target_opt: 0.1,
            },
            algorithms: vec![Algorithm::Fast, Algorithm::MinW],
            eps: 0.1,
            delta: 0.1,
            trials: 50,
            master_seed: 8,
            output: None,
            diam: DiameterBackend::Exact,
            opt: OptMode::Auto,
            timing: false,
        };
        let summary = summarize(&run_trials(&cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let mean = |name: &str| summary.algorithms.iter().find(|a| a.algo == name).map(|a| a.mean_oracle_queries).unwrap_or(0.0);
        fast.push((n, mean("fast")));
        minw.push((n, mean("minw")));
    }
    let ff = per_doubling_factors(&fast);
    let fm = per_doubling_factors(&minw);
    let ok = ff.iter().all(|&f| (1.2..=3.5).contains(&f)) && fm.iter().all(|&f| f >= 3.5);
    check(
        ok,
        format!(
            "fast mean queries {:?} -> per-doubling {:.2?}; minw {:?} -> {:.2?}",
            fast.iter().map(|p| p.1.round()).collect::<Vec<_>>(),
            ff,
            minw.iter().map(|p| p.1).collect::<Vec<_>>(),
            fm
        ),
    )
}

fn binary_search_discipline() -> Outcome {
    let mut worst_calls = 0;
    let mut limit_ok = true;
    let mut invariant_ok = true;
    for (t, eps) in [0.05, 0.1, 0.2, 0.3].into_iter().enumerate().flat_map(|(i, e)| (0..25).map(move |t| (i * 100 + t, e))) {
        let inst = gen_planted::<f64>(20, 100, 0.1, split_seed(9, t as u64)).map_err(|e| e.to_string())?;
        let sample = SampleSet::draw(&inst.truth, sample_size(20, eps, 0.1), split_seed(90, t as u64)).map_err(|e| e.to_string())?;
        let table = build_table(TableSource::Empirical(&sample), &inst.hypotheses).map_err(|e| e.to_string())?;
        let (_, probes) = fast_probes(&table, eps, 0.1, t as u64).map_err(|e| e.to_string())?;
        let cap = (3.0 / eps).log2().ceil() as usize + 2;
        limit_ok &= probes.len() <= cap;
        worst_calls = worst_calls.max(probes.len());
        let answer_at = |b: f64| probes.iter().find(|p| p.b == b).map(|p| p.answer);
        if let Some(ThresholdAnswer::Hypothesis(_)) = probes.first().map(|p| p.answer) {
            continue;
        }
        for p in &probes[2..] {
            invariant_ok &= matches!(answer_at(p.low), Some(ThresholdAnswer::Bot));
            invariant_ok &= matches!(answer_at(p.high), Some(ThresholdAnswer::Hypothesis(_)));
            invariant_ok &= p.low < p.high;
        }
    }
    check(
        limit_ok && invariant_ok,
        format!("most calls in one search {worst_calls}; endpoint invariant held: {invariant_ok}"),
    )
}

fn tournament_equivalence() -> Outcome {
    let mut agree = 0;
    for t in 0..200u64 {
        let inst = gen_planted::<f64>(15, 50, 0.1, split_seed(10, t)).map_err(|e| e.to_string())?;
        let sample = SampleSet::draw(&inst.truth, 2000, split_seed(100, t)).map_err(|e| e.to_string())?;
        let table = build_table(TableSource::Empirical(&sample), &inst.hypotheses).map_err(|e| e.to_string())?;
        let mlw = select_mlw(&inst.hypotheses, &table, &pair_order(&inst.hypotheses)).map_err(|e| e.to_string())?;
        let mut diam = ExactDiameter::new(&inst.hypotheses).map_err(|e| e.to_string())?;
        let tour = select_tournament(&table, &mut diam).map_err(|e| e.to_string())?;
        agree += (mlw.chosen == tour.chosen) as usize;
    }
    let (mut queries, mut violations, mut worst) = (0, 0, 1.0f64);
    for t in 0..500u64 {
        let inst = gen_planted::<f64>(12, 30, 0.1, split_seed(11, t)).map_err(|e| e.to_string())?;
        let table = build_table(TableSource::Exact(&inst.truth), &inst.hypotheses).map_err(|e| e.to_string())?;
        let inner = BucketedDiameter::new(&inst.hypotheses, 0.1).map_err(|e| e.to_string())?;
        let mut audited = AuditedDiameter::new(inner, &inst.hypotheses);
        select_tournament(&table, &mut audited).map_err(|e| e.to_string())?;
        queries += audited.queries();
        violations += audited.violations();
        worst = worst.min(audited.worst_ratio());
    }
    check(
        agree == 200 && violations == 0,
        format!("exact backend agrees with MLW on {agree}/200; approx(0.1): {violations} violations in {queries} queries, worst ratio {worst:.3}"),
    )
}

fn planted_graph(n: usize, edges: usize, seed: u64) -> SemiDistanceTable<f64> {
    let mut rng = rng_from_seed(seed);
    let mut off: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    for k in 0..edges {
        let r = rng.random_range(k..off.len());
        off.swap(k, r);
    }
    let mut values = vec![0.0; n * n];
    for &(i, j) in &off[..edges] {
        values[i * n + j] = 1.0;
    }
    SemiDistanceTable::from_values(n, values, TableMode::Exact).expect("valid table")
}

fn degree_estimators() -> Outcome {
    let n = 40;
    let beta = 0.05;
    let mut lines = Vec::new();
    let mut ok = true;
    for d_bar in [0.05, 0.4] {
        let table = planted_graph(n, (d_bar * (n * n) as f64).round() as usize, 12);
        for gamma in [0.1, 0.5, 1.0] {
            let mut g = ThresholdGraph::new(&table, 0.5);
            g.set_literal(true);
            let exact = g.average_degree();
            let mut rng = rng_from_seed(split_seed(12, (gamma * 100.0) as u64));
            let mut hits = 0;
            for _ in 0..1000 {
                let x = estimate_average_degree(&mut g, beta, gamma, &mut rng).map_err(|e| e.to_string())?;
                hits += if exact >= gamma / 2.0 { x >= exact / 2.0 && x <= 2.0 * exact } else { x < gamma } as usize;
            }
            ok &= hits >= 950;
            lines.push(format!("avg d={exact:.2} g={gamma}: {hits}"));
            // out-degree of the vertex whose degree is closest to d_bar
            let u = (0..n).min_by(|&a, &b| (g.out_degree(a) - d_bar).abs().total_cmp(&(g.out_degree(b) - d_bar).abs())).unwrap();
            let du = g.out_degree(u);
            let mut hits = 0;
            for _ in 0..1000 {
                let x = estimate_out_degree(&mut g, u, beta, gamma, &mut rng).map_err(|e| e.to_string())?;
                hits += if du >= gamma / 2.0 { x >= du / 2.0 && x <= 2.0 * du } else { x < gamma } as usize;
            }
            ok &= hits >= 950;
            lines.push(format!("out d={du:.3} g={gamma}: {hits}"));
        }
    }
    check(ok, format!("in-contract counts per 1000: {}", lines.join(", ")))
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig {
        family: Family::Planted {
            n: 20,
            d: 100,
            target_opt: 0.1,
        },
        algorithms: Algorithm::ALL.to_vec(),
        eps: 0.1,
        delta: 0.1,
        trials: 20,
        master_seed: 12,
        output: None,
        diam: DiameterBackend::Approx(0.1),
        opt: OptMode::Auto,
        timing: false,
    };
    let a = run_trials(&cfg).and_then(|r| r.to_csv_string()).map_err(|e| e.to_string())?;
    let b = run_trials(&cfg).and_then(|r| r.to_csv_string()).map_err(|e| e.to_string())?;
    check(a == b, format!("two runs, {} bytes each, identical: {}", a.len(), a == b))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("closed-form weights vs dense solve", closed_form_vs_dense_solve),
        ("rounding keeps factor <= 3 - 2/n", rounding_bound),
        ("hard-instance geometry", hard_instance_geometry),
        ("collision bound", collision_bound),
        ("min-W exact tables are 3-approximate", minw_exact_three_approx),
        ("empirical 3 OPT + eps envelope", empirical_envelope),
        ("expected-value bound", expected_value_bound),
        ("near-linear query scaling", scaling_signal),
        ("binary-search discipline", binary_search_discipline),
        ("tournament equivalence and diameter contract", tournament_equivalence),
        ("degree-estimator contracts", degree_estimators),
        ("byte-identical reruns", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
