use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ExperimentConfig, Family, OptMode};
use crate::baseline::{pair_order, quantile_select, select_min_w, select_mlw, SelectorResult};
use crate::dist::{
    load_instance, sample_size, tv_distance, DiscreteDistribution, HypothesisSet, InstanceFile,
    LazySemiDistances, SampleSet, SemiDistances, TableSource,
};
use crate::error::{Error, Result};
use crate::expected::expected_select;
use crate::instances::{gen_hard_expected, gen_planted, PairedFamily};
use crate::knownopt::known_opt_select;
use crate::preprocess::{preprocess, select_tournament};
use crate::rng::{rng_from_seed, split_seed};
use crate::threshold::fast_select;

/// First line of every trial CSV.
pub const CSV_VERSION: &str = "# hsel-trials-v1";

const INSTANCE_STREAM: u64 = 0;
const SAMPLE_STREAM: u64 = 1;

/// One selector run on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub algo: String,
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub chosen: usize,
    pub opt_index: usize,
    pub opt: f64,
    pub achieved_tv: f64,
    /// `achieved_tv / opt`, or -1 when `opt == 0`.
    pub factor: f64,
    pub satisfied_3opt_eps: u8,
    pub oracle_queries: u64,
    pub samples_used: usize,
    pub wall_ms: f64,
    pub expected_tv: Option<f64>,
    pub expected_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialReport {
    pub rows: Vec<TrialRow>,
}

impl TrialReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_VERSION}")?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(HEADER).map_err(csv_error)?;
        for row in &self.rows {
            w.serialize(row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut text = String::new();
        let mut input = input;
        input.read_to_string(&mut text)?;
        let body = text
            .strip_prefix(CSV_VERSION)
            .ok_or_else(|| Error::Parse(format!("missing `{CSV_VERSION}` line")))?;
        let mut r = csv::Reader::from_reader(body.trim_start_matches(['\r', '\n']).as_bytes());
        let header = r.headers().map_err(csv_error)?;
        if header.iter().ne(HEADER) {
            return Err(Error::Parse(format!("unexpected columns: {header:?}")));
        }
        let rows = r.deserialize().collect::<std::result::Result<Vec<TrialRow>, _>>().map_err(csv_error)?;
        Ok(Self { rows })
    }
}

const HEADER: [&str; 18] = [
    "trial",
    "algo",
    "n",
    "d",
    "eps",
    "delta",
    "seed",
    "chosen",
    "opt_index",
    "opt",
    "achieved_tv",
    "factor",
    "satisfied_3opt_eps",
    "oracle_queries",
    "samples_used",
    "wall_ms",
    "expected_tv",
    "expected_factor",
];

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Hypotheses and truth for one trial.
#[derive(Debug)]
pub struct TrialInstance {
    pub hypotheses: HypothesisSet<f64>,
    pub truth: DiscreteDistribution<f64>,
}

/// Draws the family's instance for `seed`. File families are read from
/// disk on every call.
pub fn generate_instance(family: &Family, seed: u64) -> Result<TrialInstance> {
    match family {
        Family::Planted { n, d, target_opt } => {
            let p = gen_planted(*n, *d, *target_opt, seed)?;
            Ok(TrialInstance {
                hypotheses: p.hypotheses,
                truth: p.truth,
            })
        }
        Family::HardExpected { n, k, ell } => {
            let (inst, mut sampler) = gen_hard_expected(*n, *k, *ell, seed)?;
            let truth = sampler.sample_any()?.distribution;
            Ok(TrialInstance {
                hypotheses: inst.hypotheses,
                truth,
            })
        }
        Family::Paired { n, k_dom, family_eps } => {
            let fam = PairedFamily::new(*k_dom, *family_eps)?;
            let mut rng = rng_from_seed(seed);
            let hyps = (0..*n).map(|_| fam.random(&mut rng)).collect::<Result<Vec<_>>>()?;
            let truth = fam.random(&mut rng)?;
            Ok(TrialInstance {
                hypotheses: HypothesisSet::new(hyps)?,
                truth,
            })
        }
        Family::File { path } => {
            let inst = load_instance(path)?;
            let truth = inst
                .truth
                .ok_or_else(|| Error::param("family", format!("{} has no true_distribution", path.display())))?;
            Ok(TrialInstance {
                hypotheses: inst.hypotheses,
                truth,
            })
        }
    }
}

/// Writes the instance for `seed` in the on-disk format.
pub fn instance_file(family: &Family, seed: u64) -> Result<InstanceFile> {
    let inst = generate_instance(family, seed)?;
    Ok(InstanceFile::from_parts(&inst.hypotheses, Some(&inst.truth)))
}

struct Outcome {
    result: SelectorResult,
    expected: Option<Vec<f64>>,
    wall_ms: f64,
}

fn timed<F: FnOnce() -> Result<(SelectorResult, Option<Vec<f64>>)>>(timing: bool, f: F) -> Result<Outcome> {
    let start = Instant::now();
    let (result, expected) = f()?;
    let wall_ms = if timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    Ok(Outcome {
        result,
        expected,
        wall_ms,
    })
}

fn run_algorithm(
    cfg: &ExperimentConfig,
    algo: Algorithm,
    inst: &TrialInstance,
    sample: &SampleSet,
    opt: f64,
    seed: u64,
) -> Result<Outcome> {
    let hyps = &inst.hypotheses;
    let oracle = LazySemiDistances::new(hyps, TableSource::Empirical(sample))?;
    let (eps, delta) = (cfg.eps, cfg.delta);
    match algo {
        Algorithm::MinW => timed(cfg.timing, || Ok((select_min_w(&oracle)?, None))),
        Algorithm::Mlw => {
            let order = pair_order(hyps);
            timed(cfg.timing, || Ok((select_mlw(hyps, &oracle, &order)?, None)))
        }
        Algorithm::Quantile => timed(cfg.timing, || Ok((quantile_select(&oracle, eps, delta, seed)?, None))),
        Algorithm::Fast => timed(cfg.timing, || Ok((fast_select(&oracle, eps, delta, seed)?, None))),
        Algorithm::KnownOpt => {
            let given = match cfg.opt {
                OptMode::Auto => opt,
                OptMode::Value(v) => v,
            };
            timed(cfg.timing, || Ok((known_opt_select(&oracle, given, eps, delta, seed)?, None)))
        }
        Algorithm::Tournament => {
            let mut diam = preprocess(hyps, cfg.diam)?.structure;
            timed(cfg.timing, || Ok((select_tournament(&oracle, diam.as_mut())?, None)))
        }
        Algorithm::Expected => timed(cfg.timing, || {
            let start = oracle.queries();
            let mix = expected_select(&oracle, eps)?;
            let chosen = mix.sample_index(&mut rng_from_seed(seed));
            let result = SelectorResult {
                chosen,
                queries: oracle.queries() - start,
                samples_used: oracle.samples(),
            };
            Ok((result, Some(mix.weights)))
        }),
    }
}

fn factor(tv: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        tv / opt
    } else {
        -1.0
    }
}

/// All rows of one trial, in configured algorithm order.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<TrialRow>> {
    let seed = split_seed(cfg.master_seed, trial as u64);
    let inst = generate_instance(&cfg.family, split_seed(seed, INSTANCE_STREAM))?;
    let n = inst.hypotheses.len();
    let tvs = inst
        .hypotheses
        .hypotheses()
        .iter()
        .map(|h| tv_distance(&inst.truth, h))
        .collect::<Result<Vec<f64>>>()?;
    let (opt_index, opt) = tvs
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
    let s = sample_size(n, cfg.eps, cfg.delta);
    let sample = SampleSet::draw(&inst.truth, s, split_seed(seed, SAMPLE_STREAM))?;
    cfg.algorithms
        .iter()
        .map(|&algo| {
            let out = run_algorithm(cfg, algo, &inst, &sample, opt, split_seed(seed, algo.stream()))?;
            let achieved = tvs[out.result.chosen];
            let expected_tv = out
                .expected
                .as_ref()
                .map(|q| q.iter().zip(&tvs).map(|(qi, t)| qi * t).sum::<f64>());
            let satisfied = match expected_tv {
                Some(e) => e <= (3.0 - 2.0 / n as f64) * opt + cfg.eps,
                None => achieved <= 3.0 * opt + cfg.eps,
            };
            Ok(TrialRow {
                trial,
                algo: algo.name().to_string(),
                n,
                d: inst.hypotheses.domain_size(),
                eps: cfg.eps,
                delta: cfg.delta,
                seed,
                chosen: out.result.chosen,
                opt_index,
                opt,
                achieved_tv: achieved,
                factor: factor(achieved, opt),
                satisfied_3opt_eps: satisfied as u8,
                oracle_queries: out.result.queries,
                samples_used: out.result.samples_used,
                wall_ms: out.wall_ms,
                expected_tv,
                expected_factor: expected_tv.map(|e| factor(e, opt)),
            })
        })
        .collect()
}

/// Runs every trial in parallel and merges rows in trial order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<TrialReport> {
    cfg.validate()?;
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialReport {
        rows: per_trial.into_iter().flatten().collect(),
    })
}
