//! Instance generators: the hard family for expected-value selection, a
//! paired-perturbation family, and random planted instances with OPT known
//! by brute force.

use std::ops::Range;

use rand::Rng;
use rand_distr::{Distribution as _, Exp1, Gamma};

use crate::dist::{tv_distance, DiscreteDistribution, HypothesisSet};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, TrialRng};
use crate::scalar::Scalar;

/// Layout shared by the hard family and its samplers.
///
/// The domain `0..d`, `d = 2nkl`, is cut into `2n` groups `T_u` of `k`
/// intervals `T_u^v`, each of length `l`. Hypothesis `i` (0-based) puts
/// `(1+beta)/d` on group `2i`, `(1-beta)/d` on group `2i+1` and `1/d`
/// elsewhere, with `beta = 1/(l-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardLayout {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
}

impl HardLayout {
    pub fn new(n: usize, k: usize, ell: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", format!("need n >= 2, got {n}")));
        }
        if k < 1 {
            return Err(Error::param("k", "need k >= 1"));
        }
        if ell < 2 {
            return Err(Error::param("ell", format!("need ell >= 2, got {ell}")));
        }
        Ok(Self { n, k, ell })
    }

    pub fn domain_size(&self) -> usize {
        2 * self.n * self.k * self.ell
    }

    pub fn beta(&self) -> f64 {
        1.0 / (self.ell as f64 - 1.0)
    }

    /// Elements of interval `v` of group `u` (both 0-based).
    pub fn interval(&self, u: usize, v: usize) -> Range<usize> {
        let start = u * self.k * self.ell + v * self.ell;
        start..start + self.ell
    }

    pub fn interval_count(&self) -> usize {
        2 * self.n * self.k
    }

    /// Interval containing element `x`, numbered `u * k + v`.
    pub fn interval_of(&self, x: usize) -> usize {
        x / self.ell
    }

    /// Value of `(1 + beta)/d`, `(1 - beta)/d` or `1/d` for hypothesis `i`
    /// at element `x`.
    fn hypothesis_mass(&self, i: usize, x: usize) -> f64 {
        let d = self.domain_size() as f64;
        let group = x / (self.k * self.ell);
        if group == 2 * i {
            (1.0 + self.beta()) / d
        } else if group == 2 * i + 1 {
            (1.0 - self.beta()) / d
        } else {
            1.0 / d
        }
    }
}

#[derive(Debug)]
pub struct HardExpectedInstance<T> {
    pub layout: HardLayout,
    pub hypotheses: HypothesisSet<T>,
}

impl<T: Scalar> HardExpectedInstance<T> {
    /// `k(1+beta)/d`, the distance from a sampled `P_i` to `H_i`.
    pub fn near_distance(&self) -> f64 {
        let l = self.layout;
        l.k as f64 * (1.0 + l.beta()) / l.domain_size() as f64
    }

    /// `k(3+beta)/d`, the distance from a sampled `P_i` to every other `H_j`.
    pub fn far_distance(&self) -> f64 {
        let l = self.layout;
        l.k as f64 * (3.0 + l.beta()) / l.domain_size() as f64
    }
}

/// A sampled truth `P_i` together with its extreme elements.
#[derive(Debug, Clone)]
pub struct HardTruth<T> {
    pub index: usize,
    pub distribution: DiscreteDistribution<T>,
    /// Zero-mass element of each interval of group `2i`.
    pub zeros: Vec<usize>,
    /// `2/d`-mass element of each interval of group `2i+1`.
    pub peaks: Vec<usize>,
}

/// Draws truths from the hard family. Each interval of group `2i` gets one
/// uniformly chosen zero element (the rest `(1+beta)/d`), each interval of
/// group `2i+1` one uniformly chosen `2/d` element (the rest
/// `(1-beta)/d`); everything else is `1/d`.
#[derive(Debug, Clone)]
pub struct HardSampler {
    layout: HardLayout,
    rng: TrialRng,
}

impl HardSampler {
    pub fn new(layout: HardLayout, seed: u64) -> Self {
        Self {
            layout,
            rng: rng_from_seed(seed),
        }
    }

    pub fn layout(&self) -> HardLayout {
        self.layout
    }

    pub fn sample<T: Scalar>(&mut self, i: usize) -> Result<HardTruth<T>> {
        let l = self.layout;
        if i >= l.n {
            return Err(Error::IndexOutOfRange { index: i, len: l.n });
        }
        let d = l.domain_size() as f64;
        let mut probs = vec![1.0 / d; l.domain_size()];
        let mut zeros = Vec::with_capacity(l.k);
        let mut peaks = Vec::with_capacity(l.k);
        for v in 0..l.k {
            let up = l.interval(2 * i, v);
            let zero = up.start + self.rng.random_range(0..l.ell);
            for x in up {
                probs[x] = if x == zero { 0.0 } else { (1.0 + l.beta()) / d };
            }
            zeros.push(zero);
            let down = l.interval(2 * i + 1, v);
            let peak = down.start + self.rng.random_range(0..l.ell);
            for x in down {
                probs[x] = if x == peak { 2.0 / d } else { (1.0 - l.beta()) / d };
            }
            peaks.push(peak);
        }
        Ok(HardTruth {
            index: i,
            distribution: DiscreteDistribution::new(probs.into_iter().map(T::of).collect())?,
            zeros,
            peaks,
        })
    }

    /// Draws `P_i` for a uniformly random `i`.
    pub fn sample_any<T: Scalar>(&mut self) -> Result<HardTruth<T>> {
        let i = self.rng.random_range(0..self.layout.n);
        self.sample(i)
    }
}

pub fn gen_hard_expected<T: Scalar>(
    n: usize,
    k: usize,
    ell: usize,
    seed: u64,
) -> Result<(HardExpectedInstance<T>, HardSampler)> {
    let layout = HardLayout::new(n, k, ell)?;
    let hyps = (0..n)
        .map(|i| {
            let probs = (0..layout.domain_size())
                .map(|x| T::of(layout.hypothesis_mass(i, x)))
                .collect();
            DiscreteDistribution::new(probs)
        })
        .collect::<Result<Vec<_>>>()?;
    let inst = HardExpectedInstance {
        layout,
        hypotheses: HypothesisSet::new(hyps)?,
    };
    Ok((inst, HardSampler::new(layout, seed)))
}

/// Monte Carlo estimate and standard error of the chance that `s` draws
/// from a freshly sampled `P_i` land twice in the same interval.
pub fn collision_probability<T: Scalar>(
    inst: &HardExpectedInstance<T>,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if s == 0 {
        return Err(Error::param("s", "need s >= 1"));
    }
    if trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    let layout = inst.layout;
    let mut sampler = HardSampler::new(layout, seed);
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    let mut seen = vec![u32::MAX; layout.interval_count()];
    let mut hits = 0usize;
    for trial in 0..trials {
        if s == 1 {
            break;
        }
        let truth = sampler.sample_any::<T>()?;
        let draws = truth.distribution.draw(s, &mut rng);
        let stamp = trial as u32;
        if draws.iter().any(|&x| {
            let slot = &mut seen[layout.interval_of(x)];
            std::mem::replace(slot, stamp) == stamp
        }) {
            hits += 1;
        }
    }
    let p = hits as f64 / trials as f64;
    Ok((p, (p * (1.0 - p) / trials as f64).sqrt()))
}

/// Family of distributions over `0..k_dom` where pair `(2t, 2t+1)` carries
/// `((1+eps)/k_dom, (1-eps)/k_dom)` when bit `t` is clear and the swap when
/// set. Members are built on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedFamily {
    k_dom: usize,
    eps: f64,
}

impl PairedFamily {
    pub fn new(k_dom: usize, eps: f64) -> Result<Self> {
        if k_dom == 0 || !k_dom.is_multiple_of(2) {
            return Err(Error::param("k_dom", format!("need a positive even size, got {k_dom}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::param("eps", format!("{eps} not in (0, 1)")));
        }
        Ok(Self { k_dom, eps })
    }

    pub fn pairs(&self) -> usize {
        self.k_dom / 2
    }

    pub fn from_bits<T: Scalar>(&self, bits: &[bool]) -> Result<DiscreteDistribution<T>> {
        if bits.len() != self.pairs() {
            return Err(Error::param(
                "member",
                format!("expected {} bits, got {}", self.pairs(), bits.len()),
            ));
        }
        let k = self.k_dom as f64;
        let hi = T::of((1.0 + self.eps) / k);
        let lo = T::of((1.0 - self.eps) / k);
        let probs = bits
            .iter()
            .flat_map(|&b| if b { [lo, hi] } else { [hi, lo] })
            .collect();
        DiscreteDistribution::new(probs)
    }

    /// Member with bit `t` taken from bit `t` of `mask`.
    pub fn from_mask<T: Scalar>(&self, mask: u64) -> Result<DiscreteDistribution<T>> {
        let pairs = self.pairs();
        if pairs < 64 && mask >> pairs != 0 {
            return Err(Error::param("member", format!("mask {mask:#x} exceeds {pairs} bits")));
        }
        let bits: Vec<bool> = (0..pairs).map(|t| t < 64 && (mask >> t) & 1 == 1).collect();
        self.from_bits(&bits)
    }

    pub fn random<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DiscreteDistribution<T>> {
        let bits: Vec<bool> = (0..self.pairs()).map(|_| rng.random()).collect();
        self.from_bits(&bits)
    }
}

#[derive(Debug)]
pub struct PlantedInstance<T> {
    pub hypotheses: HypothesisSet<T>,
    pub truth: DiscreteDistribution<T>,
    pub opt: T,
    pub opt_index: usize,
    /// Hypothesis the truth was planted around.
    pub center: usize,
}

/// `(min_i tv(P, H_i), argmin)` with ties going to the lowest index.
pub fn brute_force_opt<T: Scalar>(hyps: &HypothesisSet<T>, p: &DiscreteDistribution<T>) -> Result<(T, usize)> {
    let mut best = (T::infinity(), 0);
    for (i, h) in hyps.hypotheses().iter().enumerate() {
        let tv = tv_distance(p, h)?;
        if tv < best.0 {
            best = (tv, i);
        }
    }
    Ok(best)
}

fn normalized(weights: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    (total > 0.0 && total.is_finite()).then(|| weights.into_iter().map(|w| w / total).collect())
}

const PLANT_ATTEMPTS: usize = 16;

/// Random hypotheses drawn from a flat Dirichlet; the truth is
/// `(1 - lambda) H_c + lambda Q` for a random center `c` and a sparse
/// Dirichlet(0.1) direction `Q`, with `lambda` set so `tv(P, H_c)` equals
/// `target_opt`. OPT and its index are then found by brute force, so OPT
/// can come out below the target when another hypothesis is closer.
pub fn gen_planted<T: Scalar>(n: usize, d: usize, target_opt: f64, seed: u64) -> Result<PlantedInstance<T>> {
    if n < 1 {
        return Err(Error::param("n", "need n >= 1"));
    }
    if d < 2 {
        return Err(Error::param("d", format!("need d >= 2, got {d}")));
    }
    if !(0.0..1.0).contains(&target_opt) {
        return Err(Error::param("target_opt", format!("{target_opt} not in [0, 1)")));
    }
    let mut rng = rng_from_seed(seed);
    let flat: Vec<Vec<f64>> = (0..n)
        .map(|_| loop {
            let w: Vec<f64> = (0..d).map(|_| Exp1.sample(&mut rng)).collect();
            if let Some(p) = normalized(w) {
                break p;
            }
        })
        .collect();
    let center = rng.random_range(0..n);
    let h = &flat[center];
    let gamma = Gamma::new(0.1, 1.0).expect("valid shape");
    let mut planted = None;
    if target_opt == 0.0 {
        planted = Some(h.clone());
    } else {
        for _ in 0..PLANT_ATTEMPTS {
            let Some(q) = normalized((0..d).map(|_| gamma.sample(&mut rng)).collect()) else {
                continue;
            };
            let gap = 0.5 * h.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
            if gap >= target_opt {
                let lambda = target_opt / gap;
                planted = Some(h.iter().zip(&q).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect());
                break;
            }
        }
    }
    let p = planted.ok_or(Error::InfeasibleTarget(target_opt))?;
    let to_t = |v: &[f64]| DiscreteDistribution::new(v.iter().map(|&x| T::of(x)).collect());
    let hyps = HypothesisSet::new(flat.iter().map(|v| to_t(v)).collect::<Result<Vec<_>>>()?)?;
    let truth = to_t(&p)?;
    let (opt, opt_index) = brute_force_opt(&hyps, &truth)?;
    Ok(PlantedInstance {
        hypotheses: hyps,
        truth,
        opt,
        opt_index,
        center,
    })
}
