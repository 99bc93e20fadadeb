//! Concentration of measure on SL_n(q) with the rank metric and uniform
//! measure: constructive witnesses for the subgroup-chain diameters, the
//! resulting Lévy bound, empirical tails of 1-Lipschitz functions, and the
//! metric Ramsey experiment over covers pulled back from [0, 1].

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Fq};
use crate::matgf::{rank_distance, sample_sl, MatF, Rational, SlElement};

/// Samples handled by one deterministic random stream.
pub const CHUNK: usize = 1024;

/// A generator seeded by `seed` on its own stream; streams never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn to_f64(r: Rational) -> f64 {
    r.to_f64().expect("finite rational")
}

fn abs_diff(a: Rational, b: Rational) -> Rational {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

/// Returns `h` with `det h = 1`, `rank(h − id) ≤ 2` and `h·g·e_n = e_n`,
/// together with `h·g`.
///
/// With `v = g e_n`: if `v = e_n` then `h = id`; if `v = c e_n` then `h`
/// scales `e_1` by `c` and `e_n` by `c⁻¹`; otherwise `h` sends `v ↦ e_n`,
/// `e_n ↦ −v` and fixes every `e_i` other than `e_n` and the first `e_j`
/// with `v_j ≠ 0`.
pub fn stabilizer_reduce(g: &SlElement) -> Result<(SlElement, SlElement)> {
    let n = g.n();
    if n < 2 {
        return Err(Error::usage("stabilizer reduction needs n >= 2"));
    }
    let f = g.field();
    let last = n - 1;
    let v = g.mat().column(last);
    let mut h = MatF::identity(n, f);
    match (0..last).find(|&j| !v[j].is_zero()) {
        None if v[last] == Fq::ONE => {}
        None => {
            let c = v[last];
            h.set(0, 0, c);
            h.set(last, last, f.inv(c)?);
        }
        Some(j) => {
            let vj_inv = f.inv(v[j])?;
            // h(e_n) = −v
            for (i, &vi) in v.iter().enumerate() {
                h.set(i, last, f.neg(vi));
            }
            // h(e_j) = (e_n + v_n·v − Σ_{i≠j,n} v_i e_i) / v_j
            let mut col = vec![Fq::ZERO; n];
            for i in 0..n {
                let mut x = f.mul(v[last], v[i]);
                if i == last {
                    x = f.add(x, Fq::ONE);
                } else if i != j {
                    x = f.sub(x, v[i]);
                }
                col[i] = f.mul(x, vj_inv);
            }
            for (i, x) in col.into_iter().enumerate() {
                h.set(i, j, x);
            }
        }
    }
    let h = SlElement::new_unchecked(h);
    let g_prime = h.mul(g);
    Ok((h, g_prime))
}

/// Checks every postcondition of [`stabilizer_reduce`] exactly.
pub fn reduction_holds(g: &SlElement, h: &SlElement, g_prime: &SlElement) -> bool {
    let n = g.n();
    let f = g.field();
    let mut e_n = vec![Fq::ZERO; n];
    e_n[n - 1] = Fq::ONE;
    let id = MatF::identity(n, f);
    h.mat().det().is_ok_and(|d| d == Fq::ONE)
        && h.mat().sub(&id).rank() <= 2
        && g_prime.mat() == &h.mat().mul(g.mat())
        && g_prime.mat().mul_vec(&e_n) == e_n
}

/// Diameter certificates for the chain SL_1 < SL_2 < … < SL_n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainProfile {
    pub n: usize,
    pub q: u64,
    pub samples: usize,
    /// Certified `a_i` for `i = 1..n`: 0 for the trivial step, `2/n` for
    /// every other step.
    pub diameters: Vec<Rational>,
    /// Largest `rank(h − id)/n` among the sampled witnesses at each step.
    pub observed: Vec<Rational>,
    /// Sampled elements whose witness violated a postcondition.
    pub failures: usize,
    /// `(Σ a_i²)^{1/2}` from the certified diameters.
    pub length: f64,
    /// `2 n^{−1/2}`.
    pub length_bound: f64,
}

/// Samples `samples` elements of each SL_i(q), `2 ≤ i ≤ n`, and reduces
/// each into the stabilizer of `e_i`. Every witness moves the element by
/// rank at most 2, so the quotient SL_i/SL_{i−1} has diameter at most
/// `2/n` in the metric normalized by `n`.
pub fn chain_profile(n: usize, q: u64, samples: usize, seed: u64) -> Result<ChainProfile> {
    if n < 2 {
        return Err(Error::usage("chain profile needs n >= 2"));
    }
    let field = Field::of_order(q)?;
    let per_level: Vec<(u64, usize)> = (2..=n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut worst = 0u64;
            let mut failures = 0;
            for _ in 0..samples {
                let g = sample_sl(i, &field, &mut rng);
                let (h, gp) = stabilizer_reduce(&g).expect("i >= 2");
                let r = h.mat().sub(&MatF::identity(i, &field)).rank() as u64;
                worst = worst.max(r);
                if !reduction_holds(&g, &h, &gp) {
                    failures += 1;
                }
            }
            (worst, failures)
        })
        .collect();
    let nn = n as u64;
    let mut diameters = vec![Rational::from_integer(0)];
    diameters.extend((2..=n).map(|_| Rational::new(2, nn)));
    let mut observed = vec![Rational::from_integer(0)];
    observed.extend(per_level.iter().map(|&(w, _)| Rational::new(w, nn)));
    let length = diameters.iter().map(|&a| to_f64(a * a)).sum::<f64>().sqrt();
    Ok(ChainProfile {
        n,
        q,
        samples,
        diameters,
        observed,
        failures: per_level.iter().map(|p| p.1).sum(),
        length,
        length_bound: 2.0 / (n as f64).sqrt(),
    })
}

/// `2·exp(−r²·n/64)`.
pub fn levy_bound(r: f64, n: usize) -> f64 {
    2.0 * (-r * r * n as f64 / 64.0).exp()
}

/// Registered 1-Lipschitz functions on SL_n(q) with values in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub enum LipschitzFn {
    /// `x ↦ d(x, a)`.
    DistanceTo(MatF),
    /// `x ↦ min_{a ∈ S} d(x, a)`.
    MinDistanceToSet(Vec<MatF>),
    /// `x ↦ c`.
    Constant(Rational),
}

impl LipschitzFn {
    /// `d(·, id)` on SL_n over `field`.
    pub fn distance_to_identity(n: usize, field: &Field) -> LipschitzFn {
        LipschitzFn::DistanceTo(MatF::identity(n, field))
    }

    pub fn name(&self) -> &'static str {
        match self {
            LipschitzFn::DistanceTo(_) => "distance-to",
            LipschitzFn::MinDistanceToSet(_) => "min-distance-to-set",
            LipschitzFn::Constant(_) => "constant",
        }
    }

    pub fn eval(&self, x: &MatF) -> Result<Rational> {
        match self {
            LipschitzFn::DistanceTo(a) => rank_distance(x, a),
            LipschitzFn::MinDistanceToSet(set) => {
                let mut best: Option<Rational> = None;
                for a in set {
                    let d = rank_distance(x, a)?;
                    best = Some(best.map_or(d, |b| b.min(d)));
                }
                best.ok_or_else(|| Error::usage("empty reference set"))
            }
            LipschitzFn::Constant(c) => Ok(*c),
        }
    }
}

/// Spot-checks `|f(x) − f(y)| ≤ d(x, y)` exactly on `pairs` random pairs of
/// SL_n(q); returns the number of violations.
pub fn lipschitz_certificate(f: &LipschitzFn, n: usize, field: &Field, pairs: usize, seed: u64) -> Result<usize> {
    let chunks = pairs.div_ceil(CHUNK);
    let counts: Vec<Result<usize>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let mut bad = 0;
            for _ in 0..CHUNK.min(pairs - c * CHUNK) {
                let x = sample_sl(n, field, &mut rng);
                let y = sample_sl(n, field, &mut rng);
                let lhs = abs_diff(f.eval(x.mat())?, f.eval(y.mat())?);
                if lhs > x.distance(&y)? {
                    bad += 1;
                }
            }
            Ok(bad)
        })
        .collect();
    counts.into_iter().sum()
}

/// One row of a concentration report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub r: f64,
    /// `2·exp(−r²n/64)`.
    pub bound: f64,
    /// Fraction of samples with `|f − median| ≥ r`.
    pub empirical: f64,
    /// `sqrt(p(1 − p)/N)`.
    pub stderr: f64,
    /// `empirical ≤ bound + 3·stderr`.
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub q: u64,
    pub function: String,
    pub samples: usize,
    pub seed: u64,
    pub certificate_pairs: usize,
    pub median: f64,
    pub rows: Vec<TailRow>,
}

impl ConcentrationReport {
    /// Whether every row whose bound is below `threshold` is within its
    /// error bar.
    pub fn holds_below(&self, threshold: f64) -> bool {
        self.rows.iter().filter(|r| r.bound < threshold).all(|r| r.within)
    }
}

/// Empirical tails `P̂(|f − med| ≥ r)` over `samples` uniform draws, after a
/// Lipschitz certificate on `certificate_pairs` pairs; a failed certificate
/// is a usage error.
pub fn lipschitz_concentration(
    n: usize,
    q: u64,
    f: &LipschitzFn,
    r_list: &[Rational],
    samples: usize,
    certificate_pairs: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if samples == 0 {
        return Err(Error::usage("need at least one sample"));
    }
    let field = Field::of_order(q)?;
    let bad = lipschitz_certificate(f, n, &field, certificate_pairs, seed ^ 0x5eed_cafe)?;
    if bad > 0 {
        return Err(Error::usage(format!("{} failed its Lipschitz certificate on {bad} pairs", f.name())));
    }
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<Rational>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            (0..CHUNK.min(samples - c * CHUNK)).map(|_| f.eval(sample_sl(n, &field, &mut rng).mat())).collect()
        })
        .collect();
    let mut values = Vec::with_capacity(samples);
    for p in parts {
        values.extend(p?);
    }
    values.sort_unstable();
    let median = values[(values.len() - 1) / 2];
    let total = samples as f64;
    let rows = r_list
        .iter()
        .map(|&r| {
            let hits = values.iter().filter(|&&v| abs_diff(v, median) >= r).count();
            let p = hits as f64 / total;
            let stderr = (p * (1.0 - p) / total).sqrt();
            let bound = levy_bound(to_f64(r), n);
            TailRow { r: to_f64(r), bound, empirical: p, stderr, within: p <= bound + 3.0 * stderr }
        })
        .collect();
    Ok(ConcentrationReport {
        n,
        q,
        function: f.name().to_string(),
        samples,
        seed,
        certificate_pairs,
        median: to_f64(median),
        rows,
    })
}

/// Closed subintervals of [0, 1] pulled back along a 1-Lipschitz function,
/// with a Lebesgue number `eps` certified by interval arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalCover {
    f: LipschitzFn,
    intervals: Vec<(Rational, Rational)>,
    eps: Rational,
}

impl FunctionalCover {
    /// Fails with a usage error unless every `v ∈ [0, 1]` has an interval
    /// containing `[v − eps, v + eps] ∩ [0, 1]`.
    pub fn new(f: LipschitzFn, intervals: Vec<(Rational, Rational)>, eps: Rational) -> Result<FunctionalCover> {
        let one = Rational::from_integer(1);
        if intervals.is_empty() {
            return Err(Error::usage("cover needs at least one interval"));
        }
        if intervals.iter().any(|&(a, b)| a > b || b > one) {
            return Err(Error::usage("intervals must be closed subintervals of [0, 1]"));
        }
        let cover = FunctionalCover { f, intervals, eps };
        if !covers_unit(&cover.safe_zones()) {
            return Err(Error::usage(format!("intervals do not have Lebesgue number {}", cover.eps)));
        }
        Ok(cover)
    }

    /// `m` intervals `[i/m − eps, (i+1)/m + eps]` clipped to [0, 1].
    pub fn uniform(f: LipschitzFn, m: usize, eps: Rational) -> Result<FunctionalCover> {
        if m == 0 {
            return Err(Error::usage("m must be positive"));
        }
        let mm = m as u64;
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        let intervals = (0..mm)
            .map(|i| {
                let lo = Rational::new(i, mm);
                let hi = Rational::new(i + 1, mm) + eps;
                (if lo > eps { lo - eps } else { zero }, hi.min(one))
            })
            .collect();
        FunctionalCover::new(f, intervals, eps)
    }

    pub fn function(&self) -> &LipschitzFn {
        &self.f
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.intervals
    }

    pub fn eps(&self) -> Rational {
        self.eps
    }

    /// For each interval, the values `v` whose `eps`-window (clipped to
    /// [0, 1]) fits inside it; empty intervals are dropped.
    fn safe_zones(&self) -> Vec<(Rational, Rational)> {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        self.intervals
            .iter()
            .filter_map(|&(a, b)| {
                let lo = if a > zero { a + self.eps } else { zero };
                let hi = if b < one { if b >= self.eps { b - self.eps } else { return None } } else { one };
                (lo <= hi).then_some((lo, hi))
            })
            .collect()
    }

    /// Index of an interval containing `v`, if any.
    pub fn containing(&self, v: Rational) -> Option<usize> {
        self.intervals.iter().position(|&(a, b)| a <= v && v <= b)
    }

    /// Whether `f(x)` lies in interval `i`.
    pub fn contains(&self, i: usize, x: &MatF) -> Result<bool> {
        let v = self.f.eval(x)?;
        let (a, b) = self.intervals[i];
        Ok(a <= v && v <= b)
    }
}

fn covers_unit(zones: &[(Rational, Rational)]) -> bool {
    let mut z = zones.to_vec();
    z.sort();
    let mut reach = Rational::from_integer(0);
    let mut started = false;
    for (a, b) in z {
        if a > reach || (!started && a > Rational::from_integer(0)) {
            return false;
        }
        started = true;
        reach = reach.max(b);
    }
    started && reach >= Rational::from_integer(1)
}

/// Shrinks every interval by `eps` on each side that is interior to
/// [0, 1]; endpoints at 0 and 1 stay put. If `f(x)` lies in a shrunk
/// interval then the whole `eps`-ball around `x` maps into the original
/// interval, so the shrunk preimage sits inside the erosion
/// `{x : B(x, eps) ⊂ U}`. The result still covers [0, 1] and has
/// Lebesgue number 0.
pub fn functional_erode(cover: &FunctionalCover) -> FunctionalCover {
    FunctionalCover {
        f: cover.f.clone(),
        intervals: cover.safe_zones(),
        eps: Rational::from_integer(0),
    }
}

/// `64 ε⁻² max(ln 2k, ln 2m)`.
pub fn ramsey_threshold(eps: f64, k: usize, m: usize) -> f64 {
    64.0 / (eps * eps) * ((2 * k) as f64).ln().max(((2 * m) as f64).ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RamseyReport {
    pub n: usize,
    pub q: u64,
    pub eps: f64,
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    /// `64 ε⁻² max(ln 2k, ln 2m)`.
    pub threshold: f64,
    /// `n > threshold`.
    pub hypothesis: bool,
    /// `1 − 2k·exp(−ε²n/64)`.
    pub bound: f64,
    pub trials: usize,
    pub successes: usize,
    pub mean_draws: f64,
    /// Fraction of trials whose first draw already worked.
    pub good_frequency: f64,
    pub stderr: f64,
}

impl RamseyReport {
    /// Every trial succeeded and the first-draw frequency respects the
    /// measure bound within three standard errors.
    pub fn passed(&self) -> bool {
        self.successes == self.trials && self.good_frequency >= self.bound - 3.0 * self.stderr
    }
}

/// For each trial, draws uniform `g` until some interval of the cover
/// contains `f(g·h)` for every `h ∈ set`, giving up after `max_draws`.
pub fn ramsey_search(
    n: usize,
    q: u64,
    cover: &FunctionalCover,
    set: &[MatF],
    trials: usize,
    max_draws: usize,
    seed: u64,
) -> Result<RamseyReport> {
    let field = Field::of_order(q)?;
    if set.iter().any(|h| h.rows() != n || h.cols() != n || h.field() != &field) {
        return Err(Error::usage("set elements must be n x n over the group's field"));
    }
    let outcomes: Vec<Result<Option<usize>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            for draw in 1..=max_draws {
                let g = sample_sl(n, &field, &mut rng);
                let mut ok = vec![true; cover.intervals.len()];
                for h in set {
                    let v = cover.f.eval(&g.mat().mul(h))?;
                    for (slot, &(a, b)) in ok.iter_mut().zip(&cover.intervals) {
                        *slot &= a <= v && v <= b;
                    }
                }
                if ok.iter().any(|&b| b) {
                    return Ok(Some(draw));
                }
            }
            Ok(None)
        })
        .collect();
    let mut draws = Vec::new();
    for o in outcomes {
        if let Some(d) = o? {
            draws.push(d);
        }
    }
    let eps = to_f64(cover.eps);
    let k = set.len();
    let m = cover.intervals.len();
    let first = draws.iter().filter(|&&d| d == 1).count() as f64 / trials.max(1) as f64;
    let threshold = ramsey_threshold(eps, k, m);
    Ok(RamseyReport {
        n,
        q,
        eps,
        k,
        m,
        seed,
        threshold,
        hypothesis: n as f64 > threshold,
        bound: 1.0 - 2.0 * k as f64 * (-eps * eps * n as f64 / 64.0).exp(),
        trials,
        successes: draws.len(),
        mean_draws: if draws.is_empty() { f64::NAN } else { draws.iter().sum::<usize>() as f64 / draws.len() as f64 },
        good_frequency: first,
        stderr: (first * (1.0 - first) / trials.max(1) as f64).sqrt(),
    })
}
