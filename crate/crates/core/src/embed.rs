//! The diagonal embedding SL_{2^n}(q) → SL_{2^{n+1}}(q), the
//! quadratic-extension embedding SL_{2^n}(q^{2^{k+1}}) → SL_{2^{n+1}}(q^{2^k}),
//! their composition down a tower, and distances between elements living at
//! different levels of the inductive limit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{build_tower, PrimePower, QuadExt, Tower};
use crate::matgf::{rank_distance, sample_sl, MatF, Rational, SlElement};

/// An element of SL_{2^level}(q), standing for its class in the limit group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelledElement {
    level: u32,
    elem: SlElement,
}

impl LevelledElement {
    pub fn new(level: u32, elem: SlElement) -> Result<LevelledElement> {
        if elem.n() != 1usize << level {
            return Err(Error::usage(format!(
                "level {level} needs dimension {}, got {}",
                1usize << level,
                elem.n()
            )));
        }
        Ok(LevelledElement { level, elem })
    }

    pub fn identity(level: u32, field: &crate::Field) -> LevelledElement {
        LevelledElement { level, elem: SlElement::identity(1 << level, field) }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn elem(&self) -> &SlElement {
        &self.elem
    }

    pub fn mat(&self) -> &MatF {
        self.elem.mat()
    }

    pub fn mul(&self, other: &LevelledElement) -> Result<LevelledElement> {
        let target = self.level.max(other.level);
        let a = self.promote_to(target)?;
        let b = other.promote_to(target)?;
        Ok(LevelledElement { level: target, elem: a.elem.mul(&b.elem) })
    }

    /// Repeated diagonal embedding up to `level`.
    pub fn promote_to(&self, level: u32) -> Result<LevelledElement> {
        if level < self.level {
            return Err(Error::usage(format!("cannot promote level {} down to {level}", self.level)));
        }
        let mut x = self.clone();
        while x.level < level {
            x = diag_embed(&x);
        }
        Ok(x)
    }
}

/// `g ↦ diag(g, g)`, one level up.
pub fn diag_embed(g: &LevelledElement) -> LevelledElement {
    let m = g.mat();
    LevelledElement { level: g.level + 1, elem: SlElement::new_unchecked(m.block_diag(m)) }
}

/// Writes each entry of `g` as `g₀ + σ g₁` over the base of `ext` and
/// returns `[[g₀, β g₁], [g₁, g₀ + α g₁]]`, the matrix of `v ↦ g v` on
/// coordinates `(v₀, v₁)`.
pub fn quad_embed(g: &MatF, ext: &QuadExt) -> Result<MatF> {
    if g.field() != ext.field() {
        return Err(Error::usage("matrix is not over the extension field"));
    }
    let base = ext.base();
    let (alpha, beta) = (ext.alpha(), ext.beta());
    let (r, c) = (g.rows(), g.cols());
    let mut out = MatF::zeros(2 * r, 2 * c, base);
    for i in 0..r {
        for j in 0..c {
            let (g0, g1) = ext.split(g.get(i, j));
            let d = base.add(g0, base.mul(alpha, g1));
            for (ri, ci, v) in [(i, j, g0), (i, c + j, base.mul(beta, g1)), (r + i, j, g1), (r + i, c + j, d)] {
                if !v.is_zero() {
                    out.set(ri, ci, v);
                }
            }
        }
    }
    Ok(out)
}

/// Applies `m` quadratic-extension stages, taking a matrix over level `m`
/// of the tower to one over the base field with `2^m` times the dimension.
pub fn chain_embed_mat(g: &MatF, tower: &Tower, m: usize) -> Result<MatF> {
    if m > tower.depth() {
        return Err(Error::usage(format!("tower depth {} is less than {m}", tower.depth())));
    }
    if g.field() != tower.field(m) {
        return Err(Error::usage(format!("matrix is not over tower level {m}")));
    }
    let mut x = g.clone();
    for k in (0..m).rev() {
        x = quad_embed(&x, tower.step(k))?;
    }
    Ok(x)
}

/// [`chain_embed_mat`] on an element of SL_{2^n}(q^{2^m}), landing at
/// level `n + m` over the base field.
pub fn chain_embed(g: &SlElement, tower: &Tower, m: usize) -> Result<LevelledElement> {
    let n = g.n();
    if !n.is_power_of_two() {
        return Err(Error::usage("dimension must be a power of two"));
    }
    let out = chain_embed_mat(g.mat(), tower, m)?;
    LevelledElement::new(n.trailing_zeros() + m as u32, SlElement::new_unchecked(out))
}

/// Rank distance after promoting both operands to the higher level.
pub fn limit_distance(x: &LevelledElement, y: &LevelledElement) -> Result<Rational> {
    if x.elem.field() != y.elem.field() {
        return Err(Error::usage("elements live over different fields"));
    }
    let level = x.level.max(y.level);
    rank_distance(x.promote_to(level)?.mat(), y.promote_to(level)?.mat())
}

/// The composed embedding SL_{2^n}(q^{2^m}) → SL_{2^{n+m}}(q).
#[derive(Clone, Debug)]
pub struct EmbedChain {
    tower: Tower,
    n: u32,
    m: usize,
}

impl EmbedChain {
    pub fn new(q: u64, n: u32, m: usize) -> Result<EmbedChain> {
        let tower = build_tower(PrimePower::from_order(q)?, m)?;
        Ok(EmbedChain { tower, n, m })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn source_dim(&self) -> usize {
        1 << self.n
    }

    pub fn target_level(&self) -> u32 {
        self.n + self.m as u32
    }

    pub fn apply(&self, g: &SlElement) -> Result<LevelledElement> {
        chain_embed(g, &self.tower, self.m)
    }

    /// One line per stage, e.g.
    /// `SL_2(16) -> SL_4(4) [alpha=(0,1), beta=(1,0), method=exhaustive]`.
    pub fn describe(&self) -> Vec<String> {
        (0..self.m)
            .rev()
            .map(|k| {
                let step = self.tower.step(k);
                let dim = 1usize << (self.n as usize + self.m - 1 - k);
                format!(
                    "SL_{}({}) -> SL_{}({}) [alpha={}, beta={}, method={}]",
                    dim,
                    step.field().order(),
                    2 * dim,
                    step.base().order(),
                    step.base().format_elem(step.alpha()),
                    step.base().format_elem(step.beta()),
                    step.method()
                )
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub q: u64,
    pub n: u32,
    pub m: usize,
    pub seed: u64,
}

/// Outcome of [`verify_embedding`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub config: EmbedConfig,
    pub trials: usize,
    pub failures: usize,
    /// Largest `|rank_base(I(g) − I(h)) − 2^m · rank_ext(g − h)|` seen.
    pub max_rank_discrepancy: u64,
    pub stages: Vec<String>,
}

/// Draws `trials` random pairs in SL_{2^n}(q^{2^m}) and checks that the
/// chain embedding is multiplicative, lands in SL, and scales ranks of
/// differences by exactly `2^m`.
pub fn verify_embedding(q: u64, n: u32, m: usize, trials: usize, seed: u64) -> Result<EmbedReport> {
    let chain = EmbedChain::new(q, n, m)?;
    let top = chain.tower.top().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut max_disc = 0u64;
    let scale = 1u64 << m;
    for _ in 0..trials {
        let g = sample_sl(chain.source_dim(), &top, &mut rng);
        let h = sample_sl(chain.source_dim(), &top, &mut rng);
        let (ig, ih) = (chain.apply(&g)?, chain.apply(&h)?);
        let igh = chain.apply(&g.mul(&h))?;
        let product_ok = igh.mat() == &ig.mat().mul(ih.mat());
        let det_ok = ig.mat().det()?.0 == 1 && ih.mat().det()?.0 == 1;
        let rank_ext = g.mat().sub(h.mat()).rank() as u64;
        let rank_base = ig.mat().sub(ih.mat()).rank() as u64;
        let disc = rank_base.abs_diff(scale * rank_ext);
        max_disc = max_disc.max(disc);
        if !(product_ok && det_ok && disc == 0) {
            failures += 1;
        }
    }
    Ok(EmbedReport {
        config: EmbedConfig { q, n, m, seed },
        trials,
        failures,
        max_rank_discrepancy: max_disc,
        stages: chain.describe(),
    })
}
