//! Exact arithmetic in GF(p^h) and the quadratic extension tower
//! GF(q) ⊂ GF(q²) ⊂ GF(q⁴) ⊂ ….
//!
//! Elements are stored as integer codes. For a flat field GF(p^h) the code
//! is `Σ c_i p^i` over the polynomial-basis coordinates `c_0..c_{h-1}`. For a
//! quadratic extension over a base field of order `B` the element
//! `c0 + σ·c1` has code `c0 + c1·B`, so every level of the tower keeps the
//! pair structure of the level below it.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fields up to this order get exp/log tables for multiplication.
pub const LOG_TABLE_CAP: u64 = 1 << 16;
/// Fields up to this order get full addition and multiplication tables.
const FULL_TABLE_CAP: u64 = 256;
/// Default bound on base-field size for exhaustive irreducibility scans.
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1 << 16;
/// Largest field order supported anywhere in the crate.
pub const MAX_FIELD_ORDER: u64 = 1 << 32;

/// An element of a finite field, stored as its integer code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(transparent)]
pub struct Fq(pub u32);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A prime power `q = p^h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimePower {
    p: u32,
    h: u32,
    q: u64,
}

impl PrimePower {
    pub fn new(p: u32, h: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::usage(format!("{p} is not prime")));
        }
        if h == 0 {
            return Err(Error::usage("exponent h must be positive"));
        }
        let mut q = 1u64;
        for _ in 0..h {
            q = q
                .checked_mul(p as u64)
                .filter(|&q| q <= MAX_FIELD_ORDER)
                .ok_or_else(|| Error::usage(format!("{p}^{h} exceeds the supported field order")))?;
        }
        Ok(PrimePower { p, h, q })
    }

    /// Factors `q` as a prime power.
    pub fn from_order(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::usage(format!("q = {q} is not a prime power")));
        }
        let mut p = 2u64;
        while p * p <= q && !q.is_multiple_of(p) {
            p += 1;
        }
        if !q.is_multiple_of(p) {
            p = q;
        }
        let mut rest = q;
        let mut h = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            h += 1;
        }
        if rest != 1 {
            return Err(Error::usage(format!("q = {q} is not a prime power")));
        }
        PrimePower::new(p as u32, h)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn q(&self) -> u64 {
        self.q
    }
}

/// A flat model of GF(p^h): the prime power together with a monic
/// irreducible modulus over Z/p, coefficients listed from the constant term up.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldCtx {
    pub p: u32,
    pub h: u32,
    pub modulus: Vec<u32>,
}

impl FieldCtx {
    /// The model whose modulus is the lowest monic irreducible polynomial of
    /// degree `h`, ordering candidates by their lower coefficients read as a
    /// base-`p` number with the leading coefficient most significant.
    pub fn new(pp: PrimePower) -> Self {
        let p = pp.p;
        let h = pp.h as usize;
        for code in 0..pp.q {
            let mut poly = digits(code, p, h);
            poly.push(1);
            if poly_is_irreducible(&poly, p) {
                return FieldCtx { p, h: pp.h, modulus: poly };
            }
        }
        unreachable!("an irreducible polynomial of every degree exists over a finite field")
    }

    pub fn with_modulus(pp: PrimePower, modulus: Vec<u32>) -> Result<Self> {
        if modulus.len() != pp.h as usize + 1 {
            return Err(Error::usage(format!(
                "modulus must have {} coefficients, got {}",
                pp.h + 1,
                modulus.len()
            )));
        }
        if modulus.iter().any(|&c| c >= pp.p) || *modulus.last().unwrap() != 1 {
            return Err(Error::usage("modulus must be monic with coefficients in [0, p)"));
        }
        if !poly_is_irreducible(&modulus, pp.p) {
            return Err(Error::domain("modulus is reducible"));
        }
        Ok(FieldCtx { p: pp.p, h: pp.h, modulus })
    }

    pub fn prime_power(&self) -> PrimePower {
        PrimePower::new(self.p, self.h).expect("validated at construction")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: FieldCtx = serde_json::from_str(s).map_err(|e| Error::parse(e.to_string()))?;
        FieldCtx::with_modulus(PrimePower::new(raw.p, raw.h)?, raw.modulus)
    }
}

fn digits(mut code: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len + 1);
    for _ in 0..len {
        out.push((code % p as u64) as u32);
        code /= p as u64;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u64 {
    d.iter().rev().fold(0u64, |acc, &c| acc * p as u64 + c as u64)
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

/// Remainder of `a` modulo the monic polynomial `m` over Z/p.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let p64 = p as u64;
    let dm = m.len() - 1;
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    while r.len() > dm {
        let lead = r.pop().unwrap() % p64;
        if lead != 0 {
            let off = r.len() - dm;
            for (i, &mc) in m[..dm].iter().enumerate() {
                r[off + i] = (r[off + i] + p64 - lead * mc as u64 % p64) % p64;
            }
        }
    }
    r.into_iter().map(|c| c as u32).collect()
}

fn poly_is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    if deg == 1 {
        return true;
    }
    // Any reducible polynomial has a monic factor of degree <= deg/2.
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut f = digits(code, p, d);
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// How the irreducibility of a quadratic `x² − αx − β` was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IrreducibilityMethod {
    /// Every base element was checked not to be a root.
    Exhaustive,
    /// Rabin's test: the resultant of `x² − αx − β` and `x^Q − x` is nonzero.
    Rabin,
}

impl fmt::Display for IrreducibilityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrreducibilityMethod::Exhaustive => f.write_str("exhaustive"),
            IrreducibilityMethod::Rabin => f.write_str("rabin"),
        }
    }
}

#[derive(Debug)]
struct LogTables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

#[derive(Debug)]
enum Kind {
    Flat(FieldCtx),
    Quad {
        base: Field,
        alpha: Fq,
        beta: Fq,
        method: IrreducibilityMethod,
    },
}

#[derive(Debug)]
struct Inner {
    kind: Kind,
    order: u64,
    p: u32,
    degree: u32,
    add_tab: Option<Vec<u32>>,
    mul_tab: Option<Vec<u32>>,
    logs: Option<LogTables>,
}

/// A finite field, either a flat GF(p^h) or a quadratic extension of
/// another `Field`. Cheap to clone and safe to share between threads.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.order())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (&self.0.kind, &other.0.kind) {
            (Kind::Flat(a), Kind::Flat(b)) => a == b,
            (
                Kind::Quad { base: b1, alpha: a1, beta: c1, .. },
                Kind::Quad { base: b2, alpha: a2, beta: c2, .. },
            ) => a1 == a2 && c1 == c2 && b1 == b2,
            _ => false,
        }
    }
}

impl Eq for Field {}

/// Binary and unary operations accepted by [`Field::arithmetic`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Inv,
    Pow(u64),
}

impl Field {
    /// GF(p^h) with the default modulus.
    pub fn gf(p: u32, h: u32) -> Result<Field> {
        Ok(Field::from_ctx(FieldCtx::new(PrimePower::new(p, h)?)))
    }

    /// GF(q) for a prime power `q`.
    pub fn of_order(q: u64) -> Result<Field> {
        Ok(Field::from_ctx(FieldCtx::new(PrimePower::from_order(q)?)))
    }

    pub fn from_ctx(ctx: FieldCtx) -> Field {
        let order = (ctx.p as u64).pow(ctx.h);
        let p = ctx.p;
        let degree = ctx.h;
        Field::finish(Inner {
            kind: Kind::Flat(ctx),
            order,
            p,
            degree,
            add_tab: None,
            mul_tab: None,
            logs: None,
        })
    }

    fn finish(mut inner: Inner) -> Field {
        let prime = matches!(&inner.kind, Kind::Flat(c) if c.h == 1);
        if !prime && inner.order <= LOG_TABLE_CAP {
            let bare = Field(Arc::new(Inner {
                kind: std::mem::replace(&mut inner.kind, Kind::Flat(FieldCtx { p: 2, h: 1, modulus: vec![0, 1] })),
                order: inner.order,
                p: inner.p,
                degree: inner.degree,
                add_tab: None,
                mul_tab: None,
                logs: None,
            }));
            inner.logs = Some(bare.build_logs());
            if inner.order <= FULL_TABLE_CAP {
                let q = inner.order as u32;
                let mut add = Vec::with_capacity((q * q) as usize);
                let mut mul = Vec::with_capacity((q * q) as usize);
                for a in 0..q {
                    for b in 0..q {
                        add.push(bare.slow_add(Fq(a), Fq(b)).0);
                        mul.push(bare.slow_mul(Fq(a), Fq(b)).0);
                    }
                }
                inner.add_tab = Some(add);
                inner.mul_tab = Some(mul);
            }
            inner.kind = Arc::try_unwrap(bare.0).expect("sole owner").kind;
        }
        Field(Arc::new(inner))
    }

    fn build_logs(&self) -> LogTables {
        let q = self.order();
        let n = (q - 1) as usize;
        let mut exp = vec![0u32; n];
        for cand in 1..q as u32 {
            let g = Fq(cand);
            let mut x = Fq::ONE;
            let mut ok = true;
            for (i, slot) in exp.iter_mut().enumerate() {
                if i > 0 && x == Fq::ONE {
                    ok = false;
                    break;
                }
                *slot = x.0;
                x = self.slow_mul(x, g);
            }
            if ok && x == Fq::ONE {
                let mut log = vec![0u32; q as usize];
                for (i, &e) in exp.iter().enumerate() {
                    log[e as usize] = i as u32;
                }
                return LogTables { exp, log };
            }
        }
        unreachable!("the multiplicative group of a finite field is cyclic")
    }

    pub fn order(&self) -> u64 {
        self.0.order
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.0.degree
    }

    pub fn is_gf2(&self) -> bool {
        self.0.order == 2
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.degree == 1
    }

    /// The flat model, if this is not an extension built by the tower.
    pub fn ctx(&self) -> Option<&FieldCtx> {
        match &self.0.kind {
            Kind::Flat(c) => Some(c),
            Kind::Quad { .. } => None,
        }
    }

    /// The quadratic-extension view, if this field was built as one.
    pub fn as_quad(&self) -> Option<QuadExt> {
        match &self.0.kind {
            Kind::Quad { .. } => Some(QuadExt { field: self.clone() }),
            Kind::Flat(_) => None,
        }
    }

    #[inline]
    pub fn contains(&self, a: Fq) -> bool {
        (a.0 as u64) < self.0.order
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.0.order).map(|c| Fq(c as u32))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fq> {
        (1..self.0.order).map(|c| Fq(c as u32))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fq {
        Fq(rng.gen_range(0..self.0.order) as u32)
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fq {
        Fq(rng.gen_range(1..self.0.order) as u32)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> Fq {
        let p = self.0.p as i64;
        Fq(v.rem_euclid(p) as u32)
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        let inner = &*self.0;
        if inner.p == 2 {
            return Fq(a.0 ^ b.0);
        }
        if inner.degree == 1 {
            let s = a.0 as u64 + b.0 as u64;
            let p = inner.p as u64;
            return Fq(if s >= p { s - p } else { s } as u32);
        }
        if let Some(t) = &inner.add_tab {
            return Fq(t[(a.0 as u64 * inner.order + b.0 as u64) as usize]);
        }
        self.slow_add(a, b)
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        let inner = &*self.0;
        if inner.p == 2 || a.0 == 0 {
            return a;
        }
        if inner.degree == 1 {
            return Fq(inner.p - a.0);
        }
        self.slow_neg(a)
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        if self.0.p == 2 {
            return Fq(a.0 ^ b.0);
        }
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        let inner = &*self.0;
        if inner.degree == 1 {
            return Fq((a.0 as u64 * b.0 as u64 % inner.p as u64) as u32);
        }
        if let Some(t) = &inner.mul_tab {
            return Fq(t[(a.0 as u64 * inner.order + b.0 as u64) as usize]);
        }
        if let Some(l) = &inner.logs {
            if a.0 == 0 || b.0 == 0 {
                return Fq::ZERO;
            }
            let n = l.exp.len();
            let mut i = l.log[a.0 as usize] as usize + l.log[b.0 as usize] as usize;
            if i >= n {
                i -= n;
            }
            return Fq(l.exp[i]);
        }
        self.slow_mul(a, b)
    }

    pub fn try_inv(&self, a: Fq) -> Option<Fq> {
        if a.is_zero() {
            return None;
        }
        let inner = &*self.0;
        if inner.degree == 1 {
            return Some(Fq(inv_mod(a.0 as u64, inner.p as u64) as u32));
        }
        if let Some(l) = &inner.logs {
            let n = l.exp.len();
            let i = l.log[a.0 as usize] as usize;
            return Some(Fq(l.exp[(n - i) % n]));
        }
        match &inner.kind {
            Kind::Quad { base, .. } => {
                let ext = QuadExt { field: self.clone() };
                let norm = ext.norm(a);
                let ni = base.try_inv(norm)?;
                let (c0, c1) = ext.split(ext.conj(a));
                Some(ext.join(base.mul(c0, ni), base.mul(c1, ni)))
            }
            Kind::Flat(_) => Some(self.pow(a, inner.order - 2)),
        }
    }

    pub fn inv(&self, a: Fq) -> Result<Fq> {
        self.try_inv(a).ok_or_else(|| Error::domain("inverse of zero"))
    }

    pub fn div(&self, a: Fq, b: Fq) -> Result<Fq> {
        let bi = self.try_inv(b).ok_or_else(|| Error::domain("division by zero"))?;
        Ok(self.mul(a, bi))
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut base = a;
        let mut r = Fq::ONE;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        r
    }

    /// Applies one of the basic operations; `b` is ignored for unary ones.
    pub fn arithmetic(&self, a: Fq, b: Fq, op: FieldOp) -> Result<Fq> {
        if !self.contains(a) || !self.contains(b) {
            return Err(Error::usage("operand does not belong to this field"));
        }
        match op {
            FieldOp::Add => Ok(self.add(a, b)),
            FieldOp::Sub => Ok(self.sub(a, b)),
            FieldOp::Mul => Ok(self.mul(a, b)),
            FieldOp::Div => self.div(a, b),
            FieldOp::Inv => self.inv(a),
            FieldOp::Pow(e) => Ok(self.pow(a, e)),
        }
    }

    /// `dst[i] += c * src[i]` over the whole slice.
    pub fn axpy(&self, dst: &mut [Fq], src: &[Fq], c: Fq) {
        if c.is_zero() {
            return;
        }
        let inner = &*self.0;
        if inner.degree == 1 {
            let p = inner.p as u64;
            let c = c.0 as u64;
            for (d, s) in dst.iter_mut().zip(src) {
                d.0 = ((d.0 as u64 + c * s.0 as u64) % p) as u32;
            }
            return;
        }
        if inner.p == 2 && c == Fq::ONE {
            for (d, s) in dst.iter_mut().zip(src) {
                d.0 ^= s.0;
            }
            return;
        }
        for (d, s) in dst.iter_mut().zip(src) {
            if !s.is_zero() {
                *d = self.add(*d, self.mul(c, *s));
            }
        }
    }

    pub fn scale(&self, row: &mut [Fq], c: Fq) {
        for x in row.iter_mut() {
            *x = self.mul(*x, c);
        }
    }

    /// Polynomial-basis coordinates over the prime field. For extensions the
    /// coordinates of `c0` come first, then those of `c1`.
    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        match &self.0.kind {
            Kind::Flat(c) => digits(a.0 as u64, c.p, c.h as usize),
            Kind::Quad { base, .. } => {
                let b = base.order();
                let mut v = base.coeffs(Fq((a.0 as u64 % b) as u32));
                v.extend(base.coeffs(Fq((a.0 as u64 / b) as u32)));
                v
            }
        }
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Result<Fq> {
        if c.len() != self.0.degree as usize {
            return Err(Error::usage(format!(
                "expected {} coordinates, got {}",
                self.0.degree,
                c.len()
            )));
        }
        if c.iter().any(|&x| x >= self.0.p) {
            return Err(Error::usage("coordinate out of range [0, p)"));
        }
        match &self.0.kind {
            Kind::Flat(ctx) => Ok(Fq(undigits(c, ctx.p) as u32)),
            Kind::Quad { base, .. } => {
                let half = c.len() / 2;
                let c0 = base.from_coeffs(&c[..half])?;
                let c1 = base.from_coeffs(&c[half..])?;
                Ok(Fq((c0.0 as u64 + c1.0 as u64 * base.order()) as u32))
            }
        }
    }

    /// Text form: coordinate tuple such as `(1,0,1)`.
    pub fn format_elem(&self, a: Fq) -> String {
        let parts: Vec<String> = self.coeffs(a).iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(","))
    }

    /// Parses the tuple text form. A bare integer is accepted for prime fields.
    pub fn parse_elem(&self, s: &str) -> Result<Fq> {
        let t = s.trim();
        let body = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(t);
        let coords: std::result::Result<Vec<u32>, _> =
            body.split(',').map(|x| x.trim().parse::<u32>()).collect();
        let coords = coords.map_err(|e| Error::parse(format!("bad element '{s}': {e}")))?;
        self.from_coeffs(&coords)
    }

    fn slow_add(&self, a: Fq, b: Fq) -> Fq {
        match &self.0.kind {
            Kind::Flat(c) => {
                let x = digits(a.0 as u64, c.p, c.h as usize);
                let y = digits(b.0 as u64, c.p, c.h as usize);
                let s: Vec<u32> = x.iter().zip(&y).map(|(u, v)| (u + v) % c.p).collect();
                Fq(undigits(&s, c.p) as u32)
            }
            Kind::Quad { base, .. } => {
                let bo = base.order();
                let (a0, a1) = (Fq((a.0 as u64 % bo) as u32), Fq((a.0 as u64 / bo) as u32));
                let (b0, b1) = (Fq((b.0 as u64 % bo) as u32), Fq((b.0 as u64 / bo) as u32));
                let c0 = base.add(a0, b0);
                let c1 = base.add(a1, b1);
                Fq((c0.0 as u64 + c1.0 as u64 * bo) as u32)
            }
        }
    }

    fn slow_neg(&self, a: Fq) -> Fq {
        match &self.0.kind {
            Kind::Flat(c) => {
                let x = digits(a.0 as u64, c.p, c.h as usize);
                let s: Vec<u32> = x.iter().map(|&u| (c.p - u) % c.p).collect();
                Fq(undigits(&s, c.p) as u32)
            }
            Kind::Quad { base, .. } => {
                let bo = base.order();
                let c0 = base.neg(Fq((a.0 as u64 % bo) as u32));
                let c1 = base.neg(Fq((a.0 as u64 / bo) as u32));
                Fq((c0.0 as u64 + c1.0 as u64 * bo) as u32)
            }
        }
    }

    fn slow_mul(&self, a: Fq, b: Fq) -> Fq {
        match &self.0.kind {
            Kind::Flat(c) => {
                let h = c.h as usize;
                let p = c.p as u64;
                let x = digits(a.0 as u64, c.p, h);
                let y = digits(b.0 as u64, c.p, h);
                let mut prod = vec![0u64; 2 * h - 1];
                for (i, &u) in x.iter().enumerate() {
                    for (j, &v) in y.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + u as u64 * v as u64) % p;
                    }
                }
                let prod: Vec<u32> = prod.into_iter().map(|v| v as u32).collect();
                let mut r = poly_rem(&prod, &c.modulus, c.p);
                r.resize(h, 0);
                Fq(undigits(&r, c.p) as u32)
            }
            Kind::Quad { base, alpha, beta, .. } => {
                let bo = base.order();
                let (a0, a1) = (Fq((a.0 as u64 % bo) as u32), Fq((a.0 as u64 / bo) as u32));
                let (b0, b1) = (Fq((b.0 as u64 % bo) as u32), Fq((b.0 as u64 / bo) as u32));
                // (a0 + σa1)(b0 + σb1) with σ² = ασ + β
                let t = base.mul(a1, b1);
                let c0 = base.add(base.mul(a0, b0), base.mul(*beta, t));
                let c1 = base.add(
                    base.add(base.mul(a0, b1), base.mul(a1, b0)),
                    base.mul(*alpha, t),
                );
                Fq((c0.0 as u64 + c1.0 as u64 * bo) as u32)
            }
        }
    }
}

/// A quadratic extension `base(σ)` with `σ² = ασ + β`; a handle onto the
/// extension field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadExt {
    field: Field,
}

impl QuadExt {
    /// Builds the extension from explicit `(α, β)`, checking irreducibility.
    pub fn with_params(base: &Field, alpha: Fq, beta: Fq, exhaustive_cap: u64) -> Result<QuadExt> {
        if !base.contains(alpha) || !base.contains(beta) {
            return Err(Error::usage("alpha/beta not in base field"));
        }
        let order = base
            .order()
            .checked_mul(base.order())
            .filter(|&o| o <= MAX_FIELD_ORDER)
            .ok_or_else(|| Error::Resource {
                what: "extension field order".into(),
                needed: base.order().saturating_mul(base.order()),
                cap: MAX_FIELD_ORDER,
            })?;
        let method = match quadratic_is_irreducible(base, alpha, beta, exhaustive_cap) {
            (true, m) => m,
            (false, _) => return Err(Error::domain("x² − αx − β has a root in the base field")),
        };
        let field = Field::finish(Inner {
            kind: Kind::Quad { base: base.clone(), alpha, beta, method },
            order,
            p: base.characteristic(),
            degree: base.degree() * 2,
            add_tab: None,
            mul_tab: None,
            logs: None,
        });
        Ok(QuadExt { field })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn parts(&self) -> (&Field, Fq, Fq, IrreducibilityMethod) {
        match &self.field.0.kind {
            Kind::Quad { base, alpha, beta, method } => (base, *alpha, *beta, *method),
            Kind::Flat(_) => unreachable!("QuadExt always wraps an extension field"),
        }
    }

    pub fn base(&self) -> &Field {
        self.parts().0
    }

    pub fn alpha(&self) -> Fq {
        self.parts().1
    }

    pub fn beta(&self) -> Fq {
        self.parts().2
    }

    pub fn method(&self) -> IrreducibilityMethod {
        self.parts().3
    }

    /// The generator σ = (0, 1).
    pub fn sigma(&self) -> Fq {
        self.join(Fq::ZERO, Fq::ONE)
    }

    /// Splits `c0 + σc1` into `(c0, c1)`.
    #[inline]
    pub fn split(&self, x: Fq) -> (Fq, Fq) {
        let bo = self.base().order();
        (Fq((x.0 as u64 % bo) as u32), Fq((x.0 as u64 / bo) as u32))
    }

    #[inline]
    pub fn join(&self, c0: Fq, c1: Fq) -> Fq {
        Fq((c0.0 as u64 + c1.0 as u64 * self.base().order()) as u32)
    }

    /// Embeds a base element as `(c0, 0)`.
    pub fn lift(&self, c0: Fq) -> Fq {
        c0
    }

    /// The nontrivial automorphism over the base: σ ↦ α − σ.
    pub fn conj(&self, x: Fq) -> Fq {
        let (base, alpha, _, _) = self.parts();
        let (c0, c1) = self.split(x);
        self.join(base.add(c0, base.mul(alpha, c1)), base.neg(c1))
    }

    /// `x · conj(x)` as a base element.
    pub fn norm(&self, x: Fq) -> Fq {
        let (base, alpha, beta, _) = self.parts();
        let (c0, c1) = self.split(x);
        // c0² + α c0 c1 − β c1²
        let t = base.add(base.mul(c0, c0), base.mul(alpha, base.mul(c0, c1)));
        base.sub(t, base.mul(beta, base.mul(c1, c1)))
    }
}

/// Decides whether `x² − αx − β` has no root in `base`.
fn quadratic_is_irreducible(base: &Field, alpha: Fq, beta: Fq, cap: u64) -> (bool, IrreducibilityMethod) {
    if base.order() <= cap {
        let has_root = base.elements().any(|x| {
            let v = base.sub(base.sub(base.mul(x, x), base.mul(alpha, x)), beta);
            v.is_zero()
        });
        return (!has_root, IrreducibilityMethod::Exhaustive);
    }
    // Work in base[x]/(x² − αx − β) as pairs; compute r = x^Q and test
    // whether r − x is a unit, i.e. its resultant with the quadratic is nonzero.
    let mul = |a: (Fq, Fq), b: (Fq, Fq)| {
        let t = base.mul(a.1, b.1);
        (
            base.add(base.mul(a.0, b.0), base.mul(beta, t)),
            base.add(base.add(base.mul(a.0, b.1), base.mul(a.1, b.0)), base.mul(alpha, t)),
        )
    };
    let mut e = base.order();
    let mut acc = (Fq::ONE, Fq::ZERO);
    let mut sq = (Fq::ZERO, Fq::ONE);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, sq);
        }
        sq = mul(sq, sq);
        e >>= 1;
    }
    let (c0, c1) = (acc.0, base.sub(acc.1, Fq::ONE));
    let t = base.add(base.mul(c0, c0), base.mul(alpha, base.mul(c0, c1)));
    let res = base.sub(t, base.mul(beta, base.mul(c1, c1)));
    (!res.is_zero(), IrreducibilityMethod::Rabin)
}

/// Finds the first `(α, β)` making `x² − αx − β` irreducible, scanning β
/// over the nonzero codes in increasing order and, for each β, α upward from 0.
pub fn build_quad_ext(base: &Field) -> Result<QuadExt> {
    build_quad_ext_with_cap(base, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn build_quad_ext_with_cap(base: &Field, cap: u64) -> Result<QuadExt> {
    if base.order().saturating_mul(base.order()) > MAX_FIELD_ORDER {
        return Err(Error::Resource {
            what: "extension field order".into(),
            needed: base.order().saturating_mul(base.order()),
            cap: MAX_FIELD_ORDER,
        });
    }
    for beta in base.nonzero_elements() {
        for alpha in base.elements() {
            if quadratic_is_irreducible(base, alpha, beta, cap).0 {
                return QuadExt::with_params(base, alpha, beta, cap);
            }
        }
    }
    unreachable!("every finite field has an irreducible quadratic")
}

/// The tower GF(q) ⊂ GF(q²) ⊂ … ⊂ GF(q^{2^m}).
#[derive(Clone, Debug)]
pub struct Tower {
    base: Field,
    levels: Vec<QuadExt>,
}

impl Tower {
    /// The base field (level 0).
    pub fn base(&self) -> &Field {
        &self.base
    }

    /// Number of quadratic steps.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Field at level `k`, of order q^{2^k}.
    pub fn field(&self, k: usize) -> &Field {
        if k == 0 {
            &self.base
        } else {
            self.levels[k - 1].field()
        }
    }

    /// The extension step from level `k` to level `k + 1`.
    pub fn step(&self, k: usize) -> &QuadExt {
        &self.levels[k]
    }

    pub fn steps(&self) -> &[QuadExt] {
        &self.levels
    }

    pub fn top(&self) -> &Field {
        self.field(self.depth())
    }
}

pub fn build_tower(q: PrimePower, depth: usize) -> Result<Tower> {
    build_tower_with_cap(Field::from_ctx(FieldCtx::new(q)), depth, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn build_tower_over(base: Field, depth: usize) -> Result<Tower> {
    build_tower_with_cap(base, depth, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn build_tower_with_cap(base: Field, depth: usize, cap: u64) -> Result<Tower> {
    let mut levels: Vec<QuadExt> = Vec::with_capacity(depth);
    for _ in 0..depth {
        let below = levels.last().map(|e| e.field().clone()).unwrap_or_else(|| base.clone());
        levels.push(build_quad_ext_with_cap(&below, cap)?);
    }
    Ok(Tower { base, levels })
}

/// Up to this order the axiom scan in [`field_check`] visits every triple.
pub const EXHAUSTIVE_AXIOM_CAP: u64 = 256;
/// Random triples drawn by [`field_check`] above the exhaustive cap.
pub const RANDOM_AXIOM_TRIPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TowerStepReport {
    pub order: u64,
    pub alpha: String,
    pub beta: String,
    pub method: IrreducibilityMethod,
    /// Elements fixed by conjugation; must equal the base order.
    pub fixed_points: Option<u64>,
    pub automorphism_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldCheckReport {
    pub field: FieldCtx,
    /// `exhaustive` or `random`.
    pub axiom_scan: &'static str,
    pub axiom_failures: u64,
    pub inverse_failures: u64,
    pub tower: Vec<TowerStepReport>,
}

impl FieldCheckReport {
    pub fn passed(&self) -> bool {
        self.axiom_failures == 0 && self.inverse_failures == 0 && self.tower.iter().all(|t| t.automorphism_ok)
    }
}

fn axiom_failures(f: &Field, a: Fq, b: Fq, c: Fq) -> bool {
    f.add(f.add(a, b), c) != f.add(a, f.add(b, c))
        || f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c))
        || f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c))
}

/// Checks associativity and distributivity (every triple for small fields,
/// random triples otherwise), that every nonzero element of fields up to
/// 2^16 is invertible, and that conjugation at each tower step is an
/// automorphism fixing exactly the base field.
pub fn field_check<R: Rng + ?Sized>(q: u64, depth: usize, rng: &mut R) -> Result<FieldCheckReport> {
    let pp = PrimePower::from_order(q)?;
    let ctx = FieldCtx::new(pp);
    let f = Field::from_ctx(ctx.clone());
    let mut axiom = 0u64;
    let exhaustive = q <= EXHAUSTIVE_AXIOM_CAP;
    if exhaustive {
        for a in f.elements() {
            for b in f.elements() {
                for c in f.elements() {
                    axiom += u64::from(axiom_failures(&f, a, b, c));
                }
            }
        }
    } else {
        for _ in 0..RANDOM_AXIOM_TRIPLES {
            let (a, b, c) = (f.random(rng), f.random(rng), f.random(rng));
            axiom += u64::from(axiom_failures(&f, a, b, c));
        }
    }
    let inverse = if q <= LOG_TABLE_CAP {
        f.nonzero_elements().filter(|&a| f.try_inv(a).is_none_or(|i| f.mul(a, i) != Fq::ONE)).count() as u64
    } else {
        (0..RANDOM_AXIOM_TRIPLES)
            .map(|_| f.random_nonzero(rng))
            .filter(|&a| f.try_inv(a).is_none_or(|i| f.mul(a, i) != Fq::ONE))
            .count() as u64
    };
    let tower = build_tower(pp, depth)?;
    let steps = tower
        .steps()
        .iter()
        .map(|ext| {
            let big = ext.field();
            let hom = |x: Fq, y: Fq| {
                ext.conj(big.add(x, y)) == big.add(ext.conj(x), ext.conj(y))
                    && ext.conj(big.mul(x, y)) == big.mul(ext.conj(x), ext.conj(y))
                    && ext.conj(ext.conj(x)) == x
            };
            let (fixed, ok) = if big.order() <= EXHAUSTIVE_AXIOM_CAP {
                let fixed = big.elements().filter(|&x| ext.conj(x) == x).count() as u64;
                let ok = big.elements().all(|x| big.elements().all(|y| hom(x, y)));
                (Some(fixed), ok && fixed == ext.base().order())
            } else {
                let ok = (0..RANDOM_AXIOM_TRIPLES).all(|_| hom(big.random(rng), big.random(rng)));
                (None, ok)
            };
            TowerStepReport {
                order: big.order(),
                alpha: ext.base().format_elem(ext.alpha()),
                beta: ext.base().format_elem(ext.beta()),
                method: ext.method(),
                fixed_points: fixed,
                automorphism_ok: ok,
            }
        })
        .collect();
    Ok(FieldCheckReport {
        field: ctx,
        axiom_scan: if exhaustive { "exhaustive" } else { "random" },
        axiom_failures: axiom,
        inverse_failures: inverse,
        tower: steps,
    })
}
