//! Partial-permutation representations of Z^d and the discrete Heisenberg
//! group on Følner boxes, their extension to group-ring elements, and the
//! normalized ranks that witness 1-discreteness.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Fq};
use crate::matgf::{MatF, Rational};

/// Default cap on `|F_n|`.
pub const DEFAULT_SET_CAP: usize = 1 << 14;

/// Group elements are integer tuples.
pub type Elem = Vec<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmenableGroup {
    /// Z^d under addition.
    FreeAbelian(usize),
    /// Integer triples with `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
    Heisenberg,
}

impl fmt::Display for AmenableGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmenableGroup::FreeAbelian(d) => write!(f, "z:{d}"),
            AmenableGroup::Heisenberg => write!(f, "heisenberg"),
        }
    }
}

impl std::str::FromStr for AmenableGroup {
    type Err = Error;

    /// `z:d` or `heisenberg`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("heisenberg") {
            return Ok(AmenableGroup::Heisenberg);
        }
        match s.strip_prefix("z:").or_else(|| s.strip_prefix("Z:")) {
            Some(d) => match d.parse::<usize>() {
                Ok(d) if d >= 1 => Ok(AmenableGroup::FreeAbelian(d)),
                _ => Err(Error::parse(format!("bad rank in group spec {s:?}"))),
            },
            None => Err(Error::parse(format!("unknown group {s:?}; use z:d or heisenberg"))),
        }
    }
}

impl AmenableGroup {
    /// Length of an element tuple.
    pub fn arity(&self) -> usize {
        match self {
            AmenableGroup::FreeAbelian(d) => *d,
            AmenableGroup::Heisenberg => 3,
        }
    }

    pub fn identity(&self) -> Elem {
        vec![0; self.arity()]
    }

    pub fn check(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.arity() {
            return Err(Error::usage(format!("{self} elements have {} coordinates", self.arity())));
        }
        Ok(())
    }

    pub fn mul(&self, x: &[i64], y: &[i64]) -> Elem {
        match self {
            AmenableGroup::FreeAbelian(_) => x.iter().zip(y).map(|(a, b)| a + b).collect(),
            AmenableGroup::Heisenberg => vec![x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]],
        }
    }

    pub fn inverse(&self, x: &[i64]) -> Elem {
        match self {
            AmenableGroup::FreeAbelian(_) => x.iter().map(|a| -a).collect(),
            AmenableGroup::Heisenberg => vec![-x[0], -x[1], x[0] * x[1] - x[2]],
        }
    }

    /// The constant `c_h` with `|L_n^h| / |F_n| ≥ 1 − c_h 2^{−n}`.
    pub fn boundary_constant(&self, h: &[i64]) -> u64 {
        match self {
            AmenableGroup::FreeAbelian(d) => *d as u64 * h.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0),
            AmenableGroup::Heisenberg => 2 * h[0].unsigned_abs() + h[1].unsigned_abs() + h[2].unsigned_abs(),
        }
    }

    /// Parses `(a,b,...)`, or a bare integer for Z.
    pub fn parse_elem(&self, s: &str) -> Result<Elem> {
        let t = s.trim();
        let body = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
        let x = body
            .split(',')
            .map(|p| p.trim().parse::<i64>().map_err(|_| Error::parse(format!("bad element {s:?}"))))
            .collect::<Result<Elem>>()?;
        self.check(&x)?;
        Ok(x)
    }

    pub fn format_elem(x: &[i64]) -> String {
        let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// The Følner boxes `F_n`: `[0, 2ⁿ)^d` for Z^d and
/// `[0, 2ⁿ) × [0, 2ⁿ) × [0, 4ⁿ)` for the Heisenberg group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FolnerSpec {
    group: AmenableGroup,
    cap: usize,
}

impl FolnerSpec {
    pub fn new(group: AmenableGroup) -> FolnerSpec {
        FolnerSpec { group, cap: DEFAULT_SET_CAP }
    }

    pub fn with_cap(group: AmenableGroup, cap: usize) -> FolnerSpec {
        FolnerSpec { group, cap }
    }

    pub fn group(&self) -> AmenableGroup {
        self.group
    }

    fn extents(&self, n: u32) -> Vec<i64> {
        let side = 1i64.checked_shl(n).unwrap_or(i64::MAX);
        match self.group {
            AmenableGroup::FreeAbelian(d) => vec![side; d],
            AmenableGroup::Heisenberg => vec![side, side, side.saturating_mul(side)],
        }
    }

    /// `|F_n|`, saturating.
    pub fn size(&self, n: u32) -> u128 {
        self.extents(n).iter().fold(1u128, |acc, &e| acc.saturating_mul(e as u128))
    }

    fn checked_size(&self, n: u32) -> Result<usize> {
        let s = self.size(n);
        if s > self.cap as u128 {
            return Err(Error::Resource {
                what: format!("Folner set F_{n} of {}", self.group),
                needed: s.min(u64::MAX as u128) as u64,
                cap: self.cap as u64,
            });
        }
        Ok(s as usize)
    }

    /// Position of `x` in `F_n` (first coordinate fastest), if inside.
    pub fn index(&self, n: u32, x: &[i64]) -> Option<usize> {
        let ext = self.extents(n);
        let mut idx = 0usize;
        for (&v, &e) in x.iter().zip(&ext).rev() {
            if v < 0 || v >= e {
                return None;
            }
            idx = idx * e as usize + v as usize;
        }
        Some(idx)
    }

    /// Elements of `F_n` in index order.
    pub fn elements(&self, n: u32) -> Result<Vec<Elem>> {
        let size = self.checked_size(n)?;
        let ext = self.extents(n);
        Ok((0..size)
            .map(|mut i| {
                ext.iter()
                    .map(|&e| {
                        let v = (i % e as usize) as i64;
                        i /= e as usize;
                        v
                    })
                    .collect()
            })
            .collect())
    }

    /// `D_n = {0, 2ⁿ}^d`, with `F_{n+1}` the disjoint union of the
    /// translates `F_n + c`. Only Z^d tiles this way.
    pub fn tiles(&self, n: u32) -> Result<Vec<Elem>> {
        let AmenableGroup::FreeAbelian(d) = self.group else {
            return Err(Error::usage("nested tilings exist only for z:d"));
        };
        let side = 1i64 << n;
        Ok((0..1usize << d).map(|m| (0..d).map(|i| if m >> i & 1 == 1 { side } else { 0 }).collect()).collect())
    }

    /// `L_n^S = {x ∈ F_n : s·x ∈ F_n for all s ∈ S}` as a membership mask.
    pub fn domain_mask(&self, n: u32, support: &[Elem]) -> Result<Vec<bool>> {
        Ok(self
            .elements(n)?
            .iter()
            .map(|x| support.iter().all(|s| self.index(n, &self.group.mul(s, x)).is_some()))
            .collect())
    }
}

/// A finitely supported `F_q`-valued function on the group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingElement {
    field: Field,
    terms: BTreeMap<Elem, Fq>,
}

impl GroupRingElement {
    pub fn zero(field: &Field) -> GroupRingElement {
        GroupRingElement { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn from_terms(field: &Field, terms: impl IntoIterator<Item = (Elem, Fq)>) -> GroupRingElement {
        let mut a = GroupRingElement::zero(field);
        for (g, c) in terms {
            a.add_term(g, c);
        }
        a
    }

    /// The basis element `1·g`.
    pub fn basis(field: &Field, g: Elem) -> GroupRingElement {
        GroupRingElement::from_terms(field, [(g, Fq::ONE)])
    }

    /// Adds `c·g`, dropping the term if the coefficient cancels.
    pub fn add_term(&mut self, g: Elem, c: Fq) {
        let f = self.field.clone();
        let v = f.add(self.terms.get(&g).copied().unwrap_or(Fq::ZERO), c);
        if v.is_zero() {
            self.terms.remove(&g);
        } else {
            self.terms.insert(g, v);
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn support(&self) -> Vec<Elem> {
        self.terms.keys().cloned().collect()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Elem, &Fq)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Parses `c*(x,..)+c*(x,..)`; a missing coefficient means 1, and
    /// coefficients use the field's element text form.
    pub fn parse(s: &str, group: AmenableGroup, field: &Field) -> Result<GroupRingElement> {
        let mut a = GroupRingElement::zero(field);
        let mut depth = 0i32;
        let mut start = 0;
        let mut pieces = Vec::new();
        for (i, ch) in s.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' if depth == 0 => {
                    pieces.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        pieces.push(&s[start..]);
        for p in pieces.into_iter().map(str::trim).filter(|p| !p.is_empty()) {
            let (c, g) = match p.rfind('*') {
                Some(k) => (field.parse_elem(&p[..k])?, &p[k + 1..]),
                None => (Fq::ONE, p),
            };
            a.add_term(group.parse_elem(g)?, c);
        }
        Ok(a)
    }

    /// Sum of boundary constants over the support.
    pub fn boundary_constant(&self, group: AmenableGroup) -> u64 {
        self.terms.keys().map(|s| group.boundary_constant(s)).sum()
    }
}

/// The matrix of `h` acting by left translation on `L_n^h` and by 0 on the
/// rest of `F_n`: column `e_x` is `e_{hx}` for `x ∈ L_n^h` and zero otherwise.
pub fn folner_rep(h: &[i64], spec: &FolnerSpec, n: u32, field: &Field) -> Result<MatF> {
    ring_rep(&GroupRingElement::basis(field, h.to_vec()), spec, n)
}

/// Column `e_x` is `Σ_s a(s) e_{sx}` when `x ∈ L_n^a` (every `sx` stays in
/// `F_n`) and zero otherwise.
pub fn ring_rep(a: &GroupRingElement, spec: &FolnerSpec, n: u32) -> Result<MatF> {
    let elems = spec.elements(n)?;
    for s in a.terms.keys() {
        spec.group.check(s)?;
    }
    let f = a.field();
    let mut m = MatF::zeros(elems.len(), elems.len(), f);
    'cols: for (col, x) in elems.iter().enumerate() {
        let mut targets = Vec::with_capacity(a.terms.len());
        for (s, &c) in &a.terms {
            match spec.index(n, &spec.group.mul(s, x)) {
                Some(row) => targets.push((row, c)),
                None => continue 'cols,
            }
        }
        for (row, c) in targets {
            m.set(row, col, f.add(m.get(row, col), c));
        }
    }
    Ok(m)
}

/// `rank(ring_rep(a)) / |F_n|`.
pub fn normalized_rank(a: &GroupRingElement, spec: &FolnerSpec, n: u32) -> Result<Rational> {
    let m = ring_rep(a, spec, n)?;
    Ok(Rational::new(m.rank() as u64, m.rows() as u64))
}

/// `|L_n^S|`.
pub fn domain_size(spec: &FolnerSpec, n: u32, support: &[Elem]) -> Result<usize> {
    Ok(spec.domain_mask(n, support)?.iter().filter(|&&b| b).count())
}

/// Whether the columns of `ring_rep(a)` indexed by `L_n^a` are linearly
/// independent.
pub fn domain_columns_independent(a: &GroupRingElement, spec: &FolnerSpec, n: u32) -> Result<bool> {
    let m = ring_rep(a, spec, n)?;
    let mask = spec.domain_mask(n, &a.support())?;
    let cols: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let sub = MatF::from_fn(m.rows(), cols.len().max(1), a.field(), |r, c| {
        cols.get(c).map_or(Fq::ZERO, |&col| m.get(r, col))
    });
    Ok(sub.rank() == cols.len())
}

/// Per-level `rank(rep(g) − rep(h)) / |F_n|` for `n` in `levels`.
pub fn discreteness_profile(
    g: &[i64],
    h: &[i64],
    spec: &FolnerSpec,
    levels: &[u32],
    field: &Field,
) -> Result<Vec<Rational>> {
    levels
        .iter()
        .map(|&n| {
            let d = folner_rep(g, spec, n, field)?.sub(&folner_rep(h, spec, n, field)?);
            Ok(Rational::new(d.rank() as u64, d.rows() as u64))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NestingReport {
    pub n: u32,
    pub size_next: usize,
    pub domain: usize,
    pub tiles: usize,
    /// `d(promotion, rep_{n+1}(h))`.
    pub distance: Rational,
    /// `(|F_{n+1}| − Σ_c |L_n^h|) / |F_{n+1}|`.
    pub boundary: Rational,
    pub within: bool,
}

/// Compares `folner_rep(h, n + 1)` with the block-diagonal copy of
/// `folner_rep(h, n)` along the tiling `F_{n+1} = ⊔_c (F_n + c)`.
pub fn nesting_check(spec: &FolnerSpec, h: &[i64], n: u32, field: &Field) -> Result<NestingReport> {
    let tiles = spec.tiles(n)?;
    spec.group.check(h)?;
    let small = spec.elements(n)?;
    let next = spec.elements(n + 1)?;
    let mut promo = MatF::zeros(next.len(), next.len(), field);
    let mut domain = 0;
    for x in &small {
        let Some(hx) = spec.index(n, &spec.group.mul(h, x)) else {
            continue;
        };
        domain += 1;
        for c in &tiles {
            let col = spec.index(n + 1, &spec.group.mul(x, c)).expect("tile inside F_{n+1}");
            let row = spec.index(n + 1, &spec.group.mul(&small[hx], c)).expect("tile inside F_{n+1}");
            promo.set(row, col, Fq::ONE);
        }
    }
    let full = folner_rep(h, spec, n + 1, field)?;
    let size_next = next.len();
    let distance = Rational::new(promo.sub(&full).rank() as u64, size_next as u64);
    let boundary = Rational::new((size_next - tiles.len() * domain) as u64, size_next as u64);
    Ok(NestingReport { n, size_next, domain, tiles: tiles.len(), distance, boundary, within: distance <= boundary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf2() -> Field {
        Field::of_order(2).unwrap()
    }

    #[test]
    fn heisenberg_axioms() {
        let g = AmenableGroup::Heisenberg;
        let (x, y, z) = (vec![1, -2, 3], vec![4, 5, -6], vec![-7, 8, 9]);
        assert_eq!(g.mul(&g.mul(&x, &y), &z), g.mul(&x, &g.mul(&y, &z)));
        assert_eq!(g.mul(&x, &g.inverse(&x)), g.identity());
        assert_eq!(g.mul(&g.inverse(&x), &x), g.identity());
    }

    #[test]
    fn identity_rep_is_identity() {
        let spec = FolnerSpec::new(AmenableGroup::FreeAbelian(2));
        assert!(folner_rep(&[0, 0], &spec, 3, &gf2()).unwrap().is_identity());
    }

    #[test]
    fn shift_ranks() {
        let z = FolnerSpec::new(AmenableGroup::FreeAbelian(1));
        assert_eq!(folner_rep(&[1], &z, 5, &gf2()).unwrap().rank(), 31);
        let z2 = FolnerSpec::new(AmenableGroup::FreeAbelian(2));
        assert_eq!(folner_rep(&[1, 0], &z2, 3, &gf2()).unwrap().rank(), 8 * 7);
    }

    #[test]
    fn ring_examples() {
        let f = gf2();
        let z = FolnerSpec::new(AmenableGroup::FreeAbelian(1));
        assert!(ring_rep(&GroupRingElement::zero(&f), &z, 4).unwrap().is_zero());
        let a = GroupRingElement::parse("1*(0)+(1)", AmenableGroup::FreeAbelian(1), &f).unwrap();
        assert_eq!(ring_rep(&a, &z, 4).unwrap().rank(), 15);
        let one = GroupRingElement::basis(&f, vec![0]);
        assert_eq!(normalized_rank(&one, &z, 4).unwrap(), Rational::from_integer(1));
        let t = GroupRingElement::basis(&f, vec![1]);
        assert_eq!(ring_rep(&t, &z, 4).unwrap(), folner_rep(&[1], &z, 4, &f).unwrap());
        let cancel = GroupRingElement::parse("(1)+(1)", AmenableGroup::FreeAbelian(1), &f).unwrap();
        assert!(cancel.is_zero());
    }

    #[test]
    fn cap_and_tiles() {
        let h = FolnerSpec::new(AmenableGroup::Heisenberg);
        assert_eq!(h.size(3), 4096);
        assert!(matches!(h.elements(4), Err(Error::Resource { .. })));
        assert!(h.tiles(1).is_err());
        let z2 = FolnerSpec::new(AmenableGroup::FreeAbelian(2));
        let tiles = z2.tiles(2).unwrap();
        let mut seen = [false; 64];
        for x in z2.elements(2).unwrap() {
            for c in &tiles {
                let i = z2.index(3, &z2.group().mul(&x, c)).unwrap();
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn nesting_identity() {
        let z = FolnerSpec::new(AmenableGroup::FreeAbelian(1));
        let r = nesting_check(&z, &[0], 3, &gf2()).unwrap();
        assert_eq!(r.distance, Rational::from_integer(0));
        assert_eq!(r.boundary, Rational::from_integer(0));
    }
}
