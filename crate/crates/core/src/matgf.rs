//! Dense exact matrices over a [`Field`], the normalized rank metric and
//! uniform sampling from SL_n(q).
//!
//! Matrices over GF(2) are always stored bit-packed; every other field uses
//! a row-major vector of element codes. The public surface is identical for
//! both.

use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitmat::BitMatrix;
use crate::error::{Error, Result};
use crate::field::{Field, FieldCtx, Fq};

/// Exact rationals used for every distance.
pub type Rational = Ratio<u64>;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Store {
    Dense(Vec<Fq>),
    Bits(BitMatrix),
}

#[derive(Clone)]
pub struct MatF {
    rows: usize,
    cols: usize,
    field: Field,
    store: Store,
}

impl PartialEq for MatF {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.store == other.store
            && self.field == other.field
    }
}

impl Eq for MatF {}

impl Hash for MatF {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.store.hash(state);
    }
}

impl fmt::Debug for MatF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatF {}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).0.to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl MatF {
    pub fn zeros(rows: usize, cols: usize, field: &Field) -> MatF {
        let store = if field.is_gf2() {
            Store::Bits(BitMatrix::zeros(rows, cols))
        } else {
            Store::Dense(vec![Fq::ZERO; rows * cols])
        };
        MatF { rows, cols, field: field.clone(), store }
    }

    pub fn identity(n: usize, field: &Field) -> MatF {
        MatF::scalar(n, Fq::ONE, field)
    }

    /// `z · id`.
    pub fn scalar(n: usize, z: Fq, field: &Field) -> MatF {
        let mut m = MatF::zeros(n, n, field);
        for i in 0..n {
            m.set(i, i, z);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, field: &Field, mut f: impl FnMut(usize, usize) -> Fq) -> MatF {
        let mut m = MatF::zeros(rows, cols, field);
        for r in 0..rows {
            for c in 0..cols {
                let v = f(r, c);
                if !v.is_zero() {
                    m.set(r, c, v);
                }
            }
        }
        m
    }

    pub fn from_rows(field: &Field, rows: &[Vec<Fq>]) -> Result<MatF> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if nrows == 0 || ncols == 0 {
            return Err(Error::usage("matrix must have positive dimensions"));
        }
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::usage("ragged rows"));
        }
        if rows.iter().flatten().any(|&x| !field.contains(x)) {
            return Err(Error::usage("entry not in field"));
        }
        Ok(MatF::from_fn(nrows, ncols, field, |r, c| rows[r][c]))
    }

    /// Builds from small integers reduced into the prime subfield.
    pub fn from_ints(field: &Field, rows: &[&[i64]]) -> Result<MatF> {
        let v: Vec<Vec<Fq>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| field.from_int(x)).collect())
            .collect();
        MatF::from_rows(field, &v)
    }

    pub fn from_bits(bits: BitMatrix, field: &Field) -> MatF {
        assert!(field.is_gf2(), "bit-packed storage is only for GF(2)");
        MatF { rows: bits.rows(), cols: bits.cols(), field: field.clone(), store: Store::Bits(bits) }
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, field: &Field, rng: &mut R) -> MatF {
        if field.is_gf2() {
            return MatF::from_bits(BitMatrix::random(rows, cols, rng), field);
        }
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        MatF { rows, cols, field: field.clone(), store: Store::Dense(data) }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn bits(&self) -> Option<&BitMatrix> {
        match &self.store {
            Store::Bits(b) => Some(b),
            Store::Dense(_) => None,
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fq {
        match &self.store {
            Store::Dense(d) => d[r * self.cols + c],
            Store::Bits(b) => Fq(b.get(r, c) as u32),
        }
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fq) {
        debug_assert!(self.field.contains(v));
        match &mut self.store {
            Store::Dense(d) => d[r * self.cols + c] = v,
            Store::Bits(b) => b.set(r, c, v.0 == 1),
        }
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<Fq> {
        match &self.store {
            Store::Dense(d) => d.clone(),
            Store::Bits(_) => (0..self.rows)
                .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
                .map(|(r, c)| self.get(r, c))
                .collect(),
        }
    }

    pub fn column(&self, c: usize) -> Vec<Fq> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        match &self.store {
            Store::Dense(d) => d.iter().all(|x| x.is_zero()),
            Store::Bits(b) => b.is_zero(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == MatF::identity(self.rows, &self.field)
    }

    /// The scalar `z` if this is `z · id`.
    pub fn as_scalar(&self) -> Option<Fq> {
        if !self.is_square() {
            return None;
        }
        let z = self.get(0, 0);
        (*self == MatF::scalar(self.rows, z, &self.field)).then_some(z)
    }

    fn check_same_shape(&self, other: &MatF) -> Result<()> {
        if self.field != other.field {
            return Err(Error::usage("matrices live over different fields"));
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::usage(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &MatF) -> Result<MatF> {
        self.check_same_shape(other)?;
        Ok(self.combine(other, false))
    }

    pub fn try_sub(&self, other: &MatF) -> Result<MatF> {
        self.check_same_shape(other)?;
        Ok(self.combine(other, true))
    }

    /// Panics on a shape or field mismatch; see [`MatF::try_add`].
    pub fn add(&self, other: &MatF) -> MatF {
        self.try_add(other).expect("matrix add")
    }

    /// Panics on a shape or field mismatch; see [`MatF::try_sub`].
    pub fn sub(&self, other: &MatF) -> MatF {
        self.try_sub(other).expect("matrix sub")
    }

    fn combine(&self, other: &MatF, subtract: bool) -> MatF {
        let store = match (&self.store, &other.store) {
            (Store::Bits(a), Store::Bits(b)) => {
                let mut c = a.clone();
                c.xor_assign(b);
                Store::Bits(c)
            }
            (Store::Dense(a), Store::Dense(b)) => Store::Dense(
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| if subtract { self.field.sub(x, y) } else { self.field.add(x, y) })
                    .collect(),
            ),
            _ => unreachable!("storage is determined by the field"),
        };
        MatF { rows: self.rows, cols: self.cols, field: self.field.clone(), store }
    }

    pub fn try_mul(&self, other: &MatF) -> Result<MatF> {
        if self.field != other.field {
            return Err(Error::usage("matrices live over different fields"));
        }
        if self.cols != other.rows {
            return Err(Error::usage(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let store = match (&self.store, &other.store) {
            (Store::Bits(a), Store::Bits(b)) => Store::Bits(a.mul(b)),
            (Store::Dense(a), Store::Dense(b)) => {
                let (n, k, m) = (self.rows, self.cols, other.cols);
                let mut out = vec![Fq::ZERO; n * m];
                for i in 0..n {
                    let dst = &mut out[i * m..(i + 1) * m];
                    for t in 0..k {
                        let c = a[i * k + t];
                        if !c.is_zero() {
                            self.field.axpy(dst, &b[t * m..(t + 1) * m], c);
                        }
                    }
                }
                Store::Dense(out)
            }
            _ => unreachable!("storage is determined by the field"),
        };
        Ok(MatF { rows: self.rows, cols: other.cols, field: self.field.clone(), store })
    }

    /// Panics on a shape or field mismatch; see [`MatF::try_mul`].
    pub fn mul(&self, other: &MatF) -> MatF {
        self.try_mul(other).expect("matrix mul")
    }

    pub fn mul_vec(&self, v: &[Fq]) -> Vec<Fq> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                (0..self.cols).fold(Fq::ZERO, |acc, c| {
                    self.field.add(acc, self.field.mul(self.get(r, c), v[c]))
                })
            })
            .collect()
    }

    pub fn scale(&self, c: Fq) -> MatF {
        MatF::from_fn(self.rows, self.cols, &self.field, |r, k| self.field.mul(c, self.get(r, k)))
    }

    pub fn transpose(&self) -> MatF {
        if let Store::Bits(b) = &self.store {
            return MatF::from_bits(b.transpose(), &self.field);
        }
        MatF::from_fn(self.cols, self.rows, &self.field, |r, c| self.get(c, r))
    }

    /// Places `self` at row/column offset `(r0, c0)` inside `target`.
    pub fn write_into(&self, target: &mut MatF, r0: usize, c0: usize) {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if !v.is_zero() || !target.get(r0 + r, c0 + c).is_zero() {
                    target.set(r0 + r, c0 + c, v);
                }
            }
        }
    }

    /// `[[a, b], [c, d]]` from four equally sized square blocks.
    pub fn from_blocks(a: &MatF, b: &MatF, c: &MatF, d: &MatF) -> Result<MatF> {
        for m in [b, c, d] {
            a.check_same_shape(m)?;
        }
        let (r, k) = (a.rows, a.cols);
        let mut out = MatF::zeros(2 * r, 2 * k, &a.field);
        a.write_into(&mut out, 0, 0);
        b.write_into(&mut out, 0, k);
        c.write_into(&mut out, r, 0);
        d.write_into(&mut out, r, k);
        Ok(out)
    }

    pub fn block_diag(&self, other: &MatF) -> MatF {
        assert_eq!(self.field, other.field);
        let mut out = MatF::zeros(self.rows + other.rows, self.cols + other.cols, &self.field);
        self.write_into(&mut out, 0, 0);
        other.write_into(&mut out, self.rows, self.cols);
        out
    }

    /// Maps every entry through `f`, possibly into another field.
    pub fn map_entries(&self, field: &Field, mut f: impl FnMut(Fq) -> Fq) -> MatF {
        MatF::from_fn(self.rows, self.cols, field, |r, c| f(self.get(r, c)))
    }

    pub fn rank(&self) -> usize {
        match &self.store {
            Store::Bits(b) => b.rank(),
            Store::Dense(d) => dense_eliminate(&self.field, d.clone(), self.rows, self.cols).0,
        }
    }

    pub fn det(&self) -> Result<Fq> {
        if !self.is_square() {
            return Err(Error::usage("determinant of a non-square matrix"));
        }
        Ok(match &self.store {
            Store::Bits(b) => Fq((b.rank() == self.rows) as u32),
            Store::Dense(d) => dense_eliminate(&self.field, d.clone(), self.rows, self.cols).1,
        })
    }

    /// Determinant and, when it is nonzero, the inverse.
    pub fn det_inv(&self) -> Result<(Fq, Option<MatF>)> {
        if !self.is_square() {
            return Err(Error::usage("det_inv of a non-square matrix"));
        }
        if let Store::Bits(b) = &self.store {
            return Ok(match b.inverse() {
                Some(inv) => (Fq::ONE, Some(MatF::from_bits(inv, &self.field))),
                None => (Fq::ZERO, None),
            });
        }
        let n = self.rows;
        let f = &self.field;
        let Store::Dense(d) = &self.store else { unreachable!() };
        let w = 2 * n;
        let mut a = vec![Fq::ZERO; n * w];
        for r in 0..n {
            a[r * w..r * w + n].copy_from_slice(&d[r * n..(r + 1) * n]);
            a[r * w + n + r] = Fq::ONE;
        }
        let mut det = Fq::ONE;
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| !a[r * w + c].is_zero()) else {
                return Ok((Fq::ZERO, None));
            };
            if piv != c {
                for k in 0..w {
                    a.swap(piv * w + k, c * w + k);
                }
                det = f.neg(det);
            }
            let pv = a[c * w + c];
            det = f.mul(det, pv);
            let pinv = f.inv(pv).expect("pivot is nonzero");
            f.scale(&mut a[c * w..(c + 1) * w], pinv);
            let prow: Vec<Fq> = a[c * w..(c + 1) * w].to_vec();
            for r in 0..n {
                if r != c {
                    let factor = a[r * w + c];
                    if !factor.is_zero() {
                        f.axpy(&mut a[r * w..(r + 1) * w], &prow, f.neg(factor));
                    }
                }
            }
        }
        let inv = MatF::from_fn(n, n, f, |r, c| a[r * w + n + c]);
        Ok((det, Some(inv)))
    }

    pub fn inverse(&self) -> Option<MatF> {
        self.det_inv().ok().and_then(|(_, inv)| inv)
    }

    /// Text form: header `rows cols q`, then one line per row of element tuples.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.rows, self.cols, self.field.order());
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.field.format_elem(self.get(r, c))).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses [`MatF::to_text`] output. Without an explicit field the header's
    /// `q` selects the default model of GF(q).
    pub fn parse_text(s: &str, field: Option<&Field>) -> Result<MatF> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::parse("empty matrix text"))?;
        let nums: std::result::Result<Vec<u64>, _> = header.split_whitespace().map(str::parse).collect();
        let nums = nums.map_err(|e| Error::parse(format!("bad header '{header}': {e}")))?;
        let [rows, cols, q] = nums[..] else {
            return Err(Error::parse(format!("header must be 'rows cols q', got '{header}'")));
        };
        let field = match field {
            Some(f) if f.order() == q => f.clone(),
            Some(f) => return Err(Error::usage(format!("header q = {q} but field has order {}", f.order()))),
            None => Field::of_order(q)?,
        };
        let mut data = Vec::with_capacity((rows * cols) as usize);
        for _ in 0..rows {
            let line = lines.next().ok_or_else(|| Error::parse("missing matrix row"))?;
            let row: Vec<Fq> = line
                .split_whitespace()
                .map(|t| field.parse_elem(t))
                .collect::<Result<_>>()?;
            if row.len() as u64 != cols {
                return Err(Error::parse(format!("row has {} entries, expected {cols}", row.len())));
            }
            data.push(row);
        }
        MatF::from_rows(&field, &data)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<Vec<String>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.field.format_elem(self.get(r, c))).collect())
            .collect();
        serde_json::to_value(MatJson {
            rows: self.rows,
            cols: self.cols,
            q: self.field.order(),
            field: self.field.ctx().cloned(),
            entries,
        })
        .expect("plain data")
    }

    pub fn from_json(v: &serde_json::Value, field: Option<&Field>) -> Result<MatF> {
        let raw: MatJson = serde_json::from_value(v.clone()).map_err(|e| Error::parse(e.to_string()))?;
        let field = match (field, raw.field) {
            (Some(f), _) => f.clone(),
            (None, Some(ctx)) => Field::from_ctx(FieldCtx::with_modulus(ctx.prime_power(), ctx.modulus)?),
            (None, None) => Field::of_order(raw.q)?,
        };
        let rows: Vec<Vec<Fq>> = raw
            .entries
            .iter()
            .map(|r| r.iter().map(|t| field.parse_elem(t)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let m = MatF::from_rows(&field, &rows)?;
        if (m.rows, m.cols) != (raw.rows, raw.cols) {
            return Err(Error::parse("declared shape does not match entries"));
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct MatJson {
    rows: usize,
    cols: usize,
    q: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    field: Option<FieldCtx>,
    entries: Vec<Vec<String>>,
}

/// Row reduction on a scratch copy. Returns the rank and, for square input,
/// the determinant (zero when singular).
fn dense_eliminate(f: &Field, mut a: Vec<Fq>, rows: usize, cols: usize) -> (usize, Fq) {
    let mut rank = 0;
    let mut det = Fq::ONE;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !a[r * cols + c].is_zero()) else {
            det = Fq::ZERO;
            continue;
        };
        if piv != rank {
            for k in c..cols {
                a.swap(piv * cols + k, rank * cols + k);
            }
            det = f.neg(det);
        }
        let pv = a[rank * cols + c];
        det = f.mul(det, pv);
        let pinv = f.inv(pv).expect("pivot is nonzero");
        let (head, tail) = a.split_at_mut((rank + 1) * cols);
        let prow = &head[rank * cols + c..(rank + 1) * cols];
        for r in 0..rows - rank - 1 {
            let row = &mut tail[r * cols + c..(r + 1) * cols];
            let lead = row[0];
            if !lead.is_zero() {
                f.axpy(row, prow, f.neg(f.mul(lead, pinv)));
            }
        }
        rank += 1;
    }
    if rank < rows.min(cols) || rows != cols {
        det = Fq::ZERO;
    }
    (rank, det)
}

pub fn rank(m: &MatF) -> usize {
    m.rank()
}

pub fn det_inv(m: &MatF) -> Result<(Fq, Option<MatF>)> {
    m.det_inv()
}

/// `rank(g − h) / n` for square matrices of equal size over the same field.
pub fn rank_distance(g: &MatF, h: &MatF) -> Result<Rational> {
    if !g.is_square() {
        return Err(Error::usage("rank distance needs square matrices"));
    }
    let diff = g.try_sub(h)?;
    Ok(Rational::new(diff.rank() as u64, g.rows() as u64))
}

/// An element of SL_n(q): a square matrix of determinant one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlElement(MatF);

impl SlElement {
    pub fn new(mat: MatF) -> Result<SlElement> {
        if !mat.is_square() {
            return Err(Error::usage("SL element must be square"));
        }
        if mat.det()? != Fq::ONE {
            return Err(Error::domain("determinant is not 1"));
        }
        Ok(SlElement(mat))
    }

    /// Wraps without re-checking the determinant.
    pub(crate) fn new_unchecked(mat: MatF) -> SlElement {
        debug_assert!(mat.is_square());
        SlElement(mat)
    }

    pub fn identity(n: usize, field: &Field) -> SlElement {
        SlElement(MatF::identity(n, field))
    }

    pub fn mat(&self) -> &MatF {
        &self.0
    }

    pub fn into_mat(self) -> MatF {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn field(&self) -> &Field {
        self.0.field()
    }

    pub fn mul(&self, other: &SlElement) -> SlElement {
        SlElement(self.0.mul(&other.0))
    }

    pub fn inverse(&self) -> SlElement {
        SlElement(self.0.inverse().expect("SL elements are invertible"))
    }

    pub fn distance(&self, other: &SlElement) -> Result<Rational> {
        rank_distance(&self.0, &other.0)
    }
}

/// Uniform sample from SL_n(q): draw uniform matrices until one is
/// nonsingular, then rescale the first row by `det⁻¹`. Over GF(2) the
/// determinant is always 1 and the row-by-row sampler of
/// [`BitMatrix::random_invertible`] is used instead.
pub fn sample_sl<R: Rng + ?Sized>(n: usize, field: &Field, rng: &mut R) -> SlElement {
    assert!(n >= 1, "SL_n needs n >= 1");
    if field.is_gf2() {
        return SlElement(MatF::from_bits(BitMatrix::random_invertible(n, rng), field));
    }
    loop {
        let m = MatF::random(n, n, field, rng);
        let det = m.det().expect("square");
        if det.is_zero() {
            continue;
        }
        let dinv = field.inv(det).expect("nonzero");
        let mut m = m;
        for c in 0..n {
            let v = field.mul(dinv, m.get(0, c));
            m.set(0, c, v);
        }
        return SlElement(m);
    }
}

/// Minimum of `d(g, z·id)` over nonzero scalars `z`, with the first
/// minimizing `z` in code order.
pub fn central_distance(g: &MatF) -> Result<(Rational, Fq)> {
    if !g.is_square() {
        return Err(Error::usage("central distance needs a square matrix"));
    }
    let n = g.rows();
    let f = g.field();
    let mut best: Option<(Rational, Fq)> = None;
    for z in f.nonzero_elements() {
        let d = rank_distance(g, &MatF::scalar(n, z, f))?;
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, z));
        }
    }
    Ok(best.expect("fields have a nonzero element"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u64) -> Field {
        Field::of_order(q).unwrap()
    }

    #[test]
    fn rank_examples() {
        for q in [2, 3, 4] {
            let f = gf(q);
            assert_eq!(MatF::identity(5, &f).rank(), 5);
            assert_eq!(MatF::zeros(4, 6, &f).rank(), 0);
        }
        let f2 = gf(2);
        assert_eq!(MatF::from_ints(&f2, &[&[1, 1], &[1, 1]]).unwrap().rank(), 1);
    }

    #[test]
    fn det_inv_examples() {
        let f3 = gf(3);
        let (d, inv) = MatF::identity(3, &f3).det_inv().unwrap();
        assert_eq!(d, Fq::ONE);
        assert!(inv.unwrap().is_identity());
        let swap = MatF::from_ints(&f3, &[&[0, 1], &[1, 0]]).unwrap();
        let (d, inv) = swap.det_inv().unwrap();
        assert_eq!(d, Fq(2));
        assert_eq!(inv.unwrap(), swap);
        let sing = MatF::from_ints(&f3, &[&[1, 2], &[2, 1]]).unwrap();
        assert_eq!(sing.det_inv().unwrap(), (Fq::ZERO, None));
        assert!(MatF::zeros(2, 3, &f3).det_inv().is_err());
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        // brute-force 3x3 Leibniz formula as an oracle
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for q in [3, 4, 5, 9] {
            let f = gf(q);
            for _ in 0..200 {
                let m = MatF::random(3, 3, &f, &mut rng);
                let e = |r, c| m.get(r, c);
                let mut acc = Fq::ZERO;
                for (perm, sign) in [([0, 1, 2], 1), ([1, 2, 0], 1), ([2, 0, 1], 1), ([0, 2, 1], -1), ([2, 1, 0], -1), ([1, 0, 2], -1)] {
                    let t = f.mul(f.mul(e(0, perm[0]), e(1, perm[1])), e(2, perm[2]));
                    acc = if sign > 0 { f.add(acc, t) } else { f.sub(acc, t) };
                }
                assert_eq!(m.det().unwrap(), acc);
                let (d, inv) = m.det_inv().unwrap();
                assert_eq!(d, acc);
                if let Some(inv) = inv {
                    assert!(m.mul(&inv).is_identity());
                }
            }
        }
    }

    #[test]
    fn distance_examples() {
        let f2 = gf(2);
        let id = MatF::identity(2, &f2);
        let swap = MatF::from_ints(&f2, &[&[0, 1], &[1, 0]]).unwrap();
        assert_eq!(rank_distance(&id, &swap).unwrap(), Rational::new(1, 2));
        assert_eq!(rank_distance(&swap, &swap).unwrap(), Rational::new(0, 1));
        let f3 = gf(3);
        assert!(rank_distance(&id, &MatF::identity(2, &f3)).is_err());
        assert!(rank_distance(&id, &MatF::identity(3, &f2)).is_err());
    }

    #[test]
    fn bi_invariance_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for q in [2, 3, 4] {
            let f = gf(q);
            for _ in 0..1000 {
                let n = 4;
                let g = sample_sl(n, &f, &mut rng);
                let h = sample_sl(n, &f, &mut rng);
                let k = sample_sl(n, &f, &mut rng);
                let d = g.distance(&h).unwrap();
                assert_eq!(k.mul(&g).distance(&k.mul(&h)).unwrap(), d);
                assert_eq!(g.mul(&k).distance(&h.mul(&k)).unwrap(), d);
            }
        }
    }

    #[test]
    fn metric_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = gf(3);
        for _ in 0..1000 {
            let a = MatF::random(5, 5, &f, &mut rng);
            let b = MatF::random(5, 5, &f, &mut rng);
            let c = MatF::random(5, 5, &f, &mut rng);
            let (ab, bc, ac) = (
                rank_distance(&a, &b).unwrap(),
                rank_distance(&b, &c).unwrap(),
                rank_distance(&a, &c).unwrap(),
            );
            assert!(ac <= ab + bc);
            assert_eq!(ab, rank_distance(&b, &a).unwrap());
            assert_eq!(ab == Rational::new(0, 1), a == b);
        }
    }

    #[test]
    fn packed_rank_matches_generic_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f2 = gf(2);
        for trial in 0..10_000 {
            let n = 1 + trial % 37 + if trial % 500 == 0 { 219 } else { 0 };
            let m = 1 + (trial * 7) % 41;
            let mut b = MatF::random(n, m, &f2, &mut rng);
            // inject dependencies
            if n > 2 && trial % 3 == 0 {
                for c in 0..m {
                    let v = f2.add(b.get(0, c), b.get(1, c));
                    b.set(n - 1, c, v);
                }
            }
            let dense: Vec<Fq> = b.entries();
            let (r, _) = dense_eliminate(&f2, dense, n, m);
            assert_eq!(b.rank(), r);
        }
    }

    #[test]
    fn sample_sl_has_det_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [2, 3, 4, 5, 9] {
            let f = gf(q);
            assert!(sample_sl(1, &f, &mut rng).mat().is_identity());
            for _ in 0..200 {
                let g = sample_sl(3, &f, &mut rng);
                assert_eq!(g.mat().det().unwrap(), Fq::ONE);
            }
        }
    }

    #[test]
    fn central_distance_examples() {
        let f5 = gf(5);
        let (d, z) = central_distance(&MatF::identity(2, &f5)).unwrap();
        assert_eq!((d, z), (Rational::new(0, 1), Fq::ONE));
        // brute force over z for the transvection
        let t = MatF::from_ints(&f5, &[&[1, 1], &[0, 1]]).unwrap();
        let brute = f5
            .nonzero_elements()
            .map(|z| t.sub(&MatF::scalar(2, z, &f5)).rank())
            .min()
            .unwrap();
        assert_eq!(brute, 1);
        assert_eq!(central_distance(&t).unwrap().0, Rational::new(1, 2));
        let (d, z) = central_distance(&MatF::scalar(2, Fq(2), &f5)).unwrap();
        assert_eq!((d, z), (Rational::new(0, 1), Fq(2)));
    }

    #[test]
    fn text_and_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for q in [2, 4, 9] {
            let f = gf(q);
            let m = MatF::random(3, 4, &f, &mut rng);
            let t = m.to_text();
            assert_eq!(MatF::parse_text(&t, None).unwrap(), m);
            assert_eq!(MatF::from_json(&m.to_json(), None).unwrap(), m);
        }
        let f4 = gf(4);
        let m = MatF::identity(2, &f4);
        assert_eq!(m.to_text(), "2 2 4\n(1,0) (0,0)\n(0,0) (1,0)\n");
        assert!(MatF::parse_text("2 2 4\n(1,0) (0,0)\n", None).is_err());
    }

    #[test]
    fn product_inequality_under_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = gf(3);
        for _ in 0..200 {
            let n = 4;
            let g = sample_sl(n, &f, &mut rng);
            let gp = sample_sl(n, &f, &mut rng);
            let m = rng.gen_range(1..=5);
            let mut lhs = SlElement::identity(n, &f);
            let mut rhs = SlElement::identity(n, &f);
            for _ in 0..m {
                let h = sample_sl(n, &f, &mut rng);
                let hi = h.inverse();
                lhs = lhs.mul(&h.mul(&g).mul(&hi));
                rhs = rhs.mul(&h.mul(&gp).mul(&hi));
            }
            let d = g.distance(&gp).unwrap();
            assert!(lhs.distance(&rhs).unwrap() <= d * Rational::from_integer(m as u64));
        }
    }
}
