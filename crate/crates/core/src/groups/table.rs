use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::field::{Field, Fq};
use crate::matgf::MatF;

/// Default bound on the order of an enumerated group.
pub const DEFAULT_GROUP_CAP: u64 = 50_000;

/// Groups up to this order get a full multiplication table on request.
pub const MUL_TABLE_CAP: usize = 2_500;

/// `|SL_n(q)| = q^{n(n−1)/2} ∏_{i=2..n} (q^i − 1)`, saturating.
pub fn sl_order(n: usize, q: u64) -> u128 {
    let q = q as u128;
    let mut order = q.saturating_pow((n * (n.saturating_sub(1)) / 2) as u32);
    for i in 2..=n {
        order = order.saturating_mul(q.saturating_pow(i as u32) - 1);
    }
    order
}

/// All elements of SL_n(q), indexed, with the identity at index 0.
pub struct GroupTable {
    n: usize,
    field: Field,
    elems: Vec<MatF>,
    index: HashMap<MatF, usize>,
    gens: Vec<usize>,
    inv: Vec<usize>,
    mul_table: OnceLock<Vec<u32>>,
}

impl std::fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupTable(SL_{}({}), order {})", self.n, self.field.order(), self.elems.len())
    }
}

/// The transvections `id + λE_ij` with `λ` running over an additive basis
/// of the field.
fn transvection_generators(n: usize, field: &Field) -> Vec<MatF> {
    let p = field.characteristic() as u64;
    let basis: Vec<Fq> = (0..field.degree()).map(|k| Fq(p.pow(k) as u32)).collect();
    let mut gens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for &lam in &basis {
                let mut m = MatF::identity(n, field);
                m.set(i, j, lam);
                gens.push(m);
            }
        }
    }
    gens
}

/// Enumerates SL_n(q) by breadth-first closure from transvections.
///
/// Fails with a resource error before doing any work when the predicted
/// order exceeds `cap`.
pub fn enumerate_group(n: usize, q: u64, cap: u64) -> Result<GroupTable> {
    if n == 0 {
        return Err(Error::usage("n must be at least 1"));
    }
    let field = Field::of_order(q)?;
    let predicted = sl_order(n, q);
    if predicted > cap as u128 {
        return Err(Error::Resource {
            what: format!("SL_{n}({q}) of order {predicted}"),
            needed: predicted.min(u64::MAX as u128) as u64,
            cap,
        });
    }
    let gen_mats = transvection_generators(n, &field);
    let id = MatF::identity(n, &field);
    let mut elems = vec![id.clone()];
    let mut index = HashMap::from([(id, 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for s in &gen_mats {
            let prod = elems[i].mul(s);
            if !index.contains_key(&prod) {
                index.insert(prod.clone(), elems.len());
                queue.push_back(elems.len());
                elems.push(prod);
            }
        }
    }
    if elems.len() as u128 != predicted {
        return Err(Error::Numeric(format!(
            "enumeration found {} elements, expected {predicted}",
            elems.len()
        )));
    }
    let gens = gen_mats.iter().map(|m| index[m]).collect();
    let inv = elems
        .iter()
        .map(|m| index[&m.inverse().expect("SL elements are invertible")])
        .collect();
    Ok(GroupTable { n, field, elems, index, gens, inv, mul_table: OnceLock::new() })
}

impl GroupTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.field.order()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn element(&self, i: usize) -> &MatF {
        &self.elems[i]
    }

    pub fn elements(&self) -> &[MatF] {
        &self.elems
    }

    pub fn index_of(&self, m: &MatF) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Indices of the transvection generators.
    pub fn generators(&self) -> &[usize] {
        &self.gens
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.inv[i]
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        if let Some(t) = self.mul_table.get() {
            return t[i * self.elems.len() + j] as usize;
        }
        self.index[&self.elems[i].mul(&self.elems[j])]
    }

    /// `x⁻¹ h x`.
    pub fn conjugate(&self, h: usize, x: usize) -> usize {
        self.mul(self.mul(self.inv[x], h), x)
    }

    /// Builds the full multiplication table if the group is small enough;
    /// afterwards [`GroupTable::mul`] is a lookup. Returns whether a table
    /// is present.
    pub fn ensure_mul_table(&self) -> bool {
        let g = self.elems.len();
        if g > MUL_TABLE_CAP {
            return false;
        }
        self.mul_table.get_or_init(|| {
            let mut t = Vec::with_capacity(g * g);
            for a in &self.elems {
                for b in &self.elems {
                    t.push(self.index[&a.mul(b)] as u32);
                }
            }
            t
        });
        true
    }

    pub fn is_central(&self, i: usize) -> bool {
        let x = &self.elems[i];
        self.gens.iter().all(|&s| {
            let s = &self.elems[s];
            x.mul(s) == s.mul(x)
        })
    }
}

/// Elements commuting with every generator, hence with the whole group.
pub fn group_center(g: &GroupTable) -> Vec<usize> {
    (0..g.order()).filter(|&i| g.is_central(i)).collect()
}

/// The scalar matrices `z·id` with `zⁿ = 1`, as indices.
pub fn scalar_subgroup(g: &GroupTable) -> Vec<usize> {
    let f = g.field();
    let mut out: Vec<usize> = f
        .nonzero_elements()
        .filter(|&z| f.pow(z, g.n() as u64) == Fq::ONE)
        .map(|z| g.index_of(&MatF::scalar(g.n(), z, f)).expect("scalar of determinant one"))
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_match_formula() {
        for (n, q, order) in [(2, 2, 6), (2, 3, 24), (2, 5, 120), (2, 4, 60), (3, 2, 168)] {
            let g = enumerate_group(n, q, DEFAULT_GROUP_CAP).unwrap();
            assert_eq!(g.order(), order);
            assert_eq!(sl_order(n, q), order as u128);
        }
        assert_eq!(sl_order(4, 2), 20160);
    }

    #[test]
    fn cap_is_enforced() {
        match enumerate_group(2, 13, 1000) {
            Err(Error::Resource { needed, cap, .. }) => assert_eq!((needed, cap), (2184, 1000)),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn table_arithmetic() {
        let g = enumerate_group(2, 3, DEFAULT_GROUP_CAP).unwrap();
        assert!(g.element(0).is_identity());
        for i in 0..g.order() {
            assert_eq!(g.mul(i, g.inverse(i)), 0);
        }
        let before: Vec<usize> = (0..50).map(|k| g.mul(k % 24, (7 * k) % 24)).collect();
        assert!(g.ensure_mul_table());
        let after: Vec<usize> = (0..50).map(|k| g.mul(k % 24, (7 * k) % 24)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn centers() {
        for (q, size) in [(2, 1), (3, 2), (5, 2), (7, 2)] {
            let g = enumerate_group(2, q, DEFAULT_GROUP_CAP).unwrap();
            let c = group_center(&g);
            assert_eq!(c.len(), size);
            assert_eq!(c, scalar_subgroup(&g));
        }
    }
}
