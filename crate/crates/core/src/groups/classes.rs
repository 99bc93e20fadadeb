use std::collections::HashSet;

use super::table::GroupTable;

/// Conjugacy classes, numbered in order of their smallest element index, so
/// the identity class is class 0.
#[derive(Clone, Debug)]
pub struct ConjClasses {
    class_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    inverse_class: Vec<usize>,
    group_order: usize,
}

/// Orbits under conjugation by the generators.
pub fn conjugacy_classes(g: &GroupTable) -> ConjClasses {
    let order = g.order();
    let mut class_of = vec![usize::MAX; order];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let gen_inv: Vec<(usize, usize)> = g.generators().iter().map(|&s| (s, g.inverse(s))).collect();
    for start in 0..order {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        class_of[start] = id;
        let mut orbit = vec![start];
        let mut k = 0;
        while k < orbit.len() {
            let x = orbit[k];
            k += 1;
            for &(s, si) in &gen_inv {
                let y = g.mul(g.mul(si, x), s);
                if class_of[y] == usize::MAX {
                    class_of[y] = id;
                    orbit.push(y);
                }
            }
        }
        orbit.sort_unstable();
        members.push(orbit);
    }
    let inverse_class = members.iter().map(|m| class_of[g.inverse(m[0])]).collect();
    ConjClasses { class_of, members, inverse_class, group_order: order }
}

impl ConjClasses {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn class_of(&self, elem: usize) -> usize {
        self.class_of[elem]
    }

    /// Smallest element index in the class.
    pub fn rep(&self, class: usize) -> usize {
        self.members[class][0]
    }

    pub fn size(&self, class: usize) -> usize {
        self.members[class].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    /// The class containing the inverses of this class.
    pub fn inverse_class(&self, class: usize) -> usize {
        self.inverse_class[class]
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    pub fn is_central(&self, class: usize) -> bool {
        self.members[class].len() == 1
    }
}

/// Class multiplication coefficients: `get(i, j, k)` is the number of pairs
/// `(x, y) ∈ C_i × C_j` with `xy = z` for a fixed `z ∈ C_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    r: usize,
    a: Vec<u64>,
}

impl StructureConstants {
    pub fn get(&self, i: usize, j: usize, k: usize) -> u64 {
        self.a[(i * self.r + j) * self.r + k]
    }

    pub fn classes(&self) -> usize {
        self.r
    }
}

/// Counts, for each class representative `z` and each `x ∈ G`, the pair of
/// classes of `x` and `x⁻¹z`.
pub fn structure_constants(g: &GroupTable, classes: &ConjClasses) -> StructureConstants {
    let r = classes.count();
    let mut a = vec![0u64; r * r * r];
    for k in 0..r {
        let z = classes.rep(k);
        for x in 0..g.order() {
            let i = classes.class_of(x);
            let j = classes.class_of(g.mul(g.inverse(x), z));
            a[(i * r + j) * r + k] += 1;
        }
    }
    StructureConstants { r, a }
}

/// Smallest `m` with `C^m = G` for the class `C`, decided on class supports
/// alone, or `None` when the sequence of supports repeats before covering
/// every class.
pub fn covering_number(sc: &StructureConstants, class: usize) -> Option<usize> {
    let r = sc.classes();
    let mut support = vec![false; r];
    support[class] = true;
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    for m in 1.. {
        if support.iter().all(|&b| b) {
            return Some(m);
        }
        if !seen.insert(support.clone()) {
            return None;
        }
        let mut next = vec![false; r];
        for (i, _) in support.iter().enumerate().filter(|(_, &b)| b) {
            for (l, slot) in next.iter_mut().enumerate() {
                if !*slot && sc.get(i, class, l) > 0 {
                    *slot = true;
                }
            }
        }
        support = next;
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::table::{enumerate_group, DEFAULT_GROUP_CAP};

    #[test]
    fn class_counts() {
        for (n, q, count) in [(2, 2, 3), (2, 3, 7), (2, 5, 9), (3, 2, 6)] {
            let g = enumerate_group(n, q, DEFAULT_GROUP_CAP).unwrap();
            let c = conjugacy_classes(&g);
            assert_eq!(c.count(), count, "SL_{n}({q})");
            assert_eq!(c.size(0), 1);
            assert_eq!(c.sizes().iter().sum::<usize>(), g.order());
            assert!(c.sizes().iter().all(|s| g.order().is_multiple_of(*s)));
        }
    }

    #[test]
    fn structure_constants_by_brute_force() {
        let g = enumerate_group(2, 3, DEFAULT_GROUP_CAP).unwrap();
        let c = conjugacy_classes(&g);
        let sc = structure_constants(&g, &c);
        let r = c.count();
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let z = c.rep(k);
                    let mut count = 0;
                    for &x in c.members(i) {
                        for &y in c.members(j) {
                            if g.mul(x, y) == z {
                                count += 1;
                            }
                        }
                    }
                    assert_eq!(sc.get(i, j, k), count);
                }
            }
        }
    }

    #[test]
    fn covering_examples() {
        let g = enumerate_group(2, 5, DEFAULT_GROUP_CAP).unwrap();
        let c = conjugacy_classes(&g);
        let sc = structure_constants(&g, &c);
        for k in 0..c.count() {
            let m = covering_number(&sc, k);
            assert_eq!(m.is_none(), c.is_central(k));
            assert_eq!(m, covering_number(&sc, c.inverse_class(k)));
        }
    }
}
