use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::classes::{ConjClasses, StructureConstants};
use crate::error::{Error, Result};

/// Most classes accepted by [`character_table`].
pub const MAX_CLASSES: usize = 200;
/// Attempts with fresh random combinations before giving up.
pub const MAX_ATTEMPTS: usize = 10;
/// Eigenvalues closer than this count as a collision.
pub const EIGEN_GAP: f64 = 1e-6;
/// Largest allowed distance of a computed degree from an integer.
pub const DEGREE_RESIDUAL: f64 = 1e-6;
/// Tolerance for the row orthogonality relations.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// Irreducible characters (rows) evaluated on conjugacy classes (columns).
/// Row 0 is the trivial character; the rest are sorted by degree.
#[derive(Clone, Debug)]
pub struct CharTable {
    class_sizes: Vec<usize>,
    group_order: usize,
    degrees: Vec<u64>,
    values: Vec<Vec<Complex64>>,
    orthogonality_error: f64,
    degree_residual: f64,
    attempts: usize,
}

impl CharTable {
    pub fn count(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn degree(&self, chi: usize) -> u64 {
        self.degrees[chi]
    }

    pub fn value(&self, chi: usize, class: usize) -> Complex64 {
        self.values[chi][class]
    }

    /// `χ(c) / χ(1)`.
    pub fn normalized(&self, chi: usize, class: usize) -> Complex64 {
        self.values[chi][class] / self.degrees[chi] as f64
    }

    pub fn row(&self, chi: usize) -> &[Complex64] {
        &self.values[chi]
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    /// Largest `|Σ_k |C_k| χ_i(c_k) conj χ_j(c_k) − |G| δ_ij|`.
    pub fn orthogonality_error(&self) -> f64 {
        self.orthogonality_error
    }

    /// Largest distance of an unrounded degree from its integer.
    pub fn degree_residual(&self) -> f64 {
        self.degree_residual
    }

    /// Random combinations tried before the eigenvalues separated.
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    /// `(1/|G|) Σ_k |C_k| a(c_k) conj b(c_k)` for class functions.
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let s: Complex64 = self
            .class_sizes
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&size, (x, y))| x * y.conj() * size as f64)
            .sum();
        s / self.group_order as f64
    }

    /// JSON export with values as `[re, im]` pairs rounded to 12 digits.
    pub fn to_json(&self, class_reps: &[String]) -> serde_json::Value {
        #[derive(Serialize)]
        struct Export<'a> {
            group_order: usize,
            class_reps: &'a [String],
            class_sizes: &'a [usize],
            degrees: &'a [u64],
            values: Vec<Vec<[f64; 2]>>,
        }
        let round = |x: f64| {
            let r = (x * 1e12).round() / 1e12;
            if r == 0.0 {
                0.0
            } else {
                r
            }
        };
        let values = self
            .values
            .iter()
            .map(|row| row.iter().map(|z| [round(z.re), round(z.im)]).collect())
            .collect();
        serde_json::to_value(Export {
            group_order: self.group_order,
            class_reps,
            class_sizes: &self.class_sizes,
            degrees: &self.degrees,
            values,
        })
        .expect("plain data serializes")
    }
}

/// Character table by simultaneous diagonalization of the class
/// multiplication matrices.
///
/// With `D = diag(√|C_k|)`, the matrices `N_j = D⁻¹ A_j D` (where
/// `(A_j)_{ik} = a_{jik}`) form a commuting family of normal matrices whose
/// common unit eigenvectors are `v_k ∝ √|C_k| χ(c_k)`. A random Hermitian
/// combination of them has those eigenvectors and, generically, simple
/// eigenvalues.
pub fn character_table(classes: &ConjClasses, sc: &StructureConstants, seed: u64) -> Result<CharTable> {
    let r = classes.count();
    if r > MAX_CLASSES {
        return Err(Error::usage(format!("{r} classes exceed the limit of {MAX_CLASSES}")));
    }
    let sizes = classes.sizes();
    let order = classes.group_order();
    let sq: Vec<f64> = sizes.iter().map(|&s| (s as f64).sqrt()).collect();
    let normal: Vec<DMatrix<f64>> = (0..r)
        .map(|j| DMatrix::from_fn(r, r, |i, k| sc.get(j, i, k) as f64 * sq[k] / sq[i]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_problem = String::new();
    for attempt in 1..=MAX_ATTEMPTS {
        let mut h = DMatrix::<Complex64>::zeros(r, r);
        for nj in &normal {
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            for i in 0..r {
                for k in 0..r {
                    let (x, xt) = (nj[(i, k)], nj[(k, i)]);
                    h[(i, k)] += Complex64::new(a * (x + xt), b * (x - xt));
                }
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let gap = ev.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if gap < EIGEN_GAP {
            last_problem = format!("eigenvalue gap {gap:e}");
            continue;
        }
        let mut rows = Vec::with_capacity(r);
        let mut residual = 0.0f64;
        for col in eig.eigenvectors.column_iter() {
            let v0 = col[0];
            let ratio: Vec<Complex64> = (0..r).map(|k| col[k] / (v0 * sq[k])).collect();
            let norm: f64 = ratio.iter().zip(&sizes).map(|(z, &s)| z.norm_sqr() * s as f64).sum();
            let d = (order as f64 / norm).sqrt();
            let rounded = d.round();
            residual = residual.max((d - rounded).abs());
            let values: Vec<Complex64> = ratio.iter().map(|z| z * rounded).collect();
            rows.push((rounded as u64, values));
        }
        if residual >= DEGREE_RESIDUAL {
            last_problem = format!("degree residual {residual:e}");
            continue;
        }
        let is_trivial = |v: &[Complex64]| v.iter().all(|z| (z - 1.0).norm() < 1e-6);
        rows.sort_by(|(da, va), (db, vb)| {
            is_trivial(vb)
                .cmp(&is_trivial(va))
                .then(da.cmp(db))
                .then_with(|| {
                    let key = |v: &[Complex64]| v.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>();
                    key(va).partial_cmp(&key(vb)).unwrap_or(std::cmp::Ordering::Equal)
                })
        });
        let (degrees, values): (Vec<u64>, Vec<Vec<Complex64>>) = rows.into_iter().unzip();
        let mut table = CharTable {
            class_sizes: sizes.clone(),
            group_order: order,
            degrees,
            values,
            orthogonality_error: 0.0,
            degree_residual: residual,
            attempts: attempt,
        };
        table.orthogonality_error = orthogonality_error(&table);
        if table.orthogonality_error > ORTHOGONALITY_TOL {
            last_problem = format!("orthogonality error {:e}", table.orthogonality_error);
            continue;
        }
        if !is_trivial(&table.values[0]) {
            return Err(Error::Numeric("no trivial character found".into()));
        }
        return Ok(table);
    }
    Err(Error::Numeric(format!(
        "character table did not separate after {MAX_ATTEMPTS} attempts: {last_problem}"
    )))
}

fn orthogonality_error(t: &CharTable) -> f64 {
    let g = t.group_order as f64;
    let mut worst = 0.0f64;
    for i in 0..t.count() {
        for j in 0..t.count() {
            let s = t.inner(&t.values[i], &t.values[j]) * g;
            let target = if i == j { g } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

/// Result of scanning normalized character values on non-central classes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GluckReport {
    pub q: u64,
    pub bound: f64,
    pub max_ratio: f64,
    /// `(class, character)` attaining `max_ratio`.
    pub witness: Option<(usize, usize)>,
    /// Per class: max over nontrivial characters of `|χ(c)|/χ(1)`; `None`
    /// for central classes.
    pub per_class: Vec<Option<f64>>,
    pub passed: bool,
}

/// Checks `|χ(h)|/χ(1) < 8/q` for every non-central class and nontrivial
/// irreducible character.
pub fn gluck_check(table: &CharTable, classes: &ConjClasses, q: u64) -> GluckReport {
    let bound = 8.0 / q as f64;
    let mut per_class = Vec::with_capacity(classes.count());
    let mut best: Option<(f64, usize, usize)> = None;
    for k in 0..classes.count() {
        if classes.is_central(k) {
            per_class.push(None);
            continue;
        }
        let mut m = 0.0f64;
        for chi in 1..table.count() {
            let v = table.normalized(chi, k).norm();
            m = m.max(v);
            if best.is_none_or(|(b, _, _)| v > b) {
                best = Some((v, k, chi));
            }
        }
        per_class.push(Some(m));
    }
    let max_ratio = best.map_or(0.0, |b| b.0);
    GluckReport {
        q,
        bound,
        max_ratio,
        witness: best.map(|(_, k, chi)| (k, chi)),
        per_class,
        passed: max_ratio < bound,
    }
}
