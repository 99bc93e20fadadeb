use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use super::chartab::CharTable;
use super::classes::ConjClasses;
use super::table::GroupTable;
use crate::error::{Error, Result};

/// Tolerance used for the intermediate inequalities of the lemma check.
pub const STEP_TOL: f64 = 1e-8;

/// A complex function on the elements of a [`GroupTable`], meant to be
/// positive definite.
#[derive(Clone, Debug, PartialEq)]
pub struct Pdf {
    values: Vec<Complex64>,
}

impl Pdf {
    pub fn from_values(values: Vec<Complex64>) -> Pdf {
        Pdf { values }
    }

    /// The constant function 1.
    pub fn trivial(order: usize) -> Pdf {
        Pdf { values: vec![Complex64::new(1.0, 0.0); order] }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, elem: usize) -> Complex64 {
        self.values[elem]
    }

    /// `(1 − t)·self + t·other`; convex combinations stay positive definite.
    pub fn mix(&self, other: &Pdf, t: f64) -> Pdf {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * (1.0 - t) + b * t).collect();
        Pdf { values }
    }

    /// Lifts a class function given per class.
    pub fn from_class_values(classes: &ConjClasses, per_class: &[Complex64]) -> Pdf {
        let values = (0..classes.group_order()).map(|x| per_class[classes.class_of(x)]).collect();
        Pdf { values }
    }

    /// `χ(c)/χ(1)` for an irreducible character.
    pub fn normalized_character(table: &CharTable, classes: &ConjClasses, chi: usize) -> Pdf {
        let per: Vec<Complex64> = (0..classes.count()).map(|k| table.normalized(chi, k)).collect();
        Pdf::from_class_values(classes, &per)
    }

    /// Values per class, or `None` if some class is not constant to `tol`.
    pub fn class_values(&self, classes: &ConjClasses, tol: f64) -> Option<Vec<Complex64>> {
        (0..classes.count())
            .map(|k| {
                let v = self.values[classes.rep(k)];
                classes.members(k).iter().all(|&x| (self.values[x] - v).norm() <= tol).then_some(v)
            })
            .collect()
    }

    /// Smallest eigenvalue of the Gram matrix `[ψ(g_j⁻¹ g_i)]` on `elems`.
    pub fn gram_min_eigenvalue(&self, g: &GroupTable, elems: &[usize]) -> f64 {
        let m = elems.len();
        let gram = DMatrix::from_fn(m, m, |i, j| self.values[g.mul(g.inverse(elems[j]), elems[i])]);
        SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest Gram eigenvalue over `trials` random principal submatrices
    /// of size `size` (the whole group if it is smaller).
    pub fn gram_check<R: Rng + ?Sized>(&self, g: &GroupTable, size: usize, trials: usize, rng: &mut R) -> f64 {
        let size = size.min(g.order());
        (0..trials)
            .map(|_| self.gram_min_eigenvalue(g, &sample(rng, g.order(), size).into_vec()))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `ψ(g) = Σ_x f(gx) conj f(x) / Σ_x |f(x)|²`, a diagonal matrix
/// coefficient of the regular representation.
pub fn pdf_from_function(g: &GroupTable, f: &[Complex64]) -> Result<Pdf> {
    if f.len() != g.order() {
        return Err(Error::usage("function length differs from group order"));
    }
    let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(Error::domain("function vanishes identically"));
    }
    g.ensure_mul_table();
    let values = (0..g.order())
        .map(|a| (0..g.order()).map(|x| f[g.mul(a, x)] * f[x].conj()).sum::<Complex64>() / norm)
        .collect();
    Ok(Pdf { values })
}

/// [`pdf_from_function`] for `f` with independent uniform entries in the
/// unit square; an all-zero draw is redrawn.
pub fn random_pdf<R: Rng + ?Sized>(g: &GroupTable, rng: &mut R) -> Pdf {
    loop {
        let f: Vec<Complex64> = (0..g.order())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if let Ok(p) = pdf_from_function(g, &f) {
            return p;
        }
    }
}

/// `χ(h) = (1/|G|) Σ_x ψ(x⁻¹hx)`, i.e. the average of `ψ` over the class of `h`.
pub fn conj_average(classes: &ConjClasses, psi: &Pdf) -> Pdf {
    let per: Vec<Complex64> = (0..classes.count())
        .map(|k| {
            let m = classes.members(k);
            m.iter().map(|&x| psi.values[x]).sum::<Complex64>() / m.len() as f64
        })
        .collect();
    Pdf::from_class_values(classes, &per)
}

/// Coefficients of a class function in the basis of normalized characters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    /// Weight of the trivial character.
    pub lambda: f64,
    /// Weight of each nontrivial character, indexed like the table rows 1..
    pub lambda_pi: Vec<f64>,
    /// `|λ + Σ λ_π − 1|`.
    pub sum_error: f64,
    /// Largest `|χ(c) − λ − Σ λ_π χ_π(c)/χ_π(1)|` over classes.
    pub reconstruction_error: f64,
    /// Largest imaginary part among the raw coefficients.
    pub imaginary_part: f64,
    pub min_coefficient: f64,
    /// Whether every coefficient is ≥ `−STEP_TOL`.
    pub positive: bool,
}

/// `λ_π = χ_π(1)·⟨χ, χ_π⟩`.
pub fn pdf_decompose(chi: &Pdf, classes: &ConjClasses, table: &CharTable) -> Result<Decomposition> {
    let per = chi
        .class_values(classes, 1e-9)
        .ok_or_else(|| Error::usage("decomposition needs a class function"))?;
    let raw: Vec<Complex64> = (0..table.count())
        .map(|p| table.inner(&per, table.row(p)) * table.degree(p) as f64)
        .collect();
    let imaginary_part = raw.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let coeffs: Vec<f64> = raw.iter().map(|z| z.re).collect();
    let sum: f64 = coeffs.iter().sum();
    let mut reconstruction_error = 0.0f64;
    for (k, v) in per.iter().enumerate() {
        let rebuilt: Complex64 = (0..table.count()).map(|p| table.normalized(p, k) * coeffs[p]).sum();
        reconstruction_error = reconstruction_error.max((rebuilt - v).norm());
    }
    let min_coefficient = coeffs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Decomposition {
        lambda: coeffs[0],
        lambda_pi: coeffs[1..].to_vec(),
        sum_error: (sum - 1.0).abs(),
        reconstruction_error,
        imaginary_part,
        min_coefficient,
        positive: min_coefficient >= -STEP_TOL,
    })
}

/// The non-central element `g` minimizing `max_x |1 − ψ(x⁻¹gx)|`, with that
/// maximum. Ties go to the smallest class index.
pub fn best_premise(classes: &ConjClasses, psi: &Pdf) -> Option<(usize, f64)> {
    (0..classes.count())
        .filter(|&k| !classes.is_central(k))
        .map(|k| {
            let worst = classes.members(k).iter().map(|&x| (1.0 - psi.values[x]).norm()).fold(0.0, f64::max);
            (classes.rep(k), worst)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Every quantity in the proof that a positive definite function close to 1
/// on a non-central class is close to 1 everywhere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdfLemmaReport {
    pub q: u64,
    pub g: usize,
    pub eps: f64,
    /// Whether the premise holds: `g` non-central, `ε ∈ (0,1)` and
    /// `|1 − ψ(x⁻¹gx)| < ε` for all `x`.
    pub applicable: bool,
    /// `2ε + 16/q`.
    pub delta: f64,
    pub lambda: f64,
    /// `λ > 1 − ε − 8/q`.
    pub lambda_step: bool,
    /// `max_h |1 − χ(h)|`, to be `≤ 2(1 − λ) < 2ε + 16/q`.
    pub chi_deviation: f64,
    pub chi_step: bool,
    /// Largest, over `h`, fraction of `x` with `|1 − ψ(x⁻¹hx)| ≥ 3δ`; at most 1/3.
    pub markov_fraction: f64,
    /// `|A|/|G|` for `A = {k : |1 − ψ(k)| < 3δ}`; at least 2/3.
    pub a_fraction: f64,
    pub markov_step: bool,
    /// Every `h` factors as `k₁k₂` with `k₁, k₂ ∈ A` and then
    /// `|ψ(k₁) − ψ(h)|² ≤ 2(1 − Re ψ(k₂)) ≤ 6δ`.
    pub factorization_step: bool,
    /// `max_h |1 − ψ(h)|`.
    pub conclusion_value: f64,
    /// `9 δ^{1/2}`.
    pub conclusion_bound: f64,
    pub conclusion: bool,
}

impl PdfLemmaReport {
    /// Every step and the conclusion hold (vacuously true if inapplicable).
    pub fn all_hold(&self) -> bool {
        !self.applicable
            || (self.lambda_step && self.chi_step && self.markov_step && self.factorization_step && self.conclusion)
    }
}

/// Runs the lemma for `ψ` at the element `g` with threshold `eps`.
pub fn pdf_lemma_check(
    g: &GroupTable,
    classes: &ConjClasses,
    table: &CharTable,
    psi: &Pdf,
    elem: usize,
    eps: f64,
) -> Result<PdfLemmaReport> {
    let q = g.q();
    let qf = q as f64;
    let delta = 2.0 * eps + 16.0 / qf;
    let k = classes.class_of(elem);
    let applicable = !classes.is_central(k)
        && eps > 0.0
        && eps < 1.0
        && classes.members(k).iter().all(|&x| (1.0 - psi.values[x]).norm() < eps);
    let chi = conj_average(classes, psi);
    let dec = pdf_decompose(&chi, classes, table)?;
    let lambda = dec.lambda;
    let lambda_step = lambda > 1.0 - eps - 8.0 / qf - STEP_TOL;
    let chi_deviation = chi.values.iter().map(|v| (1.0 - v).norm()).fold(0.0, f64::max);
    let chi_step = chi_deviation <= 2.0 * (1.0 - lambda) + STEP_TOL && chi_deviation < delta + STEP_TOL;

    let threshold = 3.0 * delta;
    let in_a: Vec<bool> = psi.values.iter().map(|v| (1.0 - v).norm() < threshold).collect();
    // x ↦ x⁻¹hx hits each member of the class of h equally often.
    let markov_fraction = (0..classes.count())
        .map(|c| {
            let m = classes.members(c);
            m.iter().filter(|&&x| !in_a[x]).count() as f64 / m.len() as f64
        })
        .fold(0.0, f64::max);
    let a_fraction = in_a.iter().filter(|&&b| b).count() as f64 / g.order() as f64;
    let markov_step = markov_fraction <= 1.0 / 3.0 + STEP_TOL && a_fraction >= 2.0 / 3.0 - STEP_TOL;

    g.ensure_mul_table();
    let a_list: Vec<usize> = (0..g.order()).filter(|&x| in_a[x]).collect();
    let factorization_step = (0..g.order()).all(|h| {
        a_list.iter().any(|&k1| {
            let k2 = g.mul(g.inverse(k1), h);
            if !in_a[k2] {
                return false;
            }
            let lhs = (psi.values[k1] - psi.values[h]).norm_sqr();
            let mid = 2.0 * (1.0 - psi.values[k2].re);
            lhs <= mid + STEP_TOL && mid <= 6.0 * delta + STEP_TOL
        })
    });
    let conclusion_value = psi.values.iter().map(|v| (1.0 - v).norm()).fold(0.0, f64::max);
    let conclusion_bound = 9.0 * delta.sqrt();
    Ok(PdfLemmaReport {
        q,
        g: elem,
        eps,
        applicable,
        delta,
        lambda,
        lambda_step,
        chi_deviation,
        chi_step,
        markov_fraction,
        a_fraction,
        markov_step,
        factorization_step,
        conclusion_value,
        conclusion_bound,
        conclusion: conclusion_value < conclusion_bound,
    })
}

/// Largest violation of `|ψ(a) − ψ(b)|² ≤ 2(1 − Re ψ(a⁻¹b))` over
/// `pairs` random pairs; nonpositive when the inequality holds.
pub fn star_inequality_violation<R: Rng + ?Sized>(g: &GroupTable, psi: &Pdf, pairs: usize, rng: &mut R) -> f64 {
    (0..pairs)
        .map(|_| {
            let a = rng.gen_range(0..g.order());
            let b = rng.gen_range(0..g.order());
            let lhs = (psi.values[a] - psi.values[b]).norm_sqr();
            let rhs = 2.0 * (1.0 - psi.values[g.mul(g.inverse(a), b)].re);
            lhs - rhs
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::chartab::character_table;
    use crate::groups::classes::{conjugacy_classes, structure_constants};
    use crate::groups::table::{enumerate_group, DEFAULT_GROUP_CAP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(q: u64) -> (GroupTable, ConjClasses, CharTable) {
        let g = enumerate_group(2, q, DEFAULT_GROUP_CAP).unwrap();
        let c = conjugacy_classes(&g);
        let t = character_table(&c, &structure_constants(&g, &c), 3).unwrap();
        (g, c, t)
    }

    #[test]
    fn special_functions() {
        let (g, c, _) = setup(3);
        let mut delta = vec![Complex64::new(0.0, 0.0); g.order()];
        delta[0] = Complex64::new(1.0, 0.0);
        let p = pdf_from_function(&g, &delta).unwrap();
        assert_eq!(p.values(), &delta[..]);
        assert_eq!(conj_average(&c, &p), p);
        let ones = vec![Complex64::new(2.0, 0.0); g.order()];
        let p = pdf_from_function(&g, &ones).unwrap();
        assert!(p.values().iter().all(|v| (v - 1.0).norm() < 1e-12));
        assert!(pdf_from_function(&g, &vec![Complex64::new(0.0, 0.0); g.order()]).is_err());
    }

    #[test]
    fn random_pdf_is_positive_definite() {
        let (g, c, _) = setup(5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_pdf(&g, &mut rng);
        assert!((p.value(0) - 1.0).norm() < 1e-12);
        assert!(p.values().iter().all(|v| v.norm() <= 1.0 + 1e-12));
        assert!(p.gram_check(&g, 64, 3, &mut rng) >= -1e-9);
        let avg = conj_average(&c, &p);
        assert!(avg.gram_check(&g, 64, 3, &mut rng) >= -1e-9);
        assert!((avg.value(0) - 1.0).norm() < 1e-12);
        let twice = conj_average(&c, &avg);
        assert!(twice.values().iter().zip(avg.values()).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn decompositions() {
        let (g, c, t) = setup(5);
        let d = pdf_decompose(&Pdf::trivial(g.order()), &c, &t).unwrap();
        assert!((d.lambda - 1.0).abs() < 1e-9 && d.lambda_pi.iter().all(|x| x.abs() < 1e-9));
        let d = pdf_decompose(&Pdf::normalized_character(&t, &c, 3), &c, &t).unwrap();
        assert!(d.lambda.abs() < 1e-9 && (d.lambda_pi[2] - 1.0).abs() < 1e-9);
        let mut delta = vec![Complex64::new(0.0, 0.0); g.order()];
        delta[0] = Complex64::new(1.0, 0.0);
        let d = pdf_decompose(&Pdf::from_values(delta), &c, &t).unwrap();
        let order = g.order() as f64;
        assert!((d.lambda - 1.0 / order).abs() < 1e-9);
        for (p, l) in d.lambda_pi.iter().enumerate() {
            let dp = t.degree(p + 1) as f64;
            assert!((l - dp * dp / order).abs() < 1e-9);
        }
        assert!(d.sum_error < 1e-9 && d.reconstruction_error < 1e-9 && d.positive);
    }

    #[test]
    fn lemma_on_trivial_and_mixed() {
        let (g, c, t) = setup(7);
        let one = Pdf::trivial(g.order());
        let (elem, worst) = best_premise(&c, &one).unwrap();
        assert_eq!(worst, 0.0);
        let rep = pdf_lemma_check(&g, &c, &t, &one, elem, 0.01).unwrap();
        assert!(rep.applicable && rep.all_hold());
        let chi = Pdf::normalized_character(&t, &c, 1);
        let psi = one.mix(&chi, 0.05);
        let (elem, worst) = best_premise(&c, &psi).unwrap();
        let rep = pdf_lemma_check(&g, &c, &t, &psi, elem, worst + 1e-9).unwrap();
        assert!(rep.applicable && rep.all_hold(), "{rep:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(star_inequality_violation(&g, &random_pdf(&g, &mut rng), 1000, &mut rng) <= 1e-10);
    }
}
