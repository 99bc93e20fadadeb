//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Tolerances and sample sizes are fixed below.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankmetric_core::concentration::{
    lipschitz_concentration, ramsey_search, reduction_holds, stabilizer_reduce, FunctionalCover, LipschitzFn,
};
use rankmetric_core::embed::verify_embedding;
use rankmetric_core::folner::{
    discreteness_profile, domain_size, nesting_check, normalized_rank, AmenableGroup, FolnerSpec, GroupRingElement,
};
use rankmetric_core::groups::{
    best_premise, covering_number, enumerate_group, gluck_check, group_center, pdf_lemma_check, random_pdf,
    scalar_subgroup, star_inequality_violation, GroupData, Pdf, DEFAULT_GROUP_CAP,
};
use rankmetric_core::matgf::sample_sl;
use rankmetric_core::{Field, Fq, MatF, Rational};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const ORTHOGONALITY_TOL: f64 = 1e-8;
const PDF_STEP_TOL: f64 = 1e-8;
const STAR_TOL: f64 = 1e-10;
const LEVY_ASSERT_BELOW: f64 = 0.5;
const CHI_SQUARE_SIGNIFICANCE: f64 = 1e-3;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn ratio(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn embedding_exactness() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (q, n, m) in [(2u64, 1u32, 1usize), (2, 1, 2), (3, 1, 1)] {
        let r = verify_embedding(q, n, m, 1000, 1).expect("embedding run");
        ok &= r.failures == 0 && r.max_rank_discrepancy == 0;
        notes.push(format!("q={q} n={n} m={m}: {} failures", r.failures));
    }
    outcome(ok, notes.join("; "))
}

fn diameter_witness() -> Outcome {
    let mut failures = 0;
    let mut worst = 0;
    for q in [2u64, 3] {
        let f = Field::of_order(q).unwrap();
        for n in [2usize, 4, 8, 16, 64] {
            let mut rng = ChaCha8Rng::seed_from_u64(q * 1000 + n as u64);
            let id = MatF::identity(n, &f);
            for _ in 0..10_000 {
                let g = sample_sl(n, &f, &mut rng);
                let (h, gp) = stabilizer_reduce(&g).expect("n >= 2");
                let r = h.mat().sub(&id).rank();
                worst = worst.max(r);
                if r > 2 || !reduction_holds(&g, &h, &gp) {
                    failures += 1;
                }
            }
        }
    }
    outcome(failures == 0, format!("{failures} failures, max rank(h - id) = {worst}"))
}

fn gluck_bound() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for q in [3u64, 5, 7, 9, 11, 13] {
        let d = GroupData::new(2, q, DEFAULT_GROUP_CAP).unwrap();
        let t = match d.character_table(q) {
            Ok(t) => t,
            Err(e) => {
                ok = false;
                notes.push(format!("q={q}: {e}"));
                continue;
            }
        };
        let g = gluck_check(&t, &d.classes, q);
        ok &= t.orthogonality_error() < ORTHOGONALITY_TOL && g.passed;
        notes.push(format!("q={q}: max {:.4} < {:.4}, orth {:.1e}", g.max_ratio, g.bound, t.orthogonality_error()));
    }
    outcome(ok, notes.join("; "))
}

fn pdf_lemma() -> Outcome {
    let d = GroupData::new(2, 7, DEFAULT_GROUP_CAP).unwrap();
    let t = d.character_table(7).unwrap();
    d.group.ensure_mul_table();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trivial = Pdf::trivial(d.group.order());
    let (mut applicable, mut failed, mut worst_star) = (0, 0, f64::NEG_INFINITY);
    for i in 0..100 {
        let other = if i % 4 == 3 {
            Pdf::normalized_character(&t, &d.classes, 1 + i % (t.count() - 1))
        } else {
            random_pdf(&d.group, &mut rng)
        };
        let psi = trivial.mix(&other, rng.gen_range(0.02..0.6));
        worst_star = worst_star.max(star_inequality_violation(&d.group, &psi, 10_000, &mut rng));
        let Some((g, worst)) = best_premise(&d.classes, &psi) else { continue };
        let eps = worst + PDF_STEP_TOL;
        let report = pdf_lemma_check(&d.group, &d.classes, &t, &psi, g, eps).unwrap();
        if report.applicable {
            applicable += 1;
            if !report.all_hold() {
                failed += 1;
            }
        }
    }
    let ok = applicable > 0 && failed == 0 && worst_star <= STAR_TOL;
    outcome(ok, format!("{applicable}/100 premises hold, {failed} failures, max star excess {worst_star:.2e}"))
}

fn covering_numbers() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, q) in [(2usize, 5u64), (2, 7), (3, 2)] {
        let d = GroupData::new(n, q, DEFAULT_GROUP_CAP).unwrap();
        let mut max = 0;
        for k in 0..d.classes.count() {
            match (covering_number(&d.constants, k), d.classes.is_central(k)) {
                (None, true) => {}
                (Some(m), false) => max = max.max(m),
                _ => ok = false,
            }
        }
        notes.push(format!("SL_{n}({q}): max {max}"));
    }
    outcome(ok, notes.join("; "))
}

fn lipschitz_concentration_tails() -> Outcome {
    let rs: Vec<Rational> = (1..=20).map(|k| Rational::new(k, 20)).collect();
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [128usize, 512] {
        let f = LipschitzFn::distance_to_identity(n, &Field::of_order(2).unwrap());
        let rep = lipschitz_concentration(n, 2, &f, &rs, 100_000, 10_000, n as u64).unwrap();
        let asserted = rep.rows.iter().filter(|r| r.bound < LEVY_ASSERT_BELOW).count();
        ok &= asserted > 0 && rep.holds_below(LEVY_ASSERT_BELOW);
        notes.push(format!("n={n}: median {:.4}, {asserted} binding radii", rep.median));
    }
    outcome(ok, notes.join("; "))
}

fn ramsey() -> Outcome {
    let n = 512;
    let field = Field::of_order(2).unwrap();
    let cover =
        FunctionalCover::uniform(LipschitzFn::distance_to_identity(n, &field), 2, Rational::new(1, 2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(512);
    let set = vec![
        MatF::identity(n, &field),
        sample_sl(n, &field, &mut rng).into_mat(),
        sample_sl(n, &field, &mut rng).into_mat(),
    ];
    let r = ramsey_search(n, 2, &cover, &set, 100, 20, 7).unwrap();
    let ok = r.hypothesis && r.successes == 100 && r.passed();
    outcome(
        ok,
        format!(
            "N = {:.1}, {}/100 found, good frequency {:.3} vs bound {:.3}",
            r.threshold, r.successes, r.good_frequency, r.bound
        ),
    )
}

fn folner() -> Outcome {
    let f = Field::of_order(2).unwrap();
    let z = AmenableGroup::FreeAbelian(1);
    let spec = FolnerSpec::new(z);
    let levels: Vec<u32> = (1..=12).collect();
    let mut ok = true;
    let profile = discreteness_profile(&[1], &[2], &spec, &levels, &f).unwrap();
    for (p, &n) in profile.iter().zip(&levels) {
        ok &= *p == Rational::new((1 << n) - 1, 1 << n);
    }
    let a = GroupRingElement::parse("(0)+(1)+(2)", z, &f).unwrap();
    for &n in &levels {
        let size = 1u64 << n;
        ok &= normalized_rank(&a, &spec, n).unwrap() >= Rational::new(size.saturating_sub(2), size);
    }
    for &n in &levels[..levels.len() - 1] {
        let r = nesting_check(&spec, &[1], n, &f).unwrap();
        ok &= r.boundary == Rational::new(1, 1 << n) && r.within;
    }
    let heis = FolnerSpec::new(AmenableGroup::Heisenberg);
    let b = GroupRingElement::parse("(0,0,0)+(1,0,0)+(0,1,0)", AmenableGroup::Heisenberg, &f).unwrap();
    let c = b.boundary_constant(AmenableGroup::Heisenberg) as f64;
    let mut ranks = Vec::new();
    for n in 0..=3u32 {
        let size = heis.size(n) as u64;
        let dom = domain_size(&heis, n, &b.support()).unwrap() as u64;
        let rank = normalized_rank(&b, &heis, n).unwrap();
        ok &= rank >= Rational::new(dom, size) && dom as f64 / size as f64 >= 1.0 - c / 2f64.powi(n as i32);
        ranks.push(format!("{:.4}", ratio(rank)));
    }
    outcome(ok, format!("Z levels 1..12 exact; Heisenberg normalized ranks {}", ranks.join(", ")))
}

fn sampling_uniformity() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for q in [3u64, 5] {
        let g = enumerate_group(2, q, DEFAULT_GROUP_CAP).unwrap();
        let f = g.field().clone();
        let mut counts = vec![0u64; g.order()];
        let mut rng = ChaCha8Rng::seed_from_u64(q);
        let draws = 100_000u64;
        for _ in 0..draws {
            counts[g.index_of(sample_sl(2, &f, &mut rng).mat()).expect("sample lies in SL_2")] += 1;
        }
        let expected = draws as f64 / g.order() as f64;
        let stat: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        let critical = ChiSquared::new((g.order() - 1) as f64).unwrap().inverse_cdf(1.0 - CHI_SQUARE_SIGNIFICANCE);
        ok &= stat < critical;
        notes.push(format!("SL_2({q}): chi2 {stat:.1} < {critical:.1}"));
    }
    let f2 = Field::of_order(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dets_ok = (0..2000).all(|i| sample_sl(1 + i % 40, &f2, &mut rng).mat().det().unwrap() == Fq::ONE);
    ok &= dets_ok;
    notes.push(format!("q=2 det 1: {dets_ok}"));
    outcome(ok, notes.join("; "))
}

fn center() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, q) in [(2usize, 2u64), (2, 3), (2, 5), (2, 7), (3, 2), (3, 3)] {
        let g = enumerate_group(n, q, DEFAULT_GROUP_CAP).unwrap();
        let f = g.field().clone();
        let center = group_center(&g);
        let roots: Vec<Fq> = f.nonzero_elements().filter(|&z| f.pow(z, n as u64) == Fq::ONE).collect();
        let scalars_ok = center.iter().all(|&i| {
            g.element(i).as_scalar().is_some_and(|z| f.pow(z, n as u64) == Fq::ONE)
        });
        ok &= scalars_ok && center == scalar_subgroup(&g) && center.len() == roots.len();
        notes.push(format!("SL_{n}({q}): {}", center.len()));
    }
    outcome(ok, notes.join("; "))
}

/// Name, wall-clock limit in seconds, runner.
type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("embedding exactness", 60, embedding_exactness),
        ("diameter witness", 120, diameter_witness),
        ("gluck bound", 300, gluck_bound),
        ("pdf lemma", 120, pdf_lemma),
        ("covering numbers", 60, covering_numbers),
        ("lipschitz concentration", 300, lipschitz_concentration_tails),
        ("ramsey", 300, ramsey),
        ("folner discreteness and rank", 180, folner),
        ("sampling uniformity", 60, sampling_uniformity),
        ("center", 60, center),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let passed = out.passed && elapsed < Duration::from_secs(*limit);
        failures += usize::from(!passed);
        println!(
            "{} {:>2} {name}: {} [{:.1}s, limit {limit}s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
