use clap::{ArgGroup, Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankmetric_core::concentration::{
    chain_profile, lipschitz_concentration, ramsey_search, stream_rng, FunctionalCover, LipschitzFn,
};
use rankmetric_core::embed::verify_embedding;
use rankmetric_core::field::field_check;
use rankmetric_core::folner::{domain_size, folner_rep, ring_rep, DEFAULT_SET_CAP};
use rankmetric_core::groups::{
    best_premise, covering_number, enumerate_group, gluck_check, group_center, pdf_lemma_check, random_pdf,
    scalar_subgroup, star_inequality_violation, GroupData, Pdf, DEFAULT_GROUP_CAP,
};
use rankmetric_core::matgf::{central_distance, sample_sl};
use rankmetric_core::{AmenableGroup, Field, FolnerSpec, GroupRingElement, MatF, Rational};
use serde_json::{json, Value};

use crate::artifact::{Artifact, Body, Meta};
use crate::{Cli, Command, Failure, Format};

/// Slack for floating-point comparisons in pass/fail decisions.
const FLOAT_SLACK: f64 = 1e-12;
/// Allowed excess in the inequality |ψ(a) − ψ(b)|² ≤ 2(1 − Re ψ(a⁻¹b)).
const STAR_TOL: f64 = 1e-10;

pub struct Report {
    pub artifact: Artifact,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Args, Debug)]
pub struct FieldCheckArgs {
    #[arg(long)]
    q: u64,
    /// Number of quadratic extension steps to build and check.
    #[arg(long, default_value_t = 1)]
    depth: usize,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[arg(long)]
    q: u64,
    /// Source matrices are 2^n x 2^n.
    #[arg(long)]
    n: u32,
    /// Number of quadratic steps down the tower.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Args, Debug)]
pub struct DiameterArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    q: u64,
}

#[derive(Args, Debug)]
pub struct PdfLemmaArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    q: u64,
    /// Number of positive definite functions to construct.
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Largest weight t in (1 - t)·1 + t·psi'.
    #[arg(long, default_value_t = 0.6)]
    t_max: f64,
    /// Random pairs per function for the star inequality.
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum LipschitzKind {
    /// d(x, id)
    Identity,
    /// d(x, a) for a uniform random a
    Random,
}

#[derive(Args, Debug)]
pub struct LevyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    q: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Comma-separated radii (decimals or fractions); defaults to k/20.
    #[arg(long)]
    r: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    certificate_pairs: usize,
    /// Radii whose bound is below this value are asserted.
    #[arg(long, default_value_t = 0.5)]
    assert_below: f64,
    #[arg(long, value_enum, default_value_t = LipschitzKind::Identity)]
    function: LipschitzKind,
}

#[derive(Args, Debug)]
pub struct RamseyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Lebesgue number of the cover, as a decimal or fraction.
    #[arg(long)]
    eps: String,
    /// Size of the finite set F (the identity plus k - 1 random elements).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Number of cover intervals.
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 50)]
    max_draws: usize,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("object").required(true).args(["elements", "ring"])))]
pub struct FolnerArgs {
    /// `z:d` or `heisenberg`.
    #[arg(long, default_value = "z:1")]
    group: String,
    /// Levels as `a..b` (inclusive) or a comma list.
    #[arg(long)]
    levels: String,
    /// Order of the coefficient field.
    #[arg(long, default_value_t = 2)]
    field: u64,
    /// One element `h` (its representation) or two `g;h` (their distance).
    #[arg(long)]
    elements: Option<String>,
    /// Group-ring element such as `1*(0)+1*(1)+(2)`.
    #[arg(long)]
    ring: Option<String>,
}

pub fn run(cli: &Cli) -> Result<Report, Failure> {
    let c = &cli.common;
    match &cli.command {
        Command::FieldCheck(a) => field_check_cmd(a, c.seed, fmt(c.format, Format::Json)),
        Command::EmbedVerify(a) => embed(a, c.seed, fmt(c.format, Format::Json)),
        Command::Diameter(a) => diameter(a, c.seed, fmt(c.format, Format::Csv)),
        Command::Chartab(a) => chartab(a, c.seed, group_cap(c.cap), fmt(c.format, Format::Json)),
        Command::Gluck(a) => gluck(a, c.seed, group_cap(c.cap), fmt(c.format, Format::Csv)),
        Command::Covering(a) => covering(a, c.seed, group_cap(c.cap), fmt(c.format, Format::Csv)),
        Command::PdfLemma(a) => pdf_lemma(a, c.seed, group_cap(c.cap), fmt(c.format, Format::Csv)),
        Command::Levy(a) => levy(a, c.seed, fmt(c.format, Format::Csv)),
        Command::Ramsey(a) => ramsey(a, c.seed, fmt(c.format, Format::Csv)),
        Command::Folner(a) => folner(a, c.seed, c.cap, fmt(c.format, Format::Csv)),
        Command::Center(a) => center(a, c.seed, group_cap(c.cap), fmt(c.format, Format::Json)),
    }
}

fn fmt(chosen: Option<Format>, default: Format) -> Format {
    chosen.unwrap_or(default)
}

fn group_cap(cap: Option<u64>) -> u64 {
    cap.unwrap_or(DEFAULT_GROUP_CAP)
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn json_only(format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(usage("this subcommand only produces JSON")),
    }
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses `0.25`, `1/4` or `3`.
pub fn parse_rational(s: &str) -> Result<Rational, Failure> {
    let t = s.trim();
    let bad = || usage(format!("bad number {s:?}"));
    if let Some((a, b)) = t.split_once('/') {
        let (a, b) = (a.trim().parse::<u64>().map_err(|_| bad())?, b.trim().parse::<u64>().map_err(|_| bad())?);
        if b == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10u64.pow(frac.len() as u32);
    let num = if frac.is_empty() { 0 } else { frac.parse::<u64>().map_err(|_| bad())? };
    int.checked_mul(den).and_then(|x| x.checked_add(num)).map(|n| Rational::new(n, den)).ok_or_else(bad)
}

/// Parses `a..b` (inclusive) or `a,b,c`.
pub fn parse_levels(s: &str) -> Result<Vec<u32>, Failure> {
    let bad = || usage(format!("bad level list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

/// One-line matrix text: rows separated by `;`, entries by spaces; prime
/// field entries are bare integers.
fn inline_matrix(m: &MatF) -> String {
    let f = m.field();
    let entry = |r, c| {
        let v = m.get(r, c);
        if f.is_prime_field() {
            v.0.to_string()
        } else {
            f.format_elem(v)
        }
    };
    let rows: Vec<String> =
        (0..m.rows()).map(|r| (0..m.cols()).map(|c| entry(r, c)).collect::<Vec<_>>().join(" ")).collect();
    format!("[{}]", rows.join("; "))
}

fn field_check_cmd(a: &FieldCheckArgs, seed: u64, format: Format) -> Result<Report, Failure> {
    json_only(format)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = field_check(a.q, a.depth, &mut rng)?;
    let methods: Vec<String> = report.tower.iter().map(|t| format!("{:?}", t.method).to_lowercase()).collect();
    let meta = Meta::new(seed, format!("axioms-{} tower-{}", report.axiom_scan, methods.join("/")));
    let passed = report.passed();
    Ok(Report {
        artifact: Artifact { body: Body::Json(json!(report)), meta, format },
        passed,
        witness: (!passed).then(|| format!("field GF({}) failed its checks", a.q)),
    })
}

fn embed(a: &EmbedArgs, seed: u64, format: Format) -> Result<Report, Failure> {
    json_only(format)?;
    let report = verify_embedding(a.q, a.n, a.m, a.trials, seed)?;
    let passed = report.failures == 0;
    let witness = (!passed).then(|| format!("{} of {} pairs failed", report.failures, report.trials));
    Ok(Report {
        artifact: Artifact { body: Body::Json(json!(report)), meta: Meta::new(seed, "chain-embed-exact"), format },
        passed,
        witness,
    })
}

fn diameter(a: &DiameterArgs, seed: u64, format: Format) -> Result<Report, Failure> {
    let p = chain_profile(a.n, a.q, a.samples, seed)?;
    let rows = (0..p.diameters.len())
        .map(|i| {
            vec![
                p.n.to_string(),
                p.q.to_string(),
                (i + 1).to_string(),
                to_f64(p.diameters[i]).to_string(),
                to_f64(p.observed[i]).to_string(),
            ]
        })
        .collect();
    let passed = p.failures == 0 && p.length <= p.length_bound + FLOAT_SLACK;
    let meta = Meta::new(seed, "stabilizer-reduction")
        .with("samples", p.samples)
        .with("failures", p.failures)
        .with("length", p.length)
        .with("length_bound", p.length_bound);
    Ok(Report {
        artifact: Artifact {
            body: Body::Table { columns: vec!["n", "q", "step", "certified_diameter", "observed_diameter"], rows },
            meta,
            format,
        },
        passed,
        witness: (!passed).then(|| format!("{} witnesses failed", p.failures)),
    })
}

fn chartab(a: &GroupArgs, seed: u64, cap: u64, format: Format) -> Result<Report, Failure> {
    json_only(format)?;
    let d = GroupData::new(a.n, a.q, cap)?;
    let t = d.character_table(seed)?;
    let reps: Vec<String> = (0..d.classes.count()).map(|k| inline_matrix(d.group.element(d.classes.rep(k)))).collect();
    let mut v = t.to_json(&reps);
    if let Value::Object(o) = &mut v {
        o.insert("n".into(), json!(a.n));
        o.insert("q".into(), json!(a.q));
        o.insert("orthogonality_error".into(), json!(t.orthogonality_error()));
        o.insert("degree_residual".into(), json!(t.degree_residual()));
        o.insert("attempts".into(), json!(t.attempts()));
    }
    Ok(Report {
        artifact: Artifact { body: Body::Json(v), meta: Meta::new(seed, "dixon-burnside-eigen"), format },
        passed: true,
        witness: None,
    })
}

fn gluck(a: &GroupArgs, seed: u64, cap: u64, format: Format) -> Result<Report, Failure> {
    let d = GroupData::new(a.n, a.q, cap)?;
    let t = d.character_table(seed)?;
    let r = gluck_check(&t, &d.classes, a.q);
    let mut rows = Vec::new();
    for k in 0..d.classes.count() {
        let Some(v) = r.per_class[k] else { continue };
        let rep = d.group.element(d.classes.rep(k));
        rows.push(vec![
            a.q.to_string(),
            a.n.to_string(),
            inline_matrix(rep),
            central_distance(rep)?.0.to_string(),
            "max_normalized_character".to_string(),
            v.to_string(),
        ]);
    }
    let witness = r.witness.filter(|_| !r.passed).map(|(k, chi)| {
        format!(
            "class {} character {}: {} >= {}",
            inline_matrix(d.group.element(d.classes.rep(k))),
            chi,
            r.max_ratio,
            r.bound
        )
    });
    let meta = Meta::new(seed, "dixon-burnside-eigen").with("bound", r.bound).with("max_ratio", r.max_ratio);
    Ok(Report { artifact: class_table(rows, meta, format), passed: r.passed, witness })
}

fn class_table(rows: Vec<Vec<String>>, meta: Meta, format: Format) -> Artifact {
    Artifact { body: Body::Table { columns: vec!["q", "n", "class_rep", "delta", "metric", "value"], rows }, meta, format }
}

fn covering(a: &GroupArgs, seed: u64, cap: u64, format: Format) -> Result<Report, Failure> {
    let d = GroupData::new(a.n, a.q, cap)?;
    let mut rows = Vec::new();
    let mut witness = None;
    for k in 0..d.classes.count() {
        let rep = d.group.element(d.classes.rep(k));
        let m = covering_number(&d.constants, k);
        if m.is_some() == d.classes.is_central(k) && witness.is_none() {
            witness = Some(format!("class {} has covering number {m:?}", inline_matrix(rep)));
        }
        rows.push(vec![
            a.q.to_string(),
            a.n.to_string(),
            inline_matrix(rep),
            central_distance(rep)?.0.to_string(),
            "covering_number".to_string(),
            m.map_or_else(|| "none".to_string(), |m| m.to_string()),
        ]);
    }
    let meta = Meta::new(seed, "class-support-closure");
    Ok(Report { artifact: class_table(rows, meta, format), passed: witness.is_none(), witness })
}

fn pdf_lemma(a: &PdfLemmaArgs, seed: u64, cap: u64, format: Format) -> Result<Report, Failure> {
    if !(a.t_max > 0.0 && a.t_max <= 1.0) {
        return Err(usage("t-max must lie in (0, 1]"));
    }
    let d = GroupData::new(a.n, a.q, cap)?;
    let t = d.character_table(seed)?;
    d.group.ensure_mul_table();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trivial = Pdf::trivial(d.group.order());
    let mut rows = Vec::new();
    let mut witness = None;
    for i in 0..a.count {
        let (source, other) = if i % 4 == 3 && t.count() > 1 {
            let chi = 1 + i % (t.count() - 1);
            (format!("character-{chi}"), Pdf::normalized_character(&t, &d.classes, chi))
        } else {
            ("random".to_string(), random_pdf(&d.group, &mut rng))
        };
        let weight = rng.gen_range(0.0..a.t_max).max(1e-3);
        let psi = trivial.mix(&other, weight);
        let star = star_inequality_violation(&d.group, &psi, a.pairs, &mut rng);
        let Some((g, worst)) = best_premise(&d.classes, &psi) else {
            return Err(usage("the group has no non-central class"));
        };
        let r = pdf_lemma_check(&d.group, &d.classes, &t, &psi, g, worst + 1e-8)?;
        let holds = r.all_hold() && star <= STAR_TOL;
        if !holds && witness.is_none() {
            witness = Some(format!("function {i} ({source}) breaks a step: {r:?}, star excess {star}"));
        }
        rows.push(vec![
            i.to_string(),
            source,
            weight.to_string(),
            r.eps.to_string(),
            r.applicable.to_string(),
            r.delta.to_string(),
            r.lambda.to_string(),
            r.chi_deviation.to_string(),
            r.markov_fraction.to_string(),
            r.a_fraction.to_string(),
            r.conclusion_value.to_string(),
            r.conclusion_bound.to_string(),
            star.to_string(),
            holds.to_string(),
        ]);
    }
    let columns = vec![
        "trial",
        "source",
        "t",
        "eps",
        "applicable",
        "delta",
        "lambda",
        "chi_deviation",
        "markov_fraction",
        "a_fraction",
        "conclusion_value",
        "conclusion_bound",
        "star_excess",
        "holds",
    ];
    let meta = Meta::new(seed, "mixture-pdf-exhaustive").with("n", a.n).with("q", a.q);
    Ok(Report {
        artifact: Artifact { body: Body::Table { columns, rows }, meta, format },
        passed: witness.is_none(),
        witness,
    })
}

const TAIL_COLUMNS: [&str; 8] = ["n", "q", "r_or_eps", "bound", "empirical", "stderr", "samples", "seed"];

fn levy(a: &LevyArgs, seed: u64, format: Format) -> Result<Report, Failure> {
    let rs: Vec<Rational> = match &a.r {
        Some(list) => list.split(',').map(parse_rational).collect::<Result<_, _>>()?,
        None => (1..=20).map(|k| Rational::new(k, 20)).collect(),
    };
    let field = Field::of_order(a.q)?;
    let f = match a.function {
        LipschitzKind::Identity => LipschitzFn::distance_to_identity(a.n, &field),
        LipschitzKind::Random => {
            LipschitzFn::DistanceTo(sample_sl(a.n, &field, &mut stream_rng(seed, u64::MAX)).into_mat())
        }
    };
    let rep = lipschitz_concentration(a.n, a.q, &f, &rs, a.samples, a.certificate_pairs, seed)?;
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                a.n.to_string(),
                a.q.to_string(),
                r.r.to_string(),
                r.bound.to_string(),
                r.empirical.to_string(),
                r.stderr.to_string(),
                a.samples.to_string(),
                seed.to_string(),
            ]
        })
        .collect();
    let passed = rep.holds_below(a.assert_below);
    let witness = rep
        .rows
        .iter()
        .find(|r| r.bound < a.assert_below && !r.within)
        .map(|r| format!("r = {}: empirical {} > bound {} + 3 stderr", r.r, r.empirical, r.bound));
    let meta = Meta::new(seed, "levy-tail-monte-carlo")
        .with("function", format!("{:?}", a.function).to_lowercase())
        .with("median", rep.median)
        .with("assert_below", a.assert_below)
        .with("certificate_pairs", a.certificate_pairs);
    Ok(Report {
        artifact: Artifact { body: Body::Table { columns: TAIL_COLUMNS.to_vec(), rows }, meta, format },
        passed,
        witness,
    })
}

fn ramsey(a: &RamseyArgs, seed: u64, format: Format) -> Result<Report, Failure> {
    if a.k == 0 {
        return Err(usage("k must be at least 1"));
    }
    let eps = parse_rational(&a.eps)?;
    let field = Field::of_order(a.q)?;
    let cover = FunctionalCover::uniform(LipschitzFn::distance_to_identity(a.n, &field), a.m, eps)?;
    let mut rng = stream_rng(seed, u64::MAX);
    let mut set = vec![MatF::identity(a.n, &field)];
    set.extend((1..a.k).map(|_| sample_sl(a.n, &field, &mut rng).into_mat()));
    let r = ramsey_search(a.n, a.q, &cover, &set, a.trials, a.max_draws, seed)?;
    let passed = !r.hypothesis || r.passed();
    let rows = vec![vec![
        a.n.to_string(),
        a.q.to_string(),
        r.eps.to_string(),
        r.bound.to_string(),
        r.good_frequency.to_string(),
        r.stderr.to_string(),
        r.trials.to_string(),
        seed.to_string(),
    ]];
    let meta = Meta::new(seed, "functional-cover-search")
        .with("k", a.k)
        .with("m", a.m)
        .with("successes", r.successes)
        .with("threshold", r.threshold)
        .with("hypothesis", r.hypothesis)
        .with("mean_draws", r.mean_draws);
    let witness =
        (!passed).then(|| format!("{}/{} trials succeeded, good frequency {}", r.successes, r.trials, r.good_frequency));
    Ok(Report {
        artifact: Artifact { body: Body::Table { columns: TAIL_COLUMNS.to_vec(), rows }, meta, format },
        passed,
        witness,
    })
}

fn folner(a: &FolnerArgs, seed: u64, cap: Option<u64>, format: Format) -> Result<Report, Failure> {
    let group: AmenableGroup = a.group.parse()?;
    let spec = FolnerSpec::with_cap(group, cap.map_or(DEFAULT_SET_CAP, |c| c as usize));
    let levels = parse_levels(&a.levels)?;
    let field = Field::of_order(a.field)?;
    let mut rows = Vec::new();
    let mut witness: Option<String> = None;
    let mut fail = |msg: String| {
        if witness.is_none() {
            witness = Some(msg);
        }
    };
    let method;
    if let Some(text) = &a.ring {
        method = "ring-representation";
        let ring = GroupRingElement::parse(text, group, &field)?;
        let c = ring.boundary_constant(group) as f64;
        for &n in &levels {
            let size = spec.size(n) as usize;
            let rep = ring_rep(&ring, &spec, n)?;
            let dom = domain_size(&spec, n, &ring.support())?;
            let rank = rep.rank();
            if rank < dom || (dom as f64) < size as f64 * (1.0 - c / 2f64.powi(n as i32)) - FLOAT_SLACK {
                fail(format!("level {n}: rank {rank}, |L_n| {dom}, |F_n| {size}"));
            }
            rows.push(folner_row(n, size, dom, rank, rank as f64 / size as f64));
        }
    } else {
        let elems: Vec<Vec<i64>> = a
            .elements
            .as_deref()
            .unwrap_or_default()
            .split(';')
            .map(|s| group.parse_elem(s))
            .collect::<Result<_, _>>()?;
        match elems.as_slice() {
            [h] => {
                method = "partial-permutation";
                let c = group.boundary_constant(h) as f64;
                for &n in &levels {
                    let size = spec.size(n) as usize;
                    let rank = folner_rep(h, &spec, n, &field)?.rank();
                    let dom = domain_size(&spec, n, std::slice::from_ref(h))?;
                    if rank != dom || (dom as f64) < size as f64 * (1.0 - c / 2f64.powi(n as i32)) - FLOAT_SLACK {
                        fail(format!("level {n}: rank {rank}, |L_n| {dom}, |F_n| {size}"));
                    }
                    rows.push(folner_row(n, size, dom, rank, rank as f64 / size as f64));
                }
            }
            [g, h] => {
                method = "discreteness-profile";
                let slack = (group.boundary_constant(g) + group.boundary_constant(h)) as f64;
                let mut prev: Option<(u32, f64)> = None;
                for &n in &levels {
                    let size = spec.size(n) as usize;
                    let diff = folner_rep(g, &spec, n, &field)?.sub(&folner_rep(h, &spec, n, &field)?);
                    let rank = diff.rank();
                    let dom = domain_size(&spec, n, &[g.clone(), h.clone()])?;
                    let value = rank as f64 / size as f64;
                    if value > 1.0 {
                        fail(format!("level {n}: distance {value} exceeds 1"));
                    }
                    if let Some((m, before)) = prev {
                        if m + 1 == n && value < before - slack / 2f64.powi(m as i32) - FLOAT_SLACK {
                            fail(format!("level {m} -> {n}: distance drops from {before} to {value}"));
                        }
                    }
                    prev = Some((n, value));
                    rows.push(folner_row(n, size, dom, rank, value));
                }
            }
            _ => return Err(usage("--elements takes one element or two separated by ';'")),
        }
    }
    let columns = vec!["level", "F_n", "L_n", "rank", "normalized_rank_or_distance"];
    let meta = Meta::new(seed, method).with("group", group).with("field", a.field);
    Ok(Report {
        artifact: Artifact { body: Body::Table { columns, rows }, meta, format },
        passed: witness.is_none(),
        witness,
    })
}

fn folner_row(n: u32, size: usize, dom: usize, rank: usize, value: f64) -> Vec<String> {
    vec![n.to_string(), size.to_string(), dom.to_string(), rank.to_string(), value.to_string()]
}

fn center(a: &GroupArgs, seed: u64, cap: u64, format: Format) -> Result<Report, Failure> {
    json_only(format)?;
    let g = enumerate_group(a.n, a.q, cap)?;
    let f = g.field().clone();
    let center = group_center(&g);
    let scalars = scalar_subgroup(&g);
    let label = |i: &usize| g.element(*i).as_scalar().map(|z| f.format_elem(z)).unwrap_or_else(|| "non-scalar".into());
    let mut distances_zero = true;
    for &i in &center {
        distances_zero &= central_distance(g.element(i))?.0 == Rational::from_integer(0);
    }
    let roots: Vec<String> =
        f.nonzero_elements().filter(|&z| f.pow(z, a.n as u64).0 == 1).map(|z| f.format_elem(z)).collect();
    let matches = center == scalars && center.len() == roots.len() && distances_zero;
    let body = json!({
        "n": a.n,
        "q": a.q,
        "order": g.order(),
        "center": center.iter().map(label).collect::<Vec<_>>(),
        "scalar_roots_of_unity": roots,
        "matches": matches,
    });
    Ok(Report {
        artifact: Artifact { body: Body::Json(body), meta: Meta::new(seed, "exhaustive-centralizer"), format },
        passed: matches,
        witness: (!matches).then(|| "center differs from the scalar roots of unity".to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_and_levels() {
        assert_eq!(parse_rational("0.5").ok(), Some(Rational::new(1, 2)));
        assert_eq!(parse_rational("1/4").ok(), Some(Rational::new(1, 4)));
        assert_eq!(parse_rational("2").ok(), Some(Rational::from_integer(2)));
        assert_eq!(parse_rational(".125").ok(), Some(Rational::new(1, 8)));
        assert!(parse_rational("1/0").is_err() && parse_rational("-1").is_err() && parse_rational("x").is_err());
        assert_eq!(parse_levels("1..4").ok(), Some(vec![1, 2, 3, 4]));
        assert_eq!(parse_levels("3, 5").ok(), Some(vec![3, 5]));
        assert!(parse_levels("4..1").is_err());
    }
}
