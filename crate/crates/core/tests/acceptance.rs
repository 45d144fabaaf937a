//! Acceptance criteria 1 to 10, one PASS/FAIL line each.
//!
//! Runs without the libtest harness and exits nonzero if any criterion
//! fails.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdc::assess::{
    assess_all, cohens_h, confidence_upper_bound, eval_precondition, min_coverage, wilson_lower_confidence,
    AssessConfig, AssessedSdc, ContingencyTable,
};
use sdc::candidates::{enumerate_candidates, GridSpec, RadiusGrid, Sdc};
use sdc::corpus::{normalize_value, sample_columns, Column, Corpus, CorpusOptions, PreparedCorpus};
use sdc::demo::{generate_demo, Demo, DemoConfig, DemoRegistryOptions};
use sdc::domain::{
    builtin_validators, infer_patterns, make_embedding_fn, make_random_hash_fn, make_score_table_fn, EmbeddingSpace,
    Family, Registry,
};
use sdc::eval::{baseline_sweep, f1_at_precision, inject_errors, pr_auc, pr_curve, GroundTruth, Metrics};
use sdc::infer::{
    compile_ruleset, detect_corpus, detect_errors, detect_errors_counted, detect_errors_naive, Detection,
};
use sdc::pipeline::{generate, select_rules};
use sdc::select::{
    brute_force_ilp, build_css_ilp, build_fss_ilp, column_confidences, randomized_round, solve_lp_relaxation,
    IlpProblem, SelectionConfig,
};
use sdc::synth::CandidateStats;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// 1000 covered columns with 10 triggered; 200000 uncovered, 80% triggered.
fn reference_counts() -> ContingencyTable {
    ContingencyTable::new(10, 990, 160_000, 40_000)
}

fn criterion_1() -> Outcome {
    let t = reference_counts();
    let start = Instant::now();
    let h = cohens_h(&t);
    let elapsed = start.elapsed();
    match h {
        Ok(h) => outcome(
            (h.h.abs() - 2.01).abs() <= 0.01 && elapsed < Duration::from_millis(1),
            format!("|h| = {:.4}, {:?}", h.h.abs(), elapsed),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

/// One minus the Wilson upper limit of the trigger rate among covered
/// columns.
fn wilson_oracle(triggered: f64, n: f64, z: f64) -> f64 {
    let p = triggered / n;
    let centre = p + z * z / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    1.0 - (centre + half) / (1.0 + z * z / n)
}

fn criterion_2() -> Outcome {
    let z = AssessConfig::default().z;
    let got = wilson_lower_confidence(&reference_counts(), z).unwrap();
    let want = wilson_oracle(10.0, 1000.0, z);
    let mut pass = (got - want).abs() <= 1e-9 && (got - 0.9833).abs() < 5e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..100_000u64);
        let ct = rng.gen_range(0..=n);
        let z = rng.gen_range(0.5..3.5);
        let t = ContingencyTable::new(ct, n - ct, 0, 0);
        worst = worst.max((wilson_lower_confidence(&t, z).unwrap() - wilson_oracle(ct as f64, n as f64, z)).abs());
    }
    pass &= worst <= 1e-9;
    let mut exact = true;
    for n in (1..=5000u64).chain([10_000, 123_457, 1_000_000]) {
        for z in [1.0, 1.65, 1.96, 2.576] {
            let t = ContingencyTable::new(0, n, 0, 0);
            exact &= wilson_lower_confidence(&t, z).unwrap() == confidence_upper_bound(n, z);
        }
    }
    pass &= exact;
    outcome(
        pass,
        format!("c = {got:.10}, oracle {want:.10}, max random deviation {worst:.1e}, n_CT = 0 exact: {exact}"),
    )
}

/// A random corpus mixing vocabularies, formats and noise, with a small
/// registry over it.
fn random_corpus(rng: &mut ChaCha8Rng) -> (Corpus, Registry) {
    const WORDS: [&str; 12] = [
        "red", "blue", "green", "teal", "navy", "pink", "oslo", "rome", "lima", "kyiv", "bern", "doha",
    ];
    let n_cols = rng.gen_range(60..=200);
    let mut columns = Vec::new();
    for i in 0..n_cols {
        let kind = rng.gen_range(0..5);
        let len = rng.gen_range(3..=30);
        let values = (0..len)
            .map(|_| {
                let k = if rng.gen_bool(0.03) { rng.gen_range(0..5) } else { kind };
                match k {
                    0 => WORDS[rng.gen_range(0..6)].to_string(),
                    1 => WORDS[rng.gen_range(6..12)].to_string(),
                    2 => format!(
                        "{}-{:02}-{:02}",
                        rng.gen_range(1990..2030),
                        rng.gen_range(1..13),
                        rng.gen_range(1..29)
                    ),
                    3 => format!("{}@{}.com", WORDS[rng.gen_range(0..12)], WORDS[rng.gen_range(0..12)]),
                    _ => (0..rng.gen_range(3..9))
                        .map(|_| rng.gen_range(b'a'..=b'z') as char)
                        .collect(),
                }
            })
            .collect();
        columns.push(Column::new(format!("c{i}"), values));
    }
    let corpus = Corpus::new(columns).unwrap();

    let mut space = EmbeddingSpace::new("toy", 2);
    for (k, w) in WORDS.iter().enumerate() {
        let base = if k < 6 { 0.0 } else { 5.0 };
        space.insert(
            *w,
            vec![base + rng.gen_range(-0.5..0.5), base + rng.gen_range(-0.5..0.5)],
        );
    }
    let space = Arc::new(space);
    let mut registry = Registry::new();
    registry.add_space(space.clone(), None);
    registry.add(make_embedding_fn(&space, WORDS[0]).unwrap());
    registry.add(make_embedding_fn(&space, WORDS[7]).unwrap());
    let colors = WORDS[..6].iter().map(|w| (w.to_string(), rng.gen_range(0.6..1.0)));
    registry.add(make_score_table_fn("color", colors, 0.0).unwrap());
    registry.add(make_random_hash_fn(rng.gen()));
    registry.extend(infer_patterns(&corpus, 4));
    registry.extend(builtin_validators());
    (corpus, registry)
}

fn small_grid() -> GridSpec {
    let mut g = GridSpec {
        m_values: vec![1.0, 0.9, 0.8, 0.6, 0.5],
        ..GridSpec::default()
    };
    g.radii.insert(
        Family::Embedding,
        RadiusGrid {
            d_in: vec![4.0, 2.0, 1.0, 0.5],
            d_out: vec![0.5, 1.5],
            relative: true,
        },
    );
    let unit = RadiusGrid {
        d_in: vec![0.5, 0.3, 0.1],
        d_out: vec![0.9, 1.0],
        relative: false,
    };
    g.radii.insert(Family::ScoreTable, unit.clone());
    g.radii.insert(Family::RandomHash, unit);
    g
}

fn r_all_bytes(r: &[AssessedSdc]) -> Vec<u8> {
    let mut out = Vec::new();
    for a in r {
        serde_json::to_writer(&mut out, a).unwrap();
        out.push(b'\n');
    }
    out
}

fn criterion_3() -> Outcome {
    let mc = min_coverage(1.65, 0.9);

    let mut runner = TestRunner::new(PropConfig {
        cases: 2000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let monotone = runner
        .run(&(0u64..=1_000_000, 0u64..=1_000_000, 0.1f64..4.0), |(a, b, z)| {
            let (lo, hi) = (a.min(b), a.max(b));
            proptest::prop_assert!(confidence_upper_bound(lo, z) <= confidence_upper_bound(hi, z));
            Ok(())
        })
        .is_ok();
    let mut sweep = true;
    let mut prev = confidence_upper_bound(0, 1.65);
    for n in 1..=1_000_000u64 {
        let c = confidence_upper_bound(n, 1.65);
        sweep &= c >= prev;
        prev = c;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = small_grid();
    let mut identical = 0;
    let mut max_candidates = 0;
    let mut accepted = 0;
    for _ in 0..50 {
        let (corpus, registry) = random_corpus(&mut rng);
        let prepared = PreparedCorpus::new(&corpus, &CorpusOptions::default());
        let cfg = AssessConfig {
            z: *[1.65, 1.96].choose(&mut rng).unwrap(),
            ..AssessConfig::default()
        };
        let cands: Vec<Sdc> = enumerate_candidates(registry.functions(), &grid).take(500).collect();
        max_candidates = max_candidates.max(cands.len());
        let pruned = assess_all(cands.clone(), &prepared, &registry, &cfg, true).unwrap();
        let full = assess_all(cands, &prepared, &registry, &cfg, false).unwrap();
        accepted += full.accepted.len();
        if r_all_bytes(&pruned.accepted) == r_all_bytes(&full.accepted) {
            identical += 1;
        }
    }
    outcome(
        mc == 25 && monotone && sweep && identical == 50,
        format!(
            "min coverage {mc}, monotone (proptest {monotone}, sweep {sweep}), pruned == unpruned on {identical}/50 corpora (<= {max_candidates} candidates, {accepted} accepted in total)"
        ),
    )
}

fn random_stats(rng: &mut ChaCha8Rng) -> (Vec<CandidateStats>, Vec<String>) {
    let n = rng.gen_range(2..=12);
    let m = rng.gen_range(5..=30);
    let stats = (0..n)
        .map(|i| {
            let p = rng.gen_range(0.05..0.5);
            let detected = (0..m as u32).filter(|_| rng.gen_bool(p)).collect();
            CandidateStats {
                sdc: Sdc::new(format!("f{i}"), 0.0, 1.0, 0.9).with_confidence(rng.gen_range(0.9..1.0)),
                detected,
                fpr: rng.gen_range(0.0..0.06),
            }
        })
        .collect();
    (stats, (0..m).map(|j| format!("syn:{j}")).collect())
}

struct RoundingCheck {
    lp_ge_opt: bool,
    objective_ok: bool,
    size_ok: bool,
    fpr_ok: bool,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check_rounding(problem: &IlpProblem, seeds: u64) -> RoundingCheck {
    let (opt, _) = brute_force_ilp(problem).unwrap();
    let lp = solve_lp_relaxation(problem).unwrap();
    let (mut objs, mut sizes, mut fprs) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..seeds {
        let r = randomized_round(&lp, seed);
        objs.push(problem.objective(&r) as f64);
        sizes.push(r.len() as f64);
        fprs.push(problem.fpr_sum(&r));
    }
    let (mo, so) = mean_and_se(&objs);
    let (ms, ss) = mean_and_se(&sizes);
    let (mf, sf) = mean_and_se(&fprs);
    RoundingCheck {
        lp_ge_opt: lp.objective >= opt as f64 - 1e-9,
        objective_ok: mo >= (1.0 - (-1.0f64).exp()) * opt as f64 - 3.0 * so,
        size_ok: ms <= problem.b_size as f64 + 3.0 * ss,
        fpr_ok: mf <= problem.b_fpr + 3.0 * sf,
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    for inst in 0..20 {
        let (stats, ids) = random_stats(&mut rng);
        let cfg = SelectionConfig {
            b_size: rng.gen_range(1..=stats.len()),
            b_fpr: rng.gen_range(0.02..0.2),
            delta: 0.02,
            ..SelectionConfig::default()
        };
        let css = build_css_ilp(&stats, &ids, &cfg);
        let fss = build_fss_ilp(&stats, &column_confidences(&stats, ids.len()), &ids, &cfg);
        for (name, p) in [("css", &css), ("fss", &fss)] {
            let c = check_rounding(p, 20_000);
            for (ok, what) in [
                (c.lp_ge_opt, "lp < opt"),
                (c.objective_ok, "objective"),
                (c.size_ok, "size"),
                (c.fpr_ok, "fpr"),
            ] {
                if !ok {
                    failures.push(format!("instance {inst} {name}: {what}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(300),
        format!("20 instances x (css, fss) x 20000 seeds in {elapsed:.1?}; failures: {failures:?}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut same = 0;
    let total = 200;
    for _ in 0..total {
        let (stats, ids) = random_stats(&mut rng);
        let cfg = SelectionConfig {
            delta: 1.0,
            ..SelectionConfig::default()
        };
        let css = build_css_ilp(&stats, &ids, &cfg);
        let fss = build_fss_ilp(&stats, &column_confidences(&stats, ids.len()), &ids, &cfg);
        if css.cover_sets == fss.cover_sets {
            same += 1;
        }
    }
    outcome(same == total, format!("identical K_j on {same}/{total} instances"))
}

/// The desk-scale setup shared by criteria 6, 8 and 10.
struct Desk {
    demo: Demo,
    train: PreparedCorpus,
    registry: Registry,
    dirty: Corpus,
    truth: GroundTruth,
}

fn desk() -> Desk {
    let demo = generate_demo(&DemoConfig::default()).unwrap();
    let (train, test) = sample_columns(&demo.corpus, 400, 1).unwrap();
    let registry = demo.registry(&train, &DemoRegistryOptions::default()).unwrap();
    let (dirty, truth) = inject_errors(&test, &demo.truth_for(&test), 0.1, 3).unwrap();
    let train = PreparedCorpus::new(&train, &CorpusOptions::default());
    Desk {
        demo,
        train,
        registry,
        dirty,
        truth,
    }
}

struct Run {
    r_all: Vec<AssessedSdc>,
    report: Vec<Detection>,
}

fn run_pipeline(d: &Desk, registry: &Registry) -> Run {
    let r_all = generate(&d.train, registry, &GridSpec::default(), &AssessConfig::default(), true)
        .unwrap()
        .accepted;
    let selected = select_rules(&d.train, registry, &r_all, None, 0, &SelectionConfig::default()).unwrap();
    let ruleset = compile_ruleset(&selected.sdcs, registry).unwrap();
    let held = PreparedCorpus::new(&d.dirty, &CorpusOptions::default());
    Run {
        r_all,
        report: detect_corpus(&ruleset, &held, 0.0),
    }
}

fn report_bytes(r: &[Detection]) -> Vec<u8> {
    let mut out = Vec::new();
    for d in r {
        serde_json::to_writer(&mut out, d).unwrap();
        out.push(b'\n');
    }
    out
}

fn criterion_6(d: &Desk, base: &Run) -> Outcome {
    let mut noisy = d.registry.clone();
    noisy.extend((0..100).map(|i| make_random_hash_fn(90_000 + i)));
    let run = run_pipeline(d, &noisy);
    let hashes: Vec<&AssessedSdc> = run.r_all.iter().filter(|a| a.sdc.fn_id.starts_with("hash:")).collect();
    let hash_accepted = hashes.len();
    // Majority domain among the training columns each accepted hash
    // constraint covers.
    let mut dominant: BTreeMap<String, usize> = BTreeMap::new();
    for a in &hashes {
        let f = noisy.require(&a.sdc.fn_id).unwrap();
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for (id, values) in d.train.ids.iter().zip(&d.train.columns) {
            if eval_precondition(f, &a.sdc, values) {
                *counts.entry(d.demo.domains[id].as_str()).or_default() += 1;
            }
        }
        if let Some((dom, _)) = counts.iter().max_by_key(|(_, c)| **c) {
            *dominant.entry(dom.to_string()).or_default() += 1;
        }
    }
    let same_r_all = r_all_bytes(&run.r_all) == r_all_bytes(&base.r_all);
    let same_report = report_bytes(&run.report) == report_bytes(&base.report);
    outcome(
        hash_accepted == 0 && same_r_all && same_report,
        format!(
            "{} functions with hashes, {hash_accepted} hash candidates accepted (majority domain counts {:?}), R_all identical: {same_r_all}, report identical: {same_report}",
            noisy.len(),
            dominant
        ),
    )
}

fn criterion_7(d: &Desk, base: &Run) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pool: Vec<Sdc> = base.r_all.iter().map(|a| a.sdc.clone()).collect();
    let columns = d.demo.corpus.columns();
    let mut mismatches = 0;
    let mut fewer_violations = 0;
    let mut grouped_pairs = 0;
    let mut flagged = 0;
    for _ in 0..1000 {
        let k = rng.gen_range(1..=60);
        let mut sdcs: Vec<Sdc> = pool.choose_multiple(&mut rng, k).cloned().collect();
        if rng.gen_bool(0.5) {
            // Add every candidate sharing a precondition with a random one.
            let anchor = pool.choose(&mut rng).unwrap();
            let key = (anchor.fn_id.as_str(), anchor.d_in.to_bits(), anchor.m.to_bits());
            sdcs.extend(
                pool.iter()
                    .filter(|s| (s.fn_id.as_str(), s.d_in.to_bits(), s.m.to_bits()) == key)
                    .cloned(),
            );
        }
        sdcs.sort_by(|a, b| a.id.cmp(&b.id));
        sdcs.dedup_by(|a, b| a.id == b.id);
        let col = columns.choose(&mut rng).unwrap();
        let mut raw = col.values.clone();
        for _ in 0..rng.gen_range(0..3) {
            let donor = columns.choose(&mut rng).unwrap();
            let v = donor.values.choose(&mut rng).unwrap().clone();
            let pos = rng.gen_range(0..=raw.len());
            raw.insert(pos, v);
        }
        let values: Vec<_> = raw.iter().map(|v| normalize_value(v)).collect();
        let ruleset = compile_ruleset(&sdcs, &d.registry).unwrap();
        let (fast, fast_checks) = detect_errors_counted(&ruleset, &col.id, &values);
        let (slow, slow_checks) = detect_errors_naive(&sdcs, &d.registry, &col.id, &values).unwrap();
        if fast != slow {
            mismatches += 1;
        }
        flagged += fast.len();
        if ruleset.precondition_groups.iter().any(|g| g.members.len() >= 2) {
            grouped_pairs += 1;
            if fast_checks >= slow_checks {
                fewer_violations += 1;
            }
        }
    }
    outcome(
        mismatches == 0 && fewer_violations == 0 && grouped_pairs > 0,
        format!(
            "{mismatches} mismatches over 1000 pairs ({flagged} detections); {grouped_pairs} pairs with shared preconditions, {fewer_violations} without fewer checks"
        ),
    )
}

fn criterion_8(d: &Desk, base: &Run, setup: Duration) -> Outcome {
    let start = Instant::now();
    let metrics = Metrics::compute(&base.report, &d.truth);
    let held = PreparedCorpus::new(&d.dirty, &CorpusOptions::default());
    let baselines = baseline_sweep(&d.registry, &held, &d.truth).unwrap();
    let best = baselines
        .first()
        .map(|b| (b.name.clone(), b.pr_auc))
        .unwrap_or_default();
    let top = metrics.points.first().copied();
    let elapsed = setup + start.elapsed();
    let pass = top.is_some_and(|p| p.precision >= 0.8 && p.recall > 0.0)
        && metrics.pr_auc > best.1
        && elapsed < Duration::from_secs(900);
    outcome(
        pass,
        format!(
            "{} columns, {} errors; top band precision {:.3} recall {:.3}; PR-AUC {:.4} vs best baseline {} {:.4}; {elapsed:.1?}",
            d.demo.corpus.len(),
            d.truth.total_errors(),
            top.map_or(0.0, |p| p.precision),
            top.map_or(0.0, |p| p.recall),
            metrics.pr_auc,
            best.0,
            best.1
        ),
    )
}

fn det(column: &str, index: usize, confidence: f64) -> Detection {
    Detection {
        column_id: column.into(),
        value_index: index,
        value: String::new(),
        confidence,
        sdc_id: "r".into(),
        explanation: String::new(),
    }
}

fn criterion_9() -> Outcome {
    let mut truth = GroundTruth::default();
    truth.mark("a", 0);
    truth.mark("b", 1);
    let perfect = [det("a", 0, 0.9), det("b", 1, 0.8)];
    let perfect_auc = pr_auc(&pr_curve(&perfect, &truth));

    let noisy = [det("x", 0, 0.9), det("a", 0, 0.8), det("y", 0, 0.7)];
    let zero_f1 = f1_at_precision(&pr_curve(&noisy, &truth), 0.8);

    // Errors at a:3, b:0 and c:7. Ranked: hit, miss, hit, miss.
    // Points (recall, precision): (1/3, 1), (1/3, 1/2), (2/3, 2/3), (2/3, 1/2).
    // Area: 1/3 * 1 + (1/3) * (1/2 + 2/3) / 2 = 19/36.
    // F1 at precision 0.8: the first point, 2 * 1 * (1/3) / (4/3) = 1/2.
    let mut t = GroundTruth::default();
    t.mark("a", 3);
    t.mark("b", 0);
    t.mark("c", 7);
    let report = [det("a", 3, 0.99), det("b", 2, 0.95), det("b", 0, 0.9), det("d", 1, 0.5)];
    let m = Metrics::compute(&report, &t);
    let auc_err = (m.pr_auc - 19.0 / 36.0).abs();
    let f1_err = (m.f1_at_p08 - 0.5).abs();
    outcome(
        perfect_auc == 1.0 && zero_f1 == 0.0 && auc_err <= 1e-9 && f1_err <= 1e-9,
        format!("perfect PR-AUC {perfect_auc}, F1 with no qualifying point {zero_f1}, hand instance errors {auc_err:.1e} / {f1_err:.1e}"),
    )
}

fn criterion_10(d: &Desk, base: &Run) -> Outcome {
    let mut pool: Vec<Sdc> = base.r_all.iter().map(|a| a.sdc.clone()).collect();
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(10));
    pool.truncate(500);
    let ruleset = compile_ruleset(&pool, &d.registry).unwrap();
    let corpus = PreparedCorpus::new(&d.demo.corpus, &CorpusOptions::default());
    let start = Instant::now();
    let mut flagged = 0;
    for (id, values) in corpus.ids.iter().zip(&corpus.columns) {
        flagged += detect_errors(&ruleset, id, values).len();
    }
    let mean = start.elapsed().as_secs_f64() / corpus.len() as f64;
    outcome(
        ruleset.len() == 500 && mean < 0.2,
        format!(
            "{} constraints in {} groups, {} columns, mean {:.3} ms per column, {flagged} detections",
            ruleset.len(),
            ruleset.precondition_groups.len(),
            corpus.len(),
            mean * 1e3
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut record = |n: usize, o: Outcome| {
        println!(
            "criterion {n:>2}: {} | {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, o));
    };
    record(1, criterion_1());
    record(2, criterion_2());
    record(3, criterion_3());
    record(4, criterion_4());
    record(5, criterion_5());

    let start = Instant::now();
    let d = desk();
    let base = run_pipeline(&d, &d.registry);
    let setup = start.elapsed();
    record(6, criterion_6(&d, &base));
    record(7, criterion_7(&d, &base));
    record(8, criterion_8(&d, &base, setup));
    record(9, criterion_9());
    record(10, criterion_10(&d, &base));

    let failed: BTreeSet<usize> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {}/{} criteria pass",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failing: {failed:?}");
        std::process::exit(1);
    }
}
