//! Corpus-level assessment of candidates.
//!
//! Each candidate gets a 2x2 contingency table over the corpus (covered or
//! not, triggered or not). A candidate survives when it covers enough
//! columns, its in-domain trigger rate separates from the background rate
//! with a large Cohen's h, the separation is significant under a
//! chi-squared test, and the Wilson lower bound on its confidence clears
//! `c_thres`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::candidates::Sdc;
use crate::corpus::{NormalizedValue, PreparedCorpus};
use crate::domain::{DomainEvalFn, Family, Registry};
use crate::error::{Error, Result};
use crate::profile::{profile_columns, ColumnProfile};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub covered_triggered: u64,
    pub covered_not_triggered: u64,
    pub notcovered_triggered: u64,
    pub notcovered_not_triggered: u64,
}

impl ContingencyTable {
    pub fn new(ct: u64, cnt: u64, nct: u64, ncnt: u64) -> Self {
        ContingencyTable {
            covered_triggered: ct,
            covered_not_triggered: cnt,
            notcovered_triggered: nct,
            notcovered_not_triggered: ncnt,
        }
    }

    pub fn coverage(&self) -> u64 {
        self.covered_triggered + self.covered_not_triggered
    }

    pub fn not_covered(&self) -> u64 {
        self.notcovered_triggered + self.notcovered_not_triggered
    }

    pub fn total(&self) -> u64 {
        self.coverage() + self.not_covered()
    }

    /// In-domain trigger rate.
    pub fn rho(&self) -> Option<f64> {
        ratio(self.covered_triggered, self.coverage())
    }

    /// Background trigger rate among columns not covered.
    pub fn rho_bar(&self) -> Option<f64> {
        ratio(self.notcovered_triggered, self.not_covered())
    }

    fn record(&mut self, covered: bool, triggered: bool) {
        match (covered, triggered) {
            (true, true) => self.covered_triggered += 1,
            (true, false) => self.covered_not_triggered += 1,
            (false, true) => self.notcovered_triggered += 1,
            (false, false) => self.notcovered_not_triggered += 1,
        }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssessConfig {
    pub z: f64,
    pub h_min: f64,
    pub p_max: f64,
    pub c_thres: f64,
}

impl Default for AssessConfig {
    fn default() -> Self {
        AssessConfig {
            z: 1.65,
            h_min: 0.8,
            p_max: 0.05,
            c_thres: 0.9,
        }
    }
}

impl AssessConfig {
    pub fn validate(&self) -> Result<()> {
        let ok =
            self.z > 0.0 && self.h_min > 0.0 && (0.0..=1.0).contains(&self.p_max) && (0.0..1.0).contains(&self.c_thres);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("assess config out of range: {self:?}")))
        }
    }
}

/// Cohen's h magnitude plus whether the in-domain rate is the smaller one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectSize {
    pub h: f64,
    pub separates: bool,
}

pub fn cohens_h(table: &ContingencyTable) -> Result<EffectSize> {
    let rho = table.rho().ok_or(Error::ZeroDenominator("coverage"))?;
    let rho_bar = table.rho_bar().ok_or(Error::ZeroDenominator("uncovered columns"))?;
    let h = 2.0 * (rho.sqrt().asin() - rho_bar.sqrt().asin());
    Ok(EffectSize {
        h: h.abs(),
        separates: rho < rho_bar,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub p: f64,
}

/// Pearson chi-squared on the 2x2 table, one degree of freedom, no
/// continuity correction. A zero margin gives statistic 0 and p = 1.
pub fn chi_squared_p(table: &ContingencyTable) -> ChiSquaredTest {
    let a = table.covered_triggered as f64;
    let b = table.covered_not_triggered as f64;
    let c = table.notcovered_triggered as f64;
    let d = table.notcovered_not_triggered as f64;
    let margins = (a + b) * (c + d) * (a + c) * (b + d);
    if margins == 0.0 {
        return ChiSquaredTest { statistic: 0.0, p: 1.0 };
    }
    let n = a + b + c + d;
    let diff = a * d - b * c;
    let statistic = n * diff * diff / margins;
    let p = ChiSquared::new(1.0).expect("df = 1").sf(statistic);
    ChiSquaredTest { statistic, p }
}

/// Wilson-score lower bound on the probability that a covered column does
/// not trigger.
pub fn wilson_lower_confidence(table: &ContingencyTable, z: f64) -> Result<f64> {
    let n = table.coverage();
    if n == 0 {
        return Err(Error::ZeroDenominator("coverage"));
    }
    let n_ct = table.covered_triggered as f64;
    let n_ctbar = table.covered_not_triggered as f64;
    let n = n as f64;
    let z2 = z * z;
    let den = n + z2;
    let spread = (n_ct * n_ctbar / n + z2 / 4.0).sqrt();
    Ok(1.0 - ((n_ct + z2 / 2.0) / den + z * spread / den))
}

/// Confidence a constraint covering `coverage` columns could reach if none
/// of them triggered.
pub fn confidence_upper_bound(coverage: u64, z: f64) -> f64 {
    let z2 = z * z;
    1.0 - z2 / (coverage as f64 + z2)
}

/// Smallest coverage whose upper bound reaches `c_thres`:
/// `ceil(z^2 c / (1 - c))`, nudged so it agrees with
/// [`confidence_upper_bound`] in floating point.
pub fn min_coverage(z: f64, c_thres: f64) -> u64 {
    let mut n = (z * z * c_thres / (1.0 - c_thres)).ceil().max(0.0) as u64;
    while confidence_upper_bound(n, z) < c_thres {
        n += 1;
    }
    while n > 0 && confidence_upper_bound(n - 1, z) >= c_thres {
        n -= 1;
    }
    n
}

pub fn eval_precondition(f: &DomainEvalFn, sdc: &Sdc, values: &[NormalizedValue]) -> bool {
    let inside = values.iter().filter(|v| sdc.inside(f.eval_distance(v))).count();
    sdc.applies(inside, values.len())
}

/// Positions of the values outside the outer ball.
pub fn eval_postcondition(f: &DomainEvalFn, sdc: &Sdc, values: &[NormalizedValue]) -> Vec<usize> {
    let family = f.family();
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| sdc.outside(family, f.eval_distance(v)))
        .map(|(i, _)| i)
        .collect()
}

pub fn build_contingency(f: &DomainEvalFn, sdc: &Sdc, columns: &[Vec<NormalizedValue>]) -> ContingencyTable {
    let mut table = ContingencyTable::default();
    for values in columns {
        let covered = eval_precondition(f, sdc, values);
        let triggered = !eval_postcondition(f, sdc, values).is_empty();
        table.record(covered, triggered);
    }
    table
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessedSdc {
    pub sdc: Sdc,
    pub table: ContingencyTable,
    pub h: f64,
    pub p: f64,
}

/// How many candidates survive each gate, in gate order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub candidates: u64,
    pub coverage: u64,
    pub effect_size: u64,
    pub significance: u64,
    pub confidence: u64,
}

impl GateCounts {
    fn merge(&mut self, o: &GateCounts) {
        self.candidates += o.candidates;
        self.coverage += o.coverage;
        self.effect_size += o.effect_size;
        self.significance += o.significance;
        self.confidence += o.confidence;
    }
}

#[derive(Debug, Clone, Default)]
pub struct AssessOutcome {
    /// Accepted candidates sorted by id.
    pub accepted: Vec<AssessedSdc>,
    pub gates: GateCounts,
}

/// Runs the gates on one candidate given its table.
fn judge(
    sdc: &Sdc,
    table: ContingencyTable,
    cfg: &AssessConfig,
    min_cov: u64,
    gates: &mut GateCounts,
) -> Option<AssessedSdc> {
    if table.coverage() < min_cov {
        return None;
    }
    gates.coverage += 1;
    let effect = cohens_h(&table).ok()?;
    if !effect.separates || effect.h < cfg.h_min {
        return None;
    }
    gates.effect_size += 1;
    let chi = chi_squared_p(&table);
    if chi.p > cfg.p_max {
        return None;
    }
    gates.significance += 1;
    let confidence = wilson_lower_confidence(&table, cfg.z).ok()?;
    if confidence < cfg.c_thres {
        return None;
    }
    gates.confidence += 1;
    Some(AssessedSdc {
        sdc: sdc.clone().with_confidence(confidence),
        table,
        h: effect.h,
        p: chi.p,
    })
}

fn table_from_profiles(sdc: &Sdc, family: Family, profiles: &[ColumnProfile]) -> ContingencyTable {
    let mut table = ContingencyTable::default();
    for p in profiles {
        table.record(p.covered(sdc), p.triggered(sdc, family));
    }
    table
}

fn coverage_from_profiles(d_in: f64, m: f64, profiles: &[ColumnProfile]) -> u64 {
    let probe = Sdc {
        id: String::new(),
        fn_id: String::new(),
        d_in,
        d_out: f64::INFINITY,
        m,
        confidence: 0.0,
    };
    profiles.iter().filter(|p| p.covered(&probe)).count() as u64
}

fn assess_group(
    f: &DomainEvalFn,
    candidates: &[Sdc],
    corpus: &PreparedCorpus,
    cfg: &AssessConfig,
    prune: bool,
) -> (Vec<AssessedSdc>, GateCounts) {
    let profiles = profile_columns(f, &corpus.columns);
    let family = f.family();
    let min_cov = min_coverage(cfg.z, cfg.c_thres);
    let mut gates = GateCounts {
        candidates: candidates.len() as u64,
        ..Default::default()
    };

    // Coverage depends on (d_in, m) only, and shrinks with d_in. Scanning
    // d_in downwards per m, everything below the first insufficient radius
    // is skipped without evaluation.
    let mut floor: BTreeMap<u64, f64> = BTreeMap::new();
    if prune {
        let mut by_m: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for c in candidates {
            by_m.entry(c.m.to_bits()).or_default().push(c.d_in);
        }
        for (m_bits, mut radii) in by_m {
            radii.sort_by(|a, b| b.total_cmp(a));
            radii.dedup();
            let m = f64::from_bits(m_bits);
            let cutoff = radii
                .iter()
                .find(|&&d| coverage_from_profiles(d, m, &profiles) < min_cov)
                .copied()
                .unwrap_or(f64::NEG_INFINITY);
            floor.insert(m_bits, cutoff);
        }
    }

    let mut accepted = Vec::new();
    for c in candidates {
        if prune && c.d_in <= floor[&c.m.to_bits()] {
            continue;
        }
        let table = table_from_profiles(c, family, &profiles);
        if let Some(a) = judge(c, table, cfg, min_cov, &mut gates) {
            accepted.push(a);
        }
    }
    (accepted, gates)
}

/// Assesses every candidate against the corpus and returns those passing all
/// gates. With `prune`, coverage-based pruning skips work but never changes
/// the result.
pub fn assess_all(
    candidates: impl IntoIterator<Item = Sdc>,
    corpus: &PreparedCorpus,
    registry: &Registry,
    cfg: &AssessConfig,
    prune: bool,
) -> Result<AssessOutcome> {
    cfg.validate()?;
    let mut groups: Vec<(String, Vec<Sdc>)> = Vec::new();
    for c in candidates {
        match groups.last_mut() {
            Some((id, members)) if *id == c.fn_id => members.push(c),
            _ => groups.push((c.fn_id.clone(), vec![c])),
        }
    }
    let resolved = groups
        .iter()
        .map(|(id, members)| Ok((registry.require(id)?.clone(), members)))
        .collect::<Result<Vec<_>>>()?;

    let results: Vec<(Vec<AssessedSdc>, GateCounts)> = resolved
        .par_iter()
        .map(|(f, members)| assess_group(f, members, corpus, cfg, prune))
        .collect();

    let mut outcome = AssessOutcome::default();
    for (accepted, gates) in results {
        outcome.accepted.extend(accepted);
        outcome.gates.merge(&gates);
    }
    outcome.accepted.sort_by(|a, b| a.sdc.id.cmp(&b.sdc.id));
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::normalize_value;
    use crate::domain::{make_embedding_fn, EmbeddingSpace, PatternFnParams};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn reference_counts() -> ContingencyTable {
        ContingencyTable::new(10, 990, 160_000, 40_000)
    }

    // Standard Wilson interval for a proportion, written from the textbook
    // centre/half-width form rather than the expanded expression.
    fn wilson_oracle(successes: f64, n: f64, z: f64) -> f64 {
        let p = successes / n;
        let denom = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / denom;
        let half = z / denom * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
        centre - half
    }

    // Upper tail of chi-squared(1) by Simpson quadrature of the standard
    // normal density: P(X > x) = 2 * P(Z > sqrt(x)).
    fn chi2_sf_oracle(x: f64) -> f64 {
        let a = x.sqrt();
        let b = a + 40.0;
        let steps = 200_000;
        let h = (b - a) / steps as f64;
        let phi = |u: f64| (-u * u / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = phi(a) + phi(b);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * phi(a + i as f64 * h);
        }
        2.0 * s * h / 3.0
    }

    fn values(vs: &[&str]) -> Vec<NormalizedValue> {
        vs.iter().map(|v| normalize_value(v)).collect()
    }

    fn line_space() -> Arc<EmbeddingSpace> {
        let mut s = EmbeddingSpace::new("line", 1);
        for i in 0..10 {
            s.insert(format!("v{i}"), vec![i as f32]);
        }
        Arc::new(s)
    }

    #[test]
    fn cohens_h_on_reference_counts() {
        let e = cohens_h(&reference_counts()).unwrap();
        assert!((e.h - 2.01).abs() <= 0.01, "{}", e.h);
        assert!(e.separates);
    }

    #[test]
    fn cohens_h_equal_rates() {
        let e = cohens_h(&ContingencyTable::new(1, 3, 10, 30)).unwrap();
        assert_eq!(e.h, 0.0);
        assert!(!e.separates);
        assert!(cohens_h(&ContingencyTable::new(0, 0, 1, 1)).is_err());
        assert!(cohens_h(&ContingencyTable::new(1, 1, 0, 0)).is_err());
    }

    #[test]
    fn chi_squared_cases() {
        let t = chi_squared_p(&ContingencyTable::new(10, 90, 20, 180));
        assert_eq!(t.statistic, 0.0);
        assert!((t.p - 1.0).abs() < 1e-12);
        let t = chi_squared_p(&ContingencyTable::new(5, 5, 5, 5));
        assert_eq!((t.statistic, t.p), (0.0, 1.0));
        let t = chi_squared_p(&reference_counts());
        assert!(t.statistic > 3.841);
        assert!(t.p < 1e-6);
        assert!(chi2_sf_oracle(t.statistic) < 1e-6);
        assert_eq!(chi_squared_p(&ContingencyTable::new(0, 0, 3, 4)).p, 1.0);
    }

    #[test]
    fn chi_squared_matches_quadrature() {
        for t in [
            ContingencyTable::new(3, 40, 30, 50),
            ContingencyTable::new(1, 20, 5, 25),
            ContingencyTable::new(12, 8, 9, 11),
        ] {
            let got = chi_squared_p(&t);
            let want = chi2_sf_oracle(got.statistic);
            assert!((got.p - want).abs() < 1e-9, "{t:?}: {} vs {want}", got.p);
        }
    }

    #[test]
    fn wilson_matches_oracle() {
        let c = wilson_lower_confidence(&reference_counts(), 1.65).unwrap();
        let oracle = wilson_oracle(990.0, 1000.0, 1.65);
        assert!((c - oracle).abs() < 1e-9);
        assert!((c - 0.98332).abs() < 1e-5, "{c}");
        assert!(wilson_lower_confidence(&ContingencyTable::new(0, 0, 5, 5), 1.65).is_err());
    }

    #[test]
    fn wilson_with_no_triggers_is_the_upper_bound() {
        for n in [1u64, 2, 7, 25, 1000, 123_456] {
            let c = wilson_lower_confidence(&ContingencyTable::new(0, n, 3, 3), 1.65).unwrap();
            assert_eq!(c, confidence_upper_bound(n, 1.65), "n = {n}");
        }
    }

    #[test]
    fn wilson_all_triggered_is_low() {
        let n = 50u64;
        let c = wilson_lower_confidence(&ContingencyTable::new(n, 0, 1, 1), 1.65).unwrap();
        assert!(c < 1.0 - n as f64 / (n as f64 + 1.65 * 1.65));
    }

    #[test]
    fn upper_bound_and_minimum_coverage() {
        assert_eq!(confidence_upper_bound(0, 1.65), 0.0);
        assert_eq!(min_coverage(1.65, 0.9), 25);
        assert_eq!(min_coverage(1.96, 0.9), 35);
        assert!(confidence_upper_bound(25, 1.65) >= 0.9);
        assert!(confidence_upper_bound(24, 1.65) < 0.9);
    }

    #[test]
    fn preconditions_and_postconditions() {
        let f = make_embedding_fn(&line_space(), "v0").unwrap();
        let col = values(&["v0", "v1", "v2", "v5", "v9"]);
        // 3 of 5 within 2.0
        assert!(eval_precondition(&f, &Sdc::new(f.id(), 2.0, 4.0, 0.5), &col));
        assert!(!eval_precondition(&f, &Sdc::new(f.id(), 2.0, 4.0, 0.65), &col));
        assert!(eval_precondition(&f, &Sdc::new(f.id(), 9.0, 10.0, 1.0), &col));
        let none = values(&["v5", "v6", "v7", "v8", "v9"]);
        assert!(!eval_precondition(&f, &Sdc::new(f.id(), 2.0, 4.0, 0.05), &none));

        // v5 between the balls is not flagged; v9 beyond is
        assert_eq!(eval_postcondition(&f, &Sdc::new(f.id(), 2.0, 5.0, 0.5), &col), vec![4]);
        assert_eq!(
            eval_postcondition(&f, &Sdc::new(f.id(), 2.0, 4.9, 0.5), &col),
            vec![3, 4]
        );
        assert!(eval_postcondition(&f, &Sdc::new(f.id(), 2.0, f64::INFINITY, 0.5), &col).is_empty());
        assert!(eval_postcondition(&f, &Sdc::new(f.id(), 2.0, 9.0, 0.5), &col).is_empty());
    }

    #[test]
    fn contingency_classifies_each_column_once() {
        let f = make_embedding_fn(&line_space(), "v0").unwrap();
        let cols = vec![
            values(&["v0", "v1", "v1", "v9"]),
            values(&["v0", "v1"]),
            values(&["v8", "v9"]),
            values(&["v7", "v6"]),
        ];
        let t = build_contingency(&f, &Sdc::new(f.id(), 1.0, 8.0, 0.75), &cols);
        assert_eq!(t, ContingencyTable::new(1, 1, 1, 1));
        let nothing = build_contingency(&f, &Sdc::new(f.id(), -1.0, 8.0, 0.75), &cols);
        assert_eq!(nothing.coverage(), 0);
        assert_eq!(nothing.total(), 4);
    }

    #[test]
    fn pattern_candidate_on_skewed_corpus_is_kept() {
        // 1000 in-domain columns (10 with a stray value) and a background
        // of uncovered columns. A binary function cannot leave an uncovered
        // column untriggered, so the background rate is 1.
        let f = PatternFnParams::new(r"\d+").unwrap().into_fn();
        let mut cols = Vec::new();
        for i in 0..1000 {
            let mut c = values(&["1", "2", "3", "4", "5", "6", "7", "8", "9", "10"]);
            if i < 10 {
                c.push(normalize_value("x"));
            }
            cols.push(c);
        }
        for i in 0..2000 {
            cols.push(if i % 5 == 0 {
                values(&["a", "b"])
            } else {
                values(&["a", "1"])
            });
        }
        let sdc = Sdc::new(f.id(), 0.0, 1.0, 0.9);
        let t = build_contingency(&f, &sdc, &cols);
        assert_eq!(t, ContingencyTable::new(10, 990, 2000, 0));

        let mut registry = Registry::new();
        registry.add(f);
        let corpus = PreparedCorpus {
            ids: (0..cols.len()).map(|i| i.to_string()).collect(),
            columns: cols,
        };
        let out = assess_all([sdc.clone()], &corpus, &registry, &AssessConfig::default(), true).unwrap();
        assert_eq!(out.accepted.len(), 1);
        let kept = &out.accepted[0];
        assert!((kept.sdc.confidence - wilson_oracle(990.0, 1000.0, 1.65)).abs() < 1e-12);
        assert!(kept.h >= 0.8 && kept.p < 0.05);
    }

    #[test]
    fn low_coverage_candidate_is_pruned() {
        let f = make_embedding_fn(&line_space(), "v0").unwrap();
        let mut registry = Registry::new();
        let id = f.id().to_string();
        registry.add(f);
        let mut cols: Vec<Vec<NormalizedValue>> = (0..3).map(|_| values(&["v0", "v1"])).collect();
        cols.extend((0..50).map(|_| values(&["v8", "v9"])));
        let corpus = PreparedCorpus {
            ids: (0..cols.len()).map(|i| i.to_string()).collect(),
            columns: cols,
        };
        let out = assess_all(
            [Sdc::new(id, 1.0, 5.0, 1.0)],
            &corpus,
            &registry,
            &AssessConfig::default(),
            true,
        )
        .unwrap();
        assert!(out.accepted.is_empty());
        assert_eq!(out.gates.candidates, 1);
        assert_eq!(out.gates.coverage, 0);
    }

    proptest! {
        #[test]
        fn upper_bound_is_monotone(a in 0u64..1_000_000, b in 0u64..1_000_000) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(confidence_upper_bound(lo, 1.65) <= confidence_upper_bound(hi, 1.65));
        }

        #[test]
        fn wilson_below_point_estimate(ct in 0u64..500, cnt in 0u64..500) {
            prop_assume!(ct + cnt > 0);
            let t = ContingencyTable::new(ct, cnt, 1, 1);
            let c = wilson_lower_confidence(&t, 1.65).unwrap();
            prop_assert!(c <= cnt as f64 / (ct + cnt) as f64 + 1e-12);
            prop_assert!(c <= confidence_upper_bound(ct + cnt, 1.65) + 1e-15);
        }

        #[test]
        fn cohens_h_is_scale_invariant(a in 0u64..200, b in 0u64..200, c in 0u64..200, d in 0u64..200, k in 1u64..20) {
            prop_assume!(a + b > 0 && c + d > 0);
            let h1 = cohens_h(&ContingencyTable::new(a, b, c, d)).unwrap();
            let h2 = cohens_h(&ContingencyTable::new(a * k, b * k, c * k, d * k)).unwrap();
            prop_assert!((h1.h - h2.h).abs() < 1e-12);
            prop_assert_eq!(h1.separates, h2.separates);
        }
    }
}
