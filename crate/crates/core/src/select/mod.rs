//! Budgeted selection of constraints.
//!
//! Selection is a maximum-coverage problem over the synthetic corpus:
//! choose at most `b_size` candidates with summed FPR at most `b_fpr` so
//! that as many synthetic columns as possible are detected. The coarse
//! variant counts a column when any chosen candidate detects it; the fine
//! variant only lets candidates within `delta` of the column's best
//! confidence count. Both are solved by LP relaxation followed by
//! independent randomized rounding.

pub mod simplex;

use std::collections::HashMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::CandidateStats;
use simplex::BoundedLp;

pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Coarse,
    #[default]
    Fine,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse" => Ok(Strategy::Coarse),
            "fine" => Ok(Strategy::Fine),
            other => Err(Error::Config(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub b_size: usize,
    pub b_fpr: f64,
    pub delta: f64,
    pub strategy: Strategy,
    pub seed: u64,
    /// Drop low-gain members after rounding until both budgets hold.
    pub enforce_budgets: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            b_size: 500,
            b_fpr: 0.1,
            delta: 1e-3,
            strategy: Strategy::Fine,
            seed: 0,
            enforce_budgets: false,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b_fpr >= 0.0 && self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config(format!("selection config out of range: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpProblem {
    pub candidate_ids: Vec<String>,
    pub synth_ids: Vec<String>,
    /// `K_j`: sorted candidate indices allowed to cover synthetic column `j`.
    pub cover_sets: Vec<Vec<usize>>,
    pub fprs: Vec<f64>,
    pub confidences: Vec<f64>,
    pub b_size: usize,
    pub b_fpr: f64,
}

impl IlpProblem {
    pub fn num_candidates(&self) -> usize {
        self.candidate_ids.len()
    }

    /// Number of synthetic columns covered by `selected`.
    pub fn objective(&self, selected: &[usize]) -> usize {
        let mut chosen = vec![false; self.num_candidates()];
        for &i in selected {
            chosen[i] = true;
        }
        self.cover_sets.iter().filter(|k| k.iter().any(|&i| chosen[i])).count()
    }

    pub fn fpr_sum(&self, selected: &[usize]) -> f64 {
        selected.iter().fold(0.0, |s, &i| s + self.fprs[i])
    }

    pub fn within_budgets(&self, selected: &[usize]) -> bool {
        selected.len() <= self.b_size && self.fpr_sum(selected) <= self.b_fpr
    }
}

fn base_problem(stats: &[CandidateStats], synth_ids: &[String], cfg: &SelectionConfig) -> IlpProblem {
    IlpProblem {
        candidate_ids: stats.iter().map(|s| s.sdc.id.clone()).collect(),
        synth_ids: synth_ids.to_vec(),
        cover_sets: vec![Vec::new(); synth_ids.len()],
        fprs: stats.iter().map(|s| s.fpr).collect(),
        confidences: stats.iter().map(|s| s.confidence()).collect(),
        b_size: cfg.b_size,
        b_fpr: cfg.b_fpr,
    }
}

pub fn build_css_ilp(stats: &[CandidateStats], synth_ids: &[String], cfg: &SelectionConfig) -> IlpProblem {
    let mut p = base_problem(stats, synth_ids, cfg);
    for (i, s) in stats.iter().enumerate() {
        for &j in &s.detected {
            p.cover_sets[j as usize].push(i);
        }
    }
    p
}

/// Like [`build_css_ilp`], but `K_j` keeps only detectors whose confidence
/// is at least `all_confidences[j] - delta`.
pub fn build_fss_ilp(
    stats: &[CandidateStats],
    all_confidences: &[f64],
    synth_ids: &[String],
    cfg: &SelectionConfig,
) -> IlpProblem {
    let mut p = base_problem(stats, synth_ids, cfg);
    for (i, s) in stats.iter().enumerate() {
        for &j in &s.detected {
            let j = j as usize;
            if s.confidence() >= all_confidences[j] - cfg.delta {
                p.cover_sets[j].push(i);
            }
        }
    }
    p
}

/// Highest confidence among the members of `selected` detecting column `j`;
/// 0 when none does.
pub fn conf_of_column(j: usize, selected: &[usize], stats: &[CandidateStats]) -> f64 {
    selected
        .iter()
        .map(|&i| &stats[i])
        .filter(|s| s.detected.binary_search(&(j as u32)).is_ok())
        .map(CandidateStats::confidence)
        .fold(0.0, f64::max)
}

/// `conf_of_column` over every candidate, for all `n` synthetic columns.
pub fn column_confidences(stats: &[CandidateStats], n: usize) -> Vec<f64> {
    let mut best = vec![0.0f64; n];
    for s in stats {
        for &j in &s.detected {
            let b = &mut best[j as usize];
            *b = b.max(s.confidence());
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Solves the relaxation with every variable in `[0, 1]`. Columns with an
/// empty `K_j` are dropped and columns sharing the same `K_j` become one
/// weighted variable; candidates in no `K_j` stay at 0.
pub fn solve_lp_relaxation(problem: &IlpProblem) -> Result<LpSolution> {
    let mut weights: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut seen: HashMap<&[usize], usize> = HashMap::new();
    for k in problem.cover_sets.iter().filter(|k| !k.is_empty()) {
        match seen.get(k.as_slice()) {
            Some(&u) => weights[u].1 += 1.0,
            None => {
                seen.insert(k.as_slice(), weights.len());
                weights.push((k.clone(), 1.0));
            }
        }
    }
    let mut var_of = vec![usize::MAX; problem.num_candidates()];
    let mut active = Vec::new();
    for (k, _) in &weights {
        for &i in k {
            if var_of[i] == usize::MAX {
                var_of[i] = active.len();
                active.push(i);
            }
        }
    }
    if weights.is_empty() {
        return Ok(LpSolution {
            x: vec![0.0; problem.num_candidates()],
            objective: 0.0,
        });
    }

    let nx = active.len();
    let nvars = nx + weights.len();
    let mut objective = vec![0.0; nvars];
    let mut size_row = vec![0.0; nvars];
    let mut fpr_row = vec![0.0; nvars];
    for (v, &i) in active.iter().enumerate() {
        size_row[v] = 1.0;
        fpr_row[v] = problem.fprs[i];
    }
    let mut rows = vec![size_row, fpr_row];
    for (u, (k, w)) in weights.iter().enumerate() {
        objective[nx + u] = *w;
        let mut row = vec![0.0; nvars];
        row[nx + u] = 1.0;
        for &i in k {
            row[var_of[i]] = -1.0;
        }
        rows.push(row);
    }
    let mut rhs = vec![problem.b_size as f64, problem.b_fpr];
    rhs.resize(rows.len(), 0.0);
    let lp = BoundedLp {
        objective,
        rhs,
        upper: vec![1.0; nvars],
        rows,
    };
    let cap = 50 * (lp.rows.len() + nvars) + 1000;
    let opt = simplex::solve(&lp, cap)?;

    let mut x = vec![0.0; problem.num_candidates()];
    for (v, &i) in active.iter().enumerate() {
        x[i] = opt.x[v];
    }
    Ok(LpSolution {
        x,
        objective: opt.objective,
    })
}

/// One Bernoulli draw per candidate with success probability `x_i`.
pub fn randomized_round(solution: &LpSolution, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    solution
        .x
        .iter()
        .enumerate()
        .filter(|&(_, &x)| rng.gen::<f64>() < x)
        .map(|(i, _)| i)
        .collect()
}

/// Exact optimum over all subsets meeting both budgets. Among optimal
/// subsets the one whose sorted candidate ids compare smallest wins.
pub fn brute_force_ilp(problem: &IlpProblem) -> Result<(usize, Vec<usize>)> {
    let n = problem.num_candidates();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            limit: BRUTE_FORCE_LIMIT,
            found: n,
        });
    }
    let masks: Vec<u32> = problem
        .cover_sets
        .iter()
        .map(|k| k.iter().fold(0u32, |m, &i| m | (1 << i)))
        .collect();
    let sorted_ids = |set: u32| {
        let mut ids: Vec<&str> = (0..n)
            .filter(|i| set & (1 << i) != 0)
            .map(|i| problem.candidate_ids[i].as_str())
            .collect();
        ids.sort_unstable();
        ids
    };
    let mut best: Option<(usize, u32)> = None;
    for set in 0u32..(1u32 << n) {
        if set.count_ones() as usize > problem.b_size {
            continue;
        }
        let fpr: f64 = (0..n).filter(|i| set & (1 << i) != 0).map(|i| problem.fprs[i]).sum();
        if fpr > problem.b_fpr {
            continue;
        }
        let value = masks.iter().filter(|&&m| m & set != 0).count();
        let better = match best {
            None => true,
            Some((v, b)) => value > v || (value == v && sorted_ids(set) < sorted_ids(b)),
        };
        if better {
            best = Some((value, set));
        }
    }
    let (value, set) = best.expect("the empty set is feasible");
    Ok((value, (0..n).filter(|i| set & (1 << i) != 0).collect()))
}

/// Removes members until both budgets hold, each time dropping the one whose
/// removal loses the fewest covered columns (ties: higher FPR, then later
/// index).
pub fn enforce_budgets(selected: &[usize], problem: &IlpProblem) -> Vec<usize> {
    let mut members_of: Vec<Vec<usize>> = vec![Vec::new(); problem.num_candidates()];
    for (j, k) in problem.cover_sets.iter().enumerate() {
        for &i in k {
            members_of[i].push(j);
        }
    }
    let mut count = vec![0usize; problem.cover_sets.len()];
    for &i in selected {
        for &j in &members_of[i] {
            count[j] += 1;
        }
    }
    let mut current: Vec<usize> = selected.to_vec();
    current.sort_unstable();
    while !problem.within_budgets(&current) {
        let gain = |i: usize| members_of[i].iter().filter(|&&j| count[j] == 1).count();
        let (pos, &victim) = current
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| {
                gain(a)
                    .cmp(&gain(b))
                    .then(problem.fprs[b].total_cmp(&problem.fprs[a]))
                    .then(b.cmp(&a))
            })
            .expect("over budget implies non-empty");
        current.remove(pos);
        for &j in &members_of[victim] {
            count[j] -= 1;
        }
    }
    current
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub problem: IlpProblem,
    pub lp: LpSolution,
    /// Sorted candidate indices.
    pub selected: Vec<usize>,
    pub objective: usize,
    pub fpr_sum: f64,
}

/// Builds the problem for the configured strategy, solves the relaxation and
/// rounds once with `cfg.seed`.
pub fn select(stats: &[CandidateStats], synth_ids: &[String], cfg: &SelectionConfig) -> Result<Selection> {
    cfg.validate()?;
    let problem = match cfg.strategy {
        Strategy::Coarse => build_css_ilp(stats, synth_ids, cfg),
        Strategy::Fine => {
            let all = column_confidences(stats, synth_ids.len());
            build_fss_ilp(stats, &all, synth_ids, cfg)
        }
    };
    let lp = solve_lp_relaxation(&problem)?;
    let mut selected = randomized_round(&lp, cfg.seed);
    if cfg.enforce_budgets {
        selected = enforce_budgets(&selected, &problem);
    }
    Ok(Selection {
        objective: problem.objective(&selected),
        fpr_sum: problem.fpr_sum(&selected),
        problem,
        lp,
        selected,
    })
}
