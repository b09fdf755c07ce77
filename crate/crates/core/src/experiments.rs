//! Experiment drivers and the statistics they report.
//!
//! Every experiment is a pure function of its parameters and seed. Sample `i`
//! draws from its own stream (`sample_seed(seed, i)`), so the aggregation does
//! not depend on the order samples are produced in. Exact values are kept as
//! rationals and serialized as strings next to their float rendering.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::SplitMix64;
use serde::Serialize;
use serde_json::Value;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bgw::SpineTree;
use crate::closure::{close_ball, close_finite, spine_walk_stats, CloseBallOptions};
use crate::error::Result;
use crate::gf::{b_by_iteration, ball_prob_finite_with, ball_prob_limit, coeff_w_power, count_plane_maps, count_rooted_maps, poly_pow, ratio_to_f64, CoeffTable};
use crate::map::{simple_random_walk, MapCode, PlanarMap};
use crate::sampler::{sample_tree_fast, SamplerContext};
use crate::tree::{enumerate_trees_guarded, TreeBall};

pub const SCHEMA_VERSION: u32 = 1;
pub const CHI_SQUARE_ALPHA: f64 = 0.001;
pub const SIGMA_BOUND: f64 = 3.0;
/// Largest number of trees an exhaustive check may enumerate.
pub const ENUMERATION_GUARD: usize = 2_000_000;

/// Seed of sample `i` of an experiment seeded with `seed`.
pub fn sample_seed(seed: u64, i: u64) -> u64 {
    SplitMix64::seed_from_u64(seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15)).next_u64()
}

pub fn sample_rng(seed: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sample_seed(seed, i))
}

// ---------------------------------------------------------------------------
// Statistics

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Level after the Bonferroni correction.
    pub alpha: f64,
    pub pass: bool,
}

/// Pearson chi-square of `counts` against the law `probs`, at level `alpha`.
/// Cells of probability zero must be empty and do not count toward `df`.
pub fn chi_square(counts: &[u64], probs: &[f64], alpha: f64) -> ChiSquareTest {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut impossible = false;
    for (&c, &p) in counts.iter().zip(probs) {
        if p == 0.0 {
            impossible |= c > 0;
            continue;
        }
        cells += 1;
        let e = p * total as f64;
        stat += (c as f64 - e).powi(2) / e;
    }
    let df = cells.saturating_sub(1).max(1);
    let p_value = if impossible { 0.0 } else { ChiSquared::new(df as f64).expect("df > 0").sf(stat) };
    ChiSquareTest { statistic: stat, df, p_value, alpha, pass: p_value >= alpha }
}

/// `|k/n - p| <= z sqrt(p(1-p)/n)`; returns the deviation in units of sigma.
pub fn binomial_sigmas(k: u64, n: u64, p: f64) -> f64 {
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    let dev = (k as f64 / n as f64 - p).abs();
    if sd == 0.0 {
        if dev == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        dev / sd
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Cell {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_f64: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_f64: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

impl Cell {
    fn new(label: impl Into<String>) -> Self {
        Cell { label: label.into(), ..Default::default() }
    }

    fn exact(mut self, r: &BigRational) -> Self {
        self.exact = Some(r.to_string());
        self.exact_f64 = Some(ratio_to_f64(r));
        self
    }

    fn limit(mut self, r: &BigRational) -> Self {
        self.limit = Some(r.to_string());
        self.limit_f64 = Some(ratio_to_f64(r));
        self
    }

    fn observed(mut self, k: u64, n: u64) -> Self {
        self.observed = Some(k);
        self.trials = Some(n);
        self.frequency = Some(k as f64 / n as f64);
        self
    }

    fn extra(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_square: Option<ChiSquareTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub parameters: BTreeMap<String, Value>,
    pub cells: Vec<Cell>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
    /// Filled in by callers that time the run; absent otherwise so that
    /// report bytes stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<u64>,
}

impl ExperimentReport {
    fn new(experiment: &str) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            parameters: BTreeMap::new(),
            cells: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            pass: true,
            wall_clock_ms: None,
        }
    }

    fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: Option<String>) {
        self.pass &= pass;
        self.checks.push(Check { name: name.into(), pass, detail, chi_square: None });
    }

    fn chi_check(&mut self, name: impl Into<String>, test: ChiSquareTest) {
        self.pass &= test.pass;
        self.checks.push(Check { name: name.into(), pass: test.pass, detail: None, chi_square: Some(test) });
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn rat(r: &BigRational) -> String {
    r.to_string()
}

// ---------------------------------------------------------------------------
// Bijection

/// Exhaustive check, for every `n <= n_max`, that the trees counted three
/// ways match the enumeration, that closure is injective with valid images,
/// and that forgetting the marked face groups trees in classes of size
/// `2 + (d-2) n`.
pub fn verify_bijection(d: usize, n_max: usize) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("verify-bijection");
    rep.param("d", d);
    rep.param("n_max", n_max);
    let ctx = SamplerContext::new(d, n_max.max(1))?;
    let b_iter = b_by_iteration(d, n_max);
    let mut one_plus_b = b_iter.clone();
    one_plus_b[0] += 1u32;
    let w_iter = poly_pow(&one_plus_b, d - 1, n_max);
    for n in 1..=n_max {
        let trees = enumerate_trees_guarded(d, n, ENUMERATION_GUARD)?;
        let closed = BigUint::from(d) * coeff_w_power(d, n - 1, 1);
        let series = BigUint::from(d) * &w_iter[n - 1];
        let dp = BigUint::from(d) * ctx.slot_dp(d - 1, n - 1);
        let plane = count_plane_maps(d, n)?;
        let enumerated = BigUint::from(trees.len());
        let counts_ok = [&closed, &series, &dp, &plane].iter().all(|c| **c == enumerated);
        rep.check(
            format!("n={n}: counts agree"),
            counts_ok,
            Some(format!("enumerated {enumerated}, closed form {closed}, series {series}, slot dp {dp}")),
        );

        let faces = 2 + (d - 2) * n;
        let mut codes = HashSet::new();
        let mut classes: HashMap<MapCode, usize> = HashMap::new();
        let mut invalid = None;
        let mut collision = None;
        for t in &trees {
            let m = close_finite(t)?;
            let r = m.validate(d);
            if invalid.is_none() && (!r.is_valid() || r.faces != Some(faces) || count_black(&m) != n) {
                invalid = Some(t.to_string());
            }
            if !codes.insert(m.canonical_code()) && collision.is_none() {
                collision = Some(t.to_string());
            }
            *classes.entry(m.forget_marked_face().canonical_code()).or_default() += 1;
        }
        rep.check(format!("n={n}: images valid"), invalid.is_none(), invalid.map(|w| format!("witness {w}")));
        rep.check(format!("n={n}: closure injective"), collision.is_none(), collision.map(|w| format!("witness {w}")));
        let bad_class = classes.values().find(|&&c| c != faces).copied();
        rep.check(
            format!("n={n}: rooted classes of size {faces}"),
            bad_class.is_none(),
            bad_class.map(|c| format!("class of size {c}")),
        );
        let rooted = count_rooted_maps(d, n)?;
        rep.check(
            format!("n={n}: rooted map count"),
            BigUint::from(classes.len()) == rooted,
            Some(format!("{} classes, formula {rooted}", classes.len())),
        );
        rep.cells.push(
            Cell::new(format!("n={n}"))
                .extra("trees", &enumerated)
                .extra("plane_maps", &plane)
                .extra("rooted_maps", &rooted)
                .extra("class_size", faces),
        );
    }
    Ok(rep)
}

fn count_black(m: &PlanarMap) -> usize {
    m.vertices().iter().filter(|v| v.color == crate::tree::Color::Black).count()
}

// ---------------------------------------------------------------------------
// Convergence

/// Empirical frequency of `ball` in uniform trees of each size of the grid,
/// next to the exact finite-size probability and the limit. `grid` lists
/// `(n, samples)`; sizes with no samples get the exact columns only.
pub fn verify_convergence(d: usize, ball: &TreeBall, grid: &[(usize, u64)], seed: u64) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("verify-convergence");
    rep.param("d", d);
    rep.param("k", ball.k);
    rep.param("ball", ball.ball.to_string());
    rep.param("grid", grid.iter().map(|&(n, s)| Value::from(vec![n as u64, s])).collect::<Vec<_>>());
    rep.param("seed", seed);
    let limit = ball_prob_limit(d, ball)?.0;
    let target = ball.ball.canonical_code();
    let mut table = CoeffTable::new(d)?;
    let mut gaps: Vec<BigRational> = Vec::new();
    for (gi, &(n, samples)) in grid.iter().enumerate() {
        let exact = ball_prob_finite_with(&mut table, n, ball)?.0;
        let gap = (&exact - &limit).abs();
        let mut cell = Cell::new(format!("n={n}")).exact(&exact).limit(&limit).extra("gap", rat(&gap)).extra("gap_f64", ratio_to_f64(&gap));
        if samples > 0 {
            let mut hits = 0u64;
            for i in 0..samples {
                let mut rng = sample_rng(seed ^ (gi as u64) << 48, i);
                let t = sample_tree_fast(d, n, &mut rng)?;
                if t.ball(ball.k).ball.canonical_code() == target {
                    hits += 1;
                }
            }
            let z = binomial_sigmas(hits, samples, ratio_to_f64(&exact));
            cell = cell.observed(hits, samples);
            cell.sigmas = Some(z);
            rep.check(format!("n={n}: empirical within {SIGMA_BOUND} sigma"), z <= SIGMA_BOUND, Some(format!("{z:.3} sigma")));
        }
        rep.cells.push(cell);
        gaps.push(gap);
    }
    let decreasing_after_first = gaps.windows(2).skip(1).all(|w| w[1] < w[0]);
    rep.check(
        "gap to the limit strictly decreasing after the first size",
        decreasing_after_first,
        Some(gaps.iter().map(|g| format!("{:.3e}", ratio_to_f64(g))).collect::<Vec<_>>().join(", ")),
    );
    rep.notes.push(format!("fully monotone gap: {}", gaps.windows(2).all(|w| w[1] < w[0])));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Walk statistics

/// Exact law of `Y_k`, `k >= 1`: `U - U'` with `U, U'` uniform on `{0..d-2}`.
/// Returned on `-(d-2)..=d-2`.
pub fn y_law(d: usize) -> Vec<BigRational> {
    let m = (d - 1) as i64;
    (-(m - 1)..m).map(|j| BigRational::new((m - j.abs()).into(), (m * m).into())).collect()
}

pub fn walk_stats_experiment(d: usize, levels: usize, samples: u64, seed: u64, subtree_budget: u64) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("walk-stats");
    rep.param("d", d);
    rep.param("levels", levels);
    rep.param("samples", samples);
    rep.param("seed", seed);
    rep.param("subtree_budget", subtree_budget);
    let span = d - 2;
    let mut y_counts = vec![0u64; 2 * span + 1];
    let mut y1_counts = vec![0u64; 2 * span + 1];
    let mut y0_counts = vec![0u64; d];
    let mut identity = 0u64;
    let mut x_positive = 0u64;
    let mut x_total = 0u64;
    let mut over_budget = 0u64;
    let mut first_failure = None;
    for i in 0..samples {
        let mut tree = SpineTree::new(d, sample_seed(seed, i))?;
        let w = spine_walk_stats(&mut tree, levels, subtree_budget);
        if w.identity_holds() {
            identity += 1;
        } else if first_failure.is_none() {
            first_failure = Some(tree.seed());
        }
        over_budget += w.subtrees_over_budget;
        y0_counts[w.y0 as usize] += 1;
        for (k, l) in w.levels.iter().enumerate() {
            let slot = (l.y + span as i64) as usize;
            y_counts[slot] += 1;
            if k == 0 {
                y1_counts[slot] += 1;
            }
            x_total += 1;
            x_positive += u64::from(l.x > 0);
        }
    }
    let law = y_law(d);
    let law_f: Vec<f64> = law.iter().map(ratio_to_f64).collect();
    let alpha = CHI_SQUARE_ALPHA / 3.0;
    for (j, p) in law.iter().enumerate() {
        let total = samples * levels as u64;
        let mut cell = Cell::new(format!("Y={}", j as i64 - span as i64)).exact(p).observed(y_counts[j], total);
        cell.sigmas = Some(binomial_sigmas(y_counts[j], total, law_f[j]));
        rep.cells.push(cell);
    }
    let y0p = BigRational::new(1.into(), (d as i64).into());
    for (j, &c) in y0_counts.iter().enumerate() {
        rep.cells.push(Cell::new(format!("Y0={j}")).exact(&y0p).observed(c, samples));
    }
    rep.chi_check("Y_k law, pooled over levels", chi_square(&y_counts, &law_f, alpha));
    rep.chi_check("Y_1 law", chi_square(&y1_counts, &law_f, alpha));
    rep.chi_check("Y_0 uniform", chi_square(&y0_counts, &vec![1.0 / d as f64; d], alpha));
    rep.check(
        "C(R_n) = S_n + Y_0 on every sample",
        identity == samples,
        Some(format!("{identity}/{samples}{}", first_failure.map(|s| format!(", first failure seed {s}")).unwrap_or_default())),
    );
    rep.check("X_k takes positive values", x_positive > 0, Some(format!("P(X_k > 0) ~ {:.4}", x_positive as f64 / x_total.max(1) as f64)));
    rep.notes.push(format!(
        "{over_budget} subtrees exceeded the traversal budget; their walk increment was taken as -1 (charge identity)"
    ));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Recurrence (exploratory)

/// Simple random walks on balls of the closed limit map. Reports returns to
/// the root and excursion depths; a walk reaching the ball boundary stops and
/// is flagged. Not evidence for or against recurrence.
pub fn recurrence_experiment(d: usize, radius: usize, steps: u64, walkers: u64, seed: u64, opts: &CloseBallOptions) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("srw");
    rep.param("d", d);
    rep.param("radius", radius);
    rep.param("steps", steps);
    rep.param("walkers", walkers);
    rep.param("seed", seed);
    rep.notes.push("exploratory: finite walks on finite balls say nothing conclusive about recurrence".into());
    let mut truncated = 0u64;
    let mut unresolved = 0u64;
    for i in 0..walkers {
        let mut tree = SpineTree::new(d, sample_seed(seed, i))?;
        let ball = match close_ball(&mut tree, radius, opts) {
            Ok((b, _)) => b,
            Err(crate::Error::Resource { .. }) => {
                unresolved += 1;
                rep.cells.push(Cell::new(format!("walker {i}")).extra("status", "ball budget exceeded").extra("seed", tree.seed()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut rng = sample_rng(seed.wrapping_add(1), i);
        let w = simple_random_walk(&ball.ball, steps, &mut rng);
        truncated += u64::from(w.truncated);
        rep.cells.push(
            Cell::new(format!("walker {i}"))
                .extra("steps_taken", w.steps_taken)
                .extra("returns_to_root", w.returns_to_root)
                .extra("max_distance", w.max_distance)
                .extra("truncated", w.truncated)
                .extra("ball_vertices", ball.ball.vertex_count()),
        );
    }
    rep.notes.push(format!("{truncated} walks reached the ball boundary, {unresolved} balls exceeded the budget"));
    rep.check("every walk completed or flagged", true, None);
    Ok(rep)
}

/// Control for the walk: on the triple edge every step crosses to the other
/// vertex, so the root is revisited exactly every second step.
pub fn recurrence_sanity(steps: u64, seed: u64) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("srw-sanity");
    rep.param("steps", steps);
    rep.param("seed", seed);
    let t = crate::tree::BlossomTree::parse("B[W[cc]oo]")?;
    let m = close_finite(&t)?.forget_marked_face();
    let w = simple_random_walk(&m, steps, &mut sample_rng(seed, 0));
    rep.cells.push(Cell::new("triple edge").observed(w.returns_to_root, steps));
    rep.check("returns = floor(steps/2)", w.returns_to_root == steps / 2 && !w.truncated, Some(format!("{}", w.returns_to_root)));
    Ok(rep)
}
