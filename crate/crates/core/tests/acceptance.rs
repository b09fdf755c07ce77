//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p uirbpm-core --test acceptance`.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use uirbpm::bgw::{expected_counts, mean_matrix, spine_ball_prob, SpineTree};
use uirbpm::closure::{close_ball, close_finite, ContourProcess, Partner, CloseBallOptions};
use uirbpm::experiments::{chi_square, sample_rng, verify_bijection, verify_convergence, walk_stats_experiment, CHI_SQUARE_ALPHA};
use uirbpm::gf::{ball_prob_finite, ball_prob_limit};
use uirbpm::sampler::SamplerContext;
use uirbpm::tree::{enumerate_balls, enumerate_trees, TreeBall};
use uirbpm::{CanonicalCode, Color};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed.as_secs() < limit_secs, || format!("runtime {elapsed:.1?} over {limit_secs} s"))
}

fn int(x: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn bijection_and_counting() -> Outcome {
    let start = Instant::now();
    let mut summary = Vec::new();
    for (d, n_max) in [(3, 5), (4, 4)] {
        let rep = verify_bijection(d, n_max).map_err(|e| e.to_string())?;
        if let Some(c) = rep.checks.iter().find(|c| !c.pass) {
            return Err(format!("d={d}: {} ({})", c.name, c.detail.clone().unwrap_or_default()));
        }
        summary.push(format!("d={d} n<={n_max}: {} checks", rep.checks.len()));
    }
    within(start.elapsed(), 120)?;
    Ok(format!("{} in {:.1?}", summary.join(", "), start.elapsed()))
}

/// Realized k-balls of all trees of size n with their brute-force frequencies.
fn realized_balls(d: usize, n: usize, k: usize) -> Vec<(TreeBall, BigRational)> {
    let trees = enumerate_trees(d, n).expect("enumerable");
    let total = trees.len();
    let mut by_code: HashMap<CanonicalCode, (TreeBall, usize)> = HashMap::new();
    for t in &trees {
        let b = t.ball(k);
        by_code.entry(b.ball.canonical_code()).or_insert((b, 0)).1 += 1;
    }
    let mut out: Vec<_> = by_code.into_values().map(|(b, c)| (b, BigRational::new(c.into(), total.into()))).collect();
    out.sort_by_cached_key(|(b, _)| b.ball.canonical_code());
    out
}

fn exact_probability_identity() -> Outcome {
    let mut cells = 0;
    for n in 1..=4 {
        for k in 0..=3 {
            for (ball, freq) in realized_balls(3, n, k) {
                let formula = ball_prob_finite(3, n, &ball).map_err(|e| e.to_string())?;
                ensure(formula.0 == freq, || format!("n={n} k={k} {}: formula {} brute force {freq}", ball.ball, formula))?;
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} (n, k, ball) cells equal exactly"))
}

fn limit_formula() -> Outcome {
    let mut cells = 0;
    for n in 1..=4 {
        for k in 0..=3 {
            for (ball, _) in realized_balls(3, n, k) {
                let closed = ball_prob_limit(3, &ball).map_err(|e| e.to_string())?;
                let spine = spine_ball_prob(3, &ball).map_err(|e| e.to_string())?;
                ensure(closed == spine, || format!("{} (k={k}): limit {closed} spine {spine}", ball.ball))?;
                cells += 1;
            }
        }
    }
    let third = BigRational::new(1.into(), 3.into());
    for ball in enumerate_balls(3, 1) {
        let a = ball_prob_limit(3, &ball).map_err(|e| e.to_string())?.0;
        let b = spine_ball_prob(3, &ball).map_err(|e| e.to_string())?.0;
        ensure(a == third && b == third, || format!("k=1 ball {}: {a}, {b}", ball.ball))?;
    }
    for k in [1, 2] {
        let balls = enumerate_balls(3, k);
        let mut sum = BigRational::zero();
        for b in &balls {
            sum += ball_prob_limit(3, b).map_err(|e| e.to_string())?.0;
        }
        ensure(sum.is_one(), || format!("k={k}: limit masses over {} balls sum to {sum}", balls.len()))?;
    }
    Ok(format!("{cells} realized balls agree; k=1 masses 1/3; sums over all k-balls = 1 for k=1,2"))
}

fn sampler_uniformity() -> Outcome {
    let start = Instant::now();
    let ctx = SamplerContext::new(3, 2).map_err(|e| e.to_string())?;
    let support: Vec<CanonicalCode> = enumerate_trees(3, 2).unwrap().iter().map(|t| t.canonical_code()).collect();
    ensure(support.len() == 12, || format!("support has {} elements", support.len()))?;
    let index: HashMap<&CanonicalCode, usize> = support.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let draws = 120_000u64;
    let mut counts = vec![0u64; 12];
    let mut rng = sample_rng(2024, 0);
    for _ in 0..draws {
        let t = ctx.sample_tree(2, &mut rng).map_err(|e| e.to_string())?;
        let code = t.canonical_code();
        let i = *index.get(&code).ok_or_else(|| format!("sample {t} outside the support"))?;
        counts[i] += 1;
    }
    let test = chi_square(&counts, &[1.0 / 12.0; 12], CHI_SQUARE_ALPHA);
    ensure(test.pass, || format!("chi-square {:.2} p={:.2e}", test.statistic, test.p_value))?;
    within(start.elapsed(), 60)?;
    Ok(format!("chi-square {:.2} on {} df, p={:.3}, {:.1?}", test.statistic, test.df, test.p_value, start.elapsed()))
}

fn convergence_witness() -> Outcome {
    let start = Instant::now();
    // the most likely k=2 ball in the limit
    let balls = enumerate_balls(3, 2);
    let ball = balls
        .iter()
        .max_by_key(|b| ball_prob_limit(3, b).unwrap().0)
        .expect("balls exist");
    let grid = [(10, 0), (100, 0), (1000, 100_000), (10_000, 0)];
    let rep = verify_convergence(3, ball, &grid, 77).map_err(|e| e.to_string())?;
    if let Some(c) = rep.checks.iter().find(|c| !c.pass) {
        return Err(format!("{} ({})", c.name, c.detail.clone().unwrap_or_default()));
    }
    within(start.elapsed(), 600)?;
    let gaps: Vec<String> = rep.cells.iter().map(|c| c.extra["gap_f64"].clone()).collect();
    let emp = &rep.cells[2];
    Ok(format!(
        "ball {}: gaps {}; n=1000 frequency {:.5} vs {:.5} ({:.2} sigma), {:.1?}",
        ball.ball,
        gaps.join(" > "),
        emp.frequency.unwrap(),
        emp.exact_f64.unwrap(),
        emp.sigmas.unwrap(),
        start.elapsed()
    ))
}

fn infinite_closure() -> Outcome {
    let start = Instant::now();
    // level search on the periodic contour against the edges of the finite closure
    let mut trees = 0;
    for n in 1..=4 {
        for t in enumerate_trees(3, n).unwrap() {
            let map = close_finite(&t).map_err(|e| e.to_string())?;
            let stems = t.stem_sequence();
            let he = |i: usize| map.vertices()[stems[i].vertex].rot[stems[i].slot + usize::from(stems[i].vertex != t.root())];
            let cp = ContourProcess::from_tree(&t);
            let m = stems.len() as i64;
            for k in 0..m {
                let Partner::Index(j) = cp.match_stem(k).map_err(|e| e.to_string())? else {
                    return Err(format!("{t}: stem {k} unmatched"));
                };
                let j = j.rem_euclid(m) as usize;
                ensure(map.half_edges()[he(k as usize)].twin == Some(he(j)), || format!("{t}: stem {k} -> {j} is not an edge"))?;
            }
            trees += 1;
        }
    }
    let opts = CloseBallOptions::default();
    let mut max_window = 0;
    for seed in 0..1000u64 {
        let mut tree = SpineTree::new(3, seed).map_err(|e| e.to_string())?;
        let (ball, stats) = close_ball(&mut tree, 3, &opts).map_err(|e| e.to_string())?;
        max_window = max_window.max(stats.window);
        let r = ball.ball.validate(3);
        ensure(r.bipartite && r.connected, || format!("seed {seed}: {r:?}"))?;
        ensure(ball.is_valid(3), || format!("seed {seed}: interior degree or distance check failed"))?;
        ensure(ball.ball.vertices()[ball.ball.root().vertex].color == Color::Black, || format!("seed {seed}: white root"))?;
        let deeper = CloseBallOptions { initial_window: 2 * stats.window, max_window: 2 * opts.max_window, ..opts };
        let mut again = SpineTree::new(3, seed).map_err(|e| e.to_string())?;
        let (ball2, _) = close_ball(&mut again, 3, &deeper).map_err(|e| e.to_string())?;
        let (a, b) = (serde_json::to_vec(&ball.to_json()).unwrap(), serde_json::to_vec(&ball2.to_json()).unwrap());
        ensure(a == b, || format!("seed {seed}: ball changed under a doubled window"))?;
    }
    within(start.elapsed(), 300)?;
    Ok(format!("{trees} finite trees; 1000 balls stable, largest window {max_window} stems, {:.1?}", start.elapsed()))
}

fn walk_statistics() -> Outcome {
    let start = Instant::now();
    let rep = walk_stats_experiment(3, 50, 100_000, 11, 1 << 14).map_err(|e| e.to_string())?;
    if let Some(c) = rep.checks.iter().find(|c| !c.pass) {
        return Err(format!("{} ({:?} {:?})", c.name, c.detail, c.chi_square));
    }
    let p = |name: &str| rep.check_named(name).and_then(|c| c.chi_square.as_ref()).map_or(f64::NAN, |t| t.p_value);
    Ok(format!(
        "identity {}; Y_k p={:.3}, Y_0 p={:.3}; {:.1?}",
        rep.check_named("C(R_n) = S_n + Y_0 on every sample").unwrap().detail.clone().unwrap_or_default(),
        p("Y_k law, pooled over levels"),
        p("Y_0 uniform"),
        start.elapsed()
    ))
}

fn mean_matrix_criticality() -> Outcome {
    for d in 3..=8 {
        let m = mean_matrix(d).map_err(|e| e.to_string())?;
        let b = [int(d - 1), int(d - 1), int(d - 1), int(0)];
        ensure(m.right_eigenvector == b, || format!("d={d}: eigenvector {:?}", m.right_eigenvector))?;
        ensure(m.apply(&b) == b, || format!("d={d}: M b != b"))?;
        let brute = expected_counts(d).map_err(|e| e.to_string())?;
        ensure(brute == m.entries, || format!("d={d}: entries differ from offspring expectations"))?;
    }
    Ok("M b = b and entries match offspring expectations for d = 3..8".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 bijection and counting", bijection_and_counting),
        ("2 exact ball probabilities", exact_probability_identity),
        ("3 limit formula", limit_formula),
        ("4 sampler uniformity", sampler_uniformity),
        ("5 convergence witness", convergence_witness),
        ("6 infinite closure", infinite_closure),
        ("7 walk statistics", walk_statistics),
        ("8 mean matrix criticality", mean_matrix_criticality),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
