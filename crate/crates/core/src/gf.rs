//! Exact counting through the generating functions of planted trees.
//!
//! With `B(z)` the series of planted black trees (charge 1) and
//! `W(z) = (1 + B(z))^(d-1)` the series of planted white trees (charge d-1),
//! `B = z (d-1) (1+B)^(d-1)`. Lagrange inversion gives, for `N >= 1`,
//!
//! ```text
//! [z^N] B^m       = (m/N) (d-1)^N binom((d-1)N, N-m)
//! [z^N] W^m       = (m (d-1)^(N+1) / N) binom((d-1)(N+m)-1, N-1)
//! ```
//!
//! and the number of plane maps (marked face) with n black vertices is
//! `d [z^(n-1)] W`.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::tree::{Color, Slot, TreeBall};

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub(crate) fn check_degree(d: usize) -> Result<()> {
    if d < 3 {
        Err(domain(format!("degree {d} < 3")))
    } else {
        Ok(())
    }
}

/// `[z^n] B(z)`.
pub fn coeff_b(d: usize, n: usize) -> BigUint {
    coeff_b_power(d, n, 1)
}

/// `[z^n] B(z)^m`.
pub fn coeff_b_power(d: usize, n: usize, m: usize) -> BigUint {
    if m == 0 {
        return if n == 0 { BigUint::one() } else { BigUint::zero() };
    }
    if n < m {
        return BigUint::zero();
    }
    let (d, n, m) = (d as u64, n as u64, m as u64);
    let num = BigUint::from(m) * BigUint::from(d - 1).pow(n as u32) * binomial((d - 1) * n, n - m);
    exact_div(num, n)
}

/// `[z^n] W(z)^m = [z^n] (1 + B(z))^((d-1) m)`.
pub fn coeff_w_power(d: usize, n: usize, m: usize) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    if m == 0 {
        return BigUint::zero();
    }
    let (d, n, m) = (d as u64, n as u64, m as u64);
    let num = BigUint::from(m) * BigUint::from(d - 1).pow(n as u32 + 1) * binomial((d - 1) * (n + m) - 1, n - 1);
    exact_div(num, n)
}

fn exact_div(num: BigUint, by: u64) -> BigUint {
    let (q, r) = num.div_rem(&BigUint::from(by));
    debug_assert!(r.is_zero(), "Lagrange coefficient not integral");
    q
}

/// Number of black-rooted d-regular bipartite plane maps (with a marked face)
/// with `n` black vertices; equals the number of trees in the closure class.
pub fn count_plane_maps(d: usize, n: usize) -> Result<BigUint> {
    check_degree(d)?;
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    Ok(BigUint::from(d) * coeff_w_power(d, n - 1, 1))
}

/// Rooted maps: every map with n black vertices has `2 + (d-2) n` faces.
pub fn count_rooted_maps(d: usize, n: usize) -> Result<BigUint> {
    let plane = count_plane_maps(d, n)?;
    let faces = BigUint::from(2 + (d - 2) * n);
    let (q, r) = plane.div_rem(&faces);
    if !r.is_zero() {
        return Err(Error::Consistency(format!("{plane} plane maps not divisible by {faces} faces")));
    }
    Ok(q)
}

/// Radius of convergence `(d-2)^(d-2) / (d-1)^d`.
pub fn rho(d: usize) -> Result<BigRational> {
    check_degree(d)?;
    let num = BigInt::from(d - 2).pow(d as u32 - 2);
    let den = BigInt::from(d - 1).pow(d as u32);
    Ok(BigRational::new(num, den))
}

/// Coefficient table for a fixed degree, memoizing the values used by the
/// samplers and the convergence experiments.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    d: usize,
    b: Vec<BigUint>,
    w_pow: HashMap<(usize, usize), BigUint>,
    b_pow: HashMap<(usize, usize), BigUint>,
}

impl CoeffTable {
    pub fn new(d: usize) -> Result<Self> {
        check_degree(d)?;
        Ok(CoeffTable { d, b: vec![BigUint::zero()], w_pow: HashMap::new(), b_pow: HashMap::new() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Extends the `b` array so that `b[0..=n]` is available.
    pub fn extend_to(&mut self, n: usize) {
        while self.b.len() <= n {
            let next = coeff_b(self.d, self.b.len());
            self.b.push(next);
        }
    }

    pub fn b(&mut self, n: usize) -> &BigUint {
        self.extend_to(n);
        &self.b[n]
    }

    pub fn b_slice(&self) -> &[BigUint] {
        &self.b
    }

    pub fn w_power(&mut self, n: usize, m: usize) -> BigUint {
        let d = self.d;
        self.w_pow.entry((m, n)).or_insert_with(|| coeff_w_power(d, n, m)).clone()
    }

    pub fn b_power(&mut self, n: usize, m: usize) -> BigUint {
        let d = self.d;
        self.b_pow.entry((m, n)).or_insert_with(|| coeff_b_power(d, n, m)).clone()
    }
}

/// An exact probability.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExactProbability(pub BigRational);

impl ExactProbability {
    pub fn new(value: BigRational) -> Self {
        debug_assert!(value >= BigRational::zero() && value <= BigRational::one());
        ExactProbability(value)
    }

    pub fn zero() -> Self {
        ExactProbability(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactProbability(BigRational::one())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }
}

impl std::fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Float rendering that survives numerators and denominators beyond f64 range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.denom().bits().max(r.numer().bits()).saturating_sub(900);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Checks that a ball is a possible `k`-ball of a black-rooted d-regular
/// well-charged tree: vertices below height `k` have the offspring structure
/// of such trees and vertices at height `k` are leaves.
pub fn check_ball(d: usize, ball: &TreeBall) -> Result<()> {
    check_degree(d)?;
    let tree = &ball.ball;
    if tree.node(tree.root()).color != Color::Black {
        return Err(domain("ball root must be black"));
    }
    let heights = tree.heights();
    for (v, node) in tree.nodes().iter().enumerate() {
        let h = heights[v];
        if h > ball.k {
            return Err(domain(format!("vertex {v} beyond radius {}", ball.k)));
        }
        if h == ball.k {
            if !node.offspring.is_empty() {
                return Err(domain(format!("vertex {v} at height k has offspring")));
            }
            continue;
        }
        let expected = if v == tree.root() { d } else { d - 1 };
        if node.offspring.len() != expected {
            return Err(domain(format!("vertex {v} has {} offspring, expected {expected}", node.offspring.len())));
        }
        if node.color == Color::Black
            && node.offspring.iter().filter(|s| matches!(s, Slot::Child(_))).count() != 1
        {
            return Err(domain(format!("black vertex {v} must have exactly one white child")));
        }
    }
    let m = heights.iter().filter(|&&h| h == ball.k).count();
    let n = tree.nodes().iter().filter(|n| n.color == Color::Black).count();
    if m != ball.m_k || n != ball.n_k {
        return Err(domain("ball counts do not match the ball"));
    }
    Ok(())
}

/// Exact probability that the `k`-ball of a uniform tree with `n` black
/// vertices equals `ball`, as a ratio of coefficients.
///
/// Odd `k`: the cut leaves `m_k` planted white trees, giving
/// `[z^(n-n_k)] W^m_k / (d [z^(n-1)] W)`. Even `k >= 2`: the cut vertices are
/// black and each keeps a planted black tree minus its root, giving
/// `[z^(n-n_k+m_k)] B^m_k / (d [z^(n-1)] W)`. `k = 0` has probability 1.
pub fn ball_prob_finite(d: usize, n: usize, ball: &TreeBall) -> Result<ExactProbability> {
    let mut table = CoeffTable::new(d)?;
    ball_prob_finite_with(&mut table, n, ball)
}

pub fn ball_prob_finite_with(table: &mut CoeffTable, n: usize, ball: &TreeBall) -> Result<ExactProbability> {
    let d = table.d();
    check_ball(d, ball)?;
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if ball.k == 0 {
        return Ok(ExactProbability::one());
    }
    if n < ball.n_k {
        return Ok(ExactProbability::zero());
    }
    let rest = n - ball.n_k;
    let numerator = if ball.k % 2 == 1 {
        table.w_power(rest, ball.m_k)
    } else {
        table.b_power(rest + ball.m_k, ball.m_k)
    };
    let denominator = BigUint::from(d) * table.w_power(n - 1, 1);
    Ok(ExactProbability::new(BigRational::new(numerator.into(), denominator.into())))
}

/// Binomial closed form of the odd-`k` ratio, used as a cross-check of the
/// coefficient route.
pub fn ball_prob_finite_odd_closed_form(d: usize, n: usize, m: usize, n_k: usize) -> BigRational {
    if n < n_k {
        return BigRational::zero();
    }
    let rest = (n - n_k) as u64;
    let (d64, n64, m64) = (d as u64, n as u64, m as u64);
    if rest == 0 {
        // [z^0] W^m = 1
        let den = BigUint::from(d) * coeff_w_power(d, n - 1, 1);
        return BigRational::new(BigInt::one(), den.into());
    }
    let num = BigInt::from(((d64 - 2) * n64 + 1) * m64)
        * BigInt::from(d64 - 1).pow(rest as u32 + 1)
        * BigInt::from(binomial((d64 - 1) * (rest + m64) - 1, rest - 1));
    let den = BigInt::from(rest * d64)
        * BigInt::from(d64 - 1).pow(n as u32 - 1)
        * BigInt::from(binomial((d64 - 1) * n64, n64));
    BigRational::new(num, den)
}

/// Limit of [`ball_prob_finite`] as `n -> infinity`.
///
/// Odd `k`: `m rho^n_k (d-1)(d-2)/d ((d-1)/(d-2))^((d-1) m)`.
/// Even `k >= 2`: `m rho^(n_k-m-1) (d-2)^(1-m) / (d (d-1)) ((d-2)/(d-1))^(d-2)`.
pub fn ball_prob_limit(d: usize, ball: &TreeBall) -> Result<ExactProbability> {
    check_ball(d, ball)?;
    if ball.k == 0 {
        return Ok(ExactProbability::one());
    }
    let m = ball.m_k;
    if m == 0 {
        return Ok(ExactProbability::zero());
    }
    let rho = rho(d)?;
    let int = |x: usize| BigRational::from_integer(BigInt::from(x));
    let value = if ball.k % 2 == 1 {
        int(m) * pow_rat(&rho, ball.n_k as i64) * int((d - 1) * (d - 2)) / int(d)
            * pow_rat(&(int(d - 1) / int(d - 2)), ((d - 1) * m) as i64)
    } else {
        int(m) * pow_rat(&rho, ball.n_k as i64 - m as i64 - 1) * pow_rat(&int(d - 2), 1 - m as i64)
            / int(d * (d - 1))
            * pow_rat(&(int(d - 2) / int(d - 1)), d as i64 - 2)
    };
    Ok(ExactProbability::new(value))
}

pub(crate) fn pow_rat(x: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// Coefficients `b[0..=n_max]` of `B` by iterating `B <- z (d-1) (1+B)^(d-1)`
/// on truncated polynomials. Independent of the Lagrange closed forms.
pub fn b_by_iteration(d: usize, n_max: usize) -> Vec<BigUint> {
    let mut b = vec![BigUint::zero(); n_max + 1];
    for _ in 0..=n_max {
        let one_plus_b = {
            let mut p = b.clone();
            p[0] += 1u32;
            p
        };
        let w = poly_pow(&one_plus_b, d - 1, n_max);
        let mut next = vec![BigUint::zero(); n_max + 1];
        for i in 1..=n_max {
            next[i] = &w[i - 1] * BigUint::from(d - 1);
        }
        if next == b {
            break;
        }
        b = next;
    }
    b
}

/// Truncated product of two power series.
pub fn poly_mul(a: &[BigUint], b: &[BigUint], n_max: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); n_max + 1];
    for (i, x) in a.iter().enumerate().take(n_max + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n_max + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_pow(a: &[BigUint], e: usize, n_max: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); n_max + 1];
    out[0] = BigUint::one();
    for _ in 0..e {
        out = poly_mul(&out, a, n_max);
    }
    out
}
