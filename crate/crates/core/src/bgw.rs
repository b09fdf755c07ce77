//! Multitype branching structure of the limit tree.
//!
//! Types are root, black, white and stem. Offspring laws:
//! the root gets one white child and `d-1` stems in one of `d` orders,
//! a black vertex one white child and `d-2` stems in one of `d-1` orders,
//! each of the `d-1` entries of a white vertex is independently a black child
//! with probability `1/(d-1)` and a stem otherwise; stems are infertile.
//! The white law is critical, and the tree conditioned to survive has a
//! single spine along which independent critical trees are grafted.
//!
//! [`SpineTree`] realizes that infinite tree lazily. Every vertex carries a
//! 64-bit key from which its offspring word and its children's keys are
//! derived, so the tree is a fixed function of the seed no matter which parts
//! are explored, or in which order.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::SplitMix64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::gf::{check_ball, check_degree, coeff_b, pow_rat, rho, ExactProbability};
use crate::tree::{BlossomTree, ChargeReport, Color, Node, Slot, StemKind, TreeBall, TreeJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TypeTag {
    Root,
    Black,
    White,
    Stem,
}

impl TypeTag {
    pub const ALL: [TypeTag; 4] = [TypeTag::Root, TypeTag::Black, TypeTag::White, TypeTag::Stem];

    pub fn index(self) -> usize {
        match self {
            TypeTag::Root => 0,
            TypeTag::Black => 1,
            TypeTag::White => 2,
            TypeTag::Stem => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OffspringWord(pub Vec<TypeTag>);

impl OffspringWord {
    pub fn count(&self, t: TypeTag) -> usize {
        self.0.iter().filter(|&&x| x == t).count()
    }
}

pub type Law = Vec<(OffspringWord, BigRational)>;

fn rat(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn one_child_words(len: usize, child: TypeTag) -> Vec<OffspringWord> {
    (0..len)
        .map(|p| OffspringWord((0..len).map(|i| if i == p { child } else { TypeTag::Stem }).collect()))
        .collect()
}

pub fn offspring_law(d: usize, t: TypeTag) -> Result<Law> {
    check_degree(d)?;
    Ok(match t {
        TypeTag::Root => one_child_words(d, TypeTag::White).into_iter().map(|w| (w, rat(1, d))).collect(),
        TypeTag::Black => one_child_words(d - 1, TypeTag::White).into_iter().map(|w| (w, rat(1, d - 1))).collect(),
        TypeTag::White => {
            let denom = BigInt::from(d - 1).pow(d as u32 - 1);
            (0u64..1 << (d - 1))
                .map(|mask| {
                    let word: Vec<TypeTag> = (0..d - 1)
                        .map(|i| if mask >> i & 1 == 1 { TypeTag::Black } else { TypeTag::Stem })
                        .collect();
                    let k = mask.count_ones();
                    let num = BigInt::from(d - 2).pow(d as u32 - 1 - k);
                    (OffspringWord(word), BigRational::new(num, denom.clone()))
                })
                .collect()
        }
        TypeTag::Stem => vec![(OffspringWord(Vec::new()), BigRational::one())],
    })
}

/// Size-biased law: equal to the plain law except for white vertices, where
/// a word with `j` black children gets `j` times its mass.
pub fn size_biased_law(d: usize, t: TypeTag) -> Result<Law> {
    let law = offspring_law(d, t)?;
    if t != TypeTag::White {
        return Ok(law);
    }
    Ok(law
        .into_iter()
        .map(|(w, p)| {
            let j = w.count(TypeTag::Black);
            (w, p * BigRational::from_integer(BigInt::from(j)))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeanMatrix {
    /// Rows and columns indexed by root, black, white, stem.
    pub entries: [[BigRational; 4]; 4],
    pub right_eigenvector: [BigRational; 4],
    pub left_eigenvector: Option<[BigRational; 4]>,
}

impl MeanMatrix {
    pub fn apply(&self, v: &[BigRational; 4]) -> [BigRational; 4] {
        std::array::from_fn(|i| (0..4).fold(BigRational::zero(), |acc, j| acc + &self.entries[i][j] * &v[j]))
    }

    /// `M b = b` for the stored right eigenvector.
    pub fn is_critical(&self) -> bool {
        self.apply(&self.right_eigenvector) == self.right_eigenvector
    }

    pub fn row_sums(&self) -> [BigRational; 4] {
        std::array::from_fn(|i| self.entries[i].iter().fold(BigRational::zero(), |a, x| a + x))
    }
}

pub fn mean_matrix(d: usize) -> Result<MeanMatrix> {
    check_degree(d)?;
    let i = |x: usize| BigRational::from_integer(BigInt::from(x));
    let z = BigRational::zero;
    let entries = [
        [z(), z(), i(1), i(d - 1)],
        [z(), z(), i(1), i(d - 2)],
        [z(), i(1), z(), i(d - 2)],
        [z(), z(), z(), z()],
    ];
    let right_eigenvector = [i(d - 1), i(d - 1), i(d - 1), z()];
    Ok(MeanMatrix { entries, right_eigenvector, left_eigenvector: None })
}

/// Expected number of children of each type, by summation over the finite
/// supports of the offspring laws.
pub fn expected_counts(d: usize) -> Result<[[BigRational; 4]; 4]> {
    let mut m: [[BigRational; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| BigRational::zero()));
    for t in TypeTag::ALL {
        for (w, p) in offspring_law(d, t)? {
            for c in TypeTag::ALL {
                m[t.index()][c.index()] += &p * BigRational::from_integer(BigInt::from(w.count(c)));
            }
        }
    }
    Ok(m)
}

/// Probability that the `k`-ball of the limit tree equals `ball`: the spine
/// crosses level `k` at one of the `m_k` cut vertices, and every vertex below
/// level `k` contributes the mass of its offspring word.
pub fn spine_ball_prob(d: usize, ball: &TreeBall) -> Result<ExactProbability> {
    check_ball(d, ball)?;
    let tree = &ball.ball;
    let heights = tree.heights();
    let mut p = BigRational::from_integer(BigInt::from(ball.m_k));
    for (v, node) in tree.nodes().iter().enumerate() {
        if heights[v] >= ball.k {
            continue;
        }
        p *= if v == tree.root() {
            rat(1, d)
        } else {
            match node.color {
                Color::Black => rat(1, d - 1),
                Color::White => {
                    let j = node.offspring.iter().filter(|s| matches!(s, Slot::Child(_))).count();
                    BigRational::new(
                        BigInt::from(d - 2).pow((d - 1 - j) as u32),
                        BigInt::from(d - 1).pow(d as u32 - 1),
                    )
                }
            }
        };
    }
    Ok(ExactProbability::new(p))
}

/// Law of the number of black vertices of a critical planted black tree:
/// `(d-2) [z^s]B rho^s`.
pub fn graft_size_pmf(d: usize, s: usize) -> Result<BigRational> {
    check_degree(d)?;
    if s == 0 {
        return Ok(BigRational::zero());
    }
    let b: BigUint = coeff_b(d, s);
    Ok(BigRational::from_integer(BigInt::from(d - 2)) * BigRational::from_integer(b.into()) * pow_rat(&rho(d)?, s as i64))
}

// ---------------------------------------------------------------------------
// Keyed lazy realization

/// Offspring word of a realized vertex: `len` entries, bit `i` of `children`
/// set when entry `i` is a child. Other entries are stems, opening on black
/// vertices and closing on white ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexWord {
    pub color: Color,
    pub len: u8,
    pub children: u64,
}

impl VertexWord {
    pub fn is_child(&self, i: usize) -> bool {
        self.children >> i & 1 == 1
    }

    pub fn stem_kind(&self) -> StemKind {
        match self.color {
            Color::Black => StemKind::Open,
            Color::White => StemKind::Close,
        }
    }

    pub fn child_count(&self) -> usize {
        self.children.count_ones() as usize
    }

    pub fn slot(&self, i: usize, child_id: usize) -> Slot {
        if self.is_child(i) {
            Slot::Child(child_id)
        } else {
            match self.color {
                Color::Black => Slot::Open,
                Color::White => Slot::Close,
            }
        }
    }
}

pub const MAX_LIMIT_DEGREE: usize = 64;

fn check_limit_degree(d: usize) -> Result<()> {
    check_degree(d)?;
    if d > MAX_LIMIT_DEGREE {
        return Err(domain(format!("limit trees support d <= {MAX_LIMIT_DEGREE}")));
    }
    Ok(())
}

/// Key of the child at entry `i` of the vertex with key `key`.
pub fn child_key(key: u64, i: usize) -> u64 {
    SplitMix64::seed_from_u64(key ^ 0xA076_1D64_78BD_642F_u64.wrapping_mul(i as u64 + 1)).next_u64()
}

/// Offspring word of an off-spine vertex, drawn from the plain law.
pub fn off_spine_word(d: usize, color: Color, key: u64) -> VertexWord {
    let mut rng = SplitMix64::seed_from_u64(key);
    let len = d - 1;
    let children = match color {
        Color::Black => 1u64 << rng.gen_range(0..len),
        Color::White => (0..len).fold(0u64, |m, i| if rng.gen_range(0..len) == 0 { m | 1 << i } else { m }),
    };
    VertexWord { color, len: len as u8, children }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpineVertex {
    pub key: u64,
    pub word: VertexWord,
    pub spine_child: usize,
}

/// The infinite tree conditioned to survive, realized on demand.
#[derive(Debug, Clone)]
pub struct SpineTree {
    d: usize,
    seed: u64,
    spine: Vec<SpineVertex>,
}

impl SpineTree {
    pub fn new(d: usize, seed: u64) -> Result<Self> {
        check_limit_degree(d)?;
        Ok(SpineTree { d, seed, spine: Vec::new() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of realized spine vertices.
    pub fn realized(&self) -> usize {
        self.spine.len()
    }

    /// Realizes spine vertices `0..=height`.
    pub fn grow_spine(&mut self, height: usize) {
        while self.spine.len() <= height {
            let h = self.spine.len();
            let mut keys = ChaCha8Rng::seed_from_u64(self.seed);
            keys.set_stream(h as u64);
            let key = keys.next_u64();
            let mut rng = SplitMix64::seed_from_u64(key);
            let d = self.d;
            let (word, spine_child) = if h == 0 {
                let p = rng.gen_range(0..d);
                (VertexWord { color: Color::Black, len: d as u8, children: 1 << p }, p)
            } else if h % 2 == 0 {
                let q = rng.gen_range(0..d - 1);
                (VertexWord { color: Color::Black, len: (d - 1) as u8, children: 1 << q }, q)
            } else {
                // size-biased white: spine entry uniform, the others plain
                let q = rng.gen_range(0..d - 1);
                let mut children = 1u64 << q;
                for i in 0..d - 1 {
                    if i != q && rng.gen_range(0..d - 1) == 0 {
                        children |= 1 << i;
                    }
                }
                (VertexWord { color: Color::White, len: (d - 1) as u8, children }, q)
            };
            self.spine.push(SpineVertex { key, word, spine_child });
        }
    }

    pub fn spine_vertex(&mut self, h: usize) -> SpineVertex {
        self.grow_spine(h);
        self.spine[h]
    }

    /// Realized part within height `k`, cut like a tree ball: vertices at
    /// height `k` keep no offspring. Also returns the ids of the spine
    /// vertices `0..=k`.
    pub fn truncate(&mut self, k: usize) -> (BlossomTree, Vec<usize>) {
        self.grow_spine(k);
        enum Src {
            Spine(usize),
            Off(u64, Color),
        }
        let mut nodes = vec![Node::new(Color::Black, Vec::new())];
        let mut spine_ids = vec![0];
        let mut queue = std::collections::VecDeque::from([(Src::Spine(0), 0usize, 0usize)]);
        while let Some((src, id, h)) = queue.pop_front() {
            if h == k {
                continue;
            }
            let (word, key, spine_child) = match src {
                Src::Spine(s) => {
                    let v = self.spine[s];
                    (v.word, v.key, Some(v.spine_child))
                }
                Src::Off(key, color) => (off_spine_word(self.d, color, key), key, None),
            };
            let mut offspring = Vec::with_capacity(word.len as usize);
            for i in 0..word.len as usize {
                if !word.is_child(i) {
                    offspring.push(word.slot(i, 0));
                    continue;
                }
                let cid = nodes.len();
                let color = word.color.opposite();
                nodes.push(Node::new(color, Vec::new()));
                offspring.push(Slot::Child(cid));
                if spine_child == Some(i) {
                    spine_ids.push(cid);
                    let Src::Spine(s) = src else { unreachable!() };
                    queue.push_back((Src::Spine(s + 1), cid, h + 1));
                } else {
                    queue.push_back((Src::Off(child_key(key, i), color), cid, h + 1));
                }
            }
            nodes[id].offspring = offspring;
        }
        let tree = BlossomTree::new(nodes, 0, 0).expect("realized truncation is a valid tree");
        (tree, spine_ids)
    }

    /// Charges of the truncation at height `k`, where cut vertices carry the
    /// charge forced by their color (black 1, white `d-1`).
    pub fn truncation_charges(&mut self, k: usize) -> ChargeReport {
        let (tree, _) = self.truncate(k);
        charges_with_cut(&tree, self.d, k)
    }

    pub fn to_json(&mut self, k: usize) -> TreeJson {
        let (tree, spine) = self.truncate(k);
        TreeJson { spine: Some(spine), ..tree.to_json(self.d) }
    }
}

/// Charges of a tree cut at height `k`: vertices at height `k` (other than
/// the root) get the forced charge of their color.
pub fn charges_with_cut(tree: &BlossomTree, d: usize, k: usize) -> ChargeReport {
    let heights = tree.heights();
    let mut order: Vec<usize> = (0..tree.len()).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(heights[v]));
    let mut charge = vec![0i64; tree.len()];
    for v in order {
        if heights[v] == k && v != tree.root() {
            charge[v] = match tree.node(v).color {
                Color::Black => 1,
                Color::White => d as i64 - 1,
            };
            continue;
        }
        charge[v] = tree
            .node(v)
            .offspring
            .iter()
            .map(|s| match *s {
                Slot::Close => 1,
                Slot::Open => -1,
                Slot::Child(c) => charge[c],
            })
            .sum();
    }
    ChargeReport { total: charge[tree.root()], charge_of: charge }
}

/// Number of black vertices of the off-spine subtree rooted at a black vertex
/// with key `key`, or `None` once `budget` vertices have been expanded.
pub fn subtree_black_count(d: usize, key: u64, budget: u64) -> Option<u64> {
    let mut stack = vec![(key, Color::Black)];
    let mut expanded = 0u64;
    let mut blacks = 0u64;
    while let Some((k, color)) = stack.pop() {
        expanded += 1;
        if expanded > budget {
            return None;
        }
        if color == Color::Black {
            blacks += 1;
        }
        let w = off_spine_word(d, color, k);
        for i in 0..w.len as usize {
            if w.is_child(i) {
                stack.push((child_key(k, i), color.opposite()));
            }
        }
    }
    Some(blacks)
}

/// Walk increment (opening minus closing stems) across the off-spine subtree
/// of a black vertex, by full traversal; `None` past `budget` vertices.
pub fn subtree_increment(d: usize, key: u64, budget: u64) -> Option<i64> {
    let mut stack = vec![(key, Color::Black)];
    let mut expanded = 0u64;
    let mut inc = 0i64;
    while let Some((k, color)) = stack.pop() {
        expanded += 1;
        if expanded > budget {
            return None;
        }
        let w = off_spine_word(d, color, k);
        let stems = w.len as i64 - w.child_count() as i64;
        inc += match color {
            Color::Black => stems,
            Color::White => -stems,
        };
        for i in 0..w.len as usize {
            if w.is_child(i) {
                stack.push((child_key(k, i), color.opposite()));
            }
        }
    }
    Some(inc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::ball_prob_limit;
    use std::collections::HashMap;

    #[test]
    fn laws_sum_to_one() {
        for d in 3..=8 {
            for t in TypeTag::ALL {
                let total: BigRational = offspring_law(d, t).unwrap().into_iter().map(|(_, p)| p).sum();
                assert_eq!(total, BigRational::one());
                let total: BigRational = size_biased_law(d, t).unwrap().into_iter().map(|(_, p)| p).sum();
                assert_eq!(total, BigRational::one(), "size-biased {t:?} d={d}");
            }
        }
    }

    #[test]
    fn d3_white_law() {
        let law = offspring_law(3, TypeTag::White).unwrap();
        let all_stems = OffspringWord(vec![TypeTag::Stem, TypeTag::Stem]);
        let p = law.iter().find(|(w, _)| *w == all_stems).unwrap();
        assert_eq!(p.1, rat(1, 4));
        let sb = size_biased_law(3, TypeTag::White).unwrap();
        for (w, p) in sb {
            let expected = match w.count(TypeTag::Black) {
                0 => rat(0, 1),
                1 => rat(1, 4),
                _ => rat(1, 2),
            };
            assert_eq!(p, expected);
        }
        assert_eq!(offspring_law(3, TypeTag::Root).unwrap().len(), 3);
    }

    #[test]
    fn mean_matrix_is_critical() {
        for d in 3..=8 {
            let m = mean_matrix(d).unwrap();
            assert!(m.is_critical());
            assert_eq!(m.entries, expected_counts(d).unwrap());
            let i = |x: usize| BigRational::from_integer(BigInt::from(x));
            assert_eq!(m.row_sums(), [i(d), i(d - 1), i(d - 1), i(0)]);
        }
    }

    #[test]
    fn d3_k1_spine_probability() {
        let t = BlossomTree::parse("B[W[]oo]").unwrap();
        let ball = t.ball(1);
        assert_eq!(spine_ball_prob(3, &ball).unwrap().value(), &rat(1, 3));
        assert_eq!(spine_ball_prob(3, &ball).unwrap(), ball_prob_limit(3, &ball).unwrap());
    }

    #[test]
    fn spine_product_equals_limit_formula_on_all_small_balls() {
        for d in 3..=5 {
            for k in 0..=3 {
                for ball in crate::tree::enumerate_balls(d, k) {
                    assert_eq!(spine_ball_prob(d, &ball).unwrap(), ball_prob_limit(d, &ball).unwrap());
                }
            }
        }
    }

    #[test]
    fn graft_sizes_sum_to_one_in_the_limit() {
        let total: BigRational = (1..=40).map(|s| graft_size_pmf(3, s).unwrap()).sum();
        let t = crate::gf::ratio_to_f64(&total);
        // tail beyond 40 is about 1.128 / sqrt(40)
        assert!(t < 1.0 && t > 0.8, "{t}");
        assert_eq!(graft_size_pmf(3, 1).unwrap(), rat(1, 4));
    }

    #[test]
    fn spine_alternates_and_is_deterministic() {
        let mut a = SpineTree::new(4, 7).unwrap();
        let mut b = SpineTree::new(4, 7).unwrap();
        b.grow_spine(3);
        for h in 0..50 {
            let v = a.spine_vertex(h);
            assert_eq!(v, b.spine_vertex(h));
            let expected = if h % 2 == 0 { Color::Black } else { Color::White };
            assert_eq!(v.word.color, expected);
            assert!(v.word.is_child(v.spine_child));
        }
    }

    #[test]
    fn truncations_are_consistent_and_well_charged() {
        for seed in 0..200 {
            let mut t = SpineTree::new(3, seed).unwrap();
            let (t5, spine) = t.truncate(5);
            assert_eq!(spine.len(), 6);
            assert_eq!(t5.ball(4).ball.canonical_code(), t.truncate(4).0.canonical_code());
            let charges = charges_with_cut(&t5, 3, 5);
            assert_eq!(charges.total, 0);
            for (v, node) in t5.nodes().iter().enumerate() {
                let c = charges.charge_of[v];
                if v == t5.root() {
                    continue;
                }
                match node.color {
                    Color::Black => assert_eq!(c, 1),
                    Color::White => assert_eq!(c, 2),
                }
            }
        }
    }

    #[test]
    fn root_word_is_uniform() {
        let d = 4;
        let n = 20_000;
        let mut counts = vec![0usize; d];
        for seed in 0..n {
            counts[SpineTree::new(d, seed).unwrap().spine_vertex(0).spine_child] += 1;
        }
        let e = n as f64 / d as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 16.27, "{counts:?}"); // df 3, alpha 0.001
    }

    #[test]
    fn subtree_increment_is_minus_one() {
        for key in 0..500u64 {
            if let Some(inc) = subtree_increment(3, key, 10_000) {
                assert_eq!(inc, -1);
            }
        }
    }

    #[test]
    fn graft_size_law_matches_direct_growth() {
        let d = 3;
        let n = 20_000u64;
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for key in 0..n {
            let s = subtree_black_count(d, child_key(key, 99), 5_000).map_or(u64::MAX, |s| s.min(4));
            *counts.entry(s).or_default() += 1;
        }
        for s in 1..=3 {
            let p = crate::gf::ratio_to_f64(&graft_size_pmf(d, s as usize).unwrap());
            let obs = *counts.get(&s).unwrap_or(&0) as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((obs - p).abs() < 4.0 * sigma, "s={s} obs={obs} p={p}");
        }
    }
}
