//! Exact uniform sampling of trees of `T^d_n` and of rooted maps.
//!
//! [`SamplerContext::sample_tree`] is the recursive method: the white child
//! of the root is placed uniformly among `d` positions, then white planted
//! trees fill their `d-1` slots left to right with exact big-integer weights.
//! [`sample_tree_fast`] draws the same law in linear time by the cyclic
//! lemma and is what the large experiments use.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::seq::index;
use rand::Rng;

use crate::closure::close_finite;
use crate::error::{domain, Result};
use crate::gf::CoeffTable;
use crate::map::PlanarMap;
use crate::tree::{BlossomTree, Color, Node, Slot};

#[derive(Debug, Clone)]
pub struct SamplerContext {
    d: usize,
    table: CoeffTable,
    /// `slot_dp[j][r]`: sequences of `j` slots holding `r` black vertices.
    slot_dp: Vec<Vec<BigUint>>,
}

impl SamplerContext {
    pub fn new(d: usize, n_max: usize) -> Result<Self> {
        let mut table = CoeffTable::new(d)?;
        table.extend_to(n_max);
        let b = table.b_slice();
        let mut slot_dp = vec![vec![BigUint::zero(); n_max + 1]];
        slot_dp[0][0] = BigUint::one();
        for j in 1..d {
            let prev = &slot_dp[j - 1];
            let row: Vec<BigUint> = (0..=n_max)
                .map(|r| {
                    let mut acc = prev[r].clone();
                    for k in 1..=r {
                        acc += &b[k] * &prev[r - k];
                    }
                    acc
                })
                .collect();
            slot_dp.push(row);
        }
        Ok(SamplerContext { d, table, slot_dp })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.slot_dp[0].len() - 1
    }

    pub fn table(&self) -> &CoeffTable {
        &self.table
    }

    pub fn slot_dp(&self, j: usize, r: usize) -> &BigUint {
        &self.slot_dp[j][r]
    }

    /// Uniform tree of `T^d_n`.
    pub fn sample_tree<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<BlossomTree> {
        if n < 1 {
            return Err(domain("n must be at least 1"));
        }
        if n > self.n_max() {
            return Err(domain(format!("n = {n} exceeds the table size {}", self.n_max())));
        }
        let d = self.d;
        let b = self.table.b_slice();
        let mut nodes: Vec<Node> = Vec::with_capacity(2 * n);
        let p = rng.gen_range(0..d);
        let offspring = (0..d).map(|i| if i == p { Slot::Child(1) } else { Slot::Open }).collect();
        nodes.push(Node::new(Color::Black, offspring));
        nodes.push(Node::new(Color::White, Vec::new()));
        // (white vertex id, black budget of its planted tree)
        let mut pending = vec![(1usize, n - 1)];
        while let Some((w, mut r)) = pending.pop() {
            let mut offspring = Vec::with_capacity(d - 1);
            for j in (1..d).rev() {
                let mut u = rng.gen_biguint_below(&self.slot_dp[j][r]);
                if u < self.slot_dp[j - 1][r] {
                    offspring.push(Slot::Close);
                    continue;
                }
                u -= &self.slot_dp[j - 1][r];
                let mut k = 1;
                loop {
                    let weight = &b[k] * &self.slot_dp[j - 1][r - k];
                    if u < weight {
                        break;
                    }
                    u -= weight;
                    k += 1;
                }
                // black planted tree with k blacks: white child uniform among d-1
                let black = nodes.len();
                let white = black + 1;
                let q = rng.gen_range(0..d - 1);
                let boff = (0..d - 1).map(|i| if i == q { Slot::Child(white) } else { Slot::Open }).collect();
                nodes.push(Node::new(Color::Black, boff));
                nodes.push(Node::new(Color::White, Vec::new()));
                offspring.push(Slot::Child(black));
                pending.push((white, k - 1));
                r -= k;
            }
            debug_assert_eq!(r, 0);
            nodes[w].offspring = offspring;
        }
        BlossomTree::new(nodes, 0, 0)
    }

    pub fn sample_map<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PlanarMap> {
        Ok(close_finite(&self.sample_tree(n, rng)?)?.forget_marked_face())
    }
}

/// Offspring skeleton of a uniform plane tree with `s` nodes in which every
/// node has `d-1` ordered slots, each empty or holding a child: a uniform
/// `s`-subset of the `(d-1)s+1` preorder slots, rotated to its unique good
/// rotation (cyclic lemma). Returns the preorder fill flags.
pub fn lukasiewicz_word<R: Rng + ?Sized>(d: usize, s: usize, rng: &mut R) -> Vec<bool> {
    let len = (d - 1) * s + 1;
    let mut filled = vec![false; len];
    for i in index::sample(rng, len, s) {
        filled[i] = true;
    }
    // step +(d-2) at a node, -1 at an empty slot; total -1. Start right
    // after the first minimum of the prefix sums.
    let mut sum = 0i64;
    let mut min = (0i64, 0usize);
    for (i, &f) in filled.iter().enumerate() {
        sum += if f { d as i64 - 2 } else { -1 };
        if sum < min.0 {
            min = (sum, i + 1);
        }
    }
    filled.rotate_left(min.1 % len);
    filled
}

/// Uniform planted black tree with `s` black vertices. Its root is black with
/// `d-1` offspring (one white child, `d-2` opening stems).
pub fn sample_planted_black<R: Rng + ?Sized>(d: usize, s: usize, rng: &mut R) -> Result<BlossomTree> {
    if d < 3 || s < 1 {
        return Err(domain(format!("planted black tree needs d >= 3 and s >= 1 (got {d}, {s})")));
    }
    let nodes = planted_nodes(d, s, d - 1, rng);
    BlossomTree::new(nodes, 0, 0)
}

/// Builds a planted black tree whose root has `root_degree` offspring.
fn planted_nodes<R: Rng + ?Sized>(d: usize, s: usize, root_degree: usize, rng: &mut R) -> Vec<Node> {
    let word = lukasiewicz_word(d, s, rng);
    let mut nodes: Vec<Node> = Vec::with_capacity(2 * s);
    // each unit = black + its white child; preorder over units
    let mut stack: Vec<usize> = Vec::new(); // white ids with remaining slots
    let mut word_iter = word.into_iter();
    word_iter.next(); // the root unit
    let new_unit = |nodes: &mut Vec<Node>, degree: usize, rng: &mut R| -> usize {
        let black = nodes.len();
        let q = rng.gen_range(0..degree);
        let off = (0..degree).map(|i| if i == q { Slot::Child(black + 1) } else { Slot::Open }).collect();
        nodes.push(Node::new(Color::Black, off));
        nodes.push(Node::new(Color::White, Vec::with_capacity(d - 1)));
        black + 1
    };
    let w0 = new_unit(&mut nodes, root_degree, rng);
    stack.push(w0);
    for f in word_iter {
        while nodes[*stack.last().expect("word is a valid preorder")].offspring.len() == d - 1 {
            stack.pop();
        }
        let w = *stack.last().expect("word is a valid preorder");
        if f {
            let black = nodes.len();
            nodes[w].offspring.push(Slot::Child(black));
            let child_white = new_unit(&mut nodes, d - 1, rng);
            stack.push(child_white);
        } else {
            nodes[w].offspring.push(Slot::Close);
        }
    }
    nodes
}

/// Uniform tree of `T^d_n` in `O(n)`: a uniform planted black tree with `n`
/// blacks whose root is given `d` offspring with the white child placed
/// uniformly. Same law as [`SamplerContext::sample_tree`].
pub fn sample_tree_fast<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<BlossomTree> {
    if d < 3 {
        return Err(domain(format!("degree {d} < 3")));
    }
    if n < 1 {
        return Err(domain("n must be at least 1"));
    }
    BlossomTree::new(planted_nodes(d, n, d, rng), 0, 0)
}

pub fn sample_map_fast<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<PlanarMap> {
    Ok(close_finite(&sample_tree_fast(d, n, rng)?)?.forget_marked_face())
}
