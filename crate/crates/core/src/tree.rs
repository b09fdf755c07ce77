//! Finite blossoming trees.
//!
//! A [`BlossomTree`] is a rooted plane tree whose vertices are properly
//! colored black and white. Every vertex stores its *offspring*: the ordered
//! list of incident half-edges other than the one leading to its parent.
//! An offspring entry is either a child vertex, an opening stem (black
//! vertices only) or a closing stem (white vertices only).
//!
//! Contour convention: the contour starts at the root corner, i.e. just
//! before offspring entry `root_corner` of the root, and visits the root
//! entries `root_corner, root_corner + 1, ...` cyclically. Entering a child
//! visits its offspring in order before coming back. Every other traversal in
//! this crate (stem words, closure, canonical codes) uses this order.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "b")]
    Black,
    #[serde(rename = "w")]
    White,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    pub(crate) fn letter(self) -> char {
        match self {
            Color::Black => 'B',
            Color::White => 'W',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StemKind {
    Open,
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Child(usize),
    Open,
    Close,
}

impl Slot {
    pub fn stem(self) -> Option<StemKind> {
        match self {
            Slot::Open => Some(StemKind::Open),
            Slot::Close => Some(StemKind::Close),
            Slot::Child(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub color: Color,
    pub offspring: Vec<Slot>,
}

impl Node {
    pub fn new(color: Color, offspring: Vec<Slot>) -> Self {
        Node { color, offspring }
    }
}

/// A finite rooted blossoming tree. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlossomTree {
    nodes: Vec<Node>,
    root: usize,
    root_corner: usize,
    parent: Vec<Option<usize>>,
}

/// Stem occurrence in the contour: owning vertex and offspring position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StemRef {
    pub vertex: usize,
    pub slot: usize,
    pub kind: StemKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeReport {
    pub charge_of: Vec<i64>,
    pub total: i64,
}

/// Ball of radius `k` around the root of a tree, with the counts used by the
/// ball probability formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeBall {
    pub ball: BlossomTree,
    pub k: usize,
    /// Number of vertices at height exactly `k`.
    pub m_k: usize,
    /// Number of black vertices in the ball.
    pub n_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Down(Color),
    Up,
    Open,
    Close,
}

/// Contour code of a rooted tree; equal codes iff root-preserving isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(pub Vec<Symbol>);

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            match s {
                Symbol::Down(c) => write!(f, "{}[", c.letter())?,
                Symbol::Up => f.write_str("]")?,
                Symbol::Open => f.write_str("o")?,
                Symbol::Close => f.write_str("c")?,
            }
        }
        Ok(())
    }
}

impl BlossomTree {
    pub fn new(nodes: Vec<Node>, root: usize, root_corner: usize) -> Result<Self> {
        let n = nodes.len();
        if root >= n {
            return Err(structural(format!("root {root} out of range ({n} nodes)")));
        }
        let mut parent = vec![None; n];
        for (v, node) in nodes.iter().enumerate() {
            for slot in &node.offspring {
                match *slot {
                    Slot::Child(c) => {
                        if c >= n {
                            return Err(structural(format!("child {c} of {v} out of range")));
                        }
                        if c == root || parent[c].is_some() {
                            return Err(structural(format!("vertex {c} has several parents")));
                        }
                        if nodes[c].color == node.color {
                            return Err(structural(format!("edge {v}-{c} joins equal colors")));
                        }
                        parent[c] = Some(v);
                    }
                    Slot::Open if node.color != Color::Black => {
                        return Err(structural(format!("opening stem on white vertex {v}")));
                    }
                    Slot::Close if node.color != Color::White => {
                        return Err(structural(format!("closing stem on black vertex {v}")));
                    }
                    _ => {}
                }
            }
        }
        // every vertex must be reachable from the root
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        let mut count = 0;
        while let Some(v) = stack.pop() {
            if seen[v] {
                return Err(structural("cycle in offspring relation"));
            }
            seen[v] = true;
            count += 1;
            for slot in &nodes[v].offspring {
                if let Slot::Child(c) = slot {
                    stack.push(*c);
                }
            }
        }
        if count != n {
            return Err(structural("tree is not connected"));
        }
        let deg = nodes[root].offspring.len();
        if root_corner >= deg.max(1) {
            return Err(structural(format!("root corner {root_corner} invalid for degree {deg}")));
        }
        Ok(BlossomTree { nodes, root, root_corner, parent })
    }

    /// Parses the bracket notation printed by [`CanonicalCode`], e.g.
    /// `B[W[cc]oo]`. Whitespace and commas are ignored. The root corner is 0.
    pub fn parse(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
        let mut nodes = Vec::new();
        let mut pos = 0;
        let root = parse_node(&chars, &mut pos, &mut nodes)?;
        if pos != chars.len() {
            return Err(structural(format!("trailing input at {pos} in {s:?}")));
        }
        BlossomTree::new(nodes, root, 0)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &Node {
        &self.nodes[v]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn root_corner(&self) -> usize {
        self.root_corner
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn with_root_corner(&self, corner: usize) -> Result<Self> {
        BlossomTree::new(self.nodes.clone(), self.root, corner)
    }

    pub fn black_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.color == Color::Black).count()
    }

    pub fn stem_counts(&self) -> (usize, usize) {
        let mut open = 0;
        let mut close = 0;
        for node in &self.nodes {
            for s in &node.offspring {
                match s {
                    Slot::Open => open += 1,
                    Slot::Close => close += 1,
                    Slot::Child(_) => {}
                }
            }
        }
        (open, close)
    }

    /// Root offspring positions in contour order.
    pub(crate) fn root_order(&self) -> impl Iterator<Item = usize> + '_ {
        let deg = self.nodes[self.root].offspring.len();
        (0..deg).map(move |i| (self.root_corner + i) % deg.max(1))
    }

    /// Distance of every vertex from the root.
    pub fn heights(&self) -> Vec<usize> {
        let mut h = vec![0; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            for slot in &self.nodes[v].offspring {
                if let Slot::Child(c) = *slot {
                    h[c] = h[v] + 1;
                    stack.push(c);
                }
            }
        }
        h
    }

    pub fn height(&self) -> usize {
        self.heights().into_iter().max().unwrap_or(0)
    }

    /// Vertices in post-order (children before parents).
    fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                order.push(v);
                continue;
            }
            stack.push((v, true));
            for slot in &self.nodes[v].offspring {
                if let Slot::Child(c) = *slot {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    pub fn compute_charges(&self) -> ChargeReport {
        let mut charge = vec![0i64; self.nodes.len()];
        for v in self.post_order() {
            let mut c = 0i64;
            for slot in &self.nodes[v].offspring {
                c += match *slot {
                    Slot::Close => 1,
                    Slot::Open => -1,
                    Slot::Child(u) => charge[u],
                };
            }
            charge[v] = c;
        }
        let total = charge[self.root];
        ChargeReport { charge_of: charge, total }
    }

    /// Charge conditions: black charges at most 1, white charges at least 0.
    pub fn is_well_charged(&self) -> bool {
        let report = self.compute_charges();
        self.nodes.iter().zip(&report.charge_of).all(|(node, &c)| match node.color {
            Color::Black => c <= 1,
            Color::White => c >= 0,
        })
    }

    /// Degree check plus the offspring structure of d-regular well-charged
    /// trees: each black vertex has exactly one white child (and opening
    /// stems), each white vertex has only black children and closing stems.
    pub fn validate_regular(&self, d: usize) -> bool {
        self.nodes.iter().enumerate().all(|(v, node)| {
            let expected = if v == self.root { d } else { d - 1 };
            if node.offspring.len() != expected {
                return false;
            }
            match node.color {
                Color::Black => {
                    node.offspring.iter().filter(|s| matches!(s, Slot::Child(_))).count() == 1
                }
                Color::White => true,
            }
        })
    }

    /// Whether the tree belongs to the class counted by the map formulas:
    /// black root, d-regular, well-charged, total charge 0.
    pub fn is_valid_member(&self, d: usize) -> bool {
        self.nodes[self.root].color == Color::Black
            && self.validate_regular(d)
            && self.is_well_charged()
            && self.compute_charges().total == 0
    }

    /// Stems in contour order.
    pub fn stem_sequence(&self) -> Vec<StemRef> {
        let mut out = Vec::new();
        self.walk_contour(|ev| {
            if let ContourEvent::Stem(s) = ev {
                out.push(s);
            }
        });
        out
    }

    pub(crate) fn walk_contour(&self, mut f: impl FnMut(ContourEvent)) {
        enum Frame {
            Visit(usize, usize),
            Leave,
        }
        f(ContourEvent::Enter(self.root));
        let root_slots: Vec<usize> = self.root_order().collect();
        let mut stack: Vec<Frame> = vec![Frame::Leave];
        for &i in root_slots.iter().rev() {
            stack.push(Frame::Visit(self.root, i));
        }
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Leave => f(ContourEvent::Leave),
                Frame::Visit(v, i) => match self.nodes[v].offspring[i] {
                    Slot::Child(c) => {
                        f(ContourEvent::Enter(c));
                        stack.push(Frame::Leave);
                        for j in (0..self.nodes[c].offspring.len()).rev() {
                            stack.push(Frame::Visit(c, j));
                        }
                    }
                    slot => f(ContourEvent::Stem(StemRef {
                        vertex: v,
                        slot: i,
                        kind: slot.stem().expect("stem slot"),
                    })),
                },
            }
        }
    }

    pub fn canonical_code(&self) -> CanonicalCode {
        let mut code = Vec::with_capacity(3 * self.nodes.len());
        self.walk_contour(|ev| match ev {
            ContourEvent::Enter(v) => code.push(Symbol::Down(self.nodes[v].color)),
            ContourEvent::Leave => code.push(Symbol::Up),
            ContourEvent::Stem(s) => code.push(match s.kind {
                StemKind::Open => Symbol::Open,
                StemKind::Close => Symbol::Close,
            }),
        });
        CanonicalCode(code)
    }

    /// Ball of radius `k`: every vertex at height at most `k`, with the
    /// complete offspring of vertices at height below `k`. Vertices at height
    /// exactly `k` keep neither children nor stems. The root is rotated so
    /// that the root corner of the ball is 0.
    pub fn ball(&self, k: usize) -> TreeBall {
        let mut nodes = Vec::new();
        let mut m_k = 0;
        let mut n_k = 0;
        // (original vertex, new id, height)
        let mut queue = std::collections::VecDeque::new();
        let root_color = self.nodes[self.root].color;
        nodes.push(Node::new(root_color, Vec::new()));
        queue.push_back((self.root, 0usize, 0usize));
        while let Some((v, id, h)) = queue.pop_front() {
            if nodes[id].color == Color::Black {
                n_k += 1;
            }
            if h == k {
                m_k += 1;
                continue;
            }
            let order: Vec<usize> = if v == self.root {
                self.root_order().collect()
            } else {
                (0..self.nodes[v].offspring.len()).collect()
            };
            let mut offspring = Vec::with_capacity(order.len());
            for i in order {
                match self.nodes[v].offspring[i] {
                    Slot::Child(c) => {
                        let cid = nodes.len();
                        nodes.push(Node::new(self.nodes[c].color, Vec::new()));
                        offspring.push(Slot::Child(cid));
                        queue.push_back((c, cid, h + 1));
                    }
                    s => offspring.push(s),
                }
            }
            nodes[id].offspring = offspring;
        }
        let ball = BlossomTree::new(nodes, 0, 0).expect("ball of a valid tree is valid");
        TreeBall { ball, k, m_k, n_k }
    }

    /// Local distance `1/(1+R*)` where `R*` is the largest radius with equal
    /// balls. Equal trees are at distance 0.
    pub fn local_distance(&self, other: &BlossomTree) -> Ratio<u64> {
        if self.canonical_code() == other.canonical_code() {
            return Ratio::from_integer(0);
        }
        let limit = self.height().max(other.height()) + 1;
        let mut agree: Option<u64> = None;
        for k in 0..=limit {
            if self.ball(k).ball.canonical_code() == other.ball(k).ball.canonical_code() {
                agree = Some(k as u64);
            } else {
                break;
            }
        }
        match agree {
            Some(r) => Ratio::new(1, 1 + r),
            None => Ratio::from_integer(1),
        }
    }
}

impl fmt::Display for BlossomTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.canonical_code().fmt(f)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum ContourEvent {
    Enter(usize),
    Leave,
    Stem(StemRef),
}

fn parse_node(chars: &[char], pos: &mut usize, nodes: &mut Vec<Node>) -> Result<usize> {
    let color = match chars.get(*pos) {
        Some('B') | Some('b') => Color::Black,
        Some('W') | Some('w') => Color::White,
        other => return Err(structural(format!("expected vertex at {pos}, got {other:?}"))),
    };
    *pos += 1;
    let id = nodes.len();
    nodes.push(Node::new(color, Vec::new()));
    let mut offspring = Vec::new();
    if chars.get(*pos) == Some(&'[') {
        *pos += 1;
        loop {
            match chars.get(*pos) {
                Some(']') => {
                    *pos += 1;
                    break;
                }
                Some('o') => {
                    offspring.push(Slot::Open);
                    *pos += 1;
                }
                Some('c') => {
                    offspring.push(Slot::Close);
                    *pos += 1;
                }
                Some(_) => {
                    let child = parse_node(chars, pos, nodes)?;
                    offspring.push(Slot::Child(child));
                }
                None => return Err(structural("unterminated offspring list")),
            }
        }
    }
    nodes[id].offspring = offspring;
    Ok(id)
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration

#[derive(Debug)]
enum Shape {
    Vertex(Color, Vec<ShapeSlot>),
}

#[derive(Debug, Clone)]
enum ShapeSlot {
    Sub(Rc<Shape>),
    Open,
    Close,
}

type Pool = BTreeMap<usize, Vec<(Rc<Shape>, i64)>>;

struct Enumerator {
    d: usize,
    guard: usize,
    produced: usize,
    black: Pool,
    white: Pool,
}

impl Enumerator {
    fn bump(&mut self, by: usize) -> Result<()> {
        self.produced += by;
        if self.produced > self.guard {
            return Err(Error::Resource {
                what: format!("enumeration produced more than {} candidates", self.guard),
                seed: None,
            });
        }
        Ok(())
    }

    /// Planted subtrees rooted at `color` with exactly `r` black vertices,
    /// restricted to those satisfying the charge conditions everywhere.
    fn planted(&mut self, color: Color, r: usize) -> Result<Vec<(Rc<Shape>, i64)>> {
        let pool = match color {
            Color::Black => &self.black,
            Color::White => &self.white,
        };
        if let Some(v) = pool.get(&r) {
            return Ok(v.clone());
        }
        let own = usize::from(color == Color::Black);
        let result = if r < own {
            Vec::new()
        } else {
            let seqs = self.sequences(color, self.d - 1, r - own)?;
            seqs.into_iter()
                .filter(|(_, c)| match color {
                    Color::Black => *c <= 1,
                    Color::White => *c >= 0,
                })
                .map(|(slots, c)| (Rc::new(Shape::Vertex(color, slots)), c))
                .collect()
        };
        self.bump(result.len())?;
        match color {
            Color::Black => self.black.insert(r, result.clone()),
            Color::White => self.white.insert(r, result.clone()),
        };
        Ok(result)
    }

    /// All offspring sequences of length `len` for a vertex of color `color`
    /// whose subtrees hold `budget` black vertices in total, with their charge.
    fn sequences(&mut self, color: Color, len: usize, budget: usize) -> Result<Vec<(Vec<ShapeSlot>, i64)>> {
        if len == 0 {
            return Ok(if budget == 0 { vec![(Vec::new(), 0)] } else { Vec::new() });
        }
        let (stem, stem_charge) = match color {
            Color::Black => (ShapeSlot::Open, -1),
            Color::White => (ShapeSlot::Close, 1),
        };
        let child = color.opposite();
        let mut out = Vec::new();
        for first in 0..=budget {
            let heads: Vec<(ShapeSlot, i64)> = if first == 0 {
                let mut h = vec![(stem.clone(), stem_charge)];
                // white subtrees may hold no black vertex
                if child == Color::White {
                    h.extend(self.planted(child, 0)?.into_iter().map(|(s, c)| (ShapeSlot::Sub(s), c)));
                }
                h
            } else {
                self.planted(child, first)?.into_iter().map(|(s, c)| (ShapeSlot::Sub(s), c)).collect()
            };
            if heads.is_empty() {
                continue;
            }
            let tails = self.sequences(color, len - 1, budget - first)?;
            self.bump(heads.len() * tails.len())?;
            for (h, hc) in &heads {
                for (t, tc) in &tails {
                    let mut seq = Vec::with_capacity(len);
                    seq.push(h.clone());
                    seq.extend(t.iter().cloned());
                    out.push((seq, hc + tc));
                }
            }
        }
        Ok(out)
    }
}

fn flatten(root_color: Color, slots: &[ShapeSlot]) -> BlossomTree {
    fn push(nodes: &mut Vec<Node>, color: Color, slots: &[ShapeSlot]) -> usize {
        let id = nodes.len();
        nodes.push(Node::new(color, Vec::new()));
        let mut off = Vec::with_capacity(slots.len());
        for s in slots {
            off.push(match s {
                ShapeSlot::Open => Slot::Open,
                ShapeSlot::Close => Slot::Close,
                ShapeSlot::Sub(sub) => {
                    let Shape::Vertex(c, inner) = sub.as_ref();
                    Slot::Child(push(nodes, *c, inner))
                }
            });
        }
        nodes[id].offspring = off;
        id
    }
    let mut nodes = Vec::new();
    let root = push(&mut nodes, root_color, slots);
    BlossomTree::new(nodes, root, 0).expect("enumerated tree is well formed")
}

pub const DEFAULT_ENUMERATION_GUARD: usize = 20_000_000;

/// Every black-rooted, d-regular, well-charged tree of charge 0 with `n`
/// black vertices, sorted by canonical code.
///
/// The search ranges over all bipartite d-regular blossoming trees (no
/// assumption on how many children a vertex has) and prunes subtrees that
/// violate the charge conditions.
pub fn enumerate_trees(d: usize, n: usize) -> Result<Vec<BlossomTree>> {
    enumerate_trees_guarded(d, n, DEFAULT_ENUMERATION_GUARD)
}

pub fn enumerate_trees_guarded(d: usize, n: usize, guard: usize) -> Result<Vec<BlossomTree>> {
    if d < 3 {
        return Err(crate::error::domain(format!("degree {d} < 3")));
    }
    if n == 0 {
        return Err(crate::error::domain("n must be at least 1"));
    }
    let mut e = Enumerator { d, guard, produced: 0, black: Pool::new(), white: Pool::new() };
    // the root has d offspring entries and uses one black vertex itself
    let seqs = e.sequences(Color::Black, d, n - 1)?;
    let mut trees: Vec<(CanonicalCode, BlossomTree)> = seqs
        .into_iter()
        .filter(|(_, c)| *c == 0)
        .map(|(slots, _)| {
            let t = flatten(Color::Black, &slots);
            (t.canonical_code(), t)
        })
        .collect();
    trees.sort_by(|a, b| a.0.cmp(&b.0));
    trees.dedup_by(|a, b| a.0 == b.0);
    Ok(trees.into_iter().map(|(_, t)| t).collect())
}

/// All balls of radius `k` that can occur in d-regular well-charged trees of
/// arbitrary size (vertices below height `k` follow the offspring structure,
/// vertices at height `k` are leaves). Sorted by canonical code.
pub fn enumerate_balls(d: usize, k: usize) -> Vec<TreeBall> {
    // partial balls built as shapes, depth-limited
    fn white_words(d: usize) -> Vec<Vec<bool>> {
        (0..1u32 << (d - 1)).map(|mask| (0..d - 1).map(|i| mask >> i & 1 == 1).collect()).collect()
    }
    fn below(d: usize, color: Color, depth_left: usize) -> Vec<Rc<Shape>> {
        if depth_left == 0 {
            return vec![Rc::new(Shape::Vertex(color, Vec::new()))];
        }
        let words: Vec<Vec<ShapeSlot>> = match color {
            Color::Black => {
                let subs = below(d, Color::White, depth_left - 1);
                let mut out = Vec::new();
                for pos in 0..d - 1 {
                    for s in &subs {
                        let mut w = vec![ShapeSlot::Open; d - 1];
                        w[pos] = ShapeSlot::Sub(s.clone());
                        out.push(w);
                    }
                }
                out
            }
            Color::White => {
                let subs = below(d, Color::Black, depth_left - 1);
                let mut out = Vec::new();
                for pattern in white_words(d) {
                    let mut partial: Vec<Vec<ShapeSlot>> = vec![Vec::new()];
                    for is_black in pattern {
                        let mut next = Vec::new();
                        for p in &partial {
                            if is_black {
                                for s in &subs {
                                    let mut q = p.clone();
                                    q.push(ShapeSlot::Sub(s.clone()));
                                    next.push(q);
                                }
                            } else {
                                let mut q = p.clone();
                                q.push(ShapeSlot::Close);
                                next.push(q);
                            }
                        }
                        partial = next;
                    }
                    out.extend(partial);
                }
                out
            }
        };
        words.into_iter().map(|w| Rc::new(Shape::Vertex(color, w))).collect()
    }
    let mut balls: Vec<TreeBall> = if k == 0 {
        vec![flatten(Color::Black, &[]).ball(0)]
    } else {
        let subs = below(d, Color::White, k - 1);
        let mut out = Vec::new();
        for pos in 0..d {
            for s in &subs {
                let mut w = vec![ShapeSlot::Open; d];
                w[pos] = ShapeSlot::Sub(s.clone());
                out.push(flatten(Color::Black, &w).ball(k));
            }
        }
        out
    };
    balls.sort_by_cached_key(|b| b.ball.canonical_code());
    balls
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TreeJson {
    pub d: usize,
    pub root: usize,
    pub root_corner: usize,
    pub nodes: Vec<NodeJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spine: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NodeJson {
    pub id: usize,
    pub color: Color,
    pub offspring: Vec<EntryJson>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum EntryJson {
    Child { child: usize },
    Stem(StemJson),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum StemJson {
    Open,
    Close,
}

impl BlossomTree {
    pub fn to_json(&self, d: usize) -> TreeJson {
        TreeJson {
            d,
            root: self.root,
            root_corner: self.root_corner,
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeJson {
                    id,
                    color: n.color,
                    offspring: n
                        .offspring
                        .iter()
                        .map(|s| match *s {
                            Slot::Child(c) => EntryJson::Child { child: c },
                            Slot::Open => EntryJson::Stem(StemJson::Open),
                            Slot::Close => EntryJson::Stem(StemJson::Close),
                        })
                        .collect(),
                })
                .collect(),
            spine: None,
        }
    }

    pub fn from_json(json: &TreeJson) -> Result<Self> {
        let n = json.nodes.len();
        let mut nodes = vec![None; n];
        for nj in &json.nodes {
            if nj.id >= n || nodes[nj.id].is_some() {
                return Err(structural(format!("bad or duplicate node id {}", nj.id)));
            }
            let off = nj
                .offspring
                .iter()
                .map(|e| match *e {
                    EntryJson::Child { child } => Slot::Child(child),
                    EntryJson::Stem(StemJson::Open) => Slot::Open,
                    EntryJson::Stem(StemJson::Close) => Slot::Close,
                })
                .collect();
            nodes[nj.id] = Some(Node::new(nj.color, off));
        }
        let nodes = nodes.into_iter().map(|n| n.expect("all ids present")).collect();
        BlossomTree::new(nodes, json.root, json.root_corner)
    }
}
