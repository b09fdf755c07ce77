//! Closure of blossoming trees into maps.
//!
//! Sign convention, fixed once for the whole crate: the contour walk `C`
//! satisfies `C(0) = 0` and `C(k+1) - C(k) = +1` when stem `k` is opening,
//! `-1` when it is closing; `C(k)` is the value *before* stem `k`. A closing
//! stem plays the role of `(` and an opening stem the role of `)`, so
//!
//! ```text
//! sigma(j) = inf { k > j : stem k opening, C(k) = C(j) - 1 }   (j closing)
//! sigma(k) = sup { j < k : stem j closing, C(j) = C(k) + 1 }   (k opening)
//! ```
//!
//! On a finite tree of total charge 0 this is the non-crossing matching of
//! the cyclic stem word, read with periodic extension.

use rand::Rng;

use crate::error::{domain, structural, Error, Result};
use crate::map::{Corner, HalfEdge, MapVertex, PlanarMap};
use crate::tree::{BlossomTree, Slot, StemKind, StemRef};

mod infinite;
pub use infinite::*;

fn step(kind: StemKind) -> i64 {
    match kind {
        StemKind::Open => 1,
        StemKind::Close => -1,
    }
}

/// Stack matching of a linear word. Unmatched stems get `None`.
pub fn stack_matching(kinds: &[StemKind]) -> Vec<Option<usize>> {
    let mut partner = vec![None; kinds.len()];
    let mut stack = Vec::new();
    for (i, &k) in kinds.iter().enumerate() {
        match k {
            StemKind::Close => stack.push(i),
            StemKind::Open => {
                if let Some(j) = stack.pop() {
                    partner[i] = Some(j);
                    partner[j] = Some(i);
                }
            }
        }
    }
    partner
}

/// Non-crossing matching of a cyclic word with as many opening as closing
/// stems.
pub fn cyclic_matching(kinds: &[StemKind]) -> Result<Vec<usize>> {
    let m = kinds.len();
    let opens = kinds.iter().filter(|&&k| k == StemKind::Open).count();
    if 2 * opens != m {
        return Err(structural(format!("{opens} opening vs {} closing stems: unmatched stems", m - opens)));
    }
    let mut partner = vec![usize::MAX; m];
    let mut stack = Vec::new();
    for pass in 0..2 {
        for (i, &k) in kinds.iter().enumerate() {
            if partner[i] != usize::MAX {
                continue;
            }
            match k {
                StemKind::Close if pass == 0 => stack.push(i),
                StemKind::Close => {}
                StemKind::Open => {
                    if let Some(j) = stack.pop() {
                        partner[i] = j;
                        partner[j] = i;
                    }
                }
            }
        }
    }
    debug_assert!(partner.iter().all(|&p| p != usize::MAX));
    Ok(partner)
}

/// Matching obtained by repeatedly merging a uniformly chosen adjacent
/// (closing, opening) pair of the current cyclic word. Quadratic; used as an
/// order-independence oracle.
pub fn random_order_matching<R: Rng + ?Sized>(kinds: &[StemKind], rng: &mut R) -> Result<Vec<usize>> {
    let m = kinds.len();
    let mut alive: Vec<usize> = (0..m).collect();
    let mut partner = vec![usize::MAX; m];
    while !alive.is_empty() {
        let len = alive.len();
        let candidates: Vec<usize> = (0..len)
            .filter(|&i| kinds[alive[i]] == StemKind::Close && kinds[alive[(i + 1) % len]] == StemKind::Open)
            .collect();
        if candidates.is_empty() || len < 2 {
            return Err(structural("unmatched stems"));
        }
        let i = candidates[rng.gen_range(0..candidates.len())];
        let (a, b) = (alive[i], alive[(i + 1) % len]);
        partner[a] = b;
        partner[b] = a;
        let (lo, hi) = if i + 1 < len { (i, i + 1) } else { (0, i) };
        alive.remove(hi);
        alive.remove(lo);
    }
    Ok(partner)
}

// ---------------------------------------------------------------------------
// Contour processes over a materialized index window

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// The word repeats with its period (finite trees).
    Periodic,
    /// A window of a longer word: searches leaving it need deepening.
    Window,
    /// Nothing outside the window: searches leaving it return infinity.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContourStem {
    pub kind: StemKind,
    /// Owning vertex, in the id space of whatever produced the process.
    pub vertex: usize,
    pub slot: usize,
    /// Height of the spine vertex this stem hangs from, for limit trees.
    pub spine_height: Option<usize>,
}

/// Stems on an index window `[first, first + len)` with the walk values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContourProcess {
    first: i64,
    stems: Vec<ContourStem>,
    /// `walk[i] = C(first + i)`, one more entry than `stems`.
    walk: Vec<i64>,
    boundary: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partner {
    Index(i64),
    PlusInfinity,
    MinusInfinity,
}

impl ContourProcess {
    /// `c0` is the walk value before the first stem of the window.
    pub fn new(first: i64, stems: Vec<ContourStem>, c0: i64, boundary: Boundary) -> Self {
        let mut walk = Vec::with_capacity(stems.len() + 1);
        walk.push(c0);
        for s in &stems {
            walk.push(walk.last().expect("nonempty") + step(s.kind));
        }
        ContourProcess { first, stems, walk, boundary }
    }

    /// Finite tree, periodic extension of its contour word.
    pub fn from_tree(tree: &BlossomTree) -> Self {
        let stems = tree
            .stem_sequence()
            .into_iter()
            .map(|StemRef { vertex, slot, kind }| ContourStem { kind, vertex, slot, spine_height: None })
            .collect();
        ContourProcess::new(0, stems, 0, Boundary::Periodic)
    }

    pub fn first_index(&self) -> i64 {
        self.first
    }

    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }

    pub fn stems(&self) -> &[ContourStem] {
        &self.stems
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    fn local(&self, k: i64) -> Option<usize> {
        let i = k - self.first;
        (i >= 0 && (i as usize) < self.stems.len()).then_some(i as usize)
    }

    fn period_net(&self) -> i64 {
        self.walk[self.stems.len()] - self.walk[0]
    }

    pub fn stem(&self, k: i64) -> Result<ContourStem> {
        match (self.local(k), self.boundary) {
            (Some(i), _) => Ok(self.stems[i]),
            (None, Boundary::Periodic) if !self.stems.is_empty() => {
                let m = self.stems.len() as i64;
                Ok(self.stems[(k - self.first).rem_euclid(m) as usize])
            }
            _ => Err(Error::NeedsDeepening(format!("stem index {k} outside the realized window"))),
        }
    }

    /// `C(k)`; defined on `[first, first + len]`, everywhere if periodic.
    pub fn walk(&self, k: i64) -> Result<i64> {
        let i = k - self.first;
        if i >= 0 && (i as usize) <= self.stems.len() {
            return Ok(self.walk[i as usize]);
        }
        if self.boundary == Boundary::Periodic && !self.stems.is_empty() {
            let m = self.stems.len() as i64;
            let q = i.div_euclid(m);
            let r = i.rem_euclid(m) as usize;
            return Ok(self.walk[r] + q * self.period_net());
        }
        Err(Error::NeedsDeepening(format!("walk index {k} outside the realized window")))
    }

    /// Level search for the partner of stem `k`.
    pub fn match_stem(&self, k: i64) -> Result<Partner> {
        let s = self.stem(k)?;
        let level = self.walk(k)?;
        let (dir, want_kind, want_level) = match s.kind {
            StemKind::Close => (1i64, StemKind::Open, level - 1),
            StemKind::Open => (-1i64, StemKind::Close, level + 1),
        };
        // a periodic word of net 0 matches within one period
        let limit = match self.boundary {
            Boundary::Periodic => self.stems.len() as i64,
            _ => i64::MAX,
        };
        let mut j = k;
        for _ in 0..limit {
            j += dir;
            let inside = self.boundary == Boundary::Periodic || self.local(j).is_some();
            if !inside {
                return match self.boundary {
                    Boundary::Open if dir > 0 => Ok(Partner::PlusInfinity),
                    Boundary::Open => Ok(Partner::MinusInfinity),
                    _ => Err(Error::NeedsDeepening(format!("partner of stem {k} lies outside the window"))),
                };
            }
            if self.stem(j)?.kind == want_kind && self.walk(j)? == want_level {
                return Ok(Partner::Index(j));
            }
        }
        Err(structural(format!("stem {k} has no partner in a full period")))
    }
}

/// Window `[K-, K+]` around the stems `[k_minus, k_plus]` that is closed
/// under matching: with `x = max C` on `[k_minus, k_plus + 1]`,
/// `K- = sup { k <= k_minus : C(k) >= x }` and
/// `K+ = inf { k > k_plus : C(k) >= x } - 1`. The word on `[K-, K+]` is then
/// balanced, so every stem in it is matched inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchWindow {
    pub k_minus: i64,
    pub k_plus: i64,
    pub x: i64,
    pub big_k_minus: i64,
    pub big_k_plus: i64,
}

pub fn stability_window(cp: &ContourProcess, k_minus: i64, k_plus: i64) -> Result<MatchWindow> {
    if k_minus > k_plus {
        return Err(domain("empty stem range"));
    }
    let mut x = i64::MIN;
    for k in k_minus..=k_plus + 1 {
        x = x.max(cp.walk(k)?);
    }
    let mut lo = k_minus;
    while cp.walk(lo)? < x {
        lo -= 1;
    }
    let mut hi = k_plus + 1;
    while cp.walk(hi)? < x {
        hi += 1;
    }
    Ok(MatchWindow { k_minus, k_plus, x, big_k_minus: lo, big_k_plus: hi - 1 })
}

// ---------------------------------------------------------------------------
// Finite closure

/// Half-edge layout of a tree turned map: vertex `v` owns rotation
/// positions `[parent, offspring...]` (the root has no parent position).
pub(crate) struct TreeLayout {
    pub first: Vec<usize>,
    pub total: usize,
}

impl TreeLayout {
    pub fn new(tree: &BlossomTree) -> Self {
        let mut first = Vec::with_capacity(tree.len());
        let mut total = 0;
        for v in 0..tree.len() {
            first.push(total);
            total += tree.node(v).offspring.len() + usize::from(v != tree.root());
        }
        TreeLayout { first, total }
    }

    pub fn slot_pos(&self, tree: &BlossomTree, v: usize, slot: usize) -> usize {
        slot + usize::from(v != tree.root())
    }

    pub fn he(&self, tree: &BlossomTree, v: usize, slot: usize) -> usize {
        self.first[v] + self.slot_pos(tree, v, slot)
    }
}

/// Closure of a tree of total charge 0: every stem is merged with its
/// partner in the cyclic non-crossing matching. The marked face is the face
/// containing the tree corner where the prefix height (closing minus opening
/// stems) is minimal; the root corner is the tree's.
pub fn close_finite(tree: &BlossomTree) -> Result<PlanarMap> {
    let charges = tree.compute_charges();
    if charges.total != 0 {
        return Err(structural(format!("total charge {} != 0: unmatched stems", charges.total)));
    }
    if !tree.is_well_charged() {
        return Err(domain("tree violates the charge conditions"));
    }
    let d = tree.node(tree.root()).offspring.len();
    let layout = TreeLayout::new(tree);
    let mut half_edges = vec![HalfEdge { vertex: 0, twin: None }; layout.total];
    let mut vertices = Vec::with_capacity(tree.len());
    for v in 0..tree.len() {
        let deg = tree.node(v).offspring.len() + usize::from(v != tree.root());
        let rot: Vec<usize> = (layout.first[v]..layout.first[v] + deg).collect();
        for &h in &rot {
            half_edges[h].vertex = v;
        }
        vertices.push(MapVertex { color: tree.node(v).color, rot });
    }
    for v in 0..tree.len() {
        for (i, slot) in tree.node(v).offspring.iter().enumerate() {
            if let Slot::Child(c) = *slot {
                let a = layout.he(tree, v, i);
                let b = layout.first[c];
                half_edges[a].twin = Some(b);
                half_edges[b].twin = Some(a);
            }
        }
    }
    let stems = tree.stem_sequence();
    let kinds: Vec<StemKind> = stems.iter().map(|s| s.kind).collect();
    let partner = cyclic_matching(&kinds)?;
    for (i, &j) in partner.iter().enumerate() {
        let a = layout.he(tree, stems[i].vertex, stems[i].slot);
        let b = layout.he(tree, stems[j].vertex, stems[j].slot);
        half_edges[a].twin = Some(b);
    }
    let marked = if stems.is_empty() {
        None
    } else {
        let mut height = 0i64;
        let mut best = (0i64, 0usize);
        for (i, s) in stems.iter().enumerate() {
            if height < best.0 {
                best = (height, i);
            }
            height -= step(s.kind);
        }
        let s = stems[best.1];
        Some(layout.he(tree, s.vertex, s.slot))
    };
    let root = Corner { vertex: tree.root(), pos: tree.root_corner() };
    PlanarMap::new(d, vertices, half_edges, root, marked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::MapCode;
    use crate::tree::enumerate_trees;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, HashSet};

    fn kinds(s: &str) -> Vec<StemKind> {
        s.chars().map(|c| if c == 'o' { StemKind::Open } else { StemKind::Close }).collect()
    }

    #[test]
    fn nested_pattern() {
        let w = kinds("ccoo");
        let cp = ContourProcess::new(0, w.iter().map(|&kind| ContourStem { kind, vertex: 0, slot: 0, spine_height: None }).collect(), 0, Boundary::Open);
        assert_eq!(cp.match_stem(0).unwrap(), Partner::Index(3));
        assert_eq!(cp.match_stem(1).unwrap(), Partner::Index(2));
        assert_eq!(cp.match_stem(2).unwrap(), Partner::Index(1));
        assert_eq!(cp.match_stem(3).unwrap(), Partner::Index(0));
        assert_eq!(stack_matching(&w), vec![Some(3), Some(2), Some(1), Some(0)]);
    }

    #[test]
    fn open_boundary_gives_infinities() {
        let w = kinds("oc");
        let cp = ContourProcess::new(0, w.iter().map(|&kind| ContourStem { kind, vertex: 0, slot: 0, spine_height: None }).collect(), 0, Boundary::Open);
        assert_eq!(cp.match_stem(0).unwrap(), Partner::MinusInfinity);
        assert_eq!(cp.match_stem(1).unwrap(), Partner::PlusInfinity);
        let cw = ContourProcess { boundary: Boundary::Window, ..cp };
        assert!(matches!(cw.match_stem(1), Err(Error::NeedsDeepening(_))));
    }

    #[test]
    fn triple_edge_closure() {
        let t = BlossomTree::parse("B[W[cc]oo]").unwrap();
        let m = close_finite(&t).unwrap();
        let r = m.validate(3);
        assert!(r.is_valid());
        assert_eq!((r.vertices, r.edges, r.faces), (2, 3, Some(3)));
        assert_eq!(m.forget_marked_face().canonical_code(), crate::map::tests::triple_edge().canonical_code());
    }

    #[test]
    fn charge_errors() {
        let t = BlossomTree::parse("B[W[cc]o]").unwrap();
        assert!(matches!(close_finite(&t), Err(Error::Structural(_))));
    }

    fn level_search_matching(t: &BlossomTree) -> Vec<usize> {
        let cp = ContourProcess::from_tree(t);
        let m = cp.len() as i64;
        (0..m)
            .map(|k| match cp.match_stem(k).unwrap() {
                Partner::Index(j) => j.rem_euclid(m) as usize,
                p => panic!("unexpected {p:?}"),
            })
            .collect()
    }

    #[test]
    fn three_routes_agree_on_small_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (d, n) in [(3, 1), (3, 2), (3, 3), (4, 2)] {
            for t in enumerate_trees(d, n).unwrap() {
                let k: Vec<StemKind> = t.stem_sequence().iter().map(|s| s.kind).collect();
                let stack = cyclic_matching(&k).unwrap();
                assert_eq!(level_search_matching(&t), stack);
                for _ in 0..5 {
                    assert_eq!(random_order_matching(&k, &mut rng).unwrap(), stack);
                }
            }
        }
    }

    #[test]
    fn closure_is_injective_and_classes_have_face_count_size() {
        for (d, n) in [(3, 1), (3, 2), (3, 3), (4, 2)] {
            let trees = enumerate_trees(d, n).unwrap();
            let mut with_face = HashSet::new();
            let mut classes: HashMap<MapCode, usize> = HashMap::new();
            for t in &trees {
                let m = close_finite(t).unwrap();
                let r = m.validate(d);
                assert!(r.is_valid(), "{r:?}");
                assert_eq!(r.faces, Some(2 + (d - 2) * n));
                assert!(with_face.insert(m.canonical_code()), "closure not injective");
                *classes.entry(m.forget_marked_face().canonical_code()).or_default() += 1;
            }
            assert!(classes.values().all(|&c| c == 2 + (d - 2) * n), "{d} {n} {classes:?}");
        }
    }

    #[test]
    fn stability_window_is_balanced() {
        let t = BlossomTree::parse("B[W[B[W[cc]o]c]oo]").unwrap();
        let cp = ContourProcess::from_tree(&t);
        let m = cp.len() as i64;
        for a in 0..m {
            for b in a..m {
                let w = stability_window(&cp, a, b).unwrap();
                assert!(w.big_k_minus <= a && b <= w.big_k_plus);
                for k in w.big_k_minus..=w.big_k_plus {
                    let Partner::Index(j) = cp.match_stem(k).unwrap() else { panic!() };
                    assert!((w.big_k_minus..=w.big_k_plus).contains(&j));
                }
            }
        }
    }
}
