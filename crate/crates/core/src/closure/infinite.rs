//! Closure of the limit tree, one ball at a time.
//!
//! Stem indices: `0, 1, 2, ...` are the stems met walking right from the root
//! corner (each spine vertex contributes its entries before the spine child,
//! subtrees in contour order), `-1, -2, ...` those met walking left (entries
//! after the spine child, last first, subtrees in reverse contour order).
//!
//! Both sides are scanned outward from the root. With the walk `C` of the
//! parent module, a closing stem on the right and an opening stem on the
//! left look for their partner further out (the first stem of the opposite
//! kind at the target level); the other two kinds look inward (the most
//! recent stem at the target level), and when nothing inward qualifies the
//! partner is the first qualifying stem of the other side. All this only
//! needs, per side, the first and the most recent stem of each kind at each
//! level, so a scan of `N` stems uses memory proportional to the walk range.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::{Boundary, ContourProcess, ContourStem};
use crate::bgw::{child_key, off_spine_word, subtree_increment, SpineTree, VertexWord};
use crate::error::{Error, Result};
use crate::map::{Corner, HalfEdge, MapBall, MapVertex, PlanarMap};
use crate::tree::{Color, StemKind};

/// A vertex of the limit tree as seen from the contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LimitVertex {
    pub key: u64,
    pub color: Color,
    pub spine: Option<u32>,
    /// Rotation position, at the parent, of the edge to this vertex.
    pub parent_pos: u8,
}

impl LimitVertex {
    fn is_root(&self) -> bool {
        self.spine == Some(0)
    }

    /// Rotation position of offspring entry `i`: after the parent edge,
    /// except at the root which has none.
    fn pos(&self, i: usize) -> usize {
        i + usize::from(!self.is_root())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StemInfo {
    pub index: i64,
    pub owner: LimitVertex,
    pub slot: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

struct Frame {
    v: LimitVertex,
    word: VertexWord,
    cur: i32,
    end: i32,
    dir: i32,
    tracked: bool,
}

/// Stems of one side in outward order.
struct Stream<'a> {
    tree: &'a mut SpineTree,
    side: Side,
    next_spine: usize,
    max_spine: usize,
    frames: Vec<Frame>,
    emitted: u64,
}

/// What a stream reports besides stems: the vertices it enters, with their
/// parent, so that tracked vertices can be completed.
enum Event {
    Stem { info: StemInfo, tracked: bool, spine_height: usize },
    Enter { v: LimitVertex, parent: Option<LimitVertex> },
}

impl<'a> Stream<'a> {
    fn new(tree: &'a mut SpineTree, side: Side, max_spine: usize) -> Self {
        Stream { tree, side, next_spine: 0, max_spine, frames: Vec::new(), emitted: 0 }
    }

    fn spine_limit_vertex(&mut self, h: usize) -> LimitVertex {
        let parent_pos = if h == 0 {
            0
        } else {
            let p = self.tree.spine_vertex(h - 1);
            (p.spine_child + usize::from(h - 1 != 0)) as u8
        };
        let sv = self.tree.spine_vertex(h);
        LimitVertex { key: sv.key, color: sv.word.color, spine: Some(h as u32), parent_pos }
    }

    fn current_spine(&self) -> usize {
        self.next_spine.saturating_sub(1)
    }

    /// Next event; `tracked` decides which vertices report their stems.
    fn next(&mut self, tracked: &impl Fn(u64) -> bool) -> Result<Event> {
        loop {
            let Some(top) = self.frames.last_mut() else {
                let h = self.next_spine;
                if h > self.max_spine {
                    return Err(Error::Resource {
                        what: format!("spine height budget {} exhausted", self.max_spine),
                        seed: Some(self.tree.seed()),
                    });
                }
                self.next_spine += 1;
                let v = self.spine_limit_vertex(h);
                let sv = self.tree.spine_vertex(h);
                let len = sv.word.len as i32;
                let sc = sv.spine_child as i32;
                let (cur, end, dir) = match self.side {
                    Side::Right => (0, sc, 1),
                    Side::Left => (len - 1, sc, -1),
                };
                let parent = (h > 0).then(|| self.spine_limit_vertex(h - 1));
                self.frames.push(Frame { v, word: sv.word, cur, end, dir, tracked: tracked(v.key) });
                return Ok(Event::Enter { v, parent });
            };
            if top.cur == top.end {
                self.frames.pop();
                continue;
            }
            let i = top.cur as usize;
            top.cur += top.dir;
            let v = top.v;
            if top.word.is_child(i) {
                let child = LimitVertex {
                    key: child_key(v.key, i),
                    color: v.color.opposite(),
                    spine: None,
                    parent_pos: v.pos(i) as u8,
                };
                let word = off_spine_word(self.tree.d(), child.color, child.key);
                let len = word.len as i32;
                let (cur, end, dir) = match self.side {
                    Side::Right => (0, len, 1),
                    Side::Left => (len - 1, -1, -1),
                };
                self.frames.push(Frame { v: child, word, cur, end, dir, tracked: tracked(child.key) });
                return Ok(Event::Enter { v: child, parent: Some(v) });
            }
            let tracked = top.tracked;
            let index = match self.side {
                Side::Right => self.emitted as i64,
                Side::Left => -1 - self.emitted as i64,
            };
            self.emitted += 1;
            let spine_height = self.current_spine();
            return Ok(Event::Stem { info: StemInfo { index, owner: v, slot: i as u8 }, tracked, spine_height });
        }
    }

    /// Next stem, skipping vertex entries.
    fn next_stem(&mut self) -> Result<(StemInfo, usize)> {
        loop {
            if let Event::Stem { info, spine_height, .. } = self.next(&|_| false)? {
                return Ok((info, spine_height));
            }
        }
    }
}

/// Materialized contour process on the index window `[lo, hi)`, `lo <= 0 <= hi`.
/// Vertex ids are the vertex keys.
pub fn contour_process(tree: &mut SpineTree, lo: i64, hi: i64, max_spine: usize) -> Result<ContourProcess> {
    assert!(lo <= 0 && hi >= 0, "window must contain the root corner");
    let mut left = Vec::with_capacity((-lo) as usize);
    {
        let mut s = Stream::new(tree, Side::Left, max_spine);
        for _ in 0..(-lo) {
            left.push(s.next_stem()?);
        }
    }
    let mut right = Vec::with_capacity(hi as usize);
    {
        let mut s = Stream::new(tree, Side::Right, max_spine);
        for _ in 0..hi {
            right.push(s.next_stem()?);
        }
    }
    let to_stem = |(info, h): (StemInfo, usize)| ContourStem {
        kind: kind_of(info.owner.color),
        vertex: info.owner.key as usize,
        slot: info.slot as usize,
        spine_height: Some(h),
    };
    let mut stems: Vec<ContourStem> = left.into_iter().rev().map(to_stem).collect();
    let c0 = -stems.iter().map(|s| step(s.kind)).sum::<i64>();
    stems.extend(right.into_iter().map(to_stem));
    Ok(ContourProcess::new(lo, stems, c0, Boundary::Window))
}

fn kind_of(color: Color) -> StemKind {
    match color {
        Color::Black => StemKind::Open,
        Color::White => StemKind::Close,
    }
}

fn step(kind: StemKind) -> i64 {
    match kind {
        StemKind::Open => 1,
        StemKind::Close => -1,
    }
}

/// Values indexed by walk level, growing in both directions.
struct LevelMap<T> {
    offset: i64,
    slots: Vec<Option<T>>,
}

impl<T: Copy> LevelMap<T> {
    fn new() -> Self {
        LevelMap { offset: 0, slots: Vec::new() }
    }

    fn get(&self, level: i64) -> Option<T> {
        let i = level - self.offset;
        if i < 0 || i as usize >= self.slots.len() {
            None
        } else {
            self.slots[i as usize]
        }
    }

    fn slot(&mut self, level: i64) -> &mut Option<T> {
        if self.slots.is_empty() {
            self.offset = level;
        }
        if level < self.offset {
            let grow = (self.offset - level) as usize;
            let mut v = vec![None; grow];
            v.append(&mut self.slots);
            self.slots = v;
            self.offset = level;
        }
        let i = (level - self.offset) as usize;
        if i >= self.slots.len() {
            self.slots.resize(i + 1, None);
        }
        &mut self.slots[i]
    }
}

#[derive(Debug, Clone, Copy)]
enum EntryState {
    Child(LimitVertex),
    Stem { index: Option<i64>, partner: Option<StemInfo> },
}

#[derive(Debug, Clone)]
struct Record {
    v: LimitVertex,
    parent: Option<LimitVertex>,
    entries: Vec<EntryState>,
}

impl Record {
    fn new(tree: &mut SpineTree, v: LimitVertex) -> Self {
        let (word, spine_child) = match v.spine {
            Some(h) => {
                let sv = tree.spine_vertex(h as usize);
                (sv.word, Some(sv.spine_child))
            }
            None => (off_spine_word(tree.d(), v.color, v.key), None),
        };
        let entries = (0..word.len as usize)
            .map(|i| {
                if !word.is_child(i) {
                    return EntryState::Stem { index: None, partner: None };
                }
                let child = if spine_child == Some(i) {
                    let h = v.spine.expect("spine vertex") as usize + 1;
                    LimitVertex { key: tree.spine_vertex(h).key, color: v.color.opposite(), spine: Some(h as u32), parent_pos: v.pos(i) as u8 }
                } else {
                    LimitVertex { key: child_key(v.key, i), color: v.color.opposite(), spine: None, parent_pos: v.pos(i) as u8 }
                };
                EntryState::Child(child)
            })
            .collect();
        Record { v, parent: None, entries }
    }

    fn clear_scan(&mut self) {
        self.parent = None;
        for e in &mut self.entries {
            if let EntryState::Stem { index, partner } = e {
                *index = None;
                *partner = None;
            }
        }
    }

    /// Neighbor through rotation position `pos`, with its own position.
    fn neighbor(&self, pos: usize) -> Option<(LimitVertex, usize)> {
        let off = usize::from(!self.v.is_root());
        if off == 1 && pos == 0 {
            return self.parent.map(|p| (p, self.v.parent_pos as usize));
        }
        match self.entries[pos - off] {
            EntryState::Child(c) => Some((c, 0)),
            EntryState::Stem { partner: Some(s), .. } => Some((s.owner, s.owner.pos(s.slot as usize))),
            EntryState::Stem { partner: None, .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CloseBallOptions {
    /// Stems scanned on each side in the first round.
    pub initial_window: u64,
    /// Largest number of stems scanned on one side.
    pub max_window: u64,
    pub max_spine_height: usize,
}

impl Default for CloseBallOptions {
    fn default() -> Self {
        CloseBallOptions { initial_window: 256, max_window: 1 << 27, max_spine_height: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CloseBallStats {
    /// Stems per side in the final, successful scan.
    pub window: u64,
    pub scans: u32,
}

struct ScanOutcome {
    /// Stems with a known partner, keyed by (vertex key, slot).
    resolved: HashMap<(u64, u8), StemInfo>,
}

/// One scan of both sides with `window` stems each. Tracked vertices get
/// their stem indices, their parents and, where the window allows, their
/// partners.
fn scan(tree: &mut SpineTree, window: u64, max_spine: usize, records: &mut HashMap<u64, Record>) -> Result<ScanOutcome> {
    for r in records.values_mut() {
        r.clear_scan();
    }
    let keys: HashSet<u64> = records.keys().copied().collect();
    let tracked = |k: u64| keys.contains(&k);
    let mut resolved = HashMap::new();
    // right side
    let mut first_open_right: LevelMap<StemInfo> = LevelMap::new();
    let mut cross_to_left: Vec<(StemInfo, i64)> = Vec::new();
    {
        let mut last_close: LevelMap<StemInfo> = LevelMap::new();
        let mut pending_open: LevelMap<StemInfo> = LevelMap::new();
        let mut s = Stream::new(tree, Side::Right, max_spine);
        let mut c = 0i64;
        while s.emitted < window {
            match s.next(&tracked)? {
                Event::Enter { v, parent } => {
                    if let Some(r) = records.get_mut(&v.key) {
                        r.parent = parent;
                    }
                }
                Event::Stem { info, tracked, .. } => {
                    let level = c;
                    match kind_of(info.owner.color) {
                        StemKind::Open => {
                            if let Some(req) = pending_open.slot(level).take() {
                                resolved.insert((req.owner.key, req.slot), info);
                            }
                            let first = first_open_right.slot(level);
                            if first.is_none() {
                                *first = Some(info);
                            }
                            if tracked {
                                match last_close.get(level + 1) {
                                    Some(p) => {
                                        resolved.insert((info.owner.key, info.slot), p);
                                    }
                                    None => cross_to_left.push((info, level + 1)),
                                }
                            }
                            c += 1;
                        }
                        StemKind::Close => {
                            *last_close.slot(level) = Some(info);
                            if tracked {
                                *pending_open.slot(level - 1) = Some(info);
                            }
                            c -= 1;
                        }
                    }
                    if tracked {
                        set_index(records, info);
                    }
                }
            }
        }
    }
    // left side, outward
    let mut first_close_left: LevelMap<StemInfo> = LevelMap::new();
    let mut cross_to_right: Vec<(StemInfo, i64)> = Vec::new();
    {
        let mut last_open: LevelMap<StemInfo> = LevelMap::new();
        let mut pending_close: LevelMap<StemInfo> = LevelMap::new();
        let mut s = Stream::new(tree, Side::Left, max_spine);
        let mut c = 0i64;
        while s.emitted < window {
            match s.next(&tracked)? {
                Event::Enter { v, parent } => {
                    if let Some(r) = records.get_mut(&v.key) {
                        r.parent = parent;
                    }
                }
                Event::Stem { info, tracked, .. } => {
                    let kind = kind_of(info.owner.color);
                    c -= step(kind);
                    let level = c;
                    match kind {
                        StemKind::Close => {
                            if let Some(req) = pending_close.slot(level).take() {
                                resolved.insert((req.owner.key, req.slot), info);
                            }
                            let first = first_close_left.slot(level);
                            if first.is_none() {
                                *first = Some(info);
                            }
                            if tracked {
                                match last_open.get(level - 1) {
                                    Some(p) => {
                                        resolved.insert((info.owner.key, info.slot), p);
                                    }
                                    None => cross_to_right.push((info, level - 1)),
                                }
                            }
                        }
                        StemKind::Open => {
                            *last_open.slot(level) = Some(info);
                            if tracked {
                                *pending_close.slot(level + 1) = Some(info);
                            }
                        }
                    }
                    if tracked {
                        set_index(records, info);
                    }
                }
            }
        }
    }
    for (info, level) in cross_to_left {
        if let Some(p) = first_close_left.get(level) {
            resolved.insert((info.owner.key, info.slot), p);
        }
    }
    for (info, level) in cross_to_right {
        if let Some(p) = first_open_right.get(level) {
            resolved.insert((info.owner.key, info.slot), p);
        }
    }
    for r in records.values_mut() {
        for (i, e) in r.entries.iter_mut().enumerate() {
            if let EntryState::Stem { partner, .. } = e {
                *partner = resolved.get(&(r.v.key, i as u8)).copied();
            }
        }
    }
    Ok(ScanOutcome { resolved })
}

fn set_index(records: &mut HashMap<u64, Record>, info: StemInfo) {
    if let Some(r) = records.get_mut(&info.owner.key) {
        if let Some(EntryState::Stem { index, .. }) = r.entries.get_mut(info.slot as usize) {
            *index = Some(info.index);
        }
    }
}

enum BfsOutcome {
    Done(Vec<LimitVertex>, Vec<usize>, HashMap<u64, usize>),
    /// Vertices to track, and whether some tracked vertex is unresolved.
    More(Vec<LimitVertex>, bool),
}

fn bfs(records: &HashMap<u64, Record>, root: LimitVertex, radius: usize, d: usize) -> BfsOutcome {
    let mut index: HashMap<u64, usize> = HashMap::from([(root.key, 0)]);
    let mut order = vec![root];
    let mut dist = vec![0usize];
    let mut queue = VecDeque::from([0usize]);
    let mut need = Vec::new();
    let mut unresolved = false;
    while let Some(i) = queue.pop_front() {
        if dist[i] >= radius {
            continue;
        }
        let v = order[i];
        let Some(rec) = records.get(&v.key) else {
            need.push(v);
            continue;
        };
        for pos in 0..d {
            match rec.neighbor(pos) {
                Some((u, _)) => {
                    if !index.contains_key(&u.key) {
                        index.insert(u.key, order.len());
                        order.push(u);
                        dist.push(dist[i] + 1);
                        queue.push_back(order.len() - 1);
                    }
                }
                None => unresolved = true,
            }
        }
    }
    if need.is_empty() && !unresolved {
        BfsOutcome::Done(order, dist, index)
    } else {
        BfsOutcome::More(need, unresolved)
    }
}

/// Ball of radius `radius` around the root of the closure of the limit tree.
///
/// Scans grow by doubling from `initial_window` until every vertex closer
/// than `radius` has all its neighbors identified. Matches found inside a
/// scanned window are final, so the result does not depend on the window
/// that certified it.
pub fn close_ball(tree: &mut SpineTree, radius: usize, opts: &CloseBallOptions) -> Result<(MapBall, CloseBallStats)> {
    let d = tree.d();
    let root = {
        let sv = tree.spine_vertex(0);
        LimitVertex { key: sv.key, color: Color::Black, spine: Some(0), parent_pos: 0 }
    };
    let mut records: HashMap<u64, Record> = HashMap::new();
    if radius > 0 {
        records.insert(root.key, Record::new(tree, root));
    }
    let mut window = opts.initial_window.max(1);
    let mut scans = 0u32;
    loop {
        if radius > 0 {
            scan(tree, window, opts.max_spine_height, &mut records)?;
            scans += 1;
        }
        match bfs(&records, root, radius, d) {
            BfsOutcome::Done(order, dist, index) => {
                let ball = build_ball(&records, &order, &dist, &index, radius, d)?;
                return Ok((ball, CloseBallStats { window, scans }));
            }
            BfsOutcome::More(need, unresolved) => {
                let fresh = need.iter().any(|v| !records.contains_key(&v.key));
                for v in need {
                    records.entry(v.key).or_insert_with(|| Record::new(tree, v));
                }
                if unresolved || !fresh {
                    if window >= opts.max_window {
                        return Err(Error::Resource {
                            what: format!("stem window budget {} exhausted at radius {radius}", opts.max_window),
                            seed: Some(tree.seed()),
                        });
                    }
                    window = (window * 2).min(opts.max_window);
                }
            }
        }
    }
}

fn build_ball(
    records: &HashMap<u64, Record>,
    order: &[LimitVertex],
    dist: &[usize],
    index: &HashMap<u64, usize>,
    radius: usize,
    d: usize,
) -> Result<MapBall> {
    let n = order.len();
    let mut half_edges: Vec<HalfEdge> = (0..n * d).map(|h| HalfEdge { vertex: h / d, twin: None }).collect();
    for (i, v) in order.iter().enumerate() {
        if dist[i] >= radius {
            continue;
        }
        let rec = &records[&v.key];
        for pos in 0..d {
            let (u, upos) = rec.neighbor(pos).expect("resolved by bfs");
            let j = index[&u.key];
            let (a, b) = (i * d + pos, j * d + upos);
            if half_edges[a].twin.is_some_and(|t| t != b) || half_edges[b].twin.is_some_and(|t| t != a) {
                return Err(Error::Consistency(format!("half-edge {a} or {b} matched twice")));
            }
            half_edges[a].twin = Some(b);
            half_edges[b].twin = Some(a);
        }
    }
    let vertices = order
        .iter()
        .enumerate()
        .map(|(i, v)| MapVertex { color: v.color, rot: (i * d..(i + 1) * d).collect() })
        .collect();
    let ball = PlanarMap::new(d, vertices, half_edges, Corner { vertex: 0, pos: 0 }, None)?;
    Ok(MapBall { ball, radius, distances: dist.to_vec() })
}

/// Partner of every stem of the tracked vertices, from one scan of
/// `window` stems per side. Stems whose partner lies beyond the window are
/// absent. Exposed for cross-checks against level search.
pub fn scan_partners(tree: &mut SpineTree, keys: &[u64], window: u64, max_spine: usize) -> Result<HashMap<(u64, u8), i64>> {
    let mut records = HashMap::new();
    for &k in keys {
        // only the key matters for tracking; the record is a placeholder
        records.insert(k, Record { v: LimitVertex { key: k, color: Color::Black, spine: None, parent_pos: 0 }, parent: None, entries: Vec::new() });
    }
    let out = scan(tree, window, max_spine, &mut records)?;
    Ok(out.resolved.into_iter().map(|(k, v)| (k, v.index)).collect())
}

// ---------------------------------------------------------------------------
// Walk statistics along the spine

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LevelStats {
    /// Entries right of the spine at the white spine vertex of the band:
    /// closing stems and subtrees, each subtree counting as one closing stem.
    pub l_close: u64,
    /// Opening stems right of the spine at the black spine vertex of the band.
    pub l_open: u64,
    pub x: u64,
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkStats {
    pub y0: i64,
    pub levels: Vec<LevelStats>,
    /// `S_n = Y_1 + ... + Y_n`, for `n = 1..=levels`.
    pub partial_sums: Vec<i64>,
    /// Contour walk at the end of band `n`, by traversal of the right side.
    pub walk_at_band_end: Vec<i64>,
    /// Subtrees too large for the traversal budget; their increment is taken
    /// from the charge identity instead.
    pub subtrees_over_budget: u64,
}

impl WalkStats {
    /// `C(R_n) = S_n + Y_0` for every band.
    pub fn identity_holds(&self) -> bool {
        self.partial_sums.iter().zip(&self.walk_at_band_end).all(|(s, c)| *c == s + self.y0)
    }
}

/// Band `k >= 1` is spine heights `{2k-1, 2k}`. `Y_k = l_open - l_close`
/// under the crate's sign convention, so `Y_k ~ U - U'` with `U, U'`
/// independent uniform on `{0, ..., d-2}` and `Y_0 ~ Unif{0, ..., d-1}`.
pub fn spine_walk_stats(tree: &mut SpineTree, n_levels: usize, subtree_budget: u64) -> WalkStats {
    let d = tree.d();
    tree.grow_spine(2 * n_levels);
    let root = tree.spine_vertex(0);
    let y0 = root.spine_child as i64;
    let mut c = y0; // root entries before the spine child are opening stems
    let mut levels = Vec::with_capacity(n_levels);
    let mut partial_sums = Vec::with_capacity(n_levels);
    let mut walk_at_band_end = Vec::with_capacity(n_levels);
    let mut over = 0u64;
    let mut s = 0i64;
    for k in 1..=n_levels {
        let w = tree.spine_vertex(2 * k - 1);
        let l_close = w.spine_child as u64;
        for i in 0..w.spine_child {
            if w.word.is_child(i) {
                c += subtree_increment(d, child_key(w.key, i), subtree_budget).unwrap_or_else(|| {
                    over += 1;
                    -1
                });
            } else {
                c -= 1;
            }
        }
        let b = tree.spine_vertex(2 * k);
        let l_open = b.spine_child as u64;
        c += l_open as i64;
        let y = l_open as i64 - l_close as i64;
        s += y;
        levels.push(LevelStats { l_close, l_open, x: l_close + l_open, y });
        partial_sums.push(s);
        walk_at_band_end.push(c);
    }
    WalkStats { y0, levels, partial_sums, walk_at_band_end, subtrees_over_budget: over }
}

#[cfg(test)]
mod tests {
    use super::super::Partner;
    use super::*;

    #[test]
    fn radius_zero_is_the_root() {
        let mut t = SpineTree::new(3, 1).unwrap();
        let (b, _) = close_ball(&mut t, 0, &CloseBallOptions::default()).unwrap();
        assert_eq!(b.ball.vertex_count(), 1);
        assert_eq!(b.ball.edge_count(), 0);
        assert_eq!(b.ball.vertices()[0].color, Color::Black);
    }

    #[test]
    fn materialized_process_indices() {
        let mut t = SpineTree::new(3, 5).unwrap();
        let cp = contour_process(&mut t, -50, 50, 10_000).unwrap();
        assert_eq!(cp.first_index(), -50);
        assert_eq!(cp.walk(0).unwrap(), 0);
        // root stems right of the root corner are opening and come first
        let root = t.spine_vertex(0);
        for i in 0..root.spine_child as i64 {
            assert_eq!(cp.stem(i).unwrap().kind, StemKind::Open);
            assert_eq!(cp.walk(i).unwrap(), i);
        }
    }

    #[test]
    fn streaming_partners_agree_with_level_search() {
        for seed in 0..40 {
            let mut t = SpineTree::new(3, seed).unwrap();
            let n = 3000i64;
            let cp = contour_process(&mut t, -n, n, 1_000_000).unwrap();
            let keys: Vec<u64> = cp.stems().iter().map(|s| s.vertex as u64).collect::<HashSet<_>>().into_iter().collect();
            let partners = scan_partners(&mut t, &keys, n as u64, 1_000_000).unwrap();
            let mut checked = 0;
            for k in -n..n {
                let s = cp.stem(k).unwrap();
                let streamed = partners.get(&(s.vertex as u64, s.slot as u8));
                match cp.match_stem(k) {
                    Ok(Partner::Index(j)) => {
                        assert_eq!(streamed, Some(&j), "seed {seed} stem {k}");
                        checked += 1;
                    }
                    Err(Error::NeedsDeepening(_)) => assert!(streamed.is_none(), "seed {seed} stem {k}"),
                    other => panic!("{other:?}"),
                }
            }
            assert!(checked > 0);
        }
    }

    #[test]
    fn balls_are_valid_and_stable() {
        let opts = CloseBallOptions::default();
        for seed in 0..60 {
            let mut t = SpineTree::new(3, seed).unwrap();
            let (b, stats) = close_ball(&mut t, 3, &opts).unwrap();
            assert!(b.is_valid(3), "seed {seed}");
            let deeper = CloseBallOptions { initial_window: stats.window * 2, ..opts };
            let mut t2 = SpineTree::new(3, seed).unwrap();
            let (b2, _) = close_ball(&mut t2, 3, &deeper).unwrap();
            assert_eq!(serde_json::to_string(&b.to_json()).unwrap(), serde_json::to_string(&b2.to_json()).unwrap());
        }
    }

    #[test]
    fn walk_identity_and_bounds() {
        for seed in 0..300 {
            let mut t = SpineTree::new(4, seed).unwrap();
            let w = spine_walk_stats(&mut t, 30, 2_000);
            assert!(w.identity_holds());
            assert!((0..4).contains(&w.y0));
            assert!(w.levels.iter().all(|l| l.y.abs() <= 2));
        }
    }
}
