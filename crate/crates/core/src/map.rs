//! Rotation-system planar maps.
//!
//! Each vertex stores the cyclic order of its half-edges (`rot`). A half-edge
//! either has a twin, forming an edge, or sits on the frontier of a partial
//! map. The corner "at position `pos`" of a vertex is the corner just before
//! `rot[pos]`. Faces follow `next(h) = succ(twin(h))` where `succ` is the
//! successor in the rotation of the vertex carrying `twin(h)`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Error, Result};
use crate::tree::Color;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfEdge {
    pub vertex: usize,
    pub twin: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapVertex {
    pub color: Color,
    pub rot: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Corner {
    pub vertex: usize,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarMap {
    d: usize,
    vertices: Vec<MapVertex>,
    half_edges: Vec<HalfEdge>,
    pos_in_rot: Vec<usize>,
    root: Corner,
    marked_face: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: Option<usize>,
    pub frontier: usize,
    pub regular: bool,
    pub bipartite: bool,
    pub connected: bool,
    /// `V - E + F`, only for complete maps.
    pub euler: Option<i64>,
}

impl MapReport {
    pub fn is_valid(&self) -> bool {
        self.regular && self.bipartite && self.connected && self.euler.is_none_or(|e| e == 2)
    }
}

impl PlanarMap {
    pub fn new(
        d: usize,
        vertices: Vec<MapVertex>,
        half_edges: Vec<HalfEdge>,
        root: Corner,
        marked_face: Option<usize>,
    ) -> Result<Self> {
        let mut pos_in_rot = vec![usize::MAX; half_edges.len()];
        for (v, vert) in vertices.iter().enumerate() {
            for (i, &h) in vert.rot.iter().enumerate() {
                if h >= half_edges.len() {
                    return Err(structural(format!("half-edge {h} out of range")));
                }
                if pos_in_rot[h] != usize::MAX {
                    return Err(structural(format!("half-edge {h} appears twice in rotations")));
                }
                if half_edges[h].vertex != v {
                    return Err(structural(format!("half-edge {h} listed at {v} but attached to {}", half_edges[h].vertex)));
                }
                pos_in_rot[h] = i;
            }
        }
        if let Some(h) = pos_in_rot.iter().position(|&p| p == usize::MAX) {
            return Err(structural(format!("half-edge {h} missing from rotations")));
        }
        for (h, he) in half_edges.iter().enumerate() {
            if let Some(t) = he.twin {
                if t == h || t >= half_edges.len() || half_edges[t].twin != Some(h) {
                    return Err(structural(format!("twin of {h} is not an involution")));
                }
            }
        }
        if root.vertex >= vertices.len() || root.pos >= vertices[root.vertex].rot.len().max(1) {
            return Err(structural("root corner out of range"));
        }
        if let Some(f) = marked_face {
            if f >= half_edges.len() {
                return Err(structural("marked face half-edge out of range"));
            }
        }
        Ok(PlanarMap { d, vertices, half_edges, pos_in_rot, root, marked_face })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn vertices(&self) -> &[MapVertex] {
        &self.vertices
    }

    pub fn half_edges(&self) -> &[HalfEdge] {
        &self.half_edges
    }

    pub fn root(&self) -> Corner {
        self.root
    }

    pub fn marked_face(&self) -> Option<usize> {
        self.marked_face
    }

    pub fn forget_marked_face(&self) -> PlanarMap {
        PlanarMap { marked_face: None, ..self.clone() }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.half_edges.iter().filter(|h| h.twin.is_some()).count() / 2
    }

    pub fn frontier(&self) -> Vec<usize> {
        (0..self.half_edges.len()).filter(|&h| self.half_edges[h].twin.is_none()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.half_edges.iter().all(|h| h.twin.is_some())
    }

    /// Successor of `h` in the rotation of its vertex.
    pub fn succ(&self, h: usize) -> usize {
        let rot = &self.vertices[self.half_edges[h].vertex].rot;
        rot[(self.pos_in_rot[h] + 1) % rot.len()]
    }

    pub fn position(&self, h: usize) -> usize {
        self.pos_in_rot[h]
    }

    /// Neighbor reached through `h`, if `h` is not a frontier half-edge.
    pub fn target(&self, h: usize) -> Option<usize> {
        self.half_edges[h].twin.map(|t| self.half_edges[t].vertex)
    }

    /// Graph distances from the root vertex through known edges.
    pub fn distances(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertices.len()];
        let mut queue = VecDeque::new();
        dist[self.root.vertex] = Some(0);
        queue.push_back(self.root.vertex);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].expect("queued vertices have distances");
            for &h in &self.vertices[v].rot {
                if let Some(u) = self.target(h) {
                    if dist[u].is_none() {
                        dist[u] = Some(dv + 1);
                        queue.push_back(u);
                    }
                }
            }
        }
        dist
    }

    pub fn validate(&self, d: usize) -> MapReport {
        let regular = self.vertices.iter().all(|v| v.rot.len() == d);
        let connected = self.distances().iter().all(Option::is_some);
        let proper = self.half_edges.iter().enumerate().all(|(h, he)| match he.twin {
            Some(t) => self.vertices[he.vertex].color != self.vertices[self.half_edges[t].vertex].color || h == t,
            None => true,
        });
        let bipartite = proper && self.two_colorable();
        let faces = self.faces().ok().map(|f| f.len());
        let euler = faces.map(|f| self.vertex_count() as i64 - self.edge_count() as i64 + f as i64);
        MapReport {
            vertices: self.vertex_count(),
            edges: self.edge_count(),
            faces,
            frontier: self.frontier().len(),
            regular,
            bipartite,
            connected,
            euler,
        }
    }

    fn two_colorable(&self) -> bool {
        let mut side: Vec<Option<bool>> = vec![None; self.vertices.len()];
        for s in 0..self.vertices.len() {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(false);
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                let sv = side[v].expect("assigned");
                for &h in &self.vertices[v].rot {
                    if let Some(u) = self.target(h) {
                        match side[u] {
                            None => {
                                side[u] = Some(!sv);
                                stack.push(u);
                            }
                            Some(su) if su == sv => return false,
                            _ => {}
                        }
                    }
                }
            }
        }
        true
    }

    /// Face cycles as sequences of half-edges.
    pub fn faces(&self) -> Result<Vec<Vec<usize>>> {
        if !self.is_complete() {
            return Err(Error::PartialMap(format!("{} frontier half-edges", self.frontier().len())));
        }
        let mut seen = vec![false; self.half_edges.len()];
        let mut faces = Vec::new();
        for start in 0..self.half_edges.len() {
            if seen[start] {
                continue;
            }
            let mut face = Vec::new();
            let mut h = start;
            while !seen[h] {
                seen[h] = true;
                face.push(h);
                h = self.face_next(h);
            }
            faces.push(face);
        }
        Ok(faces)
    }

    pub fn face_next(&self, h: usize) -> usize {
        self.succ(self.half_edges[h].twin.expect("face tracing needs a complete map"))
    }

    /// Canonical code of the rooted map: breadth-first labelling from the
    /// root corner following rotations. Includes the marked face if any.
    pub fn canonical_code(&self) -> MapCode {
        let n = self.vertices.len();
        let mut label = vec![usize::MAX; n];
        let mut start = vec![0usize; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        let r = self.root.vertex;
        label[r] = 0;
        start[r] = self.vertices[r].rot.get(self.root.pos).copied().unwrap_or(usize::MAX);
        queue.push_back(r);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for h in self.rotation_from(v, start[v]) {
                if let Some(t) = self.half_edges[h].twin {
                    let u = self.half_edges[t].vertex;
                    if label[u] == usize::MAX {
                        label[u] = order.len() + queue.len();
                        start[u] = t;
                        queue.push_back(u);
                    }
                }
            }
        }
        let offset = |h: usize| -> i64 {
            let v = self.half_edges[h].vertex;
            let deg = self.vertices[v].rot.len();
            ((self.pos_in_rot[h] + deg - self.pos_in_rot[start[v]]) % deg) as i64
        };
        let mut code = Vec::new();
        for &v in &order {
            code.push(match self.vertices[v].color {
                Color::Black => 0,
                Color::White => 1,
            });
            code.push(self.vertices[v].rot.len() as i64);
            for h in self.rotation_from(v, start[v]) {
                match self.half_edges[h].twin {
                    Some(t) => {
                        code.push(label[self.half_edges[t].vertex] as i64);
                        code.push(offset(t));
                    }
                    None => {
                        code.push(-1);
                        code.push(-1);
                    }
                }
            }
        }
        // unreachable vertices make the code incomplete; flag them
        if order.len() != n {
            code.push(-2);
            code.push((n - order.len()) as i64);
        }
        if let Some(f) = self.marked_face {
            let face = self.face_of(f);
            let key = face
                .iter()
                .filter(|&&h| label[self.half_edges[h].vertex] != usize::MAX)
                .map(|&h| (label[self.half_edges[h].vertex] as i64, offset(h)))
                .min()
                .unwrap_or((-1, -1));
            code.push(-3);
            code.push(key.0);
            code.push(key.1);
        }
        MapCode(code)
    }

    fn face_of(&self, h: usize) -> Vec<usize> {
        let mut face = vec![h];
        let mut x = h;
        while let Some(t) = self.half_edges[x].twin {
            x = self.succ(t);
            if x == h {
                break;
            }
            face.push(x);
        }
        face
    }

    fn rotation_from(&self, v: usize, first: usize) -> impl Iterator<Item = usize> + '_ {
        let rot = &self.vertices[v].rot;
        let p = if first == usize::MAX { 0 } else { self.pos_in_rot[first] };
        (0..rot.len()).map(move |i| rot[(p + i) % rot.len()])
    }

    /// Ball of radius `radius` around the root vertex: vertices at distance at
    /// most `radius` and the edges with an endpoint at distance at most
    /// `radius - 1`. Half-edges of ball vertices whose edge is not in the ball
    /// are kept as frontier half-edges, so rotations stay complete.
    pub fn ball(&self, radius: usize) -> Result<MapBall> {
        let dist = self.distances();
        for (v, dv) in dist.iter().enumerate() {
            if let Some(dv) = *dv {
                if dv < radius && self.vertices[v].rot.iter().any(|&h| self.half_edges[h].twin.is_none()) {
                    return Err(Error::NeedsDeepening(format!(
                        "vertex at distance {dv} < {radius} has frontier half-edges"
                    )));
                }
            }
        }
        let keep: Vec<Option<usize>> = {
            let mut next = 0;
            dist.iter()
                .map(|dv| match dv {
                    Some(x) if *x <= radius => {
                        next += 1;
                        Some(next - 1)
                    }
                    _ => None,
                })
                .collect()
        };
        let mut vertices = Vec::new();
        let mut half_edges = Vec::new();
        let mut new_he = vec![usize::MAX; self.half_edges.len()];
        let mut distances = Vec::new();
        for (v, vert) in self.vertices.iter().enumerate() {
            if keep[v].is_none() {
                continue;
            }
            let mut rot = Vec::with_capacity(vert.rot.len());
            for &h in &vert.rot {
                new_he[h] = half_edges.len();
                rot.push(half_edges.len());
                half_edges.push(HalfEdge { vertex: vertices.len(), twin: None });
            }
            vertices.push(MapVertex { color: vert.color, rot });
            distances.push(dist[v].expect("kept vertices are reachable"));
        }
        for (h, he) in self.half_edges.iter().enumerate() {
            let (Some(t), Some(dv)) = (he.twin, dist[he.vertex]) else { continue };
            let du = dist[self.half_edges[t].vertex];
            let inside = dv <= radius && du.is_some_and(|du| du <= radius);
            if inside && (dv + 1 <= radius || du.is_some_and(|du| du + 1 <= radius)) {
                half_edges[new_he[h]].twin = Some(new_he[t]);
            }
        }
        let root = Corner { vertex: keep[self.root.vertex].expect("root kept"), pos: self.root.pos };
        let ball = PlanarMap::new(self.d, vertices, half_edges, root, None)?;
        Ok(MapBall { ball, radius, distances })
    }

    /// `1/(1+R*)` with `R*` the largest radius with equal balls; 0 for equal maps.
    pub fn local_distance(&self, other: &PlanarMap) -> Result<Ratio<u64>> {
        let a = self.forget_marked_face();
        let b = other.forget_marked_face();
        if a.canonical_code() == b.canonical_code() {
            return Ok(Ratio::from_integer(0));
        }
        let max_r = |m: &PlanarMap| m.distances().into_iter().flatten().max().unwrap_or(0);
        let limit = max_r(&a).max(max_r(&b)) + 1;
        let mut agree = None;
        for r in 0..=limit {
            if a.ball(r)?.ball.canonical_code() == b.ball(r)?.ball.canonical_code() {
                agree = Some(r as u64);
            } else {
                break;
            }
        }
        Ok(agree.map_or(Ratio::from_integer(1), |r| Ratio::new(1, 1 + r)))
    }
}

/// Canonical code of a rooted (possibly partial) map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MapCode(pub Vec<i64>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapBall {
    pub ball: PlanarMap,
    pub radius: usize,
    /// Distance from the root of every vertex of `ball`, by vertex id.
    pub distances: Vec<usize>,
}

impl MapBall {
    /// Bipartite, and every vertex closer than the radius has all `d`
    /// half-edges matched inside the ball.
    pub fn is_valid(&self, d: usize) -> bool {
        let report = self.ball.validate(d);
        report.bipartite
            && report.connected
            && report.regular
            && self.ball.vertices().iter().zip(&self.distances).all(|(v, &dv)| {
                dv >= self.radius || v.rot.iter().all(|&h| self.ball.half_edges()[h].twin.is_some())
            })
    }

    pub fn to_json(&self) -> MapBallJson {
        MapBallJson { map: self.ball.to_json(), radius: self.radius, distances: self.distances.clone() }
    }
}

// ---------------------------------------------------------------------------
// Random walk

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkSummary {
    pub steps_taken: u64,
    pub visits: Vec<u64>,
    pub returns_to_root: u64,
    pub max_distance: usize,
    /// The walk tried to cross a frontier half-edge and stopped there.
    pub truncated: bool,
}

/// Simple random walk from the root vertex: each step picks one of the `deg`
/// half-edges uniformly, so multiple edges count with multiplicity.
pub fn simple_random_walk<R: Rng + ?Sized>(map: &PlanarMap, steps: u64, rng: &mut R) -> WalkSummary {
    let dist = map.distances();
    let mut visits = vec![0u64; map.vertex_count()];
    let mut v = map.root.vertex;
    visits[v] += 1;
    let mut summary = WalkSummary {
        steps_taken: 0,
        visits: Vec::new(),
        returns_to_root: 0,
        max_distance: 0,
        truncated: false,
    };
    for _ in 0..steps {
        let rot = &map.vertices[v].rot;
        let h = rot[rng.gen_range(0..rot.len())];
        match map.target(h) {
            Some(u) => v = u,
            None => {
                summary.truncated = true;
                break;
            }
        }
        summary.steps_taken += 1;
        visits[v] += 1;
        if v == map.root.vertex {
            summary.returns_to_root += 1;
        }
        summary.max_distance = summary.max_distance.max(dist[v].unwrap_or(0));
    }
    summary.visits = visits;
    summary
}

// ---------------------------------------------------------------------------
// Export

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MapJson {
    pub d: usize,
    pub vertices: Vec<MapVertexJson>,
    pub twins: Vec<[usize; 2]>,
    pub frontier: Vec<usize>,
    pub root: CornerJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked_face: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MapVertexJson {
    pub id: usize,
    pub color: Color,
    pub rot: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CornerJson {
    pub vertex: usize,
    pub pos: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MapBallJson {
    #[serde(flatten)]
    pub map: MapJson,
    #[serde(rename = "R")]
    pub radius: usize,
    pub distances: Vec<usize>,
}

impl PlanarMap {
    pub fn to_json(&self) -> MapJson {
        let mut twins = Vec::new();
        for (h, he) in self.half_edges.iter().enumerate() {
            if let Some(t) = he.twin {
                if h < t {
                    twins.push([h, t]);
                }
            }
        }
        MapJson {
            d: self.d,
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(id, v)| MapVertexJson { id, color: v.color, rot: v.rot.clone() })
                .collect(),
            twins,
            frontier: self.frontier(),
            root: CornerJson { vertex: self.root.vertex, pos: self.root.pos },
            marked_face: self.marked_face,
        }
    }

    pub fn from_json(json: &MapJson) -> Result<Self> {
        let n = json.vertices.len();
        let mut vertices = vec![None; n];
        let total: usize = json.vertices.iter().map(|v| v.rot.len()).sum();
        let mut half_edges = vec![HalfEdge { vertex: usize::MAX, twin: None }; total];
        for vj in &json.vertices {
            if vj.id >= n || vertices[vj.id].is_some() {
                return Err(structural(format!("bad or duplicate vertex id {}", vj.id)));
            }
            for &h in &vj.rot {
                if h >= total {
                    return Err(structural(format!("half-edge id {h} out of range")));
                }
                half_edges[h].vertex = vj.id;
            }
            vertices[vj.id] = Some(MapVertex { color: vj.color, rot: vj.rot.clone() });
        }
        for &[a, b] in &json.twins {
            if a >= total || b >= total || half_edges[a].twin.is_some() || half_edges[b].twin.is_some() {
                return Err(structural(format!("bad twin pair [{a}, {b}]")));
            }
            half_edges[a].twin = Some(b);
            half_edges[b].twin = Some(a);
        }
        let listed: usize = json.frontier.len() + 2 * json.twins.len();
        if listed != total || json.frontier.iter().any(|&h| h >= total || half_edges[h].twin.is_some()) {
            return Err(structural("frontier list inconsistent with twins"));
        }
        let vertices = vertices.into_iter().map(|v| v.expect("ids are dense")).collect();
        PlanarMap::new(
            json.d,
            vertices,
            half_edges,
            Corner { vertex: json.root.vertex, pos: json.root.pos },
            json.marked_face,
        )
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph map {\n  node [style=filled, shape=circle];\n");
        for (v, vert) in self.vertices.iter().enumerate() {
            let (fill, font) = match vert.color {
                Color::Black => ("black", "white"),
                Color::White => ("white", "black"),
            };
            let extra = if v == self.root.vertex {
                format!(", penwidth=3, xlabel=\"root pos {}\"", self.root.pos)
            } else {
                String::new()
            };
            let _ = writeln!(s, "  v{v} [label=\"{v}\", fillcolor={fill}, fontcolor={font}{extra}];");
        }
        for (h, he) in self.half_edges.iter().enumerate() {
            match he.twin {
                Some(t) if h < t => {
                    let _ = writeln!(s, "  v{} -- v{};", he.vertex, self.half_edges[t].vertex);
                }
                None => {
                    let _ = writeln!(s, "  f{h} [shape=point, label=\"\"];");
                    let _ = writeln!(s, "  v{} -- f{h} [style=dashed];", he.vertex);
                }
                _ => {}
            }
        }
        s.push_str("}\n");
        s
    }
}

pub fn export(map: &PlanarMap, format: &str) -> Result<Vec<u8>> {
    match format {
        "json" => Ok(serde_json::to_vec(&map.to_json())?),
        "dot" => Ok(map.to_dot().into_bytes()),
        other => Err(Error::UnknownFormat(other.to_string())),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// One black and one white vertex joined by three edges.
    pub(crate) fn triple_edge() -> PlanarMap {
        let vertices = vec![
            MapVertex { color: Color::Black, rot: vec![0, 1, 2] },
            MapVertex { color: Color::White, rot: vec![3, 4, 5] },
        ];
        let he = |vertex, twin| HalfEdge { vertex, twin: Some(twin) };
        let half_edges = vec![he(0, 5), he(0, 4), he(0, 3), he(1, 2), he(1, 1), he(1, 0)];
        PlanarMap::new(3, vertices, half_edges, Corner { vertex: 0, pos: 0 }, None).unwrap()
    }

    fn triangle() -> PlanarMap {
        let vertices = vec![
            MapVertex { color: Color::Black, rot: vec![0, 1] },
            MapVertex { color: Color::White, rot: vec![2, 3] },
            MapVertex { color: Color::Black, rot: vec![4, 5] },
        ];
        let he = |vertex, twin| HalfEdge { vertex, twin: Some(twin) };
        let half_edges = vec![he(0, 2), he(0, 5), he(1, 0), he(1, 4), he(2, 3), he(2, 1)];
        PlanarMap::new(2, vertices, half_edges, Corner { vertex: 0, pos: 0 }, None).unwrap()
    }

    #[test]
    fn triple_edge_is_valid() {
        let m = triple_edge();
        let r = m.validate(3);
        assert!(r.is_valid(), "{r:?}");
        assert_eq!((r.vertices, r.edges, r.faces, r.euler), (2, 3, Some(3), Some(2)));
        assert!(!m.validate(4).regular);
        let faces = m.faces().unwrap();
        assert!(faces.iter().all(|f| f.len() == 2));
    }

    #[test]
    fn odd_cycle_is_not_bipartite() {
        let r = triangle().validate(2);
        assert!(!r.bipartite);
        assert_eq!(r.euler, Some(2));
    }

    #[test]
    fn twin_must_be_involution() {
        let vertices = vec![MapVertex { color: Color::Black, rot: vec![0, 1] }];
        let half_edges = vec![HalfEdge { vertex: 0, twin: Some(1) }, HalfEdge { vertex: 0, twin: None }];
        assert!(PlanarMap::new(2, vertices, half_edges, Corner { vertex: 0, pos: 0 }, None).is_err());
    }

    #[test]
    fn balls_of_triple_edge() {
        let m = triple_edge();
        let b0 = m.ball(0).unwrap();
        assert_eq!(b0.ball.vertex_count(), 1);
        assert_eq!(b0.ball.edge_count(), 0);
        let b1 = m.ball(1).unwrap();
        assert_eq!(b1.ball.canonical_code(), m.canonical_code());
        assert!(b1.is_valid(3));
        assert_eq!(m.local_distance(&m).unwrap(), Ratio::from_integer(0));
    }

    #[test]
    fn faces_need_complete_map() {
        let b0 = triple_edge().ball(0).unwrap();
        assert!(matches!(b0.ball.faces(), Err(Error::PartialMap(_))));
    }

    #[test]
    fn walk_on_triple_edge_alternates() {
        let m = triple_edge();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = simple_random_walk(&m, 101, &mut rng);
        assert_eq!(s.returns_to_root, 50);
        assert_eq!(s.max_distance, 1);
        assert!(!s.truncated);
        let mut rng2 = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(simple_random_walk(&m, 101, &mut rng2), s);
    }

    #[test]
    fn json_export() {
        let m = triple_edge();
        let j = m.to_json();
        assert_eq!(j.vertices.len(), 2);
        assert_eq!(j.twins.len(), 3);
        assert_eq!(j.vertices.iter().map(|v| v.rot.len()).sum::<usize>(), 6);
        let bytes = export(&m, "json").unwrap();
        let back: MapJson = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(PlanarMap::from_json(&back).unwrap(), m);
        assert!(matches!(export(&m, "svg"), Err(Error::UnknownFormat(_))));
    }

    #[test]
    fn dot_export_shape() {
        let dot = String::from_utf8(export(&triple_edge(), "dot").unwrap()).unwrap();
        assert!(dot.starts_with("graph map {"));
        assert!(dot.trim_end().ends_with('}'));
        assert_eq!(dot.matches(" -- ").count(), 3);
    }
}
