//! Labeled cube complexes and the three elementary operations: fold, cube
//! identification and cube attachment.
//!
//! All quotients run through union-find over vertex and edge slots, with the
//! smallest slot id as canonical representative; cubes store raw ids and are
//! canonicalized lazily. Ids handed out by the complex stay valid across
//! quotients — `canonical_vertex`/`canonical_edge` map them to the surviving
//! representative.
//!
//! Two labeling invariants hold throughout: the axis labels of every cube
//! are pairwise distinct and pairwise adjacent in the defining graph, and
//! every edge of a cube carries the label of its axis. `validate` checks
//! both.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{mask_to_vec, DefiningGraph, GeneratorId};
use crate::util::UnionFind;
use crate::word::Word;

#[derive(Clone, Debug)]
struct EdgeSlot {
    a: usize,
    b: usize,
    label: GeneratorId,
    origin: bool,
}

/// A cube of dimension `labels.len() ≥ 2`. Corners are indexed by bitmasks
/// of axis bits; `edges[edge_index(dim, c, k)]` is the cube edge from corner
/// `c` (axis bit `k` clear) to corner `c | 1 << k`.
#[derive(Clone, Debug)]
struct Cube {
    corners: Vec<usize>,
    edges: Vec<usize>,
    labels: Vec<GeneratorId>,
}

impl Cube {
    fn dim(&self) -> usize {
        self.labels.len()
    }
}

fn edge_index(dim: usize, corner: usize, axis: usize) -> usize {
    let low = corner & ((1 << axis) - 1);
    let high = (corner >> (axis + 1)) << axis;
    axis * (1 << (dim - 1)) + (low | high)
}

/// A simplicial path: a start vertex and a sequence of edge traversals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathInComplex {
    pub start: usize,
    pub steps: Vec<(usize, bool)>,
}

/// A maximal class of parallel edges (midcube-connected), single-labeled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperplane {
    pub edges: Vec<usize>,
    pub label: GeneratorId,
}

/// An edge-labeled cube complex over a fixed defining graph.
#[derive(Clone, Debug)]
pub struct CubeComplex {
    graph: DefiningGraph,
    vuf: UnionFind,
    euf: UnionFind,
    edges: Vec<EdgeSlot>,
    cubes: Vec<Option<Cube>>,
    incidence: Vec<Vec<usize>>,
    basepoint: usize,
}

impl CubeComplex {
    /// A single basepoint vertex and nothing else.
    pub fn new(graph: DefiningGraph) -> Self {
        let mut c = CubeComplex {
            graph,
            vuf: UnionFind::new(),
            euf: UnionFind::new(),
            edges: Vec::new(),
            cubes: Vec::new(),
            incidence: Vec::new(),
            basepoint: 0,
        };
        c.add_vertex();
        c
    }

    /// The subdivided rose on a generating set: one loop per word, edges
    /// labeled by its letters, all origin-marked. Empty words are skipped.
    pub fn rose(graph: DefiningGraph, words: &[Word]) -> Result<Self> {
        let mut c = CubeComplex::new(graph);
        let b = c.basepoint;
        for w in words {
            if w.is_empty() {
                continue;
            }
            let mut prev = b;
            for (i, &s) in w.letters().iter().enumerate() {
                let next = if i + 1 == w.len() { b } else { c.add_vertex() };
                c.add_edge(prev, next, s, true)?;
                prev = next;
            }
        }
        Ok(c)
    }

    /// A path from the basepoint labeled by `w`, all edges origin-marked.
    pub fn path_complex(graph: DefiningGraph, w: &Word) -> Result<Self> {
        let mut c = CubeComplex::new(graph);
        let mut prev = c.basepoint;
        for &s in w.letters() {
            let next = c.add_vertex();
            c.add_edge(prev, next, s, true)?;
            prev = next;
        }
        Ok(c)
    }

    pub fn graph(&self) -> &DefiningGraph {
        &self.graph
    }

    pub fn basepoint(&self) -> usize {
        self.vuf.find(self.basepoint)
    }

    pub fn set_basepoint(&mut self, v: usize) -> Result<()> {
        if v >= self.vuf.len() {
            return Err(Error::InvalidOperation(format!("no vertex {v}")));
        }
        self.basepoint = self.vuf.find(v);
        Ok(())
    }

    pub fn add_vertex(&mut self) -> usize {
        self.incidence.push(Vec::new());
        self.vuf.push()
    }

    pub fn add_edge(
        &mut self,
        a: usize,
        b: usize,
        label: GeneratorId,
        origin: bool,
    ) -> Result<usize> {
        if a >= self.vuf.len() || b >= self.vuf.len() {
            return Err(Error::InvalidOperation("edge endpoint out of range".into()));
        }
        if !self.graph.contains(label) {
            return Err(Error::UnknownGenerator(format!("{label}")));
        }
        let a = self.vuf.find(a);
        let b = self.vuf.find(b);
        let id = self.euf.push();
        self.edges.push(EdgeSlot {
            a,
            b,
            label,
            origin,
        });
        self.incidence[a].push(id);
        if b != a {
            self.incidence[b].push(id);
        }
        Ok(id)
    }

    pub fn canonical_vertex(&self, v: usize) -> usize {
        self.vuf.find(v)
    }

    pub fn canonical_edge(&self, e: usize) -> usize {
        self.euf.find(e)
    }

    /// Canonical endpoints of an edge (unordered as stored).
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        let slot = &self.edges[self.euf.find(e)];
        (self.vuf.find(slot.a), self.vuf.find(slot.b))
    }

    pub fn edge_label(&self, e: usize) -> GeneratorId {
        self.edges[self.euf.find(e)].label
    }

    pub fn edge_is_origin(&self, e: usize) -> bool {
        self.edges[self.euf.find(e)].origin
    }

    pub fn is_graph_loop(&self, e: usize) -> bool {
        let (a, b) = self.edge_endpoints(e);
        a == b
    }

    pub fn vertex_ids(&self) -> Vec<usize> {
        self.vuf.roots().collect()
    }

    pub fn edge_ids(&self) -> Vec<usize> {
        self.euf.roots().collect()
    }

    pub fn cube_ids(&self) -> Vec<usize> {
        (0..self.cubes.len())
            .filter(|&i| self.cubes[i].is_some())
            .collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.vuf.roots().count()
    }

    pub fn edge_count(&self) -> usize {
        self.euf.roots().count()
    }

    pub fn cube_count(&self) -> usize {
        self.cubes.iter().filter(|c| c.is_some()).count()
    }

    pub fn cell_count(&self) -> usize {
        self.vertex_count() + self.edge_count() + self.cube_count()
    }

    /// Canonical ids of the distinct edges at `v`, sorted ascending.
    pub fn edges_at(&self, v: usize) -> Vec<usize> {
        let r = self.vuf.find(v);
        let mut out: Vec<usize> = self.incidence[r]
            .iter()
            .map(|&e| self.euf.find(e))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The labels present at `v`, as a bitmask.
    pub fn labels_at(&self, v: usize) -> u64 {
        let mut mask = 0u64;
        for e in self.edges_at(v) {
            mask |= 1 << self.edges[e].label.0;
        }
        mask
    }

    /// The unique edge with label `s` at `v` in a folded complex (smallest
    /// canonical id if the complex is not folded).
    pub fn edge_with_label_at(&self, v: usize, s: GeneratorId) -> Option<usize> {
        self.edges_at(v)
            .into_iter()
            .find(|&e| self.edges[e].label == s)
    }

    pub fn other_endpoint(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edge_endpoints(e);
        let v = self.vuf.find(v);
        if a == v {
            b
        } else {
            a
        }
    }

    /// Collapses two distinct same-label edges sharing an endpoint into one,
    /// identifying their far endpoints. The orientation is chosen from the
    /// smallest shared vertex.
    pub fn fold(&mut self, e1: usize, e2: usize) -> Result<()> {
        let r1 = self.euf.find(e1);
        let r2 = self.euf.find(e2);
        if r1 == r2 {
            return Err(Error::InvalidOperation(
                "fold needs two distinct edges".into(),
            ));
        }
        if self.edges[r1].label != self.edges[r2].label {
            return Err(Error::InvalidOperation("fold needs equal labels".into()));
        }
        let (a1, b1) = self.edge_endpoints(r1);
        let (a2, b2) = self.edge_endpoints(r2);
        let shared: Vec<usize> = [a1, b1]
            .iter()
            .copied()
            .filter(|v| *v == a2 || *v == b2)
            .collect();
        let v = *shared
            .iter()
            .min()
            .ok_or_else(|| Error::InvalidOperation("fold needs a shared endpoint".into()))?;
        self.raw_fold(r1, r2, v);
        self.normalize_cells();
        Ok(())
    }

    /// Fold without validation or normalization; used by the engine loops.
    /// Returns the canonical vertex the far endpoints merged into.
    pub(crate) fn raw_fold(&mut self, e1: usize, e2: usize, at: usize) -> usize {
        let r1 = self.euf.find(e1);
        let r2 = self.euf.find(e2);
        debug_assert_ne!(r1, r2);
        let v = self.vuf.find(at);
        let far1 = self.far_endpoint(r1, v);
        let far2 = self.far_endpoint(r2, v);
        let keep_v = self.unite_vertices(far1, far2);
        let keep_e = self.euf.union(r1, r2);
        let lose_e = if keep_e == r1 { r2 } else { r1 };
        let origin = self.edges[r1].origin || self.edges[r2].origin;
        self.edges[keep_e].origin = origin;
        let _ = lose_e;
        keep_v
    }

    fn far_endpoint(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edge_endpoints(e);
        if a == v {
            b
        } else if b == v {
            a
        } else {
            // not incident; callers guarantee incidence
            debug_assert!(false, "edge {e} not incident to {v}");
            a
        }
    }

    fn unite_vertices(&mut self, a: usize, b: usize) -> usize {
        let ra = self.vuf.find(a);
        let rb = self.vuf.find(b);
        if ra == rb {
            return ra;
        }
        let keep = self.vuf.union(ra, rb);
        let lose = if keep == ra { rb } else { ra };
        let mut moved = std::mem::take(&mut self.incidence[lose]);
        self.incidence[keep].append(&mut moved);
        if self.vuf.find(self.basepoint) == keep {
            self.basepoint = keep;
        }
        keep
    }

    /// Rewrites all stored ids through the union-finds.
    pub(crate) fn normalize_cells(&mut self) {
        self.vuf.flatten();
        self.euf.flatten();
        for slot in self.edges.iter_mut() {
            slot.a = self.vuf.find(slot.a);
            slot.b = self.vuf.find(slot.b);
        }
        for cube in self.cubes.iter_mut().flatten() {
            for c in cube.corners.iter_mut() {
                *c = self.vuf.find(*c);
            }
            for e in cube.edges.iter_mut() {
                *e = self.euf.find(*e);
            }
        }
        self.basepoint = self.vuf.find(self.basepoint);
    }

    /// First foldable pair: smallest vertex, then smallest edge ids.
    pub fn find_fold(&self) -> Option<(usize, usize)> {
        let mut verts = self.vertex_ids();
        verts.sort_unstable();
        for v in verts {
            let mut seen: BTreeMap<GeneratorId, usize> = BTreeMap::new();
            for e in self.edges_at(v) {
                let label = self.edges[e].label;
                if let Some(&first) = seen.get(&label) {
                    return Some((first, e));
                }
                seen.insert(label, e);
            }
        }
        None
    }

    /// Canonical form of a cube up to relabeling of axes (forced by the
    /// pairwise distinct labels) and per-axis reflections.
    fn cube_canonical_form(&self, cube: &Cube) -> Vec<usize> {
        let dim = cube.dim();
        let mut axis_order: Vec<usize> = (0..dim).collect();
        axis_order.sort_by_key(|&k| cube.labels[k]);
        let corners = 1usize << dim;
        let orig_corner = |c: usize| -> usize {
            let mut o = 0;
            for (j, &k) in axis_order.iter().enumerate() {
                if c & (1 << j) != 0 {
                    o |= 1 << k;
                }
            }
            o
        };
        let mut best: Option<Vec<usize>> = None;
        for sigma in 0..corners {
            let mut key = Vec::with_capacity(corners * 2);
            for c in 0..corners {
                key.push(self.vuf.find(cube.corners[orig_corner(c ^ sigma)]));
            }
            for (j, &k) in axis_order.iter().enumerate() {
                for c in 0..corners {
                    if c & (1 << j) != 0 {
                        continue;
                    }
                    let o1 = orig_corner(c ^ sigma);
                    let slot_corner = o1 & !(1 << k);
                    key.push(self.euf.find(cube.edges[edge_index(dim, slot_corner, k)]));
                }
            }
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        let mut form = Vec::with_capacity(2 + dim + corners * 2);
        form.push(dim);
        for &k in &axis_order {
            form.push(cube.labels[k].0);
        }
        form.extend(best.unwrap());
        form
    }

    /// First pair of distinct cubes with equal boundaries.
    pub fn find_identifiable(&self) -> Option<(usize, usize)> {
        let mut buckets: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for i in 0..self.cubes.len() {
            if let Some(cube) = &self.cubes[i] {
                buckets
                    .entry(self.cube_canonical_form(cube))
                    .or_default()
                    .push(i);
            }
        }
        buckets
            .values()
            .filter(|v| v.len() >= 2)
            .map(|v| (v[0], v[1]))
            .min()
    }

    pub fn is_folded(&self) -> bool {
        self.find_fold().is_none() && self.find_identifiable().is_none()
    }

    /// Merges two cubes whose boundaries are equal (up to per-axis
    /// reflections); the smaller id survives. The 1-skeleton is unchanged.
    pub fn identify_cubes(&mut self, c1: usize, c2: usize) -> Result<()> {
        if c1 == c2 {
            return Err(Error::InvalidOperation(
                "cube identified with itself".into(),
            ));
        }
        let (f1, f2) = match (&self.cubes.get(c1), &self.cubes.get(c2)) {
            (Some(Some(a)), Some(Some(b))) => {
                (self.cube_canonical_form(a), self.cube_canonical_form(b))
            }
            _ => return Err(Error::InvalidOperation("no such cube".into())),
        };
        if f1 != f2 {
            return Err(Error::InvalidOperation(
                "cube boundaries are not equal".into(),
            ));
        }
        self.cubes[c1.max(c2)] = None;
        Ok(())
    }

    /// Attaches a cube along edges incident to `v` whose labels form a
    /// clique. New vertices and edges fill in the remaining corners; a
    /// graph-loop among the inputs immediately identifies its two corners.
    pub fn attach_cube(&mut self, v: usize, attach_edges: &[usize]) -> Result<usize> {
        let dim = attach_edges.len();
        if dim < 2 {
            return Err(Error::InvalidOperation(
                "cubes have dimension at least 2".into(),
            ));
        }
        let v = self.vuf.find(v);
        let mut pairs: Vec<(GeneratorId, usize)> = Vec::with_capacity(dim);
        for &e in attach_edges {
            let e = self.euf.find(e);
            let (a, b) = self.edge_endpoints(e);
            if a != v && b != v {
                return Err(Error::InvalidOperation(format!(
                    "edge {e} is not at vertex {v}"
                )));
            }
            pairs.push((self.edges[e].label, e));
        }
        pairs.sort();
        for i in 0..dim {
            for j in i + 1..dim {
                if pairs[i].0 == pairs[j].0 {
                    return Err(Error::InvalidOperation(
                        "duplicate labels in attachment".into(),
                    ));
                }
                if !self.graph.adjacent(pairs[i].0, pairs[j].0) {
                    return Err(Error::InvalidOperation(
                        "attachment labels do not form a clique".into(),
                    ));
                }
            }
        }
        let labels: Vec<GeneratorId> = pairs.iter().map(|p| p.0).collect();
        let given: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let corners_n = 1usize << dim;
        let mut corners = vec![usize::MAX; corners_n];
        corners[0] = v;
        for k in 0..dim {
            corners[1 << k] = self.far_endpoint(given[k], v);
        }
        #[allow(clippy::needless_range_loop)] // add_vertex borrows self mutably
        for c in 0..corners_n {
            if corners[c] == usize::MAX {
                corners[c] = self.add_vertex();
            }
        }

        let mut cube_edges = vec![usize::MAX; dim * (1 << (dim - 1))];
        for k in 0..dim {
            for c in 0..corners_n {
                if c & (1 << k) != 0 {
                    continue;
                }
                let idx = edge_index(dim, c, k);
                cube_edges[idx] = if c == 0 {
                    given[k]
                } else {
                    self.add_edge(corners[c], corners[c | (1 << k)], labels[k], false)?
                };
            }
        }
        let id = self.cubes.len();
        self.cubes.push(Some(Cube {
            corners,
            edges: cube_edges,
            labels,
        }));
        Ok(id)
    }

    /// All inclusion-maximal clique-labeled edge tuples without a containing
    /// cube, over all vertices, in deterministic order. The complex must be
    /// folded for the per-vertex label map to be unambiguous.
    pub fn missing_tuples(&self) -> Vec<(usize, Vec<usize>)> {
        // (cube, corner) pairs per canonical vertex
        let mut at_corner: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, cube) in self.cubes.iter().enumerate() {
            if let Some(cube) = cube {
                for (c, &vert) in cube.corners.iter().enumerate() {
                    at_corner
                        .entry(self.vuf.find(vert))
                        .or_default()
                        .push((i, c));
                }
            }
        }
        let mut out = Vec::new();
        let mut verts = self.vertex_ids();
        verts.sort_unstable();
        for v in verts {
            let mut label_edge: BTreeMap<GeneratorId, usize> = BTreeMap::new();
            let mut mask = 0u64;
            for e in self.edges_at(v) {
                let l = self.edges[e].label;
                label_edge.entry(l).or_insert(e);
                mask |= 1 << l.0;
            }
            for clique in self.graph.maximal_cliques_within(mask) {
                if clique.count_ones() < 2 {
                    continue;
                }
                let tuple: Vec<usize> = mask_to_vec(clique).iter().map(|s| label_edge[s]).collect();
                let covered = at_corner.get(&v).is_some_and(|pairs| {
                    pairs.iter().any(|&(ci, corner)| {
                        let cube = self.cubes[ci].as_ref().unwrap();
                        let dim = cube.dim();
                        let here: BTreeSet<usize> = (0..dim)
                            .map(|k| {
                                let slot = corner & !(1 << k);
                                self.euf.find(cube.edges[edge_index(dim, slot, k)])
                            })
                            .collect();
                        tuple.iter().all(|e| here.contains(e))
                    })
                });
                if !covered {
                    out.push((v, tuple));
                }
            }
        }
        out
    }

    /// First missing tuple, or `None` when the complex is cube-full.
    /// Requires a folded complex.
    pub fn find_missing_tuple(&self) -> Result<Option<(usize, Vec<usize>)>> {
        if !self.is_folded() {
            return Err(Error::InvalidOperation(
                "cube-fullness is only checked on folded complexes".into(),
            ));
        }
        Ok(self.missing_tuples().into_iter().next())
    }

    pub fn is_full_valence(&self) -> bool {
        let full = (0..self.graph.vertex_count()).fold(0u64, |m, i| m | (1 << i));
        self.vertex_ids()
            .into_iter()
            .all(|v| self.labels_at(v) == full)
    }

    /// Follows `w` letter by letter from `v`; `None` when a letter has no
    /// edge. Traversing a graph-loop stays at the vertex. Deterministic on
    /// folded complexes, where labels at each vertex are unique.
    pub fn trace(&self, v: usize, w: &Word) -> Option<(usize, PathInComplex)> {
        let start = self.vuf.find(v);
        let mut here = start;
        let mut steps = Vec::with_capacity(w.len());
        for &s in w.letters() {
            let e = self.edge_with_label_at(here, s)?;
            let (a, b) = self.edge_endpoints(e);
            let (next, forward) = if a == b {
                (here, true)
            } else if a == here {
                (b, true)
            } else {
                (a, false)
            };
            steps.push((e, forward));
            here = next;
        }
        Some((here, PathInComplex { start, steps }))
    }

    /// Whether `w` labels a loop at `v`.
    pub fn traces_closed(&self, v: usize, w: &Word) -> bool {
        match self.trace(v, w) {
            Some((end, _)) => end == self.vuf.find(v),
            None => false,
        }
    }

    /// Maximal classes of parallel edges: the transitive closure of the
    /// opposite-edge-in-a-cube relation along each axis.
    pub fn hyperplanes(&self) -> Vec<Hyperplane> {
        let mut uf = UnionFind::new();
        for _ in 0..self.edges.len() {
            uf.push();
        }
        for e in 0..self.edges.len() {
            uf.union(e, self.euf.find(e));
        }
        for cube in self.cubes.iter().flatten() {
            let dim = cube.dim();
            for k in 0..dim {
                let mut first = None;
                for c in 0..(1 << dim) {
                    if c & (1 << k) != 0 {
                        continue;
                    }
                    let e = self.euf.find(cube.edges[edge_index(dim, c, k)]);
                    match first {
                        None => first = Some(e),
                        Some(f) => {
                            uf.union(f, e);
                        }
                    }
                }
            }
        }
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in self.edge_ids() {
            classes.entry(uf.find(e)).or_default().push(e);
        }
        classes
            .into_values()
            .map(|edges| {
                let label = self.edges[edges[0]].label;
                debug_assert!(edges.iter().all(|&e| self.edges[e].label == label));
                Hyperplane { edges, label }
            })
            .collect()
    }

    /// Two distinct edges with the same endpoint set and adjacent labels.
    /// Two graph-loops at one vertex with adjacent labels count.
    pub fn has_commuting_bigon(&self) -> bool {
        let mut buckets: BTreeMap<(usize, usize), Vec<GeneratorId>> = BTreeMap::new();
        for e in self.edge_ids() {
            let (a, b) = self.edge_endpoints(e);
            let key = (a.min(b), a.max(b));
            buckets.entry(key).or_default().push(self.edges[e].label);
        }
        for labels in buckets.values() {
            for i in 0..labels.len() {
                for j in i + 1..labels.len() {
                    if self.graph.adjacent(labels[i], labels[j]) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Non-positive curvature check: folded and no commuting bigon. Requires
    /// the complex to be cube-full or the defining graph to be triangle-free.
    pub fn check_npc(&self) -> Result<bool> {
        if self.graph.is_triangle_free() {
            return Ok(self.is_folded() && !self.has_commuting_bigon());
        }
        if !self.is_folded() {
            return Err(Error::Hypothesis(
                "npc check needs a cube-full complex or a triangle-free graph".into(),
            ));
        }
        if self.find_missing_tuple()?.is_some() {
            return Err(Error::Hypothesis(
                "npc check needs a cube-full complex or a triangle-free graph".into(),
            ));
        }
        Ok(!self.has_commuting_bigon())
    }

    fn bfs_from(&self, v: usize) -> BTreeMap<usize, usize> {
        let mut dist = BTreeMap::new();
        let start = self.vuf.find(v);
        dist.insert(start, 0usize);
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for e in self.edges_at(u) {
                let w = self.other_endpoint(e, u);
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn bfs_distance(&self, u: usize, v: usize) -> Result<usize> {
        let v = self.vuf.find(v);
        self.bfs_from(u)
            .get(&v)
            .copied()
            .ok_or_else(|| Error::InvalidOperation("vertices are not connected".into()))
    }

    pub fn eccentricity_from(&self, v: usize) -> Result<usize> {
        let dist = self.bfs_from(v);
        if dist.len() != self.vertex_count() {
            return Err(Error::InvalidOperation("complex is not connected".into()));
        }
        Ok(dist.values().copied().max().unwrap_or(0))
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_from(self.basepoint).len() == self.vertex_count()
    }

    pub fn diameter(&self) -> Result<usize> {
        let mut best = 0;
        for v in self.vertex_ids() {
            best = best.max(self.eccentricity_from(v)?);
        }
        Ok(best)
    }

    /// BFS geodesic from `u` to `v` as a word, following smallest edge ids.
    pub fn geodesic_label(&self, u: usize, v: usize) -> Result<Word> {
        let start = self.vuf.find(u);
        let goal = self.vuf.find(v);
        let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        seen.insert(start);
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(x) = queue.pop_front() {
            if x == goal {
                break;
            }
            for e in self.edges_at(x) {
                let w = self.other_endpoint(e, x);
                if seen.insert(w) {
                    prev.insert(w, (x, e));
                    queue.push_back(w);
                }
            }
        }
        if !seen.contains(&goal) {
            return Err(Error::InvalidOperation("vertices are not connected".into()));
        }
        let mut letters = Vec::new();
        let mut here = goal;
        while here != start {
            let (p, e) = prev[&here];
            letters.push(self.edges[self.euf.find(e)].label);
            here = p;
        }
        letters.reverse();
        Ok(Word(letters))
    }

    /// Whether the 1-skeleton is a tree (connected, no loops, |E| = |V|-1).
    pub fn is_tree(&self) -> bool {
        self.cube_count() == 0
            && self.is_connected()
            && self.edge_ids().iter().all(|&e| !self.is_graph_loop(e))
            && self.edge_count() + 1 == self.vertex_count()
    }

    /// Labels of the fundamental cycles of a BFS spanning tree, rooted at
    /// the basepoint: one loop per non-tree edge (graph-loops included).
    pub fn cycle_basis_labels(&self) -> Result<Vec<Word>> {
        if !self.is_connected() {
            return Err(Error::InvalidOperation("complex is not connected".into()));
        }
        let root = self.basepoint();
        let mut tree_edges: BTreeSet<usize> = BTreeSet::new();
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        seen.insert(root);
        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            for e in self.edges_at(x) {
                let w = self.other_endpoint(e, x);
                if seen.insert(w) {
                    tree_edges.insert(e);
                    queue.push_back(w);
                }
            }
        }
        let mut labels = Vec::new();
        for e in self.edge_ids() {
            if tree_edges.contains(&e) {
                continue;
            }
            let (a, b) = self.edge_endpoints(e);
            let mut w = self.geodesic_label(root, a)?;
            w.0.push(self.edges[e].label);
            w = w.concat(&self.geodesic_label(b, root)?);
            labels.push(w);
        }
        Ok(labels)
    }

    /// Checks the labeling invariants and internal consistency.
    pub fn validate(&self) -> Result<()> {
        for e in self.edge_ids() {
            let slot = &self.edges[e];
            if !self.graph.contains(slot.label) {
                return Err(Error::InvalidGraph(format!("edge {e} label out of range")));
            }
            if slot.a >= self.vuf.len() || slot.b >= self.vuf.len() {
                return Err(Error::InvalidOperation(format!(
                    "edge {e} endpoint missing"
                )));
            }
        }
        for (i, cube) in self.cubes.iter().enumerate() {
            let Some(cube) = cube else { continue };
            let dim = cube.dim();
            if dim < 2 || cube.corners.len() != 1 << dim {
                return Err(Error::InvalidOperation(format!("cube {i} malformed")));
            }
            for k in 0..dim {
                for k2 in k + 1..dim {
                    if cube.labels[k] == cube.labels[k2]
                        || !self.graph.adjacent(cube.labels[k], cube.labels[k2])
                    {
                        return Err(Error::InvalidOperation(format!(
                            "cube {i} axis labels are not a clique"
                        )));
                    }
                }
            }
            for k in 0..dim {
                for c in 0..(1usize << dim) {
                    if c & (1 << k) != 0 {
                        continue;
                    }
                    let e = self.euf.find(cube.edges[edge_index(dim, c, k)]);
                    let slot = &self.edges[e];
                    if slot.label != cube.labels[k] {
                        return Err(Error::InvalidOperation(format!(
                            "cube {i} edge label mismatch on axis {k}"
                        )));
                    }
                    let u = self.vuf.find(cube.corners[c]);
                    let v = self.vuf.find(cube.corners[c | (1 << k)]);
                    let (a, b) = self.edge_endpoints(e);
                    let mut want = BTreeSet::new();
                    want.insert(u);
                    want.insert(v);
                    let mut got = BTreeSet::new();
                    got.insert(a);
                    got.insert(b);
                    if want != got {
                        return Err(Error::InvalidOperation(format!(
                            "cube {i} edge endpoints do not match its corners"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Compact renumbering of canonical ids: (vertex map, edge map).
    fn renumbering(&self) -> (BTreeMap<usize, usize>, BTreeMap<usize, usize>) {
        let vmap: BTreeMap<usize, usize> = self
            .vertex_ids()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let emap: BTreeMap<usize, usize> = self
            .edge_ids()
            .into_iter()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        (vmap, emap)
    }

    pub fn to_json(&self) -> String {
        let (vmap, emap) = self.renumbering();
        let file = ComplexFile {
            graph_vertices: self.graph.names().to_vec(),
            graph_edges: self
                .graph
                .edge_pairs()
                .into_iter()
                .map(|(u, v)| (self.graph.name(u).into(), self.graph.name(v).into()))
                .collect(),
            vertex_count: vmap.len(),
            basepoint: vmap[&self.basepoint()],
            edges: self
                .edge_ids()
                .into_iter()
                .map(|e| {
                    let (a, b) = self.edge_endpoints(e);
                    EdgeFile {
                        a: vmap[&a],
                        b: vmap[&b],
                        label: self.graph.name(self.edges[e].label).into(),
                        origin: self.edges[e].origin,
                    }
                })
                .collect(),
            cubes: self
                .cube_ids()
                .into_iter()
                .map(|i| {
                    let cube = self.cubes[i].as_ref().unwrap();
                    CubeFile {
                        labels: cube
                            .labels
                            .iter()
                            .map(|&l| self.graph.name(l).into())
                            .collect(),
                        corners: cube
                            .corners
                            .iter()
                            .map(|&c| vmap[&self.vuf.find(c)])
                            .collect(),
                        edges: cube
                            .edges
                            .iter()
                            .map(|&e| emap[&self.euf.find(e)])
                            .collect(),
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("complex serialization cannot fail")
    }

    pub fn from_json(data: &str) -> Result<CubeComplex> {
        let file: ComplexFile =
            serde_json::from_str(data).map_err(|e| Error::InvalidOperation(e.to_string()))?;
        let mut graph_edges = Vec::new();
        for (u, v) in &file.graph_edges {
            graph_edges.push((u.as_str(), v.as_str()));
        }
        let names: Vec<&str> = file.graph_vertices.iter().map(|s| s.as_str()).collect();
        let graph = DefiningGraph::from_names(&names, &graph_edges)?;
        let mut c = CubeComplex::new(graph);
        for _ in 1..file.vertex_count {
            c.add_vertex();
        }
        if file.basepoint >= file.vertex_count {
            return Err(Error::InvalidOperation("basepoint out of range".into()));
        }
        c.basepoint = file.basepoint;
        for e in &file.edges {
            let label = c.graph.lookup(&e.label)?;
            if e.a >= file.vertex_count || e.b >= file.vertex_count {
                return Err(Error::InvalidOperation("edge endpoint out of range".into()));
            }
            c.add_edge(e.a, e.b, label, e.origin)?;
        }
        for cube in &file.cubes {
            let dim = cube.labels.len();
            if dim < 2
                || cube.corners.len() != 1 << dim
                || cube.edges.len() != dim * (1 << (dim - 1))
            {
                return Err(Error::InvalidOperation("malformed cube record".into()));
            }
            let mut labels = Vec::new();
            for l in &cube.labels {
                labels.push(c.graph.lookup(l)?);
            }
            for &v in &cube.corners {
                if v >= file.vertex_count {
                    return Err(Error::InvalidOperation("cube corner out of range".into()));
                }
            }
            for &e in &cube.edges {
                if e >= file.edges.len() {
                    return Err(Error::InvalidOperation("cube edge out of range".into()));
                }
            }
            c.cubes.push(Some(Cube {
                corners: cube.corners.clone(),
                edges: cube.edges.clone(),
                labels,
            }));
        }
        c.validate()?;
        Ok(c)
    }

    /// DOT rendering of the 1-skeleton; the basepoint is highlighted.
    pub fn to_dot(&self) -> String {
        let (vmap, _) = self.renumbering();
        let mut out = String::from("graph complex {\n  node [shape=circle];\n");
        let base = vmap[&self.basepoint()];
        out.push_str(&format!("  v{base} [shape=doublecircle];\n"));
        for v in self.vertex_ids() {
            if vmap[&v] != base {
                out.push_str(&format!("  v{};\n", vmap[&v]));
            }
        }
        for e in self.edge_ids() {
            let (a, b) = self.edge_endpoints(e);
            out.push_str(&format!(
                "  v{} -- v{} [label=\"{}\"];\n",
                vmap[&a],
                vmap[&b],
                self.graph.name(self.edges[e].label)
            ));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexFile {
    graph_vertices: Vec<String>,
    graph_edges: Vec<(String, String)>,
    vertex_count: usize,
    basepoint: usize,
    edges: Vec<EdgeFile>,
    cubes: Vec<CubeFile>,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    a: usize,
    b: usize,
    label: String,
    origin: bool,
}

#[derive(Serialize, Deserialize)]
struct CubeFile {
    labels: Vec<String>,
    corners: Vec<usize>,
    edges: Vec<usize>,
}
