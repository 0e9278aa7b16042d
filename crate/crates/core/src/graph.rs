//! Defining graphs of right-angled Coxeter groups.
//!
//! A defining graph is a finite simplicial graph: vertices are the Coxeter
//! generators and edges are the commuting relations. Adjacency is stored as
//! one bitmask row per vertex, which caps the vertex count at 64; everything
//! in this crate works at desk scale far below that.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported vertex count (adjacency rows are `u64` bitmasks).
pub const MAX_VERTICES: usize = 64;

/// Index of a generator into the vertex list of its defining graph.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct GeneratorId(pub usize);

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// A finite simplicial graph with named vertices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DefiningGraph {
    names: Vec<String>,
    adj: Vec<u64>,
}

/// On-disk format: `{"vertices": ["a","b"], "edges": [["a","b"]]}`.
#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

impl DefiningGraph {
    pub fn new<S: Into<String>>(vertices: Vec<S>, edges: &[(usize, usize)]) -> Result<Self> {
        let names: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if names.len() > MAX_VERTICES {
            return Err(Error::InvalidGraph(format!(
                "at most {MAX_VERTICES} vertices supported, got {}",
                names.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidGraph(format!("duplicate vertex name `{n}`")));
            }
        }
        let mut adj = vec![0u64; names.len()];
        for &(u, v) in edges {
            if u >= names.len() || v >= names.len() {
                return Err(Error::InvalidGraph(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!(
                    "self-edge at `{}` is not simplicial",
                    names[u]
                )));
            }
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        Ok(DefiningGraph { names, adj })
    }

    /// Convenience constructor used throughout the tests.
    pub fn from_names(vertices: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let names: Vec<String> = vertices.iter().map(|s| s.to_string()).collect();
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            let ui = names
                .iter()
                .position(|n| n == u)
                .ok_or_else(|| Error::UnknownGenerator(u.to_string()))?;
            let vi = names
                .iter()
                .position(|n| n == v)
                .ok_or_else(|| Error::UnknownGenerator(v.to_string()))?;
            idx_edges.push((ui, vi));
        }
        Self::new(names, &idx_edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = GeneratorId> {
        (0..self.names.len()).map(GeneratorId)
    }

    pub fn name(&self, g: GeneratorId) -> &str {
        &self.names[g.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Result<GeneratorId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(GeneratorId)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn contains(&self, g: GeneratorId) -> bool {
        g.0 < self.names.len()
    }

    fn check(&self, g: GeneratorId) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::UnknownGenerator(format!("{g}")))
        }
    }

    pub fn adjacent(&self, a: GeneratorId, b: GeneratorId) -> bool {
        a.0 < self.adj.len() && b.0 < self.adj.len() && self.adj[a.0] & (1 << b.0) != 0
    }

    pub fn edge_pairs(&self) -> Vec<(GeneratorId, GeneratorId)> {
        let mut out = Vec::new();
        for u in 0..self.names.len() {
            for v in u + 1..self.names.len() {
                if self.adj[u] & (1 << v) != 0 {
                    out.push((GeneratorId(u), GeneratorId(v)));
                }
            }
        }
        out
    }

    /// Neighbors of `s` as a bitmask.
    pub fn link_mask(&self, s: GeneratorId) -> u64 {
        self.adj[s.0]
    }

    pub fn star_mask(&self, s: GeneratorId) -> u64 {
        self.adj[s.0] | (1 << s.0)
    }

    fn full_mask(&self) -> u64 {
        if self.names.is_empty() {
            0
        } else {
            u64::MAX >> (64 - self.names.len())
        }
    }

    pub fn link(&self, s: GeneratorId) -> Result<Vec<GeneratorId>> {
        self.check(s)?;
        Ok(mask_to_vec(self.link_mask(s)))
    }

    pub fn star(&self, s: GeneratorId) -> Result<Vec<GeneratorId>> {
        self.check(s)?;
        Ok(mask_to_vec(self.star_mask(s)))
    }

    pub fn degree(&self, s: GeneratorId) -> usize {
        self.adj[s.0].count_ones() as usize
    }

    /// A vertex whose star is the whole vertex set.
    pub fn dominating_vertices(&self) -> Vec<GeneratorId> {
        let full = self.full_mask();
        (0..self.names.len())
            .filter(|&i| self.star_mask(GeneratorId(i)) == full)
            .map(GeneratorId)
            .collect()
    }

    pub fn is_triangle_free(&self) -> bool {
        for u in 0..self.names.len() {
            for v in u + 1..self.names.len() {
                if self.adj[u] & (1 << v) != 0 && self.adj[u] & self.adj[v] != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Every nonempty clique, each exactly once, ordered by size then
    /// lexicographically by vertex indices.
    pub fn enumerate_cliques(&self) -> Vec<Vec<GeneratorId>> {
        let mut out: Vec<Vec<GeneratorId>> = Vec::new();
        let mut stack: Vec<(Vec<usize>, u64)> = vec![(Vec::new(), self.full_mask())];
        while let Some((clique, cand)) = stack.pop() {
            let mut rest = cand;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let mut next = clique.clone();
                next.push(v);
                let next_cand = cand & self.adj[v] & !((1u64 << (v + 1)).wrapping_sub(1));
                out.push(next.iter().map(|&i| GeneratorId(i)).collect());
                stack.push((next, next_cand));
            }
        }
        out.sort_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
        out
    }

    /// Maximal cliques of the subgraph induced by `mask`, as bitmasks.
    pub fn maximal_cliques_within(&self, mask: u64) -> Vec<u64> {
        let mut out = Vec::new();
        self.bron_kerbosch(0, mask, 0, &mut out);
        out.sort();
        out
    }

    fn bron_kerbosch(&self, r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
        if p == 0 && x == 0 {
            if r != 0 {
                out.push(r);
            }
            return;
        }
        while p != 0 {
            let v = p.trailing_zeros() as usize;
            let bit = 1u64 << v;
            self.bron_kerbosch(r | bit, p & self.adj[v], x & self.adj[v], out);
            p &= !bit;
            x |= bit;
        }
    }

    /// Splits `V = A ⊔ B` with every `A`–`B` pair adjacent, when possible.
    /// Computed as a connected-component split of the complement graph.
    pub fn join_decomposition(&self) -> Option<(Vec<GeneratorId>, Vec<GeneratorId>)> {
        let comps = self.complement_components();
        if comps.len() < 2 {
            return None;
        }
        let a = comps[0];
        let b: u64 = comps[1..].iter().fold(0, |acc, c| acc | c);
        Some((mask_to_vec(a), mask_to_vec(b)))
    }

    /// Connected components of the complement graph, as bitmasks ordered by
    /// smallest member.
    pub fn complement_components(&self) -> Vec<u64> {
        let full = self.full_mask();
        let mut seen = 0u64;
        let mut comps = Vec::new();
        for i in 0..self.names.len() {
            if seen & (1 << i) != 0 {
                continue;
            }
            let mut comp = 1u64 << i;
            let mut frontier = comp;
            while frontier != 0 {
                let mut next = 0u64;
                let mut f = frontier;
                while f != 0 {
                    let v = f.trailing_zeros() as usize;
                    f &= f - 1;
                    let nonadj = full & !self.adj[v] & !(1 << v);
                    next |= nonadj & !comp;
                }
                comp |= next;
                frontier = next;
            }
            seen |= comp;
            comps.push(comp);
        }
        comps
    }

    /// Witness `(s, t)` with `V = star(s) ∪ {t}` (possibly `s = t`), if any.
    /// A dominating vertex is preferred as witness when one exists.
    pub fn almost_star_witness(&self) -> Option<(GeneratorId, GeneratorId)> {
        if let Some(&s) = self.dominating_vertices().first() {
            return Some((s, s));
        }
        let full = self.full_mask();
        for i in 0..self.names.len() {
            let s = GeneratorId(i);
            let missing = full & !self.star_mask(s);
            if missing.count_ones() == 1 {
                let t = GeneratorId(missing.trailing_zeros() as usize);
                return Some((s, t));
            }
        }
        None
    }

    pub fn is_almost_star(&self) -> bool {
        self.almost_star_witness().is_some()
    }

    /// The double `D(Γ, s)`: two copies of `Γ ∖ {s}` glued along the subgraph
    /// induced by `link(s)`. Shared vertices keep their name; second-copy
    /// vertices get a prime suffix.
    pub fn double(&self, s: GeneratorId) -> Result<DefiningGraph> {
        self.check(s)?;
        let link = self.link_mask(s);
        let mut names = Vec::new();
        let mut index_copy1 = vec![usize::MAX; self.names.len()];
        let mut index_copy2 = vec![usize::MAX; self.names.len()];
        #[allow(clippy::needless_range_loop)]
        for i in 0..self.names.len() {
            if i == s.0 {
                continue;
            }
            index_copy1[i] = names.len();
            names.push(self.names[i].clone());
        }
        for i in 0..self.names.len() {
            if i == s.0 {
                continue;
            }
            if link & (1 << i) != 0 {
                index_copy2[i] = index_copy1[i];
            } else {
                index_copy2[i] = names.len();
                names.push(format!("{}'", self.names[i]));
            }
        }
        let mut edges = Vec::new();
        for u in 0..self.names.len() {
            for v in u + 1..self.names.len() {
                if u == s.0 || v == s.0 || self.adj[u] & (1 << v) == 0 {
                    continue;
                }
                edges.push((index_copy1[u], index_copy1[v]));
                let e2 = (index_copy2[u], index_copy2[v]);
                if e2 != (index_copy1[u], index_copy1[v]) {
                    edges.push(e2);
                }
            }
        }
        DefiningGraph::new(names, &edges)
    }

    /// Induced subgraph on the given vertices (names preserved).
    pub fn induced(&self, verts: &[GeneratorId]) -> Result<DefiningGraph> {
        for &v in verts {
            self.check(v)?;
        }
        let names: Vec<String> = verts.iter().map(|&v| self.names[v.0].clone()).collect();
        let mut edges = Vec::new();
        for (i, &u) in verts.iter().enumerate() {
            for (j, &v) in verts.iter().enumerate().skip(i + 1) {
                if self.adjacent(u, v) {
                    edges.push((i, j));
                }
            }
        }
        DefiningGraph::new(names, &edges)
    }

    /// Label-forgetting graph isomorphism onto `other`, as a vertex map
    /// (`map[i]` = image of vertex `i`). Backtracking with degree pruning;
    /// the graphs here are small.
    pub fn isomorphism(&self, other: &DefiningGraph) -> Option<Vec<usize>> {
        let n = self.names.len();
        if n != other.names.len() {
            return None;
        }
        let deg_a: Vec<usize> = (0..n).map(|i| self.adj[i].count_ones() as usize).collect();
        let deg_b: Vec<usize> = (0..n).map(|i| other.adj[i].count_ones() as usize).collect();
        {
            let mut sa = deg_a.clone();
            let mut sb = deg_b.clone();
            sa.sort_unstable();
            sb.sort_unstable();
            if sa != sb {
                return None;
            }
        }
        // Most-constrained-first ordering: descending degree.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(deg_a[i]));
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        #[allow(clippy::too_many_arguments)]
        fn go(
            pos: usize,
            order: &[usize],
            a: &DefiningGraph,
            b: &DefiningGraph,
            deg_a: &[usize],
            deg_b: &[usize],
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            if pos == order.len() {
                return true;
            }
            let u = order[pos];
            'cand: for v in 0..order.len() {
                if used[v] || deg_a[u] != deg_b[v] {
                    continue;
                }
                for &w in order[..pos].iter() {
                    let adj_a = a.adj[u] & (1 << w) != 0;
                    let adj_b = b.adj[v] & (1 << map[w]) != 0;
                    if adj_a != adj_b {
                        continue 'cand;
                    }
                }
                map[u] = v;
                used[v] = true;
                if go(pos + 1, order, a, b, deg_a, deg_b, map, used) {
                    return true;
                }
                used[v] = false;
                map[u] = usize::MAX;
            }
            false
        }
        if go(0, &order, self, other, &deg_a, &deg_b, &mut map, &mut used) {
            Some(map)
        } else {
            None
        }
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            vertices: self.names.clone(),
            edges: self
                .edge_pairs()
                .into_iter()
                .map(|(u, v)| (self.names[u.0].clone(), self.names[v.0].clone()))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
    }

    /// Parses the JSON graph format. Edges are unordered and deduplicated;
    /// self-edges are rejected.
    pub fn from_json(data: &str) -> Result<DefiningGraph> {
        let file: GraphFile =
            serde_json::from_str(data).map_err(|e| Error::InvalidGraph(e.to_string()))?;
        let names = file.vertices;
        let mut edges = Vec::new();
        for (u, v) in &file.edges {
            let ui = names
                .iter()
                .position(|n| n == u)
                .ok_or_else(|| Error::UnknownGenerator(u.clone()))?;
            let vi = names
                .iter()
                .position(|n| n == v)
                .ok_or_else(|| Error::UnknownGenerator(v.clone()))?;
            edges.push((ui, vi));
        }
        DefiningGraph::new(names, &edges)
    }
}

pub fn mask_to_vec(mask: u64) -> Vec<GeneratorId> {
    let mut out = Vec::new();
    let mut m = mask;
    while m != 0 {
        out.push(GeneratorId(m.trailing_zeros() as usize));
        m &= m - 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> DefiningGraph {
        DefiningGraph::from_names(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    fn cycle4() -> DefiningGraph {
        DefiningGraph::from_names(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        )
        .unwrap()
    }

    fn cycle5() -> DefiningGraph {
        DefiningGraph::from_names(
            &["a", "b", "c", "d", "e"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a")],
        )
        .unwrap()
    }

    #[test]
    fn triangle_free() {
        assert!(path3().is_triangle_free());
        assert!(cycle4().is_triangle_free());
        let tri =
            DefiningGraph::from_names(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")])
                .unwrap();
        assert!(!tri.is_triangle_free());
    }

    #[test]
    fn rejects_self_edge_and_duplicates() {
        assert!(DefiningGraph::from_names(&["a"], &[("a", "a")]).is_err());
        assert!(DefiningGraph::new(vec!["a", "a"], &[]).is_err());
    }

    #[test]
    fn cliques_of_path() {
        let g = path3();
        let cliques = g.enumerate_cliques();
        let named: Vec<Vec<&str>> = cliques
            .iter()
            .map(|c| c.iter().map(|&v| g.name(v)).collect())
            .collect();
        assert_eq!(
            named,
            vec![
                vec!["a"],
                vec!["b"],
                vec!["c"],
                vec!["a", "b"],
                vec!["b", "c"]
            ]
        );
    }

    #[test]
    fn cliques_edgeless_and_triangle() {
        let g = DefiningGraph::from_names(&["a", "b"], &[]).unwrap();
        assert_eq!(g.enumerate_cliques().len(), 2);
        let tri =
            DefiningGraph::from_names(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")])
                .unwrap();
        assert_eq!(tri.enumerate_cliques().len(), 7);
    }

    #[test]
    fn link_and_star() {
        let g = path3();
        let b = g.lookup("b").unwrap();
        let a = g.lookup("a").unwrap();
        assert_eq!(g.link(b).unwrap(), vec![GeneratorId(0), GeneratorId(2)]);
        assert_eq!(g.star(a).unwrap(), vec![GeneratorId(0), GeneratorId(1)]);
        let iso = DefiningGraph::from_names(&["v"], &[]).unwrap();
        assert_eq!(iso.link(GeneratorId(0)).unwrap(), vec![]);
        assert!(g.link(GeneratorId(9)).is_err());
    }

    #[test]
    fn join_decompositions() {
        let (a, b) = cycle4().join_decomposition().unwrap();
        assert_eq!(a, vec![GeneratorId(0), GeneratorId(2)]);
        assert_eq!(b, vec![GeneratorId(1), GeneratorId(3)]);
        // a path of length two is the join of its center with its ends
        let (a, b) = path3().join_decomposition().unwrap();
        assert_eq!(
            (a, b),
            (vec![GeneratorId(0), GeneratorId(2)], vec![GeneratorId(1)])
        );
        assert!(cycle5().join_decomposition().is_none());
        let edge = DefiningGraph::from_names(&["a", "b"], &[("a", "b")]).unwrap();
        let (a, b) = edge.join_decomposition().unwrap();
        assert_eq!((a, b), (vec![GeneratorId(0)], vec![GeneratorId(1)]));
    }

    #[test]
    fn join_absent_iff_complement_connected() {
        for g in [path3(), cycle4(), cycle5()] {
            let comps = g.complement_components();
            assert_eq!(g.join_decomposition().is_none(), comps.len() == 1);
        }
    }

    #[test]
    fn almost_star_witnesses() {
        let g = path3();
        assert_eq!(
            g.almost_star_witness(),
            Some((GeneratorId(1), GeneratorId(1)))
        );
        assert!(cycle5().almost_star_witness().is_none());
        let p4 =
            DefiningGraph::from_names(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")])
                .unwrap();
        assert_eq!(
            p4.almost_star_witness(),
            Some((GeneratorId(1), GeneratorId(3)))
        );
    }

    #[test]
    fn double_of_path_at_center() {
        let g = path3();
        let d = g.double(g.lookup("b").unwrap()).unwrap();
        assert_eq!(d.vertex_count(), 2);
        assert!(d.edge_pairs().is_empty());
    }

    #[test]
    fn double_of_cycle4() {
        let g = cycle4();
        let d = g.double(g.lookup("a").unwrap()).unwrap();
        assert_eq!(d.vertex_count(), 4);
        assert_eq!(d.edge_pairs().len(), 4);
        assert!(d.isomorphism(&cycle4()).is_some());
    }

    #[test]
    fn double_of_single_vertex() {
        let g = DefiningGraph::from_names(&["s"], &[]).unwrap();
        let d = g.double(GeneratorId(0)).unwrap();
        assert_eq!(d.vertex_count(), 0);
    }

    #[test]
    fn double_vertex_count_formula() {
        for g in [path3(), cycle4(), cycle5()] {
            for s in g.vertices() {
                let d = g.double(s).unwrap();
                let link = g.link(s).unwrap().len();
                assert_eq!(d.vertex_count(), 2 * g.vertex_count() - 2 - link);
            }
        }
    }

    #[test]
    fn isomorphism_basic() {
        let g = path3();
        let h = DefiningGraph::from_names(&["x", "y", "z"], &[("x", "y"), ("y", "z")]).unwrap();
        let map = g.isomorphism(&h).unwrap();
        // b is the middle vertex in both.
        assert_eq!(map[1], 1);
        let tri =
            DefiningGraph::from_names(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")])
                .unwrap();
        assert!(g.isomorphism(&tri).is_none());
    }

    #[test]
    fn isomorphism_is_equivalence_on_fixtures() {
        let graphs = [path3(), cycle4(), cycle5()];
        for g in &graphs {
            assert!(g.isomorphism(g).is_some());
        }
        let g = cycle4();
        let h = DefiningGraph::from_names(
            &["p", "q", "r", "s"],
            &[("p", "q"), ("q", "r"), ("r", "s"), ("s", "p")],
        )
        .unwrap();
        let fwd = g.isomorphism(&h).unwrap();
        let bwd = h.isomorphism(&g).unwrap();
        for i in 0..4 {
            assert_eq!(bwd[fwd[i]], i);
        }
    }

    #[test]
    fn star_link_relation() {
        for g in [path3(), cycle4(), cycle5()] {
            for s in g.vertices() {
                let link = g.link(s).unwrap();
                let star = g.star(s).unwrap();
                assert!(!link.contains(&s));
                assert!(star.contains(&s));
                assert_eq!(star.len(), link.len() + 1);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let g = cycle4();
        let h = DefiningGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, h);
        assert!(DefiningGraph::from_json(r#"{"vertices":["a"],"edges":[["a","a"]]}"#).is_err());
        // duplicate edges collapse
        let h = DefiningGraph::from_json(r#"{"vertices":["a","b"],"edges":[["a","b"],["b","a"]]}"#)
            .unwrap();
        assert_eq!(h.edge_pairs().len(), 1);
    }
}
