//! Decision procedures read off a completion: membership, quasiconvexity,
//! index, torsion, normality, power membership, core graphs, full-valence
//! extensions and separability.
//!
//! Every verdict either comes from a finished completion (a certificate) or
//! is `Unknown`; a budget-exceeded partial complex never certifies
//! anything.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::complex::CubeComplex;
use crate::engine::{
    complete_with_graph_loops, resolve_generators, standard_complete, Budget, CompletionOutcome,
    CompletionStatus,
};
use crate::error::{Error, Result};
use crate::graph::{DefiningGraph, GeneratorId};
use crate::word::{automaton_step, reduce, AutomatonState, Word};

/// A finitely generated subgroup together with a (possibly partial)
/// completion of it.
#[derive(Clone, Debug)]
pub struct SubgroupHandle {
    graph: DefiningGraph,
    gens: Option<Vec<Word>>,
    outcome: CompletionOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexVerdict {
    Finite {
        index: usize,
        representatives: Vec<Word>,
    },
    Infinite,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QcVerdict {
    Quasiconvex { constant: usize },
    Unknown,
}

/// Outcome of the normality test: `delta` is the set of generators
/// commuting with the whole subgroup, `n1_ok` checks edges at the basepoint
/// for the rest, `n2_ok` checks that every generator word closes up at
/// every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalityReport {
    pub delta: Vec<GeneratorId>,
    pub n1_ok: bool,
    pub n2_ok: bool,
    pub verdict: bool,
}

/// The rooted subgraph of a completion's 1-skeleton swept out by reduced
/// basepoint loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreGraph {
    pub root: usize,
    pub vertices: Vec<usize>,
    /// `(endpoint, endpoint, label)` with endpoints ordered.
    pub edges: Vec<(usize, usize, GeneratorId)>,
}

/// A full-valence extension: the extended complex, the graph-loops that are
/// not images of the original completion, and the index of the associated
/// finite-index overgroup.
#[derive(Clone, Debug)]
pub struct FullValenceExtension {
    pub complex: CubeComplex,
    pub added_loops: Vec<usize>,
    pub overgroup_index: usize,
}

impl SubgroupHandle {
    /// Runs a standard completion of the subgroup generated by `gens`.
    pub fn new(graph: DefiningGraph, gens: Vec<Word>, budget: Budget) -> Result<Self> {
        Self::with_trace(graph, gens, budget, false)
    }

    pub fn with_trace(
        graph: DefiningGraph,
        gens: Vec<Word>,
        budget: Budget,
        want_trace: bool,
    ) -> Result<Self> {
        let rose = CubeComplex::rose(graph.clone(), &gens)?;
        let outcome = standard_complete(rose, budget, want_trace);
        Ok(SubgroupHandle {
            graph,
            gens: Some(gens),
            outcome,
        })
    }

    /// Wraps a folded, cube-full complex as the completion of its associated
    /// subgroup (the elements spelled by basepoint loops).
    pub fn from_complex(complex: CubeComplex) -> Result<Self> {
        if !complex.is_folded() || complex.find_missing_tuple()?.is_some() {
            return Err(Error::InvalidOperation(
                "associated subgroups need a folded, cube-full complex".into(),
            ));
        }
        let graph = complex.graph().clone();
        Ok(SubgroupHandle {
            graph,
            gens: None,
            outcome: CompletionOutcome {
                status: CompletionStatus::Finished,
                complex,
                stats: Default::default(),
                trace: None,
            },
        })
    }

    pub fn graph(&self) -> &DefiningGraph {
        &self.graph
    }

    pub fn generators(&self) -> Option<&[Word]> {
        self.gens.as_deref()
    }

    pub fn outcome(&self) -> &CompletionOutcome {
        &self.outcome
    }

    pub fn is_finished(&self) -> bool {
        self.outcome.is_finished()
    }

    pub fn complex(&self) -> &CubeComplex {
        &self.outcome.complex
    }

    pub fn basepoint(&self) -> usize {
        self.outcome.complex.basepoint()
    }

    fn finished_complex(&self) -> Result<&CubeComplex> {
        if self.is_finished() {
            Ok(&self.outcome.complex)
        } else {
            Err(Error::PartialCompletion)
        }
    }

    /// Whether `w` represents an element of the subgroup: the reduced word
    /// must spell a basepoint loop.
    pub fn membership(&self, w: &Word) -> Result<bool> {
        let c = self.finished_complex()?;
        Ok(c.traces_closed(c.basepoint(), &reduce(&self.graph, w)))
    }

    /// A finished completion certifies quasiconvexity with constant the
    /// basepoint eccentricity; a partial one certifies nothing.
    pub fn quasiconvexity(&self) -> QcVerdict {
        if !self.is_finished() {
            return QcVerdict::Unknown;
        }
        let c = &self.outcome.complex;
        let constant = c
            .eccentricity_from(c.basepoint())
            .expect("completions are connected");
        QcVerdict::Quasiconvex { constant }
    }

    /// Decides the index by re-completing over the resolved generating set.
    /// For a handle without generators the complex itself must already be
    /// resolved (full-valence complexes always are).
    pub fn index(&self, budget: Budget) -> Result<IndexVerdict> {
        let outcome_storage;
        let complex = match &self.gens {
            Some(gens) => {
                let resolved = resolve_generators(&self.graph, gens);
                let rose = CubeComplex::rose(self.graph.clone(), &resolved)?;
                outcome_storage = standard_complete(rose, budget, false);
                if !outcome_storage.is_finished() {
                    return Ok(IndexVerdict::Unknown);
                }
                &outcome_storage.complex
            }
            None => {
                let c = self.finished_complex()?;
                for s in self.graph.dominating_vertices() {
                    let present = c.edge_ids().iter().any(|&e| c.edge_label(e) == s);
                    if !present {
                        return Err(Error::MissingGenerators);
                    }
                }
                c
            }
        };
        if !complex.is_full_valence() {
            return Ok(IndexVerdict::Infinite);
        }
        Ok(IndexVerdict::Finite {
            index: complex.vertex_count(),
            representatives: bfs_representatives(complex),
        })
    }

    /// Torsion detection: for every clique of the defining graph, the
    /// clique-labeled subgraph of the 1-skeleton must have trivial parity on
    /// its whole cycle space.
    pub fn is_torsion_free(&self) -> Result<bool> {
        let c = self.finished_complex()?;
        for clique in self.graph.enumerate_cliques() {
            let mask: u64 = clique.iter().fold(0, |m, g| m | (1 << g.0));
            if has_nonzero_cycle_parity(c, mask) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Normality via (N1) and (N2'): every generator outside `delta` labels
    /// an edge at the basepoint, and every generator word closes up at
    /// every vertex.
    pub fn is_normal(&self) -> Result<NormalityReport> {
        let gens = self.gens.as_ref().ok_or(Error::MissingGenerators)?.clone();
        let c = self.finished_complex()?;
        let mut delta = Vec::new();
        'outer: for s in self.graph.vertices() {
            for w in &gens {
                for &t in w.support().iter() {
                    if t != s && !self.graph.adjacent(t, s) {
                        continue 'outer;
                    }
                }
            }
            delta.push(s);
        }
        let b = c.basepoint();
        let n1_ok = self
            .graph
            .vertices()
            .filter(|s| !delta.contains(s))
            .all(|s| c.edge_with_label_at(b, s).is_some());
        let mut n2_ok = true;
        'n2: for w in &gens {
            let red = reduce(&self.graph, w);
            for v in c.vertex_ids() {
                if !c.traces_closed(v, &red) {
                    n2_ok = false;
                    break 'n2;
                }
            }
        }
        Ok(NormalityReport {
            delta,
            n1_ok,
            n2_ok,
            verdict: n1_ok && n2_ok,
        })
    }

    /// Whether some positive power of `w` lies in the subgroup: happens iff
    /// `w^(2l)` is a member for some `l` at most the vertex count.
    pub fn power_membership(&self, w: &Word) -> Result<bool> {
        let c = self.finished_complex()?;
        let n = c.vertex_count();
        let red = reduce(&self.graph, w);
        for l in 1..=n {
            if self.membership(&red.repeat(2 * l))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The core graph at the basepoint, computed as the useful part of the
    /// product of the 1-skeleton with the reduced-word automaton.
    pub fn core_graph(&self) -> Result<CoreGraph> {
        let c = self.finished_complex()?;
        let b = c.basepoint();
        let mut states: BTreeMap<(usize, u64), usize> = BTreeMap::new();
        let mut transitions: Vec<(usize, usize, usize)> = Vec::new();
        let start = (b, AutomatonState::initial().0);
        states.insert(start, 0);
        let mut order = vec![start];
        let mut queue = VecDeque::new();
        queue.push_back(0usize);
        while let Some(i) = queue.pop_front() {
            let (v, st) = order[i];
            for e in c.edges_at(v) {
                let s = c.edge_label(e);
                let Some(next_state) = automaton_step(&self.graph, AutomatonState(st), s) else {
                    continue;
                };
                let u = c.other_endpoint(e, v);
                let key = (u, next_state.0);
                let j = match states.get(&key) {
                    Some(&j) => j,
                    None => {
                        order.push(key);
                        let j = order.len() - 1;
                        states.insert(key, j);
                        queue.push_back(j);
                        j
                    }
                };
                transitions.push((i, j, e));
            }
        }
        // states from which an accepting pair (vertex back at B) is
        // reachable
        let mut reverse: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(p, q, _) in &transitions {
            reverse.entry(q).or_default().push(p);
        }
        let mut co: BTreeSet<usize> = (0..order.len()).filter(|&i| order[i].0 == b).collect();
        let mut queue: VecDeque<usize> = co.iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            if let Some(preds) = reverse.get(&q) {
                for &p in preds {
                    if co.insert(p) {
                        queue.push_back(p);
                    }
                }
            }
        }
        let mut edges: BTreeSet<(usize, usize, GeneratorId)> = BTreeSet::new();
        let mut vertices: BTreeSet<usize> = BTreeSet::new();
        vertices.insert(b);
        for &(p, q, e) in &transitions {
            if co.contains(&p) && co.contains(&q) {
                let (x, y) = c.edge_endpoints(e);
                edges.insert((x.min(y), x.max(y), c.edge_label(e)));
                vertices.insert(x);
                vertices.insert(y);
            }
        }
        Ok(CoreGraph {
            root: b,
            vertices: vertices.into_iter().collect(),
            edges: edges.into_iter().collect(),
        })
    }

    /// Adds a graph-loop for every missing label at every vertex and
    /// completes, producing a finite-index overgroup with a retraction onto
    /// this subgroup.
    pub fn full_valence_extension(&self) -> Result<FullValenceExtension> {
        let c = self.finished_complex()?;
        let mut loops = Vec::new();
        for v in c.vertex_ids() {
            for s in self.graph.vertices() {
                if c.edge_with_label_at(v, s).is_none() {
                    loops.push((v, s));
                }
            }
        }
        let (extended, added_loops) = complete_with_graph_loops(c.clone(), &loops)?;
        debug_assert!(extended.is_full_valence());
        let overgroup_index = extended.vertex_count();
        Ok(FullValenceExtension {
            complex: extended,
            added_loops,
            overgroup_index,
        })
    }

    /// Moves the basepoint; the subgroup becomes the conjugate by the label
    /// of a path to the new basepoint, which is returned alongside.
    pub fn change_basepoint(&self, v: usize) -> Result<(SubgroupHandle, Word)> {
        let c = self.finished_complex()?;
        let conjugator = c.geodesic_label(c.basepoint(), v)?;
        let mut complex = c.clone();
        complex.set_basepoint(v)?;
        let gens = self.gens.as_ref().map(|gens| {
            gens.iter()
                .map(|g| {
                    reduce(
                        &self.graph,
                        &conjugator.inverse().concat(g).concat(&conjugator),
                    )
                })
                .collect()
        });
        let outcome = CompletionOutcome {
            status: CompletionStatus::Finished,
            complex,
            stats: self.outcome.stats,
            trace: None,
        };
        Ok((
            SubgroupHandle {
                graph: self.graph.clone(),
                gens,
                outcome,
            },
            conjugator,
        ))
    }
}

/// Coset representatives: labels of BFS geodesics from the basepoint to
/// every vertex, in discovery order (the basepoint first).
fn bfs_representatives(c: &CubeComplex) -> Vec<Word> {
    let b = c.basepoint();
    let mut words: BTreeMap<usize, Word> = BTreeMap::new();
    words.insert(b, Word::empty());
    let mut out = vec![Word::empty()];
    let mut queue = VecDeque::new();
    queue.push_back(b);
    while let Some(v) = queue.pop_front() {
        for e in c.edges_at(v) {
            let u = c.other_endpoint(e, v);
            if !words.contains_key(&u) {
                let mut word = words[&v].clone();
                word.0.push(c.edge_label(e));
                words.insert(u, word.clone());
                out.push(word);
                queue.push_back(u);
            }
        }
    }
    out
}

/// Whether the subgraph of the 1-skeleton labeled inside `mask` carries a
/// cycle with nonzero parity vector (the cycle's labels counted mod 2).
fn has_nonzero_cycle_parity(c: &CubeComplex, mask: u64) -> bool {
    let edges: Vec<usize> = c
        .edge_ids()
        .into_iter()
        .filter(|&e| mask & (1 << c.edge_label(e).0) != 0)
        .collect();
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in &edges {
        let (a, b) = c.edge_endpoints(e);
        adj.entry(a).or_default().push(e);
        if b != a {
            adj.entry(b).or_default().push(e);
        }
    }
    let keys: Vec<usize> = adj.keys().copied().collect();
    let mut parity: BTreeMap<usize, u64> = BTreeMap::new();
    let mut tree: BTreeSet<usize> = BTreeSet::new();
    for root in keys {
        if parity.contains_key(&root) {
            continue;
        }
        parity.insert(root, 0);
        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            let around = adj.get(&v).cloned().unwrap_or_default();
            for e in around {
                let u = c.other_endpoint(e, v);
                if !parity.contains_key(&u) {
                    let p = parity[&v] ^ (1 << c.edge_label(e).0);
                    parity.insert(u, p);
                    tree.insert(e);
                    queue.push_back(u);
                }
            }
        }
    }
    for &e in &edges {
        if tree.contains(&e) {
            continue;
        }
        let (a, b) = c.edge_endpoints(e);
        let cycle = parity[&a] ^ parity[&b] ^ (1 << c.edge_label(e).0);
        if cycle != 0 {
            return true;
        }
    }
    false
}

/// Root-preserving isomorphism test for core graphs. Core graphs live in
/// folded complexes, so each vertex has at most one edge per label and a
/// simultaneous traversal from the roots decides the question.
pub fn core_isomorphic(a: &CoreGraph, b: &CoreGraph) -> bool {
    if a.vertices.len() != b.vertices.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let build = |g: &CoreGraph| {
        let mut adj: BTreeMap<usize, BTreeMap<GeneratorId, usize>> = BTreeMap::new();
        for &(x, y, l) in &g.edges {
            adj.entry(x).or_default().insert(l, y);
            adj.entry(y).or_default().insert(l, x);
        }
        adj
    };
    let adj_a = build(a);
    let adj_b = build(b);
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    map.insert(a.root, b.root);
    let mut queue = VecDeque::new();
    queue.push_back((a.root, b.root));
    while let Some((x, y)) = queue.pop_front() {
        let ea = adj_a.get(&x).cloned().unwrap_or_default();
        let eb = adj_b.get(&y).cloned().unwrap_or_default();
        let keys_a: BTreeSet<_> = ea.keys().collect();
        let keys_b: BTreeSet<_> = eb.keys().collect();
        if keys_a != keys_b {
            return false;
        }
        for (l, &xn) in &ea {
            let yn = eb[l];
            match map.get(&xn) {
                Some(&mapped) => {
                    if mapped != yn {
                        return false;
                    }
                }
                None => {
                    if map.values().any(|&v| v == yn) {
                        return false;
                    }
                    map.insert(xn, yn);
                    queue.push_back((xn, yn));
                }
            }
        }
    }
    map.len() == a.vertices.len()
}

/// Reads a word of the overgroup back into the subgroup by dropping the
/// letters consumed by added graph-loops.
pub fn retract(extension: &FullValenceExtension, h: &Word) -> Result<Word> {
    let c = &extension.complex;
    let added: BTreeSet<usize> = extension
        .added_loops
        .iter()
        .map(|&e| c.canonical_edge(e))
        .collect();
    let b = c.basepoint();
    let mut here = b;
    let mut letters = Vec::new();
    for &s in h.letters() {
        let e = c
            .edge_with_label_at(here, s)
            .ok_or_else(|| Error::InvalidWord("word leaves the overgroup complex".into()))?;
        if !added.contains(&c.canonical_edge(e)) {
            letters.push(s);
        }
        here = c.other_endpoint(e, here);
    }
    if here != b {
        return Err(Error::InvalidWord(
            "word does not label a loop in the overgroup".into(),
        ));
    }
    Ok(Word(letters))
}

/// Separability witness for a nontrivial `g`: a finite-index overgroup that
/// misses `g`, built from the tree completion of the path spelling `g`
/// followed by a full-valence extension.
pub fn separate(graph: &DefiningGraph, g: &Word) -> Result<(SubgroupHandle, usize)> {
    let w = reduce(graph, g);
    if w.is_empty() {
        return Err(Error::InvalidWord(
            "cannot separate the trivial element".into(),
        ));
    }
    let path = CubeComplex::path_complex(graph.clone(), &w)?;
    let completed = crate::engine::tree_complete(path)?;
    let handle = SubgroupHandle::from_complex(completed)?;
    let extension = handle.full_valence_extension()?;
    let index = extension.overgroup_index;
    let overgroup = SubgroupHandle::from_complex(extension.complex)?;
    debug_assert!(
        !overgroup.membership(&w)?,
        "separated element is still a member"
    );
    Ok((overgroup, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> DefiningGraph {
        DefiningGraph::from_names(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    fn edgeless2() -> DefiningGraph {
        DefiningGraph::from_names(&["a", "b"], &[]).unwrap()
    }

    fn w(g: &DefiningGraph, s: &str) -> Word {
        Word::parse(g, s).unwrap()
    }

    fn even_kernel_handle() -> SubgroupHandle {
        let g = path3();
        let gens = vec![w(&g, "c a"), w(&g, "c b")];
        SubgroupHandle::new(g, gens, Budget::default()).unwrap()
    }

    #[test]
    fn membership_fixture() {
        let h = even_kernel_handle();
        let g = h.graph().clone();
        assert!(h.membership(&w(&g, "c a")).unwrap());
        // parity oracle: "a" has odd length, the subgroup is the even-length
        // kernel
        assert!(!h.membership(&w(&g, "a")).unwrap());
        assert!(h.membership(&w(&g, "b a")).unwrap());
    }

    #[test]
    fn membership_needs_finished_completion() {
        let g = DefiningGraph::from_names(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        )
        .unwrap();
        let h = SubgroupHandle::new(g.clone(), vec![w(&g, "a b c d")], Budget::with_cells(100))
            .unwrap();
        assert!(!h.is_finished());
        assert!(matches!(
            h.membership(&w(&g, "a")),
            Err(Error::PartialCompletion)
        ));
        assert_eq!(h.quasiconvexity(), QcVerdict::Unknown);
    }

    #[test]
    fn quasiconvexity_constant() {
        let h = even_kernel_handle();
        assert_eq!(h.quasiconvexity(), QcVerdict::Quasiconvex { constant: 1 });
        let g = path3();
        let trivial =
            SubgroupHandle::new(g.clone(), vec![w(&g, "a a")], Budget::default()).unwrap();
        assert!(matches!(
            trivial.quasiconvexity(),
            QcVerdict::Quasiconvex { .. }
        ));
    }

    #[test]
    fn index_verdicts() {
        let h = even_kernel_handle();
        let g = h.graph().clone();
        match h.index(Budget::default()).unwrap() {
            IndexVerdict::Finite {
                index,
                representatives,
            } => {
                assert_eq!(index, 2);
                assert_eq!(representatives, vec![Word::empty(), w(&g, "c")]);
            }
            other => panic!("expected finite index, got {other:?}"),
        }
        let trivial =
            SubgroupHandle::new(g.clone(), vec![w(&g, "a a")], Budget::default()).unwrap();
        assert_eq!(
            trivial.index(Budget::default()).unwrap(),
            IndexVerdict::Infinite
        );
        let whole = SubgroupHandle::new(
            g.clone(),
            vec![w(&g, "a"), w(&g, "b"), w(&g, "c")],
            Budget::default(),
        )
        .unwrap();
        match whole.index(Budget::default()).unwrap() {
            IndexVerdict::Finite {
                index,
                representatives,
            } => {
                assert_eq!(index, 1);
                assert_eq!(representatives, vec![Word::empty()]);
            }
            other => panic!("expected index 1, got {other:?}"),
        }
    }

    #[test]
    fn coset_representatives_are_in_distinct_cosets() {
        let h = even_kernel_handle();
        match h.index(Budget::default()).unwrap() {
            IndexVerdict::Finite {
                representatives, ..
            } => {
                for (i, u) in representatives.iter().enumerate() {
                    for v in representatives.iter().skip(i + 1) {
                        let quotient = u.concat(&v.inverse());
                        assert!(!h.membership(&quotient).unwrap());
                    }
                }
            }
            other => panic!("expected finite index, got {other:?}"),
        }
    }

    #[test]
    fn torsion_fixtures() {
        let h = even_kernel_handle();
        // (ab)^2 = 1 and ab = (ca)^{-1}(cb) lies in the subgroup
        assert!(!h.is_torsion_free().unwrap());
        let g = path3();
        let free = SubgroupHandle::new(g.clone(), vec![w(&g, "a c")], Budget::default()).unwrap();
        assert!(free.is_torsion_free().unwrap());
        assert!(free.complex().check_npc().unwrap());
        // a finite subgroup generated by two adjacent letters
        let finite = SubgroupHandle::new(g.clone(), vec![w(&g, "a b")], Budget::default()).unwrap();
        assert!(!finite.is_torsion_free().unwrap());
    }

    #[test]
    fn normality_fixtures() {
        let h = even_kernel_handle();
        let report = h.is_normal().unwrap();
        assert!(report.verdict);
        // b is adjacent to both a and c, hence central in the whole group
        assert_eq!(report.delta, vec![GeneratorId(1)]);
        let g = path3();
        let single = SubgroupHandle::new(g.clone(), vec![w(&g, "a")], Budget::default()).unwrap();
        let report = single.is_normal().unwrap();
        // oracle: c a c is reduced and not in the subgroup
        assert!(!report.verdict);
        let whole = SubgroupHandle::new(
            g.clone(),
            vec![w(&g, "a"), w(&g, "b"), w(&g, "c")],
            Budget::default(),
        )
        .unwrap();
        assert!(whole.is_normal().unwrap().verdict);
    }

    #[test]
    fn power_membership_fixtures() {
        let g = edgeless2();
        let h = SubgroupHandle::new(g.clone(), vec![w(&g, "a")], Budget::default()).unwrap();
        assert!(!h.power_membership(&w(&g, "a b")).unwrap());
        assert!(h.power_membership(&w(&g, "a")).unwrap());
        let kernel = even_kernel_handle();
        let pg = kernel.graph().clone();
        for word in ["a", "c a", "b", "a b c", "c"] {
            assert!(
                kernel.power_membership(&w(&pg, word)).unwrap(),
                "failed on {word}"
            );
        }
    }

    #[test]
    fn power_membership_needs_the_right_power() {
        // over two commuting-free generators, <(ab)^4> contains (ab)^{2l}
        // exactly when 4 divides 2l, so l = 2 is the witness
        let g = edgeless2();
        let h = SubgroupHandle::new(g.clone(), vec![w(&g, "a b a b a b a b")], Budget::default())
            .unwrap();
        assert!(h.power_membership(&w(&g, "a b")).unwrap());
    }

    #[test]
    fn dihedral_subgroup_of_square_group_stays_unknown() {
        // the subgroup generated by two commuting-pair involutions over the
        // four-cycle has an infinite completion, so no budget certifies it
        let g = DefiningGraph::from_names(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        )
        .unwrap();
        let h = SubgroupHandle::new(
            g.clone(),
            vec![w(&g, "a b"), w(&g, "c d")],
            Budget::with_cells(2000),
        )
        .unwrap();
        assert_eq!(h.quasiconvexity(), QcVerdict::Unknown);
    }

    #[test]
    fn core_graph_fixtures() {
        let h = even_kernel_handle();
        let core = h.core_graph().unwrap();
        // reduced loops "c a" and "c b" sweep out the whole 1-skeleton
        assert_eq!(core.vertices.len(), 2);
        assert_eq!(core.edges.len(), 3);
        let g = path3();
        let trivial =
            SubgroupHandle::new(g.clone(), vec![w(&g, "a a")], Budget::default()).unwrap();
        let core = trivial.core_graph().unwrap();
        assert_eq!(core.vertices, vec![trivial.basepoint()]);
        assert!(core.edges.is_empty());
    }

    #[test]
    fn core_uniqueness_across_generating_sets() {
        let g = path3();
        let sets = [
            vec![w(&g, "c a"), w(&g, "c b")],
            vec![w(&g, "a c"), w(&g, "c b")],
            vec![w(&g, "c a"), w(&g, "c b"), w(&g, "c a c a")],
        ];
        let cores: Vec<CoreGraph> = sets
            .iter()
            .map(|gens| {
                SubgroupHandle::new(g.clone(), gens.clone(), Budget::default())
                    .unwrap()
                    .core_graph()
                    .unwrap()
            })
            .collect();
        assert!(core_isomorphic(&cores[0], &cores[1]));
        assert!(core_isomorphic(&cores[0], &cores[2]));
        assert!(core_isomorphic(&cores[1], &cores[2]));
    }

    #[test]
    fn normal_subgroup_has_isomorphic_cores_everywhere() {
        let h = even_kernel_handle();
        let base_core = h.core_graph().unwrap();
        for v in h.complex().vertex_ids() {
            let (moved, _) = h.change_basepoint(v).unwrap();
            let core = moved.core_graph().unwrap();
            assert!(core_isomorphic(&base_core, &core));
        }
    }

    #[test]
    fn full_valence_extension_of_single_edge() {
        let g = path3();
        let path = CubeComplex::path_complex(g.clone(), &w(&g, "a")).unwrap();
        let h = SubgroupHandle::from_complex(path).unwrap();
        let ext = h.full_valence_extension().unwrap();
        assert_eq!(ext.overgroup_index, 2);
        assert!(ext.complex.is_full_valence());
        assert!(!ext.added_loops.is_empty());
    }

    #[test]
    fn full_valence_extension_of_full_valence_complex_is_identity() {
        let h = even_kernel_handle();
        let ext = h.full_valence_extension().unwrap();
        assert!(ext.added_loops.is_empty());
        assert_eq!(ext.overgroup_index, 2);
    }

    #[test]
    fn retraction_examples() {
        let g = path3();
        let path = CubeComplex::path_complex(g.clone(), &w(&g, "a")).unwrap();
        let h = SubgroupHandle::from_complex(path).unwrap();
        let ext = h.full_valence_extension().unwrap();
        // a loop of the subgroup retracts to itself
        assert_eq!(retract(&ext, &w(&g, "a a")).unwrap(), w(&g, "a a"));
        // an added loop letter vanishes
        assert_eq!(retract(&ext, &w(&g, "b")).unwrap(), Word::empty());
        // mixed: traverse a, an added loop at the far vertex, then a back
        assert_eq!(retract(&ext, &w(&g, "a b a")).unwrap(), w(&g, "a a"));
        // non-loops are rejected
        assert!(retract(&ext, &w(&g, "a")).is_err());
    }

    #[test]
    fn separate_fixtures() {
        let g = path3();
        let (h, index) = separate(&g, &w(&g, "a")).unwrap();
        assert_eq!(index, 2);
        assert!(!h.membership(&w(&g, "a")).unwrap());
        let (h, _) = separate(&g, &w(&g, "a b c")).unwrap();
        assert!(!h.membership(&w(&g, "a b c")).unwrap());
        assert!(separate(&g, &w(&g, "a a")).is_err());
    }

    #[test]
    fn handles_are_thread_safe() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<SubgroupHandle>();
        assert_send_sync::<FullValenceExtension>();
    }

    #[test]
    fn change_basepoint_identity_and_conjugation() {
        let h = even_kernel_handle();
        let g = h.graph().clone();
        let b = h.basepoint();
        let (same, word) = h.change_basepoint(b).unwrap();
        assert!(word.is_empty());
        assert!(same.membership(&w(&g, "c a")).unwrap());
        let v = h
            .complex()
            .vertex_ids()
            .into_iter()
            .find(|&x| x != b)
            .unwrap();
        let (moved, conj) = h.change_basepoint(v).unwrap();
        assert_eq!(conj.len(), 1);
        // membership in the moved handle matches conjugated membership
        for word in ["c a", "a", "a c", "b c"] {
            let word = w(&g, word);
            let conjugated = conj.concat(&word).concat(&conj.inverse());
            assert_eq!(
                moved.membership(&word).unwrap(),
                h.membership(&conjugated).unwrap()
            );
        }
    }
}
