//! Reflection subgroups: trimmed generating sets, the structured completion
//! pipeline that is always finite, standard generating-set graphs, and the
//! conversion of involution generating sets into reflection ones.

use std::collections::BTreeSet;

use crate::complex::CubeComplex;
use crate::engine::{
    complete_with_graph_loops, tree_complete, CompletionOutcome, CompletionStatus,
};
use crate::error::{Error, Result};
use crate::graph::{DefiningGraph, GeneratorId};
use crate::word::{
    equal, involution_clique_form, is_trivial, normalize_reflection, prefix_in_weak_order, reduce,
    Reflection, Word,
};

/// A list of reduced reflections; `trimmed` reports the verified property
/// that no conjugator extends another reflection's conjugator-plus-core
/// prefix.
#[derive(Clone, Debug)]
pub struct ReflectionSet {
    pub reflections: Vec<Reflection>,
    pub trimmed: bool,
}

impl ReflectionSet {
    /// Normalizes words into reflections; errors on non-reflection input.
    pub fn from_words(graph: &DefiningGraph, words: &[Word]) -> Result<Self> {
        let mut reflections = Vec::with_capacity(words.len());
        for w in words {
            let r = normalize_reflection(graph, w)?.ok_or_else(|| {
                Error::InvalidWord(format!("`{}` is not a reflection", w.display(graph)))
            })?;
            reflections.push(r);
        }
        Ok(ReflectionSet::from_reflections(graph, reflections))
    }

    pub fn from_reflections(graph: &DefiningGraph, reflections: Vec<Reflection>) -> Self {
        let trimmed = is_trimmed(graph, &reflections).unwrap_or(false);
        ReflectionSet {
            reflections,
            trimmed,
        }
    }

    pub fn words(&self) -> Vec<Word> {
        self.reflections.iter().map(|r| r.word()).collect()
    }

    pub fn len(&self) -> usize {
        self.reflections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reflections.is_empty()
    }
}

/// Definition check: for all `i ≠ j`, no reduced expression of `w_j` begins
/// with `w_i · s_i`.
pub fn is_trimmed(graph: &DefiningGraph, refs: &[Reflection]) -> Result<bool> {
    for (i, ri) in refs.iter().enumerate() {
        let mut prefix = ri.conjugator.clone();
        prefix.0.push(ri.core);
        for (j, rj) in refs.iter().enumerate() {
            if i == j {
                continue;
            }
            if prefix_in_weak_order(graph, &prefix, &rj.conjugator)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Replaces reflections whose conjugator extends another reflection until
/// the set is trimmed; equal reflections are merged. The sum of lengths
/// strictly decreases at each replacement, and the generated subgroup is
/// preserved (each replacement conjugates by a member).
pub fn trim(graph: &DefiningGraph, set: &ReflectionSet) -> Result<ReflectionSet> {
    let mut refs = set.reflections.clone();
    dedupe(graph, &mut refs);
    'outer: loop {
        for i in 0..refs.len() {
            let mut prefix = refs[i].conjugator.clone();
            prefix.0.push(refs[i].core);
            for j in 0..refs.len() {
                if i == j {
                    continue;
                }
                if prefix_in_weak_order(graph, &prefix, &refs[j].conjugator)? {
                    let h = refs[i].word();
                    let conjugated = h.concat(&refs[j].word()).concat(&h);
                    let replacement = normalize_reflection(graph, &conjugated)?
                        .expect("conjugate of a reflection is a reflection");
                    debug_assert!(replacement.word().len() < refs[j].word().len());
                    refs[j] = replacement;
                    dedupe(graph, &mut refs);
                    continue 'outer;
                }
            }
        }
        break;
    }
    debug_assert!(is_trimmed(graph, &refs)?);
    Ok(ReflectionSet {
        reflections: refs,
        trimmed: true,
    })
}

fn dedupe(graph: &DefiningGraph, refs: &mut Vec<Reflection>) {
    let mut keep: Vec<Reflection> = Vec::with_capacity(refs.len());
    for r in refs.drain(..) {
        if !keep.iter().any(|k| equal(graph, &k.word(), &r.word())) {
            keep.push(r);
        }
    }
    *refs = keep;
}

/// Builds the always-finite completion of a reflection subgroup: folded
/// conjugator stems with a core graph-loop at each tip, the tree completion
/// of the stems, then graph-loop re-attachment. Trims the input first when
/// necessary.
pub fn reflection_completion(
    graph: &DefiningGraph,
    set: &ReflectionSet,
) -> Result<CompletionOutcome> {
    let trimmed = if set.trimmed && is_trimmed(graph, &set.reflections)? {
        set.clone()
    } else {
        trim(graph, set)?
    };
    let mut stems = CubeComplex::new(graph.clone());
    let b = stems.basepoint();
    let mut loop_sites: Vec<(usize, GeneratorId)> = Vec::new();
    for r in &trimmed.reflections {
        let mut here = b;
        for &s in r.conjugator.letters() {
            let next = stems.add_vertex();
            stems.add_edge(here, next, s, true)?;
            here = next;
        }
        loop_sites.push((here, r.core));
    }
    let completed = tree_complete(stems)?;
    // the requested loops never collide with existing labels on a trimmed
    // input
    let mut requests: BTreeSet<(usize, GeneratorId)> = BTreeSet::new();
    for (v, s) in loop_sites {
        let v = completed.canonical_vertex(v);
        assert!(
            completed.edge_with_label_at(v, s).is_none(),
            "reflection pipeline found a colliding edge before loop re-attachment; this is a bug"
        );
        requests.insert((v, s));
    }
    let requests: Vec<(usize, GeneratorId)> = requests.into_iter().collect();
    let (complex, _) = complete_with_graph_loops(completed, &requests)?;
    debug_assert!(trimmed
        .reflections
        .iter()
        .all(|r| complex.traces_closed(complex.basepoint(), &r.word())));
    Ok(CompletionOutcome {
        status: CompletionStatus::Finished,
        complex,
        stats: Default::default(),
        trace: None,
    })
}

/// The defining graph of the subgroup generated by a trimmed reflection
/// set: one vertex per reflection, edges where the reflections commute.
pub fn standard_gens_graph(graph: &DefiningGraph, set: &ReflectionSet) -> Result<DefiningGraph> {
    if !set.trimmed || !is_trimmed(graph, &set.reflections)? {
        return Err(Error::Hypothesis(
            "standard generating sets come from trimmed reflection sets".into(),
        ));
    }
    let names: Vec<String> = set
        .reflections
        .iter()
        .map(|r| r.word().display(graph).replace(' ', "."))
        .collect();
    let mut edges = Vec::new();
    for i in 0..set.reflections.len() {
        for j in i + 1..set.reflections.len() {
            let ri = set.reflections[i].word();
            let rj = set.reflections[j].word();
            if equal(graph, &ri.concat(&rj), &rj.concat(&ri)) {
                edges.push((i, j));
            }
        }
    }
    DefiningGraph::new(names, &edges)
}

/// Converts a generating set of involutions satisfying the commuting
/// relations of `relations` into a trimmed reflection set generating the
/// same subgroup. The ambient graph must be triangle-free and `relations`
/// must have no isolated vertex.
///
/// Only the verifiable hypotheses are checked here (involutivity and the
/// announced commutations); that the words faithfully present the group of
/// `relations` is the caller's responsibility.
pub fn involutions_to_reflections(
    graph: &DefiningGraph,
    involutions: &[Word],
    relations: &DefiningGraph,
) -> Result<ReflectionSet> {
    if !graph.is_triangle_free() {
        return Err(Error::Hypothesis(
            "the ambient graph must be triangle-free".into(),
        ));
    }
    if relations.vertex_count() != involutions.len() {
        return Err(Error::Hypothesis(
            "one relation-graph vertex per involution is required".into(),
        ));
    }
    if relations.vertices().any(|v| relations.degree(v) == 0) {
        return Err(Error::Hypothesis(
            "the relation graph has an isolated vertex".into(),
        ));
    }
    let mut words: Vec<Word> = Vec::with_capacity(involutions.len());
    for w in involutions {
        let red = reduce(graph, w);
        if red.is_empty() {
            return Err(Error::Hypothesis("generators must be nontrivial".into()));
        }
        if !is_trivial(graph, &red.concat(&red)) {
            return Err(Error::Hypothesis(format!(
                "`{}` is not an involution",
                w.display(graph)
            )));
        }
        words.push(red);
    }
    for (u, v) in relations.edge_pairs() {
        let wu = &words[u.0];
        let wv = &words[v.0];
        if !equal(graph, &wu.concat(wv), &wv.concat(wu)) {
            return Err(Error::Hypothesis(format!(
                "generators {} and {} do not commute as required",
                u.0, v.0
            )));
        }
    }

    for _round in 0..=words.len() {
        let Some(idx) = find_non_reflection(graph, &words)? else {
            return trim(graph, &ReflectionSet::from_words(graph, &words)?);
        };
        // first commuting partner in input order
        let partner = relations
            .vertices()
            .find(|&j| j.0 != idx && relations.adjacent(GeneratorId(idx), j))
            .expect("no isolated vertices")
            .0;
        let (w_prime, k_prime) = involution_clique_form(graph, &words[partner])?
            .expect("generators were checked to be involutions");
        if k_prime.len() != 1 {
            return Err(Error::Hypothesis(
                "commuting partner of a non-reflection has a length-two clique form; \
                 the input is not a standard generating set"
                    .into(),
            ));
        }
        let t = k_prime.0[0];
        // conjugate the non-reflection into position
        let x = reduce(
            graph,
            &w_prime.inverse().concat(&words[idx]).concat(&w_prime),
        );
        let (_z, core) =
            involution_clique_form(graph, &x)?.expect("conjugates of involutions are involutions");
        if core.len() != 2 || !core.0.contains(&t) {
            return Err(Error::Hypothesis(
                "clique forms do not match the expected commuting pattern; \
                 the input is not a standard generating set"
                    .into(),
            ));
        }
        let y = reduce(graph, &Word::single(t).concat(&x));
        words[idx] = reduce(graph, &w_prime.concat(&y).concat(&w_prime.inverse()));
        debug_assert!(normalize_reflection(graph, &words[idx])?.is_some());
    }
    unreachable!("each round adds a reflection, so the loop terminates")
}

fn find_non_reflection(graph: &DefiningGraph, words: &[Word]) -> Result<Option<usize>> {
    for (i, w) in words.iter().enumerate() {
        if normalize_reflection(graph, w)?.is_none() {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// The path b–d–a–c on the letters {a,b,c,d}: the unique path shape making
/// the reflection words `d a c b c a d` and `d c d c d` reduced.
pub fn bdac_path_graph() -> DefiningGraph {
    DefiningGraph::from_names(&["a", "b", "c", "d"], &[("b", "d"), ("d", "a"), ("a", "c")])
        .expect("static graph is valid")
}

/// The two-reflection generating set completed in the reflection pipeline
/// fixture.
pub fn bdac_path_reflections(graph: &DefiningGraph) -> Result<ReflectionSet> {
    let words = vec![
        Word::parse(graph, "d a c b c a d")?,
        Word::parse(graph, "d c d c d")?,
    ];
    ReflectionSet::from_words(graph, &words)
}

/// Mutual-membership check: the subgroups generated by two reflection sets
/// coincide.
pub fn generate_same_subgroup(
    graph: &DefiningGraph,
    a: &ReflectionSet,
    b: &ReflectionSet,
) -> Result<bool> {
    let ca = reflection_completion(graph, a)?;
    let cb = reflection_completion(graph, b)?;
    let base_a = ca.complex.basepoint();
    let base_b = cb.complex.basepoint();
    for w in a.words() {
        if !cb.complex.traces_closed(base_b, &reduce(graph, &w)) {
            return Ok(false);
        }
    }
    for w in b.words() {
        if !ca.complex.traces_closed(base_a, &reduce(graph, &w)) {
            return Ok(false);
        }
    }
    Ok(true)
}
