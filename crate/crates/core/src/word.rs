//! Words in a right-angled Coxeter group: reduction, equality, the
//! reduced-word automaton and the special normal forms used by the
//! reflection and embeddability machinery.
//!
//! Every generator is an involution, so the inverse of a word is the
//! reversed word; signed letters are never stored. A *deletion* removes two
//! equal letters whose intermediate letters all commute with them, and a
//! word is reduced exactly when no deletion applies.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DefiningGraph, GeneratorId};

/// A finite sequence of generator letters (possibly empty).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<GeneratorId>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn single(g: GeneratorId) -> Word {
        Word(vec![g])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[GeneratorId] {
        &self.0
    }

    /// The inverse word: all generators are involutions, so just reverse.
    pub fn inverse(&self) -> Word {
        let mut v = self.0.clone();
        v.reverse();
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat(&self, n: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() * n);
        for _ in 0..n {
            v.extend_from_slice(&self.0);
        }
        Word(v)
    }

    pub fn support(&self) -> Vec<GeneratorId> {
        let mut s: Vec<GeneratorId> = self.0.clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Parses whitespace-separated generator names, e.g. `"d a c b c a d"`.
    pub fn parse(graph: &DefiningGraph, text: &str) -> Result<Word> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            letters.push(graph.lookup(tok)?);
        }
        Ok(Word(letters))
    }

    pub fn display(&self, graph: &DefiningGraph) -> String {
        self.0
            .iter()
            .map(|&g| graph.name(g))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn validate(&self, graph: &DefiningGraph) -> Result<()> {
        for &g in &self.0 {
            if !graph.contains(g) {
                return Err(Error::InvalidWord(format!("letter {g} outside graph")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Leftmost deletable pair `(i, i')`: equal letters with every intermediate
/// letter adjacent to them.
fn find_deletion(graph: &DefiningGraph, w: &[GeneratorId]) -> Option<(usize, usize)> {
    #[allow(clippy::needless_range_loop)]
    for i in 0..w.len() {
        let s = w[i];
        for j in i + 1..w.len() {
            if w[j] == s {
                return Some((i, j));
            }
            if !graph.adjacent(w[j], s) {
                break;
            }
        }
    }
    None
}

/// A reduced expression for the same group element, obtained by repeatedly
/// deleting the leftmost applicable pair.
pub fn reduce(graph: &DefiningGraph, w: &Word) -> Word {
    let mut letters = w.0.clone();
    while let Some((i, j)) = find_deletion(graph, &letters) {
        letters.remove(j);
        letters.remove(i);
    }
    Word(letters)
}

pub fn is_reduced(graph: &DefiningGraph, w: &Word) -> bool {
    find_deletion(graph, &w.0).is_none()
}

/// Tits' solution to the word problem: `u = v` iff `u·v⁻¹` reduces to the
/// empty word.
pub fn equal(graph: &DefiningGraph, u: &Word, v: &Word) -> bool {
    reduce(graph, &u.concat(&v.inverse())).is_empty()
}

pub fn is_trivial(graph: &DefiningGraph, w: &Word) -> bool {
    reduce(graph, w).is_empty()
}

/// State of the reduced-word recognizer: the set of letters that can end a
/// reduced expression of the word read so far.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct AutomatonState(pub u64);

impl AutomatonState {
    pub fn initial() -> AutomatonState {
        AutomatonState(0)
    }

    pub fn contains(&self, g: GeneratorId) -> bool {
        self.0 & (1 << g.0) != 0
    }
}

/// One automaton transition. Rejects (returns `None`) iff `s` is already a
/// possible last letter; otherwise the new state keeps the old letters
/// adjacent to `s` and adds `s`.
pub fn automaton_step(
    graph: &DefiningGraph,
    state: AutomatonState,
    s: GeneratorId,
) -> Option<AutomatonState> {
    if state.contains(s) {
        return None;
    }
    Some(AutomatonState((state.0 & graph.link_mask(s)) | (1 << s.0)))
}

/// Runs the automaton on a whole word.
pub fn automaton_accepts(graph: &DefiningGraph, w: &Word) -> bool {
    let mut state = AutomatonState::initial();
    for &s in &w.0 {
        match automaton_step(graph, state, s) {
            Some(next) => state = next,
            None => return false,
        }
    }
    true
}

/// The lexicographically least reduced expression (by generator index),
/// computed by greedily extracting the smallest left descent.
pub fn shortlex_normal_form(graph: &DefiningGraph, w: &Word) -> Word {
    let mut rest = reduce(graph, w);
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let mut picked = None;
        for i in 0..graph.vertex_count() {
            let t = GeneratorId(i);
            let mut probe = Vec::with_capacity(rest.len() + 1);
            probe.push(t);
            probe.extend_from_slice(&rest.0);
            let red = reduce(graph, &Word(probe));
            if red.len() + 1 == rest.len() {
                picked = Some((t, red));
                break;
            }
        }
        let (t, red) = picked.expect("nonempty reduced word has a left descent");
        out.push(t);
        rest = red;
    }
    Word(out)
}

/// `true` iff some reduced expression of `w` begins with `p`; decided by
/// `|reduce(p⁻¹·w)| = |w| − |p|`. Both inputs must be reduced.
pub fn prefix_in_weak_order(graph: &DefiningGraph, p: &Word, w: &Word) -> Result<bool> {
    p.validate(graph)?;
    w.validate(graph)?;
    if !is_reduced(graph, p) || !is_reduced(graph, w) {
        return Err(Error::InvalidWord(
            "prefix test needs reduced inputs".into(),
        ));
    }
    if p.len() > w.len() {
        return Ok(false);
    }
    let red = reduce(graph, &p.inverse().concat(w));
    Ok(red.len() == w.len() - p.len())
}

/// Decomposition `w = x·h·k·x⁻¹` with `x·hⁿ·k^(n mod 2)·x⁻¹` reduced for all
/// `n > 0`: `x` is peeled greedily from matching first/last letters, and `k`
/// collects the letters of the remainder that commute with all other
/// remainder letters.
pub fn power_normal_form(graph: &DefiningGraph, w: &Word) -> Result<(Word, Word, Word)> {
    w.validate(graph)?;
    if !is_reduced(graph, w) {
        return Err(Error::InvalidWord(
            "power normal form needs a reduced word".into(),
        ));
    }
    let (x, y) = peel_conjugator(graph, w);
    // Letters of y commuting with every other letter of y.
    let support = y.support();
    let mut commuting: Vec<GeneratorId> = Vec::new();
    for &k in &support {
        if support.iter().all(|&t| t == k || graph.adjacent(t, k)) {
            commuting.push(k);
        }
    }
    let h = Word(
        y.0.iter()
            .copied()
            .filter(|g| !commuting.contains(g))
            .collect(),
    );
    let k = Word(commuting);
    Ok((x, h, k))
}

/// Greedy peeling `w = x·y·x⁻¹`: while some letter `s` (smallest index
/// first) satisfies `ℓ(s·y·s) = ℓ(y) − 2`, peel it.
fn peel_conjugator(graph: &DefiningGraph, w: &Word) -> (Word, Word) {
    let mut x = Vec::new();
    let mut y = w.clone();
    'outer: loop {
        if y.len() < 2 {
            break;
        }
        for i in 0..graph.vertex_count() {
            let s = GeneratorId(i);
            let mut probe = Vec::with_capacity(y.len() + 2);
            probe.push(s);
            probe.extend_from_slice(&y.0);
            probe.push(s);
            let red = reduce(graph, &Word(probe));
            if red.len() + 2 == y.len() {
                x.push(s);
                y = red;
                continue 'outer;
            }
        }
        break;
    }
    (Word(x), y)
}

/// A reflection `w·s·w⁻¹` in reduced form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Reflection {
    pub conjugator: Word,
    pub core: GeneratorId,
}

impl Reflection {
    pub fn word(&self) -> Word {
        let mut v = self.conjugator.0.clone();
        v.push(self.core);
        v.extend(self.conjugator.0.iter().rev().copied());
        Word(v)
    }

    pub fn display(&self, graph: &DefiningGraph) -> String {
        self.word().display(graph)
    }
}

/// Puts a word in reduced reflection form `(x, s)` with `x·s·x⁻¹` reduced,
/// or `None` when the element is not a reflection. Peeling always removes
/// the smallest-index eligible letter first, so the output is canonical for
/// a fixed input word.
pub fn normalize_reflection(graph: &DefiningGraph, w: &Word) -> Result<Option<Reflection>> {
    w.validate(graph)?;
    let reduced = reduce(graph, w);
    let (x, y) = peel_conjugator(graph, &reduced);
    if y.len() == 1 {
        Ok(Some(Reflection {
            conjugator: x,
            core: y.0[0],
        }))
    } else {
        Ok(None)
    }
}

/// Clique form `x·k·x⁻¹` of an involution: the support of `k` is a clique of
/// the defining graph. Returns `None` when the input is not an involution;
/// panics if peeling a true involution leaves a non-clique remainder, which
/// would contradict the structure of involutions in these groups.
pub fn involution_clique_form(graph: &DefiningGraph, w: &Word) -> Result<Option<(Word, Word)>> {
    w.validate(graph)?;
    let reduced = reduce(graph, w);
    if reduced.is_empty() || !equal(graph, &reduced.concat(&reduced), &Word::empty()) {
        return Ok(None);
    }
    let (x, k) = peel_conjugator(graph, &reduced);
    let support = k.support();
    for (i, &u) in support.iter().enumerate() {
        for &v in support.iter().skip(i + 1) {
            assert!(
                graph.adjacent(u, v),
                "involution peeled to a non-clique remainder; this is a bug"
            );
        }
    }
    Ok(Some((x, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DefiningGraph;
    use std::collections::BTreeSet;

    fn path3() -> DefiningGraph {
        DefiningGraph::from_names(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    fn path4() -> DefiningGraph {
        DefiningGraph::from_names(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")])
            .unwrap()
    }

    fn w(g: &DefiningGraph, s: &str) -> Word {
        Word::parse(g, s).unwrap()
    }

    /// Brute-force Tits-move closure of a word: breadth-first over swap and
    /// cancel moves. Independent of `reduce`.
    pub(crate) fn tits_closure(g: &DefiningGraph, start: &Word) -> BTreeSet<Word> {
        let mut seen = BTreeSet::new();
        let mut queue = vec![start.clone()];
        seen.insert(start.clone());
        while let Some(word) = queue.pop() {
            let v = &word.0;
            for i in 0..v.len().saturating_sub(1) {
                if v[i] == v[i + 1] {
                    let mut next = v.clone();
                    next.drain(i..=i + 1);
                    let next = Word(next);
                    if seen.insert(next.clone()) {
                        queue.push(next);
                    }
                } else if g.adjacent(v[i], v[i + 1]) {
                    let mut next = v.clone();
                    next.swap(i, i + 1);
                    let next = Word(next);
                    if seen.insert(next.clone()) {
                        queue.push(next);
                    }
                }
            }
        }
        seen
    }

    pub(crate) fn oracle_equal(g: &DefiningGraph, u: &Word, v: &Word) -> bool {
        tits_closure(g, &u.concat(&v.inverse())).contains(&Word::empty())
    }

    #[test]
    fn reduce_basics() {
        let g = path3();
        assert_eq!(reduce(&g, &w(&g, "a a")), Word::empty());
        assert_eq!(reduce(&g, &w(&g, "a b a b")), Word::empty());
        assert_eq!(reduce(&g, &w(&g, "a b a")), w(&g, "b"));
        assert!(oracle_equal(&g, &w(&g, "a b a"), &w(&g, "b")));
    }

    #[test]
    fn is_reduced_basics() {
        let g = path3();
        assert!(is_reduced(&g, &Word::empty()));
        assert!(is_reduced(&g, &w(&g, "a c")));
        assert!(!is_reduced(&g, &w(&g, "a a")));
        assert!(!is_reduced(&g, &w(&g, "a b a b")));
    }

    #[test]
    fn equality() {
        let g = path3();
        assert!(equal(&g, &w(&g, "a b"), &w(&g, "b a")));
        assert!(!equal(&g, &w(&g, "a"), &w(&g, "b")));
        assert!(equal(&g, &w(&g, "a b a"), &w(&g, "b")));
    }

    #[test]
    fn reduce_is_idempotent_and_shortening() {
        let g = path4();
        let samples = [
            "a b c d a b",
            "d c b a a b",
            "b c b c",
            "a d a d",
            "c a c a",
        ];
        for s in samples {
            let word = w(&g, s);
            let red = reduce(&g, &word);
            assert!(red.len() <= word.len());
            assert_eq!(reduce(&g, &red), red);
            assert!(equal(&g, &word, &red));
        }
    }

    #[test]
    fn automaton_small_steps() {
        let g = path3();
        let a = g.lookup("a").unwrap();
        let b = g.lookup("b").unwrap();
        let s0 = AutomatonState::initial();
        let s1 = automaton_step(&g, s0, a).unwrap();
        assert!(s1.contains(a));
        assert!(automaton_step(&g, s1, a).is_none());
        let s2 = automaton_step(&g, s1, b).unwrap();
        // a commutes with b, so a survives
        assert!(s2.contains(a) && s2.contains(b));
        assert!(automaton_step(&g, s2, a).is_none());
        assert!(!automaton_accepts(&g, &w(&g, "a b a")));
    }

    #[test]
    fn automaton_matches_is_reduced_exhaustively() {
        let g = path3();
        let n = g.vertex_count();
        // all words of length <= 6
        let mut stack = vec![Vec::new()];
        while let Some(v) = stack.pop() {
            let word = Word(v.iter().map(|&i| GeneratorId(i)).collect());
            assert_eq!(
                is_reduced(&g, &word),
                automaton_accepts(&g, &word),
                "mismatch on {word:?}"
            );
            if v.len() < 6 {
                for i in 0..n {
                    let mut next = v.clone();
                    next.push(i);
                    stack.push(next);
                }
            }
        }
    }

    #[test]
    fn power_normal_form_examples() {
        let g = path3();
        let (x, h, k) = power_normal_form(&g, &w(&g, "a b")).unwrap();
        assert_eq!((x, h, k), (Word::empty(), Word::empty(), w(&g, "a b")));
        let (x, h, k) = power_normal_form(&g, &w(&g, "a c")).unwrap();
        assert_eq!((x, h, k), (Word::empty(), w(&g, "a c"), Word::empty()));
        let (x, h, k) = power_normal_form(&g, &w(&g, "a")).unwrap();
        assert_eq!((x, h, k), (Word::empty(), Word::empty(), w(&g, "a")));
        assert!(power_normal_form(&g, &w(&g, "a a")).is_err());
    }

    #[test]
    fn power_normal_form_powers_stay_reduced() {
        let g = path4();
        for s in ["a c", "a d", "b d", "c a d", "a b c d"] {
            let word = reduce(&g, &w(&g, s));
            let (x, h, k) = power_normal_form(&g, &word).unwrap();
            for n in 1..=5usize {
                let mut p = x.clone();
                p = p.concat(&h.repeat(n));
                if n % 2 == 1 {
                    p = p.concat(&k);
                }
                p = p.concat(&x.inverse());
                assert!(is_reduced(&g, &p), "power {n} of {s} not reduced: {p:?}");
                assert!(equal(&g, &p, &word.repeat(n)));
            }
        }
    }

    #[test]
    fn prefix_tests() {
        let g = path4();
        assert!(prefix_in_weak_order(&g, &w(&g, "d"), &w(&g, "d a c")).unwrap());
        assert!(!prefix_in_weak_order(&g, &w(&g, "c d"), &w(&g, "d a c")).unwrap());
        assert!(prefix_in_weak_order(&g, &Word::empty(), &w(&g, "d a c")).unwrap());
        // the test is about reduced words only
        assert!(prefix_in_weak_order(&g, &w(&g, "d c d"), &w(&g, "d a c")).is_err());
        assert!(prefix_in_weak_order(&g, &w(&g, "d a"), &w(&g, "d a c")).unwrap());
    }

    #[test]
    fn prefix_witness_reconstruction() {
        let g = path4();
        // whenever the test passes, an explicit reduced expression starting
        // with p exists
        let p = w(&g, "c a");
        let word = w(&g, "a c d");
        if prefix_in_weak_order(&g, &p, &word).unwrap() {
            let tail = reduce(&g, &p.inverse().concat(&word));
            let rebuilt = p.concat(&tail);
            assert!(is_reduced(&g, &rebuilt));
            assert!(equal(&g, &rebuilt, &word));
        }
    }

    #[test]
    fn reflection_normalization() {
        let g = path3();
        let r = normalize_reflection(&g, &w(&g, "a")).unwrap().unwrap();
        assert_eq!(
            (r.conjugator.clone(), r.core),
            (Word::empty(), GeneratorId(0))
        );
        // b a b = a since a and b commute
        let r = normalize_reflection(&g, &w(&g, "b a b")).unwrap().unwrap();
        assert_eq!(
            (r.conjugator.clone(), r.core),
            (Word::empty(), GeneratorId(0))
        );
        // c a c is reduced; peel c
        let r = normalize_reflection(&g, &w(&g, "c a c")).unwrap().unwrap();
        assert_eq!(r.conjugator, w(&g, "c"));
        assert_eq!(r.core, GeneratorId(0));
        // non-reflection
        assert!(normalize_reflection(&g, &w(&g, "a c")).unwrap().is_none());
    }

    #[test]
    fn reflection_output_is_reduced_and_equal() {
        let g = path4();
        for s in ["a", "c a c", "d a c b c a d", "b c b", "d c d"] {
            let word = w(&g, s);
            if let Some(r) = normalize_reflection(&g, &word).unwrap() {
                assert!(is_reduced(&g, &r.word()));
                assert!(equal(&g, &r.word(), &word));
            }
        }
    }

    #[test]
    fn involution_clique_forms() {
        let g = path3();
        let (x, k) = involution_clique_form(&g, &w(&g, "a b")).unwrap().unwrap();
        assert_eq!((x, k), (Word::empty(), w(&g, "a b")));
        let (x, k) = involution_clique_form(&g, &w(&g, "c a b c"))
            .unwrap()
            .unwrap();
        assert_eq!(x, w(&g, "c"));
        assert!(equal(
            &g,
            &w(&g, "c").concat(&k).concat(&w(&g, "c")),
            &w(&g, "c a b c")
        ));
        // (ac)^2 != 1
        assert!(involution_clique_form(&g, &w(&g, "a c")).unwrap().is_none());
    }

    #[test]
    fn shortlex_is_reduced_minimal() {
        let g = path4();
        for s in ["d a c b c a d", "b a", "c b a d", "a b a b a"] {
            let word = w(&g, s);
            let nf = shortlex_normal_form(&g, &word);
            assert!(is_reduced(&g, &nf));
            assert!(equal(&g, &nf, &word));
            // no equal reduced word is lexicographically smaller
            for other in tits_closure(&g, &reduce(&g, &word)) {
                if other.len() == nf.len() {
                    assert!(nf.0 <= other.0);
                }
            }
        }
    }
}
