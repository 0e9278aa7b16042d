//! Completion drivers.
//!
//! The standard completion alternates two phases: exhaust all folds and cube
//! identifications, then attach a cube for every maximal clique-labeled
//! tuple found on the folded complex. When a finite completion exists this
//! terminates on it; otherwise a budget turns the run into an explicit
//! `BudgetExceeded`, never a wrong answer.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::complex::CubeComplex;
use crate::error::{Error, Result};
use crate::graph::{DefiningGraph, GeneratorId};
use crate::word::Word;

/// Resource limits for a completion run.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_cells: usize,
    pub max_operations: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_cells: 50_000,
            max_operations: 500_000,
        }
    }
}

impl Budget {
    pub fn with_cells(max_cells: usize) -> Self {
        Budget {
            max_cells,
            ..Budget::default()
        }
    }

    /// Effectively unlimited; used where termination is a theorem.
    pub(crate) fn unlimited() -> Self {
        Budget {
            max_cells: usize::MAX,
            max_operations: usize::MAX,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CompletionStatus {
    Finished,
    BudgetExceeded,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompletionStats {
    pub folds: usize,
    pub identifications: usize,
    pub attachments: usize,
    pub peak_cells: usize,
}

/// One line of the optional operation log.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRecord {
    pub op: &'static str,
    pub args: Vec<usize>,
    pub cells_after: usize,
}

/// Result of driving a completion sequence.
#[derive(Clone, Debug)]
pub struct CompletionOutcome {
    pub status: CompletionStatus,
    pub complex: CubeComplex,
    pub stats: CompletionStats,
    pub trace: Option<Vec<TraceRecord>>,
}

impl CompletionOutcome {
    pub fn is_finished(&self) -> bool {
        self.status == CompletionStatus::Finished
    }

    /// The operation log as JSONL, one record per line.
    pub fn trace_jsonl(&self) -> Option<String> {
        self.trace.as_ref().map(|records| {
            let mut out = String::new();
            for r in records {
                out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
                out.push('\n');
            }
            out
        })
    }
}

struct OpLog {
    budget: Budget,
    stats: CompletionStats,
    trace: Option<Vec<TraceRecord>>,
    tripped: bool,
}

impl OpLog {
    fn new(budget: Budget, want_trace: bool) -> Self {
        OpLog {
            budget,
            stats: CompletionStats::default(),
            trace: if want_trace { Some(Vec::new()) } else { None },
            tripped: false,
        }
    }

    fn ops(&self) -> usize {
        self.stats.folds + self.stats.identifications + self.stats.attachments
    }

    fn record(&mut self, op: &'static str, args: Vec<usize>, cells: usize) {
        match op {
            "fold" => self.stats.folds += 1,
            "identify" => self.stats.identifications += 1,
            "attach" => self.stats.attachments += 1,
            _ => unreachable!(),
        }
        self.stats.peak_cells = self.stats.peak_cells.max(cells);
        if let Some(t) = &mut self.trace {
            t.push(TraceRecord {
                op,
                args,
                cells_after: cells,
            });
        }
        if self.ops() > self.budget.max_operations || cells > self.budget.max_cells {
            self.tripped = true;
        }
    }
}

/// Exhausts folds, scanning vertices in ascending canonical order and
/// re-queuing every vertex touched by a merge. Returns `false` on budget.
fn fold_pass(c: &mut CubeComplex, log: &mut OpLog) -> bool {
    let mut work: BTreeSet<usize> = c.vertex_ids().into_iter().collect();
    while let Some(&v) = work.iter().next() {
        work.remove(&v);
        let mut v = c.canonical_vertex(v);
        loop {
            let mut seen: BTreeMap<GeneratorId, usize> = BTreeMap::new();
            let mut pair = None;
            for e in c.edges_at(v) {
                let label = c.edge_label(e);
                if let Some(&first) = seen.get(&label) {
                    pair = Some((first, e));
                    break;
                }
                seen.insert(label, e);
            }
            let Some((e1, e2)) = pair else { break };
            let merged = c.raw_fold(e1, e2, v);
            log.record("fold", vec![e1, e2], c.cell_count());
            if log.tripped {
                c.normalize_cells();
                return false;
            }
            work.insert(merged);
            v = c.canonical_vertex(v);
        }
    }
    c.normalize_cells();
    true
}

/// Identifies every class of equal-boundary cubes (one operation per
/// class). Identification never changes the 1-skeleton, so it cannot enable
/// new folds. Returns `false` on budget.
fn identify_pass(c: &mut CubeComplex, log: &mut OpLog) -> bool {
    loop {
        let Some((c1, c2)) = c.find_identifiable() else {
            return true;
        };
        c.identify_cubes(c1, c2)
            .expect("pair came from find_identifiable");
        log.record("identify", vec![c1, c2], c.cell_count());
        if log.tripped {
            return false;
        }
    }
}

fn exceeded(c: CubeComplex, log: OpLog) -> CompletionOutcome {
    CompletionOutcome {
        status: CompletionStatus::BudgetExceeded,
        complex: c,
        stats: log.stats,
        trace: log.trace,
    }
}

/// Runs the standard completion: fold and identify until folded, attach a
/// cube for every maximal missing tuple, repeat until cube-full or a budget
/// trips. Budget exhaustion is a status, not an error.
pub fn standard_complete(x: CubeComplex, budget: Budget, want_trace: bool) -> CompletionOutcome {
    let mut c = x;
    let mut log = OpLog::new(budget, want_trace);
    log.stats.peak_cells = c.cell_count();
    if c.cell_count() > budget.max_cells {
        log.tripped = true;
        return exceeded(c, log);
    }
    loop {
        if !fold_pass(&mut c, &mut log) || !identify_pass(&mut c, &mut log) {
            return exceeded(c, log);
        }
        let missing = c.missing_tuples();
        if missing.is_empty() {
            debug_assert!(c.is_folded());
            debug_assert!(c.validate().is_ok());
            return CompletionOutcome {
                status: CompletionStatus::Finished,
                complex: c,
                stats: log.stats,
                trace: log.trace,
            };
        }
        for (v, tuple) in missing {
            c.attach_cube(v, &tuple)
                .expect("missing tuple is attachable");
            log.record("attach", vec![v], c.cell_count());
            if log.tripped {
                return exceeded(c, log);
            }
        }
    }
}

/// Appends `s·s` for every vertex whose star covers the whole graph, so the
/// standard completion of the result is resolved.
pub fn resolve_generators(graph: &DefiningGraph, gens: &[Word]) -> Vec<Word> {
    let mut out = gens.to_vec();
    for s in graph.dominating_vertices() {
        out.push(Word(vec![s, s]));
    }
    out
}

/// Completes a finite folded cube-full complex after attaching graph-loops,
/// in a way that embeds the original complex isometrically: repeatedly pick
/// a maximal missing tuple (largest first), attach, and fold the new cells
/// among themselves and into matching graph-loops.
///
/// Returns the completed complex and the canonical ids of the edges that
/// are not images of the input complex; each of those is a graph-loop at an
/// original vertex, and both facts are asserted.
pub fn complete_with_graph_loops(
    omega: CubeComplex,
    loops: &[(usize, GeneratorId)],
) -> Result<(CubeComplex, Vec<usize>)> {
    let mut c = omega;
    if !c.is_folded() {
        return Err(Error::InvalidOperation(
            "graph-loop completion needs a folded complex".into(),
        ));
    }
    if c.find_missing_tuple()?.is_some() {
        return Err(Error::InvalidOperation(
            "graph-loop completion needs a cube-full complex".into(),
        ));
    }
    let original_vertices: Vec<usize> = c.vertex_ids();
    let distances_before = pairwise_distances(&c, &original_vertices)?;
    let edge_watermark = c.edge_ids().iter().max().map_or(0, |m| m + 1);

    let mut requested: BTreeSet<(usize, GeneratorId)> = BTreeSet::new();
    for &(v, s) in loops {
        requested.insert((c.canonical_vertex(v), s));
    }
    for &(v, s) in &requested {
        if c.edge_with_label_at(v, s).is_some() {
            return Err(Error::InvalidOperation(format!(
                "vertex {v} already has an edge labeled {s}"
            )));
        }
        c.add_edge(v, v, s, true)?;
    }

    let mut log = OpLog::new(Budget::unlimited(), false);
    // one attachment at a time, largest tuple first (smallest vertex and
    // tuple on ties), then fold and identify exhaustively; the number of
    // operations is bounded by the size of the loop-augmented complex
    let mut guard = 0usize;
    let guard_cap = 1000 + 200 * c.edge_count() * c.edge_count();
    loop {
        guard += 1;
        assert!(
            guard <= guard_cap,
            "graph-loop completion failed to terminate; this is a bug"
        );
        let mut best: Option<(usize, Vec<usize>)> = None;
        for (v, tuple) in c.missing_tuples() {
            let better = match &best {
                None => true,
                Some((bv, bt)) => {
                    (tuple.len(), std::cmp::Reverse((v, &tuple)))
                        > (bt.len(), std::cmp::Reverse((*bv, bt)))
                }
            };
            if better {
                best = Some((v, tuple));
            }
        }
        let Some((v, tuple)) = best else {
            break;
        };
        c.attach_cube(v, &tuple)
            .expect("missing tuple is attachable");
        log.record("attach", vec![v], c.cell_count());
        assert!(fold_pass(&mut c, &mut log) && identify_pass(&mut c, &mut log));
    }

    debug_assert!(c.is_folded());
    // every edge beyond the watermark must be a graph-loop at an original
    // vertex
    let mut new_edges = Vec::new();
    for e in c.edge_ids() {
        if e >= edge_watermark {
            let (a, b) = c.edge_endpoints(e);
            assert!(a == b, "new edge {e} is not a graph-loop; this is a bug");
            assert!(
                original_vertices.contains(&a),
                "new graph-loop sits at a non-original vertex; this is a bug"
            );
            new_edges.push(e);
        }
    }
    // isometry spot-check: the original vertices stay distinct at unchanged
    // pairwise distance
    for &v in &original_vertices {
        assert_eq!(
            c.canonical_vertex(v),
            v,
            "original vertices merged; this is a bug"
        );
    }
    let distances_after = pairwise_distances(&c, &original_vertices)?;
    assert_eq!(
        distances_before, distances_after,
        "embedding is not isometric; this is a bug"
    );
    Ok((c, new_edges))
}

fn pairwise_distances(c: &CubeComplex, verts: &[usize]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, &u) in verts.iter().enumerate() {
        for &v in verts.iter().skip(i + 1) {
            out.push(c.bfs_distance(u, v)?);
        }
    }
    Ok(out)
}

/// Completes a labeled finite tree. Always finishes without a budget and
/// the result is a finite complex with no graph-loops, no commuting bigons,
/// diameter at most the edge count of the tree, and contractible cycle
/// basis; all four facts are asserted before returning.
pub fn tree_complete(tree: CubeComplex) -> Result<CubeComplex> {
    if !tree.is_tree() {
        return Err(Error::InvalidOperation(
            "input complex is not a tree".into(),
        ));
    }
    let tree_edges = tree.edge_count();
    let outcome = standard_complete(tree, Budget::unlimited(), false);
    debug_assert!(outcome.is_finished());
    let c = outcome.complex;
    for e in c.edge_ids() {
        assert!(
            !c.is_graph_loop(e),
            "tree completion grew a graph-loop; this is a bug"
        );
    }
    assert!(
        !c.has_commuting_bigon(),
        "tree completion grew a commuting bigon; this is a bug"
    );
    assert!(
        c.diameter()? <= tree_edges,
        "tree completion exceeded the diameter bound; this is a bug"
    );
    for label in c.cycle_basis_labels()? {
        assert!(
            crate::word::is_trivial(c.graph(), &label),
            "tree completion has an essential cycle; this is a bug"
        );
    }
    Ok(c)
}
