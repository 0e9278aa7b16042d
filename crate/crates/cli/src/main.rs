//! Command-line front end: builds completions of finitely generated
//! subgroups of right-angled Coxeter groups and prints JSON verdicts.
//!
//! Exit codes: 0 when a question was decided, 2 when a budget or search cap
//! left it unknown, 1 on errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use racg_core::analysis::{separate, IndexVerdict, QcVerdict, SubgroupHandle};
use racg_core::embed::{
    compute_m, decide_embeddability, reflection_count_up_to, EmbedVerdict, SearchCaps,
};
use racg_core::engine::Budget;
use racg_core::reflection::{
    involutions_to_reflections, reflection_completion, standard_gens_graph, trim, ReflectionSet,
};
use racg_core::{DefiningGraph, Word};

const EXIT_UNKNOWN: u8 = 2;

#[derive(Parser)]
#[command(
    name = "racg",
    version,
    about = "Subgroup properties of right-angled Coxeter groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GraphArg {
    /// Path to the defining graph, JSON: {"vertices": [...], "edges": [[..]]}
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args, Clone)]
struct GensArg {
    /// Generating words inline: letters space-separated, words comma-separated
    #[arg(long)]
    gens: Option<String>,
    /// File with generating words (same format; newlines work like commas)
    #[arg(long)]
    gens_file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct BudgetArg {
    /// Cell budget for completions (default 50000, env RACG_MAX_CELLS)
    #[arg(long)]
    max_cells: Option<usize>,
    /// Operation budget for completions (default 500000, env RACG_MAX_OPS)
    #[arg(long)]
    max_ops: Option<usize>,
}

#[derive(Args, Clone)]
struct OutArg {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a standard completion and report its outcome
    Complete {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[command(flatten)]
        budget: BudgetArg,
        /// Write the operation log (JSONL) to this path
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also emit the finished complex: json or dot
        #[arg(long)]
        format: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Is a word a member of the subgroup?
    Member {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[command(flatten)]
        budget: BudgetArg,
        /// The word, letters space-separated
        #[arg(long)]
        word: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Quasiconvexity via finiteness of the completion
    Qc {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[command(flatten)]
        budget: BudgetArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Index of the subgroup (finite, infinite or unknown)
    Index {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[command(flatten)]
        budget: BudgetArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Torsion-freeness of the subgroup
    Torsion {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[command(flatten)]
        budget: BudgetArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Normality of the subgroup
    Normal {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[command(flatten)]
        budget: BudgetArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Does some positive power of the word lie in the subgroup?
    PowerMember {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[command(flatten)]
        budget: BudgetArg,
        #[arg(long)]
        word: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// The core graph at the basepoint
    Core {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[command(flatten)]
        budget: BudgetArg,
        /// json (default) or dot
        #[arg(long, default_value = "json")]
        format: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// A finite-index overgroup excluding the given nontrivial word
    Separate {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        word: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Reflection-set operations
    Reflect {
        #[command(subcommand)]
        what: ReflectCommand,
    },
    /// Rewrite involution generators as a trimmed reflection set
    ConvertInvolutions {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        /// Relation graph of the presented group (one vertex per generator)
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Does the target RACG embed with finite index?
    Embed {
        #[command(flatten)]
        graph: GraphArg,
        /// Defining graph of the candidate subgroup
        #[arg(long)]
        target: PathBuf,
        /// Conjugator length cap for the witness search
        #[arg(long, default_value_t = 2)]
        caps_len: usize,
        /// Maximum number of verified candidates
        #[arg(long, default_value_t = 50_000)]
        max_candidates: usize,
        #[command(flatten)]
        budget: BudgetArg,
        /// Write the witness reflection set here on a yes
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Export the completion as DOT or JSON
    Export {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[command(flatten)]
        budget: BudgetArg,
        /// dot or json
        #[arg(long, default_value = "dot")]
        format: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum ReflectCommand {
    /// Trim a reflection set
    Trim {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        input: ReflectInput,
        #[command(flatten)]
        out: OutArg,
    },
    /// Complete a reflection subgroup (always finite)
    Complete {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        input: ReflectInput,
        /// Also emit the complex: json or dot
        #[arg(long)]
        format: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// The standard generating-set graph of a trimmed reflection set
    Gens {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        input: ReflectInput,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Clone)]
struct ReflectInput {
    /// JSON file: [{"conjugator": "d a c", "core": "b"}, ...]
    #[arg(long)]
    reflections: Option<PathBuf>,
    /// Inline reflection words (same format as --gens)
    #[arg(long)]
    gens: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

fn load_graph(arg: &GraphArg) -> Result<DefiningGraph, AnyError> {
    let data = fs::read_to_string(&arg.graph)?;
    Ok(DefiningGraph::from_json(&data)?)
}

fn parse_words(graph: &DefiningGraph, text: &str) -> Result<Vec<Word>, AnyError> {
    let mut out = Vec::new();
    for chunk in text.split([',', '\n']) {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        out.push(Word::parse(graph, chunk)?);
    }
    Ok(out)
}

fn load_gens(graph: &DefiningGraph, arg: &GensArg) -> Result<Vec<Word>, AnyError> {
    match (&arg.gens, &arg.gens_file) {
        (Some(inline), None) => parse_words(graph, inline),
        (None, Some(path)) => parse_words(graph, &fs::read_to_string(path)?),
        (Some(_), Some(_)) => Err("pass either --gens or --gens-file, not both".into()),
        (None, None) => Err("a generating set is required (--gens or --gens-file)".into()),
    }
}

fn budget_from(arg: &BudgetArg) -> Result<Budget, AnyError> {
    let env_cells = env_usize("RACG_MAX_CELLS")?;
    let env_ops = env_usize("RACG_MAX_OPS")?;
    let default = Budget::default();
    let budget = Budget {
        max_cells: arg.max_cells.or(env_cells).unwrap_or(default.max_cells),
        max_operations: arg.max_ops.or(env_ops).unwrap_or(default.max_operations),
    };
    if budget.max_cells == 0 || budget.max_operations == 0 {
        return Err("budgets must be positive".into());
    }
    Ok(budget)
}

fn env_usize(name: &str) -> Result<Option<usize>, AnyError> {
    match std::env::var(name) {
        Ok(v) => Ok(Some(
            v.parse::<usize>().map_err(|_| format!("bad {name}: {v}"))?,
        )),
        Err(_) => Ok(None),
    }
}

fn emit(out: &OutArg, report: &Value) -> Result<(), AnyError> {
    let text = serde_json::to_string_pretty(report)?;
    match &out.out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn emit_text(out: &OutArg, text: &str) -> Result<(), AnyError> {
    match &out.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn handle_for(
    graph: &DefiningGraph,
    gens: &GensArg,
    budget: &BudgetArg,
) -> Result<(SubgroupHandle, Budget), AnyError> {
    let words = load_gens(graph, gens)?;
    let budget = budget_from(budget)?;
    Ok((SubgroupHandle::new(graph.clone(), words, budget)?, budget))
}

fn load_reflections(
    graph: &DefiningGraph,
    input: &ReflectInput,
) -> Result<ReflectionSet, AnyError> {
    match (&input.reflections, &input.gens) {
        (Some(path), None) => {
            let data = fs::read_to_string(path)?;
            let entries: Vec<Value> = serde_json::from_str(&data)?;
            let mut words = Vec::new();
            for entry in entries {
                let conj = entry
                    .get("conjugator")
                    .and_then(Value::as_str)
                    .ok_or("reflection entry needs a string `conjugator`")?;
                let core = entry
                    .get("core")
                    .and_then(Value::as_str)
                    .ok_or("reflection entry needs a string `core`")?;
                let text = format!("{conj} {core} {}", reverse_word_text(conj));
                words.push(Word::parse(graph, text.trim())?);
            }
            Ok(ReflectionSet::from_words(graph, &words)?)
        }
        (None, Some(inline)) => {
            let words = parse_words(graph, inline)?;
            Ok(ReflectionSet::from_words(graph, &words)?)
        }
        _ => Err("pass either --reflections or --gens".into()),
    }
}

fn reverse_word_text(text: &str) -> String {
    text.split_whitespace().rev().collect::<Vec<_>>().join(" ")
}

fn reflections_json(graph: &DefiningGraph, set: &ReflectionSet) -> Value {
    Value::Array(
        set.reflections
            .iter()
            .map(|r| {
                json!({
                    "conjugator": r.conjugator.display(graph),
                    "core": graph.name(r.core),
                })
            })
            .collect(),
    )
}

fn complex_payload(c: &racg_core::CubeComplex, format: &str) -> Result<String, AnyError> {
    match format {
        "json" => Ok(c.to_json()),
        "dot" => Ok(c.to_dot()),
        other => Err(format!("unsupported format `{other}` (use json or dot)").into()),
    }
}

fn run(command: Command) -> Result<u8, AnyError> {
    match command {
        Command::Complete {
            graph,
            gens,
            budget,
            trace,
            format,
            out,
        } => {
            let g = load_graph(&graph)?;
            let words = load_gens(&g, &gens)?;
            let budget = budget_from(&budget)?;
            let handle = SubgroupHandle::with_trace(g, words, budget, trace.is_some())?;
            let outcome = handle.outcome();
            if let (Some(path), Some(log)) = (&trace, outcome.trace_jsonl()) {
                fs::write(path, log)?;
            }
            let c = handle.complex();
            let mut report = json!({
                "status": if outcome.is_finished() { "finished" } else { "budget-exceeded" },
                "vertices": c.vertex_count(),
                "edges": c.edge_count(),
                "cubes": c.cube_count(),
                "stats": {
                    "folds": outcome.stats.folds,
                    "identifications": outcome.stats.identifications,
                    "attachments": outcome.stats.attachments,
                    "peak_cells": outcome.stats.peak_cells,
                },
            });
            if let Some(format) = format {
                let payload = complex_payload(c, &format)?;
                if format == "json" {
                    report["complex"] = serde_json::from_str(&payload)?;
                } else {
                    report["complex"] = Value::String(payload);
                }
            }
            emit(&out, &report)?;
            Ok(if outcome.is_finished() {
                0
            } else {
                EXIT_UNKNOWN
            })
        }
        Command::Member {
            graph,
            gens,
            budget,
            word,
            out,
        } => {
            let g = load_graph(&graph)?;
            let (handle, _) = handle_for(&g, &gens, &budget)?;
            let w = Word::parse(&g, &word)?;
            if !handle.is_finished() {
                emit(&out, &json!({"verdict": "unknown"}))?;
                return Ok(EXIT_UNKNOWN);
            }
            let member = handle.membership(&w)?;
            emit(
                &out,
                &json!({"verdict": if member { "member" } else { "non-member" }}),
            )?;
            Ok(0)
        }
        Command::Qc {
            graph,
            gens,
            budget,
            out,
        } => {
            let g = load_graph(&graph)?;
            let (handle, _) = handle_for(&g, &gens, &budget)?;
            match handle.quasiconvexity() {
                QcVerdict::Quasiconvex { constant } => {
                    emit(&out, &json!({"verdict": "quasiconvex", "M": constant}))?;
                    Ok(0)
                }
                QcVerdict::Unknown => {
                    emit(
                        &out,
                        &json!({
                            "verdict": "unknown",
                            "peak_cells": handle.outcome().stats.peak_cells,
                        }),
                    )?;
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::Index {
            graph,
            gens,
            budget,
            out,
        } => {
            let g = load_graph(&graph)?;
            let (handle, b) = handle_for(&g, &gens, &budget)?;
            match handle.index(b)? {
                IndexVerdict::Finite {
                    index,
                    representatives,
                } => {
                    let reps: Vec<String> = representatives.iter().map(|w| w.display(&g)).collect();
                    emit(
                        &out,
                        &json!({"verdict": "finite", "index": index, "representatives": reps}),
                    )?;
                    Ok(0)
                }
                IndexVerdict::Infinite => {
                    emit(&out, &json!({"verdict": "infinite"}))?;
                    Ok(0)
                }
                IndexVerdict::Unknown => {
                    emit(&out, &json!({"verdict": "unknown"}))?;
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::Torsion {
            graph,
            gens,
            budget,
            out,
        } => {
            let g = load_graph(&graph)?;
            let (handle, _) = handle_for(&g, &gens, &budget)?;
            if !handle.is_finished() {
                emit(&out, &json!({"verdict": "unknown"}))?;
                return Ok(EXIT_UNKNOWN);
            }
            let free = handle.is_torsion_free()?;
            emit(
                &out,
                &json!({"verdict": if free { "torsion-free" } else { "has-torsion" }}),
            )?;
            Ok(0)
        }
        Command::Normal {
            graph,
            gens,
            budget,
            out,
        } => {
            let g = load_graph(&graph)?;
            let (handle, _) = handle_for(&g, &gens, &budget)?;
            if !handle.is_finished() {
                emit(&out, &json!({"verdict": "unknown"}))?;
                return Ok(EXIT_UNKNOWN);
            }
            let report = handle.is_normal()?;
            let delta: Vec<&str> = report.delta.iter().map(|&s| g.name(s)).collect();
            emit(
                &out,
                &json!({
                    "verdict": if report.verdict { "normal" } else { "not-normal" },
                    "delta": delta,
                    "n1": report.n1_ok,
                    "n2": report.n2_ok,
                }),
            )?;
            Ok(0)
        }
        Command::PowerMember {
            graph,
            gens,
            budget,
            word,
            out,
        } => {
            let g = load_graph(&graph)?;
            let (handle, _) = handle_for(&g, &gens, &budget)?;
            let w = Word::parse(&g, &word)?;
            if !handle.is_finished() {
                emit(&out, &json!({"verdict": "unknown"}))?;
                return Ok(EXIT_UNKNOWN);
            }
            let yes = handle.power_membership(&w)?;
            emit(&out, &json!({"verdict": if yes { "yes" } else { "no" }}))?;
            Ok(0)
        }
        Command::Core {
            graph,
            gens,
            budget,
            format,
            out,
        } => {
            let g = load_graph(&graph)?;
            let (handle, _) = handle_for(&g, &gens, &budget)?;
            if !handle.is_finished() {
                emit(&out, &json!({"verdict": "unknown"}))?;
                return Ok(EXIT_UNKNOWN);
            }
            let core = handle.core_graph()?;
            match format.as_str() {
                "json" => {
                    let edges: Vec<Value> = core
                        .edges
                        .iter()
                        .map(|&(u, v, l)| json!([u, v, g.name(l)]))
                        .collect();
                    emit(
                        &out,
                        &json!({"root": core.root, "vertices": core.vertices, "edges": edges}),
                    )?;
                }
                "dot" => {
                    let mut dot = String::from("graph core {\n");
                    dot.push_str(&format!("  v{} [shape=doublecircle];\n", core.root));
                    for &v in core.vertices.iter().filter(|&&v| v != core.root) {
                        dot.push_str(&format!("  v{v};\n"));
                    }
                    for &(u, v, l) in &core.edges {
                        dot.push_str(&format!("  v{u} -- v{v} [label=\"{}\"];\n", g.name(l)));
                    }
                    dot.push_str("}\n");
                    emit_text(&out, &dot)?;
                }
                other => return Err(format!("unsupported format `{other}`").into()),
            }
            Ok(0)
        }
        Command::Separate { graph, word, out } => {
            let g = load_graph(&graph)?;
            let w = Word::parse(&g, &word)?;
            let (overgroup, index) = separate(&g, &w)?;
            let excluded = overgroup.membership(&w)?;
            emit(
                &out,
                &json!({
                    "verdict": "separated",
                    "index": index,
                    "word": w.display(&g),
                    "still-member": excluded,
                }),
            )?;
            Ok(0)
        }
        Command::Reflect { what } => run_reflect(what),
        Command::ConvertInvolutions {
            graph,
            gens,
            target,
            out,
        } => {
            let g = load_graph(&graph)?;
            let words = load_gens(&g, &gens)?;
            let relations = DefiningGraph::from_json(&fs::read_to_string(&target)?)?;
            let set = involutions_to_reflections(&g, &words, &relations)?;
            emit(
                &out,
                &json!({"reflections": reflections_json(&g, &set), "trimmed": true}),
            )?;
            Ok(0)
        }
        Command::Embed {
            graph,
            target,
            caps_len,
            max_candidates,
            budget,
            witness_out,
            out,
        } => {
            let g = load_graph(&graph)?;
            let t = DefiningGraph::from_json(&fs::read_to_string(&target)?)?;
            let caps = SearchCaps {
                max_conjugator_length: caps_len,
                max_candidates,
                budget: budget_from(&budget)?,
            };
            let theoretical = compute_m(&g, t.vertex_count().max(1));
            let effective = caps.max_conjugator_length.min(theoretical);
            let refls = reflection_count_up_to(&g, effective);
            eprintln!(
                "searching reflection sets of size {} drawn from {refls} reflections with \
                 conjugators up to {effective} (theoretical bound {theoretical}, at most \
                 {} candidate sets)",
                t.vertex_count(),
                binomial_estimate(refls, t.vertex_count()),
            );
            match decide_embeddability(&g, &t, &caps)? {
                EmbedVerdict::Yes { witness, index } => {
                    let witness_json = reflections_json(&g, &witness);
                    if let Some(path) = witness_out {
                        fs::write(path, serde_json::to_string_pretty(&witness_json)? + "\n")?;
                    }
                    emit(
                        &out,
                        &json!({"verdict": "yes", "index": index, "witness": witness_json}),
                    )?;
                    Ok(0)
                }
                EmbedVerdict::No => {
                    emit(&out, &json!({"verdict": "no"}))?;
                    Ok(0)
                }
                EmbedVerdict::ResourcesExhausted { candidates_tried } => {
                    emit(
                        &out,
                        &json!({"verdict": "exhausted", "candidates_tried": candidates_tried}),
                    )?;
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::Export {
            graph,
            gens,
            budget,
            format,
            out,
        } => {
            let g = load_graph(&graph)?;
            let (handle, _) = handle_for(&g, &gens, &budget)?;
            if !handle.is_finished() {
                return Err("completion exceeded its budget; nothing to export".into());
            }
            let payload = complex_payload(handle.complex(), &format)?;
            emit_text(&out, &payload)?;
            Ok(0)
        }
    }
}

fn binomial_estimate(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut out: u128 = 1;
    for i in 0..k {
        out = out.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    out
}

fn run_reflect(what: ReflectCommand) -> Result<u8, AnyError> {
    match what {
        ReflectCommand::Trim { graph, input, out } => {
            let g = load_graph(&graph)?;
            let set = load_reflections(&g, &input)?;
            let trimmed = trim(&g, &set)?;
            emit(
                &out,
                &json!({"reflections": reflections_json(&g, &trimmed), "trimmed": true}),
            )?;
            Ok(0)
        }
        ReflectCommand::Complete {
            graph,
            input,
            format,
            out,
        } => {
            let g = load_graph(&graph)?;
            let set = load_reflections(&g, &input)?;
            let outcome = reflection_completion(&g, &set)?;
            let c = &outcome.complex;
            let mut report = json!({
                "status": "finished",
                "vertices": c.vertex_count(),
                "edges": c.edge_count(),
                "cubes": c.cube_count(),
            });
            if let Some(format) = format {
                let payload = complex_payload(c, &format)?;
                if format == "json" {
                    report["complex"] = serde_json::from_str(&payload)?;
                } else {
                    report["complex"] = Value::String(payload);
                }
            }
            emit(&out, &report)?;
            Ok(0)
        }
        ReflectCommand::Gens { graph, input, out } => {
            let g = load_graph(&graph)?;
            let set = load_reflections(&g, &input)?;
            let trimmed = trim(&g, &set)?;
            let delta = standard_gens_graph(&g, &trimmed)?;
            let parsed: Value = serde_json::from_str(&delta.to_json())?;
            emit(&out, &parsed)?;
            Ok(0)
        }
    }
}
