//! The `bwc` command line: decide, synthesize, verify, simulate and
//! cross-check beyond-worst-case parity queries on MDP files.

pub mod prop;
pub mod query;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use bwc_core::bwc::sure_parity_region;
use bwc_core::components::{ugec_states, vgec_states};
use bwc_core::games::{solve_parity, Game};
use bwc_core::model::sub_mdp;
use bwc_core::oracle::{brute_parity_game, brute_ugec_vgec};
use bwc_core::strategies::StrategyDocument;
use bwc_core::verify::simulate;
use bwc_core::{parse_mdp, Mdp, PriorityView, StateSet};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use prop::PropertyExpr;
pub use query::{decide_property, verify_property};

#[derive(Debug, Parser)]
#[command(name = "bwc", version, about = "Beyond-worst-case parity synthesis on MDPs")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Query {
    model: PathBuf,
    /// Start state id; defaults to the model's initial state.
    #[arg(long)]
    from: Option<String>,
    /// Property such as "S(p1)&AS(p2)" or "S(p1)&P>1/2(p2)".
    #[arg(long)]
    prop: PropertyExpr,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide a property and print the verdict with its stage trace.
    Solve(Query),
    /// Decide a property and write the witness strategy.
    Synth {
        #[command(flatten)]
        query: Query,
        /// Output file for the strategy document.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Check a strategy document against a property.
    Verify {
        model: PathBuf,
        strategy: PathBuf,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        prop: PropertyExpr,
    },
    /// Sample plays of a strategy.
    Simulate {
        model: PathBuf,
        strategy: PathBuf,
        #[arg(long)]
        from: Option<String>,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        #[arg(long, env = "BWC_SEED", default_value_t = 0)]
        seed: u64,
        /// Include per-run summaries in the report.
        #[arg(long)]
        details: bool,
    },
    /// Compare the fast algorithms with brute-force enumeration.
    Oracle { model: PathBuf },
    /// Report the ultra-good and very-good end-components.
    Components { model: PathBuf },
}

/// Runs the command line and returns the exit code: 0 for YES (or success),
/// 1 for NO (or a failed check), 2 for errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

fn load_model(path: &Path) -> anyhow::Result<Arc<Mdp>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Arc::new(parse_mdp(&text).with_context(|| format!("parsing {}", path.display()))?))
}

fn start_state(m: &Mdp, from: Option<&str>) -> anyhow::Result<usize> {
    match from {
        Some(id) => m.index_of(id).with_context(|| format!("unknown state `{id}`")),
        None => m.init().context("model has no initial state, pass --from"),
    }
}

fn load_strategy(m: &Mdp, path: &Path) -> anyhow::Result<bwc_core::strategies::StrategySpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: StrategyDocument = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(doc.bind(m)?.clone())
}

fn print_json(out: &mut dyn Write, value: &serde_json::Value) -> anyhow::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn verdict_code(yes: bool) -> i32 {
    if yes {
        0
    } else {
        1
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    match cli.command {
        Command::Solve(q) => solve(&q, None, cli.json, out),
        Command::Synth { query, out: path } => solve(&query, Some(&path), cli.json, out),
        Command::Verify { model, strategy, from, prop } => {
            let m = load_model(&model)?;
            let s0 = start_state(&m, from.as_deref())?;
            let spec = load_strategy(&m, &strategy)?;
            let (holds, report) = verify_property(&m, &spec, s0, &prop)?;
            if cli.json {
                print_json(out, &json!({"property": prop.to_string(), "from": m.id(s0), "holds": holds, "report": report}))?;
            } else {
                writeln!(out, "{}", if holds { "YES" } else { "NO" })?;
                writeln!(out, "  {report}")?;
                if let bwc_core::verify::SureVerdict::Violated { lasso } = &report.sure {
                    writeln!(out, "  counterexample: {}", lasso.display(&m))?;
                }
                for note in &report.notes {
                    writeln!(out, "  note: {note}")?;
                }
            }
            Ok(verdict_code(holds))
        }
        Command::Simulate { model, strategy, from, runs, steps, seed, details } => {
            let m = load_model(&model)?;
            let s0 = start_state(&m, from.as_deref())?;
            let spec = load_strategy(&m, &strategy)?;
            let report = simulate(&m, &spec, s0, runs, steps, seed, details)?;
            if cli.json {
                print_json(out, &serde_json::to_value(&report)?)?;
            } else {
                writeln!(out, "runs {} steps {} seed {}", report.runs, report.steps, report.seed)?;
                writeln!(out, "violations {}", report.violations)?;
                writeln!(out, "runs switched for good {}", report.runs_switched)?;
                writeln!(
                    out,
                    "last window ({} steps) with even max priority: p1 {:.4}, p2 {:.4}",
                    report.window, report.window_even.0, report.window_even.1
                )?;
                for r in report.rounds.iter().take(12) {
                    writeln!(out, "round {}: {} completed, {} missed", r.round, r.completed, r.missed)?;
                }
                writeln!(out, "fingerprint {:016x}", report.fingerprint)?;
            }
            Ok(verdict_code(report.violations == 0))
        }
        Command::Oracle { model } => {
            let m = load_model(&model)?;
            let (u_brute, v_brute) = brute_ugec_vgec(&m)?;
            let u_fast = ugec_states(&m).union;
            let v_fast = vgec_union(&m);
            let mut rows = Vec::new();
            rows.push(("ugec", u_fast, u_brute));
            rows.push(("vgec", v_fast, v_brute));
            for view in [PriorityView::P1, PriorityView::P2] {
                let g = Game::from_mdp(&m, view);
                let name = if view == PriorityView::P1 { "sure-p1" } else { "sure-p2" };
                rows.push((name, solve_parity(&g).w1, brute_parity_game(&g)?));
            }
            let all_match = rows.iter().all(|(_, a, b)| a == b);
            if cli.json {
                let items: Vec<_> = rows
                    .iter()
                    .map(|(name, a, b)| json!({"check": name, "fast": m.ids_of(a), "brute": m.ids_of(b), "match": a == b}))
                    .collect();
                print_json(out, &json!({"checks": items, "match": all_match}))?;
            } else {
                for (name, a, b) in &rows {
                    let tag = if a == b { "ok" } else { "MISMATCH" };
                    writeln!(out, "{name:8} {tag:8} fast {:?} brute {:?}", m.ids_of(a), m.ids_of(b))?;
                }
            }
            Ok(verdict_code(all_match))
        }
        Command::Components { model } => {
            let m = load_model(&model)?;
            let ugec = ugec_states(&m);
            let v = vgec_union(&m);
            if cli.json {
                let candidates: Vec<_> = ugec
                    .candidates
                    .iter()
                    .map(|c| json!({"states": m.ids_of(&c.states), "cond2": c.cond2, "cond1u": c.cond1u}))
                    .collect();
                let ugecs: Vec<_> = ugec.ugecs.iter().map(|u| m.ids_of(&u.component)).collect();
                print_json(
                    out,
                    &json!({"ugec_union": m.ids_of(&ugec.union), "ugecs": ugecs, "vgec_union": m.ids_of(&v), "candidates": candidates}),
                )?;
            } else {
                writeln!(out, "U = {:?}", m.ids_of(&ugec.union))?;
                writeln!(out, "V = {:?}", m.ids_of(&v))?;
                for c in &ugec.candidates {
                    let c1 = c.cond1u.map_or("-".to_string(), |b| b.to_string());
                    writeln!(out, "candidate {:?}: cond2 {} cond1u {}", m.ids_of(&c.states), c.cond2, c1)?;
                }
            }
            Ok(0)
        }
    }
}

/// Very-good components, found inside the region where S(p1) holds.
fn vgec_union(m: &Mdp) -> StateSet {
    let win = sure_parity_region(m);
    match sub_mdp(m, &win) {
        Ok(sub) => sub.lift_set(&vgec_states(&sub.mdp).union),
        Err(_) => StateSet::new(m.len()),
    }
}

fn solve(q: &Query, write_to: Option<&Path>, as_json: bool, out: &mut dyn Write) -> anyhow::Result<i32> {
    let m = load_model(&q.model)?;
    let s0 = start_state(&m, q.from.as_deref())?;
    let decision = decide_property(&m, s0, &q.prop)?;
    let write_to = write_to.filter(|_| decision.is_yes());
    if let (Some(path), Some(w)) = (write_to, &decision.witness) {
        let doc = StrategyDocument::new(&m, w.clone());
        std::fs::write(path, serde_json::to_string_pretty(&doc)?).with_context(|| format!("writing {}", path.display()))?;
    }
    if as_json {
        let mut value = serde_json::to_value(&decision)?;
        value["property"] = json!(q.prop.to_string());
        value["from"] = json!(m.id(s0));
        if write_to.is_some() {
            value.as_object_mut().expect("decisions serialize to objects").remove("witness");
        }
        print_json(out, &value)?;
    } else {
        writeln!(out, "{}", decision.verdict)?;
        if let Some(reason) = &decision.reason {
            writeln!(out, "  reason: {reason}")?;
        }
        for st in &decision.trace {
            writeln!(out, "  {}: {}", st.name, st.detail)?;
        }
        if let Some(w) = &decision.witness {
            writeln!(out, "  witness: {}", w.construction())?;
        }
    }
    Ok(verdict_code(decision.is_yes()))
}
