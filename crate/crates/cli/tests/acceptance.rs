//! Acceptance checks. Each test prints one `[PASS]`/`[FAIL]` line straight to
//! stderr (bypassing the test harness capture) and then asserts.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use bwc_cli::{decide_property, run_with, verify_property, PropertyExpr};
use bwc_core::bwc::{decide_sure_as, sure_parity_region};
use bwc_core::components::{check_cond1u, check_cond2, ugec_states, vgec_states};
use bwc_core::games::{build_buchi_parity_game, solve_buchi_parity_arena, solve_buchi_parity_game, solve_parity, Game};
use bwc_core::model::sub_mdp;
use bwc_core::oracle::{
    brute_buchi_parity, brute_parity_game, brute_ugec_vgec, pure_moore_tables, random_game, random_mdp, OracleError,
};
use bwc_core::reach::{bellman_residual, decide_sure_parity_threshold_reach, max_reach_values, Cmp};
use bwc_core::strategies::counter::ugec_bound;
use bwc_core::strategies::{Distribution, MooreTable, PreparedStrategy, StrategySpec};
use bwc_core::verify::{check_sure_parity, exact_parity_probability, simulate, Objective};
use bwc_core::{parse_mdp, Mdp, Owner, PriorityView, Rational, StateSet};
use num::{One, Zero};

/// Seed of the statistical simulation.
const SIM_SEED: u64 = 20_240_601;
/// Runs and steps of the statistical simulation.
const SIM_RUNS: u64 = 10_000;
const SIM_STEPS: u64 = 10_000;
/// Rounds whose miss frequency is tested.
const SIM_ROUNDS: u64 = 6;
/// Allowed excess of an observed frequency over its bound, in standard
/// deviations of a binomial proportion at the bound.
const SIGMAS: f64 = 3.0;
/// Random models per state count in the oracle comparison.
const ORACLE_MODELS: u64 = 200;
/// Strategy count above which a gadget game is not cross-checked by
/// enumeration (random games cover the Büchi solver in full).
const GADGET_ENUMERATION_CAP: u64 = 200_000;

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] criterion {criterion} ({name}): {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(format!("{name}.json"))
}

fn load(name: &str) -> Arc<Mdp> {
    Arc::new(parse_mdp(&std::fs::read_to_string(model_path(name)).unwrap()).unwrap())
}

/// Runs the command line; returns the exit code and stdout.
fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bwc").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn first_line(text: &str) -> &str {
    text.lines().next().unwrap_or("")
}

fn ids(m: &Mdp, set: &StateSet) -> Vec<String> {
    m.ids_of(set)
}

fn v_union(m: &Mdp) -> StateSet {
    let w = sure_parity_region(m);
    match sub_mdp(m, &w) {
        Ok(sub) => sub.lift_set(&vgec_states(&sub.mdp).union),
        Err(_) => StateSet::new(m.len()),
    }
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn component_strategy(m: &Arc<Mdp>, from: &str) -> StrategySpec {
    let d = decide_sure_as(m, m.index_of(from).unwrap()).unwrap();
    match d.witness.unwrap() {
        StrategySpec::Composite { switches, .. } => switches[0].inner.clone(),
        other => panic!("expected a composite witness, got {}", other.construction()),
    }
}

#[test]
fn criterion_1_fig1_golden() {
    let path = model_path("fig1");
    let start = Instant::now();
    let (code, out) = cli(&["solve", path.to_str().unwrap(), "--from", "a", "--prop", "S(p1)&AS(p2)"]);
    let took = start.elapsed();
    let pass = code == 0 && first_line(&out) == "YES" && took < Duration::from_secs(1);
    report(1, "FIG1 sure and almost-sure", pass, &format!("verdict {}, exit {code}, {took:.2?} (limit 1 s)", first_line(&out)));
}

#[test]
fn criterion_2_fig2_golden() {
    let m = load("fig2");
    let all = m.all_states();
    let u = ugec_states(&m).union;
    let cond1 = check_cond1u(&m, &all);
    let cond2 = check_cond2(&m, &all);
    let d = cond2.sub_component.clone().unwrap_or_else(|| StateSet::new(m.len()));
    let c = m.index_of("c").unwrap();
    let pure = MooreTable::from_choices(&(0..m.len()).map(|s| (s == c).then(|| m.index_of("d").unwrap())).collect::<Vec<_>>());
    let sure = check_sure_parity(&m, &pure, PriorityView::P1, c).unwrap().holds();
    let lambda2 = cond2.lambda2.clone().unwrap();
    let both_one = (0..m.len()).all(|s| exact_parity_probability(&m, &lambda2, s, &Objective::Both).unwrap().is_one());
    let pass = u == all && cond1.pass && cond2.pass && d == m.set_of(&["a", "b", "c"]).unwrap() && sure && both_one;
    report(
        2,
        "FIG2 components and witnesses",
        pass,
        &format!(
            "U = {:?}, cond1U {}, cond2 {} with D = {:?}, c->d sure p1 {}, P(p1 and p2) = 1 from every state {}",
            ids(&m, &u),
            cond1.pass,
            cond2.pass,
            ids(&m, &d),
            sure,
            both_one
        ),
    );
}

#[test]
fn criterion_3_fig3_golden() {
    let m = load("fig3");
    let path = model_path("fig3");
    let path = path.to_str().unwrap();
    let v = v_union(&m);
    let u = ugec_states(&m).union;
    let (as_code, as_out) = cli(&["solve", path, "--from", "a", "--prop", "S(p1)&AS(p2)"]);
    let mut ok = v == m.set_of(&["a", "b", "c"]).unwrap() && u.is_empty() && as_code == 1 && first_line(&as_out) == "NO";
    let mut detail = format!("V = {:?}, U = {:?}, AS verdict {} (exit {as_code})", ids(&m, &v), ids(&m, &u), first_line(&as_out));
    for eps in ["1/2", "1/10", "1/100"] {
        let prop = format!("S(p1)&P>1-{eps}(p2)");
        let (code, out) = cli(&["solve", path, "--from", "a", "--prop", &prop]);
        ok &= code == 0 && first_line(&out) == "YES";
        detail.push_str(&format!(", eps {eps}: {}", first_line(&out)));
    }
    report(3, "FIG3 limit-sure but not almost-sure", ok, &detail);
}

/// Pure Moore strategies with one or two memory states satisfying
/// `S(p1)` and `P(p2) ~ c` from `s0`.
fn finite_memory_witnesses(m: &Mdp, s0: usize, accept: impl Fn(&Rational) -> bool) -> (usize, usize) {
    let mut tried = 0;
    let mut found = 0;
    for k in 1..=2 {
        for table in pure_moore_tables(m, k) {
            tried += 1;
            if !check_sure_parity(m, &table, PriorityView::P1, s0).unwrap().holds() {
                continue;
            }
            let p = exact_parity_probability(m, &table, s0, &Objective::Parity(PriorityView::P2)).unwrap();
            if accept(&p) {
                found += 1;
            }
        }
    }
    (tried, found)
}

#[test]
fn criterion_4_infinite_memory_needed() {
    let fig2 = load("fig2");
    let start = Instant::now();
    let (tried2, found2) = finite_memory_witnesses(&fig2, fig2.index_of("c").unwrap(), |p| p.is_one());
    let t2 = start.elapsed();
    // On FIG3's very-good component alone S(p1) already fails, so the
    // enumeration runs on the whole model, where the property holds.
    let fig3 = load("fig3");
    let start = Instant::now();
    let half = rat(1, 2);
    let (tried3, found3) = finite_memory_witnesses(&fig3, fig3.index_of("a").unwrap(), |p| *p > half);
    let t3 = start.elapsed();
    let limit = Duration::from_secs(60);
    let pass = found2 == 0 && found3 == 0 && t2 < limit && t3 < limit && tried2 > 0 && tried3 > 0;
    report(
        4,
        "no finite-memory witness",
        pass,
        &format!(
            "FIG2 from c: {found2} of {tried2} pure Moore strategies (memory <= 2) give S(p1) and P(p2) = 1 in {t2:.2?}; \
             FIG3 from a: {found3} of {tried3} give S(p1) and P(p2) > 1/2 in {t3:.2?} (limit 60 s each)"
        ),
    );
}

#[test]
fn criterion_5_oracle_equivalence() {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut models = 0;
    let mut games = 0;
    let mut gadgets = 0;
    let mut gadgets_skipped = 0;
    let mut nonempty = [0usize; 4];
    for n in 4..=8usize {
        for i in 0..ORACLE_MODELS {
            let seed = (n as u64) << 32 | i;
            let m = random_mdp(seed, n, 4);
            models += 1;
            let (u, v) = brute_ugec_vgec(&m).unwrap();
            nonempty[0] += !u.is_empty() as usize;
            nonempty[1] += !v.is_empty() as usize;
            if ugec_states(&m).union != u {
                mismatches.push(format!("ugec n={n} seed={seed}"));
            }
            if v_union(&m) != v {
                mismatches.push(format!("vgec n={n} seed={seed}"));
            }
            for view in [PriorityView::P1, PriorityView::P2] {
                let g = Game::from_mdp(&m, view);
                if solve_parity(&g).w1 != brute_parity_game(&g).unwrap() {
                    mismatches.push(format!("parity {view} n={n} seed={seed}"));
                }
            }
            let r = StateSet::from_iter(n, (0..n).filter(|&s| (seed >> (s % 8)) & 1 == 1 || s == 0));
            let gadget = build_buchi_parity_game(&m, &r, PriorityView::P1);
            let p2_choices: u64 = (0..gadget.game.len())
                .filter(|&s| gadget.game.owners[s] == Owner::P2)
                .map(|s| gadget.game.succ[s].len() as u64)
                .product();
            if p2_choices <= GADGET_ENUMERATION_CAP {
                gadgets += 1;
                match brute_buchi_parity(&gadget.game, &gadget.buchi) {
                    Ok(w) if w == solve_buchi_parity_game(&gadget).w1 => {}
                    Ok(_) => mismatches.push(format!("gadget n={n} seed={seed}")),
                    Err(OracleError::TooLarge { .. }) => unreachable!("checked against the cap"),
                }
            } else {
                gadgets_skipped += 1;
            }
            let (g, b) = random_game(seed, n, 4);
            games += 1;
            let w = brute_buchi_parity(&g, &b).unwrap();
            nonempty[2] += !w.is_empty() as usize;
            nonempty[3] += (w.len() < n) as usize;
            if solve_buchi_parity_arena(&g, &g.priority, &b).w1 != w {
                mismatches.push(format!("buchi-parity game n={n} seed={seed}"));
            }
        }
    }
    let took = start.elapsed();
    let pass = mismatches.is_empty() && took < Duration::from_secs(600);
    report(
        5,
        "oracle equivalence",
        pass,
        &format!(
            "{models} models and {games} Büchi-parity games (4..8 states, priorities <= 4), {gadgets} gadget games \
             ({gadgets_skipped} over the enumeration cap), {} mismatches {:?}, {took:.2?} (limit 600 s); \
             U nonempty in {} models, V in {}, Büchi-parity winners nonempty in {} games and not everything in {}",
            mismatches.len(),
            mismatches.iter().take(5).collect::<Vec<_>>(),
            nonempty[0],
            nonempty[1],
            nonempty[2],
            nonempty[3]
        ),
    );
}

#[test]
fn criterion_6_exact_reachability() {
    let mut residuals = 0;
    let mut checked = 0;
    let golden = ["coin", "diamond_even", "diamond_odd", "fig1", "fig2", "fig3", "loop_even", "loop_odd"];
    let mut suite: Vec<Mdp> = golden.iter().map(|n| (*load(n)).clone()).collect();
    suite.extend((0..200).map(|i| random_mdp(0xbe11 + i, 3 + (i as usize % 6), 4)));
    for m in &suite {
        for s in 0..m.len() {
            let t = StateSet::singleton(m.len(), s);
            let v = max_reach_values(m, &t);
            checked += 1;
            if !bellman_residual(m, &t, &v.values).is_zero() {
                residuals += 1;
            }
        }
    }
    let mut detail = format!("{checked} value vectors, {residuals} with nonzero residual");
    let mut pass = residuals == 0;
    for (name, expect_yes) in [("diamond_odd", false), ("diamond_even", true)] {
        let m = load(name);
        let s0 = m.index_of("s0").unwrap();
        let t = m.set_of(&["t"]).unwrap();
        let v = max_reach_values(&m, &t).values[s0].clone();
        let d = decide_sure_parity_threshold_reach(&m, s0, PriorityView::P1, &t, Cmp::Ge, &rat(1, 2)).unwrap();
        pass &= v == rat(1, 2) && d.is_yes() == expect_yes;
        detail.push_str(&format!("; {name}: v*(s0) = {v}, P>=1/2 verdict {}", d.verdict));
    }
    report(6, "exact reachability", pass, &detail);
}

/// Probability of visiting `target` within `steps` steps from `from` under
/// the memoryless `lambda2`, by forward propagation of state distributions.
fn forward_hit(m: &Mdp, lambda2: &MooreTable, target: &[usize], from: usize, steps: usize) -> Rational {
    let mut mass = vec![Rational::zero(); m.len()];
    mass[from] = Rational::one();
    let mut hit = Rational::zero();
    for step in 0..=steps {
        for &t in target {
            hit += std::mem::take(&mut mass[t]);
        }
        if step == steps {
            break;
        }
        let mut next = vec![Rational::zero(); m.len()];
        for s in 0..m.len() {
            if mass[s].is_zero() {
                continue;
            }
            let row: Vec<(usize, Rational)> = match m.owner(s) {
                Owner::P2 => m.succ(s).iter().map(|&t| (t, m.prob(s, t))).collect(),
                Owner::P1 => lambda2.next_at(lambda2.m0, s).map(Distribution::entries).unwrap().to_vec(),
            };
            for (t, p) in row {
                next[t] += &mass[s] * p;
            }
        }
        mass = next;
    }
    hit
}

#[test]
fn criterion_7_schedule_soundness() {
    let m = load("fig1");
    let spec = component_strategy(&m, "a");
    let StrategySpec::Ugec { params, .. } = &spec else { panic!("expected a component strategy") };
    let prepared = PreparedStrategy::new(m.clone(), &spec).unwrap();
    let mut pass = true;
    let mut horizons = Vec::new();
    for i in 0..=8u64 {
        let n_i = prepared.round_horizon(i).unwrap().unwrap();
        let least = params.component.iter().map(|&s| forward_hit(&m, &params.lambda2, &params.d_max_even, s, n_i)).min().unwrap();
        pass &= least >= ugec_bound(i);
        horizons.push(format!("n_{i}={n_i} (hit >= {least})"));
    }
    report(7, "round schedule soundness", pass, &horizons.join(", "));
}

#[test]
fn criterion_8_simulation_statistics() {
    let m = load("fig1");
    let spec = component_strategy(&m, "a");
    let a = m.index_of("a").unwrap();
    let start = Instant::now();
    let first = simulate(&m, &spec, a, SIM_RUNS, SIM_STEPS, SIM_SEED, false).unwrap();
    let took = start.elapsed();
    let again = simulate(&m, &spec, a, SIM_RUNS, SIM_STEPS, SIM_SEED, false).unwrap();
    let mut pass = first.violations == 0 && first == again;
    let mut rounds = Vec::new();
    for stat in first.rounds.iter().filter(|r| (1..=SIM_ROUNDS).contains(&r.round)) {
        let bound = 0.5f64.powi(stat.round as i32);
        let sigma = (bound * (1.0 - bound) / stat.completed as f64).sqrt();
        let freq = stat.miss_frequency();
        pass &= stat.completed > 0 && freq <= bound + SIGMAS * sigma;
        rounds.push(format!("round {}: {:.5} (bound {:.5} + 3σ {:.5})", stat.round, freq, bound, SIGMAS * sigma));
    }
    pass &= rounds.len() as u64 == SIM_ROUNDS;
    report(
        8,
        "simulation statistics",
        pass,
        &format!(
            "{} runs x {} steps, seed {}, {} violations, reproducible {}, {took:.2?}; {}",
            first.runs,
            first.steps,
            first.seed,
            first.violations,
            first == again,
            rounds.join("; ")
        ),
    );
}

#[test]
fn criterion_9_witness_round_trip() {
    let dir = std::env::temp_dir().join(format!("bwc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let golden = [
        ("fig1", "a", "S(p1)&AS(p2)"),
        ("fig1", "a", "S(p1)&P>=1/2(p2)"),
        ("fig2", "c", "S(p1)&AS(p2)"),
        ("fig2", "c", "S(p2)&AS(p1)"),
        ("fig3", "a", "S(p1)&AS(p2)"),
        ("fig3", "a", "S(p1)&P>99/100(p2)"),
        ("fig3", "a", "S(p1)&P>=1/2(p2)"),
        ("coin", "s0", "S(p1)&P>1/3(p2)"),
        ("coin", "s0", "S(p1)&P>1/2(p2)"),
        ("coin", "s0", "S(p1)&P>=0(p2)"),
        ("diamond_even", "s0", "S(p1)&P>=1/2(reach t)"),
        ("diamond_odd", "s0", "S(p1)&P>=1/2(reach t)"),
        ("diamond_even", "s0", "S(p1)&P>1/3(reach t)"),
        ("loop_even", "s0", "S(p1)&P>=1/2(reach t)"),
        ("loop_odd", "s0", "S(p1)&P>=1/2(reach t)"),
        ("loop_even", "s0", "S(p1)&AS(reach t)"),
    ];
    let mut golden_yes = 0;
    let mut failures = Vec::new();
    for (k, (name, from, prop)) in golden.iter().enumerate() {
        let model = model_path(name);
        let model = model.to_str().unwrap();
        let out = dir.join(format!("w{k}.json"));
        let (code, text) = cli(&["synth", model, "--from", from, "--prop", prop, "-o", out.to_str().unwrap()]);
        match code {
            0 => {
                golden_yes += 1;
                let (vcode, vtext) = cli(&["verify", model, out.to_str().unwrap(), "--from", from, "--prop", prop]);
                if vcode != 0 {
                    failures.push(format!("{name} {from} {prop}: {}", vtext.trim()));
                }
            }
            1 => {}
            _ => failures.push(format!("{name} {from} {prop}: synth failed {}", text.trim())),
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    let props: Vec<PropertyExpr> = [
        "S(p1)&AS(p2)",
        "S(p1)&P>1/2(p2)",
        "S(p1)&P>=1/2(p2)",
        "S(p1)&P>0(p2)",
        "S(p2)&AS(p1)",
        "S(p2)&P>=1/3(p1)",
        "S(p1)&P>=1/2(reach s0)",
        "S(p1)&AS(reach s1)",
        "S(p2)&P>1/4(reach s1)",
    ]
    .iter()
    .map(|p| p.parse().unwrap())
    .collect();
    let mut random_yes = 0;
    let mut random_queries = 0;
    for i in 0..150u64 {
        let n = 2 + (i as usize % 6);
        let m = Arc::new(random_mdp(0x5717 + i, n, 4));
        for prop in &props {
            for s0 in 0..n {
                random_queries += 1;
                let d = decide_property(&m, s0, prop).unwrap();
                let Some(w) = &d.witness else { continue };
                random_yes += 1;
                let (holds, rep) = verify_property(&m, w, s0, prop).unwrap();
                if !holds {
                    failures.push(format!("random #{i} from s{s0} {prop}: {rep}"));
                }
            }
        }
    }
    report(
        9,
        "witness round trip",
        failures.is_empty() && golden_yes > 0 && random_yes > 0,
        &format!(
            "{golden_yes} golden YES via synth/verify, {random_yes} YES of {random_queries} random queries, {} failures {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
}
