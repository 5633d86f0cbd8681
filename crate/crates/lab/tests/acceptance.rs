//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pglb_core::analyzer::{
    analyze, brute_force_mid, build_state_graph, compute_mid, id_weight, replay_witness, tarjan, Delay, StateGraph,
    Witness,
};
use pglb_core::family::{gen_paper_family, gen_random, KindWeights};
use pglb_core::params::AuxSet;
use pglb_core::projector::{check_equivalence, dispatch_project, specialize, thread_jumps, OracleSuite, Verdict};
use pglb_core::vm::{observable_trace, run, verify_trace, BooleanCell, ReplyOracle, Status};
use pglb_core::{parse_program, BasicInstruction, Instruction, Program, ToolParams};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    ensure(started.elapsed() <= limit, || {
        format!("took {:.1?}, limit {limit:?}", started.elapsed())
    })
}

fn small() -> ToolParams {
    ToolParams::new(2, 3)
}

fn random(seed: u64) -> Program {
    gen_random(seed, 1 + (seed % 15) as usize, &small(), &KindWeights::default())
}

fn acyclic(g: &StateGraph) -> bool {
    let all = vec![true; g.len()];
    tarjan(&all, |v| g.successors(v)).iter().all(|c| c.len() == 1)
}

fn family_length() -> Outcome {
    let started = Instant::now();
    for k in 1..=8u32 {
        let n = gen_paper_family(k).0.len();
        ensure(n == 12 * (1 << k) + 4, || format!("k={k}: length {n}"))?;
    }
    within(Duration::from_secs(1), started)?;
    Ok(format!("k=1..8 exact, {:.0?}", started.elapsed()))
}

fn family_mid() -> Outcome {
    let mut detail = String::new();
    for k in 1..=8u32 {
        let started = Instant::now();
        let (p, family) = gen_paper_family(k);
        let (g, r) = analyze(&p, &family.tool_params()).map_err(|e| format!("k={k}: {e}"))?;
        ensure(r.value == Delay::Finite(4), || format!("k={k}: MID {}", r.value))?;
        if k == 8 {
            within(Duration::from_secs(60), started)?;
            ensure(g.len() <= 5_000_000, || format!("k=8: {} nodes", g.len()))?;
            detail = format!("k=1..8 all 4; k=8: {} nodes in {:.1?}", g.len(), started.elapsed());
        }
    }
    Ok(detail)
}

fn oracle_agreement() -> Outcome {
    let (p1, family) = gen_paper_family(1);
    let params = family.tool_params();
    let brute = brute_force_mid(&p1, &params, 60).map_err(|e| e.to_string())?;
    let mid = analyze(&p1, &params).map_err(|e| e.to_string())?.1.value;
    ensure(brute == 4 && mid == Delay::Finite(4), || {
        format!("P_1: brute {brute}, graph {mid}")
    })?;
    let mut compared = 0;
    let mut seed = 0u64;
    while compared < 500 {
        let p = random(seed);
        seed += 1;
        let (g, r) = analyze(&p, &small()).map_err(|e| e.to_string())?;
        if !acyclic(&g) {
            continue;
        }
        let brute = brute_force_mid(&p, &small(), g.len() + 1).map_err(|e| e.to_string())?;
        ensure(r.value == Delay::Finite(brute), || {
            format!("{p}: graph {}, brute {brute}", r.value)
        })?;
        compared += 1;
    }
    Ok(format!(
        "P_1 = 4 both ways; 500 acyclic random programs agree ({seed} drawn)"
    ))
}

fn projections_correct() -> Outcome {
    let check = |p: &Program, params: &ToolParams, depth: usize| -> Result<(), String> {
        for (name, report) in [
            ("specialize", specialize(p, params)),
            ("dispatch", dispatch_project(p, params)),
        ] {
            let r = report.map_err(|e| format!("{name} {p}: {e}"))?;
            ensure(r.output.is_pglb(), || {
                format!("{name} left register instructions in {p}")
            })?;
            let suite = OracleSuite {
                depth,
                seeds: (0..4).collect(),
                step_limit: 1_000,
            };
            match check_equivalence(p, &r.output, &r.params, &suite).map_err(|e| e.to_string())? {
                Verdict::Equivalent { .. } => {}
                Verdict::Counterexample(c) => return Err(format!("{name} {p}: counterexample under {}", c.oracle)),
            }
        }
        Ok(())
    };
    for k in 1..=4 {
        let (p, family) = gen_paper_family(k);
        check(&p, &family.tool_params(), 8)?;
    }
    for seed in 0..500 {
        check(&random(seed), &small(), 10)?;
    }
    Ok("P_1..P_4 at depth 8, 500 random programs at depth 10, no counterexample".into())
}

fn delay_preserving_horn() -> Outcome {
    let mut lengths = Vec::new();
    let mut mids = Vec::new();
    for k in 1..=6 {
        let (p, family) = gen_paper_family(k);
        let r = specialize(&p, &family.tool_params()).map_err(|e| e.to_string())?;
        let mid = r.mid_after.map_err(|e| e.to_string())?.value;
        ensure(mid <= Delay::Finite(5), || format!("k={k}: specialized MID {mid}"))?;
        lengths.push(r.length_after as f64);
        mids.push(mid.to_string());
    }
    let ratios: Vec<f64> = (3..=6).map(|k| lengths[k - 1] / lengths[k - 2]).collect();
    ensure(ratios.iter().all(|r| (3.5..=4.5).contains(r)), || {
        format!("length ratios {ratios:.2?}")
    })?;
    Ok(format!("MID {} ; length ratios k=3..6 {ratios:.2?}", mids.join(",")))
}

fn length_preserving_horn() -> Outcome {
    let mut lengths = Vec::new();
    let mut mids = Vec::new();
    for k in 1..=6 {
        let (p, family) = gen_paper_family(k);
        let r = dispatch_project(&p, &family.tool_params()).map_err(|e| e.to_string())?;
        let mid = r.mid_after.map_err(|e| e.to_string())?.value;
        let mid = mid.finite().ok_or_else(|| format!("k={k}: dispatch MID unbounded"))?;
        lengths.push(r.length_after as f64);
        mids.push(mid);
    }
    let ratios: Vec<f64> = (3..=6).map(|k| lengths[k - 1] / lengths[k - 2]).collect();
    ensure(ratios.iter().all(|r| (1.8..=2.6).contains(r)), || {
        format!("length ratios {ratios:.2?}")
    })?;
    ensure(mids.windows(2).all(|w| w[0] < w[1]), || {
        format!("MID not increasing: {mids:?}")
    })?;
    ensure(mids[5] >= mids[0] + 4, || format!("MID {mids:?}"))?;
    Ok(format!("MID {mids:?} ; length ratios k=3..6 {ratios:.2?}"))
}

fn semantics_suite() -> Outcome {
    let started = Instant::now();
    let params = small();
    let status_of = |text: &str, replies: Vec<bool>| {
        run(&parse_program(text).unwrap(), &params, ReplyOracle::scripted(replies))
            .unwrap()
            .status
    };
    // deadlock clauses
    for (text, replies) in [
        ("#0 ; !", vec![]),
        ("! ; \\#0", vec![]),
        ("f.m ; \\#0", vec![true]),
        ("f.m", vec![true]),
        ("+f.m", vec![false]),
        ("-f.m", vec![true]),
        ("#2 ; !", vec![]),
        ("\\#1 ; !", vec![]),
        ("i#1 ; !", vec![]),
        ("set:1:3 ; i\\#1 ; !", vec![]),
    ] {
        let expected = if text.starts_with('!') {
            Status::Terminated
        } else {
            Status::Deadlocked
        };
        let got = status_of(text, replies);
        ensure(got == expected, || format!("{text:?}: {got}"))?;
    }

    // Boolean-cell laws on random method sequences
    let methods = ["set:T", "set:F", "get"];
    for seed in 0..200u64 {
        let mut cell = BooleanCell::default();
        let mut model = false;
        let mut x = seed;
        for _ in 0..50 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let m = methods[(x >> 33) as usize % 3];
            let reply = cell.process(m);
            match m {
                "set:T" => model = true,
                "set:F" => model = false,
                _ => {}
            }
            ensure(reply == Some(model) && cell.contents == model, || {
                format!("cell law broken at {m}")
            })?;
        }
    }
    ensure(BooleanCell::default().process("toggle").is_none(), || {
        "unknown method accepted".into()
    })?;

    let mut aux_params = small().with_aux(AuxSet::parse_list("a.*,c.get").unwrap());
    aux_params.step_limit = 2_000;
    for seed in 0..2000u64 {
        let p = random(seed);
        let t = run(&p, &aux_params, ReplyOracle::seeded(seed)).map_err(|e| e.to_string())?;
        // determinism and single-pass discipline
        ensure(t == run(&p, &aux_params, ReplyOracle::seeded(seed)).unwrap(), || {
            format!("{p}: nondeterministic")
        })?;
        verify_trace(&p, &aux_params, &t).map_err(|e| format!("{p}: trace breaks at event {}", e.event))?;
        ensure(
            (t.status == Status::Terminated) == (t.events.last().map(|e| &e.instruction) == Some(&Instruction::Halt)),
            || format!("{p}: termination does not match the last event"),
        )?;
        // step-limit monotonicity
        let mut short = aux_params.clone();
        short.step_limit = 5;
        let prefix = run(&p, &short, ReplyOracle::seeded(seed)).unwrap();
        ensure(t.events.starts_with(&prefix.events), || {
            format!("{p}: step limit changed the prefix")
        })?;
        // Boolean cell replies follow the cell, starting false
        let mut bool1 = false;
        for e in &t.events {
            if let Some(b) = e.instruction.basic().filter(|b| b.focus() == "bool1") {
                match b.method() {
                    "set:T" => bool1 = true,
                    "set:F" => bool1 = false,
                    _ => {}
                }
                ensure(e.reply == Some(bool1), || format!("{p}: bool1 replied {:?}", e.reply))?;
            }
        }
        // aux filtering
        let o = observable_trace(&t, &aux_params);
        let expected: Vec<(BasicInstruction, bool)> = t
            .events
            .iter()
            .filter_map(|e| Some((e.instruction.basic()?.clone(), e.reply?)))
            .filter(|(b, _)| !(b.focus() == "a" || (b.focus() == "c" && b.method() == "get")))
            .collect();
        let got: Vec<(BasicInstruction, bool)> = o.events.iter().map(|e| (e.basic.clone(), e.reply)).collect();
        ensure(got == expected && o.status == t.status, || {
            format!("{p}: observable trace {got:?}")
        })?;
    }

    // the weight table
    let aux = AuxSet::parse_list("x.*").unwrap();
    let b = |f: &str| BasicInstruction::new(f, "m").unwrap();
    let table = [
        (Instruction::Plain(b("f")), 0),
        (Instruction::PosTest(b("f")), 0),
        (Instruction::NegTest(b("f")), 0),
        (Instruction::Halt, 0),
        (Instruction::Plain(b("x")), 1),
        (Instruction::PosTest(b("x")), 1),
        (Instruction::NegTest(b("x")), 1),
        (Instruction::FwdJump(3), 1),
        (Instruction::BwdJump(3), 1),
        (Instruction::RegSet { reg: 1, value: 2 }, 1),
        (Instruction::IndFwdJump(1), 2),
        (Instruction::IndBwdJump(1), 2),
    ];
    for (u, w) in &table {
        ensure(id_weight(u, &aux) == *w, || format!("weight of {u}"))?;
    }

    // jump threading
    let pglb_weights = KindWeights {
        reg_set: 0,
        ind_fwd_jump: 0,
        ind_bwd_jump: 0,
        ..KindWeights::default()
    };
    for seed in 0..2000u64 {
        let p = gen_random(seed, 1 + (seed % 20) as usize, &params, &pglb_weights);
        let once = thread_jumps(&p);
        ensure(once.len() == p.len() && thread_jumps(&once) == once, || {
            format!("{p}: threading not idempotent")
        })?;
    }
    within(Duration::from_secs(120), started)?;
    Ok(format!(
        "deadlock, cell, trace, aux, weight and threading checks in {:.1?}",
        started.elapsed()
    ))
}

fn unboundedness() -> Outcome {
    let p = parse_program("f.m ; +x.get ; \\#1 ; !").unwrap();
    let params = ToolParams::new(1, 1).with_aux(AuxSet::parse_list("x.*").unwrap());
    let g = build_state_graph(&p, &params).map_err(|e| e.to_string())?;
    let r = compute_mid(&g);
    ensure(r.value == Delay::Unbounded, || format!("MID {}", r.value))?;
    ensure(matches!(r.witness, Witness::Cycle { .. }), || "no cycle witness".into())?;
    let weight = replay_witness(&p, &params, &g, &r.witness).map_err(|e| e.to_string())?;
    let depths: Vec<u64> = [10, 20, 40]
        .iter()
        .map(|&d| brute_force_mid(&p, &params, d).unwrap())
        .collect();
    ensure(depths.windows(2).all(|w| w[0] < w[1]), || {
        format!("brute force {depths:?}")
    })?;
    Ok(format!(
        "unbounded, witness replays (lap weight {weight}), brute force at 10/20/40 = {depths:?}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 family length", family_length),
        ("2 family MID", family_mid),
        ("3 oracle agreement", oracle_agreement),
        ("4 projection legality and correctness", projections_correct),
        ("5 delay-preserving horn", delay_preserving_horn),
        ("6 length-preserving horn", length_preserving_horn),
        ("7 semantics property suite", semantics_suite),
        ("8 unboundedness detection", unboundedness),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
