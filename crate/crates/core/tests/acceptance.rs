//! One PASS/FAIL line per acceptance criterion. Exits nonzero on any failure.

use semisim::algebra::cascade::shipped;
use semisim::algebra::{
    analyze, cascade_evaluate, catalog, compose, composition_series, is_solvable_group, semigroup_closure, GroupTable,
    Transformation,
};
use semisim::compiler::{
    combine_direct_product, combine_semidirect, combine_wreath, compile, compile_gridworld, compile_log_depth,
    compile_memory, compile_mod_counter, compile_solvable_group, counter_report, gridworld_final_state,
    gridworld_moves, product_report, CompileReport, Construction, GroupSim, SimSize,
};
use semisim::harness::{differential_test, exhaustive_test, SplitMix64};
use semisim::tkernel::{
    build_composition_mlp, build_interp_mlp_1d, build_interp_mlp_nd, build_threshold_mlp, softmax_onehot_l1,
    TransformerNet,
};
use semisim::{Error, Semiautomaton};
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn table(name: &str) -> GroupTable {
    GroupTable::from_semigroup(&catalog::group(name).unwrap()).unwrap().0
}

fn report_ok(r: &CompileReport, what: &str) -> Result<(), String> {
    ensure(r.passed(), || format!("{what}: bound checks failed {:?}", r.failures()))
}

/// Q8 inside C4 ≀ C2, found as ⟨a, b⟩ with a unique involution.
fn q8_from_wreath(t: usize) -> Result<GroupSim, String> {
    let w = combine_wreath(&compile_mod_counter(4, t).map_err(e2s)?, &compile_mod_counter(2, t).map_err(e2s)?).map_err(e2s)?;
    let g = &w.group;
    for a in 0..g.n {
        for b in 0..g.n {
            if g.order_of(a) != 4 || g.order_of(b) != 4 {
                continue;
            }
            let h = g.generate(&[a, b]);
            if h.len() != 8 {
                continue;
            }
            let involutions = h.iter().filter(|&&x| g.order_of(x) == 2).count();
            if involutions == 1 {
                return w.restrict(&h).map_err(e2s);
            }
        }
    }
    Err("no Q8 subgroup in C4 ≀ C2".into())
}

fn exhaustive_simulation() -> Outcome {
    let parity = Semiautomaton::parity();
    let (net, _) = compile_log_depth(&parity, 0, 10).map_err(e2s)?;
    let r = exhaustive_test(&parity, 0, &net, 10).map_err(e2s)?;
    ensure(r.mismatches == 0 && r.trials == 1024, || format!("parity: {} mismatches", r.mismatches))?;

    let grid = Semiautomaton::gridworld(3).map_err(e2s)?;
    let (net, _) = compile_gridworld(3, 10).map_err(e2s)?;
    let plan = net.plan();
    let mut bad = 0;
    for code in 0..1024usize {
        let x: Vec<usize> = (0..10).map(|i| 2 * (code >> i & 1)).collect();
        if plan.evaluate(&x).ok() != Some(grid.run(0, &x).map_err(e2s)?.states) {
            bad += 1;
        }
    }
    ensure(bad == 0, || format!("gridworld(3): {bad} of 1024 ±1 sequences differ"))?;
    Ok("parity T=10: 1024/1024, gridworld(3) T=10: 1024/1024".into())
}

/// (name, automaton, q0, net) for one length.
fn randomized_cases(t: usize) -> Result<Vec<(String, Semiautomaton, usize, TransformerNet)>, String> {
    let mut out = vec![];
    let canon = |sim: &GroupSim| -> Result<(Semiautomaton, TransformerNet), String> {
        Ok((sim.canonical_automaton(), sim.canonical_net().map_err(e2s)?))
    };
    for n in [2, 3, 5, 8] {
        let a = Semiautomaton::cyclic(n).map_err(e2s)?;
        let (net, r) = compile(&a, 0, Construction::KrohnRhodes, t).map_err(e2s)?;
        report_ok(&r, &format!("C{n}"))?;
        out.push((format!("C{n}"), a, 0, net));
    }
    let c2 = compile_mod_counter(2, t).map_err(e2s)?;
    let (a, net) = canon(&combine_direct_product(&[c2.clone(), c2.clone()]).map_err(e2s)?)?;
    out.push(("C2×C2".into(), a, 0, net));
    let c4 = compile_mod_counter(4, t).map_err(e2s)?;
    let d8 = combine_semidirect(&c4, &c2, &[vec![0, 1, 2, 3], vec![0, 3, 2, 1]]).map_err(e2s)?;
    let (a, net) = canon(&d8)?;
    out.push(("D8 (semidirect)".into(), a, 0, net));
    let (a, net) = canon(&q8_from_wreath(t)?)?;
    out.push(("Q8 (wreath-restricted)".into(), a, 0, net));
    for name in ["S3", "A4", "S4"] {
        let g = table(name);
        let (sim, r) = compile_solvable_group(&g, t, g.n).map_err(e2s)?;
        report_ok(&r, name)?;
        let (a, net) = canon(&sim)?;
        out.push((name.to_string(), a, 0, net));
    }
    for n in [2, 5] {
        let (net, r) = compile_memory(n, t, 0).map_err(e2s)?;
        if n * t >= 16 {
            report_ok(&r, &format!("memory({n})"))?;
        }
        out.push((format!("memory({n})"), Semiautomaton::memory(n).map_err(e2s)?, 0, net));
    }
    let (net, r) = compile_gridworld(8, t).map_err(e2s)?;
    report_ok(&r, "gridworld(8)")?;
    out.push(("gridworld(8)".into(), Semiautomaton::gridworld(8).map_err(e2s)?, 0, net));
    for name in ["S5", "A5"] {
        let a = catalog::canonical(name).map_err(e2s)?;
        let (net, r) = compile_log_depth(&a, 0, t).map_err(e2s)?;
        report_ok(&r, name)?;
        out.push((format!("{name} (log-depth)"), a, 0, net));
    }
    Ok(out)
}

fn randomized_simulation() -> Outcome {
    let mut cases = 0;
    for t in [8, 32, 64] {
        for (name, a, q0, net) in randomized_cases(t)? {
            let r = differential_test(&a, q0, &net, t, 1000, 17 + t as u64).map_err(e2s)?;
            ensure(r.mismatches == 0, || format!("{name} T={t}: {} mismatches, first {:?}", r.mismatches, r.first_mismatch))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (automaton, T) cases × 1000 sequences, 0 mismatches"))
}

fn depth_accounting() -> Outcome {
    let parity = Semiautomaton::parity();
    for t in 1..=128usize {
        let (net, _) = compile_log_depth(&parity, 0, t).map_err(e2s)?;
        let want = (t as f64).log2().ceil() as usize;
        ensure(net.depth() == want, || format!("log-depth T={t}: depth {} != {want}", net.depth()))?;
    }
    for n in [2, 3, 7] {
        let d = compile_mod_counter(n, 16).map_err(e2s)?.depth();
        ensure(d == 1, || format!("counter C{n}: depth {d}"))?;
        let (net, _) = compile_memory(n, 16, 0).map_err(e2s)?;
        ensure(net.depth() == 1, || format!("memory({n}): depth {}", net.depth()))?;
    }
    for s in 1..=8 {
        let (net, _) = compile_gridworld(s, 16).map_err(e2s)?;
        let attn = net.layers.iter().filter(|l| !l.attn.heads.is_empty()).count();
        let heads = net.layers[1].attn.heads.len();
        ensure(attn == 2 && heads == 2 * s + 1, || format!("gridworld({s}): {attn} attention layers, {heads} heads"))?;
    }
    for name in ["C6", "S3", "D8", "Q8", "A4", "S4"] {
        let g = table(name);
        let (sim, _) = compile_solvable_group(&g, 8, g.n).map_err(e2s)?;
        let bound = 3.0 * (g.n as f64).log2();
        ensure(sim.depth() as f64 <= bound, || format!("{name}: depth {} > {bound}", sim.depth()))?;
    }
    Ok("log-depth T=1..128, counter, memory, gridworld S=1..8, solvable groups".into())
}

fn metric_conformance() -> Outcome {
    let mut n = 0;
    let mut check = |r: &CompileReport, what: String| -> Result<(), String> {
        n += 1;
        report_ok(r, &what)
    };
    for name in ["C2", "C3", "S3", "S4", "A5"] {
        let a = catalog::canonical(name).map_err(e2s)?;
        for t in [4, 16, 64] {
            check(&compile_log_depth(&a, 0, t).map_err(e2s)?.1, format!("log-depth {name} T={t}"))?;
        }
    }
    for k in [2, 3, 5, 8] {
        for t in [4, 32, 64] {
            check(&counter_report(&compile_mod_counter(k, t).map_err(e2s)?).map_err(e2s)?, format!("counter C{k} T={t}"))?;
        }
    }
    for k in [2, 3, 5] {
        for t in [8, 32, 64] {
            check(&compile_memory(k, t, 0).map_err(e2s)?.1, format!("memory({k}) T={t}"))?;
        }
    }
    let t = 16;
    let c2 = compile_mod_counter(2, t).map_err(e2s)?;
    let c3 = compile_mod_counter(3, t).map_err(e2s)?;
    let c4 = compile_mod_counter(4, t).map_err(e2s)?;
    let size = |s: &GroupSim| SimSize::measure(s).map_err(e2s);
    let d = combine_direct_product(&[c2.clone(), c3.clone()]).map_err(e2s)?;
    check(&product_report("direct", &d, &SimSize::direct(&[size(&c2)?, size(&c3)?])).map_err(e2s)?, "direct C2×C3".into())?;
    let s = combine_semidirect(&c4, &c2, &[vec![0, 1, 2, 3], vec![0, 3, 2, 1]]).map_err(e2s)?;
    check(&product_report("semidirect", &s, &SimSize::semidirect(&size(&c4)?, &size(&c2)?, 8.0)).map_err(e2s)?, "semidirect D8".into())?;
    let w = combine_wreath(&c3, &c2).map_err(e2s)?;
    check(&product_report("wreath", &w, &SimSize::wreath(&size(&c3)?, &size(&c2)?, 3.0, 2.0)).map_err(e2s)?, "wreath C3≀C2".into())?;
    for name in ["S3", "Q8", "A4", "S4"] {
        let g = table(name);
        check(&compile_solvable_group(&g, t, g.n).map_err(e2s)?.1, format!("solvable {name}"))?;
    }
    for s in [1, 3, 8] {
        check(&compile_gridworld(s, 32).map_err(e2s)?.1, format!("gridworld({s})"))?;
    }
    Ok(format!("{n} compile reports, every bound check passes"))
}

fn gadget_suite() -> Outcome {
    let mut rng = SplitMix64::new(3);
    let uniform = |rng: &mut SplitMix64| rng.next_u64() as f64 / u64::MAX as f64;
    let offsets: Vec<f64> = (0..64).map(|i| -0.25 + 0.5 * i as f64 / 63.0).collect();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9);

    let delta = 0.5;
    let tab: Vec<(f64, Vec<f64>)> = (0..20).map(|i| (i as f64 * 0.7 - 5.0, vec![(i * i % 7) as f64, -(i as f64)])).collect();
    let m = build_interp_mlp_1d(&tab, delta, 10.0, 20.0).map_err(e2s)?;
    for (x, y) in &tab {
        for o in &offsets {
            let out = m.apply(&[x + o * delta]);
            ensure(close(&out, y), || format!("mlp-1d at {x}+{o}Δ: {out:?} != {y:?}"))?;
        }
    }

    let delta = 1.0;
    let tab: Vec<(Vec<f64>, Vec<f64>)> = (0..4)
        .flat_map(|a| (0..3).map(move |b| (vec![a as f64, b as f64], vec![((a * 3 + b) % 5) as f64])))
        .collect();
    let m = build_interp_mlp_nd(&tab, delta, 4.0, 5.0).map_err(e2s)?;
    for (x, y) in &tab {
        for _ in 0..64 {
            let xp: Vec<f64> = x.iter().map(|v| v + (uniform(&mut rng) - 0.5) * 0.5 * delta).collect();
            let out = m.apply(&xp);
            ensure(close(&out, y), || format!("mlp-nd at {xp:?}: {out:?} != {y:?}"))?;
        }
    }

    for n in [2usize, 3] {
        let comp = build_composition_mlp(n);
        let maps: Vec<Vec<usize>> = (0..n.pow(n as u32)).map(|c| (0..n).map(|i| c / n.pow(i as u32) % n).collect()).collect();
        for g in &maps {
            for f in &maps {
                let want = compose(&Transformation::new(f.clone()).unwrap(), &Transformation::new(g.clone()).unwrap()).unwrap();
                let want: Vec<f64> = want.image().iter().map(|&q| (q + 1) as f64).collect();
                for trial in 0..3 {
                    let x: Vec<f64> = g
                        .iter()
                        .chain(f)
                        .map(|&q| (q + 1) as f64 + if trial == 0 { 0.0 } else { (uniform(&mut rng) - 0.5) * 0.2 })
                        .collect();
                    let out = comp.apply(&x);
                    // noise on f passes through unamplified; on g it is removed
                    let tol = if trial == 0 { 1e-9 } else { 0.1 + 1e-9 };
                    let ok = out.iter().zip(&want).all(|(o, w)| (o - w).abs() <= tol);
                    ensure(ok, || format!("composition n={n} f={f:?} g={g:?}: {out:?}"))?;
                }
            }
        }
    }

    let th = build_threshold_mlp(0.3);
    for i in 0..200 {
        let x = 0.3 * (1.0 + i as f64 * 0.05);
        ensure(close(&th.apply(&[x]), &[1.0]) && close(&th.apply(&[-x]), &[0.0]), || format!("threshold at ±{x}"))?;
    }
    Ok("mlp-1d, mlp-nd (64 offsets per key), composition |Q|∈{2,3} all pairs (exact, and within 0.1 under ±0.1 noise), threshold".into())
}

fn softmax_bound() -> Outcome {
    let mut rng = SplitMix64::new(11);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let t = 1 + rng.below(64) as usize;
        let gamma = 5.0 + 15.0 * (rng.next_u64() as f64 / u64::MAX as f64);
        let star = rng.below(t as u64) as usize;
        let top = 10.0 * (rng.next_u64() as f64 / u64::MAX as f64);
        let z: Vec<f64> = (0..t)
            .map(|i| if i == star { top } else { top - gamma - 5.0 * (rng.next_u64() as f64 / u64::MAX as f64) })
            .collect();
        let l1 = softmax_onehot_l1(&z);
        let bound = 2.0 * t as f64 * (-gamma).exp();
        ensure(l1 <= bound, || format!("T={t} γ={gamma}: ℓ1 {l1} > {bound}"))?;
        worst = worst.max(l1 / bound);
    }
    Ok(format!("10000 vectors, max ℓ1/bound = {worst:.3}"))
}

fn gridworld_recurrence() -> Outcome {
    let mut rng = SplitMix64::new(23);
    for s in 1..=8usize {
        let a = Semiautomaton::gridworld(s).map_err(e2s)?;
        for _ in 0..10_000 {
            let x = rng.sequence(64, 3);
            let moves = gridworld_moves(&x);
            let tr = gridworld_final_state(&moves, s).map_err(e2s)?;
            let want = *a.run(0, &x).map_err(e2s)?.states.last().unwrap();
            ensure(tr.state == want, || format!("S={s}: {} != {want} on {moves:?}", tr.state))?;
            let mut padded = vec![0usize; s + 1];
            padded.extend(&x);
            let traj = a.run(0, &padded).map_err(e2s)?.states;
            ensure(traj[tr.t_final - 1] == tr.boundary, || format!("S={s}: t_final not at wall {}", tr.boundary))?;
        }
    }
    Ok("S=1..8, 10000 length-64 sequences each; t_final always on the detected wall".into())
}

fn algebra_checks() -> Outcome {
    let ff = analyze(&Semiautomaton::flip_flop()).map_err(e2s)?.semigroup_size;
    let s5 = catalog::group("S5").map_err(e2s)?.len();
    let c6 = catalog::group("C6").map_err(e2s)?.len();
    ensure((ff, s5, c6) == (3, 120, 6), || format!("sizes flip-flop {ff}, S5 {s5}, C6 {c6}"))?;
    let s4 = catalog::group("S4").map_err(e2s)?;
    let a5 = catalog::group("A5").map_err(e2s)?;
    ensure(is_solvable_group(&s4).map_err(e2s)? && !is_solvable_group(&a5).map_err(e2s)?, || "solvability verdicts".into())?;
    let mut f = composition_series(&s4).map_err(e2s)?.factor_orders;
    f.sort_unstable();
    ensure(f == vec![2, 2, 2, 3], || format!("S4 factors {f:?}"))?;
    let again = semigroup_closure(&s4.elements).map_err(e2s)?;
    ensure(again.len() == s4.len(), || "closure is not idempotent".into())?;
    let mut rng = SplitMix64::new(29);
    let cascades = shipped::all();
    for c in &cascades {
        for _ in 0..1000 {
            let x = rng.sequence(32, c.target.num_symbols());
            let got = cascade_evaluate(&c.spec, &c.q0_tuple, &x).map_err(e2s)?.outputs;
            ensure(got == c.target.run(c.q0, &x).map_err(e2s)?.states, || format!("cascade {} differs", c.name))?;
        }
    }
    Ok(format!("sizes, verdicts, S4 factors, {} shipped cascades × 1000 sequences", cascades.len()))
}

fn refusal() -> Outcome {
    for name in ["A5", "S5"] {
        let a = catalog::canonical(name).map_err(e2s)?;
        match compile(&a, 0, Construction::KrohnRhodes, 8) {
            Err(Error::Refusal(m)) if m.contains("non-solvable") => {}
            other => return Err(format!("{name}: expected a refusal, got {:?}", other.map(|_| ()))),
        }
        let (net, _) = compile(&a, 0, Construction::LogDepth, 32).map_err(e2s)?;
        let r = differential_test(&a, 0, &net, 32, 1000, 31).map_err(e2s)?;
        ensure(r.mismatches == 0, || format!("{name} log-depth: {} mismatches", r.mismatches))?;
    }
    Ok("A5, S5 refused by krohn-rhodes; log-depth passes 1000 trials at T=32".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exact simulation, exhaustive", exhaustive_simulation),
        ("exact simulation, randomized", randomized_simulation),
        ("depth accounting", depth_accounting),
        ("metric conformance", metric_conformance),
        ("gadget suite", gadget_suite),
        ("softmax-selection bound", softmax_bound),
        ("gridworld recurrence equivalence", gridworld_recurrence),
        ("algebra oracle checks", algebra_checks),
        ("refusal correctness", refusal),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS  {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.1}s): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
