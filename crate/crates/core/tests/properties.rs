use proptest::prelude::*;
use semisim::algebra::{catalog, compose, semigroup_closure, GroupTable, Transformation};
use semisim::compiler::{compile, compile_solvable_group, gridworld_final_state, gridworld_trajectory, Construction};
use semisim::tkernel::{build_composition_mlp, build_interp_mlp_1d, build_threshold_mlp};
use semisim::Semiautomaton;

fn table(name: &str) -> GroupTable {
    GroupTable::from_semigroup(&catalog::group(name).unwrap()).unwrap().0
}

fn image(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..n, n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn group_codes_stay_integral_between_layers(name in prop::sample::select(vec!["S3", "D8", "C6"]), seed in any::<u64>()) {
        let g = table(name);
        let (sim, _) = compile_solvable_group(&g, 16, g.n).unwrap();
        let net = sim.canonical_net().unwrap();
        let plan = net.plan();
        let mut rng = semisim::harness::SplitMix64::new(seed);
        let x = rng.sequence(16, g.n);
        let p = net.padding_len();
        for upto in 1..=net.depth() {
            let acts = plan.forward_layers(&x, upto).unwrap();
            for t in 0..x.len() {
                for &k in &sim.rep_dims {
                    let v = acts[(p + t) * net.d + k];
                    prop_assert!((v - v.round()).abs() < 1e-6, "layer {upto} pos {t} dim {k}: {v}");
                    prop_assert!(v.round() >= 0.0 && (v.round() as usize) < sim.rep_size);
                }
            }
        }
    }

    #[test]
    fn interp_1d_is_exact_near_keys(ys in prop::collection::vec(-8i32..8, 1..24), off in -0.25f64..0.25) {
        let delta = 0.5;
        let tab: Vec<(f64, Vec<f64>)> = ys.iter().enumerate().map(|(i, &y)| (i as f64 * delta, vec![y as f64])).collect();
        let m = build_interp_mlp_1d(&tab, delta, 16.0, 8.0).unwrap();
        for (x, y) in &tab {
            let out = m.apply(&[x + off * delta]);
            prop_assert!((out[0] - y[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn threshold_is_a_step(v in 1.0f64..50.0, noise in -0.25f64..0.25) {
        let m = build_threshold_mlp(1.0);
        prop_assert!((m.apply(&[v + noise])[0] - 1.0).abs() < 1e-12);
        prop_assert!(m.apply(&[-v + noise])[0].abs() < 1e-12);
    }

    #[test]
    fn composition_matches_function_composition(n in 2usize..5, seed in any::<u64>()) {
        let mut rng = semisim::harness::SplitMix64::new(seed);
        let f: Vec<usize> = (0..n).map(|_| rng.below(n as u64) as usize).collect();
        let g: Vec<usize> = (0..n).map(|_| rng.below(n as u64) as usize).collect();
        let m = build_composition_mlp(n);
        let mut x: Vec<f64> = g.iter().map(|&v| v as f64 + 1.0).collect();
        x.extend(f.iter().map(|&v| v as f64 + 1.0));
        let out = m.apply(&x);
        for q in 0..n {
            prop_assert!((out[q] - (f[g[q]] as f64 + 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn closure_is_closed(gens in prop::collection::vec(image(4), 1..4)) {
        let ts: Vec<Transformation> = gens.into_iter().map(|g| Transformation::new(g).unwrap()).collect();
        let s = semigroup_closure(&ts).unwrap();
        for t in &ts {
            prop_assert!(s.index_of(t).is_some());
        }
        for i in 0..s.len() {
            for j in 0..s.len() {
                let k = s.mul(i, j);
                prop_assert!(k < s.len());
            }
        }
        for a in &ts {
            for b in &ts {
                prop_assert!(s.index_of(&compose(a, b).unwrap()).is_some());
            }
        }
    }

    #[test]
    fn gridworld_reference_matches_walk(s in 1usize..9, moves in prop::collection::vec(prop::sample::select(vec![-1i8, 1]), 0..80)) {
        let a = Semiautomaton::gridworld(s).unwrap();
        let syms: Vec<usize> = moves.iter().map(|&m| (m + 1) as usize).collect();
        let run = a.run(0, &syms).unwrap().states;
        let traj = gridworld_trajectory(&moves, s).unwrap();
        prop_assert_eq!(&traj, &run);
        let last = run.last().copied().unwrap_or(0);
        prop_assert_eq!(gridworld_final_state(&moves, s).unwrap().state, last);
    }

    #[test]
    fn net_outputs_are_causal(x in prop::collection::vec(0usize..2, 1..24), cut in 0usize..24) {
        let a = Semiautomaton::parity();
        let (net, _) = compile(&a, 0, Construction::LogDepth, 24).unwrap();
        let full = net.evaluate(&x).unwrap();
        let k = cut.min(x.len());
        prop_assert_eq!(&net.evaluate(&x[..k]).unwrap()[..], &full[..k]);
    }
}

#[test]
fn evaluation_is_deterministic() {
    let a = Semiautomaton::gridworld(4).unwrap();
    let (net, _) = compile(&a, 0, Construction::Gridworld, 32).unwrap();
    let mut rng = semisim::harness::SplitMix64::new(9);
    let x = rng.sequence(32, 3);
    let plan = net.plan();
    let first = plan.forward(&x).unwrap();
    for _ in 0..4 {
        assert_eq!(plan.forward(&x).unwrap(), first);
    }
}

#[test]
fn json_round_trip_preserves_outputs() {
    let a = Semiautomaton::memory(3).unwrap();
    let (net, _) = compile(&a, 1, Construction::Memory, 12).unwrap();
    let back = semisim::tkernel::TransformerNet::from_json(&net.to_json()).unwrap();
    let x = [0, 2, 0, 3, 1, 0, 0, 2];
    assert_eq!(net.evaluate(&x).unwrap(), back.evaluate(&x).unwrap());
    assert_eq!(net.evaluate(&x).unwrap(), a.run(1, &x).unwrap().states);
}
