use super::counter::compile_mod_counter;
use super::groupsim::{group_automaton_net, GroupSim};
use super::products::combine_wreath_embedded;
use super::report::{norm, CompileReport};
use crate::algebra::{transition_semigroup, GroupTable};
use crate::automaton::Semiautomaton;
use crate::error::{input, Error, Result};
use crate::tkernel::TransformerNet;

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Counter for a cyclic subgroup, labeled by that subgroup's own table.
fn cyclic_sim(g: &GroupTable, members: &[usize], t_max: usize) -> Result<(GroupSim, Vec<usize>)> {
    let (table, elems) = g.restrict(members)?;
    if table.n == 1 {
        return Ok((GroupSim::trivial(t_max), elems));
    }
    let x = table.cyclic_generator().ok_or_else(|| Error::Input("subgroup is not cyclic".into()))?;
    let counter = compile_mod_counter(table.n, t_max)?;
    let mut encode = vec![vec![]; table.n];
    let mut y = table.identity;
    for k in 0..table.n {
        encode[y] = vec![k as i64];
        y = table.op(y, x);
    }
    Ok((GroupSim { name: format!("C{}", table.n), group: table, encode, ..counter }, elems))
}

/// Simulator for a solvable group built up its composition series.
///
/// The largest cyclic member of the series becomes one modular counter. Each
/// step `N ◁ K` with `K/N ≅ C_p` embeds `K` into `N ≀ C_p` through
/// `g ↦ (k ↦ x^k g x^{-(k+ḡ)}, ḡ)` for a fixed `x ∈ K \ N`.
/// `degree` is the size of the permutation domain used in the report bounds.
pub fn compile_solvable_group(g: &GroupTable, t_max: usize, degree: usize) -> Result<(GroupSim, CompileReport)> {
    if t_max < 1 {
        return input("T must be at least 1");
    }
    let sim = if g.n == 1 {
        GroupSim::trivial(t_max)
    } else {
        build(g, t_max)?
    };
    let report = solvable_report(&sim, degree)?;
    Ok((sim, report))
}

fn build(g: &GroupTable, t_max: usize) -> Result<GroupSim> {
    let cs = g.composition_series();
    for (i, &f) in cs.factor_orders.iter().enumerate() {
        if !is_prime(f) {
            let top = cs.chain[i].len();
            return Err(Error::Refusal(format!(
                "composition factor of order {f} (between subgroups of order {top} and {}) is not cyclic of prime order; the group is not solvable",
                top / f
            )));
        }
    }
    let base = (0..cs.chain.len())
        .find(|&i| g.restrict(&cs.chain[i]).map(|(t, _)| t.cyclic_generator().is_some()).unwrap_or(false))
        .expect("the trivial subgroup is cyclic");
    let (mut sim, mut elems) = cyclic_sim(g, &cs.chain[base], t_max)?;
    for j in (0..base).rev() {
        let n_set = &cs.chain[j + 1];
        let p = cs.factor_orders[j];
        let mut pos_n = vec![usize::MAX; g.n];
        for (i, &e) in elems.iter().enumerate() {
            pos_n[e] = i;
        }
        let x = *cs.chain[j].iter().find(|&&e| n_set.binary_search(&e).is_err()).unwrap();
        let r: Vec<usize> = (0..p).map(|k| g.pow(x, k)).collect();
        let (k_table, k_elems) = g.restrict(&cs.chain[j])?;
        let bar = |e: usize| (0..p).find(|&k| n_set.binary_search(&g.op(g.inv[r[k]], e)).is_ok()).unwrap();
        let counter = compile_mod_counter(p, t_max)?;
        let embed = |ki: usize| {
            let e = k_elems[ki];
            let b = bar(e);
            let f = (0..p)
                .map(|k| {
                    let m = g.op(g.op(r[k], e), g.inv[r[(k + b) % p]]);
                    debug_assert!(pos_n[m] != usize::MAX);
                    pos_n[m]
                })
                .collect();
            (f, b)
        };
        sim = combine_wreath_embedded(&sim, &counter, &format!("G{}", k_table.n), k_table, &embed)?;
        elems = k_elems;
    }
    // relabel to the caller's element indices
    let mut encode = vec![vec![]; g.n];
    for (i, &e) in elems.iter().enumerate() {
        encode[e] = sim.encode[i].clone();
    }
    Ok(GroupSim { name: format!("G{}", g.n), group: g.clone(), encode, ..sim })
}

/// Bounds for a solvable group of permutations on `degree` points.
pub fn solvable_report(sim: &GroupSim, degree: usize) -> Result<CompileReport> {
    let m = sim.metrics()?;
    let order = sim.group.n as f64;
    let (n, t) = (degree as f64, sim.t_max as f64);
    let mut r = CompileReport::new(format!("solvable-group:{}", sim.name), sim.t_max, m.clone());
    r.at_most("depth", m.depth as f64, 3.0 * order.log2())
        .at_most("embed_dim", m.embed_dim as f64, 2.0 * order)
        .at_most("heads", m.max_heads as f64, 2.0 * order)
        .at_most("head_dim", m.max_head_dim as f64, 1.0)
        .at_most("mlp_width", m.mlp_width as f64, 20.0 * n * t * order)
        .at_most("norm", norm(&m), 6.0 * n * t)
        .at_most("rep_dim", sim.rep_dim() as f64, 2.0 * order)
        .at_most("rep_size", sim.rep_size as f64, n);
    Ok(r)
}

/// Compiles a group semiautomaton through its (solvable) transition group.
pub fn compile_group_automaton(a: &Semiautomaton, q0: usize, t_max: usize) -> Result<(TransformerNet, CompileReport)> {
    let s = transition_semigroup(a)?;
    if !s.is_group() {
        return input("transition semigroup is not a group");
    }
    let (table, _) = GroupTable::from_semigroup(&s)?;
    let (sim, report) = compile_solvable_group(&table, t_max, a.num_states())?;
    Ok((group_automaton_net(&sim, a, q0, "krohn-rhodes")?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::catalog;

    fn table(name: &str) -> GroupTable {
        GroupTable::from_semigroup(&catalog::group(name).unwrap()).unwrap().0
    }

    fn exhaustive(sim: &GroupSim, t: usize) {
        let net = sim.canonical_net().unwrap();
        let a = sim.canonical_automaton();
        let n = a.num_symbols();
        for code in 0..n.pow(t as u32) {
            let x: Vec<usize> = (0..t).map(|i| code / n.pow(i as u32) % n).collect();
            assert_eq!(net.evaluate(&x).unwrap(), a.run(0, &x).unwrap().states, "{x:?}");
        }
    }

    #[test]
    fn depths_match_series() {
        for (name, depth) in [("C4", 1), ("S3", 4), ("Q8", 4), ("A4", 7), ("S4", 10)] {
            let g = table(name);
            let (sim, r) = compile_solvable_group(&g, 4, g.n).unwrap();
            assert_eq!(sim.depth(), depth, "{name}");
            assert!(r.passed(), "{name}: {:?}", r.failures());
        }
    }

    #[test]
    fn small_groups_exhaustive() {
        for name in ["S3", "Q8"] {
            let (sim, _) = compile_solvable_group(&table(name), 3, 8).unwrap();
            exhaustive(&sim, 3);
        }
    }

    #[test]
    fn a5_refused() {
        let err = compile_solvable_group(&table("A5"), 4, 5).unwrap_err();
        assert!(matches!(err, Error::Refusal(ref m) if m.contains("60")), "{err}");
    }

    #[test]
    fn s4_on_four_points() {
        let a = crate::algebra::catalog::canonical("S4").unwrap();
        let perm = Semiautomaton::permutation_group(&[vec![1, 0, 2, 3], vec![1, 2, 3, 0]]).unwrap();
        let (net, r) = compile_group_automaton(&perm, 2, 6).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        let x = [0, 1, 1, 0, 1, 0];
        assert_eq!(net.evaluate(&x).unwrap(), perm.run(2, &x).unwrap().states);
        assert_eq!(a.num_states(), 24);
    }
}
