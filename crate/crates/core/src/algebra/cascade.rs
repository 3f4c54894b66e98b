use super::semigroup::is_permutation_reset;
use crate::automaton::Semiautomaton;
use crate::error::{input, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::path::Path;

/// Feedforward cascade of permutation-reset components.
///
/// Component `i ≥ 1` reads `deps[i-1][(q_1..q_{i-1}, σ)]` as its input symbol,
/// where the upstream states are taken before the current transition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCascade", into = "RawCascade")]
pub struct CascadeSpec {
    pub components: Vec<Semiautomaton>,
    pub deps: Vec<HashMap<(Vec<usize>, usize), usize>>,
    pub readout: HashMap<Vec<usize>, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawCascade {
    components: Vec<Semiautomaton>,
    deps: Vec<BTreeMap<String, String>>,
    readout: BTreeMap<String, usize>,
}

fn join(tuple: &[usize]) -> String {
    tuple.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_tuple(s: &str) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::Input(format!("bad state tuple {s:?}"))))
        .collect()
}

impl TryFrom<RawCascade> for CascadeSpec {
    type Error = Error;
    fn try_from(r: RawCascade) -> Result<Self> {
        if r.components.is_empty() {
            return input("cascade needs at least one component");
        }
        if r.deps.len() + 1 != r.components.len() {
            return input("deps must have one table per component after the first");
        }
        let sigma = &r.components[0];
        let mut deps = Vec::new();
        for (k, table) in r.deps.iter().enumerate() {
            let level = k + 1;
            let target = &r.components[level];
            let mut m = HashMap::new();
            for (key, val) in table {
                let parts: Vec<&str> = key.splitn(level + 1, ',').collect();
                if parts.len() != level + 1 {
                    return input(format!("dep key {key:?} needs {level} states and a symbol"));
                }
                let tuple = parse_tuple(&parts[..level].join(","))?;
                let s = sigma.symbol_index(parts[level])?;
                m.insert((tuple, s), target.symbol_index(val)?);
            }
            deps.push(m);
        }
        let mut readout = HashMap::new();
        for (key, &v) in &r.readout {
            readout.insert(parse_tuple(key)?, v);
        }
        let spec = CascadeSpec { components: r.components, deps, readout };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<CascadeSpec> for RawCascade {
    fn from(c: CascadeSpec) -> Self {
        let sigma = &c.components[0];
        let deps = c
            .deps
            .iter()
            .enumerate()
            .map(|(k, table)| {
                table
                    .iter()
                    .map(|((tuple, s), v)| {
                        let mut key = join(tuple);
                        key.push(',');
                        key.push_str(&sigma.alphabet()[*s]);
                        (key, c.components[k + 1].alphabet()[*v].clone())
                    })
                    .collect()
            })
            .collect();
        let readout = c.readout.iter().map(|(t, &v)| (join(t), v)).collect();
        RawCascade { components: c.components, deps, readout }
    }
}

/// States of every level plus the readout at each position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeTrace {
    pub tuples: Vec<Vec<usize>>,
    pub outputs: Vec<usize>,
}

impl CascadeSpec {
    pub fn alphabet(&self) -> &[String] {
        self.components[0].alphabet()
    }

    pub fn levels(&self) -> usize {
        self.components.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.components.iter().enumerate() {
            if !is_permutation_reset(c) {
                return input(format!("component {i} is not permutation-reset"));
            }
        }
        for (k, table) in self.deps.iter().enumerate() {
            let level = k + 1;
            if let Some(((t, _), _)) = table.iter().find(|((t, _), _)| {
                t.len() != level || t.iter().zip(&self.components).any(|(&q, c)| q >= c.num_states())
            }) {
                return input(format!("dep table {level} has malformed tuple {t:?}"));
            }
            if table.values().any(|&v| v >= self.components[level].num_symbols()) {
                return input(format!("dep table {level} maps to an unknown symbol"));
            }
        }
        Ok(())
    }

    pub fn dep_symbol(&self, level: usize, prev: &[usize], sigma: usize) -> Result<usize> {
        if level == 0 {
            return Ok(sigma);
        }
        self.deps[level - 1]
            .get(&(prev[..level].to_vec(), sigma))
            .copied()
            .ok_or_else(|| {
                Error::Input(format!(
                    "dep table {level} has no entry for ({}, {})",
                    join(&prev[..level]),
                    self.alphabet()[sigma]
                ))
            })
    }

    pub fn step(&self, prev: &[usize], sigma: usize) -> Result<Vec<usize>> {
        (0..self.levels())
            .map(|i| Ok(self.components[i].step(prev[i], self.dep_symbol(i, prev, sigma)?)))
            .collect()
    }

    pub fn read(&self, tuple: &[usize]) -> Result<usize> {
        self.readout
            .get(tuple)
            .copied()
            .ok_or_else(|| Error::Input(format!("readout has no entry for ({})", join(tuple))))
    }

    /// Tuples reachable from `q0` under every input word.
    pub fn reachable(&self, q0: &[usize]) -> Result<Vec<Vec<usize>>> {
        let mut seen: HashSet<Vec<usize>> = HashSet::from([q0.to_vec()]);
        let mut order = vec![q0.to_vec()];
        let mut queue = VecDeque::from([q0.to_vec()]);
        while let Some(t) = queue.pop_front() {
            for s in 0..self.alphabet().len() {
                let next = self.step(&t, s)?;
                if seen.insert(next.clone()) {
                    order.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        Ok(order)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cascade serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub fn cascade_evaluate(spec: &CascadeSpec, q0: &[usize], inputs: &[usize]) -> Result<CascadeTrace> {
    if q0.len() != spec.levels() {
        return input(format!("q0 tuple has arity {}, cascade has {} levels", q0.len(), spec.levels()));
    }
    for (i, (&q, c)) in q0.iter().zip(&spec.components).enumerate() {
        if q >= c.num_states() {
            return input(format!("q0 component {i} out of range"));
        }
    }
    let mut cur = q0.to_vec();
    let mut tuples = Vec::with_capacity(inputs.len());
    let mut outputs = Vec::with_capacity(inputs.len());
    for &s in inputs {
        if s >= spec.alphabet().len() {
            return input(format!("symbol index {s} out of range"));
        }
        cur = spec.step(&cur, s)?;
        outputs.push(spec.read(&cur)?);
        tuples.push(cur.clone());
    }
    Ok(CascadeTrace { tuples, outputs })
}

/// Hand-built cascades together with the automaton they realize.
pub mod shipped {
    use super::*;

    pub struct ShippedCascade {
        pub name: String,
        pub spec: CascadeSpec,
        pub target: Semiautomaton,
        pub q0_tuple: Vec<usize>,
        pub q0: usize,
    }

    fn sa(n: usize, alphabet: &[&str], delta: Vec<Vec<usize>>) -> Semiautomaton {
        Semiautomaton::new(n, alphabet.iter().map(|s| s.to_string()).collect(), delta).expect("valid component")
    }

    fn flip_flop(alphabet: &[&str]) -> Semiautomaton {
        let delta = alphabet
            .iter()
            .map(|s| match *s {
                "L" | "reset0" => vec![0, 0],
                "R" | "reset1" => vec![1, 1],
                _ => vec![0, 1],
            })
            .collect();
        sa(2, alphabet, delta)
    }

    fn all_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for &n in sizes {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..n).map(move |q| {
                        let mut t = t.clone();
                        t.push(q);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// Dihedral group of order `2n` as a direction bit driving a mod-`n` counter.
    pub fn dihedral(n: usize) -> ShippedCascade {
        let dir = sa(2, &["advance", "reverse"], vec![vec![0, 1], vec![1, 0]]);
        let counter = sa(
            n,
            &["+1", "-1", "0"],
            vec![
                (0..n).map(|q| (q + 1) % n).collect(),
                (0..n).map(|q| (q + n - 1) % n).collect(),
                (0..n).collect(),
            ],
        );
        let mut dep = HashMap::new();
        for b in 0..2 {
            dep.insert((vec![b], 0), if b == 0 { 0 } else { 1 });
            dep.insert((vec![b], 1), 2);
        }
        let readout = all_tuples(&[2, n]).into_iter().map(|t| (t.clone(), t[1] + n * t[0])).collect();
        ShippedCascade {
            name: format!("dihedral({n})"),
            spec: CascadeSpec { components: vec![dir, counter], deps: vec![dep], readout },
            target: Semiautomaton::dihedral(n).unwrap(),
            q0_tuple: vec![0, 0],
            q0: 0,
        }
    }

    // (cover, σ) ↦ symbol of the second flip-flop: L in cover 0 resets to 0,
    // R in cover 1 resets to 1, anything else keeps.
    fn grid2_dep(cover: usize, sigma: usize) -> usize {
        match (cover, sigma) {
            (0, 0) => 1,
            (1, 2) => 2,
            _ => 0,
        }
    }

    /// Gridworld(2) as a flip-flop over the cover `{0,1}`, `{1,2}` plus an offset flip-flop.
    pub fn grid2() -> ShippedCascade {
        let x1 = flip_flop(&["L", "⊥", "R"]);
        let c = flip_flop(&["keep", "reset0", "reset1"]);
        let mut dep = HashMap::new();
        for x in 0..2 {
            for s in 0..3 {
                dep.insert((vec![x], s), grid2_dep(x, s));
            }
        }
        let readout = all_tuples(&[2, 2]).into_iter().map(|t| (t.clone(), t[0] + t[1])).collect();
        ShippedCascade {
            name: "gridworld(2)".into(),
            spec: CascadeSpec { components: vec![x1, c], deps: vec![dep], readout },
            target: Semiautomaton::gridworld(2).unwrap(),
            q0_tuple: vec![0, 0],
            q0: 0,
        }
    }

    /// Gridworld(3) as a flip-flop over `{0,1,2}`, `{1,2,3}` feeding the
    /// gridworld(2) cascade with the induced relative action.
    pub fn grid3() -> ShippedCascade {
        let x1 = flip_flop(&["L", "⊥", "R"]);
        let x2 = flip_flop(&["L", "⊥", "R"]);
        let c = flip_flop(&["keep", "reset0", "reset1"]);
        let induced = |x1: usize, s: usize| match (x1, s) {
            (0, 0) => 0,
            (1, 2) => 2,
            _ => 1,
        };
        let mut d2 = HashMap::new();
        let mut d3 = HashMap::new();
        for a in 0..2 {
            for s in 0..3 {
                d2.insert((vec![a], s), induced(a, s));
                for b in 0..2 {
                    d3.insert((vec![a, b], s), grid2_dep(b, induced(a, s)));
                }
            }
        }
        let readout = all_tuples(&[2, 2, 2]).into_iter().map(|t| (t.clone(), t[0] + t[1] + t[2])).collect();
        ShippedCascade {
            name: "gridworld(3)".into(),
            spec: CascadeSpec { components: vec![x1, x2, c], deps: vec![d2, d3], readout },
            target: Semiautomaton::gridworld(3).unwrap(),
            q0_tuple: vec![0, 0, 0],
            q0: 0,
        }
    }

    pub fn all() -> Vec<ShippedCascade> {
        vec![dihedral(4), dihedral(3), grid2(), grid3()]
    }
}

#[cfg(test)]
mod tests {
    use super::shipped::*;
    use super::*;

    #[test]
    fn dihedral_hand_check() {
        let d = dihedral(4);
        let tr = cascade_evaluate(&d.spec, &d.q0_tuple, &[0, 1, 0]).unwrap();
        assert_eq!(tr.tuples, vec![vec![0, 1], vec![1, 1], vec![1, 0]]);
        assert_eq!(tr.outputs, vec![1, 5, 4]);
    }

    #[test]
    fn single_component_is_sequential() {
        let c3 = Semiautomaton::cyclic(3).unwrap();
        let spec = CascadeSpec {
            components: vec![c3.clone()],
            deps: vec![],
            readout: (0..3).map(|q| (vec![q], q)).collect(),
        };
        let inputs = [1, 2, 2, 0, 1];
        let tr = cascade_evaluate(&spec, &[1], &inputs).unwrap();
        assert_eq!(tr.outputs, c3.run(1, &inputs).unwrap().states);
    }

    #[test]
    fn shipped_match_targets_exhaustively() {
        for c in all() {
            let k = c.target.num_symbols();
            for len in 0..=7usize {
                for code in 0..k.pow(len as u32) {
                    let mut x = code;
                    let inputs: Vec<usize> = (0..len).map(|_| { let s = x % k; x /= k; s }).collect();
                    let tr = cascade_evaluate(&c.spec, &c.q0_tuple, &inputs).unwrap();
                    assert_eq!(tr.outputs, c.target.run(c.q0, &inputs).unwrap().states, "{}", c.name);
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let d = dihedral(4);
        let back = CascadeSpec::from_json(&d.spec.to_json()).unwrap();
        assert_eq!(back, d.spec);
    }

    #[test]
    fn missing_dep_entry() {
        let mut d = dihedral(4);
        d.spec.deps[0].remove(&(vec![1], 0));
        let r = cascade_evaluate(&d.spec, &d.q0_tuple, &[1, 0]);
        assert!(matches!(r, Err(Error::Input(_))));
    }
}
