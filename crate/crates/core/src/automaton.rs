//! Semiautomata, the sequential oracle, and the builtin catalog.

use crate::algebra::Transformation;
use crate::error::{input, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;

pub const BOT: &str = "⊥";

/// A deterministic semiautomaton `(Q, Σ, δ)` with states `0..num_states`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAutomaton", into = "RawAutomaton")]
pub struct Semiautomaton {
    name: Option<String>,
    num_states: usize,
    alphabet: Vec<String>,
    delta: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawAutomaton {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    num_states: usize,
    alphabet: Vec<String>,
    delta: Vec<Vec<usize>>,
}

impl TryFrom<RawAutomaton> for Semiautomaton {
    type Error = Error;
    fn try_from(r: RawAutomaton) -> Result<Self> {
        let mut a = Semiautomaton::new(r.num_states, r.alphabet, r.delta)?;
        a.name = r.name;
        Ok(a)
    }
}

impl From<Semiautomaton> for RawAutomaton {
    fn from(a: Semiautomaton) -> Self {
        RawAutomaton {
            name: a.name,
            num_states: a.num_states,
            alphabet: a.alphabet,
            delta: a.delta,
        }
    }
}

/// State trajectory `q_1..q_T` produced from `q0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSequence {
    pub q0: usize,
    pub states: Vec<usize>,
}

impl Semiautomaton {
    pub fn new(num_states: usize, alphabet: Vec<String>, delta: Vec<Vec<usize>>) -> Result<Self> {
        if num_states == 0 {
            return input("num_states must be at least 1");
        }
        if alphabet.is_empty() {
            return input("alphabet must be nonempty");
        }
        let mut seen = HashSet::new();
        for s in &alphabet {
            if !seen.insert(s.as_str()) {
                return input(format!("duplicate alphabet label {s:?}"));
            }
        }
        if delta.len() != alphabet.len() {
            return input(format!(
                "delta has {} rows but alphabet has {} symbols",
                delta.len(),
                alphabet.len()
            ));
        }
        for (i, row) in delta.iter().enumerate() {
            if row.len() != num_states {
                return input(format!("delta row {i} has length {}, expected {num_states}", row.len()));
            }
            if let Some(&q) = row.iter().find(|&&q| q >= num_states) {
                return input(format!("delta row {i} has out-of-range state {q}"));
            }
        }
        Ok(Semiautomaton { name: None, num_states, alphabet, delta })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn delta(&self) -> &[Vec<usize>] {
        &self.delta
    }

    pub fn step(&self, q: usize, sigma: usize) -> usize {
        self.delta[sigma][q]
    }

    pub fn symbol_index(&self, label: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::Input(format!("unknown symbol {label:?}")))
    }

    pub fn encode_symbols<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels.iter().map(|s| self.symbol_index(s.as_ref())).collect()
    }

    /// Runs the recurrence `q_t = δ(q_{t-1}, σ_t)` over symbol indices.
    pub fn run(&self, q0: usize, inputs: &[usize]) -> Result<StateSequence> {
        if q0 >= self.num_states {
            return input(format!("q0={q0} out of range for {} states", self.num_states));
        }
        let mut q = q0;
        let mut states = Vec::with_capacity(inputs.len());
        for &s in inputs {
            if s >= self.alphabet.len() {
                return input(format!("symbol index {s} out of range"));
            }
            q = self.delta[s][q];
            states.push(q);
        }
        Ok(StateSequence { q0, states })
    }

    pub fn transition_map(&self, label: &str) -> Result<Transformation> {
        let s = self.symbol_index(label)?;
        Ok(Transformation::new_unchecked(self.delta[s].clone()))
    }

    pub fn transition_maps(&self) -> Vec<Transformation> {
        self.delta.iter().map(|r| Transformation::new_unchecked(r.clone())).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("automaton serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// `C_n`: states and symbols are residues, `δ(q, σ) = q + σ mod n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return input("cyclic(n) needs n ≥ 1");
        }
        let alphabet = (0..n).map(|s| s.to_string()).collect();
        let delta = (0..n).map(|s| (0..n).map(|q| (q + s) % n).collect()).collect();
        Ok(Self::new(n, alphabet, delta)?.with_name(format!("cyclic({n})")))
    }

    pub fn parity() -> Self {
        Self::cyclic(2).unwrap().with_name("parity")
    }

    /// Memory over `n` values: `Σ = {⊥, 0..n-1}`, a value symbol overwrites the state.
    pub fn memory(n: usize) -> Result<Self> {
        if n == 0 {
            return input("memory(n) needs n ≥ 1");
        }
        let mut alphabet = vec![BOT.to_string()];
        alphabet.extend((0..n).map(|s| s.to_string()));
        let mut delta = vec![(0..n).collect::<Vec<_>>()];
        delta.extend((0..n).map(|s| vec![s; n]));
        Ok(Self::new(n, alphabet, delta)?.with_name(format!("memory({n})")))
    }

    /// Two-state flip-flop with symbols `⊥, 1, 2`; symbol `i` writes state `i-1`.
    pub fn flip_flop() -> Self {
        let alphabet = vec![BOT.to_string(), "1".into(), "2".into()];
        Self::new(2, alphabet, vec![vec![0, 1], vec![0, 0], vec![1, 1]])
            .unwrap()
            .with_name("flip-flop")
    }

    /// Bounded line `0..=S` with actions `L, ⊥, R`.
    pub fn gridworld(s: usize) -> Result<Self> {
        if s == 0 {
            return input("gridworld(S) needs S ≥ 1");
        }
        let alphabet = vec!["L".to_string(), BOT.to_string(), "R".to_string()];
        let delta = vec![
            (0..=s).map(|q| q.saturating_sub(1)).collect(),
            (0..=s).collect(),
            (0..=s).map(|q| (q + 1).min(s)).collect(),
        ];
        Ok(Self::new(s + 1, alphabet, delta)?.with_name(format!("gridworld({s})")))
    }

    /// Dihedral group of order `2n` acting on `(s, b)`, encoded as `s + n·[b = -1]`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return input("dihedral(n) needs n ≥ 2");
        }
        let alphabet = vec!["advance".to_string(), "reverse".to_string()];
        let mut adv = vec![0; 2 * n];
        let mut rev = vec![0; 2 * n];
        for s in 0..n {
            adv[s] = (s + 1) % n;
            adv[s + n] = (s + n - 1) % n + n;
            rev[s] = s + n;
            rev[s + n] = s;
        }
        Ok(Self::new(2 * n, alphabet, vec![adv, rev])?.with_name(format!("dihedral({n})")))
    }

    /// Permutation action of the given generators on their ground set.
    pub fn permutation_group(generators: &[Vec<usize>]) -> Result<Self> {
        let Some(first) = generators.first() else {
            return input("permutation-group needs at least one generator");
        };
        let n = first.len();
        for g in generators {
            if g.len() != n {
                return input("generators must act on the same ground set");
            }
            let mut seen = vec![false; n];
            for &x in g {
                if x >= n || seen[x] {
                    return input(format!("{g:?} is not a permutation"));
                }
                seen[x] = true;
            }
        }
        let alphabet = (0..generators.len()).map(|i| format!("g{i}")).collect();
        Ok(Self::new(n, alphabet, generators.to_vec())?.with_name("permutation-group"))
    }

    /// Synchronous product; state `(a, b)` is `a + |Q_A|·b`, symbols are `"a|b"`.
    pub fn direct_product(a: &Self, b: &Self) -> Result<Self> {
        let na = a.num_states;
        let n = na * b.num_states;
        let mut alphabet = Vec::new();
        let mut delta = Vec::new();
        for (sb, lb) in b.alphabet.iter().enumerate() {
            for (sa, la) in a.alphabet.iter().enumerate() {
                alphabet.push(format!("{la}|{lb}"));
                delta.push((0..n).map(|q| a.delta[sa][q % na] + na * b.delta[sb][q / na]).collect());
            }
        }
        let name = format!(
            "direct-product({},{})",
            a.name().unwrap_or("?"),
            b.name().unwrap_or("?")
        );
        Ok(Self::new(n, alphabet, delta)?.with_name(name))
    }
}

/// Builds a catalog automaton from a textual spec such as `cyclic(3)`,
/// `memory(2)`, `gridworld(4)`, `dihedral(4)`, `parity`, `flip-flop`,
/// `permutation-group([[1,0,2],[1,2,0]])` or `direct-product(cyclic(2),cyclic(3))`.
pub fn builtin(spec: &str) -> Result<Semiautomaton> {
    let spec = spec.trim();
    let (name, arg) = match spec.find('(') {
        Some(i) if spec.ends_with(')') => (&spec[..i], Some(&spec[i + 1..spec.len() - 1])),
        Some(_) => return input(format!("malformed builtin spec {spec:?}")),
        None => (spec, None),
    };
    let int_arg = || -> Result<usize> {
        arg.and_then(|a| a.trim().parse().ok())
            .ok_or_else(|| Error::Input(format!("{name} needs one integer parameter")))
    };
    match name.trim() {
        "parity" => Ok(Semiautomaton::parity()),
        "flip-flop" | "flipflop" => Ok(Semiautomaton::flip_flop()),
        "cyclic" => Semiautomaton::cyclic(int_arg()?),
        "memory" => Semiautomaton::memory(int_arg()?),
        "gridworld" => Semiautomaton::gridworld(int_arg()?),
        "dihedral" => Semiautomaton::dihedral(int_arg()?),
        "permutation-group" => {
            let gens: Vec<Vec<usize>> = serde_json::from_str(arg.unwrap_or(""))
                .map_err(|e| Error::Input(format!("bad generator list: {e}")))?;
            Semiautomaton::permutation_group(&gens)
        }
        "direct-product" => {
            let arg = arg.unwrap_or("");
            let split = top_level_comma(arg)
                .ok_or_else(|| Error::Input("direct-product needs two arguments".into()))?;
            let a = builtin(&arg[..split])?;
            let b = builtin(&arg[split + 1..])?;
            Semiautomaton::direct_product(&a, &b)
        }
        other => input(format!("unknown builtin {other:?}")),
    }
}

fn top_level_comma(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

/// Label-level convenience over [`Semiautomaton::run`].
pub fn sequential_simulate<S: AsRef<str>>(
    a: &Semiautomaton,
    q0: usize,
    inputs: &[S],
) -> Result<StateSequence> {
    let idx = a.encode_symbols(inputs)?;
    a.run(q0, &idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_toggle() {
        let p = Semiautomaton::parity();
        let out = sequential_simulate(&p, 0, &["1", "0", "1", "1"]).unwrap();
        assert_eq!(out.states, vec![1, 1, 0, 1]);
    }

    #[test]
    fn empty_input() {
        let g = Semiautomaton::gridworld(2).unwrap();
        let out = g.run(1, &[]).unwrap();
        assert!(out.states.is_empty());
    }

    #[test]
    fn grid_clamps() {
        let g = Semiautomaton::gridworld(3).unwrap();
        let out = sequential_simulate(&g, 0, &["R", "R", "R", "R", "L"]).unwrap();
        assert_eq!(out.states, vec![1, 2, 3, 3, 2]);
        assert_eq!(g.num_states(), 4);
        assert_eq!(g.step(0, 0), 0);
        assert_eq!(g.step(3, 2), 3);
    }

    #[test]
    fn transition_maps() {
        let ff = Semiautomaton::flip_flop();
        assert_eq!(ff.transition_map(BOT).unwrap().image(), &[0, 1]);
        assert_eq!(ff.transition_map("1").unwrap().image(), &[0, 0]);
        let c3 = Semiautomaton::cyclic(3).unwrap();
        assert_eq!(c3.transition_map("2").unwrap().image(), &[2, 0, 1]);
        let m2 = Semiautomaton::memory(2).unwrap();
        assert_eq!(m2.alphabet(), &[BOT, "0", "1"]);
        assert_eq!(m2.transition_map(BOT).unwrap().image(), &[0, 1]);
    }

    #[test]
    fn errors() {
        let p = Semiautomaton::parity();
        assert!(matches!(sequential_simulate(&p, 0, &["x"]), Err(Error::Input(_))));
        assert!(matches!(p.run(2, &[0]), Err(Error::Input(_))));
        assert!(builtin("nope(3)").is_err());
        assert!(Semiautomaton::new(2, vec!["a".into(), "a".into()], vec![vec![0, 1]; 2]).is_err());
        assert!(Semiautomaton::new(2, vec!["a".into()], vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn builtin_specs() {
        assert_eq!(builtin("cyclic(2)").unwrap().delta(), Semiautomaton::parity().delta());
        let d = builtin("dihedral(4)").unwrap();
        assert_eq!(d.num_states(), 8);
        let pg = builtin("permutation-group([[1,0,2],[1,2,0]])").unwrap();
        assert_eq!(pg.num_symbols(), 2);
        let dp = builtin("direct-product(cyclic(2),cyclic(3))").unwrap();
        assert_eq!(dp.num_states(), 6);
        assert_eq!(dp.num_symbols(), 6);
    }

    #[test]
    fn json_round_trip() {
        let g = Semiautomaton::gridworld(3).unwrap();
        let back = Semiautomaton::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        assert!(Semiautomaton::from_json(r#"{"num_states":2,"alphabet":["a"],"delta":[[0,5]]}"#).is_err());
    }
}
