use super::rng::SplitMix64;
use crate::automaton::Semiautomaton;
use crate::error::{Error, Result};
use crate::tkernel::TransformerNet;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub t: usize,
    pub sequential_steps: usize,
    pub layer_steps: usize,
    /// Mean seconds per sequence.
    pub oracle_seconds: f64,
    pub net_seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchResult {
    pub automaton: String,
    pub threads: usize,
    pub rows: Vec<BenchRow>,
}

/// Times the oracle against each net on `reps` random sequences of the net's
/// compiled length. Step counts are exact; timings are informational.
pub fn bench(a: &Semiautomaton, q0: usize, nets: &[TransformerNet], threads: usize, reps: usize) -> Result<BenchResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    let reps = reps.max(1);
    let mut rows = Vec::with_capacity(nets.len());
    for net in nets {
        let t = net.t_max;
        let mut rng = SplitMix64::new(t as u64);
        let seqs: Vec<Vec<usize>> = (0..reps).map(|_| rng.sequence(t, a.num_symbols())).collect();
        let start = Instant::now();
        for x in &seqs {
            a.run(q0, x)?;
        }
        let oracle_seconds = start.elapsed().as_secs_f64() / reps as f64;
        let plan = net.plan();
        let start = Instant::now();
        pool.install(|| seqs.iter().try_for_each(|x| plan.evaluate(x).map(|_| ())))?;
        let net_seconds = start.elapsed().as_secs_f64() / reps as f64;
        rows.push(BenchRow { t, sequential_steps: t, layer_steps: net.depth(), oracle_seconds, net_seconds });
    }
    Ok(BenchResult { automaton: a.name().unwrap_or("automaton").to_string(), threads, rows })
}
