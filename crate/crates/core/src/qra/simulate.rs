use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::CorrelationSpec;
use super::rng::StreamFactory;
use super::{RiskRegister, SimulationResult};
use crate::error::{Error, Result};

/// Trial count and seed. Results depend on nothing else: `workers` only sets
/// the size of the thread pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    #[serde(skip)]
    pub workers: usize,
}

impl SimulationConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        SimulationConfig { trials, seed, workers: 0 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Per-risk, per-trial contributions of the simulated risks.
#[derive(Debug, Clone, PartialEq)]
pub struct Contributions {
    pub risk_ids: Vec<String>,
    pub trials: usize,
    /// `columns[k][t]` is risk `k`'s contribution to trial `t`.
    pub columns: Vec<Vec<f64>>,
    pub excluded_catastrophic: Vec<String>,
}

impl Contributions {
    pub fn column(&self, id: &str) -> Option<&[f64]> {
        self.risk_ids
            .iter()
            .position(|r| r == id)
            .map(|k| self.columns[k].as_slice())
    }

    pub fn totals(&self) -> Vec<f64> {
        (0..self.trials)
            .map(|t| self.columns.iter().map(|c| c[t]).sum())
            .collect()
    }

    pub fn into_result(self) -> SimulationResult {
        let totals = self.totals();
        SimulationResult::from_totals(totals, self.excluded_catastrophic)
    }
}

fn run_in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument { name: "workers".into(), reason: e.to_string() })?;
    Ok(pool.install(job))
}

/// Runs the Monte Carlo and keeps every risk's contribution per trial.
pub fn simulate_contributions(
    register: &RiskRegister,
    correlation: &CorrelationSpec,
    config: &SimulationConfig,
) -> Result<Contributions> {
    register.validate()?;
    if config.trials == 0 {
        return Err(Error::InvalidArgument {
            name: "trials".into(),
            reason: "must be at least 1".into(),
        });
    }
    let resolved = correlation.resolve(register)?;
    let risks: Vec<_> = register.simulated().collect();
    let k = risks.len();
    let n = config.trials;

    run_in_pool(config.workers, || {
        let factory = StreamFactory::new(config.seed);
        let mut draws = vec![0.0f64; n * k];
        if k > 0 {
            draws.par_chunks_mut(k).enumerate().for_each(|(t, row)| {
                let mut stream = factory.stream(t as u64);
                for u in row.iter_mut() {
                    *u = stream.uniform();
                }
            });
        }
        let mut columns: Vec<Vec<f64>> = (0..k)
            .into_par_iter()
            .map(|c| (0..n).map(|t| draws[t * k + c]).collect())
            .collect();
        drop(draws);

        if !resolved.is_empty() {
            resolved.induce(&mut columns, config.seed)?;
        }

        columns
            .par_iter_mut()
            .zip(risks.par_iter())
            .for_each(|(col, risk)| {
                for u in col.iter_mut() {
                    *u = risk.contribution(*u);
                }
            });

        Ok(Contributions {
            risk_ids: risks.iter().map(|r| r.id.clone()).collect(),
            trials: n,
            columns,
            excluded_catastrophic: register.catastrophic_ids(),
        })
    })?
}

/// Simulates the register: each risk occurs with its probability and, when it
/// does, adds a draw from its impact distribution. Trial totals are returned
/// sorted. Output is a pure function of `(register, correlation, trials, seed)`.
pub fn simulate(
    register: &RiskRegister,
    correlation: &CorrelationSpec,
    config: &SimulationConfig,
) -> Result<SimulationResult> {
    Ok(simulate_contributions(register, correlation, config)?.into_result())
}
