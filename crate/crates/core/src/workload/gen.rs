//! Synthetic workloads: per-type arrival processes over a fixed horizon.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EetMatrix, Task, TaskTypeId};
use crate::time::{Ticks, TICKS_PER_SECOND};

use super::rng::SimRng;

pub const DEFAULT_BETA: f64 = 1.5;

/// Inter-arrival process, parameters in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "lowercase")]
pub enum ArrivalProcess {
    Constant {
        period: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Poisson arrivals; `rate` is tasks per second.
    Exponential {
        rate: f64,
    },
}

impl ArrivalProcess {
    fn check(&self) -> Result<()> {
        let ok = match *self {
            ArrivalProcess::Constant { period } => period.is_finite() && period > 0.0,
            ArrivalProcess::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi && hi > 0.0,
            ArrivalProcess::Exponential { rate } => rate.is_finite() && rate > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid arrival process {self:?}")))
        }
    }

    /// Next inter-arrival gap in seconds.
    fn gap(&self, rng: &mut SimRng) -> f64 {
        match *self {
            ArrivalProcess::Constant { period } => period,
            ArrivalProcess::Uniform { lo, hi } => lo + rng.next_f64() * (hi - lo),
            // Inverse CDF; 1 - u lies in (0, 1].
            ArrivalProcess::Exponential { rate } => -(1.0 - rng.next_f64()).ln() / rate,
        }
    }

    /// Same process with its arrival rate multiplied by `k`.
    pub fn intensified(&self, k: f64) -> Self {
        match *self {
            ArrivalProcess::Constant { period } => ArrivalProcess::Constant { period: period / k },
            ArrivalProcess::Uniform { lo, hi } => ArrivalProcess::Uniform { lo: lo / k, hi: hi / k },
            ArrivalProcess::Exponential { rate } => ArrivalProcess::Exponential { rate: rate * k },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeArrivals {
    pub task_type: String,
    #[serde(flatten)]
    pub process: ArrivalProcess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadGenSpec {
    pub types: Vec<TypeArrivals>,
    /// Seconds.
    pub horizon: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn secs_to_ticks(secs: f64) -> Ticks {
    Ticks((secs * TICKS_PER_SECOND as f64).round() as u64)
}

impl WorkloadGenSpec {
    pub fn check(&self, eet: &EetMatrix) -> Result<Vec<TaskTypeId>> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        self.types
            .iter()
            .map(|ta| {
                ta.process.check()?;
                eet.type_by_name(&ta.task_type)
                    .ok_or_else(|| Error::Config(format!("task type {} is not defined in the EET", ta.task_type)))
            })
            .collect()
    }

    /// Every process's rate multiplied by `k`.
    pub fn intensified(&self, k: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.types {
            t.process = t.process.intensified(k);
        }
        out
    }
}

/// Draws arrivals for each type until the next one would pass the horizon,
/// then merges, sorts, and numbers them. Deadline = arrival + beta times the
/// type's mean finite EET.
pub fn generate_workload(spec: &WorkloadGenSpec, eet: &EetMatrix) -> Result<Vec<Task>> {
    let type_ids = spec.check(eet)?;
    let horizon = secs_to_ticks(spec.horizon);
    let mut arrivals: Vec<(Ticks, usize, TaskTypeId)> = Vec::new();
    for (stream, (ta, &type_id)) in spec.types.iter().zip(&type_ids).enumerate() {
        let mut rng = SimRng::new(spec.seed, stream as u64);
        let mut at = Ticks::ZERO;
        loop {
            at += secs_to_ticks(ta.process.gap(&mut rng));
            if at > horizon {
                break;
            }
            arrivals.push((at, stream, type_id));
        }
    }
    // Stable: same-tick arrivals keep spec order, then draw order.
    arrivals.sort_by_key(|&(at, stream, _)| (at, stream));
    Ok(arrivals
        .into_iter()
        .enumerate()
        .map(|(id, (arrival, _, t))| {
            let slack = Ticks((spec.beta * eet.mean_finite(t)).round() as u64);
            Task::new(id, t, arrival, arrival + slack)
        })
        .collect())
}
