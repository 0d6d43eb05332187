//! Exhaustive quantized scheduler for tiny instances.
//!
//! Time is cut into equal quanta. In every quantum each processor either
//! idles or runs one job at one of its levels for the whole quantum, and a
//! job runs on at most one processor. The search is memoized on the quantum
//! index and the remaining-work vector.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{JobInstance, MajorGrid, Platform, Timebase};
use crate::partition::{self, PartitionError};

pub const MAX_JOBS: usize = 3;
pub const MAX_PROCESSORS: usize = 2;
pub const MAX_LEVELS: usize = 3;
pub const MAX_QUANTA: usize = 8;
const MAX_STATES: usize = 10_000_000;
const DONE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance exceeds the oracle limit: {0}")]
    TooLarge(String),
    #[error("job {0} window is not aligned to the quantum")]
    Misaligned(String),
    #[error("search visited more than {MAX_STATES} states")]
    StateBudget,
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleJob {
    pub id: String,
    /// Release and deadline as quantum indices.
    pub release: usize,
    pub deadline: usize,
    pub work: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleProcessor {
    /// `(speed, active power mW)` per level.
    pub levels: Vec<(f64, f64)>,
    pub idle_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedInstance {
    pub jobs: Vec<OracleJob>,
    pub processors: Vec<OracleProcessor>,
    pub quantum: f64,
    pub horizon: usize,
}

impl QuantizedInstance {
    /// One oracle processor per core of `platform`; windows in `tb` ticks
    /// must be multiples of `quantum` seconds.
    pub fn from_jobs(
        jobs: &[JobInstance],
        platform: &Platform,
        tb: &Timebase,
        quantum: f64,
        horizon: f64,
    ) -> Result<Self, OracleError> {
        let q_ticks = tb.to_ticks(quantum).map_err(|e| OracleError::TooLarge(e.to_string()))?;
        let to_q = |ticks: i64, id: &str| -> Result<usize, OracleError> {
            if q_ticks <= 0 || ticks % q_ticks != 0 || ticks < 0 {
                return Err(OracleError::Misaligned(id.into()));
            }
            Ok((ticks / q_ticks) as usize)
        };
        let mut out_jobs = Vec::new();
        for j in jobs {
            let id = j.label();
            out_jobs.push(OracleJob {
                release: to_q(j.release, &id)?,
                deadline: to_q(j.deadline, &id)?,
                work: j.min_exec_time,
                id,
            });
        }
        let mut processors = Vec::new();
        for t in &platform.types {
            for _ in 0..t.cores {
                processors.push(OracleProcessor {
                    levels: t.speeds.iter().map(|&s| (s, t.active_power(s))).collect(),
                    idle_power: t.p_idle,
                });
            }
        }
        let horizon_ticks = tb.to_ticks(horizon).map_err(|e| OracleError::TooLarge(e.to_string()))?;
        let inst = Self {
            jobs: out_jobs,
            processors,
            quantum,
            horizon: to_q(horizon_ticks, "horizon")?,
        };
        inst.check_limits()?;
        Ok(inst)
    }

    pub fn check_limits(&self) -> Result<(), OracleError> {
        let too = |m: String| Err(OracleError::TooLarge(m));
        if self.jobs.len() > MAX_JOBS {
            return too(format!("{} jobs > {MAX_JOBS}", self.jobs.len()));
        }
        if self.processors.len() > MAX_PROCESSORS {
            return too(format!("{} processors > {MAX_PROCESSORS}", self.processors.len()));
        }
        if let Some(p) = self.processors.iter().find(|p| p.levels.len() > MAX_LEVELS) {
            return too(format!("{} speed levels > {MAX_LEVELS}", p.levels.len()));
        }
        if self.horizon > MAX_QUANTA {
            return too(format!("{} quanta > {MAX_QUANTA}", self.horizon));
        }
        if let Some(j) = self.jobs.iter().find(|j| j.deadline > self.horizon || j.release >= j.deadline) {
            return too(format!("job {} window outside the horizon", j.id));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub feasible: bool,
    /// Minimal total energy (active plus idle) in mJ, when feasible.
    pub energy: Option<f64>,
}

struct Search<'a> {
    inst: &'a QuantizedInstance,
    memo: HashMap<(usize, Vec<i64>), f64>,
    /// Every per-quantum choice: per processor, `None` or `(job, level)`.
    choices: Vec<Vec<Option<(usize, usize)>>>,
}

fn key(remaining: &[f64]) -> Vec<i64> {
    remaining.iter().map(|r| (r * 1e9).round() as i64).collect()
}

impl Search<'_> {
    fn best(&mut self, t: usize, remaining: &[f64]) -> Result<f64, OracleError> {
        if t == self.inst.horizon {
            return Ok(0.0);
        }
        let k = (t, key(remaining));
        if let Some(&v) = self.memo.get(&k) {
            return Ok(v);
        }
        if self.memo.len() >= MAX_STATES {
            return Err(OracleError::StateBudget);
        }
        let q = self.inst.quantum;
        let mut best = f64::INFINITY;
        for c in 0..self.choices.len() {
            let choice = &self.choices[c];
            let mut next = remaining.to_vec();
            let mut cost = 0.0;
            let mut ok = true;
            for (p, slot) in choice.iter().enumerate() {
                let proc = &self.inst.processors[p];
                match *slot {
                    None => cost += q * proc.idle_power,
                    Some((j, l)) => {
                        let job = &self.inst.jobs[j];
                        if t < job.release || t >= job.deadline || remaining[j] <= DONE_TOL {
                            ok = false;
                            break;
                        }
                        let (s, pw) = proc.levels[l];
                        next[j] = (next[j] - q * s).max(0.0);
                        cost += q * pw;
                    }
                }
            }
            if !ok {
                continue;
            }
            if self
                .inst
                .jobs
                .iter()
                .enumerate()
                .any(|(j, job)| job.deadline == t + 1 && next[j] > DONE_TOL)
            {
                continue;
            }
            let rest = self.best(t + 1, &next)?;
            best = best.min(cost + rest);
        }
        self.memo.insert(k, best);
        Ok(best)
    }
}

fn all_choices(inst: &QuantizedInstance) -> Vec<Vec<Option<(usize, usize)>>> {
    let mut out: Vec<Vec<Option<(usize, usize)>>> = vec![Vec::new()];
    for proc in &inst.processors {
        let mut grown = Vec::new();
        for partial in &out {
            let mut opts = vec![None];
            for j in 0..inst.jobs.len() {
                if partial.iter().any(|s| matches!(s, Some((pj, _)) if *pj == j)) {
                    continue;
                }
                opts.extend((0..proc.levels.len()).map(|l| Some((j, l))));
            }
            for o in opts {
                let mut v = partial.clone();
                v.push(o);
                grown.push(v);
            }
        }
        out = grown;
    }
    out
}

/// Minimal-energy quantized schedule, if any meets every deadline.
pub fn brute_force(inst: &QuantizedInstance) -> Result<OracleResult, OracleError> {
    inst.check_limits()?;
    // jobs with no work are trivially done
    let remaining: Vec<f64> = inst.jobs.iter().map(|j| j.work.max(0.0)).collect();
    let mut search = Search {
        inst,
        memo: HashMap::new(),
        choices: all_choices(inst),
    };
    let e = search.best(0, &remaining)?;
    Ok(if e.is_finite() {
        OracleResult {
            feasible: true,
            energy: Some(e),
        }
    } else {
        OracleResult {
            feasible: false,
            energy: None,
        }
    })
}

/// LP-DVFS and the quantized oracle on the same jobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub lp_feasible: bool,
    pub lp_energy: Option<f64>,
    pub oracle: OracleResult,
    /// Every `omega * h` of the LP optimum is a whole number of quanta, so
    /// the oracle can realize it exactly.
    pub aligned: bool,
}

impl Comparison {
    /// Verdicts agree, the oracle never beats the LP, and aligned optima cost the same.
    pub fn agrees(&self, rel_tol: f64) -> bool {
        if self.lp_feasible != self.oracle.feasible {
            return false;
        }
        match (self.lp_energy, self.oracle.energy) {
            (Some(a), Some(b)) => b >= a * (1.0 - rel_tol) && (!self.aligned || (a - b).abs() <= rel_tol * a.abs()),
            _ => true,
        }
    }
}

pub fn compare_with_lp(
    jobs: &[JobInstance],
    platform: &Platform,
    tb: &Timebase,
    quantum: f64,
    horizon: f64,
) -> Result<Comparison, OracleError> {
    let inst = QuantizedInstance::from_jobs(jobs, platform, tb, quantum, horizon)?;
    let oracle = brute_force(&inst)?;
    let mut ticks: Vec<i64> = jobs.iter().flat_map(|j| [j.release, j.deadline]).collect();
    ticks.push(0);
    ticks.push(tb.to_ticks(horizon).map_err(|e| OracleError::TooLarge(e.to_string()))?);
    let grid = MajorGrid::from_boundaries(ticks, *tb).map_err(|e| OracleError::TooLarge(e.to_string()))?;
    let lp = match partition::solve_lp_dvfs(jobs, &grid, platform) {
        Ok(p) => Some(p),
        Err(PartitionError::Infeasible(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let aligned = lp.as_ref().is_some_and(|p| {
        (0..grid.interval_count()).all(|mu| {
            p.omega[mu].iter().flatten().flatten().all(|w| {
                let q = w * grid.length(mu) / quantum;
                (q - q.round()).abs() < 1e-7
            })
        })
    });
    Ok(Comparison {
        lp_feasible: lp.is_some(),
        lp_energy: lp.map(|p| p.total_energy(platform)),
        oracle,
        aligned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proc(levels: &[(f64, f64)], idle: f64) -> OracleProcessor {
        OracleProcessor {
            levels: levels.to_vec(),
            idle_power: idle,
        }
    }

    fn job(id: &str, release: usize, deadline: usize, work: f64) -> OracleJob {
        OracleJob {
            id: id.into(),
            release,
            deadline,
            work,
        }
    }

    #[test]
    fn single_quantum_job() {
        let inst = QuantizedInstance {
            jobs: vec![job("A", 0, 1, 0.5)],
            processors: vec![proc(&[(1.0, 1142.0)], 70.0)],
            quantum: 0.5,
            horizon: 2,
        };
        let r = brute_force(&inst).unwrap();
        assert!(r.feasible);
        assert!((r.energy.unwrap() - (0.5 * 1142.0 + 0.5 * 70.0)).abs() < 1e-9);
    }

    #[test]
    fn capacity_bound_is_infeasible() {
        let inst = QuantizedInstance {
            jobs: vec![job("A", 0, 3, 3.5)],
            processors: vec![proc(&[(1.0, 10.0)], 1.0), proc(&[(1.0, 10.0)], 1.0)],
            quantum: 1.0,
            horizon: 3,
        };
        assert!(!brute_force(&inst).unwrap().feasible);
    }

    #[test]
    fn no_job_runs_twice_in_a_quantum() {
        // two processors but one job needing two quanta in a one-quantum window
        let inst = QuantizedInstance {
            jobs: vec![job("A", 0, 1, 2.0)],
            processors: vec![proc(&[(1.0, 10.0)], 1.0), proc(&[(1.0, 10.0)], 1.0)],
            quantum: 1.0,
            horizon: 1,
        };
        assert!(!brute_force(&inst).unwrap().feasible);
    }

    #[test]
    fn limits_are_enforced() {
        let inst = QuantizedInstance {
            jobs: vec![job("A", 0, 9, 1.0)],
            processors: vec![proc(&[(1.0, 10.0)], 1.0)],
            quantum: 1.0,
            horizon: 9,
        };
        assert!(matches!(brute_force(&inst), Err(OracleError::TooLarge(_))));
    }

    #[test]
    fn lp_and_oracle_agree_on_a_two_job_instance() {
        use crate::fixtures::big_little;
        let mut platform = big_little(1, 0);
        platform.types[0].speeds = vec![0.5, 1.0];
        let job = |t: &str, r: i64, d: i64, x: f64| JobInstance {
            task: t.into(),
            instance: 1,
            release: r * 1000,
            deadline: d * 1000,
            min_exec_time: x,
        };
        let jobs = [job("A", 0, 2, 1.0), job("B", 0, 4, 1.0)];
        let c = compare_with_lp(&jobs, &platform, &Timebase::default(), 1.0, 4.0).unwrap();
        assert!(c.lp_feasible && c.oracle.feasible && c.aligned);
        assert!(c.agrees(1e-9), "{c:?}");
        // both jobs at half speed fill the core
        let t = &platform.types[0];
        assert!((c.oracle.energy.unwrap() - 4.0 * t.active_power(0.5)).abs() < 1e-9);
    }

    #[test]
    fn halving_the_quantum_never_costs_energy() {
        let levels = [(0.5, 30.0), (1.0, 100.0)];
        let coarse = QuantizedInstance {
            jobs: vec![job("A", 0, 2, 1.25), job("B", 1, 4, 1.0)],
            processors: vec![proc(&levels, 5.0)],
            quantum: 1.0,
            horizon: 4,
        };
        let fine = QuantizedInstance {
            jobs: vec![job("A", 0, 4, 1.25), job("B", 2, 8, 1.0)],
            processors: vec![proc(&levels, 5.0)],
            quantum: 0.5,
            horizon: 8,
        };
        let a = brute_force(&coarse).unwrap().energy.unwrap();
        let b = brute_force(&fine).unwrap().energy.unwrap();
        assert!(b <= a + 1e-9, "{b} > {a}");
    }
}
