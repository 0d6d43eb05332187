//! Hyperperiod-constant workload allocation baselines.
//!
//! Each task gets one density `delta_iq^r` per type and level for the whole
//! hyperperiod. With level speeds free this is GWA-DDiscrete; pinned to each
//! type's fastest level it is GWA-NoDVFS, the normalization reference.

use thiserror::Error;

use crate::model::{self, JobInstance, MajorGrid, ModelError, Platform, TaskSpec, Timebase, TYPE_COUNT};
use crate::partition::{SpeedSets, WorkloadPartition};
use crate::simplex::{self, LinearProgram, LpError, LpStatus, Relation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("LP solver reported {0:?}")]
    Solver(LpStatus),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GwaAllocation {
    pub task_ids: Vec<String>,
    pub speeds: SpeedSets,
    /// Share of task `i`'s work done on type `r` at level `q`: `y[i][r][q]`.
    pub y: Vec<[Vec<f64>; TYPE_COUNT]>,
    /// Fraction of each job window spent on type `r` at level `q`.
    pub delta: Vec<[Vec<f64>; TYPE_COUNT]>,
    pub hyperperiod: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GwaResult {
    pub allocation: GwaAllocation,
    /// Active-minus-idle energy over the hyperperiod, mJ.
    pub objective: f64,
    /// Objective plus the platform idling for the hyperperiod, mJ.
    pub energy: f64,
}

/// `min{d_i, p_i}` in seconds.
fn span(task: &TaskSpec) -> f64 {
    task.period.map_or(task.deadline, |p| task.deadline.min(p))
}

pub fn solve_gwa_ddiscrete(taskset: &[TaskSpec], platform: &Platform, tb: &Timebase) -> Result<GwaResult, BaselineError> {
    let l = model::hyperperiod(taskset, tb)?;
    let speeds: SpeedSets = std::array::from_fn(|r| platform.types[r].speeds.clone());
    let n = taskset.len();
    let mut lp = LinearProgram::new();
    // columns are densities; (i, r, q, column)
    let mut cols = Vec::new();
    for (i, task) in taskset.iter().enumerate() {
        task.validate()?;
        let period = task.period.expect("hyperperiod exists");
        let weight = l * span(task) / period;
        for (r, t) in platform.types.iter().enumerate() {
            if t.cores == 0 {
                continue;
            }
            for (q, &s) in speeds[r].iter().enumerate() {
                let c = lp.add_variable(0.0, 1.0, weight * (t.active_power(s) - t.p_idle));
                cols.push((i, r, q, c));
            }
        }
    }
    for (i, task) in taskset.iter().enumerate() {
        let mine: Vec<_> = cols.iter().filter(|c| c.0 == i).collect();
        let density = task.density(platform.f_max, 1.0);
        // sum_q y = 1, written through delta: sum delta * s = density
        lp.add_constraint(mine.iter().map(|c| (c.3, speeds[c.1][c.2])).collect(), Relation::Eq, density);
        lp.add_constraint(mine.iter().map(|c| (c.3, 1.0)).collect(), Relation::Le, 1.0);
    }
    for (r, t) in platform.types.iter().enumerate() {
        let row: Vec<(usize, f64)> = cols.iter().filter(|c| c.1 == r).map(|c| (c.3, 1.0)).collect();
        if !row.is_empty() {
            lp.add_constraint(row, Relation::Le, t.cores as f64);
        }
    }

    let empty = || -> Vec<[Vec<f64>; TYPE_COUNT]> {
        vec![std::array::from_fn(|r| vec![0.0; speeds[r].len()]); n]
    };
    let mut y = empty();
    let mut delta = empty();
    let objective = if cols.is_empty() {
        0.0
    } else {
        let sol = simplex::solve(&lp)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                let stats = model::taskset_stats(taskset, platform, tb);
                let msg = if stats.total_density > stats.capacity + 1e-9 {
                    format!("density {} exceeds capacity {}", stats.total_density, stats.capacity)
                } else {
                    "per-task and per-type density limits cannot be met jointly".into()
                };
                return Err(BaselineError::Infeasible(msg));
            }
            s => return Err(BaselineError::Solver(s)),
        }
        for &(i, r, q, c) in &cols {
            let d = sol.values[c].max(0.0);
            delta[i][r][q] = d;
            let density = taskset[i].density(platform.f_max, 1.0);
            y[i][r][q] = if density > 0.0 { d * speeds[r][q] / density } else { 0.0 };
        }
        sol.objective
    };
    Ok(GwaResult {
        allocation: GwaAllocation {
            task_ids: taskset.iter().map(|t| t.id.clone()).collect(),
            speeds,
            y,
            delta,
            hyperperiod: l,
        },
        objective,
        energy: objective + platform.idle_power() * l,
    })
}

pub fn solve_gwa_nodvfs(taskset: &[TaskSpec], platform: &Platform, tb: &Timebase) -> Result<GwaResult, BaselineError> {
    solve_gwa_ddiscrete(taskset, &platform.max_speed_only(), tb)
}

/// Spread each task's densities uniformly over every one of its job windows.
pub fn gwa_partition(alloc: &GwaAllocation, jobs: &[JobInstance], grid: &MajorGrid) -> WorkloadPartition {
    let mut p = WorkloadPartition::zeros(jobs, grid, alloc.speeds.clone());
    for (j, job) in jobs.iter().enumerate() {
        let Some(i) = alloc.task_ids.iter().position(|t| *t == job.task) else {
            continue;
        };
        let window = grid.window(job).expect("grid covers every job");
        let mut left = job.min_exec_time;
        p.remaining[j][window.start] = left;
        for mu in window {
            p.omega[mu][j] = alloc.delta[i].clone();
            left = (left - grid.length(mu) * p.demand(mu, j)).max(0.0);
            if left < 1e-12 {
                left = 0.0;
            }
            p.remaining[j][mu + 1] = left;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, big_little};

    #[test]
    fn implicit_weights_equal_hyperperiod() {
        let (_, tasks) = fixtures::implicit_taskset(0);
        assert!(tasks.iter().all(|t| span(t) == t.period.unwrap()));
    }

    #[test]
    fn single_task_single_level() {
        let mut platform = big_little(1, 0);
        platform.types[0].speeds = vec![1.0];
        let tasks = [TaskSpec::implicit("A", 5.0, 5.0)];
        let tb = Timebase::default();
        let r = solve_gwa_ddiscrete(&tasks, &platform, &tb).unwrap();
        assert!((r.allocation.y[0][0][0] - 1.0).abs() < 1e-12);
        let t = &platform.types[0];
        assert!((r.objective - 5.0 * (t.active_power(1.0) - t.p_idle)).abs() < 1e-9);
        assert!((r.energy - 5.0 * t.active_power(1.0)).abs() < 1e-9);
    }

    #[test]
    fn nodvfs_normalizes_to_one_and_bounds_dvfs() {
        let platform = big_little(2, 6);
        let tb = Timebase::default();
        let (_, tasks) = fixtures::implicit_taskset(3);
        let base = solve_gwa_nodvfs(&tasks, &platform, &tb).unwrap();
        assert_eq!(base.energy / base.energy, 1.0);
        let dvfs = solve_gwa_ddiscrete(&tasks, &platform, &tb).unwrap();
        assert!(dvfs.energy <= base.energy * (1.0 + 1e-12));
    }

    #[test]
    fn overload_is_infeasible() {
        let tb = Timebase::default();
        let (_, tasks) = fixtures::implicit_taskset(15);
        assert!(matches!(
            solve_gwa_nodvfs(&tasks, &big_little(2, 5), &tb),
            Err(BaselineError::Infeasible(_))
        ));
    }

    #[test]
    fn spread_allocation_meets_every_job() {
        let platform = big_little(1, 1);
        let tb = Timebase::default();
        let (_, tasks) = fixtures::constrained_taskset(5);
        let r = solve_gwa_ddiscrete(&tasks, &platform, &tb).unwrap();
        let l = r.allocation.hyperperiod;
        let jobs = model::expand_periodic(&tasks, l, 1.0, &tb).unwrap();
        let mut ticks: Vec<i64> = jobs.iter().flat_map(|j| [j.release, j.deadline]).collect();
        ticks.extend([0, tb.to_ticks(l).unwrap()]);
        let grid = MajorGrid::from_boundaries(ticks, tb).unwrap();
        let p = gwa_partition(&r.allocation, &jobs, &grid);
        p.check(&jobs, &platform, 1e-9).unwrap();
        assert!((p.total_energy(&platform) - r.energy).abs() < 1e-9 * r.energy);
    }
}
