//! Time-indexed workload partitioning over the major grid.
//!
//! Variables are `omega[mu][i][r][q]`, the fraction of interval `mu` that
//! job `i` spends on a type-`r` processor at speed level `q`, plus the
//! remaining work `x_i` at each interior grid boundary of the job's window.

use thiserror::Error;

use crate::model::{JobInstance, MajorGrid, ModelError, Platform, TYPE_COUNT};
use crate::simplex::{self, LinearProgram, LpError, LpStatus, Relation};

/// Work and fractions below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-12;
/// A job whose shares sum to within this of 1 occupies the whole interval.
pub const SHARE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("processor type {0} has cores but no speed levels")]
    EmptySpeedSet(usize),
    #[error("window of job {0} does not start and end on grid boundaries")]
    Misaligned(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("LP solver reported {0:?}")]
    Solver(LpStatus),
    #[error("speed grid needs at least 2 points, got {0}")]
    GridPoints(usize),
    #[error("partition violates its constraints: {0}")]
    Invariant(String),
}

/// Per-type speed level sets used by a partition.
pub type SpeedSets = [Vec<f64>; TYPE_COUNT];

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadPartition {
    pub job_ids: Vec<String>,
    pub grid: MajorGrid,
    pub speeds: SpeedSets,
    /// `omega[mu][i][r][q]`.
    pub omega: Vec<Vec<[Vec<f64>; TYPE_COUNT]>>,
    /// `remaining[i][b]`: work left at grid boundary `b`, seconds at full speed.
    pub remaining: Vec<Vec<f64>>,
}

impl WorkloadPartition {
    /// All-zero partition over `grid`.
    pub fn zeros(jobs: &[JobInstance], grid: &MajorGrid, speeds: SpeedSets) -> Self {
        let n = jobs.len();
        let per_job: [Vec<f64>; TYPE_COUNT] = std::array::from_fn(|r| vec![0.0; speeds[r].len()]);
        Self {
            job_ids: jobs.iter().map(JobInstance::label).collect(),
            grid: grid.clone(),
            omega: vec![vec![per_job; n]; grid.interval_count()],
            remaining: vec![vec![0.0; grid.interval_count() + 1]; n],
            speeds,
        }
    }

    pub fn job_count(&self) -> usize {
        self.job_ids.len()
    }

    /// `omega_i^r[mu]`, summed over speed levels.
    pub fn aggregate(&self, mu: usize, i: usize, r: usize) -> f64 {
        self.omega[mu][i][r].iter().sum()
    }

    /// Demanded average speed `xi_i[mu]`.
    pub fn demand(&self, mu: usize, i: usize) -> f64 {
        (0..TYPE_COUNT)
            .map(|r| {
                self.omega[mu][i][r]
                    .iter()
                    .zip(&self.speeds[r])
                    .map(|(w, s)| w * s)
                    .sum::<f64>()
            })
            .sum()
    }

    /// Jobs with positive workload on both types in interval `mu`.
    pub fn migrating_jobs(&self, mu: usize) -> Vec<usize> {
        (0..self.job_count())
            .filter(|&i| (0..TYPE_COUNT).all(|r| self.aggregate(mu, i, r) > ZERO_TOL))
            .collect()
    }

    /// Inter-cluster migrating jobs: on both types without filling the
    /// interval. Jobs that fill it are ordered safely by the wrap rule.
    pub fn intercluster_jobs(&self, mu: usize) -> Vec<usize> {
        self.migrating_jobs(mu)
            .into_iter()
            .filter(|&i| (0..TYPE_COUNT).map(|r| self.aggregate(mu, i, r)).sum::<f64>() < 1.0 - SHARE_TOL)
            .collect()
    }

    /// Count of nonzero per-type aggregates `omega_i^r[mu]`.
    pub fn nonzero_aggregates(&self, mu: usize) -> usize {
        (0..self.job_count())
            .map(|i| (0..TYPE_COUNT).filter(|&r| self.aggregate(mu, i, r) > ZERO_TOL).count())
            .sum()
    }

    /// Count of nonzero per-level entries `omega_iq^r[mu]`.
    pub fn nonzero_entries(&self, mu: usize) -> usize {
        self.omega[mu]
            .iter()
            .flat_map(|job| job.iter().flat_map(|lv| lv.iter()))
            .filter(|&&w| w > ZERO_TOL)
            .count()
    }

    /// Active-minus-idle energy in mJ, the LP objective.
    pub fn objective(&self, platform: &Platform) -> f64 {
        let mut total = 0.0;
        for mu in 0..self.grid.interval_count() {
            let h = self.grid.length(mu);
            for job in &self.omega[mu] {
                for r in 0..TYPE_COUNT {
                    let t = &platform.types[r];
                    for (w, &s) in job[r].iter().zip(&self.speeds[r]) {
                        total += h * w * (t.active_power(s) - t.p_idle);
                    }
                }
            }
        }
        total
    }

    /// Objective plus the platform idling for the whole horizon.
    pub fn total_energy(&self, platform: &Platform) -> f64 {
        self.objective(platform) + platform.idle_power() * self.grid.horizon()
    }

    /// Check the per-job, per-type and workload-balance constraints.
    pub fn check(&self, jobs: &[JobInstance], platform: &Platform, tol: f64) -> Result<(), PartitionError> {
        let fail = |msg: String| Err(PartitionError::Invariant(msg));
        if jobs.len() != self.job_count() {
            return fail("job count mismatch".into());
        }
        for mu in 0..self.grid.interval_count() {
            for r in 0..TYPE_COUNT {
                let load: f64 = (0..self.job_count()).map(|i| self.aggregate(mu, i, r)).sum();
                if load > platform.types[r].cores as f64 + tol {
                    return fail(format!("interval {mu}: type {} load {load}", r + 1));
                }
            }
            for i in 0..self.job_count() {
                let share: f64 = (0..TYPE_COUNT).map(|r| self.aggregate(mu, i, r)).sum();
                if share > 1.0 + tol {
                    return fail(format!("interval {mu}: job {} share {share}", self.job_ids[i]));
                }
                if self.omega[mu][i].iter().flatten().any(|&w| w < -tol) {
                    return fail(format!("interval {mu}: negative fraction for {}", self.job_ids[i]));
                }
            }
        }
        for (i, job) in jobs.iter().enumerate() {
            let window = self
                .grid
                .window(job)
                .ok_or_else(|| PartitionError::Misaligned(job.label()))?;
            let x = &self.remaining[i];
            if (x[window.start] - job.min_exec_time).abs() > tol || x[window.end].abs() > tol {
                return fail(format!("job {} boundary work", job.label()));
            }
            for mu in 0..self.grid.interval_count() {
                let inside = window.contains(&mu);
                if !inside && self.demand(mu, i) > tol {
                    return fail(format!("job {} runs outside its window", job.label()));
                }
                if inside && x[mu + 1] < x[mu] - self.grid.length(mu) * self.demand(mu, i) - tol {
                    return fail(format!("job {} balance in interval {mu}", job.label()));
                }
            }
        }
        Ok(())
    }
}

/// Index of every LP column.
#[derive(Debug, Clone)]
pub struct LpLayout {
    /// `(mu, i, r, q, column)` for each workload fraction.
    pub omega: Vec<(usize, usize, usize, usize, usize)>,
    /// `x[i][b]`: column of the remaining-work variable at boundary `b`, if free.
    pub remaining: Vec<Vec<Option<usize>>>,
}

#[derive(Debug, Clone)]
pub struct LpDvfs {
    pub lp: LinearProgram,
    pub layout: LpLayout,
    pub speeds: SpeedSets,
}

fn speed_sets(platform: &Platform) -> Result<SpeedSets, PartitionError> {
    for (r, t) in platform.types.iter().enumerate() {
        if t.cores > 0 && t.speeds.is_empty() {
            return Err(PartitionError::EmptySpeedSet(r + 1));
        }
    }
    Ok(std::array::from_fn(|r| platform.types[r].speeds.clone()))
}

pub fn build_lp_dvfs(jobs: &[JobInstance], grid: &MajorGrid, platform: &Platform) -> Result<LpDvfs, PartitionError> {
    let speeds = speed_sets(platform)?;
    let windows = jobs
        .iter()
        .map(|j| grid.window(j).ok_or_else(|| PartitionError::Misaligned(j.label())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut lp = LinearProgram::new();
    let mut omega = Vec::new();
    let n_mu = grid.interval_count();
    // per (i, mu): the omega columns, for the balance and share rows
    let mut cols: Vec<Vec<Vec<(usize, usize, usize)>>> = vec![vec![Vec::new(); n_mu]; jobs.len()];

    for mu in 0..n_mu {
        let h = grid.length(mu);
        for (i, window) in windows.iter().enumerate() {
            if !window.contains(&mu) {
                continue;
            }
            for (r, t) in platform.types.iter().enumerate() {
                if t.cores == 0 {
                    continue;
                }
                for (q, &s) in speeds[r].iter().enumerate() {
                    let c = lp.add_variable(0.0, 1.0, h * (t.active_power(s) - t.p_idle));
                    omega.push((mu, i, r, q, c));
                    cols[i][mu].push((r, q, c));
                }
            }
        }
    }

    let mut remaining = vec![vec![None; n_mu + 1]; jobs.len()];
    for (i, job) in jobs.iter().enumerate() {
        for b in windows[i].start + 1..windows[i].end {
            remaining[i][b] = Some(lp.add_variable(0.0, job.min_exec_time, 0.0));
        }
    }

    for (i, job) in jobs.iter().enumerate() {
        for mu in windows[i].clone() {
            let h = grid.length(mu);
            // x[mu+1] - x[mu] + h * sum(omega * s) >= 0, fixed ends moved to the rhs
            let mut row: Vec<(usize, f64)> = cols[i][mu]
                .iter()
                .map(|&(r, q, c)| (c, h * speeds[r][q]))
                .collect();
            let mut rhs = 0.0;
            match remaining[i][mu + 1] {
                Some(c) => row.push((c, 1.0)),
                None => {} // deadline boundary: x = 0
            }
            match remaining[i][mu] {
                Some(c) => row.push((c, -1.0)),
                None => rhs += job.min_exec_time,
            }
            lp.add_constraint(row, Relation::Ge, rhs);
            let share = cols[i][mu].iter().map(|&(_, _, c)| (c, 1.0)).collect();
            lp.add_constraint(share, Relation::Le, 1.0);
        }
    }
    for mu in 0..n_mu {
        for (r, t) in platform.types.iter().enumerate() {
            if t.cores == 0 {
                continue;
            }
            let row: Vec<(usize, f64)> = (0..jobs.len())
                .flat_map(|i| cols[i][mu].iter().filter(|e| e.0 == r).map(|e| (e.2, 1.0)))
                .collect();
            if !row.is_empty() {
                lp.add_constraint(row, Relation::Le, t.cores as f64);
            }
        }
    }
    Ok(LpDvfs {
        lp,
        layout: LpLayout { omega, remaining },
        speeds,
    })
}

/// Drop workload a job does not need: walk the window forward and scale an
/// interval's fractions down once the job would finish early.
fn tighten(partition: &mut WorkloadPartition, jobs: &[JobInstance]) {
    for (i, job) in jobs.iter().enumerate() {
        let window = partition.grid.window(job).expect("aligned");
        let mut left = job.min_exec_time;
        partition.remaining[i].iter_mut().for_each(|x| *x = 0.0);
        partition.remaining[i][window.start] = left;
        for mu in window.clone() {
            let done = partition.grid.length(mu) * partition.demand(mu, i);
            if done > left {
                let scale = if done > 0.0 { left / done } else { 0.0 };
                for lv in partition.omega[mu][i].iter_mut() {
                    lv.iter_mut().for_each(|w| *w *= scale);
                }
                left = 0.0;
            } else {
                left -= done;
            }
            if left <= ZERO_TOL * job.min_exec_time.max(1.0) {
                left = 0.0;
            }
            partition.remaining[i][mu + 1] = left;
        }
    }
}

/// Smallest reason a job set cannot fit, for error messages.
pub fn diagnose_infeasibility(jobs: &[JobInstance], grid: &MajorGrid, platform: &Platform) -> String {
    let capacity = platform.capacity();
    let fastest = platform.fastest_speed();
    for job in jobs {
        let w = job.window(&grid.timebase);
        if job.min_exec_time > w * fastest + 1e-9 {
            return format!(
                "job {} needs {} s of work but its {} s window allows at most {} s at the fastest speed",
                job.label(),
                job.min_exec_time,
                w,
                w * fastest
            );
        }
    }
    let b = &grid.boundaries;
    let mut worst: Option<(f64, usize, usize, f64)> = None;
    for a in 0..b.len() {
        for e in a + 1..b.len() {
            let demand: f64 = jobs
                .iter()
                .filter(|j| j.release >= b[a] && j.deadline <= b[e])
                .map(|j| j.min_exec_time)
                .sum();
            let span = grid.timebase.to_seconds(b[e] - b[a]);
            let excess = demand - span * capacity;
            if excess > 1e-9 && worst.map_or(true, |w| excess > w.0) {
                worst = Some((excess, a, e, demand));
            }
        }
    }
    match worst {
        Some((_, a, e, demand)) => format!(
            "work {demand} s due within [{}, {}) exceeds platform capacity {capacity} x {} s",
            grid.timebase.to_seconds(b[a]),
            grid.timebase.to_seconds(b[e]),
            grid.timebase.to_seconds(b[e] - b[a])
        ),
        None => "per-job parallelism and per-type core limits cannot be met jointly".into(),
    }
}

/// Solve LP-DVFS to a basic optimum and tighten surplus work.
pub fn solve_lp_dvfs(
    jobs: &[JobInstance],
    grid: &MajorGrid,
    platform: &Platform,
) -> Result<WorkloadPartition, PartitionError> {
    let built = build_lp_dvfs(jobs, grid, platform)?;
    let mut partition = WorkloadPartition::zeros(jobs, grid, built.speeds.clone());
    if jobs.is_empty() {
        return Ok(partition);
    }
    let sol = simplex::solve(&built.lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(PartitionError::Infeasible(diagnose_infeasibility(jobs, grid, platform)))
        }
        s => return Err(PartitionError::Solver(s)),
    }
    for &(mu, i, r, q, c) in &built.layout.omega {
        partition.omega[mu][i][r][q] = sol.values[c].max(0.0);
    }
    tighten(&mut partition, jobs);
    Ok(partition)
}

/// LP-DVFS over `grid_points` evenly spaced levels per type.
pub fn solve_nlp_dvfs(
    jobs: &[JobInstance],
    grid: &MajorGrid,
    platform: &Platform,
    grid_points: usize,
) -> Result<WorkloadPartition, PartitionError> {
    if grid_points < 2 {
        return Err(PartitionError::GridPoints(grid_points));
    }
    solve_lp_dvfs(jobs, grid, &platform.with_uniform_speeds(grid_points))
}

pub fn check_feasibility(jobs: &[JobInstance], grid: &MajorGrid, platform: &Platform) -> bool {
    if jobs.is_empty() {
        return true;
    }
    let Ok(mut built) = build_lp_dvfs(jobs, grid, platform) else {
        return false;
    };
    built.lp.objective.iter_mut().for_each(|c| *c = 0.0);
    matches!(simplex::solve(&built.lp), Ok(s) if s.status == LpStatus::Optimal)
}

/// Frozen-demand LP of one interval: columns follow `(i, r, q)` over the
/// active jobs and the types that have cores.
struct IntervalLp {
    lp: LinearProgram,
    cols: Vec<(usize, usize, usize)>,
}

fn interval_lp(partition: &WorkloadPartition, mu: usize, active: &[usize], platform: &Platform) -> IntervalLp {
    let mut lp = LinearProgram::new();
    let mut cols = Vec::new();
    for &i in active {
        for (r, t) in platform.types.iter().enumerate() {
            if t.cores == 0 {
                continue;
            }
            for (q, &s) in partition.speeds[r].iter().enumerate() {
                lp.add_variable(0.0, 1.0, t.active_power(s) - t.p_idle);
                cols.push((i, r, q));
            }
        }
    }
    for &i in active {
        let mine: Vec<usize> = (0..cols.len()).filter(|&c| cols[c].0 == i).collect();
        let work = mine
            .iter()
            .map(|&c| (c, partition.speeds[cols[c].1][cols[c].2]))
            .collect();
        lp.add_constraint(work, Relation::Eq, partition.demand(mu, i));
        lp.add_constraint(mine.iter().map(|&c| (c, 1.0)).collect(), Relation::Le, 1.0);
    }
    for (r, t) in platform.types.iter().enumerate() {
        if t.cores == 0 {
            continue;
        }
        let row: Vec<(usize, f64)> = (0..cols.len()).filter(|&c| cols[c].1 == r).map(|c| (c, 1.0)).collect();
        lp.add_constraint(row, Relation::Le, t.cores as f64);
    }
    IntervalLp { lp, cols }
}

fn split_count(point: &[f64], cols: &[(usize, usize, usize)], active: &[usize]) -> Vec<usize> {
    both_types(point, cols, active)
        .into_iter()
        .filter(|&i| type_shares(point, cols, i).iter().sum::<f64>() < 1.0 - SHARE_TOL)
        .collect()
}

fn type_shares(point: &[f64], cols: &[(usize, usize, usize)], i: usize) -> [f64; TYPE_COUNT] {
    std::array::from_fn(|r| {
        cols.iter()
            .zip(point)
            .filter(|(c, _)| c.0 == i && c.1 == r)
            .map(|(_, w)| *w)
            .sum()
    })
}

fn both_types(point: &[f64], cols: &[(usize, usize, usize)], active: &[usize]) -> Vec<usize> {
    active
        .iter()
        .copied()
        .filter(|&i| type_shares(point, cols, i).iter().all(|&s| s > ZERO_TOL))
        .collect()
}

/// Nonzero per-type shares.
fn support(point: &[f64], cols: &[(usize, usize, usize)], active: &[usize]) -> usize {
    active
        .iter()
        .map(|&i| type_shares(point, cols, i).iter().filter(|&&s| s > ZERO_TOL).count())
        .sum()
}

/// Re-solve each interval with its demands frozen so that the interval's
/// workload is a vertex, then consolidate any remaining split jobs onto one
/// type when that costs no energy.
pub fn reduce_intercluster(
    partition: &WorkloadPartition,
    jobs: &[JobInstance],
    platform: &Platform,
) -> Result<WorkloadPartition, PartitionError> {
    reduce(partition, jobs, platform, false)
}

/// As [`reduce_intercluster`], leaving intervals with at most one
/// inter-cluster job untouched.
pub fn reduce_where_needed(
    partition: &WorkloadPartition,
    jobs: &[JobInstance],
    platform: &Platform,
) -> Result<WorkloadPartition, PartitionError> {
    reduce(partition, jobs, platform, true)
}

fn reduce(
    partition: &WorkloadPartition,
    jobs: &[JobInstance],
    platform: &Platform,
    only_needed: bool,
) -> Result<WorkloadPartition, PartitionError> {
    partition.check(jobs, platform, 1e-7)?;
    let mut out = partition.clone();
    for mu in 0..out.grid.interval_count() {
        if only_needed && out.intercluster_jobs(mu).len() <= 1 {
            continue;
        }
        let active: Vec<usize> = (0..out.job_count()).filter(|&i| out.demand(mu, i) > ZERO_TOL).collect();
        if active.is_empty() {
            continue;
        }
        let IntervalLp { mut lp, cols } = interval_lp(&out, mu, &active, platform);
        let current: Vec<f64> = cols.iter().map(|&(i, r, q)| out.omega[mu][i][r][q]).collect();
        let mut point = simplex::to_basic(&lp, &current)?;
        let target = lp.objective_value(&current);
        let budget = target + 1e-9 * target.abs().max(1e-9);

        // more than one IM_b job, or more than n + 2 nonzero shares
        let excess = |point: &[f64]| {
            split_count(point, &cols, &active).len() > 1 || support(point, &cols, &active) > active.len() + 2
        };
        while excess(&point) {
            let mut candidates = split_count(&point, &cols, &active);
            for i in both_types(&point, &cols, &active) {
                if !candidates.contains(&i) {
                    candidates.push(i);
                }
            }
            let mut improved = false;
            for &i in &candidates {
                // try the type carrying the larger share first
                let share = |r: usize| -> f64 {
                    cols.iter().zip(&point).filter(|(c, _)| c.0 == i && c.1 == r).map(|(_, w)| *w).sum()
                };
                let mut order: Vec<usize> = (0..TYPE_COUNT).collect();
                order.sort_by(|&a, &b| share(b).total_cmp(&share(a)));
                for keep in order {
                    let mut trial = lp.clone();
                    for (c, col) in cols.iter().enumerate() {
                        if col.0 == i && col.1 != keep {
                            trial.upper[c] = 0.0;
                        }
                    }
                    let Ok(sol) = simplex::solve(&trial) else { continue };
                    if sol.status == LpStatus::Optimal && sol.objective <= budget {
                        lp = trial;
                        point = sol.values;
                        improved = true;
                        break;
                    }
                }
                if improved {
                    break;
                }
            }
            if !improved {
                break;
            }
        }

        for (c, &(i, r, q)) in cols.iter().enumerate() {
            out.omega[mu][i][r][q] = if point[c] > ZERO_TOL { point[c] } else { 0.0 };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, big_little};
    use crate::model::{build_major_grid, expand_periodic, hyperperiod, ProcessorType, TaskSpec, Timebase};

    fn setup(tasks: &[TaskSpec]) -> (Vec<JobInstance>, MajorGrid) {
        let tb = Timebase::default();
        let l = hyperperiod(tasks, &tb).unwrap_or_else(|_| tasks.iter().map(|t| t.arrival + t.deadline).fold(0.0, f64::max));
        let jobs = expand_periodic(tasks, l, 1.0, &tb).unwrap();
        let grid = build_major_grid(&jobs, &tb).unwrap();
        (jobs, grid)
    }

    fn little_only(cores: usize) -> Platform {
        big_little(0, cores)
    }

    fn single_type(speeds: Vec<f64>) -> Platform {
        let mut p = big_little(1, 0);
        p.types[0].speeds = speeds;
        p
    }

    #[test]
    fn one_job_two_levels_unrolls() {
        let platform = single_type(vec![0.5, 1.0]);
        let (jobs, grid) = setup(&[TaskSpec::implicit("A", 3.0, 5.0)]);
        let built = build_lp_dvfs(&jobs, &grid, &platform).unwrap();
        assert_eq!(built.layout.omega.len(), 2);
        assert!(built.layout.remaining[0].iter().all(Option::is_none));
        let t = &platform.types[0];
        for (k, &(_, _, _, q, c)) in built.layout.omega.iter().enumerate() {
            assert_eq!(c, k);
            let s = [0.5, 1.0][q];
            assert!((built.lp.objective[c] - 5.0 * (t.active_power(s) - t.p_idle)).abs() < 1e-9);
        }
        let p = solve_lp_dvfs(&jobs, &grid, &platform).unwrap();
        assert!((5.0 * p.demand(0, 0) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn table_vi_first_row_variable_count() {
        let platform = big_little(2, 6);
        let (_, tasks) = fixtures::implicit_taskset(0);
        let (jobs, grid) = setup(&tasks);
        assert_eq!(grid.boundaries, vec![0, 5000, 10000, 15000, 20000]);
        let built = build_lp_dvfs(&jobs, &grid, &platform).unwrap();
        for mu in 0..4 {
            let active = jobs.iter().filter(|j| grid.window(j).unwrap().contains(&mu)).count();
            let count = built.layout.omega.iter().filter(|e| e.0 == mu).count();
            assert_eq!(count, 14 * active);
        }
    }

    #[test]
    fn empty_speed_set_is_rejected() {
        let mut platform = big_little(1, 1);
        platform.types[1].speeds.clear();
        let (jobs, grid) = setup(&[TaskSpec::implicit("A", 1.0, 5.0)]);
        assert_eq!(
            build_lp_dvfs(&jobs, &grid, &platform).unwrap_err(),
            PartitionError::EmptySpeedSet(2)
        );
    }

    #[test]
    fn misaligned_window_is_rejected() {
        let platform = big_little(1, 1);
        let (jobs, _) = setup(&[TaskSpec::implicit("A", 1.0, 5.0)]);
        let grid = MajorGrid::from_boundaries(vec![0, 3000, 6000], Timebase::default()).unwrap();
        assert!(matches!(
            build_lp_dvfs(&jobs, &grid, &platform),
            Err(PartitionError::Misaligned(_))
        ));
    }

    #[test]
    fn first_implicit_taskset_is_feasible_and_consistent() {
        let platform = big_little(2, 6);
        let (_, tasks) = fixtures::implicit_taskset(0);
        let (jobs, grid) = setup(&tasks);
        let p = solve_lp_dvfs(&jobs, &grid, &platform).unwrap();
        p.check(&jobs, &platform, 1e-9).unwrap();
        assert!(check_feasibility(&jobs, &grid, &platform));
    }

    #[test]
    fn overload_is_infeasible() {
        // D = 1.2 on one LITTLE core (capacity 0.375)
        let platform = little_only(1);
        let tasks = [TaskSpec::implicit("A", 6.0, 5.0)];
        let (jobs, grid) = setup(&tasks);
        assert!(matches!(
            solve_lp_dvfs(&jobs, &grid, &platform),
            Err(PartitionError::Infeasible(_))
        ));
        assert!(!check_feasibility(&jobs, &grid, &platform));
    }

    #[test]
    fn densest_taskset_needs_every_little_core() {
        let (_, tasks) = fixtures::implicit_taskset(15);
        let (jobs, grid) = setup(&tasks);
        assert!(check_feasibility(&jobs, &grid, &big_little(2, 6)));
        assert!(!check_feasibility(&jobs, &grid, &big_little(2, 5)));
        assert!(check_feasibility(&[], &grid, &big_little(2, 5)));
    }

    #[test]
    fn single_little_job_matches_mixture_enumeration() {
        let platform = little_only(1);
        let (jobs, grid) = setup(&[TaskSpec::aperiodic("A", 1.0, 0.0, 5.0)]);
        let p = solve_lp_dvfs(&jobs, &grid, &platform).unwrap();
        assert!((5.0 * p.demand(0, 0) - 1.0).abs() < 1e-9);

        // Oracle: cheapest way to average speed 0.2 over the interval by
        // mixing two levels (idle counts as a zero-speed, zero-cost level).
        let t: &ProcessorType = &platform.types[1];
        let mut levels: Vec<(f64, f64)> = t.speeds.iter().map(|&s| (s, t.active_power(s) - t.p_idle)).collect();
        levels.push((0.0, 0.0));
        let mut best = f64::INFINITY;
        for &(sa, ca) in &levels {
            for &(sb, cb) in &levels {
                if sa <= 0.2 && sb >= 0.2 && sb > sa {
                    let lam = (sb - 0.2) / (sb - sa);
                    best = best.min(5.0 * (lam * ca + (1.0 - lam) * cb));
                }
                if (sa - 0.2).abs() < 1e-15 {
                    best = best.min(5.0 * ca);
                }
            }
        }
        assert!((p.objective(&platform) - best).abs() < 1e-9 * best);
    }

    #[test]
    fn nlp_grid_validation_and_endpoints() {
        let platform = big_little(1, 1);
        let (jobs, grid) = setup(&[TaskSpec::implicit("A", 2.0, 5.0)]);
        assert_eq!(
            solve_nlp_dvfs(&jobs, &grid, &platform, 1).unwrap_err(),
            PartitionError::GridPoints(1)
        );
        let nlp = solve_nlp_dvfs(&jobs, &grid, &platform, 2).unwrap();
        let mut ends = platform.clone();
        for t in ends.types.iter_mut() {
            t.speeds = vec![t.min_speed(), t.max_speed()];
        }
        let lp = solve_lp_dvfs(&jobs, &grid, &ends).unwrap();
        assert!((nlp.objective(&platform) - lp.objective(&ends)).abs() < 1e-9);
    }

    #[test]
    fn grid_refinement_never_costs_energy() {
        let platform = big_little(1, 1);
        let (jobs, grid) = setup(&[TaskSpec::implicit("A", 3.0, 5.0), TaskSpec::implicit("B", 1.0, 10.0)]);
        let e9 = solve_nlp_dvfs(&jobs, &grid, &platform, 9).unwrap().objective(&platform);
        let e17 = solve_nlp_dvfs(&jobs, &grid, &platform, 17).unwrap().objective(&platform);
        assert!(e17 <= e9 + 1e-9 * e9);
    }

    #[test]
    fn reduce_keeps_vertices_and_demands() {
        let platform = big_little(2, 6);
        let (_, tasks) = fixtures::implicit_taskset(6);
        let (jobs, grid) = setup(&tasks);
        let p = solve_lp_dvfs(&jobs, &grid, &platform).unwrap();
        let reduced = reduce_intercluster(&p, &jobs, &platform).unwrap();
        reduced.check(&jobs, &platform, 1e-9).unwrap();
        let e0 = p.objective(&platform);
        assert!(reduced.objective(&platform) <= e0 * (1.0 + 1e-9));
        for mu in 0..grid.interval_count() {
            for i in 0..jobs.len() {
                assert!((p.demand(mu, i) - reduced.demand(mu, i)).abs() < 1e-9);
            }
            assert!(reduced.intercluster_jobs(mu).len() <= 1);
        }
        let again = reduce_intercluster(&reduced, &jobs, &platform).unwrap();
        assert_eq!(again.omega, reduced.omega);
    }

    #[test]
    fn two_split_jobs_are_consolidated() {
        // Two identical single-core types at one speed; both jobs start split
        // evenly, and moving each wholly onto its own type costs the same.
        let mut core = fixtures::big_core(1);
        core.speeds = vec![0.5, 1.0];
        let platform = Platform::new([core.clone(), core], 1.0).unwrap();
        let tasks = [
            TaskSpec::aperiodic("A", 1.0, 0.0, 4.0),
            TaskSpec::aperiodic("B", 1.0, 0.0, 4.0),
        ];
        let (jobs, grid) = setup(&tasks);
        let mut p = WorkloadPartition::zeros(&jobs, &grid, speed_sets(&platform).unwrap());
        for i in 0..2 {
            p.omega[0][i][0][0] = 0.25;
            p.omega[0][i][1][0] = 0.25;
            p.remaining[i][0] = jobs[i].min_exec_time;
        }
        p.check(&jobs, &platform, 1e-12).unwrap();
        assert_eq!(p.intercluster_jobs(0).len(), 2);
        let reduced = reduce_intercluster(&p, &jobs, &platform).unwrap();
        assert!(reduced.intercluster_jobs(0).len() <= 1);
        let e = p.objective(&platform);
        assert!((reduced.objective(&platform) - e).abs() <= 1e-9 * e);
        for i in 0..2 {
            assert!((reduced.demand(0, i) - 0.25).abs() < 1e-12);
        }
        assert!(reduced.nonzero_aggregates(0) <= 2 + 2);
    }
}
