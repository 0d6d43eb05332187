//! End-to-end scheduling: partition, reduce, order, expand, validate.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::baselines::{self, BaselineError};
use crate::model::{self, JobInstance, MajorGrid, ModelError, Platform, TaskSpec, Timebase, TYPE_COUNT};
use crate::ordering::{self, OrderedInterval, OrderingError};
use crate::partition::{self, PartitionError, WorkloadPartition, SHARE_TOL};
use crate::validate::{self, Schedule, ScheduleError, ScheduleReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    LpDvfs,
    NlpDvfs { grid_points: usize },
    GwaDDiscrete,
    GwaNoDvfs,
}

impl Algorithm {
    pub const NAMES: [&'static str; 4] = ["lp-dvfs", "nlp-dvfs", "gwa-ddiscrete", "gwa-nodvfs"];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::LpDvfs => "lp-dvfs",
            Algorithm::NlpDvfs { .. } => "nlp-dvfs",
            Algorithm::GwaDDiscrete => "gwa-ddiscrete",
            Algorithm::GwaNoDvfs => "gwa-nodvfs",
        }
    }

    /// Parse a name; `nlp-dvfs` takes `grid_points` levels per type.
    pub fn parse(name: &str, grid_points: usize) -> Option<Self> {
        match name {
            "lp-dvfs" => Some(Algorithm::LpDvfs),
            "nlp-dvfs" => Some(Algorithm::NlpDvfs { grid_points }),
            "gwa-ddiscrete" => Some(Algorithm::GwaDDiscrete),
            "gwa-nodvfs" => Some(Algorithm::GwaNoDvfs),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::parse(s, 17).ok_or_else(|| format!("unknown algorithm {s:?}; expected one of {:?}", Algorithm::NAMES))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Partition(PartitionError),
    #[error(transparent)]
    Baseline(BaselineError),
    #[error("interval {mu}: {source}")]
    Ordering { mu: usize, source: OrderingError },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

impl From<PartitionError> for PipelineError {
    fn from(e: PartitionError) -> Self {
        match e {
            PartitionError::Infeasible(m) => PipelineError::Infeasible(m),
            e => PipelineError::Partition(e),
        }
    }
}

impl From<BaselineError> for PipelineError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::Infeasible(m) => PipelineError::Infeasible(m),
            e => PipelineError::Baseline(e),
        }
    }
}

/// Jobs over the scheduling horizon and the grid of their windows.
#[derive(Debug, Clone, PartialEq)]
pub struct JobPlan {
    pub jobs: Vec<JobInstance>,
    pub grid: MajorGrid,
    pub horizon: f64,
}

/// Unroll a taskset over its hyperperiod, or up to its last deadline when a
/// task is aperiodic. The grid always spans `[0, horizon]`.
pub fn plan_jobs(taskset: &[TaskSpec], f_max: f64, tb: &Timebase) -> Result<JobPlan, ModelError> {
    let horizon = match model::hyperperiod(taskset, tb) {
        Ok(l) => l,
        Err(ModelError::HyperperiodUndefined(_)) if !taskset.is_empty() => taskset
            .iter()
            .map(|t| t.arrival + t.deadline)
            .fold(0.0, f64::max),
        Err(e) => return Err(e),
    };
    let jobs = if taskset.iter().all(|t| t.period.is_some()) {
        model::expand_periodic(taskset, horizon, f_max, tb)?
    } else {
        // one job per task, periodic or not
        let mut jobs = Vec::new();
        for t in taskset {
            let once = TaskSpec { period: None, ..t.clone() };
            jobs.extend(model::expand_periodic(&[once], horizon, f_max, tb)?);
        }
        jobs
    };
    let mut boundaries = vec![0, tb.to_ticks(horizon)?];
    let grid = model::build_major_grid(&jobs, tb)?;
    boundaries.extend(grid.boundaries);
    let grid = MajorGrid::from_boundaries(boundaries, *tb)?;
    Ok(JobPlan { jobs, grid, horizon })
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub algorithm: Algorithm,
    /// The platform actually scheduled on (speed sets may differ from the input).
    pub platform: Platform,
    pub plan: JobPlan,
    pub partition: WorkloadPartition,
    pub ordered: Vec<OrderedInterval>,
    pub schedule: Schedule,
    pub report: ScheduleReport,
    /// Energy the optimization itself reports, mJ.
    pub formulation_energy: f64,
}

/// Per-type shares of every job in interval `mu`.
pub fn interval_shares(p: &WorkloadPartition, mu: usize) -> Vec<[f64; TYPE_COUNT]> {
    (0..p.job_count())
        .map(|i| std::array::from_fn(|r| p.aggregate(mu, i, r)))
        .collect()
}

pub fn order_partition(p: &WorkloadPartition, platform: &Platform) -> Result<Vec<OrderedInterval>, PipelineError> {
    let cores: [usize; TYPE_COUNT] = std::array::from_fn(|r| platform.types[r].cores);
    (0..p.grid.interval_count())
        .map(|mu| {
            let w = interval_shares(p, mu);
            ordering::classify(&w, SHARE_TOL)
                .and_then(|c| ordering::hetero_wrap(&c, &w, cores))
                .map_err(|source| PipelineError::Ordering { mu, source })
        })
        .collect()
}

pub fn run(
    taskset: &[TaskSpec],
    platform: &Platform,
    algorithm: Algorithm,
    tb: &Timebase,
) -> Result<PipelineOutput, PipelineError> {
    platform.validate()?;
    let plan = plan_jobs(taskset, platform.f_max, tb)?;
    let (effective, partition, formulation_energy) = match algorithm {
        Algorithm::LpDvfs | Algorithm::NlpDvfs { .. } => {
            let effective = match algorithm {
                Algorithm::NlpDvfs { grid_points } => {
                    if grid_points < 2 {
                        return Err(PartitionError::GridPoints(grid_points).into());
                    }
                    platform.with_uniform_speeds(grid_points)
                }
                _ => platform.clone(),
            };
            let solved = partition::solve_lp_dvfs(&plan.jobs, &plan.grid, &effective)?;
            let energy = solved.total_energy(&effective);
            let reduced = partition::reduce_intercluster(&solved, &plan.jobs, &effective)?;
            (effective, reduced, energy)
        }
        Algorithm::GwaDDiscrete | Algorithm::GwaNoDvfs => {
            let effective = match algorithm {
                Algorithm::GwaNoDvfs => platform.max_speed_only(),
                _ => platform.clone(),
            };
            let result = baselines::solve_gwa_ddiscrete(taskset, &effective, tb)?;
            let spread = baselines::gwa_partition(&result.allocation, &plan.jobs, &plan.grid);
            let reduced = partition::reduce_where_needed(&spread, &plan.jobs, &effective)?;
            (effective, reduced, result.energy)
        }
    };
    let ordered = order_partition(&partition, &effective)?;
    let schedule = validate::expand_schedule(&partition, &ordered, &effective)?;
    let report = validate::validate(&schedule, &plan.jobs, &effective, tb);
    Ok(PipelineOutput {
        algorithm,
        platform: effective,
        plan,
        partition,
        ordered,
        schedule,
        report,
        formulation_energy,
    })
}
