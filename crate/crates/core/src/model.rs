//! Tasks, jobs, platforms and the deadline-partitioned major grid.
//!
//! Time is kept in integer ticks of a [`Timebase`] so that least common
//! multiples and grid deduplication are exact. Seconds only appear at the
//! edges (file I/O, interval lengths handed to the optimizer).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of processor types on the platform.
pub const TYPE_COUNT: usize = 2;

/// Relative tolerance used when converting seconds to ticks.
const TICK_SNAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("task {id}: {reason}")]
    InvalidTask { id: String, reason: String },
    #[error("invalid platform: {0}")]
    InvalidPlatform(String),
    #[error("hyperperiod undefined: task {0} is aperiodic")]
    HyperperiodUndefined(String),
    #[error("{value} s is not a multiple of the {tick} s tick")]
    Incommensurable { value: f64, tick: f64 },
    #[error("horizon {horizon} s is not a multiple of the period of task {id}")]
    HorizonNotMultiple { id: String, horizon: f64 },
    #[error("cannot build a grid from an empty job list")]
    EmptyJobs,
    #[error("speed {speed} outside [{min}, {max}] for type {core_type}")]
    SpeedOutOfRange {
        core_type: usize,
        speed: f64,
        min: f64,
        max: f64,
    },
}

/// Integer time base: one tick lasts `tick` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timebase {
    pub tick: f64,
}

impl Default for Timebase {
    fn default() -> Self {
        Self { tick: 1e-3 }
    }
}

impl Timebase {
    pub fn new(tick: f64) -> Result<Self, ModelError> {
        if !(tick.is_finite() && tick > 0.0) {
            return Err(ModelError::InvalidPlatform(format!(
                "tick must be positive, got {tick}"
            )));
        }
        Ok(Self { tick })
    }

    pub fn to_ticks(&self, seconds: f64) -> Result<i64, ModelError> {
        let raw = seconds / self.tick;
        let rounded = raw.round();
        if (raw - rounded).abs() > TICK_SNAP * raw.abs().max(1.0) {
            return Err(ModelError::Incommensurable {
                value: seconds,
                tick: self.tick,
            });
        }
        Ok(rounded as i64)
    }

    pub fn to_seconds(&self, ticks: i64) -> f64 {
        ticks as f64 * self.tick
    }
}

/// How much work a task carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demand {
    /// CPU cycles; divided by `f_max` to get the minimum execution time.
    Cycles(f64),
    /// Execution time in seconds at speed 1.
    MinExecTime(f64),
}

impl Demand {
    pub fn min_exec_time(&self, f_max: f64) -> f64 {
        match *self {
            Demand::Cycles(c) => c / f_max,
            Demand::MinExecTime(x) => x,
        }
    }
}

/// A periodic (constrained-deadline) or aperiodic task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: String,
    pub demand: Demand,
    /// Relative deadline in seconds.
    pub deadline: f64,
    /// Period in seconds, `None` for an aperiodic task.
    pub period: Option<f64>,
    /// Arrival time of an aperiodic task in seconds.
    pub arrival: f64,
}

impl TaskSpec {
    pub fn periodic(id: impl Into<String>, min_exec_time: f64, deadline: f64, period: f64) -> Self {
        Self {
            id: id.into(),
            demand: Demand::MinExecTime(min_exec_time),
            deadline,
            period: Some(period),
            arrival: 0.0,
        }
    }

    /// Periodic task whose deadline equals its period.
    pub fn implicit(id: impl Into<String>, min_exec_time: f64, period: f64) -> Self {
        Self::periodic(id, min_exec_time, period, period)
    }

    pub fn aperiodic(id: impl Into<String>, min_exec_time: f64, arrival: f64, deadline: f64) -> Self {
        Self {
            id: id.into(),
            demand: Demand::MinExecTime(min_exec_time),
            deadline,
            period: None,
            arrival,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::InvalidTask {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        let work = match self.demand {
            Demand::Cycles(c) | Demand::MinExecTime(c) => c,
        };
        if !(work.is_finite() && work > 0.0) {
            return Err(bad("work must be positive"));
        }
        if !(self.deadline.is_finite() && self.deadline > 0.0) {
            return Err(bad("deadline must be positive"));
        }
        if let Some(p) = self.period {
            if !(p.is_finite() && p > 0.0) {
                return Err(bad("period must be positive"));
            }
            if self.deadline > p * (1.0 + 1e-12) {
                return Err(bad("deadline exceeds period"));
            }
        }
        if !(self.arrival.is_finite() && self.arrival >= 0.0) {
            return Err(bad("arrival must be non-negative"));
        }
        Ok(())
    }

    /// Minimum density at speed `speed`: execution time over `min(d, p)`.
    pub fn density(&self, f_max: f64, speed: f64) -> f64 {
        let window = self.period.map_or(self.deadline, |p| self.deadline.min(p));
        self.demand.min_exec_time(f_max) / (speed * window)
    }
}

/// One released instance of a task.
#[derive(Debug, Clone, PartialEq)]
pub struct JobInstance {
    pub task: String,
    /// 1-based instance number within the task.
    pub instance: usize,
    pub release: i64,
    pub deadline: i64,
    /// Seconds of execution at speed 1.
    pub min_exec_time: f64,
}

impl JobInstance {
    pub fn label(&self) -> String {
        if self.instance <= 1 {
            self.task.clone()
        } else {
            format!("{}#{}", self.task, self.instance)
        }
    }

    pub fn window(&self, tb: &Timebase) -> f64 {
        tb.to_seconds(self.deadline - self.release)
    }
}

/// Fitted active power model `alpha * s^beta + p_static` in mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub alpha: f64,
    pub beta: f64,
    pub p_static: f64,
}

impl PowerModel {
    pub fn eval(&self, speed: f64) -> f64 {
        self.alpha * speed.powf(self.beta) + self.p_static
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessorType {
    pub name: String,
    pub cores: usize,
    /// Strictly increasing normalized speeds in (0, 1].
    pub speeds: Vec<f64>,
    pub power: PowerModel,
    /// Idle power in mW.
    pub p_idle: f64,
}

impl ProcessorType {
    pub fn min_speed(&self) -> f64 {
        self.speeds[0]
    }

    pub fn max_speed(&self) -> f64 {
        *self.speeds.last().expect("validated speed set is non-empty")
    }

    /// Active power at `speed` in mW, without range checking.
    pub fn active_power(&self, speed: f64) -> f64 {
        self.power.eval(speed)
    }

    pub fn has_speed(&self, speed: f64) -> bool {
        self.speeds.iter().any(|&s| (s - speed).abs() <= 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Platform {
    pub types: [ProcessorType; TYPE_COUNT],
    /// Maximum clock frequency in Hz shared by both types.
    pub f_max: f64,
}

impl Platform {
    pub fn new(types: [ProcessorType; TYPE_COUNT], f_max: f64) -> Result<Self, ModelError> {
        let platform = Self { types, f_max };
        platform.validate()?;
        Ok(platform)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidPlatform(msg));
        if !(self.f_max.is_finite() && self.f_max > 0.0) {
            return bad(format!("f_max must be positive, got {}", self.f_max));
        }
        let mut overall_max: f64 = 0.0;
        for (r, t) in self.types.iter().enumerate() {
            if t.speeds.is_empty() {
                return bad(format!("type {} has an empty speed set", r + 1));
            }
            for w in t.speeds.windows(2) {
                if w[1] <= w[0] {
                    return bad(format!("type {} speeds are not strictly increasing", r + 1));
                }
            }
            if t.speeds.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
                return bad(format!("type {} has a speed outside (0, 1]", r + 1));
            }
            if !(t.power.alpha > 0.0) || !(t.power.beta >= 1.0) {
                return bad(format!("type {} needs alpha > 0 and beta >= 1", r + 1));
            }
            if !(t.p_idle < t.active_power(t.min_speed())) {
                return bad(format!(
                    "type {} idle power must be below active power at its lowest speed",
                    r + 1
                ));
            }
            overall_max = overall_max.max(t.max_speed());
        }
        if (overall_max - 1.0).abs() > 1e-12 {
            return bad(format!("fastest speed must be 1, got {overall_max}"));
        }
        if self.total_cores() == 0 {
            return bad("platform has no cores".into());
        }
        Ok(())
    }

    pub fn total_cores(&self) -> usize {
        self.types.iter().map(|t| t.cores).sum()
    }

    /// `C = sum_r max(S^r) * m_r`.
    pub fn capacity(&self) -> f64 {
        self.types
            .iter()
            .map(|t| t.max_speed() * t.cores as f64)
            .sum()
    }

    /// Smallest per-type maximum speed among types that have cores.
    pub fn weakest_max_speed(&self) -> f64 {
        self.types
            .iter()
            .filter(|t| t.cores > 0)
            .map(|t| t.max_speed())
            .fold(f64::INFINITY, f64::min)
    }

    /// Fastest speed available on any populated type.
    pub fn fastest_speed(&self) -> f64 {
        self.types
            .iter()
            .filter(|t| t.cores > 0)
            .map(|t| t.max_speed())
            .fold(0.0, f64::max)
    }

    /// Idle power of the whole platform in mW.
    pub fn idle_power(&self) -> f64 {
        self.types.iter().map(|t| t.cores as f64 * t.p_idle).sum()
    }

    /// Replace every type's speed set by `points` evenly spaced levels
    /// spanning its current `[min, max]` range.
    pub fn with_uniform_speeds(&self, points: usize) -> Platform {
        let mut out = self.clone();
        for t in out.types.iter_mut() {
            let (lo, hi) = (t.min_speed(), t.max_speed());
            let mut speeds: Vec<f64> = (0..points)
                .map(|k| {
                    if k + 1 == points {
                        hi
                    } else {
                        lo + (hi - lo) * k as f64 / (points - 1) as f64
                    }
                })
                .collect();
            speeds.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
            t.speeds = speeds;
        }
        out
    }

    /// Keep only each type's fastest level.
    pub fn max_speed_only(&self) -> Platform {
        let mut out = self.clone();
        for t in out.types.iter_mut() {
            t.speeds = vec![t.max_speed()];
        }
        out
    }
}

/// Active power of type `r` at `speed` in mW.
pub fn eval_power(platform: &Platform, r: usize, speed: f64) -> Result<f64, ModelError> {
    let t = &platform.types[r];
    let (min, max) = (t.min_speed(), t.max_speed());
    if !(speed >= min - 1e-12 && speed <= max + 1e-12) {
        return Err(ModelError::SpeedOutOfRange {
            core_type: r + 1,
            speed,
            min,
            max,
        });
    }
    Ok(t.active_power(speed))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Least common multiple of all periods, in ticks.
pub fn hyperperiod_ticks(taskset: &[TaskSpec], tb: &Timebase) -> Result<i64, ModelError> {
    let mut lcm: i64 = 1;
    for task in taskset {
        let period = task
            .period
            .ok_or_else(|| ModelError::HyperperiodUndefined(task.id.clone()))?;
        let p = tb.to_ticks(period)?;
        if p <= 0 {
            return Err(ModelError::Incommensurable {
                value: period,
                tick: tb.tick,
            });
        }
        lcm = lcm / gcd(lcm, p) * p;
    }
    Ok(lcm)
}

/// Hyperperiod in seconds.
pub fn hyperperiod(taskset: &[TaskSpec], tb: &Timebase) -> Result<f64, ModelError> {
    if taskset.is_empty() {
        return Err(ModelError::HyperperiodUndefined("<empty taskset>".into()));
    }
    Ok(tb.to_seconds(hyperperiod_ticks(taskset, tb)?))
}

/// Unroll every task over `[0, horizon)`. Aperiodic tasks contribute their
/// single job unchanged.
pub fn expand_periodic(
    taskset: &[TaskSpec],
    horizon: f64,
    f_max: f64,
    tb: &Timebase,
) -> Result<Vec<JobInstance>, ModelError> {
    let horizon_ticks = tb.to_ticks(horizon)?;
    let mut jobs = Vec::new();
    for task in taskset {
        task.validate()?;
        let x = task.demand.min_exec_time(f_max);
        let d = tb.to_ticks(task.deadline)?;
        match task.period {
            Some(period) => {
                let p = tb.to_ticks(period)?;
                if p <= 0 || horizon_ticks % p != 0 {
                    return Err(ModelError::HorizonNotMultiple {
                        id: task.id.clone(),
                        horizon,
                    });
                }
                for j in 0..horizon_ticks / p {
                    jobs.push(JobInstance {
                        task: task.id.clone(),
                        instance: j as usize + 1,
                        release: j * p,
                        deadline: j * p + d,
                        min_exec_time: x,
                    });
                }
            }
            None => {
                let a = tb.to_ticks(task.arrival)?;
                jobs.push(JobInstance {
                    task: task.id.clone(),
                    instance: 1,
                    release: a,
                    deadline: a + d,
                    min_exec_time: x,
                });
            }
        }
    }
    Ok(jobs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TasksetStats {
    /// `delta_i(1)` per task, in input order.
    pub densities: Vec<f64>,
    /// `D = sum delta_i(1)`.
    pub total_density: f64,
    /// `C = sum_r max(S^r) m_r`.
    pub capacity: f64,
    /// Hyperperiod in seconds when every task is periodic.
    pub hyperperiod: Option<f64>,
}

pub fn taskset_stats(taskset: &[TaskSpec], platform: &Platform, tb: &Timebase) -> TasksetStats {
    let densities: Vec<f64> = taskset
        .iter()
        .map(|t| t.density(platform.f_max, 1.0))
        .collect();
    TasksetStats {
        total_density: densities.iter().sum(),
        densities,
        capacity: platform.capacity(),
        hyperperiod: hyperperiod(taskset, tb).ok(),
    }
}

/// Boundaries `tau_0 < ... < tau_N` of the major grid, in ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorGrid {
    pub boundaries: Vec<i64>,
    pub timebase: Timebase,
}

impl MajorGrid {
    pub fn from_boundaries(mut boundaries: Vec<i64>, timebase: Timebase) -> Result<Self, ModelError> {
        boundaries.sort_unstable();
        boundaries.dedup();
        if boundaries.len() < 2 {
            return Err(ModelError::EmptyJobs);
        }
        Ok(Self {
            boundaries,
            timebase,
        })
    }

    pub fn interval_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Start of interval `mu` in seconds.
    pub fn start(&self, mu: usize) -> f64 {
        self.timebase.to_seconds(self.boundaries[mu])
    }

    pub fn end(&self, mu: usize) -> f64 {
        self.timebase.to_seconds(self.boundaries[mu + 1])
    }

    /// Interval length `h[mu]` in seconds.
    pub fn length(&self, mu: usize) -> f64 {
        self.timebase
            .to_seconds(self.boundaries[mu + 1] - self.boundaries[mu])
    }

    pub fn horizon(&self) -> f64 {
        self.timebase.to_seconds(*self.boundaries.last().unwrap())
    }

    /// Index of the boundary equal to `tick`, if it is one.
    pub fn boundary_index(&self, tick: i64) -> Option<usize> {
        self.boundaries.binary_search(&tick).ok()
    }

    /// Grid intervals `[first, last)` covered by a job's window.
    pub fn window(&self, job: &JobInstance) -> Option<std::ops::Range<usize>> {
        let a = self.boundary_index(job.release)?;
        let b = self.boundary_index(job.deadline)?;
        (a < b).then_some(a..b)
    }
}

/// Sorted, deduplicated set of all releases and deadlines, plus 0.
pub fn build_major_grid(jobs: &[JobInstance], tb: &Timebase) -> Result<MajorGrid, ModelError> {
    if jobs.is_empty() {
        return Err(ModelError::EmptyJobs);
    }
    let mut boundaries = vec![0];
    for job in jobs {
        if job.deadline <= job.release {
            return Err(ModelError::InvalidTask {
                id: job.label(),
                reason: "absolute deadline not after release".into(),
            });
        }
        boundaries.push(job.release);
        boundaries.push(job.deadline);
    }
    MajorGrid::from_boundaries(boundaries, *tb)
}
