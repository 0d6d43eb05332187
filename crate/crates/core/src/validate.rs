//! Concrete timed schedules: expansion from ordered intervals, feasibility
//! checks, energy accounting and context-switch counting.
//!
//! All checks run on segment endpoints. Segments are half-open, so two
//! segments that merely touch never overlap.

use thiserror::Error;

use crate::model::{JobInstance, Platform, Timebase, TYPE_COUNT};
use crate::ordering::OrderedInterval;
use crate::partition::{WorkloadPartition, ZERO_TOL};

/// Overlap tolerance in seconds.
pub const OVERLAP_TOL: f64 = 1e-9;
/// Work-completion tolerance in seconds at full speed.
pub const WORK_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("{intervals} ordered intervals for a grid of {expected}")]
    IntervalMismatch { intervals: usize, expected: usize },
    #[error("ordered interval {mu} has a window for unknown task {task}")]
    UnknownTask { mu: usize, task: usize },
}

/// `job` runs at `speed` during `[start, end)` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub job: usize,
    pub speed: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessorTimeline {
    /// 0-based processor type.
    pub core_type: usize,
    /// 0-based index within the type.
    pub index: usize,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub horizon: f64,
    pub job_ids: Vec<String>,
    /// Type-1 processors first, then type 2.
    pub processors: Vec<ProcessorTimeline>,
}

impl Schedule {
    pub fn idle(platform: &Platform, job_ids: Vec<String>, horizon: f64) -> Self {
        let processors = (0..TYPE_COUNT)
            .flat_map(|r| {
                (0..platform.types[r].cores).map(move |k| ProcessorTimeline {
                    core_type: r,
                    index: k,
                    segments: Vec::new(),
                })
            })
            .collect();
        Self {
            horizon,
            job_ids,
            processors,
        }
    }

    pub fn processor_mut(&mut self, core_type: usize, index: usize) -> Option<&mut ProcessorTimeline> {
        self.processors
            .iter_mut()
            .find(|p| p.core_type == core_type && p.index == index)
    }

    /// Sort each timeline and join touching segments of the same job and speed.
    pub fn normalize(&mut self) {
        for p in &mut self.processors {
            p.segments.retain(|s| s.end - s.start > ZERO_TOL);
            p.segments.sort_by(|a, b| a.start.total_cmp(&b.start));
            let mut merged: Vec<Segment> = Vec::with_capacity(p.segments.len());
            for s in p.segments.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.job == s.job && last.speed == s.speed && (s.start - last.end).abs() <= ZERO_TOL => {
                        last.end = s.end;
                    }
                    _ => merged.push(s),
                }
            }
            p.segments = merged;
        }
    }

    /// Every segment of `job` with its processor, sorted by start time.
    pub fn job_segments(&self, job: usize) -> Vec<(usize, usize, Segment)> {
        let mut out: Vec<(usize, usize, Segment)> = self
            .processors
            .iter()
            .flat_map(|p| {
                p.segments
                    .iter()
                    .filter(move |s| s.job == job)
                    .map(move |s| (p.core_type, p.index, *s))
            })
            .collect();
        out.sort_by(|a, b| a.2.start.total_cmp(&b.2.start));
        out
    }

    /// Work done by `job` in `[0, t)`.
    pub fn work_before(&self, job: usize, t: f64) -> f64 {
        self.job_segments(job)
            .iter()
            .map(|(_, _, s)| (s.end.min(t) - s.start).max(0.0) * s.speed)
            .sum()
    }
}

/// Lay the partition out in absolute time using the per-interval windows.
/// Within a job's windows on one type, speed levels follow in ascending order.
pub fn expand_schedule(
    partition: &WorkloadPartition,
    ordered: &[OrderedInterval],
    platform: &Platform,
) -> Result<Schedule, ScheduleError> {
    let grid = &partition.grid;
    if ordered.len() != grid.interval_count() {
        return Err(ScheduleError::IntervalMismatch {
            intervals: ordered.len(),
            expected: grid.interval_count(),
        });
    }
    let n = partition.job_count();
    let mut schedule = Schedule::idle(platform, partition.job_ids.clone(), grid.horizon());
    for (mu, interval) in ordered.iter().enumerate() {
        let (t0, h) = (grid.start(mu), grid.length(mu));
        if let Some(w) = interval.windows.iter().find(|w| w.task >= n) {
            return Err(ScheduleError::UnknownTask { mu, task: w.task });
        }
        for i in 0..n {
            for r in 0..TYPE_COUNT {
                let windows = interval.task_windows(i, r);
                if windows.is_empty() {
                    continue;
                }
                // walk levels through the windows in time order
                let mut levels = partition.omega[mu][i][r]
                    .iter()
                    .zip(&partition.speeds[r])
                    .filter(|(w, _)| **w > ZERO_TOL)
                    .map(|(w, s)| (*w, *s))
                    .peekable();
                let mut left = levels.peek().map_or(0.0, |l| l.0);
                for w in &windows {
                    let mut a = w.start;
                    while w.end - a > ZERO_TOL {
                        let Some(&(_, speed)) = levels.peek() else { break };
                        let b = (a + left).min(w.end);
                        if let Some(p) = schedule.processor_mut(r, w.proc) {
                            p.segments.push(Segment {
                                start: t0 + h * a,
                                end: t0 + h * b,
                                job: i,
                                speed,
                            });
                        }
                        left -= b - a;
                        a = b;
                        if left <= ZERO_TOL {
                            levels.next();
                            left = levels.peek().map_or(0.0, |l| l.0);
                        }
                    }
                }
            }
        }
    }
    schedule.normalize();
    Ok(schedule)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// (i) a job on two processors at once.
    ParallelJob { job: String, at: f64 },
    /// (ii) two jobs on one processor at once.
    ProcessorOverlap { core_type: usize, index: usize, at: f64 },
    /// (iv) execution outside the job's window.
    OutsideWindow { job: String, start: f64, end: f64 },
    /// (v) a speed the processor type does not offer.
    IllegalSpeed { core_type: usize, speed: f64 },
    /// A segment naming a job that does not exist or running backwards.
    Malformed(String),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ParallelJob { job, at } => write!(f, "job {job} runs on two processors at t={at}"),
            Violation::ProcessorOverlap { core_type, index, at } => {
                write!(f, "processor {}.{} runs two jobs at t={at}", core_type + 1, index + 1)
            }
            Violation::OutsideWindow { job, start, end } => {
                write!(f, "job {job} runs outside its window during [{start}, {end})")
            }
            Violation::IllegalSpeed { core_type, speed } => {
                write!(f, "speed {speed} is not a level of type {}", core_type + 1)
            }
            Violation::Malformed(m) => write!(f, "malformed schedule: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeadlineMiss {
    pub job: String,
    /// Work still owed at the deadline, seconds at full speed.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Energy {
    pub active: f64,
    pub idle: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ContextSwitches {
    pub preemptions: usize,
    /// Jobs that ran on two or more processors of the type.
    pub intra: [usize; TYPE_COUNT],
    /// Jobs that ran on both types.
    pub inter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub energy: Energy,
    pub switches: ContextSwitches,
    pub violations: Vec<Violation>,
    pub misses: Vec<DeadlineMiss>,
    /// Largest overlap, window overrun or unmet work found.
    pub max_residual: f64,
}

impl ScheduleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.misses.is_empty()
    }
}

pub fn energy(schedule: &Schedule, platform: &Platform) -> Energy {
    let mut e = Energy::default();
    for p in &schedule.processors {
        let t = &platform.types[p.core_type];
        let mut busy = 0.0;
        for s in &p.segments {
            e.active += s.duration() * t.active_power(s.speed);
            busy += s.duration();
        }
        e.idle += (schedule.horizon - busy).max(0.0) * t.p_idle;
    }
    e.total = e.active + e.idle;
    e
}

pub fn count_context_switches(schedule: &Schedule) -> ContextSwitches {
    let mut c = ContextSwitches::default();
    for job in 0..schedule.job_ids.len() {
        let segs = schedule.job_segments(job);
        if segs.is_empty() {
            continue;
        }
        let mut procs: [Vec<usize>; TYPE_COUNT] = Default::default();
        for (r, k, _) in &segs {
            if !procs[*r].contains(k) {
                procs[*r].push(*k);
            }
        }
        for r in 0..TYPE_COUNT {
            if procs[r].len() > 1 {
                c.intra[r] += 1;
            }
        }
        if procs.iter().all(|p| !p.is_empty()) {
            c.inter += 1;
        }
        let mut end = segs[0].2.end;
        for (_, _, s) in &segs[1..] {
            if s.start > end + OVERLAP_TOL {
                c.preemptions += 1;
            }
            end = end.max(s.end);
        }
    }
    c
}

/// Remaining work of each job at its release, every segment end inside its
/// window, and its deadline.
pub fn fluid_trace(schedule: &Schedule, jobs: &[JobInstance], tb: &Timebase) -> Vec<Vec<(f64, f64)>> {
    jobs.iter()
        .enumerate()
        .map(|(i, job)| {
            let (r, d) = (tb.to_seconds(job.release), tb.to_seconds(job.deadline));
            let mut times: Vec<f64> = vec![r];
            times.extend(schedule.job_segments(i).iter().map(|s| s.2.end).filter(|&t| t > r && t < d));
            times.push(d);
            times
                .into_iter()
                .map(|t| (t, job.min_exec_time - schedule.work_before(i, t)))
                .collect()
        })
        .collect()
}

/// Check a schedule against the job set and platform.
pub fn validate(schedule: &Schedule, jobs: &[JobInstance], platform: &Platform, tb: &Timebase) -> ScheduleReport {
    let mut violations = Vec::new();
    let mut worst: f64 = 0.0;
    let label = |i: usize| schedule.job_ids.get(i).cloned().unwrap_or_else(|| format!("#{i}"));

    for p in &schedule.processors {
        let t = &platform.types[p.core_type];
        let mut segs = p.segments.clone();
        segs.sort_by(|a, b| a.start.total_cmp(&b.start));
        for s in &segs {
            if s.job >= jobs.len() || !(s.end >= s.start) {
                violations.push(Violation::Malformed(format!("segment {s:?}")));
                continue;
            }
            if !t.has_speed(s.speed) {
                violations.push(Violation::IllegalSpeed {
                    core_type: p.core_type,
                    speed: s.speed,
                });
            }
            if s.start < -OVERLAP_TOL || s.end > schedule.horizon + OVERLAP_TOL {
                violations.push(Violation::Malformed(format!("segment {s:?} outside [0, {}]", schedule.horizon)));
            }
        }
        for w in segs.windows(2) {
            let overlap = w[0].end - w[1].start;
            if overlap > OVERLAP_TOL {
                worst = worst.max(overlap);
                violations.push(Violation::ProcessorOverlap {
                    core_type: p.core_type,
                    index: p.index,
                    at: w[1].start,
                });
            }
        }
    }

    let mut misses = Vec::new();
    for (i, job) in jobs.iter().enumerate() {
        let segs = schedule.job_segments(i);
        let (release, deadline) = (tb.to_seconds(job.release), tb.to_seconds(job.deadline));
        let mut work = 0.0;
        let mut end = f64::NEG_INFINITY;
        for (_, _, s) in &segs {
            if s.start < end - OVERLAP_TOL {
                worst = worst.max(end - s.start);
                violations.push(Violation::ParallelJob { job: label(i), at: s.start });
            }
            end = end.max(s.end);
            let early = release - s.start;
            let late = s.end - deadline;
            if early > OVERLAP_TOL || late > OVERLAP_TOL {
                worst = worst.max(early).max(late);
                violations.push(Violation::OutsideWindow {
                    job: label(i),
                    start: s.start,
                    end: s.end,
                });
            }
            work += (s.end.min(deadline) - s.start.max(release)).max(0.0) * s.speed;
        }
        let residual = job.min_exec_time - work;
        if residual > WORK_TOL {
            worst = worst.max(residual);
            misses.push(DeadlineMiss { job: label(i), residual });
        }
    }

    ScheduleReport {
        energy: energy(schedule, platform),
        switches: count_context_switches(schedule),
        violations,
        misses,
        max_residual: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, big_little, ORDERING_EXAMPLE};
    use crate::model::MajorGrid;
    use crate::ordering::{classify, hetero_wrap};

    fn seg(start: f64, end: f64, job: usize, speed: f64) -> Segment {
        Segment { start, end, job, speed }
    }

    fn job(id: &str, x: f64, release: i64, deadline: i64) -> JobInstance {
        JobInstance {
            task: id.into(),
            instance: 1,
            release,
            deadline,
            min_exec_time: x,
        }
    }

    /// Table V shares on one big and one LITTLE level, over a 10 s interval.
    fn example() -> (WorkloadPartition, Vec<JobInstance>, Platform) {
        let mut platform = big_little(2, 2);
        platform.types[0].speeds = vec![1.0];
        platform.types[1].speeds = vec![0.375];
        let jobs: Vec<JobInstance> = ORDERING_EXAMPLE
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| job(&format!("T{}", i + 1), 10.0 * (a + 0.375 * b), 0, 10_000))
            .collect();
        let grid = MajorGrid::from_boundaries(vec![0, 10_000], Timebase::default()).unwrap();
        let mut p = WorkloadPartition::zeros(&jobs, &grid, [vec![1.0], vec![0.375]]);
        for (i, &(a, b)) in ORDERING_EXAMPLE.iter().enumerate() {
            p.omega[0][i][0][0] = a;
            p.omega[0][i][1][0] = b;
            p.remaining[i][0] = jobs[i].min_exec_time;
        }
        (p, jobs, platform)
    }

    fn order(p: &WorkloadPartition, cores: [usize; 2]) -> Vec<OrderedInterval> {
        (0..p.grid.interval_count())
            .map(|mu| {
                let w: Vec<[f64; 2]> = (0..p.job_count()).map(|i| [p.aggregate(mu, i, 0), p.aggregate(mu, i, 1)]).collect();
                hetero_wrap(&classify(&w, 1e-9).unwrap(), &w, cores).unwrap()
            })
            .collect()
    }

    #[test]
    fn example_expands_to_scaled_windows() {
        let (p, jobs, platform) = example();
        let s = expand_schedule(&p, &order(&p, [2, 2]), &platform).unwrap();
        let t1 = s.job_segments(0);
        assert_eq!(t1.len(), 2);
        assert_eq!((t1[0].0, t1[0].1), (0, 0));
        assert!((t1[0].2.start).abs() < 1e-12 && (t1[0].2.end - 3.0).abs() < 1e-12);
        assert_eq!((t1[1].0, t1[1].1), (1, 1));
        assert!((t1[1].2.start - 3.0).abs() < 1e-12 && (t1[1].2.end - 10.0).abs() < 1e-12);

        let report = validate(&s, &jobs, &platform, &Timebase::default());
        assert!(report.passed(), "{:?}", report);
        assert_eq!(report.switches.inter, 3);
        assert!(report.switches.intra.iter().all(|&x| x <= 1));
    }

    #[test]
    fn empty_interval_is_all_idle() {
        let (mut p, _, platform) = example();
        for job in p.omega[0].iter_mut() {
            for lv in job.iter_mut() {
                lv.iter_mut().for_each(|w| *w = 0.0);
            }
        }
        let s = expand_schedule(&p, &order(&p, [2, 2]), &platform).unwrap();
        assert!(s.processors.iter().all(|q| q.segments.is_empty()));
    }

    #[test]
    fn two_levels_switch_once_lowest_first() {
        let platform = big_little(1, 0);
        let jobs = vec![job("A", 3.0, 0, 5000)];
        let grid = MajorGrid::from_boundaries(vec![0, 5000], Timebase::default()).unwrap();
        let mut p = WorkloadPartition::zeros(&jobs, &grid, [platform.types[0].speeds.clone(), vec![]]);
        // half the interval at 0.5 and 0.35 of it at 1.0: 1.25 + 1.75
        p.omega[0][0][0][0] = 0.5;
        p.omega[0][0][0][8] = 0.35;
        let s = expand_schedule(&p, &order(&p, [1, 0]), &platform).unwrap();
        let segs = &s.processors[0].segments;
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].speed, 0.5);
        assert_eq!(segs[1].speed, 1.0);
        assert!((segs[0].end - segs[1].start).abs() < 1e-12);
        let report = validate(&s, &jobs, &platform, &Timebase::default());
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn parallel_execution_is_flagged() {
        let platform = big_little(2, 0);
        let jobs = vec![job("A", 1.0, 0, 10_000)];
        let mut s = Schedule::idle(&platform, vec!["A".into()], 10.0);
        s.processors[0].segments.push(seg(0.0, 2.0, 0, 1.0));
        s.processors[1].segments.push(seg(1.0, 3.0, 0, 1.0));
        let r = validate(&s, &jobs, &platform, &Timebase::default());
        assert!(r.violations.iter().any(|v| matches!(v, Violation::ParallelJob { .. })));
        assert!(!r.passed());
    }

    #[test]
    fn shortfall_is_a_deadline_miss() {
        let platform = big_little(1, 0);
        let jobs = vec![job("A", 1.0, 0, 10_000)];
        let mut s = Schedule::idle(&platform, vec!["A".into()], 10.0);
        s.processors[0].segments.push(seg(0.0, 0.9, 0, 1.0));
        let r = validate(&s, &jobs, &platform, &Timebase::default());
        assert_eq!(r.misses.len(), 1);
        assert!((r.misses[0].residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn other_violations_are_flagged() {
        let platform = big_little(1, 0);
        let jobs = vec![job("A", 1.0, 1000, 3000), job("B", 1.0, 0, 10_000)];
        let mut s = Schedule::idle(&platform, vec!["A".into(), "B".into()], 10.0);
        s.processors[0].segments.push(seg(0.0, 1.5, 0, 1.0));
        s.processors[0].segments.push(seg(1.0, 3.0, 1, 0.3));
        let r = validate(&s, &jobs, &platform, &Timebase::default());
        assert!(r.violations.iter().any(|v| matches!(v, Violation::OutsideWindow { .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::ProcessorOverlap { .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::IllegalSpeed { .. })));
    }

    #[test]
    fn energy_accounting_examples() {
        let platform = big_little(0, 2);
        let s = Schedule::idle(&platform, vec![], 10.0);
        let e = energy(&s, &platform);
        assert!((e.total - 240.0).abs() < 1e-12 && e.active == 0.0);

        // measured power at s=1 on a big core
        let mut platform = big_little(1, 0);
        platform.types[0].power = crate::model::PowerModel {
            alpha: fixtures::BIG_MEASURED[8].1,
            beta: 1.0,
            p_static: 0.0,
        };
        let mut s = Schedule::idle(&platform, vec!["A".into()], 1.0);
        s.processors[0].segments.push(seg(0.0, 1.0, 0, 1.0));
        let e = energy(&s, &platform);
        assert!((e.active - 1142.0).abs() < 1e-9 && e.idle == 0.0);
    }

    #[test]
    fn energy_is_additive() {
        let platform = big_little(1, 1);
        let mut a = Schedule::idle(&platform, vec!["A".into()], 5.0);
        a.processors[0].segments.push(seg(0.0, 2.0, 0, 0.75));
        let mut b = Schedule::idle(&platform, vec!["A".into()], 3.0);
        b.processors[1].segments.push(seg(1.0, 3.0, 0, 0.25));
        let mut joined = Schedule::idle(&platform, vec!["A".into()], 8.0);
        joined.processors[0].segments.push(seg(0.0, 2.0, 0, 0.75));
        joined.processors[1].segments.push(seg(6.0, 8.0, 0, 0.25));
        let sum = energy(&a, &platform).total + energy(&b, &platform).total;
        assert!((energy(&joined, &platform).total - sum).abs() < 1e-9);
    }

    #[test]
    fn switch_counting() {
        let platform = big_little(2, 0);
        let mut s = Schedule::idle(&platform, vec!["A".into()], 10.0);
        s.processors[0].segments.push(seg(0.0, 4.0, 0, 1.0));
        assert_eq!(count_context_switches(&s), ContextSwitches::default());
        s.processors[0].segments.clear();
        s.processors[0].segments.push(seg(7.0, 10.0, 0, 1.0));
        s.processors[1].segments.push(seg(0.0, 2.0, 0, 1.0));
        let c = count_context_switches(&s);
        assert_eq!(c.intra, [1, 0]);
        assert_eq!(c.preemptions, 1);
    }

    #[test]
    fn fluid_trace_is_non_increasing() {
        let (p, jobs, platform) = example();
        let s = expand_schedule(&p, &order(&p, [2, 2]), &platform).unwrap();
        for trace in fluid_trace(&s, &jobs, &Timebase::default()) {
            assert!(trace.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12));
            assert!(trace.last().unwrap().1.abs() < 1e-9);
        }
    }
}
