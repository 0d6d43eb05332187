//! Per-interval ordering of type-level workloads onto processors.
//!
//! Cluster 1 is filled left to right along the number line `[0, m_1)`,
//! cluster 2 right to left along `[0, m_2)`; processor `k` owns `[k, k+1)`.
//! A job that uses both types gets complementary arcs of the unit circle on
//! the two clusters, so it never runs on two processors at once.

use thiserror::Error;

use crate::model::TYPE_COUNT;

/// Windows shorter than this are dropped.
const MIN_WINDOW: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderingError {
    #[error("needs inter-cluster reduction: tasks {0:?} each use both types without filling the interval")]
    NeedsReduction(Vec<usize>),
    #[error("task {task}: shares sum to {share} > 1")]
    TaskOverload { task: usize, share: f64 },
    #[error("type {cluster} load {load} exceeds its {cores} cores")]
    ClusterOverload { cluster: usize, load: f64, cores: usize },
    #[error("task {task}: negative or non-finite workload")]
    BadWorkload { task: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntervalClassification {
    /// On both types and filling the interval.
    pub im_a: Vec<usize>,
    /// On both types with idle time left; at most one.
    pub im_b: Vec<usize>,
    pub cp_1: Vec<usize>,
    pub cp_2: Vec<usize>,
}

/// Sort tasks by their per-type shares `w[i] = [omega_i^1, omega_i^2]`.
pub fn classify(w: &[[f64; TYPE_COUNT]], tol: f64) -> Result<IntervalClassification, OrderingError> {
    let mut c = IntervalClassification::default();
    for (i, &[a, b]) in w.iter().enumerate() {
        if !(a.is_finite() && b.is_finite()) || a < -tol || b < -tol {
            return Err(OrderingError::BadWorkload { task: i });
        }
        if a + b > 1.0 + tol {
            return Err(OrderingError::TaskOverload { task: i, share: a + b });
        }
        match (a > tol, b > tol) {
            (true, true) if a + b >= 1.0 - tol => c.im_a.push(i),
            (true, true) => c.im_b.push(i),
            (true, false) => c.cp_1.push(i),
            (false, true) => c.cp_2.push(i),
            (false, false) => {}
        }
    }
    if c.im_b.len() > 1 {
        return Err(OrderingError::NeedsReduction(c.im_b));
    }
    Ok(c)
}

/// Task `task` runs on processor `proc` of type `cluster` during
/// `[start, end)`, as fractions of the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub task: usize,
    pub cluster: usize,
    pub proc: usize,
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrderedInterval {
    pub cores: [usize; TYPE_COUNT],
    pub windows: Vec<Window>,
}

impl OrderedInterval {
    /// A task's windows on one cluster, in time order.
    pub fn task_windows(&self, task: usize, cluster: usize) -> Vec<Window> {
        let mut out: Vec<Window> = self
            .windows
            .iter()
            .filter(|w| w.task == task && w.cluster == cluster)
            .copied()
            .collect();
        out.sort_by(|a, b| a.start.total_cmp(&b.start));
        out
    }

    pub fn processor_windows(&self, cluster: usize, proc: usize) -> Vec<Window> {
        let mut out: Vec<Window> = self
            .windows
            .iter()
            .filter(|w| w.cluster == cluster && w.proc == proc)
            .copied()
            .collect();
        out.sort_by(|a, b| a.start.total_cmp(&b.start));
        out
    }
}

/// Cut `[a, b)` of the number line into per-processor windows.
fn place(out: &mut Vec<Window>, task: usize, cluster: usize, cores: usize, a: f64, b: f64) {
    let mut a = a.max(0.0);
    let b = b.min(cores as f64);
    while b - a > MIN_WINDOW {
        let mut k = a.floor();
        if k + 1.0 - a <= MIN_WINDOW {
            k += 1.0;
            a = k;
            continue;
        }
        let end = b.min(k + 1.0);
        let proc = (k as usize).min(cores - 1);
        out.push(Window {
            task,
            cluster,
            proc,
            start: a - k,
            end: (end - k).min(1.0),
        });
        a = end;
    }
}

/// Hetero-Wrap: jobs using both types go first on each cluster, in the
/// same order, so their two arcs are complementary.
pub fn hetero_wrap(
    class: &IntervalClassification,
    w: &[[f64; TYPE_COUNT]],
    cores: [usize; TYPE_COUNT],
) -> Result<OrderedInterval, OrderingError> {
    if class.im_b.len() > 1 {
        return Err(OrderingError::NeedsReduction(class.im_b.clone()));
    }
    for (i, &[a, b]) in w.iter().enumerate() {
        if a + b > 1.0 + 1e-9 {
            return Err(OrderingError::TaskOverload { task: i, share: a + b });
        }
    }
    for r in 0..TYPE_COUNT {
        let load: f64 = w.iter().map(|s| s[r]).sum();
        if load > cores[r] as f64 + 1e-9 {
            return Err(OrderingError::ClusterOverload {
                cluster: r + 1,
                load,
                cores: cores[r],
            });
        }
    }
    let mut windows = Vec::new();
    let shared = class.im_a.iter().chain(&class.im_b);

    let mut pos = 0.0;
    for &i in shared.clone().chain(&class.cp_1) {
        place(&mut windows, i, 0, cores[0], pos, pos + w[i][0]);
        pos += w[i][0];
    }
    let mut pos = cores[1] as f64;
    for &i in shared.chain(&class.cp_2) {
        place(&mut windows, i, 1, cores[1], pos - w[i][1], pos);
        pos -= w[i][1];
    }
    Ok(OrderedInterval { cores, windows })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MigrationCounts {
    /// Tasks on two or more processors of the type.
    pub intra: [usize; TYPE_COUNT],
    /// Tasks on both types.
    pub inter: usize,
}

pub fn migration_counts(ordered: &OrderedInterval) -> MigrationCounts {
    let mut tasks: Vec<usize> = ordered.windows.iter().map(|w| w.task).collect();
    tasks.sort_unstable();
    tasks.dedup();
    let mut counts = MigrationCounts::default();
    for t in tasks {
        let mut on_type = [false; TYPE_COUNT];
        for r in 0..TYPE_COUNT {
            let mut procs: Vec<usize> = ordered.task_windows(t, r).iter().map(|w| w.proc).collect();
            procs.dedup();
            on_type[r] = !procs.is_empty();
            if procs.len() > 1 {
                counts.intra[r] += 1;
            }
        }
        if on_type.iter().all(|&b| b) {
            counts.inter += 1;
        }
    }
    counts
}

/// Largest violation of the ordering invariants: self-overlap of a task,
/// processor overlap, per-type work mismatch against `w`.
pub fn ordering_violation(ordered: &OrderedInterval, w: &[[f64; TYPE_COUNT]]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, shares) in w.iter().enumerate() {
        let mut all: Vec<Window> = Vec::new();
        for (r, &share) in shares.iter().enumerate() {
            let tw = ordered.task_windows(i, r);
            let total: f64 = tw.iter().map(Window::len).sum();
            worst = worst.max((total - share.max(0.0)).abs());
            all.extend(tw);
        }
        all.sort_by(|a, b| a.start.total_cmp(&b.start));
        for p in all.windows(2) {
            worst = worst.max(p[0].end - p[1].start);
        }
    }
    for r in 0..TYPE_COUNT {
        for k in 0..ordered.cores[r] {
            let pw = ordered.processor_windows(r, k);
            for p in pw.windows(2) {
                worst = worst.max(p[0].end - p[1].start);
            }
            for x in &pw {
                worst = worst.max(-x.start).max(x.end - 1.0);
            }
        }
    }
    worst
}
