//! JSON taskset and platform files, CSV exports.
//!
//! Times are seconds, powers mW, energies mJ. Speeds are normalized to the
//! platform's fastest frequency.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::GwaAllocation;
use crate::model::{Demand, ModelError, Platform, PowerModel, ProcessorType, TaskSpec, TYPE_COUNT};
use crate::partition::{WorkloadPartition, ZERO_TOL};
use crate::validate::{Schedule, ScheduleReport, Segment};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("task {0}: give exactly one of cycles and min_exec_time")]
    Demand(String),
    #[error("platform file lists {0} processor types, expected {TYPE_COUNT}")]
    TypeCount(usize),
    #[error("event names unknown {0}")]
    UnknownEvent(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_exec_time: Option<f64>,
    pub deadline: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival: Option<f64>,
}

impl TaskRecord {
    pub fn to_spec(&self) -> Result<TaskSpec, IoError> {
        let demand = match (self.cycles, self.min_exec_time) {
            (Some(c), None) => Demand::Cycles(c),
            (None, Some(x)) => Demand::MinExecTime(x),
            _ => return Err(IoError::Demand(self.id.clone())),
        };
        let spec = TaskSpec {
            id: self.id.clone(),
            demand,
            deadline: self.deadline,
            period: self.period,
            arrival: self.arrival.unwrap_or(0.0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(t: &TaskSpec) -> Self {
        let (cycles, min_exec_time) = match t.demand {
            Demand::Cycles(c) => (Some(c), None),
            Demand::MinExecTime(x) => (None, Some(x)),
        };
        Self {
            id: t.id.clone(),
            cycles,
            min_exec_time,
            deadline: t.deadline,
            period: t.period,
            arrival: (t.period.is_none() || t.arrival != 0.0).then_some(t.arrival),
        }
    }
}

/// A bare array of tasks, or an object carrying notes next to the tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TasksetFile {
    Bare(Vec<TaskRecord>),
    Annotated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        units: Option<String>,
        tasks: Vec<TaskRecord>,
    },
}

pub const TASKSET_UNITS: &str = "times in seconds; min_exec_time is the execution time at normalized speed 1; cycles are divided by f_max";
pub const PLATFORM_UNITS: &str = "speeds normalized to f_max (Hz); power P(s) = alpha * s^beta + p_static in mW; p_idle in mW";

pub fn read_taskset(r: impl Read) -> Result<Vec<TaskSpec>, IoError> {
    let file: TasksetFile = serde_json::from_reader(r)?;
    let tasks = match file {
        TasksetFile::Bare(t) | TasksetFile::Annotated { tasks: t, .. } => t,
    };
    tasks.iter().map(TaskRecord::to_spec).collect()
}

pub fn write_taskset(tasks: &[TaskSpec], mut w: impl Write) -> Result<(), IoError> {
    let file = TasksetFile::Annotated {
        units: Some(TASKSET_UNITS.into()),
        tasks: tasks.iter().map(TaskRecord::from_spec).collect(),
    };
    serde_json::to_writer_pretty(&mut w, &file)?;
    writeln!(w)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeRecord {
    pub name: String,
    pub cores: usize,
    pub speeds: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub p_static: f64,
    pub p_idle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    #[serde(default = "unit_f_max")]
    pub f_max: f64,
    pub types: Vec<TypeRecord>,
}

fn unit_f_max() -> f64 {
    1.0
}

impl PlatformFile {
    pub fn to_platform(&self) -> Result<Platform, IoError> {
        if self.types.len() != TYPE_COUNT {
            return Err(IoError::TypeCount(self.types.len()));
        }
        let types = std::array::from_fn(|r| {
            let t = &self.types[r];
            ProcessorType {
                name: t.name.clone(),
                cores: t.cores,
                speeds: t.speeds.clone(),
                power: PowerModel {
                    alpha: t.alpha,
                    beta: t.beta,
                    p_static: t.p_static,
                },
                p_idle: t.p_idle,
            }
        });
        Ok(Platform::new(types, self.f_max)?)
    }

    pub fn from_platform(p: &Platform) -> Self {
        Self {
            units: Some(PLATFORM_UNITS.into()),
            f_max: p.f_max,
            types: p
                .types
                .iter()
                .map(|t| TypeRecord {
                    name: t.name.clone(),
                    cores: t.cores,
                    speeds: t.speeds.clone(),
                    alpha: t.power.alpha,
                    beta: t.power.beta,
                    p_static: t.power.p_static,
                    p_idle: t.p_idle,
                })
                .collect(),
        }
    }
}

pub fn read_platform(r: impl Read) -> Result<Platform, IoError> {
    let file: PlatformFile = serde_json::from_reader(r)?;
    file.to_platform()
}

pub fn write_platform(p: &Platform, mut w: impl Write) -> Result<(), IoError> {
    serde_json::to_writer_pretty(&mut w, &PlatformFile::from_platform(p))?;
    writeln!(w)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub interval_index: String,
    pub t_start: f64,
    pub t_end: f64,
    pub job_id: String,
    #[serde(rename = "type")]
    pub core_type: String,
    pub speed_level: f64,
    pub omega: f64,
}

/// Nonzero `omega` entries, one row each.
pub fn partition_rows(p: &WorkloadPartition, platform: &Platform) -> Vec<PartitionRow> {
    let mut rows = Vec::new();
    for mu in 0..p.grid.interval_count() {
        for (i, id) in p.job_ids.iter().enumerate() {
            for r in 0..TYPE_COUNT {
                for (q, &s) in p.speeds[r].iter().enumerate() {
                    let w = p.omega[mu][i][r][q];
                    if w > ZERO_TOL {
                        rows.push(PartitionRow {
                            interval_index: mu.to_string(),
                            t_start: p.grid.start(mu),
                            t_end: p.grid.end(mu),
                            job_id: id.clone(),
                            core_type: platform.types[r].name.clone(),
                            speed_level: s,
                            omega: w,
                        });
                    }
                }
            }
        }
    }
    rows
}

/// Hyperperiod-constant densities; `omega` holds `delta`.
pub fn gwa_rows(alloc: &GwaAllocation, platform: &Platform) -> Vec<PartitionRow> {
    let mut rows = Vec::new();
    for (i, id) in alloc.task_ids.iter().enumerate() {
        for r in 0..TYPE_COUNT {
            for (q, &s) in alloc.speeds[r].iter().enumerate() {
                let d = alloc.delta[i][r][q];
                if d > ZERO_TOL {
                    rows.push(PartitionRow {
                        interval_index: "hyperperiod".into(),
                        t_start: 0.0,
                        t_end: alloc.hyperperiod,
                        job_id: id.clone(),
                        core_type: platform.types[r].name.clone(),
                        speed_level: s,
                        omega: d,
                    });
                }
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub t_start: f64,
    pub t_end: f64,
    #[serde(rename = "type")]
    pub core_type: String,
    pub proc: usize,
    pub job: String,
    pub speed: f64,
}

/// Busy segments ordered by processor, then time.
pub fn event_rows(schedule: &Schedule, platform: &Platform) -> Vec<EventRow> {
    schedule
        .processors
        .iter()
        .flat_map(|p| {
            p.segments.iter().map(move |s| EventRow {
                t_start: s.start,
                t_end: s.end,
                core_type: platform.types[p.core_type].name.clone(),
                proc: p.index,
                job: schedule.job_ids[s.job].clone(),
                speed: s.speed,
            })
        })
        .collect()
}

/// Rebuild a schedule from its event list. Jobs are looked up by label in
/// `job_ids`, processor types by name.
pub fn schedule_from_events(
    rows: &[EventRow],
    platform: &Platform,
    job_ids: Vec<String>,
    horizon: f64,
) -> Result<Schedule, IoError> {
    let mut schedule = Schedule::idle(platform, job_ids, horizon);
    for row in rows {
        let r = platform
            .types
            .iter()
            .position(|t| t.name == row.core_type)
            .ok_or_else(|| IoError::UnknownEvent(format!("type {:?}", row.core_type)))?;
        let job = schedule
            .job_ids
            .iter()
            .position(|j| *j == row.job)
            .ok_or_else(|| IoError::UnknownEvent(format!("job {:?}", row.job)))?;
        let proc = schedule
            .processor_mut(r, row.proc)
            .ok_or_else(|| IoError::UnknownEvent(format!("processor {} {}", row.core_type, row.proc)))?;
        proc.segments.push(Segment {
            start: row.t_start,
            end: row.t_end,
            job,
            speed: row.speed,
        });
    }
    for p in &mut schedule.processors {
        p.segments.sort_by(|a, b| a.start.total_cmp(&b.start));
    }
    Ok(schedule)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub taskset: String,
    #[serde(rename = "D")]
    pub density: f64,
    pub algorithm: String,
    pub energy_mj: Option<f64>,
    pub normalized_energy: Option<f64>,
    /// Empty on success.
    pub error: String,
}

pub fn write_csv<T: Serialize>(rows: &[T], w: impl Write) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Header-only CSV for an empty table.
pub fn write_header(header: &[&str], w: impl Write) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    out.flush()?;
    Ok(())
}

pub const SWEEP_HEADER: [&str; 6] = ["taskset", "D", "algorithm", "energy_mj", "normalized_energy", "error"];

pub fn read_csv<T: for<'de> Deserialize<'de>>(r: impl Read) -> Result<Vec<T>, IoError> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(IoError::from))
        .collect()
}

/// Two-column `metric,value` summary of a validated schedule.
pub fn write_report(algorithm: &str, formulation_energy: f64, report: &ScheduleReport, w: impl Write) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["metric", "value"])?;
    let s = &report.switches;
    let rows: Vec<(&str, String)> = vec![
        ("algorithm", algorithm.into()),
        ("passed", report.passed().to_string()),
        ("energy_total_mj", report.energy.total.to_string()),
        ("energy_active_mj", report.energy.active.to_string()),
        ("energy_idle_mj", report.energy.idle.to_string()),
        ("formulation_energy_mj", formulation_energy.to_string()),
        ("deadline_misses", report.misses.len().to_string()),
        ("violations", report.violations.len().to_string()),
        ("max_residual", report.max_residual.to_string()),
        ("preemptions", s.preemptions.to_string()),
        ("intra_migrations_type1", s.intra[0].to_string()),
        ("intra_migrations_type2", s.intra[1].to_string()),
        ("inter_migrations", s.inter.to_string()),
    ];
    for (k, v) in rows {
        out.write_record([k, v.as_str()])?;
    }
    for m in &report.misses {
        out.write_record(["miss", &format!("{} residual {}", m.job, m.residual)])?;
    }
    for v in &report.violations {
        out.write_record(["violation", &v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, big_little};

    #[test]
    fn taskset_round_trip() {
        let tasks = vec![
            TaskSpec::periodic("A", 1.0, 4.0, 5.0),
            TaskSpec::aperiodic("B", 0.5, 2.0, 3.0),
            TaskSpec {
                demand: Demand::Cycles(3.2e9),
                ..TaskSpec::implicit("C", 0.0, 10.0)
            },
        ];
        let mut buf = Vec::new();
        write_taskset(&tasks, &mut buf).unwrap();
        assert_eq!(read_taskset(buf.as_slice()).unwrap(), tasks);
    }

    #[test]
    fn bare_array_is_accepted() {
        let json = r#"[{"id": "T1", "min_exec_time": 1, "deadline": 5, "period": 5}]"#;
        let tasks = read_taskset(json.as_bytes()).unwrap();
        assert_eq!(tasks, vec![TaskSpec::implicit("T1", 1.0, 5.0)]);
    }

    #[test]
    fn ambiguous_demand_is_rejected() {
        let json = r#"[{"id": "T1", "min_exec_time": 1, "cycles": 2, "deadline": 5}]"#;
        assert!(matches!(read_taskset(json.as_bytes()), Err(IoError::Demand(_))));
    }

    #[test]
    fn platform_round_trip() {
        let p = big_little(2, 6);
        let mut buf = Vec::new();
        write_platform(&p, &mut buf).unwrap();
        assert_eq!(read_platform(buf.as_slice()).unwrap(), p);
    }

    #[test]
    fn events_round_trip() {
        let (_, tasks) = fixtures::constrained_taskset(3);
        let p = big_little(1, 1);
        let out = crate::pipeline::run(&tasks, &p, crate::pipeline::Algorithm::LpDvfs, &Default::default()).unwrap();
        let rows = event_rows(&out.schedule, &p);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back: Vec<EventRow> = read_csv(buf.as_slice()).unwrap();
        let s = schedule_from_events(&back, &p, out.schedule.job_ids.clone(), out.schedule.horizon).unwrap();
        assert_eq!(s, out.schedule);
        let bad = EventRow { job: "nope".into(), ..back[0].clone() };
        assert!(matches!(
            schedule_from_events(&[bad], &p, out.schedule.job_ids.clone(), 10.0),
            Err(IoError::UnknownEvent(_))
        ));
    }

    #[test]
    fn gwa_rows_are_labelled_hyperperiod() {
        let (_, tasks) = fixtures::implicit_taskset(0);
        let p = big_little(2, 6);
        let r = crate::baselines::solve_gwa_ddiscrete(&tasks, &p, &Default::default()).unwrap();
        let rows = gwa_rows(&r.allocation, &p);
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.interval_index == "hyperperiod" && r.t_end == 20.0));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let head = String::from_utf8(buf.clone()).unwrap();
        assert!(head.starts_with("interval_index,t_start,t_end,job_id,type,speed_level,omega\n"));
        assert_eq!(read_csv::<PartitionRow>(buf.as_slice()).unwrap(), rows);
    }
}
