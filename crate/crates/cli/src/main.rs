//! `hetsched`: schedule tasksets on two-type platforms, sweep fixtures,
//! validate event lists, draw Gantt charts and cross-check the LP against
//! the exhaustive oracle.
//!
//! Exit codes: 0 success, 1 validation failure or runtime error,
//! 2 infeasible taskset, 64 usage error.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hetsched::model::{self, JobInstance, Platform, ProcessorType, TaskSpec, Timebase};
use hetsched::pipeline::{self, Algorithm, PipelineError, PipelineOutput};
use hetsched::{baselines, gantt, io, oracle, partition, validate};

#[derive(Parser)]
#[command(name = "hetsched", version, about = "Energy-aware real-time scheduling on big.LITTLE-style platforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Time base in seconds; release times and deadlines must be multiples of it.
    #[arg(long, global = true, default_value_t = 1e-3)]
    tick: f64,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Inputs {
    /// Taskset JSON file.
    #[arg(long)]
    taskset: PathBuf,
    /// Platform JSON file.
    #[arg(long)]
    platform: PathBuf,
}

#[derive(Args)]
struct AlgorithmArgs {
    /// lp-dvfs, nlp-dvfs, gwa-ddiscrete or gwa-nodvfs.
    #[arg(long, default_value = "lp-dvfs")]
    algorithm: String,
    /// Evenly spaced speed levels per type for nlp-dvfs.
    #[arg(long, default_value_t = 17)]
    nlp_grid_points: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Schedule one taskset; writes report.csv, events.csv, partition.csv and gantt.svg.
    Schedule {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        algorithm: AlgorithmArgs,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write the LP-DVFS program as lp.mps.
        #[arg(long)]
        dump_lp: bool,
    },
    /// Run every algorithm on every taskset in a directory; energies normalized by GWA-NoDVFS.
    Sweep {
        /// Directory of taskset JSON files.
        #[arg(long)]
        taskset: PathBuf,
        #[arg(long)]
        platform: PathBuf,
        #[arg(long, default_value_t = 17)]
        nlp_grid_points: usize,
        /// Output CSV file.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Check an event list against the taskset and platform.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        /// Event CSV (t_start,t_end,type,proc,job,speed).
        #[arg(long)]
        schedule: PathBuf,
        /// Report CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw an SVG timeline from an event list, or from a fresh schedule.
    Gantt {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        algorithm: AlgorithmArgs,
        /// Event CSV to draw instead of scheduling.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, default_value = "gantt.svg")]
        out: PathBuf,
        #[arg(long, default_value_t = 1000.0)]
        width: f64,
    },
    /// Compare LP-DVFS with the exhaustive quantized oracle on random tiny instances.
    OracleCheck {
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Per-instance CSV; stdout summary only when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Infeasible(String),
    Validation(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Infeasible(m) => Failure::Infeasible(m),
            e => Failure::Other(e.into()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn parse_algorithm(a: &AlgorithmArgs) -> Result<Algorithm, Failure> {
    Algorithm::parse(&a.algorithm, a.nlp_grid_points).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown algorithm {:?}; expected one of {}",
            a.algorithm,
            Algorithm::NAMES.join(", ")
        ))
    })
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn load(inputs: &Inputs) -> Result<(Vec<TaskSpec>, Platform), Failure> {
    let tasks = io::read_taskset(open(&inputs.taskset)?)
        .with_context(|| format!("reading {}", inputs.taskset.display()))?;
    let platform = io::read_platform(open(&inputs.platform)?)
        .with_context(|| format!("reading {}", inputs.platform.display()))?;
    Ok((tasks, platform))
}

fn timebase(tick: f64) -> Result<Timebase, Failure> {
    Timebase::new(tick).map_err(|e| Failure::Usage(e.to_string()))
}

fn summary(out: &PipelineOutput) -> String {
    let r = &out.report;
    format!(
        "{}: energy {:.6} mJ, {} misses, {} violations, {} preemptions, {} inter-type migrations",
        out.algorithm,
        r.energy.total,
        r.misses.len(),
        r.violations.len(),
        r.switches.preemptions,
        r.switches.inter
    )
}

fn cmd_schedule(inputs: &Inputs, args: &AlgorithmArgs, out_dir: &Path, dump_lp: bool, tb: &Timebase) -> CmdResult {
    let algorithm = parse_algorithm(args)?;
    let (tasks, platform) = load(inputs)?;
    let out = pipeline::run(&tasks, &platform, algorithm, tb)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    io::write_report(algorithm.name(), out.formulation_energy, &out.report, create(&out_dir.join("report.csv"))?)
        .context("writing report.csv")?;
    io::write_csv(&io::event_rows(&out.schedule, &out.platform), create(&out_dir.join("events.csv"))?)
        .context("writing events.csv")?;
    let rows = match algorithm {
        Algorithm::GwaDDiscrete | Algorithm::GwaNoDvfs => {
            let gwa = baselines::solve_gwa_ddiscrete(&tasks, &out.platform, tb).context("re-solving GWA")?;
            io::gwa_rows(&gwa.allocation, &out.platform)
        }
        _ => io::partition_rows(&out.partition, &out.platform),
    };
    io::write_csv(&rows, create(&out_dir.join("partition.csv"))?).context("writing partition.csv")?;
    let mut svg = create(&out_dir.join("gantt.svg"))?;
    svg.write_all(gantt::render_svg(&out.schedule, &out.platform, 1000.0).as_bytes())
        .context("writing gantt.svg")?;
    if dump_lp {
        let built = partition::build_lp_dvfs(&out.plan.jobs, &out.plan.grid, &out.platform).context("building LP")?;
        built
            .lp
            .write_mps("LPDVFS", create(&out_dir.join("lp.mps"))?)
            .context("writing lp.mps")?;
    }

    println!("{}", summary(&out));
    if out.report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{} failed validation", algorithm)))
    }
}

fn sweep_one(path: &Path, platform: &Platform, grid_points: usize, tb: &Timebase) -> Vec<io::SweepRow> {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let algorithms = [
        Algorithm::LpDvfs,
        Algorithm::NlpDvfs { grid_points },
        Algorithm::GwaDDiscrete,
        Algorithm::GwaNoDvfs,
    ];
    let tasks = File::open(path)
        .map_err(anyhow::Error::from)
        .and_then(|f| Ok(io::read_taskset(BufReader::new(f))?));
    let tasks = match tasks {
        Ok(t) => t,
        Err(e) => {
            return algorithms
                .iter()
                .map(|a| io::SweepRow {
                    taskset: name.clone(),
                    density: f64::NAN,
                    algorithm: a.name().into(),
                    energy_mj: None,
                    normalized_energy: None,
                    error: format!("{e:#}"),
                })
                .collect()
        }
    };
    let density = model::taskset_stats(&tasks, platform, tb).total_density;
    let results: Vec<Result<f64, String>> = algorithms
        .iter()
        .map(|&a| match pipeline::run(&tasks, platform, a, tb) {
            Ok(out) if out.report.passed() => Ok(out.report.energy.total),
            Ok(out) => Err(format!(
                "validation failed: {} misses, {} violations",
                out.report.misses.len(),
                out.report.violations.len()
            )),
            Err(e) => Err(e.to_string()),
        })
        .collect();
    let base = results[3].as_ref().ok().copied();
    algorithms
        .iter()
        .zip(results)
        .map(|(a, r)| {
            let (energy, error) = match r {
                Ok(e) => (Some(e), String::new()),
                Err(m) => (None, m),
            };
            io::SweepRow {
                taskset: name.clone(),
                density,
                algorithm: a.name().into(),
                energy_mj: energy,
                normalized_energy: energy.zip(base).map(|(e, b)| e / b),
                error,
            }
        })
        .collect()
}

fn cmd_sweep(dir: &Path, platform_path: &Path, grid_points: usize, out: &Path, tb: &Timebase) -> CmdResult {
    if grid_points < 2 {
        return Err(Failure::Usage(format!("--nlp-grid-points must be at least 2, got {grid_points}")));
    }
    let platform = io::read_platform(open(platform_path)?).with_context(|| format!("reading {}", platform_path.display()))?;
    let entries = fs::read_dir(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let rows: Vec<io::SweepRow> = files
        .par_iter()
        .map(|f| sweep_one(f, &platform, grid_points, tb))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let w = create(out)?;
    if rows.is_empty() {
        io::write_header(&io::SWEEP_HEADER, w).context("writing sweep CSV")?;
    } else {
        io::write_csv(&rows, w).context("writing sweep CSV")?;
    }
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    println!("{} tasksets, {} rows, {failed} failures -> {}", files.len(), rows.len(), out.display());
    Ok(())
}

fn load_events(inputs: &Inputs, events: &Path, tb: &Timebase) -> Result<(validate::Schedule, Vec<JobInstance>, Platform), Failure> {
    let (tasks, platform) = load(inputs)?;
    let plan = pipeline::plan_jobs(&tasks, platform.f_max, tb).map_err(PipelineError::from)?;
    let rows: Vec<io::EventRow> = io::read_csv(open(events)?).with_context(|| format!("reading {}", events.display()))?;
    let ids = plan.jobs.iter().map(JobInstance::label).collect();
    let schedule = io::schedule_from_events(&rows, &platform, ids, plan.horizon).context("rebuilding schedule")?;
    Ok((schedule, plan.jobs, platform))
}

fn cmd_validate(inputs: &Inputs, events: &Path, out: Option<&Path>, tb: &Timebase) -> CmdResult {
    let (schedule, jobs, platform) = load_events(inputs, events, tb)?;
    let report = validate::validate(&schedule, &jobs, &platform, tb);
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout()),
    };
    io::write_report("input", f64::NAN, &report, sink).context("writing report")?;
    if report.passed() {
        Ok(())
    } else {
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
        for m in &report.misses {
            eprintln!("deadline miss: {} residual {}", m.job, m.residual);
        }
        Err(Failure::Validation("schedule failed validation".into()))
    }
}

fn cmd_gantt(inputs: &Inputs, args: &AlgorithmArgs, events: Option<&Path>, out: &Path, width: f64, tb: &Timebase) -> CmdResult {
    let (schedule, platform) = match events {
        Some(e) => {
            let (s, _, p) = load_events(inputs, e, tb)?;
            (s, p)
        }
        None => {
            let algorithm = parse_algorithm(args)?;
            let (tasks, platform) = load(inputs)?;
            let run = pipeline::run(&tasks, &platform, algorithm, tb)?;
            (run.schedule, run.platform)
        }
    };
    create(out)?
        .write_all(gantt::render_svg(&schedule, &platform, width).as_bytes())
        .with_context(|| format!("writing {}", out.display()))?;
    println!("{} processors -> {}", schedule.processors.len(), out.display());
    Ok(())
}

/// Two-level platform with at most two cores in total.
fn tiny_platform(rng: &mut ChaCha8Rng) -> Platform {
    let (big, little) = [(1, 1), (2, 0), (0, 2), (1, 0), (0, 1)][rng.gen_range(0..5)];
    let two_level = |t: ProcessorType| ProcessorType {
        speeds: vec![0.5, 1.0],
        ..t
    };
    Platform::new(
        [
            two_level(hetsched::fixtures::big_core(big)),
            two_level(hetsched::fixtures::little_core(little)),
        ],
        1.0,
    )
    .expect("two-level platform is valid")
}

fn cmd_oracle_check(count: usize, seed: u64, out: Option<&Path>) -> CmdResult {
    let tb = Timebase::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = vec!["instance,jobs,processors,lp_feasible,oracle_feasible,lp_energy,oracle_energy,aligned,agrees".to_string()];
    let mut disagreements = 0;
    for k in 0..count {
        let platform = tiny_platform(&mut rng);
        let jobs: Vec<JobInstance> = (0..rng.gen_range(1..=3))
            .map(|i| {
                let release = rng.gen_range(0..7i64);
                let deadline = rng.gen_range(release + 1..=8);
                JobInstance {
                    task: format!("J{}", i + 1),
                    instance: 1,
                    release: release * 1000,
                    deadline: deadline * 1000,
                    min_exec_time: rng.gen_range(1..=deadline - release + 1) as f64,
                }
            })
            .collect();
        let horizon = tb.to_seconds(jobs.iter().map(|j| j.deadline).max().unwrap_or(0));
        let c = oracle::compare_with_lp(&jobs, &platform, &tb, 1.0, horizon).with_context(|| format!("instance {k}"))?;
        let agrees = c.agrees(1e-6);
        disagreements += usize::from(!agrees);
        let fmt = |e: Option<f64>| e.map(|v| v.to_string()).unwrap_or_default();
        lines.push(format!(
            "{k},{},{},{},{},{},{},{},{agrees}",
            jobs.len(),
            platform.total_cores(),
            c.lp_feasible,
            c.oracle.feasible,
            fmt(c.lp_energy),
            fmt(c.oracle.energy),
            c.aligned
        ));
    }
    if let Some(p) = out {
        let mut w = create(p)?;
        for l in &lines {
            writeln!(w, "{l}").context("writing oracle CSV")?;
        }
    }
    println!("{count} instances, {disagreements} disagreements (seed {seed})");
    if disagreements == 0 {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{disagreements} instances disagree")))
    }
}

fn run(cli: Cli) -> CmdResult {
    let tb = timebase(cli.tick)?;
    match &cli.command {
        Command::Schedule {
            inputs,
            algorithm,
            out,
            dump_lp,
        } => cmd_schedule(inputs, algorithm, out, *dump_lp, &tb),
        Command::Sweep {
            taskset,
            platform,
            nlp_grid_points,
            out,
        } => cmd_sweep(taskset, platform, *nlp_grid_points, out, &tb),
        Command::Validate { inputs, schedule, out } => cmd_validate(inputs, schedule, out.as_deref(), &tb),
        Command::Gantt {
            inputs,
            algorithm,
            schedule,
            out,
            width,
        } => cmd_gantt(inputs, algorithm, schedule.as_deref(), out, *width, &tb),
        Command::OracleCheck { count, out } => cmd_oracle_check(*count, cli.seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(64)
        }
        Err(Failure::Infeasible(m)) => {
            eprintln!("infeasible: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Validation(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
