//! The demo operations as plain functions, so they run natively in tests.
//! Every result is a JSON document with an `svg` field plus numbers for
//! the page to show.

use std::fmt::Write;

use serde::Serialize;

use hetsched::fixtures::{self, big_little};
use hetsched::model::{Timebase, TYPE_COUNT};
use hetsched::ordering;
use hetsched::partition::SHARE_TOL;
use hetsched::pipeline::{self, Algorithm};
use hetsched::speedprofile::{self, SpeedPoint};
use hetsched::{gantt, io};

#[derive(Debug, Serialize)]
pub struct ScheduleView {
    pub svg: String,
    pub algorithm: String,
    pub energy_mj: f64,
    pub nodvfs_energy_mj: Option<f64>,
    pub misses: usize,
    pub violations: usize,
    pub preemptions: usize,
    pub inter_migrations: usize,
}

/// Schedule a taskset; `nodvfs_energy_mj` is the GWA-NoDVFS reference when it is feasible.
pub fn schedule(taskset_json: &str, platform_json: &str, algorithm: &str, grid_points: usize) -> Result<ScheduleView, String> {
    let tasks = io::read_taskset(taskset_json.as_bytes()).map_err(|e| format!("taskset: {e}"))?;
    let platform = io::read_platform(platform_json.as_bytes()).map_err(|e| format!("platform: {e}"))?;
    let algorithm = Algorithm::parse(algorithm, grid_points).ok_or_else(|| format!("unknown algorithm {algorithm:?}"))?;
    let tb = Timebase::default();
    let out = pipeline::run(&tasks, &platform, algorithm, &tb).map_err(|e| e.to_string())?;
    let reference = pipeline::run(&tasks, &platform, Algorithm::GwaNoDvfs, &tb)
        .ok()
        .map(|r| r.report.energy.total);
    Ok(ScheduleView {
        svg: gantt::render_svg(&out.schedule, &out.platform, 900.0),
        algorithm: algorithm.to_string(),
        energy_mj: out.report.energy.total,
        nodvfs_energy_mj: reference,
        misses: out.report.misses.len(),
        violations: out.report.violations.len(),
        preemptions: out.report.switches.preemptions,
        inter_migrations: out.report.switches.inter,
    })
}

#[derive(Debug, Serialize)]
pub struct WrapView {
    pub svg: String,
    pub im_a: Vec<usize>,
    pub im_b: Vec<usize>,
    pub cp_1: Vec<usize>,
    pub cp_2: Vec<usize>,
}

/// Order one interval's per-type shares `[[w1, w2], ...]` on `cores` processors.
pub fn hetero_wrap(shares_json: &str, cores: [usize; TYPE_COUNT]) -> Result<WrapView, String> {
    let w: Vec<[f64; TYPE_COUNT]> = serde_json::from_str(shares_json).map_err(|e| format!("shares: {e}"))?;
    let class = ordering::classify(&w, SHARE_TOL).map_err(|e| e.to_string())?;
    let ordered = ordering::hetero_wrap(&class, &w, cores).map_err(|e| e.to_string())?;

    let (label_w, plot_w, row_h) = (80.0, 600.0, 26.0);
    let rows = cores[0] + cores[1];
    let height = rows as f64 * row_h + 30.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="11">"#,
        label_w + plot_w + 10.0
    );
    let mut row = 0;
    for (r, &m) in cores.iter().enumerate() {
        for k in 0..m {
            let y = row as f64 * row_h;
            let _ = writeln!(svg, r#"<text x="4" y="{:.1}">type {} proc {}</text>"#, y + 17.0, r + 1, k + 1);
            let _ = writeln!(
                svg,
                r##"<rect x="{label_w}" y="{:.1}" width="{plot_w}" height="{:.1}" fill="#f4f4f4" stroke="#ccc"/>"##,
                y + 2.0,
                row_h - 4.0
            );
            for win in ordered.processor_windows(r, k) {
                let id = format!("T{}", win.task + 1);
                let x0 = label_w + win.start * plot_w;
                let wd = (win.end - win.start) * plot_w;
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x0:.2}" y="{:.1}" width="{wd:.2}" height="{:.1}" fill="{}" stroke="#333" stroke-width="0.5"/>"##,
                    y + 2.0,
                    row_h - 4.0,
                    gantt::job_color(&id)
                );
                if wd > 24.0 {
                    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{id}</text>"#, x0 + wd / 2.0, y + 17.0);
                }
            }
            row += 1;
        }
    }
    let y = rows as f64 * row_h + 16.0;
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{y}" text-anchor="middle">{t}</text>"#, label_w + t * plot_w);
    }
    svg.push_str("</svg>\n");
    Ok(WrapView {
        svg,
        im_a: class.im_a,
        im_b: class.im_b,
        cp_1: class.cp_1,
        cp_2: class.cp_2,
    })
}

#[derive(Debug, Serialize)]
pub struct TwoSpeedView {
    pub svg: String,
    pub low_speed: f64,
    pub high_speed: f64,
    /// Fraction of the interval at the low speed.
    pub lambda: f64,
    pub average_power_mw: f64,
}

/// Cheapest two-speed mix for `demand` on the built-in big (`0`) or LITTLE (`1`) core.
pub fn two_speed(core_type: usize, demand: f64) -> Result<TwoSpeedView, String> {
    let platform = big_little(1, 1);
    let t = platform.types.get(core_type).ok_or_else(|| format!("no processor type {core_type}"))?;
    let points: Vec<SpeedPoint> = t.speeds.iter().map(|&s| SpeedPoint::new(s, t.active_power(s))).collect();
    let prof = speedprofile::two_speed_for_demand(&points, demand, t.p_idle).map_err(|e| e.to_string())?;

    let (w, h, pad) = (560.0, 320.0, 40.0);
    let s_max = t.max_speed();
    let p_max = t.active_power(s_max);
    let x = |s: f64| pad + s / s_max * (w - 2.0 * pad);
    let y = |p: f64| h - pad - p / p_max * (h - 2.0 * pad);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(
        svg,
        r##"<line x1="{pad}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#333"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{:.1}" stroke="#333"/>"##,
        h - pad,
        w - pad,
        h - pad,
        h - pad
    );
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">speed</text>"#, w - pad, h - 8.0);
    let _ = writeln!(svg, r#"<text x="4" y="{:.1}">mW</text>"#, pad - 8.0);
    let mut path = format!("M{:.2},{:.2}", x(0.0), y(t.p_idle));
    for p in &points {
        let _ = write!(path, " L{:.2},{:.2}", x(p.speed), y(p.power));
    }
    let _ = writeln!(svg, r##"<path d="{path}" fill="none" stroke="#888" stroke-dasharray="3,3"/>"##);
    for p in &points {
        let _ = writeln!(svg, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#555"/>"##, x(p.speed), y(p.power));
    }
    let _ = writeln!(
        svg,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d62728" stroke-width="2"/>"##,
        x(prof.low.speed),
        y(prof.low.power),
        x(prof.high.speed),
        y(prof.high.power)
    );
    let _ = writeln!(
        svg,
        r##"<circle cx="{:.2}" cy="{:.2}" r="5" fill="#d62728"/>"##,
        x(prof.average_speed()),
        y(prof.average_power())
    );
    svg.push_str("</svg>\n");
    Ok(TwoSpeedView {
        svg,
        low_speed: prof.low.speed,
        high_speed: prof.high.speed,
        lambda: prof.lambda,
        average_power_mw: prof.average_power(),
    })
}

/// Built-in taskset as JSON: `kind` is `implicit` (0..16) or `constrained` (0..10).
pub fn fixture_taskset(kind: &str, index: usize) -> Result<String, String> {
    let (_, tasks) = match kind {
        "implicit" if index < fixtures::IMPLICIT_TASKSETS.len() => fixtures::implicit_taskset(index),
        "constrained" if index < fixtures::CONSTRAINED_TASKSETS.len() => fixtures::constrained_taskset(index),
        _ => return Err(format!("no {kind} taskset {index}")),
    };
    let mut buf = Vec::new();
    io::write_taskset(&tasks, &mut buf).map_err(|e| e.to_string())?;
    String::from_utf8(buf).map_err(|e| e.to_string())
}

pub fn fixture_platform(big: usize, little: usize) -> Result<String, String> {
    let mut buf = Vec::new();
    io::write_platform(&big_little(big, little), &mut buf).map_err(|e| e.to_string())?;
    String::from_utf8(buf).map_err(|e| e.to_string())
}
