//! SVG timeline of a schedule: one row per processor.

use std::fmt::Write;

use crate::model::Platform;
use crate::validate::Schedule;

const ROW_HEIGHT: f64 = 28.0;
const LABEL_WIDTH: f64 = 90.0;
const AXIS_HEIGHT: f64 = 24.0;
const PAD: f64 = 8.0;

/// FNV-1a over the job id.
pub fn job_hash(id: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for b in id.bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Fill color for a job, stable across runs.
pub fn job_color(id: &str) -> String {
    let h = job_hash(id);
    let hue = h % 360;
    let sat = 45 + (h >> 9) % 30;
    let light = 55 + (h >> 17) % 15;
    format!("hsl({hue},{sat}%,{light}%)")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_step(horizon: f64) -> f64 {
    let raw = horizon / 10.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

pub fn render_svg(schedule: &Schedule, platform: &Platform, width: f64) -> String {
    let plot_w = (width - LABEL_WIDTH - 2.0 * PAD).max(50.0);
    let horizon = if schedule.horizon > 0.0 { schedule.horizon } else { 1.0 };
    let x = |t: f64| LABEL_WIDTH + PAD + t / horizon * plot_w;
    let rows = schedule.processors.len();
    let height = 2.0 * PAD + rows as f64 * ROW_HEIGHT + AXIS_HEIGHT;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, p) in schedule.processors.iter().enumerate() {
        let y = PAD + k as f64 * ROW_HEIGHT;
        let name = escape(&platform.types[p.core_type].name);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" dominant-baseline="middle">{name} {}</text>"#,
            PAD,
            y + ROW_HEIGHT / 2.0,
            p.index
        );
        let _ = writeln!(
            s,
            r##"<rect x="{:.3}" y="{:.1}" width="{:.3}" height="{:.1}" fill="#f4f4f4" stroke="#ccc"/>"##,
            x(0.0),
            y + 2.0,
            plot_w,
            ROW_HEIGHT - 4.0
        );
        for seg in &p.segments {
            let id = &schedule.job_ids[seg.job];
            let (x0, x1) = (x(seg.start), x(seg.end));
            let _ = writeln!(
                s,
                r##"<rect x="{x0:.3}" y="{:.1}" width="{:.3}" height="{:.1}" fill="{}" stroke="#333" stroke-width="0.5"><title>{} [{}, {}) s={}</title></rect>"##,
                y + 2.0,
                (x1 - x0).max(0.0),
                ROW_HEIGHT - 4.0,
                job_color(id),
                escape(id),
                seg.start,
                seg.end,
                seg.speed
            );
            if x1 - x0 > 34.0 {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.3}" y="{:.1}" text-anchor="middle" dominant-baseline="middle">{} @{}</text>"#,
                    (x0 + x1) / 2.0,
                    y + ROW_HEIGHT / 2.0,
                    escape(id),
                    (seg.speed * 1e4).round() / 1e4
                );
            }
        }
    }
    let axis_y = PAD + rows as f64 * ROW_HEIGHT + 4.0;
    let _ = writeln!(
        s,
        r##"<line x1="{:.3}" y1="{axis_y:.1}" x2="{:.3}" y2="{axis_y:.1}" stroke="#333"/>"##,
        x(0.0),
        x(horizon)
    );
    let step = tick_step(horizon);
    let mut t = 0.0;
    while t <= horizon + 1e-9 {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x(t),
            axis_y + 14.0,
            (t * 1e6).round() / 1e6
        );
        t += step;
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, big_little};
    use crate::model::Timebase;
    use crate::pipeline::{self, Algorithm};

    #[test]
    fn fnv_reference_values() {
        assert_eq!(job_hash(""), 0x811c_9dc5);
        assert_eq!(job_hash("a"), 0xe40c_292c);
        assert_eq!(job_hash("foobar"), 0xbf9c_f968);
    }

    #[test]
    fn one_row_per_processor_and_deterministic() {
        let (_, tasks) = fixtures::constrained_taskset(2);
        let p = big_little(1, 1);
        let out = pipeline::run(&tasks, &p, Algorithm::LpDvfs, &Timebase::default()).unwrap();
        let a = render_svg(&out.schedule, &out.platform, 900.0);
        let b = render_svg(&out.schedule, &out.platform, 900.0);
        assert_eq!(a, b);
        assert!(a.contains(">big 0</text>") && a.contains(">LITTLE 0</text>"));
        let segs: usize = out.schedule.processors.iter().map(|p| p.segments.len()).sum();
        assert_eq!(a.matches("<title>").count(), segs);
    }
}
