//! SVG Gantt charts: one lane per machine, dashed red lines at arrivals.

use std::fmt::Write;

use fjsp_core::{JobId, Schedule, ShopInstance};

const WIDTH: f64 = 960.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const LANE: f64 = 28.0;
const AXIS: f64 = 30.0;

/// Stable fill color from the job id.
pub fn job_color(job: JobId) -> String {
    let h = (job.0.wrapping_mul(2_654_435_761) >> 8) % 360;
    format!("hsl({h},65%,60%)")
}

fn fmt_num(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

pub fn render_gantt(schedule: &Schedule, inst: &ShopInstance, title: &str) -> String {
    let lanes = inst.num_machines;
    let arrivals: Vec<f64> = inst.jobs.iter().map(|j| j.arrival).filter(|&a| a > 0.0).collect();
    let horizon = schedule.makespan().max(arrivals.iter().copied().fold(0.0, f64::max)).max(1.0);
    let plot_w = WIDTH - LEFT - RIGHT;
    let x = |t: f64| LEFT + t / horizon * plot_w;
    let height = TOP + lanes as f64 * LANE + AXIS;
    let bottom = TOP + lanes as f64 * LANE;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
        fmt_num(WIDTH),
        fmt_num(height),
        fmt_num(WIDTH),
        fmt_num(height)
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" font-size="14">{}</text>"#, fmt_num(LEFT), escape(title));
    for k in 0..lanes {
        let y = TOP + k as f64 * LANE;
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#ccc"/>"##,
            fmt_num(LEFT),
            fmt_num(y),
            fmt_num(plot_w),
            fmt_num(LANE)
        );
        let _ = writeln!(s, r#"<text x="10" y="{}">M{}</text>"#, fmt_num(y + LANE * 0.65), k + 1);
    }
    for o in schedule.sorted().ops {
        let y = TOP + o.machine.index() as f64 * LANE + 3.0;
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="#333"><title>{} op {} [{}, {}]</title></rect>"##,
            fmt_num(x(o.start)),
            fmt_num(y),
            fmt_num(x(o.completion) - x(o.start)),
            fmt_num(LANE - 6.0),
            job_color(o.job),
            o.job,
            o.op_index,
            fmt_num(o.start),
            fmt_num(o.completion)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="9">{}.{}</text>"#,
            fmt_num(x(o.start) + 2.0),
            fmt_num(y + LANE * 0.5),
            o.job.0,
            o.op_index
        );
    }
    for a in arrivals {
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="red" stroke-dasharray="4 3"/>"#,
            fmt_num(x(a)),
            fmt_num(TOP),
            fmt_num(bottom)
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{2}" x2="{}" y2="{2}" stroke="black"/>"#,
        fmt_num(LEFT),
        fmt_num(LEFT + plot_w),
        fmt_num(bottom)
    );
    for i in 0..=5 {
        let t = horizon * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt_num(x(t)),
            fmt_num(bottom + 16.0),
            fmt_num(t)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
