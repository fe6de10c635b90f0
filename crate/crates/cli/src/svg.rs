//! Small-multiple plots of cluster members and centroids.

use std::fmt::Write as _;
use std::io::{self, Write};

const PANEL_W: f64 = 240.0;
const PANEL_H: f64 = 150.0;
const PAD: f64 = 14.0;
const TITLE_H: f64 = 28.0;
const PER_ROW: usize = 5;
const CONTEXTS: [&str; 4] = ["SWD", "SWE", "WWD", "WWE"];

fn polyline(buf: &mut String, values: &[f64], x0: f64, y0: f64, w: f64, h: f64, style: &str) {
    buf.push_str("<polyline fill=\"none\" ");
    buf.push_str(style);
    buf.push_str(" points=\"");
    let step = w / (values.len().max(2) - 1) as f64;
    for (i, v) in values.iter().enumerate() {
        let y = y0 + h - v.clamp(0.0, 1.0) * h;
        let _ = write!(buf, "{:.1},{:.1} ", x0 + i as f64 * step, y);
    }
    buf.push_str("\"/>\n");
}

/// One panel per cluster: members in a light stroke, their mean in red, and
/// the four loading contexts as shaded bands along the 96-point axis.
pub fn write_cluster_panels<W: Write>(
    mut w: W,
    title: &str,
    clusters: &[Vec<&[f64]>],
) -> io::Result<()> {
    let k = clusters.len();
    let cols = k.clamp(1, PER_ROW);
    let rows = k.div_ceil(PER_ROW).max(1);
    let width = cols as f64 * (PANEL_W + PAD) + PAD;
    let height = TITLE_H + rows as f64 * (PANEL_H + PAD) + PAD;

    let mut buf = String::new();
    let _ = writeln!(
        buf,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(buf, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        buf,
        "<text x=\"{PAD}\" y=\"20\" font-size=\"14\">{} ({} clusters)</text>",
        escape(title),
        k
    );

    for (c, members) in clusters.iter().enumerate() {
        let x0 = PAD + (c % PER_ROW) as f64 * (PANEL_W + PAD);
        let y0 = TITLE_H + (c / PER_ROW) as f64 * (PANEL_H + PAD);
        let plot_y = y0 + 16.0;
        let plot_h = PANEL_H - 20.0;
        let _ = writeln!(buf, "<g>");
        let band = PANEL_W / 4.0;
        for (i, name) in CONTEXTS.iter().enumerate() {
            let fill = if i % 2 == 0 { "#f2f4f7" } else { "#e4e8ee" };
            let bx = x0 + i as f64 * band;
            let _ = writeln!(
                buf,
                "<rect x=\"{bx:.1}\" y=\"{plot_y:.1}\" width=\"{band:.1}\" height=\"{plot_h:.1}\" fill=\"{fill}\"/>"
            );
            let _ = writeln!(
                buf,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"8\" fill=\"#667\">{name}</text>",
                bx + 3.0,
                plot_y + plot_h - 3.0
            );
        }
        let _ = writeln!(
            buf,
            "<text x=\"{x0:.1}\" y=\"{:.1}\" font-size=\"11\">cluster {c} (n={})</text>",
            y0 + 11.0,
            members.len()
        );
        for m in members {
            polyline(
                &mut buf,
                m,
                x0,
                plot_y,
                PANEL_W,
                plot_h,
                "stroke=\"#8a96a8\" stroke-opacity=\"0.35\" stroke-width=\"0.6\"",
            );
        }
        if !members.is_empty() {
            let mut mean = vec![0.0; members[0].len()];
            for m in members {
                mean.iter_mut().zip(m.iter()).for_each(|(a, v)| *a += v);
            }
            mean.iter_mut().for_each(|v| *v /= members.len() as f64);
            polyline(
                &mut buf,
                &mean,
                x0,
                plot_y,
                PANEL_W,
                plot_h,
                "stroke=\"#d62728\" stroke-width=\"1.5\"",
            );
        }
        let _ = writeln!(buf, "</g>");
    }
    buf.push_str("</svg>\n");
    w.write_all(buf.as_bytes())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
