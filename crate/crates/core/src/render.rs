//! SVG drawings of wall structures and broken lines. Looijenga charts are
//! drawn as equal-angle sectors, each chart mapped linearly onto its sector.

use std::fmt::Write;

use num_traits::ToPrimitive;

use crate::broken_lines::BrokenLine;
use crate::error::Result;
use crate::scattering2d::{Atlas, Mode, WallStructure};
use crate::trunc_ring::{CurveClass, Exponent, Mono, Q};

const SIZE: f64 = 600.0;
const RADIUS: f64 = 260.0;

struct Frame<'a> {
    atlas: &'a Atlas,
    scale: f64,
}

impl Frame<'_> {
    /// Chart point to plane point.
    fn place(&self, chart: usize, v: [f64; 2]) -> [f64; 2] {
        match self.atlas.mode {
            Mode::Planar => v,
            Mode::Looijenga => {
                let n = self.atlas.chart_basis.len() as f64;
                let a = std::f64::consts::TAU * chart as f64 / n;
                let b = std::f64::consts::TAU * (chart as f64 + 1.0) / n;
                [v[0] * a.cos() + v[1] * b.cos(), v[0] * a.sin() + v[1] * b.sin()]
            }
        }
    }

    fn screen(&self, p: [f64; 2]) -> (f64, f64) {
        (SIZE / 2.0 + self.scale * p[0], SIZE / 2.0 - self.scale * p[1])
    }

    fn ambient(&self, v: &[Q]) -> [f64; 2] {
        let f = |x: &Q| x.to_f64().unwrap_or(0.0);
        match self.atlas.mode {
            Mode::Planar => [f(&v[0]), f(&v[1])],
            Mode::Looijenga => {
                for c in 0..self.atlas.chart_basis.len() {
                    if let Some(w) = self.atlas.to_chart_q(c, v) {
                        return self.place(c, [f(&w[0]), f(&w[1])]);
                    }
                }
                [0.0, 0.0]
            }
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn unit(p: [f64; 2]) -> [f64; 2] {
    let n = (p[0] * p[0] + p[1] * p[1]).sqrt().max(1e-12);
    [p[0] / n, p[1] / n]
}

/// Rays, chamber shading, kink labels and broken lines as an SVG 1.1 document.
pub fn render_svg(s: &WallStructure, lines: &[BrokenLine]) -> Result<String> {
    let atlas = Atlas::new(s)?;
    let mut reach: f64 = 1.0;
    for l in lines {
        for p in l.breakpoints.iter().chain(std::iter::once(&l.endpoint)) {
            let frame = Frame { atlas: &atlas, scale: 1.0 };
            let v = frame.ambient(p);
            reach = reach.max(v[0].abs()).max(v[1].abs());
        }
    }
    let frame = Frame { atlas: &atlas, scale: RADIUS / (1.5 * reach) };
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#).unwrap();
    writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();
    let (cx, cy) = frame.screen([0.0, 0.0]);
    for (k, sec) in atlas.sectors.iter().enumerate() {
        let a = unit(frame.place(sec.chart, [sec.cw[0] as f64, sec.cw[1] as f64]));
        let b = unit(frame.place(sec.chart, [sec.ccw[0] as f64, sec.ccw[1] as f64]));
        let (ax, ay) = (cx + RADIUS * a[0], cy - RADIUS * a[1]);
        let (bx, by) = (cx + RADIUS * b[0], cy - RADIUS * b[1]);
        let shade = if k % 2 == 0 { "#eef3fb" } else { "#f7f7f7" };
        writeln!(out, r#"<path d="M {cx:.2} {cy:.2} L {ax:.2} {ay:.2} L {bx:.2} {by:.2} Z" fill="{shade}" stroke="none"><title>chamber {}</title></path>"#, k + 1).unwrap();
    }
    for r in &atlas.rays {
        let d = unit(frame.place(r.chart_after, [r.dir_after[0] as f64, r.dir_after[1] as f64]));
        let (x, y) = (cx + RADIUS * d[0], cy - RADIUS * d[1]);
        let colour = if r.has_wall { "#c0392b" } else { "#555555" };
        let mut title = format!("ray ({})", r.ambient.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        if r.has_wall {
            title.push_str(&format!(" f = {}", r.f_after.render(&s.class_names)));
        }
        writeln!(out, r#"<line x1="{cx:.2}" y1="{cy:.2}" x2="{x:.2}" y2="{y:.2}" stroke="{colour}" stroke-width="2"><title>{}</title></line>"#, escape(&title)).unwrap();
        if r.is_kink {
            let label = CurveClass(r.kink.clone()).display_with(&s.class_names);
            writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif">kink {}</text>"#, x + 6.0 * d[0], y - 6.0 * d[1], escape(&label)).unwrap();
        }
    }
    for l in lines {
        let mut pts: Vec<[f64; 2]> = Vec::new();
        let first = &l.segments[0];
        let start_chart = atlas.sectors[first.sector].chart;
        let anchor = l.breakpoints.first().map_or_else(|| frame.ambient(&l.endpoint), |b| frame.ambient(b));
        let p = unit(frame.place(start_chart, [first.m[0] as f64, first.m[1] as f64]));
        pts.push([anchor[0] + 2.0 * reach * p[0], anchor[1] + 2.0 * reach * p[1]]);
        for b in &l.breakpoints {
            pts.push(frame.ambient(b));
        }
        pts.push(frame.ambient(&l.endpoint));
        let path: Vec<String> = pts.iter().map(|p| { let (x, y) = frame.screen(*p); format!("{x:.2},{y:.2}") }).collect();
        let last = l.segments.last().expect("segment");
        let mono = Mono::new(last.beta.clone(), atlas.to_ambient(atlas.sectors[last.sector].chart, last.m));
        let title = format!("{} {}", last.coeff, mono.render(&s.class_names));
        writeln!(out, r##"<polyline points="{}" fill="none" stroke="#1f6f43" stroke-width="1.5"><title>{}</title></polyline>"##, path.join(" "), escape(title.trim())).unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}
