//! File emission: samples CSV, trajectory/summary JSON, comparison tables,
//! and the 2-D trajectory SVG. All numeric text uses round-trip formatting
//! (shortest decimal that parses back to the same float), so repeated runs
//! are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::{GapProfile, SampleQuality};
use crate::error::Result;
use crate::sampler::{BatchSummary, TrajectoryRecord};
use crate::world::LabeledPointCloud;

/// samples.csv: one row per chain with the final sample coordinates.
pub fn write_samples_csv(
    path: &Path,
    records: &[TrajectoryRecord],
    dimension: usize,
) -> Result<()> {
    let mut out = String::from("chain");
    for k in 0..dimension {
        write!(out, ",x{k}").unwrap();
    }
    out.push('\n');
    for rec in records {
        write!(out, "{}", rec.chain).unwrap();
        for v in rec.final_state.iter() {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunSummary<'a, C: Serialize> {
    /// Effective configuration with every default filled in.
    pub config: &'a C,
    pub summary: &'a BatchSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_quality: Option<&'a SampleQuality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_profile: Option<&'a GapProfile>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// One row of the method comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub method: String,
    pub guidance: f64,
    pub steps: usize,
    pub projection_iters: usize,
    pub window: usize,
    pub damping: f64,
    pub energy_distance: f64,
    pub mean_min_distance: f64,
    pub mean_final_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_r: Option<f64>,
    pub divergences: usize,
    pub wall_time_s: f64,
}

pub fn write_compare_csv(path: &Path, rows: &[CompareRow]) -> Result<()> {
    let mut out = String::from(
        "method,guidance,steps,projection_iters,window,damping,\
         energy_distance,mean_min_distance,mean_final_gap,mean_r,divergences,wall_time_s\n",
    );
    for r in rows {
        let mean_r = r.mean_r.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.guidance,
            r.steps,
            r.projection_iters,
            r.window,
            r.damping,
            r.energy_distance,
            r.mean_min_distance,
            r.mean_final_gap,
            mean_r,
            r.divergences,
            r.wall_time_s
        )
        .unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Fixed-viewport 2-D plot: cloud points as circles (one fill per label),
/// chain paths as polylines, initial states as small markers.
pub fn write_trajectory_svg(
    path: &Path,
    records: &[TrajectoryRecord],
    world: &LabeledPointCloud,
) -> Result<()> {
    assert_eq!(world.dimension(), 2, "svg plotting is 2-D only");
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const MARGIN: f64 = 40.0;

    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    let mut extend = |x: f64, y: f64| {
        min[0] = min[0].min(x);
        max[0] = max[0].max(x);
        min[1] = min[1].min(y);
        max[1] = max[1].max(y);
    };
    for p in world.points() {
        extend(p[0], p[1]);
    }
    for rec in records {
        extend(rec.initial[0], rec.initial[1]);
        extend(rec.final_state[0], rec.final_state[1]);
        for s in &rec.steps {
            extend(s.state[0], s.state[1]);
        }
    }
    let span_x = (max[0] - min[0]).max(1e-9);
    let span_y = (max[1] - min[1]).max(1e-9);
    let scale = ((W - 2.0 * MARGIN) / span_x).min((H - 2.0 * MARGIN) / span_y);
    let sx = |x: f64| MARGIN + (x - min[0]) * scale;
    let sy = |y: f64| H - MARGIN - (y - min[1]) * scale;

    let palette = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b"];
    let labels: Vec<&str> = world.label_names().collect();
    let color_of = |label: &str| {
        let idx = labels.iter().position(|l| *l == label).unwrap_or(0);
        palette[idx % palette.len()]
    };

    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
    .unwrap();
    for rec in records {
        if rec.steps.is_empty() {
            continue;
        }
        let mut points = String::new();
        for s in &rec.steps {
            write!(points, "{:.2},{:.2} ", sx(s.state[0]), sy(s.state[1])).unwrap();
        }
        write!(
            points,
            "{:.2},{:.2}",
            sx(rec.final_state[0]),
            sy(rec.final_state[1])
        )
        .unwrap();
        writeln!(
            svg,
            "<polyline points=\"{points}\" fill=\"none\" stroke=\"#888888\" \
             stroke-width=\"1\" stroke-opacity=\"0.6\"/>"
        )
        .unwrap();
        writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"#444444\"/>",
            sx(rec.initial[0]),
            sy(rec.initial[1])
        )
        .unwrap();
    }
    for (p, label) in world.points().iter().zip(world.labels()) {
        writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\" stroke=\"black\" \
             stroke-width=\"0.5\"/>",
            sx(p[0]),
            sy(p[1]),
            color_of(label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}
