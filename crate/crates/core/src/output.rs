//! Bit-stable text outputs of a run.
//!
//! All numbers are written with Rust's `{:.6}` formatting, which never
//! consults the locale. Absent values are empty fields.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::config;
use crate::engine::{RunRecord, Simulation};
use crate::error::Result;
use crate::metrics::{Heatmap, MetricsFrame};
use crate::model::{AgentParams, ScenarioConfig};

pub const METRICS_HEADER: &str =
    "time,n_edges,n_components,mean_all_dist,mean_conn_dist,min_conn_dist,max_conn_dist,n_violation_edges";

pub const METRICS_FILE: &str = "metrics.csv";
pub const HEATMAP_FILE: &str = "heatmap.csv";
pub const FINAL_STATE_FILE: &str = "final_state.csv";
pub const CONFIG_FILE: &str = "config.toml";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn metrics_csv(frames: &[MetricsFrame]) -> String {
    let mut out = String::with_capacity(64 * (frames.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for f in frames {
        let _ = writeln!(
            out,
            "{:.6},{},{},{},{},{},{},{}",
            f.time,
            f.n_edges,
            f.n_components,
            opt(f.mean_all_dist),
            opt(f.mean_conn_dist),
            opt(f.min_conn_dist),
            opt(f.max_conn_dist),
            f.n_violation_edges
        );
    }
    out
}

/// Header `pair,<t_1>,<t_2>,...`, then one row per pair ordinal. The header
/// is written even when no pair was ever active.
pub fn heatmap_csv(heatmap: &Heatmap) -> String {
    let mut out = String::from("pair");
    for t in &heatmap.times {
        let _ = write!(out, ",{t:.6}");
    }
    out.push('\n');
    for (ordinal, row) in heatmap.rows.iter().enumerate() {
        let _ = write!(out, "{ordinal}");
        for c in &row.cells {
            out.push(',');
            if let Some(e) = c {
                let _ = write!(out, "{e:.6}");
            }
        }
        out.push('\n');
    }
    out
}

pub const FINAL_STATE_HEADER: &str = "agent,x,y,vx,vy,d_init,d_min,d_max,pinned";

pub fn final_state_csv(record: &RunRecord, params: &[AgentParams], initial_d: &[f64]) -> String {
    let state = &record.final_state;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# time={:.6} seed={} config_sha256={}",
        state.time, record.seed, record.config_hash
    );
    out.push_str(FINAL_STATE_HEADER);
    out.push('\n');
    for (i, a) in state.agents.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            a.position.x,
            a.position.y,
            a.velocity.x,
            a.velocity.y,
            initial_d[i],
            params[i].d_min,
            params[i].d_max,
            u8::from(state.graph.is_pinned(i))
        );
    }
    out
}

pub fn write_metrics(path: &Path, frames: &[MetricsFrame]) -> io::Result<()> {
    fs::write(path, metrics_csv(frames))
}

pub fn write_heatmap(path: &Path, heatmap: &Heatmap) -> io::Result<()> {
    fs::write(path, heatmap_csv(heatmap))
}

/// Paths of the four files written for one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputBundle {
    pub metrics: PathBuf,
    pub heatmap: PathBuf,
    pub final_state: PathBuf,
    pub config: PathBuf,
}

impl OutputBundle {
    pub fn in_dir(dir: &Path) -> Self {
        OutputBundle {
            metrics: dir.join(METRICS_FILE),
            heatmap: dir.join(HEATMAP_FILE),
            final_state: dir.join(FINAL_STATE_FILE),
            config: dir.join(CONFIG_FILE),
        }
    }
}

/// Runs `cfg` and writes its bundle into `dir`, returning the record.
pub fn run_to_dir(cfg: &ScenarioConfig, dir: &Path) -> Result<(RunRecord, OutputBundle)> {
    fs::create_dir_all(dir)?;
    let bundle = OutputBundle::in_dir(dir);
    // echo first so a failed run can still be reproduced
    fs::write(&bundle.config, config::to_toml(cfg)?)?;
    let sim = Simulation::new(cfg.clone())?;
    let params = sim.params().to_vec();
    let initial_d = sim.initial_separations().to_vec();
    let record = sim.run(&mut ())?;
    write_metrics(&bundle.metrics, &record.frames)?;
    write_heatmap(&bundle.heatmap, &Heatmap::from_frames(&record.frames))?;
    fs::write(
        &bundle.final_state,
        final_state_csv(&record, &params, &initial_d),
    )?;
    Ok((record, bundle))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(t: f64, conn: Option<f64>) -> MetricsFrame {
        MetricsFrame {
            time: t,
            n_edges: usize::from(conn.is_some()),
            n_components: if conn.is_some() { 1 } else { 2 },
            mean_all_dist: Some(12.5),
            mean_conn_dist: conn,
            min_conn_dist: conn,
            max_conn_dist: conn,
            n_violation_edges: 0,
            sep_error_row: vec![],
        }
    }

    #[test]
    fn metrics_layout() {
        let csv = metrics_csv(&[frame(0.02, None), frame(0.04, Some(10.0))]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], METRICS_HEADER);
        assert_eq!(lines[1], "0.020000,0,2,12.500000,,,,0");
        assert_eq!(
            lines[2],
            "0.040000,1,1,12.500000,10.000000,10.000000,10.000000,0"
        );
    }

    #[test]
    fn empty_heatmap_is_header_only() {
        let h = Heatmap {
            times: vec![0.02, 0.04],
            rows: vec![],
        };
        assert_eq!(heatmap_csv(&h), "pair,0.020000,0.040000\n");
    }

    #[test]
    fn heatmap_sentinels_are_empty() {
        let h = Heatmap {
            times: vec![0.02, 0.04],
            rows: vec![crate::metrics::HeatmapRow {
                pair: (3, 1),
                cells: vec![None, Some(-0.5)],
            }],
        };
        assert_eq!(heatmap_csv(&h), "pair,0.020000,0.040000\n0,,-0.500000\n");
    }
}
