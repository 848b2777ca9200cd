//! Per-step connectivity, separation and constraint statistics, and the
//! separation-error heatmap.

use std::collections::BTreeMap;

use crate::engine::{FlockState, RunRecord};
use crate::model::AgentParams;
use crate::negotiation::PairId;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsFrame {
    pub time: f64,
    pub n_edges: usize,
    pub n_components: usize,
    /// Mean over all unordered agent pairs; absent with fewer than two agents.
    pub mean_all_dist: Option<f64>,
    pub mean_conn_dist: Option<f64>,
    pub min_conn_dist: Option<f64>,
    pub max_conn_dist: Option<f64>,
    pub n_violation_edges: usize,
    /// `e_s = d_est - d_own` for every active directed pair, ordered by pair.
    pub sep_error_row: Vec<(PairId, f64)>,
}

fn outside(d: f64, p: &AgentParams) -> bool {
    d < p.d_min || d > p.d_max
}

/// Computes one frame from the state's cached graph and pair table.
///
/// An edge counts as a violation when either endpoint's desired separation
/// toward the other lies outside the other endpoint's bounds.
pub fn frame(state: &FlockState, params: &[AgentParams]) -> MetricsFrame {
    let agents = &state.agents;
    let n = agents.len();

    let mut all_sum = 0.0;
    let mut all_count = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            all_sum += agents[i].position.distance(agents[j].position);
            all_count += 1;
        }
    }

    let mut n_edges = 0usize;
    let mut conn_sum = 0.0;
    let mut conn_min = f64::INFINITY;
    let mut conn_max = f64::NEG_INFINITY;
    let mut n_violation_edges = 0usize;
    for (i, j) in state.graph.adjacency.edges() {
        let s = agents[i].position.distance(agents[j].position);
        n_edges += 1;
        conn_sum += s;
        conn_min = conn_min.min(s);
        conn_max = conn_max.max(s);
        let ij = state.pairs.get((i, j)).map(|p| p.d_own);
        let ji = state.pairs.get((j, i)).map(|p| p.d_own);
        let violated = ji.is_some_and(|d| outside(d, &params[i]))
            || ij.is_some_and(|d| outside(d, &params[j]));
        if violated {
            n_violation_edges += 1;
        }
    }

    let conn = |v: f64| (n_edges > 0).then_some(v);
    MetricsFrame {
        time: state.time,
        n_edges,
        n_components: state.graph.components.len(),
        mean_all_dist: (all_count > 0).then(|| all_sum / all_count as f64),
        mean_conn_dist: conn(conn_sum / n_edges.max(1) as f64),
        min_conn_dist: conn(conn_min),
        max_conn_dist: conn(conn_max),
        n_violation_edges,
        sep_error_row: state
            .pairs
            .active()
            .map(|(id, s)| (id, s.d_est - s.d_own))
            .collect(),
    }
}

/// One heatmap row: an anonymised directed pair and its error per step.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapRow {
    /// Underlying pair; the written file only carries the row ordinal.
    pub pair: PairId,
    /// `None` where the pair was out of range.
    pub cells: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Heatmap {
    pub times: Vec<f64>,
    pub rows: Vec<HeatmapRow>,
}

impl Heatmap {
    /// Rows ordered by first active frame, then by pair.
    pub fn from_frames(frames: &[MetricsFrame]) -> Self {
        let mut first_seen: BTreeMap<PairId, usize> = BTreeMap::new();
        for (k, f) in frames.iter().enumerate() {
            for &(id, _) in &f.sep_error_row {
                first_seen.entry(id).or_insert(k);
            }
        }
        let mut order: Vec<(usize, PairId)> = first_seen.iter().map(|(&id, &k)| (k, id)).collect();
        order.sort_unstable();
        let index: BTreeMap<PairId, usize> = order
            .iter()
            .enumerate()
            .map(|(row, &(_, id))| (id, row))
            .collect();

        let mut rows: Vec<HeatmapRow> = order
            .iter()
            .map(|&(_, pair)| HeatmapRow {
                pair,
                cells: vec![None; frames.len()],
            })
            .collect();
        for (k, f) in frames.iter().enumerate() {
            for &(id, e) in &f.sep_error_row {
                rows[index[&id]].cells[k] = Some(e);
            }
        }
        Heatmap {
            times: frames.iter().map(|f| f.time).collect(),
            rows,
        }
    }
}

pub fn heatmap(record: &RunRecord) -> Heatmap {
    Heatmap::from_frames(&record.frames)
}
