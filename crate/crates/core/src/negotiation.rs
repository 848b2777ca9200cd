//! Per-directed-pair negotiation of desired separations.
//!
//! Agent `i` never sees `j`'s parameters. It low-pass filters the observed
//! distance into an estimate `d_est` of what `j` wants, then moves its own
//! `d_own` toward that estimate, gated by a bump over its own admissible
//! interval so estimates outside the interval have no influence at all.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{AgentParams, PairState, Vec2};
use crate::potentials::bump;

/// Ordered directed pair `(i, j)`: state held by `i` about `j`.
pub type PairId = (usize, usize);

/// One explicit Euler step of the first-order observer `d' = (s - d) / tau`.
#[inline]
pub fn filter_step(d_est: f64, observed_s: f64, tau: f64, dt: f64) -> f64 {
    d_est + (dt / tau) * (observed_s - d_est)
}

/// One explicit Euler step of `d_own' = -k_d * bump(d_est) * (d_own - d_est)`,
/// clamped to the agent's bounds.
pub fn negotiate_step(d_own: f64, d_est: f64, params: &AgentParams, dt: f64) -> f64 {
    let gate = bump(d_est, params.d_min, params.d_max, params.p);
    let next = d_own - dt * params.k_d * gate * (d_own - d_est);
    params.clamp_separation(next)
}

/// Same update without the clamp; used to check the clamp never has to act.
pub fn negotiate_step_unclamped(d_own: f64, d_est: f64, params: &AgentParams, dt: f64) -> f64 {
    let gate = bump(d_est, params.d_min, params.d_max, params.p);
    d_own - dt * params.k_d * gate * (d_own - d_est)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub state: PairState,
    /// Step index (0 = initial state) at which the pair first came into range.
    pub first_active: usize,
}

/// Sparse table of directed pair states, iterated in `(i, j)` order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    entries: BTreeMap<PairId, PairEntry>,
}

impl PairTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: PairId) -> Option<&PairState> {
        self.entries.get(&id).map(|e| &e.state)
    }

    pub fn entry(&self, id: PairId) -> Option<&PairEntry> {
        self.entries.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PairId, &PairState)> {
        self.entries.iter().map(|(&k, e)| (k, &e.state))
    }

    pub fn active(&self) -> impl Iterator<Item = (PairId, &PairState)> {
        self.iter().filter(|(_, s)| s.active)
    }

    /// Inserts or overwrites a pair; mostly useful for seeding tests.
    pub fn insert(&mut self, id: PairId, state: PairState, first_active: usize) {
        self.entries.insert(
            id,
            PairEntry {
                state,
                first_active,
            },
        );
    }

    /// Brings activity flags in line with current positions.
    ///
    /// `j` is in range of `i` when `|x_i - x_j| < r_i`. New pairs start with
    /// `d_own = initial_d[i]` and `d_est = d_own`. Pairs leaving range are
    /// frozen and resume from the frozen values if they come back.
    pub fn refresh(
        &mut self,
        positions: &[Vec2],
        params: &[AgentParams],
        initial_d: &[f64],
        step: usize,
    ) {
        let n = positions.len();
        for i in 0..n {
            let r = params[i].sensing_range;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let in_range = positions[i].distance(positions[j]) < r;
                match self.entries.get_mut(&(i, j)) {
                    Some(e) => e.state.active = in_range,
                    None if in_range => {
                        let d_own = params[i].clamp_separation(initial_d[i]);
                        self.entries.insert(
                            (i, j),
                            PairEntry {
                                state: PairState {
                                    d_own,
                                    d_est: d_own,
                                    active: true,
                                },
                                first_active: step,
                            },
                        );
                    }
                    None => {}
                }
            }
        }
    }

    /// Runs the observer on every active pair and, when `negotiate` is set,
    /// the bump-gated update of `d_own`. Each pair reads only its own state
    /// and the current positions.
    pub fn update(&mut self, positions: &[Vec2], params: &[AgentParams], dt: f64, negotiate: bool) {
        for (&(i, j), e) in self.entries.iter_mut() {
            if !e.state.active {
                continue;
            }
            let pi = &params[i];
            let observed = positions[i].distance(positions[j]);
            e.state.d_est = filter_step(e.state.d_est, observed, pi.tau, dt);
            if negotiate {
                e.state.d_own = negotiate_step(e.state.d_own, e.state.d_est, pi, dt);
            }
        }
    }

    /// Desired separation agent `i` uses toward `j`, falling back to `fallback`
    /// when no pair state exists yet.
    #[inline]
    pub fn d_own_or(&self, i: usize, j: usize, fallback: f64) -> f64 {
        self.entries
            .get(&(i, j))
            .map_or(fallback, |e| e.state.d_own)
    }
}
