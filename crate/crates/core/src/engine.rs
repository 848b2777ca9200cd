//! Seeded initialisation, per-agent control and the synchronous step loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::config_hash;
use crate::error::{Error, Result};
use crate::graph::FlockGraph;
use crate::metrics::{self, MetricsFrame};
use crate::model::{AgentParams, AgentState, Distribution, ScenarioConfig, Vec2};
use crate::negotiation::PairTable;
use crate::potentials::{alignment_gradient, cohesion_gradient, navigation_gradient};

/// Complete mutable state of a flock at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct FlockState {
    pub time: f64,
    /// Steps taken so far.
    pub step: usize,
    pub agents: Vec<AgentState>,
    pub pairs: PairTable,
    /// Proximity graph of the current positions.
    pub graph: FlockGraph,
}

impl FlockState {
    pub fn positions(&self) -> Vec<Vec2> {
        self.agents.iter().map(|a| a.position).collect()
    }
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub frames: Vec<MetricsFrame>,
    pub final_state: FlockState,
    pub seed: u64,
    pub config_hash: String,
}

/// Receives every frame as the run produces it.
pub trait MetricsSink {
    fn record(&mut self, state: &FlockState, frame: &MetricsFrame);
}

impl MetricsSink for () {
    fn record(&mut self, _: &FlockState, _: &MetricsFrame) {}
}

impl<F: FnMut(&FlockState, &MetricsFrame)> MetricsSink for F {
    fn record(&mut self, state: &FlockState, frame: &MetricsFrame) {
        self(state, frame)
    }
}

fn draw(rng: &mut ChaCha8Rng, dist: &Distribution) -> f64 {
    match *dist {
        Distribution::Fixed { value } => value,
        Distribution::Uniform { low, high } if low == high => low,
        Distribution::Uniform { low, high } => rng.gen_range(low..=high),
    }
}

/// Rejection sampling in the origin-centred spawn square, keeping every pair
/// at least `spawn_min_separation` apart.
fn spawn(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> Result<Vec<AgentState>> {
    const MAX_ATTEMPTS: usize = 100_000;
    let half = 0.5 * cfg.init_box;
    let min_sep = cfg.spawn_min_separation;
    let mut positions: Vec<Vec2> = Vec::with_capacity(cfg.n_agents);
    for _ in 0..cfg.n_agents {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let candidate = if half > 0.0 {
                Vec2::xy(rng.gen_range(-half..half), rng.gen_range(-half..half))
            } else {
                Vec2::ZERO
            };
            if positions.iter().all(|p| p.distance(candidate) >= min_sep) {
                positions.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::invalid(
                "spawn_min_separation",
                "agents do not fit into the spawn square at this separation",
            ));
        }
    }
    Ok(positions.into_iter().map(AgentState::at_rest).collect())
}

/// A running simulation: config, per-agent parameters and the evolving state.
#[derive(Debug)]
pub struct Simulation {
    cfg: ScenarioConfig,
    params: Vec<AgentParams>,
    initial_d: Vec<f64>,
    ranges: Vec<f64>,
    state: FlockState,
    pool: Option<rayon::ThreadPool>,
}

impl Simulation {
    /// Validates `cfg` and draws the initial state from its seed.
    ///
    /// Draw order is fixed: positions first (with rejections), then per agent
    /// `d_min`, `d_max`, `d(0)`.
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        let cfg = cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let agents = spawn(&mut rng, &cfg)?;
        let mut params = Vec::with_capacity(cfg.n_agents);
        let mut initial_d = Vec::with_capacity(cfg.n_agents);
        for _ in 0..cfg.n_agents {
            let d_min = draw(&mut rng, &cfg.d_min);
            let d_max = draw(&mut rng, &cfg.d_max);
            let d0 = draw(&mut rng, &cfg.d_init);
            let p = cfg.agent_params(d_min, d_max);
            p.validate()?;
            initial_d.push(p.clamp_separation(d0));
            params.push(p);
        }
        Self::from_parts(cfg, agents, params, initial_d)
    }

    /// Builds a simulation from explicit agents and parameters. `initial_d`
    /// is clamped into each agent's bounds.
    pub fn from_parts(
        cfg: ScenarioConfig,
        agents: Vec<AgentState>,
        params: Vec<AgentParams>,
        initial_d: Vec<f64>,
    ) -> Result<Self> {
        let cfg = cfg.validate()?;
        if agents.len() != params.len() || agents.len() != initial_d.len() || agents.is_empty() {
            return Err(Error::invalid(
                "n_agents",
                "agents, params and initial_d lengths differ",
            ));
        }
        for a in &agents {
            AgentState::new(a.position, a.velocity)?;
        }
        for p in &params {
            p.validate()?;
        }
        let initial_d: Vec<f64> = initial_d
            .iter()
            .zip(&params)
            .map(|(&d, p)| p.clamp_separation(d))
            .collect();
        let ranges: Vec<f64> = params.iter().map(|p| p.sensing_range).collect();
        let positions: Vec<Vec2> = agents.iter().map(|a| a.position).collect();
        let graph = FlockGraph::build(&positions, &ranges);
        let mut pairs = PairTable::new();
        pairs.refresh(&positions, &params, &initial_d, 0);
        let pool = if cfg.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build()
                    .expect("failed to build worker pool"),
            )
        } else {
            None
        };
        Ok(Simulation {
            state: FlockState {
                time: 0.0,
                step: 0,
                agents,
                pairs,
                graph,
            },
            cfg,
            params,
            initial_d,
            ranges,
            pool,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn state(&self) -> &FlockState {
        &self.state
    }

    pub fn params(&self) -> &[AgentParams] {
        &self.params
    }

    /// Per-agent `d(0)` after clamping.
    pub fn initial_separations(&self) -> &[f64] {
        &self.initial_d
    }

    /// Replaces the agent states, e.g. to start from a prepared configuration.
    pub fn set_agents(&mut self, agents: Vec<AgentState>) -> Result<()> {
        if agents.len() != self.params.len() {
            return Err(Error::invalid("n_agents", "agent count must not change"));
        }
        for a in &agents {
            AgentState::new(a.position, a.velocity)?;
        }
        self.state.agents = agents;
        self.refresh_topology();
        Ok(())
    }

    /// Mutable access to the pair table for seeding experiments.
    pub fn pairs_mut(&mut self) -> &mut PairTable {
        &mut self.state.pairs
    }

    /// Acceleration applied to agent `i` given the current state. Uses only
    /// `i`'s parameters, its own pair rows and neighbours within its own range.
    pub fn control(&self, i: usize) -> Result<Vec2> {
        control(i, &self.state, &self.params[i], &self.initial_d, &self.cfg)
    }

    fn refresh_topology(&mut self) {
        let positions = self.state.positions();
        self.state.graph = FlockGraph::build(&positions, &self.ranges);
        self.state
            .pairs
            .refresh(&positions, &self.params, &self.initial_d, self.state.step);
    }

    fn controls(&self) -> Result<Vec<Vec2>> {
        let n = self.state.agents.len();
        match &self.pool {
            Some(pool) => {
                pool.install(|| (0..n).into_par_iter().map(|i| self.control(i)).collect())
            }
            None => (0..n).map(|i| self.control(i)).collect(),
        }
    }

    /// Advances one synchronous step.
    ///
    /// Order: observer and negotiation on every active pair, controls from
    /// the pre-step positions and velocities, semi-implicit Euler, then the
    /// graph and pair activity are rebuilt for the new positions.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.cfg.dt;
        let positions = self.state.positions();
        self.state
            .pairs
            .update(&positions, &self.params, dt, self.cfg.negotiation_enabled);

        let u = self.controls()?;
        for (agent, a) in self.state.agents.iter_mut().zip(&u) {
            agent.velocity += *a * dt;
            agent.position += agent.velocity * dt;
        }
        for (i, agent) in self.state.agents.iter().enumerate() {
            let speed = agent.velocity.norm();
            if speed.is_nan() || speed > self.cfg.v_max || !agent.position.is_finite() {
                return Err(Error::Instability {
                    agent: i,
                    speed,
                    limit: self.cfg.v_max,
                });
            }
        }
        self.state.step += 1;
        self.state.time = self.state.step as f64 * dt;
        self.refresh_topology();
        Ok(())
    }

    pub fn frame(&self) -> MetricsFrame {
        metrics::frame(&self.state, &self.params)
    }

    /// Runs the configured number of steps, emitting one frame per step.
    pub fn run(mut self, sink: &mut dyn MetricsSink) -> Result<RunRecord> {
        let steps = self.cfg.steps();
        let mut frames = Vec::with_capacity(steps);
        for k in 0..steps {
            self.step().map_err(|e| Error::AtStep {
                step: k,
                source: Box::new(e),
            })?;
            let frame = self.frame();
            sink.record(&self.state, &frame);
            frames.push(frame);
        }
        Ok(RunRecord {
            frames,
            seed: self.cfg.seed,
            config_hash: config_hash(&self.cfg)?,
            final_state: self.state,
        })
    }
}

/// Control input of agent `i`: the negated sum of cohesion, alignment and
/// navigation gradients.
pub fn control(
    i: usize,
    state: &FlockState,
    params: &AgentParams,
    initial_d: &[f64],
    cfg: &ScenarioConfig,
) -> Result<Vec2> {
    let me = &state.agents[i];
    let r = params.sensing_range;
    let mut cohesion = Vec2::ZERO;
    let mut neighbours = Vec::new();
    for (j, other) in state.agents.iter().enumerate() {
        if j == i || me.position.distance(other.position) >= r {
            continue;
        }
        let d = state.pairs.d_own_or(i, j, initial_d[i]);
        cohesion +=
            cohesion_gradient(me.position, other.position, d, params.k_c).map_err(|e| match e {
                Error::Coincident { separation } => Error::CoincidentAgents { i, j, separation },
                e => e,
            })?;
        neighbours.push(other);
    }
    let alignment = alignment_gradient(
        me,
        neighbours.iter().copied(),
        r,
        params.epsilon,
        params.beta,
        params.k_a,
    );
    let navigation = navigation_gradient(
        me,
        &cfg.reference,
        state.graph.is_pinned(i),
        params.k_nx,
        params.k_nv,
    );
    Ok(-(cohesion + alignment + navigation))
}

/// Validates, initialises and runs `cfg` to completion.
pub fn run(cfg: ScenarioConfig, sink: &mut dyn MetricsSink) -> Result<RunRecord> {
    Simulation::new(cfg)?.run(sink)
}
