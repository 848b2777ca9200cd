//! Domain types shared by every stage of the simulation.
//!
//! Everything that enters simulation state passes through a constructor or
//! [`ScenarioConfig::validate`], so NaN and infinities are rejected at the
//! boundary instead of surfacing as garbage trajectories later.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-dimensional vector used for positions, velocities and accelerations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    /// Checked constructor; rejects non-finite components.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let v = Vec2 { x, y };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("Vec2"))
        }
    }

    #[inline]
    pub const fn xy(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::xy(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::xy(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, k: f64) -> Vec2 {
        Vec2::xy(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::xy(-self.x, -self.y)
    }
}

/// Position and velocity of one agent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec2,
    pub velocity: Vec2,
}

impl AgentState {
    pub fn new(position: Vec2, velocity: Vec2) -> Result<Self> {
        if position.is_finite() && velocity.is_finite() {
            Ok(AgentState { position, velocity })
        } else {
            Err(Error::NonFinite("AgentState"))
        }
    }

    pub fn at_rest(position: Vec2) -> Self {
        AgentState {
            position,
            velocity: Vec2::ZERO,
        }
    }
}

/// Immutable per-agent configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    pub sensing_range: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub k_c: f64,
    pub k_a: f64,
    pub k_nx: f64,
    pub k_nv: f64,
    pub k_d: f64,
    pub tau: f64,
    pub p: f64,
    pub epsilon: f64,
    pub beta: f64,
}

impl AgentParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sensing_range", self.sensing_range),
            ("d_min", self.d_min),
            ("d_max", self.d_max),
            ("k_c", self.k_c),
            ("k_a", self.k_a),
            ("k_nx", self.k_nx),
            ("k_nv", self.k_nv),
            ("k_d", self.k_d),
            ("tau", self.tau),
            ("p", self.p),
            ("epsilon", self.epsilon),
            ("beta", self.beta),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.sensing_range <= 0.0 {
            return Err(Error::invalid("sensing_range", "must be positive"));
        }
        check_bounds(self.d_min, self.d_max, self.sensing_range)?;
        for (name, v) in [
            ("k_c", self.k_c),
            ("k_a", self.k_a),
            ("k_nx", self.k_nx),
            ("k_nv", self.k_nv),
            ("k_d", self.k_d),
        ] {
            if v < 0.0 {
                return Err(Error::invalid(name, "gains must be non-negative"));
            }
        }
        if self.tau <= 0.0 {
            return Err(Error::invalid("tau", "must be positive"));
        }
        if self.p <= 1.0 {
            return Err(Error::invalid("p", "must be greater than 1"));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::invalid("epsilon", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::invalid("beta", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Clamp a separation value into this agent's admissible interval.
    #[inline]
    pub fn clamp_separation(&self, d: f64) -> f64 {
        d.clamp(self.d_min, self.d_max)
    }
}

fn check_bounds(d_min: f64, d_max: f64, range: f64) -> Result<()> {
    if d_min <= 0.0 {
        return Err(Error::invalid("d_min", "must be positive"));
    }
    if d_min >= d_max {
        return Err(Error::invalid("d_min", "must be less than d_max"));
    }
    if d_max > range {
        return Err(Error::invalid("d_max", "must not exceed the sensing range"));
    }
    Ok(())
}

/// Directed pair state held by agent `i` about neighbour `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    /// Agent i's desired separation from j.
    pub d_own: f64,
    /// Agent i's estimate of j's desired separation.
    pub d_est: f64,
    pub active: bool,
}

/// Navigation reference tracked by pinned agents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceState {
    pub x_r: Vec2,
    pub v_r: Vec2,
}

/// Either a fixed value or a uniform draw over `[low, high]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Distribution {
    Fixed { value: f64 },
    Uniform { low: f64, high: f64 },
}

impl Distribution {
    pub fn fixed(value: f64) -> Self {
        Distribution::Fixed { value }
    }

    pub fn uniform(low: f64, high: f64) -> Self {
        Distribution::Uniform { low, high }
    }

    pub fn lower(&self) -> f64 {
        match *self {
            Distribution::Fixed { value } => value,
            Distribution::Uniform { low, .. } => low,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            Distribution::Fixed { value } => value,
            Distribution::Uniform { high, .. } => high,
        }
    }

    fn validate(&self, field: &'static str) -> Result<()> {
        match *self {
            Distribution::Fixed { value } if !value.is_finite() => {
                Err(Error::invalid(field, "must be finite"))
            }
            Distribution::Uniform { low, high } if !(low.is_finite() && high.is_finite()) => {
                Err(Error::invalid(field, "bounds must be finite"))
            }
            Distribution::Uniform { low, high } if low > high => {
                Err(Error::invalid(field, "low must not exceed high"))
            }
            _ => Ok(()),
        }
    }
}

/// Gains and constants shared by every agent of a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub k_c: f64,
    pub k_a: f64,
    pub k_nx: f64,
    pub k_nv: f64,
    pub k_d: f64,
    pub tau: f64,
    pub p: f64,
    /// Defaults to `(sqrt(1 + r^2) - 1) / r` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub beta: f64,
}

/// Full description of one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_agents: usize,
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    /// Side of the origin-centred square that agents spawn in.
    pub init_box: f64,
    /// Minimum distance between any two spawned agents.
    #[serde(default)]
    pub spawn_min_separation: f64,
    pub negotiation_enabled: bool,
    pub sensing_range: f64,
    /// Speed above which a run is aborted as numerically unstable.
    pub v_max: f64,
    /// Worker threads used for the per-agent fan-out. Results do not depend on it.
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub gains: Gains,
    pub reference: ReferenceState,
    pub d_init: Distribution,
    pub d_min: Distribution,
    pub d_max: Distribution,
}

fn default_workers() -> usize {
    1
}

pub const DEFAULT_BETA: f64 = 0.8;
pub const DEFAULT_K_A: f64 = 1.0;
pub const DEFAULT_V_MAX: f64 = 1.0e3;

/// ε that makes the ε-norm exactly 1 at distance `r`.
pub fn default_epsilon(r: f64) -> f64 {
    ((1.0 + r * r).sqrt() - 1.0) / r
}

impl ScenarioConfig {
    /// 30-agent homogeneous assembly with d = 10.
    pub fn homogeneous() -> Self {
        ScenarioConfig {
            n_agents: 30,
            dt: 0.02,
            duration: 90.0,
            seed: 1,
            init_box: 50.0,
            spawn_min_separation: 7.0,
            negotiation_enabled: false,
            sensing_range: 13.0,
            v_max: DEFAULT_V_MAX,
            workers: 1,
            gains: Gains {
                k_c: 1.0e5,
                k_a: DEFAULT_K_A,
                k_nx: 2.0,
                k_nv: 4.5,
                k_d: 0.2,
                tau: 0.5,
                p: 4.0,
                epsilon: None,
                beta: DEFAULT_BETA,
            },
            reference: ReferenceState::default(),
            d_init: Distribution::fixed(10.0),
            d_min: Distribution::fixed(5.0),
            d_max: Distribution::fixed(13.0),
        }
    }

    /// 7 agents with conflicting separations and bounds, negotiation on.
    pub fn heterogeneous() -> Self {
        ScenarioConfig {
            n_agents: 7,
            duration: 120.0,
            init_box: 40.0,
            negotiation_enabled: true,
            d_init: Distribution::uniform(5.0, 13.0),
            d_min: Distribution::uniform(5.0, 7.0),
            d_max: Distribution::uniform(9.0, 13.0),
            ..ScenarioConfig::homogeneous()
        }
    }

    pub const PRESETS: [&'static str; 2] = ["homogeneous", "heterogeneous"];

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "homogeneous" => Ok(Self::homogeneous()),
            "heterogeneous" => Ok(Self::heterogeneous()),
            other => Err(Error::UnknownScenario {
                name: other.to_string(),
                valid: Self::PRESETS.join(", "),
            }),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.gains
            .epsilon
            .unwrap_or_else(|| default_epsilon(self.sensing_range))
    }

    /// Number of steps executed by a full run: `ceil(duration / dt)`.
    pub fn steps(&self) -> usize {
        let ratio = self.duration / self.dt;
        // absorb representation noise such as 90 / 0.02 = 4500.000000000001
        let rounded = ratio.round();
        if (ratio - rounded).abs() < 1e-9 * rounded.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }

    /// Per-agent parameters with the separation bounds supplied by the caller.
    pub fn agent_params(&self, d_min: f64, d_max: f64) -> AgentParams {
        AgentParams {
            sensing_range: self.sensing_range,
            d_min,
            d_max,
            k_c: self.gains.k_c,
            k_a: self.gains.k_a,
            k_nx: self.gains.k_nx,
            k_nv: self.gains.k_nv,
            k_d: self.gains.k_d,
            tau: self.gains.tau,
            p: self.gains.p,
            epsilon: self.epsilon(),
            beta: self.gains.beta,
        }
    }

    /// Returns the config unchanged when every invariant holds.
    pub fn validate(self) -> Result<Self> {
        if self.n_agents < 1 {
            return Err(Error::invalid("n_agents", "must be at least 1"));
        }
        for (name, v) in [
            ("dt", self.dt),
            ("duration", self.duration),
            ("init_box", self.init_box),
            ("sensing_range", self.sensing_range),
            ("v_max", self.v_max),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.dt <= 0.0 {
            return Err(Error::invalid("dt", "dt must be positive"));
        }
        if self.duration < self.dt {
            return Err(Error::invalid("duration", "must be at least dt"));
        }
        if self.init_box < 0.0 {
            return Err(Error::invalid("init_box", "must be non-negative"));
        }
        if self.spawn_min_separation.is_nan() || self.spawn_min_separation < 0.0 {
            return Err(Error::invalid(
                "spawn_min_separation",
                "must be non-negative and finite",
            ));
        }
        if self.v_max <= 0.0 {
            return Err(Error::invalid("v_max", "must be positive"));
        }
        if self.workers < 1 {
            return Err(Error::invalid("workers", "must be at least 1"));
        }
        if !(self.reference.x_r.is_finite() && self.reference.v_r.is_finite()) {
            return Err(Error::invalid("reference", "must be finite"));
        }
        self.d_init.validate("d_init")?;
        self.d_min.validate("d_min")?;
        self.d_max.validate("d_max")?;
        if self.d_init.lower() <= 0.0 {
            return Err(Error::invalid("d_init", "must be positive"));
        }
        // every possible draw has to satisfy 0 < d_min < d_max <= r
        check_bounds(self.d_min.lower(), self.d_max.lower(), self.sensing_range)?;
        check_bounds(self.d_min.upper(), self.d_max.lower(), self.sensing_range)?;
        check_bounds(self.d_min.lower(), self.d_max.upper(), self.sensing_range)?;
        // the extreme pair still has to be a valid parameter set
        self.agent_params(self.d_min.upper(), self.d_max.upper())
            .validate()?;
        Ok(self)
    }
}
