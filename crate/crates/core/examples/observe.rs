//! Runs the heterogeneous preset and observes every step through a closure.

use hetflock::{run, FlockState, MetricsFrame, ScenarioConfig};

fn main() -> hetflock::Result<()> {
    let cfg = ScenarioConfig {
        seed: 3,
        ..ScenarioConfig::heterogeneous()
    };
    let mut pinned_steps = 0;
    let record = run(cfg, &mut |state: &FlockState, _frame: &MetricsFrame| {
        // called once per step with the full state
        pinned_steps += state.graph.pins().len();
    })?;
    let last = record.frames.last().expect("at least one step");
    println!(
        "{} components at the end, {pinned_steps} pin-steps in total",
        last.n_components
    );
    Ok(())
}
