//! Phased elimination on a ten-arm linear bandit in the plane.

use contractlab::bandit::{phased_elimination, Environment, Stop, SyntheticLinear};
use contractlab::numerics::rng_new;

fn main() -> contractlab::Result<()> {
    let env = SyntheticLinear::standard();
    let mut rng = rng_new(7);
    let (history, state) = phased_elimination(&env, &env.arms, Stop::Horizon(50_000), 0.05, &mut rng)?;

    for b in &state.blocks {
        println!(
            "block {:>2}: T = {:>6}, support {}, threshold {:.3}, {} -> {} arms",
            b.ell,
            b.length,
            b.design_support,
            b.threshold,
            b.active_before.len(),
            b.active_after.len()
        );
    }
    let regret: f64 = history.iter().map(|p| env.gap(p.arm)).sum();
    println!(
        "survivors {:?} (best arm {}, mean {}), pseudo-regret {regret:.1} over {} pulls",
        state.active,
        env.best_arm(),
        env.true_mean(env.best_arm()),
        history.len()
    );
    Ok(())
}
