//! Best-arm identification, first on a synthetic bandit, then over contracts.

use contractlab::bandit::{pac_best_arm, pac_best_contract, SyntheticLinear};
use contractlab::dist::TypeDistribution;
use contractlab::numerics::{ratio, rng_new};
use contractlab::Error;

fn main() -> contractlab::Result<()> {
    let env = SyntheticLinear::standard();
    let r = pac_best_arm(&env, &env.arms, 0.2, 0.1, 0.0, &mut rng_new(1))?;
    println!(
        "synthetic: arm {} after {} blocks, {} samples (bound {}), ell* = {:.2}",
        r.arm, r.blocks, r.samples, r.sample_bound, r.ell_star
    );

    let inst = contractlab::cli::two_action_instance();
    let uniform = TypeDistribution::uniform();
    // The grid that carries the guarantee is far too fine to enumerate.
    match pac_best_contract(&inst, &uniform, 0.2, 0.1, 0, None, None) {
        Err(Error::Resource(msg)) => println!("default grid: {msg}"),
        other => println!("default grid: unexpected {other:?}"),
    }
    let c = pac_best_contract(&inst, &uniform, 0.2, 0.1, 0, Some(ratio(1, 10)), Some(0.0))?;
    println!(
        "eps = {}: contract {:?} worth {:.4} (best candidate {:.4}), {} samples",
        c.eps, c.contract, c.value, c.opt_ref, c.result.samples
    );
    Ok(())
}
