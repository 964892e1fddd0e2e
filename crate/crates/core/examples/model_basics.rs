//! Utilities, best responses and the exact expectation under a continuous type law.

use contractlab::dist::{expected_utility, TypeDistribution};
use contractlab::model::{best_response, best_response_segments, Contract};
use contractlab::numerics::ratio;

fn main() -> contractlab::Result<()> {
    let inst = contractlab::cli::two_action_instance();
    let p = Contract::new(vec![ratio(0, 1), ratio(1, 2)])?;

    for theta in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
        let br = best_response(&inst, &p, &theta);
        println!(
            "theta = {theta}: agent plays {} (IC set {:?}), principal gets {}",
            inst.label(br.action),
            br.ic_set,
            br.principal_utility
        );
    }

    // The type axis splits into intervals with a constant best response.
    for (lo, hi, a) in best_response_segments(&inst, &p) {
        println!("[{lo}, {hi}] -> {}", inst.label(a));
    }

    let uniform = TypeDistribution::uniform();
    println!("E[U^P] under the uniform law = {}", expected_utility(&inst, &uniform, &p));
    Ok(())
}
