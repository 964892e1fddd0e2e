//! Approximately optimal contract for a piecewise-constant type density.

use contractlab::dist::expected_utility;
use contractlab::io::{read_distribution, read_instance};
use contractlab::numerics::ratio;
use contractlab::ptas::{ptas_contract, PtasConfig};

fn main() -> contractlab::Result<()> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");
    let inst = read_instance(format!("{data}/two_action.json"))?;
    let dist = read_distribution(format!("{data}/piecewise.json"))?;

    let configs = [
        PtasConfig::from_eps(ratio(2, 5))?,
        PtasConfig::from_eps(ratio(1, 1))?.with_delta(ratio(1, 4)).with_alpha(ratio(1, 2)),
    ];
    for cfg in &configs {
        let out = ptas_contract(&inst, &dist, cfg)?;
        let value = expected_utility(&inst, &dist, &out.contract);
        println!(
            "delta = {}, alpha = {}: k = {}, grid value {}, robust contract {:?} worth {value} (loss bound {})",
            cfg.delta,
            cfg.alpha,
            out.k,
            out.discrete_value,
            out.contract.to_strings(),
            out.bound
        );
    }
    Ok(())
}
