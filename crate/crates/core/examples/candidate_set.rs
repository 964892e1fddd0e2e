//! The finite contract set that contains an optimum for every weighting of a type grid.

use contractlab::dist::grid_types;
use contractlab::model::DiscreteTypeInstance;
use contractlab::numerics::ratio;
use contractlab::solver::{best_in_set, candidate_contract_set, solve_discrete_optimal};

fn main() -> contractlab::Result<()> {
    let inst = contractlab::cli::two_action_instance();
    let types = grid_types(&ratio(1, 4))?;
    let set = candidate_contract_set(&inst, &types, true)?;
    println!("{} candidates for types {types:?}", set.len());
    for p in &set {
        println!("  {:?}", p.to_strings());
    }

    // Any weighting of the grid: the best candidate matches the exact solver.
    let weights = vec![ratio(1, 10), ratio(2, 5), ratio(3, 10), ratio(1, 5)];
    let dti = DiscreteTypeInstance::new(types, weights)?;
    let (i, v) = best_in_set(&inst, &dti, &set).expect("nonempty set");
    let exact = solve_discrete_optimal(&inst, &dti, true)?;
    println!("best candidate {:?} = {v}, solver = {}", set[i].to_strings(), exact.value);
    Ok(())
}
