//! Exact optimal contract for finitely many types, one LP per monotone action tuple.

use contractlab::model::DiscreteTypeInstance;
use contractlab::numerics::ratio;
use contractlab::solver::solve_discrete_optimal;

fn main() -> contractlab::Result<()> {
    let inst = contractlab::cli::two_action_instance();
    let types = DiscreteTypeInstance::new(vec![ratio(1, 4), ratio(3, 4)], vec![ratio(1, 2), ratio(1, 2)])?;

    for bounded in [false, true] {
        let rep = solve_discrete_optimal(&inst, &types, bounded)?;
        let tuple: Vec<String> = rep.best_tuple.iter().map(|&a| inst.label(a)).collect();
        println!(
            "bounded = {bounded}: value {} with p = {:?}, tuple {tuple:?}, {} LPs",
            rep.value,
            rep.best_contract.to_strings(),
            rep.tuples_solved
        );
    }
    Ok(())
}
