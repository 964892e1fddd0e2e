//! Encode a set-cover input as a contract instance and check both directions.

use contractlab::hardness::{
    cover_contract, example_system, reduce, verify_if_direction, verify_onlyif_bounds,
};

fn main() -> contractlab::Result<()> {
    let sc = example_system();
    let ri = reduce(&sc);
    println!(
        "n = {}, m = {}: {} actions, {} outcomes, {} types; smallest cover has {:?} sets",
        sc.n(),
        sc.m(),
        ri.inst.n_actions(),
        ri.inst.n_outcomes(),
        ri.dti.len(),
        sc.min_cover_size()
    );

    // Sets 2 and 3 (0-based 1 and 2) cover the universe.
    let cover = [1, 2];
    let report = verify_if_direction(&ri, &cover)?;
    println!("cover contract earns {} = ell: {}", report.total, report.exact_match);

    let converse = verify_onlyif_bounds(&ri, &cover_contract(&ri, &cover)?)?;
    println!(
        "classes E1 {:?} E2 {:?} E3 {:?}; aggregate {} <= {}; violations {}",
        converse.classes.e1,
        converse.classes.e2,
        converse.classes.e3,
        converse.aggregate_utility,
        converse.aggregate_bound,
        converse.violations
    );
    Ok(())
}
