//! Cumulative pseudo-regret of the contract learner on the two-action instance.
//!
//! cargo run --release --example regret_curve -- [horizon] [replicates]

use std::time::Instant;

use contractlab::bandit::RegretSetup;
use contractlab::io::{read_distribution, read_instance};

fn main() -> contractlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let horizon: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let reps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");
    let inst = read_instance(format!("{data}/two_action.json"))?;
    let dist = read_distribution(format!("{data}/uniform.json"))?;

    let start = Instant::now();
    let setup = RegretSetup::new(&inst, &dist, horizon)?;
    println!(
        "eps = {}, d = {}, |P| = {}, k = {}, OPT_ref = {:.4}, setup {:?}",
        setup.env.eps,
        setup.env.dim(),
        setup.env.candidates,
        setup.env.arms.len(),
        setup.env.opt_ref,
        start.elapsed()
    );
    let runs = setup.run_many(0, reps)?;
    let checkpoints = [horizon / 10, horizon / 2, horizon];
    for &t in &checkpoints {
        let mean: f64 = runs.iter().map(|r| r.curve[t as usize - 1]).sum::<f64>() / reps as f64;
        println!("t = {t:>7}  mean R_t = {mean:10.2}  R_t/t = {:.4}", mean / t as f64);
    }
    let blocks: Vec<usize> = runs.iter().map(|r| r.blocks).collect();
    let survivors: Vec<usize> = runs.iter().map(|r| r.survivors).collect();
    println!("blocks per run {blocks:?}, survivors {survivors:?}");
    println!("regret bound term {:.1}, elapsed {:?}", setup.regret_bound(), start.elapsed());
    Ok(())
}
